//! Physical units and rectangles.

use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// Millimetres per PostScript point.
pub const MM_PER_PT: f64 = 25.4 / 72.0;

#[inline]
pub fn pt_to_mm(pt: f64) -> f64 {
    pt * MM_PER_PT
}

#[inline]
pub fn mm_to_pt(mm: f64) -> f64 {
    mm / MM_PER_PT
}

/// Rounds to one decimal place (0.1 mm / 0.1 pt grid used by the planner).
#[inline]
pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Rounds to two decimal places.
#[inline]
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Axis-aligned rectangle, origin at the top-left of the page, y growing down.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect<S> {
    pub x: S,
    pub y: S,
    pub w: S,
    pub h: S,
}

impl<S: Scalar> Rect<S> {
    pub fn new(x: S, y: S, w: S, h: S) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> S {
        self.x + self.w
    }

    pub fn bottom(&self) -> S {
        self.y + self.h
    }

    /// True when `other` lies inside `self`, allowing `eps` of slack on every edge.
    pub fn contains(&self, other: &Rect<S>, eps: S) -> bool {
        other.x >= self.x - eps
            && other.y >= self.y - eps
            && other.right() <= self.right() + eps
            && other.bottom() <= self.bottom() + eps
    }

    /// True when the interiors intersect by more than `eps` on both axes.
    pub fn overlaps(&self, other: &Rect<S>, eps: S) -> bool {
        let dx = self.right().min(other.right()) - self.x.max(other.x);
        let dy = self.bottom().min(other.bottom()) - self.y.max(other.y);
        dx > eps && dy > eps
    }
}

/// Closed numeric interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span<S> {
    pub min: S,
    pub max: S,
}

impl<S: Scalar> Span<S> {
    pub fn new(min: S, max: S) -> Self {
        Span { min, max }
    }

    pub fn is_ordered(&self) -> bool {
        self.min <= self.max
    }

    pub fn contains(&self, v: S) -> bool {
        v >= self.min && v <= self.max
    }

    /// Containment with a relative slack for values that went through decimal text.
    pub fn contains_approx(&self, v: S) -> bool {
        let eps = S::lit(1e-9) * (S::one() + self.min.abs().max(self.max.abs()));
        v >= self.min - eps && v <= self.max + eps
    }

    pub fn clamp(&self, v: S) -> S {
        v.clamp_to(self.min, self.max)
    }

    pub fn width(&self) -> S {
        self.max - self.min
    }

    pub fn mid(&self) -> S {
        (self.min + self.max) / S::lit(2.0)
    }

    /// Maps `v` onto `[0, 1]` relative to the interval; degenerate spans map to 0.
    pub fn normalize(&self, v: S) -> S {
        let w = self.width();
        if w <= S::zero() {
            S::zero()
        } else {
            ((v - self.min) / w).clamp_to(S::zero(), S::one())
        }
    }
}

/// Process colour, components in percent (0–100).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cmyk(pub [f64; 4]);

impl Cmyk {
    pub const WHITE: Cmyk = Cmyk([0.0, 0.0, 0.0, 0.0]);

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|c| c.is_finite() && (0.0..=100.0).contains(c))
    }

    /// Naive device conversion: `r = 255 (1 - c) (1 - k)` and likewise for g, b.
    pub fn to_srgb(&self) -> [u8; 3] {
        let [c, m, y, k] = self.0.map(|v| (v / 100.0).clamp(0.0, 1.0));
        let ch = |v: f64| (255.0 * (1.0 - v) * (1.0 - k)).round() as u8;
        [ch(c), ch(m), ch(y)]
    }

    pub fn to_hex(&self) -> String {
        let [r, g, b] = self.to_srgb();
        format!("#{r:02x}{g:02x}{b:02x}")
    }
}

impl std::fmt::Display for Cmyk {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [c, m, y, k] = self.0;
        write!(
            f,
            "CMYK({}, {}, {}, {})",
            fmt_num(c),
            fmt_num(m),
            fmt_num(y),
            fmt_num(k)
        )
    }
}

/// Formats a number without trailing zeros: `130.0 -> "130"`, `13.70 -> "13.7"`.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion_round_trips() {
        assert!((mm_to_pt(25.4) - 72.0).abs() < 1e-12);
        assert!((pt_to_mm(mm_to_pt(96.0)) - 96.0).abs() < 1e-12);
    }

    #[test]
    fn span_normalizes_endpoints() {
        let s = Span::new(8.0, 12.0);
        assert_eq!(s.normalize(8.0), 0.0);
        assert_eq!(s.normalize(10.0), 0.5);
        assert_eq!(s.normalize(12.0), 1.0);
        let s32: Span<f32> = Span::new(8.0, 12.0);
        assert_eq!(s32.normalize(10.0), 0.5);
    }

    #[test]
    fn rect_containment_and_overlap() {
        let outer = Rect::new(0.0, 0.0, 10.0, 10.0);
        assert!(outer.contains(&Rect::new(1.0, 1.0, 9.0, 9.0), 1e-9));
        assert!(!outer.contains(&Rect::new(1.0, 1.0, 9.5, 9.0), 1e-9));
        let a = Rect::new(0.0, 0.0, 5.0, 5.0);
        let b = Rect::new(5.0, 0.0, 5.0, 5.0);
        assert!(!a.overlaps(&b, 1e-9));
        assert!(a.overlaps(&Rect::new(4.0, 4.0, 2.0, 2.0), 1e-9));
    }

    #[test]
    fn cmyk_naive_conversion() {
        assert_eq!(Cmyk([100.0, 0.0, 0.0, 0.0]).to_srgb(), [0, 255, 255]);
        assert_eq!(Cmyk([0.0, 0.0, 0.0, 100.0]).to_srgb(), [0, 0, 0]);
        assert_eq!(Cmyk([2.0, 14.0, 38.0, 0.0]).to_hex(), "#fadb9e");
        assert_eq!(Cmyk([2.0, 14.0, 38.0, 0.0]).to_string(), "CMYK(2, 14, 38, 0)");
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(130.0), "130");
        assert_eq!(fmt_num(13.7), "13.7");
        assert_eq!(fmt_num(-0.0001), "0");
    }
}
