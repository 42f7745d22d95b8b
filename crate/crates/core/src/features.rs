//! Experimental features: half-page background, margin gradients, random
//! paragraph indents and the maximal cover title.

use serde::{Deserialize, Serialize};

use crate::geom::{Cmyk, Rect};
use crate::rng::SeededStream;
use crate::rules::RuleSet;
use crate::typeset::layout::{
    DecorFrame, Fill, Frame, FrameKind, GradientSide, Layer, LayoutDocument, PageKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Feature {
    HalfPageBackground,
    MarginGradient,
    RandomIndent,
    MaxCoverTitle,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::HalfPageBackground,
        Feature::MarginGradient,
        Feature::RandomIndent,
        Feature::MaxCoverTitle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::HalfPageBackground => "halfPageBackground",
            Feature::MarginGradient => "marginGradient",
            Feature::RandomIndent => "randomIndent",
            Feature::MaxCoverTitle => "maxCoverTitle",
        }
    }
}

impl std::str::FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GradientMargins {
    Inner,
    Outer,
    Both,
}

impl GradientMargins {
    pub const ALL: [GradientMargins; 3] =
        [GradientMargins::Inner, GradientMargins::Outer, GradientMargins::Both];
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureSet {
    pub half_page_background: bool,
    /// Set exactly when the gradient feature is on.
    pub margin_gradient: Option<GradientMargins>,
    pub random_indent: bool,
    pub max_cover_title: bool,
    /// Palette colour, set as soon as any feature is on.
    pub color: Option<Cmyk>,
}

impl FeatureSet {
    pub fn enabled(&self) -> Vec<Feature> {
        let mut out = Vec::new();
        if self.half_page_background {
            out.push(Feature::HalfPageBackground);
        }
        if self.margin_gradient.is_some() {
            out.push(Feature::MarginGradient);
        }
        if self.random_indent {
            out.push(Feature::RandomIndent);
        }
        if self.max_cover_title {
            out.push(Feature::MaxCoverTitle);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.enabled().is_empty()
    }
}

/// Feature choices fixed by the user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplicitFeatures {
    pub features: Vec<Feature>,
    pub color: Option<Cmyk>,
    pub gradient: Option<GradientMargins>,
}

/// Resolves the feature set. Always consumes six draws: four feature
/// coins, the colour and the gradient margin choice.
pub fn select_features(
    explicit: &ExplicitFeatures,
    surprise: bool,
    stream: &mut SeededStream,
    rules: &RuleSet,
) -> FeatureSet {
    let mut on = [false; 4];
    for (i, f) in Feature::ALL.iter().enumerate() {
        let coin = stream.chance(rules.feature_probability);
        on[i] = explicit.features.contains(f) || (surprise && coin);
    }
    let drawn_color = stream.pick(&rules.cover_colors).map(|c| c.cmyk);
    let drawn_margins = *stream
        .pick(&GradientMargins::ALL)
        .expect("gradient options are non-empty");
    let any = on.iter().any(|b| *b);
    FeatureSet {
        half_page_background: on[0],
        margin_gradient: on[1].then(|| explicit.gradient.unwrap_or(drawn_margins)),
        random_indent: on[2],
        max_cover_title: on[3],
        color: if any { explicit.color.or(drawn_color) } else { None },
    }
}

/// Adds background-layer artwork for the enabled features to every
/// interior page. Content and furniture frames are left as they are.
pub fn apply_features(doc: &LayoutDocument, fs: &FeatureSet, _stream: &mut SeededStream) -> LayoutDocument {
    let mut out = doc.clone();
    let Some(color) = fs.color else {
        return out;
    };
    if !fs.half_page_background && fs.margin_gradient.is_none() {
        return out;
    }
    for page in out.pages.iter_mut().filter(|p| p.kind != PageKind::Cover) {
        let mut decor = Vec::new();
        let (w, h) = (page.width, page.height);
        if fs.half_page_background {
            let x = if page.recto { w / 2.0 } else { 0.0 };
            decor.push(Frame {
                rect: Rect::new(x, 0.0, w / 2.0, h),
                layer: Layer::Background,
                kind: FrameKind::Decor(DecorFrame {
                    name: "halfPageBackground".into(),
                    fill: Fill::Solid { color },
                }),
            });
        }
        if let Some(which) = fs.margin_gradient {
            let block = page.block;
            let left = Rect::new(0.0, 0.0, block.x, h);
            let right = Rect::new(block.right(), 0.0, w - block.right(), h);
            // the inner margin is on the left of a recto page
            let (inner, outer) = if page.recto {
                ((left, GradientSide::Left), (right, GradientSide::Right))
            } else {
                ((right, GradientSide::Right), (left, GradientSide::Left))
            };
            let sides = match which {
                GradientMargins::Inner => vec![inner],
                GradientMargins::Outer => vec![outer],
                GradientMargins::Both => vec![inner, outer],
            };
            for (rect, from) in sides {
                decor.push(Frame {
                    rect,
                    layer: Layer::Background,
                    kind: FrameKind::Decor(DecorFrame {
                        name: "marginGradient".into(),
                        fill: Fill::Gradient {
                            color,
                            to: Cmyk::WHITE,
                            from,
                        },
                    }),
                });
            }
        }
        decor.append(&mut page.frames);
        page.frames = decor;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::default_rules;

    #[test]
    fn explicit_flags_pass_through() {
        let r = default_rules();
        let ex = ExplicitFeatures {
            features: vec![Feature::MarginGradient],
            ..Default::default()
        };
        let fs = select_features(&ex, false, &mut SeededStream::new(1), &r);
        assert_eq!(fs.enabled(), vec![Feature::MarginGradient]);
        assert!(fs.margin_gradient.is_some());
        let palette: Vec<Cmyk> = r.cover_colors.iter().map(|c| c.cmyk).collect();
        assert!(palette.contains(&fs.color.unwrap()));
    }

    #[test]
    fn zero_probability_surprise_is_empty() {
        let mut r = default_rules();
        r.feature_probability = 0.0;
        let fs = select_features(&ExplicitFeatures::default(), true, &mut SeededStream::new(5), &r);
        assert!(fs.is_empty());
        assert_eq!(fs.color, None);
    }

    #[test]
    fn surprise_is_deterministic_and_draw_count_fixed() {
        let r = default_rules();
        let mut a = SeededStream::new(77);
        let mut b = SeededStream::new(77);
        let fa = select_features(&ExplicitFeatures::default(), true, &mut a, &r);
        let fb = select_features(&ExplicitFeatures::default(), true, &mut b, &r);
        assert_eq!(fa, fb);
        assert_eq!(a.draws(), 6);
        let mut c = SeededStream::new(77);
        select_features(&ExplicitFeatures::default(), false, &mut c, &r);
        assert_eq!(c.draws(), 6);
    }

    #[test]
    fn certain_surprise_enables_everything() {
        let mut r = default_rules();
        r.feature_probability = 1.0;
        let fs = select_features(&ExplicitFeatures::default(), true, &mut SeededStream::new(5), &r);
        assert_eq!(fs.enabled().len(), 4);
    }
}
