//! Diversity and coherence of sets of designs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fmt_num, Span};
use crate::num::Scalar;
use crate::planner::{CaptionPlacement, DesignSettings};
use crate::rules::{Orientation, RuleSet};

pub const CATEGORICAL: usize = 8;
pub const NUMERIC: usize = 4;
pub const SLOTS: usize = CATEGORICAL + NUMERIC;

/// Slot names in vector order.
pub const SLOT_NAMES: [&str; SLOTS] = [
    "page",
    "orientation",
    "pairing",
    "alignment",
    "headerLayout",
    "paragraphMark",
    "captionPlacement",
    "features",
    "margins",
    "columns",
    "bodySize",
    "leadingRatio",
];

/// Fingerprint of a design: categorical slots first, then numeric slots
/// normalized to [0, 1] over the rule ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeVector<S> {
    pub categorical: [String; CATEGORICAL],
    pub numeric: [S; NUMERIC],
}

/// Most columns any size option can hold.
fn max_columns(rules: &RuleSet) -> u32 {
    let min_block = 2.0 * rules.margins.inside_outside.min;
    rules
        .size_options
        .iter()
        .map(|s| ((s.width - min_block) / rules.columns.width.min).floor().max(1.0) as u32)
        .max()
        .unwrap_or(1)
}

fn norm<S: Scalar>(span: Span<f64>, v: f64) -> S {
    S::lit(span.normalize(v)).clamp_to(S::zero(), S::one())
}

pub fn attribute_vector<S: Scalar>(s: &DesignSettings, rules: &RuleSet) -> AttributeVector<S> {
    let orientation = match Orientation::of(s.page.w, s.page.h) {
        Orientation::Portrait => "portrait",
        Orientation::Landscape => "landscape",
        Orientation::Square => "square",
    };
    let features = s.features.enabled();
    let features = if features.is_empty() {
        "none".to_string()
    } else {
        features.iter().map(|f| f.as_str()).collect::<Vec<_>>().join("+")
    };
    let placement = match s.caption.placement {
        CaptionPlacement::BelowLeft => "belowLeft",
        CaptionPlacement::AsideRotated => "asideRotated",
    };
    let tb = rules.margins.top_bottom;
    let io = rules.margins.inside_outside;
    let m = &s.margins;
    let margins: S = (norm::<S>(tb, m.top) + norm(tb, m.bottom) + norm(io, m.inside) + norm(io, m.outside))
        / S::lit(4.0);
    let cols = Span::new(1.0, f64::from(max_columns(rules).max(2)));
    AttributeVector {
        categorical: [
            format!("{}x{}", fmt_num(s.page.w), fmt_num(s.page.h)),
            orientation.into(),
            s.pairing.clone(),
            s.body.alignment.as_str().into(),
            s.header_layout.clone(),
            s.body.paragraph_mark.as_str().into(),
            placement.into(),
            features,
        ],
        numeric: [
            margins,
            norm(cols, f64::from(s.grid.columns)),
            norm(rules.font_size.body, s.body.size),
            norm(rules.leading.span(), s.leading_ratio()),
        ],
    }
}

/// Per-slot distances between two vectors.
pub fn slot_distances<S: Scalar>(a: &AttributeVector<S>, b: &AttributeVector<S>) -> [S; SLOTS] {
    let mut d = [S::zero(); SLOTS];
    for i in 0..CATEGORICAL {
        d[i] = if a.categorical[i] == b.categorical[i] { S::zero() } else { S::one() };
    }
    for i in 0..NUMERIC {
        d[CATEGORICAL + i] = (a.numeric[i] - b.numeric[i]).abs();
    }
    d
}

/// Mean per-slot distance over all unordered pairs.
pub fn diversity_score<S: Scalar>(vectors: &[AttributeVector<S>]) -> Result<S> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::TooFewDesigns(n));
    }
    let mut total = S::zero();
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let d = slot_distances(&vectors[i], &vectors[j]);
            total = total + d.iter().fold(S::zero(), |a, b| a + *b) / S::count(SLOTS);
            pairs += 1;
        }
    }
    Ok(total / S::count(pairs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotReport {
    pub slot: String,
    pub shared: bool,
    /// Mean pairwise distance on this slot.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub slots: Vec<SlotReport>,
    /// `1 − diversity_score`.
    pub score: f64,
}

impl CoherenceReport {
    pub fn shared(&self) -> usize {
        self.slots.iter().filter(|s| s.shared).count()
    }
}

pub fn coherence_report<S: Scalar>(vectors: &[AttributeVector<S>]) -> Result<CoherenceReport> {
    let diversity = diversity_score(vectors)?;
    let n = vectors.len();
    let mut spread = [S::zero(); SLOTS];
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let d = slot_distances(&vectors[i], &vectors[j]);
            for k in 0..SLOTS {
                spread[k] = spread[k] + d[k];
            }
            pairs += 1;
        }
    }
    let slots = SLOT_NAMES
        .iter()
        .zip(spread)
        .map(|(name, total)| SlotReport {
            slot: (*name).into(),
            shared: total == S::zero(),
            spread: (total / S::count(pairs)).to_f64_lossy(),
        })
        .collect();
    Ok(CoherenceReport {
        slots,
        score: (S::one() - diversity).to_f64_lossy(),
    })
}
