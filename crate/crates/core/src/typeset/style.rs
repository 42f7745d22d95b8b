//! Paragraph styles derived from a design.

use crate::geom::mm_to_pt;
use crate::ingest::Paragraph;
use crate::planner::DesignSettings;
use crate::rules::Alignment;
use crate::typeset::layout::RunStyle;
use crate::typeset::linebreak::{BreakStyle, SetLine};

/// Break style of body paragraphs; `indent_mm` overrides the mark's indent.
pub fn body_break_style(s: &DesignSettings, indent_mm: Option<f64>) -> BreakStyle<f64> {
    BreakStyle {
        alignment: s.body.alignment,
        size: s.body.size,
        word_spacing: s.spacing.word_spacing,
        letter_spacing: s.spacing.letter_spacing,
        hyphenate: s.body.hyphenation,
        indent: mm_to_pt(indent_mm.unwrap_or(s.body.indent)),
        language: s.language.clone(),
    }
}

/// Ragged break style at an arbitrary size (titles, captions, furniture).
pub fn ragged_style(s: &DesignSettings, alignment: Alignment, size: f64) -> BreakStyle<f64> {
    BreakStyle {
        alignment,
        size,
        word_spacing: s.spacing.word_spacing,
        letter_spacing: s.spacing.letter_spacing,
        hyphenate: false,
        indent: 0.0,
        language: s.language.clone(),
    }
}

/// Paragraph runs with the paragraph-mark glyph prefixed when the mark is a glyph.
pub fn body_runs(p: &Paragraph, s: &DesignSettings) -> Vec<(String, RunStyle)> {
    let mut runs = p.styled_runs();
    if let Some(g) = s.body.paragraph_mark.glyph() {
        runs.insert(0, (format!("{g} "), RunStyle::default()));
    }
    runs
}

/// Counts tokens with at least one letter or digit (marks are not words).
pub fn count_words(text: &str) -> usize {
    text.split_whitespace()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .count()
}

/// Median characters per line over non-final lines, spaces included.
pub fn median_chars<I>(lines: I) -> Option<f64>
where
    I: IntoIterator<Item = (usize, bool)>,
{
    let mut counts: Vec<usize> = lines
        .into_iter()
        .filter(|(_, last)| !last)
        .map(|(n, _)| n)
        .collect();
    if counts.is_empty() {
        return None;
    }
    counts.sort_unstable();
    let n = counts.len();
    Some(if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    })
}

pub fn median_of_set<S>(lines: &[SetLine<S>]) -> Option<f64> {
    median_chars(lines.iter().map(|l| (l.char_count(), l.last)))
}

/// A loaded face and the key it is referred to by in layouts.
#[derive(Debug, Clone)]
pub struct Face {
    pub name: String,
    pub metrics: std::sync::Arc<crate::typeset::metrics::FontMetrics>,
}

/// The two faces of a pairing.
#[derive(Debug, Clone)]
pub struct Faces {
    pub title: Face,
    pub body: Face,
}

impl Faces {
    pub fn load(
        lib: &crate::typeset::metrics::FontLibrary,
        rules: &crate::rules::RuleSet,
        pairing: &str,
    ) -> crate::Result<Faces> {
        let p = rules
            .pairing(pairing)
            .ok_or_else(|| crate::Error::constraint("pairing", format!("unknown pairing `{pairing}`")))?;
        Ok(Faces {
            title: Face {
                name: p.title.key(),
                metrics: lib.metrics_for(&p.title)?,
            },
            body: Face {
                name: p.body.key(),
                metrics: lib.metrics_for(&p.body)?,
            },
        })
    }

    /// Both slots set in one face.
    pub fn single(name: &str, metrics: crate::typeset::metrics::FontMetrics) -> Faces {
        let face = Face {
            name: name.into(),
            metrics: std::sync::Arc::new(metrics),
        };
        Faces {
            title: face.clone(),
            body: face,
        }
    }
}

/// Converts breaker output to a layout line; `x` and `baseline` in mm.
pub fn place_line(l: &SetLine<f64>, x: f64, baseline: f64) -> crate::typeset::layout::Line {
    use crate::geom::pt_to_mm;
    crate::typeset::layout::Line {
        x: x + pt_to_mm(l.offset),
        baseline,
        width: pt_to_mm(l.width),
        space: pt_to_mm(l.space),
        runs: l
            .runs
            .iter()
            .map(|(text, style, dx)| crate::typeset::layout::GlyphRun {
                text: text.clone(),
                dx: pt_to_mm(*dx),
                style: *style,
            })
            .collect(),
        word_spacing: l.word_spacing,
        letter_spacing: l.letter_spacing,
        hyphenated: l.hyphenated,
        overflow: l.overflow,
        last: l.last,
    }
}

/// Baseline of line `i` in a frame whose top is `top` (all mm).
pub fn baseline_at(top: f64, leading: f64, i: usize) -> f64 {
    top + leading * i as f64 + leading * 0.8
}
