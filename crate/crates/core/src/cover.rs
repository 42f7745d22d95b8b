//! Front and back covers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{mm_to_pt, pt_to_mm, Rect, Span};
use crate::ingest::{Block, Manuscript};
use crate::planner::DesignSettings;
use crate::rng::SeededStream;
use crate::rules::{Alignment, RuleSet};
use crate::typeset::layout::{
    DecorFrame, Fill, Frame, FrameKind, Layer, Page, PageKind, RunStyle, TextFrame, TextRole,
};
use crate::typeset::linebreak::break_paragraph;
use crate::typeset::metrics::{measure_run, FontMetrics};
use crate::typeset::paginate::blank_page;
use crate::typeset::style::{baseline_at, place_line, ragged_style, Faces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TitleSource {
    FrontMatter,
    Extracted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleInfo {
    pub title: String,
    pub author: Option<String>,
    pub source: TitleSource,
}

/// Text up to and including the first `.`, `!` or `?`.
pub fn first_sentence(text: &str) -> &str {
    match text.find(['.', '!', '?']) {
        Some(i) => text[..=i].trim(),
        None => text.trim(),
    }
}

/// Title and author from the front matter, or else the first sentence of
/// the most prominent heading (or of the first paragraph).
pub fn extract_title(ms: &Manuscript) -> Result<TitleInfo> {
    let author = ms.author.clone().filter(|a| !a.trim().is_empty());
    if let Some(t) = ms.title.as_ref().filter(|t| !t.trim().is_empty()) {
        return Ok(TitleInfo {
            title: t.trim().to_string(),
            author,
            source: TitleSource::FrontMatter,
        });
    }
    let top = ms
        .headings()
        .filter(|h| !h.text.trim().is_empty())
        .fold(None, |best: Option<&crate::ingest::Heading>, h| match best {
            Some(b) if b.prominence >= h.prominence => Some(b),
            _ => Some(h),
        })
        .map(|h| h.text.clone());
    let text = top.or_else(|| {
        ms.blocks.iter().find_map(|b| match b {
            Block::Paragraph(p) if !p.text().trim().is_empty() => Some(p.text()),
            _ => None,
        })
    });
    match text {
        Some(t) => Ok(TitleInfo {
            title: first_sentence(&t).to_string(),
            author,
            source: TitleSource::Extracted,
        }),
        None => Err(Error::NoTitleSource),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TitleFit {
    pub size: f64,
    /// Set when even the lower bound is too wide.
    pub overflow: bool,
}

/// Largest size on a 0.1 pt lattice from `bounds.min` at which the widest
/// word of `title` fits in `target` pt.
pub fn maximize_title_size(title: &str, metrics: &FontMetrics, target: f64, bounds: Span<f64>) -> TitleFit {
    let width = |size: f64| {
        title
            .split_whitespace()
            .map(|w| measure_run(w, metrics, size, 0.0, 1.0))
            .fold(0.0, f64::max)
    };
    let fits = |size: f64| width(size) <= target + crate::num::width_epsilon::<f64>();
    let at = |k: u64| bounds.min + k as f64 * 0.1;
    if !fits(bounds.min) {
        return TitleFit {
            size: bounds.min,
            overflow: true,
        };
    }
    let top = ((bounds.max - bounds.min) / 0.1 + 1e-9).floor() as u64;
    if fits(at(top)) {
        return TitleFit {
            size: round_tenth(at(top)),
            overflow: false,
        };
    }
    let (mut lo, mut hi) = (0u64, top);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if fits(at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    TitleFit {
        size: round_tenth(at(lo)),
        overflow: false,
    }
}

fn round_tenth(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn text_frame(
    role: TextRole,
    text: &str,
    faces: &Faces,
    s: &DesignSettings,
    size: f64,
    leading: f64,
    alignment: Alignment,
    block: Rect<f64>,
    anchor_bottom: bool,
) -> Frame {
    let lines = break_paragraph(
        &[(text.to_string(), RunStyle::default())],
        &ragged_style(s, alignment, size),
        mm_to_pt(block.w),
        &faces.body.metrics,
    );
    let lead = pt_to_mm(leading);
    let h = lead * lines.len() as f64;
    let y = if anchor_bottom { block.bottom() - h } else { block.y };
    Frame {
        rect: Rect::new(block.x, y, block.w, h),
        layer: Layer::Content,
        kind: FrameKind::Text(TextFrame {
            role,
            font: faces.body.name.clone(),
            size,
            leading,
            alignment,
            justified: false,
            lines: lines
                .iter()
                .enumerate()
                .map(|(i, l)| place_line(l, block.x, baseline_at(y, lead, i)))
                .collect(),
        }),
    }
}

fn background(page: &Page, s: &DesignSettings) -> Frame {
    Frame {
        rect: Rect::new(0.0, 0.0, page.width, page.height),
        layer: Layer::Background,
        kind: FrameKind::Decor(DecorFrame {
            name: "coverBackground".into(),
            fill: Fill::Solid { color: s.cover_color },
        }),
    }
}

/// Front and back cover. The title and author are set uppercase in the
/// body face, the title against the top margin and the author against the
/// bottom one.
pub fn design_cover(
    info: &TitleInfo,
    s: &DesignSettings,
    faces: &Faces,
    _stream: &mut SeededStream,
    rules: &RuleSet,
    version: &str,
) -> (Page, Page) {
    let mut front = blank_page(s, PageKind::Cover, None, true);
    front.frames.push(background(&front, s));
    let block = front.block;
    let title = info.title.to_uppercase();
    let base = s.title(1).size;
    let size = if s.features.max_cover_title {
        let words = title.split_whitespace().count().max(1) as f64;
        let upper = (mm_to_pt(block.h) / 2.0 / (words * rules.font_size.title_leading)).max(base);
        maximize_title_size(&title, &faces.body.metrics, mm_to_pt(block.w), Span::new(base, upper)).size
    } else {
        base
    };
    let leading = size * rules.font_size.title_leading;
    let align = s.title(1).alignment;
    front.frames.push(text_frame(TextRole::CoverTitle, &title, faces, s, size, leading, align, block, false));
    if let Some(author) = &info.author {
        let t = s.title(2);
        front.frames.push(text_frame(
            TextRole::CoverAuthor,
            &author.to_uppercase(),
            faces,
            s,
            t.size,
            t.leading,
            align,
            block,
            true,
        ));
    }

    let mut back = blank_page(s, PageKind::BackCover, None, false);
    back.frames.push(background(&back, s));
    let text = format!("Designed and typeset by folio {version}, seed {}.", s.seed);
    let block = back.block;
    back.frames.push(text_frame(
        TextRole::Attribution,
        &text,
        faces,
        s,
        s.body.size,
        s.body.leading,
        Alignment::Left,
        block,
        true,
    ));
    (front, back)
}
