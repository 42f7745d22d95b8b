//! The closing page describing the design.

use crate::geom::{fmt_num, pt_to_mm, Rect};
use crate::planner::DesignSettings;
use crate::rules::RuleSet;
use crate::typeset::layout::{Frame, FrameKind, Layer, Page, PageKind, RunStyle, TextFrame, TextRole};
use crate::typeset::linebreak::break_paragraph;
use crate::typeset::paginate::blank_page;
use crate::typeset::style::{baseline_at, body_break_style, place_line, Faces};

/// Paragraphs of the colophon.
pub fn colophon_text(s: &DesignSettings, rules: &RuleSet, version: &str) -> Vec<String> {
    let m = &s.margins;
    let grid = match (s.grid.columns, s.grid.gutter) {
        (1, _) | (_, None) => "1 column".to_string(),
        (n, Some(g)) => format!("{n} columns, gutter {} mm", fmt_num(g)),
    };
    let (title, body) = rules
        .pairing(&s.pairing)
        .map(|p| (p.title.key(), p.body.key()))
        .unwrap_or_else(|| (s.pairing.clone(), s.pairing.clone()));
    let hyph = if s.body.hyphenation { ", hyphenated" } else { "" };
    vec![
        format!(
            "This book was designed and typeset by folio {version}, a generative system that composes books from a base of typographic rules and a random seed."
        ),
        format!("Page size {}.", s.page_label()),
        format!(
            "Margins: top {} mm, inside {} mm, bottom {} mm, outside {} mm.",
            fmt_num(m.top),
            fmt_num(m.inside),
            fmt_num(m.bottom),
            fmt_num(m.outside)
        ),
        format!("Grid of {grid}."),
        format!("Titles set in {title}, text in {body}."),
        format!(
            "Body text {} pt on {} pt, {}{hyph}.",
            fmt_num(s.body.size),
            fmt_num(s.body.leading),
            s.body.alignment.as_str()
        ),
        format!("Seed {}.", s.seed),
    ]
}

/// Colophon pages in the body text style, numbered from `number`.
pub fn build_colophon(s: &DesignSettings, rules: &RuleSet, faces: &Faces, version: &str, number: u32) -> Vec<Page> {
    let slot = pt_to_mm(s.body.leading);
    let style = body_break_style(s, Some(0.0));
    let measure = crate::geom::mm_to_pt(s.block_width());
    let mut pages: Vec<Page> = Vec::new();
    let mut y = f64::INFINITY;
    for para in colophon_text(s, rules, version) {
        let lines = break_paragraph(&[(para, RunStyle::default())], &style, measure, &faces.body.metrics);
        let h = slot * lines.len() as f64;
        let fits = pages.last().is_some_and(|p| y + h <= p.block.bottom() + 1e-6);
        if !fits {
            let n = number + pages.len() as u32;
            pages.push(blank_page(s, PageKind::Colophon, Some(n), n % 2 == 1));
            y = pages.last().expect("page").block.y;
        }
        let page = pages.last_mut().expect("page");
        let x = page.block.x;
        page.frames.push(Frame {
            rect: Rect::new(x, y, s.block_width(), h),
            layer: Layer::Content,
            kind: FrameKind::Text(TextFrame {
                role: TextRole::Colophon,
                font: faces.body.name.clone(),
                size: s.body.size,
                leading: s.body.leading,
                alignment: s.body.alignment,
                justified: s.body.alignment == crate::rules::Alignment::Justified,
                lines: lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| place_line(l, x, baseline_at(y, slot, i)))
                    .collect(),
            }),
        });
        y += h + slot;
    }
    pages
}
