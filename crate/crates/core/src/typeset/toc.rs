//! Table of contents.

use crate::geom::{mm_to_pt, pt_to_mm, Rect};
use crate::ingest::Manuscript;
use crate::planner::DesignSettings;
use crate::rules::Alignment;
use crate::typeset::layout::{Frame, FrameKind, GlyphRun, Layer, Page, PageKind, RunStyle, TextFrame, TextRole};
use crate::typeset::linebreak::break_paragraph;
use crate::typeset::metrics::measure_run;
use crate::typeset::paginate::blank_page;
use crate::typeset::style::{baseline_at, place_line, ragged_style, Face, Faces};

const LEVEL2_INDENT: f64 = 5.0;
const NUMBER_GAP: f64 = 3.0;

/// Level-1 and level-2 headings with the page each was set on, in order.
pub fn heading_pages(body: &[Page]) -> Vec<(u8, String, u32)> {
    let mut out = Vec::new();
    for p in body {
        for f in &p.frames {
            if let FrameKind::Text(t) = &f.kind {
                if let TextRole::Title { level } = t.role {
                    if level <= 2 {
                        let text = t.lines.iter().map(|l| l.text()).collect::<Vec<_>>().join(" ");
                        out.push((level, text, p.number.unwrap_or(0)));
                    }
                }
            }
        }
    }
    out
}

/// Contents pages listing every level-1 and level-2 heading. Level-1
/// entries take the level-2 title style, level-2 entries the level-3 one.
/// `first_index` is the position of the first contents page in the book.
pub fn build_toc(ms: &Manuscript, s: &DesignSettings, faces: &Faces, body: &[Page], first_index: usize) -> Vec<Page> {
    let found = heading_pages(body);
    let wanted: Vec<_> = ms.headings().filter(|h| h.level <= 2).collect();
    if wanted.is_empty() {
        log::warn!("no headings: contents skipped");
        return Vec::new();
    }
    let slot = pt_to_mm(s.body.leading);
    let mut pages: Vec<Page> = Vec::new();
    let mut y = f64::INFINITY;
    for (i, h) in wanted.iter().enumerate() {
        let page_no = found.get(i).map(|f| f.2).unwrap_or(0);
        let (face, size, leading, style, indent): (&Face, f64, f64, RunStyle, f64) = if h.level == 1 {
            let t = s.title(2);
            (&faces.title, t.size, t.leading, RunStyle::default(), 0.0)
        } else {
            let t = s.title(3);
            let bold = RunStyle { bold: true, ..RunStyle::default() };
            (&faces.body, s.body.size, t.leading, bold, LEVEL2_INDENT)
        };
        let number = page_no.to_string();
        let num_w = pt_to_mm(measure_run(&number, &face.metrics, size, 0.0, 1.0));
        let block_w = s.block_width();
        let measure = mm_to_pt(block_w - indent - num_w - NUMBER_GAP).max(1.0);
        let lines = break_paragraph(
            &[(h.text.clone(), style)],
            &ragged_style(s, Alignment::Left, size),
            measure,
            &face.metrics,
        );
        let lead = pt_to_mm(leading);
        let height = lead * lines.len() as f64;
        let snapped = (height / slot - 1e-6).ceil().max(1.0) * slot;
        let need_page = match pages.last() {
            None => true,
            Some(p) => y + snapped > p.block.bottom() + 1e-6,
        };
        if need_page {
            let index = first_index + pages.len();
            pages.push(blank_page(s, PageKind::Toc, None, index % 2 == 0));
            y = pages.last().expect("page").block.y;
        }
        let page = pages.last_mut().expect("page");
        let x = page.block.x + indent;
        let n = lines.len();
        let mut placed: Vec<_> = lines
            .iter()
            .enumerate()
            .map(|(j, l)| place_line(l, x, baseline_at(y, lead, j)))
            .collect();
        if let Some(last) = placed.last_mut() {
            let dx = block_w - indent - num_w - (last.x - x);
            last.runs.push(GlyphRun { text: number, dx, style });
            last.width = dx + num_w;
        }
        page.frames.push(Frame {
            rect: Rect::new(x, y, block_w - indent, lead * n as f64),
            layer: Layer::Content,
            kind: FrameKind::Text(TextFrame {
                role: TextRole::TocEntry { level: h.level, page: page_no },
                font: face.name.clone(),
                size,
                leading,
                alignment: Alignment::Left,
                justified: false,
                lines: placed,
            }),
        });
        y += snapped;
    }
    pages
}
