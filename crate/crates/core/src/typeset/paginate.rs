//! Flows a manuscript through columns and pages.

use crate::error::{Error, Result};
use crate::geom::{fmt_num, mm_to_pt, pt_to_mm, Rect};
use crate::ingest::{Block, Heading, ImageRef, Manuscript, Paragraph};
use crate::planner::{CaptionPlacement, DesignSettings};
use crate::rng::SeededStream;
use crate::rules::{Alignment, FolioAlign, FolioEdge, HeaderAlign, HeaderEdge, HeaderLayout, RuleSet};
use crate::typeset::layout::{
    CaptionFrame, Frame, FrameKind, HeaderFrame, ImageFrame, Layer, LayoutDocument, Page,
    PageKind, PageNumberFrame, RunStyle, TextFrame, TextRole,
};
use crate::typeset::linebreak::{break_paragraph, SetLine};
use crate::typeset::metrics::measure_run;
use crate::typeset::style::{
    baseline_at, body_break_style, body_runs, median_chars, place_line, ragged_style,
    Faces,
};

/// Lines kept together on each side of a column break.
pub const MIN_LINES: usize = 2;
/// Image resolution assumed when sizing from pixels.
pub const IMAGE_DPI: f64 = 300.0;
const GAP: f64 = 2.0;
const FOLIO_WIDTH: f64 = 12.0;
const HEADER_INDENT: f64 = 5.0;

struct Column {
    x: f64,
    free: Vec<bool>,
    cursor: usize,
}

impl Column {
    /// Free slots from the cursor up to the next blocked slot.
    fn run(&mut self) -> usize {
        while self.cursor < self.free.len() && !self.free[self.cursor] {
            self.cursor += 1;
        }
        self.free[self.cursor..].iter().take_while(|f| **f).count()
    }

    fn fresh(&self) -> bool {
        self.free.iter().all(|f| *f)
    }
}

struct Sheet {
    page: Page,
    cols: Vec<Column>,
    content: bool,
}

struct Flow<'a> {
    s: &'a DesignSettings,
    faces: &'a Faces,
    layout: &'a HeaderLayout,
    stream: &'a mut SeededStream,
    indents: SeededStream,
    slot: f64,
    slots: usize,
    pages: Vec<Page>,
    sheet: Option<Sheet>,
    col: usize,
    number: u32,
    running: String,
}

/// Sets the body of a book: title pages and body pages, numbered from 1. Covers, contents and colophon are added by the caller.
pub fn paginate(
    ms: &Manuscript,
    s: &DesignSettings,
    rules: &RuleSet,
    faces: &Faces,
    stream: &mut SeededStream,
) -> Result<LayoutDocument> {
    let layout = rules
        .header_layout(&s.header_layout)
        .ok_or_else(|| Error::constraint("headerLayout", format!("unknown header layout `{}`", s.header_layout)))?;
    let slot = pt_to_mm(s.body.leading);
    let slots = (s.block_height() / slot + 1e-9).floor() as usize;
    if slots < MIN_LINES * 2 {
        return Err(Error::Infeasible(format!(
            "text block holds only {slots} lines at {} pt leading",
            fmt_num(s.body.leading)
        )));
    }
    let mut flow = Flow {
        s,
        faces,
        layout,
        indents: stream.fork("indent"),
        stream,
        slot,
        slots,
        pages: Vec::new(),
        sheet: None,
        col: 0,
        number: 1,
        running: ms.title.clone().unwrap_or_default(),
    };
    for block in &ms.blocks {
        match block {
            Block::Heading(h) => flow.heading(h),
            Block::Paragraph(p) => flow.paragraph(p),
            Block::Image(img) => flow.image(img),
        }
    }
    flow.finish_sheet();
    let doc = LayoutDocument {
        width: s.page.w,
        height: s.page.h,
        pages: flow.pages,
        back_cover: None,
    };
    check_body(&doc, s, rules)?;
    Ok(doc)
}

/// Post-pagination checks: realized median line length and words per page.
pub fn check_body(doc: &LayoutDocument, s: &DesignSettings, rules: &RuleSet) -> Result<()> {
    let justified = s.body.alignment == Alignment::Justified;
    let bounds = rules.line_length.bounds(justified);
    let lines = doc
        .pages
        .iter()
        .flat_map(|p| p.frames.iter())
        .filter_map(Frame::text)
        .filter(|t| t.role == TextRole::Body)
        .flat_map(|t| t.lines.iter());
    if let Some(median) = median_chars(lines.map(|l| (l.char_count(), l.last))) {
        if !bounds.contains_approx(median) {
            return Err(Error::Infeasible(format!(
                "realized median of {} characters per line is outside {}–{}",
                fmt_num(median),
                fmt_num(bounds.min),
                fmt_num(bounds.max)
            )));
        }
    }
    let cap = rules.page_capacity.for_columns(s.grid.columns) as usize;
    for p in &doc.pages {
        let words = p.body_words();
        if words > cap {
            return Err(Error::Infeasible(format!(
                "page {} holds {words} words, more than {cap}",
                p.number.map(|n| n.to_string()).unwrap_or_default()
            )));
        }
    }
    Ok(())
}

/// Text block of a page; the inner margin is on the left of a recto page.
pub fn text_block(s: &DesignSettings, recto: bool) -> Rect<f64> {
    let x = if recto { s.margins.inside } else { s.margins.outside };
    Rect::new(x, s.margins.top, s.block_width(), s.block_height())
}

/// An empty page with its text block.
pub fn blank_page(s: &DesignSettings, kind: PageKind, number: Option<u32>, recto: bool) -> Page {
    Page {
        kind,
        number,
        recto,
        width: s.page.w,
        height: s.page.h,
        block: text_block(s, recto),
        frames: Vec::new(),
    }
}

impl Flow<'_> {
    fn colw_pt(&self) -> f64 {
        self.s.column_width_pt()
    }

    fn new_sheet(&mut self, kind: PageKind) {
        self.finish_sheet();
        let number = self.number;
        self.number += 1;
        let page = blank_page(self.s, kind, Some(number), number % 2 == 1);
        let g = self.s.grid.gutter.unwrap_or(0.0);
        let cols = (0..self.s.grid.columns as usize)
            .map(|i| Column {
                x: page.block.x + i as f64 * (self.s.grid.column_width + g),
                free: vec![true; self.slots],
                cursor: 0,
            })
            .collect();
        self.sheet = Some(Sheet {
            page,
            cols,
            content: false,
        });
        self.col = 0;
    }

    fn finish_sheet(&mut self) {
        let Some(mut sheet) = self.sheet.take() else {
            return;
        };
        if sheet.page.kind == PageKind::Body {
            furniture(&mut sheet.page, self.s, self.faces, self.layout, &self.running);
        }
        self.pages.push(sheet.page);
    }

    fn sheet(&mut self) -> &mut Sheet {
        if self.sheet.is_none() {
            self.new_sheet(PageKind::Body);
        }
        self.sheet.as_mut().expect("sheet present")
    }

    fn column(&mut self) -> &mut Column {
        let c = self.col;
        &mut self.sheet().cols[c]
    }

    fn next_column(&mut self) {
        if self.col + 1 < self.s.grid.columns as usize && self.sheet.is_some() {
            self.col += 1;
        } else {
            self.new_sheet(PageKind::Body);
        }
    }

    fn push_frame(&mut self, frame: Frame) {
        let sheet = self.sheet();
        sheet.content = true;
        sheet.page.frames.push(frame);
    }

    /// Occupies `n` slots at the cursor of the current column; returns the
    /// top of the occupied range in mm.
    fn take(&mut self, n: usize) -> f64 {
        let slot = self.slot;
        let top = self.sheet().page.block.y;
        let col = self.column();
        let start = col.cursor;
        for f in &mut col.free[start..start + n] {
            *f = false;
        }
        col.cursor = start + n;
        top + start as f64 * slot
    }

    fn skip_slot(&mut self) {
        let col = self.column();
        if col.cursor > 0 && col.run() > 0 {
            col.cursor += 1;
        }
    }

    fn heading(&mut self, h: &Heading) {
        match h.level {
            1 => self.chapter_title(h),
            2 => self.section_title(h),
            _ => self.inline_title(h),
        }
    }

    fn title_lines(&self, h: &Heading, measure_pt: f64) -> (Vec<SetLine<f64>>, f64) {
        let t = self.s.title(h.level);
        let style = ragged_style(self.s, t.alignment, t.size);
        let lines = break_paragraph(
            &[(h.text.clone(), RunStyle::default())],
            &style,
            measure_pt,
            &self.faces.title.metrics,
        );
        (lines, t.leading)
    }

    fn title_frame(&self, h: &Heading, lines: &[SetLine<f64>], x: f64, top: f64, w: f64, leading: f64) -> Frame {
        let t = self.s.title(h.level);
        let lead = pt_to_mm(leading);
        Frame {
            rect: Rect::new(x, top, w, lead * lines.len() as f64),
            layer: Layer::Content,
            kind: FrameKind::Text(TextFrame {
                role: TextRole::Title { level: h.level },
                font: self.faces.title.name.clone(),
                size: t.size,
                leading,
                alignment: t.alignment,
                justified: false,
                lines: lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| place_line(l, x, baseline_at(top, lead, i)))
                    .collect(),
            }),
        }
    }

    fn chapter_title(&mut self, h: &Heading) {
        self.finish_sheet();
        self.running = h.text.clone();
        self.new_sheet(PageKind::Title);
        let block = self.sheet().page.block;
        let (lines, leading) = self.title_lines(h, mm_to_pt(block.w));
        let frame = self.title_frame(h, &lines, block.x, block.y, block.w, leading);
        self.push_frame(frame);
        self.finish_sheet();
    }

    fn section_title(&mut self, h: &Heading) {
        if self.sheet.as_ref().is_some_and(|s| s.content) {
            self.new_sheet(PageKind::Body);
        }
        self.running = h.text.clone();
        self.sheet();
        self.col = 0;
        let (lines, leading) = self.title_lines(h, self.colw_pt());
        let n = slots_for(pt_to_mm(leading) * lines.len() as f64, self.slot).min(self.slots);
        let x = self.column().x;
        let top = self.take(n);
        let frame = self.title_frame(h, &lines, x, top, self.s.grid.column_width, leading);
        self.push_frame(frame);
        if self.s.grid.columns > 1 {
            let col = self.column();
            col.cursor = col.free.len();
            self.next_column();
        } else {
            self.skip_slot();
        }
    }

    fn inline_title(&mut self, h: &Heading) {
        let t = *self.s.title(h.level);
        let style = ragged_style(self.s, t.alignment, self.s.body.size);
        let bold = RunStyle {
            bold: true,
            ..RunStyle::default()
        };
        let lines = break_paragraph(&[(h.text.clone(), bold)], &style, self.colw_pt(), &self.faces.body.metrics);
        let n = lines.len();
        self.running = h.text.clone();
        self.sheet();
        if !self.column().fresh() && self.column().cursor > 0 {
            self.skip_slot();
        }
        loop {
            let fresh = self.column().fresh();
            let run = self.column().run();
            if run >= n + MIN_LINES || (fresh && run >= n) {
                break;
            }
            self.next_column();
        }
        let x = self.column().x;
        let top = self.take(n);
        let lead = self.slot;
        self.push_frame(Frame {
            rect: Rect::new(x, top, self.s.grid.column_width, lead * n as f64),
            layer: Layer::Content,
            kind: FrameKind::Text(TextFrame {
                role: TextRole::Title { level: h.level },
                font: self.faces.body.name.clone(),
                size: self.s.body.size,
                leading: self.s.body.leading,
                alignment: t.alignment,
                justified: false,
                lines: lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| place_line(l, x, baseline_at(top, lead, i)))
                    .collect(),
            }),
        });
    }

    fn paragraph(&mut self, p: &Paragraph) {
        if p.text().trim().is_empty() {
            return;
        }
        let indent = if self.s.features.random_indent {
            Some(pt_to_mm(self.indents.uniform(0.0, 3.0 * self.s.body.size)))
        } else {
            None
        };
        let style = body_break_style(self.s, indent);
        let lines = break_paragraph(&body_runs(p, self.s), &style, self.colw_pt(), &self.faces.body.metrics);
        let space_before = self.s.body.space_before > 0.0;
        self.sheet();
        if space_before && self.column().cursor > 0 {
            self.skip_slot();
        }
        let mut rest = &lines[..];
        while !rest.is_empty() {
            let n = rest.len();
            let fresh = self.column().fresh();
            let run = self.column().run();
            let take = if n <= run {
                n
            } else {
                let mut t = run;
                if n - t < MIN_LINES {
                    t = n.saturating_sub(MIN_LINES);
                }
                if t >= MIN_LINES {
                    t
                } else if fresh {
                    run.min(n)
                } else {
                    0
                }
            };
            if take == 0 {
                self.next_column();
                continue;
            }
            self.body_frame(&rest[..take]);
            rest = &rest[take..];
            if !rest.is_empty() {
                self.next_column();
            }
        }
    }

    fn body_frame(&mut self, lines: &[SetLine<f64>]) {
        let x = self.column().x;
        let top = self.take(lines.len());
        let lead = self.slot;
        self.push_frame(Frame {
            rect: Rect::new(x, top, self.s.grid.column_width, lead * lines.len() as f64),
            layer: Layer::Content,
            kind: FrameKind::Text(TextFrame {
                role: TextRole::Body,
                font: self.faces.body.name.clone(),
                size: self.s.body.size,
                leading: self.s.body.leading,
                alignment: self.s.body.alignment,
                justified: self.s.body.alignment == Alignment::Justified,
                lines: lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| place_line(l, x, baseline_at(top, lead, i)))
                    .collect(),
            }),
        });
    }

    fn image(&mut self, img: &ImageRef) {
        let s = self.s;
        self.sheet();
        let columns = s.grid.columns as usize;
        if self.col == 0 && self.column().cursor > 0 {
            self.skip_slot();
        }
        let mut span = 1;
        if columns > 1 && self.col == 0 {
            span = 1 + self.stream.below(columns);
        }
        let g = s.grid.gutter.unwrap_or(0.0);
        let span_w = span as f64 * s.grid.column_width + (span - 1) as f64 * g;
        let natural = pt_to_mm(f64::from(img.width) / IMAGE_DPI * 72.0);
        let aspect = f64::from(img.height.max(1)) / f64::from(img.width.max(1));
        let mut w = span_w.min(natural);
        let mut h = w * aspect;

        let aside = s.caption.placement == CaptionPlacement::AsideRotated;
        let cap_style = ragged_style(s, Alignment::Left, s.caption.size);
        let cap_leading = s.caption.size * s.leading_ratio();
        let cap_lines = |measure_mm: f64| -> Vec<SetLine<f64>> {
            if img.caption.trim().is_empty() {
                return Vec::new();
            }
            break_paragraph(
                &[(img.caption.clone(), RunStyle { italic: true, ..RunStyle::default() })],
                &cap_style,
                mm_to_pt(measure_mm).max(1.0),
                &self.faces.body.metrics,
            )
        };
        let below = if aside { Vec::new() } else { cap_lines(w) };
        let cap_h = if below.is_empty() {
            0.0
        } else {
            GAP + pt_to_mm(cap_leading) * below.len() as f64
        };
        let max_h = self.slots as f64 * self.slot - cap_h;
        if h > max_h {
            h = max_h.max(self.slot);
            w = h / aspect;
        }
        let n = slots_for(h + cap_h, self.slot).min(self.slots);

        loop {
            let fresh = self.column().fresh();
            let run = self.column().run();
            if run >= n || (fresh && run > 0 && n > run) {
                break;
            }
            self.next_column();
            if self.col != 0 {
                span = 1;
            }
        }
        let run = self.column().run();
        let n = n.min(run);
        let x = self.column().x;
        let start = self.column().cursor;
        let top = self.take(n);
        let first = self.col;
        for c in 1..span {
            if let Some(col) = self.sheet().cols.get_mut(first + c) {
                for f in &mut col.free[start..start + n] {
                    *f = false;
                }
            }
        }
        self.push_frame(Frame {
            rect: Rect::new(x, top, w, h),
            layer: Layer::Content,
            kind: FrameKind::Image(ImageFrame {
                name: img.name.clone(),
                src: image_src(img),
                pixel_width: img.width,
                pixel_height: img.height,
                columns: span as u32,
            }),
        });
        let lead = pt_to_mm(cap_leading);
        if !below.is_empty() {
            let ctop = top + h + GAP;
            self.push_frame(Frame {
                rect: Rect::new(x, ctop, w, lead * below.len() as f64),
                layer: Layer::Content,
                kind: FrameKind::Caption(CaptionFrame {
                    font: self.faces.body.name.clone(),
                    size: s.caption.size,
                    leading: cap_leading,
                    rotated: false,
                    lines: below
                        .iter()
                        .enumerate()
                        .map(|(i, l)| place_line(l, x, baseline_at(ctop, lead, i)))
                        .collect(),
                }),
            });
        } else if aside {
            let block = self.sheet().page.block;
            let recto = self.sheet().page.recto;
            let margin = if recto { s.page.w - block.right() } else { block.x };
            let room = margin - 2.0 * GAP;
            let mut lines = cap_lines(h);
            let max_lines = ((room / lead).floor() as usize).max(1);
            lines.truncate(max_lines);
            if !lines.is_empty() {
                let cw = lead * lines.len() as f64;
                let cx = if recto { block.right() + GAP } else { block.x - GAP - cw };
                let font = self.faces.body.name.clone();
                // lines are in frame-local coordinates, before the rotation
                self.sheet().page.frames.push(Frame {
                    rect: Rect::new(cx, top, cw, h),
                    layer: Layer::Furniture,
                    kind: FrameKind::Caption(CaptionFrame {
                        font,
                        size: s.caption.size,
                        leading: cap_leading,
                        rotated: true,
                        lines: lines
                            .iter()
                            .enumerate()
                            .map(|(i, l)| place_line(l, 0.0, baseline_at(0.0, lead, i)))
                            .collect(),
                    }),
                });
            }
        }
    }
}

/// Path of an image relative to the output directory.
pub fn image_src(img: &ImageRef) -> String {
    let file = img
        .path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| img.name.clone());
    format!("images/{file}")
}

fn slots_for(h: f64, slot: f64) -> usize {
    ((h / slot) - 1e-6).ceil().max(1.0) as usize
}

/// Cuts `text` with an ellipsis until it is at most `width` pt wide.
pub fn truncate_to(text: &str, width: f64, metrics: &crate::typeset::metrics::FontMetrics, size: f64) -> String {
    if measure_run(text, metrics, size, 0.0, 1.0) <= width {
        return text.to_string();
    }
    let chars: Vec<char> = text.chars().collect();
    for n in (0..chars.len()).rev() {
        let cut: String = chars[..n].iter().collect::<String>().trim_end().to_string() + "…";
        if measure_run(&cut, metrics, size, 0.0, 1.0) <= width {
            return cut;
        }
    }
    String::new()
}

/// Adds the running header and page number to a body page.
pub fn furniture(page: &mut Page, s: &DesignSettings, faces: &Faces, layout: &HeaderLayout, text: &str) {
    let size = s.caption.size;
    let band = pt_to_mm(size * 1.2);
    let block = page.block;
    let (inner_x, inner_w, outer_x, outer_w) = if page.recto {
        (0.0, block.x, block.right(), s.page.w - block.right())
    } else {
        (block.right(), s.page.w - block.right(), 0.0, block.x)
    };
    let edge_y = |bottom: bool| {
        if bottom {
            block.bottom() + (s.page.h - block.bottom() - band) / 2.0
        } else {
            (block.y - band) / 2.0
        }
    };
    let metrics = &faces.body.metrics;

    if let Some(number) = page.number {
        let f = &layout.page_number;
        let y = edge_y(f.edge == FolioEdge::Bottom);
        let (x, w, alignment) = match f.align {
            FolioAlign::Right => (block.right() - FOLIO_WIDTH, FOLIO_WIDTH, Alignment::Right),
            FolioAlign::Outer if page.recto => (block.right() - FOLIO_WIDTH, FOLIO_WIDTH, Alignment::Right),
            FolioAlign::Outer => (block.x, FOLIO_WIDTH, Alignment::Left),
            FolioAlign::Centre => (block.x + (block.w - FOLIO_WIDTH) / 2.0, FOLIO_WIDTH, Alignment::Centre),
            FolioAlign::InnerCorner => (inner_x, inner_w, Alignment::Centre),
            FolioAlign::OuterCorner => (outer_x, outer_w, Alignment::Centre),
        };
        page.frames.push(Frame {
            rect: Rect::new(x, y, w, band),
            layer: Layer::Furniture,
            kind: FrameKind::PageNumber(PageNumberFrame {
                number,
                font: faces.body.name.clone(),
                size,
                alignment,
            }),
        });
    }

    let h = &layout.header;
    let folio_here = |edge: FolioEdge| {
        layout.page_number.edge == edge
            && matches!(layout.page_number.align, FolioAlign::Right | FolioAlign::Outer | FolioAlign::Centre)
    };
    let (rect, alignment) = match h.edge {
        HeaderEdge::OuterMargin => {
            let x = outer_x + (outer_w - band) / 2.0;
            (Rect::new(x, block.y, band, block.h), Alignment::Left)
        }
        edge => {
            let bottom = edge == HeaderEdge::Bottom;
            let fe = if bottom { FolioEdge::Bottom } else { FolioEdge::Top };
            let reserve = if folio_here(fe) { FOLIO_WIDTH + GAP } else { 0.0 };
            let y = edge_y(bottom);
            match h.align {
                HeaderAlign::Indented => {
                    let x = block.x + HEADER_INDENT;
                    let w = block.w - HEADER_INDENT - reserve;
                    (Rect::new(x, y, w, band), Alignment::Left)
                }
                HeaderAlign::Centre => {
                    let w = block.w - 2.0 * reserve;
                    (Rect::new(block.x + reserve, y, w, band), Alignment::Centre)
                }
            }
        }
    };
    let avail = if h.rotation == 90 { rect.h } else { rect.w };
    let text = truncate_to(text.trim(), mm_to_pt(avail.max(0.0)), metrics, size);
    if !text.is_empty() {
        page.frames.push(Frame {
            rect,
            layer: Layer::Furniture,
            kind: FrameKind::Header(HeaderFrame {
                text,
                font: faces.body.name.clone(),
                size,
                alignment,
                rotation: h.rotation,
            }),
        });
    }
}
