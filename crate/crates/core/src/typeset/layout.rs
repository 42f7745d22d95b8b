//! The typeset document: pages of positioned frames in millimetres.

use serde::{Deserialize, Serialize};

use crate::geom::{Cmyk, Rect};
use crate::rules::Alignment;

/// Paint order: background first, furniture last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Layer {
    Background,
    Content,
    Furniture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PageKind {
    Cover,
    BackCover,
    Toc,
    /// Page holding only a level-1 title.
    Title,
    Body,
    Colophon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStyle {
    #[serde(default, skip_serializing_if = "is_false")]
    pub italic: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub bold: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub small_caps: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A styled piece of a line; `dx` is its offset from the line start in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GlyphRun {
    pub text: String,
    pub dx: f64,
    #[serde(flatten)]
    pub style: RunStyle,
}

/// One set line. `x` and `baseline` are page coordinates in mm; `width`
/// is the realized width at the realized spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Line {
    pub x: f64,
    pub baseline: f64,
    pub width: f64,
    /// Natural width of a space in mm; word gaps are `space × word_spacing`.
    pub space: f64,
    pub runs: Vec<GlyphRun>,
    pub word_spacing: f64,
    pub letter_spacing: f64,
    pub hyphenated: bool,
    pub overflow: bool,
    /// Final line of its paragraph.
    pub last: bool,
}

impl Line {
    pub fn text(&self) -> String {
        self.runs.iter().map(|r| r.text.as_str()).collect()
    }

    pub fn char_count(&self) -> usize {
        self.runs.iter().map(|r| r.text.chars().count()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "role")]
pub enum TextRole {
    Body,
    /// A heading set at its level's title style.
    Title { level: u8 },
    TocEntry { level: u8, page: u32 },
    Colophon,
    CoverTitle,
    CoverAuthor,
    Attribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextFrame {
    #[serde(flatten)]
    pub role: TextRole,
    pub font: String,
    pub size: f64,
    pub leading: f64,
    pub alignment: Alignment,
    pub justified: bool,
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageFrame {
    pub name: String,
    pub src: String,
    pub pixel_width: u32,
    pub pixel_height: u32,
    pub columns: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaptionFrame {
    pub font: String,
    pub size: f64,
    pub leading: f64,
    /// Rotated 90° counter-clockwise, reading bottom to top.
    pub rotated: bool,
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GradientSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "paint")]
pub enum Fill {
    Solid { color: Cmyk },
    /// Linear ramp from `color` at the `from` edge to `to` at the opposite edge.
    Gradient { color: Cmyk, to: Cmyk, from: GradientSide },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecorFrame {
    pub name: String,
    #[serde(flatten)]
    pub fill: Fill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HeaderFrame {
    pub text: String,
    pub font: String,
    pub size: f64,
    pub alignment: Alignment,
    pub rotation: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PageNumberFrame {
    pub number: u32,
    pub font: String,
    pub size: f64,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum FrameKind {
    Text(TextFrame),
    Image(ImageFrame),
    Caption(CaptionFrame),
    Decor(DecorFrame),
    Header(HeaderFrame),
    PageNumber(PageNumberFrame),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub rect: Rect<f64>,
    pub layer: Layer,
    #[serde(flatten)]
    pub kind: FrameKind,
}

impl Frame {
    pub fn text(&self) -> Option<&TextFrame> {
        match &self.kind {
            FrameKind::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn lines(&self) -> &[Line] {
        match &self.kind {
            FrameKind::Text(t) => &t.lines,
            FrameKind::Caption(c) => &c.lines,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Page {
    pub kind: PageKind,
    /// Printed page number; covers and contents pages are unnumbered.
    pub number: Option<u32>,
    pub recto: bool,
    pub width: f64,
    pub height: f64,
    /// Text block (area inside the margins).
    pub block: Rect<f64>,
    pub frames: Vec<Frame>,
}

impl Page {
    pub fn frames_on(&self, layer: Layer) -> impl Iterator<Item = &Frame> {
        self.frames.iter().filter(move |f| f.layer == layer)
    }

    /// Words set in body text frames on this page.
    pub fn body_words(&self) -> usize {
        self.frames
            .iter()
            .filter_map(Frame::text)
            .filter(|t| t.role == TextRole::Body)
            .flat_map(|t| t.lines.iter())
            .map(|l| crate::typeset::style::count_words(&l.text()))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutDocument {
    pub width: f64,
    pub height: f64,
    /// Front cover, contents, body, colophon, in reading order.
    pub pages: Vec<Page>,
    pub back_cover: Option<Page>,
}

impl LayoutDocument {
    pub fn body_pages(&self) -> impl Iterator<Item = &Page> {
        self.pages
            .iter()
            .filter(|p| matches!(p.kind, PageKind::Body | PageKind::Title))
    }

    /// Every page including the back cover.
    pub fn all_pages(&self) -> impl Iterator<Item = &Page> {
        self.pages.iter().chain(self.back_cover.iter())
    }

    /// Lines that break inside a word at a glyph boundary.
    pub fn overflow_lines(&self) -> usize {
        self.all_pages()
            .flat_map(|p| p.frames.iter())
            .flat_map(|f| f.lines().iter())
            .filter(|l| l.overflow)
            .count()
    }
}
