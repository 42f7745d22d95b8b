//! Manuscript parsing, image resolution, classification and heading levels.
//!
//! The manuscript format is plain UTF-8 text:
//!
//! ```text
//! title: Moby Dick
//! author: Herman Melville
//! language: en
//!
//! # Part
//!
//! ## Chapter
//!
//! A paragraph with *italic*, **bold** and ^^small caps^^ text.
//!
//! @figure-one@
//! ```
//!
//! Blank lines separate blocks. `\` escapes `*`, `^`, `@`, `#` and itself.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{BookType, RuleSet};
use crate::typeset::layout::RunStyle;

/// Word count at which a book counts as long reading.
pub const LONG_READING_WORDS: usize = 50_000;
/// Below this many words per image a book counts as only images.
pub const ONLY_IMAGES_RATIO: f64 = 50.0;

const FRONT_MATTER_KEYS: [&str; 3] = ["title", "author", "language"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub text: String,
    #[serde(flatten)]
    pub style: RunStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paragraph {
    pub runs: Vec<Run>,
    pub style: String,
}

impl Paragraph {
    pub fn text(&self) -> String {
        self.runs.iter().map(|r| r.text.as_str()).collect()
    }

    pub fn styled_runs(&self) -> Vec<(String, RunStyle)> {
        self.runs.iter().map(|r| (r.text.clone(), r.style)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heading {
    pub text: String,
    /// Larger is more prominent.
    pub prominence: u8,
    /// 1..=3 once assigned; 0 before.
    pub level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRef {
    pub name: String,
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Block {
    Paragraph(Paragraph),
    Heading(Heading),
    Image(ImageRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manuscript {
    pub blocks: Vec<Block>,
    pub title: Option<String>,
    pub author: Option<String>,
    pub language: String,
}

impl Manuscript {
    pub fn headings(&self) -> impl Iterator<Item = &Heading> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Heading(h) => Some(h),
            _ => None,
        })
    }

    pub fn images(&self) -> impl Iterator<Item = &ImageRef> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Image(i) => Some(i),
            _ => None,
        })
    }

    /// Whitespace-delimited tokens across paragraphs and headings.
    pub fn word_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Paragraph(p) => p.text().split_whitespace().count(),
                Block::Heading(h) => h.text.split_whitespace().count(),
                Block::Image(_) => 0,
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentStats {
    pub words: usize,
    pub images: usize,
    /// `f64::INFINITY` when there are no images (serialized as null).
    pub words_per_image: f64,
    pub book_type: BookType,
    pub language: String,
}

/// Classifies from counts alone.
pub fn classify_counts(words: usize, images: usize) -> BookType {
    if images == 0 {
        if words >= LONG_READING_WORDS {
            BookType::LongReading
        } else {
            BookType::ShortReading
        }
    } else if (words as f64) / (images as f64) < ONLY_IMAGES_RATIO {
        BookType::OnlyImages
    } else if words >= LONG_READING_WORDS {
        BookType::LongReading
    } else {
        BookType::TextAndImages
    }
}

pub fn classify(manuscript: &Manuscript, _rules: &RuleSet) -> ContentStats {
    let words = manuscript.word_count();
    let images = manuscript.images().count();
    ContentStats {
        words,
        images,
        words_per_image: if images == 0 {
            f64::INFINITY
        } else {
            words as f64 / images as f64
        },
        book_type: classify_counts(words, images),
        language: manuscript.language.clone(),
    }
}

/// Maps distinct prominences, most prominent first, to levels 1, 2, 3;
/// everything past the third collapses to level 3.
pub fn assign_heading_levels(manuscript: &Manuscript) -> Manuscript {
    let mut ranks: Vec<u8> = manuscript.headings().map(|h| h.prominence).collect();
    ranks.sort_unstable_by(|a, b| b.cmp(a));
    ranks.dedup();
    let mut out = manuscript.clone();
    for b in &mut out.blocks {
        if let Block::Heading(h) = b {
            let rank = ranks.iter().position(|p| *p == h.prominence).unwrap_or(0);
            h.level = (rank + 1).min(3) as u8;
        }
    }
    out
}

/// Caption from an image name: separators become spaces, sentence case.
pub fn caption_from_name(name: &str) -> String {
    let spaced: String = name
        .chars()
        .map(|c| if c == '-' || c == '_' { ' ' } else { c })
        .collect();
    let words: Vec<&str> = spaced.split_whitespace().collect();
    let lower = words.join(" ").to_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

/// Parses manuscript text; `@name@` tags resolve against `image_dir`.
pub fn parse_manuscript(source: &str, image_dir: Option<&Path>) -> Result<Manuscript> {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    if source.trim().is_empty() {
        return Err(Error::EmptyManuscript);
    }
    let normalized = source.replace("\r\n", "\n");
    let mut chunks: Vec<Vec<&str>> = Vec::new();
    let mut current = Vec::new();
    for line in normalized.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                chunks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        chunks.push(current);
    }

    let mut ms = Manuscript {
        blocks: Vec::new(),
        title: None,
        author: None,
        language: "en".into(),
    };
    let mut chunks = chunks.into_iter().peekable();
    if let Some(first) = chunks.peek() {
        if let Some(fields) = front_matter(first) {
            for (k, v) in fields {
                match k {
                    "title" => ms.title = Some(v.to_string()).filter(|s| !s.is_empty()),
                    "author" => ms.author = Some(v.to_string()).filter(|s| !s.is_empty()),
                    _ => {
                        if !v.is_empty() {
                            ms.language = v.to_string()
                        }
                    }
                }
            }
            chunks.next();
        }
    }

    for chunk in chunks {
        let mut para: Vec<&str> = Vec::new();
        for line in chunk {
            if let Some(h) = heading_line(line) {
                flush_paragraph(&mut para, &mut ms.blocks, image_dir)?;
                ms.blocks.push(Block::Heading(h));
            } else {
                para.push(line.trim());
            }
        }
        flush_paragraph(&mut para, &mut ms.blocks, image_dir)?;
    }
    if ms.blocks.is_empty() {
        return Err(Error::EmptyManuscript);
    }
    Ok(ms)
}

fn front_matter<'a>(lines: &[&'a str]) -> Option<Vec<(&'a str, &'a str)>> {
    lines
        .iter()
        .map(|l| {
            let (k, v) = l.split_once(':')?;
            let k = k.trim();
            FRONT_MATTER_KEYS.contains(&k).then(|| (k, v.trim()))
        })
        .collect()
}

fn heading_line(line: &str) -> Option<Heading> {
    let hashes = line.chars().take_while(|c| *c == '#').count();
    if hashes == 0 || hashes > 6 {
        return None;
    }
    let rest = &line[hashes..];
    if !rest.starts_with(' ') {
        return None;
    }
    let text = unescape(rest.trim());
    if text.is_empty() {
        return None;
    }
    Some(Heading {
        text,
        prominence: (7 - hashes) as u8,
        level: 0,
    })
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn flush_paragraph(
    lines: &mut Vec<&str>,
    blocks: &mut Vec<Block>,
    image_dir: Option<&Path>,
) -> Result<()> {
    if lines.is_empty() {
        return Ok(());
    }
    let text = lines.join(" ");
    lines.clear();
    for piece in split_images(&text) {
        match piece {
            Piece::Text(t) => {
                let runs = parse_runs(t);
                if runs.iter().any(|r| !r.text.trim().is_empty()) {
                    blocks.push(Block::Paragraph(Paragraph {
                        runs,
                        style: "body".into(),
                    }));
                }
            }
            Piece::Image(name) => blocks.push(Block::Image(resolve_image(name, image_dir)?)),
        }
    }
    Ok(())
}

enum Piece<'a> {
    Text(&'a str),
    Image(&'a str),
}

fn split_images(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c == '\\' {
            i += 2;
            continue;
        }
        if c == '@' {
            let mut j = i + 1;
            while j < bytes.len() && is_tag_char(bytes[j].1) {
                j += 1;
            }
            if j > i + 1 && j < bytes.len() && bytes[j].1 == '@' {
                let before = text[start..pos].trim();
                if !before.is_empty() {
                    out.push(Piece::Text(before));
                }
                out.push(Piece::Image(&text[pos + 1..bytes[j].0]));
                start = bytes[j].0 + 1;
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

/// Parses `*italic*`, `**bold**` and `^^small caps^^` into runs.
fn parse_runs(text: &str) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    let mut style = RunStyle::default();
    let mut buf = String::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let flush = |buf: &mut String, style: RunStyle, runs: &mut Vec<Run>| {
        if buf.is_empty() {
            return;
        }
        match runs.last_mut() {
            Some(r) if r.style == style => r.text.push_str(buf),
            _ => runs.push(Run {
                text: buf.clone(),
                style,
            }),
        }
        buf.clear();
    };
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\\' if next.is_some() => {
                buf.push(next.unwrap_or('\\'));
                i += 2;
            }
            '*' if next == Some('*') => {
                flush(&mut buf, style, &mut runs);
                style.bold = !style.bold;
                i += 2;
            }
            '*' => {
                flush(&mut buf, style, &mut runs);
                style.italic = !style.italic;
                i += 1;
            }
            '^' if next == Some('^') => {
                flush(&mut buf, style, &mut runs);
                style.small_caps = !style.small_caps;
                i += 2;
            }
            _ => {
                buf.push(c);
                i += 1;
            }
        }
    }
    flush(&mut buf, style, &mut runs);
    runs
}

fn resolve_image(name: &str, image_dir: Option<&Path>) -> Result<ImageRef> {
    let not_found = || Error::ImageNotFound(name.to_string());
    let dir = image_dir.ok_or_else(not_found)?;
    let exact = dir.join(name);
    let path = if exact.is_file() {
        exact
    } else {
        let mut candidates: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|_| not_found())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.file_stem().and_then(|s| s.to_str()) == Some(name))
            .collect();
        candidates.sort();
        candidates.into_iter().next().ok_or_else(not_found)?
    };
    let size = imagesize::size(&path).map_err(|e| Error::ImageUnreadable {
        name: name.to_string(),
        message: e.to_string(),
    })?;
    if size.width == 0 || size.height == 0 {
        return Err(Error::ImageUnreadable {
            name: name.to_string(),
            message: "zero-sized image".into(),
        });
    }
    let stem = Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name);
    Ok(ImageRef {
        name: name.to_string(),
        path,
        width: size.width as u32,
        height: size.height as u32,
        caption: caption_from_name(stem),
    })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '\\' | '*' | '^' | '@') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Writes a manuscript back to the text format.
pub fn serialize_manuscript(ms: &Manuscript) -> String {
    let mut out = String::new();
    let mut front = Vec::new();
    if let Some(t) = &ms.title {
        front.push(format!("title: {t}"));
    }
    if let Some(a) = &ms.author {
        front.push(format!("author: {a}"));
    }
    front.push(format!("language: {}", ms.language));
    out.push_str(&front.join("\n"));
    for b in &ms.blocks {
        out.push_str("\n\n");
        match b {
            Block::Heading(h) => {
                let hashes = 7usize.saturating_sub(usize::from(h.prominence)).clamp(1, 6);
                out.push_str(&"#".repeat(hashes));
                out.push(' ');
                out.push_str(&escape(&h.text));
            }
            Block::Image(i) => {
                out.push('@');
                out.push_str(&i.name);
                out.push('@');
            }
            Block::Paragraph(p) => {
                let mut style = RunStyle::default();
                let mut text = String::new();
                for r in &p.runs {
                    if r.style.small_caps != style.small_caps {
                        text.push_str("^^");
                    }
                    if r.style.bold != style.bold {
                        text.push_str("**");
                    }
                    if r.style.italic != style.italic {
                        text.push('*');
                    }
                    style = r.style;
                    text.push_str(&escape(&r.text));
                }
                if style.italic {
                    text.push('*');
                }
                if style.bold {
                    text.push_str("**");
                }
                if style.small_caps {
                    text.push_str("^^");
                }
                if text.starts_with('#') {
                    text.insert(0, '\\');
                }
                out.push_str(&text);
            }
        }
    }
    out.push('\n');
    out
}
