//! The whole generation pipeline and its output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cover::{design_cover, extract_title, TitleInfo, TitleSource};
use crate::error::{Error, Result};
use crate::features::apply_features;
use crate::ingest::{assign_heading_levels, classify, parse_manuscript, ContentStats, Manuscript};
use crate::planner::{confirm_fit, export_settings, plan, Constraints, DesignSettings};
use crate::render::{render_page, render_svg, write_layout_json};
use crate::rng::SeededStream;
use crate::rules::RuleSet;
use crate::typeset::colophon::build_colophon;
use crate::typeset::layout::{LayoutDocument, PageKind};
use crate::typeset::metrics::{FontLibrary, FontMap};
use crate::typeset::paginate::{check_body, paginate};
use crate::typeset::style::Faces;
use crate::typeset::toc::build_toc;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rules and fonts shared by every job.
#[derive(Debug)]
pub struct Engine {
    pub rules: RuleSet,
    pub fonts: FontLibrary,
}

/// A finished book.
#[derive(Debug, Clone)]
pub struct Book {
    pub manuscript: Manuscript,
    pub stats: ContentStats,
    pub settings: DesignSettings,
    pub layout: LayoutDocument,
    pub warnings: Vec<String>,
}

/// What `regenerate` needs to run a job again; stored as `job.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobRecord {
    pub input: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
    pub constraints: Constraints,
    pub seed: u64,
}

impl Engine {
    pub fn new(rules: RuleSet, fonts: FontMap) -> Engine {
        Engine {
            rules,
            fonts: FontLibrary::new(fonts),
        }
    }

    /// Default rules with the bundled faces.
    pub fn with_defaults() -> Engine {
        let rules = crate::rules::default_rules();
        let fonts = FontMap::from_rules(&rules);
        Engine::new(rules, fonts)
    }

    pub fn faces(&self, pairing: &str) -> Result<Faces> {
        Faces::load(&self.fonts, &self.rules, pairing)
    }

    /// Parses a manuscript and levels its headings.
    pub fn read(&self, source: &str, images: Option<&Path>) -> Result<Manuscript> {
        Ok(assign_heading_levels(&parse_manuscript(source, images)?))
    }

    /// Plans and fits a design for a manuscript.
    pub fn design(&self, ms: &Manuscript, c: &Constraints, seed: u64) -> Result<DesignSettings> {
        let stats = classify(ms, &self.rules);
        let s = plan(&stats, &self.rules, c, seed)?;
        let faces = self.faces(&s.pairing)?;
        confirm_fit(&s, ms, &faces.body.metrics, &self.rules, c)
    }

    /// Sets a planned design: body, covers, contents, colophon, features.
    pub fn typeset(&self, ms: &Manuscript, s: &DesignSettings, warnings: &mut Vec<String>) -> Result<LayoutDocument> {
        let faces = self.faces(&s.pairing)?;
        let root = SeededStream::new(s.seed);
        let mut stream = root.fork("layout");
        let body = paginate(ms, s, &self.rules, &faces, &mut stream)?;
        let info = extract_title(ms).unwrap_or_else(|_| {
            warnings.push("no title source; the cover is untitled".into());
            TitleInfo {
                title: "Untitled".into(),
                author: ms.author.clone(),
                source: TitleSource::Extracted,
            }
        });
        let (front, back) = design_cover(&info, s, &faces, &mut root.fork("cover"), &self.rules, VERSION);
        let mut pages = vec![front];
        if s.toc {
            let toc = build_toc(ms, s, &faces, &body.pages, pages.len());
            if toc.is_empty() {
                warnings.push("no headings; contents skipped".into());
            }
            pages.extend(toc);
        }
        let next = body.pages.iter().filter_map(|p| p.number).max().unwrap_or(0) + 1;
        pages.extend(body.pages);
        if s.colophon {
            pages.extend(build_colophon(s, &self.rules, &faces, VERSION, next));
        }
        let doc = LayoutDocument {
            width: s.page.w,
            height: s.page.h,
            pages,
            back_cover: Some(back),
        };
        let doc = apply_features(&doc, &s.features, &mut root.fork("features"));
        let overflow = doc.overflow_lines();
        if overflow > 0 {
            warnings.push(format!("{overflow} lines break inside a word without hyphenation"));
        }
        check_body(&doc, s, &self.rules)?;
        Ok(doc)
    }

    /// Runs the pipeline on manuscript text.
    pub fn generate(&self, source: &str, images: Option<&Path>, c: &Constraints, seed: u64) -> Result<Book> {
        let ms = self.read(source, images)?;
        self.generate_manuscript(ms, c, seed)
    }

    pub fn generate_manuscript(&self, ms: Manuscript, c: &Constraints, seed: u64) -> Result<Book> {
        let stats = classify(&ms, &self.rules);
        let settings = self.design(&ms, c, seed)?;
        let mut warnings = Vec::new();
        let layout = self.typeset(&ms, &settings, &mut warnings)?;
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(Book {
            manuscript: ms,
            stats,
            settings,
            layout,
            warnings,
        })
    }
}

impl Book {
    pub fn page_count(&self) -> usize {
        self.layout.pages.len()
    }

    pub fn settings_json(&self) -> String {
        export_settings(&self.settings)
    }

    pub fn layout_json(&self) -> String {
        write_layout_json(&self.layout)
    }

    pub fn svg_pages(&self) -> Vec<String> {
        render_svg(&self.layout)
    }

    pub fn back_cover_svg(&self) -> Option<String> {
        self.layout.back_cover.as_ref().map(render_page)
    }

    /// Writes `settings.json`, `layout.json`, `fonts.json`,
    /// `pages/page-NNNN.svg`, `pages/back-cover.svg` and the images.
    pub fn write_to(&self, dir: &Path, fonts: &FontMap) -> Result<()> {
        let pages_dir = dir.join("pages");
        fs::create_dir_all(&pages_dir).map_err(|e| Error::io(&pages_dir, e))?;
        write(&dir.join("settings.json"), &self.settings_json())?;
        write(&dir.join("layout.json"), &self.layout_json())?;
        write(&dir.join("fonts.json"), &fonts.to_json())?;
        for (i, svg) in self.svg_pages().iter().enumerate() {
            write(&pages_dir.join(page_file(i + 1)), svg)?;
        }
        if let Some(svg) = self.back_cover_svg() {
            write(&pages_dir.join("back-cover.svg"), &svg)?;
        }
        let images: Vec<_> = self.manuscript.images().collect();
        if !images.is_empty() {
            // pages refer to images relative to themselves and to the root
            for sub in [dir.join("images"), pages_dir.join("images")] {
                fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
                for img in &images {
                    if let Some(name) = img.path.file_name() {
                        let to = sub.join(name);
                        fs::copy(&img.path, &to).map_err(|e| Error::io(&img.path, e))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Body pages only, with their printed numbers.
    pub fn body_page_numbers(&self) -> Vec<u32> {
        self.layout
            .pages
            .iter()
            .filter(|p| matches!(p.kind, PageKind::Body | PageKind::Title))
            .filter_map(|p| p.number)
            .collect()
    }
}

/// `page-0001.svg` for page 1.
pub fn page_file(n: usize) -> String {
    format!("page-{n:04}.svg")
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl JobRecord {
    pub fn load(path: &Path) -> Result<JobRecord> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            what: "job file",
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("job serializes");
        text.push('\n');
        write(path, &text)
    }
}
