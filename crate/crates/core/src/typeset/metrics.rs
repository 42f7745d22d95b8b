//! Font metrics: per-glyph horizontal advances read from TrueType/OpenType
//! files (`hmtx` + `cmap`) or from plain-text sidecar tables.
//!
//! Sidecar format, one directive per line (`#` starts a comment):
//!
//! ```text
//! family STIXGeneral
//! unitsPerEm 1000
//! fallback 0.25
//! U+0061 0.444
//! ```
//!
//! `uniform <em>` gives every codepoint the same advance.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::rules::FontSlot;

const BUILTIN_PREFIX: &str = "builtin:";

const BUILTINS: &[(&str, &str)] = &[
    ("dejavu-serif", include_str!("../../data/fonts/dejavu-serif.metrics")),
    ("dejavu-serif-bold", include_str!("../../data/fonts/dejavu-serif-bold.metrics")),
    ("dejavu-sans", include_str!("../../data/fonts/dejavu-sans.metrics")),
    ("dejavu-sans-bold", include_str!("../../data/fonts/dejavu-sans-bold.metrics")),
    ("stix-general", include_str!("../../data/fonts/stix-general.metrics")),
    ("stix-general-bold", include_str!("../../data/fonts/stix-general-bold.metrics")),
];

/// Horizontal metrics of one font face, in em units.
#[derive(Debug, Clone, PartialEq)]
pub struct FontMetrics {
    pub family: String,
    pub units_per_em: u16,
    glyph_of: HashMap<char, u16>,
    advances: Vec<f64>,
    fallback: f64,
}

impl FontMetrics {
    /// A face where every codepoint advances by `em`.
    pub fn uniform(family: impl Into<String>, em: f64) -> Self {
        FontMetrics {
            family: family.into(),
            units_per_em: 1000,
            glyph_of: HashMap::new(),
            advances: Vec::new(),
            fallback: em,
        }
    }

    pub fn fallback_advance(&self) -> f64 {
        self.fallback
    }

    pub fn has_glyph(&self, c: char) -> bool {
        self.glyph_of.contains_key(&c)
    }

    /// Advance of `c` in em; unmapped codepoints use the fallback advance.
    pub fn advance_em(&self, c: char) -> f64 {
        self.glyph_of
            .get(&c)
            .and_then(|g| self.advances.get(usize::from(*g)))
            .copied()
            .unwrap_or(self.fallback)
    }

    pub fn advance<S: Scalar>(&self, c: char, size: S) -> S {
        S::lit(self.advance_em(c)) * size
    }

    /// Mean advance (em) weighted by a language's character frequencies.
    pub fn mean_advance(&self, language: &str) -> f64 {
        let table = letter_frequencies(language);
        let total: f64 = table.iter().map(|(_, f)| f).sum();
        table.iter().map(|(c, f)| f * self.advance_em(*c)).sum::<f64>() / total
    }
}

/// Width of `text` at `size` pt.
///
/// Advances are scaled by `size`; space glyphs are additionally scaled by
/// `word_spacing`; each gap between adjacent glyphs grows by
/// `letter_spacing * size`.
pub fn measure_run<S: Scalar>(
    text: &str,
    metrics: &FontMetrics,
    size: S,
    letter_spacing: S,
    word_spacing: S,
) -> S {
    let mut width = S::zero();
    let mut glyphs = 0usize;
    for c in text.chars() {
        let adv = metrics.advance(c, size);
        width = width + if c == ' ' { adv * word_spacing } else { adv };
        glyphs += 1;
    }
    if glyphs > 1 {
        width = width + S::count(glyphs - 1) * letter_spacing * size;
    }
    width
}

/// Share of words per character for a language (the frequency of the space).
pub fn words_per_char(language: &str) -> f64 {
    let table = letter_frequencies(language);
    let total: f64 = table.iter().map(|(_, f)| f).sum();
    table
        .iter()
        .find(|(c, _)| *c == ' ')
        .map(|(_, f)| f / total)
        .unwrap_or(0.17)
}

/// Approximate character frequencies of running text (percent), space and
/// common punctuation included.
fn letter_frequencies(language: &str) -> &'static [(char, f64)] {
    match crate::typeset::hyphen::primary_subtag(language).as_str() {
        "pt" => PT_FREQ,
        _ => EN_FREQ,
    }
}

const EN_FREQ: &[(char, f64)] = &[
    (' ', 17.0),
    ('e', 10.0),
    ('t', 7.1),
    ('a', 6.4),
    ('o', 5.9),
    ('i', 5.5),
    ('n', 5.3),
    ('s', 5.0),
    ('h', 4.8),
    ('r', 4.7),
    ('d', 3.4),
    ('l', 3.2),
    ('c', 2.2),
    ('u', 2.2),
    ('m', 1.9),
    ('w', 1.9),
    ('f', 1.8),
    ('g', 1.6),
    ('y', 1.6),
    ('p', 1.5),
    ('b', 1.0),
    ('v', 0.8),
    ('k', 0.6),
    ('j', 0.1),
    ('x', 0.1),
    ('q', 0.1),
    ('z', 0.1),
    ('T', 0.4),
    ('I', 0.4),
    ('A', 0.3),
    ('S', 0.2),
    ('H', 0.2),
    ('W', 0.2),
    (',', 1.2),
    ('.', 0.9),
    (';', 0.1),
    ('\'', 0.2),
    ('-', 0.2),
];

const PT_FREQ: &[(char, f64)] = &[
    (' ', 16.5),
    ('a', 11.6),
    ('e', 10.0),
    ('o', 8.5),
    ('s', 6.2),
    ('r', 5.2),
    ('i', 4.9),
    ('n', 4.0),
    ('d', 4.0),
    ('m', 3.8),
    ('u', 3.7),
    ('t', 3.4),
    ('c', 3.1),
    ('l', 2.2),
    ('p', 2.0),
    ('v', 1.3),
    ('g', 1.0),
    ('h', 1.0),
    ('q', 1.0),
    ('b', 0.8),
    ('f', 0.8),
    ('z', 0.4),
    ('j', 0.3),
    ('x', 0.2),
    ('ã', 0.6),
    ('ç', 0.4),
    ('é', 0.3),
    ('á', 0.3),
    ('ê', 0.3),
    ('í', 0.2),
    ('ó', 0.2),
    ('õ', 0.1),
    ('à', 0.1),
    ('A', 0.3),
    ('E', 0.2),
    ('O', 0.2),
    ('S', 0.1),
    (',', 1.3),
    ('.', 0.9),
    (';', 0.1),
    ('-', 0.3),
];

/// Loads metrics from a font file or sidecar on disk.
pub fn load_font_metrics(path: &Path) -> Result<FontMetrics> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_font_metrics_bytes(&bytes, &path.display().to_string())
}

/// Loads metrics from in-memory font or sidecar bytes; `name` is used in errors.
pub fn load_font_metrics_bytes(bytes: &[u8], name: &str) -> Result<FontMetrics> {
    if is_sfnt(bytes) {
        parse_sfnt(bytes, name)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Font(format!("{name}: neither a font file nor a UTF-8 sidecar")))?;
        parse_sidecar(text, name)
    }
}

fn is_sfnt(bytes: &[u8]) -> bool {
    matches!(
        bytes.get(0..4),
        Some([0, 1, 0, 0]) | Some(b"OTTO") | Some(b"true") | Some(b"ttcf")
    )
}

fn parse_sfnt(bytes: &[u8], name: &str) -> Result<FontMetrics> {
    let face = ttf_parser::Face::parse(bytes, 0)
        .map_err(|e| Error::Font(format!("{name}: {e}")))?;
    if face.tables().hmtx.is_none() {
        return Err(Error::Font(format!("{name}: missing hmtx table")));
    }
    let Some(cmap) = face.tables().cmap else {
        return Err(Error::Font(format!("{name}: missing cmap table")));
    };
    let upem = face.units_per_em();
    let glyphs = face.number_of_glyphs();
    let advances: Vec<f64> = (0..glyphs)
        .map(|g| {
            face.glyph_hor_advance(ttf_parser::GlyphId(g))
                .map(|a| f64::from(a) / f64::from(upem))
                .unwrap_or(0.0)
        })
        .collect();
    let mut glyph_of = HashMap::new();
    for sub in cmap.subtables.into_iter().filter(|s| s.is_unicode()) {
        sub.codepoints(|cp| {
            if let (Some(c), Some(g)) = (char::from_u32(cp), sub.glyph_index(cp)) {
                glyph_of.entry(c).or_insert(g.0);
            }
        });
    }
    let family = face
        .names()
        .into_iter()
        .find(|n| n.name_id == ttf_parser::name_id::FAMILY && n.is_unicode())
        .and_then(|n| n.to_string())
        .unwrap_or_else(|| name.to_string());
    let fallback = advances.first().copied().filter(|a| *a > 0.0).unwrap_or(0.5);
    Ok(FontMetrics {
        family,
        units_per_em: upem,
        glyph_of,
        advances,
        fallback,
    })
}

fn parse_codepoint(token: &str) -> Option<char> {
    let cp = if let Some(hex) = token.strip_prefix("U+").or_else(|| token.strip_prefix("0x")) {
        u32::from_str_radix(hex, 16).ok()?
    } else {
        token.parse().ok()?
    };
    char::from_u32(cp)
}

fn parse_sidecar(text: &str, name: &str) -> Result<FontMetrics> {
    let bad = |line: usize, msg: &str| Error::Font(format!("{name}:{line}: {msg}"));
    let mut family = None;
    let mut upem = None;
    let mut fallback = None;
    let mut table = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .map(|(k, v)| (k, v.trim()))
            .ok_or_else(|| bad(i + 1, "expected `<key> <value>`"))?;
        let number = || -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| bad(i + 1, "expected a non-negative number"))
        };
        match key {
            "family" => family = Some(value.to_string()),
            "unitsPerEm" => {
                upem = Some(
                    value
                        .parse::<u16>()
                        .ok()
                        .filter(|u| *u > 0)
                        .ok_or_else(|| bad(i + 1, "unitsPerEm must be a positive integer"))?,
                )
            }
            "fallback" | "uniform" => fallback = Some(number()?),
            _ => {
                let c = parse_codepoint(key).ok_or_else(|| bad(i + 1, "bad codepoint"))?;
                table.insert(c, number()?);
            }
        }
    }
    let units_per_em = upem.ok_or_else(|| Error::Font(format!("{name}: missing unitsPerEm header")))?;
    let mut glyph_of = HashMap::with_capacity(table.len());
    let mut advances = Vec::with_capacity(table.len());
    for (c, adv) in table {
        let gid = u16::try_from(advances.len())
            .map_err(|_| Error::Font(format!("{name}: too many entries")))?;
        glyph_of.insert(c, gid);
        advances.push(adv);
    }
    let fallback = fallback.unwrap_or_else(|| {
        if advances.is_empty() {
            0.5
        } else {
            advances.iter().sum::<f64>() / advances.len() as f64
        }
    });
    Ok(FontMetrics {
        family: family.unwrap_or_else(|| name.to_string()),
        units_per_em,
        glyph_of,
        advances,
        fallback,
    })
}

/// Writes metrics back out as a sidecar table (for codepoints in `chars`).
pub fn write_sidecar(metrics: &FontMetrics, chars: impl IntoIterator<Item = char>) -> String {
    let mut out = format!(
        "family {}\nunitsPerEm {}\nfallback {:.6}\n",
        metrics.family, metrics.units_per_em, metrics.fallback
    );
    for c in chars {
        if metrics.has_glyph(c) {
            out.push_str(&format!("U+{:04X} {:.6}\n", u32::from(c), metrics.advance_em(c)));
        }
    }
    out
}

/// Names of the bundled stand-in faces (`builtin:<name>`).
pub fn builtin_faces() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

/// Font map: design family names (`"<family> <weight>"` or bare family) to
/// font sources (`builtin:<name>`, a font file or a sidecar path).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FontMap {
    pub fonts: BTreeMap<String, String>,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl FontMap {
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<FontMap> {
        let mut map: FontMap = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "font map",
            message: e.to_string(),
        })?;
        map.base_dir = base_dir.map(Path::to_path_buf);
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<FontMap> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FontMap::parse(&text, path.parent())
    }

    /// The map implied by the rule base: every slot bound to its bundled stand-in.
    pub fn from_rules(rules: &crate::rules::RuleSet) -> FontMap {
        let mut fonts = BTreeMap::new();
        for p in &rules.pairings {
            for slot in [&p.title, &p.body] {
                fonts.insert(slot.key(), slot.source.clone());
            }
        }
        FontMap {
            fonts,
            base_dir: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("font map serializes")
    }

    /// Source bound to a slot: exact key, then bare family, then the slot's own source.
    pub fn source_for(&self, slot: &FontSlot) -> String {
        self.fonts
            .get(&slot.key())
            .or_else(|| self.fonts.get(&slot.family))
            .cloned()
            .unwrap_or_else(|| slot.source.clone())
    }

    fn resolve_path(&self, source: &str) -> PathBuf {
        let p = PathBuf::from(source);
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    }
}

/// Loads and caches metrics for font slots; shareable across jobs.
#[derive(Debug, Default)]
pub struct FontLibrary {
    map: FontMap,
    cache: Mutex<HashMap<String, Arc<FontMetrics>>>,
}

impl FontLibrary {
    pub fn new(map: FontMap) -> Self {
        FontLibrary {
            map,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn map(&self) -> &FontMap {
        &self.map
    }

    pub fn metrics_for(&self, slot: &FontSlot) -> Result<Arc<FontMetrics>> {
        let source = self.map.source_for(slot);
        self.load_source(&source)
    }

    pub fn load_source(&self, source: &str) -> Result<Arc<FontMetrics>> {
        if let Some(m) = self.cache.lock().expect("font cache poisoned").get(source) {
            return Ok(Arc::clone(m));
        }
        let metrics = if let Some(name) = source.strip_prefix(BUILTIN_PREFIX) {
            let (_, text) = BUILTINS
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| Error::Font(format!("unknown builtin face `{name}`")))?;
            parse_sidecar(text, source)?
        } else {
            load_font_metrics(&self.map.resolve_path(source))?
        };
        let metrics = Arc::new(metrics);
        self.cache
            .lock()
            .expect("font cache poisoned")
            .insert(source.to_string(), Arc::clone(&metrics));
        Ok(metrics)
    }
}
