//! The editable rule base.
//!
//! Every typographic range, option list and probability the engine uses
//! lives in a [`RuleSet`], loaded from a JSON rule file. The default rule
//! file is bundled with the crate (`data/rules.json`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Cmyk, Span};

const DEFAULT_RULES: &str = include_str!("../data/rules.json");

/// Content classification that drives rule selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BookType {
    LongReading,
    ShortReading,
    TextAndImages,
    OnlyImages,
}

impl BookType {
    pub const ALL: [BookType; 4] = [
        BookType::LongReading,
        BookType::ShortReading,
        BookType::TextAndImages,
        BookType::OnlyImages,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BookType::LongReading => "long_reading",
            BookType::ShortReading => "short_reading",
            BookType::TextAndImages => "text_and_images",
            BookType::OnlyImages => "only_images",
        }
    }
}

impl fmt::Display for BookType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<String> for BookType {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl std::str::FromStr for BookType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BookType::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown book type `{s}`"))
    }
}

impl From<BookType> for String {
    fn from(b: BookType) -> String {
        b.as_str().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Portrait,
    Landscape,
    Square,
}

impl Orientation {
    pub fn of(width: f64, height: f64) -> Orientation {
        if (width - height).abs() < 1e-9 {
            Orientation::Square
        } else if width < height {
            Orientation::Portrait
        } else {
            Orientation::Landscape
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Portrait => "portrait",
            Orientation::Landscape => "landscape",
            Orientation::Square => "square",
        }
    }
}

/// A page format with its selection weight per book type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SizeOption {
    pub width: f64,
    pub height: f64,
    pub orientation: Orientation,
    pub weights: BTreeMap<BookType, f64>,
}

impl SizeOption {
    pub fn id(&self) -> String {
        format!("{}x{}", crate::geom::fmt_num(self.width), crate::geom::fmt_num(self.height))
    }

    pub fn weight(&self, book_type: BookType) -> f64 {
        self.weights.get(&book_type).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MarginRules {
    pub top_bottom: Span<f64>,
    pub inside_outside: Span<f64>,
    /// Outer margin needed before captions may sit rotated beside an image.
    pub caption_aside_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ColumnRules {
    pub width: Span<f64>,
    pub gutter: Span<f64>,
}

/// Characters per line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LineLength {
    pub min: f64,
    pub ideal: f64,
    pub max: f64,
    pub justified_min: f64,
}

impl LineLength {
    /// Acceptable characters-per-line interval for a body alignment.
    pub fn bounds(&self, justified: bool) -> Span<f64> {
        let min = if justified {
            self.min.max(self.justified_min)
        } else {
            self.min
        };
        Span::new(min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PageCapacity {
    pub one_column: u32,
    pub multi_column: u32,
}

impl PageCapacity {
    pub fn for_columns(&self, columns: u32) -> u32 {
        if columns <= 1 {
            self.one_column
        } else {
            self.multi_column
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FontSizeRules {
    pub body: Span<f64>,
    /// Title size per level as a multiple of the body size.
    pub title_scale: [f64; 3],
    /// Leading of level 1 and 2 titles as a ratio of their size.
    pub title_leading: f64,
    /// Mean glyph advance (em) assumed before real metrics are known.
    pub nominal_advance: f64,
}

/// A ratio range with its preferred value (`base` for leading, `ideal` for spacing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Leading {
    pub min: f64,
    pub max: f64,
    pub base: f64,
}

impl Leading {
    pub fn span(&self) -> Span<f64> {
        Span::new(self.min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Elastic {
    pub min: f64,
    pub max: f64,
    pub ideal: f64,
}

impl Elastic {
    pub fn span(&self) -> Span<f64> {
        Span::new(self.min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Left,
    Right,
    Centre,
    Justified,
}

impl Alignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Alignment::Left => "left",
            Alignment::Right => "right",
            Alignment::Centre => "centre",
            Alignment::Justified => "justified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weighted<T> {
    pub value: T,
    pub weight: f64,
}

/// Alignments allowed for each text role of one book type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AlignmentRule {
    pub body: Vec<Weighted<Alignment>>,
    pub title: Vec<Alignment>,
    pub caption: Vec<Alignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ParagraphMark {
    /// Ornament glyph leading each paragraph.
    Ornament,
    /// A blank baseline before each paragraph.
    SpaceBefore,
    /// Pilcrow leading each paragraph.
    Pilcrow,
    /// Hanging first line: following lines indented by one body size.
    NegativeIndent,
    /// First line indented by one body size.
    PositiveIndent,
}

impl ParagraphMark {
    pub fn as_str(self) -> &'static str {
        match self {
            ParagraphMark::Ornament => "ornament",
            ParagraphMark::SpaceBefore => "spaceBefore",
            ParagraphMark::Pilcrow => "pilcrow",
            ParagraphMark::NegativeIndent => "negativeIndent",
            ParagraphMark::PositiveIndent => "positiveIndent",
        }
    }

    /// Glyph prefixed to paragraphs, if the mark is a glyph.
    pub fn glyph(self) -> Option<char> {
        match self {
            ParagraphMark::Ornament => Some('\u{2761}'),
            ParagraphMark::Pilcrow => Some('\u{00B6}'),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HeaderEdge {
    Top,
    Bottom,
    /// Inside the outer margin, running vertically.
    OuterMargin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HeaderAlign {
    /// Slightly indented from the left edge of the text block.
    Indented,
    Centre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FolioEdge {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FolioAlign {
    /// Flush with the right edge of the text block.
    Right,
    /// Flush with the outer edge of the text block.
    Outer,
    Centre,
    /// Centred over the inner margin.
    InnerCorner,
    /// Centred over the outer margin.
    OuterCorner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HeaderPlacement {
    pub edge: HeaderEdge,
    pub align: HeaderAlign,
    /// Rotation in degrees (0 or 90).
    pub rotation: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FolioPlacement {
    pub edge: FolioEdge,
    pub align: FolioAlign,
}

/// One way of composing the running header and page number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HeaderLayout {
    pub id: String,
    pub header: HeaderPlacement,
    pub page_number: FolioPlacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Serif,
    Sans,
}

/// A typeface slot: the family the design names and the file that stands in for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FontSlot {
    pub family: String,
    pub weight: String,
    pub source: String,
}

impl FontSlot {
    /// Key used by font maps: `"<family> <weight>"`.
    pub fn key(&self) -> String {
        format!("{} {}", self.family, self.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FontPairing {
    pub id: String,
    pub title: FontSlot,
    pub body: FontSlot,
    pub leading: f64,
    pub book_types: Vec<BookType>,
    pub body_class: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteColor {
    pub name: String,
    pub cmyk: Cmyk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RuleSet {
    #[serde(rename = "sizes")]
    pub size_options: Vec<SizeOption>,
    pub margins: MarginRules,
    pub columns: ColumnRules,
    pub line_length: LineLength,
    pub page_capacity: PageCapacity,
    pub font_size: FontSizeRules,
    pub leading: Leading,
    pub word_spacing: Elastic,
    pub letter_spacing: Elastic,
    pub alignments: BTreeMap<BookType, AlignmentRule>,
    pub paragraph_marks: Vec<ParagraphMark>,
    pub header_layouts: Vec<HeaderLayout>,
    pub pairings: Vec<FontPairing>,
    #[serde(rename = "coverColors")]
    pub cover_colors: Vec<PaletteColor>,
    pub feature_probability: f64,
}

/// Parses and validates rule-file text.
pub fn load_rules(source: &str) -> Result<RuleSet> {
    let rules: RuleSet = serde_json::from_str(source).map_err(|e| Error::Parse {
        what: "rule file",
        message: e.to_string(),
    })?;
    rules.validate()?;
    Ok(rules)
}

/// The bundled rule base.
pub fn default_rules() -> RuleSet {
    load_rules(DEFAULT_RULES).expect("bundled rule file is valid")
}

/// Text of the bundled rule file.
pub fn default_rules_text() -> &'static str {
    DEFAULT_RULES
}

/// Pairings usable for a book type, in rule-file order.
pub fn eligible_pairings(rules: &RuleSet, book_type: BookType) -> Result<Vec<&FontPairing>> {
    let found: Vec<_> = rules
        .pairings
        .iter()
        .filter(|p| p.book_types.contains(&book_type))
        .collect();
    if found.is_empty() {
        Err(Error::NoPairing(book_type))
    } else {
        Ok(found)
    }
}

fn check_span(name: &str, span: &Span<f64>) -> Result<()> {
    if !span.min.is_finite() || !span.max.is_finite() {
        return Err(Error::Rules(format!("{name}: non-finite bound")));
    }
    if !span.is_ordered() {
        return Err(Error::Rules(format!(
            "{name}: inverted range [{}, {}]",
            span.min, span.max
        )));
    }
    Ok(())
}

fn check_preferred(name: &str, span: Span<f64>, value: f64) -> Result<()> {
    check_span(name, &span)?;
    if !span.contains(value) {
        return Err(Error::Rules(format!(
            "{name}: preferred value {value} outside [{}, {}]",
            span.min, span.max
        )));
    }
    Ok(())
}

impl RuleSet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule set serializes")
    }

    pub fn pairing(&self, id: &str) -> Option<&FontPairing> {
        self.pairings.iter().find(|p| p.id == id)
    }

    pub fn header_layout(&self, id: &str) -> Option<&HeaderLayout> {
        self.header_layouts.iter().find(|h| h.id == id)
    }

    pub fn size_option(&self, width: f64, height: f64) -> Option<&SizeOption> {
        self.size_options
            .iter()
            .find(|s| (s.width - width).abs() < 1e-9 && (s.height - height).abs() < 1e-9)
    }

    pub fn alignment_rule(&self, book_type: BookType) -> &AlignmentRule {
        // validate() guarantees every book type has an entry
        &self.alignments[&book_type]
    }

    /// Checks every structural and numeric invariant of the rule base.
    pub fn validate(&self) -> Result<()> {
        if self.size_options.is_empty() {
            return Err(Error::Rules("sizes: empty".into()));
        }
        for s in &self.size_options {
            if !(s.width > 0.0 && s.height > 0.0) {
                return Err(Error::Rules(format!("sizes: {} has non-positive side", s.id())));
            }
            if Orientation::of(s.width, s.height) != s.orientation {
                return Err(Error::Rules(format!(
                    "sizes: {} tagged {} but is {}",
                    s.id(),
                    s.orientation.as_str(),
                    Orientation::of(s.width, s.height).as_str()
                )));
            }
            if s.weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Rules(format!("sizes: {} has a negative weight", s.id())));
            }
        }
        for bt in BookType::ALL {
            let total: f64 = self.size_options.iter().map(|s| s.weight(bt)).sum();
            if total <= 0.0 {
                return Err(Error::Rules(format!("sizes: no positive weight for {bt}")));
            }
        }

        check_span("margins.topBottom", &self.margins.top_bottom)?;
        check_span("margins.insideOutside", &self.margins.inside_outside)?;
        if self.margins.top_bottom.min < 0.0 || self.margins.inside_outside.min < 0.0 {
            return Err(Error::Rules("margins: negative bound".into()));
        }
        check_span("columns.width", &self.columns.width)?;
        check_span("columns.gutter", &self.columns.gutter)?;
        if self.columns.width.min <= 0.0 {
            return Err(Error::Rules("columns.width: must be positive".into()));
        }

        let ll = &self.line_length;
        check_preferred("lineLength", Span::new(ll.min, ll.max), ll.ideal)?;
        check_preferred("lineLength.justifiedMin", Span::new(ll.min, ll.max), ll.justified_min)?;

        if self.page_capacity.one_column == 0 || self.page_capacity.multi_column == 0 {
            return Err(Error::Rules("pageCapacity: must be positive".into()));
        }

        check_span("fontSize.body", &self.font_size.body)?;
        if self.font_size.body.min <= 0.0 {
            return Err(Error::Rules("fontSize.body: must be positive".into()));
        }
        if self.font_size.title_scale.iter().any(|s| *s <= 0.0)
            || self.font_size.title_leading <= 0.0
            || self.font_size.nominal_advance <= 0.0
        {
            return Err(Error::Rules("fontSize: scales must be positive".into()));
        }

        check_preferred("leading", self.leading.span(), self.leading.base)?;
        check_preferred("wordSpacing", self.word_spacing.span(), self.word_spacing.ideal)?;
        check_preferred("letterSpacing", self.letter_spacing.span(), self.letter_spacing.ideal)?;

        for bt in BookType::ALL {
            let Some(rule) = self.alignments.get(&bt) else {
                return Err(Error::Rules(format!("alignments: missing {bt}")));
            };
            if rule.body.is_empty() || rule.title.is_empty() || rule.caption.is_empty() {
                return Err(Error::Rules(format!("alignments.{bt}: empty option list")));
            }
            if rule.body.iter().all(|w| w.weight <= 0.0) || rule.body.iter().any(|w| w.weight < 0.0)
            {
                return Err(Error::Rules(format!("alignments.{bt}.body: bad weights")));
            }
            if rule
                .title
                .iter()
                .any(|a| !matches!(a, Alignment::Left | Alignment::Centre))
            {
                return Err(Error::Rules(format!("alignments.{bt}.title: only left or centre")));
            }
            if rule
                .caption
                .iter()
                .any(|a| !matches!(a, Alignment::Left | Alignment::Right))
            {
                return Err(Error::Rules(format!("alignments.{bt}.caption: only left or right")));
            }
            if bt == BookType::LongReading
                && rule
                    .body
                    .iter()
                    .any(|w| !matches!(w.value, Alignment::Justified | Alignment::Left))
            {
                return Err(Error::Rules(
                    "alignments.long_reading.body: only justified or left".into(),
                ));
            }
        }

        if self.paragraph_marks.is_empty() {
            return Err(Error::Rules("paragraphMarks: empty".into()));
        }

        if self.header_layouts.is_empty() {
            return Err(Error::Rules("headerLayouts: empty".into()));
        }
        let mut ids = BTreeSet::new();
        for h in &self.header_layouts {
            if !ids.insert(h.id.as_str()) {
                return Err(Error::Rules(format!("headerLayouts: duplicate id {}", h.id)));
            }
            let rotated = h.header.rotation == 90;
            if !(h.header.rotation == 0 || rotated)
                || rotated != (h.header.edge == HeaderEdge::OuterMargin)
            {
                return Err(Error::Rules(format!(
                    "headerLayouts.{}: rotation must be 90 exactly when placed in the outer margin",
                    h.id
                )));
            }
        }

        let mut ids = BTreeSet::new();
        for p in &self.pairings {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::Rules(format!("pairings: duplicate id {}", p.id)));
            }
            if p.book_types.is_empty() {
                return Err(Error::Rules(format!("pairings.{}: no book type", p.id)));
            }
            if !self.leading.span().contains(p.leading) {
                return Err(Error::Rules(format!(
                    "pairings.{}: leading {} outside leading range",
                    p.id, p.leading
                )));
            }
            if p.book_types.contains(&BookType::LongReading) && p.body_class != Classification::Serif
            {
                return Err(Error::Rules(format!(
                    "pairings.{}: long reading requires a serif body",
                    p.id
                )));
            }
        }
        for bt in BookType::ALL {
            if eligible_pairings(self, bt).is_err() {
                return Err(Error::Rules(format!("pairings: empty pairing list for {bt}")));
            }
        }

        if self.cover_colors.is_empty() {
            return Err(Error::Rules("coverColors: empty".into()));
        }
        for c in &self.cover_colors {
            if !c.cmyk.is_valid() {
                return Err(Error::Rules(format!(
                    "coverColors.{}: components must lie in [0, 100]",
                    c.name
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.feature_probability) {
            return Err(Error::Rules("featureProbability: must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
