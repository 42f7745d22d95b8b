//! Resolved designs, user constraints and the settings file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ExplicitFeatures, Feature, FeatureSet, GradientMargins};
use crate::geom::{fmt_num, mm_to_pt, Cmyk, Span};
use crate::rules::{Alignment, BookType, Elastic, ParagraphMark, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageSize {
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Margins {
    pub top: f64,
    pub inside: f64,
    pub bottom: f64,
    pub outside: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Grid {
    pub columns: u32,
    /// mm; `None` for a single column.
    pub gutter: Option<f64>,
    /// mm, derived.
    pub column_width: f64,
    /// pt, equal to the body leading.
    pub baseline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BodyStyle {
    pub size: f64,
    pub leading: f64,
    pub alignment: Alignment,
    pub hyphenation: bool,
    pub paragraph_mark: ParagraphMark,
    /// First-line indent in mm (negative: hanging).
    pub indent: f64,
    /// pt
    pub space_before: f64,
    /// pt
    pub space_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TitleStyle {
    pub level: u8,
    pub size: f64,
    pub leading: f64,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CaptionPlacement {
    BelowLeft,
    AsideRotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CaptionStyle {
    pub placement: CaptionPlacement,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpacingBounds {
    pub word_spacing: Elastic,
    pub letter_spacing: Elastic,
}

/// Every attribute of one design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSettings {
    pub seed: u64,
    pub book_type: BookType,
    pub page: PageSize,
    pub margins: Margins,
    pub grid: Grid,
    pub pairing: String,
    pub body: BodyStyle,
    pub titles: [TitleStyle; 3],
    pub caption: CaptionStyle,
    pub header_layout: String,
    pub spacing: SpacingBounds,
    pub toc: bool,
    pub colophon: bool,
    pub features: FeatureSet,
    pub cover_color: Cmyk,
    pub language: String,
}

impl DesignSettings {
    pub fn block_width(&self) -> f64 {
        self.page.w - self.margins.inside - self.margins.outside
    }

    pub fn block_height(&self) -> f64 {
        self.page.h - self.margins.top - self.margins.bottom
    }

    pub fn column_width_pt(&self) -> f64 {
        mm_to_pt(self.grid.column_width)
    }

    pub fn leading_ratio(&self) -> f64 {
        self.body.leading / self.body.size
    }

    pub fn title(&self, level: u8) -> &TitleStyle {
        &self.titles[usize::from(level.clamp(1, 3)) - 1]
    }

    pub fn page_label(&self) -> String {
        format!("{} × {} mm", fmt_num(self.page.w), fmt_num(self.page.h))
    }

    /// Settings-file representation with every field pinned.
    pub fn to_constraints(&self) -> Constraints {
        Constraints {
            seed: Some(self.seed),
            book_type: Some(self.book_type),
            page: Some(self.page),
            margins: MarginPins {
                top: Some(self.margins.top),
                inside: Some(self.margins.inside),
                bottom: Some(self.margins.bottom),
                outside: Some(self.margins.outside),
            },
            grid: GridPins {
                columns: Some(self.grid.columns),
                gutter: self.grid.gutter,
                column_width: Some(self.grid.column_width),
                baseline: Some(self.grid.baseline),
            },
            pairing: Some(self.pairing.clone()),
            body: BodyPins {
                size: Some(self.body.size),
                leading: Some(self.body.leading),
                alignment: Some(self.body.alignment),
                hyphenation: Some(self.body.hyphenation),
                paragraph_mark: Some(self.body.paragraph_mark),
                indent: Some(self.body.indent),
                space_before: Some(self.body.space_before),
                space_after: Some(self.body.space_after),
            },
            titles: Some(self.titles.to_vec()),
            caption: CaptionPins {
                placement: Some(self.caption.placement),
                size: Some(self.caption.size),
            },
            header_layout: Some(self.header_layout.clone()),
            spacing: Some(self.spacing),
            toc: Some(self.toc),
            colophon: Some(self.colophon),
            features: Some(self.features.enabled()),
            feature_color: self.features.color,
            gradient_margins: self.features.margin_gradient,
            cover_color: Some(self.cover_color),
            language: Some(self.language.clone()),
            surprise: None,
            style_mode: None,
        }
    }

    /// Rebuilds a design from a settings file written by [`export_settings`].
    /// Every design field must be present.
    pub fn from_constraints(c: &Constraints) -> Result<DesignSettings> {
        fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T> {
            v.clone().ok_or_else(|| Error::constraint(field, "missing"))
        }
        let titles = need(&c.titles, "titles")?;
        let titles: [TitleStyle; 3] = titles
            .try_into()
            .map_err(|_| Error::constraint("titles", "need exactly three levels"))?;
        let enabled = c.features.clone().unwrap_or_default();
        let page = need(&c.page, "page")?;
        let margins = Margins {
            top: need(&c.margins.top, "margins.top")?,
            inside: need(&c.margins.inside, "margins.inside")?,
            bottom: need(&c.margins.bottom, "margins.bottom")?,
            outside: need(&c.margins.outside, "margins.outside")?,
        };
        let columns = need(&c.grid.columns, "grid.columns")?;
        let mut grid = super::grid_with(page.w - margins.inside - margins.outside, columns, c.grid.gutter.unwrap_or(0.0));
        grid.baseline = need(&c.grid.baseline, "grid.baseline")?;
        Ok(DesignSettings {
            seed: need(&c.seed, "seed")?,
            book_type: need(&c.book_type, "bookType")?,
            page,
            margins,
            grid,
            pairing: need(&c.pairing, "pairing")?,
            body: BodyStyle {
                size: need(&c.body.size, "body.size")?,
                leading: need(&c.body.leading, "body.leading")?,
                alignment: need(&c.body.alignment, "body.alignment")?,
                hyphenation: need(&c.body.hyphenation, "body.hyphenation")?,
                paragraph_mark: need(&c.body.paragraph_mark, "body.paragraphMark")?,
                indent: need(&c.body.indent, "body.indent")?,
                space_before: need(&c.body.space_before, "body.spaceBefore")?,
                space_after: need(&c.body.space_after, "body.spaceAfter")?,
            },
            titles,
            caption: CaptionStyle {
                placement: need(&c.caption.placement, "caption.placement")?,
                size: need(&c.caption.size, "caption.size")?,
            },
            header_layout: need(&c.header_layout, "headerLayout")?,
            spacing: need(&c.spacing, "spacing")?,
            toc: need(&c.toc, "toc")?,
            colophon: need(&c.colophon, "colophon")?,
            features: FeatureSet {
                half_page_background: enabled.contains(&Feature::HalfPageBackground),
                margin_gradient: if enabled.contains(&Feature::MarginGradient) {
                    Some(need(&c.gradient_margins, "gradientMargins")?)
                } else {
                    None
                },
                random_indent: enabled.contains(&Feature::RandomIndent),
                max_cover_title: enabled.contains(&Feature::MaxCoverTitle),
                color: c.feature_color,
            },
            cover_color: need(&c.cover_color, "coverColor")?,
            language: need(&c.language, "language")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StyleMode {
    /// Keep pinned styles; draw the rest.
    #[default]
    Keep,
    /// Use the pairing chosen by the user.
    Map,
    /// Draw a pairing even when one is given.
    Generate,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginPins {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inside: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bottom: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outside: Option<f64>,
}

/// `columnWidth` and `baseline` are derived; they are written for
/// reference and ignored when read back.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridPins {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gutter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
}

/// `indent`, `spaceBefore` and `spaceAfter` follow from the paragraph
/// mark and body size; they are written for reference only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BodyPins {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leading: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Alignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyphenation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paragraph_mark: Option<ParagraphMark>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_after: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptionPins {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<CaptionPlacement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<f64>,
}

/// A design with every field optional: unset fields are drawn by the planner.
/// Serialized, this is also the settings-file format.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Constraints {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub book_type: Option<BookType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub page: Option<PageSize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub margins: MarginPins,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: GridPins,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub body: BodyPins,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub titles: Option<Vec<TitleStyle>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub caption: CaptionPins,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub header_layout: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<SpacingBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toc: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colophon: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Feature>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_color: Option<Cmyk>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_margins: Option<GradientMargins>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_color: Option<Cmyk>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surprise: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style_mode: Option<StyleMode>,
}

/// A constraint that breaks a rule, named by its settings-file path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl From<FieldError> for Error {
    fn from(e: FieldError) -> Error {
        Error::Constraint {
            field: e.field,
            message: e.message,
        }
    }
}

fn range_error(field: &str, v: f64, span: Span<f64>, unit: &str) -> FieldError {
    FieldError {
        field: field.into(),
        message: format!(
            "{} outside [{}, {}]{unit}",
            fmt_num(v),
            fmt_num(span.min),
            fmt_num(span.max)
        ),
    }
}

impl Constraints {
    pub fn is_empty(&self) -> bool {
        *self == Constraints::default()
    }

    pub fn explicit_features(&self) -> ExplicitFeatures {
        ExplicitFeatures {
            features: self.features.clone().unwrap_or_default(),
            color: self.feature_color,
            gradient: self.gradient_margins,
        }
    }

    /// Whether the feature set is fully decided by the constraints.
    pub fn features_pinned(&self) -> bool {
        self.features.is_some() && self.surprise != Some(true)
    }

    /// Checks each pinned field against the rule base.
    pub fn field_errors(&self, rules: &RuleSet) -> Vec<FieldError> {
        let mut errs = Vec::new();
        let mut err = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.into(),
                message,
            })
        };
        if let Some(p) = self.page {
            if rules.size_option(p.w, p.h).is_none() {
                err(
                    "page",
                    format!("{} × {} mm is not a size option", fmt_num(p.w), fmt_num(p.h)),
                );
            }
        }
        let tb = rules.margins.top_bottom;
        let io = rules.margins.inside_outside;
        for (name, v, span) in [
            ("margins.top", self.margins.top, tb),
            ("margins.bottom", self.margins.bottom, tb),
            ("margins.inside", self.margins.inside, io),
            ("margins.outside", self.margins.outside, io),
        ] {
            if let Some(v) = v {
                if !span.contains_approx(v) {
                    let e = range_error(name, v, span, " mm");
                    err(&e.field, e.message);
                }
            }
        }
        if self.grid.columns == Some(0) {
            err("grid.columns", "must be at least 1".into());
        }
        if let Some(g) = self.grid.gutter {
            if !rules.columns.gutter.contains_approx(g) {
                let e = range_error("grid.gutter", g, rules.columns.gutter, " mm");
                err(&e.field, e.message);
            }
        }
        if let Some(p) = &self.pairing {
            if rules.pairing(p).is_none() {
                err("pairing", format!("unknown pairing `{p}`"));
            }
        }
        if self.style_mode == Some(StyleMode::Map) && self.pairing.is_none() {
            err("pairing", "style mode `map` needs a pairing".into());
        }
        let body = rules.font_size.body;
        if let Some(s) = self.body.size {
            if !body.contains_approx(s) {
                let e = range_error("body.size", s, body, " pt");
                err(&e.field, e.message);
            }
        }
        if let (Some(s), Some(l)) = (self.body.size, self.body.leading) {
            if s > 0.0 && !rules.leading.span().contains_approx(l / s) {
                err(
                    "body.leading",
                    format!(
                        "ratio {} outside [{}, {}]",
                        fmt_num(l / s),
                        fmt_num(rules.leading.min),
                        fmt_num(rules.leading.max)
                    ),
                );
            }
        }
        if let Some(l) = self.body.leading {
            if l <= 0.0 {
                err("body.leading", "must be positive".into());
            }
        }
        if let Some(a) = self.body.alignment {
            let allowed = rules
                .alignments
                .values()
                .any(|r| r.body.iter().any(|w| w.value == a));
            if !allowed {
                err("body.alignment", format!("{} is not a body alignment", a.as_str()));
            }
            if a == Alignment::Justified && self.body.hyphenation == Some(false) {
                err("body.hyphenation", "required when justified".into());
            }
        }
        if let Some(m) = self.body.paragraph_mark {
            if !rules.paragraph_marks.contains(&m) {
                err("body.paragraphMark", format!("{} is not offered", m.as_str()));
            }
        }
        if let Some(titles) = &self.titles {
            if titles.len() != 3 {
                err("titles", "expected three levels".into());
            }
            for (i, t) in titles.iter().enumerate() {
                if usize::from(t.level) != i + 1 {
                    err(&format!("titles[{i}].level"), "levels must be 1, 2, 3 in order".into());
                }
                if !(t.size > 0.0 && t.leading > 0.0) {
                    err(&format!("titles[{i}].size"), "must be positive".into());
                }
                if !matches!(t.alignment, Alignment::Left | Alignment::Centre) {
                    err(&format!("titles[{i}].alignment"), "only left or centre".into());
                }
            }
        }
        if let Some(s) = self.caption.size {
            if !body.contains_approx(s) {
                let e = range_error("caption.size", s, body, " pt");
                err(&e.field, e.message);
            }
        }
        if let Some(h) = &self.header_layout {
            if rules.header_layout(h).is_none() {
                err("headerLayout", format!("unknown header layout `{h}`"));
            }
        }
        if let Some(sp) = self.spacing {
            for (name, pinned, rule) in [
                ("spacing.wordSpacing", sp.word_spacing, rules.word_spacing),
                ("spacing.letterSpacing", sp.letter_spacing, rules.letter_spacing),
            ] {
                let ok = pinned.min <= pinned.ideal
                    && pinned.ideal <= pinned.max
                    && rule.span().contains_approx(pinned.min)
                    && rule.span().contains_approx(pinned.max);
                if !ok {
                    err(name, "must be an ordered sub-range of the rule range".into());
                }
            }
        }
        if let Some(c) = self.feature_color {
            if !rules.cover_colors.iter().any(|p| p.cmyk == c) {
                err("featureColor", format!("{c} is not a palette colour"));
            }
        }
        if let Some(c) = self.cover_color {
            if !c.is_valid() {
                err("coverColor", "components must lie in [0, 100]".into());
            }
        }
        if let Some(l) = &self.language {
            if l.trim().is_empty() {
                err("language", "must not be empty".into());
            }
        }
        errs
    }

    pub fn validate(&self, rules: &RuleSet) -> Result<()> {
        match self.field_errors(rules).into_iter().next() {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }

    /// Pins from `other` win over pins in `self`.
    pub fn overlay(&self, other: &Constraints) -> Constraints {
        fn pick<T: Clone>(a: &Option<T>, b: &Option<T>) -> Option<T> {
            b.clone().or_else(|| a.clone())
        }
        Constraints {
            seed: pick(&self.seed, &other.seed),
            book_type: pick(&self.book_type, &other.book_type),
            page: pick(&self.page, &other.page),
            margins: MarginPins {
                top: pick(&self.margins.top, &other.margins.top),
                inside: pick(&self.margins.inside, &other.margins.inside),
                bottom: pick(&self.margins.bottom, &other.margins.bottom),
                outside: pick(&self.margins.outside, &other.margins.outside),
            },
            grid: GridPins {
                columns: pick(&self.grid.columns, &other.grid.columns),
                gutter: pick(&self.grid.gutter, &other.grid.gutter),
                column_width: pick(&self.grid.column_width, &other.grid.column_width),
                baseline: pick(&self.grid.baseline, &other.grid.baseline),
            },
            pairing: pick(&self.pairing, &other.pairing),
            body: BodyPins {
                size: pick(&self.body.size, &other.body.size),
                leading: pick(&self.body.leading, &other.body.leading),
                alignment: pick(&self.body.alignment, &other.body.alignment),
                hyphenation: pick(&self.body.hyphenation, &other.body.hyphenation),
                paragraph_mark: pick(&self.body.paragraph_mark, &other.body.paragraph_mark),
                indent: pick(&self.body.indent, &other.body.indent),
                space_before: pick(&self.body.space_before, &other.body.space_before),
                space_after: pick(&self.body.space_after, &other.body.space_after),
            },
            titles: pick(&self.titles, &other.titles),
            caption: CaptionPins {
                placement: pick(&self.caption.placement, &other.caption.placement),
                size: pick(&self.caption.size, &other.caption.size),
            },
            header_layout: pick(&self.header_layout, &other.header_layout),
            spacing: pick(&self.spacing, &other.spacing),
            toc: pick(&self.toc, &other.toc),
            colophon: pick(&self.colophon, &other.colophon),
            features: pick(&self.features, &other.features),
            feature_color: pick(&self.feature_color, &other.feature_color),
            gradient_margins: pick(&self.gradient_margins, &other.gradient_margins),
            cover_color: pick(&self.cover_color, &other.cover_color),
            language: pick(&self.language, &other.language),
            surprise: pick(&self.surprise, &other.surprise),
            style_mode: pick(&self.style_mode, &other.style_mode),
        }
    }
}

/// Serializes a design as settings-file text (stable key order).
pub fn export_settings(settings: &DesignSettings) -> String {
    let mut text = serde_json::to_string_pretty(&settings.to_constraints())
        .expect("settings serialize");
    text.push('\n');
    text
}

/// Reads settings-file text into constraints that pin every design field.
///
/// The book type and language describe the content rather than the design,
/// so they are not pinned: a series keeps its look across different texts.
pub fn import_settings(text: &str, rules: &RuleSet) -> Result<Constraints> {
    let mut c = parse_constraints(text)?;
    c.validate(rules)?;
    c.book_type = None;
    c.language = None;
    if c.features.is_some() {
        c.surprise = Some(false);
    }
    Ok(c)
}

/// Parses constraints JSON without dropping content-derived fields.
pub fn parse_constraints(text: &str) -> Result<Constraints> {
    if text.trim().is_empty() {
        return Err(Error::NoFields);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        what: "settings file",
        message: e.to_string(),
    })?;
    if value.as_object().is_some_and(|o| o.is_empty()) {
        return Err(Error::NoFields);
    }
    serde_json::from_value(value).map_err(|e| Error::Parse {
        what: "settings file",
        message: e.to_string(),
    })
}
