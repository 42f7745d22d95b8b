//! Resolves every open typographic attribute into a [`DesignSettings`].

mod fit;
mod settings;

pub use fit::{
    confirm_fit, estimate_chars_per_line, fit_body_size, fit_body_size_with, trial, Locks, Trial,
};
pub use settings::{
    export_settings, import_settings, parse_constraints, BodyPins, BodyStyle, CaptionPins,
    CaptionPlacement, CaptionStyle, Constraints, DesignSettings, FieldError, Grid, GridPins,
    MarginPins, Margins, PageSize, SpacingBounds, StyleMode, TitleStyle,
};

use crate::error::{Error, Result};
use crate::features::select_features;
use crate::geom::{mm_to_pt, pt_to_mm, round1, round2};
use crate::ingest::ContentStats;
use crate::rng::SeededStream;
use crate::rules::{eligible_pairings, Alignment, BookType, ParagraphMark, RuleSet};

/// Splits the text block into columns.
///
/// Always consumes two draws (target column width, gutter).
pub fn compute_grid(
    page: PageSize,
    margins: Margins,
    rules: &RuleSet,
    stream: &mut SeededStream,
) -> Result<Grid> {
    let block = page.w - margins.inside - margins.outside;
    if block <= 0.0 {
        return Err(Error::NonPositiveBlock(block));
    }
    let target = stream.uniform(rules.columns.width.min, rules.columns.width.max);
    let gutter = round1(stream.uniform(rules.columns.gutter.min, rules.columns.gutter.max));
    let columns = ((block / target).floor() as u32).max(1);
    Ok(grid_with(block, columns, gutter))
}

/// Grid of `columns` equal columns over a block `block` mm wide.
pub fn grid_with(block: f64, columns: u32, gutter: f64) -> Grid {
    let gutter = (columns > 1).then_some(gutter);
    let g = gutter.unwrap_or(0.0);
    Grid {
        columns,
        gutter,
        column_width: (block - f64::from(columns - 1) * g) / f64::from(columns),
        baseline: 0.0,
    }
}

/// Plans a design. Fields pinned in `constraints` pass through; the rest
/// are drawn from the rule base in the frozen draw order.
pub fn plan(
    stats: &ContentStats,
    rules: &RuleSet,
    constraints: &Constraints,
    seed: u64,
) -> Result<DesignSettings> {
    constraints.validate(rules)?;
    let c = constraints;
    let book_type = c.book_type.unwrap_or(stats.book_type);
    let mut stream = SeededStream::new(seed);

    // size
    let weights: Vec<f64> = rules.size_options.iter().map(|s| s.weight(book_type)).collect();
    let drawn = stream
        .weighted_index(&weights)
        .ok_or_else(|| Error::Rules(format!("sizes: no positive weight for {book_type}")))?;
    let page = c.page.unwrap_or(PageSize {
        w: rules.size_options[drawn].width,
        h: rules.size_options[drawn].height,
    });

    // margins
    let tb = rules.margins.top_bottom;
    let io = rules.margins.inside_outside;
    let mut draw = |span: crate::geom::Span<f64>| round1(stream.uniform(span.min, span.max));
    let drawn = Margins {
        top: draw(tb),
        inside: draw(io),
        bottom: draw(tb),
        outside: draw(io),
    };
    let margins = Margins {
        top: c.margins.top.unwrap_or(drawn.top),
        inside: c.margins.inside.unwrap_or(drawn.inside),
        bottom: c.margins.bottom.unwrap_or(drawn.bottom),
        outside: c.margins.outside.unwrap_or(drawn.outside),
    };
    if page.h - margins.top - margins.bottom <= 0.0 {
        return Err(Error::NonPositiveBlock(page.h - margins.top - margins.bottom));
    }

    // grid
    let mut grid = compute_grid(page, margins, rules, &mut stream)?;
    let block = page.w - margins.inside - margins.outside;
    if c.grid.columns.is_some() || c.grid.gutter.is_some() {
        let columns = c.grid.columns.unwrap_or(grid.columns);
        let gutter = c
            .grid
            .gutter
            .or(grid.gutter)
            .unwrap_or_else(|| round1(rules.columns.gutter.mid()));
        grid = grid_with(block, columns, gutter);
    }
    if grid.column_width <= 0.0 {
        return Err(Error::constraint("grid.columns", "columns leave no width"));
    }

    // pairing
    let eligible = eligible_pairings(rules, book_type)?;
    let drawn = stream.pick(&eligible).map(|p| p.id.clone());
    let pairing_id = match (c.style_mode.unwrap_or_default(), &c.pairing) {
        (crate::planner::StyleMode::Generate, _) | (_, None) => {
            drawn.ok_or(Error::NoPairing(book_type))?
        }
        (_, Some(p)) => p.clone(),
    };
    let pairing = rules
        .pairing(&pairing_id)
        .ok_or_else(|| Error::constraint("pairing", format!("unknown pairing `{pairing_id}`")))?;

    // alignment
    let arule = rules.alignment_rule(book_type);
    let bw: Vec<f64> = arule.body.iter().map(|w| w.weight).collect();
    let body_align = stream
        .weighted_index(&bw)
        .map(|i| arule.body[i].value)
        .unwrap_or(Alignment::Left);
    let title_align = *stream.pick(&arule.title).unwrap_or(&Alignment::Left);
    let aside = stream.chance(0.5);
    let alignment = c.body.alignment.unwrap_or(body_align);
    if book_type == BookType::LongReading
        && !matches!(alignment, Alignment::Justified | Alignment::Left)
    {
        return Err(Error::constraint(
            "body.alignment",
            "long reading allows only justified or left",
        ));
    }
    let justified = alignment == Alignment::Justified;
    let hyphenation = c.body.hyphenation.unwrap_or(justified);
    let aside_ok = margins.outside >= rules.margins.caption_aside_min;
    let placement = match c.caption.placement {
        Some(CaptionPlacement::AsideRotated) if !aside_ok => {
            return Err(Error::constraint(
                "caption.placement",
                format!(
                    "aside captions need an outer margin of at least {} mm",
                    rules.margins.caption_aside_min
                ),
            ))
        }
        Some(p) => p,
        None if aside && aside_ok => CaptionPlacement::AsideRotated,
        None => CaptionPlacement::BelowLeft,
    };

    // paragraph mark
    let mark = *stream
        .pick(&rules.paragraph_marks)
        .unwrap_or(&ParagraphMark::PositiveIndent);
    let mark = c.body.paragraph_mark.unwrap_or(mark);

    // header layout
    let header = stream.pick(&rules.header_layouts).map(|h| h.id.clone());
    let header_layout = c
        .header_layout
        .clone()
        .or(header)
        .ok_or_else(|| Error::Rules("headerLayouts: empty".into()))?;

    // features
    let mut features = select_features(
        &c.explicit_features(),
        c.surprise.unwrap_or(false),
        &mut stream,
        rules,
    );
    if c.features_pinned() {
        // a pinned list is exact, even with a stale colour or gradient pin
        let pinned = c.features.clone().unwrap_or_default();
        features.half_page_background &= pinned.contains(&crate::features::Feature::HalfPageBackground);
        features.random_indent &= pinned.contains(&crate::features::Feature::RandomIndent);
        features.max_cover_title &= pinned.contains(&crate::features::Feature::MaxCoverTitle);
        if !pinned.contains(&crate::features::Feature::MarginGradient) {
            features.margin_gradient = None;
        }
    }

    // cover colour
    let cover = stream.pick(&rules.cover_colors).map(|p| p.cmyk);
    let cover_color = c
        .cover_color
        .or(cover)
        .ok_or_else(|| Error::Rules("coverColors: empty".into()))?;

    // body size aimed at the ideal line length with the nominal advance
    let colw = mm_to_pt(grid.column_width);
    let ideal = colw / (rules.line_length.ideal * rules.font_size.nominal_advance);
    let size = c
        .body
        .size
        .unwrap_or_else(|| rules.font_size.body.clamp((ideal * 2.0).round() / 2.0));

    let mut s = DesignSettings {
        seed,
        book_type,
        page,
        margins,
        grid,
        pairing: pairing.id.clone(),
        body: BodyStyle {
            size,
            leading: 0.0,
            alignment,
            hyphenation,
            paragraph_mark: mark,
            indent: 0.0,
            space_before: 0.0,
            space_after: 0.0,
        },
        titles: [TitleStyle {
            level: 1,
            size: 0.0,
            leading: 0.0,
            alignment: title_align,
        }; 3],
        caption: CaptionStyle {
            placement,
            size: 0.0,
        },
        header_layout,
        spacing: c.spacing.unwrap_or(SpacingBounds {
            word_spacing: rules.word_spacing,
            letter_spacing: rules.letter_spacing,
        }),
        toc: c.toc.unwrap_or(false),
        colophon: c.colophon.unwrap_or(false),
        features,
        cover_color,
        language: c.language.clone().unwrap_or_else(|| stats.language.clone()),
    };
    derive_styles(&mut s, rules, c);
    Ok(s)
}

/// Recomputes everything that follows from body size, pairing and mark.
pub(crate) fn derive_styles(s: &mut DesignSettings, rules: &RuleSet, c: &Constraints) {
    let ratio = rules
        .pairing(&s.pairing)
        .map(|p| p.leading)
        .unwrap_or(rules.leading.base);
    let size = s.body.size;
    s.body.leading = c
        .body
        .leading
        .unwrap_or_else(|| round2(size * rules.leading.span().clamp(ratio)));
    s.grid.baseline = s.body.leading;
    s.body.indent = match s.body.paragraph_mark {
        ParagraphMark::PositiveIndent => round2(pt_to_mm(size)),
        ParagraphMark::NegativeIndent => -round2(pt_to_mm(size)),
        _ => 0.0,
    };
    s.body.space_before = if s.body.paragraph_mark == ParagraphMark::SpaceBefore {
        s.body.leading
    } else {
        0.0
    };
    s.body.space_after = 0.0;
    match &c.titles {
        Some(t) if t.len() == 3 => {
            s.titles = [t[0], t[1], t[2]];
        }
        _ => {
            let align = s.titles[0].alignment;
            let scale = rules.font_size.title_scale;
            for (i, t) in s.titles.iter_mut().enumerate() {
                let tsize = round1(size * scale[i]);
                *t = TitleStyle {
                    level: i as u8 + 1,
                    size: tsize,
                    leading: if i < 2 {
                        round2(tsize * rules.font_size.title_leading)
                    } else {
                        s.body.leading
                    },
                    alignment: align,
                };
            }
        }
    }
    s.caption.size = c
        .caption
        .size
        .unwrap_or_else(|| (size - 1.0).max(rules.font_size.body.min));
}

#[cfg(test)]
mod tests;
