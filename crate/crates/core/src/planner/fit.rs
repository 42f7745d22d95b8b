//! Body-size fitting: characters per line and page capacity.

use crate::error::{Error, Result};
use crate::geom::{fmt_num, mm_to_pt, pt_to_mm, round1, round2, Span};
use crate::ingest::{Block, Manuscript};
use crate::planner::{derive_styles, grid_with, Constraints, DesignSettings};
use crate::rules::{Alignment, RuleSet};
use crate::typeset::linebreak::break_paragraph;
use crate::typeset::metrics::FontMetrics;
use crate::typeset::style::{body_break_style, body_runs, count_words, median_of_set};

/// Words of manuscript broken during the trial typesetting.
const TRIAL_WORDS: usize = 20_000;
/// Allowance, in standard deviations of a page's word count, for pages
/// denser than the sample.
const CAPACITY_SIGMAS: f64 = 3.5;

/// Estimated characters per line: column width over the mean advance.
pub fn estimate_chars_per_line(column_width_pt: f64, advance_em: f64, size: f64) -> f64 {
    column_width_pt / (advance_em * size)
}

/// Which fields the fitting loop may not touch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Locks {
    pub size: bool,
    pub columns: bool,
    pub top: bool,
    pub bottom: bool,
    pub inside: bool,
    pub outside: bool,
}

impl Locks {
    pub fn from_constraints(c: &Constraints) -> Locks {
        Locks {
            size: c.body.size.is_some(),
            columns: c.grid.columns.is_some(),
            top: c.margins.top.is_some(),
            bottom: c.margins.bottom.is_some(),
            inside: c.margins.inside.is_some(),
            outside: c.margins.outside.is_some(),
        }
    }
}

/// Fits the body size to the line-length rules using the metrics' mean
/// advance for the design's language; nothing is pinned.
pub fn fit_body_size(
    settings: &DesignSettings,
    metrics: &FontMetrics,
    rules: &RuleSet,
) -> Result<DesignSettings> {
    fit_body_size_with(
        settings,
        metrics.mean_advance(&settings.language),
        rules,
        &Constraints::default(),
    )
}

/// As [`fit_body_size`], with an explicit mean advance (em) and leaving
/// fields pinned in `constraints` alone.
pub fn fit_body_size_with(
    settings: &DesignSettings,
    advance_em: f64,
    rules: &RuleSet,
    constraints: &Constraints,
) -> Result<DesignSettings> {
    let justified = settings.body.alignment == Alignment::Justified;
    fit_inner(settings, advance_em, rules, constraints, rules.line_length.bounds(justified))
}

fn fit_inner(
    settings: &DesignSettings,
    advance_em: f64,
    rules: &RuleSet,
    c: &Constraints,
    bounds: Span<f64>,
) -> Result<DesignSettings> {
    let locks = Locks::from_constraints(c);
    let mut s = settings.clone();
    let sizes = rules.font_size.body;
    let io = rules.margins.inside_outside;
    let est = |s: &DesignSettings| estimate_chars_per_line(s.column_width_pt(), advance_em, s.body.size);
    let mut col_dir = 0i32;
    let mut margin_dir = 0.0f64;
    for _ in 0..200 {
        if !locks.size {
            while est(&s) < bounds.min && s.body.size - 0.5 >= sizes.min - 1e-9 {
                s.body.size -= 0.5;
            }
            while est(&s) > bounds.max && s.body.size + 0.5 <= sizes.max + 1e-9 {
                s.body.size += 0.5;
            }
        }
        let e = est(&s);
        if bounds.contains(e) {
            derive_styles(&mut s, rules, c);
            return Ok(s);
        }
        let wider = e < bounds.min;
        let dir = if wider { -1 } else { 1 };
        let block = s.block_width();
        if !locks.columns && col_dir != -dir && (!wider || s.grid.columns > 1) {
            let columns = (s.grid.columns as i32 + dir) as u32;
            let gutter = c
                .grid
                .gutter
                .or(s.grid.gutter)
                .unwrap_or_else(|| round1(rules.columns.gutter.mid()));
            let g = grid_with(block, columns, gutter);
            if g.column_width > 0.0 {
                s.grid = g;
                col_dir = dir;
                continue;
            }
        }
        let step = if wider { -1.0 } else { 1.0 };
        if margin_dir == -step {
            break;
        }
        let mut changed = false;
        for (value, locked) in [
            (&mut s.margins.inside, locks.inside),
            (&mut s.margins.outside, locks.outside),
        ] {
            let next = round1(*value + step);
            if !locked && io.contains_approx(next) {
                *value = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        margin_dir = step;
        let gutter = s.grid.gutter.unwrap_or_else(|| round1(rules.columns.gutter.mid()));
        s.grid = grid_with(s.block_width(), s.grid.columns, gutter);
    }
    Err(Error::Infeasible(format!(
        "no body size in [{}, {}] pt and grid within the rules gives {}–{} characters per line (estimate {:.1} at {} pt over {:.1} mm)",
        fmt_num(sizes.min),
        fmt_num(sizes.max),
        fmt_num(bounds.min),
        fmt_num(bounds.max),
        est(&s),
        fmt_num(s.body.size),
        s.grid.column_width
    )))
}

/// Outcome of a trial typesetting.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub median_chars: f64,
    /// Mean words on full lines.
    pub words_per_line: f64,
    /// Standard deviation of words on full lines.
    pub words_sd: f64,
    pub lines_per_column: usize,
    /// Words on a full page, with allowance for page-to-page variation.
    pub words_per_page: f64,
}

/// Breaks the start of the manuscript with the design's body style.
pub fn trial(s: &DesignSettings, ms: &Manuscript, metrics: &FontMetrics) -> Option<Trial> {
    let style = body_break_style(s, None);
    let measure = s.column_width_pt();
    let mut lines = Vec::new();
    let mut words = 0;
    for b in &ms.blocks {
        if let Block::Paragraph(p) = b {
            let set = break_paragraph(&body_runs(p, s), &style, measure, metrics);
            words += set.iter().map(|l| count_words(&l.text())).sum::<usize>();
            lines.extend(set);
            if words >= TRIAL_WORDS {
                break;
            }
        }
    }
    let median_chars = median_of_set(&lines)?;
    let per_line: Vec<f64> = lines
        .iter()
        .filter(|l| !l.last)
        .map(|l| count_words(&l.text()) as f64)
        .collect();
    let n = per_line.len() as f64;
    let mean = per_line.iter().sum::<f64>() / n;
    let sd = (per_line.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n).sqrt();
    let lines_per_column = (mm_to_pt(s.block_height()) / s.body.leading + 1e-9).floor() as usize;
    Some(Trial {
        median_chars,
        words_per_line: mean,
        words_sd: sd,
        lines_per_column,
        words_per_page: page_words(mean, sd, lines_per_column * s.grid.columns as usize),
    })
}

fn page_words(mean: f64, sd: f64, lines: usize) -> f64 {
    let l = lines as f64;
    l * mean + CAPACITY_SIGMAS * sd * l.sqrt()
}

/// Confirms a fitted design by typesetting a sample: corrects the
/// characters-per-line estimate from the realized median and shortens the
/// text block (then raises the body size, then adds a column) until the
/// page capacity rule holds.
pub fn confirm_fit(
    settings: &DesignSettings,
    ms: &Manuscript,
    metrics: &FontMetrics,
    rules: &RuleSet,
    c: &Constraints,
) -> Result<DesignSettings> {
    let justified = settings.body.alignment == Alignment::Justified;
    let bounds = rules.line_length.bounds(justified);
    let safe = if bounds.width() > 4.0 {
        Span::new(bounds.min + 1.0, bounds.max - 1.0)
    } else {
        bounds
    };
    let mut c = c.clone();
    let mut locks = Locks::from_constraints(&c);
    let refit = |s: &DesignSettings, advance: f64, c: &Constraints| {
        fit_inner(s, advance, rules, c, safe).or_else(|_| fit_inner(s, advance, rules, c, bounds))
    };
    let mut advance = metrics.mean_advance(&settings.language);
    let mut ratio: Option<f64> = None;
    let pinned = locks.size && locks.columns && locks.inside && locks.outside;
    let mut s = match refit(settings, advance, &c) {
        Ok(s) => s,
        // only the trial below can judge a fully pinned measure
        Err(_) if pinned => {
            let mut s = settings.clone();
            restyle(&mut s, rules, &c, None);
            s
        }
        Err(e) => return Err(e),
    };
    let tb = rules.margins.top_bottom;
    let io = rules.margins.inside_outside;
    let median_error = |m: f64| {
        Error::Infeasible(format!(
            "median line length {:.1} outside {}–{}",
            m,
            fmt_num(bounds.min),
            fmt_num(bounds.max)
        ))
    };
    for _ in 0..60 {
        let Some(t) = trial(&s, ms, metrics) else {
            return Ok(s);
        };
        let fixed = locks.size && locks.columns && locks.inside && locks.outside;
        if !safe.contains(t.median_chars) && !(fixed && bounds.contains(t.median_chars)) {
            let est = estimate_chars_per_line(s.column_width_pt(), advance, s.body.size);
            let corrected = advance * est / t.median_chars;
            if fixed || (corrected - advance).abs() < 1e-6 {
                if bounds.contains(t.median_chars) {
                    // close enough; fall through to the capacity check
                } else {
                    return Err(median_error(t.median_chars));
                }
            } else {
                advance = corrected;
                s = refit(&s, advance, &c)?;
                restyle(&mut s, rules, &c, ratio);
                continue;
            }
        }
        let cap = f64::from(rules.page_capacity.for_columns(s.grid.columns));
        if t.words_per_page <= cap {
            return Ok(s);
        }
        // predictions below are calibrated on this trial
        advance *= estimate_chars_per_line(s.column_width_pt(), advance, s.body.size) / t.median_chars;
        let est = |s: &DesignSettings| estimate_chars_per_line(s.column_width_pt(), advance, s.body.size);
        // lines that fit the capacity at this line density
        let cols = s.grid.columns as usize;
        let mut lines = t.lines_per_column;
        while lines > 1 && page_words(t.words_per_line, t.words_sd, lines * cols) > cap {
            lines -= 1;
        }
        let need = s.block_height() - pt_to_mm(lines as f64 * s.body.leading) + 0.05;
        let room_top = if locks.top { 0.0 } else { tb.max - s.margins.top };
        let room_bottom = if locks.bottom { 0.0 } else { tb.max - s.margins.bottom };
        if need > 0.0 && room_top + room_bottom > 0.05 {
            let share = (need / 2.0).min(room_top.max(0.0));
            let top = round1_up(s.margins.top + share).min(tb.max);
            let rest = need - (top - s.margins.top);
            let bottom = round1_up(s.margins.bottom + rest.max(0.0)).min(tb.max);
            let top = if locks.top { s.margins.top } else { top };
            let bottom = if locks.bottom { s.margins.bottom } else { bottom };
            if top > s.margins.top || bottom > s.margins.bottom {
                s.margins.top = top;
                s.margins.bottom = bottom;
                continue;
            }
        }
        let current = s.leading_ratio();
        if c.body.leading.is_none() && current + 0.01 < rules.leading.max {
            let r = (current + 0.05).min(rules.leading.max - 0.005);
            ratio = Some(r);
            restyle(&mut s, rules, &c, ratio);
            continue;
        }
        if !locks.size && s.body.size + 0.5 <= rules.font_size.body.max + 1e-9 {
            let mut next = s.clone();
            next.body.size += 0.5;
            if est(&next) >= safe.min {
                restyle(&mut next, rules, &c, ratio);
                s = next;
                continue;
            }
        }
        // a shorter measure holds fewer words
        let mut next = s.clone();
        for (value, locked) in [
            (&mut next.margins.inside, locks.inside),
            (&mut next.margins.outside, locks.outside),
        ] {
            let v = round1(*value + 1.0);
            if !locked && io.contains_approx(v) {
                *value = v;
            }
        }
        if next.margins != s.margins {
            next.grid = grid_with(next.block_width(), next.grid.columns, next.grid.gutter.unwrap_or(0.0));
            if est(&next) >= safe.min {
                restyle(&mut next, rules, &c, ratio);
                s = next;
                continue;
            }
        }
        if !locks.columns && s.grid.columns == 1 {
            let gutter = c
                .grid
                .gutter
                .or(s.grid.gutter)
                .unwrap_or_else(|| round1(rules.columns.gutter.mid()));
            if let Some(next) = two_columns(&s, gutter, advance, rules, &locks, safe, bounds) {
                s = next;
                restyle(&mut s, rules, &c, ratio);
                c.grid.columns = Some(2);
                c.grid.gutter = Some(gutter);
                locks.columns = true;
                continue;
            }
        }
        // nothing left to adjust: the allowance is only a margin of safety,
        // pagination checks the real pages
        if t.words_per_line * (t.lines_per_column * cols) as f64 <= cap {
            return Ok(s);
        }
        return Err(Error::Infeasible(format!(
            "about {:.0} words per page exceed the {} word capacity",
            t.words_per_page, cap
        )));
    }
    Err(Error::Infeasible("fitting did not settle".into()))
}

/// The largest body size that sets two columns within the line-length
/// bounds, narrowing the inside and outside margins if need be.
fn two_columns(
    s: &DesignSettings,
    gutter: f64,
    advance: f64,
    rules: &RuleSet,
    locks: &Locks,
    safe: Span<f64>,
    bounds: Span<f64>,
) -> Option<DesignSettings> {
    let io = rules.margins.inside_outside;
    let sizes = rules.font_size.body;
    let mut m = s.clone();
    loop {
        for span in [safe, bounds] {
            let mut size = if locks.size { s.body.size } else { sizes.max };
            loop {
                let mut next = m.clone();
                next.grid = grid_with(next.block_width(), 2, gutter);
                next.body.size = size;
                let e = estimate_chars_per_line(next.column_width_pt(), advance, size);
                if next.grid.column_width > 0.0 && span.contains(e) {
                    return Some(next);
                }
                if locks.size || size - 0.5 < sizes.min - 1e-9 {
                    break;
                }
                size -= 0.5;
            }
        }
        let mut changed = false;
        for (value, locked) in [
            (&mut m.margins.inside, locks.inside),
            (&mut m.margins.outside, locks.outside),
        ] {
            let v = round1(*value - 1.0);
            if !locked && io.contains_approx(v) {
                *value = v;
                changed = true;
            }
        }
        if !changed {
            return None;
        }
    }
}

/// Derives the styles, with the body leading at `ratio` when the fitting
/// loop has opened it up and it is not pinned.
fn restyle(s: &mut DesignSettings, rules: &RuleSet, c: &Constraints, ratio: Option<f64>) {
    let mut c = c.clone();
    if c.body.leading.is_none() {
        c.body.leading = ratio.map(|r| round2(s.body.size * r));
    }
    derive_styles(s, rules, &c);
}

fn round1_up(v: f64) -> f64 {
    (v * 10.0 - 1e-6).ceil() / 10.0
}
