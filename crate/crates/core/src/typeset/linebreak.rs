//! Greedy first-fit line breaking with spacing elasticity.
//!
//! Justified lines take the longest prefix of words that fits at the
//! tightest allowed spacing, then stretch or shrink word spacing first and
//! letter spacing second. A line that stays loose at the widest spacing
//! tries a hyphenated break. Ragged lines break at the last space that fits
//! at ideal spacing. A fragment wider than the measure is split at a glyph
//! boundary and flagged as overflow.

use std::collections::VecDeque;

use crate::num::{width_epsilon, Scalar};
use crate::rules::{Alignment, Elastic};
use crate::typeset::hyphen;
use crate::typeset::layout::RunStyle;
use crate::typeset::metrics::FontMetrics;

/// Paragraph style seen by the breaker. Sizes in pt.
#[derive(Debug, Clone)]
pub struct BreakStyle<S> {
    pub alignment: Alignment,
    pub size: S,
    pub word_spacing: Elastic,
    pub letter_spacing: Elastic,
    pub hyphenate: bool,
    /// Positive: first line indented. Negative: every line but the first indented.
    pub indent: S,
    pub language: String,
}

impl<S: Scalar> BreakStyle<S> {
    pub fn ragged(alignment: Alignment, size: S, ws: Elastic, ls: Elastic) -> Self {
        BreakStyle {
            alignment,
            size,
            word_spacing: ws,
            letter_spacing: ls,
            hyphenate: false,
            indent: S::zero(),
            language: "en".into(),
        }
    }

    fn justified(&self) -> bool {
        self.alignment == Alignment::Justified
    }
}

/// A line as produced by the breaker, in pt relative to the column start.
#[derive(Debug, Clone, PartialEq)]
pub struct SetLine<S> {
    /// Styled runs with their offsets from the line start.
    pub runs: Vec<(String, RunStyle, S)>,
    /// Offset of the line start from the column edge (indent plus alignment shift).
    pub offset: S,
    /// Width available to this line.
    pub measure: S,
    pub width: S,
    /// Natural advance of a space.
    pub space: S,
    pub word_spacing: S,
    pub letter_spacing: S,
    pub hyphenated: bool,
    pub overflow: bool,
    pub last: bool,
    pub words: usize,
}

impl<S> SetLine<S> {
    pub fn text(&self) -> String {
        self.runs.iter().map(|(t, _, _)| t.as_str()).collect()
    }

    pub fn char_count(&self) -> usize {
        self.runs.iter().map(|(t, _, _)| t.chars().count()).sum()
    }
}

#[derive(Debug, Clone)]
struct Word<S> {
    pieces: Vec<(String, RunStyle)>,
    adv: S,
    glyphs: usize,
}

impl<S: Scalar> Word<S> {
    fn new(pieces: Vec<(String, RunStyle)>, metrics: &FontMetrics, size: S) -> Self {
        let mut adv = S::zero();
        let mut glyphs = 0;
        for (t, _) in &pieces {
            for c in t.chars() {
                adv = adv + metrics.advance(c, size);
                glyphs += 1;
            }
        }
        Word { pieces, adv, glyphs }
    }

    fn plain(&self) -> String {
        self.pieces.iter().map(|(t, _)| t.as_str()).collect()
    }

    /// Splits after `at` chars; `hyphen` appends a hyphen to the head.
    fn split(&self, at: usize, hyphen: bool, metrics: &FontMetrics, size: S) -> (Word<S>, Word<S>) {
        let mut head = Vec::new();
        let mut tail = Vec::new();
        let mut seen = 0;
        for (t, st) in &self.pieces {
            let n = t.chars().count();
            if seen + n <= at {
                head.push((t.clone(), *st));
            } else if seen >= at {
                tail.push((t.clone(), *st));
            } else {
                let cut = t.char_indices().nth(at - seen).map(|(i, _)| i).unwrap_or(t.len());
                head.push((t[..cut].to_string(), *st));
                tail.push((t[cut..].to_string(), *st));
            }
            seen += n;
        }
        if hyphen {
            let st = head.last().map(|(_, s)| *s).unwrap_or_default();
            head.push(("-".to_string(), st));
        }
        (Word::new(head, metrics, size), Word::new(tail, metrics, size))
    }

    /// Hyphenation points over the alphabetic core of the word.
    fn hyphen_points(&self, language: &str) -> Vec<usize> {
        let chars: Vec<char> = self.plain().chars().collect();
        let lead = chars.iter().take_while(|c| !c.is_alphabetic()).count();
        let trail = chars.iter().rev().take_while(|c| !c.is_alphabetic()).count();
        if lead + trail >= chars.len() {
            return Vec::new();
        }
        let core = &chars[lead..chars.len() - trail];
        if !core.iter().all(|c| c.is_alphabetic()) {
            return Vec::new();
        }
        let core: String = core.iter().collect();
        hyphen::hyphenation_points(&core, language)
            .into_iter()
            .map(|i| i + lead)
            .collect()
    }
}

/// Splits styled runs into words on whitespace.
fn words_of<S: Scalar>(
    runs: &[(String, RunStyle)],
    metrics: &FontMetrics,
    size: S,
) -> VecDeque<Word<S>> {
    let mut words = VecDeque::new();
    let mut current: Vec<(String, RunStyle)> = Vec::new();
    let flush = |current: &mut Vec<(String, RunStyle)>, words: &mut VecDeque<Word<S>>| {
        if !current.is_empty() {
            words.push_back(Word::new(std::mem::take(current), metrics, size));
        }
    };
    for (text, style) in runs {
        let mut piece = String::new();
        for c in text.chars() {
            if c.is_whitespace() && c != '\u{a0}' {
                if !piece.is_empty() {
                    current.push((std::mem::take(&mut piece), *style));
                }
                flush(&mut current, &mut words);
            } else {
                piece.push(c);
            }
        }
        if !piece.is_empty() {
            current.push((piece, *style));
        }
    }
    flush(&mut current, &mut words);
    words
}

/// Running totals for a candidate line.
#[derive(Clone, Copy)]
struct Tally<S> {
    adv: S,
    glyphs: usize,
    spaces: usize,
}

impl<S: Scalar> Tally<S> {
    fn of(words: &[&Word<S>]) -> Self {
        let mut t = Tally {
            adv: S::zero(),
            glyphs: 0,
            spaces: 0,
        };
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                t.spaces += 1;
                t.glyphs += 1;
            }
            t.adv = t.adv + w.adv;
            t.glyphs += w.glyphs;
        }
        t
    }

    fn push(mut self, w: &Word<S>) -> Self {
        if self.glyphs > 0 {
            self.spaces += 1;
            self.glyphs += 1;
        }
        self.adv = self.adv + w.adv;
        self.glyphs += w.glyphs;
        self
    }

    fn width(&self, space: S, size: S, ws: S, ls: S) -> S {
        let gaps = if self.glyphs > 0 { self.glyphs - 1 } else { 0 };
        self.adv + S::count(self.spaces) * space * ws + S::count(gaps) * ls * size
    }
}

struct Breaker<'a, S> {
    style: &'a BreakStyle<S>,
    metrics: &'a FontMetrics,
    space: S,
    ws: (S, S, S),
    ls: (S, S, S),
}

impl<'a, S: Scalar> Breaker<'a, S> {
    fn tight(&self) -> (S, S) {
        if self.style.justified() {
            (self.ws.0, self.ls.0)
        } else {
            (self.ws.2, self.ls.2)
        }
    }

    fn fits(&self, t: &Tally<S>, measure: S, ws: S, ls: S) -> bool {
        t.width(self.space, self.style.size, ws, ls) <= measure + width_epsilon()
    }

    /// Spacing that brings a line to `measure`: word spacing first, then
    /// letter spacing, both clamped. Returns (ws, ls, loose).
    fn justify(&self, t: &Tally<S>, measure: S) -> (S, S, bool) {
        let size = self.style.size;
        let (ws_min, ws_max, ws_ideal) = self.ws;
        let (ls_min, ls_max, ls_ideal) = self.ls;
        let gaps = S::count(t.glyphs.saturating_sub(1));
        let mut ws = ws_ideal;
        if t.spaces > 0 {
            let need = (measure - t.adv - gaps * ls_ideal * size)
                / (S::count(t.spaces) * self.space);
            if need >= ws_min && need <= ws_max {
                return (need, ls_ideal, false);
            }
            ws = need.clamp_to(ws_min, ws_max);
        }
        if gaps <= S::zero() {
            let w = t.width(self.space, size, ws, ls_ideal);
            return (ws, ls_ideal, w < measure - width_epsilon());
        }
        let ls_need =
            (measure - t.adv - S::count(t.spaces) * self.space * ws) / (gaps * size);
        let ls = ls_need.clamp_to(ls_min, ls_max);
        (ws, ls, ls_need > ls_max)
    }

    /// Largest hyphenated head of `w` such that `t + head` fits at tight spacing.
    fn best_hyphen(&self, t: &Tally<S>, w: &Word<S>, measure: S) -> Option<(Word<S>, Word<S>)> {
        let (ws, ls) = self.tight();
        for at in w.hyphen_points(&self.style.language).into_iter().rev() {
            let (head, tail) = w.split(at, true, self.metrics, self.style.size);
            if self.fits(&t.push(&head), measure, ws, ls) {
                return Some((head, tail));
            }
        }
        None
    }

    /// Largest glyph prefix (at least one glyph) of `w` fitting alone.
    fn emergency(&self, w: &Word<S>, measure: S) -> (Word<S>, Word<S>) {
        let (ws, ls) = self.tight();
        let n = w.glyphs;
        let mut best = 1;
        for at in (1..n).rev() {
            let (head, _) = w.split(at, false, self.metrics, self.style.size);
            if self.fits(&Tally::of(&[&head]), measure, ws, ls) {
                best = at;
                break;
            }
        }
        w.split(best, false, self.metrics, self.style.size)
    }

    fn emit(
        &self,
        words: &[&Word<S>],
        indent: S,
        measure: S,
        spacing: (S, S),
        flags: (bool, bool, bool),
    ) -> SetLine<S> {
        let (ws, ls) = spacing;
        let (hyphenated, overflow, last) = flags;
        let size = self.style.size;
        let tally = Tally::of(words);
        let width = tally.width(self.space, size, ws, ls);
        let mut runs: Vec<(String, RunStyle, S)> = Vec::new();
        let mut pen = S::zero();
        let mut first_glyph = true;
        for (i, w) in words.iter().enumerate() {
            let pieces = w.pieces.iter().map(|(t, s)| (t.as_str(), *s));
            let space = (i > 0).then(|| (" ", runs.last().map(|r| r.1).unwrap_or_default()));
            for (text, style) in space.into_iter().chain(pieces) {
                if text.is_empty() {
                    continue;
                }
                let start = pen + if first_glyph { S::zero() } else { ls * size };
                match runs.last_mut() {
                    Some(last) if last.1 == style => last.0.push_str(text),
                    _ => runs.push((text.to_string(), style, start)),
                }
                for (k, c) in text.chars().enumerate() {
                    if !(first_glyph && k == 0) {
                        pen = pen + ls * size;
                    }
                    let adv = self.metrics.advance(c, size);
                    pen = pen + if c == ' ' { adv * ws } else { adv };
                }
                first_glyph = false;
            }
        }
        let shift = match self.style.alignment {
            Alignment::Right => measure - width,
            Alignment::Centre => (measure - width) / S::lit(2.0),
            _ => S::zero(),
        };
        SetLine {
            runs,
            offset: indent + shift.max(S::zero()),
            measure,
            width,
            space: self.space,
            word_spacing: ws,
            letter_spacing: ls,
            hyphenated,
            overflow,
            last,
            words: words.len(),
        }
    }
}

/// Breaks styled text into lines of width `measure` (pt).
pub fn break_paragraph<S: Scalar>(
    runs: &[(String, RunStyle)],
    style: &BreakStyle<S>,
    measure: S,
    metrics: &FontMetrics,
) -> Vec<SetLine<S>> {
    let b = Breaker {
        style,
        metrics,
        space: metrics.advance(' ', style.size),
        ws: (
            S::lit(style.word_spacing.min),
            S::lit(style.word_spacing.max),
            S::lit(style.word_spacing.ideal),
        ),
        ls: (
            S::lit(style.letter_spacing.min),
            S::lit(style.letter_spacing.max),
            S::lit(style.letter_spacing.ideal),
        ),
    };
    let ideal = (b.ws.2, b.ls.2);
    let mut queue = words_of(runs, metrics, style.size);
    let mut lines = Vec::new();
    while !queue.is_empty() {
        let (indent, m) = if style.indent >= S::zero() {
            if lines.is_empty() {
                (style.indent, measure - style.indent)
            } else {
                (S::zero(), measure)
            }
        } else if lines.is_empty() {
            (S::zero(), measure)
        } else {
            (-style.indent, measure + style.indent)
        };
        let m = m.max(S::lit(1.0));
        let (tws, tls) = b.tight();

        let mut tally = Tally {
            adv: S::zero(),
            glyphs: 0,
            spaces: 0,
        };
        let mut k = 0;
        while k < queue.len() {
            let next = tally.push(&queue[k]);
            if !b.fits(&next, m, tws, tls) {
                break;
            }
            tally = next;
            k += 1;
        }

        if k == 0 {
            let w = queue.pop_front().expect("queue non-empty");
            let empty = Tally::of(&[]);
            let split = if style.hyphenate {
                b.best_hyphen(&empty, &w, m)
            } else {
                None
            };
            if let Some((head, tail)) = split {
                let t = Tally::of(&[&head]);
                let spacing = if style.justified() {
                    let (ws, ls, _) = b.justify(&t, m);
                    (ws, ls)
                } else {
                    ideal
                };
                lines.push(b.emit(&[&head], indent, m, spacing, (true, false, false)));
                queue.push_front(tail);
            } else {
                let (head, tail) = b.emergency(&w, m);
                let fits_ideal = b.fits(&Tally::of(&[&head]), m, ideal.0, ideal.1);
                let spacing = if fits_ideal { ideal } else { (tws, tls) };
                if tail.glyphs > 0 {
                    queue.push_front(tail);
                }
                let last = queue.is_empty();
                lines.push(b.emit(&[&head], indent, m, spacing, (false, !last, last)));
            }
            continue;
        }

        let rest_empty = k == queue.len();
        if !style.justified() {
            let taken: Vec<Word<S>> = queue.drain(..k).collect();
            let refs: Vec<&Word<S>> = taken.iter().collect();
            lines.push(b.emit(&refs, indent, m, ideal, (false, false, rest_empty)));
            continue;
        }

        if rest_empty {
            if b.fits(&tally, m, ideal.0, ideal.1) {
                let taken: Vec<Word<S>> = queue.drain(..).collect();
                let refs: Vec<&Word<S>> = taken.iter().collect();
                lines.push(b.emit(&refs, indent, m, ideal, (false, false, true)));
                continue;
            }
            if k > 1 {
                k -= 1;
                tally = Tally::of(&queue.iter().take(k).collect::<Vec<_>>());
            }
        }

        let (ws, ls, loose) = b.justify(&tally, m);
        if loose && style.hyphenate && k < queue.len() {
            if let Some((head, tail)) = b.best_hyphen(&tally, &queue[k], m) {
                let t = tally.push(&head);
                let (ws, ls, _) = b.justify(&t, m);
                let mut taken: Vec<Word<S>> = queue.drain(..k).collect();
                queue.pop_front();
                taken.push(head);
                queue.push_front(tail);
                let refs: Vec<&Word<S>> = taken.iter().collect();
                lines.push(b.emit(&refs, indent, m, (ws, ls), (true, false, false)));
                continue;
            }
        }
        let taken: Vec<Word<S>> = queue.drain(..k).collect();
        let refs: Vec<&Word<S>> = taken.iter().collect();
        lines.push(b.emit(&refs, indent, m, (ws, ls), (false, false, false)));
    }
    lines
}

/// Convenience for plain, unstyled text.
pub fn break_text<S: Scalar>(
    text: &str,
    style: &BreakStyle<S>,
    measure: S,
    metrics: &FontMetrics,
) -> Vec<SetLine<S>> {
    break_paragraph(&[(text.to_string(), RunStyle::default())], style, measure, metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::default_rules;
    use crate::typeset::metrics::measure_run;

    fn style(alignment: Alignment) -> BreakStyle<f64> {
        let r = default_rules();
        BreakStyle::ragged(alignment, 10.0, r.word_spacing, r.letter_spacing)
    }

    #[test]
    fn short_text_is_one_final_line() {
        let m = FontMetrics::uniform("u", 0.5);
        let lines = break_text("a few words", &style(Alignment::Justified), 272.0, &m);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].last);
        assert_eq!(lines[0].word_spacing, 1.0);
        assert_eq!(lines[0].letter_spacing, 0.0);
        assert_eq!(lines[0].text(), "a few words");
    }

    #[test]
    fn justified_lines_reach_the_measure() {
        let m = FontMetrics::uniform("u", 0.5);
        let text = "the quick brown fox jumps over the lazy dog ".repeat(12);
        let lines = break_text(&text, &style(Alignment::Justified), 150.0, &m);
        assert!(lines.len() > 3);
        for l in &lines[..lines.len() - 1] {
            assert!((0.8..=1.2).contains(&l.word_spacing), "{}", l.word_spacing);
            assert!((-0.05..=0.05).contains(&l.letter_spacing));
            let w = measure_run(&l.text(), &m, 10.0, l.letter_spacing, l.word_spacing);
            assert!((w - l.width).abs() < 1e-9);
            assert!(w <= 150.0 + 1e-6);
        }
    }

    #[test]
    fn long_token_is_broken_and_flagged() {
        let m = FontMetrics::uniform("u", 0.5);
        let token = "x".repeat(200);
        let lines = break_text(&token, &style(Alignment::Left), 80.0, &m);
        assert!(lines.len() >= 2);
        assert!(lines.iter().filter(|l| !l.last).all(|l| l.overflow));
        assert_eq!(lines.iter().map(|l| l.char_count()).sum::<usize>(), 200);
    }

    #[test]
    fn run_offsets_follow_realized_spacing() {
        let m = FontMetrics::uniform("u", 0.5);
        let runs = vec![
            ("plain ".to_string(), RunStyle::default()),
            ("bold".to_string(), RunStyle { bold: true, ..Default::default() }),
        ];
        let lines = break_paragraph(&runs, &style(Alignment::Left), 272.0, &m);
        let line = &lines[0];
        assert_eq!(line.runs.len(), 2);
        assert_eq!(line.runs[0].0, "plain ");
        // five glyphs of 5 pt plus a 5 pt space
        assert!((line.runs[1].2 - 30.0).abs() < 1e-9);
    }

    #[test]
    fn ragged_alignment_shifts_lines() {
        let m = FontMetrics::uniform("u", 0.5);
        let right = break_text("ab", &style(Alignment::Right), 100.0, &m);
        assert!((right[0].offset - 90.0).abs() < 1e-9);
        let centre = break_text("ab", &style(Alignment::Centre), 100.0, &m);
        assert!((centre[0].offset - 45.0).abs() < 1e-9);
    }

    #[test]
    fn indents_shape_the_measure() {
        let m = FontMetrics::uniform("u", 0.5);
        let mut st = style(Alignment::Left);
        st.indent = 10.0;
        let text = "aaaa ".repeat(40);
        let lines = break_text(&text, &st, 100.0, &m);
        assert_eq!(lines[0].offset, 10.0);
        assert_eq!(lines[0].measure, 90.0);
        assert_eq!(lines[1].offset, 0.0);
        st.indent = -10.0;
        let lines = break_text(&text, &st, 100.0, &m);
        assert_eq!(lines[0].offset, 0.0);
        assert_eq!(lines[1].offset, 10.0);
        assert_eq!(lines[1].measure, 90.0);
    }

    #[test]
    fn hyphenation_fills_loose_lines() {
        let m = FontMetrics::uniform("u", 0.5);
        let mut st = style(Alignment::Justified);
        st.hyphenate = true;
        let text = "an extraordinary hyphenation demonstration ".repeat(6);
        let lines = break_text(&text, &st, 90.0, &m);
        assert!(lines.iter().any(|l| l.hyphenated));
        for l in lines.iter().filter(|l| l.hyphenated) {
            assert!(l.text().ends_with('-'));
        }
    }

    #[test]
    fn breaker_runs_in_f32() {
        let m = FontMetrics::uniform("u", 0.5);
        let r = default_rules();
        let st: BreakStyle<f32> =
            BreakStyle::ragged(Alignment::Justified, 10.0, r.word_spacing, r.letter_spacing);
        let text = "one two three four five six seven eight nine ten ".repeat(4);
        let lines = break_text(&text, &st, 120.0f32, &m);
        assert!(lines.len() > 1);
    }
}
