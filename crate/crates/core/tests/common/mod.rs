//! Independent reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use folio_core::SeededStream;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Straightforward Liang matcher: every substring of the dotted word is
/// looked up in a flat map of patterns.
pub struct NaiveLiang {
    patterns: HashMap<String, Vec<u8>>,
    exceptions: HashMap<String, Vec<usize>>,
}

impl NaiveLiang {
    pub fn from_tex(text: &str) -> NaiveLiang {
        let mut patterns = HashMap::new();
        let mut exceptions = HashMap::new();
        let mut body = String::new();
        for line in text.lines() {
            body.push_str(line.split('%').next().unwrap());
            body.push(' ');
        }
        let mut rest = body.as_str();
        while let Some(start) = rest.find('\\') {
            let after = &rest[start + 1..];
            let open = after.find('{').unwrap();
            let name = after[..open].trim();
            let close = after.find('}').unwrap();
            let inner = &after[open + 1..close];
            for token in inner.split_whitespace() {
                if name == "patterns" {
                    let letters: String = token.chars().filter(|c| !c.is_ascii_digit()).collect();
                    let mut digits = vec![0u8; letters.chars().count() + 1];
                    let mut pos = 0;
                    for c in token.chars() {
                        match c.to_digit(10) {
                            Some(d) => digits[pos] = d as u8,
                            None => pos += 1,
                        }
                    }
                    patterns.insert(letters, digits);
                } else {
                    let word: String = token.chars().filter(|c| *c != '-').collect();
                    let mut breaks = Vec::new();
                    let mut n = 0;
                    for c in token.chars() {
                        if c == '-' {
                            breaks.push(n);
                        } else {
                            n += 1;
                        }
                    }
                    exceptions.insert(word, breaks);
                }
            }
            rest = &after[close + 1..];
        }
        NaiveLiang { patterns, exceptions }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn points(&self, word: &str) -> Vec<usize> {
        let lower: String = word.chars().flat_map(|c| c.to_lowercase().take(1)).collect();
        let chars: Vec<char> = lower.chars().collect();
        let n = chars.len();
        if n < 5 {
            return vec![];
        }
        let keep = |i: &usize| *i >= 2 && *i <= n - 2;
        if let Some(b) = self.exceptions.get(&lower) {
            return b.iter().copied().filter(keep).collect();
        }
        let dotted: Vec<char> = std::iter::once('.').chain(chars.iter().copied()).chain(std::iter::once('.')).collect();
        let mut values = vec![0u8; dotted.len() + 1];
        for i in 0..dotted.len() {
            for j in i + 1..=dotted.len() {
                let sub: String = dotted[i..j].iter().collect();
                if let Some(d) = self.patterns.get(&sub) {
                    for (k, v) in d.iter().enumerate() {
                        values[i + k] = values[i + k].max(*v);
                    }
                }
            }
        }
        // values[i + 1] is the slot before chars[i]
        (1..n).filter(keep).filter(|i| values[i + 1] % 2 == 1).collect()
    }
}

/// Alphabetic tokens of a text, in order, at least `min` letters long.
pub fn words_of(text: &str, min: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|w| w.chars().count() >= min)
        .map(str::to_string)
        .collect()
}

/// Every way to cut `n` words into lines, as word counts per line.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << (n - 1)) {
        let mut parts = Vec::new();
        let mut run = 1;
        for i in 0..n - 1 {
            if mask & (1 << i) != 0 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        out.push(parts);
    }
    out
}

/// Width in pt of `words` under uniform metrics of `em` per glyph.
pub fn uniform_width(words: &[&str], em: f64, size: f64, ws: f64, ls: f64) -> f64 {
    let glyphs: usize = words.iter().map(|w| w.chars().count()).sum::<usize>() + words.len() - 1;
    let spaces = words.len() - 1;
    let letters = glyphs - spaces;
    letters as f64 * em * size + spaces as f64 * em * size * ws + (glyphs - 1) as f64 * ls * size
}

/// First-fit by exhaustive search: of all break sequences where every line
/// but the last fits at the tightest spacing and the last fits at ideal
/// spacing, the one whose line lengths are lexicographically greatest.
pub fn first_fit_oracle(words: &[&str], measure: f64, em: f64, size: f64, justified: bool) -> Vec<usize> {
    let tight = if justified { (0.8, -0.05) } else { (1.0, 0.0) };
    let fits = |line: &[&str], sp: (f64, f64)| uniform_width(line, em, size, sp.0, sp.1) <= measure + 1e-6;
    let mut best: Option<Vec<usize>> = None;
    for parts in compositions(words.len()) {
        let mut at = 0;
        let mut ok = true;
        for (i, k) in parts.iter().enumerate() {
            let line = &words[at..at + k];
            let sp = if i + 1 == parts.len() { (1.0, 0.0) } else { tight };
            if !fits(line, sp) {
                ok = false;
                break;
            }
            at += k;
        }
        if ok && best.as_ref().is_none_or(|b| parts > *b) {
            best = Some(parts);
        }
    }
    best.expect("every word fits alone")
}

/// Random paragraphs of 1–12 lowercase words with a measure every word fits.
pub fn random_paragraphs(n: usize, seed: u64) -> Vec<(Vec<String>, f64)> {
    let mut rng = SeededStream::new(seed);
    (0..n)
        .map(|_| {
            let count = 1 + rng.below(12);
            let words: Vec<String> = (0..count)
                .map(|_| {
                    let len = 1 + rng.below(10);
                    (0..len).map(|_| (b'a' + rng.below(26) as u8) as char).collect()
                })
                .collect();
            // 10-letter words are 50 pt at 10 pt; keep off exact ties
            let measure = 52.0 + rng.below(200) as f64 + 0.37;
            (words, measure)
        })
        .collect()
}
