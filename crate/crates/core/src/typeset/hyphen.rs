//! Liang hyphenation over TeX pattern files (`\patterns{...}` and
//! `\hyphenation{...}` groups). Patterns for `en` and `pt` are bundled.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// No break closer than this to either end of a word.
pub const LEFT_MIN: usize = 2;
pub const RIGHT_MIN: usize = 2;
/// Words shorter than this are never hyphenated.
pub const MIN_WORD: usize = 5;

const EN_US: &str = include_str!("../../data/hyph/hyph-en-us.tex");
const PT: &str = include_str!("../../data/hyph/hyph-pt.tex");

#[derive(Debug, Default, Clone)]
struct Node {
    children: Vec<(char, u32)>,
    levels: Option<Vec<u8>>,
}

/// A compiled pattern set plus its exception list.
#[derive(Debug, Clone)]
pub struct Patterns {
    nodes: Vec<Node>,
    exceptions: HashMap<String, Vec<usize>>,
    count: usize,
}

impl Patterns {
    /// Parses TeX pattern-file text.
    pub fn parse_tex(text: &str) -> Result<Patterns> {
        let mut p = Patterns {
            nodes: vec![Node::default()],
            exceptions: HashMap::new(),
            count: 0,
        };
        let mut group: Option<&str> = None;
        for raw in text.lines() {
            let line = raw.split('%').next().unwrap_or("");
            for token in line.split_whitespace() {
                let mut token = token;
                if group.is_none() {
                    if let Some(rest) = token.strip_prefix("\\patterns{") {
                        group = Some("patterns");
                        token = rest;
                    } else if let Some(rest) = token.strip_prefix("\\hyphenation{") {
                        group = Some("hyphenation");
                        token = rest;
                    } else {
                        return Err(Error::Parse {
                            what: "hyphenation patterns",
                            message: format!("unexpected `{token}` outside a group"),
                        });
                    }
                }
                let closes = token.ends_with('}');
                let token = token.trim_end_matches('}');
                if !token.is_empty() {
                    match group {
                        Some("patterns") => p.insert_pattern(token)?,
                        _ => p.insert_exception(token),
                    }
                }
                if closes {
                    group = None;
                }
            }
        }
        if group.is_some() {
            return Err(Error::Parse {
                what: "hyphenation patterns",
                message: "unterminated group".into(),
            });
        }
        Ok(p)
    }

    /// Number of patterns loaded.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn insert_pattern(&mut self, token: &str) -> Result<()> {
        let mut letters = Vec::new();
        let mut levels = vec![0u8];
        for c in token.chars() {
            if let Some(d) = c.to_digit(10) {
                *levels.last_mut().expect("levels never empty") = d as u8;
            } else {
                letters.push(c);
                levels.push(0);
            }
        }
        if letters.is_empty() {
            return Err(Error::Parse {
                what: "hyphenation patterns",
                message: format!("pattern `{token}` has no letters"),
            });
        }
        let mut node = 0usize;
        for c in letters {
            node = match self.nodes[node].children.iter().find(|(k, _)| *k == c) {
                Some((_, next)) => *next as usize,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.push((c, next as u32));
                    next
                }
            };
        }
        self.nodes[node].levels = Some(levels);
        self.count += 1;
        Ok(())
    }

    fn insert_exception(&mut self, token: &str) {
        let mut word = String::new();
        let mut breaks = Vec::new();
        let mut n = 0;
        for c in token.chars() {
            if c == '-' {
                breaks.push(n);
            } else {
                word.push(c);
                n += 1;
            }
        }
        self.exceptions.insert(word, breaks);
    }

    /// Break indices (in chars) for a lowercase-able alphabetic word.
    pub fn points(&self, word: &str) -> Vec<usize> {
        let chars: Vec<char> = word
            .chars()
            .map(|c| c.to_lowercase().next().unwrap_or(c))
            .collect();
        let n = chars.len();
        if n < MIN_WORD {
            return Vec::new();
        }
        let allowed = |i: &usize| *i >= LEFT_MIN && n - *i >= RIGHT_MIN;
        let lower: String = chars.iter().collect();
        if let Some(b) = self.exceptions.get(&lower) {
            return b.iter().copied().filter(allowed).collect();
        }
        let mut dotted = Vec::with_capacity(n + 2);
        dotted.push('.');
        dotted.extend_from_slice(&chars);
        dotted.push('.');
        let mut score = vec![0u8; dotted.len() + 1];
        for start in 0..dotted.len() {
            let mut node = 0usize;
            for (k, c) in dotted[start..].iter().enumerate() {
                let Some((_, next)) = self.nodes[node].children.iter().find(|(ch, _)| ch == c)
                else {
                    break;
                };
                node = *next as usize;
                if let Some(levels) = &self.nodes[node].levels {
                    debug_assert_eq!(levels.len(), k + 2);
                    for (m, l) in levels.iter().enumerate() {
                        let s = &mut score[start + m];
                        *s = (*s).max(*l);
                    }
                }
            }
        }
        // score[i + 1] sits between chars[i - 1] and chars[i]
        (1..n)
            .filter(allowed)
            .filter(|i| score[i + 1] % 2 == 1)
            .collect()
    }
}

/// Primary language subtag, lowercased (`"pt-BR"` -> `"pt"`).
pub fn primary_subtag(language: &str) -> String {
    language
        .split(['-', '_'])
        .next()
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Bundled patterns for a language tag, if any.
pub fn patterns_for(language: &str) -> Option<&'static Patterns> {
    static EN: OnceLock<Patterns> = OnceLock::new();
    static PT_PATTERNS: OnceLock<Patterns> = OnceLock::new();
    match primary_subtag(language).as_str() {
        "en" => Some(EN.get_or_init(|| Patterns::parse_tex(EN_US).expect("bundled en patterns"))),
        "pt" => Some(PT_PATTERNS.get_or_init(|| Patterns::parse_tex(PT).expect("bundled pt patterns"))),
        _ => None,
    }
}

/// Text of a bundled pattern file (`en` or `pt`).
pub fn bundled_pattern_text(language: &str) -> Option<&'static str> {
    match primary_subtag(language).as_str() {
        "en" => Some(EN_US),
        "pt" => Some(PT),
        _ => None,
    }
}

/// Hyphenation break indices for `word`: a break at `i` falls between the
/// `i-1`th and `i`th character. Unknown languages yield no breaks and log
/// a warning once per language.
pub fn hyphenation_points(word: &str, language: &str) -> Vec<usize> {
    match patterns_for(language) {
        Some(p) => p.points(word),
        None => {
            static WARNED: OnceLock<Mutex<BTreeSet<String>>> = OnceLock::new();
            let mut warned = WARNED
                .get_or_init(Default::default)
                .lock()
                .expect("warn set poisoned");
            if warned.insert(language.to_string()) {
                log::warn!("no hyphenation patterns for language `{language}`");
            }
            Vec::new()
        }
    }
}
