//! Sentence segmentation by least-cost path through the assembled model,
//! plus the greedy (longest match) and anti-greedy (shortest match)
//! dictionary baselines.
//!
//! Only hanzi covered by the fallback table go through the transducer.
//! Other hanzi become single-character `unk` words, and non-hanzi text is
//! split into maximal runs of letters, digits, whitespace, or punctuation,
//! each tagged `sym`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lexicon::{build_lexicon_wfst, Lexicon, FALLBACK_CATEGORY};
use crate::morphology::{attach_affixes, AffixRule, SeenDerived};
use crate::names::{build_name_wfst, NameModel};
use crate::translit::{build_translit_wfst, TransliterationModel};
use crate::wfst::{
    best_path, closure_plus, left_restrict, union_all, Cost, Path, SymbolTable, Wfst, EPSILON,
};

pub const UNKNOWN_CATEGORY: &str = "unk";
pub const SYMBOL_CATEGORY: &str = "sym";

#[derive(Clone, Debug, PartialEq)]
pub struct Word {
    pub surface: String,
    pub category: String,
    pub pronunciation: Vec<String>,
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub words: Vec<Word>,
    pub total_cost: Cost,
}

impl Segmentation {
    fn from_words(words: Vec<Word>) -> Segmentation {
        let total_cost = words.iter().map(|w| w.cost).sum();
        Segmentation { words, total_cost }
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.words.iter().map(|w| w.surface.as_str()).collect()
    }

    /// Half-open hanzi-index intervals of the words.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.words
            .iter()
            .map(|w| {
                let end = start + w.surface.chars().count();
                let iv = (start, end);
                start = end;
                iv
            })
            .collect()
    }

    pub fn format(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Plain => self.surfaces().join("/"),
            OutputFormat::Tagged => self
                .words
                .iter()
                .map(|w| format!("{}_{}", w.surface, w.category))
                .collect::<Vec<_>>()
                .join(" "),
            OutputFormat::Tsv => {
                let mut out = String::new();
                for w in &self.words {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{:.6}",
                        w.surface,
                        w.category,
                        w.pronunciation.join(" "),
                        w.cost
                    );
                }
                out.truncate(out.trim_end_matches('\n').len());
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    /// Words joined by `/`.
    Plain,
    /// `surface_category` tokens joined by spaces.
    Tagged,
    /// One `surface<TAB>category<TAB>pronunciation<TAB>cost` line per word.
    Tsv,
}

/// Which components join the dictionary. The dictionary itself is always
/// present, since the fallback entries are what make every covered hanzi
/// analyzable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelConfig {
    pub morphology: bool,
    pub names: bool,
    pub translit: bool,
}

impl ModelConfig {
    pub fn dictionary_only() -> ModelConfig {
        ModelConfig::default()
    }

    pub fn full() -> ModelConfig {
        ModelConfig {
            morphology: true,
            names: true,
            translit: true,
        }
    }
}

/// Trained sub-models available to [`SegmentationModel::build`].
#[derive(Clone, Debug, Default)]
pub struct Components {
    pub affix_rules: Vec<AffixRule>,
    pub seen_derived: Vec<SeenDerived>,
    pub names: Option<NameModel>,
    pub translit: Option<TransliterationModel>,
}

/// `closure_plus(union of parts)`.
pub fn assemble(parts: &[&Wfst]) -> Result<Wfst> {
    Ok(closure_plus(&union_all(parts)?))
}

/// The assembled transducer together with the lexicon it was built from.
/// Immutable once built and safe to share across threads.
#[derive(Clone, Debug)]
pub struct SegmentationModel {
    wfst: Wfst,
    lexicon: Lexicon,
    config: ModelConfig,
}

impl SegmentationModel {
    pub fn build(
        lexicon: Lexicon,
        components: &Components,
        config: ModelConfig,
    ) -> Result<SegmentationModel> {
        let symbols = SymbolTable::new();
        let mut dictionary = build_lexicon_wfst(&lexicon, &symbols)?;
        if config.morphology {
            dictionary = attach_affixes(
                &dictionary,
                &components.affix_rules,
                &components.seen_derived,
            )?;
        }
        let mut parts = vec![dictionary.wfst];
        if config.names {
            let names = components
                .names
                .as_ref()
                .ok_or_else(|| Error::Config("names enabled but no name model given".into()))?;
            parts.push(build_name_wfst(names, &symbols, lexicon.fallback()));
        }
        if config.translit {
            let translit = components
                .translit
                .as_ref()
                .ok_or_else(|| Error::Config("translit enabled but no model given".into()))?;
            if translit.is_empty() {
                return Err(Error::Config("transliteration model has no hanzi".into()));
            }
            parts.push(build_translit_wfst(translit, &symbols, lexicon.fallback()));
        }
        let wfst = assemble(&parts.iter().collect::<Vec<_>>())?;
        Ok(SegmentationModel {
            wfst,
            lexicon,
            config,
        })
    }

    pub(crate) fn from_parts(
        wfst: Wfst,
        lexicon: Lexicon,
        config: ModelConfig,
    ) -> SegmentationModel {
        SegmentationModel {
            wfst,
            lexicon,
            config,
        }
    }

    pub fn wfst(&self) -> &Wfst {
        &self.wfst
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn config(&self) -> ModelConfig {
        self.config
    }

    /// The input restricted model for a run of covered hanzi, before the
    /// best path is taken.
    pub fn lattice(&self, run: &str) -> Result<Wfst> {
        let symbols = self.wfst.symbols();
        let labels = run
            .chars()
            .map(|c| {
                symbols
                    .get_char(c)
                    .ok_or_else(|| Error::Argument(format!("hanzi {c} is not in the model")))
            })
            .collect::<Result<Vec<_>>>()?;
        left_restrict(&self.wfst, &Wfst::linear_acceptor(symbols.clone(), &labels))
    }

    pub fn segment(&self, sentence: &str) -> Result<Segmentation> {
        let mut words = Vec::new();
        for run in split_runs(sentence, |c| self.covers(c)) {
            match run {
                Run::Covered(s) => {
                    let path = best_path(&self.lattice(s)?)?;
                    words.extend(cut_words(&path, self.wfst.symbols())?);
                }
                Run::Other(w) => words.push(w),
            }
        }
        Ok(Segmentation::from_words(words))
    }

    fn covers(&self, c: char) -> bool {
        self.lexicon.covers(c) && self.wfst.symbols().get_char(c).is_some()
    }
}

/// Reads words off a best path: each `ε:tag` arc closes a word. Tags
/// beginning with `\` mark an affix and fold into the preceding word, whose
/// category becomes e.g. `nc\PL`. Costs of arcs between words go to the
/// next word; costs after the last tag go to the last word.
pub fn cut_words(path: &Path, symbols: &SymbolTable) -> Result<Vec<Word>> {
    let name = |l| {
        symbols
            .name(l)
            .ok_or_else(|| Error::Validation(format!("label {l} missing from symbol table")))
    };
    let mut words: Vec<Word> = Vec::new();
    let mut surface = String::new();
    let mut pron = Vec::new();
    let mut cost = Cost::ZERO;
    for arc in &path.arcs {
        let t = arc.transition;
        cost = cost + t.cost;
        if t.ilabel != EPSILON {
            surface.push_str(&name(t.ilabel)?);
            if t.olabel != EPSILON {
                pron.push(name(t.olabel)?);
            }
            continue;
        }
        if t.olabel == EPSILON {
            continue;
        }
        let tag = name(t.olabel)?;
        let word = Word {
            surface: std::mem::take(&mut surface),
            category: tag.clone(),
            pronunciation: std::mem::take(&mut pron),
            cost: std::mem::replace(&mut cost, Cost::ZERO),
        };
        match words.last_mut() {
            Some(prev) if tag.starts_with('\\') => {
                prev.surface.push_str(&word.surface);
                prev.category.push_str(&tag);
                prev.pronunciation.extend(word.pronunciation);
                prev.cost = prev.cost + word.cost;
            }
            _ => words.push(word),
        }
    }
    cost = cost + path.final_cost;
    if !surface.is_empty() {
        return Err(Error::Validation(format!(
            "path ends with untagged hanzi `{surface}`"
        )));
    }
    match words.last_mut() {
        Some(last) => last.cost = last.cost + cost,
        None => return Err(Error::NoAnalysis("path emits no words".into())),
    }
    Ok(words)
}

enum Run<'a> {
    Covered(&'a str),
    Other(Word),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SymbolClass {
    Letter,
    Digit,
    Space,
    Punct,
}

fn symbol_class(c: char) -> SymbolClass {
    if c.is_whitespace() {
        SymbolClass::Space
    } else if c.is_numeric() {
        SymbolClass::Digit
    } else if c.is_alphabetic() {
        SymbolClass::Letter
    } else {
        SymbolClass::Punct
    }
}

/// Whether `c` is in one of the CJK ideograph blocks.
pub fn is_hanzi(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FA1F)
}

fn split_runs(sentence: &str, covered: impl Fn(char) -> bool) -> Vec<Run<'_>> {
    let mut runs = Vec::new();
    let mut chars = sentence.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        let mut end = start + c.len_utf8();
        if covered(c) {
            while let Some(&(i, d)) = chars.peek() {
                if !covered(d) {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            runs.push(Run::Covered(&sentence[start..end]));
        } else if is_hanzi(c) {
            runs.push(Run::Other(pass_through(c.to_string(), UNKNOWN_CATEGORY)));
        } else {
            let class = symbol_class(c);
            while let Some(&(i, d)) = chars.peek() {
                if covered(d) || is_hanzi(d) || symbol_class(d) != class {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            runs.push(Run::Other(pass_through(
                sentence[start..end].to_string(),
                SYMBOL_CATEGORY,
            )));
        }
    }
    runs
}

fn pass_through(surface: String, category: &str) -> Word {
    Word {
        surface,
        category: category.to_string(),
        pronunciation: Vec::new(),
        cost: Cost::ZERO,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    /// Longest dictionary match at each point.
    Greedy,
    /// Shortest dictionary match at each point.
    AntiGreedy,
}

/// Longest-match segmentation over entry surfaces.
pub fn greedy(lex: &Lexicon, sentence: &str) -> Segmentation {
    baseline(lex, sentence, Baseline::Greedy)
}

/// Shortest-match segmentation over entry surfaces.
pub fn anti_greedy(lex: &Lexicon, sentence: &str) -> Segmentation {
    baseline(lex, sentence, Baseline::AntiGreedy)
}

pub fn baseline(lex: &Lexicon, sentence: &str, algo: Baseline) -> Segmentation {
    let mut by_surface: HashMap<&str, usize> = HashMap::new();
    let mut max_len = 1;
    for (i, e) in lex.entries().iter().enumerate() {
        max_len = max_len.max(e.len());
        let slot = by_surface.entry(e.surface.as_str()).or_insert(i);
        if e.cost < lex.entries()[*slot].cost {
            *slot = i;
        }
    }
    let mut words = Vec::new();
    for run in split_runs(sentence, |c| lex.covers(c)) {
        let s = match run {
            Run::Covered(s) => s,
            Run::Other(w) => {
                words.push(w);
                continue;
            }
        };
        let chars: Vec<(usize, char)> = s.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let byte_end = |k: usize| chars.get(k).map_or(s.len(), |p| p.0);
            let longest = max_len.min(chars.len() - i);
            let lengths: Box<dyn Iterator<Item = usize>> = match algo {
                Baseline::Greedy => Box::new((1..=longest).rev()),
                Baseline::AntiGreedy => Box::new(1..=longest),
            };
            let mut matched = None;
            for n in lengths {
                let cand = &s[chars[i].0..byte_end(i + n)];
                if let Some(&idx) = by_surface.get(cand) {
                    matched = Some((n, &lex.entries()[idx]));
                    break;
                }
            }
            let (n, word) = match matched {
                Some((n, e)) => (
                    n,
                    Word {
                        surface: e.surface.clone(),
                        category: e.category.clone(),
                        pronunciation: e.pronunciation.clone(),
                        cost: e.cost,
                    },
                ),
                None => {
                    let c = chars[i].1;
                    (
                        1,
                        Word {
                            surface: c.to_string(),
                            category: FALLBACK_CATEGORY.to_string(),
                            pronunciation: lex
                                .fallback_pronunciation(c)
                                .into_iter()
                                .map(String::from)
                                .collect(),
                            cost: lex.config().fallback_cost,
                        },
                    )
                }
            };
            words.push(word);
            i += n;
        }
    }
    Segmentation::from_words(words)
}
