//! Transliterated foreign names, scored as a prior on "this is a foreign
//! name" times a unigram probability for each hanzi.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{read_to_string, Error, Result};
use crate::wfst::{Cost, SymbolTable, Transition, Wfst, EPSILON};

/// Category tag emitted for transliterated foreign names.
pub const TRANSLIT_CATEGORY: &str = "FN";

#[derive(Clone, Debug, PartialEq)]
pub struct TransliterationModel {
    pub p_tn: f64,
    pub p_char: BTreeMap<char, f64>,
}

/// Maximum-likelihood unigram estimate over all hanzi tokens in `names`,
/// keeping only hanzi seen at least twice. Dropped hanzi stay in the
/// denominator.
pub fn train_translit(names: &[Vec<char>], p_tn: f64) -> Result<TransliterationModel> {
    if names.iter().all(|n| n.is_empty()) {
        return Err(Error::Fit("no transliterated names to train on".into()));
    }
    if !(p_tn > 0.0 && p_tn <= 1.0) {
        return Err(Error::Validation(format!(
            "p_TN must be in (0, 1], got {p_tn}"
        )));
    }
    let mut counts: BTreeMap<char, u64> = BTreeMap::new();
    for &h in names.iter().flatten() {
        *counts.entry(h).or_default() += 1;
    }
    let total: u64 = counts.values().sum();
    let p_char = counts
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .map(|(h, c)| (h, c as f64 / total as f64))
        .collect();
    Ok(TransliterationModel { p_tn, p_char })
}

/// One name per line; blank lines and `#` comments are skipped.
pub fn parse_translit_names(text: &str) -> Vec<Vec<char>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect())
        .collect()
}

impl TransliterationModel {
    pub fn load(names: &Path, p_tn: f64) -> Result<TransliterationModel> {
        train_translit(&parse_translit_names(&read_to_string(names)?), p_tn)
    }

    pub fn is_empty(&self) -> bool {
        self.p_char.is_empty()
    }
}

/// `-ln p_TN + sum of -ln p_char(h)`; infinite when any hanzi is outside
/// the model or the span is empty.
pub fn translit_cost(model: &TransliterationModel, span: &[char]) -> Cost {
    if span.is_empty() {
        return Cost::INFINITY;
    }
    let prior = Cost::from_probability(model.p_tn);
    span.iter()
        .map(|h| {
            model
                .p_char
                .get(h)
                .map_or(Cost::INFINITY, |&p| Cost::from_probability(p))
        })
        .fold(prior, Cost::times)
}

/// Entry arc with the prior, one arc per hanzi into a looping state, and an
/// `ε:FN` exit. Hanzi output their `pronunciations` entry, or ε if absent.
pub fn build_translit_wfst(
    model: &TransliterationModel,
    symbols: &Arc<SymbolTable>,
    pronunciations: &BTreeMap<char, String>,
) -> Wfst {
    let mut m = Wfst::new(symbols.clone());
    let entered = m.add_state();
    let looping = m.add_state();
    let fin = m.add_state();
    m.add_arc(
        m.start(),
        Transition::epsilon(Cost::from_probability(model.p_tn), entered),
    );
    for (&h, &p) in &model.p_char {
        let i = symbols.intern_char(h);
        let o = pronunciations
            .get(&h)
            .map_or(EPSILON, |s| symbols.intern(s));
        let cost = Cost::from_probability(p);
        m.add_arc(entered, Transition::new(i, o, cost, looping));
        m.add_arc(looping, Transition::new(i, o, cost, looping));
    }
    m.add_arc(
        looping,
        Transition::new(EPSILON, symbols.intern(TRANSLIT_CATEGORY), Cost::ZERO, fin),
    );
    m.set_final(fin, Cost::ZERO);
    m.trim()
}
