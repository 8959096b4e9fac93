//! Productive suffixation on top of the compiled lexicon.
//!
//! An affix is a small sub-machine (`hanzi:syllable` arcs, then an
//! `ε:\TAG` arc). A costless epsilon arc joins the final node of the base
//! category to it, so an unseen derived word costs
//! `cost(base) + cost_unseen(affix)`, where the unseen cost is the
//! Good-Turing mass `N1/N` of novel members of the construction scaled by
//! the affix's text probability.
//!
//! A derived word seen in training gets a dedicated `ε:category` arc from
//! its base's pre-tag node into the affix sub-machine, weighted
//! `whole_word_cost - cost_unseen`, so its complete path costs exactly
//! `whole_word_cost`. That arc weight can be negative.

use crate::error::{read_to_string, Error, Result};
use crate::lexicon::{is_syllable, CompiledLexicon};
use crate::wfst::{Cost, StateId, Transition, Wfst, EPSILON};

#[derive(Clone, Debug, PartialEq)]
pub struct AffixRule {
    pub affix_surface: String,
    pub affix_pronunciation: Vec<String>,
    pub base_category: String,
    /// Grammatical tag of the derived word; starts with `\`, e.g. `\PL`.
    pub result_tag: String,
    /// N: observed tokens of the construction.
    pub tokens: u64,
    /// N1: construction types observed exactly once.
    pub singletons: u64,
    pub prob_text_affix: f64,
}

impl AffixRule {
    pub fn validate(&self) -> Result<()> {
        let n = self.affix_surface.chars().count();
        if n == 0 || self.affix_pronunciation.len() != n {
            return Err(Error::Validation(format!(
                "affix `{}`: needs one syllable per hanzi",
                self.affix_surface
            )));
        }
        if let Some(bad) = self.affix_pronunciation.iter().find(|s| !is_syllable(s)) {
            return Err(Error::Validation(format!(
                "affix `{}`: malformed syllable `{bad}`",
                self.affix_surface
            )));
        }
        if !self.result_tag.starts_with('\\') || self.result_tag.len() < 2 {
            return Err(Error::Validation(format!(
                "affix `{}`: result tag `{}` must look like `\\TAG`",
                self.affix_surface, self.result_tag
            )));
        }
        if self.tokens == 0 || self.singletons > self.tokens {
            return Err(Error::Validation(format!(
                "affix `{}`: need 0 <= N1 <= N and N >= 1, got N={} N1={}",
                self.affix_surface, self.tokens, self.singletons
            )));
        }
        if !(self.prob_text_affix > 0.0 && self.prob_text_affix <= 1.0) {
            return Err(Error::Validation(format!(
                "affix `{}`: prob_text_affix must be in (0, 1], got {}",
                self.affix_surface, self.prob_text_affix
            )));
        }
        Ok(())
    }
}

/// A derived word observed in training, with its own estimated cost.
#[derive(Clone, Debug, PartialEq)]
pub struct SeenDerived {
    pub base_surface: String,
    pub affix_surface: String,
    pub whole_word_cost: Cost,
}

impl SeenDerived {
    /// Splits `surface` into base + `affix_surface`.
    pub fn new(surface: &str, affix_surface: &str, whole_word_cost: Cost) -> Result<SeenDerived> {
        let base = surface
            .strip_suffix(affix_surface)
            .filter(|b| !b.is_empty() && !affix_surface.is_empty())
            .ok_or_else(|| {
                Error::Validation(format!(
                    "`{surface}` is not a base followed by `{affix_surface}`"
                ))
            })?;
        if !whole_word_cost.is_finite() {
            return Err(Error::Validation(format!("{surface}: cost must be finite")));
        }
        Ok(SeenDerived {
            base_surface: base.to_string(),
            affix_surface: affix_surface.to_string(),
            whole_word_cost,
        })
    }

    pub fn surface(&self) -> String {
        format!("{}{}", self.base_surface, self.affix_surface)
    }
}

/// Good-Turing estimate of the total probability of unseen types: `N1/N`.
pub fn good_turing_unseen_prob(tokens: u64, singletons: u64) -> Result<f64> {
    if tokens == 0 {
        return Err(Error::Argument("N must be at least 1".into()));
    }
    if singletons > tokens {
        return Err(Error::Argument(format!(
            "N1 ({singletons}) exceeds N ({tokens})"
        )));
    }
    Ok(singletons as f64 / tokens as f64)
}

/// `-ln((N1/N) * prob_text_affix)`; infinite when N1 is zero.
pub fn unseen_construction_cost(rule: &AffixRule) -> Result<Cost> {
    let p = good_turing_unseen_prob(rule.tokens, rule.singletons)?;
    Ok(Cost::from_probability(p * rule.prob_text_affix))
}

/// Adds one affix to the lexicon machine. Seen derived words for other
/// affixes are ignored.
pub fn attach_affix(
    lexicon: &CompiledLexicon,
    rule: &AffixRule,
    seen: &[SeenDerived],
) -> Result<CompiledLexicon> {
    rule.validate()?;
    let base_node = *lexicon
        .category_nodes
        .get(&rule.base_category)
        .ok_or_else(|| {
            Error::Validation(format!(
                "affix `{}`: no lexicon entries of category `{}`",
                rule.affix_surface, rule.base_category
            ))
        })?;
    let seen: Vec<&SeenDerived> = seen
        .iter()
        .filter(|s| s.affix_surface == rule.affix_surface)
        .collect();
    let mut seen_nodes = Vec::with_capacity(seen.len());
    for s in &seen {
        let node = lexicon
            .entry_nodes
            .get(&(s.base_surface.clone(), rule.base_category.clone()))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "seen derived word {}: base `{}` is not a lexicon entry of category `{}`",
                    s.surface(),
                    s.base_surface,
                    rule.base_category
                ))
            })?;
        seen_nodes.push(*node);
    }

    let unseen = unseen_construction_cost(rule)?;
    let mut out = lexicon.clone();
    let m = &mut out.wfst;
    let category = m.symbols().intern(&rule.base_category);

    if unseen.is_finite() {
        let affix_start = add_affix_chain(m, rule, unseen);
        m.add_arc(base_node, Transition::epsilon(Cost::ZERO, affix_start));
        for (s, node) in seen.iter().zip(seen_nodes) {
            let adjusted = Cost::new(s.whole_word_cost.value() - unseen.value());
            m.add_arc(
                node,
                Transition::new(EPSILON, category, adjusted, affix_start),
            );
        }
    } else if !seen.is_empty() {
        // No unseen mass: only listed derived words are reachable.
        let affix_start = add_affix_chain(m, rule, Cost::ZERO);
        for (s, node) in seen.iter().zip(seen_nodes) {
            m.add_arc(
                node,
                Transition::new(EPSILON, category, s.whole_word_cost, affix_start),
            );
        }
    }
    Ok(out)
}

/// Attaches every rule independently.
pub fn attach_affixes(
    lexicon: &CompiledLexicon,
    rules: &[AffixRule],
    seen: &[SeenDerived],
) -> Result<CompiledLexicon> {
    if let Some(orphan) = seen
        .iter()
        .find(|s| !rules.iter().any(|r| r.affix_surface == s.affix_surface))
    {
        return Err(Error::Validation(format!(
            "seen derived word {} uses unknown affix `{}`",
            orphan.surface(),
            orphan.affix_surface
        )));
    }
    let mut out = lexicon.clone();
    for rule in rules {
        out = attach_affix(&out, rule, seen)?;
    }
    Ok(out)
}

/// Adds `affix hanzi:syllable ... ε:result_tag(tag_cost) -> final` and
/// returns the chain's first state.
fn add_affix_chain(m: &mut Wfst, rule: &AffixRule, tag_cost: Cost) -> StateId {
    let symbols = m.symbols().clone();
    let first = m.add_state();
    let mut cur = first;
    for (h, p) in rule.affix_surface.chars().zip(&rule.affix_pronunciation) {
        let next = m.add_state();
        m.add_arc(
            cur,
            Transition::new(symbols.intern_char(h), symbols.intern(p), Cost::ZERO, next),
        );
        cur = next;
    }
    let end = m.add_state();
    m.add_arc(
        cur,
        Transition::new(EPSILON, symbols.intern(&rule.result_tag), tag_cost, end),
    );
    m.set_final(end, Cost::ZERO);
    first
}

pub fn parse_affix_rules_tsv(text: &str, source: &str) -> Result<Vec<AffixRule>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 7 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 7 tab-separated columns, found {}", cols.len()),
            ));
        }
        let int = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(source, lineno, format!("bad {what} `{s}`")))
        };
        let rule = AffixRule {
            affix_surface: cols[0].to_string(),
            affix_pronunciation: cols[1].split_whitespace().map(String::from).collect(),
            base_category: cols[2].to_string(),
            result_tag: cols[3].to_string(),
            tokens: int(cols[4], "N")?,
            singletons: int(cols[5], "N1")?,
            prob_text_affix: cols[6].parse::<f64>().map_err(|_| {
                Error::parse(source, lineno, format!("bad prob_text_affix `{}`", cols[6]))
            })?,
        };
        rule.validate()
            .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        out.push(rule);
    }
    Ok(out)
}

pub fn parse_seen_derived_tsv(text: &str, source: &str) -> Result<Vec<SeenDerived>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        let cost = cols[2]
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .ok_or_else(|| Error::parse(source, lineno, format!("bad cost `{}`", cols[2])))?;
        out.push(
            SeenDerived::new(cols[0], cols[1], Cost::new(cost))
                .map_err(|e| Error::parse(source, lineno, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn load_affix_rules(path: &std::path::Path) -> Result<Vec<AffixRule>> {
    parse_affix_rules_tsv(&read_to_string(path)?, &path.display().to_string())
}

pub fn load_seen_derived(path: &std::path::Path) -> Result<Vec<SeenDerived>> {
    parse_seen_derived_tsv(&read_to_string(path)?, &path.display().to_string())
}
