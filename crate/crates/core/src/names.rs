//! Chinese personal names: FAMILY+GIVEN with one- or two-hanzi parts.
//!
//! A candidate name is scored as the product of
//! `p(any name in text) * p(family) * p(given | position tables) * p(shape)`.
//! Given-name pairs that co-occur often enough in the name lists use their
//! own bigram probability instead of the product of the two position
//! probabilities. Given-name hanzi never seen in a position are scored by a
//! within-radical-class Good-Turing estimate, smoothed over class size so
//! that no class gets zero mass, and normalized so the unseen mass of the
//! position is exactly `N1/N`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{read_to_string, Error, Result};
use crate::lexicon::is_syllable;
use crate::params::ModelParams;
use crate::wfst::{Cost, Label, StateId, SymbolTable, Transition, Wfst, EPSILON};

/// Category tag emitted for personal names.
pub const NAME_CATEGORY: &str = "np";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NameShape {
    SfSg,
    SfDg,
    DfSg,
    DfDg,
}

impl NameShape {
    pub const ALL: [NameShape; 4] = [
        NameShape::SfSg,
        NameShape::SfDg,
        NameShape::DfSg,
        NameShape::DfDg,
    ];

    pub fn of(family: &FamilyName, given: &GivenName) -> NameShape {
        match (family, given) {
            (FamilyName::Single(_), GivenName::Single(_)) => NameShape::SfSg,
            (FamilyName::Single(_), GivenName::Double(..)) => NameShape::SfDg,
            (FamilyName::Double(..), GivenName::Single(_)) => NameShape::DfSg,
            (FamilyName::Double(..), GivenName::Double(..)) => NameShape::DfDg,
        }
    }
}

impl fmt::Display for NameShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameShape::SfSg => "SF+SG",
            NameShape::SfDg => "SF+DG",
            NameShape::DfSg => "DF+SG",
            NameShape::DfDg => "DF+DG",
        })
    }
}

impl FromStr for NameShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<NameShape> {
        NameShape::ALL
            .into_iter()
            .find(|shape| shape.to_string() == s)
            .ok_or_else(|| Error::Argument(format!("unknown name shape `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyName {
    Single(char),
    Double(char, char),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GivenName {
    Single(char),
    Double(char, char),
}

/// Which given-name slot a hanzi fills.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GivenPosition {
    /// First hanzi of a double given name.
    First,
    /// Second hanzi of a double given name.
    Second,
    /// A single-hanzi given name.
    Single,
}

impl GivenPosition {
    pub const ALL: [GivenPosition; 3] = [
        GivenPosition::First,
        GivenPosition::Second,
        GivenPosition::Single,
    ];
}

/// `S(size) = scale * size^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawSmooth {
    pub scale: f64,
    pub exponent: f64,
}

impl PowerLawSmooth {
    pub fn eval(&self, size: f64) -> f64 {
        self.scale * size.powf(self.exponent)
    }
}

/// Least-squares fit of `ln N1 = ln a + b ln size` over classes with a
/// positive singleton count.
pub fn fit_radical_smooth(points: &[(f64, f64)]) -> Result<PowerLawSmooth> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(size, n1)| *n1 > 0.0 && *size > 0.0)
        .map(|(size, n1)| (size.ln(), n1.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 classes with singletons, have {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-12 {
        return Err(Error::Fit(
            "all classes with singletons have the same size; exponent undefined".into(),
        ));
    }
    let exponent = sxy / sxx;
    Ok(PowerLawSmooth {
        scale: (my - exponent * mx).exp(),
        exponent,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadicalClass {
    pub members: BTreeSet<char>,
    /// N0 for the class: members never seen in the position.
    pub unseen: u64,
    /// N1 for the class: members seen exactly once.
    pub singletons: u64,
}

impl RadicalClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Within-class Good-Turing estimates for unseen given-name hanzi.
#[derive(Clone, Debug, PartialEq)]
pub struct RadicalClassTable {
    classes: BTreeMap<String, RadicalClass>,
    class_of: BTreeMap<char, String>,
    tokens: u64,
    singletons: u64,
    smooth: PowerLawSmooth,
    unseen_prob: BTreeMap<String, f64>,
}

impl RadicalClassTable {
    /// Builds the table from explicit class statistics.
    pub fn from_classes(
        classes: BTreeMap<String, RadicalClass>,
        tokens: u64,
        singletons: u64,
    ) -> Result<RadicalClassTable> {
        if tokens == 0 {
            return Err(Error::Argument("radical table needs N >= 1".into()));
        }
        if singletons > tokens {
            return Err(Error::Argument(format!(
                "N1 ({singletons}) exceeds N ({tokens})"
            )));
        }
        let mut class_of = BTreeMap::new();
        for (id, cls) in &classes {
            if cls.unseen + cls.singletons > cls.members.len() as u64 {
                return Err(Error::Validation(format!(
                    "class {id}: N0 + N1 exceeds its {} members",
                    cls.members.len()
                )));
            }
            for &h in &cls.members {
                if let Some(prev) = class_of.insert(h, id.clone()) {
                    return Err(Error::Validation(format!(
                        "hanzi {h} is in both class {prev} and class {id}"
                    )));
                }
            }
        }
        let points: Vec<(f64, f64)> = classes
            .values()
            .map(|c| (c.size() as f64, c.singletons as f64))
            .collect();
        let smooth = fit_radical_smooth(&points)?;

        // p0 = Z * S(size) / (N * N0), with Z making sum(N0 * p0) = N1/N
        let smoothed_total: f64 = classes
            .values()
            .filter(|c| c.unseen > 0)
            .map(|c| smooth.eval(c.size() as f64))
            .sum();
        let mut unseen_prob = BTreeMap::new();
        for (id, c) in &classes {
            let p = if c.unseen == 0 || smoothed_total <= 0.0 {
                0.0
            } else {
                let z = singletons as f64 / smoothed_total;
                z * smooth.eval(c.size() as f64) / (tokens as f64 * c.unseen as f64)
            };
            unseen_prob.insert(id.clone(), p);
        }
        Ok(RadicalClassTable {
            classes,
            class_of,
            tokens,
            singletons,
            smooth,
            unseen_prob,
        })
    }

    /// Builds the table for one position from its hanzi counts and the
    /// hanzi-to-radical map. Hanzi without a radical still count towards N
    /// and N1.
    pub fn from_counts(
        counts: &BTreeMap<char, u64>,
        radicals: &BTreeMap<char, String>,
    ) -> Result<RadicalClassTable> {
        let tokens: u64 = counts.values().sum();
        let singletons = counts.values().filter(|&&c| c == 1).count() as u64;
        let mut classes: BTreeMap<String, RadicalClass> = BTreeMap::new();
        for (&h, cls) in radicals {
            let entry = classes.entry(cls.clone()).or_insert_with(|| RadicalClass {
                members: BTreeSet::new(),
                unseen: 0,
                singletons: 0,
            });
            entry.members.insert(h);
            match counts.get(&h).copied().unwrap_or(0) {
                0 => entry.unseen += 1,
                1 => entry.singletons += 1,
                _ => {}
            }
        }
        RadicalClassTable::from_classes(classes, tokens, singletons)
    }

    pub fn classes(&self) -> &BTreeMap<String, RadicalClass> {
        &self.classes
    }

    pub fn class_of(&self, h: char) -> Option<&str> {
        self.class_of.get(&h).map(String::as_str)
    }

    pub fn tokens(&self) -> u64 {
        self.tokens
    }

    pub fn singletons(&self) -> u64 {
        self.singletons
    }

    pub fn smooth(&self) -> PowerLawSmooth {
        self.smooth
    }

    /// Probability of one particular unseen hanzi of class `cls`.
    pub fn unseen_probability(&self, cls: &str) -> Option<f64> {
        self.unseen_prob.get(cls).copied()
    }

    /// `-ln p0` for the class; infinite when the class has no unseen members.
    pub fn unseen_hanzi_cost(&self, cls: &str) -> Result<Cost> {
        let p = self
            .unseen_probability(cls)
            .ok_or_else(|| Error::Argument(format!("unknown radical class `{cls}`")))?;
        Ok(Cost::from_probability(p))
    }

    /// `sum over classes of N0 * p0`; equals N1/N after normalization.
    pub fn unseen_mass(&self) -> f64 {
        self.classes
            .iter()
            .map(|(id, c)| c.unseen as f64 * self.unseen_prob[id])
            .sum()
    }

    fn hanzi_probability(&self, h: char) -> f64 {
        self.class_of(h)
            .and_then(|c| self.unseen_probability(c))
            .unwrap_or(0.0)
    }

    /// Hanzi that may appear unseen: members of classes with unseen mass.
    fn unseen_members(&self) -> impl Iterator<Item = char> + '_ {
        self.classes
            .iter()
            .filter(|(id, _)| self.unseen_prob[*id] > 0.0)
            .flat_map(|(_, c)| c.members.iter().copied())
    }
}

/// Raw counts read from the name tables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NameCounts {
    pub family_single: BTreeMap<char, u64>,
    pub family_double: BTreeMap<(char, char), u64>,
    pub given: BTreeMap<GivenPosition, BTreeMap<char, u64>>,
    /// Double given names as whole pairs, for bigram overrides.
    pub given_pairs: BTreeMap<(char, char), u64>,
    /// Pronunciations specific to name use, e.g. 乾 `qian2` in given names.
    pub pronunciations: BTreeMap<char, String>,
}

/// Parses `hanzi(or pair)<TAB>position<TAB>count[<TAB>pronunciation]` with
/// positions `fam1`, `fam2`, `giv1`, `giv2`, `givS`, and `givP` (a whole
/// double given name, used for bigram overrides).
pub fn parse_name_tables_tsv(text: &str, source: &str) -> Result<NameCounts> {
    let mut out = NameCounts::default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(Error::parse(
                source,
                lineno,
                "expected `hanzi<TAB>position<TAB>count[<TAB>pronunciation]`",
            ));
        }
        let chars: Vec<char> = cols[0].chars().collect();
        let count: u64 = cols[2]
            .parse()
            .map_err(|_| Error::parse(source, lineno, format!("bad count `{}`", cols[2])))?;
        let want = |n: usize| {
            if chars.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    source,
                    lineno,
                    format!("position {} takes {n} hanzi, got `{}`", cols[1], cols[0]),
                ))
            }
        };
        match cols[1] {
            "fam1" => {
                want(1)?;
                *out.family_single.entry(chars[0]).or_default() += count;
            }
            "fam2" => {
                want(2)?;
                *out.family_double.entry((chars[0], chars[1])).or_default() += count;
            }
            "giv1" | "giv2" | "givS" => {
                want(1)?;
                let pos = match cols[1] {
                    "giv1" => GivenPosition::First,
                    "giv2" => GivenPosition::Second,
                    _ => GivenPosition::Single,
                };
                *out.given
                    .entry(pos)
                    .or_default()
                    .entry(chars[0])
                    .or_default() += count;
            }
            "givP" => {
                want(2)?;
                *out.given_pairs.entry((chars[0], chars[1])).or_default() += count;
            }
            other => {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("unknown position `{other}` (fam1|fam2|giv1|giv2|givS|givP)"),
                ))
            }
        }
        if let Some(pron) = cols.get(3).filter(|p| !p.is_empty()) {
            let syllables: Vec<&str> = pron.split_whitespace().collect();
            if syllables.len() != chars.len() || !syllables.iter().all(|s| is_syllable(s)) {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("pronunciation `{pron}` does not fit `{}`", cols[0]),
                ));
            }
            for (c, s) in chars.iter().zip(syllables) {
                out.pronunciations.insert(*c, s.to_string());
            }
        }
    }
    Ok(out)
}

/// Parses `hanzi<TAB>class`.
pub fn parse_radicals_tsv(text: &str, source: &str) -> Result<BTreeMap<char, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (h, cls) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source, lineno, "expected `hanzi<TAB>class`"))?;
        let mut chars = h.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(Error::parse(
                source,
                lineno,
                format!("`{h}` is not one hanzi"),
            ));
        };
        if out.insert(c, cls.trim().to_string()).is_some() {
            return Err(Error::parse(
                source,
                lineno,
                format!("{c} assigned to two classes"),
            ));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NameModel {
    pub p_name_in_text: f64,
    pub family_single: BTreeMap<char, f64>,
    pub family_double: BTreeMap<(char, char), f64>,
    pub given: BTreeMap<GivenPosition, BTreeMap<char, f64>>,
    pub type_prior: BTreeMap<NameShape, f64>,
    pub bigram_override: BTreeMap<(char, char), f64>,
    /// Unseen-hanzi tables, one per given position.
    pub unseen_given: BTreeMap<GivenPosition, RadicalClassTable>,
    pub pronunciations: BTreeMap<char, String>,
}

fn normalize<K: Ord + Clone>(counts: &BTreeMap<K, u64>, mass: f64) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return BTreeMap::new();
    }
    counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (k.clone(), mass * c as f64 / total as f64))
        .collect()
}

impl NameModel {
    /// Estimates the model. Each family table is normalized on its own; each
    /// given-position table keeps `1 - N1/N` for its seen hanzi and leaves
    /// `N1/N` to the radical-class estimates.
    pub fn train(
        counts: &NameCounts,
        radicals: &BTreeMap<char, String>,
        params: &ModelParams,
    ) -> Result<NameModel> {
        let p_name_in_text = params
            .p_name_in_text
            .ok_or_else(|| Error::Validation("parameter p_name_in_text is required".into()))?;
        let mut given = BTreeMap::new();
        let mut unseen_given = BTreeMap::new();
        for pos in GivenPosition::ALL {
            let Some(table) = counts.given.get(&pos).filter(|t| !t.is_empty()) else {
                continue;
            };
            let unseen = RadicalClassTable::from_counts(table, radicals)
                .map_err(|e| Error::Fit(format!("given position {pos:?}: {e}")))?;
            let seen_mass = 1.0 - unseen.singletons() as f64 / unseen.tokens() as f64;
            given.insert(pos, normalize(table, seen_mass));
            unseen_given.insert(pos, unseen);
        }
        let double_names: u64 = counts
            .given
            .get(&GivenPosition::First)
            .map(|t| t.values().sum())
            .unwrap_or(0);
        let bigram_override = if double_names == 0 {
            BTreeMap::new()
        } else {
            counts
                .given_pairs
                .iter()
                .filter(|(_, &c)| c >= params.bigram_threshold && c > 0)
                .map(|(&k, &c)| (k, (c as f64 / double_names as f64).min(1.0)))
                .collect()
        };
        let model = NameModel {
            p_name_in_text,
            family_single: normalize(&counts.family_single, 1.0),
            family_double: normalize(&counts.family_double, 1.0),
            given,
            type_prior: params.type_prior.clone(),
            bigram_override,
            unseen_given,
            pronunciations: counts.pronunciations.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(tables: &Path, radicals: &Path, params: &ModelParams) -> Result<NameModel> {
        let counts =
            parse_name_tables_tsv(&read_to_string(tables)?, &tables.display().to_string())?;
        let radicals =
            parse_radicals_tsv(&read_to_string(radicals)?, &radicals.display().to_string())?;
        NameModel::train(&counts, &radicals, params)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| p > 0.0 && p <= 1.0 + 1e-12;
        if !in_unit(self.p_name_in_text) {
            return Err(Error::Validation("p_name_in_text must be in (0, 1]".into()));
        }
        let prior_total: f64 = NameShape::ALL
            .iter()
            .map(|s| self.type_prior.get(s).copied().unwrap_or(0.0))
            .sum();
        if (prior_total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "name type priors must sum to 1, got {prior_total}"
            )));
        }
        let check = |name: &str, total: f64| {
            if total > 1.0 + 1e-9 {
                Err(Error::Validation(format!(
                    "{name} probabilities sum to {total} > 1"
                )))
            } else {
                Ok(())
            }
        };
        check("family_single", self.family_single.values().sum())?;
        check("family_double", self.family_double.values().sum())?;
        for (pos, t) in &self.given {
            check(&format!("given {pos:?}"), t.values().sum())?;
        }
        Ok(())
    }

    fn family_probability(&self, family: &FamilyName) -> f64 {
        match family {
            FamilyName::Single(f) => self.family_single.get(f).copied().unwrap_or(0.0),
            FamilyName::Double(a, b) => self.family_double.get(&(*a, *b)).copied().unwrap_or(0.0),
        }
    }

    /// p(h | position): the seen estimate, else the radical-class estimate.
    pub fn given_probability(&self, pos: GivenPosition, h: char) -> f64 {
        if let Some(&p) = self.given.get(&pos).and_then(|t| t.get(&h)) {
            return p;
        }
        self.unseen_given
            .get(&pos)
            .map(|t| t.hanzi_probability(h))
            .unwrap_or(0.0)
    }

    fn given_pair_probability(&self, g1: char, g2: char) -> f64 {
        match self.bigram_override.get(&(g1, g2)) {
            Some(&p) => p,
            None => {
                self.given_probability(GivenPosition::First, g1)
                    * self.given_probability(GivenPosition::Second, g2)
            }
        }
    }

    /// Hanzi with a non-zero probability in `pos`, in code-point order.
    pub fn given_alphabet(&self, pos: GivenPosition) -> BTreeSet<char> {
        let mut out: BTreeSet<char> = self
            .given
            .get(&pos)
            .map(|t| t.keys().copied().collect())
            .unwrap_or_default();
        if let Some(t) = self.unseen_given.get(&pos) {
            out.extend(t.unseen_members());
        }
        out
    }
}

/// Cost of reading `family` + `given` as a personal name. Infinite when the
/// family name is not listed or a given hanzi has no probability mass.
pub fn name_cost(model: &NameModel, family: &FamilyName, given: &GivenName) -> Cost {
    let shape = NameShape::of(family, given);
    let given_p = match given {
        GivenName::Single(g) => model.given_probability(GivenPosition::Single, *g),
        GivenName::Double(g1, g2) => model.given_pair_probability(*g1, *g2),
    };
    let factors = [
        model.p_name_in_text,
        model.family_probability(family),
        given_p,
        model.type_prior.get(&shape).copied().unwrap_or(0.0),
    ];
    factors.into_iter().map(cost_of).sum()
}

fn cost_of(p: f64) -> Cost {
    Cost::from_probability(p.min(1.0))
}

/// Every licit (family, given) split of `s`, whether or not it scores.
pub fn name_splits(s: &str) -> Vec<(FamilyName, GivenName)> {
    let c: Vec<char> = s.chars().collect();
    match c.len() {
        2 => vec![(FamilyName::Single(c[0]), GivenName::Single(c[1]))],
        3 => vec![
            (FamilyName::Single(c[0]), GivenName::Double(c[1], c[2])),
            (FamilyName::Double(c[0], c[1]), GivenName::Single(c[2])),
        ],
        4 => vec![(
            FamilyName::Double(c[0], c[1]),
            GivenName::Double(c[2], c[3]),
        )],
        _ => vec![],
    }
}

/// Compiles the model into a transducer over the four name shapes. The arc
/// costs along any accepted path sum to [`name_cost`] for that reading.
/// `fallback` supplies pronunciations for hanzi without a name-specific one.
pub fn build_name_wfst(
    model: &NameModel,
    symbols: &Arc<SymbolTable>,
    fallback: &BTreeMap<char, String>,
) -> Wfst {
    let mut m = Wfst::new(symbols.clone());
    let mut b = Builder {
        symbols,
        model,
        fallback,
    };
    let after_entry = m.add_state();
    m.add_arc(
        m.start(),
        Transition::epsilon(cost_of(model.p_name_in_text), after_entry),
    );

    let after_sf = m.add_state();
    let after_df = m.add_state();
    for (&f, &p) in &model.family_single {
        m.add_arc(after_entry, b.arc(f, cost_of(p), after_sf));
    }
    let mut df_first: BTreeMap<char, StateId> = BTreeMap::new();
    for (&(f1, f2), &p) in &model.family_double {
        let mid = *df_first.entry(f1).or_insert_with(|| {
            let s = m.add_state();
            m.add_arc(after_entry, b.arc(f1, Cost::ZERO, s));
            s
        });
        m.add_arc(mid, b.arc(f2, cost_of(p), after_df));
    }

    let single_given = m.add_state();
    let double_given = m.add_state();
    let end = m.add_state();
    let prior = |s: NameShape| cost_of(model.type_prior.get(&s).copied().unwrap_or(0.0));
    for (from, sg, dg) in [
        (after_sf, NameShape::SfSg, NameShape::SfDg),
        (after_df, NameShape::DfSg, NameShape::DfDg),
    ] {
        if prior(sg).is_finite() {
            m.add_arc(from, Transition::epsilon(prior(sg), single_given));
        }
        if prior(dg).is_finite() {
            m.add_arc(from, Transition::epsilon(prior(dg), double_given));
        }
    }

    for g in model.given_alphabet(GivenPosition::Single) {
        let p = model.given_probability(GivenPosition::Single, g);
        m.add_arc(single_given, b.arc(g, cost_of(p), end));
    }

    let firsts = model.given_alphabet(GivenPosition::First);
    let seconds = model.given_alphabet(GivenPosition::Second);
    let overridden: BTreeSet<char> = model.bigram_override.keys().map(|k| k.0).collect();
    let shared_second = m.add_state();
    for g1 in firsts
        .iter()
        .copied()
        .chain(overridden.iter().copied())
        .collect::<BTreeSet<_>>()
    {
        let p1 = model.given_probability(GivenPosition::First, g1);
        if !overridden.contains(&g1) {
            m.add_arc(double_given, b.arc(g1, cost_of(p1), shared_second));
            continue;
        }
        // this first hanzi has bigram overrides: give it its own second slot
        let own = m.add_state();
        m.add_arc(double_given, b.arc(g1, Cost::ZERO, own));
        let mut seconds_here: BTreeSet<char> = seconds.clone();
        seconds_here.extend(
            model
                .bigram_override
                .keys()
                .filter(|k| k.0 == g1)
                .map(|k| k.1),
        );
        for g2 in seconds_here {
            let cost = match model.bigram_override.get(&(g1, g2)) {
                Some(&p) => cost_of(p),
                None => cost_of(p1) + cost_of(model.given_probability(GivenPosition::Second, g2)),
            };
            if cost.is_finite() {
                m.add_arc(own, b.arc(g2, cost, end));
            }
        }
    }
    for &g2 in &seconds {
        let p = model.given_probability(GivenPosition::Second, g2);
        m.add_arc(shared_second, b.arc(g2, cost_of(p), end));
    }

    let fin = m.add_state();
    m.add_arc(
        end,
        Transition::new(EPSILON, symbols.intern(NAME_CATEGORY), Cost::ZERO, fin),
    );
    m.set_final(fin, Cost::ZERO);
    m.trim()
}

struct Builder<'a> {
    symbols: &'a Arc<SymbolTable>,
    model: &'a NameModel,
    fallback: &'a BTreeMap<char, String>,
}

impl Builder<'_> {
    fn pron(&self, h: char) -> Label {
        self.model
            .pronunciations
            .get(&h)
            .or_else(|| self.fallback.get(&h))
            .map(|p| self.symbols.intern(p))
            .unwrap_or(EPSILON)
    }

    fn arc(&mut self, h: char, cost: Cost, next: StateId) -> Transition {
        Transition::new(self.symbols.intern_char(h), self.pron(h), cost, next)
    }
}
