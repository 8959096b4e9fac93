//! Dictionary entries, unigram cost estimation, and compilation of the
//! base lexicon transducer.
//!
//! Each entry compiles to a chain of costless `hanzi:syllable` arcs
//! followed by one `ε:category` arc carrying the entry cost. All entries of
//! one category end in a shared final node, which is where productive
//! affixes attach later. Every hanzi in the fallback table also gets a
//! single-character entry with the fallback category, so any sentence over
//! covered hanzi has at least one analysis.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{read_to_string, Error, Result};
use crate::wfst::{Cost, StateId, SymbolTable, Transition, Wfst, EPSILON};

pub const DEFAULT_LARGE_COST: f64 = 20.0;
pub const DEFAULT_FALLBACK_COST: f64 = 15.0;

/// Category of single-hanzi fallback entries.
pub const FALLBACK_CATEGORY: &str = "gm";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LexiconConfig {
    /// Cost given to non-likeliest pronunciations and to unseen strings.
    pub large_cost: Cost,
    /// Cost of an isolated fallback hanzi.
    pub fallback_cost: Cost,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            large_cost: Cost::new(DEFAULT_LARGE_COST),
            fallback_cost: Cost::new(DEFAULT_FALLBACK_COST),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexEntry {
    pub surface: String,
    pub pronunciation: Vec<String>,
    pub category: String,
    pub cost: Cost,
    /// Whether this is the likeliest pronunciation of its surface string.
    pub likeliest: bool,
}

impl LexEntry {
    pub fn new(
        surface: &str,
        pronunciation: &[&str],
        category: &str,
        cost: f64,
        likeliest: bool,
    ) -> Result<LexEntry> {
        let e = LexEntry {
            surface: surface.to_string(),
            pronunciation: pronunciation.iter().map(|s| s.to_string()).collect(),
            category: category.to_string(),
            cost: Cost::new(cost),
            likeliest,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.surface.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.surface.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Validation("entry with empty surface".into()));
        }
        if self.pronunciation.len() != n {
            return Err(Error::Validation(format!(
                "{}: {} syllables for {} hanzi",
                self.surface,
                self.pronunciation.len(),
                n
            )));
        }
        if let Some(bad) = self.pronunciation.iter().find(|s| !is_syllable(s)) {
            return Err(Error::Validation(format!(
                "{}: malformed syllable `{bad}`",
                self.surface
            )));
        }
        if !is_tag(&self.category) {
            return Err(Error::Validation(format!(
                "{}: malformed category `{}`",
                self.surface, self.category
            )));
        }
        if !self.cost.is_finite() || self.cost.value() < 0.0 {
            return Err(Error::Validation(format!(
                "{}: cost must be finite and non-negative, got {}",
                self.surface, self.cost
            )));
        }
        Ok(())
    }
}

/// Romanization followed by a tone digit 0-4, e.g. `jiang1`, `de0`.
pub fn is_syllable(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next_back() {
        Some('0'..='4') => {}
        _ => return false,
    }
    let body = chars.as_str();
    !body.is_empty() && body.chars().all(|c| c.is_alphabetic() || c == ':')
}

fn is_tag(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

/// `-ln(count / total)`, or `large_cost` for a zero count.
pub fn cost_from_counts(count: u64, total: u64, large_cost: Cost) -> Result<Cost> {
    if total == 0 {
        return Err(Error::Argument("total count must be positive".into()));
    }
    if count > total {
        return Err(Error::Argument(format!(
            "count {count} exceeds total {total}"
        )));
    }
    if count == 0 {
        return Ok(large_cost);
    }
    Ok(Cost::from_probability(count as f64 / total as f64))
}

/// Gives the string cost to the entry marked likeliest and `large_cost` to
/// every other entry of the same surface.
pub fn assign_string_costs(
    entries: Vec<LexEntry>,
    string_cost: Cost,
    large_cost: Cost,
) -> Result<Vec<LexEntry>> {
    let Some(first) = entries.first() else {
        return Err(Error::Argument("no entries to assign costs to".into()));
    };
    let surface = first.surface.clone();
    if let Some(other) = entries.iter().find(|e| e.surface != surface) {
        return Err(Error::Argument(format!(
            "entries do not share a surface: {} vs {}",
            surface, other.surface
        )));
    }
    let marked = entries.iter().filter(|e| e.likeliest).count();
    if marked != 1 {
        return Err(Error::Argument(format!(
            "{surface}: expected exactly one likeliest pronunciation, found {marked}"
        )));
    }
    Ok(entries
        .into_iter()
        .map(|e| LexEntry {
            cost: if e.likeliest { string_cost } else { large_cost },
            ..e
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostMode {
    Counts,
    Costs,
}

/// Parses lexicon TSV. In `counts` mode each surface's string count is read
/// from its likeliest line, the total defaults to the sum of string counts
/// (or `total=N` in the header), and costs are assigned per surface; in
/// `costs` mode the cost column is taken verbatim.
pub fn parse_lexicon_tsv(
    text: &str,
    source: &str,
    config: &LexiconConfig,
) -> Result<Vec<LexEntry>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (mode, header_total) = loop {
        match lines.next() {
            None => return Err(Error::parse(source, 1, "missing `#lexicon v1` header")),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((n, l)) => break parse_header(l, source, n)?,
        }
    };

    struct Row {
        entry: LexEntry,
        count: u64,
        lineno: usize,
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let pron: Vec<&str> = cols[1].split_whitespace().collect();
        let likeliest = match cols[4].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("likeliest flag must be 0 or 1, got `{other}`"),
                ))
            }
        };
        let (count, cost) = match mode {
            CostMode::Counts => {
                let c = cols[3].trim().parse::<u64>().map_err(|_| {
                    Error::parse(source, lineno, format!("bad count `{}`", cols[3]))
                })?;
                (c, 0.0)
            }
            CostMode::Costs => {
                let c = cols[3]
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| {
                        Error::parse(source, lineno, format!("bad cost `{}`", cols[3]))
                    })?;
                (0, c)
            }
        };
        let entry = LexEntry::new(cols[0], &pron, cols[2], cost, likeliest)
            .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        rows.push(Row {
            entry,
            count,
            lineno,
        });
    }

    if mode == CostMode::Costs {
        return Ok(rows.into_iter().map(|r| r.entry).collect());
    }

    // group by surface, keeping first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Row>> = HashMap::new();
    for r in rows {
        if !groups.contains_key(&r.entry.surface) {
            order.push(r.entry.surface.clone());
        }
        groups.entry(r.entry.surface.clone()).or_default().push(r);
    }
    let mut string_counts = HashMap::new();
    for s in &order {
        let likely: Vec<&Row> = groups[s].iter().filter(|r| r.entry.likeliest).collect();
        if likely.len() != 1 {
            return Err(Error::parse(
                source,
                groups[s][0].lineno,
                format!(
                    "{s}: expected exactly one likeliest line, found {}",
                    likely.len()
                ),
            ));
        }
        string_counts.insert(s.clone(), likely[0].count);
    }
    let total = match header_total {
        Some(t) => t,
        None => string_counts.values().sum(),
    };
    let mut out = Vec::new();
    for s in order {
        let group = groups.remove(&s).expect("grouped surface");
        let cost = cost_from_counts(string_counts[&s], total, config.large_cost)
            .map_err(|e| Error::parse(source, group[0].lineno, format!("{s}: {e}")))?;
        out.extend(assign_string_costs(
            group.into_iter().map(|r| r.entry).collect(),
            cost,
            config.large_cost,
        )?);
    }
    Ok(out)
}

fn parse_header(line: &str, source: &str, lineno: usize) -> Result<(CostMode, Option<u64>)> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some("#lexicon") || fields.next() != Some("v1") {
        return Err(Error::parse(
            source,
            lineno,
            "expected header `#lexicon v1 mode=counts|costs`",
        ));
    }
    let mut mode = None;
    let mut total = None;
    for f in fields {
        match f.split_once('=') {
            Some(("mode", "counts")) => mode = Some(CostMode::Counts),
            Some(("mode", "costs")) => mode = Some(CostMode::Costs),
            Some(("total", t)) => {
                total = Some(
                    t.parse::<u64>()
                        .map_err(|_| Error::parse(source, lineno, format!("bad total `{t}`")))?,
                )
            }
            _ => {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("unknown header field `{f}`"),
                ))
            }
        }
    }
    let mode =
        mode.ok_or_else(|| Error::parse(source, lineno, "header lacks mode=counts|costs"))?;
    Ok((mode, total))
}

/// Parses the `hanzi<TAB>pronunciation` fallback table.
pub fn parse_fallback_tsv(text: &str, source: &str) -> Result<BTreeMap<char, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((h, p)) = line.split_once('\t') else {
            return Err(Error::parse(
                source,
                lineno,
                "expected `hanzi<TAB>pronunciation`",
            ));
        };
        let mut chars = h.chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(Error::parse(
                source,
                lineno,
                format!("`{h}` is not a single character"),
            ));
        };
        let p = p.trim();
        if !is_syllable(p) {
            return Err(Error::parse(
                source,
                lineno,
                format!("malformed syllable `{p}`"),
            ));
        }
        if out.insert(c, p.to_string()).is_some() {
            return Err(Error::parse(
                source,
                lineno,
                format!("duplicate fallback for {c}"),
            ));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    fallback: BTreeMap<char, String>,
    config: LexiconConfig,
}

impl Lexicon {
    pub fn new(
        entries: Vec<LexEntry>,
        fallback: BTreeMap<char, String>,
        config: LexiconConfig,
    ) -> Result<Lexicon> {
        let mut seen = HashSet::new();
        for e in &entries {
            e.validate()?;
            if !seen.insert((e.surface.as_str(), e.category.as_str())) {
                return Err(Error::Validation(format!(
                    "duplicate entry {}/{}",
                    e.surface, e.category
                )));
            }
            if let Some(c) = e.surface.chars().find(|c| !fallback.contains_key(c)) {
                return Err(Error::Validation(format!(
                    "{}: hanzi {c} has no fallback pronunciation",
                    e.surface
                )));
            }
        }
        if !config.fallback_cost.is_finite() || !config.large_cost.is_finite() {
            return Err(Error::Validation("lexicon constants must be finite".into()));
        }
        Ok(Lexicon {
            entries,
            fallback,
            config,
        })
    }

    pub fn load(lexicon: &Path, fallback: &Path, config: LexiconConfig) -> Result<Lexicon> {
        let entries = parse_lexicon_tsv(
            &read_to_string(lexicon)?,
            &lexicon.display().to_string(),
            &config,
        )?;
        let fb = parse_fallback_tsv(&read_to_string(fallback)?, &fallback.display().to_string())?;
        Lexicon::new(entries, fb, config).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}: {m}", lexicon.display())),
            other => other,
        })
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn fallback(&self) -> &BTreeMap<char, String> {
        &self.fallback
    }

    pub fn fallback_pronunciation(&self, c: char) -> Option<&str> {
        self.fallback.get(&c).map(String::as_str)
    }

    pub fn covers(&self, c: char) -> bool {
        self.fallback.contains_key(&c)
    }

    pub fn config(&self) -> &LexiconConfig {
        &self.config
    }

    /// Cheapest entry for `surface`; the earlier entry wins a tie.
    pub fn cheapest(&self, surface: &str) -> Option<&LexEntry> {
        self.entries.iter().filter(|e| e.surface == surface).fold(
            None,
            |best: Option<&LexEntry>, e| match best {
                Some(b) if b.cost <= e.cost => Some(b),
                _ => Some(e),
            },
        )
    }

    /// Serializes in `costs` mode with four-decimal costs.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("#lexicon v1 mode=costs\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.4}\t{}",
                e.surface,
                e.pronunciation.join(" "),
                e.category,
                e.cost.value(),
                u8::from(e.likeliest)
            );
        }
        out
    }

    pub fn fallback_to_tsv(&self) -> String {
        self.fallback
            .iter()
            .map(|(c, p)| format!("{c}\t{p}\n"))
            .collect()
    }
}

/// The compiled lexicon plus the states other components attach to.
#[derive(Clone, Debug)]
pub struct CompiledLexicon {
    pub wfst: Wfst,
    /// Final node shared by all entries of a category.
    pub category_nodes: BTreeMap<String, StateId>,
    /// For each (surface, category) entry, the node just before its
    /// `ε:category` arc.
    pub entry_nodes: HashMap<(String, String), StateId>,
}

/// Compiles dictionary and fallback entries into one transducer. Entries
/// sharing a prefix of `hanzi:syllable` pairs share states.
pub fn build_lexicon_wfst(lex: &Lexicon, symbols: &Arc<SymbolTable>) -> Result<CompiledLexicon> {
    let mut wfst = Wfst::new(symbols.clone());
    let mut trie: HashMap<(StateId, u32, u32), StateId> = HashMap::new();
    let mut category_nodes = BTreeMap::new();
    let mut entry_nodes = HashMap::new();

    let fallback_entries = lex.fallback.iter().map(|(c, p)| LexEntry {
        surface: c.to_string(),
        pronunciation: vec![p.clone()],
        category: FALLBACK_CATEGORY.to_string(),
        cost: lex.config.fallback_cost,
        likeliest: true,
    });

    for e in lex.entries.iter().cloned().chain(fallback_entries) {
        e.validate()?;
        let mut cur = wfst.start();
        for (h, p) in e.surface.chars().zip(&e.pronunciation) {
            let i = symbols.intern_char(h);
            let o = symbols.intern(p);
            cur = match trie.get(&(cur, i, o)) {
                Some(&n) => n,
                None => {
                    let n = wfst.add_state();
                    wfst.add_arc(cur, Transition::new(i, o, Cost::ZERO, n));
                    trie.insert((cur, i, o), n);
                    n
                }
            };
        }
        let node = *category_nodes.entry(e.category.clone()).or_insert_with(|| {
            let n = wfst.add_state();
            wfst.set_final(n, Cost::ZERO);
            n
        });
        let tag = symbols.intern(&e.category);
        wfst.add_arc(cur, Transition::new(EPSILON, tag, e.cost, node));
        entry_nodes.entry((e.surface, e.category)).or_insert(cur);
    }
    Ok(CompiledLexicon {
        wfst,
        category_nodes,
        entry_nodes,
    })
}
