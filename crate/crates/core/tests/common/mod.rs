#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;
use wseg::lexicon::{LexEntry, Lexicon, LexiconConfig};
use wseg::wfst::Cost;

pub const OCTOPUS_SENTENCE: &str = "日文章魚怎麼說";

pub fn fallback(pairs: &[(char, &str)]) -> BTreeMap<char, String> {
    pairs.iter().map(|(c, p)| (*c, p.to_string())).collect()
}

pub fn entry(surface: &str, pron: &str, cat: &str, cost: f64) -> LexEntry {
    let syl: Vec<&str> = pron.split(' ').collect();
    LexEntry::new(surface, &syl, cat, cost, true).unwrap()
}

/// The lexicon behind the "How do you say octopus in Japanese?" lattice.
/// 日文+章魚 (20.91) beats 日+文章+魚 (27.82).
pub fn octopus_lexicon() -> Lexicon {
    let entries = vec![
        entry("日", "ri4", "nc", 10.00),
        entry("日文", "ri4 wen2", "nc", 10.63),
        entry("文章", "wen2 zhang1", "nc", 9.51),
        entry("章魚", "zhang1 yu2", "nc", 10.28),
        entry("魚", "yu2", "nc", 8.31),
        entry("怎麼", "zen3 me0", "adv", 7.96),
        entry("說", "shuo1", "vb", 6.55),
    ];
    let fb = fallback(&[
        ('日', "ri4"),
        ('文', "wen2"),
        ('章', "zhang1"),
        ('魚', "yu2"),
        ('怎', "zen3"),
        ('麼', "me0"),
        ('說', "shuo1"),
    ]);
    Lexicon::new(entries, fb, LexiconConfig::default()).unwrap()
}

pub const ALPHABET: [(char, &str); 4] = [
    ('甲', "jia3"),
    ('乙', "yi3"),
    ('丙', "bing3"),
    ('丁', "ding1"),
];

/// Up to `max_entries` random entries of 1 to 3 hanzi over [`ALPHABET`].
pub fn random_lexicon(rng: &mut StdRng, max_entries: usize) -> Lexicon {
    let n = rng.gen_range(1..=max_entries);
    let mut entries: Vec<LexEntry> = Vec::new();
    while entries.len() < n {
        let len = rng.gen_range(1..=3);
        let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..ALPHABET.len())).collect();
        let surface: String = idx.iter().map(|&i| ALPHABET[i].0).collect();
        let pron: Vec<&str> = idx.iter().map(|&i| ALPHABET[i].1).collect();
        if entries.iter().any(|e| e.surface == surface) {
            continue;
        }
        let cost = rng.gen_range(0.5..14.0);
        entries.push(LexEntry::new(&surface, &pron, "nc", cost, true).unwrap());
    }
    Lexicon::new(entries, fallback(&ALPHABET), LexiconConfig::default()).unwrap()
}

pub fn random_sentence(rng: &mut StdRng, max_len: usize) -> String {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())].0)
        .collect()
}

/// Cheapest way to read `piece` as a single word: any entry with that
/// surface, or the fallback for a lone hanzi.
fn piece_cost(lex: &Lexicon, piece: &[char]) -> Cost {
    let s: String = piece.iter().collect();
    let mut best = Cost::INFINITY;
    for e in lex.entries().iter().filter(|e| e.surface == s) {
        best = best.plus(e.cost);
    }
    if piece.len() == 1 && lex.covers(piece[0]) {
        best = best.plus(lex.config().fallback_cost);
    }
    best
}

/// Every tiling of `sentence` with its cost, by enumerating all
/// 2^(n-1) cut sets.
pub fn all_tilings(lex: &Lexicon, sentence: &str) -> Vec<(Cost, Vec<String>)> {
    let chars: Vec<char> = sentence.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << (n - 1)) {
        let mut words = Vec::new();
        let mut cost = Cost::ZERO;
        let mut start = 0;
        for i in 1..=n {
            if i == n || mask & (1 << (i - 1)) != 0 {
                cost = cost + piece_cost(lex, &chars[start..i]);
                words.push(chars[start..i].iter().collect());
                start = i;
            }
        }
        if cost.is_finite() {
            out.push((cost, words));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// The two smallest costs among all points in a multiset.
pub fn two_smallest(costs: &[Cost]) -> (Cost, Cost) {
    let mut v = costs.to_vec();
    v.sort_by(Cost::total_cmp);
    (v[0], v.get(1).copied().unwrap_or(Cost::INFINITY))
}

/// Orthogonal Procrustes: residual of the best rotation/reflection of
/// `x` onto `y` after centering both (Frobenius norm).
pub fn procrustes_residual(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    use nalgebra::DMatrix;
    let dims = y[0].len();
    let pad = |m: &[Vec<f64>]| {
        let mut a = DMatrix::from_fn(m.len(), dims, |i, j| m[i].get(j).copied().unwrap_or(0.0));
        let mean = a.row_mean();
        for mut r in a.row_iter_mut() {
            r -= &mean;
        }
        a
    };
    let (a, b) = (pad(x), pad(y));
    let svd = (a.transpose() * &b).svd(true, true);
    let r = svd.u.unwrap() * svd.v_t.unwrap();
    (a * r - b).norm()
}

pub fn pairwise_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect()
}

/// A name model over two family hanzi (plus their pair as a double
/// family name) and three given hanzi `g`, with explicit tables. Radical
/// classes are {g0, g1} and {g2}; g1 is the one unseen given hanzi in
/// first and single position and g0 in second position, so each is
/// scored by its class estimate. `override_pair` adds a bigram
/// probability for (g0, g1).
pub fn name_fixture(f: [char; 2], g: [char; 3], override_pair: bool) -> wseg::names::NameModel {
    use std::collections::BTreeSet;
    use wseg::names::{GivenPosition, NameModel, NameShape, RadicalClass, RadicalClassTable};

    let class_table = || {
        let classes = BTreeMap::from([
            (
                "X".to_string(),
                RadicalClass {
                    members: BTreeSet::from([g[0], g[1]]),
                    unseen: 1,
                    singletons: 1,
                },
            ),
            (
                "Y".to_string(),
                RadicalClass {
                    members: BTreeSet::from([g[2]]),
                    unseen: 0,
                    singletons: 1,
                },
            ),
        ]);
        RadicalClassTable::from_classes(classes, 10, 2).unwrap()
    };
    let model = NameModel {
        p_name_in_text: 0.01,
        family_single: BTreeMap::from([(f[0], 0.6), (f[1], 0.3)]),
        family_double: BTreeMap::from([((f[0], f[1]), 0.8)]),
        given: BTreeMap::from([
            (
                GivenPosition::First,
                BTreeMap::from([(g[0], 0.5), (g[2], 0.3)]),
            ),
            (
                GivenPosition::Second,
                BTreeMap::from([(g[1], 0.6), (g[2], 0.2)]),
            ),
            (
                GivenPosition::Single,
                BTreeMap::from([(g[0], 0.45), (g[2], 0.35)]),
            ),
        ]),
        type_prior: BTreeMap::from([
            (NameShape::SfSg, 0.15),
            (NameShape::SfDg, 0.70),
            (NameShape::DfSg, 0.05),
            (NameShape::DfDg, 0.10),
        ]),
        bigram_override: if override_pair {
            BTreeMap::from([((g[0], g[1]), 0.12)])
        } else {
            BTreeMap::new()
        },
        unseen_given: GivenPosition::ALL
            .iter()
            .map(|&p| (p, class_table()))
            .collect(),
        pronunciations: BTreeMap::new(),
    };
    model.validate().unwrap();
    model
}

/// Every (family, given) reading with the fixture's family options and a
/// one- or two-hanzi given name over `g`.
pub fn name_candidates(f: [char; 2], g: [char; 3]) -> Vec<String> {
    let families = [
        f[0].to_string(),
        f[1].to_string(),
        format!("{}{}", f[0], f[1]),
    ];
    let mut givens: Vec<String> = g.iter().map(|c| c.to_string()).collect();
    for a in g {
        for b in g {
            givens.push(format!("{a}{b}"));
        }
    }
    families
        .iter()
        .flat_map(|fam| givens.iter().map(move |giv| format!("{fam}{giv}")))
        .collect()
}

/// Cost of the cheapest split of `s` into a licit name.
pub fn best_name_cost(model: &wseg::names::NameModel, s: &str) -> Cost {
    wseg::names::name_splits(s)
        .iter()
        .map(|(f, g)| wseg::names::name_cost(model, f, g))
        .fold(Cost::INFINITY, Cost::plus)
}

/// All finite path costs of `m` restricted to `s`, by recursive
/// enumeration of the lattice.
pub fn lattice_costs(m: &wseg::wfst::Wfst, s: &str) -> Vec<f64> {
    use wseg::wfst::{left_restrict, Wfst};
    let t = m.symbols();
    let Some(labels) = s.chars().map(|c| t.get_char(c)).collect::<Option<Vec<_>>>() else {
        return Vec::new();
    };
    let lattice = left_restrict(m, &Wfst::linear_acceptor(t.clone(), &labels)).unwrap();
    fn go(m: &wseg::wfst::Wfst, s: usize, acc: f64, out: &mut Vec<f64>) {
        if let Some(f) = m.final_cost(s) {
            out.push(acc + f.value());
        }
        for a in m.arcs(s) {
            go(m, a.next, acc + a.cost.value(), out);
        }
    }
    let mut out = Vec::new();
    if !lattice.is_empty() {
        go(&lattice, lattice.start(), 0.0, &mut out);
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn plural_rule(tokens: u64, singletons: u64, p: f64) -> wseg::morphology::AffixRule {
    wseg::morphology::AffixRule {
        affix_surface: "們".into(),
        affix_pronunciation: vec!["men0".into()],
        base_category: "nc".into(),
        result_tag: "\\PL".into(),
        tokens,
        singletons,
        prob_text_affix: p,
    }
}

/// 南瓜 (nc, 9.5), 將 (adv 5.98, likeliest; nc 20.0), with 們 covered by
/// the fallback table.
pub fn morphology_lexicon() -> Lexicon {
    let entries = vec![
        entry("南瓜", "nan2 gua1", "nc", 9.5),
        entry("將", "jiang1", "adv", 5.98),
        LexEntry::new("將", &["jiang4"], "nc", 20.0, false).unwrap(),
    ];
    let fb = fallback(&[
        ('南', "nan2"),
        ('瓜', "gua1"),
        ('將', "jiang1"),
        ('們', "men0"),
    ]);
    Lexicon::new(entries, fb, LexiconConfig::default()).unwrap()
}

/// A random tiling of `[0, len)`.
pub fn random_tiling(rng: &mut StdRng, len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=len {
        if i == len || rng.gen_bool(0.45) {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Interval segmentations of a corpus, one list per sentence.
pub type CorpusIntervals = Vec<Vec<(usize, usize)>>;

/// Two random segmentations of the same random sentence lengths.
pub fn random_pair(rng: &mut StdRng) -> (CorpusIntervals, CorpusIntervals) {
    let lens: Vec<usize> = (0..rng.gen_range(1..6))
        .map(|_| rng.gen_range(1..12))
        .collect();
    let a = lens.iter().map(|&n| random_tiling(rng, n)).collect();
    let b = lens.iter().map(|&n| random_tiling(rng, n)).collect();
    (a, b)
}

/// A random planar configuration of `n` points.
pub fn random_points(rng: &mut StdRng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
        .collect()
}
