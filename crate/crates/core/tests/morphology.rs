mod common;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wseg::lexicon::{build_lexicon_wfst, LexEntry, Lexicon, LexiconConfig};
use wseg::morphology::*;
use wseg::segmenter::{Components, ModelConfig, SegmentationModel};
use wseg::wfst::{Cost, SymbolTable};

#[test]
fn generals_cost_their_listed_whole_word_cost() {
    let t = SymbolTable::new();
    let c = build_lexicon_wfst(&morphology_lexicon(), &t).unwrap();
    let seen = vec![SeenDerived::new("將們", "們", Cost::new(15.02)).unwrap()];
    let m = attach_affix(&c, &plural_rule(10, 3, 0.01), &seen)
        .unwrap()
        .wfst;
    let costs = lattice_costs(&m, "將們");
    assert!(costs.iter().any(|c| (c - 15.02).abs() < 1e-9));
    assert!((costs[0] - 15.02).abs() < 1e-9);
}

#[test]
fn derived_words_fold_into_one_segment() {
    let comps = Components {
        affix_rules: vec![plural_rule(10, 3, 0.01)],
        seen_derived: vec![SeenDerived::new("將們", "們", Cost::new(15.02)).unwrap()],
        ..Components::default()
    };
    let cfg = ModelConfig {
        morphology: true,
        ..ModelConfig::default()
    };
    let m = SegmentationModel::build(morphology_lexicon(), &comps, cfg).unwrap();
    let seg = m.segment("南瓜們").unwrap();
    assert_eq!(seg.surfaces(), ["南瓜們"]);
    assert_eq!(seg.words[0].category, "nc\\PL");
    assert_eq!(seg.words[0].pronunciation, ["nan2", "gua1", "men0"]);
    let unseen = unseen_construction_cost(&plural_rule(10, 3, 0.01)).unwrap();
    assert!(seg.total_cost.approx_eq(Cost::new(9.5) + unseen, 1e-9));

    let seg = m.segment("將們").unwrap();
    assert_eq!(seg.surfaces(), ["將們"]);
    assert!(seg.total_cost.approx_eq(Cost::new(15.02), 1e-9));
    assert!(seg.words[0].cost.approx_eq(Cost::new(15.02), 1e-9));
}

const POOL: [(char, &str); 6] = [
    ('南', "nan2"),
    ('瓜', "gua1"),
    ('將', "jiang4"),
    ('學', "xue2"),
    ('生', "sheng1"),
    ('人', "ren2"),
];

#[test]
fn random_rules_add_unseen_cost_to_base() {
    let mut rng = StdRng::seed_from_u64(0x6d6f7270);
    for _ in 0..50 {
        let len = rng.gen_range(1..=3);
        let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..POOL.len())).collect();
        let base: String = idx.iter().map(|&i| POOL[i].0).collect();
        let pron: Vec<&str> = idx.iter().map(|&i| POOL[i].1).collect();
        let base_cost = rng.gen_range(1.0..18.0);
        let tokens = rng.gen_range(1..5000);
        let singletons = rng.gen_range(1..=tokens);
        let p_text = rng.gen_range(1e-4..1.0);
        let rule = plural_rule(tokens, singletons, p_text);

        let mut fb: Vec<(char, &str)> = POOL.to_vec();
        fb.push(('們', "men0"));
        let lex = Lexicon::new(
            vec![LexEntry::new(&base, &pron, "nc", base_cost, true).unwrap()],
            fallback(&fb),
            LexiconConfig::default(),
        )
        .unwrap();
        let t = SymbolTable::new();
        let m = attach_affix(&build_lexicon_wfst(&lex, &t).unwrap(), &rule, &[])
            .unwrap()
            .wfst;
        let derived = format!("{base}們");
        let costs = lattice_costs(&m, &derived);
        let want = base_cost - ((singletons as f64 / tokens as f64) * p_text).ln();
        assert_eq!(costs.len(), 1, "{derived}");
        assert!(
            (costs[0] - want).abs() < 1e-9,
            "{derived}: {} vs {want}",
            costs[0]
        );
    }
}

#[test]
fn doubling_tokens_adds_ln_two() {
    let a = unseen_construction_cost(&plural_rule(100, 7, 0.02)).unwrap();
    let b = unseen_construction_cost(&plural_rule(200, 7, 0.02)).unwrap();
    assert!((b.value() - a.value() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn seen_word_for_unknown_affix_rejected() {
    let t = SymbolTable::new();
    let c = build_lexicon_wfst(&morphology_lexicon(), &t).unwrap();
    let seen = vec![SeenDerived::new("將們", "們", Cost::new(15.02)).unwrap()];
    assert!(attach_affixes(&c, &[], &seen).is_err());
}
