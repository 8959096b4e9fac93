mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use wseg::names::*;
use wseg::params::ModelParams;
use wseg::wfst::{Cost, SymbolTable};

const F: [char; 2] = ['周', '王'];
const G: [char; 3] = ['恩', '來', '明'];

fn compiled(model: &NameModel) -> wseg::wfst::Wfst {
    build_name_wfst(model, &SymbolTable::new(), &BTreeMap::new())
}

/// Finite costs of every licit split, sorted.
fn split_costs(model: &NameModel, s: &str) -> Vec<f64> {
    let mut v: Vec<f64> = name_splits(s)
        .iter()
        .map(|(f, g)| name_cost(model, f, g))
        .filter(|c| c.is_finite())
        .map(Cost::value)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn wfst_paths_match_name_cost_exhaustively() {
    for override_pair in [false, true] {
        let model = name_fixture(F, G, override_pair);
        let m = compiled(&model);
        let candidates = name_candidates(F, G);
        assert!(candidates.len() <= 100);
        let mut finite = 0;
        for s in &candidates {
            let want = split_costs(&model, s);
            let got = lattice_costs(&m, s);
            assert_eq!(got.len(), want.len(), "{s}");
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "{s}: {g} vs {w}");
            }
            finite += want.len();
        }
        assert!(finite > 20);
    }
}

#[test]
fn override_changes_only_its_pair() {
    let plain = name_fixture(F, G, false);
    let over = name_fixture(F, G, true);
    for s in name_candidates(F, G) {
        for (f, g) in name_splits(&s) {
            let changed = !name_cost(&plain, &f, &g).approx_eq(name_cost(&over, &f, &g), 1e-12);
            let is_pair = g == GivenName::Double(G[0], G[1]);
            assert_eq!(changed, is_pair, "{s}");
        }
    }
}

#[test]
fn hand_product_and_override_ratio() {
    let mut model = name_fixture(F, G, false);
    model.family_single = BTreeMap::from([('周', 0.1)]);
    model
        .given
        .get_mut(&GivenPosition::First)
        .unwrap()
        .insert('恩', 0.05);
    model
        .given
        .get_mut(&GivenPosition::Second)
        .unwrap()
        .insert('來', 0.02);
    let (f, g) = (FamilyName::Single('周'), GivenName::Double('恩', '來'));
    let c = name_cost(&model, &f, &g);
    assert!((c.value() - -(7e-7f64).ln()).abs() < 1e-9);
    assert!((c.value() - 14.172).abs() < 1e-3);
    model.bigram_override.insert(('恩', '來'), 0.005);
    let c2 = name_cost(&model, &f, &g);
    assert!((c.value() - c2.value() - 5f64.ln()).abs() < 1e-9);
}

#[test]
fn certain_factors_cost_nothing() {
    let mut model = name_fixture(F, G, false);
    model.p_name_in_text = 1.0;
    model.family_single = BTreeMap::from([('周', 1.0)]);
    model
        .given
        .insert(GivenPosition::Single, BTreeMap::from([('明', 1.0)]));
    model.type_prior = BTreeMap::from([(NameShape::SfSg, 1.0)]);
    let c = name_cost(&model, &FamilyName::Single('周'), &GivenName::Single('明'));
    assert_eq!(c, Cost::ZERO);
}

#[test]
fn unlisted_family_is_not_a_name() {
    let model = name_fixture(F, G, false);
    assert!(name_cost(&model, &FamilyName::Single('恩'), &GivenName::Single('明')).is_infinite());
    assert!(lattice_costs(&compiled(&model), "恩明").is_empty());
}

#[test]
fn five_hanzi_rejected() {
    let model = name_fixture(F, G, false);
    assert!(lattice_costs(&compiled(&model), "周王恩來明").is_empty());
}

const TABLES: &str = "\
周\tfam1\t40\tzhou1
王\tfam1\t55
司馬\tfam2\t4
恩\tgiv1\t3\ten1
明\tgiv1\t1
芳\tgiv1\t1
華\tgiv1\t2
來\tgiv2\t1\tlai2
華\tgiv2\t3
英\tgiv2\t1
珍\tgiv2\t2
明\tgivS\t1
英\tgivS\t4
珍\tgivS\t1
恩來\tgivP\t5
";

const RADICALS: &str = "\
恩\tHEART
志\tHEART
明\tSUN
昌\tSUN
晶\tSUN
芳\tGRASS
英\tGRASS
華\tGRASS
蘭\tGRASS
珍\tJADE
玉\tJADE
鼠\tRAT
來\tWOOD
李\tWOOD
";

fn trained() -> NameModel {
    let counts = parse_name_tables_tsv(TABLES, "names.tsv").unwrap();
    let radicals = parse_radicals_tsv(RADICALS, "radicals.tsv").unwrap();
    let params = ModelParams::parse(
        "p_name_in_text=0.01\nprior.SF+SG=0.2\nprior.SF+DG=0.7\nprior.DF+SG=0.04\nprior.DF+DG=0.06\n",
        "p.cfg",
    )
    .unwrap();
    NameModel::train(&counts, &radicals, &params).unwrap()
}

#[test]
fn trained_positions_are_normalized() {
    let model = trained();
    for pos in GivenPosition::ALL {
        let seen: f64 = model.given[&pos].values().sum();
        let unseen = &model.unseen_given[&pos];
        assert!(
            (unseen.unseen_mass() - unseen.singletons() as f64 / unseen.tokens() as f64).abs()
                < 1e-12
        );
        assert!((seen + unseen.unseen_mass() - 1.0).abs() < 1e-9, "{pos:?}");
    }
    assert!((model.family_single.values().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(model.bigram_override.len(), 1);
    // RAT has no seen members in any position but still gets mass
    assert!(model.unseen_given[&GivenPosition::First]
        .unseen_hanzi_cost("RAT")
        .unwrap()
        .is_finite());
}

#[test]
fn zhou_enlai_is_single_family_double_given() {
    let model = trained();
    let m = build_name_wfst(&model, &SymbolTable::new(), &BTreeMap::new());
    let costs = lattice_costs(&m, "周恩來");
    assert_eq!(costs.len(), 1);
    let c = name_cost(
        &model,
        &FamilyName::Single('周'),
        &GivenName::Double('恩', '來'),
    );
    assert!((costs[0] - c.value()).abs() < 1e-9);
    // the double-family reading 周恩 is not listed
    assert!(name_cost(
        &model,
        &FamilyName::Double('周', '恩'),
        &GivenName::Single('來')
    )
    .is_infinite());

    let t = SymbolTable::new();
    let m = build_name_wfst(&model, &t, &BTreeMap::new());
    let labels: Vec<_> = "周恩來".chars().map(|c| t.get_char(c).unwrap()).collect();
    let lattice =
        wseg::wfst::left_restrict(&m, &wseg::wfst::Wfst::linear_acceptor(t.clone(), &labels))
            .unwrap();
    let p = wseg::wfst::best_path(&lattice).unwrap();
    assert_eq!(p.output_string(&t), "zhou1 en1 lai2 np");
}

#[test]
fn trained_wfst_agrees_on_all_short_strings() {
    let model = trained();
    let m = compiled(&model);
    let alphabet: Vec<char> = "周王司馬恩明來英鼠".chars().collect();
    for a in &alphabet {
        for b in &alphabet {
            for c in &alphabet {
                let s: String = [*a, *b, *c].iter().collect();
                let want = split_costs(&model, &s);
                let got = lattice_costs(&m, &s);
                assert_eq!(got.len(), want.len(), "{s}");
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9, "{s}");
                }
            }
        }
    }
}

#[test]
fn priors_must_sum_to_one() {
    let counts = parse_name_tables_tsv(TABLES, "names.tsv").unwrap();
    let radicals = parse_radicals_tsv(RADICALS, "radicals.tsv").unwrap();
    let params = ModelParams::parse("p_name_in_text=0.01\nprior.SF+SG=0.5\n", "p.cfg").unwrap();
    assert!(matches!(
        NameModel::train(&counts, &radicals, &params),
        Err(wseg::Error::Validation(_))
    ));
}

fn class_table() -> impl Strategy<Value = (BTreeMap<String, RadicalClass>, u64, u64)> {
    prop::collection::vec((1usize..12, 0usize..12, 0usize..12), 3..=10).prop_filter_map(
        "need two singleton classes of distinct size",
        |layout| {
            let mut classes = BTreeMap::new();
            let mut next = 0x4e00u32;
            let mut singletons = 0;
            for (i, (size, n0, n1)) in layout.into_iter().enumerate() {
                let n0 = n0.min(size) as u64;
                let n1 = n1.min(size - n0 as usize) as u64;
                singletons += n1;
                let members: BTreeSet<char> = (0..size)
                    .map(|k| char::from_u32(next + k as u32).unwrap())
                    .collect();
                next += size as u32;
                classes.insert(
                    format!("C{i}"),
                    RadicalClass {
                        members,
                        unseen: n0,
                        singletons: n1,
                    },
                );
            }
            let sizes: BTreeSet<usize> = classes
                .values()
                .filter(|c| c.singletons > 0)
                .map(|c| c.size())
                .collect();
            (sizes.len() >= 2).then_some((classes, singletons * 3 + 5, singletons))
        },
    )
}

proptest! {
    #[test]
    fn unseen_mass_is_n1_over_n((classes, n, n1) in class_table()) {
        let any_unseen = classes.values().any(|c| c.unseen > 0);
        let t = RadicalClassTable::from_classes(classes, n, n1).unwrap();
        let want = if any_unseen { n1 as f64 / n as f64 } else { 0.0 };
        prop_assert!((t.unseen_mass() - want).abs() < 1e-9);
        for (id, c) in t.classes() {
            let cost = t.unseen_hanzi_cost(id).unwrap();
            prop_assert_eq!(cost.is_finite(), c.unseen > 0);
        }
    }

    #[test]
    fn smooth_is_positive((classes, n, n1) in class_table()) {
        let t = RadicalClassTable::from_classes(classes, n, n1).unwrap();
        for c in t.classes().values() {
            prop_assert!(t.smooth().eval(c.size() as f64) > 0.0);
        }
    }
}

fn members(base: u32, n: usize) -> BTreeSet<char> {
    (0..n)
        .map(|k| char::from_u32(base + k as u32).unwrap())
        .collect()
}

#[test]
fn equal_size_equal_unseen_classes_cost_the_same() {
    let classes = BTreeMap::from([
        (
            "A".to_string(),
            RadicalClass {
                members: members(0x4e00, 4),
                unseen: 2,
                singletons: 0,
            },
        ),
        (
            "B".to_string(),
            RadicalClass {
                members: members(0x4f00, 4),
                unseen: 2,
                singletons: 1,
            },
        ),
        (
            "C".to_string(),
            RadicalClass {
                members: members(0x5000, 9),
                unseen: 1,
                singletons: 3,
            },
        ),
    ]);
    let t = RadicalClassTable::from_classes(classes, 40, 4).unwrap();
    assert_eq!(
        t.unseen_hanzi_cost("A").unwrap(),
        t.unseen_hanzi_cost("B").unwrap()
    );
}

#[test]
fn larger_smoothed_class_is_cheaper() {
    // growing power law: the larger class has the larger S
    let classes = BTreeMap::from([
        (
            "S".to_string(),
            RadicalClass {
                members: members(0x4e00, 3),
                unseen: 2,
                singletons: 1,
            },
        ),
        (
            "L".to_string(),
            RadicalClass {
                members: members(0x4f00, 8),
                unseen: 2,
                singletons: 4,
            },
        ),
    ]);
    let t = RadicalClassTable::from_classes(classes, 30, 5).unwrap();
    assert!(t.smooth().exponent > 0.0);
    assert!(t.unseen_hanzi_cost("L").unwrap() < t.unseen_hanzi_cost("S").unwrap());
}

#[test]
fn rat_class_gets_positive_smooth() {
    let classes = BTreeMap::from([
        (
            "JADE".to_string(),
            RadicalClass {
                members: members(0x4e00, 10),
                unseen: 3,
                singletons: 2,
            },
        ),
        (
            "GRASS".to_string(),
            RadicalClass {
                members: members(0x4f00, 100),
                unseen: 50,
                singletons: 20,
            },
        ),
        (
            "RAT".to_string(),
            RadicalClass {
                members: members(0x5000, 5),
                unseen: 5,
                singletons: 0,
            },
        ),
    ]);
    let t = RadicalClassTable::from_classes(classes, 500, 22).unwrap();
    assert!((t.smooth().eval(10.0) - 2.0).abs() < 1e-9);
    assert!(t.smooth().eval(5.0) > 0.0);
    assert!(t.unseen_hanzi_cost("RAT").unwrap().is_finite());
}
