mod common;

use std::collections::BTreeMap;

use archprob::analysis::{sweep, RowSelector, RowTarget, SweepSpec};
use archprob::bn::{joint_probability, marginal_brute_force, marginal_ve, Evidence, State};
use archprob::Error;
use proptest::prelude::*;
use rand::Rng;

use common::{random_evidence, random_network, rng};

fn all_assignments(ids: &[String]) -> impl Iterator<Item = BTreeMap<String, State>> + '_ {
    (0..1usize << ids.len()).map(move |bits| {
        ids.iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), State::from_index((bits >> i) & 1)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ve_matches_enumeration(seed in any::<u64>(), n in 3usize..=10) {
        let mut r = rng(seed);
        let net = random_network(&mut r, n, 3).compile().unwrap();
        let target = net.ids()[r.gen_range(0..n)].clone();
        let evidence = random_evidence(&mut r, net.ids(), &target, 3);
        match (marginal_ve(&net, &target, &evidence), marginal_brute_force(&net, &target, &evidence)) {
            (Ok(ve), Ok(bf)) => {
                prop_assert!((ve.high - bf.high).abs() <= 1e-12, "{} vs {}", ve.high, bf.high);
                prop_assert!((ve.low - bf.low).abs() <= 1e-12);
            }
            (Err(Error::ImpossibleEvidence(_)), Err(Error::ImpossibleEvidence(_))) => {}
            (a, b) => prop_assert!(false, "disagree: {a:?} / {b:?}"),
        }
    }

    #[test]
    fn target_in_evidence_is_point_mass(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 5, 2).compile().unwrap();
        let target = net.ids()[0].clone();
        let mut evidence = random_evidence(&mut r, net.ids(), &target, 2);
        evidence.insert(target.as_str(), State::High).unwrap();
        if let Ok(d) = marginal_ve(&net, &target, &evidence) {
            prop_assert_eq!((d.low, d.high), (0.0, 1.0));
        }
    }

    #[test]
    fn joint_sums_to_one(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng(seed);
        let net = random_network(&mut r, n, 3).compile().unwrap();
        let total: f64 = all_assignments(net.ids())
            .map(|a| joint_probability(&net, &a).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-9, "{total}");
    }

    #[test]
    fn inference_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 8, 3).compile().unwrap();
        let target = net.ids()[3].clone();
        let evidence = random_evidence(&mut r, net.ids(), &target, 2);
        let first = marginal_ve(&net, &target, &evidence).ok();
        let rebuilt = random_network(&mut rng(seed), 8, 3).compile().unwrap();
        for _ in 0..3 {
            let again = marginal_ve(&rebuilt, &target, &evidence).ok();
            prop_assert_eq!(first.map(|d| d.high.to_bits()), again.map(|d| d.high.to_bits()));
        }
    }

    /// An unconditioned marginal is affine in any single CPT entry.
    #[test]
    fn marginal_is_affine_in_one_entry(seed in any::<u64>(), n in 2usize..=9) {
        let mut r = rng(seed);
        let net = random_network(&mut r, n, 3).compile().unwrap();
        let var = r.gen_range(0..n);
        let row = r.gen_range(0..1usize << net.parents(var).len());
        let target = net.ids()[r.gen_range(0..n)].clone();
        let at = |t: f64| {
            let changed = net.with_p_high(var, row, t).unwrap();
            marginal_brute_force(&changed, &target, &Evidence::new()).unwrap().high
        };
        let (p0, p1) = (at(0.0), at(1.0));
        for t in [0.13, 0.5, 0.77] {
            prop_assert!((at(t) - (p0 + t * (p1 - p0))).abs() <= 1e-12);
        }
    }

    #[test]
    fn sweep_leaves_network_untouched(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, 6, 2).compile().unwrap();
        let before = net.clone();
        let spec = SweepSpec::new(
            net.ids()[0].clone(),
            vec![RowTarget { variable: net.ids()[1].clone(), rows: RowSelector::All }],
        )
        .range(0.0, 1.0, 0.1);
        let result = sweep(&net, &spec).unwrap();
        prop_assert_eq!(result.points.len(), 11);
        prop_assert_eq!(&net, &before);
    }
}

#[test]
fn enumeration_refuses_large_networks() {
    let net = random_network(&mut rng(7), 26, 2).compile().unwrap();
    let target = net.ids()[0].clone();
    assert!(marginal_brute_force(&net, &target, &Evidence::new()).is_err());
    assert!(marginal_ve(&net, &target, &Evidence::new()).is_ok());
}
