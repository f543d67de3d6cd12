mod common;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treedist::approx::stt_lower_bound;
use treedist::canon::{canonical_key, is_isomorphic};
use treedist::deg3::{degree3_representation, is_representation, simulate_on_representation};
use treedist::gadget::{build_gadget, cover_to_script, planted_instance};
use treedist::oracle::{distances_from, enumerate_trees, exact_stt_distance, random_phylogeny, Distance};
use treedist::stt::replay;
use treedist::{parse_newick, Weight};

use common::random_op;

#[test]
fn exact_distance_is_a_metric_on_five_leaves() {
    let trees: Vec<_> = enumerate_trees(5, 5).into_iter().map(|p| p.into_tree()).collect();
    let keys: Vec<_> = trees.iter().map(canonical_key).collect();
    let rows: Vec<HashMap<_, u32>> = trees.iter().map(|t| distances_from(t, 10)).collect();
    let d = |i: usize, j: usize| rows[i][&keys[j]];
    for i in 0..trees.len() {
        assert_eq!(d(i, i), 0);
        for j in 0..trees.len() {
            assert_eq!(d(i, j), d(j, i));
            assert_eq!(d(i, j) == 0, i == j);
            assert!(stt_lower_bound(&trees[i], &trees[j]).unwrap() <= d(i, j) as usize);
            for k in (0..trees.len()).step_by(7) {
                assert!(d(i, k) <= d(i, j) + d(j, k));
            }
        }
    }
}

#[test]
fn exact_distance_examples() {
    let t = |s: &str| parse_newick(s, false).unwrap().into_tree();
    let star = t("(a,b,c,d);");
    let q = t("(a,b,(c,d));");
    assert_eq!(exact_stt_distance(&star, &q, 5).unwrap(), Distance::Exact(1));
    assert_eq!(exact_stt_distance(&q, &t("(a,c,(b,d));"), 5).unwrap(), Distance::Exact(2));
    assert_eq!(exact_stt_distance(&q, &t("(a,c,(b,d));"), 1).unwrap(), Distance::Exceeded);
}

#[test]
fn simulation_on_unit_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..200 {
        let x = random_phylogeny(9, 6, false, seed).into_tree().to_weighted();
        let Some(op) = random_op(&x, &mut rng) else { continue };
        let rep = degree3_representation(&x).unwrap();
        let sim = simulate_on_representation(&x, &op, &rep).unwrap();
        assert_eq!(sim.script.total(), treedist::stt::cost_of(&x, &op).unwrap());
        assert!(is_representation(&sim.x, &sim.rep.tree));
    }
}

#[test]
fn gadget_arm_costs() {
    for n in 2..=4usize {
        let (inst, cover) = planted_instance(n.min(2), n, n as u64).unwrap();
        let pair = build_gadget(&inst).unwrap();
        let script = cover_to_script(&pair, &cover).unwrap();
        let nn = (n * n) as i64;
        let mut at = 0;
        for i in 0..n {
            let (len, cost) = if cover.contains(&i) { (8, 3 * nn + 6) } else { (3, 3 * nn + 2) };
            let arm: Weight = script.costs[at..at + len].iter().sum();
            assert_eq!(arm, Weight::from_integer(cost), "arm {i} of n={n}");
            at += len;
        }
        assert_eq!(at, script.len());
        let (end, _) = replay(&pair.t, &script).unwrap();
        assert!(is_isomorphic(&end, &pair.t_prime).is_some());
    }
}

#[test]
fn gadget_rejects_a_single_subset() {
    assert!(planted_instance(1, 1, 0).and_then(|(i, _)| build_gadget(&i)).is_err());
}
