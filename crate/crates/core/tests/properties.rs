use std::f64::consts::PI;

use holodimer::glauber::init_dimer_state;
use holodimer::oracle::{enumerate_matchings, enumerate_vertex_model};
use holodimer::pfaffian::{partition_function, pfaffian, SkewMatrix};
use holodimer::reduction::reduce_model;
use holodimer::signatures::{
    check_bipartite, check_orthogonal, check_realizable_general, degenerate_sums, realize_with_rotations, z_vector,
    ODD_ENTRIES,
};
use holodimer::spectral::q_form;
use holodimer::{
    conditional_probability, BaseChange, ConditionEvent, ConditionOptions, EdgeBases, FisherTorus, HoneyTorus,
    LocalConfig, OneTwoParams, ReducedCell, TriangleWeights, VertexModel, VertexSignature,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn odd_gate(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 8] {
    let mut g = [0.0; 8];
    for i in ODD_ENTRIES {
        g[i] = rng.random_range(lo..hi);
    }
    g
}

/// Rotations on every edge and a random odd gate at every vertex.
fn rotated_model(seed: u64, n: usize) -> (VertexModel, Vec<BaseChange>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = HoneyTorus::new(n).unwrap();
    let angles: Vec<f64> = (0..h.edge_count()).map(|_| rng.random_range(0.0..PI)).collect();
    let sigs = (0..h.vertex_count())
        .map(|v| realize_with_rotations(h.incident(v).map(|e| angles[e]), odd_gate(&mut rng, 0.3, 2.0)))
        .collect();
    (VertexModel::new(h, sigs).unwrap(), angles.iter().map(|&a| BaseChange::rotation(a)).collect())
}

/// A 1x1 cell whose two signatures are entrywise positive.
fn positive_cell(seed: u64) -> Option<ReducedCell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..PI));
    let mut draw = || {
        (0..5000).find_map(|_| {
            let s = realize_with_rotations(angles, odd_gate(&mut rng, -2.0, 2.0));
            s.0.iter().all(|&x| x > 0.0).then_some(s)
        })
    };
    let (b, w) = (draw()?, draw()?);
    ReducedCell::new(b, w, EdgeBases::rotations(angles)).ok()
}

fn signature() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(0.05f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_vector_is_linear(r in signature(), s in signature(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mix = VertexSignature(std::array::from_fn(|i| a * r[i] + b * s[i]));
        let (zr, zs, zm) = (z_vector(&VertexSignature(r)), z_vector(&VertexSignature(s)), z_vector(&mix));
        for i in 0..8 {
            prop_assert!((zm[i] - a * zr[i] - b * zs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn palindromes_pass_orthogonal_check(half in prop::array::uniform4(0.05f64..3.0)) {
        let w = VertexSignature([half[0], half[1], half[2], half[3], half[3], half[2], half[1], half[0]]);
        if let Ok(c) = check_orthogonal(&w, 1e-9) {
            prop_assert!(c.realizable, "residual {}", c.residual);
        }
    }

    #[test]
    fn positive_scaling_changes_no_check(seed in any::<u64>(), lambda in 0.01f64..100.0, rotated in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = if rotated {
            let angles: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..PI));
            realize_with_rotations(angles, odd_gate(&mut rng, 0.2, 2.0))
        } else {
            VertexSignature(std::array::from_fn(|_| rng.random_range(0.05..3.0)))
        };
        let t = s.scaled(lambda);
        let tol = 1e-9;
        if let (Ok(a), Ok(b)) = (check_orthogonal(&s, tol), check_orthogonal(&t, tol)) {
            prop_assert_eq!(a.realizable, b.realizable);
        }
        prop_assert_eq!(check_bipartite(&s, tol), check_bipartite(&t, tol));
        prop_assert_eq!(check_realizable_general(&s, &s, &s, &s, tol), check_realizable_general(&t, &t, &t, &t, tol));
    }

    #[test]
    fn identical_signatures_general_iff_orthogonal(seed in any::<u64>(), rotated in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = if rotated {
            let angles: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..PI));
            realize_with_rotations(angles, odd_gate(&mut rng, 0.2, 2.0))
        } else {
            VertexSignature(std::array::from_fn(|_| rng.random_range(0.05..3.0)))
        };
        let scale = s.max_abs().powi(2);
        prop_assume!(degenerate_sums(&s).iter().all(|d| d.abs() > 1e-6 * scale));
        let Ok(o) = check_orthogonal(&s, 1e-9) else { return Ok(()) };
        prop_assert_eq!(check_realizable_general(&s, &s, &s, &s, 1e-9), o.realizable);
    }

    #[test]
    fn pfaffian_squares_to_determinant(half in 1usize..6, seed in any::<u64>()) {
        let m = 2 * half;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SkewMatrix::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                a.set(i, j, rng.random_range(-2.0..2.0));
            }
        }
        let pf = pfaffian(&a).unwrap();
        let det = a.determinant();
        prop_assert!((pf * pf - det).abs() <= 1e-9 * det.abs().max(1e-12), "{} vs {}", pf * pf, det);
    }

    #[test]
    fn fisher_partition_counts_matchings(n in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HoneyTorus::new(n).unwrap();
        let w = (0..h.vertex_count())
            .map(|_| TriangleWeights::new(
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.5..2.0),
            ))
            .collect();
        let f = FisherTorus::new(h, w).unwrap();
        let edges: Vec<(usize, usize, f64)> = f.edges().iter().map(|e| (e.from, e.to, e.weight)).collect();
        let exact = enumerate_matchings(f.vertex_count(), &edges).unwrap();
        prop_assert!(rel(partition_function(&f).z, exact) < 1e-9);
    }

    #[test]
    fn one_by_one_product_identities(seed in any::<u64>()) {
        let cell = positive_cell(seed);
        prop_assume!(cell.is_some());
        let cell = cell.unwrap();
        let [a, b, c, d] = cell.raw_products();
        let pairing: f64 = (0..8).map(|i| cell.black.0[i] * cell.white.0[i]).sum();
        prop_assert!((a + b - c - d) * (a + c - b - d) * (a + d - b - c) > 0.0);
        prop_assert!(a + b + c + d > 0.0);
        prop_assert!(rel(a + b + c + d, pairing) < 1e-9);
    }

    #[test]
    fn spectral_form_is_nonnegative(seed in any::<u64>()) {
        let cell = positive_cell(seed);
        prop_assume!(cell.is_some());
        let cell = cell.unwrap();
        let p = cell.products();
        let s = 1.0 + p.iter().map(|x| x * x).sum::<f64>();
        let g = 128;
        for k in 0..g {
            for l in 0..g {
                let (t, u) = (2.0 * PI * k as f64 / g as f64, 2.0 * PI * l as f64 / g as f64);
                prop_assert!(q_form(p, t, u) >= -1e-10 * s);
            }
        }
    }

    #[test]
    fn glauber_keeps_constraint_and_replays(seed in any::<u64>(), n in 1usize..6, a in 0.2f64..5.0, b in 0.2f64..5.0) {
        let params = OneTwoParams::new(a, b, 1.0).unwrap();
        let h = HoneyTorus::new(n).unwrap();
        let mut s = init_dimer_state(&h, seed);
        let mut t = init_dimer_state(&h, seed);
        for _ in 0..3000 {
            let (x, y) = (s.step(&params), t.step(&params));
            prop_assert_eq!(x, y);
            prop_assert!(s.is_valid());
        }
        prop_assert_eq!(s.occupied_edges(), t.occupied_edges());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reduction_preserves_partition(n in 1usize..=2, seed in any::<u64>()) {
        let (model, bases) = rotated_model(seed, n);
        let red = reduce_model(&model, &bases).unwrap();
        let z = partition_function(&red.fisher).log_unnormalized().value();
        let exact = enumerate_vertex_model(&model).unwrap().partition;
        prop_assert!(rel(z, exact) < 1e-9, "{} vs {}", z, exact);
    }

    #[test]
    fn conditional_marginals_sum_to_one(seed in any::<u64>(), v in 0usize..8) {
        let (model, bases) = rotated_model(seed, 2);
        let red = reduce_model(&model, &bases).unwrap();
        let exact = enumerate_vertex_model(&model).unwrap();
        let Some(marginals) = exact.marginals else { return Ok(()) };
        let mut total = 0.0;
        for c in LocalConfig::all() {
            let event = ConditionEvent::new(model.lattice(), vec![(v, c)]).unwrap();
            let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap().probability;
            prop_assert!((p - marginals[v][c.index()]).abs() < 1e-8);
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shifted_rotations_give_same_probabilities(seed in any::<u64>(), v in 0usize..8, c in 0usize..8) {
        // rotating every edge by an extra pi/2 swaps base rows, a gauge change
        let (model, bases) = rotated_model(seed, 2);
        let shifted: Vec<BaseChange> = bases.iter().map(|b| b.swap_rows()).collect();
        let event = ConditionEvent::new(model.lattice(), vec![(v, LocalConfig::from_index(c))]).unwrap();
        let p = |bs: &[BaseChange]| {
            let red = reduce_model(&model, bs).unwrap();
            conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap().probability
        };
        prop_assert!((p(&bases) - p(&shifted)).abs() < 1e-9);
    }
}
