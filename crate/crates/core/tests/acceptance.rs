//! One PASS/FAIL line per acceptance criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use holodimer::conditioning::{conditional_probability, ConditionEvent, ConditionOptions};
use holodimer::glauber::{
    classify, configuration_weight, empirical_distribution, exact_chain, sample, total_variation, Move, Observable,
    OneTwoParams,
};
use holodimer::oracle::{
    bipartite_feasibility, enumerate_conditional, enumerate_vertex_model, general_feasibility, orthogonal_feasibility,
};
use holodimer::pfaffian::partition_function;
use holodimer::reduction::{reduce_model, EdgeBases, ReducedCell};
use holodimer::signatures::{
    check_bipartite, check_orthogonal, check_realizable_general, degenerate_sums, kron3, mat_vec, realize_with_rotations,
    BaseChange, ODD_ENTRIES,
};
use holodimer::spectral::{
    char_poly, char_poly_det, classify_spectral_curve, free_energy, local_probability_infinite, node_conditions,
    nth_roots, torus_symbol, C64,
};
use holodimer::{
    Classification, Color, EdgeType, FisherTorus, HoneyTorus, InfiniteTarget, LocalConfig, VertexModel,
    VertexSignature,
};
use num::rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cfg(s: &str) -> LocalConfig {
    s.parse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn uniform() -> VertexSignature {
    VertexSignature::one_two(1.0, 1.0, 1.0)
}

fn critical() -> VertexSignature {
    VertexSignature::one_two(4.0, 1.0, 1.0)
}

/// Per-edge rotations and per-vertex odd gates; the signature at each
/// vertex is whatever those rotations turn into its gate.
fn rotated_model(rng: &mut ChaCha8Rng, n: usize, angles: &dyn Fn(&mut ChaCha8Rng) -> f64, gate: &dyn Fn(&mut ChaCha8Rng) -> [f64; 8]) -> (VertexModel, Vec<BaseChange>) {
    let h = HoneyTorus::new(n).unwrap();
    let a: Vec<f64> = (0..h.edge_count()).map(|_| angles(rng)).collect();
    let sigs = (0..h.vertex_count()).map(|v| realize_with_rotations(h.incident(v).map(|e| a[e]), gate(rng))).collect();
    (VertexModel::new(h, sigs).unwrap(), a.iter().map(|&x| BaseChange::rotation(x)).collect())
}

/// Random edge rotations, then for each vertex a random odd gate redrawn
/// until the signature it produces is entrywise positive.
fn positive_model(rng: &mut ChaCha8Rng, n: usize) -> Option<(VertexModel, Vec<BaseChange>)> {
    let h = HoneyTorus::new(n).unwrap();
    let a: Vec<f64> = (0..h.edge_count()).map(|_| rng.random_range(0.0..PI)).collect();
    let mut sigs = Vec::new();
    for v in 0..h.vertex_count() {
        let angles = h.incident(v).map(|e| a[e]);
        let sig = (0..2000).find_map(|_| {
            let mut g = [0.0; 8];
            for i in ODD_ENTRIES {
                g[i] = rng.random_range(-2.0..2.0);
            }
            let s = realize_with_rotations(angles, g);
            s.0.iter().all(|&x| x > 0.0).then_some(s)
        })?;
        sigs.push(sig);
    }
    Some((VertexModel::new(h, sigs).unwrap(), a.iter().map(|&x| BaseChange::rotation(x)).collect()))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [1, 2] {
        let mut found = 0;
        while found < 12 {
            let Some((model, bases)) = positive_model(&mut rng, n) else { continue };
            found += 1;
            let red = reduce_model(&model, &bases).unwrap();
            let z = partition_function(&red.fisher).log_unnormalized().value();
            let o = enumerate_vertex_model(&model).unwrap().partition;
            worst = worst.max(rel(z, o));
            count += 1;
        }
    }
    let secs = t.elapsed();
    outcome(
        worst < 1e-9 && secs < Duration::from_secs(60),
        format!("{count} positive models at n = 1, 2, max relative error {worst:.2e}, {secs:.1?}"),
    )
}

fn criterion_2() -> Outcome {
    let s2 = 2f64.sqrt() / 2.0;
    let want = [0.0, s2, s2, 0.0, s2, 0.0, 0.0, -3.0 * s2];
    let model = VertexModel::periodic(1, uniform(), uniform()).unwrap();
    let red = reduce_model(&model, &EdgeBases::rotations([0.75 * PI; 3]).expand(model.lattice())).unwrap();
    let gate_err = red.gates.iter().flat_map(|g| g.0.iter().zip(&want).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
    let z_oracle = enumerate_vertex_model(&model).unwrap().partition;
    let pairing: f64 = uniform().0.iter().map(|x| x * x).sum();
    let z = partition_function(&red.fisher);
    let z_unnorm = z.log_unnormalized().value();
    let cell = ReducedCell::orthogonal(uniform(), uniform(), 1e-9).unwrap();
    let prod = cell.products();
    let prod_err = prod.iter().map(|p| (p - 1.0 / 9.0).abs()).fold(0.0, f64::max);
    let at = |z: f64, w: f64| char_poly(prod, C64::new(z, 0.0), C64::new(w, 0.0));
    let p_err = [
        (at(1.0, 1.0), 4.0 / 9.0),
        (at(1.0, -1.0), 100.0 / 81.0),
        (at(-1.0, 1.0), 100.0 / 81.0),
        (at(-1.0, -1.0), 100.0 / 81.0),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);
    let pass = gate_err < 1e-12
        && (z_oracle - 6.0).abs() < 1e-12
        && (pairing - 6.0).abs() < 1e-12
        && (z_unnorm - 6.0).abs() < 1e-9
        && prod_err < 1e-12
        && p_err < 1e-12
        && (z.z - 4.0 / 3.0).abs() < 1e-12;
    outcome(
        pass,
        format!(
            "gate err {gate_err:.1e}; Z oracle {z_oracle}, sum x_i y_i {pairing}, Pfaffian Z {:.15} (normalized {:.15}); products err {prod_err:.1e}; P err {p_err:.1e}",
            z_unnorm, z.z
        ),
    )
}

fn criterion_3() -> Outcome {
    let u = ReducedCell::orthogonal(uniform(), uniform(), 1e-9).unwrap();
    let du = classify_spectral_curve(u.products()).unwrap();
    let c = ReducedCell::orthogonal(critical(), critical(), 1e-9).unwrap();
    let p = c.products();
    let mut sorted = p;
    sorted.sort_by(f64::total_cmp);
    let prod_ok = sorted.iter().zip([1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0]).all(|(a, b)| (a - b).abs() < 1e-12);
    let dc = classify_spectral_curve(p).unwrap();
    let p11 = char_poly(p, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let nc = node_conditions(p, 0.0, 0.0);
    let pass = du.classification == Classification::Disjoint
        && prod_ok
        && dc.classification == (Classification::Node { z: 1, w: 1 })
        && p11.abs() < 1e-12
        && nc.satisfied;
    outcome(
        pass,
        format!(
            "uniform {:?}; critical products {:?} -> {:?}, P(1,1) = {p11:.1e}, grad {:?}, beta^2-4ag = {:.3e}",
            du.classification, p, dc.classification, nc.gradient, nc.hessian_discriminant
        ),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let cell = ReducedCell::orthogonal(critical(), critical(), 1e-9).unwrap();
    let target = InfiniteTarget { cell: (0, 0), color: Color::Black, config: cfg("011") };
    let p = local_probability_infinite(&cell, &[target], 512).unwrap();
    let exact =
        23.0 / 48.0 - 25.0 / (112.0 * PI) * (4.0f64 / 3.0).atan() - 65.0 / (336.0 * PI) * (44.0f64 / 117.0).atan();
    let secs = t.elapsed();
    outcome(
        (p - exact).abs() < 1e-3 && (p - 0.3911).abs() < 1e-3 && secs < Duration::from_secs(120),
        format!("grid 512: {p:.7} vs closed form {exact:.7}, {secs:.1?}"),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let cell = ReducedCell::orthogonal(uniform(), uniform(), 1e-9).unwrap();
    let targets = [
        InfiniteTarget { cell: (0, 0), color: Color::Black, config: cfg("100") },
        InfiniteTarget { cell: (0, 0), color: Color::White, config: cfg("100") },
    ];
    let p = local_probability_infinite(&cell, &targets, 256).unwrap();
    let params = OneTwoParams::new(1.0, 1.0, 1.0).unwrap();
    let obs = [Observable::DimerDensity { edge_type: EdgeType::A }];
    let report = sample(&params, 32, 10_000_000, 2024, &obs).unwrap().0;
    let est = &report.estimates[0];
    let z = (est.mean - p).abs() / est.std_error;
    let secs = t.elapsed();
    outcome(
        (p - 0.06).abs() < 5e-3 && z < 3.0 && secs < Duration::from_secs(300),
        format!(
            "integral {p:.6}; Glauber n=32, 1e7 steps: {:.6} +- {:.6} ({z:.2} SE), {secs:.1?}",
            est.mean, est.std_error
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    let mut events = 0;
    for _ in 0..20 {
        let (model, bases) = rotated_model(&mut rng, 2, &|r| r.random_range(0.0..PI), &|r| {
            let mut g = [0.0; 8];
            for i in ODD_ENTRIES {
                g[i] = r.random_range(0.3..2.0);
            }
            g
        });
        let red = reduce_model(&model, &bases).unwrap();
        let h = model.lattice();
        let v = rng.random_range(0..h.vertex_count());
        let mut targets = vec![(v, LocalConfig::from_index(rng.random_range(0..8)))];
        if rng.random_bool(0.5) {
            let w = h.across(v, h.incident(v)[rng.random_range(0..3)]);
            targets.push((w, LocalConfig::from_index(rng.random_range(0..8))));
        }
        let event = ConditionEvent::new(h, targets).unwrap();
        let o = enumerate_conditional(&model, &event.targets).unwrap();
        if o == 0.0 {
            continue;
        }
        let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap().probability;
        worst = worst.max(rel(p, o));
        events += 1;
    }
    outcome(worst < 1e-8, format!("{events} models with a nonzero event, max relative error {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let cell = holodimer::CellWeights { black: [0.8, -1.1, 0.5], white: [1.3, 0.7, -0.6] };
    let mut worst = 0.0f64;
    for n in [2, 3] {
        let f = FisherTorus::from_cell(n, cell).unwrap();
        for _ in 0..10 {
            let z = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
            let w = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
            let lhs = torus_symbol(&f, z, w).determinant();
            let mut rhs = C64::new(1.0, 0.0);
            for u in nth_roots(z, n) {
                for v in nth_roots(w, n) {
                    rhs *= char_poly_det(&cell, u, v);
                }
            }
            worst = worst.max((lhs - rhs).norm() / rhs.norm());
        }
    }
    outcome(worst < 1e-8, format!("20 points at n = 2, 3, max relative error {worst:.2e}"))
}

fn balance_pairs(n: usize, ints: [i64; 3]) -> (usize, usize) {
    let params = OneTwoParams::new(ints[0] as f64, ints[1] as f64, ints[2] as f64).unwrap();
    let chain = exact_chain(n, &params).unwrap();
    let h = &chain.lattice;
    let m = h.edge_count() as i64;
    let int = |t: EdgeType| ints[t.index()];
    let lambda = |s: u64| configuration_weight(h, &params, |e| s >> e & 1 == 1).unwrap() as i64;
    let kernel = |s: u64, e: usize| {
        let kind = classify(h, |f| s >> f & 1 == 1, e);
        match kind.ratio_letters(&params) {
            Some((x, y)) => Ratio::new(int(x) * int(x), m * int(y) * int(y)),
            None => Ratio::new(1, m),
        }
    };
    let (mut pairs, mut bad) = (0, 0);
    for &s in &chain.states {
        for e in 0..h.edge_count() {
            if classify(h, |f| s >> f & 1 == 1, e) == Move::Invalid {
                continue;
            }
            let t = s ^ 1 << e;
            pairs += 1;
            if Ratio::from(lambda(s)) * kernel(s, e) != Ratio::from(lambda(t)) * kernel(t, e) {
                bad += 1;
            }
        }
    }
    (pairs, bad)
}

fn criterion_8() -> Outcome {
    let mut pairs = 0;
    let mut bad = 0;
    for n in [1, 2] {
        for ints in [[1, 1, 1], [4, 1, 1], [3, 2, 5]] {
            let (p, b) = balance_pairs(n, ints);
            pairs += p;
            bad += b;
        }
    }
    let params = OneTwoParams::new(1.0, 1.0, 1.0).unwrap();
    let chain = exact_chain(2, &params).unwrap();
    let connected = chain.is_strongly_connected();
    let rows_ok = chain.hold.iter().all(|&h| (0.0..=1.0).contains(&h));
    let emp = empirical_distribution(&chain, &params, 10_000_000, 1000, 88).unwrap();
    let tv = total_variation(&emp, &chain.probabilities());
    outcome(
        bad == 0 && connected && rows_ok && tv < 0.01,
        format!(
            "{pairs} one-edge pairs, {bad} balance violations; n=2 strongly connected: {connected} ({} states); TV at 1e7 steps {tv:.4}",
            chain.states.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, sig) in [("uniform", uniform()), ("critical", critical())] {
        let cell = ReducedCell::orthogonal(sig, sig, 1e-9).unwrap();
        let weights = cell.cell_weights();
        let f = free_energy(cell.products(), 512).unwrap().value;
        let gaps: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let z = partition_function(&FisherTorus::from_cell(n, weights).unwrap());
                (z.log_z.ln_abs / (n * n) as f64 - f).abs()
            })
            .collect();
        let ok = gaps.windows(2).all(|w| w[1] <= w[0]) && gaps[2] < 5e-3;
        pass &= ok;
        parts.push(format!("{name} F = {f:.8}, gaps {:.2e} {:.2e} {:.2e}", gaps[0], gaps[1], gaps[2]));
    }
    outcome(pass, parts.join("; "))
}

fn random_w_type(rng: &mut ChaCha8Rng) -> VertexSignature {
    let mats: Vec<[[f64; 2]; 2]> = (0..3)
        .map(|_| std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
        .collect();
    let mut h = [0.0; 8];
    for i in [1, 2, 4] {
        h[i] = rng.random_range(0.3..2.0);
    }
    VertexSignature(mat_vec(&kron3(&mats[0], &mats[1], &mats[2]), &h))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut sigs = Vec::new();
    for _ in 0..18 {
        let angles = [0; 3].map(|_| rng.random_range(0.0..PI));
        let mut g = [0.0; 8];
        for i in ODD_ENTRIES {
            g[i] = rng.random_range(0.3..2.0);
        }
        sigs.push(realize_with_rotations(angles, g));
    }
    for _ in 0..17 {
        sigs.push(VertexSignature(std::array::from_fn(|_| rng.random_range(-1.0..1.0))));
    }
    for _ in 0..15 {
        sigs.push(random_w_type(&mut rng));
    }
    let tol = 1e-9;
    let (mut disagree, mut skipped, mut positives) = (0, 0, [0; 3]);
    for s in &sigs {
        let scale = s.max_abs().powi(2);
        if degenerate_sums(s).iter().any(|x| x.abs() < 1e-6 * scale) {
            skipped += 1;
            continue;
        }
        let checks = [
            (check_orthogonal(s, tol).unwrap().realizable, orthogonal_feasibility(s).feasible),
            (check_realizable_general(s, s, s, s, tol), general_feasibility(s).feasible),
            (check_bipartite(s, tol), bipartite_feasibility(s).feasible),
        ];
        for (k, (a, b)) in checks.iter().enumerate() {
            if a != b {
                disagree += 1;
            }
            if *a {
                positives[k] += 1;
            }
        }
    }
    outcome(
        disagree == 0,
        format!(
            "{} signatures, {skipped} in the degenerate set; realizable counts (orthogonal, general, bipartite) {positives:?}; {disagree} disagreements",
            sigs.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 holographic reduction vs enumeration", criterion_1),
        ("2 uniform 1-2 anchors", criterion_2),
        ("3 spectral classification", criterion_3),
        ("4 critical {011} probability", criterion_4),
        ("5 uniform a-dimer probability", criterion_5),
        ("6 conditioning vs enumeration", criterion_6),
        ("7 fundamental-domain product formula", criterion_7),
        ("8 Glauber correctness", criterion_8),
        ("9 free-energy convergence", criterion_9),
        ("10 realizability checkers vs search", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
