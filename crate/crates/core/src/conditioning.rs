//! Conditioning a reduced vertex model on local configurations at finitely
//! many vertices of a finite torus.
//!
//! Forcing configuration `c` at vertex `v` replaces `r_v` by `r_v(c) e_c`,
//! whose matchgate `m'` has both parities. Splitting each target's `m'` into
//! its odd and even parts and expanding the product gives `2^p` terms, of
//! which only those with an even number of even parts can have perfect
//! matchings. Each surviving variant is evaluated by expanding its gadgets
//! over external patterns: the pattern's entry times the Pfaffian count of
//! the graph with the gadget's triangle edges dropped and its unmatched
//! corners deleted.

use serde::Serialize;

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::lattice::{FisherTorus, HoneyTorus, TriangleWeights};
use crate::model::VertexModel;
use crate::pfaffian::{ratio, restricted_partition, LogValue, Restriction};
use crate::reduction::{fisher_weights, lattice_path, Gadget, MatchgateSignature, Reduction};
use crate::signatures::{mat_vec, vertex_transform, BaseChange, Mat2, EVEN_ENTRIES, ODD_ENTRIES};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEvent {
    /// `(honeycomb vertex, forced configuration)`.
    pub targets: Vec<(usize, LocalConfig)>,
}

impl ConditionEvent {
    pub fn new(lattice: &HoneyTorus, targets: Vec<(usize, LocalConfig)>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidInput("an event needs at least one target".into()));
        }
        for (k, &(v, _)) in targets.iter().enumerate() {
            if v >= lattice.vertex_count() {
                return Err(Error::InvalidInput(format!("vertex {v} out of range")));
            }
            if targets[..k].iter().any(|&(u, _)| u == v) {
                return Err(Error::InvalidInput(format!("vertex {v} listed twice")));
            }
        }
        Ok(ConditionEvent { targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// New base change on an edge next to a conditioned vertex, in the layout
/// `[[n0, n1], [p0, p1]]`: exactly one entry is zeroed according to whether
/// the edge is occupied in the vertex configuration and in the dimer pattern.
pub fn split_base_change(t: &BaseChange, in_config: bool, in_dimer: bool) -> Mat2 {
    let mut m = [t.n, t.p];
    match (in_config, in_dimer) {
        (false, true) => m[0][0] = 0.0,
        (false, false) => m[0][1] = 0.0,
        (true, true) => m[1][0] = 0.0,
        (true, false) => m[1][1] = 0.0,
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitPart {
    /// Dimer digit on each edge leading to a conditioned vertex.
    pub dimer: [Option<bool>; 3],
    pub signature: [f64; 8],
}

/// Splits the signature `r_w = (T_a (x) T_b (x) T_c)^T m_w` of a vertex next
/// to conditioned vertices. `presence[k]` is the occupation of edge `k` in
/// the forced configuration, `None` if that edge does not lead to a
/// conditioned vertex. The parts sum to `r_w`.
pub fn split_signature(
    gate: &MatchgateSignature,
    bases: &[BaseChange; 3],
    presence: [Option<bool>; 3],
) -> Vec<SplitPart> {
    let known: Vec<usize> = (0..3).filter(|&k| presence[k].is_some()).collect();
    let mut parts = Vec::new();
    for mask in 0..1usize << known.len() {
        let mut dimer = [None; 3];
        for (i, &k) in known.iter().enumerate() {
            dimer[k] = Some(mask >> i & 1 == 1);
        }
        let mut m = [0.0; 8];
        for (p, x) in m.iter_mut().enumerate() {
            if known.iter().all(|&k| (p >> (2 - k) & 1 == 1) == dimer[k].unwrap()) {
                *x = gate.0[p];
            }
        }
        if m.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mats: Vec<Mat2> = (0..3)
            .map(|k| match (presence[k], dimer[k]) {
                (Some(c), Some(d)) => split_base_change(&bases[k], c, d),
                _ => [bases[k].n, bases[k].p],
            })
            .collect();
        parts.push(SplitPart { dimer, signature: mat_vec(&crate::signatures::kron3(&mats[0], &mats[1], &mats[2]), &m) });
    }
    parts
}

/// Even gadget: a center joined to the a, b, c corners by `x`, `y`, `z`,
/// with all three triangle edges of weight `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvenGadget {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl EvenGadget {
    pub fn from_signature(m: &[f64; 8]) -> Result<Self> {
        let (x, y, z) = (m[3], m[5], m[6]);
        let sum = x + y + z;
        let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let t = if sum.abs() > 1e-14 * scale {
            m[0] / sum
        } else if m[0].abs() <= 1e-14 * scale {
            0.0
        } else {
            return Err(Error::DegenerateSplit);
        };
        Ok(EvenGadget { x, y, z, t })
    }

    pub fn signature(&self) -> [f64; 8] {
        [self.t * (self.x + self.y + self.z), 0.0, 0.0, self.x, 0.0, self.y, self.z, 0.0]
    }

    pub fn gadget(&self) -> Gadget {
        Gadget {
            vertex_count: 4,
            edges: vec![(1, 2, self.t), (0, 2, self.t), (0, 1, self.t), (3, 0, self.x), (3, 1, self.y), (3, 2, self.z)],
            external: vec![0, 1, 2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "parity", rename_all = "snake_case")]
pub enum TargetGadget {
    Odd { signature: [f64; 8] },
    Even { gadget: EvenGadget },
}

impl TargetGadget {
    pub fn signature(&self) -> [f64; 8] {
        match self {
            TargetGadget::Odd { signature } => *signature,
            TargetGadget::Even { gadget } => gadget.signature(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModifiedGadgets {
    pub event: ConditionEvent,
    /// `M_v (r_v(c) e_c) / d_v` for each target.
    pub local: Vec<MatchgateSignature>,
    /// `2^{p-1}` gadget assignments with an even number of even gadgets.
    pub variants: Vec<Vec<TargetGadget>>,
}

/// Normalized matchgate of the signature restricted to `config` at `v`.
pub fn target_matchgate(
    model: &VertexModel,
    reduction: &Reduction,
    v: usize,
    config: LocalConfig,
) -> MatchgateSignature {
    let h = model.lattice();
    let inc = h.incident(v);
    let bases = [reduction.bases[inc[0]], reduction.bases[inc[1]], reduction.bases[inc[2]]];
    let mut e = [0.0; 8];
    e[config.index()] = model.signature(v).0[config.index()];
    let d = reduction.fisher.triangle(v).d;
    MatchgateSignature(mat_vec(&vertex_transform(&bases, h.vertex(v).color), &e).map(|x| x / d))
}

fn parity_part(m: &[f64; 8], idx: [usize; 4]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for i in idx {
        out[i] = m[i];
    }
    out
}

pub fn build_condition_variants(
    model: &VertexModel,
    reduction: &Reduction,
    event: &ConditionEvent,
) -> Result<ModifiedGadgets> {
    let local: Vec<MatchgateSignature> =
        event.targets.iter().map(|&(v, c)| target_matchgate(model, reduction, v, c)).collect();
    let odd: Vec<TargetGadget> =
        local.iter().map(|m| TargetGadget::Odd { signature: parity_part(&m.0, ODD_ENTRIES) }).collect();
    let p = local.len();
    // a single target has no even variant
    let even: Vec<TargetGadget> = if p < 2 {
        Vec::new()
    } else {
        local
            .iter()
            .map(|m| EvenGadget::from_signature(&parity_part(&m.0, EVEN_ENTRIES)).map(|gadget| TargetGadget::Even { gadget }))
            .collect::<Result<_>>()?
    };
    let variants = (0..1usize << p)
        .filter(|mask| mask.count_ones() % 2 == 0)
        .map(|mask| (0..p).map(|k| if mask >> k & 1 == 1 { even[k] } else { odd[k] }).collect())
        .collect();
    Ok(ModifiedGadgets { event: event.clone(), local, variants })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ConditionOptions {
    /// Permit the 1x1 torus, where a vertex meets its neighbor across
    /// more than one edge.
    pub allow_single_cell: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalResult {
    pub probability: f64,
    /// Contribution of each variant, in the order of
    /// [`ModifiedGadgets::variants`].
    pub variant_terms: Vec<f64>,
}

fn pattern_sum(f: &FisherTorus, targets: &[usize], sigs: &[[f64; 8]]) -> LogValue {
    let mut terms = Vec::new();
    for code in 0..8usize.pow(targets.len() as u32) {
        let pats: Vec<usize> = (0..targets.len()).map(|k| code / 8usize.pow(k as u32) % 8).collect();
        let coef: f64 = pats.iter().zip(sigs).map(|(&p, s)| s[p]).product();
        if coef == 0.0 {
            continue;
        }
        let mut r = Restriction { removed: Vec::new(), dropped: targets.to_vec() };
        for (&v, &p) in targets.iter().zip(&pats) {
            for k in 0..3 {
                if p >> (2 - k) & 1 == 0 {
                    r.removed.push(3 * v + k);
                }
            }
        }
        terms.push((coef, restricted_partition(f, &r)));
    }
    LogValue::linear_combination(&terms)
}

/// One variant's share of the probability. Pfaffian minors count the
/// matchings of a restricted torus correctly only when the deleted corners
/// of each triangle come in pairs, which fails for even gadgets. Swapping
/// base rows along paths joining the even targets in pairs turns their even
/// parts into odd gates and leaves every other gate odd, without changing
/// the sum.
fn variant_ratio(
    model: &VertexModel,
    reduction: &Reduction,
    event: &ConditionEvent,
    gadgets: &[TargetGadget],
    z: LogValue,
) -> Result<f64> {
    let h = model.lattice();
    let targets: Vec<usize> = event.targets.iter().map(|&(v, _)| v).collect();
    let even: Vec<usize> = (0..gadgets.len()).filter(|&k| matches!(gadgets[k], TargetGadget::Even { .. })).collect();
    if even.is_empty() {
        let sigs: Vec<[f64; 8]> = gadgets.iter().map(TargetGadget::signature).collect();
        return Ok(ratio(pattern_sum(&reduction.fisher, &targets, &sigs), z));
    }
    let mut flip = vec![false; h.edge_count()];
    for pair in even.chunks(2) {
        for e in lattice_path(h, targets[pair[0]], targets[pair[1]]) {
            flip[e] = !flip[e];
        }
    }
    let bases: Vec<BaseChange> =
        reduction.bases.iter().zip(&flip).map(|(b, &f)| if f { b.swap_rows() } else { *b }).collect();
    let transform = |v: usize| {
        let inc = h.incident(v);
        vertex_transform(&[bases[inc[0]], bases[inc[1]], bases[inc[2]]], h.vertex(v).color)
    };
    let mut weights = Vec::with_capacity(h.vertex_count());
    let (mut log_scale, mut sign) = (0.0, 1.0);
    for v in 0..h.vertex_count() {
        if targets.contains(&v) {
            weights.push(TriangleWeights::new(1.0, 1.0, 1.0, 1.0));
            continue;
        }
        let w = fisher_weights(&MatchgateSignature(mat_vec(&transform(v), &model.signature(v).0)))?;
        if w.d == 0.0 {
            return Err(Error::DegenerateGadget { vertex: v });
        }
        let q = w.d / reduction.fisher.triangle(v).d;
        log_scale += q.abs().ln();
        sign *= q.signum();
        weights.push(w);
    }
    let fisher = FisherTorus::new(h.clone(), weights)?;
    let sigs: Vec<[f64; 8]> = event
        .targets
        .iter()
        .map(|&(v, c)| {
            let mut e = [0.0; 8];
            e[c.index()] = model.signature(v).0[c.index()];
            let d = reduction.fisher.triangle(v).d;
            parity_part(&mat_vec(&transform(v), &e), ODD_ENTRIES).map(|x| x / d)
        })
        .collect();
    let value = pattern_sum(&fisher, &targets, &sigs).mul(LogValue { sign, ln_abs: log_scale });
    Ok(ratio(value, z))
}

/// Probability of the event under the vertex model, from the reduced
/// Fisher torus.
pub fn conditional_probability(
    model: &VertexModel,
    reduction: &Reduction,
    event: &ConditionEvent,
    options: ConditionOptions,
) -> Result<ConditionalResult> {
    if model.n() == 1 && !options.allow_single_cell {
        return Err(Error::InvalidParameter(
            "conditioning on the 1x1 torus needs the single-cell override".into(),
        ));
    }
    if reduction.fisher.lattice() != model.lattice() {
        return Err(Error::InvalidInput("reduction and model live on different tori".into()));
    }
    let z = restricted_partition(&reduction.fisher, &Restriction::default());
    if z.is_zero() {
        return Err(Error::InconsistentWeights("partition function vanishes".into()));
    }
    let gadgets = build_condition_variants(model, reduction, event)?;
    let variant_terms: Vec<f64> = gadgets
        .variants
        .iter()
        .map(|g| variant_ratio(model, reduction, event, g, z))
        .collect::<Result<_>>()?;
    Ok(ConditionalResult { probability: variant_terms.iter().sum(), variant_terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_conditional;
    use crate::reduction::{matchgate_signature_of_gadget, reduce_model, EdgeBases};
    use crate::signatures::{realize_with_rotations, VertexSignature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg(s: &str) -> LocalConfig {
        s.parse().unwrap()
    }

    fn reduced(n: usize, r: VertexSignature) -> (VertexModel, Reduction) {
        let model = VertexModel::periodic(n, r, r).unwrap();
        let bases = EdgeBases::rotations([0.75 * PI; 3]).expand(model.lattice());
        let red = reduce_model(&model, &bases).unwrap();
        (model, red)
    }

    fn random_model(rng: &mut ChaCha8Rng, n: usize) -> (VertexModel, Reduction) {
        let h = HoneyTorus::new(n).unwrap();
        let angles: Vec<f64> = (0..h.edge_count()).map(|_| rng.random_range(0.0..PI)).collect();
        let sigs = (0..h.vertex_count())
            .map(|v| {
                let inc = h.incident(v);
                let mut gate = [0.0; 8];
                for i in ODD_ENTRIES {
                    gate[i] = rng.random_range(0.3..2.0);
                }
                realize_with_rotations(inc.map(|e| angles[e]), gate)
            })
            .collect();
        let model = VertexModel::new(h, sigs).unwrap();
        let bases: Vec<BaseChange> = angles.iter().map(|&a| BaseChange::rotation(a)).collect();
        let red = reduce_model(&model, &bases).unwrap();
        (model, red)
    }

    #[test]
    fn split_table() {
        let t = BaseChange::from_matrix([[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let [n, p] = [t.n, t.p];
        assert_eq!(split_base_change(&t, false, true), [[0.0, n[1]], [p[0], p[1]]]);
        assert_eq!(split_base_change(&t, false, false), [[n[0], 0.0], [p[0], p[1]]]);
        assert_eq!(split_base_change(&t, true, true), [[n[0], n[1]], [0.0, p[1]]]);
        assert_eq!(split_base_change(&t, true, false), [[n[0], n[1]], [p[0], 0.0]]);
    }

    #[test]
    fn split_parts_sum_to_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let bases: [BaseChange; 3] = std::array::from_fn(|_| {
            BaseChange::from_matrix([[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]])
            .unwrap()
        });
        let mut gate = [0.0; 8];
        for i in ODD_ENTRIES {
            gate[i] = rng.random_range(0.5..1.5);
        }
        let gate = MatchgateSignature(gate);
        let mats = bases.map(|b| [b.n, b.p]);
        let r = mat_vec(&crate::signatures::kron3(&mats[0], &mats[1], &mats[2]), &gate.0);
        for (presence, count) in [
            ([Some(true), None, None], 2),
            ([None, Some(true), Some(false)], 4),
            ([Some(true), Some(true), Some(false)], 4),
        ] {
            let parts = split_signature(&gate, &bases, presence);
            assert_eq!(parts.len(), count);
            for i in 0..8 {
                let s: f64 = parts.iter().map(|p| p.signature[i]).sum();
                assert!((s - r[i]).abs() < 1e-14, "{presence:?}");
            }
        }
    }

    #[test]
    fn even_gadget_realizes_even_part() {
        let g = EvenGadget::from_signature(&[1.5, 0.0, 0.0, 0.25, 0.0, -0.5, 1.0, 0.0]).unwrap();
        let sig = matchgate_signature_of_gadget(&g.gadget()).unwrap();
        for (a, b) in sig.iter().zip(g.signature()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(g.signature()[0], 1.5);
        assert_eq!(
            EvenGadget::from_signature(&[1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0]),
            Err(Error::DegenerateSplit)
        );
    }

    #[test]
    fn uniform_a_edge_gates() {
        // one target on each end of an a-edge, both forced to the a-edge alone
        let (model, red) = reduced(2, VertexSignature::one_two(1.0, 1.0, 1.0));
        let h = model.lattice().clone();
        let event = ConditionEvent::new(&h, vec![(h.black(0, 0), cfg("100")), (h.white(0, 0), cfg("100"))]).unwrap();
        let g = build_condition_variants(&model, &red, &event).unwrap();
        assert_eq!(g.variants.len(), 2);
        let s = 2f64.sqrt() / 4.0;
        let d = red.fisher.triangle(0).d;
        let local: Vec<f64> = g.local[0].0.iter().map(|x| x * d).collect();
        let want = [s, s, s, s, -s, -s, -s, -s];
        for (a, b) in local.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn single_target_has_one_variant() {
        let (model, red) = reduced(2, VertexSignature::one_two(4.0, 1.0, 1.0));
        let event = ConditionEvent::new(model.lattice(), vec![(0, cfg("011"))]).unwrap();
        let g = build_condition_variants(&model, &red, &event).unwrap();
        assert_eq!(g.variants.len(), 1);
        assert!(matches!(g.variants[0][0], TargetGadget::Odd { .. }));
    }

    #[test]
    fn matches_oracle_on_two_by_two() {
        for r in [VertexSignature::one_two(1.0, 1.0, 1.0), VertexSignature::one_two(4.0, 1.0, 1.0)] {
            let (model, red) = reduced(2, r);
            let h = model.lattice().clone();
            let mut total = 0.0;
            for c in LocalConfig::all() {
                let event = ConditionEvent::new(&h, vec![(h.black(1, 0), c)]).unwrap();
                let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap();
                let o = enumerate_conditional(&model, &event.targets).unwrap();
                assert!((p.probability - o).abs() < 1e-10, "{c}: {} vs {o}", p.probability);
                total += p.probability;
            }
            assert!((total - 1.0).abs() < 1e-9);
            let event = ConditionEvent::new(&h, vec![(h.black(0, 0), cfg("100")), (h.white(0, 0), cfg("100"))]).unwrap();
            let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap();
            let o = enumerate_conditional(&model, &event.targets).unwrap();
            assert!((p.probability - o).abs() < 1e-10);
        }
    }

    #[test]
    fn random_models_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..3 {
            let (model, red) = random_model(&mut rng, 2);
            let h = model.lattice().clone();
            let v = rng.random_range(0..h.vertex_count());
            let w = h.across(v, h.incident(v)[rng.random_range(0..3)]);
            let event = ConditionEvent::new(&h, vec![
                (v, LocalConfig::from_index(rng.random_range(0..8))),
                (w, LocalConfig::from_index(rng.random_range(0..8))),
            ])
            .unwrap();
            let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap();
            let o = enumerate_conditional(&model, &event.targets).unwrap();
            assert!((p.probability - o).abs() <= 1e-8 * o.abs().max(1e-3), "{} vs {o}", p.probability);
        }
    }

    #[test]
    fn every_adjacent_pair_matches_oracle() {
        // includes the pairs joined across a seam of the torus
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (model, red) = random_model(&mut rng, 2);
        let h = model.lattice().clone();
        for (e, edge) in h.edges().iter().enumerate() {
            let cs = [LocalConfig::from_index(rng.random_range(0..8)), LocalConfig::from_index(rng.random_range(0..8))];
            let event = ConditionEvent::new(&h, vec![(edge.black, cs[0]), (edge.white, cs[1])]).unwrap();
            let p = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap();
            let o = enumerate_conditional(&model, &event.targets).unwrap();
            assert!((p.probability - o).abs() <= 1e-10 * o.abs().max(1e-3), "edge {e}: {} vs {o}", p.probability);
        }
    }

    #[test]
    fn gauge_equivalent_reductions_agree() {
        let r = VertexSignature::one_two(1.0, 1.0, 1.0);
        let model = VertexModel::periodic(2, r, r).unwrap();
        let base = EdgeBases::rotations([0.75 * PI; 3]);
        let shifted = EdgeBases::rotations([0.25 * PI, 0.25 * PI, 0.75 * PI]);
        let scaled = EdgeBases(base.0.map(|b| BaseChange { n: [3.0 * b.n[0], 0.25 * b.n[1]], p: [3.0 * b.p[0], 0.25 * b.p[1]] }));
        let event = ConditionEvent::new(model.lattice(), vec![(2, cfg("110"))]).unwrap();
        let p: Vec<f64> = [base, shifted, scaled]
            .iter()
            .map(|b| {
                let red = reduce_model(&model, &b.expand(model.lattice())).unwrap();
                conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap().probability
            })
            .collect();
        assert!((p[0] - p[1]).abs() < 1e-9 && (p[0] - p[2]).abs() < 1e-9);
    }

    #[test]
    fn single_cell_needs_override() {
        let (model, red) = reduced(1, VertexSignature::one_two(1.0, 1.0, 1.0));
        let event = ConditionEvent::new(model.lattice(), vec![(0, cfg("100"))]).unwrap();
        let err = conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap_err();
        assert!(err.is_validation());
        let p = conditional_probability(&model, &red, &event, ConditionOptions { allow_single_cell: true }).unwrap();
        let o = enumerate_conditional(&model, &event.targets).unwrap();
        assert!((p.probability - o).abs() < 1e-12);
    }
}
