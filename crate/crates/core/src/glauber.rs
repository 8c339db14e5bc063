//! Single-edge Glauber dynamics for the 1-2 model.
//!
//! A step picks one of the `3n^2` edges uniformly and toggles it when the
//! result is still a 1-2 configuration. Toggles that change the weight are
//! exactly the additions of a `q`-edge between two vertices that each hold
//! only a `p`-edge (and the reverse deletions); they change the weight by
//! `(r/p)^2` and are accepted with `min(1, (r/p)^2)` or its reciprocal.
//! Every other legal toggle leaves the weight alone and is always accepted.

use std::collections::VecDeque;

use bitvec::vec::BitVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::lattice::{Color, EdgeType, HoneyTorus};
use crate::signatures::VertexSignature;

/// Edge weights of the 1-2 model `(0, c, b, a, a, b, c, 0)`: a vertex with a
/// single `p`-edge weighs `p`, one with edges `{p, q}` weighs the third
/// letter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneTwoParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl OneTwoParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if [a, b, c].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter(format!("1-2 weights must be positive, got ({a}, {b}, {c})")));
        }
        Ok(OneTwoParams { a, b, c })
    }

    pub fn weight(&self, t: EdgeType) -> f64 {
        match t {
            EdgeType::A => self.a,
            EdgeType::B => self.b,
            EdgeType::C => self.c,
        }
    }

    pub fn signature(&self) -> VertexSignature {
        VertexSignature::one_two(self.a, self.b, self.c)
    }

    /// Weight of a vertex in the given local configuration.
    pub fn vertex_weight(&self, config: LocalConfig) -> f64 {
        self.signature().get(config)
    }
}

fn third(p: EdgeType, q: EdgeType) -> EdgeType {
    EdgeType::from_index(3 - p.index() - q.index())
}

/// Classification of toggling one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Move {
    /// The toggle leaves the 1-2 model.
    Invalid,
    /// Legal toggle outside the two special families.
    Neutral,
    /// Add a `q`-edge between two vertices holding only a `p`-edge.
    Add { p: EdgeType, q: EdgeType },
    /// Delete a `q`-edge, leaving only a `p`-edge at both ends.
    Delete { p: EdgeType, q: EdgeType },
}

impl Move {
    /// `Some((x, y))` when the acceptance probability is `(x/y)^2` in
    /// terms of edge weights, `None` when it is 1 (or 0 for invalid moves).
    pub fn ratio_letters(&self, params: &OneTwoParams) -> Option<(EdgeType, EdgeType)> {
        match *self {
            Move::Add { p, q } => {
                let r = third(p, q);
                (params.weight(r) < params.weight(p)).then_some((r, p))
            }
            Move::Delete { p, q } => {
                let r = third(p, q);
                (params.weight(r) > params.weight(p)).then_some((p, r))
            }
            _ => None,
        }
    }

    /// Probability of accepting the toggle once its edge is chosen.
    pub fn acceptance(&self, params: &OneTwoParams) -> f64 {
        if *self == Move::Invalid {
            return 0.0;
        }
        match self.ratio_letters(params) {
            Some((x, y)) => (params.weight(x) / params.weight(y)).powi(2),
            None => 1.0,
        }
    }
}

fn config_bits(lattice: &HoneyTorus, occupied: impl Fn(usize) -> bool, v: usize) -> u8 {
    let inc = lattice.incident(v);
    (occupied(inc[0]) as u8) << 2 | (occupied(inc[1]) as u8) << 1 | occupied(inc[2]) as u8
}

fn single(bits: u8) -> Option<EdgeType> {
    match bits {
        4 => Some(EdgeType::A),
        2 => Some(EdgeType::B),
        1 => Some(EdgeType::C),
        _ => None,
    }
}

/// Classifies toggling edge `e` given the current occupation.
pub fn classify(lattice: &HoneyTorus, occupied: impl Fn(usize) -> bool, e: usize) -> Move {
    let edge = lattice.edge(e);
    let q = edge.kind;
    let bu = config_bits(lattice, &occupied, edge.black);
    let bv = config_bits(lattice, &occupied, edge.white);
    let bit = 4 >> q.index();
    let (nu, nv) = (bu ^ bit, bv ^ bit);
    if ![nu, nv].iter().all(|b| (1..=2).contains(&b.count_ones())) {
        return Move::Invalid;
    }
    if occupied(e) {
        match (single(nu), single(nv)) {
            (Some(p), Some(p2)) if p == p2 => Move::Delete { p, q },
            _ => Move::Neutral,
        }
    } else {
        match (single(bu), single(bv)) {
            (Some(p), Some(p2)) if p == p2 => Move::Add { p, q },
            _ => Move::Neutral,
        }
    }
}

/// Unnormalized weight of a configuration, `None` if some vertex is not in
/// a 1-2 state.
pub fn configuration_weight(lattice: &HoneyTorus, params: &OneTwoParams, occupied: impl Fn(usize) -> bool) -> Option<f64> {
    let mut w = 1.0;
    for v in 0..lattice.vertex_count() {
        let bits = config_bits(lattice, &occupied, v);
        if !(1..=2).contains(&bits.count_ones()) {
            return None;
        }
        w *= params.vertex_weight(LocalConfig::from_index(bits as usize));
    }
    Some(w)
}

#[derive(Clone, Debug)]
pub struct ChainState {
    lattice: HoneyTorus,
    occupied: BitVec,
    rng: ChaCha8Rng,
    seed: u64,
    step: u64,
}

/// All a-edges occupied.
pub fn init_dimer_state(lattice: &HoneyTorus, seed: u64) -> ChainState {
    let mut occupied = BitVec::repeat(false, lattice.edge_count());
    for (e, edge) in lattice.edges().iter().enumerate() {
        if edge.kind == EdgeType::A {
            occupied.set(e, true);
        }
    }
    ChainState { lattice: lattice.clone(), occupied, rng: ChaCha8Rng::seed_from_u64(seed), seed, step: 0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepOutcome {
    pub edge: usize,
    pub kind: Move,
    pub accepted: bool,
}

impl ChainState {
    pub fn lattice(&self) -> &HoneyTorus {
        &self.lattice
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn is_occupied(&self, e: usize) -> bool {
        self.occupied[e]
    }

    pub fn occupied_edges(&self) -> Vec<usize> {
        self.occupied.iter_ones().collect()
    }

    pub fn local_config(&self, v: usize) -> LocalConfig {
        LocalConfig::from_index(config_bits(&self.lattice, |e| self.occupied[e], v) as usize)
    }

    pub fn is_valid(&self) -> bool {
        (0..self.lattice.vertex_count()).all(|v| (1..=2).contains(&self.local_config(v).degree()))
    }

    /// Bitmask of occupied edges; only for tori with at most 64 edges.
    pub fn mask(&self) -> u64 {
        self.occupied.iter_ones().fold(0, |m, e| m | 1 << e)
    }

    pub fn step(&mut self, params: &OneTwoParams) -> StepOutcome {
        self.step += 1;
        let edge = self.rng.random_range(0..self.lattice.edge_count());
        let kind = classify(&self.lattice, |e| self.occupied[e], edge);
        let accepted = match kind {
            Move::Invalid => false,
            _ => {
                let p = kind.acceptance(params);
                p >= 1.0 || self.rng.random::<f64>() < p
            }
        };
        if accepted {
            let now = self.occupied[edge];
            self.occupied.set(edge, !now);
        }
        StepOutcome { edge, kind, accepted }
    }
}

/// Quantities averaged by [`sample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// Fraction of edges of this type whose two ends hold only that edge.
    DimerDensity { edge_type: EdgeType },
    /// Fraction of vertices of this color in the configuration.
    ConfigDensity { color: Color, config: LocalConfig },
    /// Indicator of an isolated dimer on one edge.
    Dimer { edge: usize },
    /// Indicator of a configuration at one vertex.
    Config { vertex: usize, config: LocalConfig },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub observable: Observable,
    pub mean: f64,
    /// Batch-means standard error.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub params: OneTwoParams,
    pub n: usize,
    pub steps: u64,
    pub seed: u64,
    pub rng: &'static str,
    /// Steps discarded before recording.
    pub burn_in: u64,
    pub batches: usize,
    pub acceptance_rate: f64,
    pub estimates: Vec<Estimate>,
    pub final_occupied: Vec<usize>,
}

pub const BATCHES: usize = 100;
pub const RNG_NAME: &str = "ChaCha8";

struct Counters {
    dimers: [i64; 3],
    configs: [[i64; 8]; 2],
}

impl Counters {
    fn new(s: &ChainState) -> Self {
        let mut c = Counters { dimers: [0; 3], configs: [[0; 8]; 2] };
        for v in 0..s.lattice.vertex_count() {
            c.vertex(s, v, 1);
        }
        for e in 0..s.lattice.edge_count() {
            c.edge(s, e, 1);
        }
        c
    }

    fn vertex(&mut self, s: &ChainState, v: usize, sign: i64) {
        self.configs[s.lattice.vertex(v).color.index()][s.local_config(v).index()] += sign;
    }

    fn edge(&mut self, s: &ChainState, e: usize, sign: i64) {
        if is_isolated_dimer(s, e) {
            self.dimers[s.lattice.edge(e).kind.index()] += sign;
        }
    }

    fn update(&mut self, s: &ChainState, e: usize, sign: i64) {
        let edge = *s.lattice.edge(e);
        let mut touched: Vec<usize> =
            s.lattice.incident(edge.black).into_iter().chain(s.lattice.incident(edge.white)).collect();
        touched.sort_unstable();
        touched.dedup();
        for f in touched {
            self.edge(s, f, sign);
        }
        self.vertex(s, edge.black, sign);
        self.vertex(s, edge.white, sign);
    }
}

fn advance(state: &mut ChainState, params: &OneTwoParams, counters: &mut Counters) -> bool {
    let edge = state.rng.random_range(0..state.lattice.edge_count());
    state.step += 1;
    let kind = classify(&state.lattice, |e| state.occupied[e], edge);
    let accept = kind != Move::Invalid && {
        let p = kind.acceptance(params);
        p >= 1.0 || state.rng.random::<f64>() < p
    };
    if accept {
        counters.update(state, edge, -1);
        let now = state.occupied[edge];
        state.occupied.set(edge, !now);
        counters.update(state, edge, 1);
    }
    accept
}

fn is_isolated_dimer(s: &ChainState, e: usize) -> bool {
    let edge = s.lattice.edge(e);
    let bit = 4 >> edge.kind.index();
    let only = |v| config_bits(&s.lattice, |f| s.occupied[f], v) == bit;
    only(edge.black) && only(edge.white)
}

fn observe(s: &ChainState, c: &Counters, o: &Observable) -> f64 {
    let cells = (s.lattice.n() * s.lattice.n()) as f64;
    match *o {
        Observable::DimerDensity { edge_type } => c.dimers[edge_type.index()] as f64 / cells,
        Observable::ConfigDensity { color, config } => c.configs[color.index()][config.index()] as f64 / cells,
        Observable::Dimer { edge } => is_isolated_dimer(s, edge) as u8 as f64,
        Observable::Config { vertex, config } => (s.local_config(vertex) == config) as u8 as f64,
    }
}

fn check_observables(lattice: &HoneyTorus, observables: &[Observable]) -> Result<()> {
    for o in observables {
        let bad = match *o {
            Observable::Dimer { edge } => edge >= lattice.edge_count(),
            Observable::Config { vertex, .. } => vertex >= lattice.vertex_count(),
            _ => false,
        };
        if bad {
            return Err(Error::InvalidInput(format!("observable {o:?} is off the lattice")));
        }
    }
    Ok(())
}

/// Runs one chain from the a-dimer state. The first half of the run is
/// burn-in; the second half is cut into [`BATCHES`] batches whose means
/// give the error bars.
pub fn sample(
    params: &OneTwoParams,
    n: usize,
    steps: u64,
    seed: u64,
    observables: &[Observable],
) -> Result<(SampleReport, ChainState)> {
    sample_with(params, n, steps, seed, observables, |_| {})
}

/// [`sample`] with a callback on the state after every recorded step.
pub fn sample_with(
    params: &OneTwoParams,
    n: usize,
    steps: u64,
    seed: u64,
    observables: &[Observable],
    mut visit: impl FnMut(&ChainState),
) -> Result<(SampleReport, ChainState)> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let lattice = HoneyTorus::new(n)?;
    check_observables(&lattice, observables)?;
    let mut state = init_dimer_state(&lattice, seed);
    let burn_in = steps / 2;
    let recorded = steps - burn_in;
    let batches = BATCHES.min(recorded as usize);
    let mut counters = Counters::new(&state);
    let mut sums = vec![vec![0.0; batches]; observables.len()];
    let mut sizes = vec![0u64; batches];
    let mut accepted = 0u64;
    for t in 0..steps {
        if advance(&mut state, params, &mut counters) {
            accepted += 1;
        }
        if t >= burn_in {
            let b = ((t - burn_in) * batches as u64 / recorded) as usize;
            sizes[b] += 1;
            for (k, o) in observables.iter().enumerate() {
                sums[k][b] += observe(&state, &counters, o);
            }
            visit(&state);
        }
    }
    let estimates = observables
        .iter()
        .zip(&sums)
        .map(|(o, s)| {
            let means: Vec<f64> = s.iter().zip(&sizes).map(|(x, &m)| x / m as f64).collect();
            let (mean, std_error) = mean_and_error(&means);
            Estimate { observable: *o, mean, std_error }
        })
        .collect();
    let report = SampleReport {
        params: *params,
        n,
        steps,
        seed,
        rng: RNG_NAME,
        burn_in,
        batches,
        acceptance_rate: accepted as f64 / steps as f64,
        estimates,
        final_occupied: state.occupied_edges(),
    };
    Ok((report, state))
}

fn mean_and_error(x: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mean = x.iter().sum::<f64>() / k;
    if x.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiChainReport {
    pub chains: Vec<SampleReport>,
    /// Mean over chains, errors combined as independent.
    pub combined: Vec<Estimate>,
}

/// Independent chains, one per seed, run in parallel.
pub fn sample_chains(
    params: &OneTwoParams,
    n: usize,
    steps: u64,
    seeds: &[u64],
    observables: &[Observable],
) -> Result<MultiChainReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one chain is needed".into()));
    }
    let chains: Vec<SampleReport> = seeds
        .par_iter()
        .map(|&s| sample(params, n, steps, s, observables).map(|r| r.0))
        .collect::<Result<_>>()?;
    let m = chains.len() as f64;
    let combined = (0..observables.len())
        .map(|k| {
            let mean = chains.iter().map(|c| c.estimates[k].mean).sum::<f64>() / m;
            let var = chains.iter().map(|c| c.estimates[k].std_error.powi(2)).sum::<f64>() / (m * m);
            Estimate { observable: observables[k], mean, std_error: var.sqrt() }
        })
        .collect();
    Ok(MultiChainReport { chains, combined })
}

/// Largest torus on which the exact chain is built.
pub const EXACT_EDGE_LIMIT: usize = 24;

/// The full transition matrix on a small torus.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactChain {
    pub lattice: HoneyTorus,
    /// Valid configurations as edge bitmasks, increasing.
    pub states: Vec<u64>,
    /// Unnormalized weights.
    pub weights: Vec<f64>,
    /// Off-diagonal entries `(target, probability)` of each row.
    pub moves: Vec<Vec<(usize, f64)>>,
    /// Hold probability, `1 - sum of the row`.
    pub hold: Vec<f64>,
}

pub fn exact_chain(n: usize, params: &OneTwoParams) -> Result<ExactChain> {
    let lattice = HoneyTorus::new(n)?;
    let m = lattice.edge_count();
    if m > EXACT_EDGE_LIMIT {
        return Err(Error::SizeGuard { what: "edge count", size: m, limit: EXACT_EDGE_LIMIT });
    }
    let mut states = Vec::new();
    let mut weights = Vec::new();
    for mask in 0..1u64 << m {
        if let Some(w) = configuration_weight(&lattice, params, |e| mask >> e & 1 == 1) {
            states.push(mask);
            weights.push(w);
        }
    }
    let select = 1.0 / m as f64;
    let mut moves = Vec::with_capacity(states.len());
    let mut hold = Vec::with_capacity(states.len());
    for &s in &states {
        let mut row = Vec::new();
        for e in 0..m {
            let kind = classify(&lattice, |f| s >> f & 1 == 1, e);
            if kind != Move::Invalid {
                let t = states.binary_search(&(s ^ 1 << e)).expect("legal toggles stay valid");
                row.push((t, select * kind.acceptance(params)));
            }
        }
        hold.push(1.0 - row.iter().map(|x| x.1).sum::<f64>());
        moves.push(row);
    }
    Ok(ExactChain { lattice, states, weights, moves, hold })
}

impl ExactChain {
    pub fn probabilities(&self) -> Vec<f64> {
        let z: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / z).collect()
    }

    /// Largest `|pi(k) P(l|k) - pi(l) P(k|l)|` over all moves.
    pub fn detailed_balance_residual(&self) -> f64 {
        let pi = self.probabilities();
        let mut worst = 0.0f64;
        for (k, row) in self.moves.iter().enumerate() {
            for &(l, p) in row {
                let back = self.moves[l].iter().find(|x| x.0 == k).map_or(0.0, |x| x.1);
                worst = worst.max((pi[k] * p - pi[l] * back).abs());
            }
        }
        worst
    }

    /// Every state reaches every other, by a forward and a backward search
    /// from state 0.
    pub fn is_strongly_connected(&self) -> bool {
        let k = self.states.len();
        let mut reverse = vec![Vec::new(); k];
        for (s, row) in self.moves.iter().enumerate() {
            for &(t, p) in row {
                if p > 0.0 {
                    reverse[t].push(s);
                }
            }
        }
        let forward: Vec<Vec<usize>> =
            self.moves.iter().map(|row| row.iter().filter(|x| x.1 > 0.0).map(|x| x.0).collect()).collect();
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; k];
            seen[0] = true;
            let mut queue = VecDeque::from([0]);
            while let Some(s) = queue.pop_front() {
                for &t in &adj[s] {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
            seen.into_iter().all(|x| x)
        };
        k > 0 && reach(&forward) && reach(&reverse)
    }
}

/// Empirical law of the chain on a small torus after `burn_in` steps,
/// indexed like [`ExactChain::states`].
pub fn empirical_distribution(
    exact: &ExactChain,
    params: &OneTwoParams,
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if steps <= burn_in {
        return Err(Error::InvalidParameter("steps must exceed the burn-in".into()));
    }
    let mut state = init_dimer_state(&exact.lattice, seed);
    let mut counts = vec![0u64; exact.states.len()];
    for t in 0..steps {
        state.step(params);
        if t >= burn_in {
            let k = exact.states.binary_search(&state.mask()).expect("chain stays in the state space");
            counts[k] += 1;
        }
    }
    let total = (steps - burn_in) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// SVG drawing of the occupied edges, colored by type, on the unwrapped
/// fundamental domain.
pub fn render_svg(state: &ChainState) -> String {
    render_svg_edges(state.lattice(), |e| state.is_occupied(e))
}

pub fn render_svg_edges(h: &HoneyTorus, occupied: impl Fn(usize) -> bool) -> String {
    let n = h.n();
    let s3 = 3f64.sqrt();
    let unit = 12.0;
    let e1 = (s3, 0.0);
    let e2 = (s3 / 2.0, 1.5);
    let w = (s3 / 2.0, 0.5);
    let offsets = [w, (w.0 - e1.0, w.1 - e1.1), (w.0 - e2.0, w.1 - e2.1)];
    let width = (n as f64 * 1.5 * s3 + 2.0) * unit;
    let height = (n as f64 * 1.5 + 2.0) * unit;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let colors = ["#d62728", "#2ca02c", "#1f77b4"];
    for (e, edge) in h.edges().iter().enumerate() {
        let v = h.vertex(edge.black);
        let x0 = (v.i as f64 * e1.0 + v.j as f64 * e2.0 + 1.0 + s3) * unit;
        let y0 = height - (v.i as f64 * e1.1 + v.j as f64 * e2.1 + 1.0) * unit;
        let d = offsets[edge.kind.index()];
        let (x1, y1) = (x0 + d.0 * unit, y0 - d.1 * unit);
        let (stroke, width) = if occupied(e) { (colors[edge.kind.index()], 3.0) } else { ("#dddddd", 1.0) };
        out.push_str(&format!(
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\" stroke-linecap=\"round\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}
