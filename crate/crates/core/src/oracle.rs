//! Brute-force references: exhaustive vertex-model sums, perfect-matching
//! backtracking and local searches for realizing base changes.

mod search;

use crate::config::LocalConfig;
use crate::error::{Error, Result};
use crate::model::VertexModel;

pub use search::{bipartite_feasibility, general_feasibility, orthogonal_feasibility, Feasibility};

pub const MAX_VERTEX_MODEL_PERIOD: usize = 2;
pub const DEFAULT_MATCHING_LIMIT: usize = 26;

#[derive(Clone, Copy, Debug, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationReport {
    pub partition: f64,
    /// Configurations with nonzero weight.
    pub config_count: usize,
    /// Per vertex, the probability of each local configuration; `None` when
    /// the partition function vanishes.
    pub marginals: Option<Vec<[f64; 8]>>,
}

fn check_size(model: &VertexModel) -> Result<()> {
    if model.n() > MAX_VERTEX_MODEL_PERIOD {
        return Err(Error::SizeGuard {
            what: "vertex-model enumeration period",
            size: model.n(),
            limit: MAX_VERTEX_MODEL_PERIOD,
        });
    }
    Ok(())
}

fn for_each_config(model: &VertexModel, mut f: impl FnMut(&[bool], f64)) {
    let m = model.lattice().edge_count();
    let mut occ = vec![false; m];
    for bits in 0u32..(1 << m) {
        for (e, o) in occ.iter_mut().enumerate() {
            *o = bits >> e & 1 == 1;
        }
        let w = model.weight(&occ);
        if w != 0.0 {
            f(&occ, w);
        }
    }
}

pub fn enumerate_vertex_model(model: &VertexModel) -> Result<EnumerationReport> {
    check_size(model)?;
    let nv = model.lattice().vertex_count();
    let mut z = Kahan::default();
    let mut count = 0;
    let mut acc = vec![[Kahan::default(); 8]; nv];
    for_each_config(model, |occ, w| {
        z.add(w);
        count += 1;
        for (v, a) in acc.iter_mut().enumerate() {
            a[model.local_config(v, occ).index()].add(w);
        }
    });
    let marginals = (z.sum != 0.0)
        .then(|| acc.iter().map(|a| std::array::from_fn(|c| a[c].sum / z.sum)).collect());
    Ok(EnumerationReport { partition: z.sum, config_count: count, marginals })
}

/// Probability that every listed vertex is in its listed configuration.
pub fn enumerate_conditional(model: &VertexModel, targets: &[(usize, LocalConfig)]) -> Result<f64> {
    check_size(model)?;
    let nv = model.lattice().vertex_count();
    if let Some(&(v, _)) = targets.iter().find(|(v, _)| *v >= nv) {
        return Err(Error::InvalidInput(format!("vertex {v} out of range")));
    }
    let (mut z, mut hit) = (Kahan::default(), Kahan::default());
    for_each_config(model, |occ, w| {
        z.add(w);
        if targets.iter().all(|&(v, c)| model.local_config(v, occ) == c) {
            hit.add(w);
        }
    });
    if z.sum == 0.0 {
        return Err(Error::InconsistentWeights("partition function vanishes".into()));
    }
    Ok(hit.sum / z.sum)
}

/// Weighted perfect-matching sum of a graph with at most
/// [`DEFAULT_MATCHING_LIMIT`] vertices.
pub fn enumerate_matchings(vertex_count: usize, edges: &[(usize, usize, f64)]) -> Result<f64> {
    enumerate_matchings_with_limit(vertex_count, edges, DEFAULT_MATCHING_LIMIT)
}

pub fn enumerate_matchings_with_limit(
    vertex_count: usize,
    edges: &[(usize, usize, f64)],
    limit: usize,
) -> Result<f64> {
    if vertex_count > limit {
        return Err(Error::SizeGuard { what: "matching enumeration graph", size: vertex_count, limit });
    }
    if vertex_count % 2 == 1 {
        return Ok(0.0);
    }
    let mut adj = vec![Vec::new(); vertex_count];
    for &(u, v, w) in edges {
        if u >= vertex_count || v >= vertex_count || u == v {
            return Err(Error::InvalidInput(format!("bad edge ({u}, {v})")));
        }
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let mut used = vec![false; vertex_count];
    Ok(backtrack(&adj, &mut used, 0))
}

fn backtrack(adj: &[Vec<(usize, f64)>], used: &mut [bool], from: usize) -> f64 {
    let Some(i) = (from..used.len()).find(|&i| !used[i]) else {
        return 1.0;
    };
    used[i] = true;
    let mut total = 0.0;
    for &(j, w) in &adj[i] {
        if !used[j] {
            used[j] = true;
            total += w * backtrack(adj, used, i + 1);
            used[j] = false;
        }
    }
    used[i] = false;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{FisherTorus, TriangleWeights};
    use crate::signatures::VertexSignature;

    #[test]
    fn uniform_one_two_on_one_by_one() {
        let u = VertexSignature::one_two(1.0, 1.0, 1.0);
        let r = enumerate_vertex_model(&VertexModel::periodic(1, u, u).unwrap()).unwrap();
        assert_eq!(r.partition, 6.0);
        assert_eq!(r.config_count, 6);
        for m in r.marginals.unwrap() {
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn critical_one_two_matches_pairing_sum() {
        let c = VertexSignature::one_two(4.0, 1.0, 1.0);
        let r = enumerate_vertex_model(&VertexModel::periodic(1, c, c).unwrap()).unwrap();
        let pair: f64 = c.0.iter().map(|x| x * x).sum();
        assert_eq!(r.partition, pair);
        assert_eq!(r.partition, 36.0);
    }

    #[test]
    fn zero_signature_has_no_marginals() {
        let z = VertexSignature([0.0; 8]);
        let r = enumerate_vertex_model(&VertexModel::periodic(1, z, z).unwrap()).unwrap();
        assert_eq!(r.partition, 0.0);
        assert!(r.marginals.is_none());
    }

    #[test]
    fn size_guard() {
        let u = VertexSignature::one_two(1.0, 1.0, 1.0);
        let m = VertexModel::periodic(3, u, u).unwrap();
        assert!(matches!(enumerate_vertex_model(&m), Err(Error::SizeGuard { .. })));
        assert!(enumerate_matchings(28, &[]).is_err());
    }

    #[test]
    fn conditional_events() {
        let u = VertexSignature::one_two(1.0, 1.0, 1.0);
        let m = VertexModel::periodic(1, u, u).unwrap();
        let p = enumerate_conditional(&m, &[(0, "100".parse().unwrap())]).unwrap();
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(enumerate_conditional(&m, &[(0, "111".parse().unwrap())]).unwrap(), 0.0);
        let total: f64 = LocalConfig::all().map(|c| enumerate_conditional(&m, &[(0, c)]).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_matchings() {
        assert_eq!(enumerate_matchings(2, &[(0, 1, 2.5)]).unwrap(), 2.5);
        assert_eq!(enumerate_matchings(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap(), 0.0);
    }

    #[test]
    fn one_by_one_fisher_unnormalized_sum() {
        let t = TriangleWeights::new(0.5f64.sqrt(), 0.5f64.sqrt(), 0.5f64.sqrt(), -1.5 * 2f64.sqrt());
        let f = FisherTorus::uniform(1, t, t).unwrap();
        let edges: Vec<_> = f.edges().iter().map(|e| (e.from, e.to, e.weight)).collect();
        let z = enumerate_matchings(6, &edges).unwrap() * t.d * t.d;
        assert!((z - 6.0).abs() < 1e-12);
    }
}
