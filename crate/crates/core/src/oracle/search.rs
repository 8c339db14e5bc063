//! Multi-start Levenberg-Marquardt searches for base changes that turn a
//! signature into a matchgate. They know nothing about the closed-form
//! criteria and serve as independent feasibility references.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::signatures::{kron3, mat_vec, Mat2, VertexSignature, EVEN_ENTRIES};

/// Residual below which a search counts as having found a realization.
pub const FEASIBLE_RESIDUAL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Smallest residual norm found.
    pub residual: f64,
    /// Angles at the best point.
    pub params: Vec<f64>,
}

fn levenberg_marquardt(f: &dyn Fn(&[f64]) -> Vec<f64>, mut x: Vec<f64>, iters: usize) -> (Vec<f64>, f64) {
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut r = f(&x);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let n = x.len();
    for _ in 0..iters {
        if c < 1e-30 {
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = 1e-7;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (f(&xp), f(&xm));
            for i in 0..m {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..8 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = f(&xn);
            let cn = cost(&rn);
            if cn < c {
                let small = step.norm() < 1e-15;
                x = xn;
                r = rn;
                c = cn;
                lambda = (lambda / 3.0).max(1e-15);
                improved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, c.sqrt())
}

fn multistart(f: &dyn Fn(&[f64]) -> Vec<f64>, dim: usize, starts: usize, seed: u64) -> Feasibility {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (Vec::new(), f64::INFINITY);
    for _ in 0..starts {
        let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
        let (x, res) = levenberg_marquardt(f, x0, 150);
        if res < best.1 {
            best = (x, res);
        }
        if best.1 < 1e-13 {
            break;
        }
    }
    Feasibility { feasible: best.1 < FEASIBLE_RESIDUAL, residual: best.1, params: best.0 }
}

fn norm(g: &[f64; 8]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rotation(a: f64) -> Mat2 {
    let (s, c) = a.sin_cos();
    [[c, s], [-s, c]]
}

fn rows(t0: f64, t1: f64) -> Mat2 {
    [[t0.cos(), t0.sin()], [t1.cos(), t1.sin()]]
}

/// Rotations `U(a1) (x) U(a2) (x) U(a3)` killing the even entries.
pub fn orthogonal_feasibility(g: &VertexSignature) -> Feasibility {
    let s = norm(&g.0);
    let f = move |a: &[f64]| {
        let m = mat_vec(&kron3(&rotation(a[0]), &rotation(a[1]), &rotation(a[2])), &g.0);
        EVEN_ENTRIES.iter().map(|&i| m[i] / s).collect::<Vec<_>>()
    };
    multistart(&f, 3, 24, 1)
}

/// One base change per edge type of the 1x1 torus, same signature at both
/// vertices: `T (x) T (x) T` and its inverse transpose must both give odd
/// matchgates. Each `T` is parametrized by the directions of its two rows.
pub fn general_feasibility(g: &VertexSignature) -> Feasibility {
    let s = norm(&g.0);
    let f = move |th: &[f64]| {
        let t: Vec<Mat2> = (0..3).map(|k| rows(th[2 * k], th[2 * k + 1])).collect();
        // inverse transpose up to the factor 1/det
        let tw: Vec<Mat2> = (0..3)
            .map(|k| {
                let (a, b) = (th[2 * k], th[2 * k + 1]);
                [[b.sin(), -b.cos()], [-a.sin(), a.cos()]]
            })
            .collect();
        let det: f64 = (0..3).map(|k| (th[2 * k + 1] - th[2 * k]).sin().abs()).product();
        let scale = s * det.max(1e-300);
        let mb = mat_vec(&kron3(&t[0], &t[1], &t[2]), &g.0);
        let mw = mat_vec(&kron3(&tw[0], &tw[1], &tw[2]), &g.0);
        EVEN_ENTRIES
            .iter()
            .map(|&i| mb[i] / scale)
            .chain(EVEN_ENTRIES.iter().map(|&i| mw[i] / scale))
            .collect::<Vec<_>>()
    };
    multistart(&f, 6, 24, 2)
}

/// Base changes making the signature a matchgate supported on `001`,
/// `010`, `100` only.
pub fn bipartite_feasibility(g: &VertexSignature) -> Feasibility {
    let s = norm(&g.0);
    let f = move |th: &[f64]| {
        let t: Vec<Mat2> = (0..3).map(|k| rows(th[2 * k], th[2 * k + 1])).collect();
        let det: f64 = (0..3).map(|k| (th[2 * k + 1] - th[2 * k]).sin().abs()).product();
        let m = mat_vec(&kron3(&t[0], &t[1], &t[2]), &g.0);
        [0, 3, 5, 6, 7].iter().map(|&i| m[i] / (s * det.max(1e-300))).collect::<Vec<_>>()
    };
    multistart(&f, 6, 24, 3)
}
