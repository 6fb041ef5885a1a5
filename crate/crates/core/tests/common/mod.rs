//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the numerical routines under test: the Hill map
//! is re-derived, equitability is decided in exact integer arithmetic and
//! eigenvalues come from nalgebra's symmetric solver applied to matrices
//! built here straight from the edge weights.

#![allow(dead_code)]

use nalgebra::DMatrix;
use patternq_core::lattice::builtin_examples;
use patternq_core::{Partition, WeightedGraph};

pub fn hill(a: f64, k: f64, h: f64, u: f64) -> f64 {
    a / (1.0 + (u / k).powf(h))
}

pub fn hill_prime(a: f64, k: f64, h: f64, u: f64) -> f64 {
    let x = u / k;
    -a * h / k * x.powf(h - 1.0) / (1.0 + x.powf(h)).powi(2)
}

/// Nonhomogeneous roots `(z_hi, z_lo)` of `z = T(T(z))` for `A = 2, K = 1`,
/// where the homogeneous root is 1. Bisection on `(1, 2]`.
pub fn pair_oracle(h: f64) -> (f64, f64) {
    let t = |u: f64| hill(2.0, 1.0, h, u);
    let g = |z: f64| t(t(z)) - z;
    let (mut lo, mut hi) = (1.0 + 1e-6, 2.0);
    assert!(g(lo) > 0.0 && g(hi) <= 0.0, "no bracket for h = {h}");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    (z, t(z))
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max + 1 {
            if i == 0 && l > 0 {
                break;
            }
            cur.push(l);
            go(i + 1, n, max.max(l), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(0, n, 0, &mut Vec::new(), &mut out);
    }
    out
}

/// Integer-weighted graph as a dense matrix.
pub fn int_weights(n: usize, edges: &[(usize, usize, u64)]) -> Vec<Vec<u64>> {
    let mut w = vec![vec![0; n]; n];
    for &(i, j, x) in edges {
        w[i][j] = x;
        w[j][i] = x;
    }
    w
}

/// Exact equitability of `labels` on the scaled weights `w_ij / d_i`:
/// `w(u, C) d_v == w(v, C) d_u` for all `u, v` in a common class.
pub fn equitable_exact(w: &[Vec<u64>], labels: &[usize]) -> bool {
    let n = w.len();
    let r = labels.iter().max().map_or(0, |m| m + 1);
    let d: Vec<u64> = w.iter().map(|row| row.iter().sum()).collect();
    let into: Vec<Vec<u64>> = (0..n)
        .map(|u| {
            let mut s = vec![0; r];
            for v in 0..n {
                s[labels[v]] += w[u][v];
            }
            s
        })
        .collect();
    for u in 0..n {
        for v in (u + 1)..n {
            if labels[u] != labels[v] {
                continue;
            }
            for c in 0..r {
                if into[u][c] * d[v] != into[v][c] * d[u] {
                    return false;
                }
            }
        }
    }
    true
}

fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    let n = fine.len();
    (0..n).all(|u| (0..n).all(|v| fine[u] != fine[v] || coarse[u] == coarse[v]))
}

/// Coarsest equitable refinement of `seed`, by enumerating every set
/// partition.
pub fn coarsest_oracle(w: &[Vec<u64>], seed: &[usize]) -> Partition {
    let n = w.len();
    let candidates: Vec<Vec<usize>> = set_partitions(n)
        .into_iter()
        .filter(|p| refines(p, seed) && equitable_exact(w, p))
        .collect();
    let r = |p: &Vec<usize>| p.iter().max().unwrap() + 1;
    let best = candidates.iter().min_by_key(|p| r(p)).unwrap();
    // the coarsest one is refined by every other equitable refinement
    for p in &candidates {
        assert!(refines(p, best), "equitable refinements have no unique coarsest");
    }
    Partition::from_labels(best)
}

/// Connected simple graphs on `n` labelled vertices, as edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if is_connected(n, &edges) {
            out.push(edges);
        }
    }
    out
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    comps == 1
}

/// Eigenvalues of `D^-1 W`, descending, from nalgebra's symmetric solver
/// applied to `D^-1/2 W D^-1/2`.
pub fn oracle_scaled_spectrum(g: &WeightedGraph) -> Vec<f64> {
    let n = g.n();
    let mut w = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        w[(e.i, e.j)] = e.w;
        w[(e.j, e.i)] = e.w;
    }
    let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (d[i] * d[j]).sqrt());
    descending(s.symmetric_eigen().eigenvalues.iter().copied().collect())
}

/// Eigenvalues of a symmetric matrix given by rows, descending.
pub fn oracle_sym_eigs(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    descending(m.symmetric_eigen().eigenvalues.iter().copied().collect())
}

/// `G^1/2 D^-1/2 W D^-1/2 G^1/2`, symmetric and similar to `diag(g) P`.
pub fn sym_scaled(g: &WeightedGraph, gains: &[f64]) -> DMatrix<f64> {
    let n = g.n();
    let mut w = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        w[(e.i, e.j)] = e.w;
        w[(e.j, e.i)] = e.w;
    }
    let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        w[(i, j)] * (gains[i] * gains[j]).sqrt() / (d[i] * d[j]).sqrt()
    })
}

pub fn sym_eigs(s: &DMatrix<f64>) -> Vec<f64> {
    descending(s.clone().symmetric_eigen().eigenvalues.iter().copied().collect())
}

/// Spectrum of symmetric `s` on the orthogonal complement of the columns
/// of `v`, assumed `s`-invariant.
///
/// With `Pi` the projector onto the complement, `Pi S Pi + c (I - Pi)` has
/// the restricted spectrum plus `c` repeated `rank(v)` times; `c` is put
/// far from the spectrum and those copies are dropped.
pub fn restricted_sym_spectrum(s: &DMatrix<f64>, v: &DMatrix<f64>) -> Vec<f64> {
    let n = s.nrows();
    let vtv = v.transpose() * v;
    let proj_in = v * vtv.try_inverse().expect("independent columns") * v.transpose();
    let pi = DMatrix::<f64>::identity(n, n) - &proj_in;
    let c = 10.0 * (s.norm() + 1.0);
    let m = &pi * s * &pi + proj_in * c;
    let m = (&m + m.transpose()) * 0.5;
    sym_eigs(&m)
        .into_iter()
        .filter(|&x| (x - c).abs() > 1e-6 * c)
        .collect()
}

/// Columns `scale_i [i in C]`, one per class.
pub fn class_columns(pi: &Partition, scale: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(pi.n(), pi.r(), |i, c| if pi.class_of(i) == c { scale[i] } else { 0.0 })
}

/// `trace(A^k)` for `k = 1..=kmax`.
pub fn trace_powers(rows: &[Vec<f64>], kmax: usize) -> Vec<f64> {
    let n = rows.len();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut p = a.clone();
    let mut out = Vec::new();
    for _ in 0..kmax {
        out.push(p.trace());
        p = &p * &a;
    }
    out
}

pub fn power_sums(values: &[f64], kmax: usize) -> Vec<f64> {
    (1..=kmax as i32)
        .map(|k| values.iter().map(|x| x.powi(k)).sum())
        .collect()
}

pub fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn max_sorted_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (a, b) = (descending(a.to_vec()), descending(b.to_vec()));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Built-in examples, materialised.
pub fn builtins() -> Vec<(&'static str, WeightedGraph, Partition)> {
    builtin_examples()
        .into_iter()
        .map(|e| {
            let (g, pi) = e.build();
            (e.name, g, pi)
        })
        .collect()
}

/// Whether a 2x2 matrix equals `want` up to swapping the two classes.
pub fn matches_2x2_up_to_relabel(got: &[Vec<f64>], want: [[f64; 2]; 2], tol: f64) -> bool {
    let direct = (0..2).all(|i| (0..2).all(|j| (got[i][j] - want[i][j]).abs() < tol));
    let swapped = (0..2).all(|i| (0..2).all(|j| (got[1 - i][1 - j] - want[i][j]).abs() < tol));
    direct || swapped
}
