//! Vertex partitions, equitability, quotient matrices and the
//! representative/transverse block similarity.
//!
//! A partition `O_1, …, O_r` of the vertices is *equitable* when, for every
//! pair of classes `(i, j)`, the scaled weight `sum_{v in O_j} p_uv` is the
//! same for every `u` in `O_i`. That common value is the quotient entry
//! `pbar_ij`. Equitability is measured on the scaled weights `p_ij`, not on
//! the raw weights `w_ij`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{ScaledAdjacency, WeightedGraph};
use crate::lattice::Permutation;
use crate::matrix::Matrix;

/// Row sums within this distance are treated as equal.
pub const EQUITABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("partition covers {got} vertices but the graph has {expected}")]
    PartitionMismatch { expected: usize, got: usize },
    #[error("partition has an empty class")]
    EmptyClass,
    #[error("vertex {0} appears in more than one class")]
    Overlap(usize),
    #[error("vertex {0} is not in any class")]
    Missing(usize),
    #[error("vertex index {index} out of range for {n} vertices")]
    BadIndex { index: usize, n: usize },
    #[error("partition is not equitable: {0}")]
    NotEquitable(Witness),
    #[error("permutation {index} is not a bijection on {n} vertices")]
    NotPermutation { index: usize, n: usize },
    #[error("permutation {index} is not an automorphism: edge ({i}, {j}) of weight {w} maps to weight {mapped}")]
    NotAutomorphism {
        index: usize,
        i: usize,
        j: usize,
        w: f64,
        mapped: f64,
    },
    #[error("block transform is singular")]
    SingularTransform,
}

/// Evidence that a partition is not equitable: two vertices of class
/// `from` whose scaled weight into class `to` differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub from: usize,
    pub to: usize,
    pub vertices: (usize, usize),
    pub sums: (f64, f64),
}

impl core::fmt::Display for Witness {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "vertices {} and {} of class {} send {} and {} into class {}",
            self.vertices.0, self.vertices.1, self.from, self.sums.0, self.sums.1, self.to
        )
    }
}

/// Disjoint nonempty classes covering `0..n`.
///
/// Canonical form: vertices ascending inside a class, classes ordered by
/// their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, classes: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; n];
        let mut classes = classes;
        for class in &mut classes {
            if class.is_empty() {
                return Err(PartitionError::EmptyClass);
            }
            class.sort_unstable();
            for &v in class.iter() {
                if v >= n {
                    return Err(PartitionError::BadIndex { index: v, n });
                }
                if seen[v] {
                    return Err(PartitionError::Overlap(v));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(PartitionError::Missing(v));
        }
        classes.sort_unstable_by_key(|c| c[0]);
        let mut class_of = vec![0; n];
        for (k, class) in classes.iter().enumerate() {
            for &v in class {
                class_of[v] = k;
            }
        }
        Ok(Self {
            n,
            classes,
            class_of,
        })
    }

    /// Groups vertices by label; any label type with a total order works.
    pub fn from_labels<L: Ord + Clone>(labels: &[L]) -> Self {
        let mut groups: BTreeMap<L, Vec<usize>> = BTreeMap::new();
        for (v, l) in labels.iter().enumerate() {
            groups.entry(l.clone()).or_default().push(v);
        }
        Self::new(labels.len(), groups.into_values().collect()).expect("labels cover all vertices")
    }

    /// A single class holding every vertex.
    pub fn trivial(n: usize) -> Self {
        Self::new(n, vec![(0..n).collect()]).expect("n > 0")
    }

    pub fn singletons(n: usize) -> Self {
        Self::new(n, (0..n).map(|v| vec![v]).collect()).expect("n > 0")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of classes.
    #[inline]
    pub fn r(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    #[inline]
    pub fn class_of(&self, v: usize) -> usize {
        self.class_of[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    /// The smallest vertex of each class.
    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }

    /// True when every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self
                .classes
                .iter()
                .all(|c| c.iter().all(|&v| coarser.class_of(v) == coarser.class_of(c[0])))
    }

    /// Expands per-class values to per-vertex values.
    pub fn lift(&self, per_class: &[f64]) -> Vec<f64> {
        assert_eq!(per_class.len(), self.r());
        self.class_of.iter().map(|&k| per_class[k]).collect()
    }

    /// Largest spread `max - min` of `x` inside any class.
    pub fn within_class_spread(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.classes
            .iter()
            .map(|c| {
                let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(x[v]), hi.max(x[v]))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Indicator matrix `Q` (`N x r`), `q_ij = 1` iff vertex `i` is in class `j`.
    pub fn indicator(&self) -> Matrix {
        let mut q = Matrix::zeros(self.n, self.r());
        for (v, &k) in self.class_of.iter().enumerate() {
            q[(v, k)] = 1.0;
        }
        q
    }

    fn check_size(&self, n: usize) -> Result<(), PartitionError> {
        if self.n != n {
            return Err(PartitionError::PartitionMismatch {
                expected: n,
                got: self.n,
            });
        }
        Ok(())
    }
}

/// Outcome of an equitability check.
#[derive(Debug, Clone, PartialEq)]
pub enum Equitability {
    Equitable { pbar: Matrix },
    NotEquitable(Witness),
}

impl Equitability {
    pub fn is_equitable(&self) -> bool {
        matches!(self, Equitability::Equitable { .. })
    }
}

/// `N x r` matrix of scaled weight from each vertex into each class (`P Q`).
fn class_sums(sa: &ScaledAdjacency, pi: &Partition) -> Matrix {
    let mut s = Matrix::zeros(sa.n(), pi.r());
    for u in 0..sa.n() {
        for (v, &p) in sa.p.row(u).iter().enumerate() {
            if p != 0.0 {
                s[(u, pi.class_of(v))] += p;
            }
        }
    }
    s
}

/// Checks the row-sum condition and returns `pbar` or a witness.
pub fn is_equitable(sa: &ScaledAdjacency, pi: &Partition) -> Result<Equitability, PartitionError> {
    pi.check_size(sa.n())?;
    let s = class_sums(sa, pi);
    let r = pi.r();
    let mut pbar = Matrix::zeros(r, r);
    for (i, class) in pi.classes().iter().enumerate() {
        let head = class[0];
        for j in 0..r {
            pbar[(i, j)] = s[(head, j)];
        }
        for &u in &class[1..] {
            for j in 0..r {
                if (s[(u, j)] - s[(head, j)]).abs() > EQUITABLE_TOL {
                    return Ok(Equitability::NotEquitable(Witness {
                        from: i,
                        to: j,
                        vertices: (head, u),
                        sums: (s[(head, j)], s[(u, j)]),
                    }));
                }
            }
        }
    }
    Ok(Equitability::Equitable { pbar })
}

/// Quotient of a contact graph by an equitable partition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientModel {
    /// `r x r` row-stochastic quotient matrix.
    pub pbar: Matrix,
    /// Class-aggregated degrees `dbar_i = sum_{u in O_i} d_u`.
    pub dbar: Vec<f64>,
    /// Edges `(i, j)`, `i < j`, of the reduced graph; self-loops omitted.
    pub reduced_edges: Vec<(usize, usize)>,
    /// Side of each class in a two-colouring of the reduced graph, when one
    /// exists. Class 0 is always on side `false`.
    pub reduced_bipartite: Option<Vec<bool>>,
    pub partition: Partition,
}

impl QuotientModel {
    pub fn r(&self) -> usize {
        self.pbar.rows()
    }

    /// The sign-flip diagonal `±1` by reduced-graph side, if bipartite.
    pub fn sign_flip(&self) -> Option<Vec<f64>> {
        self.reduced_bipartite
            .as_ref()
            .map(|s| s.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect())
    }

    /// Largest `|dbar_i pbar_ij - dbar_j pbar_ji|`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let flow = self.pbar.scale_rows(&self.dbar);
        flow.asymmetry()
    }

    pub fn reduced_connected(&self) -> bool {
        let r = self.r();
        let mut seen = vec![false; r];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for &(i, j) in &self.reduced_edges {
                let other = if i == a {
                    j
                } else if j == a {
                    i
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn two_color(r: usize, edges: &[(usize, usize)]) -> Option<Vec<bool>> {
    let mut adj = vec![Vec::new(); r];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut side: Vec<Option<bool>> = vec![None; r];
    for start in 0..r {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            let s = side[a].unwrap();
            for &b in &adj[a] {
                match side[b] {
                    None => {
                        side[b] = Some(!s);
                        queue.push_back(b);
                    }
                    Some(t) if t == s => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap()).collect())
}

/// Builds the quotient model of an equitable partition.
pub fn quotient(sa: &ScaledAdjacency, pi: &Partition) -> Result<QuotientModel, PartitionError> {
    let pbar = match is_equitable(sa, pi)? {
        Equitability::Equitable { pbar } => pbar,
        Equitability::NotEquitable(w) => return Err(PartitionError::NotEquitable(w)),
    };
    let r = pi.r();
    let mut dbar = vec![0.0; r];
    for (v, &d) in sa.d.iter().enumerate() {
        dbar[pi.class_of(v)] += d;
    }
    let mut reduced_edges = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            if pbar[(i, j)] != 0.0 || pbar[(j, i)] != 0.0 {
                reduced_edges.push((i, j));
            }
        }
    }
    let reduced_bipartite = two_color(r, &reduced_edges);
    Ok(QuotientModel {
        pbar,
        dbar,
        reduced_edges,
        reduced_bipartite,
        partition: pi.clone(),
    })
}

fn quantize(x: f64) -> i64 {
    libm::round(x / EQUITABLE_TOL) as i64
}

/// Coarsest equitable partition refining `seed`.
///
/// Repeatedly splits every class by the signature of scaled weight into the
/// current classes until nothing splits.
pub fn coarsest_equitable_refinement(
    sa: &ScaledAdjacency,
    seed: &Partition,
) -> Result<Partition, PartitionError> {
    seed.check_size(sa.n())?;
    let mut current = seed.clone();
    loop {
        let s = class_sums(sa, &current);
        let labels: Vec<(usize, Vec<i64>)> = (0..sa.n())
            .map(|u| {
                let sig = s.row(u).iter().map(|&x| quantize(x)).collect();
                (current.class_of(u), sig)
            })
            .collect();
        let next = Partition::from_labels(&labels);
        if next.r() == current.r() {
            return Ok(next);
        }
        current = next;
    }
}

/// Orbits of the group generated by `perms`.
///
/// Each permutation must be a weight-preserving bijection. Orbits are the
/// connected components of the graph joining every `i` to each `g(i)`.
pub fn orbits_from_generators(
    g: &WeightedGraph,
    perms: &[Permutation],
) -> Result<Partition, PartitionError> {
    let n = g.n();
    for (index, perm) in perms.iter().enumerate() {
        if perm.len() != n {
            return Err(PartitionError::NotPermutation { index, n });
        }
        let mut seen = vec![false; n];
        for &x in perm {
            if x >= n || seen[x] {
                return Err(PartitionError::NotPermutation { index, n });
            }
            seen[x] = true;
        }
        // a bijection that maps every edge onto an equal-weight edge also
        // maps non-edges to non-edges, since the edge count is preserved
        for e in g.edges() {
            let mapped = g.weight(perm[e.i], perm[e.j]);
            if (mapped - e.w).abs() > EQUITABLE_TOL * e.w.max(1.0) {
                return Err(PartitionError::NotAutomorphism {
                    index,
                    i: e.i,
                    j: e.j,
                    w: e.w,
                    mapped,
                });
            }
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for perm in perms {
        for (i, &gi) in perm.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, gi));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    Ok(Partition::from_labels(&roots))
}

/// Similarity `T = [Q R]` splitting `P` into the quotient block and the
/// transverse block:
///
/// ```text
/// T^{-1} P T = [ pbar  C ]
///              [ 0     M ]
/// ```
///
/// `R` holds the standard basis vectors of the non-representative vertices,
/// class by class and ascending inside a class. In the new coordinates the
/// first `r` entries are the representatives' states and the rest are the
/// differences `x_k - x_{V_j}` for `k` in class `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub partition: Partition,
    pub representatives: Vec<usize>,
    /// Vertex behind each column of `R`.
    pub non_representatives: Vec<usize>,
    pub q: Matrix,
    pub r_basis: Matrix,
    pub t: Matrix,
    pub t_inv: Matrix,
    /// `T^{-1} P T`.
    pub p_tilde: Matrix,
    pub pbar_block: Matrix,
    pub c_block: Matrix,
    pub m_block: Matrix,
}

impl BlockDecomposition {
    pub fn r(&self) -> usize {
        self.representatives.len()
    }

    /// Largest entry of the lower-left `(N - r) x r` block.
    pub fn lower_left_max(&self) -> f64 {
        let (n, r) = (self.t.rows(), self.r());
        self.p_tilde.block(r, 0, n - r, r).max_abs()
    }

    /// Largest entry of `P Q - Q pbar`.
    pub fn lifting_defect(&self, sa: &ScaledAdjacency) -> f64 {
        sa.p
            .matmul(&self.q)
            .max_abs_diff(&self.q.matmul(&self.pbar_block))
    }
}

pub fn block_decompose(
    sa: &ScaledAdjacency,
    pi: &Partition,
) -> Result<BlockDecomposition, PartitionError> {
    if let Equitability::NotEquitable(w) = is_equitable(sa, pi)? {
        return Err(PartitionError::NotEquitable(w));
    }
    let n = sa.n();
    let r = pi.r();
    let representatives = pi.representatives();
    let non_representatives: Vec<usize> = pi
        .classes()
        .iter()
        .flat_map(|c| c[1..].iter().copied())
        .collect();
    let q = pi.indicator();
    let mut r_basis = Matrix::zeros(n, n - r);
    for (col, &k) in non_representatives.iter().enumerate() {
        r_basis[(k, col)] = 1.0;
    }
    let t = Matrix::from_fn(n, n, |i, j| if j < r { q[(i, j)] } else { r_basis[(i, j - r)] });
    let mut t_inv = Matrix::zeros(n, n);
    for (j, &v) in representatives.iter().enumerate() {
        t_inv[(j, v)] = 1.0;
    }
    for (m, &k) in non_representatives.iter().enumerate() {
        t_inv[(r + m, k)] = 1.0;
        t_inv[(r + m, representatives[pi.class_of(k)])] = -1.0;
    }
    if t_inv.matmul(&t).max_abs_diff(&Matrix::identity(n)) > 1e-12 {
        return Err(PartitionError::SingularTransform);
    }
    let p_tilde = t_inv.matmul(&sa.p).matmul(&t);
    Ok(BlockDecomposition {
        pbar_block: p_tilde.block(0, 0, r, r),
        c_block: p_tilde.block(0, r, r, n - r),
        m_block: p_tilde.block(r, r, n - r, n - r),
        partition: pi.clone(),
        representatives,
        non_representatives,
        q,
        r_basis,
        t,
        t_inv,
        p_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{cycle_rotation, Lattice};

    fn sa(l: Lattice) -> (WeightedGraph, ScaledAdjacency) {
        let g = l.generate().unwrap();
        let s = g.scaled_adjacency().unwrap();
        (g, s)
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            Partition::new(3, vec![vec![0, 1], vec![1, 2]]),
            Err(PartitionError::Overlap(1))
        );
        assert_eq!(Partition::new(3, vec![vec![0, 1]]), Err(PartitionError::Missing(2)));
        assert_eq!(Partition::new(2, vec![vec![0, 1], vec![]]), Err(PartitionError::EmptyClass));
        let p = Partition::new(4, vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.classes(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p.representatives(), vec![0, 1]);
    }

    #[test]
    fn path3_not_equitable_with_witness() {
        let (_, s) = sa(Lattice::Path(3));
        let pi = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        match is_equitable(&s, &pi).unwrap() {
            Equitability::NotEquitable(w) => {
                assert_eq!((w.from, w.to), (0, 0));
                assert_eq!(w.vertices, (0, 1));
                assert_eq!(w.sums, (1.0, 0.5));
            }
            other => panic!("expected witness, got {other:?}"),
        }
        assert!(matches!(quotient(&s, &pi), Err(PartitionError::NotEquitable(_))));
        assert!(matches!(block_decompose(&s, &pi), Err(PartitionError::NotEquitable(_))));
    }

    #[test]
    fn size_mismatch() {
        let (_, s) = sa(Lattice::Path(3));
        assert_eq!(
            is_equitable(&s, &Partition::trivial(4)),
            Err(PartitionError::PartitionMismatch { expected: 3, got: 4 })
        );
    }

    #[test]
    fn path4_refinement() {
        let (_, s) = sa(Lattice::Path(4));
        // rows of P sum to one, so the trivial partition is already equitable
        let p = coarsest_equitable_refinement(&s, &Partition::trivial(4)).unwrap();
        assert_eq!(p.r(), 1);
        let seed = Partition::new(4, vec![vec![0], vec![1, 2, 3]]).unwrap();
        let p = coarsest_equitable_refinement(&s, &seed).unwrap();
        assert_eq!(p, Partition::singletons(4));
        let seed = Partition::new(4, vec![vec![0, 3], vec![1, 2]]).unwrap();
        assert_eq!(coarsest_equitable_refinement(&s, &seed).unwrap(), seed);
    }

    #[test]
    fn transitive_graph_stays_trivial() {
        let (_, s) = sa(Lattice::TorusMesh { rows: 4, cols: 4 });
        let p = coarsest_equitable_refinement(&s, &Partition::trivial(16)).unwrap();
        assert_eq!(p.r(), 1);
    }

    #[test]
    fn orbit_basics() {
        let (g, _) = sa(Lattice::Cycle(4));
        assert_eq!(orbits_from_generators(&g, &[]).unwrap(), Partition::singletons(4));
        let p = orbits_from_generators(&g, &[cycle_rotation(4, 1)]).unwrap();
        assert_eq!(p.r(), 1);
    }

    #[test]
    fn orbit_errors() {
        let (g, _) = sa(Lattice::Path(3));
        assert!(matches!(
            orbits_from_generators(&g, &[vec![0, 0, 1]]),
            Err(PartitionError::NotPermutation { index: 0, .. })
        ));
        assert!(matches!(
            orbits_from_generators(&g, &[vec![1, 0, 2]]),
            Err(PartitionError::NotAutomorphism { index: 0, .. })
        ));
        assert!(orbits_from_generators(&g, &[vec![2, 1, 0]]).is_ok());
    }

    #[test]
    fn weighted_automorphism_respects_weights() {
        let g = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert!(matches!(
            orbits_from_generators(&g, &[vec![2, 1, 0]]),
            Err(PartitionError::NotAutomorphism { .. })
        ));
    }

    #[test]
    fn two_vertex_decomposition_has_no_transverse_block() {
        let (_, s) = sa(Lattice::Path(2));
        let pi = Partition::singletons(2);
        let b = block_decompose(&s, &pi).unwrap();
        assert_eq!(b.pbar_block, Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(b.m_block.rows(), 0);
    }

    #[test]
    fn barbell_block_triangular() {
        let (_, s) = sa(Lattice::Barbell);
        let pi = Partition::new(8, vec![vec![2, 5], vec![0, 1, 3, 4, 6, 7]]).unwrap();
        let b = block_decompose(&s, &pi).unwrap();
        assert!(b.lower_left_max() < 1e-10);
        assert!(b.lifting_defect(&s) < 1e-12);
        assert_eq!(b.non_representatives, vec![1, 3, 4, 6, 7, 5]);
    }

    #[test]
    fn quotient_reduced_graph_omits_self_loops() {
        let (_, s) = sa(Lattice::Barbell);
        let pi = Partition::new(8, vec![vec![2, 5], vec![0, 1, 3, 4, 6, 7]]).unwrap();
        let qm = quotient(&s, &pi).unwrap();
        assert_eq!(qm.reduced_edges, vec![(0, 1)]);
        assert_eq!(qm.reduced_bipartite, Some(vec![false, true]));
        assert!(qm.detailed_balance_defect() < 1e-12);
        let flip = qm.sign_flip().unwrap();
        let signed = qm.pbar.scale(&flip, &flip);
        assert!(signed[(0, 1)] <= 0.0 && signed[(1, 0)] <= 0.0);
    }
}
