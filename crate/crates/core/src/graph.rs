//! Weighted undirected contact graphs and their scaled adjacency matrices.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex index {index} out of range for {n} vertices")]
    BadIndex { index: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("edge ({i}, {j}) has non-positive weight {w}")]
    NonpositiveWeight { i: usize, j: usize, w: f64 },
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),
    #[error("graph is not connected")]
    NotConnected,
}

/// An undirected edge with `i < j` and a strictly positive weight.
/// The two sides of a two-colouring.
pub type Bipartition = (Vec<usize>, Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected contact graph with symmetric positive weights.
///
/// Edges are canonical: `i < j`, sorted, no duplicates. Pairs that are not
/// listed have weight zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and canonicalises an edge list.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::BadIndex { index, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonpositiveWeight { i: a, j: b, w });
            }
            canon.push(Edge {
                i: a.min(b),
                j: a.max(b),
                w,
            });
        }
        canon.sort_by_key(|e| (e.i, e.j));
        for pair in canon.windows(2) {
            if (pair[0].i, pair[0].j) == (pair[1].i, pair[1].j) {
                return Err(GraphError::DuplicateEdge(pair[0].i, pair[0].j));
            }
        }
        Ok(Self { n, edges: canon })
    }

    /// Unit-weight graph.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let e: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::new(n, &e)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weight of the pair `(i, j)`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&key))
            .map_or(0.0, |k| self.edges[k].w)
    }

    /// Symmetric dense weight matrix `W`.
    pub fn weight_matrix(&self) -> Matrix {
        let mut w = Matrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.i, e.j)] = e.w;
            w[(e.j, e.i)] = e.w;
        }
        w
    }

    /// Neighbour lists `(neighbour, weight)`, each sorted by neighbour.
    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push((e.j, e.w));
            adj[e.j].push((e.i, e.w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    /// Weighted degrees `d_i = sum_j w_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    /// Number of neighbours of every vertex.
    pub fn unweighted_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    /// Row-stochastic scaled adjacency `p_ij = w_ij / d_i`.
    pub fn scaled_adjacency(&self) -> Result<ScaledAdjacency, GraphError> {
        let d = self.degrees();
        if let Some(v) = d.iter().position(|&x| x <= 0.0) {
            return Err(GraphError::IsolatedVertex(v));
        }
        let mut p = Matrix::zeros(self.n, self.n);
        for e in &self.edges {
            p[(e.i, e.j)] = e.w / d[e.i];
            p[(e.j, e.i)] = e.w / d[e.j];
        }
        Ok(ScaledAdjacency { p, d })
    }

    fn bfs_colors(&self) -> (Vec<Option<bool>>, usize) {
        let adj = self.adjacency_lists();
        let mut color = vec![None; self.n];
        let mut reached = 0;
        let mut queue = VecDeque::new();
        color[0] = Some(false);
        queue.push_back(0);
        while let Some(v) = queue.pop_front() {
            reached += 1;
            let c = color[v].unwrap();
            for &(u, _) in &adj[v] {
                if color[u].is_none() {
                    color[u] = Some(!c);
                    queue.push_back(u);
                }
            }
        }
        (color, reached)
    }

    /// True when a breadth-first search from vertex 0 reaches every vertex.
    pub fn is_connected(&self) -> bool {
        self.bfs_colors().1 == self.n
    }

    /// Proper two-colouring `(O_1, O_2)` with vertex 0 in `O_1`, or `None`
    /// if the graph has an odd cycle.
    pub fn bipartition(&self) -> Result<Option<Bipartition>, GraphError> {
        let (color, reached) = self.bfs_colors();
        if reached != self.n {
            return Err(GraphError::NotConnected);
        }
        if self
            .edges
            .iter()
            .any(|e| color[e.i] == color[e.j])
        {
            return Ok(None);
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (v, c) in color.into_iter().enumerate() {
            if c == Some(false) {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        Ok(Some((a, b)))
    }
}

/// The row-stochastic matrix `P = D^{-1} W` together with the degrees `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledAdjacency {
    pub p: Matrix,
    pub d: Vec<f64>,
}

impl ScaledAdjacency {
    #[inline]
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Recovers the symmetric weights `w_ij = d_i p_ij`.
    pub fn weights(&self) -> Matrix {
        self.p.scale_rows(&self.d)
    }

    /// `P x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.p.mul_vec(x)
    }

    /// Compressed sparse rows of `P`: per row, `(column, value)` pairs.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n())
            .map(|i| {
                self.p
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn build_smallest_and_path() {
        let g = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges().len(), 1);
        let g = WeightedGraph::new(3, &[(2, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(g, path3());
        assert_eq!(g.edges()[0], Edge { i: 0, j: 1, w: 1.0 });
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            WeightedGraph::new(3, &[(0, 1, 1.0), (0, 1, 2.0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            WeightedGraph::new(3, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(WeightedGraph::new(3, &[(1, 1, 1.0)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            WeightedGraph::new(3, &[(0, 3, 1.0)]),
            Err(GraphError::BadIndex { index: 3, n: 3 })
        );
        assert!(matches!(
            WeightedGraph::new(3, &[(0, 1, 0.0)]),
            Err(GraphError::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(3, &[(0, 1, f64::NAN)]),
            Err(GraphError::NonpositiveWeight { .. })
        ));
        assert_eq!(WeightedGraph::new(0, &[]), Err(GraphError::Empty));
    }

    #[test]
    fn scaled_adjacency_path_and_pair() {
        let sa = path3().scaled_adjacency().unwrap();
        let want = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]);
        assert_eq!(sa.p, want);
        assert_eq!(sa.d, vec![1.0, 2.0, 1.0]);
        let sa = WeightedGraph::unweighted(2, &[(0, 1)]).unwrap().scaled_adjacency().unwrap();
        assert_eq!(sa.p, Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
    }

    #[test]
    fn isolated_vertex_rejected() {
        let g = WeightedGraph::unweighted(3, &[(0, 1)]).unwrap();
        assert_eq!(g.scaled_adjacency(), Err(GraphError::IsolatedVertex(2)));
    }

    #[test]
    fn weights_round_trip() {
        let g = WeightedGraph::new(3, &[(0, 1, 2.0), (1, 2, 0.5), (0, 2, 1.5)]).unwrap();
        let sa = g.scaled_adjacency().unwrap();
        assert!(sa.weights().max_abs_diff(&g.weight_matrix()) < 1e-15);
        assert_eq!(g.weight(2, 1), 0.5);
        assert_eq!(g.weight(0, 0), 0.0);
    }

    #[test]
    fn connectivity() {
        assert!(path3().is_connected());
        let g = WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.bipartition(), Err(GraphError::NotConnected));
    }

    #[test]
    fn bipartition_triangle_and_path() {
        let tri = WeightedGraph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(tri.bipartition().unwrap(), None);
        let (a, b) = path3().bipartition().unwrap().unwrap();
        assert_eq!(a, vec![0, 2]);
        assert_eq!(b, vec![1]);
    }
}
