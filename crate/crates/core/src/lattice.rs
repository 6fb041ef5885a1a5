//! Built-in contact graphs, their symmetry generators, and the example
//! partitions used throughout the test suites.
//!
//! Numbering is deterministic:
//!
//! * `TorusMesh` and `HexTorus` are row-major, vertex `r * cols + c`.
//! * `HexTorus` uses axial coordinates `(c, r)`; a cell touches the cells at
//!   offsets `(±1, 0)`, `(0, ±1)`, `(+1, -1)` and `(-1, +1)`, all modulo the
//!   lattice size.
//! * `Buckyball` is the face-adjacency graph of the truncated icosahedron:
//!   vertices `0..12` are the pentagonal faces, `12..32` the hexagonal ones.
//! * `Barbell` is two triangles `{0,1,2}` and `{5,6,7}` joined by the path
//!   `2-3-4-5`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::partition::{orbits_from_generators, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("bad lattice size for {kind}: {reason}")]
    BadLatticeSize { kind: &'static str, reason: String },
    #[error("unknown lattice kind `{0}`")]
    UnknownKind(String),
}

/// Generator specification for a built-in unit-weight contact graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    Path(usize),
    Cycle(usize),
    TorusMesh { rows: usize, cols: usize },
    HexTorus { rows: usize, cols: usize },
    Buckyball,
    Barbell,
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Lattice::Path(n) => write!(f, "path:{n}"),
            Lattice::Cycle(n) => write!(f, "cycle:{n}"),
            Lattice::TorusMesh { rows, cols } => write!(f, "torus_mesh:{rows},{cols}"),
            Lattice::HexTorus { rows, cols } => write!(f, "hex_torus:{rows},{cols}"),
            Lattice::Buckyball => write!(f, "buckyball"),
            Lattice::Barbell => write!(f, "fig5"),
        }
    }
}

fn bad(kind: &'static str, reason: &str) -> LatticeError {
    LatticeError::BadLatticeSize {
        kind,
        reason: String::from(reason),
    }
}

impl Lattice {
    /// Parses `kind[:a[,b]]`, e.g. `torus_mesh:4,4`, `path:5`, `buckyball`.
    pub fn parse(spec: &str) -> Result<Self, LatticeError> {
        let (kind, args) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), a.trim()),
            None => (spec.trim(), ""),
        };
        let nums: Vec<usize> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| LatticeError::UnknownKind(String::from(spec)))?
        };
        let need = |k: usize| -> Result<(), LatticeError> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(LatticeError::UnknownKind(String::from(spec)))
            }
        };
        match kind {
            "path" => need(1).map(|_| Lattice::Path(nums[0])),
            "cycle" => need(1).map(|_| Lattice::Cycle(nums[0])),
            "torus_mesh" | "torus" => need(2).map(|_| Lattice::TorusMesh {
                rows: nums[0],
                cols: nums[1],
            }),
            "hex_torus" | "hex" => need(2).map(|_| Lattice::HexTorus {
                rows: nums[0],
                cols: nums[1],
            }),
            "buckyball" => need(0).map(|_| Lattice::Buckyball),
            "fig5" | "barbell" => need(0).map(|_| Lattice::Barbell),
            _ => Err(LatticeError::UnknownKind(String::from(spec))),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            Lattice::Path(n) | Lattice::Cycle(n) => n,
            Lattice::TorusMesh { rows, cols } | Lattice::HexTorus { rows, cols } => rows * cols,
            Lattice::Buckyball => 32,
            Lattice::Barbell => 8,
        }
    }

    pub fn generate(&self) -> Result<WeightedGraph, LatticeError> {
        let edges = match *self {
            Lattice::Path(n) => {
                if n < 2 {
                    return Err(bad("path", "need at least 2 vertices"));
                }
                (0..n - 1).map(|i| (i, i + 1)).collect()
            }
            Lattice::Cycle(n) => {
                if n < 3 {
                    return Err(bad("cycle", "need at least 3 vertices"));
                }
                (0..n).map(|i| (i, (i + 1) % n)).collect()
            }
            Lattice::TorusMesh { rows, cols } => {
                if rows < 3 || cols < 3 {
                    return Err(bad("torus_mesh", "rows and cols must be at least 3"));
                }
                let mut e = Vec::with_capacity(2 * rows * cols);
                for r in 0..rows {
                    for c in 0..cols {
                        let v = r * cols + c;
                        e.push((v, r * cols + (c + 1) % cols));
                        e.push((v, ((r + 1) % rows) * cols + c));
                    }
                }
                e
            }
            Lattice::HexTorus { rows, cols } => {
                if rows < 3 || cols < 3 {
                    return Err(bad("hex_torus", "rows and cols must be at least 3"));
                }
                let mut e = Vec::with_capacity(3 * rows * cols);
                for r in 0..rows {
                    for c in 0..cols {
                        let v = r * cols + c;
                        let at = |dc: usize, dr: usize| ((r + dr) % rows) * cols + (c + dc) % cols;
                        e.push((v, at(1, 0)));
                        e.push((v, at(0, 1)));
                        e.push((v, at(1, rows - 1)));
                    }
                }
                e
            }
            Lattice::Buckyball => buckyball_edges(),
            Lattice::Barbell => vec![
                (0, 1),
                (0, 2),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (5, 7),
                (6, 7),
            ],
        };
        Ok(WeightedGraph::unweighted(self.vertex_count(), &edges)
            .expect("generated edge lists are valid"))
    }
}

/// Icosahedron with vertex 0 on top, upper ring `1..6`, lower ring `6..11`
/// and vertex 11 at the bottom. Upper vertex `k` touches lower vertices `k`
/// and `k + 1`.
fn icosahedron_faces() -> Vec<[usize; 3]> {
    let u = |k: usize| 1 + k % 5;
    let l = |k: usize| 6 + k % 5;
    let mut faces = Vec::with_capacity(20);
    for k in 0..5 {
        faces.push([0, u(k), u(k + 1)]);
    }
    for k in 0..5 {
        faces.push([u(k), l(k), l(k + 1)]);
    }
    for k in 0..5 {
        faces.push([u(k), u(k + 1), l(k + 1)]);
    }
    for k in 0..5 {
        faces.push([11, l(k), l(k + 1)]);
    }
    faces
}

fn buckyball_edges() -> Vec<(usize, usize)> {
    let faces = icosahedron_faces();
    let mut edges = Vec::with_capacity(90);
    // pentagon (icosahedron vertex) touches the hexagons (icosahedron faces)
    // around it
    for (f, tri) in faces.iter().enumerate() {
        for &p in tri {
            edges.push((p, 12 + f));
        }
    }
    // hexagons touch when the icosahedron faces share an edge
    for a in 0..faces.len() {
        for b in (a + 1)..faces.len() {
            let shared = faces[a].iter().filter(|v| faces[b].contains(v)).count();
            if shared == 2 {
                edges.push((12 + a, 12 + b));
            }
        }
    }
    edges
}

/// Vertex permutations given as image vectors: `perm[i]` is the image of `i`.
pub type Permutation = Vec<usize>;

/// Translation of a `rows x cols` torus by `(dr, dc)`.
///
/// Valid for both `TorusMesh` and `HexTorus`, which share row-major
/// numbering.
pub fn torus_translation(rows: usize, cols: usize, dr: usize, dc: usize) -> Permutation {
    (0..rows * cols)
        .map(|v| {
            let (r, c) = (v / cols, v % cols);
            ((r + dr) % rows) * cols + (c + dc) % cols
        })
        .collect()
}

/// Row reflection `r -> (axis - r) mod rows` of a square-mesh torus.
pub fn torus_row_reflection(rows: usize, cols: usize, axis: usize) -> Permutation {
    (0..rows * cols)
        .map(|v| {
            let (r, c) = (v / cols, v % cols);
            ((axis + rows - r % rows) % rows) * cols + c
        })
        .collect()
}

/// Point reflection `(c, r) -> (-c, -r)` of a torus (square or hex).
pub fn torus_negation(rows: usize, cols: usize) -> Permutation {
    (0..rows * cols)
        .map(|v| {
            let (r, c) = (v / cols, v % cols);
            ((rows - r) % rows) * cols + (cols - c) % cols
        })
        .collect()
}

/// Rotation `i -> i + k` of a cycle.
pub fn cycle_rotation(n: usize, k: usize) -> Permutation {
    (0..n).map(|i| (i + k) % n).collect()
}

/// How a built-in example partition is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSource {
    /// The two-colouring of a bipartite graph.
    Bipartition,
    /// Orbits of the group generated by these automorphisms.
    Orbits(Vec<Permutation>),
    /// Explicit classes.
    Classes(Vec<Vec<usize>>),
}

/// A built-in graph paired with a two-class equitable partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinExample {
    pub name: &'static str,
    pub lattice: Lattice,
    pub source: PartitionSource,
}

impl BuiltinExample {
    /// The graph and its example partition.
    ///
    /// # Panics
    ///
    /// Never for the catalogue entries; every one is checked by the tests.
    pub fn build(&self) -> (WeightedGraph, Partition) {
        let g = self.lattice.generate().expect("built-in lattice is valid");
        let n = g.n();
        let pi = match &self.source {
            PartitionSource::Bipartition => {
                let (a, b) = g
                    .bipartition()
                    .expect("connected")
                    .expect("graph is bipartite");
                Partition::new(n, vec![a, b])
            }
            PartitionSource::Orbits(perms) => orbits_from_generators(&g, perms),
            PartitionSource::Classes(c) => Partition::new(n, c.clone()),
        }
        .expect("built-in partition is valid");
        (g, pi)
    }
}

/// Looks up a built-in example by name.
pub fn builtin_example(name: &str) -> Option<BuiltinExample> {
    builtin_examples().into_iter().find(|e| e.name == name)
}

/// The catalogue of built-in example partitions.
///
/// * `torus_checkerboard` – two-colouring of the 4x4 torus.
/// * `torus_row_pairs` – orbits of horizontal translation by two, the glide
///   `(r, c) -> (r + 2, c + 1)` and the row reflection `r -> 1 - r`.
/// * `hex_a` – one colour class of the three-colouring of the 6x6 hex torus
///   against the other two.
/// * `hex_b`, `hex_e` – column-parity and row-parity stripes.
/// * `hex_c`, `hex_d` – every third column, every third row.
/// * `buckyball_faces` – pentagons against hexagons.
/// * `barbell` – the two triangle apexes `{2, 5}` against everything else.
pub fn builtin_examples() -> Vec<BuiltinExample> {
    let t = Lattice::TorusMesh { rows: 4, cols: 4 };
    let h = Lattice::HexTorus { rows: 6, cols: 6 };
    vec![
        BuiltinExample {
            name: "torus_checkerboard",
            lattice: t,
            source: PartitionSource::Bipartition,
        },
        BuiltinExample {
            name: "torus_row_pairs",
            lattice: t,
            source: PartitionSource::Orbits(vec![
                torus_translation(4, 4, 0, 2),
                torus_translation(4, 4, 2, 1),
                torus_row_reflection(4, 4, 1),
            ]),
        },
        BuiltinExample {
            name: "hex_a",
            lattice: h,
            // translations preserving the 3-colouring, plus the point
            // reflection that swaps the two non-zero colours
            source: PartitionSource::Orbits(vec![
                torus_translation(6, 6, 1, 1),
                torus_translation(6, 6, 0, 3),
                torus_negation(6, 6),
            ]),
        },
        BuiltinExample {
            name: "hex_b",
            lattice: h,
            source: PartitionSource::Orbits(vec![
                torus_translation(6, 6, 1, 0),
                torus_translation(6, 6, 0, 2),
            ]),
        },
        BuiltinExample {
            name: "hex_c",
            lattice: h,
            source: PartitionSource::Orbits(vec![
                torus_translation(6, 6, 1, 0),
                torus_translation(6, 6, 0, 3),
                torus_negation(6, 6),
            ]),
        },
        BuiltinExample {
            name: "hex_d",
            lattice: h,
            source: PartitionSource::Orbits(vec![
                torus_translation(6, 6, 0, 1),
                torus_translation(6, 6, 3, 0),
                torus_negation(6, 6),
            ]),
        },
        BuiltinExample {
            name: "hex_e",
            lattice: h,
            source: PartitionSource::Orbits(vec![
                torus_translation(6, 6, 0, 1),
                torus_translation(6, 6, 2, 0),
            ]),
        },
        BuiltinExample {
            name: "buckyball_faces",
            lattice: Lattice::Buckyball,
            source: PartitionSource::Classes(vec![(0..12).collect(), (12..32).collect()]),
        },
        BuiltinExample {
            name: "barbell",
            lattice: Lattice::Barbell,
            source: PartitionSource::Classes(vec![vec![2, 5], vec![0, 1, 3, 4, 6, 7]]),
        },
    ]
}
