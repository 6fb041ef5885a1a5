//! Steady-state pattern analysis for lateral-inhibition cell networks.
//!
//! Cells sit on the vertices of a weighted undirected contact graph. Each
//! cell receives the degree-weighted average of its neighbours' outputs and
//! responds through a positive, bounded, decreasing static map `T`. This
//! crate finds candidate patterns through equitable vertex partitions,
//! certifies their existence from the spectrum of the quotient matrix,
//! solves the reduced fixed-point equation, lifts the solution back to the
//! whole network and certifies local stability three ways: the full
//! Jacobian spectrum, the representative/transverse block split, and a
//! small-gain test on the quotient.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and rendering live in the `patternq` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cell;
pub mod existence;
pub mod graph;
pub mod lattice;
pub mod matrix;
pub mod partition;
pub mod simulate;
pub mod spectral;
pub mod stability;

pub use cell::{HillMap, StaticMap};
pub use existence::{ExistenceCertificate, PatternSolution, Verdict};
pub use graph::{Bipartition, ScaledAdjacency, WeightedGraph};
pub use lattice::Lattice;
pub use matrix::Matrix;
pub use partition::{BlockDecomposition, Partition, QuotientModel};
pub use spectral::Spectrum;
pub use stability::StabilityReport;
