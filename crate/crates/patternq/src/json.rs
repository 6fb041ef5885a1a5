//! File formats and canonical JSON output.
//!
//! Every float is written with 17 significant digits so that a value read
//! back parses to the same bits, which keeps bundles byte-reproducible and
//! their hashes stable across a write/read cycle.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use patternq_core::{HillMap, Partition, WeightedGraph};

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return String::from("0");
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}", trim_zeros(mant), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Wraps a formatter, replacing its float output with [`g17`].
struct G17<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for G17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

fn write_with<T: Serialize + ?Sized, F: Formatter>(value: &T, f: F) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17(f));
    value
        .serialize(&mut ser)
        .expect("in-memory serialisation of plain data");
    out
}

/// Indented JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = String::from_utf8(write_with(value, PrettyFormatter::with_indent(b"  ")))
        .expect("serde_json emits UTF-8");
    s.push('\n');
    s
}

/// Single-line JSON; the byte string that gets hashed.
pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    write_with(value, CompactFormatter)
}

/// Hex SHA-256 of `parts` joined by `\n`.
pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for (k, p) in parts.iter().enumerate() {
        if k > 0 {
            h.update(b"\n");
        }
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// `{"n": .., "edges": [[i, j, w], ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphFile {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        Self {
            n: g.n(),
            edges: g.edges().iter().map(|e| (e.i, e.j, e.w)).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<WeightedGraph, patternq_core::graph::GraphError> {
        WeightedGraph::new(self.n, &self.edges)
    }
}

/// `{"classes": [[v, ..], ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub classes: Vec<Vec<usize>>,
}

impl PartitionFile {
    pub fn from_partition(p: &Partition) -> Self {
        Self {
            classes: p.classes().to_vec(),
        }
    }
}

/// `{"perms": [[image of 0, ..], ..]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermsFile {
    pub perms: Vec<Vec<usize>>,
}

/// `{"A": 2.0, "K": 1.0, "h": 6.0, "tau": 1.0}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub h: f64,
    #[serde(default = "one")]
    pub tau: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelFile {
    pub fn from_model(m: &HillMap) -> Self {
        Self {
            a: m.amplitude,
            k: m.threshold,
            h: m.exponent,
            tau: m.tau,
        }
    }

    pub fn to_model(&self) -> Result<HillMap, patternq_core::cell::CellError> {
        HillMap::new(self.a, self.k, self.h, self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5,
            1e-12,
            6.02e23,
            f64::MIN_POSITIVE,
            1.503433,
            123456789.0,
        ] {
            let s = g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn g17_is_short_for_simple_values() {
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.25), "0.25");
        assert_eq!(g17(-0.5), "-0.5");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1e20), "1e20");
        assert_eq!(g17(0.1), "0.10000000000000001");
    }

    #[test]
    fn canonical_output_reparses_to_same_bytes() {
        let m = ModelFile {
            a: 2.0,
            k: 1.0,
            h: 6.0,
            tau: 0.1,
        };
        let bytes = to_canonical(&m);
        let back: ModelFile = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(to_canonical(&back), bytes);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            r#"{"A":2,"K":1,"h":6,"tau":0.10000000000000001}"#
        );
    }

    #[test]
    fn model_tau_defaults_to_one() {
        let m: ModelFile = serde_json::from_str(r#"{"A": 2, "K": 1, "h": 4}"#).unwrap();
        assert_eq!(m.tau, 1.0);
    }
}
