//! ASCII and SVG pictures of a steady state on a lattice.
//!
//! Cells are grouped by value with the same single-linkage clustering the
//! simulator uses; the highest group is drawn dark and the rest light.

use std::fmt::Write;

use patternq_core::lattice::Lattice;
use patternq_core::simulate::{cluster, EmpiricalPattern};

use crate::error::{CliError, Stage};

/// Number of pentagon-face cells at the start of the buckyball numbering.
const PENTAGONS: usize = 12;

const GLYPHS: [char; 6] = ['#', '.', 'o', '+', 'x', '*'];
const COLOURS: [&str; 6] = ["#222222", "#f2f2f2", "#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Torus { rows: usize, cols: usize },
    Hex { rows: usize, cols: usize },
    Bucky,
    /// Cells in index order on one line.
    Line,
}

impl Layout {
    /// `torus[:R,C]`, `hex[:R,C]`, `bucky` or `line`; sizes default to a
    /// square with `n` cells.
    pub fn parse(spec: &str, n: usize) -> Result<Self, CliError> {
        let bad = || CliError::new(Stage::Render, format!("bad layout `{spec}`"));
        let (kind, dims) = match spec.split_once(':') {
            Some((k, d)) => {
                let (r, c) = d.split_once(',').ok_or_else(bad)?;
                let r = r.trim().parse().map_err(|_| bad())?;
                let c = c.trim().parse().map_err(|_| bad())?;
                (k, Some((r, c)))
            }
            None => (spec, None),
        };
        let dims = || -> Result<(usize, usize), CliError> {
            let (r, c) = match dims {
                Some(d) => d,
                None => {
                    let s = (n as f64).sqrt().round() as usize;
                    (s, s)
                }
            };
            if r * c != n {
                return Err(CliError::new(
                    Stage::Render,
                    format!("layout {r}x{c} does not fit {n} cells"),
                ));
            }
            Ok((r, c))
        };
        match kind {
            "torus" | "torus_mesh" => dims().map(|(rows, cols)| Layout::Torus { rows, cols }),
            "hex" | "hex_torus" => dims().map(|(rows, cols)| Layout::Hex { rows, cols }),
            "bucky" | "buckyball" if n == 32 => Ok(Layout::Bucky),
            "bucky" | "buckyball" => Err(CliError::new(
                Stage::Render,
                format!("buckyball layout needs 32 cells, got {n}"),
            )),
            "line" => Ok(Layout::Line),
            _ => Err(bad()),
        }
    }

    pub fn for_lattice(l: &Lattice) -> Self {
        match *l {
            Lattice::TorusMesh { rows, cols } => Layout::Torus { rows, cols },
            Lattice::HexTorus { rows, cols } => Layout::Hex { rows, cols },
            Lattice::Buckyball => Layout::Bucky,
            _ => Layout::Line,
        }
    }
}

/// Group index of every cell.
fn labels(groups: &EmpiricalPattern, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for (g, members) in groups.groups.iter().enumerate() {
        for &v in members {
            out[v] = g;
        }
    }
    out
}

fn glyph(g: usize) -> char {
    GLYPHS[g % GLYPHS.len()]
}

fn colour(g: usize) -> &'static str {
    COLOURS[g % COLOURS.len()]
}

/// Default clustering gap: `1e-4` of the largest value.
pub fn default_tol(x: &[f64]) -> f64 {
    1e-4 * x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE)
}

pub fn ascii(x: &[f64], layout: Layout, tol: f64) -> String {
    let groups = cluster(x, tol);
    let lab = labels(&groups, x.len());
    let mut s = String::new();
    let row = |s: &mut String, cells: &[usize]| {
        let line: Vec<String> = cells.iter().map(|&v| glyph(lab[v]).to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    };
    match layout {
        Layout::Torus { rows, cols } => {
            for r in 0..rows {
                row(&mut s, &(r * cols..(r + 1) * cols).collect::<Vec<_>>());
            }
        }
        Layout::Hex { rows, cols } => {
            // axial coordinates: each row sits half a cell right of the last
            for r in 0..rows {
                s.push_str(&" ".repeat(r));
                row(&mut s, &(r * cols..(r + 1) * cols).collect::<Vec<_>>());
            }
        }
        Layout::Bucky => {
            s.push_str("pentagons ");
            row(&mut s, &(0..PENTAGONS).collect::<Vec<_>>());
            s.push_str("hexagons  ");
            row(&mut s, &(PENTAGONS..x.len()).collect::<Vec<_>>());
        }
        Layout::Line => row(&mut s, &(0..x.len()).collect::<Vec<_>>()),
    }
    for (g, members) in groups.groups.iter().enumerate() {
        let _ = writeln!(
            s,
            "{} {} cells at {}",
            glyph(g),
            members.len(),
            crate::report::short(groups.values[g])
        );
    }
    s
}

const CELL: f64 = 24.0;

pub fn svg(x: &[f64], layout: Layout, tol: f64) -> String {
    let groups = cluster(x, tol);
    let lab = labels(&groups, x.len());
    let mut body = String::new();
    let (width, height) = match layout {
        Layout::Torus { rows, cols } => {
            for (v, &g) in lab.iter().enumerate() {
                let (r, c) = (v / cols, v % cols);
                let _ = writeln!(
                    body,
                    r##"  <rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" stroke="#888"/>"##,
                    c as f64 * CELL,
                    r as f64 * CELL,
                    colour(g)
                );
            }
            (cols as f64 * CELL, rows as f64 * CELL)
        }
        Layout::Hex { rows, cols } => {
            // pointy-top hexagons of circumradius s
            let s = CELL / 3f64.sqrt();
            let w = CELL;
            for (v, &g) in lab.iter().enumerate() {
                let (r, c) = (v / cols, v % cols);
                let cx = w * (c as f64 + 0.5 * r as f64) + w / 2.0;
                let cy = 1.5 * s * r as f64 + s;
                let pts: Vec<String> = (0..6)
                    .map(|k| {
                        let a = core::f64::consts::PI / 3.0 * k as f64 + core::f64::consts::PI / 6.0;
                        format!("{:.2},{:.2}", cx + s * a.cos(), cy + s * a.sin())
                    })
                    .collect();
                let _ = writeln!(
                    body,
                    r##"  <polygon points="{}" fill="{}" stroke="#888"/>"##,
                    pts.join(" "),
                    colour(g)
                );
            }
            (
                w * (cols as f64 + 0.5 * rows as f64),
                1.5 * s * rows as f64 + 0.5 * s,
            )
        }
        Layout::Bucky | Layout::Line => {
            let split = if layout == Layout::Bucky { PENTAGONS } else { x.len() };
            let per_row = split.max(x.len() - split);
            for (v, &g) in lab.iter().enumerate() {
                let (r, c) = if v < split { (0, v) } else { (1, v - split) };
                let _ = writeln!(
                    body,
                    r##"  <circle cx="{}" cy="{}" r="{}" fill="{}" stroke="#888"/>"##,
                    (c as f64 + 0.5) * CELL,
                    (r as f64 + 0.5) * CELL,
                    0.4 * CELL,
                    colour(g)
                );
            }
            let rows = if split < x.len() { 2.0 } else { 1.0 };
            (per_row as f64 * CELL, rows * CELL)
        }
    };
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n{body}</svg>\n",
        width.ceil(),
        height.ceil()
    )
}
