//! Human-readable summary of an analysis bundle.

use std::fmt::Write;

use crate::bundle::AnalysisBundle;

const MAX_DENOMINATOR: i64 = 1000;
const FRACTION_TOL: f64 = 1e-9;
/// Eigenvalues this close to zero are reported as zero.
const ZERO_TOL: f64 = 1e-9;

/// Best rational approximation `p/q` with `q <= 1000`, if one is within
/// `1e-9` of `x`. Continued-fraction convergents.
pub fn fraction(x: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let target = x.abs();
    let (mut h1, mut h2, mut k1, mut k2) = (1i64, 0i64, 0i64, 1i64);
    let mut y = target;
    for _ in 0..40 {
        let a = y.floor();
        if a > 1e12 {
            return None;
        }
        let a = a as i64;
        let (h, k) = (a * h1 + h2, a * k1 + k2);
        if k > MAX_DENOMINATOR {
            return None;
        }
        if (h as f64 / k as f64 - target).abs() < FRACTION_TOL {
            return Some((sign * h, k));
        }
        let frac = y - y.floor();
        if frac == 0.0 {
            return None;
        }
        y = 1.0 / frac;
        (h2, h1, k2, k1) = (h1, h, k1, k);
    }
    None
}

/// Six significant digits, trailing zeros dropped.
pub fn short(x: f64) -> String {
    if x == 0.0 {
        return String::from("0");
    }
    let a = x.abs();
    let s = if (1e-4..1e6).contains(&a) {
        let decimals = (5 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    };
    minus(s)
}

/// A rational when one fits, otherwise [`short`]. Uses a true minus sign.
pub fn exact(x: f64) -> String {
    match fraction(x) {
        Some((0, _)) => String::from("0"),
        Some((p, 1)) => minus(format!("{p}")),
        Some((p, q)) => minus(format!("{p}/{q}")),
        None => short(x),
    }
}

fn minus(s: String) -> String {
    match s.strip_prefix('-') {
        Some(rest) => format!("\u{2212}{rest}"),
        None => s,
    }
}

pub fn matrix(rows: &[Vec<f64>]) -> String {
    let inner: Vec<String> = rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|&x| exact(x)).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", inner.join(","))
}

fn list(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|&x| short(x)).collect();
    format!("[{}]", cells.join(", "))
}

fn sizes(classes: &[Vec<usize>]) -> String {
    let s: Vec<String> = classes.iter().map(|c| c.len().to_string()).collect();
    s.join("/")
}

/// The line naming the quotient, its existence eigenvalue and the slope
/// threshold that eigenvalue implies.
pub fn quotient_line(pbar: &[Vec<f64>], lambda_r: f64) -> String {
    let threshold = if lambda_r < -ZERO_TOL {
        format!("threshold |T'(u*)| > {}", exact(-1.0 / lambda_r))
    } else {
        String::from("no threshold (λ_r ≥ 0, inconclusive for every T)")
    };
    format!(
        "P̄ = {}, λ_r = {}, {threshold}",
        matrix(pbar),
        exact(lambda_r)
    )
}

/// Renders the report text.
pub fn report(b: &AnalysisBundle) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        "{} {} bundle, schema {}",
        b.tool.name, b.tool.version, b.schema
    );
    let _ = writeln!(
        w,
        "graph: {}, {} cells, {} edges",
        b.graph.source, b.graph.n, b.graph.edges
    );
    let _ = writeln!(
        w,
        "model: A = {}, K = {}, h = {}, tau = {}",
        short(b.model.a),
        short(b.model.k),
        short(b.model.h),
        short(b.model.tau)
    );
    let _ = writeln!(
        w,
        "partition: {} classes ({}), sizes {}",
        b.partition.classes.len(),
        b.partition.method,
        sizes(&b.partition.classes)
    );
    let c = &b.certificate;
    let _ = writeln!(w, "{}", quotient_line(&b.quotient.pbar, c.lambda_r));
    let _ = writeln!(w, "quotient spectrum: {}", {
        let v: Vec<String> = b.quotient.spectrum.iter().map(|&x| exact(x)).collect();
        v.join(", ")
    });
    if !c.assumption1 {
        let _ = writeln!(w, "reduced graph is not bipartite");
    }
    let _ = writeln!(
        w,
        "u* = {}, T'(u*) = {}, |T'(u*)| λ_r = {}",
        short(c.u_star),
        short(c.t_prime_star),
        short(c.condition_value)
    );
    let _ = writeln!(w, "existence: {}", c.verdict);

    let p = &b.pattern;
    if p.homogeneous {
        let _ = writeln!(w, "pattern: homogeneous fixed point u* = {}", short(c.u_star));
    } else {
        let _ = writeln!(
            w,
            "pattern: z = {} ({}, residual {})",
            list(&p.z),
            p.method,
            short(p.residual_full)
        );
    }
    if let Some(warn) = &p.warning {
        let _ = writeln!(w, "  warning: {warn}");
    }
    if p.candidates.len() > 1 {
        for (k, cand) in p.candidates.iter().enumerate() {
            let _ = writeln!(
                w,
                "  root {k}: z = {}, {} (abscissa {})",
                list(&cand.z),
                cand.verdict,
                short(cand.abscissa)
            );
        }
        if p.selection == "stable_alternative" {
            let _ = writeln!(w, "  the solver's root is not stable; a stable root is reported");
        }
    }

    let st = &b.stability;
    let _ = write!(w, "stability: {}", st.verdict);
    if let Some(f) = &st.full {
        let _ = write!(w, ", abscissa {}", short(f.abscissa));
        if f.approximate {
            let _ = write!(w, " (Gershgorin bound)");
        }
    }
    let _ = writeln!(w);
    if let Some(bl) = &st.blocks {
        let top = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            w,
            "  representative block max {}, transverse block max {}",
            short(top(&bl.representative)),
            if bl.transverse.is_empty() {
                String::from("(empty)")
            } else {
                short(top(&bl.transverse))
            }
        );
    }
    if let Some(sg) = &st.small_gain {
        let _ = writeln!(
            w,
            "  small gain: ρ(P̄Γ̄) = {}, ρ(PΓ) = {}, {}",
            short(sg.rho_reduced),
            short(sg.rho_full),
            sg.verdict
        );
    }
    if let Some(sim) = &b.simulation {
        let _ = write!(w, "simulation: {}", sim.outcome);
        if !sim.groups.is_empty() {
            let _ = write!(w, ", groups {}", sizes(&sim.groups));
        }
        let _ = write!(w, ", t = {}", short(sim.final_time));
        if let Some(note) = &sim.note {
            let _ = write!(w, " ({note})");
        }
        let _ = writeln!(w);
    }
    let _ = writeln!(
        w,
        "outcome: {} (exit {})",
        b.outcome.status, b.outcome.exit_code
    );
    s
}
