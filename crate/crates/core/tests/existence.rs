mod common;

use common::*;
use patternq_core::cell::fixed_point;
use patternq_core::existence::{
    certify, lift, solve_reduced, SolveMethod, SolveWarning, Strategy, Verdict,
};
use patternq_core::lattice::{builtin_example, Lattice};
use patternq_core::partition::quotient;
use patternq_core::{HillMap, Partition};
use proptest::prelude::*;

fn example(name: &str) -> (patternq_core::WeightedGraph, Partition) {
    builtin_example(name).unwrap().build()
}

/// Nonhomogeneous roots of the pentagon/hexagon quotient equation
/// `z1 = T(z2)`, `z2 = (T(z1) + T(z2)) / 2`, found by scanning
/// `F(z2) = (T(T(z2)) + T(z2)) / 2 - z2` for sign changes on a grid and
/// bisecting each bracket.
fn buckyball_oracle(h: f64) -> Vec<(f64, f64)> {
    let t = |u: f64| hill(2.0, 1.0, h, u);
    let f = |z2: f64| 0.5 * (t(t(z2)) + t(z2)) - z2;
    let grid = 4000;
    let mut roots = Vec::new();
    for k in 0..grid {
        let (a, b) = (2.0 * k as f64 / grid as f64, 2.0 * (k + 1) as f64 / grid as f64);
        if f(a) * f(b) > 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z2 = 0.5 * (lo + hi);
        if (z2 - 1.0).abs() > 1e-6 {
            roots.push((t(z2), z2));
        }
    }
    roots
}

#[test]
fn pair_roots_match_bisection_oracle() {
    let (g, pi) = (Lattice::Path(2).generate().unwrap(), Partition::singletons(2));
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    for h in [2.5, 3.0, 4.0, 6.0, 10.0] {
        let m = HillMap::symmetric(h);
        let cert = certify(&q, &m).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        let (hi, lo) = pair_oracle(h);
        for strategy in [Strategy::Newton, Strategy::Ode] {
            let red = solve_reduced(&q, &m, &cert, strategy).unwrap();
            let mut z = red.z.clone();
            z.sort_by(|a, b| b.total_cmp(a));
            assert!((z[0] - hi).abs() < 1e-9, "h = {h}, {strategy:?}");
            assert!((z[1] - lo).abs() < 1e-9, "h = {h}, {strategy:?}");
        }
    }
}

#[test]
fn buckyball_root_matches_scan_oracle() {
    let (g, pi) = example("buckyball_faces");
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    for h in [5.0, 6.0, 8.0] {
        let m = HillMap::symmetric(h);
        let cert = certify(&q, &m).unwrap();
        let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
        let roots = buckyball_oracle(h);
        assert!(!roots.is_empty(), "h = {h}");
        let found = std::iter::once(&red.z)
            .chain(&red.alternatives)
            .all(|z| roots.iter().any(|&(a, b)| (z[0] - a).abs() < 1e-9 && (z[1] - b).abs() < 1e-9));
        assert!(found, "h = {h}: {:?} / {:?} vs oracle {roots:?}", red.z, red.alternatives);
        assert!(red.residual_reduced < 1e-10);
        let p = lift(&sa, &pi, &red, &m).unwrap();
        assert!(p.residual_full < 1e-10);
    }
}

#[test]
fn chosen_root_is_lexicographically_largest() {
    let (g, pi) = example("barbell");
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    let m = HillMap::symmetric(8.0);
    let cert = certify(&q, &m).unwrap();
    let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
    for alt in &red.alternatives {
        assert!(red.z.as_slice() > alt.as_slice());
    }
}

#[test]
fn uncertified_returns_homogeneous_with_warning() {
    let (g, pi) = example("hex_c");
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    let m = HillMap::symmetric(8.0);
    let cert = certify(&q, &m).unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
    let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
    assert!(red.homogeneous);
    assert_eq!(red.method, SolveMethod::Homogeneous);
    assert_eq!(red.warning, Some(SolveWarning::NotCertified));
    assert_eq!(red.z, vec![1.0, 1.0]);
}

#[test]
fn non_bipartite_reduced_graph_fails_assumption() {
    // three singleton classes of a triangle: reduced graph is a triangle
    let g = Lattice::Cycle(3).generate().unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &Partition::singletons(3)).unwrap();
    let cert = certify(&q, &HillMap::symmetric(10.0)).unwrap();
    assert!(!cert.assumption1);
    assert_eq!(cert.verdict, Verdict::AssumptionFailed);
}

#[test]
fn slope_threshold_matches_lambda() {
    let (g, pi) = example("hex_b");
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    let cert = certify(&q, &HillMap::symmetric(6.0)).unwrap();
    assert!((cert.slope_threshold().unwrap() - 3.0).abs() < 1e-9);
    assert!((cert.t_prime_star + 3.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn general_hill_fixed_point_and_roots(
        a in 0.5f64..5.0,
        k in 0.2f64..3.0,
        h in 1.0f64..12.0,
    ) {
        let m = HillMap::new(a, k, h, 1.0).unwrap();
        let fp = fixed_point(&m);
        prop_assert!((hill(a, k, h, fp.u_star) - fp.u_star).abs() < 1e-12 * a.max(1.0));
        let g = Lattice::Path(2).generate().unwrap();
        let sa = g.scaled_adjacency().unwrap();
        let pi = Partition::singletons(2);
        let q = quotient(&sa, &pi).unwrap();
        let cert = certify(&q, &m).unwrap();
        let slope = -hill_prime(a, k, h, fp.u_star);
        prop_assert_eq!(cert.verdict == Verdict::Certified, slope > 1.0 + 1e-9);
        if cert.verdict == Verdict::Certified && slope > 1.05 {
            let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
            prop_assert!(!red.homogeneous);
            prop_assert!(red.residual_reduced < 1e-10);
            // the pair swaps: z1 = T(z2), z2 = T(z1)
            prop_assert!((red.z[0] - hill(a, k, h, red.z[1])).abs() < 1e-9);
            prop_assert!(red.z[0] >= 0.0 && red.z[0] <= a && red.z[1] >= 0.0 && red.z[1] <= a);
        }
    }
}
