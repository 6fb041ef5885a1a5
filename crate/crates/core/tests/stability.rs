mod common;

use common::*;
use patternq_core::cell::StaticMap;
use patternq_core::existence::{certify, lift, solve_reduced, Strategy};
use patternq_core::partition::{block_decompose, quotient};
use patternq_core::stability::{
    analyze, block_stability, full_jacobian_stability, is_nonsingular_m_matrix,
    m_block_spectrum, small_gain, small_gain_with, Methods, SmallGainVerdict, StabilityVerdict,
};
use patternq_core::{HillMap, Matrix};
use proptest::prelude::*;

fn jacobian(p: &Matrix, t: &[f64], tau: f64) -> Vec<Vec<f64>> {
    let n = p.rows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (if i == j { -1.0 } else { 0.0 } + t[i] * p[(i, j)]) / tau)
                .collect()
        })
        .collect()
}

/// Real eigenvalues of a 2x2 matrix with real spectrum.
fn eig_2x2(a: &[Vec<f64>]) -> Vec<f64> {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    vec![tr / 2.0 + disc, tr / 2.0 - disc]
}

#[test]
fn full_spectrum_matches_explicit_jacobian() {
    let m = HillMap::new(2.0, 1.0, 6.0, 0.5).unwrap();
    for (name, g, pi) in builtins() {
        let sa = g.scaled_adjacency().unwrap();
        let q = quotient(&sa, &pi).unwrap();
        let cert = certify(&q, &m).unwrap();
        let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
        let p = lift(&sa, &pi, &red, &m).unwrap();
        let s = full_jacobian_stability(&sa, &m, &p.u).unwrap();
        let t: Vec<f64> = p.u.iter().map(|&u| m.slope(u)).collect();
        let abs_t: Vec<f64> = t.iter().map(|x| x.abs()).collect();
        // -I + diag(t) P  ~  -I - |T|^1/2 D^-1/2 W D^-1/2 |T|^1/2
        let want: Vec<f64> = descending(
            sym_eigs(&sym_scaled(&g, &abs_t)).iter().map(|l| (-1.0 - l) / 0.5).collect(),
        );
        let explicit = trace_powers(&jacobian(&sa.p, &t, 0.5), 3);
        for (a, b) in explicit.iter().zip(power_sums(&want, 3)) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{name}");
        }
        assert!(max_sorted_diff(&s.spectrum, &want) < 1e-8, "{name}");
        assert_eq!(s.verdict, StabilityVerdict::from_abscissa(want[0]), "{name}");
    }
}

#[test]
fn m_block_and_transverse_block_match_explicit_matrices() {
    let m = HillMap::symmetric(6.0);
    for (name, g, pi) in builtins() {
        let sa = g.scaled_adjacency().unwrap();
        let d = block_decompose(&sa, &pi).unwrap();
        let spec_m = m_block_spectrum(&sa, &d).unwrap();
        let ones = vec![1.0; g.n()];
        let sqrt_d: Vec<f64> = sa.d.iter().map(|x| x.sqrt()).collect();
        let want = restricted_sym_spectrum(&sym_scaled(&g, &ones), &class_columns(&pi, &sqrt_d));
        assert!(max_sorted_diff(&spec_m, &want) < 1e-8, "{name}");
        let explicit = trace_powers(&d.m_block.to_rows(), 4);
        for (a, b) in explicit.iter().zip(power_sums(&want, 4)) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{name}: M traces");
        }

        let z: Vec<f64> = (0..pi.r()).map(|j| 0.6 + 0.5 * j as f64).collect();
        let b = block_stability(&sa, &d, &m, &z).unwrap();
        let t = pi.lift(&z.iter().map(|&x| m.slope(x)).collect::<Vec<_>>());
        let td: Vec<f64> = d.non_representatives.iter().map(|&k| t[k]).collect();
        let abs_t: Vec<f64> = t.iter().map(|x| x.abs()).collect();
        let scale: Vec<f64> = sa.d.iter().zip(&abs_t).map(|(d, a)| (d / a).sqrt()).collect();
        let want: Vec<f64> = descending(
            restricted_sym_spectrum(&sym_scaled(&g, &abs_t), &class_columns(&pi, &scale))
                .iter()
                .map(|l| -1.0 - l)
                .collect(),
        );
        assert!(max_sorted_diff(&b.transverse, &want) < 1e-8, "{name}");
        let explicit = trace_powers(&jacobian(&d.m_block, &td, 1.0), 4);
        for (a, b) in explicit.iter().zip(power_sums(&want, 4)) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{name}: transverse traces");
        }
        let tbar: Vec<f64> = z.iter().map(|&x| m.slope(x)).collect();
        let rep = jacobian(&d.pbar_block, &tbar, 1.0);
        assert!(max_sorted_diff(&b.representative, &eig_2x2(&rep)) < 1e-10, "{name}");
        assert!(b.transverse_trace_defect < 1e-8, "{name}");
    }
}

#[test]
fn checkerboard_pattern_is_stable_and_small_gain_certified() {
    let (_, g, pi) = builtins().into_iter().find(|e| e.0 == "torus_checkerboard").unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let q = quotient(&sa, &pi).unwrap();
    let m = HillMap::symmetric(6.0);
    let cert = certify(&q, &m).unwrap();
    let red = solve_reduced(&q, &m, &cert, Strategy::Newton).unwrap();
    let rep = analyze(&sa, &q, None, &m, &red.z, Methods::ALL).unwrap();
    let full = rep.full.unwrap();
    assert_eq!(full.verdict, StabilityVerdict::Stable);
    let sg = rep.small_gain.unwrap();
    assert_eq!(sg.verdict, SmallGainVerdict::CertifiedStable);
    assert!(sg.m_matrix);
    assert!(rep.blocks.unwrap().consistency < 1e-8);
}

#[test]
fn homogeneous_state_unstable_above_threshold() {
    let (_, g, pi) = builtins().into_iter().find(|e| e.0 == "buckyball_faces").unwrap();
    let sa = g.scaled_adjacency().unwrap();
    let u = vec![1.0; g.n()];
    let s = full_jacobian_stability(&sa, &HillMap::symmetric(6.0), &u).unwrap();
    assert_eq!(s.verdict, StabilityVerdict::Unstable);
    // -1 + lambda T'(u*) is largest at lambda = -1/2 here: -1 + 1.5
    let q = quotient(&sa, &pi).unwrap();
    let sg = small_gain(&sa, &q, &HillMap::symmetric(6.0), &[1.0, 1.0]).unwrap();
    assert!((sg.rho_reduced - 3.0).abs() < 1e-10);
    assert!(!sg.m_matrix);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn small_gain_radius_matches_nalgebra(
        which in 0usize..9,
        g1 in 0.01f64..4.0,
        g2 in 0.01f64..4.0,
    ) {
        let (_, g, pi) = builtins().swap_remove(which);
        let sa = g.scaled_adjacency().unwrap();
        let q = quotient(&sa, &pi).unwrap();
        let s = small_gain_with(&sa, &q, &[g1, g2]).unwrap();
        // rho(P Γ) = rho(Γ P), the top eigenvalue of its symmetric form
        let want = sym_eigs(&sym_scaled(&g, &pi.lift(&[g1, g2])))[0];
        prop_assert!((s.rho_full - want).abs() < 1e-9 * want.max(1.0));
        prop_assert!((s.rho_reduced - want).abs() < 1e-9 * want.max(1.0));
        // M-matrix test agrees with the radius away from the boundary
        if (want - 1.0).abs() > 1e-6 {
            prop_assert_eq!(s.m_matrix, want < 1.0);
            prop_assert_eq!(is_nonsingular_m_matrix(&sa.p.scale_rows(&s.gamma)), want < 1.0);
        }
    }
}
