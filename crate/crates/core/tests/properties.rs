use gkp_magic::gaussian::{damped_occupation, hex_to_square_covariance, square_to_hex_covariance, GaussianState};
use gkp_magic::gkp::{BlochEngine, Outcome, CELL_SIDE};
use gkp_magic::magic::{fidelity_to_nearest, MagicFamily};
use gkp_magic::theta::{riemann_theta, SiegelMatrix, ThetaArgument};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

prop_compose! {
    fn siegel()(x in prop::array::uniform3(-1.0f64..1.0), y1 in 0.5f64..2.0, y2 in 0.5f64..2.0, y12 in -0.4f64..0.4)
        -> SiegelMatrix {
        SiegelMatrix::new(c(x[0], y1), c(x[1], y12), c(x[2], y2)).unwrap()
    }
}

prop_compose! {
    fn theta_arg()(v in prop::array::uniform4(-1.0f64..1.0)) -> ThetaArgument {
        ThetaArgument::new(c(v[0], v[1]), c(v[2], v[3])).unwrap()
    }
}

prop_compose! {
    /// Rotated squeezed thermal state with a bounded mean.
    fn gaussian_state(nbar_max: f64)(
        nbar in 0.0..=nbar_max,
        r in -0.6f64..0.6,
        phi in 0.0f64..std::f64::consts::PI,
        mean in prop::array::uniform2(-1.5f64..1.5),
    ) -> GaussianState {
        let (s, co) = phi.sin_cos();
        let (u, v) = ((2.0 * r).exp(), (-2.0 * r).exp());
        let k = nbar + 0.5;
        let (a, b, d) = (k * (co * co * u + s * s * v), k * co * s * (u - v), k * (s * s * u + co * co * v));
        GaussianState::new(mean, [[a, b], [b, d]]).unwrap()
    }
}

fn outcome() -> impl Strategy<Value = Outcome> {
    (0.0..CELL_SIDE, 0.0..CELL_SIDE).prop_map(|(q, p)| Outcome::new(q, p))
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_periodic_in_integer_shifts(z in theta_arg(), tau in siegel(), n in prop::array::uniform2(-2i64..=2)) {
        let base = riemann_theta(&z, &tau, 1e-14).unwrap();
        let shifted = ThetaArgument::new(z.0[0] + n[0] as f64, z.0[1] + n[1] as f64).unwrap();
        let moved = riemann_theta(&shifted, &tau, 1e-14).unwrap();
        prop_assert!(close(base, moved, 1e-10), "{base} vs {moved}");
    }

    #[test]
    fn theta_is_even(z in theta_arg(), tau in siegel()) {
        let neg = ThetaArgument::new(-z.0[0], -z.0[1]).unwrap();
        let a = riemann_theta(&z, &tau, 1e-14).unwrap();
        let b = riemann_theta(&neg, &tau, 1e-14).unwrap();
        prop_assert!(close(a, b, 1e-10), "{a} vs {b}");
    }

    #[test]
    fn theta_quasi_periodic_in_tau_shifts(z in theta_arg(), tau in siegel(), m in prop::array::uniform2(-1i64..=1)) {
        let t = tau.matrix();
        let (m0, m1) = (m[0] as f64, m[1] as f64);
        let tm = [t[(0, 0)] * m0 + t[(0, 1)] * m1, t[(1, 0)] * m0 + t[(1, 1)] * m1];
        let shifted = ThetaArgument::new(z.0[0] + tm[0], z.0[1] + tm[1]).unwrap();
        let mtm = tm[0] * m0 + tm[1] * m1;
        let mz = z.0[0] * m0 + z.0[1] * m1;
        let factor = (-Complex64::i() * std::f64::consts::PI * (mtm + 2.0 * mz)).exp();
        let lhs = riemann_theta(&shifted, &tau, 1e-14).unwrap();
        let rhs = factor * riemann_theta(&z, &tau, 1e-14).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn theta_route_matches_lattice_route(state in gaussian_state(2.0), t in outcome(), mu in 0usize..4) {
        let engine = BlochEngine::new(&state).unwrap();
        let a = engine.theta_component(t, mu, 1e-12).unwrap();
        let b = engine.lattice_sum(t, mu, 1e-12).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn components_are_cell_periodic(state in gaussian_state(1.0), t in outcome(), n in prop::array::uniform2(-2i32..=2)) {
        let engine = BlochEngine::new(&state).unwrap();
        let a = engine.unnormalized(t, 1e-13).unwrap().components();
        let shifted = Outcome::new(t.tq + n[0] as f64 * CELL_SIDE, t.tp + n[1] as f64 * CELL_SIDE);
        let b = engine.unnormalized(shifted, 1e-13).unwrap().components();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-11, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn bloch_vectors_lie_in_the_ball(state in gaussian_state(2.0), t in outcome()) {
        let engine = BlochEngine::new(&state).unwrap();
        prop_assert!(engine.pdf(t).unwrap() > 0.0);
        let b = engine.normalized(t).unwrap();
        prop_assert!(b.norm3() <= 1.0 + 1e-9, "{}", b.norm3());
    }

    #[test]
    fn pure_inputs_give_pure_logical_states(state in gaussian_state(0.0), t in outcome()) {
        let engine = BlochEngine::new(&state).unwrap();
        prop_assume!(engine.pdf(t).unwrap() > 1e-6);
        let b = engine.normalized(t).unwrap();
        prop_assert!((b.norm3() - 1.0).abs() < 1e-9, "{}", b.norm3());
    }

    #[test]
    fn hex_map_preserves_determinant(state in gaussian_state(2.0)) {
        let state = state.with_mean([0.0, 0.0]).unwrap();
        let sq = hex_to_square_covariance(&state).unwrap();
        prop_assert!((sq.det() - state.det()).abs() < 1e-12 * state.det().max(1.0));
        let back = square_to_hex_covariance(&sq).unwrap();
        prop_assert!((back.cov() - state.cov()).abs().max() < 1e-12);
    }

    #[test]
    fn damping_reduces_occupation(nbar in 0.0f64..5.0, b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let a = damped_occupation(nbar, lo).unwrap();
        let b = damped_occupation(nbar, hi).unwrap();
        prop_assert!(b <= a + 1e-15 && a <= nbar + 1e-15 && b >= 0.0, "{nbar} {a} {b}");
    }

    #[test]
    fn nearest_fidelity_is_bounded(v in prop::array::uniform3(-1.0f64..1.0), len in 0.0f64..=1.0, h in any::<bool>()) {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assume!(norm > 1e-9);
        let r = v.map(|x| len * x / norm);
        let family = if h { MagicFamily::H } else { MagicFamily::T };
        let nearest = fidelity_to_nearest(r, family).unwrap();
        prop_assert!(nearest.fidelity >= 0.5 - 1e-15 && nearest.fidelity <= 1.0 + 1e-15, "{}", nearest.fidelity);
        prop_assert!(nearest.index < family.vectors().len());
    }
}
