use num_complex::Complex64;
use proptest::prelude::*;

use taufay::cli_report::SuiteConfig;
use taufay::divisors::Divisor;
use taufay::formal_core::GradedSeries;
use taufay::riemann_geometry::{SurfaceContext, Theta};
use taufay::spectral_curve::{convergence_radius, solve_shift};
use taufay::theta_tau::fay_surface_residual_zero_form;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(a, b)| c(a, b))
}

fn tau() -> impl Strategy<Value = Complex64> {
    (-0.5f64..0.5, 0.6f64..1.5).prop_map(|(a, b)| c(a, b))
}

fn min_gap(pts: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            g = g.min((pts[i] - pts[j]).norm());
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_quasi_periodicity(t in tau(), u in complex(0.8), n in -2i64..=2, m in -2i64..=2) {
        let th = Theta::new(t, 1e-15).unwrap();
        let i = c(0.0, 1.0);
        let mf = m as f64;
        let lhs = th.eval(u + n as f64 + t * mf);
        let rhs = th.eval(u) * (-2.0 * std::f64::consts::PI * i * u * mf - std::f64::consts::PI * i * t * mf * mf).exp();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(rhs.norm()));
    }

    #[test]
    fn theta_is_even(t in tau(), u in complex(1.0)) {
        let th = Theta::new(t, 1e-15).unwrap();
        prop_assert!((th.eval(u) - th.eval(-u)).norm() <= 1e-12 * th.eval(u).norm());
    }

    #[test]
    fn prime_weight_picks_up_the_permutation_sign(
        zs in prop::collection::vec(complex(2.0), 2..6),
        alphas in prop::collection::vec(prop_oneof![Just(-2.0), Just(-1.0), Just(1.0), Just(2.0)], 6),
        sigma in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        prop_assume!(min_gap(&zs) > 0.1);
        let n = zs.len();
        let sigma: Vec<usize> = sigma.into_iter().filter(|&s| s < n).collect();
        let pairs: Vec<(Complex64, f64)> = zs.iter().copied().zip(alphas.iter().copied()).collect();
        let d = Divisor::from_real(&pairs).unwrap();
        let w = d.prime_weight().unwrap();
        let wp = d.permuted(&sigma).unwrap().prime_weight().unwrap();
        let s = d.permutation_sign(&sigma).unwrap();
        prop_assert!((wp - s * w).norm() <= 1e-10 * w.norm());
    }

    #[test]
    fn genus_zero_fay(pts in prop::collection::vec(complex(2.0), 4..=8)) {
        prop_assume!(pts.len() % 2 == 0 && min_gap(&pts) > 0.2);
        let (zs, zts) = pts.split_at(pts.len() / 2);
        let s = SurfaceContext::sphere(c(0.0, 0.0));
        let r = fay_surface_residual_zero_form(&s, zs, zts).unwrap();
        prop_assert!(r.relative() < 1e-11, "{:?}", r);
    }

    #[test]
    fn log_inverts_exp(a in complex(0.5), b in complex(0.5), d in complex(0.5)) {
        let n = 6;
        let f = GradedSeries::constant(a, n)
            .add(&GradedSeries::time(1, n).scale(&b))
            .add(&GradedSeries::time(2, n).mul(&GradedSeries::time(1, n)).scale(&d));
        let back = f.exp().unwrap().log().unwrap();
        prop_assert!(back.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn divisor_json_round_trip(zs in prop::collection::vec(complex(3.0), 1..5), a in complex(2.0)) {
        let pairs: Vec<(Complex64, Complex64)> = zs.iter().map(|&z| (z, a)).collect();
        let d = Divisor::from_pairs(&pairs).unwrap();
        prop_assert_eq!(Divisor::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn shift_solver_converges_inside_the_radius(z1 in complex(1.5), frac in 0.0f64..0.4, arg in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(z1.norm() > 0.3);
        let u = Complex64::from_polar(frac * convergence_radius(z1), arg);
        let d = Divisor::from_real(&[(z1, 1.0)]).unwrap();
        let s = solve_shift(&d, u, 8).unwrap();
        prop_assert!(s.residual() < 1e-11);
    }

    #[test]
    fn config_echo_round_trips(seed in any::<u64>(), tol in 1e-14f64..1e-6, n in 1usize..30) {
        let mut cfg = SuiteConfig::default();
        cfg.seed = seed;
        cfg.fay_genus0.tolerance = tol;
        cfg.fay_genus0.configs_per_n = n;
        prop_assert_eq!(SuiteConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
