use std::f64::consts::PI;

use pelab_core::catalog::{make_driftless, make_gradient_adaptive, monotone_envelope, InputMap};
use pelab_core::linalg::{min_eigenvalue, norm2};
use pelab_core::ode::{self, reference};
use pelab_core::pe::{
    classical_pe_certificate, pointwise_pe_scan, power_certificate, udpe_certificate, window_starts, AnnulusGrid,
    AnnulusSampling, CertificateKind, Evidence, MapOptions, PeCertificate, ScanOptions,
};
use pelab_core::probe::{
    lego_check_auto, settling_time, ules_fit, uniformity_probe, FitOptions, LegoOptions, LegoOutcome, UniformityOptions,
};
use pelab_core::signal::{builtin, window_gram, window_integral_norm};
use pelab_core::{Interval, Matrix, Partition, QuadratureSpec, StateFunction, TimeSignal};
use proptest::prelude::*;

fn sin_sig() -> TimeSignal {
    TimeSignal::scalar(Interval::from(0.0), "sin", f64::sin)
}

fn inv_sig() -> TimeSignal {
    TimeSignal::scalar(Interval::from(0.0), "inverse_time", |t| 1.0 / (1.0 + t))
}

#[test]
fn trapezoid_error_shrinks_quadratically() {
    let psi = builtin::rotating_projection();
    // Window starts off the kinks of |sin| so the integrand is smooth.
    let (t, w) = (0.3, 2.5);
    let exact = (0.3f64).cos() - (2.8f64).cos();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let q = QuadratureSpec::trapezoid(h).unwrap();
            (window_integral_norm(&psi, &[1.0, 0.0], t, w, &q).unwrap() - exact).abs()
        })
        .collect();
    for p in errs.windows(2) {
        assert!((p[0] / p[1] - 4.0).abs() < 0.2, "{errs:?}");
    }
    assert!(errs[0] < 0.1 * 0.1);
}

#[test]
fn gram_is_start_invariant_for_periodic_signals() {
    let s = builtin::sin_cos(2.0);
    let q = QuadratureSpec::default_for(PI);
    let mins: Vec<f64> = window_starts(0.0, 3.0, 13)
        .iter()
        .map(|&t| min_eigenvalue(&window_gram(&s, t, PI, &q).unwrap()).unwrap())
        .collect();
    let spread = mins.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - mins.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-9, "{mins:?}");
    assert!((mins[0] - PI / 2.0).abs() < 1e-6);
}

#[test]
fn annulus_certificate_implies_pointwise_certificates() {
    let psi = builtin::rotating_projection();
    let q = QuadratureSpec::default_for(2.0 * PI);
    let sampling = AnnulusSampling {
        x1_directions: 6,
        x1_radii: 2,
        ..AnnulusSampling::default()
    };
    let grid = AnnulusGrid::sampled(Partition::full(2), 0.5, 1.0, sampling, window_starts(0.0, 2.0 * PI, 5)).unwrap();
    let c = udpe_certificate(&psi, &grid, 2.0 * PI, &q).unwrap();
    let c = c.certificate().unwrap();
    let starts = Interval::new(0.0, 2.0 * PI).unwrap();
    for x in grid.states() {
        let opts = ScanOptions::new(c.window, starts).with_first_window(c.window);
        let p = pointwise_pe_scan(&psi, &x, &opts, &q).unwrap();
        let p = p.certificate().expect("pointwise certificate");
        assert!(p.window <= c.window && p.mu >= c.mu - 1e-9);
    }
}

#[test]
fn rotation_conserves_norm() {
    let tr = ode::integrate(&reference::rotation(), 0.0, &[0.6, 0.8], 2.0 * PI, 1e-3).unwrap();
    assert!((norm2(tr.final_state()) - 1.0).abs() < 1e-8);
}

#[test]
fn exponential_fit_envelope_holds() {
    let sys = reference::linear_decay(2, 0.7);
    let dirs = vec![vec![1.0, 0.0], vec![0.6, -0.8]];
    let fit = ules_fit(&sys, 2.0, &[0.0, 3.0], &dirs, 20.0, 1e-3, &FitOptions::default()).unwrap().unwrap();
    for d in &dirs {
        let x0: Vec<f64> = d.iter().map(|v| 2.0 * v).collect();
        let tr = ode::integrate(&sys, 3.0, &x0, 23.0, 1e-3).unwrap();
        for (t, n) in tr.norms() {
            assert!(n <= fit.gamma1 * 2.0 * (-fit.gamma2 * (t - 3.0)).exp() * (1.0 + 1e-9));
        }
    }
}

#[test]
fn uniformity_verdict_survives_reordering() {
    for sys in [reference::linear_decay(1, 1.0), reference::inverse_time_decay(1)] {
        let base = UniformityOptions::new(1.0, 0.1, vec![0.0, 10.0, 50.0], vec![vec![1.0]], 500.0, 1e-2);
        let v = uniformity_probe(&sys, &base).unwrap().verdict;
        let permuted = UniformityOptions {
            t0_grid: vec![50.0, 0.0, 10.0],
            ..base.clone()
        };
        let doubled = UniformityOptions {
            directions: vec![vec![1.0], vec![-1.0]],
            ..base.clone()
        };
        assert_eq!(uniformity_probe(&sys, &permuted).unwrap().verdict, v);
        assert_eq!(uniformity_probe(&sys, &doubled).unwrap().verdict, v);
    }
}

#[test]
fn matching_residual_bound_vanishes_at_zero() {
    let ms = make_gradient_adaptive(&sin_sig(), &Matrix::scalar(-1.0), &Matrix::scalar(1.0)).unwrap();
    let states: Vec<Vec<f64>> = (0..40).map(|i| vec![0.1 * i as f64 - 2.0, 1.0 - 0.05 * i as f64]).collect();
    let samples = ms.b_residual_samples(&[0.0, 1.0, 4.0, 9.5], &states).unwrap();
    let rho2 = monotone_envelope(&samples, &[0.0, 0.5, 1.0, 2.0]);
    assert_eq!(rho2[0], 0.0);
    assert!(rho2.windows(2).all(|w| w[0] <= w[1]));
    for (s, r) in &samples {
        let bound = rho2[rho2.len() - 1];
        assert!(*s <= 2.0 && *r <= bound + 1e-15);
    }
}

#[test]
fn auxiliary_inequality_on_gradient_adaptive_loop() {
    let ms = make_gradient_adaptive(&sin_sig(), &Matrix::scalar(-1.0), &Matrix::scalar(1.0)).unwrap();
    let tr = ode::integrate(ms.ode(), 0.0, &[1.0, 0.5], 50.0, 1e-2).unwrap();
    // φ₁ = B₀(t, x₂) with the parameter error as designated part.
    let phi1 = StateFunction::scalar(2, Partition::indices(2, vec![1]).unwrap(), Interval::unbounded(), "B0", |t, x| {
        t.sin() * x[1]
    });
    let map_opts = MapOptions {
        sampling: AnnulusSampling::default(),
        t_samples: window_starts(0.0, 2.0 * PI, 4),
        first_window: 2.0 * PI,
        max_window: 8.0 * PI,
    };
    let opts = LegoOptions {
        fd_step: 5e-3,
        sample_times: window_starts(0.5, 49.5, 50),
        horizon: 20.0,
        bound: 2.0,
        tol: 1e-9,
        k_delta: 1.0,
    };
    let q = QuadratureSpec::simpson(1e-3).unwrap();
    let deltas = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0];
    let out = lego_check_auto(&phi1, &tr, 2.0, &deltas, &map_opts, |rest, _| norm2(rest), &opts, &q).unwrap();
    let LegoOutcome::Checked(rep) = out else { panic!("{out:?}") };
    assert!(rep.max_violation <= 1e-2, "{} at {}", rep.max_violation, rep.at_t);
}

#[test]
fn driftless_examples() {
    let sin = make_driftless(&InputMap::from_signal(&sin_sig()), None).unwrap();
    let tr = ode::integrate(&sin.system, 0.0, &[1.0, 0.0], 200.0, 1e-2).unwrap();
    assert!(norm2(tr.final_state()) < 1e-2, "{:?}", tr.final_state());

    let zero = TimeSignal::scalar(Interval::from(0.0), "zero", |_| 0.0);
    let frozen = make_driftless(&InputMap::from_signal(&zero), None).unwrap();
    let tr = ode::integrate(&frozen.system, 0.0, &[0.7, 0.3], 50.0, 1e-2).unwrap();
    assert_eq!(tr.final_state()[0], 0.7);

    let inv = make_driftless(&InputMap::from_signal(&inv_sig()), None).unwrap();
    let settle = |t0: f64| {
        let tr = ode::integrate(&inv.system, t0, &[0.5, 0.0], t0 + 400.0, 1e-2).unwrap();
        settling_time(&tr, 0.45).unwrap()
    };
    let (early, late) = (settle(0.0), settle(50.0));
    assert!(late > 2.0 * early, "{early} vs {late}");
}

fn cert(window: f64, mu: f64) -> PeCertificate {
    PeCertificate {
        kind: CertificateKind::UdpeAnnulus,
        window,
        mu,
        valid_t_range: Interval::new(0.0, window).unwrap(),
        evidence: vec![Evidence { t: 0.0, x: None, value: mu }],
        params: Default::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_is_monotone_when_mu_below_window(t in 0.5f64..10.0, frac in 0.01f64..1.0, p in 1.1f64..4.0, dp in 0.1f64..2.0) {
        let c = cert(t, frac * t);
        let a = power_certificate(&c, p).unwrap().mu;
        let b = power_certificate(&c, p + dp).unwrap().mu;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn gram_certificate_is_psd_and_bounded(a in 0.1f64..2.0, w in 0.3f64..3.0, ph in 0.0f64..6.3, win in 0.5f64..8.0) {
        let s = TimeSignal::column(2, Interval::unbounded(), "trig", move |t| vec![a * (w * t + ph).sin(), (w * t).cos()]);
        let q = QuadratureSpec::default_for(win);
        let out = classical_pe_certificate(&s, win, &q, &window_starts(0.0, 5.0, 6)).unwrap();
        prop_assert!(out.value() >= -1e-9);
        if let Some(c) = out.certificate() {
            prop_assert!(c.evidence.iter().all(|e| e.value >= c.mu));
            prop_assert!(c.window <= c.valid_t_range.len());
        }
    }

    #[test]
    fn settling_is_monotone_in_sigma(a in 0.2f64..3.0, s1 in 0.01f64..0.5, ds in 0.01f64..0.4) {
        let tr = ode::integrate(&reference::linear_decay(1, a), 0.0, &[1.0], 30.0, 1e-2).unwrap();
        prop_assert!(settling_time(&tr, s1).unwrap() >= settling_time(&tr, s1 + ds).unwrap());
    }

    #[test]
    fn matching_system_never_increases_v(t in 0.0f64..100.0, x1 in -10.0f64..10.0, x2 in -10.0f64..10.0) {
        let ms = make_gradient_adaptive(&inv_sig(), &Matrix::scalar(-0.5), &Matrix::scalar(2.0)).unwrap();
        prop_assert!(ms.lyapunov.rate(ms.ode(), t, &[x1, x2]) <= 1e-10);
    }

    #[test]
    fn integration_is_deterministic(x0 in -2.0f64..2.0, t0 in 0.0f64..10.0) {
        let ms = make_gradient_adaptive(&sin_sig(), &Matrix::scalar(-1.0), &Matrix::scalar(1.0)).unwrap();
        let a = ode::integrate(ms.ode(), t0, &[x0, 1.0], t0 + 5.0, 1e-2).unwrap();
        let b = ode::integrate(ms.ode(), t0, &[x0, 1.0], t0 + 5.0, 1e-2).unwrap();
        prop_assert_eq!(a.final_state(), b.final_state());
        prop_assert_eq!(a.times(), b.times());
    }
}
