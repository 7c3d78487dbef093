use scb_core::processes::{
    dependence_diagnostics, lrd_coefficients, FunctionSpec, Innovation, Marginal, ProcessModel,
};

fn poly(coeffs: &[f64]) -> FunctionSpec {
    FunctionSpec::Polynomial { coeffs: coeffs.to_vec() }
}

/// Short-memory models.
fn short_memory_models() -> Vec<(&'static str, ProcessModel)> {
    vec![
        (
            "iid",
            ProcessModel::Iid {
                law: Marginal::Normal { mean: 0.0, sd: 1.0 },
            },
        ),
        (
            "linear",
            ProcessModel::Linear {
                coeffs: (0..30).map(|j| 0.5f64.powi(j)).collect(),
                innovation: Innovation::UniformCentered,
            },
        ),
        (
            "arch",
            ProcessModel::Arch {
                a: 0.5,
                b: 0.4,
                innovation: Innovation::Normal,
                burn_in: 1000,
            },
        ),
        (
            "nonlinear_ar",
            ProcessModel::NonlinearAr {
                mu: poly(&[0.0, 0.5]),
                sigma: FunctionSpec::constant(1.0),
                innovation: Innovation::Normal,
                y0: 0.0,
                burn_in: 1000,
            },
        ),
        (
            "regression",
            ProcessModel::Regression {
                phi: 0.5,
                mu: poly(&[0.0, 0.0, 1.0]),
                sigma: FunctionSpec::constant(0.5),
                innovation: Innovation::Normal,
                burn_in: 1000,
            },
        ),
    ]
}

fn lrd_model() -> ProcessModel {
    ProcessModel::LrdLinear {
        beta: 0.9,
        ell: 1.0,
        truncation: Some(20_000),
        innovation: Innovation::Normal,
    }
}

fn diffusion_model() -> ProcessModel {
    ProcessModel::DiffusionDiscrete {
        mu: poly(&[2.0, -2.0]),
        sigma: FunctionSpec::constant(0.3),
        delta: 1.0 / 250.0,
        x0: 1.0,
        innovation: Innovation::Normal,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn half_means(v: &[f64]) -> (f64, f64) {
    let h = v.len() / 2;
    (mean(&v[..h]), mean(&v[h..2 * h]))
}

#[test]
fn generators_are_deterministic_with_declared_lengths() {
    let mut models = short_memory_models();
    models.push(("lrd", lrd_model()));
    models.push(("diffusion", diffusion_model()));
    for (name, m) in models {
        m.validate().unwrap();
        let a = m.generate_seeded(500, 42).unwrap();
        let b = m.generate_seeded(500, 42).unwrap();
        let c = m.generate_seeded(500, 43).unwrap();
        assert_eq!(a, b, "{name}");
        assert_ne!(a.series, c.series, "{name}");
        let expected = if name == "diffusion" { 501 } else { 500 };
        assert_eq!(a.series.len(), expected, "{name}");
        assert_eq!(a.x.len(), a.y.len(), "{name}");
        if !a.x.is_empty() {
            assert_eq!(a.x.len(), 500, "{name}");
        }
        assert!(a.series.iter().all(|v| v.is_finite()), "{name}");
    }
}

/// Long-run variance of the series mean relative to the iid value:
/// `(Σa)²/Σa²` for linear filters, `(1 + ρ)/(1 − ρ)` for AR(1) with
/// coefficient ρ, 1 for martingale differences.
fn long_run_factor(name: &str) -> f64 {
    match name {
        "linear" => {
            let a: Vec<f64> = (0..30).map(|j| 0.5f64.powi(j)).collect();
            a.iter().sum::<f64>().powi(2) / a.iter().map(|v| v * v).sum::<f64>()
        }
        "nonlinear_ar" | "regression" => 3.0,
        _ => 1.0,
    }
}

#[test]
fn short_memory_half_means_agree() {
    let n = 50_000;
    for (name, m) in short_memory_models() {
        let s = m.generate_seeded(n, 1).unwrap().series;
        let (a, b) = half_means(&s);
        let bound = 4.0 * sd(&s) * long_run_factor(name).sqrt() / ((n / 2) as f64).sqrt();
        assert!((a - b).abs() < bound, "{name}: |{a} - {b}| >= {bound}");
    }
}

#[test]
fn diffusion_half_means_agree_after_autocorrelation_adjustment() {
    // Euler steps of a mean-reverting diffusion form an AR(1) with ρ = 1 − κΔ;
    // the long-run variance of a mean is (1 + ρ)/(1 − ρ) times the iid value.
    let n = 50_000;
    let s = diffusion_model().generate_seeded(n, 1).unwrap().series;
    let rho: f64 = 1.0 - 2.0 / 250.0;
    let (a, b) = half_means(&s);
    let bound = 4.0 * sd(&s) * ((1.0 + rho) / (1.0 - rho)).sqrt() / ((n / 2) as f64).sqrt();
    assert!((a - b).abs() < bound, "|{a} - {b}| >= {bound}");
}

#[test]
fn lrd_half_means_agree_under_exact_variance() {
    // The difference of half means is Σ_k w_k ε_k; its variance follows from
    // prefix sums of the coefficients.
    let n = 50_000;
    let m = 20_000;
    let s = lrd_model().generate_seeded(n, 1).unwrap().series;
    let a = lrd_coefficients(0.9, 1.0, m);
    let mut prefix = vec![0.0; a.len() + 1];
    for (j, v) in a.iter().enumerate() {
        prefix[j + 1] = prefix[j] + v;
    }
    let window = |lo: i64, hi: i64| -> f64 {
        // Σ_{j=lo}^{hi} a_j over valid lags.
        let lo = lo.max(0) as usize;
        let hi = hi.min(a.len() as i64 - 1);
        if hi < lo as i64 {
            0.0
        } else {
            prefix[hi as usize + 1] - prefix[lo]
        }
    };
    let h = (n / 2) as i64;
    let mut var = 0.0;
    for k in -(m as i64)..n as i64 {
        let w = (window(-k, h - 1 - k) - window(h - k, 2 * h - 1 - k)) / h as f64;
        var += w * w;
    }
    let (x, y) = half_means(&s);
    assert!((x - y).abs() < 4.0 * var.sqrt(), "|{x} - {y}| >= {}", 4.0 * var.sqrt());
}

#[test]
fn dependence_aggregates_are_monotone() {
    let sets: Vec<Vec<f64>> = vec![
        (0..200).map(|j| 0.8f64.powi(j)).collect(),
        lrd_coefficients(0.75, 1.0, 500),
        vec![1.0, -0.5, 0.25, 0.0, 0.1],
    ];
    for coeffs in sets {
        for innov in [Innovation::Normal, Innovation::Rademacher] {
            let d = dependence_diagnostics(&coeffs, 4.0, innov).unwrap();
            assert!(d.theta_cumulative.windows(2).all(|w| w[1] >= w[0]));
            let zs: Vec<f64> = (1..300).map(|n| d.z_n(n)).collect();
            assert!(zs.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
            assert!(d.psi_tail.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn unstable_parameters_are_rejected() {
    let arch = ProcessModel::Arch {
        a: 1.0,
        b: 1.2,
        innovation: Innovation::Normal,
        burn_in: 10,
    };
    assert!(arch.validate().is_err());
    let reg = ProcessModel::Regression {
        phi: 1.0,
        mu: poly(&[0.0]),
        sigma: FunctionSpec::constant(1.0),
        innovation: Innovation::Normal,
        burn_in: 10,
    };
    assert!(reg.validate().is_err());
    let lrd = ProcessModel::LrdLinear {
        beta: 1.2,
        ell: 1.0,
        truncation: None,
        innovation: Innovation::Normal,
    };
    assert!(lrd.validate().is_err());
}
