//! Deterministic invariants and oracle comparisons.

use ovl_core::dist::{Density, InverseLomax};
use ovl_core::estimators::{ratio_variance_factor, Design, FormulaSource, Method};
use ovl_core::overlap::{kl_symmetrized, ovl_by_quadrature, Measure};
use ovl_core::stats::rss_harmonic;
use ovl_core::std_normal_quantile;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

const GRID: [f64; 10] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 5.0, 10.0];

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn closed_forms_match_quadrature() {
    for &r in &GRID {
        let f1 = InverseLomax::standard(r).unwrap();
        let f2 = InverseLomax::standard(1.0).unwrap();
        for m in Measure::ALL {
            let closed = m.value(r);
            let numeric = ovl_by_quadrature(&f1, &f2, m).unwrap();
            assert!((closed - numeric).abs() <= 1e-6, "{m} R={r}: {closed} vs {numeric}");
        }
    }
}

#[test]
fn measures_depend_only_on_ratio() {
    for (a1, a2) in [(0.2, 0.4), (3.0, 6.0), (1.5, 0.5), (4.5, 1.5)] {
        let f1 = InverseLomax::standard(a1).unwrap();
        let f2 = InverseLomax::standard(a2).unwrap();
        for m in Measure::ALL {
            let numeric = ovl_by_quadrature(&f1, &f2, m).unwrap();
            assert!((numeric - m.value(a1 / a2)).abs() <= 1e-6, "{m} {a1}/{a2}");
        }
    }
}

#[test]
fn symmetrized_kl_matches_closed_form() {
    for &r in &GRID {
        let f1 = InverseLomax::standard(r).unwrap();
        let f2 = InverseLomax::standard(1.0).unwrap();
        let j = kl_symmetrized(&f1, &f2).unwrap();
        let expected = (r - 1.0).powi(2) / r;
        assert!((j - expected).abs() <= 1e-7 * (1.0 + expected), "R={r}");
    }
}

#[test]
fn piecewise_monotone_on_log_grid() {
    let grid = log_grid(1e-3, 1e3, 200);
    for m in Measure::ALL {
        for w in grid.windows(2) {
            let (a, b) = (m.value(w[0]), m.value(w[1]));
            if w[1] <= 1.0 {
                assert!(b >= a, "{m} not increasing at {}", w[0]);
            } else if w[0] >= 1.0 {
                assert!(b <= a, "{m} not decreasing at {}", w[0]);
            }
        }
    }
}

#[test]
fn delta_is_continuous_across_one() {
    for eps in [1e-3, 1e-5, 1e-6, 1e-7, 1e-9, 1e-12] {
        for r in [1.0 - eps, 1.0 + eps] {
            let v = Measure::Delta.value(r);
            // one-sided slopes are -+1/e, so 1 - Delta ~ |R - 1| / e
            let approx = 1.0 - eps / std::f64::consts::E;
            assert!((v - approx).abs() <= 2.0 * eps * eps + 1e-15, "R={r}: {v}");
        }
    }
}

/// Central difference with one Richardson step.
fn richardson<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-3 * x.max(1e-3);
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[test]
fn derivatives_match_finite_differences() {
    let points = [0.05, 0.1, 0.3, 0.5, 0.8, 0.95, 1.2, 1.5, 2.0, 5.0, 12.0];
    for m in Measure::ALL {
        for &r in &points {
            let d1 = m.derivative(r);
            let fd1 = richardson(|x| m.value(x), r);
            assert!((d1 - fd1).abs() <= 1e-8 * d1.abs().max(1e-3), "{m} g' at {r}: {d1} vs {fd1}");
            let d2 = m.second_derivative(r);
            let fd2 = richardson(|x| m.derivative(x), r);
            assert!((d2 - fd2).abs() <= 1e-8 * d2.abs().max(1e-3), "{m} g'' at {r}: {d2} vs {fd2}");
        }
    }
    // smooth measures at the symmetry point
    for m in [Measure::Rho, Measure::Lambda] {
        assert_eq!(m.derivative(1.0), 0.0);
        let fd2 = richardson(|x| m.derivative(x), 1.0);
        assert!((m.second_derivative(1.0) - fd2).abs() <= 1e-8);
    }
}

#[test]
fn delta_second_derivative_is_smooth_near_one() {
    // the series branch must join the direct formula without a jump
    for m in [Measure::Delta] {
        for side in [-1.0, 1.0] {
            let inside = m.second_derivative(1.0 + side * 0.99e-4);
            let outside = m.second_derivative(1.0 + side * 1.01e-4);
            assert!((inside - outside).abs() < 1e-5, "{inside} vs {outside}");
        }
    }
}

#[test]
fn pdf_integrates_to_one() {
    for alpha in [0.1, 0.5, 1.0, 3.0] {
        let d = InverseLomax::standard(alpha).unwrap();
        // x = e^s
        let total = simpson(|s: f64| d.density(s.exp()) * s.exp(), -60.0, 60.0, 200_000);
        assert!((total - 1.0).abs() < 1e-8, "alpha={alpha}: {total}");
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let d = InverseLomax::new(0.7, 2.0).unwrap();
    for x in [0.01, 0.5, 2.0, 30.0] {
        let integral = simpson(|s: f64| d.density(s.exp()) * s.exp(), -80.0, f64::ln(x), 100_000);
        assert!((integral - d.cdf(x).unwrap()).abs() < 1e-9, "x={x}");
        let h = 1e-5 * x;
        let fd = (d.cdf(x + h).unwrap() - d.cdf(x - h).unwrap()) / (2.0 * h);
        let pdf = d.pdf(x).unwrap();
        assert!((fd - pdf).abs() <= 1e-6 * pdf, "x={x}");
    }
}

#[test]
fn density_is_reciprocal_of_lomax() {
    // Y ~ Lomax with survival (1 + y)^(-1/alpha); X = 1/Y
    for alpha in [0.3, 1.0, 2.5] {
        let lomax = |y: f64| (1.0 / alpha) * (1.0 + y).powf(-1.0 / alpha - 1.0);
        let d = InverseLomax::standard(alpha).unwrap();
        for z in [0.01, 0.2, 1.0, 7.0, 300.0] {
            let expected = lomax(1.0 / z) / (z * z);
            let got = d.pdf(z).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected, "alpha={alpha} z={z}");
        }
    }
}

#[test]
fn normal_quantile_matches_statrs() {
    // statrs' erf is only good to ~1e-10 relative in the tails
    let n = Normal::new(0.0, 1.0).unwrap();
    for k in 1..200 {
        let p = k as f64 / 200.0;
        let z = std_normal_quantile(p).unwrap();
        assert!((n.cdf(z) - p).abs() <= 1e-9 * p.min(1.0 - p), "p={p}");
    }
    for p in [1e-300, 1e-20, 1e-8, 0.975, 1.0 - 1e-10] {
        let z = std_normal_quantile(p).unwrap();
        assert!((n.inverse_cdf(p) - z).abs() <= 1e-8 * z.abs(), "p={p}");
    }
    // reference values to 16 digits
    for (p, z) in [(0.975, 1.959_963_984_540_054), (0.005, -2.575_829_303_548_901)] {
        assert!((std_normal_quantile(p).unwrap() - z).abs() < 2e-15);
    }
}

#[test]
fn srs_ratio_variance_is_exact_f_moment() {
    for n1 in 1..30usize {
        for n2 in 3..30usize {
            let (d1, d2) = (2.0 * n1 as f64, 2.0 * n2 as f64);
            let corr = (n2 as f64 - 1.0) / n2 as f64;
            let var_f = 2.0 * d2 * d2 * (d1 + d2 - 2.0)
                / (d1 * (d2 - 2.0).powi(2) * (d2 - 4.0));
            let mean_f = d2 / (d2 - 2.0);
            assert!((corr * mean_f - 1.0).abs() < 1e-14);
            let designs = [Design::srs(n1).unwrap(), Design::srs(n2).unwrap()];
            let v = ratio_variance_factor(Method::Srs, &designs, FormulaSource::Derived).unwrap();
            if n2 > 2 {
                assert!((v - corr * corr * var_f).abs() <= 1e-13 * v, "{n1} {n2}");
            }
        }
    }
}

#[test]
fn rss_factor_is_order_statistic_variance() {
    // Var(T_(i:r)) = alpha^2 sum_{j <= i} 1/(r - j + 1)^2 for exponential T
    for r in 1..=8usize {
        let direct: f64 = (1..=r)
            .map(|i| (1..=i).map(|j| 1.0 / ((r - j + 1) as f64).powi(2)).sum::<f64>())
            .sum();
        assert!((direct - rss_harmonic(r)).abs() < 1e-13, "r={r}");
    }
}

#[test]
fn rss_never_worse_than_srs_for_alpha() {
    for r in 1..=10usize {
        for m in [1usize, 2, 4, 8, 40, 1000] {
            let var_rss = rss_harmonic(r) / (m * r * r) as f64;
            let var_srs = 1.0 / (m * r) as f64;
            assert!(var_rss <= var_srs, "r={r} m={m}");
        }
    }
}

proptest! {
    #[test]
    fn measures_are_bounded(log_r in -14.0f64..14.0) {
        let r = log_r.exp();
        for m in Measure::ALL {
            let v = m.value(r);
            prop_assert!((0.0..=1.0).contains(&v), "{} at {}: {}", m, r, v);
        }
    }

    #[test]
    fn measures_are_reciprocal(log_r in -14.0f64..14.0) {
        let r = log_r.exp();
        for m in Measure::ALL {
            prop_assert!((m.value(r) - m.value(1.0 / r)).abs() <= 1e-12);
        }
    }

    #[test]
    fn measures_ordered_by_distance_from_one(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        // each measure is a decreasing function of |ln R|
        let (near, far) = if a.abs() <= b.abs() { (a, b) } else { (b, a) };
        for m in Measure::ALL {
            prop_assert!(m.value(near.exp()) >= m.value(far.exp()) - 1e-15);
        }
    }

    #[test]
    fn quantile_inverts_cdf(alpha in 0.05f64..20.0, beta in 0.01f64..100.0, u in 0.001f64..0.999) {
        let d = InverseLomax::new(alpha, beta).unwrap();
        let x = d.quantile(u).unwrap();
        prop_assert!((d.cdf(x).unwrap() - u).abs() < 1e-12);
    }

    #[test]
    fn log_density_agrees_with_pdf(alpha in 0.05f64..20.0, log_x in -10.0f64..10.0) {
        let d = InverseLomax::standard(alpha).unwrap();
        let x = log_x.exp();
        let pdf = d.pdf(x).unwrap();
        prop_assume!(pdf > 1e-300);
        prop_assert!((d.ln_pdf(x) - pdf.ln()).abs() < 1e-12 * d.ln_pdf(x).abs().max(1.0));
    }
}
