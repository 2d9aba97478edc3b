//! Checks against reference computations that share no code with the crate.

use ancred::nulldist::{
    ks_statistic, limiting_cdf_c0, p_i_null_density, simulate_p_e_null, simulate_p_i_null,
    SimulationConfig,
};
use ancred::{
    extrinsic_p, find_root_monotone, intrinsic_p, intrinsic_threshold, std_normal_cdf,
    std_normal_pdf, std_normal_quantile, Tolerance,
};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// erfc by the positive-term series `erf(x) = 2/√π e^{−x²} Σ 2ⁿx^{2n+1}/(2n+1)!!`
/// for small arguments and a Lentz continued fraction in the tail.
fn erfc_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_oracle(-x);
    }
    if x < 2.0 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        return 1.0 - FRAC_2_SQRT_PI * (-x * x).exp() * sum;
    }
    // erfc(x) = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

fn phi_oracle(x: f64) -> f64 {
    0.5 * erfc_oracle(-x / std::f64::consts::SQRT_2)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn cdf_agrees_with_series_oracle() {
    let mut x = -8.0;
    while x <= 8.0 {
        let got = std_normal_cdf(x).unwrap();
        let want = phi_oracle(x);
        assert!((got - want).abs() <= 1e-12, "x = {x}: {got} vs {want}");
        if x < 0.0 {
            assert!((got - want).abs() <= 1e-12 * want, "relative tail error at {x}");
        }
        x += 0.013;
    }
}

#[test]
fn far_tail_relative_accuracy() {
    for x in [-8.0, -12.0, -20.0, -30.0] {
        let got = std_normal_cdf(x).unwrap();
        let want = phi_oracle(x);
        assert!(((got - want) / want).abs() <= 1e-12, "x = {x}");
    }
    assert!((std_normal_cdf(-8.0).unwrap() - 6.22e-16).abs() <= 6.22e-16 * 1e-3);
}

#[test]
fn pdf_matches_direct_formula() {
    for x in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.5] {
        let want = (-x * x / 2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((std_normal_pdf(x).unwrap() - want).abs() <= 1e-16);
    }
    assert!((std_normal_pdf(1.0).unwrap() - 0.241_970_724_519_143_37).abs() < 1e-15);
}

#[test]
fn quantile_matches_bisection_oracle() {
    for p in [1e-10, 1e-4, 0.0025, 0.025, 0.3, 0.5, 0.8, 0.975, 0.9975, 1.0 - 1e-6] {
        let oracle = find_root_monotone(
            |x| phi_oracle(x) - p,
            -40.0,
            40.0,
            Tolerance::new(1e-13, 500).unwrap(),
        )
        .unwrap();
        let got = std_normal_quantile(p).unwrap();
        assert!((got - oracle).abs() <= 1e-9, "p = {p}: {got} vs {oracle}");
    }
}

/// p_E by the closed-form larger root of `t²t₀²u² − (t² + t₀²)u + 1 − c = 0`
/// with `u = 1/z²`.
fn extrinsic_closed_form(t: f64, t0: f64, c: f64) -> f64 {
    let (a, b) = (t * t, t0 * t0);
    let u = (a + b + ((a - b).powi(2) + 4.0 * a * b * c).sqrt()) / (2.0 * a * b);
    2.0 * phi_oracle(-1.0 / u.sqrt())
}

#[test]
fn extrinsic_matches_quadratic_root() {
    let stats = [0.2, 0.9, 1.5, 1.96, 2.1185, 3.0, 4.4042, 6.5];
    let ratios = [1e-6, 0.01, 0.3, 1.0, 1.3153, 4.0, 100.0];
    for &t in &stats {
        for &t0 in &stats {
            for &c in &ratios {
                let got = extrinsic_p(t, t0, c).unwrap();
                let want = extrinsic_closed_form(t, t0, c);
                assert!(
                    (got - want).abs() <= 1e-10 * want + 1e-15,
                    "t={t} t0={t0} c={c}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn density_normalizes() {
    let total = adaptive_simpson(&|x| p_i_null_density(x).unwrap(), 1e-15, 1.0 - 1e-15, 1e-11);
    assert!((total - 1.0).abs() <= 1e-6, "integral = {total}");
}

#[test]
fn density_integrates_to_tail_probability() {
    for alpha in [0.01, 0.05, 0.2, 0.5] {
        let mass = adaptive_simpson(&|x| p_i_null_density(x).unwrap(), 1e-15, alpha, 1e-12);
        assert!((mass - intrinsic_threshold(alpha).unwrap()).abs() <= 1e-8);
    }
}

#[test]
fn simulated_p_i_matches_density() {
    let samples = simulate_p_i_null(50_000, 2018).unwrap();
    let d = ks_statistic(&samples, |x| {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            intrinsic_threshold(x).unwrap()
        }
    });
    // 1.63/√n is the 1% critical value of the KS distance
    assert!(d < 1.63 / (50_000f64).sqrt(), "KS distance {d}");
}

#[test]
fn simulated_p_e_respects_tail_bound() {
    let n = 50_000;
    for c in [0.001, 0.1, 0.5, 1.0, 2.0, 10.0] {
        let set = simulate_p_e_null(&SimulationConfig::new(n, c, 7).unwrap()).unwrap();
        for alpha in [0.01f64, 0.05, 0.1] {
            let a2 = alpha * alpha;
            let bound = a2 + 3.0 * (a2 * (1.0 - a2) / n as f64).sqrt();
            let tail = set.empirical_tail(alpha);
            assert!(tail <= bound, "c={c} alpha={alpha}: {tail} > {bound}");
        }
        for d in &set.draws {
            assert!(d.p_extrinsic > d.p().max(d.p0()), "{d:?} p={} p0={}", d.p(), d.p0());
        }
    }
}

#[test]
fn small_c_approaches_beta_2_1() {
    let set = simulate_p_e_null(&SimulationConfig::new(50_000, 1e-6, 3).unwrap()).unwrap();
    let values = set.p_extrinsic();
    let d = ks_statistic(&values, limiting_cdf_c0);
    assert!(d < 1.63 / (50_000f64).sqrt(), "KS distance {d}");
    let half = values.iter().filter(|&&x| x < 0.5).count() as f64 / values.len() as f64;
    assert!((half - 0.25).abs() < 0.01);
}

#[test]
fn p_e_shifts_right_with_c() {
    let sets: Vec<_> = [0.001, 0.5, 1.0, 2.0]
        .iter()
        .map(|&c| simulate_p_e_null(&SimulationConfig::new(20_000, c, 11).unwrap()).unwrap())
        .collect();
    for pair in sets.windows(2) {
        for (lo, hi) in pair[0].draws.iter().zip(&pair[1].draws) {
            assert_eq!((lo.t, lo.t0), (hi.t, hi.t0));
            assert!(lo.p_extrinsic <= hi.p_extrinsic);
        }
    }
}

#[test]
fn intrinsic_p_closed_form_values() {
    for (p, t_half) in [(0.05, 1.385_903_824_349_678_2), (0.034, 1.499_117_068_418_297_3)] {
        let want = 2.0 * phi_oracle(-t_half);
        assert!((intrinsic_p(p).unwrap() - want).abs() < 1e-7);
    }
}
