use num_complex::Complex64;
use pathlab_core::functionals::airy::{AI_0, AI_FIRST_ZERO, AI_PRIME_0};
use pathlab_core::functionals::{airy_ai, airy_ai_prime, airy_slice_weight, AiryProposal, Sign};
use pathlab_core::stats::chi_square_test;
use pathlab_core::RngStream;
use statrs::function::gamma::gamma;

/// Maclaurin series of Ai, used as an oracle independent of the table.
fn series(x: f64) -> f64 {
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    for k in 1..120 {
        let kf = k as f64;
        tf *= x * x * x / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x * x * x / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
    }
    let c1 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
    let c2 = 3f64.powf(-1.0 / 3.0) / gamma(1.0 / 3.0);
    c1 * f - c2 * g
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn origin_and_first_zero_match_gamma_and_series_oracles() {
    let ai0 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
    let aip0 = -(3f64.powf(-1.0 / 3.0)) / gamma(1.0 / 3.0);
    assert!((airy_ai(0.0f64) - ai0).abs() < 1e-9);
    assert!((airy_ai_prime(0.0f64) - aip0).abs() < 1e-9);
    assert!((AI_0 - ai0).abs() < 1e-15 && (AI_PRIME_0 - aip0).abs() < 1e-15);
    let zero = bisect(series, -3.0, -2.0);
    assert!((zero - AI_FIRST_ZERO).abs() < 1e-9);
    assert!(airy_ai(AI_FIRST_ZERO).abs() < 1e-9);
    assert!(airy_ai(-3.0f64) < 0.0);
}

#[test]
fn airy_equation_residual() {
    let h = 1e-3;
    let mut x: f64 = -10.0;
    while x <= 5.0 {
        let d2 = (-airy_ai(x + 2.0 * h) + 16.0 * airy_ai(x + h) - 30.0 * airy_ai(x) + 16.0 * airy_ai(x - h)
            - airy_ai(x - 2.0 * h))
            / (12.0 * h * h);
        assert!((d2 - x * airy_ai(x)).abs() < 1e-8, "x = {x}");
        x += 0.01;
    }
}

#[test]
fn slice_integral_reduces_to_airy() {
    // ∫dη exp{iε[ηf + η³/3]} along Im η = κ > 0, where the integrand decays
    // like exp(−εκ s²), against 2π ε^{−1/3} Ai(ε^{2/3} f).
    for &(f, eps) in &[(1.0f64, 0.5f64), (-3.0, 1.0), (10.0, 0.04)] {
        let kappa = 2.0 / eps.powf(1.0 / 3.0);
        let s_max = (60.0 / (eps * kappa)).sqrt();
        let n = 400_000;
        let ds = 2.0 * s_max / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=n {
            let eta = Complex64::new(-s_max + j as f64 * ds, kappa);
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            acc += w * (Complex64::i() * eps * (eta * f + eta * eta * eta / 3.0)).exp();
        }
        acc *= ds;
        let expect = 2.0 * std::f64::consts::PI * eps.powf(-1.0 / 3.0) * airy_slice_weight(f, eps).value();
        assert!((acc.re - expect).abs() < 1e-8 * expect.abs().max(1.0), "({f}, {eps}): {acc} vs {expect}");
        assert!(acc.im.abs() < 1e-8);
    }
}

#[test]
fn proposal_mean_sign_matches_quadrature() {
    // ∫Ai and ∫|Ai| over [−20, ∞) by an independent high-order quadrature.
    let p = AiryProposal::new(20.0).unwrap();
    let (lo, hi) = p.support();
    let n = 600_000;
    let h = (hi - lo) / n as f64;
    let (mut s, mut a) = (0.0, 0.0);
    for j in 0..n {
        // Two-point Gauss–Legendre per cell, cells split at zero crossings
        // only approximately; the cells are tiny compared with the lobes.
        let c = lo + (j as f64 + 0.5) * h;
        for &o in &[-0.5 / 3f64.sqrt(), 0.5 / 3f64.sqrt()] {
            let v = airy_ai(c + o * h);
            s += 0.5 * h * v;
            a += 0.5 * h * v.abs();
        }
    }
    let oracle = s / a;
    assert!((oracle - 0.2142).abs() < 5e-4, "{oracle}");
    assert!((p.expected_sign() - oracle).abs() < 1e-5);

    let mut rng = RngStream::new(2024, 0).rng();
    let draws = 1_000_000;
    let mut sum = 0.0;
    for _ in 0..draws {
        sum += p.sample::<f64, _>(&mut rng).sign.value::<f64>();
    }
    let mean = sum / draws as f64;
    let se = ((1.0 - mean * mean) / draws as f64).sqrt();
    assert!((mean - oracle).abs() < 3.0 * se, "{mean} vs {oracle} ± {se}");
}

#[test]
fn proposal_histogram_chi_square() {
    let p = AiryProposal::new(20.0).unwrap();
    let (lo, hi) = p.support();
    let bins = 200;
    let w = (hi - lo) / bins as f64;
    let draws = 1_000_000;
    let mut counts = vec![0.0; bins];
    let mut rng = RngStream::new(7, 3).rng();
    for _ in 0..draws {
        let d = p.sample::<f64, _>(&mut rng);
        let b = (((d.value - lo) / w) as usize).min(bins - 1);
        counts[b] += 1.0;
    }
    let sub = 400;
    let expected: Vec<f64> = (0..bins)
        .map(|b| {
            let a = lo + b as f64 * w;
            let hh = w / sub as f64;
            let m: f64 = (0..sub).map(|j| airy_ai(a + (j as f64 + 0.5) * hh).abs() * hh).sum();
            m / p.abs_mass() * draws as f64
        })
        .collect();
    let (_, _, pval) = chi_square_test(&counts, &expected).unwrap();
    assert!(pval > 0.001, "p = {pval}");
}

#[test]
fn negative_fraction_requires_first_lobe() {
    for (l, expect_neg) in [(2.3, false), (3.0, true), (20.0, true)] {
        let p = AiryProposal::new(l).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let neg = (0..100_000)
            .filter(|_| p.sample::<f64, _>(&mut rng).sign == Sign::Minus)
            .count();
        assert_eq!(neg > 0, expect_neg, "L = {l}");
    }
}
