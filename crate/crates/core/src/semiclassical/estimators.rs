use crate::error::{usage, Error, Result};
use crate::grid::SpatialGrid;
use crate::scalar::Real;
use crate::semiclassical::evolve::SignedEnsemble;
use crate::stats::Estimate;

/// `|Σw| ≤ CANCELLATION·Σ|w|` counts as an exactly cancelled denominator.
const CANCELLATION: f64 = 1e-12;
const JACKKNIFE_BLOCKS: usize = 100;

/// Terminal-position observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable<T> {
    /// `x^k`.
    Moment(i32),
    /// Indicator of `lo ≤ x < hi`.
    Indicator { lo: T, hi: T },
}

impl<T: Real> Observable<T> {
    fn eval(&self, x: T) -> T {
        match *self {
            Observable::Moment(k) => x.powi(k),
            Observable::Indicator { lo, hi } => {
                if x >= lo && x < hi {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// `(mean sign, ESS)` of signed weights: `Σw/Σ|w|` and `(Σ|w|)²/Σw²`.
pub fn weight_diagnostics<T: Real>(weights: &[T]) -> (T, T) {
    let (mut s, mut a, mut q) = (T::zero(), T::zero(), T::zero());
    for &w in weights {
        s = s + w;
        a = a + w.abs();
        q = q + w * w;
    }
    if a == T::zero() {
        return (T::zero(), T::zero());
    }
    (s / a, a * a / q)
}

fn collapse<T: Real>(weights: &[T]) -> Error {
    let (ms, ess) = weight_diagnostics(weights);
    Error::SignCollapse {
        mean_sign: ms.to_f64_lossy(),
        floor: CANCELLATION,
        ess: ess.to_f64_lossy(),
        n: weights.len(),
    }
}

/// `Σ wᵢ Oᵢ / Σ wᵢ` with a delete-one-block jackknife standard error
/// (up to 100 contiguous blocks). A leave-out block whose weights cancel
/// gives an infinite standard error.
pub fn ratio_estimate_values<T: Real>(values: &[T], weights: &[T]) -> Result<Estimate<T>> {
    if values.len() != weights.len() {
        return usage("values and weights differ in length");
    }
    let n = values.len();
    let num: T = values.iter().zip(weights).map(|(&v, &w)| v * w).sum();
    let den: T = weights.iter().copied().sum();
    let abs: T = weights.iter().map(|w| w.abs()).sum();
    if n == 0 || !(den.abs() > T::lit(CANCELLATION) * abs) {
        return Err(collapse(weights));
    }
    let value = num / den;
    let b = JACKKNIFE_BLOCKS.min(n);
    if b < 2 {
        return Ok(Estimate {
            value,
            std_error: T::infinity(),
        });
    }
    let mut partial = Vec::with_capacity(b);
    for j in 0..b {
        let (lo, hi) = (j * n / b, (j + 1) * n / b);
        let bn: T = values[lo..hi].iter().zip(&weights[lo..hi]).map(|(&v, &w)| v * w).sum();
        let bd: T = weights[lo..hi].iter().copied().sum();
        let d = den - bd;
        if !(d.abs() > T::lit(CANCELLATION) * abs) {
            return Ok(Estimate {
                value,
                std_error: T::infinity(),
            });
        }
        partial.push((num - bn) / d);
    }
    let bt = T::from_usize_lossy(b);
    let mean = partial.iter().copied().sum::<T>() / bt;
    let ss: T = partial.iter().map(|&p| (p - mean) * (p - mean)).sum();
    Ok(Estimate {
        value,
        std_error: ((bt - T::one()) / bt * ss).sqrt(),
    })
}

/// Ratio estimate of an observable of the terminal position.
pub fn ratio_estimate<T: Real>(ens: &SignedEnsemble<T>, obs: &Observable<T>) -> Result<Estimate<T>> {
    let values: Vec<T> = ens.terminal().iter().map(|&x| obs.eval(x)).collect();
    ratio_estimate_values(&values, &ens.weights())
}

/// Signed histogram of terminal positions on `grid` (bins centred on the
/// nodes), each bin divided by the total signed weight and `dx`.
pub fn ratio_density<T: Real>(ens: &SignedEnsemble<T>, grid: &SpatialGrid<T>) -> Result<Vec<Estimate<T>>> {
    let w = ens.weights();
    let half = grid.dx() / T::lit(2.0);
    grid.points()
        .into_iter()
        .map(|c| {
            let obs = Observable::Indicator {
                lo: c - half,
                hi: c + half,
            };
            let e = ratio_estimate_values(&ens.terminal().iter().map(|&x| obs.eval(x)).collect::<Vec<_>>(), &w)?;
            Ok(Estimate {
                value: e.value / grid.dx(),
                std_error: e.std_error / grid.dx(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignDiagnostics {
    pub n: usize,
    pub mean_sign: f64,
    pub effective_sample_size: f64,
    /// Negative draws over non-degenerate draws, per interior slice.
    pub per_slice_negative_fraction: Vec<f64>,
    pub negative_fraction: f64,
    /// Share of interior slices that took the classical update.
    pub degenerate_fraction: f64,
    /// Counts of `log10(|w|/max|w|)` in unit bins `[−(j+1), −j)`, last bin
    /// open-ended.
    pub magnitude_histogram: Vec<u64>,
}

const MAGNITUDE_DECADES: usize = 16;

pub fn sign_diagnostics<T: Real>(ens: &SignedEnsemble<T>) -> SignDiagnostics {
    let w = ens.weights();
    let (ms, ess) = weight_diagnostics(&w);
    let per_slice: Vec<f64> = ens
        .slice_draws()
        .iter()
        .zip(ens.slice_negative())
        .map(|(&d, &neg)| if d == 0 { 0.0 } else { neg as f64 / d as f64 })
        .collect();
    let draws: u64 = ens.slice_draws().iter().sum();
    let neg: u64 = ens.slice_negative().iter().sum();
    let total = ens.total_slices();
    let mut hist = vec![0u64; MAGNITUDE_DECADES];
    for v in &w {
        let l = -v.abs().to_f64_lossy().log10();
        let j = if l.is_finite() { (l.max(0.0) as usize).min(MAGNITUDE_DECADES - 1) } else { MAGNITUDE_DECADES - 1 };
        hist[j] += 1;
    }
    SignDiagnostics {
        n: ens.n_traj(),
        mean_sign: ms.to_f64_lossy(),
        effective_sample_size: ess.to_f64_lossy(),
        per_slice_negative_fraction: per_slice,
        negative_fraction: if draws == 0 { 0.0 } else { neg as f64 / draws as f64 },
        degenerate_fraction: if total == 0 { 1.0 } else { ens.degenerate_slices() as f64 / total as f64 },
        magnitude_histogram: hist,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn signed_arithmetic_example() {
        let e = ratio_estimate_values(&[1.0, 2.0, 4.0], &[2.0, 1.0, -1.0]).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn exact_cancellation_is_collapse() {
        assert!(matches!(
            ratio_estimate_values(&[1.0, 1.0], &[1.0, -1.0]),
            Err(Error::SignCollapse { .. })
        ));
    }

    #[test]
    fn uniform_weights_give_plain_mean() {
        let mut rng = crate::rng::RngStream::new(1, 0).rng();
        let v: Vec<f64> = (0..1000).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let e = ratio_estimate_values(&v, &vec![1.0; 1000]).unwrap();
        let m = crate::stats::mean(&v);
        assert!((e.value - m.value).abs() < 1e-14);
        // Delete-a-group jackknife of a plain mean equals the usual SE up to
        // the block-size factor.
        assert!((e.std_error / m.std_error - 1.0).abs() < 0.25);
    }

    #[test]
    fn diagnostics_examples() {
        let (ms, ess) = weight_diagnostics(&[1.0; 10]);
        assert_eq!((ms, ess), (1.0, 10.0));
        let (ms, _) = weight_diagnostics(&[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(ms, 0.0);
        assert_eq!(weight_diagnostics(&[2.0, 2.0]).1, 2.0);
    }

    proptest! {
        #[test]
        fn ess_bounds(w in proptest::collection::vec(-5.0f64..5.0, 1..50)) {
            prop_assume!(w.iter().any(|x| x.abs() > 1e-6));
            let (ms, ess) = weight_diagnostics(&w);
            prop_assert!(ms.abs() <= 1.0 + 1e-12);
            prop_assert!(ess >= 1.0 - 1e-9 && ess <= w.len() as f64 + 1e-9);
        }

        #[test]
        fn ratio_is_scale_invariant(
            v in proptest::collection::vec(-3.0f64..3.0, 4..40),
            c in 0.01f64..100.0,
        ) {
            let w: Vec<f64> = (0..v.len()).map(|i| 1.0 + (i % 3) as f64).collect();
            let a = ratio_estimate_values(&v, &w).unwrap();
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let b = ratio_estimate_values(&v, &scaled).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-10);
        }
    }
}
