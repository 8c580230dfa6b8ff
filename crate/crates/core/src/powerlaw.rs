//! Discrete power-law fitting and goodness-of-fit testing for frequency
//! counts, following the Clauset–Shalizi–Newman recipe: maximum-likelihood
//! alpha with an x_min chosen to minimize the Kolmogorov–Smirnov distance,
//! then a semi-parametric bootstrap that resamples body values empirically
//! and tail values from the fitted law.
//!
//! Everything is deterministic given a seed: resample `i` draws from its own
//! ChaCha12 stream, so results are independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest tail size the x_min scan will accept; below this the fit falls
/// back to x_min = min(data).
const MIN_TAIL: usize = 6;

/// Hurwitz zeta ζ(s, a) for s > 1, a > 0, via Euler–Maclaurin summation.
///
/// Accuracy is ~1e-12 relative over the parameter range used here
/// (1 < s ≤ 25, a ≥ 1), verified against mpmath references in the tests.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const N: usize = 25;
    // B_{2j} / (2j)! for j = 1..=7
    const COEFF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];

    let mut sum = 0.0;
    for k in 0..N {
        sum += (a + k as f64).powf(-s);
    }
    let m = a + N as f64;
    sum += m.powf(1.0 - s) / (s - 1.0);
    sum += 0.5 * m.powf(-s);

    // correction terms: B_2j/(2j)! · s(s+1)...(s+2j-2) · m^{-(s+2j-1)}
    let m2 = m * m;
    let mut rising = s;
    let mut power = m.powf(-s - 1.0);
    for (j, c) in COEFF.iter().enumerate() {
        sum += c * rising * power;
        let base = s + (2 * j + 1) as f64;
        rising *= base * (base + 1.0);
        power /= m2;
    }
    sum
}

/// Survival function P(X ≥ x) of the discrete power law with the given
/// alpha and x_min.
pub fn survival(x: u64, alpha: f64, x_min: u64) -> f64 {
    hurwitz_zeta(alpha, x as f64) / hurwitz_zeta(alpha, x_min as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteFit {
    pub alpha: f64,
    pub x_min: u64,
    pub ks: f64,
    pub tail_n: usize,
}

/// Maximum-likelihood alpha for the tail (all values ≥ x_min), by
/// golden-section search on the exact discrete log-likelihood
/// ℓ(α) = −α Σ ln x − n ln ζ(α, x_min).
pub fn mle_alpha(tail: &[u64], x_min: u64) -> f64 {
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    let denom = sum_ln - n * ((x_min as f64) - 0.5).ln();
    if denom <= 1e-12 {
        // all mass at x_min; likelihood increases without bound
        return 25.0;
    }
    let approx = 1.0 + n / denom;
    let mut lo = (approx * 0.4).max(1.000_001);
    let mut hi = (approx * 2.5).clamp(lo + 0.1, 25.0);

    let xm = x_min as f64;
    let nll = |alpha: f64| alpha * sum_ln + n * hurwitz_zeta(alpha, xm).ln();

    const PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - PHI * (hi - lo);
    let mut x2 = lo + PHI * (hi - lo);
    let mut f1 = nll(x1);
    let mut f2 = nll(x2);
    for _ in 0..70 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - PHI * (hi - lo);
            f1 = nll(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + PHI * (hi - lo);
            f2 = nll(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sorted_tail`
/// (ascending, all ≥ x_min) and the fitted discrete power law.
pub fn ks_distance(sorted_tail: &[u64], alpha: f64, x_min: u64) -> f64 {
    let n = sorted_tail.len() as f64;
    if sorted_tail.is_empty() {
        return f64::INFINITY;
    }
    let zeta_min = hurwitz_zeta(alpha, x_min as f64);
    let mut d_max: f64 = 0.0;
    let mut i = 0;
    // ζ(α, v+1) maintained incrementally; large gaps recomputed directly
    let mut cursor = x_min;
    let mut zeta_cursor = zeta_min;
    while i < sorted_tail.len() {
        let v = sorted_tail[i];
        let mut j = i;
        while j < sorted_tail.len() && sorted_tail[j] == v {
            j += 1;
        }
        let f_emp = j as f64 / n;
        let target = v + 1;
        if target - cursor > 64 {
            zeta_cursor = hurwitz_zeta(alpha, target as f64);
        } else {
            while cursor < target {
                zeta_cursor -= (cursor as f64).powf(-alpha);
                cursor += 1;
            }
        }
        cursor = target;
        let f_model = 1.0 - (zeta_cursor / zeta_min).clamp(0.0, 1.0);
        d_max = d_max.max((f_emp - f_model).abs());
        i = j;
    }
    d_max
}

/// Fit a discrete power law; x_min scans the unique observed values and
/// keeps the candidate with the smallest KS distance (ties: smaller x_min).
/// Candidates must keep at least max(6, n/20) observations in the tail:
/// without that floor the scan drifts into tiny deep tails whose KS noise
/// beats any honest candidate, and the goodness-of-fit test loses all power
/// against short-tailed alternatives. Returns None when no candidate leaves
/// at least two distinct tail values.
pub fn fit_discrete(data: &[u64]) -> Option<DiscreteFit> {
    if data.is_empty() {
        return None;
    }
    let mut sorted = data.to_vec();
    sorted.sort_unstable();
    let mut unique: Vec<u64> = sorted.clone();
    unique.dedup();
    if unique.len() < 2 {
        return None;
    }
    let min_tail = MIN_TAIL.max(sorted.len() / 20);

    let mut best: Option<DiscreteFit> = None;
    for &candidate in &unique {
        let start = sorted.partition_point(|&x| x < candidate);
        let tail = &sorted[start..];
        if tail.len() < min_tail {
            continue;
        }
        let distinct = {
            let mut d = tail.to_vec();
            d.dedup();
            d.len()
        };
        if distinct < 2 {
            continue;
        }
        let alpha = mle_alpha(tail, candidate);
        let ks = ks_distance(tail, alpha, candidate);
        if best.map_or(true, |b| ks < b.ks) {
            best = Some(DiscreteFit { alpha, x_min: candidate, ks, tail_n: tail.len() });
        }
    }

    best.or_else(|| {
        // fall back to the full dataset when every tail was too small
        let x_min = sorted[0];
        let alpha = mle_alpha(&sorted, x_min);
        let ks = ks_distance(&sorted, alpha, x_min);
        Some(DiscreteFit { alpha, x_min, ks, tail_n: sorted.len() })
    })
}

/// Draws from a fitted discrete power law via a cumulative table with an
/// exact zeta-based search for the far tail.
pub struct PowerLawSampler {
    alpha: f64,
    x_min: u64,
    /// cdf[i] = P(X ≤ x_min + i)
    cdf: Vec<f64>,
    zeta_min: f64,
}

impl PowerLawSampler {
    pub fn new(alpha: f64, x_min: u64) -> Self {
        let zeta_min = hurwitz_zeta(alpha, x_min as f64);
        let mut cdf = Vec::with_capacity(4096);
        let mut cum = 0.0;
        let mut x = x_min;
        while cum < 1.0 - 1e-12 && cdf.len() < (1 << 20) {
            cum += (x as f64).powf(-alpha) / zeta_min;
            cdf.push(cum.min(1.0));
            x += 1;
        }
        PowerLawSampler { alpha, x_min, cdf, zeta_min }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx < self.cdf.len() {
            return self.x_min + idx as u64;
        }
        // beyond the table: find x with S(x) ≥ 1-u > S(x+1) by doubling
        // then bisection on the survival function
        let survival_u = 1.0 - u;
        let mut lo = self.x_min + self.cdf.len() as u64;
        let mut hi = lo.max(1) * 2;
        while hurwitz_zeta(self.alpha, hi as f64) / self.zeta_min > survival_u {
            lo = hi;
            hi *= 2;
            if hi > 1 << 50 {
                break;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if hurwitz_zeta(self.alpha, mid as f64) / self.zeta_min > survival_u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapResult {
    pub p_value: f64,
    pub fit: DiscreteFit,
    pub resamples: usize,
}

/// Semi-parametric bootstrap goodness-of-fit p-value: the fraction of
/// synthetic datasets (drawn from the fitted law, with sub-x_min values
/// resampled from the empirical body) whose refitted KS distance meets or
/// exceeds the empirical one. Small p rejects the power-law hypothesis.
pub fn bootstrap_pvalue(data: &[u64], resamples: usize, seed: u64) -> Option<BootstrapResult> {
    if resamples == 0 {
        return None;
    }
    let fit = fit_discrete(data)?;
    let body: Vec<u64> = data.iter().copied().filter(|&x| x < fit.x_min).collect();
    let p_tail = fit.tail_n as f64 / data.len() as f64;
    let sampler = PowerLawSampler::new(fit.alpha, fit.x_min);
    let n = data.len();

    let one_resample = |i: usize| -> u32 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let synth: Vec<u64> = (0..n)
            .map(|_| {
                if body.is_empty() || rng.gen::<f64>() < p_tail {
                    sampler.sample(&mut rng)
                } else {
                    body[rng.gen_range(0..body.len())]
                }
            })
            .collect();
        match fit_discrete(&synth) {
            Some(refit) if refit.ks < fit.ks => 0,
            // refit failed or D_synth ≥ D_emp: counts toward the p-value
            _ => 1,
        }
    };

    #[cfg(feature = "parallel")]
    let exceed: u32 = (0..resamples).into_par_iter().map(one_resample).sum();
    #[cfg(not(feature = "parallel"))]
    let exceed: u32 = (0..resamples).map(one_resample).sum();

    Some(BootstrapResult {
        p_value: exceed as f64 / resamples as f64,
        fit,
        resamples,
    })
}
