//! Corpus-level statistics over template inventories and complexity
//! profiles: frequency grouping, coverage tables, log–log power-law fits,
//! bootstrap goodness-of-fit, tie-aware Spearman correlation, moving-average
//! curves with peak detection, and per-frequency-group proxy means.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityProfile;
use crate::corpus::{RecordProfile, TemplateInventory};
use crate::powerlaw;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("inventory has no entries")]
    EmptyInventory,
    #[error("spectrum has fewer than 3 points; cannot fit")]
    DegenerateSpectrum,
    #[error("need at least 4 pairs for a correlation")]
    TooFewPairs,
    #[error("unknown proxy '{0}'")]
    UnknownProxy(String),
    #[error("no usable input values")]
    EmptyInput,
    #[error("resamples must be ≥ 1")]
    ZeroResamples,
    #[error("coverage target {0} out of range (0, 100]")]
    BadTarget(f64),
    #[error("window must be ≥ 1")]
    BadWindow,
}

/// Frequency bands templates are reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyGroup {
    /// count ≥ 100
    High,
    /// 10 ≤ count ≤ 99
    Middle,
    /// 2 ≤ count ≤ 9
    LongTail,
    /// count = 1
    Once,
}

impl FrequencyGroup {
    pub const ALL: [FrequencyGroup; 4] = [
        FrequencyGroup::High,
        FrequencyGroup::Middle,
        FrequencyGroup::LongTail,
        FrequencyGroup::Once,
    ];

    pub fn of(count: u64) -> FrequencyGroup {
        match count {
            c if c >= 100 => FrequencyGroup::High,
            c if c >= 10 => FrequencyGroup::Middle,
            c if c >= 2 => FrequencyGroup::LongTail,
            _ => FrequencyGroup::Once,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyGroup::High => "high (>=100)",
            FrequencyGroup::Middle => "middle (10-99)",
            FrequencyGroup::LongTail => "long tail (2-9)",
            FrequencyGroup::Once => "once (=1)",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupStat {
    pub group: FrequencyGroup,
    /// Templates in this band.
    pub templates: u64,
    /// Share of all templates, in percent.
    pub template_pct: f64,
    /// Queries covered by this band's templates.
    pub queries: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    /// Template counts in descending order.
    pub sorted_counts: Vec<u64>,
    pub groups: [GroupStat; 4],
    pub total_templates: u64,
    pub total_queries: u64,
}

/// Partition an inventory's counts into the four frequency bands.
pub fn spectrum(inventory: &TemplateInventory) -> Result<FrequencySpectrum, StatsError> {
    if inventory.is_empty() {
        return Err(StatsError::EmptyInventory);
    }
    let sorted_counts = inventory.sorted_counts();
    Ok(spectrum_from_counts(&sorted_counts))
}

/// Spectrum from raw descending (or any-order) counts; exposed for
/// synthetic-data checks.
pub fn spectrum_from_counts(counts: &[u64]) -> FrequencySpectrum {
    let mut sorted_counts = counts.to_vec();
    sorted_counts.sort_unstable_by(|a, b| b.cmp(a));
    let total_templates = sorted_counts.len() as u64;
    let total_queries: u64 = sorted_counts.iter().sum();
    let groups = FrequencyGroup::ALL.map(|group| {
        let (templates, queries) = sorted_counts
            .iter()
            .filter(|&&c| FrequencyGroup::of(c) == group)
            .fold((0u64, 0u64), |(t, q), &c| (t + 1, q + c));
        GroupStat {
            group,
            templates,
            template_pct: 100.0 * templates as f64 / total_templates as f64,
            queries,
        }
    });
    FrequencySpectrum { sorted_counts, groups, total_templates, total_queries }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoveragePoint {
    /// Requested coverage, percent of all queries.
    pub target_pct: f64,
    /// Minimum number of top templates reaching the target.
    pub templates_needed: u64,
    /// That number as a percentage of all templates.
    pub template_pct: f64,
    /// Queries actually covered by those templates.
    pub queries_covered: u64,
}

/// For each target percentage, the minimum k such that the k most frequent
/// templates cover at least that share of all queries.
pub fn coverage_table(
    inventory: &TemplateInventory,
    targets: &[f64],
) -> Result<Vec<CoveragePoint>, StatsError> {
    if inventory.is_empty() {
        return Err(StatsError::EmptyInventory);
    }
    for &t in targets {
        if !(t > 0.0 && t <= 100.0) {
            return Err(StatsError::BadTarget(t));
        }
    }
    let counts = inventory.sorted_counts();
    let total_templates = counts.len() as f64;
    let total_queries: u64 = counts.iter().sum();

    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        let mut cum = 0u64;
        let mut k = 0u64;
        for &c in &counts {
            cum += c;
            k += 1;
            if cum as f64 * 100.0 >= target * total_queries as f64 {
                break;
            }
        }
        out.push(CoveragePoint {
            target_pct: target,
            templates_needed: k,
            template_pct: 100.0 * k as f64 / total_templates,
            queries_covered: cum,
        });
    }
    Ok(out)
}

/// Which points a log–log line is fitted through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitAxes {
    /// (ln rank, ln count) — the frequency curve as plotted.
    #[default]
    RankFrequency,
    /// (ln count value, ln number of templates with that count).
    FrequencyOfFrequency,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope magnitude of the fitted line log y = −alpha·log x + intercept.
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Bootstrap goodness-of-fit p-value, when computed.
    pub gof_p_value: Option<f64>,
    pub bootstrap_n: Option<usize>,
}

/// Least-squares line through the log–log frequency curve.
pub fn fit_loglog(spectrum: &FrequencySpectrum) -> Result<PowerLawFit, StatsError> {
    fit_loglog_axes(spectrum, FitAxes::RankFrequency)
}

pub fn fit_loglog_axes(
    spectrum: &FrequencySpectrum,
    axes: FitAxes,
) -> Result<PowerLawFit, StatsError> {
    let pairs: Vec<(f64, f64)> = match axes {
        FitAxes::RankFrequency => spectrum
            .sorted_counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 + 1.0, c as f64))
            .collect(),
        FitAxes::FrequencyOfFrequency => {
            let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
            for &c in &spectrum.sorted_counts {
                *histogram.entry(c).or_default() += 1;
            }
            histogram
                .iter()
                .map(|(&value, &n)| (value as f64, n as f64))
                .collect()
        }
    };
    fit_loglog_pairs(&pairs)
}

/// Least-squares line through `(ln x, ln y)` for raw positive pairs.
/// Needs ≥ 3 pairs with distinct x values; every coordinate must be > 0.
pub fn fit_loglog_pairs(pairs: &[(f64, f64)]) -> Result<PowerLawFit, StatsError> {
    if pairs.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(StatsError::DegenerateSpectrum);
    }
    let points: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    if points.len() < 3 {
        return Err(StatsError::DegenerateSpectrum);
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(StatsError::DegenerateSpectrum);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(PowerLawFit {
        alpha: -slope,
        intercept,
        r_squared,
        gof_p_value: None,
        bootstrap_n: None,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GofReport {
    pub p_value: f64,
    /// Discrete MLE over the template counts.
    pub mle_alpha: f64,
    pub x_min: u64,
    pub ks_distance: f64,
    pub tail_n: usize,
    pub resamples: usize,
    pub seed: u64,
}

/// Clauset-style semi-parametric bootstrap over the template counts.
/// Deterministic for a given seed; resamples should be ≥ 100 for a stable
/// p-value (the CLI default is 1000).
pub fn gof_bootstrap(
    spectrum: &FrequencySpectrum,
    resamples: usize,
    seed: u64,
) -> Result<GofReport, StatsError> {
    if resamples == 0 {
        return Err(StatsError::ZeroResamples);
    }
    let result = powerlaw::bootstrap_pvalue(&spectrum.sorted_counts, resamples, seed)
        .ok_or(StatsError::DegenerateSpectrum)?;
    Ok(GofReport {
        p_value: result.p_value,
        mle_alpha: result.fit.alpha,
        x_min: result.fit.x_min,
        ks_distance: result.fit.ks,
        tail_n: result.fit.tail_n,
        resamples: result.resamples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with n−2 degrees of
    /// freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Tie-aware Spearman rank correlation.
pub fn spearman(pairs: &[(f64, f64)]) -> Result<SpearmanResult, StatsError> {
    if pairs.len() < 4 {
        return Err(StatsError::TooFewPairs);
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);

    let n = pairs.len() as f64;
    let mean_rx = rx.iter().sum::<f64>() / n;
    let mean_ry = ry.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for i in 0..pairs.len() {
        let dx = rx[i] - mean_rx;
        let dy = ry[i] - mean_ry;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        // a constant series has no rank ordering to correlate
        return Err(StatsError::EmptyInput);
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    let df = n - 2.0;
    let p_value = if (1.0 - rho.abs()) < 1e-15 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        student_t_two_sided(t, df)
    };
    Ok(SpearmanResult { rho, p_value, n: pairs.len() })
}

/// Ranks with ties receiving the average of the positions they occupy.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN ranks"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average 1-based rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value of a Student-t statistic:
/// p = I_{df/(df+t²)}(df/2, 1/2).
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    incomplete_beta(0.5 * df, 0.5, x)
}

/// Regularized incomplete beta I_x(a, b) via the standard continued
/// fraction (Lentz's algorithm), accurate to ~1e-12 for the df range used.
fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front =
        (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection formula
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MovingAverageCurve {
    pub proxy: String,
    /// Table-count values, ascending.
    pub x: Vec<u32>,
    /// Mean proxy value per table count.
    pub y_raw: Vec<f64>,
    /// Trailing moving average of y_raw.
    pub y_smooth: Vec<f64>,
    pub peak_value: f64,
    /// x at the (first) maximum of y_smooth.
    pub breaking_point: u32,
}

fn proxy_index(proxy: &str) -> Result<usize, StatsError> {
    ComplexityProfile::FIELD_NAMES
        .iter()
        .position(|&n| n == proxy)
        .ok_or_else(|| StatsError::UnknownProxy(proxy.to_string()))
}

/// Group records by their database's table count, average `proxy` per
/// group, and smooth with a trailing window (shorter during warm-up).
/// Records whose db_id has no table count are skipped.
pub fn moving_average(
    profiles: &[RecordProfile],
    table_counts: &BTreeMap<String, u32>,
    proxy: &str,
    window: usize,
) -> Result<MovingAverageCurve, StatsError> {
    if window == 0 {
        return Err(StatsError::BadWindow);
    }
    let idx = proxy_index(proxy)?;

    let mut groups: BTreeMap<u32, (f64, u64)> = BTreeMap::new();
    for rp in profiles {
        if let Some(&tc) = table_counts.get(&rp.db_id) {
            let slot = groups.entry(tc).or_insert((0.0, 0));
            slot.0 += rp.profile.as_array()[idx] as f64;
            slot.1 += 1;
        }
    }
    if groups.is_empty() {
        return Err(StatsError::EmptyInput);
    }

    let x: Vec<u32> = groups.keys().copied().collect();
    let y_raw: Vec<f64> = groups.values().map(|&(sum, n)| sum / n as f64).collect();
    let y_smooth: Vec<f64> = (0..y_raw.len())
        .map(|i| {
            let start = i + 1 - window.min(i + 1);
            let slice = &y_raw[start..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();

    let (peak_idx, peak_value) = y_smooth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    Ok(MovingAverageCurve {
        proxy: proxy.to_string(),
        x: x.clone(),
        y_raw,
        y_smooth,
        peak_value,
        breaking_point: x[peak_idx],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyGroupRow {
    pub group: FrequencyGroup,
    pub queries: u64,
    /// Mean of each proxy over the group's queries, in
    /// [`ComplexityProfile::FIELD_NAMES`] order; None when the group holds
    /// no queries.
    pub means: [Option<f64>; 6],
}

/// Mean proxy values per frequency group (all four groups, even if empty).
pub fn proxy_by_group(inventory: &TemplateInventory) -> Result<Vec<ProxyGroupRow>, StatsError> {
    if inventory.is_empty() {
        return Err(StatsError::EmptyInventory);
    }
    let mut rows = Vec::with_capacity(4);
    for group in FrequencyGroup::ALL {
        let mut sums = [0u64; 6];
        let mut queries = 0u64;
        for entry in inventory.entries.values() {
            if FrequencyGroup::of(entry.count) == group {
                queries += entry.count;
                for (s, v) in sums.iter_mut().zip(entry.proxy_sums) {
                    *s += v;
                }
            }
        }
        let means = if queries == 0 {
            [None; 6]
        } else {
            sums.map(|s| Some(s as f64 / queries as f64))
        };
        rows.push(ProxyGroupRow { group, queries, means });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub proxy: String,
    /// Lower-middle median, so integer-valued proxies keep integer medians.
    pub median: u32,
    pub mean: f64,
    pub min: u32,
    pub max: u32,
}

/// Median/mean/min/max for each of the six proxies.
pub fn summary_stats(profiles: &[ComplexityProfile]) -> Result<Vec<SummaryRow>, StatsError> {
    if profiles.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut rows = Vec::with_capacity(6);
    for (idx, name) in ComplexityProfile::FIELD_NAMES.iter().enumerate() {
        let mut values: Vec<u32> = profiles.iter().map(|p| p.as_array()[idx]).collect();
        values.sort_unstable();
        let n = values.len();
        rows.push(SummaryRow {
            proxy: name.to_string(),
            median: values[(n - 1) / 2],
            mean: values.iter().map(|&v| v as f64).sum::<f64>() / n as f64,
            min: values[0],
            max: values[n - 1],
        });
    }
    Ok(rows)
}
