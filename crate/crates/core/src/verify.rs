//! Monte-Carlo checks of the moment lemmas behind the width bound and of the
//! bound's failure probability.
//!
//! Every report is a deterministic function of its parameters and seed:
//! samples are drawn in fixed-size chunks, each from its own stream, and the
//! chunk sums are merged in chunk order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::certify::{
    gamma1, gamma2, width_bound_binary, QuadraticFormAccumulator, DEFAULT_REL_TOL,
};
use crate::error::{Error, Result};
use crate::rng::{standard_normal, stream, StreamRng};
use crate::stats::MeanAccumulator;
use crate::subspace::{principal_angles, projection_difference_spectrum, sample_stiefel, Subspace};
use crate::Real;

/// Slack, in standard errors, granted to every statistical check.
pub const SE_SLACK: f64 = 3.0;
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;
/// Largest width the failure-probability check will stream.
pub const MAX_STREAMED_WIDTH: usize = 50_000_000;
/// Largest deviation tolerated between the projection-difference spectrum and `±sin θ`.
pub const SPECTRUM_TOL: f64 = 1e-9;

const CHUNK: usize = 8192;

const TAG_ORDER: u64 = 1;
const TAG_ISOTROPY: u64 = 2;
const TAG_SANDWICH: u64 = 3;
const TAG_BERNSTEIN: u64 = 4;
const TAG_SPECTRUM: u64 = 5;
const TAG_FAILURE: u64 = 6;
const TAG_ACCEPTANCE: u64 = 7;

/// Draws `(a, b)` distributed as `(U₁ᵀw, U₂ᵀw)` conditioned on `‖U₁ᵀw‖² > ‖U₂ᵀw‖²`.
#[derive(Debug, Clone)]
pub struct ConditionedPairSampler<T: Real> {
    s1: Subspace<T>,
    s2: Subspace<T>,
}

/// One accepted pair and the number of proposals it took.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedDraw<T: Real> {
    pub a: DVector<T>,
    pub b: DVector<T>,
    pub attempts: usize,
}

impl<T: Real> ConditionedPairSampler<T> {
    pub fn new(s1: Subspace<T>, s2: Subspace<T>) -> Result<Self> {
        let angles = principal_angles(&s1, &s2)?;
        if s1.dim() != s2.dim() {
            return Err(Error::AssumptionViolation(format!(
                "subspace dimensions differ: {} vs {}",
                s1.dim(),
                s2.dim()
            )));
        }
        if !(angles.min() > T::zero()) {
            return Err(Error::AssumptionViolation(
                "subspaces intersect (smallest principal angle is 0)".into(),
            ));
        }
        Ok(Self { s1, s2 })
    }

    pub fn dim(&self) -> usize {
        self.s1.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.s1.ambient_dim()
    }

    pub fn subspaces(&self) -> (&Subspace<T>, &Subspace<T>) {
        (&self.s1, &self.s2)
    }

    /// One proposal `(U₁ᵀw, U₂ᵀw)` with `w ~ N(0, I_d)`; not conditioned.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (DVector<T>, DVector<T>) {
        let w = DVector::<T>::from_fn(self.ambient_dim(), |_, _| standard_normal(rng));
        (self.s1.coordinates(&w), self.s2.coordinates(&w))
    }

    /// Rejection sampling; pairs are never swapped.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ConditionedDraw<T>> {
        for attempts in 1..=MAX_CONSECUTIVE_REJECTIONS {
            let (a, b) = self.propose(rng);
            if a.norm_squared() > b.norm_squared() {
                return Ok(ConditionedDraw { a, b, attempts });
            }
        }
        Err(Error::PathologicalGeometry {
            rejections: MAX_CONSECUTIVE_REJECTIONS,
        })
    }
}

/// One statistic compared with its theoretical value or bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub statistic: String,
    pub estimate: f64,
    pub std_error: f64,
    pub theory: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes iff the mean lies within `SE_SLACK` standard errors of `theory`.
    pub fn close(statistic: impl Into<String>, acc: &MeanAccumulator, theory: f64) -> Self {
        let (estimate, std_error) = (acc.mean(), acc.std_error());
        Self {
            statistic: statistic.into(),
            estimate,
            std_error,
            theory: Some(theory),
            lower: None,
            upper: None,
            pass: (estimate - theory).abs() <= SE_SLACK * std_error,
        }
    }

    /// Passes iff the mean lies in `[lower − slack, upper + slack]`.
    pub fn bounded(
        statistic: impl Into<String>,
        acc: &MeanAccumulator,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        Self::interval(statistic, acc.mean(), acc.std_error(), lower, upper)
    }

    /// As [`Check::bounded`] for an estimate with a known standard error.
    pub fn interval(
        statistic: impl Into<String>,
        estimate: f64,
        std_error: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        let slack = SE_SLACK * std_error;
        let pass = lower.is_none_or(|lo| estimate >= lo - slack)
            && upper.is_none_or(|hi| estimate <= hi + slack);
        Self {
            statistic: statistic.into(),
            estimate,
            std_error,
            theory: None,
            lower,
            upper,
            pass,
        }
    }

    /// Deterministic quantity compared with `theory` at absolute tolerance `tol`.
    pub fn exact(statistic: impl Into<String>, estimate: f64, theory: f64, tol: f64) -> Self {
        Self {
            statistic: statistic.into(),
            estimate,
            std_error: 0.0,
            theory: Some(theory),
            lower: None,
            upper: Some(theory + tol),
            pass: (estimate - theory).abs() <= tol,
        }
    }
}

/// Outcome of one verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub name: String,
    pub samples: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl LemmaReport {
    fn new(name: &str, samples: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            name: name.to_string(),
            samples,
            checks,
            pass,
        }
    }

    pub fn check(&self, statistic: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.statistic == statistic)
    }
}

/// Runs `f(rng, count)` over chunks of `n` samples and returns the chunk
/// results in chunk order.
fn chunked<A, F>(n: usize, seed: u64, tag: u64, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut StreamRng, usize) -> Result<A> + Sync,
{
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n - c * CHUNK);
            f(&mut stream(seed, &[tag, c as u64]), count)
        })
        .collect()
}

/// Element-wise merge of per-chunk accumulator vectors.
fn merge_chunks(parts: Vec<Vec<MeanAccumulator>>) -> Vec<MeanAccumulator> {
    let mut it = parts.into_iter();
    let mut total = it.next().unwrap_or_default();
    for part in it {
        for (t, p) in total.iter_mut().zip(&part) {
            t.merge(p);
        }
    }
    total
}

fn require_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

fn f64_sampler(s1: &Subspace<f64>, s2: &Subspace<f64>) -> Result<ConditionedPairSampler<f64>> {
    ConditionedPairSampler::new(s1.clone(), s2.clone())
}

/// `E[max(X,Y)] − m` for independent `X, Y ~ χ²_m`, i.e. `(2/√π)·Γ((m+1)/2)/Γ(m/2)`.
///
/// Evaluated through `c(m+2) = c(m)·(m+1)/m` from `c(1) = 2/π`, `c(2) = 1`,
/// so even `m` give exact rationals.
pub fn order_statistic_gap(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain(
            "degrees of freedom must be at least 1".into(),
        ));
    }
    let (mut k, mut c) = if m.is_multiple_of(2) {
        (2usize, 1.0)
    } else {
        (1usize, 2.0 / std::f64::consts::PI)
    };
    while k < m {
        c *= (k + 1) as f64 / k as f64;
        k += 2;
    }
    Ok(c)
}

/// Means of `max(X,Y)` and `min(X,Y)` for `X, Y ~ χ²_m` against `m ± gap`.
pub fn verify_order_statistics(m: usize, n_samples: usize, seed: u64) -> Result<LemmaReport> {
    require_samples(n_samples)?;
    let gap = order_statistic_gap(m)?;
    let parts = chunked(n_samples, seed, TAG_ORDER, |rng, count| {
        let mut acc = vec![MeanAccumulator::new(); 2];
        let mut worst = 0.0f64;
        for _ in 0..count {
            let x: f64 = (0..m)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal).powi(2))
                .sum();
            let y: f64 = (0..m)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal).powi(2))
                .sum();
            let (hi, lo) = (x.max(y), x.min(y));
            acc[0].push(hi);
            acc[1].push(lo);
            worst = worst.max(((hi + lo) - (x + y)).abs());
        }
        Ok((acc, worst))
    })?;
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let acc = merge_chunks(parts.into_iter().map(|p| p.0).collect());
    let mf = m as f64;
    let checks = vec![
        Check::close("mean_max", &acc[0], mf + gap),
        Check::close("mean_min", &acc[1], mf - gap),
        Check::exact("max_plus_min_minus_sum", worst, 0.0, 0.0),
    ];
    Ok(LemmaReport::new(
        "order_statistics",
        n_samples as u64,
        checks,
    ))
}

/// First and second moments of the conditioned pair against isotropy.
pub fn verify_isotropy(
    s1: &Subspace<f64>,
    s2: &Subspace<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    require_samples(n_samples)?;
    let sampler = f64_sampler(s1, s2)?;
    let r = sampler.dim();
    // Per vector: r means, r(r+1)/2 second moments (upper triangle, row by row).
    let per = r + r * (r + 1) / 2;
    let parts = chunked(n_samples, seed, TAG_ISOTROPY, |rng, count| {
        let mut acc = vec![MeanAccumulator::new(); 2 * per];
        for _ in 0..count {
            let draw = sampler.sample(rng)?;
            for (v, base) in [(&draw.a, 0), (&draw.b, per)] {
                for i in 0..r {
                    acc[base + i].push(v[i]);
                }
                let mut idx = base + r;
                for i in 0..r {
                    for j in i..r {
                        acc[idx].push(v[i] * v[j]);
                        idx += 1;
                    }
                }
            }
        }
        Ok(acc)
    })?;
    let acc = merge_chunks(parts);
    let mut checks = Vec::new();
    for (name, base) in [("a", 0), ("b", per)] {
        for i in 0..r {
            checks.push(Check::close(
                format!("mean_{name}[{i}]"),
                &acc[base + i],
                0.0,
            ));
        }
        let mut diag = Vec::new();
        let mut idx = base + r;
        for i in 0..r {
            for j in i..r {
                if i == j {
                    diag.push(idx);
                } else {
                    checks.push(Check::close(
                        format!("second_{name}[{i},{j}]"),
                        &acc[idx],
                        0.0,
                    ));
                }
                idx += 1;
            }
        }
        let avg = diag.iter().map(|&k| acc[k].mean()).sum::<f64>() / r as f64;
        for (i, &k) in diag.iter().enumerate() {
            checks.push(Check::close(
                format!("second_{name}[{i},{i}]"),
                &acc[k],
                avg,
            ));
        }
    }
    Ok(LemmaReport::new("isotropy", n_samples as u64, checks))
}

/// `tr E[aaᵀ]/r ∈ [1+γ₁, 1+γ₂]` and `tr E[bbᵀ]/r ∈ [1−γ₂, 1−γ₁]`.
pub fn verify_sandwich(
    s1: &Subspace<f64>,
    s2: &Subspace<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    require_samples(n_samples)?;
    let sampler = f64_sampler(s1, s2)?;
    let r = sampler.dim();
    let theta = principal_angles(s1, s2)?;
    let (g1, g2) = (gamma1(r, theta.min()), gamma2(r, theta.angles()));
    let rf = r as f64;
    let parts = chunked(n_samples, seed, TAG_SANDWICH, |rng, count| {
        let mut acc = vec![MeanAccumulator::new(); 3];
        for _ in 0..count {
            let draw = sampler.sample(rng)?;
            let (na, nb) = (draw.a.norm_squared() / rf, draw.b.norm_squared() / rf);
            acc[0].push(na);
            acc[1].push(nb);
            acc[2].push(na + nb);
        }
        Ok(acc)
    })?;
    let acc = merge_chunks(parts);
    let checks = vec![
        Check::bounded("trace_a_over_r", &acc[0], Some(1.0 + g1), Some(1.0 + g2)),
        Check::bounded("trace_b_over_r", &acc[1], Some(1.0 - g2), Some(1.0 - g1)),
        Check::close("trace_sum_over_r", &acc[2], 2.0),
    ];
    Ok(LemmaReport::new("sandwich", n_samples as u64, checks))
}

/// `E[‖a‖^{2p}] ≤ p!(2r)^p` and the same for `b`, for `p = 2..=p_max`.
pub fn verify_bernstein_moments(
    s1: &Subspace<f64>,
    s2: &Subspace<f64>,
    p_max: u32,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if !(2..=4).contains(&p_max) {
        return Err(Error::Domain(format!(
            "p_max must be in 2..=4, got {p_max}"
        )));
    }
    require_samples(n_samples)?;
    let sampler = f64_sampler(s1, s2)?;
    let r = sampler.dim();
    let orders: Vec<u32> = (2..=p_max).collect();
    let parts = chunked(n_samples, seed, TAG_BERNSTEIN, |rng, count| {
        let mut acc = vec![MeanAccumulator::new(); 2 * orders.len()];
        for _ in 0..count {
            let draw = sampler.sample(rng)?;
            let (na, nb) = (draw.a.norm_squared(), draw.b.norm_squared());
            for (i, &p) in orders.iter().enumerate() {
                acc[2 * i].push(na.powi(p as i32));
                acc[2 * i + 1].push(nb.powi(p as i32));
            }
        }
        Ok(acc)
    })?;
    let acc = merge_chunks(parts);
    let mut checks = Vec::new();
    for (i, &p) in orders.iter().enumerate() {
        let factorial: f64 = (1..=p).map(f64::from).product();
        let bound = factorial * (2.0 * r as f64).powi(p as i32);
        checks.push(Check::bounded(
            format!("moment_a_p{p}"),
            &acc[2 * i],
            None,
            Some(bound),
        ));
        checks.push(Check::bounded(
            format!("moment_b_p{p}"),
            &acc[2 * i + 1],
            None,
            Some(bound),
        ));
    }
    Ok(LemmaReport::new("bernstein", n_samples as u64, checks))
}

/// Fraction of accepted proposals, which is `1/2` by symmetry.
pub fn verify_acceptance_rate(
    s1: &Subspace<f64>,
    s2: &Subspace<f64>,
    n_attempts: usize,
    seed: u64,
) -> Result<LemmaReport> {
    require_samples(n_attempts)?;
    let sampler = f64_sampler(s1, s2)?;
    let parts = chunked(n_attempts, seed, TAG_ACCEPTANCE, |rng, count| {
        let mut acc = vec![MeanAccumulator::new()];
        for _ in 0..count {
            let (a, b) = sampler.propose(rng);
            acc[0].push(if a.norm_squared() > b.norm_squared() {
                1.0
            } else {
                0.0
            });
        }
        Ok(acc)
    })?;
    let acc = merge_chunks(parts);
    let checks = vec![Check::close("acceptance_rate", &acc[0], 0.5)];
    Ok(LemmaReport::new(
        "acceptance_rate",
        n_attempts as u64,
        checks,
    ))
}

/// Sorted spectrum of `U₁U₁ᵀ − U₂U₂ᵀ` against `{±sin θ} ∪ {0}` over random pairs.
pub fn verify_projection_spectrum(
    d: usize,
    r: usize,
    pairs: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if pairs == 0 {
        return Err(Error::Domain("need at least one pair".into()));
    }
    let deviations: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[TAG_SPECTRUM, i as u64]);
            let s1 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
            let s2 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
            let spectrum = projection_difference_spectrum(&s1, &s2)?;
            let expected = expected_spectrum(d, &principal_angles(&s1, &s2)?.sines());
            Ok(spectrum
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let mut mean_dev = MeanAccumulator::new();
    deviations.iter().for_each(|&x| mean_dev.push(x));
    let max_dev = deviations.iter().copied().fold(0.0, f64::max);
    let checks = vec![
        Check::exact("max_abs_deviation", max_dev, 0.0, SPECTRUM_TOL),
        Check::interval(
            "mean_abs_deviation",
            mean_dev.mean(),
            0.0,
            None,
            Some(SPECTRUM_TOL),
        ),
    ];
    Ok(LemmaReport::new(
        "projection_spectrum",
        pairs as u64,
        checks,
    ))
}

/// `{±sin θ} ∪ {0}^{d−2r}` in descending order.
pub fn expected_spectrum(d: usize, sines: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = sines.iter().flat_map(|&s| [s, -s]).collect();
    out.resize(d.max(out.len()), 0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Outcome of one failure-probability trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureTrial {
    pub theta_min: f64,
    pub width: usize,
    pub separable: bool,
}

/// Trials at the width `⌈min_width / divisor⌉` computed from each trial's own angles.
pub fn failure_trials(
    d: usize,
    r: usize,
    delta: f64,
    trials: usize,
    width_divisor: f64,
    seed: u64,
) -> Result<Vec<FailureTrial>> {
    if !(width_divisor >= 1.0) || !width_divisor.is_finite() {
        return Err(Error::Domain(format!(
            "width divisor must be ≥ 1, got {width_divisor}"
        )));
    }
    if 2 * r > d {
        return Err(Error::AssumptionViolation(format!(
            "need 2r ≤ d, got r={r}, d={d}"
        )));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, &[TAG_FAILURE, t as u64]);
            let s1 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
            let s2 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
            let theta = principal_angles(&s1, &s2)?;
            let report = width_bound_binary(r, theta.angles(), delta)?;
            let width = ((report.min_width as f64 / width_divisor).ceil() as usize).max(1);
            if width > MAX_STREAMED_WIDTH {
                return Err(Error::TooCostly {
                    width,
                    max: MAX_STREAMED_WIDTH,
                });
            }
            // Rows drawn exactly as `sample_feature_map` would draw `W`.
            let mut acc = QuadraticFormAccumulator::new(&s1, &s2);
            let mut w = vec![0.0; d];
            for _ in 0..width {
                w.iter_mut()
                    .for_each(|x| *x = standard_normal::<f64, _>(&mut rng));
                acc.push_row(&w);
            }
            Ok(FailureTrial {
                theta_min: theta.min(),
                width,
                separable: acc.finish(DEFAULT_REL_TOL).separable,
            })
        })
        .collect()
}

/// Empirical failure fraction at the width bound against `δ + 3·√(δ(1−δ)/trials)`.
pub fn verify_failure_bound(
    d: usize,
    r: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    verify_failure_bound_scaled(d, r, delta, trials, 1.0, seed)
}

/// As [`verify_failure_bound`] at `⌈min_width / width_divisor⌉`.
pub fn verify_failure_bound_scaled(
    d: usize,
    r: usize,
    delta: f64,
    trials: usize,
    width_divisor: f64,
    seed: u64,
) -> Result<LemmaReport> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let outcomes = failure_trials(d, r, delta, trials, width_divisor, seed)?;
    let failures = outcomes.iter().filter(|t| !t.separable).count();
    let fraction = failures as f64 / trials as f64;
    let se = (delta * (1.0 - delta) / trials as f64).sqrt();
    let checks = vec![Check::interval(
        "failure_fraction",
        fraction,
        se,
        None,
        Some(delta),
    )];
    Ok(LemmaReport::new("failure_bound", trials as u64, checks))
}

/// `E[x xᵀ]` estimate from the rows of `samples`.
pub fn second_moment(samples: &DMatrix<f64>) -> DMatrix<f64> {
    samples.transpose() * samples / samples.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify_binary;
    use crate::features::{sample_feature_map, Activation};

    fn lines() -> (Subspace<f64>, Subspace<f64>) {
        (
            Subspace::line(&[1.0, 0.0]).unwrap(),
            Subspace::line(&[0.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn sampler_rejects_intersecting_pair() {
        let s = Subspace::line(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            ConditionedPairSampler::new(s.clone(), s),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn accepted_pairs_satisfy_condition() {
        let (s1, s2) = lines();
        let sampler = ConditionedPairSampler::new(s1, s2).unwrap();
        let mut rng = stream(0, &[]);
        for _ in 0..1000 {
            let draw = sampler.sample(&mut rng).unwrap();
            assert!(draw.a.norm_squared() > draw.b.norm_squared());
            assert!(draw.attempts >= 1);
        }
    }

    #[test]
    fn orthogonal_lines_give_coordinate_order_statistics() {
        let (s1, s2) = lines();
        let sampler = ConditionedPairSampler::new(s1, s2).unwrap();
        let mut a = stream(5, &[]);
        let mut b = stream(5, &[]);
        let draw = sampler.sample(&mut a).unwrap();
        let mut w = (0.0, 0.0);
        for _ in 0..draw.attempts {
            w = (
                standard_normal::<f64, _>(&mut b),
                standard_normal::<f64, _>(&mut b),
            );
        }
        assert_eq!((draw.a[0], draw.b[0]), w);
    }

    #[test]
    fn gap_closed_forms() {
        assert_eq!(order_statistic_gap(4).unwrap() + 4.0, 5.5);
        assert_eq!(order_statistic_gap(2).unwrap() + 2.0, 3.0);
        for m in 1..30 {
            let mf = m as f64;
            let oracle = 2.0 / std::f64::consts::PI.sqrt()
                * (libm::lgamma((mf + 1.0) / 2.0) - libm::lgamma(mf / 2.0)).exp();
            assert!((order_statistic_gap(m).unwrap() - oracle).abs() < 1e-12 * oracle);
        }
        assert!(order_statistic_gap(0).is_err());
    }

    #[test]
    fn order_statistics_report() {
        let rep = verify_order_statistics(4, 50_000, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.check("max_plus_min_minus_sum").unwrap().estimate, 0.0);
        assert_eq!(rep.check("mean_max").unwrap().theory, Some(5.5));
    }

    #[test]
    fn reports_are_reproducible() {
        let (s1, s2) = lines();
        assert_eq!(
            verify_sandwich(&s1, &s2, 20_000, 9).unwrap(),
            verify_sandwich(&s1, &s2, 20_000, 9).unwrap()
        );
        assert_ne!(
            verify_sandwich(&s1, &s2, 20_000, 9).unwrap(),
            verify_sandwich(&s1, &s2, 20_000, 10).unwrap()
        );
    }

    #[test]
    fn scalar_isotropy_has_no_off_diagonals() {
        let (s1, s2) = lines();
        let rep = verify_isotropy(&s1, &s2, 20_000, 2).unwrap();
        assert!(rep
            .checks
            .iter()
            .all(|c| !c.statistic.contains(',') || c.statistic.ends_with("[0,0]")));
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn bernstein_rejects_large_orders() {
        let (s1, s2) = lines();
        assert!(verify_bernstein_moments(&s1, &s2, 5, 100, 0).is_err());
        assert!(verify_bernstein_moments(&s1, &s2, 1, 100, 0).is_err());
    }

    #[test]
    fn expected_spectrum_layout() {
        assert_eq!(
            expected_spectrum(5, &[0.5, 1.0]),
            vec![1.0, 0.5, 0.0, -0.5, -1.0]
        );
    }

    #[test]
    fn projection_spectrum_report() {
        let rep = verify_projection_spectrum(10, 3, 10, 4).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn streamed_trial_matches_materialized_map() {
        let trial = &failure_trials(6, 1, 0.5, 1, 4.0, 11).unwrap()[0];
        let mut rng = stream(11, &[TAG_FAILURE, 0]);
        let s1 = sample_stiefel::<f64, _>(6, 1, &mut rng).unwrap();
        let s2 = sample_stiefel::<f64, _>(6, 1, &mut rng).unwrap();
        let map = sample_feature_map(
            trial.width as usize,
            6,
            Activation::Quadratic,
            1.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(
            certify_binary(&map, &s1, &s2).unwrap().separable,
            trial.separable
        );
    }

    #[test]
    fn conservative_bound_at_large_delta() {
        let rep = verify_failure_bound(4, 1, 0.5, 20, 3).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
