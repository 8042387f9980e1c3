use std::io::Write;

use rayon::prelude::*;
use subsep::rng::stream;
use subsep::verify::{self, LemmaReport};
use subsep::{
    accuracy, certify_binary, certify_multiclass, generate_uos_dataset, principal_angles,
    sample_feature_map, sample_stiefel, train_probe, train_probe_traced, width_bound_binary,
    width_bound_multiclass, Activation, UnionOfSubspaces,
};

use crate::angles::AngleSpec;
use crate::{BoundArgs, CertifyArgs, CliError, PhaseArgs, ProbeArgs, SweepArgs, VerifyArgs};

pub const SWEEP_HEADER: [&str; 11] = [
    "d",
    "r",
    "D",
    "K",
    "activation",
    "trials",
    "successes",
    "fraction",
    "mean_train_acc",
    "mean_test_acc",
    "seed",
];

const STREAM_MODEL: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_TEST: u64 = 2;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn require_nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(usage(format!("--{name} needs at least one value")));
    }
    Ok(())
}

fn require_positive(name: &str, v: &[usize]) -> Result<(), CliError> {
    require_nonempty(name, v)?;
    if v.contains(&0) {
        return Err(usage(format!("--{name} values must be positive")));
    }
    Ok(())
}

fn require_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    Ok(())
}

pub fn bound(a: &BoundArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.r == 0 {
        return Err(usage("--r must be positive"));
    }
    if a.k < 2 {
        return Err(usage("--K must be at least 2"));
    }
    let spec = AngleSpec::parse(&a.theta)?;
    let report = if a.k == 2 {
        width_bound_binary(a.r, &spec.expand(a.r)?, a.delta)?
    } else {
        let theta = spec.expand((a.k - 1) * a.r)?;
        width_bound_multiclass(a.r, a.k, &vec![theta; a.k], a.delta)?
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "r",
        "K",
        "delta",
        "theta_min",
        "gamma1",
        "gamma2",
        "min_width",
    ])?;
    w.write_record([
        a.r.to_string(),
        a.k.to_string(),
        a.delta.to_string(),
        report.theta_min().to_string(),
        report.gamma1.to_string(),
        report.gamma2.to_string(),
        report.min_width.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// One aggregated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub r: usize,
    pub width: usize,
    pub k: usize,
    pub activation: Activation,
    pub trials: usize,
    pub successes: usize,
    pub mean_train_acc: Option<f64>,
    pub mean_test_acc: Option<f64>,
    pub seed: u64,
}

impl SweepRow {
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    fn record(&self) -> [String; 11] {
        [
            self.d.to_string(),
            self.r.to_string(),
            self.width.to_string(),
            self.k.to_string(),
            self.activation.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            self.fraction().to_string(),
            opt(self.mean_train_acc),
            opt(self.mean_test_acc),
            self.seed.to_string(),
        ]
    }
}

fn write_sweep(rows: &[SweepRow], out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `trial(cell, t)` for every cell and trial in parallel; results come
/// back grouped by cell, trials in order.
fn run_grid<C, A, F>(cells: &[C], trials: usize, trial: F) -> Result<Vec<Vec<A>>, CliError>
where
    C: Sync,
    A: Send,
    F: Fn(usize, &C, usize) -> Result<A, CliError> + Sync,
{
    let flat: Vec<A> = (0..cells.len() * trials)
        .into_par_iter()
        .map(|j| trial(j / trials, &cells[j / trials], j % trials))
        .collect::<Result<_, _>>()?;
    let mut grouped: Vec<Vec<A>> = Vec::with_capacity(cells.len());
    let mut it = flat.into_iter();
    for _ in cells {
        grouped.push(it.by_ref().take(trials).collect());
    }
    Ok(grouped)
}

/// Certified-separable counts for every `(d, r, D)` cell, row-major.
pub fn phase_rows(a: &PhaseArgs, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    require_positive("d", &a.d)?;
    require_positive("r", &a.r)?;
    require_positive("D", &a.width)?;
    require_trials(a.trials)?;
    for &d in &a.d {
        for &r in &a.r {
            if r > d {
                return Err(usage(format!("r={r} exceeds d={d}")));
            }
        }
    }
    let mut cells = Vec::new();
    for &d in &a.d {
        for &r in &a.r {
            for &width in &a.width {
                cells.push((d, r, width));
            }
        }
    }
    let outcomes = run_grid(&cells, a.trials, |c, &(d, r, width), t| {
        let mut rng = stream(seed, &[c as u64, t as u64]);
        let s1 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
        let s2 = sample_stiefel::<f64, _>(d, r, &mut rng)?;
        let map = sample_feature_map(width, d, Activation::Quadratic, 1.0, &mut rng)?;
        Ok(certify_binary(&map, &s1, &s2)?.separable)
    })?;
    Ok(cells
        .iter()
        .zip(outcomes)
        .map(|(&(d, r, width), ok)| SweepRow {
            d,
            r,
            width,
            k: 2,
            activation: Activation::Quadratic,
            trials: a.trials,
            successes: ok.iter().filter(|&&s| s).count(),
            mean_train_acc: None,
            mean_test_acc: None,
            seed,
        })
        .collect())
}

pub fn phase(a: &PhaseArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    write_sweep(&phase_rows(a, seed)?, out)
}

/// Train/test accuracy for every `(d, r, D, K, activation)` cell, row-major.
///
/// A trial succeeds when the probe classifies the whole training set.
pub fn sweep_rows(a: &SweepArgs, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    require_positive("d", &a.d)?;
    require_positive("r", &a.r)?;
    require_positive("D", &a.width)?;
    require_nonempty("K", &a.k)?;
    require_nonempty("activations", &a.activations)?;
    require_trials(a.trials)?;
    if a.k.iter().any(|&k| k < 2) {
        return Err(usage("--K values must be at least 2"));
    }
    if a.n_per_class == 0 {
        return Err(usage("--n-per-class must be at least 1"));
    }
    for act in &a.activations {
        act.validate()?;
    }
    let mut cells = Vec::new();
    for &d in &a.d {
        for &r in &a.r {
            if r > d {
                return Err(usage(format!("r={r} exceeds d={d}")));
            }
            for &width in &a.width {
                for &k in &a.k {
                    for act in &a.activations {
                        cells.push((d, r, width, k, *act));
                    }
                }
            }
        }
    }
    let outcomes = run_grid(&cells, a.trials, |c, &(d, r, width, k, act), t| {
        let path = |s: u64| [c as u64, t as u64, s];
        let mut rng = stream(seed, &path(STREAM_MODEL));
        let union = UnionOfSubspaces::<f64>::sample(k, d, r, &mut rng)?;
        let map = sample_feature_map(width, d, act, a.weight_std, &mut rng)?;
        let train = generate_uos_dataset(
            &union,
            a.n_per_class,
            &mut stream(seed, &path(STREAM_TRAIN)),
        )?
        .map_features(&map)?;
        let test =
            generate_uos_dataset(&union, a.n_per_class, &mut stream(seed, &path(STREAM_TEST)))?
                .map_features(&map)?;
        let probe = train_probe(&train, a.epochs, a.lr)?;
        Ok((accuracy(&probe, &train)?, accuracy(&probe, &test)?))
    })?;
    Ok(cells
        .iter()
        .zip(outcomes)
        .map(|(&(d, r, width, k, activation), accs)| {
            let n = accs.len() as f64;
            SweepRow {
                d,
                r,
                width,
                k,
                activation,
                trials: a.trials,
                successes: accs.iter().filter(|(tr, _)| *tr == 1.0).count(),
                mean_train_acc: Some(accs.iter().map(|p| p.0).sum::<f64>() / n),
                mean_test_acc: Some(accs.iter().map(|p| p.1).sum::<f64>() / n),
                seed,
            }
        })
        .collect())
}

pub fn sweep(a: &SweepArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    write_sweep(&sweep_rows(a, seed)?, out)
}

pub fn certify(a: &CertifyArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    if a.r == 0 || a.d == 0 || a.width == 0 {
        return Err(usage("--d, --r and --D must be positive"));
    }
    if a.k < 2 {
        return Err(usage("--K must be at least 2"));
    }
    if a.r > a.d {
        return Err(usage(format!("r={} exceeds d={}", a.r, a.d)));
    }
    let mut rng = stream(seed, &[STREAM_MODEL]);
    let union = UnionOfSubspaces::<f64>::sample(a.k, a.d, a.r, &mut rng)?;
    let map = sample_feature_map(a.width, a.d, Activation::Quadratic, 1.0, &mut rng)?;
    let rows: Vec<(usize, f64, f64, f64, bool)> = if a.k == 2 {
        let [s1, s2] = union.members() else {
            unreachable!()
        };
        let theta_min = principal_angles(s1, s2)?.min();
        [(s1, s2), (s2, s1)]
            .iter()
            .enumerate()
            .map(|(class, (p, n))| {
                let c = certify_binary(&map, p, n)?;
                Ok((
                    class,
                    theta_min,
                    c.lambda_min_q1,
                    c.lambda_max_q2,
                    c.separable,
                ))
            })
            .collect::<Result<_, CliError>>()?
    } else {
        certify_multiclass(&map, &union, &mut rng)?
            .into_iter()
            .map(|c| {
                let cert = c.certificate;
                (
                    c.class,
                    c.angles.min(),
                    cert.lambda_min_q1,
                    cert.lambda_max_q2,
                    cert.separable,
                )
            })
            .collect()
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "d",
        "r",
        "D",
        "K",
        "seed",
        "theta_min",
        "lambda_min_q1",
        "lambda_max_q2",
        "separable",
    ])?;
    for (class, theta_min, lo, hi, sep) in rows {
        w.write_record([
            class.to_string(),
            a.d.to_string(),
            a.r.to_string(),
            a.width.to_string(),
            a.k.to_string(),
            seed.to_string(),
            theta_min.to_string(),
            lo.to_string(),
            hi.to_string(),
            sep.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn probe(a: &ProbeArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    if a.r == 0 || a.d == 0 || a.width == 0 || a.n_per_class == 0 {
        return Err(usage("--d, --r, --D and --n-per-class must be positive"));
    }
    if a.k < 2 {
        return Err(usage("--K must be at least 2"));
    }
    if a.r > a.d {
        return Err(usage(format!("r={} exceeds d={}", a.r, a.d)));
    }
    a.activation.validate()?;
    let mut rng = stream(seed, &[STREAM_MODEL]);
    let union = UnionOfSubspaces::<f64>::sample(a.k, a.d, a.r, &mut rng)?;
    let map = sample_feature_map(a.width, a.d, a.activation, a.weight_std, &mut rng)?;
    let train = generate_uos_dataset(&union, a.n_per_class, &mut stream(seed, &[STREAM_TRAIN]))?
        .map_features(&map)?;
    let test = generate_uos_dataset(&union, a.n_per_class, &mut stream(seed, &[STREAM_TEST]))?
        .map_features(&map)?;
    let mut trace = Vec::with_capacity(a.epochs + 1);
    train_probe_traced(&train, a.epochs, a.lr, |epoch, p, loss| {
        trace.push((epoch, loss, accuracy(p, &train), accuracy(p, &test)));
    })?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "loss", "train_accuracy", "test_accuracy"])?;
    for (epoch, loss, tr, te) in trace {
        w.write_record([
            epoch.to_string(),
            loss.to_string(),
            tr?.to_string(),
            te?.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

const LEMMAS: [&str; 7] = [
    "order",
    "isotropy",
    "sandwich",
    "bernstein",
    "acceptance",
    "spectrum",
    "failure",
];

pub fn verify_lemmas(a: &VerifyArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = a
        .which
        .iter()
        .find(|n| *n != "all" && !LEMMAS.contains(&n.as_str()))
    {
        return Err(usage(format!(
            "unknown lemma `{n}`; expected one of {} or all",
            LEMMAS.join(", ")
        )));
    }
    let all = a.which.iter().any(|n| n == "all");
    // Canonical order regardless of how the list was given.
    let which = LEMMAS
        .iter()
        .filter(|l| all || a.which.iter().any(|n| n == *l));
    if a.r == 0 || 2 * a.r > a.d {
        return Err(usage(format!(
            "need 1 ≤ r and 2r ≤ d, got r={}, d={}",
            a.r, a.d
        )));
    }
    let pair = || -> Result<_, CliError> {
        let mut rng = stream(seed, &[STREAM_MODEL]);
        Ok((
            sample_stiefel::<f64, _>(a.d, a.r, &mut rng)?,
            sample_stiefel::<f64, _>(a.d, a.r, &mut rng)?,
        ))
    };
    let mut reports: Vec<LemmaReport> = Vec::new();
    for &lemma in which {
        match lemma {
            "order" => {
                for &m in &a.m {
                    let mut rep = verify::verify_order_statistics(m, a.samples, seed)?;
                    rep.name = format!("order_statistics_m{m}");
                    reports.push(rep);
                }
            }
            "isotropy" => {
                let (s1, s2) = pair()?;
                reports.push(verify::verify_isotropy(&s1, &s2, a.samples, seed)?);
            }
            "sandwich" => {
                let (s1, s2) = pair()?;
                reports.push(verify::verify_sandwich(&s1, &s2, a.samples, seed)?);
            }
            "bernstein" => {
                let (s1, s2) = pair()?;
                reports.push(verify::verify_bernstein_moments(
                    &s1, &s2, a.p_max, a.samples, seed,
                )?);
            }
            "acceptance" => {
                let (s1, s2) = pair()?;
                reports.push(verify::verify_acceptance_rate(&s1, &s2, a.samples, seed)?);
            }
            "spectrum" => {
                reports.push(verify::verify_projection_spectrum(a.d, a.r, a.pairs, seed)?)
            }
            "failure" => reports.push(verify::verify_failure_bound_scaled(
                a.d,
                a.r,
                a.delta,
                a.trials,
                a.width_divisor,
                seed,
            )?),
            _ => unreachable!(),
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lemma",
        "statistic",
        "estimate",
        "std_error",
        "theory",
        "lower",
        "upper",
        "samples",
        "pass",
    ])?;
    for rep in &reports {
        for c in &rep.checks {
            w.write_record([
                rep.name.clone(),
                c.statistic.clone(),
                c.estimate.to_string(),
                c.std_error.to_string(),
                opt(c.theory),
                opt(c.lower),
                opt(c.upper),
                rep.samples.to_string(),
                c.pass.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
