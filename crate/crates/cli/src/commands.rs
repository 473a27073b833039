use rayon::prelude::*;

use fpp_core::acceptance::Suite;
use fpp_core::exact_laws::{expected_slow_count, stein_chen_bound};
use fpp_core::limit::{
    sample_d_array, sample_xi_batch, tail_q_direct, tail_q_lower_bound, tail_q_product,
    xi_moments_from_samples, XiSample, DEFAULT_PAIR_CAP,
};
use fpp_core::mean_field::{
    diameter_candidate, diameter_exact, flooding, geodesic, hopcount_stats,
    joint_distance_experiment, sample_slow_count, smallest_weight_tree, DiameterResult,
};
use fpp_core::rng::{EdgeWeightOracle, EdgeWeights, RandomSource, RandomStream, WeightTable};
use fpp_core::stats::{
    ks_against_cdf, ks_two_sample, normal_cdf, poisson_pmf, tv_integer, tv_standard_error,
    EmpiricalDistribution, IntegerHistogram,
};
use fpp_core::{Error, Result};

use crate::config::{ExperimentConfig, ModeArg};
use crate::output::{number, Cell, Outcome};

/// Largest graph that is materialized as a dense weight table.
const MATERIALIZE_LIMIT: usize = 2000;
/// Size of the limit-law reference samples used in summaries.
const REFERENCE_DRAWS: usize = 10_000;

pub fn run(name: &str, config: &ExperimentConfig) -> Result<Outcome> {
    match name {
        "two-point" => two_point(config),
        "flooding" => flooding_cmd(config),
        "diameter" => diameter(config),
        "hopcount" => hopcount(config),
        "joint" => joint(config),
        "poisson-check" => poisson_check(config),
        "xi" => xi(config),
        "q-tail" => q_tail(config),
        "moments" => moments(config),
        "verify" => verify(config),
        other => unreachable!("unknown subcommand {other}"),
    }
}

/// Replicate `r` always uses `RandomStream::new(seed).derive(r)`, whatever the scheduling.
fn replicates<T: Send>(
    config: &ExperimentConfig,
    f: impl Fn(RandomStream) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let root = RandomStream::new(config.seed);
    (0..config.replicates)
        .into_par_iter()
        .map(|r| f(root.derive(r as u64)))
        .collect()
}

/// Stream for auxiliary draws (reference samples, bootstraps), disjoint from the replicates.
fn auxiliary(config: &ExperimentConfig, label: u64) -> RandomStream {
    RandomStream::new(config.seed)
        .derive(u64::MAX)
        .derive(label)
}

fn summarize(outcome: &mut Outcome, values: &[f64]) -> Result<()> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Ok(());
    }
    let dist = EmpiricalDistribution::new(finite)?;
    outcome.float("mean", dist.mean());
    outcome.float(
        "variance",
        if dist.count() > 1 {
            dist.variance()
        } else {
            0.0
        },
    );
    outcome.float("median", dist.quantile(0.5));
    outcome.float("min", dist.min());
    outcome.float("max", dist.max());
    Ok(())
}

fn oracle(n: usize, stream: RandomStream) -> Result<EdgeWeightOracle> {
    EdgeWeightOracle::new(n, stream)
}

fn d2_reference(config: &ExperimentConfig) -> Result<EmpiricalDistribution> {
    let stream = auxiliary(config, 0);
    let draws: Result<Vec<f64>> = (0..REFERENCE_DRAWS)
        .into_par_iter()
        .map(|r| Ok(sample_d_array(&mut stream.derive(r as u64), 2)?[0]))
        .collect();
    EmpiricalDistribution::new(draws?)
}

fn two_point(config: &ExperimentConfig) -> Result<Outcome> {
    let n = config.n;
    let log_n = (n as f64).ln();
    let values = replicates(config, |r| Ok(geodesic(&oracle(n, r)?, 0, 1)?.distance))?;
    let mut out = Outcome::new(&["replicate", "value", "recentered"]);
    let recentered: Vec<f64> = values.iter().map(|v| v - log_n).collect();
    for (r, (v, c)) in values.iter().zip(&recentered).enumerate() {
        out.rows.push(vec![r.into(), (*v).into(), (*c).into()]);
    }
    summarize(&mut out, &recentered)?;
    let ks = ks_two_sample(
        &EmpiricalDistribution::from_slice(&recentered)?,
        &d2_reference(config)?,
    );
    out.float("ks_vs_limit", ks);
    out.lines.push(format!(
        "two-point n={n}: KS of d - log n vs limit law = {ks:.4}"
    ));
    Ok(out)
}

fn flooding_cmd(config: &ExperimentConfig) -> Result<Outcome> {
    let n = config.n;
    let log_n = (n as f64).ln();
    let values = replicates(config, |r| flooding(&oracle(n, r)?, 0))?;
    let mut out = Outcome::new(&["replicate", "value", "recentered"]);
    let recentered: Vec<f64> = values.iter().map(|v| v - 2.0 * log_n).collect();
    for (r, (v, c)) in values.iter().zip(&recentered).enumerate() {
        out.rows.push(vec![r.into(), (*v).into(), (*c).into()]);
    }
    summarize(&mut out, &recentered)?;
    let stream = auxiliary(config, 1);
    let reference: Vec<f64> = (0..REFERENCE_DRAWS)
        .map(|r| {
            let mut s = stream.derive(r as u64);
            s.gumbel() + s.gumbel()
        })
        .collect();
    let ks = ks_two_sample(
        &EmpiricalDistribution::from_slice(&recentered)?,
        &EmpiricalDistribution::new(reference)?,
    );
    out.float("ks_vs_limit", ks);
    out.lines.push(format!(
        "flooding n={n}: KS of flood - 2 log n vs limit law = {ks:.4}"
    ));
    Ok(out)
}

fn stable_xi(config: &ExperimentConfig, label: u64) -> Result<Vec<f64>> {
    Ok(sample_xi_batch(
        &auxiliary(config, label),
        REFERENCE_DRAWS,
        config.inner,
        config.outer,
    )?
    .into_iter()
    .filter(|x| x.stable)
    .map(|x| x.value)
    .collect())
}

fn diameter(config: &ExperimentConfig) -> Result<Outcome> {
    let n = config.n;
    let log_n = (n as f64).ln();
    if config.mode == ModeArg::Exact && n > config.budget {
        return Err(Error::BudgetExceeded(format!(
            "exact diameter on {n} vertices exceeds the budget of {}",
            config.budget
        )));
    }
    let one = |r: RandomStream| -> Result<DiameterResult> {
        let lazy = oracle(n, r)?;
        if n <= MATERIALIZE_LIMIT {
            diameter_of(&WeightTable::materialize(&lazy), config)
        } else {
            diameter_of(&lazy, config)
        }
    };
    let results = replicates(config, one)?;
    let mut out = Outcome::new(&[
        "replicate",
        "value",
        "recentered",
        "source_i",
        "source_j",
        "mode",
    ]);
    let recentered: Vec<f64> = results.iter().map(|d| d.value - 3.0 * log_n).collect();
    for (r, (d, c)) in results.iter().zip(&recentered).enumerate() {
        let mode = match config.mode {
            ModeArg::Exact => "exact",
            ModeArg::Candidate => "candidate",
        };
        out.rows.push(vec![
            r.into(),
            d.value.into(),
            (*c).into(),
            d.pair.0.into(),
            d.pair.1.into(),
            mode.into(),
        ]);
    }
    summarize(&mut out, &recentered)?;
    let ks = ks_two_sample(
        &EmpiricalDistribution::from_slice(&recentered)?,
        &EmpiricalDistribution::new(stable_xi(config, 2)?)?,
    );
    out.float("ks_vs_xi", ks);
    out.lines.push(format!(
        "diameter n={n}: KS of Diam - 3 log n vs Xi = {ks:.4}"
    ));
    Ok(out)
}

fn diameter_of<W: EdgeWeights>(weights: &W, config: &ExperimentConfig) -> Result<DiameterResult> {
    match config.mode {
        ModeArg::Exact => diameter_exact(weights, config.budget),
        ModeArg::Candidate => diameter_candidate(weights, config.candidates),
    }
}

fn hopcount(config: &ExperimentConfig) -> Result<Outcome> {
    let n = config.n;
    let log_n = (n as f64).ln();
    let stats = replicates(config, |r| {
        let tree = smallest_weight_tree(&oracle(n, r.derive(0))?, 0)?;
        hopcount_stats(&tree, &mut r.derive(1))
    })?;
    let mut out = Outcome::new(&["replicate", "typical_hop", "max_hop"]);
    for (r, h) in stats.iter().enumerate() {
        out.rows
            .push(vec![r.into(), h.typical_hop.into(), h.max_hop.into()]);
    }
    let z: Vec<f64> = stats
        .iter()
        .map(|h| (h.typical_hop as f64 - log_n) / log_n.sqrt())
        .collect();
    let typical: Vec<f64> = stats.iter().map(|h| h.typical_hop as f64).collect();
    let max_ratio: Vec<f64> = stats.iter().map(|h| h.max_hop as f64 / log_n).collect();
    summarize(&mut out, &typical)?;
    let ks = ks_against_cdf(&EmpiricalDistribution::new(z)?, normal_cdf)?;
    out.float("ks_clt", ks);
    out.float("mean_max_hop_over_log_n", fpp_core::stats::mean(&max_ratio));
    out.lines.push(format!(
        "hopcount n={n}: KS of standardized hopcount vs N(0,1) = {ks:.4}"
    ));
    Ok(out)
}

fn joint(config: &ExperimentConfig) -> Result<Outcome> {
    let (n, m) = (config.n, config.m);
    let results = replicates(config, |r| joint_distance_experiment(&oracle(n, r)?, m))?;
    let mut columns = vec!["replicate".to_string()];
    for a in 0..m {
        for b in (a + 1)..m {
            columns.push(format!("d_{a}_{b}"));
        }
    }
    columns.push("interior_hit".into());
    let mut out = Outcome::new(&[]);
    out.columns = columns;
    for (r, j) in results.iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.into()];
        row.extend(j.entries.iter().map(|&e| Cell::from(e)));
        row.push(j.interior_hit.into());
        out.rows.push(row);
    }
    let pooled: Vec<f64> = results
        .iter()
        .flat_map(|j| j.entries.iter().copied())
        .collect();
    summarize(&mut out, &pooled)?;
    let hits = results.iter().filter(|j| j.interior_hit).count();
    out.float("interior_hit_fraction", hits as f64 / results.len() as f64);
    let ks = ks_two_sample(&EmpiricalDistribution::new(pooled)?, &d2_reference(config)?);
    out.float("ks_entries_vs_limit", ks);
    out.lines.push(format!(
        "joint n={n} m={m}: KS of pooled entries vs limit marginal = {ks:.4}, interior hits {hits}"
    ));
    Ok(out)
}

fn poisson_check(config: &ExperimentConfig) -> Result<Outcome> {
    let (n, alpha) = (config.n, config.alpha);
    let counts = replicates(config, |mut r| sample_slow_count(&mut r, n, alpha))?;
    let mut out = Outcome::new(&["replicate", "count"]);
    for (r, &c) in counts.iter().enumerate() {
        out.rows.push(vec![r.into(), c.into()]);
    }
    let hist: IntegerHistogram = counts.iter().map(|&c| c as i64).collect();
    let mean = expected_slow_count(n, alpha);
    let pmf = |k: i64| poisson_pmf(k, mean).unwrap_or(0.0);
    let tv = tv_integer(&hist, pmf)?;
    let bound = stein_chen_bound(n, alpha);
    out.float("mean", hist.mean());
    out.float("expected", mean);
    out.float("tv", tv);
    out.float("stein_chen_bound", bound);
    if counts.len() > 1 {
        out.float(
            "tv_std_error",
            tv_standard_error(&hist, pmf, 200, &auxiliary(config, 3))?,
        );
    }
    out.lines.push(format!(
        "poisson-check n={n} alpha={alpha}: TV = {tv:.5}, Stein-Chen bound {bound:.5}"
    ));
    Ok(out)
}

fn xi_samples(config: &ExperimentConfig) -> Result<Vec<XiSample>> {
    let root = RandomStream::new(config.seed);
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            fpp_core::limit::sample_xi(
                &root.derive(r as u64),
                config.gamma,
                config.inner,
                config.outer,
            )
        })
        .collect()
}

fn xi_rows(out: &mut Outcome, samples: &[XiSample]) {
    for (r, x) in samples.iter().enumerate() {
        out.rows
            .push(vec![r.into(), x.value.into(), x.stable.into()]);
    }
}

fn xi(config: &ExperimentConfig) -> Result<Outcome> {
    let samples = xi_samples(config)?;
    let mut out = Outcome::new(&["replicate", "value", "stable"]);
    xi_rows(&mut out, &samples);
    let stable: Vec<f64> = samples
        .iter()
        .filter(|x| x.stable)
        .map(|x| x.value)
        .collect();
    let degenerate = samples.iter().filter(|x| x.is_degenerate()).count();
    summarize(&mut out, &stable)?;
    let fraction = stable.len() as f64 / samples.len() as f64;
    out.float("stable_fraction", fraction);
    out.stat("degenerate", degenerate);
    out.lines.push(format!(
        "xi gamma={} A={} B={}: stable fraction {fraction:.4}, degenerate {degenerate}",
        config.gamma, config.inner, config.outer
    ));
    Ok(out)
}

fn q_tail(config: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&["x", "method", "estimate", "std_error"]);
    let root = RandomStream::new(config.seed);
    for (i, &x) in config.x.iter().enumerate() {
        let stream = root.derive(i as u64);
        let direct = tail_q_direct(&stream.derive(0), x, config.delta, config.replicates)?;
        let product = tail_q_product(
            &stream.derive(1),
            x,
            DEFAULT_PAIR_CAP,
            config.replicates.max(2),
        )?;
        let bound = tail_q_lower_bound(x)?;
        for (method, estimate, se) in [
            ("direct", direct.estimate, direct.std_error),
            ("product-formula", product.estimate, product.std_error),
            ("lower-bound", bound, 0.0),
        ] {
            out.rows
                .push(vec![x.into(), method.into(), estimate.into(), se.into()]);
        }
        out.lines.push(format!(
            "P(Q > {x}): direct {:.4} ± {:.4}, product {:.4} ± {:.4}, lower bound {bound:.4}",
            direct.estimate, direct.std_error, product.estimate, product.std_error
        ));
    }
    Ok(out)
}

fn moments(config: &ExperimentConfig) -> Result<Outcome> {
    if config.replicates < 100 {
        return Err(fpp_core::Error::InvalidParameter {
            name: "replicates",
            reason: format!("moments need at least 100, got {}", config.replicates),
        });
    }
    let samples = xi_samples(config)?;
    let mut out = Outcome::new(&["replicate", "value", "stable"]);
    xi_rows(&mut out, &samples);
    let m = xi_moments_from_samples(&samples, &auxiliary(config, 4))?;
    out.float("mean", m.mean);
    out.float("variance", m.variance);
    out.statistics.insert(
        "mean_ci".into(),
        serde_json::json!([number(m.mean_ci.0), number(m.mean_ci.1)]),
    );
    out.statistics.insert(
        "variance_ci".into(),
        serde_json::json!([number(m.variance_ci.0), number(m.variance_ci.1)]),
    );
    out.stat("stable", m.stable);
    out.stat("unstable", m.unstable);
    out.lines.push(format!(
        "E[Xi] = {:.4} [{:.4}, {:.4}], Var(Xi) = {:.4} [{:.4}, {:.4}]",
        m.mean, m.mean_ci.0, m.mean_ci.1, m.variance, m.variance_ci.0, m.variance_ci.1
    ));
    Ok(out)
}

fn verify(config: &ExperimentConfig) -> Result<Outcome> {
    let suite = Suite::new(config.profile.into(), config.seed);
    let mut out = Outcome::new(&[
        "criterion",
        "title",
        "passed",
        "check",
        "value",
        "condition",
        "check_passed",
    ]);
    let mut reports = Vec::new();
    for id in 1..=fpp_core::acceptance::CRITERIA as u8 {
        let report = suite.run(id)?;
        println!("{}", report.line());
        for c in &report.checks {
            out.rows.push(vec![
                (id as usize).into(),
                report.title.into(),
                report.passed.into(),
                c.label.clone().into(),
                c.value.into(),
                c.condition.clone().into(),
                c.passed.into(),
            ]);
        }
        out.passed &= report.passed;
        reports.push(report);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.lines
        .push(format!("{passed}/{} criteria passed", reports.len()));
    out.stat("profile", suite.profile().to_string());
    out.stat("criteria", &reports);
    Ok(out)
}
