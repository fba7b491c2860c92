//! Subcommand arguments and execution.

use std::time::Instant;

use clap::Args;
use luders_core::distinguish::{run_discrimination, DistinguishConfig, MeasurementRule, Truth};
use luders_core::experiments::{run_trials, DEFAULT_CONFIDENCE};
use luders_core::operators::{even_sum, odd_sum, SpectralRole};
use luders_core::search::GroupSummary;
use luders_core::{
    analytic_spectrum, apply_c_fast, build_c_dense, eig_hermitian, error_budget, inner,
    CycleConfig, CycleEngine, ErrorEstimate, SearchConfig, SearchOperatorParams, SearchPlan,
    StateVector, C64,
};
use serde::Serialize;

use crate::config::{
    parse_m_range, require_positive, require_power_of_two, resolve_marked, resolve_parallelism,
    resolve_physics, resolve_seed, CommonArgs, Engine, ExperimentConfig, Format, MarkedSpec, Rule,
    TruthArg,
};
use crate::{emit, CliError, Report};

fn merged(flags: ExperimentConfig, common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    Ok(flags.or(common.overrides()).or(common.base()?))
}

fn resolve_format(
    cfg: &mut ExperimentConfig,
    default: Format,
    allowed: &[Format],
) -> Result<Format, CliError> {
    let f = *cfg.format.get_or_insert(default);
    if !allowed.contains(&f) {
        return Err(CliError::Usage(format!(
            "format {f:?} is not supported by this command"
        )));
    }
    Ok(f)
}

fn json_report<R: Serialize>(
    cfg: ExperimentConfig,
    results: R,
    started: Instant,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let text = Report::new(cfg, results, started).to_json()?;
    emit(&text, common.out.as_deref())
}

/// Failure-side summary of a batch of runs.
#[derive(Debug, Serialize)]
pub struct FailureSummary {
    pub runs: u64,
    pub successes: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub confidence: f64,
}

impl From<&ErrorEstimate> for FailureSummary {
    fn from(e: &ErrorEstimate) -> Self {
        let (lo, hi) = e.failure_interval();
        Self {
            runs: e.trials(),
            successes: e.successes,
            failures: e.failures,
            failure_rate: e.failure_rate(),
            wilson_lo: lo,
            wilson_hi: hi,
            confidence: e.confidence,
        }
    }
}

// ---------------------------------------------------------------- cycle

#[derive(Args, Debug)]
pub struct CycleArgs {
    /// Records in the tested register (power of two; 1 is padded to 2).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Marked record: an index or `none`.
    #[arg(long)]
    pub marked: Option<MarkedSpec>,
    /// Trials per cycle.
    #[arg(long)]
    pub m: Option<usize>,
    /// Independent cycles to run.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
pub struct CycleResults {
    pub register_dim: usize,
    pub qubits: u32,
    pub padded: bool,
    pub per_trial_detect_probability: f64,
    pub per_run_detect_probability: f64,
    pub purity_complement: f64,
    pub groups: Vec<GroupSummary>,
    pub detections: u64,
    pub runs: u64,
    pub empirical_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub confidence: f64,
    pub mean_trials_used: f64,
    /// Last readout of each of the first few runs.
    pub sample_bitstrings: Vec<String>,
}

const SAMPLE_BITSTRINGS: usize = 16;

pub fn cycle(args: CycleArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let flags = ExperimentConfig {
        dim: args.dim,
        marked: args.marked.clone(),
        m: args.m,
        trials: args.trials,
        engine: args.engine,
        ..Default::default()
    };
    let mut cfg = merged(flags, &args.common)?;
    let dim = *cfg.dim.get_or_insert(8);
    require_power_of_two("dim", dim, 1)?;
    let marked = resolve_marked(&mut cfg, dim, "none", true)?;
    let m = *cfg.m.get_or_insert(1);
    require_positive("m", m)?;
    let runs = *cfg.trials.get_or_insert(1000);
    require_positive("trials", runs)?;
    let engine = *cfg.engine.get_or_insert(Engine::Analytic);
    let phys = resolve_physics(&mut cfg)?;
    let seed = resolve_seed(&mut cfg);
    let parallelism = resolve_parallelism(&mut cfg)?;
    resolve_format(&mut cfg, Format::Json, &[Format::Json])?;

    let cc = CycleConfig {
        subset_size: dim,
        marked_local: marked,
        trials: m,
        engine: engine.into(),
        a1: phys.a1,
        a2: phys.a2,
        group_tol: phys.group_tol,
    };
    let e = CycleEngine::from_config(&cc)?;
    let outcomes = run_trials(runs, seed, parallelism, |_, rng| e.run(m, rng))?;
    let detections = outcomes.iter().filter(|o| o.detected).count() as u64;
    let est = ErrorEstimate::from_counts(detections, runs as u64 - detections, DEFAULT_CONFIDENCE)?;
    let mean_trials_used = outcomes.iter().map(|o| o.trials_used as f64).sum::<f64>() / runs as f64;
    let sample_bitstrings = outcomes
        .iter()
        .take(SAMPLE_BITSTRINGS)
        .filter_map(|o| o.bitstrings().pop())
        .collect();

    let results = CycleResults {
        register_dim: e.params().dim,
        qubits: e.qubits(),
        padded: dim == 1,
        per_trial_detect_probability: e.detect_probability(),
        per_run_detect_probability: 1.0 - e.miss_probability(m),
        purity_complement: e.purity_complement(),
        groups: e.groups(),
        detections,
        runs: runs as u64,
        empirical_rate: est.rate,
        wilson_lo: est.wilson_lo,
        wilson_hi: est.wilson_hi,
        confidence: est.confidence,
        mean_trials_used,
        sample_bitstrings,
    };
    json_report(cfg, results, started, &args.common)
}

// ---------------------------------------------------------------- search

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Number of records N (power of two, at least 2).
    #[arg(long)]
    pub records: Option<usize>,
    /// Marked record: an index or `random` (drawn from the seed).
    #[arg(long)]
    pub marked: Option<MarkedSpec>,
    /// Trials per cycle (default log₂N + 2).
    #[arg(long)]
    pub m: Option<usize>,
    /// Independent searches.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    /// Query the oracle once more on the recovered index.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub recovered_index: usize,
    pub success: bool,
    pub total_trials: usize,
}

#[derive(Debug, Serialize)]
pub struct SearchResults {
    pub records: usize,
    pub marked: usize,
    pub m: usize,
    pub cycles: usize,
    pub error_budget: f64,
    #[serde(flatten)]
    pub summary: FailureSummary,
    pub mean_total_trials: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<u64>,
    pub per_run: Vec<RunSummary>,
}

struct SearchSetup {
    records: usize,
    marked: usize,
    runs: usize,
    seed: u64,
    parallelism: usize,
    base: SearchConfig,
}

fn search_setup(cfg: &mut ExperimentConfig) -> Result<SearchSetup, CliError> {
    let records = *cfg.records.get_or_insert(16);
    require_power_of_two("records", records, 2)?;
    let marked = resolve_marked(cfg, records, "random", false)?.expect("none rejected");
    let runs = *cfg.runs.get_or_insert(1000);
    require_positive("runs", runs)?;
    let engine = *cfg.engine.get_or_insert(Engine::Analytic);
    let verify = *cfg.verify.get_or_insert(false);
    let phys = resolve_physics(cfg)?;
    let seed = resolve_seed(cfg);
    let parallelism = resolve_parallelism(cfg)?;
    let mut base = SearchConfig::new(records, 1, engine.into());
    base.a1 = phys.a1;
    base.a2 = phys.a2;
    base.group_tol = phys.group_tol;
    base.verify = verify;
    Ok(SearchSetup {
        records,
        marked,
        runs,
        seed,
        parallelism,
        base,
    })
}

fn run_searches(s: &SearchSetup, m: usize) -> Result<Vec<luders_core::SearchResult>, CliError> {
    let mut sc = s.base.clone();
    sc.trials = m;
    let plan = SearchPlan::new(sc, s.marked)?;
    Ok(run_trials(s.runs, s.seed, s.parallelism, |_, rng| {
        plan.run(rng)
    })?)
}

fn failure_estimate(results: &[luders_core::SearchResult]) -> Result<ErrorEstimate, CliError> {
    let ok = results.iter().filter(|r| r.success == Some(true)).count() as u64;
    Ok(ErrorEstimate::from_counts(
        ok,
        results.len() as u64 - ok,
        DEFAULT_CONFIDENCE,
    )?)
}

pub fn search(args: SearchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let flags = ExperimentConfig {
        records: args.records,
        marked: args.marked.clone(),
        m: args.m,
        runs: args.runs,
        engine: args.engine,
        verify: args.verify.then_some(true),
        ..Default::default()
    };
    let mut cfg = merged(flags, &args.common)?;
    let setup = search_setup(&mut cfg)?;
    let cycles = setup.records.trailing_zeros() as usize;
    let m = *cfg.m.get_or_insert(cycles + 2);
    require_positive("m", m)?;
    resolve_format(&mut cfg, Format::Json, &[Format::Json])?;

    let results = run_searches(&setup, m)?;
    let est = failure_estimate(&results)?;
    let verified = setup
        .base
        .verify
        .then(|| results.iter().filter(|r| r.verified == Some(true)).count() as u64);
    let mean_total_trials =
        results.iter().map(|r| r.total_trials as f64).sum::<f64>() / results.len() as f64;
    let per_run = results
        .iter()
        .enumerate()
        .map(|(run, r)| RunSummary {
            run,
            recovered_index: r.recovered_index,
            success: r.success == Some(true),
            total_trials: r.total_trials,
        })
        .collect();
    let out = SearchResults {
        records: setup.records,
        marked: setup.marked,
        m,
        cycles,
        error_budget: error_budget(setup.records, m)?,
        summary: FailureSummary::from(&est),
        mean_total_trials,
        verified,
        per_run,
    };
    json_report(cfg, out, started, &args.common)
}

// ---------------------------------------------------------------- sweep

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub records: Option<usize>,
    /// Inclusive range of trials per cycle, `lo..hi`.
    #[arg(long)]
    pub m_range: Option<String>,
    #[arg(long)]
    pub marked: Option<MarkedSpec>,
    /// Independent searches per value of m.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// One CSV row; field order is the column order.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub records: usize,
    pub m: usize,
    pub runs: u64,
    pub failures: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub budget: f64,
    pub seed: u64,
}

pub const SWEEP_HEADER: &str = "records,m,runs,failures,rate,wilson_lo,wilson_hi,budget,seed";

#[derive(Debug, Serialize)]
pub struct SweepResults {
    pub marked: usize,
    pub rows: Vec<SweepRow>,
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let flags = ExperimentConfig {
        records: args.records,
        m_range: args.m_range.clone(),
        marked: args.marked.clone(),
        runs: args.runs,
        engine: args.engine,
        ..Default::default()
    };
    let mut cfg = merged(flags, &args.common)?;
    let setup = search_setup(&mut cfg)?;
    let default_hi = setup.records.trailing_zeros() as usize + 4;
    let range = cfg
        .m_range
        .get_or_insert_with(|| format!("1..{default_hi}"))
        .clone();
    let (lo, hi) = parse_m_range(&range)?;
    let format = resolve_format(&mut cfg, Format::Csv, &[Format::Csv, Format::Json])?;

    let mut rows = Vec::new();
    for m in lo..=hi {
        let est = failure_estimate(&run_searches(&setup, m)?)?;
        let f = FailureSummary::from(&est);
        rows.push(SweepRow {
            records: setup.records,
            m,
            runs: f.runs,
            failures: f.failures,
            rate: f.failure_rate,
            wilson_lo: f.wilson_lo,
            wilson_hi: f.wilson_hi,
            budget: error_budget(setup.records, m)?,
            seed: setup.seed,
        });
    }

    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)
                    .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
            }
            let body = w
                .into_inner()
                .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
            let text = format!(
                "# schema_version={}\n{}",
                crate::SCHEMA_VERSION,
                String::from_utf8(body).expect("csv output is utf-8")
            );
            emit(&text, args.common.out.as_deref())
        }
        Format::Json => json_report(
            cfg,
            SweepResults {
                marked: setup.marked,
                rows,
            },
            started,
            &args.common,
        ),
    }
}

// ---------------------------------------------------------------- spectrum

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Register dimension D (power of two, at least 2).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Marked record: an index or `none`.
    #[arg(long)]
    pub marked: Option<MarkedSpec>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
pub struct SpectrumGroup {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub role: Option<SpectralRole>,
    /// Largest `‖Ĉv − λv‖` over the checked unit vectors of the group.
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct SpectrumResults {
    pub dim: usize,
    pub groups: Vec<SpectrumGroup>,
    pub max_residual: f64,
    /// `[[c_uu, c_uv], [c_vu, c_vv]]` over the broken parity sum and its partner.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<[[f64; 2]; 2]>,
}

fn residual(p: &SearchOperatorParams, lambda: f64, v: &StateVector) -> Result<f64, CliError> {
    Ok(apply_c_fast(p, v)?.axpy(C64::new(-lambda, 0.0), v)?.norm())
}

/// A unit vector orthogonal to `others`, built from the first basis vector
/// with a nonzero remainder.
fn complement_vector(dim: usize, others: &[&StateVector]) -> Result<StateVector, CliError> {
    for j in 0..dim {
        let mut v = StateVector::basis(dim, j)?;
        for b in others {
            v = v.axpy(-inner(b, &v)?, b)?;
        }
        if v.norm() > 1e-6 {
            return Ok(v.normalized()?);
        }
    }
    Err(CliError::Usage("register has no complement vector".into()))
}

fn analytic_groups(p: &SearchOperatorParams, group_tol: f64) -> Result<SpectrumResults, CliError> {
    let d = p.dim;
    let Some(_) = p.marked else {
        // No marked record: Ĉ = Â, with the two parity sums at a1 and the
        // rest at a2.
        let (ue, uo) = (even_sum(d), odd_sum(d));
        let r1 = residual(p, p.a1, &ue)?.max(residual(p, p.a1, &uo)?);
        let mut groups = vec![SpectrumGroup {
            eigenvalue: p.a1,
            multiplicity: 2,
            role: Some(SpectralRole::Surviving),
            residual: r1,
        }];
        if d > 2 {
            let bulk = complement_vector(d, &[&ue, &uo])?;
            groups.push(SpectrumGroup {
                eigenvalue: p.a2,
                multiplicity: d - 2,
                role: Some(SpectralRole::Bulk),
                residual: residual(p, p.a2, &bulk)?,
            });
        }
        groups.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        let max_residual = groups.iter().map(|g| g.residual).fold(0.0, f64::max);
        return Ok(SpectrumResults {
            dim: d,
            groups,
            max_residual,
            block: None,
        });
    };
    let spec = analytic_spectrum(p, group_tol)?;
    let explicit: Vec<&StateVector> = std::iter::once(&spec.surviving().vector)
        .chain(spec.perturbed().iter().map(|e| &e.vector))
        .collect();
    let mut groups = Vec::new();
    for (i, g) in spec.groups().iter().enumerate() {
        let v = match spec.group_vector(i) {
            Some(v) => v.clone(),
            None => complement_vector(d, &explicit)?,
        };
        groups.push(SpectrumGroup {
            eigenvalue: g.eigenvalue,
            multiplicity: g.multiplicity,
            role: Some(g.role),
            residual: residual(p, g.eigenvalue, &v)?,
        });
    }
    let max_residual = groups.iter().map(|g| g.residual).fold(0.0, f64::max);
    Ok(SpectrumResults {
        dim: d,
        groups,
        max_residual,
        block: (d > 2).then(|| spec.block()),
    })
}

fn dense_groups(p: &SearchOperatorParams, group_tol: f64) -> Result<SpectrumResults, CliError> {
    if p.dim > luders_core::search::MAX_DENSE_DIM {
        return Err(CliError::Usage(format!(
            "dense engine limited to dimension {}, got {}; use --engine analytic",
            luders_core::search::MAX_DENSE_DIM,
            p.dim
        )));
    }
    let c = build_c_dense(p)?;
    let dec = eig_hermitian(&c, group_tol)?;
    let mut groups = Vec::new();
    for (i, g) in dec.groups().iter().enumerate() {
        let mut r: f64 = 0.0;
        for v in dec.group_vectors(i) {
            r = r.max(c.apply(v)?.axpy(C64::new(-g.eigenvalue, 0.0), v)?.norm());
        }
        groups.push(SpectrumGroup {
            eigenvalue: g.eigenvalue,
            multiplicity: g.multiplicity,
            role: None,
            residual: r,
        });
    }
    let max_residual = groups.iter().map(|g| g.residual).fold(0.0, f64::max);
    Ok(SpectrumResults {
        dim: p.dim,
        groups,
        max_residual,
        block: None,
    })
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let flags = ExperimentConfig {
        dim: args.dim,
        marked: args.marked.clone(),
        engine: args.engine,
        ..Default::default()
    };
    let mut cfg = merged(flags, &args.common)?;
    let dim = *cfg.dim.get_or_insert(8);
    require_power_of_two("dim", dim, 2)?;
    let marked = resolve_marked(&mut cfg, dim, "none", true)?;
    let engine = *cfg.engine.get_or_insert(Engine::Analytic);
    let phys = resolve_physics(&mut cfg)?;
    resolve_format(&mut cfg, Format::Json, &[Format::Json])?;
    let p = SearchOperatorParams::new(dim, phys.a1, phys.a2, marked)?;
    let results = match engine {
        Engine::Analytic => analytic_groups(&p, phys.group_tol)?,
        Engine::Dense => dense_groups(&p, phys.group_tol)?,
    };
    json_report(cfg, results, started, &args.common)
}

// ---------------------------------------------------------------- distinguish

#[derive(Args, Debug)]
pub struct DistinguishArgs {
    /// Copies of the input state per decision.
    #[arg(long)]
    pub copies: Option<usize>,
    /// Independent decisions.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Which observable the apparatus actually measures.
    #[arg(long, value_enum)]
    pub truth: Option<TruthArg>,
    /// Collapse rule of the first apparatus.
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
pub struct DistinguishResults {
    pub truth: Truth,
    pub copies: usize,
    #[serde(flatten)]
    pub summary: FailureSummary,
    /// Exact error probability under the Lüders rule.
    pub reference_error: f64,
}

pub fn distinguish(args: DistinguishArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let flags = ExperimentConfig {
        copies: args.copies,
        trials: args.trials,
        truth: args.truth,
        rule: args.rule,
        ..Default::default()
    };
    let mut cfg = merged(flags, &args.common)?;
    let copies = *cfg.copies.get_or_insert(5);
    require_positive("copies", copies)?;
    let trials = *cfg.trials.get_or_insert(10_000);
    require_positive("trials", trials)?;
    let truth = match *cfg.truth.get_or_insert(TruthArg::J) {
        TruthArg::I => Truth::I,
        TruthArg::J => Truth::J,
    };
    let rule = match *cfg.rule.get_or_insert(Rule::Luders) {
        Rule::Luders => MeasurementRule::Luders,
        Rule::VonNeumann => MeasurementRule::VonNeumann,
    };
    let phys = resolve_physics(&mut cfg)?;
    if phys.delta < 0.0 {
        return Err(CliError::Usage(format!(
            "--delta must be positive here, got {}",
            phys.delta
        )));
    }
    let seed = resolve_seed(&mut cfg);
    let parallelism = resolve_parallelism(&mut cfg)?;
    resolve_format(&mut cfg, Format::Json, &[Format::Json])?;
    // a1/a2 play no role in this experiment.
    cfg.a1 = None;
    cfg.a2 = None;

    let mut dc = DistinguishConfig::new(phys.delta, copies, trials, truth);
    dc.rule = rule;
    let est = run_discrimination(&dc, seed, parallelism, DEFAULT_CONFIDENCE)?;
    let reference_error = match truth {
        Truth::I => 0.0,
        Truth::J => 2f64.powi(-(copies.min(i32::MAX as usize) as i32)),
    };
    let results = DistinguishResults {
        truth,
        copies,
        summary: FailureSummary::from(&est),
        reference_error,
    };
    json_report(cfg, results, started, &args.common)
}
