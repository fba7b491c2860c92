//! Membership-test cycles and the binary-descent search built on them.
//!
//! One cycle trial prepares the uniform superposition `φ` on the tested
//! register, performs a Lüders measurement of `Ĉ`, rotates the collapsed state
//! with the reflection sending `φ` to `e₀`, and reads out all qubits. An
//! all-zeros readout is consistent with "no marked record here"; any `1` is a
//! certificate that the marked record is in the register, because without a
//! mark `Ĉ = Â` has `φ` as an eigenvector and the readout is deterministic.
//!
//! The probability of a nonzero readout equals `1 − Σ_k p_k²`, where `p_k` are
//! the Lüders outcome probabilities of `φ`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{sample_index, CumulativeTable, RandomStream};
use crate::linalg::{householder_to_e0, inner, StateVector, UnitaryMap, C64, DEFAULT_GROUP_TOL};
use crate::luders::{collapse, LudersObservable, COLLAPSE_THRESHOLD};
use crate::operators::{
    analytic_spectrum, build_c_dense, check_separation, uniform_superposition,
    SearchOperatorParams, SpectralRole,
};

/// Largest register the dense engine will diagonalize.
pub const MAX_DENSE_DIM: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Dense `Ĉ` and a Jacobi eigendecomposition.
    Dense,
    /// Closed-form spectrum and matrix-free readout, O(D) per register.
    Analytic,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "analytic" => Ok(Self::Analytic),
            other => Err(Error::Param(format!(
                "unknown engine '{other}' (expected dense or analytic)"
            ))),
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::Analytic => "analytic",
        })
    }
}

/// One membership test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleConfig {
    /// Number of records in the tested subset (a power of two).
    pub subset_size: usize,
    /// Local index of the marked record if the subset contains it. Only the
    /// oracle builder sees this.
    pub marked_local: Option<usize>,
    pub trials: usize,
    pub engine: EngineKind,
    pub a1: f64,
    pub a2: f64,
    pub group_tol: f64,
}

impl CycleConfig {
    pub fn new(subset_size: usize, marked_local: Option<usize>, trials: usize) -> Self {
        Self {
            subset_size,
            marked_local,
            trials,
            engine: EngineKind::Analytic,
            a1: 1.0 + crate::operators::DEFAULT_DELTA,
            a2: 1.0,
            group_tol: DEFAULT_GROUP_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subset_size == 0 || !self.subset_size.is_power_of_two() {
            return Err(Error::Param(format!(
                "subset size must be a power of two >= 1, got {}",
                self.subset_size
            )));
        }
        if self.trials == 0 {
            return Err(Error::Param("trials per cycle must be at least 1".into()));
        }
        if let Some(k) = self.marked_local {
            if k >= self.subset_size {
                return Err(Error::Param(format!(
                    "marked index {k} outside subset of size {}",
                    self.subset_size
                )));
            }
        }
        Ok(())
    }

    /// Operator parameters on the tested register. A singleton subset sits
    /// at index 0 of a two-dimensional register whose index 1 is never marked.
    pub fn register_params(&self) -> Result<SearchOperatorParams> {
        self.validate()?;
        SearchOperatorParams::new(self.subset_size.max(2), self.a1, self.a2, self.marked_local)
    }
}

/// Outcome of a single trial: sampled eigenvalue group and readout index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub group_id: usize,
    /// Readout as an integer; bit `j` is qubit `j`.
    pub outcome: usize,
}

impl TrialRecord {
    pub fn is_nonzero(&self) -> bool {
        self.outcome != 0
    }

    /// Readout rendered most-significant qubit first.
    pub fn bitstring(&self, qubits: u32) -> String {
        format!("{:0width$b}", self.outcome, width = qubits as usize)
    }
}

/// Exact data of one eigenvalue group for a prepared cycle.
#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// Lüders probability of the group for the uniform input.
    pub probability: f64,
    /// Probability of the all-zeros readout after collapsing onto this group.
    pub zero_readout: f64,
}

#[derive(Clone, Debug)]
struct GroupReadout {
    summary: GroupSummary,
    table: Option<CumulativeTable>,
}

/// A membership test prepared for repeated sampling.
///
/// Each trial consumes exactly two uniforms: one selects the Lüders outcome,
/// one selects the readout.
#[derive(Clone, Debug)]
pub struct CycleEngine {
    kind: EngineKind,
    params: SearchOperatorParams,
    groups: Vec<GroupReadout>,
    probabilities: Vec<f64>,
    detect_probability: f64,
}

impl CycleEngine {
    pub fn new(kind: EngineKind, params: SearchOperatorParams, group_tol: f64) -> Result<Self> {
        let phi = uniform_superposition(params.register());
        let rotation = householder_to_e0(&phi)?;
        let collapsed: Vec<(f64, usize, f64, Option<StateVector>)> = match kind {
            EngineKind::Dense => dense_collapse(&params, &phi, group_tol)?,
            EngineKind::Analytic => analytic_collapse(&params, &phi, group_tol)?,
        };

        let mut groups = Vec::with_capacity(collapsed.len());
        for (eigenvalue, multiplicity, probability, chi) in collapsed {
            let (zero_readout, table) = match chi {
                Some(chi) => {
                    let weights = readout_weights(&rotation, &chi)?;
                    (weights[0], Some(CumulativeTable::new(&weights)))
                }
                None => (0.0, None),
            };
            groups.push(GroupReadout {
                summary: GroupSummary {
                    eigenvalue,
                    multiplicity,
                    probability,
                    zero_readout,
                },
                table,
            });
        }
        let probabilities: Vec<f64> = groups.iter().map(|g| g.summary.probability).collect();
        // The readout rotation sends φ to e₀, so the zero readout of group k
        // has probability |⟨φ|χ_k⟩|² = p_k and detection is Σ p_k (1 − p_k).
        // Using p_k rather than the rotated weight avoids rounding below the
        // exact value at boundary cases such as D = 2. Outcomes below the
        // collapse threshold are never sampled and are left out.
        let live: Vec<f64> = groups
            .iter()
            .filter(|g| g.table.is_some())
            .map(|g| g.summary.probability)
            .collect();
        let mass: f64 = live.iter().sum();
        let detect_probability = live
            .iter()
            .map(|p| p * (mass - p))
            .sum::<f64>()
            .clamp(0.0, 1.0);
        Ok(Self {
            kind,
            params,
            groups,
            probabilities,
            detect_probability,
        })
    }

    pub fn from_config(cfg: &CycleConfig) -> Result<Self> {
        Self::new(cfg.engine, cfg.register_params()?, cfg.group_tol)
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn params(&self) -> &SearchOperatorParams {
        &self.params
    }

    pub fn qubits(&self) -> u32 {
        self.params.register().qubits()
    }

    pub fn groups(&self) -> Vec<GroupSummary> {
        self.groups.iter().map(|g| g.summary.clone()).collect()
    }

    /// Lüders probabilities of the uniform input, in ascending eigenvalue order.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Exact probability that one trial reads out a nonzero bitstring.
    pub fn detect_probability(&self) -> f64 {
        self.detect_probability
    }

    /// `1 − Σ_k p_k²`.
    pub fn purity_complement(&self) -> f64 {
        1.0 - self.probabilities.iter().map(|p| p * p).sum::<f64>()
    }

    /// Probability that `m` trials all read out zeros.
    pub fn miss_probability(&self, m: usize) -> f64 {
        (1.0 - self.detect_probability).powi(m as i32)
    }

    pub fn trial(&self, rng: &mut RandomStream) -> Result<TrialRecord> {
        let u_group = rng.uniform();
        let u_readout = rng.uniform();
        let group_id = sample_index(&self.probabilities, u_group)
            .ok_or(Error::ZeroProbabilityCollapse { probability: 0.0 })?;
        let table = self.groups[group_id]
            .table
            .as_ref()
            .ok_or(Error::ZeroProbabilityCollapse {
                probability: self.probabilities[group_id],
            })?;
        let outcome = table.sample(u_readout).unwrap_or(0);
        Ok(TrialRecord { group_id, outcome })
    }

    /// Up to `m` trials, stopping at the first nonzero readout.
    pub fn run(&self, m: usize, rng: &mut RandomStream) -> Result<CycleOutcome> {
        if m == 0 {
            return Err(Error::Param("trials per cycle must be at least 1".into()));
        }
        let mut trial_records = Vec::new();
        let mut detected = false;
        for _ in 0..m {
            let rec = self.trial(rng)?;
            trial_records.push(rec);
            if rec.is_nonzero() {
                detected = true;
                break;
            }
        }
        Ok(CycleOutcome {
            detected,
            trials_used: trial_records.len(),
            trial_records,
            per_trial_detect_prob: self.detect_probability,
            qubits: self.qubits(),
        })
    }
}

type Collapsed = Vec<(f64, usize, f64, Option<StateVector>)>;

fn dense_collapse(
    p: &SearchOperatorParams,
    phi: &StateVector,
    group_tol: f64,
) -> Result<Collapsed> {
    if p.dim > MAX_DENSE_DIM {
        return Err(Error::Param(format!(
            "dense engine limited to dimension {MAX_DENSE_DIM}, got {}; use the analytic engine",
            p.dim
        )));
    }
    let obs = LudersObservable::new(&build_c_dense(p)?, group_tol)?;
    let probs = obs.probabilities(phi)?;
    obs.projectors()
        .iter()
        .zip(probs)
        .map(|(proj, prob)| {
            let chi = if prob > COLLAPSE_THRESHOLD {
                Some(collapse(phi, proj)?)
            } else {
                None
            };
            Ok((proj.eigenvalue, proj.rank(), prob, chi))
        })
        .collect()
}

fn analytic_collapse(
    p: &SearchOperatorParams,
    phi: &StateVector,
    group_tol: f64,
) -> Result<Collapsed> {
    if p.marked.is_none() {
        // Ĉ = Â and φ lies in the a1 eigenspace.
        let mut groups = vec![(p.a1, 2, 1.0, Some(phi.clone()))];
        if p.dim >= 4 {
            groups.push((p.a2, p.dim - 2, 0.0, None));
        }
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        check_separation(groups.iter().map(|g| g.0), group_tol)?;
        return Ok(groups);
    }
    let spectrum = analytic_spectrum(p, group_tol)?;
    // φ = (û1 + û2)/√2: half its weight sits on the surviving sum, the other
    // half on û_broken, which the block eigenvectors split as w₀².
    let probs: Vec<f64> = (0..spectrum.groups().len())
        .map(|i| match spectrum.groups()[i].role {
            SpectralRole::Surviving => Ok(0.5),
            SpectralRole::Bulk => Ok(0.0),
            SpectralRole::Perturbed => {
                let v = spectrum.group_vector(i).expect("simple group");
                Ok(0.5 * inner(spectrum.broken(), v)?.norm_sqr())
            }
        })
        .collect::<Result<_>>()?;
    spectrum
        .groups()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let prob = probs[i];
            let chi = if prob > COLLAPSE_THRESHOLD {
                let projected = spectrum.project(i, phi)?;
                Some(projected.scaled(C64::new(1.0 / projected.norm(), 0.0)))
            } else {
                None
            };
            Ok((g.eigenvalue, g.multiplicity, prob, chi))
        })
        .collect()
}

fn readout_weights(rotation: &UnitaryMap, chi: &StateVector) -> Result<Vec<f64>> {
    Ok(rotation.apply(chi)?.probabilities())
}

/// Result of up to `m` trials of one membership test.
#[derive(Clone, Debug, Serialize)]
pub struct CycleOutcome {
    /// A nonzero readout was observed.
    pub detected: bool,
    pub trials_used: usize,
    pub trial_records: Vec<TrialRecord>,
    pub per_trial_detect_prob: f64,
    pub qubits: u32,
}

impl CycleOutcome {
    pub fn bitstrings(&self) -> Vec<String> {
        self.trial_records
            .iter()
            .map(|r| r.bitstring(self.qubits))
            .collect()
    }
}

/// One trial of a freshly prepared membership test.
pub fn cycle_trial(cfg: &CycleConfig, rng: &mut RandomStream) -> Result<TrialRecord> {
    CycleEngine::from_config(cfg)?.trial(rng)
}

pub fn run_cycle(cfg: &CycleConfig, rng: &mut RandomStream) -> Result<CycleOutcome> {
    CycleEngine::from_config(cfg)?.run(cfg.trials, rng)
}

/// `min(1, log₂N · 2^{1−m})`, the union bound on the search failure probability.
pub fn error_budget(records: usize, m: usize) -> Result<f64> {
    if records < 2 || !records.is_power_of_two() {
        return Err(Error::Param(format!(
            "record count must be a power of two >= 2, got {records}"
        )));
    }
    if m == 0 {
        return Err(Error::Param("m must be at least 1".into()));
    }
    let cycles = records.trailing_zeros() as f64;
    Ok((cycles * 2f64.powi(1 - m as i32)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    Even,
    Odd,
}

/// Transcript of one halving step.
#[derive(Clone, Debug, Serialize)]
pub struct CycleStep {
    pub cycle: usize,
    /// Size of the tested (even-index) half.
    pub tested_size: usize,
    pub outcome: CycleOutcome,
    pub chosen: Half,
}

/// Binary descent over `records` candidates.
///
/// Cycle `j` tests the even-local-index half of the current candidate set and
/// keeps it iff `decide` reports a detection; the decision fixes bit `j` of the
/// recovered index (LSB first). `decide` receives the cycle number, the size of
/// the tested half and the marked record's index within that half when the
/// half contains it.
pub fn descend<F>(
    records: usize,
    true_marked: usize,
    mut decide: F,
) -> Result<(usize, Vec<CycleStep>)>
where
    F: FnMut(usize, usize, Option<usize>) -> Result<CycleOutcome>,
{
    if records < 2 || !records.is_power_of_two() {
        return Err(Error::Param(format!(
            "record count must be a power of two >= 2, got {records}"
        )));
    }
    if true_marked >= records {
        return Err(Error::Param(format!(
            "marked record {true_marked} out of range for {records} records"
        )));
    }
    let cycles = records.trailing_zeros() as usize;
    let mut prefix = 0usize;
    let mut size = records;
    let mut steps = Vec::with_capacity(cycles);
    for j in 0..cycles {
        let mask = (1usize << j) - 1;
        let local = (true_marked & mask == prefix).then_some(true_marked >> j);
        let in_tested = local.filter(|l| l % 2 == 0).map(|l| l / 2);
        let half = size / 2;
        let outcome = decide(j, half, in_tested)?;
        let chosen = if outcome.detected {
            Half::Even
        } else {
            Half::Odd
        };
        if chosen == Half::Odd {
            prefix |= 1 << j;
        }
        steps.push(CycleStep {
            cycle: j,
            tested_size: half,
            outcome,
            chosen,
        });
        size = half;
    }
    Ok((prefix, steps))
}

/// Parameters of a full search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub records: usize,
    /// Trials per cycle (`m`).
    pub trials: usize,
    pub engine: EngineKind,
    pub a1: f64,
    pub a2: f64,
    pub group_tol: f64,
    /// Query the oracle once more on the recovered index.
    pub verify: bool,
}

impl SearchConfig {
    pub fn new(records: usize, trials: usize, engine: EngineKind) -> Self {
        Self {
            records,
            trials,
            engine,
            a1: 1.0 + crate::operators::DEFAULT_DELTA,
            a2: 1.0,
            group_tol: DEFAULT_GROUP_TOL,
            verify: false,
        }
    }

    fn cycle_config(&self, subset_size: usize, marked_local: Option<usize>) -> CycleConfig {
        CycleConfig {
            subset_size,
            marked_local,
            trials: self.trials,
            engine: self.engine,
            a1: self.a1,
            a2: self.a2,
            group_tol: self.group_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub recovered_index: usize,
    pub cycles: Vec<CycleStep>,
    pub theoretical_bound: f64,
    pub success: Option<bool>,
    /// Oracle check of the recovered index, when requested.
    pub verified: Option<bool>,
    pub total_trials: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Every membership test a search for one marked record can encounter,
/// prepared once and reused across runs.
#[derive(Clone, Debug)]
pub struct SearchPlan {
    config: SearchConfig,
    true_marked: usize,
    engines: BTreeMap<(usize, Option<usize>), CycleEngine>,
}

impl SearchPlan {
    pub fn new(config: SearchConfig, true_marked: usize) -> Result<Self> {
        if config.trials == 0 {
            return Err(Error::Param("m must be at least 1".into()));
        }
        let mut engines = BTreeMap::new();
        // A perfect decision rule visits exactly the tests that can occur.
        let mut wanted = Vec::new();
        descend(config.records, true_marked, |_, half, marked| {
            wanted.push((half, marked));
            wanted.push((half, None));
            Ok(CycleOutcome {
                detected: marked.is_some(),
                trials_used: 0,
                trial_records: Vec::new(),
                per_trial_detect_prob: 0.0,
                qubits: 0,
            })
        })?;
        for key in wanted {
            if engines.contains_key(&key) {
                continue;
            }
            let cfg = config.cycle_config(key.0, key.1);
            engines.insert(key, CycleEngine::from_config(&cfg)?);
        }
        Ok(Self {
            config,
            true_marked,
            engines,
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn engine(&self, subset_size: usize, marked_local: Option<usize>) -> Option<&CycleEngine> {
        self.engines.get(&(subset_size, marked_local))
    }

    pub fn run(&self, rng: &mut RandomStream) -> Result<SearchResult> {
        let start = Instant::now();
        let (recovered_index, cycles) =
            descend(self.config.records, self.true_marked, |_, half, marked| {
                let engine = self
                    .engines
                    .get(&(half, marked))
                    .expect("plan covers every reachable test");
                engine.run(self.config.trials, rng)
            })?;
        let total_trials = cycles.iter().map(|c| c.outcome.trials_used).sum();
        let success = recovered_index == self.true_marked;
        Ok(SearchResult {
            recovered_index,
            cycles,
            theoretical_bound: error_budget(self.config.records, self.config.trials)?,
            success: Some(success),
            verified: self.config.verify.then_some(success),
            total_trials,
            elapsed: start.elapsed(),
        })
    }
}

pub fn run_search(
    config: &SearchConfig,
    true_marked: usize,
    rng: &mut RandomStream,
) -> Result<SearchResult> {
    SearchPlan::new(config.clone(), true_marked)?.run(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect(_: usize, _: usize, marked: Option<usize>) -> Result<CycleOutcome> {
        Ok(CycleOutcome {
            detected: marked.is_some(),
            trials_used: 1,
            trial_records: vec![],
            per_trial_detect_prob: 1.0,
            qubits: 1,
        })
    }

    #[test]
    fn descent_recovers_every_index_with_perfect_decisions() {
        for records in [2usize, 4, 8, 16, 32, 64] {
            for marked in 0..records {
                let (got, steps) = descend(records, marked, perfect).unwrap();
                assert_eq!(got, marked);
                assert_eq!(steps.len(), records.trailing_zeros() as usize);
            }
        }
    }

    #[test]
    fn descent_tested_sizes_halve() {
        let (_, steps) = descend(16, 5, perfect).unwrap();
        let sizes: Vec<usize> = steps.iter().map(|s| s.tested_size).collect();
        assert_eq!(sizes, vec![8, 4, 2, 1]);
    }

    #[test]
    fn descent_validates_inputs() {
        assert!(descend(6, 0, perfect).is_err());
        assert!(descend(1, 0, perfect).is_err());
        assert!(descend(8, 8, perfect).is_err());
    }

    #[test]
    fn error_budget_values() {
        assert!((error_budget(16, 6).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(error_budget(2, 1).unwrap(), 1.0);
        assert!((error_budget(1024, 12).unwrap() - 10.0 / 2048.0).abs() < 1e-15);
        assert!(error_budget(3, 2).is_err());
        assert!(error_budget(4, 0).is_err());
    }

    #[test]
    fn cycle_config_validation() {
        assert!(CycleConfig::new(3, None, 1).validate().is_err());
        assert!(CycleConfig::new(4, Some(4), 1).validate().is_err());
        assert!(CycleConfig::new(4, None, 0).validate().is_err());
        let p = CycleConfig::new(1, Some(0), 1).register_params().unwrap();
        assert_eq!((p.dim, p.marked), (2, Some(0)));
    }

    #[test]
    fn absent_cycles_never_detect() {
        for kind in [EngineKind::Dense, EngineKind::Analytic] {
            let mut cfg = CycleConfig::new(8, None, 5);
            cfg.engine = kind;
            let engine = CycleEngine::from_config(&cfg).unwrap();
            assert_eq!(engine.detect_probability(), 0.0);
            let mut rng = RandomStream::new(1);
            for _ in 0..200 {
                let out = engine.run(5, &mut rng).unwrap();
                assert!(!out.detected);
                assert_eq!(out.trials_used, 5);
                assert!(out.bitstrings().iter().all(|b| b == "000"));
            }
        }
    }

    #[test]
    fn trial_draw_budget() {
        let engine = CycleEngine::from_config(&CycleConfig::new(8, Some(3), 1)).unwrap();
        let mut rng = RandomStream::new(4);
        for _ in 0..10 {
            engine.trial(&mut rng).unwrap();
        }
        assert_eq!(rng.draws(), 20);
    }

    #[test]
    fn singleton_padding_detects_half_the_time() {
        let engine = CycleEngine::from_config(&CycleConfig::new(1, Some(0), 1)).unwrap();
        assert!((engine.detect_probability() - 0.5).abs() < 1e-12);
        assert_eq!(engine.qubits(), 1);
    }

    #[test]
    fn dense_engine_has_dimension_cap() {
        let mut cfg = CycleConfig::new(2 * MAX_DENSE_DIM, Some(0), 1);
        cfg.engine = EngineKind::Dense;
        assert!(matches!(
            CycleEngine::from_config(&cfg),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn zero_readout_weight_equals_group_probability() {
        for kind in [EngineKind::Dense, EngineKind::Analytic] {
            for d in [2usize, 4, 8, 32] {
                for k in [0, 1, d - 1] {
                    let p = SearchOperatorParams::with_delta(d, 0.1, Some(k)).unwrap();
                    let e = CycleEngine::new(kind, p, DEFAULT_GROUP_TOL).unwrap();
                    for g in e.groups().iter().filter(|g| g.probability > 0.0) {
                        assert!(
                            (g.zero_readout - g.probability).abs() <= 1e-12,
                            "{kind} D={d} k={k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pair_detection_is_exactly_half() {
        for kind in [EngineKind::Dense, EngineKind::Analytic] {
            for k in 0..2 {
                let p = SearchOperatorParams::with_delta(2, 0.01, Some(k)).unwrap();
                let e = CycleEngine::new(kind, p, DEFAULT_GROUP_TOL).unwrap();
                if kind == EngineKind::Analytic {
                    assert_eq!(e.detect_probability(), 0.5);
                }
                assert!((e.detect_probability() - 0.5).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn bitstring_rendering() {
        let r = TrialRecord {
            group_id: 0,
            outcome: 5,
        };
        assert_eq!(r.bitstring(4), "0101");
    }

    #[test]
    fn engine_kind_parsing() {
        assert_eq!("dense".parse::<EngineKind>().unwrap(), EngineKind::Dense);
        assert!("fast".parse::<EngineKind>().is_err());
    }
}
