//! Telling `Î = diag(1, 1)` from `Ĵ = diag(1, 1 + δ)` with copies of `|+⟩`.
//!
//! Measuring `Î` leaves `|+⟩` untouched, so an interference-basis readout
//! always returns `+`. Measuring `Ĵ` collapses onto `|0⟩` or `|1⟩`, after which
//! `+` and `−` are equally likely. Declaring `Ĵ` on any `−` among `m` copies
//! therefore errs only under `Ĵ`, with probability `2^{−m}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{run_trials, ErrorEstimate, RandomStream};
use crate::linalg::{HermitianOperator, StateVector, DEFAULT_GROUP_TOL};
use crate::luders::{measure_von_neumann, LudersObservable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Truth {
    I,
    J,
}

impl std::str::FromStr for Truth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(Self::I),
            "J" | "j" => Ok(Self::J),
            other => Err(Error::Param(format!("truth must be I or J, got '{other}'"))),
        }
    }
}

/// Which collapse rule the first apparatus follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementRule {
    Luders,
    /// Collapse onto the computational basis, the eigenbasis the apparatus
    /// would pick for `Ĵ`.
    VonNeumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interference {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistinguishConfig {
    pub delta: f64,
    pub copies: usize,
    pub trials: usize,
    pub truth: Truth,
    pub rule: MeasurementRule,
}

impl DistinguishConfig {
    pub fn new(delta: f64, copies: usize, trials: usize, truth: Truth) -> Self {
        Self {
            delta,
            copies,
            trials,
            truth,
            rule: MeasurementRule::Luders,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::Param(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.copies == 0 || self.trials == 0 {
            return Err(Error::Param("copies and trials must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn plus_state() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_real(&[s, s]).expect("dim 2")
}

pub fn minus_state() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_real(&[s, -s]).expect("dim 2")
}

pub fn j_operator(delta: f64) -> HermitianOperator {
    HermitianOperator::diagonal(&[1.0, 1.0 + delta])
}

/// Both candidate observables, prepared once.
#[derive(Clone, Debug)]
pub struct Discriminator {
    rule: MeasurementRule,
    identity: LudersObservable,
    deformed: LudersObservable,
    readout: [StateVector; 2],
}

impl Discriminator {
    pub fn new(delta: f64, rule: MeasurementRule) -> Result<Self> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::Param(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            rule,
            identity: LudersObservable::new(&HermitianOperator::identity(2), DEFAULT_GROUP_TOL)?,
            deformed: LudersObservable::new(&j_operator(delta), DEFAULT_GROUP_TOL)?,
            readout: [plus_state(), minus_state()],
        })
    }

    fn observable(&self, truth: Truth) -> &LudersObservable {
        match truth {
            Truth::I => &self.identity,
            Truth::J => &self.deformed,
        }
    }

    /// State left by the first apparatus; one uniform draw.
    pub fn first_measurement(&self, truth: Truth, rng: &mut RandomStream) -> Result<StateVector> {
        let phi = plus_state();
        match self.rule {
            MeasurementRule::Luders => Ok(self.observable(truth).measure(&phi, rng)?.post_state),
            MeasurementRule::VonNeumann => {
                let basis = [StateVector::basis(2, 0)?, StateVector::basis(2, 1)?];
                let labels = match truth {
                    Truth::I => [1.0, 1.0],
                    Truth::J => {
                        let ev = self.deformed.decomposition().eigenvalues();
                        [ev[0], ev[1]]
                    }
                };
                Ok(measure_von_neumann(&phi, &basis, &labels, rng)?.post_state)
            }
        }
    }

    /// One copy: first apparatus, then the `{+, −}` readout. Two uniform draws.
    pub fn copy(&self, truth: Truth, rng: &mut RandomStream) -> Result<Interference> {
        let state = self.first_measurement(truth, rng)?;
        let rec = measure_von_neumann(&state, &self.readout, &[1.0, -1.0], rng)?;
        Ok(if rec.group_id == 0 {
            Interference::Plus
        } else {
            Interference::Minus
        })
    }

    /// Declares `J` iff some copy reads `−`, stopping at the first `−`.
    pub fn decide(&self, truth: Truth, copies: usize, rng: &mut RandomStream) -> Result<Truth> {
        for _ in 0..copies {
            if self.copy(truth, rng)? == Interference::Minus {
                return Ok(Truth::J);
            }
        }
        Ok(Truth::I)
    }
}

pub fn distinguish_copy(truth: Truth, delta: f64, rng: &mut RandomStream) -> Result<Interference> {
    Discriminator::new(delta, MeasurementRule::Luders)?.copy(truth, rng)
}

/// Runs `cfg.trials` independent decisions on streams derived from `seed`.
/// A success is a correct decision, so the error rate is
/// [`ErrorEstimate::failure_rate`].
pub fn run_discrimination(
    cfg: &DistinguishConfig,
    seed: u64,
    parallelism: usize,
    confidence: f64,
) -> Result<ErrorEstimate> {
    cfg.validate()?;
    let disc = Discriminator::new(cfg.delta, cfg.rule)?;
    let correct = run_trials(cfg.trials, seed, parallelism, |_, rng| {
        Ok(disc.decide(cfg.truth, cfg.copies, rng)? == cfg.truth)
    })?;
    let successes = correct.iter().filter(|&&c| c).count() as u64;
    ErrorEstimate::from_counts(successes, cfg.trials as u64 - successes, confidence)
}
