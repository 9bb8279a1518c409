//! Detection tests: null (all-Gaussian) versus planted.
//!
//! * Spectral-norm test: declare planted when `‖M̃‖ > c₁/(6Nρ)`.
//! * ℓ1/ℓ2 test on a candidate in the column span: declare planted when
//!   `|‖x‖₁/‖x‖₂ − √(2N/π)| ≥ c₁√N/4`.
//! * Reduction: feed the spectral estimate `Ỹû` into the ℓ1/ℓ2 test.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{invalid, PvError, Result};
use crate::model_gen::{sample_detection_pair, BasisMatrix, Hypothesis};
use crate::rng::{stable_hash, SeedSpec};
use crate::spectral::{build_statistic, estimate_direction, recover_orthonormal_rule, SpectralStatistic};

pub const DEFAULT_C1: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    SpectralNorm,
    /// ℓ1/ℓ2 test applied to the spectral estimate (the reduction pipeline).
    L1L2,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::SpectralNorm => "spectral",
            TestKind::L1L2 => "l1l2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub statistic_value: f64,
    pub threshold: f64,
    pub decision: Hypothesis,
    pub test_kind: TestKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateReport {
    /// Fraction of null draws judged planted.
    pub type_i: f64,
    /// Fraction of planted draws judged null.
    pub type_ii: f64,
    pub trials: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
    pub c1: f64,
    pub test_kind: TestKind,
}

impl ErrorRateReport {
    pub fn total_error(&self) -> f64 {
        self.type_i + self.type_ii
    }

    pub const CSV_HEADER: &'static str = "N,n,rho,c1,test,trials,type1,type2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.ambient_dim,
            self.subspace_dim,
            self.rho,
            self.c1,
            self.test_kind.as_str(),
            self.trials,
            self.type_i,
            self.type_ii
        )
    }
}

/// Decision level `c₁/(6Nρ)` of the spectral-norm test.
pub fn spectral_threshold(ambient_dim: usize, rho: f64, c1: f64) -> f64 {
    c1 / (6.0 * ambient_dim as f64 * rho)
}

pub fn spectral_norm_test(y: &BasisMatrix, rho: f64, c1: f64) -> Result<DetectionOutcome> {
    spectral_norm_test_on(&build_statistic(y, true), rho, c1)
}

/// Spectral-norm test on a precomputed statistic.
pub fn spectral_norm_test_on(stat: &SpectralStatistic, rho: f64, c1: f64) -> Result<DetectionOutcome> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let statistic_value = stat.spectral_norm();
    let threshold = spectral_threshold(stat.rows, rho, c1);
    Ok(DetectionOutcome {
        statistic_value,
        threshold,
        decision: if statistic_value > threshold {
            Hypothesis::Planted
        } else {
            Hypothesis::Null
        },
        test_kind: TestKind::SpectralNorm,
    })
}

/// `‖x‖₁ / ‖x‖₂`.
pub fn l1_l2_ratio(x: &DVector<f64>) -> Result<f64> {
    let l2 = x.norm();
    if l2 == 0.0 {
        return Err(PvError::ZeroVector);
    }
    Ok(x.lp_norm(1) / l2)
}

pub fn l1l2_test(candidate: &DVector<f64>, c1: f64) -> Result<DetectionOutcome> {
    let ratio = l1_l2_ratio(candidate)?;
    let n = candidate.len() as f64;
    let statistic_value = (ratio - (2.0 * n / PI).sqrt()).abs();
    let threshold = c1 * n.sqrt() / 4.0;
    Ok(DetectionOutcome {
        statistic_value,
        threshold,
        decision: if statistic_value >= threshold {
            Hypothesis::Planted
        } else {
            Hypothesis::Null
        },
        test_kind: TestKind::L1L2,
    })
}

/// Estimate, then test: the spectral estimate lies in the column span, so it
/// is a valid input for the ℓ1/ℓ2 test.
pub fn detect_via_estimation(y: &BasisMatrix, c1: f64) -> Result<DetectionOutcome> {
    let est = estimate_direction(y)?;
    l1l2_test(&est.raw_estimate, c1)
}

/// Plug-in sparsity estimate: support fraction of the orthonormal-rule
/// rounding of a candidate. Exploration only; the tests above take `ρ` as
/// known.
pub fn plugin_rho(candidate: &DVector<f64>) -> Result<f64> {
    let out = recover_orthonormal_rule(candidate)?;
    let support = out.recovered.iter().filter(|x| **x != 0.0).count();
    Ok(support as f64 / candidate.len() as f64)
}

/// Run a test on one draw.
pub fn run_test(y: &BasisMatrix, rho: f64, c1: f64, kind: TestKind) -> Result<DetectionOutcome> {
    match kind {
        TestKind::SpectralNorm => spectral_norm_test(y, rho, c1),
        TestKind::L1L2 => detect_via_estimation(y, c1),
    }
}

/// Stream index of trial `trial` under hypothesis `which`.
pub fn trial_stream(which: Hypothesis, trial: usize) -> u64 {
    let tag = match which {
        Hypothesis::Null => 0u64,
        Hypothesis::Planted => 1u64,
    };
    stable_hash(&[tag, trial as u64])
}

/// Empirical type I and type II error over `trials` independent null and
/// planted draws.
#[allow(clippy::too_many_arguments)]
pub fn error_rates(
    ambient_dim: usize,
    subspace_dim: usize,
    rho: f64,
    c1: f64,
    trials: usize,
    test_kind: TestKind,
    seed: u64,
) -> Result<ErrorRateReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let count = |which: Hypothesis| -> Result<usize> {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let spec = SeedSpec::new(seed, trial_stream(which, t));
                let sample = sample_detection_pair(ambient_dim, subspace_dim, rho, spec, which)?;
                let outcome = match run_test(&sample.observed, rho, c1, test_kind) {
                    Ok(o) => o.decision,
                    // A zero candidate carries no evidence of a planted vector.
                    Err(PvError::ZeroVector) => Hypothesis::Null,
                    Err(e) => return Err(e),
                };
                Ok(usize::from(outcome != which))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let false_alarms = count(Hypothesis::Null)?;
    let misses = count(Hypothesis::Planted)?;
    Ok(ErrorRateReport {
        type_i: false_alarms as f64 / trials as f64,
        type_ii: misses as f64 / trials as f64,
        trials,
        ambient_dim,
        subspace_dim,
        rho,
        c1,
        test_kind,
    })
}
