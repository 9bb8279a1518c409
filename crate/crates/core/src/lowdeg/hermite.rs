//! Orthonormal (probabilists') Hermite polynomials and their moments under
//! finite symmetric distributions.

use super::logval::LogValue;
use crate::error::{invalid, Result};

pub const DEFAULT_MAX_DEGREE: usize = 64;

/// Rescaling step for the recurrence, keeps iterates inside f64 range.
const RESCALE: f64 = 1e100;

/// Evaluates `h_k`, normalized so that `E[h_j(z) h_k(z)] = δ_jk` for
/// `z ~ N(0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct HermiteEvaluator {
    max_degree: usize,
}

impl Default for HermiteEvaluator {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_DEGREE)
    }
}

impl HermiteEvaluator {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, k: usize) -> Result<()> {
        if k > self.max_degree {
            Err(invalid(format!(
                "Hermite degree {k} exceeds configured maximum {}",
                self.max_degree
            )))
        } else {
            Ok(())
        }
    }

    /// `h_k(z)` as sign and log-magnitude.
    ///
    /// Runs the normalized three-term recurrence
    /// `√(k+1) h_{k+1} = z h_k − √k h_{k−1}`, which is the monic recurrence
    /// with the `1/√(k!)` factor folded into each step, and rescales the
    /// iterates whenever they grow past `1e100`.
    pub fn eval_log(&self, k: usize, z: f64) -> Result<LogValue> {
        self.check(k)?;
        if k == 0 {
            return Ok(LogValue::ONE);
        }
        let mut prev = 1.0f64;
        let mut cur = z;
        let mut ln_scale = 0.0f64;
        for j in 1..k {
            let jf = j as f64;
            let next = (z * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                prev /= RESCALE;
                ln_scale += RESCALE.ln();
            }
        }
        Ok(LogValue::from_f64(cur).scale_ln(ln_scale))
    }

    pub fn eval(&self, k: usize, z: f64) -> Result<f64> {
        Ok(self.eval_log(k, z)?.to_f64())
    }

    /// `E[h_k(x)]` for `x` drawn from a finite symmetric distribution.
    pub fn moment(&self, k: usize, dist: &SymmetricAtoms) -> Result<LogValue> {
        self.check(k)?;
        if k % 2 == 1 {
            return Ok(LogValue::ZERO);
        }
        let mut acc = LogValue::ZERO;
        if dist.zero_mass > 0.0 {
            acc = self.eval_log(k, 0.0)?.scale_ln(dist.zero_mass.ln());
        }
        for &(x, mass) in &dist.atoms {
            if mass > 0.0 {
                acc = acc + self.eval_log(k, x)?.scale_ln(mass.ln());
            }
        }
        Ok(acc)
    }
}

pub fn hermite_eval(k: usize, z: f64) -> Result<f64> {
    HermiteEvaluator::default().eval(k, z)
}

pub fn hermite_eval_log(k: usize, z: f64) -> Result<LogValue> {
    HermiteEvaluator::default().eval_log(k, z)
}

/// A distribution on `R` symmetric about 0 with finitely many atoms: mass
/// `zero_mass` at 0, and for each `(x, p)` mass `p/2` at each of `±x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricAtoms {
    pub zero_mass: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl SymmetricAtoms {
    pub fn new(zero_mass: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if zero_mass < 0.0
            || atoms
                .iter()
                .any(|&(x, p)| x.is_nan() || x <= 0.0 || p < 0.0 || !x.is_finite())
        {
            return Err(invalid("atoms need positive locations and nonnegative masses"));
        }
        let total = zero_mass + atoms.iter().map(|a| a.1).sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("atom masses sum to {total}, not 1")));
        }
        Ok(Self { zero_mass, atoms })
    }

    /// `BR(ρ)`: 0 w.p. `1 − ρ`, `±1/√ρ` w.p. `ρ/2` each.
    pub fn bernoulli_rademacher(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
        }
        Ok(Self {
            zero_mass: 1.0 - rho,
            atoms: vec![(1.0 / rho.sqrt(), rho)],
        })
    }
}

pub fn hermite_moment(k: usize, dist: &SymmetricAtoms) -> Result<LogValue> {
    HermiteEvaluator::new(k.max(DEFAULT_MAX_DEGREE)).moment(k, dist)
}

/// `E[h_k(x)]` for `x ~ BR(ρ)`.
pub fn hermite_moment_br(k: usize, rho: f64) -> Result<f64> {
    Ok(hermite_moment(k, &SymmetricAtoms::bernoulli_rademacher(rho)?)?.to_f64())
}

/// Monomial coefficients of `h_k` (index `r` holds the coefficient of
/// `z^r`), from the integer recurrence `He_{k+1} = z He_k − k He_{k−1}`
/// and a final `1/√(k!)`.
pub fn hermite_coefficients(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0f64];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..k {
        let mut next = vec![0.0f64; j + 2];
        for (r, c) in cur.iter().enumerate() {
            next[r + 1] += c;
        }
        for (r, c) in prev.iter().enumerate() {
            next[r] -= j as f64 * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    let norm = (-0.5 * ln_fact).exp();
    cur.into_iter().map(|c| c * norm).collect()
}
