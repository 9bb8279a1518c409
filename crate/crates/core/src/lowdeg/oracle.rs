//! Direct enumeration of the advantage sum over every `α ∈ ℕ^N` with
//! `|α| ≤ D`. Shares no code path with [`super::advantage`]: Hermite
//! moments come from the monomial expansion against the raw moments
//! `E[x^r] = ρ^{1 − r/2}`, and sphere moments from the product form
//! `Π_{j<d/2} (2j+1)/(n+2j)`.

use super::hermite::hermite_coefficients;
use crate::error::{invalid, PvError, Result};

pub const BRUTE_MAX_AMBIENT: usize = 5;
pub const BRUTE_MAX_DEGREE: usize = 12;

fn br_moment_by_expansion(k: usize, rho: f64) -> f64 {
    hermite_coefficients(k)
        .iter()
        .enumerate()
        .map(|(r, c)| match r {
            0 => *c,
            r if r % 2 == 1 => 0.0,
            r => c * rho.powf(1.0 - r as f64 / 2.0),
        })
        .sum()
}

fn sphere_moment_product(n: usize, d: usize) -> f64 {
    if d % 2 == 1 {
        return 0.0;
    }
    (0..d / 2).map(|j| (2 * j + 1) as f64 / (n + 2 * j) as f64).product()
}

/// Accumulate `Π_i sq[α_i]` into `by_degree[|α|]` for every `α` over the
/// remaining `coords` coordinates with total at most `budget`.
fn enumerate(coords: usize, used: usize, weight: f64, max_degree: usize, sq: &[f64], by_degree: &mut [f64]) {
    if coords == 0 {
        by_degree[used] += weight;
        return;
    }
    for a in 0..=(max_degree - used) {
        enumerate(coords - 1, used + a, weight * sq[a], max_degree, sq, by_degree);
    }
}

/// Oracle for [`super::advantage`], restricted to `N ≤ 5` and `D ≤ 12`.
pub fn advantage_bruteforce(ambient_dim: usize, subspace_dim: usize, rho: f64, max_degree: usize) -> Result<f64> {
    if ambient_dim == 0 || ambient_dim > BRUTE_MAX_AMBIENT {
        return Err(PvError::GuardViolation(format!(
            "N = {ambient_dim} outside 1..={BRUTE_MAX_AMBIENT}"
        )));
    }
    if max_degree > BRUTE_MAX_DEGREE {
        return Err(PvError::GuardViolation(format!(
            "D = {max_degree} exceeds {BRUTE_MAX_DEGREE}"
        )));
    }
    if subspace_dim == 0 {
        return Err(invalid("subspace dimension must be positive"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let sq: Vec<f64> = (0..=max_degree)
        .map(|k| br_moment_by_expansion(k, rho).powi(2))
        .collect();
    let mut by_degree = vec![0.0f64; max_degree + 1];
    enumerate(ambient_dim, 0, 1.0, max_degree, &sq, &mut by_degree);
    let adv_squared: f64 = by_degree
        .iter()
        .enumerate()
        .map(|(d, s)| sphere_moment_product(subspace_dim, d) * s)
        .sum();
    Ok(adv_squared.sqrt())
}
