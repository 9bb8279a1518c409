use super::hermite::{HermiteEvaluator, SymmetricAtoms};
use super::logval::log_sum_exp;
use super::sphere::sphere_moment_ln;
use crate::error::{invalid, Result};

/// Smallest sparsity accepted by [`advantage`].
pub const RHO_FLOOR: f64 = 1e-6;

/// Smallest EXP argument that still yields a positive normal f64.
const LN_MIN_POSITIVE: f64 = -708.396_418_532_264_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeTerm {
    pub d: usize,
    pub sphere_moment: f64,
    /// `Σ_{|α| = d} Π_i (E h_{α_i})²`; may be `inf` when only the log fits.
    pub alpha_sum: f64,
    pub ln_alpha_sum: f64,
    pub contribution: f64,
    pub ln_contribution: f64,
    /// The contribution was too small for f64 and was flushed to 0.
    pub underflow: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageBreakdown {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
    pub max_degree: usize,
    /// One entry per even `d` in `0..=D`.
    pub per_degree: Vec<DegreeTerm>,
    pub adv_squared: f64,
    pub adv: f64,
    pub ln_adv_squared: f64,
    pub log_space: bool,
}

impl AdvantageBreakdown {
    pub const CSV_HEADER: &'static str = "d,sphere_moment,alpha_sum,contribution";

    pub fn ln_adv(&self) -> f64 {
        0.5 * self.ln_adv_squared
    }
}

/// Log-domain table of `g(r, j)`: the sum over ordered compositions of `r`
/// into `j` parts from the admissible part set of `Π (E h_part)²`.
struct CompositionTable {
    min_part: usize,
    /// `ln_g[r][j]`.
    ln_g: Vec<Vec<f64>>,
}

impl CompositionTable {
    fn new(ln_sq: Vec<f64>, min_part: usize, max_mass: usize) -> Self {
        let max_parts = max_mass / min_part;
        let mut ln_g = vec![vec![f64::NEG_INFINITY; max_parts + 1]; max_mass + 1];
        ln_g[0][0] = 0.0;
        let mut scratch = Vec::with_capacity(max_mass);
        for r in 1..=max_mass {
            for j in 1..=max_parts.min(r / min_part) {
                scratch.clear();
                let mut a = min_part;
                while a <= r {
                    let rest = ln_g[r - a][j - 1];
                    if rest > f64::NEG_INFINITY && ln_sq[a] > f64::NEG_INFINITY {
                        scratch.push(ln_sq[a] + rest);
                    }
                    a += 2;
                }
                ln_g[r][j] = log_sum_exp(&scratch);
            }
        }
        Self { min_part, ln_g }
    }

    fn ln_g(&self, d: usize, m: usize) -> f64 {
        self.ln_g
            .get(d)
            .and_then(|row| row.get(m))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }
}

fn squared_moment_logs(dist: &SymmetricAtoms, max_degree: usize, min_part: usize) -> Result<Vec<f64>> {
    let eval = HermiteEvaluator::new(max_degree.max(1));
    (0..=max_degree)
        .map(|k| {
            if k < min_part || k % 2 == 1 {
                Ok(f64::NEG_INFINITY)
            } else {
                Ok(eval.moment(k, dist)?.square().ln_abs)
            }
        })
        .collect()
}

fn br_table(rho: f64, max_mass: usize) -> Result<CompositionTable> {
    check_br_rho(rho)?;
    let dist = SymmetricAtoms::bernoulli_rademacher(rho)?;
    let ln_sq = squared_moment_logs(&dist, max_mass, 4)?;
    Ok(CompositionTable::new(ln_sq, 4, max_mass))
}

fn check_br_rho(rho: f64) -> Result<()> {
    if (RHO_FLOOR..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(invalid(format!("rho must lie in [{RHO_FLOOR}, 1], got {rho}")))
    }
}

/// `ln g(d, m)` for `ν = BR(ρ)`, with parts in `{4, 6, 8, …}`.
pub fn composition_sum_ln(d: usize, m: usize, rho: f64) -> Result<f64> {
    if d % 2 == 1 || m == 0 && d > 0 || 4 * m > d {
        return Ok(if d == 0 && m == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    Ok(br_table(rho, d)?.ln_g(d, m))
}

/// `g(d, m) = Σ over ordered compositions (a₁,…,a_m) of d into even parts
/// ≥ 4 of Π_j (E h_{a_j}(x))²` with `x ~ BR(ρ)`. Empty (zero) when `d < 4m`.
pub fn composition_sum(d: usize, m: usize, rho: f64) -> Result<f64> {
    Ok(composition_sum_ln(d, m, rho)?.exp())
}

/// Number of ordered compositions of `d` into `m` even parts each ≥ 4, i.e.
/// the number of terms `g(d, m)` sums.
pub fn composition_count(d: usize, m: usize) -> u128 {
    let mut table = vec![vec![0u128; m + 1]; d + 1];
    table[0][0] = 1;
    for r in 1..=d {
        for j in 1..=m {
            let mut a = 4;
            while a <= r {
                table[r][j] += table[r - a][j - 1];
                a += 2;
            }
        }
    }
    table[d][m]
}

/// `|A(d, m)| = C(N, m) · composition_count(d, m)`: index vectors in `ℕ^N`
/// with total `d`, support `m` and every nonzero entry even and ≥ 4.
pub fn admissible_count(ambient_dim: usize, d: usize, m: usize) -> u128 {
    if m > ambient_dim {
        return 0;
    }
    let mut binom: u128 = 1;
    for j in 0..m {
        binom = binom * (ambient_dim - j) as u128 / (j + 1) as u128;
    }
    binom * composition_count(d, m)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln()).sum()
}

/// Exact `Adv≤D` for the planted-vector detection problem with `ν = BR(ρ)`.
pub fn advantage(ambient_dim: usize, subspace_dim: usize, rho: f64, max_degree: usize) -> Result<AdvantageBreakdown> {
    check_br_rho(rho)?;
    let dist = SymmetricAtoms::bernoulli_rademacher(rho)?;
    let mut out = advantage_with(ambient_dim, subspace_dim, &dist, max_degree)?;
    out.rho = rho;
    Ok(out)
}

/// `Adv≤D` for a general finite symmetric `ν`.
///
/// When `ν` has unit variance, `E h_2 = 0` and the admissible parts start at
/// 4; otherwise parts of size 2 contribute too. `rho` in the result is `NaN`
/// since it has no meaning here.
pub fn advantage_with(
    ambient_dim: usize,
    subspace_dim: usize,
    dist: &SymmetricAtoms,
    max_degree: usize,
) -> Result<AdvantageBreakdown> {
    if ambient_dim == 0 || subspace_dim == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    let second_moment: f64 = dist.atoms.iter().map(|&(x, p)| p * x * x).sum();
    let min_part = if (second_moment - 1.0).abs() <= 1e-12 { 4 } else { 2 };
    let ln_sq = squared_moment_logs(dist, max_degree, min_part)?;
    let table = CompositionTable::new(ln_sq, min_part, max_degree);

    let mut per_degree = Vec::with_capacity(max_degree / 2 + 1);
    for d in (0..=max_degree).step_by(2) {
        let ln_sphere = sphere_moment_ln(subspace_dim, d);
        let ln_alpha = if d == 0 {
            0.0
        } else {
            let max_parts = (d / table.min_part).min(ambient_dim);
            let terms: Vec<f64> = (1..=max_parts)
                .map(|m| ln_binomial(ambient_dim, m) + table.ln_g(d, m))
                .filter(|t| *t > f64::NEG_INFINITY)
                .collect();
            log_sum_exp(&terms)
        };
        let ln_contribution = ln_sphere + ln_alpha;
        let underflow = ln_contribution > f64::NEG_INFINITY && ln_contribution < LN_MIN_POSITIVE;
        per_degree.push(DegreeTerm {
            d,
            sphere_moment: ln_sphere.exp(),
            alpha_sum: ln_alpha.exp(),
            ln_alpha_sum: ln_alpha,
            contribution: if underflow { 0.0 } else { ln_contribution.exp() },
            ln_contribution,
            underflow,
        });
    }

    let adv_squared: f64 = per_degree.iter().map(|t| t.contribution).sum();
    let ln_terms: Vec<f64> = per_degree.iter().map(|t| t.ln_contribution).collect();
    let ln_adv_squared = log_sum_exp(&ln_terms);
    // Keep the direct sum when it is finite (better relative accuracy).
    let ln_adv_squared = if adv_squared.is_finite() {
        adv_squared.ln()
    } else {
        ln_adv_squared
    };
    Ok(AdvantageBreakdown {
        ambient_dim,
        subspace_dim,
        rho: f64::NAN,
        max_degree,
        per_degree,
        adv_squared,
        adv: adv_squared.sqrt(),
        ln_adv_squared,
        log_space: true,
    })
}
