//! Exact low-degree advantage for the planted-vector detection problem.
//!
//! In the equivalent "non-Gaussian direction" formulation, a planted draw has
//! i.i.d. rows that follow `ν = BR(ρ)` along a uniformly random unit
//! direction `u ∈ R^n` and are standard Gaussian orthogonally to it. Then
//!
//! ```text
//! Adv≤D² = Σ_{d=0}^{D} E⟨u,u′⟩^d · Σ_{α ∈ ℕ^N, |α| = d} Π_i (E_ν h_{α_i})²
//! ```
//!
//! Only index vectors whose nonzero entries are even and at least 4
//! contribute, so the inner sum collapses to
//! `Σ_m C(N, m) · g(d, m)` with `g` a sum over ordered compositions of `d`
//! into `m` admissible parts. [`advantage`] evaluates this in log space;
//! [`advantage_bruteforce`] enumerates `α` directly and serves as an oracle.

mod advantage;
mod hermite;
mod logval;
mod oracle;
mod sphere;

pub use advantage::{
    admissible_count, advantage, advantage_with, composition_count, composition_sum, composition_sum_ln,
    AdvantageBreakdown, DegreeTerm, RHO_FLOOR,
};
pub use hermite::{
    hermite_coefficients, hermite_eval, hermite_eval_log, hermite_moment, hermite_moment_br, HermiteEvaluator,
    SymmetricAtoms, DEFAULT_MAX_DEGREE,
};
pub use logval::LogValue;
pub use oracle::{advantage_bruteforce, BRUTE_MAX_AMBIENT, BRUTE_MAX_DEGREE};
pub use sphere::{sphere_moment, sphere_moment_ln};
