//! Centered degree-4 spectral estimator.
//!
//! For an observed `N × n` basis with rows `y_i`, the statistic is
//!
//! ```text
//! M = Σ_i (‖y_i‖² − (n−1)/N) y_i y_iᵀ − (3/N) I_n
//! ```
//!
//! Its eigenvector of largest-magnitude eigenvalue `û` gives the estimate
//! `Y û` of the planted vector (up to a global sign). The `−(3/N) I` term
//! removes the Gaussian fourth-moment baseline; without it the dense case
//! `ρ = 1` is lost to the noise directions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, PvError, Result};
use crate::model_gen::{BasisKind, BasisMatrix, Model, PlantedVector};

/// Relative width of an eigenvalue-magnitude tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralStatistic {
    pub matrix: DMatrix<f64>,
    pub centered: bool,
    pub source_kind: BasisKind,
    /// `N`, the number of rows of the basis it was built from.
    pub rows: usize,
}

impl SpectralStatistic {
    /// Wrap an arbitrary symmetric matrix, e.g. for synthetic tests.
    pub fn from_matrix(matrix: DMatrix<f64>, rows: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("statistic must be square"));
        }
        Ok(Self {
            matrix,
            centered: true,
            source_kind: BasisKind::Null,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub statistic: SpectralStatistic,
    pub leading_value: f64,
    pub leading_vector: DVector<f64>,
    pub raw_estimate: DVector<f64>,
    /// Largest minus second-largest singular value of the statistic.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOutput {
    pub recovered: DVector<f64>,
    pub threshold_used: f64,
    /// Sign applied to the raw estimate before thresholding. The rules
    /// never flip, so this is always `+1`; alignment happens in [`score`].
    pub sign_convention: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_error: f64,
    /// `max_j |est_j − v_j| / (|v_j| + 1/√N)`.
    pub entrywise_max_weighted: f64,
    pub exact_match: bool,
    pub sign_used: f64,
}

/// Build the degree-4 statistic. Accumulates one rank-one update per row in
/// index order over the upper triangle, then mirrors it.
pub fn build_statistic(y: &BasisMatrix, centered: bool) -> SpectralStatistic {
    let (rows, n) = y.data.shape();
    let inv_n = 1.0 / rows as f64;
    let row_offset = (n as f64 - 1.0) * inv_n;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut row = vec![0.0f64; n];
    for i in 0..rows {
        for (j, r) in row.iter_mut().enumerate() {
            *r = y.data[(i, j)];
        }
        let weight = row.iter().map(|x| x * x).sum::<f64>() - row_offset;
        for b in 0..n {
            let wb = weight * row[b];
            let mut col = m.column_mut(b);
            for a in 0..=b {
                col[a] += wb * row[a];
            }
        }
    }
    for b in 0..n {
        for a in 0..b {
            m[(b, a)] = m[(a, b)];
        }
    }
    if centered {
        for a in 0..n {
            m[(a, a)] -= 3.0 * inv_n;
        }
    }
    SpectralStatistic {
        matrix: m,
        centered,
        source_kind: y.kind,
        rows,
    }
}

/// Eigenpair of largest `|λ|` of a symmetric matrix, with the gap between
/// the two largest singular values.
///
/// Ties in `|λ|` go to the positive eigenvalue. The eigenvector is signed so
/// its largest-magnitude coordinate is positive.
pub fn leading_eigenpair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>, f64)> {
    let n = m.nrows();
    if n == 0 || !m.is_square() {
        return Err(invalid("leading_eigenpair needs a nonempty square matrix"));
    }
    let eig = SymmetricEigen::new(m.clone());
    let values = &eig.eigenvalues;
    let scale = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tie = TIE_TOL * scale;

    let mut best = 0;
    for i in 1..n {
        let (cur, cand) = (values[best], values[i]);
        if cand.abs() > cur.abs() + tie || ((cand.abs() - cur.abs()).abs() <= tie && cand > cur) {
            best = i;
        }
    }

    let mut singular: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    singular.sort_by(|a, b| b.total_cmp(a));
    let gap = singular[0] - singular.get(1).copied().unwrap_or(0.0);

    let mut u = eig.eigenvectors.column(best).into_owned();
    canonicalize_sign(&mut u);
    Ok((values[best], u, gap))
}

fn canonicalize_sign(u: &mut DVector<f64>) {
    let mut idx = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[idx].abs() {
            idx = i;
        }
    }
    if u[idx] < 0.0 {
        u.neg_mut();
    }
}

/// Statistic, leading eigenpair and `Y û` in one call (centered statistic).
pub fn estimate_direction(y: &BasisMatrix) -> Result<SpectralResult> {
    estimate_direction_with(y, true)
}

pub fn estimate_direction_with(y: &BasisMatrix, centered: bool) -> Result<SpectralResult> {
    let statistic = build_statistic(y, centered);
    let (leading_value, leading_vector, gap) = leading_eigenpair(&statistic.matrix)?;
    let raw_estimate = &y.data * &leading_vector;
    Ok(SpectralResult {
        statistic,
        leading_value,
        leading_vector,
        raw_estimate,
        gap,
    })
}

fn signum_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gaussian-basis rounding: `sign(raw_j)/√(Nρ)` wherever `|raw_j| ≥ 0.5/√(Nρ)`.
pub fn recover_gaussian_rule(raw: &DVector<f64>, rho: f64) -> Result<RecoveryOutput> {
    let magnitude = PlantedVector::entry_magnitude(raw.len(), rho);
    recover_gaussian_rule_at(raw, rho, 0.5 * magnitude)
}

/// [`recover_gaussian_rule`] with an explicit threshold level.
pub fn recover_gaussian_rule_at(raw: &DVector<f64>, rho: f64, threshold: f64) -> Result<RecoveryOutput> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let magnitude = PlantedVector::entry_magnitude(raw.len(), rho);
    let recovered = raw.map(|x| {
        if x.abs() >= threshold {
            signum_or_zero(x) * magnitude
        } else {
            0.0
        }
    });
    Ok(RecoveryOutput {
        recovered,
        threshold_used: threshold,
        sign_convention: 1.0,
    })
}

/// Orthonormal-basis rounding, which needs no knowledge of `ρ`: keep the
/// signs of entries with `|raw_j| ≥ 0.5 · max_i |raw_i|`, then normalize.
pub fn recover_orthonormal_rule(raw: &DVector<f64>) -> Result<RecoveryOutput> {
    recover_orthonormal_rule_at(raw, 0.5)
}

pub fn recover_orthonormal_rule_at(raw: &DVector<f64>, fraction: f64) -> Result<RecoveryOutput> {
    let peak = raw.amax();
    if peak == 0.0 || !peak.is_finite() {
        return Err(PvError::ZeroVector);
    }
    let threshold = fraction * peak;
    let mut recovered = raw.map(|x| if x.abs() >= threshold { signum_or_zero(x) } else { 0.0 });
    let norm = recovered.norm();
    recovered /= norm;
    Ok(RecoveryOutput {
        recovered,
        threshold_used: threshold,
        sign_convention: 1.0,
    })
}

/// Model-appropriate rounding of a raw estimate.
pub fn recover(raw: &DVector<f64>, rho: f64, model: Model) -> Result<RecoveryOutput> {
    match model {
        Model::Gaussian => recover_gaussian_rule(raw, rho),
        Model::Orthonormal => recover_orthonormal_rule(raw),
    }
}

/// Error metrics after choosing the global sign that minimizes the ℓ2 error.
pub fn score(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<ErrorReport> {
    if estimate.len() != truth.len() {
        return Err(PvError::DimensionMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let plus = (estimate - truth).norm();
    let minus = (estimate + truth).norm();
    let sign_used = if minus < plus { -1.0 } else { 1.0 };
    let l2_error = plus.min(minus);

    let floor = 1.0 / (truth.len() as f64).sqrt();
    let mut worst = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (e, v) in estimate.iter().zip(truth.iter()) {
        let d = (sign_used * e - v).abs();
        worst = worst.max(d / (v.abs() + floor));
        worst_abs = worst_abs.max(d);
    }
    // Thresholded outputs and the truth agree to rounding when the support
    // and signs match; anything larger is a genuine mismatch.
    let exact_tol = 1e-9 * truth.amax().max(f64::MIN_POSITIVE);
    Ok(ErrorReport {
        l2_error,
        entrywise_max_weighted: worst,
        exact_match: worst_abs <= exact_tol,
        sign_used,
    })
}

/// Outcome of checking the rank-one eigenvector perturbation bound
/// `‖u₁ − ũ₁‖ ≤ 2√2 |ρ| ‖b‖ |bᵀu₁| / Δ` (valid when `|ρ|‖b‖² ≤ Δ/4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOneCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub applicable: bool,
    pub gap: f64,
}

pub fn rank_one_bound_check(a: &DMatrix<f64>, rho: f64, b: &DVector<f64>) -> Result<RankOneCheck> {
    if a.nrows() != b.len() {
        return Err(PvError::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let (_, u1, gap) = leading_eigenpair(a)?;
    let perturbed = a + (b * b.transpose()) * rho;
    let (_, u1_tilde, _) = leading_eigenpair(&perturbed)?;
    let lhs = (&u1 - &u1_tilde).norm().min((&u1 + &u1_tilde).norm());
    let b_norm = b.norm();
    let applicable = gap > 0.0 && rho.abs() * b_norm * b_norm <= gap / 4.0;
    let rhs = if gap > 0.0 {
        2.0 * std::f64::consts::SQRT_2 * rho.abs() * b_norm * b.dot(&u1).abs() / gap
    } else {
        f64::INFINITY
    };
    Ok(RankOneCheck {
        lhs,
        rhs,
        applicable,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_gen::{generate_instance, rerotate, InstanceParams};
    use crate::SeedSpec;

    fn basis(data: DMatrix<f64>) -> BasisMatrix {
        BasisMatrix {
            data,
            kind: BasisKind::Rotated,
        }
    }

    #[test]
    fn one_by_one_statistic_by_hand() {
        let s = build_statistic(&basis(DMatrix::from_element(1, 1, 1.0)), true);
        assert_eq!(s.matrix[(0, 0)], -2.0);
    }

    #[test]
    fn single_unit_column_gives_l4_minus_baseline() {
        let v = DVector::from_vec(vec![0.6, -0.8, 0.0, 0.0]);
        let s = build_statistic(&basis(DMatrix::from_column_slice(4, 1, v.as_slice())), true);
        let l4: f64 = v.iter().map(|x| x.powi(4)).sum();
        assert!((s.matrix[(0, 0)] - (l4 - 3.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn centering_shifts_by_three_over_n() {
        let inst = generate_instance(InstanceParams::new(60, 5, 0.3, Model::Gaussian, SeedSpec::new(1, 1))).unwrap();
        let c = build_statistic(&inst.observed, true);
        let u = build_statistic(&inst.observed, false);
        let diff = &u.matrix - &c.matrix;
        for a in 0..5 {
            for b in 0..5 {
                let expect = if a == b { 3.0 / 60.0 } else { 0.0 };
                assert!((diff[(a, b)] - expect).abs() < 1e-15);
            }
        }
        assert_eq!(c.matrix, c.matrix.transpose());
    }

    #[test]
    fn leading_pair_of_diagonal() {
        let (l, u, gap) = leading_eigenpair(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0]))).unwrap();
        assert_eq!(l, -2.0);
        assert!((u[1].abs() - 1.0).abs() < 1e-15 && u[0].abs() < 1e-15);
        assert!((gap - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum_breaks_tie_to_positive() {
        let (l, _, gap) = leading_eigenpair(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5]))).unwrap();
        assert_eq!(l, 0.5);
        assert_eq!(gap, 0.0);
        let (l, _, gap) = leading_eigenpair(&DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, 0.5]))).unwrap();
        assert_eq!(l, 0.5);
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn eigenvector_sign_is_canonical() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (_, u, _) = leading_eigenpair(&m).unwrap();
        assert!(u.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn rank_one_instance_returns_plus_minus_v() {
        let inst = generate_instance(InstanceParams::new(50, 1, 0.3, Model::Gaussian, SeedSpec::new(3, 0))).unwrap();
        let r = estimate_direction(&inst.observed).unwrap();
        let v = &inst.truth.entries;
        let d = (&r.raw_estimate - v).norm().min((&r.raw_estimate + v).norm());
        assert!(d < 1e-15);
        assert!((r.leading_vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_residual_is_small() {
        let inst = generate_instance(InstanceParams::new(500, 12, 0.05, Model::Gaussian, SeedSpec::new(4, 0))).unwrap();
        let r = estimate_direction(&inst.observed).unwrap();
        let m = &r.statistic.matrix;
        let resid = (m * &r.leading_vector - &r.leading_vector * r.leading_value).norm();
        assert!(resid <= 1e-8 * m.norm());
    }

    #[test]
    fn gaussian_rule_examples() {
        let (n, rho) = (400usize, 0.1);
        let mag = PlantedVector::entry_magnitude(n, rho);
        let v = DVector::from_fn(n, |i, _| match i % 20 {
            0 => mag,
            1 => -mag,
            _ => 0.0,
        });
        assert_eq!(recover_gaussian_rule(&v, rho).unwrap().recovered, v);
        let zero = DVector::zeros(n);
        assert_eq!(recover_gaussian_rule(&zero, rho).unwrap().recovered, zero);
        // Perturbation below half the entry magnitude never changes a decision.
        let noisy = DVector::from_fn(n, |i, _| v[i] + if i % 3 == 0 { 0.4 * mag } else { -0.4 * mag });
        let out = recover_gaussian_rule(&noisy, rho).unwrap();
        assert_eq!(out.recovered, v);
        assert!((out.threshold_used - 0.5 * mag).abs() < 1e-18);
    }

    #[test]
    fn orthonormal_rule_examples() {
        let out = recover_orthonormal_rule(&DVector::from_vec(vec![1.0, -1.0, 0.2])).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((out.recovered - DVector::from_vec(vec![s, -s, 0.0])).norm() < 1e-15);
        assert!(matches!(
            recover_orthonormal_rule(&DVector::zeros(3)),
            Err(PvError::ZeroVector)
        ));
    }

    #[test]
    fn orthonormal_rule_is_scale_invariant() {
        let v = DVector::from_vec(vec![0.0, 0.5, -0.5, 0.0, 0.5, 0.0, -0.5, 0.0]);
        for c in [3.0, -0.01, 1e6] {
            let out = recover_orthonormal_rule(&(&v * c)).unwrap();
            let rep = score(&out.recovered, &v).unwrap();
            assert!(rep.exact_match, "c = {c}");
        }
    }

    #[test]
    fn score_examples() {
        let v = DVector::from_vec(vec![0.5, -0.5, 0.5, 0.5]);
        let rep = score(&-&v, &v).unwrap();
        assert_eq!(rep.l2_error, 0.0);
        assert_eq!(rep.sign_used, -1.0);
        assert!(rep.exact_match);

        let mut e = v.clone();
        e[0] += 0.125;
        assert!((score(&e, &v).unwrap().l2_error - 0.125).abs() < 1e-15);

        let w = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let shifted = w.map(|x| x + 0.5);
        let rep = score(&shifted, &w).unwrap();
        assert!(rep.entrywise_max_weighted <= 1.0 + 1e-15);
        assert!(!rep.exact_match);
    }

    #[test]
    fn score_length_mismatch() {
        assert!(score(&DVector::zeros(3), &DVector::zeros(4)).is_err());
    }

    #[test]
    fn rank_one_trivial_cases() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let c = rank_one_bound_check(&a, 0.1, &b).unwrap();
        assert!(c.applicable);
        assert_eq!(c.rhs, 0.0);
        assert!(c.lhs < 1e-15);

        let b = DVector::from_vec(vec![0.3, 0.7]);
        let c = rank_one_bound_check(&a, 0.0, &b).unwrap();
        assert!(c.lhs < 1e-15 && c.rhs == 0.0);
    }

    #[test]
    fn rank_one_zero_gap_not_applicable() {
        let a = DMatrix::<f64>::identity(3, 3);
        let c = rank_one_bound_check(&a, 0.1, &DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert!(!c.applicable);
    }

    #[test]
    fn basis_invariance_of_estimate() {
        let inst = generate_instance(InstanceParams::new(
            2000,
            10,
            0.02,
            Model::Orthonormal,
            SeedSpec::new(9, 1),
        ))
        .unwrap();
        let other = rerotate(&inst.observed, SeedSpec::new(9, 1)).unwrap();
        let a = estimate_direction(&inst.observed).unwrap().raw_estimate;
        let b = estimate_direction(&other).unwrap().raw_estimate;
        assert!((&a - &b).amax().min((&a + &b).amax()) < 1e-6);
    }
}
