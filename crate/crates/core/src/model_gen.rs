//! Instance generation for the planted-vector models.
//!
//! Two observation models share one generator:
//!
//! * Gaussian basis: `Y = [v | g_2 … g_n]` with `g_j ~ N(0, I_N / N)`, observed
//!   as `Ỹ = Y Q` for a Haar-random orthogonal `Q`.
//! * Orthonormal basis: the same `Y` (with `v` normalized to unit length),
//!   observed through an orthonormal basis `Ŷ` of its column span.
//!
//! The detection problem draws either an all-Gaussian matrix (null) or a
//! Gaussian-basis instance with unnormalized `v` (planted).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, PvError, Result};
use crate::rng::{Purpose, SeedSpec};

/// Smallest admissible `|R_jj|` in the QR factorization before a basis is
/// declared rank deficient.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedVector {
    pub entries: DVector<f64>,
    pub rho: f64,
    pub normalized: bool,
    /// Number of nonzero entries in the draw.
    pub support: usize,
}

impl PlantedVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖v‖₄⁴`.
    pub fn l4_fourth(&self) -> f64 {
        self.entries.iter().map(|x| x.powi(4)).sum()
    }

    /// Magnitude of a nonzero entry of an unnormalized draw, `1/√(Nρ)`.
    pub fn entry_magnitude(ambient_dim: usize, rho: f64) -> f64 {
        1.0 / (ambient_dim as f64 * rho).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    GaussianPlanted,
    Rotated,
    Orthonormal,
    Null,
}

impl BasisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::GaussianPlanted => "gaussian_planted",
            BasisKind::Rotated => "rotated",
            BasisKind::Orthonormal => "orthonormal",
            BasisKind::Null => "null",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gaussian_planted" => BasisKind::GaussianPlanted,
            "rotated" => BasisKind::Rotated,
            "orthonormal" => BasisKind::Orthonormal,
            "null" => BasisKind::Null,
            _ => return None,
        })
    }
}

/// An `N × n` basis matrix together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    pub data: DMatrix<f64>,
    pub kind: BasisKind,
}

impl BasisMatrix {
    pub fn ambient_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    pub data: DMatrix<f64>,
}

impl RotationMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Observe `Ỹ = Y Q`.
    Gaussian,
    /// Observe an orthonormal basis of `span(Y)`.
    Orthonormal,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Gaussian => "gaussian",
            Model::Orthonormal => "orth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceParams {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
    pub model: Model,
    /// Divide `v` by its realized norm. `Model::Orthonormal` always
    /// normalizes; for the Gaussian model this is a free choice.
    pub normalize: bool,
    pub seed: SeedSpec,
}

impl InstanceParams {
    pub fn new(ambient_dim: usize, subspace_dim: usize, rho: f64, model: Model, seed: SeedSpec) -> Self {
        Self {
            ambient_dim,
            subspace_dim,
            rho,
            model,
            normalize: model == Model::Orthonormal,
            seed,
        }
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }
}

/// Everything needed to score a trial: ground truth plus the observation.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub params: InstanceParams,
    pub truth: PlantedVector,
    /// `Y`, whose first column is `truth`.
    pub basis: BasisMatrix,
    pub rotation: RotationMatrix,
    pub observed: BasisMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Null,
    Planted,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Null => "null",
            Hypothesis::Planted => "planted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectionSample {
    pub observed: BasisMatrix,
    /// Present for planted draws so the harness can score them.
    pub truth: Option<PlantedInstance>,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("rho must lie in (0, 1], got {rho}")))
    }
}

fn check_dims(ambient_dim: usize, subspace_dim: usize) -> Result<()> {
    if subspace_dim == 0 || ambient_dim == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    if subspace_dim > ambient_dim {
        return Err(invalid(format!(
            "subspace dimension n = {subspace_dim} exceeds ambient dimension N = {ambient_dim}"
        )));
    }
    Ok(())
}

/// Draw `v ~ BR(N, ρ)`: each entry is 0 with probability `1 − ρ` and
/// `±1/√(Nρ)` with probability `ρ/2` each.
pub fn sample_br_vector(ambient_dim: usize, rho: f64, seed: SeedSpec, normalize: bool) -> Result<PlantedVector> {
    if ambient_dim == 0 {
        return Err(invalid("N must be positive"));
    }
    check_rho(rho)?;
    let mut rng = seed.rng(Purpose::PlantedVector);
    let magnitude = PlantedVector::entry_magnitude(ambient_dim, rho);
    let mut support = 0;
    let mut entries = DVector::zeros(ambient_dim);
    for x in entries.iter_mut() {
        let u: f64 = rng.random();
        if u < rho {
            support += 1;
            *x = if rng.random::<bool>() { magnitude } else { -magnitude };
        }
    }
    if normalize {
        if support == 0 {
            return Err(PvError::DegenerateDraw { len: ambient_dim });
        }
        let norm = entries.norm();
        entries /= norm;
    }
    Ok(PlantedVector {
        entries,
        rho,
        normalized: normalize,
        support,
    })
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    // Column-major fill, so the draw order is fixed by (rows, cols).
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// `Y = [v | g_2 … g_n]` with i.i.d. `N(0, 1/N)` entries in the Gaussian
/// columns.
pub fn sample_gaussian_basis(v: &PlantedVector, subspace_dim: usize, seed: SeedSpec) -> Result<BasisMatrix> {
    let ambient_dim = v.len();
    check_dims(ambient_dim, subspace_dim)?;
    let mut rng = seed.rng(Purpose::GaussianColumns);
    let noise = gaussian_matrix(
        &mut rng,
        ambient_dim,
        subspace_dim - 1,
        1.0 / (ambient_dim as f64).sqrt(),
    );
    let mut data = DMatrix::zeros(ambient_dim, subspace_dim);
    data.set_column(0, &v.entries);
    if subspace_dim > 1 {
        data.columns_mut(1, subspace_dim - 1).copy_from(&noise);
    }
    Ok(BasisMatrix {
        data,
        kind: BasisKind::GaussianPlanted,
    })
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the columns of `Q` flipped so that `diag(R) > 0`.
pub fn sample_haar_rotation(n: usize, seed: SeedSpec) -> Result<RotationMatrix> {
    haar_with(n, seed, Purpose::Rotation)
}

fn haar_with(n: usize, seed: SeedSpec, purpose: Purpose) -> Result<RotationMatrix> {
    if n == 0 {
        return Err(invalid("rotation dimension must be positive"));
    }
    let mut rng = seed.rng(purpose);
    let g = gaussian_matrix(&mut rng, n, n, 1.0);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(RotationMatrix { data: q })
}

/// `Ỹ = Y Q`.
pub fn apply_rotation(y: &BasisMatrix, q: &RotationMatrix) -> Result<BasisMatrix> {
    if y.subspace_dim() != q.dim() {
        return Err(PvError::DimensionMismatch {
            expected: y.subspace_dim(),
            got: q.dim(),
        });
    }
    Ok(BasisMatrix {
        data: &y.data * &q.data,
        kind: BasisKind::Rotated,
    })
}

/// Householder QR orthonormalization. Columns are sign-normalized so that the
/// triangular factor has a positive diagonal.
pub fn orthonormalize(y: &BasisMatrix) -> Result<BasisMatrix> {
    let (rows, cols) = y.data.shape();
    if cols > rows {
        return Err(invalid(format!("cannot orthonormalize {cols} columns in R^{rows}")));
    }
    let qr = y.data.clone().qr();
    let r = qr.r();
    if let Some(column) = (0..cols).find(|&j| r[(j, j)].abs() <= RANK_TOL) {
        return Err(PvError::RankDeficient {
            column,
            magnitude: r[(column, column)].abs(),
        });
    }
    let mut q = qr.q();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(BasisMatrix {
        data: q,
        kind: BasisKind::Orthonormal,
    })
}

/// Generate one estimation instance under the requested model.
///
/// For the orthonormal model the observation is `orthonormalize(Y Q)` with
/// Haar `Q`, so the returned basis carries no trace of `v` being the first
/// column of `Y`.
pub fn generate_instance(params: InstanceParams) -> Result<PlantedInstance> {
    check_dims(params.ambient_dim, params.subspace_dim)?;
    let normalize = params.normalize || params.model == Model::Orthonormal;
    let truth = sample_br_vector(params.ambient_dim, params.rho, params.seed, normalize)?;
    let basis = sample_gaussian_basis(&truth, params.subspace_dim, params.seed)?;
    let rotation = sample_haar_rotation(params.subspace_dim, params.seed)?;
    let rotated = apply_rotation(&basis, &rotation)?;
    let observed = match params.model {
        Model::Gaussian => rotated,
        Model::Orthonormal => orthonormalize(&rotated)?,
    };
    Ok(PlantedInstance {
        params: InstanceParams { normalize, ..params },
        truth,
        basis,
        rotation,
        observed,
    })
}

/// Right-multiply by an independent Haar rotation keyed on a separate
/// purpose. Gives a second orthonormal basis of the same span.
pub fn rerotate(y: &BasisMatrix, seed: SeedSpec) -> Result<BasisMatrix> {
    let q = haar_with(y.subspace_dim(), seed, Purpose::ExtraRotation)?;
    let mut out = apply_rotation(y, &q)?;
    out.kind = y.kind;
    Ok(out)
}

/// One draw from the null (`Q`) or planted (`P`) detection distribution.
pub fn sample_detection_pair(
    ambient_dim: usize,
    subspace_dim: usize,
    rho: f64,
    seed: SeedSpec,
    which: Hypothesis,
) -> Result<DetectionSample> {
    check_dims(ambient_dim, subspace_dim)?;
    check_rho(rho)?;
    match which {
        Hypothesis::Null => {
            let mut rng = seed.rng(Purpose::NullMatrix);
            let data = gaussian_matrix(&mut rng, ambient_dim, subspace_dim, 1.0 / (ambient_dim as f64).sqrt());
            Ok(DetectionSample {
                observed: BasisMatrix {
                    data,
                    kind: BasisKind::Null,
                },
                truth: None,
            })
        }
        Hypothesis::Planted => {
            let params = InstanceParams::new(ambient_dim, subspace_dim, rho, Model::Gaussian, seed);
            let instance = generate_instance(params)?;
            Ok(DetectionSample {
                observed: instance.observed.clone(),
                truth: Some(instance),
            })
        }
    }
}
