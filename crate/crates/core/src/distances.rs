//! Set-to-set distances via the mutual subspace method, and the map that
//! takes bounded distances in `[0, 1)` onto `[0, ∞)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Feature vectors belonging to one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    pub class_label: String,
    pub vectors: Vec<Vec<f64>>,
}

impl PatternSet {
    pub fn new(class_label: impl Into<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self {
            class_label: class_label.into(),
            vectors,
        };
        set.ambient_dim()?;
        Ok(set)
    }

    /// Dimension shared by every vector.
    pub fn ambient_dim(&self) -> Result<usize> {
        let first = self
            .vectors
            .first()
            .ok_or(Error::EmptyInput("pattern set has no vectors"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::EmptyInput("pattern vectors have zero length"));
        }
        for v in &self.vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
        }
        Ok(dim)
    }
}

/// A `D × d_p` matrix with orthonormal columns spanning a principal subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps `basis`, checking that its columns are orthonormal to 1e-10.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.ncols() == 0 || basis.nrows() < basis.ncols() {
            return Err(Error::InvalidConfig(format!(
                "basis must be D x d_p with 1 <= d_p <= D, got {} x {}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let gram = basis.transpose() * &basis;
        let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
        if dev > 1e-10 {
            return Err(Error::Domain(format!(
                "basis columns are not orthonormal (max deviation {dev:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Top `d_p` principal directions of the mean-centred set, ordered by
/// decreasing variance.
pub fn pca_basis(set: &PatternSet, d_p: usize) -> Result<SubspaceBasis> {
    if d_p == 0 {
        return Err(Error::InvalidConfig(
            "subspace dimension must be >= 1".into(),
        ));
    }
    let dim = set.ambient_dim()?;
    let n = set.vectors.len();

    let mut data = DMatrix::from_fn(dim, n, |r, c| set.vectors[c][r]);
    let mean: DVector<f64> = data.column_mean();
    for mut col in data.column_iter_mut() {
        col -= &mean;
    }

    let svd = data.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::Convergence("SVD did not return left singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let largest = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let rank = order
        .iter()
        .filter(|&&i| largest > 0.0 && svd.singular_values[i] > RANK_TOL * largest)
        .count();
    if rank < d_p {
        return Err(Error::RankDeficient {
            rank,
            requested: d_p,
        });
    }

    let columns: Vec<_> = order[..d_p]
        .iter()
        .map(|&i| u.column(i).into_owned())
        .collect();
    SubspaceBasis::new(DMatrix::from_columns(&columns))
}

/// `1 − cos θ_min`, where `cos θ_min` is the largest canonical correlation
/// (top singular value of `AᵀB`) between the two subspaces.
pub fn subspace_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    let cross = a.matrix().transpose() * b.matrix();
    let top = cross
        .singular_values()
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
        .clamp(0.0, 1.0);
    Ok(1.0 - top)
}

/// `−ln(1 − δ)`: a strictly increasing bijection from `[0, 1)` onto `[0, ∞)`.
pub fn unbound_transform(delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "bounded distance must lie in [0, 1), got {delta}"
        )));
    }
    Ok(-(-delta).ln_1p())
}

/// Pairwise subspace distances between pattern sets, as a square matrix.
pub fn distance_matrix(bases: &[SubspaceBasis]) -> Result<Vec<Vec<f64>>> {
    let n = bases.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = subspace_distance(&bases[i], &bases[j])?;
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}
