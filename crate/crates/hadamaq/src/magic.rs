//! Magic bases and magic unitaries: grids of rank-one projections whose rows
//! and columns are partitions of unity, built from Hadamard matrices by
//! entrywise row quotients.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::hadamard::HadamardMatrix;
use crate::phase::UnitVector;
use crate::square::MagicSquare;

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Error)]
pub enum MagicError {
    #[error("grid is not square or cells have mismatched dimensions")]
    ShapeMismatch,
    #[error("cell dimensions differ: {0} vs {1}")]
    CellDimMismatch(usize, usize),
    #[error("projections do not form a partition of unity ({0})")]
    NotPartitionOfUnity(String),
    #[error("projection {0} is not rank one")]
    NotRankOne(usize),
    #[error("expected {expected} projections, got {got}")]
    WrongCount { expected: usize, got: usize },
}

/// Grid of vectors `ξ[i][j] = h_j / h_i` (entrywise quotient of rows); every
/// row and column of the grid is an orthogonal basis.
#[derive(Clone, Debug)]
pub struct MagicBasis {
    vectors: Vec<Vec<UnitVector>>,
}

impl MagicBasis {
    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize, j: usize) -> &UnitVector {
        &self.vectors[i][j]
    }
}

pub fn magic_basis(h: &HadamardMatrix) -> MagicBasis {
    let n = h.n();
    let vectors = (0..n)
        .map(|i| (0..n).map(|j| h.row(j).div(h.row(i))).collect())
        .collect();
    MagicBasis { vectors }
}

/// Square grid of `dim × dim` complex projection matrices. `size` (the grid
/// side) equals `dim` for grids coming from Hadamard matrices, but block
/// constructions can make them differ.
#[derive(Clone, Debug)]
pub struct ProjectionGrid {
    size: usize,
    dim: usize,
    cells: Vec<Vec<CMat>>,
}

impl ProjectionGrid {
    pub fn from_cells(cells: Vec<Vec<CMat>>) -> Result<Self, MagicError> {
        let size = cells.len();
        if size == 0 || cells.iter().any(|row| row.len() != size) {
            return Err(MagicError::ShapeMismatch);
        }
        let dim = cells[0][0].nrows();
        for row in &cells {
            for cell in row {
                if cell.nrows() != dim || cell.ncols() != dim {
                    return Err(MagicError::ShapeMismatch);
                }
            }
        }
        Ok(ProjectionGrid { size, dim, cells })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell(&self, i: usize, j: usize) -> &CMat {
        &self.cells[i][j]
    }
}

/// Rank-one projections `P[i][j] = ξ[i][j]·ξ[i][j]* / n`, so that entry
/// `(a,b)` of a cell is `x_a·conj(x_b)/n`.
pub fn projection_grid(basis: &MagicBasis) -> ProjectionGrid {
    let n = basis.n();
    let cells = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = basis.vector(i, j).values();
                    CMat::from_fn(n, n, |a, b| x[a] * x[b].conj() / n as f64)
                })
                .collect()
        })
        .collect();
    ProjectionGrid {
        size: n,
        dim: n,
        cells,
    }
}

/// Residuals of the magic-unitary axioms over a projection grid.
#[derive(Clone, Debug)]
pub struct MagicUnitaryReport {
    pub size: usize,
    pub dim: usize,
    /// Per cell, `‖P² − P‖_F`.
    pub projection_residuals: Vec<Vec<f64>>,
    /// Per cell, `‖P − P*‖_F`.
    pub adjoint_residuals: Vec<Vec<f64>>,
    /// Per row, `‖Σ_j P[i][j] − I‖_F`.
    pub row_sum_residuals: Vec<f64>,
    pub col_sum_residuals: Vec<f64>,
    pub is_magic_unitary: bool,
}

impl MagicUnitaryReport {
    pub fn max_projection_residual(&self) -> f64 {
        fold_max(self.projection_residuals.iter().flatten().copied())
    }

    pub fn max_adjoint_residual(&self) -> f64 {
        fold_max(self.adjoint_residuals.iter().flatten().copied())
    }

    pub fn max_sum_residual(&self) -> f64 {
        fold_max(
            self.row_sum_residuals
                .iter()
                .chain(&self.col_sum_residuals)
                .copied(),
        )
    }
}

fn fold_max(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

pub fn validate_magic_unitary(grid: &ProjectionGrid, tol: f64) -> MagicUnitaryReport {
    let (size, dim) = (grid.size(), grid.dim());
    let mut projection_residuals = vec![vec![0.0; size]; size];
    let mut adjoint_residuals = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..size {
            let p = grid.cell(i, j);
            projection_residuals[i][j] = (p * p - p).norm();
            adjoint_residuals[i][j] = (p - p.adjoint()).norm();
        }
    }
    let id = CMat::identity(dim, dim);
    let sum_residual = |cells: &dyn Fn(usize) -> CMat| -> Vec<f64> {
        (0..size).map(|k| (cells(k) - &id).norm()).collect()
    };
    let row_sum_residuals =
        sum_residual(&|i| (0..size).fold(CMat::zeros(dim, dim), |acc, j| acc + grid.cell(i, j)));
    let col_sum_residuals =
        sum_residual(&|j| (0..size).fold(CMat::zeros(dim, dim), |acc, i| acc + grid.cell(i, j)));

    let all_within = |xs: &[f64]| xs.iter().all(|&x| x <= tol);
    let is_magic_unitary = projection_residuals.iter().all(|r| all_within(r))
        && adjoint_residuals.iter().all(|r| all_within(r))
        && all_within(&row_sum_residuals)
        && all_within(&col_sum_residuals);
    MagicUnitaryReport {
        size,
        dim,
        projection_residuals,
        adjoint_residuals,
        row_sum_residuals,
        col_sum_residuals,
        is_magic_unitary,
    }
}

/// Places a partition of unity along a magic square: cell `(i,j)` becomes
/// `projections[σ(i,j)]`. The projections must be rank one.
pub fn e_sigma(
    projections: &[CMat],
    sigma: &MagicSquare,
    tol: f64,
) -> Result<ProjectionGrid, MagicError> {
    let n = sigma.n();
    if projections.len() != n {
        return Err(MagicError::WrongCount {
            expected: n,
            got: projections.len(),
        });
    }
    let dim = projections[0].nrows();
    for (k, e) in projections.iter().enumerate() {
        if e.nrows() != dim || e.ncols() != dim {
            return Err(MagicError::CellDimMismatch(dim, e.nrows()));
        }
        if (e * e - e).norm() > tol || (e - e.adjoint()).norm() > tol {
            return Err(MagicError::NotPartitionOfUnity(format!(
                "element {k} is not a projection"
            )));
        }
        if (e.trace() - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(MagicError::NotRankOne(k));
        }
    }
    let sum = projections.iter().fold(CMat::zeros(dim, dim), |a, e| a + e);
    if (sum - CMat::identity(dim, dim)).norm() > tol {
        return Err(MagicError::NotPartitionOfUnity(
            "projections do not sum to the identity".into(),
        ));
    }

    let cells = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| projections[sigma.get(i, j)].clone())
                .collect()
        })
        .collect();
    Ok(ProjectionGrid {
        size: n,
        dim,
        cells,
    })
}

/// Diagonal concatenation: `(n+m)×(n+m)` grid with `u` in the top-left
/// block, `v` in the bottom-right, and zero projections elsewhere.
pub fn block_concat(u: &ProjectionGrid, v: &ProjectionGrid) -> Result<ProjectionGrid, MagicError> {
    if u.dim() != v.dim() {
        return Err(MagicError::CellDimMismatch(u.dim(), v.dim()));
    }
    let (n, m, dim) = (u.size(), v.size(), u.dim());
    let zero = CMat::zeros(dim, dim);
    let cells = (0..n + m)
        .map(|i| {
            (0..n + m)
                .map(|j| match (i < n, j < n) {
                    (true, true) => u.cell(i, j).clone(),
                    (false, false) => v.cell(i - n, j - n).clone(),
                    _ => zero.clone(),
                })
                .collect()
        })
        .collect();
    Ok(ProjectionGrid {
        size: n + m,
        dim,
        cells,
    })
}

/// Verdict of [`commutation_profile`]. The gap between the two thresholds is
/// a guard band: catalogue matrices land well on either side, and anything
/// inside the band is reported honestly as indeterminate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Commutativity {
    Commutative,
    NonCommutative,
    Indeterminate,
}

/// All cell pairs commute up to this Frobenius norm.
pub const COMMUTATIVE_MAX_NORM: f64 = 1e-8;
/// Some cell pair fails to commute by at least this much.
pub const NONCOMMUTATIVE_MIN_NORM: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub struct CommutationProfile {
    /// Max over cell pairs of `‖P·Q − Q·P‖_F`.
    pub max_norm: f64,
    pub flag: Commutativity,
}

/// Maximum commutator norm over all pairs of cells. Grids whose cells are all
/// certified rank one use a closed form in the generating vectors; anything
/// else falls back to dense matrix products.
pub fn commutation_profile(grid: &ProjectionGrid) -> CommutationProfile {
    let max_norm = match rank_one_vectors(grid) {
        Some(vectors) => max_commutator_rank_one(&vectors),
        None => max_commutator_dense(grid),
    };
    let flag = if max_norm <= COMMUTATIVE_MAX_NORM {
        Commutativity::Commutative
    } else if max_norm >= NONCOMMUTATIVE_MIN_NORM {
        Commutativity::NonCommutative
    } else {
        Commutativity::Indeterminate
    };
    CommutationProfile { max_norm, flag }
}

const RANK_ONE_CERTIFICATION_TOL: f64 = 1e-8;

/// Extracts, for each cell `P`, a vector `v` with `P ≈ v·v*/‖v‖²`, or `None`
/// if any cell is not rank one to within the certification tolerance.
fn rank_one_vectors(grid: &ProjectionGrid) -> Option<Vec<Vec<Complex64>>> {
    let dim = grid.dim();
    let mut out = Vec::with_capacity(grid.size() * grid.size());
    for i in 0..grid.size() {
        for j in 0..grid.size() {
            let p = grid.cell(i, j);
            let (mut c, mut diag) = (0, 0.0);
            for a in 0..dim {
                let d = p[(a, a)].re;
                if d > diag {
                    diag = d;
                    c = a;
                }
            }
            if diag < 1e-3 {
                return None;
            }
            let v: Vec<Complex64> = (0..dim).map(|a| p[(a, c)]).collect();
            let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let mut residual = 0.0f64;
            for a in 0..dim {
                for b in 0..dim {
                    residual += (v[a] * v[b].conj() / norm_sq - p[(a, b)]).norm_sqr();
                }
            }
            if residual.sqrt() > RANK_ONE_CERTIFICATION_TOL {
                return None;
            }
            out.push(v);
        }
    }
    Some(out)
}

/// For rank-one projections `P = v·v*/‖v‖²` and `Q = w·w*/‖w‖²` with
/// `c = ⟨v,w⟩`, the commutator norm satisfies
/// `‖PQ − QP‖² = 2·t·(1 − t)` where `t = |c|²/(‖v‖²‖w‖²)`.
///
/// Near `t = 1` the difference `1 - t` cancels catastrophically, so there it
/// is computed instead as the Cauchy-Schwarz defect
/// `Σ_{a<b} |v_a w_b − v_b w_a|² / (‖v‖²‖w‖²)`, a sum of squares.
fn max_commutator_rank_one(vectors: &[Vec<Complex64>]) -> f64 {
    let norms: Vec<f64> = vectors
        .iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let mut max_sq = 0.0f64;
    for s in 0..vectors.len() {
        for t in (s + 1)..vectors.len() {
            let (v, w) = (&vectors[s], &vectors[t]);
            let c: Complex64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
            let scale = norms[s] * norms[t];
            let ratio = (c.norm_sqr() / scale).min(1.0);
            let complement = if ratio > 0.5 {
                let mut defect = 0.0f64;
                for a in 0..v.len() {
                    for b in (a + 1)..v.len() {
                        defect += (v[a] * w[b] - v[b] * w[a]).norm_sqr();
                    }
                }
                (defect / scale).min(1.0)
            } else {
                1.0 - ratio
            };
            max_sq = max_sq.max(2.0 * ratio * complement);
        }
    }
    max_sq.sqrt()
}

fn max_commutator_dense(grid: &ProjectionGrid) -> f64 {
    let cells: Vec<&CMat> = grid.cells.iter().flat_map(|row| row.iter()).collect();
    let mut max = 0.0f64;
    for s in 0..cells.len() {
        for t in (s + 1)..cells.len() {
            max = max.max((cells[s] * cells[t] - cells[t] * cells[s]).norm());
        }
    }
    max
}
