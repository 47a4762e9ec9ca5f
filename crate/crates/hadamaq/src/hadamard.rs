//! Complex Hadamard matrices: validation, dephasing, Butson level, tensor
//! products, and the `.chm` text format.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::equivalence::EquivalenceWitness;
use crate::perm::Permutation;
use crate::phase::{Phase, Root, UnitVector};
use crate::{DEFAULT_MAX_ORDER, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum HadamardError {
    #[error("grid is not square: {rows} rows, row {at} has {cols} entries")]
    NonSquare { rows: usize, cols: usize, at: usize },
    #[error("witness dimension {witness} does not match matrix size {matrix}")]
    DimensionMismatch { witness: usize, matrix: usize },
    #[error("unknown catalogue name `{0}`")]
    UnknownName(String),
    #[error("parameter is not a unit-modulus scalar")]
    NonUnitParameter,
    #[error("chm parse error: {0}")]
    Parse(String),
}

/// Whether every entry is an exact root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Approx,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Approx => write!(f, "approx"),
        }
    }
}

/// Square grid of unit-modulus entries. Row orthogonality is the defining
/// property; constructors only enforce squareness, [`HadamardMatrix::validate`]
/// checks the rest.
#[derive(Clone, PartialEq)]
pub struct HadamardMatrix {
    rows: Vec<UnitVector>,
}

impl HadamardMatrix {
    pub fn from_rows(rows: Vec<Vec<Phase>>) -> Result<Self, HadamardError> {
        let n = rows.len();
        if n == 0 {
            return Err(HadamardError::NonSquare {
                rows: 0,
                cols: 0,
                at: 0,
            });
        }
        for (at, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(HadamardError::NonSquare {
                    rows: n,
                    cols: row.len(),
                    at,
                });
            }
        }
        Ok(HadamardMatrix {
            rows: rows.into_iter().map(UnitVector::new).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Phase {
        self.rows[i].get(j)
    }

    pub fn row(&self, i: usize) -> &UnitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[UnitVector] {
        &self.rows
    }

    pub fn mode(&self) -> Mode {
        if self.rows.iter().all(UnitVector::all_exact) {
            Mode::Exact
        } else {
            Mode::Approx
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j).value())
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.n();
        let mut unit_modulus_failures = Vec::new();
        let mut max_unit_modulus_dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dev = (self.entry(i, j).value().norm_sqr() - 1.0).abs();
                max_unit_modulus_dev = max_unit_modulus_dev.max(dev);
                if dev > tol {
                    unit_modulus_failures.push((i, j));
                }
            }
        }

        let mut max_row_residual = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let ip = self.rows[i].inner(&self.rows[j]);
                max_row_residual = max_row_residual.max(ip.norm() / n as f64);
            }
        }
        // Column orthogonality follows from row orthogonality; re-checking it
        // is a redundancy guard on the numerics.
        let mut max_col_residual = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let ip: Complex64 = (0..n)
                    .map(|a| self.entry(a, i).value() * self.entry(a, j).value().conj())
                    .sum();
                max_col_residual = max_col_residual.max(ip.norm() / n as f64);
            }
        }

        let is_hadamard =
            unit_modulus_failures.is_empty() && max_row_residual <= tol && max_col_residual <= tol;
        ValidationReport {
            n,
            unit_modulus_failures,
            max_unit_modulus_dev,
            max_row_residual,
            max_col_residual,
            is_hadamard,
        }
    }

    pub fn is_hadamard(&self, tol: f64) -> bool {
        self.validate(tol).is_hadamard
    }

    /// Minimal `l <= max_order` such that every entry is an `l`-th root of
    /// unity; approximate entries are snapped first.
    pub fn butson_level(&self, max_order: u64) -> ButsonLevel {
        let mut roots = Vec::with_capacity(self.n() * self.n());
        for row in &self.rows {
            for p in row.iter() {
                match p.snap_to_root(max_order, DEFAULT_TOL) {
                    Some(r) => roots.push(r),
                    None => return ButsonLevel::Infinite,
                }
            }
        }
        for l in 1..=max_order {
            if roots.iter().all(|r| l % r.order() == 0) {
                return ButsonLevel::Finite(l);
            }
        }
        ButsonLevel::Infinite
    }

    /// Exact copy of the matrix, snapping approximate entries to roots of
    /// unity of order at most `max_order`.
    pub fn snap(&self, max_order: u64, tol: f64) -> Option<HadamardMatrix> {
        let mut rows = Vec::with_capacity(self.n());
        for row in &self.rows {
            let mut out = Vec::with_capacity(self.n());
            for p in row.iter() {
                out.push(Phase::Exact(p.snap_to_root(max_order, tol)?));
            }
            rows.push(out);
        }
        Some(HadamardMatrix::from_rows(rows).expect("shape preserved"))
    }
}

impl fmt::Debug for HadamardMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HadamardMatrix(n={})", self.n())?;
        for row in &self.rows {
            let items: Vec<String> = row.iter().map(|p| format!("{p:?}")).collect();
            writeln!(f, "  [{}]", items.join(", "))?;
        }
        Ok(())
    }
}

/// Outcome of [`HadamardMatrix::validate`].
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub n: usize,
    pub unit_modulus_failures: Vec<(usize, usize)>,
    pub max_unit_modulus_dev: f64,
    /// Max over `i < j` of `|<h_i, h_j>| / n`.
    pub max_row_residual: f64,
    pub max_col_residual: f64,
    pub is_hadamard: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ButsonLevel {
    Finite(u64),
    Infinite,
}

impl fmt::Display for ButsonLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ButsonLevel::Finite(l) => write!(f, "{l}"),
            ButsonLevel::Infinite => write!(f, "infinity"),
        }
    }
}

/// Result of [`dephase`]: the normalized matrix, the witness mapping the
/// input onto it, and whether the diagonal could also be normalized by a
/// column permutation alone.
#[derive(Clone, Debug)]
pub struct Dephased {
    pub matrix: HadamardMatrix,
    pub witness: EquivalenceWitness,
    pub diagonal_complete: bool,
}

/// Scales rows and columns so the first row and column consist of 1s, then
/// looks for a column permutation that also sets the diagonal to 1. When no
/// such permutation exists the scaled form is returned with
/// `diagonal_complete = false`.
pub fn dephase(h: &HadamardMatrix) -> Dephased {
    let n = h.n();
    let col_phases: Vec<Phase> = (0..n).map(|j| h.entry(0, j).conj()).collect();
    let row_phases: Vec<Phase> = (0..n)
        .map(|i| (col_phases[0] * h.entry(i, 0)).conj())
        .collect();
    let scale = EquivalenceWitness {
        row_perm: Permutation::identity(n),
        col_perm: Permutation::identity(n),
        row_phases,
        col_phases,
    };
    let scaled = scale.apply(h).expect("dimensions match");

    match diagonal_matching(&scaled) {
        Some(col_perm) => {
            let permute = EquivalenceWitness {
                row_perm: Permutation::identity(n),
                col_phases: vec![Phase::one(); n],
                row_phases: vec![Phase::one(); n],
                col_perm,
            };
            let matrix = permute.apply(&scaled).expect("dimensions match");
            Dephased {
                matrix,
                witness: permute.after(&scale).normalized(),
                diagonal_complete: true,
            }
        }
        None => Dephased {
            matrix: scaled,
            witness: scale.normalized(),
            diagonal_complete: false,
        },
    }
}

fn is_one_entry(p: &Phase) -> bool {
    match p {
        Phase::Exact(r) => r.is_one(),
        Phase::Approx(z) => (z - Complex64::new(1.0, 0.0)).norm() <= DEFAULT_TOL,
    }
}

/// Kuhn matching of rows `1..n` to columns `1..n` along 1-entries; column 0
/// stays put since it is the unique all-ones column. Each row tries its own
/// column first so an already-normalized diagonal yields the identity.
fn diagonal_matching(h: &HadamardMatrix) -> Option<Permutation> {
    let n = h.n();
    let mut col_to_row: Vec<Option<usize>> = vec![None; n];
    col_to_row[0] = Some(0);

    fn augment(
        h: &HadamardMatrix,
        row: usize,
        visited: &mut [bool],
        col_to_row: &mut [Option<usize>],
    ) -> bool {
        let n = h.n();
        let candidates = std::iter::once(row).chain((1..n).filter(|&c| c != row));
        for c in candidates {
            if visited[c] || !is_one_entry(&h.entry(row, c)) {
                continue;
            }
            visited[c] = true;
            let free = match col_to_row[c] {
                None => true,
                Some(prev) => augment(h, prev, visited, col_to_row),
            };
            if free {
                col_to_row[c] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 1..n {
        let mut visited = vec![false; n];
        visited[0] = true;
        if !augment(h, row, &mut visited, &mut col_to_row) {
            return None;
        }
    }
    let mut images = vec![0; n];
    for (c, r) in col_to_row.iter().enumerate() {
        images[r.expect("perfect matching")] = c;
    }
    Some(Permutation::new(images).expect("matching is a bijection"))
}

/// Tensor product under the lexicographic double-index order:
/// `(h⊗k)[im+a][jm+b] = h[i][j]·k[a][b]`.
pub fn tensor(h: &HadamardMatrix, k: &HadamardMatrix) -> HadamardMatrix {
    let (n, m) = (h.n(), k.n());
    let rows = (0..n * m)
        .map(|r| {
            let (i, a) = (r / m, r % m);
            (0..n * m)
                .map(|c| {
                    let (j, b) = (c / m, c % m);
                    h.entry(i, j) * k.entry(a, b)
                })
                .collect()
        })
        .collect();
    HadamardMatrix::from_rows(rows).expect("square by construction")
}

/// Writes the `.chm` text format. Matrices whose entries all snap to roots of
/// unity are emitted in exact mode with a shared order; everything else is
/// written as `re,im` pairs.
pub fn write_chm(h: &HadamardMatrix) -> String {
    let n = h.n();
    match h.butson_level(DEFAULT_MAX_ORDER) {
        ButsonLevel::Finite(l) => {
            let mut out = format!("chm v1 n={n} mode=exact order={l}\n");
            for row in h.rows() {
                let ks: Vec<String> = row
                    .iter()
                    .map(|p| {
                        let r = p
                            .snap_to_root(DEFAULT_MAX_ORDER, DEFAULT_TOL)
                            .expect("level is finite");
                        (r.num() * (l / r.order())).to_string()
                    })
                    .collect();
                out.push_str(&ks.join(" "));
                out.push('\n');
            }
            out
        }
        ButsonLevel::Infinite => {
            let mut out = format!("chm v1 n={n} mode=approx\n");
            for row in h.rows() {
                let zs: Vec<String> = row
                    .iter()
                    .map(|p| {
                        let z = p.value();
                        format!("{:.16e},{:.16e}", z.re, z.im)
                    })
                    .collect();
                out.push_str(&zs.join(" "));
                out.push('\n');
            }
            out
        }
    }
}

pub fn read_chm(text: &str) -> Result<HadamardMatrix, HadamardError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| HadamardError::Parse("empty input".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("chm") || fields.next() != Some("v1") {
        return Err(HadamardError::Parse("expected `chm v1` header".into()));
    }
    let mut n: Option<usize> = None;
    let mut mode: Option<&str> = None;
    let mut order: Option<u64> = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| HadamardError::Parse(format!("bad header field `{field}`")))?;
        match key {
            "n" => n = Some(parse_num(value)?),
            "mode" => mode = Some(value),
            "order" => order = Some(parse_num(value)?),
            other => {
                return Err(HadamardError::Parse(format!(
                    "unknown header key `{other}`"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| HadamardError::Parse("header missing n=".into()))?;
    let mut rows = Vec::with_capacity(n);
    match mode {
        Some("exact") => {
            let l =
                order.ok_or_else(|| HadamardError::Parse("exact mode requires order=".into()))?;
            if l == 0 {
                return Err(HadamardError::Parse("order must be positive".into()));
            }
            for _ in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| HadamardError::Parse("missing matrix row".into()))?;
                let row: Result<Vec<Phase>, _> = line
                    .split_whitespace()
                    .map(|tok| parse_num::<i64>(tok).map(|k| Phase::Exact(Root::new(k, l))))
                    .collect();
                rows.push(row?);
            }
        }
        Some("approx") => {
            for _ in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| HadamardError::Parse("missing matrix row".into()))?;
                let row: Result<Vec<Phase>, _> = line
                    .split_whitespace()
                    .map(|tok| {
                        let (re, im) = tok
                            .split_once(',')
                            .ok_or_else(|| HadamardError::Parse(format!("bad entry `{tok}`")))?;
                        Phase::approx(parse_num(re)?, parse_num(im)?)
                            .map_err(|e| HadamardError::Parse(e.to_string()))
                    })
                    .collect();
                rows.push(row?);
            }
        }
        other => {
            return Err(HadamardError::Parse(format!(
                "mode must be exact or approx, got {other:?}"
            )))
        }
    }
    if lines.next().is_some() {
        return Err(HadamardError::Parse("trailing content after matrix".into()));
    }
    HadamardMatrix::from_rows(rows)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, HadamardError> {
    s.parse()
        .map_err(|_| HadamardError::Parse(format!("bad number `{s}`")))
}
