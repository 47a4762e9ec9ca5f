//! Magic squares over `{0..n-1}`: every row and column is a permutation,
//! normalized so the first row is the identity and the diagonal is 0.

use std::fmt;

use thiserror::Error;

use crate::magic::ProjectionGrid;
use crate::perm::Permutation;

#[derive(Debug, Error)]
pub enum SquareError {
    #[error("row or column {0} is not a permutation of 0..n")]
    NotMagic(usize),
    #[error("square is magic but not normalized (first row identity, zero diagonal)")]
    NotNormalized,
    #[error("grid is not square")]
    NotSquareGrid,
    #[error("cell ({0}, {1}) matches no first-row projection, or more than one")]
    NotCommutativeStructure(usize, usize),
    #[error("first-row projections are not pairwise distinct")]
    DegenerateFirstRow,
    #[error("msq parse error: {0}")]
    Parse(String),
}

/// Normalized magic square.
#[derive(Clone, PartialEq, Eq)]
pub struct MagicSquare {
    cells: Vec<Vec<usize>>,
}

fn is_permutation_of_symbols(row: impl Iterator<Item = usize>, n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut count = 0;
    for v in row {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
        count += 1;
    }
    count == n
}

fn check_magic(cells: &[Vec<usize>]) -> Result<(), SquareError> {
    let n = cells.len();
    if cells.iter().any(|r| r.len() != n) {
        return Err(SquareError::NotSquareGrid);
    }
    for (i, row) in cells.iter().enumerate() {
        if !is_permutation_of_symbols(row.iter().copied(), n) {
            return Err(SquareError::NotMagic(i));
        }
    }
    for j in 0..n {
        if !is_permutation_of_symbols((0..n).map(|i| cells[i][j]), n) {
            return Err(SquareError::NotMagic(j));
        }
    }
    Ok(())
}

impl MagicSquare {
    /// Accepts only normalized magic squares; see [`normalize`] for raw grids.
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self, SquareError> {
        check_magic(&cells)?;
        let n = cells.len();
        let normalized = (0..n).all(|j| cells[0][j] == j) && (0..n).all(|i| cells[i][i] == 0);
        if !normalized {
            return Err(SquareError::NotNormalized);
        }
        Ok(MagicSquare { cells })
    }

    /// The circulant square `σ(i,j) = j - i (mod n)`.
    pub fn circulant(n: usize) -> Self {
        let cells = (0..n)
            .map(|i| (0..n).map(|j| (n + j - i) % n).collect())
            .collect();
        MagicSquare { cells }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i][j]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Row `i` as the permutation `j -> σ(i,j)`.
    pub fn rows_as_permutations(&self) -> Vec<Permutation> {
        self.cells
            .iter()
            .map(|row| Permutation::new(row.clone()).expect("rows are permutations"))
            .collect()
    }
}

impl fmt::Debug for MagicSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MagicSquare(n={})", self.n())?;
        for row in &self.cells {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Brings a raw magic grid into normalized form: first a column permutation
/// makes row 0 the identity, then a row permutation zeroes the diagonal.
/// Returns the square together with the applied permutations, acting as
/// `normalized[i][j] = raw[row_perm(i)][col_perm(j)]`.
pub fn normalize(
    raw: &[Vec<usize>],
) -> Result<(MagicSquare, Permutation, Permutation), SquareError> {
    check_magic(raw)?;
    let n = raw.len();

    let mut col_images = vec![0; n];
    for (pos, &symbol) in raw[0].iter().enumerate() {
        col_images[symbol] = pos;
    }
    let col_perm = Permutation::new(col_images).expect("row 0 is a permutation");

    // After the column step, row r has its 0 where raw[r][col_perm(j)] = 0.
    let mut row_images = vec![0; n];
    for r in 0..n {
        let j = (0..n)
            .find(|&j| raw[r][col_perm.apply(j)] == 0)
            .expect("every row contains the symbol 0");
        row_images[j] = r;
    }
    let row_perm = Permutation::new(row_images).expect("zeros form a transversal");

    let cells = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| raw[row_perm.apply(i)][col_perm.apply(j)])
                .collect()
        })
        .collect();
    let square = MagicSquare::new(cells).expect("normalization yields a normalized square");
    Ok((square, row_perm, col_perm))
}

/// [`extract_square`] output: the square plus any normalization that had to
/// be applied on top of the raw cell-matching table.
#[derive(Clone, Debug)]
pub struct ExtractedSquare {
    pub square: MagicSquare,
    pub row_adjust: Permutation,
    pub col_adjust: Permutation,
}

impl ExtractedSquare {
    pub fn was_adjusted(&self) -> bool {
        !self.row_adjust.is_identity() || !self.col_adjust.is_identity()
    }
}

/// Matches every cell of a commuting projection grid against the first row,
/// producing the square `σ` with `P[i][j] = P[0][σ(i,j)]`. Matching accepts a
/// nearest cell within `tol` and rejects when the second-nearest is closer
/// than `2·tol`.
pub fn extract_square(grid: &ProjectionGrid, tol: f64) -> Result<ExtractedSquare, SquareError> {
    let n = grid.size();
    let first_row: Vec<_> = (0..n).map(|k| grid.cell(0, k)).collect();
    for a in 0..n {
        for b in (a + 1)..n {
            if (first_row[a] - first_row[b]).norm() <= 2.0 * tol {
                return Err(SquareError::DegenerateFirstRow);
            }
        }
    }

    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut best = (f64::MAX, 0usize);
            let mut second = f64::MAX;
            for (k, e) in first_row.iter().enumerate() {
                let d = (grid.cell(i, j) - *e).norm();
                if d < best.0 {
                    second = best.0;
                    best = (d, k);
                } else if d < second {
                    second = d;
                }
            }
            if best.0 > tol || second < 2.0 * tol {
                return Err(SquareError::NotCommutativeStructure(i, j));
            }
            table[i][j] = best.1;
        }
    }

    match MagicSquare::new(table.clone()) {
        Ok(square) => Ok(ExtractedSquare {
            square,
            row_adjust: Permutation::identity(n),
            col_adjust: Permutation::identity(n),
        }),
        Err(SquareError::NotNormalized) => {
            let (square, row_adjust, col_adjust) = normalize(&table)?;
            Ok(ExtractedSquare {
                square,
                row_adjust,
                col_adjust,
            })
        }
        Err(e) => Err(e),
    }
}

/// Writes the `.msq` text format.
pub fn write_msq(square: &MagicSquare) -> String {
    let mut out = format!("msq v1 n={}\n", square.n());
    for row in square.cells() {
        let items: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&items.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_msq(text: &str) -> Result<MagicSquare, SquareError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| SquareError::Parse("empty input".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("msq") || fields.next() != Some("v1") {
        return Err(SquareError::Parse("expected `msq v1` header".into()));
    }
    let n: usize = fields
        .next()
        .and_then(|f| f.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| SquareError::Parse("header missing n=<n>".into()))?;
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| SquareError::Parse("missing row".into()))?;
        let row: Result<Vec<usize>, _> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| SquareError::Parse(format!("bad entry `{tok}`")))
            })
            .collect();
        cells.push(row?);
    }
    if lines.next().is_some() {
        return Err(SquareError::Parse("trailing content".into()));
    }
    MagicSquare::new(cells)
}

/// The 4×4 square whose rows form the Klein four-group.
#[cfg(test)]
pub(crate) fn klein_square() -> MagicSquare {
    MagicSquare::new(vec![
        vec![0, 1, 2, 3],
        vec![1, 0, 3, 2],
        vec![2, 3, 0, 1],
        vec![3, 2, 1, 0],
    ])
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_normalized_squares() {
        klein_square();
        for n in 1..=6 {
            let c = MagicSquare::circulant(n);
            assert_eq!(MagicSquare::new(c.cells().to_vec()).unwrap(), c);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            MagicSquare::new(vec![vec![0, 1], vec![0, 1]]),
            Err(SquareError::NotMagic(_))
        ));
        assert!(matches!(
            MagicSquare::new(vec![vec![1, 0], vec![0, 1]]),
            Err(SquareError::NotNormalized)
        ));
    }

    #[test]
    fn normalize_is_identity_on_normalized_input() {
        let s = klein_square();
        let (back, rp, cp) = normalize(s.cells()).unwrap();
        assert_eq!(back, s);
        assert!(rp.is_identity() && cp.is_identity());

        let c = MagicSquare::circulant(5);
        let (back, rp, cp) = normalize(c.cells()).unwrap();
        assert_eq!(back, c);
        assert!(rp.is_identity() && cp.is_identity());
    }

    #[test]
    fn normalize_undoes_row_swap() {
        let s = klein_square();
        let mut raw = s.cells().to_vec();
        raw.swap(1, 2);
        let (back, rp, cp) = normalize(&raw).unwrap();
        assert_eq!(back, s);
        assert!(cp.is_identity());
        assert_eq!(rp.images(), &[0, 2, 1, 3]);
    }

    #[test]
    fn normalize_arbitrary_scramble() {
        let c = MagicSquare::circulant(6);
        // Scramble rows and columns, then check the recorded permutations
        // replay the normalization.
        let raw: Vec<Vec<usize>> = [3, 0, 5, 1, 4, 2]
            .iter()
            .map(|&i| [2, 4, 0, 3, 5, 1].iter().map(|&j| c.get(i, j)).collect())
            .collect();
        let (square, rp, cp) = normalize(&raw).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(square.get(i, j), raw[rp.apply(i)][cp.apply(j)]);
            }
        }
    }

    #[test]
    fn rows_as_permutations_of_klein_square() {
        let perms = klein_square().rows_as_permutations();
        assert_eq!(perms[0].images(), &[0, 1, 2, 3]);
        assert_eq!(perms[1].images(), &[1, 0, 3, 2]);
        assert_eq!(perms[2].images(), &[2, 3, 0, 1]);
        assert_eq!(perms[3].images(), &[3, 2, 1, 0]);
        for p in &perms[1..] {
            assert_eq!(p.order(), 2);
        }
    }

    #[test]
    fn circulant_rows_are_shift_cycles() {
        let c = MagicSquare::circulant(5);
        let perms = c.rows_as_permutations();
        assert!(perms[0].is_identity());
        // Row 1 is the cycle j -> j - 1 (mod n).
        for j in 0..5 {
            assert_eq!(perms[1].apply(j), (j + 4) % 5);
        }
    }

    #[test]
    fn row_permutations_are_distinct_bijections() {
        for square in [klein_square(), MagicSquare::circulant(7)] {
            let perms = square.rows_as_permutations();
            for a in 0..perms.len() {
                for b in (a + 1)..perms.len() {
                    assert_ne!(perms[a], perms[b]);
                }
            }
        }
    }

    #[test]
    fn extract_square_from_fourier_grids() {
        use crate::magic::{magic_basis, projection_grid};
        for n in 2..=6 {
            let g = projection_grid(&magic_basis(&crate::catalogue::fourier(n)));
            let extracted = extract_square(&g, 1e-6).unwrap();
            assert_eq!(extracted.square, MagicSquare::circulant(n));
            assert!(!extracted.was_adjusted());
        }
    }

    #[test]
    fn extract_square_from_mq_one() {
        use crate::magic::{magic_basis, projection_grid};
        let h = crate::catalogue::mq(crate::phase::Phase::one()).unwrap();
        let g = projection_grid(&magic_basis(&h));
        let extracted = extract_square(&g, 1e-6).unwrap();
        assert_eq!(extracted.square, klein_square());
    }

    #[test]
    fn extract_square_rejects_tao() {
        use crate::magic::{magic_basis, projection_grid};
        let g = projection_grid(&magic_basis(&crate::catalogue::tao()));
        assert!(matches!(
            extract_square(&g, 1e-6),
            Err(SquareError::NotCommutativeStructure(_, _))
        ));
    }

    #[test]
    fn extract_then_e_sigma_round_trips() {
        use crate::magic::{e_sigma, magic_basis, projection_grid};
        for h in [
            crate::catalogue::fourier(5),
            crate::catalogue::mq(crate::phase::Phase::i()).unwrap(),
        ] {
            let g = projection_grid(&magic_basis(&h));
            let extracted = extract_square(&g, 1e-6).unwrap();
            let first_row: Vec<_> = (0..g.size()).map(|k| g.cell(0, k).clone()).collect();
            let rebuilt = e_sigma(&first_row, &extracted.square, 1e-9).unwrap();
            for i in 0..g.size() {
                for j in 0..g.size() {
                    assert!((rebuilt.cell(i, j) - g.cell(i, j)).norm() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn msq_round_trip() {
        let s = klein_square();
        let text = write_msq(&s);
        assert!(text.starts_with("msq v1 n=4"));
        assert_eq!(read_msq(&text).unwrap(), s);
        assert!(read_msq("msq v1 n=2\n0 1\n0 1\n").is_err());
        assert!(read_msq("nope").is_err());
    }
}
