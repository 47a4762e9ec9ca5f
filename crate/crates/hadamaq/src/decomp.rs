//! Decides whether a Hadamard matrix is equivalent to a tensor product of
//! Fourier matrices, and produces the equivalence witness when it is.
//!
//! Rows taken modulo constant vectors either fail to close under quotients
//! (the non-commutative case) or form a finite abelian group; decomposing
//! that group into cyclic factors with explicit generators yields the row
//! and column relabelings onto `F_{d_1} ⊗ … ⊗ F_{d_k}` directly.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::equivalence::EquivalenceWitness;
use crate::hadamard::{dephase, HadamardMatrix};
use crate::perm::Permutation;
use crate::phase::{vec_equal_mod_scalar, Phase, UnitVector};
use crate::{catalogue, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("matrix is not dephased (row 0 must be all ones)")]
    NotDephased,
    #[error("row-class quotient ({i}, {j}) matches no row class")]
    NotClosed { i: usize, j: usize },
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("row classes are not closed under quotients at ({i}, {j})")]
    NotCommutative { i: usize, j: usize },
    #[error("entry ({i}, {j}) is not a root of unity of order <= {max_order}")]
    SnapFailure { i: usize, j: usize, max_order: u64 },
}

/// A matrix row viewed modulo constant scalars, represented by the unique
/// multiple with first entry 1.
#[derive(Clone, Debug)]
pub struct RowClass {
    pub index: usize,
    pub representative: UnitVector,
}

pub fn row_classes(h: &HadamardMatrix) -> Vec<RowClass> {
    (0..h.n())
        .map(|i| {
            let first = h.row(i).get(0);
            let scale = UnitVector::new(vec![first; h.n()]);
            RowClass {
                index: i,
                representative: h.row(i).div(&scale),
            }
        })
        .collect()
}

/// Table `t` with `class(h_j)/class(h_i) = class(h_{t(i,j)})`, or the first
/// failing pair. On success the table is a normalized magic square.
pub fn quotient_table(h: &HadamardMatrix, tol: f64) -> Result<Vec<Vec<usize>>, QuotientError> {
    let n = h.n();
    let ones = UnitVector::constant_one(n);
    if vec_equal_mod_scalar(h.row(0), &ones, tol)
        .is_none_or(|lambda| !lambda.is_one() && lambda.dist(&Phase::one()) > tol)
    {
        return Err(QuotientError::NotDephased);
    }
    let classes = row_classes(h);
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = h.row(j).div(h.row(i));
            let hit = classes
                .iter()
                .find(|c| vec_equal_mod_scalar(&v, &c.representative, tol).is_some());
            match hit {
                Some(c) => table[i][j] = c.index,
                None => return Err(QuotientError::NotClosed { i, j }),
            }
        }
    }
    Ok(table)
}

/// A successful outcome of [`decompose`]: `factor_sizes` is the invariant-
/// factor chain (`d_1 | d_2 | …`, each ≥ 2, product `n`) and `witness` maps
/// the input onto `fourier(d_1) ⊗ … ⊗ fourier(d_k)`.
#[derive(Clone, Debug)]
pub struct FourierDecomposition {
    pub factor_sizes: Vec<u64>,
    pub witness: EquivalenceWitness,
}

impl FourierDecomposition {
    /// The tensor product of Fourier matrices this decomposition targets.
    pub fn target(&self) -> HadamardMatrix {
        self.factor_sizes
            .iter()
            .fold(catalogue::fourier(1), |acc, &d| {
                crate::hadamard::tensor(&acc, &catalogue::fourier(d as usize))
            })
    }
}

/// Multiplication table of the row-class group, on row indices with the
/// all-ones class at index 0.
struct ClassGroup {
    n: usize,
    mul: Vec<Vec<usize>>,
}

impl ClassGroup {
    /// `quotients[i][j]` holds the class of `H_j / H_i`.
    fn from_quotients(quotients: &[Vec<usize>]) -> Self {
        let n = quotients.len();
        let inv: Vec<usize> = (0..n).map(|b| quotients[b][0]).collect();
        let mul = (0..n)
            .map(|a| (0..n).map(|b| quotients[inv[b]][a]).collect())
            .collect();
        ClassGroup { n, mul }
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    fn order_of(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    fn powers(&self, a: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([0]);
        let mut x = a;
        while x != 0 {
            out.insert(x);
            x = self.mul(x, a);
        }
        out
    }

    fn closure(&self, seed: &[usize]) -> BTreeSet<usize> {
        let mut known = BTreeSet::from([0]);
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &g in seed {
                let y = self.mul(x, g);
                if known.insert(y) {
                    frontier.push(y);
                }
            }
        }
        known
    }
}

/// Generators of a direct decomposition into cyclic factors, orders
/// descending, obtained by repeatedly splitting off an element of maximal
/// order and brute-forcing a complement subgroup.
fn abelian_basis(group: &ClassGroup) -> Vec<(usize, u64)> {
    let mut basis = Vec::new();
    let mut members: Vec<usize> = (0..group.n).collect();
    while members.len() > 1 {
        let (gen, ord) = members
            .iter()
            .map(|&x| (x, group.order_of(x)))
            .max_by_key(|&(x, d)| (d, std::cmp::Reverse(x)))
            .expect("nontrivial subgroup");
        basis.push((gen, ord));
        let want = members.len() / ord as usize;
        if want == 1 {
            break;
        }
        let powers = group.powers(gen);
        members = find_complement(group, &members, &powers, want);
    }
    basis
}

fn find_complement(
    group: &ClassGroup,
    members: &[usize],
    powers: &BTreeSet<usize>,
    want: usize,
) -> Vec<usize> {
    let candidates: Vec<usize> = members.iter().copied().filter(|&x| x != 0).collect();
    let max_rank = usize::BITS - (want - 1).leading_zeros().min(usize::BITS - 1);
    let mut subset = Vec::new();
    for size in 1..=(max_rank as usize) {
        if let Some(found) = search_subsets(group, &candidates, powers, want, size, 0, &mut subset)
        {
            return found;
        }
    }
    unreachable!("a maximal-order cyclic factor of a finite abelian group always has a complement")
}

fn search_subsets(
    group: &ClassGroup,
    candidates: &[usize],
    powers: &BTreeSet<usize>,
    want: usize,
    size: usize,
    start: usize,
    subset: &mut Vec<usize>,
) -> Option<Vec<usize>> {
    if subset.len() == size {
        let closure = group.closure(subset);
        let trivial_meet = closure.intersection(powers).count() == 1;
        if closure.len() == want && trivial_meet {
            return Some(closure.into_iter().collect());
        }
        return None;
    }
    for i in start..candidates.len() {
        subset.push(candidates[i]);
        let found = search_subsets(group, candidates, powers, want, size, i + 1, subset);
        subset.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Decides commutativity constructively. Approximate inputs are dephased and
/// snapped to exact roots of unity of order at most `max_order` first.
pub fn decompose(
    h: &HadamardMatrix,
    max_order: u64,
) -> Result<FourierDecomposition, DecomposeError> {
    let dephased = dephase(h);
    let exact = match dephased.matrix.snap(max_order, DEFAULT_TOL) {
        Some(m) => m,
        None => {
            let (i, j) = first_snap_failure(&dephased.matrix, max_order);
            return Err(DecomposeError::SnapFailure { i, j, max_order });
        }
    };
    let n = exact.n();

    let quotients = quotient_table(&exact, DEFAULT_TOL).map_err(|e| match e {
        QuotientError::NotClosed { i, j } => DecomposeError::NotCommutative { i, j },
        QuotientError::NotDephased => unreachable!("matrix was dephased above"),
    })?;
    let group = ClassGroup::from_quotients(&quotients);

    let mut basis = abelian_basis(&group);
    basis.reverse(); // ascending divisibility chain
    let factor_sizes: Vec<u64> = basis.iter().map(|&(_, d)| d).collect();

    // Row side: the row whose class has coordinates (a_1, …, a_k) moves to
    // the lexicographic position of that tuple.
    let mut row_images = vec![usize::MAX; n];
    let mut coords = vec![0u64; basis.len()];
    for lex in 0..n {
        let mut class = 0usize;
        for (i, &(g, _)) in basis.iter().enumerate() {
            let mut power = 0;
            for _ in 0..coords[i] {
                power = group.mul(power, g);
            }
            class = group.mul(class, power);
        }
        debug_assert_eq!(
            row_images[lex],
            usize::MAX,
            "coordinate map must be bijective"
        );
        row_images[lex] = class;
        for i in (0..basis.len()).rev() {
            coords[i] += 1;
            if coords[i] < basis[i].1 {
                break;
            }
            coords[i] = 0;
        }
    }
    let row_perm = Permutation::new(row_images).expect("classes enumerate each row once");

    // Column side: reading off the generator rows at column c gives the digit
    // tuple b(c); column c moves to the lexicographic position of b(c).
    let mut col_images = vec![usize::MAX; n];
    for c in 0..n {
        let mut lex = 0u64;
        for &(g, d) in &basis {
            let root = exact
                .entry(g, c)
                .as_root()
                .expect("matrix entries are exact after snapping");
            debug_assert_eq!(d % root.order(), 0, "generator row entries are d-th roots");
            let digit = root.num() * (d / root.order()) % d;
            lex = lex * d + digit;
        }
        debug_assert_eq!(
            col_images[lex as usize],
            usize::MAX,
            "digit tuples must be distinct across columns"
        );
        col_images[lex as usize] = c;
    }
    let col_perm = Permutation::new(col_images).expect("digit map covers all columns");

    let relabel = EquivalenceWitness {
        row_perm,
        col_perm,
        row_phases: vec![Phase::one(); n],
        col_phases: vec![Phase::one(); n],
    };
    let witness = relabel.after(&dephased.witness);
    let decomposition = FourierDecomposition {
        factor_sizes,
        witness,
    };
    debug_assert!(verify_decomposition(h, &decomposition).pass);
    Ok(decomposition)
}

fn first_snap_failure(h: &HadamardMatrix, max_order: u64) -> (usize, usize) {
    for i in 0..h.n() {
        for j in 0..h.n() {
            if h.entry(i, j).snap_to_root(max_order, DEFAULT_TOL).is_none() {
                return (i, j);
            }
        }
    }
    (0, 0)
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOutcome {
    pub pass: bool,
    pub max_residual: f64,
}

/// Applies the witness and compares entrywise against the tensor product of
/// Fourier matrices. Structurally equal exact matrices give residual 0.
pub fn verify_decomposition(h: &HadamardMatrix, d: &FourierDecomposition) -> VerifyOutcome {
    let applied = match d.witness.apply(h) {
        Ok(m) => m,
        Err(_) => {
            return VerifyOutcome {
                pass: false,
                max_residual: f64::INFINITY,
            }
        }
    };
    let target = d.target();
    if applied.n() != target.n() {
        return VerifyOutcome {
            pass: false,
            max_residual: f64::INFINITY,
        };
    }
    let mut max_residual = 0.0f64;
    for i in 0..target.n() {
        for j in 0..target.n() {
            max_residual = max_residual.max(applied.entry(i, j).dist(&target.entry(i, j)));
        }
    }
    VerifyOutcome {
        pass: max_residual <= DEFAULT_TOL,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::tensor;
    use crate::square::MagicSquare;
    use crate::DEFAULT_MAX_ORDER;

    #[test]
    fn quotient_table_of_fourier_is_circulant() {
        for n in 2..=6 {
            let table = quotient_table(&catalogue::fourier(n), DEFAULT_TOL).unwrap();
            assert_eq!(table, MagicSquare::circulant(n).cells());
        }
    }

    #[test]
    fn quotient_table_of_mq_one_is_klein() {
        let h = catalogue::mq(Phase::one()).unwrap();
        let table = quotient_table(&h, DEFAULT_TOL).unwrap();
        let klein = vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ];
        assert_eq!(table, klein);
    }

    #[test]
    fn quotient_table_rejects_tao() {
        let err = quotient_table(&catalogue::tao(), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, QuotientError::NotClosed { .. }));
    }

    #[test]
    fn quotient_table_requires_dephased_input() {
        let err = quotient_table(&catalogue::haagerup(), DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, QuotientError::NotDephased));
    }

    #[test]
    fn fourier_decomposes_to_itself() {
        let d = decompose(&catalogue::fourier(6), DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(d.factor_sizes, vec![6]);
        assert!(d.witness.is_identity());
        assert!(verify_decomposition(&catalogue::fourier(6), &d).pass);
    }

    #[test]
    fn tensor_square_of_f2_gives_two_two() {
        let h = tensor(&catalogue::fourier(2), &catalogue::fourier(2));
        let d = decompose(&h, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(d.factor_sizes, vec![2, 2]);
        let outcome = verify_decomposition(&h, &d);
        assert!(outcome.pass);
        assert_eq!(outcome.max_residual, 0.0);
    }

    #[test]
    fn f2_tensor_f3_is_cyclic_six() {
        let h = tensor(&catalogue::fourier(2), &catalogue::fourier(3));
        let d = decompose(&h, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(d.factor_sizes, vec![6]);
        let applied = d.witness.apply(&h).unwrap();
        assert_eq!(applied, catalogue::fourier(6));
    }

    #[test]
    fn mq_values_of_q() {
        let cases = [
            (Phase::one(), vec![2, 2]),
            (Phase::minus_one(), vec![2, 2]),
            (Phase::i(), vec![4]),
            (Phase::root(3, 4), vec![4]),
        ];
        for (q, want) in cases {
            let h = catalogue::mq(q).unwrap();
            let d = decompose(&h, DEFAULT_MAX_ORDER).unwrap();
            assert_eq!(d.factor_sizes, want, "q = {q:?}");
            assert!(verify_decomposition(&h, &d).pass);
        }
    }

    #[test]
    fn haagerup_and_tao_are_not_commutative() {
        for h in [catalogue::haagerup(), catalogue::tao()] {
            let err = decompose(&h, DEFAULT_MAX_ORDER).unwrap_err();
            assert!(matches!(err, DecomposeError::NotCommutative { .. }));
        }
    }

    #[test]
    fn generic_mq_fails_to_snap() {
        let z = num_complex::Complex64::from_polar(1.0, 0.3);
        let q = Phase::approx(z.re, z.im).unwrap();
        let h = catalogue::mq(q).unwrap();
        let err = decompose(&h, DEFAULT_MAX_ORDER).unwrap_err();
        assert!(matches!(err, DecomposeError::SnapFailure { .. }));
    }

    #[test]
    fn decompose_survives_scrambling() {
        for seed in 0..20 {
            let h = catalogue::fourier(4);
            let w = EquivalenceWitness::random(4, seed, 24);
            let scrambled = w.apply(&h).unwrap();
            let d = decompose(&scrambled, DEFAULT_MAX_ORDER).unwrap();
            assert_eq!(d.factor_sizes, vec![4], "seed {seed}");
            let outcome = verify_decomposition(&scrambled, &d);
            assert!(outcome.pass, "seed {seed}");
            assert_eq!(outcome.max_residual, 0.0, "seed {seed}");
        }
    }

    #[test]
    fn corrupted_witness_fails_verification() {
        let h = tensor(&catalogue::fourier(2), &catalogue::fourier(2));
        let mut d = decompose(&h, DEFAULT_MAX_ORDER).unwrap();
        d.witness.row_phases[1] = d.witness.row_phases[1] * Phase::i();
        assert!(!verify_decomposition(&h, &d).pass);
    }

    #[test]
    fn factor_chain_properties() {
        // Larger mixed product: F2 ⊗ F2 ⊗ F3 has row-class group Z2 × Z6.
        let h = tensor(
            &tensor(&catalogue::fourier(2), &catalogue::fourier(2)),
            &catalogue::fourier(3),
        );
        let d = decompose(&h, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(d.factor_sizes, vec![2, 6]);
        assert_eq!(d.factor_sizes.iter().product::<u64>(), 12);
        assert!(verify_decomposition(&h, &d).pass);
    }
}
