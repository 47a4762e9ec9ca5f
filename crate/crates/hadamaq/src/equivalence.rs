//! Hadamard equivalence: row/column permutations combined with row/column
//! multiplication by unit scalars, packaged as replayable witnesses.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hadamard::{HadamardError, HadamardMatrix};
use crate::perm::Permutation;
use crate::phase::Phase;

/// A concrete equivalence move. Applying it to a matrix `h` produces
/// `h'[i][j] = row_phases[i] · col_phases[j] · h[row_perm(i)][col_perm(j)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceWitness {
    pub row_perm: Permutation,
    pub col_perm: Permutation,
    pub row_phases: Vec<Phase>,
    pub col_phases: Vec<Phase>,
}

impl EquivalenceWitness {
    pub fn identity(n: usize) -> Self {
        EquivalenceWitness {
            row_perm: Permutation::identity(n),
            col_perm: Permutation::identity(n),
            row_phases: vec![Phase::one(); n],
            col_phases: vec![Phase::one(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.row_perm.len()
    }

    pub fn is_identity(&self) -> bool {
        self.row_perm.is_identity()
            && self.col_perm.is_identity()
            && self.row_phases.iter().all(Phase::is_one)
            && self.col_phases.iter().all(Phase::is_one)
    }

    /// Permutation-only witnesses leave entry multisets (and Butson levels)
    /// unchanged.
    pub fn is_permutation_only(&self) -> bool {
        self.row_phases.iter().all(Phase::is_one) && self.col_phases.iter().all(Phase::is_one)
    }

    pub fn apply(&self, h: &HadamardMatrix) -> Result<HadamardMatrix, HadamardError> {
        let n = h.n();
        if self.n() != n {
            return Err(HadamardError::DimensionMismatch {
                witness: self.n(),
                matrix: n,
            });
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.row_phases[i]
                            * self.col_phases[j]
                            * h.entry(self.row_perm.apply(i), self.col_perm.apply(j))
                    })
                    .collect()
            })
            .collect();
        Ok(HadamardMatrix::from_rows(rows).expect("square by construction"))
    }

    /// The witness equivalent to applying `first`, then `self`.
    pub fn after(&self, first: &EquivalenceWitness) -> EquivalenceWitness {
        assert_eq!(self.n(), first.n());
        let n = self.n();
        EquivalenceWitness {
            row_perm: first.row_perm.compose(&self.row_perm),
            col_perm: first.col_perm.compose(&self.col_perm),
            row_phases: (0..n)
                .map(|i| self.row_phases[i] * first.row_phases[self.row_perm.apply(i)])
                .collect(),
            col_phases: (0..n)
                .map(|j| self.col_phases[j] * first.col_phases[self.col_perm.apply(j)])
                .collect(),
        }
    }

    /// Equivalent witness with `col_phases[0] = 1`: the common factor moves
    /// into the row phases. The action on matrices is unchanged.
    pub fn normalized(mut self) -> Self {
        let c0 = self.col_phases[0];
        if !c0.is_one() {
            for r in &mut self.row_phases {
                *r = *r * c0;
            }
            for c in &mut self.col_phases {
                *c = *c / c0;
            }
        }
        self
    }

    /// Seeded random witness with exact phases drawn from the `phase_order`-th
    /// roots of unity, so exact-mode matrices stay exact.
    pub fn random(n: usize, seed: u64, phase_order: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut row_images: Vec<usize> = (0..n).collect();
        row_images.shuffle(&mut rng);
        let mut col_images: Vec<usize> = (0..n).collect();
        col_images.shuffle(&mut rng);
        let phase =
            |rng: &mut ChaCha8Rng| Phase::root(rng.gen_range(0..phase_order) as i64, phase_order);
        let row_phases = (0..n).map(|_| phase(&mut rng)).collect();
        let col_phases = (0..n).map(|_| phase(&mut rng)).collect();
        EquivalenceWitness {
            row_perm: Permutation::new(row_images).expect("shuffled identity"),
            col_perm: Permutation::new(col_images).expect("shuffled identity"),
            row_phases,
            col_phases,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::hadamard::ButsonLevel;
    use crate::DEFAULT_TOL;

    #[test]
    fn identity_witness_is_noop() {
        let h = catalogue::fourier(4);
        assert_eq!(EquivalenceWitness::identity(4).apply(&h).unwrap(), h);
    }

    #[test]
    fn row_swap_on_fourier_two() {
        let h = catalogue::fourier(2);
        let mut w = EquivalenceWitness::identity(2);
        w.row_perm = Permutation::new(vec![1, 0]).unwrap();
        let s = w.apply(&h).unwrap();
        assert_eq!(s.entry(0, 0), Phase::one());
        assert_eq!(s.entry(0, 1), Phase::minus_one());
        assert_eq!(s.entry(1, 0), Phase::one());
        assert_eq!(s.entry(1, 1), Phase::one());
    }

    #[test]
    fn dimension_mismatch_detected() {
        let h = catalogue::fourier(3);
        assert!(EquivalenceWitness::identity(4).apply(&h).is_err());
    }

    #[test]
    fn random_witness_preserves_hadamard() {
        let h = catalogue::haagerup();
        for seed in 0..25 {
            let w = EquivalenceWitness::random(6, seed, 24);
            let s = w.apply(&h).unwrap();
            assert!(s.is_hadamard(DEFAULT_TOL), "seed {seed}");
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let h = catalogue::tao();
        let w1 = EquivalenceWitness::random(6, 7, 24);
        let w2 = EquivalenceWitness::random(6, 8, 24);
        let sequential = w2.apply(&w1.apply(&h).unwrap()).unwrap();
        let composed = w2.after(&w1).apply(&h).unwrap();
        assert_eq!(sequential, composed);
    }

    #[test]
    fn butson_level_invariant_under_permutation_only_witness() {
        for (h, expect) in [
            (catalogue::tao(), 3),
            (catalogue::haagerup(), 4),
            (catalogue::fourier(5), 5),
        ] {
            for seed in 0..10 {
                let mut w = EquivalenceWitness::random(h.n(), seed, 24);
                w.row_phases = vec![Phase::one(); h.n()];
                w.col_phases = vec![Phase::one(); h.n()];
                assert!(w.is_permutation_only());
                let s = w.apply(&h).unwrap();
                assert_eq!(s.butson_level(48), ButsonLevel::Finite(expect));
            }
        }
    }
}
