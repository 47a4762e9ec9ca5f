//! Finite groups generated by closure: permutations and unitary monomial
//! matrices with exact phases, so membership is structural and hashing never
//! touches floating point.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::magic::CMat;
use crate::perm::Permutation;
use crate::phase::Root;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("group is not abelian")]
    NotAbelian,
    #[error("no generators supplied")]
    NoGenerators,
    #[error("generators act on different degrees")]
    DegreeMismatch,
}

/// Matrix with exactly one nonzero entry per row and column, all of them
/// exact roots of unity: `e_i` maps to `phases[i] · e_{perm(i)}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    perm: Permutation,
    phases: Vec<Root>,
}

impl Monomial {
    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn phases(&self) -> &[Root] {
        &self.phases
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "monomial({:?}, {:?})", self.perm, self.phases)
    }
}

/// Element of a permutation or monomial matrix group. Monomials whose phases
/// are all 1 canonicalize to plain permutations so the two representations
/// never alias inside one closure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Perm(Permutation),
    Monomial(Monomial),
}

impl GroupElement {
    pub fn identity(degree: usize) -> Self {
        GroupElement::Perm(Permutation::identity(degree))
    }

    pub fn perm(p: Permutation) -> Self {
        GroupElement::Perm(p)
    }

    pub fn monomial(perm: Permutation, phases: Vec<Root>) -> Self {
        assert_eq!(perm.len(), phases.len());
        if phases.iter().all(Root::is_one) {
            GroupElement::Perm(perm)
        } else {
            GroupElement::Monomial(Monomial { perm, phases })
        }
    }

    /// Diagonal matrix with the given exact phases.
    pub fn diagonal(phases: Vec<Root>) -> Self {
        GroupElement::monomial(Permutation::identity(phases.len()), phases)
    }

    pub fn degree(&self) -> usize {
        match self {
            GroupElement::Perm(p) => p.len(),
            GroupElement::Monomial(m) => m.perm.len(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, GroupElement::Perm(p) if p.is_identity())
    }

    fn parts(&self) -> (Permutation, Vec<Root>) {
        match self {
            GroupElement::Perm(p) => (p.clone(), vec![Root::one(); p.len()]),
            GroupElement::Monomial(m) => (m.perm.clone(), m.phases.clone()),
        }
    }

    /// `self ∘ other`: apply `other` first. On basis vectors,
    /// `e_i ↦ φ_other[i]·φ_self[p_other(i)] · e_{p_self(p_other(i))}`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.degree(), other.degree());
        match (self, other) {
            (GroupElement::Perm(a), GroupElement::Perm(b)) => GroupElement::Perm(a.compose(b)),
            _ => {
                let (pa, fa) = self.parts();
                let (pb, fb) = other.parts();
                let phases = (0..self.degree())
                    .map(|i| fb[i].mul(&fa[pb.apply(i)]))
                    .collect();
                GroupElement::monomial(pa.compose(&pb), phases)
            }
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Perm(p) => GroupElement::Perm(p.inverse()),
            GroupElement::Monomial(m) => {
                let inv = m.perm.inverse();
                let phases = (0..m.perm.len())
                    .map(|j| m.phases[inv.apply(j)].conj())
                    .collect();
                GroupElement::monomial(inv, phases)
            }
        }
    }

    pub fn order(&self) -> u64 {
        let mut x = self.clone();
        let mut k = 1;
        while !x.is_identity() {
            x = self.compose(&x);
            k += 1;
        }
        k
    }

    pub fn commutes_with(&self, other: &GroupElement) -> bool {
        self.compose(other) == other.compose(self)
    }

    pub fn to_matrix(&self) -> CMat {
        let n = self.degree();
        let (p, phases) = self.parts();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(p.apply(i), i)] = phases[i].value();
        }
        m
    }

    pub fn pow(&self, e: u64) -> GroupElement {
        let mut acc = GroupElement::identity(self.degree());
        for _ in 0..e {
            acc = self.compose(&acc);
        }
        acc
    }
}

/// Breadth-first closure of the generators under composition, with inverses
/// arising automatically since every element has finite order. Output is
/// sorted, so iteration order is deterministic.
pub fn generate(gens: &[GroupElement], cap: usize) -> Result<Vec<GroupElement>, GroupError> {
    if gens.is_empty() {
        return Err(GroupError::NoGenerators);
    }
    let degree = gens[0].degree();
    if gens.iter().any(|g| g.degree() != degree) {
        return Err(GroupError::DegreeMismatch);
    }
    let mut known = BTreeSet::new();
    let mut queue = VecDeque::new();
    let id = GroupElement::identity(degree);
    known.insert(id.clone());
    queue.push_back(id);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if known.insert(y.clone()) {
                if known.len() > cap {
                    return Err(GroupError::CapExceeded(cap));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(known.into_iter().collect())
}

/// Default closure cap.
pub const GENERATE_CAP: usize = 1_000_000;

/// Family label assigned by [`match_named`]. `Unrecognized` is an honest
/// answer; the fingerprint still carries the raw invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedGroup {
    Cyclic(u64),
    /// Invariant-factor decomposition `Z_{d_1} × … × Z_{d_k}`, `d_1 | d_2 | …`.
    AbelianProduct(Vec<u64>),
    /// `Z_m ⋊ Z_2` of order `2m`, with the reflection inverting rotations.
    Dihedral {
        rotation_order: u64,
    },
    /// `Z_m ⋊ Z_4` of order `4m`.
    SemidirectZ4 {
        cyclic_order: u64,
    },
    Symmetric(u64),
    Unrecognized,
}

impl NamedGroup {
    /// Group order implied by the label, when it carries one.
    pub fn order(&self) -> Option<u64> {
        match self {
            NamedGroup::Cyclic(n) => Some(*n),
            NamedGroup::AbelianProduct(ds) => Some(ds.iter().product()),
            NamedGroup::Dihedral { rotation_order } => Some(2 * rotation_order),
            NamedGroup::SemidirectZ4 { cyclic_order } => Some(4 * cyclic_order),
            NamedGroup::Symmetric(k) => Some((1..=*k).product()),
            NamedGroup::Unrecognized => None,
        }
    }
}

impl fmt::Display for NamedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedGroup::Cyclic(n) => write!(f, "cyclic({n})"),
            NamedGroup::AbelianProduct(ds) => {
                let parts: Vec<String> = ds.iter().map(|d| format!("Z{d}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            NamedGroup::Dihedral { rotation_order } => {
                write!(f, "dihedral({})", 2 * rotation_order)
            }
            NamedGroup::SemidirectZ4 { cyclic_order } => write!(f, "Z{cyclic_order}:Z4"),
            NamedGroup::Symmetric(k) => write!(f, "symmetric({k})"),
            NamedGroup::Unrecognized => write!(f, "unrecognized"),
        }
    }
}

/// Order, commutativity, element-order statistics, and family label of a
/// closed element set.
#[derive(Clone, Debug)]
pub struct GroupFingerprint {
    pub order: usize,
    pub abelian: bool,
    /// Element order -> multiplicity.
    pub element_orders: BTreeMap<u64, usize>,
    pub center_order: usize,
    pub label: NamedGroup,
}

pub fn fingerprint(elements: &[GroupElement]) -> GroupFingerprint {
    let abelian = is_abelian(elements);
    let mut element_orders = BTreeMap::new();
    for g in elements {
        *element_orders.entry(g.order()).or_insert(0) += 1;
    }
    let center_order = elements
        .iter()
        .filter(|g| elements.iter().all(|h| g.commutes_with(h)))
        .count();
    GroupFingerprint {
        order: elements.len(),
        abelian,
        element_orders,
        center_order,
        label: match_named(elements),
    }
}

fn is_abelian(elements: &[GroupElement]) -> bool {
    for (i, g) in elements.iter().enumerate() {
        for h in &elements[i + 1..] {
            if !g.commutes_with(h) {
                return false;
            }
        }
    }
    true
}

/// Invariant factors `d_1 | d_2 | … | d_k` of a closed abelian element set,
/// from element-order counts: within each prime `p`, the count of elements
/// killed by `p^k` determines the partition of `p`-exponents.
pub fn invariant_factors(elements: &[GroupElement]) -> Result<Vec<u64>, GroupError> {
    if !is_abelian(elements) {
        return Err(GroupError::NotAbelian);
    }
    let orders: Vec<u64> = elements.iter().map(GroupElement::order).collect();
    let n = elements.len() as u64;
    let mut partitions: Vec<(u64, Vec<u32>)> = Vec::new();
    for p in prime_factors(n) {
        // counts[k] = #{g : ord(g) divides p^k}; the p-part of the group has
        // p^{Σ min(λ_i, k)} such elements.
        let mut exponents = vec![0u32];
        let mut pk = 1u64;
        loop {
            pk *= p;
            let count = orders.iter().filter(|&&o| pk.is_multiple_of(o)).count() as u64;
            let e = count.ilog(p);
            assert_eq!(
                p.pow(e),
                count,
                "element counts of an abelian group are p-powers"
            );
            if e == *exponents.last().expect("nonempty") {
                break;
            }
            exponents.push(e);
        }
        // parts_ge[k] = number of partition parts of size >= k.
        let parts_ge: Vec<u32> = exponents.windows(2).map(|w| w[1] - w[0]).collect();
        let num_parts = *parts_ge.first().unwrap_or(&0);
        let partition: Vec<u32> = (0..num_parts)
            .map(|i| parts_ge.iter().filter(|&&m| m > i).count() as u32)
            .collect();
        partitions.push((p, partition));
    }
    let rank = partitions.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut factors: Vec<u64> = (0..rank)
        .map(|j| {
            partitions
                .iter()
                .map(|(p, l)| l.get(j).map_or(1, |&e| p.pow(e)))
                .product()
        })
        .collect();
    factors.reverse();
    debug_assert_eq!(factors.iter().product::<u64>(), n);
    debug_assert!(factors.windows(2).all(|w| w[1] % w[0] == 0));
    Ok(factors)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Best-effort family identification, tried in order: cyclic, abelian
/// product, dihedral, `Z_m ⋊ Z_4`, symmetric.
pub fn match_named(elements: &[GroupElement]) -> NamedGroup {
    let n = elements.len() as u64;
    if elements.iter().any(|g| g.order() == n) {
        return NamedGroup::Cyclic(n);
    }
    if let Ok(factors) = invariant_factors(elements) {
        return NamedGroup::AbelianProduct(factors);
    }
    if n.is_multiple_of(2) {
        if let Some(m) = dihedral_check(elements, n / 2) {
            return NamedGroup::Dihedral { rotation_order: m };
        }
    }
    if n.is_multiple_of(4) {
        if let Some(m) = semidirect_z4_check(elements, n / 4) {
            return NamedGroup::SemidirectZ4 { cyclic_order: m };
        }
    }
    if let Some(k) = symmetric_check(elements) {
        return NamedGroup::Symmetric(k);
    }
    NamedGroup::Unrecognized
}

/// Presentation check `r^m = s² = 1, s·r·s = r^{-1}` with `⟨r,s⟩` the whole
/// group.
fn dihedral_check(elements: &[GroupElement], m: u64) -> Option<u64> {
    for r in elements.iter().filter(|r| r.order() == m) {
        let r_inv = r.inverse();
        for s in elements.iter().filter(|s| s.order() == 2) {
            if s.compose(r).compose(s) == r_inv && generates_all(&[r.clone(), s.clone()], elements)
            {
                return Some(m);
            }
        }
    }
    None
}

fn semidirect_z4_check(elements: &[GroupElement], m: u64) -> Option<u64> {
    for r in elements.iter().filter(|r| r.order() == m) {
        let conjugates = [r.clone(), r.inverse()];
        for s in elements.iter().filter(|s| s.order() == 4) {
            let conj = s.compose(r).compose(&s.inverse());
            if conjugates.contains(&conj) && generates_all(&[r.clone(), s.clone()], elements) {
                return Some(m);
            }
        }
    }
    None
}

/// Order `k!`, non-abelian, and (for plain permutation groups) exactly
/// `k(k-1)/2` transpositions in the natural action.
fn symmetric_check(elements: &[GroupElement]) -> Option<u64> {
    let n = elements.len() as u64;
    let k = (2u64..=9).find(|k| (1..=*k).product::<u64>() == n)?;
    if is_abelian(elements) {
        return None;
    }
    let transpositions = elements
        .iter()
        .filter(|g| match g {
            GroupElement::Perm(p) => p.support_size() == 2,
            GroupElement::Monomial(_) => false,
        })
        .count() as u64;
    (transpositions == k * (k - 1) / 2).then_some(k)
}

fn generates_all(gens: &[GroupElement], elements: &[GroupElement]) -> bool {
    match generate(gens, elements.len()) {
        Ok(closure) => closure.len() == elements.len(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::square::MagicSquare;

    fn perm(images: &[usize]) -> GroupElement {
        GroupElement::Perm(Permutation::new(images.to_vec()).unwrap())
    }

    fn closure_of_square(square: &MagicSquare) -> Vec<GroupElement> {
        let gens: Vec<GroupElement> = square
            .rows_as_permutations()
            .into_iter()
            .map(GroupElement::Perm)
            .collect();
        generate(&gens, GENERATE_CAP).unwrap()
    }

    #[test]
    fn klein_square_rows_generate_klein_group() {
        let square = MagicSquare::new(vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ])
        .unwrap();
        let closure = closure_of_square(&square);
        assert_eq!(closure.len(), 4);
        let fp = fingerprint(&closure);
        assert!(fp.abelian);
        assert_eq!(fp.element_orders, BTreeMap::from([(1, 1), (2, 3)]));
        assert_eq!(fp.label, NamedGroup::AbelianProduct(vec![2, 2]));
    }

    #[test]
    fn circulant_rows_generate_cyclic_group() {
        let closure = closure_of_square(&MagicSquare::circulant(5));
        let fp = fingerprint(&closure);
        assert_eq!(fp.order, 5);
        assert!(fp.abelian);
        assert_eq!(fp.element_orders, BTreeMap::from([(1, 1), (5, 4)]));
        assert_eq!(fp.label, NamedGroup::Cyclic(5));
        assert_eq!(fp.center_order, 5);
    }

    #[test]
    fn identity_generates_trivial_group() {
        let closure = generate(&[GroupElement::identity(4)], 10).unwrap();
        assert_eq!(closure.len(), 1);
        assert_eq!(fingerprint(&closure).label, NamedGroup::Cyclic(1));
    }

    #[test]
    fn cap_is_enforced() {
        let gens = vec![perm(&[1, 2, 3, 4, 0])];
        assert!(matches!(
            generate(&gens, 3),
            Err(GroupError::CapExceeded(3))
        ));
    }

    #[test]
    fn closure_is_closed_under_composition_and_inverse() {
        let gens = vec![perm(&[1, 0, 2, 3]), perm(&[0, 2, 3, 1])];
        let closure = generate(&gens, GENERATE_CAP).unwrap();
        let set: BTreeSet<_> = closure.iter().cloned().collect();
        for g in &closure {
            assert!(set.contains(&g.inverse()));
            for h in &closure {
                assert!(set.contains(&g.compose(h)));
            }
        }
        // Lagrange: element orders divide the group order.
        for g in &closure {
            assert_eq!(closure.len() as u64 % g.order(), 0);
        }
    }

    #[test]
    fn s4_from_transposition_and_cycle() {
        let gens = vec![perm(&[1, 0, 2, 3]), perm(&[1, 2, 3, 0])];
        let closure = generate(&gens, GENERATE_CAP).unwrap();
        assert_eq!(closure.len(), 24);
        let fp = fingerprint(&closure);
        assert_eq!(fp.label, NamedGroup::Symmetric(4));
        assert_eq!(fp.center_order, 1);
    }

    #[test]
    fn invariant_factor_chains() {
        assert_eq!(
            invariant_factors(&closure_of_square(&MagicSquare::circulant(6))).unwrap(),
            vec![6]
        );
        let klein = generate(&[perm(&[1, 0, 2, 3]), perm(&[0, 1, 3, 2])], 100).unwrap();
        assert_eq!(invariant_factors(&klein).unwrap(), vec![2, 2]);
        // Z2 × Z4 on disjoint supports.
        let z2z4 = generate(&[perm(&[1, 0, 2, 3, 4, 5]), perm(&[0, 1, 3, 4, 5, 2])], 100).unwrap();
        assert_eq!(invariant_factors(&z2z4).unwrap(), vec![2, 4]);
        // Z2 × Z2 × Z3 ≅ Z2 × Z6.
        let g = generate(
            &[
                perm(&[1, 0, 2, 3, 4, 5, 6]),
                perm(&[0, 1, 3, 2, 4, 5, 6]),
                perm(&[0, 1, 2, 3, 5, 6, 4]),
            ],
            100,
        )
        .unwrap();
        assert_eq!(invariant_factors(&g).unwrap(), vec![2, 6]);
    }

    #[test]
    fn invariant_factors_reject_nonabelian() {
        let s3 = generate(&[perm(&[1, 0, 2]), perm(&[1, 2, 0])], 100).unwrap();
        assert!(matches!(
            invariant_factors(&s3),
            Err(GroupError::NotAbelian)
        ));
    }

    #[test]
    fn dihedral_presentation_is_recognized() {
        // D_6: rotation = 6-cycle, reflection reverses.
        let r = perm(&[1, 2, 3, 4, 5, 0]);
        let s = perm(&[0, 5, 4, 3, 2, 1]);
        let closure = generate(&[r.clone(), s.clone()], 100).unwrap();
        assert_eq!(closure.len(), 12);
        let label = match_named(&closure);
        assert_eq!(label, NamedGroup::Dihedral { rotation_order: 6 });
        // The exhibited relations hold exactly.
        assert_eq!(s.compose(&r).compose(&s), r.inverse());
        assert!(s.compose(&s).is_identity());
        assert!(r.pow(6).is_identity());
    }

    #[test]
    fn monomial_arithmetic() {
        let i = Root::i();
        let d = GroupElement::diagonal(vec![i, i.conj(), i, i.conj()]);
        assert_eq!(d.order(), 4);
        assert!(d.compose(&d.inverse()).is_identity());
        // Unit phases canonicalize to a plain permutation.
        let trivial = GroupElement::monomial(
            Permutation::new(vec![1, 0]).unwrap(),
            vec![Root::one(), Root::one()],
        );
        assert!(matches!(trivial, GroupElement::Perm(_)));
        // Matrix of a monomial: column i carries phases[i] at row perm(i).
        let m = GroupElement::monomial(Permutation::new(vec![1, 0]).unwrap(), vec![i, i.conj()]);
        let mat = m.to_matrix();
        assert_eq!(mat[(1, 0)], i.value());
        assert_eq!(mat[(0, 1)], i.conj().value());
        // compose = matrix product, spot check.
        let d2 = GroupElement::diagonal(vec![i, Root::minus_one()]);
        let a = m.compose(&d2);
        assert!((a.to_matrix() - m.to_matrix() * d2.to_matrix()).norm() < 1e-14);
    }

    #[test]
    fn monomial_closure_of_cyclic_diagonal() {
        let w = Root::new(1, 6);
        let d = GroupElement::diagonal(vec![w, w.conj(), Root::one()]);
        let closure = generate(&[d], 100).unwrap();
        assert_eq!(closure.len(), 6);
        assert_eq!(match_named(&closure), NamedGroup::Cyclic(6));
    }
}
