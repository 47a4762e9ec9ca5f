//! Unit-circle scalars in exact (root of unity) or approximate
//! (floating complex) representation, and vectors of them.

use std::fmt;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("squared modulus deviates from 1 by {0:e}")]
    NotUnitModulus(f64),
}

/// Exact root of unity `e^{2πi·num/ord}`, stored in lowest terms with
/// `0 <= num < ord`. Equality is structural, so two equal roots always
/// have identical `(num, ord)` pairs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    num: u64,
    ord: u64,
}

impl Root {
    /// Root with angle `2π·num/ord`, reduced to canonical form. `num` may be
    /// any integer; it is taken modulo `ord`.
    pub fn new(num: i64, ord: u64) -> Self {
        assert!(ord > 0, "root order must be positive");
        Root::new_wide(num as i128, ord)
    }

    pub fn one() -> Self {
        Root { num: 0, ord: 1 }
    }

    pub fn minus_one() -> Self {
        Root { num: 1, ord: 2 }
    }

    /// The imaginary unit, `e^{iπ/2}`.
    pub fn i() -> Self {
        Root { num: 1, ord: 4 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    /// Multiplicative order; equals the denominator since the fraction is reduced.
    pub fn order(&self) -> u64 {
        self.ord
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn mul(&self, other: &Root) -> Root {
        let l = self.ord.lcm(&other.ord);
        let k = (self.num as i128) * (l / self.ord) as i128
            + (other.num as i128) * (l / other.ord) as i128;
        Root::new_wide(k, l)
    }

    /// Complex conjugate, which is also the multiplicative inverse.
    pub fn conj(&self) -> Root {
        Root::new(-(self.num as i64), self.ord)
    }

    pub fn pow(&self, e: i64) -> Root {
        let k = (self.num as i128) * (e as i128).rem_euclid(self.ord as i128);
        Root::new_wide(k, self.ord)
    }

    fn new_wide(num: i128, ord: u64) -> Root {
        let num = num.rem_euclid(ord as i128) as u64;
        let g = num.gcd(&ord);
        Root {
            num: num / g,
            ord: ord / g,
        }
    }

    pub fn neg(&self) -> Root {
        self.mul(&Root::minus_one())
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        2.0 * std::f64::consts::PI * (self.num as f64) / (self.ord as f64)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle())
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(2πi·{}/{})", self.num, self.ord)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.ord) {
            (0, _) => write!(f, "1"),
            (1, 2) => write!(f, "-1"),
            (1, 4) => write!(f, "i"),
            (3, 4) => write!(f, "-i"),
            (k, l) => write!(f, "w{l}^{k}"),
        }
    }
}

/// A scalar on the unit circle: exact root of unity or floating complex pair.
///
/// Arithmetic between two exact phases stays exact; any approximate operand
/// degrades the result to approximate.
#[derive(Clone, Copy)]
pub enum Phase {
    Exact(Root),
    Approx(Complex64),
}

/// Largest tolerated deviation of `|re² + im² − 1|` for approximate phases.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

impl Phase {
    pub fn root(num: i64, ord: u64) -> Self {
        Phase::Exact(Root::new(num, ord))
    }

    pub fn one() -> Self {
        Phase::Exact(Root::one())
    }

    pub fn minus_one() -> Self {
        Phase::Exact(Root::minus_one())
    }

    pub fn i() -> Self {
        Phase::Exact(Root::i())
    }

    /// Approximate phase; rejects values whose squared modulus strays from 1
    /// by more than [`UNIT_MODULUS_TOL`].
    pub fn approx(re: f64, im: f64) -> Result<Self, PhaseError> {
        let dev = (re * re + im * im - 1.0).abs();
        if dev > UNIT_MODULUS_TOL {
            return Err(PhaseError::NotUnitModulus(dev));
        }
        Ok(Phase::Approx(Complex64::new(re, im)))
    }

    pub fn value(&self) -> Complex64 {
        match self {
            Phase::Exact(r) => r.value(),
            Phase::Approx(z) => *z,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Exact(_))
    }

    pub fn as_root(&self) -> Option<Root> {
        match self {
            Phase::Exact(r) => Some(*r),
            Phase::Approx(_) => None,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Phase::Exact(r) => r.is_one(),
            Phase::Approx(z) => (z - Complex64::new(1.0, 0.0)).norm() == 0.0,
        }
    }

    pub fn conj(&self) -> Phase {
        match self {
            Phase::Exact(r) => Phase::Exact(r.conj()),
            Phase::Approx(z) => Phase::Approx(z.conj()),
        }
    }

    pub fn pow(&self, e: i64) -> Phase {
        match self {
            Phase::Exact(r) => Phase::Exact(r.pow(e)),
            Phase::Approx(z) => Phase::Approx(z.powi(e as i32)),
        }
    }

    /// Distance `|self − other|` in the complex plane.
    pub fn dist(&self, other: &Phase) -> f64 {
        (self.value() - other.value()).norm()
    }

    /// Nearest exact root of order at most `max_order`, if its angular
    /// distance is within `tol` radians. Ties prefer the smallest order.
    pub fn snap_to_root(&self, max_order: u64, tol: f64) -> Option<Root> {
        assert!(max_order >= 1);
        if let Phase::Exact(r) = self {
            if r.ord <= max_order {
                return Some(*r);
            }
        }
        let theta = self.value().arg();
        let turns = theta / (2.0 * std::f64::consts::PI);
        let mut best: Option<(f64, u64, i64)> = None;
        for l in 1..=max_order {
            let k = (turns * l as f64).round() as i64;
            let dist = 2.0 * std::f64::consts::PI * (turns - k as f64 / l as f64).abs();
            if best.is_none_or(|(d, _, _)| dist < d) {
                best = Some((dist, l, k));
            }
        }
        let (dist, l, k) = best?;
        (dist <= tol).then(|| Root::new(k, l))
    }
}

impl From<Root> for Phase {
    fn from(r: Root) -> Self {
        Phase::Exact(r)
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        match (self, rhs) {
            (Phase::Exact(a), Phase::Exact(b)) => Phase::Exact(a.mul(&b)),
            (a, b) => Phase::Approx(a.value() * b.value()),
        }
    }
}

impl Div for Phase {
    type Output = Phase;

    /// `a / b = a · conj(b)`, exact when both operands are exact.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Phase) -> Phase {
        self * rhs.conj()
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Phase::Exact(a), Phase::Exact(b)) => a == b,
            (a, b) => a.value() == b.value(),
        }
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Exact(r) => write!(f, "Exact({}/{})", r.num, r.ord),
            Phase::Approx(z) => write!(f, "Approx({}, {})", z.re, z.im),
        }
    }
}

/// Vector of unit-modulus scalars; the rows of a Hadamard matrix and the
/// magic-basis vectors built from them.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector {
    entries: Vec<Phase>,
}

impl UnitVector {
    pub fn new(entries: Vec<Phase>) -> Self {
        UnitVector { entries }
    }

    pub fn constant_one(n: usize) -> Self {
        UnitVector {
            entries: vec![Phase::one(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Phase {
        self.entries[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Phase> {
        self.entries.iter()
    }

    pub fn all_exact(&self) -> bool {
        self.entries.iter().all(Phase::is_exact)
    }

    /// Entrywise product.
    pub fn mul(&self, other: &UnitVector) -> UnitVector {
        assert_eq!(self.len(), other.len());
        UnitVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| *a * *b)
                .collect(),
        }
    }

    /// Entrywise quotient.
    pub fn div(&self, other: &UnitVector) -> UnitVector {
        assert_eq!(self.len(), other.len());
        UnitVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| *a / *b)
                .collect(),
        }
    }

    /// Entrywise power.
    pub fn pow(&self, e: i64) -> UnitVector {
        UnitVector {
            entries: self.entries.iter().map(|p| p.pow(e)).collect(),
        }
    }

    /// Scalar product `Σ_a x_a·conj(y_a)`, evaluated numerically.
    pub fn inner(&self, other: &UnitVector) -> Complex64 {
        assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.value() * b.value().conj())
            .sum()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(Phase::value).collect()
    }
}

/// If `v = λ·w` entrywise for a constant `λ`, returns `λ = v[0]/w[0]`.
/// Exact vectors are compared structurally; otherwise each entry must match
/// within `tol` in the complex plane.
pub fn vec_equal_mod_scalar(v: &UnitVector, w: &UnitVector, tol: f64) -> Option<Phase> {
    assert_eq!(v.len(), w.len(), "vectors must have equal length");
    assert!(!v.is_empty());
    let lambda = v.get(0) / w.get(0);
    let exact = v.all_exact() && w.all_exact();
    for i in 0..v.len() {
        let scaled = lambda * w.get(i);
        if exact {
            if v.get(i) != scaled {
                return None;
            }
        } else if v.get(i).dist(&scaled) > tol {
            return None;
        }
    }
    Some(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn exact(k: i64, l: u64) -> Phase {
        Phase::root(k, l)
    }

    #[test]
    fn root_canonical_form() {
        assert_eq!(Root::new(2, 4), Root::new(1, 2));
        assert_eq!(Root::new(-1, 4), Root::new(3, 4));
        assert_eq!(Root::new(6, 6), Root::one());
        assert_eq!(Root::new(3, 6).order(), 2);
    }

    #[test]
    fn mul_i_times_i_is_minus_one() {
        assert_eq!(exact(1, 4) * exact(1, 4), exact(1, 2));
    }

    #[test]
    fn mul_identity() {
        let p = exact(3, 7);
        assert_eq!(exact(0, 1) * p, p);
        let q = Phase::approx(0.6, 0.8).unwrap();
        assert_eq!((exact(0, 1) * q).value(), q.value());
    }

    #[test]
    fn mul_mixed_orders() {
        // Third root times minus one: check the frozen value against a
        // numeric evaluation of the angle 2π·5/6.
        let p = exact(1, 3) * exact(1, 2);
        assert_eq!(p, exact(5, 6));
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 / 6.0);
        assert_abs_diff_eq!(p.value().re, expect.re, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value().im, expect.im, epsilon = 1e-15);
    }

    #[test]
    fn quot_examples() {
        assert_eq!(exact(1, 4) / exact(1, 4), exact(0, 1));
        assert_eq!(exact(0, 1) / exact(1, 2), exact(1, 2));
        // Sixth root over third root, numeric cross-check.
        let q = exact(1, 6) / exact(1, 3);
        assert_eq!(q, exact(5, 6));
        let num = exact(1, 6).value() / exact(1, 3).value();
        assert!((q.value() - num).norm() < 1e-14);
    }

    #[test]
    fn approx_rejects_off_circle() {
        assert!(Phase::approx(1.0, 1.0).is_err());
        assert!(Phase::approx(0.0, 1.0000000001).is_ok());
    }

    #[test]
    fn snap_near_i() {
        let p = Phase::approx(0.0, 1.0000000001).unwrap();
        assert_eq!(p.snap_to_root(8, 1e-6), Some(Root::new(1, 4)));
        assert_eq!(
            Phase::approx(-1.0, 0.0).unwrap().snap_to_root(8, 1e-6),
            Some(Root::minus_one())
        );
    }

    #[test]
    fn snap_rejects_non_root() {
        // Independent check that angle 0.3 is far from every k/l with l <= 12.
        let mut min_dist = f64::MAX;
        for l in 1..=12u64 {
            for k in 0..l {
                let d = (0.3 - 2.0 * std::f64::consts::PI * k as f64 / l as f64).abs();
                min_dist = min_dist.min(d);
            }
        }
        assert!(min_dist > 1e-6);
        let p = Phase::approx(0.3f64.cos(), 0.3f64.sin()).unwrap();
        assert_eq!(p.snap_to_root(12, 1e-6), None);
    }

    #[test]
    fn snap_prefers_smallest_order() {
        // Angle exactly 1/2 turn must come back as order 2, not 4 or 6.
        let p = Phase::approx(-1.0, 0.0).unwrap();
        assert_eq!(p.snap_to_root(12, 1e-9), Some(Root::new(1, 2)));
    }

    #[test]
    fn snap_round_trips_all_exact_orders() {
        for l in 1..=48u64 {
            for k in 0..l {
                let z = Root::new(k as i64, l).value();
                let p = Phase::approx(z.re, z.im).unwrap();
                assert_eq!(p.snap_to_root(48, 1e-9), Some(Root::new(k as i64, l)));
            }
        }
    }

    #[test]
    fn vec_proportionality() {
        let v = UnitVector::new(vec![exact(0, 1), exact(1, 2)]);
        let w = UnitVector::new(vec![exact(1, 2), exact(0, 1)]);
        assert_eq!(vec_equal_mod_scalar(&v, &w, 1e-9), Some(exact(1, 2)));
        assert_eq!(vec_equal_mod_scalar(&v, &v, 1e-9), Some(exact(0, 1)));
        let a = UnitVector::new(vec![exact(0, 1), exact(1, 4)]);
        let b = UnitVector::new(vec![exact(0, 1), exact(3, 4)]);
        assert_eq!(vec_equal_mod_scalar(&a, &b, 1e-9), None);
    }

    fn arb_root() -> impl Strategy<Value = Root> {
        (1u64..=24, any::<i64>()).prop_map(|(l, k)| Root::new(k, l))
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(a in arb_root(), b in arb_root(), c in arb_root()) {
            let (a, b, c) = (Phase::Exact(a), Phase::Exact(b), Phase::Exact(c));
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a * b) * c, a * (b * c));
        }

        #[test]
        fn quot_self_is_one(a in arb_root()) {
            prop_assert_eq!(Phase::Exact(a) / Phase::Exact(a), Phase::one());
        }

        #[test]
        fn exact_matches_numeric(a in arb_root(), b in arb_root()) {
            let exact = (Phase::Exact(a) * Phase::Exact(b)).value();
            let numeric = a.value() * b.value();
            prop_assert!((exact - numeric).norm() <= 1e-12);
            let exact_q = (Phase::Exact(a) / Phase::Exact(b)).value();
            let numeric_q = a.value() / b.value();
            prop_assert!((exact_q - numeric_q).norm() <= 1e-12);
        }

        #[test]
        fn snap_inverts_evaluation(a in arb_root()) {
            let z = a.value();
            let p = Phase::Approx(z);
            prop_assert_eq!(p.snap_to_root(24, 1e-9), Some(a));
        }
    }
}
