//! The 4×4 family `M_q`: case classification by the order of `q²`, predicted
//! group labels, explicit monomial generators, realized groups by closure,
//! and verification of the projection factorization identities.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::group::{
    fingerprint, generate, GroupElement, GroupError, GroupFingerprint, GENERATE_CAP,
};
use crate::magic::CMat;
use crate::perm::Permutation;
use crate::phase::{Phase, Root};
use crate::{DEFAULT_MAX_ORDER, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum MqError {
    #[error("q is not a detectable root of unity; the realized group is infinite")]
    InfiniteCase,
    #[error("k = {k} is out of range 0..{bound}")]
    IndexOutOfRange { k: u64, bound: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("realized group order {realized} differs from predicted {predicted}")]
    PredictionMismatch { predicted: u64, realized: usize },
}

/// Case split of the family by `n = ord(q²) = 2^s·m` with `m` odd.
#[derive(Clone, Debug)]
pub enum MqCase {
    Finite {
        q: Root,
        /// Order of `q²`.
        n: u64,
        /// 2-adic valuation of `n`.
        s: u32,
        /// Odd part of `n`.
        m: u64,
    },
    /// `q` did not snap to a root of unity; `q²` has infinite order.
    Infinite { q: Phase },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseId {
    S0,
    S1,
    S2Plus,
    Infinite,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseId::S0 => write!(f, "s0"),
            CaseId::S1 => write!(f, "s1"),
            CaseId::S2Plus => write!(f, "s2plus"),
            CaseId::Infinite => write!(f, "infinite"),
        }
    }
}

impl MqCase {
    pub fn case_id(&self) -> CaseId {
        match self {
            MqCase::Finite { s: 0, .. } => CaseId::S0,
            MqCase::Finite { s: 1, .. } => CaseId::S1,
            MqCase::Finite { .. } => CaseId::S2Plus,
            MqCase::Infinite { .. } => CaseId::Infinite,
        }
    }
}

/// Splits on the order of `q²`. Exact parameters classify directly;
/// approximate ones that fail to snap to a root of unity of order at most
/// [`DEFAULT_MAX_ORDER`] land in the infinite case.
pub fn classify(q: &Phase) -> MqCase {
    let root = match q {
        Phase::Exact(r) => Some(*r),
        Phase::Approx(_) => q.snap_to_root(DEFAULT_MAX_ORDER, DEFAULT_TOL),
    };
    match root {
        Some(root) => {
            let n = root.pow(2).order();
            let s = n.trailing_zeros();
            MqCase::Finite {
                q: root,
                n,
                s,
                m: n >> s,
            }
        }
        None => MqCase::Infinite { q: *q },
    }
}

/// Group family predicted for a case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupLabel {
    /// `Z_a ⋊ Z_2`, order `2a`; dihedral for `a ≥ 3`.
    SemidirectZ2 { a: u64 },
    /// `Z_a ⋊ Z_4`, order `4a`.
    SemidirectZ4 { a: u64 },
    /// `Z ⋊ Z_2`; symbolic only, no closure is attempted.
    InfiniteDihedral,
}

impl GroupLabel {
    pub fn order(&self) -> Option<u64> {
        match self {
            GroupLabel::SemidirectZ2 { a } => Some(2 * a),
            GroupLabel::SemidirectZ4 { a } => Some(4 * a),
            GroupLabel::InfiniteDihedral => None,
        }
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupLabel::SemidirectZ2 { a } => write!(f, "Z{a}:Z2"),
            GroupLabel::SemidirectZ4 { a } => write!(f, "Z{a}:Z4"),
            GroupLabel::InfiniteDihedral => write!(f, "Z:Z2"),
        }
    }
}

pub fn predicted_group(case: &MqCase) -> GroupLabel {
    match case {
        MqCase::Finite { n, s: 0, .. } => GroupLabel::SemidirectZ2 { a: 2 * n },
        MqCase::Finite { n, s: 1, .. } => GroupLabel::SemidirectZ4 { a: n / 2 },
        MqCase::Finite { n, .. } => GroupLabel::SemidirectZ4 { a: *n },
        MqCase::Infinite { .. } => GroupLabel::InfiniteDihedral,
    }
}

/// Generator set for a finite case, together with the sign-adjusted `q` the
/// construction actually uses.
#[derive(Clone, Debug)]
pub struct MqGenerators {
    pub elements: Vec<GroupElement>,
    pub adjusted_q: Root,
    pub sign_flipped: bool,
}

fn alpha() -> GroupElement {
    GroupElement::perm(Permutation::new(vec![1, 0, 3, 2]).expect("fixed images"))
}

fn delta() -> GroupElement {
    GroupElement::perm(Permutation::new(vec![3, 0, 1, 2]).expect("fixed images"))
}

/// `σ`: basis vectors map as `e_0 ↦ q·e_2, e_1 ↦ q⁻¹·e_3, e_2 ↦ q·e_0,
/// e_3 ↦ q⁻¹·e_1`.
fn sigma(q: Root) -> GroupElement {
    GroupElement::monomial(
        Permutation::new(vec![2, 3, 0, 1]).expect("fixed images"),
        vec![q, q.conj(), q, q.conj()],
    )
}

/// `τ = diag(-q, q⁻¹, -q, q⁻¹)`.
fn tau(q: Root) -> GroupElement {
    GroupElement::diagonal(vec![q.neg(), q.conj(), q.neg(), q.conj()])
}

/// `τ` multiplied by the scalar root `w`.
fn scaled_tau(q: Root, w: Root) -> GroupElement {
    GroupElement::diagonal(vec![
        w.mul(&q.neg()),
        w.mul(&q.conj()),
        w.mul(&q.neg()),
        w.mul(&q.conj()),
    ])
}

/// Generators per case: `{α, σ}` for `s = 0` (with `q^n = 1` arranged),
/// `{δ, ν = iτ}` for `s = 1` (with `(-iq)^{n/2} = 1` arranged), and
/// `{δ, wτ}` with `w = e^{πi/n}` for `s ≥ 2`.
pub fn generators(case: &MqCase) -> Result<MqGenerators, MqError> {
    let (q, n, s) = match case {
        MqCase::Finite { q, n, s, .. } => (*q, *n, *s),
        MqCase::Infinite { .. } => return Err(MqError::InfiniteCase),
    };
    match s {
        0 => {
            let sign_flipped = !q.pow(n as i64).is_one();
            let q = if sign_flipped { q.neg() } else { q };
            debug_assert!(q.pow(n as i64).is_one());
            Ok(MqGenerators {
                elements: vec![alpha(), sigma(q)],
                adjusted_q: q,
                sign_flipped,
            })
        }
        1 => {
            let minus_i = Root::i().conj();
            let sign_flipped = !minus_i.mul(&q).pow((n / 2) as i64).is_one();
            let q = if sign_flipped { q.neg() } else { q };
            debug_assert!(minus_i.mul(&q).pow((n / 2) as i64).is_one());
            let nu = scaled_tau(q, Root::i());
            Ok(MqGenerators {
                elements: vec![delta(), nu],
                adjusted_q: q,
                sign_flipped,
            })
        }
        _ => {
            let w = Root::new(1, 2 * n);
            Ok(MqGenerators {
                elements: vec![delta(), scaled_tau(q, w)],
                adjusted_q: q,
                sign_flipped: false,
            })
        }
    }
}

/// Closure of the case generators with fingerprint and family label; errors
/// if the realized order disagrees with the predicted one.
#[derive(Clone, Debug)]
pub struct MqRealization {
    pub fingerprint: GroupFingerprint,
    pub predicted: GroupLabel,
}

/// Conjugation action on matrix units, as a monomial of degree `n²`:
/// `e_{ij} ↦ (φ_i/φ_j)·e_{p(i),p(j)}`. Its kernel is exactly the scalar
/// matrices, so closing adjoint images realizes the generated group modulo
/// scalars.
fn adjoint(e: &GroupElement) -> GroupElement {
    let n = e.degree();
    let (perm, phases): (&Permutation, Vec<Root>) = match e {
        GroupElement::Perm(p) => (p, vec![Root::one(); n]),
        GroupElement::Monomial(m) => (m.perm(), m.phases().to_vec()),
    };
    let images = (0..n * n)
        .map(|idx| perm.apply(idx / n) * n + perm.apply(idx % n))
        .collect();
    let adj_phases = (0..n * n)
        .map(|idx| phases[idx / n].mul(&phases[idx % n].conj()))
        .collect();
    GroupElement::monomial(
        Permutation::new(images).expect("product of bijections"),
        adj_phases,
    )
}

/// The group the algebra sees is the one generated modulo scalar matrices:
/// for `s ≥ 2` the literal matrix closure of `{δ, wτ}` picks up a central
/// subgroup of scalars, which the projection factorizations never detect.
/// The closure therefore runs in the adjoint representation.
pub fn realized_group(case: &MqCase) -> Result<MqRealization, MqError> {
    let gens = generators(case)?;
    let adjoints: Vec<GroupElement> = gens.elements.iter().map(adjoint).collect();
    let closure = generate(&adjoints, GENERATE_CAP)?;
    let fingerprint = fingerprint(&closure);
    let predicted = predicted_group(case);
    if let Some(order) = predicted.order() {
        if order as usize != fingerprint.order {
            return Err(MqError::PredictionMismatch {
                predicted: order,
                realized: fingerprint.order,
            });
        }
    }
    Ok(MqRealization {
        fingerprint,
        predicted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FactorizationCheck {
    pub pass: bool,
    pub residual: f64,
}

/// Tolerance for the factorization identities.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// Verifies the closed-form factorization of the projection onto
/// `ρ^k_± = (1, ±q^k, (-1)^k, ±(-q)^k)`:
/// for `s = 0`, `P = ¼·(1 + (-1)^k σ^n)(1 ± (-1)^k ασ^k)`, and for `s ≥ 1`,
/// `P = ¼·(1 + (-1)^k δ²)(1 ± δτ^k)`. Each bracket is twice a projection, so
/// the explicit ¼ restores trace 1.
pub fn factorization_check(
    case: &MqCase,
    k: u64,
    sign: Sign,
) -> Result<FactorizationCheck, MqError> {
    let (n, s) = match case {
        MqCase::Finite { n, s, .. } => (*n, *s),
        MqCase::Infinite { .. } => return Err(MqError::InfiniteCase),
    };
    let gens = generators(case)?;
    let q = gens.adjusted_q;
    let bound = factorization_index_bound(&q);
    if k >= bound {
        return Err(MqError::IndexOutOfRange { k, bound });
    }

    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rho = rho_vector(q, k, sign);
    let projection = CMat::from_fn(4, 4, |a, b| rho[a] * rho[b].conj() / 4.0);

    let id = CMat::identity(4, 4);
    let product = match s {
        0 => {
            let sig = sigma(q);
            let first = &id + sig.pow(n).to_matrix() * Complex64::new(parity, 0.0);
            let second = &id
                + alpha().compose(&sig.pow(k)).to_matrix()
                    * Complex64::new(sign.factor() * parity, 0.0);
            first * second
        }
        _ => {
            let d = delta();
            let t = tau(q);
            let first = &id + d.pow(2).to_matrix() * Complex64::new(parity, 0.0);
            let second =
                &id + d.compose(&t.pow(k)).to_matrix() * Complex64::new(sign.factor(), 0.0);
            first * second
        }
    };
    let residual = (projection - product / Complex64::new(4.0, 0.0)).norm();
    Ok(FactorizationCheck {
        pass: residual <= FACTORIZATION_TOL,
        residual,
    })
}

/// Valid exponent range for [`factorization_check`]: two full periods of
/// `k ↦ ρ^k_±`, whose period is `lcm(2, ord(q))`.
pub fn factorization_index_bound(adjusted_q: &Root) -> u64 {
    2 * num_integer::lcm(2, adjusted_q.order())
}

fn rho_vector(q: Root, k: u64, sign: Sign) -> Vec<Complex64> {
    let qk = q.pow(k as i64);
    let minus_one_k = Root::minus_one().pow(k as i64);
    let neg_qk = q.neg().pow(k as i64);
    let s = Complex64::new(sign.factor(), 0.0);
    vec![
        Complex64::new(1.0, 0.0),
        s * qk.value(),
        minus_one_k.value(),
        s * neg_qk.value(),
    ]
}
