//! Named Hadamard matrices and the `name:params` spec strings used by the
//! command line.

use crate::hadamard::{tensor, HadamardError, HadamardMatrix};
use crate::phase::{Phase, Root};

/// Fourier matrix `F[i][j] = w^{ij}` with `w = e^{2πi/n}`, 0-based, so the
/// first row and column are 1s.
pub fn fourier(n: usize) -> HadamardMatrix {
    assert!(n >= 1);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Phase::Exact(Root::new((i * j) as i64, n as u64)))
                .collect()
        })
        .collect();
    HadamardMatrix::from_rows(rows).expect("square by construction")
}

/// The one-parameter 4×4 family; `q` must be unit-modulus.
pub fn mq(q: Phase) -> Result<HadamardMatrix, HadamardError> {
    if (q.value().norm_sqr() - 1.0).abs() > crate::phase::UNIT_MODULUS_TOL {
        return Err(HadamardError::NonUnitParameter);
    }
    let one = Phase::one();
    let neg = Phase::minus_one();
    let nq = neg * q;
    HadamardMatrix::from_rows(vec![
        vec![one, one, one, one],
        vec![one, q, neg, nq],
        vec![one, neg, one, neg],
        vec![one, nq, neg, q],
    ])
}

/// The 6×6 matrix over `{±1, i}` from Haagerup's classification work.
pub fn haagerup() -> HadamardMatrix {
    let o = Phase::one();
    let n = Phase::minus_one();
    let i = Phase::i();
    HadamardMatrix::from_rows(vec![
        vec![i, o, o, o, o, o],
        vec![o, i, o, n, n, o],
        vec![o, o, i, o, n, n],
        vec![o, n, o, i, o, n],
        vec![o, n, n, o, i, o],
        vec![o, o, n, n, o, i],
    ])
    .expect("fixed shape")
}

/// The 6×6 matrix over third roots of unity from Tao's work on sums of roots.
pub fn tao() -> HadamardMatrix {
    let o = Phase::one();
    let w = Phase::root(1, 3);
    let w2 = Phase::root(2, 3);
    HadamardMatrix::from_rows(vec![
        vec![o, o, o, o, o, o],
        vec![o, o, w, w, w2, w2],
        vec![o, w, o, w2, w2, w],
        vec![o, w, w2, o, w, w2],
        vec![o, w2, w2, w, o, w],
        vec![o, w2, w, w2, w, o],
    ])
    .expect("fixed shape")
}

/// `s`-fold tensor power of `fourier(2)`; the real ±1 matrices of size `2^s`.
pub fn sylvester(s: u32) -> HadamardMatrix {
    let mut h = fourier(1);
    let f2 = fourier(2);
    for _ in 0..s {
        h = tensor(&h, &f2);
    }
    h
}

/// Names understood by [`from_spec`], with parameter syntax.
pub fn names() -> &'static [&'static str] {
    &[
        "fourier:<n>",
        "mq:<k>/<l>",
        "haagerup",
        "tao",
        "sylvester:<s>",
        "<spec>*<spec> (tensor product)",
    ]
}

/// Parses a catalogue spec string such as `fourier:6`, `mq:1/4`, `tao`, or a
/// tensor product `fourier:2*fourier:3`.
pub fn from_spec(spec: &str) -> Result<HadamardMatrix, HadamardError> {
    let mut parts = spec.split('*');
    let mut h = single(parts.next().expect("split yields at least one part"))?;
    for part in parts {
        h = tensor(&h, &single(part)?);
    }
    Ok(h)
}

fn single(spec: &str) -> Result<HadamardMatrix, HadamardError> {
    let spec = spec.trim();
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let unknown = || HadamardError::UnknownName(spec.to_string());
    match (name, params) {
        ("fourier", Some(p)) => {
            let n: usize = p.parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            Ok(fourier(n))
        }
        ("mq", Some(p)) => {
            let (k, l) = p.split_once('/').ok_or_else(unknown)?;
            let k: i64 = k.parse().map_err(|_| unknown())?;
            let l: u64 = l.parse().map_err(|_| unknown())?;
            if l == 0 {
                return Err(unknown());
            }
            mq(Phase::root(k, l))
        }
        ("haagerup", None) => Ok(haagerup()),
        ("tao", None) => Ok(tao()),
        ("sylvester", Some(p)) => {
            let s: u32 = p.parse().map_err(|_| unknown())?;
            if s > 6 {
                return Err(unknown());
            }
            Ok(sylvester(s))
        }
        _ => Err(unknown()),
    }
}
