//! 2×2 matrices over a chain ring: arithmetic, idempotent diagonalization,
//! M(a,b) canonical forms, and conjugacy-orbit bookkeeping.
//!
//! M(a,b) denotes the matrix [[a,b],[0,0]]. GL₂(R) acts by conjugation;
//! the orbit of M(a,b) is determined by a together with the class of b
//! modulo the relation "b' = ub + ta for a unit u and arbitrary t", which
//! over a chain ring collapses to a comparison of valuations. Orbits are
//! therefore labeled by (a, ZERO) or (a, x^k) with k < v(a).
//!
//! For the k < v(a) orbits two competing size formulas exist,
//! q^(2n-k-l-1)(q²-1) and q^(2(n-k-1))(q²-1), which disagree whenever
//! l > k+1. Both are implemented behind [`OrbitSizeVariant`]; the census
//! module adjudicates them against exhaustive orbit enumeration.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::chainring::{ChainRing, Element, RingError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Mat2Error {
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not idempotent")]
    NotIdempotent,
    #[error("matrix is a trivial idempotent (0 or I)")]
    TrivialIdempotent,
    #[error("row has no unit coordinate")]
    NotUnimodular,
    #[error("stabilizer size is not an integer: |GL2| = {gl2} is not divisible by orbit size {orbit}")]
    NonIntegralStabilizer { gl2: BigUint, orbit: BigUint },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A 2×2 matrix with entries in a fixed chain ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub e11: Element,
    pub e12: Element,
    pub e21: Element,
    pub e22: Element,
}

impl Mat2 {
    pub fn new(e11: Element, e12: Element, e21: Element, e22: Element) -> Self {
        Mat2 { e11, e12, e21, e22 }
    }

    pub fn zero(ring: &ChainRing) -> Self {
        let z = ring.zero();
        Mat2::new(z, z, z, z)
    }

    pub fn identity(ring: &ChainRing) -> Self {
        let (z, o) = (ring.zero(), ring.one());
        Mat2::new(o, z, z, o)
    }

    /// The matrix M(a,b) = [[a,b],[0,0]].
    pub fn m_of(ring: &ChainRing, a: Element, b: Element) -> Self {
        let z = ring.zero();
        Mat2::new(a, b, z, z)
    }

    pub fn add(ring: &ChainRing, x: Mat2, y: Mat2) -> Mat2 {
        Mat2::new(
            ring.add(x.e11, y.e11),
            ring.add(x.e12, y.e12),
            ring.add(x.e21, y.e21),
            ring.add(x.e22, y.e22),
        )
    }

    pub fn neg(ring: &ChainRing, x: Mat2) -> Mat2 {
        Mat2::new(
            ring.neg(x.e11),
            ring.neg(x.e12),
            ring.neg(x.e21),
            ring.neg(x.e22),
        )
    }

    pub fn sub(ring: &ChainRing, x: Mat2, y: Mat2) -> Mat2 {
        Mat2::add(ring, x, Mat2::neg(ring, y))
    }

    pub fn scalar_mul(ring: &ChainRing, c: Element, x: Mat2) -> Mat2 {
        Mat2::new(
            ring.mul(c, x.e11),
            ring.mul(c, x.e12),
            ring.mul(c, x.e21),
            ring.mul(c, x.e22),
        )
    }

    pub fn mul(ring: &ChainRing, x: Mat2, y: Mat2) -> Mat2 {
        Mat2::new(
            ring.add(ring.mul(x.e11, y.e11), ring.mul(x.e12, y.e21)),
            ring.add(ring.mul(x.e11, y.e12), ring.mul(x.e12, y.e22)),
            ring.add(ring.mul(x.e21, y.e11), ring.mul(x.e22, y.e21)),
            ring.add(ring.mul(x.e21, y.e12), ring.mul(x.e22, y.e22)),
        )
    }

    pub fn det(&self, ring: &ChainRing) -> Element {
        ring.sub(ring.mul(self.e11, self.e22), ring.mul(self.e12, self.e21))
    }

    pub fn trace(&self, ring: &ChainRing) -> Element {
        ring.add(self.e11, self.e22)
    }

    pub fn is_idempotent(&self, ring: &ChainRing) -> bool {
        Mat2::mul(ring, *self, *self) == *self
    }

    pub fn is_invertible(&self, ring: &ChainRing) -> bool {
        ring.is_unit(self.det(ring))
    }

    /// Exact inverse via the adjugate; requires a unit determinant.
    pub fn inverse(&self, ring: &ChainRing) -> Result<Mat2, Mat2Error> {
        let det = self.det(ring);
        if !ring.is_unit(det) {
            return Err(Mat2Error::NotInvertible);
        }
        let d = ring.inv(det)?;
        Ok(Mat2::new(
            ring.mul(d, self.e22),
            ring.mul(d, ring.neg(self.e12)),
            ring.mul(d, ring.neg(self.e21)),
            ring.mul(d, self.e11),
        ))
    }

    /// P · A · P⁻¹ for invertible P.
    pub fn conjugate(ring: &ChainRing, p: Mat2, a: Mat2) -> Result<Mat2, Mat2Error> {
        let p_inv = p.inverse(ring)?;
        Ok(Mat2::mul(ring, Mat2::mul(ring, p, a), p_inv))
    }

    /// Row of the matrix, as (left entry, right entry).
    pub fn row(&self, i: usize) -> (Element, Element) {
        match i {
            0 => (self.e11, self.e12),
            1 => (self.e21, self.e22),
            _ => panic!("row index {i} out of range"),
        }
    }

    pub fn col(&self, j: usize) -> (Element, Element) {
        match j {
            0 => (self.e11, self.e21),
            1 => (self.e12, self.e22),
            _ => panic!("column index {j} out of range"),
        }
    }
}

/// |GL₂(R)| = q^(4n-3)(q-1)(q²-1) for a chain ring of cardinality q^n.
pub fn gl2_order(q: u64, n: u32) -> BigUint {
    let q = BigUint::from(q);
    q.pow(4 * n - 3) * (&q - 1u32) * (q.pow(2) - 1u32)
}

/// [`gl2_order`] at the ring's own parameters.
pub fn gl2_size(ring: &ChainRing) -> BigUint {
    gl2_order(ring.q(), ring.n())
}

/// Which of the two competing closed forms to use for the k < v(a) orbit
/// sizes. They coincide exactly when l = k + 1 (hence everywhere for n ≤ 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitSizeVariant {
    Statement,
    Proof,
}

impl OrbitSizeVariant {
    pub fn name(self) -> &'static str {
        match self {
            OrbitSizeVariant::Statement => "statement",
            OrbitSizeVariant::Proof => "proof",
        }
    }
}

/// Class of the second parameter of a canonical orbit representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BClass {
    /// v(b) ≥ v(a): the orbit of M(a, 0).
    Zero,
    /// v(b) = k < v(a): the orbit of M(a, x^k).
    Power(u32),
}

/// Canonical identifier of a conjugacy orbit of some M(a,b).
///
/// Distinct labels denote disjoint orbits; `Power(k)` requires k < v(a).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitLabel {
    pub a: Element,
    pub bclass: BClass,
}

impl OrbitLabel {
    /// The canonical matrix M(a, 0) or M(a, x^k) this label stands for.
    pub fn representative(&self, ring: &ChainRing) -> Mat2 {
        let b = match self.bclass {
            BClass::Zero => ring.zero(),
            BClass::Power(k) => ring.pow(ring.uniformizer(), k as u64),
        };
        Mat2::m_of(ring, self.a, b)
    }

    /// Compact comma-free rendering, e.g. `M(3;0)` or `M(3;x^0)`.
    pub fn format(&self, ring: &ChainRing) -> String {
        match self.bclass {
            BClass::Zero => format!("M({};0)", ring.format_element(self.a)),
            BClass::Power(k) => format!("M({};x^{k})", ring.format_element(self.a)),
        }
    }
}

/// Canonical orbit label of M(a,b): (a, ZERO) when v(b) ≥ v(a), otherwise
/// (a, POWER(v(b))).
pub fn canonical_rep(ring: &ChainRing, a: Element, b: Element) -> OrbitLabel {
    let l = ring.valuation(a);
    let k = ring.valuation(b);
    if k >= l {
        OrbitLabel {
            a,
            bclass: BClass::Zero,
        }
    } else {
        OrbitLabel {
            a,
            bclass: BClass::Power(k),
        }
    }
}

/// Whether M(a,b) and M(a2,b2) are conjugate, in O(1) valuation form:
/// the traces must agree, and either both b's lie in (a) or they share a
/// valuation below v(a).
pub fn same_orbit_m(ring: &ChainRing, a: Element, b: Element, a2: Element, b2: Element) -> bool {
    if a != a2 {
        return false;
    }
    let l = ring.valuation(a);
    let (k, k2) = (ring.valuation(b), ring.valuation(b2));
    (k >= l && k2 >= l) || (k == k2 && k < l)
}

/// Orbit size from the pure parameters: l = v(a) (with l = n meaning
/// a = 0) and `k = None` for the ZERO class.
pub fn orbit_size_for(
    q: u64,
    n: u32,
    l: u32,
    k: Option<u32>,
    variant: OrbitSizeVariant,
) -> BigUint {
    let qb = BigUint::from(q);
    match (l == n, k) {
        // M(0,0)
        (true, None) => BigUint::one(),
        // a = 0, b != 0: q^(2(n-k-1))(q²-1), same in both variants
        (true, Some(k)) => {
            debug_assert!(k < n);
            qb.pow(2 * (n - k - 1)) * (BigUint::from(q) * q - 1u32)
        }
        // a != 0, b = 0: q^(2n-2l-1)(q+1)
        (false, None) => qb.pow(2 * n - 2 * l - 1) * (q + 1),
        // a != 0, k < l
        (false, Some(k)) => {
            debug_assert!(k < l);
            match variant {
                OrbitSizeVariant::Statement => {
                    qb.pow(2 * n - k - l - 1) * (BigUint::from(q) * q - 1u32)
                }
                OrbitSizeVariant::Proof => {
                    qb.pow(2 * (n - k - 1)) * (BigUint::from(q) * q - 1u32)
                }
            }
        }
    }
}

/// Exact size of the orbit named by `label`, under the chosen variant.
pub fn orbit_size(ring: &ChainRing, label: &OrbitLabel, variant: OrbitSizeVariant) -> BigUint {
    let l = ring.valuation(label.a);
    let k = match label.bclass {
        BClass::Zero => None,
        BClass::Power(k) => Some(k),
    };
    orbit_size_for(ring.q(), ring.n(), l, k, variant)
}

/// |Stab| = |GL₂| / |orbit|; exact division is part of the contract and a
/// failure signals an internally inconsistent variant.
pub fn stabilizer_size(
    ring: &ChainRing,
    label: &OrbitLabel,
    variant: OrbitSizeVariant,
) -> Result<BigUint, Mat2Error> {
    let gl2 = gl2_size(ring);
    let orbit = orbit_size(ring, label, variant);
    if (&gl2 % &orbit).is_zero() {
        Ok(gl2 / orbit)
    } else {
        Err(Mat2Error::NonIntegralStabilizer { gl2, orbit })
    }
}

/// All orbit labels of the ring, in enumeration order of a and ascending k:
/// for each a, the ZERO class first, then POWER(0) .. POWER(v(a)-1).
pub fn all_orbit_labels(ring: &ChainRing) -> Vec<OrbitLabel> {
    let mut labels = Vec::new();
    for a in ring.elements() {
        labels.push(OrbitLabel {
            a,
            bclass: BClass::Zero,
        });
        for k in 0..ring.valuation(a) {
            labels.push(OrbitLabel {
                a,
                bclass: BClass::Power(k),
            });
        }
    }
    labels
}

/// Conjugator P with P·A·P⁻¹ = M(1,0) for a nontrivial idempotent A.
///
/// A unimodular fixed vector v (Av = v) is found among the columns of A and
/// a unimodular kernel vector w among the columns of I−A; [v w] is then
/// invertible and its inverse is the conjugator. The first working pair in
/// column order is taken, so the result is deterministic.
pub fn diagonalize_idempotent(ring: &ChainRing, a: Mat2) -> Result<Mat2, Mat2Error> {
    if a == Mat2::zero(ring) || a == Mat2::identity(ring) {
        return Err(Mat2Error::TrivialIdempotent);
    }
    if !a.is_idempotent(ring) {
        return Err(Mat2Error::NotIdempotent);
    }
    let complement = Mat2::sub(ring, Mat2::identity(ring), a);
    let is_unimodular =
        |(x, y): (Element, Element)| ring.is_unit(x) || ring.is_unit(y);
    for v in [a.col(0), a.col(1)] {
        if !is_unimodular(v) {
            continue;
        }
        for w in [complement.col(0), complement.col(1)] {
            if !is_unimodular(w) {
                continue;
            }
            let basis = Mat2::new(v.0, w.0, v.1, w.1);
            if !basis.is_invertible(ring) {
                continue;
            }
            let p = basis.inverse(ring)?;
            let diag = Mat2::conjugate(ring, p, a)?;
            debug_assert_eq!(diag, Mat2::m_of(ring, ring.one(), ring.zero()));
            return Ok(p);
        }
    }
    // a nontrivial idempotent always has a unit entry, and so does its
    // complement; the loops above cannot fall through
    unreachable!("no diagonalizing basis found for a nontrivial idempotent")
}

/// Invertible matrix whose second row is the given unimodular row: the
/// first row is (1,0) when w₂ is a unit and (0,1) otherwise.
pub fn complete_unimodular(ring: &ChainRing, w: (Element, Element)) -> Result<Mat2, Mat2Error> {
    let (w1, w2) = w;
    let (z, o) = (ring.zero(), ring.one());
    let p = if ring.is_unit(w2) {
        Mat2::new(o, z, w1, w2)
    } else if ring.is_unit(w1) {
        Mat2::new(z, o, w1, w2)
    } else {
        return Err(Mat2Error::NotUnimodular);
    };
    debug_assert!(p.is_invertible(ring));
    Ok(p)
}

// ---------------------------------------------------------------------------
// Matrix literals: `[[e,e],[e,e]]` with element literals of the active ring.
// ---------------------------------------------------------------------------

/// Splits on `sep` at bracket depth zero.
pub(crate) fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

pub fn parse_mat2(ring: &ChainRing, s: &str) -> Result<Mat2, RingError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| RingError::Parse(format!("expected `[[..],[..]]`, got `{s}`")))?;
    let rows = split_top_level(inner, ',');
    if rows.len() != 2 {
        return Err(RingError::Parse("matrix literal must have 2 rows".into()));
    }
    let mut entries = Vec::with_capacity(4);
    for row in rows {
        let row_inner = row
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| RingError::Parse(format!("bad matrix row `{row}`")))?;
        let cells = split_top_level(row_inner, ',');
        // TruncPoly/Galois element literals are themselves bracketed lists,
        // so a row like [[1,0],[0,1]] splits into exactly two cells here
        if cells.len() != 2 {
            return Err(RingError::Parse(format!(
                "matrix row `{row}` must have 2 entries"
            )));
        }
        for cell in cells {
            entries.push(ring.parse_element(cell)?);
        }
    }
    Ok(Mat2::new(entries[0], entries[1], entries[2], entries[3]))
}

pub fn format_mat2(ring: &ChainRing, m: &Mat2) -> String {
    format!(
        "[[{},{}],[{},{}]]",
        ring.format_element(m.e11),
        ring.format_element(m.e12),
        ring.format_element(m.e21),
        ring.format_element(m.e22)
    )
}
