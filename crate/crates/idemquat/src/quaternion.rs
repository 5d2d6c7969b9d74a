//! Quaternions over a chain ring, and the explicit isomorphism with the
//! 2×2 matrix ring when 2 is invertible.
//!
//! H(R) is the free R-module on 1, i, j, k with i² = j² = k² = ijk = -1 and
//! ij = -ji. For odd p the classical model
//!
//! ```text
//! i ↦ [[a, b], [b, -a]]    j ↦ [[0, 1], [-1, 0]]    k ↦ (image of i)(image of j)
//! ```
//!
//! with a² + b² = -1 identifies H(R) with M₂(R). The pair (a, b) is found
//! by exhaustive search in enumeration order; the change-of-basis matrix of
//! the four images always has determinant 4, so it is invertible exactly
//! when 2 is. Every structural property of the model (Hamilton relations,
//! invertible basis, round-trip) is checked when the isomorphism is built.
//!
//! When 2 is not invertible no matrix model exists: H(R) is then a local
//! ring and [`QuatMatIso::build`] refuses to construct anything.

use thiserror::Error;

use crate::chainring::{ChainRing, Element, RingError};
use crate::mat2::{split_top_level, Mat2};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuatError {
    #[error("2 is not invertible in this ring; H(R) has no matrix model")]
    TwoNotInvertible,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// An element of H(R), componentwise canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quaternion {
    pub c1: Element,
    pub ci: Element,
    pub cj: Element,
    pub ck: Element,
}

impl Quaternion {
    pub fn new(c1: Element, ci: Element, cj: Element, ck: Element) -> Self {
        Quaternion { c1, ci, cj, ck }
    }

    pub fn zero(ring: &ChainRing) -> Self {
        let z = ring.zero();
        Quaternion::new(z, z, z, z)
    }

    pub fn one(ring: &ChainRing) -> Self {
        let z = ring.zero();
        Quaternion::new(ring.one(), z, z, z)
    }

    pub fn scalar(ring: &ChainRing, c: Element) -> Self {
        let z = ring.zero();
        Quaternion::new(c, z, z, z)
    }

    pub fn add(ring: &ChainRing, x: Quaternion, y: Quaternion) -> Quaternion {
        Quaternion::new(
            ring.add(x.c1, y.c1),
            ring.add(x.ci, y.ci),
            ring.add(x.cj, y.cj),
            ring.add(x.ck, y.ck),
        )
    }

    pub fn neg(ring: &ChainRing, x: Quaternion) -> Quaternion {
        Quaternion::new(
            ring.neg(x.c1),
            ring.neg(x.ci),
            ring.neg(x.cj),
            ring.neg(x.ck),
        )
    }

    pub fn sub(ring: &ChainRing, x: Quaternion, y: Quaternion) -> Quaternion {
        Quaternion::add(ring, x, Quaternion::neg(ring, y))
    }

    /// Full 16-term Hamilton product (ij = k, jk = i, ki = j).
    pub fn mul(ring: &ChainRing, x: Quaternion, y: Quaternion) -> Quaternion {
        let m = |a: Element, b: Element| ring.mul(a, b);
        let c1 = ring.sub(
            ring.sub(m(x.c1, y.c1), m(x.ci, y.ci)),
            ring.add(m(x.cj, y.cj), m(x.ck, y.ck)),
        );
        let ci = ring.add(
            ring.add(m(x.c1, y.ci), m(x.ci, y.c1)),
            ring.sub(m(x.cj, y.ck), m(x.ck, y.cj)),
        );
        let cj = ring.add(
            ring.sub(m(x.c1, y.cj), m(x.ci, y.ck)),
            ring.add(m(x.cj, y.c1), m(x.ck, y.ci)),
        );
        let ck = ring.add(
            ring.add(m(x.c1, y.ck), m(x.ci, y.cj)),
            ring.sub(m(x.ck, y.c1), m(x.cj, y.ci)),
        );
        Quaternion::new(c1, ci, cj, ck)
    }

    pub fn conj(ring: &ChainRing, x: Quaternion) -> Quaternion {
        Quaternion::new(x.c1, ring.neg(x.ci), ring.neg(x.cj), ring.neg(x.ck))
    }

    /// x · conj(x), which lands in the scalar component: the sum of the four
    /// coefficient squares.
    pub fn norm(&self, ring: &ChainRing) -> Element {
        let sq = |a: Element| ring.mul(a, a);
        ring.add(
            ring.add(sq(self.c1), sq(self.ci)),
            ring.add(sq(self.cj), sq(self.ck)),
        )
    }

    pub fn is_unit(&self, ring: &ChainRing) -> bool {
        ring.is_unit(self.norm(ring))
    }

    pub fn is_idempotent(&self, ring: &ChainRing) -> bool {
        Quaternion::mul(ring, *self, *self) == *self
    }
}

// ---------------------------------------------------------------------------
// The matrix model.
// ---------------------------------------------------------------------------

/// A verified isomorphism H(R) → M₂(R), available exactly when p is odd.
#[derive(Debug, Clone)]
pub struct QuatMatIso {
    /// solution of a² + b² = -1 found first in enumeration order
    pub a: Element,
    pub b: Element,
    img_one: Mat2,
    img_i: Mat2,
    img_j: Mat2,
    img_k: Mat2,
    /// inverse of the 4×4 change-of-basis matrix, rows/cols over R
    basis_inv: [[Element; 4]; 4],
}

fn mat_to_vec(m: Mat2) -> [Element; 4] {
    [m.e11, m.e12, m.e21, m.e22]
}

/// Gauss-Jordan inverse of a small matrix over a local ring: pivots must be
/// units, which for an invertible matrix over a local ring always exist.
fn invert_square(ring: &ChainRing, mat: &[Vec<Element>]) -> Option<Vec<Vec<Element>>> {
    let n = mat.len();
    let mut work: Vec<Vec<Element>> = mat.to_vec();
    let mut inv: Vec<Vec<Element>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| ring.is_unit(work[r][col]))?;
        work.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let scale = ring.inv(work[col][col]).ok()?;
        for j in 0..n {
            work[col][j] = ring.mul(scale, work[col][j]);
            inv[col][j] = ring.mul(scale, inv[col][j]);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[r][col];
            if factor == ring.zero() {
                continue;
            }
            for j in 0..n {
                work[r][j] = ring.sub(work[r][j], ring.mul(factor, work[col][j]));
                inv[r][j] = ring.sub(inv[r][j], ring.mul(factor, inv[col][j]));
            }
        }
    }
    Some(inv)
}

impl QuatMatIso {
    /// Builds and verifies the matrix model. Errors when p = 2.
    pub fn build(ring: &ChainRing) -> Result<QuatMatIso, QuatError> {
        if !ring.two_is_unit() {
            return Err(QuatError::TwoNotInvertible);
        }
        let minus_one = ring.neg(ring.one());
        let (a, b) = ring
            .elements()
            .flat_map(|a| ring.elements().map(move |b| (a, b)))
            .find(|&(a, b)| ring.add(ring.mul(a, a), ring.mul(b, b)) == minus_one)
            .expect("a^2 + b^2 = -1 is always solvable when p is odd");

        let (z, o) = (ring.zero(), ring.one());
        let img_one = Mat2::identity(ring);
        let img_i = Mat2::new(a, b, b, ring.neg(a));
        let img_j = Mat2::new(z, o, ring.neg(o), z);
        let img_k = Mat2::mul(ring, img_i, img_j);

        // Hamilton relations must hold for the images
        let minus_id = Mat2::scalar_mul(ring, minus_one, img_one);
        assert_eq!(Mat2::mul(ring, img_i, img_i), minus_id);
        assert_eq!(Mat2::mul(ring, img_j, img_j), minus_id);
        assert_eq!(Mat2::mul(ring, img_k, img_k), minus_id);
        assert_eq!(
            Mat2::mul(ring, Mat2::mul(ring, img_i, img_j), img_k),
            minus_id
        );
        assert_eq!(
            Mat2::mul(ring, img_j, img_i),
            Mat2::scalar_mul(ring, minus_one, img_k)
        );

        // the images must form a free basis of M2(R): the change-of-basis
        // matrix (columns = flattened images) has unit determinant, so the
        // Gauss-Jordan inverse exists
        let cols = [
            mat_to_vec(img_one),
            mat_to_vec(img_i),
            mat_to_vec(img_j),
            mat_to_vec(img_k),
        ];
        let basis: Vec<Vec<Element>> = (0..4).map(|r| (0..4).map(|c| cols[c][r]).collect()).collect();
        let inv = invert_square(ring, &basis)
            .expect("basis determinant is 4, a unit whenever 2 is");
        let mut basis_inv = [[z; 4]; 4];
        for (r, row) in inv.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                basis_inv[r][c] = e;
            }
        }

        let iso = QuatMatIso {
            a,
            b,
            img_one,
            img_i,
            img_j,
            img_k,
            basis_inv,
        };
        // round-trip on the basis
        for x in [
            Quaternion::one(ring),
            Quaternion::new(z, o, z, z),
            Quaternion::new(z, z, o, z),
            Quaternion::new(z, z, z, o),
        ] {
            assert_eq!(iso.from_matrix(ring, iso.to_matrix(ring, x)), x);
        }
        Ok(iso)
    }

    pub fn image_of_i(&self) -> Mat2 {
        self.img_i
    }

    pub fn image_of_j(&self) -> Mat2 {
        self.img_j
    }

    pub fn image_of_k(&self) -> Mat2 {
        self.img_k
    }

    /// R-linear extension of the basis images; a ring homomorphism.
    pub fn to_matrix(&self, ring: &ChainRing, x: Quaternion) -> Mat2 {
        let mut acc = Mat2::scalar_mul(ring, x.c1, self.img_one);
        acc = Mat2::add(ring, acc, Mat2::scalar_mul(ring, x.ci, self.img_i));
        acc = Mat2::add(ring, acc, Mat2::scalar_mul(ring, x.cj, self.img_j));
        Mat2::add(ring, acc, Mat2::scalar_mul(ring, x.ck, self.img_k))
    }

    /// Inverse of [`QuatMatIso::to_matrix`].
    pub fn from_matrix(&self, ring: &ChainRing, m: Mat2) -> Quaternion {
        let v = mat_to_vec(m);
        let mut c = [ring.zero(); 4];
        for (r, ci) in c.iter_mut().enumerate() {
            for (k, &vk) in v.iter().enumerate() {
                *ci = ring.add(*ci, ring.mul(self.basis_inv[r][k], vk));
            }
        }
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

// ---------------------------------------------------------------------------
// Quaternion literals: `<e>+<e>i+<e>j+<e>k`, whitespace-insensitive,
// omitted terms default to zero.
// ---------------------------------------------------------------------------

pub fn parse_quaternion(ring: &ChainRing, s: &str) -> Result<Quaternion, RingError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(RingError::Parse("empty quaternion literal".into()));
    }
    let mut q = Quaternion::zero(ring);
    for term in split_top_level(&compact, '+') {
        if term.is_empty() {
            return Err(RingError::Parse(format!("empty term in `{s}`")));
        }
        let (coef_str, slot) = match term.chars().last().unwrap() {
            'i' => (&term[..term.len() - 1], 1),
            'j' => (&term[..term.len() - 1], 2),
            'k' => (&term[..term.len() - 1], 3),
            _ => (term, 0),
        };
        let coef = if coef_str.is_empty() {
            ring.one()
        } else {
            ring.parse_element(coef_str)?
        };
        let mut part = Quaternion::zero(ring);
        match slot {
            0 => part.c1 = coef,
            1 => part.ci = coef,
            2 => part.cj = coef,
            _ => part.ck = coef,
        }
        q = Quaternion::add(ring, q, part);
    }
    Ok(q)
}

pub fn format_quaternion(ring: &ChainRing, q: &Quaternion) -> String {
    format!(
        "{}+{}i+{}j+{}k",
        ring.format_element(q.c1),
        ring.format_element(q.ci),
        ring.format_element(q.cj),
        ring.format_element(q.ck)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z9() -> ChainRing {
        ChainRing::parse("zpn:p=3,n=2").unwrap()
    }

    fn f3() -> ChainRing {
        ChainRing::parse("zpn:p=3,n=1").unwrap()
    }

    fn units_ijk(ring: &ChainRing) -> (Quaternion, Quaternion, Quaternion) {
        let (z, o) = (ring.zero(), ring.one());
        (
            Quaternion::new(z, o, z, z),
            Quaternion::new(z, z, o, z),
            Quaternion::new(z, z, z, o),
        )
    }

    #[test]
    fn hamilton_relations() {
        let r = z9();
        let (i, j, k) = units_ijk(&r);
        let minus_one = Quaternion::neg(&r, Quaternion::one(&r));
        assert_eq!(Quaternion::mul(&r, i, i), minus_one);
        assert_eq!(Quaternion::mul(&r, j, j), minus_one);
        assert_eq!(Quaternion::mul(&r, k, k), minus_one);
        assert_eq!(Quaternion::mul(&r, i, j), k);
        assert_eq!(Quaternion::mul(&r, j, k), i);
        assert_eq!(Quaternion::mul(&r, k, i), j);
        assert_eq!(Quaternion::mul(&r, j, i), Quaternion::neg(&r, k));
        assert_eq!(
            Quaternion::mul(&r, Quaternion::mul(&r, i, j), k),
            minus_one
        );
    }

    #[test]
    fn one_plus_i_times_one_minus_i_is_two() {
        let r = z9();
        let (i, _, _) = units_ijk(&r);
        let one = Quaternion::one(&r);
        let prod = Quaternion::mul(
            &r,
            Quaternion::add(&r, one, i),
            Quaternion::sub(&r, one, i),
        );
        assert_eq!(prod, Quaternion::scalar(&r, r.element(2)));
    }

    #[test]
    fn norm_examples() {
        let r = z9();
        let o = r.one();
        let x = Quaternion::new(o, o, o, o);
        assert_eq!(x.norm(&r), r.element(4));
        assert!(x.is_unit(&r));
        let zero = Quaternion::zero(&r);
        assert_eq!(zero.norm(&r), r.zero());
        assert!(!zero.is_unit(&r));
    }

    #[test]
    fn norm_is_x_times_conjugate_and_multiplicative() {
        // includes a characteristic-2 ring, where conj is the identity map
        for spec in ["zpn:p=3,n=1", "zpn:p=2,n=2"] {
            let r = ChainRing::parse(spec).unwrap();
            let size = r.size();
            let quat = |idx: u64| {
                Quaternion::new(
                    r.element(idx % size),
                    r.element((idx / size) % size),
                    r.element((idx / (size * size)) % size),
                    r.element(idx / (size * size * size)),
                )
            };
            let carrier = size.pow(4);
            for xi in 0..carrier {
                let x = quat(xi);
                let xc = Quaternion::mul(&r, x, Quaternion::conj(&r, x));
                assert_eq!(xc, Quaternion::scalar(&r, x.norm(&r)), "{spec}");
                for yi in 0..carrier {
                    let y = quat(yi);
                    let xy = Quaternion::mul(&r, x, y);
                    assert_eq!(xy.norm(&r), r.mul(x.norm(&r), y.norm(&r)), "{spec}");
                }
            }
        }
    }

    #[test]
    fn nonunit_count_in_h_z9_is_2673() {
        let r = z9();
        let size = r.size();
        let mut nonunits = 0u64;
        for idx in 0..size.pow(4) {
            let x = Quaternion::new(
                r.element(idx % size),
                r.element((idx / size) % size),
                r.element((idx / (size * size)) % size),
                r.element(idx / (size * size * size)),
            );
            if !x.is_unit(&r) {
                nonunits += 1;
            }
        }
        assert_eq!(nonunits, 2673);
    }

    #[test]
    fn h_z4_has_only_trivial_idempotents() {
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        let size = r.size();
        let mut idempotents = Vec::new();
        for idx in 0..size.pow(4) {
            let x = Quaternion::new(
                r.element(idx % size),
                r.element((idx / size) % size),
                r.element((idx / (size * size)) % size),
                r.element(idx / (size * size * size)),
            );
            if x.is_idempotent(&r) {
                idempotents.push(x);
            }
        }
        assert_eq!(
            idempotents,
            vec![Quaternion::zero(&r), Quaternion::one(&r)]
        );
    }

    #[test]
    fn iso_over_f3_uses_first_solution() {
        let r = f3();
        let iso = QuatMatIso::build(&r).unwrap();
        assert_eq!((iso.a, iso.b), (r.element(1), r.element(1)));
        assert_eq!(
            iso.image_of_i(),
            Mat2::new(r.element(1), r.element(1), r.element(1), r.element(2))
        );
    }

    #[test]
    fn iso_rejected_when_two_not_invertible() {
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        assert_eq!(
            QuatMatIso::build(&r).unwrap_err(),
            QuatError::TwoNotInvertible
        );
    }

    #[test]
    fn iso_square_of_i_image_is_minus_identity() {
        for spec in ["zpn:p=3,n=1", "zpn:p=3,n=2", "zpn:p=5,n=2", "tp:p=3,r=2,n=2,f=t^2+1"] {
            let r = ChainRing::parse(spec).unwrap();
            let iso = QuatMatIso::build(&r).unwrap();
            let minus_id = Mat2::scalar_mul(&r, r.neg(r.one()), Mat2::identity(&r));
            assert_eq!(
                Mat2::mul(&r, iso.image_of_i(), iso.image_of_i()),
                minus_id,
                "{spec}"
            );
            // identity maps to identity
            assert_eq!(
                iso.to_matrix(&r, Quaternion::one(&r)),
                Mat2::identity(&r),
                "{spec}"
            );
        }
    }

    #[test]
    fn iso_round_trip_and_multiplicativity_exhaustive_f3() {
        let r = f3();
        let iso = QuatMatIso::build(&r).unwrap();
        let size = r.size();
        let quat = |idx: u64| {
            Quaternion::new(
                r.element(idx % size),
                r.element((idx / size) % size),
                r.element((idx / (size * size)) % size),
                r.element(idx / (size * size * size)),
            )
        };
        let all: Vec<Quaternion> = (0..size.pow(4)).map(quat).collect();
        for &x in &all {
            assert_eq!(iso.from_matrix(&r, iso.to_matrix(&r, x)), x);
            // unit in H(R) iff unit determinant on the matrix side
            assert_eq!(
                x.is_unit(&r),
                iso.to_matrix(&r, x).is_invertible(&r)
            );
            for &y in &all {
                assert_eq!(
                    iso.to_matrix(&r, Quaternion::mul(&r, x, y)),
                    Mat2::mul(&r, iso.to_matrix(&r, x), iso.to_matrix(&r, y))
                );
            }
        }
    }

    #[test]
    fn unit_detection_transports_through_iso_exhaustively() {
        for spec in ["zpn:p=3,n=1", "zpn:p=3,n=2"] {
            let r = ChainRing::parse(spec).unwrap();
            let iso = QuatMatIso::build(&r).unwrap();
            let size = r.size();
            for idx in 0..size.pow(4) {
                let x = Quaternion::new(
                    r.element(idx % size),
                    r.element((idx / size) % size),
                    r.element((idx / (size * size)) % size),
                    r.element(idx / (size * size * size)),
                );
                assert_eq!(
                    x.is_unit(&r),
                    iso.to_matrix(&r, x).is_invertible(&r),
                    "{spec}: disagreement at index {idx}"
                );
            }
        }
    }

    #[test]
    fn idempotent_pulled_back_from_projector() {
        let r = f3();
        let iso = QuatMatIso::build(&r).unwrap();
        let proj = Mat2::m_of(&r, r.one(), r.zero());
        let q = iso.from_matrix(&r, proj);
        assert!(q.is_idempotent(&r));
        assert_eq!(iso.to_matrix(&r, q), proj);
    }

    #[test]
    fn quaternion_literals() {
        let r = z9();
        let q = parse_quaternion(&r, "1 + 1i + 0j + 0k").unwrap();
        assert_eq!(q.c1, r.one());
        assert_eq!(q.ci, r.one());
        assert_eq!(parse_quaternion(&r, "1").unwrap(), Quaternion::one(&r));
        assert_eq!(
            parse_quaternion(&r, "3i").unwrap(),
            Quaternion::new(r.zero(), r.element(3), r.zero(), r.zero())
        );
        for idx in [0u64, 1, 100, 4040, 6560] {
            let size = r.size();
            let q = Quaternion::new(
                r.element(idx % size),
                r.element((idx / size) % size),
                r.element((idx / (size * size)) % size),
                r.element(idx / (size * size * size)),
            );
            let lit = format_quaternion(&r, &q);
            assert_eq!(parse_quaternion(&r, &lit).unwrap(), q);
        }
        assert!(parse_quaternion(&r, "9i").is_err());
        assert!(parse_quaternion(&r, "").is_err());
    }

    #[test]
    fn quaternion_literals_bracketed_elements() {
        let r = ChainRing::parse("tp:p=3,r=2,n=2,f=t^2+1").unwrap();
        let q = parse_quaternion(&r, "[1,0]+[0,2]i+[0,0]j+[3,1]k").unwrap();
        let lit = format_quaternion(&r, &q);
        assert_eq!(parse_quaternion(&r, &lit).unwrap(), q);
        assert_eq!(q.c1, r.one());
    }
}
