//! Finite commutative local principal rings (chain rings).
//!
//! Three constructions are supported, covering every parameter combination
//! this crate enumerates over:
//!
//! * `zpn`: the modular ring ℤ_{p^n} with uniformizer p,
//! * `tp`: the truncated polynomial ring GF(q)[y]/(y^n) with GF(q) = F_p[t]/(f)
//!   and uniformizer y,
//! * `gr`: the Galois ring GR(p^l, r) = ℤ_{p^l}[t]/(f) with uniformizer p.
//!
//! Each ring has cardinality q^n with residue field GF(q), q = p^r, and its
//! Jacobson radical is principal: J^k = (x^k) with |J^k| = q^(n-k). Every
//! element factors as unit · x^v for a unique valuation v; `v(0) = n` by
//! convention so that valuation is total.
//!
//! Elements are stored as their position in a fixed enumeration: the
//! canonical coefficient vector read as a little-endian radix numeral
//! (coefficient 0 least significant). Position 0 is always the zero element
//! and position 1 the identity. All arithmetic is exact; nothing is sampled
//! or approximated.

use std::fmt;

use thiserror::Error;

/// Errors raised while constructing rings or parsing element literals.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("invalid ring parameter: {0}")]
    BadParameter(String),
    #[error("ring of size {0} exceeds the 2^32 - 1 element construction limit")]
    TooLarge(u128),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("parse error: {0}")]
    Parse(String),
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_pow(base: u64, exp: u32) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

// ---------------------------------------------------------------------------
// Polynomials over ℤ_m, ascending coefficient order.
// ---------------------------------------------------------------------------

fn poly_trim(c: &mut Vec<u64>) {
    while c.last() == Some(&0) {
        c.pop();
    }
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % m;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` modulo the monic polynomial `f`, coefficients mod `m`.
fn poly_rem_monic(a: &[u64], f: &[u64], m: u64) -> Vec<u64> {
    debug_assert_eq!(*f.last().unwrap(), 1);
    let deg_f = f.len() - 1;
    let mut rem: Vec<u64> = a.to_vec();
    while rem.len() > deg_f {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - deg_f;
        if lead != 0 {
            for (i, &fi) in f.iter().enumerate() {
                let idx = shift + i;
                rem[idx] = (rem[idx] + (m - (lead * fi) % m)) % m;
            }
        }
        rem.pop();
        poly_trim(&mut rem);
        if rem.len() <= deg_f {
            break;
        }
    }
    rem
}

/// Exhaustive factor search: `f` (monic, coefficients already reduced mod p)
/// is irreducible over F_p iff no monic polynomial of degree 1..=deg/2
/// divides it. Degrees at play are tiny, so trial division is enough.
fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // all monic polynomials of degree d: g = t^d + sum c_i t^i
        let count = checked_pow(p, d as u32) as u64;
        for code in 0..count {
            let mut g = vec![0u64; d + 1];
            let mut v = code;
            for gi in g.iter_mut().take(d) {
                *gi = v % p;
                v /= p;
            }
            g[d] = 1;
            if poly_rem_monic(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Polynomial literals: terms like `t^2`, `2t`, `1` joined by `+`.
// ---------------------------------------------------------------------------

fn parse_poly(s: &str) -> Result<Vec<u64>, RingError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(RingError::Parse("empty polynomial".into()));
    }
    let mut coeffs: Vec<u64> = Vec::new();
    for term in s.split('+') {
        if term.is_empty() {
            return Err(RingError::Parse(format!("empty term in `{s}`")));
        }
        let (coef_str, exp) = match term.find('t') {
            None => (term, 0usize),
            Some(ti) => {
                let coef = &term[..ti];
                let rest = &term[ti + 1..];
                let exp = if rest.is_empty() {
                    1
                } else if let Some(e) = rest.strip_prefix('^') {
                    e.parse::<usize>()
                        .map_err(|_| RingError::Parse(format!("bad exponent in `{term}`")))?
                } else {
                    return Err(RingError::Parse(format!("bad term `{term}`")));
                };
                (coef, exp)
            }
        };
        let coef: u64 = if coef_str.is_empty() {
            1
        } else {
            coef_str
                .parse()
                .map_err(|_| RingError::Parse(format!("bad coefficient in `{term}`")))?
        };
        if exp >= coeffs.len() {
            coeffs.resize(exp + 1, 0);
        }
        coeffs[exp] += coef;
    }
    poly_trim(&mut coeffs);
    Ok(coeffs)
}

fn format_poly(coeffs: &[u64]) -> String {
    let mut terms: Vec<String> = Vec::new();
    for (e, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let t = match (e, c) {
            (0, c) => format!("{c}"),
            (1, 1) => "t".into(),
            (1, c) => format!("{c}t"),
            (e, 1) => format!("t^{e}"),
            (e, c) => format!("{c}t^{e}"),
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

// ---------------------------------------------------------------------------
// GF(q) = F_p[t]/(f): elements coded as base-p numerals of their
// coefficient vectors, 0..q-1.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
struct GfField {
    p: u64,
    r: u32,
    q: u64,
    /// monic, degree r, coefficients reduced mod p
    modulus: Vec<u64>,
}

impl GfField {
    fn new(p: u64, r: u32, modulus: Vec<u64>) -> Result<Self, RingError> {
        if modulus.len() != r as usize + 1 {
            return Err(RingError::InvalidModulus(format!(
                "modulus degree {} does not match r={r}",
                modulus.len().max(1) - 1
            )));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(RingError::InvalidModulus("modulus is not monic".into()));
        }
        if !is_irreducible_mod_p(&modulus, p) {
            return Err(RingError::InvalidModulus(format!(
                "{} is reducible mod {p}",
                format_poly(&modulus)
            )));
        }
        let q = checked_pow(p, r);
        if q > u32::MAX as u128 {
            return Err(RingError::TooLarge(q));
        }
        Ok(GfField {
            p,
            r,
            q: q as u64,
            modulus,
        })
    }

    fn decode(&self, code: u64) -> Vec<u64> {
        let mut c = vec![0u64; self.r as usize];
        let mut v = code;
        for ci in c.iter_mut() {
            *ci = v % self.p;
            v /= self.p;
        }
        c
    }

    fn encode(&self, coeffs: &[u64]) -> u64 {
        let mut code = 0u64;
        for &c in coeffs.iter().rev() {
            code = code * self.p + c % self.p;
        }
        code
    }

    fn add(&self, x: u64, y: u64) -> u64 {
        let (a, b) = (self.decode(x), self.decode(y));
        let sum: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&sum)
    }

    fn neg(&self, x: u64) -> u64 {
        let a = self.decode(x);
        let neg: Vec<u64> = a.iter().map(|&u| (self.p - u) % self.p).collect();
        self.encode(&neg)
    }

    fn mul(&self, x: u64, y: u64) -> u64 {
        let (a, b) = (self.decode(x), self.decode(y));
        let prod = poly_mul_mod(&a, &b, self.p);
        let red = poly_rem_monic(&prod, &self.modulus, self.p);
        self.encode(&red)
    }
}

// ---------------------------------------------------------------------------
// Ring specifications.
// ---------------------------------------------------------------------------

/// Validated description of one of the three supported constructions.
///
/// The string grammar accepted by [`RingSpec::parse`] (and used verbatim by
/// the CLI) is:
///
/// ```text
/// zpn:p=<prime>,n=<int>
/// tp:p=<prime>,r=<int>,n=<int>,f=<poly>     e.g. f=t^2+1
/// gr:p=<prime>,l=<int>,r=<int>,f=<poly>
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingSpec {
    Zpn { p: u64, n: u32 },
    TruncPoly { p: u64, r: u32, n: u32, modulus: Vec<u64> },
    Galois { p: u64, l: u32, r: u32, modulus: Vec<u64> },
}

impl RingSpec {
    pub fn parse(s: &str) -> Result<Self, RingError> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| RingError::Parse(format!("missing `:` in ring spec `{s}`")))?;
        let mut fields: Vec<(String, String)> = Vec::new();
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| RingError::Parse(format!("bad field `{part}`")))?;
            fields.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |name: &str| -> Result<&str, RingError> {
            fields
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| RingError::Parse(format!("missing field `{name}`")))
        };
        let int = |name: &str| -> Result<u64, RingError> {
            get(name)?
                .parse()
                .map_err(|_| RingError::Parse(format!("field `{name}` is not an integer")))
        };
        let expect_fields = |names: &[&str]| -> Result<(), RingError> {
            for (k, _) in &fields {
                if !names.contains(&k.as_str()) {
                    return Err(RingError::Parse(format!("unknown field `{k}`")));
                }
            }
            Ok(())
        };
        match kind {
            "zpn" => {
                expect_fields(&["p", "n"])?;
                Ok(RingSpec::Zpn {
                    p: int("p")?,
                    n: int("n")? as u32,
                })
            }
            "tp" => {
                expect_fields(&["p", "r", "n", "f"])?;
                Ok(RingSpec::TruncPoly {
                    p: int("p")?,
                    r: int("r")? as u32,
                    n: int("n")? as u32,
                    modulus: parse_poly(get("f")?)?,
                })
            }
            "gr" => {
                expect_fields(&["p", "l", "r", "f"])?;
                Ok(RingSpec::Galois {
                    p: int("p")?,
                    l: int("l")? as u32,
                    r: int("r")? as u32,
                    modulus: parse_poly(get("f")?)?,
                })
            }
            other => Err(RingError::Parse(format!("unknown ring kind `{other}`"))),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Zpn { p, n } => write!(f, "zpn:p={p},n={n}"),
            RingSpec::TruncPoly { p, r, n, modulus } => {
                write!(f, "tp:p={p},r={r},n={n},f={}", format_poly(modulus))
            }
            RingSpec::Galois { p, l, r, modulus } => {
                write!(f, "gr:p={p},l={l},r={r},f={}", format_poly(modulus))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Elements and the ring handle.
// ---------------------------------------------------------------------------

/// An element of a [`ChainRing`], stored as its enumeration index.
///
/// Canonical form is the index itself: two elements are equal iff their
/// coefficient vectors agree iff their indices agree. Elements only make
/// sense together with the ring that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub(crate) u32);

impl Element {
    /// Position of this element in the ring's enumeration order.
    pub fn index(self) -> u64 {
        self.0 as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// index = residue mod p^n
    Zpn { modulus: u64 },
    /// index = base-q numeral of the GF(q) coefficients of y^0..y^(n-1)
    TruncPoly { gf: GfField },
    /// index = base-p^l numeral of the ℤ_{p^l} coefficients of t^0..t^(r-1)
    Galois { pl: u64, modulus: Vec<u64> },
}

/// A fully materialized finite chain ring.
#[derive(Debug)]
pub struct ChainRing {
    spec: RingSpec,
    repr: Repr,
    p: u64,
    r: u32,
    n: u32,
    q: u64,
    size: u64,
    uniformizer: Element,
    transversal: Vec<Element>,
}

impl ChainRing {
    /// Builds the ring described by `spec`, validating every parameter and
    /// verifying the uniformizer and transversal before returning.
    pub fn make(spec: RingSpec) -> Result<Self, RingError> {
        let ring = match &spec {
            RingSpec::Zpn { p, n } => {
                if !is_prime(*p) {
                    return Err(RingError::NotPrime(*p));
                }
                if *n < 1 {
                    return Err(RingError::BadParameter("n must be >= 1".into()));
                }
                let size = checked_pow(*p, *n);
                if size > u32::MAX as u128 {
                    return Err(RingError::TooLarge(size));
                }
                let size = size as u64;
                ChainRing {
                    p: *p,
                    r: 1,
                    n: *n,
                    q: *p,
                    size,
                    uniformizer: Element((*p % size) as u32),
                    transversal: (0..*p).map(|v| Element(v as u32)).collect(),
                    repr: Repr::Zpn { modulus: size },
                    spec,
                }
            }
            RingSpec::TruncPoly { p, r, n, modulus } => {
                if !is_prime(*p) {
                    return Err(RingError::NotPrime(*p));
                }
                if *r < 1 || *n < 1 {
                    return Err(RingError::BadParameter("r and n must be >= 1".into()));
                }
                let reduced: Vec<u64> = modulus.iter().map(|c| c % p).collect();
                let gf = GfField::new(*p, *r, reduced)?;
                let q = gf.q;
                let size = checked_pow(q, *n);
                if size > u32::MAX as u128 {
                    return Err(RingError::TooLarge(size));
                }
                let size = size as u64;
                // y has index q when n > 1; in the field case J = 0 and x = 0
                let x = if *n > 1 { q } else { 0 };
                ChainRing {
                    p: *p,
                    r: *r,
                    n: *n,
                    q,
                    size,
                    uniformizer: Element(x as u32),
                    transversal: (0..q).map(|v| Element(v as u32)).collect(),
                    repr: Repr::TruncPoly { gf },
                    spec,
                }
            }
            RingSpec::Galois { p, l, r, modulus } => {
                if !is_prime(*p) {
                    return Err(RingError::NotPrime(*p));
                }
                if *l < 1 || *r < 1 {
                    return Err(RingError::BadParameter("l and r must be >= 1".into()));
                }
                let pl = checked_pow(*p, *l);
                if pl > u32::MAX as u128 {
                    return Err(RingError::TooLarge(pl));
                }
                let pl = pl as u64;
                let reduced: Vec<u64> = modulus.iter().map(|c| c % pl).collect();
                {
                    let mut mod_p: Vec<u64> = reduced.iter().map(|c| c % p).collect();
                    poly_trim(&mut mod_p);
                    if mod_p.len() != *r as usize + 1 || *mod_p.last().unwrap_or(&0) != 1 {
                        return Err(RingError::InvalidModulus(
                            "modulus must be monic of degree r mod p".into(),
                        ));
                    }
                    if !is_irreducible_mod_p(&mod_p, *p) {
                        return Err(RingError::InvalidModulus(format!(
                            "{} is reducible mod {p}",
                            format_poly(&mod_p)
                        )));
                    }
                }
                if reduced.len() != *r as usize + 1 || *reduced.last().unwrap() != 1 {
                    return Err(RingError::InvalidModulus(
                        "modulus must be monic of degree r".into(),
                    ));
                }
                let q = checked_pow(*p, *r);
                let size = checked_pow(q as u64, *l);
                if size > u32::MAX as u128 {
                    return Err(RingError::TooLarge(size));
                }
                let size = size as u64;
                // the chain length of GR(p^l, r) is n = l, uniformizer p
                let x = *p % pl;
                // transversal: polynomials with coefficients in 0..p
                let mut transversal = Vec::with_capacity(q as u64 as usize);
                for code in 0..q as u64 {
                    let mut idx = 0u64;
                    let mut v = code;
                    for i in 0..*r {
                        let digit = v % p;
                        v /= p;
                        idx += digit * pl.pow(i);
                    }
                    transversal.push(Element(idx as u32));
                }
                transversal.sort();
                ChainRing {
                    p: *p,
                    r: *r,
                    n: *l,
                    q: q as u64,
                    size,
                    uniformizer: Element(x as u32),
                    transversal,
                    repr: Repr::Galois {
                        pl,
                        modulus: reduced,
                    },
                    spec,
                }
            }
        };
        ring.verify_construction();
        Ok(ring)
    }

    /// Parses a ring-spec string and builds the ring.
    pub fn parse(s: &str) -> Result<Self, RingError> {
        Self::make(RingSpec::parse(s)?)
    }

    fn verify_construction(&self) {
        // nilpotency index of J is exactly n
        let x = self.uniformizer;
        assert_eq!(self.pow(x, self.n as u64), self.zero(), "x^n != 0");
        assert_ne!(
            self.pow(x, self.n as u64 - 1),
            self.zero(),
            "x^(n-1) == 0"
        );
        // transversal: q elements, contains 0, pairwise distinct mod J
        assert_eq!(self.transversal.len() as u64, self.q);
        assert_eq!(self.transversal[0], self.zero());
        for (i, &a) in self.transversal.iter().enumerate() {
            for &b in self.transversal.iter().take(i) {
                assert!(
                    self.valuation(self.sub(a, b)) == 0,
                    "transversal elements collide mod J"
                );
            }
        }
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    /// Characteristic prime p.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Residue-field extension degree r, so q = p^r.
    pub fn r(&self) -> u32 {
        self.r
    }

    /// Chain length: the nilpotency index of J(R).
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Residue field size q = p^r.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Total number of elements, q^n.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// A fixed generator x of J(R); zero in the field case n = 1.
    pub fn uniformizer(&self) -> Element {
        self.uniformizer
    }

    /// Number of units, q^(n-1)(q-1).
    pub fn units_count(&self) -> u64 {
        self.size / self.q * (self.q - 1)
    }

    pub fn zero(&self) -> Element {
        Element(0)
    }

    pub fn one(&self) -> Element {
        Element(1)
    }

    /// Whether 2 is a unit, i.e. p is odd.
    pub fn two_is_unit(&self) -> bool {
        self.p != 2
    }

    /// The element at position `idx` of the enumeration.
    pub fn element(&self, idx: u64) -> Element {
        assert!(idx < self.size, "element index {idx} out of range");
        Element(idx as u32)
    }

    /// Canonical coefficient vector of `a` (ZPN: the single residue;
    /// TruncPoly: n GF(q) codes; Galois: r residues mod p^l).
    pub fn coeffs(&self, a: Element) -> Vec<u64> {
        match &self.repr {
            Repr::Zpn { .. } => vec![a.index()],
            Repr::TruncPoly { gf } => {
                let mut c = vec![0u64; self.n as usize];
                let mut v = a.index();
                for ci in c.iter_mut() {
                    *ci = v % gf.q;
                    v /= gf.q;
                }
                c
            }
            Repr::Galois { pl, .. } => {
                let mut c = vec![0u64; self.r as usize];
                let mut v = a.index();
                for ci in c.iter_mut() {
                    *ci = v % pl;
                    v /= pl;
                }
                c
            }
        }
    }

    fn encode_coeffs(&self, coeffs: &[u64]) -> Element {
        match &self.repr {
            Repr::Zpn { modulus } => Element((coeffs[0] % modulus) as u32),
            Repr::TruncPoly { gf } => {
                let mut idx = 0u64;
                for &c in coeffs.iter().rev() {
                    idx = idx * gf.q + c;
                }
                Element(idx as u32)
            }
            Repr::Galois { pl, .. } => {
                let mut idx = 0u64;
                for &c in coeffs.iter().rev() {
                    idx = idx * pl + c;
                }
                Element(idx as u32)
            }
        }
    }

    pub fn add(&self, a: Element, b: Element) -> Element {
        match &self.repr {
            Repr::Zpn { modulus } => Element(((a.index() + b.index()) % modulus) as u32),
            Repr::TruncPoly { gf } => {
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let sum: Vec<u64> = ca.iter().zip(&cb).map(|(&u, &v)| gf.add(u, v)).collect();
                self.encode_coeffs(&sum)
            }
            Repr::Galois { pl, .. } => {
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let sum: Vec<u64> = ca.iter().zip(&cb).map(|(&u, &v)| (u + v) % pl).collect();
                self.encode_coeffs(&sum)
            }
        }
    }

    pub fn neg(&self, a: Element) -> Element {
        match &self.repr {
            Repr::Zpn { modulus } => Element(((modulus - a.index()) % modulus) as u32),
            Repr::TruncPoly { gf } => {
                let ca = self.coeffs(a);
                let neg: Vec<u64> = ca.iter().map(|&u| gf.neg(u)).collect();
                self.encode_coeffs(&neg)
            }
            Repr::Galois { pl, .. } => {
                let ca = self.coeffs(a);
                let neg: Vec<u64> = ca.iter().map(|&u| (pl - u) % pl).collect();
                self.encode_coeffs(&neg)
            }
        }
    }

    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Element, b: Element) -> Element {
        match &self.repr {
            Repr::Zpn { modulus } => Element(((a.index() * b.index()) % modulus) as u32),
            Repr::TruncPoly { gf } => {
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let n = self.n as usize;
                let mut out = vec![0u64; n];
                for i in 0..n {
                    if ca[i] == 0 {
                        continue;
                    }
                    for j in 0..n - i {
                        if cb[j] == 0 {
                            continue;
                        }
                        out[i + j] = gf.add(out[i + j], gf.mul(ca[i], cb[j]));
                    }
                }
                self.encode_coeffs(&out)
            }
            Repr::Galois { pl, modulus } => {
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let prod = poly_mul_mod(&ca, &cb, *pl);
                let mut red = poly_rem_monic(&prod, modulus, *pl);
                red.resize(self.r as usize, 0);
                self.encode_coeffs(&red)
            }
        }
    }

    pub fn pow(&self, a: Element, mut k: u64) -> Element {
        let mut base = a;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Largest k with a ∈ (x^k); `n` for the zero element.
    pub fn valuation(&self, a: Element) -> u32 {
        if a == self.zero() {
            return self.n;
        }
        match &self.repr {
            Repr::Zpn { .. } => {
                let mut v = 0;
                let mut m = a.index();
                while m.is_multiple_of(self.p) {
                    m /= self.p;
                    v += 1;
                }
                v
            }
            Repr::TruncPoly { .. } => {
                let c = self.coeffs(a);
                c.iter().position(|&ci| ci != 0).unwrap() as u32
            }
            Repr::Galois { .. } => {
                let c = self.coeffs(a);
                c.iter()
                    .filter(|&&ci| ci != 0)
                    .map(|&ci| {
                        let mut v = 0;
                        let mut m = ci;
                        while m % self.p == 0 {
                            m /= self.p;
                            v += 1;
                        }
                        v
                    })
                    .min()
                    .unwrap()
            }
        }
    }

    /// True iff a is invertible, i.e. valuation(a) = 0.
    pub fn is_unit(&self, a: Element) -> bool {
        self.valuation(a) == 0
    }

    /// Inverse of a unit, computed as u^(|U(R)| - 1).
    pub fn inv(&self, u: Element) -> Result<Element, RingError> {
        if !self.is_unit(u) {
            return Err(RingError::NotAUnit);
        }
        Ok(self.pow(u, self.units_count() - 1))
    }

    /// Decomposes a = u · x^v with u the canonical unit: the smallest, in
    /// enumeration order, among all units with that property. Zero maps to
    /// (1, n).
    pub fn unit_part(&self, a: Element) -> (Element, u32) {
        let v = self.valuation(a);
        if v == self.n {
            return (self.one(), self.n);
        }
        let u = match &self.repr {
            Repr::Zpn { .. } => Element((a.index() / self.p.pow(v)) as u32),
            Repr::TruncPoly { .. } => {
                let c = self.coeffs(a);
                let mut shifted = vec![0u64; self.n as usize];
                for i in v as usize..self.n as usize {
                    shifted[i - v as usize] = c[i];
                }
                self.encode_coeffs(&shifted)
            }
            Repr::Galois { .. } => {
                let c = self.coeffs(a);
                let pv = self.p.pow(v);
                let shifted: Vec<u64> = c.iter().map(|&ci| ci / pv).collect();
                self.encode_coeffs(&shifted)
            }
        };
        debug_assert!(self.is_unit(u));
        debug_assert_eq!(self.mul(u, self.pow(self.uniformizer, v as u64)), a);
        (u, v)
    }

    /// The fixed transversal T of R/J(R): q elements, 0 first, each residue
    /// class represented exactly once.
    pub fn transversal(&self) -> &[Element] {
        &self.transversal
    }

    /// Writes a = Σ dᵢ xⁱ with every digit dᵢ in the transversal. The
    /// expansion has exactly n digits and round-trips exactly.
    pub fn digit_expansion(&self, a: Element) -> Vec<Element> {
        match &self.repr {
            Repr::Zpn { .. } => {
                let mut digits = Vec::with_capacity(self.n as usize);
                let mut v = a.index();
                for _ in 0..self.n {
                    digits.push(Element((v % self.p) as u32));
                    v /= self.p;
                }
                digits
            }
            Repr::TruncPoly { .. } => self
                .coeffs(a)
                .iter()
                .map(|&c| Element(c as u32))
                .collect(),
            Repr::Galois { .. } => {
                let c = self.coeffs(a);
                let mut digits = Vec::with_capacity(self.n as usize);
                for j in 0..self.n {
                    let pj = self.p.pow(j);
                    let digit: Vec<u64> = c.iter().map(|&ci| (ci / pj) % self.p).collect();
                    digits.push(self.encode_coeffs(&digit));
                }
                digits
            }
        }
    }

    /// All elements, in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size).map(Element::from_index)
    }

    /// All units, in enumeration order: exactly q^(n-1)(q-1) of them.
    pub fn units(&self) -> impl Iterator<Item = Element> + '_ {
        self.elements().filter(move |&a| self.is_unit(a))
    }

    /// All elements of J(R)^k = (x^k), in enumeration order: q^(n-k) of them.
    pub fn ideal(&self, k: u32) -> impl Iterator<Item = Element> + '_ {
        assert!(k <= self.n, "ideal power {k} exceeds n={}", self.n);
        self.elements().filter(move |&a| self.valuation(a) >= k)
    }

    // -- element literals ---------------------------------------------------

    /// Parses an element literal: a decimal residue for `zpn` rings, a
    /// `[c0,c1,...]` coefficient list otherwise.
    pub fn parse_element(&self, s: &str) -> Result<Element, RingError> {
        let s = s.trim();
        match &self.repr {
            Repr::Zpn { modulus } => {
                let v: u64 = s
                    .parse()
                    .map_err(|_| RingError::Parse(format!("bad element literal `{s}`")))?;
                if v >= *modulus {
                    return Err(RingError::Parse(format!(
                        "residue {v} out of range [0, {modulus})"
                    )));
                }
                Ok(Element(v as u32))
            }
            Repr::TruncPoly { gf } => {
                let coeffs = parse_int_list(s, self.n as usize)?;
                for &c in &coeffs {
                    if c >= gf.q {
                        return Err(RingError::Parse(format!(
                            "coefficient {c} out of range [0, {})",
                            gf.q
                        )));
                    }
                }
                Ok(self.encode_coeffs(&coeffs))
            }
            Repr::Galois { pl, .. } => {
                let coeffs = parse_int_list(s, self.r as usize)?;
                for &c in &coeffs {
                    if c >= *pl {
                        return Err(RingError::Parse(format!(
                            "coefficient {c} out of range [0, {pl})"
                        )));
                    }
                }
                Ok(self.encode_coeffs(&coeffs))
            }
        }
    }

    /// Canonical literal of `a`; re-parses to the same element.
    pub fn format_element(&self, a: Element) -> String {
        match &self.repr {
            Repr::Zpn { .. } => format!("{}", a.index()),
            _ => {
                let c = self.coeffs(a);
                let items: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("[{}]", items.join(","))
            }
        }
    }
}

impl Element {
    fn from_index(idx: u64) -> Element {
        Element(idx as u32)
    }
}

fn parse_int_list(s: &str, expect_len: usize) -> Result<Vec<u64>, RingError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| RingError::Parse(format!("expected `[c0,c1,...]`, got `{s}`")))?;
    let mut out = Vec::new();
    if !inner.trim().is_empty() {
        for item in inner.split(',') {
            let v: u64 = item
                .trim()
                .parse()
                .map_err(|_| RingError::Parse(format!("bad coefficient `{item}`")))?;
            out.push(v);
        }
    }
    if out.len() != expect_len {
        return Err(RingError::Parse(format!(
            "expected {expect_len} coefficients, got {}",
            out.len()
        )));
    }
    Ok(out)
}
