//! Exhaustive brute-force censuses and the verdict report.
//!
//! Brute force is the authority here: every closed form evaluated by
//! [`formulas`] is compared against a completed exhaustive enumeration and
//! the report records which variants survive. No count labeled `brute` is
//! ever sampled.
//!
//! The carrier (all of M₂(R) or H(R)) is indexed by packing the four
//! component indices little-endian in base |R|, and membership is tracked
//! in dense bitsets, so sweeps are cheap and scheduling-independent: the
//! product sweep partitions S_r into blocks, each block marks indices into
//! its own bitset, and the blocks are merged by set union.

pub mod formulas;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chainring::ChainRing;
use crate::mat2::{
    all_orbit_labels, gl2_size, orbit_size, Mat2, OrbitLabel, OrbitSizeVariant,
};
use crate::quaternion::Quaternion;
use formulas::{
    count_idempotents_formula, count_products_formula, IdempotentCountVariant, ProductsVariant,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CensusError {
    #[error("cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded { what: String, needed: u128, cap: u64 },
    #[error(transparent)]
    Formula(#[from] formulas::FormulaError),
}

/// Resource ceilings for exhaustive work, overridable from the CLI.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// largest carrier (q^(4n)) that may be enumerated or bitset-indexed
    pub carrier: u64,
    /// largest |S₁|² pair-product budget for the closure sweep
    pub pair_products: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            carrier: 1 << 24,
            pair_products: 1 << 32,
        }
    }
}

/// Which four-component algebra the census runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    H,
    M2,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::H => "h",
            Target::M2 => "m2",
        }
    }
}

// ---------------------------------------------------------------------------
// Dense exact membership over the carrier.
// ---------------------------------------------------------------------------

/// Fixed-domain bitset with exact counting; union is the merge operation
/// for partitioned sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSet {
    words: Vec<u64>,
    domain: u64,
    count: u64,
}

impl DenseSet {
    pub fn new(domain: u64) -> Self {
        DenseSet {
            words: vec![0u64; domain.div_ceil(64) as usize],
            domain,
            count: 0,
        }
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn insert(&mut self, idx: u64) -> bool {
        debug_assert!(idx < self.domain);
        let word = &mut self.words[(idx >> 6) as usize];
        let mask = 1u64 << (idx & 63);
        if *word & mask == 0 {
            *word |= mask;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn contains(&self, idx: u64) -> bool {
        debug_assert!(idx < self.domain);
        self.words[(idx >> 6) as usize] & (1u64 << (idx & 63)) != 0
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn union_with(&mut self, other: &DenseSet) {
        debug_assert_eq!(self.domain, other.domain);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        self.count = self.words.iter().map(|w| w.count_ones() as u64).sum();
    }

    /// Set members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as u64;
                    bits &= bits - 1;
                    Some((wi as u64) * 64 + b)
                }
            })
        })
    }
}

// ---------------------------------------------------------------------------
// Carrier indexing and multiplication.
// ---------------------------------------------------------------------------

pub fn encode_mat(ring: &ChainRing, m: &Mat2) -> u64 {
    let s = ring.size();
    ((m.e22.index() * s + m.e21.index()) * s + m.e12.index()) * s + m.e11.index()
}

pub fn decode_mat(ring: &ChainRing, idx: u64) -> Mat2 {
    let s = ring.size();
    Mat2::new(
        ring.element(idx % s),
        ring.element((idx / s) % s),
        ring.element((idx / (s * s)) % s),
        ring.element(idx / (s * s * s)),
    )
}

pub fn encode_quat(ring: &ChainRing, q: &Quaternion) -> u64 {
    let s = ring.size();
    ((q.ck.index() * s + q.cj.index()) * s + q.ci.index()) * s + q.c1.index()
}

pub fn decode_quat(ring: &ChainRing, idx: u64) -> Quaternion {
    let s = ring.size();
    Quaternion::new(
        ring.element(idx % s),
        ring.element((idx / s) % s),
        ring.element((idx / (s * s)) % s),
        ring.element(idx / (s * s * s)),
    )
}

/// One carrier element, predecoded for the sweep inner loops.
#[derive(Clone, Copy)]
enum Decoded {
    M(Mat2),
    Q(Quaternion),
}

struct Carrier<'a> {
    ring: &'a ChainRing,
    target: Target,
}

impl<'a> Carrier<'a> {
    fn new(ring: &'a ChainRing, target: Target) -> Self {
        Carrier { ring, target }
    }

    fn size(&self) -> u128 {
        (self.ring.size() as u128).pow(4)
    }

    fn checked_size(&self, caps: &Caps) -> Result<u64, CensusError> {
        let needed = self.size();
        if needed > caps.carrier as u128 {
            return Err(CensusError::CapExceeded {
                what: format!("carrier of {}", self.target.name()),
                needed,
                cap: caps.carrier,
            });
        }
        Ok(needed as u64)
    }

    fn decode(&self, idx: u64) -> Decoded {
        match self.target {
            Target::M2 => Decoded::M(decode_mat(self.ring, idx)),
            Target::H => Decoded::Q(decode_quat(self.ring, idx)),
        }
    }

    fn mul_encode(&self, x: &Decoded, y: &Decoded) -> u64 {
        match (x, y) {
            (Decoded::M(a), Decoded::M(b)) => {
                encode_mat(self.ring, &Mat2::mul(self.ring, *a, *b))
            }
            (Decoded::Q(a), Decoded::Q(b)) => {
                encode_quat(self.ring, &Quaternion::mul(self.ring, *a, *b))
            }
            _ => unreachable!("mixed carrier elements"),
        }
    }

    fn is_idempotent(&self, idx: u64) -> bool {
        match self.decode(idx) {
            Decoded::M(m) => m.is_idempotent(self.ring),
            Decoded::Q(q) => q.is_idempotent(self.ring),
        }
    }

    fn is_unit(&self, idx: u64) -> bool {
        match self.decode(idx) {
            Decoded::M(m) => m.is_invertible(self.ring),
            Decoded::Q(q) => q.is_unit(self.ring),
        }
    }
}

// ---------------------------------------------------------------------------
// Brute-force sweeps.
// ---------------------------------------------------------------------------

/// Exhaustive idempotent scan over the carrier, ascending index order.
pub fn brute_idempotents(
    ring: &ChainRing,
    target: Target,
    caps: &Caps,
) -> Result<Vec<u64>, CensusError> {
    let carrier = Carrier::new(ring, target);
    let size = carrier.checked_size(caps)?;
    Ok((0..size)
        .into_par_iter()
        .filter(|&idx| carrier.is_idempotent(idx))
        .collect())
}

/// Exhaustive count of invertible elements of the carrier.
pub fn brute_units(ring: &ChainRing, target: Target, caps: &Caps) -> Result<u64, CensusError> {
    let carrier = Carrier::new(ring, target);
    let size = carrier.checked_size(caps)?;
    Ok((0..size)
        .into_par_iter()
        .filter(|&idx| carrier.is_unit(idx))
        .count() as u64)
}

/// |GL₂(R)| by exhaustive determinant scan.
pub fn gl2_brute(ring: &ChainRing, caps: &Caps) -> Result<u64, CensusError> {
    brute_units(ring, Target::M2, caps)
}

/// Result of the iterated product sweep S₁, S₂, …
#[derive(Debug, Clone)]
pub struct ClosureCensus {
    /// |S_r| for r = 1, 2, …, up to and including the stable set
    pub sizes: Vec<u64>,
    /// least r with S_(r+1) = S_r, when stabilization was reached
    pub stable_at: Option<u32>,
    /// the final set reached
    pub members: DenseSet,
}

/// Iterates S₁ = idempotents, S_(r+1) = { s·e : s ∈ S_r, e ∈ S₁ } until the
/// sets stabilize or `r_max` is reached. The identity is idempotent, so the
/// sequence is monotone and the final set is the full closure under
/// right-multiplication by idempotents.
pub fn brute_products_census(
    ring: &ChainRing,
    target: Target,
    r_max: u32,
    caps: &Caps,
) -> Result<ClosureCensus, CensusError> {
    assert!(r_max >= 1);
    let carrier = Carrier::new(ring, target);
    let size = carrier.checked_size(caps)?;
    let idempotents = brute_idempotents(ring, target, caps)?;
    let pair_budget = (idempotents.len() as u128).pow(2);
    if pair_budget > caps.pair_products as u128 {
        return Err(CensusError::CapExceeded {
            what: "pair products |S1|^2".into(),
            needed: pair_budget,
            cap: caps.pair_products,
        });
    }
    let decoded_idempotents: Vec<Decoded> =
        idempotents.iter().map(|&e| carrier.decode(e)).collect();

    let mut members = DenseSet::new(size);
    for &e in &idempotents {
        members.insert(e);
    }
    let mut sizes = vec![members.len()];
    let mut stable_at = None;
    let mut frontier: Vec<u64> = idempotents;

    for r in 1..r_max {
        let next = frontier
            .par_chunks(1024)
            .fold(
                || DenseSet::new(size),
                |mut local, chunk| {
                    for &s in chunk {
                        let sd = carrier.decode(s);
                        for e in &decoded_idempotents {
                            local.insert(carrier.mul_encode(&sd, e));
                        }
                    }
                    local
                },
            )
            .reduce(
                || DenseSet::new(size),
                |mut a, b| {
                    a.union_with(&b);
                    a
                },
            );
        if next == members {
            stable_at = Some(r);
            break;
        }
        sizes.push(next.len());
        frontier = next.iter().collect();
        members = next;
    }
    // the loop above stops one step after the last growth; if it ran out of
    // budget without two equal consecutive sets, stabilization is unknown
    Ok(ClosureCensus {
        sizes,
        stable_at,
        members,
    })
}

/// Conjugation orbit of `m` under GL₂(R), by breadth-first closure under
/// the generators E12(t), E21(t) for all t and diag(u,1) for all units u.
/// Over a local ring these generate the whole group (Gaussian elimination
/// always finds a unit pivot), and the set is closed under inverses, so the
/// BFS closure is exactly the orbit.
pub fn brute_orbit_of(ring: &ChainRing, m: Mat2, caps: &Caps) -> Result<DenseSet, CensusError> {
    let carrier = Carrier::new(ring, Target::M2);
    let size = carrier.checked_size(caps)?;
    let (z, o) = (ring.zero(), ring.one());
    let mut generators: Vec<(Mat2, Mat2)> = Vec::new();
    for t in ring.elements() {
        let e12 = Mat2::new(o, t, z, o);
        let e21 = Mat2::new(o, z, t, o);
        generators.push((e12, e12.inverse(ring).unwrap()));
        generators.push((e21, e21.inverse(ring).unwrap()));
    }
    for u in ring.units() {
        let d = Mat2::new(u, z, z, o);
        generators.push((d, d.inverse(ring).unwrap()));
    }

    let mut visited = DenseSet::new(size);
    visited.insert(encode_mat(ring, &m));
    let mut stack = vec![m];
    while let Some(a) = stack.pop() {
        for (g, g_inv) in &generators {
            let conj = Mat2::mul(ring, Mat2::mul(ring, *g, a), *g_inv);
            if visited.insert(encode_mat(ring, &conj)) {
                stack.push(conj);
            }
        }
    }
    Ok(visited)
}

/// Size of the orbit named by `label`, by exhaustive BFS.
pub fn brute_orbit_size(
    ring: &ChainRing,
    label: &OrbitLabel,
    caps: &Caps,
) -> Result<u64, CensusError> {
    Ok(brute_orbit_of(ring, label.representative(ring), caps)?.len())
}

// ---------------------------------------------------------------------------
// The verdict report.
// ---------------------------------------------------------------------------

/// All counts, decimal-encoded; counts the census could not afford (or that
/// do not apply) are `null`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Counts {
    pub idempotents_brute: String,
    #[serde(rename = "idempotents_formula_paper")]
    pub idempotents_formula_cubic: String,
    #[serde(rename = "idempotents_formula_alt")]
    pub idempotents_formula_quadratic: String,
    pub products_brute: String,
    pub products_closed_form: String,
    pub products_orbitsum_statement: String,
    pub products_orbitsum_proof: String,
    pub gl2_brute: Option<String>,
    pub gl2_formula: String,
    pub closure_stable_at_r: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OrbitRow {
    pub label: String,
    pub size_statement: String,
    pub size_proof: String,
    pub size_brute: Option<String>,
}

/// Verdict for one quantity: brute force is authoritative, formulas are
/// hypotheses; the verdict is UNIQUE:<variant> when exactly one hypothesis
/// matches, otherwise a CONFLICT that lists the survivors.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Verdict {
    pub brute: Option<String>,
    pub matching: Vec<String>,
    pub verdict: String,
}

impl Verdict {
    fn adjudicate(brute: Option<String>, candidates: &[(&'static str, String)]) -> Verdict {
        let matching: Vec<String> = match &brute {
            Some(b) => candidates
                .iter()
                .filter(|(_, v)| v == b)
                .map(|(name, _)| name.to_string())
                .collect(),
            None => Vec::new(),
        };
        let verdict = match (brute.is_some(), matching.len()) {
            (false, _) => "NOT_COMPUTED".to_string(),
            (true, 0) => "CONFLICT:NONE".to_string(),
            (true, 1) => format!("UNIQUE:{}", matching[0]),
            _ => "CONFLICT:MULTIPLE".to_string(),
        };
        Verdict {
            brute,
            matching,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Verdicts {
    pub idempotents: Verdict,
    pub products: Verdict,
    pub orbit_sizes: Verdict,
}

/// How the product total splits around the invertible identity, since
/// "N products" and "N noninvertible products" are easily conflated.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ExampleReading {
    pub products_total: String,
    pub products_excluding_identity: String,
    pub nonunits: String,
    pub note: String,
}

/// Formula-versus-oracle comparison record for one ring and target.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CensusReport {
    pub ring: String,
    pub target: String,
    pub counts: Counts,
    pub closure_sizes: Vec<String>,
    pub per_orbit: Vec<OrbitRow>,
    pub verdicts: Verdicts,
    pub example_reading: ExampleReading,
}

impl CensusReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        fn cell(s: &str) -> String {
            if s.contains(',') || s.contains('"') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::new();
        out.push_str("section,key,value\n");
        let mut count = |k: &str, v: &str| {
            out.push_str(&format!("count,{},{}\n", cell(k), cell(v)));
        };
        count("ring", &self.ring);
        count("target", &self.target);
        count("idempotents_brute", &self.counts.idempotents_brute);
        count("idempotents_formula_paper", &self.counts.idempotents_formula_cubic);
        count("idempotents_formula_alt", &self.counts.idempotents_formula_quadratic);
        count("products_brute", &self.counts.products_brute);
        count("products_closed_form", &self.counts.products_closed_form);
        count(
            "products_orbitsum_statement",
            &self.counts.products_orbitsum_statement,
        );
        count("products_orbitsum_proof", &self.counts.products_orbitsum_proof);
        count(
            "gl2_brute",
            self.counts.gl2_brute.as_deref().unwrap_or("null"),
        );
        count("gl2_formula", &self.counts.gl2_formula);
        count("closure_stable_at_r", &self.counts.closure_stable_at_r);
        for (i, s) in self.closure_sizes.iter().enumerate() {
            count(&format!("closure_size_r{}", i + 1), s);
        }
        count("products_total", &self.example_reading.products_total);
        count(
            "products_excluding_identity",
            &self.example_reading.products_excluding_identity,
        );
        count("nonunits", &self.example_reading.nonunits);
        let mut out2 = out;
        for row in &self.per_orbit {
            out2.push_str(&format!(
                "orbit,{},{}\n",
                cell(&row.label),
                cell(&format!(
                    "statement={};proof={};brute={}",
                    row.size_statement,
                    row.size_proof,
                    row.size_brute.as_deref().unwrap_or("null")
                ))
            ));
        }
        for (name, v) in [
            ("idempotents", &self.verdicts.idempotents),
            ("products", &self.verdicts.products),
            ("orbit_sizes", &self.verdicts.orbit_sizes),
        ] {
            out2.push_str(&format!(
                "verdict,{},{}\n",
                cell(name),
                cell(&format!("{} matching=[{}]", v.verdict, v.matching.join(";")))
            ));
        }
        out2
    }
}

/// Runs every census and formula for the ring and adjudicates the variants.
///
/// Products-count predictions are per target: for H(R) with p = 2 the
/// prediction is 2 in every variant (H(R) is local), otherwise the formula
/// values apply to both targets alike.
pub fn run_verification(
    ring: &ChainRing,
    target: Target,
    r_max: u32,
    caps: &Caps,
) -> Result<CensusReport, CensusError> {
    let q = ring.q();
    let n = ring.n();
    let p = ring.p();

    let closure = brute_products_census(ring, target, r_max, caps)?;
    let products_brute = closure.members.len();
    let idempotents_brute = closure.sizes[0];

    let local_h = target == Target::H && p == 2;
    let predict = |variant: ProductsVariant| -> Result<BigUint, CensusError> {
        if local_h {
            Ok(BigUint::from(2u32))
        } else {
            Ok(count_products_formula(q, n, variant)?)
        }
    };
    let closed = predict(ProductsVariant::Closed)?;
    let orbitsum_statement = predict(ProductsVariant::OrbitsumStatement)?;
    let orbitsum_proof = predict(ProductsVariant::OrbitsumProof)?;

    let idempotents_cubic =
        count_idempotents_formula(q, n, p, IdempotentCountVariant::Cubic);
    let idempotents_quadratic =
        count_idempotents_formula(q, n, p, IdempotentCountVariant::Quadratic);

    let gl2_formula = gl2_size(ring);
    let gl2_brute_count = gl2_brute(ring, caps).ok();

    // matrix-side orbit table with BFS sizes
    let mut per_orbit = Vec::new();
    let mut orbit_brute: Vec<(BigUint, BigUint, Option<u64>)> = Vec::new();
    for label in all_orbit_labels(ring) {
        let stmt = orbit_size(ring, &label, OrbitSizeVariant::Statement);
        let proof = orbit_size(ring, &label, OrbitSizeVariant::Proof);
        let brute = brute_orbit_size(ring, &label, caps).ok();
        per_orbit.push(OrbitRow {
            label: label.format(ring),
            size_statement: stmt.to_string(),
            size_proof: proof.to_string(),
            size_brute: brute.map(|b| b.to_string()),
        });
        orbit_brute.push((stmt, proof, brute));
    }

    let verdict_idempotents = Verdict::adjudicate(
        Some(idempotents_brute.to_string()),
        &[
            (
                IdempotentCountVariant::Cubic.wire_name(),
                idempotents_cubic.to_string(),
            ),
            (
                IdempotentCountVariant::Quadratic.wire_name(),
                idempotents_quadratic.to_string(),
            ),
        ],
    );
    let verdict_products = Verdict::adjudicate(
        Some(products_brute.to_string()),
        &[
            (ProductsVariant::Closed.wire_name(), closed.to_string()),
            (
                ProductsVariant::OrbitsumStatement.wire_name(),
                orbitsum_statement.to_string(),
            ),
            (
                ProductsVariant::OrbitsumProof.wire_name(),
                orbitsum_proof.to_string(),
            ),
        ],
    );
    // a size variant survives only if it matches the BFS size of every orbit
    let all_computed = orbit_brute.iter().all(|(_, _, b)| b.is_some());
    let verdict_orbits = if all_computed {
        let stmt_ok = orbit_brute
            .iter()
            .all(|(s, _, b)| *s == BigUint::from(b.unwrap()));
        let proof_ok = orbit_brute
            .iter()
            .all(|(_, p, b)| *p == BigUint::from(b.unwrap()));
        let mut matching = Vec::new();
        if stmt_ok {
            matching.push(OrbitSizeVariant::Statement.name().to_string());
        }
        if proof_ok {
            matching.push(OrbitSizeVariant::Proof.name().to_string());
        }
        let verdict = match matching.len() {
            0 => "CONFLICT:NONE".to_string(),
            1 => format!("UNIQUE:{}", matching[0]),
            _ => "CONFLICT:MULTIPLE".to_string(),
        };
        Verdict {
            brute: Some("per-label".to_string()),
            matching,
            verdict,
        }
    } else {
        Verdict {
            brute: None,
            matching: Vec::new(),
            verdict: "NOT_COMPUTED".to_string(),
        }
    };

    let nonunits = {
        let carrier = Carrier::new(ring, target);
        carrier.checked_size(caps)? - brute_units(ring, target, caps)?
    };
    let identity_idx = match target {
        Target::M2 => encode_mat(ring, &Mat2::identity(ring)),
        Target::H => encode_quat(ring, &Quaternion::one(ring)),
    };
    debug_assert!(closure.members.contains(identity_idx));

    Ok(CensusReport {
        ring: ring.spec().to_string(),
        target: target.name().to_string(),
        counts: Counts {
            idempotents_brute: idempotents_brute.to_string(),
            idempotents_formula_cubic: idempotents_cubic.to_string(),
            idempotents_formula_quadratic: idempotents_quadratic.to_string(),
            products_brute: products_brute.to_string(),
            products_closed_form: closed.to_string(),
            products_orbitsum_statement: orbitsum_statement.to_string(),
            products_orbitsum_proof: orbitsum_proof.to_string(),
            gl2_brute: gl2_brute_count.map(|v| v.to_string()),
            gl2_formula: gl2_formula.to_string(),
            closure_stable_at_r: closure
                .stable_at
                .map(|r| r.to_string())
                .unwrap_or_else(|| "unknown".to_string()),
        },
        closure_sizes: closure.sizes.iter().map(|s| s.to_string()).collect(),
        per_orbit,
        verdicts: Verdicts {
            idempotents: verdict_idempotents,
            products: verdict_products,
            orbit_sizes: verdict_orbits,
        },
        example_reading: ExampleReading {
            products_total: products_brute.to_string(),
            products_excluding_identity: (products_brute - 1).to_string(),
            nonunits: nonunits.to_string(),
            note: "products_total includes the invertible identity; every other \
                   product of idempotents is noninvertible"
                .to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainring::Element;
    use crate::mat2::{canonical_rep, same_orbit_m, BClass};
    use num_traits::Zero;

    fn z9() -> ChainRing {
        ChainRing::parse("zpn:p=3,n=2").unwrap()
    }

    fn f3() -> ChainRing {
        ChainRing::parse("zpn:p=3,n=1").unwrap()
    }

    #[test]
    fn dense_set_basics() {
        let mut s = DenseSet::new(130);
        assert!(s.insert(0));
        assert!(!s.insert(0));
        assert!(s.insert(129));
        assert!(s.insert(64));
        assert_eq!(s.len(), 3);
        assert!(s.contains(64));
        assert!(!s.contains(63));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        let mut t = DenseSet::new(130);
        t.insert(5);
        t.insert(64);
        s.union_with(&t);
        assert_eq!(s.len(), 4);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 64, 129]);
    }

    #[test]
    fn mat_and_quat_encoding_round_trip() {
        let r = z9();
        for idx in [0u64, 1, 9, 6560, 3333] {
            assert_eq!(encode_mat(&r, &decode_mat(&r, idx)), idx);
            assert_eq!(encode_quat(&r, &decode_quat(&r, idx)), idx);
        }
    }

    #[test]
    fn f3_idempotent_scan_adjudicates_variants() {
        let r = f3();
        let caps = Caps::default();
        let idem = brute_idempotents(&r, Target::M2, &caps).unwrap();
        // quadratic wins: 2 + q(q+1) = 14, not the cubic 26
        assert_eq!(idem.len(), 14);
    }

    #[test]
    fn h_z4_idempotents_and_products_are_trivial() {
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        let caps = Caps::default();
        let idem = brute_idempotents(&r, Target::H, &caps).unwrap();
        assert_eq!(idem.len(), 2);
        let census = brute_products_census(&r, Target::H, 6, &caps).unwrap();
        assert_eq!(census.members.len(), 2);
        assert_eq!(census.stable_at, Some(1));
        let members: Vec<u64> = census.members.iter().collect();
        assert_eq!(
            members,
            vec![
                encode_quat(&r, &Quaternion::zero(&r)),
                encode_quat(&r, &Quaternion::one(&r))
            ]
        );
    }

    #[test]
    fn f3_products_census() {
        let r = f3();
        let caps = Caps::default();
        let census = brute_products_census(&r, Target::M2, 8, &caps).unwrap();
        assert_eq!(census.sizes, vec![14, 34]);
        assert_eq!(census.stable_at, Some(2));
        // every member except the identity is singular
        let id = encode_mat(&r, &Mat2::identity(&r));
        for idx in census.members.iter() {
            let m = decode_mat(&r, idx);
            assert_eq!(m.is_invertible(&r), idx == id);
        }
    }

    #[test]
    fn z9_census_finds_898() {
        let r = z9();
        let caps = Caps::default();
        let m2 = brute_products_census(&r, Target::M2, 6, &caps).unwrap();
        assert_eq!(m2.members.len(), 898);
        assert_eq!(m2.stable_at, Some(2));
        let h = brute_products_census(&r, Target::H, 6, &caps).unwrap();
        assert_eq!(h.members.len(), 898);
        assert_eq!(h.sizes, vec![110, 898]);
    }

    #[test]
    fn closure_is_monotone_until_stable() {
        let r = z9();
        let caps = Caps::default();
        let idem = brute_idempotents(&r, Target::M2, &caps).unwrap();
        let census = brute_products_census(&r, Target::M2, 8, &caps).unwrap();
        for w in census.sizes.windows(2) {
            assert!(w[0] < w[1], "sizes must strictly grow until stabilization");
        }
        for e in idem {
            assert!(census.members.contains(e), "S1 must stay inside the closure");
        }
    }

    #[test]
    fn m2_closed_form_holds_even_at_p2() {
        // the matrix-side count is p-independent; over Z4 the closed form
        // gives 83 and the census must agree
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        let census = brute_products_census(&r, Target::M2, 8, &Caps::default()).unwrap();
        let closed =
            formulas::count_products_formula(2, 2, ProductsVariant::Closed).unwrap();
        assert_eq!(BigUint::from(census.members.len()), closed);
        assert_eq!(census.members.len(), 83);
    }

    #[test]
    fn decision_agrees_with_census_on_z25_and_h_z4() {
        let caps = Caps::default();
        // exhaustive completeness over M2(Z25)
        let r = ChainRing::parse("zpn:p=5,n=2").unwrap();
        let census = brute_products_census(&r, Target::M2, 8, &caps).unwrap();
        for idx in 0..r.size().pow(4) {
            let m = decode_mat(&r, idx);
            let decided = crate::factorize::is_product_of_two_idempotents_mat(&r, m).is_some();
            assert_eq!(decided, census.members.contains(idx), "Z25 idx {idx}");
        }
        // and over H(Z4), where the decision short-circuits to the local case
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        let census = brute_products_census(&r, Target::H, 8, &caps).unwrap();
        for idx in 0..r.size().pow(4) {
            let x = decode_quat(&r, idx);
            let decided = crate::factorize::is_product_of_idempotents(&r, x, None).is_some();
            assert_eq!(decided, census.members.contains(idx), "H(Z4) idx {idx}");
        }
    }

    #[test]
    fn caps_are_enforced() {
        let r = z9();
        let caps = Caps {
            carrier: 100,
            pair_products: 1 << 32,
        };
        match brute_idempotents(&r, Target::M2, &caps) {
            Err(CensusError::CapExceeded { needed, cap, .. }) => {
                assert_eq!(needed, 6561);
                assert_eq!(cap, 100);
            }
            other => panic!("expected CapExceeded, got {other:?}"),
        }
        let caps = Caps {
            carrier: 1 << 24,
            pair_products: 100,
        };
        assert!(matches!(
            brute_products_census(&r, Target::M2, 4, &caps),
            Err(CensusError::CapExceeded { .. })
        ));
    }

    #[test]
    fn gl2_brute_matches_formula_on_small_rings() {
        let caps = Caps::default();
        for spec in ["zpn:p=3,n=1", "zpn:p=2,n=2", "zpn:p=3,n=2", "tp:p=3,r=2,n=1,f=t^2+1"] {
            let r = ChainRing::parse(spec).unwrap();
            let brute = gl2_brute(&r, &caps).unwrap();
            assert_eq!(BigUint::from(brute), gl2_size(&r), "{spec}");
        }
    }

    #[test]
    fn orbit_bfs_sizes_over_z9() {
        let r = z9();
        let caps = Caps::default();
        // unit trace, ZERO class: 108
        let label = canonical_rep(&r, r.one(), r.zero());
        assert_eq!(brute_orbit_size(&r, &label, &caps).unwrap(), 108);
        // a = 0, k = 0: 72
        let label = canonical_rep(&r, r.zero(), r.one());
        assert_eq!(brute_orbit_size(&r, &label, &caps).unwrap(), 72);
        // M(0,0) is fixed
        let label = canonical_rep(&r, r.zero(), r.zero());
        assert_eq!(brute_orbit_size(&r, &label, &caps).unwrap(), 1);
    }

    #[test]
    fn orbit_sizes_divide_group_order() {
        let r = z9();
        let caps = Caps::default();
        for label in all_orbit_labels(&r) {
            let size = brute_orbit_size(&r, &label, &caps).unwrap();
            assert!(
                (gl2_size(&r) % BigUint::from(size)).is_zero(),
                "orbit size {size} does not divide |GL2|"
            );
        }
    }

    #[test]
    fn same_orbit_m_agrees_with_bfs_membership_on_z9() {
        let r = z9();
        let caps = Caps::default();
        // assign an orbit id to every (a,b) via BFS, then compare
        let mut orbit_id: std::collections::HashMap<(Element, Element), usize> =
            std::collections::HashMap::new();
        let mut next_id = 0usize;
        for a in r.elements() {
            for b in r.elements() {
                if orbit_id.contains_key(&(a, b)) {
                    continue;
                }
                let orbit = brute_orbit_of(&r, Mat2::m_of(&r, a, b), &caps).unwrap();
                for idx in orbit.iter() {
                    let m = decode_mat(&r, idx);
                    if m.row(1) == (r.zero(), r.zero()) {
                        orbit_id.insert(m.row(0), next_id);
                    }
                }
                next_id += 1;
            }
        }
        for a in r.elements() {
            for b in r.elements() {
                for a2 in r.elements() {
                    for b2 in r.elements() {
                        assert_eq!(
                            same_orbit_m(&r, a, b, a2, b2),
                            orbit_id[&(a, b)] == orbit_id[&(a2, b2)],
                            "(a,b)=({a:?},{b:?}) vs ({a2:?},{b2:?})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn same_orbit_m_agrees_with_bfs_exhaustively_on_f3() {
        let r = f3();
        let caps = Caps::default();
        let pairs: Vec<(Element, Element)> = r
            .elements()
            .flat_map(|a| r.elements().map(move |b| (a, b)))
            .collect();
        for &(a, b) in &pairs {
            let orbit = brute_orbit_of(&r, Mat2::m_of(&r, a, b), &caps).unwrap();
            for &(a2, b2) in &pairs {
                let member = orbit.contains(encode_mat(&r, &Mat2::m_of(&r, a2, b2)));
                assert_eq!(same_orbit_m(&r, a, b, a2, b2), member);
            }
        }
    }

    #[test]
    fn same_orbit_m_agrees_with_bfs_sampled_on_z27() {
        let r = ChainRing::parse("zpn:p=3,n=3").unwrap();
        let caps = Caps::default();
        // deterministic sample of base pairs; check membership of every
        // canonical pair against the valuation test
        let sample: Vec<(Element, Element)> = (0..27u64)
            .flat_map(|a| [(a, (5 * a + 1) % 27), (a, (7 * a + 9) % 27)])
            .map(|(a, b)| (r.element(a), r.element(b)))
            .collect();
        for &(a, b) in &sample {
            let orbit = brute_orbit_of(&r, Mat2::m_of(&r, a, b), &caps).unwrap();
            for a2 in r.elements() {
                for b2 in r.elements() {
                    let member = orbit.contains(encode_mat(&r, &Mat2::m_of(&r, a2, b2)));
                    assert_eq!(
                        same_orbit_m(&r, a, b, a2, b2),
                        member,
                        "({a:?},{b:?}) vs ({a2:?},{b2:?})"
                    );
                }
            }
        }
    }

    #[test]
    fn distinct_labels_have_disjoint_orbits_on_z9() {
        let r = z9();
        let caps = Caps::default();
        let labels = all_orbit_labels(&r);
        let orbits: Vec<DenseSet> = labels
            .iter()
            .map(|l| brute_orbit_of(&r, l.representative(&r), &caps).unwrap())
            .collect();
        for i in 0..labels.len() {
            for j in 0..i {
                let disjoint = orbits[i].iter().all(|idx| !orbits[j].contains(idx));
                assert!(
                    disjoint,
                    "labels {} and {} overlap",
                    labels[i].format(&r),
                    labels[j].format(&r)
                );
            }
        }
        // the orbits plus the identity partition the product set
        let total: u64 = orbits.iter().map(|o| o.len()).sum();
        let census = brute_products_census(&r, Target::M2, 6, &caps).unwrap();
        assert_eq!(total + 1, census.members.len());
    }

    #[test]
    fn z9_orbit_of_3_1_contains_3_4_but_not_3_0() {
        let r = z9();
        let caps = Caps::default();
        let orbit = brute_orbit_of(&r, Mat2::m_of(&r, r.element(3), r.element(1)), &caps).unwrap();
        let m34 = encode_mat(&r, &Mat2::m_of(&r, r.element(3), r.element(4)));
        let m30 = encode_mat(&r, &Mat2::m_of(&r, r.element(3), r.element(0)));
        assert!(orbit.contains(m34));
        assert!(!orbit.contains(m30));
    }

    #[test]
    fn power_label_requires_k_below_valuation() {
        let r = z9();
        for label in all_orbit_labels(&r) {
            if let BClass::Power(k) = label.bclass {
                assert!(k < r.valuation(label.a));
            }
        }
    }

    #[test]
    fn z9_report_verdicts() {
        let r = z9();
        let report = run_verification(&r, Target::H, 6, &Caps::default()).unwrap();
        assert_eq!(report.counts.products_brute, "898");
        assert_eq!(report.counts.products_closed_form, "898");
        assert_eq!(report.counts.closure_stable_at_r, "2");
        assert_eq!(report.counts.idempotents_brute, "110");
        assert_eq!(report.verdicts.idempotents.verdict, "UNIQUE:alt");
        // all three product hypotheses coincide at n = 2
        assert_eq!(report.verdicts.products.verdict, "CONFLICT:MULTIPLE");
        assert_eq!(
            report.verdicts.products.matching,
            vec!["closed_form", "orbitsum_statement", "orbitsum_proof"]
        );
        assert_eq!(report.verdicts.orbit_sizes.verdict, "CONFLICT:MULTIPLE");
        assert_eq!(report.example_reading.nonunits, "2673");
        assert_eq!(report.example_reading.products_excluding_identity, "897");
        assert_eq!(report.counts.gl2_brute.as_deref(), Some("3888"));
    }

    #[test]
    fn z4_report_is_local() {
        let r = ChainRing::parse("zpn:p=2,n=2").unwrap();
        let report = run_verification(&r, Target::H, 6, &Caps::default()).unwrap();
        assert_eq!(report.counts.products_brute, "2");
        assert_eq!(report.counts.products_closed_form, "2");
        assert_eq!(report.counts.idempotents_brute, "2");
        assert_eq!(report.verdicts.idempotents.matching, vec!["paper", "alt"]);
    }

    #[test]
    fn report_json_is_deterministic_and_parseable() {
        let r = f3();
        let a = run_verification(&r, Target::M2, 6, &Caps::default()).unwrap();
        let b = run_verification(&r, Target::M2, 6, &Caps::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let parsed: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(parsed["counts"]["idempotents_brute"], "14");
        assert_eq!(parsed["counts"]["idempotents_formula_paper"], "26");
        assert_eq!(parsed["counts"]["idempotents_formula_alt"], "14");
        assert_eq!(parsed["counts"]["products_brute"], "34");
        assert_eq!(parsed["verdicts"]["idempotents"]["verdict"], "UNIQUE:alt");
        assert!(a.to_csv().contains("count,products_brute,34"));
    }
}
