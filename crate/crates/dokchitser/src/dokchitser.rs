//! Dokchitser constants by the pairing definition and by the injection
//! definition, plus the trivial-prime certificate and the dihedral `I` invariant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{factor_rat, format_factored, format_rat, prime_divisors};
use crate::burnside::Relation;
use crate::error::{Error, Result};
use crate::group::{CosetSpace, Group};
use crate::lattice::{averaged_pairing, gram_determinant, InvariantPairing, ZGLattice};
use crate::linalg::{det_int, det_rat, IntMatrix, LatticeCoordinates, RatMatrix};

/// Draws allowed to [`find_injection`] by default.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Pairing,
    Injection,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pairing => "pairing",
            Method::Injection => "injection",
        })
    }
}

/// An exact Dokchitser constant together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct DokchitserConstant {
    pub value: BigRational,
    pub method: Method,
}

impl DokchitserConstant {
    /// Prime factorisation of the absolute value.
    pub fn factored(&self) -> BTreeMap<u64, i64> {
        factor_rat(&self.value)
    }

    pub fn to_json(&self, relation: &str, lattice: &str) -> Value {
        let factored: serde_json::Map<String, Value> =
            self.factored().into_iter().map(|(p, e)| (p.to_string(), Value::from(e))).collect();
        json!({
            "relation": relation,
            "lattice": lattice,
            "value": format_rat(&self.value),
            "factored": factored,
            "method": self.method.to_string(),
        })
    }
}

impl fmt::Display for DokchitserConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", format_rat(&self.value), format_factored(&self.factored()))
    }
}

/// `prod_H det((1/|H|) <,> | L^H)^{n_H}` with the averaged identity pairing by default.
pub fn dok_pairing(
    lattice: &ZGLattice,
    theta: &Relation,
    pairing: Option<&InvariantPairing>,
) -> Result<DokchitserConstant> {
    let g = lattice.group();
    if **g != **theta.group() {
        return Err(Error::GroupMismatch("relation and lattice live on different groups".into()));
    }
    let owned;
    let pairing = match pairing {
        Some(p) => {
            if p.gram.rows() != lattice.rank() {
                return Err(Error::Shape("pairing does not match the lattice rank".into()));
            }
            p
        }
        None => {
            owned = averaged_pairing::<ChaCha8Rng>(lattice, None);
            &owned
        }
    };
    let mut value = BigRational::one();
    for (i, &c) in theta.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = g.subgroup_class(i);
        let basis = lattice.fixed_sublattice(&h.representative);
        let scale = BigRational::new(BigInt::one(), BigInt::from(h.order));
        let d = gram_determinant(pairing, &basis, &scale);
        assert!(!d.is_zero(), "pairing degenerates on a fixed sublattice");
        let d = if c > 0 { d } else { d.recip() };
        for _ in 0..c.unsigned_abs() {
            value *= &d;
        }
    }
    Ok(DokchitserConstant { value, method: Method::Pairing })
}

/// Disjoint union of coset spaces `G/H` for a list of subgroup classes.
#[derive(Clone, Debug)]
pub struct GSet {
    /// Subgroup class of each orbit.
    pub classes: Vec<usize>,
    cosets: Vec<CosetSpace>,
    offsets: Vec<usize>,
    size: usize,
}

impl GSet {
    pub fn new(group: &Group, classes: Vec<usize>) -> Self {
        let cosets: Vec<CosetSpace> =
            classes.iter().map(|&c| CosetSpace::new(group, &group.subgroup_class(c).representative)).collect();
        let mut offsets = Vec::new();
        let mut size = 0;
        for c in &cosets {
            offsets.push(size);
            size += c.len();
        }
        GSet { classes, cosets, offsets, size }
    }

    /// `S1` (positive coefficients) and `S2` (negative), with multiplicity.
    pub fn pair_for(theta: &Relation) -> (GSet, GSet) {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (i, &c) in theta.coeffs().iter().enumerate() {
            let target = if c > 0 { &mut pos } else { &mut neg };
            for _ in 0..c.unsigned_abs() {
                target.push(i);
            }
        }
        let g = theta.group();
        (GSet::new(g, pos), GSet::new(g, neg))
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Permutation matrix of `g` on `Z[S]` (column `k` maps to `e_{g k}`).
    pub fn permutation_matrix(&self, group: &Group, g: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.size, self.size);
        for (b, cs) in self.cosets.iter().enumerate() {
            for k in 0..cs.len() {
                m[(self.offsets[b] + cs.act(group, g, k), self.offsets[b] + k)] = BigInt::one();
            }
        }
        m
    }
}

/// What [`find_injection`] must achieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InjectionTarget {
    NonZero,
    CoprimeTo(u64),
}

/// A `G`-map `Z[S1] -> Z[S2]` with nonzero determinant, as an `|S2| x |S1|` matrix.
#[derive(Clone, Debug)]
pub struct InjectionPhi {
    pub relation: Relation,
    pub matrix: IntMatrix,
    pub determinant: BigInt,
}

impl InjectionPhi {
    /// Re-checks the `G`-map identity on generators and the stored determinant.
    pub fn verify(&self) -> bool {
        let g = self.relation.group();
        let (s1, s2) = GSet::pair_for(&self.relation);
        if self.matrix.rows() != s2.len() || self.matrix.cols() != s1.len() {
            return false;
        }
        let equivariant = g
            .generators()
            .iter()
            .all(|&x| &s2.permutation_matrix(g, x) * &self.matrix == &self.matrix * &s1.permutation_matrix(g, x));
        equivariant && !self.determinant.is_zero() && det_int(&self.matrix) == self.determinant
    }
}

/// Z-basis of `Hom_G(Z[S1], Z[S2])`: for each pair of orbits and each
/// `H_i`-orbit `O` on `G/H'_j`, the map `g H_i -> sum_{y in O} g y`.
pub fn hom_basis(group: &Group, s1: &GSet, s2: &GSet) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for (b1, cs1) in s1.cosets.iter().enumerate() {
        let h = &group.subgroup_class(s1.classes[b1]).representative;
        for (b2, cs2) in s2.cosets.iter().enumerate() {
            let mut seen = vec![false; cs2.len()];
            for start in 0..cs2.len() {
                if seen[start] {
                    continue;
                }
                let mut orbit: Vec<usize> = h.iter().map(|&x| cs2.act(group, x, start)).collect();
                orbit.sort_unstable();
                orbit.dedup();
                for &y in &orbit {
                    seen[y] = true;
                }
                let mut m = IntMatrix::zeros(s2.len(), s1.len());
                for k in 0..cs1.len() {
                    let gk = cs1.representatives[k];
                    for &y in &orbit {
                        m[(s2.offsets[b2] + cs2.act(group, gk, y), s1.offsets[b1] + k)] += 1;
                    }
                }
                out.push(m);
            }
        }
    }
    out
}

/// Random search for an injection with the requested determinant condition.
///
/// Coefficients are uniform in `[-r, r]` with `r = 3` doubling every 2000 draws.
pub fn find_injection(theta: &Relation, target: InjectionTarget, seed: u64, budget: usize) -> Result<InjectionPhi> {
    if theta.is_zero() {
        return Err(Error::Unsupported("the zero relation has nothing to embed".into()));
    }
    let g = theta.group();
    let (s1, s2) = GSet::pair_for(theta);
    if s1.len() != s2.len() {
        return Err(Error::NotARelation);
    }
    let basis = hom_basis(g, &s1, &s2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for draw in 0..budget {
        let r = 3i64 << (draw / 2000).min(20);
        let mut m = IntMatrix::zeros(s2.len(), s1.len());
        for e in &basis {
            let c = rng.random_range(-r..=r);
            if c != 0 {
                m = m.add(&e.scale(&BigInt::from(c)));
            }
        }
        let d = det_int(&m);
        let ok = match target {
            InjectionTarget::NonZero => !d.is_zero(),
            InjectionTarget::CoprimeTo(p) => !d.is_zero() && !(&d % BigInt::from(p)).is_zero(),
        };
        if ok {
            let phi = InjectionPhi { relation: theta.clone(), matrix: m, determinant: d };
            debug_assert!(phi.verify());
            return Ok(phi);
        }
    }
    Err(Error::BudgetExhausted(budget))
}

/// `det((phi^T)^*_G) / det(phi^*_G)` on `Hom_G(Z[S_i], L)`, identified with
/// `sum L^{H}` through evaluation at the identity coset of each orbit.
pub fn dok_injection(lattice: &ZGLattice, theta: &Relation, phi: Option<&InjectionPhi>) -> Result<DokchitserConstant> {
    let g = lattice.group();
    if **g != **theta.group() {
        return Err(Error::GroupMismatch("relation and lattice live on different groups".into()));
    }
    if theta.is_zero() {
        return Ok(DokchitserConstant { value: BigRational::one(), method: Method::Injection });
    }
    let found;
    let phi = match phi {
        Some(p) => {
            if p.relation != *theta || !p.verify() {
                return Err(Error::GroupMismatch("injection does not belong to this relation".into()));
            }
            p
        }
        None => {
            found = find_injection(theta, InjectionTarget::NonZero, 0, DEFAULT_BUDGET)?;
            &found
        }
    };
    let (s1, s2) = GSet::pair_for(theta);
    let fixed = |s: &GSet| -> Vec<IntMatrix> { s.classes.iter().map(|&c| lattice.fixed_sublattice_class(c)).collect() };
    let (f1, f2) = (fixed(&s1), fixed(&s2));
    let coords1: Vec<LatticeCoordinates> = f1.iter().map(LatticeCoordinates::new).collect();
    let coords2: Vec<LatticeCoordinates> = f2.iter().map(LatticeCoordinates::new).collect();
    let dim1: usize = f1.iter().map(|b| b.cols()).sum();
    let dim2: usize = f2.iter().map(|b| b.cols()).sum();
    if dim1 != dim2 {
        return Err(Error::NotARelation);
    }
    let m = &phi.matrix;

    // phi^*: f' -> f' o phi, evaluated at the identity coset of each S1 orbit
    let pull = induced_matrix(lattice, &s2, &f2, &s1, &coords1, |target_point, source_point| {
        m[(source_point, target_point)].clone()
    });
    // (phi^T)^*: f -> f o phi^T, evaluated at the identity coset of each S2 orbit
    let push = induced_matrix(lattice, &s1, &f1, &s2, &coords2, |target_point, source_point| {
        m[(target_point, source_point)].clone()
    });
    let d_pull = det_rat(&pull);
    let d_push = det_rat(&push);
    assert!(!d_pull.is_zero(), "phi^* is singular for a valid injection");
    Ok(DokchitserConstant { value: d_push / d_pull, method: Method::Injection })
}

/// Matrix of `f -> f o psi` from `Hom_G(Z[from], L)` to `Hom_G(Z[to], L)`, where
/// `weight(t, s)` is the coefficient of point `s` of `from` in `psi(t)` for a
/// point `t` of `to`.
fn induced_matrix(
    lattice: &ZGLattice,
    from: &GSet,
    from_bases: &[IntMatrix],
    to: &GSet,
    to_coords: &[LatticeCoordinates],
    weight: impl Fn(usize, usize) -> BigInt,
) -> RatMatrix {
    let to_dim: usize = to_coords.iter().map(LatticeCoordinates::dim).sum();
    let from_dim: usize = from_bases.iter().map(|b| b.cols()).sum();
    let mut out = RatMatrix::zeros(to_dim, from_dim);
    let mut col = 0;
    for (fb, basis) in from_bases.iter().enumerate() {
        let cs = &from.cosets[fb];
        for k in 0..basis.cols() {
            let gamma = basis.column(k);
            // f(g x0) = g . gamma on orbit fb, zero elsewhere
            let mut row = 0;
            for (tb, tc) in to_coords.iter().enumerate() {
                let t0 = to.offsets[tb];
                let mut v = vec![BigInt::zero(); lattice.rank()];
                for s in 0..cs.len() {
                    let w = weight(t0, from.offsets[fb] + s);
                    if w.is_zero() {
                        continue;
                    }
                    let image = lattice.action(cs.representatives[s]).mul_vec(&gamma);
                    for (vi, x) in v.iter_mut().zip(image) {
                        *vi += &w * x;
                    }
                }
                let c = tc.coords(&v).expect("image of a G-map lands in the fixed sublattice");
                for (i, x) in c.into_iter().enumerate() {
                    out[(row + i, col)] = BigRational::from_integer(x);
                }
                row += tc.dim();
            }
            col += 1;
        }
    }
    out
}

/// Primes `p` for which some normal `N` has cyclic `G/N` and `p` coprime to `|N|`.
#[derive(Clone, Debug)]
pub struct TrivialPrimeCertificate {
    pub group: Arc<Group>,
    /// Witness `N` (sorted elements) per certified prime up to `|G|`.
    pub witnesses: BTreeMap<u64, Vec<usize>>,
    /// Primes up to `|G|` with no witness.
    pub uncertified: Vec<u64>,
}

impl TrivialPrimeCertificate {
    /// Every prime above `|G|` is certified by `N = G`, so only small primes can fail.
    pub fn is_certified(&self, p: u64) -> bool {
        p > self.group.order() as u64 || self.witnesses.contains_key(&p)
    }

    /// Re-checks each witness from scratch.
    pub fn verify(&self) -> bool {
        let g = &self.group;
        self.witnesses
            .iter()
            .all(|(&p, n)| g.is_normal(n) && g.closure(n) == *n && has_cyclic_quotient(g, n) && n.len() as u64 % p != 0)
    }
}

fn has_cyclic_quotient(g: &Group, n: &[usize]) -> bool {
    let index = g.order() / n.len();
    (0..g.order()).any(|x| {
        let (mut y, mut k) = (x, 1);
        while n.binary_search(&y).is_err() {
            y = g.mul(y, x);
            k += 1;
        }
        k == index
    })
}

pub fn trivial_prime_certificate(group: &Arc<Group>) -> TrivialPrimeCertificate {
    let normals: Vec<&Vec<usize>> = group
        .subgroup_classes()
        .iter()
        .filter(|c| c.is_normal() && has_cyclic_quotient(group, &c.representative))
        .map(|c| &c.representative)
        .collect();
    let mut witnesses = BTreeMap::new();
    let mut uncertified = Vec::new();
    for p in (2..=group.order() as u64).filter(|&p| crate::arith::is_prime(p)) {
        // smallest witness first (the list is sorted by order)
        match normals.iter().rev().find(|n| n.len() as u64 % p != 0) {
            Some(n) => {
                witnesses.insert(p, (*n).clone());
            }
            None => uncertified.push(p),
        }
    }
    TrivialPrimeCertificate { group: group.clone(), witnesses, uncertified }
}

/// The three proper fixed-point subgroups `<a>`, `<ab>` and `<b>` of `D2q:p`.
pub fn d2p_fixed_subgroups(group: &Group) -> Result<Vec<Vec<usize>>> {
    let p = group
        .dihedral_q()
        .filter(|&p| p > 2 && crate::arith::is_prime(p as u64))
        .ok_or_else(|| Error::Unsupported("needs D_2p with p an odd prime".into()))?;
    Ok(vec![vec![0, p], vec![0, p + 1], (0..p).collect()])
}

/// `I(L) = C(L) [L : L^{C2} + L^{C2'} + L^{Cp}]^2` for the standard relation.
pub fn i_invariant(lattice: &ZGLattice, theta: &Relation) -> Result<BigRational> {
    let subs = d2p_fixed_subgroups(lattice.group())?;
    let p = lattice.group().dihedral_q().expect("dihedral") as u64;
    let standard = crate::zoo::standard_relation_on(lattice.group(), p)?;
    if *theta != standard {
        return Err(Error::Unsupported("the I invariant is defined for the standard relation".into()));
    }
    let c = dok_pairing(lattice, theta, None)?.value;
    let idx = lattice.sum_of_fixed_index(&subs).finite().cloned().expect("fixed spaces of C2, C2' and Cp span L (x) Q");
    Ok(c * BigRational::from_integer(&idx * &idx))
}

/// Primes dividing the group order, the only possible support of constants.
pub fn possible_primes(group: &Group) -> Vec<u64> {
    prime_divisors(group.order() as u64)
}
