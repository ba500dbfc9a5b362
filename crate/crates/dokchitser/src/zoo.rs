//! The dihedral groups `D_2p`: explicit lattices from the classification, the
//! standard relation, the tables of constants and indices, and the search for
//! the two extension genera that have no closed-form construction here.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::arith::{format_rat, is_prime, pow_rat};
use crate::burnside::{BurnsideElement, Relation};
use crate::dokchitser::{d2p_fixed_subgroups, dok_pairing, i_invariant};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::lattice::{gram_determinant, InvariantPairing, ZGLattice};
use crate::linalg::{kernel, IntMatrix};
use crate::sampling::overlattices_mod_p;

/// Largest prime the zoo accepts.
pub const MAX_P: u64 = 13;

/// The eight constructible principal-genus lattices, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZooName {
    Triv,
    Eps,
    Rho,
    A,
    Aprime,
    ExtAprime1,
    ExtAEps,
    Regular,
}

impl ZooName {
    pub const ALL: [ZooName; 8] = [
        ZooName::Triv,
        ZooName::Eps,
        ZooName::Rho,
        ZooName::A,
        ZooName::Aprime,
        ZooName::ExtAprime1,
        ZooName::ExtAEps,
        ZooName::Regular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ZooName::Triv => "triv",
            ZooName::Eps => "eps",
            ZooName::Rho => "rho",
            ZooName::A => "A",
            ZooName::Aprime => "Aprime",
            ZooName::ExtAprime1 => "ext_Aprime_1",
            ZooName::ExtAEps => "ext_A_eps",
            ZooName::Regular => "regular",
        }
    }

    /// Name in the classification's notation.
    pub fn symbol(self) -> &'static str {
        match self {
            ZooName::Triv => "1",
            ZooName::Eps => "ε",
            ZooName::Rho => "ρ",
            ZooName::A => "A",
            ZooName::Aprime => "A′",
            ZooName::ExtAprime1 => "(A′,1)",
            ZooName::ExtAEps => "(A,ε)",
            ZooName::Regular => "Z[G]",
        }
    }

    /// Exponent `k` with constant `p^k`.
    pub fn constant_exponent(self) -> i64 {
        match self {
            ZooName::Triv | ZooName::Aprime => -1,
            ZooName::Eps | ZooName::A => 1,
            _ => 0,
        }
    }

    /// Whether `[L : L^C2 + L^C2' + L^Cp]` is `p` (otherwise 1).
    pub fn index_is_p(self) -> bool {
        matches!(self, ZooName::Aprime | ZooName::ExtAEps | ZooName::Regular)
    }

    pub fn expected_constant(self, p: u64) -> BigRational {
        pow_rat(p, self.constant_exponent())
    }

    pub fn expected_index(self, p: u64) -> BigInt {
        BigInt::from(if self.index_is_p() { p } else { 1 })
    }
}

impl fmt::Display for ZooName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZooName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ZooName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| Error::UnknownLattice(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub name: ZooName,
    pub lattice: ZGLattice,
    pub expected_constant: BigRational,
    pub expected_index: BigInt,
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > MAX_P {
        return Err(Error::Unsupported(format!("p = {p} exceeds the zoo bound {MAX_P}")));
    }
    Ok(())
}

/// `D2q:p` after validating `p`.
pub fn d2p(p: u64) -> Result<Arc<Group>> {
    check_p(p)?;
    Group::dihedral(p as usize)
}

/// `1 - 2*C2 - Cp + 2*G` on `D2q:p`.
pub fn standard_relation(p: u64) -> Result<Relation> {
    standard_relation_on(&d2p(p)?, p)
}

/// The standard relation on an existing copy of `D2q:p`.
pub fn standard_relation_on(group: &Arc<Group>, p: u64) -> Result<Relation> {
    if p < 3 || !is_prime(p) || group.dihedral_q() != Some(p as usize) {
        return Err(Error::Unsupported("the standard relation needs D2q:p with p an odd prime".into()));
    }
    let cp = format!("C{p}");
    Relation::new(BurnsideElement::from_labels(group, &[("1", 1), ("C2", -2), (cp.as_str(), -1), ("G", 2)])?)
}

/// The span `<e_0 - e_i>` inside a rank-`p` lattice.
fn augmentation_span(p: usize) -> IntMatrix {
    IntMatrix::from_fn(p, p - 1, |r, c| {
        if r == 0 {
            BigInt::one()
        } else if r == c + 1 {
            -BigInt::one()
        } else {
            BigInt::from(0)
        }
    })
}

/// `Z[G/C2]` with basis `b^i C2`; `a` sends `e_i` to `e_{-i}`.
pub fn z_g_mod_c2(group: &Arc<Group>) -> ZGLattice {
    let c2 = group.subgroup_class(group.class_index("C2").expect("dihedral has C2")).representative.clone();
    ZGLattice::permutation(group, &c2)
}

/// Builds a zoo lattice on an existing copy of `D2q:p`.
pub fn zoo_lattice_on(group: &Arc<Group>, name: ZooName) -> Result<ZGLattice> {
    let p = group.dihedral_q().ok_or_else(|| Error::Unsupported("zoo lattices live on D2q:p".into()))?;
    let zc2 = z_g_mod_c2(group);
    Ok(match name {
        ZooName::Triv => ZGLattice::trivial(group),
        ZooName::Eps => ZGLattice::sign(group)?,
        ZooName::Rho => ZGLattice::permutation(group, &(0..p).collect::<Vec<_>>()),
        ZooName::A => zc2.twist_sign()?.span_sublattice(&augmentation_span(p))?,
        ZooName::Aprime => zc2.span_sublattice(&augmentation_span(p))?,
        ZooName::ExtAprime1 => zc2,
        ZooName::ExtAEps => zc2.twist_sign()?,
        ZooName::Regular => ZGLattice::regular(group),
    })
}

pub fn zoo_lattice(p: u64, name: ZooName) -> Result<ZooEntry> {
    let g = d2p(p)?;
    Ok(ZooEntry {
        name,
        lattice: zoo_lattice_on(&g, name)?,
        expected_constant: name.expected_constant(p),
        expected_index: name.expected_index(p),
    })
}

/// `A′` from the explicit cyclotomic matrices of `a` and `b` acting on
/// `(ζ̄ - ζ){1, ζ, ..., ζ^{p-2}}`.
pub fn a_prime_cyclotomic(group: &Arc<Group>) -> Result<ZGLattice> {
    let p = group.dihedral_q().ok_or_else(|| Error::Unsupported("needs D2q:p".into()))?;
    let n = p - 1;
    let a = IntMatrix::from_fn(n, n, |r, c| {
        let v = match (r, c) {
            (0, 0) => -1,
            (_, 1) => 1,
            (r, c) if r >= 2 && c == p - r => -1,
            _ => 0,
        };
        BigInt::from(v)
    });
    let b = IntMatrix::from_fn(n, n, |r, c| {
        BigInt::from(if c == n - 1 {
            -1
        } else if r == c + 1 {
            1
        } else {
            0
        })
    });
    ZGLattice::from_generators(group, vec![a, b])
}

/// Gram determinants of the standard pairing of `Z[G/C2]` on `A′^1` and
/// on `A′^{C2}` (unscaled), computed in ambient coordinates.
pub fn a_prime_gram_determinants(p: u64) -> Result<(BigRational, BigRational)> {
    let g = d2p(p)?;
    let zc2 = z_g_mod_c2(&g);
    let (aprime, basis) = zc2.span_sublattice_with_basis(&augmentation_span(p as usize))?;
    let standard = InvariantPairing { gram: IntMatrix::identity(p as usize).to_rational() };
    let c2 = g.subgroup_class(g.class_index("C2").expect("C2")).representative.clone();
    let fixed = &basis * &aprime.fixed_sublattice(&c2);
    let one = BigRational::one();
    Ok((gram_determinant(&standard, &basis, &one), gram_determinant(&standard, &fixed, &one)))
}

/// One row of the constant and index tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ZooRow {
    pub name: String,
    pub symbol: String,
    pub constant: BigRational,
    pub index: Option<BigInt>,
    pub i_invariant: Option<BigRational>,
    /// `ok` for computed rows, `expected` for rows certified by extension search.
    pub status: &'static str,
}

/// Computes constant, fixed-sum index and `I` for the eight constructible
/// lattices, checks them against the expected tables, and appends the two
/// predicted extension rows.
pub fn zoo_table(p: u64) -> Result<Vec<ZooRow>> {
    let g = d2p(p)?;
    let theta = standard_relation_on(&g, p)?;
    let subs = d2p_fixed_subgroups(&g)?;
    let rows: Vec<Result<ZooRow>> = ZooName::ALL
        .par_iter()
        .map(|&name| {
            let l = zoo_lattice_on(&g, name)?;
            let c = dok_pairing(&l, &theta, None)?.value;
            let idx = l
                .sum_of_fixed_index(&subs)
                .finite()
                .cloned()
                .ok_or_else(|| Error::TableMismatch(format!("{name}: fixed sublattices do not have full rank")))?;
            let i = i_invariant(&l, &theta)?;
            if c != name.expected_constant(p) {
                return Err(Error::TableMismatch(format!(
                    "{name}: constant {} but the table says {}",
                    format_rat(&c),
                    format_rat(&name.expected_constant(p))
                )));
            }
            if idx != name.expected_index(p) {
                return Err(Error::TableMismatch(format!(
                    "{name}: index {idx} but the table says {}",
                    name.expected_index(p)
                )));
            }
            let (m1, me, mt) = l.rational_multiplicities_d2p()?;
            let predicted = pow_rat(p, me as i64 + mt as i64 - m1 as i64);
            if i != predicted {
                return Err(Error::TableMismatch(format!(
                    "{name}: I = {} but p^(me+mt-m1) = {}",
                    format_rat(&i),
                    format_rat(&predicted)
                )));
            }
            Ok(ZooRow {
                name: name.as_str().into(),
                symbol: name.symbol().into(),
                constant: c,
                index: Some(idx),
                i_invariant: Some(i),
                status: "ok",
            })
        })
        .collect();
    let mut out = rows.into_iter().collect::<Result<Vec<_>>>()?;
    for (name, symbol, k) in [("ext_A_rho", "(A,ρ)", -1), ("ext_Aprime_rho", "(A′,ρ)", 1)] {
        out.push(ZooRow {
            name: name.into(),
            symbol: symbol.into(),
            constant: pow_rat(p, k),
            index: None,
            i_invariant: None,
            status: "expected",
        });
    }
    Ok(out)
}

/// An overlattice found by [`extension_search`].
#[derive(Clone, Debug)]
pub struct ExtensionWitness {
    /// `A+rho` or `Aprime+rho`.
    pub base: &'static str,
    pub lattice: ZGLattice,
    pub constant: BigRational,
    pub index: BigInt,
    pub i_invariant: BigRational,
    /// `[M : base]`, a power of `p`.
    pub overlattice_index: u64,
    pub multiplicities: (usize, usize, usize),
}

#[derive(Clone, Debug)]
pub struct ExtensionSearch {
    pub p: u64,
    /// Constants of the split lattices `A ⊕ ρ` and `A′ ⊕ ρ`.
    pub split_constants: (BigRational, BigRational),
    /// Number of stable overlattices enumerated over each base.
    pub enumerated: (usize, usize),
    /// First witness (in enumeration order) with constant `1/p` over `A ⊕ ρ`.
    pub a_rho: ExtensionWitness,
    /// First witness with constant `p` over `A′ ⊕ ρ`.
    pub a_prime_rho: ExtensionWitness,
}

/// Whether the `χ`-isotypic line (`χ` trivial or sign) splits off `l ⊗ Z_p`
/// as a direct summand. Needs that line to have rank one: with `v` spanning
/// `{x : gx = χ(g)x}` and `f` the primitive functional with `f∘g = χ(g)f`,
/// it splits off exactly when `p` does not divide `f(v)`.
pub fn line_splits_off(l: &ZGLattice, sign: bool, p: u64) -> Result<bool> {
    let g = l.group();
    let n = l.rank();
    let chi = ZGLattice::sign(g)?;
    let mut fixed = IntMatrix::zeros(0, n);
    let mut dual = IntMatrix::zeros(0, n);
    for x in 0..g.order() {
        let c = if sign { chi.action(x)[(0, 0)].clone() } else { BigInt::one() };
        let twist = IntMatrix::identity(n).scale(&c);
        fixed = fixed.vstack(&l.action(x).sub(&twist));
        dual = dual.vstack(&l.action(x).transpose().sub(&twist));
    }
    let (v, f) = (kernel(&fixed), kernel(&dual));
    if v.cols() != 1 || f.cols() != 1 {
        return Err(Error::Unsupported("the isotypic line must have rank one".into()));
    }
    let pairing: BigInt = v.column(0).iter().zip(f.column(0)).map(|(a, b)| a * b).sum();
    Ok(&pairing % BigInt::from(p) != BigInt::from(0))
}

/// Enumerates all stable overlattices between `L` and `(1/p)L` for
/// `L = A ⊕ ρ` and `L = A′ ⊕ ρ`, and picks witnesses for the two extension rows.
pub fn extension_search(p: u64) -> Result<ExtensionSearch> {
    if p != 3 && p != 5 {
        return Err(Error::Unsupported("extension search is run for p = 3 and p = 5".into()));
    }
    let g = d2p(p)?;
    let theta = standard_relation_on(&g, p)?;
    let rho = zoo_lattice_on(&g, ZooName::Rho)?;
    let a_rho = zoo_lattice_on(&g, ZooName::A)?.direct_sum(&rho)?;
    let ap_rho = zoo_lattice_on(&g, ZooName::Aprime)?.direct_sum(&rho)?;
    let split = (dok_pairing(&a_rho, &theta, None)?.value, dok_pairing(&ap_rho, &theta, None)?.value);

    // (A,ρ) ≅ 1 ⊕ (A,ε) and (A′,ρ) ≅ ε ⊕ (A′,1) over Z_p, so a witness must
    // keep the named line glued to A or A′; split lattices share the constant.
    let search = |base: &ZGLattice,
                  label: &'static str,
                  target: BigRational,
                  glued_sign: bool|
     -> Result<(usize, ExtensionWitness)> {
        let candidates = overlattices_mod_p(base, p)?;
        let n = candidates.len();
        let found: Vec<Option<ExtensionWitness>> = candidates
            .into_par_iter()
            .map(|(m, over)| -> Result<Option<ExtensionWitness>> {
                let c = dok_pairing(&m, &theta, None)?.value;
                if c != target || line_splits_off(&m, glued_sign, p)? {
                    return Ok(None);
                }
                let index =
                    m.sum_of_fixed_index(&d2p_fixed_subgroups(&g)?).finite().cloned().expect("full rank for D_2p");
                let i = i_invariant(&m, &theta)?;
                let mult = m.rational_multiplicities_d2p()?;
                Ok(Some(ExtensionWitness {
                    base: label,
                    lattice: m,
                    constant: c,
                    index,
                    i_invariant: i,
                    overlattice_index: over,
                    multiplicities: mult,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        let w = found.into_iter().flatten().next().ok_or_else(|| {
            Error::NoWitness(format!("no non-split overlattice of {label} has constant {}", format_rat(&target)))
        })?;
        let (m1, me, mt) = w.multiplicities;
        if w.i_invariant != pow_rat(p, me as i64 + mt as i64 - m1 as i64) {
            return Err(Error::NoWitness(format!("{label} witness fails the I identity")));
        }
        Ok((n, w))
    };
    let (n1, w1) = search(&a_rho, "A+rho", pow_rat(p, -1), true)?;
    let (n2, w2) = search(&ap_rho, "Aprime+rho", pow_rat(p, 1), false)?;
    Ok(ExtensionSearch { p, split_constants: split, enumerated: (n1, n2), a_rho: w1, a_prime_rho: w2 })
}

/// Generator matrices of a lattice, for display.
pub fn describe(l: &ZGLattice) -> String {
    l.generator_matrices().iter().map(|m| format!("{m:?}")).collect::<Vec<_>>().join(", ")
}
