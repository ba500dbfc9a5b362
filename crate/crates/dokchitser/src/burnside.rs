//! Burnside-ring elements over subgroup classes, relations between permutation
//! representations, and their transport along restriction, induction and
//! inflation.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{Map, Value};

use crate::dokchitser::{find_injection, InjectionPhi, InjectionTarget};
use crate::error::{Error, Result};
use crate::group::{Embedding, Group, Quotient};
use crate::linalg::{hnf_rows, kernel, IntMatrix, Matrix};

/// Integer combination `sum n_H [G/H]` over subgroup classes, indexed as
/// [`Group::subgroup_classes`].
#[derive(Clone, Debug, PartialEq)]
pub struct BurnsideElement {
    group: Arc<Group>,
    coeffs: Vec<i64>,
}

impl BurnsideElement {
    pub fn new(group: &Arc<Group>, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != group.subgroup_classes().len() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} subgroup classes",
                coeffs.len(),
                group.subgroup_classes().len()
            )));
        }
        Ok(BurnsideElement { group: group.clone(), coeffs })
    }

    pub fn zero(group: &Arc<Group>) -> Self {
        BurnsideElement { group: group.clone(), coeffs: vec![0; group.subgroup_classes().len()] }
    }

    /// Builds an element from `(label, coefficient)` pairs; repeated labels add up.
    pub fn from_labels(group: &Arc<Group>, terms: &[(&str, i64)]) -> Result<Self> {
        let mut e = Self::zero(group);
        for (label, c) in terms {
            let i = group
                .class_index(label)
                .ok_or_else(|| Error::GroupMismatch(format!("no subgroup class labelled `{label}`")))?;
            e.coeffs[i] += c;
        }
        Ok(e)
    }

    /// Parses the notation used by `Display`, e.g. `1 - 2*C2 - C3 + 2*G`.
    pub fn parse(group: &Arc<Group>, text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Shape(format!("cannot parse `{text}`: {why}"));
        let spaced = text.replace('+', " + ").replace('-', " - ");
        let mut terms: Vec<(String, i64)> = Vec::new();
        let mut sign = 1i64;
        let mut expect_term = true;
        let mut after_op = false;
        for tok in spaced.split_whitespace() {
            match tok {
                "+" | "-" => {
                    if after_op {
                        return Err(bad("consecutive operators"));
                    }
                    after_op = true;
                    expect_term = true;
                    sign = if tok == "-" { -1 } else { 1 };
                }
                _ => {
                    if !expect_term {
                        return Err(bad("missing operator between terms"));
                    }
                    after_op = false;
                    let (c, label) = match tok.split_once('*') {
                        Some((c, l)) => (c.parse::<i64>().map_err(|_| bad("bad coefficient"))?, l),
                        None => (1, tok),
                    };
                    if tok == "0" {
                        expect_term = false;
                        continue;
                    }
                    terms.push((label.to_string(), sign * c));
                    sign = 1;
                    expect_term = false;
                }
            }
        }
        if expect_term {
            return Err(bad("dangling operator or empty input"));
        }
        let refs: Vec<(&str, i64)> = terms.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        Self::from_labels(group, &refs)
    }

    /// Parses a JSON map label → coefficient.
    pub fn from_json(group: &Arc<Group>, value: &Value) -> Result<Self> {
        let map = value.as_object().ok_or_else(|| Error::Shape("relation must be a JSON object".into()))?;
        let mut terms = Vec::new();
        for (k, v) in map {
            let c = v.as_i64().ok_or_else(|| Error::Shape(format!("coefficient of `{k}` is not an integer")))?;
            terms.push((k.as_str(), c));
        }
        Self::from_labels(group, &terms)
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, label: &str) -> Option<i64> {
        self.group.class_index(label).map(|i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch("adding elements of different Burnside rings".into()));
        }
        Ok(BurnsideElement {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, k: i64) -> Self {
        BurnsideElement { group: self.group.clone(), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Virtual permutation character, indexed by element conjugacy classes.
    pub fn character(&self) -> Vec<i64> {
        let mut chi = vec![0; self.group.conjugacy_classes().len()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                for (x, v) in chi.iter_mut().zip(permutation_character(&self.group, i)) {
                    *x += c * v;
                }
            }
        }
        chi
    }

    /// True iff the virtual permutation character vanishes.
    pub fn is_relation(&self) -> bool {
        self.character().iter().all(|&x| x == 0)
    }

    /// `sum n_H [G:H]`, the dimension of the virtual representation.
    pub fn degree(&self) -> i64 {
        let n = self.group.order() as i64;
        self.coeffs.iter().zip(self.group.subgroup_classes()).map(|(c, h)| c * (n / h.order as i64)).sum()
    }

    /// JSON map label → coefficient over every subgroup class.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (c, h) in self.coeffs.iter().zip(self.group.subgroup_classes()) {
            m.insert(h.label.clone(), Value::from(*c));
        }
        Value::Object(m)
    }
}

impl fmt::Display for BurnsideElement {
    /// Paper notation, e.g. `1 - 2*C2 - C3 + 2*G`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&c, h) in self.coeffs.iter().zip(self.group.subgroup_classes()) {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            if a == 1 {
                write!(f, "{}", h.label)?;
            } else {
                write!(f, "{a}*{}", h.label)?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A Burnside-ring element whose permutation character has been checked to vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    element: BurnsideElement,
}

impl Relation {
    pub fn new(element: BurnsideElement) -> Result<Self> {
        if element.is_relation() {
            Ok(Relation { element })
        } else {
            Err(Error::NotARelation)
        }
    }

    pub fn zero(group: &Arc<Group>) -> Self {
        Relation { element: BurnsideElement::zero(group) }
    }

    /// Parses `1 - 2*C2 - C3 + 2*G` style text and checks it is a relation.
    pub fn parse(group: &Arc<Group>, text: &str) -> Result<Self> {
        Relation::new(BurnsideElement::parse(group, text)?)
    }

    pub fn element(&self) -> &BurnsideElement {
        &self.element
    }

    pub fn group(&self) -> &Arc<Group> {
        self.element.group()
    }

    pub fn coeffs(&self) -> &[i64] {
        self.element.coeffs()
    }

    pub fn is_zero(&self) -> bool {
        self.element.is_zero()
    }

    pub fn add(&self, other: &Relation) -> Result<Relation> {
        Relation::new(self.element.add(&other.element)?)
    }

    pub fn scale(&self, k: i64) -> Relation {
        Relation { element: self.element.scale(k) }
    }

    pub fn to_json(&self) -> Value {
        self.element.to_json()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.element.fmt(f)
    }
}

/// Number of cosets `xH` fixed by each element class: `#{x : x^-1 g x in H} / |H|`.
pub fn permutation_character(group: &Group, class: usize) -> Vec<i64> {
    let h = &group.subgroup_class(class).representative;
    let mut member = vec![false; group.order()];
    for &x in h {
        member[x] = true;
    }
    group
        .conjugacy_classes()
        .iter()
        .map(|cls| {
            let g = cls[0];
            let hits = (0..group.order()).filter(|&x| member[group.mul(group.mul(group.inv(x), g), x)]).count();
            (hits / h.len()) as i64
        })
        .collect()
}

/// Table of marks style matrix: rows are subgroup classes, columns element classes.
pub fn character_table_of_permutations(group: &Group) -> IntMatrix {
    let rows: Vec<Vec<BigInt>> = (0..group.subgroup_classes().len())
        .map(|i| permutation_character(group, i).into_iter().map(BigInt::from).collect())
        .collect();
    Matrix::from_rows(rows, group.conjugacy_classes().len())
}

/// Saturated basis of the lattice of relations.
#[derive(Clone, Debug)]
pub struct RelationBasis {
    pub group: Arc<Group>,
    pub basis: Vec<Relation>,
    pub rank: usize,
}

/// Basis of all relations, in row Hermite normal form (first nonzero entry positive).
pub fn relation_lattice(group: &Arc<Group>) -> RelationBasis {
    let marks = character_table_of_permutations(group);
    let ker = kernel(&marks.transpose());
    let basis: Vec<Relation> = if ker.cols() == 0 {
        Vec::new()
    } else {
        let rows = hnf_rows(&ker.transpose());
        (0..rows.rows())
            .map(|i| {
                let coeffs = rows.row(i).iter().map(|x| x.to_i64().expect("small coefficient")).collect();
                Relation::new(BurnsideElement { group: group.clone(), coeffs }).expect("kernel vectors are relations")
            })
            .collect()
    };
    let rank = basis.len();
    RelationBasis { group: group.clone(), basis, rank }
}

/// Restriction along an embedding `H -> G` of a relation of `G` (Mackey formula).
pub fn restrict_along(theta: &Relation, emb: &Embedding) -> Result<Relation> {
    let g = theta.group();
    if **g != *emb.target {
        return Err(Error::GroupMismatch("relation does not live on the embedding's target".into()));
    }
    let h = &emb.source;
    let image: Vec<usize> = emb.image(&(0..h.order()).collect::<Vec<_>>());
    let mut out = BurnsideElement::zero(h);
    for (i, &c) in theta.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let hi = &g.subgroup_class(i).representative;
        for &x in &g.double_cosets(&image, hi).representatives {
            let conj = g.conjugate(hi, x);
            let meet: Vec<usize> = image.iter().copied().filter(|y| conj.binary_search(y).is_ok()).collect();
            let pre: Vec<usize> = meet.iter().map(|&y| emb.preimage_element(y).expect("in image")).collect();
            let k = h.class_of_subgroup(&pre).expect("intersection is a subgroup");
            out.coeffs[k] += c;
        }
    }
    let r = Relation::new(out);
    debug_assert!(r.is_ok(), "restriction of a relation must be a relation");
    r
}

/// Restriction to a subgroup given by its elements; also returns that subgroup
/// as a group in its own right together with its embedding.
pub fn restrict(theta: &Relation, subgroup: &[usize]) -> Result<(Relation, Embedding)> {
    let emb = subgroup_embedding(theta.group(), subgroup)?;
    Ok((restrict_along(theta, &emb)?, emb))
}

/// A subgroup as an abstract group (table on its sorted elements) plus the inclusion.
pub fn subgroup_embedding(g: &Arc<Group>, subgroup: &[usize]) -> Result<Embedding> {
    let mut elems = subgroup.to_vec();
    elems.sort_unstable();
    if g.closure(&elems) != elems {
        return Err(Error::GroupMismatch("element set is not a subgroup".into()));
    }
    let pos = |x: usize| elems.binary_search(&x).expect("closed");
    let table = elems.iter().map(|&x| elems.iter().map(|&y| pos(g.mul(x, y))).collect()).collect();
    let label = g.class_of_subgroup(&elems).map(|c| g.subgroup_class(c).label.clone()).unwrap_or_default();
    let h = Group::from_table(table, &format!("{}<{}", label, g.descriptor()))?;
    let images: Vec<usize> = h.generators().iter().map(|&x| elems[x]).collect();
    Embedding::from_generator_images(&h, g, &images)
}

/// Induction along an embedding `H -> G` of a relation of `H`.
pub fn induce(theta: &Relation, emb: &Embedding) -> Result<Relation> {
    if **theta.group() != *emb.source {
        return Err(Error::GroupMismatch("relation does not live on the embedding's source".into()));
    }
    let g = &emb.target;
    let mut out = BurnsideElement::zero(g);
    for (i, &c) in theta.coeffs().iter().enumerate() {
        if c != 0 {
            let img = emb.image(&theta.group().subgroup_class(i).representative);
            out.coeffs[g.class_of_subgroup(&img).expect("image is a subgroup")] += c;
        }
    }
    Relation::new(out)
}

/// Inflation of a relation of `G/N` to `G`.
pub fn inflate(theta: &Relation, quotient: &Quotient) -> Result<Relation> {
    if **theta.group() != *quotient.group {
        return Err(Error::GroupMismatch("relation does not live on the quotient".into()));
    }
    let corr = quotient.subgroup_correspondence();
    let mut out = BurnsideElement::zero(&quotient.source);
    for (i, &c) in theta.coeffs().iter().enumerate() {
        out.coeffs[corr[i]] += c;
    }
    Relation::new(out)
}

/// One-sided answer of the `Z_(p)`-relation search.
#[derive(Clone, Debug)]
pub enum ZpVerdict {
    /// An injection with cokernel order prime to `p` was found (none needed for 0).
    Yes(Option<InjectionPhi>),
    Unknown,
}

impl ZpVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, ZpVerdict::Yes(_))
    }
}

/// Searches for an injection `Z[S1] -> Z[S2]` with determinant prime to `p`.
pub fn is_zp_relation(theta: &Relation, p: u64, seed: u64, budget: usize) -> Result<ZpVerdict> {
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if theta.is_zero() {
        return Ok(ZpVerdict::Yes(None));
    }
    match find_injection(theta, InjectionTarget::CoprimeTo(p), seed, budget) {
        Ok(phi) => {
            debug_assert!(!phi.determinant.is_zero());
            Ok(ZpVerdict::Yes(Some(phi)))
        }
        Err(Error::BudgetExhausted(_)) => Ok(ZpVerdict::Unknown),
        Err(e) => Err(e),
    }
}
