//! ZG-lattices: free abelian groups of finite rank with a verified action of a
//! finite group by integer matrices acting on column vectors.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CosetSpace, Embedding, Group, Quotient};
use crate::linalg::{column_hnf, det_int, det_rat, kernel, rank, solve_in_basis, IntMatrix, Matrix, RatMatrix};

#[derive(Clone, Debug)]
pub struct ZGLattice {
    group: Arc<Group>,
    rank: usize,
    generators: Vec<IntMatrix>,
    action: Vec<IntMatrix>,
}

impl PartialEq for ZGLattice {
    fn eq(&self, other: &Self) -> bool {
        *self.group == *other.group && self.generators == other.generators
    }
}

impl ZGLattice {
    /// Builds the lattice from one matrix per group generator, expanding to every
    /// element and checking unimodularity and the group law.
    pub fn from_generators(group: &Arc<Group>, matrices: Vec<IntMatrix>) -> Result<Self> {
        let gens = group.generators();
        if matrices.len() != gens.len() {
            return Err(Error::Shape(format!("{} matrices for {} generators", matrices.len(), gens.len())));
        }
        let n = match matrices.first() {
            Some(m) => m.rows(),
            None => 0,
        };
        for (k, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Shape("generator matrices must be square of equal size".into()));
            }
            if !det_int(m).abs().is_one() {
                return Err(Error::NotUnimodular(k));
            }
        }
        let mut action: Vec<Option<IntMatrix>> = vec![None; group.order()];
        action[0] = Some(IntMatrix::identity(n));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (&s, m) in gens.iter().zip(&matrices) {
                let y = group.mul(x, s);
                if action[y].is_none() {
                    action[y] = Some(action[x].as_ref().expect("visited") * m);
                    queue.push_back(y);
                }
            }
        }
        let action: Vec<IntMatrix> = action.into_iter().map(|m| m.expect("generators generate")).collect();
        for x in 0..group.order() {
            for (&s, m) in gens.iter().zip(&matrices) {
                if action[group.mul(x, s)] != &action[x] * m {
                    return Err(Error::NotAHomomorphism(format!(
                        "M({x}) M(gen {s}) differs from M({})",
                        group.mul(x, s)
                    )));
                }
            }
        }
        Ok(ZGLattice { group: group.clone(), rank: n, generators: matrices, action })
    }

    /// Builds a lattice from a matrix for every element; used internally where the
    /// action is a homomorphism by construction.
    fn from_action(group: &Arc<Group>, rank: usize, action: Vec<IntMatrix>) -> Self {
        let generators = group.generators().iter().map(|&g| action[g].clone()).collect();
        let l = ZGLattice { group: group.clone(), rank, generators, action };
        debug_assert!(l.check_generator_edges());
        l
    }

    /// `M(x s) = M(x) M(s)` for every element `x` and generator `s`; together with
    /// `M(1) = I` this is equivalent to the homomorphism property.
    pub fn check_generator_edges(&self) -> bool {
        self.action[0].is_identity()
            && (0..self.group.order()).all(|x| {
                self.group
                    .generators()
                    .iter()
                    .all(|&s| self.action[self.group.mul(x, s)] == &self.action[x] * &self.action[s])
            })
    }

    /// Exhaustive check of `M(g) M(h) = M(gh)`.
    pub fn check_homomorphism(&self) -> bool {
        let n = self.group.order();
        (0..n).all(|g| (0..n).all(|h| &self.action[g] * &self.action[h] == self.action[self.group.mul(g, h)]))
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generator_matrices(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn action(&self, g: usize) -> &IntMatrix {
        &self.action[g]
    }

    /// Trace of the action on each element conjugacy class.
    pub fn character(&self) -> Vec<BigInt> {
        self.group.conjugacy_classes().iter().map(|c| self.action[c[0]].trace()).collect()
    }

    pub fn trivial(group: &Arc<Group>) -> Self {
        Self::from_action(group, 1, vec![IntMatrix::identity(1); group.order()])
    }

    /// The sign lattice `eps` of a dihedral group: reflections act by `-1`.
    pub fn sign(group: &Arc<Group>) -> Result<Self> {
        let q = group
            .dihedral_q()
            .ok_or_else(|| Error::Unsupported("the sign lattice is only defined for dihedral groups".into()))?;
        let action = (0..group.order()).map(|g| IntMatrix::from_i64(&[&[if g >= q { -1 } else { 1 }]])).collect();
        Ok(Self::from_action(group, 1, action))
    }

    /// `Z[G/H]` with basis the left cosets in [`CosetSpace`] order.
    pub fn permutation(group: &Arc<Group>, subgroup: &[usize]) -> Self {
        let cosets = CosetSpace::new(group, subgroup);
        let n = cosets.len();
        let action = (0..group.order())
            .map(|g| {
                let mut m = IntMatrix::zeros(n, n);
                for k in 0..n {
                    m[(cosets.act(group, g, k), k)] = BigInt::one();
                }
                m
            })
            .collect();
        Self::from_action(group, n, action)
    }

    /// `Z[G/H]` for the representative of a subgroup class.
    pub fn permutation_class(group: &Arc<Group>, class: usize) -> Self {
        Self::permutation(group, &group.subgroup_class(class).representative.clone())
    }

    pub fn regular(group: &Arc<Group>) -> Self {
        Self::permutation(group, &[0])
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let action = self.action.iter().zip(&other.action).map(|(a, b)| a.block_diag(b)).collect();
        Ok(Self::from_action(&self.group, self.rank + other.rank, action))
    }

    /// Direct sum of a list; the zero lattice for an empty list needs the group.
    pub fn direct_sum_all(group: &Arc<Group>, parts: &[ZGLattice]) -> Result<Self> {
        let mut acc = Self::from_action(group, 0, vec![IntMatrix::zeros(0, 0); group.order()]);
        for p in parts {
            acc = acc.direct_sum(p)?;
        }
        Ok(acc)
    }

    /// Tensor product over Z with the diagonal action.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let action = self.action.iter().zip(&other.action).map(|(a, b)| a.kronecker(b)).collect();
        Ok(Self::from_action(&self.group, self.rank * other.rank, action))
    }

    /// `L (x) eps` for dihedral groups.
    pub fn twist_sign(&self) -> Result<Self> {
        self.tensor(&Self::sign(&self.group)?)
    }

    /// The sublattice spanned by the columns of `columns`, with the action
    /// rewritten in a canonical basis of that span.
    pub fn span_sublattice(&self, columns: &IntMatrix) -> Result<Self> {
        Ok(self.span_sublattice_with_basis(columns)?.0)
    }

    /// As [`Self::span_sublattice`], also returning the chosen basis (columns).
    pub fn span_sublattice_with_basis(&self, columns: &IntMatrix) -> Result<(Self, IntMatrix)> {
        if columns.rows() != self.rank {
            return Err(Error::Shape("spanning vectors have the wrong length".into()));
        }
        let basis = column_hnf(columns);
        for m in &self.generators {
            solve_in_basis(&basis, &(m * &basis)).ok_or(Error::NotStable)?;
        }
        let action = self
            .action
            .iter()
            .map(|m| solve_in_basis(&basis, &(m * &basis)).expect("stable under generators"))
            .collect();
        Ok((Self::from_action(&self.group, basis.cols(), action), basis))
    }

    /// Restriction along an embedding `H -> G`.
    pub fn restrict(&self, emb: &Embedding) -> Result<Self> {
        if *emb.target != *self.group {
            return Err(Error::GroupMismatch("lattice does not live on the embedding's target".into()));
        }
        let action = emb.map.iter().map(|&g| self.action[g].clone()).collect();
        Ok(Self::from_action(&emb.source, self.rank, action))
    }

    /// Induction along an embedding `H -> G`: blocks `M(t_j^-1 g t_i)` over coset
    /// representatives `t_i` of `G/H`.
    pub fn induce(&self, emb: &Embedding) -> Result<Self> {
        if *emb.source != *self.group {
            return Err(Error::GroupMismatch("lattice does not live on the embedding's source".into()));
        }
        let g = &emb.target;
        let image = emb.image(&(0..emb.source.order()).collect::<Vec<_>>());
        let cosets = CosetSpace::new(g, &image);
        let (m, r) = (cosets.len(), self.rank);
        let action = (0..g.order())
            .map(|x| {
                let mut big = IntMatrix::zeros(m * r, m * r);
                for i in 0..m {
                    let j = cosets.act(g, x, i);
                    let t_i = cosets.representatives[i];
                    let t_j = cosets.representatives[j];
                    let h = g.mul(g.mul(g.inv(t_j), x), t_i);
                    let block = &self.action[emb.preimage_element(h).expect("lands in H")];
                    for a in 0..r {
                        for b in 0..r {
                            big[(j * r + a, i * r + b)] = block[(a, b)].clone();
                        }
                    }
                }
                big
            })
            .collect();
        Ok(Self::from_action(g, m * r, action))
    }

    /// Inflation from `G/N` to `G`.
    pub fn inflate(&self, quotient: &Quotient) -> Result<Self> {
        if *quotient.group != *self.group {
            return Err(Error::GroupMismatch("lattice does not live on the quotient".into()));
        }
        let action = quotient.projection.iter().map(|&q| self.action[q].clone()).collect();
        Ok(Self::from_action(&quotient.source, self.rank, action))
    }

    /// Saturated basis (columns, canonical form) of the vectors fixed by `subgroup`.
    pub fn fixed_sublattice(&self, subgroup: &[usize]) -> IntMatrix {
        let gens = self.group.generating_set(subgroup);
        if gens.is_empty() || self.rank == 0 {
            return IntMatrix::identity(self.rank);
        }
        let id = IntMatrix::identity(self.rank);
        let mut stacked = self.action[gens[0]].sub(&id);
        for &g in &gens[1..] {
            stacked = stacked.vstack(&self.action[g].sub(&id));
        }
        kernel(&stacked)
    }

    /// Fixed sublattice of the representative of a subgroup class.
    pub fn fixed_sublattice_class(&self, class: usize) -> IntMatrix {
        self.fixed_sublattice(&self.group.subgroup_class(class).representative)
    }

    /// `[L : sum_H L^H]`, or infinite when the sum has lower rank.
    pub fn sum_of_fixed_index(&self, subgroups: &[Vec<usize>]) -> FixedIndex {
        let mut cat = IntMatrix::zeros(self.rank, 0);
        for h in subgroups {
            cat = cat.hstack(&self.fixed_sublattice(h));
        }
        if rank(&cat) < self.rank {
            return FixedIndex::Infinite;
        }
        let b = column_hnf(&cat);
        FixedIndex::Finite(det_int(&b).abs())
    }

    /// `(m_1, m_eps, m_tau)` for `D2q:p` with `p` an odd prime.
    pub fn rational_multiplicities_d2p(&self) -> Result<(usize, usize, usize)> {
        let p = self
            .group
            .dihedral_q()
            .filter(|&p| p > 2 && crate::arith::is_prime(p as u64))
            .ok_or_else(|| Error::Unsupported("multiplicities need D_2p with p an odd prime".into()))?;
        let n = BigInt::from(2 * p);
        let (mut s1, mut se) = (BigInt::zero(), BigInt::zero());
        for g in 0..2 * p {
            let t = self.action[g].trace();
            se += if g >= p { -&t } else { t.clone() };
            s1 += t;
        }
        let exact = |s: &BigInt| -> Result<usize> {
            if (s % &n).is_zero() {
                (s / &n).to_usize().ok_or_else(|| Error::Shape("negative multiplicity".into()))
            } else {
                Err(Error::Shape("character is not a lattice character".into()))
            }
        };
        let (m1, me) = (exact(&s1)?, exact(&se)?);
        let rest = self.rank.checked_sub(m1 + me).ok_or_else(|| Error::Shape("ranks do not add up".into()))?;
        if rest % (p - 1) != 0 {
            return Err(Error::Shape("tau multiplicity is not integral".into()));
        }
        Ok((m1, me, rest / (p - 1)))
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if *self.group == *other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch("lattices over different groups".into()))
        }
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            group: self.group.descriptor().to_string(),
            rank: self.rank,
            generators: self
                .generators
                .iter()
                .map(|m| m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &LatticeJson) -> Result<Self> {
        let group = Group::from_descriptor(&json.group)?;
        Self::from_json_on(&group, json)
    }

    /// Reads generator matrices for an already constructed group.
    pub fn from_json_on(group: &Arc<Group>, json: &LatticeJson) -> Result<Self> {
        let mut mats = Vec::new();
        for g in &json.generators {
            let rows: Vec<Vec<BigInt>> = g
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| x.trim().parse::<BigInt>().map_err(|_| Error::Shape(format!("bad integer `{x}`"))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            if rows.len() != json.rank || rows.iter().any(|r| r.len() != json.rank) {
                return Err(Error::Shape("generator matrix does not match the declared rank".into()));
            }
            mats.push(Matrix::from_rows(rows, json.rank));
        }
        Self::from_generators(group, mats)
    }
}

/// Serialized form: group descriptor, rank and generator matrices as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub group: String,
    pub rank: usize,
    pub generators: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedIndex {
    Finite(BigInt),
    Infinite,
}

impl FixedIndex {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            FixedIndex::Finite(n) => Some(n),
            FixedIndex::Infinite => None,
        }
    }
}

/// A symmetric non-degenerate `G`-invariant Gram matrix on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantPairing {
    pub gram: RatMatrix,
}

impl InvariantPairing {
    /// Checks symmetry, invariance under every group element, and non-degeneracy.
    pub fn verify(&self, lattice: &ZGLattice) -> bool {
        let g = &self.gram;
        if g.rows() != lattice.rank() || g.cols() != lattice.rank() || g.transpose() != *g {
            return false;
        }
        let invariant = (0..lattice.group().order()).all(|x| {
            let m = lattice.action(x).to_rational();
            &(&m.transpose() * g) * &m == *g
        });
        invariant && (lattice.rank() == 0 || !det_rat(g).is_zero())
    }

    /// True when every leading principal minor is positive.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.gram.rows();
        (1..=n).all(|k| {
            let minor = Matrix::from_fn(k, k, |i, j| self.gram[(i, j)].clone());
            det_rat(&minor).is_positive()
        })
    }
}

/// `sum_g M(g)^T S M(g)` with `S` the identity or, given an RNG, a random
/// positive-definite rational matrix `(X^T X + I)/d`.
pub fn averaged_pairing<R: Rng>(lattice: &ZGLattice, rng: Option<&mut R>) -> InvariantPairing {
    let n = lattice.rank();
    let seed_matrix: RatMatrix = match rng {
        None => RatMatrix::identity(n),
        Some(rng) => {
            let x = IntMatrix::from_fn(n, n, |_, _| BigInt::from(rng.random_range(-3i64..=3)));
            let s = &(&x.transpose() * &x).add(&IntMatrix::identity(n));
            let d = BigRational::new(BigInt::one(), BigInt::from(rng.random_range(1i64..=7)));
            s.to_rational().scale(&d)
        }
    };
    let mut gram = RatMatrix::zeros(n, n);
    for g in 0..lattice.group().order() {
        let m = lattice.action(g).to_rational();
        gram = gram.add(&(&(&m.transpose() * &seed_matrix) * &m));
    }
    let p = InvariantPairing { gram };
    assert!(p.verify(lattice), "averaged pairing must be invariant and non-degenerate");
    p
}

/// `det(scale * B^T gram B)`; the empty determinant is 1.
pub fn gram_determinant(pairing: &InvariantPairing, basis: &IntMatrix, scale: &BigRational) -> BigRational {
    if basis.cols() == 0 {
        return BigRational::one();
    }
    let b = basis.to_rational();
    let m = (&(&b.transpose() * &pairing.gram) * &b).scale(scale);
    det_rat(&m)
}
