//! Random `G`-stable sublattices and exhaustive enumeration of overlattices
//! between `L` and `(1/p) L`.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::ZGLattice;
use crate::linalg::{column_hnf, det_int, IntMatrix, Matrix};

/// The `G`-span of a random vector modulo `m`, plus `m L`. Returns `L` itself for
/// `m <= 1`. The index divides a power of `m`.
pub fn random_stable_sublattice<R: Rng>(lattice: &ZGLattice, rng: &mut R, modulus: u64) -> Result<ZGLattice> {
    let n = lattice.rank();
    if modulus <= 1 || n == 0 {
        return Ok(lattice.clone());
    }
    let v: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.random_range(0..modulus))).collect();
    let mut cols: Vec<Vec<BigInt>> = (0..lattice.group().order()).map(|g| lattice.action(g).mul_vec(&v)).collect();
    for i in 0..n {
        let mut e = vec![BigInt::from(0); n];
        e[i] = BigInt::from(modulus);
        cols.push(e);
    }
    lattice.span_sublattice(&Matrix::from_columns(&cols, n))
}

/// Index `[L : M]` of a sublattice given by its basis columns in `L`.
pub fn sublattice_index(basis: &IntMatrix) -> BigInt {
    use num_traits::Signed;
    det_int(basis).abs()
}

/// A `G`-stable subspace of `F_p^n` in reduced row echelon form.
type Subspace = Vec<Vec<u64>>;

fn rref(mut rows: Vec<Vec<u64>>, p: u64) -> Subspace {
    let n = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..n {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, piv);
        let inv = mod_inverse(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                let src = rows[r].clone();
                for (x, s) in rows[i].iter_mut().zip(&src) {
                    *x = (*x + p * p - f * s % p) % p;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(p));
    e.x.mod_floor(&BigInt::from(p)).to_u64().expect("small")
}

fn apply(m: &[Vec<u64>], v: &[u64], p: u64) -> Vec<u64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b % p).sum::<u64>() % p).collect()
}

fn in_span(space: &Subspace, v: &[u64], p: u64) -> bool {
    let mut rows = space.clone();
    rows.push(v.to_vec());
    rref(rows, p).len() == space.len()
}

/// Smallest stable subspace containing `v`.
fn cyclic_submodule(gens: &[Vec<Vec<u64>>], v: Vec<u64>, p: u64) -> Subspace {
    let mut space = rref(vec![v.clone()], p);
    let mut frontier = vec![v];
    while let Some(w) = frontier.pop() {
        for m in gens {
            let u = apply(m, &w, p);
            if !in_span(&space, &u, p) {
                let mut rows = space.clone();
                rows.push(u.clone());
                space = rref(rows, p);
                frontier.push(u);
            }
        }
    }
    space
}

/// All `G`-stable subspaces of `L / pL`, sorted by dimension then canonical form.
pub fn stable_subspaces_mod_p(lattice: &ZGLattice, p: u64) -> Result<Vec<Vec<Vec<u64>>>> {
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = lattice.rank();
    let pb = BigInt::from(p);
    let gens: Vec<Vec<Vec<u64>>> = lattice
        .generator_matrices()
        .iter()
        .map(|m| {
            m.to_rows()
                .iter()
                .map(|r| r.iter().map(|x| x.mod_floor(&pb).to_u64().expect("reduced")).collect())
                .collect()
        })
        .collect();

    // cyclic submodules of all projective points
    let mut cyclic: BTreeSet<Subspace> = BTreeSet::new();
    let total = (p as u128).pow(n as u32);
    if total > 2_000_000 {
        return Err(Error::Unsupported(format!("F_{p}^{n} is too large to enumerate")));
    }
    for lead in 0..n {
        let free = n - lead - 1;
        for code in 0..(p as u128).pow(free as u32) {
            let mut v = vec![0u64; n];
            v[lead] = 1;
            let mut c = code;
            for x in v.iter_mut().skip(lead + 1) {
                *x = (c % p as u128) as u64;
                c /= p as u128;
            }
            cyclic.insert(cyclic_submodule(&gens, v, p));
        }
    }
    let cyclic: Vec<Subspace> = cyclic.into_iter().collect();

    // every stable subspace is a sum of cyclic ones
    let mut seen: HashSet<Subspace> = HashSet::new();
    seen.insert(Vec::new());
    let mut frontier: Vec<Subspace> = vec![Vec::new()];
    while let Some(u) = frontier.pop() {
        for c in &cyclic {
            let mut rows = u.clone();
            rows.extend(c.iter().cloned());
            let s = rref(rows, p);
            if s.len() > u.len() && seen.insert(s.clone()) {
                frontier.push(s);
            }
        }
    }
    let mut out: Vec<Subspace> = seen.into_iter().collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

/// Every `G`-stable `M` with `L <= M <= (1/p) L`, each returned as the
/// isomorphic lattice `pM <= L` together with `[M : L]`.
pub fn overlattices_mod_p(lattice: &ZGLattice, p: u64) -> Result<Vec<(ZGLattice, u64)>> {
    let n = lattice.rank();
    let subspaces = stable_subspaces_mod_p(lattice, p)?;
    let mut out = Vec::with_capacity(subspaces.len());
    for w in subspaces {
        let mut cols: Vec<Vec<BigInt>> = w.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        for i in 0..n {
            let mut e = vec![BigInt::from(0); n];
            e[i] = BigInt::from(p);
            cols.push(e);
        }
        let m = column_hnf(&Matrix::from_columns(&cols, n));
        let sub = lattice.span_sublattice(&m)?;
        out.push((sub, p.pow(w.len() as u32)));
    }
    Ok(out)
}
