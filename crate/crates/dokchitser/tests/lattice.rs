use std::sync::Arc;

use dokchitser::group::Group;
use dokchitser::lattice::*;
use dokchitser::linalg::{elementary_divisors, rank, IntMatrix, LatticeCoordinates, Matrix};
use dokchitser::sampling::{overlattices_mod_p, random_stable_sublattice, sublattice_index};
use dokchitser::suites::{random_lattice, trial_rng};
use dokchitser::zoo::{d2p, zoo_lattice_on, ZooName};
use dokchitser::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn class(g: &Group, label: &str) -> Vec<usize> {
    g.subgroup_class(g.class_index(label).unwrap()).representative.clone()
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn traces(l: &ZGLattice) -> Vec<i64> {
    l.character().iter().map(|t| i64::try_from(t).unwrap()).collect()
}

#[test]
fn permutation_lattices() {
    let g = Group::dihedral(3).unwrap();
    assert_eq!(ZGLattice::permutation(&g, &class(&g, "G")), ZGLattice::trivial(&g));
    assert_eq!(ZGLattice::permutation(&g, &class(&g, "1")).rank(), 6);
    let zc2 = ZGLattice::permutation(&g, &class(&g, "C2"));
    assert_eq!(zc2.rank(), 3);
    // classes of D_6 are ordered identity, rotations, reflections
    let mut t = traces(&zc2);
    t.sort_unstable();
    assert_eq!(t, [0, 1, 3]);
}

#[test]
fn lattices_from_generators() {
    let g = Group::dihedral(3).unwrap();
    let eps =
        ZGLattice::from_generators(&g, vec![IntMatrix::from_i64(&[&[-1]]), IntMatrix::from_i64(&[&[1]])]).unwrap();
    assert_eq!(eps, ZGLattice::sign(&g).unwrap());
    let swap = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    let rho = ZGLattice::from_generators(&g, vec![swap, IntMatrix::identity(2)]).unwrap();
    assert_eq!(rho.rank(), 2);
    assert!(rho.check_homomorphism());
    let doubled = ZGLattice::from_generators(&g, vec![IntMatrix::from_i64(&[&[2]]), IntMatrix::from_i64(&[&[1]])]);
    assert!(matches!(doubled, Err(Error::NotUnimodular(0))));
    // b of order 4 breaks b^3 = 1
    let b = IntMatrix::from_i64(&[&[0, -1], &[1, 0]]);
    let bad = ZGLattice::from_generators(&g, vec![IntMatrix::identity(2), b]);
    assert!(matches!(bad, Err(Error::NotAHomomorphism(_))));
}

#[test]
fn lattice_algebra() {
    let g = Group::dihedral(3).unwrap();
    let zc2 = ZGLattice::permutation(&g, &class(&g, "C2"));
    let twisted = zc2.tensor(&ZGLattice::sign(&g).unwrap()).unwrap();
    assert_eq!(twisted.rank(), 3);
    assert_eq!(twisted.action(g.generators()[0]).trace(), BigInt::from(-1));
    assert_eq!(twisted, zc2.twist_sign().unwrap());
    let sum = ZGLattice::trivial(&g).direct_sum(&zc2).unwrap();
    assert_eq!(sum.rank(), 4);
    assert!(sum.check_homomorphism());

    let span = Matrix::from_columns(&[ints(&[1, -1, 0]), ints(&[1, 0, -1])], 3);
    let aprime = zc2.span_sublattice(&span).unwrap();
    assert_eq!(aprime.rank(), 2);
    assert!(aprime.check_homomorphism());
    let line = Matrix::from_columns(&[ints(&[1, -1, 0])], 3);
    assert!(matches!(zc2.span_sublattice(&line), Err(Error::NotStable)));
    let c6 = Group::cyclic(6).unwrap();
    assert!(ZGLattice::trivial(&g).direct_sum(&ZGLattice::trivial(&c6)).is_err());
    assert!(ZGLattice::sign(&c6).is_err());
}

#[test]
fn one_plus_eps_sits_inside_rho_with_index_two() {
    let g = Group::dihedral(3).unwrap();
    let base = ZGLattice::trivial(&g).direct_sum(&ZGLattice::sign(&g).unwrap()).unwrap();
    let c2 = class(&g, "C2");
    let split_index = |l: &ZGLattice| {
        let plus = l.fixed_sublattice(&c2);
        let minus = l.twist_sign().unwrap().fixed_sublattice(&c2);
        sublattice_index(&plus.hstack(&minus))
    };
    assert!(split_index(&base).is_one());
    let overs = overlattices_mod_p(&base, 2).unwrap();
    // rho = Z[G/C3] does not split into its (+1) and (-1) eigenlattices under a
    assert!(overs.iter().any(|(m, k)| *k == 2 && split_index(m) == BigInt::from(2)));
    let rho = ZGLattice::permutation(&g, &class(&g, "C3"));
    assert_eq!(split_index(&rho), BigInt::from(2));
}

#[test]
fn aprime_plus_one_sits_inside_z_g_mod_c2() {
    let g = d2p(3).unwrap();
    let subs = [class(&g, "C2"), vec![0, 4], class(&g, "C3")];
    let base = zoo_lattice_on(&g, ZooName::Aprime).unwrap().direct_sum(&ZGLattice::trivial(&g)).unwrap();
    assert_eq!(base.sum_of_fixed_index(&subs).finite(), Some(&BigInt::from(3)));
    let overs = overlattices_mod_p(&base, 3).unwrap();
    // (A', 1) = Z[G/C2] has fixed-sum index 1
    assert!(overs.iter().any(|(m, k)| *k == 3 && m.sum_of_fixed_index(&subs).finite().is_some_and(One::is_one)));
}

#[test]
fn fixed_sublattice_examples() {
    let g = Group::dihedral(3).unwrap();
    let zc2 = ZGLattice::permutation(&g, &class(&g, "C2"));
    assert_eq!(zc2.fixed_sublattice(&class(&g, "C3")).cols(), 1);
    let span = Matrix::from_columns(&[ints(&[1, -1, 0]), ints(&[1, 0, -1])], 3);
    let (aprime, basis) = zc2.span_sublattice_with_basis(&span).unwrap();
    let fixed = &basis * &aprime.fixed_sublattice(&class(&g, "C2"));
    assert_eq!(fixed.cols(), 1);
    let v = fixed.column(0);
    assert!(v == ints(&[2, -1, -1]) || v == ints(&[-2, 1, 1]), "{v:?}");
    assert_eq!(aprime.fixed_sublattice(&class(&g, "C3")).cols(), 0);
    assert!(aprime.fixed_sublattice(&[0]).is_identity());
}

fn fixed_by(l: &ZGLattice, h: &[usize], v: &[BigInt]) -> bool {
    h.iter().all(|&x| l.action(x).mul_vec(v) == v)
}

// every fixed vector in a small box has integral coordinates in the returned basis
#[test]
fn fixed_sublattice_against_box_search() {
    let g = d2p(3).unwrap();
    let mut lattices: Vec<ZGLattice> =
        ZooName::ALL.iter().map(|&n| zoo_lattice_on(&g, n).unwrap()).filter(|l| l.rank() <= 4).collect();
    for t in 0..6 {
        let l = random_lattice(&g, &mut trial_rng(11, t)).unwrap();
        if l.rank() <= 4 {
            lattices.push(l);
        }
    }
    for l in &lattices {
        let n = l.rank();
        for c in g.subgroup_classes() {
            let h = &c.representative;
            let basis = l.fixed_sublattice(h);
            for j in 0..basis.cols() {
                assert!(fixed_by(l, h, &basis.column(j)));
            }
            if basis.cols() > 0 {
                assert!(elementary_divisors(&basis).iter().all(One::is_one));
            }
            let coords = (basis.cols() > 0).then(|| LatticeCoordinates::new(&basis));
            let mut found = Vec::new();
            let mut v = vec![-2i64; n];
            loop {
                let w = ints(&v);
                if fixed_by(l, h, &w) {
                    found.push(w.clone());
                    match &coords {
                        Some(cs) => assert!(cs.coords(&w).is_some(), "{} {:?}", c.label, v),
                        None => assert!(w.iter().all(Zero::is_zero)),
                    }
                }
                let mut i = 0;
                while i < n && v[i] == 2 {
                    v[i] = -2;
                    i += 1;
                }
                if i == n {
                    break;
                }
                v[i] += 1;
            }
            let m = IntMatrix::from_columns(&found, n);
            assert_eq!(rank(&m), basis.cols(), "{}", c.label);
        }
    }
}

#[test]
fn permutation_fixed_rank_is_orbit_count() {
    for d in ["D2q:3", "D2q:5", "D2q:6", "S:4"] {
        let g = Group::from_descriptor(d).unwrap();
        for k in g.subgroup_classes() {
            let l = ZGLattice::permutation(&g, &k.representative);
            for h in g.subgroup_classes() {
                let orbits = g.double_cosets(&h.representative, &k.representative).representatives.len();
                assert_eq!(l.fixed_sublattice(&h.representative).cols(), orbits, "{d} {} on G/{}", h.label, k.label);
            }
        }
    }
}

#[test]
fn homomorphism_on_random_pairs() {
    let mut rng = trial_rng(5, 0);
    let groups: Vec<Arc<Group>> =
        ["D2q:3", "D2q:5", "D2q:15", "S:4"].iter().map(|d| Group::from_descriptor(d).unwrap()).collect();
    let lattices: Vec<ZGLattice> = groups
        .iter()
        .flat_map(|g| (0..3).map(|t| random_lattice(g, &mut trial_rng(9, t)).unwrap()).collect::<Vec<_>>())
        .collect();
    for _ in 0..1000 {
        let l = &lattices[rng.random_range(0..lattices.len())];
        let n = l.group().order();
        let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
        assert_eq!(&(l.action(x) * l.action(y)), l.action(l.group().mul(x, y)));
    }
}

#[test]
fn averaged_pairings() {
    let g = Group::dihedral(3).unwrap();
    let six = BigRational::from_integer(6.into());
    let reg = averaged_pairing::<ChaCha8Rng>(&ZGLattice::regular(&g), None);
    assert_eq!(reg.gram, IntMatrix::identity(6).to_rational().scale(&six));
    let eps = averaged_pairing::<ChaCha8Rng>(&ZGLattice::sign(&g).unwrap(), None);
    assert_eq!(eps.gram[(0, 0)], six);
    let aprime = zoo_lattice_on(&d2p(3).unwrap(), ZooName::Aprime).unwrap();
    let p1 = averaged_pairing(&aprime, Some(&mut trial_rng(1, 0)));
    let p2 = averaged_pairing(&aprime, Some(&mut trial_rng(2, 0)));
    assert!(p1.verify(&aprime) && p2.verify(&aprime));
    assert!(p1.is_positive_definite() && p2.is_positive_definite());
    assert_ne!(p1.gram, p2.gram);
}

#[test]
fn gram_determinants_of_aprime() {
    for p in [3usize, 5, 7] {
        let g = Group::dihedral(p).unwrap();
        let zc2 = ZGLattice::permutation(&g, &class(&g, "C2"));
        let cols: Vec<Vec<BigInt>> = (1..p)
            .map(|i| {
                let mut v = vec![BigInt::zero(); p];
                v[0] = BigInt::one();
                v[i] = BigInt::from(-1);
                v
            })
            .collect();
        let (aprime, basis) = zc2.span_sublattice_with_basis(&Matrix::from_columns(&cols, p)).unwrap();
        let standard = InvariantPairing { gram: IntMatrix::identity(p).to_rational() };
        let one = BigRational::one();
        assert_eq!(gram_determinant(&standard, &basis, &one), BigRational::from_integer(p.into()));
        let fixed = &basis * &aprime.fixed_sublattice(&class(&g, "C2"));
        let want = BigInt::from(2u64.pow((p as u32 - 1) / 2) * p as u64);
        assert_eq!(gram_determinant(&standard, &fixed, &one), BigRational::from_integer(want));
        let empty = &basis * &aprime.fixed_sublattice(&class(&g, &format!("C{p}")));
        assert!(gram_determinant(&standard, &empty, &one).is_one());
    }
}

#[test]
fn sums_of_fixed_sublattices() {
    let g = d2p(3).unwrap();
    let subs = [class(&g, "C2"), vec![0, 4], class(&g, "C3")];
    let idx = |n| zoo_lattice_on(&g, n).unwrap().sum_of_fixed_index(&subs);
    assert_eq!(idx(ZooName::Aprime), FixedIndex::Finite(3.into()));
    assert_eq!(idx(ZooName::A), FixedIndex::Finite(1.into()));
    assert_eq!(idx(ZooName::Regular), FixedIndex::Finite(3.into()));
    assert_eq!(ZGLattice::regular(&g).sum_of_fixed_index(&[class(&g, "C3")]), FixedIndex::Infinite);
}

#[test]
fn rational_multiplicities() {
    let g = d2p(3).unwrap();
    let m = |n| zoo_lattice_on(&g, n).unwrap().rational_multiplicities_d2p().unwrap();
    assert_eq!(m(ZooName::ExtAprime1), (1, 0, 1));
    assert_eq!(m(ZooName::Aprime), (0, 0, 1));
    assert_eq!(m(ZooName::Regular), (1, 1, 2));
    assert!(ZGLattice::trivial(&Group::dihedral(15).unwrap()).rational_multiplicities_d2p().is_err());
}

#[test]
fn sampling() {
    let g = d2p(5).unwrap();
    let l = zoo_lattice_on(&g, ZooName::Regular).unwrap();
    let mut rng = trial_rng(3, 0);
    assert_eq!(random_stable_sublattice(&l, &mut rng, 1).unwrap(), l);
    for m in [2u64, 3, 4, 5] {
        let s = random_stable_sublattice(&l, &mut rng, m).unwrap();
        assert_eq!(s.rank(), l.rank());
        assert!(s.check_generator_edges());
    }
}

#[test]
fn restriction_and_induction_ranks() {
    let g = Group::dihedral(15).unwrap();
    let d6 = class(&g, "D6");
    let emb = dokchitser::burnside::subgroup_embedding(&g, &d6).unwrap();
    let reg = ZGLattice::regular(&g);
    let down = reg.restrict(&emb).unwrap();
    assert_eq!(down.rank(), 30);
    assert!(down.check_generator_edges());
    let up = ZGLattice::trivial(&emb.source).induce(&emb).unwrap();
    assert_eq!(up.rank(), 5);
    assert!(up.check_homomorphism());
    // Ind of the trivial lattice is the permutation lattice on G/H
    assert_eq!(up.character(), ZGLattice::permutation(&g, &d6).character());
}

#[test]
fn json_round_trip() {
    let g = d2p(5).unwrap();
    for n in ZooName::ALL {
        let l = zoo_lattice_on(&g, n).unwrap();
        let j = l.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: LatticeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(ZGLattice::from_json(&back).unwrap(), l);
    }
}
