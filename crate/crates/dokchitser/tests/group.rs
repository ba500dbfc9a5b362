use std::collections::BTreeSet;
use std::sync::Arc;

use dokchitser::group::{Group, Quotient};
use dokchitser::Error;

fn corpus() -> Vec<Arc<Group>> {
    ["C:1", "C:6", "D2q:3", "D2q:4", "D2q:5", "D2q:6", "D2q:15", "S:4", "prod(D2q:3,C:2)"]
        .iter()
        .map(|d| Group::from_descriptor(d).unwrap())
        .collect()
}

fn close(g: &Group, gens: &[usize]) -> BTreeSet<usize> {
    let mut set = BTreeSet::from([g.identity()]);
    loop {
        let next: BTreeSet<usize> =
            set.iter().flat_map(|&x| gens.iter().map(move |&s| (x, s))).map(|(x, s)| g.mul(x, s)).collect();
        let before = set.len();
        set.extend(next);
        if set.len() == before {
            return set;
        }
    }
}

// every subgroup of the corpus groups is generated by at most three elements
fn all_subgroups(g: &Group) -> BTreeSet<BTreeSet<usize>> {
    let n = g.order();
    let mut out = BTreeSet::new();
    for x in 0..n {
        for y in x..n {
            for z in y..n {
                out.insert(close(g, &[x, y, z]));
            }
        }
    }
    out
}

fn conjugate(g: &Group, h: &BTreeSet<usize>, x: usize) -> BTreeSet<usize> {
    h.iter().map(|&y| g.mul(g.mul(x, y), g.inv(x))).collect()
}

fn labels(g: &Group) -> Vec<&str> {
    g.subgroup_classes().iter().map(|c| c.label.as_str()).collect()
}

#[test]
fn descriptor_orders() {
    assert_eq!(Group::from_descriptor("D2q:3").unwrap().order(), 6);
    let trivial = Group::cyclic(1).unwrap();
    assert_eq!(trivial.order(), 1);
    assert_eq!(labels(&trivial), ["1"]);
    assert_eq!(Group::dihedral(15).unwrap().order(), 30);
    assert_eq!(Group::from_descriptor("prod(D2q:3,C:2)").unwrap().order(), 12);
}

#[test]
fn bad_descriptors_are_rejected() {
    for d in ["D2q:0", "X:3", "C:x", "prod(C:2)", "S:9"] {
        assert!(Group::from_descriptor(d).is_err(), "{d}");
    }
    assert!(matches!(Group::from_descriptor("D2q:400"), Err(Error::OrderTooLarge(..))));
}

#[test]
fn dihedral_presentation() {
    for q in [3usize, 4, 5, 15] {
        let g = Group::dihedral(q).unwrap();
        let (a, b) = (g.generators()[0], g.generators()[1]);
        assert_eq!(g.element_order(a), 2);
        assert_eq!(g.element_order(b), q);
        assert_eq!(g.element_order(g.mul(a, b)), 2);
        assert_eq!(close(&g, &[a, b]).len(), 2 * q);
        assert_eq!(g.dihedral_q(), Some(q));
    }
}

#[test]
fn explicit_table_must_be_a_group() {
    let dir = std::env::temp_dir().join(format!("dok-group-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("c3.json");
    std::fs::write(&good, "[[0,1,2],[1,2,0],[2,0,1]]").unwrap();
    let g = Group::from_descriptor(&format!("table:{}", good.display())).unwrap();
    assert_eq!(g.order(), 3);
    assert_eq!(labels(&g), ["1", "G"]);
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "[[0,1,2],[1,0,2],[2,2,0]]").unwrap();
    assert!(Group::from_descriptor(&format!("table:{}", bad.display())).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn small_dihedral_class_labels() {
    assert_eq!(labels(&Group::dihedral(3).unwrap()), ["1", "C2", "C3", "G"]);
    assert_eq!(labels(&Group::dihedral(5).unwrap()), ["1", "C2", "C5", "G"]);
    let g = Group::dihedral(15).unwrap();
    let d30 = labels(&g);
    let want: BTreeSet<&str> = ["1", "C2", "C3", "C5", "D6", "D10", "C15", "G"].into();
    assert_eq!(d30.len(), 8);
    assert_eq!(d30.into_iter().collect::<BTreeSet<_>>(), want);
}

#[test]
fn classes_match_exhaustive_enumeration() {
    for g in corpus() {
        let subs = all_subgroups(&g);
        let classes = g.subgroup_classes();
        let total: usize = classes.iter().map(|c| c.class_size).sum();
        assert_eq!(total, subs.len(), "{}", g.descriptor());
        // bucket the brute-force subgroups by conjugacy
        let mut buckets: Vec<BTreeSet<BTreeSet<usize>>> = Vec::new();
        for h in &subs {
            if buckets.iter().any(|b| b.contains(h)) {
                continue;
            }
            buckets.push((0..g.order()).map(|x| conjugate(&g, h, x)).collect());
        }
        assert_eq!(buckets.len(), classes.len(), "{}", g.descriptor());
        for c in classes {
            let rep: BTreeSet<usize> = c.representative.iter().copied().collect();
            let bucket = buckets.iter().find(|b| b.contains(&rep)).expect("representative is a subgroup");
            assert_eq!(bucket.len(), c.class_size);
            assert_eq!(Some(&rep), bucket.iter().min(), "least representative");
            assert_eq!(c.order, rep.len());
            let cyclic = rep.iter().any(|&x| g.element_order(x) == rep.len());
            assert_eq!(c.is_cyclic, cyclic, "{} {}", g.descriptor(), c.label);
        }
        let orders: Vec<usize> = classes.iter().map(|c| c.order).collect();
        assert!(orders.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(classes.first().unwrap().label, "1");
        if g.order() > 1 {
            assert_eq!(classes.last().unwrap().label, "G");
        }
    }
}

#[test]
fn conjugates_stay_in_class() {
    for g in corpus() {
        for (i, c) in g.subgroup_classes().iter().enumerate() {
            for x in 0..g.order() {
                assert_eq!(g.class_of_subgroup(&g.conjugate(&c.representative, x)), Some(i));
            }
        }
    }
}

#[test]
fn conjugacy_classes_partition() {
    for g in corpus() {
        let mut all: Vec<usize> = g.conjugacy_classes().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..g.order()).collect::<Vec<_>>());
        for (k, cls) in g.conjugacy_classes().iter().enumerate() {
            for &y in cls {
                assert_eq!(g.class_of_element(y), k);
                let orbit: BTreeSet<usize> = (0..g.order()).map(|x| g.mul(g.mul(x, y), g.inv(x))).collect();
                assert_eq!(orbit, cls.iter().copied().collect());
            }
        }
    }
}

#[test]
fn quotients() {
    let d6 = Group::dihedral(3).unwrap();
    let c3 = &d6.subgroup_class(d6.class_index("C3").unwrap()).representative;
    assert_eq!(Quotient::new(&d6, c3).unwrap().group.order(), 2);
    let c2 = &d6.subgroup_class(d6.class_index("C2").unwrap()).representative;
    assert!(matches!(Quotient::new(&d6, c2), Err(Error::NotNormal)));

    let d30 = Group::dihedral(15).unwrap();
    let c5 = &d30.subgroup_class(d30.class_index("C5").unwrap()).representative;
    let q = Quotient::new(&d30, c5).unwrap();
    assert_eq!(q.group.order(), 6);
    // isomorphic to D_6: two generators of orders 2 and 3 whose product has order 2
    let orders: Vec<usize> = (0..6).map(|x| q.group.element_order(x)).collect();
    assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 3);
    assert_eq!(orders.iter().filter(|&&o| o == 3).count(), 2);
    assert_eq!(q.group.subgroup_classes().len(), 4);
}

#[test]
fn correspondence_is_a_bijection_onto_overgroups() {
    for g in corpus() {
        for c in g.subgroup_classes().iter().filter(|c| c.is_normal()) {
            let n = &c.representative;
            let q = Quotient::new(&g, n).unwrap();
            let image = q.subgroup_correspondence();
            let distinct: BTreeSet<usize> = image.iter().copied().collect();
            assert_eq!(distinct.len(), image.len(), "{} / {}", g.descriptor(), c.label);
            let containing: BTreeSet<usize> = g
                .subgroup_classes()
                .iter()
                .enumerate()
                .filter(|(_, h)| {
                    (0..g.order()).any(|x| n.iter().all(|y| g.conjugate(&h.representative, x).contains(y)))
                })
                .map(|(i, _)| i)
                .collect();
            assert_eq!(distinct, containing, "{} / {}", g.descriptor(), c.label);
        }
    }
}

#[test]
fn double_coset_examples() {
    let d6 = Group::dihedral(3).unwrap();
    let rep = |l: &str| d6.subgroup_class(d6.class_index(l).unwrap()).representative.clone();
    let (c2, c3) = (rep("C2"), rep("C3"));
    let mut sizes = d6.double_cosets(&c2, &c2).block_sizes;
    sizes.sort_unstable();
    assert_eq!(sizes, [2, 4]);
    assert_eq!(d6.double_cosets(&c3, &c3).block_sizes, [3, 3]);
    assert_eq!(d6.double_cosets(&rep("G"), &rep("1")).block_sizes, [6]);
}

#[test]
fn double_cosets_partition() {
    for g in corpus() {
        let classes = g.subgroup_classes();
        for h in classes {
            for k in classes {
                let dc = g.double_cosets(&h.representative, &k.representative);
                assert_eq!(dc.block_sizes.iter().sum::<usize>(), g.order());
                let mut seen = BTreeSet::new();
                for (&r, &size) in dc.representatives.iter().zip(&dc.block_sizes) {
                    let block: BTreeSet<usize> = h
                        .representative
                        .iter()
                        .flat_map(|&x| k.representative.iter().map(move |&y| (x, y)))
                        .map(|(x, y)| g.mul(g.mul(x, r), y))
                        .collect();
                    assert_eq!(block.len(), size);
                    assert_eq!(block.iter().min(), Some(&r));
                    assert!(block.iter().all(|z| seen.insert(*z)));
                }
            }
        }
    }
}

#[test]
fn hypo_elementary_examples() {
    let d6 = Group::dihedral(3).unwrap();
    let all: Vec<usize> = (0..6).collect();
    assert!(d6.is_p_hypo_elementary(&all, 3).unwrap());
    assert!(!d6.is_p_hypo_elementary(&all, 2).unwrap());
    assert!(matches!(d6.is_p_hypo_elementary(&all, 4), Err(Error::NotPrime(4))));
    let c6 = Group::cyclic(6).unwrap();
    assert!(c6.is_p_hypo_elementary(&(0..6).collect::<Vec<_>>(), 5).unwrap());
}

#[test]
fn hypo_elementary_subgroups_are_cyclic_away_from_rotations() {
    // N = rotations has cyclic quotient; for p not dividing q every p-hypo-elementary subgroup is cyclic
    for q in 2..=15usize {
        let g = Group::dihedral(q).unwrap();
        for p in [2u64, 3, 5, 7, 11, 13] {
            if q as u64 % p == 0 {
                continue;
            }
            for c in g.subgroup_classes() {
                if g.is_p_hypo_elementary(&c.representative, p).unwrap() {
                    assert!(c.is_cyclic, "D_{} p = {p}: {}", 2 * q, c.label);
                }
            }
        }
    }
}
