use dokchitser::burnside::relation_lattice;
use dokchitser::group::Group;
use dokchitser::suites::*;
use rand::Rng;

#[test]
fn names_round_trip() {
    assert_eq!(SuiteName::ALL.len(), 9);
    for n in SuiteName::ALL {
        assert_eq!(n.as_str().parse::<SuiteName>().unwrap(), n);
        assert_eq!(n.to_string(), n.as_str());
    }
    assert!("nope".parse::<SuiteName>().is_err());
}

#[test]
fn same_seed_same_report() {
    for n in SuiteName::ALL {
        let a = run_suite(n, 12, 99).unwrap();
        let b = run_suite(n, 12, 99).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{n}");
        assert_eq!(a.passed, a.trials, "{n}: {:?}", a.failures().next());
        assert_eq!(a.outcomes.iter().map(|o| o.trial).collect::<Vec<_>>(), (0..12).collect::<Vec<_>>());
    }
}

#[test]
fn trial_streams_are_independent_of_trial_count() {
    let few = run_suite(SuiteName::Multiplicativity, 5, 3).unwrap();
    let many = run_suite(SuiteName::Multiplicativity, 20, 3).unwrap();
    assert_eq!(few.outcomes[..], many.outcomes[..5]);
    let x: u64 = trial_rng(3, 4).random();
    let y: u64 = trial_rng(3, 4).random();
    let z: u64 = trial_rng(3, 5).random();
    assert_eq!(x, y);
    assert_ne!(x, z);
}

#[test]
fn random_objects_are_well_formed() {
    for d in ["D2q:3", "D2q:5", "D2q:15", "S:4"] {
        let g = Group::from_descriptor(d).unwrap();
        for t in 0..10 {
            let mut rng = trial_rng(5, t);
            let theta = random_relation(&g, &mut rng).unwrap();
            assert!(!theta.is_zero() && theta.element().is_relation());
            let l = random_lattice(&g, &mut rng).unwrap();
            assert!(l.rank() > 0 && l.check_homomorphism(), "{d}");
        }
    }
    let c6 = Group::cyclic(6).unwrap();
    assert_eq!(relation_lattice(&c6).rank, 0);
    assert!(random_relation(&c6, &mut trial_rng(0, 0)).is_err());
}

#[test]
fn pairings_give_one_constant() {
    let g = Group::dihedral(5).unwrap();
    let theta = relation_lattice(&g).basis[0].clone();
    let l = random_lattice(&g, &mut trial_rng(8, 1)).unwrap();
    let cs = constants_under_random_pairings(&l, &theta, 6, 11).unwrap();
    assert!(cs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn report_json_shape() {
    let r = run_suite(SuiteName::RegConstIndex, 4, 7).unwrap();
    let j = r.to_json();
    assert_eq!(j["suite"], "regconstindex");
    assert_eq!(j["failed"], 0);
    assert_eq!(j["seed"], 7);
    assert_eq!(j["trials"], 4);
    assert_eq!(j["passed"], 4);
    assert_eq!(r.failed(), 0);
}
