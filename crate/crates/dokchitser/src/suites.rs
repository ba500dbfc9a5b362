//! Seeded property suites over random relations and lattices. Each trial has
//! its own ChaCha stream, so results do not depend on scheduling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::arith::{factor_rat, format_rat, log_exact, pow_rat, prime_divisors};
use crate::burnside::{induce, relation_lattice, restrict_along, subgroup_embedding, Relation};
use crate::dokchitser::{dok_injection, dok_pairing, i_invariant, trivial_prime_certificate};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::lattice::{averaged_pairing, ZGLattice};
use crate::sampling::random_stable_sublattice;
use crate::zoo::{standard_relation_on, zoo_lattice_on, ZooName};

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "DOKCHITSER_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TRIALS: usize = 200;

/// Seed from `DOKCHITSER_SEED`, or the built-in default.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuiteName {
    /// `C_{Θ1+Θ2} = C_Θ1 C_Θ2` and `C(Γ1 ⊕ Γ2) = C(Γ1) C(Γ2)`.
    Multiplicativity,
    /// `C_{Ind Θ}(Γ) = C_Θ(Res Γ)` and `C_Θ(Ind Γ) = C_{Res Θ}(Γ)` for `D6 <= D30`.
    RestrictionInduction,
    /// `C_Θ(Γ) = C_Θ(Γ^N)` when every subgroup in `Θ` contains the normal `N`.
    FixedSupport,
    /// `ord_l C = 0` for every certified trivial prime `l`.
    PrimeSupport,
    /// On `D_2p` every constant is a power of `p`.
    PowerLaw,
    /// `I(Γ) = p^{m_ε + m_τ - m_1}` on `D_2p`.
    RegConstIndex,
    /// Sublattices of index prime to `p` have the same constant.
    Genus,
    /// The constant does not depend on the invariant pairing.
    PairingIndependence,
    /// The injection definition agrees with the pairing definition.
    AltDefn,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Multiplicativity,
        SuiteName::RestrictionInduction,
        SuiteName::FixedSupport,
        SuiteName::PrimeSupport,
        SuiteName::PowerLaw,
        SuiteName::RegConstIndex,
        SuiteName::Genus,
        SuiteName::PairingIndependence,
        SuiteName::AltDefn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Multiplicativity => "multiplicativity",
            SuiteName::RestrictionInduction => "restriction_induction",
            SuiteName::FixedSupport => "fixed_support",
            SuiteName::PrimeSupport => "prime_support",
            SuiteName::PowerLaw => "power_law",
            SuiteName::RegConstIndex => "regconstindex",
            SuiteName::Genus => "genus",
            SuiteName::PairingIndependence => "pairing_independence",
            SuiteName::AltDefn => "altdefn",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: SuiteName,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    /// In trial order.
    pub outcomes: Vec<TrialOutcome>,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.trials - self.passed
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.outcomes.iter().filter(|o| !o.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.name.as_str(),
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failed": self.failed(),
            "failures": self.failures().map(|o| json!({"trial": o.trial, "detail": o.detail})).collect::<Vec<_>>(),
        })
    }
}

/// RNG for one trial: the suite seed selects the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `trials` seeded trials in parallel and reports them in trial order.
pub fn run_suite(name: SuiteName, trials: usize, seed: u64) -> Result<SuiteReport> {
    let ctx = Context::new()?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            match ctx.trial(name, &mut rng) {
                Ok((pass, detail)) => TrialOutcome { trial: t, pass, detail },
                Err(e) => TrialOutcome { trial: t, pass: false, detail: format!("error: {e}") },
            }
        })
        .collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    Ok(SuiteReport { name, seed, trials, passed, outcomes })
}

/// Groups shared by all trials.
struct Context {
    d6: Arc<Group>,
    d10: Arc<Group>,
    d30: Arc<Group>,
    s4: Arc<Group>,
}

type Trial = Result<(bool, String)>;

impl Context {
    fn new() -> Result<Self> {
        Ok(Context {
            d6: Group::dihedral(3)?,
            d10: Group::dihedral(5)?,
            d30: Group::dihedral(15)?,
            s4: Group::symmetric(4)?,
        })
    }

    fn trial(&self, name: SuiteName, rng: &mut ChaCha8Rng) -> Trial {
        match name {
            SuiteName::Multiplicativity => self.multiplicativity(rng),
            SuiteName::RestrictionInduction => self.restriction_induction(rng),
            SuiteName::FixedSupport => self.fixed_support(rng),
            SuiteName::PrimeSupport => self.prime_support(rng),
            SuiteName::PowerLaw => self.power_law(rng),
            SuiteName::RegConstIndex => self.regconstindex(rng),
            SuiteName::Genus => self.genus(rng),
            SuiteName::PairingIndependence => self.pairing_independence(rng),
            SuiteName::AltDefn => self.altdefn(rng),
        }
    }

    fn dihedral(&self, rng: &mut impl Rng) -> (&Arc<Group>, u64) {
        if rng.random_bool(0.5) {
            (&self.d6, 3)
        } else {
            (&self.d10, 5)
        }
    }

    fn any_group(&self, rng: &mut impl Rng) -> &Arc<Group> {
        [&self.d6, &self.d10, &self.d30, &self.s4].choose(rng).copied().expect("non-empty")
    }

    fn multiplicativity(&self, rng: &mut ChaCha8Rng) -> Trial {
        let g = self.any_group(rng);
        let t1 = random_relation(g, rng)?;
        let t2 = random_relation(g, rng)?;
        let l1 = random_lattice(g, rng)?;
        let l2 = random_lattice(g, rng)?;
        let c = |l: &ZGLattice, t: &Relation| dok_pairing(l, t, None).map(|c| c.value);
        let sum_rel = c(&l1, &t1.add(&t2)?)?;
        let prod_rel = c(&l1, &t1)? * c(&l1, &t2)?;
        let sum_lat = c(&l1.direct_sum(&l2)?, &t1)?;
        let prod_lat = c(&l1, &t1)? * c(&l2, &t1)?;
        Ok((
            sum_rel == prod_rel && sum_lat == prod_lat,
            format!(
                "{}: relations {} vs {}, lattices {} vs {}",
                g.descriptor(),
                format_rat(&sum_rel),
                format_rat(&prod_rel),
                format_rat(&sum_lat),
                format_rat(&prod_lat)
            ),
        ))
    }

    fn restriction_induction(&self, rng: &mut ChaCha8Rng) -> Trial {
        let g = &self.d30;
        let d6 = &g.subgroup_class(g.class_index("D6").expect("D30 has D6")).representative;
        let emb = subgroup_embedding(g, d6)?;
        let h = &emb.source;
        let theta_h = random_relation(h, rng)?;
        let theta_g = random_relation(g, rng)?;
        let gamma_g = random_lattice(g, rng)?;
        let gamma_h = random_lattice(h, rng)?;

        let a = dok_pairing(&gamma_g, &induce(&theta_h, &emb)?, None)?.value;
        let b = dok_pairing(&gamma_g.restrict(&emb)?, &theta_h, None)?.value;
        let c = dok_pairing(&gamma_h.induce(&emb)?, &theta_g, None)?.value;
        let d = dok_pairing(&gamma_h, &restrict_along(&theta_g, &emb)?, None)?.value;
        Ok((
            a == b && c == d,
            format!(
                "induced relation {} vs {}; induced lattice {} vs {}",
                format_rat(&a),
                format_rat(&b),
                format_rat(&c),
                format_rat(&d)
            ),
        ))
    }

    fn fixed_support(&self, rng: &mut ChaCha8Rng) -> Trial {
        // relations of D30 supported on subgroups containing C5 or C3
        let g = &self.d30;
        let (n, terms) = if rng.random_bool(0.5) {
            ("C5", [("C5", 1), ("D10", -2), ("C15", -1), ("G", 2)])
        } else {
            ("C3", [("C3", 1), ("D6", -2), ("C15", -1), ("G", 2)])
        };
        let theta =
            Relation::new(crate::burnside::BurnsideElement::from_labels(g, &terms)?)?.scale(rng.random_range(1..=2));
        let gamma = random_lattice(g, rng)?;
        let nrep = &g.subgroup_class(g.class_index(n).expect("class exists")).representative;
        let fixed = gamma.span_sublattice(&gamma.fixed_sublattice(nrep))?;
        let a = dok_pairing(&gamma, &theta, None)?.value;
        let b = dok_pairing(&fixed, &theta, None)?.value;
        Ok((a == b, format!("N = {n}: {} vs {}", format_rat(&a), format_rat(&b))))
    }

    fn prime_support(&self, rng: &mut ChaCha8Rng) -> Trial {
        let g = self.any_group(rng);
        let theta = random_relation(g, rng)?;
        let gamma = random_lattice(g, rng)?;
        let c = dok_pairing(&gamma, &theta, None)?.value;
        let cert = trivial_prime_certificate(g);
        let support = factor_rat(&c);
        let allowed = prime_divisors(g.order() as u64);
        let ok = support.iter().all(|(p, e)| *e == 0 || (allowed.contains(p) && !cert.is_certified(*p)));
        Ok((ok, format!("{}: C = {}", g.descriptor(), format_rat(&c))))
    }

    fn power_law(&self, rng: &mut ChaCha8Rng) -> Trial {
        let (g, p) = self.dihedral(rng);
        let theta = standard_relation_on(g, p)?;
        let gamma = random_lattice(g, rng)?;
        let c = dok_pairing(&gamma, &theta, None)?.value;
        Ok((log_exact(&c, p).is_some(), format!("p = {p}: C = {}", format_rat(&c))))
    }

    fn regconstindex(&self, rng: &mut ChaCha8Rng) -> Trial {
        let (g, p) = self.dihedral(rng);
        let theta = standard_relation_on(g, p)?;
        let gamma = random_lattice(g, rng)?;
        let i = i_invariant(&gamma, &theta)?;
        let (m1, me, mt) = gamma.rational_multiplicities_d2p()?;
        let want = pow_rat(p, me as i64 + mt as i64 - m1 as i64);
        Ok((i == want, format!("p = {p}, (m1, me, mt) = ({m1}, {me}, {mt}): I = {}", format_rat(&i))))
    }

    fn genus(&self, rng: &mut ChaCha8Rng) -> Trial {
        let (g, p) = self.dihedral(rng);
        let theta = standard_relation_on(g, p)?;
        let gamma = random_lattice(g, rng)?;
        let coprime: Vec<u64> = [2u64, 4, 8, 3, 9, 5, 7, 11].into_iter().filter(|m| m % p != 0).collect();
        let modulus = *coprime.choose(rng).expect("non-empty");
        let sub = random_stable_sublattice(&gamma, rng, modulus)?;
        let a = dok_pairing(&gamma, &theta, None)?.value;
        let b = dok_pairing(&sub, &theta, None)?.value;
        Ok((a == b, format!("p = {p}, modulus {modulus}: {} vs {}", format_rat(&a), format_rat(&b))))
    }

    fn pairing_independence(&self, rng: &mut ChaCha8Rng) -> Trial {
        let g = self.any_group(rng);
        let theta = random_relation(g, rng)?;
        let gamma = random_lattice(g, rng)?;
        let pairing = averaged_pairing(&gamma, Some(rng));
        let a = dok_pairing(&gamma, &theta, None)?.value;
        let b = dok_pairing(&gamma, &theta, Some(&pairing))?.value;
        Ok((a == b, format!("{}: {} vs {}", g.descriptor(), format_rat(&a), format_rat(&b))))
    }

    fn altdefn(&self, rng: &mut ChaCha8Rng) -> Trial {
        let (g, p) = self.dihedral(rng);
        let theta = standard_relation_on(g, p)?;
        let gamma = random_lattice(g, rng)?;
        let a = dok_pairing(&gamma, &theta, None)?.value;
        let b = dok_injection(&gamma, &theta, None)?.value;
        Ok((a == b, format!("p = {p}: pairing {} injection {}", format_rat(&a), format_rat(&b))))
    }
}

/// A non-zero relation: a random small combination of the basis.
pub fn random_relation(g: &Arc<Group>, rng: &mut impl Rng) -> Result<Relation> {
    let basis = relation_lattice(g);
    if basis.rank == 0 {
        return Err(Error::Unsupported(format!("{} has no non-zero relations", g.descriptor())));
    }
    loop {
        let mut theta = Relation::zero(g);
        for b in &basis.basis {
            theta = theta.add(&b.scale(rng.random_range(-2..=2)))?;
        }
        if !theta.is_zero() {
            return Ok(theta);
        }
    }
}

/// A random lattice: a sum of one or two building blocks, then with
/// probability one half a random stable sublattice. On `D2q:p` the blocks are
/// zoo lattices; on other groups they are permutation lattices of rank at most 12.
pub fn random_lattice(g: &Arc<Group>, rng: &mut impl Rng) -> Result<ZGLattice> {
    let parts = rng.random_range(1..=2);
    let mut blocks = Vec::with_capacity(parts);
    let zoo = g.dihedral_q().filter(|&q| crate::arith::is_prime(q as u64) && q > 2).is_some();
    for _ in 0..parts {
        if zoo {
            let name = *ZooName::ALL.choose(rng).expect("non-empty");
            blocks.push(zoo_lattice_on(g, name)?);
        } else {
            let small: Vec<usize> =
                (0..g.subgroup_classes().len()).filter(|&c| g.order() / g.subgroup_class(c).order <= 12).collect();
            let c = *small.choose(rng).expect("G itself qualifies");
            blocks.push(ZGLattice::permutation_class(g, c));
        }
    }
    let l = ZGLattice::direct_sum_all(g, &blocks)?;
    if rng.random_bool(0.5) {
        let m = rng.random_range(2..=6);
        random_stable_sublattice(&l, rng, m)
    } else {
        Ok(l)
    }
}

/// Constants of a lattice under several random pairings, for cross-checks.
pub fn constants_under_random_pairings(
    l: &ZGLattice,
    theta: &Relation,
    count: usize,
    seed: u64,
) -> Result<Vec<BigRational>> {
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let pairing = averaged_pairing(l, Some(&mut rng));
            dok_pairing(l, theta, Some(&pairing)).map(|c| c.value)
        })
        .collect()
}
