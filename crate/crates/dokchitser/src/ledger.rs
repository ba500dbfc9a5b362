//! Audits of precomputed number-field data: the S-unit pairing, the analytic
//! class number relation, the regulator-constant identity, the dihedral unit
//! index formula, the `D_2q` chain and Galois-module identification.
//!
//! Class numbers, ranks, `w`, `lambda` and indices are exact integers and
//! every identity built from them alone is checked exactly. Regulators and
//! logarithms are decimals and are compared with a relative tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{factor_rat, format_rat, is_prime, pow_rat, valuation_rat};
use crate::burnside::{BurnsideElement, Relation};
use crate::dokchitser::{dok_pairing, trivial_prime_certificate};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::lattice::{LatticeJson, ZGLattice};
use crate::linalg::{det_rat, RatMatrix};
use crate::zoo::{zoo_lattice_on, ZooName};

pub const SCHEMA: &str = "dokchitser-fixture/1";
/// Default relative tolerance for the class number and pairing identities.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default relative tolerance for the regulator-constant identity.
pub const NEWREG_TOL: f64 = 1e-6;

/// Invariants of one intermediate field `F^H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecord {
    #[serde(rename = "h_S")]
    pub h_s: u64,
    pub w: u64,
    #[serde(rename = "r_S")]
    pub r_s: u64,
    #[serde(rename = "R_S")]
    pub reg: f64,
    pub lambda: u64,
}

/// A place of `k` below `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SPrime {
    pub e: u64,
    pub f: u64,
    pub archimedean: bool,
    /// Subgroup-class label of the decomposition group.
    pub decomposition_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_prime: Option<u64>,
}

/// How `F` arises from `K` or `L` by adjoining roots of fundamental S-units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseFlag {
    #[default]
    #[serde(rename = "none")]
    None,
    #[serde(rename = "sqrt_unit")]
    SqrtUnit,
    #[serde(rename = "proot_unit_L")]
    ProotUnitL,
    #[serde(rename = "proot_unit_notL")]
    ProotUnitNotL,
}

/// A place of `F` in `S`, as a column of the log matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Place {
    pub e: u64,
    pub f: u64,
    pub archimedean: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_prime: Option<u64>,
}

/// `log ||u_i||_P` for the fundamental S-units of `F` (rows) and the places of `S` (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitLogs {
    pub places: Vec<Place>,
    pub rows: Vec<Vec<f64>>,
}

/// One `D_2p` layer `K_j / L_{j-1}` of a `D_2q` chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainLayer {
    pub p: u64,
    /// `[U(K_j) : U(K_{j-1}) U(L_j) U(L_j')]`.
    pub unit_index: u64,
    /// `[U(L_n) U(L_n') U(K_{j-1}) ∩ U(K_j) : U(L_j) U(L_j') U(K_{j-1})]`.
    pub correction_index: u64,
    #[serde(default)]
    pub a: u64,
    #[serde(default)]
    pub case_flag: CaseFlag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub layers: Vec<ChainLayer>,
    /// `[U(F) : U(L) U(L') U(K)]`.
    pub total_unit_index: u64,
}

/// The on-disk form of a fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureData {
    pub schema: String,
    pub provenance: String,
    pub group: String,
    /// Keyed by subgroup-class label `H`, describing `F^H`.
    pub fields: BTreeMap<String, FieldRecord>,
    pub s_primes_of_k: Vec<SPrime>,
    #[serde(default)]
    pub case_flag: CaseFlag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_unit_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_logs: Option<UnitLogs>,
    /// Action of the generators on the fundamental S-units of `F`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_action: Option<LatticeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Chain>,
}

/// A validated fixture. Immutable after loading.
#[derive(Clone, Debug)]
pub struct FieldFixture {
    data: FixtureData,
    group: Arc<Group>,
}

fn reject(msg: impl Into<String>) -> Error {
    Error::Fixture(msg.into())
}

/// Reads and validates a fixture file.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<FieldFixture> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
    FieldFixture::from_json_str(&text).map_err(|e| match e {
        Error::Fixture(m) => Error::Fixture(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl FieldFixture {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let data: FixtureData = serde_json::from_str(text).map_err(|e| reject(format!("schema violation: {e}")))?;
        Self::from_data(data)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let data: FixtureData = serde_json::from_value(value).map_err(|e| reject(format!("schema violation: {e}")))?;
        Self::from_data(data)
    }

    pub fn from_data(data: FixtureData) -> Result<Self> {
        if data.schema != SCHEMA {
            return Err(reject(format!("schema is `{}`, expected `{SCHEMA}`", data.schema)));
        }
        if data.provenance.trim().is_empty() {
            return Err(reject("provenance must name the generating tool and inputs"));
        }
        let group = Group::from_descriptor(&data.group)?;
        let f = FieldFixture { data, group };
        f.validate()?;
        Ok(f)
    }

    pub fn data(&self) -> &FixtureData {
        &self.data
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn provenance(&self) -> &str {
        &self.data.provenance
    }

    pub fn field(&self, label: &str) -> Result<&FieldRecord> {
        self.data.fields.get(label).ok_or_else(|| reject(format!("missing field record `{label}`")))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(&self.data).expect("fixture data serializes")
    }

    /// `p` when the group is `D2q:p` with `p` an odd prime.
    fn dihedral_prime(&self) -> Option<u64> {
        self.group.dihedral_q().map(|q| q as u64).filter(|&q| q > 2 && is_prime(q))
    }

    fn validate(&self) -> Result<()> {
        let g = &self.group;
        let d = &self.data;
        for (label, rec) in &d.fields {
            if g.class_index(label).is_none() {
                return Err(reject(format!("field key `{label}` is not a subgroup class of {}", g.descriptor())));
            }
            if rec.h_s == 0 || rec.w == 0 || rec.lambda == 0 {
                return Err(reject(format!("field `{label}`: h_S, w and lambda must be positive")));
            }
            if !(rec.reg.is_finite() && rec.reg > 0.0) {
                return Err(reject(format!("field `{label}`: R_S must be a positive decimal")));
            }
        }
        if d.s_primes_of_k.is_empty() {
            return Err(reject("S is empty; it must contain the Archimedean places"));
        }
        if !d.s_primes_of_k.iter().any(|s| s.archimedean) {
            return Err(reject("S contains no Archimedean place"));
        }
        let mut decomposition = Vec::with_capacity(d.s_primes_of_k.len());
        for (i, s) in d.s_primes_of_k.iter().enumerate() {
            if s.e == 0 || s.f == 0 {
                return Err(reject(format!("s_primes_of_k[{i}]: e and f must be positive")));
            }
            let c = g.class_index(&s.decomposition_class).ok_or_else(|| {
                reject(format!("s_primes_of_k[{i}]: `{}` is not a subgroup class", s.decomposition_class))
            })?;
            decomposition.push(g.subgroup_class(c).representative.clone());
        }

        // places of F^H above a place of k with decomposition group D: |H \ G / D|
        for (label, rec) in &d.fields {
            let h = &g.subgroup_class(g.class_index(label).expect("checked")).representative;
            let places: usize = decomposition.iter().map(|dp| g.double_cosets(h, dp).representatives.len()).sum();
            if rec.r_s as usize + 1 != places {
                return Err(reject(format!(
                    "field `{label}`: r_S = {} but S has {places} places there, so r_S should be {}",
                    rec.r_s,
                    places - 1
                )));
            }
        }

        if let Some(q) = g.dihedral_q() {
            let cq = format!("C{q}");
            for (top, bottom) in [("1", cq.as_str()), ("C2", "G")] {
                if let (Some(a), Some(b)) = (d.fields.get(top), d.fields.get(bottom)) {
                    if a.w != b.w {
                        return Err(reject(format!(
                            "w(F^{top}) = {} differs from w(F^{bottom}) = {}; a dihedral extension forces equality",
                            a.w, b.w
                        )));
                    }
                }
            }
        }

        if d.case_flag != CaseFlag::None && self.dihedral_prime().is_none() {
            return Err(reject("case_flag other than `none` needs a D2q:p group with p an odd prime"));
        }
        let profile = lambda_profile(g, d.case_flag);
        for (label, rec) in &d.fields {
            let want = profile.get(label).copied().unwrap_or(1);
            if rec.lambda != want {
                return Err(reject(format!(
                    "field `{label}`: lambda = {} but case `{}` requires {want}",
                    rec.lambda,
                    case_name(d.case_flag)
                )));
            }
        }

        if let Some(logs) = &d.unit_logs {
            let rf = self.field("1").map_err(|_| reject("unit_logs need the field record `1` for F"))?.r_s as usize;
            if logs.places.len() != rf + 1 {
                return Err(reject(format!("unit_logs: {} places but r_S(F) + 1 = {}", logs.places.len(), rf + 1)));
            }
            if logs.rows.len() != rf {
                return Err(reject(format!("unit_logs: {} units but r_S(F) = {rf}", logs.rows.len())));
            }
            for (i, row) in logs.rows.iter().enumerate() {
                if row.len() != logs.places.len() || row.iter().any(|x| !x.is_finite()) {
                    return Err(reject(format!("unit_logs.rows[{i}] has the wrong length or a non-finite entry")));
                }
            }
            if logs.places.iter().any(|p| p.e == 0 || p.f == 0) {
                return Err(reject("unit_logs: e and f must be positive"));
            }
        }

        if let Some(action) = &d.unit_action {
            let l = ZGLattice::from_json_on(g, action)?;
            if !l.check_homomorphism() {
                return Err(Error::NotAHomomorphism("unit_action".into()));
            }
            if let Some(rec) = d.fields.get("1") {
                if rec.r_s as usize != l.rank() {
                    return Err(reject(format!("unit_action has rank {} but r_S(F) = {}", l.rank(), rec.r_s)));
                }
            }
        }
        if d.observed_unit_index == Some(0) {
            return Err(reject("observed_unit_index must be positive"));
        }
        if let Some(chain) = &d.chain {
            if chain.layers.iter().any(|l| !is_prime(l.p) || l.p == 2 || l.unit_index == 0 || l.correction_index == 0) {
                return Err(reject("chain layers need odd primes and positive indices"));
            }
            if chain.total_unit_index == 0 {
                return Err(reject("chain total_unit_index must be positive"));
            }
        }
        Ok(())
    }

    /// The unit lattice `U_S(F)` modulo torsion with its Galois action.
    pub fn unit_lattice(&self) -> Result<ZGLattice> {
        let action = self.data.unit_action.as_ref().ok_or_else(|| reject("fixture has no unit_action"))?;
        ZGLattice::from_json_on(&self.group, action)
    }

    /// `1 - 2*C2 - Cq + 2*G` for a `D2q:q` fixture.
    pub fn standard_relation(&self) -> Result<Relation> {
        let q = self
            .group
            .dihedral_q()
            .ok_or_else(|| Error::Unsupported("the standard relation needs a dihedral group".into()))?;
        let cq = format!("C{q}");
        Relation::new(BurnsideElement::from_labels(&self.group, &[("1", 1), ("C2", -2), (cq.as_str(), -1), ("G", 2)])?)
    }
}

fn case_name(c: CaseFlag) -> &'static str {
    match c {
        CaseFlag::None => "none",
        CaseFlag::SqrtUnit => "sqrt_unit",
        CaseFlag::ProotUnitL => "proot_unit_L",
        CaseFlag::ProotUnitNotL => "proot_unit_notL",
    }
}

/// `lambda(H)` forced by the case analysis, for `H` in `1, C2, Cq, G`.
/// Non-dihedral groups get an empty map (every `lambda` is 1).
pub fn lambda_profile(group: &Group, case: CaseFlag) -> BTreeMap<String, u64> {
    let Some(q) = group.dihedral_q() else { return BTreeMap::new() };
    let p = q as u64;
    let (l1, lc2, lcp, lg) = match case {
        CaseFlag::None => (1, 1, 1, 1),
        CaseFlag::SqrtUnit => (1, 2, 1, 2),
        CaseFlag::ProotUnitL => (1, 1, p, p),
        CaseFlag::ProotUnitNotL => (1, 1, p, 1),
    };
    BTreeMap::from([("1".into(), l1), ("C2".into(), lc2), (format!("C{q}"), lcp), ("G".into(), lg)])
}

/// `a(F/k,S)`, `delta` and the `lambda` profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralInvariants {
    pub a: u64,
    pub delta: u64,
    pub lambda_profile: BTreeMap<String, u64>,
}

pub fn structural_invariants(f: &FieldFixture) -> StructuralInvariants {
    let a = f.data.s_primes_of_k.iter().filter(|s| s.decomposition_class == "G").count() as u64;
    let delta = if f.data.case_flag == CaseFlag::ProotUnitL { 3 } else { 1 };
    StructuralInvariants { a, delta, lambda_profile: lambda_profile(&f.group, f.data.case_flag) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_pass() { "pass" } else { "fail" })
    }
}

/// Two sides of an identity compared in floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    /// The part of the identity that is derivable from integers alone.
    pub exact_quotient: Option<BigRational>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl QuotientReport {
    fn new(lhs: f64, rhs: f64, tolerance: f64, exact_quotient: Option<BigRational>) -> Self {
        let relative_error = relative_error(lhs, rhs);
        QuotientReport {
            lhs,
            rhs,
            relative_error,
            tolerance,
            exact_quotient,
            verdict: Verdict::from_bool(relative_error <= tolerance),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relative_error": self.relative_error,
            "tolerance": self.tolerance,
            "exact_quotient": self.exact_quotient.as_ref().map(format_rat),
            "verdict": self.verdict,
            "notes": self.notes,
        })
    }
}

fn relative_error(lhs: f64, rhs: f64) -> f64 {
    if !(lhs.is_finite() && rhs.is_finite()) {
        return f64::INFINITY;
    }
    if rhs == 0.0 {
        lhs.abs()
    } else {
        (lhs - rhs).abs() / rhs.abs()
    }
}

fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn rat_pow(x: &BigRational, k: i64) -> BigRational {
    let base = if k < 0 { x.recip() } else { x.clone() };
    (0..k.unsigned_abs()).fold(BigRational::one(), |acc, _| acc * &base)
}

fn records_for<'a>(f: &'a FieldFixture, theta: &Relation) -> Result<Vec<(&'a FieldRecord, i64)>> {
    if **theta.group() != *f.group {
        return Err(Error::GroupMismatch("relation and fixture live on different groups".into()));
    }
    let g = &f.group;
    theta
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| Ok((f.field(&g.subgroup_class(i).label)?, c)))
        .collect()
}

/// `prod h_S(F^{H_i})^{n_i}`, exactly.
pub fn class_number_quotient(f: &FieldFixture, theta: &Relation) -> Result<BigRational> {
    Ok(records_for(f, theta)?
        .into_iter()
        .fold(BigRational::one(), |acc, (r, c)| acc * rat_pow(&BigRational::from_integer(r.h_s.into()), c)))
}

/// `prod (h_S R_S / w)^{n_i} = 1`: positive against negative coefficients.
pub fn class_number_identity_check(f: &FieldFixture, theta: &Relation, tol: f64) -> Result<QuotientReport> {
    let recs = records_for(f, theta)?;
    let (mut lhs, mut rhs) = (1.0f64, 1.0f64);
    let mut exact = BigRational::one();
    for (r, c) in &recs {
        let term = r.h_s as f64 * r.reg / r.w as f64;
        let k = c.unsigned_abs() as i32;
        if *c > 0 {
            lhs *= term.powi(k);
        } else {
            rhs *= term.powi(k);
        }
        exact *= rat_pow(&BigRational::new(r.h_s.into(), r.w.into()), *c);
    }
    let mut report = QuotientReport::new(lhs, rhs, tol, Some(exact));
    report.notes.push(format!("class number quotient {}", format_rat(&class_number_quotient(f, theta)?)));
    Ok(report)
}

/// Exponent and predicted index for one `D_2p` layer.
fn layer_prediction(
    p: u64,
    r: [u64; 3],
    hq: &BigRational,
    a: u64,
    delta: u64,
) -> Result<(BigRational, Option<BigRational>)> {
    let [rk, rkk, rf] = r;
    if rf < rkk || (rf - rkk) % (p - 1) != 0 {
        return Err(reject(format!("ranks r_S(F) = {rf}, r_S(K) = {rkk} are not compatible with p = {p}")));
    }
    let num = 2 * rk as i64 - rkk as i64 - ((rf - rkk) / (p - 1)) as i64 + a as i64 - delta as i64;
    let exponent = BigRational::new(num.into(), 2.into());
    let predicted = exponent.is_integer().then(|| hq / pow_rat(p, exponent.to_integer().to_i64().expect("small")));
    Ok((exponent, predicted))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitIndexReport {
    pub p: u64,
    pub exponent: BigRational,
    pub class_number_quotient: BigRational,
    /// `None` when the exponent is not an integer.
    pub predicted_index: Option<BigRational>,
    pub observed_unit_index: Option<u64>,
    pub integral: bool,
    pub verdict: Verdict,
}

impl UnitIndexReport {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "exponent": format_rat(&self.exponent),
            "class_number_quotient": format_rat(&self.class_number_quotient),
            "predicted_index": self.predicted_index.as_ref().map(format_rat),
            "observed_unit_index": self.observed_unit_index,
            "integral": self.integral,
            "verdict": self.verdict,
        })
    }
}

/// `[U_S(F) : U_S(K) U_S(L) U_S(L')] = h-quotient / p^e` with
/// `e = (2r(k) - r(K) - (r(F) - r(K))/(p-1) + a - delta) / 2`.
pub fn unit_index_prediction(f: &FieldFixture) -> Result<UnitIndexReport> {
    let p = f.dihedral_prime().ok_or_else(|| Error::Unsupported("unit index prediction needs D2q:p".into()))?;
    let cp = format!("C{p}");
    let (rf, rk, rkk) = (f.field("1")?.r_s, f.field("G")?.r_s, f.field(&cp)?.r_s);
    f.field("C2")?;
    let hq = class_number_quotient(f, &f.standard_relation()?)?;
    let inv = structural_invariants(f);
    let (exponent, predicted) = layer_prediction(p, [rk, rkk, rf], &hq, inv.a, inv.delta)?;
    let integral = predicted.as_ref().is_some_and(|x| x.is_integer() && *x > BigRational::zero());
    let matches = match (f.data.observed_unit_index, &predicted) {
        (Some(o), Some(x)) => *x == BigRational::from_integer(o.into()),
        (Some(_), None) => false,
        (None, _) => true,
    };
    Ok(UnitIndexReport {
        p,
        exponent,
        class_number_quotient: hq,
        predicted_index: predicted,
        observed_unit_index: f.data.observed_unit_index,
        integral,
        verdict: Verdict::from_bool(integral && matches),
    })
}

/// `det <u_i, u_j> = (sum e f / prod e f) R_S(F)^2`, plus the product formula on each row.
pub fn s_unit_pairing_check(f: &FieldFixture, tol: f64) -> Result<QuotientReport> {
    let logs = f.data.unit_logs.as_ref().ok_or_else(|| reject("fixture has no unit_logs"))?;
    let reg = f.field("1")?.reg;
    let r = logs.rows.len();
    let exact = |x: f64| BigRational::from_float(x).expect("finite");
    let weight: Vec<BigRational> = logs.places.iter().map(|p| BigRational::from_integer((p.e * p.f).into())).collect();
    let gram = RatMatrix::from_fn(r, r, |i, j| {
        logs.rows[i]
            .iter()
            .zip(&logs.rows[j])
            .zip(&weight)
            .map(|((x, y), w)| exact(*x) * exact(*y) / w)
            .fold(BigRational::zero(), |a, b| a + b)
    });
    let lhs = rat_to_f64(&det_rat(&gram));
    let sum: BigRational = weight.iter().fold(BigRational::zero(), |a, b| a + b);
    let prod: BigRational = weight.iter().fold(BigRational::one(), |a, b| a * b);
    let rhs = rat_to_f64(&(sum / prod)) * reg * reg;
    let mut report = QuotientReport::new(lhs, rhs, tol, None);

    let scale = logs.rows.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let residual = logs.rows.iter().map(|row| row.iter().sum::<f64>().abs()).fold(0.0f64, f64::max) / scale;
    report.notes.push(format!("product formula residual {residual:.3e}"));
    if residual > tol {
        report.verdict = Verdict::Fail;
        report.notes.push("product formula fails".into());
    }
    Ok(report)
}

/// `C(U_S(F))` computed exactly from the unit action, against
/// `C(1) / prod_p C(Z[G/D_p]) * prod (R_S / lambda)^{2 n_i}` from the field records.
pub fn newreg_identity_check(f: &FieldFixture, theta: &Relation, tol: f64) -> Result<QuotientReport> {
    let units = f.unit_lattice()?;
    let g = &f.group;
    let recs = records_for(f, theta)?;
    let c_units = dok_pairing(&units, theta, None)?.value;
    let c_one = dok_pairing(&ZGLattice::trivial(g), theta, None)?.value;
    let mut decomposition = BigRational::one();
    for s in &f.data.s_primes_of_k {
        let class = g.class_index(&s.decomposition_class).expect("validated");
        decomposition *= dok_pairing(&ZGLattice::permutation_class(g, class), theta, None)?.value;
    }
    let prefactor = c_one / &decomposition;
    let regs: f64 = recs.iter().map(|(r, c)| (r.reg / r.lambda as f64).powi(2 * *c as i32)).product();
    let mut report = QuotientReport::new(rat_to_f64(&c_units), rat_to_f64(&prefactor) * regs, tol, Some(prefactor));
    report.notes.push(format!("C(U_S(F)) = {}", format_rat(&c_units)));
    report.notes.push(format!("prod over S of C(Z[G/D_p]) = {}", format_rat(&decomposition)));
    Ok(report)
}

/// The `p`-part of the class number quotient for every certified trivial prime.
#[derive(Clone, Debug, PartialEq)]
pub struct NoPReport {
    pub class_number_quotient: BigRational,
    /// `(p, ord_p)` for each certified prime examined.
    pub checked: Vec<(u64, i64)>,
    pub uncertified: Vec<u64>,
    pub verdict: Verdict,
}

impl NoPReport {
    pub fn to_json(&self) -> Value {
        json!({
            "class_number_quotient": format_rat(&self.class_number_quotient),
            "checked": self.checked.iter().map(|(p, v)| json!({"p": p, "ord": v})).collect::<Vec<_>>(),
            "uncertified": self.uncertified,
            "verdict": self.verdict,
        })
    }
}

/// For every prime certified trivial for the group, `ord_p` of `prod h_S^{n_i}` is 0.
pub fn no_p_in_reg_check(f: &FieldFixture, theta: &Relation) -> Result<NoPReport> {
    let hq = class_number_quotient(f, theta)?;
    let cert = trivial_prime_certificate(&f.group);
    let mut primes: Vec<u64> = cert.witnesses.keys().copied().collect();
    primes.extend(factor_rat(&hq).into_keys().filter(|&p| cert.is_certified(p)));
    primes.sort_unstable();
    primes.dedup();
    let checked: Vec<(u64, i64)> = primes.into_iter().map(|p| (p, valuation_rat(&hq, p))).collect();
    let verdict = Verdict::from_bool(checked.iter().all(|(_, v)| *v == 0));
    Ok(NoPReport { class_number_quotient: hq, checked, uncertified: cert.uncertified.clone(), verdict })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerReport {
    pub p: u64,
    /// Labels of `K_j`, `L_{j-1}`, `K_{j-1}`, `L_j`.
    pub fields: [String; 4],
    pub class_number_quotient: BigRational,
    pub exponent: BigRational,
    pub predicted_index: Option<BigRational>,
    pub unit_index: u64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub layers: Vec<LayerReport>,
    /// `h(F) h(k)^2 / (h(K) h(L)^2)` against `prod p_j^{w_j} [layer index]`.
    pub report: QuotientReport,
    /// `prod [layer index] = [U(F) : U(L) U(L') U(K)] * prod [correction]`.
    pub correction_holds: bool,
    pub verdict: Verdict,
}

impl ChainReport {
    pub fn to_json(&self) -> Value {
        json!({
            "layers": self.layers.iter().map(|l| json!({
                "p": l.p,
                "fields": l.fields,
                "class_number_quotient": format_rat(&l.class_number_quotient),
                "exponent": format_rat(&l.exponent),
                "predicted_index": l.predicted_index.as_ref().map(format_rat),
                "unit_index": l.unit_index,
                "consistent": l.consistent,
            })).collect::<Vec<_>>(),
            "identity": self.report.to_json(),
            "correction_holds": self.correction_holds,
            "verdict": self.verdict,
        })
    }
}

fn rotation_label(m: usize) -> String {
    if m == 1 {
        "1".into()
    } else {
        format!("C{m}")
    }
}

fn dihedral_label(q: usize, m: usize) -> String {
    if m == q {
        "G".into()
    } else if m == 1 {
        "C2".into()
    } else {
        format!("D{}", 2 * m)
    }
}

/// Evaluates the `D_2q` class number quotient as a product over the layers
/// `K_j / L_{j-1}` (each a `D_2p_j` extension) and checks the correction-term identity.
pub fn d2q_chain_evaluation(f: &FieldFixture, tol: f64) -> Result<ChainReport> {
    let q = f.group.dihedral_q().ok_or_else(|| Error::Unsupported("chain evaluation needs D2q:q".into()))?;
    let chain = f.data.chain.as_ref().ok_or_else(|| reject("fixture has no chain section"))?;
    let mut remaining = q as u64;
    for layer in &chain.layers {
        if remaining % layer.p != 0 {
            return Err(reject(format!("layer prime {} does not divide what is left of q = {q}", layer.p)));
        }
        remaining /= layer.p;
    }
    if remaining != 1 {
        return Err(reject(format!(
            "missing layer: the layer primes multiply to {} but q = {q}",
            q as u64 / remaining
        )));
    }

    let mut eps = 1usize;
    let mut layers = Vec::with_capacity(chain.layers.len());
    let mut product = BigRational::one();
    for (j, layer) in chain.layers.iter().enumerate() {
        let prev = eps;
        eps *= layer.p as usize;
        let labels = [
            rotation_label(q / eps),
            dihedral_label(q, q / prev),
            rotation_label(q / prev),
            dihedral_label(q, q / eps),
        ];
        let rec = |i: usize| {
            f.field(&labels[i]).map_err(|_| reject(format!("missing layer-{} record `{}`", j + 1, labels[i])))
        };
        let (top, base, quad, deg_p) = (rec(0)?, rec(1)?, rec(2)?, rec(3)?);
        let h = |r: &FieldRecord| BigRational::from_integer(r.h_s.into());
        let hq = h(top) * h(base) * h(base) / (h(quad) * h(deg_p) * h(deg_p));
        let delta = if layer.case_flag == CaseFlag::ProotUnitL { 3 } else { 1 };
        let (exponent, predicted) = layer_prediction(layer.p, [base.r_s, quad.r_s, top.r_s], &hq, layer.a, delta)?;
        let index = BigRational::from_integer(layer.unit_index.into());
        let consistent = predicted.as_ref() == Some(&index);
        if let Some(e) = exponent.is_integer().then(|| exponent.to_integer().to_i64().expect("small")) {
            product *= pow_rat(layer.p, e) * &index;
        } else {
            product = BigRational::zero();
        }
        layers.push(LayerReport {
            p: layer.p,
            fields: labels,
            class_number_quotient: hq,
            exponent,
            predicted_index: predicted,
            unit_index: layer.unit_index,
            consistent,
        });
    }

    let hq_total = class_number_quotient(f, &f.standard_relation()?)?;
    let mut report = QuotientReport::new(rat_to_f64(&hq_total), rat_to_f64(&product), tol, Some(hq_total.clone()));
    if hq_total != product {
        report.verdict = Verdict::Fail;
        report.notes.push("exact product over layers differs from the class number quotient".into());
    }
    let lhs: BigInt = chain.layers.iter().map(|l| BigInt::from(l.unit_index)).product();
    let rhs: BigInt =
        chain.layers.iter().map(|l| BigInt::from(l.correction_index)).product::<BigInt>() * chain.total_unit_index;
    let correction_holds = lhs == rhs;
    let verdict =
        Verdict::from_bool(report.verdict.is_pass() && correction_holds && layers.iter().all(|l| l.consistent));
    Ok(ChainReport { layers, report, correction_holds, verdict })
}

/// Genus representatives of indecomposable `Z D_2p`-lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenusType {
    Triv,
    Eps,
    Rho,
    A,
    Aprime,
    ExtAprime1,
    ExtAEps,
    ExtARho,
    ExtAprimeRho,
    Regular,
}

impl GenusType {
    pub const ALL: [GenusType; 10] = [
        GenusType::Triv,
        GenusType::Eps,
        GenusType::Rho,
        GenusType::A,
        GenusType::Aprime,
        GenusType::ExtAprime1,
        GenusType::ExtAEps,
        GenusType::ExtARho,
        GenusType::ExtAprimeRho,
        GenusType::Regular,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            GenusType::ExtARho => "(A,ρ)",
            GenusType::ExtAprimeRho => "(A′,ρ)",
            other => other.zoo_name().expect("constructible").symbol(),
        }
    }

    /// Multiplicities of `1`, `ε` and `τ` in the rational representation.
    pub fn multiplicities(self) -> (usize, usize, usize) {
        match self {
            GenusType::Triv => (1, 0, 0),
            GenusType::Eps => (0, 1, 0),
            GenusType::Rho => (1, 1, 0),
            GenusType::A | GenusType::Aprime => (0, 0, 1),
            GenusType::ExtAprime1 => (1, 0, 1),
            GenusType::ExtAEps => (0, 1, 1),
            GenusType::ExtARho | GenusType::ExtAprimeRho => (1, 1, 1),
            GenusType::Regular => (1, 1, 2),
        }
    }

    /// The lattice in the zoo, for the eight types with an explicit construction.
    pub fn zoo_name(self) -> Option<ZooName> {
        Some(match self {
            GenusType::Triv => ZooName::Triv,
            GenusType::Eps => ZooName::Eps,
            GenusType::Rho => ZooName::Rho,
            GenusType::A => ZooName::A,
            GenusType::Aprime => ZooName::Aprime,
            GenusType::ExtAprime1 => ZooName::ExtAprime1,
            GenusType::ExtAEps => ZooName::ExtAEps,
            GenusType::Regular => ZooName::Regular,
            GenusType::ExtARho | GenusType::ExtAprimeRho => return None,
        })
    }

    /// Genus of the kernel of a surjection onto `1`, for types with one trivial constituent.
    pub fn trivial_kernel(self) -> Option<Vec<GenusType>> {
        Some(match self {
            GenusType::Triv => vec![],
            GenusType::Rho => vec![GenusType::Eps],
            GenusType::ExtAprime1 => vec![GenusType::Aprime],
            GenusType::ExtARho => vec![GenusType::ExtAEps],
            GenusType::ExtAprimeRho => vec![GenusType::Eps, GenusType::Aprime],
            GenusType::Regular => vec![GenusType::Aprime, GenusType::ExtAEps],
            _ => return None,
        })
    }
}

/// Constants of all ten genus types for the standard relation on `D2q:p`.
/// The two extension types have no explicit construction; their constants
/// `1/p` and `p` are the ones certified by [`crate::zoo::extension_search`].
pub fn genus_constants(group: &Arc<Group>, theta: &Relation) -> Result<BTreeMap<GenusType, BigRational>> {
    let p = group.dihedral_q().ok_or_else(|| Error::Unsupported("genus constants live on D2q:p".into()))? as u64;
    let mut out = BTreeMap::new();
    for t in GenusType::ALL {
        let c = match t.zoo_name() {
            Some(name) => dok_pairing(&zoo_lattice_on(group, name)?, theta, None)?.value,
            None if t == GenusType::ExtARho => pow_rat(p, -1),
            None => pow_rat(p, 1),
        };
        out.insert(t, c);
    }
    Ok(out)
}

/// A direct sum of genus representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// Sorted summands.
    pub summands: Vec<GenusType>,
    pub constant: BigRational,
    /// Row number in the table for character `ε + 2τ`, when it applies.
    pub label: Option<&'static str>,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = if self.summands.is_empty() {
            "0".to_string()
        } else {
            self.summands.iter().map(|t| t.symbol()).collect::<Vec<_>>().join(" ⊕ ")
        };
        match self.label {
            Some(l) => write!(f, "{l} {body}"),
            None => f.write_str(&body),
        }
    }
}

fn paper_label(summands: &[GenusType]) -> Option<&'static str> {
    use GenusType::*;
    Some(match summands {
        [Eps, A, A] => "(1)",
        [Eps, A, Aprime] => "(2)",
        [Eps, Aprime, Aprime] => "(3)",
        [A, ExtAEps] => "(4)",
        [Aprime, ExtAEps] => "(5)",
        _ => return None,
    })
}

/// All multisets of genus types with the given character.
pub fn enumerate_genus_sums(m: (usize, usize, usize)) -> Vec<Vec<GenusType>> {
    fn go(start: usize, left: (usize, usize, usize), cur: &mut Vec<GenusType>, out: &mut Vec<Vec<GenusType>>) {
        if left == (0, 0, 0) {
            out.push(cur.clone());
            return;
        }
        for (i, t) in GenusType::ALL.iter().enumerate().skip(start) {
            let (a, b, c) = t.multiplicities();
            if a <= left.0 && b <= left.1 && c <= left.2 {
                cur.push(*t);
                go(i, (left.0 - a, left.1 - b, left.2 - c), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, m, &mut Vec::new(), &mut out);
    out
}

/// One stage of identification: the data of a single fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationStage {
    pub multiplicities: (usize, usize, usize),
    pub class_number_quotient: BigRational,
    /// `C(Γ)` forced by the class number quotient.
    pub target_constant: BigRational,
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Identification {
    pub p: u64,
    /// From the fixture alone.
    pub units: IdentificationStage,
    /// From the S-unit fixture, when given.
    pub s_units: Option<IdentificationStage>,
    /// Surviving structures for the units modulo torsion.
    pub candidates: Vec<Candidate>,
    pub notes: Vec<String>,
}

impl Identification {
    pub fn labels(&self) -> Vec<Option<&'static str>> {
        self.candidates.iter().map(|c| c.label).collect()
    }

    pub fn to_json(&self) -> Value {
        let cand = |cs: &[Candidate]| -> Vec<Value> {
            cs.iter()
                .map(|c| {
                    json!({
                        "label": c.label,
                        "summands": c.summands.iter().map(|t| t.symbol()).collect::<Vec<_>>(),
                        "constant": format_rat(&c.constant),
                    })
                })
                .collect()
        };
        let stage = |s: &IdentificationStage| {
            json!({
                "multiplicities": [s.multiplicities.0, s.multiplicities.1, s.multiplicities.2],
                "class_number_quotient": format_rat(&s.class_number_quotient),
                "target_constant": format_rat(&s.target_constant),
                "candidates": cand(&s.candidates),
            })
        };
        json!({
            "p": self.p,
            "units": stage(&self.units),
            "s_units": self.s_units.as_ref().map(stage),
            "candidates": cand(&self.candidates),
            "notes": self.notes,
        })
    }
}

fn identification_stage(f: &FieldFixture, constants: &BTreeMap<GenusType, BigRational>) -> Result<IdentificationStage> {
    let p = f.dihedral_prime().ok_or_else(|| Error::Unsupported("identification needs D2q:p".into()))?;
    let cp = format!("C{p}");
    let theta = f.standard_relation()?;
    let (rf, rk, rkk) = (f.field("1")?.r_s as usize, f.field("G")?.r_s as usize, f.field(&cp)?.r_s as usize);
    if rkk < rk || rf < rkk || (rf - rkk) % (p as usize - 1) != 0 {
        return Err(reject("ranks do not decompose into 1, ε and τ"));
    }
    let m = (rk, rkk - rk, (rf - rkk) / (p as usize - 1));
    let hq = class_number_quotient(f, &theta)?;
    let lam = |l: &str| -> Result<BigRational> { Ok(BigRational::from_integer(f.field(l)?.lambda.into())) };
    let lambda_ratio = lam(&cp)? * lam("C2")? * lam("C2")? / (lam("1")? * lam("G")? * lam("G")?);
    let g = &f.group;
    let c_one = dok_pairing(&ZGLattice::trivial(g), &theta, None)?.value;
    let mut decomposition = BigRational::one();
    for s in &f.data.s_primes_of_k {
        let class = g.class_index(&s.decomposition_class).expect("validated");
        decomposition *= dok_pairing(&ZGLattice::permutation_class(g, class), &theta, None)?.value;
    }
    // hq = (C(1) / (C(Γ) prod C(Z[G/D_p])))^{1/2} * lambda ratio
    let target = c_one * &lambda_ratio * &lambda_ratio / (&hq * &hq * decomposition);
    let candidates = enumerate_genus_sums(m)
        .into_iter()
        .map(|summands| {
            let constant = summands.iter().fold(BigRational::one(), |acc, t| acc * &constants[t]);
            let label = if m == (0, 1, 2) { paper_label(&summands) } else { None };
            Candidate { summands, constant, label }
        })
        .filter(|c| c.constant == target)
        .collect();
    Ok(IdentificationStage { multiplicities: m, class_number_quotient: hq, target_constant: target, candidates })
}

/// Lists the genus structures of the units modulo torsion that are compatible
/// with the class number quotient. With an S-unit fixture for the same field
/// whose `S` adds one place of `k` with decomposition group `G`, the S-unit
/// candidates are cut down to the units through the kernel of `Γ_S -> 1`.
pub fn identify_galois_module(f: &FieldFixture, s_data: Option<&FieldFixture>) -> Result<Identification> {
    let p = f.dihedral_prime().ok_or_else(|| Error::Unsupported("identification needs D2q:p".into()))?;
    let constants = genus_constants(&f.group, &f.standard_relation()?)?;
    let units = identification_stage(f, &constants)?;
    if units.candidates.is_empty() {
        return Err(Error::NoCandidate(format!(
            "no sum with character {:?} has constant {}",
            units.multiplicities,
            format_rat(&units.target_constant)
        )));
    }
    let mut notes = Vec::new();
    let mut candidates = units.candidates.clone();
    let s_units = match s_data {
        None => None,
        Some(s) => {
            if s.group.descriptor() != f.group.descriptor() {
                return Err(Error::GroupMismatch("the S-unit fixture has a different group".into()));
            }
            let stage = identification_stage(s, &constants)?;
            if stage.candidates.is_empty() {
                return Err(Error::NoCandidate("the S-unit data admit no structure".into()));
            }
            let (m, ms) = (units.multiplicities, stage.multiplicities);
            let extra_g = structural_invariants(s).a == structural_invariants(f).a + 1
                && s.data.s_primes_of_k.len() == f.data.s_primes_of_k.len() + 1;
            if extra_g && ms == (m.0 + 1, m.1, m.2) && ms.0 == 1 {
                let mut kernels: Vec<Vec<GenusType>> = stage
                    .candidates
                    .iter()
                    .map(|c| {
                        let mut k = Vec::new();
                        for t in &c.summands {
                            match t.trivial_kernel() {
                                Some(ker) if t.multiplicities().0 == 1 => k.extend(ker),
                                _ => k.push(*t),
                            }
                        }
                        k.sort();
                        k
                    })
                    .collect();
                kernels.sort();
                kernels.dedup();
                candidates.retain(|c| kernels.contains(&c.summands));
                if candidates.is_empty() {
                    return Err(Error::NoCandidate("unit and S-unit data are incompatible".into()));
                }
            } else {
                notes.push(
                    "S-unit fixture does not add exactly one place with decomposition group G; no intersection taken"
                        .into(),
                );
            }
            Some(stage)
        }
    };
    Ok(Identification { p, units, s_units, candidates, notes })
}

/// Outcome of one check in [`verify_fixture`].
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub verdict: Verdict,
    pub summary: String,
    pub detail: Value,
}

/// Tolerances for the floating-point identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub class_number: f64,
    pub pairing: f64,
    pub newreg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { class_number: DEFAULT_TOL, pairing: DEFAULT_TOL, newreg: NEWREG_TOL }
    }
}

/// Runs every applicable check on a fixture. Relation-based checks use the
/// standard dihedral relation and are skipped for other groups.
pub fn verify_fixture(f: &FieldFixture, tol: Tolerances) -> Result<Vec<CheckOutcome>> {
    let theta = f.group.dihedral_q().map(|_| f.standard_relation()).transpose()?;
    let mut out = Vec::new();
    let q = |r: &QuotientReport| format!("lhs {:.12e} rhs {:.12e} rel {:.2e}", r.lhs, r.rhs, r.relative_error);

    if let Some(theta) = &theta {
        let r = class_number_identity_check(f, theta, tol.class_number)?;
        out.push(CheckOutcome {
            check: "class_number_identity",
            verdict: r.verdict,
            summary: q(&r),
            detail: r.to_json(),
        });
    }
    if f.dihedral_prime().is_some() {
        let u = unit_index_prediction(f)?;
        let summary = format!(
            "quotient {} exponent {} predicted {} observed {}",
            format_rat(&u.class_number_quotient),
            format_rat(&u.exponent),
            u.predicted_index.as_ref().map_or("-".into(), format_rat),
            u.observed_unit_index.map_or("-".into(), |o| o.to_string())
        );
        out.push(CheckOutcome { check: "unit_index_prediction", verdict: u.verdict, summary, detail: u.to_json() });
    }
    if f.data.unit_logs.is_some() {
        let r = s_unit_pairing_check(f, tol.pairing)?;
        out.push(CheckOutcome { check: "s_unit_pairing", verdict: r.verdict, summary: q(&r), detail: r.to_json() });
    }
    if let (Some(theta), true) = (&theta, f.data.unit_action.is_some()) {
        let r = newreg_identity_check(f, theta, tol.newreg)?;
        out.push(CheckOutcome { check: "newreg_identity", verdict: r.verdict, summary: q(&r), detail: r.to_json() });
    }
    if f.data.chain.is_some() {
        let c = d2q_chain_evaluation(f, tol.class_number)?;
        let summary = format!("{} layers, correction identity {}", c.layers.len(), c.correction_holds);
        out.push(CheckOutcome { check: "d2q_chain", verdict: c.verdict, summary, detail: c.to_json() });
    }
    if let Some(theta) = &theta {
        let n = no_p_in_reg_check(f, theta)?;
        let summary = n.checked.iter().map(|(p, v)| format!("ord_{p} = {v}")).collect::<Vec<_>>().join(", ");
        out.push(CheckOutcome { check: "no_p_in_reg", verdict: n.verdict, summary, detail: n.to_json() });
    }
    Ok(out)
}
