use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dokchitser::arith::{format_factored, format_rat};
use dokchitser::burnside::{relation_lattice, Relation};
use dokchitser::dokchitser::{dok_injection, dok_pairing, find_injection, InjectionTarget, DEFAULT_BUDGET};
use dokchitser::group::Group;
use dokchitser::lattice::{LatticeJson, ZGLattice};
use dokchitser::ledger::{identify_galois_module, load_fixture, verify_fixture, Tolerances, NEWREG_TOL};
use dokchitser::suites::{run_suite, SuiteName, DEFAULT_TRIALS, SEED_ENV};
use dokchitser::zoo::{extension_search, standard_relation_on, zoo_lattice_on, zoo_table, ZooName};
use dokchitser::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dokchitser", version, about = "Brauer relations, ZG-lattices and Dokchitser constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pairing,
    Injection,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Print a basis of the relation lattice of a group.
    Relations {
        /// Group descriptor, e.g. `D2q:3`, `C:6`, `S:4`, `prod(C:2,D2q:3)`.
        group: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compute a Dokchitser constant.
    Dok {
        #[arg(long)]
        group: String,
        /// `zoo:<name>`, `perm:<subgroup label>`, `regular`, `trivial` or `file:<path>`.
        #[arg(long)]
        lattice: String,
        /// Relation in the form `1 - 2*C2 - C3 + 2*G`; defaults to the
        /// standard relation on `D2q:p` and the first basis relation otherwise.
        #[arg(long)]
        relation: Option<String>,
        #[arg(long, value_enum, default_value = "pairing")]
        method: MethodArg,
        /// Seed for the injection search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Constants, indices and I for the dihedral zoo.
    Zoo {
        #[arg(long)]
        p: u64,
        /// Print the table (the default output).
        #[arg(long)]
        table: bool,
        /// Also run the overlattice search for the two extension rows (p = 3, 5).
        #[arg(long)]
        extensions: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Audit fixtures; directories are scanned for `*.json`.
    VerifyFixture {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Relative tolerance for the class number and pairing identities.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Relative tolerance for the regulator-constant identity.
        #[arg(long, default_value_t = NEWREG_TOL)]
        newreg_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Identify the Galois module structure of the units modulo torsion.
    Identify {
        path: PathBuf,
        /// S-unit fixture of the same field with one extra place of decomposition group G.
        #[arg(long)]
        s_fixture: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a named property suite.
    Suite {
        #[arg(long, value_parser = parse_suite)]
        name: SuiteName,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, env = SEED_ENV, default_value_t = dokchitser::suites::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = SuiteName::ALL.iter().map(|n| n.as_str()).collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

/// Failures split into usage errors (exit 2) and everything else (exit 1).
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Descriptor(..)
            | Error::OrderTooLarge(..)
            | Error::BadTable(_)
            | Error::NotPrime(_)
            | Error::NotARelation
            | Error::UnknownLattice(_)
            | Error::Fixture(_)
            | Error::Io(..)
            | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

// Like `println!`, but a closed stdout (e.g. piped into `head`) ends the process quietly.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Relations { group, format } => relations(&group, format),
        Command::Dok { group, lattice, relation, method, seed, format } => {
            dok(&group, &lattice, relation.as_deref(), method, seed, format)
        }
        Command::Zoo { p, table: _, extensions, format } => zoo(p, extensions, format),
        Command::VerifyFixture { paths, tol, newreg_tol, json } => verify(&paths, tol, newreg_tol, json),
        Command::Identify { path, s_fixture, json } => identify(&path, s_fixture.as_deref(), json),
        Command::Suite { name, trials, seed, json } => suite(name, trials, seed, json),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn relations(desc: &str, format: Format) -> Outcome {
    let g = Group::from_descriptor(desc)?;
    let basis = relation_lattice(&g);
    match format {
        Format::Json => print_json(&json!({
            "group": g.descriptor(),
            "rank": basis.rank,
            "classes": g.subgroup_classes().iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "basis": basis.basis.iter().map(|r| json!({"text": r.to_string(), "coefficients": r.coeffs()})).collect::<Vec<_>>(),
        })),
        Format::Tsv => {
            outln!(
                "index\trelation\t{}",
                g.subgroup_classes().iter().map(|c| c.label.clone()).collect::<Vec<_>>().join("\t")
            );
            for (i, r) in basis.basis.iter().enumerate() {
                let cs: Vec<String> = r.coeffs().iter().map(|c| c.to_string()).collect();
                outln!("{i}\t{r}\t{}", cs.join("\t"));
            }
        }
        Format::Text => {
            outln!("{}: rank {}", g.descriptor(), basis.rank);
            for r in &basis.basis {
                outln!("{r}");
            }
        }
    }
    Ok(true)
}

fn build_lattice(g: &std::sync::Arc<Group>, spec: &str) -> Result<ZGLattice, Failure> {
    if let Some(name) = spec.strip_prefix("zoo:") {
        let name: ZooName = name.parse()?;
        return Ok(zoo_lattice_on(g, name)?);
    }
    if let Some(label) = spec.strip_prefix("perm:") {
        let c = g
            .class_index(label)
            .ok_or_else(|| Failure::Usage(format!("no subgroup class `{label}` in {}", g.descriptor())))?;
        return Ok(ZGLattice::permutation_class(g, c));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        let json: LatticeJson = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        return Ok(ZGLattice::from_json_on(g, &json)?);
    }
    match spec {
        "regular" => Ok(ZGLattice::regular(g)),
        "trivial" => Ok(ZGLattice::trivial(g)),
        _ => Err(Failure::Usage(format!("unknown lattice `{spec}`"))),
    }
}

fn default_relation(g: &std::sync::Arc<Group>) -> Result<Relation, Failure> {
    if let Some(q) = g.dihedral_q() {
        if let Ok(r) = standard_relation_on(g, q as u64) {
            return Ok(r);
        }
    }
    relation_lattice(g)
        .basis
        .into_iter()
        .next()
        .ok_or_else(|| Failure::Usage(format!("{} has no non-zero relations", g.descriptor())))
}

fn dok(desc: &str, spec: &str, relation: Option<&str>, method: MethodArg, seed: u64, format: Format) -> Outcome {
    let g = Group::from_descriptor(desc)?;
    let lattice = build_lattice(&g, spec)?;
    let theta = match relation {
        Some(text) => Relation::parse(&g, text).map_err(|e| Failure::Usage(e.to_string()))?,
        None => default_relation(&g)?,
    };
    let mut results = Vec::new();
    if matches!(method, MethodArg::Pairing | MethodArg::Both) {
        results.push(dok_pairing(&lattice, &theta, None)?);
    }
    if matches!(method, MethodArg::Injection | MethodArg::Both) {
        let phi = find_injection(&theta, InjectionTarget::NonZero, seed, DEFAULT_BUDGET)?;
        results.push(dok_injection(&lattice, &theta, Some(&phi))?);
    }
    let agree = results.windows(2).all(|w| w[0].value == w[1].value);
    let rel = theta.to_string();
    match format {
        Format::Json => {
            let records: Vec<Value> = results.iter().map(|c| c.to_json(&rel, spec)).collect();
            print_json(&json!({"group": g.descriptor(), "results": records, "agree": agree}));
        }
        Format::Tsv => {
            outln!("relation\tlattice\tmethod\tvalue\tfactored");
            for c in &results {
                outln!("{rel}\t{spec}\t{}\t{}\t{}", c.method, format_rat(&c.value), format_factored(&c.factored()));
            }
        }
        Format::Text => {
            outln!("{} on {spec} with {rel}", g.descriptor());
            for c in &results {
                outln!("{:>9}: {c}", c.method.to_string());
            }
            if results.len() > 1 {
                outln!("definitions agree: {agree}");
            }
        }
    }
    Ok(agree)
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".into(), |v| v.to_string())
}

fn zoo(p: u64, extensions: bool, format: Format) -> Outcome {
    let rows = zoo_table(p)?;
    let ext = if extensions { Some(extension_search(p)?) } else { None };
    match format {
        Format::Json => {
            let mut v = json!({
                "p": p,
                "rows": rows.iter().map(|r| json!({
                    "name": r.name,
                    "symbol": r.symbol,
                    "constant": format_rat(&r.constant),
                    "index": r.index.as_ref().map(|i| i.to_string()),
                    "I": r.i_invariant.as_ref().map(format_rat),
                    "status": r.status,
                })).collect::<Vec<_>>(),
            });
            if let Some(e) = &ext {
                v["extensions"] = json!({
                    "enumerated": [e.enumerated.0, e.enumerated.1],
                    "A_rho": {"constant": format_rat(&e.a_rho.constant), "I": format_rat(&e.a_rho.i_invariant), "index": e.a_rho.index.to_string()},
                    "Aprime_rho": {"constant": format_rat(&e.a_prime_rho.constant), "I": format_rat(&e.a_prime_rho.i_invariant), "index": e.a_prime_rho.index.to_string()},
                });
            }
            print_json(&v);
        }
        Format::Tsv => {
            outln!("name\tsymbol\tconstant\tindex\tI\tstatus");
            for r in &rows {
                let i = r.i_invariant.as_ref().map(format_rat);
                outln!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.name,
                    r.symbol,
                    format_rat(&r.constant),
                    opt(&r.index),
                    opt(&i),
                    r.status
                );
            }
        }
        Format::Text => {
            outln!("D_{} with 1 - 2*C2 - C{p} + 2*G", 2 * p);
            outln!("{:<14} {:<7} {:>9} {:>6} {:>9}  status", "name", "symbol", "constant", "index", "I");
            for r in &rows {
                let i = r.i_invariant.as_ref().map(format_rat);
                outln!(
                    "{:<14} {:<7} {:>9} {:>6} {:>9}  {}",
                    r.name,
                    r.symbol,
                    format_rat(&r.constant),
                    opt(&r.index),
                    opt(&i),
                    r.status
                );
            }
            if let Some(e) = &ext {
                outln!("overlattices enumerated: {} over A+rho, {} over Aprime+rho", e.enumerated.0, e.enumerated.1);
                for w in [&e.a_rho, &e.a_prime_rho] {
                    outln!(
                        "witness over {}: constant {}, index {}, I {}",
                        w.base,
                        format_rat(&w.constant),
                        w.index,
                        format_rat(&w.i_invariant)
                    );
                }
            }
        }
    }
    Ok(true)
}

fn fixture_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(Failure::Usage(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(out)
}

fn verify(paths: &[PathBuf], tol: f64, newreg_tol: f64, as_json: bool) -> Outcome {
    let tol = Tolerances { class_number: tol, pairing: tol, newreg: newreg_tol };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for path in fixture_paths(paths)? {
        let name = path.display().to_string();
        let outcome = load_fixture(&path).and_then(|f| verify_fixture(&f, tol));
        match outcome {
            Ok(checks) => {
                let pass = checks.iter().all(|c| c.verdict.is_pass());
                all_pass &= pass;
                if as_json {
                    reports.push(json!({
                        "fixture": name,
                        "verdict": if pass { "pass" } else { "fail" },
                        "checks": checks.iter().map(|c| json!({"check": c.check, "verdict": c.verdict, "detail": c.detail})).collect::<Vec<_>>(),
                    }));
                } else {
                    outln!("{name}: {}", if pass { "pass" } else { "fail" });
                    for c in &checks {
                        outln!("  {:<22} {}  {}", c.check, c.verdict, c.summary);
                    }
                }
            }
            Err(e) => {
                all_pass = false;
                if as_json {
                    reports.push(json!({"fixture": name, "verdict": "fail", "error": e.to_string()}));
                } else {
                    outln!("{name}: fail\n  {e}");
                }
            }
        }
    }
    if as_json {
        print_json(&json!({"fixtures": reports, "verdict": if all_pass { "pass" } else { "fail" }}));
    }
    Ok(all_pass)
}

fn identify(path: &Path, s_path: Option<&Path>, as_json: bool) -> Outcome {
    let f = load_fixture(path)?;
    let s = s_path.map(load_fixture).transpose()?;
    let id = identify_galois_module(&f, s.as_ref())?;
    if as_json {
        print_json(&id.to_json());
        return Ok(true);
    }
    let stage = |title: &str, st: &dokchitser::ledger::IdentificationStage| {
        let (a, b, c) = st.multiplicities;
        outln!(
            "{title}: character {a}*1 + {b}*eps + {c}*tau, class number quotient {}, C = {}",
            format_rat(&st.class_number_quotient),
            format_rat(&st.target_constant)
        );
        for c in &st.candidates {
            outln!("  {c}");
        }
    };
    stage("units", &id.units);
    if let Some(st) = &id.s_units {
        stage("S-units", st);
    }
    outln!("candidates:");
    for c in &id.candidates {
        outln!("  {c}");
    }
    for n in &id.notes {
        outln!("note: {n}");
    }
    Ok(true)
}

fn suite(name: SuiteName, trials: usize, seed: u64, as_json: bool) -> Outcome {
    let report = run_suite(name, trials, seed)?;
    if as_json {
        print_json(&report.to_json());
    } else {
        outln!("{name}: {}/{} pass (seed {seed})", report.passed, report.trials);
        for f in report.failures().take(10) {
            outln!("  trial {}: {}", f.trial, f.detail);
        }
    }
    Ok(report.failed() == 0)
}
