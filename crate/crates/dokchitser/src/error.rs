use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bad group descriptor `{0}`: {1}")]
    Descriptor(String, String),
    #[error("group order {0} exceeds the bound {1}")]
    OrderTooLarge(usize, usize),
    #[error("invalid multiplication table: {0}")]
    BadTable(String),
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("not a relation: the virtual permutation character does not vanish")]
    NotARelation,
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("generator matrices violate the group law: {0}")]
    NotAHomomorphism(String),
    #[error("matrix for generator {0} is not unimodular")]
    NotUnimodular(usize),
    #[error("span is not stable under the group action")]
    NotStable,
    #[error("bad matrix shape: {0}")]
    Shape(String),
    #[error("injection search exhausted its budget of {0} draws")]
    BudgetExhausted(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),
    #[error("table mismatch: {0}")]
    TableMismatch(String),
    #[error("no witness found: {0}")]
    NoWitness(String),
    #[error("fixture rejected: {0}")]
    Fixture(String),
    #[error("no candidate structure survives: {0}")]
    NoCandidate(String),
    #[error("io error on {0}: {1}")]
    Io(String, std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
