use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {q} is not congruent to 1 mod {p}")]
    NotOneModP { q: u64, p: u64 },
    #[error("{value} is divisible by {modulus}")]
    NotCoprime { value: u64, modulus: u64 },
    #[error("{0} is not a principal unit (expected u = 1 mod p)")]
    NotPrincipalUnit(u64),
    #[error("precision too large: {p}^{k} does not fit in 63 bits")]
    PrecisionOverflow { p: u64, k: u32 },
    #[error("precision mismatch: need at least {needed}, got {got}")]
    PrecisionMismatch { needed: u32, got: u32 },
    #[error("precision exhausted: truncation degree {got} is too small, need at least {required}")]
    PrecisionExhausted { required: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("modulus {m} exceeds the configured cap {cap}")]
    ModulusTooLarge { m: u64, cap: u64 },
    #[error("element is not divisible by T")]
    NotDivisibleByT,
    #[error("incompatible ring specifications: {0}")]
    SpecMismatch(String),
    #[error("unsupported group shape: {0}")]
    UnsupportedGroup(String),
    #[error("prime {l} ramifies in the field (conductor {conductor})")]
    Ramified { l: u64, conductor: u64 },
    #[error("tuple has {got} entries, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("prime {0} appears more than once")]
    Duplicate(u64),
    #[error("{l} is not a p-th power residue mod {q} (p = {p})")]
    NotResidue { l: u64, q: u64, p: u64 },
    #[error("field construction failed: {0}")]
    Construction(String),
    #[error("index of the submodule is not finite beyond the truncation")]
    IndexNotFinite,
    #[error("tower axiom violated: {0}")]
    Axiom(String),
}
