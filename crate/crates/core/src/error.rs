use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty polynomial input")]
    EmptyInput,
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("constant term is zero")]
    ZeroConstantTerm,
    #[error("polynomial is not primitive (content {content}); pass --divide-content to divide through")]
    NonPrimitive { content: String },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root certification exhausted the {cap}-bit precision cap")]
    PrecisionExhausted { cap: usize },
    #[error("group order {got} does not match |a_0|^n = {expected}")]
    OrderMismatch { got: String, expected: String },
    #[error("group is not cyclic")]
    NotCyclic,
    #[error("group is cyclic but 1 does not generate it")]
    CyclicButOneNotGenerator,
    #[error("atom budget exceeded: {atoms} atoms, budget {budget}")]
    AtomBudgetExceeded { atoms: usize, budget: usize },
    #[error("denominator of {angle} is not a power of {base}")]
    DenominatorNotMPower { angle: String, base: String },
    #[error("combinatorial budget exceeded ({nodes} nodes, budget {budget})")]
    CombinatorialBudgetExceeded { nodes: usize, budget: usize },
    #[error("operation requires all conjugates of beta outside the unit circle (profile: {profile})")]
    WrongConjugateProfile { profile: String },
    #[error("complete vanishing at level {level} is not verified for this measure")]
    VanishingNotVerified { level: u32 },
    #[error("no default search bound available: gcd(a_1, a_0) != 1; supply an explicit maximum level")]
    NoBoundAvailable,
    #[error("the three conditions disagree ({entropy}, {equidist}, {character}); this indicates an implementation bug")]
    EquivalenceViolation {
        entropy: bool,
        equidist: bool,
        character: bool,
    },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
