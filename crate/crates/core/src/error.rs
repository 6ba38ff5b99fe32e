use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("invalid label `{0}`: labels must be nonempty and contain no whitespace")]
    InvalidLabel(String),

    #[error("components of stratum [{stratum}] are not listed in declaration order")]
    RankOrder { stratum: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid incidence structure: {0}")]
    InvalidStructure(String),

    #[error("invalid delta complex: {0}")]
    InvalidComplex(String),

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("group closure exceeded {limit} elements")]
    GroupTooLarge { limit: usize },

    #[error("quotient is not a delta complex: {0}")]
    NotAdmissible(String),

    #[error("inconsistent simplicial map: {0}")]
    InconsistentMap(String),

    #[error("boundary maps do not compose to zero in degree {degree}")]
    NotAComplex { degree: usize },

    #[error("chain map does not commute with boundaries in degree {degree}")]
    NotAChainMap { degree: usize },

    #[error("complex is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("invalid covering datum: {0}")]
    InvalidCovering(String),

    #[error("cocycle condition fails on {0}")]
    CocycleViolation(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by unreadable or unparsable input, as opposed to
    /// well-formed input that violates a mathematical condition.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::DuplicateLabel { .. }
                | Error::UnknownComponent(_)
                | Error::InvalidLabel(_)
                | Error::RankOrder { .. }
                | Error::Malformed(_)
                | Error::UnknownVertex(_)
                | Error::Io(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_syntax() || e.is_eof() {
            Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
        } else {
            Error::Malformed(e.to_string())
        }
    }
}
