use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown vertex `{id}`")]
    UnknownVertex { line: usize, id: String },
    #[error("line {line}: weight {weight} outside [0,1]")]
    WeightOutOfRange { line: usize, weight: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("loop at vertex `{0}`")]
    Loop(String),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph is not connected")]
    Disconnected,
    #[error("not negative definite (witness minor index {witness})")]
    NotNegativeDefinite { witness: usize },
    #[error("singular linear system")]
    SingularSystem,
    #[error("bad blow-up locus: {0}")]
    BadLocus(String),
    #[error("one curve meeting two arrows has no minimal orbifold resolution")]
    ExceptionalCase,
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("classification mismatch: {0}")]
    ClassificationMismatch(String),
    #[error("arrow `{0}` has coefficient 0")]
    ZeroCoefficient(String),
    #[error("underlying singularity is not log terminal")]
    NotLogTerminal,
    #[error("bad chain: {0}")]
    BadChain(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("excluded configuration: {0}")]
    ExcludedGraph(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("empty set")]
    EmptySet,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
