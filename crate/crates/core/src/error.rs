use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mesh format error at line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    #[error("cell {cell} references missing vertex {vertex}")]
    MissingVertex { cell: usize, vertex: usize },

    #[error("cell {cell} does not conform to coarse cell {coarse}")]
    NonConforming { cell: usize, coarse: usize },

    #[error("dangling edge ({0}, {1}): boundary edge not on the bounding box or not in the mesh")]
    DanglingEdge(usize, usize),

    #[error("edge ({0}, {1}) is shared by more than two cells")]
    OverSharedEdge(usize, usize),

    #[error("degenerate cell {0} (zero area)")]
    DegenerateCell(usize),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("singular system ({context}): {detail}")]
    SingularSystem { context: String, detail: String },

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("empty cell set for coarse cell {0}")]
    EmptyPatch(usize),

    #[error("reference quantity for {0} has zero norm; relative error undefined")]
    ZeroReference(&'static str),

    #[error("inconsistent basis counts: cell {cell} has {found}, expected {expected}")]
    InconsistentBasis { cell: usize, expected: usize, found: usize },

    #[error("config error at line {line} (key `{key}`): {msg}")]
    Config { line: usize, key: String, msg: String },

    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File { path: path.into(), source }
    }
}
