use thiserror::Error;

/// Errors produced by the mesh, element, assembly and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("topology error: {0}")]
    Topology(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("geometry error in cell {cell}: {msg}")]
    Geometry { cell: usize, msg: String },

    #[error("unsupported element: {0}")]
    Element(String),

    #[error("material error: {0}")]
    Material(String),

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
