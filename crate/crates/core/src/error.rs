use thiserror::Error;

/// Errors produced by the network, partition and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("input vertex {index} out of range for {n} vertices")]
    InputOutOfRange { index: usize, n: usize },

    #[error("the {kind} subgraph is not connected; the closed-form H2 expressions need a single zero Laplacian eigenvalue")]
    Disconnected { kind: String },

    #[error("H2 norm infinite or undefined: {0}")]
    H2Undefined(String),

    #[error("refusing to enumerate partitions of {n} vertices (cap is {cap})")]
    TooLarge { n: usize, cap: usize },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
