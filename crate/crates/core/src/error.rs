use std::path::PathBuf;

/// Errors produced by the correspondence engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("keyframe {0} has no closed regions")]
    NoRegions(&'static str),

    #[error("pin conflict: {0}")]
    PinConflict(String),

    #[error("region {0} of keyframe A is not pinned")]
    NotPinned(u32),

    #[error("unknown region {id} in keyframe {frame}")]
    UnknownRegion { frame: &'static str, id: u32 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error("store error at {}: {message}", path.display())]
    Store { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
