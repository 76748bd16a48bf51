use thiserror::Error;

/// Errors produced by the codec. Each variant names the subsystem that
/// raised it so front ends can report where a failure originated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frame-io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{module}: invalid argument: {msg}")]
    Argument { module: &'static str, msg: String },

    #[error("frame-io: malformed input: {0}")]
    MalformedInput(String),

    #[error("frame-io: sample {value} at frame {frame}, index {index} is outside [0, 255]")]
    SampleRange {
        frame: usize,
        index: usize,
        value: i32,
    },

    #[error("entropy: stream truncated at byte {offset}: {msg}")]
    Truncated { offset: usize, msg: String },

    #[error("entropy: malformed stream: {0}")]
    MalformedStream(String),

    #[error("adaptive-control: malformed depth vector: {0}")]
    MalformedDepthVector(String),

    #[error("{module}: internal consistency error: {msg}")]
    Consistency { module: &'static str, msg: String },

    #[error("container: bad magic {0:02x?}")]
    BadMagic([u8; 4]),

    #[error("container: unsupported version {found} (expected {expected})")]
    Version { found: u8, expected: u8 },

    #[error("container: malformed container: {0}")]
    MalformedContainer(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg(module: &'static str, msg: impl Into<String>) -> Error {
    Error::Argument {
        module,
        msg: msg.into(),
    }
}

pub(crate) fn consistency(module: &'static str, msg: impl Into<String>) -> Error {
    Error::Consistency {
        module,
        msg: msg.into(),
    }
}
