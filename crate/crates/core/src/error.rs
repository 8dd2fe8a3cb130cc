use std::io;

/// Errors produced while building, querying, or (de)serializing an index.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("corrupt parse: {0}")]
    CorruptParse(String),

    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("range [{pos}, +{len}) is out of bounds for length {n}")]
    Range { pos: usize, len: usize, n: usize },

    #[error("fingerprint parameters: {0}")]
    Params(String),

    #[error("byte {0:#04x} has no fingerprint value")]
    Alphabet(u8),

    #[error("grammar height {height} exceeds the balance bound {bound}")]
    Balance { height: u32, bound: u32 },

    #[error("range [{start}, {end}] is not inside the window of boundary {boundary}")]
    Routing {
        boundary: usize,
        start: usize,
        end: usize,
    },

    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("reported occurrence at {0} does not match the pattern")]
    Verification(usize),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            msg: msg.into(),
        }
    }
}
