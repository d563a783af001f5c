use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside its mathematical domain (non-finite, negative extent, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A JSONL record that does not match the scene schema.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A field that parsed but failed a range check.
    #[error("line {line}: {field}: {message}")]
    Validation {
        line: usize,
        field: String,
        message: String,
    },

    /// Timestamps that are not strictly increasing within a scene.
    #[error("scene `{scene}`: {message}")]
    Ordering { scene: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("no class in the evaluation config appears in the data")]
    EmptyClassIntersection,

    #[error("annotation `{0}` has no velocity; derive velocities before shifting")]
    MissingVelocity(String),

    #[error("candidate `{id}`: {message}")]
    Candidate { id: String, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error stems from user-supplied input rather than an
    /// internal failure. The CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
