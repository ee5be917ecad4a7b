use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate out of range: lat={lat}, lon={lon}{}", line_suffix(*line))]
    OutOfRangeCoordinate {
        lat: f64,
        lon: f64,
        line: Option<usize>,
    },

    #[error("text is not valid UTF-8{}", line_suffix(*line))]
    MalformedText { line: Option<usize> },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no POI-relevant record found")]
    EmptyRelevantSet,

    #[error("k = {k} requires more than {k} points, got {len}")]
    KTooLarge { k: usize, len: usize },

    #[error("instance of {size} points exceeds the oracle limit of {limit}")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dataset invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

impl Error {
    /// Attaches a 1-based input line number to coordinate and text errors.
    pub fn at_line(self, line_no: usize) -> Self {
        match self {
            Error::OutOfRangeCoordinate { lat, lon, .. } => Error::OutOfRangeCoordinate {
                lat,
                lon,
                line: Some(line_no),
            },
            Error::MalformedText { .. } => Error::MalformedText {
                line: Some(line_no),
            },
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than a broken invariant.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}
