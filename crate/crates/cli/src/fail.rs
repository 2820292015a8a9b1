use std::fmt;
use std::path::Path;

use baire_core::Error;

/// A failed invocation and the exit code it maps to.
#[derive(Debug)]
pub enum Fail {
    /// A check ran and found a violation.
    Check(String),
    Input(String),
    Io(String),
    Synthesis(String),
}

impl Fail {
    pub fn code(&self) -> i32 {
        match self {
            Fail::Check(_) => 1,
            Fail::Input(_) => 2,
            Fail::Io(_) => 3,
            Fail::Synthesis(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Fail {
        Fail::Io(format!("{}: {e}", path.display()))
    }

    /// Prefixes a parse or input error with the file it came from.
    pub fn in_file(path: &Path) -> impl Fn(Error) -> Fail + '_ {
        move |e| match Fail::from(e) {
            Fail::Input(m) => Fail::Input(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(m) => Fail::Input(m),
            Error::Synthesis(m) => Fail::Synthesis(m),
            Error::Parse { .. } | Error::Precondition(_) => Fail::Input(e.to_string()),
            Error::Resource { .. } => Fail::Synthesis(e.to_string()),
        }
    }
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fail::Check(m) => write!(f, "check failed: {m}"),
            Fail::Input(m) => write!(f, "input error: {m}"),
            Fail::Io(m) => write!(f, "i/o error: {m}"),
            Fail::Synthesis(m) => write!(f, "synthesis fault: {m}"),
        }
    }
}

pub type Outcome<T = ()> = std::result::Result<T, Fail>;
