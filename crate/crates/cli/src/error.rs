use std::fmt;

/// Everything that can end a command, grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Argument parsing failed (or help/version was requested).
    Clap(clap::Error),
    /// A flag value or input file does not fit the command.
    Usage(String),
    Core(lsgd_core::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 1 usage, 2 numeric or domain, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(_) | CliError::Usage(_) => 1,
            CliError::Core(lsgd_core::Error::Io { .. }) => 3,
            CliError::Core(lsgd_core::Error::Parse { .. }) => 1,
            CliError::Core(_) => 2,
        }
    }

    pub fn one_line(&self) -> String {
        let text = match self {
            CliError::Clap(e) => {
                let rendered = e.render().to_string();
                rendered
                    .lines()
                    .next()
                    .unwrap_or("invalid arguments")
                    .to_string()
            }
            other => other.to_string(),
        };
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
        text.strip_prefix("error: ")
            .map(str::to_string)
            .unwrap_or(text)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Clap(e)
    }
}

impl From<lsgd_core::Error> for CliError {
    fn from(e: lsgd_core::Error) -> Self {
        CliError::Core(e)
    }
}
