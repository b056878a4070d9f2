//! Progress logging. Everything goes to stderr so stdout and output files
//! stay clean for data; `--log json` switches to one JSON object per line
//! for machine consumption.

use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy)]
pub struct Logger {
    format: LogFormat,
}

impl Logger {
    pub fn new(format: LogFormat) -> Self {
        Logger { format }
    }

    pub fn info(&self, message: &str) {
        self.emit("info", message);
    }

    pub fn warn(&self, message: &str) {
        self.emit("warn", message);
    }

    pub fn error(&self, message: &str) {
        self.emit("error", message);
    }

    fn emit(&self, level: &str, message: &str) {
        let mut err = std::io::stderr().lock();
        let _ = match self.format {
            LogFormat::Text => writeln!(err, "{level}: {message}"),
            LogFormat::Json => {
                let line = serde_json::json!({ "level": level, "message": message });
                writeln!(err, "{line}")
            }
        };
    }
}
