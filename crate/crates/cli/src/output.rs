use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Output files go to `--out` if given, else to stdout in order.
pub struct Sink<'a> {
    dir: Option<&'a Path>,
}

impl<'a> Sink<'a> {
    pub fn new(dir: Option<&'a Path>) -> Result<Sink<'a>, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Sink { dir })
    }

    fn emit(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        match self.dir {
            Some(d) => fs::write(d.join(name), bytes)
                .map_err(|e| CliError::Failed(vec![format!("writing {name}: {e}")])),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Failed(vec![e.to_string()]))
            }
        }
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(vec![e.to_string()]))?;
        text.push('\n');
        self.emit(name, text.as_bytes())
    }

    pub fn csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Failed(vec![e.to_string()]);
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(vec![e.to_string()]))?;
        self.emit(name, &bytes)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    failures: &'a [String],
}

/// `failures.json` in the output directory, or stderr without one.
pub fn write_manifest(dir: Option<&Path>, command: &str, failures: &[String]) -> io::Result<()> {
    let text = serde_json::to_string_pretty(&Manifest { command, failures })? + "\n";
    match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            fs::write(d.join("failures.json"), text)
        }
        None => io::stderr().write_all(text.as_bytes()),
    }
}

pub fn f(v: f64) -> String {
    v.to_string()
}

pub fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
