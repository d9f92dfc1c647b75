//! Artifact writers. Every file starts with a header naming the toolkit
//! version and the hash of the resolved configuration: a `#` comment line
//! for CSV and text files, a `header` object for JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the canonical resolved configuration, hex encoded.
pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Header<'a> {
    toolkit: &'static str,
    version: &'static str,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: Header<'a>,
    data: &'a T,
}

pub struct Writer {
    dir: PathBuf,
    hash: String,
    format: Format,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, hash: String, format: Format) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), hash, format, written: Vec::new() })
    }

    pub fn header_line(&self) -> String {
        format!("# quasilocal {VERSION} config-hash {}", self.hash)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn create(&mut self, name: &str) -> std::io::Result<fs::File> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path)?;
        self.written.push(path);
        Ok(file)
    }

    /// Plain text with the header comment prepended.
    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let header = self.header_line();
        let mut f = self.create(name)?;
        writeln!(f, "{header}")?;
        f.write_all(body.as_bytes())
    }

    /// CSV table `name.csv`.
    pub fn csv<S: AsRef<str>>(&mut self, name: &str, columns: &[&str], rows: &[Vec<S>]) -> std::io::Result<()> {
        let header = self.header_line();
        let mut f = self.create(&format!("{name}.csv"))?;
        writeln!(f, "{header}")?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row.iter().map(|c| c.as_ref()))?;
        }
        w.flush()
    }

    /// JSON document `name.json` with a header object.
    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> std::io::Result<()> {
        let hash = self.hash.clone();
        let doc = Document { header: Header { toolkit: "quasilocal", version: VERSION, config_hash: &hash }, data };
        let mut f = self.create(&format!("{name}.json"))?;
        serde_json::to_writer_pretty(&mut f, &doc)?;
        writeln!(f)
    }

    /// A table in the configured format(s): CSV rows and/or the JSON value.
    pub fn table<S: AsRef<str>, T: Serialize>(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<S>],
        json: &T,
    ) -> std::io::Result<()> {
        if self.format.csv() {
            self.csv(name, columns, rows)?;
        }
        if self.format.json() {
            self.json(name, json)?;
        }
        Ok(())
    }
}
