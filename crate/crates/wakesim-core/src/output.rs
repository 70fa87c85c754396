//! Result tables, deterministic rendering, and the reproducibility
//! sidecar.
//!
//! Floats render through Rust's shortest-roundtrip formatter in CSV and
//! through serde_json (ryu) in JSON, so re-running an experiment with the
//! same seed yields byte-identical output; the sidecar stores the full
//! run spec plus a SHA-256 of those bytes to verify exactly that.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::process::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    U(u64),
    I(i64),
    F(f64),
    S(String),
    B(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::U(v) => write!(f, "{v}"),
            Cell::I(v) => write!(f, "{v}"),
            // shortest representation that round-trips
            Cell::F(v) => write!(f, "{v:?}"),
            Cell::S(v) => f.write_str(v),
            Cell::B(v) => write!(f, "{v}"),
        }
    }
}

impl Cell {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::U(v) => (*v).into(),
            Cell::I(v) => (*v).into(),
            Cell::F(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::S(v) => v.clone().into(),
            Cell::B(v) => (*v).into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::U(v as u64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

/// Column-ordered result table; the unit every experiment renders into.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row arity");
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("csv header");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }

    fn render_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::to_json))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("json rows");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        use fmt::Write as _;
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Everything needed to re-run an experiment and check the result bytes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    /// Fully-resolved experiment spec (defaults folded in).
    pub spec: serde_json::Value,
    pub git_describe: String,
    pub wall_time_s: f64,
    /// SHA-256 of the rendered result bytes.
    pub sha256: String,
}

impl Sidecar {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar json");
        s.push('\n');
        std::fs::write(path, s)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let data = std::fs::read(path)?;
        serde_json::from_slice(&data)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// Sidecar path convention next to an output file.
pub fn sidecar_path(out: &Path) -> std::path::PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".sidecar.json");
    std::path::PathBuf::from(os)
}

/// `git describe` of the working tree, or a static fallback outside git.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("unreleased-{}", env!("CARGO_PKG_VERSION")))
}

/// Write rendered results to a file, or stdout when no path is given.
pub fn emit(out: Option<&Path>, rendered: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => std::io::stdout().write_all(rendered.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["snr_db", "rate", "trials", "scheme"]);
        t.row(vec![(-4.0).into(), 0.1.into(), 1000u64.into(), "wakeup".into()]);
        t.row(vec![0.0.into(), 1e-5.into(), 1000u64.into(), "drx".into()]);
        t
    }

    #[test]
    fn csv_is_stable_and_roundtrip_precise() {
        let t = sample();
        let a = t.render(Format::Csv);
        let b = t.render(Format::Csv);
        assert_eq!(a, b);
        assert!(a.starts_with("snr_db,rate,trials,scheme\n"));
        assert!(a.contains("-4.0,0.1,1000,wakeup"));
        assert!(a.contains("1e-5"));
    }

    #[test]
    fn json_keeps_values() {
        let t = sample();
        let s = t.render(Format::Json);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v[0]["snr_db"], serde_json::json!(-4.0));
        assert_eq!(v[1]["scheme"], serde_json::json!("drx"));
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sidecar_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv.sidecar.json");
        let sc = Sidecar {
            spec: serde_json::json!({"experiment": "roc", "seed": 7}),
            git_describe: "abc1234".into(),
            wall_time_s: 1.5,
            sha256: sha256_hex(b"hello"),
        };
        sc.write(&p).unwrap();
        assert_eq!(Sidecar::read(&p).unwrap(), sc);
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("yaml".parse::<Format>().is_err());
    }
}
