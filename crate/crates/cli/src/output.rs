//! Self-describing tables: `#`-prefixed header lines followed by
//! whitespace-delimited numeric rows, or a raw little-endian `f64` matrix
//! with the header moved to a `.hdr` sidecar.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::{OutputFormat, RunConfig};

pub const VELOCITY_CONVENTION: &str =
    "v >= 0 increases the separation: moving_rx has the receiver at +v, moving_tx the transmitter at -v, co_moving both at +v along the tx->rx axis";

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    header: Vec<(String, String)>,
    pub columns: String,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Table with the common header entries (config hash, sample rate,
    /// velocity convention) already filled in.
    pub fn new(name: &str, cfg: &RunConfig, description: &str) -> Self {
        let mut t = Self {
            name: name.to_string(),
            header: Vec::new(),
            columns: String::new(),
            rows: Vec::new(),
        };
        t.meta("description", description);
        t.meta("config_hash", cfg.hash());
        t.meta("fs_hz", cfg.fs);
        t.meta(
            "time_axis",
            "sample n <-> t = n / fs_hz seconds; lag m <-> m / fs_hz seconds",
        );
        t.meta("velocity_convention", VELOCITY_CONVENTION);
        t
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.header.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> &[(String, String)] {
        &self.header
    }

    fn header_text(&self, extra: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in self.header.iter().chain(extra) {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(&format!("# columns = {}\n", self.columns));
        s
    }

    /// Writes the table into `dir` and returns the data file path.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        match format {
            OutputFormat::Text => {
                let path = dir.join(format!("{}.txt", self.name));
                self.write_text(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
                Ok(path)
            }
            OutputFormat::Binary => {
                let path = dir.join(format!("{}.bin", self.name));
                self.write_binary(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
                Ok(path)
            }
        }
    }

    fn write_text(&self, path: &Path) -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(self.header_text(&[]).as_bytes())?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&v.to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()
    }

    fn write_binary(&self, path: &Path) -> std::io::Result<()> {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let extra = vec![
            (
                "data_file".to_string(),
                path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            ),
            ("dtype".to_string(), "f64 little-endian, row-major".to_string()),
            ("rows".to_string(), self.rows.len().to_string()),
            ("cols".to_string(), cols.to_string()),
        ];
        std::fs::write(path.with_extension("hdr"), self.header_text(&extra))?;
        let mut out = BufWriter::new(File::create(path)?);
        for row in &self.rows {
            for j in 0..cols {
                out.write_all(&row.get(j).copied().unwrap_or(0.0).to_le_bytes())?;
            }
        }
        out.flush()
    }
}

/// A parsed text table (or binary matrix plus sidecar).
#[derive(Debug, Clone, PartialEq)]
pub struct ReadTable {
    pub header: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl ReadTable {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn parse_header_line(line: &str) -> Option<(String, String)> {
    let body = line.strip_prefix('#')?.trim();
    let (k, v) = body.split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

/// Reads a table written by [`Table::write`], or any whitespace/comma
/// delimited numeric file with optional `# key = value` header lines.
/// Files ending in `.bin` are read with their `.hdr` sidecar.
pub fn read_table(path: &Path) -> Result<ReadTable> {
    if path.extension().is_some_and(|e| e == "bin") {
        return read_binary(path);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            header.extend(parse_header_line(line));
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}:{}: not a numeric row", path.display(), i + 1))?;
        rows.push(row);
    }
    Ok(ReadTable { header, rows })
}

fn read_binary(path: &Path) -> Result<ReadTable> {
    let hdr_path = path.with_extension("hdr");
    let text = std::fs::read_to_string(&hdr_path).with_context(|| format!("reading sidecar {}", hdr_path.display()))?;
    let header: Vec<(String, String)> = text.lines().filter_map(parse_header_line).collect();
    let field = |key: &str| -> Result<usize> {
        header
            .iter()
            .find(|(k, _)| k == key)
            .with_context(|| format!("{} lacks '{key}'", hdr_path.display()))?
            .1
            .parse()
            .with_context(|| format!("{}: bad '{key}'", hdr_path.display()))
    };
    let (n_rows, n_cols) = (field("rows")?, field("cols")?);
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() != n_rows * n_cols * 8 {
        anyhow::bail!(
            "{} holds {} bytes, expected {} rows x {} cols of f64",
            path.display(),
            bytes.len(),
            n_rows,
            n_cols
        );
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let rows = if n_cols == 0 {
        Vec::new()
    } else {
        values.chunks(n_cols).map(<[f64]>::to_vec).collect()
    };
    Ok(ReadTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("sample", &RunConfig::default(), "test table");
        t.columns = "a b".into();
        t.rows = vec![vec![1.0, -2.5], vec![0.1, 3e-300]];
        t
    }

    #[test]
    fn text_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = sample().write(dir.path(), OutputFormat::Text).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back.rows, sample().rows);
        assert_eq!(back.get("config_hash"), Some(RunConfig::default().hash().as_str()));
        assert_eq!(back.get("columns"), Some("a b"));
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = sample().write(dir.path(), OutputFormat::Binary).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 32);
        let back = read_table(&path).unwrap();
        assert_eq!(back.rows, sample().rows);
        assert_eq!(back.get("rows"), Some("2"));
    }
}
