//! Artifact plumbing: atomic file writes, CSV/JSON tables, JSON reports.
//!
//! Contract highlights implemented here:
//! - every CSV artifact begins with `# config=<compact json> seed=<n>`;
//!   JSON artifacts carry `"config"` and `"seed"` as their first two fields
//!   (a literal `#` line would make them unparseable);
//! - floats are printed with 17 significant digits (`{:.16e}`) in both
//!   formats, so artifacts are byte-identical across reruns;
//! - files are written to a temp path in the destination directory and
//!   renamed into place.

use std::fs;
use std::io::{self, Write as IoWrite};
use std::path::{Path, PathBuf};

use serde::ser::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::CliError;

/// Tabular artifact format selected by `--format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

// ---------------------------------------------------------------------------
// JSON with 17-significant-digit floats
// ---------------------------------------------------------------------------

/// Pretty JSON formatter that prints every float as `{:.16e}` (17
/// significant digits, exact f64 round-trip) instead of shortest-round-trip.
struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> SciFormatter<'a> {
    fn new() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl<'a> Formatter for SciFormatter<'a> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialize `value` as pretty JSON with 17-significant-digit floats.
fn to_sci_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::io(format!("serializing report: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

// ---------------------------------------------------------------------------
// Execution context
// ---------------------------------------------------------------------------

/// Everything a command needs to emit artifacts.
pub struct Ctx {
    out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub gnuplot: bool,
    /// Resolved config as a JSON value (echoed into every artifact).
    config: serde_json::Value,
    /// Compact one-line rendering of `config` for CSV comment headers.
    config_line: String,
    /// Paths written so far (reported on success).
    written: Vec<PathBuf>,
}

impl Ctx {
    /// Resolve the output directory (created if missing) and freeze the
    /// config echo. `config` must serialize to a JSON object.
    pub fn new(
        command: &str,
        config: &impl Serialize,
        out_dir: PathBuf,
        seed: u64,
        format: Format,
        gnuplot: bool,
    ) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(config)
            .map_err(|e| CliError::config(format!("echoing config: {e}")))?;
        match &mut value {
            serde_json::Value::Object(map) => {
                map.insert(
                    "command".into(),
                    serde_json::Value::String(command.to_string()),
                );
            }
            _ => {
                return Err(CliError::config(
                    "internal: config did not serialize to an object".to_string(),
                ))
            }
        }
        let config_line = serde_json::to_string(&value)
            .map_err(|e| CliError::config(format!("echoing config: {e}")))?;
        fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::io(format!("creating {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir,
            seed,
            format,
            gnuplot,
            config: value,
            config_line,
            written: Vec::new(),
        })
    }

    /// Files written so far.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Write bytes to `name` inside the output directory via a temp file
    /// and rename, so readers never observe a partial artifact.
    fn atomic_write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        let tmp = self.out_dir.join(format!(".{name}.tmp"));
        let write = |p: &Path| -> io::Result<()> {
            let mut f = fs::File::create(p)?;
            f.write_all(bytes)?;
            f.flush()
        };
        write(&tmp).map_err(|e| CliError::io(format!("writing {}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| {
            let _ = fs::remove_file(&tmp);
            CliError::io(format!("renaming into {}: {e}", path.display()))
        })?;
        self.written.push(path);
        Ok(())
    }

    /// Emit a JSON report. The payload's fields appear after the config
    /// echo and seed; field order is the struct's declaration order.
    pub fn write_report<T: Serialize>(&mut self, stem: &str, body: &T) -> Result<(), CliError> {
        #[derive(serde::Serialize)]
        struct Envelope<'a, T: Serialize> {
            config: &'a serde_json::Value,
            seed: u64,
            #[serde(flatten)]
            body: &'a T,
        }
        let bytes = to_sci_json(&Envelope {
            config: &self.config,
            seed: self.seed,
            body,
        })?;
        self.atomic_write(&format!("{stem}.json"), &bytes)
    }

    /// Emit a tabular artifact as CSV or JSON depending on `--format`.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let mut text = String::new();
                text.push_str(&format!(
                    "# config={} seed={}\n",
                    self.config_line, self.seed
                ));
                text.push_str(&table.columns.join(","));
                text.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render_csv).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                self.atomic_write(&format!("{stem}.csv"), text.as_bytes())
            }
            Format::Json => {
                #[derive(serde::Serialize)]
                struct JsonTable<'a> {
                    config: &'a serde_json::Value,
                    seed: u64,
                    columns: &'a [String],
                    rows: &'a [Vec<Cell>],
                }
                let bytes = to_sci_json(&JsonTable {
                    config: &self.config,
                    seed: self.seed,
                    columns: &table.columns,
                    rows: &table.rows,
                })?;
                self.atomic_write(&format!("{stem}.json"), &bytes)
            }
        }
    }

    /// Emit a companion gnuplot script plotting columns `ycols` (1-based
    /// CSV column indices) against column `xcol` of `<stem>.csv`. No-op
    /// unless `--gnuplot` was given.
    pub fn write_gnuplot(
        &mut self,
        stem: &str,
        title: &str,
        table: &Table,
        xcol: usize,
        ycols: &[usize],
    ) -> Result<(), CliError> {
        if !self.gnuplot {
            return Ok(());
        }
        let mut text = String::new();
        text.push_str(&format!(
            "# config={} seed={}\n",
            self.config_line, self.seed
        ));
        text.push_str("set datafile separator \",\"\n");
        text.push_str("set datafile commentschars \"#\"\n");
        text.push_str(&format!("set title \"{title}\"\n"));
        text.push_str(&format!("set xlabel \"{}\"\n", table.columns[xcol - 1]));
        text.push_str("set key outside\n");
        let plots: Vec<String> = ycols
            .iter()
            .map(|&y| {
                format!(
                    "\"{stem}.csv\" using {xcol}:{y} with lines title \"{}\"",
                    table.columns[y - 1]
                )
            })
            .collect();
        text.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        self.atomic_write(&format!("{stem}.gp"), text.as_bytes())
    }
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// One cell of a tabular artifact.
#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render_csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl serde::Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(v) => ser.serialize_f64(*v),
            Cell::Int(v) => ser.serialize_i64(*v),
            Cell::Text(s) => ser.serialize_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

/// A column-named table with stable ordering.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; panics (programmer error) on column-count mismatch.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "table row width mismatch");
        self.rows.push(row);
    }
}

/// Split a complex value into the conventional `(re_, im_)` cell pair.
pub fn complex_cells(z: num_complex::Complex<f64>) -> [Cell; 2] {
    [Cell::Float(z.re), Cell::Float(z.im)]
}
