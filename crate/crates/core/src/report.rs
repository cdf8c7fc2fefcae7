//! CSV artifacts. Every file starts with `#` header lines (tool version,
//! SHA-256 of the generating configuration, seed) followed by a header row;
//! reals are written with 17 significant digits and nothing time-dependent
//! is recorded, so equal inputs give byte-identical files.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indestructible::IbpTable;
use crate::maximal::field::CurvatureSample;

pub const TOOL: &str = concat!("blaschke ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub tool: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl ArtifactHeader {
    pub fn new(config: &[u8], seed: u64) -> Self {
        let digest = Sha256::digest(config);
        ArtifactHeader {
            tool: TOOL.to_string(),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        }
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# tool: {}", self.tool)?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# seed: {}", self.seed)
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, header: &ArtifactHeader, mut w: W) -> Result<()> {
        header.write_to(&mut w)?;
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            csv.write_record(row).map_err(csv_error)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self, header: &ArtifactHeader) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write(header, &mut out)?;
        Ok(out)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

pub fn ibp_table(table: &IbpTable) -> CsvTable {
    let mut out = CsvTable::new(["n", "condition", "a_re", "a_im", "lhs", "rhs", "residual"]);
    for row in &table.rows {
        let r = &row.report;
        out.push(vec![
            row.n.to_string(),
            r.condition.as_str().to_string(),
            opt_real(r.a.map(|a| a.value().re)),
            opt_real(r.a.map(|a| a.value().im)),
            fmt_real(r.lhs),
            fmt_real(r.rhs),
            fmt_real(r.residual),
        ]);
    }
    out
}

/// Excluded samples have an empty `kappa` and `excluded_flag = 1`.
pub fn curvature_table(samples: &[CurvatureSample]) -> CsvTable {
    let mut out = CsvTable::new(["z_re", "z_im", "lambda", "kappa", "excluded_flag"]);
    for s in samples {
        out.push(vec![
            fmt_real(s.z.re),
            fmt_real(s.z.im),
            fmt_real(s.lambda),
            opt_real(s.kappa),
            u8::from(s.excluded()).to_string(),
        ]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Orbit,
    Field,
    ResidualTrajectory,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::Orbit => "orbit",
            PlotKind::Field => "field",
            PlotKind::ResidualTrajectory => "residual-trajectory",
        }
    }
}

/// Data a plot can be drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotSource {
    Orbit(Vec<Complex64>),
    Field(Vec<CurvatureSample>),
    /// `(n, residual)` pairs.
    ResidualTrajectory(Vec<(usize, f64)>),
}

impl PlotSource {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotSource::Orbit(_) => PlotKind::Orbit,
            PlotSource::Field(_) => PlotKind::Field,
            PlotSource::ResidualTrajectory(_) => PlotKind::ResidualTrajectory,
        }
    }
}

pub fn emit_plot_data(source: &PlotSource, kind: PlotKind) -> Result<CsvTable> {
    if source.kind() != kind {
        return Err(Error::KindMismatch {
            requested: kind.as_str(),
            available: source.kind().as_str(),
        });
    }
    Ok(match source {
        PlotSource::Orbit(points) => {
            let mut t = CsvTable::new(["re", "im"]);
            for p in points {
                t.push(vec![fmt_real(p.re), fmt_real(p.im)]);
            }
            t
        }
        PlotSource::Field(samples) => {
            let mut t = CsvTable::new(["z_re", "z_im", "lambda", "kappa"]);
            for s in samples {
                t.push(vec![fmt_real(s.z.re), fmt_real(s.z.im), fmt_real(s.lambda), opt_real(s.kappa)]);
            }
            t
        }
        PlotSource::ResidualTrajectory(rows) => {
            let mut t = CsvTable::new(["n", "residual"]);
            for &(n, r) in rows {
                t.push(vec![n.to_string(), fmt_real(r)]);
            }
            t
        }
    })
}
