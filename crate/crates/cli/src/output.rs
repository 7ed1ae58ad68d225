use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wavemap_modes::connection::ScanReport;
use wavemap_modes::Complex64;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub timestamp_unix: u64,
    pub config: RunConfig,
    pub payload: T,
}

impl<T> Envelope<T> {
    pub fn new(config: RunConfig, payload: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp_unix: timestamp(),
            config,
            payload,
        }
    }
}

/// `SOURCE_DATE_EPOCH` when set, so repeated runs produce identical files.
fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

/// One row per grid point: `lambda,miss,abel_wronskian,classification,error`.
pub fn write_scan_csv(path: &Path, report: &ScanReport) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "lambda",
        "miss",
        "abel_wronskian",
        "classification",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for p in &report.points {
        let class = p
            .classification
            .map(|c| format!("{c:?}"))
            .unwrap_or_default();
        w.write_record([
            format!("{}", p.lambda),
            opt(p.normalized_miss),
            opt(p.abel_wronskian),
            class,
            p.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

/// Whitespace-separated `rho u_re u_im du_re du_im` with a `#` header line.
pub fn write_profile(
    path: &Path,
    rho: &[f64],
    u: &[Complex64],
    du: &[Complex64],
) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# rho u_re u_im du_re du_im")?;
    for ((r, u), d) in rho.iter().zip(u).zip(du) {
        writeln!(
            w,
            "{r:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            u.re, u.im, d.re, d.im
        )?;
    }
    w.flush()
}
