use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use aperiodica::autocorr::AtomicMeasure;
use aperiodica::diffraction::DiffractionSpectrum;
use aperiodica::io::{fmt_f64, write_measure_csv, write_spectrum_csv, MeasureMeta};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `<output>.json`, next to the artifact.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Metadata written next to every artifact. Keys are sorted, so identical
/// runs give identical bytes.
pub struct Sidecar {
    fields: Map<String, Value>,
}

impl Sidecar {
    pub fn new(command: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Sidecar> {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("version".into(), json!(aperiodica::VERSION));
        fields.insert("seed".into(), json!(seed));
        fields.insert("config".into(), serde_json::to_value(config)?);
        Ok(Sidecar { fields })
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.fields.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn write(&self, output: &Path) -> Result<()> {
        write_json(&sidecar_path(output), &self.fields)
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(path: &Path, s: &DiffractionSpectrum, format: Format) -> Result<()> {
    match format {
        Format::Csv => Ok(write_spectrum_csv(create(path)?, s)?),
        Format::Json => write_json(path, s),
    }
}

pub fn write_measure(path: &Path, m: &AtomicMeasure, format: Format, sidecar: &mut Sidecar) -> Result<()> {
    let meta = MeasureMeta::from(m);
    sidecar.set("normalization_volume", meta.normalization_volume)?;
    sidecar.set("diff_cutoff", meta.diff_cutoff)?;
    sidecar.set("cluster_tol", meta.cluster_tol)?;
    match format {
        Format::Csv => Ok(write_measure_csv(create(path)?, m)?),
        Format::Json => write_json(path, m),
    }
}

#[derive(Debug, Serialize)]
pub struct PeriodRow {
    pub t: Vec<f64>,
    pub defect: f64,
    pub kept: bool,
}

pub fn write_periods(path: &Path, rows: &[PeriodRow], dim: usize, format: Format) -> Result<()> {
    if format == Format::Json {
        return write_json(path, &rows);
    }
    let mut w = create(path)?;
    let mut header: Vec<String> = (1..=dim).map(|i| format!("t_{i}")).collect();
    header.push("defect".into());
    header.push("kept".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cols: Vec<String> = r.t.iter().map(|&x| fmt_f64(x)).collect();
        cols.push(fmt_f64(r.defect));
        cols.push(u8::from(r.kept).to_string());
        writeln!(w, "{}", cols.join(","))?;
    }
    w.flush()?;
    Ok(())
}
