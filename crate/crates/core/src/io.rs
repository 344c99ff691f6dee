//! Text formats for point sets, measures and spectra.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::autocorr::{Atom, AtomicMeasure};
use crate::diffraction::{DiffractionSpectrum, Peak, SpectrumMethod};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::substitution::ColouredPointSet;

const POINTS_MAGIC: &str = "# aperiodica points";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { line, msg: format!("bad number {s:?}: {e}") })
}

fn points_header(dim: usize, radius: f64, label: Option<&str>) -> String {
    format!("{POINTS_MAGIC} dim={dim} radius={} label={}", fmt_f64(radius), label.unwrap_or(""))
}

struct PointsHeader {
    dim: usize,
    radius: f64,
    label: Option<String>,
}

fn parse_points_header(line: &str) -> Result<PointsHeader> {
    let rest = line
        .strip_prefix(POINTS_MAGIC)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("expected header starting with {POINTS_MAGIC:?}") })?;
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let rest = rest.trim_start();
    let rest = rest.strip_prefix("dim=").ok_or_else(|| bad("missing dim="))?;
    let (dim, rest) = rest.split_once(' ').ok_or_else(|| bad("missing radius="))?;
    let dim: usize = dim.parse().map_err(|_| bad("bad dim"))?;
    let rest = rest.trim_start().strip_prefix("radius=").ok_or_else(|| bad("missing radius="))?;
    let (radius, rest) = rest.split_once(' ').unwrap_or((rest, ""));
    let radius = parse_f64(radius, 1)?;
    let label = match rest.trim_start().strip_prefix("label=") {
        Some("") | None => None,
        Some(l) => Some(l.to_string()),
    };
    Ok(PointsHeader { dim, radius, label })
}

pub fn write_points<W: Write>(mut w: W, ps: &PointSet) -> Result<()> {
    writeln!(w, "{}", points_header(ps.dim(), ps.sample_radius(), ps.label()))?;
    for p in ps.iter() {
        let row: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points<R: BufRead>(r: R) -> Result<PointSet> {
    let (header, rows) = read_rows(r)?;
    let mut coords = Vec::with_capacity(rows.len() * header.dim);
    for (line, fields) in rows {
        if fields.len() != header.dim {
            return Err(Error::Parse { line, msg: format!("expected {} values, found {}", header.dim, fields.len()) });
        }
        for f in fields {
            coords.push(parse_f64(&f, line)?);
        }
    }
    PointSet::from_flat(header.dim, coords, header.radius, header.label)
}

type Rows = Vec<(usize, Vec<String>)>;

fn read_rows<R: BufRead>(r: R) -> Result<(PointsHeader, Rows)> {
    let mut lines = r.lines();
    let first = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let header = parse_points_header(&first)?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        rows.push((i + 2, trimmed.split_whitespace().map(str::to_string).collect()));
    }
    Ok((header, rows))
}

pub fn write_coloured<W: Write>(mut w: W, cs: &ColouredPointSet) -> Result<()> {
    let ps = &cs.points;
    writeln!(w, "{}", points_header(ps.dim(), ps.sample_radius(), ps.label()))?;
    for (p, c) in ps.iter().zip(&cs.colours) {
        let row: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{} {c}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coloured<R: BufRead>(r: R) -> Result<ColouredPointSet> {
    let (header, rows) = read_rows(r)?;
    if header.dim != 1 {
        return Err(Error::Parse { line: 1, msg: format!("coloured sets are one-dimensional, got dim={}", header.dim) });
    }
    let mut pairs = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        if fields.len() != 2 {
            return Err(Error::Parse { line, msg: "expected position and symbol".into() });
        }
        let mut chars = fields[1].chars();
        let c = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(Error::Parse { line, msg: format!("bad symbol {:?}", fields[1]) }),
        };
        pairs.push((parse_f64(&fields[0], line)?, c));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coords: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n = coords.len();
    let ps = PointSet::from_flat(1, coords, header.radius, header.label)?;
    if ps.len() != n {
        return Err(Error::Parse { line: 0, msg: "coloured file contains coincident points".into() });
    }
    ColouredPointSet::new(ps, pairs.into_iter().map(|p| p.1).collect())
}

/// Sidecar fields of a measure file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureMeta {
    pub normalization_volume: f64,
    pub diff_cutoff: f64,
    pub cluster_tol: f64,
}

impl From<&AtomicMeasure> for MeasureMeta {
    fn from(m: &AtomicMeasure) -> Self {
        MeasureMeta { normalization_volume: m.normalization_volume, diff_cutoff: m.diff_cutoff, cluster_tol: m.cluster_tol }
    }
}

fn csv_header(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn write_measure_csv<W: Write>(mut w: W, m: &AtomicMeasure) -> Result<()> {
    let mut header = csv_header("z", m.dimension);
    header.push("weight".into());
    writeln!(w, "{}", header.join(","))?;
    for a in &m.atoms {
        let mut row: Vec<String> = a.position.iter().map(|&x| fmt_f64(x)).collect();
        row.push(fmt_f64(a.weight));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure_csv<R: BufRead>(r: R, meta: &MeasureMeta) -> Result<AtomicMeasure> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.last() != Some(&"weight") {
        return Err(Error::Parse { line: 1, msg: "last column must be weight".into() });
    }
    let dim = cols.len() - 1;
    if cols[..dim] != csv_header("z", dim) {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {header:?}") });
    }
    let mut atoms = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse { line: i + 2, msg: format!("expected {} fields", dim + 1) });
        }
        let position = fields[..dim].iter().map(|f| parse_f64(f, i + 2)).collect::<Result<Vec<_>>>()?;
        let weight = parse_f64(fields[dim], i + 2)?;
        let pair_count = (weight * meta.normalization_volume).round() as u64;
        atoms.push(Atom { position, weight, pair_count });
    }
    Ok(AtomicMeasure {
        dimension: dim,
        atoms,
        normalization_volume: meta.normalization_volume,
        diff_cutoff: meta.diff_cutoff,
        cluster_tol: meta.cluster_tol,
    })
}

/// Spectrum CSV: `k_1..k_N,intensity,amp_re,amp_im[,idx_1..idx_D]`. The index
/// columns are present when any peak carries a dual-lattice index; peaks
/// without one leave them empty.
pub fn write_spectrum_csv<W: Write>(mut w: W, s: &DiffractionSpectrum) -> Result<()> {
    let idx_len = s.peaks.iter().filter_map(|p| p.index.as_ref().map(Vec::len)).max().unwrap_or(0);
    let mut header = csv_header("k", s.dimension);
    header.extend(["intensity", "amp_re", "amp_im"].map(String::from));
    header.extend(csv_header("idx", idx_len));
    writeln!(w, "{}", header.join(","))?;
    for p in &s.peaks {
        let mut row: Vec<String> = p.k.iter().map(|&x| fmt_f64(x)).collect();
        row.push(fmt_f64(p.intensity));
        row.push(fmt_f64(p.amplitude.re));
        row.push(fmt_f64(p.amplitude.im));
        match &p.index {
            Some(idx) => row.extend(idx.iter().map(i64::to_string)),
            None => row.extend(std::iter::repeat_n(String::new(), idx_len)),
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: BufRead>(
    r: R,
    method: SpectrumMethod,
    sample_radius_used: Option<f64>,
) -> Result<DiffractionSpectrum> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let dim = cols.iter().take_while(|c| c.starts_with("k_")).count();
    let idx_len = cols.len().saturating_sub(dim + 3);
    let mut expected = csv_header("k", dim);
    expected.extend(["intensity", "amp_re", "amp_im"].map(String::from));
    expected.extend(csv_header("idx", idx_len));
    if dim == 0 || cols != expected {
        return Err(Error::Parse { line: 1, msg: format!("unexpected spectrum header {header:?}") });
    }
    let mut peaks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse { line: ln, msg: format!("expected {} fields", cols.len()) });
        }
        let k = fields[..dim].iter().map(|f| parse_f64(f, ln)).collect::<Result<Vec<_>>>()?;
        let intensity = parse_f64(fields[dim], ln)?;
        let amplitude = Complex64::new(parse_f64(fields[dim + 1], ln)?, parse_f64(fields[dim + 2], ln)?);
        let idx_fields = &fields[dim + 3..];
        let index = if idx_len == 0 || idx_fields.iter().all(|f| f.trim().is_empty()) {
            None
        } else {
            Some(
                idx_fields
                    .iter()
                    .map(|f| f.trim().parse::<i64>().map_err(|e| Error::Parse { line: ln, msg: format!("bad index {f:?}: {e}") }))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        peaks.push(Peak { k, intensity, amplitude, index });
    }
    Ok(DiffractionSpectrum::new(dim, peaks, sample_radius_used, method))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

pub fn save_points(path: &Path, ps: &PointSet) -> Result<()> {
    write_points(create(path)?, ps)
}

pub fn load_points(path: &Path) -> Result<PointSet> {
    read_points(open(path)?)
}

pub fn save_coloured(path: &Path, cs: &ColouredPointSet) -> Result<()> {
    write_coloured(create(path)?, cs)
}

pub fn load_coloured(path: &Path) -> Result<ColouredPointSet> {
    read_coloured(open(path)?)
}

pub fn save_measure_csv(path: &Path, m: &AtomicMeasure) -> Result<()> {
    write_measure_csv(create(path)?, m)
}

pub fn load_measure_csv(path: &Path, meta: &MeasureMeta) -> Result<AtomicMeasure> {
    read_measure_csv(open(path)?, meta)
}

pub fn save_spectrum_csv(path: &Path, s: &DiffractionSpectrum) -> Result<()> {
    write_spectrum_csv(create(path)?, s)
}

pub fn load_spectrum_csv(path: &Path, method: SpectrumMethod) -> Result<DiffractionSpectrum> {
    read_spectrum_csv(open(path)?, method, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::poisson_sample;

    #[test]
    fn points_roundtrip() {
        let ps = poisson_sample(2, 1.0, 10.0, 7).unwrap().with_label("poisson control");
        let mut buf = Vec::new();
        write_points(&mut buf, &ps).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# aperiodica points dim=2 radius=1.0000000000000000e1 label=poisson control\n"));
        let back = read_points(buf.as_slice()).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn header_without_label() {
        let back = read_points("# aperiodica points dim=1 radius=3 label=\n1.5\n-2\n".as_bytes()).unwrap();
        assert_eq!(back.coords(), &[-2.0, 1.5]);
        assert_eq!(back.label(), None);
        assert!(read_points("# other\n".as_bytes()).is_err());
        assert!(matches!(
            read_points("# aperiodica points dim=1 radius=3 label=\n1 2\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn spectrum_roundtrip() {
        let peaks = vec![
            Peak { k: vec![0.1], intensity: 0.25, amplitude: Complex64::new(0.5, 0.0), index: Some(vec![1, -2]) },
            Peak { k: vec![0.0], intensity: 1.0 / 3.0, amplitude: Complex64::new(0.1, 1e-300), index: None },
        ];
        let s = DiffractionSpectrum::new(1, peaks, None, SpectrumMethod::Analytic);
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("k_1,intensity,amp_re,amp_im,idx_1,idx_2\n"));
        let back = read_spectrum_csv(buf.as_slice(), SpectrumMethod::Analytic, None).unwrap();
        assert_eq!(back, s);
    }
}
