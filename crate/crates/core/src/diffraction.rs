//! Empirical and analytic diffraction spectra.
//!
//! The empirical amplitude of a sample `Λ ∩ B_n` at wave vector `ξ` is
//! `c_n(ξ) = |B_n|^{-1} Σ_x e^{-i x·ξ}`; its squared modulus approximates the
//! Bragg intensity at `ξ` for large `n`. Every sum runs over the sample in
//! its canonical (lexicographic) order with compensated accumulation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::autocorr::AtomicMeasure;
use crate::cutproject::ReciprocalPoint;
use crate::error::{Error, Result};
use crate::numeric::{dist, dot, lex_cmp, norm, CompensatedSum};
use crate::pointset::PointSet;
use crate::spatial::{for_each_offset, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Empirical,
    Analytic,
    Smoothed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub k: Vec<f64>,
    pub intensity: f64,
    pub amplitude: Complex64,
    /// Dual-lattice index when the peak came from a reciprocal point.
    pub index: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffractionSpectrum {
    pub dimension: usize,
    pub peaks: Vec<Peak>,
    pub sample_radius_used: Option<f64>,
    pub method: SpectrumMethod,
}

impl DiffractionSpectrum {
    /// Sorts peaks by `|k|`, then lexicographically.
    pub fn new(
        dimension: usize,
        mut peaks: Vec<Peak>,
        sample_radius_used: Option<f64>,
        method: SpectrumMethod,
    ) -> Self {
        peaks.sort_by(|a, b| {
            norm(&a.k).total_cmp(&norm(&b.k)).then_with(|| lex_cmp(&a.k, &b.k))
        });
        DiffractionSpectrum { dimension, peaks, sample_radius_used, method }
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// The `count` most intense peaks, ties resolved by canonical order.
    pub fn strongest(&self, count: usize) -> DiffractionSpectrum {
        let mut order: Vec<usize> = (0..self.peaks.len()).collect();
        order.sort_by(|&a, &b| self.peaks[b].intensity.total_cmp(&self.peaks[a].intensity).then(a.cmp(&b)));
        let peaks = order.into_iter().take(count).map(|i| self.peaks[i].clone()).collect();
        DiffractionSpectrum::new(self.dimension, peaks, self.sample_radius_used, self.method)
    }

    pub fn max_intensity(&self) -> f64 {
        self.peaks.iter().map(|p| p.intensity).fold(0.0, f64::max)
    }
}

/// `c_n(ξ) = |B_n|^{-1} Σ_{x ∈ Λ∩B_n} e^{-i x·ξ}`.
pub fn empirical_amplitude(ps: &PointSet, xi: &[f64]) -> Result<Complex64> {
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    ps.check_dim(xi.len())?;
    Ok(amplitude_unchecked(ps, xi))
}

fn amplitude_unchecked(ps: &PointSet, xi: &[f64]) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for x in ps.iter() {
        let (s, c) = dot(x, xi).sin_cos();
        re.add(c);
        im.add(-s);
    }
    Complex64::new(re.value(), im.value()) / ps.volume()
}

/// Empirical amplitudes at every candidate; candidates with
/// `|c_n|² < intensity_floor` are dropped.
pub fn empirical_spectrum(
    ps: &PointSet,
    candidates: &[Vec<f64>],
    intensity_floor: f64,
) -> Result<DiffractionSpectrum> {
    let tagged: Vec<(Vec<f64>, Option<Vec<i64>>)> =
        candidates.iter().map(|k| (k.clone(), None)).collect();
    empirical_tagged(ps, tagged, intensity_floor)
}

/// As [`empirical_spectrum`], keeping the dual-lattice index of each peak.
pub fn empirical_spectrum_at(
    ps: &PointSet,
    candidates: &[ReciprocalPoint],
    intensity_floor: f64,
) -> Result<DiffractionSpectrum> {
    let tagged = candidates
        .iter()
        .map(|rp| (rp.k.clone(), Some(rp.integer_index.clone())))
        .collect();
    empirical_tagged(ps, tagged, intensity_floor)
}

fn empirical_tagged(
    ps: &PointSet,
    candidates: Vec<(Vec<f64>, Option<Vec<i64>>)>,
    intensity_floor: f64,
) -> Result<DiffractionSpectrum> {
    if let Some((k, _)) = candidates.iter().find(|(k, _)| k.len() != ps.dim()) {
        return Err(Error::DimensionMismatch { expected: ps.dim(), found: k.len() });
    }
    if candidates.is_empty() {
        return Ok(DiffractionSpectrum::new(
            ps.dim(),
            vec![],
            Some(ps.sample_radius()),
            SpectrumMethod::Empirical,
        ));
    }
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    let peaks: Vec<Peak> = candidates
        .into_par_iter()
        .filter_map(|(k, index)| {
            let amplitude = amplitude_unchecked(ps, &k);
            let intensity = amplitude.norm_sqr();
            (intensity >= intensity_floor).then_some(Peak { k, intensity, amplitude, index })
        })
        .collect();
    Ok(DiffractionSpectrum::new(ps.dim(), peaks, Some(ps.sample_radius()), SpectrumMethod::Empirical))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedPeak {
    pub k: Vec<f64>,
    pub intensity: f64,
}

/// Local maximiser of `|c_n|²` near `xi0`, inside the box of half-width
/// `search_radius`.
///
/// Each axis is scanned at an eighth of the natural peak width `2π/n`, then
/// the best bracket is narrowed by golden section to `10⁻³·2π/n`. In more
/// than one dimension axes are cycled until the step falls below that
/// tolerance. A maximum on the edge of the search box yields
/// [`Error::NoAscent`] carrying the edge value.
pub fn refine_peak(ps: &PointSet, xi0: &[f64], search_radius: f64) -> Result<RefinedPeak> {
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    ps.check_dim(xi0.len())?;
    if !(search_radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "search radius must be positive, got {search_radius}"
        )));
    }
    let width = 2.0 * std::f64::consts::PI / ps.sample_radius();
    let tol = 1e-3 * width;
    let step = (width / 8.0).min(search_radius / 4.0);
    let intensity = |k: &[f64]| amplitude_unchecked(ps, k).norm_sqr();

    let start_value = intensity(xi0);
    let mut cur = xi0.to_vec();
    let mut cur_value = start_value;
    for _sweep in 0..50 {
        let mut moved: f64 = 0.0;
        for axis in 0..cur.len() {
            let lo = xi0[axis] - search_radius;
            let hi = xi0[axis] + search_radius;
            let mut probe = cur.clone();
            let mut f = |t: f64| {
                probe[axis] = t;
                intensity(&probe)
            };
            match line_maximum(&mut f, lo, hi, step, tol) {
                LineMax::Interior(t, v) => {
                    if v > cur_value {
                        moved = moved.max((t - cur[axis]).abs());
                        cur[axis] = t;
                        cur_value = v;
                    }
                }
                LineMax::Boundary(t, v) => {
                    let mut k = cur.clone();
                    k[axis] = t;
                    return Err(Error::NoAscent { k, intensity: v });
                }
            }
        }
        if moved < tol {
            break;
        }
    }
    if cur_value <= start_value {
        return Ok(RefinedPeak { k: xi0.to_vec(), intensity: start_value });
    }
    Ok(RefinedPeak { k: cur, intensity: cur_value })
}

enum LineMax {
    Interior(f64, f64),
    Boundary(f64, f64),
}

fn line_maximum<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, step: f64, tol: f64) -> LineMax {
    let count = ((hi - lo) / step).ceil().max(2.0) as usize;
    let h = (hi - lo) / count as f64;
    let values: Vec<f64> = (0..=count).map(|i| f(lo + h * i as f64)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    if best == 0 || best == count {
        return LineMax::Boundary(lo + h * best as f64, values[best]);
    }
    // golden section on the bracket around the best scan point
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo + h * (best - 1) as f64, lo + h * (best + 1) as f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let (t, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    let scan = (lo + h * best as f64, values[best]);
    if v >= scan.1 {
        LineMax::Interior(t, v)
    } else {
        LineMax::Interior(scan.0, scan.1)
    }
}

/// Keeps candidates whose intensity is stable over the two largest radii:
/// `|I_last - I_prev| < stability_tol · max(I_last, I_prev)` and
/// `I_last >= intensity_floor`. Intensities come from the largest sample.
pub fn bragg_scan(
    samples: &[PointSet],
    candidates: &[Vec<f64>],
    stability_tol: f64,
    intensity_floor: f64,
) -> Result<DiffractionSpectrum> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("bragg scan needs at least two radii".into()));
    }
    let dim = samples[0].dim();
    if let Some(s) = samples.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
    }
    let prev = &samples[samples.len() - 2];
    let last = &samples[samples.len() - 1];
    let a = empirical_spectrum(prev, candidates, 0.0)?;
    let b = empirical_spectrum(last, candidates, 0.0)?;
    // same candidates, same canonical order
    let peaks = a
        .peaks
        .into_iter()
        .zip(b.peaks)
        .filter(|(p, q)| {
            let scale = p.intensity.max(q.intensity);
            (q.intensity - p.intensity).abs() < stability_tol * scale && q.intensity >= intensity_floor
        })
        .map(|(_, q)| q)
        .collect();
    Ok(DiffractionSpectrum::new(dim, peaks, Some(last.sample_radius()), SpectrumMethod::Empirical))
}

/// Gaussian-damped cosine transform of an autocorrelation approximant,
/// `Σ_z w_z cos(k·z) exp(-|z|²/(2σ²))`. Real because atoms come in `±z`
/// pairs of equal weight.
pub fn smoothed_transform(
    gamma: &AtomicMeasure,
    k_grid: &[Vec<f64>],
    damping_width: f64,
) -> Result<Vec<(Vec<f64>, f64)>> {
    if let Some(k) = k_grid.iter().find(|k| k.len() != gamma.dimension) {
        return Err(Error::InconsistentDimension { measure: gamma.dimension, k: k.len() });
    }
    if !(damping_width > 0.0) || damping_width > gamma.diff_cutoff {
        return Err(Error::InvalidArgument(format!(
            "damping width {damping_width} must lie in (0, {}]",
            gamma.diff_cutoff
        )));
    }
    let inv = 1.0 / (2.0 * damping_width * damping_width);
    let damped: Vec<(&[f64], f64)> = gamma
        .atoms
        .iter()
        .map(|a| {
            let r2: f64 = a.position.iter().map(|x| x * x).sum();
            (a.position.as_slice(), a.weight * (-r2 * inv).exp())
        })
        .collect();
    Ok(k_grid
        .par_iter()
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (z, w) in &damped {
                acc.add(w * dot(k, z).cos());
            }
            (k.clone(), acc.value())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub a_index: usize,
    pub b_index: usize,
    pub k_distance: f64,
    /// `|I_a - I_b| / I_b`.
    pub rel_intensity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub matched_pairs: Vec<MatchedPair>,
    pub max_rel_intensity_error: f64,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
}

/// Greedy nearest matching of peak locations within `k_match_tol`;
/// closest pairs are committed first. `b` is the reference for relative
/// intensity errors.
pub fn compare_spectra(
    a: &DiffractionSpectrum,
    b: &DiffractionSpectrum,
    k_match_tol: f64,
) -> Result<SpectrumComparison> {
    if a.dimension != b.dimension {
        return Err(Error::DimensionMismatch { expected: a.dimension, found: b.dimension });
    }
    let cell = k_match_tol.max(1e-12);
    let coords: Vec<f64> = b.peaks.iter().flat_map(|p| p.k.iter().copied()).collect();
    let grid = SpatialGrid::new(&coords, b.dimension, cell);
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in a.peaks.iter().enumerate() {
        grid.for_each_within(&p.k, k_match_tol, |j, d2| candidates.push((d2.sqrt(), i, j)));
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.peaks.len()];
    let mut used_b = vec![false; b.peaks.len()];
    let mut matched_pairs = Vec::new();
    let mut max_rel: f64 = 0.0;
    for (d, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        let (ia, ib) = (a.peaks[i].intensity, b.peaks[j].intensity);
        let rel = if ib > 0.0 {
            (ia - ib).abs() / ib
        } else if ia == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_rel = max_rel.max(rel);
        matched_pairs.push(MatchedPair { a_index: i, b_index: j, k_distance: d, rel_intensity_error: rel });
    }
    matched_pairs.sort_by_key(|m| m.a_index);
    Ok(SpectrumComparison {
        matched_pairs,
        max_rel_intensity_error: max_rel,
        unmatched_a: (0..a.peaks.len()).filter(|&i| !used_a[i]).collect(),
        unmatched_b: (0..b.peaks.len()).filter(|&j| !used_b[j]).collect(),
    })
}

/// Relative-denseness witness for the peaks with intensity at least
/// `min_intensity` inside `|k| <= k_radius`: the diameter of the largest
/// ball inside `B_{k_radius}` that contains no such peak.
///
/// In one dimension this is exact (consecutive gaps and the two end
/// segments). In higher dimension ball centres are probed on a grid of
/// spacing `probe_spacing`. Returns infinity if no peak qualifies.
pub fn peak_gap_bound(
    spectrum: &DiffractionSpectrum,
    min_intensity: f64,
    k_radius: f64,
    probe_spacing: f64,
) -> Result<f64> {
    let kept: Vec<&[f64]> = spectrum
        .peaks
        .iter()
        .filter(|p| p.intensity >= min_intensity && norm(&p.k) <= k_radius)
        .map(|p| p.k.as_slice())
        .collect();
    if kept.is_empty() {
        return Ok(f64::INFINITY);
    }
    if spectrum.dimension == 1 {
        let mut xs: Vec<f64> = vec![-k_radius];
        xs.extend(kept.iter().map(|k| k[0]));
        xs.push(k_radius);
        xs.sort_by(f64::total_cmp);
        return Ok(xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
    }
    if !(probe_spacing > 0.0) {
        return Err(Error::InvalidArgument("probe spacing must be positive".into()));
    }
    let coords: Vec<f64> = kept.iter().flat_map(|k| k.iter().copied()).collect();
    let dim = spectrum.dimension;
    let grid = SpatialGrid::new(&coords, dim, (k_radius / 20.0).max(probe_spacing));
    let span = (k_radius / probe_spacing).floor() as i64;
    let mut probes = Vec::new();
    for_each_offset(dim, span, |off| {
        let q: Vec<f64> = off.iter().map(|&o| o as f64 * probe_spacing).collect();
        if norm(&q) <= k_radius {
            probes.push(q);
        }
    });
    let radius = probes
        .par_iter()
        .map(|q| {
            let empty = grid.nearest(q).map_or(f64::INFINITY, |(j, _)| dist(q, kept[j]));
            empty.min(k_radius - norm(q))
        })
        .reduce(|| 0.0, f64::max);
    Ok(2.0 * radius)
}
