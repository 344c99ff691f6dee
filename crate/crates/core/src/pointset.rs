//! Finite samples of Delone sets and order diagnostics on them.
//!
//! A [`PointSet`] stands for `Λ ∩ B_n`, the part of an infinite point set
//! inside the ball of radius `n = sample_radius` about the origin. Points are
//! deduplicated at [`MATCH_TOL`] and kept in lexicographic order, which fixes
//! the summation order of everything computed downstream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{ball_volume, dist, lex_cmp, norm, norm_lex_cmp};
use crate::spatial::{for_each_offset, SpatialGrid};

/// Absolute tolerance under which two points are considered identical.
pub const MATCH_TOL: f64 = 1e-8;
/// Allowed excess of a point's norm over the sample radius.
pub const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    sample_radius: f64,
    label: Option<String>,
}

impl PointSet {
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        sample_radius: f64,
        label: Option<String>,
    ) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, sample_radius, label)
    }

    /// Builds a sample from row-major coordinates, deduplicating at
    /// [`MATCH_TOL`] and sorting lexicographically.
    pub fn from_flat(
        dim: usize,
        coords: Vec<f64>,
        sample_radius: f64,
        label: Option<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if !(sample_radius > 0.0) || !sample_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sample radius must be positive, got {sample_radius}"
            )));
        }
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("point {i} is not finite")));
            }
            let r = norm(p);
            if r > sample_radius + BOUNDARY_SLACK {
                return Err(Error::PointOutsideSample { index: i, norm: r, radius: sample_radius });
            }
        }
        let sorted = sort_rows(dim, &coords);
        let deduped = dedup_sorted(dim, sorted);
        Ok(PointSet { dim, coords: deduped, sample_radius, label })
    }

    /// Caller guarantees the rows are pairwise farther apart than
    /// [`MATCH_TOL`] and lie inside the sample ball; only sorting happens.
    pub(crate) fn from_distinct(
        dim: usize,
        coords: Vec<f64>,
        sample_radius: f64,
        label: Option<String>,
    ) -> Self {
        let coords = sort_rows(dim, &coords);
        PointSet { dim, coords, sample_radius, label }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn sample_radius(&self) -> f64 {
        self.sample_radius
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    /// Lebesgue volume of the sample ball `B_n`.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dim, self.sample_radius)
    }

    /// `♯(Λ ∩ B_n) / |B_n|`.
    pub fn density(&self) -> f64 {
        self.len() as f64 / self.volume()
    }

    /// Points of the sample inside the closed ball of radius `radius`.
    pub fn restrict(&self, radius: f64) -> Result<PointSet> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let coords: Vec<f64> = self
            .iter()
            .filter(|p| norm(p) <= radius)
            .flatten()
            .copied()
            .collect();
        Ok(PointSet { dim: self.dim, coords, sample_radius: radius, label: self.label.clone() })
    }

    /// The translate `ps + t`; the sample radius grows by `|t|` so the
    /// invariant on norms keeps holding.
    pub fn translate(&self, t: &[f64]) -> Result<PointSet> {
        self.check_dim(t.len())?;
        let coords: Vec<f64> = self
            .iter()
            .flat_map(|p| p.iter().zip(t).map(|(x, s)| x + s))
            .collect();
        Ok(PointSet::from_distinct(
            self.dim,
            coords,
            self.sample_radius + norm(t),
            self.label.clone(),
        ))
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found });
        }
        Ok(())
    }

    /// Typical nearest-neighbour scale `(|B_n| / ♯)^(1/N)`, used to size grids.
    pub(crate) fn mean_spacing(&self) -> f64 {
        let n = self.len().max(1) as f64;
        (self.volume() / n).powf(1.0 / self.dim as f64)
    }

    pub(crate) fn grid(&self, cell: f64) -> SpatialGrid<'_> {
        SpatialGrid::new(&self.coords, self.dim, cell)
    }
}

fn sort_rows(dim: usize, coords: &[f64]) -> Vec<f64> {
    let n = coords.len() / dim;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.par_sort_unstable_by(|&a, &b| {
        lex_cmp(&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim])
    });
    let mut out = Vec::with_capacity(coords.len());
    for i in idx {
        out.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
    }
    out
}

fn dedup_sorted(dim: usize, coords: Vec<f64>) -> Vec<f64> {
    let n = coords.len() / dim;
    if n < 2 {
        return coords;
    }
    let grid = SpatialGrid::new(&coords, dim, MATCH_TOL * 4.0);
    let mut keep = vec![true; n];
    for i in 0..n {
        if !keep[i] {
            continue;
        }
        grid.for_each_within(&coords[i * dim..(i + 1) * dim], MATCH_TOL, |j, _| {
            if j > i {
                keep[j] = false;
            }
        });
    }
    coords
        .chunks_exact(dim)
        .zip(keep)
        .filter(|(_, k)| *k)
        .flat_map(|(p, _)| p.iter().copied())
        .collect()
}

/// Exact minimum pairwise distance, `None` for fewer than two points.
/// Sweep along the first coordinate; rows are already sorted by it.
pub fn min_pairwise_distance(ps: &PointSet) -> Option<f64> {
    let n = ps.len();
    if n < 2 {
        return None;
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p = ps.point(i);
        for j in i + 1..n {
            let q = ps.point(j);
            if q[0] - p[0] >= best {
                break;
            }
            let d = dist(p, q);
            if d < best {
                best = d;
            }
        }
    }
    Some(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeloneReport {
    /// Observed `2r`: the minimum pairwise distance.
    pub packing_diameter: f64,
    /// Observed `R` on the probe grid, away from the sample boundary.
    pub covering_radius: f64,
    pub density_estimate: f64,
    pub probe_spacing: f64,
    /// Radius of the ball in which probes were placed.
    pub probe_region_radius: f64,
}

/// Delone constants of a sample.
///
/// The covering radius is the largest distance from a probe-grid point to
/// the sample. A first pass on a grid four times coarser, restricted to
/// `B_{n/2}`, estimates `R`; the final pass keeps probes inside
/// `B_{n - 2R}` so the truncated boundary does not inflate the value.
pub fn delone_report(ps: &PointSet, probe_spacing: f64) -> Result<DeloneReport> {
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    if ps.len() < 2 {
        return Err(Error::DegenerateSample { count: ps.len() });
    }
    if !(probe_spacing > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "probe spacing must be positive, got {probe_spacing}"
        )));
    }
    let packing_diameter = min_pairwise_distance(ps).expect("at least two points");
    let grid = ps.grid(ps.mean_spacing());
    let n = ps.sample_radius();
    let coarse = covering_on_grid(&grid, ps.dim(), 4.0 * probe_spacing, 0.5 * n);
    let guard = 2.0 * coarse;
    let region = n - guard;
    if !(region > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample radius {n} too small for covering estimate (guard {guard})"
        )));
    }
    let covering_radius = covering_on_grid(&grid, ps.dim(), probe_spacing, region);
    Ok(DeloneReport {
        packing_diameter,
        covering_radius,
        density_estimate: ps.density(),
        probe_spacing,
        probe_region_radius: region,
    })
}

fn covering_on_grid(grid: &SpatialGrid<'_>, dim: usize, spacing: f64, radius: f64) -> f64 {
    let span = (radius / spacing).floor() as i64;
    let mut probes: Vec<f64> = Vec::new();
    for_each_offset(dim, span, |off| {
        let q: Vec<f64> = off.iter().map(|&o| o as f64 * spacing).collect();
        if norm(&q) <= radius {
            probes.extend_from_slice(&q);
        }
    });
    probes
        .par_chunks_exact(dim)
        .map(|q| grid.nearest(q).map(|(_, d)| d).unwrap_or(f64::INFINITY))
        .reduce(|| 0.0, f64::max)
}

/// All differences `x - y` with `|x - y| <= cutoff`, deduplicated.
pub fn difference_set(ps: &PointSet, cutoff: f64) -> Result<PointSet> {
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    let limit = 2.0 * ps.sample_radius();
    if !(cutoff > 0.0) || cutoff > limit {
        return Err(Error::CutoffTooLarge { cutoff, limit });
    }
    let grid = ps.grid(cutoff);
    let dim = ps.dim();
    let chunks: Vec<Vec<f64>> = (0..ps.len())
        .into_par_iter()
        .map(|i| {
            let x = ps.point(i);
            let mut out = Vec::new();
            grid.for_each_within(x, cutoff, |j, _| {
                out.extend(x.iter().zip(ps.point(j)).map(|(a, b)| a - b));
            });
            out
        })
        .collect();
    let all: Vec<f64> = chunks.into_iter().flatten().collect();
    PointSet::from_flat(dim, all, cutoff, Some("difference set".into()))
}

#[derive(Debug, Clone, Copy)]
pub struct MeyerOptions {
    /// The difference set counts as uniformly discrete when its minimum
    /// gap exceeds this value.
    pub gap_threshold: f64,
    /// Give up on the witness `F` once it would exceed this size.
    pub f_max: usize,
}

impl Default for MeyerOptions {
    fn default() -> Self {
        MeyerOptions { gap_threshold: MATCH_TOL * 10.0, f_max: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeyerReport {
    pub uniformly_discrete_diff: bool,
    /// Minimum gap of the difference set; infinite when it is `{0}`.
    pub min_gap: f64,
    /// Finite `F` with `(Λ - Λ) ∩ B_cutoff ⊆ Λ + F` on the patch, if the
    /// greedy cover stayed below `f_max`. Absence is inconclusive.
    #[serde(rename = "witness_F")]
    pub witness_f: Option<Vec<Vec<f64>>>,
}

/// Finite-patch evidence for the Meyer property.
pub fn meyer_check(ps: &PointSet, cutoff: f64, opts: MeyerOptions) -> Result<MeyerReport> {
    let diffs = difference_set(ps, cutoff)?;
    let min_gap = min_pairwise_distance(&diffs).unwrap_or(f64::INFINITY);
    let uniformly_discrete_diff = min_gap > opts.gap_threshold;

    let mut order: Vec<&[f64]> = diffs.iter().collect();
    order.sort_by(|a, b| norm_lex_cmp(a, b));
    let grid = ps.grid(ps.mean_spacing());
    let mut witness: Vec<Vec<f64>> = Vec::new();
    let mut complete = true;
    let mut probe = vec![0.0; ps.dim()];
    for d in order {
        let covered = witness.iter().any(|f| {
            for (a, (x, y)) in d.iter().zip(f).enumerate() {
                probe[a] = x - y;
            }
            grid.find_within(&probe, MATCH_TOL).is_some()
        });
        if covered {
            continue;
        }
        if witness.len() == opts.f_max {
            complete = false;
            break;
        }
        let (j, _) = grid.nearest(d).expect("nonempty sample");
        witness.push(d.iter().zip(ps.point(j)).map(|(a, b)| a - b).collect());
    }
    Ok(MeyerReport {
        uniformly_discrete_diff,
        min_gap,
        witness_f: complete.then_some(witness),
    })
}

/// Density of `(Λ \ (Λ + t)) ∪ ((Λ + t) \ Λ)` inside `B_{n - guard}`.
///
/// Membership of `Λ + t` is only known inside that ball when
/// `guard >= |t|`, so the admissible range is `|t| <= guard < n`.
pub fn almost_period_defect(ps: &PointSet, t: &[f64], guard: f64) -> Result<f64> {
    ps.check_dim(t.len())?;
    let shift = norm(t);
    let n = ps.sample_radius();
    if !(guard >= shift) || !(guard < n) {
        return Err(Error::ShiftTooLarge { shift, guard, radius: n });
    }
    let radius = n - guard;
    let grid = ps.grid(ps.mean_spacing().max(4.0 * MATCH_TOL));
    let count = (0..ps.len())
        .into_par_iter()
        .map(|i| {
            let x = ps.point(i);
            let mut c = 0usize;
            // x in Λ but not in Λ + t
            if norm(x) <= radius {
                let back: Vec<f64> = x.iter().zip(t).map(|(a, s)| a - s).collect();
                if grid.find_within(&back, MATCH_TOL).is_none() {
                    c += 1;
                }
            }
            // x + t in Λ + t but not in Λ
            let fwd: Vec<f64> = x.iter().zip(t).map(|(a, s)| a + s).collect();
            if norm(&fwd) <= radius && grid.find_within(&fwd, MATCH_TOL).is_none() {
                c += 1;
            }
            c
        })
        .sum::<usize>();
    Ok(count as f64 / ball_volume(ps.dim(), radius))
}

/// Candidates whose almost-period defect is at most `eps`, sorted by norm.
pub fn statistical_almost_periods(
    ps: &PointSet,
    eps: f64,
    candidates: &[Vec<f64>],
    guard: f64,
) -> Result<Vec<Vec<f64>>> {
    let defects: Vec<f64> = candidates
        .iter()
        .map(|t| almost_period_defect(ps, t, guard))
        .collect::<Result<_>>()?;
    let mut kept: Vec<Vec<f64>> = candidates
        .iter()
        .zip(defects)
        .filter(|(_, d)| *d <= eps)
        .map(|(t, _)| t.clone())
        .collect();
    kept.sort_by(|a, b| norm_lex_cmp(a, b));
    Ok(kept)
}

/// `round(density · |B_radius|)` i.i.d. uniform points in the ball, drawn
/// by rejection from the bounding cube with a seeded ChaCha8 stream.
pub fn poisson_sample(dim: usize, density: f64, radius: f64, seed: u64) -> Result<PointSet> {
    if dim == 0 || !(density > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidArgument(
            "poisson sample needs positive dimension, density and radius".into(),
        ));
    }
    let count = (density * ball_volume(dim, radius)).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(count * dim);
    let mut p = vec![0.0; dim];
    let mut accepted = 0;
    while accepted < count {
        for x in p.iter_mut() {
            *x = rng.random_range(-radius..=radius);
        }
        if norm(&p) <= radius {
            coords.extend_from_slice(&p);
            accepted += 1;
        }
    }
    PointSet::from_flat(dim, coords, radius, Some(format!("poisson density={density} seed={seed}")))
}

/// `a·Z^N ∩ B_radius`.
pub fn lattice_sample(dim: usize, spacing: f64, radius: f64) -> Result<PointSet> {
    if dim == 0 || !(spacing > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidArgument("lattice sample needs positive arguments".into()));
    }
    let span = (radius / spacing).floor() as i64;
    let mut coords = Vec::new();
    for_each_offset(dim, span, |off| {
        let p: Vec<f64> = off.iter().map(|&o| o as f64 * spacing).collect();
        if norm(&p) <= radius {
            coords.extend_from_slice(&p);
        }
    });
    Ok(PointSet::from_distinct(dim, coords, radius, Some(format!("lattice:{spacing}"))))
}
