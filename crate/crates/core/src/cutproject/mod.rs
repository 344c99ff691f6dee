//! Cut-and-project schemes with Euclidean internal space.
//!
//! The lattice `L̃ ⊂ R^N × R^M` is given by a basis matrix whose columns are
//! the generators; the first `N` rows are physical components, the last `M`
//! internal ones. Characters are `x ↦ e^{i k·x}`, so the dual lattice is
//! `2π B^{-T} Z^{N+M}`.

mod presets;
mod window;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffraction::{DiffractionSpectrum, Peak, SpectrumMethod};
use crate::error::{Error, Result};
use crate::numeric::{lex_cmp, norm, unit_ball_volume};
use crate::pointset::PointSet;
use crate::spatial::{for_each_offset, SpatialGrid};

pub use presets::{preset, Preset, PRESET_NAMES};
pub use window::{Window, WindowSpec};

/// Default cap on enumerated lattice candidates.
pub const ENUMERATION_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy)]
pub struct SchemeOptions {
    /// Integer vectors with `|z|∞` up to this bound are searched for a
    /// violation of injectivity of the physical projection.
    pub injectivity_search_bound: i64,
    /// Physical images shorter than this count as zero.
    pub injectivity_tol: f64,
    /// Largest tolerated hole among internal images in `[-1, 1]^M`.
    pub dense_gap_tol: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions { injectivity_search_bound: 50, injectivity_tol: 1e-9, dense_gap_tol: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SchemeWarning {
    /// The internal images of the searched lattice vectors leave a hole of
    /// size `gap` in the reference box. Finite data cannot certify
    /// denseness; this only flags a suspicious scheme.
    DensenessSuspect { gap: f64, search_bound: i64 },
}

#[derive(Debug, Clone)]
pub struct CutProjectScheme {
    physical_dim: usize,
    internal_dim: usize,
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    /// `2π B^{-T}`: columns generate the dual lattice.
    dual: DMatrix<f64>,
    haar_scale: f64,
    injectivity_search_bound: i64,
    warnings: Vec<SchemeWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocalPoint {
    pub k: Vec<f64>,
    pub k_star: Vec<f64>,
    /// Coordinates in the dual basis.
    pub integer_index: Vec<i64>,
}

/// A model-set point together with its internal image and lattice index.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub physical: Vec<f64>,
    pub internal: Vec<f64>,
    pub index: Vec<i64>,
}

impl CutProjectScheme {
    /// Validates a scheme from its basis, given row by row.
    pub fn new(basis_rows: &[Vec<f64>], physical_dim: usize, internal_dim: usize) -> Result<Self> {
        Self::with_options(basis_rows, physical_dim, internal_dim, SchemeOptions::default())
    }

    pub fn with_options(
        basis_rows: &[Vec<f64>],
        physical_dim: usize,
        internal_dim: usize,
        opts: SchemeOptions,
    ) -> Result<Self> {
        let d = physical_dim + internal_dim;
        if physical_dim == 0 {
            return Err(Error::InvalidArgument("physical dimension must be positive".into()));
        }
        if basis_rows.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: basis_rows.len() });
        }
        if let Some(r) = basis_rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: r.len() });
        }
        let basis = DMatrix::from_fn(d, d, |i, j| basis_rows[i][j]);
        let det = basis.determinant();
        if !(det.abs() > 1e-12) || !det.is_finite() {
            return Err(Error::SingularBasis { det });
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis { det })?;
        let dual = inverse.transpose() * (2.0 * std::f64::consts::PI);
        let mut scheme = CutProjectScheme {
            physical_dim,
            internal_dim,
            basis,
            inverse,
            dual,
            haar_scale: 1.0 / det.abs(),
            injectivity_search_bound: opts.injectivity_search_bound,
            warnings: Vec::new(),
        };
        scheme.certify_injective(opts)?;
        if let Some(gap) = scheme.denseness_gap() {
            if gap > opts.dense_gap_tol {
                scheme.warnings.push(SchemeWarning::DensenessSuspect {
                    gap,
                    search_bound: DENSENESS_SEARCH_BOUND_MAX.min(denseness_bound(d)),
                });
            }
        }
        Ok(scheme)
    }

    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn lattice_dim(&self) -> usize {
        self.physical_dim + self.internal_dim
    }

    /// `s` with `s · |det B| = 1`: internal Lebesgue measure times `s`
    /// gives the fundamental domain of `L̃` measure one.
    pub fn haar_scale(&self) -> f64 {
        self.haar_scale
    }

    pub fn warnings(&self) -> &[SchemeWarning] {
        &self.warnings
    }

    pub fn injectivity_search_bound(&self) -> i64 {
        self.injectivity_search_bound
    }

    /// Basis as rows.
    pub fn basis_rows(&self) -> Vec<Vec<f64>> {
        self.basis.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Physical and internal parts of `B · index`.
    pub fn star(&self, index: &[i64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if index.len() != self.lattice_dim() {
            return Err(Error::DimensionMismatch { expected: self.lattice_dim(), found: index.len() });
        }
        let z = DVector::from_iterator(index.len(), index.iter().map(|&v| v as f64));
        let v = &self.basis * z;
        let (phys, int) = v.as_slice().split_at(self.physical_dim);
        Ok((phys.to_vec(), int.to_vec()))
    }

    /// Haar measure `θ_H(W)` of a window: the density of `⋏(W)`.
    pub fn window_density(&self, w: &Window) -> f64 {
        self.haar_scale * w.volume()
    }

    fn certify_injective(&self, opts: SchemeOptions) -> Result<()> {
        let (n, m) = (self.physical_dim, self.internal_dim);
        if m == 0 {
            return Ok(());
        }
        let d = n + m;
        let bound = opts.injectivity_search_bound;
        let proj = self.basis.rows(0, n).into_owned();
        // pick the best conditioned set of N "solved" columns
        let mut best: Option<(f64, Vec<usize>)> = None;
        for cols in combinations(d, n) {
            let sub = DMatrix::from_fn(n, n, |i, j| proj[(i, cols[j])]);
            let det = sub.determinant().abs();
            if best.as_ref().is_none_or(|(b, _)| det > *b) {
                best = Some((det, cols));
            }
        }
        let (det, solved) = best.expect("at least one column subset");
        let free: Vec<usize> = (0..d).filter(|c| !solved.contains(c)).collect();
        if det < 1e-12 {
            // physical projection has rank < N; any kernel vector is a witness
            return Err(Error::ProjectionNotInjective { index: vec![0; d] });
        }
        let sub = DMatrix::from_fn(n, n, |i, j| proj[(i, solved[j])]);
        let sub_inv = sub.try_inverse().ok_or(Error::SingularBasis { det })?;
        let mut z = vec![0i64; d];
        let mut witness: Option<Vec<i64>> = None;
        for_each_offset(m, bound, |off| {
            if witness.is_some() {
                return;
            }
            let rhs = DVector::from_fn(n, |i, _| {
                -free.iter().zip(off).map(|(&c, &o)| proj[(i, c)] * o as f64).sum::<f64>()
            });
            let sol = &sub_inv * rhs;
            for (&c, &o) in free.iter().zip(off) {
                z[c] = o;
            }
            for (j, &c) in solved.iter().enumerate() {
                let r = sol[j].round();
                if r.abs() > bound as f64 {
                    return;
                }
                z[c] = r as i64;
            }
            if z.iter().all(|&v| v == 0) {
                return;
            }
            let phys_small = (0..n).all(|i| {
                let v: f64 = (0..d).map(|j| proj[(i, j)] * z[j] as f64).sum();
                v.abs() < opts.injectivity_tol
            });
            if phys_small {
                witness = Some(z.clone());
            }
        });
        match witness {
            Some(index) => Err(Error::ProjectionNotInjective { index }),
            None => Ok(()),
        }
    }

    /// Largest distance from a probe in `[-1, 1]^M` to the internal image of
    /// a small lattice vector; `None` when `M = 0`.
    fn denseness_gap(&self) -> Option<f64> {
        let (n, m) = (self.physical_dim, self.internal_dim);
        if m == 0 {
            return None;
        }
        let d = n + m;
        let bound = DENSENESS_SEARCH_BOUND_MAX.min(denseness_bound(d));
        let mut images = Vec::new();
        for_each_offset(d, bound, |off| {
            let y: Vec<f64> = (n..d)
                .map(|i| (0..d).map(|j| self.basis[(i, j)] * off[j] as f64).sum())
                .collect();
            if y.iter().all(|v| v.abs() <= 1.5) {
                images.extend(y);
            }
        });
        if images.is_empty() {
            return Some(f64::INFINITY);
        }
        let grid = SpatialGrid::new(&images, m, 0.1);
        let steps = 20;
        let mut gap: f64 = 0.0;
        for_each_offset(m, steps, |off| {
            let q: Vec<f64> = off.iter().map(|&o| o as f64 / steps as f64).collect();
            if let Some((_, dd)) = grid.nearest(&q) {
                gap = gap.max(dd);
            }
        });
        Some(gap)
    }

    /// Exhaustive enumeration of lattice points with `|π(Bz)| <= radius`
    /// and `π_int(Bz) ∈ W`.
    ///
    /// Integer vectors are walked coordinate by coordinate inside the
    /// ellipsoid `|x|²/R² + |y - c|²/ρ² <= 2`, which contains
    /// `B_R × ball(c, ρ)` with `ρ` the half-diagonal of the window's
    /// bounding box; at each level the admissible range of the next
    /// coordinate is exact, so no candidate of the cylinder is missed.
    pub fn generate_lifted(&self, w: &Window, radius: f64) -> Result<Vec<LiftedPoint>> {
        let (n, m) = (self.physical_dim, self.internal_dim);
        let mut out = self.enumerate(w, radius, ENUMERATION_BUDGET, |z, x, y, acc: &mut Vec<LiftedPoint>| {
            acc.push(LiftedPoint { physical: x.to_vec(), internal: y.to_vec(), index: z.to_vec() })
        })?;
        debug_assert!(out.iter().all(|p| p.physical.len() == n && p.internal.len() == m));
        out.sort_by(|a, b| lex_cmp(&a.physical, &b.physical));
        Ok(out)
    }

    /// The model set `⋏(W) ∩ B_radius` as a point set.
    pub fn generate_model_set(&self, w: &Window, radius: f64) -> Result<PointSet> {
        self.generate_model_set_with_budget(w, radius, ENUMERATION_BUDGET)
    }

    pub fn generate_model_set_with_budget(
        &self,
        w: &Window,
        radius: f64,
        budget: f64,
    ) -> Result<PointSet> {
        let coords = self.enumerate(w, radius, budget, |_, x, _, acc: &mut Vec<f64>| {
            acc.extend_from_slice(x)
        })?;
        Ok(PointSet::from_distinct(self.physical_dim, coords, radius, None))
    }

    fn enumerate<T, F>(&self, w: &Window, radius: f64, budget: f64, emit: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[i64], &[f64], &[f64], &mut Vec<T>) + Sync,
    {
        let (n, m) = (self.physical_dim, self.internal_dim);
        let d = n + m;
        if w.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: w.dim() });
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("region radius must be positive, got {radius}")));
        }
        let (lo, hi) = w.bounding_box();
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half_diag = 0.5 * norm(&lo.iter().zip(&hi).map(|(a, b)| b - a).collect::<Vec<_>>());
        // degenerate windows still need a well-conditioned form
        let rho = half_diag.max(1e-3);
        let bound_c: f64 = if m == 0 { 1.0 } else { 2.0 };

        let estimate = unit_ball_volume(d)
            * bound_c.powf(d as f64 / 2.0)
            * radius.powi(n as i32)
            * rho.powi(m as i32)
            * self.haar_scale;
        if estimate > budget {
            return Err(Error::EnumerationTooLarge { count: estimate, budget });
        }

        let scale = DVector::from_fn(d, |i, _| if i < n { 1.0 / radius } else { 1.0 / rho });
        let scaled = DMatrix::from_fn(d, d, |i, j| self.basis[(i, j)] * scale[i]);
        let gram = scaled.transpose() * &scaled;
        let chol = nalgebra::Cholesky::new(gram)
            .ok_or_else(|| Error::InvalidArgument("enumeration form is not positive definite".into()))?;
        let upper = chol.l().transpose();
        let mut shift = DVector::zeros(d);
        for a in 0..m {
            shift[n + a] = center[a];
        }
        let zc = &self.inverse * shift;

        let ctx = Enumerator {
            d,
            n,
            upper: &upper,
            zc: zc.as_slice(),
            bound: bound_c * (1.0 + 1e-9),
            basis: &self.basis,
            radius,
            window: w,
            visited: AtomicU64::new(0),
            abort: AtomicBool::new(false),
            budget: budget as u64,
        };
        let top = d - 1;
        let (lo_top, hi_top) = ctx.range(top, 0.0, 0.0);
        let chunks: Vec<Vec<T>> = (lo_top..=hi_top)
            .into_par_iter()
            .map(|v| {
                let mut z = vec![0i64; d];
                let mut acc = Vec::new();
                z[top] = v;
                let t = upper[(top, top)] * (v as f64 - zc[top]);
                ctx.descend(top, &mut z, t * t, &emit, &mut acc);
                acc
            })
            .collect();
        if ctx.abort.load(Ordering::Relaxed) {
            return Err(Error::EnumerationTooLarge {
                count: ctx.visited.load(Ordering::Relaxed) as f64,
                budget,
            });
        }
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Dual-lattice points `(k, k⋆) = 2π B^{-T} m` with `|m|∞ <= index_bound`
    /// and `|k| <= k_radius`, sorted by `|k|`, then `k`, then `m`.
    pub fn reciprocal_points(&self, k_radius: f64, index_bound: i64) -> Vec<ReciprocalPoint> {
        let (n, d) = (self.physical_dim, self.lattice_dim());
        let limit = k_radius * (1.0 + 1e-12);
        let tops: Vec<i64> = (-index_bound..=index_bound).collect();
        let mut pts: Vec<ReciprocalPoint> = tops
            .par_iter()
            .flat_map_iter(|&first| {
                let mut local = Vec::new();
                for_each_offset(d - 1, index_bound, |rest| {
                    let mut idx = Vec::with_capacity(d);
                    idx.push(first);
                    idx.extend_from_slice(rest);
                    let k: Vec<f64> = (0..n).map(|i| self.dual_row_dot(i, &idx)).collect();
                    if norm(&k) <= limit {
                        let k_star = (n..d).map(|i| self.dual_row_dot(i, &idx)).collect();
                        local.push(ReciprocalPoint { k, k_star, integer_index: idx });
                    }
                });
                local
            })
            .collect();
        pts.sort_by(|a, b| {
            norm(&a.k)
                .total_cmp(&norm(&b.k))
                .then_with(|| lex_cmp(&a.k, &b.k))
                .then_with(|| a.integer_index.cmp(&b.integer_index))
        });
        pts
    }

    fn dual_row_dot(&self, row: usize, idx: &[i64]) -> f64 {
        idx.iter().enumerate().map(|(j, &v)| self.dual[(row, j)] * v as f64).sum()
    }

    /// Closed-form pure-point diffraction of the regular model set `⋏(W)`:
    /// intensity `A_k = |s ∫_W e^{i k⋆·y} dy|²` at every reciprocal point
    /// in range, with `s` the Haar scale. Peaks below `intensity_floor`
    /// are dropped.
    pub fn analytic_diffraction(
        &self,
        w: &Window,
        k_radius: f64,
        index_bound: i64,
        intensity_floor: f64,
    ) -> Result<DiffractionSpectrum> {
        if w.dim() != self.internal_dim {
            return Err(Error::DimensionMismatch { expected: self.internal_dim, found: w.dim() });
        }
        let recips = self.reciprocal_points(k_radius, index_bound);
        let peaks: Vec<Option<Peak>> = recips
            .into_par_iter()
            .map(|rp| {
                let amplitude = w.fourier(&rp.k_star)? * self.haar_scale;
                let intensity = amplitude.norm_sqr();
                Ok((intensity >= intensity_floor).then_some(Peak {
                    k: rp.k,
                    intensity,
                    amplitude,
                    index: Some(rp.integer_index),
                }))
            })
            .collect::<Result<_>>()?;
        Ok(DiffractionSpectrum::new(
            self.physical_dim,
            peaks.into_iter().flatten().collect(),
            None,
            SpectrumMethod::Analytic,
        ))
    }
}

const DENSENESS_SEARCH_BOUND_MAX: i64 = 50;

/// Largest `b` with `(2b + 1)^d <= 2·10^5`.
fn denseness_bound(d: usize) -> i64 {
    let side = (2e5f64).powf(1.0 / d as f64).floor() as i64;
    ((side - 1) / 2).max(1)
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..d {
            cur.push(c);
            rec(c + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

struct Enumerator<'a> {
    d: usize,
    n: usize,
    upper: &'a DMatrix<f64>,
    zc: &'a [f64],
    bound: f64,
    basis: &'a DMatrix<f64>,
    radius: f64,
    window: &'a Window,
    visited: AtomicU64,
    abort: AtomicBool,
    budget: u64,
}

impl Enumerator<'_> {
    /// Admissible integer range for coordinate `level`, given the
    /// off-diagonal contribution `s` of higher coordinates and the
    /// quadratic mass `partial` already used.
    fn range(&self, level: usize, s: f64, partial: f64) -> (i64, i64) {
        let rem = self.bound - partial;
        if rem < 0.0 {
            return (1, 0);
        }
        let u = self.upper[(level, level)];
        let half = rem.sqrt() / u;
        let mid = self.zc[level] - s / u;
        let slack = 1e-9 * (1.0 + mid.abs());
        ((mid - half - slack).ceil() as i64, (mid + half + slack).floor() as i64)
    }

    fn descend<T, F>(&self, level: usize, z: &mut [i64], partial: f64, emit: &F, acc: &mut Vec<T>)
    where
        F: Fn(&[i64], &[f64], &[f64], &mut Vec<T>),
    {
        if self.abort.load(Ordering::Relaxed) {
            return;
        }
        if level == 0 {
            self.leaf(z, emit, acc);
            return;
        }
        let next = level - 1;
        let s: f64 = (level..self.d)
            .map(|j| self.upper[(next, j)] * (z[j] as f64 - self.zc[j]))
            .sum();
        let (lo, hi) = self.range(next, s, partial);
        let u = self.upper[(next, next)];
        for v in lo..=hi {
            z[next] = v;
            let t = u * (v as f64 - self.zc[next]) + s;
            self.descend(next, z, partial + t * t, emit, acc);
        }
        z[next] = 0;
    }

    fn leaf<T, F>(&self, z: &[i64], emit: &F, acc: &mut Vec<T>)
    where
        F: Fn(&[i64], &[f64], &[f64], &mut Vec<T>),
    {
        let seen = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        if seen > self.budget {
            self.abort.store(true, Ordering::Relaxed);
            return;
        }
        let mut v = [0.0f64; 16];
        let v = if self.d <= 16 { &mut v[..self.d] } else { return };
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = (0..self.d).map(|j| self.basis[(i, j)] * z[j] as f64).sum();
        }
        let (x, y) = v.split_at(self.n);
        if norm(x) <= self.radius && self.window.contains(y) {
            emit(z, x, y, acc);
        }
    }
}

/// Scheme and window as read from a JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub physical_dim: usize,
    pub internal_dim: usize,
    /// Row-major basis; columns are the lattice generators.
    pub basis: Vec<Vec<f64>>,
    pub window: WindowSpec,
}

impl SchemeConfig {
    pub fn build(&self) -> Result<(CutProjectScheme, Window)> {
        let scheme = CutProjectScheme::new(&self.basis, self.physical_dim, self.internal_dim)?;
        let window = self.window.build()?;
        if window.dim() != self.internal_dim {
            return Err(Error::DimensionMismatch { expected: self.internal_dim, found: window.dim() });
        }
        Ok((scheme, window))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TAU: f64 = 1.618_033_988_749_895;

    fn fib() -> CutProjectScheme {
        CutProjectScheme::new(&[vec![1.0, TAU], vec![1.0, 1.0 - TAU]], 1, 1).unwrap()
    }

    #[test]
    fn fibonacci_haar_scale() {
        // |det| = |1·(1-τ) - τ·1| = 2τ - 1 = √5
        assert_relative_eq!(fib().haar_scale(), 1.0 / 5f64.sqrt(), max_relative = 1e-14);
        assert!(fib().warnings().is_empty());
    }

    #[test]
    fn identity_basis_not_injective() {
        let err = CutProjectScheme::new(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1, 1).unwrap_err();
        match err {
            Error::ProjectionNotInjective { index } => {
                assert_eq!(index[0], 0);
                assert_ne!(index[1], 0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn singular_basis_rejected() {
        let err = CutProjectScheme::new(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1, 1).unwrap_err();
        assert!(matches!(err, Error::SingularBasis { .. }));
    }

    #[test]
    fn rational_internal_images_warn() {
        // internal images are integers: not dense
        let s = CutProjectScheme::new(&[vec![1.0, 2f64.sqrt()], vec![0.0, 1.0]], 1, 1).unwrap();
        assert!(matches!(s.warnings(), [SchemeWarning::DensenessSuspect { gap, .. }] if *gap >= 0.5));
    }

    #[test]
    fn degenerate_lattice_scheme() {
        let s = CutProjectScheme::new(&[vec![0.7]], 1, 0).unwrap();
        let w = Window::interval_box(&[]).unwrap();
        let ps = s.generate_model_set(&w, 10.0).unwrap();
        let expected: Vec<Vec<f64>> = (-14..=14).map(|m| vec![0.7 * m as f64]).collect();
        assert_eq!(ps.to_vecs(), expected);
        assert_relative_eq!(s.window_density(&w), 1.0 / 0.7);
    }

    #[test]
    fn star_map_values() {
        let s = fib();
        assert_eq!(s.star(&[1, 0]).unwrap(), (vec![1.0], vec![1.0]));
        assert_eq!(s.star(&[0, 0]).unwrap(), (vec![0.0], vec![0.0]));
        let (x, y) = s.star(&[0, 1]).unwrap();
        assert_relative_eq!(x[0], TAU);
        assert_relative_eq!(y[0], -1.0 / TAU, max_relative = 1e-14);
    }

    #[test]
    fn reciprocal_trivial_cases() {
        let z = CutProjectScheme::new(&[vec![1.0]], 1, 0).unwrap();
        let pts = z.reciprocal_points(7.0, 3);
        let ks: Vec<f64> = pts.iter().map(|p| p.k[0]).collect();
        let tp = 2.0 * std::f64::consts::PI;
        assert_eq!(ks, vec![0.0, -tp, tp]);
        let only_zero = fib().reciprocal_points(100.0, 0);
        assert_eq!(only_zero.len(), 1);
        assert_eq!(only_zero[0].k, vec![0.0]);
    }

    #[test]
    fn empty_interior_window() {
        let s = fib();
        let w = Window::interval_box(&[(0.3, 0.3)]).unwrap();
        assert!(s.generate_model_set(&w, 50.0).unwrap().is_empty());
        let closed = Window::new_box(&[(0.0, 0.0)], &[false]).unwrap();
        let hits = s.generate_model_set(&closed, 50.0).unwrap();
        assert_eq!(hits.to_vecs(), vec![vec![0.0]]);
    }

    #[test]
    fn budget_is_enforced() {
        let s = fib();
        let w = Window::interval_box(&[(-1.0, TAU - 1.0)]).unwrap();
        let err = s.generate_model_set_with_budget(&w, 1e4, 100.0).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { .. }));
    }

    #[test]
    fn config_json() {
        let json = r#"{"physical_dim":1,"internal_dim":1,
            "basis":[[1.0,1.618033988749895],[1.0,-0.6180339887498949]],
            "window":{"shape":"box","intervals":[[-1.0,0.6180339887498949]],"half_open":[true]}}"#;
        let cfg: SchemeConfig = serde_json::from_str(json).unwrap();
        let (s, w) = cfg.build().unwrap();
        assert_relative_eq!(s.window_density(&w), TAU / 5f64.sqrt(), max_relative = 1e-14);
    }
}
