//! Finite-volume approximants of the autocorrelation measure
//! `γ_n = |B_n|^{-1} Σ_{x,y ∈ Λ∩B_n} δ_{x-y}`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::numeric::{dist2, lex_cmp};
use crate::pointset::PointSet;
use crate::spatial::{for_each_offset, SpatialGrid};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Vec<f64>,
    pub weight: f64,
    /// Number of ordered pairs `(x, y)` whose difference fell into this atom.
    pub pair_count: u64,
}

/// A finite sum of weighted point masses, sorted by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub dimension: usize,
    pub atoms: Vec<Atom>,
    pub normalization_volume: f64,
    pub diff_cutoff: f64,
    pub cluster_tol: f64,
}

impl AtomicMeasure {
    pub fn total_weight(&self) -> f64 {
        self.total_pairs() as f64 / self.normalization_volume
    }

    pub fn total_pairs(&self) -> u64 {
        self.atoms.iter().map(|a| a.pair_count).sum()
    }

    /// Weight of the atom within `tol` of `z`, zero if there is none.
    pub fn weight_near(&self, z: &[f64], tol: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| dist2(&a.position, z) <= tol * tol)
            .map_or(0.0, |a| a.weight)
    }
}

type Key = SmallVec<[i64; 4]>;

/// Quantised difference key with the lexicographically smallest raw
/// difference seen and the number of pairs.
type Bins = HashMap<Key, (Vec<f64>, u64)>;

fn insert(bins: &mut Bins, diff: &[f64], tol: f64) {
    let key: Key = diff.iter().map(|&d| (d / tol).round() as i64).collect();
    match bins.get_mut(&key) {
        Some((rep, count)) => {
            *count += 1;
            if lex_cmp(diff, rep).is_lt() {
                rep.clear();
                rep.extend_from_slice(diff);
            }
        }
        None => {
            bins.insert(key, (diff.to_vec(), 1));
        }
    }
}

fn merge_bins(mut a: Bins, b: Bins) -> Bins {
    for (key, (rep, count)) in b {
        match a.get_mut(&key) {
            Some((r, c)) => {
                *c += count;
                if lex_cmp(&rep, r).is_lt() {
                    *r = rep;
                }
            }
            None => {
                a.insert(key, (rep, count));
            }
        }
    }
    a
}

/// Joins bins whose keys touch (every coordinate within one step) and turns
/// each component into an atom. The representative is the lexicographically
/// smallest raw difference, so the result does not depend on pair order.
fn bins_to_measure(bins: Bins, dim: usize, volume: f64, cutoff: f64, tol: f64) -> AtomicMeasure {
    let mut keys: Vec<Key> = bins.keys().cloned().collect();
    keys.sort_unstable();
    let index: HashMap<&Key, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut parent: Vec<usize> = (0..keys.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, key) in keys.iter().enumerate() {
        for_each_offset(dim, 1, |off| {
            let nb: Key = key.iter().zip(off).map(|(k, o)| k + o).collect();
            if let Some(&j) = index.get(&nb) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        });
    }
    let mut groups: HashMap<usize, (Vec<f64>, u64)> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        let root = find(&mut parent, i);
        let (rep, count) = &bins[key];
        let entry = groups.entry(root).or_insert_with(|| (rep.clone(), 0));
        entry.1 += count;
        if lex_cmp(rep, &entry.0).is_lt() {
            entry.0 = rep.clone();
        }
    }
    let mut atoms: Vec<Atom> = groups
        .into_values()
        .map(|(position, pair_count)| Atom { position, weight: pair_count as f64 / volume, pair_count })
        .collect();
    atoms.sort_by(|a, b| lex_cmp(&a.position, &b.position));
    AtomicMeasure { dimension: dim, atoms, normalization_volume: volume, diff_cutoff: cutoff, cluster_tol: tol }
}

fn check_args(ps: &PointSet, diff_cutoff: f64, cluster_tol: f64) -> Result<()> {
    if ps.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(diff_cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!("diff cutoff must be positive, got {diff_cutoff}")));
    }
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("cluster tol must be positive, got {cluster_tol}")));
    }
    let limit = 2.0 * ps.sample_radius();
    if diff_cutoff > limit {
        return Err(Error::CutoffTooLarge { cutoff: diff_cutoff, limit });
    }
    Ok(())
}

/// Autocorrelation approximant on `|z| <= diff_cutoff`.
///
/// Ordered pairs (self-pairs included) are found through a spatial hash with
/// cell size `diff_cutoff`; differences are binned at `cluster_tol`.
pub fn autocorrelation(ps: &PointSet, diff_cutoff: f64, cluster_tol: f64) -> Result<AtomicMeasure> {
    check_args(ps, diff_cutoff, cluster_tol)?;
    let dim = ps.dim();
    let grid = ps.grid(diff_cutoff);
    let bins = (0..ps.len())
        .into_par_iter()
        .fold(Bins::new, |mut bins, i| {
            let x = ps.point(i);
            let mut diff = vec![0.0; dim];
            grid.for_each_within(x, diff_cutoff, |j, _| {
                let y = ps.point(j);
                for a in 0..dim {
                    diff[a] = x[a] - y[a];
                }
                insert(&mut bins, &diff, cluster_tol);
            });
            bins
        })
        .reduce(Bins::new, merge_bins);
    Ok(bins_to_measure(bins, dim, ps.volume(), diff_cutoff, cluster_tol))
}

/// Reference `O(♯²)` double loop with the same binning as [`autocorrelation`].
pub fn autocorrelation_naive(ps: &PointSet, diff_cutoff: f64, cluster_tol: f64) -> Result<AtomicMeasure> {
    check_args(ps, diff_cutoff, cluster_tol)?;
    let dim = ps.dim();
    let r2 = diff_cutoff * diff_cutoff;
    let mut bins = Bins::new();
    let mut diff = vec![0.0; dim];
    for x in ps.iter() {
        for y in ps.iter() {
            if dist2(y, x) <= r2 {
                for a in 0..dim {
                    diff[a] = x[a] - y[a];
                }
                insert(&mut bins, &diff, cluster_tol);
            }
        }
    }
    Ok(bins_to_measure(bins, dim, ps.volume(), diff_cutoff, cluster_tol))
}

/// Largest weight discrepancy between the approximants of two samples of
/// the same set; an atom present in only one of them counts at full weight.
/// Meant for `radius(large) >= 2·radius(small)`; identical samples give 0.
pub fn convergence_report(
    ps_small: &PointSet,
    ps_large: &PointSet,
    diff_cutoff: f64,
    cluster_tol: f64,
) -> Result<f64> {
    if ps_small.dim() != ps_large.dim() {
        return Err(Error::IncompatibleSamples(format!(
            "dimensions {} and {} differ",
            ps_small.dim(),
            ps_large.dim()
        )));
    }
    let small = autocorrelation(ps_small, diff_cutoff, cluster_tol)?;
    let large = autocorrelation(ps_large, diff_cutoff, cluster_tol)?;
    let dim = small.dimension;
    let match_tol = 4.0 * cluster_tol;
    let coords: Vec<f64> = large.atoms.iter().flat_map(|a| a.position.iter().copied()).collect();
    let grid = SpatialGrid::new(&coords, dim, match_tol);
    let mut used = vec![false; large.atoms.len()];
    let mut worst: f64 = 0.0;
    for a in &small.atoms {
        let mut hit = None;
        grid.for_each_within(&a.position, match_tol, |j, _| {
            if !used[j] && hit.is_none_or(|h| j < h) {
                hit = Some(j);
            }
        });
        match hit {
            Some(j) => {
                used[j] = true;
                worst = worst.max((a.weight - large.atoms[j].weight).abs());
            }
            None => worst = worst.max(a.weight),
        }
    }
    for (j, b) in large.atoms.iter().enumerate() {
        if !used[j] {
            worst = worst.max(b.weight);
        }
    }
    Ok(worst)
}
