//! Uniform spatial hash over a flat coordinate buffer.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::numeric::dist2;

pub type CellKey = SmallVec<[i64; 4]>;

pub struct SpatialGrid<'a> {
    coords: &'a [f64],
    dim: usize,
    cell: f64,
    order: Vec<u32>,
    cells: HashMap<CellKey, (u32, u32)>,
    key_min: Vec<i64>,
    key_max: Vec<i64>,
}

impl<'a> SpatialGrid<'a> {
    /// Builds a grid with cubic cells of side `cell` over `coords`
    /// (row-major, `dim` values per point).
    pub fn new(coords: &'a [f64], dim: usize, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let n = coords.len().checked_div(dim).unwrap_or(0);
        let mut keyed: Vec<(CellKey, u32)> = (0..n)
            .map(|i| (cell_key(&coords[i * dim..(i + 1) * dim], cell), i as u32))
            .collect();
        keyed.sort_unstable();
        let mut cells = HashMap::new();
        let mut order = Vec::with_capacity(n);
        let mut key_min = vec![i64::MAX; dim];
        let mut key_max = vec![i64::MIN; dim];
        let mut start = 0usize;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                end += 1;
            }
            for (a, &k) in keyed[start].0.iter().enumerate() {
                key_min[a] = key_min[a].min(k);
                key_max[a] = key_max[a].max(k);
            }
            cells.insert(keyed[start].0.clone(), (start as u32, end as u32));
            start = end;
        }
        order.extend(keyed.into_iter().map(|(_, i)| i));
        SpatialGrid {
            coords,
            dim,
            cell,
            order,
            cells,
            key_min,
            key_max,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn cell_members(&self, key: &CellKey) -> &[u32] {
        match self.cells.get(key) {
            Some(&(s, e)) => &self.order[s as usize..e as usize],
            None => &[],
        }
    }

    /// Calls `f(index, squared_distance)` for every stored point within
    /// distance `r` of `q`. Visiting order is cell order, then index order
    /// within a cell.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, q: &[f64], r: f64, mut f: F) {
        let span = (r / self.cell).ceil() as i64;
        let center = cell_key(q, self.cell);
        let r2 = r * r;
        for_each_offset(self.dim, span, |off| {
            let key: CellKey = center.iter().zip(off).map(|(c, o)| c + o).collect();
            for &j in self.cell_members(&key) {
                let d2 = dist2(self.point(j as usize), q);
                if d2 <= r2 {
                    f(j as usize, d2);
                }
            }
        });
    }

    /// Nearest stored point to `q`, ties resolved towards the smaller index.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let center = cell_key(q, self.cell);
        // shells beyond this radius contain no cells
        let max_shell = center
            .iter()
            .enumerate()
            .map(|(a, &c)| (c - self.key_min[a]).abs().max((self.key_max[a] - c).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        for shell in 0..=max_shell {
            if let Some((_, d2)) = best {
                let reach = (shell - 1).max(0) as f64 * self.cell;
                if reach * reach >= d2 {
                    break;
                }
            }
            for_each_shell_offset(self.dim, shell, |off| {
                let key: CellKey = center.iter().zip(off).map(|(c, o)| c + o).collect();
                for &j in self.cell_members(&key) {
                    let d2 = dist2(self.point(j as usize), q);
                    let better = match best {
                        None => true,
                        Some((bj, bd)) => d2 < bd || (d2 == bd && (j as usize) < bj),
                    };
                    if better {
                        best = Some((j as usize, d2));
                    }
                }
            });
        }
        best.map(|(j, d2)| (j, d2.sqrt()))
    }

    /// Index of a stored point within `tol` of `q`, if any (smallest index).
    pub fn find_within(&self, q: &[f64], tol: f64) -> Option<usize> {
        let mut hit: Option<usize> = None;
        self.for_each_within(q, tol, |j, _| {
            if hit.is_none_or(|h| j < h) {
                hit = Some(j);
            }
        });
        hit
    }
}

pub fn cell_key(p: &[f64], cell: f64) -> CellKey {
    p.iter().map(|&x| (x / cell).floor() as i64).collect()
}

/// Visits every integer offset in `[-span, span]^dim` in odometer order.
pub fn for_each_offset<F: FnMut(&[i64])>(dim: usize, span: i64, mut f: F) {
    let mut off: SmallVec<[i64; 4]> = SmallVec::from_elem(-span, dim);
    loop {
        f(&off);
        let mut a = 0;
        loop {
            if a == dim {
                return;
            }
            if off[a] < span {
                off[a] += 1;
                break;
            }
            off[a] = -span;
            a += 1;
        }
    }
}

fn for_each_shell_offset<F: FnMut(&[i64])>(dim: usize, shell: i64, mut f: F) {
    for_each_offset(dim, shell, |off| {
        if off.iter().map(|o| o.abs()).max().unwrap_or(0) == shell {
            f(off);
        }
    });
}
