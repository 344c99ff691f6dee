//! Small numeric helpers shared by the analysis modules.

use std::cmp::Ordering;

/// Neumaier compensated accumulator. Summation order is the caller's
/// iteration order, so results are reproducible for a fixed input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Lebesgue volume of the Euclidean ball of radius `r` in dimension `dim`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    unit_ball_volume(dim) * r.powi(dim as i32)
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_n = 2 pi / n * V_{n-2}
    let mut even = 1.0;
    let mut odd = 2.0;
    for n in 2..=dim {
        if n % 2 == 0 {
            even *= 2.0 * std::f64::consts::PI / n as f64;
        } else {
            odd *= 2.0 * std::f64::consts::PI / n as f64;
        }
    }
    if dim.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// Surface area of the sphere bounding the ball of radius `r`.
pub fn sphere_area(dim: usize, r: f64) -> f64 {
    dim as f64 * ball_volume(dim, r) / r
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lexicographic total order on coordinate slices.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Order by Euclidean norm, ties broken lexicographically.
pub fn norm_lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    norm(a).total_cmp(&norm(b)).then_with(|| lex_cmp(a, b))
}
