//! Windows (atomic surfaces) in internal space `R^M`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, norm, unit_ball_volume};

/// Below this spread of the phases `k·v` over a triangle's vertices the
/// divided difference is evaluated by its Taylor series.
const CONFLUENT_SPREAD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    /// Axis-aligned box; `half_open[a]` makes axis `a` the interval `[lo, hi)`.
    Box { lo: Vec<f64>, hi: Vec<f64>, half_open: Vec<bool> },
    Ball { center: Vec<f64>, radius: f64 },
    /// Closed convex polytope, `M <= 2`. In the plane the vertices are
    /// stored counter-clockwise.
    Polytope { dim: usize, vertices: Vec<Vec<f64>> },
    Union { dim: usize, members: Vec<Window> },
}

impl Window {
    /// Half-open box `[a_1, b_1) × … × [a_M, b_M)`. `M = 0` gives the
    /// one-point internal space used by plain lattices.
    pub fn interval_box(intervals: &[(f64, f64)]) -> Result<Window> {
        Self::new_box(intervals, &vec![true; intervals.len()])
    }

    pub fn new_box(intervals: &[(f64, f64)], half_open: &[bool]) -> Result<Window> {
        if half_open.len() != intervals.len() {
            return Err(Error::InvalidWindow(format!(
                "{} intervals but {} half-open flags",
                intervals.len(),
                half_open.len()
            )));
        }
        for &(a, b) in intervals {
            if !(a.is_finite() && b.is_finite()) || b < a {
                return Err(Error::InvalidWindow(format!("bad interval [{a}, {b}]")));
            }
        }
        Ok(Window::Box {
            lo: intervals.iter().map(|i| i.0).collect(),
            hi: intervals.iter().map(|i| i.1).collect(),
            half_open: half_open.to_vec(),
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Window> {
        if center.is_empty() {
            return Err(Error::UnsupportedShapeDim { shape: "ball", dim: 0 });
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidWindow(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Window::Ball { center, radius })
    }

    /// Convex polytope from its vertices (any order). Vertices must be in
    /// convex position: none may lie inside or on an edge of the others' hull.
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Window> {
        let dim = vertices.first().map_or(0, |v| v.len());
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidWindow("vertices of mixed dimension".into()));
        }
        match dim {
            1 => {
                if vertices.len() != 2 || vertices[0][0] == vertices[1][0] {
                    return Err(Error::InvalidWindow(
                        "a 1D polytope needs two distinct vertices".into(),
                    ));
                }
                let (a, b) = (vertices[0][0].min(vertices[1][0]), vertices[0][0].max(vertices[1][0]));
                Ok(Window::Polytope { dim, vertices: vec![vec![a], vec![b]] })
            }
            2 => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidWindow("a polygon needs three vertices".into()));
                }
                let n = vertices.len() as f64;
                let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
                let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
                let mut vs = vertices;
                vs.sort_by(|a, b| {
                    let ta = (a[1] - cy).atan2(a[0] - cx);
                    let tb = (b[1] - cy).atan2(b[0] - cx);
                    ta.total_cmp(&tb)
                });
                let m = vs.len();
                for i in 0..m {
                    let (p, q, r) = (&vs[i], &vs[(i + 1) % m], &vs[(i + 2) % m]);
                    let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
                    if !(cross > 0.0) {
                        return Err(Error::InvalidWindow(
                            "polygon vertices are not in convex position".into(),
                        ));
                    }
                }
                Ok(Window::Polytope { dim, vertices: vs })
            }
            d => Err(Error::UnsupportedShapeDim { shape: "polytope", dim: d }),
        }
    }

    /// Union of windows that overlap at most in a null set. Overlap is
    /// checked on a midpoint grid of every pairwise bounding-box intersection.
    pub fn union(members: Vec<Window>) -> Result<Window> {
        let dim = members
            .first()
            .map(Window::dim)
            .ok_or_else(|| Error::InvalidWindow("empty union".into()))?;
        if members.iter().any(|w| w.dim() != dim) {
            return Err(Error::InvalidWindow("union members of mixed dimension".into()));
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if overlap_detected(&members[i], &members[j]) {
                    return Err(Error::InvalidWindow(format!(
                        "union members {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(Window::Union { dim, members })
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
            Window::Polytope { dim, .. } | Window::Union { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Window::Box { lo, hi, half_open } => lo
                .iter()
                .zip(hi)
                .zip(half_open)
                .zip(y)
                .all(|(((&a, &b), &ho), &v)| a <= v && if ho { v < b } else { v <= b }),
            Window::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(y).map(|(c, v)| (v - c) * (v - c)).sum();
                d2 <= radius * radius
            }
            Window::Polytope { dim: 1, vertices } => vertices[0][0] <= y[0] && y[0] <= vertices[1][0],
            Window::Polytope { vertices, .. } => {
                let m = vertices.len();
                (0..m).all(|i| {
                    let (p, q) = (&vertices[i], &vertices[(i + 1) % m]);
                    (q[0] - p[0]) * (y[1] - p[1]) - (q[1] - p[1]) * (y[0] - p[0]) >= 0.0
                })
            }
            Window::Union { members, .. } => members.iter().any(|w| w.contains(y)),
        }
    }

    /// Lebesgue volume `|W|`.
    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Window::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            Window::Polytope { dim: 1, vertices } => vertices[1][0] - vertices[0][0],
            Window::Polytope { vertices, .. } => {
                let m = vertices.len();
                0.5 * (0..m)
                    .map(|i| {
                        let (p, q) = (&vertices[i], &vertices[(i + 1) % m]);
                        p[0] * q[1] - q[0] * p[1]
                    })
                    .sum::<f64>()
            }
            Window::Union { members, .. } => members.iter().map(Window::volume).sum(),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Window::Box { lo, hi, .. } => (lo.clone(), hi.clone()),
            Window::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Window::Polytope { dim, vertices } => {
                let lo = (0..*dim)
                    .map(|a| vertices.iter().map(|v| v[a]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi = (0..*dim)
                    .map(|a| vertices.iter().map(|v| v[a]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                (lo, hi)
            }
            Window::Union { dim, members } => {
                let mut lo = vec![f64::INFINITY; *dim];
                let mut hi = vec![f64::NEG_INFINITY; *dim];
                for w in members {
                    let (l, h) = w.bounding_box();
                    for a in 0..*dim {
                        lo[a] = lo[a].min(l[a]);
                        hi[a] = hi[a].max(h[a]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// The window shifted by `v`.
    pub fn translated(&self, v: &[f64]) -> Window {
        let shift = |p: &[f64]| -> Vec<f64> { p.iter().zip(v).map(|(a, b)| a + b).collect() };
        match self {
            Window::Box { lo, hi, half_open } => Window::Box {
                lo: shift(lo),
                hi: shift(hi),
                half_open: half_open.clone(),
            },
            Window::Ball { center, radius } => Window::Ball { center: shift(center), radius: *radius },
            Window::Polytope { dim, vertices } => Window::Polytope {
                dim: *dim,
                vertices: vertices.iter().map(|p| shift(p)).collect(),
            },
            Window::Union { dim, members } => Window::Union {
                dim: *dim,
                members: members.iter().map(|w| w.translated(v)).collect(),
            },
        }
    }

    /// `∫_W exp(i k·y) dy` in closed form.
    pub fn fourier(&self, k: &[f64]) -> Result<Complex64> {
        if k.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: k.len() });
        }
        match self {
            Window::Box { lo, hi, .. } => Ok(lo
                .iter()
                .zip(hi)
                .zip(k)
                .map(|((&a, &b), &kk)| interval_fourier(a, b, kk))
                .product()),
            Window::Ball { center, radius } => {
                let phase = Complex64::from_polar(1.0, dot(k, center));
                let r = *radius;
                let s = r * norm(k);
                let magnitude = match center.len() {
                    1 => 2.0 * r * sinc(s),
                    2 => {
                        let ratio = if s < 1e-8 { 0.5 } else { libm::j1(s) / s };
                        2.0 * std::f64::consts::PI * r * r * ratio
                    }
                    3 => {
                        let ratio = if s < 1e-3 {
                            1.0 / 3.0 - s * s / 30.0 + s.powi(4) / 840.0
                        } else {
                            (s.sin() - s * s.cos()) / s.powi(3)
                        };
                        4.0 * std::f64::consts::PI * r.powi(3) * ratio
                    }
                    d => return Err(Error::UnsupportedShapeDim { shape: "ball", dim: d }),
                };
                Ok(phase * magnitude)
            }
            Window::Polytope { dim: 1, vertices } => {
                Ok(interval_fourier(vertices[0][0], vertices[1][0], k[0]))
            }
            Window::Polytope { vertices, .. } => {
                let a = &vertices[0];
                let mut total = Complex64::new(0.0, 0.0);
                for w in vertices[1..].windows(2) {
                    total += triangle_fourier(a, &w[0], &w[1], k);
                }
                Ok(total)
            }
            Window::Union { members, .. } => {
                members.iter().map(|w| w.fourier(k)).sum::<Result<Complex64>>()
            }
        }
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `∫_a^b e^{iky} dy = e^{ik(a+b)/2} (b-a) sinc(k(b-a)/2)`.
fn interval_fourier(a: f64, b: f64, k: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * k * (a + b)) * ((b - a) * sinc(0.5 * k * (b - a)))
}

/// First divided difference of `t ↦ e^{it}` in the variable `it`:
/// `∫_0^1 e^{i(a + s(b-a))} ds`.
fn phase_dd1(a: f64, b: f64) -> Complex64 {
    let theta = b - a;
    let phi = if theta == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let h = (0.5 * theta).sin();
        Complex64::new(theta.sin() / theta, 2.0 * h * h / theta)
    };
    Complex64::from_polar(1.0, a) * phi
}

/// Second divided difference of `exp` at `iα_0, iα_1, iα_2`, which equals
/// the integral of `e^{i(α·u)}` over the standard 2-simplex.
fn phase_dd2(alpha: [f64; 3]) -> Complex64 {
    let mut s = alpha;
    s.sort_by(f64::total_cmp);
    let spread = s[2] - s[0];
    if spread > CONFLUENT_SPREAD {
        (phase_dd1(s[1], s[2]) - phase_dd1(s[0], s[1])) / Complex64::new(0.0, spread)
    } else {
        // e^{im} Σ_n h_n(y) / (n+2)!, with y_j = i(α_j - m)
        let m = (s[0] + s[1] + s[2]) / 3.0;
        let y: Vec<Complex64> = s.iter().map(|a| Complex64::new(0.0, a - m)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut factorial = 2.0;
        for n in 0..6u32 {
            if n > 0 {
                factorial *= (n + 2) as f64;
            }
            let mut h = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let l = n - i - j;
                    h += y[0].powu(i) * y[1].powu(j) * y[2].powu(l);
                }
            }
            total += h / factorial;
        }
        Complex64::from_polar(1.0, m) * total
    }
}

fn triangle_fourier(a: &[f64], b: &[f64], c: &[f64], k: &[f64]) -> Complex64 {
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
    2.0 * area * phase_dd2([dot(k, a), dot(k, b), dot(k, c)])
}

fn overlap_detected(a: &Window, b: &Window) -> bool {
    let (la, ha) = a.bounding_box();
    let (lb, hb) = b.bounding_box();
    let lo: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x.max(*y)).collect();
    let hi: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| x.min(*y)).collect();
    if lo.iter().zip(&hi).any(|(l, h)| h <= l) {
        return false;
    }
    const STEPS: i64 = 64;
    let dim = lo.len();
    let mut hit = false;
    let mut p = vec![0.0; dim];
    crate::spatial::for_each_offset(dim, STEPS / 2, |off| {
        if hit {
            return;
        }
        for a in 0..dim {
            // offsets run over [-32, 32]; map onto 65 midpoints of the box
            let frac = (off[a] + STEPS / 2) as f64 + 0.5;
            p[a] = lo[a] + (hi[a] - lo[a]) * frac / (STEPS + 1) as f64;
        }
        if a.contains(&p) && b.contains(&p) {
            hit = true;
        }
    });
    hit
}

/// JSON form of a window, tagged by `"shape"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum WindowSpec {
    Box {
        intervals: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_open: Option<Vec<bool>>,
    },
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    Union { members: Vec<WindowSpec> },
}

impl WindowSpec {
    pub fn build(&self) -> Result<Window> {
        match self {
            WindowSpec::Box { intervals, half_open } => {
                let iv: Vec<(f64, f64)> = intervals.iter().map(|i| (i[0], i[1])).collect();
                let ho = half_open.clone().unwrap_or_else(|| vec![true; iv.len()]);
                Window::new_box(&iv, &ho)
            }
            WindowSpec::Ball { center, radius } => Window::ball(center.clone(), *radius),
            WindowSpec::Polytope { vertices } => Window::polytope(vertices.clone()),
            WindowSpec::Union { members } => {
                Window::union(members.iter().map(WindowSpec::build).collect::<Result<_>>()?)
            }
        }
    }

    pub fn from_window(w: &Window) -> WindowSpec {
        match w {
            Window::Box { lo, hi, half_open } => WindowSpec::Box {
                intervals: lo.iter().zip(hi).map(|(a, b)| [*a, *b]).collect(),
                half_open: Some(half_open.clone()),
            },
            Window::Ball { center, radius } => {
                WindowSpec::Ball { center: center.clone(), radius: *radius }
            }
            Window::Polytope { vertices, .. } => WindowSpec::Polytope { vertices: vertices.clone() },
            Window::Union { members, .. } => {
                WindowSpec::Union { members: members.iter().map(WindowSpec::from_window).collect() }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn interval_transform_values() {
        let a = 0.75;
        let w = Window::interval_box(&[(-a, a)]).unwrap();
        assert_eq!(w.fourier(&[0.0]).unwrap(), Complex64::new(2.0 * a, 0.0));
        assert!(w.fourier(&[PI / a]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn value_at_zero_is_volume() {
        let shapes = vec![
            Window::interval_box(&[(0.0, 2.0), (-1.0, 0.5)]).unwrap(),
            Window::ball(vec![0.3, -0.2], 1.5).unwrap(),
            Window::ball(vec![0.0, 0.0, 1.0], 0.5).unwrap(),
            Window::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ];
        for w in shapes {
            let z = vec![0.0; w.dim()];
            let f = w.fourier(&z).unwrap();
            assert_relative_eq!(f.re, w.volume(), max_relative = 1e-14);
            assert!(f.im.abs() < 1e-14);
        }
    }

    #[test]
    fn triangle_confluent_branch_is_continuous() {
        let w = Window::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.3, 0.8]]).unwrap();
        // k orthogonal to one edge makes two phases coincide exactly
        let exact = w.fourier(&[0.0, 2.0]).unwrap();
        let near = w.fourier(&[1e-7, 2.0]).unwrap();
        assert!((exact - near).norm() < 1e-6);
        // spread right at the branch threshold
        let k = [CONFLUENT_SPREAD * 0.999, 0.0];
        let k2 = [CONFLUENT_SPREAD * 1.001, 0.0];
        assert!((w.fourier(&k).unwrap() - w.fourier(&k2).unwrap()).norm() < 1e-5);
    }

    #[test]
    fn polygon_area_and_order() {
        let w = Window::polytope(vec![
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap();
        assert_relative_eq!(w.volume(), 4.0);
        assert!(w.contains(&[0.0, 0.0]));
        assert!(w.contains(&[1.0, 0.3]));
        assert!(!w.contains(&[1.01, 0.0]));
        let bad = Window::polytope(vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 2.0],
            vec![0.5, 0.5],
        ]);
        assert!(matches!(bad, Err(Error::InvalidWindow(_))));
        assert!(matches!(
            Window::polytope(vec![vec![0.0; 3]; 4]),
            Err(Error::UnsupportedShapeDim { shape: "polytope", dim: 3 })
        ));
    }

    #[test]
    fn half_open_box_membership() {
        let w = Window::interval_box(&[(-1.0, 1.0)]).unwrap();
        assert!(w.contains(&[-1.0]));
        assert!(!w.contains(&[1.0]));
        let closed = Window::new_box(&[(-1.0, 1.0)], &[false]).unwrap();
        assert!(closed.contains(&[1.0]));
    }

    #[test]
    fn union_rules() {
        let a = Window::interval_box(&[(0.0, 1.0)]).unwrap();
        let b = Window::interval_box(&[(1.0, 2.0)]).unwrap();
        let u = Window::union(vec![a.clone(), b]).unwrap();
        assert_relative_eq!(u.volume(), 2.0);
        let c = Window::interval_box(&[(0.5, 1.5)]).unwrap();
        assert!(Window::union(vec![a.clone(), c]).is_err());
        let f = u.fourier(&[0.7]).unwrap();
        let whole = Window::interval_box(&[(0.0, 2.0)]).unwrap().fourier(&[0.7]).unwrap();
        assert!((f - whole).norm() < 1e-14);
    }

    #[test]
    fn high_dim_ball_transform_unsupported() {
        let w = Window::ball(vec![0.0; 4], 1.0).unwrap();
        assert!(matches!(
            w.fourier(&[0.0; 4]),
            Err(Error::UnsupportedShapeDim { shape: "ball", dim: 4 })
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"shape":"box","intervals":[[-1.0,0.618]],"half_open":[true]}"#;
        let spec: WindowSpec = serde_json::from_str(json).unwrap();
        let w = spec.build().unwrap();
        assert_eq!(WindowSpec::from_window(&w), spec);
    }
}
