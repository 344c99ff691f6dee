use std::f64::consts::PI;

use super::{CutProjectScheme, Window};
use crate::error::{Error, Result};

pub const PRESET_NAMES: &[&str] = &["fibonacci", "silver_mean", "ammann_beenker", "lattice:<a>"];

/// A named scheme with its default window.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub scheme: CutProjectScheme,
    pub window: Window,
}

/// Builds a preset by name.
///
/// * `fibonacci`: generators `(1, 1)` and `(τ, 1-τ)`, window `[-1, τ-1)`;
///   tiles of length `1` and `τ`.
/// * `silver_mean`: generators `(1, 1)` and `(1+√2, 1-√2)`, window
///   `[-1, √2-1)`; tiles of length `1` and `1+√2`.
/// * `ammann_beenker`: the `Z^4` embedding with physical stars
///   `e_k = (cos kπ/4, sin kπ/4)` and internal stars at angles `3kπ/4`,
///   window the regular octagon of edge `1` centred at the origin.
/// * `lattice:a`: the plain lattice `aZ` (no internal space).
pub fn preset(name: &str) -> Result<Preset> {
    let (scheme, window) = match name {
        "fibonacci" => {
            let tau = (1.0 + 5f64.sqrt()) / 2.0;
            (
                CutProjectScheme::new(&[vec![1.0, tau], vec![1.0, 1.0 - tau]], 1, 1)?,
                Window::interval_box(&[(-1.0, tau - 1.0)])?,
            )
        }
        "silver_mean" => {
            let s = 2f64.sqrt();
            (
                CutProjectScheme::new(&[vec![1.0, 1.0 + s], vec![1.0, 1.0 - s]], 1, 1)?,
                Window::interval_box(&[(-1.0, s - 1.0)])?,
            )
        }
        "ammann_beenker" => {
            let angle = |k: usize, m: f64| m * k as f64 * PI / 4.0;
            let rows = vec![
                (0..4).map(|k| angle(k, 1.0).cos()).collect(),
                (0..4).map(|k| angle(k, 1.0).sin()).collect(),
                (0..4).map(|k| angle(k, 3.0).cos()).collect(),
                (0..4).map(|k| angle(k, 3.0).sin()).collect(),
            ];
            let circumradius = 0.5 / (PI / 8.0).sin();
            let octagon = (0..8)
                .map(|j| {
                    let t = PI / 8.0 + j as f64 * PI / 4.0;
                    vec![circumradius * t.cos(), circumradius * t.sin()]
                })
                .collect();
            (CutProjectScheme::new(&rows, 2, 2)?, Window::polytope(octagon)?)
        }
        other => match other.strip_prefix("lattice:") {
            Some(a) => {
                let a: f64 = a
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad lattice spacing in {other:?}")))?;
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::InvalidArgument(format!("lattice spacing must be positive: {a}")));
                }
                (CutProjectScheme::new(&[vec![a]], 1, 0)?, Window::interval_box(&[])?)
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset {other:?}; known: {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        },
    };
    Ok(Preset { name: name.to_string(), scheme, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn preset_densities() {
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        let f = preset("fibonacci").unwrap();
        assert_relative_eq!(f.scheme.window_density(&f.window), tau / 5f64.sqrt(), max_relative = 1e-14);
        let s = preset("silver_mean").unwrap();
        assert_relative_eq!(s.scheme.window_density(&s.window), 0.5, max_relative = 1e-14);
        let ab = preset("ammann_beenker").unwrap();
        // basis is √2 times an orthogonal matrix, |det| = 4; octagon area 2(1+√2)
        assert_relative_eq!(ab.scheme.haar_scale(), 0.25, max_relative = 1e-12);
        assert_relative_eq!(ab.window.volume(), 2.0 * (1.0 + 2f64.sqrt()), max_relative = 1e-12);
        let l = preset("lattice:0.7").unwrap();
        assert_relative_eq!(l.scheme.window_density(&l.window), 1.0 / 0.7);
        for p in [f, s, ab, l] {
            assert!(p.scheme.warnings().is_empty(), "{}", p.name);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("penrose").is_err());
        assert!(preset("lattice:-1").is_err());
        assert!(preset("lattice:x").is_err());
    }
}
