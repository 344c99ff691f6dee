//! Aperiodic Delone sets and their diffraction.
//!
//! Generators for cut-and-project model sets, substitution point sets and
//! lattices; Delone and Meyer diagnostics; autocorrelation approximants;
//! empirical and analytic Bragg spectra.

// argument checks are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocorr;
pub mod cutproject;
pub mod diffraction;
pub mod error;
pub mod io;
pub mod numeric;
pub mod pointset;
pub mod spatial;
pub mod substitution;

pub use autocorr::{autocorrelation, convergence_report, Atom, AtomicMeasure};
pub use cutproject::{preset, CutProjectScheme, Preset, ReciprocalPoint, SchemeConfig, Window, WindowSpec};
pub use diffraction::{
    bragg_scan, compare_spectra, empirical_amplitude, empirical_spectrum, refine_peak, smoothed_transform,
    DiffractionSpectrum, Peak, SpectrumMethod,
};
pub use error::{Error, Result};
pub use pointset::{
    almost_period_defect, delone_report, meyer_check, statistical_almost_periods, DeloneReport, MeyerOptions,
    MeyerReport, PointSet,
};
pub use substitution::{generate_substitution_points, match_model_set, ColouredPointSet, SubstitutionRule};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
