use aperiodica::autocorr::{autocorrelation, DEFAULT_CLUSTER_TOL};
use aperiodica::cutproject::preset;
use aperiodica::diffraction::{empirical_spectrum, SpectrumMethod};
use aperiodica::io::{
    load_coloured, load_measure_csv, load_points, load_spectrum_csv, save_coloured, save_measure_csv, save_points,
    save_spectrum_csv, MeasureMeta,
};
use aperiodica::pointset::{poisson_sample, PointSet};
use aperiodica::substitution::{generate_substitution_points, SubstitutionRule};
use proptest::prelude::*;

#[test]
fn model_set_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset("ammann_beenker").unwrap();
    let ps = p.scheme.generate_model_set(&p.window, 10.0).unwrap().with_label("ammann_beenker");
    let path = dir.path().join("ab.pts");
    save_points(&path, &ps).unwrap();
    assert_eq!(load_points(&path).unwrap(), ps);

    let g = autocorrelation(&ps, 3.0, DEFAULT_CLUSTER_TOL).unwrap();
    let mpath = dir.path().join("gamma.csv");
    save_measure_csv(&mpath, &g).unwrap();
    assert_eq!(load_measure_csv(&mpath, &MeasureMeta::from(&g)).unwrap(), g);

    let analytic = p.scheme.analytic_diffraction(&p.window, 8.0, 3, 1e-8).unwrap();
    let spath = dir.path().join("ana.csv");
    save_spectrum_csv(&spath, &analytic).unwrap();
    assert_eq!(load_spectrum_csv(&spath, SpectrumMethod::Analytic).unwrap(), analytic);
}

#[test]
fn coloured_files() {
    let dir = tempfile::tempdir().unwrap();
    let rule = SubstitutionRule::new(&[('a', "ab"), ('b', "a")]).unwrap();
    let cs = generate_substitution_points(&rule, 'b', 9, -7.25).unwrap();
    let path = dir.path().join("fib.pts");
    save_coloured(&path, &cs).unwrap();
    assert_eq!(load_coloured(&path).unwrap(), cs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn points_bit_exact(seed in 0u64..u64::MAX, dim in 1usize..4) {
        let dir = tempfile::tempdir().unwrap();
        let ps = poisson_sample(dim, 0.7, 6.0, seed).unwrap();
        let path = dir.path().join("p.pts");
        save_points(&path, &ps).unwrap();
        let back = load_points(&path).unwrap();
        prop_assert_eq!(back.coords().len(), ps.coords().len());
        for (a, b) in back.coords().iter().zip(ps.coords()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn spectrum_bit_exact(raw in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let ps = PointSet::new(1, raw.iter().map(|&x| vec![x]).collect(), 1e3, None).unwrap();
        let ks: Vec<Vec<f64>> = raw.iter().map(|x| vec![x / 997.0]).collect();
        let s = empirical_spectrum(&ps, &ks, 0.0).unwrap();
        let path = dir.path().join("s.csv");
        save_spectrum_csv(&path, &s).unwrap();
        let back = load_spectrum_csv(&path, SpectrumMethod::Empirical).unwrap();
        prop_assert_eq!(back.peaks, s.peaks);
    }
}
