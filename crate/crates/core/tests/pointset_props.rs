use aperiodica::cutproject::preset;
use aperiodica::numeric::{ball_volume, sphere_area};
use aperiodica::pointset::{
    almost_period_defect, delone_report, difference_set, lattice_sample, meyer_check, poisson_sample,
    statistical_almost_periods, MeyerOptions, PointSet,
};
use aperiodica::Error;
use proptest::prelude::*;

const TAU: f64 = 1.618_033_988_749_895;

fn fibonacci(radius: f64) -> PointSet {
    let p = preset("fibonacci").unwrap();
    p.scheme.generate_model_set(&p.window, radius).unwrap()
}

#[test]
fn integer_delone_report() {
    let ps = lattice_sample(1, 1.0, 100.0).unwrap();
    let r = delone_report(&ps, 0.01).unwrap();
    assert_eq!(r.packing_diameter, 1.0);
    assert_eq!(r.density_estimate, 1.005);
    assert!((r.covering_radius - 0.5).abs() <= 0.01);
}

#[test]
fn coincident_points_are_degenerate() {
    let ps = PointSet::new(1, vec![vec![0.0], vec![0.0]], 1.0, None).unwrap();
    assert_eq!(ps.len(), 1);
    assert_eq!(delone_report(&ps, 0.1), Err(Error::DegenerateSample { count: 1 }));
}

#[test]
fn fibonacci_density_trend() {
    let p = preset("fibonacci").unwrap();
    let theta = p.scheme.window_density(&p.window);
    let errors: Vec<f64> = [250.0, 500.0, 1000.0]
        .iter()
        .map(|&n| (delone_report(&fibonacci(n), 0.05).unwrap().density_estimate - theta).abs())
        .collect();
    assert!(errors[2] <= 0.01 * theta, "{errors:?}");
    // error bound c/n: one boundary tile on each side
    for (e, n) in errors.iter().zip([250.0, 500.0, 1000.0]) {
        assert!(*e <= TAU / n, "{e} at {n}");
    }
}

#[test]
fn fibonacci_covering_radius() {
    let r = delone_report(&fibonacci(300.0), 0.01).unwrap();
    assert!((r.packing_diameter - 1.0).abs() < 1e-9);
    assert!((r.covering_radius - TAU / 2.0).abs() <= 0.01);
}

#[test]
fn integer_difference_set() {
    let ps = lattice_sample(1, 1.0, 10.0).unwrap();
    let d = difference_set(&ps, 3.0).unwrap();
    assert_eq!(d.coords(), &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    let single = PointSet::new(1, vec![vec![0.0]], 1.0, None).unwrap();
    assert_eq!(difference_set(&single, 1.0).unwrap().coords(), &[0.0]);
    assert!(matches!(difference_set(&ps, 20.5), Err(Error::CutoffTooLarge { .. })));
}

#[test]
fn fibonacci_difference_set_is_pair_list() {
    let ps = fibonacci(60.0);
    let d = difference_set(&ps, 5.0).unwrap();
    let pts = ps.coords();
    let mut brute: Vec<f64> = Vec::new();
    for x in pts {
        for y in pts {
            let z = x - y;
            if z.abs() <= 5.0 && !brute.iter().any(|b| (b - z).abs() < 1e-8) {
                brute.push(z);
            }
        }
    }
    brute.sort_by(f64::total_cmp);
    assert_eq!(d.len(), brute.len());
    for (a, b) in d.coords().iter().zip(&brute) {
        assert!((a - b).abs() < 1e-8);
    }
    // every difference is a + bτ with small integers
    for z in d.coords() {
        let found = (-8..=8).any(|b| {
            let a = z - b as f64 * TAU;
            (a - a.round()).abs() < 1e-9
        });
        assert!(found, "{z}");
    }
}

#[test]
fn lattice_meyer_witness_is_origin() {
    for (dim, radius) in [(1, 50.0), (2, 8.0)] {
        let ps = lattice_sample(dim, 1.0, radius).unwrap();
        let r = meyer_check(&ps, 3.0, MeyerOptions::default()).unwrap();
        assert!(r.uniformly_discrete_diff);
        assert_eq!(r.witness_f, Some(vec![vec![0.0; dim]]));
    }
}

#[test]
fn fibonacci_meyer_witness_is_small() {
    let r = meyer_check(&fibonacci(400.0), 20.0, MeyerOptions::default()).unwrap();
    assert!(r.uniformly_discrete_diff);
    let f = r.witness_f.unwrap();
    assert!(!f.is_empty() && f.len() <= 8, "{f:?}");
}

#[test]
fn poisson_control_rejected() {
    let ps = poisson_sample(1, 1.0, 500.0, 3).unwrap();
    let r = meyer_check(&ps, 10.0, MeyerOptions { gap_threshold: 0.01, ..MeyerOptions::default() }).unwrap();
    assert!(!r.uniformly_discrete_diff);
    assert_eq!(ps.len(), 1000);
}

#[test]
fn almost_period_examples() {
    let z = lattice_sample(1, 1.0, 100.0).unwrap();
    assert_eq!(almost_period_defect(&z, &[0.0], 5.0).unwrap(), 0.0);
    assert_eq!(almost_period_defect(&z, &[1.0], 5.0).unwrap(), 0.0);
    assert!(matches!(almost_period_defect(&z, &[10.0], 5.0), Err(Error::ShiftTooLarge { .. })));
    let kept = statistical_almost_periods(&z, 0.01, &[vec![0.5], vec![1.0], vec![1.5], vec![2.0]], 5.0).unwrap();
    assert_eq!(kept, vec![vec![1.0], vec![2.0]]);
    let exact = statistical_almost_periods(&z, 0.0, &[vec![0.5], vec![3.0], vec![-2.0], vec![2.5]], 5.0).unwrap();
    assert_eq!(exact, vec![vec![-2.0], vec![3.0]]);
    let all = statistical_almost_periods(&z, 2.0 * z.density(), &[vec![0.5], vec![0.25]], 5.0).unwrap();
    assert_eq!(all.len(), 2);
}

#[test]
fn fibonacci_defect_is_proportional_to_star() {
    // t = a + bτ has t* = a + b(1 - τ); the defect density is 2|t*|/√5
    let ps = fibonacci(1500.0);
    let mut last = f64::INFINITY;
    for (a, b) in [(3.0, 5.0), (5.0, 8.0), (8.0, 13.0), (13.0, 21.0)] {
        let t: f64 = a + b * TAU;
        let star = (a + b * (1.0 - TAU)).abs();
        let d = almost_period_defect(&ps, &[t], 200.0).unwrap();
        let predicted = 2.0 * star / 5f64.sqrt();
        assert!((d - predicted).abs() <= 4.0 / 1300.0, "t={t} defect {d} predicted {predicted}");
        assert!(d <= 2.0 * star, "C = 2 bound");
        assert!(d < last);
        last = d;
    }
}

#[test]
fn fibonacci_almost_periods_relatively_dense() {
    let ps = fibonacci(1200.0);
    let cands: Vec<Vec<f64>> = ps.coords().iter().filter(|x| x.abs() <= 400.0).map(|&x| vec![x]).collect();
    let kept = statistical_almost_periods(&ps, 0.05, &cands, 400.0).unwrap();
    let mut xs: Vec<f64> = kept.iter().map(|t| t[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert!(xs.len() > 10);
    let gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    assert!(gap < 60.0, "{gap}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_form(raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..60)) {
        let pts: Vec<Vec<f64>> = raw.iter().map(|&(x, y)| vec![x, y]).collect();
        let ps = PointSet::new(2, pts.clone(), 15.0, None).unwrap();
        let v = ps.to_vecs();
        for w in v.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        let mut shuffled = pts.clone();
        shuffled.reverse();
        prop_assert_eq!(PointSet::new(2, shuffled, 15.0, None).unwrap(), ps);
    }

    #[test]
    fn difference_set_symmetric(raw in prop::collection::vec(-20.0f64..20.0, 1..50), cutoff in 0.5f64..10.0) {
        let pts: Vec<Vec<f64>> = raw.iter().map(|&x| vec![x]).collect();
        let ps = PointSet::new(1, pts, 20.0, None).unwrap();
        let d = difference_set(&ps, cutoff).unwrap();
        let xs = d.coords();
        prop_assert!(xs.contains(&0.0));
        for &x in xs {
            prop_assert!(xs.iter().any(|&y| (x + y).abs() <= 1e-8));
        }
    }

    #[test]
    fn covering_dominates_packing(seed in 0u64..1000) {
        let ps = poisson_sample(2, 1.0, 15.0, seed).unwrap();
        let r = delone_report(&ps, 0.2).unwrap();
        prop_assert!(r.packing_diameter > 0.0);
        prop_assert!(r.covering_radius >= r.packing_diameter / 2.0);
    }

    #[test]
    fn defect_bounds(t in -30.0f64..30.0) {
        let ps = fibonacci(300.0);
        let d = almost_period_defect(&ps, &[t], 40.0).unwrap();
        prop_assert!(d >= 0.0 && d <= 2.0 * ps.density() * 300.0 / 260.0);
    }

    /// Defect of `ps` at `t` vs defect of the translated sample at `-t`,
    /// within `4·density·(|t| + guard)/n`.
    #[test]
    fn defect_translation_symmetry(k in 1usize..40) {
        let n = 800.0;
        let ps = fibonacci(n);
        let t = ps.coords()[ps.len() / 2 + k];
        let guard = t.abs() + 2.0 * TAU;
        let shifted: Vec<Vec<f64>> = ps.coords().iter().map(|x| vec![x - t]).filter(|x| x[0].abs() <= n).collect();
        let moved = PointSet::new(1, shifted, n, None).unwrap();
        let a = almost_period_defect(&ps, &[t], guard).unwrap();
        let b = almost_period_defect(&moved, &[-t], guard).unwrap();
        let bound = 4.0 * ps.density() * (t.abs() + guard) / n;
        prop_assert!((a - b).abs() <= bound, "{} vs {} bound {}", a, b, bound);
    }
}

#[test]
fn ball_measures() {
    assert!((ball_volume(2, 2.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(sphere_area(1, 5.0), 2.0);
}
