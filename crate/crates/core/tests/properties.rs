use isde_anneal::annealing::{
    approx_isde_sa, classical_sa, isde_sa, AnnealSchedule, ApproxSettings, RunOptions, RunResult,
};
use isde_anneal::constraints::AdmissibleRegion;
use isde_anneal::isde::IsdePolicy;
use isde_anneal::objectives::{Ackley, CostFunction};
use proptest::prelude::*;

fn region(n: usize) -> AdmissibleRegion {
    AdmissibleRegion::bounded(vec![-5.0; n], vec![5.0; n], Some(vec![0.3; n])).unwrap()
}

fn best_never_increases(r: &RunResult) {
    for w in r.stages.windows(2) {
        assert!(w[1].best_value <= w[0].best_value);
        assert!(w[1].evaluations >= w[0].evaluations);
    }
    assert_eq!(r.stages.last().unwrap().best_value, r.best_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_runs_track_best_so_far(seed in 0u64..1000, stages in 1usize..25) {
        let cost = CostFunction::new(Ackley::new(2).unwrap());
        let schedule = AnnealSchedule::new(36.7, 0.02, 0.0351, stages);
        let r = isde_sa(&cost, &region(2), &schedule, &IsdePolicy::default(), seed, RunOptions::default()).unwrap();
        prop_assert_eq!(r.stages.len(), stages);
        best_never_increases(&r);
        prop_assert_eq!(r.evaluations, stages as u64);
    }

    #[test]
    fn classical_runs_track_best_so_far(seed in 0u64..1000, stages in 1usize..25) {
        let cost = CostFunction::new(Ackley::new(2).unwrap());
        let schedule = AnnealSchedule::new(36.7, 0.02, 0.0351, stages);
        let r = classical_sa(&cost, &region(2), &schedule, &IsdePolicy::default(), seed, RunOptions::default()).unwrap();
        best_never_increases(&r);
        let c = r.counters;
        prop_assert!(c.accepted_moves + c.out_of_region <= (stages * IsdePolicy::default().steps) as u64);
    }

    #[test]
    fn surrogate_runs_stay_within_budget(seed in 0u64..1000, stages in 1usize..12, chains in 1usize..4) {
        let cost = CostFunction::new(Ackley::new(2).unwrap());
        let schedule = AnnealSchedule::new(36.7, 0.02, 0.0351, stages);
        let settings = ApproxSettings { initial_points: 15, chains, ..ApproxSettings::default() };
        let r = approx_isde_sa(&cost, &region(2), &schedule, &settings, &IsdePolicy::default(), seed, RunOptions::default()).unwrap();
        best_never_increases(&r);
        prop_assert!(r.evaluations <= (15 + stages * chains) as u64);
        let c = r.counters;
        prop_assert_eq!(
            c.enrichments + c.rejected_duplicates + c.fit_failures + c.failed_evaluations,
            (stages * chains) as u64
        );
        let points = r.control_points.as_ref().unwrap();
        prop_assert_eq!(points.len() as u64, 15 + c.enrichments);
        let lowest = points.iter().map(|p| isde_anneal::objectives::ackley(p).unwrap()).fold(f64::INFINITY, f64::min);
        prop_assert!(r.best_value <= lowest);
    }
}

// Soft barrier: excursions beyond the box should be rare and shallow.
#[test]
fn control_points_rarely_leave_the_box() {
    let n = 2;
    let alpha = 0.3;
    let schedule = AnnealSchedule::new(36.7, 0.02, 0.0351, 500);
    let settings = ApproxSettings::default();
    let (mut total, mut beyond_3, mut worst) = (0usize, 0usize, 0.0f64);
    for seed in 0..2 {
        let cost = CostFunction::new(Ackley::new(n).unwrap());
        let r = approx_isde_sa(&cost, &region(n), &schedule, &settings, &IsdePolicy::default(), seed, RunOptions::default())
            .unwrap();
        for p in r.control_points.unwrap() {
            let excess = p.iter().map(|x| (x.abs() - 5.0).max(0.0)).fold(0.0, f64::max);
            total += 1;
            beyond_3 += usize::from(excess > 3.0 * alpha);
            worst = worst.max(excess / alpha);
        }
    }
    assert!((beyond_3 as f64) <= 0.01 * total as f64, "{beyond_3} of {total}");
    assert!(worst < 10.0, "deepest excursion {worst} alpha");
}
