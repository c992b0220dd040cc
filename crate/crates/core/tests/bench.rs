use nmpc_admm::bench::{
    self, epsilon_sweep, horizon_sweep, percentile_nearest_rank, read_records, rho_argmin, rho_grid_experiment,
    summarize, write_records, EpsilonSweepConfig, ExperimentRecord, HorizonSweepConfig, RhoGridConfig, SummaryStats,
    CSV_HEADER,
};
use proptest::prelude::*;

fn without_time(rs: &[ExperimentRecord]) -> Vec<ExperimentRecord> {
    rs.iter().map(|r| ExperimentRecord { wall_time_s: 0.0, ..r.clone() }).collect()
}

fn small_eps() -> EpsilonSweepConfig {
    EpsilonSweepConfig { systems: 6, n: 40, epsilon_grid: bench::log_space(1e-4, 1.0, 9), ..Default::default() }
}

#[test]
fn experiments_are_deterministic_up_to_wall_time() {
    let cfg = small_eps();
    assert_eq!(without_time(&epsilon_sweep(&cfg).unwrap()), without_time(&epsilon_sweep(&cfg).unwrap()));
    let cfg = HorizonSweepConfig { systems: 3, horizons: vec![10, 30], ..Default::default() };
    assert_eq!(without_time(&horizon_sweep(&cfg).unwrap()), without_time(&horizon_sweep(&cfg).unwrap()));
    let other = HorizonSweepConfig { master_seed: 1, ..cfg.clone() };
    assert_ne!(without_time(&horizon_sweep(&cfg).unwrap()), without_time(&horizon_sweep(&other).unwrap()));
}

#[test]
fn iterations_grow_as_epsilon_shrinks() {
    let cfg = small_eps();
    let records = epsilon_sweep(&cfg).unwrap();
    assert!(records.iter().all(ExperimentRecord::is_consistent));
    for sys in records.chunks(cfg.epsilon_grid.len()) {
        // grid is ascending in epsilon, so iterations are nonincreasing
        for w in sys.windows(2) {
            assert!(w[0].epsilon < w[1].epsilon);
            assert!(w[0].iterations >= w[1].iterations, "{w:?}");
        }
    }
}

#[test]
fn csv_round_trip() {
    let cfg = RhoGridConfig {
        systems: 2,
        horizons: vec![8, 16],
        rho1_grid: vec![0.5, 2.0],
        rho2_grid: vec![0.1, 1.0],
        ..Default::default()
    };
    let records = rho_grid_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 16);
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    let best = rho_argmin(&summarize(&records));
    assert_eq!(best.iter().map(|b| b.n).collect::<Vec<_>>(), vec![8, 16]);
}

#[test]
fn read_rejects_wrong_header() {
    assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
}

proptest! {
    #[test]
    fn summary_matches_independent_computation(values in prop::collection::vec(0u32..10_000, 1..300)) {
        let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let s = SummaryStats::from_values(&xs).unwrap();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
        let rank = ((98 * m).div_ceil(100)).max(1);
        prop_assert_eq!(s.count, m);
        prop_assert_eq!(s.median, median);
        prop_assert_eq!(s.p98, sorted[rank - 1]);
        prop_assert_eq!(percentile_nearest_rank(&sorted, 98.0), sorted[rank - 1]);
        prop_assert_eq!(s.min, sorted[0]);
        prop_assert_eq!(s.max, sorted[m - 1]);
        prop_assert!((s.mean - xs.iter().sum::<f64>() / m as f64).abs() <= 1e-9);
    }
}
