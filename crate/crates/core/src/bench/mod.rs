//! Randomized experiments: iteration counts against the penalty
//! parameters, the stopping tolerance and the horizon length.

mod plot;

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{generate_random_instance, SplitMix64};
use crate::solver::{solve, SolverParams};

pub use plot::{emit_plot, render_band, render_heatmaps, PlotKind};

pub const CSV_HEADER: [&str; 11] = [
    "seed",
    "n",
    "rho1",
    "rho2",
    "epsilon",
    "iterations",
    "converged",
    "wall_time_s",
    "final_r_norm",
    "final_s_norm",
    "objective",
];

pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Horizons of the horizon sweep.
pub const HORIZON_GRID: [usize; 11] = [10, 25, 50, 75, 100, 150, 200, 250, 300, 350, 400];

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub final_r_norm: f64,
    pub final_s_norm: f64,
    pub objective: f64,
}

impl ExperimentRecord {
    /// Whether the residual norms agree with the `converged` flag.
    pub fn is_consistent(&self) -> bool {
        let within = self.final_r_norm <= self.epsilon && self.final_s_norm <= self.epsilon;
        !self.converged || within
    }

    fn fields(&self) -> [String; 11] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            format!("{:.16e}", self.rho1),
            format!("{:.16e}", self.rho2),
            format!("{:.16e}", self.epsilon),
            self.iterations.to_string(),
            self.converged.to_string(),
            format!("{:.16e}", self.wall_time_s),
            format!("{:.16e}", self.final_r_norm),
            format!("{:.16e}", self.final_s_norm),
            format!("{:.16e}", self.objective),
        ]
    }
}

/// Seed of the `index`-th system of a corpus.
pub fn system_seed(master: u64, index: usize) -> u64 {
    SplitMix64::nth_output(master, index as u64)
}

/// `count` points spaced evenly in `log10` between `lo` and `hi`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Index of the grid point closest to `target` in `log10` distance.
pub fn nearest_log(grid: &[f64], target: f64) -> Option<usize> {
    let t = target.log10();
    (0..grid.len()).min_by(|&i, &j| {
        let di = (grid[i].log10() - t).abs();
        let dj = (grid[j].log10() - t).abs();
        di.total_cmp(&dj)
    })
}

/// Solves the random instance of `seed` with horizon `n`.
pub fn run_record(seed: u64, n: usize, rho1: f64, rho2: f64, epsilon: f64, max_iters: usize) -> Result<ExperimentRecord> {
    let inst = generate_random_instance(seed, n);
    run_on(&inst, seed, rho1, rho2, epsilon, max_iters)
}

fn run_on(
    inst: &crate::problem::ProblemInstance,
    seed: u64,
    rho1: f64,
    rho2: f64,
    epsilon: f64,
    max_iters: usize,
) -> Result<ExperimentRecord> {
    let params = SolverParams::new(rho1, rho2, epsilon).with_max_iters(max_iters);
    let rep = solve(inst, &params)?;
    Ok(ExperimentRecord {
        seed,
        n: inst.n,
        rho1,
        rho2,
        epsilon,
        iterations: rep.iterations,
        converged: rep.converged,
        wall_time_s: rep.wall_time,
        final_r_norm: rep.final_r_norm(),
        final_s_norm: rep.final_s_norm(),
        objective: rep.objective,
    })
}

#[derive(Debug, Clone)]
pub struct RhoGridConfig {
    pub systems: usize,
    pub horizons: Vec<usize>,
    pub rho1_grid: Vec<f64>,
    pub rho2_grid: Vec<f64>,
    pub epsilon: f64,
    pub master_seed: u64,
    pub max_iters: usize,
}

impl Default for RhoGridConfig {
    fn default() -> Self {
        RhoGridConfig {
            systems: 20,
            horizons: vec![50, 100, 200, 400],
            rho1_grid: log_space(0.1, 100.0, 13),
            rho2_grid: log_space(0.01, 10.0, 13),
            epsilon: 1e-3,
            master_seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

pub fn rho_grid_experiment(cfg: &RhoGridConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.rho1_grid.is_empty() || cfg.rho2_grid.is_empty() || cfg.horizons.is_empty() {
        return Err(Error::InvalidParams("empty experiment grid".into()));
    }
    let mut out = Vec::new();
    for i in 0..cfg.systems {
        let seed = system_seed(cfg.master_seed, i);
        for &n in &cfg.horizons {
            let inst = generate_random_instance(seed, n);
            for &rho1 in &cfg.rho1_grid {
                for &rho2 in &cfg.rho2_grid {
                    out.push(run_on(&inst, seed, rho1, rho2, cfg.epsilon, cfg.max_iters)?);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EpsilonSweepConfig {
    pub systems: usize,
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub epsilon_grid: Vec<f64>,
    pub master_seed: u64,
    pub max_iters: usize,
}

impl Default for EpsilonSweepConfig {
    fn default() -> Self {
        EpsilonSweepConfig {
            systems: 200,
            n: 100,
            rho1: 1.0,
            rho2: 0.2,
            epsilon_grid: log_space(1e-4, 1.0, 15),
            master_seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

pub fn epsilon_sweep(cfg: &EpsilonSweepConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.epsilon_grid.is_empty() {
        return Err(Error::InvalidParams("empty experiment grid".into()));
    }
    let mut out = Vec::new();
    for i in 0..cfg.systems {
        let seed = system_seed(cfg.master_seed, i);
        let inst = generate_random_instance(seed, cfg.n);
        for &eps in &cfg.epsilon_grid {
            out.push(run_on(&inst, seed, cfg.rho1, cfg.rho2, eps, cfg.max_iters)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct HorizonSweepConfig {
    pub systems: usize,
    pub horizons: Vec<usize>,
    pub rho1: f64,
    pub rho2: f64,
    pub epsilon: f64,
    pub master_seed: u64,
    pub max_iters: usize,
}

impl Default for HorizonSweepConfig {
    fn default() -> Self {
        HorizonSweepConfig {
            systems: 200,
            horizons: HORIZON_GRID.to_vec(),
            rho1: 1.0,
            rho2: 0.2,
            epsilon: 1e-2,
            master_seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

pub fn horizon_sweep(cfg: &HorizonSweepConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.horizons.is_empty() {
        return Err(Error::InvalidParams("empty experiment grid".into()));
    }
    let mut out = Vec::new();
    for i in 0..cfg.systems {
        let seed = system_seed(cfg.master_seed, i);
        for &n in &cfg.horizons {
            out.push(run_record(seed, n, cfg.rho1, cfg.rho2, cfg.epsilon, cfg.max_iters)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    /// Nearest-rank 98th percentile.
    pub p98: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(SummaryStats {
            count: n,
            median,
            mean: v.iter().sum::<f64>() / n as f64,
            p98: percentile_nearest_rank(&v, 98.0),
            min: v[0],
            max: v[n - 1],
        })
    }
}

/// Nearest-rank percentile of an ascending, nonempty slice.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Iteration statistics of one configuration `(n, rho1, rho2, epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub epsilon: f64,
    pub iterations: SummaryStats,
    pub wall_time: SummaryStats,
    pub converged: usize,
}

/// Groups by configuration, in order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, u64, u64, u64)> = Vec::new();
    let mut groups: HashMap<(usize, u64, u64, u64), Vec<&ExperimentRecord>> = HashMap::new();
    for r in records {
        let key = (r.n, r.rho1.to_bits(), r.rho2.to_bits(), r.epsilon.to_bits());
        groups.entry(key).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        groups.get_mut(&key).unwrap().push(r);
    }
    order
        .into_iter()
        .filter_map(|key| {
            let rows = &groups[&key];
            let its: Vec<f64> = rows.iter().map(|r| r.iterations as f64).collect();
            let times: Vec<f64> = rows.iter().map(|r| r.wall_time_s).collect();
            Some(SummaryRow {
                n: key.0,
                rho1: f64::from_bits(key.1),
                rho2: f64::from_bits(key.2),
                epsilon: f64::from_bits(key.3),
                iterations: SummaryStats::from_values(&its)?,
                wall_time: SummaryStats::from_values(&times)?,
                converged: rows.iter().filter(|r| r.converged).count(),
            })
        })
        .collect()
}

/// Per horizon, the `(rho1, rho2)` cell with the smallest mean iteration
/// count (first one on ties).
pub fn rho_argmin(rows: &[SummaryRow]) -> Vec<SummaryRow> {
    let mut best: Vec<SummaryRow> = Vec::new();
    for row in rows {
        match best.iter_mut().find(|b| b.n == row.n) {
            Some(b) if row.iterations.mean < b.iterations.mean => *b = row.clone(),
            Some(_) => {}
            None => best.push(row.clone()),
        }
    }
    best
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidParams(format!("unexpected CSV header: {}", header.join(","))));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn save_records(path: impl AsRef<Path>, records: &[ExperimentRecord]) -> Result<()> {
    write_records(std::fs::File::create(path)?, records)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    read_records(std::fs::File::open(path)?)
}
