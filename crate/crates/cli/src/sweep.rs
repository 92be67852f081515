//! Grids of realize, perturb and stabilize runs, one CSV row per cell.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use repstab_core::graph_of_groups::{perturb, PerturbMode};
use repstab_core::stabilizer::{
    check_defect_cone_bound, realize, stabilize, CorrectionContext, DefectConeBound,
    StabilizationReport,
};
use repstab_core::theta_cone::ThetaVector;
use repstab_core::Result;

use crate::{default_lambda, CliError, CliResult};

pub const DEFAULT_PRESETS: [&str; 3] = ["Z2_free_Z3", "infinite_dihedral", "hnn_Z4_over_Z2"];
pub const DEFAULT_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const DEFAULT_P: [f64; 3] = [1.0, 2.0, 4.0];
pub const DEFAULT_DIMS: [usize; 1] = [12];
pub const DEFAULT_SEEDS: usize = 20;
pub const THREADS_ENV: &str = "REPSTAB_THREADS";

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub presets: Vec<String>,
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    pub p: Vec<f64>,
    pub seeds: usize,
    pub master_seed: u64,
    pub guard: f64,
    pub mode: PerturbMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            presets: DEFAULT_PRESETS.iter().map(|s| s.to_string()).collect(),
            dims: DEFAULT_DIMS.to_vec(),
            eps: DEFAULT_EPS.to_vec(),
            p: DEFAULT_P.to_vec(),
            seeds: DEFAULT_SEEDS,
            master_seed: 0,
            guard: repstab_core::stabilizer::DEFAULT_GUARD,
            mode: PerturbMode::EdgesAndConjugateVertices,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.presets.is_empty()
            || self.dims.is_empty()
            || self.eps.is_empty()
            || self.p.is_empty()
        {
            return Err(CliError::Input("sweep grids must be non-empty".into()));
        }
        if self.seeds == 0 {
            return Err(CliError::Input("--seeds must be positive".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
            return Err(CliError::Input(format!(
                "ε must be finite and non-negative, got {e}"
            )));
        }
        if let Some(p) = self.p.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            return Err(CliError::Input(format!(
                "p must be finite and at least 1, got {p}"
            )));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.presets.len() * self.dims.len() * self.eps.len() * self.p.len() * self.seeds
    }
}

/// One CSV line; numeric fields are empty when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub preset: String,
    pub seed: u64,
    pub p: f64,
    pub dim: usize,
    pub epsilon_in: f64,
    pub delta: Option<f64>,
    pub epsilon_out: Option<f64>,
    pub cone_gap: Option<f64>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

/// Everything measured in one cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub row: SweepRow,
    pub defect_cone: Option<DefectConeBound>,
    pub report: Option<StabilizationReport>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of a cell: splitmix64 folded over the master seed and the indices.
pub fn cell_seed(master: u64, indices: &[usize]) -> u64 {
    indices.iter().fold(splitmix64(master), |h, &i| {
        splitmix64(h ^ splitmix64(i as u64))
    })
}

/// Realize `lambda`, perturb by `eps`, measure and stabilize, all from `seed`.
pub fn run_pipeline(
    ctx: &CorrectionContext,
    lambda: &ThetaVector,
    eps: f64,
    mode: PerturbMode,
    seed: u64,
) -> Result<(StabilizationReport, DefectConeBound)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact = realize(lambda, ctx, &mut rng).map_err(|e| e.at("realize"))?;
    let noisy = perturb(&exact, eps, mode, &mut rng).map_err(|e| e.at("perturb"))?;
    let bound = check_defect_cone_bound(&noisy, ctx)?;
    let (_, report) = stabilize(&noisy, ctx)?;
    Ok((report, bound))
}

pub fn run_cell(
    ctx: &CorrectionContext,
    preset: &str,
    lambda: &ThetaVector,
    dim: usize,
    eps: f64,
    mode: PerturbMode,
    seed: u64,
) -> CellOutcome {
    let start = Instant::now();
    let result = run_pipeline(ctx, lambda, eps, mode, seed);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut row = SweepRow {
        preset: preset.to_string(),
        seed,
        p: ctx.p.value(),
        dim,
        epsilon_in: eps,
        delta: None,
        epsilon_out: None,
        cone_gap: None,
        runtime_ms,
        error: None,
    };
    match result {
        Ok((report, bound)) => {
            row.delta = Some(report.delta);
            row.epsilon_out = Some(report.epsilon);
            row.cone_gap = Some(report.cone_gap);
            CellOutcome {
                row,
                defect_cone: Some(bound),
                report: Some(report),
            }
        }
        Err(e) => {
            row.error = Some(e.to_string());
            CellOutcome {
                row,
                defect_cone: None,
                report: None,
            }
        }
    }
}

/// Worker count from the environment, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Runs every cell and returns outcomes in cell order.
pub fn run_sweep(config: &SweepConfig) -> CliResult<Vec<CellOutcome>> {
    config.validate()?;
    // contexts per (preset, p) and multiplicities per (preset, dim) are shared by all cells
    let mut contexts = Vec::new();
    let mut lambdas = Vec::new();
    for (gi, name) in config.presets.iter().enumerate() {
        let gog = repstab_core::graph_of_groups::preset(name)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(config.master_seed, &[gi]));
        let base = crate::context_for(gog, config.p[0], config.guard, &mut rng)?;
        let per_dim = config
            .dims
            .iter()
            .map(|&d| default_lambda(&base, d))
            .collect::<CliResult<Vec<_>>>()?;
        let per_p = config
            .p
            .iter()
            .map(|&p| {
                let mut ctx = base.clone();
                ctx.p = repstab_core::schatten::SchattenExponent::new(p)?;
                Ok(ctx)
            })
            .collect::<CliResult<Vec<_>>>()?;
        contexts.push(per_p);
        lambdas.push(per_dim);
    }

    let mut cells = Vec::with_capacity(config.num_cells());
    for gi in 0..config.presets.len() {
        for di in 0..config.dims.len() {
            for ei in 0..config.eps.len() {
                for pi in 0..config.p.len() {
                    for si in 0..config.seeds {
                        cells.push([gi, di, ei, pi, si]);
                    }
                }
            }
        }
    }
    let work = || {
        cells
            .par_iter()
            .map(|&[gi, di, ei, pi, si]| {
                run_cell(
                    &contexts[gi][pi],
                    &config.presets[gi],
                    &lambdas[gi][di],
                    config.dims[di],
                    config.eps[ei],
                    config.mode,
                    cell_seed(config.master_seed, &[gi, di, ei, pi, si]),
                )
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Input(format!("{THREADS_ENV}: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(outcomes)
}

pub fn write_csv<W: Write>(rows: impl IntoIterator<Item = SweepRow>, out: W) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::Input(format!("csv: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Input(format!("csv: {e}")))?;
    Ok(())
}

/// Median of `epsilon_out / delta` over the successful rows of one group.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub preset: String,
    pub dim: usize,
    pub p: f64,
    pub epsilon_in: f64,
    pub runs: usize,
    pub failures: usize,
    pub median_delta: Option<f64>,
    pub median_ratio: Option<f64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// Groups rows by (preset, dim, p, ε) in first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(String, usize, f64, f64)> = Vec::new();
    for r in rows {
        let key = (r.preset.clone(), r.dim, r.p, r.epsilon_in);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(preset, dim, p, eps)| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.preset == preset && r.dim == dim && r.p == p && r.epsilon_in == eps)
                .collect();
            let ok: Vec<&&SweepRow> = group.iter().filter(|r| r.error.is_none()).collect();
            let mut deltas: Vec<f64> = ok.iter().filter_map(|r| r.delta).collect();
            let mut ratios: Vec<f64> = ok
                .iter()
                .filter_map(|r| match (r.epsilon_out, r.delta) {
                    (Some(e), Some(d)) if d > 0.0 => Some(e / d),
                    _ => None,
                })
                .collect();
            CellSummary {
                preset,
                dim,
                p,
                epsilon_in: eps,
                runs: group.len(),
                failures: group.len() - ok.len(),
                median_delta: median(&mut deltas),
                median_ratio: median(&mut ratios),
            }
        })
        .collect()
}
