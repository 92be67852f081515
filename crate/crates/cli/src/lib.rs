//! Seeded experiment pipeline behind the `repstab` binary.

pub mod sweep;

use std::path::Path;

use rand::Rng;
use repstab_core::graph_of_groups::{preset, GraphConfig, GraphOfGroups};
use repstab_core::stabilizer::CorrectionContext;
use repstab_core::theta_cone::{
    pad_with_trivial, project_to_kernel_cone, ThetaVector, ThetaVectorJson,
};
use repstab_core::Error;

/// Failure of a command, classified for the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 1 for guard refusals, 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e.root() {
                Error::Guard { .. } => 1,
                Error::InvalidGroup(_)
                | Error::InvalidHom(_)
                | Error::InvalidGraph(_)
                | Error::Config(_)
                | Error::Precondition(_) => 2,
                _ => 3,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Loads a graph of groups from a preset name or a JSON config file.
pub fn load_graph(preset_name: Option<&str>, config: Option<&Path>) -> CliResult<GraphOfGroups> {
    match (preset_name, config) {
        (Some(_), Some(_)) => Err(CliError::Input(
            "give either --preset or --config, not both".into(),
        )),
        (Some(name), None) => Ok(preset(name)?),
        (None, Some(path)) => Ok(read_json::<GraphConfig>(path)?.build()?),
        (None, None) => Err(CliError::Input(
            "a graph is required: --preset NAME or --config PATH".into(),
        )),
    }
}

/// Multiplicities from an explicit JSON vector, inline or in a file.
pub fn parse_lambda(spec: &str, gog: &GraphOfGroups) -> CliResult<ThetaVector> {
    let text = if Path::new(spec).is_file() {
        std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?
    } else {
        spec.to_string()
    };
    let json: ThetaVectorJson =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("--lambda: {e}")))?;
    Ok(ThetaVector::from_json(&json, gog.vertex_names())?)
}

/// `q` copies of the regular representation plus `r` trivial ones at each
/// vertex, moved onto the kernel cone and padded back to `dim` if needed.
pub fn default_lambda(ctx: &CorrectionContext, dim: usize) -> CliResult<ThetaVector> {
    let blocks = ctx
        .tables
        .vertices
        .iter()
        .map(|table| {
            let order = table.group().order();
            let (q, r) = ((dim / order) as i64, (dim % order) as i64);
            let mut block: Vec<i64> = table.dims().iter().map(|&d| q * d as i64).collect();
            block[table.trivial_index()] += r;
            block
        })
        .collect();
    let lambda = ThetaVector::vertex(blocks);
    if ctx.dg.apply(&lambda)?.is_zero() {
        return Ok(lambda);
    }
    let projected = project_to_kernel_cone(&lambda, &ctx.dg)?.projected;
    Ok(pad_with_trivial(&projected, dim as i64, &ctx.dg)?)
}

/// Chooses between `--lambda` and `--dim`.
pub fn resolve_lambda(
    ctx: &CorrectionContext,
    lambda: Option<&str>,
    dim: Option<usize>,
) -> CliResult<ThetaVector> {
    match (lambda, dim) {
        (Some(_), Some(_)) => Err(CliError::Input(
            "give either --lambda or --dim, not both".into(),
        )),
        (Some(spec), None) => parse_lambda(spec, &ctx.gog),
        (None, Some(d)) => default_lambda(ctx, d),
        (None, None) => default_lambda(ctx, 12),
    }
}

/// Builds the correction context with a dedicated generator so that the
/// irrep bases do not depend on anything else drawn from `rng`.
pub fn context_for<R: Rng + ?Sized>(
    gog: GraphOfGroups,
    p: f64,
    guard: f64,
    rng: &mut R,
) -> CliResult<CorrectionContext> {
    let p = repstab_core::schatten::SchattenExponent::new(p)?;
    Ok(CorrectionContext::new(gog, p, rng)?.with_guard(guard))
}
