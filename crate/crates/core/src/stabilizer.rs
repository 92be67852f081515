//! Exact representations from multiplicity data, and correction of
//! almost-representations to nearby exact ones.

use std::sync::Arc;
use std::time::Instant;

use log::{debug, warn};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gowers_hatami::unitary_intertwiner;
use crate::graph_of_groups::{
    measure_defect, rho_sharp, AlmostRep, GraphOfGroups, GraphTables, Presentation, SerreGraph,
};
use crate::group_core::{decompose, multiplicities, FiniteGroup, GroupHom, IrrepTable, UnitaryRep};
use crate::linalg::{haar_unitary, hstack, identity, projector_range};
use crate::schatten::{normalized_distance, ComplexMatrix, SchattenExponent};
use crate::theta_cone::{
    pad_with_trivial, project_to_kernel_cone, DGMap, ThetaVector, ThetaVectorJson,
};

/// Largest relator defect accepted by [`stabilize`] unless configured.
pub const DEFAULT_GUARD: f64 = 0.2;
/// Relator defect tolerated in corrected and realized representations.
pub const EXACT_DEFECT_TOL: f64 = 1e-9;

/// Everything about a graph of groups that the pipeline reuses.
#[derive(Debug, Clone)]
pub struct CorrectionContext {
    pub gog: GraphOfGroups,
    pub presentation: Presentation,
    pub tables: GraphTables,
    pub dg: DGMap,
    pub p: SchattenExponent,
    pub guard: f64,
    trivial_table: IrrepTable,
}

impl CorrectionContext {
    /// Builds irrep tables (with `rng`), the presentation and the boundary map.
    pub fn new<R: Rng + ?Sized>(
        gog: GraphOfGroups,
        p: SchattenExponent,
        rng: &mut R,
    ) -> Result<Self> {
        let presentation = gog.presentation()?;
        let tables = gog.irrep_tables(rng)?;
        let dg = gog.boundary_map(&tables)?;
        let trivial_table = crate::group_core::irrep_table(&Arc::new(FiniteGroup::trivial()), rng)?;
        Ok(CorrectionContext {
            gog,
            presentation,
            tables,
            dg,
            p,
            guard: DEFAULT_GUARD,
            trivial_table,
        })
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn vertex_table(&self, v: usize) -> &IrrepTable {
        &self.tables.vertices[v]
    }

    /// Table of the source group of `hom`, looked up among the edge groups.
    fn source_table(&self, hom: &GroupHom) -> Result<&IrrepTable> {
        if hom.source().order() == 1 {
            return Ok(&self.trivial_table);
        }
        self.tables
            .edges
            .iter()
            .find(|t| **t.group() == **hom.source())
            .map(|t| &**t)
            .ok_or_else(|| Error::Precondition("no irrep table for the source group".into()))
    }

    fn target_table(&self, hom: &GroupHom) -> Result<&IrrepTable> {
        self.tables
            .vertices
            .iter()
            .find(|t| **t.group() == **hom.target())
            .map(|t| &**t)
            .ok_or_else(|| Error::Precondition("no irrep table for the target group".into()))
    }
}

/// `U` with `U* ρ U = ⊕π` in canonical order.
fn adapted_basis(rho: &UnitaryRep, table: &IrrepTable) -> Result<ComplexMatrix> {
    Ok(decompose(rho, table)?.basis(rho.dim()))
}

/// A unitary `S` with `S b(h) S* = a(h)` for isomorphic `a`, `b`.
fn exact_intertwiner(a: &UnitaryRep, b: &UnitaryRep, table: &IrrepTable) -> Result<ComplexMatrix> {
    let ma = multiplicities(a, table)?;
    let mb = multiplicities(b, table)?;
    if ma != mb {
        return Err(Error::NotIsomorphic {
            left: ma,
            right: mb,
        });
    }
    Ok(adapted_basis(a, table)? * adapted_basis(b, table)?.adjoint())
}

/// An exact representation with `ρ^# = λ`: canonical blocks at vertex 0,
/// tree edges propagated by exact intertwiners with `ρ(s_e) = I`, non-tree
/// edges solved exactly, then a Haar-random global change of basis.
pub fn realize<R: Rng + ?Sized>(
    lambda: &ThetaVector,
    ctx: &CorrectionContext,
    rng: &mut R,
) -> Result<AlmostRep> {
    if !lambda.is_nonnegative() {
        return Err(Error::Precondition(
            "realize needs a non-negative vector".into(),
        ));
    }
    if !ctx.dg.apply(lambda)?.is_zero() {
        return Err(Error::Precondition(
            "vector is not in the kernel of the boundary map".into(),
        ));
    }
    let gog = &ctx.gog;
    let graph = gog.graph();
    let dims: Vec<i64> = lambda
        .blocks
        .iter()
        .zip(&ctx.tables.vertices)
        .map(|(b, t)| t.weighted_norm(b))
        .collect();
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(Error::Precondition(format!(
            "vertex dimensions differ: {dims:?}"
        )));
    }
    let n = dims[0] as usize;

    let mut reps: Vec<Option<UnitaryRep>> = vec![None; graph.num_vertices()];
    reps[0] = Some(ctx.vertex_table(0).canonical_rep(&lambda.blocks[0])?);
    for &f in ctx.presentation.tree.discovery_order() {
        let (u, w) = (graph.origin(f), graph.terminus(f));
        let known = reps[u].as_ref().expect("BFS order reaches parents first");
        let tau = known.pullback(gog.injection(SerreGraph::bar(f)))?;
        let fresh = ctx.vertex_table(w).canonical_rep(&lambda.blocks[w])?;
        let restricted = fresh.pullback(gog.injection(f))?;
        let s = exact_intertwiner(&tau, &restricted, ctx.tables.edge(f))?;
        reps[w] = Some(fresh.conjugate(&s)?);
    }
    let reps: Vec<UnitaryRep> = reps
        .into_iter()
        .map(|r| r.expect("tree spans all vertices"))
        .collect();

    let mut edges = Vec::with_capacity(graph.num_edges() / 2);
    for (k, &e) in ctx.presentation.orientation.edges().iter().enumerate() {
        if ctx.presentation.tree.contains(k) {
            edges.push(identity(n));
            continue;
        }
        // X* A X = B makes every conjugation relator of e exact
        let a = reps[graph.terminus(e)].pullback(gog.injection(e))?;
        let b = reps[graph.origin(e)].pullback(gog.injection(SerreGraph::bar(e)))?;
        edges.push(exact_intertwiner(&a, &b, ctx.tables.edge(e))?);
    }

    let w = haar_unitary(n, rng);
    let wa = w.adjoint();
    let reps = reps
        .iter()
        .map(|r| r.conjugate(&w))
        .collect::<Result<Vec<_>>>()?;
    let edges = edges.iter().map(|x| &w * x * &wa).collect();
    let out = AlmostRep::new(gog, reps, edges)?;
    let defect = measure_defect(&out, &ctx.presentation, ctx.p)?;
    if defect > EXACT_DEFECT_TOL {
        return Err(Error::Numerical(format!(
            "realized representation has defect {defect:.3e}"
        )));
    }
    Ok(out)
}

/// A corrected vertex representation with the quantities the bounds use.
#[derive(Debug, Clone)]
pub struct VertexCorrection {
    pub rep: UnitaryRep,
    /// `d_H(i*(ρ), τ)`.
    pub delta: f64,
    /// `d_G(ρ, ρ₁)` for the re-sorted representation `ρ₁`.
    pub resort_distance: f64,
    /// `(dim V₁^⊥ / dim W)^{1/p}`, so that `resort_distance ≤ 2·padding_delta`.
    pub padding_delta: f64,
    /// `‖T − I‖'_p` for the final conjugation.
    pub intertwiner_distance: f64,
    /// `d_G(ρ', ρ)`.
    pub distance: f64,
}

/// Finds `ρ'` with `i*(ρ') = τ` and `(ρ')^# = λ'` close to `ρ`: keep the
/// common part of `ρ^#` and `λ'`, fill the rest with canonical blocks, then
/// conjugate by the unitary intertwiner onto `τ`.
pub fn correct_vertex(
    i: &GroupHom,
    tau: &UnitaryRep,
    rho: &UnitaryRep,
    lambda_prime: &[i64],
    ctx: &CorrectionContext,
) -> Result<VertexCorrection> {
    let table_g = ctx.target_table(i)?;
    let table_h = ctx.source_table(i)?;
    if rho.group() != i.target() || tau.group() != i.source() {
        return Err(Error::Precondition(
            "representations do not match the homomorphism".into(),
        ));
    }
    if rho.dim() != tau.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: tau.dim(),
        });
    }
    let p = ctx.p;
    let n = rho.dim();
    let push = crate::group_core::pushforward_hom(i, table_h, table_g)?;
    let tau_sharp = multiplicities(tau, table_h)?;
    let restricted = push.apply(lambda_prime);
    if restricted != tau_sharp {
        return Err(Error::MultiplicityMismatch(format!(
            "restriction of {lambda_prime:?} is {restricted:?}, target has {tau_sharp:?}"
        )));
    }
    let lambda = multiplicities(rho, table_g)?;
    let delta = if n == 0 {
        0.0
    } else {
        rho.pullback(i)?.distance(tau, p)?
    };
    let gap = table_g.weighted_norm(
        &lambda
            .iter()
            .zip(lambda_prime)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    if (gap as f64) > delta.powf(p.value()) * n as f64 + 1e-12 {
        debug!(
            "multiplicity gap {gap} exceeds δ^p·dim = {:.3e}",
            delta.powf(p.value()) * n as f64
        );
    }

    let (rho1, complement_dim) = if lambda == lambda_prime {
        (rho.clone(), 0)
    } else {
        let common: Vec<i64> = lambda
            .iter()
            .zip(lambda_prime)
            .map(|(a, b)| *a.min(b))
            .collect();
        let dec = decompose(rho, table_g)?;
        let mut kept = Vec::new();
        for (irrep, &m) in common.iter().enumerate() {
            kept.extend(
                dec.components_of(irrep)
                    .take(m as usize)
                    .map(|c| c.basis.clone()),
            );
        }
        let k = hstack(&kept, n);
        let rest = projector_range(&(identity(n) - &k * k.adjoint()))?;
        let fill: Vec<i64> = lambda_prime
            .iter()
            .zip(&common)
            .map(|(a, b)| a - b)
            .collect();
        let sigma = table_g.canonical_rep(&fill)?;
        if sigma.dim() != rest.ncols() {
            return Err(Error::Numerical(format!(
                "complement has dimension {}, fresh summand {}",
                rest.ncols(),
                sigma.dim()
            )));
        }
        let proj = &k * k.adjoint();
        let ra = rest.adjoint();
        let matrices = rho
            .matrices()
            .iter()
            .zip(sigma.matrices())
            .map(|(m, s)| &proj * m * &proj + &rest * s * &ra)
            .collect();
        (
            UnitaryRep::new(rho.group().clone(), matrices)?,
            rest.ncols(),
        )
    };
    let resort_distance = if n == 0 { 0.0 } else { rho.distance(&rho1, p)? };
    let padding_delta = if n == 0 {
        0.0
    } else {
        (complement_dim as f64 / n as f64).powf(1.0 / p.value())
    };

    let t = unitary_intertwiner(&rho1.pullback(i)?, tau, table_h, p)?;
    let rep = rho1.conjugate(&t.unitary)?;
    let distance = if n == 0 { 0.0 } else { rep.distance(rho, p)? };
    Ok(VertexCorrection {
        rep,
        delta,
        resort_distance,
        padding_delta,
        intertwiner_distance: t.distance_to_identity,
        distance,
    })
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub measure_ms: f64,
    pub project_ms: f64,
    pub vertices_ms: f64,
    pub edges_ms: f64,
    pub verify_ms: f64,
    pub total_ms: f64,
}

/// Summary of one [`stabilize`] run.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub p: SchattenExponent,
    pub dim: usize,
    /// Relator defect of the input.
    pub delta: f64,
    /// `d_{S_𝒢}(ρ, ρ')`.
    pub epsilon: f64,
    /// `‖λ − λ'‖_V`.
    pub cone_gap: f64,
    /// `‖λ − λ'‖_V` as an exact fraction.
    pub cone_gap_exact: String,
    /// `‖dλ‖_E` of the input multiplicities.
    pub boundary_norm: f64,
    /// Whether `‖λ − λ'‖_V ≤ δ^p ‖λ‖_V`; without it the bound claims do not apply.
    pub cone_hypothesis_holds: bool,
    /// Relator defect of the output.
    pub output_defect: f64,
    pub lambda_in: ThetaVectorJson,
    pub lambda_out: ThetaVectorJson,
    /// `d_{G_v}(ρ_v, ρ'_v)` per vertex.
    pub vertex_distances: Vec<f64>,
    /// `‖ρ(s_e) − ρ'(s_e)‖'_p` per geometric edge.
    pub edge_distances: Vec<f64>,
    pub timings: StageTimings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Replaces `ρ` by an exact representation with multiplicities on the
/// kernel cone, changing each generator by an amount comparable to the
/// input defect.
pub fn stabilize(
    rho: &AlmostRep,
    ctx: &CorrectionContext,
) -> Result<(AlmostRep, StabilizationReport)> {
    let start = Instant::now();
    let p = ctx.p;
    let gog = &ctx.gog;
    let graph = gog.graph();
    let n = rho.dim();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let delta = measure_defect(rho, &ctx.presentation, p).map_err(|e| e.at("measure"))?;
    timings.measure_ms = ms(t);
    if delta > ctx.guard {
        return Err(Error::Guard {
            delta,
            guard: ctx.guard,
        });
    }

    let t = Instant::now();
    let lambda = rho_sharp(rho, &ctx.tables).map_err(|e| e.at("multiplicities"))?;
    let projection = project_to_kernel_cone(&lambda, &ctx.dg).map_err(|e| e.at("project"))?;
    let lambda_prime =
        pad_with_trivial(&projection.projected, n as i64, &ctx.dg).map_err(|e| e.at("pad"))?;
    let diff = ThetaVector::vertex(
        lambda
            .blocks
            .iter()
            .zip(&lambda_prime.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect(),
    );
    let cone_gap = ctx.dg.norm_v(&diff)?;
    let boundary_norm = ctx.dg.norm_e(&ctx.dg.apply(&lambda)?)?;
    timings.project_ms = ms(t);

    let t = Instant::now();
    let mut corrected: Vec<Option<UnitaryRep>> = vec![None; graph.num_vertices()];
    let root_hom = GroupHom::from_trivial(gog.vertex_group(0).clone());
    let root_tau = UnitaryRep::trivial(root_hom.source().clone(), n);
    let root = correct_vertex(
        &root_hom,
        &root_tau,
        rho.vertex_rep(0),
        &lambda_prime.blocks[0],
        ctx,
    )
    .map_err(|e| e.at("root vertex"))?;
    corrected[0] = Some(root.rep);
    for &f in ctx.presentation.tree.discovery_order() {
        let (u, w) = (graph.origin(f), graph.terminus(f));
        let known = corrected[u]
            .as_ref()
            .expect("BFS order reaches parents first");
        let tau = known.pullback(gog.injection(SerreGraph::bar(f)))?;
        let step = correct_vertex(
            gog.injection(f),
            &tau,
            rho.vertex_rep(w),
            &lambda_prime.blocks[w],
            ctx,
        )
        .map_err(|e| e.at("tree vertex"))?;
        corrected[w] = Some(step.rep);
    }
    let corrected: Vec<UnitaryRep> = corrected
        .into_iter()
        .map(|r| r.expect("tree spans all vertices"))
        .collect();
    timings.vertices_ms = ms(t);

    let t = Instant::now();
    let mut edges = Vec::with_capacity(graph.num_edges() / 2);
    for (k, &e) in ctx.presentation.orientation.edges().iter().enumerate() {
        if ctx.presentation.tree.contains(k) {
            edges.push(identity(n));
            continue;
        }
        // the relator asks for X* A X = B; with S = ρ(s_e), T S B S* T* = A gives X = T S
        let s = rho.edge_unitary(k);
        let a = corrected[graph.terminus(e)].pullback(gog.injection(e))?;
        let b = corrected[graph.origin(e)].pullback(gog.injection(SerreGraph::bar(e)))?;
        let b1 = b.conjugate(s)?;
        let fix = unitary_intertwiner(&b1, &a, ctx.tables.edge(e), p).map_err(|e| e.at("edge"))?;
        edges.push(&fix.unitary * s);
    }
    timings.edges_ms = ms(t);

    let t = Instant::now();
    let out = AlmostRep::new(gog, corrected, edges).map_err(|e| e.at("assemble"))?;
    let output_defect = measure_defect(&out, &ctx.presentation, p)?;
    if output_defect > EXACT_DEFECT_TOL {
        return Err(Error::Numerical(format!(
            "corrected representation has defect {output_defect:.3e}"
        ))
        .at("verify"));
    }
    let out_sharp = rho_sharp(&out, &ctx.tables)?;
    if out_sharp != lambda_prime {
        return Err(Error::MultiplicityMismatch(format!(
            "output multiplicities {:?} differ from target {:?}",
            out_sharp.blocks, lambda_prime.blocks
        ))
        .at("verify"));
    }
    let epsilon = out.generator_distance(rho, p)?;
    let vertex_distances = if n == 0 {
        vec![0.0; graph.num_vertices()]
    } else {
        out.vertex_reps()
            .iter()
            .zip(rho.vertex_reps())
            .map(|(a, b)| a.distance(b, p))
            .collect::<Result<Vec<_>>>()?
    };
    let edge_distances = if n == 0 {
        vec![0.0; graph.num_edges() / 2]
    } else {
        out.edge_unitaries()
            .iter()
            .zip(rho.edge_unitaries())
            .map(|(a, b)| normalized_distance(a, b, p))
            .collect::<Result<Vec<_>>>()?
    };
    timings.verify_ms = ms(t);
    timings.total_ms = ms(start);

    let cone_gap_f = *cone_gap.numer() as f64 / *cone_gap.denom() as f64;
    let cone_hypothesis_holds = cone_gap_f <= delta.powf(p.value()) * n as f64 + 1e-12;
    if !cone_hypothesis_holds {
        warn!("cone gap {cone_gap} exceeds δ^p·‖λ‖_V; the distance bound is not claimed for this instance");
    }
    let names = gog.vertex_names();
    let report = StabilizationReport {
        p,
        dim: n,
        delta,
        epsilon,
        cone_gap: cone_gap_f,
        cone_gap_exact: cone_gap.to_string(),
        boundary_norm: *boundary_norm.numer() as f64 / *boundary_norm.denom() as f64,
        cone_hypothesis_holds,
        output_defect,
        lambda_in: lambda.to_json(names),
        lambda_out: lambda_prime.to_json(names),
        vertex_distances,
        edge_distances,
        timings,
    };
    Ok((out, report))
}

/// Both sides of `‖d(ρ^#)‖_E ≤ (2δ)^p · dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectConeBound {
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
}

impl DefectConeBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12
    }
}

pub fn check_defect_cone_bound(
    rho: &AlmostRep,
    ctx: &CorrectionContext,
) -> Result<DefectConeBound> {
    let delta = measure_defect(rho, &ctx.presentation, ctx.p)?;
    let lambda = rho_sharp(rho, &ctx.tables)?;
    let lhs = ctx.dg.norm_e(&ctx.dg.apply(&lambda)?)?;
    Ok(DefectConeBound {
        lhs: *lhs.numer() as f64 / *lhs.denom() as f64,
        rhs: (2.0 * delta).powf(ctx.p.value()) * rho.dim() as f64,
        delta,
    })
}
