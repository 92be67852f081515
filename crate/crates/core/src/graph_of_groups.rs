//! Graphs of finite groups, the presentation of their fundamental group and
//! almost-representations on its generators.
//!
//! Oriented edges come in pairs: geometric edge `k` gives oriented edges `2k`
//! (origin to terminus as configured) and `2k + 1`, with `bar(e) = e ^ 1`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_core::{
    multiplicities, pushforward_hom, FiniteGroup, GroupHom, GroupSpec, IrrepTable, UnitaryRep,
};
use crate::json::{matrix_from_json, matrix_to_json, MatrixJson};
use crate::linalg::{exp_i_hermitian, identity, random_hermitian, unitarity_error};
use crate::schatten::{normalized_distance, ComplexMatrix, SchattenExponent};
use crate::theta_cone::{DGMap, EdgeBlock, Side, ThetaVector};

/// Tolerance for unitarity of edge unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A Serre graph: oriented edges with an involution `bar(e) = e ^ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerreGraph {
    num_vertices: usize,
    origin: Vec<usize>,
    terminus: Vec<usize>,
}

impl SerreGraph {
    /// One oriented-edge pair per `(origin, terminus)` entry.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut origin = Vec::with_capacity(2 * edges.len());
        let mut terminus = Vec::with_capacity(2 * edges.len());
        for (k, &(o, t)) in edges.iter().enumerate() {
            if o >= num_vertices || t >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} joins {o} and {t}, outside {num_vertices} vertices"
                )));
            }
            origin.extend([o, t]);
            terminus.extend([t, o]);
        }
        let g = SerreGraph {
            num_vertices,
            origin,
            terminus,
        };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Number of oriented edges, twice the number of geometric edges.
    pub fn num_edges(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self, e: usize) -> usize {
        self.origin[e]
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.terminus[e]
    }

    pub fn bar(e: usize) -> usize {
        e ^ 1
    }

    fn is_connected(&self) -> bool {
        bfs_tree(self).len() + 1 == self.num_vertices
    }

    /// `bar` is a fixed-point-free involution compatible with the endpoints.
    pub fn satisfies_serre_axioms(&self) -> bool {
        (0..self.num_edges()).all(|e| {
            let b = Self::bar(e);
            b != e
                && Self::bar(b) == e
                && self.terminus[b] == self.origin[e]
                && self.origin[b] == self.terminus[e]
        })
    }
}

/// BFS from vertex 0 scanning oriented edges by index; returns the tree edges
/// in discovery order, each oriented from the already-reached endpoint.
fn bfs_tree(g: &SerreGraph) -> Vec<usize> {
    let mut seen = vec![false; g.num_vertices];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    let mut tree = Vec::new();
    while let Some(u) = queue.pop_front() {
        for e in 0..g.num_edges() {
            if g.origin[e] == u && !seen[g.terminus[e]] {
                seen[g.terminus[e]] = true;
                tree.push(e);
                queue.push_back(g.terminus[e]);
            }
        }
    }
    tree
}

/// One oriented edge from each pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    edges: Vec<usize>,
}

impl Orientation {
    /// Picks `edges[k]` from pair `k`.
    pub fn new(graph: &SerreGraph, edges: Vec<usize>) -> Result<Self> {
        if edges.len() * 2 != graph.num_edges() {
            return Err(Error::InvalidGraph(format!(
                "orientation lists {} edges for {} pairs",
                edges.len(),
                graph.num_edges() / 2
            )));
        }
        for (k, &e) in edges.iter().enumerate() {
            if e / 2 != k {
                return Err(Error::InvalidGraph(format!(
                    "orientation entry {k} is edge {e}, not from pair {k}"
                )));
            }
        }
        Ok(Orientation { edges })
    }

    /// The configured direction of every edge.
    pub fn standard(graph: &SerreGraph) -> Self {
        Orientation {
            edges: (0..graph.num_edges()).step_by(2).collect(),
        }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// The chosen oriented edge of geometric edge `k`.
    pub fn edge(&self, k: usize) -> usize {
        self.edges[k]
    }
}

/// A maximal spanning tree as a set of geometric edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    /// Oriented edges away from vertex 0, in BFS discovery order.
    discovery: Vec<usize>,
    in_tree: Vec<bool>,
}

impl SpanningTree {
    /// Geometric edge indices, sorted.
    pub fn edges(&self) -> Vec<usize> {
        (0..self.in_tree.len())
            .filter(|&k| self.in_tree[k])
            .collect()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.in_tree[k]
    }

    /// Tree edges directed away from vertex 0, parents before children.
    pub fn discovery_order(&self) -> &[usize] {
        &self.discovery
    }
}

/// Deterministic BFS tree from vertex 0, preferring smaller edge indices.
pub fn spanning_tree(graph: &SerreGraph) -> Result<SpanningTree> {
    let discovery = bfs_tree(graph);
    if discovery.len() + 1 != graph.num_vertices {
        return Err(Error::InvalidGraph("graph is not connected".into()));
    }
    let mut in_tree = vec![false; graph.num_edges() / 2];
    for &e in &discovery {
        in_tree[e / 2] = true;
    }
    Ok(SpanningTree { discovery, in_tree })
}

/// A finite graph of finite groups with injective edge maps.
#[derive(Debug, Clone)]
pub struct GraphOfGroups {
    name: Option<String>,
    graph: SerreGraph,
    vertex_names: Vec<String>,
    vertex_groups: Vec<Arc<FiniteGroup>>,
    /// One group per geometric edge, shared by both orientations.
    edge_groups: Vec<Arc<FiniteGroup>>,
    /// `i_e: G_e → G_{t(e)}` per oriented edge.
    injections: Vec<GroupHom>,
}

impl GraphOfGroups {
    /// `injections[e]` must be an injective map from the group of pair
    /// `e / 2` into the group at `t(e)`.
    pub fn new(
        graph: SerreGraph,
        vertex_names: Vec<String>,
        vertex_groups: Vec<Arc<FiniteGroup>>,
        edge_groups: Vec<Arc<FiniteGroup>>,
        injections: Vec<GroupHom>,
    ) -> Result<Self> {
        if vertex_groups.len() != graph.num_vertices() || vertex_names.len() != graph.num_vertices()
        {
            return Err(Error::InvalidGraph(
                "one name and group per vertex required".into(),
            ));
        }
        if edge_groups.len() * 2 != graph.num_edges() || injections.len() != graph.num_edges() {
            return Err(Error::InvalidGraph(
                "one group per edge pair and one injection per oriented edge required".into(),
            ));
        }
        for (e, hom) in injections.iter().enumerate() {
            if !hom.is_injective() {
                return Err(Error::InvalidHom(format!("edge map {e} is not injective")));
            }
            if **hom.source() != *edge_groups[e / 2]
                || **hom.target() != *vertex_groups[graph.terminus(e)]
            {
                return Err(Error::InvalidHom(format!(
                    "edge map {e} has the wrong source or target"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = vertex_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidGraph(format!(
                "duplicate vertex name '{dup}'"
            )));
        }
        Ok(GraphOfGroups {
            name: None,
            graph,
            vertex_names,
            vertex_groups,
            edge_groups,
            injections,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn graph(&self) -> &SerreGraph {
        &self.graph
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_group(&self, v: usize) -> &Arc<FiniteGroup> {
        &self.vertex_groups[v]
    }

    pub fn vertex_groups(&self) -> &[Arc<FiniteGroup>] {
        &self.vertex_groups
    }

    /// Group of oriented edge `e`.
    pub fn edge_group(&self, e: usize) -> &Arc<FiniteGroup> {
        &self.edge_groups[e / 2]
    }

    /// `i_e: G_e → G_{t(e)}`.
    pub fn injection(&self, e: usize) -> &GroupHom {
        &self.injections[e]
    }

    /// Names for oriented edges, e.g. `a->b#0`.
    pub fn edge_names(&self) -> Vec<String> {
        (0..self.graph.num_edges())
            .map(|e| {
                format!(
                    "{}->{}#{}",
                    self.vertex_names[self.graph.origin(e)],
                    self.vertex_names[self.graph.terminus(e)],
                    e
                )
            })
            .collect()
    }

    /// Standard orientation, BFS tree and relators.
    pub fn presentation(&self) -> Result<Presentation> {
        let orientation = Orientation::standard(&self.graph);
        let tree = spanning_tree(&self.graph)?;
        let relators = relators(self, &tree, &orientation);
        Ok(Presentation {
            orientation,
            tree,
            relators,
        })
    }

    /// Irrep tables of all vertex and edge groups, computed once per
    /// distinct group (groups compare by multiplication table).
    pub fn irrep_tables<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GraphTables> {
        let mut cache: Vec<(Arc<FiniteGroup>, Arc<IrrepTable>)> = Vec::new();
        let mut lookup = |g: &Arc<FiniteGroup>, rng: &mut R| -> Result<Arc<IrrepTable>> {
            if let Some((_, t)) = cache.iter().find(|(h, _)| h == g) {
                return Ok(t.clone());
            }
            let t = Arc::new(crate::group_core::irrep_table(g, rng)?);
            cache.push((g.clone(), t.clone()));
            Ok(t)
        };
        let vertices = self
            .vertex_groups
            .iter()
            .map(|g| lookup(g, rng))
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edge_groups
            .iter()
            .map(|g| lookup(g, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphTables { vertices, edges })
    }

    /// The boundary map `d: Θ_V → Θ_E`.
    pub fn boundary_map(&self, tables: &GraphTables) -> Result<DGMap> {
        let vertex_dims = tables.vertices.iter().map(|t| t.dims()).collect();
        let trivial = tables.vertices.iter().map(|t| t.trivial_index()).collect();
        let mut edge_dims = Vec::new();
        let mut blocks = Vec::new();
        for e in 0..self.graph.num_edges() {
            let b = SerreGraph::bar(e);
            let edge_table = tables.edge(e);
            edge_dims.push(edge_table.dims());
            blocks.push(EdgeBlock {
                origin: self.graph.origin(e),
                terminus: self.graph.terminus(e),
                at_terminus: pushforward_hom(
                    &self.injections[e],
                    edge_table,
                    &tables.vertices[self.graph.terminus(e)],
                )?,
                at_origin: pushforward_hom(
                    &self.injections[b],
                    edge_table,
                    &tables.vertices[self.graph.origin(e)],
                )?,
            });
        }
        DGMap::new(vertex_dims, trivial, edge_dims, blocks)
    }
}

/// Irrep tables for every vertex group and every geometric edge group.
#[derive(Debug, Clone)]
pub struct GraphTables {
    pub vertices: Vec<Arc<IrrepTable>>,
    /// Indexed by geometric edge.
    pub edges: Vec<Arc<IrrepTable>>,
}

impl GraphTables {
    /// Table of the group of oriented edge `e`.
    pub fn edge(&self, e: usize) -> &IrrepTable {
        &self.edges[e / 2]
    }
}

/// A letter of a word over `S_𝒢`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    /// Element `g` of the group at vertex `v`.
    Vertex { v: usize, g: usize },
    /// `s_e` for the oriented edge `e` of the orientation, or its inverse.
    Edge { e: usize, inverse: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelatorKind {
    /// `s_e` for an oriented tree edge.
    Tree { e: usize },
    /// `s_e⁻¹ i_e(g) s_e i_ē(g)⁻¹`.
    Conjugation { e: usize, g: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relator {
    pub kind: RelatorKind,
    pub word: Vec<Letter>,
}

/// Orientation, tree and relators of `π₁(𝒢, T)`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub orientation: Orientation,
    pub tree: SpanningTree,
    pub relators: Vec<Relator>,
}

/// Relators of `π₁(𝒢, T)`: `s_e` for each oriented tree edge, and the
/// conjugation relator for each oriented edge and each non-identity `g ∈ G_e`.
pub fn relators(
    gog: &GraphOfGroups,
    tree: &SpanningTree,
    orientation: &Orientation,
) -> Vec<Relator> {
    let mut out = Vec::new();
    for &e in orientation.edges() {
        if tree.contains(e / 2) {
            out.push(Relator {
                kind: RelatorKind::Tree { e },
                word: vec![Letter::Edge { e, inverse: false }],
            });
        }
    }
    let graph = gog.graph();
    for &e in orientation.edges() {
        let group = gog.edge_group(e);
        let (t, o) = (graph.terminus(e), graph.origin(e));
        let into_t = gog.injection(e);
        let into_o = gog.injection(SerreGraph::bar(e));
        for g in group.elements().filter(|&g| g != group.identity()) {
            let back = gog.vertex_group(o).inv(into_o.apply(g));
            out.push(Relator {
                kind: RelatorKind::Conjugation { e, g },
                word: vec![
                    Letter::Edge { e, inverse: true },
                    Letter::Vertex {
                        v: t,
                        g: into_t.apply(g),
                    },
                    Letter::Edge { e, inverse: false },
                    Letter::Vertex { v: o, g: back },
                ],
            });
        }
    }
    out
}

/// Unitary matrices on the generators: an exact representation of every
/// vertex group and one unitary `ρ(s_e)` per geometric edge (for the
/// orientation's representative).
#[derive(Debug, Clone)]
pub struct AlmostRep {
    dim: usize,
    vertex_reps: Vec<UnitaryRep>,
    edge_unitaries: Vec<ComplexMatrix>,
}

impl AlmostRep {
    pub fn new(
        gog: &GraphOfGroups,
        vertex_reps: Vec<UnitaryRep>,
        edge_unitaries: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if vertex_reps.len() != gog.graph().num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: gog.graph().num_vertices(),
                found: vertex_reps.len(),
            });
        }
        if edge_unitaries.len() * 2 != gog.graph().num_edges() {
            return Err(Error::DimensionMismatch {
                expected: gog.graph().num_edges() / 2,
                found: edge_unitaries.len(),
            });
        }
        let dim = vertex_reps[0].dim();
        for (v, rep) in vertex_reps.iter().enumerate() {
            if rep.group() != gog.vertex_group(v) {
                return Err(Error::Precondition(format!(
                    "representation at vertex {v} is of the wrong group"
                )));
            }
            if rep.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rep.dim(),
                });
            }
            let err = rep.exactness_error();
            if err > crate::group_core::EXACTNESS_TOL {
                return Err(Error::NonRepresentation(format!(
                    "vertex {v}: exactness error {err:.3e}"
                )));
            }
        }
        for (k, u) in edge_unitaries.iter().enumerate() {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.nrows(),
                });
            }
            let err = unitarity_error(u);
            if err > UNITARITY_TOL {
                return Err(Error::NonRepresentation(format!(
                    "edge {k}: unitarity error {err:.3e}"
                )));
            }
        }
        Ok(AlmostRep {
            dim,
            vertex_reps,
            edge_unitaries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_rep(&self, v: usize) -> &UnitaryRep {
        &self.vertex_reps[v]
    }

    pub fn vertex_reps(&self) -> &[UnitaryRep] {
        &self.vertex_reps
    }

    /// `ρ(s_e)` for geometric edge `k`.
    pub fn edge_unitary(&self, k: usize) -> &ComplexMatrix {
        &self.edge_unitaries[k]
    }

    pub fn edge_unitaries(&self) -> &[ComplexMatrix] {
        &self.edge_unitaries
    }

    pub fn set_edge_unitary(&mut self, k: usize, u: ComplexMatrix) {
        self.edge_unitaries[k] = u;
    }

    /// `ρ(w)` as an ordered matrix product.
    pub fn evaluate(&self, word: &[Letter]) -> ComplexMatrix {
        word.iter()
            .fold(identity(self.dim), |acc, letter| match *letter {
                Letter::Vertex { v, g } => acc * self.vertex_reps[v].matrix(g),
                Letter::Edge { e, inverse: false } => acc * &self.edge_unitaries[e / 2],
                Letter::Edge { e, inverse: true } => acc * self.edge_unitaries[e / 2].adjoint(),
            })
    }

    /// `max_{s ∈ S_𝒢} ‖ρ(s) − σ(s)‖'_p` over all vertex elements and edge
    /// generators.
    pub fn generator_distance(&self, other: &AlmostRep, p: SchattenExponent) -> Result<f64> {
        if self.dim != other.dim || self.vertex_reps.len() != other.vertex_reps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.dim == 0 {
            return Ok(0.0);
        }
        let mut worst = 0.0f64;
        for (a, b) in self.vertex_reps.iter().zip(&other.vertex_reps) {
            worst = worst.max(a.distance(b, p)?);
        }
        for (a, b) in self.edge_unitaries.iter().zip(&other.edge_unitaries) {
            worst = worst.max(normalized_distance(a, b, p)?);
        }
        Ok(worst)
    }

    pub fn to_json(&self, gog: &GraphOfGroups) -> AlmostRepJson {
        AlmostRepJson {
            dim: self.dim,
            vertices: self
                .vertex_reps
                .iter()
                .zip(gog.vertex_names())
                .map(|(r, name)| VertexRepJson {
                    name: name.clone(),
                    matrices: r.matrices().iter().map(matrix_to_json).collect(),
                })
                .collect(),
            edges: self
                .edge_unitaries
                .iter()
                .enumerate()
                .map(|(k, u)| EdgeUnitaryJson {
                    edge: k,
                    unitary: matrix_to_json(u),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &AlmostRepJson, gog: &GraphOfGroups) -> Result<Self> {
        let by_name: HashMap<&str, &VertexRepJson> =
            json.vertices.iter().map(|v| (v.name.as_str(), v)).collect();
        let vertex_reps = gog
            .vertex_names()
            .iter()
            .enumerate()
            .map(|(v, name)| {
                let entry = by_name
                    .get(name.as_str())
                    .ok_or_else(|| Error::Config(format!("no matrices for vertex '{name}'")))?;
                let mats = entry
                    .matrices
                    .iter()
                    .map(matrix_from_json)
                    .collect::<Result<Vec<_>>>()?;
                UnitaryRep::new(gog.vertex_group(v).clone(), mats)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut edges = vec![None; gog.graph().num_edges() / 2];
        for entry in &json.edges {
            let slot = edges
                .get_mut(entry.edge)
                .ok_or_else(|| Error::Config(format!("edge index {} out of range", entry.edge)))?;
            *slot = Some(matrix_from_json(&entry.unitary)?);
        }
        let edge_unitaries = edges
            .into_iter()
            .enumerate()
            .map(|(k, u)| u.ok_or_else(|| Error::Config(format!("no unitary for edge {k}"))))
            .collect::<Result<Vec<_>>>()?;
        let rep = AlmostRep::new(gog, vertex_reps, edge_unitaries)?;
        if rep.dim != json.dim {
            return Err(Error::DimensionMismatch {
                expected: json.dim,
                found: rep.dim,
            });
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRepJson {
    pub name: String,
    pub matrices: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeUnitaryJson {
    /// Geometric edge index, as listed in the graph configuration.
    pub edge: usize,
    pub unitary: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlmostRepJson {
    pub dim: usize,
    pub vertices: Vec<VertexRepJson>,
    pub edges: Vec<EdgeUnitaryJson>,
}

/// `max_r ‖ρ(r) − I‖'_p` over the relators.
pub fn measure_defect(
    rho: &AlmostRep,
    presentation: &Presentation,
    p: SchattenExponent,
) -> Result<f64> {
    if rho.dim == 0 {
        return Ok(0.0);
    }
    let id = identity(rho.dim);
    let mut worst = 0.0f64;
    for r in &presentation.relators {
        worst = worst.max(normalized_distance(&rho.evaluate(&r.word), &id, p)?);
    }
    Ok(worst)
}

/// `(ρ^#)_v = (ρ|_{G_v})^#`.
pub fn rho_sharp(rho: &AlmostRep, tables: &GraphTables) -> Result<ThetaVector> {
    let blocks = rho
        .vertex_reps
        .iter()
        .zip(&tables.vertices)
        .map(|(r, t)| multiplicities(r, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaVector::new(Side::Vertex, blocks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    EdgesOnly,
    EdgesAndConjugateVertices,
}

impl std::str::FromStr for PerturbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edges-only" => Ok(PerturbMode::EdgesOnly),
            "edges-and-conjugate-vertices" => Ok(PerturbMode::EdgesAndConjugateVertices),
            other => Err(Error::Config(format!(
                "unknown perturbation mode '{other}'"
            ))),
        }
    }
}

/// Multiplies each edge unitary by `exp(iεH)` with `‖H‖'_2 = 1`, and in the
/// second mode also conjugates each vertex representation by an independent
/// `exp(iεH_v)`.
pub fn perturb<R: Rng + ?Sized>(
    rho: &AlmostRep,
    eps: f64,
    mode: PerturbMode,
    rng: &mut R,
) -> Result<AlmostRep> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Precondition(format!(
            "perturbation size must be non-negative, got {eps}"
        )));
    }
    let n = rho.dim;
    let edge_unitaries = rho
        .edge_unitaries
        .iter()
        .map(|u| Ok(u * exp_i_hermitian(&random_hermitian(n, rng), eps)?))
        .collect::<Result<Vec<_>>>()?;
    let vertex_reps = match mode {
        PerturbMode::EdgesOnly => rho.vertex_reps.clone(),
        PerturbMode::EdgesAndConjugateVertices => rho
            .vertex_reps
            .iter()
            .map(|r| r.conjugate(&exp_i_hermitian(&random_hermitian(n, rng), eps)?))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(AlmostRep {
        dim: n,
        vertex_reps,
        edge_unitaries,
    })
}

/// A group given by preset name or by an explicit table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Preset(String),
    Table(GroupSpec),
}

impl GroupRef {
    pub fn resolve(&self) -> Result<FiniteGroup> {
        match self {
            GroupRef::Preset(name) => FiniteGroup::preset(name),
            GroupRef::Table(spec) => spec.build(),
        }
    }
}

/// A vertex given by name or index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexConfig {
    pub name: String,
    pub group: GroupRef,
}

/// Edge from `origin` to `terminus` with injections of its group into both
/// endpoint groups, given as element index maps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub origin: VertexRef,
    pub terminus: VertexRef,
    pub group: GroupRef,
    pub to_terminus: Vec<usize>,
    pub to_origin: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub vertices: Vec<VertexConfig>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
}

impl GraphConfig {
    pub fn build(&self) -> Result<GraphOfGroups> {
        let names: Vec<String> = self.vertices.iter().map(|v| v.name.clone()).collect();
        let index = |r: &VertexRef| -> Result<usize> {
            match r {
                VertexRef::Index(i) if *i < names.len() => Ok(*i),
                VertexRef::Index(i) => Err(Error::Config(format!("vertex index {i} out of range"))),
                VertexRef::Name(n) => names
                    .iter()
                    .position(|x| x == n)
                    .ok_or_else(|| Error::Config(format!("unknown vertex '{n}'"))),
            }
        };
        let vertex_groups = self
            .vertices
            .iter()
            .map(|v| v.group.resolve().map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::new();
        let mut edge_groups = Vec::new();
        let mut injections = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            let (o, t) = (index(&e.origin)?, index(&e.terminus)?);
            let group = Arc::new(e.group.resolve()?);
            let ctx = |err: Error| Error::Config(format!("edge {k}: {err}"));
            injections.push(
                GroupHom::injection(
                    group.clone(),
                    vertex_groups[t].clone(),
                    e.to_terminus.clone(),
                )
                .map_err(ctx)?,
            );
            injections.push(
                GroupHom::injection(group.clone(), vertex_groups[o].clone(), e.to_origin.clone())
                    .map_err(ctx)?,
            );
            pairs.push((o, t));
            edge_groups.push(group);
        }
        let graph = SerreGraph::new(names.len(), &pairs)?;
        let gog = GraphOfGroups::new(graph, names, vertex_groups, edge_groups, injections)?;
        Ok(match &self.name {
            Some(n) => gog.with_name(n.clone()),
            None => gog,
        })
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = [
    "Z2_free_Z3",
    "infinite_dihedral",
    "hnn_Z4_over_Z2",
    "S3_amalg_Z4_over_Z2",
];

/// Configuration of a built-in graph of groups.
pub fn preset_config(name: &str) -> Result<GraphConfig> {
    let vertex = |n: &str, g: &str| VertexConfig {
        name: n.into(),
        group: GroupRef::Preset(g.into()),
    };
    let edge = |o: &str, t: &str, g: &str, to_t: Vec<usize>, to_o: Vec<usize>| EdgeConfig {
        origin: VertexRef::Name(o.into()),
        terminus: VertexRef::Name(t.into()),
        group: GroupRef::Preset(g.into()),
        to_terminus: to_t,
        to_origin: to_o,
    };
    let (vertices, edges) = match name {
        "Z2_free_Z3" => (
            vec![vertex("a", "Z2"), vertex("b", "Z3")],
            vec![edge("a", "b", "trivial", vec![0], vec![0])],
        ),
        "infinite_dihedral" => (
            vec![vertex("a", "Z2"), vertex("b", "Z2")],
            vec![edge("a", "b", "trivial", vec![0], vec![0])],
        ),
        "hnn_Z4_over_Z2" => (
            vec![vertex("v", "Z4")],
            vec![edge("v", "v", "Z2", vec![0, 2], vec![0, 2])],
        ),
        // element 1 of S3 is a transposition
        "S3_amalg_Z4_over_Z2" => (
            vec![vertex("a", "S3"), vertex("b", "Z4")],
            vec![edge("a", "b", "Z2", vec![0, 2], vec![0, 1])],
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown graph preset '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(GraphConfig {
        name: Some(name.into()),
        vertices,
        edges,
    })
}

pub fn preset(name: &str) -> Result<GraphOfGroups> {
    preset_config(name)?.build()
}
