//! Integer multiplicity vectors over the vertices and edges of a graph of
//! groups, the boundary map `d`, weighted norms and the projection onto the
//! cone of realizable vectors.

mod ilp;

use std::collections::HashMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_core::IntMatrix;
use ilp::{KernelCone, Objective, Restrictions};

pub use ilp::NODE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Vertex,
    Edge,
}

/// One integer block per vertex (or oriented edge), indexed by the canonical
/// irreps of that group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaVector {
    pub side: Side,
    pub blocks: Vec<Vec<i64>>,
}

impl ThetaVector {
    pub fn new(side: Side, blocks: Vec<Vec<i64>>) -> Self {
        ThetaVector { side, blocks }
    }

    pub fn vertex(blocks: Vec<Vec<i64>>) -> Self {
        ThetaVector::new(Side::Vertex, blocks)
    }

    pub fn zeros(side: Side, dims: &[Vec<usize>]) -> Self {
        ThetaVector::new(side, dims.iter().map(|d| vec![0; d.len()]).collect())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.blocks.iter().flatten().all(|&x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|&x| x == 0)
    }

    pub fn flatten(&self) -> Vec<i64> {
        self.blocks.iter().flatten().copied().collect()
    }

    fn unflatten(side: Side, shape: &[Vec<usize>], flat: &[i64]) -> Self {
        let mut it = flat.iter().copied();
        let blocks = shape
            .iter()
            .map(|d| it.by_ref().take(d.len()).collect())
            .collect();
        ThetaVector::new(side, blocks)
    }

    fn check_shape(&self, side: Side, dims: &[Vec<usize>]) -> Result<()> {
        if self.side != side {
            return Err(Error::Precondition(format!(
                "expected a {side:?}-side vector, got {:?}",
                self.side
            )));
        }
        if self.blocks.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: self.blocks.len(),
            });
        }
        for (b, d) in self.blocks.iter().zip(dims) {
            if b.len() != d.len() {
                return Err(Error::DimensionMismatch {
                    expected: d.len(),
                    found: b.len(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self, names: &[String]) -> ThetaVectorJson {
        ThetaVectorJson {
            side: self.side,
            blocks: names
                .iter()
                .zip(&self.blocks)
                .map(|(name, values)| NamedBlock {
                    name: name.clone(),
                    values: values.clone(),
                })
                .collect(),
        }
    }

    /// Reorders named blocks to match `names`; every name must appear once.
    pub fn from_json(json: &ThetaVectorJson, names: &[String]) -> Result<Self> {
        let mut by_name: HashMap<&str, &Vec<i64>> = HashMap::new();
        for b in &json.blocks {
            if by_name.insert(&b.name, &b.values).is_some() {
                return Err(Error::Config(format!("block '{}' given twice", b.name)));
            }
        }
        let blocks = names
            .iter()
            .map(|n| {
                by_name
                    .remove(n.as_str())
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("missing block '{n}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = by_name.keys().next() {
            return Err(Error::Config(format!("unknown block '{extra}'")));
        }
        Ok(ThetaVector::new(json.side, blocks))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedBlock {
    pub name: String,
    pub values: Vec<i64>,
}

/// `{"side": "vertex", "blocks": [{"name": "v0", "values": [...]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaVectorJson {
    pub side: Side,
    pub blocks: Vec<NamedBlock>,
}

/// `Σ_π |λ_π| dim π`.
pub fn group_norm(block: &[i64], dims: &[usize]) -> i64 {
    block
        .iter()
        .zip(dims)
        .map(|(m, d)| m.abs() * *d as i64)
        .sum()
}

fn average_norm(v: &ThetaVector, dims: &[Vec<usize>]) -> Rational64 {
    if v.blocks.is_empty() {
        return Rational64::from_integer(0);
    }
    let total: i64 = v
        .blocks
        .iter()
        .zip(dims)
        .map(|(b, d)| group_norm(b, d))
        .sum();
    Rational64::new(total, v.blocks.len() as i64)
}

/// The boundary map restricted to one oriented edge `e`:
/// `(dλ)_e = i_e^# λ_{t(e)} − i_ē^# λ_{o(e)}`.
#[derive(Debug, Clone)]
pub struct EdgeBlock {
    pub origin: usize,
    pub terminus: usize,
    /// `i_e^#`, from the terminus group's irreps to the edge group's.
    pub at_terminus: IntMatrix,
    /// `i_ē^#`, from the origin group's irreps to the edge group's.
    pub at_origin: IntMatrix,
}

/// `d: Θ_V → Θ_E`, one block per oriented edge.
#[derive(Debug, Clone)]
pub struct DGMap {
    vertex_dims: Vec<Vec<usize>>,
    edge_dims: Vec<Vec<usize>>,
    trivial: Vec<usize>,
    edges: Vec<EdgeBlock>,
}

impl DGMap {
    /// `vertex_dims[v]` and `edge_dims[e]` list irrep dimensions in canonical
    /// order; `trivial[v]` is the index of the trivial irrep at `v`.
    pub fn new(
        vertex_dims: Vec<Vec<usize>>,
        trivial: Vec<usize>,
        edge_dims: Vec<Vec<usize>>,
        edges: Vec<EdgeBlock>,
    ) -> Result<Self> {
        if trivial.len() != vertex_dims.len() || edge_dims.len() != edges.len() {
            return Err(Error::InvalidGraph(
                "inconsistent boundary-map shapes".into(),
            ));
        }
        for (e, (blk, ed)) in edges.iter().zip(&edge_dims).enumerate() {
            let (o, t) = (blk.origin, blk.terminus);
            if o >= vertex_dims.len() || t >= vertex_dims.len() {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} has an endpoint outside the vertex set"
                )));
            }
            for (m, v) in [(&blk.at_terminus, t), (&blk.at_origin, o)] {
                if m.rows() != ed.len() || m.cols() != vertex_dims[v].len() {
                    return Err(Error::InvalidGraph(format!(
                        "edge {e}: pushforward is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        ed.len(),
                        vertex_dims[v].len()
                    )));
                }
            }
        }
        Ok(DGMap {
            vertex_dims,
            edge_dims,
            trivial,
            edges,
        })
    }

    pub fn vertex_dims(&self) -> &[Vec<usize>] {
        &self.vertex_dims
    }

    pub fn edge_dims(&self) -> &[Vec<usize>] {
        &self.edge_dims
    }

    pub fn edges(&self) -> &[EdgeBlock] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_dims.len()
    }

    /// `π^#`: one copy of the trivial irrep at every vertex.
    pub fn trivial_vector(&self) -> ThetaVector {
        let mut v = ThetaVector::zeros(Side::Vertex, &self.vertex_dims);
        for (b, &t) in v.blocks.iter_mut().zip(&self.trivial) {
            b[t] = 1;
        }
        v
    }

    /// `‖λ‖_V = (1/|V|) Σ_v ‖λ_v‖_{G_v}`.
    pub fn norm_v(&self, lambda: &ThetaVector) -> Result<Rational64> {
        lambda.check_shape(Side::Vertex, &self.vertex_dims)?;
        Ok(average_norm(lambda, &self.vertex_dims))
    }

    /// `‖μ‖_E`, averaged over all oriented edges.
    pub fn norm_e(&self, mu: &ThetaVector) -> Result<Rational64> {
        mu.check_shape(Side::Edge, &self.edge_dims)?;
        Ok(average_norm(mu, &self.edge_dims))
    }

    pub fn apply(&self, lambda: &ThetaVector) -> Result<ThetaVector> {
        lambda.check_shape(Side::Vertex, &self.vertex_dims)?;
        let blocks = self
            .edges
            .iter()
            .map(|blk| {
                let head = blk.at_terminus.apply(&lambda.blocks[blk.terminus]);
                let tail = blk.at_origin.apply(&lambda.blocks[blk.origin]);
                head.iter().zip(&tail).map(|(a, b)| a - b).collect()
            })
            .collect();
        Ok(ThetaVector::new(Side::Edge, blocks))
    }

    /// Dense integer matrix of `d` in flattened coordinates.
    fn dense_rows(&self) -> Vec<Vec<i64>> {
        let offsets: Vec<usize> = self
            .vertex_dims
            .iter()
            .scan(0, |acc, d| {
                let o = *acc;
                *acc += d.len();
                Some(o)
            })
            .collect();
        let n: usize = self.vertex_dims.iter().map(Vec::len).sum();
        let mut rows = Vec::new();
        for blk in &self.edges {
            for r in 0..blk.at_terminus.rows() {
                let mut row = vec![0i64; n];
                for c in 0..blk.at_terminus.cols() {
                    row[offsets[blk.terminus] + c] += blk.at_terminus.get(r, c);
                }
                for c in 0..blk.at_origin.cols() {
                    row[offsets[blk.origin] + c] -= blk.at_origin.get(r, c);
                }
                if row.iter().any(|&x| x != 0) && !rows.contains(&row) {
                    rows.push(row);
                }
            }
        }
        rows
    }
}

/// `(dλ)` for a vertex-side vector.
pub fn dg_apply(lambda: &ThetaVector, d: &DGMap) -> Result<ThetaVector> {
    d.apply(lambda)
}

pub fn norm_v(lambda: &ThetaVector, d: &DGMap) -> Result<Rational64> {
    d.norm_v(lambda)
}

pub fn norm_e(mu: &ThetaVector, d: &DGMap) -> Result<Rational64> {
    d.norm_e(mu)
}

/// Nearest point of the kernel cone together with solver diagnostics.
#[derive(Debug, Clone)]
pub struct ConeProjection {
    pub projected: ThetaVector,
    /// `‖λ − λ''‖_V`.
    pub distance: Rational64,
    /// Branch-and-bound nodes over all passes.
    pub nodes: usize,
}

/// Minimizes `‖λ − μ‖_V` over `μ ≥ 0` with `dμ = 0` and `‖μ‖_V ≤ ‖λ‖_V`,
/// taking the lexicographically smallest minimizer.
pub fn project_to_kernel_cone(lambda: &ThetaVector, d: &DGMap) -> Result<ConeProjection> {
    project_to_kernel_cone_with_cap(lambda, d, NODE_CAP)
}

pub fn project_to_kernel_cone_with_cap(
    lambda: &ThetaVector,
    d: &DGMap,
    node_cap: usize,
) -> Result<ConeProjection> {
    lambda.check_shape(Side::Vertex, &d.vertex_dims)?;
    if !lambda.is_nonnegative() {
        return Err(Error::Precondition(
            "cone projection needs a non-negative vector".into(),
        ));
    }
    let reference = lambda.flatten();
    let weights: Vec<i64> = d.vertex_dims.iter().flatten().map(|&x| x as i64).collect();
    let rows = d.dense_rows();
    let cap = group_norm(&reference, &d.vertex_dims.concat());
    let cone = KernelCone {
        rows: &rows,
        weights: &weights,
        cap,
        reference: &reference,
    };
    let vertices = d.num_vertices().max(1) as i64;
    let free = Restrictions {
        fixed: vec![None; reference.len()],
        max_distance: None,
    };
    if cone.is_feasible(&reference, &free) {
        return Ok(ConeProjection {
            projected: lambda.clone(),
            distance: Rational64::from_integer(0),
            nodes: 0,
        });
    }

    let mut nodes = 0;
    let optimum = cone
        .minimize(Objective::Distance, &free, &mut nodes, node_cap)?
        .ok_or_else(|| Error::Solver("kernel cone reported empty, but zero is feasible".into()))?;
    let mut restrictions = Restrictions {
        fixed: vec![None; reference.len()],
        max_distance: Some(optimum),
    };
    for k in 0..reference.len() {
        let value = cone
            .minimize(
                Objective::Coordinate(k),
                &restrictions,
                &mut nodes,
                node_cap,
            )?
            .ok_or_else(|| Error::Solver(format!("lexicographic pass {k} lost feasibility")))?;
        restrictions.fixed[k] = Some(value);
    }
    let point: Vec<i64> = restrictions
        .fixed
        .iter()
        .map(|v| v.expect("all coordinates fixed"))
        .collect();
    debug_assert_eq!(cone.distance(&point), optimum);
    Ok(ConeProjection {
        projected: ThetaVector::unflatten(Side::Vertex, &d.vertex_dims, &point),
        distance: Rational64::new(optimum, vertices),
        nodes,
    })
}

/// `λ'' + (target − ‖λ''‖_V) π^#`.
pub fn pad_with_trivial(lambda: &ThetaVector, target: i64, d: &DGMap) -> Result<ThetaVector> {
    let norm = d.norm_v(lambda)?;
    if !norm.is_integer() {
        return Err(Error::Precondition(format!(
            "vertex norm {norm} is not an integer"
        )));
    }
    let extra = target - norm.to_integer();
    if extra < 0 {
        return Err(Error::Precondition(format!(
            "target {target} is below the current norm {norm}"
        )));
    }
    let mut out = lambda.clone();
    for (b, &t) in out.blocks.iter_mut().zip(&d.trivial) {
        b[t] += extra;
    }
    Ok(out)
}
