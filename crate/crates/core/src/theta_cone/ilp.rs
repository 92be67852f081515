//! Exact integer minimization by branch and bound over LP relaxations.
//!
//! The feasible set is `{μ ∈ ℤ^n : Aμ = 0, 0 ≤ μ, w·μ ≤ cap}` with integer data
//! and positive weights `w`, so it is finite. Relaxations are solved in
//! floating point; candidate integer points are always re-checked exactly.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-6;

/// Default node budget per integer program.
pub const NODE_CAP: usize = 100_000;

pub(crate) struct KernelCone<'a> {
    /// Equality rows, each of length `n`.
    pub rows: &'a [Vec<i64>],
    /// Positive weight of each coordinate.
    pub weights: &'a [i64],
    /// Upper bound on `w·μ`.
    pub cap: i64,
    /// Reference point for the distance `Σ w |λ − μ|`.
    pub reference: &'a [i64],
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Objective {
    /// `Σ w_i |λ_i − μ_i|`.
    Distance,
    /// `μ_k` alone.
    Coordinate(usize),
}

/// Extra constraints layered on the cone for the lexicographic passes.
#[derive(Clone, Debug, Default)]
pub(crate) struct Restrictions {
    pub fixed: Vec<Option<i64>>,
    pub max_distance: Option<i64>,
}

impl KernelCone<'_> {
    fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn distance(&self, mu: &[i64]) -> i64 {
        mu.iter()
            .zip(self.reference)
            .zip(self.weights)
            .map(|((m, l), w)| w * (l - m).abs())
            .sum()
    }

    fn objective_value(&self, objective: Objective, mu: &[i64]) -> i64 {
        match objective {
            Objective::Distance => self.distance(mu),
            Objective::Coordinate(k) => mu[k],
        }
    }

    pub fn is_feasible(&self, mu: &[i64], restrictions: &Restrictions) -> bool {
        mu.iter().all(|&m| m >= 0)
            && self
                .rows
                .iter()
                .all(|row| row.iter().zip(mu).map(|(a, m)| a * m).sum::<i64>() == 0)
            && self.weights.iter().zip(mu).map(|(w, m)| w * m).sum::<i64>() <= self.cap
            && restrictions
                .fixed
                .iter()
                .zip(mu)
                .all(|(f, m)| f.is_none_or(|v| v == *m))
            && restrictions
                .max_distance
                .is_none_or(|d| self.distance(mu) <= d)
    }

    /// Coordinate box implied by the weight cap.
    fn initial_box(&self, restrictions: &Restrictions) -> Vec<(i64, i64)> {
        (0..self.n())
            .map(|i| match restrictions.fixed.get(i).copied().flatten() {
                Some(v) => (v, v),
                None => (0, self.cap / self.weights[i]),
            })
            .collect()
    }

    /// LP relaxation over a box; `None` when infeasible.
    fn relax(
        &self,
        objective: Objective,
        bounds: &[(i64, i64)],
        restrictions: &Restrictions,
    ) -> Result<Option<(f64, Vec<f64>)>> {
        let n = self.n();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let mu: Vec<_> = (0..n)
            .map(|i| {
                let c = match objective {
                    Objective::Coordinate(k) if k == i => 1.0,
                    _ => 0.0,
                };
                lp.add_var(c, (bounds[i].0 as f64, bounds[i].1 as f64))
            })
            .collect();
        let needs_dev =
            matches!(objective, Objective::Distance) || restrictions.max_distance.is_some();
        let dev: Vec<_> = if needs_dev {
            (0..n)
                .map(|i| {
                    let c = match objective {
                        Objective::Distance => self.weights[i] as f64,
                        Objective::Coordinate(_) => 0.0,
                    };
                    lp.add_var(c, (0.0, f64::INFINITY))
                })
                .collect()
        } else {
            Vec::new()
        };
        for (i, u) in dev.iter().enumerate() {
            let l = self.reference[i] as f64;
            // u ≥ λ − μ and u ≥ μ − λ
            lp.add_constraint([(*u, 1.0), (mu[i], 1.0)], ComparisonOp::Ge, l);
            lp.add_constraint([(*u, 1.0), (mu[i], -1.0)], ComparisonOp::Ge, -l);
        }
        for row in self.rows {
            let expr: Vec<_> = row
                .iter()
                .zip(&mu)
                .filter(|(a, _)| **a != 0)
                .map(|(a, v)| (*v, *a as f64))
                .collect();
            if !expr.is_empty() {
                lp.add_constraint(expr, ComparisonOp::Eq, 0.0);
            }
        }
        let weighted: Vec<_> = mu
            .iter()
            .zip(self.weights)
            .map(|(v, w)| (*v, *w as f64))
            .collect();
        lp.add_constraint(weighted, ComparisonOp::Le, self.cap as f64);
        if let Some(d) = restrictions.max_distance {
            let expr: Vec<_> = dev
                .iter()
                .zip(self.weights)
                .map(|(v, w)| (*v, *w as f64))
                .collect();
            lp.add_constraint(expr, ComparisonOp::Le, d as f64);
        }
        let outcome = match lp.solve() {
            Ok(o) => o,
            Err(microlp::Error::Infeasible) => return Ok(None),
            Err(e) => return Err(Error::Solver(e.to_string())),
        };
        let solution = outcome
            .into_solution()
            .map_err(|_| Error::Solver("LP relaxation interrupted".into()))?;
        let values = mu.iter().map(|v| solution.var_value_raw(*v)).collect();
        Ok(Some((solution.objective(), values)))
    }

    /// Depth-first branch and bound returning the optimal value, or `None`
    /// if nothing is feasible. `nodes` accumulates across calls and is
    /// checked against `node_cap`.
    pub fn minimize(
        &self,
        objective: Objective,
        restrictions: &Restrictions,
        nodes: &mut usize,
        node_cap: usize,
    ) -> Result<Option<i64>> {
        let mut best: Option<i64> = None;
        let mut stack = vec![self.initial_box(restrictions)];
        while let Some(bounds) = stack.pop() {
            if bounds.iter().any(|(lo, hi)| lo > hi) {
                continue;
            }
            if *nodes >= node_cap {
                return Err(Error::SolverLimit {
                    cap: node_cap,
                    explored: *nodes,
                });
            }
            *nodes += 1;
            let Some((bound, x)) = self.relax(objective, &bounds, restrictions)? else {
                continue;
            };
            // objectives are integral, so only a strictly smaller integer helps
            if let Some(incumbent) = best {
                if bound > (incumbent - 1) as f64 + BOUND_SLACK {
                    continue;
                }
            }
            let fractional = x
                .iter()
                .enumerate()
                .map(|(i, v)| (i, (v - v.round()).abs()))
                .filter(|(_, f)| *f > INTEGRALITY_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match fractional {
                None => {
                    let point: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
                    if !self.is_feasible(&point, restrictions) {
                        return Err(Error::Solver(format!(
                            "rounded relaxation {point:?} violates the exact constraints"
                        )));
                    }
                    let value = self.objective_value(objective, &point);
                    if best.is_none_or(|v| value < v) {
                        best = Some(value);
                    }
                }
                Some((i, _)) => {
                    let v = x[i];
                    let mut down = bounds.clone();
                    down[i].1 = v.floor() as i64;
                    let mut up = bounds;
                    up[i].0 = v.ceil() as i64;
                    // explore the nearer side first
                    if v - v.floor() < 0.5 {
                        stack.push(up);
                        stack.push(down);
                    } else {
                        stack.push(down);
                        stack.push(up);
                    }
                }
            }
        }
        Ok(best)
    }
}
