//! Exact transportation by integer-capacity min-cost flow.
//!
//! Weights are scaled to integers over their least common denominator
//! (capped at 10^6), then the problem is solved by successive shortest
//! paths with Johnson potentials. Costs stay in `f64`; with non-negative
//! reduced costs every augmentation is along a true shortest path, so the
//! optimum is exact up to float summation error.

use crate::error::{Error, Result};
use crate::numeric::lcm;

pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct Network {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
    }

    /// Successive shortest paths from `s` to `t`; returns (flow, cost).
    fn min_cost_flow(&mut self, s: usize, t: usize) -> (i64, f64) {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        let n = self.adj.len();
        let mut phi = vec![0.0f64; n];
        let mut total_flow = 0i64;
        let mut total_cost = 0.0f64;

        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut parent_edge = vec![usize::MAX; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((ordered(0.0), s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                let d = f64::from_bits(d);
                if d > dist[u] {
                    continue;
                }
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid];
                    if e.cap <= 0 {
                        continue;
                    }
                    // Potentials keep reduced costs non-negative up to
                    // rounding; clamp the dust.
                    let rc = (e.cost + phi[u] - phi[e.to]).max(0.0);
                    let nd = d + rc;
                    if nd < dist[e.to] {
                        dist[e.to] = nd;
                        parent_edge[e.to] = eid;
                        heap.push(Reverse((ordered(nd), e.to)));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    phi[v] += dist[v];
                }
            }
            // Bottleneck along the augmenting path.
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let eid = parent_edge[v];
                push = push.min(self.edges[eid].cap);
                v = self.edges[eid ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let eid = parent_edge[v];
                self.edges[eid].cap -= push;
                self.edges[eid ^ 1].cap += push;
                total_cost += push as f64 * self.edges[eid].cost;
                v = self.edges[eid ^ 1].to;
            }
            total_flow += push;
        }
        (total_flow, total_cost)
    }
}

fn ordered(x: f64) -> u64 {
    // Non-negative finite floats order correctly as raw bits.
    debug_assert!(x >= 0.0);
    x.to_bits()
}

/// Minimum transport cost between integer supplies and demands under the
/// given cost matrix. Supplies and demands must balance.
pub fn transport(cost: &[Vec<f64>], supply: &[i64], demand: &[i64]) -> Result<f64> {
    let k = supply.len();
    let l = demand.len();
    if cost.len() != k || cost.iter().any(|row| row.len() != l) {
        return Err(Error::precondition("cost matrix shape does not match supplies/demands"));
    }
    let total: i64 = supply.iter().sum();
    if total != demand.iter().sum::<i64>() {
        return Err(Error::precondition("supplies and demands do not balance"));
    }
    if supply.iter().chain(demand.iter()).any(|&x| x < 0) {
        return Err(Error::precondition("negative supply or demand"));
    }
    let s = k + l;
    let t = k + l + 1;
    let mut net = Network::new(k + l + 2);
    for (i, &a) in supply.iter().enumerate() {
        if a > 0 {
            net.add_edge(s, i, a, 0.0);
        }
    }
    for (j, &b) in demand.iter().enumerate() {
        if b > 0 {
            net.add_edge(k + j, t, b, 0.0);
        }
    }
    for i in 0..k {
        if supply[i] == 0 {
            continue;
        }
        for j in 0..l {
            if demand[j] == 0 {
                continue;
            }
            net.add_edge(i, k + j, supply[i].min(demand[j]), cost[i][j]);
        }
    }
    let (flow, cost) = net.min_cost_flow(s, t);
    if flow != total {
        return Err(Error::precondition("transportation problem is infeasible"));
    }
    Ok(cost)
}

/// Best rational approximation of `x` by continued fractions, with the
/// denominator capped. Returns `None` when no convergent lands within `tol`.
fn best_rational(x: f64, max_denom: u64, tol: f64) -> Option<(u64, u64)> {
    debug_assert!(x >= 0.0);
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut frac = x;
    for _ in 0..64 {
        let a = frac.floor();
        if a > max_denom as f64 {
            break;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a_int.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_denom {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if (x - p1 as f64 / q1 as f64).abs() <= tol {
            return Some((p1, q1));
        }
        let rem = frac - a;
        if rem <= f64::EPSILON {
            break;
        }
        frac = 1.0 / rem;
    }
    if q1 > 0 && (x - p1 as f64 / q1 as f64).abs() <= tol {
        Some((p1, q1))
    } else {
        None
    }
}

/// Scale weights to integers over their least common denominator.
///
/// Returns the integer masses and the denominator `D <= MAX_DENOMINATOR`;
/// masses sum to exactly `D`.
pub fn rationalize_weights(weights: &[f64]) -> Result<(Vec<i64>, u64)> {
    let mut denom = 1u64;
    for &w in weights {
        let (_, q) = best_rational(w, MAX_DENOMINATOR, 1e-9).ok_or_else(|| {
            Error::UnsupportedWeights(format!(
                "weight {w} is not rational with denominator <= {MAX_DENOMINATOR}"
            ))
        })?;
        denom = lcm(denom, q);
        if denom > MAX_DENOMINATOR {
            return Err(Error::UnsupportedWeights(format!(
                "common denominator exceeds {MAX_DENOMINATOR}"
            )));
        }
    }
    let masses: Vec<i64> = weights
        .iter()
        .map(|&w| (w * denom as f64).round() as i64)
        .collect();
    for (&w, &m) in weights.iter().zip(masses.iter()) {
        if (w * denom as f64 - m as f64).abs() > 1e-6 {
            return Err(Error::UnsupportedWeights(format!(
                "weight {w} does not scale to an integer over denominator {denom}"
            )));
        }
    }
    let total: i64 = masses.iter().sum();
    if total != denom as i64 {
        return Err(Error::UnsupportedWeights(format!(
            "scaled weights sum to {total}/{denom}, expected exactly 1"
        )));
    }
    Ok((masses, denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment;
    use crate::rng::RngStream;

    #[test]
    fn transport_matches_assignment_on_unit_supplies() {
        let mut stream = RngStream::new(31, 0);
        for _ in 0..100 {
            let n = 1 + (stream.next_u64() % 6) as usize;
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| stream.uniform(0.0, 5.0)).collect())
                .collect();
            let supply = vec![1i64; n];
            let demand = vec![1i64; n];
            let flow_cost = transport(&cost, &supply, &demand).unwrap();
            let (_, lap_cost) = assignment::solve(&cost);
            assert!((flow_cost - lap_cost).abs() < 1e-9, "{flow_cost} vs {lap_cost}");
        }
    }

    #[test]
    fn forced_split_coupling() {
        // One source must split across both sinks.
        let cost = vec![vec![1.0, 3.0]];
        let got = transport(&cost, &[2], &[1, 1]).unwrap();
        assert_eq!(got, 4.0);
    }

    #[test]
    fn unbalanced_problems_are_rejected() {
        let cost = vec![vec![1.0]];
        assert!(transport(&cost, &[2], &[1]).is_err());
    }

    #[test]
    fn rationalize_simple_fractions() {
        let (masses, denom) = rationalize_weights(&[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(denom, 4);
        assert_eq!(masses, vec![2, 1, 1]);

        let third = 1.0 / 3.0;
        let (masses, denom) = rationalize_weights(&[third, third, third]).unwrap();
        assert_eq!(denom, 3);
        assert_eq!(masses, vec![1, 1, 1]);
    }

    #[test]
    fn rationalize_rejects_irrational_weights() {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(
            rationalize_weights(&[w, 1.0 - w]),
            Err(Error::UnsupportedWeights(_))
        ));
    }

    #[test]
    fn rationalize_rejects_denominator_overflow() {
        // 1/999983 and 1/999979 are both representable, but their lcm is not.
        let a = 1.0 / 999_983.0;
        let b = 1.0 / 999_979.0;
        let rest = 1.0 - a - b;
        assert!(matches!(
            rationalize_weights(&[a, b, rest]),
            Err(Error::UnsupportedWeights(_))
        ));
    }

    #[test]
    fn uniform_weights_scale_to_unit_masses() {
        let n = 1024;
        let w = vec![1.0 / n as f64; n];
        let (masses, denom) = rationalize_weights(&w).unwrap();
        assert_eq!(denom, n as u64);
        assert!(masses.iter().all(|&m| m == 1));
    }
}
