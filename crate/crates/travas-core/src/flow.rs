// SPDX-License-Identifier: Apache-2.0

//! Exact min-cost flow for balanced transportation problems.
//!
//! The network is complete bipartite: every supply vertex connects to every
//! demand vertex with unbounded capacity. Successive shortest paths with
//! Johnson potentials route the supply one augmenting path at a time; since
//! every path saturates a supply or a demand vertex there are at most
//! `supplies + demands` augmentations.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::{Error, Result};

/// A balanced transportation problem with integral data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork {
    supplies: Vec<u64>,
    demands: Vec<u64>,
    /// Row-major `supplies.len() × demands.len()` edge costs.
    costs: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(supplies: Vec<u64>, demands: Vec<u64>, costs: Vec<u64>) -> Result<Self> {
        let expected = supplies.len() * demands.len();
        if costs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: costs.len(),
            });
        }
        let supply: u64 = supplies.iter().sum();
        let demand: u64 = demands.iter().sum();
        if supply != demand {
            return Err(Error::Unbalanced { supply, demand });
        }
        Ok(FlowNetwork {
            supplies,
            demands,
            costs,
        })
    }

    /// Builds a network whose totals may differ. The imbalance is absorbed by
    /// one slack vertex: it becomes an extra demand vertex reached from
    /// supply `i` at `to_slack[i]` when supply exceeds demand, or an extra
    /// supply vertex reaching demand `j` at `from_slack[j]` otherwise.
    pub fn with_slack(
        supplies: Vec<u64>,
        demands: Vec<u64>,
        costs: Vec<u64>,
        to_slack: &[u64],
        from_slack: &[u64],
    ) -> Result<Self> {
        let (rows, cols) = (supplies.len(), demands.len());
        if costs.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                found: costs.len(),
            });
        }
        if to_slack.len() != rows || from_slack.len() != cols {
            return Err(Error::ShapeMismatch {
                expected: rows + cols,
                found: to_slack.len() + from_slack.len(),
            });
        }
        let supply: u64 = supplies.iter().sum();
        let demand: u64 = demands.iter().sum();
        if supply > demand {
            let mut widened = Vec::with_capacity(rows * (cols + 1));
            for (i, &slack_cost) in to_slack.iter().enumerate() {
                widened.extend_from_slice(&costs[i * cols..(i + 1) * cols]);
                widened.push(slack_cost);
            }
            let mut demands = demands;
            demands.push(supply - demand);
            Self::new(supplies, demands, widened)
        } else if demand > supply {
            let mut costs = costs;
            costs.extend_from_slice(from_slack);
            let mut supplies = supplies;
            supplies.push(demand - supply);
            Self::new(supplies, demands, costs)
        } else {
            Self::new(supplies, demands, costs)
        }
    }

    pub fn supplies(&self) -> &[u64] {
        &self.supplies
    }

    pub fn demands(&self) -> &[u64] {
        &self.demands
    }

    pub fn cost(&self, source: usize, sink: usize) -> u64 {
        self.costs[source * self.demands.len() + sink]
    }

    pub fn total_supply(&self) -> u64 {
        self.supplies.iter().sum()
    }
}

/// An optimal integral transport plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransportPlan {
    /// `(source, sink, amount)` triples with positive amounts, sorted.
    pub flows: Vec<(usize, usize, u64)>,
    pub total_cost: u128,
}

impl TransportPlan {
    pub fn outflow(&self, source: usize) -> u64 {
        self.flows
            .iter()
            .filter(|(s, _, _)| *s == source)
            .map(|(_, _, f)| f)
            .sum()
    }

    pub fn inflow(&self, sink: usize) -> u64 {
        self.flows
            .iter()
            .filter(|(_, t, _)| *t == sink)
            .map(|(_, _, f)| f)
            .sum()
    }
}

struct Edge {
    to: usize,
    cap: u64,
    cost: i64,
}

struct Residual {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl Residual {
    fn with_nodes(n: usize) -> Self {
        Residual {
            edges: Vec::new(),
            adjacency: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    /// Adds `from -> to` and its reverse twin at index `id ^ 1`.
    fn link(&mut self, from: usize, to: usize, cap: u64, cost: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        id
    }
}

/// Solves `net` to optimality.
pub fn min_cost_flow(net: &FlowNetwork) -> Result<TransportPlan> {
    let (rows, cols) = (net.supplies.len(), net.demands.len());
    let total = net.total_supply();
    if total == 0 {
        return Ok(TransportPlan::default());
    }
    let source = 0;
    let sink = rows + cols + 1;
    let n = sink + 1;
    let mut graph = Residual::with_nodes(n);

    for (i, &s) in net.supplies.iter().enumerate() {
        if s > 0 {
            graph.link(source, 1 + i, s, 0);
        }
    }
    let mut transport = Vec::with_capacity(rows * cols);
    for (i, &s) in net.supplies.iter().enumerate() {
        for (j, &d) in net.demands.iter().enumerate() {
            if s > 0 && d > 0 {
                let cost = i64::try_from(net.cost(i, j)).map_err(|_| Error::Infeasible)?;
                let id = graph.link(1 + i, 1 + rows + j, u64::MAX, cost);
                transport.push((i, j, id));
            }
        }
    }
    for (j, &d) in net.demands.iter().enumerate() {
        if d > 0 {
            graph.link(1 + rows + j, sink, d, 0);
        }
    }

    // Costs are non-negative, so zero potentials are feasible to start.
    let mut potential = vec![0i64; n];
    let mut dist = vec![i64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut routed = 0u64;
    while routed < total {
        dist.fill(i64::MAX);
        parent.fill(usize::MAX);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &graph.adjacency[u] {
                let edge = &graph.edges[e];
                if edge.cap == 0 {
                    continue;
                }
                let reduced = edge.cost + potential[u] - potential[edge.to];
                let candidate = d + reduced;
                if candidate < dist[edge.to] {
                    dist[edge.to] = candidate;
                    parent[edge.to] = e;
                    heap.push(Reverse((candidate, edge.to)));
                }
            }
        }
        if dist[sink] == i64::MAX {
            return Err(Error::Infeasible);
        }
        for (p, &d) in potential.iter_mut().zip(&dist) {
            if d != i64::MAX {
                *p += d;
            }
        }

        let mut bottleneck = total - routed;
        let mut v = sink;
        while v != source {
            let e = parent[v];
            bottleneck = bottleneck.min(graph.edges[e].cap);
            v = graph.edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = parent[v];
            graph.edges[e].cap -= bottleneck;
            graph.edges[e ^ 1].cap += bottleneck;
            v = graph.edges[e ^ 1].to;
        }
        routed += bottleneck;
    }

    let mut plan = TransportPlan::default();
    for (i, j, id) in transport {
        let amount = graph.edges[id ^ 1].cap;
        if amount > 0 {
            plan.total_cost += u128::from(amount) * u128::from(net.cost(i, j));
            plan.flows.push((i, j, amount));
        }
    }
    Ok(plan)
}
