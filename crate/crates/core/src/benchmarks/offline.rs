//! Offline optimum for instances where no unit ever returns: a maximum-weight
//! b-matching, solved as min-cost flow by successive shortest paths.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::Instance;

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct Flow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Flow {
    fn new(n: usize) -> Self {
        Flow {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    /// Shortest path by SPFA; residual graphs here have no negative cycles.
    fn shortest(&self, s: usize, t: usize) -> Option<(f64, Vec<usize>)> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::from([s]);
        dist[s] = 0.0;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - 1e-12 {
                    dist[edge.to] = dist[u] + edge.cost;
                    via[edge.to] = e;
                    if !queued[edge.to] {
                        queued[edge.to] = true;
                        queue.push_back(edge.to);
                    }
                }
            }
        }
        if dist[t].is_infinite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let e = via[v];
            path.push(e);
            v = self.edges[e ^ 1].to;
        }
        Some((dist[t], path))
    }
}

/// Maximum total reward when each arrival takes at most one neighboring
/// resource and resource `i` serves at most `c_i` arrivals. This is the
/// clairvoyant optimum when every usage law is non-reusable.
pub fn offline_bmatching(instance: &Instance) -> Result<f64> {
    if !instance.is_non_reusable() {
        return Err(Error::Argument(
            "offline b-matching needs every resource to be non-reusable".into(),
        ));
    }
    let t_count = instance.num_arrivals();
    let n = instance.resources().len();
    let (source, sink) = (t_count + n, t_count + n + 1);
    let mut flow = Flow::new(t_count + n + 2);
    for (t, arrival) in instance.arrivals().iter().enumerate() {
        flow.add(source, t, 1, 0.0);
        for &i in arrival.edges() {
            let r = instance.resources()[i].reward;
            if r > 0.0 {
                flow.add(t, t_count + i, 1, -r);
            }
        }
    }
    for (i, r) in instance.resources().iter().enumerate() {
        flow.add(t_count + i, sink, r.capacity as i64, 0.0);
    }
    let mut total = 0.0;
    while let Some((cost, path)) = flow.shortest(source, sink) {
        if cost >= -1e-12 {
            break;
        }
        for &e in &path {
            flow.edges[e].cap -= 1;
            flow.edges[e ^ 1].cap += 1;
        }
        total -= cost;
    }
    Ok(total)
}
