//! Routing in the local model: a path from `x` to `y` is sought while only
//! querying edges incident to vertices already reached. Every distinct edge
//! query is counted once and logged so locality can be audited afterwards.

use std::collections::HashMap;

use thiserror::Error;

use crate::hypercube::{EdgeId, VertexId};
use crate::percolation::PercolationSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Grown from `x`.
    Source,
    /// Grown from `y`.
    Target,
}

impl Side {
    fn index(self) -> usize {
        match self {
            Side::Source => 0,
            Side::Target => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteMode {
    /// Grow balls from both endpoints, always expanding the smaller frontier.
    Bidirectional,
    /// Grow a ball from `x` only; `y` is recognised on arrival.
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteBudget {
    /// Longest path the search may discover.
    pub radius: u32,
    /// Distinct edge queries allowed.
    pub queries: u64,
}

impl RouteBudget {
    pub fn unlimited() -> Self {
        RouteBudget { radius: u32::MAX, queries: u64::MAX }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RouteOutcome {
    /// Vertices from `x` to `y` inclusive; `[x]` when `x == y`.
    Found(Vec<VertexId>),
    NotFound,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RouteEvent {
    /// `vertex` joined the ball of `side`, through `via` unless it is the root.
    Reach { vertex: VertexId, side: Side, via: Option<VertexId> },
    /// First oracle call on `edge`, issued from `from` on behalf of `side`.
    Query { edge: EdgeId, from: VertexId, side: Side, open: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteTrace {
    pub outcome: RouteOutcome,
    /// Distinct edges queried.
    pub queries: u64,
    /// Vertices whose incident edges were examined.
    pub explored: u64,
    pub events: Vec<RouteEvent>,
}

impl RouteTrace {
    pub fn path(&self) -> Option<&[VertexId]> {
        match &self.outcome {
            RouteOutcome::Found(p) => Some(p),
            _ => None,
        }
    }

    /// Number of steps on the found path.
    pub fn path_length(&self) -> Option<u32> {
        self.path().map(|p| p.len() as u32 - 1)
    }
}

struct Ball {
    /// Distance from the root and predecessor.
    reached: HashMap<VertexId, (u32, Option<VertexId>)>,
    frontier: Vec<VertexId>,
    depth: u32,
}

impl Ball {
    fn new(root: VertexId) -> Self {
        Ball { reached: HashMap::from([(root, (0, None))]), frontier: vec![root], depth: 0 }
    }

    /// Walk predecessors back to the root, starting at `v`.
    fn chain(&self, mut v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        while let Some(&(_, Some(prev))) = self.reached.get(&v) {
            out.push(prev);
            v = prev;
        }
        out
    }
}

struct Oracle<'a> {
    sample: &'a PercolationSample,
    cache: HashMap<EdgeId, bool>,
    limit: u64,
    events: Vec<RouteEvent>,
}

impl Oracle<'_> {
    /// `None` when a fresh query would exceed the budget.
    fn query(&mut self, from: VertexId, coord: u32, side: Side) -> Option<bool> {
        let edge = EdgeId::at(from, coord);
        if let Some(&open) = self.cache.get(&edge) {
            return Some(open);
        }
        if self.cache.len() as u64 >= self.limit {
            return None;
        }
        let open = self.sample.edge_open(from, coord);
        self.cache.insert(edge, open);
        self.events.push(RouteEvent::Query { edge, from, side, open });
        Some(open)
    }
}

/// Search for a shortest open path from `x` to `y` in the local model.
pub fn local_route(
    sample: &PercolationSample,
    x: VertexId,
    y: VertexId,
    budget: RouteBudget,
    mode: RouteMode,
) -> RouteTrace {
    let shape = sample.shape();
    let mut oracle = Oracle { sample, cache: HashMap::new(), limit: budget.queries, events: Vec::new() };
    let mut explored = 0u64;
    let finish = |outcome, oracle: Oracle, explored| RouteTrace {
        outcome,
        queries: oracle.cache.len() as u64,
        explored,
        events: oracle.events,
    };

    if !shape.contains(x) || !shape.contains(y) || !sample.is_present(x) || !sample.is_present(y) {
        return finish(RouteOutcome::NotFound, oracle, 0);
    }
    oracle.events.push(RouteEvent::Reach { vertex: x, side: Side::Source, via: None });
    if x == y {
        return finish(RouteOutcome::Found(vec![x]), oracle, 0);
    }
    oracle.events.push(RouteEvent::Reach { vertex: y, side: Side::Target, via: None });

    let mut balls = [Ball::new(x), Ball::new(y)];
    loop {
        let side = match mode {
            RouteMode::OneSided => Side::Source,
            RouteMode::Bidirectional if balls[1].frontier.len() < balls[0].frontier.len() => Side::Target,
            RouteMode::Bidirectional => Side::Source,
        };
        if balls[side.index()].frontier.is_empty() {
            return finish(RouteOutcome::NotFound, oracle, explored);
        }
        if balls[0].depth.saturating_add(balls[1].depth) >= budget.radius {
            return finish(RouteOutcome::BudgetExhausted, oracle, explored);
        }

        let (me, other) = match side {
            Side::Source => {
                let (a, b) = balls.split_at_mut(1);
                (&mut a[0], &b[0])
            }
            Side::Target => {
                let (a, b) = balls.split_at_mut(1);
                (&mut b[0], &a[0])
            }
        };
        let frontier = std::mem::take(&mut me.frontier);
        let depth = me.depth + 1;
        // Best meeting edge (length, near end, far end) found on this level.
        let mut meet: Option<(u32, VertexId, VertexId)> = None;
        for &u in &frontier {
            explored += 1;
            for c in 0..shape.dimension() {
                let w = u.flip(c);
                if me.reached.contains_key(&w) {
                    continue;
                }
                let Some(open) = oracle.query(u, c, side) else {
                    return finish(RouteOutcome::BudgetExhausted, oracle, explored);
                };
                if !open {
                    continue;
                }
                me.reached.insert(w, (depth, Some(u)));
                me.frontier.push(w);
                oracle.events.push(RouteEvent::Reach { vertex: w, side, via: Some(u) });
                if let Some(&(dw, _)) = other.reached.get(&w) {
                    let len = depth + dw;
                    if meet.is_none_or(|(l, _, _)| len < l) {
                        meet = Some((len, u, w));
                    }
                }
            }
        }
        me.depth = depth;

        if let Some((_, _, w)) = meet {
            let (src, dst) = (&balls[0], &balls[1]);
            let mut path = src.chain(w);
            path.reverse();
            path.extend(dst.chain(w).into_iter().skip(1));
            return finish(RouteOutcome::Found(path), oracle, explored);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LocalityViolation {
    #[error("event {index}: edge {edge:?} queried from {from}, which the {side:?} ball had not reached")]
    UnreachedQuery { index: usize, edge: EdgeId, from: VertexId, side: Side },
    #[error("event {index}: edge {edge:?} queried twice")]
    RepeatedQuery { index: usize, edge: EdgeId },
    #[error("event {index}: {vertex} reached without an open queried edge")]
    UnsupportedReach { index: usize, vertex: VertexId },
    #[error("found path is not an open path between the endpoints")]
    BadPath,
}

/// Replay a trace and check that every query was issued from a vertex its
/// side had already reached, and every reach used an edge seen open.
pub fn audit_locality(trace: &RouteTrace) -> Result<(), LocalityViolation> {
    let mut reached: [std::collections::HashSet<VertexId>; 2] = Default::default();
    let mut seen: HashMap<EdgeId, bool> = HashMap::new();
    let mut count = 0u64;
    for (index, ev) in trace.events.iter().enumerate() {
        match *ev {
            RouteEvent::Reach { vertex, side, via: None } => {
                reached[side.index()].insert(vertex);
            }
            RouteEvent::Reach { vertex, side, via: Some(u) } => {
                let ok = reached[side.index()].contains(&u)
                    && EdgeId::between(u, vertex).is_some_and(|e| seen.get(&e) == Some(&true));
                if !ok {
                    return Err(LocalityViolation::UnsupportedReach { index, vertex });
                }
                reached[side.index()].insert(vertex);
            }
            RouteEvent::Query { edge, from, side, open } => {
                if !reached[side.index()].contains(&from) {
                    return Err(LocalityViolation::UnreachedQuery { index, edge, from, side });
                }
                if seen.insert(edge, open).is_some() {
                    return Err(LocalityViolation::RepeatedQuery { index, edge });
                }
                count += 1;
            }
        }
    }
    if count != trace.queries {
        return Err(LocalityViolation::BadPath);
    }
    if let Some(path) = trace.path() {
        let ends_ok = path.len() == 1
            || path.windows(2).all(|w| EdgeId::between(w[0], w[1]).is_some_and(|e| seen.get(&e) == Some(&true)));
        if !ends_ok {
            return Err(LocalityViolation::BadPath);
        }
    }
    Ok(())
}
