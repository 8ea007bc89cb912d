//! Three distribution-equivalent ways to generate the edge-counting process.

use rand::Rng;

use super::nhg::{NegHypergeometric, NhgMethod};
use super::types::{EdgeEvent, ModelParams, PoolState, SeedSpec, Trajectory, UrnState, WeakComposition};
use crate::error::{Error, Result};
use crate::numeric::binom2;

/// Largest `C(N,2)` the event-level sampler will hold in memory.
pub const DEFAULT_EDGE_CAP: u64 = 50_000_000;

/// Event-level simulation: keeps the explicit pool of virtual vertices and
/// edges and occupies a uniformly chosen element at every step.
pub fn simulate_pool(params: &ModelParams, seed: SeedSpec, track_edges: bool) -> Result<Trajectory> {
    simulate_pool_capped(params, seed, track_edges, DEFAULT_EDGE_CAP)
}

pub fn simulate_pool_capped(
    params: &ModelParams,
    seed: SeedSpec,
    track_edges: bool,
    edge_cap: u64,
) -> Result<Trajectory> {
    let total_edges = params.total_edges();
    if total_edges > edge_cap {
        return Err(Error::CapExceeded { what: "C(N,2)", value: total_edges, cap: edge_cap });
    }
    let n_max = params.vertices();
    let mut rng = seed.rng();
    let mut state = PoolState::new(*params, track_edges);
    // virtual edges as (origin, target); order is irrelevant, removal is swap_remove
    let mut virtual_edges: Vec<(u32, u32)> = Vec::new();
    let mut events = Vec::new();
    let mut x = Vec::with_capacity(n_max as usize);
    x.push(0);
    // event 1 always occupies the first vertex
    let mut event: u64 = 1;

    while state.pool_size() > 0 {
        debug_assert_eq!(state.virtual_edges(), virtual_edges.len() as u64);
        let draw = rng.random_range(0..state.pool_size());
        event += 1;
        if draw < state.virtual_vertices() {
            state.n += 1;
            x.push(state.k);
            let j = state.n as u32;
            virtual_edges.extend((1..j).map(|i| (i, j)));
            if let Some(flags) = state.edge_flags.as_mut() {
                flags.resize(binom2(state.n) as usize, false);
            }
        } else {
            let (i, j) = virtual_edges.swap_remove((draw - state.virtual_vertices()) as usize);
            state.k += 1;
            if let Some(flags) = state.edge_flags.as_mut() {
                flags[PoolState::edge_index(i as u64, j as u64)] = true;
                events.push(EdgeEvent { origin: i, target: j, hour: state.n as u32, event });
            }
        }
    }
    debug_assert!(state.check().is_ok());

    let mut traj = Trajectory::from_counts(*params, x);
    if track_edges {
        traj.edge_times = Some(events);
    }
    Ok(traj)
}

/// Simulates only the Markov chain `(X_n)`: each increment is a negative
/// hypergeometric draw from the urn at that hour.
pub fn simulate_urn(params: &ModelParams, seed: SeedSpec) -> Trajectory {
    simulate_urn_with(params, seed, NhgMethod::Sequential)
}

pub fn simulate_urn_with(params: &ModelParams, seed: SeedSpec, method: NhgMethod) -> Trajectory {
    let x = simulate_urn_until(params, seed, params.vertices(), method);
    Trajectory::from_counts(*params, x)
}

/// `X_1, ..., X_last` from a chain truncated at hour `last` (clamped to `N`).
/// The first `last` values coincide with the full chain for the same seed.
pub fn simulate_urn_until(params: &ModelParams, seed: SeedSpec, last: u64, method: NhgMethod) -> Vec<u64> {
    let last = last.min(params.vertices());
    let mut rng = seed.rng();
    let mut x = Vec::with_capacity(last as usize);
    if last == 0 {
        return x;
    }
    x.push(0);
    let mut k = 0;
    for n in 1..last {
        k += draw_increment(params, n, k, &mut rng, method);
        x.push(k);
    }
    x
}

fn draw_increment<R: Rng + ?Sized>(params: &ModelParams, n: u64, k: u64, rng: &mut R, method: NhgMethod) -> u64 {
    let urn = UrnState::at_hour(params, n, k);
    // K = N - n >= 1 for n < N
    NegHypergeometric::new(urn.total, urn.white)
        .expect("urn has a white ball before hour N")
        .sample(rng, method)
}

/// First hour `ξ_N` with `X_n > 0`, or `None` when `G_N` has no edge.
///
/// Stops at the first occupied edge, so the cost is `O(ξ_N)`. While the
/// graph is empty only the event "next draw is an edge" matters, which is
/// a single Bernoulli trial per hour.
pub fn first_edge_time(params: &ModelParams, seed: SeedSpec) -> Option<u64> {
    let n_max = params.vertices();
    let mut rng = seed.rng();
    for n in 2..n_max {
        let urn = UrnState::at_hour(params, n, 0);
        if rng.random_range(0..urn.total) >= urn.white {
            return Some(n + 1);
        }
    }
    None
}

/// Fenwick tree over gap weights, with a search for the gap holding a
/// given slot.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn with_weights(weights: &[u64]) -> Self {
        let mut tree = vec![0; weights.len() + 1];
        for (idx, &w) in weights.iter().enumerate() {
            let mut i = idx + 1;
            while i < tree.len() {
                tree[i] += w;
                i += i & i.wrapping_neg();
            }
        }
        Self { tree }
    }

    fn add(&mut self, idx: usize, delta: u64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of weights `0..idx`.
    fn prefix(&self, idx: usize) -> u64 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// Insertion construction: `N` white balls in a row; in hour `n` the `n - 2`
/// edges born with vertex `n - 1` are inserted one by one as black balls,
/// each uniformly among the slots right of white ball `n - 1`. The `N - 1`
/// edges born with vertex `N` all land after the last white ball. Part `p`
/// (0-based) of the result is distributed as `ΔX_{p+1}`.
pub fn simulate_insertion(params: &ModelParams, seed: SeedSpec) -> WeakComposition {
    let n_max = params.vertices() as usize;
    let mut rng = seed.rng();
    let mut parts = vec![0u64; n_max + 1];
    // a gap holding b black balls offers b + 1 slots
    let mut slots = Fenwick::with_weights(&vec![1; n_max + 1]);
    for hour in 3..=n_max {
        let left_gap = hour - 1;
        let before = slots.prefix(left_gap);
        for _ in 0..hour - 2 {
            let available = slots.prefix(n_max + 1) - before;
            let slot = before + rng.random_range(0..available);
            let gap = slots.find(slot);
            parts[gap] += 1;
            slots.add(gap, 1);
        }
    }
    parts[n_max] += (n_max - 1) as u64;
    WeakComposition { parts }
}
