use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::binom2;

/// Size of the process: the number of virtual vertices in the initial pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    vertices: u64,
}

impl ModelParams {
    pub fn new(vertices: u64) -> Result<Self> {
        if vertices < 2 {
            return Err(Error::InvalidParams(format!("N must be at least 2, got {vertices}")));
        }
        if vertices > u32::MAX as u64 {
            return Err(Error::InvalidParams(format!("N = {vertices} is too large")));
        }
        Ok(Self { vertices })
    }

    /// `N`.
    pub fn vertices(&self) -> u64 {
        self.vertices
    }

    /// `C(N, 2)`, the edge count of the complete graph.
    pub fn total_edges(&self) -> u64 {
        binom2(self.vertices)
    }
}

/// Identifies one replicate's random stream.
///
/// The stream is a ChaCha8 generator keyed by `master_seed` and switched to
/// stream number `replicate_index`, so replicates can be generated in any
/// order (or in parallel) and still be bit-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        Self { master_seed, replicate_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replicate_index);
        rng
    }

    /// Seed of an independent family derived from this master seed, used
    /// when one check needs several unrelated batches of replicates.
    pub fn family(master_seed: u64, family: u64) -> u64 {
        // splitmix64 finaliser
        let mut z = master_seed ^ family.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Occupancy state of the pool between two events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    pub params: ModelParams,
    /// Occupied vertices.
    pub n: u64,
    /// Occupied edges.
    pub k: u64,
    /// Occupancy flag per edge `i <- j`, indexed by [`PoolState::edge_index`].
    pub edge_flags: Option<Vec<bool>>,
}

impl PoolState {
    pub fn new(params: ModelParams, track_edges: bool) -> Self {
        Self {
            params,
            n: 1,
            k: 0,
            edge_flags: track_edges.then(Vec::new),
        }
    }

    /// Position of edge `i <- j` (`1 <= i < j`) in the flag vector.
    pub fn edge_index(i: u64, j: u64) -> usize {
        debug_assert!(1 <= i && i < j);
        (binom2(j - 1) + (i - 1)) as usize
    }

    pub fn virtual_edges(&self) -> u64 {
        binom2(self.n) - self.k
    }

    pub fn virtual_vertices(&self) -> u64 {
        self.params.vertices() - self.n
    }

    /// `N - n + C(n,2) - k`.
    pub fn pool_size(&self) -> u64 {
        self.virtual_vertices() + self.virtual_edges()
    }

    pub fn check(&self) -> Result<()> {
        let n_max = self.params.vertices();
        if self.n < 1 || self.n > n_max || self.k > binom2(self.n) {
            return Err(Error::InvalidParams(format!(
                "pool state out of range: n = {}, k = {}",
                self.n, self.k
            )));
        }
        if let Some(flags) = &self.edge_flags {
            let set = flags.iter().filter(|&&f| f).count() as u64;
            if set != self.k || flags.len() as u64 != binom2(self.n) {
                return Err(Error::InvalidParams(format!(
                    "edge flags disagree with k: {set} set, k = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }
}

/// Occupancy record for one edge `origin <- target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub origin: u32,
    pub target: u32,
    /// Number of occupied vertices when the edge was occupied; the edge
    /// contributes to `ΔX_{hour+1}` and belongs to `G_n` for every `n > hour`.
    pub hour: u32,
    /// 1-based index of the occupancy event among all `N + C(N,2)` events.
    pub event: u64,
}

/// One realisation of the edge-counting process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    /// `x[n - 1] = X_n` for `n = 1..=N`.
    pub x: Vec<u64>,
    /// `ΔX_{N+1} = C(N,2) - X_N`.
    pub delta_last: u64,
    pub edge_times: Option<Vec<EdgeEvent>>,
}

impl Trajectory {
    pub fn from_counts(params: ModelParams, x: Vec<u64>) -> Self {
        let delta_last = params.total_edges() - x.last().copied().unwrap_or(0);
        Self { params, x, delta_last, edge_times: None }
    }

    /// `X_n`, 1-based. `X_0 = 0`.
    pub fn at(&self, n: u64) -> u64 {
        if n == 0 {
            0
        } else {
            self.x[(n - 1) as usize]
        }
    }

    /// `ΔX_n = X_n - X_{n-1}` for `n = 1..=N+1`.
    pub fn increment(&self, n: u64) -> u64 {
        let last = self.params.vertices() + 1;
        assert!((1..=last).contains(&n), "increment index {n} outside 1..={last}");
        if n == last {
            self.delta_last
        } else {
            self.at(n) - self.at(n - 1)
        }
    }

    /// `(ΔX_1, ..., ΔX_{N+1})`.
    pub fn increments(&self) -> Vec<u64> {
        (1..=self.params.vertices() + 1).map(|n| self.increment(n)).collect()
    }

    /// Checks the path invariants: `X_1 = X_2 = 0`, monotone, bounded by
    /// `C(n,2)`, and `X_N + ΔX_{N+1} = C(N,2)`.
    pub fn check(&self) -> Result<()> {
        let n_max = self.params.vertices();
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.x.len() as u64 != n_max {
            return bad(format!("trajectory has {} hours, expected {n_max}", self.x.len()));
        }
        if self.x[0] != 0 || self.x[1] != 0 {
            return bad("X_1 and X_2 must be zero".into());
        }
        for (idx, w) in self.x.windows(2).enumerate() {
            if w[1] < w[0] {
                return bad(format!("X decreases at hour {}", idx + 2));
            }
        }
        for (idx, &v) in self.x.iter().enumerate() {
            if v > binom2(idx as u64 + 1) {
                return bad(format!("X_{} = {v} exceeds C(n,2)", idx + 1));
            }
        }
        if self.x[n_max as usize - 1] + self.delta_last != self.params.total_edges() {
            return bad("X_N + ΔX_{N+1} != C(N,2)".into());
        }
        Ok(())
    }
}

/// `M` balls of which `K` are white.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnState {
    pub total: u64,
    pub white: u64,
}

impl UrnState {
    pub fn new(total: u64, white: u64) -> Result<Self> {
        if white > total {
            return Err(Error::OutOfDomain(format!("K = {white} exceeds M = {total}")));
        }
        Ok(Self { total, white })
    }

    pub fn black(&self) -> u64 {
        self.total - self.white
    }

    /// Urn seen between hours `n` and `n + 1` given `X_n = k`.
    pub fn at_hour(params: &ModelParams, n: u64, k: u64) -> Self {
        let white = params.vertices() - n;
        Self { total: white + binom2(n) - k, white }
    }
}

/// Arrangement of `M - K` black balls around `K` white delimiters, read as
/// the `K + 1` gap sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakComposition {
    pub parts: Vec<u64>,
}

impl WeakComposition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParams("a composition has at least one part".into()));
        }
        Ok(Self { parts })
    }

    /// Number of white delimiters, `K`.
    pub fn delimiters(&self) -> usize {
        self.parts.len() - 1
    }

    /// `M - K`.
    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Reads the parts as `(ΔX_1, ..., ΔX_{N+1})`.
    pub fn to_trajectory(&self, params: ModelParams) -> Result<Trajectory> {
        if self.delimiters() as u64 != params.vertices() || self.total() != params.total_edges() {
            return Err(Error::InvalidParams(format!(
                "composition with {} parts summing to {} does not describe N = {}",
                self.parts.len(),
                self.total(),
                params.vertices()
            )));
        }
        let n = params.vertices() as usize;
        let mut x = Vec::with_capacity(n);
        let mut acc = 0;
        for &p in &self.parts[..n] {
            acc += p;
            x.push(acc);
        }
        Ok(Trajectory { params, x, delta_last: self.parts[n], edge_times: None })
    }
}

/// Split of `X_n - X_m` into edges that were already virtual at hour `m`
/// (aged) and edges added to the pool after `m` (recent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgedRecentSplit {
    pub m: u64,
    pub n: u64,
    pub aged: u64,
    pub recent: u64,
}
