//! Random k-regular graphs and the matrix-free gossip operator `L = I - A/k`.

use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::state::StateBlock;

/// Largest vertex count accepted by [`RegularGraph::dense_eigenvalues`].
pub const DENSE_EIGEN_CAP: usize = 4096;

const GENERATION_ATTEMPTS: usize = 100;

/// Immutable simple connected k-regular graph in compressed adjacency form.
///
/// Neighbor lists are sorted, so serialization and matvec order are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    k: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl RegularGraph {
    /// Samples a random simple connected k-regular graph via the pairing
    /// (configuration) model. Stubs are matched by repeated shuffles,
    /// discarding self-loops and multi-edges and re-pairing the conflicted
    /// stubs; whole samples are rejected only when a pairing gets stuck or
    /// the result is disconnected. Deterministic for a fixed seed.
    pub fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_params(n, k)?;
        for attempt in 0..GENERATION_ATTEMPTS {
            let sub_seed = splitmix64(seed ^ (attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            if let Some(mut edges) = try_pairing(n, k, &mut rng) {
                edges.sort_unstable();
                let graph = Self::from_sorted_edges(n, k, &edges)?;
                if graph.is_connected() {
                    return Ok(graph);
                }
            }
        }
        Err(Error::GenerationFailed {
            n,
            k,
            attempts: GENERATION_ATTEMPTS,
        })
    }

    /// Builds a graph from a deduplicated, lexicographically sorted list of
    /// `(u, v)` edges with `u < v`, validating degrees.
    fn from_sorted_edges(n: usize, k: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::MalformedEdgeList(format!(
                    "edge ({u}, {v}) out of range for n={n}"
                )));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        if let Some(v) = degree.iter().position(|&d| d != k) {
            return Err(Error::MalformedEdgeList(format!(
                "vertex {v} has degree {}, expected {k}",
                degree[v]
            )));
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + k;
        }
        let mut neighbors = vec![0u32; n * k];
        let mut fill = vec![0usize; n];
        for &(u, v) in edges {
            neighbors[offsets[u as usize] + fill[u as usize]] = v;
            neighbors[offsets[v as usize] + fill[v as usize]] = u;
            fill[u as usize] += 1;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Self {
            n,
            k,
            offsets,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.k / 2
    }

    /// Undirected edges as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == self.n
    }

    /// Dense form of the gossip matrix `L = I - A/k`.
    pub fn dense_gossip_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.n, self.n);
        let w = -1.0 / self.k as f64;
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                m[(u, v as usize)] = w;
            }
        }
        m
    }

    /// Eigenvalues of `L = I - A/k` in ascending order, via a dense symmetric
    /// eigendecomposition. Small-instance oracle; capped at
    /// [`DENSE_EIGEN_CAP`] vertices.
    pub fn dense_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.n > DENSE_EIGEN_CAP {
            return Err(Error::DenseCapExceeded {
                n: self.n,
                cap: DENSE_EIGEN_CAP,
            });
        }
        let eig = self.dense_gossip_matrix().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }

    /// Edge-list format: first line `n k`, then one `u v` line per undirected
    /// edge with `u < v`, sorted lexicographically.
    pub fn edge_list_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.n, self.k));
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Writes [`Self::edge_list_string`] atomically (temp file + rename).
    pub fn write_edge_list<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        crate::csvio::atomic_write(path, &self.edge_list_string())
    }

    pub fn read_edge_list<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedEdgeList("empty file".into()))??;
        let mut it = header.split_whitespace();
        let n: usize = parse_field(it.next(), "n")?;
        let k: usize = parse_field(it.next(), "k")?;
        check_params(n, k)?;
        let mut edges = Vec::with_capacity(n * k / 2);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: u32 = parse_field(it.next(), "u")?;
            let v: u32 = parse_field(it.next(), "v")?;
            if u >= v {
                return Err(Error::MalformedEdgeList(format!(
                    "edge ({u}, {v}) not in u < v order"
                )));
            }
            edges.push((u, v));
        }
        if edges.len() != n * k / 2 {
            return Err(Error::MalformedEdgeList(format!(
                "expected {} edges, found {}",
                n * k / 2,
                edges.len()
            )));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedEdgeList("duplicate edge".into()));
        }
        let graph = Self::from_sorted_edges(n, k, &edges)?;
        if !graph.is_connected() {
            return Err(Error::MalformedEdgeList("graph is not connected".into()));
        }
        Ok(graph)
    }
}

/// One pairing attempt. Returns `None` when no simple completion of the
/// remaining stubs exists (or progress stalls), signaling a restart.
fn try_pairing(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(u32, u32)>> {
    let mut present = std::collections::HashSet::with_capacity(n * k / 2);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n * k / 2);
    let mut stubs: Vec<u32> = Vec::with_capacity(n * k);
    for v in 0..n as u32 {
        stubs.extend(std::iter::repeat(v).take(k));
    }
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover: Vec<u32> = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && present.insert((u, v)) {
                edges.push((u, v));
            } else {
                leftover.push(u);
                leftover.push(v);
            }
        }
        if leftover.len() == stubs.len() {
            // No pair was accepted this round: either every remaining pair
            // conflicts (unsalvageable) or the shuffle was unlucky; a cheap
            // suitability scan distinguishes the two.
            let mut nodes: Vec<u32> = leftover.clone();
            nodes.sort_unstable();
            nodes.dedup();
            let salvageable = nodes.iter().enumerate().any(|(i, &u)| {
                nodes[i + 1..].iter().any(|&v| !present.contains(&(u, v)))
            });
            if !salvageable {
                return None;
            }
        }
        stubs = leftover;
    }
    Some(edges)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::MalformedEdgeList(format!("missing field `{name}`")))?
        .parse()
        .map_err(|_| Error::MalformedEdgeList(format!("unparsable field `{name}`")))
}

fn check_params(n: usize, k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k={k} must be >= 3")));
    }
    if n <= k {
        return Err(Error::InvalidParameter(format!(
            "n={n} must exceed k={k}"
        )));
    }
    if n * k % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n*k = {} is odd; no k-regular graph exists",
            n * k
        )));
    }
    Ok(())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Matrix-free application of `L = I - A/k`; realizes `L ⊗ I_d` by acting on
/// each column of a [`StateBlock`].
#[derive(Debug, Clone, Copy)]
pub struct GossipOperator<'a> {
    graph: &'a RegularGraph,
}

impl<'a> GossipOperator<'a> {
    pub fn new(graph: &'a RegularGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &RegularGraph {
        self.graph
    }

    /// `y_i = x_i - (1/k) * sum_{j in N(i)} x_j`. The input is unmodified.
    pub fn apply(&self, x: &StateBlock) -> Result<StateBlock> {
        if x.n() != self.graph.n {
            return Err(Error::DimensionMismatch(format!(
                "state has {} rows, graph has {} vertices",
                x.n(),
                self.graph.n
            )));
        }
        let d = x.d();
        let inv_k = 1.0 / self.graph.k as f64;
        let mut y = StateBlock::zeros(x.n(), d);
        for i in 0..self.graph.n {
            let mut acc = vec![0.0f64; d];
            for &j in self.graph.neighbors(i) {
                let row = x.row(j as usize);
                for (a, &b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
            }
            let xi = x.row(i);
            let yi = y.row_mut(i);
            for c in 0..d {
                yi[c] = xi[c] - inv_k * acc[c];
            }
        }
        Ok(y)
    }
}
