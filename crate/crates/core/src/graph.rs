//! Comparison graphs, generators and divide-and-conquer partitions.
//!
//! Nodes are indexed `0..n`. Edges are stored once with `i < j` together with
//! the number of comparisons `count` collected on them. 2D grids flatten the
//! coordinate `(i1, i2)` to `i1 * side + i2`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// Number of comparisons collected on this edge (`L_ij`).
    pub count: u64,
}

/// Undirected measurement graph with per-edge sample counts.
#[derive(Debug, Clone)]
pub struct ComparisonGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
    connected: bool,
}

impl ComparisonGraph {
    /// Checked constructor. Endpoints are reordered so that `i < j` and the
    /// edge list is sorted lexicographically.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, u64)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b, count) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if count == 0 {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) has zero samples"
                )));
            }
            list.push(Edge {
                i: a.min(b),
                j: a.max(b),
                count,
            });
        }
        list.sort_by_key(|e| (e.i, e.j));
        let mut index = HashMap::with_capacity(list.len());
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            if index.insert((e.i, e.j), k).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate edge ({}, {})",
                    e.i, e.j
                )));
            }
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
        }
        let connected = is_connected(n, list.iter().map(|e| (e.i, e.j)));
        Ok(Self {
            n,
            edges: list,
            adjacency,
            index,
            connected,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `i` as `(neighbour, edge index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// `L_total`, the total number of comparisons.
    pub fn total_samples(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }

    /// Subgraph induced by `nodes`: returns the local graph (nodes relabelled
    /// `0..nodes.len()` in the given order) and the global indices of the
    /// retained edges.
    pub fn induced(&self, nodes: &[usize]) -> Result<(ComparisonGraph, Vec<usize>)> {
        let mut local = HashMap::with_capacity(nodes.len());
        for (k, &v) in nodes.iter().enumerate() {
            local.insert(v, k);
        }
        let mut kept = Vec::new();
        let mut edges = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if let (Some(&a), Some(&b)) = (local.get(&e.i), local.get(&e.j)) {
                kept.push(k);
                edges.push((a, b, e.count));
            }
        }
        let sub = ComparisonGraph::new(nodes.len(), edges)?;
        // `new` sorts by local labels; re-align `kept` with that order.
        let kept = sub
            .edges()
            .iter()
            .map(|e| {
                self.edge_index(nodes[e.i], nodes[e.j])
                    .expect("induced edge exists in parent")
            })
            .collect();
        Ok((sub, kept))
    }
}

pub(crate) fn is_connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    if n == 0 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Grid1D,
    Grid2D,
}

/// `Grid1D(n, r, p)` / `Grid2D(n, r, p)`: nodes within distance `r`
/// (absolute difference in 1D, Manhattan distance in 2D) are compared with
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
    pub r: usize,
    pub p: f64,
}

impl GridSpec {
    pub fn new(kind: GridKind, n: usize, r: usize, p: f64) -> Result<Self> {
        let spec = Self { kind, n, r, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid1d(n: usize, r: usize, p: f64) -> Result<Self> {
        Self::new(GridKind::Grid1D, n, r, p)
    }

    pub fn grid2d(n: usize, r: usize, p: f64) -> Result<Self> {
        Self::new(GridKind::Grid2D, n, r, p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("n = {} < 2", self.n)));
        }
        if self.r == 0 {
            return Err(Error::InvalidSpec("radius must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidSpec(format!("p = {} not in (0, 1]", self.p)));
        }
        if self.kind == GridKind::Grid2D && exact_sqrt(self.n).is_none() {
            return Err(Error::InvalidSpec(format!(
                "Grid2D needs a perfect-square n, got {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Side length: `n` for 1D grids, `sqrt(n)` for 2D grids.
    pub fn side(&self) -> usize {
        match self.kind {
            GridKind::Grid1D => self.n,
            GridKind::Grid2D => exact_sqrt(self.n).unwrap_or(0),
        }
    }
}

pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}

/// How many comparisons each generated edge receives.
pub enum SamplePolicy {
    Constant(u64),
    PerEdge(Box<dyn Fn(usize, usize) -> u64 + Send + Sync>),
}

impl SamplePolicy {
    fn count(&self, i: usize, j: usize) -> u64 {
        match self {
            SamplePolicy::Constant(l) => *l,
            SamplePolicy::PerEdge(f) => f(i, j),
        }
    }
}

impl fmt::Debug for SamplePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplePolicy::Constant(l) => write!(f, "Constant({l})"),
            SamplePolicy::PerEdge(_) => f.write_str("PerEdge(..)"),
        }
    }
}

fn keep(p: f64, rng: &mut Rng) -> bool {
    p >= 1.0 || rng.random::<f64>() < p
}

/// Samples a grid graph. With `p = 1` no randomness is consumed.
pub fn generate_grid(spec: &GridSpec, policy: &SamplePolicy, rng: &mut Rng) -> Result<ComparisonGraph> {
    spec.validate()?;
    let mut edges = Vec::new();
    match spec.kind {
        GridKind::Grid1D => {
            for i in 0..spec.n {
                for j in (i + 1)..spec.n.min(i + spec.r + 1) {
                    if keep(spec.p, rng) {
                        edges.push((i, j, policy.count(i, j)));
                    }
                }
            }
        }
        GridKind::Grid2D => {
            let side = spec.side() as isize;
            let r = spec.r as isize;
            for a1 in 0..side {
                for a2 in 0..side {
                    let a = (a1 * side + a2) as usize;
                    // Visit each unordered pair once: later rows, or same row and later column.
                    for d1 in 0..=r {
                        let rem = r - d1;
                        let lo = if d1 == 0 { 1 } else { -rem };
                        for d2 in lo..=rem {
                            let (b1, b2) = (a1 + d1, a2 + d2);
                            if b1 >= side || b2 < 0 || b2 >= side {
                                continue;
                            }
                            if keep(spec.p, rng) {
                                let b = (b1 * side + b2) as usize;
                                edges.push((a, b, policy.count(a.min(b), a.max(b))));
                            }
                        }
                    }
                }
            }
        }
    }
    ComparisonGraph::new(spec.n, edges)
}

/// Named topologies used as test beds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpecialGraph {
    /// Erdos-Renyi `G(n, p)`.
    Er { n: usize, p: f64 },
    Line { n: usize },
    Ring { n: usize },
    Complete { n: usize },
    /// Two cliques joined by a single bridge edge carrying `bridge_count` samples.
    Barbell {
        left: usize,
        right: usize,
        bridge_count: u64,
    },
    /// Uniformly random labelled tree.
    Tree { n: usize },
}

/// Builds one of the special topologies. An Erdos-Renyi draw may be
/// disconnected; check [`ComparisonGraph::is_connected`].
pub fn generate_special(kind: &SpecialGraph, policy: &SamplePolicy, rng: &mut Rng) -> Result<ComparisonGraph> {
    let mut edges = Vec::new();
    let n = match *kind {
        SpecialGraph::Er { n, p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("p = {p} not in [0, 1]")));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if p >= 1.0 || rng.random::<f64>() < p {
                        edges.push((i, j, policy.count(i, j)));
                    }
                }
            }
            n
        }
        SpecialGraph::Line { n } => {
            edges.extend((1..n).map(|i| (i - 1, i, policy.count(i - 1, i))));
            n
        }
        SpecialGraph::Ring { n } => {
            if n < 3 {
                return Err(Error::InvalidInput(format!("ring needs n >= 3, got {n}")));
            }
            edges.extend((1..n).map(|i| (i - 1, i, policy.count(i - 1, i))));
            edges.push((0, n - 1, policy.count(0, n - 1)));
            n
        }
        SpecialGraph::Complete { n } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    edges.push((i, j, policy.count(i, j)));
                }
            }
            n
        }
        SpecialGraph::Barbell {
            left,
            right,
            bridge_count,
        } => {
            if left == 0 || right == 0 || bridge_count == 0 {
                return Err(Error::InvalidInput(
                    "barbell needs non-empty cliques and a positive bridge count".into(),
                ));
            }
            for (lo, hi) in [(0, left), (left, left + right)] {
                for i in lo..hi {
                    for j in (i + 1)..hi {
                        edges.push((i, j, policy.count(i, j)));
                    }
                }
            }
            edges.push((left - 1, left, bridge_count));
            left + right
        }
        SpecialGraph::Tree { n } => {
            for (a, b) in random_tree(n, rng) {
                edges.push((a, b, policy.count(a.min(b), a.max(b))));
            }
            n
        }
    };
    ComparisonGraph::new(n, edges)
}

/// Decodes a uniformly random Pruefer sequence.
fn random_tree(n: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = *leaves.iter().next().expect("a Pruefer decode always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Shuffles node labels; handy for relabelling-invariance tests.
pub fn relabel(graph: &ComparisonGraph, permutation: &[usize]) -> Result<ComparisonGraph> {
    ComparisonGraph::new(
        graph.n(),
        graph
            .edges()
            .iter()
            .map(|e| (permutation[e.i], permutation[e.j], e.count)),
    )
}

pub fn random_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Overlapping,
    Disjoint,
}

/// Node subsets `V_(0), .., V_(m-1)` covering `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    subsets: Vec<Vec<usize>>,
    mode: PartitionMode,
    n: usize,
    max_membership: usize,
}

impl Partition {
    pub fn new(n: usize, subsets: Vec<Vec<usize>>, mode: PartitionMode) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::InvalidInput("partition has no subsets".into()));
        }
        let mut membership = vec![0usize; n];
        let mut sorted = Vec::with_capacity(subsets.len());
        for (a, mut s) in subsets.into_iter().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidInput(format!("subset {a} is empty")));
            }
            for &v in &s {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "subset {a} contains node {v} >= n = {n}"
                    )));
                }
                membership[v] += 1;
            }
            sorted.push(s);
        }
        if let Some(v) = membership.iter().position(|&c| c == 0) {
            return Err(Error::InvalidInput(format!("node {v} is in no subset")));
        }
        let max_membership = membership.iter().copied().max().unwrap_or(0);
        if mode == PartitionMode::Disjoint && max_membership > 1 {
            return Err(Error::InvalidInput(
                "disjoint partition has overlapping subsets".into(),
            ));
        }
        Ok(Self {
            subsets: sorted,
            mode,
            n,
            max_membership,
        })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest membership count `max_i s_i`.
    pub fn max_membership(&self) -> usize {
        self.max_membership
    }

    /// For each node, the subsets containing it.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.n];
        for (a, s) in self.subsets.iter().enumerate() {
            for &v in s {
                m[v].push(a);
            }
        }
        m
    }
}

/// What a super-edge carries.
#[derive(Debug, Clone, PartialEq)]
pub enum SuperEdgePayload {
    /// Shared nodes `V_(a) ∩ V_(b)`.
    Overlap(Vec<usize>),
    /// Indices into the graph's edge list of edges between `V_(a)` and `V_(b)`.
    Cross(Vec<usize>),
}

impl SuperEdgePayload {
    pub fn len(&self) -> usize {
        match self {
            SuperEdgePayload::Overlap(v) | SuperEdgePayload::Cross(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperEdge {
    pub a: usize,
    pub b: usize,
    pub payload: SuperEdgePayload,
}

/// Graph on the subsets of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperGraph {
    m: usize,
    edges: Vec<SuperEdge>,
    connected: bool,
}

impl SuperGraph {
    /// `(a, b)` is a super-edge iff `V_(a) ∩ V_(b)` is non-empty.
    pub fn from_overlaps(partition: &Partition) -> Self {
        let m = partition.len();
        let memberships = partition.memberships();
        let mut shared: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
        for (v, subs) in memberships.iter().enumerate() {
            for (x, &a) in subs.iter().enumerate() {
                for &b in &subs[x + 1..] {
                    shared.entry((a.min(b), a.max(b))).or_default().push(v);
                }
            }
        }
        let edges: Vec<SuperEdge> = shared
            .into_iter()
            .map(|((a, b), nodes)| SuperEdge {
                a,
                b,
                payload: SuperEdgePayload::Overlap(nodes),
            })
            .collect();
        let connected = is_connected(m, edges.iter().map(|e| (e.a, e.b)));
        Self { m, edges, connected }
    }

    /// `(a, b)` is a super-edge iff some graph edge joins `V_(a)` and `V_(b)`.
    /// Meant for disjoint partitions; with overlaps, each node's first subset
    /// is used as its owner.
    pub fn from_cross_edges(partition: &Partition, graph: &ComparisonGraph) -> Self {
        let m = partition.len();
        let owner: Vec<usize> = partition.memberships().iter().map(|s| s[0]).collect();
        let mut cross: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
        for (k, e) in graph.edges().iter().enumerate() {
            let (a, b) = (owner[e.i], owner[e.j]);
            if a != b {
                cross.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        let edges: Vec<SuperEdge> = cross
            .into_iter()
            .map(|((a, b), list)| SuperEdge {
                a,
                b,
                payload: SuperEdgePayload::Cross(list),
            })
            .collect();
        let connected = is_connected(m, edges.iter().map(|e| (e.a, e.b)));
        Self { m, edges, connected }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[SuperEdge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }
}

/// Windows over `0..len`: width `2r` with stride `r` (overlapping) or stride
/// `2r` (disjoint). The last window absorbs the tail.
pub fn grid_windows(len: usize, r: usize, mode: PartitionMode) -> Vec<Range<usize>> {
    let (width, stride) = match mode {
        PartitionMode::Overlapping => (2 * r, r),
        PartitionMode::Disjoint => (2 * r, 2 * r),
    };
    let m = if len < width {
        1
    } else {
        ((len - width) / stride + 1).max(1)
    };
    (0..m)
        .map(|a| {
            let start = a * stride;
            let end = if a + 1 == m { len } else { start + width };
            start..end
        })
        .collect()
}

/// Partition of a grid graph into windows (1D) or blocks (2D), together
/// with its super-graph.
pub fn partition_grid(
    graph: &ComparisonGraph,
    spec: &GridSpec,
    mode: PartitionMode,
) -> Result<(Partition, SuperGraph)> {
    spec.validate()?;
    if graph.n() != spec.n {
        return Err(Error::InvalidInput(format!(
            "graph has {} nodes but spec has n = {}",
            graph.n(),
            spec.n
        )));
    }
    let subsets: Vec<Vec<usize>> = match spec.kind {
        GridKind::Grid1D => grid_windows(spec.n, spec.r, mode)
            .into_iter()
            .map(|w| w.collect())
            .collect(),
        GridKind::Grid2D => {
            let side = spec.side();
            let windows = grid_windows(side, spec.r, mode);
            let mut blocks = Vec::with_capacity(windows.len() * windows.len());
            for rows in &windows {
                for cols in &windows {
                    let mut block = Vec::with_capacity(rows.len() * cols.len());
                    for i1 in rows.clone() {
                        for i2 in cols.clone() {
                            block.push(i1 * side + i2);
                        }
                    }
                    blocks.push(block);
                }
            }
            blocks
        }
    };
    let partition = Partition::new(spec.n, subsets, mode)?;
    let supergraph = match mode {
        PartitionMode::Overlapping => SuperGraph::from_overlaps(&partition),
        PartitionMode::Disjoint => SuperGraph::from_cross_edges(&partition, graph),
    };
    Ok((partition, supergraph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn one() -> SamplePolicy {
        SamplePolicy::Constant(1)
    }

    #[test]
    fn grid1d_edge_counts() {
        let g = generate_grid(&GridSpec::grid1d(7, 3, 1.0).unwrap(), &one(), &mut seeded(0)).unwrap();
        // pairs with |i - j| <= 3 among 7 nodes: 6 + 5 + 4
        assert_eq!(g.num_edges(), 15);
        let line = generate_grid(&GridSpec::grid1d(5, 1, 1.0).unwrap(), &one(), &mut seeded(0)).unwrap();
        let pairs: Vec<_> = line.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn grid2d_lattice() {
        let g = generate_grid(&GridSpec::grid2d(25, 1, 1.0).unwrap(), &one(), &mut seeded(0)).unwrap();
        assert_eq!(g.num_edges(), 40);
        assert!(g.edge_index(0, 1).is_some());
        assert!(g.edge_index(0, 5).is_some());
        assert!(g.edge_index(0, 6).is_none());
        assert!(g.edge_index(4, 5).is_none(), "row wrap-around must not be an edge");
    }

    #[test]
    fn grid2d_manhattan_radius() {
        // brute force: count pairs within Manhattan distance 2 on a 4x4 grid
        let side = 4usize;
        let mut expected = 0;
        for a in 0..16usize {
            for b in (a + 1)..16 {
                let d = (a / side).abs_diff(b / side) + (a % side).abs_diff(b % side);
                if d <= 2 {
                    expected += 1;
                }
            }
        }
        let g = generate_grid(&GridSpec::grid2d(16, 2, 1.0).unwrap(), &one(), &mut seeded(0)).unwrap();
        assert_eq!(g.num_edges(), expected);
    }

    #[test]
    fn grid_rejects_bad_specs() {
        assert!(matches!(GridSpec::grid2d(24, 1, 1.0), Err(Error::InvalidSpec(_))));
        assert!(GridSpec::grid1d(10, 0, 1.0).is_err());
        assert!(GridSpec::grid1d(10, 2, 0.0).is_err());
        assert!(GridSpec::grid1d(10, 2, 1.5).is_err());
    }

    #[test]
    fn full_grid_ignores_rng() {
        let spec = GridSpec::grid1d(30, 4, 1.0).unwrap();
        let a = generate_grid(&spec, &one(), &mut seeded(1)).unwrap();
        let b = generate_grid(&spec, &one(), &mut seeded(99)).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn sparse_grid_is_seeded() {
        let spec = GridSpec::grid1d(50, 5, 0.5).unwrap();
        let a = generate_grid(&spec, &one(), &mut seeded(3)).unwrap();
        let b = generate_grid(&spec, &one(), &mut seeded(3)).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert!(a.num_edges() < 5 * 50);
    }

    #[test]
    fn per_edge_policy() {
        let policy = SamplePolicy::PerEdge(Box::new(|i, j| (i + j) as u64 + 1));
        let g = generate_grid(&GridSpec::grid1d(4, 1, 1.0).unwrap(), &policy, &mut seeded(0)).unwrap();
        let counts: Vec<u64> = g.edges().iter().map(|e| e.count).collect();
        assert_eq!(counts, vec![2, 4, 6]);
    }

    #[test]
    fn special_graphs() {
        let mut rng = seeded(5);
        let k4 = generate_special(&SpecialGraph::Complete { n: 4 }, &one(), &mut rng).unwrap();
        assert_eq!(k4.num_edges(), 6);

        let bb = generate_special(
            &SpecialGraph::Barbell { left: 3, right: 3, bridge_count: 5 },
            &one(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(bb.num_edges(), 7);
        let bridge = bb.edges()[bb.edge_index(2, 3).unwrap()];
        assert_eq!(bridge.count, 5);

        let ring = generate_special(&SpecialGraph::Ring { n: 6 }, &one(), &mut rng).unwrap();
        assert_eq!(ring.num_edges(), 6);
        assert!((0..6).all(|v| ring.degree(v) == 2));

        for n in [2, 3, 10, 40] {
            let t = generate_special(&SpecialGraph::Tree { n }, &one(), &mut rng).unwrap();
            assert_eq!(t.num_edges(), n - 1);
            assert!(t.is_connected());
        }
    }

    #[test]
    fn er_may_be_disconnected() {
        let g = generate_special(&SpecialGraph::Er { n: 30, p: 0.01 }, &one(), &mut seeded(1)).unwrap();
        assert!(!g.is_connected());
        let g = generate_special(&SpecialGraph::Er { n: 30, p: 1.0 }, &one(), &mut seeded(1)).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.num_edges(), 435);
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert!(ComparisonGraph::new(3, [(0, 0, 1)]).is_err());
        assert!(ComparisonGraph::new(3, [(0, 1, 1), (1, 0, 2)]).is_err());
        assert!(ComparisonGraph::new(3, [(0, 1, 0)]).is_err());
        assert!(ComparisonGraph::new(3, [(0, 3, 1)]).is_err());
        let g = ComparisonGraph::new(3, [(2, 1, 4)]).unwrap();
        assert_eq!(g.edges()[0], Edge { i: 1, j: 2, count: 4 });
        assert!(!g.is_connected());
    }

    #[test]
    fn windows_overlapping() {
        let w = grid_windows(40, 10, PartitionMode::Overlapping);
        assert_eq!(w, vec![0..20, 10..30, 20..40]);
        let w = grid_windows(40, 10, PartitionMode::Disjoint);
        assert_eq!(w, vec![0..20, 20..40]);
        let w = grid_windows(15, 10, PartitionMode::Overlapping);
        assert_eq!(w, vec![0..15]);
        let w = grid_windows(47, 10, PartitionMode::Overlapping);
        assert_eq!(w, vec![0..20, 10..30, 20..47]);
    }

    #[test]
    fn partition_grid1d_supergraph_is_path() {
        let spec = GridSpec::grid1d(95, 10, 1.0).unwrap();
        let g = generate_grid(&spec, &one(), &mut seeded(0)).unwrap();
        let (p, sg) = partition_grid(&g, &spec, PartitionMode::Overlapping).unwrap();
        assert!(p.subsets().iter().all(|s| s.len() >= 20));
        assert_eq!(sg.edges().len(), p.len() - 1);
        for e in sg.edges() {
            assert_eq!(e.b, e.a + 1);
            assert_eq!(e.payload.len(), 10);
        }
        assert!(sg.is_connected());
        assert!(p.max_membership() <= 2);

        let (p, sg) = partition_grid(&g, &spec, PartitionMode::Disjoint).unwrap();
        assert_eq!(p.len(), 4);
        assert!(sg.is_connected());
        assert!(sg.edges().iter().all(|e| e.b == e.a + 1 && !e.payload.is_empty()));
    }

    #[test]
    fn partition_grid2d_supergraph_is_lattice() {
        let spec = GridSpec::grid2d(144, 3, 1.0).unwrap();
        let g = generate_grid(&spec, &one(), &mut seeded(0)).unwrap();
        let (p, sg) = partition_grid(&g, &spec, PartitionMode::Overlapping).unwrap();
        // 12 / 3 - 1 = 3 windows per axis
        assert_eq!(p.len(), 9);
        for e in sg.edges() {
            let (a1, a2, b1, b2) = (e.a / 3, e.a % 3, e.b / 3, e.b % 3);
            assert!(a1.abs_diff(b1) <= 1 && a2.abs_diff(b2) <= 1);
        }
        assert!(sg.is_connected());
        assert_eq!(p.max_membership(), 4);
        let (_, sg) = partition_grid(&g, &spec, PartitionMode::Disjoint).unwrap();
        assert!(sg.is_connected());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1]], PartitionMode::Overlapping).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]], PartitionMode::Disjoint).is_err());
        let p = Partition::new(3, vec![vec![2, 1, 0]], PartitionMode::Disjoint).unwrap();
        assert_eq!(p.subsets()[0], vec![0, 1, 2]);
    }

    #[test]
    fn induced_subgraph_keeps_global_edge_ids() {
        let g = generate_grid(&GridSpec::grid1d(10, 2, 1.0).unwrap(), &one(), &mut seeded(0)).unwrap();
        let nodes = vec![7, 5, 6];
        let (sub, kept) = g.induced(&nodes).unwrap();
        assert_eq!(sub.num_edges(), 3);
        for (e, &k) in sub.edges().iter().zip(&kept) {
            let ge = g.edges()[k];
            let (a, b) = (nodes[e.i], nodes[e.j]);
            assert_eq!((a.min(b), a.max(b)), (ge.i, ge.j));
        }
    }
}
