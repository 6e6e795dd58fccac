//! Communication topologies: random geometric graphs and a few fixed
//! shapes, plus the plain-text edge-list format.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{SeededRng, STREAM_GRAPH};

/// Undirected simple graph. Edges are stored once as `(min, max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i},{j}) out of range for n={n}")));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({i},{j})")));
            }
        }
        Ok(Graph { n, edges: set, positions: None })
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
    }

    pub fn ring(n: usize) -> Self {
        assert!(n >= 3, "ring needs at least 3 nodes");
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("ring edges are valid")
    }

    /// Star centred on node 0.
    pub fn star(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (0, i))).expect("star edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
            .expect("complete edges are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.adjacency().swap_remove(i)
    }

    /// Neighbours of `i` together with `i` itself, sorted.
    pub fn closed_neighborhood(&self, i: usize) -> Vec<usize> {
        let mut out = self.neighbors(i);
        out.push(i);
        out.sort_unstable();
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Breadth-first search from node 0.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
        reached == self.n
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        if let Some(pos) = &self.positions {
            for (i, p) in pos.iter().enumerate() {
                let _ = writeln!(out, "pos {i} {:?} {:?}", p[0], p[1]);
            }
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        let mut pos: Vec<(usize, [f64; 2])> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["n", count] if n.is_none() => {
                    n = Some(count.parse::<usize>().map_err(|_| line_err("bad node count"))?);
                }
                ["pos", i, x, y] => {
                    let i = i.parse().map_err(|_| line_err("bad node index"))?;
                    let x = x.parse().map_err(|_| line_err("bad coordinate"))?;
                    let y = y.parse().map_err(|_| line_err("bad coordinate"))?;
                    pos.push((i, [x, y]));
                }
                [i, j] if n.is_some() => {
                    let i = i.parse().map_err(|_| line_err("bad node index"))?;
                    let j = j.parse().map_err(|_| line_err("bad node index"))?;
                    edges.push((i, j));
                }
                _ => return Err(line_err("expected `n <count>`, `i j` or `pos i x y`")),
            }
        }
        let n = n.ok_or(Error::Parse { line: 1, msg: "missing `n <count>` header".into() })?;
        let mut graph = Graph::new(n, edges)?;
        if !pos.is_empty() {
            let mut positions = vec![[f64::NAN; 2]; n];
            for (i, p) in pos {
                if i >= n {
                    return Err(Error::InvalidArgument(format!("position for node {i} out of range")));
                }
                positions[i] = p;
            }
            if positions.iter().any(|p| p[0].is_nan()) {
                return Err(Error::InvalidArgument("positions given for only some nodes".into()));
            }
            graph.positions = Some(positions);
        }
        Ok(graph)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::from_edge_list(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

/// Connectivity radius `sqrt(ln n / n)`.
pub fn default_radius(n: usize) -> f64 {
    ((n as f64).ln() / n as f64).sqrt()
}

fn rgg_draw(n: usize, radius: f64, seed: u64) -> Graph {
    let mut rng = SeededRng::new(seed, STREAM_GRAPH);
    let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.uniform(), rng.uniform()]).collect();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            if (dx * dx + dy * dy).sqrt() <= radius {
                edges.insert((i, j));
            }
        }
    }
    Graph { n, edges, positions: Some(positions) }
}

/// Draws `n` uniform points in the unit square and links pairs within
/// `radius` (inclusive). Disconnected draws are discarded and redrawn with
/// seed `seed + attempt`.
pub fn generate_rgg(n: usize, radius: f64, seed: u64, max_attempts: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("random geometric graph needs n >= 2, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if max_attempts == 0 {
        return Err(Error::InvalidArgument("max_attempts must be at least 1".into()));
    }
    for attempt in 0..max_attempts {
        let g = rgg_draw(n, radius, seed.wrapping_add(attempt as u64));
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected { n, radius, attempts: max_attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity_examples() {
        assert!(Graph::path(3).is_connected());
        assert!(!Graph::new(4, [(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Graph::complete(5).is_connected());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(Graph::path(3).degrees(), vec![1, 2, 1]);
        assert_eq!(Graph::complete(4).degrees(), vec![3, 3, 3, 3]);
        assert_eq!(Graph::star(5).degrees(), vec![4, 1, 1, 1, 1]);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn rgg_two_nodes_large_radius_is_complete() {
        for seed in 0..5 {
            let g = generate_rgg(2, 2.0, seed, 1).unwrap();
            assert_eq!(g.edge_count(), 1);
        }
    }

    #[test]
    fn rgg_thirty_nodes_default_radius_connected() {
        let r = default_radius(30);
        assert!((r - 0.3370).abs() < 1e-3);
        for seed in 0..5 {
            let g = generate_rgg(30, r, seed, 1000).unwrap();
            assert!(g.is_connected());
        }
    }

    #[test]
    fn rgg_tiny_radius_fails() {
        let err = generate_rgg(3, 1e-9, 0, 3).unwrap_err();
        assert!(matches!(err, Error::Disconnected { n: 3, attempts: 3, .. }));
    }

    #[test]
    fn rgg_edges_match_distances() {
        let r = 0.3;
        let g = generate_rgg(25, r, 11, 1000).unwrap();
        let pos = g.positions().unwrap();
        for i in 0..25 {
            for j in i + 1..25 {
                let d = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                assert_eq!(g.has_edge(i, j), d <= r);
            }
        }
    }

    #[test]
    fn edge_list_round_trip_keeps_positions() {
        let g = generate_rgg(12, 0.5, 3, 100).unwrap();
        let back = Graph::from_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edge_list_parse_errors_carry_line() {
        let err = Graph::from_edge_list("n 3\n0 1\nbogus line here\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
