//! Undirected simple graphs with one interaction date per edge.

use std::collections::HashSet;

use crate::error::Error;

/// One dated interaction. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Interaction date in years.
    pub date: f64,
}

impl Edge {
    /// The endpoint of this edge that is not `w`.
    #[inline]
    pub fn other(&self, w: usize) -> usize {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// An undirected simple graph over vertices `0..n` with a date on every edge.
///
/// Construction validates that there are no self-loops, no repeated pairs and
/// that every date is finite. The graph is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestampedGraph {
    n: usize,
    edges: Vec<Edge>,
    // incident edge indices per vertex
    adjacency: Vec<Vec<usize>>,
}

impl TimestampedGraph {
    /// Builds a graph from `(i, j, date)` triples. Endpoint order is free;
    /// edges are normalised to `i < j` and kept in input order.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, j, date) in edges {
            if i == j {
                return Err(Error::SelfLoop { vertex: i });
            }
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange { vertex: i.max(j), n });
            }
            if !date.is_finite() {
                return Err(Error::NonFiniteDate { u: i, v: j });
            }
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge { u, v });
            }
            out.push(Edge { u, v, date });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in out.iter().enumerate() {
            adjacency[e.u].push(k);
            adjacency[e.v].push(k);
        }
        Ok(Self {
            n,
            edges: out,
            adjacency,
        })
    }

    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Indices into [`edges`](Self::edges) of the edges touching `v`.
    #[inline]
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Neighbours of `v` in edge order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(move |&k| self.edges[k].other(v))
    }

    /// Number of unordered vertex pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Fraction of vertex pairs that are connected. Zero when there are no pairs.
    pub fn density(&self) -> f64 {
        let pairs = self.pair_count();
        if pairs == 0 {
            0.0
        } else {
            self.edges.len() as f64 / pairs as f64
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a >= self.n || b >= self.n {
            return false;
        }
        let (probe, target) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(probe).any(|w| w == target)
    }

    /// Mean of all edge dates, or `None` for an edgeless graph.
    pub fn mean_date(&self) -> Option<f64> {
        if self.edges.is_empty() {
            None
        } else {
            Some(self.edges.iter().map(|e| e.date).sum::<f64>() / self.edges.len() as f64)
        }
    }

    /// Same topology with every date shifted by `delta` years.
    pub fn shift_dates(&self, delta: f64) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.date += delta;
        }
        g
    }

    /// Edge set as a canonical sorted list, for order-insensitive comparison.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut es = self.edges.clone();
        es.sort_by_key(|e| (e.u, e.v));
        es
    }
}
