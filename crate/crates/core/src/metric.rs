//! Metric spaces and locations.
//!
//! Three spaces are supported: Euclidean point clouds, explicit distance
//! matrices over a finite set of nodes, and weighted rooted trees whose
//! locations may sit in the interior of an edge. All distance functions are
//! written so that `distance(a, b)` and `distance(b, a)` are bit-identical.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, LocationError, Result};

/// A point of a [`MetricSpace`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Location {
    /// Coordinates in a Euclidean space.
    Point(Vec<f64>),
    /// A node of a finite (matrix) or tree space.
    Node(usize),
    /// A point on the tree edge `parent -> child`, `offset` away from `parent`.
    Edge { parent: usize, child: usize, offset: f64 },
}

impl Location {
    fn kind(&self) -> &'static str {
        match self {
            Location::Point(_) => "point",
            Location::Node(_) => "node",
            Location::Edge { .. } => "edge",
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Location::Point(c) => Some(c),
            _ => None,
        }
    }
}

/// Line format used for replay files: `x,y,...` for points, `node:<id>` and
/// `edge:<parent>:<child>:<offset>` for tree/matrix locations.
impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(c) => {
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Location::Node(v) => write!(f, "node:{v}"),
            Location::Edge { parent, child, offset } => write!(f, "edge:{parent}:{child}:{offset}"),
        }
    }
}

impl FromStr for Location {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |what: &str| Error::Parse(format!("{what} in location {s:?}"));
        if let Some(rest) = s.strip_prefix("node:") {
            return rest.parse().map(Location::Node).map_err(|_| bad("bad node id"));
        }
        if let Some(rest) = s.strip_prefix("edge:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("expected edge:<parent>:<child>:<offset>"));
            }
            return Ok(Location::Edge {
                parent: parts[0].parse().map_err(|_| bad("bad parent id"))?,
                child: parts[1].parse().map_err(|_| bad("bad child id"))?,
                offset: parts[2].parse().map_err(|_| bad("bad offset"))?,
            });
        }
        s.split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad("bad coordinate")))
            .collect::<Result<Vec<_>>>()
            .map(Location::Point)
    }
}

/// Symmetric, zero-diagonal distance matrix over nodes `0..n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

/// How thoroughly the triangle inequality is checked when a matrix is loaded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleCheck {
    /// `min(n^3, 100_000)` random triples drawn from the given seed.
    Sampled { seed: u64 },
    /// Every ordered triple.
    Full,
}

const TRIANGLE_SAMPLES: usize = 100_000;
const TRIANGLE_SLACK: f64 = 1e-9;

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, check: TriangleCheck) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSpace("distance matrix is empty".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = DistanceMatrix { n, data };
        m.validate(check)?;
        Ok(m)
    }

    /// Parses the headered text format: first line `n`, then `n` rows of
    /// comma or whitespace separated distances.
    pub fn parse(text: &str, check: TriangleCheck) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("bad matrix header {header:?}")))?;
        let rows = lines
            .map(|l| {
                l.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != n {
            return Err(Error::Parse(format!("header says {n} rows, found {}", rows.len())));
        }
        Self::from_rows(rows, check)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn validate(&self, check: TriangleCheck) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidSpace(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!("bad distance {d} at ({i},{j})")));
                }
                if d != self.get(j, i) {
                    return Err(Error::InvalidSpace(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        let violates = |a: usize, b: usize, c: usize| {
            self.get(a, c) > self.get(a, b) + self.get(b, c) + TRIANGLE_SLACK
        };
        let report = |a, b, c| {
            Err(Error::InvalidSpace(format!("triangle inequality fails on ({a},{b},{c})")))
        };
        let exhaustive = n.saturating_pow(3) <= TRIANGLE_SAMPLES;
        match check {
            TriangleCheck::Sampled { seed } if !exhaustive => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..TRIANGLE_SAMPLES {
                    let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                    if violates(a, b, c) {
                        return report(a, b, c);
                    }
                }
            }
            _ => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if violates(a, b, c) {
                                return report(a, b, c);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for DistanceMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        DistanceMatrix::from_rows(rows, TriangleCheck::Sampled { seed: 0 })
    }
}

impl From<DistanceMatrix> for Vec<Vec<f64>> {
    fn from(m: DistanceMatrix) -> Self {
        m.data.chunks(m.n).map(<[f64]>::to_vec).collect()
    }
}

/// Rooted tree with positive edge lengths. Node `i` is joined to
/// `parent[i]` by an edge of length `length[i]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct WeightedTree {
    parent: Vec<Option<usize>>,
    length: Vec<f64>,
    level: Vec<u32>,
    root_dist: Vec<f64>,
    root: usize,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    parent: Vec<Option<usize>>,
    length: Vec<f64>,
}

impl TryFrom<TreeRepr> for WeightedTree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        WeightedTree::new(r.parent, r.length)
    }
}

impl From<WeightedTree> for TreeRepr {
    fn from(t: WeightedTree) -> Self {
        TreeRepr { parent: t.parent, length: t.length }
    }
}

impl WeightedTree {
    /// `length[root]` is ignored and stored as zero.
    pub fn new(parent: Vec<Option<usize>>, mut length: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidSpace("tree has no nodes".into()));
        }
        if length.len() != n {
            return Err(Error::InvalidSpace("parent and length tables differ in size".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidSpace(format!("tree needs exactly one root, found {}", roots.len())));
        }
        let root = roots[0];
        length[root] = 0.0;
        for i in 0..n {
            if let Some(p) = parent[i] {
                if p >= n {
                    return Err(Error::InvalidSpace(format!("node {i} has unknown parent {p}")));
                }
                if !(length[i] > 0.0 && length[i].is_finite()) {
                    return Err(Error::InvalidSpace(format!("edge above node {i} has length {}", length[i])));
                }
            }
        }

        // Resolve levels iteratively; a node still unresolved after walking
        // n steps up sits on a cycle.
        let mut level: Vec<Option<u32>> = vec![None; n];
        let mut root_dist = vec![0.0; n];
        level[root] = Some(0);
        let mut stack = Vec::new();
        for start in 0..n {
            let mut v = start;
            while level[v].is_none() {
                stack.push(v);
                if stack.len() > n {
                    return Err(Error::InvalidSpace("parent links contain a cycle".into()));
                }
                v = parent[v].expect("only the root lacks a parent");
            }
            while let Some(u) = stack.pop() {
                let p = parent[u].expect("non-root");
                level[u] = Some(level[p].expect("resolved") + 1);
                root_dist[u] = root_dist[p] + length[u];
            }
        }
        Ok(WeightedTree {
            parent,
            length,
            level: level.into_iter().map(|l| l.expect("resolved")).collect(),
            root_dist,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Length of the edge joining `v` to its parent (zero for the root).
    pub fn edge_length(&self, v: usize) -> f64 {
        self.length[v]
    }

    pub fn level(&self, v: usize) -> u32 {
        self.level[v]
    }

    pub fn root_distance(&self, v: usize) -> f64 {
        self.root_dist[v]
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&u| self.parent[u] == Some(v))
    }

    pub fn is_ancestor(&self, anc: usize, mut v: usize) -> bool {
        loop {
            if v == anc {
                return true;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.level[a] > self.level[b] {
            a = self.parent[a].expect("non-root");
        }
        while self.level[b] > self.level[a] {
            b = self.parent[b].expect("non-root");
        }
        while a != b {
            a = self.parent[a].expect("non-root");
            b = self.parent[b].expect("non-root");
        }
        a
    }

    /// A location as (node below it, height above that node along the parent edge).
    fn anchor(&self, loc: &Location) -> std::result::Result<(usize, f64), LocationError> {
        match *loc {
            Location::Node(v) if v < self.len() => Ok((v, 0.0)),
            Location::Node(v) => Err(LocationError::UnknownNode(v)),
            Location::Edge { parent, child, offset } => {
                if parent >= self.len() {
                    return Err(LocationError::UnknownNode(parent));
                }
                if child >= self.len() {
                    return Err(LocationError::UnknownNode(child));
                }
                if self.parent[child] != Some(parent) {
                    return Err(LocationError::NotAnEdge { parent, child });
                }
                let len = self.length[child];
                if !(0.0..=len).contains(&offset) {
                    return Err(LocationError::OffsetOutOfRange { offset, length: len });
                }
                if offset == 0.0 {
                    Ok((parent, 0.0))
                } else if offset == len {
                    Ok((child, 0.0))
                } else {
                    Ok((child, len - offset))
                }
            }
            Location::Point(_) => Err(LocationError::WrongSpace { kind: "point", space: "tree" }),
        }
    }

    fn distance(&self, a: &Location, b: &Location) -> std::result::Result<f64, LocationError> {
        let (u, hu) = self.anchor(a)?;
        let (v, hv) = self.anchor(b)?;
        if u == v {
            return Ok((hu - hv).abs());
        }
        let l = self.lca(u, v);
        let pu = self.root_dist[u] - hu;
        let pv = self.root_dist[v] - hv;
        // Depth (root distance) of the point where the two root paths meet.
        let meet = if l == u {
            pu
        } else if l == v {
            pv
        } else {
            self.root_dist[l]
        };
        Ok((pu + pv) - 2.0 * meet)
    }

    /// The location `height` above node `v` on its root path.
    fn climb(&self, mut v: usize, mut height: f64) -> Location {
        while height > 0.0 {
            let Some(p) = self.parent[v] else { break };
            let len = self.length[v];
            if height < len {
                return Location::Edge { parent: p, child: v, offset: len - height };
            }
            height -= len;
            v = p;
        }
        Location::Node(v)
    }

    /// The location at distance `along` from node `from` on the path to node `to`.
    pub fn point_on_path(&self, from: usize, to: usize, along: f64) -> Location {
        let l = self.lca(from, to);
        let up = self.root_dist[from] - self.root_dist[l];
        let total = up + (self.root_dist[to] - self.root_dist[l]);
        if along <= up {
            self.climb(from, along)
        } else {
            self.climb(to, total - along)
        }
    }
}

/// The space every distance of an instance is computed in. Immutable after
/// construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum MetricSpace {
    Euclidean { dim: usize },
    Matrix(DistanceMatrix),
    Tree(WeightedTree),
}

impl MetricSpace {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpace::Euclidean { dim }
    }

    fn name(&self) -> &'static str {
        match self {
            MetricSpace::Euclidean { .. } => "euclidean",
            MetricSpace::Matrix(_) => "matrix",
            MetricSpace::Tree(_) => "tree",
        }
    }

    pub fn as_tree(&self) -> Option<&WeightedTree> {
        match self {
            MetricSpace::Tree(t) => Some(t),
            _ => None,
        }
    }

    /// Checks that `loc` belongs to this space.
    pub fn check(&self, loc: &Location) -> Result<()> {
        let wrong = || LocationError::WrongSpace { kind: loc.kind(), space: self.name() };
        match (self, loc) {
            (MetricSpace::Euclidean { dim }, Location::Point(c)) => {
                if c.len() != *dim {
                    return Err(LocationError::DimensionMismatch { expected: *dim, found: c.len() }.into());
                }
            }
            (MetricSpace::Matrix(m), Location::Node(v)) => {
                if *v >= m.len() {
                    return Err(LocationError::UnknownNode(*v).into());
                }
            }
            (MetricSpace::Tree(t), Location::Node(_) | Location::Edge { .. }) => {
                t.anchor(loc)?;
            }
            _ => return Err(wrong().into()),
        }
        Ok(())
    }

    pub fn distance(&self, a: &Location, b: &Location) -> Result<f64> {
        match self {
            MetricSpace::Euclidean { dim } => match (a, b) {
                (Location::Point(x), Location::Point(y)) => {
                    for c in [x, y] {
                        if c.len() != *dim {
                            return Err(LocationError::DimensionMismatch { expected: *dim, found: c.len() }.into());
                        }
                    }
                    Ok(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
                }
                _ => Err(self.wrong_kind(a, b).into()),
            },
            MetricSpace::Matrix(m) => match (a, b) {
                (Location::Node(i), Location::Node(j)) => {
                    for &v in [i, j] {
                        if v >= m.len() {
                            return Err(LocationError::UnknownNode(v).into());
                        }
                    }
                    Ok(m.get(*i, *j))
                }
                _ => Err(self.wrong_kind(a, b).into()),
            },
            MetricSpace::Tree(t) => Ok(t.distance(a, b)?),
        }
    }

    fn wrong_kind(&self, a: &Location, b: &Location) -> LocationError {
        let bad = match (self, a) {
            (MetricSpace::Euclidean { .. }, Location::Point(_)) => b,
            (MetricSpace::Matrix(_), Location::Node(_)) => b,
            _ => a,
        };
        LocationError::WrongSpace { kind: bad.kind(), space: self.name() }
    }

    /// Point at fraction `t` of the way from `from` to `to`. Exact at both
    /// endpoints (`t == 0` returns `from`, `t == 1` returns `to`).
    pub fn interpolate(&self, from: &Location, to: &Location, t: f64) -> Result<Location> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("interpolation fraction {t} outside [0,1]")));
        }
        match (self, from, to) {
            (MetricSpace::Euclidean { .. }, Location::Point(a), Location::Point(b)) => {
                self.check(from)?;
                self.check(to)?;
                Ok(Location::Point(a.iter().zip(b).map(|(p, q)| t * q + (1.0 - t) * p).collect()))
            }
            (MetricSpace::Tree(tree), Location::Node(a), Location::Node(b)) => {
                self.check(from)?;
                self.check(to)?;
                if t == 1.0 {
                    return Ok(to.clone());
                }
                let d = tree.distance(from, to)?;
                Ok(tree.point_on_path(*a, *b, t * d))
            }
            (MetricSpace::Tree(_), _, _) => {
                Err(Error::Unsupported("tree interpolation needs node endpoints".into()))
            }
            _ => Err(Error::Unsupported(format!("no paths between locations in a {} space", self.name()))),
        }
    }
}

/// Result of a nearest-candidate query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest<'a> {
    pub index: usize,
    pub location: &'a Location,
    pub distance: f64,
}

/// Linear scan for the candidate closest to `query`; ties go to the lowest index.
pub fn nearest<'a>(space: &MetricSpace, query: &Location, candidates: &'a [Location]) -> Result<Nearest<'a>> {
    let mut best: Option<Nearest<'a>> = None;
    for (index, location) in candidates.iter().enumerate() {
        let distance = space.distance(query, location)?;
        if best.is_none_or(|b| distance < b.distance) {
            best = Some(Nearest { index, location, distance });
        }
    }
    best.ok_or(Error::EmptyCandidates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Location {
        Location::Point(c.to_vec())
    }

    /// Binary tree of depth 2; edges from the root have length 2, the next level 1.
    fn small_tree() -> WeightedTree {
        let parent = vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)];
        let length = vec![0.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0];
        WeightedTree::new(parent, length).unwrap()
    }

    /// All-pairs shortest paths on the tree's edge list (Floyd-Warshall).
    fn graph_oracle(tree: &WeightedTree) -> Vec<Vec<f64>> {
        let n = tree.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            d[i][i] = 0.0;
            if let Some(p) = tree.parent(i) {
                d[i][p] = tree.edge_length(i);
                d[p][i] = tree.edge_length(i);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    #[test]
    fn euclidean_basics() {
        let s = MetricSpace::euclidean(2);
        assert_eq!(s.distance(&pt(&[1.7, -2.0]), &pt(&[1.7, -2.0])).unwrap(), 0.0);
        assert_eq!(s.distance(&pt(&[0.0, 0.0]), &pt(&[3.0, 4.0])).unwrap(), 5.0);
    }

    #[test]
    fn malformed_locations() {
        let s = MetricSpace::euclidean(2);
        let err = s.distance(&pt(&[0.0]), &pt(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::MalformedLocation(LocationError::DimensionMismatch { .. })));
        assert!(matches!(
            s.distance(&pt(&[0.0, 0.0]), &Location::Node(0)),
            Err(Error::MalformedLocation(LocationError::WrongSpace { .. }))
        ));

        let t = MetricSpace::Tree(small_tree());
        assert!(matches!(
            t.distance(&Location::Node(9), &Location::Node(0)),
            Err(Error::MalformedLocation(LocationError::UnknownNode(9)))
        ));
        let off = Location::Edge { parent: 0, child: 1, offset: 2.5 };
        assert!(matches!(
            t.distance(&off, &Location::Node(0)),
            Err(Error::MalformedLocation(LocationError::OffsetOutOfRange { .. }))
        ));
        let not_edge = Location::Edge { parent: 0, child: 3, offset: 0.5 };
        assert!(matches!(
            t.distance(&not_edge, &Location::Node(0)),
            Err(Error::MalformedLocation(LocationError::NotAnEdge { .. }))
        ));
    }

    #[test]
    fn tree_leaf_to_leaf_across_root() {
        let tree = small_tree();
        let oracle = graph_oracle(&tree);
        assert_eq!(oracle[3][5], 6.0);
        let s = MetricSpace::Tree(tree);
        assert_eq!(s.distance(&Location::Node(3), &Location::Node(5)).unwrap(), 6.0);
    }

    #[test]
    fn tree_node_distances_match_graph_oracle() {
        let tree = small_tree();
        let oracle = graph_oracle(&tree);
        let s = MetricSpace::Tree(tree);
        for i in 0..7 {
            for j in 0..7 {
                let d = s.distance(&Location::Node(i), &Location::Node(j)).unwrap();
                assert_eq!(d, oracle[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn edge_points() {
        let s = MetricSpace::Tree(small_tree());
        let a = Location::Edge { parent: 0, child: 1, offset: 0.5 };
        let b = Location::Edge { parent: 0, child: 1, offset: 1.75 };
        assert_eq!(s.distance(&a, &b).unwrap(), 1.25);
        // a is an ancestor-side point of node 3
        assert_eq!(s.distance(&a, &Location::Node(3)).unwrap(), 2.5);
        // different subtrees
        let c = Location::Edge { parent: 2, child: 6, offset: 0.25 };
        assert_eq!(s.distance(&a, &c).unwrap(), 0.5 + 2.0 + 0.25);
        // below: point on edge (1,4) vs point on edge (0,1)
        let d = Location::Edge { parent: 1, child: 4, offset: 0.5 };
        assert_eq!(s.distance(&a, &d).unwrap(), 1.5 + 0.5);
        assert_eq!(s.distance(&d, &a).unwrap(), s.distance(&a, &d).unwrap());
        // endpoints coincide with nodes
        let end = Location::Edge { parent: 0, child: 1, offset: 2.0 };
        assert_eq!(s.distance(&end, &Location::Node(1)).unwrap(), 0.0);
        let start = Location::Edge { parent: 0, child: 1, offset: 0.0 };
        assert_eq!(s.distance(&start, &Location::Node(0)).unwrap(), 0.0);
    }

    #[test]
    fn point_on_path_walks_through_lca() {
        let tree = small_tree();
        let s = MetricSpace::Tree(tree.clone());
        assert_eq!(tree.point_on_path(3, 5, 0.0), Location::Node(3));
        assert_eq!(tree.point_on_path(3, 5, 1.0), Location::Node(1));
        assert_eq!(tree.point_on_path(3, 5, 3.0), Location::Node(0));
        assert_eq!(tree.point_on_path(3, 5, 6.0), Location::Node(5));
        let p = tree.point_on_path(3, 5, 4.5);
        assert_eq!(p, Location::Edge { parent: 0, child: 2, offset: 1.5 });
        assert_eq!(s.distance(&p, &Location::Node(3)).unwrap(), 4.5);
        assert_eq!(s.distance(&p, &Location::Node(5)).unwrap(), 1.5);
    }

    #[test]
    fn interpolation_endpoints_are_exact() {
        let s = MetricSpace::euclidean(2);
        let a = pt(&[0.1, 0.7]);
        let b = pt(&[0.3, 1e6 / 3.0]);
        assert_eq!(s.interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(s.interpolate(&a, &b, 1.0).unwrap(), b);
        assert_eq!(s.interpolate(&pt(&[0.0, 0.0]), &pt(&[4.0, 0.0]), 0.25).unwrap(), pt(&[1.0, 0.0]));
        let m = MetricSpace::Matrix(DistanceMatrix::from_rows(vec![vec![0.0]], TriangleCheck::Full).unwrap());
        assert!(matches!(
            m.interpolate(&Location::Node(0), &Location::Node(0), 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn nearest_queries() {
        let s = MetricSpace::euclidean(2);
        let cands = vec![pt(&[5.0, 0.0]), pt(&[0.0, 1.0])];
        let n = nearest(&s, &pt(&[0.0, 0.0]), &cands).unwrap();
        assert_eq!((n.index, n.distance), (1, 1.0));
        let n = nearest(&s, &pt(&[5.0, 0.0]), &cands).unwrap();
        assert_eq!((n.index, n.distance), (0, 0.0));
        let tie = vec![pt(&[1.0, 0.0]), pt(&[-1.0, 0.0])];
        assert_eq!(nearest(&s, &pt(&[0.0, 0.0]), &tie).unwrap().index, 0);
        assert!(matches!(nearest(&s, &pt(&[0.0, 0.0]), &[]), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = MetricSpace::euclidean(3);
        let cands: Vec<Location> = (0..100)
            .map(|_| Location::Point((0..3).map(|_| rng.random_range(-10.0..10.0)).collect()))
            .collect();
        for _ in 0..50 {
            let q = Location::Point((0..3).map(|_| rng.random_range(-10.0..10.0)).collect());
            let mut best = (0, f64::INFINITY);
            for (i, c) in cands.iter().enumerate() {
                let d = s.distance(&q, c).unwrap();
                if d < best.1 {
                    best = (i, d);
                }
            }
            let got = nearest(&s, &q, &cands).unwrap();
            assert_eq!((got.index, got.distance), best);
        }
    }

    #[test]
    fn matrix_validation() {
        let ok = "3\n0 1 2\n1 0 1\n2 1 0\n";
        let m = DistanceMatrix::parse(ok, TriangleCheck::Full).unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        let asym = "2\n0 1\n2 0\n";
        assert!(DistanceMatrix::parse(asym, TriangleCheck::Full).is_err());
        let tri = "3\n0,1,5\n1,0,1\n5,1,0\n";
        assert!(DistanceMatrix::parse(tri, TriangleCheck::Full).is_err());
        assert!(DistanceMatrix::parse(tri, TriangleCheck::Sampled { seed: 3 }).is_err());
        let diag = "2\n1 1\n1 0\n";
        assert!(DistanceMatrix::parse(diag, TriangleCheck::Full).is_err());
        let short = "3\n0 1 1\n1 0 1\n";
        assert!(matches!(DistanceMatrix::parse(short, TriangleCheck::Full), Err(Error::Parse(_))));
    }

    #[test]
    fn tree_validation() {
        assert!(WeightedTree::new(vec![None, None], vec![0.0, 0.0]).is_err());
        assert!(WeightedTree::new(vec![Some(1), Some(0), None], vec![1.0, 1.0, 0.0]).is_err());
        assert!(WeightedTree::new(vec![None, Some(0)], vec![0.0, 0.0]).is_err());
        assert!(WeightedTree::new(vec![None, Some(5)], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn location_text_round_trip() {
        for loc in [
            pt(&[0.1, -3.0, 1e300]),
            Location::Node(42),
            Location::Edge { parent: 1, child: 3, offset: 0.3 },
        ] {
            assert_eq!(loc.to_string().parse::<Location>().unwrap(), loc);
        }
        assert!("node:x".parse::<Location>().is_err());
    }

    #[test]
    fn space_json_round_trip_revalidates() {
        let s = MetricSpace::Tree(small_tree());
        let json = serde_json::to_string(&s).unwrap();
        let back: MetricSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back.distance(&Location::Node(3), &Location::Node(5)).unwrap(), 6.0);
        let bad = r#"{"Tree":{"parent":[null,null],"length":[0,0]}}"#;
        assert!(serde_json::from_str::<MetricSpace>(bad).is_err());
    }
}
