//! Finite metric trees whose flagged leaves continue as infinite rays.
//!
//! Points are addressed by the node they hang above: `(node, t)` lies on the
//! edge from `parent(node)` down to `node`, at distance `t` below the parent.
//! Each extendable leaf owns a virtual node of infinite edge length carrying
//! its ray. Ancestor queries use binary lifting.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg::TOL_NUM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    node: usize,
    t: f64,
}

/// Serialized form: vertex ids, weighted edges, extendable leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub vertices: Vec<u64>,
    pub edges: Vec<(u64, u64, f64)>,
    pub extendable_leaves: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct MetricTree {
    spec: TreeSpec,
    index: HashMap<u64, usize>,
    /// Real vertices are `0..n`, ray nodes `n..n + ends`.
    n: usize,
    parent: Vec<usize>,
    /// Length of the edge above each node; 0 for the root, infinite for rays.
    len: Vec<f64>,
    /// Depth of the bottom of each real node.
    depth: Vec<f64>,
    level: Vec<usize>,
    up: Vec<Vec<usize>>,
    end_leaves: Vec<usize>,
}

impl MetricTree {
    pub fn new(spec: TreeSpec) -> Result<Self> {
        let n = spec.vertices.len();
        if n == 0 {
            return Err(GeomError::InvalidTree("no vertices".into()));
        }
        let mut index = HashMap::new();
        for (i, &v) in spec.vertices.iter().enumerate() {
            if index.insert(v, i).is_some() {
                return Err(GeomError::InvalidTree(format!("duplicate vertex {v}")));
            }
        }
        if spec.edges.len() + 1 != n {
            return Err(GeomError::InvalidTree(format!(
                "{} vertices need {} edges, got {}",
                n,
                n - 1,
                spec.edges.len()
            )));
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, l) in &spec.edges {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(GeomError::InvalidTree(format!("edge ({a},{b}) has unknown endpoint")));
            };
            if !(l > 0.0 && l.is_finite()) {
                return Err(GeomError::InvalidTree(format!("edge ({a},{b}) has length {l}")));
            }
            if ia == ib {
                return Err(GeomError::InvalidTree(format!("self-loop at {a}")));
            }
            adj[ia].push((ib, l));
            adj[ib].push((ia, l));
        }
        let mut end_leaves = Vec::new();
        for &v in &spec.extendable_leaves {
            let Some(&i) = index.get(&v) else {
                return Err(GeomError::InvalidTree(format!("unknown extendable leaf {v}")));
            };
            if adj[i].len() > 1 {
                return Err(GeomError::InvalidTree(format!("extendable vertex {v} is not a leaf")));
            }
            if end_leaves.contains(&i) {
                return Err(GeomError::InvalidTree(format!("leaf {v} flagged twice")));
            }
            end_leaves.push(i);
        }

        let total = n + end_leaves.len();
        let mut parent = vec![usize::MAX; total];
        let mut len = vec![0.0; total];
        let mut depth = vec![f64::INFINITY; total];
        let mut level = vec![0usize; total];
        parent[0] = 0;
        depth[0] = 0.0;
        let mut stack = vec![0usize];
        let mut seen = vec![false; n];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, l) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    len[w] = l;
                    depth[w] = depth[v] + l;
                    level[w] = level[v] + 1;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GeomError::InvalidTree("not connected".into()));
        }
        for (k, &leaf) in end_leaves.iter().enumerate() {
            parent[n + k] = leaf;
            len[n + k] = f64::INFINITY;
            level[n + k] = level[leaf] + 1;
        }
        let levels = usize::BITS as usize - total.leading_zeros() as usize + 1;
        let mut up = vec![parent.clone()];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next: Vec<usize> = (0..total).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(MetricTree {
            spec,
            index,
            n,
            parent,
            len,
            depth,
            level,
            up,
            end_leaves,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: TreeSpec =
            serde_json::from_str(s).map_err(|e| GeomError::InvalidTree(e.to_string()))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn end_count(&self) -> usize {
        self.end_leaves.len()
    }

    /// The vertex id of the leaf carrying end `k`.
    pub fn end_leaf_id(&self, k: usize) -> u64 {
        self.spec.vertices[self.end_leaves[k]]
    }

    pub fn vertex(&self, id: u64) -> Option<TreePoint> {
        self.index.get(&id).map(|&i| self.vertex_at(i))
    }

    fn vertex_at(&self, i: usize) -> TreePoint {
        TreePoint {
            node: i,
            t: self.len[i],
        }
    }

    /// All vertices, in input order.
    pub fn vertices(&self) -> Vec<TreePoint> {
        (0..self.n).map(|i| self.vertex_at(i)).collect()
    }

    /// The point at distance `t >= 0` beyond the leaf of end `k`.
    pub fn ray_point(&self, k: usize, t: f64) -> TreePoint {
        self.canonical(self.n + k, t.max(0.0))
    }

    /// Point `t` below `parent(node)` on the edge above `node`.
    fn canonical(&self, node: usize, t: f64) -> TreePoint {
        if t <= 0.0 && node != 0 {
            let p = self.parent[node];
            return self.vertex_at(p);
        }
        TreePoint { node, t: t.min(self.len[node]) }
    }

    fn depth_of(&self, p: &TreePoint) -> f64 {
        if p.node == 0 {
            0.0
        } else {
            self.depth[self.parent[p.node]] + p.t
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.level[a] < self.level[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.level[a] - self.level[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[k][a];
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][a] != self.up[k][b] {
                a = self.up[k][a];
                b = self.up[k][b];
            }
        }
        self.parent[a]
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        if p.node == q.node {
            return (p.t - q.t).abs();
        }
        let c = self.lca(p.node, q.node);
        let dp = self.depth_of(p);
        let dq = self.depth_of(q);
        if c == p.node || c == q.node {
            (dp - dq).abs()
        } else {
            dp + dq - 2.0 * self.depth[c]
        }
    }

    /// The ancestor-chain point of `p` at height `h` above it.
    fn ascend(&self, p: &TreePoint, h: f64) -> TreePoint {
        let target = self.depth_of(p) - h;
        if p.node == 0 {
            return *p;
        }
        let top = self.depth[self.parent[p.node]];
        if target >= top {
            return self.canonical(p.node, target - top);
        }
        let mut v = self.parent[p.node];
        for k in (0..self.up.len()).rev() {
            let u = self.up[k][v];
            if self.depth[u] >= target {
                v = u;
            }
        }
        if v == 0 {
            return self.vertex_at(0);
        }
        self.canonical(v, target - self.depth[self.parent[v]])
    }

    /// The point at distance `s` from `p` on the geodesic towards `q`
    /// (clamped to the geodesic).
    pub fn point_along(&self, p: &TreePoint, q: &TreePoint, s: f64) -> TreePoint {
        let d = self.distance(p, q);
        let s = s.clamp(0.0, d);
        if p.node == q.node {
            let t = if q.t >= p.t { p.t + s } else { p.t - s };
            return self.canonical(p.node, t);
        }
        let c = self.lca(p.node, q.node);
        if c == q.node && c != p.node {
            return self.ascend(p, s);
        }
        if c == p.node {
            return self.ascend(q, d - s);
        }
        let up_len = self.depth_of(p) - self.depth[c];
        if s <= up_len {
            self.ascend(p, s)
        } else {
            self.ascend(q, d - s)
        }
    }

    /// The geodesic as the endpoints with the vertices strictly between
    /// them, in order, and its length.
    pub fn geodesic(&self, p: &TreePoint, q: &TreePoint) -> (Vec<TreePoint>, f64) {
        let d = self.distance(p, q);
        let mut inner: Vec<(f64, TreePoint)> = Vec::new();
        if p.node != q.node {
            let c = self.lca(p.node, q.node);
            for start in [p.node, q.node] {
                let mut v = start;
                while v != c {
                    v = self.parent[v];
                    let vp = self.vertex_at(v);
                    let dv = self.distance(p, &vp);
                    if dv > TOL_NUM && dv < d - TOL_NUM && !inner.iter().any(|(_, w)| w.node == v) {
                        inner.push((dv, vp));
                    }
                }
            }
        }
        inner.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = vec![*p];
        out.extend(inner.into_iter().map(|(_, v)| v));
        out.push(*q);
        (out, d)
    }

    /// Gromov product `(a | b)_z`.
    pub fn gromov(&self, z: &TreePoint, a: &TreePoint, b: &TreePoint) -> f64 {
        0.5 * (self.distance(z, a) + self.distance(z, b) - self.distance(a, b))
    }

    /// Nearest point of the segment `[x, y]` to `z`: the median of the three.
    pub fn project_segment(&self, z: &TreePoint, x: &TreePoint, y: &TreePoint) -> TreePoint {
        self.point_along(x, y, self.gromov(x, z, y))
    }

    pub fn distance_to_segment(&self, z: &TreePoint, x: &TreePoint, y: &TreePoint) -> f64 {
        // d(z, [x, y]) = (x | y)_z in a tree.
        self.gromov(z, x, y).max(0.0)
    }

    /// A point far enough along end `k` that every query involving the
    /// given points sees it as the end.
    fn far_point(&self, k: usize, points: &[&TreePoint]) -> TreePoint {
        let leaf = self.vertex_at(self.end_leaves[k]);
        let reach: f64 = points.iter().map(|p| self.distance(p, &leaf)).sum();
        self.ray_point(k, reach + 1.0)
    }

    /// Nearest point of the ray from `x` to end `k`.
    pub fn project_ray(&self, z: &TreePoint, x: &TreePoint, k: usize) -> TreePoint {
        let f = self.far_point(k, &[x, z]);
        self.project_segment(z, x, &f)
    }

    pub fn distance_to_ray(&self, z: &TreePoint, x: &TreePoint, k: usize) -> f64 {
        let f = self.far_point(k, &[x, z]);
        self.distance_to_segment(z, x, &f)
    }

    /// Distance from `x` along the ray towards end `k`, if `z` lies on it.
    pub fn ray_position(&self, x: &TreePoint, k: usize, z: &TreePoint) -> Option<f64> {
        (self.distance_to_ray(z, x, k) <= TOL_NUM).then(|| self.distance(x, z))
    }

    /// Point at distance `s` from `x` on the ray towards end `k`.
    pub fn ray_from(&self, x: &TreePoint, k: usize, s: f64) -> TreePoint {
        let leaf = self.vertex_at(self.end_leaves[k]);
        let f = self.ray_point(k, s + self.distance(x, &leaf) + 1.0);
        self.point_along(x, &f, s)
    }

    /// Nearest point of the line joining ends `a != b`.
    pub fn project_line(&self, z: &TreePoint, a: usize, b: usize) -> TreePoint {
        let fa = self.far_point(a, &[z]);
        let fb = self.far_point(b, &[z]);
        self.project_segment(z, &fa, &fb)
    }

    pub fn distance_to_line(&self, z: &TreePoint, a: usize, b: usize) -> f64 {
        let fa = self.far_point(a, &[z]);
        let fb = self.far_point(b, &[z]);
        self.distance_to_segment(z, &fa, &fb)
    }

    /// Signed position on the line from end `a` to end `b`, increasing
    /// towards `b`, for points on that line.
    pub fn line_position(&self, z: &TreePoint, a: usize) -> f64 {
        if z.node == self.n + a {
            -z.t
        } else {
            self.distance(&self.vertex_at(self.end_leaves[a]), z)
        }
    }

    /// Length of the common initial part of the rays from `x` to ends `a`
    /// and `b`; infinite when `a == b`.
    pub fn end_overlap(&self, x: &TreePoint, a: usize, b: usize) -> f64 {
        if a == b {
            return f64::INFINITY;
        }
        let fa = self.far_point(a, &[x]);
        let fb = self.far_point(b, &[x]);
        self.gromov(x, &fa, &fb)
    }

    /// Whether `x` lies on the line joining ends `a` and `b`.
    pub fn on_line(&self, x: &TreePoint, a: usize, b: usize) -> bool {
        a != b && self.distance_to_line(x, a, b) <= TOL_NUM
    }

    /// An end `k` whose ray from `x` passes through `y`, preferring `prefer`.
    pub fn end_through(&self, x: &TreePoint, y: &TreePoint, prefer: Option<usize>) -> Option<usize> {
        if let Some(k) = prefer {
            if self.ray_position(x, k, y).is_some() {
                return Some(k);
            }
        }
        (0..self.end_count()).find(|&k| self.ray_position(x, k, y).is_some())
    }

    /// The end maximizing the overlap of its ray from `x` with the geodesic
    /// to `y`; ties keep `prefer`, then the lowest index.
    pub fn end_towards(&self, x: &TreePoint, y: &TreePoint, prefer: Option<usize>) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for k in 0..self.end_count() {
            let f = self.far_point(k, &[x, y]);
            let g = self.gromov(x, &f, y);
            let better = match best {
                None => true,
                Some((bg, bk)) => {
                    g > bg + TOL_NUM || ((g - bg).abs() <= TOL_NUM && prefer == Some(k) && prefer != Some(bk))
                }
            };
            if better {
                best = Some((g, k));
            }
        }
        best.map(|(_, k)| k)
    }

    /// Largest four-point defect over all vertex quadruples.
    pub fn vertex_four_point_defect(&self) -> f64 {
        let vs = self.vertices();
        let n = vs.len();
        let d: Vec<Vec<f64>> = vs
            .iter()
            .map(|a| vs.iter().map(|b| self.distance(a, b)).collect())
            .collect();
        crate::morse::four_point_defect_exact(&d, n)
    }

    /// Random recursive tree: each new vertex hangs below a uniformly chosen
    /// earlier one. Every leaf is extendable.
    pub fn random<R: Rng>(rng: &mut R, vertices: usize, min_len: f64, max_len: f64) -> Self {
        let n = vertices.max(2);
        let mut edges = Vec::with_capacity(n - 1);
        let mut degree = vec![0usize; n];
        for v in 1..n {
            let p = rng.random_range(0..v);
            let l = rng.random_range(min_len..=max_len);
            edges.push((p as u64, v as u64, l));
            degree[p] += 1;
            degree[v] += 1;
        }
        let leaves = (0..n).filter(|&v| degree[v] == 1).map(|v| v as u64).collect();
        Self::new(TreeSpec {
            vertices: (0..n as u64).collect(),
            edges,
            extendable_leaves: leaves,
        })
        .expect("random recursive trees are valid")
    }

    /// A path of `spine` edges with a dead-end hair of length `hair` at every
    /// inner spine vertex. Both spine ends are extendable.
    pub fn comb(spine: usize, spine_len: f64, hair: f64) -> Self {
        let spine = spine.max(1);
        let mut vertices: Vec<u64> = (0..=spine as u64).collect();
        let mut edges: Vec<(u64, u64, f64)> =
            (0..spine as u64).map(|i| (i, i + 1, spine_len)).collect();
        let mut next = spine as u64 + 1;
        for i in 1..spine as u64 {
            vertices.push(next);
            edges.push((i, next, hair));
            next += 1;
        }
        Self::new(TreeSpec {
            vertices,
            edges,
            extendable_leaves: vec![0, spine as u64],
        })
        .expect("combs are valid")
    }

    /// Vertex ids adjacent to vertex `id` in the finite tree.
    pub fn adjacent(&self, id: u64) -> Vec<u64> {
        let Some(&i) = self.index.get(&id) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if i != 0 {
            out.push(self.spec.vertices[self.parent[i]]);
        }
        for v in 0..self.n {
            if v != 0 && self.parent[v] == i {
                out.push(self.spec.vertices[v]);
            }
        }
        out
    }
}
