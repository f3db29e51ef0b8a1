//! Small dense linear algebra used throughout: angles, and exact projection
//! onto low-dimensional polyhedra by enumeration of active sets.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;

/// Numeric tolerance for chamber, face and membership decisions.
pub const TOL_NUM: f64 = 1e-9;

pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

/// Unsigned angle between two nonzero vectors.
pub fn angle(u: &Vector, v: &Vector) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}

/// Point on the great circle from unit `a` towards unit `b` at angle `s`.
pub fn slerp(a: &Vector, b: &Vector, s: f64) -> Vector {
    let omega = angle(a, b);
    if omega < 1e-15 {
        return a.clone();
    }
    let so = omega.sin();
    (a * ((omega - s).sin() / so) + b * (s.sin() / so)).normalize()
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    'outer: loop {
        f(&idx);
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return;
    }
}

/// Closed polyhedron `{ y : <a_k, y> >= b_k }` with unit normals `a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    dim: usize,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Self {
            normals: Vec::new(),
            offsets: Vec::new(),
            dim,
        }
    }

    /// Adds the half-space `<a, y> >= b`; `a` is normalized.
    pub fn push(&mut self, a: &Vector, b: f64) {
        let n = a.norm();
        assert!(n > 0.0, "half-space normal must be nonzero");
        self.normals.push(a / n);
        self.offsets.push(b / n);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Signed distance-like margin: `min_k <a_k, y> - b_k`. Nonnegative iff inside.
    pub fn margin(&self, y: &Vector) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.dot(y) - b)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, y: &Vector) -> bool {
        self.margin(y) >= -TOL_NUM * (1.0 + y.norm())
    }

    /// Exact nearest point. The projection lies on the affine span of some
    /// linearly independent set of active facets; every such set is tried and
    /// the closest feasible candidate wins.
    pub fn project(&self, y: &Vector) -> Vector {
        if self.contains(y) {
            return y.clone();
        }
        let m = self.normals.len();
        let mut best: Option<(f64, Vector)> = None;
        let violated: Vec<bool> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.dot(y) - b < 0.0)
            .collect();
        for k in 1..=self.dim.min(m) {
            for_each_subset(m, k, |subset| {
                // Some constraint with a positive multiplier is violated at y.
                if !subset.iter().any(|&i| violated[i]) {
                    return;
                }
                if let Some(z) = self.project_affine(y, subset) {
                    if self.margin(&z) >= -1e-9 * (1.0 + z.norm()) {
                        let d = (&z - y).norm();
                        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, z));
                        }
                    }
                }
            });
        }
        best.map(|(_, z)| z).unwrap_or_else(|| y.clone())
    }

    pub fn distance(&self, y: &Vector) -> f64 {
        if self.contains(y) {
            0.0
        } else {
            (self.project(y) - y).norm()
        }
    }

    /// Projection of `y` onto `{ <a_i, z> = b_i : i in subset }`, or `None`
    /// when the normals are linearly dependent.
    fn project_affine(&self, y: &Vector, subset: &[usize]) -> Option<Vector> {
        let k = subset.len();
        let gram = DMatrix::from_fn(k, k, |r, c| {
            self.normals[subset[r]].dot(&self.normals[subset[c]])
        });
        let rhs = DVector::from_fn(k, |r, _| {
            self.offsets[subset[r]] - self.normals[subset[r]].dot(y)
        });
        let lu = gram.lu();
        if lu.determinant().abs() < 1e-12 {
            return None;
        }
        let lambda = lu.solve(&rhs)?;
        let mut z = y.clone();
        for (r, &i) in subset.iter().enumerate() {
            z += &self.normals[i] * lambda[r];
        }
        Some(z)
    }

    pub fn is_empty(&self) -> bool {
        let z = self.project(&Vector::zeros(self.dim));
        !self.contains(&z)
    }

    /// Minimizes `|z - x| + |z - y|` over the polyhedron. On the affine span
    /// of a face the minimizer is the unfolding point splitting the segment
    /// between the projections of `x` and `y` in the ratio of their heights;
    /// every face is tried.
    pub fn min_two_leg(&self, x: &Vector, y: &Vector) -> Option<(f64, Vector)> {
        let m = self.normals.len();
        let mut best: Option<(f64, Vector)> = None;
        let mut consider = |z: Vector| {
            if self.margin(&z) >= -1e-9 * (1.0 + z.norm()) {
                let f = (&z - x).norm() + (&z - y).norm();
                if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                    best = Some((f, z));
                }
            }
        };
        let mut candidates = |xa: Vector, ya: Vector| {
            let hx = (x - &xa).norm();
            let hy = (y - &ya).norm();
            let s = if hx + hy > 1e-14 { hx / (hx + hy) } else { 0.5 };
            consider(&xa + (&ya - &xa) * s);
            if hx + hy <= 1e-14 {
                consider(xa);
                consider(ya);
            }
        };
        candidates(x.clone(), y.clone());
        for k in 1..=self.dim.min(m) {
            for_each_subset(m, k, |subset| {
                if let (Some(xa), Some(ya)) =
                    (self.project_affine(x, subset), self.project_affine(y, subset))
                {
                    candidates(xa, ya);
                }
            });
        }
        best
    }

    /// Vertices of a bounded polyhedron (empty list if there are none).
    pub fn vertices(&self) -> Vec<Vector> {
        let m = self.normals.len();
        let mut out: Vec<Vector> = Vec::new();
        for_each_subset(m, self.dim, |subset| {
            let a = DMatrix::from_fn(self.dim, self.dim, |r, c| self.normals[subset[r]][c]);
            let b = DVector::from_fn(self.dim, |r, _| self.offsets[subset[r]]);
            let lu = a.lu();
            if lu.determinant().abs() < 1e-12 {
                return;
            }
            if let Some(v) = lu.solve(&b) {
                if self.margin(&v) >= -1e-9 * (1.0 + v.norm())
                    && !out.iter().any(|w| (w - &v).norm() < 1e-9 * (1.0 + v.norm()))
                {
                    out.push(v);
                }
            }
        });
        out
    }
}

/// Solves the square system `a x = b`.
pub fn solve(a: DMatrix<f64>, b: &Vector) -> Option<Vector> {
    let lu = a.lu();
    if lu.determinant().abs() < 1e-14 {
        return None;
    }
    lu.solve(b)
}
