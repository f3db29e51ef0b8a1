//! Finite reflection groups acting on the model flat.
//!
//! The fundamental chamber is `{ v : <a_i, v> >= 0 }` for the simple roots
//! `a_i`. Faces of the chamber are named by the set of walls that contain
//! them, stars by the positive roots that are strictly positive on the face.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg::{angle, for_each_subset, slerp, vector, Polyhedron, Vector, TOL_NUM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// Product of `k` rank-one groups; the chamber is the positive orthant.
    A1Power(usize),
    A2,
    B2,
}

impl GroupKind {
    /// Parses `"A1^k"`, `"A1"`, `"A2"` or `"B2"`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "A2" => return Ok(GroupKind::A2),
            "B2" => return Ok(GroupKind::B2),
            "A1" => return Ok(GroupKind::A1Power(1)),
            _ => {}
        }
        if let Some(k) = name.strip_prefix("A1^") {
            if let Ok(k) = k.parse::<usize>() {
                if (1..=6).contains(&k) {
                    return Ok(GroupKind::A1Power(k));
                }
            }
        }
        Err(GeomError::UnknownGroup(name.to_string()))
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::A1Power(k) => write!(f, "A1^{k}"),
            GroupKind::A2 => write!(f, "A2"),
            GroupKind::B2 => write!(f, "B2"),
        }
    }
}

/// Index of a stored group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Element(pub usize);

/// A face of the model chamber, named by the walls containing it. The empty
/// wall set is the chamber itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FaceType {
    walls: u16,
}

impl FaceType {
    pub const CHAMBER: FaceType = FaceType { walls: 0 };

    pub fn from_walls(walls: &[usize]) -> Self {
        let mut mask = 0u16;
        for &w in walls {
            mask |= 1 << w;
        }
        FaceType { walls: mask }
    }

    pub fn contains_wall(&self, i: usize) -> bool {
        self.walls & (1 << i) != 0
    }

    pub fn walls(&self) -> Vec<usize> {
        (0..16).filter(|&i| self.contains_wall(i)).collect()
    }

    pub fn is_chamber(&self) -> bool {
        self.walls == 0
    }
}

/// Where a direction sits relative to a star.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarClass {
    InThetaStar,
    InOpenStar,
    InClosedStarOnly,
    Outside,
}

#[derive(Debug, Clone)]
pub struct ReflectionGroup {
    kind: GroupKind,
    rank: usize,
    simple_roots: Vec<Vector>,
    positive_roots: Vec<Vector>,
    coweights: Vec<Vector>,
    elements: Vec<DMatrix<f64>>,
    longest: Element,
}

impl ReflectionGroup {
    pub fn new(kind: GroupKind) -> Self {
        let simple_roots = match kind {
            GroupKind::A1Power(k) => (0..k)
                .map(|i| Vector::from_fn(k, |r, _| if r == i { 1.0 } else { 0.0 }))
                .collect(),
            GroupKind::A2 => vec![
                vector(&[1.0, 0.0]),
                vector(&[-0.5, 3f64.sqrt() / 2.0]),
            ],
            GroupKind::B2 => vec![
                vector(&[1.0, -1.0]) / 2f64.sqrt(),
                vector(&[0.0, 1.0]),
            ],
        };
        Self::from_simple_roots(kind, simple_roots)
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::new(GroupKind::parse(name)?))
    }

    fn from_simple_roots(kind: GroupKind, simple_roots: Vec<Vector>) -> Self {
        let rank = simple_roots.len();
        let roots_mat = DMatrix::from_fn(rank, rank, |r, c| simple_roots[r][c]);
        let inv = roots_mat
            .try_inverse()
            .expect("simple roots form a basis of the model flat");
        // Columns of the inverse are dual to the simple roots.
        let coweights: Vec<Vector> = (0..rank).map(|j| inv.column(j).into_owned()).collect();

        let reflections: Vec<DMatrix<f64>> = simple_roots
            .iter()
            .map(|a| DMatrix::identity(rank, rank) - a * a.transpose() * 2.0)
            .collect();
        let mut elements = vec![DMatrix::identity(rank, rank)];
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for s in &reflections {
                let g = s * &elements[i];
                if !elements.iter().any(|h| (h - &g).amax() < 1e-9) {
                    elements.push(g);
                    frontier.push(elements.len() - 1);
                }
            }
        }

        let rho: Vector = coweights.iter().fold(Vector::zeros(rank), |acc, w| acc + w);
        let mut positive_roots: Vec<Vector> = Vec::new();
        for g in &elements {
            for a in &simple_roots {
                let b = g * a;
                if b.dot(&rho) > 0.0 && !positive_roots.iter().any(|c| (c - &b).amax() < 1e-9) {
                    positive_roots.push(b);
                }
            }
        }
        let longest = elements
            .iter()
            .position(|g| (g * &rho + &rho).amax() < 1e-9)
            .expect("finite reflection group has a longest element");

        ReflectionGroup {
            kind,
            rank,
            simple_roots,
            positive_roots,
            coweights,
            elements,
            longest: Element(longest),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn simple_roots(&self) -> &[Vector] {
        &self.simple_roots
    }

    /// Inward unit normals of the fundamental chamber.
    pub fn chamber_normals(&self) -> &[Vector] {
        &self.simple_roots
    }

    pub fn positive_roots(&self) -> &[Vector] {
        &self.positive_roots
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.elements.len()).map(Element)
    }

    pub fn matrix(&self, e: Element) -> &DMatrix<f64> {
        &self.elements[e.0]
    }

    pub fn identity(&self) -> Element {
        Element(0)
    }

    pub fn longest(&self) -> Element {
        self.longest
    }

    pub fn apply(&self, e: Element, v: &Vector) -> Vector {
        &self.elements[e.0] * v
    }

    pub fn compose(&self, a: Element, b: Element) -> Element {
        self.lookup(&(&self.elements[a.0] * &self.elements[b.0]))
    }

    pub fn inverse(&self, e: Element) -> Element {
        self.lookup(&self.elements[e.0].transpose())
    }

    fn lookup(&self, m: &DMatrix<f64>) -> Element {
        Element(
            self.elements
                .iter()
                .position(|h| (h - m).amax() < 1e-7)
                .expect("product of group elements is a group element"),
        )
    }

    /// Edge directions of the chamber (unit fundamental coweights).
    pub fn chamber_vertices(&self) -> Vec<Vector> {
        self.coweights.iter().map(|w| w.normalize()).collect()
    }

    pub fn in_chamber(&self, v: &Vector) -> bool {
        let tol = TOL_NUM * (1.0 + v.norm());
        self.simple_roots.iter().all(|a| a.dot(v) >= -tol)
    }

    /// Dominant representative of the orbit of `v` and an element `w` with
    /// `w v = dominant`.
    pub fn chamber_project(&self, v: &Vector) -> (Vector, Element) {
        let tol = TOL_NUM * (1.0 + v.norm());
        let mut u = v.clone();
        let mut w = DMatrix::identity(self.rank, self.rank);
        let mut steps = 0;
        while let Some(a) = self.simple_roots.iter().find(|a| a.dot(&u) < -tol) {
            let c = 2.0 * a.dot(&u);
            u -= a * c;
            w = (DMatrix::identity(self.rank, self.rank) - a * a.transpose() * 2.0) * w;
            steps += 1;
            assert!(steps <= 4 * self.elements.len(), "chamber projection did not terminate");
        }
        (u, self.lookup(&w))
    }

    /// The type of a nonzero vector: its dominant representative, normalized.
    pub fn type_of(&self, v: &Vector) -> Result<Vector> {
        let n = v.norm();
        if n <= TOL_NUM {
            return Err(GeomError::ZeroVector);
        }
        Ok(self.chamber_project(v).0 / n)
    }

    /// The opposition involution `-w_0` on chamber points.
    pub fn iota(&self, t: &Vector) -> Vector {
        self.chamber_project(&(-t)).0
    }

    /// Validates a face against this group's rank.
    pub fn check_face(&self, face: FaceType) -> Result<()> {
        let walls = face.walls();
        if walls.iter().any(|&w| w >= self.rank) {
            return Err(GeomError::InvalidFace(format!("wall index out of range for rank {}", self.rank)));
        }
        if walls.len() >= self.rank {
            return Err(GeomError::InvalidFace("a face must avoid at least one wall".into()));
        }
        Ok(())
    }

    /// A unit vector in the relative interior of the face.
    pub fn face_center(&self, face: FaceType) -> Vector {
        let mut c = Vector::zeros(self.rank);
        for (j, w) in self.coweights.iter().enumerate() {
            if !face.contains_wall(j) {
                c += w.normalize();
            }
        }
        c.normalize()
    }

    /// The smallest face containing the chamber point `t`.
    pub fn face_of(&self, t: &Vector) -> Result<FaceType> {
        let n = t.norm();
        if n <= TOL_NUM {
            return Err(GeomError::ZeroVector);
        }
        let walls: Vec<usize> = (0..self.rank)
            .filter(|&i| self.simple_roots[i].dot(t) <= TOL_NUM * n)
            .collect();
        Ok(FaceType::from_walls(&walls))
    }

    pub fn iota_face(&self, face: FaceType) -> FaceType {
        let c = self.iota(&self.face_center(face));
        self.face_of(&c).expect("face centers are nonzero")
    }

    /// Positive roots that are strictly positive on the face: the star of the
    /// face is the cone where all of them are nonnegative.
    pub fn star_roots(&self, face: FaceType) -> Vec<Vector> {
        let c = self.face_center(face);
        self.positive_roots
            .iter()
            .filter(|b| b.dot(&c) > 1e-7)
            .cloned()
            .collect()
    }

    /// The parabolic subgroup fixing the face.
    pub fn face_stabilizer(&self, face: FaceType) -> Vec<Element> {
        let c = self.face_center(face);
        self.elements()
            .filter(|&e| (self.apply(e, &c) - &c).amax() < 1e-9)
            .collect()
    }

    /// Angle from a unit vector to the boundary of the canonical star; negative
    /// outside the star.
    pub fn star_margin(&self, face: FaceType, v: &Vector) -> f64 {
        margin_against(&self.star_roots(face), v)
    }

    /// Star of the face is a closed hemisphere.
    pub fn star_is_hemisphere(&self, face: FaceType) -> bool {
        self.star_roots(face).len() == 1
    }

    /// Largest admissible margin: the inradius of the star.
    pub fn max_margin(&self, face: FaceType) -> f64 {
        star_inradius(&self.star_roots(face), self.rank).0
    }

    /// Classifies `v` against the star of the placement `w * face`.
    pub fn star_classify(
        &self,
        placement: &FlagPlacement,
        v: &Vector,
        theta: Option<&ThetaCone>,
    ) -> StarClass {
        let canonical = self.apply(self.inverse(placement.witness), v);
        let m = self.star_margin(placement.face, &canonical);
        if let Some(theta) = theta {
            if theta.face == placement.face && m >= theta.margin - TOL_NUM {
                return StarClass::InThetaStar;
            }
        }
        if m > TOL_NUM {
            StarClass::InOpenStar
        } else if m >= -TOL_NUM {
            StarClass::InClosedStarOnly
        } else {
            StarClass::Outside
        }
    }

    /// The placement `w * face` whose star contains the direction `v`.
    pub fn placement_of(&self, face: FaceType, v: &Vector) -> FlagPlacement {
        let (_, w) = self.chamber_project(v);
        FlagPlacement {
            face,
            witness: self.inverse(w),
        }
    }

    pub fn opposite(&self, p: &FlagPlacement) -> FlagPlacement {
        FlagPlacement {
            face: self.iota_face(p.face),
            witness: self.compose(p.witness, self.longest),
        }
    }

    /// Unit inward normals of the star cone of a placement.
    pub fn placement_normals(&self, p: &FlagPlacement) -> Vec<Vector> {
        self.star_roots(p.face)
            .iter()
            .map(|b| self.apply(p.witness, b))
            .collect()
    }

    pub fn same_placement(&self, a: &FlagPlacement, b: &FlagPlacement) -> bool {
        if a.face != b.face {
            return false;
        }
        let na = self.placement_normals(a);
        let nb = self.placement_normals(b);
        na.len() == nb.len()
            && na
                .iter()
                .all(|x| nb.iter().any(|y| (x - y).amax() < 1e-7))
    }

    /// Irreducible components as sets of simple-root indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.rank;
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(c: &mut Vec<usize>, i: usize) -> usize {
            if c[i] != i {
                let r = find(c, c[i]);
                c[i] = r;
            }
            c[i]
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.simple_roots[i].dot(&self.simple_roots[j]).abs() > 1e-9 {
                    let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                    comp[a] = b;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for i in 0..n {
            let r = find(&mut comp, i);
            match roots.iter().position(|&x| x == r) {
                Some(p) => groups[p].push(i),
                None => {
                    roots.push(r);
                    groups.push(vec![i]);
                }
            }
        }
        groups
    }
}

/// A face of the model chamber placed in the apartment at infinity by a
/// group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FlagPlacement {
    pub face: FaceType,
    pub witness: Element,
}

impl FlagPlacement {
    pub fn canonical(face: FaceType) -> Self {
        FlagPlacement {
            face,
            witness: Element(0),
        }
    }
}

/// `min_b asin(<b, v>)` for a unit vector `v`.
pub fn margin_against(roots: &[Vector], v: &Vector) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        return f64::NEG_INFINITY;
    }
    roots
        .iter()
        .map(|b| (b.dot(v) / n).clamp(-1.0, 1.0).asin())
        .fold(FRAC_PI_2, f64::min)
}

/// Inradius and center of the cone `{ <b, v> >= 0 }`: the direction of the
/// minimum-norm point of `{ <b, u> >= 1 }`.
fn star_inradius(roots: &[Vector], rank: usize) -> (f64, Vector) {
    let mut poly = Polyhedron::new(rank);
    for b in roots {
        poly.push(b, 1.0);
    }
    let u = poly.project(&Vector::zeros(rank));
    let n = u.norm();
    ((1.0 / n).min(1.0).asin(), u / n)
}

/// A margin-parametrized uniform-regularity region: unit directions in the
/// star of the face at angle at least `margin` from the star's boundary.
#[derive(Debug, Clone)]
pub struct ThetaCone {
    face: FaceType,
    margin: f64,
    star_roots: Vec<Vector>,
    center: Vector,
    max_margin: f64,
}

impl ThetaCone {
    pub fn new(group: &ReflectionGroup, face: FaceType, margin: f64) -> Result<Self> {
        group.check_face(face)?;
        let star_roots = group.star_roots(face);
        let (max_margin, center) = star_inradius(&star_roots, group.rank());
        if !(margin > 0.0 && margin < max_margin - 1e-12) {
            return Err(GeomError::InvalidMargin {
                margin,
                max: max_margin,
            });
        }
        let theta = ThetaCone {
            face,
            margin,
            star_roots,
            center,
            max_margin,
        };
        if !theta.weyl_convex_on_samples(group) {
            return Err(GeomError::NotWeylConvex);
        }
        Ok(theta)
    }

    pub fn face(&self) -> FaceType {
        self.face
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Angle between the region and the boundary of the star.
    pub fn eps0(&self) -> f64 {
        self.margin
    }

    pub fn max_margin(&self) -> f64 {
        self.max_margin
    }

    /// The star center: the point of the face deepest inside the star.
    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn star_roots(&self) -> &[Vector] {
        &self.star_roots
    }

    /// Same face, different margin.
    pub fn with_margin(&self, group: &ReflectionGroup, margin: f64) -> Result<Self> {
        ThetaCone::new(group, self.face, margin)
    }

    /// Angle of a (canonical-star) direction from the star boundary.
    pub fn star_margin(&self, v: &Vector) -> f64 {
        margin_against(&self.star_roots, v)
    }

    pub fn contains_type(&self, t: &Vector) -> bool {
        self.star_margin(t) >= self.margin - TOL_NUM
    }

    /// Lower bound for the angular distance of a type to the region.
    pub fn angle_to(&self, t: &Vector) -> f64 {
        (self.margin - self.star_margin(t)).max(0.0)
    }

    /// Nearest direction of the region reached along the great circle from
    /// `t` towards the star center; `t` itself when it is already inside.
    pub fn pull_inside(&self, t: &Vector) -> Vector {
        let t = t.normalize();
        if self.contains_type(&t) {
            return t;
        }
        let total = angle(&t, &self.center);
        let (mut lo, mut hi) = (0.0, total);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.star_margin(&slerp(&t, &self.center, mid)) >= self.margin {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        slerp(&t, &self.center, hi)
    }

    /// Points on the boundary of the region inside the chamber, found by
    /// bisecting from the center towards a barycentric grid of the chamber
    /// (restricted to the chamber edges listed in `vertex_subset`).
    pub fn boundary_samples_on(
        &self,
        group: &ReflectionGroup,
        vertex_subset: &[usize],
        resolution: usize,
    ) -> Vec<Vector> {
        self.grid_samples(group, vertex_subset, resolution, false)
    }

    /// Like [`ThetaCone::boundary_samples_on`], also keeping grid points
    /// already inside the region.
    pub fn region_samples_on(
        &self,
        group: &ReflectionGroup,
        vertex_subset: &[usize],
        resolution: usize,
    ) -> Vec<Vector> {
        self.grid_samples(group, vertex_subset, resolution, true)
    }

    fn grid_samples(
        &self,
        group: &ReflectionGroup,
        vertex_subset: &[usize],
        resolution: usize,
        keep_interior: bool,
    ) -> Vec<Vector> {
        let verts = group.chamber_vertices();
        let k = vertex_subset.len();
        let mut out = Vec::new();
        let mut counts = vec![0usize; k];
        barycentric_grid(k, &mut counts, 0, resolution, &mut |c| {
            let mut p = Vector::zeros(group.rank());
            for (i, &cnt) in c.iter().enumerate() {
                p += &verts[vertex_subset[i]] * cnt as f64;
            }
            let n = p.norm();
            if n == 0.0 {
                return;
            }
            let p = p / n;
            if self.star_margin(&p) < self.margin {
                out.push(self.pull_inside(&p));
            } else if keep_interior {
                out.push(p);
            }
        });
        out
    }

    pub fn boundary_samples(&self, group: &ReflectionGroup, resolution: usize) -> Vec<Vector> {
        let all: Vec<usize> = (0..group.rank()).collect();
        self.boundary_samples_on(group, &all, resolution)
    }

    /// Largest angle from `xi` to a point of the region.
    pub fn radius_about(&self, group: &ReflectionGroup, xi: &Vector) -> f64 {
        let res = sample_resolution(group.rank());
        self.boundary_samples(group, res)
            .iter()
            .map(|t| angle(t, xi))
            .fold(angle(&self.center, xi), f64::max)
    }

    /// Exact `eps0(self, outer)` for margin-parametrized regions of one face:
    /// the star-boundary angle is 1-Lipschitz and decreases at unit rate
    /// towards the nearest wall.
    pub fn eps0_nested(&self, outer: &ThetaCone) -> Result<f64> {
        if outer.face != self.face || outer.margin >= self.margin {
            return Err(GeomError::NotNested);
        }
        Ok(self.margin - outer.margin)
    }

    /// `eps0(self, outer)` by minimizing angles between sampled boundary
    /// points of both regions.
    pub fn eps0_nested_sampled(
        &self,
        group: &ReflectionGroup,
        outer: &ThetaCone,
        resolution: usize,
    ) -> Result<f64> {
        if outer.face != self.face || outer.margin >= self.margin {
            return Err(GeomError::NotNested);
        }
        let inner = self.boundary_samples(group, resolution);
        let outer_pts = outer.boundary_samples(group, resolution);
        let mut best = f64::INFINITY;
        for a in &inner {
            for b in &outer_pts {
                best = best.min(angle(a, b));
            }
        }
        Ok(best)
    }

    /// Samples unit vectors of the symmetrized region and checks midpoints
    /// of pairs stay inside.
    fn weyl_convex_on_samples(&self, group: &ReflectionGroup) -> bool {
        let res = sample_resolution(group.rank()).min(6);
        let mut pts = self.boundary_samples(group, res);
        pts.push(self.center.clone());
        let stab = group.face_stabilizer(self.face);
        let sym: Vec<Vector> = stab
            .iter()
            .flat_map(|&e| pts.iter().map(move |p| group.apply(e, p)))
            .collect();
        let step = (sym.len() / 40).max(1);
        for a in sym.iter().step_by(step) {
            for b in sym.iter().step_by(step) {
                let m = a + b;
                if m.norm() < 1e-9 {
                    continue;
                }
                if self.star_margin(&m) < self.margin - 1e-7 {
                    return false;
                }
            }
        }
        true
    }

    /// The largest-angle deviation `rho(Theta, xi)`; see [`ThetaCone::radius_about`].
    pub fn rho(&self, group: &ReflectionGroup, xi: &Vector) -> f64 {
        self.radius_about(group, xi)
    }
}

fn sample_resolution(rank: usize) -> usize {
    match rank {
        1 | 2 => 64,
        3 => 40,
        4 => 16,
        5 => 10,
        _ => 8,
    }
}

fn barycentric_grid(
    k: usize,
    counts: &mut Vec<usize>,
    i: usize,
    remaining: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if k == 0 {
        return;
    }
    if i == k - 1 {
        counts[i] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[i] = c;
        barycentric_grid(k, counts, i + 1, remaining - c, f);
    }
}

/// Directions of the unit sphere in dimension `dim` on a regular grid:
/// angles for `dim == 2`, a cube-surface grid otherwise.
pub fn sphere_samples(dim: usize, resolution: usize) -> Vec<Vector> {
    if dim == 1 {
        return vec![vector(&[1.0]), vector(&[-1.0])];
    }
    if dim == 2 {
        return (0..resolution)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / resolution as f64;
                vector(&[a.cos(), a.sin()])
            })
            .collect();
    }
    let mut out = Vec::new();
    let n = resolution.max(2);
    for face in 0..dim {
        for sign in [-1.0, 1.0] {
            let free = dim - 1;
            let total = (n + 1).pow(free as u32);
            for idx in 0..total {
                let mut v = Vector::zeros(dim);
                let mut rem = idx;
                let mut j = 0;
                for c in 0..dim {
                    if c == face {
                        v[c] = sign;
                    } else {
                        let g = rem % (n + 1);
                        rem /= n + 1;
                        v[c] = -1.0 + 2.0 * g as f64 / n as f64;
                        j += 1;
                    }
                }
                let _ = j;
                out.push(v.normalize());
            }
        }
    }
    out
}

/// Every `k`-subset of root indices; exported for face enumeration.
pub fn all_faces(group: &ReflectionGroup) -> Vec<FaceType> {
    let mut out = Vec::new();
    for k in 0..group.rank() {
        for_each_subset(group.rank(), k, |s| out.push(FaceType::from_walls(s)));
    }
    out
}
