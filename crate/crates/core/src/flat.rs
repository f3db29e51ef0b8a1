//! A single apartment: the euclidean model flat with its Weyl group.
//!
//! Every star of a face is a convex polyhedral cone, so Weyl cones and
//! diamonds are polyhedra cut out by the placed star roots.

use serde::Serialize;

use crate::coxeter::{
    margin_against, FaceType, FlagPlacement, ReflectionGroup, StarClass, ThetaCone,
};
use crate::error::{GeomError, Result};
use crate::linalg::{angle, Polyhedron, Vector, TOL_NUM};
use crate::space::{Longitudinality, ModelSpace, RegularWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentClass {
    ThetaRegular,
    TauModRegularOnly,
    Irregular,
}

#[derive(Debug, Clone)]
pub struct CoxeterFlat {
    group: ReflectionGroup,
}

/// `V(xm, st(tau+)) ∩ V(xp, st(tau-))`.
#[derive(Debug, Clone)]
pub struct FlatDiamond {
    xm: Vector,
    xp: Vector,
    face: FaceType,
    tau_plus: FlagPlacement,
    tau_minus: FlagPlacement,
    normals: Vec<Vector>,
    poly: Polyhedron,
}

/// Vertex and facet lists for plotting.
#[derive(Debug, Clone, Serialize)]
pub struct DiamondExport {
    pub vertices: Vec<Vec<f64>>,
    pub facet_normals: Vec<Vec<f64>>,
    pub facet_offsets: Vec<f64>,
}

impl FlatDiamond {
    pub fn tips(&self) -> (&Vector, &Vector) {
        (&self.xm, &self.xp)
    }

    pub fn face(&self) -> FaceType {
        self.face
    }

    pub fn tau_plus(&self) -> FlagPlacement {
        self.tau_plus
    }

    pub fn tau_minus(&self) -> FlagPlacement {
        self.tau_minus
    }

    /// Unit inward normals of `st(tau+)`.
    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.poly
    }

    /// The star is a half-space: the diamond is a slab.
    pub fn is_hemisphere(&self) -> bool {
        self.normals.len() == 1
    }

    pub fn contains(&self, y: &Vector) -> bool {
        self.poly.contains(y)
    }

    pub fn distance(&self, y: &Vector) -> f64 {
        self.poly.distance(y)
    }

    pub fn project(&self, y: &Vector) -> Vector {
        self.poly.project(y)
    }

    /// Nonnegative iff `y` lies in the Theta-diamond.
    pub fn theta_margin(&self, theta: &ThetaCone, y: &Vector) -> f64 {
        let s = theta.margin().sin();
        let from_minus = y - &self.xm;
        let to_plus = &self.xp - y;
        let m1 = self.min_normal(&from_minus) - s * from_minus.norm();
        let m2 = self.min_normal(&to_plus) - s * to_plus.norm();
        m1.min(m2)
    }

    fn min_normal(&self, v: &Vector) -> f64 {
        self.normals
            .iter()
            .map(|g| g.dot(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Direction class of `v` with respect to `(tau-, tau+)`.
    pub fn classify_direction(&self, v: &Vector) -> Longitudinality {
        let n = v.norm();
        if n <= TOL_NUM {
            return Longitudinality::NonLongitudinal;
        }
        let lo = self.min_normal(v) / n;
        let hi = self
            .normals
            .iter()
            .map(|g| g.dot(v))
            .fold(f64::NEG_INFINITY, f64::max)
            / n;
        if lo > TOL_NUM {
            Longitudinality::Longitudinal
        } else if hi < -TOL_NUM {
            Longitudinality::AntiLongitudinal
        } else {
            Longitudinality::NonLongitudinal
        }
    }

    /// The convex pieces `V(xm, C) ∩ V(xp, -C')` over chambers `C, C'` of
    /// `st(tau+)`; their union is the diamond.
    pub fn pieces(&self, group: &ReflectionGroup) -> Vec<Polyhedron> {
        let stab = group.face_stabilizer(self.face);
        let chambers: Vec<Vec<Vector>> = stab
            .iter()
            .map(|&u| {
                let g = group.compose(self.tau_plus.witness, u);
                group
                    .simple_roots()
                    .iter()
                    .map(|a| group.apply(g, a))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for c1 in &chambers {
            for c2 in &chambers {
                let mut p = Polyhedron::new(group.rank());
                for a in c1 {
                    p.push(a, a.dot(&self.xm));
                }
                for a in c2 {
                    p.push(&-a, -a.dot(&self.xp));
                }
                if !p.is_empty() {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Vertices of the diamond; empty when it is unbounded.
    pub fn vertices(&self) -> Vec<Vector> {
        if self.is_bounded() {
            self.poly.vertices()
        } else {
            Vec::new()
        }
    }

    /// Bounded iff the star normals span the flat.
    pub fn is_bounded(&self) -> bool {
        let dim = self.xm.len();
        let m = nalgebra::DMatrix::from_fn(dim, self.normals.len(), |r, c| self.normals[c][r]);
        m.rank(1e-9) == dim
    }

    pub fn export(&self) -> DiamondExport {
        DiamondExport {
            vertices: self.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
            facet_normals: self
                .poly
                .normals()
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect(),
            facet_offsets: self.poly.offsets().to_vec(),
        }
    }
}

/// The Weyl hull: a parallelepiped spanned by the placed face edges.
#[derive(Debug, Clone)]
pub struct WeylHull {
    base: Vector,
    /// Edge vectors `c_j w omega_j` with their dual functionals `w alpha_j`.
    edges: Vec<(Vector, Vector)>,
}

impl WeylHull {
    pub fn vertices(&self) -> Vec<Vector> {
        let m = self.edges.len();
        (0..1usize << m)
            .map(|mask| {
                let mut v = self.base.clone();
                for (j, (e, _)) in self.edges.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        v += e;
                    }
                }
                v
            })
            .collect()
    }

    pub fn contains(&self, y: &Vector) -> bool {
        let u = y - &self.base;
        let tol = 1e-9 * (1.0 + u.norm());
        let mut rest = u.clone();
        for (e, dual) in &self.edges {
            // dual is normalized so that <dual, e> = 1.
            let a = dual.dot(&u);
            if a < -tol || a > 1.0 + tol {
                return false;
            }
            rest -= e * a;
        }
        rest.norm() <= tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThicknessReport {
    pub b_mid: f64,
    pub bound: f64,
    pub b_tips: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossSectionReport {
    pub diameter: f64,
    pub bound: f64,
    pub rho0: f64,
    pub length: f64,
    pub section_length: f64,
    /// The split factor is the whole flat.
    pub trivial_splitting: bool,
    pub diameter_ok: bool,
    pub comparable_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub perturbation: f64,
    pub hausdorff: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StraightReport {
    pub segments: usize,
    pub min_chord_margin: f64,
    pub min_membership_margin: f64,
    pub chords_regular: bool,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetourReport {
    pub length: f64,
    pub chord: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CoxeterFlat {
    pub fn new(group: ReflectionGroup) -> Self {
        CoxeterFlat { group }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::new(ReflectionGroup::from_name(name)?))
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(GeomError::DimensionMismatch {
                expected: self.rank(),
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn segment_regularity(
        &self,
        x: &Vector,
        y: &Vector,
        theta: &ThetaCone,
    ) -> Result<SegmentClass> {
        let u = y - x;
        if u.norm() <= TOL_NUM {
            return Err(GeomError::DegenerateSegment);
        }
        let t = self.group.type_of(&u)?;
        let p = FlagPlacement::canonical(theta.face());
        Ok(match self.group.star_classify(&p, &t, Some(theta)) {
            StarClass::InThetaStar => SegmentClass::ThetaRegular,
            StarClass::InOpenStar => SegmentClass::TauModRegularOnly,
            _ => SegmentClass::Irregular,
        })
    }

    /// The placement `tau+` of a `face`-regular segment.
    pub fn placement_of_segment(&self, x: &Vector, y: &Vector, face: FaceType) -> Result<FlagPlacement> {
        self.group.check_face(face)?;
        let u = y - x;
        if u.norm() <= TOL_NUM {
            return Err(GeomError::DegenerateSegment);
        }
        let t = self.group.type_of(&u)?;
        if self.group.star_margin(face, &t) <= TOL_NUM {
            return Err(GeomError::IrregularSegment);
        }
        Ok(self.group.placement_of(face, &u))
    }

    /// `V(x, st(tau))` as a polyhedron.
    pub fn cone(&self, x: &Vector, tau: &FlagPlacement) -> Polyhedron {
        let mut p = Polyhedron::new(self.rank());
        for g in self.group.placement_normals(tau) {
            p.push(&g, g.dot(x));
        }
        p
    }

    pub fn cone_membership(&self, x: &Vector, tau: &FlagPlacement, y: &Vector) -> bool {
        self.cone(x, tau).contains(y)
    }

    /// Nonnegative iff `y` lies in the Theta-cone `V(x, st_Theta(tau))`.
    pub fn theta_cone_margin(&self, x: &Vector, tau: &FlagPlacement, theta: &ThetaCone, y: &Vector) -> f64 {
        let u = y - x;
        let s = theta.margin().sin();
        self.group
            .placement_normals(tau)
            .iter()
            .map(|g| g.dot(&u))
            .fold(f64::INFINITY, f64::min)
            - s * u.norm()
    }

    pub fn diamond(&self, xm: &Vector, xp: &Vector, face: FaceType) -> Result<FlatDiamond> {
        self.check_dim(xm)?;
        self.check_dim(xp)?;
        let tau_plus = self.placement_of_segment(xm, xp, face)?;
        let tau_minus = self.group.opposite(&tau_plus);
        let normals = self.group.placement_normals(&tau_plus);
        let mut poly = Polyhedron::new(self.rank());
        for g in &normals {
            poly.push(g, g.dot(xm));
        }
        for g in &normals {
            poly.push(&-g, -g.dot(xp));
        }
        Ok(FlatDiamond {
            xm: xm.clone(),
            xp: xp.clone(),
            face,
            tau_plus,
            tau_minus,
            normals,
            poly,
        })
    }

    /// Requires the type of `xp - xm` to lie in the interior of `face`.
    pub fn weyl_hull(&self, xm: &Vector, xp: &Vector, face: FaceType) -> Result<WeylHull> {
        let u = xp - xm;
        if u.norm() <= TOL_NUM {
            return Ok(WeylHull {
                base: xm.clone(),
                edges: Vec::new(),
            });
        }
        let t = self.group.type_of(&u)?;
        if self.group.face_of(&t)? != face {
            return Err(GeomError::TypeNotInteriorToFace);
        }
        let (dominant, w) = self.group.chamber_project(&u);
        let winv = self.group.inverse(w);
        let verts = self.group.chamber_vertices();
        let mut edges = Vec::new();
        for j in 0..self.rank() {
            if face.contains_wall(j) {
                continue;
            }
            let a = &self.group.simple_roots()[j];
            let omega_hat = &verts[j];
            // dominant = sum_j c_j omega_j, and <a_j, omega_hat_j> scales it.
            let c = a.dot(&dominant) / a.dot(omega_hat);
            let e = self.group.apply(winv, &(omega_hat * c));
            let dual = self.group.apply(winv, a) / (a.dot(omega_hat) * c);
            edges.push((e, dual));
        }
        Ok(WeylHull {
            base: xm.clone(),
            edges,
        })
    }

    pub fn diamond_thickness_check(
        &self,
        xm: &Vector,
        xp: &Vector,
        theta: &ThetaCone,
    ) -> Result<ThicknessReport> {
        if self.segment_regularity(xm, xp, theta)? != SegmentClass::ThetaRegular {
            return Err(GeomError::IrregularSegment);
        }
        let dia = self.diamond(xm, xp, theta.face())?;
        let b = |y: &Vector| {
            dia.normals
                .iter()
                .flat_map(|g| [-g.dot(&(y - xm)), -g.dot(&(xp - y))])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mid = (xm + xp) * 0.5;
        let b_mid = b(&mid);
        let bound = -0.5 * (xp - xm).norm() * theta.eps0().sin();
        Ok(ThicknessReport {
            b_mid,
            bound,
            b_tips: b(xm).max(b(xp)),
            pass: b_mid <= bound + TOL_NUM,
        })
    }

    /// Simple-root indices of the smallest join factor containing `face`.
    pub fn split_factor(&self, face: FaceType) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .group
            .components()
            .into_iter()
            .filter(|c| c.iter().any(|&i| !face.contains_wall(i)))
            .flatten()
            .collect();
        idx.sort_unstable();
        idx
    }

    /// Orthonormal basis (as columns) of the span of the given simple roots.
    fn factor_basis(&self, roots: &[usize]) -> Vec<Vector> {
        let mut basis: Vec<Vector> = Vec::new();
        for &i in roots {
            let mut v = self.group.simple_roots()[i].clone();
            for b in &basis {
                v -= b * b.dot(&v);
            }
            basis.push(v.normalize());
        }
        basis
    }

    /// The cross section of the diamond in the split factor, in coordinates
    /// of an orthonormal basis of that factor.
    fn cross_section(&self, dia: &FlatDiamond, basis: &[Vector]) -> (Polyhedron, Vector, Vector) {
        let coords = |v: &Vector| Vector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(v)));
        let mut p = Polyhedron::new(basis.len());
        for (a, off) in dia.poly.normals().iter().zip(dia.poly.offsets()) {
            p.push(&coords(a), *off);
        }
        (p, coords(&dia.xm), coords(&dia.xp))
    }

    pub fn cross_section_diameter_check(
        &self,
        xm: &Vector,
        xp: &Vector,
        theta: &ThetaCone,
    ) -> Result<CrossSectionReport> {
        if self.segment_regularity(xm, xp, theta)? != SegmentClass::ThetaRegular {
            return Err(GeomError::IrregularSegment);
        }
        let dia = self.diamond(xm, xp, theta.face())?;
        let factor = self.split_factor(theta.face());
        let basis = self.factor_basis(&factor);
        let (section, x1m, x1p) = self.cross_section(&dia, &basis);
        let verts = section.vertices();
        if verts.is_empty() {
            return Err(GeomError::Unsupported("cross section is unbounded".into()));
        }
        let mut diameter: f64 = 0.0;
        for a in &verts {
            for b in &verts {
                diameter = diameter.max((a - b).norm());
            }
        }
        let omegas = self.group.chamber_vertices();
        let res = match factor.len() {
            1 | 2 => 64,
            3 => 24,
            _ => 10,
        };
        let rho0 = theta
            .region_samples_on(&self.group, &factor, res)
            .iter()
            .map(|t| {
                factor
                    .iter()
                    .map(|&j| angle(t, &omegas[j]))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let length = (xp - xm).norm();
        let section_length = (&x1p - &x1m).norm();
        let bound = 2.0 / rho0.cos() * section_length;
        let s = theta.eps0().sin();
        Ok(CrossSectionReport {
            diameter,
            bound,
            rho0,
            length,
            section_length,
            trivial_splitting: factor.len() == self.rank(),
            diameter_ok: diameter <= bound * (1.0 + 1e-9) + TOL_NUM,
            comparable_ok: length * s <= section_length + TOL_NUM
                && section_length <= length + TOL_NUM,
        })
    }

    /// Hausdorff distance between two diamonds of the same parallel set,
    /// exact over cross-section vertices.
    pub fn diamond_continuity_check(
        &self,
        (xm, xp): (&Vector, &Vector),
        (ym, yp): (&Vector, &Vector),
        face: FaceType,
    ) -> Result<ContinuityReport> {
        let d1 = self.diamond(xm, xp, face)?;
        let d2 = self.diamond(ym, yp, face)?;
        if !self.group.same_placement(&d1.tau_plus, &d2.tau_plus) {
            return Err(GeomError::Unsupported(
                "diamonds span different parallel sets".into(),
            ));
        }
        let perturbation = (ym - xm).norm().max((yp - xp).norm());
        let basis = self.factor_basis(&self.split_factor(face));
        let (s1, _, _) = self.cross_section(&d1, &basis);
        let (s2, _, _) = self.cross_section(&d2, &basis);
        let one_way = |a: &Polyhedron, b: &Polyhedron| {
            a.vertices()
                .iter()
                .map(|v| b.distance(v))
                .fold(0.0, f64::max)
        };
        let hausdorff = one_way(&s1, &s2).max(one_way(&s2, &s1));
        Ok(ContinuityReport {
            perturbation,
            hausdorff,
            ratio: if perturbation > 0.0 {
                hausdorff / perturbation
            } else {
                0.0
            },
        })
    }

    pub fn straight_path_check(&self, points: &[Vector], theta: &ThetaCone) -> Result<StraightReport> {
        if points.len() < 2 {
            return Err(GeomError::DegenerateSegment);
        }
        let face = theta.face();
        let mut placements = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            if self.segment_regularity(&w[0], &w[1], theta)? != SegmentClass::ThetaRegular {
                return Err(GeomError::IrregularSegment);
            }
            placements.push(self.placement_of_segment(&w[0], &w[1], face)?);
        }
        for i in 1..placements.len() {
            if !self.group.same_placement(&placements[i - 1], &placements[i]) {
                return Err(GeomError::NotStraight(i));
            }
        }
        let mut min_chord_margin = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let t = self.group.type_of(&(&points[j] - &points[i]))?;
                min_chord_margin = min_chord_margin.min(theta.star_margin(&t) - theta.margin());
            }
        }
        let dia = self.diamond(&points[0], &points[points.len() - 1], face)?;
        let min_membership_margin = points
            .iter()
            .map(|p| dia.theta_margin(theta, p))
            .fold(f64::INFINITY, f64::min);
        Ok(StraightReport {
            segments: points.len() - 1,
            min_chord_margin,
            min_membership_margin,
            chords_regular: min_chord_margin >= -TOL_NUM,
            inside: min_membership_margin >= -TOL_NUM,
        })
    }

    /// `1 / cos(rho)` with `rho` the angular radius of Theta about its
    /// center.
    pub fn bounded_detour_constant(&self, theta: &ThetaCone) -> f64 {
        bounded_detour_constant(&self.group, theta)
    }

    pub fn detour_check(&self, points: &[Vector], theta: &ThetaCone) -> Result<DetourReport> {
        let n = points.len();
        if n < 2 {
            return Err(GeomError::DegenerateSegment);
        }
        let tau = self
            .placement_of_segment(&points[0], &points[n - 1], theta.face())
            .map_err(|_| GeomError::NotLongitudinal(0))?;
        let normals = self.group.placement_normals(&tau);
        let mut length = 0.0;
        for (i, w) in points.windows(2).enumerate() {
            let u = &w[1] - &w[0];
            if margin_against(&normals, &u) < theta.margin() - TOL_NUM {
                return Err(GeomError::NotLongitudinal(i));
            }
            length += u.norm();
        }
        let chord = (&points[n - 1] - &points[0]).norm();
        let bound = self.bounded_detour_constant(theta);
        let ratio = length / chord;
        Ok(DetourReport {
            length,
            chord,
            ratio,
            bound,
            pass: ratio <= bound * (1.0 + 1e-9),
        })
    }
}

pub fn bounded_detour_constant(group: &ReflectionGroup, theta: &ThetaCone) -> f64 {
    1.0 / theta.rho(group, theta.center()).cos()
}

impl ModelSpace for CoxeterFlat {
    type Point = Vector;
    type Orientation = FlagPlacement;

    fn group(&self) -> &ReflectionGroup {
        &self.group
    }

    fn distance(&self, x: &Vector, y: &Vector) -> f64 {
        (y - x).norm()
    }

    fn delta_distance(&self, x: &Vector, y: &Vector) -> Vector {
        self.group.chamber_project(&(y - x)).0
    }

    fn interpolate(&self, x: &Vector, y: &Vector, s: f64) -> Vector {
        x + (y - x) * s
    }

    fn diamond_distance(&self, xm: &Vector, xp: &Vector, face: FaceType, z: &Vector) -> Result<f64> {
        Ok(self.diamond(xm, xp, face)?.distance(z))
    }

    fn diamond_distances(&self, xm: &Vector, xp: &Vector, face: FaceType, zs: &[Vector]) -> Result<Vec<f64>> {
        let dia = self.diamond(xm, xp, face)?;
        Ok(zs.iter().map(|z| dia.distance(z)).collect())
    }

    fn theta_diamond_margin(&self, xm: &Vector, xp: &Vector, theta: &ThetaCone, z: &Vector) -> Result<f64> {
        Ok(self.diamond(xm, xp, theta.face())?.theta_margin(theta, z))
    }

    /// Rotates the chord towards Theta inside its plane and splits the
    /// correction between both endpoints.
    fn regular_witness(&self, x: &Vector, y: &Vector, theta: &ThetaCone) -> Option<RegularWitness<Vector>> {
        let u = y - x;
        let len = u.norm();
        if len <= TOL_NUM {
            return None;
        }
        let (dominant, w) = self.group.chamber_project(&u);
        let t = dominant / len;
        if theta.contains_type(&t) {
            return Some(RegularWitness {
                start: x.clone(),
                end: y.clone(),
                displacement: 0.0,
            });
        }
        let target = theta.pull_inside(&t);
        let alpha = angle(&t, &target);
        if alpha >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        let winv = self.group.inverse(w);
        let u2 = self.group.apply(winv, &target) * (len * alpha.cos());
        let shift = (&u2 - &u) * 0.5;
        Some(RegularWitness {
            start: x - &shift,
            end: y + &shift,
            displacement: shift.norm(),
        })
    }

    fn orientation_of(&self, x: &Vector, y: &Vector, face: FaceType) -> Result<FlagPlacement> {
        self.placement_of_segment(x, y, face)
    }

    fn classify_segment(&self, tau: &FlagPlacement, x: &Vector, y: &Vector) -> Result<Longitudinality> {
        let normals = self.group.placement_normals(tau);
        let u = y - x;
        let n = u.norm();
        if n <= TOL_NUM {
            return Ok(Longitudinality::NonLongitudinal);
        }
        let lo = normals.iter().map(|g| g.dot(&u)).fold(f64::INFINITY, f64::min) / n;
        let hi = normals.iter().map(|g| g.dot(&u)).fold(f64::NEG_INFINITY, f64::max) / n;
        Ok(if lo > TOL_NUM {
            Longitudinality::Longitudinal
        } else if hi < -TOL_NUM {
            Longitudinality::AntiLongitudinal
        } else {
            Longitudinality::NonLongitudinal
        })
    }
}
