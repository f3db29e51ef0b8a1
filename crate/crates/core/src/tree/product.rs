//! Products of metric trees: euclidean buildings with Weyl group `A1^k`.
//!
//! A face of the `A1^k` chamber is determined by its support `S`, the
//! factors whose walls it avoids. A flag of that type picks one end in each
//! factor of `S`.

use serde::Serialize;

use crate::coxeter::{FaceType, GroupKind, ReflectionGroup, ThetaCone};
use crate::error::{GeomError, Result};
use crate::linalg::{Vector, TOL_NUM};
use crate::space::{Longitudinality, ModelSpace, RegularWitness};
use crate::tree::metric_tree::{MetricTree, TreePoint};

pub type ProductPoint = Vec<TreePoint>;

#[derive(Debug, Clone)]
pub struct TreeProduct {
    factors: Vec<MetricTree>,
    group: ReflectionGroup,
}

/// Ends chosen in the support factors; `ends[j]` belongs to `support[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProductFlag {
    support: Vec<usize>,
    ends: Vec<usize>,
}

impl ProductFlag {
    pub fn new(support: Vec<usize>, ends: Vec<usize>) -> Result<Self> {
        if support.len() != ends.len() || support.is_empty() {
            return Err(GeomError::InvalidFace("support and ends must match and be nonempty".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GeomError::InvalidFace("support must be strictly increasing".into()));
        }
        Ok(ProductFlag { support, ends })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    pub fn end_for(&self, factor: usize) -> Option<usize> {
        self.support
            .iter()
            .position(|&i| i == factor)
            .map(|j| self.ends[j])
    }

    /// The face type of the flag in the `A1^rank` chamber.
    pub fn face(&self, rank: usize) -> FaceType {
        face_of_support(rank, &self.support)
    }
}

pub fn face_of_support(rank: usize, support: &[usize]) -> FaceType {
    let walls: Vec<usize> = (0..rank).filter(|i| !support.contains(i)).collect();
    FaceType::from_walls(&walls)
}

pub fn support_of_face(rank: usize, face: FaceType) -> Vec<usize> {
    (0..rank).filter(|&i| !face.contains_wall(i)).collect()
}

/// `[x_i, y_i]` in the support factors, whole trees elsewhere.
#[derive(Debug, Clone)]
pub struct ProductDiamond {
    xm: ProductPoint,
    xp: ProductPoint,
    support: Vec<usize>,
}

impl ProductDiamond {
    pub fn tips(&self) -> (&ProductPoint, &ProductPoint) {
        (&self.xm, &self.xp)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn distance(&self, x: &TreeProduct, z: &ProductPoint) -> f64 {
        self.support
            .iter()
            .map(|&i| {
                let d = x.factors[i].distance_to_segment(&z[i], &self.xm[i], &self.xp[i]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &TreeProduct, z: &ProductPoint) -> bool {
        self.distance(x, z) <= TOL_NUM
    }

    pub fn project(&self, x: &TreeProduct, z: &ProductPoint) -> ProductPoint {
        let mut out = z.clone();
        for &i in &self.support {
            out[i] = x.factors[i].project_segment(&z[i], &self.xm[i], &self.xp[i]);
        }
        out
    }

    /// Position of a diamond point in the box `prod_S [0, d(x_i, y_i)]`.
    pub fn box_coordinates(&self, x: &TreeProduct, z: &ProductPoint) -> Vector {
        Vector::from_iterator(
            self.support.len(),
            self.support.iter().map(|&i| x.factors[i].distance(&self.xm[i], &z[i])),
        )
    }

    /// Side lengths of the box.
    pub fn box_sides(&self, x: &TreeProduct) -> Vector {
        self.box_coordinates(x, &self.xp)
    }

    pub fn theta_margin(&self, x: &TreeProduct, theta: &ThetaCone, z: &ProductPoint) -> f64 {
        let mut off: f64 = 0.0;
        for &i in &self.support {
            off = off.max(x.factors[i].distance_to_segment(&z[i], &self.xm[i], &self.xp[i]));
        }
        if off > TOL_NUM {
            return -off;
        }
        let s = theta.margin().sin();
        let mut lo_m = f64::INFINITY;
        let mut lo_p = f64::INFINITY;
        for &i in &self.support {
            lo_m = lo_m.min(x.factors[i].distance(&self.xm[i], &z[i]));
            lo_p = lo_p.min(x.factors[i].distance(&z[i], &self.xp[i]));
        }
        (lo_m - s * x.distance(&self.xm, z)).min(lo_p - s * x.distance(z, &self.xp))
    }
}

/// `P(tau-, tau+)`: lines between opposite ends in the support factors,
/// whole trees elsewhere.
#[derive(Debug, Clone)]
pub struct ParallelSet {
    minus: ProductFlag,
    plus: ProductFlag,
}

impl ParallelSet {
    pub fn tau_minus(&self) -> &ProductFlag {
        &self.minus
    }

    pub fn tau_plus(&self) -> &ProductFlag {
        &self.plus
    }

    pub fn support(&self) -> &[usize] {
        &self.plus.support
    }

    /// Per-factor distances to the lines, zero off the support.
    pub fn factor_distances(&self, x: &TreeProduct, z: &ProductPoint) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for (j, &i) in self.plus.support.iter().enumerate() {
            out[i] = x.factors[i].distance_to_line(&z[i], self.minus.ends[j], self.plus.ends[j]);
        }
        out
    }

    pub fn distance(&self, x: &TreeProduct, z: &ProductPoint) -> f64 {
        self.factor_distances(x, z).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &TreeProduct, z: &ProductPoint) -> bool {
        self.factor_distances(x, z).iter().all(|&d| d <= TOL_NUM)
    }

    pub fn project(&self, x: &TreeProduct, z: &ProductPoint) -> ProductPoint {
        let mut out = z.clone();
        for (j, &i) in self.plus.support.iter().enumerate() {
            out[i] = x.factors[i].project_line(&z[i], self.minus.ends[j], self.plus.ends[j]);
        }
        out
    }
}

/// A unit-speed ray: factor `i` moves at speed `weights[i]` towards `ends[i]`.
#[derive(Debug, Clone)]
pub struct ProductRay {
    pub base: ProductPoint,
    pub weights: Vec<f64>,
    pub ends: Vec<usize>,
}

impl ProductRay {
    pub fn new(base: ProductPoint, weights: Vec<f64>, ends: Vec<usize>) -> Result<Self> {
        if weights.len() != base.len() || ends.len() != base.len() {
            return Err(GeomError::DimensionMismatch {
                expected: base.len(),
                got: weights.len().min(ends.len()),
            });
        }
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm <= TOL_NUM || weights.iter().any(|&w| w < 0.0) {
            return Err(GeomError::ZeroVector);
        }
        Ok(ProductRay {
            base,
            weights: weights.iter().map(|w| w / norm).collect(),
            ends,
        })
    }

    pub fn point(&self, x: &TreeProduct, t: f64) -> ProductPoint {
        self.base
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if self.weights[i] == 0.0 {
                    *b
                } else {
                    x.factors[i].ray_from(b, self.ends[i], self.weights[i] * t)
                }
            })
            .collect()
    }

    /// Type of the ray direction in the `A1^k` chamber.
    pub fn direction_type(&self) -> Vector {
        Vector::from_vec(self.weights.clone())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiveReport {
    pub distance_to_parallel_set: f64,
    pub entry_time: f64,
    pub bound: f64,
    /// Angle at the entry point between the ray back to `x` and `P`.
    pub entry_angle: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeaveReport {
    pub exit_time: Option<f64>,
    pub min_slack: f64,
    pub vacuous: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub flag: ProductFlag,
    /// Coincidence radius of each flag with the last one (capped).
    pub radii: Vec<f64>,
    pub max_distance_to_cone: f64,
    pub within: bool,
}

/// Cap for infinite coincidence radii in reports.
pub const RADIUS_CAP: f64 = 1e12;

impl TreeProduct {
    pub fn new(factors: Vec<MetricTree>) -> Result<Self> {
        let k = factors.len();
        if !(1..=6).contains(&k) {
            return Err(GeomError::Unsupported(format!("{k} tree factors (1 to 6 supported)")));
        }
        Ok(TreeProduct {
            factors,
            group: ReflectionGroup::new(GroupKind::A1Power(k)),
        })
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &MetricTree {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[MetricTree] {
        &self.factors
    }

    pub fn factor_distances(&self, x: &ProductPoint, y: &ProductPoint) -> Vec<f64> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, t)| t.distance(&x[i], &y[i]))
            .collect()
    }

    /// The flag of type `face` whose cone at `x` contains `y` in its open star.
    pub fn flag_of_segment(&self, x: &ProductPoint, y: &ProductPoint, face: FaceType) -> Result<ProductFlag> {
        self.group.check_face(face)?;
        let support = support_of_face(self.rank(), face);
        let mut ends = Vec::with_capacity(support.len());
        for &i in &support {
            if self.factors[i].distance(&x[i], &y[i]) <= TOL_NUM {
                return Err(GeomError::IrregularSegment);
            }
            let e = self.factors[i].end_through(&x[i], &y[i], None).ok_or_else(|| {
                GeomError::Unsupported(format!("factor {i}: no end beyond the segment"))
            })?;
            ends.push(e);
        }
        ProductFlag::new(support, ends)
    }

    /// Flag of the given support best matching the direction from `x` to `y`,
    /// keeping the ends of `prefer` on ties.
    pub fn flag_towards(
        &self,
        x: &ProductPoint,
        y: &ProductPoint,
        support: &[usize],
        prefer: Option<&ProductFlag>,
    ) -> Result<ProductFlag> {
        let mut ends = Vec::with_capacity(support.len());
        for &i in support {
            let p = prefer.and_then(|f| f.end_for(i));
            let e = self.factors[i]
                .end_towards(&x[i], &y[i], p)
                .ok_or_else(|| GeomError::Unsupported(format!("factor {i} has no ends")))?;
            ends.push(e);
        }
        ProductFlag::new(support.to_vec(), ends)
    }

    pub fn product_cone_membership(&self, x: &ProductPoint, tau: &ProductFlag, y: &ProductPoint) -> bool {
        tau.support
            .iter()
            .zip(&tau.ends)
            .all(|(&i, &e)| self.factors[i].ray_position(&x[i], e, &y[i]).is_some())
    }

    pub fn cone_distance(&self, x: &ProductPoint, tau: &ProductFlag, y: &ProductPoint) -> f64 {
        tau.support
            .iter()
            .zip(&tau.ends)
            .map(|(&i, &e)| {
                let d = self.factors[i].distance_to_ray(&y[i], &x[i], e);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn product_diamond(&self, x: &ProductPoint, y: &ProductPoint, face: FaceType) -> Result<ProductDiamond> {
        self.group.check_face(face)?;
        let support = support_of_face(self.rank(), face);
        for &i in &support {
            if self.factors[i].distance(&x[i], &y[i]) <= TOL_NUM {
                return Err(GeomError::IrregularSegment);
            }
        }
        Ok(ProductDiamond {
            xm: x.clone(),
            xp: y.clone(),
            support,
        })
    }

    pub fn parallel_set(&self, minus: ProductFlag, plus: ProductFlag) -> Result<ParallelSet> {
        if minus.support != plus.support {
            return Err(GeomError::EndsNotOpposite);
        }
        if minus.ends.iter().zip(&plus.ends).any(|(a, b)| a == b) {
            return Err(GeomError::EndsNotOpposite);
        }
        Ok(ParallelSet { minus, plus })
    }

    /// Both flags are seen from `x` in opposite directions.
    pub fn x_opposite(&self, x: &ProductPoint, minus: &ProductFlag, plus: &ProductFlag) -> bool {
        minus.support == plus.support
            && minus
                .support
                .iter()
                .enumerate()
                .all(|(j, &i)| self.factors[i].on_line(&x[i], minus.ends[j], plus.ends[j]))
    }

    /// Flags of equal support are opposite when they differ in every factor.
    pub fn flags_opposite(&self, a: &ProductFlag, b: &ProductFlag) -> bool {
        a.support == b.support && a.ends.iter().zip(&b.ends).all(|(p, q)| p != q)
    }

    /// A flag opposite to `tau` as seen from `x`, if one exists.
    pub fn opposite_at(&self, x: &ProductPoint, tau: &ProductFlag) -> Option<ProductFlag> {
        let mut ends = Vec::with_capacity(tau.ends.len());
        for (j, &i) in tau.support.iter().enumerate() {
            let t = &self.factors[i];
            let e = (0..t.end_count()).find(|&e| t.on_line(&x[i], e, tau.ends[j]))?;
            ends.push(e);
        }
        Some(ProductFlag {
            support: tau.support.clone(),
            ends,
        })
    }

    /// Ray diving into a parallel set.
    pub fn ray_dive_check(&self, ray: &ProductRay, p: &ParallelSet, theta: &ThetaCone) -> Result<DiveReport> {
        let support = p.support().to_vec();
        if theta.face() != face_of_support(self.rank(), &support) {
            return Err(GeomError::InvalidFace("theta face differs from the parallel set type".into()));
        }
        let s = theta.margin().sin();
        for (j, &i) in support.iter().enumerate() {
            if ray.ends[i] != p.plus.ends[j] || ray.weights[i] < s - TOL_NUM {
                return Err(GeomError::RayNotRegular);
            }
        }
        let dist = p.distance(self, &ray.base);
        // Per factor: first time the ray is on the line, by bisection.
        let mut entry: f64 = 0.0;
        let mut factor_entry = vec![0.0; self.rank()];
        for (j, &i) in support.iter().enumerate() {
            let t = &self.factors[i];
            let (a, b) = (p.minus.ends[j], p.plus.ends[j]);
            let base = &ray.base[i];
            let on = |u: f64| t.distance_to_line(&t.ray_from(base, b, u), a, b) <= 1e-12;
            let e = if on(0.0) {
                0.0
            } else {
                let mut hi = 1.0;
                while !on(hi) {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if on(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-14 * hi.max(1.0) {
                        break;
                    }
                }
                hi
            };
            factor_entry[i] = e;
            entry = entry.max(e / ray.weights[i]);
        }
        let bound = dist / s;
        let entry_angle = (entry > TOL_NUM).then(|| {
            let off: f64 = support
                .iter()
                .filter(|&&i| factor_entry[i] > TOL_NUM && factor_entry[i] / ray.weights[i] >= entry - 1e-9 * (1.0 + entry))
                .map(|&i| ray.weights[i] * ray.weights[i])
                .sum();
            off.sqrt().min(1.0).asin()
        });
        let pass = entry <= bound + 1e-9
            && entry_angle.is_none_or(|a| a >= theta.eps0() - 1e-9);
        Ok(DiveReport {
            distance_to_parallel_set: dist,
            entry_time: entry,
            bound,
            entry_angle,
            pass,
        })
    }

    /// A Theta-regular ray leaving the cone `V(x, st(tau))` moves away from
    /// it at least at rate `sin(eps0)`.
    pub fn ray_leave_cone_check(
        &self,
        ray: &ProductRay,
        x: &ProductPoint,
        tau: &ProductFlag,
        theta: &ThetaCone,
        times: &[f64],
    ) -> Result<LeaveReport> {
        if theta.face() != tau.face(self.rank()) || !theta.contains_type(&ray.direction_type()) {
            return Err(GeomError::RayNotRegular);
        }
        let t_max = times.iter().copied().fold(0.0, f64::max);
        let inside = |t: f64| self.cone_distance(x, tau, &ray.point(self, t)) <= 1e-12;
        if !inside(0.0) {
            return Err(GeomError::Unsupported("ray must start in the cone".into()));
        }
        if inside(t_max) {
            return Ok(LeaveReport {
                exit_time: None,
                min_slack: f64::INFINITY,
                vacuous: true,
                pass: true,
            });
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1.0) {
                break;
            }
        }
        let t0 = lo;
        let s = theta.eps0().sin();
        let min_slack = times
            .iter()
            .filter(|&&t| t >= t0)
            .map(|&t| self.cone_distance(x, tau, &ray.point(self, t)) - (t - t0) * s)
            .fold(f64::INFINITY, f64::min);
        Ok(LeaveReport {
            exit_time: Some(t0),
            min_slack,
            vacuous: false,
            pass: min_slack >= -1e-9,
        })
    }

    /// Coincidence radius of the cones `V(x, st(a))` and `V(x, st(b))`.
    pub fn coincidence_radius(&self, x: &ProductPoint, a: &ProductFlag, b: &ProductFlag) -> f64 {
        a.support
            .iter()
            .enumerate()
            .map(|(j, &i)| self.factors[i].end_overlap(&x[i], a.ends[j], b.ends[j]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn truncated_cone_stabilization(
        &self,
        x: &ProductPoint,
        flags: &[ProductFlag],
        samples: &[ProductPoint],
        d: f64,
    ) -> Result<StabilizationReport> {
        let last = flags.last().ok_or(GeomError::NotStabilized)?;
        if flags.iter().any(|f| f.support != last.support) {
            return Err(GeomError::NotStabilized);
        }
        let radii: Vec<f64> = flags
            .iter()
            .map(|f| self.coincidence_radius(x, f, last).min(RADIUS_CAP))
            .collect();
        if radii.windows(2).any(|w| w[1] < w[0] - 1e-9) {
            return Err(GeomError::NotStabilized);
        }
        let max_distance_to_cone = samples
            .iter()
            .map(|p| self.cone_distance(x, last, p))
            .fold(0.0, f64::max);
        Ok(StabilizationReport {
            flag: last.clone(),
            radii,
            max_distance_to_cone,
            within: max_distance_to_cone <= d + TOL_NUM,
        })
    }
}

impl ModelSpace for TreeProduct {
    type Point = ProductPoint;
    type Orientation = ParallelSet;

    fn group(&self) -> &ReflectionGroup {
        &self.group
    }

    fn distance(&self, x: &ProductPoint, y: &ProductPoint) -> f64 {
        self.factor_distances(x, y).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    fn delta_distance(&self, x: &ProductPoint, y: &ProductPoint) -> Vector {
        Vector::from_vec(self.factor_distances(x, y))
    }

    fn interpolate(&self, x: &ProductPoint, y: &ProductPoint, s: f64) -> ProductPoint {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, t)| t.point_along(&x[i], &y[i], s * t.distance(&x[i], &y[i])))
            .collect()
    }

    fn diamond_distance(&self, xm: &ProductPoint, xp: &ProductPoint, face: FaceType, z: &ProductPoint) -> Result<f64> {
        Ok(self.product_diamond(xm, xp, face)?.distance(self, z))
    }

    fn diamond_distances(
        &self,
        xm: &ProductPoint,
        xp: &ProductPoint,
        face: FaceType,
        zs: &[ProductPoint],
    ) -> Result<Vec<f64>> {
        let dia = self.product_diamond(xm, xp, face)?;
        Ok(zs.iter().map(|z| dia.distance(self, z)).collect())
    }

    fn theta_diamond_margin(
        &self,
        xm: &ProductPoint,
        xp: &ProductPoint,
        theta: &ThetaCone,
        z: &ProductPoint,
    ) -> Result<f64> {
        Ok(self.product_diamond(xm, xp, theta.face())?.theta_margin(self, theta, z))
    }

    /// Shrinks factor components of the chord until its type enters Theta,
    /// moving both endpoints towards each other.
    fn regular_witness(&self, x: &ProductPoint, y: &ProductPoint, theta: &ThetaCone) -> Option<RegularWitness<ProductPoint>> {
        let d = self.delta_distance(x, y);
        let len = d.norm();
        if len <= TOL_NUM {
            return None;
        }
        let t = &d / len;
        if theta.contains_type(&t) {
            return Some(RegularWitness {
                start: x.clone(),
                end: y.clone(),
                displacement: 0.0,
            });
        }
        let target = theta.pull_inside(&t);
        let lambda = (0..d.len())
            .filter(|&i| target[i] > 1e-12)
            .map(|i| d[i] / target[i])
            .fold(f64::INFINITY, f64::min);
        if !(lambda.is_finite() && lambda > TOL_NUM) {
            return None;
        }
        let d2 = &target * lambda;
        let mut start = x.clone();
        let mut end = y.clone();
        for (i, tree) in self.factors.iter().enumerate() {
            let cut = 0.5 * (d[i] - d2[i]).max(0.0);
            start[i] = tree.point_along(&x[i], &y[i], cut);
            end[i] = tree.point_along(&y[i], &x[i], cut);
        }
        Some(RegularWitness {
            start,
            end,
            displacement: 0.5 * (&d - &d2).norm(),
        })
    }

    fn orientation_of(&self, x: &ProductPoint, y: &ProductPoint, face: FaceType) -> Result<ParallelSet> {
        let plus = self.flag_of_segment(x, y, face)?;
        let minus = self.flag_of_segment(y, x, face)?;
        self.parallel_set(minus, plus)
    }

    fn classify_segment(&self, p: &ParallelSet, a: &ProductPoint, b: &ProductPoint) -> Result<Longitudinality> {
        if !p.contains(self, a) || !p.contains(self, b) {
            return Err(GeomError::PointOutsideParallelSet);
        }
        let len = self.distance(a, b);
        if len <= TOL_NUM {
            return Ok(Longitudinality::NonLongitudinal);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (j, &i) in p.plus.support.iter().enumerate() {
            let t = &self.factors[i];
            let m = p.minus.ends[j];
            let delta = (t.line_position(&b[i], m) - t.line_position(&a[i], m)) / len;
            lo = lo.min(delta);
            hi = hi.max(delta);
        }
        Ok(if lo > TOL_NUM {
            Longitudinality::Longitudinal
        } else if hi < -TOL_NUM {
            Longitudinality::AntiLongitudinal
        } else {
            Longitudinality::NonLongitudinal
        })
    }
}
