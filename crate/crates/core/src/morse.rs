//! Morse quasigeodesics: diamond neighborhoods, endpoints at infinity,
//! zigzag examples and hyperbolicity of sampled metrics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::coxeter::{sphere_samples, FaceType, FlagPlacement, ThetaCone};
use crate::error::{GeomError, Result};
use crate::flat::{CoxeterFlat, SegmentClass};
use crate::linalg::{Vector, TOL_NUM};
use crate::regularity::PolyPath;
use crate::space::ModelSpace;
use crate::tree::product::{ProductFlag, ProductPoint, TreeProduct, RADIUS_CAP};

#[derive(Debug, Clone, Serialize)]
pub struct WindowRow {
    /// Breakpoint indices of the window.
    pub start: usize,
    pub end: usize,
    /// Distance the tips were moved; `None` when no regular witness exists.
    pub tip_displacement: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseReport {
    pub d_measured: f64,
    pub witness_displacement: f64,
    pub margin: f64,
    pub b: f64,
    pub windows: Vec<WindowRow>,
    /// Largest window distance, over windows with a witness.
    pub window_max: f64,
}

/// Dyadic windows of breakpoint indices: lengths `2^j` starting on
/// multiples of `2^(j-1)`, clipped to `0..=m`.
pub fn dyadic_windows(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut len = 2;
    while len <= m.max(1) {
        let step = len / 2;
        let mut a = 0;
        while a < m {
            out.push((a, (a + len).min(m)));
            if a + len >= m {
                break;
            }
            a += step;
        }
        len *= 2;
    }
    if m >= 1 && !out.contains(&(0, m)) {
        out.push((0, m));
    }
    out
}

fn max_diamond_distance<S: ModelSpace>(
    space: &S,
    tips: (&S::Point, &S::Point),
    face: FaceType,
    samples: &[S::Point],
) -> Result<f64> {
    Ok(space
        .diamond_distances(tips.0, tips.1, face, samples)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Distances of the path to the `theta`-type diamond spanned by a regular
/// pair `B`-close to its endpoints, and the same for dyadic subpaths against
/// `theta_prime`-regular tips.
pub fn verify_morse<S: ModelSpace>(
    path: &PolyPath<'_, S>,
    theta: &ThetaCone,
    b: f64,
    theta_prime: &ThetaCone,
    refine: usize,
) -> Result<MorseReport> {
    let space = path.space();
    let face = theta.face();
    let w = space
        .regular_witness(path.start(), path.end(), theta)
        .filter(|w| w.displacement <= b + 1e-12)
        .ok_or(GeomError::NoRegularWitness)?;
    let samples: Vec<S::Point> = path.grid(refine).iter().map(|&t| path.eval(t)).collect();
    let d_measured = max_diamond_distance(space, (&w.start, &w.end), face, &samples)?;
    let times = path.times();
    let m = times.len() - 1;
    let mut windows = Vec::new();
    let mut window_max: f64 = 0.0;
    for (a, e) in dyadic_windows(m) {
        let pts = &path.points()[a..=e];
        let row = match space.regular_witness(&pts[0], &pts[pts.len() - 1], theta_prime) {
            Some(tw) => {
                let sub = path.subpath(times[a], times[e])?;
                let s: Vec<S::Point> = sub.grid(refine).iter().map(|&t| sub.eval(t)).collect();
                let dist = max_diamond_distance(space, (&tw.start, &tw.end), theta_prime.face(), &s)?;
                window_max = window_max.max(dist);
                WindowRow {
                    start: a,
                    end: e,
                    tip_displacement: Some(tw.displacement),
                    distance: Some(dist),
                }
            }
            None => WindowRow {
                start: a,
                end: e,
                tip_displacement: None,
                distance: None,
            },
        };
        windows.push(row);
    }
    Ok(MorseReport {
        d_measured,
        witness_displacement: w.displacement,
        margin: theta.margin(),
        b,
        windows,
        window_max,
    })
}

/// Broken path with steps `s_n v_{n mod 2}` from `start`.
pub fn zigzag_generator<'a>(
    flat: &'a CoxeterFlat,
    theta: &ThetaCone,
    v1: &Vector,
    v2: &Vector,
    lengths: &[f64],
    start: &Vector,
) -> Result<PolyPath<'a, CoxeterFlat>> {
    if (v1.normalize() - v2.normalize()).norm() <= TOL_NUM {
        return Err(GeomError::DirectionsOutsideTheta);
    }
    let o = Vector::zeros(v1.len());
    for v in [v1, v2] {
        if flat.segment_regularity(&o, v, theta)? != SegmentClass::ThetaRegular {
            return Err(GeomError::DirectionsOutsideTheta);
        }
    }
    let g = flat.group();
    if !g.same_placement(&g.placement_of(theta.face(), v1), &g.placement_of(theta.face(), v2)) {
        return Err(GeomError::DirectionsOutsideTheta);
    }
    let (u1, u2) = (v1.normalize(), v2.normalize());
    let mut points = vec![start.clone()];
    for (n, &s) in lengths.iter().enumerate() {
        let v = if n % 2 == 0 { &u1 } else { &u2 };
        let next = points.last().unwrap() + v * s;
        points.push(next);
    }
    PolyPath::by_arc_length(flat, points)
}

/// Zigzag in a tree product: every factor moves towards `ends[i]`, with
/// unit weights alternating between `w1` and `w2`.
pub fn product_zigzag<'a>(
    x: &'a TreeProduct,
    theta: &ThetaCone,
    start: &ProductPoint,
    ends: &[usize],
    w1: &Vector,
    w2: &Vector,
    lengths: &[f64],
) -> Result<PolyPath<'a, TreeProduct>> {
    if (w1.normalize() - w2.normalize()).norm() <= TOL_NUM {
        return Err(GeomError::DirectionsOutsideTheta);
    }
    for w in [w1, w2] {
        if w.iter().any(|&c| c < 0.0) || !theta.contains_type(&w.normalize()) {
            return Err(GeomError::DirectionsOutsideTheta);
        }
    }
    let (u1, u2) = (w1.normalize(), w2.normalize());
    let mut points = vec![start.clone()];
    for (n, &s) in lengths.iter().enumerate() {
        let u = if n % 2 == 0 { &u1 } else { &u2 };
        let p = points.last().unwrap();
        let next: ProductPoint = (0..x.rank())
            .map(|i| x.factor(i).ray_from(&p[i], ends[i], s * u[i]))
            .collect();
        points.push(next);
    }
    PolyPath::by_arc_length(x, points)
}

/// Moves every interior point by a uniform random vector of norm `<= beta`.
pub fn perturb_flat(points: &[Vector], beta: f64, rng: &mut ChaCha20Rng) -> Vec<Vector> {
    let dim = points.first().map_or(0, |p| p.len());
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 || i + 1 == points.len() {
                return p.clone();
            }
            let dir = loop {
                let v = Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
                let n = v.norm();
                if n > 1e-3 && n <= 1.0 {
                    break v / n;
                }
            };
            let r = beta * rng.random::<f64>().powf(1.0 / dim as f64);
            p + dir * r
        })
        .collect()
}

/// Moves each factor of every interior point by up to `beta / sqrt(k)`
/// towards a random vertex.
pub fn perturb_product(
    x: &TreeProduct,
    points: &[ProductPoint],
    beta: f64,
    rng: &mut ChaCha20Rng,
) -> Vec<ProductPoint> {
    let k = x.rank();
    let share = beta / (k as f64).sqrt();
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 || i + 1 == points.len() {
                return p.clone();
            }
            (0..k)
                .map(|f| {
                    let t = x.factor(f);
                    let vs = t.vertices();
                    let target = vs[rng.random_range(0..vs.len())];
                    t.point_along(&p[f], &target, share * rng.random::<f64>())
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RayFit {
    pub direction: Vec<f64>,
    pub sup_distance: f64,
    pub resolution: usize,
}

fn ray_sup_distance(points: &[Vector], u: &Vector) -> f64 {
    let o = &points[0];
    points
        .iter()
        .map(|p| {
            let v = p - o;
            let s = v.dot(u);
            if s > 0.0 {
                (&v - u * s).norm()
            } else {
                v.norm()
            }
        })
        .fold(0.0, f64::max)
}

/// Ray from the first point minimizing the largest distance to the points:
/// sphere grid of the given resolution, then shrinking coordinate search.
pub fn best_ray_fit(points: &[Vector], resolution: usize) -> RayFit {
    let dim = points[0].len();
    let mut best_u = Vector::zeros(dim);
    best_u[0] = 1.0;
    let mut best = ray_sup_distance(points, &best_u);
    for u in sphere_samples(dim, resolution) {
        let f = ray_sup_distance(points, &u);
        if f < best {
            best = f;
            best_u = u;
        }
    }
    let mut step = std::f64::consts::PI / resolution.max(1) as f64;
    while step > 1e-12 {
        let mut improved = false;
        for i in 0..dim {
            for s in [-step, step] {
                let mut u = best_u.clone();
                u[i] += s;
                let u = u.normalize();
                let f = ray_sup_distance(points, &u);
                if f < best {
                    best = f;
                    best_u = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    RayFit {
        direction: best_u.iter().copied().collect(),
        sup_distance: best,
        resolution,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EndFlag {
    Flat(FlagPlacement),
    Product(ProductFlag),
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealEndpoint {
    pub flag: EndFlag,
    /// Coincidence radius of the first tail flag with the limit (capped).
    pub radius: f64,
    /// Largest distance of a sample to the limit cone from the first point.
    pub max_distance: f64,
}

/// Limit placement of the chord types from the first point over the tail
/// (second half); all tail chords must share it.
pub fn ideal_endpoint_flat(flat: &CoxeterFlat, points: &[Vector], theta: &ThetaCone) -> Result<IdealEndpoint> {
    let g = flat.group();
    let o = &points[0];
    let tail = &points[points.len() / 2..];
    let mut placements = Vec::new();
    for p in tail {
        let v = p - o;
        if v.norm() <= TOL_NUM {
            return Err(GeomError::NotStabilized);
        }
        let t = g.type_of(&v)?;
        if !theta.contains_type(&t) {
            return Err(GeomError::NotStabilized);
        }
        placements.push(g.placement_of(theta.face(), &v));
    }
    let last = *placements.last().ok_or(GeomError::NotStabilized)?;
    if placements.iter().any(|p| !g.same_placement(p, &last)) {
        return Err(GeomError::NotStabilized);
    }
    let cone = flat.cone(o, &last);
    let max_distance = points.iter().map(|p| cone.distance(p)).fold(0.0, f64::max);
    Ok(IdealEndpoint {
        flag: EndFlag::Flat(last),
        radius: RADIUS_CAP,
        max_distance,
    })
}

/// Flags towards the tail points (second half), chosen stickily, must
/// stabilize.
pub fn ideal_endpoint_product(x: &TreeProduct, points: &[ProductPoint], theta: &ThetaCone) -> Result<IdealEndpoint> {
    let o = &points[0];
    let support = crate::tree::product::support_of_face(x.rank(), theta.face());
    let tail = &points[points.len() / 2..];
    let mut flags: Vec<ProductFlag> = Vec::new();
    for p in tail {
        let f = x.flag_towards(o, p, &support, flags.last())?;
        flags.push(f);
    }
    let rep = x.truncated_cone_stabilization(o, &flags, points, f64::INFINITY)?;
    Ok(IdealEndpoint {
        flag: EndFlag::Product(rep.flag),
        radius: rep.radii[0],
        max_distance: rep.max_distance_to_cone,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasilineReport {
    pub tau_minus: ProductFlag,
    pub tau_plus: ProductFlag,
    pub x_opposite: bool,
    pub max_distance: f64,
}

/// Endpoints of both halves of a two-sided path split at `mid`, their
/// opposition at the projection of `points[mid]` to the parallel set, and
/// the distance of all samples to that set.
pub fn quasiline_parallel_set(
    x: &TreeProduct,
    points: &[ProductPoint],
    mid: usize,
    theta: &ThetaCone,
) -> Result<QuasilineReport> {
    let fwd: Vec<ProductPoint> = points[mid..].to_vec();
    let bwd: Vec<ProductPoint> = points[..=mid].iter().rev().cloned().collect();
    let plus = match ideal_endpoint_product(x, &fwd, theta)?.flag {
        EndFlag::Product(f) => f,
        EndFlag::Flat(_) => unreachable!(),
    };
    let minus = match ideal_endpoint_product(x, &bwd, theta)?.flag {
        EndFlag::Product(f) => f,
        EndFlag::Flat(_) => unreachable!(),
    };
    let p = x.parallel_set(minus.clone(), plus.clone())?;
    let witness = p.project(x, &points[mid]);
    let x_opposite = x.x_opposite(&witness, &minus, &plus);
    let max_distance = points.iter().map(|q| p.distance(x, q)).fold(0.0, f64::max);
    Ok(QuasilineReport {
        tau_minus: minus,
        tau_plus: plus,
        x_opposite,
        max_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Antipodality {
    Equal,
    Antipodal,
    Violation,
}

#[derive(Debug, Clone, Serialize)]
pub struct AntipodalityReport {
    pub verdict: Antipodality,
    /// Opposition seen from the common base point, when the rays share one.
    pub x_opposite: Option<bool>,
}

pub fn antipodality_check(
    x: &TreeProduct,
    ray_a: &[ProductPoint],
    ray_b: &[ProductPoint],
    theta: &ThetaCone,
) -> Result<AntipodalityReport> {
    let get = |r: &[ProductPoint]| -> Result<ProductFlag> {
        match ideal_endpoint_product(x, r, theta)?.flag {
            EndFlag::Product(f) => Ok(f),
            EndFlag::Flat(_) => unreachable!(),
        }
    };
    let (fa, fb) = (get(ray_a)?, get(ray_b)?);
    let verdict = if fa.support() != fb.support() {
        Antipodality::Violation
    } else if fa == fb {
        Antipodality::Equal
    } else if x.flags_opposite(&fa, &fb) {
        Antipodality::Antipodal
    } else {
        Antipodality::Violation
    };
    let common = x.distance(&ray_a[0], &ray_b[0]) <= TOL_NUM;
    Ok(AntipodalityReport {
        verdict,
        x_opposite: common.then(|| x.x_opposite(&ray_a[0], &fa, &fb)),
    })
}

/// Gromov four-point defect of a finite metric, maximized over all
/// quadruples. `d` is a symmetric `n x n` distance table.
pub fn four_point_defect_exact(d: &[Vec<f64>], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                for w in z + 1..n {
                    worst = worst.max(quadruple_defect(d, x, y, z, w));
                }
            }
        }
    }
    worst
}

/// Half the gap between the two largest pair sums.
fn quadruple_defect(d: &[Vec<f64>], x: usize, y: usize, z: usize, w: usize) -> f64 {
    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
    s.sort_by(|a, b| b.total_cmp(a));
    0.5 * (s[0] - s[1])
}

/// Point count up to which all quadruples are enumerated.
pub const EXACT_LIMIT: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicityReport {
    pub delta: f64,
    pub points: usize,
    pub exact: bool,
    pub quadruples: u64,
}

/// Four-point defect: exact up to [`EXACT_LIMIT`] points, otherwise over
/// `samples` random quadruples.
pub fn hyperbolicity_estimate(d: &[Vec<f64>], seed: u64, samples: u64) -> HyperbolicityReport {
    let n = d.len();
    if n <= EXACT_LIMIT {
        let q = if n >= 4 {
            (n as u64) * (n as u64 - 1) * (n as u64 - 2) * (n as u64 - 3) / 24
        } else {
            0
        };
        return HyperbolicityReport {
            delta: four_point_defect_exact(d, n),
            points: n,
            exact: true,
            quadruples: q,
        };
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = rand::seq::index::sample(&mut rng, n, 4);
        worst = worst.max(quadruple_defect(d, q.index(0), q.index(1), q.index(2), q.index(3)));
    }
    HyperbolicityReport {
        delta: worst,
        points: n,
        exact: false,
        quadruples: samples,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path distances of a weighted graph (Dijkstra from every vertex).
pub fn graph_distances(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![f64::INFINITY; n];
            let mut heap = BinaryHeap::new();
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
            while let Some(Entry(du, u)) = heap.pop() {
                if du > dist[u] {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    if du + w < dist[v] {
                        dist[v] = du + w;
                        heap.push(Entry(du + w, v));
                    }
                }
            }
            dist
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;
    use crate::regularity::{check_coarse_regular, check_quasigeodesic, check_theta_regular, CoarseVerdict, QuasiCertificate};
    use crate::tree::metric_tree::{MetricTree, TreeSpec};
    use std::f64::consts::PI;

    fn a2() -> CoxeterFlat {
        CoxeterFlat::from_name("A2").unwrap()
    }

    /// Two directions inside the chamber regions of margin `eps`.
    fn zig_dirs(f: &CoxeterFlat, eps: f64) -> (ThetaCone, Vector, Vector) {
        let theta = ThetaCone::new(f.group(), FaceType::CHAMBER, eps).unwrap();
        let c = theta.center().clone();
        let s = theta.boundary_samples(f.group(), 8);
        let v1 = crate::linalg::slerp(&s[0], &c, 0.02);
        let v2 = crate::linalg::slerp(&s[s.len() - 1], &c, 0.02);
        (theta, v1, v2)
    }

    #[test]
    fn windows_cover_scales() {
        let w = dyadic_windows(8);
        assert!(w.contains(&(0, 2)) && w.contains(&(1, 3)) && w.contains(&(4, 8)) && w.contains(&(0, 8)));
        assert!(w.iter().all(|&(a, b)| a < b && b <= 8));
        assert!(dyadic_windows(1000).len() < 1000 * 12);
    }

    #[test]
    fn geodesic_has_zero_distance() {
        let f = a2();
        let theta = ThetaCone::new(f.group(), FaceType::CHAMBER, 0.2).unwrap();
        let outer = theta.with_margin(f.group(), 0.1).unwrap();
        let p = PolyPath::by_arc_length(&f, vec![vector(&[0.0, 0.0]), theta.center() * 5.0, theta.center() * 9.0]).unwrap();
        let r = verify_morse(&p, &theta, 0.0, &outer, 4).unwrap();
        assert_eq!(r.d_measured, 0.0);
        assert_eq!(r.window_max, 0.0);
    }

    #[test]
    fn zigzag_is_straight_and_quasigeodesic() {
        let f = a2();
        let (theta, v1, v2) = zig_dirs(&f, 0.2);
        let p = zigzag_generator(&f, &theta, &v1, &v2, &[1.0; 10], &vector(&[0.0, 0.0])).unwrap();
        assert!((p.length() - 10.0).abs() < 1e-9);
        let g = p.default_grid();
        assert!(check_theta_regular(&p, &theta, &g).passed());
        let l = 1.0 / theta.margin().sin();
        assert!(check_quasigeodesic(&p, QuasiCertificate { l, a: 0.0 }, &g).passed());
        let r = verify_morse(&p, &theta, 0.0, &theta.with_margin(f.group(), 0.1).unwrap(), 4).unwrap();
        assert_eq!(r.d_measured, 0.0);
        assert_eq!(
            zigzag_generator(&f, &theta, &v1, &v1, &[1.0], &vector(&[0.0, 0.0])).unwrap_err(),
            GeomError::DirectionsOutsideTheta
        );
        let wall = f.group().chamber_vertices()[0].clone();
        assert_eq!(
            zigzag_generator(&f, &theta, &v1, &wall, &[1.0], &vector(&[0.0, 0.0])).unwrap_err(),
            GeomError::DirectionsOutsideTheta
        );
    }

    #[test]
    fn growing_zigzag_escapes_every_ray() {
        let f = a2();
        let (theta, v1, v2) = zig_dirs(&f, 0.2);
        let mut last = 0.0;
        for n in [10usize, 20, 40, 80] {
            let lengths: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            let p = zigzag_generator(&f, &theta, &v1, &v2, &lengths, &vector(&[0.0, 0.0])).unwrap();
            let fit = best_ray_fit(p.points(), 360);
            assert!(fit.sup_distance > last);
            last = fit.sup_distance;
        }
        let p = zigzag_generator(&f, &theta, &v1, &v2, &[1.0; 200], &vector(&[0.0, 0.0])).unwrap();
        assert!(best_ray_fit(p.points(), 360).sup_distance < 1.0);
        let seg = vec![vector(&[1.0, 1.0]), vector(&[4.0, 5.0])];
        let fit = best_ray_fit(&seg, 360);
        assert!(fit.sup_distance < 1e-9);
        assert!((fit.direction[0] - 0.6).abs() < 1e-6);
    }

    #[test]
    fn morse_paths_are_coarsely_regular() {
        let f = a2();
        let (theta, v1, v2) = zig_dirs(&f, 0.25);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = zigzag_generator(&f, &theta, &v1, &v2, &[1.0; 30], &vector(&[0.0, 0.0])).unwrap();
        let noisy = PolyPath::by_arc_length(&f, perturb_flat(p.points(), 0.2, &mut rng)).unwrap();
        let outer = theta.with_margin(f.group(), 0.1).unwrap();
        let r = verify_morse(&noisy, &theta, 0.0, &outer, 2).unwrap();
        let d = r.d_measured.max(r.window_max);
        // Chords are B'-close to regular ones once B' exceeds the tube radius.
        let loose = theta.with_margin(f.group(), 0.05).unwrap();
        let v = check_coarse_regular(&noisy, &loose, 2.0 * d + 0.4, &noisy.grid(1));
        assert_eq!(v, CoarseVerdict::Pass);
    }

    #[test]
    fn restriction_is_monotone_up_to_slack() {
        let f = a2();
        let (theta, v1, v2) = zig_dirs(&f, 0.25);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let p = zigzag_generator(&f, &theta, &v1, &v2, &[1.0; 40], &vector(&[0.0, 0.0])).unwrap();
        let noisy = PolyPath::by_arc_length(&f, perturb_flat(p.points(), 0.3, &mut rng)).unwrap();
        let outer = theta.with_margin(f.group(), 0.1).unwrap();
        let full = verify_morse(&noisy, &outer, 0.0, &outer, 2).unwrap().d_measured;
        let (a, b) = noisy.domain();
        let sub = noisy.subpath(a + 0.25 * (b - a), a + 0.75 * (b - a)).unwrap();
        let part = verify_morse(&sub, &outer, 0.0, &outer, 2).unwrap().d_measured;
        assert!(part <= full + 2.0 * 0.3 + 1e-9, "{part} {full}");
    }

    fn star(legs: usize, len: f64) -> MetricTree {
        MetricTree::new(TreeSpec {
            vertices: (0..=legs as u64).collect(),
            edges: (1..=legs as u64).map(|i| (0, i, len)).collect(),
            extendable_leaves: (1..=legs as u64).collect(),
        })
        .unwrap()
    }

    #[test]
    fn product_endpoints() {
        let x = TreeProduct::new(vec![star(3, 1.0), star(3, 1.0)]).unwrap();
        let theta = ThetaCone::new(x.group(), FaceType::CHAMBER, 0.3).unwrap();
        let o = [x.factor(0).vertex(0).unwrap(), x.factor(1).vertex(0).unwrap()];
        let ray: Vec<ProductPoint> = (0..30)
            .map(|k| vec![x.factor(0).ray_from(&o[0], 1, k as f64), x.factor(1).ray_from(&o[1], 2, 0.7 * k as f64)])
            .collect();
        let e = ideal_endpoint_product(&x, &ray, &theta).unwrap();
        assert_eq!(e.flag, EndFlag::Product(ProductFlag::new(vec![0, 1], vec![1, 2]).unwrap()));
        assert_eq!(e.radius, RADIUS_CAP);
        assert_eq!(e.max_distance, 0.0);
        let r = antipodality_check(&x, &ray, &ray, &theta).unwrap();
        assert_eq!(r.verdict, Antipodality::Equal);
        let back: Vec<ProductPoint> = (0..30)
            .map(|k| vec![x.factor(0).ray_from(&o[0], 0, k as f64), x.factor(1).ray_from(&o[1], 0, 0.7 * k as f64)])
            .collect();
        let r = antipodality_check(&x, &ray, &back, &theta).unwrap();
        assert_eq!(r.verdict, Antipodality::Antipodal);
        assert_eq!(r.x_opposite, Some(true));
        let mixed: Vec<ProductPoint> = (0..30)
            .map(|k| vec![x.factor(0).ray_from(&o[0], 1, k as f64), x.factor(1).ray_from(&o[1], 0, 0.7 * k as f64)])
            .collect();
        assert_eq!(antipodality_check(&x, &ray, &mixed, &theta).unwrap().verdict, Antipodality::Violation);
        // Line through o: reversal swaps the flags.
        let mut line: Vec<ProductPoint> = back.iter().rev().cloned().collect();
        line.extend(ray[1..].iter().cloned());
        let q = quasiline_parallel_set(&x, &line, 29, &theta).unwrap();
        assert!(q.x_opposite);
        assert_eq!(q.max_distance, 0.0);
        let rev: Vec<ProductPoint> = line.iter().rev().cloned().collect();
        let q2 = quasiline_parallel_set(&x, &rev, 29, &theta).unwrap();
        assert_eq!(q2.tau_plus, q.tau_minus);
        assert_eq!(q2.tau_minus, q.tau_plus);
        // Glued along a common end: not opposite.
        let mut bad: Vec<ProductPoint> = mixed.iter().rev().cloned().collect();
        bad.extend(ray[1..].iter().cloned());
        assert_eq!(quasiline_parallel_set(&x, &bad, 29, &theta).unwrap_err(), GeomError::EndsNotOpposite);
    }

    #[test]
    fn flat_endpoint_of_zigzag() {
        let f = a2();
        let (theta, v1, v2) = zig_dirs(&f, 0.2);
        let p = zigzag_generator(&f, &theta, &v1, &v2, &[1.0; 40], &vector(&[0.0, 0.0])).unwrap();
        let e = ideal_endpoint_flat(&f, p.points(), &theta).unwrap();
        assert_eq!(e.flag, EndFlag::Flat(FlagPlacement::canonical(FaceType::CHAMBER)));
        assert_eq!(e.max_distance, 0.0);
    }

    #[test]
    fn hyperbolicity_examples() {
        // Circle with chord metric.
        let n = 12;
        let pts: Vec<(f64, f64)> = (0..n).map(|k| ((2.0 * PI * k as f64 / n as f64).cos(), (2.0 * PI * k as f64 / n as f64).sin())).collect();
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        assert!(hyperbolicity_estimate(&d, 0, 0).delta > 0.1);
        // Path graph: a tree.
        let edges: Vec<(usize, usize, f64)> = (0..300).map(|i| (i, i + 1, 1.0)).collect();
        let d = graph_distances(301, &edges);
        let r = hyperbolicity_estimate(&d, 1, 100_000);
        assert!(!r.exact && r.delta == 0.0);
    }

    #[test]
    fn cones_sharing_a_sequence_share_the_flag() {
        // A sequence close to two cones from different base points.
        let x = TreeProduct::new(vec![star(3, 2.0), star(3, 2.0)]).unwrap();
        let theta = ThetaCone::new(x.group(), FaceType::CHAMBER, 0.3).unwrap();
        let o = vec![x.factor(0).vertex(1).unwrap(), x.factor(1).vertex(0).unwrap()];
        let seq: Vec<ProductPoint> = (0..40)
            .map(|k| vec![x.factor(0).ray_point(2, k as f64), x.factor(1).ray_point(1, 0.5 * k as f64)])
            .collect();
        let mut from_o = vec![o.clone()];
        from_o.extend(seq.iter().cloned());
        let a = ideal_endpoint_product(&x, &seq, &theta).unwrap();
        let b = ideal_endpoint_product(&x, &from_o, &theta).unwrap();
        assert_eq!(a.flag, b.flag);
    }
}
