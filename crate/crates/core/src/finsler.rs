//! The length metric on diamonds generated by non-longitudinal paths.
//!
//! A direction is non-longitudinal when it lies in neither open star
//! `ost(tau+)` nor `ost(tau-)`. For a flat diamond with star normals `N`
//! this means `min_N <g, u> <= 0 <= max_N <g, u>`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coxeter::{sphere_samples, FaceType, ReflectionGroup};
use crate::error::{GeomError, Result};
use crate::flat::{CoxeterFlat, FlatDiamond};
use crate::linalg::{solve, for_each_subset, Vector, TOL_NUM};
use crate::space::{Longitudinality, ModelSpace};
use crate::tree::product::{ProductDiamond, ProductPoint, TreeProduct};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FinslerEstimate {
    pub upper: f64,
    pub lower: f64,
    pub infinite: bool,
}

fn check_inside(dia: &FlatDiamond, p: &Vector) -> Result<()> {
    if dia.contains(p) {
        Ok(())
    } else {
        Err(GeomError::PointOutsideDiamond)
    }
}

fn same_cross_section(dia: &FlatDiamond, x: &Vector, y: &Vector) -> bool {
    let g = &dia.normals()[0];
    (g.dot(x) - g.dot(y)).abs() <= TOL_NUM * (1.0 + x.norm().max(y.norm()))
}

/// Length of a path with at most two non-longitudinal legs; infinite in
/// the hemisphere case across cross sections.
pub fn finsler_upper(dia: &FlatDiamond, x: &Vector, y: &Vector) -> Result<f64> {
    check_inside(dia, x)?;
    check_inside(dia, y)?;
    let d = (y - x).norm();
    if dia.classify_direction(&(y - x)) == Longitudinality::NonLongitudinal {
        return Ok(d);
    }
    if dia.is_hemisphere() {
        return Ok(if same_cross_section(dia, x, y) { d } else { f64::INFINITY });
    }
    let normals = dia.normals();
    let m = normals.len();
    let mut best = f64::INFINITY;
    // Leg x -> z in {<a,.> <= 0 <= <b,.>}, leg z -> y in {<c,.> <= 0 <= <e,.>}.
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for e in 0..m {
                    let mut poly = dia.polyhedron().clone();
                    let (na, nb, nc, ne) = (&normals[a], &normals[b], &normals[c], &normals[e]);
                    poly.push(&-na, -na.dot(x));
                    poly.push(nb, nb.dot(x));
                    poly.push(nc, nc.dot(y));
                    poly.push(&-ne, -ne.dot(y));
                    if let Some((len, _)) = poly.min_two_leg(x, y) {
                        best = best.min(len);
                    }
                }
            }
        }
    }
    Ok(best)
}

/// `1 / max <xi, u>` over non-longitudinal unit `u`, for `xi` the
/// direction of `v`; the nearest non-longitudinal direction lies on the
/// wall of the star root closest to `xi`.
pub fn expansion_constant(dia: &FlatDiamond, v: &Vector) -> Result<f64> {
    let xi = match dia.classify_direction(v) {
        Longitudinality::Longitudinal => v.normalize(),
        Longitudinality::AntiLongitudinal => -v.normalize(),
        _ => return Err(GeomError::NotLongitudinal(0)),
    };
    let s = dia
        .normals()
        .iter()
        .map(|g| g.dot(&xi))
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 / (1.0 - s * s).sqrt())
}

/// The same constant by maximizing over sampled unit directions.
pub fn expansion_constant_sampled(dia: &FlatDiamond, v: &Vector, resolution: usize) -> Result<f64> {
    let xi = match dia.classify_direction(v) {
        Longitudinality::Longitudinal => v.normalize(),
        Longitudinality::AntiLongitudinal => -v.normalize(),
        _ => return Err(GeomError::NotLongitudinal(0)),
    };
    let best = sphere_samples(v.len(), resolution)
        .into_iter()
        .filter(|u| dia.classify_direction(u) == Longitudinality::NonLongitudinal)
        .map(|u| xi.dot(&u))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 / best)
}

/// Busemann-slope lower bound `C d` for longitudinal pairs, `d` otherwise.
pub fn finsler_lower(dia: &FlatDiamond, x: &Vector, y: &Vector) -> f64 {
    let v = y - x;
    let d = v.norm();
    match expansion_constant(dia, &v) {
        Ok(c) if d > TOL_NUM => c * d,
        _ => d,
    }
}

pub fn finsler_estimate(dia: &FlatDiamond, x: &Vector, y: &Vector) -> Result<FinslerEstimate> {
    let upper = finsler_upper(dia, x, y)?;
    let lower = finsler_lower(dia, x, y);
    Ok(FinslerEstimate {
        upper,
        lower,
        infinite: upper.is_infinite(),
    })
}

/// Unit extreme rays of a simplicial star; errors for other stars.
fn extreme_rays(dia: &FlatDiamond) -> Result<Vec<Vector>> {
    let normals = dia.normals();
    let dim = dia.polyhedron().dim();
    if dia.is_hemisphere() {
        return Err(GeomError::Unsupported("the oracle needs a pointed star".into()));
    }
    let mut rays: Vec<Vector> = Vec::new();
    for_each_subset(normals.len(), dim - 1, |subset| {
        // Null direction of the subset, via one extra row.
        for extra in 0..dim {
            let mut a = DMatrix::zeros(dim, dim);
            let mut b = Vector::zeros(dim);
            for (r, &i) in subset.iter().enumerate() {
                for c in 0..dim {
                    a[(r, c)] = normals[i][c];
                }
            }
            a[(dim - 1, extra)] = 1.0;
            b[dim - 1] = 1.0;
            if let Some(mut r) = solve(a, &b) {
                if normals.iter().map(|g| g.dot(&r)).fold(f64::INFINITY, f64::min) < -1e-9 {
                    r = -r;
                }
                if normals.iter().all(|g| g.dot(&r) >= -1e-9) {
                    let r = r.normalize();
                    if !rays.iter().any(|q| (q - &r).norm() < 1e-9) {
                        rays.push(r);
                    }
                }
                return;
            }
        }
    });
    if rays.len() != dim {
        return Err(GeomError::Unsupported(format!("star with {} extreme rays", rays.len())));
    }
    Ok(rays)
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

/// Lattice steps on at most two axes with coordinates in `[-r, r]`,
/// primitive and admissible (mixed signs or a zero coordinate).
fn oracle_offsets(dim: usize, r: i64) -> Vec<Vec<i64>> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [-1, 1] {
            let mut o = vec![0; dim];
            o[i] = s;
            if dim > 1 {
                out.push(o);
            }
        }
        for j in i + 1..dim {
            for a in -r..=r {
                for b in -r..=r {
                    if a == 0 || b == 0 || gcd(a, b) != 1 {
                        continue;
                    }
                    if dim == 2 && (a > 0) == (b > 0) {
                        continue;
                    }
                    let mut o = vec![0; dim];
                    o[i] = a;
                    o[j] = b;
                    out.push(o);
                }
            }
        }
    }
    out
}

/// Offset radius of the oracle's lattice steps.
pub const ORACLE_RADIUS: i64 = 4;

/// Shortest admissible path on an `n`-per-axis grid of the diamond in
/// extreme-ray coordinates, where it is a box. Edges are lattice steps
/// (see [`oracle_offsets`]) plus straight admissible edges from `x` and
/// from `y` to every node.
pub fn finsler_oracle(dia: &FlatDiamond, x: &Vector, y: &Vector, n: usize) -> Result<f64> {
    check_inside(dia, x)?;
    check_inside(dia, y)?;
    if (x - y).norm() <= TOL_NUM {
        return Ok(0.0);
    }
    if n < 2 {
        return Err(GeomError::ResolutionTooCoarse(format!("n = {n}")));
    }
    let rays = extreme_rays(dia)?;
    let dim = rays.len();
    let rmat = DMatrix::from_fn(dim, dim, |r, c| rays[c][r]);
    let (xm, xp) = dia.tips();
    let coords = |p: &Vector| -> Result<Vector> {
        solve(rmat.clone(), &(p - xm)).ok_or(GeomError::Unsupported("singular ray basis".into()))
    };
    let top = coords(xp)?;
    let lx = coords(x)?;
    let ly = coords(y)?;
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let len = top[i].max(0.0);
            let mut v: Vec<f64> = (0..=n).map(|k| len * k as f64 / n as f64).collect();
            v.push(lx[i].clamp(0.0, len));
            v.push(ly[i].clamp(0.0, len));
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + len));
            v
        })
        .collect();
    let sizes: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = sizes.iter().product();
    let index_of = |lam: &Vector| -> usize {
        let mut idx = 0;
        for i in (0..dim).rev() {
            let k = axes[i]
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - lam[i]).abs().total_cmp(&(b.1 - lam[i]).abs()))
                .unwrap()
                .0;
            idx = idx * sizes[i] + k;
        }
        idx
    };
    let unpack = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; dim];
        for i in 0..dim {
            out[i] = idx % sizes[i];
            idx /= sizes[i];
        }
        out
    };
    let point = |ks: &[usize]| -> Vector { Vector::from_iterator(dim, (0..dim).map(|i| axes[i][ks[i]])) };
    let length = |dl: &Vector| -> f64 { (&rmat * dl).norm() };
    let admissible = |dl: &Vector| -> bool {
        let tol = 1e-12;
        !(dl.iter().all(|&c| c > tol) || dl.iter().all(|&c| c < -tol))
    };
    let src = index_of(&lx);
    let dst = index_of(&ly);
    let offsets = oracle_offsets(dim, ORACLE_RADIUS);
    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    let (px, py) = (point(&unpack(src)), point(&unpack(dst)));
    while let Some(Entry(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        if u == dst {
            return Ok(du);
        }
        let ku = unpack(u);
        let pu = point(&ku);
        let relax = |v: usize, w: f64, dist: &mut Vec<f64>, heap: &mut BinaryHeap<Entry>| {
            if du + w < dist[v] {
                dist[v] = du + w;
                heap.push(Entry(du + w, v));
            }
        };
        for o in &offsets {
            let mut kv = ku.clone();
            let mut ok = true;
            for i in 0..dim {
                let k = ku[i] as i64 + o[i];
                if k < 0 || k >= sizes[i] as i64 {
                    ok = false;
                    break;
                }
                kv[i] = k as usize;
            }
            if !ok {
                continue;
            }
            let pv = point(&kv);
            let dl = &pv - &pu;
            let mut idx = 0;
            for i in (0..dim).rev() {
                idx = idx * sizes[i] + kv[i];
            }
            relax(idx, length(&dl), &mut dist, &mut heap);
        }
        if u == src {
            for v in 0..total {
                let dl = point(&unpack(v)) - &px;
                if v != u && admissible(&dl) {
                    relax(v, length(&dl), &mut dist, &mut heap);
                }
            }
        }
        let dl = &py - &pu;
        if admissible(&dl) {
            relax(dst, length(&dl), &mut dist, &mut heap);
        }
    }
    Err(GeomError::ResolutionTooCoarse(format!("no admissible path at n = {n}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub value: f64,
}

/// Oracle values for each resolution, for convergence tables.
pub fn oracle_table(dia: &FlatDiamond, x: &Vector, y: &Vector, ns: &[usize]) -> Result<Vec<OracleRow>> {
    ns.iter()
        .map(|&n| Ok(OracleRow { n, value: finsler_oracle(dia, x, y, n)? }))
        .collect()
}

/// Relative change of the oracle from `n/2` to `n`.
pub fn oracle_gap(dia: &FlatDiamond, x: &Vector, y: &Vector, n: usize) -> Result<f64> {
    let fine = finsler_oracle(dia, x, y, n)?;
    let coarse = finsler_oracle(dia, x, y, (n / 2).max(2))?;
    Ok(if fine > 0.0 { (coarse - fine).abs() / fine } else { 0.0 })
}

/// Slack allowed in the contraction inequality.
pub const TAU_TEST: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub distance: f64,
    /// Finite upper bound for the diamond metric between the projections.
    pub projected: f64,
    pub upper: f64,
    pub oracle: Option<f64>,
    /// Hemisphere case only.
    pub same_cross_section: Option<bool>,
    pub pass: bool,
}

/// Minimum of a convex function on `[0, 1]`: coarse scan, then golden section.
fn convex_min(f: impl Fn(f64) -> f64) -> f64 {
    let m = 64;
    let (mut best, mut arg) = (f64::INFINITY, 0usize);
    for i in 0..=m {
        let v = f(i as f64 / m as f64);
        if v < best {
            best = v;
            arg = i;
        }
    }
    let (mut a, mut b) = ((arg.max(1) - 1) as f64 / m as f64, ((arg + 1).min(m)) as f64 / m as f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(f(0.5 * (a + b)))
}

pub fn contraction_check(
    flat: &CoxeterFlat,
    dia: &FlatDiamond,
    x: &Vector,
    y: &Vector,
    oracle_n: Option<usize>,
) -> Result<ContractionReport> {
    let gap = convex_min(|s| dia.distance(&flat.interpolate(x, y, s)));
    if gap <= 1e-9 {
        return Err(GeomError::SegmentMeetsDiamond);
    }
    let distance = (y - x).norm();
    let (px, py) = (dia.project(x), dia.project(y));
    let upper = finsler_upper(dia, &px, &py)?;
    if dia.is_hemisphere() {
        let same = same_cross_section(dia, &px, &py);
        return Ok(ContractionReport {
            distance,
            projected: upper,
            upper,
            oracle: None,
            same_cross_section: Some(same),
            pass: same && upper <= (1.0 + TAU_TEST) * distance + TOL_NUM,
        });
    }
    let oracle = oracle_n.map(|n| finsler_oracle(dia, &px, &py, n)).transpose()?;
    let projected = oracle.map_or(upper, |o| o.min(upper));
    Ok(ContractionReport {
        distance,
        projected,
        upper,
        oracle,
        same_cross_section: None,
        pass: projected <= (1.0 + TAU_TEST) * distance + TOL_NUM,
    })
}

/// The box of a full-support product diamond as an `A1^k` flat diamond with
/// tips `0` and the side lengths.
pub fn product_box(x: &TreeProduct, dia: &ProductDiamond) -> Result<(CoxeterFlat, FlatDiamond)> {
    let k = dia.support().len();
    let flat = CoxeterFlat::new(ReflectionGroup::from_name(&format!("A1^{k}"))?);
    let sides = dia.box_sides(x);
    let fd = flat.diamond(&Vector::zeros(k), &sides, FaceType::CHAMBER)?;
    Ok((flat, fd))
}

/// Contraction for full boxes (flat box metric on the projections) and
/// for one-factor supports (the hemisphere case).
pub fn tree_contraction_check(
    x: &TreeProduct,
    dia: &ProductDiamond,
    p: &ProductPoint,
    q: &ProductPoint,
    oracle_n: Option<usize>,
) -> Result<ContractionReport> {
    let gap = convex_min(|s| dia.distance(x, &x.interpolate(p, q, s)));
    if gap <= 1e-9 {
        return Err(GeomError::SegmentMeetsDiamond);
    }
    let distance = x.distance(p, q);
    let (pp, pq) = (dia.project(x, p), dia.project(x, q));
    let support = dia.support();
    if support.len() == 1 {
        let s = support[0];
        let same = x.factor(s).distance(&pp[s], &pq[s]) <= TOL_NUM;
        let within = if same { x.distance(&pp, &pq) } else { f64::INFINITY };
        return Ok(ContractionReport {
            distance,
            projected: within,
            upper: within,
            oracle: None,
            same_cross_section: Some(same),
            pass: same && within <= (1.0 + TAU_TEST) * distance + TOL_NUM,
        });
    }
    if support.len() != x.rank() {
        return Err(GeomError::Unsupported("partial supports of size >= 2".into()));
    }
    let (_, fd) = product_box(x, dia)?;
    let (bx, by) = (dia.box_coordinates(x, &pp), dia.box_coordinates(x, &pq));
    let upper = finsler_upper(&fd, &bx, &by)?;
    let oracle = oracle_n.map(|n| finsler_oracle(&fd, &bx, &by, n)).transpose()?;
    let projected = oracle.map_or(upper, |o| o.min(upper));
    Ok(ContractionReport {
        distance,
        projected,
        upper,
        oracle,
        same_cross_section: None,
        pass: projected <= (1.0 + TAU_TEST) * distance + TOL_NUM,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn box_diamond(a: f64, b: f64) -> (CoxeterFlat, FlatDiamond) {
        let f = CoxeterFlat::from_name("A1^2").unwrap();
        let d = f.diamond(&vector(&[0.0, 0.0]), &vector(&[a, b]), FaceType::CHAMBER).unwrap();
        (f, d)
    }

    #[test]
    fn staircase_in_a_box() {
        let (_, d) = box_diamond(3.0, 4.0);
        let x = vector(&[0.0, 0.0]);
        let y = vector(&[3.0, 4.0]);
        assert!((finsler_upper(&d, &x, &y).unwrap() - 7.0).abs() < 1e-9);
        let o = finsler_oracle(&d, &x, &y, 64).unwrap();
        assert!((o - 7.0).abs() < 1e-9, "{o}");
        assert!(o >= 5.0 / SQRT_2);
        let e = finsler_estimate(&d, &x, &y).unwrap();
        assert!(e.lower <= e.upper && e.upper >= 5.0);
        // Non-longitudinal pair: the segment itself.
        let u = vector(&[0.0, 4.0]);
        let v = vector(&[3.0, 1.0]);
        assert!((finsler_upper(&d, &u, &v).unwrap() - (&u - &v).norm()).abs() < 1e-12);
        assert!((finsler_oracle(&d, &u, &v, 16).unwrap() - (&u - &v).norm()).abs() < 1e-9);
        assert_eq!(finsler_oracle(&d, &u, &u, 16).unwrap(), 0.0);
        assert_eq!(finsler_upper(&d, &vector(&[4.0, 0.0]), &u).unwrap_err(), GeomError::PointOutsideDiamond);
    }

    #[test]
    fn hemisphere_requires_cross_sections() {
        let f = CoxeterFlat::from_name("A1^2").unwrap();
        let d = f
            .diamond(&vector(&[0.0, 0.0]), &vector(&[2.0, 1.0]), FaceType::from_walls(&[1]))
            .unwrap();
        assert!(d.is_hemisphere());
        let x = vector(&[1.0, -5.0]);
        assert_eq!(finsler_upper(&d, &x, &vector(&[1.0, 7.0])).unwrap(), 12.0);
        assert!(finsler_upper(&d, &x, &vector(&[1.5, 7.0])).unwrap().is_infinite());
    }

    #[test]
    fn expansion_constants() {
        let (_, d) = box_diamond(3.0, 3.0);
        let diag = vector(&[1.0, 1.0]);
        assert!((expansion_constant(&d, &diag).unwrap() - SQRT_2).abs() < 1e-12);
        let sampled = expansion_constant_sampled(&d, &diag, 720).unwrap();
        assert!((sampled - SQRT_2).abs() / SQRT_2 < 0.02);
        let near_wall = vector(&[1.0, 1e-4]);
        assert!(expansion_constant(&d, &near_wall).unwrap() < 1.0 + 1e-7);
        assert_eq!(
            expansion_constant(&d, &vector(&[1.0, -1.0])).unwrap_err(),
            GeomError::NotLongitudinal(0)
        );
        // Diagonal pairs attain the bound: d_box = 2a = sqrt(2) * a sqrt(2).
        let x = vector(&[0.5, 0.5]);
        let y = vector(&[2.5, 2.5]);
        let o = finsler_oracle(&d, &x, &y, 32).unwrap();
        assert!((o - SQRT_2 * (&y - &x).norm()).abs() < 1e-9);
    }

    #[test]
    fn a2_oracle_agrees_with_two_legs() {
        let f = CoxeterFlat::from_name("A2").unwrap();
        let g = f.group().clone();
        let xp = g.chamber_vertices()[0].clone() * 3.0 + g.chamber_vertices()[1].clone() * 2.0;
        let d = f.diamond(&vector(&[0.0, 0.0]), &xp, FaceType::CHAMBER).unwrap();
        let (xm, xp) = (d.tips().0.clone(), d.tips().1.clone());
        let up = finsler_upper(&d, &xm, &xp).unwrap();
        let lo = finsler_lower(&d, &xm, &xp);
        let o = finsler_oracle(&d, &xm, &xp, 64).unwrap();
        assert!(lo <= o + 1e-9 && o <= up + 1e-9, "{lo} {o} {up}");
        assert!((o - up).abs() / up < 0.02, "{o} {up}");
    }

    #[test]
    fn oracle_is_monotone_in_resolution_on_samples() {
        let (_, d) = box_diamond(3.0, 4.0);
        let x = vector(&[0.3, 0.2]);
        let y = vector(&[2.2, 3.9]);
        let rows = oracle_table(&d, &x, &y, &[4, 8, 16, 32]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].value <= w[0].value + 1e-9);
        }
        assert!(oracle_gap(&d, &x, &y, 32).unwrap() < 0.02);
    }

    #[test]
    fn contraction_examples() {
        let (f, d) = box_diamond(3.0, 4.0);
        // Both project to the corner (3, 0).
        let r = contraction_check(&f, &d, &vector(&[5.0, -1.0]), &vector(&[4.0, -3.0]), Some(16)).unwrap();
        assert_eq!(r.projected, 0.0);
        assert!(r.pass);
        // Adjacent faces.
        let r = contraction_check(&f, &d, &vector(&[-1.0, 3.5]), &vector(&[0.5, 5.0]), Some(32)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(
            contraction_check(&f, &d, &vector(&[-1.0, 1.0]), &vector(&[1.0, 1.0]), None).unwrap_err(),
            GeomError::SegmentMeetsDiamond
        );
        let h = f
            .diamond(&vector(&[0.0, 0.0]), &vector(&[2.0, 1.0]), FaceType::from_walls(&[1]))
            .unwrap();
        let r = contraction_check(&f, &h, &vector(&[3.0, 0.0]), &vector(&[4.0, 9.0]), None).unwrap();
        assert_eq!(r.same_cross_section, Some(true));
        assert!(r.pass);
    }

    proptest! {
        #[test]
        fn oracle_triangle_and_symmetry(
            p in proptest::collection::vec((0.0f64..3.0, 0.0f64..2.0), 3),
        ) {
            let (_, d) = box_diamond(3.0, 2.0);
            let pts: Vec<Vector> = p.iter().map(|(a, b)| vector(&[*a, *b])).collect();
            let n = 12;
            let ab = finsler_oracle(&d, &pts[0], &pts[1], n).unwrap();
            let ba = finsler_oracle(&d, &pts[1], &pts[0], n).unwrap();
            let bc = finsler_oracle(&d, &pts[1], &pts[2], n).unwrap();
            let ac = finsler_oracle(&d, &pts[0], &pts[2], n).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
            // Grids differ per query pair: compare with the exact upper bounds.
            let ab_u = finsler_upper(&d, &pts[0], &pts[1]).unwrap();
            let bc_u = finsler_upper(&d, &pts[1], &pts[2]).unwrap();
            let ac_u = finsler_upper(&d, &pts[0], &pts[2]).unwrap();
            prop_assert!(ac_u <= ab_u + bc_u + 1e-9);
            prop_assert!(ab >= finsler_lower(&d, &pts[0], &pts[1]) - 1e-9);
            prop_assert!(ac >= (&pts[0] - &pts[2]).norm() - 1e-9);
            prop_assert!(bc <= bc_u + 1e-9);
        }

        #[test]
        fn equivalence_with_euclidean_in_boxes(
            p in proptest::collection::vec((0.0f64..3.0, 0.0f64..2.0), 2),
        ) {
            let (_, d) = box_diamond(3.0, 2.0);
            let x = vector(&[p[0].0, p[0].1]);
            let y = vector(&[p[1].0, p[1].1]);
            let u = finsler_upper(&d, &x, &y).unwrap();
            prop_assert!(u <= SQRT_2 * (&x - &y).norm() + 1e-9);
        }
    }
}
