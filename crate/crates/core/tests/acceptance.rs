//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every stochastic part draws from a fixed ChaCha20 seed.

use std::process::ExitCode;
use std::time::Instant;

use cat0_morse::coxeter::{FaceType, ReflectionGroup, ThetaCone};
use cat0_morse::finsler::{
    expansion_constant, finsler_oracle, oracle_gap, contraction_check, tree_contraction_check,
    TAU_TEST,
};
use cat0_morse::flat::CoxeterFlat;
use cat0_morse::linalg::{vector, Vector};
use cat0_morse::morse::{
    antipodality_check, best_ray_fit, four_point_defect_exact, graph_distances,
    ideal_endpoint_product, perturb_flat, perturb_product, product_zigzag, quasiline_parallel_set,
    verify_morse, zigzag_generator, Antipodality, EndFlag,
};
use cat0_morse::regularity::{check_coarse_regular, CoarseVerdict, PolyPath};
use cat0_morse::space::ModelSpace;
use cat0_morse::tree::product::face_of_support;
use cat0_morse::tree::{MetricTree, ProductFlag, ProductPoint, ProductRay, TreePoint, TreeProduct};
use cat0_morse::GeomError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn a1(k: usize) -> ReflectionGroup {
    ReflectionGroup::from_name(&format!("A1^{k}")).unwrap()
}

fn random_vector(r: &mut ChaCha20Rng, dim: usize, scale: f64) -> Vector {
    Vector::from_fn(dim, |_, _| r.random_range(-scale..scale))
}

fn positive_direction(r: &mut ChaCha20Rng, k: usize) -> Vector {
    loop {
        let v = Vector::from_fn(k, |_, _| r.random_range(0.0..1.0));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// A unit direction of the canonical placement with type in `theta`.
fn theta_direction(r: &mut ChaCha20Rng, g: &ReflectionGroup, theta: &ThetaCone) -> Vector {
    loop {
        let v = random_vector(r, g.rank(), 1.0);
        if v.norm() > 1e-3 {
            let t = g.chamber_project(&v.normalize()).0;
            return theta.pull_inside(&t);
        }
    }
}

fn random_trees(r: &mut ChaCha20Rng, k: usize, max_vertices: usize) -> TreeProduct {
    let factors = (0..k)
        .map(|_| {
            let n = r.random_range(3..=max_vertices);
            MetricTree::random(r, n, 0.3, 2.0)
        })
        .collect();
    TreeProduct::new(factors).unwrap()
}

fn random_vertex(r: &mut ChaCha20Rng, t: &MetricTree) -> TreePoint {
    let vs = t.vertices();
    vs[r.random_range(0..vs.len())]
}

fn two_ends(r: &mut ChaCha20Rng, t: &MetricTree) -> (usize, usize) {
    let a = r.random_range(0..t.end_count());
    let mut b = r.random_range(0..t.end_count() - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Dominant representative of the orbit of `v`: the orbit point paired
/// most with a regular chamber vector.
fn dominant_oracle(g: &ReflectionGroup, rho: &Vector, v: &Vector) -> Vector {
    g.elements()
        .map(|e| g.apply(e, v))
        .max_by(|a, b| a.dot(rho).total_cmp(&b.dot(rho)))
        .unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut agree: f64 = 0.0;
    for name in ["A1^3", "A2", "B2"] {
        let flat = CoxeterFlat::from_name(name).unwrap();
        let g = flat.group().clone();
        let rho: Vector = g.chamber_vertices().iter().fold(Vector::zeros(g.rank()), |a, v| a + v);
        for _ in 0..100_000 {
            let x = random_vector(&mut r, g.rank(), 10.0);
            let y = random_vector(&mut r, g.rank(), 10.0);
            let y2 = &y + random_vector(&mut r, g.rank(), 2.0);
            let x2 = &x + random_vector(&mut r, g.rank(), 2.0);
            let dxy = dominant_oracle(&g, &rho, &(&y - &x));
            let dxy2 = dominant_oracle(&g, &rho, &(&y2 - &x));
            let dx2y = dominant_oracle(&g, &rho, &(&y - &x2));
            worst = worst.max((&dxy - &dxy2).norm() - (&y2 - &y).norm());
            worst = worst.max((&dxy - &dx2y).norm() - (&x2 - &x).norm());
            agree = agree.max((flat.delta_distance(&x, &y) - &dxy).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-9 && agree <= 1e-9 && secs < 5.0,
        detail: format!("3x1e5 triples, max defect {worst:.2e}, impl/oracle gap {agree:.2e}, {secs:.2}s"),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let (mut fails, mut tight, mut nontrivial) = (0usize, 0usize, 0usize);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let k = r.random_range(2..=3);
        let x = random_trees(&mut r, k, 50);
        let g = a1(k);
        let theta = ThetaCone::new(&g, FaceType::CHAMBER, r.random_range(0.1..0.9 * g.max_margin(FaceType::CHAMBER))).unwrap();
        let mut minus = Vec::new();
        let mut plus = Vec::new();
        let mut base = Vec::new();
        for i in 0..k {
            let t = x.factor(i);
            let (a, b) = two_ends(&mut r, t);
            minus.push(a);
            plus.push(b);
            let v = random_vertex(&mut r, t);
            base.push(if r.random_bool(0.5) { t.project_line(&v, a, b) } else { v });
        }
        let all: Vec<usize> = (0..k).collect();
        let p = x
            .parallel_set(ProductFlag::new(all.clone(), minus).unwrap(), ProductFlag::new(all, plus.clone()).unwrap())
            .unwrap();
        let w = theta.pull_inside(&positive_direction(&mut r, k));
        let ray = ProductRay::new(base, w.iter().copied().collect(), plus).unwrap();
        let rep = x.ray_dive_check(&ray, &p, &theta).unwrap();
        if !rep.pass {
            fails += 1;
        }
        worst = worst.max(rep.entry_time - rep.bound);
        if rep.distance_to_parallel_set > 1e-9 {
            nontrivial += 1;
            if rep.entry_time >= 0.95 * rep.bound {
                tight += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let frac = tight as f64 / 10_000.0;
    Outcome {
        pass: fails == 0 && worst <= 1e-9 && frac >= 0.01 && secs < 10.0,
        detail: format!(
            "1e4 rays, {fails} failures, max(entry-bound) {worst:.2e}, {nontrivial} off the set, {:.1}% within 5% of bound, {secs:.2}s",
            100.0 * frac
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut fails, mut leaving) = (0usize, 0usize);
    let mut min_slack = f64::INFINITY;
    for _ in 0..1_000 {
        let k = r.random_range(2..=3);
        let x = random_trees(&mut r, k, 30);
        let g = a1(k);
        let theta = ThetaCone::new(&g, FaceType::CHAMBER, r.random_range(0.1..0.9 * g.max_margin(FaceType::CHAMBER))).unwrap();
        let mut o = Vec::new();
        let mut tau = Vec::new();
        let mut y = Vec::new();
        let mut ends = Vec::new();
        for i in 0..k {
            let t = x.factor(i);
            let v = random_vertex(&mut r, t);
            let e = r.random_range(0..t.end_count());
            let yi = t.ray_from(&v, e, r.random_range(0.0..5.0));
            o.push(v);
            tau.push(e);
            y.push(yi);
            ends.push(if r.random_bool(0.5) { e } else { r.random_range(0..t.end_count()) });
        }
        let tau = ProductFlag::new((0..k).collect(), tau).unwrap();
        let w = theta.pull_inside(&positive_direction(&mut r, k));
        let ray = ProductRay::new(y, w.iter().copied().collect(), ends).unwrap();
        let times: Vec<f64> = (0..=400).map(|j| j as f64 * 0.5).collect();
        let rep = x.ray_leave_cone_check(&ray, &o, &tau, &theta, &times).unwrap();
        if !rep.pass {
            fails += 1;
        }
        if !rep.vacuous {
            leaving += 1;
            min_slack = min_slack.min(rep.min_slack);
        }
    }
    Outcome {
        pass: fails == 0 && leaving > 0,
        detail: format!("1e3 rays, {leaving} leave the cone, {fails} failures, min slack {min_slack:.2e}"),
    }
}

fn far_point(r: &mut ChaCha20Rng, x: &TreeProduct) -> ProductPoint {
    (0..x.rank())
        .map(|i| {
            let t = x.factor(i);
            let v = random_vertex(r, t);
            if r.random_bool(0.5) {
                v
            } else {
                t.ray_from(&v, r.random_range(0..t.end_count()), r.random_range(0.0..6.0))
            }
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let (mut done, mut fails, mut boxes, mut hemis, mut flats) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let a2 = CoxeterFlat::from_name("A2").unwrap();
    while done < 1_000 {
        let kind = done % 4;
        let rep = if kind < 3 {
            let x = random_trees(&mut r, 2, 25);
            let face = if kind == 2 { face_of_support(2, &[0]) } else { FaceType::CHAMBER };
            let tips: ProductPoint = (0..2).map(|i| random_vertex(&mut r, x.factor(i))).collect();
            let tips2: ProductPoint = (0..2).map(|i| random_vertex(&mut r, x.factor(i))).collect();
            let Ok(dia) = x.product_diamond(&tips, &tips2, face) else { continue };
            let (p, q) = (far_point(&mut r, &x), far_point(&mut r, &x));
            match tree_contraction_check(&x, &dia, &p, &q, Some(128)) {
                Ok(rep) => {
                    if kind < 2 {
                        let (_, fd) = cat0_morse::finsler::product_box(&x, &dia).unwrap();
                        let (bx, by) = (dia.box_coordinates(&x, &dia.project(&x, &p)), dia.box_coordinates(&x, &dia.project(&x, &q)));
                        if (&by - &bx).norm() > 1e-9 {
                            worst_gap = worst_gap.max(oracle_gap(&fd, &bx, &by, 128).unwrap());
                        }
                        boxes += 1;
                    } else {
                        hemis += 1;
                    }
                    rep
                }
                Err(GeomError::SegmentMeetsDiamond) => continue,
                Err(e) => panic!("{e}"),
            }
        } else {
            let xm = random_vector(&mut r, 2, 1.0);
            let xp = &xm + theta_direction(&mut r, a2.group(), &ThetaCone::new(a2.group(), FaceType::CHAMBER, 0.05).unwrap()) * r.random_range(1.0..6.0);
            let dia = a2.diamond(&xm, &xp, FaceType::CHAMBER).unwrap();
            let (p, q) = (random_vector(&mut r, 2, 10.0), random_vector(&mut r, 2, 10.0));
            match contraction_check(&a2, &dia, &p, &q, Some(128)) {
                Ok(rep) => {
                    let (pp, pq) = (dia.project(&p), dia.project(&q));
                    if (&pq - &pp).norm() > 1e-9 {
                        worst_gap = worst_gap.max(oracle_gap(&dia, &pp, &pq, 128).unwrap());
                    }
                    flats += 1;
                    rep
                }
                Err(GeomError::SegmentMeetsDiamond) => continue,
                Err(e) => panic!("{e}"),
            }
        };
        done += 1;
        if !rep.pass {
            fails += 1;
        }
        if rep.distance > 0.0 && rep.projected.is_finite() {
            worst_ratio = worst_ratio.max(rep.projected / rep.distance);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: fails == 0 && worst_ratio <= 1.0 + TAU_TEST && worst_gap < 0.02,
        detail: format!(
            "{boxes} tree boxes, {hemis} hemisphere, {flats} A2; {fails} failures, max ratio {worst_ratio:.6}, max gap(128) {worst_gap:.2e}, {secs:.1}s"
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let flat = CoxeterFlat::from_name("A1^2").unwrap();
    let mut fails = 0usize;
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..100 {
        let sides = vector(&[r.random_range(2.0..8.0), r.random_range(2.0..8.0)]);
        let dia = flat.diamond(&Vector::zeros(2), &sides, FaceType::CHAMBER).unwrap();
        let x = vector(&[r.random_range(0.0..0.5 * sides[0]), r.random_range(0.0..0.5 * sides[1])]);
        let y = vector(&[r.random_range(x[0] + 0.1..sides[0]), r.random_range(x[1] + 0.1..sides[1])]);
        let c = expansion_constant(&dia, &(&y - &x)).unwrap();
        let o = finsler_oracle(&dia, &x, &y, 128).unwrap();
        let gap = oracle_gap(&dia, &x, &y, 128).unwrap() * o;
        let slack = o - (c * (&y - &x).norm() - gap);
        worst = worst.min(slack);
        if slack < -1e-9 {
            fails += 1;
        }
    }
    let dia = flat.diamond(&Vector::zeros(2), &vector(&[4.0, 4.0]), FaceType::CHAMBER).unwrap();
    let (x, y) = (vector(&[0.5, 0.5]), vector(&[3.0, 3.0]));
    let diag = finsler_oracle(&dia, &x, &y, 128).unwrap() / (&y - &x).norm();
    let c_diag = expansion_constant(&dia, &(&y - &x)).unwrap();
    let sqrt2 = std::f64::consts::SQRT_2;
    let diag_ok = (diag / sqrt2 - 1.0).abs() < 0.02 && (c_diag / sqrt2 - 1.0).abs() < 0.02;
    Outcome {
        pass: fails == 0 && diag_ok,
        detail: format!("1e2 pairs, {fails} failures, min slack {worst:.2e}; diagonal oracle/d {diag:.6}, C {c_diag:.6}"),
    }
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let (mut fails, mut worst_margin, mut worst_excess) = (0usize, f64::INFINITY, f64::NEG_INFINITY);
    for n in 0..1_000 {
        let m = r.random_range(2..=20);
        if n % 3 < 2 {
            let flat = CoxeterFlat::from_name(if n % 3 == 0 { "A2" } else { "B2" }).unwrap();
            let g = flat.group().clone();
            let face = if r.random_bool(0.5) { FaceType::CHAMBER } else { FaceType::from_walls(&[r.random_range(0..2)]) };
            let theta = ThetaCone::new(&g, face, r.random_range(0.05..0.8 * g.max_margin(face))).unwrap();
            let mut pts = vec![random_vector(&mut r, 2, 5.0)];
            let mut length = 0.0;
            for _ in 0..m {
                let l = r.random_range(0.1..3.0);
                length += l;
                let next = pts.last().unwrap() + theta_direction(&mut r, &g, &theta) * l;
                pts.push(next);
            }
            let straight = flat.straight_path_check(&pts, &theta).unwrap();
            let detour = flat.detour_check(&pts, &theta).unwrap();
            let ratio = length / (&pts[m] - &pts[0]).norm();
            worst_margin = worst_margin.min(straight.min_membership_margin);
            worst_excess = worst_excess.max(ratio - detour.bound);
            if !(straight.inside && straight.chords_regular && detour.pass && ratio <= detour.bound * (1.0 + 1e-9)) {
                fails += 1;
            }
        } else {
            let k = r.random_range(2..=3);
            let x = random_trees(&mut r, k, 30);
            let g = a1(k);
            let theta = ThetaCone::new(&g, FaceType::CHAMBER, r.random_range(0.05..0.8 * g.max_margin(FaceType::CHAMBER))).unwrap();
            let ends: Vec<usize> = (0..k).map(|i| r.random_range(0..x.factor(i).end_count())).collect();
            let mut pts: Vec<ProductPoint> = vec![(0..k).map(|i| random_vertex(&mut r, x.factor(i))).collect()];
            let mut length = 0.0;
            for _ in 0..m {
                let l = r.random_range(0.1..3.0);
                length += l;
                let w = theta.pull_inside(&positive_direction(&mut r, k));
                let p = pts.last().unwrap();
                let next: ProductPoint = (0..k).map(|i| x.factor(i).ray_from(&p[i], ends[i], l * w[i])).collect();
                pts.push(next);
            }
            let margin = pts
                .iter()
                .map(|p| x.theta_diamond_margin(&pts[0], &pts[m], &theta, p).unwrap())
                .fold(f64::INFINITY, f64::min);
            let bound = cat0_morse::flat::bounded_detour_constant(&g, &theta);
            let ratio = length / x.distance(&pts[0], &pts[m]);
            worst_margin = worst_margin.min(margin);
            worst_excess = worst_excess.max(ratio - bound);
            if margin < -1e-9 || ratio > bound * (1.0 + 1e-9) {
                fails += 1;
            }
        }
    }
    Outcome {
        pass: fails == 0,
        detail: format!("1e3 paths, {fails} failures, min breakpoint margin {worst_margin:.2e}, max(ratio-L) {worst_excess:.3}"),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let steps = [100usize, 1_000, 10_000];
    let trials = 16;
    let flat = CoxeterFlat::from_name("A2").unwrap();
    let g = flat.group().clone();
    let gen = ThetaCone::new(&g, FaceType::CHAMBER, 0.3).unwrap();
    let theta = ThetaCone::new(&g, FaceType::CHAMBER, 0.2).unwrap();
    let theta_p = ThetaCone::new(&g, FaceType::CHAMBER, 0.1).unwrap();
    let verts = g.chamber_vertices();
    let (v1, v2) = (gen.pull_inside(&verts[0]), gen.pull_inside(&verts[1]));
    let mut tr = rng(70);
    let trees = TreeProduct::new(vec![MetricTree::random(&mut tr, 30, 0.5, 2.0), MetricTree::random(&mut tr, 30, 0.5, 2.0)]).unwrap();
    let g2 = a1(2);
    let theta2 = ThetaCone::new(&g2, FaceType::CHAMBER, 0.2).unwrap();
    let theta2_p = ThetaCone::new(&g2, FaceType::CHAMBER, 0.1).unwrap();
    let (w1, w2) = (vector(&[0.3f64.cos(), 0.3f64.sin()]), vector(&[0.3f64.sin(), 0.3f64.cos()]));
    let tree_start: ProductPoint = vec![trees.factor(0).vertices()[0], trees.factor(1).vertices()[0]];
    let tree_ends = [0usize, 0];

    let mut ok = true;
    let mut violations = 0usize;
    let mut lines = Vec::new();
    for beta in [0.1, 0.5, 1.0] {
        let mut d_flat = Vec::new();
        let mut d_tree = Vec::new();
        for &n in &steps {
            let (mut df, mut dt): (f64, f64) = (0.0, 0.0);
            for trial in 0..trials {
                // Separate streams: the first lengths and noise draws agree
                // across path lengths.
                let mut lr = rng(7_000 + trial);
                let mut r = rng(8_000 + trial);
                let lengths: Vec<f64> = (0..n).map(|_| lr.random_range(0.5..1.5)).collect();
                let clean = zigzag_generator(&flat, &gen, &v1, &v2, &lengths, &Vector::zeros(2)).unwrap();
                let noisy = perturb_flat(clean.points(), beta, &mut r);
                let path = PolyPath::by_arc_length(&flat, noisy).unwrap();
                df = df.max(verify_morse(&path, &theta, beta, &theta_p, 1).unwrap().d_measured);
                if trial == 0 && matches!(check_coarse_regular(&path, &theta, beta, &coarse_grid(&path)), CoarseVerdict::Violation { .. }) {
                    violations += 1;
                }

                let clean = product_zigzag(&trees, &theta2, &tree_start, &tree_ends, &w1, &w2, &lengths).unwrap();
                let noisy = perturb_product(&trees, clean.points(), beta, &mut rng(9_000 + trial));
                let path = PolyPath::by_arc_length(&trees, noisy).unwrap();
                dt = dt.max(verify_morse(&path, &theta2, beta, &theta2_p, 1).unwrap().d_measured);
                if trial == 0 && matches!(check_coarse_regular(&path, &theta2, beta, &coarse_grid(&path)), CoarseVerdict::Violation { .. }) {
                    violations += 1;
                }
            }
            d_flat.push(df);
            d_tree.push(dt);
        }
        let f_ok = d_flat[2] <= 1.1 * d_flat[0] + 1e-9;
        let t_ok = d_tree[2] <= 1.1 * d_tree[0] + 1e-9;
        ok &= f_ok && t_ok;
        lines.push(format!(
            "beta {beta}: A2 D={:.4}/{:.4}/{:.4}{}, TxT D={:.4}/{:.4}/{:.4}{}",
            d_flat[0], d_flat[1], d_flat[2], if f_ok { "" } else { " (ratio broken)" },
            d_tree[0], d_tree[1], d_tree[2], if t_ok { "" } else { " (ratio broken)" },
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: ok && violations == 0 && secs < 60.0,
        detail: format!("{}; coarse violations {violations}; {secs:.1}s", lines.join("; ")),
    }
}

/// About 150 sample times spread over the breakpoints.
fn coarse_grid<S: ModelSpace>(path: &PolyPath<'_, S>) -> Vec<f64> {
    let t = path.times();
    let stride = (t.len() / 150).max(1);
    let mut g: Vec<f64> = t.iter().step_by(stride).copied().collect();
    if *g.last().unwrap() != *t.last().unwrap() {
        g.push(*t.last().unwrap());
    }
    g
}

fn criterion_8() -> Outcome {
    let flat = CoxeterFlat::from_name("A2").unwrap();
    let g = flat.group().clone();
    let gen = ThetaCone::new(&g, FaceType::CHAMBER, 0.3).unwrap();
    let theta = ThetaCone::new(&g, FaceType::CHAMBER, 0.2).unwrap();
    let verts = g.chamber_vertices();
    let (v1, v2) = (gen.pull_inside(&verts[0]), gen.pull_inside(&verts[1]));
    let mut fits = Vec::new();
    let mut d_max: f64 = 0.0;
    for n in [10usize, 20, 40, 80] {
        let lengths: Vec<f64> = (1..=n).map(|s| s as f64).collect();
        let path = zigzag_generator(&flat, &gen, &v1, &v2, &lengths, &Vector::zeros(2)).unwrap();
        fits.push(best_ray_fit(path.points(), 720).sup_distance);
        d_max = d_max.max(verify_morse(&path, &theta, 0.0, &theta, 2).unwrap().d_measured);
    }
    let increasing = fits.windows(2).all(|w| w[1] > w[0]);
    Outcome {
        pass: increasing && d_max == 0.0,
        detail: format!(
            "ray-fit sup {:.3}/{:.3}/{:.3}/{:.3}, D_measured max {d_max:e}",
            fits[0], fits[1], fits[2], fits[3]
        ),
    }
}

struct EmbeddedGraph {
    vertices: Vec<ProductPoint>,
    edges: Vec<(usize, usize)>,
}

/// All pairs regular for the `A1^k` chamber cone of margin `eps`, computed
/// from the factor distances directly.
fn pair_regular(x: &TreeProduct, p: &ProductPoint, q: &ProductPoint, eps: f64) -> bool {
    let d = x.factor_distances(p, q);
    let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    n > 1e-9 && d.iter().all(|&v| v >= eps.sin() * n - 1e-12)
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let eps = 0.2;
    let g = a1(2);
    let leg_cone = ThetaCone::new(&g, FaceType::CHAMBER, 0.3).unwrap();
    let mut cycles_rejected = 0usize;
    let (mut accepted, mut tripods, mut with_extra, mut attempts) = (0usize, 0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    while accepted < 100 && attempts < 20_000 {
        attempts += 1;
        let x = random_trees(&mut r, 2, 20);
        let mut gr = EmbeddedGraph {
            vertices: vec![(0..2).map(|i| random_vertex(&mut r, x.factor(i))).collect()],
            edges: Vec::new(),
        };
        let legs = r.random_range(2..=5);
        // Half the graphs start as a tripod: three legs from the root along
        // rays that separate there in both factors.
        let star = if r.random_bool(0.5) { separating_ends(&mut r, &x, &gr.vertices[0]) } else { None };
        for leg in 0..legs {
            let from = if star.is_some() && leg < 3 { 0 } else { r.random_range(0..gr.vertices.len()) };
            let w = leg_cone.pull_inside(&positive_direction(&mut r, 2));
            let l = r.random_range(0.5..4.0);
            let v: ProductPoint = (0..2)
                .map(|i| {
                    let t = x.factor(i);
                    let e = match &star {
                        Some(s) if leg < 3 => s[i][leg],
                        _ => r.random_range(0..t.end_count()),
                    };
                    t.ray_from(&gr.vertices[from][i], e, l * w[i])
                })
                .collect();
            gr.vertices.push(v);
            gr.edges.push((from, gr.vertices.len() - 1));
        }
        let mut cycle = false;
        if r.random_bool(0.3) {
            let (a, b) = (r.random_range(0..gr.vertices.len()), r.random_range(0..gr.vertices.len()));
            let tree_path = tree_path_length(&x, &gr, a, b);
            if a != b && (tree_path - x.distance(&gr.vertices[a], &gr.vertices[b])).abs() > 1e-9 {
                gr.edges.push((a, b));
                cycle = true;
            }
        }
        let (pts, sub_edges) = subdivide(&x, &gr, 0.25);
        if pts.len() > 90 || !embedded(&x, &gr) {
            continue;
        }
        if !all_pairs_regular(&x, &pts, eps) || !all_pairs_regular(&x, &subdivide(&x, &gr, 0.02).0, eps) {
            cycles_rejected += cycle as usize;
            continue;
        }
        accepted += 1;
        if star.is_some() {
            tripods += 1;
        }
        if gr.edges.len() > legs {
            with_extra += 1;
        }
        let d = graph_distances(pts.len(), &sub_edges);
        worst = worst.max(four_point_defect_exact(&d, pts.len()));
    }
    Outcome {
        pass: accepted >= 50 && worst <= 1e-9,
        detail: format!(
            "{accepted} regular graphs of {attempts} tried ({tripods} with a tripod center, {with_extra} with an extra edge, {cycles_rejected} embedded cycles rejected as irregular), max four-point delta {worst:.2e}"
        ),
    }
}

/// Per factor, three ends whose rays from `c` pairwise separate at `c`.
fn separating_ends(r: &mut ChaCha20Rng, x: &TreeProduct, c: &ProductPoint) -> Option<Vec<[usize; 3]>> {
    (0..x.rank())
        .map(|i| {
            let t = x.factor(i);
            let mut picked: Vec<usize> = Vec::new();
            let mut order: Vec<usize> = (0..t.end_count()).collect();
            for j in (1..order.len()).rev() {
                order.swap(j, r.random_range(0..=j));
            }
            for e in order {
                if picked.iter().all(|&p| t.end_overlap(&c[i], p, e) <= 1e-12) {
                    picked.push(e);
                }
            }
            (picked.len() >= 3).then(|| [picked[0], picked[1], picked[2]])
        })
        .collect()
}

fn all_pairs_regular(x: &TreeProduct, pts: &[ProductPoint], eps: f64) -> bool {
    (0..pts.len()).all(|i| (i + 1..pts.len()).all(|j| pair_regular(x, &pts[i], &pts[j], eps)))
}

/// Edges meet only at shared vertices: no sample of one edge lies on
/// another edge away from their common endpoints.
fn embedded(x: &TreeProduct, gr: &EmbeddedGraph) -> bool {
    let on = |p: &ProductPoint, a: &ProductPoint, b: &ProductPoint| {
        (x.distance(a, p) + x.distance(p, b) - x.distance(a, b)).abs() <= 1e-9
    };
    for (i, &(u, v)) in gr.edges.iter().enumerate() {
        for (j, &(a, b)) in gr.edges.iter().enumerate() {
            if i == j {
                continue;
            }
            let (p, q) = (&gr.vertices[u], &gr.vertices[v]);
            for k in 1..64 {
                let z = x.interpolate(p, q, k as f64 / 64.0);
                if on(&z, &gr.vertices[a], &gr.vertices[b]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Length of the path joining `a` and `b` through the spanning legs.
fn tree_path_length(x: &TreeProduct, gr: &EmbeddedGraph, a: usize, b: usize) -> f64 {
    let legs: Vec<(usize, usize, f64)> = gr
        .edges
        .iter()
        .map(|&(u, v)| (u, v, x.distance(&gr.vertices[u], &gr.vertices[v])))
        .collect();
    graph_distances(gr.vertices.len(), &legs)[a][b]
}

/// Splits every edge into pieces of length at most `h`.
fn subdivide(x: &TreeProduct, gr: &EmbeddedGraph, h: f64) -> (Vec<ProductPoint>, Vec<(usize, usize, f64)>) {
    let mut pts = gr.vertices.clone();
    let mut edges = Vec::new();
    for &(u, v) in &gr.edges {
        let (p, q) = (&gr.vertices[u], &gr.vertices[v]);
        let len = x.distance(p, q);
        let pieces = (len / h).ceil().max(1.0) as usize;
        let mut prev = u;
        for j in 1..pieces {
            pts.push(x.interpolate(p, q, j as f64 / pieces as f64));
            let id = pts.len() - 1;
            edges.push((prev, id, len / pieces as f64));
            prev = id;
        }
        edges.push((prev, v, len / pieces as f64));
    }
    (pts, edges)
}

fn ray_samples(x: &TreeProduct, ray: &ProductRay, length: f64, n: usize) -> Vec<ProductPoint> {
    (0..=n).map(|j| ray.point(x, length * j as f64 / n as f64)).collect()
}

/// Ground truth for opposition seen from `base`: rays to the two ends
/// diverge immediately in every factor.
fn diverge_at(x: &TreeProduct, base: &ProductPoint, a: &[usize], b: &[usize]) -> bool {
    (0..x.rank()).all(|i| {
        let t = x.factor(i);
        let l = 1_000.0;
        (t.distance(&t.ray_from(&base[i], a[i], l), &t.ray_from(&base[i], b[i], l)) - 2.0 * l).abs() <= 1e-6
    })
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let g = a1(2);
    let theta = ThetaCone::new(&g, FaceType::CHAMBER, 0.2).unwrap();
    let mut mismatches = Vec::new();
    for case in 0..100 {
        let x = random_trees(&mut r, 2, 40);
        let base: ProductPoint = (0..2).map(|i| random_vertex(&mut r, x.factor(i))).collect();
        let ea: Vec<usize> = (0..2).map(|i| r.random_range(0..x.factor(i).end_count())).collect();
        let other = |r: &mut ChaCha20Rng, i: usize| {
            let t = x.factor(i);
            (ea[i] + r.random_range(1..t.end_count())) % t.end_count()
        };
        let wa = theta.pull_inside(&positive_direction(&mut r, 2));
        let beta = r.random_range(0.0..0.5);
        let all = vec![0usize, 1];
        let ok = match case % 4 {
            0 | 1 => {
                let (eb, truth) = match case % 8 {
                    0 | 1 => (ea.clone(), Antipodality::Equal),
                    4 | 5 => (vec![other(&mut r, 0), other(&mut r, 1)], Antipodality::Antipodal),
                    _ => (vec![ea[0], other(&mut r, 1)], Antipodality::Violation),
                };
                let wb = theta.pull_inside(&positive_direction(&mut r, 2));
                let ra = ProductRay::new(base.clone(), wa.iter().copied().collect(), ea.clone()).unwrap();
                let rb = ProductRay::new(base.clone(), wb.iter().copied().collect(), eb.clone()).unwrap();
                let pa = perturb_product(&x, &ray_samples(&x, &ra, 300.0, 60), beta, &mut r);
                let pb = perturb_product(&x, &ray_samples(&x, &rb, 300.0, 60), beta, &mut r);
                let rep = antipodality_check(&x, &pa, &pb, &theta).unwrap();
                let opp_truth = (truth == Antipodality::Antipodal).then(|| diverge_at(&x, &base, &ea, &eb));
                rep.verdict == truth && (truth != Antipodality::Antipodal || rep.x_opposite == opp_truth)
            }
            2 => {
                // Quasiline through a point of the line between the chosen ends.
                let eb: Vec<usize> = vec![other(&mut r, 0), other(&mut r, 1)];
                let mid: ProductPoint = (0..2).map(|i| x.factor(i).project_line(&base[i], eb[i], ea[i])).collect();
                let fwd = ProductRay::new(mid.clone(), wa.iter().copied().collect(), ea.clone()).unwrap();
                let bwd = ProductRay::new(mid.clone(), wa.iter().copied().collect(), eb.clone()).unwrap();
                let mut pts: Vec<ProductPoint> = ray_samples(&x, &bwd, 300.0, 60).into_iter().rev().collect();
                pts.extend(ray_samples(&x, &fwd, 300.0, 60).into_iter().skip(1));
                let pts = perturb_product(&x, &pts, beta, &mut r);
                let rep = quasiline_parallel_set(&x, &pts, 60, &theta).unwrap();
                rep.tau_plus == ProductFlag::new(all.clone(), ea.clone()).unwrap()
                    && rep.tau_minus == ProductFlag::new(all.clone(), eb).unwrap()
                    && rep.x_opposite
                    && rep.max_distance <= beta + 1e-9
            }
            _ => {
                // One quasiray seen from two base points: the same flag.
                let ray = ProductRay::new(base.clone(), wa.iter().copied().collect(), ea.clone()).unwrap();
                let pts = perturb_product(&x, &ray_samples(&x, &ray, 300.0, 60), beta, &mut r);
                let other_base: ProductPoint = (0..2).map(|i| random_vertex(&mut r, x.factor(i))).collect();
                let mut shifted = vec![other_base];
                shifted.extend(pts.iter().skip(1).cloned());
                let truth = EndFlag::Product(ProductFlag::new(all.clone(), ea.clone()).unwrap());
                let a = ideal_endpoint_product(&x, &pts, &theta).unwrap();
                let b = ideal_endpoint_product(&x, &shifted, &theta).unwrap();
                a.flag == truth && b.flag == truth
            }
        };
        if !ok {
            mismatches.push(case);
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!("1e2 cases, mismatches {mismatches:?}"),
    }
}

fn main() -> ExitCode {
    let only = std::env::var("ONLY").ok();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("delta-triangle inequality", criterion_1),
        ("ray diving into parallel sets", criterion_2),
        ("leaving a cone", criterion_3),
        ("diamond projection contraction", criterion_4),
        ("Finsler expansion", criterion_5),
        ("straight paths stay in diamonds", criterion_6),
        ("Morse constant at desk scale", criterion_7),
        ("regular zigzags are not Morse-straight", criterion_8),
        ("regular subsets of tree products are trees", criterion_9),
        ("endpoint uniqueness and antipodality", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.as_deref().is_some_and(|o| o != (i + 1).to_string()) {
            continue;
        }
        let o = f();
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
