//! Experiment suites. Every suite returns its JSON report, its CSV tables
//! and the number of asserted checks that failed.

use cat0_morse::finsler::{finsler_estimate, finsler_oracle, oracle_table, product_box, contraction_check, tree_contraction_check};
use cat0_morse::morse::{
    best_ray_fit, hyperbolicity_estimate, ideal_endpoint_product, perturb_flat, perturb_product, product_zigzag,
    verify_morse, zigzag_generator, EndFlag, MorseReport,
};
use cat0_morse::regularity::check_coarse_regular;
use cat0_morse::tree::product::support_of_face;
use cat0_morse::tree::ProductRay;
use cat0_morse::{
    CoarseVerdict, CoxeterFlat, GeomError, ModelSpace, PolyPath, ProductFlag, ProductPoint, ReflectionGroup, ThetaCone,
    TreePoint, TreeProduct, Vector,
};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{stream, ExperimentConfig, Space, RNG_NAME};
use crate::error::{CliError, CliResult};

pub struct Artifacts {
    pub report: Value,
    /// `(file name, csv text)`.
    pub tables: Vec<(String, String)>,
    pub checks: usize,
    pub failed: usize,
}

fn csv_text<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn artifacts<T: Serialize>(
    command: &str,
    cfg: &ExperimentConfig,
    summary: Value,
    rows: &[T],
    passes: impl Iterator<Item = bool>,
) -> CliResult<Artifacts> {
    let (mut checks, mut failed) = (0, 0);
    for p in passes {
        checks += 1;
        failed += usize::from(!p);
    }
    let report = json!({
        "command": command,
        "rng": RNG_NAME,
        "seed": cfg.seed,
        "config": cfg,
        "checks": checks,
        "failed": failed,
        "summary": summary,
        "rows": rows,
    });
    Ok(Artifacts {
        report,
        tables: vec![(format!("{command}.csv"), csv_text(rows)?)],
        checks,
        failed,
    })
}

fn trees<'a>(space: &'a Space, command: &str) -> CliResult<&'a TreeProduct> {
    match space {
        Space::Trees(x) => Ok(x),
        Space::Flat(_) => Err(GeomError::Unsupported(format!("{command} needs a tree product")).into()),
    }
}

fn flat<'a>(space: &'a Space, command: &str) -> CliResult<&'a CoxeterFlat> {
    match space {
        Space::Flat(f) => Ok(f),
        Space::Trees(_) => Err(GeomError::Unsupported(format!("{command} needs a flat")).into()),
    }
}

fn a1(k: usize) -> CliResult<ReflectionGroup> {
    Ok(ReflectionGroup::from_name(&format!("A1^{k}"))?)
}

fn positive_direction(r: &mut ChaCha20Rng, k: usize) -> Vector {
    loop {
        let v = Vector::from_fn(k, |_, _| r.random_range(0.0..1.0));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

fn random_vertex(r: &mut ChaCha20Rng, x: &TreeProduct, i: usize) -> TreePoint {
    let vs = x.factor(i).vertices();
    vs[r.random_range(0..vs.len())]
}

fn other_end(r: &mut ChaCha20Rng, x: &TreeProduct, i: usize, e: usize) -> usize {
    let n = x.factor(i).end_count();
    (e + r.random_range(1..n)) % n
}

fn vec_of(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

/// Generator cone strictly inside Theta, for zigzag directions.
fn generator_cone(group: &ReflectionGroup, theta: &ThetaCone) -> CliResult<ThetaCone> {
    let m = (theta.margin() + 0.1).min(0.5 * (theta.margin() + theta.max_margin()));
    Ok(theta.with_margin(group, m)?)
}

fn zigzag_directions(group: &ReflectionGroup, theta: &ThetaCone) -> CliResult<(Vector, Vector)> {
    let verts = group.chamber_vertices();
    if verts.len() < 2 {
        return Err(GeomError::Unsupported("zigzags need rank at least 2".into()).into());
    }
    let g = generator_cone(group, theta)?;
    Ok((g.pull_inside(&verts[0]), g.pull_inside(&verts[1])))
}

#[derive(Serialize)]
struct MorseRow {
    check: &'static str,
    trial: usize,
    steps: usize,
    beta: f64,
    d_measured: Option<f64>,
    witness_displacement: Option<f64>,
    window_max: Option<f64>,
    coarse_verdict: &'static str,
    pass: bool,
}

fn verdict_name(v: &CoarseVerdict) -> &'static str {
    match v {
        CoarseVerdict::Pass => "pass",
        CoarseVerdict::Undecided { .. } => "undecided",
        CoarseVerdict::Violation { .. } => "violation",
    }
}

fn morse_row<S: ModelSpace>(
    path: &PolyPath<'_, S>,
    theta: &ThetaCone,
    theta_prime: &ThetaCone,
    cfg: &ExperimentConfig,
    trial: usize,
) -> (MorseRow, Option<MorseReport>) {
    let b = cfg.b();
    let verdict = check_coarse_regular(path, theta, b, &path.grid(cfg.generator.refine));
    let report = verify_morse(path, theta, b, theta_prime, cfg.generator.refine).ok();
    let not_violated = !matches!(verdict, CoarseVerdict::Violation { .. });
    let row = MorseRow {
        check: "morse-diamond-neighborhood",
        trial,
        steps: cfg.generator.steps,
        beta: cfg.generator.beta,
        d_measured: report.as_ref().map(|r| r.d_measured),
        witness_displacement: report.as_ref().map(|r| r.witness_displacement),
        window_max: report.as_ref().map(|r| r.window_max),
        coarse_verdict: verdict_name(&verdict),
        pass: report.is_some() && not_violated,
    };
    (row, report)
}

/// Noisy zigzags; reports the distance of the path to the diamond of its
/// endpoints.
pub fn morse(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let gen = &cfg.generator;
    let lengths = |trial: usize| -> Vec<f64> {
        let mut r = stream(cfg.seed, 2 * trial as u64);
        (0..gen.steps).map(|_| r.random_range(gen.length_min..=gen.length_max)).collect()
    };
    let results: Vec<(MorseRow, Option<MorseReport>)> = match space {
        Space::Flat(f) => {
            let g = f.group();
            let (theta, theta_prime) = (cfg.theta(g)?, cfg.theta_prime(g)?);
            let (v1, v2) = zigzag_directions(g, &theta)?;
            let gcone = generator_cone(g, &theta)?;
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let clean = zigzag_generator(f, &gcone, &v1, &v2, &lengths(t), &Vector::zeros(g.rank()))?;
                    let noisy = perturb_flat(clean.points(), gen.beta, &mut stream(cfg.seed, 2 * t as u64 + 1));
                    let path = PolyPath::by_arc_length(f, noisy)?;
                    Ok(morse_row(&path, &theta, &theta_prime, cfg, t))
                })
                .collect::<cat0_morse::Result<Vec<_>>>()?
        }
        Space::Trees(x) => {
            let g = a1(x.rank())?;
            let (theta, theta_prime) = (cfg.theta(&g)?, cfg.theta_prime(&g)?);
            let (w1, w2) = zigzag_directions(&g, &theta)?;
            let start: ProductPoint = (0..x.rank()).map(|i| x.factor(i).vertices()[0]).collect();
            let ends = vec![0; x.rank()];
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let clean = product_zigzag(x, &theta, &start, &ends, &w1, &w2, &lengths(t))?;
                    let noisy = perturb_product(x, clean.points(), gen.beta, &mut stream(cfg.seed, 2 * t as u64 + 1));
                    let path = PolyPath::by_arc_length(x, noisy)?;
                    Ok(morse_row(&path, &theta, &theta_prime, cfg, t))
                })
                .collect::<cat0_morse::Result<Vec<_>>>()?
        }
    };
    let d_max = results.iter().filter_map(|r| r.0.d_measured).fold(0.0, f64::max);
    let windows: Vec<&MorseReport> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    let rows: Vec<&MorseRow> = results.iter().map(|r| &r.0).collect();
    artifacts(
        "morse",
        cfg,
        json!({ "d_measured_max": d_max, "reports": windows }),
        &rows,
        rows.iter().map(|r| r.pass),
    )
}

#[derive(Serialize)]
struct ZigzagRow {
    check: &'static str,
    n: usize,
    ray_fit_sup: f64,
    d_measured: f64,
    pass: bool,
}

/// Zigzags with steps `s_n = n`: Theta-regular and inside their diamonds,
/// yet drifting away from every ray.
pub fn zigzag(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let f = flat(space, "zigzag")?;
    let g = f.group();
    let theta = cfg.theta(g)?;
    let (v1, v2) = zigzag_directions(g, &theta)?;
    let gcone = generator_cone(g, &theta)?;
    let mut rows: Vec<ZigzagRow> = Vec::new();
    for &n in &cfg.generator.ns {
        let lengths: Vec<f64> = (1..=n).map(|s| s as f64).collect();
        let path = zigzag_generator(f, &gcone, &v1, &v2, &lengths, &Vector::zeros(g.rank()))?;
        let fit = best_ray_fit(path.points(), cfg.grid.max(8) * 8).sup_distance;
        let d = verify_morse(&path, &theta, 0.0, &theta, cfg.generator.refine)?.d_measured;
        let grows = rows.last().is_none_or(|p| fit > p.ray_fit_sup);
        rows.push(ZigzagRow {
            check: "zigzag-not-ray-close",
            n,
            ray_fit_sup: fit,
            d_measured: d,
            pass: grows && d <= 1e-12,
        });
    }
    artifacts("zigzag", cfg, json!({}), &rows, rows.iter().map(|r| r.pass))
}

#[derive(Serialize)]
struct DiveRow {
    check: &'static str,
    trial: usize,
    distance_to_parallel_set: f64,
    entry_time: f64,
    bound: f64,
    entry_angle: Option<f64>,
    pass: bool,
}

/// Regular rays towards the plus flag of a parallel set enter it in time.
pub fn dive(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let x = trees(space, "dive")?;
    let g = a1(x.rank())?;
    let theta = cfg.theta(&g)?;
    let support = support_of_face(x.rank(), cfg.face());
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = stream(cfg.seed, t as u64);
            let mut minus = Vec::new();
            let mut plus = Vec::new();
            let mut ray_ends = Vec::new();
            let mut base = Vec::new();
            for i in 0..x.rank() {
                let tr = x.factor(i);
                let a = r.random_range(0..tr.end_count());
                let b = other_end(&mut r, x, i, a);
                let v = random_vertex(&mut r, x, i);
                if support.contains(&i) {
                    minus.push(a);
                    plus.push(b);
                    base.push(if r.random_bool(0.5) { tr.project_line(&v, a, b) } else { v });
                } else {
                    base.push(v);
                }
                ray_ends.push(b);
            }
            let p = x.parallel_set(ProductFlag::new(support.clone(), minus)?, ProductFlag::new(support.clone(), plus)?)?;
            let w = theta.pull_inside(&positive_direction(&mut r, x.rank()));
            let ray = ProductRay::new(base, w.iter().copied().collect(), ray_ends)?;
            let rep = x.ray_dive_check(&ray, &p, &theta)?;
            Ok(DiveRow {
                check: "ray-dives-into-parallel-set",
                trial: t,
                distance_to_parallel_set: rep.distance_to_parallel_set,
                entry_time: rep.entry_time,
                bound: rep.bound,
                entry_angle: rep.entry_angle,
                pass: rep.pass,
            })
        })
        .collect::<cat0_morse::Result<Vec<_>>>()?;
    artifacts("dive", cfg, json!({}), &rows, rows.iter().map(|r| r.pass))
}

#[derive(Serialize)]
struct LeaveRow {
    check: &'static str,
    trial: usize,
    exit_time: Option<f64>,
    min_slack: Option<f64>,
    vacuous: bool,
    pass: bool,
}

/// Regular rays that leave a cone move away from it at a linear rate.
pub fn leave(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let x = trees(space, "leave")?;
    let g = a1(x.rank())?;
    let theta = cfg.theta(&g)?;
    let support = support_of_face(x.rank(), cfg.face());
    let times: Vec<f64> = (0..=cfg.grid * 4).map(|j| j as f64 * 0.5).collect();
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = stream(cfg.seed, t as u64);
            let (mut o, mut y, mut tau, mut ends) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..x.rank() {
                let tr = x.factor(i);
                let v = random_vertex(&mut r, x, i);
                let e = r.random_range(0..tr.end_count());
                let yi = if support.contains(&i) {
                    tau.push(e);
                    tr.ray_from(&v, e, r.random_range(0.0..5.0))
                } else {
                    random_vertex(&mut r, x, i)
                };
                o.push(v);
                y.push(yi);
                ends.push(if r.random_bool(0.5) { e } else { r.random_range(0..tr.end_count()) });
            }
            let tau = ProductFlag::new(support.clone(), tau)?;
            let w = theta.pull_inside(&positive_direction(&mut r, x.rank()));
            let ray = ProductRay::new(y, w.iter().copied().collect(), ends)?;
            let rep = x.ray_leave_cone_check(&ray, &o, &tau, &theta, &times)?;
            Ok(LeaveRow {
                check: "ray-leaves-cone-linearly",
                trial: t,
                exit_time: rep.exit_time,
                min_slack: rep.min_slack.is_finite().then_some(rep.min_slack),
                vacuous: rep.vacuous,
                pass: rep.pass,
            })
        })
        .collect::<cat0_morse::Result<Vec<_>>>()?;
    artifacts("leave", cfg, json!({}), &rows, rows.iter().map(|r| r.pass))
}

#[derive(Serialize)]
struct ContractionRow {
    check: &'static str,
    trial: usize,
    distance: f64,
    projected: f64,
    upper: f64,
    oracle: Option<f64>,
    same_cross_section: Option<bool>,
    pass: bool,
}

#[derive(Serialize)]
struct OracleRowOut {
    check: &'static str,
    trial: usize,
    n: usize,
    value: f64,
}

fn oracle_sizes(grid: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = [grid / 4, grid / 2, grid].into_iter().filter(|&n| n >= 2).collect();
    ns.dedup();
    ns
}

/// Nearest-point projection to a diamond does not increase the diamond
/// metric beyond the distance of the original points.
pub fn contraction(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let ns = oracle_sizes(cfg.grid);
    let results: Vec<(ContractionRow, Vec<OracleRowOut>)> = match space {
        Space::Flat(f) => {
            let g = f.group();
            let rank = g.rank();
            let fixed = match &cfg.diamond {
                Some(d) => Some(f.diamond(&vec_of(&d.xm), &vec_of(&d.xp), cfg.face())?),
                None => None,
            };
            let theta = cfg.theta(g)?;
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut r = stream(cfg.seed, t as u64);
                    let dia = match &fixed {
                        Some(d) => d.clone(),
                        None => {
                            let xm = Vector::from_fn(rank, |_, _| r.random_range(-1.0..1.0));
                            let v = g.chamber_project(&Vector::from_fn(rank, |_, _| r.random_range(-1.0..1.0))).0;
                            let dir = theta.pull_inside(&v);
                            f.diamond(&xm, &(&xm + dir * r.random_range(1.0..6.0)), cfg.face())?
                        }
                    };
                    for _ in 0..1_000 {
                        let p = Vector::from_fn(rank, |_, _| r.random_range(-10.0..10.0));
                        let q = Vector::from_fn(rank, |_, _| r.random_range(-10.0..10.0));
                        match contraction_check(f, &dia, &p, &q, Some(cfg.grid)) {
                            Ok(rep) => {
                                let (pp, pq) = (dia.project(&p), dia.project(&q));
                                let table = if dia.is_hemisphere() || (&pq - &pp).norm() <= 1e-12 {
                                    Vec::new()
                                } else {
                                    oracle_rows(t, oracle_table(&dia, &pp, &pq, &ns)?)
                                };
                                return Ok((contraction_row(t, &rep), table));
                            }
                            Err(GeomError::SegmentMeetsDiamond) => continue,
                            Err(e) => return Err(e),
                        }
                    }
                    Err(GeomError::Unsupported("no segment missing the diamond found".into()))
                })
                .collect::<cat0_morse::Result<Vec<_>>>()?
        }
        Space::Trees(x) => (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut r = stream(cfg.seed, t as u64);
                for _ in 0..1_000 {
                    let a: ProductPoint = (0..x.rank()).map(|i| random_vertex(&mut r, x, i)).collect();
                    let b: ProductPoint = (0..x.rank()).map(|i| random_vertex(&mut r, x, i)).collect();
                    let Ok(dia) = x.product_diamond(&a, &b, cfg.face()) else { continue };
                    let far = |r: &mut ChaCha20Rng| -> ProductPoint {
                        (0..x.rank())
                            .map(|i| {
                                let v = random_vertex(r, x, i);
                                let e = r.random_range(0..x.factor(i).end_count());
                                x.factor(i).ray_from(&v, e, r.random_range(0.0..6.0))
                            })
                            .collect()
                    };
                    let (p, q) = (far(&mut r), far(&mut r));
                    match tree_contraction_check(x, &dia, &p, &q, Some(cfg.grid)) {
                        Ok(rep) => {
                            let mut table = Vec::new();
                            if dia.support().len() == x.rank() {
                                let (_, fd) = product_box(x, &dia)?;
                                let bp = dia.box_coordinates(x, &dia.project(x, &p));
                                let bq = dia.box_coordinates(x, &dia.project(x, &q));
                                if (&bq - &bp).norm() > 1e-12 {
                                    table = oracle_rows(t, oracle_table(&fd, &bp, &bq, &ns)?);
                                }
                            }
                            return Ok((contraction_row(t, &rep), table));
                        }
                        Err(GeomError::SegmentMeetsDiamond) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Err(GeomError::Unsupported("no segment missing the diamond found".into()))
            })
            .collect::<cat0_morse::Result<Vec<_>>>()?,
    };
    let rows: Vec<&ContractionRow> = results.iter().map(|r| &r.0).collect();
    let oracle: Vec<&OracleRowOut> = results.iter().flat_map(|r| &r.1).collect();
    let mut a = artifacts("contraction", cfg, json!({ "oracle": oracle }), &rows, rows.iter().map(|r| r.pass))?;
    a.tables.push(("contraction_oracle.csv".into(), csv_text(&oracle)?));
    Ok(a)
}

fn contraction_row(trial: usize, rep: &cat0_morse::finsler::ContractionReport) -> ContractionRow {
    ContractionRow {
        check: "diamond-projection-contracts",
        trial,
        distance: rep.distance,
        projected: rep.projected,
        upper: rep.upper,
        oracle: rep.oracle,
        same_cross_section: rep.same_cross_section,
        pass: rep.pass,
    }
}

fn oracle_rows(trial: usize, table: Vec<cat0_morse::finsler::OracleRow>) -> Vec<OracleRowOut> {
    table
        .into_iter()
        .map(|row| OracleRowOut {
            check: "finsler-oracle-convergence",
            trial,
            n: row.n,
            value: row.value,
        })
        .collect()
}

#[derive(Serialize)]
struct FinslerRow {
    check: &'static str,
    n: usize,
    value: f64,
    upper: f64,
    lower: f64,
    pass: bool,
}

/// Convergence table of the grid oracle for one pair in one diamond.
pub fn finsler_oracle_table(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let f = flat(space, "finsler-oracle")?;
    let d = cfg
        .diamond
        .as_ref()
        .ok_or_else(|| CliError::Config("finsler-oracle needs \"diamond\"".into()))?;
    let dia = f.diamond(&vec_of(&d.xm), &vec_of(&d.xp), cfg.face())?;
    let (x, y) = match &cfg.points {
        Some([a, b]) => (vec_of(a), vec_of(b)),
        None => (vec_of(&d.xm), vec_of(&d.xp)),
    };
    let est = finsler_estimate(&dia, &x, &y)?;
    let mut ns = Vec::new();
    let mut n = 2;
    while n <= cfg.grid {
        ns.push(n);
        n *= 2;
    }
    let mut rows = Vec::new();
    for &n in &ns {
        let value = finsler_oracle(&dia, &x, &y, n)?;
        rows.push(FinslerRow {
            check: "finsler-oracle-bounds",
            n,
            value,
            upper: est.upper,
            lower: est.lower,
            pass: value <= est.upper * (1.0 + 1e-9) + 1e-9,
        });
    }
    let gap = match rows.as_slice() {
        [.., a, b] => ((a.value - b.value) / b.value).abs(),
        _ => 0.0,
    };
    if let Some(last) = rows.last_mut() {
        last.pass &= last.value >= est.lower - gap * last.value - 1e-9;
    }
    artifacts(
        "finsler-oracle",
        cfg,
        json!({ "upper": est.upper, "lower": est.lower, "gap": gap }),
        &rows,
        rows.iter().map(|r| r.pass),
    )
}

#[derive(Serialize)]
struct HyperbolicityRow {
    check: &'static str,
    subject: String,
    points: usize,
    delta: f64,
    exact: bool,
    asserted: bool,
    pass: bool,
}

/// Four-point constant of sampled point clouds; asserted zero for single
/// trees.
pub fn hyperbolicity(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let n = cfg.sample_points.max(4);
    let mut r = stream(cfg.seed, 0);
    let mut rows = Vec::new();
    let samples = (cfg.trials as u64).max(1) * 1_000;
    match space {
        Space::Flat(f) => {
            let pts: Vec<Vector> = (0..n)
                .map(|_| Vector::from_fn(f.rank(), |_, _| r.random_range(-10.0..10.0)))
                .collect();
            let d: Vec<Vec<f64>> = pts.iter().map(|p| pts.iter().map(|q| f.distance(p, q)).collect()).collect();
            let h = hyperbolicity_estimate(&d, cfg.seed, samples);
            rows.push(HyperbolicityRow {
                check: "four-point-condition",
                subject: f.group().name(),
                points: n,
                delta: h.delta,
                exact: h.exact,
                asserted: false,
                pass: true,
            });
        }
        Space::Trees(x) => {
            let pts: Vec<ProductPoint> = (0..n)
                .map(|_| {
                    (0..x.rank())
                        .map(|i| {
                            let v = random_vertex(&mut r, x, i);
                            let e = r.random_range(0..x.factor(i).end_count());
                            x.factor(i).ray_from(&v, e, r.random_range(0.0..3.0))
                        })
                        .collect()
                })
                .collect();
            for i in 0..x.rank() {
                let t = x.factor(i);
                let d: Vec<Vec<f64>> = pts.iter().map(|p| pts.iter().map(|q| t.distance(&p[i], &q[i])).collect()).collect();
                let h = hyperbolicity_estimate(&d, cfg.seed, samples);
                rows.push(HyperbolicityRow {
                    check: "four-point-condition",
                    subject: format!("factor {i}"),
                    points: n,
                    delta: h.delta,
                    exact: h.exact,
                    asserted: true,
                    pass: h.delta <= 1e-9,
                });
            }
            if x.rank() > 1 {
                let d: Vec<Vec<f64>> = pts.iter().map(|p| pts.iter().map(|q| x.distance(p, q)).collect()).collect();
                let h = hyperbolicity_estimate(&d, cfg.seed, samples);
                rows.push(HyperbolicityRow {
                    check: "four-point-condition",
                    subject: "product".into(),
                    points: n,
                    delta: h.delta,
                    exact: h.exact,
                    asserted: false,
                    pass: true,
                });
            }
        }
    }
    artifacts("hyperbolicity", cfg, json!({}), &rows, rows.iter().map(|r| r.pass))
}

#[derive(Serialize)]
struct EndpointRow {
    check: &'static str,
    trial: usize,
    ends: String,
    found: String,
    radius: f64,
    max_distance: f64,
    pass: bool,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

/// Noisy quasirays recover the flag of the ray they follow.
pub fn endpoint(cfg: &ExperimentConfig, space: &Space) -> CliResult<Artifacts> {
    let x = trees(space, "endpoint")?;
    let g = a1(x.rank())?;
    let theta = cfg.theta(&g)?;
    let support = support_of_face(x.rank(), cfg.face());
    let steps = cfg.generator.steps;
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = stream(cfg.seed, t as u64);
            let base: ProductPoint = (0..x.rank()).map(|i| random_vertex(&mut r, x, i)).collect();
            let ends: Vec<usize> = (0..x.rank()).map(|i| r.random_range(0..x.factor(i).end_count())).collect();
            let w = theta.pull_inside(&positive_direction(&mut r, x.rank()));
            let ray = ProductRay::new(base, w.iter().copied().collect(), ends.clone())?;
            let length = steps as f64 * cfg.generator.length_max.max(1.0) * 5.0;
            let clean: Vec<ProductPoint> = (0..=steps).map(|j| ray.point(x, length * j as f64 / steps as f64)).collect();
            let noisy = perturb_product(x, &clean, cfg.generator.beta, &mut r);
            let ep = ideal_endpoint_product(x, &noisy, &theta)?;
            let truth: Vec<usize> = support.iter().map(|&i| ends[i]).collect();
            let found = match &ep.flag {
                EndFlag::Product(f) => f.ends().to_vec(),
                EndFlag::Flat(_) => Vec::new(),
            };
            Ok(EndpointRow {
                check: "endpoint-flag-recovered",
                trial: t,
                pass: found == truth,
                ends: join(&truth),
                found: join(&found),
                radius: ep.radius,
                max_distance: ep.max_distance,
            })
        })
        .collect::<cat0_morse::Result<Vec<_>>>()?;
    artifacts("endpoint", cfg, json!({}), &rows, rows.iter().map(|r| r.pass))
}
