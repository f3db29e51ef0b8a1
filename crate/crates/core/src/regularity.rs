//! Regularity of paths and sequences.
//!
//! All checks run over a finite grid of parameters; a chord is the oriented
//! segment between two grid points `s < t`.

use serde::Serialize;

use crate::coxeter::ThetaCone;
use crate::error::{GeomError, Result};
use crate::linalg::{Vector, TOL_NUM};
use crate::space::{Longitudinality, ModelSpace};

/// Piecewise geodesic path through `points` at parameters `times`.
#[derive(Debug, Clone)]
pub struct PolyPath<'a, S: ModelSpace> {
    space: &'a S,
    times: Vec<f64>,
    points: Vec<S::Point>,
}

impl<'a, S: ModelSpace> PolyPath<'a, S> {
    pub fn new(space: &'a S, times: Vec<f64>, points: Vec<S::Point>) -> Result<Self> {
        if times.len() != points.len() || times.is_empty() {
            return Err(GeomError::DimensionMismatch {
                expected: times.len(),
                got: points.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(GeomError::Unsupported("breakpoint times must increase".into()));
        }
        Ok(PolyPath { space, times, points })
    }

    /// Parametrized by arc length.
    pub fn by_arc_length(space: &'a S, points: Vec<S::Point>) -> Result<Self> {
        let mut times = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                let step = space.distance(&points[i - 1], p);
                if step <= TOL_NUM {
                    return Err(GeomError::DegenerateSegment);
                }
                acc += step;
            }
            times.push(acc);
        }
        PolyPath::new(space, times, points)
    }

    pub fn space(&self) -> &'a S {
        self.space
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[S::Point] {
        &self.points
    }

    pub fn start(&self) -> &S::Point {
        &self.points[0]
    }

    pub fn end(&self) -> &S::Point {
        self.points.last().unwrap()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| self.space.distance(&w[0], &w[1]))
            .sum()
    }

    /// Clamped to the domain.
    pub fn eval(&self, t: f64) -> S::Point {
        let (a, b) = self.domain();
        let t = t.clamp(a, b);
        let j = self.times.partition_point(|&s| s <= t);
        if j >= self.times.len() {
            return self.end().clone();
        }
        let j = j.max(1);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        self.space
            .interpolate(&self.points[j - 1], &self.points[j], (t - t0) / (t1 - t0))
    }

    /// Breakpoints plus `refine - 1` equally spaced parameters inside each piece.
    pub fn grid(&self, refine: usize) -> Vec<f64> {
        let refine = refine.max(1);
        let mut out = Vec::with_capacity(self.times.len() * refine);
        for w in self.times.windows(2) {
            for k in 0..refine {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
            }
        }
        out.push(*self.times.last().unwrap());
        out
    }

    pub fn default_grid(&self) -> Vec<f64> {
        self.grid(4)
    }

    /// Restriction to `[a, b]`, with new breakpoints at the cut points.
    pub fn subpath(&self, a: f64, b: f64) -> Result<Self> {
        let (lo, hi) = self.domain();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return Err(GeomError::DegenerateSegment);
        }
        let mut times = vec![a];
        let mut points = vec![self.eval(a)];
        for (t, p) in self.times.iter().zip(&self.points) {
            if *t > a && *t < b {
                times.push(*t);
                points.push(p.clone());
            }
        }
        times.push(b);
        points.push(self.eval(b));
        PolyPath::new(self.space, times, points)
    }

    /// The same trace run backwards.
    pub fn reversed(&self) -> Self {
        let (_, b) = self.domain();
        let (a, _) = self.domain();
        PolyPath {
            space: self.space,
            times: self.times.iter().rev().map(|t| a + b - t).collect(),
            points: self.points.iter().rev().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuasiCertificate {
    pub l: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ChordVerdict {
    Pass,
    Violation { s: f64, t: f64 },
}

impl ChordVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ChordVerdict::Pass)
    }
}

/// Three-valued: `Pass` is backed by a witness, `Violation` is proven.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoarseVerdict {
    Pass,
    Undecided { s: f64, t: f64 },
    Violation { s: f64, t: f64 },
}

fn sample<S: ModelSpace>(path: &PolyPath<'_, S>, grid: &[f64]) -> Vec<S::Point> {
    grid.iter().map(|&t| path.eval(t)).collect()
}

pub fn check_quasigeodesic<S: ModelSpace>(
    path: &PolyPath<'_, S>,
    cert: QuasiCertificate,
    grid: &[f64],
) -> ChordVerdict {
    let pts = sample(path, grid);
    let slack = 1e-9;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let dt = (grid[j] - grid[i]).abs();
            let d = path.space.distance(&pts[i], &pts[j]);
            if d < dt / cert.l - cert.a - slack * (1.0 + dt) || d > cert.l * dt + cert.a + slack * (1.0 + dt) {
                return ChordVerdict::Violation { s: grid[i], t: grid[j] };
            }
        }
    }
    ChordVerdict::Pass
}

pub fn check_theta_regular<S: ModelSpace>(
    path: &PolyPath<'_, S>,
    theta: &ThetaCone,
    grid: &[f64],
) -> ChordVerdict {
    let pts = sample(path, grid);
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            if let Some(t) = path.space.segment_type(&pts[i], &pts[j]) {
                if !theta.contains_type(&t) {
                    return ChordVerdict::Violation { s: grid[i], t: grid[j] };
                }
            }
        }
    }
    ChordVerdict::Pass
}

/// Verdict for a single chord `xy`.
///
/// Pass: `d <= 2B`, or the space's witness moves each endpoint by at most
/// `B`. Violation: `d > 2B` and the type misses the margin by more than
/// `asin(2B/d)`; moving both endpoints by `B` turns the chamber-valued
/// distance by at most that angle.
pub fn coarse_chord_verdict<S: ModelSpace>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    theta: &ThetaCone,
    b: f64,
) -> CoarseVerdict {
    let d = space.distance(x, y);
    if d <= 2.0 * b || d <= TOL_NUM {
        return CoarseVerdict::Pass;
    }
    if let Some(w) = space.regular_witness(x, y, theta) {
        if w.displacement <= b + 1e-12 * (1.0 + d) {
            return CoarseVerdict::Pass;
        }
    }
    let typ = space.delta_distance(x, y) / d;
    let deficit = theta.margin() - theta.star_margin(&typ);
    if deficit > (2.0 * b / d).asin() + TOL_NUM {
        CoarseVerdict::Violation { s: 0.0, t: 1.0 }
    } else {
        CoarseVerdict::Undecided { s: 0.0, t: 1.0 }
    }
}

/// First violation if any, else first undecided chord, else pass.
pub fn check_coarse_regular<S: ModelSpace>(
    path: &PolyPath<'_, S>,
    theta: &ThetaCone,
    b: f64,
    grid: &[f64],
) -> CoarseVerdict {
    let pts = sample(path, grid);
    let mut undecided = None;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            match coarse_chord_verdict(path.space, &pts[i], &pts[j], theta, b) {
                CoarseVerdict::Pass => {}
                CoarseVerdict::Violation { .. } => {
                    return CoarseVerdict::Violation { s: grid[i], t: grid[j] }
                }
                CoarseVerdict::Undecided { .. } => {
                    undecided.get_or_insert(CoarseVerdict::Undecided { s: grid[i], t: grid[j] });
                }
            }
        }
    }
    undecided.unwrap_or(CoarseVerdict::Pass)
}

/// Length factor beyond which `(inner, B)`-regular segments are
/// `outer`-regular: `2 + 1/sin(de/2)` with `de` the margin gap.
pub fn long_chord_constant(inner: &ThetaCone, outer: &ThetaCone) -> Result<f64> {
    let de = inner.eps0_nested(outer)?;
    Ok(2.0 + 1.0 / (0.5 * de).sin())
}

/// In a flat the chord rotates by at most `asin(2B/d)`, so
/// `2/sin(de)` already suffices there.
pub fn flat_long_chord_constant(inner: &ThetaCone, outer: &ThetaCone) -> Result<f64> {
    let de = inner.eps0_nested(outer)?;
    Ok(2.0 / de.min(std::f64::consts::FRAC_PI_2).sin())
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub tail_start: usize,
    /// Smallest star margin of the chord types from the basepoint in the tail.
    pub min_tail_margin: f64,
    /// Chord types of the last tail points, for inspecting accumulation.
    pub tail_types: Vec<Vec<f64>>,
    pub pass: bool,
}

/// Tail (second half) chord types from `base` must be within `tolerance`
/// of `theta`.
pub fn asymptotic_regularity<S: ModelSpace>(
    space: &S,
    sequence: &[S::Point],
    base: &S::Point,
    theta: &ThetaCone,
    tolerance: f64,
) -> AsymptoticReport {
    let tail_start = sequence.len() / 2;
    let mut min_tail_margin = f64::INFINITY;
    let mut types = Vec::new();
    for p in &sequence[tail_start..] {
        match space.segment_type(base, p) {
            Some(t) => {
                min_tail_margin = min_tail_margin.min(theta.star_margin(&t));
                types.push(t);
            }
            None => min_tail_margin = f64::NEG_INFINITY,
        }
    }
    let keep = types.len().saturating_sub(5);
    AsymptoticReport {
        tail_start,
        min_tail_margin,
        tail_types: types[keep..].iter().map(|t: &Vector| t.iter().copied().collect()).collect(),
        pass: !sequence.is_empty() && min_tail_margin >= theta.margin() - tolerance,
    }
}

/// Joint classification of all ordered chords of `points`.
pub fn longitudinality_check<S: ModelSpace>(
    space: &S,
    orientation: &S::Orientation,
    points: &[S::Point],
) -> Result<Longitudinality> {
    let mut seen: Option<Longitudinality> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let c = space.classify_segment(orientation, &points[i], &points[j])?;
            match seen {
                None => seen = Some(c),
                Some(s) if s != c => return Ok(Longitudinality::Mixed),
                _ => {}
            }
        }
    }
    Ok(seen.unwrap_or(Longitudinality::NonLongitudinal))
}
