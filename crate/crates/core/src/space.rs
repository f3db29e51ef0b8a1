//! The interface shared by Coxeter flats and products of metric trees.

use serde::{Deserialize, Serialize};

use crate::coxeter::{FaceType, ReflectionGroup, ThetaCone};
use crate::error::Result;
use crate::linalg::Vector;

/// Position of an oriented segment relative to a parallel set `P(tau-, tau+)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Longitudinality {
    Longitudinal,
    AntiLongitudinal,
    NonLongitudinal,
    /// Only produced for paths whose chords disagree.
    Mixed,
}

/// A witness pair for coarse regularity: endpoints moved by at most
/// `displacement` so that their chord becomes Theta-regular.
#[derive(Debug, Clone)]
pub struct RegularWitness<P> {
    pub start: P,
    pub end: P,
    pub displacement: f64,
}

pub trait ModelSpace: Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;
    /// Data fixing a parallel set and its orientation.
    type Orientation: Clone + Send + Sync;

    fn group(&self) -> &ReflectionGroup;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Chamber-valued distance; its norm is `distance(x, y)`.
    fn delta_distance(&self, x: &Self::Point, y: &Self::Point) -> Vector;

    /// Point at fraction `s` along the geodesic from `x` to `y`.
    fn interpolate(&self, x: &Self::Point, y: &Self::Point, s: f64) -> Self::Point;

    /// Distance from `z` to the `face`-diamond with tips `xm`, `xp`.
    fn diamond_distance(
        &self,
        xm: &Self::Point,
        xp: &Self::Point,
        face: FaceType,
        z: &Self::Point,
    ) -> Result<f64>;

    /// [`ModelSpace::diamond_distance`] for many points of one diamond.
    fn diamond_distances(
        &self,
        xm: &Self::Point,
        xp: &Self::Point,
        face: FaceType,
        zs: &[Self::Point],
    ) -> Result<Vec<f64>> {
        zs.iter().map(|z| self.diamond_distance(xm, xp, face, z)).collect()
    }

    /// Nonnegative iff `z` lies in the Theta-diamond with tips `xm`, `xp`.
    fn theta_diamond_margin(
        &self,
        xm: &Self::Point,
        xp: &Self::Point,
        theta: &ThetaCone,
        z: &Self::Point,
    ) -> Result<f64>;

    /// A Theta-regular pair near `(x, y)`, or `None` when the construction
    /// fails (degenerate pair, type too far from Theta).
    fn regular_witness(
        &self,
        x: &Self::Point,
        y: &Self::Point,
        theta: &ThetaCone,
    ) -> Option<RegularWitness<Self::Point>>;

    /// The orientation of the parallel set spanned by a regular segment.
    fn orientation_of(&self, x: &Self::Point, y: &Self::Point, face: FaceType)
        -> Result<Self::Orientation>;

    fn classify_segment(
        &self,
        orientation: &Self::Orientation,
        x: &Self::Point,
        y: &Self::Point,
    ) -> Result<Longitudinality>;

    /// Unit type of the segment `xy`.
    fn segment_type(&self, x: &Self::Point, y: &Self::Point) -> Option<Vector> {
        let d = self.delta_distance(x, y);
        let n = d.norm();
        (n > crate::linalg::TOL_NUM).then(|| d / n)
    }
}
