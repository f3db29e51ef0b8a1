//! Geometry of Coxeter flats and products of metric trees: Weyl cones,
//! diamonds, regularity of paths, the diamond length metric and empirical
//! checks of Morse quasigeodesics.

pub mod coxeter;
pub mod error;
pub mod finsler;
pub mod flat;
pub mod linalg;
pub mod morse;
pub mod regularity;
pub mod space;
pub mod tree;

pub use coxeter::{Element, FaceType, FlagPlacement, GroupKind, ReflectionGroup, StarClass, ThetaCone};
pub use error::{GeomError, Result};
pub use flat::{CoxeterFlat, FlatDiamond, SegmentClass};
pub use linalg::{Polyhedron, Vector};
pub use regularity::{CoarseVerdict, PolyPath, QuasiCertificate};
pub use space::{Longitudinality, ModelSpace, RegularWitness};
pub use tree::{MetricTree, ProductFlag, ProductPoint, TreePoint, TreeProduct, TreeSpec};
