//! Metric trees and their products.

pub mod metric_tree;
pub mod product;

pub use metric_tree::{MetricTree, TreePoint, TreeSpec};
pub use product::{
    DiveReport, LeaveReport, ParallelSet, ProductDiamond, ProductFlag, ProductPoint, ProductRay,
    StabilizationReport, TreeProduct,
};
