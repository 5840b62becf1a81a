//! A self-contained toolkit for autonomous-vehicle software infrastructure:
//! chained reference-frame management, cross-source convention adapters, a
//! reconfigurable detection/tracking/prediction pipeline, component-wise
//! tracking metrics, and a seeded multi-agent (V2I) scenario simulator driven
//! by trade-study configuration tables.

pub mod geometry;
pub mod conventions;
pub mod scene;
pub mod sim;
pub mod tracking;
pub mod prediction;
pub mod metrics;
pub mod harness;

pub use geometry::GeometryError;
