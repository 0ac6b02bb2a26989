//! Reconstruction of watertight, semantically labelled LoD2 building models
//! from per-building roof point clouds.
//!
//! The pipeline fits parametric roof primitives (pyramid, gable, hip) to a
//! point cloud by jointly minimizing the mean point-surface distance and the
//! footprint mismatch against the cloud's 2D alpha-shape boundary, then
//! assembles the fitted primitive into a closed boundary representation and
//! writes CityGML 2.0.
//!
//! Modules follow the processing order: [`pointcloud`] ingestion,
//! [`primitives`] templates, the [`geometry`] kernel, the [`optimizer`]
//! fitting engine, [`reconstruct`] model assembly and serialization, and the
//! [`harness`] for synthetic benchmarks and evaluation metrics.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod optimizer;
pub mod pointcloud;
pub mod primitives;
pub mod reconstruct;
pub mod util;

pub use error::{Error, Result};
pub use pointcloud::{GlobalTranslation, Point3, PointCloud};
pub use primitives::{Pose, PrimitiveKind, RoofPrimitive, ShapeParams};
