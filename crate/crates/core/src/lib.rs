//! Numerical toolkit for bi-Lipschitz maps and quasi-isometries of
//! Euclidean space.

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod maps;
pub mod pl;
pub mod verify;

pub use error::{GeomError, Result};
pub use estimators::{Region, SamplerConfig};
pub use linalg::{MatrixN, VectorN};
pub use maps::{DiskMap, MapExpr, SphereMap, SpiralProfile};
pub use pl::PLMap;
pub use verify::{Report, Scenario, ScenarioConfig};
