//! Chart-level tensor calculus on asymptotic charts (r, link coordinates):
//! sphere charts and quadrature, metric fields, Christoffel symbols, the
//! connection-difference tensor, scalar curvature and its linearization,
//! and the built-in metric families.

pub mod chart;
pub mod families;
pub mod metric;

pub use chart::{ChartPoint, LinkNode, LinkQuadrature, Patch};
pub use families::{
    EguchiHansonPotential, FlatPotential, GaugeBump, LogPotential, PotentialMetric,
    PowerPotential, RadialPotential, SchwarzschildSlice,
};
pub use metric::{
    christoffel, connection_difference, linearized_scalar, scalar_curvature, scalar_direct,
    scalar_via_reference, ConeMetric, EuclideanMetric, InterpolatedMetric, MetricField,
    RoundSphereMetric, ScalarCurvature,
};
