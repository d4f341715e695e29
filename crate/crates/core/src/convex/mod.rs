//! Discrete convex analysis over sampled integrands.

mod envelope;
mod hull2d;

pub use envelope::{
    caratheodory_decompose, evaluate_envelope, legendre_conjugate, lower_convex_hull,
    subdifferential, CaratheodoryDecomposition, ConvexEnvelope, Grid1D, HullLocation,
    SampledFunction, SubgradientInterval, BARYCENTER_REL_TOL, WEIGHT_SUM_TOL,
};
pub use hull2d::{decompose_2d, lower_hull_2d, EpigraphCloud2D, Facet2D};
