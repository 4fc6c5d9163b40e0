//! Metric paths, first variations against finite-difference oracles, the
//! Euler–Lagrange residual, and a descent flow for 𝒥.

mod flow;
mod path;
mod variation;

pub use flow::{descend_j, FlowParams, FlowRow, FlowStatus, FlowTrace};
pub use path::{random_direction, MetricPath, PathKind};
pub use variation::{
    analytic_first_variation, central_difference, euler_lagrange_residual, euler_lagrange_residual_from,
    fd_first_variation, mean_curvature_derivative, mixed_inner, richardson, variation_of_mean_curvature,
    verify_adjoint_variation, verify_inner_product_lemma, AdjointVariation, ElResidual, InnerProductLemma,
    MeanCurvatureVariation,
};
