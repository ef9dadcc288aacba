//! Archimedean layer: gamma factors, Mellin transforms, the kernels V^{+-},
//! and central values by the approximate functional equation.

pub mod afe;
pub mod kernel;
pub mod special;

pub use afe::{
    afe_central_value, afe_central_value_with, d_half, dedekind_zeta_half, e_half, s_of_f, s_of_f_with,
    unbalanced_afe_residual, LValue, UnbalancedReport,
};
pub use kernel::{g_function, h_mellin, h_mellin_norm, mellin_numeric, AfeKernel, GammaFactor, KernelG, SmoothWeight};

/// Subconvexity exponent, stored for reporting only.
pub const SUBCONVEXITY_THETA: f64 = 0.25 - 1.0 / 128.0;
