//! Scalar and small-vector kernels shared by the rest of the crate: the
//! Gaussian tail, Gauss–Hermite expectations, Moreau envelopes and proximal
//! maps of the penalties in use, and the ℓ1-ball projection.

mod envelope;
mod projection;
mod quadrature;
mod special;

pub use envelope::{
    envelope_abs, envelope_quad, huber, prox_abs, prox_quad, soft_threshold, EnvelopeKind,
    EnvelopeSpec, ScalarPenalty,
};
pub use projection::{l1_ball_threshold, project_l1_ball, prox_linf};
pub use quadrature::{gauss_expectation, PanelRule, QuadratureRule, DEFAULT_NODES};
pub use special::{normal_pdf, q_function, truncated_moment};
