//! Closed-form and numerically integrated dynamics used as oracles.

mod flow;
mod lambert;
mod quadratic;

pub use flow::{
    gflow_closed_form, gflow_loss, gflow_ode_rhs, gflow_time_to_loss, integrate_from, integrate_gflow, rate_ratio,
    rate_sandwich, rate_sandwich_interval, rk4_step, sign_descent_loss, FlowParams, FlowState, LossBounds,
};
pub use lambert::{lambert_w0, lambert_w0_exp};
pub use quadratic::{quadratic_gd_iterates, quadratic_sign_iterates, QuadraticIterates};
