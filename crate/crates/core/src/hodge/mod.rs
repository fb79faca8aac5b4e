//! Hodge integrals from the deformed KdV hierarchy: the perturbative solution in the
//! times `t_0 .. t_N`, the change of unknown back to `u = d^2 F / dt_0^2`, correlators
//! read off `u`, completion by the string equation, and the Givental deformation check.
//!
//! The string equation is used with the `lambda_j` class carried along unchanged. This
//! follows from `lambda_j` being pulled back along the map forgetting a point.

mod correlators;
mod givental;
mod solve;
mod tseries;

pub use correlators::{
    check_lambda_g, check_string_identity, extract_base_correlators, lambda_g_value, string_complete, Bounds,
    CorrelatorKey, CorrelatorRow, CorrelatorTable,
};
pub use givental::{givental_z_apply, omega_kdv_table, transported_coefficients, OmegaTable, TransportedCoefficients};
pub use solve::{apply_forward_transformation, apply_inverse_transformation, solve_hierarchy};
pub use tseries::{TKey, TMono, TSeries, MAX_VARS};

use crate::error::Result;
use crate::hierarchy::{HierarchyContext, Mode};

/// Runs solve, the inverse transformation (deformed mode only), extraction and completion.
pub fn hodge_table(ctx: &HierarchyContext, bounds: Bounds) -> Result<CorrelatorTable> {
    let u_tilde = solve_hierarchy(ctx, bounds.descendants as usize, bounds.degree)?;
    let u = match ctx.mode() {
        Mode::Deformed => apply_inverse_transformation(&u_tilde, ctx.order()),
        Mode::Classical => u_tilde,
    };
    string_complete(&extract_base_correlators(&u, bounds)?)
}
