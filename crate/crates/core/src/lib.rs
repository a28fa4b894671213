//! Conic relaxations of AC optimal power flow in the lifted voltage-product
//! space, strengthened with 3-cycle second-order cone cuts.
//!
//! * [`netcase`]: MATPOWER case parsing and the per-unit network model
//! * [`conic`]: solver-agnostic conic programs and the Clarabel backend
//! * [`kimcuts`]: symbolic cone and linear cuts on 3×3 Hermitian blocks
//! * [`wopf`]: PM SOC, Kim+PM SOC and SDP relaxation builders
//! * [`diagnostics`]: post-solve residuals, certification and gaps
//! * [`cli`]: the `w3cone` command-line front end

#[cfg(feature = "sdp")]
extern crate openblas_src;

pub mod cli;
pub mod conic;
pub mod diagnostics;
pub mod kimcuts;
pub mod netcase;
pub mod wopf;

/// PGLib release the bundled cases and reference objectives come from.
pub const PGLIB_VERSION: &str = "v21.07";
