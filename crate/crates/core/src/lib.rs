//! Self-similar and Crocco-plane solvers for the symmetric stationary
//! boundary layer near the tip of a wedge or cone.

// `!(x > 0.0)` is used on purpose: it rejects NaN together with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crocco_profile;
pub mod grid;
pub mod interp;
pub mod line_method;
pub mod physical;
pub mod pipeline;
pub mod ode;
pub mod scenario;
pub mod similarity;
pub mod sweep;
pub mod verify;
