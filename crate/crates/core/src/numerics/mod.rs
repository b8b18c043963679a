//! Scalar numerical kernels shared by the rest of the crate.
//!
//! Everything here is a pure function of its inputs. Random streams are
//! plain values owned by whoever draws from them.

mod normal;
mod root;
mod special;
mod stream;

pub use normal::{log_normal_tail, normal_density, normal_quantile, normal_tail};
pub use root::{bisect_monotone, Bracket, RootFindConfig};
pub use special::{binomial_cdf, ln_add_exp, ln_sub_exp, regularized_beta};
pub use stream::{seeded_stream, RandomStream};
