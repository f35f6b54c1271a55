//! Traveling fronts of the nonlocal bistable equation `u_t = mu * u - u + f(u)`.
//!
//! * [`measure`]: finite measures (atoms + density), convolution, exponential moments.
//! * [`profile`]: monotone profiles on grids.
//! * [`semiflow`]: the evolution operator and hypothesis checks.
//! * [`front`]: sub/super-solutions, the pinned fixed-point recursion, front extraction.
//! * [`bounds`]: exponential-moment speed bounds.

pub mod error;
pub mod bounds;
pub mod front;
pub mod measure;
pub mod profile;
pub mod semiflow;

pub use error::{Error, Result};
