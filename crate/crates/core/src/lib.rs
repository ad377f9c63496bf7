//! Skateboard flip tricks as continuous curves in `SO(3)`.
//!
//! A trick is a curve of rotation matrices that starts at the identity and
//! lands either at the identity or reversed (nose and tail swapped). Lifting
//! such a curve through the quaternion double cover `S³ → SO(3)` and reading
//! off where the lift ends sorts every trick into one of four homotopy
//! classes, which form the cyclic group `ℤ/4ℤ`.
//!
//! - [`quat`]: quaternion arithmetic and the covering map [`rho`].
//! - [`so3`]: rotation matrices and matrix → quaternion extraction.
//! - [`tricks`]: primitive curves, the expression language and the catalog.
//! - [`lifting`]: path lifting and classification.
//! - [`homotopy`]: explicit deformations between tricks and a grid verifier.
//! - [`stabilize`]: deforming a trick onto a constant-rate turn about one axis.
//! - [`io`]: sphere projection and JSON/CSV export.

pub mod error;
pub mod homotopy;
pub mod io;
pub mod lifting;
pub mod quat;
pub mod so3;
pub mod stabilize;
pub mod tricks;

pub use error::{Error, Result};
pub use homotopy::{Homotopy, VerificationReport};
pub use lifting::{classify, lift, HomotopyClass, QuatPath};
pub use quat::{rho, ImaginaryQuaternion, Quaternion, UnitQuaternion, Vec3};
pub use so3::{LandingConfig, Rotation};
pub use tricks::{concat, parse, Flip, TrickExpr};
