//! Security limits of biometric systems from their false match rate.

pub mod attack;
pub mod birthday;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod stats;

pub use error::{Error, Result};
pub use numerics::{BigReal, Context};
