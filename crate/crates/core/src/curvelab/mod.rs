//! Curves through exact windows, adversarial curves and the Boman test.

mod adversarial;
mod boman;
mod curve;
mod family;

pub use adversarial::*;
pub use boman::*;
pub use curve::*;
pub use family::*;
