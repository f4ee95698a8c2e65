//! Verification toolkit for generalized del Junco-Rudolph two-sided shifts.
//!
//! - [`words`]: the block hierarchy `B_k`, heights, occurrence structure.
//! - [`event`]: cylinder events and their boolean combinations.
//! - [`measure`]: exact densities, certified measures, coding distance.
//! - [`modular`]: the skew product `(x, y) -> (bx, xy + 1)` and the sets `N_q`.
//! - [`tower`]: the `T^q` Rokhlin tower over `A*_N` and its certified inequalities.

pub mod bitset;
pub mod error;
pub mod event;
pub mod measure;
pub mod modular;
pub mod rational;
pub mod search;
pub mod tower;
pub mod words;

pub use error::{Error, Result};
pub use event::Event;
pub use measure::CertifiedMeasure;
pub use words::{BlockHandle, ShiftSystem, SystemParams, Word};
