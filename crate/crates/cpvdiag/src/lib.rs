//! Concentrator-photovoltaic performance simulator and fault diagnostics.
//!
//! The crate models the chain from sky to terminals: a parameterized
//! clear-sky direct-beam spectrum (`spectral`), junction temperatures from
//! behind-cell thermocouples (`thermal`), an equivalent-circuit solve of a
//! 25-cell triple-junction series module with bypass diodes (`device`),
//! degradation fitting from measured IV curves (`diagnosis`), and daily
//! energy integration (`energy`). The `cpvdiag` binary wraps these behind
//! file-based commands.

pub mod device;
pub mod diagnosis;
pub mod energy;
pub mod error;
pub mod io;
pub mod numeric;
pub mod spectral;
pub mod svg;
pub mod thermal;

pub use error::{Error, Result};
