//! Model order reduction for SISO descriptor systems.

pub mod bench;
pub mod duality;
pub mod error;
pub mod experiment;
pub mod lti;
pub mod numkernel;
pub mod orthopoly;
pub mod plot;
pub mod reducers;
pub mod sylvester;
pub mod timesim;
pub mod verify;

pub use error::{Error, Result};
