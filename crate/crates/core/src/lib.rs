//! Continual visuomotor learning with Grow-When-Required networks.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the learning
//! machinery and a deterministic kinematic robot to learn on:
//!
//! * [`gwr`]: growing self-organizing maps, one per modality.
//! * [`assoc`]: Hebbian links between the neurons of two maps.
//! * [`sim`]: head camera, four-joint arm, locks and joint limits.
//! * [`datagen`]: motor babbling datasets for each learning stage.
//! * [`curriculum`]: gaze, arm and eye-hand stages, reaching and adaptation.
//! * [`eval`]: per-trial evaluation and summary statistics.
//!
//! File formats, the command line and parallel evaluation live in the
//! `visuomotor` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assoc;
pub mod curriculum;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod gwr;
pub mod sim;

pub use assoc::{AssociationTable, MapSide, Side};
pub use error::{Error, Result};
pub use gwr::{GwrNetwork, GwrParams};
pub use sim::{KinematicModel, RobotState, Target};
