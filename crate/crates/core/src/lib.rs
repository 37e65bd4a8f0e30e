//! Exact simulation of a two-photon relational clock: a globally static
//! entangled state whose parts evolve relative to each other.
//!
//! Modules, bottom-up:
//! - [`qcore`]: states, operators and the two plate models.
//! - [`paw`]: constraint, relational evolution, observer and super-observer modes.
//! - [`gppt`]: two-time conditionals averaged over coordinate time.
//! - [`optics_mc`]: seeded shot-level sampling of detector coincidences.
//! - [`tomography`]: 16-projection ququart tomography, linear and MLE.
//! - [`harness`]: experiment configs, sweeps and CSV/JSON records.

pub mod gppt;
pub mod harness;
pub mod optics_mc;
pub mod paw;
pub mod qcore;
pub mod rng;
pub mod tomography;
