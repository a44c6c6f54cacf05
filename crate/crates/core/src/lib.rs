//! Spectral tools for alpha-SQG vortex patches near the disc.

pub mod contour;
pub mod dispersion;
pub mod error;
pub mod normal_form;
pub mod paradiff;
pub mod special;
pub mod timestep;
pub mod spectral;
pub mod util;

pub use contour::{ContourModel, HamiltonianState, PatchState, QuadratureConfig};
pub use dispersion::{c_alpha, Alpha, Dispersion, DispersionTable, ResonanceReport};
pub use error::{Error, Result};
pub use spectral::{RealField, SobolevIndex};
pub use timestep::{Integrator, IntegratorConfig, Scheme, Trajectory};
