//! Explicit ensemble control for a one-parameter family of driftless
//! two-level systems
//!
//! ```text
//!     i dX/dt = ω (u(t) σx + v(t) σy) X,   X(ω, 0) = I,   ω ∈ [v0, v1] ⊂ (0, ∞)
//! ```
//!
//! A single control pair `(u, v)` is synthesized from a smooth target profile
//! `f(ω)` so that every member of the ensemble ends close to
//! `exp(-i f(ω) σy)` (or `σx` with the control roles swapped). The crate is
//! organized bottom-up:
//!
//! - [`su2`]: closed-form SU(2) arithmetic, metrics and X–Y–X Euler angles.
//! - [`profile`]: bump-windowed target profiles `f` and the induced even `g`.
//! - [`quadrature`]: composite Gauss–Legendre rules.
//! - [`fourier`]: the cosine transform `ĝ` and its numerical certificates.
//! - [`schedule`]: the piecewise control law and its JSON form.
//! - [`simulator`]: exponential-midpoint propagation over an ω-ensemble.
//! - [`analysis`]: error metrics, convergence sweeps and the auxiliary-system
//!   harnesses.
//!
//! Ensemble and sweep loops run on rayon when the `parallel` feature is on
//! (the default) and fall back to plain iterators otherwise. Results are
//! bit-identical either way.

pub mod analysis;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod parallel;
pub mod profile;
pub mod quadrature;
pub mod schedule;
pub mod simulator;
pub mod su2;

pub use error::{Error, Result};
pub use fourier::FourierKernel;
pub use profile::{BumpParams, TargetProfile};
pub use schedule::{Axis, ControlSchedule, ControlSegment, WindowKind};
pub use simulator::{EnsembleResult, SimConfig, Trajectory};
pub use su2::{EulerXYX, PauliVector, Unitary2};
