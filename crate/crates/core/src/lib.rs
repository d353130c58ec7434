//! Maxwell's equations on triangulated and polygonal surfaces with discrete
//! exterior calculus.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: oriented surfaces, circumcentric duals, signed incidence;
//! * [`forms`]: cochains, exterior derivative, diagonal Hodge star;
//! * [`solver`]: TE/TM leapfrog schemes with loss and sources, CFL step;
//! * [`spacetime`]: the prism lattice with Lorentz-signed weights and the
//!   gauge/variational identities;
//! * [`validation`]: executable checks (Yee reduction, stability,
//!   divergence preservation, convergence order);
//! * [`io`]: mesh files, run configuration, VTK and CSV output.

pub mod forms;
pub mod io;
pub mod mesh;
pub mod solver;
pub mod spacetime;
pub mod validation;
