//! Exact symbolic engine for integrable hierarchies of topological type.
//!
//! The modules build on each other: [`jetalg`] is the differential-polynomial
//! core; [`psdo`] gives the Lax construction of KdV; [`kdvloop`] solves the
//! loop equation for the genus corrections; [`quasitriv`] applies the
//! quasitriviality change of variables to flows, densities and Poisson
//! brackets; [`wktau`] expands the Witten-Kontsevich potentials in the times;
//! [`gwzero`] and [`p1sector`] handle degree-zero Gromov-Witten theory of a
//! general variety and the P^1 example.

pub mod cli;
pub mod error;
pub mod gwzero;
pub mod jetalg;
pub mod kdvloop;
pub mod linsolve;
pub mod p1sector;
pub mod psdo;
pub mod quasitriv;
pub mod report;
pub mod tseries;
pub mod wktau;

pub use error::{Error, Result};
pub use jetalg::{dp, DiffPoly, EpsSeries, Jet, Rat};
