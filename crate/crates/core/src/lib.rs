//! Uniform labelled transition systems over commutative monoids, their
//! bisimulations, and a rule format (WF-GSOS) whose specifications induce
//! such systems compositionally.

pub mod bisim;
pub mod cli;
pub mod monoid;
pub mod pepa;
pub mod system;
pub mod translations;
pub mod weightfn;
pub mod wfgsos;

pub use monoid::{Club, Monoid, MonoidError, Weight};
pub use system::{Label, SystemError, Ultras, Wlts};
pub use weightfn::WeightFunction;
