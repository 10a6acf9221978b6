//! The dimer model on the toroidal honeycomb lattice `H_{m,n}`: exact
//! partition functions, winding-number statistics of `M ⊖ M0`, Jacobi theta
//! functions and the discrete Gaussian limit of the winding law.

pub mod enumeration;
pub mod error;
pub mod honeycomb;
pub mod kasteleyn;
pub mod limitlaw;
pub mod logprod;
pub mod quadrature;
pub mod spectral;
pub mod table;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use honeycomb::TorusGraph;
pub use table::WindingTable;
