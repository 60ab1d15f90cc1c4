//! Exact symbolic computation for the chiral de Rham complex, twisted Courant
//! algebroids and chiral T-duality on coordinate patches.

pub mod coeff;
pub mod geom;
pub mod scalar;
pub mod va;
pub mod cdr;
pub mod cli;
pub mod cohomlab;
pub mod courant;
pub mod sample;
pub mod tduality;
