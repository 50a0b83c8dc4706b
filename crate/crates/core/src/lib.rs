pub mod error;
pub mod specfun;
pub mod quadrature;
pub mod harmonics;
pub mod geometry;
pub mod modes;
pub mod expansions;
pub mod fixtures;
pub mod symplectic;
pub mod isometry;
pub mod minkowski;
pub mod verify;
