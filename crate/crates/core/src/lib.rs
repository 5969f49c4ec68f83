//! Solver and analysis toolkit for the thin (Signorini) obstacle problem with
//! radial nonlinear energies `f(p) = h(|p|)`.

pub mod geometry;
pub mod nonlinearity;
pub mod oracles;
pub mod solver;
pub mod analysis;
pub mod experiment;
