//! Maximum-entropy density fitting, the logarithmic nonlinear Schrödinger
//! eigenproblem and its closed-form harmonic-oscillator branch.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | grids, quadrature, Hermite recurrences, root finding |
//! | [`maxent`] | moment-constrained exponential-family densities, information functionals |
//! | [`series`] | Taylor/binomial series probes and radial stationary points |
//! | [`oscillator`] | Hermite–Gaussian states of the `x²/2` problem |
//! | [`nls`] | grid ground-state solver with self-consistent multiplier |
//! | [`analysis`] | Gram matrices, multiplier checks, completeness projections |

pub mod analysis;
pub mod maxent;
pub mod nls;
pub mod numerics;
pub mod oscillator;
pub mod series;
pub mod threads;
