//! Two-factor Gaussian short-rate analytics.
//!
//! The library covers four pieces that belong together in counterparty
//! exposure work on a two-factor Hull-White style model:
//!
//! * [`curve_model`] — initial curve, model parameters, and closed-form
//!   bond reconstruction from the two driftless Markov states;
//! * [`swap_analytics`] — co-initial swap rates, the analytic covariance
//!   approximation for their terminal correlation, the three-region
//!   parameter classification, and the correlation/level calibrations;
//! * [`monte_carlo`] — exact terminal sampling of the factors and
//!   path-wise swap-rate evaluation through full bond reconstruction;
//! * [`exposure`] — netting-set valuation, expected positive exposure,
//!   the frozen-annuity Gaussian spread-option closed form, and a flat
//!   hazard CVA integral.
//!
//! Everything is deterministic: simulation draws are keyed by
//! `(seed, path index)` on a counter-based generator, so results do not
//! depend on thread count.

pub mod curve_model;
pub mod error;
pub mod exposure;
pub mod monte_carlo;
pub mod sigfig;
pub mod swap_analytics;

pub use curve_model::{
    b_factor, bond, xi_integrals, BondGrid, DiscountCurve, FactorState, Hw2fParams, VolSpec, XiSet,
};
pub use error::{Hw2fError, Result};
