//! Initial discount curve, model parameters, and the closed-form bond
//! reconstruction machinery of the two-factor Gaussian short-rate model.
//!
//! The model is driven by two driftless Markov states `X1(t)`, `X2(t)`
//! whose joint terminal law is bivariate normal with covariance given by
//! the integrals `xi_integrals`. Discount factors are reconstructed as
//!
//! ```text
//! D(t,T) = A(t,T) * exp(-B1(t,T) X1(t) - B2(t,T) X2(t))
//! ```
//!
//! where `A(t,T)` fits the initial curve and carries the convexity terms
//! that make `D(t,T)/D(t,S)` a martingale under the measure associated
//! with the numeraire bond `D(.,S)`. All valuation in this crate is
//! numeraire-normalized accordingly.

use crate::error::{Hw2fError, Result};

/// Initial term structure `D(0,T)`.
///
/// Either a flat continuously-compounded zero rate, or a list of
/// `(time, discount factor)` pillars interpolated log-linearly in the
/// log-discount (constant forward rate between pillars). Times are plain
/// year fractions.
#[derive(Debug, Clone)]
pub struct DiscountCurve {
    kind: CurveKind,
}

#[derive(Debug, Clone)]
enum CurveKind {
    Flat { rate: f64 },
    Pillars { times: Vec<f64>, log_dfs: Vec<f64> },
}

impl DiscountCurve {
    /// Flat curve `D(0,T) = exp(-rate * T)`.
    pub fn flat(rate: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Hw2fError::invalid("flat rate must be finite"));
        }
        Ok(DiscountCurve {
            kind: CurveKind::Flat { rate },
        })
    }

    /// Pillar curve from `(time, discount factor)` pairs.
    ///
    /// Times must be strictly increasing and positive, discount factors
    /// strictly positive. `D(0,0) = 1` is an implicit anchor. When
    /// `non_negative_rates` is set the discount factors must be
    /// non-increasing (and at most 1).
    pub fn from_pillars(pillars: &[(f64, f64)], non_negative_rates: bool) -> Result<Self> {
        if pillars.is_empty() {
            return Err(Hw2fError::invalid("pillar curve needs at least one pillar"));
        }
        let mut times = Vec::with_capacity(pillars.len());
        let mut log_dfs = Vec::with_capacity(pillars.len());
        let mut prev_t = 0.0;
        let mut prev_df = 1.0;
        for &(t, df) in pillars {
            if !t.is_finite() || t <= prev_t {
                return Err(Hw2fError::invalid(format!(
                    "pillar times must be positive and strictly increasing (got {t})"
                )));
            }
            if !df.is_finite() || df <= 0.0 {
                return Err(Hw2fError::invalid(format!(
                    "discount factors must be strictly positive (got {df} at t={t})"
                )));
            }
            if non_negative_rates && df > prev_df {
                return Err(Hw2fError::invalid(format!(
                    "curve flagged non-negative-rates but D is increasing at t={t}"
                )));
            }
            times.push(t);
            log_dfs.push(df.ln());
            prev_t = t;
            prev_df = df;
        }
        Ok(DiscountCurve {
            kind: CurveKind::Pillars { times, log_dfs },
        })
    }

    /// Discount factor `D(0,T)`.
    ///
    /// Pillar curves extrapolate the last segment's forward rate beyond
    /// the final pillar and interpolate from the `(0, 1)` anchor before
    /// the first.
    pub fn df(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Hw2fError::invalid(format!(
                "curve time must be >= 0 (got {t})"
            )));
        }
        match &self.kind {
            CurveKind::Flat { rate } => Ok((-rate * t).exp()),
            CurveKind::Pillars { times, log_dfs } => Ok(interp_log_df(times, log_dfs, t).exp()),
        }
    }
}

fn interp_log_df(times: &[f64], log_dfs: &[f64], t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let n = times.len();
    // Locate the first pillar at or beyond t.
    let idx = times.partition_point(|&x| x < t);
    if idx == 0 {
        // Between the (0, log 1 = 0) anchor and the first pillar.
        return log_dfs[0] * t / times[0];
    }
    if idx == n {
        if n == 1 {
            return log_dfs[0] * t / times[0];
        }
        let (t0, t1) = (times[n - 2], times[n - 1]);
        let (y0, y1) = (log_dfs[n - 2], log_dfs[n - 1]);
        return y1 + (y1 - y0) * (t - t1) / (t1 - t0);
    }
    if times[idx] == t {
        return log_dfs[idx];
    }
    let (t0, y0) = if idx == 0 {
        (0.0, 0.0)
    } else {
        (times[idx - 1], log_dfs[idx - 1])
    };
    let (t1, y1) = (times[idx], log_dfs[idx]);
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Volatility parameterization of the two factors.
///
/// `ConstantSigma` defines a full time profile, so the factor covariance
/// is computable at any horizon. `TerminalCovariance` pins the factor
/// variances and terminal correlation directly at one horizon `T*` (the
/// style used for single-observation-date experiments) and carries no
/// time profile.
#[derive(Debug, Clone, PartialEq)]
pub enum VolSpec {
    ConstantSigma {
        sigma1: f64,
        sigma2: f64,
        rho12: f64,
    },
    TerminalCovariance {
        horizon: f64,
        xi1: f64,
        xi2: f64,
        rho_m: f64,
    },
}

/// Model parameters: mean reversions `a1 > a2 >= 0`, a volatility spec,
/// and the numeraire maturity `S`.
///
/// `S` must be at least every cashflow date valued with these
/// parameters; all expectations are taken relative to the numeraire bond
/// `D(.,S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hw2fParams {
    a1: f64,
    a2: f64,
    vol: VolSpec,
    numeraire_maturity: f64,
}

impl Hw2fParams {
    pub fn new(a1: f64, a2: f64, vol: VolSpec, numeraire_maturity: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) || a2 < 0.0 {
            return Err(Hw2fError::invalid(
                "mean reversions must be finite with a2 >= 0",
            ));
        }
        if a1 <= a2 {
            // Equal speeds collapse the two factors into one (B1/B2 == 1
            // everywhere) and the region classification is undefined.
            return Err(Hw2fError::invalid(format!(
                "mean reversions must satisfy a1 > a2 (got a1={a1}, a2={a2})"
            )));
        }
        if !numeraire_maturity.is_finite() || numeraire_maturity <= 0.0 {
            return Err(Hw2fError::invalid("numeraire maturity must be positive"));
        }
        match vol {
            VolSpec::ConstantSigma {
                sigma1,
                sigma2,
                rho12,
            } => {
                if !(sigma1.is_finite() && sigma2.is_finite()) || sigma1 < 0.0 || sigma2 < 0.0 {
                    return Err(Hw2fError::invalid("sigma1, sigma2 must be >= 0"));
                }
                if !(-1.0..=1.0).contains(&rho12) {
                    return Err(Hw2fError::invalid("rho12 must lie in [-1, 1]"));
                }
            }
            VolSpec::TerminalCovariance {
                horizon,
                xi1,
                xi2,
                rho_m,
            } => {
                if !horizon.is_finite() || horizon <= 0.0 {
                    return Err(Hw2fError::invalid(
                        "terminal-covariance horizon must be positive",
                    ));
                }
                if !(xi1.is_finite() && xi2.is_finite()) || xi1 < 0.0 || xi2 < 0.0 {
                    return Err(Hw2fError::invalid("xi1, xi2 must be >= 0"));
                }
                if !(-1.0..=1.0).contains(&rho_m) {
                    return Err(Hw2fError::invalid("rho_m must lie in [-1, 1]"));
                }
            }
        }
        Ok(Hw2fParams {
            a1,
            a2,
            vol,
            numeraire_maturity,
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn vol(&self) -> &VolSpec {
        &self.vol
    }

    pub fn numeraire_maturity(&self) -> f64 {
        self.numeraire_maturity
    }

    /// Same mean reversions and numeraire, volatility restated as a
    /// terminal covariance at horizon `t`.
    pub fn to_terminal(&self, t: f64) -> Result<Hw2fParams> {
        let xi = xi_integrals(self, t)?;
        let rho_m = if xi.xi1 > 0.0 && xi.xi2 > 0.0 {
            (xi.xi12 / (xi.xi1 * xi.xi2).sqrt()).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        Hw2fParams::new(
            self.a1,
            self.a2,
            VolSpec::TerminalCovariance {
                horizon: t,
                xi1: xi.xi1,
                xi2: xi.xi2,
                rho_m,
            },
            self.numeraire_maturity,
        )
    }

    /// Replace the terminal correlation, keeping the factor variances.
    /// The volatility spec must already be a terminal covariance at `t`.
    pub fn with_rho_m(&self, t: f64, rho_m: f64) -> Result<Hw2fParams> {
        match self.vol {
            VolSpec::TerminalCovariance {
                horizon, xi1, xi2, ..
            } => {
                check_horizon(horizon, t)?;
                Hw2fParams::new(
                    self.a1,
                    self.a2,
                    VolSpec::TerminalCovariance {
                        horizon,
                        xi1,
                        xi2,
                        rho_m,
                    },
                    self.numeraire_maturity,
                )
            }
            VolSpec::ConstantSigma { .. } => self.to_terminal(t)?.with_rho_m(t, rho_m),
        }
    }

    /// Scale both factor variances by `lambda > 0` (the terminal
    /// correlation, and with it the region label, is unchanged).
    pub fn scale_variance(&self, lambda: f64) -> Result<Hw2fParams> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Hw2fError::invalid("variance scale must be positive"));
        }
        let vol = match self.vol {
            VolSpec::ConstantSigma {
                sigma1,
                sigma2,
                rho12,
            } => VolSpec::ConstantSigma {
                sigma1: sigma1 * lambda.sqrt(),
                sigma2: sigma2 * lambda.sqrt(),
                rho12,
            },
            VolSpec::TerminalCovariance {
                horizon,
                xi1,
                xi2,
                rho_m,
            } => VolSpec::TerminalCovariance {
                horizon,
                xi1: xi1 * lambda,
                xi2: xi2 * lambda,
                rho_m,
            },
        };
        Hw2fParams::new(self.a1, self.a2, vol, self.numeraire_maturity)
    }
}

/// Driftless Markov states observed at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorState {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
}

impl FactorState {
    pub fn new(t: f64, x1: f64, x2: f64) -> Self {
        FactorState { t, x1, x2 }
    }

    /// The deterministic state `X = 0` at time `t`.
    pub fn origin(t: f64) -> Self {
        FactorState {
            t,
            x1: 0.0,
            x2: 0.0,
        }
    }
}

/// `B(a,t,T) = (exp(-a t) - exp(-a T)) / a`, with the continuous limit
/// `T - t` at `a = 0`. Requires `a >= 0` and `0 <= t <= T`.
pub fn b_factor(a: f64, t: f64, big_t: f64) -> Result<f64> {
    if a < 0.0 || !a.is_finite() {
        return Err(Hw2fError::invalid(format!(
            "mean reversion must be >= 0 (got {a})"
        )));
    }
    if !(t.is_finite() && big_t.is_finite()) || t < 0.0 || big_t < t {
        return Err(Hw2fError::invalid(format!(
            "b_factor needs 0 <= t <= T (got t={t}, T={big_t})"
        )));
    }
    if a == 0.0 {
        return Ok(big_t - t);
    }
    Ok(((-a * t).exp() - (-a * big_t).exp()) / a)
}

/// Factor covariance accumulated from 0 to `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSet {
    pub xi1: f64,
    pub xi2: f64,
    pub xi12: f64,
}

impl XiSet {
    pub const ZERO: XiSet = XiSet {
        xi1: 0.0,
        xi2: 0.0,
        xi12: 0.0,
    };

    /// Terminal correlation `xi12 / sqrt(xi1 xi2)`; zero if either
    /// variance vanishes.
    pub fn rho_m(&self) -> f64 {
        if self.xi1 > 0.0 && self.xi2 > 0.0 {
            (self.xi12 / (self.xi1 * self.xi2).sqrt()).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    }
}

fn check_horizon(stored: f64, requested: f64) -> Result<()> {
    if (stored - requested).abs() > 1e-9 * stored.abs().max(1.0) {
        return Err(Hw2fError::invalid(format!(
            "terminal-covariance parameterization is pinned at horizon {stored}; \
             it carries no time profile, so Xi({requested}) is not defined"
        )));
    }
    Ok(())
}

/// Variances and covariance of the driftless states at horizon `T`:
/// `Xi_i(T)` and `Xi_12(T)`.
///
/// For `ConstantSigma` these are the closed-form integrals of
/// `exp(2 a_i u) sigma_i^2` and `exp((a1+a2) u) rho12 sigma1 sigma2`;
/// for `TerminalCovariance` the stored values are returned and `T` must
/// equal the stored horizon.
pub fn xi_integrals(params: &Hw2fParams, big_t: f64) -> Result<XiSet> {
    if !big_t.is_finite() || big_t < 0.0 {
        return Err(Hw2fError::invalid(format!(
            "xi horizon must be >= 0 (got {big_t})"
        )));
    }
    if big_t == 0.0 {
        return Ok(XiSet::ZERO);
    }
    match params.vol {
        VolSpec::ConstantSigma {
            sigma1,
            sigma2,
            rho12,
        } => {
            let xi1 = sigma1 * sigma1 * growth_integral(2.0 * params.a1, big_t);
            let xi2 = sigma2 * sigma2 * growth_integral(2.0 * params.a2, big_t);
            let xi12 = rho12 * sigma1 * sigma2 * growth_integral(params.a1 + params.a2, big_t);
            Ok(XiSet { xi1, xi2, xi12 })
        }
        VolSpec::TerminalCovariance {
            horizon,
            xi1,
            xi2,
            rho_m,
        } => {
            check_horizon(horizon, big_t)?;
            Ok(XiSet {
                xi1,
                xi2,
                xi12: rho_m * (xi1 * xi2).sqrt(),
            })
        }
    }
}

/// `int_0^T exp(k u) du`, with the `k = 0` limit `T`.
fn growth_integral(k: f64, big_t: f64) -> f64 {
    if k == 0.0 {
        big_t
    } else {
        ((k * big_t).exp() - 1.0) / k
    }
}

/// The fitting coefficient `A(t,T)` of the bond reconstruction.
///
/// Contains the initial-curve ratio and the quadratic convexity terms in
/// `Xi(t)`; these exactly offset the Gaussian exponential moment of the
/// factor loadings, which is what makes `D(t,T)/D(t,S)` a martingale.
pub(crate) fn a_coefficient(
    curve: &DiscountCurve,
    params: &Hw2fParams,
    t: f64,
    big_t: f64,
    xi_t: &XiSet,
) -> Result<f64> {
    let s = params.numeraire_maturity;
    let b1_ts = b_factor(params.a1, t, s.max(t))?;
    let b2_ts = b_factor(params.a2, t, s.max(t))?;
    // T beyond S is permitted: B(T,S) = -B(S,T) by the same closed form.
    let (b1_cap, b2_cap) = if big_t <= s {
        (
            b_factor(params.a1, big_t, s)?,
            b_factor(params.a2, big_t, s)?,
        )
    } else {
        (
            -b_factor(params.a1, s, big_t)?,
            -b_factor(params.a2, s, big_t)?,
        )
    };
    let exponent = 0.5 * (b1_ts * b1_ts - b1_cap * b1_cap) * xi_t.xi1
        + 0.5 * (b2_ts * b2_ts - b2_cap * b2_cap) * xi_t.xi2
        + (b1_ts * b2_ts - b1_cap * b2_cap) * xi_t.xi12;
    Ok(curve.df(big_t)? / curve.df(t)? * exponent.exp())
}

/// Reconstructed discount factor `D(t,T)` seen from the factor state.
///
/// `D(t,t) = 1` for any state, and at `t = 0` with `X = 0` this returns
/// the input curve exactly. Maturities beyond the numeraire date are
/// valid (the loadings just change sign).
pub fn bond(
    curve: &DiscountCurve,
    params: &Hw2fParams,
    state: &FactorState,
    big_t: f64,
) -> Result<f64> {
    if big_t < state.t {
        return Err(Hw2fError::invalid(format!(
            "bond maturity {big_t} precedes observation time {}",
            state.t
        )));
    }
    let xi_t = if state.t == 0.0 {
        XiSet::ZERO
    } else {
        xi_integrals(params, state.t)?
    };
    let a = a_coefficient(curve, params, state.t, big_t, &xi_t)?;
    let b1 = b_factor(params.a1, state.t, big_t)?;
    let b2 = b_factor(params.a2, state.t, big_t)?;
    Ok(a * (-b1 * state.x1 - b2 * state.x2).exp())
}

/// Precomputed reconstruction coefficients for one observation time and a
/// fixed set of maturities; used by the path loops, where recomputing
/// `A(t,T)` per path would dominate the cost.
#[derive(Debug, Clone)]
pub struct BondGrid {
    t: f64,
    maturities: Vec<f64>,
    a: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl BondGrid {
    pub fn new(
        curve: &DiscountCurve,
        params: &Hw2fParams,
        t: f64,
        maturities: &[f64],
    ) -> Result<Self> {
        let xi_t = if t == 0.0 {
            XiSet::ZERO
        } else {
            xi_integrals(params, t)?
        };
        let mut a = Vec::with_capacity(maturities.len());
        let mut b1 = Vec::with_capacity(maturities.len());
        let mut b2 = Vec::with_capacity(maturities.len());
        for &m in maturities {
            if m < t {
                return Err(Hw2fError::invalid(format!(
                    "grid maturity {m} precedes observation time {t}"
                )));
            }
            a.push(a_coefficient(curve, params, t, m, &xi_t)?);
            b1.push(b_factor(params.a1, t, m)?);
            b2.push(b_factor(params.a2, t, m)?);
        }
        Ok(BondGrid {
            t,
            maturities: maturities.to_vec(),
            a,
            b1,
            b2,
        })
    }

    pub fn observation_time(&self) -> f64 {
        self.t
    }

    pub fn maturities(&self) -> &[f64] {
        &self.maturities
    }

    /// `D(t, maturities[idx])` at the given factor values.
    #[inline]
    pub fn df(&self, idx: usize, x1: f64, x2: f64) -> f64 {
        self.a[idx] * (-self.b1[idx] * x1 - self.b2[idx] * x2).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn b_factor_zero_mean_reversion_is_time_difference() {
        assert_eq!(b_factor(0.0, 1.0, 5.0).unwrap(), 4.0);
    }

    #[test]
    fn b_factor_empty_interval_is_zero() {
        for a in [0.0, 0.3, 2.5] {
            assert_eq!(b_factor(a, 1.7, 1.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn b_factor_closed_form_value() {
        // (1 - e^{-1}) / 0.1, evaluated at high precision
        assert_close(b_factor(0.1, 0.0, 10.0).unwrap(), 6.321205588285577, 1e-14);
    }

    #[test]
    fn b_factor_rejects_bad_domain() {
        assert!(b_factor(-0.1, 0.0, 1.0).is_err());
        assert!(b_factor(0.1, 2.0, 1.0).is_err());
        assert!(b_factor(0.1, -1.0, 1.0).is_err());
    }

    #[test]
    fn b_factor_increasing_in_maturity_and_below_linear() {
        let a = 0.4;
        let t = 0.5;
        let mut prev = 0.0;
        for i in 1..=200 {
            let big_t = t + i as f64 * 0.1;
            let b = b_factor(a, t, big_t).unwrap();
            assert!(b > prev);
            assert!(b < big_t - t);
            prev = b;
        }
    }

    fn flat_params(a1: f64, a2: f64, s1: f64, s2: f64, rho: f64, s: f64) -> Hw2fParams {
        Hw2fParams::new(
            a1,
            a2,
            VolSpec::ConstantSigma {
                sigma1: s1,
                sigma2: s2,
                rho12: rho,
            },
            s,
        )
        .unwrap()
    }

    #[test]
    fn xi_zero_mean_reversion_limit() {
        // a1 = a2 is rejected, so take a2 = 0 and check the sigma^2 T limit
        // on the second factor.
        let p = flat_params(0.5, 0.0, 0.02, 0.01, 0.0, 30.0);
        let xi = xi_integrals(&p, 10.0).unwrap();
        assert_close(xi.xi2, 0.01 * 0.01 * 10.0, 1e-18);
    }

    #[test]
    fn xi_closed_form_value() {
        let p = flat_params(0.5, 0.0, 0.01, 0.01, 0.0, 30.0);
        let xi = xi_integrals(&p, 2.0).unwrap();
        // 0.0001 * (e^2 - 1) / 1.0
        assert_close(xi.xi1, 6.38905609893065e-4, 1e-16);
    }

    #[test]
    fn xi_perfectly_correlated_factors() {
        let p = flat_params(0.2, 0.199999, 0.01, 0.01, 1.0, 30.0);
        let xi = xi_integrals(&p, 5.0).unwrap();
        assert_close(xi.xi12, (xi.xi1 * xi.xi2).sqrt(), 1e-12 * xi.xi1);
        assert!(xi.xi12 * xi.xi12 <= xi.xi1 * xi.xi2 * (1.0 + 1e-12));
    }

    #[test]
    fn xi_psd_for_admissible_inputs() {
        for rho in [-1.0, -0.5, 0.0, 0.7, 1.0] {
            let p = flat_params(0.8, 0.05, 0.013, 0.007, rho, 30.0);
            for t in [0.5, 2.0, 10.0, 25.0] {
                let xi = xi_integrals(&p, t).unwrap();
                assert!(xi.xi12 * xi.xi12 <= xi.xi1 * xi.xi2 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn terminal_covariance_rejects_other_horizons() {
        let p = Hw2fParams::new(
            0.5,
            0.01,
            VolSpec::TerminalCovariance {
                horizon: 10.0,
                xi1: 4e-4,
                xi2: 3.6e-5,
                rho_m: 0.0,
            },
            20.0,
        )
        .unwrap();
        assert!(xi_integrals(&p, 10.0).is_ok());
        assert!(xi_integrals(&p, 5.0).is_err());
    }

    #[test]
    fn params_reject_equal_mean_reversions() {
        assert!(Hw2fParams::new(
            0.3,
            0.3,
            VolSpec::ConstantSigma {
                sigma1: 0.01,
                sigma2: 0.01,
                rho12: 0.0
            },
            10.0
        )
        .is_err());
    }

    #[test]
    fn curve_flat_and_pillar_values() {
        let c = DiscountCurve::flat(0.02).unwrap();
        assert_eq!(c.df(0.0).unwrap(), 1.0);
        assert_close(c.df(10.0).unwrap(), (-0.2f64).exp(), 1e-15);

        let p =
            DiscountCurve::from_pillars(&[(1.0, 0.99), (2.0, 0.97), (5.0, 0.90)], true).unwrap();
        assert_eq!(p.df(0.0).unwrap(), 1.0);
        for (t, df) in [(1.0, 0.99), (2.0, 0.97), (5.0, 0.90)] {
            let rel = (p.df(t).unwrap() - df).abs() / df;
            assert!(rel <= 1e-12, "pillar round-trip off by {rel}");
        }
        // log-linear between pillars
        let mid = p.df(1.5).unwrap();
        assert_close(mid.ln(), 0.5 * (0.99f64.ln() + 0.97f64.ln()), 1e-14);
        // extrapolation keeps the last forward rate
        let fwd = (0.90f64.ln() - 0.97f64.ln()) / 3.0;
        assert_close(p.df(7.0).unwrap().ln(), 0.90f64.ln() + 2.0 * fwd, 1e-13);
    }

    #[test]
    fn curve_rejects_bad_pillars() {
        assert!(DiscountCurve::from_pillars(&[], false).is_err());
        assert!(DiscountCurve::from_pillars(&[(1.0, 0.99), (1.0, 0.98)], false).is_err());
        assert!(DiscountCurve::from_pillars(&[(1.0, -0.5)], false).is_err());
        assert!(DiscountCurve::from_pillars(&[(1.0, 0.99), (2.0, 0.995)], true).is_err());
        // increasing D allowed when the non-negative-rates flag is off
        assert!(DiscountCurve::from_pillars(&[(1.0, 0.99), (2.0, 0.995)], false).is_ok());
    }

    #[test]
    fn bond_at_origin_reproduces_curve() {
        let curve = DiscountCurve::from_pillars(
            &[
                (0.5, 0.995),
                (1.0, 0.99),
                (3.0, 0.96),
                (10.0, 0.82),
                (20.0, 0.66),
            ],
            true,
        )
        .unwrap();
        let p = flat_params(0.5, 0.01, 0.01, 0.006, -0.3, 20.0);
        let state = FactorState::origin(0.0);
        for t in [0.5, 1.0, 2.2, 3.0, 10.0, 17.5, 20.0] {
            let d = bond(&curve, &p, &state, t).unwrap();
            let rel = (d - curve.df(t).unwrap()).abs() / curve.df(t).unwrap();
            assert!(rel <= 1e-12, "reconstruction off by {rel} at T={t}");
        }
    }

    #[test]
    fn bond_at_own_maturity_is_one() {
        let curve = DiscountCurve::flat(0.02).unwrap();
        let p = flat_params(0.5, 0.01, 0.01, 0.006, -0.3, 20.0);
        for (t, x1, x2) in [(0.0, 0.0, 0.0), (5.0, 0.03, -0.02), (12.0, -0.1, 0.04)] {
            let state = FactorState::new(t, x1, x2);
            assert_close(bond(&curve, &p, &state, t).unwrap(), 1.0, 1e-14);
        }
    }

    #[test]
    fn bond_rejects_maturity_before_observation() {
        let curve = DiscountCurve::flat(0.02).unwrap();
        let p = flat_params(0.5, 0.01, 0.01, 0.006, 0.0, 20.0);
        assert!(bond(&curve, &p, &FactorState::origin(5.0), 4.0).is_err());
    }

    #[test]
    fn bond_positive_beyond_numeraire_maturity() {
        let curve = DiscountCurve::flat(0.02).unwrap();
        let p = flat_params(0.5, 0.01, 0.01, 0.006, 0.2, 15.0);
        let state = FactorState::new(10.0, 0.05, -0.03);
        let d = bond(&curve, &p, &state, 18.0).unwrap();
        assert!(d > 0.0 && d.is_finite());
    }

    /// The change-of-measure identity behind the martingale property:
    /// A(t,T)/A(t,S) times the Gaussian moment of the exponential loading
    /// equals D(0,T)/D(0,S) exactly.
    #[test]
    fn reconstruction_moment_cancellation() {
        let curve = DiscountCurve::flat(0.02).unwrap();
        for (a1, a2, s1, s2, rho) in [
            (0.5, 0.01, 0.012, 0.004, -0.9),
            (0.5, 0.01, 0.012, 0.004, 0.0),
            (1.2, 0.15, 0.02, 0.02, 0.6),
            (0.3, 0.0, 0.009, 0.011, -0.4),
        ] {
            let p = flat_params(a1, a2, s1, s2, rho, 20.0);
            let t = 7.0;
            let xi = xi_integrals(&p, t).unwrap();
            for big_t in [8.0, 12.0, 20.0] {
                let a_t = a_coefficient(&curve, &p, t, big_t, &xi).unwrap();
                let a_s = a_coefficient(&curve, &p, t, 20.0, &xi).unwrap();
                let b1 = b_factor(a1, big_t, 20.0).unwrap();
                let b2 = b_factor(a2, big_t, 20.0).unwrap();
                let moment =
                    (0.5 * (b1 * b1 * xi.xi1 + b2 * b2 * xi.xi2) + b1 * b2 * xi.xi12).exp();
                let lhs = a_t / a_s * moment;
                let rhs = curve.df(big_t).unwrap() / curve.df(20.0).unwrap();
                assert_close(lhs / rhs, 1.0, 1e-13);
            }
        }
    }

    #[test]
    fn b_ratio_decreasing_in_maturity() {
        // For a1 > a2 the loading ratio B1(t,T)/B2(t,T) falls as T grows;
        // the region classification relies on this.
        for (a1, a2) in [(0.5, 0.01), (1.0, 0.01), (1.0, 0.3), (0.2, 0.0)] {
            let t = 1.0;
            let mut prev = f64::INFINITY;
            for i in 1..=150 {
                let big_t = t + 0.2 * i as f64;
                let r = b_factor(a1, t, big_t).unwrap() / b_factor(a2, t, big_t).unwrap();
                assert!(r < prev, "ratio not strictly decreasing at T={big_t}");
                prev = r;
            }
        }
    }
}
