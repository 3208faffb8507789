//! Co-initial swap rates and their terminal correlation structure.
//!
//! A co-initial pair is two swaps starting at the same observation date
//! `T_n` with different end dates. Approximating each swap rate by the
//! period-compounded forward rate over its own span turns the rate into
//! an explicit function of the bond ratio `D(t,T_n)/D(t,T_end)`, whose
//! differential loads on the factors through `B_i(T_n, T_end)` with a
//! deterministic gearing. That yields a closed-form covariance between
//! the terminal swap rates:
//!
//! ```text
//! Cov(S_a, S_b) = G_a G_b { B1a B1b Xi1 + B2a B2b Xi2
//!                           + (B1a B2b + B2a B1b) Xi12 }
//! ```
//!
//! with `G = (1 + delta S(0)) / (T_end - T_n)`. In the limit of perfect
//! factor de-correlation the quadratic form factorizes and the swap-rate
//! correlation collapses to `+1` or `-1` depending on how the volatility
//! ratio `sqrt(Xi2/Xi1)` sits relative to the loading ratios
//! `B1/B2` of the short and long swap: above both (region I), between
//! them (region II, the only region reaching `-1`), or below both
//! (region III).

use crate::curve_model::{
    b_factor, bond, xi_integrals, DiscountCurve, FactorState, Hw2fParams, XiSet,
};
use crate::error::{Hw2fError, Result};

/// Uniform tenor structure `T_k = t0 + k * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TenorGrid {
    pub t0: f64,
    pub delta: f64,
    pub n_periods: usize,
}

impl TenorGrid {
    pub fn new(t0: f64, delta: f64, n_periods: usize) -> Result<Self> {
        if !t0.is_finite() || t0 < 0.0 {
            return Err(Hw2fError::invalid("tenor grid start must be >= 0"));
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Hw2fError::invalid("tenor grid period must be positive"));
        }
        if n_periods == 0 {
            return Err(Hw2fError::invalid("tenor grid needs at least one period"));
        }
        Ok(TenorGrid {
            t0,
            delta,
            n_periods,
        })
    }

    pub fn date(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.delta
    }

    pub fn dates(&self) -> Vec<f64> {
        (0..=self.n_periods).map(|k| self.date(k)).collect()
    }

    /// Swap observed at grid date `n` paying until grid date `m` (`m > n`).
    pub fn swap(
        &self,
        n: usize,
        m: usize,
        strike: f64,
        direction: Direction,
        notional: f64,
    ) -> Result<SwapSpec> {
        if m <= n || m > self.n_periods {
            return Err(Hw2fError::invalid(
                "swap needs grid indices n < m <= n_periods",
            ));
        }
        SwapSpec::new(
            self.date(n),
            self.date(m),
            self.delta,
            strike,
            direction,
            notional,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Payer,
    Receiver,
}

impl Direction {
    /// Sign of the swap value `A (S - K)` seen from our side.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Payer => 1.0,
            Direction::Receiver => -1.0,
        }
    }
}

/// A fixed-for-floating swap described by its remaining co-initial part:
/// observed at `observation`, fixed leg paying every `delta` up to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapSpec {
    observation: f64,
    end: f64,
    delta: f64,
    pub strike: f64,
    pub direction: Direction,
    pub notional: f64,
}

impl SwapSpec {
    pub fn new(
        observation: f64,
        end: f64,
        delta: f64,
        strike: f64,
        direction: Direction,
        notional: f64,
    ) -> Result<Self> {
        if !observation.is_finite() || observation < 0.0 {
            return Err(Hw2fError::invalid("swap observation date must be >= 0"));
        }
        if !end.is_finite() || end <= observation {
            return Err(Hw2fError::invalid(format!(
                "swap end {end} must lie beyond observation {observation}"
            )));
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Hw2fError::invalid("fixed-leg period must be positive"));
        }
        let periods = (end - observation) / delta;
        if (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) || periods.round() < 1.0 {
            return Err(Hw2fError::invalid(format!(
                "(end - observation) = {} is not a positive integer multiple of delta = {delta}",
                end - observation
            )));
        }
        if !strike.is_finite() || !notional.is_finite() {
            return Err(Hw2fError::invalid("strike and notional must be finite"));
        }
        Ok(SwapSpec {
            observation,
            end,
            delta,
            strike,
            direction,
            notional,
        })
    }

    /// Unit-notional payer swap with zero strike; enough for correlation
    /// work, where strike, direction and notional play no role.
    pub fn co_initial(observation: f64, end: f64, delta: f64) -> Result<Self> {
        SwapSpec::new(observation, end, delta, 0.0, Direction::Payer, 1.0)
    }

    pub fn observation(&self) -> f64 {
        self.observation
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_periods(&self) -> usize {
        ((self.end - self.observation) / self.delta).round() as usize
    }

    /// Fixed-leg payment dates `observation + delta, ..., end`.
    pub fn payment_dates(&self) -> Vec<f64> {
        (1..=self.n_periods())
            .map(|k| self.observation + k as f64 * self.delta)
            .collect()
    }
}

/// A source of discount factors at a fixed valuation time: the initial
/// curve itself (time 0) or a factor state with reconstructed bonds.
pub trait Discounting {
    fn valuation_time(&self) -> f64;
    fn discount(&self, t: f64) -> Result<f64>;
}

impl Discounting for DiscountCurve {
    fn valuation_time(&self) -> f64 {
        0.0
    }

    fn discount(&self, t: f64) -> Result<f64> {
        self.df(t)
    }
}

/// Valuation at a simulated factor state through bond reconstruction.
#[derive(Debug, Clone, Copy)]
pub struct ModelState<'a> {
    pub curve: &'a DiscountCurve,
    pub params: &'a Hw2fParams,
    pub state: FactorState,
}

impl Discounting for ModelState<'_> {
    fn valuation_time(&self) -> f64 {
        self.state.t
    }

    fn discount(&self, t: f64) -> Result<f64> {
        bond(self.curve, self.params, &self.state, t)
    }
}

/// Fixed-leg annuity (PVBP): `delta * sum D(t, T_k)` over the payment
/// dates. Strictly positive.
pub fn annuity<D: Discounting + ?Sized>(source: &D, spec: &SwapSpec) -> Result<f64> {
    let first_payment = spec.observation + spec.delta;
    if source.valuation_time() > first_payment + 1e-12 {
        return Err(Hw2fError::invalid(format!(
            "valuation time {} is past the first payment date {first_payment}",
            source.valuation_time()
        )));
    }
    let mut sum = 0.0;
    for date in spec.payment_dates() {
        sum += source.discount(date)?;
    }
    Ok(spec.delta * sum)
}

/// Par rate `(D(t,T_n) - D(t,end)) / annuity`. At spot observation
/// (`t = T_n`) the first discount factor is exactly 1. Can be negative.
pub fn par_rate<D: Discounting + ?Sized>(source: &D, spec: &SwapSpec) -> Result<f64> {
    let a = annuity(source, spec)?;
    Ok((source.discount(spec.observation)? - source.discount(spec.end)?) / a)
}

/// The compounded-forward proxy for the par rate: the exact inversion of
/// `D(t,end)/D(t,T_n) = (1 + delta S)^{-(end - T_n)/delta}`.
///
/// For a single-period swap this equals the par rate identically.
pub fn proxy_par_rate<D: Discounting + ?Sized>(source: &D, spec: &SwapSpec) -> Result<f64> {
    let ratio = source.discount(spec.observation)? / source.discount(spec.end)?;
    let tau = spec.end - spec.observation;
    Ok((ratio.powf(spec.delta / tau) - 1.0) / spec.delta)
}

/// Factor loadings of one co-initial swap rate under the proxy:
/// `dS = G (B1 dX1 + B2 dX2)` with the gearing frozen at time 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RateLoadings {
    pub gearing: f64,
    pub b1: f64,
    pub b2: f64,
    /// Time-0 proxy par rate used in the gearing.
    pub s0: f64,
}

pub(crate) fn rate_loadings(
    params: &Hw2fParams,
    t_n: f64,
    spec: &SwapSpec,
    curve: &DiscountCurve,
) -> Result<RateLoadings> {
    if (spec.observation - t_n).abs() > 1e-9 * t_n.abs().max(1.0) {
        return Err(Hw2fError::invalid(format!(
            "swap observed at {} but analytics requested at {t_n}",
            spec.observation
        )));
    }
    let s0 = proxy_par_rate(curve, spec)?;
    let tau = spec.end - spec.observation;
    Ok(RateLoadings {
        gearing: (1.0 + spec.delta * s0) / tau,
        b1: b_factor(params.a1(), t_n, spec.end)?,
        b2: b_factor(params.a2(), t_n, spec.end)?,
        s0,
    })
}

/// Analytic covariance of two co-initial terminal swap rates.
///
/// Symmetric in its swap arguments; with `spec_a == spec_b` it returns
/// the (nonnegative) proxy variance of the rate.
pub fn swap_covariance(
    params: &Hw2fParams,
    t_n: f64,
    spec_a: &SwapSpec,
    spec_b: &SwapSpec,
    curve: &DiscountCurve,
) -> Result<f64> {
    let xi = xi_integrals(params, t_n)?;
    let la = rate_loadings(params, t_n, spec_a, curve)?;
    let lb = rate_loadings(params, t_n, spec_b, curve)?;
    Ok(covariance_from_loadings(&la, &lb, &xi))
}

pub(crate) fn covariance_from_loadings(la: &RateLoadings, lb: &RateLoadings, xi: &XiSet) -> f64 {
    let quad =
        la.b1 * lb.b1 * xi.xi1 + la.b2 * lb.b2 * xi.xi2 + (la.b1 * lb.b2 + la.b2 * lb.b1) * xi.xi12;
    let cov = la.gearing * lb.gearing * quad;
    // Identical loadings give a variance; do not let rounding of the
    // factorized form at rho_m = +-1 leak a negative sign.
    if la.b1 == lb.b1 && la.b2 == lb.b2 && la.gearing == lb.gearing && cov < 0.0 {
        let scale = la.gearing * lb.gearing * (la.b1 * lb.b1 * xi.xi1 + la.b2 * lb.b2 * xi.xi2);
        if cov.abs() <= 1e-12 * scale {
            return 0.0;
        }
    }
    cov
}

/// Correlation of two co-initial terminal swap rates, in `[-1, 1]`.
pub fn swap_correlation(
    params: &Hw2fParams,
    t_n: f64,
    spec_a: &SwapSpec,
    spec_b: &SwapSpec,
    curve: &DiscountCurve,
) -> Result<f64> {
    let xi = xi_integrals(params, t_n)?;
    let la = rate_loadings(params, t_n, spec_a, curve)?;
    let lb = rate_loadings(params, t_n, spec_b, curve)?;
    correlation_from_loadings(&la, &lb, &xi)
}

pub(crate) fn correlation_from_loadings(
    la: &RateLoadings,
    lb: &RateLoadings,
    xi: &XiSet,
) -> Result<f64> {
    // At |rho_m| = 1 the quadratic form factorizes; evaluating the signs
    // directly sidesteps the cancellation the three-term sum suffers
    // there and returns exactly +-1.
    if xi.xi12 * xi.xi12 >= xi.xi1 * xi.xi2 * (1.0 - 1e-14) {
        let s = if xi.xi12 < 0.0 { -1.0 } else { 1.0 };
        let fa = la.gearing * (la.b1 * xi.xi1.sqrt() + s * la.b2 * xi.xi2.sqrt());
        let fb = lb.gearing * (lb.b1 * xi.xi1.sqrt() + s * lb.b2 * xi.xi2.sqrt());
        if fa == 0.0 || fb == 0.0 {
            return Err(Hw2fError::degenerate(
                "swap-rate variance vanishes; correlation undefined".to_string(),
            ));
        }
        return Ok((fa * fb).signum());
    }
    let cov = covariance_from_loadings(la, lb, xi);
    let var_a = covariance_from_loadings(la, la, xi);
    let var_b = covariance_from_loadings(lb, lb, xi);
    if var_a <= 0.0 || var_b <= 0.0 {
        return Err(Hw2fError::degenerate(
            "swap-rate variance vanishes; correlation undefined".to_string(),
        ));
    }
    let r = cov / (var_a * var_b).sqrt();
    // Rounding can push |r| a hair past 1 when the variances nearly
    // cancel; anything beyond that is a real inconsistency.
    debug_assert!(r.abs() <= 1.0 + 1e-9, "correlation overshoot {r}");
    Ok(r.clamp(-1.0, 1.0))
}

/// Parameter region of the three-way classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    I,
    II,
    III,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::I => write!(f, "I"),
            Region::II => write!(f, "II"),
            Region::III => write!(f, "III"),
        }
    }
}

/// Sign of the swap-rate correlation in the perfect de-correlation limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitSign {
    Positive,
    Negative,
    Degenerate,
}

impl std::fmt::Display for LimitSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitSign::Positive => write!(f, "+1"),
            LimitSign::Negative => write!(f, "-1"),
            LimitSign::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// Classification of the model parameters against a co-initial pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionReport {
    /// `sqrt(Xi2 / Xi1)` at the observation date.
    pub ratio_vol: f64,
    /// `B1/B2` of the short swap.
    pub ratio_short: f64,
    /// `B1/B2` of the long swap (strictly below `ratio_short`).
    pub ratio_long: f64,
    pub region: Region,
    pub limit_sign: LimitSign,
}

fn region_from_ratios(ratio_vol: f64, ratio_short: f64, ratio_long: f64) -> Region {
    if ratio_vol > ratio_short {
        Region::I
    } else if ratio_vol > ratio_long {
        Region::II
    } else {
        Region::III
    }
}

/// Classify the parameters for swaps observed at `t_n` ending at
/// `short_end < long_end`.
///
/// Boundary placement follows the classification verbatim: equality with
/// the short-swap ratio lands in region II, equality with the long-swap
/// ratio in region III.
pub fn classify_region(
    params: &Hw2fParams,
    t_n: f64,
    short_end: f64,
    long_end: f64,
) -> Result<RegionReport> {
    if short_end >= long_end {
        return Err(Hw2fError::invalid(format!(
            "region classification needs short_end < long_end (got {short_end}, {long_end})"
        )));
    }
    if t_n <= 0.0 || short_end <= t_n {
        return Err(Hw2fError::invalid("need 0 < t_n < short_end"));
    }
    let xi = xi_integrals(params, t_n)?;
    if xi.xi1 <= 0.0 {
        return Err(Hw2fError::degenerate(
            "Xi1 vanishes; volatility ratio undefined".to_string(),
        ));
    }
    let ratio_vol = (xi.xi2 / xi.xi1).sqrt();
    let ratio_short =
        b_factor(params.a1(), t_n, short_end)? / b_factor(params.a2(), t_n, short_end)?;
    let ratio_long = b_factor(params.a1(), t_n, long_end)? / b_factor(params.a2(), t_n, long_end)?;
    let region = region_from_ratios(ratio_vol, ratio_short, ratio_long);
    let limit_sign = match limit_factors(params, t_n, short_end, long_end, &xi)? {
        Some(product) if product > 0.0 => LimitSign::Positive,
        Some(_) => LimitSign::Negative,
        None => LimitSign::Degenerate,
    };
    Ok(RegionReport {
        ratio_vol,
        ratio_short,
        ratio_long,
        region,
        limit_sign,
    })
}

/// `(B1 sqrt(Xi1) - B2 sqrt(Xi2))` for both swaps, multiplied; `None`
/// when either factor vanishes (to floating-point resolution).
fn limit_factors(
    params: &Hw2fParams,
    t_n: f64,
    short_end: f64,
    long_end: f64,
    xi: &XiSet,
) -> Result<Option<f64>> {
    let sq1 = xi.xi1.sqrt();
    let sq2 = xi.xi2.sqrt();
    let mut product = 1.0;
    for end in [short_end, long_end] {
        let b1 = b_factor(params.a1(), t_n, end)?;
        let b2 = b_factor(params.a2(), t_n, end)?;
        let factor = b1 * sq1 - b2 * sq2;
        if factor.abs() <= 1e-12 * (b1 * sq1 + b2 * sq2) {
            return Ok(None);
        }
        product *= factor.signum();
    }
    Ok(Some(product))
}

/// Swap-rate correlation in the `rho_m -> -1` limit: `+1` in regions I
/// and III, `-1` in region II. Errors as degenerate when either swap's
/// loading factor vanishes there (the correlation is then undefined).
pub fn limit_correlation(
    params: &Hw2fParams,
    t_n: f64,
    spec_a: &SwapSpec,
    spec_b: &SwapSpec,
    curve: &DiscountCurve,
) -> Result<f64> {
    let _ = curve; // the limit depends only on loadings and variances
    let xi = xi_integrals(params, t_n)?;
    if xi.xi1 <= 0.0 || xi.xi2 <= 0.0 {
        return Err(Hw2fError::degenerate(
            "perfect de-correlation limit needs both factor variances positive".to_string(),
        ));
    }
    match limit_factors(params, t_n, spec_a.end, spec_b.end, &xi)? {
        Some(product) => Ok(product),
        None => Err(Hw2fError::degenerate(
            "a swap's loading factor vanishes in the rho_m -> -1 limit".to_string(),
        )),
    }
}

/// Evaluate the analytic swap-rate correlation across a grid of terminal
/// factor correlations. Output is sorted by `rho_m`.
pub fn correlation_curve(
    params: &Hw2fParams,
    t_n: f64,
    spec_a: &SwapSpec,
    spec_b: &SwapSpec,
    curve: &DiscountCurve,
    rho_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let base = params.to_terminal(t_n)?;
    let mut out = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let p = base.with_rho_m(t_n, rho)?;
        out.push((rho, swap_correlation(&p, t_n, spec_a, spec_b, curve)?));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// One point of a long-maturity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t_long: f64,
    pub rho_swap: f64,
    pub region: Region,
}

/// Sweep the long swap's end date with the short swap fixed.
///
/// `long_end == short_end` is allowed as the trivial leading point
/// (identical swaps, correlation 1; region II is impossible there).
pub fn maturity_sweep(
    params: &Hw2fParams,
    t_n: f64,
    short_end: f64,
    long_end_grid: &[f64],
    delta: f64,
    curve: &DiscountCurve,
) -> Result<Vec<SweepPoint>> {
    let short_spec = SwapSpec::co_initial(t_n, short_end, delta)?;
    let xi = xi_integrals(params, t_n)?;
    if xi.xi1 <= 0.0 {
        return Err(Hw2fError::degenerate(
            "Xi1 vanishes; sweep undefined".to_string(),
        ));
    }
    let ratio_vol = (xi.xi2 / xi.xi1).sqrt();
    let ratio_short =
        b_factor(params.a1(), t_n, short_end)? / b_factor(params.a2(), t_n, short_end)?;
    let mut out = Vec::with_capacity(long_end_grid.len());
    for &t_long in long_end_grid {
        if t_long < short_end {
            return Err(Hw2fError::invalid(format!(
                "sweep end {t_long} precedes the short end {short_end}"
            )));
        }
        let rho_swap = if t_long == short_end {
            1.0
        } else {
            let long_spec = SwapSpec::co_initial(t_n, t_long, delta)?;
            swap_correlation(params, t_n, &short_spec, &long_spec, curve)?
        };
        let ratio_long = b_factor(params.a1(), t_n, t_long)? / b_factor(params.a2(), t_n, t_long)?;
        out.push(SweepPoint {
            t_long,
            rho_swap,
            region: region_from_ratios(ratio_vol, ratio_short, ratio_long),
        });
    }
    Ok(out)
}

/// Result of the terminal-correlation calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoCalibration {
    pub rho_m: f64,
    /// Number of distinct roots found on the scan grid. More than one
    /// happens in regions I/III where the correlation is non-monotone;
    /// the largest root is returned.
    pub n_roots: usize,
}

const RHO_SCAN_POINTS: usize = 2000;
const RHO_TOL: f64 = 1e-10;

/// Solve `rho_swap(rho_m) = target` for `rho_m` in `[-1, 1]`.
///
/// Where the correlation is non-monotone the root with the largest
/// `rho_m` is returned and the multiplicity is reported. Targets beyond
/// the achievable minimum produce an error carrying that minimum.
pub fn calibrate_rho(
    params: &Hw2fParams,
    t_n: f64,
    spec_a: &SwapSpec,
    spec_b: &SwapSpec,
    curve: &DiscountCurve,
    target: f64,
) -> Result<RhoCalibration> {
    if !(-1.0..=1.0).contains(&target) {
        return Err(Hw2fError::invalid("target correlation must lie in [-1, 1]"));
    }
    let base = params.to_terminal(t_n)?;
    let eval = |rho: f64| -> Result<f64> {
        swap_correlation(&base.with_rho_m(t_n, rho)?, t_n, spec_a, spec_b, curve)
    };

    let mut values = Vec::with_capacity(RHO_SCAN_POINTS + 1);
    let mut min_val = f64::INFINITY;
    for i in 0..=RHO_SCAN_POINTS {
        let rho = -1.0 + 2.0 * i as f64 / RHO_SCAN_POINTS as f64;
        let v = eval(rho)?;
        min_val = min_val.min(v);
        values.push((rho, v));
    }
    if target < min_val - RHO_TOL {
        return Err(Hw2fError::UnattainableTarget {
            target,
            achievable_min: min_val,
        });
    }

    // Brackets where the residual changes sign, scanned upward so the
    // last one found carries the largest root.
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for w in values.windows(2) {
        let (r0, f0) = (w[0].0, w[0].1 - target);
        let (r1, f1) = (w[1].0, w[1].1 - target);
        if f0 == 0.0 {
            brackets.push((r0, r0));
        } else if f0 * f1 < 0.0 {
            brackets.push((r0, r1));
        }
    }
    if values
        .last()
        .map(|&(_, v)| v - target == 0.0)
        .unwrap_or(false)
    {
        brackets.push((1.0, 1.0));
    }
    if brackets.is_empty() {
        // No sign change: the closest grid point must already be within
        // tolerance (e.g. a tangency at the minimum).
        let (best_rho, best_val) = values
            .iter()
            .copied()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .expect("scan grid is non-empty");
        if (best_val - target).abs() < RHO_TOL {
            return Ok(RhoCalibration {
                rho_m: best_rho,
                n_roots: 1,
            });
        }
        return Err(Hw2fError::UnattainableTarget {
            target,
            achievable_min: min_val,
        });
    }

    let n_roots = brackets.len();
    let (mut lo, mut hi) = *brackets.last().expect("non-empty brackets");
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)? - target;
        if f_mid.abs() < RHO_TOL || hi <= lo + f64::EPSILON {
            return Ok(RhoCalibration {
                rho_m: mid,
                n_roots,
            });
        }
        let f_lo = eval(lo)? - target;
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RhoCalibration {
        rho_m: mid,
        n_roots,
    })
}

/// Result of the variance-level calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCalibration {
    pub params: Hw2fParams,
    /// Multiplier applied to both factor variances.
    pub lambda: f64,
}

/// Scale the factor variances so the swap's terminal variance matches a
/// normal (Bachelier) volatility quote: `Var(S(T_n)) = vol^2 T_n`.
///
/// The scaling leaves `rho_m`, the volatility ratio and hence the region
/// label untouched.
pub fn calibrate_level(
    params: &Hw2fParams,
    t_n: f64,
    spec: &SwapSpec,
    curve: &DiscountCurve,
    target_normal_vol: f64,
) -> Result<LevelCalibration> {
    if !target_normal_vol.is_finite() || target_normal_vol <= 0.0 {
        return Err(Hw2fError::invalid(
            "target normal volatility must be positive",
        ));
    }
    let var_unit = swap_covariance(params, t_n, spec, spec, curve)?;
    if var_unit <= 0.0 {
        return Err(Hw2fError::degenerate(
            "swap variance vanishes at unit scale; level calibration impossible".to_string(),
        ));
    }
    let lambda = target_normal_vol * target_normal_vol * t_n / var_unit;
    Ok(LevelCalibration {
        params: params.scale_variance(lambda)?,
        lambda,
    })
}

/// Normal (Bachelier) volatility implied by the analytic variance:
/// `sqrt(Var(S(T_n)) / T_n)`.
pub fn implied_normal_vol(
    params: &Hw2fParams,
    t_n: f64,
    spec: &SwapSpec,
    curve: &DiscountCurve,
) -> Result<f64> {
    let var = swap_covariance(params, t_n, spec, spec, curve)?;
    Ok((var / t_n).sqrt())
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}
