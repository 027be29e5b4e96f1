//! A priori constants for the collocation scheme.
//!
//! Every certified inequality the assembly and solver stages emit rests on
//! bounds of the form `|D^p v| / v <= const` for the positive eigenfunction
//! `v` of the transfer operator, together with a log-Lipschitz slope `L`
//! such that `v(x2) <= v(x1) exp(L |x2 - x1|)`. This module computes those
//! constants for the three supported families:
//!
//! * Möbius digit families on `[0, 1]` with minimum digit `gamma`, where
//!   the derivative ratios alternate in sign and obey the rising-product
//!   bound `(2s)(2s+1)...(2s+p-1) / gamma^p`,
//! * the perturbed Cantor family, where the constants come from a geometric
//!   envelope of the branch derivatives (`C1`, `C2`, `M0`, ratio `kappa`),
//! * complex Möbius families on the half-disk, with separate bounds per
//!   coordinate direction and, for infinite digit sets, a tail constant
//!   that majorizes the discarded digits.

use thiserror::Error;

use crate::maps::DigitSetKind;

/// Number of subintervals in the convexity spot check.
const CONVEXITY_GRID: usize = 10_000;
/// Additive slack absorbing roundoff in the convexity spot check.
const CONVEXITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("derivative order {order} is outside the supported range 1..=4")]
    OrderOutOfRange { order: u32 },
    #[error("exponent s = {s} must be positive")]
    NonpositiveExponent { s: f64 },
    #[error("contraction parameter gamma = {gamma} must be at least 1")]
    GammaBelowOne { gamma: f64 },
    #[error("perturbation parameter lambda = {lambda} is outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("exponent s = {s} is below the validity threshold {min_s} of the perturbed family")]
    ExponentBelowValidity { s: f64, min_s: f64 },
    #[error("series ratio kappa = {kappa} must lie in [0, 1)")]
    RatioOutOfRange { kappa: f64 },
    #[error("tail constant requires s > 1; got s = {s}")]
    TailExponentTooSmall { s: f64 },
    #[error("tail constant requires a truncation radius of at least 3; got {radius}")]
    TailRadiusTooSmall { radius: f64 },
    #[error("tail constant is defined only for the infinite digit alphabets")]
    TailUnsupportedDigitSet,
}

/// Derivative and slope bounds for a one-dimensional eigenfunction.
///
/// `d2_lower <= 0 <= d2_upper` bracket `D^2 v / v`; `d1_abs` bounds
/// `|D v| / v`; `log_slope` is the `L` in `v(x2) <= v(x1) exp(L |x2-x1|)`.
/// When `convexity_certified` is set, `D^2 v >= 0` is known and
/// `d2_lower` is 0, which lets assembly correct only the lower matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProfile1D {
    pub d1_abs: f64,
    pub d2_lower: f64,
    pub d2_upper: f64,
    pub log_slope: f64,
    pub convexity_certified: bool,
}

/// Per-axis second-derivative bounds and slope for the half-disk family.
///
/// The bounds bracket `D_xx v / v` and `D_yy v / v`; `log_slope` is the
/// Lipschitz constant of `log v` with respect to Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProfile2D {
    pub dxx_lower: f64,
    pub dxx_upper: f64,
    pub dyy_lower: f64,
    pub dyy_upper: f64,
    pub log_slope: f64,
}

/// Sums of the envelope sequence `eps_k` and of its squares.
///
/// `eps_0 = 1`, so both sums are at least 1 for any admissible sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSeries {
    pub sum_eps: f64,
    pub sum_eps_sq: f64,
}

impl EpsilonSeries {
    /// Closed-form sums for the geometric envelope `eps_k = kappa^k`.
    pub fn from_ratio(kappa: f64) -> Result<Self, BoundsError> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(BoundsError::RatioOutOfRange { kappa });
        }
        Ok(EpsilonSeries {
            sum_eps: 1.0 / (1.0 - kappa),
            sum_eps_sq: 1.0 / (1.0 - kappa * kappa),
        })
    }
}

/// Envelope constants for the perturbed Cantor family at a fixed `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedConstants {
    pub c1: f64,
    pub c2: f64,
    pub m0: f64,
    pub kappa: f64,
}

/// Smallest exponent for which the perturbed-family constants are valid.
pub fn perturbed_exponent_floor() -> f64 {
    2.0f64.ln() / 5.0f64.ln()
}

/// Rising-product bound `(2s)(2s+1)...(2s+p-1) / gamma^p` on
/// `|D^p v| / v` for Möbius digit families. The sign of `D^p v` itself
/// alternates with `p`; callers that need signed bounds combine this value
/// with that alternation.
pub fn cf_derivative_bound(s: f64, gamma: f64, order: u32) -> Result<f64, BoundsError> {
    if !(1..=4).contains(&order) {
        return Err(BoundsError::OrderOutOfRange { order });
    }
    check_s_gamma(s, gamma)?;
    let mut value = 1.0;
    for i in 0..order {
        value *= 2.0 * s + f64::from(i);
    }
    Ok(value / gamma.powi(order as i32))
}

/// Log-Lipschitz factor `exp(2 s dist / gamma)` relating eigenfunction
/// values at two points of a Möbius digit family.
pub fn cf_lipschitz_factor(s: f64, gamma: f64, dist: f64) -> f64 {
    debug_assert!(dist >= 0.0 && s > 0.0 && gamma >= 1.0);
    (2.0 * s * dist / gamma).exp()
}

/// Full one-dimensional profile for a Möbius digit family with minimum
/// digit `gamma`. Sign alternation makes `D^2 v` nonnegative, so the
/// profile is always convexity-certified with `d2_lower = 0`.
pub fn cf_profile(s: f64, gamma: f64) -> Result<BoundProfile1D, BoundsError> {
    let d1 = cf_derivative_bound(s, gamma, 1)?;
    let d2 = cf_derivative_bound(s, gamma, 2)?;
    Ok(BoundProfile1D {
        d1_abs: d1,
        d2_lower: 0.0,
        d2_upper: d2,
        log_slope: d1,
        convexity_certified: true,
    })
}

/// Envelope constants `(C1, C2, M0, kappa)` for the perturbed Cantor
/// family. `C1` and `C2` are piecewise in `lambda`, switching where the
/// interior maximum of the underlying calculus bound leaves the unit
/// interval; both pieces agree at the switch point.
pub fn perturbed_constants(lambda: f64) -> Result<PerturbedConstants, BoundsError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(BoundsError::LambdaOutOfRange { lambda });
    }
    let c1 = if lambda <= 3.0 / 7.0 {
        (35.0 * lambda / 4.0) / (1.0 + 3.5 * lambda)
    } else {
        (3.5 * lambda) * (3.0 / (7.0 * lambda)).powf(0.6)
    };
    let c2 = if lambda <= 1.0 / 14.0 {
        (105.0 * lambda / 8.0) / (1.0 + 3.5 * lambda)
    } else {
        3.0 * 0.25f64.powf(0.2) * (3.5 * lambda).powf(0.8)
    };
    let m0 = 35.0 * lambda / (4.0 * (3.0 + 2.0 * lambda));
    let kappa = (2.0 + 7.0 * lambda) / (6.0 + 4.0 * lambda);
    Ok(PerturbedConstants { c1, c2, m0, kappa })
}

/// One-dimensional profile from abstract envelope constants.
///
/// The caller supplies `C1, C2, M0` and the envelope sums; the result is
/// the two-sided profile with
/// `d1_abs = L = s C1 S`, `d2_upper = s^2 C1^2 S^2 + s Q (C2 + C1 M0 S)`,
/// and `d2_lower = -s Q ((C2 + C1^2) + C1 M0 S)` where `S` is the sum of
/// the envelope and `Q` the sum of its squares. Convexity is not decided
/// here; the result is two-sided until a family-specific certificate
/// upgrades it.
pub fn general_profile_1d(
    c1: f64,
    c2: f64,
    m0: f64,
    eps: &EpsilonSeries,
    s: f64,
) -> BoundProfile1D {
    debug_assert!(s > 0.0 && c1 >= 0.0 && c2 >= 0.0 && m0 >= 0.0);
    debug_assert!(eps.sum_eps >= 1.0 && eps.sum_eps_sq >= 1.0);
    let sum = eps.sum_eps;
    let sum_sq = eps.sum_eps_sq;
    let d1 = s * c1 * sum;
    let d2_upper = s * s * c1 * c1 * sum * sum + s * sum_sq * (c2 + c1 * m0 * sum);
    let d2_lower = -s * sum_sq * ((c2 + c1 * c1) + c1 * m0 * sum);
    BoundProfile1D {
        d1_abs: d1,
        d2_lower,
        d2_upper,
        log_slope: d1,
        convexity_certified: false,
    }
}

/// Checks `b'' b - (1 - s) (b')^2 >= 0` for the perturbed branch
/// derivative `b` on a uniform grid over `[0, 1]`.
///
/// The inequality holds analytically for every `lambda` in `[0, 1]` once
/// `s` clears the family's exponent floor; the grid run is a guard against
/// implementation drift, not the proof.
fn perturbed_convexity_holds(s: f64, lambda: f64) -> bool {
    let denom = 3.0 + 2.0 * lambda;
    for i in 0..=CONVEXITY_GRID {
        let x = i as f64 / CONVEXITY_GRID as f64;
        let b = (1.0 + 3.5 * lambda * x.powf(2.5)) / denom;
        let b1 = 8.75 * lambda * x.powf(1.5) / denom;
        let b2 = 13.125 * lambda * x.sqrt() / denom;
        if b2 * b - (1.0 - s) * b1 * b1 < -CONVEXITY_SLACK {
            return false;
        }
    }
    true
}

/// Profile for the perturbed Cantor family at exponent `s`.
///
/// When the convexity guard passes, the second derivative of the
/// eigenfunction is known to be nonnegative and the profile collapses to
/// a one-sided correction; otherwise the two-sided envelope bounds stand.
pub fn perturbed_profile(s: f64, lambda: f64) -> Result<BoundProfile1D, BoundsError> {
    let min_s = perturbed_exponent_floor();
    if !(s > 0.0) {
        return Err(BoundsError::NonpositiveExponent { s });
    }
    if s < min_s {
        return Err(BoundsError::ExponentBelowValidity { s, min_s });
    }
    let constants = perturbed_constants(lambda)?;
    let eps = EpsilonSeries::from_ratio(constants.kappa)?;
    let profile = general_profile_1d(constants.c1, constants.c2, constants.m0, &eps, s);
    if perturbed_convexity_holds(s, lambda) {
        Ok(BoundProfile1D {
            d2_lower: 0.0,
            convexity_certified: true,
            ..profile
        })
    } else {
        Ok(profile)
    }
}

/// Coordinate axis selector for the half-disk derivative bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Signed bounds `(lower, upper)` on `D^p v / v` along one axis for the
/// half-disk Möbius family, orders 1 through 4.
pub fn partial_derivative_bounds(
    s: f64,
    gamma: f64,
    axis: Axis,
    order: u32,
) -> Result<(f64, f64), BoundsError> {
    check_s_gamma(s, gamma)?;
    let g2 = gamma * gamma;
    let g3 = g2 * gamma;
    let g4 = g2 * g2;
    let bounds = match (axis, order) {
        (Axis::X, 1) => (-2.0 * s / gamma, 0.0),
        (Axis::X, 2) => (-s / (4.0 * g2 * (s + 1.0)), 2.0 * s * (2.0 * s + 1.0) / g2),
        (Axis::X, 3) => (
            -2.0 * s * (2.0 * s + 1.0) * (2.0 * s + 2.0) / g3,
            2.0 * s * (2.0 * s + 2.0) / (g3 * (s + 2.0) * (s + 2.0)),
        ),
        (Axis::X, 4) | (Axis::Y, 4) => (
            -2.0 * s * (2.0 * s + 2.0) * (3.0 * s + 3.0) / g4,
            2.0 * s * (2.0 * s + 1.0) * (2.0 * s + 2.0) * (2.0 * s + 3.0) / g4,
        ),
        (Axis::Y, 1) => (-s / gamma, s / gamma),
        (Axis::Y, 2) => (-2.0 * s / g2, 2.0 * s * (2.0 * s + 1.0) / (4.0 * g2)),
        (Axis::Y, 3) => {
            let scale = 2.0 * s * (2.0 * s + 2.0) / g3;
            let factor = (25.0 * 5.0f64.sqrt() / 72.0).max((2.0 * s + 1.0) / 8.0);
            (-scale * factor, scale * factor)
        }
        _ => return Err(BoundsError::OrderOutOfRange { order }),
    };
    Ok(bounds)
}

/// Profile for the half-disk Möbius family: the order-2 axis bounds plus
/// the Euclidean log-slope `sqrt(5) s / gamma`.
pub fn profile_2d(s: f64, gamma: f64) -> Result<BoundProfile2D, BoundsError> {
    let (dxx_lower, dxx_upper) = partial_derivative_bounds(s, gamma, Axis::X, 2)?;
    let (dyy_lower, dyy_upper) = partial_derivative_bounds(s, gamma, Axis::Y, 2)?;
    Ok(BoundProfile2D {
        dxx_lower,
        dxx_upper,
        dyy_lower,
        dyy_upper,
        log_slope: 5.0f64.sqrt() * s / gamma,
    })
}

/// Tail constant majorizing the total weight of all digits outside the
/// truncation disk of radius `radius`, per collocation row.
///
/// Finite alphabets have no tail; only the two infinite alphabets are
/// accepted. The formula needs `s > 1` for the digit sums to converge and
/// `radius >= 3` to keep every denominator comfortably positive.
pub fn tail_constant(kind: &DigitSetKind, s: f64, radius: f64) -> Result<f64, BoundsError> {
    let k = match kind {
        DigitSetKind::I1 => std::f64::consts::FRAC_PI_2,
        DigitSetKind::I2 => std::f64::consts::FRAC_PI_4,
        _ => return Err(BoundsError::TailUnsupportedDigitSet),
    };
    if !(s > 1.0) {
        return Err(BoundsError::TailExponentTooSmall { s });
    }
    if !(radius >= 3.0) {
        return Err(BoundsError::TailRadiusTooSmall { radius });
    }
    let boundary = (2.0 * s / (radius * radius - radius).sqrt()).exp();
    let ring = (radius / (radius - 1.0)).powf(s);
    let line = (radius - 1.0).powf(-(2.0 * s - 1.0)) / (2.0 * s - 1.0);
    let plane = k * (radius - std::f64::consts::SQRT_2).powf(-(2.0 * s - 2.0)) / (s - 1.0);
    Ok(boundary * ring * (line + plane))
}

fn check_s_gamma(s: f64, gamma: f64) -> Result<(), BoundsError> {
    if !(s > 0.0) {
        return Err(BoundsError::NonpositiveExponent { s });
    }
    if !(gamma >= 1.0) {
        return Err(BoundsError::GammaBelowOne { gamma });
    }
    Ok(())
}
