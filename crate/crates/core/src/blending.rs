//! Corner blending between consecutive linear moves.
//!
//! Around a junction the outgoing axis pulse ends with a blend pulse of
//! height `alpha*F` and length `T_b`, and the incoming one starts with the
//! mirror image. After filtering, the tool cuts the corner; the deviation is
//! largest half a filter delay after the junction, where both axis offsets
//! equal `s'`. With the cornering angle `theta` the error is
//! `eps = sqrt(2) * s' * sqrt(cos(theta) + 1)`.
//!
//! `s'` has a closed form in `alpha`. For two filters it is a single
//! polynomial; for three filters the incoming blend pulse crosses a kernel
//! knot at `alpha = 2/3` and the polynomial changes there.

use thiserror::Error;

use crate::kinematics::{
    FilterChain, FilterCount, KinematicsError, PiecewisePolynomial, PiecewiseProfile,
};
use crate::scalar::{Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlendingError {
    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Blend decision for one junction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerPlan<T> {
    /// Junction between block `junction` and block `junction + 1`.
    pub junction: usize,
    /// Interior angle: `pi` when the path continues straight on.
    pub theta: T,
    /// Feed the corner was planned with (mm/s).
    pub feed: T,
    pub alpha: T,
    /// Blend pulse height `alpha * feed` (mm/s).
    pub blend_feed: T,
    /// Blend pulse length `T_d/2 * (1 - alpha)` (s).
    pub blend_duration: T,
    /// Closed-form corner deviation (mm).
    pub predicted_error: T,
}

/// Blend pulse height and length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlendPulse<T> {
    pub feed: T,
    pub duration: T,
}

/// Interior angle between an incoming direction `u1` and outgoing `u2`.
pub fn corner_angle<T: Scalar>(u1: Vec3<T>, u2: Vec3<T>) -> T {
    let turn = u1.cross(u2).norm().atan2(u1.dot(u2));
    T::PI() - turn
}

/// Axis displacement of the incoming move, measured from the junction, at
/// the instant of maximum deviation (half the filter delay).
pub fn corner_axis_offset<T: Scalar>(feed: T, t1: T, alpha: T, count: FilterCount) -> T {
    let a = clamp_unit(alpha);
    let l = T::lit;
    let shape = match count {
        FilterCount::Two => a * (-a * a * a + a * a + T::one()) / l(6.0),
        FilterCount::Three => {
            let a2 = a * a;
            let a4 = a2 * a2;
            if a <= l(2.0 / 3.0) {
                (l(78.0) * a + l(81.0) * a4 - l(81.0) * a4 * a) / l(384.0)
            } else {
                (l(162.0) * a4 * a - l(810.0) * a4 + l(1296.0) * a2 * a - l(936.0) * a2
                    + l(414.0) * a
                    - l(48.0))
                    / l(384.0)
            }
        }
    };
    feed * t1 * shape
}

/// Axis velocity of the incoming move at the instant of maximum deviation.
pub fn corner_axis_velocity<T: Scalar>(feed: T, alpha: T, count: FilterCount) -> T {
    let a = clamp_unit(alpha);
    let l = T::lit;
    let shape = match count {
        FilterCount::Two => a * (-a * a + a + T::one()) / l(2.0),
        FilterCount::Three => {
            let a2 = a * a;
            if a <= l(2.0 / 3.0) {
                (l(24.0) * a + l(27.0) * a2 * a - l(27.0) * a2 * a2) / l(48.0)
            } else {
                (l(54.0) * a2 * a2 - l(216.0) * a2 * a + l(270.0) * a2 - l(108.0) * a + l(24.0))
                    / l(48.0)
            }
        }
    };
    feed * shape
}

/// Closed-form corner deviation for a symmetric, equal-feed junction.
pub fn tcp_error<T: Scalar>(feed: T, t1: T, alpha: T, theta: T, count: FilterCount) -> T {
    let opening = (theta.cos() + T::one()).max(T::zero());
    T::SQRT_2() * corner_axis_offset(feed, t1, alpha, count) * opening.sqrt()
}

/// Largest `alpha` in `[0, 1]` whose corner deviation stays within
/// `tolerance`.
///
/// The deviation is nondecreasing in `alpha`, so a coarse scan brackets the
/// crossing and bisection narrows it to the solver tolerance. The returned
/// value is always on the feasible side.
pub fn max_alpha<T: Scalar>(
    feed: T,
    t1: T,
    theta: T,
    tolerance: T,
    count: FilterCount,
) -> Result<T, BlendingError> {
    crate::kinematics::require_positive("feed", feed)?;
    crate::kinematics::require_positive("time constant", t1)?;
    if !(tolerance >= T::zero()) || !tolerance.is_finite() {
        return Err(out_of_range("tolerance", tolerance));
    }
    let theta = normalize_angle(theta)?;
    let err = |a: T| tcp_error(feed, t1, a, theta, count);

    if err(T::one()) <= tolerance {
        return Ok(T::one());
    }
    const SCAN: usize = 64;
    let mut lo = T::zero();
    let mut hi = T::one();
    for i in 1..=SCAN {
        let a = T::count(i) / T::count(SCAN);
        if err(a) > tolerance {
            hi = a;
            break;
        }
        lo = a;
    }
    let tol = T::solver_tol();
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if err(mid) <= tolerance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Blend pulse height `alpha*F` and length `T_d/2 * (1 - alpha)`.
pub fn blend_pulse_params<T: Scalar>(feed: T, alpha: T, chain: &FilterChain<T>) -> BlendPulse<T> {
    let a = clamp_unit(alpha);
    BlendPulse {
        feed: a * feed,
        duration: chain.half_delay() * (T::one() - a),
    }
}

/// Filtered kinematics of the incoming axis at a blended corner: the input
/// is a blend pulse `alpha*F` of length `T_b` followed by a steady `F`.
///
/// `t = 0` is the junction; the state at `t = T_d/2` is the point of
/// maximum deviation. Position is measured from the junction.
pub fn blending_kinematics<T: Scalar>(
    feed: T,
    t1: T,
    alpha: T,
    count: FilterCount,
) -> Result<PiecewiseProfile<T>, BlendingError> {
    crate::kinematics::require_positive("feed", feed)?;
    if !(T::zero()..=T::one()).contains(&alpha) {
        return Err(out_of_range("alpha", alpha));
    }
    let chain = FilterChain::new(count, t1)?;
    let blend = blend_pulse_params(feed, alpha, &chain);
    let input = PiecewisePolynomial::from_pulses(
        T::zero(),
        [(blend.feed, blend.duration), (feed, chain.total_delay())],
        feed,
    );
    let velocity = input.box_filter_cascade(t1, count.get());
    Ok(PiecewiseProfile::from_velocity(feed, blend.duration, velocity))
}

/// Plans a single junction with the given feed and tolerance.
pub fn plan_corner<T: Scalar>(
    junction: usize,
    incoming: Vec3<T>,
    outgoing: Vec3<T>,
    feed: T,
    tolerance: T,
    chain: &FilterChain<T>,
) -> Result<CornerPlan<T>, BlendingError> {
    let theta = corner_angle(incoming, outgoing);
    let alpha = max_alpha(feed, chain.time_constant(), theta, tolerance, chain.count())?;
    Ok(corner_with_alpha(junction, theta, feed, alpha, chain))
}

/// Builds a plan for a prescribed `alpha`.
pub fn corner_with_alpha<T: Scalar>(
    junction: usize,
    theta: T,
    feed: T,
    alpha: T,
    chain: &FilterChain<T>,
) -> CornerPlan<T> {
    let alpha = clamp_unit(alpha);
    let blend = blend_pulse_params(feed, alpha, chain);
    CornerPlan {
        junction,
        theta,
        feed,
        alpha,
        blend_feed: blend.feed,
        blend_duration: blend.duration,
        predicted_error: tcp_error(feed, chain.time_constant(), alpha, theta, chain.count()),
    }
}

fn clamp_unit<T: Scalar>(a: T) -> T {
    a.max(T::zero()).min(T::one())
}

fn normalize_angle<T: Scalar>(theta: T) -> Result<T, BlendingError> {
    let slack = T::lit(1e-9);
    if theta.is_nan() || theta < -slack || theta > T::PI() + slack {
        return Err(out_of_range("corner angle", theta));
    }
    Ok(theta.max(T::zero()).min(T::PI()))
}

fn out_of_range<T: Scalar>(name: &'static str, value: T) -> BlendingError {
    BlendingError::OutOfRange {
        name,
        value: value.as_f64(),
    }
}
