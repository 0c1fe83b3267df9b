//! Closed-form velocity profiles of a rectangular feed pulse.
//!
//! The response to a pulse of height `F` and length `T_v` is
//! `F * (C(t) - C(t - T_v))`, where `C` is the step response of the filter
//! cascade. `C` is written out explicitly below, so the same expression
//! covers both the cruising regime (`T_v >= n*T1`) and short pulses whose
//! ramps overlap.

use super::poly::{PiecewisePolynomial, Polynomial, Primitive};
use super::{require_non_negative, require_positive, FilterChain, FilterCount, KinematicsError};
use crate::scalar::Scalar;

/// Step response of `count` box filters of width `t1`.
pub fn step_response_matching<T: Scalar>(count: FilterCount, t1: T) -> PiecewisePolynomial<T> {
    let l = T::lit;
    let inv = t1.recip();
    let inv2 = inv * inv;
    match count {
        FilterCount::Two => PiecewisePolynomial::new(
            vec![T::zero(), t1, l(2.0) * t1],
            vec![
                // t^2 / (2 T1^2)
                Polynomial::new(vec![T::zero(), T::zero(), inv2 / l(2.0)]),
                // 1 - (2T1 - t)^2 / (2 T1^2)
                Polynomial::new(vec![l(0.5), inv, -inv2 / l(2.0)]),
            ],
            T::one(),
        ),
        FilterCount::Three => {
            let inv3 = inv2 * inv;
            PiecewisePolynomial::new(
                vec![T::zero(), t1, l(2.0) * t1, l(3.0) * t1],
                vec![
                    Polynomial::new(vec![T::zero(), T::zero(), T::zero(), inv3 / l(6.0)]),
                    Polynomial::new(vec![l(1.0 / 6.0), inv / l(2.0), inv2 / l(2.0), -inv3 / l(3.0)]),
                    Polynomial::new(vec![l(5.0 / 6.0), inv / l(2.0), -inv2 / l(2.0), inv3 / l(6.0)]),
                ],
                T::one(),
            )
        }
    }
}

/// Step response of two box filters with different widths.
pub fn step_response_distinct<T: Scalar>(t_a: T, t_b: T) -> PiecewisePolynomial<T> {
    let (long, short) = if t_a >= t_b { (t_a, t_b) } else { (t_b, t_a) };
    let k = (long * short).recip() / T::lit(2.0);
    let mut knots = vec![T::zero(), short];
    let mut pieces = vec![Polynomial::new(vec![T::zero(), T::zero(), k])];
    if long > short {
        // linear ramp while only the long filter is still filling
        knots.push(long);
        pieces.push(Polynomial::new(vec![short / (T::lit(2.0) * long), long.recip()]));
    }
    knots.push(long + short);
    // 1 - (short - tau)^2 / (2 long short)
    pieces.push(Polynomial::new(vec![
        T::one() - k * short * short,
        T::lit(2.0) * k * short,
        -k,
    ]));
    PiecewisePolynomial::new(knots, pieces, T::one())
}

/// Position, velocity, acceleration and jerk at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct KinematicState<T> {
    pub position: T,
    pub velocity: T,
    pub acceleration: T,
    pub jerk: T,
}

/// Piecewise polynomial velocity profile with its exact derivatives and
/// running integral.
#[derive(Clone, Debug)]
pub struct PiecewiseProfile<T> {
    feed: T,
    pulse_duration: T,
    velocity: PiecewisePolynomial<T>,
    acceleration: PiecewisePolynomial<T>,
    jerk: PiecewisePolynomial<T>,
    displacement: Primitive<T>,
}

impl<T: Scalar> PiecewiseProfile<T> {
    /// Wraps a velocity signal; `feed` and `pulse_duration` describe the
    /// commanded pulse it came from.
    pub fn from_velocity(feed: T, pulse_duration: T, velocity: PiecewisePolynomial<T>) -> Self {
        let acceleration = velocity.derivative();
        let jerk = acceleration.derivative();
        let displacement = velocity.primitive();
        Self {
            feed,
            pulse_duration,
            velocity,
            acceleration,
            jerk,
            displacement,
        }
    }

    pub fn feed(&self) -> T {
        self.feed
    }

    pub fn pulse_duration(&self) -> T {
        self.pulse_duration
    }

    /// Time at which the profile comes to rest (or settles on its tail).
    pub fn duration(&self) -> T {
        self.velocity.end()
    }

    /// Segment boundaries `(t_start, t_end)`.
    pub fn segments(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.velocity.knots().windows(2).map(|w| (w[0], w[1]))
    }

    pub fn velocity(&self) -> &PiecewisePolynomial<T> {
        &self.velocity
    }

    pub fn acceleration(&self) -> &PiecewisePolynomial<T> {
        &self.acceleration
    }

    pub fn jerk(&self) -> &PiecewisePolynomial<T> {
        &self.jerk
    }

    /// Exact state at `t`; outside the support the rest state is returned.
    pub fn evaluate(&self, t: T) -> KinematicState<T> {
        KinematicState {
            position: self.displacement.eval(t),
            velocity: self.velocity.eval(t),
            acceleration: self.acceleration.eval(t),
            jerk: self.jerk.eval(t),
        }
    }

    pub fn total_displacement(&self) -> T {
        self.displacement.total()
    }

    pub fn peak_velocity(&self) -> T {
        self.velocity.max_abs()
    }

    pub fn peak_acceleration(&self) -> T {
        self.acceleration.max_abs()
    }

    pub fn peak_jerk(&self) -> T {
        self.jerk.max_abs()
    }
}

/// Profile of a feed pulse `(feed, pulse_duration)` filtered by a chain of
/// identical box filters.
pub fn analytic_profile_matching<T: Scalar>(
    feed: T,
    pulse_duration: T,
    chain: &FilterChain<T>,
) -> Result<PiecewiseProfile<T>, KinematicsError> {
    require_non_negative("feed", feed)?;
    require_non_negative("pulse duration", pulse_duration)?;
    let step = chain.step_response();
    Ok(pulse_through(feed, pulse_duration, &step))
}

/// Profile of a feed pulse filtered by two box filters of different widths.
/// The order of `t_a` and `t_b` does not matter.
pub fn analytic_profile_distinct<T: Scalar>(
    feed: T,
    pulse_duration: T,
    t_a: T,
    t_b: T,
) -> Result<PiecewiseProfile<T>, KinematicsError> {
    require_non_negative("feed", feed)?;
    require_positive("pulse duration", pulse_duration)?;
    require_positive("first time constant", t_a)?;
    require_positive("second time constant", t_b)?;
    let step = step_response_distinct(t_a, t_b);
    Ok(pulse_through(feed, pulse_duration, &step))
}

fn pulse_through<T: Scalar>(feed: T, pulse_duration: T, step: &PiecewisePolynomial<T>) -> PiecewiseProfile<T> {
    let rise = step.scaled(feed);
    let fall = step.delayed(pulse_duration).scaled(-feed);
    PiecewiseProfile::from_velocity(feed, pulse_duration, rise.add(&fall))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: FilterCount, t1: f64) -> FilterChain<f64> {
        FilterChain::new(n, t1).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn step_responses_are_continuous_and_reach_one() {
        for step in [
            step_response_matching(FilterCount::Two, 0.1),
            step_response_matching(FilterCount::Three, 0.1),
            step_response_distinct(0.2, 0.1),
        ] {
            for &k in step.knots() {
                let left = step.eval(k - 1e-12);
                let right = step.eval(k);
                assert!(close(left, right, 1e-9), "jump at {k}: {left} vs {right}");
            }
            assert_eq!(step.eval(10.0), 1.0);
        }
    }

    #[test]
    fn two_filter_profile() {
        let p = analytic_profile_matching(50.0, 1.2, &chain(FilterCount::Two, 0.1)).unwrap();
        assert!(close(p.duration(), 1.4, 1e-12));
        assert_eq!(p.segments().count(), 5);
        assert!(close(p.peak_acceleration(), 500.0, 1e-9));
        assert!(close(p.acceleration().eval(0.1), 500.0, 1e-9));
        assert!(close(p.peak_jerk(), 5000.0, 1e-9));
        assert!(close(p.peak_velocity(), 50.0, 1e-12));
        // second ramp segment, written out from the closed form
        let t: f64 = 0.15;
        let expected = 50.0 / (2.0 * 0.01) * (-t * t + 4.0 * 0.1 * t - 2.0 * 0.01);
        assert!(close(p.velocity().eval(t), expected, 1e-9));
    }

    #[test]
    fn three_filter_profile() {
        let p = analytic_profile_matching(50.0, 1.2, &chain(FilterCount::Three, 0.1)).unwrap();
        assert!(close(p.duration(), 1.5, 1e-12));
        assert_eq!(p.segments().count(), 7);
        assert!(close(p.peak_acceleration(), 375.0, 1e-9));
        assert!(close(p.acceleration().eval(0.15), 375.0, 1e-9));
        assert!(close(p.peak_jerk(), 5000.0, 1e-9));
    }

    #[test]
    fn evaluation_at_the_ends() {
        let p = analytic_profile_matching(50.0, 1.2, &chain(FilterCount::Two, 0.1)).unwrap();
        let s0 = p.evaluate(0.0);
        assert_eq!((s0.position, s0.velocity, s0.acceleration), (0.0, 0.0, 0.0));
        assert!(close(s0.jerk, 5000.0, 1e-9));
        let end = p.evaluate(p.duration());
        assert!(close(end.position, 60.0, 1e-12));
        assert_eq!((end.velocity, end.acceleration), (0.0, 0.0));
        let mid = p.evaluate(0.7);
        assert!(close(mid.velocity, 50.0, 1e-12));
        assert!(close(mid.acceleration, 0.0, 1e-9));
    }

    #[test]
    fn zero_feed_is_a_zero_profile() {
        let p = analytic_profile_matching(0.0, 1.0, &chain(FilterCount::Three, 0.1)).unwrap();
        assert_eq!(p.peak_velocity(), 0.0);
        assert_eq!(p.total_displacement(), 0.0);
        assert!(analytic_profile_matching(-1.0, 1.0, &chain(FilterCount::Two, 0.1)).is_err());
    }

    #[test]
    fn short_pulse_does_not_reach_feed() {
        let p = analytic_profile_matching(50.0, 0.1, &chain(FilterCount::Two, 0.1)).unwrap();
        assert!(p.peak_velocity() < 50.0);
        assert!(close(p.total_displacement(), 5.0, 1e-12));
        assert!(close(p.duration(), 0.3, 1e-12));
    }

    #[test]
    fn distinct_constants() {
        let p = analytic_profile_distinct(50.0, 1.0, 0.2, 0.1).unwrap();
        assert!(close(p.duration(), 1.3, 1e-12));
        assert!(close(p.velocity().eval(0.5), 50.0, 1e-12));
        assert!(close(p.peak_acceleration(), 250.0, 1e-9));
        assert_eq!(p.segments().count(), 7);

        // short pulse: T_v < T2 < T1
        let (tv, t1, t2) = (0.05, 0.2, 0.1);
        let p = analytic_profile_distinct(50.0, tv, t1, t2).unwrap();
        assert!(close(p.peak_velocity(), 50.0 * tv / t1, 1e-9));
        assert!(close(p.peak_acceleration(), 50.0 * tv / (t1 * t2), 1e-6));

        // boundary: no cruise plateau
        let p = analytic_profile_distinct(50.0, 0.3, 0.2, 0.1).unwrap();
        assert!(close(p.velocity().eval(0.3), 50.0, 1e-12));
        assert!(p.velocity().eval(0.3 - 1e-6) < 50.0);
        assert!(p.velocity().eval(0.3 + 1e-6) < 50.0);

        assert!(analytic_profile_distinct(50.0, 1.0, 0.0, 0.1).is_err());
        assert!(analytic_profile_distinct(50.0, -1.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn distinct_order_is_irrelevant() {
        let a = analytic_profile_distinct(30.0, 0.4, 0.15, 0.05).unwrap();
        let b = analytic_profile_distinct(30.0, 0.4, 0.05, 0.15).unwrap();
        for i in 0..=700 {
            let t = i as f64 * 1e-3;
            assert!(close(a.velocity().eval(t), b.velocity().eval(t), 1e-12));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let c = FilterChain::new(FilterCount::Three, 0.1_f32).unwrap();
        let p = analytic_profile_matching(50.0_f32, 1.2, &c).unwrap();
        assert!((p.total_displacement() - 60.0).abs() < 1e-4);
        assert!((p.peak_acceleration() - 375.0).abs() < 1e-2);
    }
}
