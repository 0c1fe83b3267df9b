//! Cascaded first-order FIR (moving-average) filter models.
//!
//! A rectangular feed pulse pushed through `n` unit-area box filters of
//! width `T1` becomes a jerk-limited velocity profile. This module sizes the
//! time constant, builds the closed-form profiles and evaluates them.

mod poly;
mod profile;

pub use poly::{PiecewisePolynomial, Polynomial, Primitive};
pub use profile::{
    analytic_profile_distinct, analytic_profile_matching, step_response_distinct,
    step_response_matching, KinematicState, PiecewiseProfile,
};

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("unsupported filter count {0} (expected 2 or 3)")]
    UnsupportedFilterCount(usize),
}

pub(crate) fn require_positive<T: Scalar>(name: &'static str, value: T) -> Result<T, KinematicsError> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(KinematicsError::NonPositive {
            name,
            value: value.as_f64(),
        })
    }
}

pub(crate) fn require_non_negative<T: Scalar>(
    name: &'static str,
    value: T,
) -> Result<T, KinematicsError> {
    if value >= T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(KinematicsError::Negative {
            name,
            value: value.as_f64(),
        })
    }
}

/// Number of cascaded box filters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterCount {
    Two,
    Three,
}

impl FilterCount {
    pub fn get(self) -> usize {
        match self {
            FilterCount::Two => 2,
            FilterCount::Three => 3,
        }
    }
}

impl TryFrom<usize> for FilterCount {
    type Error = KinematicsError;

    fn try_from(n: usize) -> Result<Self, Self::Error> {
        match n {
            2 => Ok(FilterCount::Two),
            3 => Ok(FilterCount::Three),
            other => Err(KinematicsError::UnsupportedFilterCount(other)),
        }
    }
}

impl fmt::Display for FilterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// `n` identical box filters of width `T1`; total delay `n * T1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterChain<T> {
    count: FilterCount,
    time_constant: T,
}

impl<T: Scalar> FilterChain<T> {
    pub fn new(count: FilterCount, time_constant: T) -> Result<Self, KinematicsError> {
        require_positive("time constant", time_constant)?;
        Ok(Self {
            count,
            time_constant,
        })
    }

    /// Chain whose time constant keeps the jerk of a `delta_feed` step at
    /// `j_max`.
    pub fn from_jerk(count: FilterCount, delta_feed: T, j_max: T) -> Result<Self, KinematicsError> {
        Self::new(count, time_constant_from_jerk(delta_feed, j_max)?)
    }

    pub fn count(&self) -> FilterCount {
        self.count
    }

    pub fn time_constant(&self) -> T {
        self.time_constant
    }

    pub fn total_delay(&self) -> T {
        self.time_constant * T::count(self.count.get())
    }

    pub fn half_delay(&self) -> T {
        self.total_delay() / T::lit(2.0)
    }

    /// Response of the chain to a unit step at `t = 0`.
    pub fn step_response(&self) -> PiecewisePolynomial<T> {
        step_response_matching(self.count, self.time_constant)
    }
}

/// `T1 = sqrt(delta_feed / j_max)`: the time constant at which a feed step
/// of `delta_feed` produces a peak jerk of `j_max`.
pub fn time_constant_from_jerk<T: Scalar>(delta_feed: T, j_max: T) -> Result<T, KinematicsError> {
    require_positive("feed step", delta_feed)?;
    require_positive("maximum jerk", j_max)?;
    Ok((delta_feed / j_max).sqrt())
}

/// Time constant from a measured acceleration duration: `T1 = T_acc / n`.
pub fn identify_time_constant<T: Scalar>(
    acceleration_time: T,
    filters: usize,
) -> Result<T, KinematicsError> {
    let count = FilterCount::try_from(filters)?;
    require_positive("acceleration time", acceleration_time)?;
    Ok(acceleration_time / T::count(count.get()))
}
