//! Turns CL blocks into per-axis rectangular velocity pulses.
//!
//! Each block `k` contributes, back to back, an incoming blend pulse, a main
//! pulse at its feed for `T_v(k)`, and an outgoing blend pulse. Blend pulses
//! run at the corner feed `F_c` for `T_b`; the main pulse is shortened so that
//! the pulse area still equals the block length.

use thiserror::Error;

use crate::blending::{corner_angle, corner_with_alpha, max_alpha, BlendingError, CornerPlan};
use crate::gcode::{CLBlock, ConfigError, Program, ProgramConfig};
use crate::kinematics::{FilterChain, KinematicsError, PiecewisePolynomial};
use crate::scalar::{Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Blending(#[from] BlendingError),
    #[error("segment too short for its blends: main pulse would last {duration} s")]
    ShortSegment { duration: f64 },
    #[error("corner plans do not match the block list")]
    CornerMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    BlendIn,
    Main,
    BlendOut,
}

/// Rectangular velocity command shared by all axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse<T> {
    /// Axis velocities (mm/s).
    pub velocity: Vec3<T>,
    pub duration: T,
    pub block: usize,
    pub kind: PulseKind,
}

/// Unfiltered command signal for the whole program.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseTrain<T> {
    origin: Vec3<T>,
    pulses: Vec<Pulse<T>>,
    junction_times: Vec<T>,
}

impl<T: Scalar> PulseTrain<T> {
    pub fn new(origin: Vec3<T>, pulses: Vec<Pulse<T>>, junction_times: Vec<T>) -> Self {
        Self {
            origin,
            pulses,
            junction_times,
        }
    }

    /// Start point of the program.
    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    pub fn pulses(&self) -> &[Pulse<T>] {
        &self.pulses
    }

    /// Times at which the command passes from block `j` to block `j + 1`.
    pub fn junction_times(&self) -> &[T] {
        &self.junction_times
    }

    pub fn duration(&self) -> T {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// `(amplitude, duration)` pairs of one axis.
    pub fn axis(&self, axis: usize) -> Vec<(T, T)> {
        self.pulses
            .iter()
            .map(|p| (p.velocity[axis], p.duration))
            .collect()
    }

    /// The axis command as a piecewise-constant signal starting at `t = 0`.
    pub fn axis_signal(&self, axis: usize) -> PiecewisePolynomial<T> {
        PiecewisePolynomial::from_pulses(T::zero(), self.axis(axis), T::zero())
    }

    /// Signed pulse area per axis.
    pub fn displacement(&self) -> Vec3<T> {
        let mut d = Vec3::zero();
        for p in &self.pulses {
            d += p.velocity.scale(p.duration);
        }
        d
    }

    /// Peak tangential command speed.
    pub fn max_speed(&self) -> T {
        self.pulses
            .iter()
            .map(|p| p.velocity.norm())
            .fold(T::zero(), T::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockPlan<T> {
    pub index: usize,
    pub length: T,
    /// Feed after override (mm/s).
    pub feed: T,
    /// Main pulse duration `T_v` (s).
    pub pulse_duration: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanReport<T> {
    pub chain: FilterChain<T>,
    pub blocks: Vec<BlockPlan<T>>,
    pub corners: Vec<CornerPlan<T>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> PlanReport<T> {
    /// Unfiltered command duration `sum T_v + sum 2 T_b`.
    pub fn command_duration(&self) -> T {
        let main: T = self.blocks.iter().map(|b| b.pulse_duration).sum();
        let blend: T = self.corners.iter().map(|c| c.blend_duration).sum();
        main + blend * T::lit(2.0)
    }

    pub fn min_corner_feed(&self) -> Option<T> {
        self.corners
            .iter()
            .map(|c| c.blend_feed)
            .reduce(T::min)
    }
}

/// Blocks with the feed override applied.
pub fn apply_override<T: Scalar>(blocks: &[CLBlock<T>], feed_override: T) -> Vec<CLBlock<T>> {
    blocks
        .iter()
        .map(|b| CLBlock {
            feed: b.feed * feed_override,
            ..*b
        })
        .collect()
}

/// Filter chain for a program: one time constant sized from the largest
/// feed (after override, rapids included) and the jerk limit.
pub fn program_chain<T: Scalar>(
    blocks: &[CLBlock<T>],
    config: &ProgramConfig<T>,
) -> Result<FilterChain<T>, PlanError> {
    let max_feed = blocks
        .iter()
        .map(|b| b.feed * config.feed_override)
        .fold(T::zero(), T::max);
    Ok(FilterChain::from_jerk(config.filter_count, max_feed, config.j_max)?)
}

/// One plan per interior junction. Feeds are taken from the blocks as
/// given; the corner uses the smaller of the two adjoining feeds.
pub fn plan_corners<T: Scalar>(
    blocks: &[CLBlock<T>],
    config: &ProgramConfig<T>,
    chain: &FilterChain<T>,
) -> Result<Vec<CornerPlan<T>>, PlanError> {
    blocks
        .windows(2)
        .enumerate()
        .map(|(j, w)| {
            let feed = w[0].feed.min(w[1].feed);
            let theta = corner_angle(w[0].direction, w[1].direction);
            let alpha = max_alpha(
                feed,
                chain.time_constant(),
                theta,
                config.tolerance,
                chain.count(),
            )?;
            Ok(corner_with_alpha(j, theta, feed, alpha, chain))
        })
        .collect()
}

/// Main pulse duration `T_v = L/F - a_prev T_b,prev - a_next T_b,next`.
/// Missing sides pass zeros.
pub fn adjusted_pulse_duration<T: Scalar>(
    length: T,
    feed: T,
    alpha_prev: T,
    blend_prev: T,
    alpha_next: T,
    blend_next: T,
) -> Result<T, PlanError> {
    crate::kinematics::require_positive("block length", length)?;
    crate::kinematics::require_positive("feed", feed)?;
    let tv = length / feed - alpha_prev * blend_prev - alpha_next * blend_next;
    if tv < T::zero() {
        Err(PlanError::ShortSegment {
            duration: tv.as_f64(),
        })
    } else {
        Ok(tv)
    }
}

/// Builds the pulse train.
///
/// A block whose length could not absorb the largest possible blend loads
/// of its two junctions is short. Its time `L/F` is shared between the
/// junctions in proportion to those largest loads, and each junction's
/// alpha is lowered to the largest value not above the planned one whose
/// load fits its share. The shares do not depend on the tolerance, so a
/// looser tolerance never yields a smaller alpha. Each lowered corner is
/// reported.
pub fn plan_pulse_train<T: Scalar>(
    blocks: &[CLBlock<T>],
    corners: &[CornerPlan<T>],
    chain: &FilterChain<T>,
) -> Result<(PulseTrain<T>, PlanReport<T>), PlanError> {
    if blocks.is_empty() || corners.len() + 1 != blocks.len() {
        return Err(PlanError::CornerMismatch);
    }
    let mut corners = corners.to_vec();
    let mut warnings = Vec::new();

    for j in 0..corners.len() {
        let c = corners[j];
        let mut low = T::one();
        let mut high = T::zero();
        for k in [j, j + 1] {
            if let Some(q) = load_share(blocks, &corners, k, j, chain) {
                // alpha (1 - alpha) <= q  <=>  alpha <= r1 or alpha >= 1 - r1
                let r1 = q * T::lit(2.0) / (T::one() + (T::one() - q * T::lit(4.0)).max(T::zero()).sqrt());
                low = low.min(r1);
                high = high.max(T::one() - r1);
            }
        }
        if c.alpha > low && c.alpha < high {
            corners[j] = corner_with_alpha(c.junction, c.theta, c.feed, low, chain);
            warnings.push(format!(
                "junction {} (line {}): adjoining segment shorter than its blend windows, alpha lowered from {} to {}",
                j,
                blocks[j + 1].line,
                c.alpha,
                low
            ));
        }
    }

    let mut durations = Vec::with_capacity(blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        let (ap, tp) = side(&corners, k.checked_sub(1), b.feed);
        let (an, tn) = side(&corners, Some(k), b.feed);
        let tv = match adjusted_pulse_duration(b.length, b.feed, ap, tp, an, tn) {
            Ok(tv) => tv,
            // rounding at the exact share boundary
            Err(PlanError::ShortSegment { duration })
                if -duration <= (T::epsilon() * T::lit(64.0) * b.length / b.feed).as_f64() =>
            {
                T::zero()
            }
            Err(e) => return Err(e),
        };
        durations.push(tv);
    }

    let mut pulses = Vec::new();
    let mut junction_times = Vec::with_capacity(corners.len());
    let mut t = T::zero();
    for (k, b) in blocks.iter().enumerate() {
        let mut push = |feed: T, duration: T, kind, t: &mut T| {
            if duration > T::zero() {
                pulses.push(Pulse {
                    velocity: b.direction.scale(feed),
                    duration,
                    block: k,
                    kind,
                });
                *t += duration;
            }
        };
        if k > 0 {
            let c = &corners[k - 1];
            push(c.blend_feed, c.blend_duration, PulseKind::BlendIn, &mut t);
        }
        push(b.feed, durations[k], PulseKind::Main, &mut t);
        if k < corners.len() {
            let c = &corners[k];
            push(c.blend_feed, c.blend_duration, PulseKind::BlendOut, &mut t);
            junction_times.push(t);
        }
    }

    let report = PlanReport {
        chain: *chain,
        blocks: blocks
            .iter()
            .zip(&durations)
            .map(|(b, &tv)| BlockPlan {
                index: b.index,
                length: b.length,
                feed: b.feed,
                pulse_duration: tv,
            })
            .collect(),
        corners,
        warnings,
    };
    Ok((
        PulseTrain::new(blocks[0].start, pulses, junction_times),
        report,
    ))
}

/// Full planning pass for a parsed program.
pub fn plan_program<T: Scalar>(program: &Program<T>) -> Result<(PulseTrain<T>, PlanReport<T>), PlanError> {
    let config = program.config();
    config.validate()?;
    let chain = program_chain(program.blocks(), config)?;
    plan_program_with_chain(program, &chain)
}

/// Planning pass with a caller-chosen filter chain.
pub fn plan_program_with_chain<T: Scalar>(
    program: &Program<T>,
    chain: &FilterChain<T>,
) -> Result<(PulseTrain<T>, PlanReport<T>), PlanError> {
    let config = program.config();
    config.validate()?;
    let blocks = apply_override(program.blocks(), config.feed_override);
    let corners = plan_corners(&blocks, config, chain)?;
    plan_pulse_train(&blocks, &corners, chain)
}

/// Normalized load budget `q` for junction `j` on block `k`, or `None`
/// when the block can absorb any blend. The junction may use
/// `alpha (1 - alpha) <= q`.
fn load_share<T: Scalar>(
    blocks: &[CLBlock<T>],
    corners: &[CornerPlan<T>],
    k: usize,
    j: usize,
    chain: &FilterChain<T>,
) -> Option<T> {
    let block = &blocks[k];
    let half = chain.half_delay();
    // largest load alpha' T_b over alpha in [0, 1], reached at alpha = 1/2
    let worst = |c: &CornerPlan<T>| {
        let never = crate::blending::tcp_error(c.feed, chain.time_constant(), T::one(), c.theta, chain.count())
            <= T::zero();
        if never {
            T::zero()
        } else {
            c.feed / block.feed * half / T::lit(4.0)
        }
    };
    let adjoining = [k.checked_sub(1), (k < corners.len()).then_some(k)];
    let total: T = adjoining.iter().flatten().map(|&i| worst(&corners[i])).sum();
    let budget = block.length / block.feed;
    let mine = worst(&corners[j]);
    if total <= budget || mine <= T::zero() {
        return None;
    }
    let share = budget * mine / total;
    Some(share / (corners[j].feed / block.feed * half))
}

/// Blend weight seen by a block of feed `feed`: `F_c / F` keeps the pulse
/// area right when the two adjoining feeds differ.
fn side<T: Scalar>(corners: &[CornerPlan<T>], j: Option<usize>, feed: T) -> (T, T) {
    match j.and_then(|j| corners.get(j)) {
        Some(c) => (c.blend_feed / feed, c.blend_duration),
        None => (T::zero(), T::zero()),
    }
}
