//! Filtering of pulse trains into axis kinematics, plus measurements on the
//! resulting traces.
//!
//! Each axis command is convolved with the box cascade exactly, in
//! piecewise-polynomial form. Sampling happens afterwards, so positions,
//! accelerations and jerks at the samples carry no discretization error.

use thiserror::Error;

use crate::kinematics::{FilterChain, KinematicsError, PiecewisePolynomial, Primitive};
use crate::planner::{PlanReport, PulseTrain};
use crate::scalar::{Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("sample time {ts} s exceeds a tenth of the time constant ({limit} s)")]
    Resolution { ts: f64, limit: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("no samples in the window [{from}, {to}] s")]
    EmptyWindow { from: f64, to: f64 },
    #[error("query {query} outside the trace [0, {end}]")]
    OutOfRange { query: f64, end: f64 },
}

/// Exact filtered motion of all three axes.
#[derive(Clone, Debug)]
pub struct FilteredMotion<T> {
    origin: Vec3<T>,
    duration: T,
    velocity: [PiecewisePolynomial<T>; 3],
    acceleration: [PiecewisePolynomial<T>; 3],
    jerk: [PiecewisePolynomial<T>; 3],
    position: [Primitive<T>; 3],
}

impl<T: Scalar> FilteredMotion<T> {
    pub fn new(train: &PulseTrain<T>, chain: &FilterChain<T>) -> Self {
        let velocity = [0, 1, 2].map(|i| {
            train
                .axis_signal(i)
                .box_filter_cascade(chain.time_constant(), chain.count().get())
        });
        let acceleration = velocity.clone().map(|v| v.derivative());
        let jerk = acceleration.clone().map(|a| a.derivative());
        let position = velocity.clone().map(|v| v.primitive());
        Self {
            origin: train.origin(),
            duration: train.duration() + chain.total_delay(),
            velocity,
            acceleration,
            jerk,
            position,
        }
    }

    /// Command duration plus the filter delay.
    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn axis_velocity(&self, axis: usize) -> &PiecewisePolynomial<T> {
        &self.velocity[axis]
    }

    pub fn position(&self, t: T) -> Vec3<T> {
        self.origin + Vec3(self.position.each_ref().map(|p| p.eval(t)))
    }

    pub fn velocity(&self, t: T) -> Vec3<T> {
        Vec3(self.velocity.each_ref().map(|v| v.eval(t)))
    }

    pub fn acceleration(&self, t: T) -> Vec3<T> {
        Vec3(self.acceleration.each_ref().map(|v| v.eval(t)))
    }

    pub fn jerk(&self, t: T) -> Vec3<T> {
        Vec3(self.jerk.each_ref().map(|v| v.eval(t)))
    }

    /// Largest per-axis jerk magnitude over the whole motion.
    pub fn peak_jerk(&self) -> T {
        self.jerk
            .iter()
            .map(PiecewisePolynomial::max_abs)
            .fold(T::zero(), T::max)
    }

    /// Samples every `ts` from 0 until the motion has settled.
    pub fn sample(&self, ts: T) -> KinematicTrace<T> {
        let n = (self.duration / ts).ceil().to_usize().unwrap_or(0);
        let mut trace = KinematicTrace::with_capacity(ts, n + 1);
        for i in 0..=n {
            let t = ts * T::count(i);
            let p = self.position(t);
            let v = self.velocity(t);
            let a = self.acceleration(t);
            let j = self.jerk(t);
            trace.time.push(t);
            for k in 0..3 {
                trace.position[k].push(p[k]);
                trace.velocity[k].push(v[k]);
                trace.acceleration[k].push(a[k]);
                trace.jerk[k].push(j[k]);
            }
            trace.v_tan.push(v.norm());
        }
        trace
    }
}

/// Uniformly sampled axis kinematics.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicTrace<T> {
    pub sample_time: T,
    pub time: Vec<T>,
    pub position: [Vec<T>; 3],
    pub velocity: [Vec<T>; 3],
    pub acceleration: [Vec<T>; 3],
    pub jerk: [Vec<T>; 3],
    /// Tangential feed (mm/s).
    pub v_tan: Vec<T>,
}

impl<T: Scalar> KinematicTrace<T> {
    fn with_capacity(sample_time: T, n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            sample_time,
            time: v(),
            position: [v(), v(), v()],
            velocity: [v(), v(), v()],
            acceleration: [v(), v(), v()],
            jerk: [v(), v(), v()],
            v_tan: v(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Time of the last sample.
    pub fn duration(&self) -> T {
        self.time.last().copied().unwrap_or_else(T::zero)
    }

    pub fn point(&self, i: usize) -> Vec3<T> {
        Vec3(self.position.each_ref().map(|p| p[i]))
    }

    pub fn velocity_at(&self, i: usize) -> Vec3<T> {
        Vec3(self.velocity.each_ref().map(|v| v[i]))
    }

    /// Cumulative path length along the sampled polyline.
    pub fn arc_length(&self) -> Vec<T> {
        let mut s = Vec::with_capacity(self.len());
        let mut acc = T::zero();
        for i in 0..self.len() {
            if i > 0 {
                acc += self.point(i).distance(self.point(i - 1));
            }
            s.push(acc);
        }
        s
    }
}

/// Filters a pulse train and samples the result every `ts`.
pub fn filter_pulse_train<T: Scalar>(
    train: &PulseTrain<T>,
    chain: &FilterChain<T>,
    ts: T,
) -> Result<KinematicTrace<T>, TrajectoryError> {
    crate::kinematics::require_positive("sample time", ts)?;
    let limit = chain.time_constant() / T::lit(10.0);
    if ts > limit {
        return Err(TrajectoryError::Resolution {
            ts: ts.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok(FilteredMotion::new(train, chain).sample(ts))
}

/// Replaces the positions by the cumulative trapezoidal integral of the
/// sampled velocities, starting at `start`.
pub fn integrate_positions<T: Scalar>(mut trace: KinematicTrace<T>, start: Vec3<T>) -> KinematicTrace<T> {
    let half = T::lit(0.5);
    for k in 0..3 {
        let v = &trace.velocity[k];
        let mut p = Vec::with_capacity(v.len());
        let mut acc = start[k];
        for i in 0..v.len() {
            if i > 0 {
                acc += (v[i] + v[i - 1]) * half * (trace.time[i] - trace.time[i - 1]);
            }
            p.push(acc);
        }
        trace.position[k] = p;
    }
    trace
}

/// `sum T_v + sum 2 T_b + T_d`.
pub fn cycle_time<T: Scalar>(plan: &PlanReport<T>, chain: &FilterChain<T>) -> T {
    plan.command_duration() + chain.total_delay()
}

/// Times at which the filtered path passes each junction most closely:
/// the command junction time plus half the filter delay.
pub fn crossing_times<T: Scalar>(train: &PulseTrain<T>, chain: &FilterChain<T>) -> Vec<T> {
    train
        .junction_times()
        .iter()
        .map(|&t| t + chain.half_delay())
        .collect()
}

/// Smallest distance from `junction` to the sampled path between the
/// samples at `window.0` and `window.1` (inclusive), with the samples
/// joined by straight lines.
pub fn measure_contour_error<T: Scalar>(
    trace: &KinematicTrace<T>,
    junction: Vec3<T>,
    window: (T, T),
) -> Result<T, TrajectoryError> {
    let (from, to) = window;
    let lo = trace.time.partition_point(|&t| t < from);
    let hi = trace.time.partition_point(|&t| t <= to);
    if lo >= hi {
        return Err(TrajectoryError::EmptyWindow {
            from: from.as_f64(),
            to: to.as_f64(),
        });
    }
    let mut best = trace.point(lo).distance(junction);
    for i in lo + 1..hi {
        best = best.min(segment_distance(trace.point(i - 1), trace.point(i), junction));
    }
    Ok(best)
}

/// Where to read the tangential feed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureQuery<T> {
    /// Seconds from the start.
    Time(T),
    /// Millimetres travelled along the path.
    ArcLength(T),
}

/// Tangential feed at a time or path position, linearly interpolated.
pub fn feature_velocity<T: Scalar>(
    trace: &KinematicTrace<T>,
    query: FeatureQuery<T>,
) -> Result<T, TrajectoryError> {
    let (axis, x) = match query {
        FeatureQuery::Time(t) => (trace.time.clone(), t),
        FeatureQuery::ArcLength(s) => (trace.arc_length(), s),
    };
    let end = axis.last().copied().unwrap_or_else(T::zero);
    if axis.is_empty() || !(x >= T::zero() && x <= end) {
        return Err(TrajectoryError::OutOfRange {
            query: x.as_f64(),
            end: end.as_f64(),
        });
    }
    let i = axis.partition_point(|&a| a <= x);
    if i >= axis.len() {
        return Ok(trace.v_tan[axis.len() - 1]);
    }
    let i = i.max(1);
    let (a0, a1) = (axis[i - 1], axis[i]);
    let (v0, v1) = (trace.v_tan[i - 1], trace.v_tan[i]);
    if a1 <= a0 {
        return Ok(v0);
    }
    Ok(v0 + (v1 - v0) * (x - a0) / (a1 - a0))
}

/// Index of the smallest tangential feed with time in `[from, to]`.
pub fn min_feed_index<T: Scalar>(trace: &KinematicTrace<T>, window: (T, T)) -> Option<usize> {
    let lo = trace.time.partition_point(|&t| t < window.0);
    let hi = trace.time.partition_point(|&t| t <= window.1);
    (lo..hi).min_by(|&a, &b| {
        trace.v_tan[a]
            .partial_cmp(&trace.v_tan[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn segment_distance<T: Scalar>(a: Vec3<T>, b: Vec3<T>, p: Vec3<T>) -> T {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= T::zero() {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a + ab.scale(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blending::{corner_with_alpha, tcp_error};
    use crate::gcode::{parse_program, ProgramConfig};
    use crate::kinematics::{analytic_profile_matching, FilterCount};
    use crate::planner::{plan_program, plan_pulse_train, Pulse, PulseKind};

    fn single_train(feed: f64, tv: f64) -> PulseTrain<f64> {
        PulseTrain::new(
            Vec3::zero(),
            vec![Pulse {
                velocity: Vec3::new(feed, 0.0, 0.0),
                duration: tv,
                block: 0,
                kind: PulseKind::Main,
            }],
            vec![],
        )
    }

    #[test]
    fn single_pulse_matches_closed_form() {
        let chain = FilterChain::new(FilterCount::Two, 0.1).unwrap();
        let trace = filter_pulse_train(&single_train(50.0, 1.2), &chain, 0.001).unwrap();
        let p = analytic_profile_matching(50.0, 1.2, &chain).unwrap();
        for i in 0..trace.len() {
            let s = p.evaluate(trace.time[i]);
            assert!((trace.velocity[0][i] - s.velocity).abs() < 1e-9);
            assert!((trace.position[0][i] - s.position).abs() < 1e-9);
        }
        assert!((trace.duration() - 1.4).abs() <= 0.001);
        assert!((trace.position[0][trace.len() - 1] - 60.0).abs() < 1e-9);
    }

    #[test]
    fn zero_train_gives_zero_trace() {
        let chain = FilterChain::new(FilterCount::Three, 0.05).unwrap();
        let trace = filter_pulse_train(&single_train(0.0, 0.5), &chain, 0.001).unwrap();
        assert!(trace.v_tan.iter().all(|&v| v == 0.0));
        assert!(trace.position[0].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn resolution_guard() {
        let chain = FilterChain::new(FilterCount::Three, 0.05).unwrap();
        assert!(matches!(
            filter_pulse_train(&single_train(1.0, 0.5), &chain, 0.01),
            Err(TrajectoryError::Resolution { .. })
        ));
        assert!(filter_pulse_train(&single_train(1.0, 0.5), &chain, 0.0).is_err());
    }

    #[test]
    fn trapezoid_positions() {
        let chain = FilterChain::new(FilterCount::Three, 0.1).unwrap();
        let exact = filter_pulse_train(&single_train(50.0, 1.2), &chain, 0.001).unwrap();
        let start = Vec3::new(1.0, 2.0, 3.0);
        let trap = integrate_positions(exact.clone(), start);
        let end = trap.point(trap.len() - 1);
        assert!(end.max_abs_diff(Vec3::new(61.0, 2.0, 3.0)) < 1e-6 * 60.0);
        assert_eq!(trap.point(0), start);
    }

    #[test]
    fn square_returns_to_start() {
        let text = "G01 X30 F3000\nG01 Y30\nG01 X0\nG01 Y0";
        let p = parse_program(text, ProgramConfig::<f64>::default()).unwrap();
        let (train, rep) = plan_program(&p).unwrap();
        let trace = filter_pulse_train(&train, &rep.chain, 0.001).unwrap();
        let trap = integrate_positions(trace.clone(), p.start());
        let last = trace.len() - 1;
        assert!(trace.point(last).max_abs_diff(p.start()) < 1e-6 * 120.0);
        assert!(trap.point(last).max_abs_diff(p.start()) < 1e-6 * 120.0);
        let ct = cycle_time(&rep, &rep.chain);
        assert!((trace.duration() - ct).abs() <= 0.001);
    }

    #[test]
    fn collinear_blocks_match_one_block() {
        let cfg = ProgramConfig::<f64>::default();
        let a = parse_program("G01 X20 F3000\nG01 X60", cfg).unwrap();
        let b = parse_program("G01 X60 F3000", cfg).unwrap();
        let (_, ra) = plan_program(&a).unwrap();
        let (_, rb) = plan_program(&b).unwrap();
        assert!((cycle_time(&ra, &ra.chain) - cycle_time(&rb, &rb.chain)).abs() < 1e-12);
        assert!((cycle_time(&rb, &rb.chain) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn corner_distance_matches_prediction() {
        let p = parse_program("G01 X40 F3000\nG01 Y40", ProgramConfig::<f64>::default()).unwrap();
        let chain = FilterChain::new(FilterCount::Two, 0.1).unwrap();
        let theta = std::f64::consts::FRAC_PI_2;
        let corners = [corner_with_alpha(0, theta, 50.0, 0.5, &chain)];
        let (train, _) = plan_pulse_train(p.blocks(), &corners, &chain).unwrap();
        let trace = filter_pulse_train(&train, &chain, 0.001).unwrap();
        let tc = crossing_times(&train, &chain)[0];
        let eps = measure_contour_error(&trace, Vec3::new(40.0, 0.0, 0.0), (tc - 0.2, tc + 0.2)).unwrap();
        let predicted = tcp_error(50.0, 0.1, 0.5, theta, FilterCount::Two);
        assert!((eps - predicted).abs() / predicted < 0.02, "{eps} vs {predicted}");
    }

    #[test]
    fn full_stop_passes_through_corner() {
        let p = parse_program("G01 X40 F3000\nG01 Y40", ProgramConfig::<f64>::default()).unwrap();
        let chain = FilterChain::new(FilterCount::Three, 0.1).unwrap();
        let corners = [corner_with_alpha(0, std::f64::consts::FRAC_PI_2, 50.0, 0.0, &chain)];
        let (train, _) = plan_pulse_train(p.blocks(), &corners, &chain).unwrap();
        let motion = FilteredMotion::new(&train, &chain);
        let tc = crossing_times(&train, &chain)[0];
        assert!(motion.position(tc).distance(Vec3::new(40.0, 0.0, 0.0)) < 1e-6);
        assert!(motion.velocity(tc).norm() < 1e-9);
    }

    #[test]
    fn feature_queries() {
        let chain = FilterChain::new(FilterCount::Three, 0.1).unwrap();
        let trace = filter_pulse_train(&single_train(50.0, 1.2), &chain, 0.001).unwrap();
        assert_eq!(feature_velocity(&trace, FeatureQuery::Time(0.0)).unwrap(), 0.0);
        let mid = feature_velocity(&trace, FeatureQuery::Time(0.75)).unwrap();
        assert!((mid - 50.0).abs() < 1e-9);
        let by_arc = feature_velocity(&trace, FeatureQuery::ArcLength(30.0)).unwrap();
        assert!((by_arc - 50.0).abs() < 1e-9);
        assert!(feature_velocity(&trace, FeatureQuery::Time(10.0)).is_err());
        assert!(feature_velocity(&trace, FeatureQuery::ArcLength(-1.0)).is_err());
    }

    #[test]
    fn linearity_over_disjoint_trains() {
        let chain = FilterChain::new(FilterCount::Two, 0.05).unwrap();
        let pulse = |v: Vec3<f64>, d| Pulse { velocity: v, duration: d, block: 0, kind: PulseKind::Main };
        let gap = |d| pulse(Vec3::zero(), d);
        let a = vec![pulse(Vec3::new(10.0, 5.0, 0.0), 0.4), gap(1.0)];
        let b = vec![gap(0.8), pulse(Vec3::new(-3.0, 7.0, 1.0), 0.6)];
        let sum = vec![pulse(Vec3::new(10.0, 5.0, 0.0), 0.4), gap(0.4), pulse(Vec3::new(-3.0, 7.0, 1.0), 0.6)];
        let ta = filter_pulse_train(&PulseTrain::new(Vec3::zero(), a, vec![]), &chain, 0.001).unwrap();
        let tb = filter_pulse_train(&PulseTrain::new(Vec3::zero(), b, vec![]), &chain, 0.001).unwrap();
        let ts = filter_pulse_train(&PulseTrain::new(Vec3::zero(), sum, vec![]), &chain, 0.001).unwrap();
        for i in 0..ts.len() {
            for k in 0..3 {
                let v = ta.velocity[k][i] + tb.velocity[k][i];
                assert!((ts.velocity[k][i] - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn window_errors() {
        let chain = FilterChain::new(FilterCount::Two, 0.05).unwrap();
        let trace = filter_pulse_train(&single_train(1.0, 0.2), &chain, 0.001).unwrap();
        assert!(matches!(
            measure_contour_error(&trace, Vec3::zero(), (5.0, 6.0)),
            Err(TrajectoryError::EmptyWindow { .. })
        ));
        assert!(min_feed_index(&trace, (5.0, 6.0)).is_none());
    }
}
