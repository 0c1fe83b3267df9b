#![allow(dead_code)]

use feedsim::gcode::parse_program;
use feedsim::{corpus, Program, ProgramConfig};

/// Samples a rectangular pulse of height `feed` on `[0, tv)` on a grid of
/// step `dt`, `len` samples long. Samples that fall on a jump take the
/// mean of both sides, so the trapezoid rule integrates the step exactly.
pub fn sampled_pulse(feed: f64, tv: f64, dt: f64, len: usize) -> Vec<f64> {
    let end = (tv / dt).round() as usize;
    (0..len)
        .map(|i| match i {
            0 => 0.5 * feed,
            i if i < end => feed,
            i if i == end => 0.5 * feed,
            _ => 0.0,
        })
        .collect()
}

/// Moving average over `width` seconds by the trapezoid rule, as a running
/// sum. Samples before the start count as zero.
pub fn moving_average(x: &[f64], width: f64, dt: f64) -> Vec<f64> {
    let m = (width / dt).round() as usize;
    let at = |i: isize| if i < 0 { 0.0 } else { x[i as usize] };
    let mut y = Vec::with_capacity(x.len());
    // sum of x[i-m+1 ..= i-1], the interior of the window
    let mut interior = 0.0;
    for i in 0..x.len() as isize {
        if i >= 1 {
            interior += at(i - 1);
            interior -= at(i - m as isize);
        }
        let s = 0.5 * (at(i) + at(i - m as isize)) + interior;
        y.push(s * dt / width);
    }
    y
}

/// `count` passes of [`moving_average`].
pub fn cascade(x: &[f64], width: f64, count: usize, dt: f64) -> Vec<f64> {
    (0..count).fold(x.to_vec(), |acc, _| moving_average(&acc, width, dt))
}

/// Named synthetic programs used across the suites.
pub fn corpus_programs(config: ProgramConfig) -> Vec<(&'static str, Program)> {
    let texts = [
        ("square", corpus::square(40.0, 2000.0)),
        ("square pocket", corpus::square_pocket(40.0, 5.0, 2000.0)),
        ("zigzag", corpus::zigzag(40.0, 20.0, 5.0, 2400.0)),
        ("trochoid", corpus::trochoid(20.0, 4.0, 2.0, 24, 3000.0)),
        ("straight", corpus::straight(90.0, 3, 3000.0)),
        (
            "mixed 3d",
            "G00 X5 Y5 Z2\nG01 Z0 F600\nG01 X30 Y12 F1800\nG01 X30 Y30 Z-1\nG01 X10 Y25 F2400\nG00 Z5\n"
                .to_string(),
        ),
    ];
    texts
        .into_iter()
        .map(|(name, text)| (name, parse_program(&text, config).expect("corpus parses")))
        .collect()
}

/// Long segments whose per-axis feed steps all keep one sign, so no two
/// opposite steps share a jerk window.
pub fn long_segment_programs(config: ProgramConfig) -> Vec<(&'static str, Program)> {
    let texts = [
        ("square", corpus::square(60.0, 3000.0)),
        ("straight", corpus::straight(90.0, 3, 3000.0)),
    ];
    texts
        .into_iter()
        .map(|(name, text)| (name, parse_program(&text, config).expect("program parses")))
        .collect()
}

pub fn octagon(side: f64, feed: f64) -> String {
    let mut s = format!("G01 F{feed}\n");
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for k in 0..8 {
        let a = std::f64::consts::FRAC_PI_4 * k as f64;
        x += side * a.cos();
        y += side * a.sin();
        s.push_str(&format!("G01 X{x:.9} Y{y:.9}\n"));
    }
    s
}

#[test]
fn oracle_integrates_a_step_exactly() {
    let dt = 1e-3;
    let x = sampled_pulse(2.0, 0.5, dt, 1000);
    let y = moving_average(&x, 0.1, dt);
    // ramp from 0 to 2 over [0, 0.1], flat, ramp down over [0.5, 0.6]
    assert!((y[50] - 1.0).abs() < 1e-12);
    assert!((y[300] - 2.0).abs() < 1e-12);
    assert!((y[550] - 1.0).abs() < 1e-12);
    assert!(y[700].abs() < 1e-12);
}
