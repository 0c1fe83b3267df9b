//! Synthetic test toolpaths written as part-program text. All paths start
//! at the origin.

use std::f64::consts::TAU;
use std::fmt::Write as _;

fn header(name: &str, feed_mm_min: f64) -> String {
    format!("({name})\nG01 F{feed_mm_min}\n")
}

fn point(out: &mut String, x: f64, y: f64) {
    let _ = writeln!(out, "G01 X{x:.6} Y{y:.6}");
}

/// Closed square of the given side, counter-clockwise from the origin.
pub fn square(side: f64, feed_mm_min: f64) -> String {
    let mut s = header("square", feed_mm_min);
    for (x, y) in [(side, 0.0), (side, side), (0.0, side), (0.0, 0.0)] {
        point(&mut s, x, y);
    }
    s
}

/// Contour-parallel pocket: nested squares stepping inward by `stepover`.
pub fn square_pocket(side: f64, stepover: f64, feed_mm_min: f64) -> String {
    let mut s = header("square pocket", feed_mm_min);
    let mut offset = 0.0;
    while side - 2.0 * offset > stepover * 0.5 {
        let (lo, hi) = (offset, side - offset);
        if offset > 0.0 {
            point(&mut s, lo, lo);
        }
        for (x, y) in [(hi, lo), (hi, hi), (lo, hi), (lo, lo)] {
            point(&mut s, x, y);
        }
        offset += stepover;
    }
    s
}

/// Raster passes along X, stepping over along Y.
pub fn zigzag(width: f64, height: f64, stepover: f64, feed_mm_min: f64) -> String {
    let mut s = header("zigzag", feed_mm_min);
    let mut y = 0.0;
    let mut forward = true;
    loop {
        point(&mut s, if forward { width } else { 0.0 }, y);
        if y + stepover > height + 1e-9 {
            break;
        }
        y += stepover;
        point(&mut s, if forward { width } else { 0.0 }, y);
        forward = !forward;
    }
    s
}

/// Polyline approximation of a trochoid advancing along X by `pitch` per
/// loop of radius `radius`.
pub fn trochoid(length: f64, radius: f64, pitch: f64, points_per_loop: usize, feed_mm_min: f64) -> String {
    let mut s = header("trochoid", feed_mm_min);
    let loops = (length / pitch).ceil().max(1.0);
    let n = (loops as usize) * points_per_loop.max(3);
    for i in 1..=n {
        let t = TAU * i as f64 / points_per_loop.max(3) as f64;
        let x = pitch * t / TAU + radius * t.sin();
        let y = radius * (1.0 - t.cos());
        point(&mut s, x, y);
    }
    s
}

/// Straight line split into `pieces` collinear blocks along X.
pub fn straight(length: f64, pieces: usize, feed_mm_min: f64) -> String {
    let mut s = header("straight", feed_mm_min);
    let pieces = pieces.max(1);
    for i in 1..=pieces {
        point(&mut s, length * i as f64 / pieces as f64, 0.0);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcode::{parse_program, ProgramConfig};

    fn parse(text: &str) -> crate::gcode::Program<f64> {
        parse_program(text, ProgramConfig::default()).unwrap()
    }

    #[test]
    fn generated_programs_parse() {
        let sq = parse(&square(30.0, 2000.0));
        assert_eq!(sq.blocks().len(), 4);
        assert_eq!(sq.end(), sq.start());
        let pocket = parse(&square_pocket(40.0, 5.0, 2000.0));
        assert!(pocket.blocks().len() > 8);
        let z = parse(&zigzag(40.0, 20.0, 5.0, 2000.0));
        assert_eq!(z.blocks().len(), 9);
        let t = parse(&trochoid(20.0, 4.0, 2.0, 24, 3000.0));
        assert_eq!(t.blocks().len(), 240);
        let s = parse(&straight(90.0, 3, 3000.0));
        assert!((s.path_length() - 90.0).abs() < 1e-9);
    }
}
