//! Serializable summaries, CSV exports and tolerance studies.

use std::io;

use serde::Serialize;
use thiserror::Error;

use crate::blending::max_alpha;
use crate::gcode::Program;
use crate::kinematics::{time_constant_from_jerk, FilterCount, KinematicsError};
use crate::pipeline::{simulate, Simulation, SimulationError};
use crate::scalar::Scalar;
use crate::trajectory::KinematicTrace;

const PER_MIN: f64 = 60.0;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("invalid grid: {0}")]
    Grid(&'static str),
}

/// Top-level result of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub cycle_time_s: f64,
    pub n_blocks: usize,
    pub n_junctions: usize,
    /// Slowest planned corner feed; the slowest block feed when the
    /// program has no junctions.
    pub min_corner_feed_mm_min: f64,
    pub tolerance_mm: f64,
    pub filters: usize,
    #[serde(rename = "T1_s")]
    pub t1_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRow {
    pub k: usize,
    #[serde(rename = "L_mm")]
    pub l_mm: f64,
    #[serde(rename = "F_mm_min")]
    pub f_mm_min: f64,
    #[serde(rename = "Tv_s")]
    pub tv_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JunctionRow {
    pub k: usize,
    pub theta_deg: f64,
    pub alpha: f64,
    #[serde(rename = "Fc_mm_min")]
    pub fc_mm_min: f64,
    #[serde(rename = "Tb_s")]
    pub tb_s: f64,
    pub eps_pred_um: f64,
}

/// Per-block and per-junction plan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanDocument {
    pub blocks: Vec<BlockRow>,
    pub junctions: Vec<JunctionRow>,
    pub warnings: Vec<String>,
}

pub fn run_summary<T: Scalar>(sim: &Simulation<T>) -> RunSummary {
    let plan = &sim.plan;
    let min_feed = plan.min_corner_feed().unwrap_or_else(|| {
        plan.blocks
            .iter()
            .map(|b| b.feed)
            .fold(T::infinity(), T::min)
    });
    RunSummary {
        cycle_time_s: sim.cycle_time.as_f64(),
        n_blocks: plan.blocks.len(),
        n_junctions: plan.corners.len(),
        min_corner_feed_mm_min: min_feed.as_f64() * PER_MIN,
        tolerance_mm: sim.program.config().tolerance.as_f64(),
        filters: plan.chain.count().get(),
        t1_s: plan.chain.time_constant().as_f64(),
        warnings: plan.warnings.clone(),
    }
}

pub fn plan_document<T: Scalar>(sim: &Simulation<T>) -> PlanDocument {
    let plan = &sim.plan;
    PlanDocument {
        blocks: plan
            .blocks
            .iter()
            .map(|b| BlockRow {
                k: b.index,
                l_mm: b.length.as_f64(),
                f_mm_min: b.feed.as_f64() * PER_MIN,
                tv_s: b.pulse_duration.as_f64(),
            })
            .collect(),
        junctions: plan
            .corners
            .iter()
            .map(|c| JunctionRow {
                k: c.junction,
                theta_deg: c.theta.as_f64().to_degrees(),
                alpha: c.alpha.as_f64(),
                fc_mm_min: c.blend_feed.as_f64() * PER_MIN,
                tb_s: c.blend_duration.as_f64(),
                eps_pred_um: c.predicted_error.as_f64() * 1000.0,
            })
            .collect(),
        warnings: plan.warnings.clone(),
    }
}

pub const TRACE_HEADER: [&str; 14] = [
    "t_s", "px_mm", "py_mm", "pz_mm", "vx", "vy", "vz", "ax", "ay", "az", "jx", "jy", "jz",
    "v_tan_mm_min",
];

/// Writes one CSV row per sample, header first.
pub fn write_trace_csv<T: Scalar, W: io::Write>(trace: &KinematicTrace<T>, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let mut row: Vec<String> = Vec::with_capacity(TRACE_HEADER.len());
    for i in 0..trace.len() {
        row.clear();
        row.push(trace.time[i].as_f64().to_string());
        for series in [&trace.position, &trace.velocity, &trace.acceleration, &trace.jerk] {
            for axis in series {
                row.push(axis[i].as_f64().to_string());
            }
        }
        row.push((trace.v_tan[i].as_f64() * PER_MIN).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a cornering-feed limit curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub filters: usize,
    pub tol_mm: f64,
    pub theta_deg: f64,
    pub alpha: f64,
    #[serde(rename = "V_c_mm_min")]
    pub v_c_mm_min: f64,
}

/// Largest cornering feed per angle, tolerance and filter count. The time
/// constant is sized from `feed` and `j_max`.
pub fn limit_curves(
    feed_mm_min: f64,
    j_max: f64,
    tolerances: &[f64],
    theta_deg: &[f64],
    counts: &[FilterCount],
) -> Result<Vec<LimitRow>, ReportError> {
    if tolerances.is_empty() || theta_deg.is_empty() || counts.is_empty() {
        return Err(ReportError::Grid("empty tolerance, angle or filter list"));
    }
    if theta_deg.iter().any(|t| !(0.0..=180.0).contains(t)) {
        return Err(ReportError::Grid("angles must lie in [0, 180] degrees"));
    }
    let feed = feed_mm_min / PER_MIN;
    let t1 = time_constant_from_jerk(feed, j_max)?;
    let mut rows = Vec::with_capacity(tolerances.len() * theta_deg.len() * counts.len());
    for &count in counts {
        for &tol in tolerances {
            for &deg in theta_deg {
                let alpha = max_alpha(feed, t1, deg.to_radians(), tol, count)
                    .map_err(|_| ReportError::Grid("tolerance must be non-negative"))?;
                rows.push(LimitRow {
                    filters: count.get(),
                    tol_mm: tol,
                    theta_deg: deg,
                    alpha,
                    v_c_mm_min: alpha * feed_mm_min,
                });
            }
        }
    }
    Ok(rows)
}

/// Points where the three-filter curve lies below the two-filter one, as
/// `(tol_mm, theta_deg, V_c two filters, V_c three filters)`.
pub fn limit_curve_violations(rows: &[LimitRow]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for r2 in rows.iter().filter(|r| r.filters == 2) {
        if let Some(r3) = rows
            .iter()
            .find(|r| r.filters == 3 && r.tol_mm == r2.tol_mm && r.theta_deg == r2.theta_deg)
        {
            if r3.v_c_mm_min < r2.v_c_mm_min {
                out.push((r2.tol_mm, r2.theta_deg, r2.v_c_mm_min, r3.v_c_mm_min));
            }
        }
    }
    out
}

pub fn write_limit_csv<W: io::Write>(rows: &[LimitRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Cycle time of one program under several tolerances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub tol_mm: f64,
    pub cycle_time_s: f64,
    pub min_corner_feed_mm_min: f64,
    pub warnings: usize,
}

pub fn compare_tolerances<T: Scalar>(program: &Program<T>, tolerances: &[T]) -> Result<Vec<CompareRow>, ReportError> {
    if tolerances.is_empty() {
        return Err(ReportError::Grid("empty tolerance list"));
    }
    tolerances
        .iter()
        .map(|&tol| {
            let mut p = program.clone();
            p.config_mut().tolerance = tol;
            let sim = simulate(p)?;
            let s = run_summary(&sim);
            Ok(CompareRow {
                tol_mm: tol.as_f64(),
                cycle_time_s: s.cycle_time_s,
                min_corner_feed_mm_min: s.min_corner_feed_mm_min,
                warnings: s.warnings.len(),
            })
        })
        .collect()
}

/// Evenly spaced grid including both ends.
pub fn linspace(from: f64, to: f64, step: f64) -> Result<Vec<f64>, ReportError> {
    if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
        return Err(ReportError::Grid("step must be positive and range ordered"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + step * i as f64).collect())
}
