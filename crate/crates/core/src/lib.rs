//! Virtual interpolator for linear-move part programs.
//!
//! A program is parsed into CL blocks, corners are blended within a
//! tolerance, the blocks become rectangular axis velocity pulses, and a
//! cascade of box (FIR) filters turns the pulses into jerk-limited motion.
//! The result gives the cycle time, tangential feed and corner errors the
//! controller would produce.
//!
//! All numerics are generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the type to `f64`.

pub mod blending;
pub mod corpus;
pub mod gcode;
pub mod kinematics;
pub mod pipeline;
pub mod planner;
pub mod report;
pub mod scalar;
pub mod trajectory;

pub use kinematics::FilterCount;

pub type Vec3 = scalar::Vec3<f64>;
pub type ProgramConfig = gcode::ProgramConfig<f64>;
pub type CLBlock = gcode::CLBlock<f64>;
pub type Program = gcode::Program<f64>;
pub type FilterChain = kinematics::FilterChain<f64>;
pub type PiecewisePolynomial = kinematics::PiecewisePolynomial<f64>;
pub type PiecewiseProfile = kinematics::PiecewiseProfile<f64>;
pub type CornerPlan = blending::CornerPlan<f64>;
pub type PulseTrain = planner::PulseTrain<f64>;
pub type PlanReport = planner::PlanReport<f64>;
pub type KinematicTrace = trajectory::KinematicTrace<f64>;
pub type FilteredMotion = trajectory::FilteredMotion<f64>;
pub type Simulation = pipeline::Simulation<f64>;
