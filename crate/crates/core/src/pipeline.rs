//! End-to-end run: program to plan, pulse train, cycle time and trace.

use thiserror::Error;

use crate::gcode::{ConfigError, ParseError, Program, ProgramConfig};
use crate::planner::{plan_program, PlanError, PlanReport, PulseTrain};
use crate::scalar::Scalar;
use crate::trajectory::{cycle_time, filter_pulse_train, KinematicTrace, TrajectoryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

impl SimulationError {
    /// True for errors caused by settings rather than program text.
    pub fn is_config(&self) -> bool {
        match self {
            SimulationError::Parse(_) => false,
            SimulationError::Config(_) => true,
            SimulationError::Plan(PlanError::ShortSegment { .. } | PlanError::CornerMismatch) => false,
            SimulationError::Plan(_) => true,
            SimulationError::Trajectory(TrajectoryError::Resolution { .. }) => true,
            SimulationError::Trajectory(_) => false,
        }
    }
}

/// Planned program with its exact cycle time.
#[derive(Clone, Debug)]
pub struct Simulation<T> {
    pub program: Program<T>,
    pub train: PulseTrain<T>,
    pub plan: PlanReport<T>,
    pub cycle_time: T,
}

impl<T: Scalar> Simulation<T> {
    /// Sampled kinematics at the configured sample time.
    pub fn trace(&self) -> Result<KinematicTrace<T>, TrajectoryError> {
        filter_pulse_train(&self.train, &self.plan.chain, self.program.config().sample_time)
    }
}

pub fn simulate<T: Scalar>(program: Program<T>) -> Result<Simulation<T>, SimulationError> {
    program.config().validate()?;
    let (train, plan) = plan_program(&program)?;
    let cycle_time = cycle_time(&plan, &plan.chain);
    Ok(Simulation {
        program,
        train,
        plan,
        cycle_time,
    })
}

/// Parses and simulates in one step.
pub fn simulate_text<T: Scalar>(text: &str, config: ProgramConfig<T>) -> Result<Simulation<T>, SimulationError> {
    config.validate()?;
    simulate(crate::gcode::parse_program(text, config)?)
}
