//! Deterministic closed-loop contact simulation.
//!
//! A tool traverses a discretized path over a stiff surface modelled as a
//! piecewise-linear heightfield over path arc length, with one simulation
//! step per trajectory sample. The plant is a pure spring: normal force
//! is stiffness times penetration, zero when the tool lifts off. The
//! force-controlled run feeds the measured normal force to a fuzzy PI
//! controller whose displacement increments are applied along the inward
//! surface normal before the next step (an ideal inner position loop).

use thiserror::Error;

use crate::discretize::Trajectory;
use crate::fuzzy::{FuzzyPi, Wrench};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("surface needs at least one height knot")]
    EmptySurface,
    #[error("surface knots must be finite and sorted by arc length")]
    InvalidKnots,
    #[error("contact stiffness must be positive, got {0}")]
    InvalidStiffness(f64),
    #[error("force limit must be positive, got {0}")]
    InvalidForceLimit(f64),
}

/// Stiff-contact surface: a piecewise-linear height profile over path arc
/// length, a spring constant, and the force level that aborts a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    knots: Vec<(f64, f64)>,
    /// Contact stiffness in N/mm.
    pub stiffness: f64,
    /// Safety abort threshold in N.
    pub force_max: f64,
}

impl SurfaceModel {
    pub fn new(knots: Vec<(f64, f64)>, stiffness: f64, force_max: f64) -> Result<Self, SimError> {
        if knots.is_empty() {
            return Err(SimError::EmptySurface);
        }
        let finite = knots.iter().all(|(s, h)| s.is_finite() && h.is_finite());
        let sorted = knots.windows(2).all(|w| w[0].0 < w[1].0);
        if !finite || !sorted {
            return Err(SimError::InvalidKnots);
        }
        if !stiffness.is_finite() || stiffness <= 0.0 {
            return Err(SimError::InvalidStiffness(stiffness));
        }
        if !force_max.is_finite() || force_max <= 0.0 {
            return Err(SimError::InvalidForceLimit(force_max));
        }
        Ok(Self {
            knots,
            stiffness,
            force_max,
        })
    }

    /// A flat surface at height zero covering `0..=length`.
    pub fn flat(length: f64, stiffness: f64, force_max: f64) -> Self {
        Self::new(vec![(0.0, 0.0), (length, 0.0)], stiffness, force_max)
            .expect("flat surface is always valid")
    }

    /// The shipped benchmark profile: two ridges (one tall enough to trip
    /// the force limit on an unadjusted pass), a valley deep enough to
    /// break contact, and a near-vertical drop the controller has to
    /// chase. Heights in mm over arc length 0..=400 mm.
    pub fn benchmark_knots() -> Vec<(f64, f64)> {
        vec![
            (0.0, 0.0),
            (40.0, 0.0),
            (60.0, 1.5),
            (80.0, 1.5),
            (100.0, 0.0),
            (120.0, 0.0),
            (140.0, -2.0),
            (160.0, -2.0),
            (180.0, 0.0),
            (200.0, 0.0),
            (220.0, 3.5),
            (250.0, 3.5),
            (270.0, 0.0),
            (300.0, 0.0),
            (300.5, -1.8),
            (320.0, -1.8),
            (340.0, 0.0),
            (400.0, 0.0),
        ]
    }

    pub fn benchmark(stiffness: f64, force_max: f64) -> Self {
        Self::new(Self::benchmark_knots(), stiffness, force_max)
            .expect("benchmark surface is always valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Surface height at arc length `s`, clamping to the end knots
    /// outside the covered span.
    pub fn height(&self, s: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if s <= first.0 {
            return first.1;
        }
        if s >= last.0 {
            return last.1;
        }
        let idx = self.knots.partition_point(|&(knot_s, _)| knot_s <= s);
        let (s0, h0) = self.knots[idx - 1];
        let (s1, h1) = self.knots[idx];
        h0 + (h1 - h0) * (s - s0) / (s1 - s0)
    }

    /// Normal contact force at arc length `s` for a tool at height
    /// `z_tool`: stiffness times penetration, zero once contact is lost.
    pub fn contact_force(&self, s: f64, z_tool: f64) -> f64 {
        let penetration = self.height(s) - z_tool;
        self.stiffness * penetration.max(0.0)
    }
}

/// One recorded simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStep {
    /// Discrete time; equals the trajectory sample index.
    pub index: usize,
    /// Arc length along the path in mm.
    pub s: f64,
    /// Nominal (pre-adjustment) tool height in mm.
    pub z_cmd: f64,
    /// Height the tool actually occupied this step.
    pub z_actual: f64,
    /// Measured normal force in N.
    pub force: f64,
    /// Controller displacement increment this step, in mm along the
    /// inward surface normal (zero on unadjusted runs).
    pub du: f64,
    /// Whether the tool touched the surface.
    pub contact: bool,
    /// Whether this step fell inside an excessive-force abort span.
    pub aborted: bool,
}

/// Full record of a simulation run, one entry per trajectory sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub steps: Vec<SimStep>,
}

impl SimTrace {
    /// Number of times the run tripped the force limit and had to stop.
    pub fn abort_count(&self) -> usize {
        let mut count = 0;
        let mut previous = false;
        for step in &self.steps {
            if step.aborted && !previous {
                count += 1;
            }
            previous = step.aborted;
        }
        count
    }

    /// Number of steps with no tool-surface contact.
    pub fn contact_loss_steps(&self) -> usize {
        self.steps.iter().filter(|step| !step.contact).count()
    }

    pub fn peak_force(&self) -> f64 {
        self.steps.iter().map(|step| step.force).fold(0.0, f64::max)
    }
}

/// Tracks excessive-force abort spans: a run stops when the force reaches
/// the limit and resumes at the next step where it is safe again.
struct AbortTracker {
    limit: f64,
    aborted: bool,
}

impl AbortTracker {
    fn new(limit: f64) -> Self {
        Self {
            limit,
            aborted: false,
        }
    }

    fn observe(&mut self, force: f64) -> bool {
        if self.aborted {
            if force < self.limit {
                self.aborted = false;
            }
        } else if force >= self.limit {
            self.aborted = true;
        }
        self.aborted
    }
}

/// Executes the nominal path verbatim, recording the contact force at
/// every sample. Excessive force is recorded as an abort span, not a
/// failure; the trace always covers the whole path.
pub fn run_open_loop(path: &Trajectory, surface: &SurfaceModel) -> SimTrace {
    let arc = path.arc_lengths();
    let mut tracker = AbortTracker::new(surface.force_max);
    let steps = path
        .samples()
        .iter()
        .enumerate()
        .map(|(index, sample)| {
            let s = arc[index];
            let z = sample.position.z;
            let force = surface.contact_force(s, z);
            SimStep {
                index,
                s,
                z_cmd: z,
                z_actual: z,
                force,
                du: 0.0,
                contact: force > 0.0,
                aborted: tracker.observe(force),
            }
        })
        .collect();
    SimTrace { steps }
}

/// Executes the path with the external force loop closed around the
/// surface-normal axis.
///
/// Per step: the force at the current (adjusted) tool height is measured
/// and fed to the controller against `setpoint`; the returned increment
/// is applied along the inward normal before the tool advances, so
/// positive increments press deeper (lower z).
pub fn run_force_controlled(
    path: &Trajectory,
    surface: &SurfaceModel,
    mut controller: FuzzyPi,
    setpoint: f64,
) -> SimTrace {
    let arc = path.arc_lengths();
    let desired = Wrench::from_normal_force(setpoint);
    let mut tracker = AbortTracker::new(surface.force_max);
    let mut steps = Vec::with_capacity(path.len());

    for (index, sample) in path.samples().iter().enumerate() {
        let s = arc[index];
        let z_cmd = sample.position.z;
        let z_actual = z_cmd - controller.accumulated().linear.z;
        let force = surface.contact_force(s, z_actual);

        let output = controller.step(&desired, &Wrench::from_normal_force(force));
        let du = output.delta.linear.z;

        steps.push(SimStep {
            index,
            s,
            z_cmd,
            z_actual,
            force,
            du,
            contact: force > 0.0,
            aborted: tracker.observe(force),
        });
    }
    SimTrace { steps }
}
