//! File formats and configuration: JSON path specs and run configs, CSV
//! trajectory and trace emission, and the calibrated-frame file.
//!
//! All JSON documents carry a `format_version` field. Files are written
//! atomically (write to a temporary file, then rename), and CSV floats
//! use the shortest round-trip representation so re-reading and
//! re-emitting a file reproduces it byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::{
    attach_orientations, circular_discretize, linear_discretize, nagata_discretize,
    DiscretizeError, Trajectory,
};
use crate::fuzzy::{Gains, SelectionMatrix, AXES};
use crate::geometry::{frame_from_three_points, FrameTransform, Pose, UnitQuaternion, Vec3};
use crate::sim::SimTrace;

pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming a default run config for `simulate`.
pub const CONFIG_ENV_VAR: &str = "PATHFORGE_CONFIG";

/// Shipped controller and plant defaults. The gains were tuned against
/// the benchmark surface; with the default stiffness the in-band loop
/// gain `output * integral * stiffness` is exactly 1, which settles a
/// small depth error in a single step without overshoot.
pub const DEFAULT_PROPORTIONAL_GAIN: f64 = 0.02;
pub const DEFAULT_INTEGRAL_GAIN: f64 = 0.04;
pub const DEFAULT_OUTPUT_GAIN: f64 = 0.5;
pub const DEFAULT_FORCE_SETPOINT: f64 = 40.0;
pub const DEFAULT_FORCE_MAX: f64 = 200.0;
pub const DEFAULT_STIFFNESS: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SpecError {
    /// Malformed document; carries serde's line/column diagnostics.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    /// Well-formed document with invalid content.
    #[error("invalid specification: {0}")]
    Validation(String),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn validation(msg: impl Into<String>) -> SpecError {
    SpecError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Linear,
    Circular,
    Nagata,
}

impl PathKind {
    /// Waypoints each kind requires; the curvilinear kind includes the
    /// center of curvature as its first waypoint.
    pub fn waypoint_count(self) -> usize {
        match self {
            PathKind::Linear => 2,
            PathKind::Circular => 3,
            PathKind::Nagata => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PointDoc {
    x: f64,
    y: f64,
    z: f64,
}

impl PointDoc {
    fn to_vec3(self, what: &str) -> Result<Vec3, SpecError> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(validation(format!("{what} has non-finite components")));
        }
        Ok(Vec3::new(self.x, self.y, self.z))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct QuaternionDoc {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl QuaternionDoc {
    fn to_quaternion(self, what: &str) -> Result<UnitQuaternion, SpecError> {
        let norm_sq = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z;
        if !norm_sq.is_finite() || norm_sq < 1e-12 {
            return Err(validation(format!("{what} must be finite and non-zero")));
        }
        Ok(UnitQuaternion::new(self.w, self.x, self.y, self.z))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FramePointsDoc {
    a: PointDoc,
    b: PointDoc,
    c: PointDoc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSpecDoc {
    format_version: u32,
    kind: PathKind,
    waypoints: Vec<PointDoc>,
    orientation_start: QuaternionDoc,
    orientation_end: QuaternionDoc,
    step_length: f64,
    #[serde(default)]
    frame: Option<FramePointsDoc>,
}

/// A validated nominal path: kind, waypoints, endpoint orientations and
/// the discretization step.
///
/// When the document carries a calibration frame (three taught points),
/// the waypoints are converted into that frame's coordinates during
/// parsing; the points themselves are kept for reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub kind: PathKind,
    pub waypoints: Vec<Vec3>,
    pub orientation_start: UnitQuaternion,
    pub orientation_end: UnitQuaternion,
    pub step_length: f64,
    pub frame: Option<[Vec3; 3]>,
}

impl PathSpec {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let doc: PathSpecDoc = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(validation(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        if doc.waypoints.len() != doc.kind.waypoint_count() {
            return Err(validation(format!(
                "{:?} paths need {} waypoints, got {}",
                doc.kind,
                doc.kind.waypoint_count(),
                doc.waypoints.len()
            )));
        }
        if !doc.step_length.is_finite() || doc.step_length <= 0.0 {
            return Err(validation("step_length must be positive"));
        }

        let mut waypoints = doc
            .waypoints
            .iter()
            .enumerate()
            .map(|(i, p)| p.to_vec3(&format!("waypoint {i}")))
            .collect::<Result<Vec<_>, _>>()?;

        let frame = match &doc.frame {
            None => None,
            Some(points) => {
                let a = points.a.to_vec3("frame point a")?;
                let b = points.b.to_vec3("frame point b")?;
                let c = points.c.to_vec3("frame point c")?;
                let transform = frame_from_three_points(a, b, c)
                    .map_err(|e| validation(format!("frame: {e}")))?;
                // Express the waypoints in the calibrated frame.
                let to_frame = transform.inverse();
                for point in &mut waypoints {
                    *point = to_frame.transform_point(*point);
                }
                Some([a, b, c])
            }
        };

        Ok(Self {
            kind: doc.kind,
            waypoints,
            orientation_start: doc.orientation_start.to_quaternion("orientation_start")?,
            orientation_end: doc.orientation_end.to_quaternion("orientation_end")?,
            step_length: doc.step_length,
            frame,
        })
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Discretizes the path and pairs each position with a
    /// Slerp-interpolated orientation.
    pub fn discretize(&self) -> Result<Trajectory, SpecError> {
        let w = &self.waypoints;
        let positions = match self.kind {
            PathKind::Linear => linear_discretize(w[0], w[1], self.step_length)?,
            PathKind::Circular => circular_discretize(w[0], w[1], w[2], self.step_length)?,
            PathKind::Nagata => nagata_discretize(w[0], w[1], w[2], w[3], self.step_length)?,
        };
        let trajectory =
            attach_orientations(&positions, self.orientation_start, self.orientation_end)?
                .with_step_length(self.step_length)?;
        Ok(trajectory)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RuleTableChoice {
    #[default]
    Verbatim,
    Symmetrized,
}

impl RuleTableChoice {
    pub fn build(self) -> crate::fuzzy::RuleBase {
        match self {
            RuleTableChoice::Verbatim => crate::fuzzy::RuleBase::verbatim(),
            RuleTableChoice::Symmetrized => crate::fuzzy::RuleBase::symmetrized(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigDoc {
    format_version: u32,
    k_p: f64,
    k_i: f64,
    k_x: f64,
    force_setpoint: f64,
    force_max: f64,
    stiffness: f64,
    selection: Vec<u8>,
    #[serde(default)]
    surface: Option<String>,
    #[serde(default)]
    rule_table: RuleTableChoice,
}

/// Controller gains, plant constants and axis selection for a simulation
/// run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gains: Gains,
    pub force_setpoint: f64,
    pub force_max: f64,
    pub stiffness: f64,
    pub selection: SelectionMatrix,
    /// Surface fixture path; `None` selects the built-in benchmark
    /// profile. Relative paths are resolved against the config file's
    /// directory by [`RunConfig::load`].
    pub surface: Option<PathBuf>,
    pub rule_table: RuleTableChoice,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gains: Gains::new(
                DEFAULT_PROPORTIONAL_GAIN,
                DEFAULT_INTEGRAL_GAIN,
                DEFAULT_OUTPUT_GAIN,
            ),
            force_setpoint: DEFAULT_FORCE_SETPOINT,
            force_max: DEFAULT_FORCE_MAX,
            stiffness: DEFAULT_STIFFNESS,
            selection: SelectionMatrix::normal_z(),
            surface: None,
            rule_table: RuleTableChoice::Verbatim,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let doc: RunConfigDoc = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(validation(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        for (name, value) in [("k_p", doc.k_p), ("k_i", doc.k_i), ("k_x", doc.k_x)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(validation(format!("{name} must be positive")));
            }
        }
        if !doc.force_setpoint.is_finite() || doc.force_setpoint <= 0.0 {
            return Err(validation("force_setpoint must be positive"));
        }
        if !doc.force_max.is_finite() || doc.force_max <= doc.force_setpoint {
            return Err(validation("force_max must exceed force_setpoint"));
        }
        if !doc.stiffness.is_finite() || doc.stiffness <= 0.0 {
            return Err(validation("stiffness must be positive"));
        }
        if doc.selection.len() != AXES {
            return Err(validation(format!("selection must list {AXES} axes")));
        }
        let mut diagonal = [false; AXES];
        for (i, &v) in doc.selection.iter().enumerate() {
            diagonal[i] = match v {
                0 => false,
                1 => true,
                other => {
                    return Err(validation(format!(
                        "selection entries must be 0 or 1, got {other}"
                    )))
                }
            };
        }

        Ok(Self {
            gains: Gains::new(doc.k_p, doc.k_i, doc.k_x),
            force_setpoint: doc.force_setpoint,
            force_max: doc.force_max,
            stiffness: doc.stiffness,
            selection: SelectionMatrix::new(diagonal),
            surface: doc.surface.map(PathBuf::from),
            rule_table: doc.rule_table,
        })
    }

    /// Loads a config file, resolving a relative surface path against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = fs::read_to_string(path)?;
        let mut config = Self::from_json(&text)?;
        if let Some(surface) = &config.surface {
            if surface.is_relative() {
                if let Some(dir) = path.parent() {
                    config.surface = Some(dir.join(surface));
                }
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceDoc {
    format_version: u32,
    /// `[arc length, height]` pairs in mm, sorted by arc length.
    knots: Vec<[f64; 2]>,
}

/// Reads a surface fixture: a piecewise-linear height profile.
pub fn surface_knots_from_json(text: &str) -> Result<Vec<(f64, f64)>, SpecError> {
    let doc: SurfaceDoc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(validation(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    Ok(doc.knots.iter().map(|k| (k[0], k[1])).collect())
}

pub fn load_surface_knots(path: &Path) -> Result<Vec<(f64, f64)>, SpecError> {
    surface_knots_from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    format_version: u32,
    origin: [f64; 3],
    x_axis: [f64; 3],
    y_axis: [f64; 3],
    z_axis: [f64; 3],
}

/// Serializes a calibrated frame.
pub fn frame_to_json(frame: &FrameTransform) -> String {
    let as_array = |v: Vec3| [v.x, v.y, v.z];
    let doc = FrameDoc {
        format_version: FORMAT_VERSION,
        origin: as_array(frame.translation()),
        x_axis: as_array(frame.x_axis()),
        y_axis: as_array(frame.y_axis()),
        z_axis: as_array(frame.z_axis()),
    };
    serde_json::to_string_pretty(&doc).expect("frame serialization cannot fail")
}

/// Reads a calibrated frame back, re-validating orthonormality.
pub fn frame_from_json(text: &str) -> Result<FrameTransform, SpecError> {
    let doc: FrameDoc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(validation(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let vec = |a: [f64; 3]| Vec3::new(a[0], a[1], a[2]);
    FrameTransform::from_axes(
        vec(doc.x_axis),
        vec(doc.y_axis),
        vec(doc.z_axis),
        vec(doc.origin),
    )
    .map_err(|e| validation(format!("frame: {e}")))
}

const TRAJECTORY_HEADER: &str = "index,x,y,z,qw,qx,qy,qz";

/// Renders a trajectory as CSV: one pose per row, positions in mm,
/// quaternion scalar-first.
pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let mut out = String::with_capacity(trajectory.len() * 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (index, pose) in trajectory.samples().iter().enumerate() {
        let p = pose.position;
        let [w, x, y, z] = pose.orientation.components();
        out.push_str(&format!(
            "{index},{},{},{},{w},{x},{y},{z}\n",
            p.x, p.y, p.z
        ));
    }
    out
}

/// Parses a trajectory CSV produced by [`trajectory_to_csv`].
pub fn trajectory_from_csv(text: &str) -> Result<Trajectory, SpecError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRAJECTORY_HEADER => {}
        _ => return Err(validation(format!("expected header '{TRAJECTORY_HEADER}'"))),
    }
    let mut samples = Vec::new();
    for (line_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(validation(format!(
                "row {}: expected 8 fields, got {}",
                line_no + 2,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64, SpecError> {
            s.parse::<f64>()
                .map_err(|_| validation(format!("row {}: bad {what} '{s}'", line_no + 2)))
        };
        let x = parse(fields[1], "x")?;
        let y = parse(fields[2], "y")?;
        let z = parse(fields[3], "z")?;
        let qw = parse(fields[4], "qw")?;
        let qx = parse(fields[5], "qx")?;
        let qy = parse(fields[6], "qy")?;
        let qz = parse(fields[7], "qz")?;
        let norm_sq = qw * qw + qx * qx + qy * qy + qz * qz;
        if !norm_sq.is_finite() || norm_sq < 1e-12 {
            return Err(validation(format!(
                "row {}: quaternion must be finite and non-zero",
                line_no + 2
            )));
        }
        samples.push(Pose::new(
            Vec3::new(x, y, z),
            UnitQuaternion::new(qw, qx, qy, qz),
        ));
    }
    let max_spacing = samples
        .windows(2)
        .map(|pair| pair[0].position.distance_to(pair[1].position))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    Trajectory::new(samples, max_spacing).map_err(SpecError::Discretize)
}

const TRACE_HEADER: &str = "step,s,z_cmd,z_actual,force,du,contact";

/// Renders a simulation trace as CSV, one row per step.
pub fn trace_to_csv(trace: &SimTrace) -> String {
    let mut out = String::with_capacity(trace.steps.len() * 64);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for step in &trace.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            step.index,
            step.s,
            step.z_cmd,
            step.z_actual,
            step.force,
            step.du,
            u8::from(step.contact),
        ));
    }
    out
}

/// Writes a file atomically: the content lands under a temporary name in
/// the target directory and is renamed into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), SpecError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut file = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    use std::io::Write;
    file.write_all(contents.as_bytes())?;
    file.persist(path).map_err(|e| SpecError::Io(e.error))?;
    Ok(())
}
