//! Path discretization: densely sampled trajectories from sparse nominal
//! waypoints.
//!
//! Linear and circular discretization are exact (every sample lies on the
//! analytic line or circle). Curved segments use a quadratic patch built
//! from endpoint positions and outward normals, which trades a small,
//! bounded radial error for a closed-form evaluation. Orientations are
//! interpolated with Slerp so the angular increment between consecutive
//! samples is constant.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::geometry::{frame_from_three_points, GeometryError, Pose, UnitQuaternion, Vec3};

/// Relative slack applied when a path length divides the step size almost
/// exactly, so floating-point noise does not create a spurious final step.
const STEP_COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DiscretizeError {
    /// Step length (or step count) must be strictly positive.
    #[error("step length must be positive, got {0}")]
    InvalidStep(f64),
    /// The segment endpoints coincide.
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    /// Three points that must define a circle are collinear or not distinct.
    #[error("points are collinear or coincident; no unique circle")]
    CollinearPoints,
    /// The endpoint normals of a curved section are opposed (or undefined),
    /// so the section spans 180 degrees or more.
    #[error("section normals are opposed or undefined")]
    DegenerateNormals,
    /// Curve parameter outside [0, 1].
    #[error("curve parameter {0} outside [0, 1]")]
    OutOfRange(f64),
    /// The two quaternions are antipodal; the interpolation path is undefined.
    #[error("orientations are antipodal; interpolation path undefined")]
    AntipodalOrientation,
    /// An orientation sequence needs at least one interpolation segment.
    #[error("interpolation segment count must be at least 1")]
    InvalidSegmentCount,
}

/// An ordered sequence of pose samples produced by discretization.
///
/// The first and last samples always equal the nominal start and end
/// poses exactly; `step_length` records the increment the samples were
/// generated with. For exact line and arc sampling, consecutive spacing
/// never exceeds it beyond rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Pose>,
    step_length: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<Pose>, step_length: f64) -> Result<Self, DiscretizeError> {
        if samples.len() < 2 {
            return Err(DiscretizeError::InvalidSegmentCount);
        }
        if !step_length.is_finite() || step_length <= 0.0 {
            return Err(DiscretizeError::InvalidStep(step_length));
        }
        Ok(Self {
            samples,
            step_length,
        })
    }

    pub fn samples(&self) -> &[Pose] {
        &self.samples
    }

    pub fn step_length(&self) -> f64 {
        self.step_length
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Replaces the recorded step length (metadata only).
    pub fn with_step_length(mut self, step_length: f64) -> Result<Self, DiscretizeError> {
        if !step_length.is_finite() || step_length <= 0.0 {
            return Err(DiscretizeError::InvalidStep(step_length));
        }
        self.step_length = step_length;
        Ok(self)
    }

    /// Cumulative arc length at each sample, starting at 0.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut lengths = Vec::with_capacity(self.samples.len());
        let mut total = 0.0;
        lengths.push(0.0);
        for pair in self.samples.windows(2) {
            total += pair[0].position.distance_to(pair[1].position);
            lengths.push(total);
        }
        lengths
    }
}

/// Number of full steps that fit in `span` at increment `step`, with the
/// final (possibly shorter) step always reaching the end. At least 1.
fn segment_count(span: f64, step: f64) -> usize {
    let ratio = span / step;
    (ratio - STEP_COUNT_SLACK).ceil().max(1.0) as usize
}

/// Splits the segment from `p_a` to `p_b` into increments of length `k`.
///
/// Interior samples are spaced exactly `k` apart along the segment
/// direction; when the segment length is not a multiple of `k` the last
/// movement is shorter. The endpoints are emitted exactly.
pub fn linear_discretize(p_a: Vec3, p_b: Vec3, k: f64) -> Result<Vec<Vec3>, DiscretizeError> {
    if !k.is_finite() || k <= 0.0 {
        return Err(DiscretizeError::InvalidStep(k));
    }
    let span = p_b - p_a;
    let length = span.norm();
    if length <= 1e-9 {
        return Err(DiscretizeError::DegenerateSegment);
    }
    let direction = span / length;
    let steps = segment_count(length, k);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(p_a);
    for j in 1..steps {
        points.push(p_a + direction * (k * j as f64));
    }
    points.push(p_b);
    Ok(points)
}

/// A circle through three points: center, radius, and unit plane normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: Vec3,
    pub radius: f64,
    pub normal: Vec3,
}

/// Fits the unique circle through three pairwise-distinct, non-collinear
/// points: the center is equidistant from all three and coplanar with them.
pub fn fit_circle(p1: Vec3, p2: Vec3, p3: Vec3) -> Result<CircleFit, DiscretizeError> {
    let v1 = p2 - p1;
    let v2 = p3 - p1;
    if v1.norm() <= crate::geometry::DEGENERACY_EPS
        || v2.norm() <= crate::geometry::DEGENERACY_EPS
        || (p3 - p2).norm() <= crate::geometry::DEGENERACY_EPS
    {
        return Err(DiscretizeError::CollinearPoints);
    }
    let cross = v1.cross(v2);
    if cross.norm() <= crate::geometry::DEGENERACY_EPS {
        return Err(DiscretizeError::CollinearPoints);
    }

    // Center = p1 + s*v1 + t*v2 with equal distance to all three points.
    let a11 = v1.dot(v1);
    let a12 = v1.dot(v2);
    let a22 = v2.dot(v2);
    let b1 = a11 / 2.0;
    let b2 = a22 / 2.0;
    let det = a11 * a22 - a12 * a12;
    let s = (b1 * a22 - b2 * a12) / det;
    let t = (a11 * b2 - a12 * b1) / det;
    let center = p1 + v1 * s + v2 * t;
    let radius = center.distance_to(p1);
    let normal = cross.normalized().ok_or(DiscretizeError::CollinearPoints)?;
    Ok(CircleFit {
        center,
        radius,
        normal,
    })
}

/// Sweep direction of an arc in its local frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArcDirection {
    CounterClockwise,
    Clockwise,
}

/// Resolves the arc from `p1` to `p3` that passes through `p2`.
///
/// Works in the local frame with origin at the arc center, x toward `p1`,
/// and `p2` in the positive y half-plane. The intermediate point selects
/// between the two candidate arcs: it fixes both the swept angle (which
/// may be reflex) and the traversal direction.
fn resolve_arc(
    fit: &CircleFit,
    p1: Vec3,
    p2: Vec3,
    p3: Vec3,
) -> Result<(crate::geometry::FrameTransform, f64, ArcDirection), DiscretizeError> {
    let frame = frame_from_three_points(fit.center, p1, p2).map_err(|e| match e {
        GeometryError::DegenerateFrame => DiscretizeError::CollinearPoints,
        other => panic!("unexpected frame error: {other}"),
    })?;
    let inverse = frame.inverse();
    let local_p2 = inverse.transform_point(p2);
    let local_p3 = inverse.transform_point(p3);

    let angle_p2 = local_p2.y.atan2(local_p2.x);
    let mut angle_p3 = local_p3.y.atan2(local_p3.x);
    if angle_p3 <= 0.0 {
        angle_p3 += TAU;
    }
    if angle_p2 <= angle_p3 {
        Ok((frame, angle_p3, ArcDirection::CounterClockwise))
    } else {
        Ok((frame, TAU - angle_p3, ArcDirection::Clockwise))
    }
}

/// Discretizes the arc that runs from `p1` through `p2` to `p3` into
/// increments of arc length `arc_step`.
///
/// Interior samples subtend equal angles `arc_step / r` at the center;
/// the final increment is shorter when the swept angle is not an exact
/// multiple. The first and last samples equal `p1` and `p3` exactly, and
/// every sample lies on the fitted circle.
pub fn circular_discretize(
    p1: Vec3,
    p2: Vec3,
    p3: Vec3,
    arc_step: f64,
) -> Result<Vec<Vec3>, DiscretizeError> {
    if !arc_step.is_finite() || arc_step <= 0.0 {
        return Err(DiscretizeError::InvalidStep(arc_step));
    }
    let fit = fit_circle(p1, p2, p3)?;
    let (frame, sweep, direction) = resolve_arc(&fit, p1, p2, p3)?;

    let angle_step = arc_step / fit.radius;
    let steps = segment_count(sweep, angle_step);
    let sign = match direction {
        ArcDirection::CounterClockwise => 1.0,
        ArcDirection::Clockwise => -1.0,
    };

    let mut points = Vec::with_capacity(steps + 1);
    points.push(p1);
    for i in 1..steps {
        let angle = sign * angle_step * i as f64;
        let local = Vec3::new(fit.radius * angle.cos(), fit.radius * angle.sin(), 0.0);
        points.push(frame.transform_point(local));
    }
    points.push(p3);
    Ok(points)
}

/// A quadratic curve section built from endpoint positions and the unit
/// normals pointing outward from the section's center of curvature.
///
/// The quadratic coefficient solves the tangency conditions
/// `(d - c) . n1 = 0` and `(d + c) . n2 = 0`, which make the curve leave
/// the start perpendicular to `n1` and arrive at the end perpendicular
/// to `n2`. When the normals are parallel the section degenerates to the
/// straight chord (`c = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagataCurve {
    start: Vec3,
    end: Vec3,
    normal_start: Vec3,
    normal_end: Vec3,
    chord: Vec3,
    cos_angle: f64,
    curvature: Vec3,
}

impl NagataCurve {
    /// Builds a curve section from the center of curvature and the two
    /// section endpoints.
    ///
    /// The angle subtended at the center must be strictly below 180
    /// degrees; opposed normals leave the section shape undefined.
    /// Parallel normals (zero angle) yield the straight chord.
    pub fn prepare(center: Vec3, start: Vec3, end: Vec3) -> Result<Self, DiscretizeError> {
        let normal_start = (start - center)
            .normalized()
            .ok_or(DiscretizeError::DegenerateNormals)?;
        let normal_end = (end - center)
            .normalized()
            .ok_or(DiscretizeError::DegenerateNormals)?;
        let chord = end - start;
        let cos_angle = normal_start.dot(normal_end).clamp(-1.0, 1.0);

        if cos_angle <= -1.0 + 1e-9 {
            return Err(DiscretizeError::DegenerateNormals);
        }
        let curvature = if cos_angle >= 1.0 - 1e-12 {
            Vec3::ZERO
        } else {
            // 2x2 solve for c = s*n1 + t*n2 under the tangency conditions.
            let rhs1 = normal_start.dot(chord);
            let rhs2 = -normal_end.dot(chord);
            let inv_det = 1.0 / (1.0 - cos_angle * cos_angle);
            let s = (rhs1 - cos_angle * rhs2) * inv_det;
            let t = (rhs2 - cos_angle * rhs1) * inv_det;
            normal_start * s + normal_end * t
        };

        Ok(Self {
            start,
            end,
            normal_start,
            normal_end,
            chord,
            cos_angle,
            curvature,
        })
    }

    /// Evaluates the section at parameter `eta` in [0, 1]:
    /// `P(eta) = start + (d - c)*eta + c*eta^2`.
    pub fn eval(&self, eta: f64) -> Result<Vec3, DiscretizeError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(DiscretizeError::OutOfRange(eta));
        }
        Ok(self.start + (self.chord - self.curvature) * eta + self.curvature * (eta * eta))
    }

    pub fn start(&self) -> Vec3 {
        self.start
    }

    pub fn end(&self) -> Vec3 {
        self.end
    }

    pub fn normal_start(&self) -> Vec3 {
        self.normal_start
    }

    pub fn normal_end(&self) -> Vec3 {
        self.normal_end
    }

    pub fn chord(&self) -> Vec3 {
        self.chord
    }

    /// Cosine of the angle subtended at the center of curvature.
    pub fn cos_angle(&self) -> f64 {
        self.cos_angle
    }

    /// Quadratic coefficient controlling the bulge of the section.
    pub fn curvature(&self) -> Vec3 {
        self.curvature
    }

    /// Subtended angle in radians.
    pub fn angle(&self) -> f64 {
        self.cos_angle.acos()
    }
}

/// Samples one curve section so each increment covers roughly `arc_step`
/// of travel, approximating the section as a perfect arc of radius `r`
/// to size the parameter increment. The final increment is shorter when
/// the angle is not an exact multiple. Start and end are emitted exactly.
fn nagata_section(
    center: Vec3,
    start: Vec3,
    end: Vec3,
    arc_step: f64,
) -> Result<Vec<Vec3>, DiscretizeError> {
    let curve = NagataCurve::prepare(center, start, end)?;
    // The section endpoints sit at slightly different distances from the
    // center in general; use their mean as the arc radius.
    let radius = (start.distance_to(center) + end.distance_to(center)) / 2.0;
    let angle = curve.angle();
    let angle_step = arc_step / radius;

    let ratio = angle / angle_step;
    let steps = (ratio - STEP_COUNT_SLACK).ceil().max(1.0) as usize;

    let mut points = Vec::with_capacity(steps + 1);
    points.push(start);
    for i in 1..steps {
        let eta = i as f64 / ratio;
        points.push(curve.eval(eta)?);
    }
    points.push(end);
    Ok(points)
}

/// Discretizes a curved path with one concavity through `p1`, `p2`, `p3`
/// around the center of curvature `center`, in two sections (`p1` to `p2`,
/// then `p2` to `p3`) joined without duplicating `p2`.
pub fn nagata_discretize(
    center: Vec3,
    p1: Vec3,
    p2: Vec3,
    p3: Vec3,
    arc_step: f64,
) -> Result<Vec<Vec3>, DiscretizeError> {
    if !arc_step.is_finite() || arc_step <= 0.0 {
        return Err(DiscretizeError::InvalidStep(arc_step));
    }
    let mut points = nagata_section(center, p1, p2, arc_step)?;
    let second = nagata_section(center, p2, p3, arc_step)?;
    points.extend_from_slice(&second[1..]);
    Ok(points)
}

/// One row of the curve-section error table produced by
/// [`nagata_error_table`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagataErrorRow {
    /// 1-based section index.
    pub section: usize,
    /// Position along the section as a percentage of its parameter span.
    pub path_pct: f64,
    /// Signed radial deviation from the reference arc, as a percentage of
    /// its radius. Positive means outside the arc.
    pub radial_pct: f64,
    /// Distance to the arc point at the same path fraction, as a
    /// percentage of the radius.
    pub parametric_pct: f64,
}

/// Tabulates the deviation between quadratic curve sections and the unit
/// circular arc of `total_angle` radians they approximate, split into
/// `sections` equal sections sampled at `steps` increments each.
///
/// Two metrics are reported because "deviation from the arc" is ambiguous:
/// the signed radial offset, and the distance to the arc point at the
/// same path fraction.
pub fn nagata_error_table(
    total_angle: f64,
    sections: usize,
    steps: usize,
) -> Result<Vec<NagataErrorRow>, DiscretizeError> {
    if sections == 0 || steps == 0 {
        return Err(DiscretizeError::InvalidSegmentCount);
    }
    if !total_angle.is_finite() || total_angle <= 0.0 {
        return Err(DiscretizeError::OutOfRange(total_angle));
    }
    let mut rows = Vec::with_capacity(sections * (steps + 1));
    for section in 0..sections {
        let theta_start = total_angle * section as f64 / sections as f64;
        let theta_end = total_angle * (section + 1) as f64 / sections as f64;
        let point_at = |theta: f64| Vec3::new(theta.cos(), theta.sin(), 0.0);
        let curve = NagataCurve::prepare(Vec3::ZERO, point_at(theta_start), point_at(theta_end))?;
        for i in 0..=steps {
            let eta = i as f64 / steps as f64;
            let sample = curve.eval(eta)?;
            let reference = point_at(theta_start + eta * (theta_end - theta_start));
            rows.push(NagataErrorRow {
                section: section + 1,
                path_pct: 100.0 * eta,
                radial_pct: 100.0 * (sample.norm() - 1.0),
                parametric_pct: 100.0 * sample.distance_to(reference),
            });
        }
    }
    Ok(rows)
}

/// Interpolates `segments + 1` orientations from `q0` to `qn` along the
/// shortest great-circle path, at parameters `0, 1/n, ..., 1`.
///
/// The angular increment between consecutive outputs is constant. When
/// the quaternion dot product is negative, `qn` is negated first so the
/// short path is taken; exactly antipodal quaternions are rejected since
/// the path between them is undefined. Nearly identical orientations fall
/// back to normalized linear interpolation, where the sine ratios are
/// ill-conditioned.
pub fn slerp_sequence(
    q0: UnitQuaternion,
    qn: UnitQuaternion,
    segments: usize,
) -> Result<Vec<UnitQuaternion>, DiscretizeError> {
    if segments < 1 {
        return Err(DiscretizeError::InvalidSegmentCount);
    }
    let dot = q0.dot(&qn);
    if dot <= -1.0 + 1e-9 {
        return Err(DiscretizeError::AntipodalOrientation);
    }
    let target = if dot < 0.0 { qn.negated() } else { qn };
    let cos_theta = q0.dot(&target).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();

    let mut sequence = Vec::with_capacity(segments + 1);
    sequence.push(q0);
    for k in 1..segments {
        let t = k as f64 / segments as f64;
        let (w0, w1) = if theta < 1e-6 {
            (1.0 - t, t)
        } else {
            let sin_theta = theta.sin();
            (
                ((1.0 - t) * theta).sin() / sin_theta,
                (t * theta).sin() / sin_theta,
            )
        };
        let [a_w, a_x, a_y, a_z] = q0.components();
        let [b_w, b_x, b_y, b_z] = target.components();
        sequence.push(UnitQuaternion::new(
            w0 * a_w + w1 * b_w,
            w0 * a_x + w1 * b_x,
            w0 * a_y + w1 * b_y,
            w0 * a_z + w1 * b_z,
        ));
    }
    sequence.push(target);
    Ok(sequence)
}

/// Pairs every position with a Slerp-interpolated orientation, so the
/// orientation varies proportionally to progress along the sample list.
///
/// The trajectory records the largest consecutive sample spacing as its
/// step length.
pub fn attach_orientations(
    positions: &[Vec3],
    q_start: UnitQuaternion,
    q_end: UnitQuaternion,
) -> Result<Trajectory, DiscretizeError> {
    if positions.len() < 2 {
        return Err(DiscretizeError::InvalidSegmentCount);
    }
    let orientations = slerp_sequence(q_start, q_end, positions.len() - 1)?;
    let samples: Vec<Pose> = positions
        .iter()
        .zip(orientations)
        .map(|(&position, orientation)| Pose::new(position, orientation))
        .collect();
    let max_spacing = samples
        .windows(2)
        .map(|pair| pair[0].position.distance_to(pair[1].position))
        .fold(0.0_f64, f64::max);
    Trajectory::new(samples, max_spacing.max(f64::MIN_POSITIVE))
}
