//! Mamdani fuzzy PI force controller.
//!
//! Force/torque error and its change are scaled into a normalized
//! universe, fuzzified over seven triangular labels, pushed through a
//! PI-style rule table with min/max composition, and collapsed back to a
//! crisp displacement by centre-of-area over singleton outputs. A
//! diagonal selection matrix decides which task axes receive force
//! corrections; the rest stay motion-controlled.

use thiserror::Error;

use crate::geometry::Vec3;

/// Number of independent task axes (three forces, three torques).
pub const AXES: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FuzzyError {
    /// No rule fired; the crisp output is undefined.
    #[error("no rule activation; defuzzification undefined")]
    NoActivation,
}

/// The seven linguistic labels of the normalized universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Nl,
    Nm,
    Ns,
    Zr,
    Ps,
    Pm,
    Pl,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::Nl,
        Label::Nm,
        Label::Ns,
        Label::Zr,
        Label::Ps,
        Label::Pm,
        Label::Pl,
    ];

    pub fn index(self) -> usize {
        match self {
            Label::Nl => 0,
            Label::Nm => 1,
            Label::Ns => 2,
            Label::Zr => 3,
            Label::Ps => 4,
            Label::Pm => 5,
            Label::Pl => 6,
        }
    }

    /// Label with the opposite sign (Nl <-> Pl, Zr fixed).
    pub fn negated(self) -> Label {
        Label::ALL[6 - self.index()]
    }
}

/// Peak positions of the seven labels on the normalized universe [-1, 1].
pub const PEAKS: [f64; 7] = [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Singleton output centers; same positions as the input peaks.
pub const OUTPUT_CENTERS: [f64; 7] = PEAKS;

/// Seven triangular membership functions over [-1, 1], one per label.
///
/// The default layout puts each peak at `PEAKS[i]` with feet on the
/// neighbouring peaks, so the grades form a partition of unity and at
/// most two labels are active at any input.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipSet {
    triangles: [(f64, f64, f64); 7],
}

impl Default for MembershipSet {
    fn default() -> Self {
        Self::standard()
    }
}

impl MembershipSet {
    pub fn standard() -> Self {
        let mut triangles = [(0.0, 0.0, 0.0); 7];
        for (i, tri) in triangles.iter_mut().enumerate() {
            let left = if i == 0 {
                PEAKS[0] - 1.0 / 3.0
            } else {
                PEAKS[i - 1]
            };
            let right = if i == 6 {
                PEAKS[6] + 1.0 / 3.0
            } else {
                PEAKS[i + 1]
            };
            *tri = (left, PEAKS[i], right);
        }
        Self { triangles }
    }

    /// Grade of every label at `value`, after clamping to [-1, 1].
    pub fn grades(&self, value: f64) -> [f64; 7] {
        let v = value.clamp(-1.0, 1.0);
        let mut grades = [0.0; 7];
        for (i, &(left, peak, right)) in self.triangles.iter().enumerate() {
            grades[i] = if v < left || v > right {
                0.0
            } else if v <= peak {
                (v - left) / (peak - left)
            } else {
                (right - v) / (right - peak)
            };
        }
        grades
    }

    /// Labels with non-zero grade at `value`; at most two for the
    /// standard layout. Out-of-range input saturates at the end labels.
    pub fn fuzzify(&self, value: f64) -> Vec<(Label, f64)> {
        self.grades(value)
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0.0)
            .map(|(i, &g)| (Label::ALL[i], g))
            .collect()
    }
}

/// 7x7 PI-style rule table mapping (error change row, error column) to an
/// output label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleBase {
    /// `table[de.index()][e.index()]`.
    table: [[Label; 7]; 7],
}

impl RuleBase {
    /// The shipped rule table, rows ordered Nl..Pl by error change and
    /// columns Nl..Pl by error. The Zr error column is all Zr, so a zero
    /// error never produces a correction regardless of its trend.
    pub fn verbatim() -> Self {
        use Label::*;
        Self {
            table: [
                // e:  NL  NM  NS  ZR  PS  PM  PL
                [Nl, Nl, Nm, Zr, Ps, Pm, Pl], // de = NL
                [Nl, Nl, Nm, Zr, Pm, Pl, Pl], // de = NM
                [Nl, Nl, Ns, Zr, Ps, Pl, Pl], // de = NS
                [Nl, Nm, Ns, Zr, Ps, Pm, Pl], // de = ZR
                [Nl, Nl, Ns, Zr, Ps, Pl, Pl], // de = PS
                [Nl, Nl, Nm, Zr, Pm, Pl, Pl], // de = PM
                [Nl, Nm, Ns, Zr, Pm, Pl, Pl], // de = PL
            ],
        }
    }

    /// Table derived from the non-negative error-change rows of
    /// [`RuleBase::verbatim`] by point symmetry:
    /// `rule(-de, -e) = -rule(de, e)`.
    ///
    /// The shipped table already satisfies this symmetry, so the two
    /// constructors currently coincide; the variant is kept selectable so
    /// configs can pin either one explicitly.
    pub fn symmetrized() -> Self {
        let verbatim = Self::verbatim();
        let mut table = verbatim.table;
        for (de, row) in table.iter_mut().enumerate().take(3) {
            for (e, slot) in row.iter_mut().enumerate() {
                *slot = verbatim.table[6 - de][6 - e].negated();
            }
        }
        Self { table }
    }

    pub fn lookup(&self, error_change: Label, error: Label) -> Label {
        self.table[error_change.index()][error.index()]
    }
}

/// Mamdani inference: every (error change, error) term pair fires its
/// rule with `min` of the grades, and activations for the same output
/// label combine with `max`. Returns the activated labels in ascending
/// label order.
pub fn infer(
    error_terms: &[(Label, f64)],
    change_terms: &[(Label, f64)],
    rules: &RuleBase,
) -> Vec<(Label, f64)> {
    let mut activations = [0.0_f64; 7];
    for &(de_label, de_grade) in change_terms {
        for &(e_label, e_grade) in error_terms {
            let out = rules.lookup(de_label, e_label);
            let strength = de_grade.min(e_grade);
            let slot = &mut activations[out.index()];
            *slot = slot.max(strength);
        }
    }
    activations
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (Label::ALL[i], a))
        .collect()
}

/// Centre-of-area over singleton outputs: the activation-weighted mean
/// of the activated centers.
pub fn defuzzify(activations: &[(Label, f64)], centers: &[f64; 7]) -> Result<f64, FuzzyError> {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for &(label, grade) in activations {
        weighted += grade * centers[label.index()];
        total += grade;
    }
    if total <= 0.0 {
        return Err(FuzzyError::NoActivation);
    }
    Ok(weighted / total)
}

/// Scaling factors of the controller: the error change is scaled by the
/// proportional gain and the error by the integral gain before entering
/// the normalized universe; the defuzzified output is scaled by the
/// output gain into millimetres of displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub proportional: f64,
    pub integral: f64,
    pub output: f64,
}

impl Gains {
    pub fn new(proportional: f64, integral: f64, output: f64) -> Self {
        assert!(
            proportional > 0.0 && integral > 0.0 && output > 0.0,
            "gains must be positive"
        );
        Self {
            proportional,
            integral,
            output,
        }
    }
}

/// Diagonal 0/1 selection over the six task axes: `true` entries are
/// force-controlled, the rest stay motion-controlled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionMatrix {
    diagonal: [bool; AXES],
}

impl SelectionMatrix {
    pub fn new(diagonal: [bool; AXES]) -> Self {
        Self { diagonal }
    }

    /// Selects only the translational z axis (surface-normal force).
    pub fn normal_z() -> Self {
        Self::new([false, false, true, false, false, false])
    }

    pub fn identity() -> Self {
        Self::new([true; AXES])
    }

    pub fn is_force_controlled(&self, axis: usize) -> bool {
        self.diagonal[axis]
    }

    pub fn diagonal(&self) -> [bool; AXES] {
        self.diagonal
    }
}

/// A force/torque reading or set-point: newtons and newton-millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_normal_force(f: f64) -> Self {
        Self {
            force: Vec3::new(0.0, 0.0, f),
            torque: Vec3::ZERO,
        }
    }

    pub fn axis(&self, axis: usize) -> f64 {
        match axis {
            0 => self.force.x,
            1 => self.force.y,
            2 => self.force.z,
            3 => self.torque.x,
            4 => self.torque.y,
            5 => self.torque.z,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn set_axis(&mut self, axis: usize, value: f64) {
        match axis {
            0 => self.force.x = value,
            1 => self.force.y = value,
            2 => self.force.z = value,
            3 => self.torque.x = value,
            4 => self.torque.y = value,
            5 => self.torque.z = value,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

/// A displacement adjustment: millimetres and radians per axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn axis(&self, axis: usize) -> f64 {
        match axis {
            0 => self.linear.x,
            1 => self.linear.y,
            2 => self.linear.z,
            3 => self.angular.x,
            4 => self.angular.y,
            5 => self.angular.z,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn set_axis(&mut self, axis: usize, value: f64) {
        match axis {
            0 => self.linear.x = value,
            1 => self.linear.y = value,
            2 => self.linear.z = value,
            3 => self.angular.x = value,
            4 => self.angular.y = value,
            5 => self.angular.z = value,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

/// Result of one controller step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    /// Displacement increment emitted this step, per axis.
    pub delta: Twist,
    /// Set when defuzzification found no activation on some axis and fell
    /// back to a zero increment.
    pub no_activation: bool,
}

/// The fuzzy PI controller with its memory: previous error and
/// accumulated displacement.
///
/// Each step is a pure state transition; instances hold no global state
/// and may run concurrently on independent tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPi {
    gains: Gains,
    selection: SelectionMatrix,
    membership: MembershipSet,
    rules: RuleBase,
    centers: [f64; 7],
    previous_error: Wrench,
    accumulated: Twist,
}

impl FuzzyPi {
    pub fn new(gains: Gains, selection: SelectionMatrix, rules: RuleBase) -> Self {
        Self {
            gains,
            selection,
            membership: MembershipSet::standard(),
            rules,
            centers: OUTPUT_CENTERS,
            previous_error: Wrench::zero(),
            accumulated: Twist::zero(),
        }
    }

    pub fn gains(&self) -> Gains {
        self.gains
    }

    pub fn selection(&self) -> SelectionMatrix {
        self.selection
    }

    /// Total displacement accumulated over all steps so far.
    pub fn accumulated(&self) -> Twist {
        self.accumulated
    }

    pub fn previous_error(&self) -> Wrench {
        self.previous_error
    }

    /// Clears the controller memory without touching gains or selection.
    pub fn reset(&mut self) {
        self.previous_error = Wrench::zero();
        self.accumulated = Twist::zero();
    }

    /// Runs one control step: per force-controlled axis the error
    /// `desired - actual` and its change are scaled, fuzzified, inferred
    /// and defuzzified into a displacement increment, which also
    /// accumulates into the controller's total. Motion-controlled axes
    /// receive a zero increment but still update the error history.
    pub fn step(&mut self, desired: &Wrench, actual: &Wrench) -> StepOutput {
        let mut delta = Twist::zero();
        let mut no_activation = false;

        for axis in 0..AXES {
            let error = desired.axis(axis) - actual.axis(axis);
            let change = error - self.previous_error.axis(axis);
            self.previous_error.set_axis(axis, error);

            if !self.selection.is_force_controlled(axis) {
                continue;
            }

            let error_terms = self.membership.fuzzify(self.gains.integral * error);
            let change_terms = self.membership.fuzzify(self.gains.proportional * change);
            let activations = infer(&error_terms, &change_terms, &self.rules);
            let normalized = match defuzzify(&activations, &self.centers) {
                Ok(value) => value,
                Err(FuzzyError::NoActivation) => {
                    no_activation = true;
                    0.0
                }
            };
            let increment = self.gains.output * normalized;
            delta.set_axis(axis, increment);
            self.accumulated
                .set_axis(axis, self.accumulated.axis(axis) + increment);
        }

        StepOutput {
            delta,
            no_activation,
        }
    }
}
