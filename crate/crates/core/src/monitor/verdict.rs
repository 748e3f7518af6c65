use serde::Serialize;

/// Whether observed values must stay below or above their thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

/// Pass/fail record of one check, keeping the worst observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    /// The property being asserted.
    pub reference: String,
    pub bound: Bound,
    pub passed: bool,
    pub evaluations: u64,
    pub worst_value: f64,
    pub threshold: f64,
    pub worst_time: Option<f64>,
    pub worst_point: Option<(usize, usize)>,
    #[serde(skip)]
    worst_excess: f64,
}

impl Verdict {
    pub fn new(check: &str, reference: &str, bound: Bound) -> Self {
        Self {
            check: check.to_string(),
            reference: reference.to_string(),
            bound,
            passed: true,
            evaluations: 0,
            worst_value: f64::NAN,
            threshold: f64::NAN,
            worst_time: None,
            worst_point: None,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    /// Records one comparison of `value` against `threshold`.
    pub fn observe(&mut self, value: f64, threshold: f64, t: Option<f64>, point: Option<(usize, usize)>) {
        let excess = match self.bound {
            Bound::Upper => value - threshold,
            Bound::Lower => threshold - value,
        };
        let excess = if excess.is_nan() { f64::INFINITY } else { excess };
        self.evaluations += 1;
        if excess > 0.0 {
            self.passed = false;
        }
        if excess > self.worst_excess || self.evaluations == 1 {
            self.worst_excess = excess;
            self.worst_value = value;
            self.threshold = threshold;
            self.worst_time = t;
            self.worst_point = point;
        }
    }

    /// Folds another verdict of the same check into this one.
    pub fn merge(&mut self, other: &Verdict) {
        debug_assert_eq!(self.check, other.check);
        if other.evaluations == 0 {
            return;
        }
        self.passed &= other.passed;
        if self.evaluations == 0 || other.worst_excess > self.worst_excess {
            self.worst_excess = other.worst_excess;
            self.worst_value = other.worst_value;
            self.threshold = other.threshold;
            self.worst_time = other.worst_time;
            self.worst_point = other.worst_point;
        }
        self.evaluations += other.evaluations;
    }

    /// Signed distance of the worst observation past its threshold.
    pub fn margin(&self) -> f64 {
        -self.worst_excess
    }
}
