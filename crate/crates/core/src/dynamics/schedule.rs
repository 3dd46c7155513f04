use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, MatrixLiteral};

/// Uniform grid `t_k = t_start + k * (t_end - t_start) / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<TimeGrid> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if !(end > start) {
            return Err(Error::InvalidGrid(format!(
                "t_end ({end}) must exceed t_start ({start})"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 steps, got {steps}"
            )));
        }
        Ok(TimeGrid { start, end, steps })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    /// The last node is pinned to `t_end` exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.end
        } else {
            self.start + k as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.node(k))
    }

    pub fn with_steps(&self, steps: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.start, self.end, steps)
    }

    /// Slack used when deciding whether a time lies inside a span.
    pub(crate) fn slack(start: f64, end: f64) -> f64 {
        1e-12 * (end - start).abs().max(1.0)
    }
}

pub type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// Analytic time-dependent operator.
#[derive(Clone)]
pub struct ClosedForm {
    pub name: String,
    pub value: MatrixFn,
    pub derivative: MatrixFn,
    /// Time derivative of the principal square root, when the operator is a
    /// metric with a known closed-form root.
    pub root_derivative: Option<MatrixFn>,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedForm")
            .field("name", &self.name)
            .field("analytic_root_derivative", &self.root_derivative.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    ClosedForm,
    Sampled,
}

#[derive(Debug, Clone)]
enum Repr {
    Constant(ComplexMatrix),
    ClosedForm(ClosedForm),
    Sampled(Sampled),
}

/// Snapshots on a uniform grid joined by cubic Hermite segments whose node
/// slopes are finite differences of the snapshots.
#[derive(Debug, Clone)]
struct Sampled {
    times: Vec<f64>,
    t0: f64,
    spacing: f64,
    snapshots: Vec<ComplexMatrix>,
    slopes: Vec<ComplexMatrix>,
}

impl Sampled {
    fn new(times: &[f64], snapshots: Vec<ComplexMatrix>) -> Result<Sampled> {
        let k = snapshots.len();
        if times.len() != k {
            return Err(Error::InvalidSchedule(format!(
                "{} times for {} snapshots",
                times.len(),
                k
            )));
        }
        if k < 4 {
            return Err(Error::InvalidSchedule(format!(
                "need at least 4 snapshots, got {k}"
            )));
        }
        let t0 = times[0];
        let spacing = (times[k - 1] - t0) / (k - 1) as f64;
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidSchedule(
                "snapshot times must increase".into(),
            ));
        }
        for (i, &t) in times.iter().enumerate() {
            let expected = t0 + i as f64 * spacing;
            if (t - expected).abs() > 1e-9 * spacing {
                return Err(Error::InvalidSchedule(format!(
                    "snapshot times are not uniform (t[{i}] = {t}, expected {expected})"
                )));
            }
        }
        let dim = snapshots[0].dim();
        if let Some(bad) = snapshots.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let inv2h = 1.0 / (2.0 * spacing);
        let slopes = (0..k)
            .map(|i| {
                let d = if i == 0 {
                    &(&snapshots[1].scale_real(4.0) - &snapshots[0].scale_real(3.0)) - &snapshots[2]
                } else if i == k - 1 {
                    &(&snapshots[k - 1].scale_real(3.0) - &snapshots[k - 2].scale_real(4.0))
                        + &snapshots[k - 3]
                } else {
                    &snapshots[i + 1] - &snapshots[i - 1]
                };
                d.scale_real(inv2h)
            })
            .collect();
        Ok(Sampled {
            times: times.to_vec(),
            t0,
            spacing,
            snapshots,
            slopes,
        })
    }

    fn end(&self) -> f64 {
        self.t0 + (self.snapshots.len() - 1) as f64 * self.spacing
    }

    fn eval(&self, t: f64) -> ComplexMatrix {
        let last = self.snapshots.len() - 1;
        let x = ((t - self.t0) / self.spacing).clamp(0.0, last as f64);
        let nearest = x.round();
        if (x - nearest).abs() <= 1e-9 {
            return self.snapshots[nearest as usize].clone();
        }
        let k = (x.floor() as usize).min(last - 1);
        let s = x - k as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let a = &self.snapshots[k].scale_real(h00) + &self.slopes[k].scale_real(h10 * self.spacing);
        let b = &self.snapshots[k + 1].scale_real(h01)
            + &self.slopes[k + 1].scale_real(h11 * self.spacing);
        &a + &b
    }
}

/// Time-dependent operator `t -> A(t)`.
#[derive(Debug, Clone)]
pub struct OperatorSchedule {
    dim: usize,
    start: f64,
    end: f64,
    repr: Repr,
}

impl OperatorSchedule {
    /// Constant operator, valid at every time.
    pub fn constant(value: ComplexMatrix) -> OperatorSchedule {
        OperatorSchedule {
            dim: value.dim(),
            start: f64::NEG_INFINITY,
            end: f64::INFINITY,
            repr: Repr::Constant(value),
        }
    }

    /// Analytic schedule on `[start, end]`. The evaluator is probed at both
    /// ends to fix the dimension and reject non-finite output.
    pub fn closed_form(form: ClosedForm, start: f64, end: f64) -> Result<OperatorSchedule> {
        if !(end > start) {
            return Err(Error::InvalidSchedule(format!(
                "empty span [{start}, {end}]"
            )));
        }
        let a = (form.value)(start);
        let b = (form.value)(end);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite);
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(OperatorSchedule {
            dim: a.dim(),
            start,
            end,
            repr: Repr::ClosedForm(form),
        })
    }

    pub fn sampled(times: &[f64], snapshots: Vec<ComplexMatrix>) -> Result<OperatorSchedule> {
        let sampled = Sampled::new(times, snapshots)?;
        Ok(OperatorSchedule {
            dim: sampled.snapshots[0].dim(),
            start: sampled.t0,
            end: sampled.end(),
            repr: Repr::Sampled(sampled),
        })
    }

    pub fn sampled_from_literals(
        times: &[f64],
        snapshots: &[MatrixLiteral],
    ) -> Result<OperatorSchedule> {
        let snapshots = snapshots
            .iter()
            .map(ComplexMatrix::from_literal)
            .collect::<Result<Vec<_>>>()?;
        Self::sampled(times, snapshots)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn kind(&self) -> ScheduleKind {
        match self.repr {
            Repr::Constant(_) | Repr::ClosedForm(_) => ScheduleKind::ClosedForm,
            Repr::Sampled(_) => ScheduleKind::Sampled,
        }
    }

    pub fn as_constant(&self) -> Option<&ComplexMatrix> {
        match &self.repr {
            Repr::Constant(m) => Some(m),
            _ => None,
        }
    }

    /// Snapshot times and matrices of a sampled schedule.
    pub fn samples(&self) -> Option<(&[f64], &[ComplexMatrix])> {
        match &self.repr {
            Repr::Sampled(s) => Some((&s.times, &s.snapshots)),
            _ => None,
        }
    }

    pub fn covers(&self, start: f64, end: f64) -> bool {
        let slack = TimeGrid::slack(start, end);
        self.start <= start + slack && self.end >= end - slack
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if self.start == f64::NEG_INFINITY {
            return if t.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    t,
                    start: self.start,
                    end: self.end,
                })
            };
        }
        let slack = TimeGrid::slack(self.start, self.end);
        if !(t >= self.start - slack && t <= self.end + slack) {
            return Err(Error::OutOfRange {
                t,
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<ComplexMatrix> {
        self.check_range(t)?;
        let value = match &self.repr {
            Repr::Constant(m) => return Ok(m.clone()),
            Repr::ClosedForm(f) => (f.value)(t.clamp(self.start, self.end)),
            Repr::Sampled(s) => s.eval(t),
        };
        if !value.is_finite() {
            return Err(Error::NonFinite.at(t));
        }
        Ok(value)
    }

    /// Closed forms return the analytic derivative. Sampled schedules use a
    /// central difference of the interpolant with the snapshot spacing as
    /// step, switching to second-order one-sided stencils at the span ends.
    pub fn derivative(&self, t: f64) -> Result<ComplexMatrix> {
        self.check_range(t)?;
        match &self.repr {
            Repr::Constant(m) => Ok(ComplexMatrix::zeros(m.dim())),
            Repr::ClosedForm(f) => Ok((f.derivative)(t.clamp(self.start, self.end))),
            Repr::Sampled(s) => {
                let t = t.clamp(self.start, self.end);
                finite_difference(|x| Ok(s.eval(x)), t, s.spacing, self.start, self.end)
            }
        }
    }

    /// Analytic derivative of the principal square root, if known.
    pub fn analytic_root_derivative(&self, t: f64) -> Option<Result<ComplexMatrix>> {
        match &self.repr {
            Repr::Constant(m) => Some(Ok(ComplexMatrix::zeros(m.dim()))),
            Repr::ClosedForm(ClosedForm {
                root_derivative: Some(d),
                ..
            }) => Some(
                self.check_range(t)
                    .map(|_| d(t.clamp(self.start, self.end))),
            ),
            _ => None,
        }
    }

    pub fn has_analytic_root_derivative(&self) -> bool {
        matches!(
            &self.repr,
            Repr::Constant(_)
                | Repr::ClosedForm(ClosedForm {
                    root_derivative: Some(_),
                    ..
                })
        )
    }
}

/// Second-order difference of `f` at `t` with step `h`, central when both
/// neighbours lie in `[start, end]`, one-sided otherwise.
pub(crate) fn finite_difference(
    f: impl Fn(f64) -> Result<ComplexMatrix>,
    t: f64,
    h: f64,
    start: f64,
    end: f64,
) -> Result<ComplexMatrix> {
    let slack = TimeGrid::slack(start, end);
    let inv2h = 1.0 / (2.0 * h);
    if t - h >= start - slack && t + h <= end + slack {
        Ok((&f(t + h)? - &f(t - h)?).scale_real(inv2h))
    } else if t - h < start - slack {
        let d = &(&f(t + h)?.scale_real(4.0) - &f(t)?.scale_real(3.0)) - &f(t + 2.0 * h)?;
        Ok(d.scale_real(inv2h))
    } else {
        let d = &(&f(t)?.scale_real(3.0) - &f(t - h)?.scale_real(4.0)) + &f(t - 2.0 * h)?;
        Ok(d.scale_real(inv2h))
    }
}
