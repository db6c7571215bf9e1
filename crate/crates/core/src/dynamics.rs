//! The implicit planar map on boundary-field pairs.
//!
//! A point `(x, y)` holds the diagonal entry and the off-diagonal magnitude of a
//! boundary field one level down. The defining relations go from the new point
//! `(x', y')` back to the old one,
//!
//! ```text
//! x = B2 x'³ + A2 x' y'²
//! y = B1 x'² y' + A1 y'³
//! ```
//!
//! so a forward step has to solve them. Dividing the two relations gives the
//! ratio transport `y/x = g(y'/x')` with `g(t) = (A1 t³ + B1 t)/(A2 t² + B2)`;
//! inverting `g` is a cubic solve, after which `x'` follows from a cube root.

use crate::error::{Error, Result};
use crate::model::{critical, RecursionCoeffs};

pub const DEFAULT_MAX_STEPS: usize = 10_000;
pub const MAX_STEPS_LIMIT: usize = 1_000_000;

const STEP_RESIDUAL_REL: f64 = 1e-11;
const ROOT_WINDOW_SLACK: f64 = 1e-12;
const LINE2_SNAP_REL: f64 = 1e-14;
const CONVERGED_DIFF: f64 = 1e-13;
const CONVERGED_RESIDUAL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynPoint {
    pub x: f64,
    pub y: f64,
}

impl DynPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Membership in `Δ = {x > y ≥ 0}`.
    pub fn in_domain(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.y >= 0.0 && self.x > self.y
    }

    pub fn ratio(&self) -> f64 {
        self.y / self.x
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    fn check_domain(&self) -> Result<()> {
        if self.in_domain() {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x: self.x, y: self.y })
        }
    }
}

/// `g(t) = (A1 t³ + B1 t)/(A2 t² + B2)`.
pub fn g_beta(t: f64, rc: &RecursionCoeffs) -> f64 {
    (rc.a1 * t.powi(3) + rc.b1 * t) / (rc.a2 * t * t + rc.b2)
}

/// The invariant ratio `1/√D` of the second line, defined strictly inside the window.
pub fn line2_ratio(rc: &RecursionCoeffs) -> Option<f64> {
    if !critical().in_window(rc.beta) {
        return None;
    }
    rc.d.filter(|&d| d > 1.0).map(|d| 1.0 / d.sqrt())
}

/// Real roots of `a t³ + b t² + c t + d`, each refined by Newton's method on the
/// unscaled polynomial. Roots closer than `1e-12` are merged.
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let poly = |t: f64| ((a * t + b) * t + c) * t + d;
    let deriv = |t: f64| (3.0 * a * t + 2.0 * b) * t + c;

    let mut roots = if a == 0.0 {
        real_quadratic_roots(b, c, d)
    } else {
        let (p2, p1, p0) = (b / a, c / a, d / a);
        let shift = p2 / 3.0;
        let p = p1 - p2 * p2 / 3.0;
        let q = 2.0 * p2.powi(3) / 27.0 - p2 * p1 / 3.0 + p0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc > 0.0 {
            let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
            let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
            vec![big + small - shift]
        } else if p == 0.0 {
            vec![-shift]
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
                .collect()
        }
    };

    for t in roots.iter_mut() {
        for _ in 0..8 {
            let (f, df) = (poly(*t), deriv(*t));
            if df == 0.0 || f == 0.0 {
                break;
            }
            let next = *t - f / df;
            if !next.is_finite() || poly(next).abs() >= f.abs() {
                break;
            }
            *t = next;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() < 1e-12);
    roots
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// All `t ∈ [0, 1]` with `g(t) = r`, ascending.
pub fn invert_ratio(r: f64, rc: &RecursionCoeffs) -> Vec<f64> {
    if r == 0.0 {
        return vec![0.0];
    }
    real_cubic_roots(rc.a1, -r * rc.a2, rc.b1, -r * rc.b2)
        .into_iter()
        .filter(|t| (-ROOT_WINDOW_SLACK..=1.0 + ROOT_WINDOW_SLACK).contains(t))
        .map(|t| t.clamp(0.0, 1.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownCause {
    /// `g(t) = y/x` has no solution in `[0, 1]`.
    NoPreimage,
    /// The candidate failed the residual check of the defining relations.
    Residual,
    /// Every candidate lands outside `Δ`.
    LeavesDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Next(DynPoint),
    Breakdown(BreakdownCause),
}

/// Relative residuals of the two defining relations for the pair `old ← new`.
pub fn step_residual(old: &DynPoint, new: &DynPoint, rc: &RecursionCoeffs) -> (f64, f64) {
    let DynPoint { x, y } = *new;
    let rx = (rc.b2 * x.powi(3) + rc.a2 * x * y * y - old.x).abs() / old.x.abs().max(f64::MIN_POSITIVE);
    let ry = (rc.b1 * x * x * y + rc.a1 * y.powi(3) - old.y).abs();
    let ry = if old.y == 0.0 { ry } else { ry / old.y.abs() };
    (rx, ry)
}

fn candidate(p: &DynPoint, t: f64, rc: &RecursionCoeffs) -> DynPoint {
    let x = (p.x / (rc.b2 + rc.a2 * t * t)).cbrt();
    DynPoint::new(x, t * x)
}

/// One forward step: the point whose image under the defining relations is `p`.
pub fn step(p: &DynPoint, rc: &RecursionCoeffs) -> Result<StepOutcome> {
    p.check_domain()?;
    let r = p.ratio();

    if let Some(line) = line2_ratio(rc) {
        if (r - line).abs() <= LINE2_SNAP_REL * line {
            return Ok(accept(p, candidate(p, line, rc), rc));
        }
    }

    let roots = invert_ratio(r, rc);
    if roots.is_empty() {
        return Ok(StepOutcome::Breakdown(BreakdownCause::NoPreimage));
    }
    let in_domain: Vec<(f64, DynPoint)> = roots
        .iter()
        .map(|&t| (t, candidate(p, t, rc)))
        .filter(|(_, q)| q.in_domain())
        .collect();
    match in_domain.as_slice() {
        [] => Ok(StepOutcome::Breakdown(BreakdownCause::LeavesDomain)),
        [(_, q)] => Ok(accept(p, *q, rc)),
        _ => Err(Error::AmbiguousBranch { ratio: r, roots: in_domain.iter().map(|(t, _)| *t).collect() }),
    }
}

fn accept(old: &DynPoint, new: DynPoint, rc: &RecursionCoeffs) -> StepOutcome {
    let (rx, ry) = step_residual(old, &new, rc);
    if rx < STEP_RESIDUAL_REL && ry < STEP_RESIDUAL_REL && new.in_domain() {
        StepOutcome::Next(new)
    } else {
        StepOutcome::Breakdown(BreakdownCause::Residual)
    }
}

/// Max relative residual of `B2x² + A2y² = 1` and `B1x² + A1y² = 1` (the
/// second is skipped when `y = 0`), i.e. of `p` being a fixed point.
pub fn fixed_point_residual(p: &DynPoint, rc: &RecursionCoeffs) -> f64 {
    let r1 = (rc.b2 * p.x * p.x + rc.a2 * p.y * p.y - 1.0).abs();
    let r2 = if p.y == 0.0 { 0.0 } else { (rc.b1 * p.x * p.x + rc.a1 * p.y * p.y - 1.0).abs() };
    r1.max(r2)
}

/// `(1/cosh³β, 0)`, plus `(√(DE), √E)` strictly inside the window.
pub fn fixed_points(beta: f64) -> Result<Vec<DynPoint>> {
    let rc = RecursionCoeffs::new(beta)?;
    let mut points = vec![DynPoint::new(rc.alpha0(), 0.0)];
    if critical().in_window(beta) {
        if let Some((g0, g1)) = rc.gamma() {
            points.push(DynPoint::new(g0, g1));
        }
    }
    Ok(points)
}

/// `x⁽ⁿ⁾` along the free line `y = 0`: `(x⁽⁰⁾cosh³β)^{1/3ⁿ}/cosh³β`.
pub fn free_line_closed_form(x0: f64, beta: f64, n: usize) -> f64 {
    let c3 = beta.cosh().powi(3);
    (x0 * c3).powf(3f64.powi(-(n as i32))) / c3
}

/// `x⁽ⁿ⁾` along the line `y/x = 1/√D`: `√(DE)(x⁽⁰⁾/√(DE))^{1/3ⁿ}`.
pub fn line2_closed_form(x0: f64, rc: &RecursionCoeffs, n: usize) -> Option<f64> {
    let (g0, _) = rc.gamma()?;
    Some(g0 * (x0 / g0).powf(3f64.powi(-(n as i32))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ConvergedToFree,
    ConvergedToLine2,
    /// The step with this 1-based index had no successor in `Δ`.
    Breakdown(usize),
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::ConvergedToFree => "ConvergedToFree".into(),
            Outcome::ConvergedToLine2 => "ConvergedToLine2".into(),
            Outcome::Breakdown(k) => format!("Breakdown({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub beta: f64,
    pub points: Vec<DynPoint>,
    pub outcome: Outcome,
    pub limit: Option<DynPoint>,
}

struct Run {
    points: Vec<DynPoint>,
    classified: Option<(Outcome, Option<DynPoint>)>,
}

fn run(start: DynPoint, rc: &RecursionCoeffs, max_steps: usize) -> Result<Run> {
    start.check_domain()?;
    let fixed = fixed_points(rc.beta)?;
    let mut points = vec![start];
    for k in 1..=max_steps {
        let current = *points.last().expect("trajectory starts non-empty");
        let next = match step(&current, rc)? {
            StepOutcome::Next(q) => q,
            StepOutcome::Breakdown(_) => {
                return Ok(Run { points, classified: Some((Outcome::Breakdown(k), None)) });
            }
        };
        points.push(next);
        if next.dist(&current) < CONVERGED_DIFF {
            let nearest = fixed
                .iter()
                .enumerate()
                .map(|(i, f)| (i, next.dist(f)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, d)) = nearest {
                if d < CONVERGED_RESIDUAL {
                    let outcome = if i == 0 { Outcome::ConvergedToFree } else { Outcome::ConvergedToLine2 };
                    return Ok(Run { points, classified: Some((outcome, Some(fixed[i]))) });
                }
            }
        }
    }
    Ok(Run { points, classified: None })
}

/// Iterates [`step`] from `start` until the orbit settles on a fixed point or
/// breaks down. Running out of steps first is an error.
pub fn trajectory(start: DynPoint, beta: f64, max_steps: usize) -> Result<TrajectoryResult> {
    let rc = RecursionCoeffs::new(beta)?;
    let max_steps = max_steps.min(MAX_STEPS_LIMIT);
    let run = run(start, &rc, max_steps)?;
    match run.classified {
        Some((outcome, limit)) => Ok(TrajectoryResult { beta, points: run.points, outcome, limit }),
        None => Err(Error::MaxStepsExceeded { steps: max_steps }),
    }
}

/// Whether some orbit point comes back within `tol` after exactly `period_k`
/// steps without having come within `tol` at any shorter lag. Plain
/// convergence makes every lag small at once and is therefore not reported.
pub fn detect_periodic(beta: f64, start: DynPoint, period_k: usize, tol: f64) -> Result<bool> {
    if period_k < 2 {
        return Err(Error::InvalidPeriod(period_k));
    }
    let rc = RecursionCoeffs::new(beta)?;
    let points = run(start, &rc, DEFAULT_MAX_STEPS)?.points;
    Ok(points.iter().enumerate().any(|(n, p)| {
        n + period_k < points.len()
            && (1..period_k).all(|j| points[n + j].dist(p) >= tol)
            && points[n + period_k].dist(p) < tol
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rc(beta: f64) -> RecursionCoeffs {
        RecursionCoeffs::new(beta).unwrap()
    }

    #[test]
    fn cubic_roots_known() {
        let r = real_cubic_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        let single = real_cubic_roots(1.0, 0.0, 1.0, -2.0);
        assert_eq!(single.len(), 1);
        assert!((single[0] - 1.0).abs() < 1e-14);
        let triple = real_cubic_roots(2.0, -6.0, 6.0, -2.0);
        assert!(triple.iter().all(|t| (t - 1.0).abs() < 1e-5));
        assert_eq!(real_cubic_roots(0.0, 1.0, -3.0, 2.0), vec![1.0, 2.0]);
    }

    #[test]
    fn g_beta_basics() {
        let c = rc(0.5);
        assert_eq!(g_beta(0.0, &c), 0.0);
        let t = line2_ratio(&c).unwrap();
        assert!((g_beta(t, &c) - t).abs() < 1e-14);
        let values: Vec<f64> = (0..=1000).map(|i| g_beta(i as f64 * 1e-3, &c)).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invert_ratio_examples() {
        let c = rc(0.5);
        assert_eq!(invert_ratio(0.0, &c), vec![0.0]);
        let line = line2_ratio(&c).unwrap();
        let roots = invert_ratio(line, &c);
        assert!(roots.iter().any(|t| (t - line).abs() < 1e-12));
        assert!(invert_ratio(g_beta(1.0, &c) + 1e-6, &c).is_empty());
        for t in [0.01, 0.3, 0.77, 0.999] {
            let back = invert_ratio(g_beta(t, &c), &c);
            assert_eq!(back.len(), 1);
            assert!((back[0] - t).abs() < 1e-13);
        }
    }

    #[test]
    fn fixed_points_are_stationary() {
        for beta in [0.2, 0.5, 0.8, 1.2] {
            let c = rc(beta);
            for p in fixed_points(beta).unwrap() {
                assert!(fixed_point_residual(&p, &c) < 1e-12);
                match step(&p, &c).unwrap() {
                    StepOutcome::Next(q) => assert!(q.dist(&p) < 1e-11 * p.x, "beta {beta}"),
                    other => panic!("{other:?}"),
                }
            }
        }
        assert_eq!(fixed_points(0.2).unwrap().len(), 1);
        assert_eq!(fixed_points(0.5).unwrap().len(), 2);
    }

    #[test]
    fn free_line_step_is_a_cube_root() {
        let beta = 1.2;
        let c = rc(beta);
        let c3 = beta.cosh().powi(3);
        let StepOutcome::Next(q) = step(&DynPoint::new(0.9, 0.0), &c).unwrap() else { panic!() };
        assert_eq!(q.y, 0.0);
        assert!((q.x * c3 - (0.9 * c3).cbrt()).abs() < 1e-14);
    }

    #[test]
    fn step_rejects_points_outside_domain() {
        let c = rc(0.5);
        assert!(step(&DynPoint::new(0.5, 0.5), &c).is_err());
        assert!(step(&DynPoint::new(0.5, -0.1), &c).is_err());
    }

    #[test]
    fn classification_cases() {
        let t = trajectory(DynPoint::new(0.9, 0.0), 1.2, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(t.outcome, Outcome::ConvergedToFree);
        assert_eq!(t.limit, Some(DynPoint::new(rc(1.2).alpha0(), 0.0)));

        let t = trajectory(DynPoint::new(0.9, 0.3), 1.2, DEFAULT_MAX_STEPS).unwrap();
        assert!(matches!(t.outcome, Outcome::Breakdown(_)));

        let line = line2_ratio(&rc(0.5)).unwrap();
        let below = trajectory(DynPoint::new(0.9, 0.9 * 0.999 * line), 0.5, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(below.outcome, Outcome::ConvergedToFree);
        let ratios: Vec<f64> = below.points.iter().map(DynPoint::ratio).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0));

        let on = trajectory(DynPoint::new(0.9, 0.9 * line), 0.5, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(on.outcome, Outcome::ConvergedToLine2);

        let above = trajectory(DynPoint::new(0.9, 0.9 * 1.001 * line), 0.5, DEFAULT_MAX_STEPS).unwrap();
        assert!(matches!(above.outcome, Outcome::Breakdown(_)));
    }

    #[test]
    fn line2_closed_form_per_step() {
        let c = rc(0.8);
        let line = line2_ratio(&c).unwrap();
        let t = trajectory(DynPoint::new(0.3, 0.3 * line), 0.8, DEFAULT_MAX_STEPS).unwrap();
        for (n, p) in t.points.iter().enumerate() {
            let want = line2_closed_form(0.3, &c, n).unwrap();
            assert!((p.x - want).abs() <= 1e-10 * want, "step {n}");
            assert!((p.ratio() - line).abs() <= 1e-11 * line);
        }
    }

    #[test]
    fn max_steps_is_reported() {
        let line = line2_ratio(&rc(0.5)).unwrap();
        let err = trajectory(DynPoint::new(0.9, 0.5 * line), 0.5, 3).unwrap_err();
        assert_eq!(err, Error::MaxStepsExceeded { steps: 3 });
    }

    #[test]
    fn periodic_detection_rules() {
        assert!(detect_periodic(0.5, DynPoint::new(0.9, 0.1), 1, 1e-10).is_err());
        assert!(!detect_periodic(1.2, DynPoint::new(0.9, 0.0), 2, 1e-10).unwrap());
        assert!(!detect_periodic(0.5, DynPoint::new(0.9, 0.2), 3, 1e-10).unwrap());
        let fixed = fixed_points(0.5).unwrap()[1];
        assert!(!detect_periodic(0.5, fixed, 2, 1e-10).unwrap());
    }
}
