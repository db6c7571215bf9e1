//! The XY edge interaction on the order-3 tree and its scalar consequences.
//!
//! Per edge `H = (σ1⊗σ1 + σ2⊗σ2)/2` and `K = exp(βH) = 1 + sinh β H + (cosh β - 1) H²`,
//! which in the Pauli basis is `Σ K_i σ_i⊗σ_i` with
//! `K0 = (1 + cosh β)/2`, `K1 = K2 = sinh β / 2`, `K3 = (1 - cosh β)/2`.
//!
//! Tracing out the three successors of a vertex with homogeneous fields
//! `a σ0 + b σ1` gives the cubic map
//!
//! ```text
//! a' = B2 a³ + A2 a b²
//! b' = B1 a² b + A1 b³
//! ```
//!
//! whose coefficients are [`RecursionCoeffs`]. `B1 > B2` exactly when
//! `cosh β` lies strictly between the two roots of `P9` above one.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{kron_chain, pauli, DenseOp, TwoSiteOperator};

/// Tree order the model formulas are derived for.
pub const ORDER: u32 = 3;

pub const P9_COEFFS: [f64; 10] = [1.0, -1.0, -1.0, -1.0, 0.0, 2.0, 2.0, 0.0, -1.0, -1.0];
pub const Q10_COEFFS: [f64; 11] = [1.0, 4.0, 5.0, -4.0, -14.0, -6.0, 11.0, 8.0, -3.0, -2.0, 1.0];
pub const Q7_COEFFS: [f64; 8] = [1.0, 2.0, 0.0, -3.0, -2.0, 1.0, 3.0, 1.0];
pub const Q4_COEFFS: [f64; 5] = [-1.0, -1.0, 1.0, 5.0, 2.0];

const P9_LOWER_BRACKET: (f64, f64) = (1.05, 1.1);
const P9_UPPER_BRACKET: (f64, f64) = (1.5, 1.6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub k: u32,
}

impl ModelParams {
    pub fn new(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta, k: ORDER })
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGateCoeffs {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl EdgeGateCoeffs {
    pub fn new(beta: f64) -> Self {
        let (s, c) = (beta.sinh(), beta.cosh());
        Self { k0: (1.0 + c) / 2.0, k1: s / 2.0, k2: s / 2.0, k3: (1.0 - c) / 2.0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.k0, self.k1, self.k2, self.k3]
    }

    /// Residuals of the four quadratic identities
    /// `ΣK² = cosh²β`, `2(K0K1 - K2K3) = sinh β cosh β`,
    /// `2(K0K1 + K2K3) = sinh β`, `K0² + K1² - K2² - K3² = cosh β`.
    pub fn identity_residuals(&self, beta: f64) -> [f64; 4] {
        let (s, c) = (beta.sinh(), beta.cosh());
        let Self { k0, k1, k2, k3 } = *self;
        [
            k0 * k0 + k1 * k1 + k2 * k2 + k3 * k3 - c * c,
            2.0 * (k0 * k1 - k2 * k3) - s * c,
            2.0 * (k0 * k1 + k2 * k3) - s,
            k0 * k0 + k1 * k1 - k2 * k2 - k3 * k3 - c,
        ]
    }
}

/// `H = (σ1⊗σ1 + σ2⊗σ2)/2`.
pub fn edge_hamiltonian() -> TwoSiteOperator {
    TwoSiteOperator::from_diag_pauli([0.0, 0.5, 0.5, 0.0])
}

/// `K = 1 + sinh β H + (cosh β - 1) H²`, tagged with its Pauli coefficients.
pub fn edge_gate(beta: f64) -> Result<TwoSiteOperator> {
    check_beta(beta)?;
    Ok(TwoSiteOperator::from_diag_pauli(EdgeGateCoeffs::new(beta).as_array()))
}

/// The gate assembled literally from powers of `H`, without the Pauli coefficients.
pub fn edge_gate_from_hamiltonian(beta: f64) -> DenseOp {
    let h = edge_hamiltonian().matrix().clone();
    let h2 = &h * &h;
    let id = DenseOp::identity(2);
    let lin = h.scale(Complex64::new(beta.sinh(), 0.0));
    let quad = h2.scale(Complex64::new(beta.cosh() - 1.0, 0.0));
    &(&id + &lin) + &quad
}

/// `exp(-βH)`, the inverse of the edge gate.
pub fn inverse_edge_gate(beta: f64) -> TwoSiteOperator {
    let c = EdgeGateCoeffs::new(-beta);
    TwoSiteOperator::from_diag_pauli(c.as_array())
}

/// Dense `σ_i ⊗ σ_i` on two sites.
pub fn pauli_pair(i: usize) -> Result<DenseOp> {
    let s = pauli(i)?;
    kron_chain(&[s.clone(), s])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionCoeffs {
    pub beta: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    /// `(A2 - A1)/(B1 - B2)`; `None` when `|B1 - B2| < 1e-14`.
    pub d: Option<f64>,
    /// `1/(A2 + D B2)`; `None` together with `d`.
    pub e: Option<f64>,
}

impl RecursionCoeffs {
    pub fn new(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let (s, c) = (beta.sinh(), beta.cosh());
        let a1 = s.powi(3) * c;
        let b1 = s * c * c * (1.0 + c + c * c);
        let a2 = s * s * c * c * (1.0 + 2.0 * c);
        let b2 = c.powi(6);
        let (d, e) = if (b1 - b2).abs() < 1e-14 {
            (None, None)
        } else {
            let d = (a2 - a1) / (b1 - b2);
            (Some(d), Some(1.0 / (a2 + d * b2)))
        };
        Ok(Self { beta, a1, b1, a2, b2, d, e })
    }

    /// β-derivatives `(A1', B1', A2', B2')` of the closed forms.
    pub fn derivatives(beta: f64) -> (f64, f64, f64, f64) {
        let (s, c) = (beta.sinh(), beta.cosh());
        // d/dβ sinh = cosh, d/dβ cosh = sinh
        let a1 = 3.0 * s * s * c * c + s.powi(4);
        let b1 = {
            let p = s * c * c; // p' = c³ + 2 s² c
            let q = 1.0 + c + c * c; // q' = s + 2 c s
            (c.powi(3) + 2.0 * s * s * c) * q + p * (s + 2.0 * c * s)
        };
        let a2 = {
            let p = s * s * c * c; // p' = 2 s c³ + 2 s³ c
            let q = 1.0 + 2.0 * c; // q' = 2 s
            (2.0 * s * c.powi(3) + 2.0 * s.powi(3) * c) * q + p * 2.0 * s
        };
        let b2 = 6.0 * c.powi(5) * s;
        (a1, b1, a2, b2)
    }

    /// Image of the homogeneous field `(a, b)` under the three-successor trace.
    pub fn map(&self, a: f64, b: f64) -> (f64, f64) {
        (self.b2 * a.powi(3) + self.a2 * a * b * b, self.b1 * a * a * b + self.a1 * b.powi(3))
    }

    /// The boundary value `1/cosh³β` of the free fixed point.
    pub fn alpha0(&self) -> f64 {
        1.0 / self.beta.cosh().powi(3)
    }

    /// `(γ0, γ1) = (√(DE), √E)` when both are defined and positive.
    pub fn gamma(&self) -> Option<(f64, f64)> {
        match (self.d, self.e) {
            (Some(d), Some(e)) if d > 0.0 && e > 0.0 => Some(((d * e).sqrt(), e.sqrt())),
            _ => None,
        }
    }
}

pub fn recursion_coeffs(beta: f64) -> Result<RecursionCoeffs> {
    RecursionCoeffs::new(beta)
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &a| acc * t + a)
}

/// `t⁹ - t⁸ - t⁷ - t⁶ + 2t⁴ + 2t³ - t - 1`.
pub fn p9_eval(t: f64) -> f64 {
    horner(&P9_COEFFS, t)
}

pub fn q10_eval(t: f64) -> f64 {
    horner(&Q10_COEFFS, t)
}

pub fn q7_eval(t: f64) -> f64 {
    horner(&Q7_COEFFS, t)
}

pub fn q4_eval(t: f64) -> f64 {
    horner(&Q4_COEFFS, t)
}

/// Bisection on a bracket with a strict sign change. Stops when the bracket
/// can no longer be halved in floating point or after `max_iter` halvings.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    Ok(if f(a).abs() < f(m).abs() { a } else { m })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    pub t_star: f64,
    pub t_star2: f64,
    pub beta_star: f64,
    pub beta_star2: f64,
}

impl CriticalPoints {
    /// Whether `beta` lies in the open window `(β*, β**)`.
    pub fn in_window(&self, beta: f64) -> bool {
        beta > self.beta_star && beta < self.beta_star2
    }

    pub fn regime(&self, beta: f64) -> Regime {
        if self.in_window(beta) {
            Regime::Window
        } else {
            Regime::Unique
        }
    }

    pub fn residuals(&self) -> (f64, f64) {
        (p9_eval(self.t_star), p9_eval(self.t_star2))
    }

    pub fn window_error(&self, beta: f64) -> Error {
        Error::OutsideWindow { beta, lo: self.beta_star, hi: self.beta_star2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Only the free boundary solution exists.
    Unique,
    /// Two boundary solutions exist; `β* < β < β**`.
    Window,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Unique => "Unique",
            Regime::Window => "Window",
        }
    }
}

/// Roots of `P9` in `(1.05, 1.1)` and `(1.5, 1.6)` and their `arccosh`.
pub fn critical_points() -> Result<CriticalPoints> {
    let t_star = bisect(p9_eval, P9_LOWER_BRACKET.0, P9_LOWER_BRACKET.1, 200)?;
    let t_star2 = bisect(p9_eval, P9_UPPER_BRACKET.0, P9_UPPER_BRACKET.1, 200)?;
    Ok(CriticalPoints { t_star, t_star2, beta_star: t_star.acosh(), beta_star2: t_star2.acosh() })
}

/// Process-wide cached [`critical_points`].
pub fn critical() -> &'static CriticalPoints {
    static CELL: OnceLock<CriticalPoints> = OnceLock::new();
    CELL.get_or_init(|| critical_points().expect("P9 brackets are fixed and valid"))
}

/// 400 log-spaced points on `[1e-3, 3]` plus 100 points strictly inside the window.
pub fn default_beta_grid() -> Vec<f64> {
    let cp = critical();
    let (lo, hi) = (1e-3f64.ln(), 3f64.ln());
    let mut grid: Vec<f64> = (0..400).map(|i| (lo + (hi - lo) * i as f64 / 399.0).exp()).collect();
    let width = cp.beta_star2 - cp.beta_star;
    grid.extend((1..=100).map(|i| cp.beta_star + width * i as f64 / 101.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClauseCheck {
    pub holds: bool,
    /// Positive when the inequality holds; the smallest slack across its parts.
    pub margin: f64,
}

impl ClauseCheck {
    fn less(lhs: f64, rhs: f64) -> Self {
        Self { holds: lhs < rhs, margin: rhs - lhs }
    }

    fn less_eq(lhs: f64, rhs: f64) -> Self {
        Self { holds: lhs <= rhs, margin: rhs - lhs }
    }

    fn both(a: Self, b: Self) -> Self {
        Self { holds: a.holds && b.holds, margin: a.margin.min(b.margin) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub beta: f64,
    pub in_window: bool,
    /// Clauses (i) through (viii); `None` where a clause only applies inside the window.
    pub clauses: [Option<ClauseCheck>; 8],
    /// `B1 - B2`, whose sign flips at the critical points.
    pub b1_minus_b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
}

impl LemmaReport {
    /// `(clause index, beta)` for every failed clause.
    pub fn failures(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .flat_map(|row| {
                row.clauses.iter().enumerate().filter_map(move |(i, c)| match c {
                    Some(c) if !c.holds => Some((i, row.beta)),
                    _ => None,
                })
            })
            .collect()
    }

    pub fn all_hold(&self) -> bool {
        self.failures().is_empty()
    }

    /// Consecutive grid cells `(β_i, β_{i+1})` across which `B1 - B2` changes sign.
    pub fn b1_b2_sign_changes(&self) -> Vec<(f64, f64)> {
        self.rows
            .windows(2)
            .filter(|w| (w[0].b1_minus_b2 > 0.0) != (w[1].b1_minus_b2 > 0.0))
            .map(|w| (w[0].beta, w[1].beta))
            .collect()
    }
}

pub const CLAUSE_NAMES: [&str; 8] = ["(i)", "(ii)", "(iii)", "(iv)", "(v)", "(vi)", "(vii)", "(viii)"];

/// Evaluates both sides of every clause of the auxiliary inequality lemma at each β.
pub fn verify_lemma_inequalities(grid: &[f64]) -> Result<LemmaReport> {
    let cp = critical();
    let rows = grid
        .iter()
        .map(|&beta| {
            let rc = RecursionCoeffs::new(beta)?;
            let inside = cp.in_window(beta);
            let (s, c) = (beta.sinh(), beta.cosh());
            let RecursionCoeffs { a1, b1, a2, b2, .. } = rc;

            let p9 = p9_eval(c);
            let clause1 = if inside { ClauseCheck::less(p9, 0.0) } else { ClauseCheck::less(0.0, p9) };
            let clause2 = ClauseCheck::less(a1, a2);
            let clause3 = if inside { ClauseCheck::less(b2, b1) } else { ClauseCheck::less_eq(b1, b2) };
            let clause4 = ClauseCheck::less(a1 + b1, a2 + b2);
            let clause5 = inside.then(|| {
                let d = rc.d.unwrap_or(f64::NAN);
                let e = rc.e.unwrap_or(f64::NAN);
                ClauseCheck::both(ClauseCheck::less(1.0, d), ClauseCheck::less(0.0, e))
            });
            let clause6 =
                ClauseCheck::both(ClauseCheck::less(a1 * a2, b1 * b2), ClauseCheck::less(a1 * b2, a2 * b1));
            let clause7 = inside.then(|| {
                ClauseCheck::both(
                    ClauseCheck::less(a2 * b1, a1 * a2 + 3.0 * a1 * b2 + b1 * b2),
                    ClauseCheck::less(2.0 * a1 * a2 + 3.0 * a1 * b2, a2 * b1),
                )
            });
            let mid = s * (1.0 + c);
            let clause8 = ClauseCheck::both(ClauseCheck::less(0.0, mid), ClauseCheck::less(mid, c.powi(3)));

            Ok(LemmaRow {
                beta,
                in_window: inside,
                clauses: [
                    Some(clause1),
                    Some(clause2),
                    Some(clause3),
                    Some(clause4),
                    clause5,
                    Some(clause6),
                    clause7,
                    Some(clause8),
                ],
                b1_minus_b2: b1 - b2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::DenseOp;

    #[test]
    fn hamiltonian_powers() {
        let h = edge_hamiltonian().matrix().clone();
        assert!(h.is_hermitian(0.0));
        let h2 = &h * &h;
        let h3 = &h2 * &h;
        assert!(h3.max_abs_diff(&h) < 1e-15);
        let expected = (&DenseOp::identity(2) - &pauli_pair(3).unwrap()).scale(Complex64::new(0.5, 0.0));
        assert!(h2.max_abs_diff(&expected) < 1e-15);
        assert_eq!(h.normalized_trace(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn gate_closed_form_matches_pauli_form() {
        for beta in [1e-3, 0.3, 0.5, 1.0, 2.5] {
            let gate = edge_gate(beta).unwrap();
            let literal = edge_gate_from_hamiltonian(beta);
            assert!(gate.matrix().max_abs_diff(&literal) < 1e-14, "beta = {beta}");
            assert!(gate.matrix().is_hermitian(0.0));
        }
    }

    #[test]
    fn gate_tends_to_identity() {
        let c = EdgeGateCoeffs::new(1e-9);
        assert!((c.k0 - 1.0).abs() < 1e-12 && c.k1.abs() < 1e-8 && c.k3.abs() < 1e-12);
        assert!(edge_gate(0.0).is_err());
        assert!(edge_gate(f64::NAN).is_err());
    }

    #[test]
    fn remark_identities_on_log_grid() {
        for i in 0..=60 {
            let beta = 1e-3 * 3000f64.powf(i as f64 / 60.0);
            let res = EdgeGateCoeffs::new(beta).identity_residuals(beta);
            let scale = beta.cosh().powi(2);
            for r in res {
                assert!(r.abs() <= 1e-14 * scale, "beta = {beta}, residual {r}");
            }
        }
    }

    #[test]
    fn squared_gate_partial_trace_is_cosh_squared() {
        let beta = 0.7;
        let k = edge_gate(beta).unwrap().matrix().clone();
        let red = (&k * &k).normalized_partial_trace(&[0]).unwrap();
        let expected = DenseOp::identity(1).scale(Complex64::new(beta.cosh().powi(2), 0.0));
        assert!(red.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn inverse_gate_inverts() {
        let beta = 0.9;
        let prod = edge_gate(beta).unwrap().matrix() * inverse_edge_gate(beta).matrix();
        assert!(prod.max_abs_diff(&DenseOp::identity(2)) < 1e-14);
    }

    #[test]
    fn coefficients_near_zero_beta() {
        let rc = RecursionCoeffs::new(1e-6).unwrap();
        assert!(rc.a1 < 1e-15 && rc.a2 < 1e-11 && rc.b1 < 1e-5);
        assert!((rc.b2 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn coefficient_derivatives_match_central_differences() {
        for beta in [0.2, 0.5, 1.0, 1.7] {
            let h = 1e-5;
            let p = RecursionCoeffs::new(beta + h).unwrap();
            let m = RecursionCoeffs::new(beta - h).unwrap();
            let (da1, db1, da2, db2) = RecursionCoeffs::derivatives(beta);
            let fd = [
                (p.a1 - m.a1) / (2.0 * h),
                (p.b1 - m.b1) / (2.0 * h),
                (p.a2 - m.a2) / (2.0 * h),
                (p.b2 - m.b2) / (2.0 * h),
            ];
            for (exact, approx) in [da1, db1, da2, db2].into_iter().zip(fd) {
                assert!((exact - approx).abs() <= 1e-7 * exact.abs().max(1.0), "beta {beta}: {exact} vs {approx}");
            }
        }
    }

    #[test]
    fn p9_values() {
        assert_eq!(p9_eval(1.0), 0.0);
        assert!(p9_eval(1.05) > 0.0 && p9_eval(1.1) < 0.0);
        assert!(p9_eval(1.5) < 0.0 && p9_eval(1.6) > 0.0);
        assert!(q4_eval(1.7) > 0.0 && q4_eval(1.8) < 0.0);
    }

    #[test]
    fn p9_factors_through_t_minus_one() {
        let q8 = [1.0, 0.0, -1.0, -2.0, -2.0, 0.0, 2.0, 2.0, 1.0];
        for i in 0..50 {
            let t = 0.5 + i as f64 * 0.05;
            assert!((p9_eval(t) - (t - 1.0) * horner(&q8, t)).abs() < 1e-10 * p9_eval(t).abs().max(1.0));
        }
    }

    #[test]
    fn critical_points_are_bracketed_roots() {
        let cp = critical_points().unwrap();
        assert!(cp.t_star > 1.05 && cp.t_star < 1.1);
        assert!(cp.t_star2 > 1.5 && cp.t_star2 < 1.6);
        let (r1, r2) = cp.residuals();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        assert!((cp.beta_star.cosh() - cp.t_star).abs() < 1e-14);
        assert!((cp.beta_star2.cosh() - cp.t_star2).abs() < 1e-14);
    }

    #[test]
    fn deflated_p9_changes_sign_exactly_twice_on_one_two() {
        let cp = critical();
        let q = |t: f64| p9_eval(t) / (t - 1.0);
        let mut changes = Vec::new();
        let mut prev = q(1.0 + 1e-4);
        for i in 2..10_000 {
            let t = 1.0 + i as f64 * 1e-4;
            let cur = q(t);
            if cur.signum() != prev.signum() {
                changes.push(t);
            }
            prev = cur;
        }
        assert_eq!(changes.len(), 2);
        assert!((changes[0] - cp.t_star).abs() <= 1e-4);
        assert!((changes[1] - cp.t_star2).abs() <= 1e-4);
    }

    #[test]
    fn bisect_rejects_missing_sign_change() {
        assert!(matches!(bisect(p9_eval, 1.2, 1.3, 200), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn d_and_e_inside_and_at_the_window_edges() {
        let cp = critical();
        let mid = 0.5 * (cp.beta_star + cp.beta_star2);
        let rc = RecursionCoeffs::new(mid).unwrap();
        assert!(rc.d.unwrap() > 1.0 && rc.e.unwrap() > 0.0);
        assert!(RecursionCoeffs::new(cp.beta_star).unwrap().d.is_none());
        assert!(RecursionCoeffs::new(cp.beta_star2).unwrap().d.is_none());
    }

    #[test]
    fn appendix_polynomial_identities() {
        for beta in [0.3, 0.5, 0.9, 1.5] {
            let rc = RecursionCoeffs::new(beta).unwrap();
            let (s, c) = (beta.sinh(), beta.cosh());
            let RecursionCoeffs { a1, b1, a2, b2, .. } = rc;
            let lhs7 = a1 * a2 + 3.0 * a1 * b2 - a2 * b1 + b1 * b2;
            assert!((lhs7 - s * c.powi(3) * q7_eval(c)).abs() < 1e-12 * lhs7.abs().max(1.0));
            let lhs4 = a2 * b1 - 3.0 * a1 * b2 - 2.0 * a1 * a2;
            assert!((lhs4 - s.powi(3) * c.powi(3) * q4_eval(c)).abs() < 1e-12 * lhs4.abs().max(1.0));
            assert_eq!(a2 + b2 > a1 + b1, q10_eval(c) > 0.0);
        }
    }

    #[test]
    fn lemma_clause_examples() {
        let report = verify_lemma_inequalities(&[0.5, 1.0]).unwrap();
        let at = |beta: f64| report.rows.iter().find(|r| r.beta == beta).unwrap();
        assert!(at(1.0).clauses[7].unwrap().holds);
        assert!(at(0.5).clauses[5].unwrap().holds);
        assert!(at(0.5).in_window && at(0.5).b1_minus_b2 > 0.0);
        assert!(report.all_hold());
    }

    #[test]
    fn lemma_holds_on_default_grid_with_two_flips() {
        let cp = critical();
        let report = verify_lemma_inequalities(&default_beta_grid()).unwrap();
        assert_eq!(report.failures(), vec![]);
        let flips = report.b1_b2_sign_changes();
        assert_eq!(flips.len(), 2);
        assert!(flips[0].0 < cp.beta_star && cp.beta_star < flips[0].1);
        assert!(flips[1].0 < cp.beta_star2 && cp.beta_star2 < flips[1].1);
    }
}
