//! Transfer of boundary fields through three successors, the 2×2 correlation
//! matrix `A` it induces at the second fixed point, and expectation values of
//! the σ₁ probe observable.
//!
//! Fields here live in `span{σ0, σ1}`, so every partial trace reduces to a
//! bilinear map on coefficient pairs. For a parent accumulator `g` and a child
//! field `h`, the one-edge map is
//!
//! ```text
//! tr_child[K (g ⊗ h) K]      = (c(c g0 h0 + s g1 h1), c g1 h0 + s g0 h1)
//! tr_child[K (g ⊗ h) K σ1]   = (c g0 h1 + s g1 h0, c(c g1 h1 + s g0 h0))
//! ```
//!
//! with `c = cosh β`, `s = sinh β`. Three successors compose this map with the
//! innermost (third) edge first.

use crate::dynamics::DynPoint;
use crate::error::{Error, Result};
use crate::model::{check_beta, critical, RecursionCoeffs};
use crate::pauli::PauliVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryField {
    pub h0: f64,
    pub h1: f64,
}

impl BoundaryField {
    pub const IDENTITY: BoundaryField = BoundaryField { h0: 1.0, h1: 0.0 };

    pub fn new(h0: f64, h1: f64) -> Self {
        Self { h0, h1 }
    }

    /// Positive definite as a 2×2 operator: eigenvalues `h0 ± h1` both positive.
    pub fn is_positive(&self) -> bool {
        self.h0 > self.h1.abs()
    }

    pub fn check_positive(&self) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(Error::NonPositiveField { h0: self.h0, h1: self.h1 })
        }
    }

    pub fn to_pauli(&self) -> PauliVector {
        PauliVector::real([self.h0, self.h1, 0.0, 0.0])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.h0 - other.h0).abs().max((self.h1 - other.h1).abs())
    }

    /// `α0 σ0` with `α0 = 1/cosh³β`.
    pub fn alpha0(beta: f64) -> Self {
        Self::new(1.0 / beta.cosh().powi(3), 0.0)
    }

    /// `γ0 σ0 + γ1 σ1` with `γ0 = √(DE)`, `γ1 = √E`; only strictly inside the window.
    pub fn gamma(beta: f64) -> Result<Self> {
        let rc = window_coeffs(beta)?;
        let (g0, g1) = rc.gamma().ok_or_else(|| critical().window_error(beta))?;
        Ok(Self::new(g0, g1))
    }
}

impl From<DynPoint> for BoundaryField {
    fn from(p: DynPoint) -> Self {
        Self::new(p.x, p.y)
    }
}

fn window_coeffs(beta: f64) -> Result<RecursionCoeffs> {
    check_beta(beta)?;
    let cp = critical();
    if !cp.in_window(beta) {
        return Err(cp.window_error(beta));
    }
    RecursionCoeffs::new(beta)
}

/// `tr_child[K (g ⊗ h) K]` for one edge.
pub fn edge_transfer(g: BoundaryField, h: BoundaryField, beta: f64) -> BoundaryField {
    let (s, c) = (beta.sinh(), beta.cosh());
    BoundaryField::new(c * (c * g.h0 * h.h0 + s * g.h1 * h.h1), c * g.h1 * h.h0 + s * g.h0 * h.h1)
}

/// `tr_child[K (g ⊗ h) K σ1^(child)]` for one edge.
pub fn edge_transfer_observed(g: BoundaryField, h: BoundaryField, beta: f64) -> BoundaryField {
    let (s, c) = (beta.sinh(), beta.cosh());
    BoundaryField::new(c * g.h0 * h.h1 + s * g.h1 * h.h0, c * (c * g.h1 * h.h1 + s * g.h0 * h.h0))
}

/// Parent field after tracing out three successors carrying `h_a`, `h_b`, `h_c`
/// (in forward order), written out as the closed trilinear form.
pub fn transfer_three(h_a: BoundaryField, h_b: BoundaryField, h_c: BoundaryField, beta: f64) -> BoundaryField {
    let (s, c) = (beta.sinh(), beta.cosh());
    let (a, b, d) = (h_a, h_b, h_c);
    let c2 = c * c;
    let c3 = c2 * c;
    let h0 = a.h0 * b.h0 * d.h0 * c3 * c3
        + a.h0 * b.h1 * d.h1 * s * s * c3
        + a.h1 * b.h1 * d.h0 * s * s * c3
        + a.h1 * b.h0 * d.h1 * s * s * c2;
    let h1 = a.h0 * b.h0 * d.h1 * s * c2
        + a.h0 * b.h1 * d.h0 * s * c3
        + a.h1 * b.h0 * d.h0 * s * c2 * c2
        + a.h1 * b.h1 * d.h1 * s.powi(3) * c;
    BoundaryField::new(h0, h1)
}

/// The same trace, obtained by composing [`edge_transfer`] edge by edge.
pub fn transfer_three_composed(
    h_a: BoundaryField,
    h_b: BoundaryField,
    h_c: BoundaryField,
    beta: f64,
) -> BoundaryField {
    let inner = edge_transfer(BoundaryField::IDENTITY, h_c, beta);
    edge_transfer(edge_transfer(inner, h_b, beta), h_a, beta)
}

/// Parent field when every successor carries `h` and σ1 is attached to the
/// first one.
pub fn observed_vector(h: BoundaryField, beta: f64) -> BoundaryField {
    let inner = edge_transfer(BoundaryField::IDENTITY, h, beta);
    edge_transfer_observed(edge_transfer(inner, h, beta), h, beta)
}

/// Closed form of [`observed_vector`] at `h = (γ0, γ1)`.
pub fn observed_vector_gamma_closed_form(g0: f64, g1: f64, beta: f64) -> BoundaryField {
    let (s, c) = (beta.sinh(), beta.cosh());
    let h0 = g0 * g0 * g1 * (s * s * c * (1.0 + c) + c.powi(5)) + g1.powi(3) * s * s * c * c;
    let h1 = g0.powi(3) * s * c.powi(5) + g0 * g1 * g1 * (s * c.powi(3) * (1.0 + c) + s.powi(3) * c * c);
    BoundaryField::new(h0, h1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrMatrix {
    pub beta: f64,
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    /// `det A`, the second eigenvalue (the first is 1).
    pub lambda2: f64,
    pub eigvec1: (f64, f64),
    pub eigvec2: (f64, f64),
}

impl CorrMatrix {
    fn with_entries(beta: f64, rc: &RecursionCoeffs, m: [[f64; 2]; 2]) -> Self {
        let (s, c) = (beta.sinh(), beta.cosh());
        let den = s * c * c * (1.0 + c).powi(2);
        let x1 = ((rc.a2 - rc.a1) * (rc.b1 - rc.b2)).sqrt() / den;
        let y1 = (rc.b1 - rc.b2) / den;
        Self {
            beta,
            a11: m[0][0],
            a12: m[0][1],
            a21: m[1][0],
            a22: m[1][1],
            lambda2: m[0][0] * m[1][1] - m[0][1] * m[1][0],
            eigvec1: (x1, y1),
            eigvec2: (-y1, x1 / s),
        }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a11 * v.0 + self.a12 * v.1, self.a21 * v.0 + self.a22 * v.1)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let (a, b) = (self.entries(), other.entries());
        (0..4).map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).abs()).fold(0.0, f64::max)
    }
}

/// `A` from the fixed-point field `γ`:
/// `[[c⁶γ0² + s²c³γ1², γ0γ1 s²c²(1+c)], [γ0γ1 s c²(1+c), s c⁴γ0² + s³c γ1²]]`.
pub fn corr_matrix(beta: f64) -> Result<CorrMatrix> {
    let rc = window_coeffs(beta)?;
    let (g0, g1) = rc.gamma().ok_or_else(|| critical().window_error(beta))?;
    let (s, c) = (beta.sinh(), beta.cosh());
    let (q0, q1, q01) = (g0 * g0, g1 * g1, g0 * g1);
    let m = [
        [c.powi(6) * q0 + s * s * c.powi(3) * q1, q01 * s * s * c * c * (1.0 + c)],
        [q01 * s * c * c * (1.0 + c), s * c.powi(4) * q0 + s.powi(3) * c * q1],
    ];
    Ok(CorrMatrix::with_entries(beta, &rc, m))
}

/// `A` in the form that only uses `A1, B1, A2, B2`.
pub fn corr_matrix_alt(beta: f64) -> Result<CorrMatrix> {
    let rc = window_coeffs(beta)?;
    let (s, c) = (beta.sinh(), beta.cosh());
    let p = (1.0 + c).powi(2);
    let root = ((rc.a2 - rc.a1) * (rc.b1 - rc.b2)).sqrt();
    let m = [
        [c * (s + c.powi(3)) / (s * p), root / (s * c * c * p)],
        [root / (s * s * c * c * p), (s + c.powi(3)) / (c * p)],
    ];
    Ok(CorrMatrix::with_entries(beta, &rc, m))
}

pub fn trace_closed_form(beta: f64) -> f64 {
    let (s, c) = (beta.sinh(), beta.cosh());
    (s + c * c) * (s + c.powi(3)) / (s * c * (1.0 + c).powi(2))
}

pub fn det_closed_form(beta: f64) -> f64 {
    let (s, c) = (beta.sinh(), beta.cosh());
    (s * s + c.powi(5) - s * c * (1.0 + c)) / (s * c * (1.0 + c).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: (f64, f64),
    pub v2: (f64, f64),
}

impl Eigen {
    /// `(‖A v1 − λ1 v1‖∞, ‖A v2 − λ2 v2‖∞)`.
    pub fn residuals(&self, a: &CorrMatrix) -> (f64, f64) {
        let res = |v: (f64, f64), l: f64| {
            let w = a.apply(v);
            (w.0 - l * v.0).abs().max((w.1 - l * v.1).abs())
        };
        (res(self.v1, self.lambda1), res(self.v2, self.lambda2))
    }
}

pub fn eigen(a: &CorrMatrix) -> Eigen {
    Eigen { lambda1: 1.0, lambda2: a.lambda2, v1: a.eigvec1, v2: a.eigvec2 }
}

/// `Aⁿ` from the eigen-decomposition, exact in `λ2ⁿ`.
pub fn matrix_power(a: &CorrMatrix, n: u32) -> [[f64; 2]; 2] {
    if n == 0 {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let s = a.beta.sinh();
    let (x1, y1) = a.eigvec1;
    let den = x1 * x1 + y1 * y1 * s;
    let ln = a.lambda2.powi(n as i32);
    [
        [(x1 * x1 + ln * y1 * y1 * s) / den, x1 * y1 * s * (1.0 - ln) / den],
        [x1 * y1 * (1.0 - ln) / den, (ln * x1 * x1 + y1 * y1 * s) / den],
    ]
}

/// `Aⁿ` by `n` successive multiplications; the cross-check for [`matrix_power`].
pub fn matrix_power_by_multiplication(a: &CorrMatrix, n: u32) -> [[f64; 2]; 2] {
    let m = a.entries();
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..n {
        let mut next = [[0.0; 2]; 2];
        for (i, row) in next.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = acc[i][0] * m[0][j] + acc[i][1] * m[1][j];
            }
        }
        acc = next;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `w0 = σ0/α0`, every boundary field `α0 σ0`.
    Alpha0,
    /// `w0 = σ0/γ0`, every boundary field `γ0 σ0 + γ1 σ1`.
    Gamma,
}

impl Boundary {
    pub fn field(&self, beta: f64) -> Result<BoundaryField> {
        match self {
            Boundary::Alpha0 => Ok(BoundaryField::alpha0(beta)),
            Boundary::Gamma => BoundaryField::gamma(beta),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Boundary::Alpha0 => "alpha0",
            Boundary::Gamma => "gamma",
        }
    }
}

/// Expectation of σ1 placed on the first vertex of level `n + 1`, all other
/// sites carrying the identity.
pub fn expectation_sigma1(boundary: Boundary, beta: f64, n: u32) -> Result<f64> {
    match boundary {
        Boundary::Alpha0 => expectation_sigma1_by_transfer(boundary, beta, n),
        Boundary::Gamma => {
            let a = corr_matrix(beta)?;
            let h = BoundaryField::gamma(beta)?;
            let v = observed_vector(h, beta);
            let p = matrix_power(&a, n);
            Ok((p[0][0] * v.h0 + p[0][1] * v.h1) / h.h0)
        }
    }
}

/// The same expectation obtained by pushing the observed field up the tree
/// with [`transfer_three`] `n` times, then pairing with `w0 = σ0/h0`.
pub fn expectation_sigma1_by_transfer(boundary: Boundary, beta: f64, n: u32) -> Result<f64> {
    check_beta(beta)?;
    let h = boundary.field(beta)?;
    let mut v = observed_vector(h, beta);
    for _ in 0..n {
        v = transfer_three(v, h, h, beta);
    }
    Ok(v.h0 / h.h0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiEquivGap {
    pub epsilon0: f64,
    pub n0: u32,
    /// `N → ∞` limit of the Gamma expectation.
    pub limit: f64,
    /// Coefficient of `λ2ᴺ` in the Gamma expectation.
    pub transient: f64,
    pub lambda2: f64,
}

impl QuasiEquivGap {
    /// `limit + transient λ2ᴺ`.
    pub fn gamma_expectation(&self, n: u32) -> f64 {
        self.limit + self.transient * self.lambda2.powi(n as i32)
    }
}

/// Half the limiting Gamma expectation, and the first `N0` past which the
/// transient stays below it.
pub fn quasi_equiv_gap(beta: f64) -> Result<QuasiEquivGap> {
    let a = corr_matrix(beta)?;
    let h = BoundaryField::gamma(beta)?;
    let v = observed_vector(h, beta);
    let s = beta.sinh();
    let (x1, y1) = a.eigvec1;
    let den = h.h0 * (x1 * x1 + y1 * y1 * s);
    let limit = (x1 * x1 * v.h0 + x1 * y1 * s * v.h1) / den;
    let transient = (y1 * y1 * s * v.h0 - x1 * y1 * s * v.h1) / den;
    let epsilon0 = limit / 2.0;
    let mut n0 = 0u32;
    while (transient * a.lambda2.powi(n0 as i32)).abs() > epsilon0 {
        n0 += 1;
    }
    Ok(QuasiEquivGap { epsilon0, n0, limit, transient, lambda2: a.lambda2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::edge_gate;
    use crate::pauli::{kron_chain, pauli, DenseOp};
    use num_complex::Complex64;

    const BETA_IN: f64 = 0.5;

    fn dense_edge_map(g: BoundaryField, h: BoundaryField, beta: f64, observed: bool) -> BoundaryField {
        let k = edge_gate(beta).unwrap().matrix().clone();
        let gh = kron_chain(&[g.to_pauli().to_matrix(), h.to_pauli().to_matrix()]).unwrap();
        let mut m = &(&k * &gh) * &k;
        if observed {
            let obs = kron_chain(&[DenseOp::identity(1), pauli(1).unwrap()]).unwrap();
            m = &m * &obs;
        }
        let red = PauliVector::from_matrix(&m.normalized_partial_trace(&[0]).unwrap()).unwrap();
        assert!(red.c[2].norm() < 1e-14 && red.c[3].norm() < 1e-14);
        BoundaryField::new(red.c[0].re, red.c[1].re)
    }

    #[test]
    fn edge_maps_match_dense_partial_trace() {
        let cases = [(0.3, 0.1, 0.9, -0.4), (1.0, 0.0, 0.5, 0.25), (0.2, -0.7, 1.3, 0.6)];
        for beta in [0.3, 0.9] {
            for (g0, g1, h0, h1) in cases {
                let (g, h) = (BoundaryField::new(g0, g1), BoundaryField::new(h0, h1));
                assert!(edge_transfer(g, h, beta).max_abs_diff(&dense_edge_map(g, h, beta, false)) < 1e-13);
                assert!(
                    edge_transfer_observed(g, h, beta).max_abs_diff(&dense_edge_map(g, h, beta, true)) < 1e-13
                );
            }
        }
    }

    #[test]
    fn transfer_three_examples() {
        let beta = 0.7;
        let one = BoundaryField::IDENTITY;
        let r = transfer_three(one, one, one, beta);
        assert!((r.h0 - beta.cosh().powi(6)).abs() < 1e-13 && r.h1 == 0.0);

        let a0 = BoundaryField::alpha0(beta);
        let r = transfer_three(BoundaryField::new(0.0, 0.4), a0, a0, beta);
        let want = a0.h0 * a0.h0 * 0.4 * beta.sinh() * beta.cosh().powi(4);
        assert_eq!(r.h0, 0.0);
        assert!((r.h1 - want).abs() < 1e-14);
    }

    #[test]
    fn closed_and_composed_transfers_agree() {
        let fields = [BoundaryField::new(0.8, 0.3), BoundaryField::new(1.1, -0.2), BoundaryField::new(0.4, 0.35)];
        for beta in [0.2, 0.5, 1.4] {
            let [a, b, c] = fields;
            let closed = transfer_three(a, b, c, beta);
            let composed = transfer_three_composed(a, b, c, beta);
            assert!(closed.max_abs_diff(&composed) < 1e-13 * closed.h0.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_is_reproduced_across_the_window() {
        let cp = critical();
        for i in 1..=20 {
            let beta = cp.beta_star + (cp.beta_star2 - cp.beta_star) * i as f64 / 21.0;
            let g = BoundaryField::gamma(beta).unwrap();
            assert!(transfer_three(g, g, g, beta).max_abs_diff(&g) < 1e-10, "beta {beta}");
        }
    }

    #[test]
    fn transfer_with_two_gamma_slots_is_the_matrix() {
        let a = corr_matrix(BETA_IN).unwrap();
        let g = BoundaryField::gamma(BETA_IN).unwrap();
        let h = BoundaryField::new(0.37, -0.12);
        let r = transfer_three(h, g, g, BETA_IN);
        let w = a.apply((h.h0, h.h1));
        assert!((r.h0 - w.0).abs() < 1e-14 && (r.h1 - w.1).abs() < 1e-14);
    }

    #[test]
    fn observed_vector_closed_form_agrees() {
        for beta in [0.45, 0.5, 0.8] {
            let g = BoundaryField::gamma(beta).unwrap();
            let composed = observed_vector(g, beta);
            let closed = observed_vector_gamma_closed_form(g.h0, g.h1, beta);
            assert!(composed.max_abs_diff(&closed) < 1e-13);
        }
    }

    #[test]
    fn matrix_forms_trace_and_det() {
        let a = corr_matrix(BETA_IN).unwrap();
        let b = corr_matrix_alt(BETA_IN).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!((a.trace() - trace_closed_form(BETA_IN)).abs() < 1e-12);
        assert!((a.det() - det_closed_form(BETA_IN)).abs() < 1e-13);
        assert!((a.trace() - a.det() - 1.0).abs() < 1e-12);
        assert!(a.trace() > 1.0 && a.trace() < 2.0);
        assert!(a.det() > 0.0 && a.det() < 1.0);
    }

    #[test]
    fn eigen_pairs() {
        let a = corr_matrix(BETA_IN).unwrap();
        let e = eigen(&a);
        let (r1, r2) = e.residuals(&a);
        assert!(r1 < 1e-11 && r2 < 1e-11);
        assert!(e.lambda2 > 0.0 && e.lambda2 < 1.0);
        assert_eq!(e.v2, (-e.v1.1, e.v1.0 / BETA_IN.sinh()));
    }

    #[test]
    fn powers_agree_with_multiplication() {
        let a = corr_matrix(BETA_IN).unwrap();
        assert_eq!(matrix_power(&a, 0), [[1.0, 0.0], [0.0, 1.0]]);
        let one = matrix_power(&a, 1);
        let e = a.entries();
        for i in 0..2 {
            for j in 0..2 {
                assert!((one[i][j] - e[i][j]).abs() < 1e-13);
            }
        }
        let (p, q) = (matrix_power(&a, 7), matrix_power_by_multiplication(&a, 7));
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[i][j] - q[i][j]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn powers_approach_the_rank_one_projector() {
        let a = corr_matrix(BETA_IN).unwrap();
        let limit = matrix_power(&a, 2000);
        let mut prev = f64::INFINITY;
        for n in [5u32, 10, 20, 40] {
            let p = matrix_power(&a, n);
            let dev = (0..4).map(|i| (p[i / 2][i % 2] - limit[i / 2][i % 2]).abs()).fold(0.0, f64::max);
            assert!(dev < prev);
            assert!(dev <= 10.0 * a.lambda2.powi(n as i32));
            prev = dev;
        }
    }

    #[test]
    fn alpha0_expectation_is_zero() {
        for n in 1..6 {
            assert_eq!(expectation_sigma1(Boundary::Alpha0, BETA_IN, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn gamma_expectation_routes_agree() {
        for n in 1..12 {
            let closed = expectation_sigma1(Boundary::Gamma, BETA_IN, n).unwrap();
            let pushed = expectation_sigma1_by_transfer(Boundary::Gamma, BETA_IN, n).unwrap();
            assert!((closed - pushed).abs() < 1e-12, "n {n}");
        }
    }

    #[test]
    fn gamma_requires_window() {
        assert!(matches!(expectation_sigma1(Boundary::Gamma, 1.2, 1), Err(Error::OutsideWindow { .. })));
        assert!(corr_matrix(0.2).is_err());
        assert!(quasi_equiv_gap(2.0).is_err());
    }

    #[test]
    fn gap_certificate() {
        let gap = quasi_equiv_gap(BETA_IN).unwrap();
        assert!(gap.epsilon0 > 0.0);
        for n in gap.n0 + 1..gap.n0 + 40 {
            let v = expectation_sigma1(Boundary::Gamma, BETA_IN, n).unwrap();
            assert!(v.abs() >= gap.epsilon0);
            assert!((v - gap.gamma_expectation(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_sequence_contracts_at_rate_lambda2() {
        let a = corr_matrix(BETA_IN).unwrap();
        let vals: Vec<f64> = (1..=30).map(|n| expectation_sigma1(Boundary::Gamma, BETA_IN, n).unwrap()).collect();
        for w in vals.windows(3).take(15) {
            let ratio = (w[2] - w[1]) / (w[1] - w[0]);
            assert!((ratio - a.lambda2).abs() < 1e-6, "{ratio} vs {}", a.lambda2);
        }
    }

    #[test]
    fn field_positivity() {
        assert!(BoundaryField::new(1.0, 0.5).is_positive());
        assert!(BoundaryField::new(1.0, -1.0).check_positive().is_err());
        assert_eq!(BoundaryField::new(0.8, 0.3).to_pauli().c[1], Complex64::new(0.3, 0.0));
    }
}
