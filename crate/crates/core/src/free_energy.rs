//! The thermodynamic function `F(β)` built from the two boundary solutions.
//!
//! Outside the window the free boundary `α0 = 1/cosh³β` is used and
//! `βF = −4 log α0`; inside it the mixed boundary with `γ0` gives
//! `βF = −2 log(α0 γ0)`. Writing `γ0² = (A2 − A1)/(A2 B1 − A1 B2)` keeps the
//! inside branch finite at the window edges, where it meets `α0² = 1/B2`.

use crate::error::Result;
use crate::model::{check_beta, critical, RecursionCoeffs, Regime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyPoint {
    pub beta: f64,
    pub f: f64,
    pub regime: Regime,
    pub f_prime_left: Option<f64>,
    pub f_prime_right: Option<f64>,
}

/// `γ0²` in the form that stays finite where `B1 = B2`.
pub fn gamma0_squared(rc: &RecursionCoeffs) -> f64 {
    (rc.a2 - rc.a1) / (rc.a2 * rc.b1 - rc.a1 * rc.b2)
}

fn beta_f(beta: f64, regime: Regime) -> Result<f64> {
    let rc = RecursionCoeffs::new(beta)?;
    let log_alpha0 = -3.0 * beta.cosh().ln();
    Ok(match regime {
        Regime::Unique => -4.0 * log_alpha0,
        Regime::Window => -2.0 * log_alpha0 - gamma0_squared(&rc).ln(),
    })
}

/// Piecewise closed form of `F(β)`.
pub fn f_closed(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(beta_f(beta, critical().regime(beta))? / beta)
}

/// `|V_n| = (3^{n+1} − 1)/2`, the number of vertices of `Λ_n`.
pub fn volume(n: u32) -> f64 {
    (3f64.powi(n as i32 + 1) - 1.0) / 2.0
}

/// `Fₙ` from the exact finite-volume trace.
pub fn f_finite_n(beta: f64, n: u32) -> Result<f64> {
    check_beta(beta)?;
    let rc = RecursionCoeffs::new(beta)?;
    let log_alpha0 = -3.0 * beta.cosh().ln();
    let boundary = 3f64.powi(n as i32 + 1);
    let bf = match critical().regime(beta) {
        Regime::Unique => (1.0 - 2.0 * boundary) * log_alpha0,
        Regime::Window => {
            let log_gamma0 = 0.5 * gamma0_squared(&rc).ln();
            log_alpha0 - boundary * (log_alpha0 + log_gamma0)
        }
    };
    Ok(bf / volume(n) / beta)
}

/// `F'(β)` of the branch `regime`, differentiated by hand.
pub fn f_prime_branch(beta: f64, regime: Regime) -> Result<f64> {
    check_beta(beta)?;
    let f = beta_f(beta, regime)? / beta;
    let dbf = match regime {
        Regime::Unique => 12.0 * beta.tanh(),
        Regime::Window => {
            let rc = RecursionCoeffs::new(beta)?;
            let (da1, db1, da2, db2) = RecursionCoeffs::derivatives(beta);
            let num = rc.a2 - rc.a1;
            let den = rc.a2 * rc.b1 - rc.a1 * rc.b2;
            let dnum = da2 - da1;
            let dden = da2 * rc.b1 + rc.a2 * db1 - da1 * rc.b2 - rc.a1 * db2;
            6.0 * beta.tanh() - (dnum / num - dden / den)
        }
    };
    Ok((dbf - f) / beta)
}

pub fn free_energy_point(beta: f64) -> Result<FreeEnergyPoint> {
    let cp = critical();
    let left = if beta > cp.beta_star && beta <= cp.beta_star2 { Regime::Window } else { Regime::Unique };
    let right = if beta >= cp.beta_star && beta < cp.beta_star2 { Regime::Window } else { Regime::Unique };
    Ok(FreeEnergyPoint {
        beta,
        f: f_closed(beta)?,
        regime: cp.regime(beta),
        f_prime_left: Some(f_prime_branch(beta, left)?),
        f_prime_right: Some(f_prime_branch(beta, right)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalPoint {
    BetaStar,
    BetaStar2,
}

impl CriticalPoint {
    pub fn beta(&self) -> f64 {
        match self {
            CriticalPoint::BetaStar => critical().beta_star,
            CriticalPoint::BetaStar2 => critical().beta_star2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeJump {
    pub beta: f64,
    /// `F'(inside) − F'(outside)` from `A2(B1' − B2')/((A2 − A1) B2 β)`.
    pub closed: f64,
    /// The same difference from one-sided central differences of `F`.
    pub numeric: f64,
    pub slope_inside: f64,
    pub slope_outside: f64,
}

impl DerivativeJump {
    pub fn relative_error(&self) -> f64 {
        ((self.numeric - self.closed) / self.closed).abs()
    }
}

/// Step of the one-sided difference quotients used by [`derivative_jump`].
pub const JUMP_STEP: f64 = 1e-6;

/// Jump of `F'` across a critical point, measured as window side minus outside.
pub fn derivative_jump(at: CriticalPoint) -> Result<DerivativeJump> {
    let beta = at.beta();
    let rc = RecursionCoeffs::new(beta)?;
    let (_, db1, _, db2) = RecursionCoeffs::derivatives(beta);
    let closed = rc.a2 * (db1 - db2) / ((rc.a2 - rc.a1) * rc.b2 * beta);

    let h = JUMP_STEP;
    let slope = |centre: f64| -> Result<f64> { Ok((f_closed(centre + h)? - f_closed(centre - h)?) / (2.0 * h)) };
    let (below, above) = (slope(beta - 2.0 * h)?, slope(beta + 2.0 * h)?);
    let (slope_inside, slope_outside) = match at {
        CriticalPoint::BetaStar => (above, below),
        CriticalPoint::BetaStar2 => (below, above),
    };
    Ok(DerivativeJump { beta, closed, numeric: slope_inside - slope_outside, slope_inside, slope_outside })
}
