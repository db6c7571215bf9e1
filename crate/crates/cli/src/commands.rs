use std::fmt;
use std::io::{self, Write};

use cayley_qmc::dynamics::{self, fixed_point_residual, DynPoint, MAX_STEPS_LIMIT};
use cayley_qmc::free_energy::{derivative_jump, f_closed, f_finite_n, CriticalPoint};
use cayley_qmc::model::{self, critical_points, default_beta_grid, p9_eval, verify_lemma_inequalities, RecursionCoeffs, CLAUSE_NAMES};
use cayley_qmc::spectral::{expectation_sigma1, quasi_equiv_gap, Boundary};
use cayley_qmc::verification::{self, Fault, Level};
use cayley_qmc::Error;

use crate::output::{num, opt_num, Table};
use crate::{BetaRange, Common, FaultArg, LevelArg};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MaxStepsExceeded { .. } | Error::BracketFailure { .. } | Error::AmbiguousBranch { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

enum Body {
    Table(Table),
    Text(String),
}

pub struct Report {
    body: Body,
    failure: Option<String>,
}

impl Report {
    fn table(t: Table) -> Self {
        Self { body: Body::Table(t), failure: None }
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    pub fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        match &self.body {
            Body::Table(t) => t.write_to(w),
            Body::Text(s) => writeln!(w, "{s}"),
        }
    }
}

fn table(command: &str, c: &Common, header: &[&'static str]) -> Table {
    let mut t = Table::new(header);
    t.meta("command", command);
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t.meta("seed", c.seed);
    t.meta("tol_abs", format!("{:e}", c.tol_abs));
    t.meta("tol_rel", format!("{:e}", c.tol_rel));
    t
}

fn check_beta(beta: f64) -> Result<(), CliError> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--beta must be finite and positive, got {beta}")))
    }
}

fn grid(r: &BetaRange) -> Result<Vec<f64>, CliError> {
    check_beta(r.beta_min)?;
    check_beta(r.beta_max)?;
    if r.beta_min > r.beta_max {
        return Err(CliError::Usage(format!("--beta-min {} exceeds --beta-max {}", r.beta_min, r.beta_max)));
    }
    if r.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if r.steps == 1 {
        return Ok(vec![r.beta_min]);
    }
    let width = r.beta_max - r.beta_min;
    Ok((0..r.steps).map(|i| r.beta_min + width * i as f64 / (r.steps - 1) as f64).collect())
}

fn range_meta(t: &mut Table, r: &BetaRange) {
    t.meta("beta_min", num(r.beta_min));
    t.meta("beta_max", num(r.beta_max));
    t.meta("steps", r.steps);
}

pub fn critical(c: &Common) -> Result<Report, CliError> {
    let cp = critical_points()?;
    let mut t = table("critical", c, &["root", "t", "beta", "p9_residual", "arccosh_residual"]);
    let mut worst = 0.0f64;
    for (name, tv, beta) in [("t_star", cp.t_star, cp.beta_star), ("t_star2", cp.t_star2, cp.beta_star2)] {
        let residual = p9_eval(tv).abs();
        worst = worst.max(residual);
        t.row(vec![name.into(), num(tv), num(beta), num(residual), num((beta.cosh() - tv).abs())]);
    }
    let mut report = Report::table(t);
    if worst >= c.tol_abs {
        report.failure = Some(format!("P9 residual {worst:e} exceeds tol_abs {:e}", c.tol_abs));
    }
    Ok(report)
}

pub fn sweep(c: &Common, r: &BetaRange) -> Result<Report, CliError> {
    let cp = model::critical();
    let mut t = table("sweep", c, &["beta", "regime", "n_fixed_points", "lambda2", "gap"]);
    range_meta(&mut t, r);
    t.meta("beta_star", num(cp.beta_star));
    t.meta("beta_star2", num(cp.beta_star2));
    for beta in grid(r)? {
        let n_fixed = dynamics::fixed_points(beta)?.len();
        let spectral = if cp.in_window(beta) { Some(quasi_equiv_gap(beta)?) } else { None };
        t.row(vec![
            num(beta),
            cp.regime(beta).as_str().into(),
            n_fixed.to_string(),
            opt_num(spectral.map(|g| g.lambda2)),
            opt_num(spectral.map(|g| g.epsilon0)),
        ]);
    }
    Ok(Report::table(t))
}

pub fn trajectory(c: &Common, beta: f64, x0: f64, y0: f64, max_steps: usize) -> Result<Report, CliError> {
    check_beta(beta)?;
    if max_steps == 0 || max_steps > MAX_STEPS_LIMIT {
        return Err(CliError::Usage(format!("--max-steps must lie in 1..={MAX_STEPS_LIMIT}")));
    }
    let result = dynamics::trajectory(DynPoint::new(x0, y0), beta, max_steps)?;
    let mut t = table("trajectory", c, &["step", "x", "y", "ratio"]);
    t.meta("beta", num(beta));
    t.meta("x0", num(x0));
    t.meta("y0", num(y0));
    t.meta("max_steps", max_steps);
    t.meta("outcome", result.outcome.label());
    if let Some(limit) = result.limit {
        t.meta("limit", format!("{} {}", num(limit.x), num(limit.y)));
    }
    for (k, p) in result.points.iter().enumerate() {
        t.row(vec![k.to_string(), num(p.x), num(p.y), num(p.ratio())]);
    }
    Ok(Report::table(t))
}

pub fn fixed_points(c: &Common, beta: f64) -> Result<Report, CliError> {
    check_beta(beta)?;
    let rc = RecursionCoeffs::new(beta)?;
    let points = dynamics::fixed_points(beta)?;
    let mut t = table("fixed-points", c, &["kind", "x", "y", "residual"]);
    t.meta("beta", num(beta));
    t.meta("regime", model::critical().regime(beta).as_str());
    let mut worst = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        let residual = fixed_point_residual(p, &rc);
        worst = worst.max(residual);
        t.row(vec![if i == 0 { "free" } else { "line2" }.into(), num(p.x), num(p.y), num(residual)]);
    }
    let mut report = Report::table(t);
    if worst >= c.tol_abs {
        report.failure = Some(format!("fixed-point residual {worst:e} exceeds tol_abs {:e}", c.tol_abs));
    }
    Ok(report)
}

pub fn correlation(c: &Common, beta: f64, nmax: u32) -> Result<Report, CliError> {
    check_beta(beta)?;
    let gap = quasi_equiv_gap(beta)?;
    let mut t = table("correlation", c, &["N", "phi_alpha0", "phi_gamma", "gap"]);
    t.meta("beta", num(beta));
    t.meta("nmax", nmax);
    t.meta("epsilon0", num(gap.epsilon0));
    t.meta("n0", gap.n0);
    t.meta("lambda2", num(gap.lambda2));
    t.meta("gamma_limit", num(gap.limit));
    for n in 0..=nmax {
        let a = expectation_sigma1(Boundary::Alpha0, beta, n)?;
        let g = expectation_sigma1(Boundary::Gamma, beta, n)?;
        t.row(vec![n.to_string(), num(a), num(g), num(g - a)]);
    }
    Ok(Report::table(t))
}

const SLOPE_STEP: f64 = 1e-6;

pub fn free_energy(c: &Common, r: &BetaRange, n: Option<u32>) -> Result<Report, CliError> {
    let betas = grid(r)?;
    if betas[0] <= SLOPE_STEP {
        return Err(CliError::Usage(format!("--beta-min must exceed the slope step {SLOPE_STEP:e}")));
    }
    let header: &[&'static str] = if n.is_some() { &["beta", "F", "F_prime_numeric", "F_n"] } else { &["beta", "F", "F_prime_numeric"] };
    let mut t = table("free-energy", c, header);
    range_meta(&mut t, r);
    if let Some(n) = n {
        t.meta("n", n);
    }
    for at in [CriticalPoint::BetaStar, CriticalPoint::BetaStar2] {
        let j = derivative_jump(at)?;
        t.meta(if at == CriticalPoint::BetaStar { "jump_beta_star" } else { "jump_beta_star2" }, format!("{} at beta {}", num(j.closed), num(j.beta)));
    }
    for beta in betas {
        let slope = (f_closed(beta + SLOPE_STEP)? - f_closed(beta - SLOPE_STEP)?) / (2.0 * SLOPE_STEP);
        let mut row = vec![num(beta), num(f_closed(beta)?), num(slope)];
        if let Some(n) = n {
            row.push(num(f_finite_n(beta, n)?));
        }
        t.row(row);
    }
    Ok(Report::table(t))
}

pub fn inequalities(c: &Common) -> Result<Report, CliError> {
    let report = verify_lemma_inequalities(&default_beta_grid())?;
    let mut header = vec!["beta", "in_window"];
    header.extend(CLAUSE_NAMES.iter().copied());
    header.push("b1_minus_b2");
    let mut t = table("inequalities", c, &header);
    let flips = report.b1_b2_sign_changes();
    t.meta("grid_points", report.rows.len());
    t.meta("b1_b2_sign_changes", flips.iter().map(|(a, b)| format!("[{} {}]", num(*a), num(*b))).collect::<Vec<_>>().join(" "));
    t.meta("cells", "clause margin, positive when the clause holds; empty where the clause does not apply");
    for row in &report.rows {
        let mut cells = vec![num(row.beta), row.in_window.to_string()];
        cells.extend(row.clauses.iter().map(|cl| opt_num(cl.map(|cl| cl.margin))));
        cells.push(num(row.b1_minus_b2));
        t.row(cells);
    }
    let failures = report.failures();
    let mut out = Report::table(t);
    if let Some(&(clause, beta)) = failures.first() {
        out.failure = Some(format!("{} clause failures, first {} at beta {beta}", failures.len(), CLAUSE_NAMES[clause]));
    }
    Ok(out)
}

pub fn verify(c: &Common, level: LevelArg, fault: Option<FaultArg>) -> Result<Report, CliError> {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let fault = fault.map(|f| match f {
        FaultArg::FlipK1 => Fault::FlipK1Sign,
    });
    let report = verification::run(level, c.seed, fault);
    let mut text = format!(
        "# command: verify\n# version: {}\n# level: {level:?}\n# seed: {}\n# tol_abs: {:e}\n# tol_rel: {:e}\n",
        env!("CARGO_PKG_VERSION"),
        c.seed,
        c.tol_abs,
        c.tol_rel
    );
    text.push_str("# check tolerances are the pinned acceptance values shown per line\n");
    text.push_str(&report.to_string());
    let failure = (!report.all_passed()).then(|| report.failures().iter().map(|f| f.name).collect::<Vec<_>>().join(", "));
    Ok(Report { body: Body::Text(text), failure })
}
