//! Brute-force finite-volume states on small balls of the tree.
//!
//! For boundary data `(w0, h)` the density on `Λ_n` is `W = K K*` with
//!
//! ```text
//! K = w0^{1/2} K_[0,1] K_[1,2] ⋯ K_[n-1,n] ∏_{x ∈ W_n} h_x^{1/2}
//! ```
//!
//! and `K_[m-1,m]` the product of edge gates from level `m-1` to level `m`,
//! vertices and successors both in forward order. Nothing here forms `W` as a
//! matrix: the normalized trace `tr(K K* a) = 2^{-N} Σ_i ⟨K e_i, a K e_i⟩` is
//! accumulated one basis vector at a time, applying the gates to a state
//! vector. Sites are numbered as in [`crate::tree::ball`], site 0 being the
//! most significant bit.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_beta, edge_gate, RecursionCoeffs};
use crate::pauli::{kron_chain, pauli, DenseOp, PauliVector, TwoSiteOperator};
use crate::spectral::{transfer_three, BoundaryField};
use crate::tree::{ball, level_set, successors, volume_sizes, TreeCoord};

/// Hard cap on the number of sites in one contraction.
pub const MAX_SITES: usize = 16;
/// Order of the tree the oracle builds.
pub const K: u32 = 3;
/// Seed for sampled observable sets when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PRECHECK_TOL: f64 = 1e-10;

type Mat2 = [[Complex64; 2]; 2];
type Mat4 = [[Complex64; 4]; 4];

fn mat4(op: &DenseOp) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = op.get(r, c);
        }
    }
    m
}

/// Ordered two-site gates on labelled tree sites.
#[derive(Debug, Clone)]
pub struct GateProgram {
    pub gates: Vec<(TreeCoord, TreeCoord, TwoSiteOperator)>,
    pub sites: Vec<TreeCoord>,
    site_index: HashMap<TreeCoord, usize>,
}

impl GateProgram {
    /// `K_[0,1] ⋯ K_[n-1,n]` on `Λ_n`, in product order.
    pub fn edges(n: usize, beta: f64) -> Result<Self> {
        let gate = edge_gate(beta)?;
        let sites = ball(n, K);
        if sites.len() > MAX_SITES {
            return Err(Error::VolumeTooLarge { sites: sites.len(), cap: MAX_SITES });
        }
        let gates = (0..n)
            .flat_map(|m| level_set(m, K).vertices)
            .flat_map(|x| successors(&x, K).into_iter().map(move |y| (x.clone(), y)))
            .map(|(x, y)| (x, y, gate.clone()))
            .collect();
        Ok(Self::with_sites(sites, gates))
    }

    pub fn with_sites(sites: Vec<TreeCoord>, gates: Vec<(TreeCoord, TreeCoord, TwoSiteOperator)>) -> Self {
        let site_index = sites.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        Self { gates, sites, site_index }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn index(&self, x: &TreeCoord) -> Result<usize> {
        self.site_index.get(x).copied().ok_or_else(|| Error::UnindexedSite(x.to_string()))
    }
}

/// Dense amplitude vector over `2^n_sites` product-basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteState {
    pub amplitudes: Vec<Complex64>,
    pub n_sites: usize,
}

impl SiteState {
    pub fn basis(n_sites: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_sites];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes, n_sites }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn bit(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// Amplitude scalar: `f64` when every factor of `K` is real, `Complex64` otherwise.
trait Amp: Copy + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Send + Sync {
    const ZERO: Self;
    const ONE: Self;
    fn conj(self) -> Self;
    fn widen(self) -> Complex64;
}

impl Amp for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn conj(self) -> Self {
        self
    }
    fn widen(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Amp for Complex64 {
    const ZERO: Self = ZERO;
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn widen(self) -> Complex64 {
        self
    }
}

/// Nonzero entries `(row, col, value)` of a 4×4 gate.
#[derive(Debug, Clone)]
struct Sparse4<T>(Vec<(usize, usize, T)>);

impl<T: Amp> Sparse4<T> {
    fn new(m: &[[T; 4]; 4]) -> Self {
        let entries = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|&(r, c)| m[r][c] != T::ZERO)
            .map(|(r, c)| (r, c, m[r][c]))
            .collect();
        Self(entries)
    }
}

fn apply_one<T: Amp>(amps: &mut [T], n_sites: usize, u: usize, m: &[[T; 2]; 2]) {
    let bu = bit(n_sites, u);
    for block in (0..amps.len()).step_by(2 * bu) {
        for base in block..block + bu {
            let (a0, a1) = (amps[base], amps[base | bu]);
            amps[base] = m[0][0] * a0 + m[0][1] * a1;
            amps[base | bu] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_two<T: Amp>(amps: &mut [T], n_sites: usize, u: usize, v: usize, m: &Sparse4<T>) {
    let (bu, bv) = (bit(n_sites, u), bit(n_sites, v));
    let (lo, hi) = (bu.min(bv), bu.max(bv));
    for outer in (0..amps.len()).step_by(2 * hi) {
        for inner in (outer..outer + hi).step_by(2 * lo) {
            for base in inner..inner + lo {
                let idx = [base, base | bv, base | bu, base | bu | bv];
                let a = idx.map(|i| amps[i]);
                if a.iter().all(|z| *z == T::ZERO) {
                    continue;
                }
                let mut out = [T::ZERO; 4];
                for &(r, c, x) in &m.0 {
                    out[r] = out[r] + x * a[c];
                }
                for (r, &i) in idx.iter().enumerate() {
                    amps[i] = out[r];
                }
            }
        }
    }
}

/// Applies the 4×4 `gate` to the `(u, v)` index pair of `state`, `u` being the
/// left tensor factor.
pub fn apply_gate(
    state: &mut SiteState,
    program: &GateProgram,
    u: &TreeCoord,
    v: &TreeCoord,
    gate: &TwoSiteOperator,
) -> Result<()> {
    let (iu, iv) = (program.index(u)?, program.index(v)?);
    if iu == iv {
        return Err(Error::CoincidentSites(u.to_string()));
    }
    if state.n_sites != program.n_sites() {
        return Err(Error::DimensionMismatch { left: state.n_sites, right: program.n_sites() });
    }
    apply_two(&mut state.amplitudes, state.n_sites, iu, iv, &Sparse4::new(&mat4(gate.matrix())));
    Ok(())
}

/// `h^{1/2}` for `h = h0 σ0 + h1 σ1`, through the σ1 eigenbasis.
pub fn field_sqrt(h: BoundaryField) -> Result<Mat2> {
    h.check_positive()?;
    let (p, m) = ((h.h0 + h.h1).sqrt(), (h.h0 - h.h1).sqrt());
    let (d, o) = (Complex64::new((p + m) / 2.0, 0.0), Complex64::new((p - m) / 2.0, 0.0));
    Ok([[d, o], [o, d]])
}

/// Boundary fields as a function of the level they sit on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldProfile {
    Uniform(BoundaryField),
    /// `h⁽ᵐ⁾ = (α cosh³β)^{1/3ᵐ}/cosh³β · σ0` on level `m`.
    AlphaFamily { alpha: f64, beta: f64 },
}

impl FieldProfile {
    pub fn at_level(&self, m: usize) -> BoundaryField {
        match *self {
            FieldProfile::Uniform(h) => h,
            FieldProfile::AlphaFamily { alpha, beta } => {
                let c3 = beta.cosh().powi(3);
                BoundaryField::new((alpha * c3).powf(3f64.powi(-(m as i32))) / c3, 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    /// Root operator `w0`, restricted to `span{σ0, σ1}`.
    pub w0: BoundaryField,
    pub field: FieldProfile,
}

impl BoundaryCondition {
    pub fn alpha0(beta: f64) -> Self {
        let c3 = beta.cosh().powi(3);
        Self { w0: BoundaryField::new(c3, 0.0), field: FieldProfile::Uniform(BoundaryField::new(1.0 / c3, 0.0)) }
    }

    pub fn gamma(beta: f64) -> Result<Self> {
        let g = BoundaryField::gamma(beta)?;
        Ok(Self { w0: BoundaryField::new(1.0 / g.h0, 0.0), field: FieldProfile::Uniform(g) })
    }

    /// `w0(α) = σ0/α` with the level-dependent cube-root fields.
    pub fn alpha_family(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidBoundary(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { w0: BoundaryField::new(1.0 / alpha, 0.0), field: FieldProfile::AlphaFamily { alpha, beta } })
    }

    pub fn w0_pauli(&self) -> PauliVector {
        self.w0.to_pauli()
    }

    /// `|tr(w0 h⁽⁰⁾) − 1|`.
    pub fn eq1_residual(&self) -> f64 {
        let h = self.field.at_level(0);
        (self.w0.h0 * h.h0 + self.w0.h1 * h.h1 - 1.0).abs()
    }

    /// Largest dense three-successor residual `|tr_x[K h⁽ᵐ⁺¹⁾ K] − h⁽ᵐ⁾|` over `m < levels`.
    pub fn eq2_residual(&self, beta: f64, levels: usize) -> Result<f64> {
        (0..levels).try_fold(0.0f64, |acc, m| {
            let child = self.field.at_level(m + 1);
            let dense = dense_three_successor_trace(beta, [child; 3], false)?;
            Ok(acc.max(dense.max_abs_diff(&self.field.at_level(m))))
        })
    }

    fn precheck(&self, beta: f64, levels: usize) -> Result<()> {
        let (r1, r2) = (self.eq1_residual(), self.eq2_residual(beta, levels)?);
        if r1 < PRECHECK_TOL && r2 < PRECHECK_TOL {
            Ok(())
        } else {
            Err(Error::InvalidBoundary(format!("eq1 residual {r1:.3e}, eq2 residual {r2:.3e}")))
        }
    }
}

/// Where the boundary fields sit relative to the observable's volume `Λ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityForm {
    /// Boundary on level `n + 1`, observable padded with identities.
    Extended,
    /// Boundary on level `n` itself.
    Truncated,
}

/// Tensor product of Pauli matrices on tree sites; identity elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PauliWord {
    pub ops: Vec<(TreeCoord, usize)>,
}

impl PauliWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(x: TreeCoord, i: usize) -> Self {
        Self { ops: vec![(x, i)] }
    }

    pub fn max_level(&self) -> usize {
        self.ops.iter().map(|(x, _)| x.level()).max().unwrap_or(0)
    }

    /// All `4^|sites|` words on the given sites.
    pub fn all_on(sites: &[TreeCoord]) -> Vec<Self> {
        let count = 4usize.pow(sites.len() as u32);
        (0..count).map(|code| Self::from_code(sites, code)).collect()
    }

    /// `count` distinct words on the given sites drawn with a seeded generator.
    pub fn sample_on(sites: &[TreeCoord], count: usize, seed: u64) -> Vec<Self> {
        let total = 4usize.pow(sites.len() as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codes = sample(&mut rng, total, count.min(total)).into_vec();
        codes.sort_unstable();
        codes.into_iter().map(|code| Self::from_code(sites, code)).collect()
    }

    fn from_code(sites: &[TreeCoord], mut code: usize) -> Self {
        let mut ops = Vec::new();
        for x in sites {
            let p = code % 4;
            code /= 4;
            if p != 0 {
                ops.push((x.clone(), p));
            }
        }
        Self { ops }
    }

    fn compile(&self, program: &GateProgram) -> Result<CompiledWord> {
        let n = program.n_sites();
        let mut w = CompiledWord { flip: 0, sign: 0, i_power: 0 };
        for (x, p) in &self.ops {
            let b = bit(n, program.index(x).map_err(|_| Error::SupportOutsideVolume(x.to_string()))?);
            match p {
                0 => {}
                1 => w.flip |= b,
                2 => {
                    w.flip |= b;
                    w.sign |= b;
                    w.i_power += 1;
                }
                3 => w.sign |= b,
                _ => return Err(Error::PauliIndex(*p)),
            }
        }
        Ok(w)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (x, p) in &self.ops {
            write!(f, "{}{}", ["I", "X", "Y", "Z"][*p], x)?;
        }
        Ok(())
    }
}

/// `P|j> = i^{i_power} (−1)^{popcount(j & sign)} |j ^ flip>`.
#[derive(Debug, Clone, Copy)]
struct CompiledWord {
    flip: usize,
    sign: usize,
    i_power: u32,
}

impl CompiledWord {
    fn expectation<T: Amp>(&self, v: &[T]) -> Complex64 {
        let mut acc = T::ZERO;
        for (j, &vj) in v.iter().enumerate() {
            let term = v[j ^ self.flip].conj() * vj;
            if (j & self.sign).count_ones() % 2 == 0 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        acc.widen() * Complex64::new(0.0, 1.0).powu(self.i_power)
    }

    /// Sum over lanes of [`CompiledWord::expectation`].
    fn expectation_lanes(&self, v: &[Lanes]) -> Complex64 {
        let mut acc = [0.0; LANES];
        for (j, vj) in v.iter().enumerate() {
            let partner = &v[j ^ self.flip];
            let sign = if (j & self.sign).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            for l in 0..LANES {
                acc[l] += sign * partner[l] * vj[l];
            }
        }
        Complex64::new(acc.iter().sum(), 0.0) * Complex64::new(0.0, 1.0).powu(self.i_power)
    }
}

/// The factors of `K` in application order, over one scalar type.
#[derive(Debug, Clone)]
struct Kernel<T> {
    boundary: Vec<(usize, [[T; 2]; 2])>,
    gates: Vec<(usize, usize, Sparse4<T>)>,
    w0_sqrt: [[T; 2]; 2],
}

impl<T: Amp> Kernel<T> {
    fn apply(&self, amps: &mut [T], n: usize) {
        for (i, m) in &self.boundary {
            apply_one(amps, n, *i, m);
        }
        for (u, v, m) in &self.gates {
            apply_two(amps, n, *u, *v, m);
        }
        apply_one(amps, n, 0, &self.w0_sqrt);
    }

    fn expectations(&self, n: usize, words: &[CompiledWord]) -> Vec<Complex64> {
        let dim = 1usize << n;
        let sums = (0..dim)
            .into_par_iter()
            .fold(
                || (vec![T::ZERO; dim], vec![ZERO; words.len()]),
                |(mut buf, mut acc), i| {
                    buf.iter_mut().for_each(|z| *z = T::ZERO);
                    buf[i] = T::ONE;
                    self.apply(&mut buf, n);
                    for (a, w) in acc.iter_mut().zip(words) {
                        *a += w.expectation(&buf);
                    }
                    (buf, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(|| vec![ZERO; words.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let norm = 1.0 / dim as f64;
        sums.into_iter().map(|z| z * norm).collect()
    }
}

/// Basis vectors pushed through `K` side by side, one per lane.
const LANES: usize = 16;
type Lanes = [f64; LANES];

fn apply_one_lanes(amps: &mut [Lanes], n_sites: usize, u: usize, m: &[[f64; 2]; 2]) {
    let bu = bit(n_sites, u);
    for block in (0..amps.len()).step_by(2 * bu) {
        for base in block..block + bu {
            let (a0, a1) = (amps[base], amps[base | bu]);
            for l in 0..LANES {
                amps[base][l] = m[0][0] * a0[l] + m[0][1] * a1[l];
                amps[base | bu][l] = m[1][0] * a0[l] + m[1][1] * a1[l];
            }
        }
    }
}

fn apply_two_lanes(amps: &mut [Lanes], n_sites: usize, u: usize, v: usize, m: &Sparse4<f64>) {
    let (bu, bv) = (bit(n_sites, u), bit(n_sites, v));
    let (lo, hi) = (bu.min(bv), bu.max(bv));
    for outer in (0..amps.len()).step_by(2 * hi) {
        for inner in (outer..outer + hi).step_by(2 * lo) {
            for base in inner..inner + lo {
                let idx = [base, base | bv, base | bu, base | bu | bv];
                let a = idx.map(|i| amps[i]);
                let mut out = [[0.0; LANES]; 4];
                for &(r, c, x) in &m.0 {
                    for l in 0..LANES {
                        out[r][l] += x * a[c][l];
                    }
                }
                for (r, &i) in idx.iter().enumerate() {
                    amps[i] = out[r];
                }
            }
        }
    }
}

impl Kernel<f64> {
    fn apply_lanes(&self, amps: &mut [Lanes], n: usize) {
        for (i, m) in &self.boundary {
            apply_one_lanes(amps, n, *i, m);
        }
        for (u, v, m) in &self.gates {
            apply_two_lanes(amps, n, *u, *v, m);
        }
        apply_one_lanes(amps, n, 0, &self.w0_sqrt);
    }

    /// [`Kernel::expectations`] with `LANES` basis vectors per sweep.
    fn expectations_lanes(&self, n: usize, words: &[CompiledWord]) -> Vec<Complex64> {
        let dim = 1usize << n;
        if dim < LANES {
            return self.expectations(n, words);
        }
        let sums = (0..dim / LANES)
            .into_par_iter()
            .fold(
                || (vec![[0.0; LANES]; dim], vec![ZERO; words.len()]),
                |(mut buf, mut acc), b| {
                    buf.iter_mut().for_each(|z| *z = [0.0; LANES]);
                    for l in 0..LANES {
                        buf[b * LANES + l][l] = 1.0;
                    }
                    self.apply_lanes(&mut buf, n);
                    for (a, w) in acc.iter_mut().zip(words) {
                        *a += w.expectation_lanes(&buf);
                    }
                    (buf, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(|| vec![ZERO; words.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let norm = 1.0 / dim as f64;
        sums.into_iter().map(|z| z * norm).collect()
    }
}

fn real2(m: &Mat2) -> Option<[[f64; 2]; 2]> {
    m.iter().flatten().all(|z| z.im == 0.0).then(|| m.map(|row| row.map(|z| z.re)))
}

fn real4(m: &Mat4) -> Option<[[f64; 4]; 4]> {
    m.iter().flatten().all(|z| z.im == 0.0).then(|| m.map(|row| row.map(|z| z.re)))
}

/// `K` for the finite-volume density, ready to be applied to state vectors.
#[derive(Debug, Clone)]
pub struct DensityProgram {
    pub edges: GateProgram,
    complex: Kernel<Complex64>,
    /// The same kernel in real arithmetic, present when every factor is real.
    real: Option<Kernel<f64>>,
}

impl DensityProgram {
    /// Edges of `Λ_level`, boundary fields on level `level`.
    pub fn new(level: usize, beta: f64, bc: &BoundaryCondition) -> Result<Self> {
        check_beta(beta)?;
        let sites = volume_sizes(level, K).1;
        if sites > MAX_SITES {
            return Err(Error::VolumeTooLarge { sites, cap: MAX_SITES });
        }
        let edges = GateProgram::edges(level, beta)?;
        let h = field_sqrt(bc.field.at_level(level))?;
        let boundary: Vec<(usize, Mat2)> =
            level_set(level, K).vertices.iter().map(|x| edges.index(x).map(|i| (i, h))).collect::<Result<_>>()?;
        // stored in application order: the last factor of the product acts first
        let gates: Vec<(usize, usize, Mat4)> = edges
            .gates
            .iter()
            .rev()
            .map(|(u, v, g)| Ok((edges.index(u)?, edges.index(v)?, mat4(g.matrix()))))
            .collect::<Result<_>>()?;
        let w0_sqrt = field_sqrt(bc.w0)?;

        let real = (|| {
            Some(Kernel {
                boundary: boundary.iter().map(|(i, m)| real2(m).map(|m| (*i, m))).collect::<Option<_>>()?,
                gates: gates
                    .iter()
                    .map(|(u, v, m)| real4(m).map(|m| (*u, *v, Sparse4::new(&m))))
                    .collect::<Option<_>>()?,
                w0_sqrt: real2(&w0_sqrt)?,
            })
        })();
        let complex = Kernel {
            boundary,
            gates: gates.iter().map(|(u, v, m)| (*u, *v, Sparse4::new(m))).collect(),
            w0_sqrt,
        };
        Ok(Self { edges, complex, real })
    }

    pub fn n_sites(&self) -> usize {
        self.edges.n_sites()
    }

    /// `amps ← K amps`.
    pub fn apply(&self, amps: &mut [Complex64]) {
        self.complex.apply(amps, self.n_sites());
    }

    /// `tr(K K* P)` for each word, summed over the computational basis.
    pub fn expectations(&self, words: &[PauliWord]) -> Result<Vec<Complex64>> {
        let compiled = self.compile(words)?;
        Ok(match &self.real {
            Some(kernel) => kernel.expectations_lanes(self.n_sites(), &compiled),
            None => self.complex.expectations(self.n_sites(), &compiled),
        })
    }

    /// [`DensityProgram::expectations`] forced through complex arithmetic.
    pub fn expectations_complex(&self, words: &[PauliWord]) -> Result<Vec<Complex64>> {
        Ok(self.complex.expectations(self.n_sites(), &self.compile(words)?))
    }

    fn compile(&self, words: &[PauliWord]) -> Result<Vec<CompiledWord>> {
        words.iter().map(|w| w.compile(&self.edges)).collect()
    }
}

/// Level carrying the boundary fields for observables on `Λ_n`.
pub fn boundary_level(n: usize, form: DensityForm) -> usize {
    match form {
        DensityForm::Extended => n + 1,
        DensityForm::Truncated => n,
    }
}

/// Expectations of several words on `Λ_n` under one density.
pub fn finite_volume_expectations(
    words: &[PauliWord],
    n: usize,
    beta: f64,
    bc: &BoundaryCondition,
    form: DensityForm,
) -> Result<Vec<Complex64>> {
    if let Some(w) = words.iter().find(|w| w.max_level() > n) {
        return Err(Error::SupportOutsideVolume(w.to_string()));
    }
    DensityProgram::new(boundary_level(n, form), beta, bc)?.expectations(words)
}

/// `φ⁽ⁿ⁾(a)` for a hermitian word `a`; the imaginary part is discarded.
pub fn finite_volume_expectation(
    a: &PauliWord,
    n: usize,
    beta: f64,
    bc: &BoundaryCondition,
    form: DensityForm,
) -> Result<f64> {
    Ok(finite_volume_expectations(std::slice::from_ref(a), n, beta, bc, form)?[0].re)
}

/// σ1 on the first vertex `(1, …, 1)` of level `level`, identity elsewhere.
pub fn sigma1_probe(level: usize) -> PauliWord {
    PauliWord::single(TreeCoord::first_vertex(level), 1)
}

/// `tr_x[K1 K2 K3 h_1 h_2 h_3 K3 K2 K1]` on the 16-dim space of `x` and its
/// three successors, optionally with σ1 attached to the first successor.
pub fn dense_three_successor_trace(beta: f64, h: [BoundaryField; 3], observed: bool) -> Result<BoundaryField> {
    let id = DenseOp::identity(1);
    let coeffs = edge_gate(beta)?.diag_pauli().expect("edge gate carries its Pauli coefficients");
    let on = |slot: usize, op: &DenseOp| -> Result<DenseOp> {
        let mut factors = vec![id.clone(); 4];
        factors[slot] = op.clone();
        kron_chain(&factors)
    };
    // edge from x to (x,i) as Σ_j K_j σ_j^(x) σ_j^(x,i) on the 16-dim space
    let edge = |i: usize| -> Result<DenseOp> {
        let mut out = DenseOp::zeros(16);
        for (j, &kj) in coeffs.iter().enumerate() {
            let s = pauli(j)?;
            out = &out + &(&on(0, &s)? * &on(i, &s)?).scale(Complex64::new(kj, 0.0));
        }
        Ok(out)
    };
    let (k1, k2, k3) = (edge(1)?, edge(2)?, edge(3)?);
    let fields = DenseOp::product(
        [on(1, &h[0].to_pauli().to_matrix())?, on(2, &h[1].to_pauli().to_matrix())?, on(3, &h[2].to_pauli().to_matrix())?]
            .iter(),
    )?;
    let mut m = DenseOp::product([&k1, &k2, &k3, &fields, &k3, &k2, &k1])?;
    if observed {
        m = &m * &on(1, &pauli(1)?)?;
    }
    let reduced = PauliVector::from_matrix(&m.normalized_partial_trace(&[0])?)?;
    Ok(BoundaryField::new(reduced.c[0].re, reduced.c[1].re))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq2Check {
    pub dense: BoundaryField,
    pub predicted: BoundaryField,
    /// `‖dense − transfer_three(h, h, h)‖∞`.
    pub residual_vs_transfer: f64,
    /// `‖dense − h‖∞`, zero exactly at fixed points.
    pub residual_vs_input: f64,
}

pub fn verify_eq2(beta: f64, h: BoundaryField) -> Result<Eq2Check> {
    let dense = dense_three_successor_trace(beta, [h; 3], false)?;
    let predicted = transfer_three(h, h, h, beta);
    Ok(Eq2Check {
        dense,
        predicted,
        residual_vs_transfer: dense.max_abs_diff(&predicted),
        residual_vs_input: dense.max_abs_diff(&h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    /// Max-norm gap between the extracted and closed-form coefficients.
    pub max_deviation: f64,
    /// Max-norm gap between the dense map and the closed-form cubic map on extra probes.
    pub map_deviation: f64,
}

/// Reads `A1, B1, A2, B2` off the dense homogeneous map `(a, b) ↦ (B2a³ + A2ab², B1a²b + A1b³)`.
/// The probes `(1,0)`, `(1,1)`, `(1,2)` determine the cubic exactly.
pub fn verify_mainsystem_coeffs(beta: f64) -> Result<ExtractedCoeffs> {
    let probe = |a: f64, b: f64| dense_three_successor_trace(beta, [BoundaryField::new(a, b); 3], false);
    let (p10, p11, p12) = (probe(1.0, 0.0)?, probe(1.0, 1.0)?, probe(1.0, 2.0)?);
    let b2 = p10.h0;
    let a2 = p11.h0 - b2;
    let a1 = (p12.h1 - 2.0 * p11.h1) / 6.0;
    let b1 = p11.h1 - a1;
    let rc = RecursionCoeffs::new(beta)?;
    let max_deviation =
        [a1 - rc.a1, b1 - rc.b1, a2 - rc.a2, b2 - rc.b2].iter().map(|d| d.abs()).fold(0.0, f64::max);
    let map_deviation = [(0.8, 0.3), (1.0, -0.5), (0.45, 0.2), (1.3, 0.9)]
        .iter()
        .map(|&(a, b)| -> Result<f64> {
            let dense = probe(a, b)?;
            let (x, y) = rc.map(a, b);
            Ok(dense.max_abs_diff(&BoundaryField::new(x, y)))
        })
        .try_fold(p10.h1.abs(), |acc, d| d.map(|d| acc.max(d)))?;
    Ok(ExtractedCoeffs { a1, b1, a2, b2, max_deviation, map_deviation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub n: usize,
    pub words: usize,
    pub seed: u64,
    pub max_deviation: f64,
}

fn spanning_words(n: usize, seed: u64) -> Vec<PauliWord> {
    let sites = ball(n, K);
    if n == 0 {
        PauliWord::all_on(&sites)
    } else {
        PauliWord::sample_on(&sites, 64, seed)
    }
}

/// `max |φ⁽ⁿ⁺¹⁾(a) − φ⁽ⁿ⁾(a)|` over a spanning set on `Λ_n`, without checking
/// the boundary equations first. At `n = 0` both sides use the extended form;
/// at `n = 1` both use the truncated form, which keeps `Λ_2` as the largest volume.
pub fn compatibility_deviation(beta: f64, bc: &BoundaryCondition, n: usize, seed: u64) -> Result<CompatibilityReport> {
    let words = spanning_words(n, seed);
    let form = if n == 0 { DensityForm::Extended } else { DensityForm::Truncated };
    let big = finite_volume_expectations(&words, n + 1, beta, bc, form)?;
    let small = finite_volume_expectations(&words, n, beta, bc, form)?;
    let max_deviation = big.iter().zip(&small).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(CompatibilityReport { n, words: words.len(), seed, max_deviation })
}

/// [`compatibility_deviation`] after confirming the boundary equations hold.
pub fn verify_compatibility(beta: f64, bc: &BoundaryCondition, n: usize, seed: u64) -> Result<CompatibilityReport> {
    if n > 1 {
        let sites = volume_sizes(n + 2, K).1;
        return Err(Error::VolumeTooLarge { sites, cap: MAX_SITES });
    }
    bc.precheck(beta, n + 2)?;
    compatibility_deviation(beta, bc, n, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFamilyReport {
    pub max_pairwise_deviation: f64,
    /// `|tr(w0(α) h⁽⁰⁾(α)) − 1|` per α.
    pub eq1_residuals: Vec<f64>,
    pub words: usize,
}

/// Pairwise agreement of the states built from the scaled family `w0(α) = σ0/α`.
pub fn verify_alpha_family_invariance(beta: f64, alphas: &[f64], n: usize) -> Result<AlphaFamilyReport> {
    let words = spanning_words(n, DEFAULT_SEED);
    let mut eq1_residuals = Vec::new();
    let mut values = Vec::new();
    for &alpha in alphas {
        let bc = BoundaryCondition::alpha_family(alpha, beta)?;
        eq1_residuals.push(bc.eq1_residual());
        values.push(finite_volume_expectations(&words, n, beta, &bc, DensityForm::Extended)?);
    }
    let mut max_pairwise_deviation = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            for (x, y) in a.iter().zip(b) {
                max_pairwise_deviation = max_pairwise_deviation.max((x - y).norm());
            }
        }
    }
    Ok(AlphaFamilyReport { max_pairwise_deviation, eq1_residuals, words: words.len() })
}

/// `max |tr(W_{n+1]}(a ⊗ 1)) − tr(W_{n]}(a))|` over a spanning set on `Λ_n`.
pub fn verify_wn_form(beta: f64, bc: &BoundaryCondition, n: usize) -> Result<f64> {
    bc.precheck(beta, n + 1)?;
    let words = spanning_words(n, DEFAULT_SEED);
    let ext = finite_volume_expectations(&words, n, beta, bc, DensityForm::Extended)?;
    let tru = finite_volume_expectations(&words, n, beta, bc, DensityForm::Truncated)?;
    Ok(ext.iter().zip(&tru).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}
