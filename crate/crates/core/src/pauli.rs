//! Dense complex operators on a few spin-1/2 sites, written in the Pauli basis.
//!
//! Product-basis ordering is lexicographic with the first site as the most
//! significant bit: for two sites `u, v` the basis is `|00>, |01>, |10>, |11>`
//! with `u` the left digit. All traces are normalized so that the identity on
//! any number of sites has trace one.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Comparison tolerance: `|a - b| <= abs + rel * max(|a|, |b|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }
}

/// Dense square operator on `n_sites` qubits, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOp {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = ONE;
        }
        op
    }

    /// Builds an operator from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NonSquare { rows: dim, cols: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self { dim: N, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sites, i.e. `log2(dim)`.
    pub fn n_sites(&self) -> Result<usize> {
        if self.dim.is_power_of_two() {
            Ok(self.dim.trailing_zeros() as usize)
        } else {
            Err(Error::NotPowerOfTwo(self.dim))
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.data[r * self.dim + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Product of a sequence of operators, left to right.
    pub fn product<'a>(ops: impl IntoIterator<Item = &'a DenseOp>) -> Result<Self> {
        let mut iter = ops.into_iter();
        let first = iter.next().ok_or(Error::EmptyKron)?.clone();
        iter.try_fold(first, |acc, op| acc.matmul(op))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Trace divided by the dimension.
    pub fn normalized_trace(&self) -> Complex64 {
        let sum: Complex64 = (0..self.dim).map(|i| self.data[i * self.dim + i]).sum();
        sum / self.dim as f64
    }

    /// Normalized partial trace onto the sites at positions `keep`.
    ///
    /// Positions refer to this operator's own site order (0 = most significant).
    /// The result lives on the kept sites in increasing position order and is
    /// averaged, not summed, over the traced sites.
    pub fn normalized_partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.n_sites()?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || kept.iter().any(|&p| p >= n) {
            return Err(Error::NotSubset { keep: keep.to_vec(), n_sites: n });
        }
        let traced: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();

        // bit offset of position p in the full index
        let scatter = |value: usize, positions: &[usize]| -> usize {
            let m = positions.len();
            positions.iter().enumerate().fold(0usize, |acc, (j, &p)| {
                let bit = (value >> (m - 1 - j)) & 1;
                acc | (bit << (n - 1 - p))
            })
        };
        let keep_dim = 1usize << kept.len();
        let trace_dim = 1usize << traced.len();
        let keep_idx: Vec<usize> = (0..keep_dim).map(|v| scatter(v, &kept)).collect();
        let trace_idx: Vec<usize> = (0..trace_dim).map(|v| scatter(v, &traced)).collect();

        let mut out = Self::zeros(keep_dim);
        let norm = 1.0 / trace_dim as f64;
        for (r, &kr) in keep_idx.iter().enumerate() {
            for (c, &kc) in keep_idx.iter().enumerate() {
                let s: Complex64 = trace_idx.iter().map(|&t| self.get(kr | t, kc | t)).sum();
                out.data[r * keep_dim + c] = s * norm;
            }
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.data[r1 * a + c1];
                if x == ZERO {
                    continue;
                }
                for r2 in 0..b {
                    for c2 in 0..b {
                        out.data[(r1 * b + r2) * n + c1 * b + c2] = x * rhs.data[r2 * b + c2];
                    }
                }
            }
        }
        out
    }
}

impl Add for &DenseOp {
    type Output = DenseOp;
    fn add(self, rhs: &DenseOp) -> DenseOp {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        DenseOp { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &DenseOp {
    type Output = DenseOp;
    fn sub(self, rhs: &DenseOp) -> DenseOp {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        DenseOp { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &DenseOp {
    type Output = DenseOp;
    fn mul(self, rhs: &DenseOp) -> DenseOp {
        self.matmul(rhs).expect("dimension mismatch in operator product")
    }
}

/// Tensor product of the operators in list order.
pub fn kron_chain(ops: &[DenseOp]) -> Result<DenseOp> {
    let (first, rest) = ops.split_first().ok_or(Error::EmptyKron)?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.kron(op)))
}

/// The 2x2 matrix of `σ_i` (σ0 = identity, σ1 = σx, σ2 = σy, σ3 = σz).
pub fn pauli(i: usize) -> Result<DenseOp> {
    let m = match i {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => return Err(Error::PauliIndex(i)),
    };
    Ok(DenseOp { dim: 2, data: m.iter().flatten().copied().collect() })
}

/// `σ_i σ_j = phase · σ_k`.
pub fn pauli_product(i: usize, j: usize) -> Result<(usize, Complex64)> {
    if i > 3 {
        return Err(Error::PauliIndex(i));
    }
    if j > 3 {
        return Err(Error::PauliIndex(j));
    }
    Ok(match (i, j) {
        (0, k) | (k, 0) => (k, ONE),
        (a, b) if a == b => (0, ONE),
        (a, b) => {
            // remaining index of {1,2,3}; sign from the cyclic order 1 -> 2 -> 3
            let k = 6 - a - b;
            let cyclic = (a % 3) + 1 == b;
            (k, if cyclic { I } else { -I })
        }
    })
}

/// One-site operator `Σ c_i σ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliVector {
    pub c: [Complex64; 4],
}

impl PauliVector {
    pub fn new(c: [Complex64; 4]) -> Self {
        Self { c }
    }

    pub fn real(c: [f64; 4]) -> Self {
        Self { c: c.map(|x| Complex64::new(x, 0.0)) }
    }

    pub fn identity() -> Self {
        Self::real([1.0, 0.0, 0.0, 0.0])
    }

    pub fn basis(i: usize) -> Result<Self> {
        if i > 3 {
            return Err(Error::PauliIndex(i));
        }
        let mut c = [ZERO; 4];
        c[i] = ONE;
        Ok(Self { c })
    }

    pub fn to_matrix(&self) -> DenseOp {
        let mut out = DenseOp::zeros(2);
        for (i, &ci) in self.c.iter().enumerate() {
            out = &out + &pauli(i).expect("index in range").scale(ci);
        }
        out
    }

    /// Coefficients `c_i = tr(σ_i M)` (normalized trace) of a 2x2 operator.
    pub fn from_matrix(m: &DenseOp) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch { left: m.dim(), right: 2 });
        }
        let mut c = [ZERO; 4];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = pauli(i)?.matmul(m)?.normalized_trace();
        }
        Ok(Self { c })
    }

    pub fn adjoint(&self) -> Self {
        Self { c: self.c.map(|x| x.conj()) }
    }

    pub fn normalized_trace(&self) -> Complex64 {
        self.c[0]
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.c.iter().all(|x| x.im.abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.c.iter().zip(&other.c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Mul for PauliVector {
    type Output = PauliVector;

    fn mul(self, rhs: PauliVector) -> PauliVector {
        let mut c = [ZERO; 4];
        for i in 0..4 {
            for j in 0..4 {
                let (k, phase) = pauli_product(i, j).expect("index in range");
                c[k] += phase * self.c[i] * rhs.c[j];
            }
        }
        PauliVector { c }
    }
}

/// Two-site operator as a 4x4 matrix; optionally tagged with coefficients
/// `K_i` when it has the diagonal form `Σ K_i σ_i ⊗ σ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteOperator {
    m: DenseOp,
    diag_pauli: Option<[f64; 4]>,
}

impl TwoSiteOperator {
    pub fn from_matrix(m: DenseOp) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch { left: m.dim(), right: 4 });
        }
        Ok(Self { m, diag_pauli: None })
    }

    pub fn from_diag_pauli(k: [f64; 4]) -> Self {
        let mut m = DenseOp::zeros(4);
        for (i, &ki) in k.iter().enumerate() {
            let s = pauli(i).expect("index in range");
            m = &m + &s.kron(&s).scale(Complex64::new(ki, 0.0));
        }
        Self { m, diag_pauli: Some(k) }
    }

    pub fn matrix(&self) -> &DenseOp {
        &self.m
    }

    pub fn diag_pauli(&self) -> Option<[f64; 4]> {
        self.diag_pauli
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint(), diag_pauli: self.diag_pauli }
    }
}
