//! Dense reference computations built on nalgebra, sharing no code with the
//! library's operator algebra.

#![allow(dead_code)]

use nalgebra::DMatrix;

pub fn sigma0() -> DMatrix<f64> {
    DMatrix::identity(2, 2)
}

pub fn sigma1() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// `σ2 ⊗ σ2`, which is real even though `σ2` is not.
pub fn sigma2_pair() -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[0., 0., 0., -1., 0., 0., 1., 0., 0., 1., 0., 0., -1., 0., 0., 0.])
}

/// `(σ1⊗σ1 + σ2⊗σ2)/2`.
pub fn hamiltonian() -> DMatrix<f64> {
    (sigma1().kronecker(&sigma1()) + sigma2_pair()) * 0.5
}

/// `exp(βH)` by nalgebra's Padé matrix exponential.
pub fn gate_expm(beta: f64) -> DMatrix<f64> {
    (hamiltonian() * beta).exp()
}

/// Lifts a one-site operator to site `a` of `n` sites (site 0 most significant).
pub fn embed_one(g: &DMatrix<f64>, a: usize, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(1, 1);
    for site in 0..n {
        out = out.kronecker(&if site == a { g.clone() } else { sigma0() });
    }
    out
}

/// Lifts a two-site operator to the ordered pair `(a, b)` of `n` sites.
pub fn embed_two(g: &DMatrix<f64>, a: usize, b: usize, n: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let (ba, bb) = (1 << (n - 1 - a), 1 << (n - 1 - b));
    let local = |i: usize| (((i & ba != 0) as usize) << 1) | (i & bb != 0) as usize;
    DMatrix::from_fn(dim, dim, |r, c| {
        if (r & !(ba | bb)) == (c & !(ba | bb)) {
            g[(local(r), local(c))]
        } else {
            0.0
        }
    })
}

/// `(h0, h1)` of `tr_{(x,1),(x,2),(x,3)}[K1 K2 K3 h_1 h_2 h_3 K3 K2 K1 (σ1 on (x,1))?]`,
/// the coefficients being normalized traces against `σ0`, `σ1` on `x`.
pub fn three_successor_trace(beta: f64, h: [(f64, f64); 3], observed: bool) -> (f64, f64) {
    let g = gate_expm(beta);
    let k: Vec<DMatrix<f64>> = (1..=3).map(|i| embed_two(&g, 0, i, 4)).collect();
    let mut m = &k[0] * &k[1] * &k[2];
    for (i, (h0, h1)) in h.iter().enumerate() {
        m *= embed_one(&(sigma0() * *h0 + sigma1() * *h1), i + 1, 4);
    }
    m = m * &k[2] * &k[1] * &k[0];
    if observed {
        m *= embed_one(&sigma1(), 1, 4);
    }
    let coeff = |p: DMatrix<f64>| (embed_one(&p, 0, 4) * &m).trace() / 16.0;
    (coeff(sigma0()), coeff(sigma1()))
}
