//! 2-norm and condition number estimation by power iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::densela::kernels::norm2;
use crate::densela::lu::{tri_solve_t_f64, LUFactors, Triangle};
use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::precision::{Format, Status};

/// Relative change of the Rayleigh quotient at which iteration stops.
pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Estimate {
    /// The estimate, or `NoConvergence` carrying it.
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NoConvergence { iterations: self.iterations, estimate: self.value })
        }
    }
}

/// `||B||_2` by power iteration on `B^T B` from a seeded Gaussian start.
///
/// `apply` maps length-`n` vectors through `B`, `apply_t` maps back through
/// `B^T`.
pub fn norm2_est<F, G>(mut apply: F, mut apply_t: G, n: usize, seed: u64) -> Estimate
where
    F: FnMut(&[f64]) -> Vec<f64>,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut lambda = 0.0f64;
    for it in 1..=POWER_MAX_ITER {
        let y = apply(&x);
        let ny = norm2(&y);
        let next = ny * ny;
        if ny == 0.0 {
            return Estimate { value: 0.0, iterations: it, converged: true };
        }
        let z = apply_t(&y);
        let nz = norm2(&z);
        if nz == 0.0 || !nz.is_finite() {
            return Estimate { value: ny, iterations: it, converged: nz == 0.0 };
        }
        if it > 1 && (next - lambda).abs() <= POWER_TOL * next {
            return Estimate { value: next.sqrt(), iterations: it, converged: true };
        }
        lambda = next;
        x = z.into_iter().map(|v| v / nz).collect();
    }
    Estimate { value: lambda.sqrt(), iterations: POWER_MAX_ITER, converged: false }
}

/// `||B||_2 ||B^{-1}||_2` from two power iterations.
#[allow(clippy::too_many_arguments)]
pub fn cond2_est<F, G, H, K>(apply: F, apply_t: G, apply_inv: H, apply_inv_t: K, n: usize, seed: u64) -> Estimate
where
    F: FnMut(&[f64]) -> Vec<f64>,
    G: FnMut(&[f64]) -> Vec<f64>,
    H: FnMut(&[f64]) -> Vec<f64>,
    K: FnMut(&[f64]) -> Vec<f64>,
{
    let big = norm2_est(apply, apply_t, n, seed);
    let inv = norm2_est(apply_inv, apply_inv_t, n, seed.wrapping_add(1));
    Estimate {
        value: big.value * inv.value,
        iterations: big.iterations + inv.iterations,
        converged: big.converged && inv.converged,
    }
}

/// One factor of a linear operator assembled from dense pieces.
#[derive(Debug, Clone, Copy)]
pub enum Factor<'a> {
    Mat(&'a DenseMatrix),
    /// `T^{-1}` applied by binary64 substitution.
    TriInv(&'a DenseMatrix, Triangle),
    /// `P` of an LU factorization.
    Perm(&'a LUFactors),
    /// `P^T`.
    PermT(&'a LUFactors),
    /// `A^{-1}` through binary64 LU factors of `A`.
    LuInv(&'a LUFactors),
}

impl Factor<'_> {
    fn dims(&self) -> (usize, usize) {
        match self {
            Factor::Mat(m) => (m.rows(), m.cols()),
            Factor::TriInv(t, _) => (t.rows(), t.rows()),
            Factor::Perm(f) | Factor::PermT(f) | Factor::LuInv(f) => (f.n(), f.n()),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let st = Status::default();
        match *self {
            Factor::Mat(m) => m.mul_vec(x),
            Factor::TriInv(t, side) => crate::densela::tri_solve(Format::DOUBLE, t, x, side, &st).unwrap_or_else(|_| vec![f64::NAN; x.len()]),
            Factor::Perm(f) => f.permute(x),
            Factor::PermT(f) => f.permute_t(x),
            Factor::LuInv(f) => f.solve(Format::DOUBLE, x, &st).unwrap_or_else(|_| vec![f64::NAN; x.len()]),
        }
    }

    fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            Factor::Mat(m) => m.mul_vec_t(x),
            Factor::TriInv(t, side) => tri_solve_t_f64(t, x, side).unwrap_or_else(|_| vec![f64::NAN; x.len()]),
            Factor::Perm(f) => f.permute_t(x),
            Factor::PermT(f) => f.permute(x),
            Factor::LuInv(f) => f.solve_t(x).unwrap_or_else(|_| vec![f64::NAN; x.len()]),
        }
    }
}

/// A sum of products of [`Factor`]s, each product written left to right as
/// in `F1 F2 ... Fm` (so `Fm` is applied first).
#[derive(Debug, Clone, Default)]
pub struct LinearOp<'a> {
    terms: Vec<Vec<Factor<'a>>>,
}

impl<'a> LinearOp<'a> {
    pub fn product(factors: Vec<Factor<'a>>) -> Self {
        LinearOp { terms: vec![factors] }
    }

    pub fn plus(mut self, factors: Vec<Factor<'a>>) -> Self {
        self.terms.push(factors);
        self
    }

    pub fn cols(&self) -> usize {
        self.terms[0].last().expect("empty product").dims().1
    }

    pub fn rows(&self) -> usize {
        self.terms[0].first().expect("empty product").dims().0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for term in &self.terms {
            let mut v = x.to_vec();
            for f in term.iter().rev() {
                v = f.apply(&v);
            }
            out.iter_mut().zip(&v).for_each(|(o, a)| *o += a);
        }
        out
    }

    pub fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for term in &self.terms {
            let mut v = x.to_vec();
            for f in term.iter() {
                v = f.apply_t(&v);
            }
            out.iter_mut().zip(&v).for_each(|(o, a)| *o += a);
        }
        out
    }

    pub fn norm2(&self, seed: u64) -> Estimate {
        norm2_est(|x| self.apply(x), |x| self.apply_t(x), self.cols(), seed)
    }
}

/// `|| |F1| |F2| ... |Fm| ||_2` for explicit matrices.
pub fn abs_product_norm(factors: &[&DenseMatrix], seed: u64) -> f64 {
    let abs: Vec<DenseMatrix> = factors.iter().map(|m| m.abs()).collect();
    LinearOp::product(abs.iter().map(Factor::Mat).collect()).norm2(seed).value
}

/// Convenience: `||M||_2` for an explicit matrix.
pub fn matrix_norm2(m: &DenseMatrix, seed: u64) -> Estimate {
    norm2_est(|x| m.mul_vec(x), |x| m.mul_vec_t(x), m.cols(), seed)
}
