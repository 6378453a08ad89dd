use crate::densela::{givens_s, load_vec};
use crate::precision::{Arith, Format, Status};
use crate::with_arith;

/// Incremental QR of the Hessenberg matrix by Givens rotations.
///
/// Every value is stored in binary64 and lies on the grid of `fmt`, so
/// the state can be inspected between steps.
#[derive(Debug, Clone)]
pub struct LeastSquaresState {
    fmt: Format,
    rotations: Vec<(f64, f64)>,
    /// Rotated right-hand side, length `k + 1`.
    rhs: Vec<f64>,
    /// Columns of the triangular factor; column `j` has `j + 1` entries.
    r_cols: Vec<Vec<f64>>,
}

impl LeastSquaresState {
    pub fn new(fmt: Format, beta: f64) -> Self {
        LeastSquaresState { fmt, rotations: Vec::new(), rhs: vec![fmt.round(beta)], r_cols: Vec::new() }
    }

    pub fn steps(&self) -> usize {
        self.rotations.len()
    }

    /// Current residual estimate `alpha_k = |g_{k+1}|`.
    pub fn residual(&self) -> f64 {
        self.rhs.last().copied().unwrap_or(0.0).abs()
    }

    pub fn rotations(&self) -> &[(f64, f64)] {
        &self.rotations
    }

    pub fn max_abs_sine(&self) -> f64 {
        self.rotations.iter().fold(0.0, |m, &(_, s)| m.max(s.abs()))
    }

    /// Folds in the new Hessenberg column `h` (length `k + 1`, last entry
    /// is `h_{k+1,k}`) and returns the new residual estimate.
    pub fn update(&mut self, h: &[f64], status: &Status) -> f64 {
        let k = self.rotations.len();
        assert_eq!(h.len(), k + 2, "Hessenberg column must have k+2 entries at step k");
        let fmt = self.fmt;
        let (col, rot, g_k, g_next) = with_arith!(fmt, status, |ar| {
            let mut col = load_vec(&ar, h);
            for (i, &(c, s)) in self.rotations.iter().enumerate() {
                let (c, s) = (ar.load(c), ar.load(s));
                let (a, b) = (col[i], col[i + 1]);
                col[i] = ar.add(ar.mul(c, a), ar.mul(s, b));
                col[i + 1] = ar.sub(ar.mul(c, b), ar.mul(s, a));
            }
            let (c, s, r) = givens_s(&ar, col[k], col[k + 1]);
            col[k] = r;
            let g = ar.load(self.rhs[k]);
            let g_k = ar.mul(c, g);
            let g_next = ar.neg(ar.mul(s, g));
            let stored: Vec<f64> = col[..=k].iter().map(|&v| ar.store(v)).collect();
            (stored, (ar.store(c), ar.store(s)), ar.store(g_k), ar.store(g_next))
        });
        self.rotations.push(rot);
        self.r_cols.push(col);
        self.rhs[k] = g_k;
        self.rhs.push(g_next);
        self.residual()
    }

    /// `y_k` by back substitution against the triangular factor, in `fmt`.
    pub fn solution(&self, status: &Status) -> Vec<f64> {
        let k = self.r_cols.len();
        if k == 0 {
            return Vec::new();
        }
        with_arith!(self.fmt, status, |ar| {
            let mut y = load_vec(&ar, &self.rhs[..k]);
            for i in (0..k).rev() {
                let mut acc = y[i];
                for j in i + 1..k {
                    acc = ar.sub(acc, ar.mul(ar.load(self.r_cols[j][i]), y[j]));
                }
                y[i] = ar.div(acc, ar.load(self.r_cols[i][i]));
            }
            y.iter().map(|&v| ar.store(v)).collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::QuadValue;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn one_step_exact() {
        let st = Status::default();
        let mut ls = LeastSquaresState::new(Format::DOUBLE, 6.0);
        let alpha = ls.update(&[2.0, 0.0], &st);
        assert_eq!(alpha, 0.0);
        assert_eq!(ls.solution(&st), vec![3.0]);
        assert_eq!(ls.rotations(), &[(1.0, 0.0)]);
    }

    #[test]
    fn zero_column_uses_identity_rotation() {
        let st = Status::default();
        let mut ls = LeastSquaresState::new(Format::DOUBLE, 1.0);
        let alpha = ls.update(&[0.0, 0.0], &st);
        assert_eq!(ls.rotations(), &[(1.0, 0.0)]);
        assert_eq!(alpha, 0.0);
    }

    /// Dense least squares `min ||beta e1 - H y||` in double-double through
    /// the normal equations, returning the residual norm.
    fn quad_ls_residual(h: &[Vec<f64>], beta: f64, k: usize) -> f64 {
        // h[j] is column j with j + 2 entries
        let entry = |i: usize, j: usize| -> QuadValue {
            if i < h[j].len() {
                QuadValue::from(h[j][i])
            } else {
                QuadValue::ZERO
            }
        };
        let mut g = vec![vec![QuadValue::ZERO; k]; k];
        let mut rhs = vec![QuadValue::ZERO; k];
        for a in 0..k {
            for b in 0..k {
                let mut s = QuadValue::ZERO;
                for i in 0..=k {
                    s = s + entry(i, a) * entry(i, b);
                }
                g[a][b] = s;
            }
            rhs[a] = entry(0, a) * QuadValue::from(beta);
        }
        // Gaussian elimination without pivoting on the SPD system
        for p in 0..k {
            for r in p + 1..k {
                let m = g[r][p] / g[p][p];
                for c in p..k {
                    g[r][c] = g[r][c] - m * g[p][c];
                }
                rhs[r] = rhs[r] - m * rhs[p];
            }
        }
        let mut y = vec![QuadValue::ZERO; k];
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for j in i + 1..k {
                s = s - g[i][j] * y[j];
            }
            y[i] = s / g[i][i];
        }
        let mut res = 0.0f64;
        for i in 0..=k {
            let mut s = if i == 0 { QuadValue::from(beta) } else { QuadValue::ZERO };
            for j in 0..k {
                s = s - entry(i, j) * y[j];
            }
            res += s.to_f64() * s.to_f64();
        }
        res.sqrt()
    }

    #[test]
    fn residual_matches_dense_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for _ in 0..50 {
            let beta: f64 = rng.gen_range(0.5..4.0);
            let st = Status::default();
            let mut ls = LeastSquaresState::new(Format::DOUBLE, beta);
            let mut cols = Vec::new();
            for k in 0..5 {
                let col: Vec<f64> = (0..k + 2)
                    .map(|i| if i == k + 1 { rng.gen_range(0.1..1.0) } else { rng.gen_range(-1.0..1.0) })
                    .collect();
                cols.push(col.clone());
                let alpha = ls.update(&col, &st);
                let oracle = quad_ls_residual(&cols, beta, k + 1);
                assert!((alpha - oracle).abs() <= 1e-12 * beta, "k={k}: {alpha} vs {oracle}");
            }
        }
    }

    #[test]
    fn single_precision_stays_on_grid() {
        let st = Status::default();
        let mut ls = LeastSquaresState::new(Format::SINGLE, 1.0);
        ls.update(&[0.3, 0.7], &st);
        ls.update(&[0.1, 0.2, 0.9], &st);
        for &(c, s) in ls.rotations() {
            assert_eq!(c, Format::SINGLE.round(c));
            assert_eq!(s, Format::SINGLE.round(s));
        }
        for y in ls.solution(&st) {
            assert_eq!(y, Format::SINGLE.round(y));
        }
    }
}
