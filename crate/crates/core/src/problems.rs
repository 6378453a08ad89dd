//! Test problems: the `A = U D V` synthetic family, MatrixMarket files, and
//! double-double reference solutions.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::densela::{householder_qr, lu_factor_s, matvec_quad, norm2_quad, DenseMatrix};
use crate::error::{Error, Result};
use crate::precision::{QuadArith, QuadValue, Status};

/// Identifies the generator; bump when the stream layout changes.
pub const PRNG_VERSION: &str = "chacha20/stream-v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Synthetic { c: f64, seed: u64 },
    File { path: PathBuf, seed: u64 },
    /// Assembled directly by the caller.
    Constructed,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub label: String,
    pub provenance: Provenance,
}

impl Problem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, label: impl Into<String>, provenance: Provenance) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("coefficient matrix is {}x{}", a.rows(), a.cols())));
        }
        if b.len() != a.rows() {
            return Err(Error::Dimension(format!("rhs length {} for n = {}", b.len(), a.rows())));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("problem data contains NaN or infinity".into()));
        }
        Ok(Problem { a, b, label: label.into(), provenance })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {})", self.label, self.n())
    }
}

/// Stream id for a `(n, c, seed)` triple; each triple draws from its own
/// ChaCha stream so problems never share random numbers.
fn stream_id(n: usize, c: f64) -> u64 {
    (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ c.to_bits()
}

fn rng_for(n: usize, c: f64, seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(n, c));
    rng
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal moved into `Q`.
fn random_orthogonal(n: usize, rng: &mut ChaCha20Rng) -> Result<DenseMatrix> {
    let g: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    let (q, _) = householder_qr(&DenseMatrix::from_vec(n, n, g)?)?;
    Ok(q)
}

/// Singular values `10^{-c (j-1)/(n-1)}`, `j = 1..n`.
pub fn synthetic_singular_values(n: usize, c: f64) -> Vec<f64> {
    (0..n).map(|j| 10f64.powf(-c * j as f64 / (n - 1) as f64)).collect()
}

/// The `(U, D, V)` factors behind [`synthetic`].
pub fn synthetic_factors(n: usize, c: f64, seed: u64) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix, Vec<f64>)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("synthetic problems need n >= 2, got {n}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("condition exponent must be >= 0, got {c}")));
    }
    let mut rng = rng_for(n, c, seed);
    let u = random_orthogonal(n, &mut rng)?;
    let v = random_orthogonal(n, &mut rng)?;
    let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    Ok((u, synthetic_singular_values(n, c), v, b))
}

/// `A = U D V` with random orthogonal `U`, `V`, so `kappa_2(A) = 10^c`, and
/// `b` with entries uniform on (0, 1).
pub fn synthetic(n: usize, c: f64, seed: u64) -> Result<Problem> {
    let (u, d, v, b) = synthetic_factors(n, c, seed)?;
    let mut ud = u;
    for i in 0..n {
        for (j, dj) in d.iter().enumerate() {
            ud[(i, j)] *= dj;
        }
    }
    let a = ud.matmul(&v)?;
    Problem::new(a, b, format!("synthetic-c{c}"), Provenance::Synthetic { c, seed })
}

/// Right-hand side for file problems, drawn like the synthetic ones.
pub fn uniform_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(n, -1.0));
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmLayout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a real MatrixMarket matrix into dense storage.
pub fn read_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty file".into() })?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse { line: 1, message: format!("bad header `{header}`") });
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => MmLayout::Coordinate,
        "array" => MmLayout::Array,
        other => return Err(Error::Parse { line: 1, message: format!("unknown layout `{other}`") }),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(Error::UnsupportedField(other.to_string())),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_no, size_line) = body.next().ok_or(Error::Parse { line: 2, message: "missing size line".into() })?;
    let parse_usize = |s: &str, line: usize| {
        s.parse::<usize>().map_err(|_| Error::Parse { line: line + 1, message: format!("expected integer, found `{s}`") })
    };
    let parse_f64 = |s: &str, line: usize| {
        s.parse::<f64>().map_err(|_| Error::Parse { line: line + 1, message: format!("expected number, found `{s}`") })
    };
    let size: Vec<&str> = size_line.split_whitespace().collect();
    let want = if layout == MmLayout::Coordinate { 3 } else { 2 };
    if size.len() != want {
        return Err(Error::Parse { line: size_no + 1, message: format!("size line needs {want} integers") });
    }
    let rows = parse_usize(size[0], size_no)?;
    let cols = parse_usize(size[1], size_no)?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse { line: size_no + 1, message: "empty matrix".into() });
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mirror = |m: &mut DenseMatrix, i: usize, j: usize, v: f64| match symmetry {
        MmSymmetry::General => {}
        MmSymmetry::Symmetric if i != j => m[(j, i)] = v,
        MmSymmetry::SkewSymmetric if i != j => m[(j, i)] = -v,
        _ => {}
    };

    match layout {
        MmLayout::Coordinate => {
            let nnz = parse_usize(size[2], size_no)?;
            let mut count = 0;
            for (no, line) in body {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 3 {
                    return Err(Error::Parse { line: no + 1, message: "entry needs row, column and value".into() });
                }
                let i = parse_usize(f[0], no)?;
                let j = parse_usize(f[1], no)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse { line: no + 1, message: format!("index ({i}, {j}) out of range") });
                }
                let v = parse_f64(f[2], no)?;
                // duplicates are summed, as in the reference reader
                m[(i - 1, j - 1)] += v;
                let cur = m[(i - 1, j - 1)];
                mirror(&mut m, i - 1, j - 1, cur);
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse { line: size_no + 1, message: format!("expected {nnz} entries, found {count}") });
            }
        }
        MmLayout::Array => {
            // column-major; symmetric storage lists the lower triangle only
            let mut positions = Vec::new();
            for j in 0..cols {
                let start = if symmetry == MmSymmetry::General { 0 } else { j };
                for i in start..rows {
                    positions.push((i, j));
                }
            }
            let mut it = positions.into_iter();
            let mut last = size_no;
            for (no, line) in body {
                last = no;
                for tok in line.split_whitespace() {
                    let (i, j) = it.next().ok_or(Error::Parse { line: no + 1, message: "too many values".into() })?;
                    let v = parse_f64(tok, no)?;
                    m[(i, j)] = v;
                    mirror(&mut m, i, j, v);
                }
            }
            if it.next().is_some() {
                return Err(Error::Parse { line: last + 1, message: "too few values".into() });
            }
        }
    }
    Ok(m)
}

/// Writes `m` as a general real coordinate file with 17 significant digits
/// (zeros omitted).
pub fn write_matrix_market(m: &DenseMatrix, mut out: impl Write) -> Result<()> {
    let nnz = m.data().iter().filter(|&&v| v != 0.0).count();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.rows(), m.cols(), nnz)?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

/// Dense problem from a MatrixMarket file; `b` is seeded uniform (0, 1).
pub fn load_matrix_market(path: impl AsRef<Path>, seed: u64) -> Result<Problem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let a = read_matrix_market(&text)?;
    if !a.is_square() {
        return Err(Error::Dimension(format!("{} is {}x{}, not square", path.display(), a.rows(), a.cols())));
    }
    let label = path.file_stem().map_or_else(|| "matrix".to_string(), |s| s.to_string_lossy().into_owned());
    let b = uniform_rhs(a.rows(), seed);
    Problem::new(a, b, label, Provenance::File { path: path.to_path_buf(), seed })
}

/// Solution of `A x = b` in double-double: LU with partial pivoting and one
/// step of iterative refinement.
pub fn reference_solution(p: &Problem) -> Result<Vec<QuadValue>> {
    let status = Status::default();
    let ar = QuadArith::new(&status);
    let (packed, perm) = lu_factor_s(&ar, &p.a)?;
    let n = p.n();
    let solve = |rhs: &[QuadValue]| -> Result<Vec<QuadValue>> {
        let pb: Vec<QuadValue> = perm.iter().map(|&i| rhs[i]).collect();
        let y = forward_packed(&packed, n, pb);
        backward_packed(&packed, n, y)
    };
    let b: Vec<QuadValue> = p.b.iter().map(|&v| QuadValue::from(v)).collect();
    let mut x = solve(&b)?;
    let ax = matvec_quad(&p.a, &x);
    let r: Vec<QuadValue> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let d = solve(&r)?;
    x.iter_mut().zip(&d).for_each(|(xi, &di)| *xi = *xi + di);
    Ok(x)
}

fn forward_packed(packed: &[QuadValue], n: usize, mut x: Vec<QuadValue>) -> Vec<QuadValue> {
    for i in 0..n {
        let mut acc = x[i];
        for j in 0..i {
            acc = acc - packed[i * n + j] * x[j];
        }
        x[i] = acc;
    }
    x
}

fn backward_packed(packed: &[QuadValue], n: usize, mut x: Vec<QuadValue>) -> Result<Vec<QuadValue>> {
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc = acc - packed[i * n + j] * x[j];
        }
        let d = packed[i * n + i];
        if d.hi() == 0.0 {
            return Err(Error::SingularInFormat { format: "quad".into(), index: i });
        }
        x[i] = acc / d;
    }
    Ok(x)
}

/// Backward error of a double-double vector, residual in double-double.
pub fn reference_backward_error(p: &Problem, x: &[QuadValue], norm_a: f64) -> f64 {
    let ax = matvec_quad(&p.a, x);
    let r: Vec<QuadValue> = p.b.iter().zip(&ax).map(|(&bi, &ai)| QuadValue::from(bi) - ai).collect();
    let nb = crate::densela::norm2(&p.b);
    norm2_quad(&r) / (norm_a * norm2_quad(x) + nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_is_deterministic() {
        let p = synthetic(20, 3.0, 7).unwrap();
        let q = synthetic(20, 3.0, 7).unwrap();
        assert_eq!(p.a, q.a);
        assert_eq!(p.b, q.b);
        let r = synthetic(20, 3.0, 8).unwrap();
        assert_ne!(p.a, r.a);
        assert!(p.b.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn synthetic_rejects_bad_input() {
        assert!(synthetic(1, 1.0, 0).is_err());
        assert!(synthetic(10, -1.0, 0).is_err());
    }

    #[test]
    fn mm_coordinate_diag() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 2.0\n";
        let m = read_matrix_market(text).unwrap();
        assert_eq!(m, DenseMatrix::from_diag(&[1.0, 2.0]));
    }

    #[test]
    fn mm_symmetric_mirrors() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n  1   1  4\n2 1 -1.5\n";
        let m = read_matrix_market(text).unwrap();
        assert_eq!(m.data(), &[4.0, -1.5, -1.5, 0.0]);
        let arr = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = read_matrix_market(arr).unwrap();
        assert_eq!(m.data(), &[1.0, 2.0, 2.0, 3.0]);
        let gen = "%%MatrixMarket matrix array real general\n2 2\n1 2\n3 4\n";
        assert_eq!(read_matrix_market(gen).unwrap().data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn mm_errors() {
        let complex = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n";
        assert!(matches!(read_matrix_market(complex), Err(Error::UnsupportedField(f)) if f == "complex"));
        let pattern = "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n";
        assert!(matches!(read_matrix_market(pattern), Err(Error::UnsupportedField(_))));
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n";
        assert!(matches!(read_matrix_market(bad), Err(Error::Parse { line: 3, .. })));
        let range = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read_matrix_market(range), Err(Error::Parse { line: 3, .. })));
        let count = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(matches!(read_matrix_market(count), Err(Error::Parse { .. })));
    }

    #[test]
    fn reference_solution_small() {
        let p = Problem::new(DenseMatrix::identity(3), vec![1.0, 2.0, 3.0], "id", Provenance::Constructed).unwrap();
        let x = reference_solution(&p).unwrap();
        assert_eq!(x.iter().map(|v| v.hi()).collect::<Vec<_>>(), p.b);
        let p = Problem::new(DenseMatrix::from_diag(&[2.0]), vec![4.0], "d", Provenance::Constructed).unwrap();
        let x = reference_solution(&p).unwrap();
        assert_eq!((x[0].hi(), x[0].lo()), (2.0, 0.0));
    }
}
