//! Small dense linear algebra: cyclic Jacobi eigendecomposition for the
//! symmetric matrices that appear in the Fisher-information machinery, and a
//! Hermitian eigenvalue routine built on the real embedding
//! `H = A + iB  ->  [[A, -B], [B, A]]` (each eigenvalue of `H` appears twice).

use num_complex::Complex64;

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// `vectors` holds the eigenvectors as columns, so `a * vectors = vectors *
/// diag(values)`. Eigenvalues are sorted ascending.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: SquareMatrix,
}

/// Cyclic Jacobi iteration; adequate for the small matrices used here.
pub fn symmetric_eigen(a: &SquareMatrix) -> SymmetricEigen {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = SquareMatrix::identity(n);

    let off = |m: &SquareMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)] * m[(i, j)];
            }
        }
        s
    };

    let scale = m.max_abs().max(1.0);
    let tol = (scale * 1e-15).powi(2) * ((n * n) as f64);
    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Pseudo-inverse of a symmetric PSD matrix with a relative singularity
/// threshold. Returns the inverse and the null-space basis (columns whose
/// eigenvalues fell below the threshold).
pub fn symmetric_pseudo_inverse(
    a: &SquareMatrix,
    rel_threshold: f64,
) -> (SquareMatrix, Vec<Vec<f64>>) {
    let n = a.dim();
    let eig = symmetric_eigen(a);
    let largest = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let cutoff = rel_threshold * largest.max(f64::MIN_POSITIVE);
    let mut inv = SquareMatrix::zeros(n);
    let mut null_space = Vec::new();
    for k in 0..n {
        if eig.values[k].abs() <= cutoff {
            null_space.push((0..n).map(|row| eig.vectors[(row, k)]).collect());
            continue;
        }
        let w = 1.0 / eig.values[k];
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] += w * eig.vectors[(i, k)] * eig.vectors[(j, k)];
            }
        }
    }
    (inv, null_space)
}

/// Eigenvalues of a Hermitian matrix given as a flat row-major complex
/// buffer. Uses the doubled real symmetric embedding, so each eigenvalue of
/// the input appears twice; the deduplicated ascending list is returned.
pub fn hermitian_eigenvalues(data: &[Complex64], dim: usize) -> Vec<f64> {
    assert_eq!(data.len(), dim * dim);
    let mut emb = SquareMatrix::zeros(2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            let z = data[i * dim + j];
            emb[(i, j)] = z.re;
            emb[(i + dim, j + dim)] = z.re;
            emb[(i, j + dim)] = -z.im;
            emb[(i + dim, j)] = z.im;
        }
    }
    let eig = symmetric_eigen(&emb);
    // Values come sorted ascending with each eigenvalue doubled; take every
    // other one.
    eig.values.into_iter().step_by(2).collect()
}
