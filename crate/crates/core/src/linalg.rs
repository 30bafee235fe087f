//! Small dense linear algebra on row-major `n×n` matrices.

use crate::error::{Error, Result};
use crate::jet::Jet;

pub type Mat = Vec<Vec<f64>>;

/// Lower-triangular Cholesky factor, or `None` if `a` is not positive definite.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let l = cholesky(a)?;
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        // solve L z = e_c, then L^T w = z
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * z[k];
            }
            z[i] = s / l[i][i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l[k][i] * inv[k][c];
            }
            inv[i][c] = s / l[i][i];
        }
    }
    Some(inv)
}

/// Inverse of a matrix of jets by Gauss-Jordan elimination without pivoting.
/// Intended for symmetric positive-definite matrices, whose leading minors
/// never vanish.
pub fn jet_inverse(a: &[Vec<Jet>], what: &str) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    let layout = a[0][0].layout().clone();
    let mut m: Vec<Vec<Jet>> = a.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&layout, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for p in 0..n {
        let piv = m[p][p].recip().map_err(|e| Error::Singular {
            what: what.to_string(),
            detail: format!("zero pivot {} in row {p}", e.arg),
        })?;
        for j in 0..n {
            m[p][j] = &m[p][j] * &piv;
            inv[p][j] = &inv[p][j] * &piv;
        }
        for r in 0..n {
            if r == p {
                continue;
            }
            let f = m[r][p].clone();
            if f.coeffs().iter().all(|&v| v == 0.0) {
                continue;
            }
            for j in 0..n {
                let t = &f * &m[p][j];
                m[r][j] -= t;
                let t = &f * &inv[p][j];
                inv[r][j] -= t;
            }
        }
    }
    Ok(inv)
}

pub fn mat_values(a: &[Vec<Jet>]) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|v| v.value()).collect())
        .collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_inverse_roundtrip() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ];
        let inv = spd_inverse(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i][k] * inv[k][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        assert!(cholesky(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }
}
