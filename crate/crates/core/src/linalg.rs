//! Thin wrappers around faer's dense factorizations.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Singular values in nonincreasing order; empty for an empty matrix.
pub fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|_| Error::Factorization)
}

/// Number of singular values above `tol * sigma_max * max(rows, cols)`.
pub fn rank_from_singular_values(sv: &[f64], tol: f64, rows: usize, cols: usize) -> usize {
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let cut = tol * smax * rows.max(cols) as f64;
    sv.iter().take_while(|&&s| s > cut).count()
}

/// Numerical rank with the relative threshold `tol * sigma_max * max(rows, cols)`.
pub fn numerical_rank(a: MatRef<'_, f64>, tol: f64) -> Result<usize> {
    let sv = singular_values(a)?;
    Ok(rank_from_singular_values(&sv, tol, a.nrows(), a.ncols()))
}

pub struct FullSvd {
    pub u: Mat<f64>,
    pub s: Vec<f64>,
    pub v: Mat<f64>,
}

pub fn full_svd(a: MatRef<'_, f64>) -> Result<FullSvd> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(FullSvd {
            u: Mat::identity(a.nrows(), a.nrows()),
            s: Vec::new(),
            v: Mat::identity(a.ncols(), a.ncols()),
        });
    }
    let svd = a.svd().map_err(|_| Error::Factorization)?;
    Ok(FullSvd {
        u: svd.U().to_owned(),
        s: svd.S().column_vector().iter().copied().collect(),
        v: svd.V().to_owned(),
    })
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rcond * sigma_max`.
pub fn lstsq(a: MatRef<'_, f64>, b: &[f64], rcond: f64) -> Result<Vec<f64>> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Ok(vec![0.0; n]);
    }
    let svd = a.thin_svd().map_err(|_| Error::Factorization)?;
    let (u, v) = (svd.U(), svd.V());
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let cut = rcond * s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; n];
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cut || sk == 0.0 {
            break;
        }
        let coef: f64 = (0..a.nrows()).map(|i| u[(i, k)] * b[i]).sum::<f64>() / sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * v[(j, k)];
        }
    }
    Ok(x)
}

/// Lawson-Hanson nonnegative least squares: `min |a x - b|` over `x >= 0`.
pub fn nnls(a: MatRef<'_, f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (rows, n) = (a.nrows(), a.ncols());
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let tol = 1e-12 * (1.0 + max_abs(a)) * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let gradient = |x: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = (0..rows).map(|i| b[i] - (0..n).map(|j| a[(i, j)] * x[j]).sum::<f64>()).collect();
        (0..n).map(|j| (0..rows).map(|i| a[(i, j)] * r[i]).sum()).collect()
    };
    for _ in 0..3 * n.max(1) {
        let g = gradient(&x);
        let Some(t) = (0..n)
            .filter(|&j| !passive[j] && g[j] > tol)
            .max_by(|&i, &j| g[i].total_cmp(&g[j]))
        else {
            break;
        };
        passive[t] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = Mat::from_fn(rows, idx.len(), |i, k| a[(i, idx[k])]);
            let z = lstsq(sub.as_ref(), b, 1e-14)?;
            if z.iter().all(|&v| v > 0.0) {
                x.iter_mut().for_each(|v| *v = 0.0);
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[k]));
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    Ok(x)
}

/// Real roots of `c[0] + c[1] t + ... + c[k] t^k` from the eigenvalues of the
/// companion matrix, polished by a few Newton steps and sorted.
pub fn real_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut c = coeffs.to_vec();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-14 * scale) {
        c.pop();
    }
    let k = c.len() - 1;
    if k == 0 {
        return Ok(Vec::new());
    }
    let lead = c[k];
    let comp = Mat::from_fn(k, k, |i, j| {
        if i == 0 {
            -c[k - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = comp.eigenvalues().map_err(|_| Error::Factorization)?;
    let eval = |t: f64| c.iter().rev().fold(0.0, |acc, &v| acc * t + v);
    let deriv = |t: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &v)| acc * t + i as f64 * v);
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut t = z.re;
            for _ in 0..5 {
                let d = deriv(t);
                if d == 0.0 {
                    break;
                }
                let next = t - eval(t) / d;
                if eval(next).abs() >= eval(t).abs() {
                    break;
                }
                t = next;
            }
            t
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Largest absolute entry.
pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}
