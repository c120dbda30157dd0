//! Small dense helpers. Problem sizes here are a handful of rows, so
//! everything works on row lists and copies freely.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold for the affine-independence rank test.
pub const RANK_PIVOT_REL: f64 = 1e-9;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rank of the matrix with the given rows, by Gaussian elimination with
/// complete pivoting. A pivot counts when it exceeds `rel` times the first
/// (largest) pivot.
pub fn rank(rows: &[Vec<f64>], rel: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let nrows = m.len();
    let mut first_pivot = 0.0;
    let mut r = 0;
    while r < nrows.min(ncols) {
        let mut best = (r, r, 0.0_f64);
        for (i, row) in m.iter().enumerate().skip(r) {
            for (j, v) in row.iter().enumerate().skip(r) {
                if v.abs() > best.2 {
                    best = (i, j, v.abs());
                }
            }
        }
        if r == 0 {
            first_pivot = best.2;
            if first_pivot == 0.0 {
                return 0;
            }
        }
        if best.2 <= rel * first_pivot {
            break;
        }
        m.swap(r, best.0);
        for row in m.iter_mut() {
            row.swap(r, best.1);
        }
        let pivot_row = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            let factor = row[r] / pivot_row[r];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(r) {
                *x -= factor * p;
            }
        }
        r += 1;
    }
    r
}

pub fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Solves `M x = b` for square `M` given by rows. `None` when singular.
pub fn solve_square(rows: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    if rows.len() != n {
        return None;
    }
    let m = matrix_from_rows(rows, n);
    let lu = m.lu();
    let x = lu.solve(&DVector::from_column_slice(b))?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// Minimum-norm least-squares solution of `M x = b` and the residual
/// `‖M x − b‖∞`.
pub fn least_squares(rows: &[Vec<f64>], ncols: usize, b: &[f64]) -> (Vec<f64>, f64) {
    if rows.is_empty() {
        return (vec![0.0; ncols], 0.0);
    }
    let m = matrix_from_rows(rows, ncols);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let rhs = DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, eps)
        .unwrap_or_else(|_| DVector::zeros(ncols));
    let r = &m * &x - rhs;
    (x.iter().copied().collect(), r.amax())
}

/// Orthonormal basis of the directions orthogonal to the affine hull of
/// `points`, as (normal, offset) pairs with `⟨normal, p⟩ = offset` on the hull.
pub fn affine_hull_normals(points: &[Vec<f64>], rel: f64) -> Vec<(Vec<f64>, f64)> {
    let Some(p0) = points.first() else {
        return Vec::new();
    };
    let dim = p0.len();
    let diffs: Vec<Vec<f64>> = points.iter().skip(1).map(|p| sub(p, p0)).collect();
    let scale = diffs.iter().map(|d| norm_inf(d)).fold(0.0, f64::max);
    if diffs.is_empty() || scale == 0.0 {
        return (0..dim)
            .map(|k| {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                let off = p0[k];
                (e, off)
            })
            .collect();
    }
    // Gram matrix eigenvectors with negligible eigenvalue span the normal space.
    let d = matrix_from_rows(&diffs, dim);
    let gram = d.transpose() * &d;
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= rel * rel * lmax.max(f64::MIN_POSITIVE) {
            let n: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let off = dot(&n, p0);
            out.push((n, off));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_detects_dependence() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(rank(&rows, RANK_PIVOT_REL), 1);
        let rows = vec![vec![4.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(rank(&rows, RANK_PIVOT_REL), 2);
        assert_eq!(rank(&[vec![0.0, 0.0]], RANK_PIVOT_REL), 0);
    }

    #[test]
    fn solve_and_least_squares_agree_on_square_systems() {
        let rows = vec![vec![4.0, 2.0], vec![2.0, 4.0]];
        let x = solve_square(&rows, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 0.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let (y, res) = least_squares(&rows, 2, &[2.0, 4.0]);
        assert!(res < 1e-12);
        assert!((y[1] - 1.0).abs() < 1e-12);
        assert!(solve_square(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn hull_normals_of_a_plane() {
        let pts = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ];
        let normals = affine_hull_normals(&pts, 1e-9);
        assert_eq!(normals.len(), 1);
        let (n, off) = &normals[0];
        for p in &pts {
            assert!((dot(n, p) - off).abs() < 1e-12);
        }
    }
}
