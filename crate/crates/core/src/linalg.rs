//! Tiny dense routines for the low-dimensional systems in weight space.

/// Solves the square system `a·x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol`.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Numerical rank of the row set, each row scaled to unit max-norm first.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .filter_map(|r| {
            let s = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            (s > 0.0).then(|| r.iter().map(|v| v / s).collect())
        })
        .collect();
    let Some(cols) = m.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[piv][col].abs() <= tol {
            continue;
        }
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            let f = m[r][col] / m[rank][col];
            if f != 0.0 {
                for c in col..cols {
                    m[r][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the affine hull of `points`.
pub fn affine_rank(points: &[&[f64]], tol: f64) -> usize {
    let Some((first, rest)) = points.split_first() else {
        return 0;
    };
    let diffs: Vec<Vec<f64>> = rest
        .iter()
        .map(|p| p.iter().zip(*first).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs, tol)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_2x2() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0], 1e-12).unwrap();
        assert!(max_abs_diff(&x, &[0.8, 1.4]) < 1e-12);
    }

    #[test]
    fn singular_system() {
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&[vec![1.0, 0.0], vec![2.0, 0.0]], 1e-9), 1);
        assert_eq!(rank(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]], 1e-9), 2);
        assert_eq!(rank(&[], 1e-9), 0);
        let pts: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert_eq!(affine_rank(&pts, 1e-9), 1);
    }
}
