//! Dense real helpers for polyhedral cones: a phase-1 simplex and null vectors.

/// Finds `x ≥ 0` with `A x = b`, or `None` if the system is infeasible.
/// Dense tableau, Bland's rule, artificial variables for every row.
pub fn feasible(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let scale = a
        .iter()
        .flatten()
        .chain(b)
        .map(|v| v.abs())
        .fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    // columns: n structural, m artificial, then rhs
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    let mut basis = vec![0; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sign * b[i];
        basis[i] = n + i;
    }
    // objective row: minimise the sum of artificials, stored as reduced costs
    for j in 0..width {
        if j >= n && j < n + m {
            continue;
        }
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    for _ in 0..50 * (n + m + 1) {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -tol) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > tol {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((k, r)) => ratio < r - tol || (ratio <= r + tol && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            break;
        };
        let pivot = t[row][enter];
        for v in t[row].iter_mut() {
            *v /= pivot;
        }
        for i in 0..=m {
            if i != row {
                let factor = t[i][enter];
                if factor != 0.0 {
                    for j in 0..width {
                        t[i][j] -= factor * t[row][j];
                    }
                }
            }
        }
        basis[row] = enter;
    }
    if -t[m][width - 1] > 1e-8 * scale {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1].max(0.0);
        }
    }
    Some(x)
}

/// Rank of a row set, by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>]) -> usize {
    row_echelon(rows).1.len()
}

/// A unit vector spanning the null space of `rows` when it is one-dimensional.
pub fn null_vector(rows: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    let (r, pivots) = row_echelon(rows);
    if pivots.len() + 1 != dim {
        return None;
    }
    let free = (0..dim).find(|c| !pivots.contains(c))?;
    let mut x = vec![0.0; dim];
    x[free] = 1.0;
    for (i, &pc) in pivots.iter().enumerate().rev() {
        let s: f64 = (pc + 1..dim).map(|j| r[i][j] * x[j]).sum();
        x[pc] = -s / r[i][pc];
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Some(x.into_iter().map(|v| v / norm).collect())
}

fn row_echelon(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r: Vec<Vec<f64>> = rows.to_vec();
    let dim = r.first().map_or(0, Vec::len);
    let scale = r.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = 1e-10 * scale.max(1e-300);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..dim {
        if row == r.len() {
            break;
        }
        let (best, val) = (row..r.len())
            .map(|i| (i, r[i][col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        r.swap(row, best);
        for i in row + 1..r.len() {
            let f = r[i][col] / r[row][col];
            if f != 0.0 {
                for j in col..dim {
                    r[i][j] -= f * r[row][j];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    r.truncate(pivots.len());
    (r, pivots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_decides_membership() {
        // columns (1,0), (1,1): (2,1) = 1·(1,0) + 1·(1,1)
        let a = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
        let x = feasible(&a, &[2.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(feasible(&a, &[1.0, 1.0]).is_some());
        assert!(feasible(&a, &[0.0, 1.0]).is_none());
        assert!(feasible(&a, &[-1.0, 0.0]).is_none());
        assert!(feasible(&a, &[0.0, -1.0]).is_none());
    }

    #[test]
    fn null_vectors() {
        let v = null_vector(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 3).unwrap();
        assert!((v[0] + v[1]).abs() < 1e-12 && v[2].abs() < 1e-12);
        assert!(null_vector(&[vec![1.0, 0.0, 0.0]], 3).is_none());
        assert_eq!(rank(&[vec![1.0, 2.0], vec![2.0, 4.0]]), 1);
        let v = null_vector(&[], 1).unwrap();
        assert_eq!(v, vec![1.0]);
    }
}
