//! Small linear least-squares helpers.

/// Solves the normal equations for `y ≈ Σ_j c_j φ_j(x)`.
///
/// Returns `None` when the system is singular (too few distinct points).
pub fn least_squares<F>(xs: &[f64], ys: &[f64], basis: &[F]) -> Option<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let m = basis.len();
    if xs.len() < m {
        return None;
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let phi: Vec<f64> = basis.iter().map(|f| f(x)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += phi[i] * phi[j];
            }
            a[i][m] += phi[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut c = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| a[i][k] * c[k]).sum();
        c[i] = (a[i][m] - s) / a[i][i];
    }
    Some(c)
}

/// Slope and intercept of the straight-line fit `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let xs: Vec<f64> = (1..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 / x.sqrt() + 0.5 / x).collect();
        let basis: [fn(f64) -> f64; 3] = [|_| 1.0, |x| 1.0 / x.sqrt(), |x| 1.0 / x];
        let c = least_squares(&xs, &ys, &basis).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10 && (c[1] + 3.0).abs() < 1e-9 && (c[2] - 0.5).abs() < 1e-9);
        let (s, b) = linear_fit(&xs, &xs.iter().map(|x| 4.0 * x - 1.0).collect::<Vec<_>>()).unwrap();
        assert!((s - 4.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-10);
    }
}
