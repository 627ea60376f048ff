//! Least squares by elimination on the augmented cross-product matrix.
//! Shares no code with the library's QR path.

/// Residual sum of squares after entering each column in order. Columns
/// whose pivot collapses below `tol` times their raw sum of squares are
/// treated as aliased and leave the RSS unchanged.
pub fn sequential_rss(cols: &[Vec<f64>], y: &[f64], tol: f64) -> Vec<f64> {
    let p = cols.len();
    let mut all: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    all.push(y);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut a: Vec<Vec<f64>> = (0..=p).map(|i| (0..=p).map(|j| dot(all[i], all[j])).collect()).collect();
    let raw: Vec<f64> = (0..=p).map(|i| a[i][i]).collect();
    let mut out = Vec::with_capacity(p);
    for k in 0..p {
        let pivot = a[k][k];
        if pivot > tol * raw[k] && pivot > 0.0 {
            for i in k + 1..=p {
                let f = a[i][k] / pivot;
                if f != 0.0 {
                    for j in k + 1..=p {
                        a[i][j] -= f * a[k][j];
                    }
                }
            }
        }
        out.push(a[p][p]);
    }
    out
}

/// Solves the normal equations of a full-rank design by Gaussian
/// elimination with partial pivoting.
pub fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = cols.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut m: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut row: Vec<f64> = (0..p).map(|j| dot(&cols[i], &cols[j])).collect();
            row.push(dot(&cols[i], y));
            row
        })
        .collect();
    for k in 0..p {
        let piv = (k..p).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, piv);
        for i in 0..p {
            if i != k {
                let f = m[i][k] / m[k][k];
                for j in k..=p {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    (0..p).map(|i| m[i][p] / m[i][i]).collect()
}
