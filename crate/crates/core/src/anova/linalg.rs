//! Householder QR that processes columns in the given order and flags a
//! column as aliased when it is numerically in the span of the columns
//! already accepted. Skipped columns keep the original order of the rest,
//! which is what sequential sums of squares need.

/// Relative tolerance for declaring a column aliased.
pub const ALIAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Qr {
    /// Original column indices of accepted (non-aliased) columns, in order.
    pub accepted: Vec<usize>,
    pub aliased: Vec<bool>,
    /// `Q^T y`; entry `k < rank` is the effect of the k-th accepted column.
    pub effects: Vec<f64>,
    /// Upper-triangular `R`, row-major, `rank x rank`.
    pub r: Vec<Vec<f64>>,
}

impl Qr {
    pub fn rank(&self) -> usize {
        self.accepted.len()
    }

    pub fn rss(&self) -> f64 {
        self.effects[self.rank()..].iter().map(|e| e * e).sum()
    }

    /// Least-squares coefficients of the accepted columns.
    pub fn solve(&self) -> Vec<f64> {
        let k = self.rank();
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = self.effects[i];
            for j in i + 1..k {
                s -= self.r[i][j] * beta[j];
            }
            beta[i] = s / self.r[i][i];
        }
        beta
    }

    /// Diagonal of `(R^T R)^{-1}`, i.e. unscaled coefficient variances.
    pub fn unscaled_variances(&self) -> Vec<f64> {
        let k = self.rank();
        // Rinv is upper triangular; column j solves R x = e_j.
        let mut rinv = vec![vec![0.0; k]; k];
        for j in 0..k {
            for i in (0..=j).rev() {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for l in i + 1..=j {
                    s -= self.r[i][l] * rinv[l][j];
                }
                rinv[i][j] = s / self.r[i][i];
            }
        }
        rinv.iter().map(|row| row.iter().map(|v| v * v).sum()).collect()
    }
}

/// Decomposes the column-major matrix `cols` and applies the same
/// reflections to `y`.
pub fn householder_qr(cols: &[Vec<f64>], y: &[f64]) -> Qr {
    let n = y.len();
    let p = cols.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut qty = y.to_vec();
    let scale = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let threshold = ALIAS_TOL * scale.max(f64::MIN_POSITIVE);
    let mut accepted = Vec::new();
    let mut aliased = vec![false; p];
    let mut v = vec![0.0; n];
    for j in 0..p {
        let k = accepted.len();
        if k == n {
            aliased[j] = true;
            continue;
        }
        let norm = a[j][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= threshold {
            aliased[j] = true;
            continue;
        }
        let alpha = if a[j][k] > 0.0 { -norm } else { norm };
        let len = n - k;
        v[..len].copy_from_slice(&a[j][k..]);
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v[..len].iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            if f != 0.0 {
                for (c, vi) in col[k..].iter_mut().zip(&v[..len]) {
                    *c -= f * vi;
                }
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(col);
        }
        reflect(&mut qty);
        a[j][k] = alpha;
        for x in a[j][k + 1..].iter_mut() {
            *x = 0.0;
        }
        accepted.push(j);
    }
    let rank = accepted.len();
    let r = (0..rank).map(|i| (0..rank).map(|kk| if kk >= i { a[accepted[kk]][i] } else { 0.0 }).collect()).collect();
    Qr { accepted, aliased, effects: qty, r }
}
