//! Symmetric tridiagonal pencils `K - lambda M` with diagonal positive `M`.
//!
//! Eigenvalues come from Sturm counting (inertia of the LDL^T factorization)
//! plus bisection; eigenvectors from shifted inverse iteration.

/// `K` is symmetric tridiagonal (`diag`, `off`), `M` is diagonal and positive.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Pencil {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of generalized eigenvalues strictly below `lambda`.
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - lambda * self.mass[i] - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + lambda.abs() * self.mass[i]).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin lower bound on the spectrum of `M^-1/2 K M^-1/2`.
    pub fn lower_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut radius = 0.0;
                if i > 0 {
                    radius += self.off[i - 1].abs() / (self.mass[i - 1] * self.mass[i]).sqrt();
                }
                if i + 1 < n {
                    radius += self.off[i].abs() / (self.mass[i] * self.mass[i + 1]).sqrt();
                }
                self.diag[i] / self.mass[i] - radius
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        if k >= self.len() {
            return None;
        }
        let mut lo = self.lower_bound();
        let mut step = lo.abs().max(1.0);
        let mut hi = lo + step;
        while self.sturm_count(hi) <= k {
            lo = hi;
            step *= 2.0;
            hi += step;
            if !hi.is_finite() {
                return None;
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Eigenvector for an accurate eigenvalue, normalized to unit max-norm
    /// with a positive first significant entry.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let sub: Vec<f64> = self.off.clone();
        let diag: Vec<f64> = (0..n).map(|i| self.diag[i] - lambda * self.mass[i]).collect();
        let mut v: Vec<f64> = self.mass.iter().map(|m| m.sqrt()).collect();
        for _ in 0..3 {
            let rhs: Vec<f64> = v.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
            v = solve_pivoted(&sub, &diag, &sub, &rhs);
            let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if scale == 0.0 || !scale.is_finite() {
                break;
            }
            v.iter_mut().for_each(|x| *x /= scale);
        }
        let threshold = 1e-6;
        if let Some(first) = v.iter().find(|x| x.abs() > threshold) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    }

    /// `|(K - lambda M) v|_inf / (|K v|_inf + |lambda| |M v|_inf)`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let n = self.len();
        let mut num = 0.0f64;
        let mut kv_max = 0.0f64;
        let mut mv_max = 0.0f64;
        for i in 0..n {
            let mut kv = self.diag[i] * v[i];
            if i > 0 {
                kv += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                kv += self.off[i] * v[i + 1];
            }
            let mv = self.mass[i] * v[i];
            num = num.max((kv - lambda * mv).abs());
            kv_max = kv_max.max(kv.abs());
            mv_max = mv_max.max(mv.abs());
        }
        let den = kv_max + lambda.abs() * mv_max;
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

/// Sign changes of `v`, ignoring entries below `rel_tol * max|v|`.
pub fn count_nodes(v: &[f64], rel_tol: f64) -> usize {
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut nodes = 0;
    let mut prev = 0.0f64;
    for &x in v {
        if x.abs() <= rel_tol * scale {
            continue;
        }
        if prev != 0.0 && prev.signum() != x.signum() {
            nodes += 1;
        }
        prev = x;
    }
    nodes
}

/// Tridiagonal solve with partial pivoting (the `gtsv` scheme).
/// `sub[i]` couples rows `i+1, i`; `sup[i]` couples rows `i, i+1`.
pub fn solve_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    du.push(0.0);
    let mut dl = sub.to_vec();
    dl.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let tiny = f64::MIN_POSITIVE.sqrt();

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let factor = dl[i] / d[i];
            d[i + 1] -= factor * du[i];
            b[i + 1] -= factor * b[i];
            dl[i] = 0.0;
        } else {
            let factor = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - factor * tmp;
            du2[i] = du[i + 1];
            du[i + 1] *= -factor;
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= factor * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}
