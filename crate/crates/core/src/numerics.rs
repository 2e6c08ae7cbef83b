//! Small numerical helpers shared by the solvers and the oracle.

/// Brent's method on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
    }
    Some(b)
}

/// All sign-change roots of `f` on the sample points `xs`, refined by Brent.
pub fn bracket_roots<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64], xtol: f64) -> Vec<f64> {
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (f0, f1) = (vals[i], vals[i + 1]);
        if !f0.is_finite() || !f1.is_finite() {
            continue;
        }
        if f0 == 0.0 {
            roots.push(xs[i]);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            if let Some(x) = brent(&mut f, xs[i], xs[i + 1], xtol) {
                roots.push(x);
            }
        }
    }
    if let (Some(&x), Some(&v)) = (xs.last(), vals.last()) {
        if v == 0.0 {
            roots.push(x);
        }
    }
    roots
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

const MAX_INTERVALS: usize = 1 << 16;

/// Adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, gk15(&f, a, b), 0u32)];
    let mut total = 0.0;
    let mut accepted = 0usize;
    // Each interval gets its share of the absolute error budget.
    let width = b - a;
    while let Some((lo, hi, (val, err), depth)) = stack.pop() {
        let budget = tol * (hi - lo) / width;
        let exhausted = depth > 50 || accepted + stack.len() >= MAX_INTERVALS;
        if err <= budget.max(f64::EPSILON * val.abs()) || exhausted {
            total += val;
            accepted += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, gk15(&f, lo, mid), depth + 1));
            stack.push((mid, hi, gk15(&f, mid, hi), depth + 1));
        }
    }
    total
}

/// [`integrate`] with a tolerance relative to a coarse estimate of the integral of `|f|`.
pub fn integrate_relative<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let pieces = 64;
    let h = (b - a) / f64::from(pieces);
    let scale: f64 = (0..pieces)
        .map(|i| gk15(&|x| f(x).abs(), a + h * f64::from(i), a + h * f64::from(i + 1)).0)
        .sum();
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    integrate(f, a, b, rel * scale)
}

/// Fourth-order central second derivative with step `h`.
pub fn second_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    LineFit { slope, intercept, r_squared }
}

/// Least-squares `y = c0 + c1 x + c2 x^2`, returned as `[c0, c1, c2]`.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&x, &y) in xs.iter().zip(ys) {
        let row = nalgebra::Vector3::new(1.0, x, x * x);
        ata += row * row.transpose();
        aty += row * y;
    }
    match ata.lu().solve(&aty) {
        Some(c) => [c[0], c[1], c[2]],
        None => [f64::NAN; 3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn bracketing_collects_every_sign_change() {
        let xs: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * f64::from(i)).collect();
        let roots = bracket_roots(|x| (x - 1.05) * (x + 2.23) * (x - 3.71), &xs, 1e-14);
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([-2.23, 1.05, 3.71]) {
            assert!((r - want).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_gaussian() {
        let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn relative_quadrature_handles_large_scales() {
        let v = integrate_relative(|x| 1e30 * (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((v / 1e30 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_of_sine() {
        let d = second_derivative(&f64::sin, 0.8, 5e-3);
        assert!((d + 0.8f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn fits() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let line = fit_line(&xs, &[1.0, 3.0, 5.0, 7.0]);
        assert!((line.slope - 2.0).abs() < 1e-14 && (line.intercept - 1.0).abs() < 1e-14);
        assert!((line.r_squared - 1.0).abs() < 1e-14);
        let q = fit_quadratic(&xs, &[1.0, 2.5, 7.0, 14.5]);
        assert!((q[0] - 1.0).abs() < 1e-12 && (q[1] - 0.0).abs() < 1e-12 && (q[2] - 1.5).abs() < 1e-12);
    }
}
