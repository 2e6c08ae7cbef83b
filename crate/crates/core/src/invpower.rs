//! Factored ansatz for the deformed inverse-power potential
//! `a/r + b/r^2 + c~/r^3 + d~/r^4`.
//!
//! `R = h(r) r^C exp(A/r + B r)` with `h = prod_j (r - sigma_j)` of degree `k`.
//! Collecting powers of `r` in the radial equation gives, for every `p`,
//!
//! ```text
//! (B^2 + E~) h_p + P_{p+1} h_{p+1} + Q_{p+2} h_{p+2} + S_{p+3} h_{p+3} + (A^2 - d~) h_{p+4} = 0
//! P_j = 2B(j + C) - a
//! Q_j = (j + C)(j + C - 1) - 2AB - lambda,   lambda = b + m^2 - 1/4
//! S_j = 2A(1 - j - C) - c~
//! ```
//!
//! The rows `p = k, k-1, k-2, -4, -3` are the closed-form conditions on
//! `E~, B, lambda, A, C`; the rows `p = k-3, ..., -2` are the `k` moment
//! equations on the roots. With `theta m != 0` the system has one equation
//! more than `sigma` alone can absorb, so `b` is solved alongside the roots.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformation::{DeformedRadialProblem, Family};
use crate::error::{Error, Result};

/// Relative residual every accepted solution satisfies.
pub const ACCEPT_TOL: f64 = 1e-10;
pub const MAX_DEGREE: usize = 3;
const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintForm {
    /// Moment equations exactly as printed.
    Printed,
    /// Moment equations from the coefficient rows above.
    Rederived,
}

impl ConstraintForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintForm::Printed => "paper",
            ConstraintForm::Rederived => "rederived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudeRoot {
    Negative,
    Positive,
    Zero,
}

/// One named equation of the matching system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equation {
    /// `A^2 = d~`
    Amplitude,
    /// `2A(1 - C) = c~`
    Exponent,
    /// `a = 2B(C + k)`
    Decay,
    /// `lambda = C(C + 2k - 1) + k(k - 1) - 2B(A - sum sigma)`
    Lambda,
    /// Moment equation `j` (0-based, highest row first).
    Moment(usize),
}

impl Equation {
    pub fn label(&self) -> String {
        match self {
            Equation::Amplitude => "A^2=d".into(),
            Equation::Exponent => "2A(1-C)=c".into(),
            Equation::Decay => "a=2B(C+k)".into(),
            Equation::Lambda => "lambda".into(),
            Equation::Moment(j) => format!("moment{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub problem: DeformedRadialProblem,
    pub degree: usize,
    pub form: ConstraintForm,
    pub equations: Vec<Equation>,
}

impl ConstraintSet {
    pub fn commutative(&self) -> bool {
        self.problem.theta * f64::from(self.problem.m) == 0.0
    }
}

pub fn assemble_constraints(
    problem: &DeformedRadialProblem,
    degree: usize,
    form: ConstraintForm,
) -> Result<ConstraintSet> {
    if problem.family() != Family::InversePower {
        return Err(Error::InvalidFamily { expected: Family::InversePower, found: problem.family() });
    }
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let mut equations = vec![Equation::Amplitude, Equation::Exponent, Equation::Decay, Equation::Lambda];
    equations.extend((0..degree).map(Equation::Moment));
    Ok(ConstraintSet { problem: problem.clone(), degree, form, equations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvPowerAnsatz {
    #[serde(rename = "A")]
    pub a_amp: f64,
    #[serde(rename = "B")]
    pub b_decay: f64,
    #[serde(rename = "C")]
    pub c_exp: f64,
    pub degree: usize,
    /// Ascending coefficients of `h`, `h[degree] = 1`.
    pub h: Vec<f64>,
    /// Real roots of `h`, ascending.
    pub sigma: Vec<f64>,
    /// Complex-conjugate root pairs `(re, im)` with `im > 0`.
    pub sigma_pairs: Vec<(f64, f64)>,
    /// `C - 1`
    pub nu: f64,
    pub omega: f64,
    pub lambda_param: f64,
    /// The `b` this ansatz solves, equal to the input `b` when `theta m = 0`.
    pub b: f64,
    pub amplitude_root: AmplitudeRoot,
    pub normalizable: bool,
    /// Relative residual of each equation of the set.
    pub residuals: Vec<(Equation, f64)>,
}

impl InvPowerAnsatz {
    pub fn sigma_sum(&self) -> f64 {
        if self.degree == 0 {
            0.0
        } else {
            -self.h[self.degree - 1]
        }
    }

    /// Sign changes of `R` on `r > 0`.
    pub fn node_count(&self) -> usize {
        self.sigma.iter().filter(|s| **s > 0.0).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max)
    }

    /// `h(r) r^C exp(A/r + B r)`.
    pub fn radial(&self, r: f64) -> f64 {
        let h = self.h.iter().rev().fold(0.0, |acc, c| acc * r + c);
        h * (self.c_exp * r.ln() + self.a_amp / r + self.b_decay * r).exp()
    }
}

/// Parameters shared by every equation once `A`, `C`, `B` are fixed.
#[derive(Debug, Clone, Copy)]
struct Frame {
    a: f64,
    amp: f64,
    c_exp: f64,
    b_decay: f64,
    lambda: f64,
    c_tilde: f64,
    d_tilde: f64,
    k: usize,
}

impl Frame {
    fn p(&self, j: i64) -> (f64, f64) {
        let t = 2.0 * self.b_decay * (j as f64 + self.c_exp);
        (t - self.a, t.abs() + self.a.abs())
    }

    fn q(&self, j: i64) -> (f64, f64) {
        let s = j as f64 + self.c_exp;
        let t1 = s * (s - 1.0);
        let t2 = 2.0 * self.amp * self.b_decay;
        (t1 - t2 - self.lambda, t1.abs() + t2.abs() + self.lambda.abs())
    }

    fn s(&self, j: i64) -> (f64, f64) {
        let t = 2.0 * self.amp * (1.0 - j as f64 - self.c_exp);
        (t - self.c_tilde, t.abs() + self.c_tilde.abs())
    }

    /// Coefficient row `p` with `h` in ascending order.
    fn row(&self, p: i64, h: &[f64]) -> (f64, f64) {
        let at = |j: i64| if j >= 0 { h.get(j as usize).copied().unwrap_or(0.0) } else { 0.0 };
        let mut value = 0.0;
        let mut scale = 0.0;
        for (coef, j) in [(self.p(p + 1), p + 1), (self.q(p + 2), p + 2), (self.s(p + 3), p + 3)] {
            value += coef.0 * at(j);
            scale += coef.1 * at(j).abs();
        }
        (value, scale)
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        value.abs()
    } else {
        value / scale
    }
}

/// Ascending coefficients of `prod (r - sigma_j)`.
pub fn poly_from_roots(sigma: &[f64]) -> Vec<f64> {
    let mut h = vec![1.0];
    for &s in sigma {
        let mut next = vec![0.0; h.len() + 1];
        for (i, &c) in h.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= s * c;
        }
        h = next;
    }
    h
}

/// Elementary symmetric polynomials `e_0..=e_3` of the roots of monic `h`.
fn elementary(h: &[f64]) -> [f64; 4] {
    let k = h.len() - 1;
    let mut e = [0.0; 4];
    for (j, slot) in e.iter_mut().enumerate() {
        if j <= k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign * h[k - j];
        }
    }
    e
}

/// Printed moment equation `j`. With `e_i` the elementary symmetric sums,
/// `sum sigma^2 = e1^2 - 2 e2`, the pair sum `sum_{i<l} s_i s_l (s_i + s_l)`
/// is `e1 e2 - 3 e3` and the triple sum is `e1 e3` for degree at most 3.
fn moment_printed(j: usize, k: usize, sqrt_d: f64, c: f64, b: f64, h: &[f64]) -> (f64, f64) {
    let kf = k as f64;
    let [_, e1, e2, e3] = elementary(h);
    let (t1, t2, t3) = match j {
        0 => (kf * sqrt_d, (kf + 1.0 + c) * e1, b * (e1 * e1 - 2.0 * e2)),
        1 => ((kf - 1.0) * sqrt_d * e1, 2.0 * (kf - 1.0 + c) * e2, b * (e1 * e2 - 3.0 * e3)),
        _ => ((kf - 2.0) * sqrt_d * e2, 3.0 * (kf - 2.0 + c) * e3, b * e1 * e3),
    };
    (t1 + t2 + t3, t1.abs() + t2.abs() + t3.abs())
}

fn evaluate(frame: &Frame, h: &[f64], form: ConstraintForm, equations: &[Equation]) -> Vec<(Equation, f64)> {
    let f = frame;
    let k = f.k as f64;
    let sum = elementary(h)[1];
    equations
        .iter()
        .map(|&eq| {
            let r = match eq {
                Equation::Amplitude => relative(f.amp * f.amp - f.d_tilde, f.amp * f.amp + f.d_tilde.abs()),
                Equation::Exponent => {
                    let t = 2.0 * f.amp * (1.0 - f.c_exp);
                    relative(t - f.c_tilde, t.abs() + f.c_tilde.abs())
                }
                Equation::Decay => {
                    let t = 2.0 * f.b_decay * (f.c_exp + k);
                    relative(f.a - t, f.a.abs() + t.abs())
                }
                Equation::Lambda => {
                    let t1 = f.c_exp * (f.c_exp + 2.0 * k - 1.0);
                    let t2 = k * (k - 1.0);
                    let t3 = 2.0 * f.b_decay * (f.amp - sum);
                    relative(f.lambda - t1 - t2 + t3, f.lambda.abs() + t1.abs() + t2 + t3.abs())
                }
                Equation::Moment(j) => {
                    let (v, s) = match form {
                        ConstraintForm::Printed => {
                            moment_printed(j, f.k, f.d_tilde.abs().sqrt(), f.c_exp, f.b_decay, h)
                        }
                        ConstraintForm::Rederived => f.row(f.k as i64 - 3 - j as i64, h),
                    };
                    relative(v, s)
                }
            };
            (eq, r)
        })
        .collect()
}

/// How the free scalar next to `sigma` parametrizes the rest.
#[derive(Debug, Clone, Copy)]
enum Free {
    /// `x = A`, `b = 4A^2/(theta m)`, `C = 1 - c~/(2A)`.
    Amplitude,
    /// `x = b`, `A = 0`, `C = 1`.
    CommutativeB,
}

struct System<'a> {
    set: &'a ConstraintSet,
    free: Free,
}

impl System<'_> {
    fn frame(&self, x: f64) -> Option<(Frame, f64)> {
        let p = &self.set.problem;
        let a = p.spec.a;
        let k = self.set.degree as f64;
        let m2 = f64::from(p.m).powi(2);
        let (amp, c_exp, b, c_tilde, d_tilde) = match self.free {
            Free::Amplitude => {
                let tm = p.theta * f64::from(p.m);
                let c_tilde = 0.5 * a * tm;
                if x == 0.0 {
                    return None;
                }
                let b = 4.0 * x * x / tm;
                (x, 1.0 - c_tilde / (2.0 * x), b, c_tilde, x * x)
            }
            Free::CommutativeB => (0.0, 1.0, x, 0.0, 0.0),
        };
        let b_decay = a / (2.0 * (c_exp + k));
        let frame = Frame { a, amp, c_exp, b_decay, lambda: b + m2 - 0.25, c_tilde, d_tilde, k: self.set.degree };
        (b_decay.is_finite() && c_exp.is_finite()).then_some((frame, b))
    }

    fn unknown_equations(&self) -> Vec<Equation> {
        let mut eqs = vec![Equation::Lambda];
        eqs.extend((0..self.set.degree).map(Equation::Moment));
        eqs
    }

    /// Raw values of the square system and their relative sizes.
    fn residual(&self, x: &[f64]) -> Option<(Vec<f64>, f64)> {
        let k = self.set.degree;
        let (frame, _) = self.frame(x[k])?;
        let mut h = x[..k].to_vec();
        h.push(1.0);
        let eqs = self.unknown_equations();
        let rel = evaluate(&frame, &h, self.set.form, &eqs);
        let worst = rel.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
        let values: Vec<f64> = rel.into_iter().map(|(_, r)| r).collect();
        values.iter().all(|v| v.is_finite()).then_some((values, worst))
    }
}

fn newton(system: &System, x0: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut worst) = system.residual(&x)?;
    for _ in 0..200 {
        if worst <= 1e-14 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1e-4);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, _) = system.residual(&xp)?;
            let (fm, _) = system.residual(&xm)?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let dx = jac.lu().solve(&rhs)?;
        let norm0: f64 = f.iter().map(|v| v * v).sum();
        let mut step = 1.0;
        let mut improved = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(xi, di)| xi + step * di).collect();
            if let Some((ft, wt)) = system.residual(&trial) {
                if ft.iter().map(|v| v * v).sum::<f64>() < norm0 {
                    improved = Some((trial, ft, wt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, wnew)) = improved else { break };
        let moved = xn.iter().zip(&x).map(|(a, b)| (a - b).abs() / b.abs().max(1e-12)).fold(0.0, f64::max);
        x = xn;
        f = fnew;
        worst = wnew;
        if moved < 1e-15 {
            break;
        }
    }
    Some((x, worst))
}

/// Deterministic `sigma` seed lattice: multisets of `{+-0.5, +-1, +-2, +-4}/|a|`.
pub fn sigma_seeds(a: f64, degree: usize) -> Vec<Vec<f64>> {
    let unit = if a == 0.0 { 1.0 } else { 1.0 / a.abs() };
    let base: Vec<f64> =
        [-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0].iter().map(|v| v * unit).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..degree {
        out = out
            .into_iter()
            .flat_map(|s: Vec<f64>| {
                let start = s.last().map_or(0, |last| base.iter().position(|b| b == last).unwrap());
                base[start..].iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn free_seeds(set: &ConstraintSet, free: Free) -> Vec<f64> {
    let p = &set.problem;
    let b0 = p.spec.b;
    let mut scales = vec![0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
    if b0 != 0.0 {
        scales.insert(0, b0.abs());
    }
    match free {
        Free::Amplitude => {
            let tm = (p.theta * f64::from(p.m)).abs();
            scales
                .iter()
                .flat_map(|s| {
                    let amp = (s * tm / 4.0).sqrt();
                    [-amp, amp]
                })
                .collect()
        }
        Free::CommutativeB => {
            let mut v = vec![b0];
            v.extend(scales.iter().flat_map(|s| [-s, *s]));
            v
        }
    }
}

/// Starting points from sign changes of the determinant of the rows
/// `p = -2..=k-2`, which are linear in the coefficients of `h` once the free
/// scalar is fixed.
fn determinant_seeds(system: &System) -> Vec<Vec<f64>> {
    let k = system.set.degree;
    let matrix = |x: f64| -> Option<DMatrix<f64>> {
        let (f, _) = system.frame(x)?;
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        for (r, p) in (-2..=k as i64 - 2).enumerate() {
            let mut scale = f64::MIN_POSITIVE;
            for (coef, j) in [(f.p(p + 1), p + 1), (f.q(p + 2), p + 2), (f.s(p + 3), p + 3)] {
                if (0..=k as i64).contains(&j) {
                    m[(r, j as usize)] = coef.0;
                    scale = scale.max(coef.1);
                }
            }
            m.row_mut(r).scale_mut(1.0 / scale);
        }
        Some(m)
    };
    let det = |x: f64| matrix(x).map_or(f64::NAN, |m| m.determinant());
    let p = &system.set.problem;
    let reach = match system.free {
        Free::Amplitude => (p.theta * f64::from(p.m)).abs().sqrt().max(1e-3),
        Free::CommutativeB => 1.0 + p.spec.b.abs(),
    };
    let samples = 3000;
    let grid: Vec<f64> = (0..=samples)
        .map(|i| reach * 10f64.powf(-4.0 + 7.0 * f64::from(i) / f64::from(samples)))
        .collect();
    let mut xs: Vec<f64> = grid.iter().rev().map(|v| -v).collect();
    xs.extend(grid);
    let mut seeds = Vec::new();
    for x in crate::numerics::bracket_roots(det, &xs, 1e-15) {
        let Some(m) = matrix(x) else { continue };
        // Rows p = -1..=k-2 with h_k = 1 fix h_0..h_{k-1}.
        let sub = m.view((1, 0), (k, k)).clone_owned();
        let rhs = -m.view((1, k), (k, 1)).clone_owned();
        let Some(h) = sub.lu().solve(&rhs) else { continue };
        let mut seed: Vec<f64> = h.iter().copied().collect();
        seed.push(x);
        if seed.iter().all(|v| v.is_finite()) {
            seeds.push(seed);
        }
    }
    seeds
}

/// User-supplied starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub sigma: Vec<f64>,
    /// `A` when `theta m != 0`, `b` otherwise.
    pub free: f64,
}

fn same(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| (a - b).abs() <= DEDUP_TOL * a.abs().max(b.abs()).max(1.0))
}

fn finish(set: &ConstraintSet, frame: &Frame, b: f64, h: Vec<f64>) -> InvPowerAnsatz {
    let k = set.degree;
    let residuals = evaluate(frame, &h, set.form, &set.equations);
    let nu = frame.c_exp - 1.0;
    let zeros = h.iter().take_while(|c| **c == 0.0).count() as f64;
    let (sigma, sigma_pairs) = split_roots(&h);
    let amplitude_root = if frame.amp < 0.0 {
        AmplitudeRoot::Negative
    } else if frame.amp > 0.0 {
        AmplitudeRoot::Positive
    } else {
        AmplitudeRoot::Zero
    };
    let normalizable = frame.b_decay < 0.0
        && match amplitude_root {
            AmplitudeRoot::Negative => true,
            AmplitudeRoot::Zero => frame.c_exp + zeros > 0.0,
            AmplitudeRoot::Positive => false,
        };
    InvPowerAnsatz {
        a_amp: frame.amp,
        b_decay: frame.b_decay,
        c_exp: frame.c_exp,
        degree: k,
        h,
        sigma,
        sigma_pairs,
        nu,
        omega: omega_linear(frame.lambda, nu, k),
        lambda_param: frame.lambda,
        b,
        amplitude_root,
        normalizable,
        residuals,
    }
}

/// Regular indicial exponent of the commutative problem, `C(C-1) = lambda`.
fn commutative_regular(set: &ConstraintSet) -> Result<Vec<InvPowerAnsatz>> {
    let p = &set.problem;
    let lambda = p.spec.b + f64::from(p.m).powi(2) - 0.25;
    if lambda + 0.25 < 0.0 {
        return Err(Error::SingularAttraction { d: p.spec.b });
    }
    let c_reg = 0.5 + (lambda + 0.25).sqrt();
    let a = p.spec.a;
    let k = set.degree;
    let mut out = Vec::new();
    for zeros in 0..=k {
        let kk = k - zeros;
        let b_decay = a / (2.0 * (c_reg + kk as f64));
        let base = Frame { a, amp: 0.0, c_exp: c_reg, b_decay, lambda, c_tilde: 0.0, d_tilde: 0.0, k: kk };
        let mut h = vec![0.0; kk + 1];
        h[kk] = 1.0;
        let mut ok = b_decay.is_finite();
        for j in (0..kk).rev() {
            let pj = base.p(j as i64).0;
            if pj == 0.0 {
                ok = false;
                break;
            }
            h[j] = -base.q(j as i64 + 1).0 * h[j + 1] / pj;
        }
        if !ok {
            continue;
        }
        let mut full = vec![0.0; zeros];
        full.extend(h);
        let frame = Frame { c_exp: c_reg - zeros as f64, k, ..base };
        out.push(finish(set, &frame, p.spec.b, full));
    }
    Ok(out)
}

/// Roots of the ascending polynomial `h`: real roots ascending, then
/// complex-conjugate pairs `(re, im)` with `im > 0`.
pub fn split_roots(h: &[f64]) -> (Vec<f64>, Vec<(f64, f64)>) {
    let lead = h.iter().take_while(|c| **c == 0.0).count();
    let h = &h[lead..];
    let k = h.len() - 1;
    let mut real = vec![0.0; lead];
    let mut pairs = Vec::new();
    if k > 0 {
        let mut companion = DMatrix::<f64>::zeros(k, k);
        for i in 1..k {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..k {
            companion[(i, k - 1)] = -h[i] / h[k];
        }
        let scale = h.iter().map(|c| c.abs()).fold(1.0, f64::max);
        for z in companion.complex_eigenvalues().iter() {
            if z.im.abs() > 1e-9 * z.norm().max(1e-300) {
                if z.im > 0.0 {
                    pairs.push((z.re, z.im));
                }
                continue;
            }
            let mut x = z.re;
            for _ in 0..5 {
                let (mut v, mut d) = (0.0, 0.0);
                for &c in h.iter().rev() {
                    d = d * x + v;
                    v = v * x + c;
                }
                if d == 0.0 || v.abs() <= f64::EPSILON * scale {
                    break;
                }
                x -= v / d;
            }
            real.push(x);
        }
    }
    real.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    (real, pairs)
}

pub fn solve_sigma_system(set: &ConstraintSet, seeds: Option<&[Seed]>) -> Result<Vec<InvPowerAnsatz>> {
    if set.commutative() && set.form == ConstraintForm::Rederived {
        let found = commutative_regular(set)?;
        if found.is_empty() {
            return Err(Error::NoRealSolution { best_residual: f64::INFINITY });
        }
        return Ok(found);
    }
    let free = if set.commutative() { Free::CommutativeB } else { Free::Amplitude };
    let system = System { set, free };
    let k = set.degree;
    let starts: Vec<Vec<f64>> = match seeds {
        Some(s) => s
            .iter()
            .map(|seed| {
                let mut x = poly_from_roots(&seed.sigma);
                x[k] = seed.free;
                x
            })
            .collect(),
        None => {
            let sig = sigma_seeds(set.problem.spec.a, k);
            let fr = free_seeds(set, free);
            let mut starts = determinant_seeds(&system);
            starts.extend(sig.iter()
                .flat_map(|s| {
                    let h = poly_from_roots(s);
                    fr.iter().map(move |&f| {
                        let mut x = h.clone();
                        x[k] = f;
                        x
                    })
                }));
            starts
        }
    };
    let results: Vec<(Vec<f64>, f64)> = starts.into_par_iter().filter_map(|x0| newton(&system, x0)).collect();
    let best_residual = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mut converged: Vec<Vec<f64>> = results
        .into_iter()
        .filter(|(_, w)| *w <= ACCEPT_TOL)
        .map(|(x, _)| x)
        .collect();
    converged.sort_by(|x, y| {
        x.iter().zip(y).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for x in converged {
        if !unique.iter().any(|u| same(u, &x)) {
            unique.push(x);
        }
    }
    if unique.is_empty() {
        return Err(Error::NoRealSolution { best_residual });
    }
    let mut out: Vec<InvPowerAnsatz> = unique
        .into_iter()
        .filter_map(|x| {
            let (frame, b) = system.frame(x[k])?;
            let frame = Frame { d_tilde: deformed_d(set, b), ..frame };
            let mut h = x[..k].to_vec();
            h.push(1.0);
            Some(finish(set, &frame, b, h))
        })
        .collect();
    out.sort_by(|x, y| x.b.total_cmp(&y.b).then(x.a_amp.total_cmp(&y.a_amp)));
    Ok(out)
}

/// `d~` of the problem re-deformed at `b`, independent of the parametrization.
fn deformed_d(set: &ConstraintSet, b: f64) -> f64 {
    set.problem.with_b(b).d_tilde()
}

/// `omega~ = lambda + k(2k + nu) - k(k - 1)`.
pub fn omega_linear(lambda: f64, nu: f64, degree: usize) -> f64 {
    let k = degree as f64;
    lambda + k * (2.0 * k + nu) - k * (k - 1.0)
}

/// Expanded square `theta m a^2/(4b) (k^2 + (2k/nu)(lambda + k(k+1))) + (lambda + k(k+1))^2`.
pub fn omega_squared_expanded(problem: &DeformedRadialProblem, degree: usize, lambda: f64, nu: f64) -> Result<f64> {
    let k = degree as f64;
    let tm = problem.theta * f64::from(problem.m);
    let base = lambda + k * (k + 1.0);
    if tm == 0.0 {
        return Ok(base * base);
    }
    if nu == 0.0 {
        return Err(Error::DivisionByZeroNu);
    }
    let b = problem.coefficient(-2);
    if b == 0.0 {
        return Err(Error::DegenerateDeformation);
    }
    let a = problem.spec.a;
    Ok(tm * a * a / (4.0 * b) * (k * k + 2.0 * k / nu * base) + base * base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub omega: f64,
    pub squared_expanded: f64,
    /// `squared_expanded - omega^2`
    pub discrepancy: f64,
}

pub fn omega(problem: &DeformedRadialProblem, degree: usize, lambda: f64, nu: f64) -> Result<OmegaReport> {
    let w = omega_linear(lambda, nu, degree);
    let sq = omega_squared_expanded(problem, degree, lambda, nu)?;
    Ok(OmegaReport { omega: w, squared_expanded: sq, discrepancy: sq - w * w })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BRoots {
    pub plus: f64,
    pub minus: f64,
    /// `A - sum sigma = 0`: a single linear root in both slots.
    pub degenerate: bool,
    pub discriminant: f64,
}

/// Roots of `4(A - sum sigma) B^2 + 2 omega B - a(nu + 2k) = 0`.
pub fn solve_b(amp: f64, sigma_sum: f64, omega: f64, a: f64, nu: f64, degree: usize) -> Result<BRoots> {
    let x = amp - sigma_sum;
    let rhs = a * (nu + 2.0 * degree as f64);
    let discriminant = omega * omega + 4.0 * x * rhs;
    if x == 0.0 {
        let b = rhs / (2.0 * omega);
        return Ok(BRoots { plus: b, minus: b, degenerate: true, discriminant });
    }
    if discriminant < 0.0 {
        return Err(Error::ComplexRoots { discriminant });
    }
    let sq = discriminant.sqrt();
    // Cancellation-free pair; `plus` is the root with `+sqrt` in `(-omega +- sqrt)/(4X)`.
    let (plus, minus) = if omega >= 0.0 {
        let q = -(omega + sq);
        if q == 0.0 {
            (0.0, 0.0)
        } else {
            (-rhs / q, q / (4.0 * x))
        }
    } else {
        let q = -omega + sq;
        (q / (4.0 * x), -rhs / q)
    };
    Ok(BRoots { plus, minus, degenerate: false, discriminant })
}

/// Energy as printed, `-omega^2 (1 + s sqrt(1 + t))^2 / (16 X^2)` with
/// `t = 4X a(nu+2k)/omega^2`. The `s = -1` branch is evaluated as
/// `-(a(nu+2k))^2 / (omega (1 + sqrt(1 + t)))^2`, finite at `X = 0`.
pub fn energy_printed(amp: f64, sigma_sum: f64, omega: f64, a: f64, nu: f64, degree: usize, sign: f64) -> Option<f64> {
    let x = amp - sigma_sum;
    let rhs = a * (nu + 2.0 * degree as f64);
    if omega == 0.0 {
        return None;
    }
    let t = 4.0 * x * rhs / (omega * omega);
    if t < -1.0 {
        return None;
    }
    let root = (1.0 + t).sqrt();
    if sign < 0.0 {
        return Some(-(rhs / (omega * (1.0 + root))).powi(2));
    }
    if x == 0.0 {
        return None;
    }
    Some(-omega * omega * (1.0 + root).powi(2) / (16.0 * x * x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvPowerSolution {
    pub ansatz: InvPowerAnsatz,
    pub branch: Branch,
    /// This branch's root equals the ansatz `B`.
    pub consistent: bool,
    pub degenerate: bool,
    pub b_root: f64,
    pub energy_reduced: f64,
    pub energy_physical: f64,
    /// Printed closed-form energy for this branch.
    pub energy_printed: Option<f64>,
    pub omega_squared_expanded: Option<f64>,
    pub normalizable: bool,
    pub form: ConstraintForm,
    pub m: i32,
    pub theta: f64,
}

impl InvPowerSolution {
    /// `psi(r) = r^{-1/2} R(r)`.
    pub fn eigenfunction(&self, r: f64) -> f64 {
        self.ansatz.radial(r) / r.sqrt()
    }

    /// The problem this solution belongs to, with its solved `b`.
    pub fn problem(&self, base: &DeformedRadialProblem) -> DeformedRadialProblem {
        base.with_b(self.ansatz.b)
    }
}

pub fn spectrum(problem: &DeformedRadialProblem, degree: usize, form: ConstraintForm) -> Result<Vec<InvPowerSolution>> {
    let set = assemble_constraints(problem, degree, form)?;
    let ansatze = solve_sigma_system(&set, None)?;
    let mut out = Vec::new();
    for an in ansatze {
        let a = problem.spec.a;
        let sum = an.sigma_sum();
        let roots = solve_b(an.a_amp, sum, an.omega, a, an.nu, degree)?;
        let solved = problem.with_b(an.b);
        let sq = omega_squared_expanded(&solved, degree, an.lambda_param, an.nu).ok();
        let branches: &[(Branch, f64)] = if roots.degenerate {
            &[(Branch::Plus, 1.0)]
        } else {
            &[(Branch::Plus, 1.0), (Branch::Minus, -1.0)]
        };
        for &(branch, sign) in branches {
            let b_root = if sign > 0.0 { roots.plus } else { roots.minus };
            let consistent = (b_root - an.b_decay).abs() <= 1e-8 * an.b_decay.abs().max(1e-300);
            let printed_sign = if roots.degenerate { -1.0 } else { -sign * if an.omega < 0.0 { -1.0 } else { 1.0 } };
            let energy = -b_root * b_root;
            out.push(InvPowerSolution {
                normalizable: consistent && an.normalizable,
                energy_printed: energy_printed(an.a_amp, sum, an.omega, a, an.nu, degree, printed_sign),
                omega_squared_expanded: sq,
                consistent,
                degenerate: roots.degenerate,
                b_root,
                energy_reduced: energy,
                energy_physical: energy + solved.energy_shift,
                branch,
                form,
                m: problem.m,
                theta: problem.theta,
                ansatz: an.clone(),
            });
        }
    }
    out.sort_by(|x, y| {
        x.energy_physical
            .total_cmp(&y.energy_physical)
            .then(x.ansatz.b.total_cmp(&y.ansatz.b))
            .then((x.branch as u8).cmp(&(y.branch as u8)))
    });
    Ok(out)
}

/// Consistent normalizable solution with `b` nearest `b0`, lowest energy on ties.
pub fn select(solutions: Vec<InvPowerSolution>, b0: f64) -> Option<InvPowerSolution> {
    solutions.into_iter().filter(|s| s.consistent && s.normalizable).min_by(|x, y| {
        (x.ansatz.b - b0)
            .abs()
            .total_cmp(&(y.ansatz.b - b0).abs())
            .then(x.energy_physical.total_cmp(&y.energy_physical))
    })
}
