//! Series solution for the deformed even-power potential
//! `a r^2 + b r^-2 + c~ r^-4 + d~ r^-6`.
//!
//! The ansatz `R = exp(alpha r^2/2 + beta r^-2/2) sum_k a_k r^{2k + nu}`
//! turns the radial equation into the three-term recurrence
//!
//! ```text
//! A_j a_j + B_{j+1} a_{j+1} + C_{j+2} a_{j+2} = 0,   j >= -2,
//! A_j = E~ + alpha (1 + 2 nu + 4 j)
//! B_k = (nu + 2k)(nu + 2k - 1) - 2 alpha beta - b - (m^2 - 1/4)
//! C_k = beta (3 - 2 nu - 4 k) - c~
//! ```
//!
//! with `alpha^2 = a`, `beta^2 = d~`. Row `j = -2` fixes `nu`, `A_n = 0`
//! fixes the energy, and row `j = -1` is the one extra condition a
//! degree-`n` truncation imposes on the potential; it is solved for `b`.

use serde::{Deserialize, Serialize};

use crate::deformation::{DeformedRadialProblem, Family};
use crate::error::{Error, Result};
use crate::numerics;

/// Relative tolerance on the chained truncation condition.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignMode {
    /// `alpha = -sqrt(a)`, `beta = +sqrt|d~|` and `nu = 3/2 + gamma` as printed.
    /// `C_k` carries the mirrored sign, which makes this `nu` its indicial root.
    Paper,
    /// Both exponent terms decay; every coefficient rederived from the ODE.
    Normalizable,
}

impl SignMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SignMode::Paper => "paper",
            SignMode::Normalizable => "rederived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefactorExponents {
    pub alpha: f64,
    pub beta: f64,
    pub sign_mode: SignMode,
}

impl PrefactorExponents {
    pub fn new(problem: &DeformedRadialProblem, sign_mode: SignMode) -> Result<Self> {
        check_family(problem)?;
        let a = problem.coefficient(2);
        if !(a > 0.0) {
            return Err(Error::NonConfining { a });
        }
        let d = problem.d_tilde();
        if d == 0.0 {
            return Err(Error::DegenerateDeformation);
        }
        let alpha = -a.sqrt();
        let beta = match sign_mode {
            SignMode::Paper => d.abs().sqrt(),
            SignMode::Normalizable => {
                if d < 0.0 {
                    return Err(Error::SingularAttraction { d });
                }
                -d.sqrt()
            }
        };
        Ok(Self { alpha, beta, sign_mode })
    }
}

fn check_family(problem: &DeformedRadialProblem) -> Result<()> {
    if problem.family() != Family::EvenPower {
        return Err(Error::InvalidFamily { expected: Family::EvenPower, found: problem.family() });
    }
    Ok(())
}

/// Recurrence coefficients at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Fully specified three-term recurrence. Fields are public so alternative
/// readings of the coefficients can be evaluated side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub b: f64,
    pub c_tilde: f64,
    pub centrifugal: f64,
    /// `+1` for the rederived `C_k`, `-1` for the mirrored one.
    pub c_sign: f64,
    /// `0` for the rederived middle coefficient; `1` shifts its index down
    /// by one, the literal reading of the `B_{n+1}` label.
    pub middle_shift: i32,
}

impl Recurrence {
    pub fn new(problem: &DeformedRadialProblem, pre: &PrefactorExponents, nu: f64) -> Self {
        Self {
            alpha: pre.alpha,
            beta: pre.beta,
            nu,
            b: problem.coefficient(-2),
            c_tilde: problem.c_tilde(),
            centrifugal: problem.centrifugal,
            c_sign: match pre.sign_mode {
                SignMode::Paper => -1.0,
                SignMode::Normalizable => 1.0,
            },
            middle_shift: 0,
        }
    }

    pub fn first(&self, j: i64, energy_reduced: f64) -> f64 {
        energy_reduced + self.alpha * (1.0 + 2.0 * self.nu + 4.0 * j as f64)
    }

    pub fn middle(&self, k: i64) -> f64 {
        let s = self.nu + 2.0 * (k - i64::from(self.middle_shift)) as f64;
        s * (s - 1.0) - 2.0 * self.alpha * self.beta - self.b - self.centrifugal
    }

    fn middle_scale(&self, k: i64) -> f64 {
        let s = self.nu + 2.0 * (k - i64::from(self.middle_shift)) as f64;
        (s * (s - 1.0)).abs() + (2.0 * self.alpha * self.beta).abs() + self.b.abs() + self.centrifugal.abs()
    }

    pub fn last(&self, k: i64) -> f64 {
        self.c_sign * self.beta * (3.0 - 2.0 * self.nu - 4.0 * k as f64) - self.c_tilde
    }

    fn last_scale(&self, k: i64) -> f64 {
        (self.beta * (3.0 - 2.0 * self.nu - 4.0 * k as f64)).abs() + self.c_tilde.abs()
    }

    /// Energy that terminates the series at degree `n` (`A_n = 0`).
    pub fn terminating_energy(&self, n: usize) -> f64 {
        -self.alpha * (1.0 + 2.0 * self.nu + 4.0 * n as f64)
    }

    /// `a_0..=a_n` with `a_n = 1` from the rows `j = n-1, ..., 0`.
    pub fn back_substitute(&self, n: usize) -> Vec<f64> {
        let e = self.terminating_energy(n);
        let mut coeffs = vec![0.0; n + 3];
        coeffs[n] = 1.0;
        for j in (0..n).rev() {
            let jj = j as i64;
            coeffs[j] = -(self.middle(jj + 1) * coeffs[j + 1] + self.last(jj + 2) * coeffs[j + 2])
                / self.first(jj, e);
        }
        coeffs.truncate(n + 1);
        coeffs
    }

    /// Row `j` of the recurrence applied to `coeffs` (zero-padded), and the
    /// sum of magnitudes of its terms.
    pub fn row(&self, j: i64, energy_reduced: f64, coeffs: &[f64]) -> (f64, f64) {
        let at = |k: i64| if k >= 0 { coeffs.get(k as usize).copied().unwrap_or(0.0) } else { 0.0 };
        let t1 = self.first(j, energy_reduced) * at(j);
        let t2 = self.middle(j + 1) * at(j + 1);
        let t3 = self.last(j + 2) * at(j + 2);
        let scale = (self.first(j, energy_reduced) - energy_reduced).abs().max(energy_reduced.abs()) * at(j).abs()
            + self.middle_scale(j + 1) * at(j + 1).abs()
            + self.last_scale(j + 2) * at(j + 2).abs();
        (t1 + t2 + t3, scale)
    }

    /// Relative residual of the chained condition (row `j = -1`).
    pub fn chain_residual(&self, n: usize) -> f64 {
        let coeffs = self.back_substitute(n);
        let (value, scale) = self.row(-1, self.terminating_energy(n), &coeffs);
        if scale == 0.0 {
            0.0
        } else {
            value / scale
        }
    }
}

pub fn recurrence_coeffs(
    problem: &DeformedRadialProblem,
    pre: &PrefactorExponents,
    nu: f64,
    energy_reduced: f64,
    n: i64,
) -> RecurrenceCoeffs {
    let rec = Recurrence::new(problem, pre, nu);
    RecurrenceCoeffs { a: rec.first(n, energy_reduced), b: rec.middle(n), c: rec.last(n) }
}

/// `gamma = c~ / (2 sqrt|d~|)`.
pub fn gamma(problem: &DeformedRadialProblem) -> Result<f64> {
    let d = problem.d_tilde();
    if d == 0.0 {
        return Err(Error::DegenerateDeformation);
    }
    Ok(problem.c_tilde() / (2.0 * d.abs().sqrt()))
}

/// Root of `C_0 = 0` for the mode's coefficient signs.
pub fn indicial_exponent(problem: &DeformedRadialProblem, pre: &PrefactorExponents) -> Result<f64> {
    check_family(problem)?;
    if problem.d_tilde() == 0.0 || pre.beta == 0.0 {
        return Err(Error::DegenerateDeformation);
    }
    let c = problem.c_tilde();
    Ok(match pre.sign_mode {
        SignMode::Paper => 1.5 + c / (2.0 * pre.beta),
        SignMode::Normalizable => 1.5 - c / (2.0 * pre.beta),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub n: usize,
    pub sign_mode: SignMode,
    /// Reduced energy forced by `A_n = 0`.
    pub energy_reduced: f64,
    /// Relative residual of every recurrence row `j = -2..=n+1` for the
    /// back-substituted coefficients; row `-1` is the chained condition.
    pub rows: Vec<(i64, f64)>,
    pub residual: f64,
    pub satisfied: bool,
    /// Values of `b` satisfying every condition, nearest the supplied `b` first.
    pub consistent_b: Vec<f64>,
}

/// All `b` in a wide window at which the degree-`n` truncation exists.
pub fn consistent_b_values(problem: &DeformedRadialProblem, mode: SignMode, n: usize) -> Vec<f64> {
    consistent_b_values_with(problem, mode, n, |_| {})
}

/// [`consistent_b_values`] for a recurrence altered by `adjust` before use.
pub fn consistent_b_values_with<F: Fn(&mut Recurrence)>(
    problem: &DeformedRadialProblem,
    mode: SignMode,
    n: usize,
    adjust: F,
) -> Vec<f64> {
    let scale = 1.0 + problem.spec.c.abs() + problem.spec.a.sqrt();
    let t_max = (1e6 / scale).asinh();
    let samples = 8000;
    let ts: Vec<f64> = (0..=samples).map(|i| -t_max + 2.0 * t_max * f64::from(i) / f64::from(samples)).collect();
    let bs: Vec<f64> = ts.iter().map(|t| scale * t.sinh()).collect();
    let recurrence = |b: f64| {
        let p = problem.with_b(b);
        let pre = PrefactorExponents::new(&p, mode).ok()?;
        let nu = indicial_exponent(&p, &pre).ok()?;
        let mut rec = Recurrence::new(&p, &pre, nu);
        adjust(&mut rec);
        Some(rec)
    };
    let raw = |b: f64| {
        recurrence(b).map_or(f64::NAN, |rec| {
            let coeffs = rec.back_substitute(n);
            rec.row(-1, rec.terminating_energy(n), &coeffs).0
        })
    };
    let mut roots: Vec<f64> = numerics::bracket_roots(raw, &bs, 1e-13)
        .into_iter()
        .filter(|&b| recurrence(b).is_some_and(|rec| rec.chain_residual(n).abs() < CONSTRAINT_TOL))
        .collect();
    let target = problem.coefficient(-2);
    roots.sort_by(|x, y| (x - target).abs().total_cmp(&(y - target).abs()).then(x.total_cmp(y)));
    roots
}

pub fn solvability_constraint(
    problem: &DeformedRadialProblem,
    mode: SignMode,
    n: usize,
) -> Result<SolvabilityReport> {
    let pre = PrefactorExponents::new(problem, mode)?;
    let nu = indicial_exponent(problem, &pre)?;
    let rec = Recurrence::new(problem, &pre, nu);
    let energy = rec.terminating_energy(n);
    let coeffs = rec.back_substitute(n);
    let rows: Vec<(i64, f64)> = (-2..=n as i64 + 1)
        .map(|j| {
            let (v, s) = rec.row(j, energy, &coeffs);
            (j, if s == 0.0 { 0.0 } else { v / s })
        })
        .collect();
    let residual = rec.chain_residual(n);
    Ok(SolvabilityReport {
        n,
        sign_mode: mode,
        energy_reduced: energy,
        rows,
        residual,
        satisfied: residual.abs() <= CONSTRAINT_TOL,
        consistent_b: consistent_b_values(problem, mode, n),
    })
}

/// Re-deforms `problem` with the consistent `b` nearest the supplied one.
pub fn solve_consistent_b(problem: &DeformedRadialProblem, mode: SignMode, n: usize) -> Result<DeformedRadialProblem> {
    PrefactorExponents::new(problem, mode)?;
    let roots = consistent_b_values(problem, mode, n);
    let b = roots.first().copied().ok_or(Error::NoConsistentParameter)?;
    Ok(problem.with_b(b))
}

/// Display quantities of the `n = 1` level in its printed closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelOneDisplay {
    /// `c / sqrt|d~|`
    pub lambda_tilde: f64,
    /// `b / sqrt(a)`
    pub delta: f64,
    /// `sqrt(a) (8 + lambda_tilde)`
    pub energy_part: f64,
    /// `(a/4)(2 + delta) theta m`
    pub shift_part: f64,
    /// `energy_part + shift_part - E(n = 1)`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub problem: DeformedRadialProblem,
    pub exponents: PrefactorExponents,
    pub nu: f64,
    pub gamma: f64,
    pub coeffs: Vec<f64>,
    pub n: usize,
    pub energy_reduced: f64,
    pub energy_physical: f64,
    pub m: i32,
    pub constraint_residual: f64,
    pub recurrence_residual: f64,
    pub normalizable: bool,
    pub level_one: Option<LevelOneDisplay>,
}

impl SeriesSolution {
    /// `R(r) = sum_k a_k r^{2k + nu} exp(alpha r^2/2 + beta r^-2/2)`.
    pub fn radial(&self, r: f64) -> f64 {
        let r2 = r * r;
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * r2 + c);
        let log_env = self.nu * r.ln() + 0.5 * self.exponents.alpha * r2 + 0.5 * self.exponents.beta / r2;
        poly * log_env.exp()
    }

    /// Positive roots of the polynomial factor, i.e. the radial nodes.
    pub fn node_count(&self) -> usize {
        let xs: Vec<f64> = (0..=4000).map(|i| 1e-4 * 1e10f64.powf(f64::from(i) / 4000.0)).collect();
        let poly = |x: f64| self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        numerics::bracket_roots(poly, &xs, 1e-14).len()
    }
}

/// Radial wavefunction factor of `psi = r^{-1/2} R(r) e^{i m phi}`.
pub fn eigenfunction(solution: &SeriesSolution, r: f64) -> f64 {
    solution.radial(r) / r.sqrt()
}

fn normalization(solution: &SeriesSolution) -> f64 {
    let alpha = solution.exponents.alpha.abs();
    let beta = solution.exponents.beta.abs();
    // Support of R^2: between the inner suppression and the Gaussian tail.
    let lo = (beta / 80.0).sqrt().max(1e-12);
    let power = 2.0 * solution.nu.abs() + 4.0 * solution.n as f64;
    let mut hi = (80.0 / alpha).sqrt();
    for _ in 0..4 {
        hi = ((80.0 + power * hi.max(1.0).ln()) / alpha).sqrt();
    }
    let hi = hi.max(2.0 * lo);
    numerics::integrate_relative(|r| solution.radial(r).powi(2), lo, hi, 1e-13)
}

pub fn closed_form_energy(
    problem: &DeformedRadialProblem,
    pre: &PrefactorExponents,
    n: usize,
) -> Result<SeriesSolution> {
    check_family(problem)?;
    let nu = indicial_exponent(problem, pre)?;
    let gamma = gamma(problem)?;
    let rec = Recurrence::new(problem, pre, nu);
    let constraint_residual = rec.chain_residual(n);
    if !(constraint_residual.abs() <= CONSTRAINT_TOL) {
        return Err(Error::ConstraintViolated { residual: constraint_residual.abs(), tolerance: CONSTRAINT_TOL });
    }
    let sqrt_a = problem.coefficient(2).sqrt();
    let energy_reduced = match pre.sign_mode {
        SignMode::Paper => sqrt_a * (4.0 + 2.0 * gamma + 4.0 * n as f64),
        SignMode::Normalizable => rec.terminating_energy(n),
    };
    let mut coeffs = rec.back_substitute(n);
    let recurrence_residual = (-2..=n as i64 + 1)
        .map(|j| {
            let (v, s) = rec.row(j, energy_reduced, &coeffs);
            if s == 0.0 {
                0.0
            } else {
                (v / s).abs()
            }
        })
        .fold(0.0, f64::max);

    let spec = problem.spec;
    let level_one = (n == 1).then(|| {
        let d_abs = problem.d_tilde().abs();
        let lambda_tilde = spec.c / d_abs.sqrt();
        let delta = problem.coefficient(-2) / sqrt_a;
        let energy_part = sqrt_a * (8.0 + lambda_tilde);
        let shift_part = spec.a / 4.0 * (2.0 + delta) * problem.theta * f64::from(problem.m);
        LevelOneDisplay {
            lambda_tilde,
            delta,
            energy_part,
            shift_part,
            discrepancy: energy_part + shift_part - (energy_reduced + problem.energy_shift),
        }
    });

    let normalizable = pre.alpha < 0.0 && pre.beta < 0.0;
    let mut solution = SeriesSolution {
        problem: problem.clone(),
        exponents: *pre,
        nu,
        gamma,
        coeffs: coeffs.clone(),
        n,
        energy_reduced,
        energy_physical: energy_reduced + problem.energy_shift,
        m: problem.m,
        constraint_residual,
        recurrence_residual,
        normalizable,
        level_one,
    };
    if normalizable {
        let norm = normalization(&solution).sqrt();
        let sign = if coeffs[0] < 0.0 { -1.0 } else { 1.0 };
        coeffs.iter_mut().for_each(|c| *c *= sign / norm);
        solution.coeffs = coeffs;
    }
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{deform_even_power, NcContext, PotentialSpec};

    fn problem(a: f64, b: f64, c: f64, theta: f64, m: i32) -> DeformedRadialProblem {
        deform_even_power(PotentialSpec::even_power(a, b, c), NcContext::new(theta, m)).unwrap()
    }

    #[test]
    fn first_coefficient_by_hand() {
        let rec = Recurrence {
            alpha: -1.0,
            beta: -0.5,
            nu: 2.0,
            b: 0.0,
            c_tilde: 0.0,
            centrifugal: 0.75,
            c_sign: 1.0,
            middle_shift: 0,
        };
        assert_eq!(rec.first(1, 13.0), 4.0);
    }

    #[test]
    fn indicial_root_zeroes_c0() {
        for mode in [SignMode::Paper, SignMode::Normalizable] {
            let p = problem(1.3, 0.4, 0.9, 0.07, 2);
            let pre = PrefactorExponents::new(&p, mode).unwrap();
            let nu = indicial_exponent(&p, &pre).unwrap();
            let rc = recurrence_coeffs(&p, &pre, nu, 0.0, 0);
            assert!(rc.c.abs() < 1e-12, "{mode:?}: {}", rc.c);
        }
    }

    #[test]
    fn indicial_examples() {
        // c~ = 0: nu = 3/2 in both modes.
        let p = problem(1.0, 0.0, 0.0, 0.1, 1).with_b(0.0);
        let mut p = p;
        p.terms.insert(-6, 0.25);
        for mode in [SignMode::Paper, SignMode::Normalizable] {
            let pre = PrefactorExponents::new(&p, mode).unwrap();
            assert_eq!(indicial_exponent(&p, &pre).unwrap(), 1.5);
        }
        // c~ = 1, beta~ = 0.5 printed: nu = 2.5.
        p.terms.insert(-4, 1.0);
        let pre = PrefactorExponents::new(&p, SignMode::Paper).unwrap();
        assert_eq!(pre.beta, 0.5);
        assert_eq!(indicial_exponent(&p, &pre).unwrap(), 2.5);
    }

    #[test]
    fn commutative_limit_is_degenerate() {
        let p = problem(1.0, 1.0, 1.0, 0.0, 1);
        assert_eq!(
            PrefactorExponents::new(&p, SignMode::Normalizable).unwrap_err(),
            Error::DegenerateDeformation
        );
        assert_eq!(
            solvability_constraint(&p, SignMode::Paper, 0).unwrap_err(),
            Error::DegenerateDeformation
        );
    }

    #[test]
    fn s_levels_excluded() {
        let p = problem(1.0, 1.0, 1.0, 0.1, 0);
        assert_eq!(solvability_constraint(&p, SignMode::Normalizable, 0).unwrap_err(), Error::DegenerateDeformation);
    }

    #[test]
    fn fall_to_center_rejected_in_normalizable_mode() {
        let p = problem(1.0, 1.0, 1.0, 0.1, -1);
        assert!(matches!(
            PrefactorExponents::new(&p, SignMode::Normalizable),
            Err(Error::SingularAttraction { .. })
        ));
        assert!(PrefactorExponents::new(&p, SignMode::Paper).is_ok());
    }

    #[test]
    fn solved_b_for_ground_level() {
        let p = problem(1.0, 10.0, 1.0, 0.1, 1);
        let report = solvability_constraint(&p, SignMode::Normalizable, 0).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.consistent_b.len(), 2);
        let b = report.consistent_b[0];
        // Independent check: with n = 0 the chain condition is B_0 = 0,
        // i.e. nu (nu - 1) - 2 alpha beta - b - 3/4 = 0, nu = 3/2 + c~/(2 sqrt d~).
        let d = 0.05f64;
        let nu = 1.5 + (1.0 + b * 0.1 / 4.0) / (2.0 * d.sqrt());
        let lhs = nu * (nu - 1.0) - 2.0 * (-1.0) * (-d.sqrt()) - b - 0.75;
        assert!(lhs.abs() < 1e-9, "{lhs}");
        let ok = solvability_constraint(&p.with_b(b), SignMode::Normalizable, 0).unwrap();
        assert!(ok.satisfied);
    }

    #[test]
    fn closed_form_requires_constraint() {
        let p = problem(1.0, 3.0, 1.0, 0.1, 1);
        let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
        assert!(matches!(closed_form_energy(&p, &pre, 0), Err(Error::ConstraintViolated { .. })));
    }

    #[test]
    fn energy_formula_and_shift() {
        for n in 0..3 {
            let p = solve_consistent_b(&problem(2.0, 5.0, 0.8, 0.05, 2), SignMode::Normalizable, n).unwrap();
            let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
            let sol = closed_form_energy(&p, &pre, n).unwrap();
            let g = sol.gamma;
            let expected = 2f64.sqrt() * (4.0 + 2.0 * g + 4.0 * n as f64);
            assert!((sol.energy_reduced - expected).abs() < 1e-12 * expected);
            assert!((sol.energy_physical - sol.energy_reduced - p.energy_shift).abs() < 1e-12);
            assert!(sol.recurrence_residual < 1e-10);
            assert_eq!(sol.coeffs.len(), n + 1);
        }
    }

    #[test]
    fn gamma_one_gives_six() {
        let mut p = problem(1.0, 0.0, 0.0, 1e-9, 1);
        p.terms.insert(-6, 0.25);
        p.terms.insert(-4, 1.0);
        assert_eq!(gamma(&p).unwrap(), 1.0);
        let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
        let nu = indicial_exponent(&p, &pre).unwrap();
        assert_eq!(Recurrence::new(&p, &pre, nu).terminating_energy(0), 6.0);
    }

    #[test]
    fn level_one_display_and_spot_value() {
        let p = solve_consistent_b(&problem(1.0, 20.0, 1.0, 0.05, 1), SignMode::Normalizable, 1).unwrap();
        let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
        let sol = closed_form_energy(&p, &pre, 1).unwrap();
        let disp = sol.level_one.unwrap();
        let d = p.d_tilde();
        assert!((disp.lambda_tilde - 1.0 / d.sqrt()).abs() < 1e-12);
        assert!((disp.energy_part - (8.0 + disp.lambda_tilde)).abs() < 1e-12);
        assert!((disp.shift_part - 0.25 * (2.0 + p.coefficient(-2)) * 0.05).abs() < 1e-12);
        let at_one = (sol.coeffs[0] + sol.coeffs[1]) * (-(1.0 + d.sqrt()) / 2.0).exp();
        assert!((eigenfunction(&sol, 1.0) - at_one).abs() < 1e-14);
        assert_eq!(eigenfunction(&sol, 1e-3), 0.0);
    }

    #[test]
    fn normalized_to_unit_l2() {
        let p = solve_consistent_b(&problem(1.0, 20.0, 1.0, 0.05, 1), SignMode::Normalizable, 1).unwrap();
        let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
        let sol = closed_form_energy(&p, &pre, 1).unwrap();
        let norm = numerics::integrate(|r| sol.radial(r).powi(2), 1e-3, 40.0, 1e-13);
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
        assert!(sol.coeffs[0] > 0.0);
    }
}
