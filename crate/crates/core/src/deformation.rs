//! Bopp-shift deformation of the two central potential families.
//!
//! With `x_i -> x_i - theta_ij p_j / 2` and `L_z` replaced by its eigenvalue
//! `m`, each family maps onto an ordinary radial problem
//!
//! ```text
//! R'' + [E - shift - sum_p c_p r^p - (m^2 - 1/4)/r^2] R = 0
//! ```
//!
//! in units with hbar = 2 mu = 1.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `a r^2 + b r^-2 + c r^-4`
    EvenPower,
    /// `a r^-1 + b r^-2`
    InversePower,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::EvenPower => "even",
            Family::InversePower => "inverse",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "even-power" | "EvenPower" => Ok(Family::EvenPower),
            "inverse" | "inverse-power" | "InversePower" => Ok(Family::InversePower),
            other => Err(Error::InvalidInput(format!(
                "unknown family '{other}', expected one of: even, inverse"
            ))),
        }
    }
}

/// Undeformed central potential. `c` is ignored by the inverse-power family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PotentialSpec {
    pub fn even_power(a: f64, b: f64, c: f64) -> Self {
        Self { family: Family::EvenPower, a, b, c }
    }

    pub fn inverse_power(a: f64, b: f64) -> Self {
        Self { family: Family::InversePower, a, b, c: 0.0 }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }
}

/// Noncommutativity parameter and angular quantum number of one m-sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcContext {
    pub theta: f64,
    pub m: i32,
}

impl NcContext {
    pub fn new(theta: f64, m: i32) -> Self {
        Self { theta, m }
    }

    pub fn theta_m(&self) -> f64 {
        self.theta * f64::from(self.m)
    }
}

/// Effective radial problem of one `(theta, m)` sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformedRadialProblem {
    pub spec: PotentialSpec,
    /// Power of `r` to coefficient.
    pub terms: BTreeMap<i32, f64>,
    /// Constant `(a/2) theta m` removed from the potential; `E_reduced = E - energy_shift`.
    pub energy_shift: f64,
    /// `m^2 - 1/4`
    pub centrifugal: f64,
    pub m: i32,
    pub theta: f64,
}

impl DeformedRadialProblem {
    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn coefficient(&self, power: i32) -> f64 {
        self.terms.get(&power).copied().unwrap_or(0.0)
    }

    /// Deformed potential without the constant shift.
    pub fn potential(&self, r: f64) -> f64 {
        self.terms.iter().map(|(&p, &c)| c * r.powi(p)).sum()
    }

    /// `c~`: the r^-4 coefficient (even family) or r^-3 coefficient (inverse family).
    pub fn c_tilde(&self) -> f64 {
        match self.family() {
            Family::EvenPower => self.coefficient(-4),
            Family::InversePower => self.coefficient(-3),
        }
    }

    /// `d~`: the r^-6 coefficient (even family) or r^-4 coefficient (inverse family).
    pub fn d_tilde(&self) -> f64 {
        match self.family() {
            Family::EvenPower => self.coefficient(-6),
            Family::InversePower => self.coefficient(-4),
        }
    }

    /// Most singular power with a nonzero coefficient, if any term is singular.
    pub fn leading_singular(&self) -> Option<(i32, f64)> {
        self.terms
            .iter()
            .filter(|(&p, &c)| p < -2 && c != 0.0)
            .map(|(&p, &c)| (p, c))
            .next()
    }

    /// Same sector with a different `b`, re-deformed from scratch.
    pub fn with_b(&self, b: f64) -> Self {
        deform(self.spec.with_b(b), NcContext::new(self.theta, self.m))
            .expect("family and a unchanged, so re-deformation cannot fail")
    }

    pub fn effective_radial_ode(&self, energy: f64) -> RadialOperator<'_> {
        RadialOperator { problem: self, reduced_energy: energy - self.energy_shift }
    }
}

/// `R'' + q(r) R = 0` with `q(r) = E~ - V(r) - (m^2 - 1/4)/r^2`.
#[derive(Debug, Clone, Copy)]
pub struct RadialOperator<'a> {
    pub problem: &'a DeformedRadialProblem,
    pub reduced_energy: f64,
}

impl RadialOperator<'_> {
    pub fn coeff(&self, r: f64) -> f64 {
        self.reduced_energy - self.problem.potential(r) - self.problem.centrifugal / (r * r)
    }
}

fn check_family(spec: &PotentialSpec, expected: Family) -> Result<()> {
    if spec.family != expected {
        return Err(Error::InvalidFamily { expected, found: spec.family });
    }
    Ok(())
}

fn centrifugal(m: i32) -> f64 {
    let m = f64::from(m);
    m * m - 0.25
}

pub fn deform_even_power(spec: PotentialSpec, ctx: NcContext) -> Result<DeformedRadialProblem> {
    check_family(&spec, Family::EvenPower)?;
    if !(spec.a > 0.0) {
        return Err(Error::NonConfining { a: spec.a });
    }
    let tm = ctx.theta_m();
    let terms = BTreeMap::from([
        (2, spec.a),
        (-2, spec.b),
        (-4, spec.c + spec.b / 4.0 * tm),
        (-6, spec.c / 2.0 * tm),
    ]);
    Ok(DeformedRadialProblem {
        spec,
        terms,
        energy_shift: spec.a / 2.0 * tm,
        centrifugal: centrifugal(ctx.m),
        m: ctx.m,
        theta: ctx.theta,
    })
}

pub fn deform_inverse_power(spec: PotentialSpec, ctx: NcContext) -> Result<DeformedRadialProblem> {
    check_family(&spec, Family::InversePower)?;
    let tm = ctx.theta_m();
    let terms = BTreeMap::from([
        (-1, spec.a),
        (-2, spec.b),
        (-3, spec.a / 2.0 * tm),
        (-4, spec.b / 4.0 * tm),
    ]);
    Ok(DeformedRadialProblem {
        spec,
        terms,
        energy_shift: 0.0,
        centrifugal: centrifugal(ctx.m),
        m: ctx.m,
        theta: ctx.theta,
    })
}

/// Dispatches on `spec.family`.
pub fn deform(spec: PotentialSpec, ctx: NcContext) -> Result<DeformedRadialProblem> {
    match spec.family {
        Family::EvenPower => deform_even_power(spec, ctx),
        Family::InversePower => deform_inverse_power(spec, ctx),
    }
}

/// Problem with explicit terms and no deformation bookkeeping; used for
/// oracle calibration against textbook potentials.
pub fn bare_problem(family: Family, terms: &[(i32, f64)], m: i32) -> DeformedRadialProblem {
    DeformedRadialProblem {
        spec: PotentialSpec { family, a: 0.0, b: 0.0, c: 0.0 },
        terms: terms.iter().copied().collect(),
        energy_shift: 0.0,
        centrifugal: centrifugal(m),
        m,
        theta: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(p: &DeformedRadialProblem) -> Vec<(i32, f64)> {
        p.terms.iter().map(|(&k, &v)| (k, v)).collect()
    }

    #[test]
    fn even_theta_zero_is_identity() {
        let p = deform_even_power(PotentialSpec::even_power(1.0, 1.0, 1.0), NcContext::new(0.0, 2)).unwrap();
        assert_eq!(terms(&p), vec![(-6, 0.0), (-4, 1.0), (-2, 1.0), (2, 1.0)]);
        assert_eq!(p.energy_shift, 0.0);
        assert_eq!(p.centrifugal, 3.75);
    }

    #[test]
    fn even_hand_substitution() {
        let p = deform_even_power(PotentialSpec::even_power(2.0, 4.0, 6.0), NcContext::new(0.1, 1)).unwrap();
        assert!((p.coefficient(-4) - 6.1).abs() < 1e-15);
        assert!((p.coefficient(-6) - 0.3).abs() < 1e-15);
        assert!((p.energy_shift - 0.1).abs() < 1e-15);
        assert_eq!(p.coefficient(2), 2.0);
        assert_eq!(p.coefficient(-2), 4.0);
    }

    #[test]
    fn inverse_theta_zero_and_substitution() {
        let p = deform_inverse_power(PotentialSpec::inverse_power(-2.0, 1.0), NcContext::new(0.0, 1)).unwrap();
        assert_eq!(terms(&p), vec![(-4, 0.0), (-3, 0.0), (-2, 1.0), (-1, -2.0)]);
        let p = deform_inverse_power(PotentialSpec::inverse_power(2.0, 4.0), NcContext::new(0.1, 1)).unwrap();
        assert!((p.coefficient(-3) - 0.1).abs() < 1e-15);
        assert!((p.coefficient(-4) - 0.1).abs() < 1e-15);
        assert_eq!(p.energy_shift, 0.0);
    }

    #[test]
    fn errors() {
        let ctx = NcContext::new(0.1, 1);
        assert_eq!(
            deform_even_power(PotentialSpec::even_power(0.0, 1.0, 1.0), ctx),
            Err(Error::NonConfining { a: 0.0 })
        );
        assert!(matches!(
            deform_even_power(PotentialSpec::inverse_power(1.0, 1.0), ctx),
            Err(Error::InvalidFamily { .. })
        ));
        assert!(matches!(
            deform_inverse_power(PotentialSpec::even_power(1.0, 1.0, 1.0), ctx),
            Err(Error::InvalidFamily { .. })
        ));
        assert!("odd".parse::<Family>().unwrap_err().to_string().contains("even, inverse"));
    }

    #[test]
    fn radial_operator_assembly() {
        let p = bare_problem(Family::EvenPower, &[(2, 1.0)], 0);
        let op = p.effective_radial_ode(2.0);
        let r: f64 = 0.7;
        assert!((op.coeff(r) - (2.0 - r * r + 0.25 / (r * r))).abs() < 1e-14);

        let p = bare_problem(Family::InversePower, &[(-1, -2.0)], 1);
        assert!((p.effective_radial_ode(-1.0).coeff(1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduced_energy_subtracts_shift() {
        let p = deform_even_power(PotentialSpec::even_power(2.0, 0.0, 1.0), NcContext::new(0.2, 3)).unwrap();
        let op = p.effective_radial_ode(10.0);
        assert!((op.reduced_energy - (10.0 - 0.6)).abs() < 1e-15);
    }
}
