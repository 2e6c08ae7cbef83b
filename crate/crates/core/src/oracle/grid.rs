use serde::{Deserialize, Serialize};

use super::tridiag::Pencil;
use crate::deformation::DeformedRadialProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mapping {
    Uniform,
    /// `r = e^x`, uniform in `x`.
    Logarithmic,
}

/// Radial grid. `points` is the number of intervals; the `points - 1`
/// interior nodes carry the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub mapping: Mapping,
    pub points: usize,
}

pub const MIN_POINTS: usize = 200;

impl GridSpec {
    pub fn logarithmic(r_min: f64, r_max: f64, points: usize) -> Self {
        Self { r_min, r_max, mapping: Mapping::Logarithmic, points }
    }

    pub fn uniform(r_min: f64, r_max: f64, points: usize) -> Self {
        Self { r_min, r_max, mapping: Mapping::Uniform, points }
    }

    pub fn validate(&self, problem: &DeformedRadialProblem) -> Result<()> {
        if !(self.r_min > 0.0) || !(self.r_max > self.r_min) || !self.r_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {}",
                self.points
            )));
        }
        let strongly_singular = problem.terms.iter().any(|(&p, &c)| p <= -4 && c != 0.0);
        if strongly_singular && self.mapping == Mapping::Uniform {
            return Err(Error::InvalidGrid(
                "r^-4 and r^-6 terms need the logarithmic mapping".into(),
            ));
        }
        Ok(())
    }

    pub fn with_points(self, points: usize) -> Self {
        Self { points, ..self }
    }

    /// Step in the mapped coordinate.
    pub fn step(&self) -> f64 {
        match self.mapping {
            Mapping::Uniform => (self.r_max - self.r_min) / self.points as f64,
            Mapping::Logarithmic => (self.r_max / self.r_min).ln() / self.points as f64,
        }
    }

    /// Interior nodes in `r`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (1..self.points)
            .map(|i| match self.mapping {
                Mapping::Uniform => self.r_min + i as f64 * h,
                Mapping::Logarithmic => (self.r_min.ln() + i as f64 * h).exp(),
            })
            .collect()
    }

    /// Factor turning the discrete unknown at node `r` into `R(r)`.
    pub fn to_radial(&self, r: f64) -> f64 {
        match self.mapping {
            Mapping::Uniform => 1.0,
            Mapping::Logarithmic => r.sqrt(),
        }
    }
}

/// Inner boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerBoundary {
    Dirichlet,
    /// Ghost value follows the regular power law `y ~ e^{s x}` of the
    /// log-mapped equation near the origin.
    RegularPowerLaw { exponent: f64 },
}

/// Inner boundary appropriate for `problem`: Dirichlet when a repulsive
/// singular term dominates the origin, the power-law ghost otherwise.
pub fn inner_boundary(problem: &DeformedRadialProblem) -> InnerBoundary {
    match problem.leading_singular() {
        Some(_) => InnerBoundary::Dirichlet,
        None => {
            let s2 = problem.coefficient(-2) + problem.centrifugal + 0.25;
            InnerBoundary::RegularPowerLaw { exponent: s2.max(0.0).sqrt() }
        }
    }
}

/// Discretizes `-R'' + [V + (m^2-1/4)/r^2] R = E~ R` on `grid`.
///
/// Logarithmic mapping uses `R = r^{1/2} y(x)`, giving
/// `-y'' + [r^2 V + m^2] y = E~ r^2 y`, a symmetric pencil with mass `r^2`.
pub fn discretize(problem: &DeformedRadialProblem, grid: &GridSpec, inner: InnerBoundary) -> Pencil {
    let h = grid.step();
    let nodes = grid.nodes();
    let n = nodes.len();
    let inv_h2 = 1.0 / (h * h);
    let m2 = problem.centrifugal + 0.25;
    let ghost = match (inner, grid.mapping) {
        (InnerBoundary::Dirichlet, _) => 0.0,
        (InnerBoundary::RegularPowerLaw { exponent }, Mapping::Logarithmic) => (-exponent * h).exp(),
        (InnerBoundary::RegularPowerLaw { exponent }, Mapping::Uniform) => {
            let r0 = grid.r_min;
            let r1 = nodes[0];
            (r0 / r1).powf(exponent + 0.5)
        }
    };
    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for &r in &nodes {
        let v = problem.potential(r);
        match grid.mapping {
            Mapping::Logarithmic => {
                diag.push(2.0 * inv_h2 + r * r * v + m2);
                mass.push(r * r);
            }
            Mapping::Uniform => {
                diag.push(2.0 * inv_h2 + v + problem.centrifugal / (r * r));
                mass.push(1.0);
            }
        }
    }
    diag[0] -= ghost * inv_h2;
    Pencil { diag, off: vec![-inv_h2; n - 1], mass }
}

/// Characteristic length of the outer region.
pub fn length_scale(problem: &DeformedRadialProblem) -> f64 {
    let confining = problem.terms.iter().rev().find(|(&p, &c)| p > 0 && c > 0.0);
    if let Some((&p, &c)) = confining {
        return c.powf(-1.0 / f64::from(p + 2));
    }
    let coulomb = problem.coefficient(-1);
    if coulomb < 0.0 {
        return 1.0 / coulomb.abs();
    }
    1.0
}

pub fn is_confining(problem: &DeformedRadialProblem) -> bool {
    problem.terms.iter().any(|(&p, &c)| p > 0 && c > 0.0)
}

/// Langer-corrected effective potential `V + m^2/r^2` (reduced-energy frame).
pub fn effective_potential(problem: &DeformedRadialProblem, r: f64) -> f64 {
    problem.potential(r) + (problem.centrifugal + 0.25) / (r * r)
}

/// Domain whose classically forbidden margins each carry at least
/// `decay` e-folds of WKB suppression at reduced energy `e_top`.
pub fn wkb_domain(problem: &DeformedRadialProblem, e_top: f64, decay: f64) -> (f64, f64) {
    let ell = length_scale(problem);
    let lo = (1e-9 * ell).ln();
    let hi = (1e5 * ell).ln();
    let samples = 6000;
    let rs: Vec<f64> = (0..=samples)
        .map(|i| (lo + (hi - lo) * i as f64 / samples as f64).exp())
        .collect();
    let g: Vec<f64> = rs.iter().map(|&r| effective_potential(problem, r) - e_top).collect();
    let first_allowed = g.iter().position(|&x| x < 0.0);
    let last_allowed = g.iter().rposition(|&x| x < 0.0);
    let (Some(i_in), Some(i_out)) = (first_allowed, last_allowed) else {
        return (1e-8 * ell, 50.0 * ell);
    };

    let mut acc = 0.0;
    let mut r_max = rs[samples];
    for i in i_out..samples {
        acc += 0.5 * (g[i].max(0.0).sqrt() + g[i + 1].max(0.0).sqrt()) * (rs[i + 1] - rs[i]);
        if acc >= decay {
            r_max = rs[i + 1];
            break;
        }
    }

    let r_min = if problem.leading_singular().is_some() {
        let mut acc = 0.0;
        let mut r_min = rs[0];
        for i in (1..=i_in).rev() {
            acc += 0.5 * (g[i].max(0.0).sqrt() + g[i - 1].max(0.0).sqrt()) * (rs[i] - rs[i - 1]);
            if acc >= decay {
                r_min = rs[i - 1];
                break;
            }
        }
        r_min
    } else {
        1e-8 * ell
    };
    (r_min, r_max)
}
