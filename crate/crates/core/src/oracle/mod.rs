//! Finite-difference eigenvalue oracle for the deformed radial problems.
//!
//! Independent of every closed form in this crate: it only sees the
//! potential terms, the centrifugal parameter and the constant shift.

pub mod grid;
pub mod tridiag;

use serde::{Deserialize, Serialize};

pub use grid::{GridSpec, Mapping};

use crate::deformation::DeformedRadialProblem;
use crate::error::{Error, Result};
use crate::numerics;
use grid::{discretize, inner_boundary, is_confining, length_scale, wkb_domain, InnerBoundary};
use tridiag::count_nodes;

pub const DEFAULT_POINTS: usize = 4000;
/// e-folds of WKB suppression required in each forbidden margin.
const MARGIN_DECAY: f64 = 32.0;
const EXPANSION_TOL: f64 = 1e-8;
const MAX_EXPANSIONS: usize = 8;
const MAX_REFINEMENTS: usize = 4;
const RESIDUAL_TOL: f64 = 1e-8;
const NODE_TOL: f64 = 1e-7;
/// Finite-difference step of [`ode_residual`] as a fraction of the local length.
const STEP_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Final grid (the coarser of the Richardson pair).
    pub grid: GridSpec,
    /// Richardson-extrapolated physical energies, ascending.
    pub eigenvalues: Vec<f64>,
    /// Raw eigenvalues on `grid` and on the grid with twice the points.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub node_counts: Vec<usize>,
    pub residual_norms: Vec<f64>,
    pub converged: Vec<bool>,
    /// `(r, R(r))` samples of each fine-grid eigenvector, max-normalized.
    pub samples: Vec<Vec<(f64, f64)>>,
}

impl OracleResult {
    /// Same as `eigenvalues`.
    pub fn richardson_estimate(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Rejects potentials whose spectrum is unbounded below.
pub fn check_stability(problem: &DeformedRadialProblem) -> Result<()> {
    if let Some((_, coeff)) = problem.leading_singular() {
        if coeff < 0.0 {
            return Err(Error::SingularAttraction { d: coeff });
        }
        return Ok(());
    }
    let inverse_square = problem.coefficient(-2) + problem.centrifugal;
    if inverse_square < -0.25 {
        return Err(Error::SingularAttraction { d: inverse_square });
    }
    Ok(())
}

/// Starting grid for `problem`: a coarse pre-solve on a generous domain
/// locates the requested levels, then the WKB margins are sized for the
/// highest of them.
pub fn auto_grid(problem: &DeformedRadialProblem, n_eigs: usize, points: usize) -> Result<GridSpec> {
    check_stability(problem)?;
    let ell = length_scale(problem);
    let confining = is_confining(problem);
    let rs: Vec<f64> = (0..=2000).map(|i| (1e-6 * ell) * (1e12f64).powf(f64::from(i) / 2000.0)).collect();
    let v_min = rs
        .iter()
        .map(|&r| grid::effective_potential(problem, r))
        .fold(f64::INFINITY, f64::min);
    let e_top = if confining {
        v_min + 8.0 * (n_eigs as f64 + 1.0) * (v_min.abs() + ell.powi(-2))
    } else {
        -1e-3 * ell.powi(-2)
    };
    let (r_min, r_max) = wkb_domain(problem, e_top, MARGIN_DECAY);
    let pre_grid = GridSpec::logarithmic(r_min, r_max, 3000);
    let (pre, _) = raw_spectrum(problem, &pre_grid, n_eigs, false);
    let mut estimates: Vec<f64> = pre;
    if !confining {
        estimates.retain(|&e| e < 0.0);
        if estimates.is_empty() {
            return Err(Error::NoBoundState);
        }
    }
    let top = estimates.last().copied().unwrap_or(e_top);
    let (r_min, r_max) = wkb_domain(problem, top, MARGIN_DECAY);
    Ok(GridSpec::logarithmic(r_min, r_max, points))
}

fn raw_spectrum(
    problem: &DeformedRadialProblem,
    grid: &GridSpec,
    n_eigs: usize,
    with_vectors: bool,
) -> (Vec<f64>, Vec<(Vec<f64>, f64)>) {
    let pencil = discretize(problem, grid, inner_boundary(problem));
    let mut vals = Vec::with_capacity(n_eigs);
    let mut vecs = Vec::new();
    for k in 0..n_eigs {
        let Some(lambda) = pencil.eigenvalue(k) else { break };
        vals.push(lambda);
        if with_vectors {
            let v = pencil.eigenvector(lambda);
            let res = pencil.residual(lambda, &v);
            vecs.push((v, res));
        }
    }
    (vals, vecs)
}

struct Pass {
    grid: GridSpec,
    coarse: Vec<f64>,
    fine: Vec<f64>,
    extrapolated: Vec<f64>,
    coarse_nodes: Vec<usize>,
    fine_vectors: Vec<(Vec<f64>, f64)>,
    fine_grid: GridSpec,
}

fn pass(problem: &DeformedRadialProblem, grid: GridSpec, n_eigs: usize) -> Pass {
    let fine_grid = grid.with_points(2 * grid.points);
    let (coarse, coarse_vecs) = raw_spectrum(problem, &grid, n_eigs, true);
    let (fine, fine_vectors) = raw_spectrum(problem, &fine_grid, n_eigs, true);
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let coarse_nodes = coarse_vecs.iter().map(|(v, _)| count_nodes(v, NODE_TOL)).collect();
    Pass { grid, coarse, fine, extrapolated, coarse_nodes, fine_vectors, fine_grid }
}

fn expanded(grid: &GridSpec, inner: InnerBoundary) -> GridSpec {
    let h = grid.step();
    let r_max = grid.r_max * 1.4;
    let r_min = match inner {
        InnerBoundary::Dirichlet => grid.r_min * 0.7,
        InnerBoundary::RegularPowerLaw { .. } => grid.r_min,
    };
    let points = ((r_max / r_min).ln() / h).round() as usize;
    GridSpec::logarithmic(r_min, r_max, points)
}

fn max_relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

/// Lowest `n_eigs` levels of `problem`, Richardson-extrapolated over a grid
/// and its doubling, with the domain widened until the levels settle.
///
/// Non-confining potentials report only levels below zero.
pub fn solve_radial(problem: &DeformedRadialProblem, grid: &GridSpec, n_eigs: usize) -> Result<OracleResult> {
    check_stability(problem)?;
    grid.validate(problem)?;
    if n_eigs == 0 {
        return Err(Error::InvalidInput("n_eigs must be positive".into()));
    }
    let confining = is_confining(problem);
    let inner = inner_boundary(problem);

    let mut current = pass(problem, *grid, n_eigs);
    let mut settled = vec![false; current.extrapolated.len()];
    if grid.mapping == Mapping::Logarithmic {
        for _ in 0..MAX_EXPANSIONS {
            let next = pass(problem, expanded(&current.grid, inner), n_eigs);
            let keep = if confining {
                n_eigs
            } else {
                next.extrapolated.iter().take_while(|&&e| e < 0.0).count()
            };
            let len = keep.min(current.extrapolated.len()).min(next.extrapolated.len());
            settled = (0..next.extrapolated.len())
                .map(|k| {
                    k < len
                        && max_relative_change(&current.extrapolated[k..=k], &next.extrapolated[k..=k])
                            < EXPANSION_TOL
                })
                .collect();
            current = next;
            if settled.iter().take(len.max(1)).all(|&s| s) {
                break;
            }
        }
    } else {
        settled = vec![true; current.extrapolated.len()];
    }

    let count = if confining {
        current.extrapolated.len()
    } else {
        current.extrapolated.iter().take_while(|&&e| e < 0.0).count()
    };
    if count == 0 {
        return Err(Error::NoBoundState);
    }
    let ground_gap = (current.fine[0] - current.coarse[0]).abs();
    if ground_gap > 1e-2 * current.fine[0].abs().max(1e-12) {
        return Err(Error::NotConverged { coarse: current.coarse[0], fine: current.fine[0] });
    }

    let nodes = current.fine_grid.nodes();
    let shift = problem.energy_shift;
    let mut result = OracleResult {
        grid: current.grid,
        eigenvalues: Vec::with_capacity(count),
        coarse: Vec::with_capacity(count),
        fine: Vec::with_capacity(count),
        node_counts: Vec::with_capacity(count),
        residual_norms: Vec::with_capacity(count),
        converged: Vec::with_capacity(count),
        samples: Vec::with_capacity(count),
    };
    for k in 0..count {
        let (vector, residual) = &current.fine_vectors[k];
        let node_count = count_nodes(vector, NODE_TOL);
        let stride = (nodes.len() / 128).max(1);
        let samples = nodes
            .iter()
            .zip(vector)
            .step_by(stride)
            .map(|(&r, &y)| (r, y * current.fine_grid.to_radial(r)))
            .collect();
        result.eigenvalues.push(current.extrapolated[k] + shift);
        result.coarse.push(current.coarse[k] + shift);
        result.fine.push(current.fine[k] + shift);
        result.converged.push(
            settled.get(k).copied().unwrap_or(false)
                && *residual <= RESIDUAL_TOL
                && node_count == current.coarse_nodes[k],
        );
        result.node_counts.push(node_count);
        result.residual_norms.push(*residual);
        result.samples.push(samples);
    }
    Ok(result)
}

/// [`auto_grid`] followed by [`solve_radial`], doubling the resolution while
/// the ground level has not converged.
pub fn solve_auto(problem: &DeformedRadialProblem, n_eigs: usize, points: usize) -> Result<OracleResult> {
    let mut grid = auto_grid(problem, n_eigs, points)?;
    let mut refinements = 0;
    loop {
        let can_refine = refinements < MAX_REFINEMENTS;
        match solve_radial(problem, &grid, n_eigs) {
            Err(Error::NotConverged { .. }) if can_refine => {}
            other => return other,
        }
        grid = grid.with_points(2 * grid.points);
        refinements += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMatch {
    pub index: usize,
    pub node_count: usize,
    pub gap: f64,
    /// Target lies outside the computed eigenvalue range.
    pub clamped: bool,
}

pub fn match_level(oracle: &OracleResult, target: f64) -> LevelMatch {
    let (index, gap) = oracle
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, (e - target).abs()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let first = oracle.eigenvalues.first().copied().unwrap_or(f64::NAN);
    let last = oracle.eigenvalues.last().copied().unwrap_or(f64::NAN);
    let spacing = if oracle.eigenvalues.len() > 1 { (last - first) / (oracle.eigenvalues.len() - 1) as f64 } else { first.abs() };
    let slack = 0.5 * spacing.abs();
    LevelMatch {
        index,
        node_count: oracle.node_counts.get(index).copied().unwrap_or(0),
        gap,
        clamped: target < first - slack || target > last + slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: f64,
    /// The function vanished on the grid; `residual` is 0 by convention.
    pub degenerate_function: bool,
}

/// Relative sup-norm of `R'' + [E~ - V - (m^2-1/4)/r^2] R` on the interior
/// nodes of `grid`:
///
/// `max_i |R'' + q R|_i / max(|R''|_i + |q R|_i, sup |R| * S)`, with
/// `S = <|q|>` the expectation of `|q|` in the state `R`. In the bulk an
/// energy error `dE` shows up as a residual of roughly `dE / S`; near
/// singular points the local terms set the scale.
///
/// `R''` is a Richardson-combined pair of fourth-order central differences
/// with a step set by the smaller of `r` and the local WKB length.
pub fn ode_residual<F: Fn(f64) -> f64>(
    problem: &DeformedRadialProblem,
    energy: f64,
    f: F,
    grid: &GridSpec,
) -> ResidualReport {
    let op = problem.effective_radial_ode(energy);
    let nodes = grid.nodes();
    let interior = &nodes[2.min(nodes.len())..nodes.len().saturating_sub(2).max(2.min(nodes.len()))];
    // Coarse pass for <|q|>, which bounds the finite-difference step in the bulk.
    let (wq, wn) = interior.windows(2).fold((0.0, 0.0), |(wq, wn), pair| {
        let (r, dr) = (pair[0], pair[1] - pair[0]);
        let (v, q) = (f(r), op.coeff(r));
        if v.is_finite() && q.is_finite() {
            (wq + q.abs() * v * v * dr, wn + v * v * dr)
        } else {
            (wq, wn)
        }
    });
    let bulk = if wn > 0.0 { wq / wn } else { 0.0 };
    let mut points = Vec::with_capacity(interior.len());
    for (i, &r) in interior.iter().enumerate() {
        let q = op.coeff(r);
        let wkb = 1.0 / q.abs().max(bulk).max(f64::MIN_POSITIVE).sqrt();
        let h = STEP_FRACTION * r.min(wkb);
        let value = f(r);
        let d_h = numerics::second_derivative(&f, r, h);
        let d_half = numerics::second_derivative(&f, r, 0.5 * h);
        let second = (16.0 * d_half - d_h) / 15.0;
        let width = match (i.checked_sub(1).map(|j| interior[j]), interior.get(i + 1)) {
            (Some(lo), Some(&hi)) => 0.5 * (hi - lo),
            (None, Some(&hi)) => hi - r,
            (Some(lo), None) => r - lo,
            (None, None) => 1.0,
        };
        if value.is_finite() && second.is_finite() && q.is_finite() {
            points.push((value, second, q, width));
        }
    }
    let sup = points.iter().fold(0.0f64, |acc, p| acc.max(p.0.abs()));
    if sup == 0.0 {
        return ResidualReport { residual: 0.0, degenerate_function: true };
    }
    let (weighted, norm) = points.iter().fold((0.0, 0.0), |(wq, n), &(v, _, q, w)| {
        let weight = v * v * w;
        (wq + q.abs() * weight, n + weight)
    });
    let scale = weighted / norm;
    let floor = sup * scale;
    let residual = points.iter().fold(0.0f64, |acc, &(value, second, q, _)| {
        let local = (second.abs() + (q * value).abs()).max(floor);
        acc.max((second + q * value).abs() / local)
    });
    ResidualReport { residual, degenerate_function: false }
}
