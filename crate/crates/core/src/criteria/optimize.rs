use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Branch, NonLocalFrame};
use crate::quadrature::Quadrature;
use crate::scalar::Real;
use crate::states::{example_state_marginals, example_state_q_on, ExampleStateParams};

use super::{renyi_wehrl_witness, stw_witness, WitnessReport};

/// Grid points whose values lie within this distance of the minimum count
/// as ties; the smallest parameter among them wins.
pub const TIE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: Deserialize<'de>"))]
pub struct Optimum<P, T: Real> {
    pub param: P,
    pub value: T,
    pub report: WitnessReport<T>,
    /// Number of grid points evaluated.
    pub evaluated: usize,
}

/// Minimizes `eval` over `grid`. Points are evaluated in parallel; the
/// reduction runs in grid order so the result does not depend on
/// scheduling.
pub fn optimize_parameter<P, T, F>(grid: &[P], eval: F) -> Result<Optimum<P, T>>
where
    P: Copy + PartialOrd + Send + Sync,
    T: Real,
    F: Fn(P) -> Result<WitnessReport<T>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let reports: Vec<WitnessReport<T>> = grid.par_iter().map(|&p| eval(p)).collect::<Result<_>>()?;
    let min = reports.iter().map(|r| r.value).fold(T::infinity(), T::min);
    if !min.is_finite() {
        return Err(Error::param("grid", "no finite witness value on the grid"));
    }
    let tol = T::lit(TIE_TOLERANCE);
    let mut best: Option<usize> = None;
    for (i, r) in reports.iter().enumerate() {
        if r.value <= min + tol {
            best = match best {
                Some(b) if !(grid[i] < grid[b]) => Some(b),
                _ => Some(i),
            };
        }
    }
    let i = best.expect("minimum attained");
    let report = reports[i].clone();
    Ok(Optimum {
        param: grid[i],
        value: report.value,
        report,
        evaluated: grid.len(),
    })
}

/// Orders between the truncation floor and `β = 20`.
pub fn default_beta_grid<T: Real>() -> Vec<T> {
    [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0]
        .into_iter()
        .map(T::lit)
        .collect()
}

/// `2^{k/8}` for `k = −8..=8`, i.e. `[1/2, 2]` including `1/√2`, `1`, `√2`.
pub fn default_xi_grid<T: Real>() -> Vec<T> {
    (-8..=8).map(|k| T::lit(2f64.powf(k as f64 / 8.0))).collect()
}

/// Marginal-entropy orders from just above `1/2` to `200`.
pub fn default_alpha_grid<T: Real>() -> Vec<T> {
    [
        0.501, 0.505, 0.51, 0.52, 0.55, 0.6, 0.7, 0.8, 0.9, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 25.0, 50.0, 100.0,
        200.0,
    ]
    .into_iter()
    .map(T::lit)
    .collect()
}

/// Best witness for the example state over local squeezing, an order
/// parameter and the branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ExampleOptimum<T: Real> {
    pub xi: T,
    /// `β` for Rényi–Wehrl, `α` for the marginal criterion.
    pub order: T,
    pub branch: Branch,
    pub report: WitnessReport<T>,
}

fn grid3<T: Real>(xi: &[T], order: &[T], branches: &[Branch]) -> Vec<(Branch, T, T)> {
    let mut out = Vec::with_capacity(xi.len() * order.len() * branches.len());
    for &b in branches {
        for &x in xi {
            for &o in order {
                out.push((b, x, o));
            }
        }
    }
    out
}

/// Minimizes the Rényi–Wehrl witness of the example state over `ξ`, `β`
/// and the branch (`params.xi` is replaced by the grid values).
pub fn optimal_renyi_wehrl_example<T: Real>(
    params: &ExampleStateParams<T>,
    xi_grid: &[T],
    beta_grid: &[T],
    branches: &[Branch],
    quad: &Quadrature,
) -> Result<ExampleOptimum<T>> {
    let grid = grid3(xi_grid, beta_grid, branches);
    let opt = optimize_parameter(&grid, |(branch, xi, beta)| {
        let q = example_state_q_on(&params.with_xi(xi), branch)?;
        let frame = NonLocalFrame::unit(branch);
        Ok(renyi_wehrl_witness(&q, beta, &frame, quad)?.with_param("xi", xi))
    })?;
    let (branch, xi, order) = opt.param;
    Ok(ExampleOptimum {
        xi,
        order,
        branch,
        report: opt.report,
    })
}

/// Minimizes the marginal-entropy criterion of the example state over `α`
/// and the branch.
pub fn optimal_stw_example<T: Real>(
    params: &ExampleStateParams<T>,
    alpha_grid: &[T],
    branches: &[Branch],
    quad: &Quadrature,
) -> Result<ExampleOptimum<T>> {
    let marginals: Vec<_> = branches
        .iter()
        .map(|&b| example_state_marginals(params, b))
        .collect::<Result<_>>()?;
    let grid = grid3(&[params.xi], alpha_grid, branches);
    let opt = optimize_parameter(&grid, |(branch, _, alpha)| {
        let k = branches.iter().position(|&b| b == branch).expect("branch in grid");
        let (f, g) = &marginals[k];
        stw_witness(f, g, alpha, &NonLocalFrame::unit(branch), quad)
    })?;
    let (branch, xi, order) = opt.param;
    Ok(ExampleOptimum {
        xi,
        order,
        branch,
        report: opt.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::CriterionId;

    fn report(v: f64) -> WitnessReport<f64> {
        WitnessReport::new(CriterionId::General, NonLocalFrame::unit(Branch::Plus), v, 0.0)
    }

    #[test]
    fn tie_break_prefers_smallest_parameter() {
        let grid = [3.0, 0.5, 2.0, 1.0];
        let opt = optimize_parameter(&grid, |p| Ok(report(if p == 3.0 { 0.1 } else { -1.0 }))).unwrap();
        assert_eq!(opt.param, 0.5);
        assert_eq!(opt.value, -1.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let grid: [f64; 0] = [];
        assert!(matches!(
            optimize_parameter(&grid, |_| Ok(report(0.0))),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn single_point_grid() {
        let opt = optimize_parameter(&[7.0], |p| Ok(report(p))).unwrap();
        assert_eq!((opt.param, opt.value, opt.evaluated), (7.0, 7.0, 1));
    }
}
