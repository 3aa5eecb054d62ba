//! Coarse-grained criteria: tile probabilities on a uniform grid, the
//! piecewise-constant density they define, and resolution sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{check_beta, ConcaveFunction, CriterionId, Verdict, WitnessReport};
use crate::distribution::{GridDensity, Interpolation, QDistribution};
use crate::error::{Error, Result};
use crate::frame::{Branch, NonLocalFrame};
use crate::gaussian::Gaussian2;
use crate::profile::Profile1D;
use crate::quadrature::{Quadrature, Square};
use crate::scalar::{normal_interval_mass, Real};
use crate::states::{tmsv_mixture_q, TmsvMixtureParams};

/// Tail mass above which a grid is rejected.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;

/// Round-off allowance attached to exact tile sums.
const SUM_ERROR: f64 = 1e-10;

/// Index range of the tiles to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", rename_all = "kebab-case")]
pub enum Extent<T: Real> {
    /// Symmetric range covering `(q/peak)^power ≥ 1e-14`.
    Auto { power: T },
    /// Symmetric range covering the disk of this radius.
    Radius(T),
    Indices {
        j_min: i64,
        j_max: i64,
        k_min: i64,
        k_max: i64,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Masses<T> {
    /// `Q^{jk} = rows[j] · cols[k]`.
    Separable { rows: Vec<T>, cols: Vec<T> },
    /// Row-major over `j` then `k`.
    Dense(Vec<T>),
}

/// Tiles `[δr(j − ½), δr(j + ½)] × [δs(k − ½), δs(k + ½)]` with their
/// probabilities `Q^{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid<T: Real> {
    pub delta_r: T,
    pub delta_s: T,
    pub j_min: i64,
    pub j_max: i64,
    pub k_min: i64,
    pub k_max: i64,
    masses: Masses<T>,
    /// Mass outside the kept tiles.
    pub tail_mass: T,
}

impl<T: Real> TileGrid<T> {
    pub fn nx(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn ny(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    /// Phase-space area element `Δ = δr δs / (2π)`.
    pub fn area_element(&self) -> T {
        self.delta_r * self.delta_s / T::TAU()
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.masses, Masses::Separable { .. })
    }

    /// `Q^{jk}` for tile indices `(j, k)`; zero outside the range.
    pub fn prob(&self, j: i64, k: i64) -> T {
        if j < self.j_min || j > self.j_max || k < self.k_min || k > self.k_max {
            return T::zero();
        }
        let (a, b) = ((j - self.j_min) as usize, (k - self.k_min) as usize);
        match &self.masses {
            Masses::Separable { rows, cols } => rows[a] * cols[b],
            Masses::Dense(v) => v[a * self.ny() + b],
        }
    }

    /// All probabilities, row-major over `j` then `k`.
    pub fn probs(&self) -> Vec<T> {
        match &self.masses {
            Masses::Dense(v) => v.clone(),
            Masses::Separable { rows, cols } => rows.iter().flat_map(|&r| cols.iter().map(move |&c| r * c)).collect(),
        }
    }

    pub fn max_prob(&self) -> T {
        let max = |v: &[T]| v.iter().copied().fold(T::zero(), T::max);
        match &self.masses {
            Masses::Separable { rows, cols } => max(rows) * max(cols),
            Masses::Dense(v) => max(v),
        }
    }

    pub fn total(&self) -> T {
        match &self.masses {
            Masses::Separable { rows, cols } => rows.iter().copied().sum::<T>() * cols.iter().copied().sum::<T>(),
            Masses::Dense(v) => v.iter().copied().sum(),
        }
    }

    fn centre_r(&self, j: i64) -> T {
        T::lit(j as f64) * self.delta_r
    }

    fn centre_s(&self, k: i64) -> T {
        T::lit(k as f64) * self.delta_s
    }

    /// `Σ Δ f(Q^{jk}/Δ)` over all tiles.
    fn sum_f(&self, f: impl Fn(T) -> T + Sync) -> T {
        let area = self.area_element();
        match &self.masses {
            Masses::Dense(v) => v.iter().map(|&p| area * f(p / area)).sum(),
            Masses::Separable { rows, cols } => rows
                .par_iter()
                .map(|&r| cols.iter().map(|&c| area * f(r * c / area)).sum::<T>())
                .collect::<Vec<T>>()
                .into_iter()
                .sum(),
        }
    }

    /// `Σ Δ (Q^{jk}/Δ)^β`, factorized when separable.
    fn power_sum(&self, beta: T) -> T {
        let area = self.area_element();
        match &self.masses {
            Masses::Separable { rows, cols } => {
                let a: T = rows.iter().map(|&r| r.powf(beta)).sum();
                let b: T = cols.iter().map(|&c| c.powf(beta)).sum();
                area.powf(T::one() - beta) * a * b
            }
            Masses::Dense(_) => self.sum_f(|t| t.powf(beta)),
        }
    }

    /// `−Σ Q^{jk} ln(Q^{jk}/Δ)`, factorized when separable.
    fn wehrl_sum(&self) -> T {
        match &self.masses {
            Masses::Separable { rows, cols } => {
                let (sr, sc): (T, T) = (rows.iter().copied().sum(), cols.iter().copied().sum());
                let hr: T = rows.iter().map(|&r| r.xlnx()).sum();
                let hc: T = cols.iter().map(|&c| c.xlnx()).sum();
                -(hr * sc + hc * sr) + sr * sc * self.area_element().ln()
            }
            Masses::Dense(_) => self.sum_f(|t| -t.xlnx()),
        }
    }
}

fn index_range<T: Real>(radius: T, delta: T) -> (i64, i64) {
    let n = (radius / delta + T::half()).ceil().as_f64() as i64;
    (-n, n)
}

/// `Q^{jk} = ∫_{δ_jk} Q dr ds/(2π)`.
///
/// Diagonal Gaussians and axis-aligned products use closed-form interval
/// masses; correlated Gaussians integrate the conditional normal mass over
/// `r`; anything else integrates each tile by quadrature.
pub fn tile_probabilities<T: Real>(
    q: &QDistribution<T>,
    delta_r: T,
    delta_s: T,
    extent: Extent<T>,
    quad: &Quadrature,
) -> Result<TileGrid<T>> {
    for (name, d) in [("delta_r", delta_r), ("delta_s", delta_s)] {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::param(name, format!("must be positive, got {d}")));
        }
    }
    let (j_min, j_max, k_min, k_max) = match extent {
        Extent::Auto { power } => {
            let r = q.integration_half_width(power);
            let (a, b) = index_range(r, delta_r);
            let (c, d) = index_range(r, delta_s);
            (a, b, c, d)
        }
        Extent::Radius(r) => {
            let (a, b) = index_range(r, delta_r);
            let (c, d) = index_range(r, delta_s);
            (a, b, c, d)
        }
        Extent::Indices {
            j_min,
            j_max,
            k_min,
            k_max,
        } => (j_min, j_max, k_min, k_max),
    };
    if j_max < j_min || k_max < k_min {
        return Err(Error::param("extent", "empty index range"));
    }
    let edges =
        |lo: i64, hi: i64, d: T| -> Vec<T> { (lo..=hi + 1).map(|j| (T::lit(j as f64) - T::half()) * d).collect() };
    let er = edges(j_min, j_max, delta_r);
    let es = edges(k_min, k_max, delta_s);

    let (masses, tail) = match q {
        QDistribution::Gaussian(g) if g.cov.xy == T::zero() => {
            let (rows, tr) = normal_masses(&er, g.mean[0], g.cov.xx);
            let (cols, ts) = normal_masses(&es, g.mean[1], g.cov.yy);
            (Masses::Separable { rows, cols }, tr + ts - tr * ts)
        }
        QDistribution::PolyGaussian(p) if p.angle.sin().abs() < T::lit(1e-15) => {
            // profiles are even, so a half-turn leaves the masses unchanged
            let (rows, tr) = profile_masses(&er, &p.x);
            let (cols, ts) = profile_masses(&es, &p.y);
            (Masses::Separable { rows, cols }, tr + ts - tr * ts)
        }
        QDistribution::Gaussian(g) => dense(gaussian_dense(g, &er, &es, quad)?),
        QDistribution::GaussianMixture(m) => {
            let mut acc = vec![T::zero(); (er.len() - 1) * (es.len() - 1)];
            for (w, g) in m.weights.iter().zip(&m.components) {
                let comp = gaussian_dense(g, &er, &es, quad)?;
                for (a, c) in acc.iter_mut().zip(comp) {
                    *a = *a + *w * c;
                }
            }
            dense(acc)
        }
        _ => dense(quadrature_dense(q, &er, &es, quad)?),
    };
    let tail = tail.max(T::zero());
    if tail.as_f64() > TAIL_MASS_LIMIT {
        return Err(Error::TailMass {
            tail: tail.as_f64(),
            limit: TAIL_MASS_LIMIT,
        });
    }
    Ok(TileGrid {
        delta_r,
        delta_s,
        j_min,
        j_max,
        k_min,
        k_max,
        masses,
        tail_mass: tail,
    })
}

fn dense<T: Real>(v: Vec<T>) -> (Masses<T>, T) {
    let total: T = v.iter().copied().sum();
    (Masses::Dense(v), T::one() - total)
}

fn normal_masses<T: Real>(edges: &[T], mean: T, var: T) -> (Vec<T>, T) {
    let masses = edges
        .windows(2)
        .map(|w| normal_interval_mass(w[0] - mean, w[1] - mean, var))
        .collect();
    let lo = normal_interval_mass(T::neg_infinity(), edges[0] - mean, var);
    let hi = normal_interval_mass(edges[edges.len() - 1] - mean, T::infinity(), var);
    (masses, lo + hi)
}

fn profile_masses<T: Real>(edges: &[T], p: &Profile1D<T>) -> (Vec<T>, T) {
    let masses = edges.windows(2).map(|w| p.interval_mass(w[0], w[1])).collect();
    let lo = p.interval_mass(T::neg_infinity(), edges[0]);
    let hi = p.interval_mass(edges[edges.len() - 1], T::infinity());
    (masses, lo + hi)
}

/// Tile masses of a correlated Gaussian: `∫ N(r) [Φ(s_hi | r) − Φ(s_lo | r)] dr`.
fn gaussian_dense<T: Real>(g: &Gaussian2<T>, er: &[T], es: &[T], quad: &Quadrature) -> Result<Vec<T>> {
    let (mr, ms) = (g.mean[0], g.mean[1]);
    let (vr, vs, c) = (g.cov.xx, g.cov.yy, g.cov.xy);
    let ny = es.len() - 1;
    if c == T::zero() {
        let (rows, _) = normal_masses(er, mr, vr);
        let (cols, _) = normal_masses(es, ms, vs);
        return Ok(rows.iter().flat_map(|&r| cols.iter().map(move |&k| r * k)).collect());
    }
    let slope = c / vr;
    let cond_var = vs - c * slope;
    let quad = Quadrature {
        abs_tol: 1e-16,
        ..*quad
    };
    let rows: Vec<Vec<T>> = er
        .par_windows(2)
        .map(|w| {
            (0..ny)
                .map(|k| {
                    let (lo, hi) = (es[k], es[k + 1]);
                    let integrand = |r: T| {
                        let d = r - mr;
                        let dens = (-d * d / (T::two() * vr)).exp() / (T::TAU() * vr).sqrt();
                        let m = ms + slope * d;
                        dens * normal_interval_mass(lo - m, hi - m, cond_var)
                    };
                    quad.integrate1d(integrand, w[0], w[1], 2).map(|e| e.value)
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn quadrature_dense<T: Real>(q: &QDistribution<T>, er: &[T], es: &[T], quad: &Quadrature) -> Result<Vec<T>> {
    let ny = es.len() - 1;
    let quad = Quadrature {
        abs_tol: 1e-16,
        ..*quad
    };
    let rows: Vec<Vec<T>> = er
        .par_windows(2)
        .map(|w| {
            let (r0, r1) = (w[0], w[1]);
            (0..ny)
                .map(|k| {
                    let (s0, s1) = (es[k], es[k + 1]);
                    // map the tile onto a square of side δs
                    let ratio = (r1 - r0) / (s1 - s0);
                    let cr = (r0 + r1) * T::half();
                    let sq = Square {
                        cx: T::zero(),
                        cy: (s0 + s1) * T::half(),
                        half_width: (s1 - s0) * T::half(),
                        initial_panels: 1,
                    };
                    quad.integrate2d(|u, s| q.density(cr + ratio * u, s), sq)
                        .map(|e| (e.value * ratio).max(T::zero()))
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Piecewise-constant density `Q^{jk}/Δ` on tile `(j, k)`, zero outside.
pub fn discretized_density<T: Real>(grid: &TileGrid<T>) -> QDistribution<T> {
    let area = grid.area_element();
    QDistribution::Grid(GridDensity {
        origin: [
            (T::lit(grid.j_min as f64) - T::half()) * grid.delta_r,
            (T::lit(grid.k_min as f64) - T::half()) * grid.delta_s,
        ],
        spacing: [grid.delta_r, grid.delta_s],
        nx: grid.nx(),
        ny: grid.ny(),
        values: grid.probs().into_iter().map(|p| p / area).collect(),
        interpolation: Interpolation::PiecewiseConstant,
    })
}

/// `𝒲^Δ_f = Σ Δ f(Q^{jk}/Δ) − ∫ f(Q̄') dr ds/(2π)`.
pub fn discretized_witness<T: Real>(
    grid: &TileGrid<T>,
    f: &ConcaveFunction<T>,
    frame: &NonLocalFrame<T>,
    quad: &Quadrature,
) -> Result<WitnessReport<T>> {
    let area = grid.area_element();
    let sup = grid.max_prob() / area;
    let sup = sup.max(T::one() / frame.normalization());
    if sup > f.t_max() {
        return Err(Error::Domain {
            function: f.label(),
            sup: sup.as_f64(),
            t_max: f.t_max().as_f64(),
        });
    }
    let value = grid.sum_f(|t| f.eval(t)) - f.reference_integral(frame.normalization(), quad)?;
    Ok(
        WitnessReport::new(CriterionId::DiscretizedGeneral, *frame, value, T::lit(SUM_ERROR))
            .with_param("f", f.label())
            .with_param("delta_r", grid.delta_r)
            .with_param("delta_s", grid.delta_s),
    )
}

/// Rényi–Wehrl entropy of the piecewise-constant density.
pub fn discrete_renyi_entropy<T: Real>(grid: &TileGrid<T>, beta: T) -> Result<T> {
    check_beta(beta)?;
    Ok(if beta == T::one() {
        grid.wehrl_sum()
    } else {
        grid.power_sum(beta).ln() / (T::one() - beta)
    })
}

/// Rényi–Wehrl witness of the piecewise-constant density.
pub fn discrete_renyi_wehrl_witness<T: Real>(
    grid: &TileGrid<T>,
    beta: T,
    frame: &NonLocalFrame<T>,
) -> Result<WitnessReport<T>> {
    let s = discrete_renyi_entropy(grid, beta)?;
    let offset = if beta == T::one() {
        T::one()
    } else {
        beta.ln() / (beta - T::one())
    };
    let value = s - offset - frame.normalization().ln();
    Ok(
        WitnessReport::new(CriterionId::DiscretizedRenyiWehrl, *frame, value, T::lit(SUM_ERROR))
            .with_param("beta", beta)
            .with_param("delta_r", grid.delta_r)
            .with_param("delta_s", grid.delta_s),
    )
}

/// Mean and covariance of the piecewise-constant density (uniform within
/// each tile, hence the `δ²/12` terms).
pub fn discrete_covariance<T: Real>(grid: &TileGrid<T>) -> crate::distribution::CovarianceSummary<T> {
    let (mut m0, mut mr, mut ms) = (T::zero(), T::zero(), T::zero());
    for j in grid.j_min..=grid.j_max {
        for k in grid.k_min..=grid.k_max {
            let p = grid.prob(j, k);
            m0 = m0 + p;
            mr = mr + p * grid.centre_r(j);
            ms = ms + p * grid.centre_s(k);
        }
    }
    let (mr, ms) = (mr / m0, ms / m0);
    let (mut vrr, mut vss, mut vrs) = (T::zero(), T::zero(), T::zero());
    for j in grid.j_min..=grid.j_max {
        let dr = grid.centre_r(j) - mr;
        for k in grid.k_min..=grid.k_max {
            let p = grid.prob(j, k);
            let ds = grid.centre_s(k) - ms;
            vrr = vrr + p * dr * dr;
            vss = vss + p * ds * ds;
            vrs = vrs + p * dr * ds;
        }
    }
    let twelfth = T::one() / T::lit(12.0);
    crate::distribution::CovarianceSummary::husimi(
        [mr, ms],
        crate::gaussian::Cov2::new(
            vrr / m0 + grid.delta_r * grid.delta_r * twelfth,
            vrs / m0,
            vss / m0 + grid.delta_s * grid.delta_s * twelfth,
        ),
    )
}

/// `det V^Δ − (a₁b₁ + a₂b₂)²` for the piecewise-constant density.
pub fn discrete_second_moment_witness<T: Real>(
    grid: &TileGrid<T>,
    frame: &NonLocalFrame<T>,
) -> Result<WitnessReport<T>> {
    let v = discrete_covariance(grid);
    let m = v.matrix();
    if !m.is_positive_definite() {
        return Err(Error::NotPositiveDefinite { det: m.det().as_f64() });
    }
    let value = m.det() - frame.vacuum_det();
    Ok(
        WitnessReport::new(CriterionId::DiscretizedSecondMoment, *frame, value, T::lit(SUM_ERROR))
            .with_param("delta_r", grid.delta_r)
            .with_param("delta_s", grid.delta_s),
    )
}

/// Criteria compared in the resolution sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCriterion {
    SecondMoment,
    Wehrl,
    /// Rényi–Wehrl minimized over the order grid.
    OptimalRenyi,
}

impl SweepCriterion {
    pub const ALL: [SweepCriterion; 3] = [
        SweepCriterion::SecondMoment,
        SweepCriterion::Wehrl,
        SweepCriterion::OptimalRenyi,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SweepCriterion::SecondMoment => "second-moment",
            SweepCriterion::Wehrl => "wehrl",
            SweepCriterion::OptimalRenyi => "optimal-renyi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepRow<T: Real> {
    pub lambda: T,
    pub delta: T,
    pub criterion: SweepCriterion,
    pub beta_opt: Option<T>,
    pub value: T,
    pub verdict: Verdict,
}

/// Evaluates one criterion on the TMSV marginal with square tiles of side
/// `delta`.
pub fn evaluate_discretized<T: Real>(
    lambda: T,
    delta: T,
    criterion: SweepCriterion,
    beta_grid: &[T],
    quad: &Quadrature,
) -> Result<SweepRow<T>> {
    let frame = NonLocalFrame::unit(Branch::Plus);
    let q = tmsv_mixture_q(&TmsvMixtureParams::tmsv(lambda), &frame)?;
    let power = match criterion {
        SweepCriterion::SecondMoment => T::half(),
        SweepCriterion::Wehrl => T::lit(0.9),
        SweepCriterion::OptimalRenyi => beta_grid.iter().copied().fold(T::one(), T::min),
    };
    let grid = tile_probabilities(&q, delta, delta, Extent::Auto { power }, quad)?;
    let (report, beta_opt) = match criterion {
        SweepCriterion::SecondMoment => (discrete_second_moment_witness(&grid, &frame)?, None),
        SweepCriterion::Wehrl => (discrete_renyi_wehrl_witness(&grid, T::one(), &frame)?, None),
        SweepCriterion::OptimalRenyi => {
            let opt =
                crate::criteria::optimize_parameter(beta_grid, |b| discrete_renyi_wehrl_witness(&grid, b, &frame))?;
            (opt.report, Some(opt.param))
        }
    };
    Ok(SweepRow {
        lambda,
        delta,
        criterion,
        beta_opt,
        value: report.value,
        verdict: report.verdict,
    })
}

/// Every `(λ, δ, criterion)` combination, in that nesting order.
pub fn resolution_sweep<T: Real>(
    lambdas: &[T],
    deltas: &[T],
    criteria: &[SweepCriterion],
    beta_grid: &[T],
    quad: &Quadrature,
) -> Result<Vec<SweepRow<T>>> {
    if lambdas.is_empty() || deltas.is_empty() || criteria.is_empty() || beta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut points = Vec::with_capacity(lambdas.len() * deltas.len() * criteria.len());
    for &l in lambdas {
        for &d in deltas {
            for &c in criteria {
                points.push((l, d, c));
            }
        }
    }
    points
        .par_iter()
        .map(|&(l, d, c)| evaluate_discretized(l, d, c, beta_grid, quad))
        .collect()
}

/// Largest tile size up to which a criterion keeps witnessing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", rename_all = "kebab-case")]
pub enum Threshold<T: Real> {
    /// Not witnessed even at the smallest scanned `δ`.
    Never,
    /// Witnessed up to `δ*` (bisected between scan points).
    At(T),
    /// Witnessed at every scanned `δ`.
    Beyond(T),
}

impl<T: Real> Threshold<T> {
    /// `δ*` as a number: zero for `Never`, the scan maximum for `Beyond`.
    pub fn value(&self) -> T {
        match *self {
            Threshold::Never => T::zero(),
            Threshold::At(d) | Threshold::Beyond(d) => d,
        }
    }
}

/// Locates `δ*`: the first scan point (ascending) that is not witnessed,
/// refined by bisection on the verdict down to `resolution`.
pub fn delta_threshold<T: Real>(
    lambda: T,
    criterion: SweepCriterion,
    scan: &[T],
    beta_grid: &[T],
    resolution: T,
    quad: &Quadrature,
) -> Result<Threshold<T>> {
    if scan.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let witnessed = |d: T| -> Result<bool> {
        Ok(evaluate_discretized(lambda, d, criterion, beta_grid, quad)?
            .verdict
            .is_witnessed())
    };
    let mut sorted = scan.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scan points"));
    let flags: Vec<bool> = sorted.par_iter().map(|&d| witnessed(d)).collect::<Result<_>>()?;
    let Some(first_fail) = flags.iter().position(|w| !w) else {
        return Ok(Threshold::Beyond(*sorted.last().unwrap()));
    };
    if first_fail == 0 {
        return Ok(Threshold::Never);
    }
    let (mut lo, mut hi) = (sorted[first_fail - 1], sorted[first_fail]);
    while hi - lo > resolution {
        let mid = (lo + hi) * T::half();
        if witnessed(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold::At(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::vacuum_reference;
    use crate::gaussian::Cov2;

    #[test]
    fn single_tile_holds_everything() {
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let vac = vacuum_reference(&frame);
        let extent = Extent::Indices {
            j_min: 0,
            j_max: 0,
            k_min: 0,
            k_max: 0,
        };
        let g = tile_probabilities(&vac, 24.0, 24.0, extent, &Quadrature::default()).unwrap();
        assert!((g.prob(0, 0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn centre_tile_is_product_of_interval_masses() {
        let frame = NonLocalFrame::<f64>::unit(Branch::Plus);
        let vac = vacuum_reference(&frame);
        let g = tile_probabilities(&vac, 1.0, 1.0, Extent::Auto { power: 1.0 }, &Quadrature::default()).unwrap();
        let m = statrs::function::erf::erf(0.5 / 2.0);
        assert!((g.prob(0, 0) - m * m).abs() < 1e-15);
        assert!((g.total() + g.tail_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlated_gaussian_tiles_sum_to_one() {
        let q = QDistribution::<f64>::gaussian([0.3, -0.2], Cov2::new(1.5, 0.6, 1.1)).unwrap();
        let g = tile_probabilities(&q, 0.7, 0.7, Extent::Auto { power: 1.0 }, &Quadrature::default()).unwrap();
        assert!(!g.is_separable());
        assert!((g.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_small_extent_is_rejected() {
        let q = QDistribution::<f64>::gaussian([0.0, 0.0], Cov2::isotropic(2.0)).unwrap();
        let err = tile_probabilities(&q, 1.0, 1.0, Extent::Radius(2.0), &Quadrature::default()).unwrap_err();
        assert!(matches!(err, Error::TailMass { .. }));
    }

    #[test]
    fn density_value_inside_tile() {
        let q = QDistribution::<f64>::gaussian([0.0, 0.0], Cov2::isotropic(2.0)).unwrap();
        let g = tile_probabilities(&q, 0.5, 0.5, Extent::Auto { power: 1.0 }, &Quadrature::default()).unwrap();
        let d = discretized_density(&g);
        let area = g.area_element();
        assert!((d.density(1.1, -0.4) - g.prob(2, -1) / area).abs() < 1e-15);
        assert_eq!(d.density(100.0, 0.0), 0.0);
    }
}
