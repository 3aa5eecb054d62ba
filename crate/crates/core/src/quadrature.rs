//! Adaptive tensor-product Gauss–Legendre quadrature.
//!
//! Every phase-space integral in the crate is taken against the measure
//! `dr ds / (2π)` on a truncated square; one-dimensional marginal integrals
//! use plain `dx`. Panels are refined where a panel and its four (two, in 1D)
//! children disagree, worst panel first, until the summed disagreement drops
//! below the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Axis-aligned integration square `[cx ± h] × [cy ± h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square<T> {
    pub cx: T,
    pub cy: T,
    pub half_width: T,
    /// Panels per side of the initial uniform partition.
    pub initial_panels: usize,
}

impl<T: Real> Square<T> {
    pub fn centered(half_width: T) -> Self {
        Self {
            cx: T::zero(),
            cy: T::zero(),
            half_width,
            initial_panels: 8,
        }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Estimate<T: Real> {
    pub value: T,
    pub error: T,
    /// False when the panel budget ran out before the target tolerance was
    /// met but the error was still below the acceptance bound.
    pub converged: bool,
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Gauss–Legendre points per panel edge.
    pub order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Results whose error estimate stays below this bound are returned
    /// (flagged unconverged) when the budget is exhausted; otherwise the call
    /// fails.
    pub accept_tol: f64,
    /// Maximum number of panel splits.
    pub max_splits: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            order: 12,
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            accept_tol: 1e-6,
            max_splits: 40_000,
        }
    }
}

struct Panel<T> {
    cx: T,
    cy: T,
    h: T,
    /// Estimate on this panel from its children.
    fine: T,
    /// Per-child coarse estimates, reused when the panel is split.
    children: [T; 4],
    error: T,
}

struct ByError<T>(Panel<T>);

impl<T: Real> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for ByError<T> {}
impl<T: Real> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.partial_cmp(&other.0.error).unwrap_or(Ordering::Equal)
    }
}

struct Rule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Self {
            nodes: x.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        }
    }

    /// Plain `∫∫ g dx dy` over `[cx ± h] × [cy ± h]`.
    fn square<F: Fn(T, T) -> T>(&self, g: &F, cx: T, cy: T, h: T) -> T {
        let mut total = T::zero();
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            let x = cx + h * *xi;
            let mut row = T::zero();
            for (yj, wj) in self.nodes.iter().zip(&self.weights) {
                row = row + *wj * g(x, cy + h * *yj);
            }
            total = total + *wi * row;
        }
        total * h * h
    }

    fn interval<F: Fn(T) -> T>(&self, g: &F, c: T, h: T) -> T {
        let mut total = T::zero();
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            total = total + *wi * g(c + h * *xi);
        }
        total * h
    }
}

impl Quadrature {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn target<T: Real>(&self, value: T) -> T {
        T::lit(self.abs_tol).max(T::lit(self.rel_tol) * value.abs())
    }

    fn finish<T: Real>(&self, value: T, error: T) -> Result<Estimate<T>> {
        if error <= self.target(value) {
            Ok(Estimate {
                value,
                error,
                converged: true,
            })
        } else if error.as_f64() <= self.accept_tol && value.is_finite() {
            Ok(Estimate {
                value,
                error,
                converged: false,
            })
        } else {
            Err(Error::Quadrature {
                estimate: value.as_f64(),
                error: error.as_f64(),
            })
        }
    }

    /// `∫∫ g(r, s) dr ds / (2π)` over `domain`.
    pub fn integrate2d<T: Real, F: Fn(T, T) -> T>(&self, g: F, domain: Square<T>) -> Result<Estimate<T>> {
        let rule = Rule::<T>::new(self.order);
        let m = domain.initial_panels.max(1);
        let h = domain.half_width / T::from_usize(m).unwrap();
        let x0 = domain.cx - domain.half_width;
        let y0 = domain.cy - domain.half_width;

        let make = |cx: T, cy: T, h: T, coarse: T| -> Panel<T> {
            let hh = h * T::half();
            let children = [
                rule.square(&g, cx - hh, cy - hh, hh),
                rule.square(&g, cx + hh, cy - hh, hh),
                rule.square(&g, cx - hh, cy + hh, hh),
                rule.square(&g, cx + hh, cy + hh, hh),
            ];
            let fine = children.iter().copied().sum::<T>();
            Panel {
                cx,
                cy,
                h,
                fine,
                children,
                error: (fine - coarse).abs(),
            }
        };

        let mut heap = BinaryHeap::with_capacity(m * m * 4);
        for i in 0..m {
            for j in 0..m {
                let cx = x0 + h * T::from_usize(2 * i + 1).unwrap();
                let cy = y0 + h * T::from_usize(2 * j + 1).unwrap();
                let coarse = rule.square(&g, cx, cy, h);
                heap.push(ByError(make(cx, cy, h, coarse)));
            }
        }
        let norm = T::one() / T::TAU();
        let (value, error) = refine(self, heap, |worst, heap| {
            let hh = worst.h * T::half();
            let offsets = [(-hh, -hh), (hh, -hh), (-hh, hh), (hh, hh)];
            let (mut v, mut e) = (T::zero(), T::zero());
            for (k, (dx, dy)) in offsets.into_iter().enumerate() {
                let child = make(worst.cx + dx, worst.cy + dy, hh, worst.children[k]);
                v = v + child.fine;
                e = e + child.error;
                heap.push(ByError(child));
            }
            (v, e)
        });
        self.finish(value * norm, error * norm)
    }

    /// `∫ g(x) dx` over `[lo, hi]`, split initially into `panels` pieces.
    pub fn integrate1d<T: Real, F: Fn(T) -> T>(&self, g: F, lo: T, hi: T, panels: usize) -> Result<Estimate<T>> {
        let rule = Rule::<T>::new(self.order.max(16));
        let m = panels.max(1);
        let h = (hi - lo) / T::from_usize(2 * m).unwrap();
        let make = |c: T, h: T, coarse: T| {
            let hh = h * T::half();
            let children = [rule.interval(&g, c - hh, hh), rule.interval(&g, c + hh, hh)];
            let fine = children[0] + children[1];
            Panel {
                cx: c,
                cy: T::zero(),
                h,
                fine,
                children: [children[0], children[1], T::zero(), T::zero()],
                error: (fine - coarse).abs(),
            }
        };
        let mut heap = BinaryHeap::with_capacity(4 * m);
        for i in 0..m {
            let c = lo + h * T::from_usize(2 * i + 1).unwrap();
            let coarse = rule.interval(&g, c, h);
            heap.push(ByError(make(c, h, coarse)));
        }
        let (value, error) = refine(self, heap, |worst, heap| {
            let hh = worst.h * T::half();
            let left = make(worst.cx - hh, hh, worst.children[0]);
            let right = make(worst.cx + hh, hh, worst.children[1]);
            let sums = (left.fine + right.fine, left.error + right.error);
            heap.push(ByError(left));
            heap.push(ByError(right));
            sums
        });
        self.finish(value, error)
    }
}

/// Splits the worst panel until the summed error meets the target or the
/// budget runs out. `split` pushes the children and returns their summed
/// `(value, error)`. The returned totals are exact sums in heap-array order,
/// a deterministic function of the inputs.
fn refine<T: Real>(
    quad: &Quadrature,
    mut heap: BinaryHeap<ByError<T>>,
    mut split: impl FnMut(Panel<T>, &mut BinaryHeap<ByError<T>>) -> (T, T),
) -> (T, T) {
    let sums = |heap: &BinaryHeap<ByError<T>>| {
        heap.iter()
            .fold((T::zero(), T::zero()), |(v, e), p| (v + p.0.fine, e + p.0.error))
    };
    let (mut value, mut error) = sums(&heap);
    let mut splits = 0usize;
    while error > quad.target(value) && splits < quad.max_splits {
        let worst = heap.pop().expect("non-empty panel set").0;
        value = value - worst.fine;
        error = error - worst.error;
        let (v, e) = split(worst, &mut heap);
        value = value + v;
        error = error + e;
        splits += 1;
        if splits.is_multiple_of(1024) {
            // resync running sums against drift
            (value, error) = sums(&heap);
        }
    }
    sums(&heap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        // degree 12 monomial: ∫_{-1}^{1} x^12 = 2/13
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_integrand() {
        let q = Quadrature::default();
        let e = q.integrate2d(|_: f64, _: f64| 0.0, Square::centered(5.0)).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.converged);
    }

    #[test]
    fn gaussian_weight_integrates_to_one() {
        let q = Quadrature::default();
        let e = q
            .integrate2d(|r: f64, s: f64| (-(r * r + s * s) / 2.0).exp(), Square::centered(12.0))
            .unwrap();
        assert!((e.value - 1.0).abs() < 1e-12, "{}", e.value);
    }

    #[test]
    fn second_moment_of_gaussian() {
        // r² · Q with Q = exp(-(r²+s²)/(2v))/v against dr ds/(2π) gives v.
        let v = 1.7;
        let q = Quadrature::default();
        let e = q
            .integrate2d(
                |r: f64, s: f64| r * r * (-(r * r + s * s) / (2.0 * v)).exp() / v,
                Square::centered(14.0),
            )
            .unwrap();
        assert!((e.value - v).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand_refines_locally() {
        // ∫_{-1}^{1} |x| dx = 1; the kink sits on a panel boundary only by accident.
        let q = Quadrature::default();
        let e = q.integrate1d(|x: f64| (x - 0.123).abs(), -1.0, 1.0, 3).unwrap();
        let exact = 0.5 * (1.123f64.powi(2) + 0.877f64.powi(2));
        assert!((e.value - exact).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let q = Quadrature {
            max_splits: 0,
            accept_tol: 0.0,
            ..Quadrature::default()
        };
        let err = q
            .integrate2d(
                |r: f64, s: f64| if r * r + s * s < 1.0 { 1.0 } else { 0.0 },
                Square::centered(2.0),
            )
            .unwrap_err();
        match err {
            Error::Quadrature { estimate, .. } => assert!((estimate - 0.5).abs() < 0.05),
            other => panic!("unexpected {other:?}"),
        }
    }
}
