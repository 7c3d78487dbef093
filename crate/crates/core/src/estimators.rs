//! Kernel curve estimators evaluated on an [`EvaluationGrid`].
//!
//! Per-point failures (an empty kernel window, a rank-deficient local fit) do
//! not abort an estimate: the value is set to `NaN` and the index is recorded
//! in [`CurveEstimate::failed`]. Band construction later insists that no
//! failure falls inside the band interval.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScbError};
use crate::grid::EvaluationGrid;
use crate::kernel::KernelProfile;

/// What a curve estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Density,
    /// Density estimate at the variance bandwidth `h`.
    DensityH,
    Regression,
    Variance,
    Derivative1,
    Derivative2,
    /// A second-order bias term `b²ψ_K ρ(x)`.
    Bias,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEstimate {
    pub grid: EvaluationGrid,
    pub values: Vec<f64>,
    pub kind: CurveKind,
    pub bandwidth: f64,
    pub n: usize,
    /// Grid indices where the estimate is undefined.
    #[serde(default)]
    pub failed: Vec<usize>,
    /// Number of values clipped at zero.
    #[serde(default)]
    pub clipped: usize,
}

impl CurveEstimate {
    pub fn new(grid: EvaluationGrid, values: Vec<f64>, kind: CurveKind, bandwidth: f64, n: usize) -> Self {
        CurveEstimate {
            grid,
            values,
            kind,
            bandwidth,
            n,
            failed: Vec::new(),
            clipped: 0,
        }
    }

    /// Curve taking the value `c` everywhere.
    pub fn constant(grid: &EvaluationGrid, c: f64, kind: CurveKind) -> Self {
        Self::new(grid.clone(), vec![c; grid.len()], kind, f64::NAN, 0)
    }

    /// Curve `x ↦ f(x)` sampled on the grid.
    pub fn from_fn(grid: &EvaluationGrid, kind: CurveKind, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid.clone(), values, kind, f64::NAN, 0)
    }

    pub fn at(&self, x: f64) -> Option<f64> {
        self.grid.interpolate(&self.values, x)
    }

    /// Failures whose grid point lies in `[lo, hi]`.
    pub fn failures_within(&self, lo: f64, hi: f64) -> Vec<usize> {
        let pts = self.grid.points();
        self.failed.iter().copied().filter(|&i| pts[i] >= lo && pts[i] <= hi).collect()
    }

    /// The restriction of this curve to a contiguous sub-grid.
    pub fn restrict(&self, start: usize, len: usize) -> Result<Self> {
        let grid = self.grid.slice(start, len)?;
        Ok(CurveEstimate {
            grid,
            values: self.values[start..start + len].to_vec(),
            kind: self.kind,
            bandwidth: self.bandwidth,
            n: self.n,
            failed: self
                .failed
                .iter()
                .filter(|&&i| i >= start && i < start + len)
                .map(|i| i - start)
                .collect(),
            clipped: self.clipped,
        })
    }
}

/// Weighted supremum deviation between two curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupStatistic {
    pub value: f64,
    pub argmax: f64,
    pub grid: EvaluationGrid,
}

/// Weight for [`sup_weighted_deviation`].
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Constant(f64),
    Curve(&'a [f64]),
}

impl Weight<'_> {
    fn at(&self, i: usize) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Curve(v) => v[i],
        }
    }
}

fn check_bandwidth(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        Err(ScbError::DomainError(format!("bandwidth must be positive, got {b}")))
    }
}

/// Call `visit(grid_index, data_index, u)` for every pair with
/// `u = (x_k − t_j)/b` inside the kernel support. Data are visited in order,
/// which fixes the summation order at each grid point.
#[inline]
pub(crate) fn scatter(
    grid: &EvaluationGrid,
    x: &[f64],
    b: f64,
    support: f64,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let reach = support * b;
    let pts = grid.points();
    for (k, &xk) in x.iter().enumerate() {
        for j in grid.index_range(xk - reach, xk + reach) {
            visit(j, k, (xk - pts[j]) / b);
        }
    }
}

/// Kernel density estimate `f_n(x) = (nb)⁻¹ Σ K((X_k − x)/b)`.
pub fn kde(data: &[f64], b: f64, grid: &EvaluationGrid, kernel: &KernelProfile) -> Result<CurveEstimate> {
    if data.is_empty() {
        return Err(ScbError::EmptyData);
    }
    check_bandwidth(b)?;
    let mut sums = vec![0.0; grid.len()];
    scatter(grid, data, b, kernel.support(), |j, _, u| sums[j] += kernel.eval(u));
    let norm = 1.0 / (data.len() as f64 * b);
    let values = sums.into_iter().map(|s| s * norm).collect();
    Ok(CurveEstimate::new(grid.clone(), values, CurveKind::Density, b, data.len()))
}

/// Derivative of the kernel density estimate,
/// `f_n'(x) = −(nb²)⁻¹ Σ K'((X_k − x)/b)`.
pub fn kde_derivative(data: &[f64], b: f64, grid: &EvaluationGrid, kernel: &KernelProfile) -> Result<CurveEstimate> {
    if data.is_empty() {
        return Err(ScbError::EmptyData);
    }
    check_bandwidth(b)?;
    let mut sums = vec![0.0; grid.len()];
    scatter(grid, data, b, kernel.support(), |j, _, u| sums[j] += kernel.derivative(u));
    let norm = -1.0 / (data.len() as f64 * b * b);
    let values = sums.into_iter().map(|s| s * norm).collect();
    Ok(CurveEstimate::new(grid.clone(), values, CurveKind::Derivative1, b, data.len()))
}

fn check_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(ScbError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(ScbError::DomainError(format!(
            "x and y lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Nadaraya–Watson estimate `Σ K((X_k−t)/b) Y_k / Σ K((X_k−t)/b)`.
pub fn nadaraya_watson(
    x: &[f64],
    y: &[f64],
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
) -> Result<CurveEstimate> {
    check_pairs(x, y)?;
    check_bandwidth(b)?;
    let m = grid.len();
    let mut den = vec![0.0; m];
    let mut num = vec![0.0; m];
    scatter(grid, x, b, kernel.support(), |j, k, u| {
        let w = kernel.eval(u);
        den[j] += w;
        num[j] += w * y[k];
    });
    let mut failed = Vec::new();
    let values = (0..m)
        .map(|j| {
            if den[j] > 0.0 {
                num[j] / den[j]
            } else {
                failed.push(j);
                f64::NAN
            }
        })
        .collect();
    let mut curve = CurveEstimate::new(grid.clone(), values, CurveKind::Regression, b, x.len());
    curve.failed = failed;
    Ok(curve)
}

/// Solve a small dense system with partial pivoting; `None` if numerically
/// singular relative to the largest entry.
fn solve_small(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut sol = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in row + 1..n {
            s -= a[row][c] * sol[c];
        }
        sol[row] = s / a[row][row];
    }
    Some(sol)
}

/// Local polynomial regression of the given degree; returns the
/// `deriv_order`-th derivative estimate at each grid point.
pub fn local_poly_fit(
    x: &[f64],
    y: &[f64],
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    degree: usize,
    deriv_order: usize,
) -> Result<CurveEstimate> {
    check_pairs(x, y)?;
    check_bandwidth(b)?;
    if deriv_order > degree {
        return Err(ScbError::DomainError(format!(
            "derivative order {deriv_order} exceeds polynomial degree {degree}"
        )));
    }
    if x.len() <= degree + 1 {
        return Err(ScbError::DomainError(format!(
            "local fit of degree {degree} needs more than {} points, got {}",
            degree + 1,
            x.len()
        )));
    }
    let p = degree + 1;
    let m = grid.len();
    // Moments in the scaled variable u = (X − t)/b keep the normal equations well conditioned.
    let mut moments = vec![0.0; m * (2 * p - 1)];
    let mut cross = vec![0.0; m * p];
    let mut count = vec![0usize; m];
    scatter(grid, x, b, kernel.support(), |j, k, u| {
        let w = kernel.eval(u);
        if w <= 0.0 {
            return;
        }
        count[j] += 1;
        let mut pow = w;
        let mrow = &mut moments[j * (2 * p - 1)..(j + 1) * (2 * p - 1)];
        for (i, slot) in mrow.iter_mut().enumerate() {
            *slot += pow;
            if i < p {
                cross[j * p + i] += pow * y[k];
            }
            pow *= u;
        }
    });
    let factorial: f64 = (1..=deriv_order).map(|i| i as f64).product();
    let scale = factorial / b.powi(deriv_order as i32);
    let mut failed = Vec::new();
    let values = (0..m)
        .map(|j| {
            if count[j] < p {
                failed.push(j);
                return f64::NAN;
            }
            let mrow = &moments[j * (2 * p - 1)..(j + 1) * (2 * p - 1)];
            let a = (0..p).map(|r| (0..p).map(|c| mrow[r + c]).collect()).collect();
            match solve_small(a, cross[j * p..(j + 1) * p].to_vec()) {
                Some(coef) => coef[deriv_order] * scale,
                None => {
                    failed.push(j);
                    f64::NAN
                }
            }
        })
        .collect();
    let kind = match deriv_order {
        0 => CurveKind::Regression,
        1 => CurveKind::Derivative1,
        _ => CurveKind::Derivative2,
    };
    let mut curve = CurveEstimate::new(grid.clone(), values, kind, b, x.len());
    curve.failed = failed;
    Ok(curve)
}

/// Residuals `Y_k − μ̃(X_k)` with `μ̃` linearly interpolated from a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// Regressor of each retained pair.
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Index of each retained pair in the input.
    pub index: Vec<usize>,
    /// Pairs dropped because `X_k` fell outside the curve (or on an undefined value).
    pub dropped: usize,
}

impl Residuals {
    pub fn squared(&self) -> Vec<f64> {
        self.values.iter().map(|e| e * e).collect()
    }
}

pub fn residuals(x: &[f64], y: &[f64], mu_curve: &CurveEstimate) -> Result<Residuals> {
    check_pairs(x, y)?;
    let mut out = Residuals {
        x: Vec::with_capacity(x.len()),
        values: Vec::with_capacity(x.len()),
        index: Vec::with_capacity(x.len()),
        dropped: 0,
    };
    for (k, (&xk, &yk)) in x.iter().zip(y).enumerate() {
        match mu_curve.at(xk) {
            Some(m) => {
                out.x.push(xk);
                out.values.push(yk - m);
                out.index.push(k);
            }
            None => out.dropped += 1,
        }
    }
    Ok(out)
}

/// Nadaraya–Watson regression of squared residuals on `X`, clipped at zero.
pub fn variance_estimate(
    x: &[f64],
    squared_residuals: &[f64],
    h: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
) -> Result<CurveEstimate> {
    let mut curve = nadaraya_watson(x, squared_residuals, h, grid, kernel)?;
    curve.kind = CurveKind::Variance;
    for v in curve.values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            curve.clipped += 1;
        }
    }
    Ok(curve)
}

/// Density floor `0.01/(u − l)` used by every ratio involving `f`.
pub fn density_floor(l: f64, u: f64) -> f64 {
    0.01 / (u - l)
}

fn bias_term(
    d1: &CurveEstimate,
    d2: &CurveEstimate,
    f: &CurveEstimate,
    f1: &CurveEstimate,
    bandwidth: f64,
    psi_k: f64,
    f_min: f64,
) -> Result<CurveEstimate> {
    let grid = &f.grid;
    if ![d1, d2, f1].iter().all(|c| c.grid.same_as(grid)) {
        return Err(ScbError::GridMismatch);
    }
    let pts = grid.points();
    let factor = bandwidth * bandwidth * psi_k;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let fx = f.values[i];
        if !(fx >= f_min) {
            return Err(ScbError::DensityTooSmall {
                x: pts[i],
                value: fx,
                floor: f_min,
            });
        }
        values.push(factor * (d2.values[i] + 2.0 * d1.values[i] * f1.values[i] / fx));
    }
    let mut curve = CurveEstimate::new(grid.clone(), values, CurveKind::Bias, bandwidth, f.n);
    let mut failed: Vec<usize> = [d1, d2, f1].iter().flat_map(|c| c.failed.iter().copied()).collect();
    failed.sort_unstable();
    failed.dedup();
    curve.failed = failed;
    Ok(curve)
}

/// Drift bias `b²ψ_K (μ'' + 2μ'f'/f)`. The density floor is `0.01/(u−l)` for
/// the curve's grid.
pub fn bias_correction_mu(
    mu1: &CurveEstimate,
    mu2: &CurveEstimate,
    f: &CurveEstimate,
    f1: &CurveEstimate,
    b: f64,
    psi_k: f64,
) -> Result<CurveEstimate> {
    let floor = density_floor(f.grid.lower(), f.grid.upper());
    bias_term(mu1, mu2, f, f1, b, psi_k, floor)
}

/// Volatility bias `h²ψ_K ((σ²)'' + 2(σ²)'f'/f)`.
pub fn bias_correction_sigma(
    sigma2_d1: &CurveEstimate,
    sigma2_d2: &CurveEstimate,
    f_d1: &CurveEstimate,
    f: &CurveEstimate,
    h: f64,
    psi_k: f64,
) -> Result<CurveEstimate> {
    let floor = density_floor(f.grid.lower(), f.grid.upper());
    bias_term(sigma2_d1, sigma2_d2, f, f_d1, h, psi_k, floor)
}

/// Bias term with an explicit floor (used on working grids wider than the band interval).
pub(crate) fn bias_with_floor(
    d1: &CurveEstimate,
    d2: &CurveEstimate,
    f: &CurveEstimate,
    f1: &CurveEstimate,
    bandwidth: f64,
    psi_k: f64,
    f_min: f64,
) -> Result<CurveEstimate> {
    bias_term(d1, d2, f, f1, bandwidth, psi_k, f_min)
}

/// `max_x w(x)|A(x) − B(x)|` over the shared grid. Undefined values are skipped.
pub fn sup_weighted_deviation(a: &CurveEstimate, b: &CurveEstimate, weight: Weight<'_>) -> Result<SupStatistic> {
    if !a.grid.same_as(&b.grid) {
        return Err(ScbError::GridMismatch);
    }
    if let Weight::Curve(w) = weight {
        if w.len() != a.grid.len() {
            return Err(ScbError::GridMismatch);
        }
    }
    Ok(sup_of(&a.grid, |i| weight.at(i) * (a.values[i] - b.values[i]).abs()))
}

pub(crate) fn sup_of(grid: &EvaluationGrid, f: impl Fn(usize) -> f64) -> SupStatistic {
    let pts = grid.points();
    let mut best = 0.0;
    let mut arg = pts[0];
    for (i, &x) in pts.iter().enumerate() {
        let v = f(i);
        if v > best {
            best = v;
            arg = x;
        }
    }
    SupStatistic {
        value: best,
        argmax: arg,
        grid: grid.clone(),
    }
}
