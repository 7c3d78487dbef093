use serde::{Deserialize, Serialize};

use crate::error::{Result, ScbError};

/// Uniform evaluation grid.
///
/// Points are `origin + span·(i / denom)` for integer `i`, so a refined grid
/// reproduces every coarse point bit for bit and extended grids share their
/// interior points with the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationGrid {
    lower: f64,
    upper: f64,
    points: Vec<f64>,
    // Construction parameters, kept so derived grids stay nested.
    origin: f64,
    span: f64,
    end: f64,
    denom: usize,
    offset: i64,
}

impl EvaluationGrid {
    /// `m ≥ 2` uniform points from `l` to `u` inclusive.
    pub fn new(l: f64, u: f64, m: usize) -> Result<Self> {
        if !(l.is_finite() && u.is_finite() && l < u) {
            return Err(ScbError::DomainError(format!("grid needs l < u, got [{l}, {u}]")));
        }
        if m < 2 {
            return Err(ScbError::DomainError(format!("grid needs at least 2 points, got {m}")));
        }
        Ok(Self::build(l, u - l, u, m - 1, 0, m))
    }

    /// Default resolution for bandwidth `b`: `max(201, ⌈10(u−l)/b⌉)` points.
    pub fn for_bandwidth(l: f64, u: f64, b: f64) -> Result<Self> {
        Self::new(l, u, default_points(l, u, b))
    }

    fn build(origin: f64, span: f64, end: f64, denom: usize, offset: i64, m: usize) -> Self {
        let points: Vec<f64> = (0..m as i64)
            .map(|i| {
                let k = i + offset;
                if k == denom as i64 {
                    end
                } else {
                    origin + span * (k as f64 / denom as f64)
                }
            })
            .collect();
        EvaluationGrid {
            lower: points[0],
            upper: points[m - 1],
            points,
            origin,
            span,
            end,
            denom,
            offset,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.span / self.denom as f64
    }

    /// Grid with `factor − 1` extra points between neighbors; contains every
    /// point of `self` exactly.
    pub fn refine(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let m = (self.len() - 1) * factor + 1;
        Self::build(self.origin, self.span, self.end, self.denom * factor, self.offset * factor as i64, m)
    }

    /// Grid with `k` extra points beyond each end at the same spacing.
    pub fn extend(&self, k: usize) -> Self {
        Self::build(self.origin, self.span, self.end, self.denom, self.offset - k as i64, self.len() + 2 * k)
    }

    /// Contiguous sub-grid `points[start..start+len]`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if len < 2 || start + len > self.len() {
            return Err(ScbError::DomainError("grid slice out of range".into()));
        }
        Ok(Self::build(self.origin, self.span, self.end, self.denom, self.offset + start as i64, len))
    }

    /// Indices `i` with `lo ≤ points[i] ≤ hi`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        if hi < lo || hi < self.lower || lo > self.upper {
            return 0..0;
        }
        let h = self.spacing();
        let m = self.len();
        let mut start = (((lo - self.lower) / h).ceil().max(0.0) as usize).min(m);
        while start > 0 && self.points[start - 1] >= lo {
            start -= 1;
        }
        while start < m && self.points[start] < lo {
            start += 1;
        }
        let mut end = ((((hi - self.lower) / h).floor().max(-1.0) + 1.0) as usize).min(m);
        while end < m && self.points[end] <= hi {
            end += 1;
        }
        while end > start && self.points[end - 1] > hi {
            end -= 1;
        }
        start..end.max(start)
    }

    /// Linear interpolation of `values` (one per grid point) at `x`; `None`
    /// outside the grid or when a bracketing value is not finite.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Option<f64> {
        if !(x >= self.lower && x <= self.upper) {
            return None;
        }
        let m = self.len();
        let h = self.spacing();
        let mut i = (((x - self.lower) / h).floor().max(0.0) as usize).min(m - 2);
        while i > 0 && self.points[i] > x {
            i -= 1;
        }
        while i + 2 < m && self.points[i + 1] < x {
            i += 1;
        }
        let (x0, x1) = (self.points[i], self.points[i + 1]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let v = values[i] * (1.0 - t) + values[i + 1] * t;
        v.is_finite().then_some(v)
    }

    pub fn same_as(&self, other: &EvaluationGrid) -> bool {
        self.points == other.points
    }
}

/// `max(201, ⌈10(u−l)/b⌉)`.
pub fn default_points(l: f64, u: f64, b: f64) -> usize {
    let fine = (10.0 * (u - l) / b).ceil();
    if fine.is_finite() && fine > 201.0 {
        fine as usize
    } else {
        201
    }
}
