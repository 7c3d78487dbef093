//! Simulation calibration of band cutoffs through the statistic
//! `Π_n = sup_x |Σ_k K((X*_k − x)/b) η*_k| / (n b f^{1/2}(x))`.
//!
//! Replicate `r` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `r`,
//! so results do not depend on thread scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScbError};
use crate::estimators::CurveEstimate;
use crate::grid::EvaluationGrid;
use crate::kernel::KernelProfile;

/// Minimum number of replicates accepted by [`simulate_pi_n`].
pub const MIN_REPS: usize = 100;

/// A univariate sampler usable from worker threads.
pub trait Draw: Sync {
    fn draw(&self, rng: &mut dyn RngCore) -> f64;

    /// Short identifier recorded in calibration summaries.
    fn id(&self) -> String;
}

/// Multiplier law for `η*`: mean 0, variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplier {
    #[default]
    Normal,
    Rademacher,
}

impl std::str::FromStr for Multiplier {
    type Err = ScbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Multiplier::Normal),
            "rademacher" => Ok(Multiplier::Rademacher),
            other => Err(ScbError::Config(format!("unknown multiplier `{other}` (normal, rademacher)"))),
        }
    }
}

impl Draw for Multiplier {
    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Multiplier::Normal => StandardNormal.sample(rng),
            Multiplier::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn id(&self) -> String {
        match self {
            Multiplier::Normal => "normal".into(),
            Multiplier::Rademacher => "rademacher".into(),
        }
    }
}

/// Draws `X_J + b V` with `J` uniform over the data and `V ~ K`; the law of
/// a draw has the kernel density estimate as its density.
#[derive(Debug, Clone)]
pub struct SmoothedBootstrap {
    data: Vec<f64>,
    b: f64,
    kernel: KernelProfile,
}

impl SmoothedBootstrap {
    pub fn new(data: &[f64], b: f64, kernel: &KernelProfile) -> Result<Self> {
        if data.is_empty() {
            return Err(ScbError::EmptyData);
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(ScbError::DomainError(format!("bootstrap bandwidth must be nonnegative, got {b}")));
        }
        Ok(SmoothedBootstrap {
            data: data.to_vec(),
            b,
            kernel: kernel.clone(),
        })
    }
}

impl Draw for SmoothedBootstrap {
    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        let j = rng.random_range(0..self.data.len());
        self.data[j] + self.b * self.kernel.sample(rng)
    }

    fn id(&self) -> String {
        format!("smoothed_bootstrap(n={}, b={}, kernel={})", self.data.len(), self.b, self.kernel.name())
    }
}

/// Settings echoed in a [`PiSample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiConfig {
    pub n: usize,
    pub b: f64,
    pub kernel: String,
    pub grid_lower: f64,
    pub grid_upper: f64,
    pub grid_points: usize,
    pub f_sampler: String,
    pub eta_sampler: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiSample {
    /// One `Π_n` per replicate, in replicate order.
    pub values: Vec<f64>,
    pub reps: usize,
    pub level: f64,
    pub cutoff: f64,
    pub seed: u64,
    pub config: PiConfig,
}

impl PiSample {
    /// Cutoff at another level, from the same replicates.
    pub fn cutoff_at(&self, level: f64) -> Result<f64> {
        quantile(&self.values, 1.0 - level)
    }
}

/// Order statistic at 1-based index `⌈len·level⌉` of the ascending sort.
pub fn quantile(values: &[f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(ScbError::EmptyData);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(ScbError::DomainError(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // The small offset keeps products like 100·0.95 from rounding up a rank.
    let rank = ((sorted.len() as f64 * level) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Weight `1/(n b f^{1/2}(x))` on the grid, after checking `f > 0`.
pub(crate) fn pi_weights(f_curve: &CurveEstimate, n: usize, b: f64) -> Result<Vec<f64>> {
    let scale = n as f64 * b;
    f_curve
        .values
        .iter()
        .zip(f_curve.grid.points())
        .map(|(&f, &x)| {
            if f > 0.0 && f.is_finite() {
                Ok(1.0 / (scale * f.sqrt()))
            } else {
                Err(ScbError::DensityTooSmall { x, value: f, floor: 0.0 })
            }
        })
        .collect()
}

/// One `Π_n` draw. `acc` is scratch space of grid length.
#[allow(clippy::too_many_arguments)]
fn pi_replicate(
    f_sampler: &dyn Draw,
    eta_sampler: &dyn Draw,
    n: usize,
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    weights: &[f64],
    rng: &mut ChaCha8Rng,
    acc: &mut [f64],
) -> f64 {
    acc.iter_mut().for_each(|a| *a = 0.0);
    let pts = grid.points();
    let reach = kernel.support() * b;
    for _ in 0..n {
        let x = f_sampler.draw(rng);
        let eta = eta_sampler.draw(rng);
        if eta == 0.0 {
            continue;
        }
        for j in grid.index_range(x - reach, x + reach) {
            acc[j] += kernel.eval((x - pts[j]) / b) * eta;
        }
    }
    acc.iter().zip(weights).map(|(a, w)| a.abs() * w).fold(0.0, f64::max)
}

/// Simulate `reps` replicates of `Π_n` and take the upper `(1 − α)` order
/// statistic as cutoff.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pi_n(
    f_sampler: &dyn Draw,
    eta_sampler: &dyn Draw,
    n: usize,
    b: f64,
    grid: &EvaluationGrid,
    kernel: &KernelProfile,
    f_curve: &CurveEstimate,
    reps: usize,
    alpha: f64,
    seed: u64,
) -> Result<PiSample> {
    if reps < MIN_REPS {
        return Err(ScbError::InvalidReps(reps));
    }
    if n == 0 {
        return Err(ScbError::EmptyData);
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(ScbError::DomainError(format!("bandwidth must be positive, got {b}")));
    }
    if !f_curve.grid.same_as(grid) {
        return Err(ScbError::GridMismatch);
    }
    let weights = pi_weights(f_curve, n, b)?;
    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.len()],
            |acc, r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                pi_replicate(f_sampler, eta_sampler, n, b, grid, kernel, &weights, &mut rng, acc)
            },
        )
        .collect();
    let cutoff = quantile(&values, 1.0 - alpha)?;
    Ok(PiSample {
        values,
        reps,
        level: alpha,
        cutoff,
        seed,
        config: PiConfig {
            n,
            b,
            kernel: kernel.name().to_string(),
            grid_lower: grid.lower(),
            grid_upper: grid.upper(),
            grid_points: grid.len(),
            f_sampler: f_sampler.id(),
            eta_sampler: eta_sampler.id(),
        },
    })
}
