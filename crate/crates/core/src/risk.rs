//! Monte Carlo estimation of pointwise squared-error risk, experiment
//! configuration, and log-log rate fitting.
//!
//! A sweep evaluates a grid over `n` and/or `epsilon`. Replications of a grid
//! point are embarrassingly parallel; the per-replication seeds come from
//! [`derive_seed`](crate::numeric::derive_seed) applied to
//! `(base_seed, grid_index, replication_index)`, so identical configurations
//! produce bit-identical CSV output regardless of thread count.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::{
    lower_bound_adversary, shift_adversary, apply_plan, ContaminationPlan, WassersteinBudget,
};
use crate::density::{Density, HolderClass};
use crate::error::{Error, Result};
use crate::estimator::{kde, BandwidthRule, Kernel};
use crate::numeric::{derive_seed, mean_std, pairwise_sum};

// ---------------------------------------------------------------------------
// Risk estimation
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of the pointwise squared-error risk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mse: f64,
    /// Standard error of the mean across replications.
    pub se: f64,
    pub replications: usize,
    pub n: usize,
    pub epsilon: f64,
}

/// Runs `replications` independent replications: each draws a clean sample,
/// applies the plan (if any), evaluates the KDE at `x0`, and accumulates
/// `(estimate - f(x0))^2` against the clean density `f`.
pub fn mc_risk(
    density: &Density,
    plan: Option<&ContaminationPlan>,
    kernel: &Kernel,
    rule: &BandwidthRule,
    x0: &[f64],
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if n == 0 || replications == 0 {
        return Err(Error::InvalidParameter(
            "need n >= 1 and replications >= 1".into(),
        ));
    }
    let h = rule.bandwidth(n);
    let target = density.pdf(x0);
    let errors: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let rep_seed = derive_seed(seed, &[j as u64]);
            let clean = density.sample(n, derive_seed(rep_seed, &[0]));
            let estimate = match plan {
                None => kde(&clean, x0, kernel, h)?,
                Some(plan) => {
                    let contaminated = apply_plan(plan, &clean, derive_seed(rep_seed, &[1]))?;
                    kde(&contaminated.dirty, x0, kernel, h)?
                }
            };
            let err = estimate - target;
            Ok(err * err)
        })
        .collect::<Result<Vec<_>>>()?;
    let mse = pairwise_sum(&errors) / replications as f64;
    let (_, sd) = mean_std(&errors);
    Ok(RiskEstimate {
        mse,
        se: sd / (replications as f64).sqrt(),
        replications,
        n,
        epsilon: plan.map_or(0.0, |p| p.budget.epsilon()),
    })
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityConfig {
    pub kind: String,
    pub sigma: f64,
    pub dim: usize,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassConfig {
    pub s: f64,
    #[serde(rename = "L")]
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContaminationConfig {
    /// `none`, `lower-bound`, or `shift`.
    pub kind: String,
    #[serde(default = "default_two")]
    pub q: f64,
    #[serde(default = "default_two")]
    pub r: f64,
    /// Shift adversaries: displacement direction (default first axis).
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Shift adversaries: localization width.
    #[serde(default = "default_one")]
    pub profile_width: f64,
}

fn default_two() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

impl Default for ContaminationConfig {
    fn default() -> Self {
        ContaminationConfig {
            kind: "none".into(),
            q: 2.0,
            r: 2.0,
            direction: None,
            profile_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kernel: String,
    /// `classical` or `robust`.
    pub bandwidth: String,
    #[serde(default = "default_one")]
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub x0: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    pub output: String,
}

/// Full experiment description, read from a TOML file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub density: DensityConfig,
    pub class: ClassConfig,
    #[serde(default)]
    pub contamination: ContaminationConfig,
    pub estimator: EstimatorConfig,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn contaminated(&self) -> bool {
        self.contamination.kind != "none"
    }

    pub fn validate(&self) -> Result<()> {
        if self.density.kind != "gaussian" {
            return Err(Error::Config(format!(
                "unknown density kind '{}' (registered: gaussian)",
                self.density.kind
            )));
        }
        if !(self.density.sigma > 0.0) {
            return Err(Error::Config("density sigma must be positive".into()));
        }
        if self.density.dim == 0 || self.density.dim > 3 {
            return Err(Error::Config("density dim must lie in 1..=3".into()));
        }
        if let Some(mean) = &self.density.mean {
            if mean.len() != self.density.dim {
                return Err(Error::Config("density mean length must equal dim".into()));
            }
        }
        HolderClass::new(self.class.s, self.class.constant, self.density.dim)
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.contamination.kind.as_str() {
            "none" | "lower-bound" | "shift" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown contamination kind '{other}' (registered: none, lower-bound, shift)"
                )))
            }
        }
        WassersteinBudget::new(self.contamination.q, self.contamination.r, 0.0)
            .map_err(|e| Error::Config(e.to_string()))?;
        Kernel::by_name(&self.estimator.kernel, self.density.dim)
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.estimator.bandwidth.as_str() {
            "classical" | "robust" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown bandwidth rule '{other}' (registered: classical, robust)"
                )))
            }
        }
        if !(self.estimator.c > 0.0) {
            return Err(Error::Config("bandwidth constant c must be positive".into()));
        }
        if self.sweep.x0.len() != self.density.dim {
            return Err(Error::Config("x0 length must equal the density dimension".into()));
        }
        if self.sweep.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.sweep.n.is_empty() {
            return Err(Error::Config("n grid must be nonempty".into()));
        }
        if self.sweep.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n grid must be strictly increasing".into()));
        }
        if self.sweep.n.iter().any(|&n| n == 0) {
            return Err(Error::Config("n grid entries must be >= 1".into()));
        }
        let eps = self.effective_epsilon_grid();
        if self.contaminated() {
            if eps.is_empty() {
                return Err(Error::Config(
                    "epsilon grid is empty (nonpositive entries are dropped; a contaminated \
                     sweep needs at least one epsilon in (0, 1])"
                        .into(),
                ));
            }
            if eps.iter().any(|&e| e > 1.0) {
                return Err(Error::Config(
                    "epsilon entries above 1 are outside the rate statement's domain".into(),
                ));
            }
        }
        if eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("epsilon grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// The epsilon grid actually swept: nonpositive entries are dropped; an
    /// uncontaminated sweep runs a single `epsilon = 0` point.
    pub fn effective_epsilon_grid(&self) -> Vec<f64> {
        if !self.contaminated() {
            return vec![0.0];
        }
        self.sweep
            .epsilon
            .iter()
            .copied()
            .filter(|&e| e > 0.0)
            .collect()
    }

    pub fn density(&self) -> Result<Density> {
        let mean = self
            .density
            .mean
            .clone()
            .unwrap_or_else(|| vec![0.0; self.density.dim]);
        let class = HolderClass::new(self.class.s, self.class.constant, self.density.dim)?;
        Density::gaussian(mean, self.density.sigma)?.with_class(class)
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::by_name(&self.estimator.kernel, self.density.dim)
    }

    pub fn class(&self) -> Result<HolderClass> {
        HolderClass::new(self.class.s, self.class.constant, self.density.dim)
    }

    pub fn bandwidth_rule(&self, epsilon: f64) -> Result<BandwidthRule> {
        let class = self.class()?;
        match self.estimator.bandwidth.as_str() {
            "classical" => BandwidthRule::classical(self.estimator.c, class),
            _ => BandwidthRule::robust(
                self.estimator.c,
                class,
                WassersteinBudget::new(self.contamination.q, self.contamination.r, epsilon)?,
            ),
        }
    }

    pub fn plan(&self, density: &Density, epsilon: f64) -> Result<Option<ContaminationPlan>> {
        if !self.contaminated() || epsilon == 0.0 {
            return Ok(None);
        }
        let budget =
            WassersteinBudget::new(self.contamination.q, self.contamination.r, epsilon)?;
        match self.contamination.kind.as_str() {
            "lower-bound" => {
                let class = self.class()?;
                Ok(Some(lower_bound_adversary(
                    density,
                    &self.sweep.x0,
                    budget,
                    &class,
                )?))
            }
            "shift" => {
                let mut direction = self
                    .contamination
                    .direction
                    .clone()
                    .unwrap_or_else(|| vec![0.0; self.density.dim]);
                if self.contamination.direction.is_none() {
                    direction[0] = 1.0;
                }
                Ok(Some(shift_adversary(
                    self.sweep.x0.clone(),
                    budget,
                    direction,
                    self.contamination.profile_width,
                )?))
            }
            _ => Ok(None),
        }
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One evaluated grid point. `mse`/`se` are NaN when the point failed; the
/// failure reason is kept alongside and the sweep continues.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub epsilon: f64,
    pub mse: f64,
    pub se: f64,
    pub replications: usize,
    pub seed: u64,
    pub error: Option<String>,
}

pub const CSV_HEADER: &str = "n,epsilon,mse,se,R,seed";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.epsilon,
            if self.mse.is_nan() { "nan".to_string() } else { self.mse.to_string() },
            if self.se.is_nan() { "nan".to_string() } else { self.se.to_string() },
            self.replications,
            self.seed
        )
    }
}

/// Evaluates the full grid (n outer, epsilon inner), invoking `on_row` after
/// each grid point so callers can stream rows to disk.
pub fn sweep_with<F: FnMut(&SweepRow) -> Result<()>>(
    config: &ExperimentConfig,
    mut on_row: F,
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let density = config.density()?;
    let kernel = config.kernel()?;
    let eps_grid = config.effective_epsilon_grid();
    let mut rows = Vec::new();
    let mut grid_index = 0u64;
    for &n in &config.sweep.n {
        for &eps in &eps_grid {
            let seed = derive_seed(config.sweep.seed, &[grid_index]);
            let outcome = config.plan(&density, eps).and_then(|plan| {
                let rule = config.bandwidth_rule(eps)?;
                mc_risk(
                    &density,
                    plan.as_ref(),
                    &kernel,
                    &rule,
                    &config.sweep.x0,
                    n,
                    config.sweep.replications,
                    seed,
                )
            });
            let row = match outcome {
                Ok(estimate) => SweepRow {
                    n,
                    epsilon: eps,
                    mse: estimate.mse,
                    se: estimate.se,
                    replications: estimate.replications,
                    seed,
                    error: None,
                },
                Err(e) => SweepRow {
                    n,
                    epsilon: eps,
                    mse: f64::NAN,
                    se: f64::NAN,
                    replications: config.sweep.replications,
                    seed,
                    error: Some(e.to_string()),
                },
            };
            on_row(&row)?;
            rows.push(row);
            grid_index += 1;
        }
    }
    Ok(rows)
}

/// Evaluates the grid without writing anything.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep_with(config, |_| Ok(()))
}

/// Evaluates the grid, streaming rows to a CSV file as they complete.
pub fn sweep_to_csv(config: &ExperimentConfig, path: &Path) -> Result<Vec<SweepRow>> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{CSV_HEADER}")?;
    let rows = sweep_with(config, |row| {
        writeln!(file, "{}", row.csv_line())?;
        file.flush()?;
        Ok(())
    })?;
    Ok(rows)
}

/// Renders rows to the CSV text format (header included).
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

/// Least-squares fit of `log risk` against `log x`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Largest absolute log-space residual; nonzero residuals flag degenerate
    /// designs such as repeated abscissas with different risks.
    pub residual_max: f64,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(Error::InvalidParameter(
            "rate fit needs strictly positive coordinates".into(),
        ));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "rate fit design is degenerate: all abscissas identical".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut residual_max: f64 = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        let resid = y - (intercept + slope * x);
        ss_res += resid * resid;
        residual_max = residual_max.max(resid.abs());
    }
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: points.len(),
        residual_max,
    })
}

// ---------------------------------------------------------------------------
// Exponent tables
// ---------------------------------------------------------------------------

/// Named rate exponents for a problem class.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentTable {
    /// `2s/(2s+p)`: classical rate in `n`.
    pub classical_n: f64,
    /// `2s/(s+1+p/r)`: contamination rate in `epsilon`.
    pub theorem_eps: f64,
    /// `4s/(2s+1)`: earlier lower-bound exponent; `p = 1, q = r = 2` only.
    pub v1_lower_eps: Option<f64>,
    /// `2s/(s+2)`: earlier upper-bound exponent; `p = 1, q = r = 2` only.
    pub v1_upper_eps: Option<f64>,
}

pub fn exponent_table(s: f64, p: usize, r: f64) -> Result<ExponentTable> {
    if !(s > 0.0) || p == 0 || !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need s > 0, p >= 1, r >= 1; got s={s}, p={p}, r={r}"
        )));
    }
    let pf = p as f64;
    let v1 = p == 1 && r == 2.0;
    Ok(ExponentTable {
        classical_n: 2.0 * s / (2.0 * s + pf),
        theorem_eps: 2.0 * s / (s + 1.0 + pf / r),
        v1_lower_eps: v1.then(|| 4.0 * s / (2.0 * s + 1.0)),
        v1_upper_eps: v1.then(|| 2.0 * s / (s + 2.0)),
    })
}

/// Exact rational check of the strict exponent ordering
/// `4s/(2s+1) > 2s/(s+3/2) > 2s/(s+2)` for `s = num/den`.
pub fn exponent_ordering_exact(s_num: i64, s_den: i64) -> Result<bool> {
    if s_num <= 0 || s_den <= 0 {
        return Err(Error::InvalidParameter("need s > 0 as a positive rational".into()));
    }
    let (a, b) = (s_num as i128, s_den as i128);
    // with s = a/b: 4s/(2s+1) = 4a/(2a+b), 2s/(s+3/2) = 4a/(2a+3b),
    // 2s/(s+2) = 4a/(2a+4b)
    let fractions = [
        (4 * a, 2 * a + b),
        (4 * a, 2 * a + 3 * b),
        (4 * a, 2 * a + 4 * b),
    ];
    Ok(fractions
        .windows(2)
        .all(|w| w[0].0 * w[1].1 > w[1].0 * w[0].1))
}
