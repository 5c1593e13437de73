//! Densities, bump perturbations, and numerical smoothness certification.
//!
//! The bank holds two density kinds: isotropic Gaussians and Gaussians
//! perturbed by a compactly supported mean-zero bump. All values are immutable
//! after construction and samplers take an explicit seed per call, so
//! everything here is safe to share across threads.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};
use crate::numeric::seeded_rng;
use crate::profiles::Profile;
use crate::quad::{default_panels, simpson_box, SupportBox};

/// Half-width (in units of sigma) of the box used to integrate Gaussians.
const GAUSSIAN_QUAD_SIGMAS: f64 = 12.0;

/// Points per axis of the inverse-CDF sampling grid (2^16 intervals).
const CDF_GRID_INTERVALS: usize = 1 << 16;

/// Safety factor applied to grid minima when estimating density floors.
const FLOOR_SAFETY: f64 = 0.99;

pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn std_normal_quantile(u: f64) -> f64 {
    static NORMAL: OnceLock<statrs::distribution::Normal> = OnceLock::new();
    NORMAL
        .get_or_init(|| statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal"))
        .inverse_cdf(u)
}

// ---------------------------------------------------------------------------
// Hölder classes
// ---------------------------------------------------------------------------

/// A Hölder smoothness class `(s, L)` in dimension `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderClass {
    smoothness: f64,
    constant: f64,
    dim: usize,
}

impl HolderClass {
    pub fn new(smoothness: f64, constant: f64, dim: usize) -> Result<Self> {
        if !(smoothness > 0.0) || !smoothness.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "smoothness must be positive and finite, got {smoothness}"
            )));
        }
        if !(constant > 0.0) || !constant.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "class constant must be positive and finite, got {constant}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self {
            smoothness,
            constant,
            dim,
        })
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest integer strictly below the smoothness exponent.
    pub fn derivative_order(&self) -> usize {
        (self.smoothness.ceil() - 1.0).max(0.0) as usize
    }
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

/// A point cloud in `R^p` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "sample data length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

// ---------------------------------------------------------------------------
// Bumps and divergence fields
// ---------------------------------------------------------------------------

/// Compactly supported product perturbation
/// `g(x) = tau * psi_1((x_1-c_1)/w) * prod_{j>=2} plateau((x_j-c_j)/w)`.
///
/// With a mean-zero first-axis profile the bump integrates to zero exactly.
/// Profiles are normalized to unit sup norm, so `sup |g| = |tau|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    center: Vec<f64>,
    width: f64,
    amplitude: f64,
    profile: Profile,
}

/// Builds a bump from a registered profile name.
pub fn make_bump(center: Vec<f64>, width: f64, amplitude: f64, shape: &str) -> Result<Bump> {
    let profile = Profile::by_name(shape)?;
    Bump::new(center, width, amplitude, profile)
}

impl Bump {
    pub fn new(center: Vec<f64>, width: f64, amplitude: f64, profile: Profile) -> Result<Self> {
        if center.is_empty() || center.len() > 3 {
            return Err(Error::Capacity {
                what: "bump dimension".into(),
                limit: 3,
                got: center.len(),
            });
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bump width must be positive, got {width}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter("bump amplitude must be finite".into()));
        }
        Ok(Self {
            center,
            width,
            amplitude,
            profile,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut v = self.amplitude;
        if v == 0.0 {
            return 0.0;
        }
        for (j, (xj, cj)) in x.iter().zip(&self.center).enumerate() {
            let u = (xj - cj) / self.width;
            v *= if j == 0 {
                self.profile.eval(u)
            } else {
                self.profile.companion().eval(u)
            };
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Support box `center +- width` per axis.
    pub fn support_box(&self) -> SupportBox {
        SupportBox {
            lo: self.center.iter().map(|c| c - self.width).collect(),
            hi: self.center.iter().map(|c| c + self.width).collect(),
        }
    }

    /// Sup norm of the bump. Profiles are unit-normalized and the per-axis
    /// maxima are attained simultaneously, so this is exactly `|tau|`.
    pub fn sup_abs(&self) -> f64 {
        self.amplitude.abs()
    }

    /// Whether the bump integrates to zero (first-axis profile mean-zero).
    pub fn mean_zero(&self) -> bool {
        self.profile.mean_zero()
    }

    /// Point of `R^p` where the bump attains `+|tau| * sign(tau)`.
    pub fn argmax(&self) -> Vec<f64> {
        let mut x = self.center.clone();
        x[0] += self.width * self.profile.argmax();
        x
    }
}

/// Vector field `U` with `div U = g` for a mean-zero bump `g`, supported on
/// the bump box: the first component carries the (scaled) analytic primitive
/// of the first-axis profile, all other components vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceField {
    bump: Bump,
}

/// Builds the divergence field of a bump.
pub fn bump_field(bump: &Bump) -> Result<DivergenceField> {
    if !bump.mean_zero() {
        return Err(Error::Construction(format!(
            "profile '{}' on the first axis is not mean-zero; the primitive would not \
             vanish at the box boundary and U would leak outside the support",
            bump.profile().name()
        )));
    }
    Ok(DivergenceField { bump: bump.clone() })
}

impl DivergenceField {
    pub fn dim(&self) -> usize {
        self.bump.dim()
    }

    pub fn bump(&self) -> &Bump {
        &self.bump
    }

    pub fn support_box(&self) -> SupportBox {
        self.bump.support_box()
    }

    /// First (and only nonzero) component of `U`.
    pub fn component_1(&self, x: &[f64]) -> f64 {
        let b = &self.bump;
        let mut v = b.amplitude * b.width;
        if v == 0.0 {
            return 0.0;
        }
        let u1 = (x[0] - b.center[0]) / b.width;
        v *= b.profile.primitive(u1).expect("mean-zero by construction");
        for (xj, cj) in x.iter().zip(&b.center).skip(1) {
            v *= b.profile.companion().eval((xj - cj) / b.width);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.dim()];
        u[0] = self.component_1(x);
        u
    }

    /// `int ||U(x)||_q^r dx` over the support box. Only the first component is
    /// nonzero, so the value is independent of `q`.
    pub fn norm_integral(&self, _q: f64, r: f64) -> Result<f64> {
        let bx = self.support_box();
        simpson_box(
            |x| self.component_1(x).abs().powf(r),
            &bx,
            default_panels(bx.dim()),
        )
    }

    /// Max of `|div U - g|` over a validation grid by second-order central
    /// differences with step equal to the grid spacing.
    pub fn divergence_residual(&self, points_per_axis: usize) -> f64 {
        let bx = self.support_box();
        let dim = bx.dim();
        let n = points_per_axis.max(8);
        let spacing: Vec<f64> = (0..dim)
            .map(|j| (bx.hi[j] - bx.lo[j]) / (n - 1) as f64)
            .collect();
        let mut worst: f64 = 0.0;
        let mut x = vec![0.0; dim];
        let total: usize = n.pow(dim as u32);
        for flat in 0..total {
            let mut rest = flat;
            for j in 0..dim {
                let i = rest % n;
                rest /= n;
                x[j] = bx.lo[j] + i as f64 * spacing[j];
            }
            // only U_1 is nonzero, so div U = d U_1 / d x_1
            let h = spacing[0];
            let x1 = x[0];
            x[0] = x1 + h;
            let fw = self.component_1(&x);
            x[0] = x1 - h;
            let bw = self.component_1(&x);
            x[0] = x1;
            let div = (fw - bw) / (2.0 * h);
            worst = worst.max((div - self.bump.eval(&x)).abs());
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

#[derive(Default)]
struct PerturbCache {
    table: OnceLock<Arc<CdfTable>>,
    envelope: OnceLock<f64>,
}

impl Clone for PerturbCache {
    fn clone(&self) -> Self {
        // caches are derived data; rebuilt lazily on the clone
        PerturbCache::default()
    }
}

impl fmt::Debug for PerturbCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbCache")
            .field("table_built", &self.table.get().is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum DensityKind {
    Gaussian {
        mean: Vec<f64>,
        sigma: f64,
    },
    Perturbed {
        base: Box<Density>,
        bump: Bump,
        #[serde(skip)]
        cache: PerturbCache,
    },
}

/// An evaluatable, sampleable probability density with optional claimed
/// smoothness metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Density {
    kind: DensityKind,
    holder: Option<HolderClass>,
}

/// Isotropic normal density centered at the origin.
pub fn make_gaussian(sigma: f64, dim: usize) -> Result<Density> {
    Density::gaussian(vec![0.0; dim.max(1)], sigma)
}

impl Density {
    pub fn gaussian(mean: Vec<f64>, sigma: f64) -> Result<Density> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian scale must be positive, got {sigma}"
            )));
        }
        if mean.is_empty() || mean.len() > 3 {
            return Err(Error::Capacity {
                what: "density dimension".into(),
                limit: 3,
                got: mean.len(),
            });
        }
        Ok(Density {
            kind: DensityKind::Gaussian { mean, sigma },
            holder: None,
        })
    }

    /// Attaches a claimed Hölder class (checked by [`holder_check`], not here).
    pub fn with_class(mut self, class: HolderClass) -> Result<Density> {
        if class.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "class dimension {} does not match density dimension {}",
                class.dim(),
                self.dim()
            )));
        }
        self.holder = Some(class);
        Ok(self)
    }

    pub fn holder(&self) -> Option<&HolderClass> {
        self.holder.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DensityKind::Gaussian { mean, .. } => mean.len(),
            DensityKind::Perturbed { base, .. } => base.dim(),
        }
    }

    /// The bump attached by [`perturb`], if any.
    pub fn bump(&self) -> Option<&Bump> {
        match &self.kind {
            DensityKind::Gaussian { .. } => None,
            DensityKind::Perturbed { bump, .. } => Some(bump),
        }
    }

    /// The unperturbed base of a perturbed density, or itself.
    pub fn base(&self) -> &Density {
        match &self.kind {
            DensityKind::Gaussian { .. } => self,
            DensityKind::Perturbed { base, .. } => base,
        }
    }

    /// Gaussian scale if this density is (a perturbation of) a Gaussian.
    pub fn gaussian_sigma(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Gaussian { sigma, .. } => Some(*sigma),
            DensityKind::Perturbed { .. } => None,
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Gaussian { mean, sigma } => {
                let mut v = 1.0;
                for (xj, mj) in x.iter().zip(mean) {
                    v *= std_normal_pdf((xj - mj) / sigma) / sigma;
                }
                v
            }
            DensityKind::Perturbed { base, bump, .. } => base.pdf(x) + bump.eval(x),
        }
    }

    /// One-dimensional pdf shorthand.
    pub fn pdf1(&self, x: f64) -> f64 {
        self.pdf(&[x])
    }

    /// Box outside which the density mass is negligible at quadrature scale.
    pub fn quadrature_box(&self) -> SupportBox {
        match &self.kind {
            DensityKind::Gaussian { mean, sigma } => SupportBox {
                lo: mean.iter().map(|m| m - GAUSSIAN_QUAD_SIGMAS * sigma).collect(),
                hi: mean.iter().map(|m| m + GAUSSIAN_QUAD_SIGMAS * sigma).collect(),
            },
            DensityKind::Perturbed { base, bump, .. } => {
                base.quadrature_box().union(&bump.support_box())
            }
        }
    }

    /// Quadrature of the pdf over the enclosing box; should be 1 within
    /// quadrature tolerance for every registered density.
    pub fn quadrature_mass(&self) -> Result<f64> {
        let bx = self.quadrature_box();
        simpson_box(|x| self.pdf(x), &bx, default_panels(bx.dim()))
    }

    /// Quantile function; one-dimensional densities only.
    ///
    /// Gaussians use the analytic normal quantile; perturbed densities use
    /// monotone interpolation of a cumulative table on a 2^16-interval grid.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::InvalidParameter(
                "quantile function requires a one-dimensional density".into(),
            ));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!(
                "quantile level must lie in [0, 1], got {u}"
            )));
        }
        match &self.kind {
            DensityKind::Gaussian { mean, sigma } => {
                Ok(mean[0] + sigma * std_normal_quantile(u.clamp(1e-300, 1.0 - 1e-16)))
            }
            DensityKind::Perturbed { .. } => Ok(self.cdf_table().quantile(u)),
        }
    }

    fn cdf_table(&self) -> Arc<CdfTable> {
        match &self.kind {
            DensityKind::Perturbed { cache, .. } => {
                let bx = self.quadrature_box();
                cache
                    .table
                    .get_or_init(|| {
                        Arc::new(CdfTable::build(|x| self.pdf(&[x]), bx.lo[0], bx.hi[0]))
                    })
                    .clone()
            }
            DensityKind::Gaussian { .. } => unreachable!("gaussians use the analytic quantile"),
        }
    }

    fn rejection_envelope(&self) -> f64 {
        match &self.kind {
            DensityKind::Perturbed { base, bump, cache } => *cache.envelope.get_or_init(|| {
                // 1 + sup |g/base| over the bump box
                let bx = bump.support_box();
                let dim = bx.dim();
                let n = 64usize;
                let mut worst: f64 = 0.0;
                let mut x = vec![0.0; dim];
                for flat in 0..n.pow(dim as u32) {
                    let mut rest = flat;
                    for j in 0..dim {
                        let i = rest % n;
                        rest /= n;
                        x[j] = bx.lo[j] + (bx.hi[j] - bx.lo[j]) * i as f64 / (n - 1) as f64;
                    }
                    worst = worst.max((bump.eval(&x) / base.pdf(&x)).abs());
                }
                1.0 + worst
            }),
            DensityKind::Gaussian { .. } => 1.0,
        }
    }

    /// Draws `n` i.i.d. points. Identical seeds give identical samples.
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        let dim = self.dim();
        let mut rng = seeded_rng(seed);
        let mut data = Vec::with_capacity(n * dim);
        match &self.kind {
            DensityKind::Gaussian { mean, sigma } => {
                for _ in 0..n {
                    for mj in mean {
                        let z: f64 = rng.sample(StandardNormal);
                        data.push(mj + sigma * z);
                    }
                }
            }
            DensityKind::Perturbed { base, .. } if dim == 1 => {
                let table = self.cdf_table();
                for _ in 0..n {
                    let u: f64 = rng.gen();
                    data.push(table.quantile(u));
                }
                let _ = base; // sampling is fully described by the table
            }
            DensityKind::Perturbed { base, .. } => {
                // rejection against the base with a constant envelope
                let envelope = self.rejection_envelope();
                let (mean, sigma) = match &base.kind {
                    DensityKind::Gaussian { mean, sigma } => (mean.clone(), *sigma),
                    DensityKind::Perturbed { .. } => {
                        unreachable!("perturb() only accepts gaussian bases")
                    }
                };
                let mut x = vec![0.0; dim];
                for _ in 0..n {
                    loop {
                        for (xj, mj) in x.iter_mut().zip(&mean) {
                            let z: f64 = rng.sample(StandardNormal);
                            *xj = mj + sigma * z;
                        }
                        let accept: f64 = rng.gen();
                        if accept * envelope * base.pdf(&x) <= self.pdf(&x) {
                            break;
                        }
                    }
                    data.extend_from_slice(&x);
                }
            }
        }
        Sample { dim, data }
    }

    /// Serializable description (name + parameters) for experiment configs.
    pub fn describe(&self) -> DensityDescription {
        match &self.kind {
            DensityKind::Gaussian { mean, sigma } => DensityDescription {
                name: "gaussian".into(),
                mean: mean.clone(),
                sigma: Some(*sigma),
                bump: None,
            },
            DensityKind::Perturbed { base, bump, .. } => {
                let mut d = base.describe();
                d.name = format!("{}+bump", d.name);
                d.bump = Some(BumpDescription {
                    center: bump.center.clone(),
                    width: bump.width,
                    amplitude: bump.amplitude,
                    profile: bump.profile.name(),
                });
                d
            }
        }
    }
}

/// Config-dictionary form of a density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityDescription {
    pub name: String,
    pub mean: Vec<f64>,
    pub sigma: Option<f64>,
    pub bump: Option<BumpDescription>,
}

/// Config-dictionary form of a bump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpDescription {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
    pub profile: String,
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// Grid minimum of the density over the box shrunk by one grid cell, times a
/// safety factor. This is the floor `c_I` used by perturbation contracts and
/// transport certificates.
pub fn density_floor(density: &Density, bx: &SupportBox) -> f64 {
    let dim = bx.dim();
    let n: usize = match dim {
        1 => 2048,
        2 => 96,
        _ => 24,
    };
    let cell = (0..dim)
        .map(|j| (bx.hi[j] - bx.lo[j]) / n as f64)
        .fold(f64::INFINITY, f64::min);
    let inner = bx.shrink(cell);
    let mut min = f64::INFINITY;
    let mut x = vec![0.0; dim];
    for flat in 0..n.pow(dim as u32) {
        let mut rest = flat;
        for j in 0..dim {
            let i = rest % n;
            rest /= n;
            x[j] = inner.lo[j] + (inner.hi[j] - inner.lo[j]) * i as f64 / (n - 1) as f64;
        }
        min = min.min(density.pdf(&x));
    }
    min * FLOOR_SAFETY
}

/// Grid maximum of the density over a box.
pub fn density_sup(density: &Density, bx: &SupportBox, points_per_axis: usize) -> f64 {
    let dim = bx.dim();
    let n = points_per_axis.max(2);
    let mut max = f64::NEG_INFINITY;
    let mut x = vec![0.0; dim];
    for flat in 0..n.pow(dim as u32) {
        let mut rest = flat;
        for j in 0..dim {
            let i = rest % n;
            rest /= n;
            x[j] = bx.lo[j] + (bx.hi[j] - bx.lo[j]) * i as f64 / (n - 1) as f64;
        }
        max = max.max(density.pdf(&x));
    }
    max
}

/// Adds a mean-zero bump to a Gaussian base density.
///
/// Requires the base to dominate the bump: `c_I >= 2 sup|g|` on the bump box,
/// where `c_I` is the measured floor.
pub fn perturb(base: &Density, bump: &Bump) -> Result<Density> {
    if base.dim() != bump.dim() {
        return Err(Error::InvalidParameter(format!(
            "base dimension {} does not match bump dimension {}",
            base.dim(),
            bump.dim()
        )));
    }
    if matches!(base.kind, DensityKind::Perturbed { .. }) {
        return Err(Error::InvalidParameter(
            "perturbing an already-perturbed density is not supported".into(),
        ));
    }
    if !bump.mean_zero() && bump.amplitude() != 0.0 {
        return Err(Error::Construction(format!(
            "profile '{}' is not mean-zero; the perturbed function would not integrate to 1",
            bump.profile().name()
        )));
    }
    let floor = density_floor(base, &bump.support_box());
    let sup = bump.sup_abs();
    if sup > floor / 2.0 {
        return Err(Error::Contract {
            what: format!(
                "bump sup-norm must not exceed half the density floor c_I = {floor:.6e} \
                 on the bump box"
            ),
            measured: sup,
            limit: floor / 2.0,
        });
    }
    Ok(Density {
        holder: base.holder,
        kind: DensityKind::Perturbed {
            base: Box::new(base.clone()),
            bump: bump.clone(),
            cache: PerturbCache::default(),
        },
    })
}

// ---------------------------------------------------------------------------
// Inverse-CDF table
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct CdfTable {
    x0: f64,
    dx: f64,
    cum: Vec<f64>,
}

impl CdfTable {
    fn build<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64) -> CdfTable {
        let n = CDF_GRID_INTERVALS;
        let dx = (hi - lo) / n as f64;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut prev = pdf(lo);
        let mut acc = 0.0;
        for i in 1..=n {
            let x = lo + i as f64 * dx;
            let cur = pdf(x);
            acc += 0.5 * (prev + cur) * dx;
            cum.push(acc);
            prev = cur;
        }
        let total = *cum.last().expect("nonempty table");
        for c in &mut cum {
            *c /= total;
        }
        CdfTable { x0: lo, dx, cum }
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let idx = self.cum.partition_point(|c| *c < u);
        if idx == 0 {
            return self.x0;
        }
        if idx >= self.cum.len() {
            return self.x0 + self.dx * (self.cum.len() - 1) as f64;
        }
        let (c0, c1) = (self.cum[idx - 1], self.cum[idx]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.x0 + self.dx * ((idx - 1) as f64 + frac)
    }
}

// ---------------------------------------------------------------------------
// Hölder certification
// ---------------------------------------------------------------------------

/// Evaluation window for [`holder_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderGridSpec {
    pub window: SupportBox,
    pub points_per_axis: usize,
    /// Only pairs closer than this are compared.
    pub locality: f64,
}

/// Result of a numerical Hölder-class check.
#[derive(Debug, Clone)]
pub struct HolderReport {
    pub max_ratio: f64,
    /// Class constant with the discretization slack factor applied.
    pub limit: f64,
    pub pass: bool,
    pub pairs_checked: usize,
    pub derivative_order: usize,
}

/// Slack factor applied to the class constant to absorb discretization error.
const HOLDER_SLACK: f64 = 1.05;

/// Central finite difference of order `l` with step `d`.
fn central_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, l: usize, d: f64) -> f64 {
    if l == 0 {
        return f(x);
    }
    let mut acc = 0.0;
    let mut binom = 1.0;
    for i in 0..=l {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let offset = l as f64 / 2.0 - i as f64;
        acc += sign * binom * f(x + offset * d);
        binom = binom * (l - i) as f64 / (i + 1) as f64;
    }
    acc / d.powi(l as i32)
}

/// Checks a 1-D function against a Hölder class on a grid window: reports the
/// maximum ratio `|f^(l)(x) - f^(l)(y)| / |x - y|^(s-l)` over nearby grid
/// pairs and a pass/fail against the class constant.
pub fn holder_check_fn<F: Fn(f64) -> f64>(
    f: F,
    class: &HolderClass,
    grid: &HolderGridSpec,
) -> Result<HolderReport> {
    if grid.window.dim() != 1 {
        return Err(Error::InvalidParameter(
            "holder_check_fn expects a one-dimensional window".into(),
        ));
    }
    let l = class.derivative_order();
    let n = grid.points_per_axis;
    if n < 8 * (l + 2) {
        return Err(Error::InvalidParameter(format!(
            "grid with {n} points is too coarse for order-{l} finite differences \
             (need at least {})",
            8 * (l + 2)
        )));
    }
    let (a, b) = (grid.window.lo[0], grid.window.hi[0]);
    let spacing = (b - a) / (n - 1) as f64;
    if grid.locality <= spacing {
        return Err(Error::InvalidParameter(format!(
            "locality cutoff {} does not exceed the grid spacing {spacing}",
            grid.locality
        )));
    }
    let deriv: Vec<f64> = (0..n)
        .map(|i| central_derivative(&f, a + i as f64 * spacing, l, spacing))
        .collect();
    let reach = (grid.locality / spacing).floor() as usize;
    let exponent = class.smoothness() - l as f64;
    let mut max_ratio: f64 = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for k in 1..=reach.min(n - 1 - i) {
            let dist = k as f64 * spacing;
            let ratio = (deriv[i + k] - deriv[i]).abs() / dist.powf(exponent);
            max_ratio = max_ratio.max(ratio);
            pairs += 1;
        }
    }
    let limit = class.constant() * HOLDER_SLACK;
    Ok(HolderReport {
        max_ratio,
        limit,
        pass: max_ratio <= limit,
        pairs_checked: pairs,
        derivative_order: l,
    })
}

/// [`holder_check_fn`] applied to a density.
///
/// Dimensions 2 and 3 support only classes with `s <= 1` (function-value
/// ratios); higher derivative orders are implemented in one dimension.
pub fn holder_check(
    density: &Density,
    class: &HolderClass,
    grid: &HolderGridSpec,
) -> Result<HolderReport> {
    if density.dim() == 1 {
        return holder_check_fn(|x| density.pdf(&[x]), class, grid);
    }
    let l = class.derivative_order();
    if l > 0 {
        return Err(Error::InvalidParameter(format!(
            "holder_check in dimension {} supports only s <= 1 (got derivative order {l})",
            density.dim()
        )));
    }
    let dim = grid.window.dim();
    if dim != density.dim() {
        return Err(Error::InvalidParameter(
            "grid window dimension does not match the density".into(),
        ));
    }
    let n = grid.points_per_axis;
    if n < 8 {
        return Err(Error::InvalidParameter(
            "grid too coarse: need at least 8 points per axis".into(),
        ));
    }
    let total = n.pow(dim as u32);
    if total > 1 << 14 {
        return Err(Error::Capacity {
            what: "holder_check grid points".into(),
            limit: 1 << 14,
            got: total,
        });
    }
    let mut pts = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut rest = flat;
        for j in 0..dim {
            let i = rest % n;
            rest /= n;
            x[j] = grid.window.lo[j]
                + (grid.window.hi[j] - grid.window.lo[j]) * i as f64 / (n - 1) as f64;
        }
        pts.push(x.clone());
        vals.push(density.pdf(&x));
    }
    let mut max_ratio: f64 = 0.0;
    let mut pairs = 0usize;
    for i in 0..total {
        for j in (i + 1)..total {
            let dist: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist == 0.0 || dist > grid.locality {
                continue;
            }
            let ratio = (vals[i] - vals[j]).abs() / dist.powf(class.smoothness());
            max_ratio = max_ratio.max(ratio);
            pairs += 1;
        }
    }
    let limit = class.constant() * HOLDER_SLACK;
    Ok(HolderReport {
        max_ratio,
        limit,
        pass: max_ratio <= limit,
        pairs_checked: pairs,
        derivative_order: 0,
    })
}
