//! Adversaries with certified `W_{q,r}` budgets.
//!
//! Two certified families are implemented: pointwise-bounded map shifts
//! (certified analytically, since `||delta(x)||_q <= epsilon` everywhere) and
//! mean-zero density perturbations (certified through the dynamic-formulation
//! certificate in [`crate::transport`]). Every constructor enforces
//! `certificate <= budget` — a plan object existing means it is within budget.

use serde::{Deserialize, Serialize};

use crate::density::{bump_field, perturb, Bump, Density, DivergenceField, HolderClass, Sample};
use crate::density::density_floor;
use crate::error::{Error, Result};
use crate::numeric::{lq_norm, pairwise_sum_indexed};
use crate::profiles::{Profile, REGISTERED_PLATEAU_ORDERS};
use crate::quad::{default_panels, simpson_box};
use crate::transport::bb_certificate;

/// Default Gaussian scale of the lower-bound base density.
pub const DEFAULT_LOWER_BOUND_SIGMA: f64 = 3.0;

const CALIBRATION_MAX_ITERS: usize = 40;

// ---------------------------------------------------------------------------
// Budgets and certificates
// ---------------------------------------------------------------------------

/// A `W_{q,r}` contamination budget: `(E ||X' - X||_q^r)^(1/r) <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinBudget {
    q: f64,
    r: f64,
    epsilon: f64,
}

impl WassersteinBudget {
    /// `q` in `[1, inf]` (`f64::INFINITY` selects the max norm), `r` in
    /// `[1, inf)`, `epsilon >= 0`.
    pub fn new(q: f64, r: f64, epsilon: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm index q must satisfy q >= 1, got {q}"
            )));
        }
        if !(r >= 1.0) || r.is_infinite() || r.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "power r must satisfy 1 <= r < infinity, got {r}"
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "budget must satisfy epsilon >= 0, got {epsilon}"
            )));
        }
        Ok(Self { q, r, epsilon })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// How a plan's budget certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    Analytic,
    BbCertificate,
    Talagrand,
}

/// A certified upper bound on `W_{q,r}(f, f~)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub method: CertificateMethod,
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

/// Deterministic displacement map `x -> x + delta(x)` with
/// `delta(x) = magnitude * phi((x - target)/width) * direction` for a plateau
/// localization profile `phi` (or `phi == 1` for a constant shift).
///
/// The direction is unit-normalized in the budget's `l_q` norm and
/// `||phi||_inf = 1`, so `||delta(x)||_q <= magnitude` pointwise; that is the
/// analytic certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapShift {
    target: Vec<f64>,
    direction: Vec<f64>,
    magnitude: f64,
    profile_width: f64,
    profile: Option<Profile>,
}

impl MapShift {
    /// Localization weight in `[0, 1]` at `x`.
    fn weight(&self, x: &[f64]) -> f64 {
        match self.profile {
            None => 1.0,
            Some(p) => x
                .iter()
                .zip(&self.target)
                .map(|(xj, tj)| p.eval((xj - tj) / self.profile_width))
                .product(),
        }
    }

    pub fn delta(&self, x: &[f64]) -> Vec<f64> {
        let w = self.magnitude * self.weight(x);
        self.direction.iter().map(|d| d * w).collect()
    }
}

/// The adversary kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PlanKind {
    MapShift(MapShift),
    DensityPerturbation {
        perturbed: Density,
        bump: Bump,
        field: DivergenceField,
    },
}

/// A contamination adversary with a certified budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContaminationPlan {
    pub kind: PlanKind,
    pub budget: WassersteinBudget,
    pub certificate: Certificate,
}

impl ContaminationPlan {
    fn certified(kind: PlanKind, budget: WassersteinBudget, certificate: Certificate) -> Result<Self> {
        if certificate.value > budget.epsilon() + 1e-12 {
            return Err(Error::Contract {
                what: "plan certificate must not exceed the budget".into(),
                measured: certificate.value,
                limit: budget.epsilon(),
            });
        }
        Ok(Self {
            kind,
            budget,
            certificate,
        })
    }

    /// The contaminated density `f~`, when the plan perturbs the density.
    pub fn perturbed_density(&self) -> Option<&Density> {
        match &self.kind {
            PlanKind::DensityPerturbation { perturbed, .. } => Some(perturbed),
            PlanKind::MapShift(_) => None,
        }
    }

    /// Serializable description for experiment configs and summaries.
    pub fn describe(&self) -> PlanDescription {
        match &self.kind {
            PlanKind::MapShift(shift) => PlanDescription {
                kind: "map-shift".into(),
                q: self.budget.q(),
                r: self.budget.r(),
                epsilon: self.budget.epsilon(),
                certificate: self.certificate.value,
                method: self.certificate.method,
                profile: shift.profile.map(|p| p.name()),
                width: Some(shift.profile_width),
                amplitude: Some(shift.magnitude),
                center: Some(shift.target.clone()),
            },
            PlanKind::DensityPerturbation { bump, .. } => PlanDescription {
                kind: "density-perturbation".into(),
                q: self.budget.q(),
                r: self.budget.r(),
                epsilon: self.budget.epsilon(),
                certificate: self.certificate.value,
                method: self.certificate.method,
                profile: Some(bump.profile().name()),
                width: Some(bump.width()),
                amplitude: Some(bump.amplitude()),
                center: Some(bump.center().to_vec()),
            },
        }
    }
}

/// Flat, config-friendly description of a plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanDescription {
    pub kind: String,
    pub q: f64,
    pub r: f64,
    pub epsilon: f64,
    pub certificate: f64,
    pub method: CertificateMethod,
    pub profile: Option<String>,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
    pub center: Option<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// Localized map-shift adversary pushing mass near `target` along `direction`.
///
/// `delta(x) = epsilon * phi((x - target)/profile_width) * direction_unit`,
/// with `phi` the plateau profile (sup norm 1), so the analytic certificate
/// `(E||delta(X)||_q^r)^(1/r) <= epsilon` holds for any sampling density.
pub fn shift_adversary(
    target: Vec<f64>,
    budget: WassersteinBudget,
    direction: Vec<f64>,
    profile_width: f64,
) -> Result<ContaminationPlan> {
    if direction.len() != target.len() {
        return Err(Error::InvalidParameter(
            "direction and target dimensions must agree".into(),
        ));
    }
    let norm = lq_norm(&direction, budget.q());
    if norm == 0.0 {
        return Err(Error::InvalidParameter("direction vector must be nonzero".into()));
    }
    if !(profile_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile width must be positive, got {profile_width}"
        )));
    }
    let unit: Vec<f64> = direction.iter().map(|d| d / norm).collect();
    let shift = MapShift {
        target,
        direction: unit,
        magnitude: budget.epsilon(),
        profile_width,
        profile: Some(Profile::Plateau { k: 4 }),
    };
    ContaminationPlan::certified(
        PlanKind::MapShift(shift),
        budget,
        Certificate {
            value: budget.epsilon(),
            method: CertificateMethod::Analytic,
        },
    )
}

/// Constant-shift adversary `x -> x + displacement`; certificate is
/// `||displacement||_q` exactly.
pub fn constant_shift(displacement: Vec<f64>, budget: WassersteinBudget) -> Result<ContaminationPlan> {
    let norm = lq_norm(&displacement, budget.q());
    let dim = displacement.len();
    let shift = MapShift {
        target: vec![0.0; dim],
        direction: displacement,
        magnitude: 1.0,
        profile_width: 1.0,
        profile: None,
    };
    ContaminationPlan::certified(
        PlanKind::MapShift(shift),
        budget,
        Certificate {
            value: norm,
            method: CertificateMethod::Analytic,
        },
    )
}

/// Rate-critical density-perturbation adversary: a mean-zero bump of width
/// `h = epsilon^(1/(s + 1 + p/r))` and amplitude `tau = L * h^s`, placed so
/// its positive maximum sits at `x0`, then certified against the budget with
/// the dynamic-formulation certificate (bisecting the amplitude down when the
/// initial certificate exceeds the budget).
pub fn lower_bound_adversary(
    base: &Density,
    x0: &[f64],
    budget: WassersteinBudget,
    class: &HolderClass,
) -> Result<ContaminationPlan> {
    if budget.epsilon() <= 0.0 {
        return Err(Error::InvalidParameter(
            "lower-bound adversary needs a positive budget".into(),
        ));
    }
    let dim = base.dim();
    if x0.len() != dim || class.dim() != dim {
        return Err(Error::InvalidParameter(
            "base, target point, and class dimensions must agree".into(),
        ));
    }
    let s = class.smoothness();
    let eps = budget.epsilon();
    let exponent = 1.0 / (s + 1.0 + dim as f64 / budget.r());
    let width = eps.powf(exponent);

    // smallest registered profile order smooth enough for the class
    let needed = (s.ceil() as u32 + 2).max(4);
    let order = REGISTERED_PLATEAU_ORDERS
        .iter()
        .copied()
        .find(|k| *k >= needed)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no registered profile is smooth enough for s = {s} (need order >= {needed})"
            ))
        })?;
    let profile = Profile::PolyDeriv { k: order };

    // center the bump so its positive maximum is at x0
    let mut center = x0.to_vec();
    center[0] -= width * profile.argmax();
    let tau0 = class.constant() * width.powf(s);
    let bump0 = Bump::new(center.clone(), width, tau0, profile)?;

    let floor = density_floor(base, &bump0.support_box());
    if tau0 > floor / 2.0 {
        return Err(Error::Contract {
            what: format!(
                "lower-bound amplitude exceeds half the density floor c_I = {floor:.6e}; \
                 use a base with a larger scale or a smaller budget"
            ),
            measured: tau0,
            limit: floor / 2.0,
        });
    }

    let field0 = bump_field(&bump0)?;
    let cert0 = bb_certificate(base, &bump0, &field0, budget.q(), budget.r())?;
    let (bump, field, cert_value) = if cert0.value <= eps {
        (bump0, field0, cert0.value)
    } else {
        // bisection on a single scale factor against the certificate
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        let mut best: Option<(Bump, DivergenceField, f64)> = None;
        for _ in 0..CALIBRATION_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            let candidate = Bump::new(center.clone(), width, mid * tau0, profile)?;
            let f = bump_field(&candidate)?;
            let c = bb_certificate(base, &candidate, &f, budget.q(), budget.r())?;
            if c.value <= eps {
                lo = mid;
                let done = eps - c.value <= 1e-10 * eps;
                best = Some((candidate, f, c.value));
                if done {
                    break;
                }
            } else {
                hi = mid;
            }
        }
        best.ok_or_else(|| Error::Numeric {
            what: "amplitude calibration failed to certify within budget".into(),
            residual: cert0.value - eps,
        })?
    };

    let perturbed = perturb(base, &bump)?;
    ContaminationPlan::certified(
        PlanKind::DensityPerturbation {
            perturbed,
            bump,
            field,
        },
        budget,
        Certificate {
            value: cert_value,
            method: CertificateMethod::BbCertificate,
        },
    )
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

/// A joint realization of clean and contaminated samples.
#[derive(Debug, Clone)]
pub struct ContaminatedSample {
    pub clean: Sample,
    pub dirty: Sample,
    /// Empirical cost `((1/n) sum ||X'_i - X_i||_q^r)^(1/r)`; populated for
    /// map shifts, where the coupling is materialized.
    pub realized_cost: Option<f64>,
}

impl ContaminatedSample {
    /// Recomputes the empirical transport cost from the stored arrays.
    pub fn recompute_cost(&self, q: f64, r: f64) -> f64 {
        let n = self.clean.n();
        if n == 0 {
            return 0.0;
        }
        let dim = self.clean.dim();
        let total = pairwise_sum_indexed(0, n, |i| {
            let a = self.clean.point(i);
            let b = self.dirty.point(i);
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            lq_norm(&diff, q).powf(r)
        });
        let _ = dim;
        (total / n as f64).powf(1.0 / r)
    }
}

/// Applies a plan to a clean sample.
///
/// Map shifts transport each point deterministically; density perturbations
/// draw an independent i.i.d. sample of equal size from the perturbed density
/// (the coupling stays implicit, so no realized cost is reported).
pub fn apply_plan(
    plan: &ContaminationPlan,
    clean: &Sample,
    seed: u64,
) -> Result<ContaminatedSample> {
    match &plan.kind {
        PlanKind::MapShift(shift) => {
            if shift.target.len() != clean.dim() {
                return Err(Error::InvalidParameter(
                    "plan and sample dimensions must agree".into(),
                ));
            }
            let mut data = Vec::with_capacity(clean.data().len());
            for x in clean.points() {
                let delta = shift.delta(x);
                data.extend(x.iter().zip(&delta).map(|(xi, di)| xi + di));
            }
            let dirty = Sample::new(clean.dim(), data)?;
            let contaminated = ContaminatedSample {
                clean: clean.clone(),
                dirty,
                realized_cost: None,
            };
            let cost = contaminated.recompute_cost(plan.budget.q(), plan.budget.r());
            Ok(ContaminatedSample {
                realized_cost: Some(cost),
                ..contaminated
            })
        }
        PlanKind::DensityPerturbation { perturbed, .. } => {
            if perturbed.dim() != clean.dim() {
                return Err(Error::InvalidParameter(
                    "plan and sample dimensions must agree".into(),
                ));
            }
            let dirty = perturbed.sample(clean.n(), seed);
            Ok(ContaminatedSample {
                clean: clean.clone(),
                dirty,
                realized_cost: None,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Talagrand budget bound
// ---------------------------------------------------------------------------

/// Transportation-cost budget bound for a Gaussian base:
/// `W_2(perturbed, base) <= sqrt(2 sigma^2 KL(perturbed || base))`, with the
/// divergence computed by quadrature.
///
/// Kept for comparison against [`bb_certificate`]; it does not see the width
/// of a localized perturbation, which is exactly why it is the looser
/// certificate for narrow bumps.
pub fn t2_budget_bound(base: &Density, perturbed: &Density) -> Result<f64> {
    let sigma = base.gaussian_sigma().ok_or_else(|| {
        Error::InvalidParameter(
            "the transportation-cost bound requires a gaussian base density".into(),
        )
    })?;
    if base.dim() != perturbed.dim() {
        return Err(Error::InvalidParameter(
            "base and perturbed dimensions must agree".into(),
        ));
    }
    let bx = base.quadrature_box().union(&perturbed.quadrature_box());
    let kl = simpson_box(
        |x| {
            let p = perturbed.pdf(x);
            let q = base.pdf(x);
            if p <= 0.0 {
                // x log x -> 0; negative p means the "perturbed" input is not
                // a density and is flagged below through the NaN path
                if p < 0.0 {
                    f64::NAN
                } else {
                    0.0
                }
            } else {
                p * (p / q).ln()
            }
        },
        &bx,
        default_panels(bx.dim()),
    )?;
    if !kl.is_finite() {
        return Err(Error::Domain(
            "divergence quadrature diverged; the perturbed density is not dominated by the base"
                .into(),
        ));
    }
    Ok((2.0 * sigma * sigma * kl.max(0.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{make_bump, make_gaussian};
    use crate::transport::w_exact_1d_densities;

    fn budget(eps: f64) -> WassersteinBudget {
        WassersteinBudget::new(2.0, 2.0, eps).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(WassersteinBudget::new(0.5, 2.0, 0.1).is_err());
        assert!(WassersteinBudget::new(2.0, f64::INFINITY, 0.1).is_err());
        assert!(WassersteinBudget::new(2.0, 2.0, -0.1).is_err());
        assert!(WassersteinBudget::new(f64::INFINITY, 1.0, 0.0).is_ok());
    }

    #[test]
    fn zero_budget_shift_is_identity() {
        let plan = shift_adversary(vec![0.0], budget(0.0), vec![1.0], 1.0).unwrap();
        let clean = make_gaussian(1.0, 1).unwrap().sample(100, 3);
        let out = apply_plan(&plan, &clean, 0).unwrap();
        assert_eq!(out.dirty.data(), clean.data());
        assert_eq!(out.realized_cost, Some(0.0));
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(matches!(
            shift_adversary(vec![0.0], budget(0.1), vec![0.0], 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn constant_shift_realizes_budget_exactly() {
        let plan = constant_shift(vec![0.3], budget(0.3)).unwrap();
        let clean = make_gaussian(1.0, 1).unwrap().sample(1000, 7);
        let out = apply_plan(&plan, &clean, 0).unwrap();
        let cost = out.realized_cost.unwrap();
        assert!((cost - 0.3).abs() < 1e-12, "cost {cost}");
        assert!((out.recompute_cost(2.0, 2.0) - cost).abs() < 1e-12);
    }

    #[test]
    fn constant_shift_must_fit_budget() {
        assert!(matches!(
            constant_shift(vec![0.5], budget(0.3)),
            Err(Error::Contract { .. })
        ));
    }

    #[test]
    fn localized_shift_stays_within_budget() {
        let plan = shift_adversary(vec![0.0], budget(0.2), vec![1.0], 0.7).unwrap();
        let clean = make_gaussian(1.0, 1).unwrap().sample(10_000, 7);
        let out = apply_plan(&plan, &clean, 0).unwrap();
        let cost = out.realized_cost.unwrap();
        assert!(cost > 0.0 && cost <= 0.2 + 1e-12, "cost {cost}");
        // localized weights shrink the average strictly below the sup bound
        assert!(cost < 0.19, "cost {cost}");
    }

    #[test]
    fn apply_plan_is_deterministic() {
        let base = make_gaussian(3.0, 1).unwrap();
        let class = HolderClass::new(2.0, 0.1, 1).unwrap();
        let plan = lower_bound_adversary(&base, &[0.0], budget(0.05), &class).unwrap();
        let clean = base.sample(500, 21);
        let a = apply_plan(&plan, &clean, 9).unwrap();
        let b = apply_plan(&plan, &clean, 9).unwrap();
        assert_eq!(a.dirty.data(), b.dirty.data());
        assert!(a.realized_cost.is_none());
    }

    #[test]
    fn lower_bound_widths_follow_the_power_law() {
        let base = make_gaussian(3.0, 1).unwrap();
        let class = HolderClass::new(2.0, 0.1, 1).unwrap();
        let eps = 0.01;
        let plan = lower_bound_adversary(&base, &[0.0], budget(eps), &class).unwrap();
        let bump = match &plan.kind {
            PlanKind::DensityPerturbation { bump, .. } => bump.clone(),
            _ => panic!("expected a density perturbation"),
        };
        // width = eps^(1/(s + 1 + p/r)) = 0.01^(1/3.5)
        assert!((bump.width() - 0.01_f64.powf(1.0 / 3.5)).abs() < 1e-15);
        assert!((bump.width() - 0.2682695).abs() < 1e-6);

        // doubling the budget scales the width by 2^(1/3.5)
        let plan2 = lower_bound_adversary(&base, &[0.0], budget(2.0 * eps), &class).unwrap();
        let bump2 = match &plan2.kind {
            PlanKind::DensityPerturbation { bump, .. } => bump.clone(),
            _ => unreachable!(),
        };
        let ratio = bump2.width() / bump.width();
        assert!((ratio - 2.0_f64.powf(1.0 / 3.5)).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn lower_bound_amplitude_shrinks_with_budget() {
        let base = make_gaussian(3.0, 1).unwrap();
        let class = HolderClass::new(2.0, 0.1, 1).unwrap();
        let mut last_width = f64::INFINITY;
        let mut last_tau = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let plan = lower_bound_adversary(&base, &[0.0], budget(eps), &class).unwrap();
            let bump = match &plan.kind {
                PlanKind::DensityPerturbation { bump, .. } => bump.clone(),
                _ => unreachable!(),
            };
            assert!(bump.width() < last_width);
            assert!(bump.amplitude() < last_tau);
            last_width = bump.width();
            last_tau = bump.amplitude();
        }
    }

    #[test]
    fn lower_bound_peaks_at_the_target_point() {
        let base = make_gaussian(3.0, 1).unwrap();
        let class = HolderClass::new(2.0, 0.1, 1).unwrap();
        let plan = lower_bound_adversary(&base, &[0.3], budget(0.05), &class).unwrap();
        let (perturbed, bump) = match &plan.kind {
            PlanKind::DensityPerturbation { perturbed, bump, .. } => (perturbed, bump),
            _ => unreachable!(),
        };
        let g_at_target = perturbed.pdf(&[0.3]) - base.pdf(&[0.3]);
        assert!((g_at_target - bump.amplitude()).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_certified_within_budget_on_random_draws() {
        use rand::Rng;
        let mut rng = crate::numeric::seeded_rng(40);
        let base = make_gaussian(3.0, 1).unwrap();
        for _ in 0..50 {
            let s = 0.5 + 2.5 * rng.gen::<f64>();
            let eps = 10.0_f64.powf(-3.0 + 2.0 * rng.gen::<f64>());
            let class = HolderClass::new(s, 0.1, 1).unwrap();
            let plan = lower_bound_adversary(&base, &[0.0], budget(eps), &class).unwrap();
            assert!(
                plan.certificate.value <= eps + 1e-12,
                "s={s}, eps={eps}: certificate {}",
                plan.certificate.value
            );
        }
    }

    #[test]
    fn lower_bound_floor_violation_is_a_contract_error() {
        let base = make_gaussian(3.0, 1).unwrap();
        let class = HolderClass::new(2.0, 5.0, 1).unwrap(); // amplitude far above the floor
        assert!(matches!(
            lower_bound_adversary(&base, &[0.0], budget(0.3), &class),
            Err(Error::Contract { .. })
        ));
    }

    #[test]
    fn t2_bound_trivial_and_gaussian_shift() {
        let base = make_gaussian(1.0, 1).unwrap();
        assert!(t2_budget_bound(&base, &base).unwrap() < 1e-9);

        // mean shift saturates the transportation-cost inequality:
        // KL = m^2 / 2, bound = sqrt(2 KL) = m = exact W2
        let shifted = Density::gaussian(vec![0.2], 1.0).unwrap();
        let bound = t2_budget_bound(&base, &shifted).unwrap();
        assert!((bound - 0.2).abs() < 1e-6, "bound {bound}");
    }

    #[test]
    fn t2_bound_needs_gaussian_base() {
        let base = make_gaussian(3.0, 1).unwrap();
        let b = make_bump(vec![0.0], 0.5, 0.05, "poly4").unwrap();
        let perturbed = perturb(&base, &b).unwrap();
        assert!(t2_budget_bound(&perturbed, &base).is_err());
    }

    #[test]
    fn amplitude_sweep_ratio_table() {
        // Both certificates are amplitude-linear at small amplitude; the
        // transportation-cost bound is looser by a roughly constant factor
        // determined by the bump width, not the amplitude.
        let base = make_gaussian(1.0, 1).unwrap();
        let taus = [0.01, 0.02, 0.04, 0.08];
        let mut t2s = Vec::new();
        let mut bbs = Vec::new();
        let mut exacts = Vec::new();
        for &tau in &taus {
            let b = make_bump(vec![0.0], 0.5, tau, "poly4").unwrap();
            let field = bump_field(&b).unwrap();
            let perturbed = perturb(&base, &b).unwrap();
            t2s.push(t2_budget_bound(&base, &perturbed).unwrap());
            bbs.push(bb_certificate(&base, &b, &field, 2.0, 2.0).unwrap().value);
            exacts.push(w_exact_1d_densities(&base, &perturbed, 2.0).unwrap().value);
        }
        let slope = |ys: &[f64]| {
            let n = ys.len() as f64;
            let xs: Vec<f64> = taus.iter().map(|t: &f64| t.ln()).collect();
            let lys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            let xm = xs.iter().sum::<f64>() / n;
            let ym = lys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&lys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
            sxy / sxx
        };
        assert!((slope(&bbs) - 1.0).abs() < 1e-6, "bb slope {}", slope(&bbs));
        assert!((slope(&exacts) - 1.0).abs() < 0.01, "w2 slope {}", slope(&exacts));
        assert!((slope(&t2s) - 1.0).abs() < 0.05, "t2 slope {}", slope(&t2s));
        for ((t2, bb), exact) in t2s.iter().zip(&bbs).zip(&exacts) {
            assert!(bb >= exact, "dominance: bb {bb} vs exact {exact}");
            let ratio = t2 / bb;
            assert!((2.5..3.5).contains(&ratio), "t2/bb ratio {ratio}");
        }
    }

    #[test]
    fn plan_descriptions_serialize() {
        let plan = shift_adversary(vec![0.0], budget(0.1), vec![1.0], 0.5).unwrap();
        let desc = plan.describe();
        assert_eq!(desc.kind, "map-shift");
        let text = toml::to_string(&desc).unwrap();
        assert!(text.contains("map-shift"));
    }
}
