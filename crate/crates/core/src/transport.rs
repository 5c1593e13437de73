//! Transport costs: exact Wasserstein evaluation at desk scale and certified
//! upper bounds from the dynamic formulation.
//!
//! Three evaluators live here:
//!
//! - [`w_exact_1d`]: the quantile-coupling integral, exact in one dimension
//!   for convex ground costs;
//! - [`w_exact_discrete`]: exact assignment between small equal-size point
//!   clouds;
//! - [`bb_certificate`]: the dynamic-formulation upper bound for density
//!   perturbations, built from a divergence field and the base density floor.
//!
//! A certificate is an upper bound on the true cost by construction; the test
//! suites cross-check dominance against the exact evaluators.

use serde::{Deserialize, Serialize};

use crate::assignment::solve_min_assignment;
use crate::density::{density_floor, Bump, Density, DivergenceField};
use crate::error::{Error, Result};
use crate::numeric::lq_norm;
use crate::quad::{integrate_open_unit, simpson};

/// Largest point-cloud size accepted by the exact assignment evaluator.
pub const MAX_ASSIGNMENT_SIZE: usize = 1024;

/// Default tolerance for the continuity-equation residual check.
pub const DIVERGENCE_RESIDUAL_TOL: f64 = 1e-4;

/// How a transport cost was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostMethod {
    Quantile1d,
    Assignment,
    BbCertificate,
}

/// A computed Wasserstein-`(q, r)` cost or certified upper bound.
///
/// `value` is always the distance itself (the `1/r`-th power of the average
/// transport cost), never the raw `r`-th power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCost {
    pub value: f64,
    pub method: CostMethod,
    pub q: f64,
    pub r: f64,
    /// Instance sizes and residuals, depending on the method.
    pub meta: CostMeta,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostMeta {
    /// Point count for assignment instances.
    pub n: Option<usize>,
    /// Continuity-equation residual for certificates.
    pub divergence_residual: Option<f64>,
    /// Density floor used by certificates.
    pub floor: Option<f64>,
}

fn validate_orders(q: f64, r: f64) -> Result<()> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "norm index q must satisfy q >= 1, got {q}"
        )));
    }
    if !(r >= 1.0) || r.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "power r must satisfy 1 <= r < infinity, got {r}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exact 1-D cost via quantile coupling
// ---------------------------------------------------------------------------

/// Exact `W_r` between two one-dimensional distributions given their quantile
/// functions: `( int_0^1 |F^-1(u) - G^-1(u)|^r du )^(1/r)`.
///
/// The monotone coupling is optimal for convex costs, so this is exact.
/// Quadrature is adaptive and avoids the endpoints.
pub fn w_exact_1d<F, G>(mu_quantile: F, nu_quantile: G, r: f64) -> Result<TransportCost>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    validate_orders(1.0, r)?;
    let raw = integrate_open_unit(
        |u| (mu_quantile(u) - nu_quantile(u)).abs().powf(r),
        1e-11,
        "quantile coupling",
    )?;
    Ok(TransportCost {
        value: raw.max(0.0).powf(1.0 / r),
        method: CostMethod::Quantile1d,
        q: 1.0,
        r,
        meta: CostMeta::default(),
    })
}

/// [`w_exact_1d`] applied to two one-dimensional densities.
pub fn w_exact_1d_densities(mu: &Density, nu: &Density, r: f64) -> Result<TransportCost> {
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(Error::InvalidParameter(
            "quantile coupling requires one-dimensional densities".into(),
        ));
    }
    w_exact_1d(
        |u| mu.quantile(u).expect("validated 1-d density"),
        |u| nu.quantile(u).expect("validated 1-d density"),
        r,
    )
}

// ---------------------------------------------------------------------------
// Exact discrete cost via assignment
// ---------------------------------------------------------------------------

/// Exact `W_{q,r}` between two equal-size point clouds:
/// minimal `((1/n) sum ||a_i - b_perm(i)||_q^r)^(1/r)` over permutations.
pub fn w_exact_discrete(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    q: f64,
    r: f64,
) -> Result<TransportCost> {
    validate_orders(q, r)?;
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "point clouds must have equal sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("point clouds must be nonempty".into()));
    }
    if a.len() > MAX_ASSIGNMENT_SIZE {
        return Err(Error::Capacity {
            what: "assignment instance".into(),
            limit: MAX_ASSIGNMENT_SIZE,
            got: a.len(),
        });
    }
    let n = a.len();
    let mut diff = vec![0.0; a[0].len()];
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|ai| {
            b.iter()
                .map(|bj| {
                    for (d, (x, y)) in diff.iter_mut().zip(ai.iter().zip(bj)) {
                        *d = x - y;
                    }
                    lq_norm(&diff, q).powf(r)
                })
                .collect()
        })
        .collect();
    let assignment = solve_min_assignment(&cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(TransportCost {
        value: (total / n as f64).max(0.0).powf(1.0 / r),
        method: CostMethod::Assignment,
        q,
        r,
        meta: CostMeta {
            n: Some(n),
            ..CostMeta::default()
        },
    })
}

// ---------------------------------------------------------------------------
// Dynamic-formulation certificate
// ---------------------------------------------------------------------------

/// Certified upper bound on `W_{q,r}(base +- g, base)` for a mean-zero bump
/// `g` with divergence field `U`:
///
/// `( (2^(r-1) / c_I^(r-1)) * int ||U(x)||_q^r dx )^(1/r)`
///
/// where `c_I` is the measured base floor on the bump box. The density path
/// `rho_t = base + t g` with velocity `v_t = -U / rho_t` satisfies the
/// continuity equation because `rho_t v_t = -U` is independent of `t`; the
/// discrete analogue checked here is the finite-difference divergence
/// residual `||div U - g||_inf` on a validation grid.
pub fn bb_certificate(
    base: &Density,
    bump: &Bump,
    field: &DivergenceField,
    q: f64,
    r: f64,
) -> Result<TransportCost> {
    validate_orders(q, r)?;
    if base.dim() != bump.dim() || field.dim() != bump.dim() {
        return Err(Error::InvalidParameter(
            "base, bump, and field dimensions must agree".into(),
        ));
    }
    let floor = density_floor(base, &bump.support_box());
    if floor <= 0.0 {
        return Err(Error::Contract {
            what: "base density floor on the bump box must be positive".into(),
            measured: floor,
            limit: 0.0,
        });
    }
    let sup = bump.sup_abs();
    if sup > floor / 2.0 {
        return Err(Error::Contract {
            what: format!("bump sup-norm must not exceed half the floor c_I = {floor:.6e}"),
            measured: sup,
            limit: floor / 2.0,
        });
    }
    let residual = if bump.amplitude() == 0.0 {
        0.0
    } else {
        let grid = match bump.dim() {
            1 => 512,
            2 => 256,
            _ => 48,
        };
        field.divergence_residual(grid)
    };
    let tol = DIVERGENCE_RESIDUAL_TOL * bump.sup_abs().max(1e-12);
    if residual > tol.max(DIVERGENCE_RESIDUAL_TOL) {
        return Err(Error::Contract {
            what: "divergence of U must match the bump on the validation grid".into(),
            measured: residual,
            limit: tol.max(DIVERGENCE_RESIDUAL_TOL),
        });
    }
    let action = field.norm_integral(q, r)?;
    let value = (2.0_f64.powf(r - 1.0) / floor.powf(r - 1.0) * action).powf(1.0 / r);
    Ok(TransportCost {
        value,
        method: CostMethod::BbCertificate,
        q,
        r,
        meta: CostMeta {
            n: None,
            divergence_residual: Some(residual),
            floor: Some(floor),
        },
    })
}

// ---------------------------------------------------------------------------
// Interpolation identity
// ---------------------------------------------------------------------------

/// Report of [`interpolation_identity_check`].
#[derive(Debug, Clone)]
pub struct InterpolationReport {
    /// `E_Q[phi] - E_P[phi]`, with `Q` the pushforward of `P` under `T`.
    pub lhs: f64,
    /// `int_0^1 E_P[phi'(T_t(X)) (T(X) - X)] dt` with `T_t = (1-t) id + t T`.
    pub rhs: f64,
    pub discrepancy: f64,
}

/// Verifies by quadrature the fundamental-theorem identity along the linear
/// interpolation of a one-dimensional transport map:
/// `E_Q[phi] - E_P[phi] = int_0^1 E_P[phi'(T_t(X)) (T(X) - X)] dt`.
pub fn interpolation_identity_check<Phi, DPhi, Map>(
    phi: Phi,
    phi_prime: DPhi,
    map: Map,
    density: &Density,
    panels: usize,
) -> Result<InterpolationReport>
where
    Phi: Fn(f64) -> f64,
    DPhi: Fn(f64) -> f64,
    Map: Fn(f64) -> f64,
{
    if density.dim() != 1 {
        return Err(Error::InvalidParameter(
            "interpolation identity check is one-dimensional".into(),
        ));
    }
    let bx = density.quadrature_box();
    let (lo, hi) = (bx.lo[0], bx.hi[0]);
    let n = panels.max(512);

    let lhs = simpson(
        |x| (phi(map(x)) - phi(x)) * density.pdf(&[x]),
        lo,
        hi,
        n,
    );
    let rhs = simpson(
        |t| {
            simpson(
                |x| {
                    let displacement = map(x) - x;
                    let interpolated = (1.0 - t) * x + t * map(x);
                    phi_prime(interpolated) * displacement * density.pdf(&[x])
                },
                lo,
                hi,
                n,
            )
        },
        0.0,
        1.0,
        128,
    );
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::Numeric {
            what: "interpolation identity quadrature produced non-finite values".into(),
            residual: f64::NAN,
        });
    }
    Ok(InterpolationReport {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}

// ---------------------------------------------------------------------------
// Hölder split
// ---------------------------------------------------------------------------

/// Two-factor bound from the Hölder inequality on the interpolated bias
/// integrand: returns `gradient_integral^(1/r*) * cost_budget`, where
/// `gradient_integral` is `int ||grad phi||_{q*}^{r*} rho_t` and `r*` is the
/// conjugate of `r`.
pub fn holder_bias_split(gradient_integral: f64, cost_budget: f64, r: f64) -> Result<f64> {
    if r <= 1.0 {
        return Err(Error::InvalidParameter(
            "r = 1 is the duality case and is not supported here; need r > 1".into(),
        ));
    }
    if gradient_integral < 0.0 || cost_budget < 0.0 {
        return Err(Error::InvalidParameter(
            "gradient integral and budget must be nonnegative".into(),
        ));
    }
    let r_conj = r / (r - 1.0);
    Ok(gradient_integral.powf(1.0 / r_conj) * cost_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{bump_field, make_bump, make_gaussian, perturb};

    fn gaussian_quantile(mean: f64, sigma: f64) -> impl Fn(f64) -> f64 {
        move |u| {
            mean + sigma
                * crate::density::std_normal_quantile(u.clamp(1e-300, 1.0 - 1e-16))
        }
    }

    #[test]
    fn w1d_identical_distributions() {
        let c = w_exact_1d(gaussian_quantile(0.0, 1.0), gaussian_quantile(0.0, 1.0), 2.0)
            .unwrap();
        assert!(c.value.abs() < 1e-10);
    }

    #[test]
    fn w1d_translation() {
        for r in [1.0, 2.0, 3.5] {
            let c = w_exact_1d(gaussian_quantile(0.0, 1.0), gaussian_quantile(3.0, 1.0), r)
                .unwrap();
            assert!((c.value - 3.0).abs() < 1e-8, "r={r}: {}", c.value);
        }
    }

    #[test]
    fn w1d_gaussian_scale_difference() {
        // W2(N(0,1), N(0,2)) = |sigma1 - sigma2| = 1
        let c = w_exact_1d(gaussian_quantile(0.0, 1.0), gaussian_quantile(0.0, 2.0), 2.0)
            .unwrap();
        assert!((c.value - 1.0).abs() < 1e-8, "{}", c.value);
    }

    #[test]
    fn w1d_monotone_in_r() {
        let costs: Vec<f64> = [1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|&r| {
                w_exact_1d(gaussian_quantile(0.0, 1.0), gaussian_quantile(0.0, 1.7), r)
                    .unwrap()
                    .value
            })
            .collect();
        for w in costs.windows(2) {
            assert!(w[0] <= w[1] + 1e-10, "{costs:?}");
        }
    }

    #[test]
    fn discrete_identity_and_translation() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, 0.5]];
        let c = w_exact_discrete(&a, &a, 2.0, 2.0).unwrap();
        assert!(c.value.abs() < 1e-12);

        for q in [1.0, 2.0, f64::INFINITY] {
            let v = [0.3, -0.8];
            let b: Vec<Vec<f64>> = a
                .iter()
                .map(|p| vec![p[0] + v[0], p[1] + v[1]])
                .collect();
            let c = w_exact_discrete(&a, &b, q, 2.0).unwrap();
            assert!(
                (c.value - lq_norm(&v, q)).abs() < 1e-12,
                "q={q}: {}",
                c.value
            );
        }
    }

    #[test]
    fn discrete_matches_factorial_brute_force() {
        use rand::Rng;
        let mut rng = crate::numeric::seeded_rng(11);
        let n = 6;
        let a: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let got = w_exact_discrete(&a, &b, 2.0, 2.0).unwrap().value;

        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        visit_permutations(&mut perm, 0, &mut |p| {
            let mut total = 0.0;
            for (i, &j) in p.iter().enumerate() {
                let d = [a[i][0] - b[j][0], a[i][1] - b[j][1]];
                total += lq_norm(&d, 2.0).powi(2);
            }
            best = best.min(total);
        });
        let brute = (best / n as f64).sqrt();
        assert!((got - brute).abs() < 1e-12, "got {got}, brute {brute}");
    }

    fn visit_permutations(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            visit_permutations(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }

    #[test]
    fn discrete_rejects_bad_instances() {
        let a = vec![vec![0.0]];
        let b = vec![vec![0.0], vec![1.0]];
        assert!(w_exact_discrete(&a, &b, 2.0, 2.0).is_err());
        let big: Vec<Vec<f64>> = (0..MAX_ASSIGNMENT_SIZE + 1).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            w_exact_discrete(&big, &big, 2.0, 2.0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn certificate_zero_amplitude_is_zero() {
        let base = make_gaussian(3.0, 1).unwrap();
        let bump = make_bump(vec![0.0], 0.5, 0.0, "poly4").unwrap();
        let field = bump_field(&bump).unwrap();
        let c = bb_certificate(&base, &bump, &field, 2.0, 2.0).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn certificate_matches_closed_form_in_1d_r2() {
        // certificate^2 = (2 / c_I) * int G^2 with U = G the primitive of g
        let base = make_gaussian(3.0, 1).unwrap();
        let bump = make_bump(vec![0.0], 0.5, 0.05, "poly4").unwrap();
        let field = bump_field(&bump).unwrap();
        let cert = bb_certificate(&base, &bump, &field, 2.0, 2.0).unwrap();
        let g_sq = simpson(|x| field.component_1(&[x]).powi(2), -0.5, 0.5, 4096);
        let floor = cert.meta.floor.unwrap();
        let expected = (2.0 / floor * g_sq).sqrt();
        assert!((cert.value - expected).abs() < 1e-12);
        assert!(cert.meta.divergence_residual.unwrap() <= 1e-4);
    }

    #[test]
    fn certificate_dominates_exact_1d_cost() {
        let base = make_gaussian(3.0, 1).unwrap();
        let bump = make_bump(vec![0.0], 0.5, 0.05, "poly4").unwrap();
        let field = bump_field(&bump).unwrap();
        let cert = bb_certificate(&base, &bump, &field, 2.0, 2.0).unwrap();
        let perturbed = perturb(&base, &bump).unwrap();
        let exact = w_exact_1d_densities(&base, &perturbed, 2.0).unwrap();
        let ratio = cert.value / exact.value;
        assert!(
            (1.0..10.0).contains(&ratio),
            "cert {}, exact {}, ratio {ratio}",
            cert.value,
            exact.value
        );
    }

    #[test]
    fn certificate_rejects_floor_violations() {
        let base = make_gaussian(3.0, 1).unwrap();
        let bump = make_bump(vec![0.0], 0.5, 0.2, "poly4").unwrap();
        let field = bump_field(&bump).unwrap();
        assert!(matches!(
            bb_certificate(&base, &bump, &field, 2.0, 2.0),
            Err(Error::Contract { .. })
        ));
    }

    #[test]
    fn metric_axioms_on_exact_evaluators() {
        use rand::Rng;
        let mut rng = crate::numeric::seeded_rng(5);
        let n = 5;
        let clouds: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect())
            .collect();
        let d = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| {
            w_exact_discrete(x, y, 2.0, 2.0).unwrap().value
        };
        let (ab, ba) = (d(&clouds[0], &clouds[1]), d(&clouds[1], &clouds[0]));
        assert!((ab - ba).abs() < 1e-10, "symmetry: {ab} vs {ba}");
        assert!(d(&clouds[0], &clouds[0]) < 1e-10);
        let (ac, bc) = (d(&clouds[0], &clouds[2]), d(&clouds[1], &clouds[2]));
        assert!(ac <= ab + bc + 1e-8, "triangle: {ac} > {ab} + {bc}");
    }

    #[test]
    fn interpolation_identity_trivial_cases() {
        let p = make_gaussian(1.0, 1).unwrap();
        let report =
            interpolation_identity_check(|x| x * x, |x| 2.0 * x, |x| x, &p, 2048).unwrap();
        assert!(report.lhs.abs() < 1e-12);
        assert!(report.rhs.abs() < 1e-12);

        // constant shift with linear phi: both sides equal slope * c exactly
        let (slope, c) = (1.7, 0.3);
        let report = interpolation_identity_check(
            |x| slope * x + 2.0,
            |_| slope,
            |x| x + c,
            &p,
            2048,
        )
        .unwrap();
        assert!((report.lhs - slope * c).abs() < 1e-10, "lhs {}", report.lhs);
        assert!((report.rhs - slope * c).abs() < 1e-10, "rhs {}", report.rhs);
    }

    #[test]
    fn interpolation_identity_smooth_map() {
        // T(x) = x + eps * bump, phi a gaussian kernel section
        let p = make_gaussian(1.0, 1).unwrap();
        let bump = make_bump(vec![0.3], 0.6, 1.0, "poly4").unwrap();
        let eps = 0.05;
        let h = 0.4;
        let phi = move |x: f64| std_pdf((x - 0.1) / h) / h;
        let phi_prime = move |x: f64| {
            let u = (x - 0.1) / h;
            -u * std_pdf(u) / (h * h)
        };
        let report = interpolation_identity_check(
            phi,
            phi_prime,
            |x| x + eps * bump.eval(&[x]),
            &p,
            4096,
        )
        .unwrap();
        assert!(report.discrepancy <= 1e-6, "discrepancy {}", report.discrepancy);
    }

    fn std_pdf(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn holder_split_arithmetic() {
        assert_eq!(holder_bias_split(4.0, 0.0, 2.0).unwrap(), 0.0);
        assert!((holder_bias_split(4.0, 0.1, 2.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(holder_bias_split(4.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn translation_leaves_costs_unchanged() {
        let base_a = gaussian_quantile(0.0, 1.0);
        let base_b = gaussian_quantile(0.5, 1.3);
        let shifted_a = gaussian_quantile(2.0, 1.0);
        let shifted_b = gaussian_quantile(2.5, 1.3);
        let c0 = w_exact_1d(&base_a, &base_b, 2.0).unwrap().value;
        let c1 = w_exact_1d(&shifted_a, &shifted_b, 2.0).unwrap().value;
        assert!((c0 - c1).abs() < 1e-10);
    }
}
