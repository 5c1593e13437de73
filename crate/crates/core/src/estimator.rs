//! Kernel density estimation with classical and contamination-aware bandwidth
//! rules, plus evaluators for the theoretical bias and risk bounds.

use serde::{Deserialize, Serialize};

use crate::contamination::WassersteinBudget;
use crate::density::{HolderClass, Sample};
use crate::error::{Error, Result};
use crate::numeric::{lq_norm, pairwise_sum_indexed};
use crate::quad::{default_panels, simpson_box, SupportBox};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// A product smoothing kernel built from a 1-D profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Kernel {
    profile: KernelProfile,
    dim: usize,
    /// Moments `1..order-1` of the 1-D profile vanish.
    order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum KernelProfile {
    Gaussian,
    /// Polynomial kernel on `[-1, 1]` from Legendre orthogonalization,
    /// stored as monomial coefficients.
    Legendre { coeffs: Vec<f64> },
}

/// Monomial coefficients of the Legendre polynomials `P_0..=P_l`.
fn legendre_monomials(max_degree: usize) -> Vec<Vec<f64>> {
    let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
    if max_degree >= 1 {
        polys.push(vec![0.0, 1.0]);
    }
    for j in 1..max_degree {
        // (j+1) P_{j+1} = (2j+1) u P_j - j P_{j-1}
        let jf = j as f64;
        let mut next = vec![0.0; j + 2];
        for (i, c) in polys[j].iter().enumerate() {
            next[i + 1] += (2.0 * jf + 1.0) * c;
        }
        for (i, c) in polys[j - 1].iter().enumerate() {
            next[i] -= jf * c;
        }
        for c in &mut next {
            *c /= jf + 1.0;
        }
        polys.push(next);
    }
    polys
}

fn eval_poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

impl Kernel {
    /// Standard normal product kernel (order 2, infinitely smooth).
    pub fn gaussian(dim: usize) -> Result<Kernel> {
        if dim == 0 || dim > 3 {
            return Err(Error::Capacity {
                what: "kernel dimension".into(),
                limit: 3,
                got: dim,
            });
        }
        Ok(Kernel {
            profile: KernelProfile::Gaussian,
            dim,
            order: 2,
        })
    }

    /// Polynomial kernel of order `m` (moments `1..m-1` vanish) supported on
    /// `[-1, 1]`, built by Legendre orthogonalization:
    /// `K(u) = sum_j phi_j(0) phi_j(u)` over degrees `j <= m-1`.
    pub fn polynomial(order: usize, dim: usize) -> Result<Kernel> {
        if dim == 0 || dim > 3 {
            return Err(Error::Capacity {
                what: "kernel dimension".into(),
                limit: 3,
                got: dim,
            });
        }
        if order < 2 || order > 12 {
            return Err(Error::InvalidParameter(format!(
                "polynomial kernel order must lie in [2, 12], got {order}"
            )));
        }
        let max_degree = order - 1;
        let polys = legendre_monomials(max_degree);
        let mut coeffs = vec![0.0; max_degree + 1];
        for (j, p) in polys.iter().enumerate() {
            if j % 2 == 1 {
                continue; // odd-degree Legendre polynomials vanish at 0
            }
            let norm = ((2.0 * j as f64 + 1.0) / 2.0).sqrt();
            let at_zero = norm * eval_poly(p, 0.0);
            for (i, c) in p.iter().enumerate() {
                coeffs[i] += at_zero * norm * c;
            }
        }
        Ok(Kernel {
            profile: KernelProfile::Legendre { coeffs },
            dim,
            order,
        })
    }

    /// Kernel registry lookup: `gaussian` or `poly{m}`.
    pub fn by_name(name: &str, dim: usize) -> Result<Kernel> {
        if name == "gaussian" {
            Kernel::gaussian(dim)
        } else if let Some(m) = name.strip_prefix("poly").and_then(|d| d.parse().ok()) {
            Kernel::polynomial(m, dim)
        } else {
            Err(Error::NotFound(format!("kernel '{name}'")))
        }
    }

    /// Registered kernel names.
    pub fn registry() -> Vec<String> {
        vec!["gaussian".into(), "poly3".into(), "poly4".into(), "poly6".into()]
    }

    /// Kernel choice for a smoothness exponent: Gaussian up to `s = 2`, a
    /// polynomial kernel of order `floor(s) + 1` above.
    pub fn for_smoothness(s: f64, dim: usize) -> Result<Kernel> {
        if s <= 2.0 {
            Kernel::gaussian(dim)
        } else {
            Kernel::polynomial(s.floor() as usize + 1, dim)
        }
    }

    pub fn name(&self) -> String {
        match &self.profile {
            KernelProfile::Gaussian => "gaussian".into(),
            KernelProfile::Legendre { .. } => format!("poly{}", self.order),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Radius beyond which the 1-D profile vanishes; `None` for the Gaussian.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.profile {
            KernelProfile::Gaussian => None,
            KernelProfile::Legendre { .. } => Some(1.0),
        }
    }

    /// Lipschitz constant of the 1-D profile, when it is Lipschitz on all of
    /// `R` (the polynomial kernels jump at the support boundary).
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.profile {
            // sup |u phi(u)| at u = 1: (2 pi e)^(-1/2)
            KernelProfile::Gaussian => Some((2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt().recip()),
            KernelProfile::Legendre { .. } => None,
        }
    }

    pub fn grad_available(&self) -> bool {
        matches!(self.profile, KernelProfile::Gaussian)
    }

    pub fn eval_1d(&self, u: f64) -> f64 {
        match &self.profile {
            KernelProfile::Gaussian => crate::density::std_normal_pdf(u),
            KernelProfile::Legendre { coeffs } => {
                // closed support: the boundary value is the polynomial limit,
                // which keeps quadrature of the moments exact
                if u.abs() > 1.0 {
                    0.0
                } else {
                    eval_poly(coeffs, u)
                }
            }
        }
    }

    /// Derivative of the 1-D profile (inside the support).
    pub fn grad_1d(&self, u: f64) -> f64 {
        match &self.profile {
            KernelProfile::Gaussian => -u * crate::density::std_normal_pdf(u),
            KernelProfile::Legendre { coeffs } => {
                if u.abs() > 1.0 {
                    0.0
                } else {
                    coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (i, c)| acc * u + i as f64 * c)
                }
            }
        }
    }

    /// Product kernel value at `u` in `R^p`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        u.iter().map(|&ui| self.eval_1d(ui)).product()
    }

    /// `K((x - x0)/h)` without allocating.
    fn eval_scaled(&self, x: &[f64], x0: &[f64], h: f64) -> f64 {
        let mut v = 1.0;
        for (xj, cj) in x.iter().zip(x0) {
            v *= self.eval_1d((xj - cj) / h);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Gradient of the product kernel at `u`.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = u.iter().map(|&ui| self.eval_1d(ui)).collect();
        (0..u.len())
            .map(|j| {
                let mut g = self.grad_1d(u[j]);
                for (i, v) in vals.iter().enumerate() {
                    if i != j {
                        g *= v;
                    }
                }
                g
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Bandwidth rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthKind {
    Classical,
    Robust,
}

/// Bandwidth selection rule `h(n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub kind: BandwidthKind,
    /// Constant multiplier, default 1.
    pub c: f64,
    pub class: HolderClass,
    /// Budget term; present for robust rules.
    pub budget: Option<WassersteinBudget>,
}

impl BandwidthRule {
    pub fn classical(c: f64, class: HolderClass) -> Result<BandwidthRule> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth constant must be positive, got {c}"
            )));
        }
        Ok(BandwidthRule {
            kind: BandwidthKind::Classical,
            c,
            class,
            budget: None,
        })
    }

    pub fn robust(c: f64, class: HolderClass, budget: WassersteinBudget) -> Result<BandwidthRule> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth constant must be positive, got {c}"
            )));
        }
        Ok(BandwidthRule {
            kind: BandwidthKind::Robust,
            c,
            class,
            budget: Some(budget),
        })
    }

    /// `classical: c n^(-1/(2s+p))`;
    /// `robust: c max(n^(-1/(2s+p)), epsilon^(1/(s+1+p/r)))`.
    pub fn bandwidth(&self, n: usize) -> f64 {
        let s = self.class.smoothness();
        let p = self.class.dim() as f64;
        let n_term = (n.max(1) as f64).powf(-1.0 / (2.0 * s + p));
        match (self.kind, &self.budget) {
            (BandwidthKind::Classical, _) | (BandwidthKind::Robust, None) => self.c * n_term,
            (BandwidthKind::Robust, Some(budget)) => {
                let eps_term = if budget.epsilon() > 0.0 {
                    budget.epsilon().powf(1.0 / (s + 1.0 + p / budget.r()))
                } else {
                    0.0
                };
                self.c * n_term.max(eps_term)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// KDE
// ---------------------------------------------------------------------------

/// Kernel density estimate `(1/(n h^p)) sum_i K((X_i - x0)/h)`.
///
/// The sum is accumulated in pairwise order, so the value is bit-identical
/// across runs regardless of parallelism elsewhere.
pub fn kde(sample: &Sample, x0: &[f64], kernel: &Kernel, h: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("kde needs a nonempty sample".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let p = sample.dim();
    if x0.len() != p || kernel.dim() != p {
        return Err(Error::InvalidParameter(
            "sample, evaluation point, and kernel dimensions must agree".into(),
        ));
    }
    let n = sample.n();
    let total = pairwise_sum_indexed(0, n, |i| kernel.eval_scaled(sample.point(i), x0, h));
    Ok(total / (n as f64 * h.powi(p as i32)))
}

// ---------------------------------------------------------------------------
// Bias and risk bounds
// ---------------------------------------------------------------------------

/// Lipschitz/Jensen contamination-bias bound `lipschitz * epsilon / h^2`
/// (the one-dimensional `q = r = 2` bound).
pub fn bias_bound_jensen(epsilon: f64, h: f64, lipschitz: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    if epsilon < 0.0 || lipschitz < 0.0 {
        return Err(Error::InvalidParameter(
            "epsilon and lipschitz constant must be nonnegative".into(),
        ));
    }
    Ok(lipschitz * epsilon / (h * h))
}

fn conjugate(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

/// Hölder-split contamination-bias bound
/// `rho_max^(1/r*) ( int ||grad_z [h^-p K((x0-z)/h)]||_{q*}^{r*} dz )^(1/r*) epsilon`,
/// computed by quadrature; scales as `epsilon * h^-(1 + p/r)`.
pub fn bias_bound_sharp(
    epsilon: f64,
    h: f64,
    kernel: &Kernel,
    q: f64,
    r: f64,
    rho_max: f64,
) -> Result<f64> {
    if r <= 1.0 {
        return Err(Error::InvalidParameter(
            "r = 1 is the duality case and is not supported by the gradient split".into(),
        ));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("need q >= 1, got {q}")));
    }
    if !(h > 0.0) || epsilon < 0.0 || rho_max < 0.0 {
        return Err(Error::InvalidParameter(
            "need h > 0, epsilon >= 0, rho_max >= 0".into(),
        ));
    }
    if !kernel.grad_available() {
        return Err(Error::InvalidParameter(format!(
            "kernel '{}' has no evaluable gradient",
            kernel.name()
        )));
    }
    let p = kernel.dim();
    let r_conj = conjugate(r);
    let q_conj = conjugate(q);
    let radius = kernel.support_radius().unwrap_or(12.0) * h;
    let bx = SupportBox::new(vec![-radius; p], vec![radius; p])?;
    let scale = h.powi(-(p as i32 + 1));
    let mut u = vec![0.0; p];
    let integral = simpson_box(
        |z| {
            for (uj, zj) in u.iter_mut().zip(z) {
                *uj = zj / h;
            }
            let grad = kernel.gradient(&u);
            (scale * lq_norm(&grad, q_conj)).powf(r_conj)
        },
        &bx,
        default_panels(p),
    )?;
    Ok(rho_max.powf(1.0 / r_conj) * integral.powf(1.0 / r_conj) * epsilon)
}

/// Theoretical risk bound `c1 n^(-2s/(2s+p)) + c2 epsilon^(2s/(s+1+p/r))`;
/// the sum upper-bounds the max of the two rate terms within a factor 2.
pub fn risk_bound_theoretical(
    n: usize,
    budget: &WassersteinBudget,
    class: &HolderClass,
    c1: f64,
    c2: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let eps = budget.epsilon();
    if eps > 1.0 {
        return Err(Error::Domain(format!(
            "rate statement covers epsilon in (0, 1]; got {eps}"
        )));
    }
    let s = class.smoothness();
    let p = class.dim() as f64;
    let n_term = (n as f64).powf(-2.0 * s / (2.0 * s + p));
    let eps_term = if eps > 0.0 {
        eps.powf(2.0 * s / (s + 1.0 + p / budget.r()))
    } else {
        0.0
    };
    Ok(c1 * n_term + c2 * eps_term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::make_gaussian;
    use crate::quad::simpson;

    #[test]
    fn kernels_integrate_to_one() {
        for name in ["gaussian", "poly3", "poly4", "poly6"] {
            let k = Kernel::by_name(name, 1).unwrap();
            let radius = k.support_radius().unwrap_or(12.0);
            let mass = simpson(|u| k.eval_1d(u), -radius, radius, 8192);
            assert!((mass - 1.0).abs() < 1e-8, "{name}: mass {mass}");
        }
    }

    #[test]
    fn kernel_moments_vanish_up_to_order() {
        for name in ["poly3", "poly4", "poly6"] {
            let k = Kernel::by_name(name, 1).unwrap();
            for j in 1..k.order() {
                let m = simpson(|u| u.powi(j as i32) * k.eval_1d(u), -1.0, 1.0, 8192);
                assert!(m.abs() < 1e-8, "{name}: moment {j} = {m}");
            }
        }
        // the gaussian has order exactly 2
        let g = Kernel::gaussian(1).unwrap();
        let m1 = simpson(|u| u * g.eval_1d(u), -12.0, 12.0, 8192);
        let m2 = simpson(|u| u * u * g.eval_1d(u), -12.0, 12.0, 8192);
        assert!(m1.abs() < 1e-10);
        assert!((m2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn poly3_kernel_closed_form() {
        // Legendre degrees {0, 2}: K(u) = 9/8 - 15 u^2 / 8 on [-1, 1]
        let k = Kernel::polynomial(3, 1).unwrap();
        assert!((k.eval_1d(0.0) - 9.0 / 8.0).abs() < 1e-12);
        assert!((k.eval_1d(0.5) - (9.0 - 15.0 * 0.25) / 8.0).abs() < 1e-12);
        assert!((k.eval_1d(1.0) + 0.75).abs() < 1e-12);
        assert_eq!(k.eval_1d(1.0001), 0.0);
    }

    #[test]
    fn kernel_registry_lookup() {
        assert!(Kernel::by_name("gaussian", 1).is_ok());
        assert!(Kernel::by_name("poly4", 2).is_ok());
        assert!(matches!(
            Kernel::by_name("box", 1),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn gaussian_gradient_matches_finite_differences() {
        let k = Kernel::gaussian(2).unwrap();
        let u = [0.3, -0.7];
        let grad = k.gradient(&u);
        let d = 1e-6;
        for j in 0..2 {
            let mut up = u;
            up[j] += d;
            let mut dn = u;
            dn[j] -= d;
            let fd = (k.eval(&up) - k.eval(&dn)) / (2.0 * d);
            assert!((grad[j] - fd).abs() < 1e-9, "axis {j}");
        }
    }

    #[test]
    fn kde_single_point_at_center() {
        let sample = Sample::new(1, vec![0.0]).unwrap();
        let k = Kernel::gaussian(1).unwrap();
        let v = kde(&sample, &[0.0], &k, 1.0).unwrap();
        assert!((v - 0.3989422804014327).abs() < 1e-12);
    }

    #[test]
    fn kde_translation_equivariance() {
        let data = vec![0.1, -0.4, 0.9, 1.4, -2.0];
        let k = Kernel::gaussian(1).unwrap();
        let s0 = Sample::new(1, data.clone()).unwrap();
        let shifted: Vec<f64> = data.iter().map(|x| x + 5.0).collect();
        let s1 = Sample::new(1, shifted).unwrap();
        let v0 = kde(&s0, &[0.2], &k, 0.3).unwrap();
        let v1 = kde(&s1, &[5.2], &k, 0.3).unwrap();
        assert!((v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn kde_monte_carlo_consistency() {
        let d = make_gaussian(1.0, 1).unwrap();
        let sample = d.sample(100_000, 3);
        let k = Kernel::for_smoothness(2.0, 1).unwrap();
        let v = kde(&sample, &[0.0], &k, 0.2).unwrap();
        assert!((v - 0.39894).abs() < 0.02, "kde {v}");
    }

    #[test]
    fn kde_rejects_empty_sample() {
        let s = Sample::new(1, vec![]).unwrap();
        let k = Kernel::gaussian(1).unwrap();
        assert!(matches!(
            kde(&s, &[0.0], &k, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn kde_is_linear_in_the_empirical_measure() {
        let k = Kernel::gaussian(1).unwrap();
        let a = vec![0.1, -0.3, 0.7];
        let b = vec![1.1, 0.4];
        let sa = Sample::new(1, a.clone()).unwrap();
        let sb = Sample::new(1, b.clone()).unwrap();
        let mut joined = a.clone();
        joined.extend_from_slice(&b);
        let sj = Sample::new(1, joined).unwrap();
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let va = kde(&sa, &[0.0], &k, 0.5).unwrap();
        let vb = kde(&sb, &[0.0], &k, 0.5).unwrap();
        let vj = kde(&sj, &[0.0], &k, 0.5).unwrap();
        let mix = (na * va + nb * vb) / (na + nb);
        assert!((vj - mix).abs() < 1e-12);
    }

    #[test]
    fn kde_integrates_to_one_over_x0() {
        let d = make_gaussian(1.0, 1).unwrap();
        let sample = d.sample(2000, 8);
        let k = Kernel::gaussian(1).unwrap();
        let mass = simpson(
            |x0| kde(&sample, &[x0], &k, 0.25).unwrap(),
            -12.0,
            12.0,
            4096,
        );
        assert!((mass - 1.0).abs() < 1e-4, "mass {mass}");
    }

    #[test]
    fn bandwidth_rules() {
        let class = HolderClass::new(2.0, 1.0, 1).unwrap();
        let classical = BandwidthRule::classical(1.0, class).unwrap();
        // s=2, p=1, n=10^4: h = n^(-1/5) = 10^(-0.8)
        let h = classical.bandwidth(10_000);
        assert!((h - 10f64.powf(-0.8)).abs() < 1e-12);

        let robust_zero = BandwidthRule::robust(
            1.0,
            class,
            WassersteinBudget::new(2.0, 2.0, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(robust_zero.bandwidth(10_000), h);

        // large n: the epsilon term dominates at epsilon^(1/(s+1+p/r))
        let robust = BandwidthRule::robust(
            1.0,
            class,
            WassersteinBudget::new(2.0, 2.0, 0.01).unwrap(),
        )
        .unwrap();
        let h_inf = robust.bandwidth(1_000_000_000_000);
        assert!((h_inf - 0.01f64.powf(1.0 / 3.5)).abs() < 1e-12);
        assert!((h_inf - 0.2682695).abs() < 1e-6);
    }

    #[test]
    fn robust_bandwidth_dominates_classical() {
        let class = HolderClass::new(1.5, 1.0, 1).unwrap();
        for eps in [0.0, 1e-6, 1e-3, 0.1, 0.5] {
            let budget = WassersteinBudget::new(2.0, 2.0, eps).unwrap();
            let classical = BandwidthRule::classical(0.7, class).unwrap();
            let robust = BandwidthRule::robust(0.7, class, budget).unwrap();
            for n in [16usize, 256, 65536] {
                let (hc, hr) = (classical.bandwidth(n), robust.bandwidth(n));
                assert!(hr >= hc);
                // equality exactly when the budget term is below the n term
                let threshold = (n as f64).powf(-(class.smoothness() + 1.0 + 0.5) / (2.0 * class.smoothness() + 1.0));
                if eps <= threshold {
                    assert_eq!(hr, hc, "eps {eps} n {n}");
                } else {
                    assert!(hr > hc, "eps {eps} n {n}");
                }
            }
        }
    }

    #[test]
    fn jensen_bound_arithmetic() {
        assert_eq!(bias_bound_jensen(0.0, 0.3, 1.0).unwrap(), 0.0);
        let b1 = bias_bound_jensen(0.01, 0.2, 1.0).unwrap();
        let b2 = bias_bound_jensen(0.01, 0.1, 1.0).unwrap();
        assert!((b2 / b1 - 4.0).abs() < 1e-12);
        assert!((bias_bound_jensen(0.01, 0.1, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(bias_bound_jensen(0.01, 0.0, 1.0).is_err());
    }

    #[test]
    fn sharp_bound_zero_epsilon() {
        let k = Kernel::gaussian(1).unwrap();
        assert_eq!(bias_bound_sharp(0.0, 0.1, &k, 2.0, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sharp_bound_slope_in_h() {
        let k = Kernel::gaussian(1).unwrap();
        let hs = [0.05, 0.08, 0.125, 0.2, 0.3, 0.5];
        let ys: Vec<f64> = hs
            .iter()
            .map(|&h| bias_bound_sharp(0.01, h, &k, 2.0, 2.0, 1.0).unwrap())
            .collect();
        let slope = log_slope(&hs, &ys);
        assert!((slope + 1.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn sharp_bound_beats_jensen_at_small_h() {
        let k = Kernel::gaussian(1).unwrap();
        let lip = k.lipschitz().unwrap();
        let eps = 0.001;
        let mut normalized = Vec::new();
        for h in [0.05, 0.08] {
            let sharp = bias_bound_sharp(eps, h, &k, 2.0, 2.0, 0.7979).unwrap();
            let jensen = bias_bound_jensen(eps, h, lip).unwrap();
            assert!(sharp < jensen, "h={h}: sharp {sharp} vs jensen {jensen}");
            normalized.push(sharp / jensen / h.sqrt());
        }
        // the sharp/jensen ratio scales like sqrt(h)
        let spread = normalized[0] / normalized[1];
        assert!((spread - 1.0).abs() < 0.05, "normalized ratios {normalized:?}");
    }

    #[test]
    fn sharp_bound_wins_below_the_crossover_bandwidth() {
        // both bounds are exact power laws in h, so a grid certifies the
        // whole range below the crossover (which sits past h = 0.5 here)
        let k = Kernel::gaussian(1).unwrap();
        let lip = k.lipschitz().unwrap();
        for i in 0..12 {
            let h = 0.03 + 0.47 * i as f64 / 11.0;
            for eps in [0.001, 0.01, 0.1] {
                let sharp = bias_bound_sharp(eps, h, &k, 2.0, 2.0, 0.7979).unwrap();
                let jensen = bias_bound_jensen(eps, h, lip).unwrap();
                assert!(sharp <= jensen, "h={h}, eps={eps}");
            }
        }
    }

    #[test]
    fn sharp_bound_needs_gradient_and_r_above_one() {
        let poly = Kernel::polynomial(4, 1).unwrap();
        assert!(bias_bound_sharp(0.01, 0.1, &poly, 2.0, 2.0, 1.0).is_err());
        let g = Kernel::gaussian(1).unwrap();
        assert!(bias_bound_sharp(0.01, 0.1, &g, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn theoretical_risk_bound() {
        let class = HolderClass::new(2.0, 1.0, 1).unwrap();
        let b0 = WassersteinBudget::new(2.0, 2.0, 0.0).unwrap();
        assert_eq!(risk_bound_theoretical(1, &b0, &class, 1.0, 1.0).unwrap(), 1.0);

        // n exponent -0.8 at s=2, p=1
        let r1 = risk_bound_theoretical(100, &b0, &class, 1.0, 0.0).unwrap();
        let r2 = risk_bound_theoretical(1000, &b0, &class, 1.0, 0.0).unwrap();
        assert!(((r1 / r2).log10() - 0.8).abs() < 1e-12);

        // epsilon exponent 8/7 at s=2, p=1, r=2
        let be1 = WassersteinBudget::new(2.0, 2.0, 0.1).unwrap();
        let be2 = WassersteinBudget::new(2.0, 2.0, 0.01).unwrap();
        let e1 = risk_bound_theoretical(1, &be1, &class, 0.0, 1.0).unwrap();
        let e2 = risk_bound_theoretical(1, &be2, &class, 0.0, 1.0).unwrap();
        assert!(((e1 / e2).log10() - 8.0 / 7.0).abs() < 1e-12);

        let big = WassersteinBudget::new(2.0, 2.0, 1.5).unwrap();
        assert!(matches!(
            risk_bound_theoretical(1, &big, &class, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }
}
