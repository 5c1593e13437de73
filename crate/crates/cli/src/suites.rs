//! Named invariant suites for `wkde validate`.

use rand::Rng;

use wkde_core::density::{
    bump_field, density_floor, holder_check, holder_check_fn, make_bump, make_gaussian, perturb,
    HolderClass, HolderGridSpec,
};
use wkde_core::numeric::seeded_rng;
use wkde_core::quad::SupportBox;
use wkde_core::risk::exponent_ordering_exact;
use wkde_core::transport::{bb_certificate, interpolation_identity_check, w_exact_1d_densities};

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

fn check(name: impl Into<String>, pass: bool, details: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        details: details.into(),
    }
}

/// Strict ordering of the epsilon exponents over six smoothness values.
pub fn exponents() -> Vec<Check> {
    [(1i64, 2i64), (1, 1), (3, 2), (2, 1), (3, 1), (5, 1)]
        .iter()
        .map(|&(num, den)| {
            let ok = exponent_ordering_exact(num, den).unwrap_or(false);
            check(
                format!("exponent ordering s={num}/{den}"),
                ok,
                "4s/(2s+1) > 2s/(s+3/2) > 2s/(s+2), integer arithmetic",
            )
        })
        .collect()
}

/// Certificate dominance over the exact 1-D distance on random bumps.
pub fn lemma_1d() -> Vec<Check> {
    let base = make_gaussian(3.0, 1).unwrap();
    let mut rng = seeded_rng(1300);
    let profiles = ["poly4", "poly6", "poly8"];
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    let total = 100;
    let mut failures = 0;
    for i in 0..total {
        let x0 = -2.0 + 4.0 * rng.gen::<f64>();
        let width = 0.1 + 0.9 * rng.gen::<f64>();
        let profile = profiles[i % profiles.len()];
        let probe = make_bump(vec![x0], width, 1.0, profile).unwrap();
        let floor = density_floor(&base, &probe.support_box());
        let tau = (0.1 + 0.8 * rng.gen::<f64>()) * floor / 2.0;
        let bump = make_bump(vec![x0], width, tau, profile).unwrap();
        let field = bump_field(&bump).unwrap();
        let cert = bb_certificate(&base, &bump, &field, 2.0, 2.0).unwrap().value;
        let perturbed = perturb(&base, &bump).unwrap();
        let exact = w_exact_1d_densities(&base, &perturbed, 2.0).unwrap().value;
        let ratio = cert / exact;
        if ratio < 1.0 {
            failures += 1;
        }
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    vec![check(
        "certificate dominance, 100 random bumps",
        failures == 0 && max_ratio <= 20.0,
        format!("certificate/exact in [{min_ratio:.3}, {max_ratio:.3}], {failures} violations"),
    )]
}

/// Interpolation identity on random smooth test functions and maps.
pub fn interpolation() -> Vec<Check> {
    let density = make_gaussian(1.0, 1).unwrap();
    let mut rng = seeded_rng(1700);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let center = 2.0 * rng.gen::<f64>() - 1.0;
        let h = 0.3 + 0.5 * rng.gen::<f64>();
        let eps = 0.02 + 0.08 * rng.gen::<f64>();
        let bump = make_bump(
            vec![rng.gen::<f64>() - 0.5],
            0.3 + 0.5 * rng.gen::<f64>(),
            1.0,
            "poly6",
        )
        .unwrap();
        let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let report = interpolation_identity_check(
            move |x| pdf((x - center) / h) / h,
            move |x| {
                let u = (x - center) / h;
                -u * pdf(u) / (h * h)
            },
            |x| x + eps * bump.eval(&[x]),
            &density,
            4096,
        )
        .unwrap();
        worst = worst.max(report.discrepancy);
    }
    vec![check(
        "interpolation identity, 20 random pairs",
        worst <= 1e-6,
        format!("max |lhs - rhs| = {worst:.2e} (tolerance 1e-6)"),
    )]
}

/// Hölder-class checks on the bank.
pub fn holder() -> Vec<Check> {
    let mut checks = Vec::new();

    let d = make_gaussian(1.0, 1).unwrap();
    let class = HolderClass::new(1.0, 0.25, 1).unwrap();
    let grid = HolderGridSpec {
        window: SupportBox::new(vec![-4.0], vec![4.0]).unwrap(),
        points_per_axis: 2048,
        locality: 0.05,
    };
    match holder_check(&d, &class, &grid) {
        Ok(report) => checks.push(check(
            "gaussian in class (s=1, L=0.25)",
            report.pass,
            format!("max ratio {:.4} vs limit {:.4}", report.max_ratio, report.limit),
        )),
        Err(e) => checks.push(check("gaussian in class (s=1, L=0.25)", false, e.to_string())),
    }

    let zero_class = HolderClass::new(2.0, 0.01, 1).unwrap();
    let zero_grid = HolderGridSpec {
        window: SupportBox::new(vec![-1.0], vec![1.0]).unwrap(),
        points_per_axis: 512,
        locality: 0.05,
    };
    match holder_check_fn(|_| 0.0, &zero_class, &zero_grid) {
        Ok(report) => checks.push(check(
            "zero perturbation passes any class",
            report.pass && report.max_ratio == 0.0,
            format!("max ratio {}", report.max_ratio),
        )),
        Err(e) => checks.push(check("zero perturbation passes any class", false, e.to_string())),
    }

    // ratio of an s=2 check on a raw bump scales like tau / width^2
    let wide_class = HolderClass::new(2.0, 1e9, 1).unwrap();
    let mut scaled = Vec::new();
    for &(tau, w) in &[(0.02, 0.3), (0.05, 0.3), (0.02, 0.5), (0.05, 0.8)] {
        let b = make_bump(vec![0.0], w, tau, "poly4").unwrap();
        let grid = HolderGridSpec {
            window: SupportBox::new(vec![-w], vec![w]).unwrap(),
            points_per_axis: 1024,
            locality: w / 20.0,
        };
        match holder_check_fn(|x| b.eval(&[x]), &wide_class, &grid) {
            Ok(report) => scaled.push(report.max_ratio / (tau / (w * w))),
            Err(e) => {
                checks.push(check("bump ratio scaling", false, e.to_string()));
                return checks;
            }
        }
    }
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0_f64, f64::max);
    checks.push(check(
        "bump ratio scales as tau/width^2",
        hi / lo < 2.0,
        format!("normalized spread {:.3}", hi / lo),
    ));
    checks
}
