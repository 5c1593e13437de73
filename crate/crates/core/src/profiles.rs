//! Registry of one-dimensional bump profiles.
//!
//! Two families, both compactly supported on `[-1, 1]` and normalized to unit
//! sup norm:
//!
//! - `poly{k}`: the derivative of the plateau `(1 - u^2)^k`, rescaled. Exactly
//!   mean-zero with the plateau itself (rescaled) as analytic primitive, so it
//!   is the shape used on the first axis of divergence-field constructions.
//! - `plateau{k}`: the plateau `(1 - u^2)^k` itself. Nonnegative with maximum
//!   1 at the origin; used as the localization profile of map shifts and as
//!   the factor on axes `>= 2` of product bumps. Not mean-zero.
//!
//! `k >= 4` keeps the profiles in `C^{k-1}`, smooth enough for every Hölder
//! class with `s <= k - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGISTERED_PLATEAU_ORDERS: [u32; 3] = [4, 6, 8];

/// A registered 1-D profile shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Normalized derivative of `(1 - u^2)^k`: mean-zero, sup norm 1.
    PolyDeriv { k: u32 },
    /// `(1 - u^2)^k`: nonnegative, sup norm 1.
    Plateau { k: u32 },
}

impl Profile {
    /// Looks the profile up by registry name (`poly4`, `plateau6`, ...).
    pub fn by_name(name: &str) -> Result<Profile> {
        let parse = |prefix: &str| -> Option<u32> {
            name.strip_prefix(prefix).and_then(|d| d.parse().ok())
        };
        let profile = if let Some(k) = parse("poly") {
            Profile::PolyDeriv { k }
        } else if let Some(k) = parse("plateau") {
            Profile::Plateau { k }
        } else {
            return Err(Error::NotFound(format!("bump profile '{name}'")));
        };
        if !REGISTERED_PLATEAU_ORDERS.contains(&profile.order()) {
            return Err(Error::NotFound(format!(
                "bump profile '{name}' (registered orders: {REGISTERED_PLATEAU_ORDERS:?})"
            )));
        }
        Ok(profile)
    }

    pub fn name(&self) -> String {
        match self {
            Profile::PolyDeriv { k } => format!("poly{k}"),
            Profile::Plateau { k } => format!("plateau{k}"),
        }
    }

    /// Every registered profile name.
    pub fn registry() -> Vec<String> {
        let mut names = Vec::new();
        for k in REGISTERED_PLATEAU_ORDERS {
            names.push(format!("poly{k}"));
            names.push(format!("plateau{k}"));
        }
        names
    }

    pub fn order(&self) -> u32 {
        match self {
            Profile::PolyDeriv { k } | Profile::Plateau { k } => *k,
        }
    }

    /// Whether the profile integrates to zero over its support.
    pub fn mean_zero(&self) -> bool {
        matches!(self, Profile::PolyDeriv { .. })
    }

    /// Normalization constant: sup of `|d/du (1 - u^2)^k|`, attained at
    /// `u = 1/sqrt(2k - 1)`.
    fn deriv_sup(k: u32) -> f64 {
        let k = k as f64;
        let u = 1.0 / (2.0 * k - 1.0).sqrt();
        2.0 * k * u * (1.0 - u * u).powf(k - 1.0)
    }

    /// Location of the positive maximum of the mean-zero profiles.
    pub fn argmax(&self) -> f64 {
        match self {
            Profile::PolyDeriv { k } => -1.0 / (2.0 * f64::from(*k) - 1.0).sqrt(),
            Profile::Plateau { .. } => 0.0,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        match self {
            Profile::PolyDeriv { k } => {
                let kf = f64::from(*k);
                -2.0 * kf * u * w.powi(*k as i32 - 1) / Self::deriv_sup(*k)
            }
            Profile::Plateau { k } => w.powi(*k as i32),
        }
    }

    /// Analytic primitive vanishing at both endpoints of the support.
    ///
    /// Only mean-zero profiles admit one that stays compactly supported.
    pub fn primitive(&self, u: f64) -> Result<f64> {
        match self {
            Profile::PolyDeriv { k } => {
                if u.abs() >= 1.0 {
                    Ok(0.0)
                } else {
                    Ok((1.0 - u * u).powi(*k as i32) / Self::deriv_sup(*k))
                }
            }
            Profile::Plateau { .. } => Err(Error::Construction(format!(
                "profile '{}' is not mean-zero; its primitive does not vanish outside the support",
                self.name()
            ))),
        }
    }

    /// The plateau factor paired with this profile on axes `>= 2`.
    pub fn companion(&self) -> Profile {
        Profile::Plateau { k: self.order() }
    }
}
