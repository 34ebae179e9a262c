//! Parameter and state types, right-hand sides of both model variants, and
//! the closed-form derived quantities (mu, nu, Hopf thresholds and their
//! "hat" analogues for the density-driven model).

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Which predator dispersal coupling the model uses.
///
/// `StrengthDriven`: migration flux proportional to the predation term of the
/// destination patch times the source predator density.
/// `DensityDriven`: classical flux `rho_i (y_j - y_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "strength")]
    StrengthDriven,
    #[serde(rename = "density")]
    DensityDriven,
}

/// All rate constants of either model. Patch 1 growth is normalized to 1,
/// `r` is the relative growth rate of patch 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub r: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub a1: f64,
    pub a2: f64,
    pub d1: f64,
    pub d2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub variant: Variant,
}

impl ModelParams {
    /// Checks positivity constraints: r, K_i, a_i, d_i > 0 and rho_i >= 0,
    /// all finite.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("K1", self.k1),
            ("K2", self.k2),
            ("a1", self.a1),
            ("a2", self.a2),
            ("d1", self.d1),
            ("d2", self.d2),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(CoreError::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::InvalidParams(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Parses the flat JSON parameter file format. Unknown keys are rejected.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: ModelParams = serde_json::from_str(s)
            .map_err(|e| CoreError::InvalidParams(format!("params JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Growth rate of patch `i` (r1 = 1, r2 = r).
    pub fn growth(&self, patch: usize) -> f64 {
        match patch {
            1 => 1.0,
            2 => self.r,
            _ => panic!("patch index must be 1 or 2"),
        }
    }

    /// (K, a, d, rho) for patch `i`.
    pub fn patch(&self, patch: usize) -> (f64, f64, f64, f64) {
        match patch {
            1 => (self.k1, self.a1, self.d1, self.rho1),
            2 => (self.k2, self.a2, self.d2, self.rho2),
            _ => panic!("patch index must be 1 or 2"),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

/// Ordered populations (x1, y1, x2, y2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State4 {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl State4 {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|&v| v >= 0.0)
    }

    pub fn dist_max(&self, other: &State4) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..4).fold(0.0f64, |m, i| m.max((a[i] - b[i]).abs()))
    }
}

/// Holling type II uptake p(x) = a x / (1 + x).
pub fn p(a: f64, x: f64) -> f64 {
    a * x / (1.0 + x)
}

/// Prey nullcline q(x) = r (K - x)(1 + x) / (a K).
pub fn q(r: f64, k: f64, a: f64, x: f64) -> f64 {
    r * (k - x) * (1.0 + x) / (a * k)
}

/// Maximum of q over [0, K]: r (K+1)^2 / (4 a K) when K > 1, else q(0) = r/a.
pub fn q_max(r: f64, k: f64, a: f64) -> f64 {
    if k > 1.0 {
        r * (k + 1.0) * (k + 1.0) / (4.0 * a * k)
    } else {
        r / a
    }
}

/// mu = d / (a - d), reported as +inf when a <= d (predator cannot persist;
/// every predicate reading mu treats +inf > K as true).
pub fn mu_of(a: f64, d: f64) -> f64 {
    if a > d {
        d / (a - d)
    } else {
        f64::INFINITY
    }
}

/// nu = r (K - mu)(1 + mu) / (a K); -inf when mu is the +inf sentinel
/// (the formula's limit as a -> d+).
fn nu_of(r: f64, k: f64, a: f64, mu: f64) -> f64 {
    if mu.is_finite() {
        q(r, k, a, mu)
    } else {
        f64::NEG_INFINITY
    }
}

/// Single-patch derived quantities of the strength-driven analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub mu1: f64,
    pub mu2: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Hopf thresholds (K_i - 1)/2.
    pub hopf1: f64,
    pub hopf2: f64,
}

/// Derived quantities for both patches, with r1 = 1, r2 = r.
pub fn derived(params: &ModelParams) -> DerivedQuantities {
    let mu1 = mu_of(params.a1, params.d1);
    let mu2 = mu_of(params.a2, params.d2);
    DerivedQuantities {
        mu1,
        mu2,
        nu1: nu_of(1.0, params.k1, params.a1, mu1),
        nu2: nu_of(params.r, params.k2, params.a2, mu2),
        hopf1: (params.k1 - 1.0) / 2.0,
        hopf2: (params.k2 - 1.0) / 2.0,
    }
}

/// Effective quantities of the density-driven model (Theorem-8 style):
/// dhat_i = d_i + rho_i d_j / (d_j + rho_j), muhat/nuhat from dhat, and the
/// cross predator levels nuhat_j_of_i = rho_j nuhat_i / (d_j + rho_j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatQuantities {
    pub dhat1: f64,
    pub dhat2: f64,
    pub muhat1: f64,
    pub muhat2: f64,
    pub nuhat1: f64,
    pub nuhat2: f64,
    /// nuhat_1^2 = rho1 nuhat2 / (d1 + rho1): predator-1 level at the
    /// boundary equilibrium where patch 2 carries the subsystem.
    pub nuhat_cross_12: f64,
    /// nuhat_2^1 = rho2 nuhat1 / (d2 + rho2).
    pub nuhat_cross_21: f64,
}

pub fn hat_quantities(params: &ModelParams) -> HatQuantities {
    let dhat1 = params.d1 + params.rho1 * params.d2 / (params.d2 + params.rho2);
    let dhat2 = params.d2 + params.rho2 * params.d1 / (params.d1 + params.rho1);
    let muhat1 = mu_of(params.a1, dhat1);
    let muhat2 = mu_of(params.a2, dhat2);
    let nuhat1 = nu_of(1.0, params.k1, params.a1, muhat1);
    let nuhat2 = nu_of(params.r, params.k2, params.a2, muhat2);
    HatQuantities {
        dhat1,
        dhat2,
        muhat1,
        muhat2,
        nuhat1,
        nuhat2,
        nuhat_cross_12: params.rho1 * nuhat2 / (params.d1 + params.rho1),
        nuhat_cross_21: params.rho2 * nuhat1 / (params.d2 + params.rho2),
    }
}

/// Four time-derivatives of the selected variant. No input checks; used by
/// the integrator hot path.
pub(crate) fn rhs_raw(params: &ModelParams, s: [f64; 4]) -> [f64; 4] {
    let [x1, y1, x2, y2] = s;
    let u1 = p(params.a1, x1) * y1; // predation term patch 1
    let u2 = p(params.a2, x2) * y2;
    let dx1 = x1 * (1.0 - x1 / params.k1) - u1;
    let dx2 = params.r * x2 * (1.0 - x2 / params.k2) - u2;
    let (dy1, dy2) = match params.variant {
        Variant::StrengthDriven => (
            u1 - params.d1 * y1 + params.rho1 * (u1 * y2 - u2 * y1),
            u2 - params.d2 * y2 + params.rho2 * (u2 * y1 - u1 * y2),
        ),
        Variant::DensityDriven => (
            u1 - params.d1 * y1 + params.rho1 * (y2 - y1),
            u2 - params.d2 * y2 + params.rho2 * (y1 - y2),
        ),
    };
    [dx1, dy1, dx2, dy2]
}

/// Right-hand side of the selected model variant.
pub fn rhs(params: &ModelParams, s: &State4) -> Result<State4> {
    if !s.is_finite() {
        return Err(CoreError::NonFiniteInput("rhs state"));
    }
    Ok(State4::from_array(rhs_raw(params, s.to_array())))
}

/// Ultimate bound M/d on V = rho2 (x1 + y1) + rho1 (x2 + y2), with
/// d = min(d1, d2) and M the sum of the two quadratic maxima
/// max_{[0,K_i]} x (1 - x/K_i + d_i).
pub fn dissipativity_bound(params: &ModelParams) -> Result<f64> {
    if params.rho1 == 0.0 && params.rho2 == 0.0 {
        return Err(CoreError::BoundUndefined);
    }
    let m = params.rho2 * parabola_max(params.k1, params.d1)
        + params.rho1 * parabola_max(params.k2, params.d2);
    Ok(m / params.d1.min(params.d2))
}

/// max over [0, K] of x (1 - x/K + d): vertex K(1+d)^2/4 when it lies in the
/// interval, else the value K d at x = K.
fn parabola_max(k: f64, d: f64) -> f64 {
    if d <= 1.0 {
        k * (1.0 + d) * (1.0 + d) / 4.0
    } else {
        k * d
    }
}

/// Weight function of the dissipativity argument.
pub fn dissipativity_v(params: &ModelParams, s: &State4) -> f64 {
    params.rho2 * (s.x1 + s.y1) + params.rho1 * (s.x2 + s.y2)
}

/// Single-patch right-hand side (the uncoupled reduction), useful for
/// oracle-style comparisons.
pub fn single_patch_rhs(r: f64, k: f64, a: f64, d: f64, x: f64, y: f64) -> (f64, f64) {
    let u = p(a, x) * y;
    (r * x * (1.0 - x / k) - u, u - d * y)
}
