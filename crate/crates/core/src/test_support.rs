//! Shared fixtures and independent oracles used by unit, property, and
//! acceptance tests. Nothing here is called by the analysis code itself.

use crate::model::{rhs, ModelParams, State4, Variant};
use crate::stability::Jacobian4;
pub use crate::rng::SplitMix64;

/// Parameter set of the first bifurcation figure:
/// r = 1.5, K1 = 5, K2 = 3, a1 = 0.25, a2 = 0.15, d1 = 0.2, d2 = 0.1.
pub fn fig1_params() -> ModelParams {
    ModelParams {
        r: 1.5,
        k1: 5.0,
        k2: 3.0,
        a1: 0.25,
        a2: 0.15,
        d1: 0.2,
        d2: 0.1,
        rho1: 0.1,
        rho2: 0.025,
        variant: Variant::StrengthDriven,
    }
}

pub fn splitmix_f64(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    rng.uniform(lo, hi)
}

/// Central-difference Jacobian of the model right-hand side, step
/// 1e-6 (1 + |s|) per coordinate. Independent oracle for the analytic one.
pub fn fd_jacobian(params: &ModelParams, s: &State4) -> Jacobian4 {
    let base = s.to_array();
    let mut j = [[0.0; 4]; 4];
    for col in 0..4 {
        let h = 1e-6 * (1.0 + base[col].abs());
        let mut plus = base;
        plus[col] += h;
        let mut minus = base;
        minus[col] -= h;
        let fp = rhs(params, &State4::from_array(plus)).unwrap().to_array();
        let fm = rhs(params, &State4::from_array(minus)).unwrap().to_array();
        for row in 0..4 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
