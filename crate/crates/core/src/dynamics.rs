//! Adaptive ODE integration (Dormand-Prince 5(4) with embedded error
//! control), trajectory post-processing into attractor classes, and
//! numerical verification of the Lyapunov descent arguments.

use crate::error::{CoreError, Result};
use crate::model::{
    derived, hat_quantities, p, q, rhs_raw, ModelParams, State4, Variant,
};
use serde::Serialize;

/// Integrator controls. Local error per step is kept below
/// `abs_tol + rel_tol |state|` componentwise.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            max_step: 1.0,
        }
    }
}

/// Transient to discard and window to analyze when labeling a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Horizons {
    pub transient: f64,
    pub window: f64,
}

impl Default for Horizons {
    fn default() -> Self {
        Horizons {
            transient: 2000.0,
            window: 3000.0,
        }
    }
}

impl Horizons {
    pub fn t_end(&self) -> f64 {
        self.transient + self.window
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntegratorStatus {
    ReachedEnd,
}

/// An accepted-step record of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State4>,
    pub accepted: usize,
    pub rejected: usize,
    pub status: IntegratorStatus,
}

impl Trajectory {
    pub fn last(&self) -> State4 {
        *self.states.last().expect("trajectory has at least t0")
    }

    /// Indices with t >= t_cut.
    pub fn window_start(&self, t_cut: f64) -> usize {
        self.times.partition_point(|&t| t < t_cut)
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// nodes are implicit: the system is autonomous, so only A and the
// 4th-order weights matter; 5th-order weights equal the last A row (FSAL)
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const H_UNDERFLOW: f64 = 1e-14;
const NEG_CLAMP: f64 = -1e-12;
const DIVERGE_NORM: f64 = 1e12;

struct Dopri<'a> {
    params: &'a ModelParams,
    tol: Tolerances,
}

impl Dopri<'_> {
    /// One attempted step from (t, y) with size h. Returns the 5th-order
    /// solution, the scaled error measure, and the first stage for reuse.
    fn step(&self, y: [f64; 4], k1: [f64; 4], h: f64) -> ([f64; 4], f64, [f64; 4]) {
        let mut k = [[0.0; 4]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for c in 0..4 {
                        yi[c] += h * a * kj[c];
                    }
                }
            }
            k[stage + 1] = rhs_raw(self.params, yi);
        }
        // stage 7 input is the 5th-order solution itself
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[5][j];
            if a != 0.0 {
                for c in 0..4 {
                    y5[c] += h * a * kj[c];
                }
            }
        }
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            if B4[j] != 0.0 {
                for c in 0..4 {
                    y4[c] += h * B4[j] * kj[c];
                }
            }
        }
        let mut err: f64 = 0.0;
        for c in 0..4 {
            let sc = self.tol.abs_tol + self.tol.rel_tol * y[c].abs().max(y5[c].abs());
            err = err.max((y5[c] - y4[c]).abs() / sc);
        }
        (y5, err, k[6])
    }
}

/// Integrates the selected variant from `s0` to `t_end`, recording every
/// accepted step. Steps that would push a component below -1e-12 are
/// rejected and halved; components in [-1e-12, 0) are clamped to zero on
/// acceptance.
pub fn integrate(
    params: &ModelParams,
    s0: &State4,
    t_end: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    integrate_with_samples(params, s0, t_end, tol, None)
}

/// Like `integrate`, but lands exactly on multiples of `sample_dt` and
/// records only those states.
pub fn integrate_sampled(
    params: &ModelParams,
    s0: &State4,
    t_end: f64,
    sample_dt: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    integrate_with_samples(params, s0, t_end, tol, Some(sample_dt))
}

fn integrate_with_samples(
    params: &ModelParams,
    s0: &State4,
    t_end: f64,
    tol: Tolerances,
    sample_dt: Option<f64>,
) -> Result<Trajectory> {
    if !s0.is_finite() {
        return Err(CoreError::NonFiniteInput("initial state"));
    }
    if !s0.is_nonnegative() {
        return Err(CoreError::InvalidParams(
            "initial state must be componentwise nonnegative".into(),
        ));
    }
    if !(t_end > 0.0) {
        return Err(CoreError::InvalidParams("t_end must be positive".into()));
    }
    let stepper = Dopri { params, tol };
    let mut t = 0.0;
    let mut y = s0.to_array();
    let mut k1 = rhs_raw(params, y);
    let mut h = initial_step(&y, &k1, &tol);
    let mut times = vec![0.0];
    let mut states = vec![*s0];
    let mut next_sample = sample_dt.unwrap_or(f64::INFINITY).min(t_end);
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    while t < t_end {
        h = h.min(tol.max_step).min(t_end - t);
        if let Some(_dt) = sample_dt {
            h = h.min(next_sample - t);
        }
        if h < H_UNDERFLOW {
            return Err(CoreError::Stiffness { t, h });
        }
        let (mut y5, err, k_last) = stepper.step(y, k1, h);
        let finite = y5.iter().all(|v| v.is_finite());
        let negative = y5.iter().any(|&v| v < NEG_CLAMP);
        if !finite || negative {
            rejected += 1;
            h *= 0.5;
            continue;
        }
        if err <= 1.0 {
            for v in y5.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            t += h;
            y = y5;
            // clamping invalidates FSAL reuse only when it actually fired
            k1 = if y5.iter().any(|&v| v == 0.0) {
                rhs_raw(params, y)
            } else {
                k_last
            };
            accepted += 1;
            if y.iter().fold(0.0f64, |m, v| m.max(v.abs())) > DIVERGE_NORM {
                return Err(CoreError::Divergence { t });
            }
            let record = match sample_dt {
                None => true,
                Some(dt) => {
                    if (t - next_sample).abs() < 1e-9 * dt.max(1.0) || t >= t_end {
                        next_sample = (next_sample + dt).min(t_end);
                        true
                    } else {
                        false
                    }
                }
            };
            if record {
                times.push(t);
                states.push(State4::from_array(y));
            }
        } else {
            rejected += 1;
        }
        // PI-free step controller with the usual safety clamp
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(Trajectory {
        times,
        states,
        accepted,
        rejected,
        status: IntegratorStatus::ReachedEnd,
    })
}

fn initial_step(y: &[f64; 4], dy: &[f64; 4], tol: &Tolerances) -> f64 {
    let norm_y = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm_dy = dy.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = if norm_dy > 0.0 {
        0.01 * (norm_y.max(1.0) / norm_dy)
    } else {
        1e-3
    };
    h.min(tol.max_step).max(1e-8)
}

/// Long-run outcome classes matching the sweep figure semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AttractorKind {
    InteriorEquilibrium,
    InteriorCycle,
    BoundaryY1Extinct,
    BoundaryY2Extinct,
    BothPredatorsExtinct,
    Undetermined,
}

impl AttractorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttractorKind::InteriorEquilibrium => "InteriorEquilibrium",
            AttractorKind::InteriorCycle => "InteriorCycle",
            AttractorKind::BoundaryY1Extinct => "BoundaryY1Extinct",
            AttractorKind::BoundaryY2Extinct => "BoundaryY2Extinct",
            AttractorKind::BothPredatorsExtinct => "BothPredatorsExtinct",
            AttractorKind::Undetermined => "Undetermined",
        }
    }

    pub fn code(&self) -> i32 {
        match self {
            AttractorKind::InteriorEquilibrium => 0,
            AttractorKind::InteriorCycle => 1,
            AttractorKind::BoundaryY1Extinct => 2,
            AttractorKind::BoundaryY2Extinct => 3,
            AttractorKind::BothPredatorsExtinct => 4,
            AttractorKind::Undetermined => 5,
        }
    }
}

/// Final-window statistics backing an attractor label.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowStats {
    pub t_from: f64,
    pub t_to: f64,
    pub min: [f64; 4],
    pub max: [f64; 4],
    pub sup_rhs_norm: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AttractorLabel {
    pub kind: AttractorKind,
    pub witness: WindowStats,
}

const EXTINCT_TOL: f64 = 1e-6;
const EQUILIBRIUM_RHS_TOL: f64 = 1e-6;
const CYCLE_P2P_TOL: f64 = 1e-4;

/// Labels the final window of a trajectory. Extinction thresholds use the
/// window max (1e-6), equilibrium requires the right-hand side to stay
/// below 1e-6 over the window, a cycle needs peak-to-peak above 1e-4 with
/// at least 3 derivative sign changes in some component.
pub fn classify_attractor(
    params: &ModelParams,
    traj: &Trajectory,
    horizons: &Horizons,
) -> Result<AttractorLabel> {
    let t_end = *traj.times.last().unwrap();
    if t_end + 1e-9 < horizons.t_end() {
        return Err(CoreError::InvalidParams(format!(
            "trajectory ends at {t_end}, need transient+window = {}",
            horizons.t_end()
        )));
    }
    let start = traj.window_start(t_end - horizons.window);
    let idx = start..traj.times.len();
    let mut min = [f64::INFINITY; 4];
    let mut max = [f64::NEG_INFINITY; 4];
    let mut sup_rhs: f64 = 0.0;
    let mut sign_changes = [0usize; 4];
    let mut prev_sign = [0i8; 4];
    for i in idx.clone() {
        let s = traj.states[i].to_array();
        let dot = rhs_raw(params, s);
        for c in 0..4 {
            min[c] = min[c].min(s[c]);
            max[c] = max[c].max(s[c]);
            sup_rhs = sup_rhs.max(dot[c].abs());
            let sign = if dot[c] > 0.0 {
                1i8
            } else if dot[c] < 0.0 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if prev_sign[c] != 0 && sign != prev_sign[c] {
                    sign_changes[c] += 1;
                }
                prev_sign[c] = sign;
            }
        }
    }
    let witness = WindowStats {
        t_from: t_end - horizons.window,
        t_to: t_end,
        min,
        max,
        sup_rhs_norm: sup_rhs,
    };
    let y1_gone = max[1] < EXTINCT_TOL;
    let y2_gone = max[3] < EXTINCT_TOL;
    let kind = if y1_gone && y2_gone {
        AttractorKind::BothPredatorsExtinct
    } else if y1_gone {
        AttractorKind::BoundaryY1Extinct
    } else if y2_gone {
        AttractorKind::BoundaryY2Extinct
    } else if sup_rhs < EQUILIBRIUM_RHS_TOL {
        AttractorKind::InteriorEquilibrium
    } else if (0..4).any(|c| max[c] - min[c] > CYCLE_P2P_TOL && sign_changes[c] >= 3) {
        AttractorKind::InteriorCycle
    } else {
        AttractorKind::Undetermined
    };
    Ok(AttractorLabel { kind, witness })
}

/// Which proof's Lyapunov function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovKind {
    /// Global extinction of both predators (strength-driven model).
    Th3V,
    /// Density-driven subsystem with prey j absent; `patch` is i.
    Th8Item3cV { patch: usize },
    /// Density-driven prey-extinction argument; `prey` is the patch whose
    /// prey goes extinct (proof-side subscripts).
    Th8Item5V { prey: usize },
    /// Fully symmetric density-driven interior equilibrium.
    Th8SymmetricV,
}

/// Descent diagnostics for a Lyapunov function along trajectory samples.
#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    pub n_samples: usize,
    /// Samples where V is undefined (a log term hit zero population).
    pub n_skipped: usize,
    pub max_dvdt: f64,
    pub dvdt_at_last: f64,
    /// Adjacent sample pairs with V increasing beyond 1e-9.
    pub monotonicity_violations: usize,
    pub max_increase: f64,
    pub v_first: f64,
    pub v_last: f64,
}

pub const DESCENT_SLACK: f64 = 1e-9;

/// Integral of (p(s) - p(z))/p(s) from z to x: the prey-type Lyapunov term.
fn prey_term(x: f64, z: f64) -> Option<f64> {
    if x <= 0.0 {
        return None;
    }
    let frac = z / (1.0 + z); // p(z)/a
    Some((x - z) - frac * ((x / z).ln() + (x - z)))
}

/// Integral of (s - w)/s from w to y: the predator-type term.
fn pred_term(y: f64, w: f64) -> Option<f64> {
    if y <= 0.0 {
        return None;
    }
    Some((y - w) - w * (y / w).ln())
}

struct LyapunovFns {
    v: Box<dyn Fn(&State4) -> Option<f64>>,
    dvdt: Box<dyn Fn(&State4) -> Option<f64>>,
}

fn build_lyapunov(params: &ModelParams, which: LyapunovKind) -> Result<LyapunovFns> {
    let pm = *params;
    match which {
        LyapunovKind::Th3V => {
            let dq = derived(&pm);
            if !(dq.mu1 > pm.k1 && dq.mu2 > pm.k2) {
                return Err(CoreError::NotApplicable(
                    "Th3 needs mu_i > K_i for both patches".into(),
                ));
            }
            let v = move |s: &State4| -> Option<f64> {
                Some(
                    pm.rho2 * (prey_term(s.x1, pm.k1)? + s.y1)
                        + pm.rho1 * (prey_term(s.x2, pm.k2)? + s.y2),
                )
            };
            let dvdt = move |s: &State4| -> Option<f64> {
                let p1 = p(pm.a1, s.x1);
                let p2 = p(pm.a2, s.x2);
                let p1k = p(pm.a1, pm.k1);
                let p2k = p(pm.a2, pm.k2);
                Some(
                    pm.rho2 * (p1 - p1k) * q(1.0, pm.k1, pm.a1, s.x1)
                        + pm.rho2 * s.y1 * (p1k - pm.d1)
                        + pm.rho1 * (p2 - p2k) * q(pm.r, pm.k2, pm.a2, s.x2)
                        + pm.rho1 * s.y2 * (p2k - pm.d2),
                )
            };
            Ok(LyapunovFns {
                v: Box::new(v),
                dvdt: Box::new(dvdt),
            })
        }
        LyapunovKind::Th8Item3cV { patch } => {
            require_density(&pm)?;
            let hq = hat_quantities(&pm);
            let (muhat, nuhat, cross) = match patch {
                1 => (hq.muhat1, hq.nuhat1, hq.nuhat_cross_21),
                _ => (hq.muhat2, hq.nuhat2, hq.nuhat_cross_12),
            };
            let (k_i, a_i, d_i, rho_i) = pm.patch(patch);
            let (_, _, d_j, rho_j) = pm.patch(3 - patch);
            let r_i = pm.growth(patch);
            if !(muhat > (k_i - 1.0) / 2.0 && muhat < k_i) {
                return Err(CoreError::NotApplicable(format!(
                    "Th8 item 3c needs (K-1)/2 < muhat_{patch} < K, got {muhat}"
                )));
            }
            let w = rho_j + d_j;
            let pick = move |s: &State4| -> (f64, f64, f64) {
                match patch {
                    1 => (s.x1, s.y1, s.y2),
                    _ => (s.x2, s.y2, s.y1),
                }
            };
            let v = move |s: &State4| -> Option<f64> {
                let (xi, yi, yj) = pick(s);
                Some(w * prey_term(xi, muhat)? + w * pred_term(yi, nuhat)?
                    + rho_i * pred_term(yj, cross)?)
            };
            let dvdt = move |s: &State4| -> Option<f64> {
                let (xi, yi, yj) = pick(s);
                if yi <= 0.0 || yj <= 0.0 {
                    return None;
                }
                let pi = p(a_i, xi);
                let dhat = p(a_i, muhat);
                let flux = w * yj - rho_j * yi;
                Some(
                    w * (pi - dhat) * (q(r_i, k_i, a_i, xi) - nuhat)
                        - rho_i * nuhat * flux * flux / (w * yi * yj),
                )
            };
            let _ = d_i;
            Ok(LyapunovFns {
                v: Box::new(v),
                dvdt: Box::new(dvdt),
            })
        }
        LyapunovKind::Th8Item5V { prey } => {
            require_density(&pm)?;
            let hq = hat_quantities(&pm);
            let i = prey;
            let j = 3 - prey;
            let (muhat_j, nuhat_j, cross_i) = match i {
                1 => (hq.muhat2, hq.nuhat2, hq.nuhat_cross_12),
                _ => (hq.muhat1, hq.nuhat1, hq.nuhat_cross_21),
            };
            let (k_i, a_i, d_i, rho_i) = pm.patch(i);
            let (k_j, a_j, d_j, rho_j) = pm.patch(j);
            let (r_i, r_j) = (pm.growth(i), pm.growth(j));
            let window = muhat_j > (k_j - 1.0) / 2.0 && muhat_j < k_j;
            let threshold = r_i * (k_i + 1.0) * (k_i + 1.0) / (4.0 * a_i * k_i) < cross_i;
            if !(window && threshold) {
                return Err(CoreError::NotApplicable(format!(
                    "Th8 item 5 needs (K-1)/2 < muhat_{j} < K and q_{i}max < nuhat_{i}^{j}"
                )));
            }
            let pick = move |s: &State4| -> (f64, f64, f64, f64) {
                match i {
                    1 => (s.x1, s.y1, s.x2, s.y2),
                    _ => (s.x2, s.y2, s.x1, s.y1),
                }
            };
            let w = rho_i + d_i;
            let v = move |s: &State4| -> Option<f64> {
                let (xi, yi, xj, yj) = pick(s);
                Some(
                    w * prey_term(xj, muhat_j)?
                        + w * pred_term(yj, nuhat_j)?
                        + rho_i * xi
                        + pred_term(yi, cross_i)?,
                )
            };
            // exact chain-rule derivative of the displayed V
            let dvdt = move |s: &State4| -> Option<f64> {
                let (xi, yi, xj, yj) = pick(s);
                if xj <= 0.0 || yi <= 0.0 || yj <= 0.0 {
                    return None;
                }
                let pi = p(a_i, xi);
                let pj = p(a_j, xj);
                let dhat_j = p(a_j, muhat_j);
                let qi = q(r_i, k_i, a_i, xi);
                let qj = q(r_j, k_j, a_j, xj);
                let dyj = yj * (pj - d_j) + rho_j * (yi - yj);
                let dyi = yi * (pi - d_i) + rho_i * (yj - yi);
                Some(
                    w * (pj - dhat_j) * (qj - yj)
                        + w * (yj - nuhat_j) / yj * dyj
                        + rho_i * pi * (qi - yi)
                        + (yi - cross_i) / yi * dyi,
                )
            };
            Ok(LyapunovFns {
                v: Box::new(v),
                dvdt: Box::new(dvdt),
            })
        }
        LyapunovKind::Th8SymmetricV => {
            require_density(&pm)?;
            require_symmetric(&pm)?;
            let dq = derived(&pm);
            let (mu, nu) = (dq.mu1, dq.nu1);
            if !(mu > 0.0 && mu < pm.k1) {
                return Err(CoreError::NotApplicable(
                    "symmetric case needs 0 < mu < K".into(),
                ));
            }
            let v = move |s: &State4| -> Option<f64> {
                Some(
                    pm.rho2 * (prey_term(s.x1, mu)? + pred_term(s.y1, nu)?)
                        + pm.rho1 * (prey_term(s.x2, mu)? + pred_term(s.y2, nu)?),
                )
            };
            let d = pm.d1;
            let dvdt = move |s: &State4| -> Option<f64> {
                if s.y1 <= 0.0 || s.y2 <= 0.0 {
                    return None;
                }
                let p1 = p(pm.a1, s.x1);
                let p2 = p(pm.a2, s.x2);
                let dy = s.y1 - s.y2;
                Some(
                    pm.rho2 * (p1 - d) * (q(1.0, pm.k1, pm.a1, s.x1) - nu)
                        + pm.rho1 * (p2 - d) * (q(pm.r, pm.k2, pm.a2, s.x2) - nu)
                        - pm.rho1 * pm.rho2 * nu * dy * dy / (s.y1 * s.y2),
                )
            };
            Ok(LyapunovFns {
                v: Box::new(v),
                dvdt: Box::new(dvdt),
            })
        }
    }
}

fn require_density(params: &ModelParams) -> Result<()> {
    if params.variant != Variant::DensityDriven {
        return Err(CoreError::NotApplicable(
            "this Lyapunov function belongs to the density-driven model".into(),
        ));
    }
    Ok(())
}

fn require_symmetric(params: &ModelParams) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    if close(params.r, 1.0)
        && close(params.a1, params.a2)
        && close(params.d1, params.d2)
        && close(params.k1, params.k2)
    {
        Ok(())
    } else {
        Err(CoreError::NotApplicable(
            "needs r = 1, a1 = a2, d1 = d2, K1 = K2".into(),
        ))
    }
}

/// Evaluates the selected Lyapunov function and its analytic derivative
/// along trajectory samples. Samples where V is undefined are skipped and
/// counted.
pub fn lyapunov_check(
    params: &ModelParams,
    which: LyapunovKind,
    traj: &Trajectory,
) -> Result<DescentReport> {
    let fns = build_lyapunov(params, which)?;
    let mut report = DescentReport {
        n_samples: traj.states.len(),
        n_skipped: 0,
        max_dvdt: f64::NEG_INFINITY,
        dvdt_at_last: f64::NAN,
        monotonicity_violations: 0,
        max_increase: 0.0,
        v_first: f64::NAN,
        v_last: f64::NAN,
    };
    let mut prev_v: Option<f64> = None;
    for s in &traj.states {
        let (v, dv) = match ((fns.v)(s), (fns.dvdt)(s)) {
            (Some(v), Some(dv)) if v.is_finite() && dv.is_finite() => (v, dv),
            _ => {
                report.n_skipped += 1;
                continue;
            }
        };
        if report.v_first.is_nan() {
            report.v_first = v;
        }
        report.v_last = v;
        report.dvdt_at_last = dv;
        report.max_dvdt = report.max_dvdt.max(dv);
        if let Some(pv) = prev_v {
            let inc = v - pv;
            if inc > DESCENT_SLACK {
                report.monotonicity_violations += 1;
            }
            report.max_increase = report.max_increase.max(inc);
        }
        prev_v = Some(v);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dissipativity_bound, dissipativity_v, rhs};
    use crate::test_support::{fig1_params, SplitMix64};

    fn tight() -> Tolerances {
        Tolerances {
            abs_tol: 1e-11,
            rel_tol: 1e-9,
            max_step: 1.0,
        }
    }

    #[test]
    fn predator_free_axis_stays_exact_and_prey_logistic() {
        let params = fig1_params();
        let traj = integrate(
            &params,
            &State4::new(0.5, 0.0, 6.0, 0.0),
            200.0,
            Tolerances::default(),
        )
        .unwrap();
        for s in &traj.states {
            assert_eq!(s.y1, 0.0);
            assert_eq!(s.y2, 0.0);
        }
        let last = traj.last();
        assert!((last.x1 - params.k1).abs() < 1e-6);
        assert!((last.x2 - params.k2).abs() < 1e-6);
    }

    #[test]
    fn no_negative_samples_and_prey_cap() {
        let params = fig1_params();
        let traj = integrate(
            &params,
            &State4::new(7.5, 2.0, 4.0, 1.0),
            300.0,
            Tolerances::default(),
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s.is_nonnegative()));
        // started above K_i, must fall below K_i + 1e-6 in finite time and
        // stay there
        let tail = traj.window_start(250.0);
        for s in &traj.states[tail..] {
            assert!(s.x1 <= params.k1 + 1e-6);
            assert!(s.x2 <= params.k2 + 1e-6);
        }
        // started below stays below
        let traj2 = integrate(
            &params,
            &State4::new(4.0, 0.5, 2.0, 0.5),
            300.0,
            Tolerances::default(),
        )
        .unwrap();
        for s in &traj2.states {
            assert!(s.x1 <= params.k1 + 1e-6);
            assert!(s.x2 <= params.k2 + 1e-6);
        }
    }

    #[test]
    fn theorem3_regime_converges_to_prey_only() {
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        let mut rng = SplitMix64::new(42);
        for _ in 0..5 {
            let s0 = State4::new(
                rng.uniform(0.2, 6.0),
                rng.uniform(0.2, 3.0),
                rng.uniform(0.2, 4.0),
                rng.uniform(0.2, 3.0),
            );
            let traj = integrate(&params, &s0, 2000.0, tight()).unwrap();
            let target = State4::new(params.k1, 0.0, params.k2, 0.0);
            assert!(
                traj.last().dist_max(&target) < 1e-6,
                "final {:?}",
                traj.last()
            );
        }
    }

    #[test]
    fn fixed_cap_step_halving_shows_high_order() {
        // run with huge tolerances so the step cap is the active control,
        // then halve the cap: global error at t = 10 must drop by >= 8
        let params = fig1_params();
        let s0 = State4::new(1.0, 1.0, 1.0, 1.0);
        let loose = |cap: f64| Tolerances {
            abs_tol: 1e6,
            rel_tol: 1e6,
            max_step: cap,
        };
        let reference = integrate(&params, &s0, 10.0, tight()).unwrap().last();
        let coarse = integrate(&params, &s0, 10.0, loose(0.5)).unwrap().last();
        let fine = integrate(&params, &s0, 10.0, loose(0.25)).unwrap().last();
        let e_coarse = coarse.dist_max(&reference);
        let e_fine = fine.dist_max(&reference);
        assert!(
            e_coarse / e_fine >= 8.0,
            "order check failed: {e_coarse} vs {e_fine}"
        );
        // and tightening tolerances tightens the answer
        let mid = integrate(
            &params,
            &s0,
            10.0,
            Tolerances {
                abs_tol: 1e-6,
                rel_tol: 1e-4,
                max_step: 1.0,
            },
        )
        .unwrap()
        .last();
        assert!(mid.dist_max(&reference) < 1e-3);
    }

    #[test]
    fn single_patch_gas_limit_independent_of_start() {
        // uncoupled patch in the globally stable window converges to
        // (mu, nu) from anywhere
        let params = ModelParams {
            r: 1.0,
            k1: 5.0,
            k2: 5.0,
            a1: 0.27,
            a2: 0.27,
            d1: 0.2,
            d2: 0.2,
            rho1: 0.0,
            rho2: 0.0,
            variant: Variant::StrengthDriven,
        };
        let dq = derived(&params);
        let mut rng = SplitMix64::new(9);
        for _ in 0..10 {
            let s0 = State4::new(
                rng.uniform(0.05, 6.0),
                rng.uniform(0.05, 8.0),
                rng.uniform(0.05, 6.0),
                rng.uniform(0.05, 8.0),
            );
            let traj = integrate(&params, &s0, 4000.0, tight()).unwrap();
            let target = State4::new(dq.mu1, dq.nu1, dq.mu2, dq.nu2);
            assert!(traj.last().dist_max(&target) < 1e-6, "{:?}", traj.last());
        }
    }

    #[test]
    fn dissipativity_bound_holds_along_trajectories() {
        let mut params = fig1_params();
        params.rho1 = 1.0;
        params.rho2 = 1.0;
        let bound = dissipativity_bound(&params).unwrap();
        let mut rng = SplitMix64::new(0xb0);
        for _ in 0..20 {
            let s0 = State4::new(
                rng.uniform(0.1, 6.0),
                rng.uniform(0.1, 8.0),
                rng.uniform(0.1, 4.0),
                rng.uniform(0.1, 8.0),
            );
            let traj = integrate(&params, &s0, 600.0, Tolerances::default()).unwrap();
            let tail = traj.window_start(300.0);
            for s in &traj.states[tail..] {
                assert!(
                    dissipativity_v(&params, s) <= bound + 1e-3,
                    "V = {} > bound {}",
                    dissipativity_v(&params, s),
                    bound
                );
            }
        }
    }

    #[test]
    fn classify_uncoupled_fig1_interior_start() {
        let mut params = fig1_params();
        params.rho1 = 0.0;
        params.rho2 = 0.0;
        // patch 1 has a slow real mode (about -0.013), so the default-scale
        // transient is required before the window statistics settle
        let horizons = Horizons {
            transient: 2000.0,
            window: 1000.0,
        };
        let traj = integrate(
            &params,
            &State4::new(3.0, 2.0, 1.5, 4.0),
            horizons.t_end(),
            Tolerances::default(),
        )
        .unwrap();
        let label = classify_attractor(&params, &traj, &horizons).unwrap();
        assert_eq!(label.kind, AttractorKind::InteriorEquilibrium);
    }

    #[test]
    fn classify_cycle_when_both_patches_oscillate() {
        let mut params = fig1_params();
        params.a1 = 0.35;
        params.a2 = 0.25;
        params.rho1 = 0.0;
        params.rho2 = 0.0;
        let horizons = Horizons {
            transient: 800.0,
            window: 700.0,
        };
        let traj = integrate(
            &params,
            &State4::new(3.0, 2.0, 1.5, 4.0),
            horizons.t_end(),
            Tolerances::default(),
        )
        .unwrap();
        let label = classify_attractor(&params, &traj, &horizons).unwrap();
        assert_eq!(label.kind, AttractorKind::InteriorCycle);
        // non-damping oscillation: peak-to-peak of x1 over the window
        assert!(label.witness.max[0] - label.witness.min[0] > 1e-2);
    }

    #[test]
    fn classify_extinction_labels() {
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        let horizons = Horizons {
            transient: 500.0,
            window: 500.0,
        };
        let traj = integrate(
            &params,
            &State4::new(3.0, 2.0, 1.5, 4.0),
            horizons.t_end(),
            Tolerances::default(),
        )
        .unwrap();
        let label = classify_attractor(&params, &traj, &horizons).unwrap();
        assert_eq!(label.kind, AttractorKind::BothPredatorsExtinct);
    }

    #[test]
    fn theorem3_descent_along_trajectories() {
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        let traj = integrate(
            &params,
            &State4::new(3.0, 2.0, 1.5, 4.0),
            1500.0,
            tight(),
        )
        .unwrap();
        let report = lyapunov_check(&params, LyapunovKind::Th3V, &traj).unwrap();
        assert_eq!(report.monotonicity_violations, 0, "{report:?}");
        assert!(report.max_dvdt <= 1e-12, "max dV/dt {}", report.max_dvdt);
        assert!(report.v_last < report.v_first);
        // dV/dt -> 0 at the equilibrium itself
        let eq_traj = Trajectory {
            times: vec![0.0],
            states: vec![State4::new(params.k1, 1e-30, params.k2, 1e-30)],
            accepted: 0,
            rejected: 0,
            status: IntegratorStatus::ReachedEnd,
        };
        let at_eq = lyapunov_check(&params, LyapunovKind::Th3V, &eq_traj).unwrap();
        assert!(at_eq.dvdt_at_last.abs() < 1e-10);
    }

    #[test]
    fn lyapunov_not_applicable_outside_regime() {
        let params = fig1_params(); // mu_i < K_i: Th3 hypotheses fail
        let traj = Trajectory {
            times: vec![0.0],
            states: vec![State4::new(1.0, 1.0, 1.0, 1.0)],
            accepted: 0,
            rejected: 0,
            status: IntegratorStatus::ReachedEnd,
        };
        assert!(matches!(
            lyapunov_check(&params, LyapunovKind::Th3V, &traj),
            Err(CoreError::NotApplicable(_))
        ));
    }

    #[test]
    fn analytic_dvdt_matches_gradient_dot_rhs() {
        // finite-difference cross-check of each closed-form dV/dt
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        let fns = build_lyapunov(&params, LyapunovKind::Th3V).unwrap();
        let s = State4::new(3.0, 1.5, 2.0, 0.7);
        let dot = rhs(&params, &s).unwrap();
        let h = 1e-7;
        let mut grad_dot = 0.0;
        let sa = s.to_array();
        let da = dot.to_array();
        for c in 0..4 {
            let mut plus = sa;
            plus[c] += h;
            let mut minus = sa;
            minus[c] -= h;
            let vp = (fns.v)(&State4::from_array(plus)).unwrap();
            let vm = (fns.v)(&State4::from_array(minus)).unwrap();
            grad_dot += (vp - vm) / (2.0 * h) * da[c];
        }
        let analytic = (fns.dvdt)(&s).unwrap();
        assert!(
            (grad_dot - analytic).abs() < 1e-6 * (1.0 + analytic.abs()),
            "{grad_dot} vs {analytic}"
        );
    }
}
