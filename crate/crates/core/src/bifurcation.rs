//! Parameter sweeps in one and two dispersal parameters: interior
//! equilibrium counts, per-branch stability, simulated outcome codes, and
//! bisection of single-patch regime transitions.

use crate::classic::classic_interior_equilibria;
use crate::dynamics::{
    classify_attractor, integrate, AttractorKind, Horizons, Tolerances,
};
use crate::equilibria::{interior_equilibria, Equilibrium};
use crate::error::{CoreError, Result};
use crate::model::{q_max, ModelParams, State4, Variant};
use crate::rng::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VaryParam {
    Rho1,
    Rho2,
    A1,
    A2,
}

impl VaryParam {
    pub fn apply(&self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = *params;
        match self {
            VaryParam::Rho1 => p.rho1 = value,
            VaryParam::Rho2 => p.rho2 = value,
            VaryParam::A1 => p.a1 = value,
            VaryParam::A2 => p.a2 = value,
        }
        p
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rho1" => Ok(VaryParam::Rho1),
            "rho2" => Ok(VaryParam::Rho2),
            "a1" => Ok(VaryParam::A1),
            "a2" => Ok(VaryParam::A2),
            _ => Err(CoreError::InvalidParams(format!(
                "unknown sweep parameter {s:?} (expected rho1|rho2|a1|a2)"
            ))),
        }
    }
}

/// Region color coding of the two-parameter diagrams. The integer codes
/// are what the CSV emits: positive codes equal the interior count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionCode {
    ThreeInterior,
    TwoInterior,
    OneInterior,
    /// No interior equilibrium, predator 2 observed to die out (yellow).
    NoneY2Extinct,
    /// No interior equilibrium, both predators die out (white).
    NoneBothExtinct,
    NoneOther,
}

impl RegionCode {
    pub fn code(&self) -> i32 {
        match self {
            RegionCode::ThreeInterior => 3,
            RegionCode::TwoInterior => 2,
            RegionCode::OneInterior => 1,
            RegionCode::NoneY2Extinct => 0,
            RegionCode::NoneBothExtinct => -1,
            RegionCode::NoneOther => -2,
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    /// Varied parameter value(s): one entry in 1-D sweeps, (rho1, rho2)
    /// in 2-D sweeps.
    pub varied: Vec<f64>,
    pub interior: Vec<Equilibrium>,
    pub region: RegionCode,
    /// Branch slot (0..3) per interior equilibrium, stable across
    /// neighboring records.
    pub slots: Vec<usize>,
    pub outcomes: Vec<AttractorKind>,
}

impl SweepRecord {
    /// Modal probe outcome, if any probes ran.
    pub fn outcome(&self) -> Option<AttractorKind> {
        let mut counts: Vec<(AttractorKind, usize)> = Vec::new();
        for o in &self.outcomes {
            match counts.iter_mut().find(|(k, _)| k == o) {
                Some((_, c)) => *c += 1,
                None => counts.push((*o, 1)),
            }
        }
        counts.into_iter().max_by_key(|(_, c)| *c).map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(CoreError::InvalidParams(
                "axis requires finite min < max".into(),
            ));
        }
        if self.steps < 2 {
            return Err(CoreError::InvalidParams("axis needs steps >= 2".into()));
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> f64 {
        self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepConfig {
    pub probes: usize,
    pub seed: u64,
    pub horizons: Horizons,
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            probes: 3,
            seed: 0,
            horizons: Horizons::default(),
            tolerances: Tolerances {
                abs_tol: 1e-8,
                rel_tol: 1e-6,
                max_step: 1.0,
            },
        }
    }
}

fn interior_for(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    match params.variant {
        Variant::StrengthDriven => interior_equilibria(params),
        Variant::DensityDriven => classic_interior_equilibria(params),
    }
}

fn random_interior_start(params: &ModelParams, rng: &mut SplitMix64) -> State4 {
    State4::new(
        rng.uniform(0.05 * params.k1, 0.95 * params.k1),
        rng.uniform(0.05, 0.95) * q_max(1.0, params.k1, params.a1),
        rng.uniform(0.05 * params.k2, 0.95 * params.k2),
        rng.uniform(0.05, 0.95) * q_max(params.r, params.k2, params.a2),
    )
}

fn probe_outcomes(
    params: &ModelParams,
    cfg: &SweepConfig,
    cell_index: u64,
    n: usize,
) -> Result<Vec<AttractorKind>> {
    let mut rng = SplitMix64::for_cell(cfg.seed, cell_index);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let s0 = random_interior_start(params, &mut rng);
        let traj = integrate(params, &s0, cfg.horizons.t_end(), cfg.tolerances)?;
        out.push(classify_attractor(params, &traj, &cfg.horizons)?.kind);
    }
    Ok(out)
}

fn region_of(count: usize, outcomes: &[AttractorKind]) -> RegionCode {
    match count {
        0 => {
            let all = |k: AttractorKind| outcomes.iter().all(|&o| o == k);
            if outcomes.is_empty() {
                RegionCode::NoneOther
            } else if all(AttractorKind::BothPredatorsExtinct) {
                RegionCode::NoneBothExtinct
            } else if outcomes.iter().all(|&o| {
                o == AttractorKind::BoundaryY2Extinct || o == AttractorKind::BothPredatorsExtinct
            }) {
                RegionCode::NoneY2Extinct
            } else {
                RegionCode::NoneOther
            }
        }
        1 => RegionCode::OneInterior,
        2 => RegionCode::TwoInterior,
        // counts above three do not occur for these models; clamp defensively
        _ => RegionCode::ThreeInterior,
    }
}

/// 1-D sweep with branch continuity bookkeeping: each equilibrium keeps the
/// slot of the nearest equilibrium of the previous grid point within
/// 0.05 ||(K1, K2)||, new branches take the first free slot.
pub fn sweep1d(
    params: &ModelParams,
    vary: VaryParam,
    axis: AxisSpec,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    // a single-point range (min = max or steps = 1) is a valid degenerate
    // sweep, so no strict axis validation here
    let n = axis.steps.max(1);
    let match_radius =
        0.05 * (params.k1 * params.k1 + params.k2 * params.k2).sqrt();
    let mut records: Vec<SweepRecord> = Vec::with_capacity(n);
    let mut prev_slots: Vec<(usize, State4)> = Vec::new();
    for k in 0..n {
        let value = if n == 1 { axis.min } else { axis.value(k) };
        let p = vary.apply(params, value);
        p.validate()?;
        let interior = interior_for(&p)?;
        let outcomes = probe_outcomes(&p, cfg, k as u64, cfg.probes)?;
        // keep each equilibrium in the slot of the nearest previous-point
        // equilibrium, one match per slot
        let mut slots = vec![usize::MAX; interior.len()];
        let mut taken = [false; 8];
        for (i, eq) in interior.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for &(slot, st) in &prev_slots {
                if slot >= taken.len() || taken[slot] {
                    continue;
                }
                let d = eq.state.dist_max(&st);
                if d < match_radius && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((slot, d));
                }
            }
            if let Some((slot, _)) = best {
                slots[i] = slot;
                taken[slot] = true;
            }
        }
        for slot in slots.iter_mut() {
            if *slot == usize::MAX {
                let free = (0..taken.len()).find(|&s| !taken[s]).unwrap_or(0);
                *slot = free;
                taken[free] = true;
            }
        }
        prev_slots = slots
            .iter()
            .zip(interior.iter())
            .map(|(&s, eq)| (s, eq.state))
            .collect();
        let region = region_of(interior.len(), &outcomes);
        records.push(SweepRecord {
            varied: vec![value],
            interior,
            region,
            slots,
            outcomes,
        });
    }
    Ok(records)
}

/// Row-major 2-D grid over (rho1, rho2).
#[derive(Debug)]
pub struct Sweep2DGrid {
    pub rho1_axis: AxisSpec,
    pub rho2_axis: AxisSpec,
    pub records: Vec<SweepRecord>,
}

/// Region code per cell; zero-count cells are refined by probe simulation
/// into the extinction-pattern codes. Rows run over rho1, columns over
/// rho2; cells are independent and computed in parallel, output order is
/// (row, col) regardless of scheduling.
pub fn sweep2d(
    params: &ModelParams,
    rho1_axis: AxisSpec,
    rho2_axis: AxisSpec,
    cfg: &SweepConfig,
) -> Result<Sweep2DGrid> {
    rho1_axis.validate()?;
    rho2_axis.validate()?;
    let cells: Vec<(usize, usize)> = (0..rho1_axis.steps)
        .flat_map(|i| (0..rho2_axis.steps).map(move |j| (i, j)))
        .collect();
    let records: Result<Vec<SweepRecord>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let rho1 = rho1_axis.value(i);
            let rho2 = rho2_axis.value(j);
            let mut p = *params;
            p.rho1 = rho1;
            p.rho2 = rho2;
            let interior = interior_for(&p)?;
            let cell_index = (i * rho2_axis.steps + j) as u64;
            // probes only refine zero-count cells
            let outcomes = if interior.is_empty() {
                probe_outcomes(&p, cfg, cell_index, cfg.probes)?
            } else {
                Vec::new()
            };
            let region = region_of(interior.len(), &outcomes);
            let slots = (0..interior.len()).collect();
            Ok(SweepRecord {
                varied: vec![rho1, rho2],
                interior,
                region,
                slots,
                outcomes,
            })
        })
        .collect();
    Ok(Sweep2DGrid {
        rho1_axis,
        rho2_axis,
        records: records?,
    })
}

/// Which single-patch regime boundary to locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Predator invasion threshold mu = K (extinction below, coexistence
    /// above).
    PredatorInvasion,
    /// Hopf threshold mu = (K-1)/2 (stable focus below, limit cycle above
    /// in the predation rate).
    Hopf,
}

const TREND_T_END: f64 = 6000.0;

fn trend_tolerances() -> Tolerances {
    Tolerances {
        abs_tol: 1e-10,
        rel_tol: 1e-8,
        max_step: 0.5,
    }
}

/// Does the predator of `patch` grow when rare, judged by the trend of
/// ln y between two late windows of a long run.
fn predator_grows(params: &ModelParams, patch: usize) -> Result<bool> {
    let (k_own, _, _, _) = params.patch(patch);
    let other = 3 - patch;
    let (k_other, _, _, _) = params.patch(other);
    let mut s = [0.0; 4];
    s[2 * (patch - 1)] = 0.8 * k_own;
    s[2 * (patch - 1) + 1] = 1e-3;
    s[2 * (other - 1)] = k_other;
    let traj = integrate(params, &State4::from_array(s), TREND_T_END, trend_tolerances())?;
    let y_at = |t: f64| -> f64 {
        let i = traj.window_start(t).min(traj.times.len() - 1);
        traj.states[i].to_array()[2 * (patch - 1) + 1]
    };
    let early = y_at(TREND_T_END / 2.0);
    let late = y_at(TREND_T_END - 1.0);
    Ok(late > early)
}

/// Does a small perturbation of the single-patch interior equilibrium
/// oscillate with growing amplitude (limit-cycle side of the Hopf point).
fn oscillation_grows(params: &ModelParams, patch: usize) -> Result<bool> {
    let dq = crate::model::derived(params);
    let (mu, nu) = match patch {
        1 => (dq.mu1, dq.nu1),
        _ => (dq.mu2, dq.nu2),
    };
    if !mu.is_finite() || nu <= 0.0 {
        return Err(CoreError::NotApplicable(
            "Hopf probe needs a finite interior equilibrium".into(),
        ));
    }
    let other = 3 - patch;
    let (k_other, _, _, _) = params.patch(other);
    let delta = 1e-3 * (1.0 + mu);
    let mut s = [0.0; 4];
    s[2 * (patch - 1)] = mu + delta;
    s[2 * (patch - 1) + 1] = nu;
    s[2 * (other - 1)] = k_other;
    let traj = integrate(params, &State4::from_array(s), TREND_T_END, trend_tolerances())?;
    let comp = 2 * (patch - 1);
    let p2p = |t0: f64, t1: f64| -> f64 {
        let a = traj.window_start(t0);
        let b = traj.window_start(t1);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for st in &traj.states[a..b.max(a + 1)] {
            let v = st.to_array()[comp];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    };
    let first = p2p(2000.0, 4000.0);
    let second = p2p(4000.0, TREND_T_END);
    Ok(second > 1.02 * first || second > (30.0 * delta).max(0.02))
}

/// Bisects the varied predation rate to the classification change of the
/// selected kind. The oracle judges the trajectory trend, so the located
/// point tracks the true threshold even where plain window statistics
/// saturate. Dispersal is switched off: these are single-patch regimes.
pub fn locate_single_patch_transition(
    params: &ModelParams,
    vary: VaryParam,
    lo: f64,
    hi: f64,
    kind: TransitionKind,
    tol: f64,
) -> Result<f64> {
    let patch = match vary {
        VaryParam::A1 => 1,
        VaryParam::A2 => 2,
        _ => {
            return Err(CoreError::InvalidParams(
                "single-patch transitions vary a1 or a2".into(),
            ))
        }
    };
    let mut base = *params;
    base.rho1 = 0.0;
    base.rho2 = 0.0;
    let oracle = |a: f64| -> Result<bool> {
        let p = vary.apply(&base, a);
        match kind {
            TransitionKind::PredatorInvasion => predator_grows(&p, patch),
            TransitionKind::Hopf => oscillation_grows(&p, patch),
        }
    };
    let mut lo_v = lo;
    let mut hi_v = hi;
    let f_lo = oracle(lo_v)?;
    let f_hi = oracle(hi_v)?;
    if f_lo == f_hi {
        return Err(CoreError::InvalidParams(format!(
            "transition bracket [{lo}, {hi}] does not straddle a classification change"
        )));
    }
    while hi_v - lo_v > tol {
        let mid = 0.5 * (lo_v + hi_v);
        if oracle(mid)? == f_lo {
            lo_v = mid;
        } else {
            hi_v = mid;
        }
    }
    Ok(0.5 * (lo_v + hi_v))
}
