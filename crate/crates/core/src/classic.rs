//! Everything specific to the density-driven model: Theorem-8 boundary
//! equilibria and predicates, the prey-extinction test, the symmetric
//! global-stability check, and the side-by-side model comparison.

use crate::conditions::{
    combine_all, condition_report, Cmp, ConditionEntry, ConditionReport, OverallFlags,
};
use crate::dynamics::{
    classify_attractor, integrate, lyapunov_check, AttractorKind, DescentReport, Horizons,
    LyapunovKind, Tolerances,
};
use crate::equilibria::{boundary_equilibria, interior_equilibria, Equilibrium, EquilibriumKind};
use crate::error::{CoreError, Result};
use crate::model::{derived, hat_quantities, p, q, q_max, rhs, ModelParams, State4, Variant};
use crate::rng::SplitMix64;
use crate::stability::Stability;
use serde::Serialize;
use std::collections::BTreeMap;

fn require_density(params: &ModelParams) -> Result<()> {
    if params.variant != Variant::DensityDriven {
        return Err(CoreError::NotApplicable(
            "classic-model analysis requires the density-driven variant".into(),
        ));
    }
    Ok(())
}

/// Theorem-8 boundary inventory: the four predator-free corners plus
/// E^b_i = (muhat_i, nuhat_i, 0, nuhat_j^i) (up to coordinate order) when
/// 0 < muhat_i < K_i.
pub fn classic_boundary_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    require_density(params)?;
    let hq = hat_quantities(params);
    let mut out = vec![
        Equilibrium::at_state(params, State4::new(0.0, 0.0, 0.0, 0.0), EquilibriumKind::Origin)?,
        Equilibrium::at_state(
            params,
            State4::new(params.k1, 0.0, 0.0, 0.0),
            EquilibriumKind::K1Only,
        )?,
        Equilibrium::at_state(
            params,
            State4::new(0.0, 0.0, params.k2, 0.0),
            EquilibriumKind::K2Only,
        )?,
        Equilibrium::at_state(
            params,
            State4::new(params.k1, 0.0, params.k2, 0.0),
            EquilibriumKind::BothK,
        )?,
    ];
    if hq.muhat1 > 0.0 && hq.muhat1 < params.k1 {
        out.push(Equilibrium::at_state(
            params,
            State4::new(hq.muhat1, hq.nuhat1, 0.0, hq.nuhat_cross_21),
            EquilibriumKind::ClassicBoundary,
        )?);
    }
    if hq.muhat2 > 0.0 && hq.muhat2 < params.k2 {
        out.push(Equilibrium::at_state(
            params,
            State4::new(0.0, hq.nuhat_cross_12, hq.muhat2, hq.nuhat2),
            EquilibriumKind::ClassicBoundary,
        )?);
    }
    Ok(out)
}

/// Interior equilibria of the density-driven model: 2-D Newton on the
/// predator balance equations along the prey nullclines y_i = q_i(x_i),
/// from a 20x20 multistart grid, deduplicated at radius 1e-6.
pub fn classic_interior_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    require_density(params)?;
    let residual = |x1: f64, x2: f64| -> (f64, f64) {
        let y1 = q(1.0, params.k1, params.a1, x1);
        let y2 = q(params.r, params.k2, params.a2, x2);
        (
            y1 * (p(params.a1, x1) - params.d1) + params.rho1 * (y2 - y1),
            y2 * (p(params.a2, x2) - params.d2) + params.rho2 * (y1 - y2),
        )
    };
    let jac = |x1: f64, x2: f64| -> [[f64; 2]; 2] {
        let y1 = q(1.0, params.k1, params.a1, x1);
        let y2 = q(params.r, params.k2, params.a2, x2);
        let dq1 = (params.k1 - 1.0 - 2.0 * x1) / (params.a1 * params.k1);
        let dq2 = params.r * (params.k2 - 1.0 - 2.0 * x2) / (params.a2 * params.k2);
        let dp1 = params.a1 / ((1.0 + x1) * (1.0 + x1));
        let dp2 = params.a2 / ((1.0 + x2) * (1.0 + x2));
        [
            [
                dq1 * (p(params.a1, x1) - params.d1) + y1 * dp1 - params.rho1 * dq1,
                params.rho1 * dq2,
            ],
            [
                params.rho2 * dq1,
                dq2 * (p(params.a2, x2) - params.d2) + y2 * dp2 - params.rho2 * dq2,
            ],
        ]
    };

    let mut found: Vec<(f64, f64)> = Vec::new();
    let n = 20;
    for i in 1..=n {
        for j in 1..=n {
            let mut x1 = params.k1 * i as f64 / (n + 1) as f64;
            let mut x2 = params.k2 * j as f64 / (n + 1) as f64;
            let mut converged = false;
            for _ in 0..60 {
                let (r1, r2) = residual(x1, x2);
                let m = jac(x1, x2);
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.abs() < 1e-14 {
                    break;
                }
                let dx1 = (r1 * m[1][1] - r2 * m[0][1]) / det;
                let dx2 = (r2 * m[0][0] - r1 * m[1][0]) / det;
                x1 -= dx1;
                x2 -= dx2;
                if !(x1.is_finite() && x2.is_finite()) {
                    break;
                }
                if x1 <= 0.0 || x1 >= params.k1 || x2 <= 0.0 || x2 >= params.k2 {
                    break;
                }
                if dx1.abs() < 1e-13 * params.k1 && dx2.abs() < 1e-13 * params.k2 {
                    converged = true;
                    break;
                }
            }
            if converged && !found.iter().any(|&(a, b)| {
                (a - x1).abs() < 1e-6 && (b - x2).abs() < 1e-6
            }) {
                found.push((x1, x2));
            }
        }
    }
    let mut out = Vec::new();
    for (x1, x2) in found {
        let y1 = q(1.0, params.k1, params.a1, x1);
        let y2 = q(params.r, params.k2, params.a2, x2);
        if y1 < 1e-9 || y2 < 1e-9 {
            continue;
        }
        let s = State4::new(x1, y1, x2, y2);
        if rhs(params, &s)?.max_norm() < 1e-9 {
            out.push(Equilibrium::at_state(params, s, EquilibriumKind::Interior)?);
        }
    }
    out.sort_by(|a, b| a.state.x1.partial_cmp(&b.state.x1).unwrap());
    Ok(out)
}

/// Inventory entry point used by the CLI: boundary plus interior, for
/// whichever variant the parameters select.
pub fn all_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    let mut eqs = match params.variant {
        Variant::StrengthDriven => {
            let mut v = boundary_equilibria(params)?;
            v.extend(interior_equilibria(params)?);
            v
        }
        Variant::DensityDriven => {
            let mut v = classic_boundary_equilibria(params)?;
            v.extend(classic_interior_equilibria(params)?);
            v
        }
    };
    // stable presentation order: boundary kinds first, then interior by x1
    eqs.sort_by(|a, b| {
        let ka = a.kind == EquilibriumKind::Interior;
        let kb = b.kind == EquilibriumKind::Interior;
        ka.cmp(&kb).then(
            a.state
                .x1
                .partial_cmp(&b.state.x1)
                .unwrap()
                .then(a.state.x2.partial_cmp(&b.state.x2).unwrap()),
        )
    });
    Ok(eqs)
}

/// Theorem-8 condition report (items 2-8) with margins. Item 5's
/// extinction threshold is evaluated with both subscript readings (the
/// statement and the proof disagree); `item5.*.proof` drives the flags.
pub fn classic_condition_report(params: &ModelParams) -> Result<ConditionReport> {
    require_density(params)?;
    let hq = hat_quantities(params);
    let dq = derived(params);
    let mut entries = Vec::new();
    let mut values = BTreeMap::new();
    values.insert("muhat1".into(), hq.muhat1);
    values.insert("muhat2".into(), hq.muhat2);
    values.insert("nuhat1".into(), hq.nuhat1);
    values.insert("nuhat2".into(), hq.nuhat2);
    values.insert("nuhat_cross_12".into(), hq.nuhat_cross_12);
    values.insert("nuhat_cross_21".into(), hq.nuhat_cross_21);
    values.insert("mu1".into(), dq.mu1);
    values.insert("mu2".into(), dq.mu2);

    let push = |entries: &mut Vec<ConditionEntry>, clause: &str, cmp: &Cmp| {
        entries.push(ConditionEntry {
            theorem: "th8".into(),
            clause: clause.into(),
            fired: cmp.fired,
            margin: cmp.margin,
            values: values.clone(),
        });
    };

    // item 2: E_{K1 0 K2 0} local stability, second display in its factored
    // (better conditioned) equivalent form
    let p1k = p(params.a1, params.k1);
    let p2k = p(params.a2, params.k2);
    let trace_cond = Cmp::less(p1k + p2k, params.d1 + params.d2 + params.rho1 + params.rho2);
    let det_lhs = (params.d1 - p1k) * (1.0 - p2k / (params.d2 + params.rho2))
        + params.rho1 / (params.d2 + params.rho2) * (params.d2 - p2k);
    let det_cond = Cmp::less(0.0, det_lhs);
    push(&mut entries, "item2.EK10K20_stable", &trace_cond.and(&det_cond));

    // item 2: E^b_i local stability
    for i in [1usize, 2] {
        let (muhat, cross_j) = match i {
            1 => (hq.muhat1, hq.nuhat_cross_21),
            _ => (hq.muhat2, hq.nuhat_cross_12),
        };
        let (k_i, _, _, _) = params.patch(i);
        let r_j = params.growth(3 - i);
        let (_, a_j, _, _) = params.patch(3 - i);
        let exists = Cmp::less(0.0, muhat).and(&Cmp::less(muhat, k_i));
        let cmp = exists
            .and(&Cmp::less((k_i - 1.0) / 2.0, muhat))
            .and(&Cmp::less(r_j, a_j * cross_j));
        push(&mut entries, &format!("item2.Eb{i}_stable"), &cmp);
    }

    // item 3: subsystem regimes
    for i in [1usize, 2] {
        let muhat = if i == 1 { hq.muhat1 } else { hq.muhat2 };
        let (k_i, _, _, _) = params.patch(i);
        push(
            &mut entries,
            &format!("item3b.subsystem{i}_prey_only"),
            &Cmp::less(k_i, muhat),
        );
        push(
            &mut entries,
            &format!("item3c.subsystem{i}_coexist"),
            &Cmp::less((k_i - 1.0) / 2.0, muhat).and(&Cmp::less(muhat, k_i)),
        );
    }

    // item 4: prey persistence
    let prey_clause = |i: usize| -> Cmp {
        // prey x_i persists if muhat_j > K_j (sentinel covers muhat_j < 0)
        // or the subsystem-j equilibrium is invadable
        let j = 3 - i;
        let (k_j, _, _, _) = params.patch(j);
        let muhat_j = if j == 1 { hq.muhat1 } else { hq.muhat2 };
        let cross_i = if i == 1 {
            hq.nuhat_cross_12
        } else {
            hq.nuhat_cross_21
        };
        let r_i = params.growth(i);
        let (_, a_i, _, _) = params.patch(i);
        let gone = Cmp::less(k_j, muhat_j);
        let invade = Cmp::less((k_j - 1.0) / 2.0, muhat_j)
            .and(&Cmp::less(muhat_j, k_j))
            .and(&Cmp::less(a_i * cross_i, r_i));
        gone.or(&invade)
    };
    let prey1 = prey_clause(1);
    let prey2 = prey_clause(2);
    push(&mut entries, "item4.prey_x1_persists", &prey1);
    push(&mut entries, "item4.prey_x2_persists", &prey2);

    let c4a = Cmp::less(params.k1, hq.muhat1).and(&Cmp::less(params.k2, hq.muhat2));
    let window = |i: usize| -> Cmp {
        let muhat = if i == 1 { hq.muhat1 } else { hq.muhat2 };
        let (k, _, _, _) = params.patch(i);
        Cmp::less((k - 1.0) / 2.0, muhat).and(&Cmp::less(muhat, k))
    };
    let invadable = |i: usize| -> Cmp {
        // r_j > a_j nuhat_j^i with patch i carrying the subsystem
        let j = 3 - i;
        let cross_j = if j == 1 {
            hq.nuhat_cross_12
        } else {
            hq.nuhat_cross_21
        };
        let (_, a_j, _, _) = params.patch(j);
        Cmp::less(a_j * cross_j, params.growth(j))
    };
    let c4b = combine_all(&[window(1), invadable(1), window(2), invadable(2)]);
    let c4c_order = |i: usize| {
        let j = 3 - i;
        let (k_i, _, _, _) = params.patch(i);
        let muhat_i = if i == 1 { hq.muhat1 } else { hq.muhat2 };
        Cmp::less(k_i, muhat_i).and(&window(j)).and(&invadable(j))
    };
    let c4c = c4c_order(1).or(&c4c_order(2));
    push(&mut entries, "item4a.both_prey(subsystems_collapse)", &c4a);
    push(&mut entries, "item4b.both_prey(windows_invadable)", &c4b);
    push(&mut entries, "item4c.both_prey(mixed)", &c4c);

    // item 5: prey extinction; statement says q_i max < nuhat_j^i, proof
    // manipulates nuhat_i^j. Both reported, proof side is authoritative.
    for i in [1usize, 2] {
        let j = 3 - i;
        let (k_i, a_i, _, _) = params.patch(i);
        let r_i = params.growth(i);
        let qmax = r_i * (k_i + 1.0) * (k_i + 1.0) / (4.0 * a_i * k_i);
        let (cross_i, cross_j) = match i {
            1 => (hq.nuhat_cross_12, hq.nuhat_cross_21),
            _ => (hq.nuhat_cross_21, hq.nuhat_cross_12),
        };
        let stmt = window(j).and(&Cmp::less(qmax, cross_j));
        let proof = window(j).and(&Cmp::less(qmax, cross_i));
        push(&mut entries, &format!("item5.x{i}_extinct.statement"), &stmt);
        push(&mut entries, &format!("item5.x{i}_extinct.proof"), &proof);
    }

    // item 6: predator dichotomy uses the unhatted mu
    let predators_persist =
        Cmp::less(0.0, dq.mu1)
            .and(&Cmp::less(dq.mu1, params.k1))
            .and(&Cmp::less(0.0, dq.mu2))
            .and(&Cmp::less(dq.mu2, params.k2));
    let predators_extinct = Cmp::less(params.k1, dq.mu1).and(&Cmp::less(params.k2, dq.mu2));
    push(&mut entries, "item6.predators_persist", &predators_persist);
    push(&mut entries, "item6.predators_extinct", &predators_extinct);

    // item 7: permanence
    let c7 = predators_persist.and(&c4a.or(&c4b).or(&c4c));
    push(&mut entries, "item7.permanent", &c7);

    // item 8: symmetric global stability
    let sym = is_symmetric(params);
    let c8 = if sym {
        window(1)
    } else {
        Cmp::less(1.0, 0.0)
    };
    push(
        &mut entries,
        if sym {
            "item8.symmetric_global"
        } else {
            "item8.symmetric_global(not symmetric)"
        },
        &c8,
    );

    Ok(ConditionReport {
        flags: OverallFlags {
            predator1_persistent_sufficient: predators_persist.is_yes(),
            predator2_persistent_sufficient: predators_persist.is_yes(),
            permanent_sufficient: c7.is_yes(),
            global_both_k_sufficient: predators_extinct.is_yes(),
        },
        entries,
    })
}

fn is_symmetric(params: &ModelParams) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    close(params.r, 1.0)
        && close(params.a1, params.a2)
        && close(params.d1, params.d2)
        && close(params.k1, params.k2)
}

/// Result of the symmetric global-stability verification.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricCheckReport {
    pub equilibrium: State4,
    pub residual: f64,
    pub stability: Stability,
    /// True when (K-1)/2 < mu < K, the global-stability window.
    pub in_gas_window: bool,
    pub descent: Option<DescentReport>,
    pub n_starts: usize,
    pub n_converged: usize,
    pub max_final_distance: f64,
}

/// Verifies (mu, nu, mu, nu) as a density-driven equilibrium, runs the
/// Lyapunov descent check and `n_starts` random-start simulations.
pub fn symmetric_global_check(
    params: &ModelParams,
    n_starts: usize,
    seed: u64,
    t_end: f64,
) -> Result<SymmetricCheckReport> {
    require_density(params)?;
    if !is_symmetric(params) {
        return Err(CoreError::NotApplicable(
            "needs r = 1, a1 = a2, d1 = d2, K1 = K2".into(),
        ));
    }
    let dq = derived(params);
    let (mu, nu) = (dq.mu1, dq.nu1);
    if !(mu > 0.0 && mu < params.k1) {
        return Err(CoreError::NotApplicable(
            "symmetric interior equilibrium needs 0 < mu < K".into(),
        ));
    }
    let eq_state = State4::new(mu, nu, mu, nu);
    let eq = Equilibrium::at_state(params, eq_state, EquilibriumKind::Interior)?;
    let in_gas_window = mu > (params.k1 - 1.0) / 2.0;

    let tol = Tolerances {
        abs_tol: 1e-11,
        rel_tol: 1e-9,
        max_step: 1.0,
    };
    let mut rng = SplitMix64::new(seed);
    let mut n_converged = 0;
    let mut max_final = 0.0f64;
    let mut descent = None;
    for k in 0..n_starts {
        let s0 = State4::new(
            rng.uniform(0.05 * params.k1, 0.95 * params.k1),
            rng.uniform(0.1, 1.5 * nu.max(1.0)),
            rng.uniform(0.05 * params.k2, 0.95 * params.k2),
            rng.uniform(0.1, 1.5 * nu.max(1.0)),
        );
        let traj = integrate(params, &s0, t_end, tol)?;
        let dist = traj.last().dist_max(&eq_state);
        max_final = max_final.max(dist);
        if dist < 1e-6 {
            n_converged += 1;
        }
        if k == 0 && in_gas_window {
            descent = Some(lyapunov_check(params, LyapunovKind::Th8SymmetricV, &traj)?);
        }
    }
    Ok(SymmetricCheckReport {
        equilibrium: eq_state,
        residual: eq.residual,
        stability: eq.stability,
        in_gas_window,
        descent,
        n_starts,
        n_converged,
        max_final_distance: max_final,
    })
}

/// One variant's slice of the comparison document.
#[derive(Debug, Clone, Serialize)]
pub struct VariantSummary {
    pub variant: &'static str,
    pub n_boundary: usize,
    pub n_interior: usize,
    pub boundary_kinds: Vec<String>,
    pub interior_stabilities: Vec<String>,
    pub conditions: ConditionReport,
    pub probe_outcomes: Vec<String>,
}

/// Side-by-side inventory, condition reports, and probe outcomes under
/// both dispersal couplings of one shared parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRecord {
    pub strength: VariantSummary,
    pub density: VariantSummary,
}

pub fn compare_models(
    params: &ModelParams,
    probes: usize,
    seed: u64,
    horizons: &Horizons,
) -> Result<ComparisonRecord> {
    let summarize = |variant: Variant| -> Result<VariantSummary> {
        let p = params.with_variant(variant);
        let (boundary, interior, conditions) = match variant {
            Variant::StrengthDriven => (
                boundary_equilibria(&p)?,
                interior_equilibria(&p)?,
                condition_report(&p),
            ),
            Variant::DensityDriven => (
                classic_boundary_equilibria(&p)?,
                classic_interior_equilibria(&p)?,
                classic_condition_report(&p)?,
            ),
        };
        let mut rng = SplitMix64::for_cell(seed, variant as u64);
        let mut outcomes = Vec::new();
        for _ in 0..probes {
            let s0 = State4::new(
                rng.uniform(0.05 * p.k1, 0.95 * p.k1),
                rng.uniform(0.05, 0.95) * q_max(1.0, p.k1, p.a1),
                rng.uniform(0.05 * p.k2, 0.95 * p.k2),
                rng.uniform(0.05, 0.95) * q_max(p.r, p.k2, p.a2),
            );
            let traj = integrate(&p, &s0, horizons.t_end(), Tolerances::default())?;
            outcomes.push(
                classify_attractor(&p, &traj, horizons)?
                    .kind
                    .as_str()
                    .to_string(),
            );
        }
        Ok(VariantSummary {
            variant: match variant {
                Variant::StrengthDriven => "strength",
                Variant::DensityDriven => "density",
            },
            n_boundary: boundary.len(),
            n_interior: interior.len(),
            boundary_kinds: boundary.iter().map(|e| e.kind.as_str().to_string()).collect(),
            interior_stabilities: interior
                .iter()
                .map(|e| e.stability.as_str().to_string())
                .collect(),
            conditions,
            probe_outcomes: outcomes,
        })
    };
    Ok(ComparisonRecord {
        strength: summarize(Variant::StrengthDriven)?,
        density: summarize(Variant::DensityDriven)?,
    })
}

/// Simulation-level probe used by tests: does any predator go extinct
/// (window max below 1e-6) from this start.
pub fn observe_predator_extinction(
    params: &ModelParams,
    s0: &State4,
    horizons: &Horizons,
) -> Result<(bool, bool)> {
    let traj = integrate(params, s0, horizons.t_end(), Tolerances::default())?;
    let label = classify_attractor(params, &traj, horizons)?;
    Ok(match label.kind {
        AttractorKind::BothPredatorsExtinct => (true, true),
        AttractorKind::BoundaryY1Extinct => (true, false),
        AttractorKind::BoundaryY2Extinct => (false, true),
        _ => (false, false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::Fired;
    use crate::test_support::fig1_params;

    fn fig1_density() -> ModelParams {
        fig1_params().with_variant(Variant::DensityDriven)
    }

    #[test]
    fn zero_dispersal_reduces_to_strength_inventory() {
        let mut params = fig1_density();
        params.rho1 = 0.0;
        params.rho2 = 0.0;
        let classic = classic_boundary_equilibria(&params).unwrap();
        // hat quantities collapse to the plain ones, so E^b_i coincides
        // with the strength-model E^b_i1 state
        let hq = hat_quantities(&params);
        let dq = derived(&params);
        assert_eq!(hq.muhat1, dq.mu1);
        assert_eq!(hq.nuhat_cross_21, 0.0);
        assert_eq!(classic.len(), 6);
        let strength = boundary_equilibria(&params.with_variant(Variant::StrengthDriven)).unwrap();
        for target in [
            State4::new(dq.mu1, dq.nu1, 0.0, 0.0),
            State4::new(0.0, 0.0, dq.mu2, dq.nu2),
        ] {
            assert!(classic.iter().any(|e| e.state.dist_max(&target) < 1e-12));
            assert!(strength.iter().any(|e| e.state.dist_max(&target) < 1e-12));
        }
        for eq in &classic {
            assert!(eq.residual < 1e-9);
        }
    }

    #[test]
    fn eb_states_satisfy_subsystem_equations() {
        // rates chosen so both muhat_i stay inside (0, K_i)
        let params = ModelParams {
            r: 1.5,
            k1: 5.0,
            k2: 3.0,
            a1: 0.3,
            a2: 0.3,
            d1: 0.1,
            d2: 0.1,
            rho1: 0.3,
            rho2: 0.3,
            variant: Variant::DensityDriven,
        };
        let hq = hat_quantities(&params);
        // E^b_1 = (muhat1, nuhat1, 0, nuhat_2^1): check the third predator
        // equation -d2 v - rho2 (v - nuhat1) = 0 at v = nuhat_2^1
        let v = hq.nuhat_cross_21;
        let res = -params.d2 * v - params.rho2 * (v - hq.nuhat1);
        assert!(res.abs() < 1e-10, "residual {res}");
        let eqs = classic_boundary_equilibria(&params).unwrap();
        assert!(eqs.iter().all(|e| e.residual < 1e-9));
        assert_eq!(eqs.len(), 6);
    }

    #[test]
    fn ek1k2_sink_predicate_matches_eigenvalues() {
        let mut params = fig1_density();
        params.a1 = 0.2;
        params.a2 = 0.12;
        params.rho1 = 1.0;
        params.rho2 = 1.0;
        // d1+d2+rho1+rho2 = 2.3 > p1(K1)+p2(K2) ~ 0.257 and the factored
        // display is positive
        let report = classic_condition_report(&params).unwrap();
        let entry = report
            .entries
            .iter()
            .find(|e| e.clause == "item2.EK10K20_stable")
            .unwrap();
        assert_eq!(entry.fired, Fired::Yes);
        let eqs = classic_boundary_equilibria(&params).unwrap();
        let both_k = eqs
            .iter()
            .find(|e| e.kind == EquilibriumKind::BothK)
            .unwrap();
        assert_eq!(both_k.stability, Stability::Sink);
    }

    #[test]
    fn uncoupled_permanence_via_4b() {
        let mut params = fig1_density();
        params.rho1 = 0.0;
        params.rho2 = 0.0;
        // 0 < mu_i < K_i both; with rho = 0 the cross levels vanish so
        // r_j > a_j nuhat_j^i trivially
        let report = classic_condition_report(&params).unwrap();
        assert!(report.flags.permanent_sufficient);
        let c4b = report
            .entries
            .iter()
            .find(|e| e.clause.starts_with("item4b"))
            .unwrap();
        assert_eq!(c4b.fired, Fired::Yes);
    }

    #[test]
    fn symmetric_check_reports_equilibrium_and_window() {
        let params = ModelParams {
            r: 1.0,
            k1: 5.0,
            k2: 5.0,
            a1: 0.27,
            a2: 0.27,
            d1: 0.2,
            d2: 0.2,
            rho1: 1.0,
            rho2: 1.0,
            variant: Variant::DensityDriven,
        };
        let report = symmetric_global_check(&params, 3, 11, 4000.0).unwrap();
        assert!(report.residual < 1e-9);
        assert!(report.in_gas_window);
        assert_eq!(report.n_converged, report.n_starts);
        assert_eq!(report.stability, Stability::Sink);
        let asym = fig1_density();
        assert!(symmetric_global_check(&asym, 1, 1, 10.0).is_err());
    }

    #[test]
    fn symmetric_unstable_below_hopf() {
        // mu < (K-1)/2: equilibrium exists but is not a sink
        let params = ModelParams {
            r: 1.0,
            k1: 5.0,
            k2: 5.0,
            a1: 0.35,
            a2: 0.35,
            d1: 0.2,
            d2: 0.2,
            rho1: 0.5,
            rho2: 0.5,
            variant: Variant::DensityDriven,
        };
        let report = symmetric_global_check(&params, 1, 3, 500.0).unwrap();
        assert!(!report.in_gas_window);
        assert_ne!(report.stability, Stability::Sink);
    }
}
