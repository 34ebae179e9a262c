//! Boundary equilibria in closed form and interior equilibria of the
//! strength-driven model via the nullcline pair (F, G) reduced to a single
//! degree-5 polynomial in x1.

use crate::conditions::{combine_all, Cmp, ConditionEntry};
use crate::error::{CoreError, Result};
use crate::model::{derived, q, rhs, ModelParams, State4, Variant};
use crate::poly::{bisect, newton_polish, Poly};
use crate::stability::{classify, eigenvalues, jacobian, Stability};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// Residual gate: every reported equilibrium satisfies |rhs| < this.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Candidates with a predator coordinate below this are boundary, not
/// interior.
pub const BOUNDARY_Y_TOL: f64 = 1e-9;
/// Roots closer than this (relative to K1) merge into one near-degenerate
/// equilibrium.
pub const DEDUP_REL: f64 = 1e-8;
/// |P'| below this at a root of the normalized polynomial flags a fold.
pub const FOLD_DERIV_TOL: f64 = 1e-6;
/// Scan resolution of the primary root isolation.
pub const SCAN_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    Origin,
    K1Only,
    K2Only,
    BothK,
    /// E_{mu1 nu1 0 0}
    PredatorIn1,
    /// E_{mu1 nu1 K2 0}
    PredatorIn1PreyIn2,
    /// E_{0 0 mu2 nu2}
    PredatorIn2,
    /// E_{K1 0 mu2 nu2}
    PreyIn1PredatorIn2,
    Interior,
    /// Theorem-8 boundary equilibria of the density-driven model.
    ClassicBoundary,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Origin => "Origin",
            EquilibriumKind::K1Only => "K1Only",
            EquilibriumKind::K2Only => "K2Only",
            EquilibriumKind::BothK => "BothK",
            EquilibriumKind::PredatorIn1 => "PredatorIn1",
            EquilibriumKind::PredatorIn1PreyIn2 => "PredatorIn1PreyIn2",
            EquilibriumKind::PredatorIn2 => "PredatorIn2",
            EquilibriumKind::PreyIn1PredatorIn2 => "PreyIn1PredatorIn2",
            EquilibriumKind::Interior => "Interior",
            EquilibriumKind::ClassicBoundary => "ClassicBoundary",
        }
    }
}

/// A located steady state with its linearization.
#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub state: State4,
    pub kind: EquilibriumKind,
    #[serde(serialize_with = "crate::equilibria::ser_eigs")]
    pub eigenvalues: [Complex64; 4],
    pub stability: Stability,
    /// Max-norm of the model right-hand side at `state`.
    pub residual: f64,
    /// Fold-adjacent root or merged near-degenerate cluster; excluded from
    /// oracle count comparisons.
    pub degenerate: bool,
}

pub(crate) fn ser_eigs<S>(eigs: &[Complex64; 4], s: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for e in eigs {
        seq.serialize_element(&[e.re, e.im])?;
    }
    seq.end()
}

impl Equilibrium {
    /// Builds the linearization record at a known steady state.
    pub fn at_state(params: &ModelParams, state: State4, kind: EquilibriumKind) -> Result<Self> {
        let residual = rhs(params, &state)?.max_norm();
        let eigs = eigenvalues(&jacobian(params, &state))?;
        Ok(Equilibrium {
            state,
            kind,
            stability: classify(&eigs),
            eigenvalues: eigs,
            residual,
            degenerate: false,
        })
    }
}

/// Coefficient layout of the rational nullclines x1 = F(x2) = f_t/f_b and
/// x2 = G(x1) = g_t/g_b, quadratics in ascending order, r1 = 1 and r2 = r
/// substituted.
#[derive(Debug, Clone, Serialize)]
pub struct NullclineFns {
    pub f_t: [f64; 3],
    pub f_b: [f64; 3],
    pub g_t: [f64; 3],
    pub g_b: [f64; 3],
}

pub fn nullclines(params: &ModelParams) -> NullclineFns {
    let (r, k1, k2) = (params.r, params.k1, params.k2);
    let (a1, a2, d1, d2) = (params.a1, params.a2, params.d1, params.d2);
    let (rho1, rho2) = (params.rho1, params.rho2);
    NullclineFns {
        f_t: [a2 * k2 * d1, a2 * r * rho1 * k2, -a2 * r * rho1],
        f_b: [
            k2 * (a1 * r * rho1 + a1 * a2 - a2 * d1),
            r * rho1 * (k2 * a1 - k2 * a2 - a1),
            -r * rho1 * (a1 - a2),
        ],
        g_t: [a1 * k1 * d2, a1 * rho2 * k1, -a1 * rho2],
        g_b: [
            k1 * (a2 * rho2 + a1 * a2 - a1 * d2),
            rho2 * (k1 * a2 - k1 * a1 - a2),
            -rho2 * (a2 - a1),
        ],
    }
}

fn eval_quad(c: &[f64; 3], x: f64) -> f64 {
    (c[2] * x + c[1]) * x + c[0]
}

fn eval_ratio(num: &[f64; 3], den: &[f64; 3], x: f64, axis: &'static str) -> Result<f64> {
    let b = eval_quad(den, x);
    let scale = den.iter().fold(0.0f64, |m, c| m.max(c.abs())) * (1.0 + x * x);
    if b.abs() <= 1e-14 * scale {
        return Err(CoreError::NullclinePole { axis, location: x });
    }
    Ok(eval_quad(num, x) / b)
}

/// F(x2): the x1 coordinate on the predator-1 nullcline.
pub fn eval_f(nf: &NullclineFns, x2: f64) -> Result<f64> {
    eval_ratio(&nf.f_t, &nf.f_b, x2, "x2")
}

/// G(x1): the x2 coordinate on the predator-2 nullcline.
pub fn eval_g(nf: &NullclineFns, x1: f64) -> Result<f64> {
    eval_ratio(&nf.g_t, &nf.g_b, x1, "x1")
}

/// Unique stationary point x^c of the nullcline seen as a function of
/// patch `j`'s prey axis: x^c_1 for G(x1), x^c_2 for F(x2).
pub fn critical_point(params: &ModelParams, patch: usize) -> Result<f64> {
    let (k, r_own, a_own, d_cross, rho_cross) = match patch {
        1 => (params.k1, 1.0, params.a1, params.d2, params.rho2),
        2 => (params.k2, params.r, params.a2, params.d1, params.rho1),
        _ => panic!("patch index must be 1 or 2"),
    };
    if rho_cross == 0.0 {
        return Err(CoreError::NoCriticalPoint(
            "formula divides by rho; no critical point at zero dispersal".into(),
        ));
    }
    let gap = a_own - d_cross;
    if gap <= 0.0 {
        return Err(CoreError::NoCriticalPoint(format!(
            "requires a_{patch} > d of the other patch, got gap {gap}"
        )));
    }
    let s = r_own * rho_cross;
    Ok(k * (s + gap - (gap * (s + gap)).sqrt()) / s)
}

/// Theorem-2 boundary equilibria of the strength-driven model with their
/// eigenvalue classification. Always the four predator-free corners; the
/// single-patch interior pairs join when 0 < mu_i < K_i.
pub fn boundary_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    if params.variant != Variant::StrengthDriven {
        return Err(CoreError::NotApplicable(
            "strength-driven inventory requested for density-driven params".into(),
        ));
    }
    let dq = derived(params);
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
    if dq.mu1 > 0.0 && dq.mu1 < params.k1 {
        out.push(Equilibrium::at_state(
            params,
            State4::new(dq.mu1, dq.nu1, 0.0, 0.0),
            EquilibriumKind::PredatorIn1,
        )?);
        out.push(Equilibrium::at_state(
            params,
            State4::new(dq.mu1, dq.nu1, params.k2, 0.0),
            EquilibriumKind::PredatorIn1PreyIn2,
        )?);
    }
    if dq.mu2 > 0.0 && dq.mu2 < params.k2 {
        out.push(Equilibrium::at_state(
            params,
            State4::new(0.0, 0.0, dq.mu2, dq.nu2),
            EquilibriumKind::PredatorIn2,
        )?);
        out.push(Equilibrium::at_state(
            params,
            State4::new(params.k1, 0.0, dq.mu2, dq.nu2),
            EquilibriumKind::PreyIn1PredatorIn2,
        )?);
    }
    Ok(out)
}

/// The fixed-point polynomial P(x1) whose roots in (0, K1) are interior
/// x1 candidates: clear denominators of x1 = F(G(x1)).
pub fn interior_polynomial(params: &ModelParams) -> Poly {
    let nf = nullclines(params);
    let gt = Poly::new(nf.g_t.to_vec());
    let gb = Poly::new(nf.g_b.to_vec());
    let gb2 = gb.mul(&gb);
    let gtgb = gt.mul(&gb);
    let gt2 = gt.mul(&gt);
    // f(u) = c0 + c1 u + c2 u^2 cleared over u = g_t/g_b
    let cleared = |c: &[f64; 3]| {
        gb2.scale(c[0])
            .add(&gtgb.scale(c[1]))
            .add(&gt2.scale(c[2]))
    };
    let ft_cleared = cleared(&nf.f_t);
    let fb_cleared = cleared(&nf.f_b);
    fb_cleared.shift_up().sub(&ft_cleared)
}

/// One interior candidate before/after validation.
#[derive(Debug, Clone, Copy)]
struct RootCandidate {
    x1: f64,
    fold: bool,
    merged: bool,
}

fn isolate_roots(p_norm: &Poly, lo: f64, hi: f64) -> Vec<RootCandidate> {
    let dp = p_norm.derivative();
    let n = SCAN_POINTS;
    let mut roots: Vec<f64> = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut prev_x = lo;
    let mut prev_v = p_norm.eval(lo);
    for k in 1..=n {
        let x = lo + step * k as f64;
        let v = p_norm.eval(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v * v < 0.0 {
            let seed = bisect(|t| p_norm.eval(t), prev_x, x, 1e-13 * hi.max(1.0));
            roots.push(newton_polish(p_norm, &dp, seed, prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // merge clusters closer than the dedup radius
    let radius = DEDUP_REL * hi.max(1.0);
    let mut out: Vec<RootCandidate> = Vec::new();
    for r in roots {
        match out.last_mut() {
            Some(last) if (r - last.x1).abs() <= radius => {
                last.x1 = 0.5 * (last.x1 + r);
                last.merged = true;
            }
            _ => out.push(RootCandidate {
                x1: r,
                fold: false,
                merged: false,
            }),
        }
    }
    for c in out.iter_mut() {
        c.fold = dp.eval(c.x1).abs() < FOLD_DERIV_TOL;
    }
    out
}

/// Validates a candidate x1 into a full interior state, or rejects it.
fn validate_candidate(params: &ModelParams, nf: &NullclineFns, x1: f64) -> Option<State4> {
    if !(x1 > 0.0 && x1 < params.k1) {
        return None;
    }
    let x2 = eval_g(nf, x1).ok()?;
    if !(x2 > 0.0 && x2 < params.k2) || !x2.is_finite() {
        return None;
    }
    let y1 = q(1.0, params.k1, params.a1, x1);
    let y2 = q(params.r, params.k2, params.a2, x2);
    if y1 < BOUNDARY_Y_TOL || y2 < BOUNDARY_Y_TOL {
        return None;
    }
    let s = State4::new(x1, y1, x2, y2);
    let res = rhs(params, &s).ok()?.max_norm();
    (res < RESIDUAL_TOL).then_some(s)
}

/// All interior equilibria of the strength-driven model: roots of the
/// fixed-point polynomial on (0, K1), validated by the full right-hand-side
/// residual. Spurious roots introduced by denominator clearing fail the
/// residual test and are dropped.
pub fn interior_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    if params.variant != Variant::StrengthDriven {
        return Err(CoreError::NotApplicable(
            "polynomial interior finder applies to the strength-driven model".into(),
        ));
    }
    let nf = nullclines(params);
    let p_norm = interior_polynomial(params).normalized();
    let eps = 1e-9 * params.k1;
    let mut out = Vec::new();
    for cand in isolate_roots(&p_norm, eps, params.k1 - eps) {
        if let Some(state) = validate_candidate(params, &nf, cand.x1) {
            let mut eq = Equilibrium::at_state(params, state, EquilibriumKind::Interior)?;
            eq.degenerate = cand.fold || cand.merged;
            out.push(eq);
        }
    }
    Ok(out)
}

/// Theorem-6 report: every displayed existence / nonexistence condition
/// with its margin. The two rho displays of the statement are evaluated
/// verbatim and reported separately (their subscripts disagree with the
/// proof; no unified intent is guessed).
pub fn theorem6_existence_report(params: &ModelParams) -> Vec<ConditionEntry> {
    let dq = derived(params);
    let mut entries = Vec::new();
    let mut values = BTreeMap::new();
    values.insert("mu1".into(), dq.mu1);
    values.insert("mu2".into(), dq.mu2);
    values.insert("a1".into(), params.a1);
    values.insert("a2".into(), params.a2);

    let push = |entries: &mut Vec<ConditionEntry>, clause: String, cmp: &Cmp, values: &BTreeMap<String, f64>| {
        entries.push(ConditionEntry {
            theorem: "th6".into(),
            clause,
            fired: cmp.fired,
            margin: cmp.margin,
            values: values.clone(),
        });
    };

    // trivial nonexistence: both predators die out globally
    let both_mu = Cmp::less(params.k1, dq.mu1).and(&Cmp::less(params.k2, dq.mu2));
    push(&mut entries, "no-interior(mu_i>K_i both)".into(), &both_mu, &values);

    let a_gap = params.a1 - params.a2;
    let symmetric_a = a_gap.abs() <= 1e-12 * params.a1.max(params.a2);
    if symmetric_a {
        let a = params.a1;
        let non1 = Cmp::less(a + params.r * params.rho1, params.d1);
        let non2 = Cmp::less(a + 1.0 * params.rho2, params.d2);
        push(&mut entries, "case2.no-interior(d1>a+r2*rho1)".into(), &non1, &values);
        push(&mut entries, "case2.no-interior(d2>a+r1*rho2)".into(), &non2, &values);
        let mut parts = vec![
            Cmp::less(params.d1.max(params.d2), a),
            fg_below_caps(params),
        ];
        // sufficient rho bounds, both orders
        parts.push(Cmp::less(
            params.rho1,
            4.0 * (params.k1 * a - params.k1 * params.d1 - params.d1) / (params.k2 * params.r),
        ));
        parts.push(Cmp::less(
            params.rho2,
            4.0 * (params.k2 * a - params.k2 * params.d2 - params.d2) / (params.k1 * 1.0),
        ));
        let exist = combine_all(&parts[..2]);
        push(&mut entries, "case2.at-least-one(direct caps)".into(), &exist, &values);
        let suff = combine_all(&parts);
        push(&mut entries, "case2.at-least-one(sufficient rho bounds)".into(), &suff, &values);
    } else {
        // the order is fixed by which predation rate dominates
        let (i, j) = if params.a1 > params.a2 { (1, 2) } else { (2, 1) };
        let (k_i, a_i, d_i, rho_i) = params.patch(i);
        let (k_j, a_j, d_j, rho_j) = params.patch(j);
        let (r_i, r_j) = (params.growth(i), params.growth(j));

        let non_bound = 4.0 * k_j * a_j * (a_i - a_j) * (d_i - a_i)
            / (r_j * (k_j * a_i - k_j * a_j + a_i) * (k_j * a_i - k_j * a_j + a_i));
        let non = Cmp::less(rho_i, non_bound);
        push(
            &mut entries,
            format!("case1.no-interior(a{i}>a{j}, rho{i} small)"),
            &non,
            &values,
        );

        let gb_bound = 4.0 * k_i * a_i * (a_j - a_i) * (d_j - a_j)
            / (r_i * (k_i * a_j - k_i * a_i + a_j) * (k_i * a_j - k_i * a_i + a_j));
        let exist = combine_all(&[
            Cmp::less(a_j.max(params.d1.max(params.d2)), a_i),
            Cmp::less(params.d1.max(params.d2), a_j),
            Cmp::less(rho_j, gb_bound),
            fg_below_caps(params),
        ]);
        push(&mut entries, "case1.at-least-one(direct caps)".into(), &exist, &values);

        // the two displayed sufficient rho bounds, verbatim
        let suff_i = Cmp::leq(rho_i, 4.0 * (k_i * a_i - k_i * d_i - d_i) / (k_j * r_j));
        let denom = a_j * r_j * k_j * k_j
            + r_j * k_i * (k_j * a_j - k_j * a_i - a_i) * (k_j * a_j - k_j * a_i - a_i);
        let suff_j = Cmp::less(rho_j, 4.0 * k_j * a_j * (k_i * a_i - k_i * d_i - d_i) / denom);
        push(&mut entries, format!("case1.sufficient(rho{i} display)"), &suff_i, &values);
        push(&mut entries, format!("case1.sufficient(rho{j} display)"), &suff_j, &values);
    }
    entries
}

/// F(x^c_2) < K1 and G(x^c_1) < K2, evaluated directly; reports No when
/// either critical point is undefined.
fn fg_below_caps(params: &ModelParams) -> Cmp {
    let nf = nullclines(params);
    let f_at = critical_point(params, 2)
        .and_then(|xc2| eval_f(&nf, xc2))
        .map(|v| Cmp::less(v, params.k1));
    let g_at = critical_point(params, 1)
        .and_then(|xc1| eval_g(&nf, xc1))
        .map(|v| Cmp::less(v, params.k2));
    match (f_at, g_at) {
        (Ok(a), Ok(b)) => a.and(&b),
        _ => Cmp::less(1.0, 0.0),
    }
}

/// Theorem-6 lower bound on interior x_j:
/// a_i d_j / (a_j r_i rho_j + a_i a_j - a_i d_j).
pub fn interior_lower_bound(params: &ModelParams, patch_j: usize) -> f64 {
    let i = 3 - patch_j;
    let (_, a_i, _, _) = params.patch(i);
    let (_, a_j, d_j, rho_j) = params.patch(patch_j);
    let r_i = params.growth(i);
    a_i * d_j / (a_j * r_i * rho_j + a_i * a_j - a_i * d_j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{fig1_params, golden_max, SplitMix64};

    #[test]
    fn fig1_has_eight_boundary_equilibria() {
        let eqs = boundary_equilibria(&fig1_params()).unwrap();
        assert_eq!(eqs.len(), 8);
        assert!(eqs.iter().all(|e| e.residual < RESIDUAL_TOL));
        let both_k = eqs
            .iter()
            .find(|e| e.kind == EquilibriumKind::BothK)
            .unwrap();
        assert_eq!(both_k.stability, Stability::Saddle);
        let mut re: Vec<f64> = both_k.eigenvalues.iter().map(|e| e.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [-1.5, -1.0, 0.25 * 5.0 / 6.0 - 0.2, 0.0125];
        for (g, w) in re.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn only_four_when_predators_cannot_invade() {
        let mut params = fig1_params();
        params.a1 = 0.19; // mu1 = inf
        params.a2 = 0.05; // mu2 = inf
        let eqs = boundary_equilibria(&params).unwrap();
        assert_eq!(eqs.len(), 4);
        let both_k = eqs
            .iter()
            .find(|e| e.kind == EquilibriumKind::BothK)
            .unwrap();
        assert_eq!(both_k.stability, Stability::Sink);
    }

    #[test]
    fn nullcline_endpoints() {
        let params = fig1_params();
        let nf = nullclines(&params);
        let dq = derived(&params);
        assert!((eval_f(&nf, params.k2).unwrap() - dq.mu1).abs() < 1e-10 * dq.mu1);
        assert!((eval_g(&nf, params.k1).unwrap() - dq.mu2).abs() < 1e-10 * dq.mu2);
        let f0 = params.a2 * params.d1
            / (params.a1 * params.r * params.rho1 + params.a1 * params.a2
                - params.a2 * params.d1);
        assert!((eval_f(&nf, 0.0).unwrap() - f0).abs() < 1e-12);
        // f_t stays above a2 K2 d1 on [0, K2]
        for k in 0..=100 {
            let x2 = params.k2 * k as f64 / 100.0;
            assert!(eval_quad(&nf.f_t, x2) >= params.a2 * params.k2 * params.d1 - 1e-12);
        }
    }

    #[test]
    fn symmetric_nullclines_fix_mu() {
        let params = ModelParams {
            r: 1.0,
            k1: 5.0,
            k2: 5.0,
            a1: 0.27,
            a2: 0.27,
            d1: 0.2,
            d2: 0.2,
            rho1: 0.8,
            rho2: 0.3,
            variant: Variant::StrengthDriven,
        };
        let nf = nullclines(&params);
        let mu = derived(&params).mu1;
        assert!((eval_f(&nf, mu).unwrap() - mu).abs() < 1e-12);
        assert!((eval_g(&nf, mu).unwrap() - mu).abs() < 1e-12);
        // symmetric case: x^c exceeds mu
        assert!(critical_point(&params, 2).unwrap() > mu);
        assert!(critical_point(&params, 1).unwrap() > mu);
    }

    #[test]
    fn critical_point_matches_golden_section() {
        // x^c_2 needs a2 > d1, which Fig. 1 violates; raise a2
        let mut params = fig1_params();
        params.a2 = 0.3;
        // rho -> 0+: stationary point of F approaches K2/2
        let mut near_zero = params;
        near_zero.rho1 = 1e-6;
        let nf = nullclines(&near_zero);
        let xc2 = critical_point(&near_zero, 2).unwrap();
        let by_search = golden_max(|x| eval_f(&nf, x).unwrap(), 1e-9, near_zero.k2, 1e-10);
        assert!((xc2 - by_search).abs() < 1e-4, "{xc2} vs {by_search}");
        assert!((xc2 - near_zero.k2 / 2.0).abs() < 1e-4);

        // derivative vanishes at x^c (central difference)
        let nf = nullclines(&params);
        let xc2 = critical_point(&params, 2).unwrap();
        let h = 1e-6;
        let deriv =
            (eval_f(&nf, xc2 + h).unwrap() - eval_f(&nf, xc2 - h).unwrap()) / (2.0 * h);
        assert!(deriv.abs() < 1e-6, "derivative {deriv}");

        let mut no_disp = params;
        no_disp.rho1 = 0.0;
        assert!(critical_point(&no_disp, 2).is_err());
    }

    #[test]
    fn interior_empty_when_both_predators_die() {
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        assert!(interior_equilibria(&params).unwrap().is_empty());
    }

    #[test]
    fn symmetric_death_rate_root_is_exact() {
        let mut params = fig1_params();
        params.d2 = params.d1;
        params.a2 = 0.3; // mu2 = 2 stays inside (0, K2) with d = 0.2
        params.rho1 = 0.3;
        params.rho2 = 0.7;
        let dq = derived(&params);
        let eqs = interior_equilibria(&params).unwrap();
        let target = State4::new(dq.mu1, dq.nu1, dq.mu2, dq.nu2);
        assert!(
            eqs.iter().any(|e| e.state.dist_max(&target) < 1e-9),
            "missing (mu1, nu1, mu2, nu2) among {eqs:?}"
        );
    }

    #[test]
    fn fully_symmetric_has_unique_interior() {
        let params = ModelParams {
            r: 1.0,
            k1: 5.0,
            k2: 5.0,
            a1: 0.27,
            a2: 0.27,
            d1: 0.2,
            d2: 0.2,
            rho1: 0.8,
            rho2: 0.3,
            variant: Variant::StrengthDriven,
        };
        let dq = derived(&params);
        let eqs = interior_equilibria(&params).unwrap();
        assert_eq!(eqs.len(), 1);
        let target = State4::new(dq.mu1, dq.nu1, dq.mu2, dq.nu2);
        assert!(eqs[0].state.dist_max(&target) < 1e-9);
    }

    #[test]
    fn uncoupled_interior_is_the_single_patch_pair() {
        let mut params = fig1_params();
        params.rho1 = 0.0;
        params.rho2 = 0.0;
        let eqs = interior_equilibria(&params).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0]
            .state
            .dist_max(&State4::new(4.0, 4.0, 2.0, 10.0))
            < 1e-9);
    }

    #[test]
    fn theorem6_symmetric_nonexistence() {
        let mut params = fig1_params();
        params.a2 = params.a1;
        params.d1 = params.a1 + params.r * params.rho1 + 0.1;
        let entries = theorem6_existence_report(&params);
        let non = entries
            .iter()
            .find(|e| e.clause.contains("d1>a+r2*rho1"))
            .unwrap();
        assert_eq!(non.fired, crate::conditions::Fired::Yes);
        assert!(interior_equilibria(&params).unwrap().is_empty());
    }

    #[test]
    fn existence_predicate_consistent_with_root_finder() {
        let mut rng = SplitMix64::new(0x5eed_0001);
        let mut fired_cases = 0;
        let mut draws = 0;
        while fired_cases < 200 && draws < 40_000 {
            draws += 1;
            let params = ModelParams {
                r: rng.uniform(0.5, 2.0),
                k1: rng.uniform(1.5, 7.0),
                k2: rng.uniform(1.5, 7.0),
                a1: rng.uniform(0.1, 0.9),
                a2: rng.uniform(0.1, 0.9),
                d1: rng.uniform(0.05, 0.4),
                d2: rng.uniform(0.05, 0.4),
                rho1: rng.uniform(0.0, 1.0),
                rho2: rng.uniform(0.0, 1.0),
                variant: Variant::StrengthDriven,
            };
            let entries = theorem6_existence_report(&params);
            let exist_fired = entries.iter().any(|e| {
                e.clause.contains("at-least-one(direct caps)")
                    && e.fired == crate::conditions::Fired::Yes
            });
            if !exist_fired {
                continue;
            }
            fired_cases += 1;
            let eqs = interior_equilibria(&params).unwrap();
            assert!(
                !eqs.is_empty(),
                "existence predicate fired but no interior root: {params:?}"
            );
            // Theorem-6 bracketing of reported roots
            for eq in &eqs {
                assert!(eq.state.x1 > interior_lower_bound(&params, 1));
                assert!(eq.state.x2 > interior_lower_bound(&params, 2));
            }
        }
        assert!(fired_cases >= 50, "only {fired_cases} firing draws in {draws}");
    }

    #[test]
    fn residual_gate_holds_for_all_reported() {
        let mut rng = SplitMix64::new(0xabc1);
        for _ in 0..50 {
            let params = ModelParams {
                r: rng.uniform(0.5, 2.0),
                k1: rng.uniform(1.5, 7.0),
                k2: rng.uniform(1.5, 7.0),
                a1: rng.uniform(0.1, 0.9),
                a2: rng.uniform(0.1, 0.9),
                d1: rng.uniform(0.05, 0.4),
                d2: rng.uniform(0.05, 0.4),
                rho1: rng.uniform(0.0, 1.5),
                rho2: rng.uniform(0.0, 1.5),
                variant: Variant::StrengthDriven,
            };
            for eq in boundary_equilibria(&params)
                .unwrap()
                .iter()
                .chain(interior_equilibria(&params).unwrap().iter())
            {
                assert!(eq.residual < RESIDUAL_TOL, "{eq:?}");
            }
        }
    }
}
