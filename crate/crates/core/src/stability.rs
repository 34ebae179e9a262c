//! 4x4 Jacobians of both model variants, eigenvalues via the characteristic
//! quartic, hyperbolic classification, and the symmetric-death-rate
//! characteristic quartic with its stabilizing dispersal thresholds.

use crate::conditions::{combine_all, Cmp, ConditionEntry, Fired};
use crate::error::{CoreError, Result};
use crate::model::{derived, p, ModelParams, State4, Variant};
use num_complex::Complex64;
use serde::Serialize;

/// Row order (x1, y1, x2, y2).
pub type Jacobian4 = [[f64; 4]; 4];

/// Jacobian of the selected variant at state `s`.
pub fn jacobian(params: &ModelParams, s: &State4) -> Jacobian4 {
    let (x1, y1, x2, y2) = (s.x1, s.y1, s.x2, s.y2);
    let p1 = p(params.a1, x1);
    let p2 = p(params.a2, x2);
    // p'(x) = a / (1+x)^2
    let dp1 = params.a1 / ((1.0 + x1) * (1.0 + x1));
    let dp2 = params.a2 / ((1.0 + x2) * (1.0 + x2));

    let mut j = [[0.0; 4]; 4];
    j[0][0] = 1.0 - 2.0 * x1 / params.k1 - dp1 * y1;
    j[0][1] = -p1;
    j[2][2] = params.r * (1.0 - 2.0 * x2 / params.k2) - dp2 * y2;
    j[2][3] = -p2;

    match params.variant {
        Variant::StrengthDriven => {
            j[1][0] = dp1 * y1 * (1.0 + params.rho1 * y2);
            j[1][1] = p1 * (1.0 + params.rho1 * y2) - params.rho1 * p2 * y2 - params.d1;
            j[1][2] = -params.rho1 * dp2 * y1 * y2;
            j[1][3] = params.rho1 * y1 * (p1 - p2);

            j[3][0] = -params.rho2 * dp1 * y1 * y2;
            j[3][1] = params.rho2 * y2 * (p2 - p1);
            j[3][2] = dp2 * y2 * (1.0 + params.rho2 * y1);
            j[3][3] = p2 * (1.0 + params.rho2 * y1) - params.rho2 * p1 * y1 - params.d2;
        }
        Variant::DensityDriven => {
            j[1][0] = dp1 * y1;
            j[1][1] = p1 - params.d1 - params.rho1;
            j[1][3] = params.rho1;

            j[3][2] = dp2 * y2;
            j[3][3] = p2 - params.d2 - params.rho2;
            j[3][1] = params.rho2;
        }
    }
    j
}

fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * det2([[m[1][1], m[1][2]], [m[2][1], m[2][2]]])
        - m[0][1] * det2([[m[1][0], m[1][2]], [m[2][0], m[2][2]]])
        + m[0][2] * det2([[m[1][0], m[1][1]], [m[2][0], m[2][1]]])
}

fn det4(m: &Jacobian4) -> f64 {
    let minor = |col: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != col).collect();
        let mut sub = [[0.0; 3]; 3];
        for r in 1..4 {
            for (k, &c) in cols.iter().enumerate() {
                sub[r - 1][k] = m[r][c];
            }
        }
        det3(sub)
    };
    m[0][0] * minor(0) - m[0][1] * minor(1) + m[0][2] * minor(2) - m[0][3] * minor(3)
}

/// Characteristic polynomial det(lambda I - J) as
/// lambda^4 + c3 lambda^3 + c2 lambda^2 + c1 lambda + c0,
/// assembled from principal-minor sums (exact determinant expansions).
pub fn char_poly(j: &Jacobian4) -> [f64; 4] {
    let trace: f64 = (0..4).map(|i| j[i][i]).sum();
    let mut s2 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            s2 += det2([[j[a][a], j[a][b]], [j[b][a], j[b][b]]]);
        }
    }
    let mut s3 = 0.0;
    for a in 0..4 {
        let rows: Vec<usize> = (0..4).filter(|&r| r != a).collect();
        let mut sub = [[0.0; 3]; 3];
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in rows.iter().enumerate() {
                sub[ri][ci] = j[r][c];
            }
        }
        s3 += det3(sub);
    }
    let s4 = det4(j);
    [-trace, s2, -s3, s4]
}

/// Roots of a monic quartic by Durand-Kerner simultaneous iteration.
/// `coeffs` are [c3, c2, c1, c0] of x^4 + c3 x^3 + c2 x^2 + c1 x + c0.
pub fn quartic_roots(coeffs: [f64; 4]) -> Result<[Complex64; 4]> {
    const MAX_ITERS: usize = 200;
    let eval = |z: Complex64| -> Complex64 {
        (((z + coeffs[0]) * z + coeffs[1]) * z + coeffs[2]) * z + coeffs[3]
    };
    // roots are bounded by 1 + max |c_k|
    let bound = 1.0 + coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
    for zi in z.iter_mut() {
        *zi *= bound;
    }
    for _ in 0..MAX_ITERS {
        let mut max_step = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..4 {
                if k != i {
                    denom *= z[i] - z[k];
                }
            }
            if denom.norm() == 0.0 {
                // collided iterates; nudge apart
                z[i] += Complex64::new(1e-8 * bound, 1e-8 * bound);
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-14 * (1.0 + bound) {
            break;
        }
    }
    let scale = 1.0 + bound.powi(4);
    for zi in &z {
        if !zi.re.is_finite() || !zi.im.is_finite() || eval(*zi).norm() > 1e-9 * scale {
            return Err(CoreError::EigenvalueFailure(MAX_ITERS));
        }
    }
    // canonical order for reproducible output
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(z)
}

/// Eigenvalues of a 4x4 real matrix via its characteristic quartic.
/// Verifies trace and determinant identities before returning.
pub fn eigenvalues(j: &Jacobian4) -> Result<[Complex64; 4]> {
    for row in j {
        for v in row {
            if !v.is_finite() {
                return Err(CoreError::NonFiniteInput("jacobian entry"));
            }
        }
    }
    let c = char_poly(j);
    let roots = quartic_roots(c)?;
    let trace: f64 = (0..4).map(|i| j[i][i]).sum();
    let det = det4(j);
    let sum: Complex64 = roots.iter().sum();
    let prod: Complex64 = roots.iter().product();
    let sum_scale = 1.0 + trace.abs();
    let prod_scale = 1.0 + det.abs();
    if (sum.re - trace).abs() > 1e-8 * sum_scale
        || sum.im.abs() > 1e-8 * sum_scale
        || (prod.re - det).abs() > 1e-8 * prod_scale
        || prod.im.abs() > 1e-8 * prod_scale
    {
        return Err(CoreError::EigenvalueFailure(200));
    }
    Ok(roots)
}

/// Band below which an eigenvalue real part counts as marginal.
pub const MARGIN_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Sink,
    Saddle,
    Source,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Sink => "Sink",
            Stability::Saddle => "Saddle",
            Stability::Source => "Source",
            Stability::Marginal => "Marginal",
        }
    }
}

/// Hyperbolic classification with a +-1e-9 indeterminacy band on real parts.
pub fn classify(eigs: &[Complex64; 4]) -> Stability {
    let any_pos = eigs.iter().any(|e| e.re > MARGIN_BAND);
    let any_neg = eigs.iter().any(|e| e.re < -MARGIN_BAND);
    let any_band = eigs.iter().any(|e| e.re.abs() <= MARGIN_BAND);
    if any_pos && any_neg {
        Stability::Saddle
    } else if any_band {
        Stability::Marginal
    } else if any_pos {
        Stability::Source
    } else {
        Stability::Sink
    }
}

/// Theorem-2 style predicates for the boundary equilibrium that pairs the
/// interior pair of patch `i` with patch `j` at carrying capacity.
/// Entries carry explicit margins; `expected` summarizes what the fired
/// clauses predict.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPredicateReport {
    /// Patch carrying (mu_i, nu_i).
    pub patch: usize,
    pub exists: bool,
    pub entries: Vec<ConditionEntry>,
    /// Some(Sink) / Some(Saddle) when a clause fires cleanly, None when
    /// nothing fires or only boundary cases fire.
    pub expected: Option<Stability>,
    pub boundary_case: bool,
}

/// Evaluates the stability clauses sa-sd and saddle clauses ua-uc for
/// E^b_i2, plus the Hopf window on patch i.
pub fn theorem2_boundary_predicates(params: &ModelParams, patch_i: usize) -> BoundaryPredicateReport {
    let dq = derived(params);
    let (mu_i, _nu_i, k_i) = match patch_i {
        1 => (dq.mu1, dq.nu1, params.k1),
        _ => (dq.mu2, dq.nu2, params.k2),
    };
    let patch_j = 3 - patch_i;
    let (mu_j, nu_i, k_j) = match patch_i {
        1 => (dq.mu2, dq.nu1, params.k2),
        _ => (dq.mu1, dq.nu2, params.k1),
    };
    let (_, a_j, d_j, rho_j) = params.patch(patch_j);
    let (_, _, d_i, _) = params.patch(patch_i);

    let exists = mu_i > 0.0 && mu_i < k_i;
    let mut entries = Vec::new();
    let th = format!("th2.E{patch_i}2");

    // K_j (a_j - d_i) - d_i < 0 is the safe primitive behind K_j < d_i/(a_j - d_i)
    let kj_below_ratio = Cmp::less(k_j * (a_j - d_i), d_i);
    let kj_above_ratio = Cmp::less(d_i, k_j * (a_j - d_i));
    let hopf_window = Cmp::less((k_i - 1.0) / 2.0, mu_i).and(&Cmp::less(mu_i, k_i));

    // rho_j threshold shared by sc/ub (lambda2 = 0 locus when K_j(a_j-d_i) > d_i)
    let rho_crit_pos = (d_j - k_j * (a_j - d_j)) / (nu_i * (k_j * (a_j - d_i) - d_i));
    // and by sd/uc (when K_j(a_j-d_i) < d_i)
    let rho_crit_neg = (k_j * (a_j - d_j) - d_j) / (nu_i * (d_i - k_j * (a_j - d_i)));

    let sa = Cmp::leq(a_j, d_i).and(&Cmp::less(k_j, mu_j));
    let sb = Cmp::less(k_j, mu_j).and(&kj_below_ratio);
    let sc = kj_above_ratio
        .and(&Cmp::less(k_j, mu_j))
        .and(&Cmp::less(rho_j, rho_crit_pos));
    let sd = Cmp::less(mu_j, k_j)
        .and(&kj_below_ratio)
        .and(&Cmp::less(rho_crit_neg, rho_j));
    let ua = Cmp::less(mu_j, k_j).and(&kj_above_ratio);
    let ub = kj_above_ratio
        .and(&Cmp::less(k_j, mu_j))
        .and(&Cmp::less(rho_crit_pos, rho_j));
    let uc = Cmp::less(mu_j, k_j)
        .and(&kj_below_ratio)
        .and(&Cmp::less(rho_j, rho_crit_neg));
    let low_mu = Cmp::less(mu_i, (k_i - 1.0) / 2.0).and(&Cmp::less(0.0, mu_i));

    let mut values = std::collections::BTreeMap::new();
    values.insert("mu_i".to_string(), mu_i);
    values.insert("mu_j".to_string(), mu_j);
    values.insert("nu_i".to_string(), nu_i);
    values.insert("rho_j".to_string(), rho_j);
    values.insert("rho_crit_pos".to_string(), rho_crit_pos);
    values.insert("rho_crit_neg".to_string(), rho_crit_neg);

    for (clause, cmp) in [
        ("hopf_window", &hopf_window),
        ("sa", &sa),
        ("sb", &sb),
        ("sc", &sc),
        ("sd", &sd),
        ("ua", &ua),
        ("ub", &ub),
        ("uc", &uc),
        ("mu_below_hopf", &low_mu),
    ] {
        entries.push(ConditionEntry {
            theorem: th.clone(),
            clause: clause.to_string(),
            fired: cmp.fired,
            margin: cmp.margin,
            values: values.clone(),
        });
    }

    let stable_side = combine_all(&[hopf_window.clone(), sa.or(&sb).or(&sc).or(&sd)]);
    let saddle_side = low_mu.or(&ua).or(&ub).or(&uc);
    let expected = match (stable_side.fired, saddle_side.fired) {
        (Fired::Yes, _) => Some(Stability::Sink),
        (_, Fired::Yes) => Some(Stability::Saddle),
        _ => None,
    };
    let boundary_case =
        stable_side.fired == Fired::Boundary || saddle_side.fired == Fired::Boundary;

    BoundaryPredicateReport {
        patch: patch_i,
        exists,
        entries,
        expected,
        boundary_case,
    }
}

/// Characteristic quartic H of the interior equilibrium when d1 = d2 = d:
/// lambda^4 + (a1+a2) l^3 + [a1 a2 + d(b1+b2)] l^2 + d(a1 b2 + a2 b1) l
/// + d^2 (b1 b2 - g1 g2), with the alpha/beta/gamma combinations below.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CharQuartic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
}

impl CharQuartic {
    pub fn coeffs(&self) -> [f64; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }

    pub fn roots(&self) -> Result<[Complex64; 4]> {
        quartic_roots(self.coeffs())
    }

    /// Routh-Hurwitz test for all roots in the open left half plane.
    pub fn all_roots_stable(&self) -> bool {
        let (c3, c2, c1, c0) = (self.c3, self.c2, self.c1, self.c0);
        c3 > 0.0 && c1 > 0.0 && c0 > 0.0 && (c3 * c2 - c1) * c1 - c3 * c3 * c0 > 0.0
    }
}

fn symmetric_d(params: &ModelParams) -> Result<f64> {
    let scale = params.d1.abs().max(params.d2.abs());
    if (params.d1 - params.d2).abs() > 1e-12 * scale.max(1.0) {
        return Err(CoreError::NotApplicable(format!(
            "requires d1 = d2, got d1 = {}, d2 = {}",
            params.d1, params.d2
        )));
    }
    Ok(params.d1)
}

/// Builds the quartic from the proof's alpha_i, beta_i, gamma_i.
/// Requires d1 = d2 and 0 < mu_i < K_i for both patches.
pub fn theorem7_quartic(params: &ModelParams) -> Result<CharQuartic> {
    let d = symmetric_d(params)?;
    let dq = derived(params);
    if !(dq.mu1 > 0.0 && dq.mu1 < params.k1 && dq.mu2 > 0.0 && dq.mu2 < params.k2) {
        return Err(CoreError::NotApplicable(
            "requires 0 < mu_i < K_i for both patches".to_string(),
        ));
    }
    let (nu1, nu2, mu1, mu2) = (dq.nu1, dq.nu2, dq.mu1, dq.mu2);
    let (a1, a2) = (params.a1, params.a2);
    let (k1, k2) = (params.k1, params.k2);
    let alpha1 = -1.0 * mu1 * (k1 * a1 - k1 * d - a1 - d) / (k1 * a1);
    let alpha2 = -params.r * mu2 * (k2 * a2 - k2 * d - a2 - d) / (k2 * a2);
    let beta1 = nu1 * (nu2 * params.rho1 + 1.0) * (a1 - d) * (a1 - d) / a1;
    let beta2 = nu2 * (nu1 * params.rho2 + 1.0) * (a2 - d) * (a2 - d) / a2;
    let gamma1 = params.rho1 * nu1 * nu2 * (a2 - d) * (a2 - d) / a2;
    let gamma2 = params.rho2 * nu1 * nu2 * (a1 - d) * (a1 - d) / a1;
    Ok(CharQuartic {
        c3: alpha1 + alpha2,
        c2: alpha1 * alpha2 + d * (beta1 + beta2),
        c1: d * (alpha1 * beta2 + alpha2 * beta1),
        c0: d * d * (beta1 * beta2 - gamma1 * gamma2),
        alpha: [alpha1, alpha2],
        beta: [beta1, beta2],
        gamma: [gamma1, gamma2],
    })
}

/// The two displayed lower bounds on rho_i that stabilize the symmetric-d
/// interior equilibrium, reported verbatim; the quartic's Routh-Hurwitz
/// signs are the ground truth for actual stability.
pub fn theorem7_rho_threshold(params: &ModelParams, patch_i: usize) -> Result<f64> {
    let d = symmetric_d(params)?;
    let dq = derived(params);
    let (mu_i, mu_j, nu_i, nu_j, a_i, a_j, k_i, k_j, r_j, rho_j) = match patch_i {
        1 => (
            dq.mu1, dq.mu2, dq.nu1, dq.nu2, params.a1, params.a2, params.k1, params.k2,
            params.r, params.rho2,
        ),
        _ => (
            dq.mu2, dq.mu1, dq.nu2, dq.nu1, params.a2, params.a1, params.k2, params.k1,
            1.0, params.rho1,
        ),
    };
    let ci = k_i * a_i - k_i * d - a_i - d;
    let cj = k_j * a_j - k_j * d - a_j - d;
    let expr1 = (-nu_j - r_j * mu_i * mu_j * ci * cj)
        / (k_i * k_j * a_j * nu_j * d * nu_i * (a_i - d) * (a_i - d));
    let expr2 = (-(mu_i * nu_j * k_j * (nu_i * rho_j + 1.0) * (a_j - d) * (a_j - d) * ci)
        / (r_j * mu_j * nu_i * k_i * (a_i - d) * (a_i - d) * cj)
        - 1.0)
        / nu_j;
    Ok(expr1.max(expr2))
}

pub fn to_eig_pairs(eigs: &[Complex64; 4]) -> [[f64; 2]; 4] {
    [
        [eigs[0].re, eigs[0].im],
        [eigs[1].re, eigs[1].im],
        [eigs[2].re, eigs[2].im],
        [eigs[3].re, eigs[3].im],
    ]
}

/// Minimal max-norm matching distance between two eigenvalue multisets.
pub fn multiset_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let idx = [0usize, 1, 2, 3];
    let mut best = f64::INFINITY;
    permute(&idx, &mut |perm| {
        let d = (0..4).fold(0.0f64, |m, i| m.max((a[i] - b[perm[i]]).norm()));
        best = best.min(d);
    });
    best
}

fn permute(items: &[usize; 4], visit: &mut impl FnMut(&[usize; 4])) {
    let mut arr = *items;
    heap_permute(&mut arr, 4, visit);
}

fn heap_permute(arr: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
    if k == 1 {
        visit(arr);
        return;
    }
    for i in 0..k {
        heap_permute(arr, k - 1, visit);
        if k % 2 == 0 {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}
