//! Persistence / permanence / extinction hypotheses of the strength-driven
//! model as machine-checkable predicates with margins.

use crate::model::{derived, ModelParams};
use serde::Serialize;
use std::collections::BTreeMap;

/// Comparisons closer than this count as a boundary case: theorem
/// hypotheses are open conditions and sweeps land near their boundaries.
pub const INDETERMINACY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fired {
    Yes,
    No,
    Boundary,
}

/// One evaluated inequality (or conjunction of them) with its margin:
/// positive means satisfied, negative violated, magnitude is the distance
/// to the boundary.
#[derive(Debug, Clone)]
pub struct Cmp {
    pub fired: Fired,
    pub margin: f64,
}

impl Cmp {
    fn from_margin(margin: f64) -> Self {
        let fired = if margin.is_nan() {
            Fired::Boundary
        } else if margin > INDETERMINACY_BAND {
            Fired::Yes
        } else if margin < -INDETERMINACY_BAND {
            Fired::No
        } else {
            Fired::Boundary
        };
        Cmp { fired, margin }
    }

    /// Strict `a < b`.
    pub fn less(a: f64, b: f64) -> Self {
        // keep the margin finite-friendly when both sides are infinite
        let margin = if a == b { 0.0 } else { b - a };
        Cmp::from_margin(margin)
    }

    /// Non-strict `a <= b`; indistinguishable from `less` outside the band.
    pub fn leq(a: f64, b: f64) -> Self {
        Cmp::less(a, b)
    }

    pub fn and(&self, other: &Cmp) -> Cmp {
        let margin = self.margin.min(other.margin);
        let fired = match (self.fired, other.fired) {
            (Fired::No, _) | (_, Fired::No) => Fired::No,
            (Fired::Yes, Fired::Yes) => Fired::Yes,
            _ => Fired::Boundary,
        };
        Cmp { fired, margin }
    }

    pub fn or(&self, other: &Cmp) -> Cmp {
        let margin = self.margin.max(other.margin);
        let fired = match (self.fired, other.fired) {
            (Fired::Yes, _) | (_, Fired::Yes) => Fired::Yes,
            (Fired::No, Fired::No) => Fired::No,
            _ => Fired::Boundary,
        };
        Cmp { fired, margin }
    }

    pub fn is_yes(&self) -> bool {
        self.fired == Fired::Yes
    }
}

pub fn combine_all(parts: &[Cmp]) -> Cmp {
    parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, c| acc.and(c))
}

pub fn combine_any(parts: &[Cmp]) -> Cmp {
    parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, c| acc.or(c))
}

/// One theorem clause evaluated at a parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub theorem: String,
    pub clause: String,
    pub fired: Fired,
    pub margin: f64,
    pub values: BTreeMap<String, f64>,
}

impl ConditionEntry {
    fn new(theorem: &str, clause: String, cmp: &Cmp, values: BTreeMap<String, f64>) -> Self {
        ConditionEntry {
            theorem: theorem.to_string(),
            clause,
            fired: cmp.fired,
            margin: cmp.margin,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverallFlags {
    pub predator1_persistent_sufficient: bool,
    pub predator2_persistent_sufficient: bool,
    pub permanent_sufficient: bool,
    pub global_both_k_sufficient: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    pub flags: OverallFlags,
}

struct PatchView {
    mu_i: f64,
    mu_j: f64,
    nu_i: f64,
    nu_j: f64,
    k_i: f64,
    k_j: f64,
    a_i: f64,
    a_j: f64,
    d_i: f64,
    d_j: f64,
    rho_i: f64,
    rho_j: f64,
}

fn view(params: &ModelParams, i: usize) -> PatchView {
    let dq = derived(params);
    let (mu1, mu2, nu1, nu2) = (dq.mu1, dq.mu2, dq.nu1, dq.nu2);
    let (k_i, a_i, d_i, rho_i) = params.patch(i);
    let (k_j, a_j, d_j, rho_j) = params.patch(3 - i);
    let (mu_i, nu_i, mu_j, nu_j) = if i == 1 {
        (mu1, nu1, mu2, nu2)
    } else {
        (mu2, nu2, mu1, nu1)
    };
    PatchView {
        mu_i,
        mu_j,
        nu_i,
        nu_j,
        k_i,
        k_j,
        a_i,
        a_j,
        d_i,
        d_j,
        rho_i,
        rho_j,
    }
}

fn hopf_window(mu: f64, k: f64) -> Cmp {
    Cmp::less((k - 1.0) / 2.0, mu).and(&Cmp::less(mu, k))
}

/// Theorem 3: global stability of E_{K1 0 K2 0} iff mu_i > K_i for both
/// patches (the +inf sentinel counts as greater).
pub fn check_theorem3(params: &ModelParams) -> (Vec<ConditionEntry>, bool) {
    let dq = derived(params);
    let cmp = Cmp::less(params.k1, dq.mu1).and(&Cmp::less(params.k2, dq.mu2));
    let mut values = BTreeMap::new();
    values.insert("mu1".into(), dq.mu1);
    values.insert("mu2".into(), dq.mu2);
    values.insert("K1".into(), params.k1);
    values.insert("K2".into(), params.k2);
    let entry = ConditionEntry::new("th3", "mu_i>K_i both".into(), &cmp, values);
    (vec![entry], cmp.is_yes())
}

/// Theorem 4: the three displayed sufficiency clauses per predator.
/// Prey are always persistent; the flags here concern the predators.
pub fn check_theorem4(params: &ModelParams) -> (Vec<ConditionEntry>, [bool; 2]) {
    let mut entries = Vec::new();
    let mut flags = [false; 2];
    for j in [1usize, 2] {
        let i = 3 - j;
        // view indexed so that the predator under test is patch j
        let v = view(params, i);
        let mut values = BTreeMap::new();
        values.insert("mu_i".into(), v.mu_i);
        values.insert("mu_j".into(), v.mu_j);
        values.insert("nu_i".into(), v.nu_i);
        values.insert("rho_j".into(), v.rho_j);

        let c1 = Cmp::less(v.mu_j, v.k_j).and(&Cmp::less(v.k_i, v.mu_i));
        let c2 = hopf_window(v.mu_i, v.k_i)
            .and(&Cmp::less(v.mu_j, v.k_j))
            .and(&Cmp::less(v.d_i, v.k_j * (v.a_j - v.d_i)));
        let rho_bound =
            (v.k_j * (v.a_j - v.d_j) - v.d_j) / (v.nu_i * (v.d_i - v.k_j * (v.a_j - v.d_i)));
        let c3 = hopf_window(v.mu_i, v.k_i)
            .and(&Cmp::less(v.mu_j, v.k_j))
            .and(&Cmp::less(v.k_j * (v.a_j - v.d_i), v.d_i))
            .and(&Cmp::less(v.rho_j, rho_bound));

        for (idx, cmp) in [(1, &c1), (2, &c2), (3, &c3)] {
            entries.push(ConditionEntry::new(
                &format!("th4.y{j}"),
                format!("clause{idx}(i={i},j={j})"),
                cmp,
                values.clone(),
            ));
        }
        flags[j - 1] = c1.or(&c2).or(&c3).is_yes();
    }
    (entries, flags)
}

/// Theorem 5: the three permanence clause families. Families 1 and 3 are
/// evaluated for both index orders, family 2 requires both orders at once.
pub fn check_theorem5(params: &ModelParams) -> (Vec<ConditionEntry>, bool) {
    let mut entries = Vec::new();
    let mut fired_any = Cmp::less(1.0, 0.0);

    for i in [1usize, 2] {
        let j = 3 - i;
        let v = view(params, i);
        let mut values = BTreeMap::new();
        values.insert("mu_i".into(), v.mu_i);
        values.insert("mu_j".into(), v.mu_j);
        values.insert("nu_i".into(), v.nu_i);
        values.insert("nu_j".into(), v.nu_j);
        values.insert("rho_i".into(), v.rho_i);
        values.insert("rho_j".into(), v.rho_j);

        // family 1: predator j already persistent, large rho_i rescues
        // predator i although mu_i > K_i
        let rho_i_bound =
            (v.d_i - v.k_i * (v.a_i - v.d_i)) / (v.nu_j * (v.k_i * (v.a_i - v.d_j) - v.d_j));
        let f1 = hopf_window(v.mu_j, v.k_j)
            .and(&Cmp::less(v.d_j, v.k_i * (v.a_i - v.d_j)))
            .and(&Cmp::less(v.k_i, v.mu_i))
            .and(&Cmp::less(rho_i_bound, v.rho_i));
        entries.push(ConditionEntry::new(
            "th5",
            format!("family1(i={i},j={j})"),
            &f1,
            values.clone(),
        ));
        fired_any = fired_any.or(&f1);

        // family 3: small rho_j preserves predator j
        let rho_j_bound =
            (v.k_j * (v.a_j - v.d_j) - v.d_j) / (v.nu_i * (v.d_i - v.k_j * (v.a_j - v.d_i)));
        let f3 = hopf_window(v.mu_i, v.k_i)
            .and(&Cmp::less(v.mu_i, v.k_i))
            .and(&Cmp::less(v.d_j, v.k_i * (v.a_i - v.d_j)))
            .and(&hopf_window(v.mu_j, v.k_j))
            .and(&Cmp::less(v.k_j * (v.a_j - v.d_i), v.d_i))
            .and(&Cmp::less(v.rho_j, rho_j_bound));
        entries.push(ConditionEntry::new(
            "th5",
            format!("family3(i={i},j={j})"),
            &f3,
            values,
        ));
        fired_any = fired_any.or(&f3);
    }

    // family 2: both patches in the stable interior window with unstable
    // prey-only boundaries, simultaneously for both orders
    let mut f2 = Cmp::less(0.0, 1.0);
    let mut values = BTreeMap::new();
    for i in [1usize, 2] {
        let v = view(params, i);
        f2 = f2
            .and(&hopf_window(v.mu_j, v.k_j))
            .and(&Cmp::less((v.k_i - 1.0) / 2.0, v.mu_i))
            .and(&Cmp::less(v.mu_i, v.k_i))
            .and(&Cmp::less(v.d_j, v.k_i * (v.a_i - v.d_j)));
        values.insert(format!("mu{i}"), v.mu_i);
    }
    entries.insert(
        2,
        ConditionEntry::new("th5", "family2(both orders)".into(), &f2, values),
    );
    fired_any = fired_any.or(&f2);

    (entries, fired_any.is_yes())
}

/// Full report over Theorems 3-5 for the strength-driven model.
pub fn condition_report(params: &ModelParams) -> ConditionReport {
    let (mut entries, global) = check_theorem3(params);
    let (e4, predators) = check_theorem4(params);
    entries.extend(e4);
    let (e5, permanent) = check_theorem5(params);
    entries.extend(e5);
    ConditionReport {
        entries,
        flags: OverallFlags {
            predator1_persistent_sufficient: predators[0],
            predator2_persistent_sufficient: predators[1],
            permanent_sufficient: permanent,
            global_both_k_sufficient: global,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::fig1_params;

    #[test]
    fn band_reports_boundary() {
        assert_eq!(Cmp::less(1.0, 1.0 + 1e-13).fired, Fired::Boundary);
        assert_eq!(Cmp::less(1.0, 1.0 + 1e-9).fired, Fired::Yes);
        assert_eq!(Cmp::less(1.0 + 1e-9, 1.0).fired, Fired::No);
        assert_eq!(Cmp::less(1.0, f64::INFINITY).fired, Fired::Yes);
        assert_eq!(Cmp::less(f64::INFINITY, f64::INFINITY).fired, Fired::Boundary);
    }

    #[test]
    fn theorem3_fires_on_sentinel() {
        let mut params = fig1_params();
        params.a1 = 0.19; // a1 < d1 = 0.2 -> mu1 = inf
        params.a2 = 0.05; // a2 < d2 = 0.1 -> mu2 = inf
        let (_, fired) = check_theorem3(&params);
        assert!(fired);
    }

    #[test]
    fn theorem3_silent_at_fig1() {
        let (_, fired) = check_theorem3(&fig1_params());
        assert!(!fired); // mu1 = 4 < 5, mu2 = 2 < 3
    }

    #[test]
    fn theorem3_excludes_theorem5() {
        let mut params = fig1_params();
        params.a1 = 0.19;
        params.a2 = 0.05;
        let (_, th3) = check_theorem3(&params);
        let (_, th5) = check_theorem5(&params);
        assert!(th3);
        assert!(!th5);
    }

    #[test]
    fn theorem4_clause1() {
        let mut params = fig1_params();
        params.a1 = 0.2; // a1 <= d1: mu1 = inf > K1
        let (entries, flags) = check_theorem4(&params);
        // predator 2: mu2 = 2 < 3, mu1 > K1
        assert!(flags[1]);
        assert!(!flags[0]);
        let c1 = entries
            .iter()
            .find(|e| e.theorem == "th4.y2" && e.clause.starts_with("clause1"))
            .unwrap();
        assert_eq!(c1.fired, Fired::Yes);
    }

    #[test]
    fn theorem4_both_predators_at_fig1() {
        // Fig. 1: clause 2 covers predator 1, clause 3 (small rho2) covers
        // predator 2
        let (entries, flags) = check_theorem4(&fig1_params());
        assert!(flags[0] && flags[1]);
        let c2 = entries
            .iter()
            .find(|e| e.theorem == "th4.y1" && e.clause.starts_with("clause2"))
            .unwrap();
        assert_eq!(c2.fired, Fired::Yes);
        let c3 = entries
            .iter()
            .find(|e| e.theorem == "th4.y2" && e.clause.starts_with("clause3"))
            .unwrap();
        assert_eq!(c3.fired, Fired::Yes);
    }

    #[test]
    fn theorem5_family1_fires() {
        // j = 2 persistent patch, i = 1 rescued by large dispersal
        let mut params = fig1_params();
        params.a1 = 0.22; // mu1 = 10 > K1 = 5
        params.rho1 = 1.0; // above bound 0.02
        let (entries, fired) = check_theorem5(&params);
        assert!(fired);
        let f1 = entries
            .iter()
            .find(|e| e.clause == "family1(i=1,j=2)")
            .unwrap();
        assert_eq!(f1.fired, Fired::Yes);
    }

    #[test]
    fn report_inventory_is_fixed() {
        let report = condition_report(&fig1_params());
        assert_eq!(report.entries.len(), 1 + 6 + 5);
        assert_eq!(report.entries.iter().filter(|e| e.theorem == "th3").count(), 1);
        assert_eq!(
            report
                .entries
                .iter()
                .filter(|e| e.theorem.starts_with("th4"))
                .count(),
            6
        );
        assert_eq!(report.entries.iter().filter(|e| e.theorem == "th5").count(), 5);
    }
}
