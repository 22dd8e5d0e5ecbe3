//! The 1-admissibility predicate and the audit of the norm family used in the nonlinear estimates.

use std::fmt::Write as _;

use serde::Serialize;

/// Tolerance on the exponent identity and on the boundary of the exponent inequality.
pub const ADMISSIBLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmissibleTriplet {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl AdmissibleTriplet {
    pub fn new(alpha: f64, p: f64, q: f64) -> Self {
        Self { alpha, p, q }
    }

    /// `2/p + 1/q`.
    pub fn exponent_sum(&self) -> f64 {
        2.0 / self.p + 1.0 / self.q
    }

    /// `1/p + 2/q - 1/2`, the only admissible α for this `(p, q)` off the endpoint.
    pub fn scaling_alpha(&self) -> f64 {
        1.0 / self.p + 2.0 / self.q - 0.5
    }

    fn is_endpoint(&self) -> bool {
        self.p == f64::INFINITY && self.q == 2.0 && (self.alpha - 0.5).abs() <= ADMISSIBLE_TOL
    }

    fn conditions(&self) -> (bool, bool, bool) {
        let range = self.p >= 4.0 && self.p < f64::INFINITY && self.q > 2.0;
        let sum = self.exponent_sum() <= 0.5 + ADMISSIBLE_TOL;
        let alpha = (self.alpha - self.scaling_alpha()).abs() <= ADMISSIBLE_TOL;
        (range, sum, alpha)
    }
}

pub fn is_one_admissible(t: &AdmissibleTriplet) -> bool {
    if t.is_endpoint() {
        return true;
    }
    let (range, sum, alpha) = t.conditions();
    range && sum && alpha
}

/// The four triplets used in the proof of the product lemma.
pub fn lemma_triplets(s: f64) -> Vec<AdmissibleTriplet> {
    vec![
        AdmissibleTriplet::new(s, 1.0 / (1.0 / 6.0 - s / 3.0), 1.0 / (1.0 / 6.0 + 2.0 * s / 3.0)),
        AdmissibleTriplet::new(0.0, 6.0, 6.0),
        AdmissibleTriplet::new(0.5, f64::INFINITY, 2.0),
        AdmissibleTriplet::new(-0.25, 4.0, f64::INFINITY),
    ]
}

/// One norm of the family, `‖D^order u‖_{L^p_x L^q_T}` possibly with a `T^{-ν}` prefactor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormFamilyEntry {
    pub id: String,
    pub derivative_order: f64,
    pub p: f64,
    pub q: f64,
    pub t_power_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub entry: NormFamilyEntry,
    pub triplet: AdmissibleTriplet,
    pub condition_2p_1q: bool,
    pub alpha_matches: bool,
    pub verdict: bool,
}

/// N₉'s reduction triplet `(1 - 3s + 6ε, (3/2 - 3s)^{-1}, 1/(3ε))`.
pub fn n9_triplet(s: f64, eps: f64) -> AdmissibleTriplet {
    AdmissibleTriplet::new(1.0 - 3.0 * s + 6.0 * eps, 1.0 / (1.5 - 3.0 * s), 1.0 / (3.0 * eps))
}

/// Reduction triplets for N₁ … N₁₂ at `(s, k, ε, δ)`, one row per triplet.
pub fn norm_family_audit(s: f64, k: u32, eps: f64, delta: f64) -> Vec<AuditRow> {
    let kf = k as f64;
    let sk = 0.5 - 1.0 / kf;
    let mut rows = Vec::new();
    let mut push = |id: &str, order: f64, p: f64, q: f64, flag: bool, t: AdmissibleTriplet| {
        let entry = NormFamilyEntry { id: id.to_string(), derivative_order: order, p, q, t_power_flag: flag };
        rows.push(audit_row(entry, t));
    };

    // N1 on both ends of its p range, through P̃ D^{s+1/p-1/2}.
    for p in [4.0, 1.0 / (0.5 - s)] {
        push("N1", 0.0, p, f64::INFINITY, false, AdmissibleTriplet::new(1.0 / p - 0.5, p, f64::INFINITY));
    }

    // N2–N7: ‖u‖_{L^p L^q} through P̃ D^{s-s_k-2δ} in L^p L^{(1/q-δ)^{-1}}.
    let plain: [(&str, f64, f64); 6] = [
        ("N2", 3.0 * kf, 3.0 * kf),
        ("N3", kf / (1.0 - s), 2.0 * kf / s),
        ("N4", kf / (1.0 / 3.0 + s), kf / (1.0 / 3.0 - s / 2.0)),
        ("N5", 3.0 * kf / (4.0 * s), kf / (0.5 - 2.0 * s / 3.0)),
        ("N6", kf / (1.0 - s / 3.0), 6.0 * kf / s),
        ("N7", kf + 1.0, 2.0 * kf * (kf + 1.0)),
    ];
    for (id, p, q) in plain {
        let side = s - sk - 2.0 * delta > 0.0 && 1.0 / q - delta > 0.0;
        let qd = if side { 1.0 / (1.0 / q - delta) } else { f64::NAN };
        push(id, 0.0, p, q, true, AdmissibleTriplet::new(-sk - 2.0 * delta, p, qd));
    }

    // N8 with the k/(k-1) derivative trade.
    let p8 = (kf - 1.0) / (5.0 / 6.0 - s / 3.0);
    let q8 = (kf - 1.0) / (2.0 * s / 3.0 - 1.0 / 6.0);
    let q8d = (kf - 1.0) / (2.0 * s / 3.0 - 1.0 / 6.0 - delta);
    let a8 = kf / (kf - 1.0) * (s - sk - 2.0 * delta / kf) - s;
    push("N8", 0.0, p8, q8, true, AdmissibleTriplet::new(a8, p8, q8d));

    let t9 = n9_triplet(s, eps);
    push("N9", 1.0 - 2.0 * s + 6.0 * eps, t9.p, t9.q, false, t9);
    push("N10", s, 6.0, 6.0, false, AdmissibleTriplet::new(0.0, 6.0, 6.0));
    let t11 = AdmissibleTriplet::new(0.5 - 3.0 * eps, 1.0 / eps, 1.0 / (0.5 - 2.0 * eps));
    push("N11", s + 0.5 - 3.0 * eps, t11.p, t11.q, false, t11);
    let t12 = AdmissibleTriplet::new(0.5 - s, 3.0 / s, 1.0 / (0.5 - 2.0 * s / 3.0));
    push("N12", 0.5, t12.p, t12.q, false, t12);
    rows
}

fn audit_row(entry: NormFamilyEntry, triplet: AdmissibleTriplet) -> AuditRow {
    let (_, sum, alpha) = triplet.conditions();
    let verdict = !triplet.q.is_nan() && is_one_admissible(&triplet);
    AuditRow { entry, triplet, condition_2p_1q: sum, alpha_matches: alpha, verdict }
}

/// True when every row of the audit passes.
pub fn audit_passes(rows: &[AuditRow]) -> bool {
    rows.iter().all(|r| r.verdict)
}

/// Ids whose reduction failed, deduplicated in order.
pub fn failing_ids(rows: &[AuditRow]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| !r.verdict) {
        if !ids.contains(&r.entry.id) {
            ids.push(r.entry.id.clone());
        }
    }
    ids
}

/// CSV with columns `id, alpha, p, q, condition_2p_1q, alpha_matches, verdict`.
pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut out = String::from("id,alpha,p,q,condition_2p_1q,alpha_matches,verdict\n");
    for r in rows {
        let t = &r.triplet;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.entry.id,
            t.alpha,
            t.p,
            t.q,
            r.condition_2p_1q,
            r.alpha_matches,
            if r.verdict { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    out
}

/// Smallest `k ≥ 2` with `1/2 - 1/k ≥ 5/12`, in exact integer arithmetic.
pub fn minimal_k_for_n9() -> u32 {
    // 1/2 - 1/k >= 5/12  <=>  12k - 24 >= 10k  <=>  k >= 12
    (2u32..).find(|&k| 12 * k - 24 >= 10 * k).expect("bounded search")
}
