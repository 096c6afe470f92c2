//! Numerical classification of a metric (Riemannian, Landsberg, Berwald,
//! K-basic, the curvature conditions ii/iii, constant K, flat) and probes
//! for the local identity content of the rigidity theorems.
//!
//! All statistics are taken at F-normalized points (y replaced by y/F)
//! because some of the conditions mix homogeneity degrees and only make
//! sense on the indicatrix.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::frame::FrameEval;
use crate::jets::directional;
use crate::metric::{MetricSpec, TangentPoint};

pub const DEFAULT_THRESHOLD: f64 = 1e-6;
/// A quantity must exceed this (at F = 1) to count as "nowhere zero" in a
/// theorem hypothesis like ρ ≠ 0.
const NONZERO_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlagStat {
    pub statistic: f64,
    pub flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub metric: String,
    pub seed: u64,
    pub threshold: f64,
    pub points_used: usize,
    pub flags: BTreeMap<String, FlagStat>,
    pub stats: BTreeMap<String, f64>,
    pub errors: Vec<String>,
}

/// Per-point scalar data gathered at an F-normalized point.
struct PointData {
    i: f64,
    j: f64,
    k: f64,
    rho: f64,
    fscal: f64,
    h_i: f64,
    v_i: f64,
    v_rho: f64,
    s_rho: f64,
    s_j: f64,
    s_fscal: f64,
    /// S(H(ρ)) − H(S(ρ)), for the commutation identity probe.
    sh_rho_comm: f64,
}

fn normalized(spec: &MetricSpec, p: &TangentPoint) -> Result<TangentPoint, Error> {
    let f = spec.f_value(p)?;
    Ok(p.scaled_fiber(1.0 / f))
}

fn gather(spec: &MetricSpec, p: &TangentPoint) -> Result<PointData, Error> {
    let fr = FrameEval::new(spec, &normalized(spec, p)?)?;
    let inv = &fr.inv;
    let s_hrho = directional(&fr.s, &inv.h_rho)?.value();
    let h_srho = directional(&fr.h, &inv.s_rho)?.value();
    Ok(PointData {
        i: inv.i.value(),
        j: inv.j.value(),
        k: inv.k.value(),
        rho: inv.rho.value(),
        fscal: inv.fscal.value(),
        h_i: inv.h_i.value(),
        v_i: inv.v_i.value(),
        v_rho: inv.v_rho.value(),
        s_rho: inv.s_rho.value(),
        s_j: inv.s_j.value(),
        s_fscal: inv.s_fscal.value(),
        sh_rho_comm: s_hrho - h_srho,
    })
}

/// Classify a metric over a sample set.
pub fn classify(
    spec: &MetricSpec,
    points: &[TangentPoint],
    seed: u64,
    threshold: f64,
) -> Classification {
    let mut data = Vec::new();
    let mut errors = Vec::new();
    for (idx, p) in points.iter().enumerate() {
        match gather(spec, p) {
            Ok(d) => data.push(d),
            Err(e) => errors.push(format!("point {idx}: {e}")),
        }
    }
    let max = |f: &dyn Fn(&PointData) -> f64| data.iter().map(f).fold(0.0f64, f64::max);
    let max_i = max(&|d| d.i.abs());
    let max_j = max(&|d| d.j.abs());
    let max_hi = max(&|d| d.h_i.abs());
    let max_vk = max(&|d| d.v_rho.abs()); // V(K) = V(ρ) at F = 1
    let max_cond_ii = max(&|d| (d.v_rho + d.i).abs());
    let max_cond_iii = max(&|d| (d.v_rho + d.i * d.rho).abs());
    let max_sj = max(&|d| d.s_j.abs());
    let max_k = max(&|d| d.k.abs());
    let k_min = data.iter().map(|d| d.k).fold(f64::INFINITY, f64::min);
    let k_max = data.iter().map(|d| d.k).fold(f64::NEG_INFINITY, f64::max);
    let k_spread = if data.is_empty() { 0.0 } else { k_max - k_min };

    let mut flags = BTreeMap::new();
    let mut flag = |name: &str, stat: f64| {
        flags.insert(
            name.to_string(),
            FlagStat {
                statistic: stat,
                flag: stat <= threshold,
            },
        );
    };
    flag("riemannian", max_i);
    flag("landsberg", max_j);
    flag("berwald", max_j.max(max_hi));
    flag("k_basic", max_vk);
    flag("cond_ii", max_cond_ii);
    flag("cond_iii", max_cond_iii);
    flag("constant_K", k_spread);
    flag("flat", max_k);

    let mut stats = BTreeMap::new();
    for (name, v) in [
        ("max_abs_I", max_i),
        ("max_abs_J", max_j),
        ("max_abs_HI", max_hi),
        ("max_abs_VK", max_vk),
        ("max_cond_ii", max_cond_ii),
        ("max_cond_iii", max_cond_iii),
        ("max_abs_SJ", max_sj),
        ("max_abs_K", max_k),
        ("k_spread", k_spread),
    ] {
        stats.insert(name.to_string(), v);
    }

    Classification {
        metric: spec.name.clone(),
        seed,
        threshold,
        points_used: data.len(),
        flags,
        stats,
        errors,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Hypotheses hold on the sample and the conclusion holds.
    Holds,
    /// Hypotheses fail on this metric; the theorem is vacuous here.
    HypothesesFail,
    /// Hypotheses hold but the conclusion fails — a bug detector, never
    /// expected on a correct build.
    Violation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub theorem: String,
    pub hypothesis_stats: BTreeMap<String, f64>,
    pub conclusion_stats: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

pub const THEOREM_IDS: [&str; 6] = ["T4.3", "P5.2", "L5.5.1", "T5.6", "P5.8", "T5.10"];

/// Probe the local identity content of one rigidity theorem over a
/// sample set. Probes check the unconditional identity chains from the
/// proofs; they never assert the global (compactness-dependent) claims.
pub fn theorem_probe(
    spec: &MetricSpec,
    theorem: &str,
    points: &[TangentPoint],
    threshold: f64,
) -> Result<ProbeResult, Error> {
    let mut data = Vec::new();
    for p in points {
        data.push(gather(spec, p)?);
    }
    let max = |f: &dyn Fn(&PointData) -> f64| data.iter().map(f).fold(0.0f64, f64::max);
    let min = |f: &dyn Fn(&PointData) -> f64| data.iter().map(f).fold(f64::INFINITY, f64::min);

    let mut hyp = BTreeMap::new();
    let mut concl = BTreeMap::new();
    let mut h = |name: &str, v: f64| {
        hyp.insert(name.to_string(), v);
    };
    let mut c = |name: &str, v: f64| {
        concl.insert(name.to_string(), v);
    };
    let (hyp_ok, concl_ok) = match theorem {
        // Landsberg ∧ S(𝓕)=0 ∧ ρ nowhere zero ⇒ Riemannian
        "T4.3" => {
            let max_j = max(&|d| d.j.abs());
            let max_sf = max(&|d| d.s_fscal.abs());
            let rho_min = min(&|d| d.rho.abs());
            let max_i = max(&|d| d.i.abs());
            h("max_abs_J", max_j);
            h("max_abs_SF", max_sf);
            h("min_abs_rho", rho_min);
            c("max_abs_I", max_i);
            (
                max_j <= threshold && max_sf <= threshold && rho_min > NONZERO_CUTOFF,
                max_i <= threshold,
            )
        }
        // V(ρ)=0 ⇒ S(𝓕)=0 and S(𝓙)=−𝓘ρ
        "P5.2" => {
            let max_vrho = max(&|d| d.v_rho.abs());
            let max_sf = max(&|d| d.s_fscal.abs());
            let max_sj = max(&|d| (d.s_j + d.i * d.rho).abs());
            h("max_abs_Vrho", max_vrho);
            c("max_abs_SF", max_sf);
            c("max_abs_SJ_plus_Irho", max_sj);
            (
                max_vrho <= threshold,
                max_sf <= threshold && max_sj <= threshold,
            )
        }
        // V(ρ)=−𝓘 ⇒ S(𝓕)=𝓘²+V(𝓘) and S(𝓙)=𝓘(1−ρ)
        "L5.5.1" => {
            let max_hyp = max(&|d| (d.v_rho + d.i).abs());
            let max_c1 = max(&|d| (d.s_fscal - d.i * d.i - d.v_i).abs());
            let max_c2 = max(&|d| (d.s_j - d.i * (1.0 - d.rho)).abs());
            h("max_abs_Vrho_plus_I", max_hyp);
            c("max_abs_SF_chain", max_c1);
            c("max_abs_SJ_chain", max_c2);
            (
                max_hyp <= threshold,
                max_c1 <= threshold && max_c2 <= threshold,
            )
        }
        // unconditional commutation identity from the proof:
        // S(H(ρ)) − H(S(ρ)) = ρV(ρ)
        "T5.6" => {
            let max_res = max(&|d| (d.sh_rho_comm - d.rho * d.v_rho).abs());
            let scale = 1.0 + max(&|d| d.sh_rho_comm.abs().max((d.rho * d.v_rho).abs()));
            h("unconditional", 0.0);
            c("max_commutation_residual", max_res);
            (true, max_res <= threshold.max(1e-6) * scale)
        }
        // V(ρ)=−𝓘ρ ∧ S(ρ)=0 ⇒ ρ𝓕=0
        "P5.8" => {
            let max_hyp1 = max(&|d| (d.v_rho + d.i * d.rho).abs());
            let max_hyp2 = max(&|d| d.s_rho.abs());
            let max_c = max(&|d| (d.rho * d.fscal).abs());
            h("max_abs_Vrho_plus_Irho", max_hyp1);
            h("max_abs_Srho", max_hyp2);
            c("max_abs_rhoF", max_c);
            (
                max_hyp1 <= threshold && max_hyp2 <= threshold,
                max_c <= threshold,
            )
        }
        // V(ρ)=−𝓘ρ ∧ S(ρ)=0 ⇒ 𝓘ρ²=0
        "T5.10" => {
            let max_hyp1 = max(&|d| (d.v_rho + d.i * d.rho).abs());
            let max_hyp2 = max(&|d| d.s_rho.abs());
            let max_c = max(&|d| (d.i * d.rho * d.rho).abs());
            h("max_abs_Vrho_plus_Irho", max_hyp1);
            h("max_abs_Srho", max_hyp2);
            c("max_abs_Irho2", max_c);
            (
                max_hyp1 <= threshold && max_hyp2 <= threshold,
                max_c <= threshold,
            )
        }
        other => return Err(Error::UnknownTheorem(other.to_string())),
    };
    let verdict = if !hyp_ok {
        Verdict::HypothesesFail
    } else if concl_ok {
        Verdict::Holds
    } else {
        Verdict::Violation
    };
    Ok(ProbeResult {
        theorem: theorem.to_string(),
        hypothesis_stats: hyp,
        conclusion_stats: concl,
        verdict,
    })
}
