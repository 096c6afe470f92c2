//! Geodesic-flow integration (classical fixed-step RK4 on ẋ = y,
//! ẏ = −2G) with first-integral monitoring of F, K, 𝓙, 𝓕 along the
//! trajectory. Monitors run the full frame pipeline at sampled steps —
//! no interpolation — so a sampling stride keeps the cost bounded.

use serde::Serialize;

use crate::error::Error;
use crate::frame::FrameEval;
use crate::metric::{MetricSpec, TangentPoint};
use crate::spray::spray_rhs;

#[derive(Debug, Clone, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub point: TangentPoint,
    pub f: f64,
    pub k: f64,
    pub j: f64,
    pub fscal: f64,
    /// S applied to the same four scalars, for chain-rule cross-checks.
    pub s_f: f64,
    pub s_k: f64,
    pub s_j: f64,
    pub s_fscal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrajectory {
    pub metric: String,
    pub dt: f64,
    pub sample_every: usize,
    pub samples: Vec<FlowSample>,
    /// True when the trajectory left the chart domain before t_end.
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitor {
    F,
    K,
    J,
    Fscal,
}

impl Monitor {
    pub fn parse(s: &str) -> Option<Monitor> {
        match s {
            "F" => Some(Monitor::F),
            "K" => Some(Monitor::K),
            "J" => Some(Monitor::J),
            "Fscal" => Some(Monitor::Fscal),
            _ => None,
        }
    }

    fn read(&self, s: &FlowSample) -> (f64, f64) {
        match self {
            Monitor::F => (s.f, s.s_f),
            Monitor::K => (s.k, s.s_k),
            Monitor::J => (s.j, s.s_j),
            Monitor::Fscal => (s.fscal, s.s_fscal),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstIntegralReport {
    pub scalar: String,
    pub initial: f64,
    pub max_drift: f64,
    /// Max |d/dt scalar(γ(t)) − S(scalar)| over interior samples.
    pub max_chain_residual: f64,
    pub chain_scale: f64,
}

fn monitor_at(spec: &MetricSpec, t: f64, state: [f64; 4]) -> Result<FlowSample, Error> {
    let p = TangentPoint::new([state[0], state[1]], [state[2], state[3]])?;
    let fr = FrameEval::new(spec, &p)?;
    let m = &fr.spray.metric;
    let f = m.f.value();
    let f2 = m.f2.value();
    let s_f2 = crate::jets::directional(&fr.s, &m.f2)?.value();
    let inv = &fr.inv;
    Ok(FlowSample {
        t,
        point: p,
        f,
        k: inv.k.value(),
        j: inv.j.value(),
        fscal: inv.fscal.value(),
        s_f: s_f2 / (2.0 * f), // S(F) = S(F²)/(2F)
        s_k: inv.s_rho.value() / f2,
        s_j: inv.s_j.value(),
        s_fscal: inv.s_fscal.value(),
    })
}

/// Integrate the geodesic ODE from `p0` up to `t_end` with step `dt`,
/// monitoring every `sample_every`-th step (plus the first and last).
pub fn integrate_geodesic(
    spec: &MetricSpec,
    p0: &TangentPoint,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<FlowTrajectory, Error> {
    if !(dt.is_finite() && dt > 1e-12 && t_end > 0.0) {
        return Err(Error::StepUnderflow);
    }
    let stride = sample_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let mut state = [p0.x[0], p0.x[1], p0.y[0], p0.y[1]];
    let mut samples = vec![monitor_at(spec, 0.0, state)?];
    let mut clipped = false;
    for step in 0..steps {
        let next = match rk4_step(spec, state, dt) {
            Ok(s) if spec.domain.contains([s[0], s[1]]) => s,
            _ => {
                clipped = true;
                break;
            }
        };
        state = next;
        let t = (step + 1) as f64 * dt;
        if (step + 1) % stride == 0 || step + 1 == steps {
            samples.push(monitor_at(spec, t, state)?);
        }
    }
    Ok(FlowTrajectory {
        metric: spec.name.clone(),
        dt,
        sample_every: stride,
        samples,
        clipped,
    })
}

fn rk4_step(spec: &MetricSpec, s: [f64; 4], dt: f64) -> Result<[f64; 4], Error> {
    let f = |st: [f64; 4]| -> Result<[f64; 4], Error> {
        spray_rhs(spec, [st[0], st[1]], [st[2], st[3]])
    };
    let k1 = f(s)?;
    let k2 = f(advanced(s, k1, 0.5 * dt))?;
    let k3 = f(advanced(s, k2, 0.5 * dt))?;
    let k4 = f(advanced(s, k3, dt))?;
    Ok(std::array::from_fn(|i| {
        s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

fn advanced(s: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    std::array::from_fn(|i| s[i] + h * k[i])
}

/// Drift and chain-rule statistics for one monitored scalar.
pub fn first_integral_report(traj: &FlowTrajectory, scalar: Monitor) -> FirstIntegralReport {
    let name = match scalar {
        Monitor::F => "F",
        Monitor::K => "K",
        Monitor::J => "J",
        Monitor::Fscal => "Fscal",
    };
    let (initial, _) = scalar.read(&traj.samples[0]);
    let mut max_drift = 0.0f64;
    for s in &traj.samples {
        max_drift = max_drift.max((scalar.read(s).0 - initial).abs());
    }
    // centered finite differences over interior samples vs stored S(f)
    let mut max_chain = 0.0f64;
    let mut chain_scale = 0.0f64;
    for w in traj.samples.windows(3) {
        let (v0, _) = scalar.read(&w[0]);
        let (_, s1) = scalar.read(&w[1]);
        let (v2, _) = scalar.read(&w[2]);
        let span = w[2].t - w[0].t;
        if span <= 0.0 {
            continue;
        }
        let ddt = (v2 - v0) / span;
        max_chain = max_chain.max((ddt - s1).abs());
        chain_scale = chain_scale.max(ddt.abs()).max(s1.abs());
    }
    FirstIntegralReport {
        scalar: name.to_string(),
        initial,
        max_drift,
        max_chain_residual: max_chain,
        chain_scale: 1.0 + chain_scale,
    }
}

/// Flatten a trajectory to CSV: t,x1,x2,y1,y2,F,K,J,Fscal.
pub fn trajectory_csv(traj: &FlowTrajectory) -> String {
    let mut out = String::from("t,x1,x2,y1,y2,F,K,J,Fscal\n");
    for s in &traj.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.t,
            s.point.x[0],
            s.point.x[1],
            s.point.y[0],
            s.point.y[1],
            s.f,
            s.k,
            s.j,
            s.fscal
        ));
    }
    out
}
