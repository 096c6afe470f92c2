//! Geodesic spray, nonlinear connection, horizontal/vertical projectors,
//! Jacobi endomorphism, Ricci scalar, and flag curvature.

use serde::Serialize;

use crate::error::Error;
use crate::jets::{directional, Jet, MAX_ORDER};
use crate::metric::{MetricEval, MetricSpec, TangentPoint};

/// Spray coefficients and nonlinear connection at a point, with enough
/// jet depth for the frame and connection stages.
#[derive(Debug, Clone)]
pub struct SprayEval {
    pub metric: MetricEval,
    /// G^i, two orders below F².
    pub g_spray: [Jet; 2],
    /// N^i_j = ∂G^i/∂y^j, three orders below F².
    pub n: [[Jet; 2]; 2],
    /// Jacobi endomorphism R^i_j, four orders below F².
    pub phi: [[Jet; 2]; 2],
    /// Ricci scalar ρ = tr Φ.
    pub rho: Jet,
    /// Flag curvature K = ρ / F².
    pub k: Jet,
    /// Semibasic 1-form β_j = K F ∂F/∂y^j.
    pub beta: [Jet; 2],
    /// Spray vector field S = (y, −2G) in TTM coordinates.
    pub s_field: [Jet; 4],
}

impl SprayEval {
    pub fn new(spec: &MetricSpec, p: &TangentPoint) -> Result<Self, Error> {
        Self::from_metric(MetricEval::new(spec, p, MAX_ORDER)?)
    }

    pub fn from_metric(metric: MetricEval) -> Result<Self, Error> {
        let order = metric.f2.order();
        if order < 4 {
            return Err(Error::OrderTooSmall(order));
        }
        let og = order - 2; // order carried by G
        let on = order - 3; // order carried by N
        let op = order - 4; // order carried by Phi

        // G^i = ¼ g^{il} (y^k ∂²F²/∂y^l∂x^k − ∂F²/∂x^l)
        let mut rhs: [Jet; 2] = std::array::from_fn(|_| Jet::constant(og, 0.0).unwrap());
        for (l, r) in rhs.iter_mut().enumerate() {
            let mut acc = metric.f2.derivative(l)?.truncated(og).scale(-1.0);
            for k in 0..2 {
                let d2 = metric.f2.derivative(2 + l)?.derivative(k)?;
                acc = &acc + &(&metric.vars[2 + k].truncated(og) * &d2);
            }
            *r = acc;
        }
        let mut g_spray: [Jet; 2] = std::array::from_fn(|_| Jet::constant(og, 0.0).unwrap());
        for (i, g) in g_spray.iter_mut().enumerate() {
            let mut acc = Jet::constant(og, 0.0)?;
            for l in 0..2 {
                acc = &acc + &(&metric.g_inv[i][l].truncated(og) * &rhs[l]);
            }
            *g = acc.scale(0.25);
            if !g.is_finite() {
                return Err(Error::NonFiniteEvaluation);
            }
        }

        let mut n: [[Jet; 2]; 2] =
            std::array::from_fn(|_| std::array::from_fn(|_| Jet::constant(on, 0.0).unwrap()));
        for i in 0..2 {
            for j in 0..2 {
                n[i][j] = g_spray[i].derivative(2 + j)?;
            }
        }

        let s_field = [
            metric.vars[2].truncated(og),
            metric.vars[3].truncated(og),
            g_spray[0].scale(-2.0),
            g_spray[1].scale(-2.0),
        ];

        // R^i_j = 2 ∂G^i/∂x^j − S(N^i_j) − N^i_k N^k_j
        let mut phi: [[Jet; 2]; 2] =
            std::array::from_fn(|_| std::array::from_fn(|_| Jet::constant(op, 0.0).unwrap()));
        for i in 0..2 {
            for j in 0..2 {
                let dxg = g_spray[i].derivative(j)?.truncated(op).scale(2.0);
                let sn = directional(&s_field, &n[i][j])?.truncated(op);
                let mut nn = Jet::constant(op, 0.0)?;
                for k in 0..2 {
                    nn = &nn + &(&n[i][k].truncated(op) * &n[k][j].truncated(op));
                }
                phi[i][j] = &(&dxg - &sn) - &nn;
            }
        }
        let rho = &phi[0][0] + &phi[1][1];
        let k = rho.div(&metric.f2.truncated(op))?;

        let mut beta: [Jet; 2] = std::array::from_fn(|_| Jet::constant(op, 0.0).unwrap());
        for (j, b) in beta.iter_mut().enumerate() {
            let df = metric.f.derivative(2 + j)?.truncated(op);
            *b = &(&k * &metric.f.truncated(op)) * &df;
        }

        Ok(SprayEval {
            metric,
            g_spray,
            n,
            phi,
            rho,
            k,
            beta,
            s_field,
        })
    }

    /// Horizontal and vertical projectors as 4×4 jet matrices in the
    /// (∂x, ∂y) block basis: h = [[I, 0], [−N, 0]], v = [[0, 0], [N, I]].
    pub fn projectors(&self) -> ([[Jet; 4]; 4], [[Jet; 4]; 4]) {
        let on = self.n[0][0].order();
        let zero = || Jet::constant(on, 0.0).unwrap();
        let one = || Jet::constant(on, 1.0).unwrap();
        let mut h: [[Jet; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
        let mut v: [[Jet; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
        for i in 0..2 {
            h[i][i] = one();
            v[2 + i][2 + i] = one();
            for j in 0..2 {
                h[2 + i][j] = self.n[i][j].scale(-1.0);
                v[2 + i][j] = self.n[i][j].clone();
            }
        }
        (h, v)
    }
}

/// Spray data snapshot used by the public operation surface.
#[derive(Debug, Clone, Serialize)]
pub struct SprayData {
    pub g: [f64; 2],
    pub n: [[f64; 2]; 2],
}

/// Jacobi endomorphism snapshot: Φ, ρ, K, β values.
#[derive(Debug, Clone, Serialize)]
pub struct JacobiData {
    pub phi: [[f64; 2]; 2],
    pub rho: f64,
    pub k: f64,
    pub beta: [f64; 2],
}

pub fn spray_coefficients(spec: &MetricSpec, p: &TangentPoint) -> Result<SprayData, Error> {
    let s = SprayEval::new(spec, p)?;
    Ok(SprayData {
        g: [s.g_spray[0].value(), s.g_spray[1].value()],
        n: [
            [s.n[0][0].value(), s.n[0][1].value()],
            [s.n[1][0].value(), s.n[1][1].value()],
        ],
    })
}

pub fn jacobi_endomorphism(spec: &MetricSpec, p: &TangentPoint) -> Result<JacobiData, Error> {
    let s = SprayEval::new(spec, p)?;
    Ok(JacobiData {
        phi: [
            [s.phi[0][0].value(), s.phi[0][1].value()],
            [s.phi[1][0].value(), s.phi[1][1].value()],
        ],
        rho: s.rho.value(),
        k: s.k.value(),
        beta: [s.beta[0].value(), s.beta[1].value()],
    })
}

/// Spray right-hand side values (ẋ, ẏ) = (y, −2G) for the flow integrator.
/// Uses a shallow jet evaluation; only values are needed.
pub fn spray_rhs(spec: &MetricSpec, x: [f64; 2], y: [f64; 2]) -> Result<[f64; 4], Error> {
    let p = TangentPoint::new(x, y)?;
    let m = MetricEval::new(spec, &p, 3)?;
    let mut g = [0.0f64; 2];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut acc = 0.0;
        for l in 0..2 {
            let mut rhs_l = -m.f2.partial(unit(l))?;
            for k in 0..2 {
                let mut idx = unit(2 + l);
                idx[k] += 1;
                rhs_l += y[k] * m.f2.partial(idx)?;
            }
            acc += m.g_inv[i][l].value() * rhs_l;
        }
        *gi = 0.25 * acc;
    }
    Ok([y[0], y[1], -2.0 * g[0], -2.0 * g[1]])
}

fn unit(axis: usize) -> [u8; 4] {
    let mut m = [0u8; 4];
    m[axis] = 1;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::metric::builtin;

    fn point(x: [f64; 2], y: [f64; 2]) -> TangentPoint {
        TangentPoint::new(x, y).unwrap()
    }

    fn max_abs4(m: &[[f64; 2]; 2]) -> f64 {
        m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn x_independent_metrics_have_zero_spray() {
        for name in ["euclidean", "randers-flat"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let d = spray_coefficients(&spec, &point([0.4, -0.7], [1.0, 0.3])).unwrap();
            assert!(d.g[0].abs() < 1e-12 && d.g[1].abs() < 1e-12, "{name}: G = {:?}", d.g);
            assert!(max_abs4(&d.n) < 1e-12);
        }
    }

    #[test]
    fn euclidean_jacobi_vanishes() {
        let spec = builtin("euclidean", &BTreeMap::new()).unwrap();
        let j = jacobi_endomorphism(&spec, &point([0.0, 0.0], [1.0, 2.0])).unwrap();
        assert!(max_abs4(&j.phi) < 1e-12);
        assert!(j.rho.abs() < 1e-12);
        assert!(j.k.abs() < 1e-12);
    }

    #[test]
    fn funk_spray_closed_form() {
        // Projectively flat normal form: G^i = ½ F y^i.
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        for (x, y) in [
            ([0.2, 0.1], [1.0, -0.4]),
            ([-0.3, 0.25], [0.5, 1.2]),
            ([0.0, 0.55], [-0.9, 0.3]),
        ] {
            let p = point(x, y);
            let d = spray_coefficients(&spec, &p).unwrap();
            let f = spec.f_value(&p).unwrap();
            for i in 0..2 {
                let want = 0.5 * f * y[i];
                assert!(
                    (d.g[i] - want).abs() <= 1e-8 * (1.0 + want.abs()),
                    "G[{i}] = {}, want {want}",
                    d.g[i]
                );
            }
        }
    }

    #[test]
    fn spray_homogeneity() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let p = point([0.25, -0.1], [0.8, 0.5]);
        let base = spray_coefficients(&spec, &p).unwrap();
        let jac = jacobi_endomorphism(&spec, &p).unwrap();
        for lambda in [0.5, 2.0, 3.0] {
            let q = p.scaled_fiber(lambda);
            let s = spray_coefficients(&spec, &q).unwrap();
            let j = jacobi_endomorphism(&spec, &q).unwrap();
            for i in 0..2 {
                assert!(
                    (s.g[i] - lambda * lambda * base.g[i]).abs()
                        <= 1e-8 * (1.0 + base.g[i].abs() * lambda * lambda)
                );
                for l in 0..2 {
                    assert!(
                        (s.n[i][l] - lambda * base.n[i][l]).abs()
                            <= 1e-8 * (1.0 + base.n[i][l].abs() * lambda)
                    );
                }
            }
            assert!((j.rho - lambda * lambda * jac.rho).abs() <= 1e-8 * (1.0 + jac.rho.abs()));
            assert!((j.k - jac.k).abs() <= 1e-8 * (1.0 + jac.k.abs()));
        }
    }

    #[test]
    fn jacobi_annihilates_spray_direction() {
        for name in ["sphere", "hyperbolic", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let p = point([0.2, 0.15], [0.9, -0.35]);
            let j = jacobi_endomorphism(&spec, &p).unwrap();
            let scale = max_abs4(&j.phi).max(1.0);
            for i in 0..2 {
                let v = j.phi[i][0] * p.y[0] + j.phi[i][1] * p.y[1];
                assert!(v.abs() <= 1e-8 * scale, "{name}: Phi.y component {v}");
            }
            // rho = trace within float identity, beta(S) = rho
            let beta_s = j.beta[0] * p.y[0] + j.beta[1] * p.y[1];
            assert!((beta_s - j.rho).abs() <= 1e-8 * (1.0 + j.rho.abs()));
        }
    }

    #[test]
    fn projector_algebra() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let s = SprayEval::new(&spec, &point([0.3, -0.2], [1.1, 0.4])).unwrap();
        let (h, v) = s.projectors();
        let val = |m: &[[Jet; 4]; 4], i: usize, j: usize| m[i][j].value();
        for i in 0..4 {
            for j in 0..4 {
                let mut hh = 0.0;
                let mut vv = 0.0;
                let mut hv = 0.0;
                for k in 0..4 {
                    hh += val(&h, i, k) * val(&h, k, j);
                    vv += val(&v, i, k) * val(&v, k, j);
                    hv += val(&h, i, k) * val(&v, k, j);
                }
                assert!((hh - val(&h, i, j)).abs() < 1e-10);
                assert!((vv - val(&v, i, j)).abs() < 1e-10);
                assert!(hv.abs() < 1e-10);
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((val(&h, i, j) + val(&v, i, j) - id).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rhs_matches_jet_path() {
        let spec = builtin("sphere", &BTreeMap::new()).unwrap();
        let p = point([0.2, 0.0], [1.0, 0.0]);
        let d = spray_coefficients(&spec, &p).unwrap();
        let rhs = spray_rhs(&spec, p.x, p.y).unwrap();
        assert!((rhs[2] + 2.0 * d.g[0]).abs() < 1e-10);
        assert!((rhs[3] + 2.0 * d.g[1]).abs() < 1e-10);
    }
}
