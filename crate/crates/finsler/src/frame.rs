//! The global Berwald frame (H, S, V, C), its dual coframe, frame
//! directional derivatives, Lie brackets, and the invariants 𝓘, 𝓙, 𝓕.
//!
//! The frame is built from the g-orthonormal pair (ℓ, m): S is the spray,
//! C the Liouville field, V = F·m lifted vertically, H = F·m lifted
//! horizontally. This normalization is the one that makes [V, S] = H,
//! which the identity suite verifies rather than assumes.

use serde::Serialize;

use crate::error::Error;
use crate::jets::{directional, lie_bracket, Jet};
use crate::metric::{MetricSpec, TangentPoint};
use crate::spray::SprayEval;

/// Frame vector selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVec {
    H,
    S,
    V,
    C,
}

/// Coframe row order: η¹ dual to H, η² to S, η³ to V, η⁴ to C.
pub const FRAME_ORDER: [FrameVec; 4] = [FrameVec::H, FrameVec::S, FrameVec::V, FrameVec::C];

/// Frame vectors and dual coframe at a point, as plain values.
#[derive(Debug, Clone, Serialize)]
pub struct FrameAtPoint {
    pub s: [f64; 4],
    pub h: [f64; 4],
    pub v: [f64; 4],
    pub c: [f64; 4],
    /// Row a is η^a in the coordinate cobasis.
    pub coframe: [[f64; 4]; 4],
}

/// Invariant values and the frame-derivative table at a point.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSet {
    /// Main scalar (Cartan-tensor realization).
    pub i: f64,
    /// Landsberg scalar 𝓙 = S(𝓘).
    pub j: f64,
    pub k: f64,
    pub rho: f64,
    /// 𝓕 = H(𝓘) + V(𝓙), the trace of the hv-Berwald curvature.
    pub fscal: f64,
    /// 𝓘 extracted from the [H,V] bracket decomposition.
    pub i_bracket: f64,
    /// 𝓙 extracted from the [H,V] bracket decomposition.
    pub j_bracket: f64,
    pub s_i: f64,
    pub v_i: f64,
    pub h_i: f64,
    pub s_j: f64,
    pub v_j: f64,
    pub h_j: f64,
    pub s_rho: f64,
    pub v_rho: f64,
    pub h_rho: f64,
    pub v2_rho: f64,
    pub s_fscal: f64,
}

/// Invariant scalars kept as jets for nested differentiation.
#[derive(Debug, Clone)]
pub struct InvariantJets {
    pub i: Jet,
    pub j: Jet,
    pub k: Jet,
    pub rho: Jet,
    pub fscal: Jet,
    pub i_bracket: f64,
    pub j_bracket: f64,
    pub bracket_residual: f64,
    pub s_i: Jet,
    pub v_i: Jet,
    pub h_i: Jet,
    pub s_j: Jet,
    pub v_j: Jet,
    pub h_j: Jet,
    pub s_rho: Jet,
    pub v_rho: Jet,
    pub h_rho: Jet,
    pub v2_rho: Jet,
    pub s_fscal: Jet,
}

/// Full per-point pipeline state: metric, spray, frame, coframe, invariants.
#[derive(Debug, Clone)]
pub struct FrameEval {
    pub spray: SprayEval,
    /// Spray field S = (y, −2G).
    pub s: [Jet; 4],
    /// Horizontal partner H = (F·m) lifted horizontally.
    pub h: [Jet; 4],
    /// Vertical partner V = JH = (F·m) lifted vertically.
    pub v: [Jet; 4],
    /// Liouville field C = (0, y).
    pub c: [Jet; 4],
    /// g-unit vector g-orthogonal to ℓ = y/F, oriented det(ℓ, m) > 0.
    pub m: [Jet; 2],
    /// Rows are η¹..η⁴ in the coordinate cobasis.
    pub coframe: [[Jet; 4]; 4],
    pub inv: InvariantJets,
}

impl FrameEval {
    pub fn new(spec: &MetricSpec, p: &TangentPoint) -> Result<Self, Error> {
        Self::from_spray(SprayEval::new(spec, p)?)
    }

    pub fn from_spray(spray: SprayEval) -> Result<Self, Error> {
        let metric = &spray.metric;
        let order = metric.f2.order();
        let og = order - 2; // order of g, G, and the frame pair (ℓ, m)
        let oh = order - 3; // order of H (limited by N)

        // ℓ = y/F, its g-flat, and the oriented g-unit normal m.
        let f_g = metric.f.truncated(og);
        let ell = [
            metric.vars[2].truncated(og).div(&f_g)?,
            metric.vars[3].truncated(og).div(&f_g)?,
        ];
        let mut ell_flat: [Jet; 2] = std::array::from_fn(|_| Jet::constant(og, 0.0).unwrap());
        for (i, e) in ell_flat.iter_mut().enumerate() {
            *e = &(&metric.g[i][0] * &ell[0]) + &(&metric.g[i][1] * &ell[1]);
        }
        let m_raw = [ell_flat[1].clone(), ell_flat[0].scale(-1.0)];
        let mut norm2 = Jet::constant(og, 0.0)?;
        for i in 0..2 {
            for j in 0..2 {
                norm2 = &norm2 + &(&metric.g[i][j] * &(&m_raw[i] * &m_raw[j]));
            }
        }
        let inv_norm = norm2.sqrt()?.recip()?;
        let mut m = [&m_raw[0] * &inv_norm, &m_raw[1] * &inv_norm];
        let det = ell[0].value() * m[1].value() - ell[1].value() * m[0].value();
        if det < 0.0 {
            m = [m[0].scale(-1.0), m[1].scale(-1.0)];
        }

        let s = spray.s_field.clone();
        let c = [
            Jet::constant(og, 0.0)?,
            Jet::constant(og, 0.0)?,
            metric.vars[2].truncated(og),
            metric.vars[3].truncated(og),
        ];
        let w = [&f_g * &m[0], &f_g * &m[1]]; // F·m
        let v = [
            Jet::constant(og, 0.0)?,
            Jet::constant(og, 0.0)?,
            w[0].clone(),
            w[1].clone(),
        ];
        // horizontal lift: X^i ∂x_i − N^j_i X^i ∂y_j
        let mut h: [Jet; 4] = std::array::from_fn(|_| Jet::constant(oh, 0.0).unwrap());
        h[0] = w[0].truncated(oh);
        h[1] = w[1].truncated(oh);
        for j in 0..2 {
            let mut acc = Jet::constant(oh, 0.0)?;
            for i in 0..2 {
                acc = &acc + &(&spray.n[j][i] * &w[i].truncated(oh));
            }
            h[2 + j] = acc.scale(-1.0);
        }

        // Frame matrix with columns (H, S, V, C), inverted for the coframe.
        let mut frame_mat: [[Jet; 4]; 4] =
            std::array::from_fn(|_| std::array::from_fn(|_| Jet::constant(oh, 0.0).unwrap()));
        for r in 0..4 {
            frame_mat[r][0] = h[r].clone();
            frame_mat[r][1] = s[r].truncated(oh);
            frame_mat[r][2] = v[r].truncated(oh);
            frame_mat[r][3] = c[r].truncated(oh);
        }
        let coframe = invert4(&frame_mat)?;

        let inv = Self::invariants(&spray, &m, &s, &h, &v, &coframe)?;

        Ok(FrameEval {
            spray,
            s,
            h,
            v,
            c,
            m,
            coframe,
            inv,
        })
    }

    fn invariants(
        spray: &SprayEval,
        m: &[Jet; 2],
        s: &[Jet; 4],
        h: &[Jet; 4],
        v: &[Jet; 4],
        coframe: &[[Jet; 4]; 4],
    ) -> Result<InvariantJets, Error> {
        let metric = &spray.metric;
        let oc = metric.cartan[0][0][0].order();

        // Main scalar, Cartan realization: 𝓘 = F · C_ijk m^i m^j m^k.
        let mut i_jet = Jet::constant(oc, 0.0)?;
        for a in 0..2 {
            for b in 0..2 {
                for cix in 0..2 {
                    let mm = &(&m[a].truncated(oc) * &m[b].truncated(oc)) * &m[cix].truncated(oc);
                    i_jet = &i_jet + &(&metric.cartan[a][b][cix] * &mm);
                }
            }
        }
        i_jet = &i_jet * &metric.f.truncated(oc);

        // Bracket extraction: [H, V] = S + 𝓘H + 𝓙V.
        let hv = lie_bracket(h, v)?;
        let ob = hv[0].order();
        let mut coefs: [Jet; 4] = std::array::from_fn(|_| Jet::constant(ob, 0.0).unwrap());
        for (a, coef) in coefs.iter_mut().enumerate() {
            let mut acc = Jet::constant(ob, 0.0)?;
            for b in 0..4 {
                acc = &acc + &(&coframe[a][b].truncated(ob) * &hv[b]);
            }
            *coef = acc;
        }
        let scale = 1.0 + coefs.iter().map(|c| c.value().abs()).fold(0.0, f64::max);
        let bracket_residual =
            ((coefs[1].value() - 1.0).abs()).max(coefs[3].value().abs());
        if bracket_residual > 1e-5 * scale {
            return Err(Error::FrameDecomposition {
                residual: bracket_residual,
            });
        }
        let i_bracket = coefs[0].value();
        let j_bracket = coefs[2].value();
        if (i_bracket - i_jet.value()).abs() > 1e-6 * (1.0 + i_jet.value().abs()) {
            return Err(Error::InvariantCrossCheck {
                bracket: i_bracket,
                cartan: i_jet.value(),
            });
        }

        let j_jet = directional(s, &i_jet)?;
        let v_i = directional(v, &i_jet)?;
        let h_i = directional(h, &i_jet)?;
        let s_j = directional(s, &j_jet)?;
        let v_j = directional(v, &j_jet)?;
        let h_j = directional(h, &j_jet)?;
        let rho = spray.rho.clone();
        let k = spray.k.clone();
        let s_rho = directional(s, &rho)?;
        let v_rho = directional(v, &rho)?;
        let h_rho = directional(h, &rho)?;
        let v2_rho = directional(v, &v_rho)?;
        let of = h_i.order().min(v_j.order());
        let fscal = &h_i.truncated(of) + &v_j.truncated(of);
        let s_fscal = directional(s, &fscal)?;

        Ok(InvariantJets {
            i: i_jet,
            j: j_jet.clone(),
            k,
            rho,
            fscal,
            i_bracket,
            j_bracket,
            bracket_residual,
            s_i: j_jet,
            v_i,
            h_i,
            s_j,
            v_j,
            h_j,
            s_rho,
            v_rho,
            h_rho,
            v2_rho,
            s_fscal,
        })
    }

    pub fn vector(&self, which: FrameVec) -> &[Jet; 4] {
        match which {
            FrameVec::H => &self.h,
            FrameVec::S => &self.s,
            FrameVec::V => &self.v,
            FrameVec::C => &self.c,
        }
    }

    /// Directional derivative of a scalar jet along a frame vector.
    pub fn derive(&self, f: &Jet, along: FrameVec) -> Result<Jet, Error> {
        Ok(directional(self.vector(along), f)?)
    }

    /// Lie bracket of two frame vectors, as jet components.
    pub fn bracket(&self, a: FrameVec, b: FrameVec) -> Result<[Jet; 4], Error> {
        Ok(lie_bracket(self.vector(a), self.vector(b))?)
    }

    /// Apply a coframe row to a jet vector field.
    pub fn eta(&self, row: usize, field: &[Jet; 4]) -> Jet {
        let order = field
            .iter()
            .map(|c| c.order())
            .min()
            .unwrap()
            .min(self.coframe[row][0].order());
        let mut acc = Jet::constant(order, 0.0).unwrap();
        for b in 0..4 {
            acc = &acc + &(&self.coframe[row][b].truncated(order) * &field[b].truncated(order));
        }
        acc
    }

    /// Condition estimate of the frame matrix (infinity norms).
    pub fn frame_condition(&self) -> f64 {
        let mut mat = [[0.0f64; 4]; 4];
        let cols = [&self.h, &self.s, &self.v, &self.c];
        for r in 0..4 {
            for (cidx, col) in cols.iter().enumerate() {
                mat[r][cidx] = col[r].value();
            }
        }
        let inv: [[f64; 4]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|c| self.coframe[r][c].value()));
        norm_inf(&mat) * norm_inf(&inv)
    }

    pub fn invariant_set(&self) -> InvariantSet {
        let i = &self.inv;
        InvariantSet {
            i: i.i.value(),
            j: i.j.value(),
            k: i.k.value(),
            rho: i.rho.value(),
            fscal: i.fscal.value(),
            i_bracket: i.i_bracket,
            j_bracket: i.j_bracket,
            s_i: i.s_i.value(),
            v_i: i.v_i.value(),
            h_i: i.h_i.value(),
            s_j: i.s_j.value(),
            v_j: i.v_j.value(),
            h_j: i.h_j.value(),
            s_rho: i.s_rho.value(),
            v_rho: i.v_rho.value(),
            h_rho: i.h_rho.value(),
            v2_rho: i.v2_rho.value(),
            s_fscal: i.s_fscal.value(),
        }
    }

    pub fn frame_at_point(&self) -> FrameAtPoint {
        let vals = |x: &[Jet; 4]| -> [f64; 4] { std::array::from_fn(|i| x[i].value()) };
        FrameAtPoint {
            s: vals(&self.s),
            h: vals(&self.h),
            v: vals(&self.v),
            c: vals(&self.c),
            coframe: std::array::from_fn(|r| {
                std::array::from_fn(|c| self.coframe[r][c].value())
            }),
        }
    }

    /// Residuals of the homogeneity identities via the Liouville field:
    /// |C(F) − F|, |C(K)|, |C(𝓘)|, |C(𝓙) − 𝓙|.
    pub fn homogeneity_residuals(&self) -> Result<crate::metric::HomogeneityResiduals, Error> {
        let m = &self.spray.metric;
        let cf = directional(&self.c, &m.f)?;
        let ck = directional(&self.c, &self.inv.k)?;
        let ci = directional(&self.c, &self.inv.i)?;
        let cj = directional(&self.c, &self.inv.j)?;
        Ok(crate::metric::HomogeneityResiduals {
            f: (cf.value() - m.f.value()).abs(),
            k: ck.value().abs(),
            i: ci.value().abs(),
            j: (cj.value() - self.inv.j.value()).abs(),
        })
    }
}

fn norm_inf(m: &[[f64; 4]; 4]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Invert a 4×4 matrix of jets (all entries at a common order) by
/// Gauss-Jordan elimination with partial pivoting on the value parts.
pub(crate) fn invert4(m: &[[Jet; 4]; 4]) -> Result<[[Jet; 4]; 4], Error> {
    let order = m[0][0].order();
    let mut a: Vec<Vec<Jet>> = m.iter().map(|row| row.to_vec()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..4)
        .map(|r| {
            (0..4)
                .map(|c| Jet::constant(order, if r == c { 1.0 } else { 0.0 }).unwrap())
                .collect()
        })
        .collect();
    let scale = a
        .iter()
        .flatten()
        .map(|e| e.value().abs())
        .fold(0.0, f64::max);
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .value()
                    .abs()
                    .total_cmp(&a[r2][col].value().abs())
            })
            .unwrap();
        if a[pivot][col].value().abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateFrame { cond: f64::INFINITY });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let piv_inv = a[col][col].recip()?;
        for c in 0..4 {
            a[col][c] = &a[col][c] * &piv_inv;
            inv[col][c] = &inv[col][c] * &piv_inv;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.value() == 0.0 && !factor.coeffs_nonzero() {
                continue;
            }
            for c in 0..4 {
                a[r][c] = &a[r][c] - &(&factor * &a[col][c]);
                inv[r][c] = &inv[r][c] - &(&factor * &inv[col][c]);
            }
        }
    }
    let out: [[Jet; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| inv[r][c].clone()));
    // condition estimate
    let mv: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| m[r][c].value()));
    let iv: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| out[r][c].value()));
    let cond = norm_inf(&mv) * norm_inf(&iv);
    if !cond.is_finite() || cond > 1e8 {
        return Err(Error::DegenerateFrame { cond });
    }
    Ok(out)
}

/// Build the Berwald frame at a point.
pub fn build_frame(spec: &MetricSpec, p: &TangentPoint) -> Result<FrameAtPoint, Error> {
    Ok(FrameEval::new(spec, p)?.frame_at_point())
}

/// Extract the invariants and frame-derivative table at a point.
pub fn extract_invariants(spec: &MetricSpec, p: &TangentPoint) -> Result<InvariantSet, Error> {
    Ok(FrameEval::new(spec, p)?.invariant_set())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::metric::builtin;

    fn point(x: [f64; 2], y: [f64; 2]) -> TangentPoint {
        TangentPoint::new(x, y).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn euclidean_frame_at_reference_point() {
        let spec = builtin("euclidean", &BTreeMap::new()).unwrap();
        let fr = build_frame(&spec, &point([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(fr.s.map(|v| (v * 1e12).round() / 1e12), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(fr.c.map(|v| (v * 1e12).round() / 1e12), [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(fr.v.map(|v| (v * 1e12).round() / 1e12), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(fr.h.map(|v| (v * 1e12).round() / 1e12), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn coframe_is_dual_basis() {
        for name in ["euclidean", "sphere", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let fr = FrameEval::new(&spec, &point([0.2, -0.1], [0.8, 0.5])).unwrap();
            let cols = [&fr.h, &fr.s, &fr.v, &fr.c];
            for (a, _) in FRAME_ORDER.iter().enumerate() {
                for (b, col) in cols.iter().enumerate() {
                    let v: f64 = (0..4)
                        .map(|r| fr.coframe[a][r].value() * col[r].value())
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (v - want).abs() < 1e-9,
                        "{name}: eta^{a}(col {b}) = {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_kills_f2() {
        // S(F²) = H(F²) = V(F²) = 0
        for name in ["sphere", "hyperbolic", "funk", "randers-flat"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let fr = FrameEval::new(&spec, &point([0.15, 0.22], [0.9, -0.4])).unwrap();
            let f2 = &fr.spray.metric.f2;
            let scale = 1.0 + f2.value().abs();
            for which in [FrameVec::S, FrameVec::H, FrameVec::V] {
                let d = fr.derive(f2, which).unwrap().value();
                assert!(d.abs() <= 1e-8 * scale, "{name}: X(F²) = {d}");
            }
        }
    }

    #[test]
    fn beta_annihilates_h() {
        for name in ["sphere", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let fr = FrameEval::new(&spec, &point([0.3, 0.1], [0.7, -0.2])).unwrap();
            let beta_h = fr.spray.beta[0].value() * fr.h[0].value()
                + fr.spray.beta[1].value() * fr.h[1].value();
            let scale = 1.0
                + fr.spray.beta[0].value().abs().max(fr.spray.beta[1].value().abs());
            assert!(beta_h.abs() <= 1e-9 * scale, "{name}: beta(H) = {beta_h}");
        }
    }

    #[test]
    fn bracket_table() {
        // [C,S] = S, [C,H] = H, [C,V] = 0, [V,S] = H, [S,H] = ρV
        for name in ["euclidean", "sphere", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let fr = FrameEval::new(&spec, &point([0.2, 0.12], [1.1, 0.3])).unwrap();
            let check = |lhs: [Jet; 4], rhs: [f64; 4], label: &str| {
                let scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                for i in 0..4 {
                    assert!(
                        (lhs[i].value() - rhs[i]).abs() <= 1e-8 * scale,
                        "{name} {label}[{i}]: {} vs {}",
                        lhs[i].value(),
                        rhs[i]
                    );
                }
            };
            let vals = |x: &[Jet; 4]| -> [f64; 4] { std::array::from_fn(|i| x[i].value()) };
            check(fr.bracket(FrameVec::C, FrameVec::S).unwrap(), vals(&fr.s), "[C,S]");
            check(fr.bracket(FrameVec::C, FrameVec::H).unwrap(), vals(&fr.h), "[C,H]");
            check(fr.bracket(FrameVec::C, FrameVec::V).unwrap(), [0.0; 4], "[C,V]");
            check(fr.bracket(FrameVec::V, FrameVec::S).unwrap(), vals(&fr.h), "[V,S]");
            let rho = fr.inv.rho.value();
            let rv = vals(&fr.v).map(|x| x * rho);
            check(fr.bracket(FrameVec::S, FrameVec::H).unwrap(), rv, "[S,H]");
        }
    }

    #[test]
    fn euclidean_invariants_vanish() {
        let spec = builtin("euclidean", &BTreeMap::new()).unwrap();
        let inv = extract_invariants(&spec, &point([0.4, -0.3], [0.6, 1.2])).unwrap();
        for (label, v) in [
            ("i", inv.i),
            ("j", inv.j),
            ("k", inv.k),
            ("fscal", inv.fscal),
            ("h_i", inv.h_i),
            ("v2_rho", inv.v2_rho),
            ("s_fscal", inv.s_fscal),
        ] {
            assert!(v.abs() < 1e-9, "{label} = {v}");
        }
    }

    #[test]
    fn riemannian_invariants_vanish() {
        for name in ["sphere", "hyperbolic"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let inv = extract_invariants(&spec, &point([0.25, 0.1], [0.7, -0.5])).unwrap();
            assert!(inv.i.abs() < 1e-7, "{name}: I = {}", inv.i);
            assert!(inv.j.abs() < 1e-7, "{name}: J = {}", inv.j);
            assert!(inv.fscal.abs() < 1e-7, "{name}: F = {}", inv.fscal);
        }
    }

    #[test]
    fn curvature_reference_values() {
        let cases = [("sphere", 1.0), ("hyperbolic", -1.0), ("funk", -0.25)];
        for (name, want) in cases {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            for (x, y) in [
                ([0.2, 0.0], [1.0, 0.0]),
                ([0.1, -0.3], [0.4, 0.9]),
                ([-0.25, 0.15], [1.3, -0.6]),
            ] {
                let inv = extract_invariants(&spec, &point(x, y)).unwrap();
                assert!(
                    (inv.k - want).abs() < 1e-6,
                    "{name} at {x:?},{y:?}: K = {}",
                    inv.k
                );
            }
        }
    }

    #[test]
    fn randers_is_berwald_not_riemannian() {
        let spec = builtin("randers-flat", &BTreeMap::new()).unwrap();
        // y off the symmetry axis of F, where the main scalar is nonzero
        let inv = extract_invariants(&spec, &point([0.0, 0.0], [0.6, 0.8])).unwrap();
        assert!(inv.i.abs() > 0.01, "main scalar should be nonzero, got {}", inv.i);
        assert!(inv.j.abs() < 1e-7, "J = {}", inv.j);
        assert!(inv.h_i.abs() < 1e-7, "H(I) = {}", inv.h_i);
        assert!(inv.k.abs() < 1e-10, "K = {}", inv.k);
    }

    #[test]
    fn funk_landsberg_scalar_cross_check() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let inv = extract_invariants(&spec, &point([0.3, 0.1], [0.7, -0.2])).unwrap();
        assert!(inv.i.abs() > 1e-3, "Funk has nonzero main scalar");
        // J = S(I) against bracket extraction
        assert!(
            close(inv.j, inv.j_bracket, 1e-7),
            "J = {}, bracket J = {}",
            inv.j,
            inv.j_bracket
        );
        assert!(close(inv.i, inv.i_bracket, 1e-6));
    }

    #[test]
    fn invariant_homogeneity() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let p = point([0.2, -0.15], [0.8, 0.45]);
        let base = extract_invariants(&spec, &p).unwrap();
        let s2 = extract_invariants(&spec, &p.scaled_fiber(2.0)).unwrap();
        assert!(close(s2.i, base.i, 1e-8), "I not 0-homogeneous");
        assert!(close(s2.j, 2.0 * base.j, 1e-8), "J not 1-homogeneous");
        assert!(close(s2.k, base.k, 1e-8), "K not 0-homogeneous");
    }

    #[test]
    fn homogeneity_residuals_small() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let r = crate::metric::homogeneity_check(&spec, &point([0.3, 0.1], [0.7, -0.2])).unwrap();
        assert!(r.f < 1e-8, "C(F)-F = {}", r.f);
        assert!(r.k < 1e-8, "C(K) = {}", r.k);
        assert!(r.i < 1e-8, "C(I) = {}", r.i);
        assert!(r.j < 1e-8, "C(J)-J = {}", r.j);
    }

    #[test]
    fn c_k_vanishes() {
        for name in ["sphere", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let fr = FrameEval::new(&spec, &point([0.1, 0.2], [0.9, 0.7])).unwrap();
            let ck = fr.derive(&fr.inv.k, FrameVec::C).unwrap().value();
            assert!(ck.abs() < 1e-8, "{name}: C(K) = {ck}");
        }
    }
}
