//! The scalar invariants 𝓘, 𝓙, K must not depend on the chart. Pull a
//! metric back along a linear chart change x = a·x̃ (fibers transform the
//! same way) and compare invariants at corresponding tangent points.

use std::collections::BTreeMap;

use finsler::metric::dsl::Expr;
use finsler::metric::{Domain, MetricSpec, TangentPoint};
use finsler::{builtin, extract_invariants};

/// Substitute x_i -> a * x_i and y_i -> a * y_i in the defining expression.
fn pulled_back(spec: &MetricSpec, a: f64) -> MetricSpec {
    let mut expr = spec.expr.clone();
    for axis in 0..4 {
        let scaled = Expr::Mul(
            Box::new(Expr::Num(a)),
            Box::new(Expr::Var(axis)),
        );
        expr = expr.substitute(axis, &scaled);
    }
    let domain = Domain {
        x_box: spec.domain.x_box.map(|b| b.map(|v| v / a)),
        disk: spec.domain.disk.map(|r| r / a),
    };
    MetricSpec {
        name: format!("{}-rescaled", spec.name),
        expr,
        params: spec.params.clone(),
        domain,
    }
}

#[test]
fn invariants_agree_across_linear_chart_change() {
    let a = 1.7;
    for name in ["sphere", "funk", "randers-flat"] {
        let spec = builtin(name, &BTreeMap::new()).unwrap();
        let tilted = pulled_back(&spec, a);
        let base_points = [
            TangentPoint::new([0.2, -0.1], [0.8, 0.45]).unwrap(),
            TangentPoint::new([-0.3, 0.25], [-0.4, 1.1]).unwrap(),
            TangentPoint::new([0.05, 0.4], [1.3, -0.2]).unwrap(),
        ];
        for p in base_points {
            let q = TangentPoint::new(
                [p.x[0] / a, p.x[1] / a],
                [p.y[0] / a, p.y[1] / a],
            )
            .unwrap();
            let orig = extract_invariants(&spec, &p).unwrap();
            let pulled = extract_invariants(&tilted, &q).unwrap();
            for (label, u, v) in [
                ("I", orig.i, pulled.i),
                ("J", orig.j, pulled.j),
                ("K", orig.k, pulled.k),
            ] {
                assert!(
                    (u - v).abs() <= 1e-9 * (1.0 + u.abs()),
                    "{name}: {label} changed under chart change: {u} vs {v}"
                );
            }
        }
    }
}
