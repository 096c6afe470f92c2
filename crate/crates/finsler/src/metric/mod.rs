//! Finsler function definitions (builtin catalog and parsed expressions),
//! evaluation of F and F² as jets, and the fundamental and Cartan tensors.

pub mod dsl;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::jets::Jet;

pub use dsl::{parse_expr, Expr, ParseError};

/// A point (x, y) of the slit tangent bundle, y != 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentPoint {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl TangentPoint {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Result<Self, Error> {
        if y[0] == 0.0 && y[1] == 0.0 {
            return Err(Error::ZeroFiber);
        }
        if !(x[0].is_finite() && x[1].is_finite() && y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(TangentPoint { x, y })
    }

    /// Same base point with the fiber scaled by `lambda`.
    pub fn scaled_fiber(&self, lambda: f64) -> TangentPoint {
        TangentPoint {
            x: self.x,
            y: [self.y[0] * lambda, self.y[1] * lambda],
        }
    }
}

/// Chart domain predicate: an optional coordinate box for x and an
/// optional open disk |x| < r.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub x_box: Option<[f64; 4]>,
    pub disk: Option<f64>,
}

impl Domain {
    pub fn unbounded() -> Self {
        Domain {
            x_box: None,
            disk: None,
        }
    }

    pub fn boxed(x1min: f64, x1max: f64, x2min: f64, x2max: f64) -> Self {
        Domain {
            x_box: Some([x1min, x1max, x2min, x2max]),
            disk: None,
        }
    }

    pub fn disk(r: f64) -> Self {
        Domain {
            x_box: None,
            disk: Some(r),
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        if let Some(b) = self.x_box {
            if x[0] < b[0] || x[0] > b[1] || x[1] < b[2] || x[1] > b[3] {
                return false;
            }
        }
        if let Some(r) = self.disk {
            if x[0] * x[0] + x[1] * x[1] >= r * r {
                return false;
            }
        }
        true
    }

    /// Conservative region used for random sampling: disks shrunk to 0.7r,
    /// boxes to 80% around the center, default box [-1, 1]² otherwise.
    pub fn sample_box(&self) -> [f64; 4] {
        if let Some(r) = self.disk {
            let s = 0.7 * r / std::f64::consts::SQRT_2;
            return [-s, s, -s, s];
        }
        if let Some(b) = self.x_box {
            let cx = 0.5 * (b[0] + b[1]);
            let cy = 0.5 * (b[2] + b[3]);
            let hx = 0.4 * (b[1] - b[0]);
            let hy = 0.4 * (b[3] - b[2]);
            return [cx - hx, cx + hx, cy - hy, cy + hy];
        }
        [-1.0, 1.0, -1.0, 1.0]
    }
}

/// A Finsler function definition: an expression for F, parameter values,
/// and the chart domain it is valid on.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub expr: Expr,
    pub params: BTreeMap<String, f64>,
    pub domain: Domain,
}

impl MetricSpec {
    pub fn new(
        name: impl Into<String>,
        expr: Expr,
        params: BTreeMap<String, f64>,
        domain: Domain,
    ) -> Result<Self, Error> {
        let spec = MetricSpec {
            name: name.into(),
            expr,
            params,
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let mut referenced = Vec::new();
        self.expr.parameters(&mut referenced);
        for name in referenced {
            if !self.params.contains_key(&name) {
                return Err(Error::UnknownIdentifier(name));
            }
        }
        Ok(())
    }

    /// Direct f64 evaluation of F, bypassing the jet kernel.
    pub fn f_value(&self, p: &TangentPoint) -> Result<f64, Error> {
        let coords = [p.x[0], p.x[1], p.y[0], p.y[1]];
        Ok(self.expr.eval_f64(&coords, &self.params)?)
    }

    /// Parse a metric definition file: `key = value` lines with keys
    /// `name`, `F`, `domain` (box(a,b,c,d) and/or disk(r)); all other
    /// keys are numeric parameters.
    pub fn from_definition(text: &str) -> Result<Self, Error> {
        let mut name = None;
        let mut expr = None;
        let mut domain = Domain::unbounded();
        let mut params = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MetricFile {
                line: lineno + 1,
                message: "expected `key = value`".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "name" => name = Some(value.to_string()),
                "F" => {
                    expr = Some(parse_expr(value).map_err(|mut e| {
                        e.line = lineno + 1;
                        Error::Parse(e)
                    })?)
                }
                "domain" => {
                    domain = parse_domain(value).map_err(|message| Error::MetricFile {
                        line: lineno + 1,
                        message,
                    })?
                }
                param => {
                    let v: f64 = value.parse().map_err(|_| Error::MetricFile {
                        line: lineno + 1,
                        message: format!("invalid numeric value for parameter `{param}`"),
                    })?;
                    params.insert(param.to_string(), v);
                }
            }
        }
        let expr = expr.ok_or(Error::MetricFile {
            line: 0,
            message: "missing `F = <expression>` line".to_string(),
        })?;
        MetricSpec::new(
            name.unwrap_or_else(|| "unnamed".to_string()),
            expr,
            params,
            domain,
        )
    }
}

fn parse_domain(text: &str) -> Result<Domain, String> {
    let mut domain = Domain::unbounded();
    // components look like `box(a, b, c, d)` or `disk(r)`, possibly with
    // spaces after the commas, so split on the closing parens
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    for part in compact.split_inclusive(')') {
        if let Some(args) = part.strip_prefix("box(").and_then(|s| s.strip_suffix(')')) {
            let vals: Vec<f64> = args
                .split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("invalid box specification `{part}`"))?;
            if vals.len() != 4 {
                return Err("box(...) takes four numbers".to_string());
            }
            domain.x_box = Some([vals[0], vals[1], vals[2], vals[3]]);
        } else if let Some(arg) = part.strip_prefix("disk(").and_then(|s| s.strip_suffix(')')) {
            let r: f64 = arg
                .trim()
                .parse()
                .map_err(|_| format!("invalid disk radius `{arg}`"))?;
            domain.disk = Some(r);
        } else {
            return Err(format!("unrecognized domain component `{part}`"));
        }
    }
    Ok(domain)
}

/// One builtin metric family.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub expression: &'static str,
    pub parameters: Vec<(&'static str, f64)>,
    pub domain: Domain,
}

const EUCLIDEAN_F: &str = "sqrt(y1^2 + y2^2)";
const SPHERE_F: &str = "(2/(1 + x1^2 + x2^2)) * sqrt(y1^2 + y2^2)";
const HYPERBOLIC_F: &str = "(2/(1 - x1^2 - x2^2)) * sqrt(y1^2 + y2^2)";
const RANDERS_F: &str = "sqrt(y1^2 + y2^2) + b*y1";
const FUNK_F: &str =
    "(sqrt((1 - x1^2 - x2^2)*(y1^2 + y2^2) + (x1*y1 + x2*y2)^2) + x1*y1 + x2*y2) / (1 - x1^2 - x2^2)";

/// The builtin metric catalog.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "euclidean",
            description: "flat Euclidean norm",
            expression: EUCLIDEAN_F,
            parameters: vec![],
            domain: Domain::boxed(-10.0, 10.0, -10.0, 10.0),
        },
        CatalogEntry {
            name: "sphere",
            description: "round sphere chart (isothermal), Gauss curvature +1",
            expression: SPHERE_F,
            parameters: vec![],
            domain: Domain::boxed(-2.0, 2.0, -2.0, 2.0),
        },
        CatalogEntry {
            name: "hyperbolic",
            description: "Poincare disk (isothermal), Gauss curvature -1",
            expression: HYPERBOLIC_F,
            parameters: vec![],
            domain: Domain::disk(1.0),
        },
        CatalogEntry {
            name: "randers-flat",
            description: "flat Randers metric |y| + b*y1, |b| < 1 (Berwald, non-Riemannian)",
            expression: RANDERS_F,
            parameters: vec![("b", 0.5)],
            domain: Domain::boxed(-10.0, 10.0, -10.0, 10.0),
        },
        CatalogEntry {
            name: "funk",
            description: "Funk metric on the unit disk, flag curvature -1/4",
            expression: FUNK_F,
            parameters: vec![],
            domain: Domain::disk(1.0),
        },
    ]
}

/// Instantiate a builtin metric, overriding default parameters.
pub fn builtin(name: &str, overrides: &BTreeMap<String, f64>) -> Result<MetricSpec, Error> {
    let entry = catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))?;
    let mut params: BTreeMap<String, f64> = entry
        .parameters
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(Error::UnknownParameter(k.clone()));
        }
        params.insert(k.clone(), *v);
    }
    if name == "randers-flat" {
        let b = params["b"];
        if b.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "randers-flat requires |b| < 1, got b = {b}"
            )));
        }
    }
    let expr = parse_expr(entry.expression).expect("builtin expressions parse");
    MetricSpec::new(entry.name, expr, params, entry.domain)
}

/// Fundamental tensor g_ij = ½ ∂²F²/∂y^i∂y^j at a point.
#[derive(Debug, Clone, Serialize)]
pub struct FundamentalTensor {
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub det: f64,
}

/// Cartan tensor C_ijk = ¼ ∂³F²/∂y^i∂y^j∂y^k at a point.
#[derive(Debug, Clone, Serialize)]
pub struct CartanTensor {
    pub c: [[[f64; 2]; 2]; 2],
}

/// Jet-level evaluation of a metric at a point: F, F², the fundamental
/// tensor and the Cartan tensor, all carried as jets for downstream
/// differentiation.
#[derive(Debug, Clone)]
pub struct MetricEval {
    pub point: TangentPoint,
    /// Coordinate jets at the full order.
    pub vars: [Jet; 4],
    pub f: Jet,
    pub f2: Jet,
    /// g_ij, order two below F².
    pub g: [[Jet; 2]; 2],
    pub g_inv: [[Jet; 2]; 2],
    pub det_g: Jet,
    /// C_ijk, order three below F².
    pub cartan: [[[Jet; 2]; 2]; 2],
}

impl MetricEval {
    pub fn new(spec: &MetricSpec, p: &TangentPoint, order: usize) -> Result<Self, Error> {
        if !spec.domain.contains(p.x) {
            return Err(Error::OutsideDomain { x: p.x });
        }
        if order < 3 {
            return Err(Error::OrderTooSmall(order));
        }
        let vars = [
            Jet::variable(order, 0, p.x[0])?,
            Jet::variable(order, 1, p.x[1])?,
            Jet::variable(order, 2, p.y[0])?,
            Jet::variable(order, 3, p.y[1])?,
        ];
        let f = spec.expr.eval_jet(&vars, &spec.params)?;
        if !f.is_finite() {
            return Err(Error::NonFiniteEvaluation);
        }
        if f.value() <= 0.0 {
            return Err(Error::NonPositiveF2 {
                value: f.value() * f.value().abs(),
            });
        }
        let f2 = &f * &f;

        let mut g: [[Jet; 2]; 2] = std::array::from_fn(|_| {
            std::array::from_fn(|_| Jet::constant(order - 2, 0.0).unwrap())
        });
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = f2
                    .derivative(2 + i)?
                    .derivative(2 + j)?
                    .scale(0.5);
            }
        }
        let det_g = &(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[1][0]);
        let scale = g
            .iter()
            .flatten()
            .map(|e| e.value().abs())
            .fold(0.0f64, f64::max)
            .powi(2);
        if det_g.value().abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) || det_g.value() <= 0.0 {
            return Err(Error::DegenerateMetric {
                det: det_g.value(),
                x: p.x,
                y: p.y,
            });
        }
        let inv_det = det_g.recip()?;
        let g_inv = [
            [&g[1][1] * &inv_det, (&g[0][1] * &inv_det).scale(-1.0)],
            [(&g[1][0] * &inv_det).scale(-1.0), &g[0][0] * &inv_det],
        ];

        let mut cartan: [[[Jet; 2]; 2]; 2] = std::array::from_fn(|_| {
            std::array::from_fn(|_| {
                std::array::from_fn(|_| Jet::constant(order - 3, 0.0).unwrap())
            })
        });
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    cartan[i][j][k] = f2
                        .derivative(2 + i)?
                        .derivative(2 + j)?
                        .derivative(2 + k)?
                        .scale(0.25);
                }
            }
        }

        Ok(MetricEval {
            point: *p,
            vars,
            f,
            f2,
            g,
            g_inv,
            det_g,
            cartan,
        })
    }

    pub fn fundamental_tensor(&self) -> FundamentalTensor {
        FundamentalTensor {
            g: [
                [self.g[0][0].value(), self.g[0][1].value()],
                [self.g[1][0].value(), self.g[1][1].value()],
            ],
            g_inv: [
                [self.g_inv[0][0].value(), self.g_inv[0][1].value()],
                [self.g_inv[1][0].value(), self.g_inv[1][1].value()],
            ],
            det: self.det_g.value(),
        }
    }

    pub fn cartan_tensor(&self) -> CartanTensor {
        let mut c = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    c[i][j][k] = self.cartan[i][j][k].value();
                }
            }
        }
        CartanTensor { c }
    }
}

/// Jet of F² at a point.
pub fn eval_f2(spec: &MetricSpec, p: &TangentPoint, order: usize) -> Result<Jet, Error> {
    let eval = MetricEval::new(spec, p, order.max(3))?;
    Ok(eval.f2.truncated(order))
}

pub fn fundamental_tensor(spec: &MetricSpec, p: &TangentPoint) -> Result<FundamentalTensor, Error> {
    Ok(MetricEval::new(spec, p, 3)?.fundamental_tensor())
}

pub fn cartan_tensor(spec: &MetricSpec, p: &TangentPoint) -> Result<CartanTensor, Error> {
    Ok(MetricEval::new(spec, p, 3)?.cartan_tensor())
}

/// Residuals of the homogeneity identities evaluated through the Liouville
/// field: |C(F) - F|, |C(K)|, |C(I)|, |C(J) - J|.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityResiduals {
    pub f: f64,
    pub k: f64,
    pub i: f64,
    pub j: f64,
}

pub fn homogeneity_check(
    spec: &MetricSpec,
    p: &TangentPoint,
) -> Result<HomogeneityResiduals, Error> {
    let frame = crate::frame::FrameEval::new(spec, p)?;
    Ok(frame.homogeneity_residuals()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: [f64; 2], y: [f64; 2]) -> TangentPoint {
        TangentPoint::new(x, y).unwrap()
    }

    #[test]
    fn euclidean_f2_value() {
        let spec = builtin("euclidean", &BTreeMap::new()).unwrap();
        let f2 = eval_f2(&spec, &point([0.0, 0.0], [3.0, 4.0]), 4).unwrap();
        assert!((f2.value() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn randers_f2_value() {
        let mut params = BTreeMap::new();
        params.insert("b".to_string(), 0.5);
        let spec = builtin("randers-flat", &params).unwrap();
        let f2 = eval_f2(&spec, &point([0.0, 0.0], [1.0, 0.0]), 4).unwrap();
        assert!((f2.value() - 2.25).abs() < 1e-12);
        assert!((spec.f_value(&point([0.0, 0.0], [1.0, 0.0])).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn funk_reduces_to_euclidean_at_origin() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let p = point([0.0, 0.0], [1.0, 0.0]);
        assert!((spec.f_value(&p).unwrap() - 1.0).abs() < 1e-14);
        let f2 = eval_f2(&spec, &p, 4).unwrap();
        assert!((f2.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_tensors() {
        let spec = builtin("euclidean", &BTreeMap::new()).unwrap();
        let p = point([0.3, -0.2], [0.8, 0.6]);
        let t = fundamental_tensor(&spec, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.g[i][j] - want).abs() < 1e-10, "g[{i}][{j}] = {}", t.g[i][j]);
            }
        }
        let c = cartan_tensor(&spec, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(c.c[i][j][k].abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn riemannian_cartan_vanishes() {
        // F = sqrt(a(x) y1^2 + c(x) y2^2) with genuinely x-dependent a, c
        let expr = parse_expr("sqrt((1 + x1^2)*y1^2 + (2 + x2^2)*y2^2)").unwrap();
        let spec = MetricSpec::new(
            "riem",
            expr,
            BTreeMap::new(),
            Domain::boxed(-1.0, 1.0, -1.0, 1.0),
        )
        .unwrap();
        for (x, y) in [
            ([0.2, 0.1], [1.0, 0.5]),
            ([-0.3, 0.4], [0.2, -1.1]),
            ([0.0, 0.0], [1.0, 1.0]),
        ] {
            let c = cartan_tensor(&spec, &point(x, y)).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        assert!(c.c[i][j][k].abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn cartan_symmetry_and_contraction() {
        let mut params = BTreeMap::new();
        params.insert("b".to_string(), 0.5);
        let spec = builtin("randers-flat", &params).unwrap();
        let p = point([0.0, 0.0], [1.0, 0.7]);
        let c = cartan_tensor(&spec, &p).unwrap().c;
        // total symmetry
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!((c[i][j][k] - c[j][i][k]).abs() < 1e-12);
                    assert!((c[i][j][k] - c[i][k][j]).abs() < 1e-12);
                }
            }
        }
        // C_ijk y^k = 0
        for i in 0..2 {
            for j in 0..2 {
                let contracted = c[i][j][0] * p.y[0] + c[i][j][1] * p.y[1];
                assert!(contracted.abs() < 1e-9, "contraction {contracted}");
            }
        }
    }

    #[test]
    fn euler_degree_two() {
        // g_ij y^i y^j = F²
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let p = point([0.3, 0.1], [0.7, -0.2]);
        let t = fundamental_tensor(&spec, &p).unwrap();
        let f2 = eval_f2(&spec, &p, 3).unwrap().value();
        let mut q = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                q += t.g[i][j] * p.y[i] * p.y[j];
            }
        }
        assert!((q - f2).abs() < 1e-9 * f2.abs());
    }

    #[test]
    fn fiber_scaling_homogeneity() {
        for name in ["euclidean", "sphere", "hyperbolic", "randers-flat", "funk"] {
            let spec = builtin(name, &BTreeMap::new()).unwrap();
            let p = point([0.25, -0.15], [0.9, 0.45]);
            let f = spec.f_value(&p).unwrap();
            let f2x = spec.f_value(&p.scaled_fiber(2.0)).unwrap();
            assert!(
                (f2x - 2.0 * f).abs() <= 1e-12 * f.abs().max(1.0),
                "{name}: F(x,2y) = {f2x}, 2F = {}",
                2.0 * f
            );
        }
    }

    #[test]
    fn indefinite_metric_rejected() {
        let expr = parse_expr("sqrt(y1^2 - y2^2)").unwrap();
        let spec = MetricSpec::new("bad", expr, BTreeMap::new(), Domain::unbounded()).unwrap();
        let err = MetricEval::new(&spec, &point([0.0, 0.0], [1.0, 0.5]), 4);
        assert!(err.is_err());
    }

    #[test]
    fn outside_domain_rejected() {
        let spec = builtin("funk", &BTreeMap::new()).unwrap();
        let err = eval_f2(&spec, &point([1.5, 0.0], [1.0, 0.0]), 3);
        assert!(matches!(err, Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn definition_file_roundtrip() {
        let text = "\
# flat randers example
name = my-randers
F = sqrt(y1^2 + y2^2) + b*y1
b = 0.25
domain = box(-5, 5, -5, 5)
";
        let spec = MetricSpec::from_definition(text).unwrap();
        assert_eq!(spec.name, "my-randers");
        assert_eq!(spec.params["b"], 0.25);
        assert_eq!(spec.domain.x_box, Some([-5.0, 5.0, -5.0, 5.0]));
        let p = point([0.0, 0.0], [1.0, 0.0]);
        assert!((spec.f_value(&p).unwrap() - 1.25).abs() < 1e-14);
    }

    #[test]
    fn undeclared_identifier_rejected() {
        let text = "F = sqrt(y1^2 + y2^2) + q*y1\n";
        match MetricSpec::from_definition(text) {
            Err(Error::UnknownIdentifier(name)) => assert_eq!(name, "q"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn unknown_builtin_and_params() {
        assert!(matches!(
            builtin("unknown", &BTreeMap::new()),
            Err(Error::UnknownMetric(_))
        ));
        let mut params = BTreeMap::new();
        params.insert("b".to_string(), 1.5);
        assert!(matches!(
            builtin("randers-flat", &params),
            Err(Error::InvalidParameter(_))
        ));
    }
}
