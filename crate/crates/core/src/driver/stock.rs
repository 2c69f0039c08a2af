//! Built-in problems with known solutions, and assembly of custom problems
//! from config data.

use super::config::ProblemSection;
use crate::mesh::Domain;
use crate::problem::{ScalarField, TransportProblem, VectorField};
use crate::quadrature::Cut;
use crate::{Error, Result};
use serde::Deserialize;
use std::f64::consts::FRAC_1_PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub normal: [f64; 2],
    pub offset: f64,
    pub below: f64,
    pub above: f64,
}

pub const STOCK_NAMES: &[&str] = &["linear1d", "smooth1d", "jump1d", "zero1d", "linear2d", "smooth2d", "jump2d"];

fn step_at_inverse_pi() -> ScalarField {
    ScalarField::Step { normal: [1.0, 0.0], offset: FRAC_1_PI, below: 0.0, above: 1.0 }
}

/// Problem and its default root resolution.
pub fn stock_problem(name: &str) -> Result<(TransportProblem, usize)> {
    let unit = Domain::Interval(0.0, 1.0);
    let square = Domain::Box([0.0, 0.0], [1.0, 1.0]);
    let p = |domain, b: [f64; 2], c: f64, f: ScalarField, exact: Option<crate::problem::PointFn>, cuts: Vec<Cut>| TransportProblem {
        name: name.to_string(),
        domain,
        b: VectorField::constant(b),
        c: ScalarField::Constant(c),
        f,
        exact,
        exact_cuts: cuts,
    };
    let kink = vec![Cut { normal: [1.0, 0.0], offset: FRAC_1_PI }];
    let ramp: crate::problem::PointFn = Arc::new(|x| (x[0] - FRAC_1_PI).max(0.0));
    Ok(match name {
        "linear1d" => (p(unit, [1.0, 0.0], 0.0, ScalarField::Constant(1.0), Some(Arc::new(|x| x[0])), vec![]), 4),
        "smooth1d" => (p(unit, [1.0, 0.0], 1.0, ScalarField::Constant(1.0), Some(Arc::new(|x| 1.0 - (-x[0]).exp())), vec![]), 4),
        "jump1d" => (p(unit, [1.0, 0.0], 0.0, step_at_inverse_pi(), Some(ramp), kink), 4),
        "zero1d" => (p(unit, [1.0, 0.0], 1.0, ScalarField::Constant(0.0), Some(Arc::new(|_| 0.0)), vec![]), 4),
        "linear2d" => (p(square, [1.0, 0.0], 0.0, ScalarField::Constant(1.0), Some(Arc::new(|x| x[0])), vec![]), 2),
        // characteristics reach the inflow boundary after time min(x, 2y)
        "smooth2d" => (
            p(square, [1.0, 0.5], 1.0, ScalarField::Constant(1.0), Some(Arc::new(|x| 1.0 - (-(x[0].min(2.0 * x[1]))).exp())), vec![Cut {
                normal: [-0.5, 1.0],
                offset: 0.0,
            }]),
            2,
        ),
        "jump2d" => (p(square, [1.0, 0.0], 0.0, step_at_inverse_pi(), Some(ramp), kink), 2),
        other => return Err(Error::Config(format!("unknown stock problem {other:?}; available: {STOCK_NAMES:?}"))),
    })
}

pub fn custom_problem(s: &ProblemSection) -> Result<TransportProblem> {
    let domain = match s.domain.as_deref() {
        None => Domain::Interval(0.0, 1.0),
        Some([a, b]) if a < b => Domain::Interval(*a, *b),
        Some([x0, y0, x1, y1]) if x0 < x1 && y0 < y1 => Domain::Box([*x0, *y0], [*x1, *y1]),
        Some(d) => return Err(Error::Config(format!("domain {d:?}: expected [a, b] or [x0, y0, x1, y1] with positive extent"))),
    };
    let b = match (s.b.as_deref(), domain.dim()) {
        (None, _) => [1.0, 0.0],
        (Some([b]), 1) => [*b, 0.0],
        (Some([b0, b1]), 2) => [*b0, *b1],
        (Some(b), d) => return Err(Error::Config(format!("convection {b:?} does not match dimension {d}"))),
    };
    if b[0] == 0.0 && b[1] == 0.0 || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::Config("convection must be finite and nonzero".into()));
    }
    let f = match (s.f, s.f_step) {
        (Some(_), Some(_)) => return Err(Error::Config("give either f or f_step".into())),
        (_, Some(st)) => ScalarField::Step { normal: st.normal, offset: st.offset, below: st.below, above: st.above },
        (f, None) => ScalarField::Constant(f.unwrap_or(1.0)),
    };
    Ok(TransportProblem {
        name: "custom".into(),
        domain,
        b: VectorField::constant(b),
        c: ScalarField::Constant(s.c.unwrap_or(0.0)),
        f,
        exact: None,
        exact_cuts: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solutions_satisfy_the_equation() {
        for name in STOCK_NAMES {
            let (p, _) = stock_problem(name).unwrap();
            let u = p.exact.clone().unwrap();
            let b = p.constant_b().unwrap();
            let h = 1e-6;
            for x in [[0.7, 0.6], [0.55, 0.9], [0.9, 0.2]] {
                let x = if p.dim() == 1 { [x[0], 0.0] } else { x };
                let du = (u([x[0] + h * b[0], x[1] + h * b[1]]) - u([x[0] - h * b[0], x[1] - h * b[1]])) / (2.0 * h);
                let res = du + p.c.eval(0, x) * u(x) - p.f.eval(0, x);
                assert!(res.abs() < 1e-8, "{name} at {x:?}: {res}");
            }
        }
    }
}
