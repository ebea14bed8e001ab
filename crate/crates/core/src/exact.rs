//! Smooth primal fields given by expressions (manufactured solutions).

use crate::error::Result;
use crate::expr::{Expr, Program, Var};
use crate::fe_space::FieldSource;
use crate::geometry::Vec2;
use crate::strain::FieldSample;

/// (θ1, θ2, u1, u2, w) as expressions in x1, x2, with compiled first derivatives.
#[derive(Debug, Clone)]
pub struct ExactFields {
    pub exprs: [Expr; 5],
    value: [Program; 5],
    d1: [Program; 5],
    d2: [Program; 5],
}

impl ExactFields {
    pub fn parse(texts: [&str; 5]) -> Result<ExactFields> {
        let mut exprs = Vec::with_capacity(5);
        for t in texts {
            exprs.push(Expr::parse(t)?);
        }
        Ok(ExactFields::new(exprs.try_into().unwrap()))
    }

    pub fn new(exprs: [Expr; 5]) -> ExactFields {
        let value = exprs.clone().map(|e| e.compile());
        let d1 = exprs.clone().map(|e| e.derivative(Var::X1).compile());
        let d2 = exprs.clone().map(|e| e.derivative(Var::X2).compile());
        ExactFields {
            exprs,
            value,
            d1,
            d2,
        }
    }

    pub fn zero() -> ExactFields {
        ExactFields::new(std::array::from_fn(|_| Expr::num(0.0)))
    }

    pub fn eval(&self, x: Vec2) -> FieldSample {
        let v = |i: usize| self.value[i].eval(x[0], x[1]);
        let g = |i: usize| [self.d1[i].eval(x[0], x[1]), self.d2[i].eval(x[0], x[1])];
        FieldSample {
            theta: [v(0), v(1)],
            u: [v(2), v(3)],
            w: v(4),
            grad_theta: [g(0), g(1)],
            grad_u: [g(2), g(3)],
            grad_w: g(4),
        }
    }
}

impl FieldSource for ExactFields {
    fn sample(&self, _t: usize, _xref: [f64; 2], x: Vec2) -> FieldSample {
        self.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_gradients() {
        let f = ExactFields::parse(["x1", "x2^2", "sin(x1)", "0", "x1*x2"]).unwrap();
        let s = f.eval([0.5, 2.0]);
        assert_eq!(s.theta, [0.5, 4.0]);
        assert_eq!(s.grad_theta, [[1.0, 0.0], [0.0, 4.0]]);
        assert!((s.grad_u[0][0] - 0.5f64.cos()).abs() < 1e-15);
        assert_eq!(s.w, 1.0);
        assert_eq!(s.grad_w, [2.0, 0.5]);
    }
}
