use super::jet::Jet3;
use super::parse::{Expr, Expression, Func};
use crate::error::{Error, Result};

/// Denominators smaller than this in magnitude are a domain error.
pub const DIVISION_FLOOR: f64 = 1e-300;

/// Largest integer exponent expanded by repeated multiplication.
const MAX_INTEGER_POWER: f64 = 64.0;

fn integer_exponent(e: &Expr, first: usize) -> Option<i32> {
    if !e.is_constant() {
        return None;
    }
    let v = eval_value_unchecked(e, first, &[])?;
    (v.fract() == 0.0 && v.abs() <= MAX_INTEGER_POWER).then_some(v as i32)
}

/// Plain evaluation with no domain checks; `None` on non-finite output.
pub(crate) fn eval_value_unchecked(e: &Expr, first: usize, point: &[f64]) -> Option<f64> {
    let r = match e {
        Expr::Const(c) => *c,
        Expr::Var(k) => *point.get(k - first)?,
        Expr::Neg(a) => -eval_value_unchecked(a, first, point)?,
        Expr::Add(a, b) => {
            eval_value_unchecked(a, first, point)? + eval_value_unchecked(b, first, point)?
        }
        Expr::Sub(a, b) => {
            eval_value_unchecked(a, first, point)? - eval_value_unchecked(b, first, point)?
        }
        Expr::Mul(a, b) => {
            eval_value_unchecked(a, first, point)? * eval_value_unchecked(b, first, point)?
        }
        Expr::Div(a, b) => {
            eval_value_unchecked(a, first, point)? / eval_value_unchecked(b, first, point)?
        }
        Expr::Pow(a, b) => {
            let base = eval_value_unchecked(a, first, point)?;
            match integer_exponent(b, first) {
                Some(n) => base.powi(n),
                None => base.powf(eval_value_unchecked(b, first, point)?),
            }
        }
        Expr::Call(func, a) => {
            let x = eval_value_unchecked(a, first, point)?;
            match func {
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tanh => x.tanh(),
            }
        }
    };
    r.is_finite().then_some(r)
}

struct JetEval<'a> {
    first: usize,
    inputs: &'a [Jet3],
    point: Vec<f64>,
}

impl JetEval<'_> {
    fn fail(&self, e: &Expr) -> Error {
        Error::domain(e.to_string(), &self.point)
    }

    fn eval(&self, e: &Expr) -> Result<Jet3> {
        let m = self.inputs.first().map_or(0, Jet3::arity);
        let out = match e {
            Expr::Const(c) => Jet3::constant(*c, m),
            Expr::Var(k) => self.inputs[k - self.first].clone(),
            Expr::Neg(a) => -&self.eval(a)?,
            Expr::Add(a, b) => &self.eval(a)? + &self.eval(b)?,
            Expr::Sub(a, b) => &self.eval(a)? - &self.eval(b)?,
            Expr::Mul(a, b) => &self.eval(a)? * &self.eval(b)?,
            Expr::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den.value().abs() < DIVISION_FLOOR {
                    return Err(self.fail(e));
                }
                &num * &den.recip()
            }
            Expr::Pow(a, b) => {
                let base = self.eval(a)?;
                match integer_exponent(b, self.first) {
                    Some(n) if n >= 0 => base.powi(n as u32),
                    Some(n) => {
                        if base.value().abs() < DIVISION_FLOOR {
                            return Err(self.fail(e));
                        }
                        base.powi(n.unsigned_abs()).recip()
                    }
                    None => {
                        if base.value() <= 0.0 {
                            return Err(self.fail(e));
                        }
                        let exponent = self.eval(b)?;
                        (&exponent * &base.ln()).exp()
                    }
                }
            }
            Expr::Call(func, a) => {
                let x = self.eval(a)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log | Func::Sqrt if x.value() <= 0.0 => return Err(self.fail(e)),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tanh => x.tanh(),
                }
            }
        };
        if !out.is_finite() {
            return Err(self.fail(e));
        }
        Ok(out)
    }
}

impl Expression {
    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.arity() {
            return Err(Error::invalid(format!(
                "expression over {} variables evaluated with {} inputs",
                self.arity(),
                len
            )));
        }
        Ok(())
    }

    /// Value and all partials through third order at `point`.
    pub fn eval_jet3(&self, point: &[f64]) -> Result<Jet3> {
        self.check_point(point.len())?;
        self.eval_with(&Jet3::seed(point))
    }

    /// Evaluates with every variable replaced by a jet over some common set of inputs.
    pub fn eval_with(&self, inputs: &[Jet3]) -> Result<Jet3> {
        self.check_point(inputs.len())?;
        let ctx = JetEval {
            first: self.first_index(),
            inputs,
            point: inputs.iter().map(Jet3::value).collect(),
        };
        ctx.eval(self.root())
    }

    /// Value only, with the same domain rules as [`Expression::eval_jet3`].
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point.len())?;
        self.eval_value(self.root(), point)
    }

    fn eval_value(&self, e: &Expr, point: &[f64]) -> Result<f64> {
        let fail = || Error::domain(e.to_string(), point);
        let v = match e {
            Expr::Const(c) => *c,
            Expr::Var(k) => point[k - self.first_index()],
            Expr::Neg(a) => -self.eval_value(a, point)?,
            Expr::Add(a, b) => self.eval_value(a, point)? + self.eval_value(b, point)?,
            Expr::Sub(a, b) => self.eval_value(a, point)? - self.eval_value(b, point)?,
            Expr::Mul(a, b) => self.eval_value(a, point)? * self.eval_value(b, point)?,
            Expr::Div(a, b) => {
                let num = self.eval_value(a, point)?;
                let den = self.eval_value(b, point)?;
                if den.abs() < DIVISION_FLOOR {
                    return Err(fail());
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = self.eval_value(a, point)?;
                match integer_exponent(b, self.first_index()) {
                    Some(n) if n < 0 && base.abs() < DIVISION_FLOOR => return Err(fail()),
                    Some(n) => base.powi(n),
                    None if base <= 0.0 => return Err(fail()),
                    None => (self.eval_value(b, point)? * base.ln()).exp(),
                }
            }
            Expr::Call(func, a) => {
                let x = self.eval_value(a, point)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log | Func::Sqrt if x <= 0.0 => return Err(fail()),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tanh => x.tanh(),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail());
        }
        Ok(v)
    }
}
