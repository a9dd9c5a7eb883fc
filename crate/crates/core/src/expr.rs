//! Expression trees over real variables.
//!
//! The primitive set is deliberately small: constants, variables, the four
//! arithmetic operations, `abs`, `min`, `max`, `sqrt` and integer or rational
//! powers. That is enough to write down the semialgebraic examples the rest
//! of the crate works with (`|x|*y`, `sqrt(|x|)`, `y^2 - x^3`, ...).
//!
//! The JSON form is a nested array, e.g. `["*",["abs",["var",0]],["var",1]]`.
//! Bare numbers are constants. `+`, `*`, `min` and `max` accept two or more
//! operands; `-` is unary negation with one operand and subtraction with
//! two; `["pow", e, k]` is an integer power and `["pow", e, p, q]` the
//! rational power `p/q` (odd `q` admits negative bases).

use std::fmt;
use std::ops;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::{invalid, Result};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("even root of negative value {0}")]
    EvenRootOfNegative(f64),
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("variable x{index} out of range for arity {arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("non-finite intermediate value")]
    NonFinite,
}

type EvalResult<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Powi(Box<Expr>, i32),
    /// `base^(num/den)` with `den > 1` and the fraction in lowest terms.
    Powq(Box<Expr>, i32, u32),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn min(self, other: Expr) -> Expr {
        Expr::Min(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: Expr) -> Expr {
        Expr::Max(Box::new(self), Box::new(other))
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::Powi(Box::new(self), k)
    }

    /// Rational power `num/den`. Reduces the fraction; a unit denominator
    /// becomes an integer power.
    pub fn powq(self, num: i32, den: u32) -> Expr {
        assert!(den > 0, "denominator must be positive");
        let g = gcd(num.unsigned_abs(), den).max(1);
        let (num, den) = (num / g as i32, den / g);
        if den == 1 {
            Expr::Powi(Box::new(self), num)
        } else {
            Expr::Powq(Box::new(self), num, den)
        }
    }

    /// Largest variable index plus one (0 for constant expressions).
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a)
            | Expr::Abs(a)
            | Expr::Sqrt(a)
            | Expr::Powi(a, _)
            | Expr::Powq(a, _, _) => a.min_arity(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => a.min_arity().max(b.min_arity()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> EvalResult<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(*i).ok_or(EvalError::VariableOutOfRange {
                index: *i,
                arity: x.len(),
            })?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / d
            }
            Expr::Abs(a) => a.eval(x)?.abs(),
            Expr::Min(a, b) => a.eval(x)?.min(b.eval(x)?),
            Expr::Max(a, b) => a.eval(x)?.max(b.eval(x)?),
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtOfNegative(v));
                }
                v.sqrt()
            }
            Expr::Powi(a, k) => {
                let b = a.eval(x)?;
                if b == 0.0 && *k < 0 {
                    return Err(EvalError::ZeroToNegativePower);
                }
                b.powi(*k)
            }
            Expr::Powq(a, p, q) => rational_pow(a.eval(x)?, *p, *q)?.0,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Value and gradient by forward-mode differentiation.
    ///
    /// One-sided conventions at kinks: `abs'(0) = 0`, and `min`/`max` ties
    /// follow the first operand. Roots at zero yield an infinite partial,
    /// which callers must treat as "no usable gradient".
    pub fn eval_grad(&self, x: &[f64]) -> EvalResult<(f64, Vec<f64>)> {
        let n = x.len();
        Ok(match self {
            Expr::Const(c) => (*c, vec![0.0; n]),
            Expr::Var(i) => {
                let v = *x.get(*i).ok_or(EvalError::VariableOutOfRange {
                    index: *i,
                    arity: n,
                })?;
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                (v, g)
            }
            Expr::Neg(a) => {
                let (v, g) = a.eval_grad(x)?;
                (-v, scale(g, -1.0))
            }
            Expr::Add(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                (va + vb, axpy(ga, 1.0, &gb))
            }
            Expr::Sub(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                (va - vb, axpy(ga, -1.0, &gb))
            }
            Expr::Mul(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                (va * vb, axpy(scale(ga, vb), va, &gb))
            }
            Expr::Div(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                if vb == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                let g = axpy(scale(ga, 1.0 / vb), -va / (vb * vb), &gb);
                (va / vb, g)
            }
            Expr::Abs(a) => {
                let (v, g) = a.eval_grad(x)?;
                let s = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                (v.abs(), scale(g, s))
            }
            Expr::Min(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                if va <= vb {
                    (va, ga)
                } else {
                    (vb, gb)
                }
            }
            Expr::Max(a, b) => {
                let (va, ga) = a.eval_grad(x)?;
                let (vb, gb) = b.eval_grad(x)?;
                if va >= vb {
                    (va, ga)
                } else {
                    (vb, gb)
                }
            }
            Expr::Sqrt(a) => {
                let (v, g) = a.eval_grad(x)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtOfNegative(v));
                }
                let r = v.sqrt();
                (r, scale(g, 0.5 / r))
            }
            Expr::Powi(a, k) => {
                let (b, g) = a.eval_grad(x)?;
                if b == 0.0 && *k < 0 {
                    return Err(EvalError::ZeroToNegativePower);
                }
                let d = if *k == 0 {
                    0.0
                } else {
                    f64::from(*k) * b.powi(k - 1)
                };
                (b.powi(*k), scale(g, d))
            }
            Expr::Powq(a, p, q) => {
                let (b, g) = a.eval_grad(x)?;
                let (v, d) = rational_pow(b, *p, *q)?;
                (v, scale(g, d))
            }
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            Expr::Const(c) => json!(c),
            Expr::Var(i) => json!(["var", i]),
            Expr::Neg(a) => json!(["-", a.to_json()]),
            Expr::Add(a, b) => json!(["+", a.to_json(), b.to_json()]),
            Expr::Sub(a, b) => json!(["-", a.to_json(), b.to_json()]),
            Expr::Mul(a, b) => json!(["*", a.to_json(), b.to_json()]),
            Expr::Div(a, b) => json!(["/", a.to_json(), b.to_json()]),
            Expr::Abs(a) => json!(["abs", a.to_json()]),
            Expr::Min(a, b) => json!(["min", a.to_json(), b.to_json()]),
            Expr::Max(a, b) => json!(["max", a.to_json(), b.to_json()]),
            Expr::Sqrt(a) => json!(["sqrt", a.to_json()]),
            Expr::Powi(a, k) => json!(["pow", a.to_json(), k]),
            Expr::Powq(a, p, q) => json!(["pow", a.to_json(), p, q]),
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr> {
        if let Some(c) = v.as_f64() {
            return Ok(Expr::Const(c));
        }
        let arr = v
            .as_array()
            .ok_or_else(|| invalid(format!("expression must be a number or array, got {v}")))?;
        let (head, args) = arr
            .split_first()
            .ok_or_else(|| invalid("empty expression array"))?;
        let op = head
            .as_str()
            .ok_or_else(|| invalid(format!("operator must be a string, got {head}")))?;
        let arity_err = |want: &str| {
            invalid(format!(
                "operator `{op}` expects {want} operand(s), got {}",
                args.len()
            ))
        };
        let sub = |i: usize| Expr::from_json(&args[i]);
        let int_arg = |i: usize| -> Result<i64> {
            args[i].as_i64().ok_or_else(|| {
                invalid(format!(
                    "operator `{op}` expects an integer at position {i}"
                ))
            })
        };
        match op {
            "const" => {
                if args.len() != 1 {
                    return Err(arity_err("1"));
                }
                args[0]
                    .as_f64()
                    .map(Expr::Const)
                    .ok_or_else(|| invalid("`const` expects a number"))
            }
            "var" => {
                if args.len() != 1 {
                    return Err(arity_err("1"));
                }
                let i = args[0]
                    .as_u64()
                    .ok_or_else(|| invalid("`var` expects a non-negative integer index"))?;
                Ok(Expr::Var(i as usize))
            }
            "+" | "*" | "min" | "max" => {
                if args.is_empty() {
                    return Err(arity_err("at least 1"));
                }
                let mut acc = sub(0)?;
                for i in 1..args.len() {
                    let rhs = Box::new(sub(i)?);
                    let lhs = Box::new(acc);
                    acc = match op {
                        "+" => Expr::Add(lhs, rhs),
                        "*" => Expr::Mul(lhs, rhs),
                        "min" => Expr::Min(lhs, rhs),
                        _ => Expr::Max(lhs, rhs),
                    };
                }
                Ok(acc)
            }
            "-" => match args.len() {
                1 => Ok(Expr::Neg(Box::new(sub(0)?))),
                2 => Ok(Expr::Sub(Box::new(sub(0)?), Box::new(sub(1)?))),
                _ => Err(arity_err("1 or 2")),
            },
            "/" => {
                if args.len() != 2 {
                    return Err(arity_err("2"));
                }
                Ok(Expr::Div(Box::new(sub(0)?), Box::new(sub(1)?)))
            }
            "abs" | "sqrt" => {
                if args.len() != 1 {
                    return Err(arity_err("1"));
                }
                let a = sub(0)?;
                Ok(if op == "abs" { a.abs() } else { a.sqrt() })
            }
            "pow" => match args.len() {
                2 => {
                    let k = int_arg(1)?;
                    let k = i32::try_from(k).map_err(|_| invalid("power out of range"))?;
                    Ok(sub(0)?.powi(k))
                }
                3 => {
                    let p =
                        i32::try_from(int_arg(1)?).map_err(|_| invalid("power out of range"))?;
                    let q = int_arg(2)?;
                    if q <= 0 {
                        return Err(invalid("rational power needs a positive denominator"));
                    }
                    let q = u32::try_from(q).map_err(|_| invalid("power out of range"))?;
                    Ok(sub(0)?.powq(p, q))
                }
                _ => Err(arity_err("2 or 3")),
            },
            other => Err(invalid(format!("unknown operator `{other}`"))),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `b^(p/q)` and its derivative in `b`.
fn rational_pow(b: f64, p: i32, q: u32) -> EvalResult<(f64, f64)> {
    let e = f64::from(p) / f64::from(q);
    if b < 0.0 && q.is_multiple_of(2) {
        return Err(EvalError::EvenRootOfNegative(b));
    }
    if b == 0.0 {
        if p < 0 {
            return Err(EvalError::ZeroToNegativePower);
        }
        let d = if e > 1.0 {
            0.0
        } else if e == 1.0 {
            1.0
        } else {
            f64::INFINITY
        };
        return Ok((0.0, d));
    }
    let mag = b.abs().powf(e);
    let dmag = e * b.abs().powf(e - 1.0);
    if b > 0.0 {
        Ok((mag, dmag))
    } else if p % 2 == 0 {
        // even function of b
        Ok((mag, -dmag))
    } else {
        Ok((-mag, dmag))
    }
}

fn scale(mut g: Vec<f64>, s: f64) -> Vec<f64> {
    for v in &mut g {
        *v *= s;
    }
    g
}

fn axpy(mut y: Vec<f64>, a: f64, x: &[f64]) -> Vec<f64> {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
    y
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Expr::from_json(&v).map_err(D::Error::custom)
    }
}

/// An expression together with the number of variables it is a function of.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprFn {
    arity: usize,
    expr: Expr,
}

impl ExprFn {
    pub fn new(arity: usize, expr: Expr) -> Result<ExprFn> {
        if arity == 0 {
            return Err(invalid("expression arity must be positive"));
        }
        if expr.min_arity() > arity {
            return Err(invalid(format!(
                "expression references x{} but arity is {arity}",
                expr.min_arity() - 1
            )));
        }
        Ok(ExprFn { arity, expr })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.arity, x.len())?;
        Ok(self.expr.eval(x)?)
    }

    pub fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        crate::error::check_dim(self.arity, x.len())?;
        Ok(self.expr.eval_grad(x)?)
    }

    /// Parses the nested-array form and checks variable indices against `arity`.
    pub fn from_json(arity: usize, v: &Value) -> Result<ExprFn> {
        ExprFn::new(arity, Expr::from_json(v)?)
    }
}
