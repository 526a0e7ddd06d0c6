use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error};

/// Test functions of the first coordinate with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestFunction {
    /// `x`
    Linear,
    /// `x²`
    Quadratic,
    /// `cos πx`
    CosPi,
    /// `sin πx`
    SinPi,
    /// `eˣ`
    Exp,
}

impl TestFunction {
    pub fn value(self, x: f64) -> f64 {
        match self {
            TestFunction::Linear => x,
            TestFunction::Quadratic => x * x,
            TestFunction::CosPi => (PI * x).cos(),
            TestFunction::SinPi => (PI * x).sin(),
            TestFunction::Exp => x.exp(),
        }
    }

    pub fn d1(self, x: f64) -> f64 {
        match self {
            TestFunction::Linear => 1.0,
            TestFunction::Quadratic => 2.0 * x,
            TestFunction::CosPi => -PI * (PI * x).sin(),
            TestFunction::SinPi => PI * (PI * x).cos(),
            TestFunction::Exp => x.exp(),
        }
    }

    pub fn d2(self, x: f64) -> f64 {
        match self {
            TestFunction::Linear => 0.0,
            TestFunction::Quadratic => 2.0,
            TestFunction::CosPi => -PI * PI * (PI * x).cos(),
            TestFunction::SinPi => -PI * PI * (PI * x).sin(),
            TestFunction::Exp => x.exp(),
        }
    }

    /// Value at a point of `ℝ^d`, through its first coordinate.
    pub fn at(self, p: &[f64]) -> f64 {
        self.value(p[0])
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Linear => "x",
            TestFunction::Quadratic => "x2",
            TestFunction::CosPi => "cos_pi",
            TestFunction::SinPi => "sin_pi",
            TestFunction::Exp => "exp",
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "x" | "linear" => Ok(TestFunction::Linear),
            "x2" | "quadratic" => Ok(TestFunction::Quadratic),
            "cos_pi" => Ok(TestFunction::CosPi),
            "sin_pi" => Ok(TestFunction::SinPi),
            "exp" => Ok(TestFunction::Exp),
            other => Err(invalid(format!("unknown test function '{other}' (x, x2, cos_pi, sin_pi, exp)"))),
        }
    }
}
