use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Jet;

/// Number type a Lagrangian can be written against once and evaluated on
/// both plain floats and jets.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant of the same kind as `self`.
    fn cst(&self, c: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn tanh(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn cst(&self, c: f64) -> f64 {
        c
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn tan(&self) -> f64 {
        f64::tan(*self)
    }
    fn sinh(&self) -> f64 {
        f64::sinh(*self)
    }
    fn cosh(&self) -> f64 {
        f64::cosh(*self)
    }
    fn tanh(&self) -> f64 {
        f64::tanh(*self)
    }
    fn powi(&self, n: i32) -> f64 {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> f64 {
        f64::powf(*self, p)
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn cst(&self, c: f64) -> Jet {
        Jet::cst(self, c)
    }
    fn sqrt(&self) -> Jet {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn tan(&self) -> Jet {
        Jet::tan(self)
    }
    fn sinh(&self) -> Jet {
        Jet::sinh(self)
    }
    fn cosh(&self) -> Jet {
        Jet::cosh(self)
    }
    fn tanh(&self) -> Jet {
        Jet::tanh(self)
    }
    fn powi(&self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Jet {
        Jet::powf(self, p)
    }
}
