//! Flip tricks as closed-form rotation curves.
//!
//! Tricks are written as expressions over four primitive curves:
//!
//! | name | curve |
//! |------|-------|
//! | `O`  | constant identity (ollie) |
//! | `S`  | 180° left-handed turn about z (shove-it) |
//! | `K`  | 360° left-handed turn about y (kickflip) |
//! | `U`  | 180° right-handed turn about x (only meaningful inside products) |
//!
//! and combined with pointwise products, powers, time rescaling,
//! concatenation, the reversed-start shift and time reversal.

mod catalog;
mod flip;
mod parse;

use std::f64::consts::PI;
use std::fmt;

use num_rational::Ratio;

pub use catalog::{catalog, catalog_flips, lookup};
pub use flip::{concat, Flip, FLIP_TOLERANCE};
pub use parse::{parse, GRAMMAR};

use crate::error::{Error, Result};
use crate::so3::Rotation;

/// Primitive curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    O,
    S,
    K,
    U,
}

impl Primitive {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "O" => Ok(Primitive::O),
            "S" => Ok(Primitive::S),
            "K" => Ok(Primitive::K),
            "U" => Ok(Primitive::U),
            other => Err(Error::UnknownPrimitive(other.to_string())),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Primitive::O => "O",
            Primitive::S => "S",
            Primitive::K => "K",
            Primitive::U => "U",
        }
    }

    pub fn eval(self, t: f64) -> Rotation {
        match self {
            Primitive::O => Rotation::IDENTITY,
            Primitive::S => {
                let (s, c) = (PI * t).sin_cos();
                Rotation::from_raw([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
            }
            Primitive::K => {
                let (s, c) = (2.0 * PI * t).sin_cos();
                Rotation::from_raw([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
            }
            Primitive::U => {
                let (s, c) = (PI * t).sin_cos();
                Rotation::from_raw([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
            }
        }
    }
}

/// Returns the flip for a primitive name. `U` is rejected because it does
/// not land in an allowed configuration on its own.
pub fn primitive(name: &str) -> Result<Flip> {
    Flip::from_expr(TrickExpr::Primitive(Primitive::from_name(name)?))
}

/// Time-rescale factor `c ∈ (0, 1]`, kept exact so expressions print and
/// reparse without loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeScale(Ratio<u64>);

impl TimeScale {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer > denom {
            return Err(Error::InvalidTimeScale(format!("{numer}/{denom}")));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn half() -> Self {
        Self(Ratio::new(1, 2))
    }

    pub fn value(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }
}

impl fmt::Display for TimeScale {
    /// Finite decimals print as decimals (`0.5`), anything else as `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d == 1 {
            return write!(f, "{n}");
        }
        let (mut twos, mut fives, mut rest) = (0u32, 0u32, d);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        let digits = twos.max(fives);
        if rest != 1 || digits > 18 {
            return write!(f, "{n}/{d}");
        }
        let scale = 10u128.pow(digits);
        let scaled = n as u128 * (scale / d as u128);
        let int = scaled / scale;
        let frac = scaled % scale;
        write!(f, "{int}.{frac:0width$}", width = digits as usize)
    }
}

/// Trick expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TrickExpr {
    Primitive(Primitive),
    /// `e^n`, pointwise matrix power.
    Power(Box<TrickExpr>, i32),
    /// `l * r`, pointwise matrix product `l(t)·r(t)`.
    Product(Box<TrickExpr>, Box<TrickExpr>),
    /// `e@c`, evaluated at `c·t`.
    TimeScale(Box<TrickExpr>, TimeScale),
    /// `l # r`, `l` at double speed then `r` at double speed.
    Concat(Box<TrickExpr>, Box<TrickExpr>),
    /// `e!O`, evaluated as `e(t)·𝒪`.
    OShift(Box<TrickExpr>),
    /// `rev(e)`, evaluated at `1 − t`.
    Reverse(Box<TrickExpr>),
}

impl TrickExpr {
    pub fn prim(p: Primitive) -> Self {
        TrickExpr::Primitive(p)
    }

    /// `e^n`; a zero exponent collapses to the ollie.
    pub fn power(e: TrickExpr, n: i32) -> Self {
        if n == 0 {
            TrickExpr::Primitive(Primitive::O)
        } else {
            TrickExpr::Power(Box::new(e), n)
        }
    }

    pub fn product(l: TrickExpr, r: TrickExpr) -> Self {
        TrickExpr::Product(Box::new(l), Box::new(r))
    }

    pub fn time_scale(e: TrickExpr, c: TimeScale) -> Self {
        TrickExpr::TimeScale(Box::new(e), c)
    }

    pub fn concat(l: TrickExpr, r: TrickExpr) -> Self {
        TrickExpr::Concat(Box::new(l), Box::new(r))
    }

    pub fn o_shift(e: TrickExpr) -> Self {
        TrickExpr::OShift(Box::new(e))
    }

    pub fn reverse(e: TrickExpr) -> Self {
        TrickExpr::Reverse(Box::new(e))
    }

    /// Evaluates the curve at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<Rotation> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::DomainError(t));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> Rotation {
        match self {
            TrickExpr::Primitive(p) => p.eval(t),
            TrickExpr::Power(e, n) => e.eval_unchecked(t).powi(*n),
            TrickExpr::Product(l, r) => l.eval_unchecked(t) * r.eval_unchecked(t),
            TrickExpr::TimeScale(e, c) => e.eval_unchecked(c.value() * t),
            TrickExpr::Concat(l, r) => {
                if t <= 0.5 {
                    l.eval_unchecked(2.0 * t)
                } else {
                    r.eval_unchecked(2.0 * t - 1.0)
                }
            }
            TrickExpr::OShift(e) => e.eval_unchecked(t) * Rotation::REVERSED,
            TrickExpr::Reverse(e) => e.eval_unchecked(1.0 - t),
        }
    }

    /// Largest jump at any concatenation seam, `max ‖l(1) − r(0)‖∞`.
    pub(crate) fn seam_gap(&self) -> f64 {
        match self {
            TrickExpr::Primitive(_) => 0.0,
            TrickExpr::Power(e, _)
            | TrickExpr::TimeScale(e, _)
            | TrickExpr::OShift(e)
            | TrickExpr::Reverse(e) => e.seam_gap(),
            TrickExpr::Product(l, r) => l.seam_gap().max(r.seam_gap()),
            TrickExpr::Concat(l, r) => {
                let here = l.eval_unchecked(1.0).max_abs_diff(&r.eval_unchecked(0.0));
                here.max(l.seam_gap()).max(r.seam_gap())
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            TrickExpr::Primitive(_) => 1,
            TrickExpr::Power(e, _)
            | TrickExpr::TimeScale(e, _)
            | TrickExpr::OShift(e)
            | TrickExpr::Reverse(e) => 1 + e.size(),
            TrickExpr::Product(l, r) | TrickExpr::Concat(l, r) => 1 + l.size() + r.size(),
        }
    }

    // Binding strength in the grammar: concat < product < shift < scale < power < atom.
    fn level(&self) -> u8 {
        match self {
            TrickExpr::Concat(..) => 0,
            TrickExpr::Product(..) => 1,
            TrickExpr::OShift(_) => 2,
            TrickExpr::TimeScale(..) => 3,
            TrickExpr::Power(..) => 4,
            TrickExpr::Primitive(_) | TrickExpr::Reverse(_) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            TrickExpr::Primitive(p) => write!(f, "{}", p.symbol()),
            TrickExpr::Power(e, n) => {
                e.fmt_at(f, 5)?;
                write!(f, "^{n}")
            }
            TrickExpr::Product(l, r) => {
                l.fmt_at(f, 1)?;
                write!(f, " * ")?;
                r.fmt_at(f, 2)
            }
            TrickExpr::TimeScale(e, c) => {
                e.fmt_at(f, 4)?;
                write!(f, "@{c}")
            }
            TrickExpr::Concat(l, r) => {
                l.fmt_at(f, 0)?;
                write!(f, " # ")?;
                r.fmt_at(f, 1)
            }
            TrickExpr::OShift(e) => {
                e.fmt_at(f, 3)?;
                write!(f, "!O")
            }
            TrickExpr::Reverse(e) => {
                write!(f, "rev(")?;
                e.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for TrickExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl std::str::FromStr for TrickExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(src: &str) -> TrickExpr {
        parse(src).unwrap()
    }

    #[test]
    fn primitive_endpoints() {
        assert!(Primitive::S.eval(1.0).max_abs_diff(&Rotation::REVERSED) < 1e-15);
        assert!(Primitive::K.eval(1.0).max_abs_diff(&Rotation::IDENTITY) < 1e-15);
        let x_half_turn = Rotation::from_raw([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert!(Primitive::U.eval(1.0).max_abs_diff(&x_half_turn) < 1e-15);
        assert!(matches!(primitive("U"), Err(Error::InvalidFlip(_))));
        assert!(matches!(primitive("X"), Err(Error::UnknownPrimitive(_))));
        assert!(primitive("S").is_ok());
    }

    #[test]
    fn squared_shoveit_matches_closed_form() {
        let s2 = e("S^2");
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            let (s, c) = (2.0 * PI * t).sin_cos();
            let expected = Rotation::from_raw([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]);
            assert!(s2.eval(t).unwrap().max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn ollie_is_constant() {
        assert_eq!(e("O").eval(0.37).unwrap(), Rotation::IDENTITY);
    }

    #[test]
    fn hardflip_lands_reversed() {
        let hardflip = TrickExpr::product(
            TrickExpr::prim(Primitive::U),
            TrickExpr::time_scale(TrickExpr::prim(Primitive::K), TimeScale::half()),
        );
        let end = hardflip.eval(1.0).unwrap();
        let minus_k = crate::quat::rho(&-crate::quat::UnitQuaternion::K);
        assert!(end.max_abs_diff(&minus_k) < 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        assert_eq!(e("S").eval(1.5), Err(Error::DomainError(1.5)));
        assert_eq!(e("S").eval(-0.1), Err(Error::DomainError(-0.1)));
    }

    #[test]
    fn time_reversal() {
        let r = e("rev(S)");
        assert!(r.eval(0.0).unwrap().max_abs_diff(&Rotation::REVERSED) < 1e-15);
        assert!(r.eval(1.0).unwrap().max_abs_diff(&Rotation::IDENTITY) < 1e-15);
    }

    #[test]
    fn shoveit_and_kickflip_do_not_commute() {
        let (sk, ks) = (e("S * K"), e("K * S"));
        let worst = (0..=200)
            .map(|i| i as f64 / 200.0)
            .map(|t| sk.eval(t).unwrap().max_abs_diff(&ks.eval(t).unwrap()))
            .fold(0.0_f64, f64::max);
        assert!(worst > 0.1, "max difference {worst}");
    }

    #[test]
    fn time_scale_display() {
        assert_eq!(TimeScale::half().to_string(), "0.5");
        assert_eq!(TimeScale::new(1, 3).unwrap().to_string(), "1/3");
        assert_eq!(TimeScale::new(3, 8).unwrap().to_string(), "0.375");
        assert_eq!(TimeScale::new(4, 4).unwrap().to_string(), "1");
        assert!(TimeScale::new(3, 2).is_err());
        assert!(TimeScale::new(0, 2).is_err());
    }

    #[test]
    fn zero_power_simplifies() {
        assert_eq!(TrickExpr::power(e("K"), 0), e("O"));
    }

    proptest! {
        #[test]
        fn power_is_repeated_product(n in -3i32..=3, t in 0.0f64..=1.0) {
            let base = e("S * K");
            let lhs = TrickExpr::Power(Box::new(base.clone()), n).eval(t).unwrap();
            let m = base.eval(t).unwrap();
            let mut rhs = Rotation::IDENTITY;
            let step = if n < 0 { m.transpose() } else { m };
            for _ in 0..n.abs() {
                rhs = rhs * step;
            }
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
