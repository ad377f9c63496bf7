use std::fmt;
use std::sync::Arc;

use super::TrickExpr;
use crate::error::{Error, Result};
use crate::so3::{LandingConfig, Rotation};

/// Tolerance for the start and landing conditions of a flip.
pub const FLIP_TOLERANCE: f64 = 1e-9;

type Sampler = Arc<dyn Fn(f64) -> Rotation + Send + Sync>;

/// A curve `[0, 1] → SO(3)` that starts at the identity and lands at either
/// the identity or the reversed configuration.
///
/// A flip is consumed only through its sampler; the expression, when there
/// is one, is carried along for display and export.
#[derive(Clone)]
pub struct Flip {
    name: String,
    expr: Option<TrickExpr>,
    sampler: Sampler,
    landing: LandingConfig,
}

impl Flip {
    pub fn from_expr(expr: TrickExpr) -> Result<Self> {
        let gap = expr.seam_gap();
        if gap > FLIP_TOLERANCE {
            return Err(Error::InvalidFlip(format!(
                "`{expr}` jumps by {gap:e} at a concatenation seam"
            )));
        }
        let name = expr.to_string();
        let shared = expr.clone();
        let sampler: Sampler = Arc::new(move |t| shared.eval_unchecked(t));
        let landing = check_endpoints(&name, &sampler)?;
        Ok(Self {
            name,
            expr: Some(expr),
            sampler,
            landing,
        })
    }

    /// Wraps an arbitrary continuous curve. The endpoints are validated; the
    /// caller is responsible for continuity.
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Rotation + Send + Sync + 'static,
    {
        let name = name.into();
        let sampler: Sampler = Arc::new(f);
        let landing = check_endpoints(&name, &sampler)?;
        Ok(Self {
            name,
            expr: None,
            sampler,
            landing,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn expr(&self) -> Option<&TrickExpr> {
        self.expr.as_ref()
    }

    pub fn landing(&self) -> LandingConfig {
        self.landing
    }

    /// Samples the curve; `t` must lie in `[0, 1]`.
    pub fn at(&self, t: f64) -> Rotation {
        debug_assert!((0.0..=1.0).contains(&t), "t = {t} outside [0, 1]");
        (self.sampler)(t)
    }

    pub fn eval(&self, t: f64) -> Result<Rotation> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::DomainError(t));
        }
        Ok(self.at(t))
    }

    /// `g(t)·𝒪`: the same motion started from the reversed position.
    pub fn o_shifted(&self) -> Curve {
        let sampler = self.sampler.clone();
        Curve {
            expr: self.expr.clone().map(TrickExpr::o_shift),
            sampler: Arc::new(move |t| sampler(t) * Rotation::REVERSED),
        }
    }

    /// `t ↦ self(phi(t))`; `phi` must fix 0 and 1.
    pub fn reparametrized<P>(&self, phi: P) -> Result<Flip>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let sampler = self.sampler.clone();
        Flip::from_fn(format!("{}∘φ", self.name), move |t| sampler(phi(t).clamp(0.0, 1.0)))
    }

    /// Pointwise product `self(t)·other(t)` with another curve.
    pub fn pointwise_product<G>(&self, name: impl Into<String>, other: G) -> Result<Flip>
    where
        G: Fn(f64) -> Rotation + Send + Sync + 'static,
    {
        let sampler = self.sampler.clone();
        Flip::from_fn(name, move |t| sampler(t) * other(t))
    }
}

impl fmt::Debug for Flip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flip")
            .field("name", &self.name)
            .field("expr", &self.expr)
            .field("landing", &self.landing)
            .finish()
    }
}

/// A rotation curve that need not satisfy the flip endpoint conditions.
#[derive(Clone)]
pub struct Curve {
    pub expr: Option<TrickExpr>,
    pub sampler: Sampler,
}

fn check_endpoints(name: &str, sampler: &Sampler) -> Result<LandingConfig> {
    let start = sampler(0.0);
    if start.max_abs_diff(&Rotation::IDENTITY) > FLIP_TOLERANCE {
        return Err(Error::InvalidFlip(format!("`{name}` does not start at the identity")));
    }
    sampler(1.0).landing(FLIP_TOLERANCE).ok_or_else(|| {
        Error::InvalidFlip(format!(
            "`{name}` does not land at the identity or the reversed position"
        ))
    })
}

/// Plays `f` then `g`, each at double speed. When `f` lands reversed, `g` is
/// started from the reversed position (`g(t)·𝒪`) so the curve stays continuous.
pub fn concat(f: &Flip, g: &Flip) -> Flip {
    let second = match f.landing {
        LandingConfig::Identity => Curve {
            expr: g.expr.clone(),
            sampler: g.sampler.clone(),
        },
        LandingConfig::Reversed => g.o_shifted(),
    };
    let expr = match (&f.expr, second.expr) {
        (Some(l), Some(r)) => Some(TrickExpr::concat(l.clone(), r)),
        _ => None,
    };
    let first = f.sampler.clone();
    let rest = second.sampler;
    let sampler: Sampler = Arc::new(move |t| {
        if t <= 0.5 {
            first(2.0 * t)
        } else {
            rest(2.0 * t - 1.0)
        }
    });
    let landing = match (f.landing, g.landing) {
        (LandingConfig::Identity, l) | (l, LandingConfig::Identity) => l,
        (LandingConfig::Reversed, LandingConfig::Reversed) => LandingConfig::Identity,
    };
    let name = match &expr {
        Some(e) => e.to_string(),
        None => format!("({}) # ({})", f.name, g.name),
    };
    Flip {
        name,
        expr,
        sampler,
        landing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tricks::parse;

    fn flip(src: &str) -> Flip {
        Flip::from_expr(parse(src).unwrap()).unwrap()
    }

    #[test]
    fn concat_of_shoveits_is_360() {
        let s = flip("S");
        let joined = concat(&s, &s);
        assert_eq!(joined.expr(), Some(&parse("S # S!O").unwrap()));
        let s2 = parse("S^2").unwrap();
        for i in 0..=400 {
            let t = i as f64 / 400.0;
            assert!(joined.at(t).max_abs_diff(&s2.eval(t).unwrap()) < 1e-12);
        }
        assert_eq!(joined.landing(), LandingConfig::Identity);
    }

    #[test]
    fn concat_landings() {
        assert_eq!(concat(&flip("O"), &flip("K")).landing(), LandingConfig::Identity);
        assert_eq!(concat(&flip("S"), &flip("K")).landing(), LandingConfig::Reversed);
        assert_eq!(concat(&flip("K"), &flip("S")).landing(), LandingConfig::Reversed);
    }

    #[test]
    fn unshifted_seam_is_rejected() {
        // S lands reversed but K starts at the identity
        assert!(matches!(
            Flip::from_expr(parse("S # K").unwrap()),
            Err(Error::InvalidFlip(_))
        ));
        assert!(Flip::from_expr(parse("S # K!O").unwrap()).is_ok());
    }

    #[test]
    fn endpoint_validation() {
        assert!(Flip::from_expr(parse("U").unwrap()).is_err());
        assert!(Flip::from_expr(parse("rev(S)").unwrap()).is_err());
        assert!(Flip::from_expr(parse("U * K@0.5").unwrap()).is_ok());
        assert!(Flip::from_fn("half shove-it", |t| crate::tricks::Primitive::S.eval(t / 2.0)).is_err());
    }

    #[test]
    fn flip_eval_domain() {
        assert_eq!(flip("K").eval(2.0).unwrap_err(), Error::DomainError(2.0));
    }
}
