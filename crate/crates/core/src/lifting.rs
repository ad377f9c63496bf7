//! Lifting rotation curves through the double cover and reading off their
//! homotopy class.
//!
//! A flip starts at the identity, so its lift can be based at the quaternion
//! `1`. The lift is built sample by sample, always taking the preimage closest
//! to the previous one. Because the landing configurations have preimages
//! `{±1}` and `{±k}`, the lift ends in `⟨k⟩ = {1, −k, −1, k}`, and that
//! endpoint determines the class in `ℤ/4ℤ` via `n ↦ (−k)ⁿ`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::ops::{Add, Neg};

use crate::error::{Error, Result};
use crate::quat::{Quaternion, UnitQuaternion};
use crate::so3::{closer_preimage, nearest_preimage, to_quaternion, Rotation};
use crate::tricks::Flip;

pub const DEFAULT_SAMPLES: usize = 1024;

/// Maximum number of interval halvings when a step is too large.
pub const MAX_BISECTION_DEPTH: u32 = 20;

/// Endpoint snapping tolerance used by [`classify`].
pub const SNAP_TOLERANCE: f64 = 1e-6;

/// Largest allowed 4-distance between consecutive lift samples. Antipodal
/// preimages are 2 apart and the ambiguous configuration sits at √2.
pub const SHEET_MARGIN: f64 = SQRT_2 - 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub q: UnitQuaternion,
}

/// A sampled curve on the unit 3-sphere, based at `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatPath {
    samples: Vec<PathSample>,
}

impl QuatPath {
    /// Validates the basepoint, time ordering and step invariants.
    pub fn from_samples(samples: Vec<PathSample>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
        if first.t != 0.0 || samples.last().map(|s| s.t) != Some(1.0) {
            return Err(Error::InvalidArgument("path must run from t = 0 to t = 1".into()));
        }
        if first.q.distance(&UnitQuaternion::IDENTITY) > 1e-9 {
            return Err(Error::InvalidArgument("path must start at 1".into()));
        }
        for w in samples.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::InvalidArgument("times must increase strictly".into()));
            }
            if w[0].q.distance(&w[1].q) >= SHEET_MARGIN {
                return Err(Error::InsufficientContinuity { t: w[1].t });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn endpoint(&self) -> UnitQuaternion {
        self.samples.last().expect("nonempty path").q
    }

    /// Lift of `r`, the curve's value at time `t`, on the sheet of the
    /// closest sample. Valid when the curve is continuous at the sampling
    /// resolution, which construction guarantees.
    pub fn lift_point(&self, t: f64, r: &Rotation) -> UnitQuaternion {
        let idx = self.samples.partition_point(|s| s.t < t);
        let near = match idx {
            0 => 0,
            i if i >= self.samples.len() => self.samples.len() - 1,
            i if t - self.samples[i - 1].t < self.samples[i].t - t => i - 1,
            i => i,
        };
        let q = to_quaternion(r).unwrap_or(UnitQuaternion::IDENTITY);
        closer_preimage(q, &self.samples[near].q)
    }
}

/// Lifts a flip on a uniform grid of `n_samples` times.
pub fn lift(f: &Flip, n_samples: usize) -> Result<QuatPath> {
    lift_curve(|t| f.at(t), n_samples)
}

/// Lifts any rotation curve starting at the identity.
///
/// Each step picks the preimage nearest the previous sample. A step that is
/// ambiguous or longer than [`SHEET_MARGIN`] is bisected, up to
/// [`MAX_BISECTION_DEPTH`] times, and the refined samples are kept.
pub fn lift_curve<F>(curve: F, n_samples: usize) -> Result<QuatPath>
where
    F: Fn(f64) -> Rotation,
{
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let start = nearest_preimage(&curve(0.0), &UnitQuaternion::IDENTITY)?;
    if start.distance(&UnitQuaternion::IDENTITY) > 1e-9 {
        return Err(Error::InvalidFlip("curve does not start at the identity".into()));
    }
    let mut samples = Vec::with_capacity(n_samples);
    samples.push(PathSample {
        t: 0.0,
        q: UnitQuaternion::IDENTITY,
    });
    let last = (n_samples - 1) as f64;
    let mut prev = UnitQuaternion::IDENTITY;
    for i in 1..n_samples {
        let t0 = (i - 1) as f64 / last;
        let t1 = i as f64 / last;
        prev = step(&curve, t0, prev, t1, 0, &mut samples)?;
    }
    Ok(QuatPath { samples })
}

fn step<F>(
    curve: &F,
    t0: f64,
    q0: UnitQuaternion,
    t1: f64,
    depth: u32,
    out: &mut Vec<PathSample>,
) -> Result<UnitQuaternion>
where
    F: Fn(f64) -> Rotation,
{
    match nearest_preimage(&curve(t1), &q0) {
        Ok(q1) if q1.distance(&q0) < SHEET_MARGIN => {
            out.push(PathSample { t: t1, q: q1 });
            return Ok(q1);
        }
        Ok(_) | Err(Error::AmbiguousPreimage) => {}
        Err(e) => return Err(e),
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(Error::InsufficientContinuity { t: t1 });
    }
    let mid = 0.5 * (t0 + t1);
    let qm = step(curve, t0, q0, mid, depth + 1, out)?;
    step(curve, mid, qm, t1, depth + 1, out)
}

/// Residue class in `ℤ/4ℤ`; residue `n` corresponds to the lift endpoint `(−k)ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HomotopyClass(u8);

impl HomotopyClass {
    pub const ZERO: HomotopyClass = HomotopyClass(0);

    pub fn new(n: i64) -> Self {
        Self(n.rem_euclid(4) as u8)
    }

    pub fn residue(self) -> u8 {
        self.0
    }

    /// `(−k)ⁿ`: 1, −k, −1, k.
    pub fn endpoint(self) -> UnitQuaternion {
        match self.0 {
            0 => UnitQuaternion::IDENTITY,
            1 => -UnitQuaternion::K,
            2 => -UnitQuaternion::IDENTITY,
            _ => UnitQuaternion::K,
        }
    }

    /// Name of the shove-it family representative.
    pub fn label(self) -> &'static str {
        match self.0 {
            0 => "ollie-class",
            1 => "180-class",
            2 => "360-class",
            _ => "540-class",
        }
    }

    pub fn all() -> [HomotopyClass; 4] {
        [Self(0), Self(1), Self(2), Self(3)]
    }
}

impl Add for HomotopyClass {
    type Output = HomotopyClass;
    fn add(self, o: HomotopyClass) -> HomotopyClass {
        HomotopyClass((self.0 + o.0) % 4)
    }
}

impl Neg for HomotopyClass {
    type Output = HomotopyClass;
    fn neg(self) -> HomotopyClass {
        HomotopyClass((4 - self.0) % 4)
    }
}

impl fmt::Display for HomotopyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.label())
    }
}

pub fn class_add(a: HomotopyClass, b: HomotopyClass) -> HomotopyClass {
    a + b
}

/// Snaps a lift endpoint to the element of `⟨k⟩` within `tol` of it.
pub fn endpoint_snap(q: &UnitQuaternion, tol: f64) -> Result<HomotopyClass> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "snap tolerance {tol} outside (0, 0.5)"
        )));
    }
    HomotopyClass::all()
        .into_iter()
        .find(|c| c.endpoint().distance(q) <= tol)
        .ok_or(Error::NotALandingLift(q.to_array()))
}

/// Homotopy class of a flip, from its lift on the default grid.
pub fn classify(f: &Flip) -> Result<HomotopyClass> {
    classify_with(f, DEFAULT_SAMPLES, SNAP_TOLERANCE)
}

pub fn classify_with(f: &Flip, n_samples: usize, tol: f64) -> Result<HomotopyClass> {
    let path = lift(f, n_samples)?;
    endpoint_snap(&path.endpoint(), tol)
}

/// The closed-form lifts of the primitive curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    /// `σ(t) = cos(πt/2) − sin(πt/2)k`, lift of the shove-it.
    Sigma,
    /// `κ(t) = cos(πt) − sin(πt)j`, lift of the kickflip.
    Kappa,
    /// `υ(t) = cos(πt/2) + sin(πt/2)i`, lift of the x half turn.
    Upsilon,
}

/// An integer power of one of the closed-form lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticLift {
    pub kind: LiftKind,
    pub power: i32,
}

pub fn analytic_lift(name: &str, power: i32) -> Result<AnalyticLift> {
    let kind = match name {
        "sigma" => LiftKind::Sigma,
        "kappa" => LiftKind::Kappa,
        "upsilon" => LiftKind::Upsilon,
        other => return Err(Error::UnknownLift(other.to_string())),
    };
    Ok(AnalyticLift { kind, power })
}

impl AnalyticLift {
    pub fn at(&self, t: f64) -> UnitQuaternion {
        let n = self.power as f64;
        let q = match self.kind {
            LiftKind::Sigma => {
                let (s, c) = (n * FRAC_PI_2 * t).sin_cos();
                Quaternion::new(c, 0.0, 0.0, -s)
            }
            LiftKind::Kappa => {
                let (s, c) = (n * PI * t).sin_cos();
                Quaternion::new(c, 0.0, -s, 0.0)
            }
            LiftKind::Upsilon => {
                let (s, c) = (n * FRAC_PI_2 * t).sin_cos();
                Quaternion::new(c, s, 0.0, 0.0)
            }
        };
        UnitQuaternion::renormalized(q)
    }

    pub fn sample(&self, n_samples: usize) -> Result<QuatPath> {
        if n_samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 samples".into()));
        }
        let last = (n_samples - 1) as f64;
        QuatPath::from_samples(
            (0..n_samples)
                .map(|i| {
                    let t = i as f64 / last;
                    PathSample { t, q: self.at(t) }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::rho;
    use crate::tricks::{parse, Flip, Primitive, TrickExpr};

    fn flip(src: &str) -> Flip {
        Flip::from_expr(parse(src).unwrap()).unwrap()
    }

    fn class(src: &str) -> u8 {
        classify(&flip(src)).unwrap().residue()
    }

    #[test]
    fn lift_of_shoveit_is_sigma() {
        let path = lift(&flip("S"), 1024).unwrap();
        let sigma = analytic_lift("sigma", 1).unwrap();
        assert_eq!(path.len(), 1024);
        for s in path.samples() {
            assert!(s.q.max_abs_diff(&sigma.at(s.t)) < 1e-9, "t = {}", s.t);
        }
    }

    #[test]
    fn lift_of_ollie_is_constant() {
        let path = lift(&flip("O"), 16).unwrap();
        assert!(path.samples().iter().all(|s| s.q == UnitQuaternion::IDENTITY));
    }

    #[test]
    fn lift_of_kickflip_is_kappa() {
        let path = lift(&flip("K"), 1024).unwrap();
        let kappa = analytic_lift("kappa", 1).unwrap();
        for s in path.samples() {
            assert!(s.q.max_abs_diff(&kappa.at(s.t)) < 1e-9);
        }
    }

    #[test]
    fn coarse_grid_is_refined() {
        // S^3(1) = 𝒪 has preimages ±k, equidistant from 1: the step is bisected
        let path = lift(&flip("S^3"), 2).unwrap();
        assert!(path.len() > 2);
        assert_eq!(endpoint_snap(&path.endpoint(), 1e-6).unwrap().residue(), 3);
        QuatPath::from_samples(path.samples().to_vec()).unwrap();
    }

    #[test]
    fn discontinuous_curve_fails() {
        let jump = |t: f64| if t < 0.3 { Rotation::IDENTITY } else { Primitive::U.eval(1.0) };
        assert!(matches!(
            lift_curve(jump, 64),
            Err(Error::InsufficientContinuity { .. })
        ));
    }

    #[test]
    fn lift_needs_two_samples() {
        assert!(matches!(lift(&flip("S"), 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn snapping() {
        assert_eq!(endpoint_snap(&-UnitQuaternion::K, 1e-6).unwrap().residue(), 1);
        let near_one = UnitQuaternion::normalize(Quaternion::new(1.0, 1e-8, 0.0, 0.0)).unwrap();
        assert_eq!(endpoint_snap(&near_one, 1e-6).unwrap().residue(), 0);
        let far = UnitQuaternion::from_components(0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(matches!(endpoint_snap(&far, 1e-6), Err(Error::NotALandingLift(_))));
        assert!(endpoint_snap(&far, 0.7).is_err());
    }

    #[test]
    fn classes_of_shoveit_powers() {
        assert_eq!(class("O"), 0);
        assert_eq!(class("S"), 1);
        assert_eq!(class("S^2"), 2);
        assert_eq!(class("S^3"), 3);
        assert_eq!(class("S^-1"), 3);
    }

    #[test]
    fn classes_of_flips() {
        assert_eq!(class("K"), 2);
        assert_eq!(class("S * K"), 3);
        assert_eq!(class("K^2"), 0);
        assert_eq!(class("K^-1"), 2);
    }

    #[test]
    fn hardflip_class_matches_quaternion_arithmetic() {
        // υ(1)·κ(1/2) = i·(−j) = −k, residue 1
        let end = analytic_lift("upsilon", 1).unwrap().at(1.0) * analytic_lift("kappa", 1).unwrap().at(0.5);
        assert!(end.max_abs_diff(&-Quaternion::K) < 1e-15);
        assert_eq!(class("U * K@0.5"), 1);
    }

    #[test]
    fn modular_addition() {
        let c = HomotopyClass::new;
        assert_eq!(class_add(c(1), c(2)), c(3));
        assert_eq!(class_add(c(2), c(2)), c(0));
        assert_eq!(class_add(c(3), c(1)), c(0));
        assert_eq!(-c(1), c(3));
        assert_eq!(c(-1), c(3));
        assert_eq!(c(3).to_string(), "3 (540-class)");
    }

    #[test]
    fn analytic_powers() {
        let s2 = analytic_lift("sigma", 2).unwrap();
        let k_inv = analytic_lift("kappa", -1).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let (s, c) = (PI * t).sin_cos();
            assert!(s2.at(t).max_abs_diff(&Quaternion::new(c, 0.0, 0.0, -s)) < 1e-15);
            assert!(k_inv.at(t).max_abs_diff(&Quaternion::new(c, 0.0, s, 0.0)) < 1e-15);
        }
        assert_eq!(analytic_lift("upsilon", 1).unwrap().at(0.0), UnitQuaternion::IDENTITY);
        assert!(matches!(analytic_lift("tau", 1), Err(Error::UnknownLift(_))));
    }

    #[test]
    fn analytic_lifts_cover_matrix_curves() {
        for (name, prim) in [("sigma", Primitive::S), ("kappa", Primitive::K), ("upsilon", Primitive::U)] {
            for n in -3..=3 {
                let lift = analytic_lift(name, n).unwrap();
                let curve = TrickExpr::Power(Box::new(TrickExpr::prim(prim)), n);
                for i in 0..=64 {
                    let t = i as f64 / 64.0;
                    let diff = rho(&lift.at(t)).max_abs_diff(&curve.eval(t).unwrap());
                    assert!(diff < 1e-12, "{name}^{n} at {t}: {diff}");
                }
            }
        }
    }

    #[test]
    fn re_lifting_the_projection_reproduces_the_path() {
        let f = flip("S^2 * K");
        let path = lift(&f, 512).unwrap();
        let mut anchor = UnitQuaternion::IDENTITY;
        for s in path.samples() {
            let q = nearest_preimage(&rho(&s.q), &anchor).unwrap();
            assert!(q.max_abs_diff(&s.q) < 1e-12);
            anchor = q;
        }
    }

    #[test]
    fn lift_point_follows_sheet() {
        let f = flip("S^3");
        let path = lift(&f, 64).unwrap();
        let sigma3 = analytic_lift("sigma", 3).unwrap();
        for t in [0.0, 0.013, 0.5, 0.777, 1.0] {
            assert!(path.lift_point(t, &f.at(t)).max_abs_diff(&sigma3.at(t)) < 1e-9);
        }
    }
}
