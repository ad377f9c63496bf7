//! Deforming a trick onto a constant-rate rotation about a fixed axis.
//!
//! Fix a unit axis `u` and complete it to a right-handed frame `(a, b, u)`.
//! Writing quaternions as `x0 + x1 a + x2 b + x3 u`, the circle `Γ∥` is
//! `{x1 = x2 = 0}` (rotations about `u`) and `Γ⊥` is `{x0 = x3 = 0}`. Off `Γ⊥`
//! the map
//!
//! ```text
//! F(s, q) = (√n x0, √(1−s) x1, √(1−s) x2, √n x3),
//! n(s, q) = (1 − (1−s)(x1² + x2²)) / (x0² + x3²)
//! ```
//!
//! retracts the sphere onto `Γ∥`. A lift that avoids `Γ⊥` is pushed onto
//! `Γ∥` by `F`, giving `cos θ(t) + sin θ(t) u`, and then `θ` is straightened
//! to `a₀t + φ₀` by a convex combination.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::homotopy::Homotopy;
use crate::lifting::{lift, QuatPath};
use crate::quat::{rho, Quaternion, UnitQuaternion, Vec3, UNIT_TOLERANCE};
use crate::so3::Rotation;
use crate::tricks::Flip;

/// `x0² + x3²` below which [`retract`] refuses a point.
pub const PERPENDICULAR_EXCLUSION: f64 = 1e-9;

/// Minimum `x0² + x3²` along a lift accepted by [`stabilize`].
pub const STABILIZE_MARGIN: f64 = 1e-6;

/// Allowed distance of the lift endpoint from `Γ∥`.
const ENDPOINT_TOLERANCE: f64 = 1e-9;

/// Orthonormal right-handed frame `(a, b, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFrame {
    a: Vec3,
    b: Vec3,
    u: Vec3,
}

impl AxisFrame {
    pub fn new(a: Vec3, b: Vec3, u: Vec3) -> Result<Self> {
        let tol = UNIT_TOLERANCE;
        let unit = [a, b, u].iter().all(|v| (v.norm() - 1.0).abs() <= tol);
        let orthogonal = a.dot(&b).abs() <= tol && a.dot(&u).abs() <= tol && b.dot(&u).abs() <= tol;
        let right_handed = a.cross(&b).max_abs_diff(&u) <= tol;
        if !(unit && orthogonal && right_handed) {
            return Err(Error::InvalidArgument(
                "frame must be orthonormal and right-handed".into(),
            ));
        }
        Ok(Self { a, b, u })
    }

    /// Completes `u` to a frame. `a` comes from the standard basis vector
    /// least aligned with `u`, and `b = u × a`.
    pub fn from_axis(u: Vec3) -> Result<Self> {
        let norm = u.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::NonUnitAxis { norm });
        }
        let u = u.scale(1.0 / norm);
        let seed = [Vec3::I, Vec3::J, Vec3::K]
            .into_iter()
            .min_by(|x, y| x.dot(&u).abs().total_cmp(&y.dot(&u).abs()))
            .expect("three candidates");
        let a = seed - u.scale(seed.dot(&u));
        let a = a.scale(1.0 / a.norm());
        let b = u.cross(&a);
        Self::new(a, b, u)
    }

    pub fn a(&self) -> Vec3 {
        self.a
    }

    pub fn b(&self) -> Vec3 {
        self.b
    }

    pub fn u(&self) -> Vec3 {
        self.u
    }

    /// `(x0, x1, x2, x3)` with `q = x0 + x1 a + x2 b + x3 u`.
    pub fn coordinates(&self, q: &Quaternion) -> [f64; 4] {
        let v = q.im();
        [q.q0, v.dot(&self.a), v.dot(&self.b), v.dot(&self.u)]
    }

    pub fn from_coordinates(&self, x: [f64; 4]) -> Quaternion {
        let v = self.a.scale(x[1]) + self.b.scale(x[2]) + self.u.scale(x[3]);
        Quaternion::from_parts(x[0], v)
    }

    /// `x0² + x3²`; zero exactly on `Γ⊥`.
    pub fn perpendicular_margin(&self, q: &Quaternion) -> f64 {
        let x = self.coordinates(q);
        x[0] * x[0] + x[3] * x[3]
    }

    /// `√(x1² + x2²)`; zero exactly on `Γ∥`.
    pub fn parallel_offset(&self, q: &Quaternion) -> f64 {
        let x = self.coordinates(q);
        (x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Change of basis: columns `a`, `b`, `u`.
    fn basis_matrix(&self) -> Rotation {
        let (a, b, u) = (self.a, self.b, self.u);
        Rotation::from_raw([[a.v1, b.v1, u.v1], [a.v2, b.v2, u.v2], [a.v3, b.v3, u.v3]])
    }
}

/// Wobble amplitude and frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WobbleParams {
    a: f64,
    omega: f64,
}

impl WobbleParams {
    /// `a` must lie in `[0, 1)`: at `a = 1` the lift crosses `Γ⊥` and the
    /// retraction is undefined.
    pub fn new(a: f64, omega: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::InvalidAmplitude(a));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("wobble frequency {omega}")));
        }
        Ok(Self { a, omega })
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `a cos(2πωt) i + a sin(2πωt) j − √(1−a²) k`.
    pub fn axis(&self, t: f64) -> Vec3 {
        let (s, c) = (TAU * self.omega * t).sin_cos();
        Vec3::new(self.a * c, self.a * s, -(1.0 - self.a * self.a).sqrt())
    }

    /// `cos(πt) + sin(πt) k_{a,ω}(t)`.
    pub fn lift(&self, t: f64) -> UnitQuaternion {
        let (s, c) = (PI * t).sin_cos();
        UnitQuaternion::renormalized(Quaternion::from_parts(c, self.axis(t).scale(s)))
    }
}

/// A 360 shove-it whose rotation axis precesses around `−k`.
pub fn wobble_shuvit(p: WobbleParams) -> Flip {
    Flip::from_fn(format!("wobble(a={}, omega={})", p.a, p.omega), move |t| {
        rho(&p.lift(t))
    })
    .expect("wobble lift runs from 1 to -1")
}

/// The renormalization factor `n(s, q)` of the retraction.
pub fn retraction_scale(frame: &AxisFrame, s: f64, q: &Quaternion) -> Result<f64> {
    let x = frame.coordinates(q);
    let margin = x[0] * x[0] + x[3] * x[3];
    if margin <= PERPENDICULAR_EXCLUSION {
        return Err(Error::NearPerpendicularCircle(margin));
    }
    Ok((1.0 - (1.0 - s) * (x[1] * x[1] + x[2] * x[2])) / margin)
}

/// `F(s, q)`: deformation retraction of `S³ − Γ⊥` onto `Γ∥`.
pub fn retract(frame: &AxisFrame, s: f64, q: &UnitQuaternion) -> Result<UnitQuaternion> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::DomainError(s));
    }
    let n = retraction_scale(frame, s, q)?;
    let x = frame.coordinates(q);
    let (kn, kp) = (n.sqrt(), (1.0 - s).sqrt());
    let out = frame.from_coordinates([kn * x[0], kp * x[1], kp * x[2], kn * x[3]]);
    Ok(UnitQuaternion::renormalized(out))
}

/// `n(s, t)` along the wobble lift with axis `−k`:
/// `1 + s·a²sin²(πt) / (1 − a²sin²(πt))`.
pub fn wobble_n(p: WobbleParams, s: f64, t: f64) -> f64 {
    let w = (p.a * (PI * t).sin()).powi(2);
    1.0 + s * w / (1.0 - w)
}

/// Angle parameters of the straightened curve `S_{a,φ}`, which turns about
/// `u` by `a·t + φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizedForm {
    /// Rotation rate `a`, twice the lift's angular rate `a₀`.
    pub angular_rate: f64,
    /// Phase `φ ∈ [0, 2π)`, twice the lift phase `φ₀` reduced mod 2π.
    pub phase: f64,
}

impl StabilizedForm {
    fn from_lift_angles(a0: f64, phi0: f64) -> Self {
        Self {
            angular_rate: 2.0 * a0,
            phase: (2.0 * phi0).rem_euclid(TAU),
        }
    }

    /// `S_{a,φ}(t)` expressed in the frame's basis.
    pub fn matrix_in_frame(&self, t: f64) -> Rotation {
        let (s, c) = (self.angular_rate * t + self.phase).sin_cos();
        Rotation::from_raw([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// `S_{a,φ}(t)` in standard coordinates.
    pub fn curve(&self, frame: &AxisFrame, t: f64) -> Rotation {
        let p = frame.basis_matrix();
        p * self.matrix_in_frame(t) * p.transpose()
    }
}

/// Straight-line homotopy from `θ(t)` to `a₀t + φ₀`, mapped onto `Γ∥` by
/// `γ ↦ cos γ + sin γ u`.
#[derive(Clone)]
pub struct AngleLinearization {
    u: Vec3,
    theta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    a0: f64,
    phi0: f64,
}

impl AngleLinearization {
    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn theta(&self, t: f64) -> f64 {
        (self.theta)(t)
    }

    /// `γ(s, t) = (1−s)θ(t) + s(a₀t + φ₀)`.
    pub fn gamma(&self, s: f64, t: f64) -> f64 {
        (1.0 - s) * self.theta(t) + s * (self.a0 * t + self.phi0)
    }

    pub fn lift(&self, s: f64, t: f64) -> UnitQuaternion {
        let (sn, c) = self.gamma(s, t).sin_cos();
        UnitQuaternion::renormalized(Quaternion::from_parts(c, self.u.scale(sn)))
    }

    /// `G(s, t)`.
    pub fn map(&self, s: f64, t: f64) -> Rotation {
        rho(&self.lift(s, t))
    }

    pub fn form(&self) -> StabilizedForm {
        StabilizedForm::from_lift_angles(self.a0, self.phi0)
    }
}

fn check_continuous_angles(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two angle samples".into()));
    }
    for w in samples.windows(2) {
        let jump = (w[1].1 - w[0].1).abs();
        if jump.is_nan() || jump >= PI / 2.0 {
            return Err(Error::DiscontinuousAngle { t: w[1].0, jump });
        }
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidArgument("angle sample times must increase".into()));
        }
    }
    Ok(())
}

/// Builds `G` from samples `(t, θ(t))` covering `[0, 1]`, interpolating
/// linearly between them. Adjacent samples must differ by less than `π/2`.
pub fn linearize_angle(u: Vec3, samples: &[(f64, f64)]) -> Result<AngleLinearization> {
    check_continuous_angles(samples)?;
    let owned: Vec<(f64, f64)> = samples.to_vec();
    let theta0 = owned[0].1;
    let theta1 = owned[owned.len() - 1].1;
    let theta = move |t: f64| interpolate(&owned, t);
    Ok(AngleLinearization {
        u,
        theta: Arc::new(theta),
        a0: theta1 - theta0,
        phi0: theta0,
    })
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let i = samples.partition_point(|s| s.0 < t);
    if i == 0 {
        return samples[0].1;
    }
    if i >= samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (t0, y0) = samples[i - 1];
    let (t1, y1) = samples[i];
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Continuous branch of a sequence of angles given in `(−π, π]`: each value
/// is shifted by a multiple of 2π to land closest to its predecessor.
pub fn unwrap_angles(wrapped: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(wrapped.len());
    for &(t, w) in wrapped {
        let value = match out.last() {
            None => w,
            Some(&(_, prev)) => nearest_branch(w, prev),
        };
        out.push((t, value));
    }
    check_continuous_angles(&out)?;
    Ok(out)
}

fn nearest_branch(wrapped: f64, reference: f64) -> f64 {
    wrapped + TAU * ((reference - wrapped) / TAU).round()
}

/// Output of [`stabilize`].
#[derive(Clone)]
pub struct Stabilization {
    pub homotopy: Homotopy,
    pub form: StabilizedForm,
    pub frame: AxisFrame,
    /// Lift of the input flip on the sampling grid.
    pub lift: QuatPath,
    pub linearization: AngleLinearization,
}

/// Deforms `f` into a constant-rate rotation about `frame.u()`.
///
/// The homotopy runs the retraction `ρ∘F(s', α(t))` for `s ∈ [0, ½]`
/// (`s' = 2s`) and then the angle straightening for `s ∈ [½, 1]`
/// (`s' = 2s − 1`).
pub fn stabilize(f: &Flip, frame: AxisFrame, n_samples: usize) -> Result<Stabilization> {
    let path = lift(f, n_samples)?;
    for (t, q) in [(0.0, path.samples()[0].q), (1.0, path.endpoint())] {
        let offset = frame.parallel_offset(&q);
        if offset > ENDPOINT_TOLERANCE {
            return Err(Error::EndpointNotOnParallelCircle { t, offset });
        }
    }
    check_margin(f, &frame, &path)?;

    let wrapped: Vec<(f64, f64)> = path
        .samples()
        .iter()
        .map(|s| {
            let r = retract(&frame, 1.0, &s.q)?;
            Ok((s.t, parallel_angle(&frame, &r)))
        })
        .collect::<Result<_>>()?;
    let unwrapped = unwrap_angles(&wrapped)?;
    let sampled = linearize_angle(frame.u(), &unwrapped)?;

    // Evaluate θ exactly off the grid: retract the true lift point and take
    // the branch nearest the interpolated value.
    let lift_point = {
        let path = path.clone();
        let f = f.clone();
        move |t: f64| path.lift_point(t, &f.at(t))
    };
    let exact_theta = {
        let lift_point = lift_point.clone();
        let sampled = sampled.clone();
        move |t: f64| {
            let approx = sampled.theta(t);
            match retract(&frame, 1.0, &lift_point(t)) {
                Ok(r) => nearest_branch(parallel_angle(&frame, &r), approx),
                Err(_) => approx,
            }
        }
    };
    let linearization = AngleLinearization {
        u: frame.u(),
        theta: Arc::new(exact_theta),
        a0: sampled.a0,
        phi0: sampled.phi0,
    };
    let form = linearization.form();

    let target = {
        let lin = linearization.clone();
        Flip::from_fn(format!("stabilized({})", f.name()), move |t| lin.map(1.0, t))?
    };
    let glued = {
        let lin = linearization.clone();
        move |s: f64, t: f64| {
            if s <= 0.5 {
                let q = lift_point(t);
                retract(&frame, (2.0 * s).min(1.0), &q).unwrap_or(q)
            } else {
                lin.lift(2.0 * s - 1.0, t)
            }
        }
    };
    let homotopy = Homotopy::new(format!("stabilize({})", f.name()), glued, f.clone(), target);
    Ok(Stabilization {
        homotopy,
        form,
        frame,
        lift: path,
        linearization,
    })
}

fn parallel_angle(frame: &AxisFrame, q: &UnitQuaternion) -> f64 {
    let x = frame.coordinates(q);
    x[3].atan2(x[0])
}

// Checks x0² + x3² along the lift, refining around every sampled local minimum
// so that a crossing between grid points is not missed.
fn check_margin(f: &Flip, frame: &AxisFrame, path: &QuatPath) -> Result<()> {
    let samples = path.samples();
    let margins: Vec<f64> = samples.iter().map(|s| frame.perpendicular_margin(&s.q)).collect();
    let at = |t: f64| frame.perpendicular_margin(&path.lift_point(t, &f.at(t)));
    for i in 0..samples.len() {
        let left = if i > 0 { margins[i - 1] } else { f64::INFINITY };
        let right = margins.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if margins[i] > left || margins[i] > right {
            continue;
        }
        let lo = samples[i.saturating_sub(1)].t;
        let hi = samples[(i + 1).min(samples.len() - 1)].t;
        let (t, margin) = golden_min(&at, lo, hi, margins[i], samples[i].t);
        if margin <= STABILIZE_MARGIN {
            return Err(Error::IntersectsPerpendicularCircle { t, margin });
        }
    }
    Ok(())
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, seed: f64, seed_t: f64) -> (f64, f64) {
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut best_t, mut best) = (seed_t, seed);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - ratio * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + ratio * (hi - lo);
            g2 = g(x2);
        }
        for (x, v) in [(x1, g1), (x2, g2)] {
            if v < best {
                best = v;
                best_t = x;
            }
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    (best_t, best)
}
