//! Explicit homotopies between flips and a grid-based verifier.
//!
//! Every homotopy here is given by its lift `(s, t) ↦ S³`; the rotation map is
//! `rho` of that. A valid homotopy `H` between flips `R` and `F` satisfies
//!
//! 1. `H(0, t) = R(t)`,
//! 2. `H(1, t) = F(t)`,
//! 3. `H(s, 0) = I₃`,
//! 4. `H(s, 1)` is one fixed landing configuration for every `s`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lifting::{classify, HomotopyClass};
use crate::quat::{rho, Quaternion, UnitQuaternion};
use crate::so3::{LandingConfig, Rotation};
use crate::tricks::{concat, parse, Flip, Primitive, TrickExpr};

pub(crate) type LiftMap = Arc<dyn Fn(f64, f64) -> UnitQuaternion + Send + Sync>;

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 5] = ["contract-k2", "kick-heel", "kick-s2", "varial-s3", "spread-s2-s"];

/// Recursion limit when a grid step exceeds the continuity bound.
const CONTINUITY_REFINE_DEPTH: u32 = 16;

#[derive(Clone)]
pub struct Homotopy {
    name: String,
    lift: LiftMap,
    source: Flip,
    target: Flip,
}

impl Homotopy {
    pub fn new<L>(name: impl Into<String>, lift: L, source: Flip, target: Flip) -> Self
    where
        L: Fn(f64, f64) -> UnitQuaternion + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            lift: Arc::new(lift),
            source,
            target,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Flip {
        &self.source
    }

    pub fn target(&self) -> &Flip {
        &self.target
    }

    /// Replaces the declared target flip, keeping the map.
    pub fn with_target(mut self, target: Flip) -> Self {
        self.target = target;
        self
    }

    pub fn lift_at(&self, s: f64, t: f64) -> UnitQuaternion {
        (self.lift)(s, t)
    }

    pub fn map(&self, s: f64, t: f64) -> Rotation {
        rho(&(self.lift)(s, t))
    }

    /// The curve `t ↦ H(s, t)` as a flip.
    pub fn slice(&self, s: f64) -> Result<Flip> {
        let lift = self.lift.clone();
        Flip::from_fn(format!("{}[s={s}]", self.name), move |t| rho(&lift(s, t)))
    }

    /// Classes of the slices at the given parameters.
    pub fn slice_classes(&self, params: &[f64]) -> Result<Vec<HomotopyClass>> {
        params.iter().map(|&s| classify(&self.slice(s)?)).collect()
    }

    /// Checks the four homotopy conditions on a `grid_s × grid_t` grid.
    pub fn verify(&self, grid_s: usize, grid_t: usize, tol: f64) -> VerificationReport {
        let s_grid = uniform_grid(grid_s.max(2));
        let t_grid = uniform_grid(grid_t.max(2));
        let values: Vec<Vec<Rotation>> = s_grid
            .iter()
            .map(|&s| t_grid.iter().map(|&t| self.map(s, t)).collect())
            .collect();
        let map = |s: f64, t: f64| self.map(s, t);
        verify_grid(
            &GridData {
                s_grid: &s_grid,
                t_grid: &t_grid,
                values: &values,
            },
            Some(&self.source),
            Some(&self.target),
            Some(&map),
            tol,
        )
    }
}

impl fmt::Debug for Homotopy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Homotopy")
            .field("name", &self.name)
            .field("source", &self.source.name())
            .field("target", &self.target.name())
            .finish()
    }
}

/// `n` evenly spaced points from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let last = (n.max(2) - 1) as f64;
    (0..n.max(2)).map(|i| i as f64 / last).collect()
}

fn flip(src: &str) -> Flip {
    Flip::from_expr(parse(src).expect("valid expression")).expect("valid flip")
}

fn unit(q0: f64, q1: f64, q2: f64, q3: f64) -> UnitQuaternion {
    UnitQuaternion::renormalized(Quaternion::new(q0, q1, q2, q3))
}

/// The unit 4-vector `(1 + s(cos 2πt − 1), 0, −s sin 2πt, −√(2s(1−s)(1−cos 2πt)))`:
/// the great circle of the double kickflip lift contracted through a hemisphere.
pub fn contraction_vector(s: f64, t: f64) -> Quaternion {
    let (sn, c) = (2.0 * PI * t).sin_cos();
    let radicand = (2.0 * s * (1.0 - s) * (1.0 - c)).max(0.0);
    Quaternion::new(1.0 + s * (c - 1.0), 0.0, -s * sn, -radicand.sqrt())
}

/// Ollie to double kickflip.
pub fn contract_double_kickflip() -> Homotopy {
    Homotopy::new(
        "contract-k2",
        |s, t| UnitQuaternion::renormalized(contraction_vector(s, t)),
        flip("O"),
        flip("K^2"),
    )
}

/// Kickflip to heelflip: the lift semicircle rotated about the k axis.
pub fn kick_to_heel() -> Homotopy {
    Homotopy::new(
        "kick-heel",
        |s, t| {
            let (st, ct) = (PI * t).sin_cos();
            let (ss, cs) = (PI * s).sin_cos();
            unit(ct, 0.0, -st * cs, -st * ss)
        },
        flip("K"),
        flip("K^-1"),
    )
}

fn kick_to_360_lift(s: f64, t: f64) -> UnitQuaternion {
    let (st, ct) = (PI * t).sin_cos();
    let (ss, cs) = (FRAC_PI_2 * s).sin_cos();
    unit(ct, 0.0, -st * cs, -st * ss)
}

/// Kickflip to 360 shove-it: the rotation axis moves from −j to −k.
pub fn kick_to_360shuv() -> Homotopy {
    Homotopy::new("kick-s2", kick_to_360_lift, flip("K"), flip("S^2"))
}

/// Varial kickflip to 540 shove-it: the previous homotopy left-multiplied
/// by the shove-it.
pub fn varial_to_540() -> Homotopy {
    Homotopy::new(
        "varial-s3",
        |s, t| sigma_pow(1, t) * kick_to_360_lift(s, t),
        flip("S * K"),
        flip("S^3"),
    )
}

fn sigma_pow(n: i32, t: f64) -> UnitQuaternion {
    let (s, c) = (n as f64 * FRAC_PI_2 * t).sin_cos();
    unit(c, 0.0, 0.0, -s)
}

fn shoveit_power(f: &Flip) -> Option<i32> {
    match f.expr()? {
        TrickExpr::Primitive(Primitive::O) => Some(0),
        TrickExpr::Primitive(Primitive::S) => Some(1),
        TrickExpr::Power(e, n) if **e == TrickExpr::Primitive(Primitive::S) => Some(*n),
        _ => None,
    }
}

/// Deforms `f2 # f1` into the pointwise product `f2·f1` by spreading each
/// factor over the whole interval. Both flips must be powers of the shove-it.
///
/// `F(s, t) = f2(2t/(s+1))` up to `t = (s+1)/2`, then `f2(1)`;
/// `G(s, t) = f1((2t+s−1)/(s+1))` from `t = (1−s)/2`, before that `I₃`;
/// the homotopy is `F·G`.
pub fn spread_concat(f2: &Flip, f1: &Flip) -> Result<Homotopy> {
    let (Some(m), Some(n)) = (shoveit_power(f2), shoveit_power(f1)) else {
        return Err(Error::UnsupportedPair);
    };
    let lift = move |s: f64, t: f64| {
        let first = if t <= (s + 1.0) / 2.0 {
            sigma_pow(m, (2.0 * t / (s + 1.0)).min(1.0))
        } else {
            sigma_pow(m, 1.0)
        };
        let second = if t >= (1.0 - s) / 2.0 {
            sigma_pow(n, ((2.0 * t + s - 1.0) / (s + 1.0)).clamp(0.0, 1.0))
        } else {
            UnitQuaternion::IDENTITY
        };
        first * second
    };
    let target = Flip::from_expr(TrickExpr::power(TrickExpr::prim(Primitive::S), m + n))?;
    Ok(Homotopy::new(
        format!("spread({} # {})", f2.name(), f1.name()),
        lift,
        concat(f2, f1),
        target,
    ))
}

/// Looks up one of the named homotopies in [`NAMES`].
pub fn by_name(name: &str) -> Result<Homotopy> {
    match name {
        "contract-k2" => Ok(contract_double_kickflip()),
        "kick-heel" => Ok(kick_to_heel()),
        "kick-s2" => Ok(kick_to_360shuv()),
        "varial-s3" => Ok(varial_to_540()),
        "spread-s2-s" => Ok(spread_concat(&flip("S^2"), &flip("S"))?.with_name("spread-s2-s")),
        other => Err(Error::InvalidArgument(format!(
            "unknown homotopy `{other}` (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

impl Homotopy {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Result of [`Homotopy::verify`]. Deviations are entrywise max norms.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub grid_s: usize,
    pub grid_t: usize,
    pub tol: f64,
    /// `max_t ‖H(0,t) − source(t)‖`, when a source is known.
    pub source_deviation: Option<f64>,
    /// `max_t ‖H(1,t) − target(t)‖`, when a target is known.
    pub target_deviation: Option<f64>,
    /// `max_s ‖H(s,0) − I₃‖`.
    pub basepoint_deviation: f64,
    /// `max_s ‖H(s,1) − H(0,1)‖`.
    pub landing_deviation: f64,
    /// Landing configuration of `H(0,1)`, if it is one.
    pub landing: Option<LandingConfig>,
    /// Largest step between neighbouring grid cells.
    pub continuity_modulus: f64,
    /// `4π / min(grid_s, grid_t)`.
    pub continuity_bound: f64,
    /// False when some step above the bound did not shrink below it under
    /// local bisection (or no map was available to bisect).
    pub continuity_ok: bool,
}

impl VerificationReport {
    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.source_deviation.is_some_and(|d| !within(d, self.tol)) {
            out.push("endpoint-0");
        }
        if self.target_deviation.is_some_and(|d| !within(d, self.tol)) {
            out.push("endpoint-1");
        }
        if !within(self.basepoint_deviation, self.tol) {
            out.push("basepoint");
        }
        if !within(self.landing_deviation, self.tol) || self.landing.is_none() {
            out.push("landing");
        }
        if !self.continuity_ok {
            out.push("continuity");
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

// NaN deviations fail.
fn within(d: f64, tol: f64) -> bool {
    d <= tol
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |d: Option<f64>| d.map_or("n/a".to_string(), |d| format!("{d:.3e}"));
        writeln!(f, "grid {}x{}, tol {:e}", self.grid_s, self.grid_t, self.tol)?;
        writeln!(f, "  endpoint-0   {}", opt(self.source_deviation))?;
        writeln!(f, "  endpoint-1   {}", opt(self.target_deviation))?;
        writeln!(f, "  basepoint    {:.3e}", self.basepoint_deviation)?;
        writeln!(
            f,
            "  landing      {:.3e} ({})",
            self.landing_deviation,
            self.landing.map_or("none", |l| l.tag())
        )?;
        writeln!(
            f,
            "  continuity   {:.3e} (bound {:.3e}, {})",
            self.continuity_modulus,
            self.continuity_bound,
            if self.continuity_ok { "ok" } else { "failed" }
        )?;
        match self.failures().as_slice() {
            [] => write!(f, "PASS"),
            failed => write!(f, "FAIL: {}", failed.join(", ")),
        }
    }
}

/// Sampled homotopy values, `values[i][j] = H(s_grid[i], t_grid[j])`.
pub struct GridData<'a> {
    pub s_grid: &'a [f64],
    pub t_grid: &'a [f64],
    pub values: &'a [Vec<Rotation>],
}

/// Grid form of the verifier. `map`, when given, is used to bisect steps that
/// exceed the continuity bound; without it such steps fail outright.
pub fn verify_grid(
    grid: &GridData<'_>,
    source: Option<&Flip>,
    target: Option<&Flip>,
    map: Option<&dyn Fn(f64, f64) -> Rotation>,
    tol: f64,
) -> VerificationReport {
    let (ss, ts, v) = (grid.s_grid, grid.t_grid, grid.values);
    let (ns, nt) = (ss.len(), ts.len());
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0_f64, |a, b| a.max(b));

    let source_deviation = source.map(|f| {
        max(&mut ts.iter().enumerate().map(|(j, &t)| v[0][j].max_abs_diff(&f.at(t))))
    });
    let target_deviation = target.map(|f| {
        max(&mut ts.iter().enumerate().map(|(j, &t)| v[ns - 1][j].max_abs_diff(&f.at(t))))
    });
    let basepoint_deviation = max(&mut v.iter().map(|row| row[0].max_abs_diff(&Rotation::IDENTITY)));
    let landing_ref = v[0][nt - 1];
    let landing_deviation = max(&mut v.iter().map(|row| row[nt - 1].max_abs_diff(&landing_ref)));
    let landing = landing_ref.landing(tol.max(1e-12));

    let bound = 4.0 * PI / ns.min(nt) as f64;
    let mut modulus = 0.0_f64;
    let mut continuity_ok = true;
    let mut check = |a: (f64, f64), ra: &Rotation, b: (f64, f64), rb: &Rotation| {
        let step = ra.max_abs_diff(rb);
        modulus = modulus.max(step);
        if step > bound {
            let ok = match map {
                Some(m) => refines(m, a, *ra, b, *rb, bound, 0),
                None => false,
            };
            continuity_ok &= ok;
        }
    };
    for i in 0..ns {
        for j in 0..nt {
            if i + 1 < ns {
                check((ss[i], ts[j]), &v[i][j], (ss[i + 1], ts[j]), &v[i + 1][j]);
            }
            if j + 1 < nt {
                check((ss[i], ts[j]), &v[i][j], (ss[i], ts[j + 1]), &v[i][j + 1]);
            }
        }
    }

    VerificationReport {
        grid_s: ns,
        grid_t: nt,
        tol,
        source_deviation,
        target_deviation,
        basepoint_deviation,
        landing_deviation,
        landing,
        continuity_modulus: modulus,
        continuity_bound: bound,
        continuity_ok,
    }
}

// A continuous map's steps shrink under bisection; a jump does not.
fn refines(
    map: &dyn Fn(f64, f64) -> Rotation,
    a: (f64, f64),
    ra: Rotation,
    b: (f64, f64),
    rb: Rotation,
    bound: f64,
    depth: u32,
) -> bool {
    if ra.max_abs_diff(&rb) <= bound {
        return true;
    }
    if depth >= CONTINUITY_REFINE_DEPTH {
        return false;
    }
    let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let rm = map(mid.0, mid.1);
    refines(map, a, ra, mid, rm, bound, depth + 1) && refines(map, mid, rm, b, rb, bound, depth + 1)
}
