//! Rotation matrices and the two-valued inverse of [`rho`](crate::quat::rho).

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::quat::{Quaternion, UnitQuaternion, Vec3};

/// Tolerance used when accepting an arbitrary matrix as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Distance difference below which the two preimages count as equidistant.
pub const PREIMAGE_TIE: f64 = 1e-12;

/// A 3×3 special orthogonal matrix, stored row-major. Its columns are the
/// board-fixed frame vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// The reversed landing `diag(-1, -1, 1)`: nose and tail swapped.
    pub const REVERSED: Rotation = Rotation {
        m: [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Validates `m` against the orthogonality and determinant conditions.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        if !m.iter().flatten().all(|x| x.is_finite()) || !is_special_orthogonal(&m, ROTATION_TOLERANCE) {
            return Err(Error::NotARotation {
                orthogonality: orthogonality_error(&m),
                det: det(&m),
            });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix that is a rotation by construction.
    pub(crate) const fn from_raw(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[row][col]
    }

    /// Row-major flattening.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_row_major(a: [f64; 9]) -> Result<Self> {
        Self::from_matrix([[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::from_raw([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Integer power; negative exponents use the inverse.
    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        (0..n.unsigned_abs()).fold(Rotation::IDENTITY, |acc, _| acc * base)
    }

    pub fn det(&self) -> f64 {
        det(&self.m)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.v1 + m[0][1] * v.v2 + m[0][2] * v.v3,
            m[1][0] * v.v1 + m[1][1] * v.v2 + m[1][2] * v.v3,
            m[2][0] * v.v1 + m[2][1] * v.v2 + m[2][2] * v.v3,
        )
    }

    /// `‖self − other‖∞` taken entrywise.
    pub fn max_abs_diff(&self, other: &Rotation) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Nearest landing configuration, if within `tol`.
    pub fn landing(&self, tol: f64) -> Option<LandingConfig> {
        if self.max_abs_diff(&Rotation::IDENTITY) <= tol {
            Some(LandingConfig::Identity)
        } else if self.max_abs_diff(&Rotation::REVERSED) <= tol {
            Some(LandingConfig::Reversed)
        } else {
            None
        }
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, o: Rotation) -> Rotation {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[r][k] * o.m[k][c]).sum();
            }
        }
        Rotation::from_raw(out)
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.m.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row
                .iter()
                .map(|x| {
                    // print -0 as 0
                    let x = if x.abs() < 5e-13 { 0.0 } else { *x };
                    format!("{x:>16.12}")
                })
                .collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// The two allowed landing configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LandingConfig {
    Identity,
    Reversed,
}

impl LandingConfig {
    pub fn rotation(self) -> Rotation {
        match self {
            LandingConfig::Identity => Rotation::IDENTITY,
            LandingConfig::Reversed => Rotation::REVERSED,
        }
    }

    /// Short tag used in exported files: `"I"` or `"O"`.
    pub fn tag(self) -> &'static str {
        match self {
            LandingConfig::Identity => "I",
            LandingConfig::Reversed => "O",
        }
    }
}

fn det(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn orthogonality_error(m: &[[f64; 3]; 3]) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..3 {
        for c in 0..3 {
            let dot: f64 = (0..3).map(|k| m[k][r] * m[k][c]).sum();
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// True when `‖mᵀm − I‖∞ ≤ tol` and `|det m − 1| ≤ tol`.
pub fn is_special_orthogonal(m: &[[f64; 3]; 3], tol: f64) -> bool {
    orthogonality_error(m) <= tol && (det(m) - 1.0).abs() <= tol
}

/// Canonical preimage of `r` under `rho`.
///
/// Uses the largest of `1 + tr`, `1 + 2mᵢᵢ − tr` as the pivot so that the
/// division is well conditioned at every angle, including half turns. The sign
/// is fixed so that `q0 > 0`, or when `q0` vanishes the first nonzero vector
/// component is positive.
pub fn to_quaternion(r: &Rotation) -> Result<UnitQuaternion> {
    let m = r.matrix();
    if !is_special_orthogonal(&m, ROTATION_TOLERANCE) {
        return Err(Error::NotARotation {
            orthogonality: orthogonality_error(&m),
            det: det(&m),
        });
    }
    let tr = m[0][0] + m[1][1] + m[2][2];
    let pivots = [
        1.0 + tr,
        1.0 + 2.0 * m[0][0] - tr,
        1.0 + 2.0 * m[1][1] - tr,
        1.0 + 2.0 * m[2][2] - tr,
    ];
    let (best, &p) = pivots
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("four candidates");
    // p = 4 x², x the pivot component
    let x = p.max(0.0).sqrt() / 2.0;
    let f = 1.0 / (4.0 * x);
    let q = match best {
        0 => Quaternion::new(
            x,
            (m[2][1] - m[1][2]) * f,
            (m[0][2] - m[2][0]) * f,
            (m[1][0] - m[0][1]) * f,
        ),
        1 => Quaternion::new(
            (m[2][1] - m[1][2]) * f,
            x,
            (m[0][1] + m[1][0]) * f,
            (m[0][2] + m[2][0]) * f,
        ),
        2 => Quaternion::new(
            (m[0][2] - m[2][0]) * f,
            (m[0][1] + m[1][0]) * f,
            x,
            (m[1][2] + m[2][1]) * f,
        ),
        _ => Quaternion::new(
            (m[1][0] - m[0][1]) * f,
            (m[0][2] + m[2][0]) * f,
            (m[1][2] + m[2][1]) * f,
            x,
        ),
    };
    let q = UnitQuaternion::normalize(q)?;
    Ok(canonical_sign(q))
}

fn canonical_sign(q: UnitQuaternion) -> UnitQuaternion {
    let c = q.to_array();
    let leading = if c[0].abs() > 1e-12 {
        c[0]
    } else {
        c[1..].iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0)
    };
    if leading < 0.0 {
        -q
    } else {
        q
    }
}

/// The preimage of `r` (either `q` or `−q`) closest to `anchor` in `R⁴`.
pub fn nearest_preimage(r: &Rotation, anchor: &UnitQuaternion) -> Result<UnitQuaternion> {
    let q = to_quaternion(r)?;
    let plus = q.distance(anchor);
    let minus = (-q).distance(anchor);
    if (plus - minus).abs() < PREIMAGE_TIE {
        return Err(Error::AmbiguousPreimage);
    }
    Ok(if plus < minus { q } else { -q })
}

/// Sign selection without the tie check, for callers that already know
/// `anchor` is close to one of the preimages.
pub(crate) fn closer_preimage(q: UnitQuaternion, anchor: &UnitQuaternion) -> UnitQuaternion {
    if q.quaternion().dot(&anchor.quaternion()) >= 0.0 {
        q
    } else {
        -q
    }
}
