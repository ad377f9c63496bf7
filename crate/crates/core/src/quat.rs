//! Quaternion arithmetic and the conjugation action on imaginary quaternions.
//!
//! A unit quaternion `q` acts on 3-vectors (identified with imaginary
//! quaternions) by `v ↦ q v q⁻¹`. This action is a rotation, and the map
//! [`rho`] taking `q` to that rotation matrix is the 2-to-1 covering
//! `S³ → SO(3)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::so3::Rotation;

/// Tolerance for accepting a quaternion as unit before renormalizing it.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Norm below which a quaternion is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

/// A quaternion `q0 + q1 i + q2 j + q3 k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub const fn from_real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    /// Builds `r + v` from a real part and a vector part.
    pub fn from_parts(r: f64, v: ImaginaryQuaternion) -> Self {
        Self::new(r, v.v1, v.v2, v.v3)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Scalar part.
    pub fn re(&self) -> f64 {
        self.q0
    }

    /// Vector part.
    pub fn im(&self) -> ImaginaryQuaternion {
        ImaginaryQuaternion::new(self.q1, self.q2, self.q3)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn norm_squared(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.q0, s * self.q1, s * self.q2, s * self.q3)
    }

    /// Euclidean inner product of the underlying 4-vectors.
    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.q0 * other.q0 + self.q1 * other.q1 + self.q2 * other.q2 + self.q3 * other.q3
    }

    /// `q⁻¹ = q̄ / |q|²`.
    pub fn inverse(&self) -> Result<Self> {
        let n2 = self.norm_squared();
        if n2.sqrt() <= ZERO_NORM {
            return Err(Error::ZeroQuaternion { norm: n2.sqrt() });
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Euclidean distance in `R⁴`.
    pub fn distance(&self, other: &Quaternion) -> f64 {
        (*self - *other).norm()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Quaternion) -> f64 {
        let d = *self - *other;
        d.to_array().iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 - o.q0, self.q1 - o.q1, self.q2 - o.q2, self.q3 - o.q3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (o.q0, o.q1, o.q2, o.q3);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.q0, self.q1, self.q2, self.q3)
    }
}

/// Hamilton product as a free function.
pub fn mul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn conj(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn inverse(q: Quaternion) -> Result<Quaternion> {
    q.inverse()
}

/// A quaternion on the unit 3-sphere.
///
/// Construction accepts inputs whose squared norm is within
/// [`UNIT_TOLERANCE`] of one and renormalizes them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::ONE);
    pub const I: UnitQuaternion = UnitQuaternion(Quaternion::I);
    pub const J: UnitQuaternion = UnitQuaternion(Quaternion::J);
    pub const K: UnitQuaternion = UnitQuaternion(Quaternion::K);

    pub fn new(q: Quaternion) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = q.norm_squared() - 1.0;
        if deviation.abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit { deviation });
        }
        Ok(Self(q.scale(1.0 / q.norm())))
    }

    /// Normalizes any nonzero quaternion onto the sphere.
    pub fn normalize(q: Quaternion) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = q.norm();
        if n <= ZERO_NORM {
            return Err(Error::ZeroQuaternion { norm: n });
        }
        Ok(Self(q.scale(1.0 / n)))
    }

    pub fn from_components(q0: f64, q1: f64, q2: f64, q3: f64) -> Result<Self> {
        Self::new(Quaternion::new(q0, q1, q2, q3))
    }

    /// Wraps a quaternion known to be unit up to rounding.
    pub(crate) fn renormalized(q: Quaternion) -> Self {
        Self(q.scale(1.0 / q.norm()))
    }

    pub fn quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn to_array(&self) -> [f64; 4] {
        self.0.to_array()
    }

    /// For unit quaternions the inverse is the conjugate.
    pub fn inverse(&self) -> Self {
        Self(self.0.conj())
    }

    pub fn conj(&self) -> Self {
        self.inverse()
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Quaternion::ONE;
        for _ in 0..n.unsigned_abs() {
            acc = acc * base.0;
        }
        Self::renormalized(acc)
    }

    pub fn distance(&self, other: &UnitQuaternion) -> f64 {
        self.0.distance(&other.0)
    }

    pub fn to_rotation(&self) -> Rotation {
        rho(self)
    }
}

impl std::ops::Deref for UnitQuaternion {
    type Target = Quaternion;
    fn deref(&self) -> &Quaternion {
        &self.0
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, o: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion::renormalized(self.0 * o.0)
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }
}

impl From<UnitQuaternion> for Quaternion {
    fn from(q: UnitQuaternion) -> Quaternion {
        q.0
    }
}

/// A purely imaginary quaternion `v1 i + v2 j + v3 k`, identified with a 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryQuaternion {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

/// 3-vectors and imaginary quaternions are the same thing here.
pub type Vec3 = ImaginaryQuaternion;

impl ImaginaryQuaternion {
    pub const I: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const J: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const K: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Self { v1, v2, v3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.v1 * o.v1 + self.v2 * o.v2 + self.v3 * o.v3
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.v2 * o.v3 - self.v3 * o.v2,
            self.v3 * o.v1 - self.v1 * o.v3,
            self.v1 * o.v2 - self.v2 * o.v1,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(s * self.v1, s * self.v2, s * self.v3)
    }

    pub fn quaternion(&self) -> Quaternion {
        Quaternion::new(0.0, self.v1, self.v2, self.v3)
    }

    pub fn max_abs_diff(&self, o: &Vec3) -> f64 {
        (self.v1 - o.v1)
            .abs()
            .max((self.v2 - o.v2).abs())
            .max((self.v3 - o.v3).abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.v1 + o.v1, self.v2 + o.v2, self.v3 + o.v3)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.v1 - o.v1, self.v2 - o.v2, self.v3 - o.v3)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

/// The rotation `v ↦ q v q⁻¹` as a 3×3 matrix.
pub fn rho(q: &UnitQuaternion) -> Rotation {
    let (q0, q1, q2, q3) = (q.q0, q.q1, q.q2, q.q3);
    Rotation::from_raw([
        [
            1.0 - 2.0 * (q2 * q2 + q3 * q3),
            2.0 * (q1 * q2 - q3 * q0),
            2.0 * (q1 * q3 + q0 * q2),
        ],
        [
            2.0 * (q1 * q2 + q3 * q0),
            1.0 - 2.0 * (q1 * q1 + q3 * q3),
            2.0 * (q2 * q3 - q1 * q0),
        ],
        [
            2.0 * (q1 * q3 - q2 * q0),
            2.0 * (q2 * q3 + q0 * q1),
            1.0 - 2.0 * (q1 * q1 + q2 * q2),
        ],
    ])
}

/// `cos θ + sin θ u`. Note `theta` is the half-angle: the rotation
/// `rho(result)` turns by `2θ` about `u`, right-handed.
pub fn from_axis_angle(u: Vec3, theta: f64) -> Result<UnitQuaternion> {
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    let (s, c) = theta.sin_cos();
    Ok(UnitQuaternion::renormalized(Quaternion::from_parts(
        c,
        u.scale(s),
    )))
}

/// Right-handed rotation by the full `angle` about `u`.
pub fn rotation_about(u: Vec3, angle: f64) -> Result<UnitQuaternion> {
    from_axis_angle(u, angle / 2.0)
}

/// `q v q⁻¹`.
pub fn rotate_vector(q: &UnitQuaternion, v: Vec3) -> Vec3 {
    (q.quaternion() * v.quaternion() * q.quaternion().conj()).im()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn approx_q(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        a.max_abs_diff(&b) <= tol
    }

    // 2×2 complex matrix model of the quaternions, independent of the
    // Hamilton product formula above: q ↦ [[a+bi, c+di], [-c+di, a-bi]].
    type C = (f64, f64);
    fn cmul(x: C, y: C) -> C {
        (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
    }
    fn cadd(x: C, y: C) -> C {
        (x.0 + y.0, x.1 + y.1)
    }
    fn to_su2(q: Quaternion) -> [[C; 2]; 2] {
        [
            [(q.q0, q.q1), (q.q2, q.q3)],
            [(-q.q2, q.q3), (q.q0, -q.q1)],
        ]
    }
    fn from_su2(m: [[C; 2]; 2]) -> Quaternion {
        Quaternion::new(m[0][0].0, m[0][0].1, m[0][1].0, m[0][1].1)
    }
    fn su2_mul(a: [[C; 2]; 2], b: [[C; 2]; 2]) -> [[C; 2]; 2] {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = cadd(cmul(a[r][0], b[0][c]), cmul(a[r][1], b[1][c]));
            }
        }
        out
    }

    #[test]
    fn basis_products() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
        assert_eq!(
            Quaternion::I * Quaternion::J * Quaternion::K,
            -Quaternion::ONE
        );
        let q = Quaternion::new(0.3, -0.1, 2.0, 0.7);
        assert_eq!(Quaternion::ONE * q, q);
        // hardflip endpoint: i · (-j) = -k
        assert_eq!(mul(Quaternion::I, -Quaternion::J), -Quaternion::K);
    }

    #[test]
    fn conjugate_and_real_part() {
        assert_eq!(
            conj(Quaternion::new(1.0, 1.0, 0.0, 0.0)),
            Quaternion::new(1.0, -1.0, 0.0, 0.0)
        );
        assert_eq!(conj(Quaternion::K), -Quaternion::K);
        let q = Quaternion::new(0.3, 0.1, -0.2, 0.9);
        let re = (q + q.conj()).scale(0.5);
        assert!((re.q0 - 0.3).abs() < 1e-15);
        assert_eq!(re.im(), Vec3::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn inverses() {
        assert_eq!(inverse(Quaternion::K).unwrap(), -Quaternion::K);
        assert_eq!(
            inverse(Quaternion::from_real(2.0)).unwrap(),
            Quaternion::from_real(0.5)
        );
        let s = FRAC_PI_4.sin();
        let sigma_half = Quaternion::new(FRAC_PI_4.cos(), 0.0, 0.0, -s);
        let inv = inverse(sigma_half).unwrap();
        assert!(approx_q(
            inv,
            Quaternion::new(FRAC_PI_4.cos(), 0.0, 0.0, s),
            1e-15
        ));
        assert!(matches!(
            inverse(Quaternion::new(1e-13, 0.0, 0.0, 0.0)),
            Err(Error::ZeroQuaternion { .. })
        ));
    }

    #[test]
    fn unit_construction() {
        let q = UnitQuaternion::new(Quaternion::new(1.0 + 4e-10, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(q.norm(), 1.0);
        assert!(matches!(
            UnitQuaternion::new(Quaternion::new(1.1, 0.0, 0.0, 0.0)),
            Err(Error::NotUnit { .. })
        ));
        assert!(matches!(
            UnitQuaternion::new(Quaternion::new(f64::NAN, 0.0, 0.0, 0.0)),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&UnitQuaternion::IDENTITY), Rotation::IDENTITY);
        assert_eq!(rho(&UnitQuaternion::K), Rotation::REVERSED);
        let c = FRAC_PI_4.cos();
        let q = UnitQuaternion::from_components(c, 0.0, 0.0, -c).unwrap();
        // S(1/2) from the closed-form shove-it matrix
        let s_half = Rotation::from_raw([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(rho(&q).max_abs_diff(&s_half) < 1e-15);
    }

    #[test]
    fn axis_angle_examples() {
        let q = from_axis_angle(-Vec3::K, FRAC_PI_2).unwrap();
        assert!(approx_q(q.quaternion(), -Quaternion::K, 1e-16));
        assert!(rho(&q).max_abs_diff(&Rotation::REVERSED) < 1e-15);
        let u = Vec3::new(0.6, 0.0, 0.8);
        assert_eq!(from_axis_angle(u, 0.0).unwrap(), UnitQuaternion::IDENTITY);
        let q = from_axis_angle(-Vec3::J, FRAC_PI_2).unwrap();
        assert!(approx_q(q.quaternion(), -Quaternion::J, 1e-16));
        assert!(matches!(
            from_axis_angle(Vec3::new(1.0, 1.0, 0.0), 0.3),
            Err(Error::NonUnitAxis { .. })
        ));
        let half = rotation_about(Vec3::K, std::f64::consts::PI).unwrap();
        assert!(approx_q(half.quaternion(), Quaternion::K, 1e-16));
    }

    #[test]
    fn rotate_vector_examples() {
        let v = Vec3::new(0.2, -1.5, 3.0);
        assert!(rotate_vector(&UnitQuaternion::IDENTITY, v).max_abs_diff(&v) < 1e-15);
        assert!(rotate_vector(&UnitQuaternion::K, Vec3::I).max_abs_diff(&(-Vec3::I)) < 1e-15);
        let u = Vec3::new(2.0, -1.0, 2.0).scale(1.0 / 3.0);
        let q = from_axis_angle(u, 0.77).unwrap();
        assert!(rotate_vector(&q, u).max_abs_diff(&u) < 1e-15);
        // right-handed quarter turn about z sends x to y
        let q = rotation_about(Vec3::K, FRAC_PI_2).unwrap();
        assert!(rotate_vector(&q, Vec3::I).max_abs_diff(&Vec3::J) < 1e-15);
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_array)
    }

    fn unit() -> impl Strategy<Value = UnitQuaternion> {
        quat()
            .prop_filter("nonzero", |q| q.norm() > 1e-3)
            .prop_map(|q| UnitQuaternion::normalize(q).unwrap())
    }

    proptest! {
        #[test]
        fn hamilton_product_matches_matrix_model(p in quat(), q in quat()) {
            let oracle = from_su2(su2_mul(to_su2(p), to_su2(q)));
            prop_assert!(approx_q(p * q, oracle, 1e-12));
        }

        #[test]
        fn product_norm_is_multiplicative(p in quat(), q in quat()) {
            prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-12);
        }

        #[test]
        fn product_is_associative(p in quat(), q in quat(), r in quat()) {
            prop_assert!(approx_q((p * q) * r, p * (q * r), 1e-12));
        }

        #[test]
        fn conjugation_reverses_order(p in quat(), q in quat()) {
            prop_assert!(approx_q((p * q).conj(), q.conj() * p.conj(), 1e-12));
            prop_assert!(approx_q(q * q.conj(), Quaternion::from_real(q.norm_squared()), 1e-12));
        }

        #[test]
        fn inverse_is_two_sided(q in quat().prop_filter("nonzero", |q| q.norm() > 1e-2)) {
            let inv = q.inverse().unwrap();
            prop_assert!(approx_q(q * inv, Quaternion::ONE, 1e-12));
            prop_assert!(approx_q(inv * q, Quaternion::ONE, 1e-12));
        }

        #[test]
        fn rotate_vector_matches_matrix(q in unit(), v in prop::array::uniform3(-3.0f64..3.0)) {
            let v = Vec3::from_array(v);
            let by_conj = rotate_vector(&q, v);
            let by_matrix = rho(&q).apply(v);
            prop_assert!(by_conj.max_abs_diff(&by_matrix) < 1e-12);
            prop_assert!((by_conj.norm() - v.norm()).abs() < 1e-12);
        }

        #[test]
        fn rodrigues_formula(axis in prop::array::uniform3(-1.0f64..1.0), theta in -4.0f64..4.0,
                             v in prop::array::uniform3(-2.0f64..2.0)) {
            let axis = Vec3::from_array(axis);
            prop_assume!(axis.norm() > 1e-2);
            let u = axis.scale(1.0 / axis.norm());
            let v = Vec3::from_array(v);
            let q = from_axis_angle(u, theta).unwrap();
            let par = u.scale(v.dot(&u));
            let perp = v - par;
            let expected = perp.scale((2.0 * theta).cos()) + u.cross(&v).scale((2.0 * theta).sin()) + par;
            prop_assert!(rotate_vector(&q, v).max_abs_diff(&expected) < 1e-12);
        }

        #[test]
        fn rho_is_even(q in unit()) {
            prop_assert_eq!(rho(&q), rho(&-q));
        }
    }
}
