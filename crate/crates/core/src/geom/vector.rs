use std::fmt;
use std::ops::Neg;

use nalgebra::{Unit, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point on the unit sphere.
///
/// Every constructor normalizes, so `‖v‖ = 1` to within a few ulps.
#[derive(Clone, Copy, PartialEq)]
pub struct UnitVector(Vector3<f64>);

/// Vectors shorter than this are refused by the normalizing constructors.
const MIN_NORM: f64 = 1e-300;

impl UnitVector {
    /// Normalize `(x, y, z)`; `None` for the zero vector or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Option<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Option<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < MIN_NORM {
            None
        } else {
            Some(Self(v / norm))
        }
    }

    /// Like [`UnitVector::new`], but components that already have unit norm
    /// to rounding are kept bit-for-bit, so stored vectors read back exactly.
    pub fn from_stored(x: f64, y: f64, z: f64) -> Option<Self> {
        let v = Vector3::new(x, y, z);
        if (v.norm_squared() - 1.0).abs() <= 4.0 * f64::EPSILON {
            Some(Self(v))
        } else {
            Self::from_vector(v)
        }
    }

    /// Wrap a vector that is already unit length up to rounding.
    pub(crate) fn renormalized(v: Vector3<f64>) -> Self {
        Self(v / v.norm())
    }

    pub const fn x_axis() -> Self {
        Self(Vector3::new(1.0, 0.0, 0.0))
    }

    pub const fn y_axis() -> Self {
        Self(Vector3::new(0.0, 1.0, 0.0))
    }

    pub const fn z_axis() -> Self {
        Self(Vector3::new(0.0, 0.0, 1.0))
    }

    /// Point at latitude `lat` and longitude `lon`, both in radians.
    pub fn from_lat_lon(lat: f64, lon: f64) -> Self {
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        Self::renormalized(Vector3::new(clat * clon, clat * slon, slat))
    }

    /// Uniformly distributed point on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            if let Some(u) = Self::from_vector(v) {
                return u;
            }
        }
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn cross(&self, other: &Self) -> Vector3<f64> {
        self.0.cross(&other.0)
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }

    /// Latitude in radians.
    pub fn latitude(&self) -> f64 {
        self.0.z.atan2(self.0.xy().norm())
    }

    /// Longitude in radians, in (-pi, pi].
    pub fn longitude(&self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    /// Right-handed rotation about `axis` by `angle` radians.
    pub fn rotated(&self, axis: &UnitVector, angle: f64) -> Self {
        let q = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(axis.0), angle);
        Self::renormalized(q * self.0)
    }

    /// Great-circle distance to `other`, in [0, pi].
    pub fn distance(&self, other: &Self) -> f64 {
        spherical_distance(self, other)
    }
}

/// Angle between two points on the unit sphere, computed as
/// `atan2(‖p × q‖, p · q)` so it stays accurate near 0 and pi.
pub fn spherical_distance(p: &UnitVector, q: &UnitVector) -> f64 {
    p.cross(q).norm().atan2(p.dot(q))
}

/// Normalized convex combination along the short arc `a → b` at fraction `s`.
pub fn slerp(a: &UnitVector, b: &UnitVector, s: f64) -> UnitVector {
    let omega = spherical_distance(a, b);
    if omega < 1e-15 {
        return *a;
    }
    let so = omega.sin();
    let wa = ((1.0 - s) * omega).sin() / so;
    let wb = (s * omega).sin() / so;
    UnitVector::renormalized(a.0 * wa + b.0 * wb)
}

impl Neg for UnitVector {
    type Output = UnitVector;

    fn neg(self) -> UnitVector {
        self.antipode()
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.0.x, self.0.y, self.0.z)
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        UnitVector::from_stored(x, y, z).ok_or_else(|| serde::de::Error::custom("zero or non-finite vector"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn distance_examples() {
        let x = UnitVector::x_axis();
        let y = UnitVector::y_axis();
        assert_abs_diff_eq!(spherical_distance(&x, &y), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(spherical_distance(&x, &x), 0.0);
        assert_abs_diff_eq!(spherical_distance(&x, &-x), PI, epsilon = 1e-15);
    }

    #[test]
    fn distance_is_accurate_near_zero() {
        let a = UnitVector::from_lat_lon(0.0, 0.0);
        let b = UnitVector::from_lat_lon(0.0, 1e-9);
        assert_abs_diff_eq!(a.distance(&b), 1e-9, epsilon = 1e-20);
    }

    #[test]
    fn constructors_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let u = UnitVector::random(&mut rng);
            assert!((u.as_vector().norm() - 1.0).abs() < 1e-12);
        }
        let v = UnitVector::new(3.0, 4.0, 12.0).unwrap();
        assert!((v.as_vector().norm() - 1.0).abs() < 1e-12);
        assert!(UnitVector::new(0.0, 0.0, 0.0).is_none());
        assert!(UnitVector::new(f64::NAN, 0.0, 1.0).is_none());
    }

    #[test]
    fn triangle_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (a, b, c) = (
                UnitVector::random(&mut rng),
                UnitVector::random(&mut rng),
                UnitVector::random(&mut rng),
            );
            assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c) + 1e-14);
            assert_eq!(a.distance(&b), b.distance(&a));
        }
    }

    #[test]
    fn rotation_about_z() {
        let p = UnitVector::x_axis().rotated(&UnitVector::z_axis(), FRAC_PI_2);
        assert_abs_diff_eq!(p.y(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lat_lon_round_trip() {
        let p = UnitVector::from_lat_lon(0.3, -2.0);
        assert_abs_diff_eq!(p.latitude(), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(p.longitude(), -2.0, epsilon = 1e-14);
    }
}
