//! Short Weierstrass curve arithmetic over prime fields.
//!
//! Two parameter profiles ship with the crate: a 17-element toy curve small
//! enough to enumerate by hand, used throughout the tests and the built-in
//! net models, and the standard 256-bit prime curve. Arithmetic uses
//! arbitrary-precision integers and is not constant-time; the crate is an
//! analysis tool, not a production signer.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve discriminant is zero (singular curve)")]
    SingularCurve,
    #[error("base point does not lie on the curve")]
    GeneratorOffCurve,
    #[error("base point order check failed: n*G is not the identity")]
    BadGeneratorOrder,
    #[error("scalar out of range [1, n-1]")]
    InvalidScalar,
    #[error("point does not lie on the curve")]
    PointOffCurve,
}

/// A curve point in affine coordinates, or the identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

impl Point {
    pub fn affine(x: u64, y: u64) -> Self {
        Point::Affine {
            x: BigUint::from(x),
            y: BigUint::from(y),
        }
    }

    pub fn x(&self) -> Option<&BigUint> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(x),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// Domain parameters: field prime, curve coefficients, base point, its order
/// and the cofactor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainParams {
    pub name: &'static str,
    pub p: BigUint,
    pub a: BigUint,
    pub b: BigUint,
    pub gx: BigUint,
    pub gy: BigUint,
    pub n: BigUint,
    pub h: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveProfile {
    /// y^2 = x^3 + 2x + 2 over F_17 with base point (5, 1) of order 19.
    Toy,
    /// The 256-bit standard prime curve.
    Standard,
}

/// Returns the validated domain parameters for `profile`. Validation checks
/// the discriminant, base-point membership and the base-point order.
pub fn generate_domain_parameters(profile: CurveProfile) -> Result<DomainParams, CurveError> {
    let params = match profile {
        CurveProfile::Toy => DomainParams {
            name: "toy",
            p: BigUint::from(17u32),
            a: BigUint::from(2u32),
            b: BigUint::from(2u32),
            gx: BigUint::from(5u32),
            gy: BigUint::from(1u32),
            n: BigUint::from(19u32),
            h: 1,
        },
        CurveProfile::Standard => DomainParams {
            name: "p256",
            p: parse_hex("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff"),
            a: parse_hex("ffffffff00000001000000000000000000000000fffffffffffffffffffffffc"),
            b: parse_hex("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b"),
            gx: parse_hex("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
            gy: parse_hex("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5"),
            n: parse_hex("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551"),
            h: 1,
        },
    };
    params.validate()?;
    Ok(params)
}

fn parse_hex(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant")
}

impl DomainParams {
    pub fn generator(&self) -> Point {
        Point::Affine {
            x: self.gx.clone(),
            y: self.gy.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        // non-singular: 4a^3 + 27b^2 != 0 (mod p)
        let four_a3 = (BigUint::from(4u32) * self.a.modpow(&BigUint::from(3u32), &self.p)) % &self.p;
        let twenty_seven_b2 =
            (BigUint::from(27u32) * self.b.modpow(&BigUint::from(2u32), &self.p)) % &self.p;
        if (four_a3 + twenty_seven_b2) % &self.p == BigUint::zero() {
            return Err(CurveError::SingularCurve);
        }
        let g = self.generator();
        if !self.is_on_curve(&g) {
            return Err(CurveError::GeneratorOffCurve);
        }
        if self.scalar_mul(&self.n, &g) != Point::Infinity {
            return Err(CurveError::BadGeneratorOrder);
        }
        Ok(())
    }

    pub fn is_on_curve(&self, point: &Point) -> bool {
        match point {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                if x >= &self.p || y >= &self.p {
                    return false;
                }
                let lhs = (y * y) % &self.p;
                let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, point: &Point) -> Point {
        match point {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x: x.clone(),
                y: if y.is_zero() {
                    BigUint::zero()
                } else {
                    &self.p - y
                },
            },
        }
    }

    pub fn add(&self, lhs: &Point, rhs: &Point) -> Point {
        let (x1, y1) = match lhs {
            Point::Infinity => return rhs.clone(),
            Point::Affine { x, y } => (x, y),
        };
        let (x2, y2) = match rhs {
            Point::Infinity => return lhs.clone(),
            Point::Affine { x, y } => (x, y),
        };
        let p = &self.p;

        let lambda = if x1 == x2 {
            if (y1 + y2) % p == BigUint::zero() {
                return Point::Infinity;
            }
            // tangent slope (3x^2 + a) / 2y
            let num = (BigUint::from(3u32) * x1 * x1 + &self.a) % p;
            let den = (BigUint::from(2u32) * y1) % p;
            (num * mod_inv(&den, p).expect("p prime, y nonzero")) % p
        } else {
            // chord slope (y2 - y1) / (x2 - x1)
            let num = (p + y2 - y1) % p;
            let den = (p + x2 - x1) % p;
            (num * mod_inv(&den, p).expect("p prime, x2 != x1")) % p
        };

        let x3 = (&lambda * &lambda + (p + p) - x1 - x2) % p;
        let y3 = (&lambda * ((p + x1) - &x3) + p - y1) % p;
        Point::Affine { x: x3, y: y3 }
    }

    /// Double-and-add scalar multiplication, MSB first over Jacobian
    /// projective coordinates so the whole walk costs a single field
    /// inversion. Not constant-time.
    pub fn scalar_mul(&self, k: &BigUint, point: &Point) -> Point {
        let (x, y) = match point {
            Point::Infinity => return Point::Infinity,
            Point::Affine { x, y } => (x, y),
        };
        if k.is_zero() {
            return Point::Infinity;
        }
        let mut acc = Jac::identity();
        for i in (0..k.bits()).rev() {
            acc = self.jac_double(&acc);
            if k.bit(i) {
                acc = self.jac_add_affine(&acc, x, y);
            }
        }
        self.jac_to_affine(&acc)
    }

    fn jac_double(&self, pt: &Jac) -> Jac {
        if pt.z.is_zero() || pt.y.is_zero() {
            return Jac::identity();
        }
        let p = &self.p;
        let y2 = (&pt.y * &pt.y) % p;
        let s = (BigUint::from(4u32) * &pt.x * &y2) % p;
        let z2 = (&pt.z * &pt.z) % p;
        let z4 = (&z2 * &z2) % p;
        let m = (BigUint::from(3u32) * &pt.x * &pt.x + &self.a * z4) % p;
        let two_s = (&s + &s) % p;
        let x3 = ((&m * &m) % p + p - two_s) % p;
        let eight_y4 = (BigUint::from(8u32) * ((&y2 * &y2) % p)) % p;
        let y3 = ((&m * ((&s + p - &x3) % p)) % p + p - eight_y4) % p;
        let z3 = (BigUint::from(2u32) * &pt.y * &pt.z) % p;
        Jac { x: x3, y: y3, z: z3 }
    }

    /// Mixed addition of a Jacobian point and an affine point with
    /// coordinates already reduced modulo p.
    fn jac_add_affine(&self, lhs: &Jac, x2: &BigUint, y2: &BigUint) -> Jac {
        if lhs.z.is_zero() {
            return Jac {
                x: x2.clone(),
                y: y2.clone(),
                z: BigUint::one(),
            };
        }
        let p = &self.p;
        let z1z1 = (&lhs.z * &lhs.z) % p;
        let u2 = (x2 * &z1z1) % p;
        let s2 = (y2 * ((&z1z1 * &lhs.z) % p)) % p;
        if u2 == lhs.x {
            if s2 == lhs.y {
                return self.jac_double(lhs);
            }
            return Jac::identity();
        }
        let h = (&u2 + p - &lhs.x) % p;
        let r = (&s2 + p - &lhs.y) % p;
        let h2 = (&h * &h) % p;
        let h3 = (&h2 * &h) % p;
        let x1h2 = (&lhs.x * &h2) % p;
        let two_x1h2 = (&x1h2 + &x1h2) % p;
        let x3 = ((&r * &r) % p + p - ((&h3 + two_x1h2) % p)) % p;
        let y3 = ((&r * ((&x1h2 + p - &x3) % p)) % p + p - ((&lhs.y * &h3) % p)) % p;
        let z3 = (&lhs.z * &h) % p;
        Jac { x: x3, y: y3, z: z3 }
    }

    fn jac_to_affine(&self, pt: &Jac) -> Point {
        if pt.z.is_zero() {
            return Point::Infinity;
        }
        let p = &self.p;
        let zinv = mod_inv(&pt.z, p).expect("p prime, z nonzero");
        let zinv2 = (&zinv * &zinv) % p;
        let x = (&pt.x * &zinv2) % p;
        let y = (&pt.y * zinv2 % p * zinv) % p;
        Point::Affine { x, y }
    }

    /// Lifts an x-coordinate to a curve point, choosing the even-y root.
    /// Returns `None` when x has no square on the curve.
    pub fn lift_x(&self, x: &BigUint) -> Option<Point> {
        if x >= &self.p {
            return None;
        }
        let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
        let y = mod_sqrt(&rhs, &self.p)?;
        let y = if y.is_even() { y } else { &self.p - &y };
        Some(Point::Affine { x: x.clone(), y })
    }
}

/// A point in Jacobian projective coordinates: (X, Y, Z) stands for the
/// affine point (X/Z^2, Y/Z^3), with Z = 0 as the identity.
struct Jac {
    x: BigUint,
    y: BigUint,
    z: BigUint,
}

impl Jac {
    fn identity() -> Self {
        Jac {
            x: BigUint::one(),
            y: BigUint::one(),
            z: BigUint::zero(),
        }
    }
}

/// Modular inverse by the extended Euclidean algorithm. `None` when the
/// inverse does not exist.
pub fn mod_inv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let inv = e.x.mod_floor(&m);
    Some(inv.to_biguint().expect("mod_floor is non-negative"))
}

/// Square root modulo an odd prime via Tonelli-Shanks, with the fast
/// exponent path for p = 3 (mod 4). `None` when `a` is a non-residue.
pub fn mod_sqrt(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    let a = a % p;
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    // Euler criterion
    let legendre = a.modpow(&((p - &one) / &two), p);
    if legendre != one {
        return None;
    }
    if p % BigUint::from(4u32) == BigUint::from(3u32) {
        return Some(a.modpow(&((p + &one) / BigUint::from(4u32)), p));
    }

    // write p - 1 = q * 2^s with q odd
    let mut q = p - &one;
    let mut s = 0u32;
    while q.is_even() {
        q /= &two;
        s += 1;
    }
    // find a quadratic non-residue z
    let mut z = two.clone();
    while z.modpow(&((p - &one) / &two), p) == one {
        z += &one;
    }

    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) / &two), p);
    while t != one {
        let mut i = 0u32;
        let mut probe = t.clone();
        while probe != one {
            probe = (&probe * &probe) % p;
            i += 1;
            if i == m {
                return None;
            }
        }
        let exponent = BigUint::one() << (m - i - 1);
        let b = c.modpow(&exponent, p);
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Some(r)
}
