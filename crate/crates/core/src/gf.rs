//! Arithmetic in GF(2^m) for m <= 8, polynomials over those fields, and the
//! number-theoretic predicates the Block-MDS certificates rely on.
//!
//! Elements are plain `u8` values whose bits are the coefficients of the
//! element's polynomial representation, so addition is XOR. Multiplication
//! goes through log/antilog tables built once per [`FieldSpec`].

use std::fmt;

use thiserror::Error;

/// A field element. Bits are polynomial coefficients; the value is always
/// below the order of the field it belongs to.
pub type FieldElem = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("extension degree {0} is outside 1..=8")]
    BadDegree(u32),
    #[error("reduction polynomial {poly:#b} is not an irreducible polynomial of degree {m}")]
    BadReductionPoly { poly: u32, m: u32 },
    #[error("value {value} is not an element of GF({q})")]
    OutOfRange { value: u64, q: u32 },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("polynomial division by zero")]
    DivisionByZero,
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("irreducibility is undefined for constant polynomials")]
    ConstantPolynomial,
    #[error("{q} and {z} are not coprime")]
    NotCoprime { q: u64, z: u64 },
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
}

pub type Result<T> = std::result::Result<T, GfError>;

/// Primitive reduction polynomials used when only the degree is given.
const DEFAULT_POLYS: [u32; 9] = [0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0b100011101];

/// Carry-less multiply of two field elements followed by reduction.
fn clmul_mod(a: u32, b: u32, poly: u32, m: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << m) != 0 {
            a ^= poly;
        }
    }
    acc
}

fn gf2_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn gf2_rem(mut a: u32, b: u32) -> u32 {
    let db = gf2_degree(b);
    while a != 0 && gf2_degree(a) >= db {
        a ^= b << (gf2_degree(a) - db);
    }
    a
}

/// True if `poly` (a bitmask over GF(2)) has no factor of degree 1..=deg/2.
fn gf2_irreducible(poly: u32) -> bool {
    let d = gf2_degree(poly);
    if d < 1 {
        return false;
    }
    let max = 1u32 << (d / 2 + 1);
    (2..max).all(|f| gf2_rem(poly, f) != 0)
}

/// Order, reduction polynomial and lookup tables for GF(2^m).
#[derive(Clone)]
pub struct FieldSpec {
    m: u32,
    reduction_poly: u32,
    exp: [u8; 512],
    log: [u8; 256],
}

impl FieldSpec {
    /// Builds GF(2^m) reduced modulo `reduction_poly`.
    pub fn new(m: u32, reduction_poly: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(GfError::BadDegree(m));
        }
        if gf2_degree(reduction_poly) != m as i32 || !gf2_irreducible(reduction_poly) {
            return Err(GfError::BadReductionPoly { poly: reduction_poly, m });
        }
        let q = 1u32 << m;
        // x need not generate the multiplicative group when the polynomial is
        // irreducible but not primitive, so search for a generator.
        let generator = (1..q)
            .find(|&g| {
                let mut v = 1u32;
                for k in 1..q - 1 {
                    v = clmul_mod(v, g, reduction_poly, m);
                    if v == 1 {
                        return k == q - 1;
                    }
                }
                true
            })
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut v = 1u32;
        for i in 0..(q - 1) as usize {
            exp[i] = v as u8;
            log[v as usize] = i as u8;
            v = clmul_mod(v, generator, reduction_poly, m);
        }
        for i in (q - 1) as usize..512 {
            exp[i] = exp[i % (q - 1) as usize];
        }
        Ok(FieldSpec { m, reduction_poly, exp, log })
    }

    /// GF(2^m) with a standard primitive reduction polynomial.
    pub fn with_degree(m: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(GfError::BadDegree(m));
        }
        Self::new(m, DEFAULT_POLYS[m as usize])
    }

    /// GF(8) reduced modulo x^3 + x + 1.
    pub fn gf8() -> Self {
        Self::new(3, 0b1011).expect("x^3+x+1 is irreducible")
    }

    /// Field of order `q`, which must be a power of two between 2 and 256.
    pub fn with_order(q: u32) -> Result<Self> {
        if !q.is_power_of_two() || !(2..=256).contains(&q) {
            return Err(GfError::BadDegree(q.trailing_zeros()));
        }
        Self::with_degree(q.trailing_zeros())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        1 << self.m
    }

    pub fn reduction_poly(&self) -> u32 {
        self.reduction_poly
    }

    pub fn contains(&self, value: u64) -> bool {
        value < self.q() as u64
    }

    pub fn check(&self, value: u64) -> Result<FieldElem> {
        if self.contains(value) {
            Ok(value as FieldElem)
        } else {
            Err(GfError::OutOfRange { value, q: self.q() })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == 0 {
            return Err(GfError::InverseOfZero);
        }
        let order = self.q() as usize - 1;
        Ok(self.exp[(order - self.log[a as usize] as usize) % order])
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.q() as u64 - 1;
        let idx = (self.log[a as usize] as u64 * (e % order)) % order;
        self.exp[idx as usize]
    }

    /// Checked entry point taking raw operands, as a command interpreter
    /// would receive them. `b` is the second operand or the exponent.
    pub fn field_op(&self, op: FieldOp, a: u64, b: u64) -> Result<FieldElem> {
        let a = self.check(a)?;
        match op {
            FieldOp::Add => Ok(self.add(a, self.check(b)?)),
            FieldOp::Mul => Ok(self.mul(a, self.check(b)?)),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow => Ok(self.pow(a, b)),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q()).map(|v| v as FieldElem)
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#b}", self.m, self.reduction_poly)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.reduction_poly == other.reduction_poly
    }
}

impl Eq for FieldSpec {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow,
}

/// Polynomial over GF(2^m), lowest degree first with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }

    pub fn monomial(coeff: FieldElem, degree: usize) -> Self {
        if coeff == 0 {
            return Self::zero();
        }
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = coeff;
        Poly { coeffs }
    }

    /// x^z - 1, which is x^z + 1 in characteristic 2.
    pub fn x_pow_minus_one(z: usize) -> Self {
        let mut coeffs = vec![0; z + 1];
        coeffs[0] = 1;
        coeffs[z] ^= 1;
        Self::new(coeffs)
    }

    /// 1 + x + ... + x^(n-1).
    pub fn all_ones(n: usize) -> Self {
        Poly { coeffs: vec![1; n] }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn leading(&self) -> Option<FieldElem> {
        self.coeffs.last().copied()
    }

    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// Sum (and difference) of two polynomials.
    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) ^ other.coeff(i)).collect())
    }

    pub fn scale(&self, field: &FieldSpec, c: FieldElem) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    pub fn mul(&self, field: &FieldSpec, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= field.mul(a, b);
            }
        }
        Poly::new(out)
    }

    pub fn div_rem(&self, field: &FieldSpec, divisor: &Poly) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(GfError::DivisionByZero)?;
        let lead_inv = field.inv(divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![0; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = rem[top];
            if c == 0 {
                continue;
            }
            let f = field.mul(c, lead_inv);
            quot[top - dd] = f;
            let shift = top - dd;
            for (k, &d) in divisor.coeffs.iter().enumerate() {
                rem[shift + k] ^= field.mul(f, d);
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, field: &FieldSpec, divisor: &Poly) -> Result<Poly> {
        Ok(self.div_rem(field, divisor)?.1)
    }

    pub fn monic(&self, field: &FieldSpec) -> Poly {
        match self.leading() {
            None | Some(1) => self.clone(),
            Some(l) => self.scale(field, field.inv(l).expect("leading coefficient is nonzero")),
        }
    }

    pub fn eval(&self, field: &FieldSpec, x: FieldElem) -> FieldElem {
        self.coeffs.iter().rev().fold(0, |acc, &c| field.mul(acc, x) ^ c)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c, i) {
                (_, 0) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "x^{i}")?,
                (_, 1) => write!(f, "{c}x")?,
                _ => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Monic greatest common divisor by the Euclidean algorithm.
pub fn poly_gcd(field: &FieldSpec, a: &Poly, b: &Poly) -> Result<Poly> {
    if a.is_zero() && b.is_zero() {
        return Err(GfError::GcdOfZeros);
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(field, &b)?;
        a = b;
        b = r;
    }
    Ok(a.monic(field))
}

/// `base^e mod modulus` by square-and-multiply.
fn pow_mod(field: &FieldSpec, base: &Poly, mut e: u64, modulus: &Poly) -> Result<Poly> {
    let mut result = Poly::one().rem(field, modulus)?;
    let mut b = base.rem(field, modulus)?;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(field, &b).rem(field, modulus)?;
        }
        b = b.mul(field, &b).rem(field, modulus)?;
        e >>= 1;
    }
    Ok(result)
}

/// Rabin-style irreducibility test: `f` is irreducible iff
/// gcd(x^(q^d) - x, f) = 1 for every d in 1..=deg(f)/2.
pub fn is_irreducible(field: &FieldSpec, f: &Poly) -> Result<bool> {
    let deg = match f.degree() {
        None | Some(0) => return Err(GfError::ConstantPolynomial),
        Some(d) => d,
    };
    if deg == 1 {
        return Ok(true);
    }
    let x = Poly::monomial(1, 1);
    let q = field.q() as u64;
    let mut h = x.rem(field, f)?;
    for _ in 1..=deg / 2 {
        h = pow_mod(field, &h, q, f)?;
        if !poly_gcd(field, &h.add(&x), f)?.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Smallest `t >= 1` with `q^t = 1 (mod z)`.
pub fn mult_order(q: u64, z: u64) -> Result<u64> {
    if z < 2 {
        return Err(GfError::BadModulus(z));
    }
    if gcd_u64(q, z) != 1 {
        return Err(GfError::NotCoprime { q, z });
    }
    let base = (q % z) as u128;
    let mut acc = base;
    let mut t = 1;
    while acc != 1 {
        acc = acc * base % z as u128;
        t += 1;
    }
    Ok(t)
}

/// Primality by trial division.
pub fn is_prime(z: u64) -> bool {
    if z < 2 {
        return false;
    }
    if z % 2 == 0 {
        return z == 2;
    }
    let mut d = 3;
    while d * d <= z {
        if z % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
