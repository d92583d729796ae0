//! Bit-exact emulation of parameterized binary floating-point formats.
//!
//! A [`FloatFormat`] is described by its exponent width, its explicit fraction
//! width (the leading significand bit is implicit) and whether gradual
//! underflow is supported. Values of every format are carried in `f64`, the
//! working precision, and every emulated operation computes the exact result
//! (as an unevaluated `hi + lo` pair) before performing a single
//! round-to-nearest-even step into the target format.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponent width of the working precision (`f64`).
pub const WORKING_EXPONENT_BITS: u32 = 11;
/// Fraction width of the working precision (`f64`).
pub const WORKING_FRACTION_BITS: u32 = 52;

/// `2^k` for `k` in the `f64` range, including the subnormal powers.
pub(crate) fn pow2(k: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&k));
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// `floor(log2(a))` for a finite positive `a`.
fn exponent_of(a: f64) -> i32 {
    let bits = a.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased != 0 {
        biased - 1023
    } else {
        let mantissa = bits & ((1u64 << 52) - 1);
        (63 - mantissa.leading_zeros() as i32) - 1074
    }
}

/// A binary floating-point format with IEEE-style exponent biasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    exponent_bits: u32,
    fraction_bits: u32,
    subnormals: bool,
}

impl FloatFormat {
    /// Creates a format, rejecting widths that are degenerate or wider than
    /// the working precision.
    pub fn new(exponent_bits: u32, fraction_bits: u32, supports_subnormals: bool) -> Result<Self> {
        if exponent_bits < 2 {
            return Err(Error::domain(format!(
                "exponent_bits must be at least 2, got {exponent_bits}"
            )));
        }
        if exponent_bits > WORKING_EXPONENT_BITS || fraction_bits > WORKING_FRACTION_BITS {
            return Err(Error::domain(format!(
                "format e{exponent_bits}m{fraction_bits} is wider than the working precision \
                 e{WORKING_EXPONENT_BITS}m{WORKING_FRACTION_BITS}"
            )));
        }
        Ok(Self {
            exponent_bits,
            fraction_bits,
            subnormals: supports_subnormals,
        })
    }

    /// Bfloat16: 8 exponent bits, 7 fraction bits.
    pub const fn bfloat16() -> Self {
        Self {
            exponent_bits: 8,
            fraction_bits: 7,
            subnormals: true,
        }
    }

    /// IEEE binary32.
    pub const fn binary32() -> Self {
        Self {
            exponent_bits: 8,
            fraction_bits: 23,
            subnormals: true,
        }
    }

    /// IEEE binary64, i.e. the working precision itself. Rounding into it is
    /// the identity on finite `f64` values.
    pub const fn working() -> Self {
        Self {
            exponent_bits: WORKING_EXPONENT_BITS,
            fraction_bits: WORKING_FRACTION_BITS,
            subnormals: true,
        }
    }

    /// Same widths with gradual underflow replaced by flush-to-zero.
    pub fn flush_to_zero(self) -> Self {
        Self {
            subnormals: false,
            ..self
        }
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fraction_bits
    }

    pub fn supports_subnormals(&self) -> bool {
        self.subnormals
    }

    pub fn is_working_precision(&self) -> bool {
        self.exponent_bits == WORKING_EXPONENT_BITS
            && self.fraction_bits == WORKING_FRACTION_BITS
            && self.subnormals
    }

    /// Significand digits `t`, counting the implicit leading bit.
    pub fn precision(&self) -> u32 {
        self.fraction_bits + 1
    }

    pub fn max_exponent(&self) -> i32 {
        (1i32 << (self.exponent_bits - 1)) - 1
    }

    pub fn min_exponent(&self) -> i32 {
        1 - self.max_exponent()
    }

    /// Relative error bound of one rounding, `2^(1-t)`.
    pub fn unit_roundoff(&self) -> f64 {
        pow2(1 - self.precision() as i32)
    }

    pub fn max_finite(&self) -> f64 {
        let m = self.fraction_bits as i32;
        // (2^(m+1) - 1) * 2^(emax - m); the first factor is exact for m <= 52.
        ((1u64 << (m + 1)) - 1) as f64 * pow2(self.max_exponent() - m)
    }

    pub fn min_positive_normal(&self) -> f64 {
        pow2(self.min_exponent())
    }

    /// Smallest positive representable magnitude.
    pub fn min_positive(&self) -> f64 {
        if self.subnormals {
            pow2(self.min_exponent() - self.fraction_bits as i32)
        } else {
            self.min_positive_normal()
        }
    }

    /// Total encoding width `1 + E + M`.
    pub fn bit_width(&self) -> u32 {
        1 + self.exponent_bits + self.fraction_bits
    }

    pub fn is_representable(&self, x: f64) -> bool {
        match self.round(x) {
            Ok(out) => out.flags.exact,
            Err(_) => false,
        }
    }

    /// Rounds `x` to the nearest representable value, ties to even.
    pub fn round(&self, x: f64) -> Result<RoundingOutcome> {
        round_to_format(x, self)
    }

    /// Rounds and discards the diagnostics. Non-finite inputs are passed through
    /// the saturating overflow path instead of being rejected.
    pub fn quantize(&self, x: f64) -> f64 {
        if x.is_nan() {
            return x;
        }
        if x.is_infinite() {
            return x.signum() * self.max_finite();
        }
        self.round_pair(x, 0.0).value
    }

    /// Encodes a representable value as `sign | biased exponent | fraction`.
    pub fn encode(&self, x: f64) -> Result<u64> {
        if !x.is_finite() {
            return Err(Error::domain("cannot encode a non-finite value"));
        }
        if !self.is_representable(x) {
            return Err(Error::domain(format!("{x} is not representable in {self}")));
        }
        let m = self.fraction_bits;
        let sign = u64::from(x.is_sign_negative()) << (self.exponent_bits + m);
        let a = x.abs();
        if a == 0.0 {
            return Ok(sign);
        }
        let e = exponent_of(a);
        let emin = self.min_exponent();
        let (biased, fraction) = if e < emin {
            // subnormal: a = f * 2^(emin - m)
            let f = a / pow2(emin - m as i32);
            (0u64, f as u64)
        } else {
            let scaled = a / pow2(e - m as i32);
            let f = scaled as u64 - (1u64 << m);
            ((e + self.max_exponent()) as u64, f)
        };
        Ok(sign | (biased << m) | fraction)
    }

    /// Decodes an encoding produced by [`FloatFormat::encode`]. The all-ones
    /// exponent (infinities and NaNs) is rejected.
    pub fn decode(&self, bits: u64) -> Result<f64> {
        let width = self.bit_width();
        if width < 64 && bits >> width != 0 {
            return Err(Error::domain(format!(
                "encoding {bits:#x} does not fit in {width} bits"
            )));
        }
        let m = self.fraction_bits;
        let exp_mask = (1u64 << self.exponent_bits) - 1;
        let biased = (bits >> m) & exp_mask;
        let fraction = bits & ((1u64 << m) - 1);
        let negative = (bits >> (m + self.exponent_bits)) & 1 == 1;
        if biased == exp_mask {
            return Err(Error::domain("encoding denotes a non-finite value"));
        }
        let magnitude = if biased == 0 {
            if fraction != 0 && !self.subnormals {
                return Err(Error::domain(
                    "subnormal encoding in a flush-to-zero format",
                ));
            }
            fraction as f64 * pow2(self.min_exponent() - m as i32)
        } else {
            let e = biased as i32 - self.max_exponent();
            ((1u64 << m) | fraction) as f64 * pow2(e - m as i32)
        };
        Ok(if negative { -magnitude } else { magnitude })
    }

    /// Rounds the exact value `hi + lo` where `lo` is a tail far below the
    /// last bit of `hi` (an error-free transformation residual). Only the sign
    /// of `lo` influences the result, by breaking would-be ties.
    pub(crate) fn round_pair(&self, hi: f64, lo: f64) -> RoundingOutcome {
        if hi == 0.0 {
            return RoundingOutcome {
                value: hi,
                relative_error: 0.0,
                flags: RoundingFlags::EXACT,
            };
        }
        let negative = hi < 0.0;
        let a = hi.abs();
        let tail = if negative { -lo } else { lo };
        let m = self.fraction_bits as i32;
        let emin = self.min_exponent();
        let min_normal = self.min_positive_normal();

        let mut flags = RoundingFlags::default();
        let magnitude = if !self.subnormals && a < min_normal {
            // flush-to-zero grid below the normal range is {0, min_normal}
            let half = 0.5 * min_normal;
            flags.underflow = true;
            if a > half || (a == half && tail > 0.0) {
                min_normal
            } else {
                0.0
            }
        } else {
            let qe = exponent_of(a).max(emin) - m;
            let quantum = pow2(qe);
            let scaled = a / quantum;
            let floor = scaled.floor();
            let frac = scaled - floor;
            let up = if frac > 0.5 {
                true
            } else if frac < 0.5 {
                false
            } else if tail != 0.0 {
                tail > 0.0
            } else {
                floor % 2.0 == 1.0
            };
            let n = if up { floor + 1.0 } else { floor };
            let rounded = n * quantum;
            if a < min_normal && (rounded != a || tail != 0.0) {
                flags.underflow = true;
            }
            rounded
        };

        let magnitude = if magnitude > self.max_finite() {
            flags.overflow = true;
            self.max_finite()
        } else {
            magnitude
        };

        flags.exact = magnitude == a && tail == 0.0;
        flags.inexact = !flags.exact;
        let relative_error = if flags.exact {
            0.0
        } else {
            ((magnitude - a) - tail) / a
        };
        let value = if negative { -magnitude } else { magnitude };
        RoundingOutcome {
            value,
            relative_error,
            flags,
        }
    }
}

impl Default for FloatFormat {
    fn default() -> Self {
        Self::working()
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}m{}", self.exponent_bits, self.fraction_bits)?;
        if !self.subnormals {
            f.write_str("fz")?;
        }
        Ok(())
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    /// Parses `e<E>m<M>` with an optional `fz` (flush-to-zero) suffix.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::domain(format!(
                "malformed format descriptor {s:?}; expected e<E>m<M>[fz]"
            ))
        };
        let body = s.trim();
        let (body, subnormals) = match body.strip_suffix("fz") {
            Some(rest) => (rest, false),
            None => (body, true),
        };
        let body = body.strip_prefix('e').ok_or_else(bad)?;
        let (e, m) = body.split_once('m').ok_or_else(bad)?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        FloatFormat::new(e, m, subnormals)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundingFlags {
    pub exact: bool,
    pub inexact: bool,
    pub overflow: bool,
    pub underflow: bool,
}

impl RoundingFlags {
    const EXACT: Self = Self {
        exact: true,
        inexact: false,
        overflow: false,
        underflow: false,
    };
}

/// Result of projecting a real onto a format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingOutcome {
    pub value: f64,
    /// Realized `δ0` with `value = x (1 + δ0)`.
    pub relative_error: f64,
    pub flags: RoundingFlags,
}

/// Projects `x` onto `fmt` with round-to-nearest, ties-to-even.
///
/// Overflow saturates to the largest finite magnitude; magnitudes below the
/// normal range either round onto the subnormal grid or flush, depending on
/// the format.
pub fn round_to_format(x: f64, fmt: &FloatFormat) -> Result<RoundingOutcome> {
    if !x.is_finite() {
        return Err(Error::domain(format!("cannot round non-finite value {x}")));
    }
    Ok(fmt.round_pair(x, 0.0))
}

/// `2^(1-t)` for the format.
pub fn unit_roundoff(fmt: &FloatFormat) -> f64 {
    fmt.unit_roundoff()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// One emulated arithmetic operation: exact result, then a single rounding.
pub fn lp_op(a: f64, b: f64, op: Op, fmt: &FloatFormat) -> Result<RoundingOutcome> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("operands must be finite"));
    }
    let (hi, lo) = match op {
        Op::Add => two_sum(a, b),
        Op::Sub => two_sum(a, -b),
        Op::Mul => {
            let p = a * b;
            (p, a.mul_add(b, -p))
        }
        Op::Div => {
            if b == 0.0 {
                return Err(Error::domain("division by zero"));
            }
            let q = a / b;
            // a = q b + rem exactly; the true quotient is q + rem / b
            let rem = (-q).mul_add(b, a);
            (q, rem / b)
        }
    };
    if !hi.is_finite() {
        // only reachable for formats as wide as the working precision
        let sign = if hi > 0.0 { 1.0 } else { -1.0 };
        return Ok(RoundingOutcome {
            value: sign * fmt.max_finite(),
            relative_error: -1.0,
            flags: RoundingFlags {
                exact: false,
                inexact: true,
                overflow: true,
                underflow: false,
            },
        });
    }
    Ok(fmt.round_pair(hi, lo))
}

/// Dot product with products rounded into `mul_fmt` and a running sum rounded
/// into `acc_fmt` after every addition, strictly left to right.
pub fn lp_dot(u: &[f64], v: &[f64], mul_fmt: &FloatFormat, acc_fmt: &FloatFormat) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let p = lp_op(a, b, Op::Mul, mul_fmt)?.value;
        acc = lp_op(acc, p, Op::Add, acc_fmt)?.value;
    }
    Ok(acc)
}
