//! Overflow-safe scaled arithmetic for normalization constants.
//!
//! Normalization constants compound per-station demand powers and outgrow
//! (or undershoot) the dynamic range of `f64` long before desk-scale models
//! become interesting. A [`ScaledValue`] keeps a separate power-of-two scale
//! so that products and ratios stay exact in the exponent while the mantissa
//! carries the 53-bit precision.

/// A real number stored as `mantissa * 2^exponent`.
///
/// Zero is `(0, 0)`; any other value keeps `|mantissa|` in `[1, 2)`.
/// Normalization-constant tables only ever hold nonnegative values, but the
/// mantissa is allowed to be negative so that the subtractive recursion
/// (kept for cross-checking) can pass through intermediate differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledValue {
    mantissa: f64,
    exponent: i64,
}

/// Exact `2^e` as an `f64`, saturating to zero / infinity outside the
/// representable range.
fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074) as u64)
    } else {
        0.0
    }
}

/// Splits a finite nonzero `x` into `(m, e)` with `x = m * 2^e` and
/// `|m|` in `[1, 2)`.
fn split(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    if exp_field == 0 {
        // Subnormal: scale into the normal range first (exact).
        let (m, e) = split(x * pow2(64));
        return (m, e - 64);
    }
    let mantissa = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (mantissa, exp_field - 1023)
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: ScaledValue = ScaledValue {
        mantissa: 1.0,
        exponent: 0,
    };

    /// Converts a finite `f64`.
    pub fn from_f64(x: f64) -> ScaledValue {
        assert!(x.is_finite(), "scaled values must be finite, got {x}");
        if x == 0.0 {
            return ScaledValue::ZERO;
        }
        let (mantissa, exponent) = split(x);
        ScaledValue { mantissa, exponent }
    }

    /// The represented value, saturating to `0` / `inf` outside `f64` range.
    pub fn to_f64(self) -> f64 {
        self.mantissa * pow2(self.exponent)
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_negative(self) -> bool {
        self.mantissa < 0.0
    }

    pub fn mantissa(self) -> f64 {
        self.mantissa
    }

    pub fn exponent(self) -> i64 {
        self.exponent
    }

    fn renormalized(mantissa: f64, exponent: i64) -> ScaledValue {
        if mantissa == 0.0 {
            return ScaledValue::ZERO;
        }
        let (m, shift) = split(mantissa);
        ScaledValue {
            mantissa: m,
            exponent: exponent + shift,
        }
    }

    pub fn mul(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() || rhs.is_zero() {
            return ScaledValue::ZERO;
        }
        // |product| is in [1, 4): at most one shift.
        let mut m = self.mantissa * rhs.mantissa;
        let mut e = self.exponent + rhs.exponent;
        if m.abs() >= 2.0 {
            m *= 0.5;
            e += 1;
        }
        ScaledValue { mantissa: m, exponent: e }
    }

    pub fn add(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let diff = self.exponent - rhs.exponent;
        if diff > 53 {
            return self;
        }
        if diff < -53 {
            return rhs;
        }
        if diff >= 0 {
            ScaledValue::renormalized(self.mantissa + rhs.mantissa * pow2(-diff), self.exponent)
        } else {
            ScaledValue::renormalized(self.mantissa * pow2(diff) + rhs.mantissa, rhs.exponent)
        }
    }

    pub fn neg(self) -> ScaledValue {
        ScaledValue {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }

    pub fn sub(self, rhs: ScaledValue) -> ScaledValue {
        self.add(rhs.neg())
    }

    /// `self^k` by binary exponentiation; exponent arithmetic stays exact.
    pub fn powi(self, k: u32) -> ScaledValue {
        let mut result = ScaledValue::ONE;
        let mut base = self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        result
    }

    /// `self / rhs` as a `ScaledValue`. `rhs` must be nonzero.
    pub fn div(self, rhs: ScaledValue) -> ScaledValue {
        assert!(!rhs.is_zero(), "division of a scaled value by zero");
        if self.is_zero() {
            return ScaledValue::ZERO;
        }
        ScaledValue::renormalized(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }

    /// `self / rhs` materialized as `f64`: the exponents are subtracted
    /// before the mantissa division so the ratio is safe even when both
    /// operands are far outside `f64` range.
    pub fn ratio(self, rhs: ScaledValue) -> f64 {
        assert!(!rhs.is_zero(), "ratio of a scaled value to zero");
        if self.is_zero() {
            return 0.0;
        }
        (self.mantissa / rhs.mantissa) * pow2(self.exponent - rhs.exponent)
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        ScaledValue::ZERO
    }
}

impl std::fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = self.to_f64();
        if v.is_finite() {
            write!(f, "{v}")
        } else {
            write!(f, "{}*2^{}", self.mantissa, self.exponent)
        }
    }
}

/// Sums a slice by pairwise reduction, keeping the accumulation error
/// independent of the summation order at `O(log n)` roundings.
pub fn pairwise_sum(values: &[ScaledValue]) -> ScaledValue {
    match values.len() {
        0 => ScaledValue::ZERO,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo).add(pairwise_sum(hi))
        }
    }
}
