//! Exact dyadic rational arithmetic.
//!
//! All geometry breakpoints (cube faces, window edges, grid spacings) are
//! dyadic rationals `num / 2^exp`. Keeping them exact means grid alignment
//! is decided by integer arithmetic, never by floating-point snapping.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// A dyadic rational `num / 2^exp`, kept normalized: either `num` is odd
/// or `exp` is zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// `num / 2^exp`, normalized.
    pub fn new(num: i64, exp: u32) -> Dyadic {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn from_int(n: i64) -> Dyadic {
        Dyadic { num: n, exp: 0 }
    }

    /// `1 / 2^exp`.
    pub fn inv_pow2(exp: u32) -> Dyadic {
        Dyadic { num: 1, exp }
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    pub fn half(&self) -> Dyadic {
        Dyadic::new(self.num, self.exp + 1)
    }

    pub fn double(&self) -> Dyadic {
        Dyadic::new(self.num.checked_mul(2).expect("dyadic overflow"), self.exp)
    }

    /// Exact f64 value. Desk-scale numerators stay far below 2^53, so the
    /// conversion is lossless.
    pub fn to_f64(&self) -> f64 {
        debug_assert!(self.num.abs() < (1i64 << 53));
        self.num as f64 / exp2(self.exp)
    }

    /// Whether `self` is an integer multiple of `step`.
    pub fn is_multiple_of(&self, step: &Dyadic) -> bool {
        self.div_exact(step).is_some()
    }

    /// `self / step` when the quotient is an exact integer.
    pub fn div_exact(&self, step: &Dyadic) -> Option<i64> {
        if step.num == 0 {
            return None;
        }
        // (a/2^e) / (b/2^f) = a*2^f / (b*2^e)
        let lhs = self.num as i128 * (1i128 << step.exp);
        let rhs = step.num as i128 * (1i128 << self.exp);
        if lhs % rhs != 0 {
            return None;
        }
        i64::try_from(lhs / rhs).ok()
    }

    /// Parse "8", "-3/16" (power-of-two denominator) or an exactly dyadic
    /// decimal such as "0.125". Anything else is rejected.
    pub fn parse(s: &str) -> Option<Dyadic> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q <= 0 || q.count_ones() != 1 {
                return None;
            }
            return Some(Dyadic::new(p, q.trailing_zeros()));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.trim_start().starts_with('-');
            let int_part: i64 = int.parse().ok()?;
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let digits: i64 = frac.parse().ok()?;
            // frac/10^k is dyadic iff 5^k divides the digits
            let mut p5: i64 = 1;
            for _ in 0..frac.len() {
                p5 = p5.checked_mul(5)?;
            }
            if digits % p5 != 0 {
                return None;
            }
            let frac_dyadic = Dyadic::new(digits / p5, frac.len() as u32);
            let whole = Dyadic::from_int(int_part);
            return Some(if neg { whole - frac_dyadic } else { whole + frac_dyadic });
        }
        s.parse::<i64>().ok().map(Dyadic::from_int)
    }
}

fn exp2(e: u32) -> f64 {
    // exact for e < 1024
    f64::from_bits((1023 + e as u64) << 52)
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let e = self.exp.max(rhs.exp);
        let a = self.num.checked_shl(e - self.exp).expect("dyadic overflow");
        let b = rhs.num.checked_shl(e - rhs.exp).expect("dyadic overflow");
        Dyadic::new(a.checked_add(b).expect("dyadic overflow"), e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let prod = (self.num as i128) * (rhs.num as i128);
        Dyadic::new(i64::try_from(prod).expect("dyadic overflow"), self.exp + rhs.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        let lhs = self.num as i128 * (1i128 << other.exp);
        let rhs = other.num as i128 * (1i128 << self.exp);
        lhs.cmp(&rhs)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1i64 << self.exp)
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
