//! Dyadic ledger amounts `m · 2^e`.
//!
//! Budgets and bids live on a dyadic grid so that sums and differences stay
//! exact while keeping numbers small: every strategy rounds its bid onto a grid
//! relative to its own budget.

use crate::num::Q;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Amount {
    mant: BigInt,
    exp: i64,
}

impl Amount {
    pub fn zero() -> Self {
        Amount { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(n: BigInt) -> Self {
        Amount { mant: n, exp: 0 }.normalized()
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_int(BigInt::from(n))
    }

    /// `mant · 2^exp`.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        Amount { mant, exp }.normalized()
    }

    /// `2^exp`.
    pub fn pow2(exp: i64) -> Self {
        Amount { mant: BigInt::one(), exp }
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// floor(log2 |self|); `None` for zero.
    pub fn log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    /// Number of significant bits, a cost indicator.
    pub fn precision(&self) -> u64 {
        self.mant.bits()
    }

    pub fn to_q(&self) -> Q {
        if self.exp >= 0 {
            Q::from_integer(&self.mant << self.exp as usize)
        } else {
            Q::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// `self / other` as a rational, without materialising either side as a
    /// fraction. `other` must be nonzero.
    pub fn ratio(&self, other: &Amount) -> Q {
        let d = self.exp - other.exp;
        if d >= 0 {
            Q::new(&self.mant << d as usize, other.mant.clone())
        } else {
            Q::new(self.mant.clone(), &other.mant << (-d) as usize)
        }
    }

    /// A lower bound on log2(self − factor·other) when that difference is
    /// positive, `None` otherwise. Exact in sign; no fractions are reduced.
    /// `factor` must be positive.
    pub fn excess_log2(&self, other: &Amount, factor: &Q) -> Option<i64> {
        let (x, y, e) = Self::aligned(self, other);
        let diff = x * factor.denom() - y * factor.numer();
        if !diff.is_positive() {
            return None;
        }
        Some(diff.bits() as i64 - 1 + e - factor.denom().bits() as i64)
    }

    pub fn to_f64(&self) -> f64 {
        crate::num::to_f64(&self.to_q())
    }

    fn aligned(a: &Amount, b: &Amount) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        (&a.mant << (a.exp - e) as usize, &b.mant << (b.exp - e) as usize, e)
    }

    pub fn add(&self, other: &Amount) -> Amount {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = Self::aligned(self, other);
        Amount::new(a + b, e)
    }

    pub fn sub(&self, other: &Amount) -> Amount {
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = Self::aligned(self, other);
        Amount::new(a - b, e)
    }

    /// `self · k`, exactly.
    pub fn scale(&self, k: &BigInt) -> Amount {
        Amount::new(&self.mant * k, self.exp)
    }

    pub fn half(&self) -> Amount {
        Amount { mant: self.mant.clone(), exp: self.exp - 1 }.normalized()
    }

    pub fn shl(&self, k: i64) -> Amount {
        if self.is_zero() {
            return self.clone();
        }
        Amount { mant: self.mant.clone(), exp: self.exp + k }
    }

    fn round_div(num: BigInt, den: BigInt, up: bool) -> BigInt {
        if up {
            num.div_ceil(&den)
        } else {
            num.div_floor(&den)
        }
    }

    /// Rounds `v` onto the grid `2^grid`, downwards or upwards.
    pub fn from_q(v: &Q, grid: i64, up: bool) -> Amount {
        let (num, den) = if grid >= 0 {
            (v.numer().clone(), v.denom() << grid as usize)
        } else {
            (v.numer() << (-grid) as usize, v.denom().clone())
        };
        Amount::new(Self::round_div(num, den, up), grid)
    }

    /// `self · factor` rounded onto the grid `2^grid`.
    pub fn mul_q(&self, factor: &Q, grid: i64, up: bool) -> Amount {
        if self.is_zero() || factor.is_zero() {
            return Amount::zero();
        }
        let mut num = &self.mant * factor.numer();
        let mut den = factor.denom().clone();
        let shift = self.exp - grid;
        if shift >= 0 {
            num <<= shift as usize;
        } else {
            den <<= (-shift) as usize;
        }
        Amount::new(Self::round_div(num, den, up), grid)
    }

    /// Rounds `self` onto the grid `2^grid`.
    pub fn round_to(&self, grid: i64, up: bool) -> Amount {
        if self.exp >= grid {
            return self.clone();
        }
        let den = BigInt::one() << (grid - self.exp) as usize;
        Amount::new(Self::round_div(self.mant.clone(), den, up), grid)
    }

    /// Compares `self` against the rational `v` without building a fraction for `self`.
    pub fn cmp_q(&self, v: &Q) -> Ordering {
        // self = m 2^e, v = n / d  →  compare m d 2^e with n
        let lhs = &self.mant * v.denom();
        if self.exp >= 0 {
            (lhs << self.exp as usize).cmp(v.numer())
        } else {
            lhs.cmp(&(v.numer() << (-self.exp) as usize))
        }
    }

    pub fn sign(&self) -> Sign {
        self.mant.sign()
    }
}

impl Ord for Amount {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mant.sign(), other.mant.sign());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        // same nonzero sign: magnitude by bit length first
        let (la, lb) = (self.log2().unwrap(), other.log2().unwrap());
        if la != lb {
            let mag = la.cmp(&lb);
            return if sa == Sign::Plus { mag } else { mag.reverse() };
        }
        let (a, b, _) = Self::aligned(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Amount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::num::fmt_q(&self.to_q()))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::num::fmt_q(&self.to_q()))
    }
}
