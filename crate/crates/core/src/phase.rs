//! Exact dyadic phases `num·π / 2^den_pow`, reduced modulo 2π.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Largest supported denominator exponent.
pub const MAX_DEN_POW: u32 = 30;

/// A phase `num·π / 2^den_pow`.
///
/// Always canonical: `num` lies in `[0, 2^(den_pow+1))` and `den_pow` is
/// minimal, so structural equality is phase equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Phase {
    num: u64,
    den_pow: u32,
}

impl Phase {
    pub const ZERO: Phase = Phase { num: 0, den_pow: 0 };
    pub const PI: Phase = Phase { num: 1, den_pow: 0 };

    /// Builds `num·π / 2^den_pow` from any signed numerator.
    pub fn new(num: i64, den_pow: u32) -> Phase {
        assert!(den_pow <= MAX_DEN_POW, "phase denominator 2^{den_pow} too large");
        let modulus = 1i64 << (den_pow + 1);
        Phase::canonical(num.rem_euclid(modulus) as u64, den_pow)
    }

    fn canonical(mut num: u64, mut den_pow: u32) -> Phase {
        let modulus = 1u64 << (den_pow + 1);
        num %= modulus;
        if num == 0 {
            return Phase::ZERO;
        }
        while den_pow > 0 && num.is_multiple_of(2) {
            num /= 2;
            den_pow -= 1;
        }
        Phase { num, den_pow }
    }

    /// `k·π` for a bit `k`.
    pub fn from_bit(bit: bool) -> Phase {
        if bit {
            Phase::PI
        } else {
            Phase::ZERO
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den_pow(self) -> u32 {
        self.den_pow
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// True for 0 and π, the phases measured in the X plane.
    pub fn is_pauli(self) -> bool {
        self.den_pow == 0
    }

    pub fn to_radians(self) -> f64 {
        self.num as f64 * std::f64::consts::PI / (1u64 << self.den_pow) as f64
    }

    /// Index of this phase in the cyclic group of `2^(den_pow+1)` multiples
    /// of `π/2^den_pow`, or `None` if it is not a member.
    pub fn group_index(self, den_pow: u32) -> Option<u64> {
        if self.den_pow > den_pow {
            return None;
        }
        Some(self.num << (den_pow - self.den_pow))
    }

    /// Inverse of [`Phase::group_index`].
    pub fn from_group_index(index: u64, den_pow: u32) -> Phase {
        Phase::canonical(index, den_pow)
    }

    /// Uniform draw from the group of multiples of `π/2^den_pow`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, den_pow: u32) -> Phase {
        let size = 1u64 << (den_pow + 1);
        Phase::canonical(rng.gen_range(0..size), den_pow)
    }

    /// Negates the phase when `flip` is set.
    pub fn signed(self, flip: bool) -> Phase {
        if flip {
            -self
        } else {
            self
        }
    }
}

impl Add for Phase {
    type Output = Phase;

    fn add(self, rhs: Phase) -> Phase {
        let den_pow = self.den_pow.max(rhs.den_pow);
        let a = self.num << (den_pow - self.den_pow);
        let b = rhs.num << (den_pow - rhs.den_pow);
        Phase::canonical(a + b, den_pow)
    }
}

impl AddAssign for Phase {
    fn add_assign(&mut self, rhs: Phase) {
        *self = *self + rhs;
    }
}

impl Neg for Phase {
    type Output = Phase;

    fn neg(self) -> Phase {
        let modulus = 1u64 << (self.den_pow + 1);
        Phase::canonical(modulus - self.num, self.den_pow)
    }
}

impl Sub for Phase {
    type Output = Phase;

    fn sub(self, rhs: Phase) -> Phase {
        self + (-rhs)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.den_pow)
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({}π/{})", self.num, 1u64 << self.den_pow)
    }
}

impl FromStr for Phase {
    type Err = ParseError;

    /// Accepts `n/2^k` (the diagram file form), `n/d` with `d` a power of
    /// two, or a bare integer `n`; all mean multiples of π.
    fn from_str(s: &str) -> Result<Phase, ParseError> {
        let bad = || ParseError::Phase(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            None => (s, None),
            Some((n, d)) => (n, Some(d)),
        };
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den_pow = match den {
            None => 0,
            Some(d) => {
                let d = d.trim();
                if let Some(exp) = d.strip_prefix("2^") {
                    exp.parse::<u32>().map_err(|_| bad())?
                } else {
                    let d: u64 = d.parse().map_err(|_| bad())?;
                    if d == 0 || !d.is_power_of_two() {
                        return Err(bad());
                    }
                    d.trailing_zeros()
                }
            }
        };
        if den_pow > MAX_DEN_POW {
            return Err(bad());
        }
        Ok(Phase::new(num, den_pow))
    }
}

impl TryFrom<String> for Phase {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Phase, ParseError> {
        s.parse()
    }
}

impl From<Phase> for String {
    fn from(p: Phase) -> String {
        p.to_string()
    }
}
