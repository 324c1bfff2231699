//! Scalar abstraction for the per-particle kernels.
//!
//! The ranging-update and moment kernels are written once, generic over
//! [`Scalar`]. Production code instantiates them with `f64`. The [`Tally`]
//! instantiation runs the exact same arithmetic while counting every
//! floating-point operation into a thread-local [`OpCounts`], which is how the
//! per-particle cost budget and the trig-free property are measured.

use std::cell::Cell;
use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Arithmetic needed by the filter kernels.
///
/// Constants created with [`Scalar::from_f64`] are free; everything else is an
/// operation that a counting implementation may record.
pub trait Scalar: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + AddAssign {
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn div(self, rhs: Self) -> Self;
    fn sqrt(self) -> Self;
    /// Modulus by 2π with the sign of the divisor, i.e. a result in `[0, 2π)`.
    fn rem_tau(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
}

impl Scalar for f64 {
    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    #[inline(always)]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline(always)]
    fn rem_tau(self) -> Self {
        self.rem_euclid(TAU)
    }
    #[inline(always)]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    #[inline(always)]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// Operation counts recorded while running kernels with [`Tally`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Additions and subtractions.
    pub add: u64,
    pub mul: u64,
    pub div: u64,
    pub sqrt: u64,
    /// `mod(·, 2π)` evaluations.
    pub modulus: u64,
    /// cos and sin evaluations; a `sin_cos` pair counts as two.
    pub cos_sin: u64,
    pub atan2: u64,
}

impl OpCounts {
    pub fn saturating_sub(self, other: OpCounts) -> OpCounts {
        OpCounts {
            add: self.add.saturating_sub(other.add),
            mul: self.mul.saturating_sub(other.mul),
            div: self.div.saturating_sub(other.div),
            sqrt: self.sqrt.saturating_sub(other.sqrt),
            modulus: self.modulus.saturating_sub(other.modulus),
            cos_sin: self.cos_sin.saturating_sub(other.cos_sin),
            atan2: self.atan2.saturating_sub(other.atan2),
        }
    }

    pub fn trig(&self) -> u64 {
        self.cos_sin + self.atan2
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = Cell::new(OpCounts::default());
}

#[inline]
fn bump(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

/// Runs `f` and returns its result together with the operations that
/// [`Tally`] values recorded on this thread while it ran.
pub fn count_ops<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = COUNTS.with(Cell::get);
    let out = f();
    let after = COUNTS.with(Cell::get);
    (out, after.saturating_sub(before))
}

/// An `f64` that counts the operations performed on it.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tally(pub f64);

impl Add for Tally {
    type Output = Tally;
    fn add(self, rhs: Tally) -> Tally {
        bump(|c| c.add += 1);
        Tally(self.0 + rhs.0)
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        *self = *self + rhs;
    }
}

// Subtractions are tallied as additions.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Tally {
    type Output = Tally;
    fn sub(self, rhs: Tally) -> Tally {
        bump(|c| c.add += 1);
        Tally(self.0 - rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Tally {
    type Output = Tally;
    fn mul(self, rhs: Tally) -> Tally {
        bump(|c| c.mul += 1);
        Tally(self.0 * rhs.0)
    }
}

impl Scalar for Tally {
    fn from_f64(v: f64) -> Self {
        Tally(v)
    }
    fn to_f64(self) -> f64 {
        self.0
    }
    fn div(self, rhs: Self) -> Self {
        bump(|c| c.div += 1);
        Tally(self.0 / rhs.0)
    }
    fn sqrt(self) -> Self {
        bump(|c| c.sqrt += 1);
        Tally(self.0.sqrt())
    }
    fn rem_tau(self) -> Self {
        bump(|c| c.modulus += 1);
        Tally(self.0.rem_euclid(TAU))
    }
    fn sin_cos(self) -> (Self, Self) {
        bump(|c| c.cos_sin += 2);
        let (s, c) = self.0.sin_cos();
        (Tally(s), Tally(c))
    }
    fn atan2(self, x: Self) -> Self {
        bump(|c| c.atan2 += 1);
        Tally(self.0.atan2(x.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_counts_each_kind() {
        let ((), counts) = count_ops(|| {
            let a = Tally(1.0);
            let b = Tally(2.0);
            let mut s = a + b - a;
            s += a * b;
            let _ = s.div(b).sqrt().rem_tau();
            let _ = a.sin_cos();
            let _ = a.atan2(b);
        });
        assert_eq!(counts, OpCounts { add: 3, mul: 1, div: 1, sqrt: 1, modulus: 1, cos_sin: 2, atan2: 1 });
    }

    #[test]
    fn constants_are_free() {
        let (_, counts) = count_ops(|| Tally::from_f64(3.0).to_f64());
        assert_eq!(counts, OpCounts::default());
    }
}
