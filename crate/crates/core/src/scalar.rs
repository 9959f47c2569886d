//! Scalar abstraction: all numeric kernels are generic over [`Real`]
//! (`f32` or `f64`), and the closed-form expressions that need exact
//! input gradients are additionally generic over [`Sc`], which is
//! implemented both by plain reals and by the dual numbers in
//! [`crate::dual`].

use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar: f32 or f64.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + SampleUniform
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into `Self`.
    fn c(v: f64) -> Self;

    /// Lossy view as `f64` (exact for f64, widened for f32).
    fn f64(self) -> f64;

    /// One standard-normal draw from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    fn c(v: f64) -> Self {
        v
    }
    fn f64(self) -> f64 {
        self
    }
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f32 {
    fn c(v: f64) -> Self {
        v as f32
    }
    fn f64(self) -> f64 {
        self as f64
    }
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Scalar-or-dual: the operations needed by the benchmark systems'
/// dynamics and boundary functions. Implemented for every `T: Real`
/// and for `Dual<T, N>`, so one generic expression yields both the
/// value and its exact gradient.
pub trait Sc<T: Real>:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    /// Lift a plain value to a constant (zero tangent).
    fn k(v: T) -> Self;

    /// Lift an `f64` literal to a constant.
    fn kc(v: f64) -> Self {
        Self::k(T::c(v))
    }

    /// Primal value.
    fn val(self) -> T;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    /// Square root; at 0 (and below) the tangent is fixed to 0 so that
    /// kinks like point-on-polyline distances get a finite subgradient.
    fn sqrt(self) -> Self;
    /// Absolute value; the subgradient at 0 is +1.
    fn abs(self) -> Self;
    /// Ties take `self` (fixed subgradient choice).
    fn max(self, other: Self) -> Self;
    /// Ties take `self`.
    fn min(self, other: Self) -> Self;
}

impl<T: Real> Sc<T> for T {
    fn k(v: T) -> Self {
        v
    }
    fn val(self) -> T {
        self
    }
    fn sin(self) -> Self {
        num_traits::Float::sin(self)
    }
    fn cos(self) -> Self {
        num_traits::Float::cos(self)
    }
    fn tan(self) -> Self {
        num_traits::Float::tan(self)
    }
    fn sqrt(self) -> Self {
        num_traits::Float::sqrt(num_traits::Float::max(self, T::zero()))
    }
    fn abs(self) -> Self {
        num_traits::Float::abs(self)
    }
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

/// Pairwise tree sum over a slice. Fixed association order, so batch
/// reductions are identical regardless of how work was scheduled.
pub fn tree_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

/// In-place pairwise tree merge of equally-shaped vectors: folds
/// `bufs[0] <- sum(bufs)` with a fixed tree order and returns it.
pub fn tree_merge<T: Real>(mut bufs: Vec<Vec<T>>) -> Vec<T> {
    assert!(!bufs.is_empty());
    while bufs.len() > 1 {
        let mut next = Vec::with_capacity(bufs.len().div_ceil(2));
        let mut it = bufs.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += *y;
                }
            }
            next.push(a);
        }
        bufs = next;
    }
    bufs.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_serial() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let serial: f64 = xs.iter().sum();
        assert!((tree_sum(&xs) - serial).abs() < 1e-9);
    }

    #[test]
    fn tree_merge_folds_all() {
        let bufs = vec![vec![1.0f64, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(tree_merge(bufs), vec![9.0, 12.0]);
    }

    #[test]
    fn sqrt_clamps_negative() {
        assert_eq!(Sc::<f64>::sqrt(-1.0f64), 0.0);
    }
}
