//! Forward-mode dual numbers with a compile-time tangent width.
//!
//! Used to extract exact gradients of the benchmark systems' boundary
//! functions: each system instantiates `Dual<T, N>` with its own state
//! dimension and evaluates the same generic expression it uses for the
//! plain value.

use crate::scalar::{Real, Sc};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug)]
pub struct Dual<T, const N: usize> {
    pub v: T,
    pub dv: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Dual {
            v,
            dv: [T::zero(); N],
        }
    }

    /// Variable seeded with unit tangent along axis `i`.
    pub fn var(v: T, i: usize) -> Self {
        let mut dv = [T::zero(); N];
        dv[i] = T::one();
        Dual { v, dv }
    }

    fn map_tangent(self, f: impl Fn(T) -> T) -> [T; N] {
        let mut out = [T::zero(); N];
        for i in 0..N {
            out[i] = f(self.dv[i]);
        }
        out
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut dv = self.dv;
        for i in 0..N {
            dv[i] += rhs.dv[i];
        }
        Dual {
            v: self.v + rhs.v,
            dv,
        }
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut dv = self.dv;
        for i in 0..N {
            dv[i] -= rhs.dv[i];
        }
        Dual {
            v: self.v - rhs.v,
            dv,
        }
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut dv = [T::zero(); N];
        for i in 0..N {
            dv[i] = self.dv[i] * rhs.v + self.v * rhs.dv[i];
        }
        Dual {
            v: self.v * rhs.v,
            dv,
        }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.v;
        let v = self.v * inv;
        let mut dv = [T::zero(); N];
        for i in 0..N {
            dv[i] = (self.dv[i] - v * rhs.dv[i]) * inv;
        }
        Dual { v, dv }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            v: -self.v,
            dv: self.map_tangent(|d| -d),
        }
    }
}

impl<T: Real, const N: usize> Sc<T> for Dual<T, N> {
    fn k(v: T) -> Self {
        Dual::constant(v)
    }

    fn val(self) -> T {
        self.v
    }

    fn sin(self) -> Self {
        let c = num_traits::Float::cos(self.v);
        Dual {
            v: num_traits::Float::sin(self.v),
            dv: self.map_tangent(|d| d * c),
        }
    }

    fn cos(self) -> Self {
        let s = num_traits::Float::sin(self.v);
        Dual {
            v: num_traits::Float::cos(self.v),
            dv: self.map_tangent(|d| -d * s),
        }
    }

    fn tan(self) -> Self {
        let c = num_traits::Float::cos(self.v);
        let sec2 = T::one() / (c * c);
        Dual {
            v: num_traits::Float::tan(self.v),
            dv: self.map_tangent(|d| d * sec2),
        }
    }

    fn sqrt(self) -> Self {
        if self.v <= T::zero() {
            // subgradient 0 at (and below) the kink
            return Dual::constant(T::zero());
        }
        let r = num_traits::Float::sqrt(self.v);
        let half_inv = T::c(0.5) / r;
        Dual {
            v: r,
            dv: self.map_tangent(|d| d * half_inv),
        }
    }

    fn abs(self) -> Self {
        if self.v >= T::zero() {
            self
        } else {
            -self
        }
    }

    fn max(self, other: Self) -> Self {
        if self.v >= other.v {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self.v <= other.v {
            self
        } else {
            other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn product_quotient_chain() {
        // f(x) = sin(x^2) / (1 + cos(x))
        let f = |x: f64| (x * x).sin() / (1.0 + x.cos());
        let x0 = 0.7;
        let d = Dual::<f64, 1>::var(x0, 0);
        let y = d.mul(d).sin() / (Dual::kc(1.0) + d.cos());
        assert!((y.v - f(x0)).abs() < 1e-12);
        assert!((y.dv[0] - fd(f, x0)).abs() < 1e-6);
    }

    #[test]
    fn abs_subgradient_at_zero_is_plus_one() {
        let d = Dual::<f64, 1>::var(0.0, 0);
        assert_eq!(Sc::<f64>::abs(d).dv[0], 1.0);
    }

    #[test]
    fn sqrt_at_zero_has_zero_tangent() {
        let d = Dual::<f64, 1>::var(0.0, 0);
        let r = Sc::<f64>::sqrt(d);
        assert_eq!(r.v, 0.0);
        assert_eq!(r.dv[0], 0.0);
    }

    #[test]
    fn max_tie_takes_first() {
        let a = Dual::<f64, 1> { v: 1.0, dv: [2.0] };
        let b = Dual::<f64, 1> { v: 1.0, dv: [3.0] };
        assert_eq!(Sc::<f64>::max(a, b).dv[0], 2.0);
    }

    #[test]
    fn multi_tangent_gradient() {
        // g(x, y) = x * y + sin(x)
        let x = Dual::<f64, 2>::var(1.1, 0);
        let y = Dual::<f64, 2>::var(-0.4, 1);
        let g = x * y + Sc::<f64>::sin(x);
        assert!((g.dv[0] - (-0.4 + 1.1f64.cos())).abs() < 1e-12);
        assert!((g.dv[1] - 1.1).abs() < 1e-12);
    }
}
