//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for probabilities and counts: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used when checking that a probability vector sums to one.
    fn normalization_tolerance() -> Self;

    /// Lossy conversion from `f64`. Panics only for non-representable input,
    /// which cannot happen for `f32`/`f64`.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to every Scalar")
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn normalization_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn normalization_tolerance() -> Self {
        1e-5
    }
}

/// `x * ln(y)` with the `0 * ln(0) = 0` convention.
pub(crate) fn xlogy<T: Scalar>(x: T, y: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x * y.ln()
    }
}

/// Shannon entropy in nats.
pub(crate) fn entropy<T: Scalar>(p: &[T]) -> T {
    -p.iter().map(|&v| xlogy(v, v)).sum::<T>()
}

/// `ln(Σ exp(x_i))`, stable for large magnitudes; `-inf` for an empty or all `-inf` input.
pub(crate) fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let max = xs.iter().cloned().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<T>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlogy_zero_convention() {
        assert_eq!(xlogy(0.0f64, 0.0), 0.0);
        assert_eq!(xlogy(1.0f64, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1f64.ln(), 0.2f64.ln(), 0.3f64.ln()];
        assert!((log_sum_exp(&xs) - 0.6f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn entropy_of_uniform() {
        let p = [0.25f32; 4];
        assert!((entropy(&p) - 4f32.ln()).abs() < 1e-6);
    }
}
