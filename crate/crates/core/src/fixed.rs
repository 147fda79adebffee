//! Width-generic saturating integer primitives.
//!
//! The trigger datapath is integer fixed-point throughout. These helpers are
//! written against `num_traits::PrimInt` so the same rules can be exercised on
//! narrow words (`u8`, `i16`) in tests and used on the concrete crate-level
//! word types in production.

use num_traits::{PrimInt, Signed, Unsigned};

/// `min(a + b, cap)` without ever wrapping.
#[inline]
pub fn saturating_add_capped<T: PrimInt + Unsigned>(a: T, b: T, cap: T) -> T {
    a.saturating_add(b).min(cap)
}

/// Saturating sum of an iterator of words, clamped at `cap`.
pub fn saturating_sum_capped<T, I>(items: I, cap: T) -> T
where
    T: PrimInt + Unsigned,
    I: IntoIterator<Item = T>,
{
    items
        .into_iter()
        .fold(T::zero(), |acc, x| saturating_add_capped(acc, x, cap))
}

/// Reduce `d` modulo `range` into the half-open window `[-range/2, range/2)`.
///
/// `range` must be positive and even.
#[inline]
pub fn wrap_centered<T: PrimInt + Signed>(d: T, range: T) -> T {
    let half = range / (T::one() + T::one());
    let mut r = (d + half) % range;
    if r < T::zero() {
        r = r + range;
    }
    r - half
}

/// `x * x`, clamped to the unsigned ceiling of `T`.
#[inline]
pub fn saturating_square<T: PrimInt + Unsigned>(x: T) -> T {
    x.checked_mul(&x).unwrap_or_else(T::max_value)
}

/// `|a - b|` as an unsigned word of the same or wider width.
#[inline]
pub fn abs_diff_widened<S, U>(a: S, b: S) -> U
where
    S: PrimInt + Signed,
    U: PrimInt + Unsigned,
{
    // Widened to i128.
    let a = a.to_i128().expect("signed word fits i128");
    let b = b.to_i128().expect("signed word fits i128");
    let d = (a - b).unsigned_abs();
    U::from(d).unwrap_or_else(U::max_value)
}
