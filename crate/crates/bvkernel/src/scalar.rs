//! Exact scalar arithmetic.
//!
//! Every coefficient in the kernel is a `Scalar`: an arbitrary-precision
//! rational kept in lowest terms with a positive denominator.  No floating
//! point enters any computation.

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Scalar = BigRational;

/// Integer scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// Exact fraction `num/den`.  Panics on zero denominator.
pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn is_zero(s: &Scalar) -> bool {
    s.is_zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

/// Renders `p/q` (or plain `p` for integers), the form used by reports and
/// the CLI text grammar.
pub fn render(s: &Scalar) -> String {
    if s.denom().is_one() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Parses what `render` produces.
pub fn parse(text: &str) -> Option<Scalar> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Scalar::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().ok()?;
            Some(Scalar::from_integer(n))
        }
    }
}

/// True when `s > 0`.
pub fn is_positive(s: &Scalar) -> bool {
    *s > Scalar::zero()
}
