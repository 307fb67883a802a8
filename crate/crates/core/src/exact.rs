//! Small helpers for exact big-integer / rational arithmetic and its
//! canonical string forms ("p/q" for rationals, plain decimal for integers).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// 2^k as a big integer.
pub fn pow2(k: u32) -> BigInt {
    BigInt::one() << (k as usize)
}

/// Exact rational from machine integers.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical "p/q" form, always reduced and always carrying the denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses "p/q" or a bare integer "p". Whitespace is not accepted.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let mk_int = |txt: &str| -> Result<BigInt, String> {
        txt.parse::<BigInt>()
            .map_err(|e| format!("bad integer {txt:?}: {e}"))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = mk_int(q)?;
            if den.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(mk_int(p)?, den))
        }
        None => Ok(BigRational::from_integer(mk_int(s)?)),
    }
}

/// Decimal approximation for display only; exact values stay rational.
pub fn approx_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a decimal string into a big integer, rejecting empty input.
pub fn parse_bigint(s: &str) -> Result<BigInt, String> {
    s.parse::<BigInt>().map_err(|e| format!("bad integer {s:?}: {e}"))
}

/// True when the rational is ≥ 0.
pub fn is_nonnegative(r: &BigRational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let r = ratio(315, 512);
        assert_eq!(format_rational(&r), "315/512");
        assert_eq!(parse_rational("315/512").unwrap(), r);
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert_eq!(format_rational(&ratio(0, 7)), "0/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn pow2_small() {
        assert_eq!(pow2(0), BigInt::from(1));
        assert_eq!(pow2(5), BigInt::from(32));
    }
}
