use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

/// Exact scalar used throughout the term algebra.
///
/// `BigRational` keeps the canonical form we rely on: the denominator is
/// always positive and gcd(|numerator|, denominator) = 1, so equality is
/// structural and results are reproducible bit for bit.
pub type Rational = BigRational;

/// `n / d` as a canonical rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses a rational coefficient literal.
///
/// Accepts integers (`-3`), fractions (`2/3`), and decimals (`0.5`), the
/// latter converted exactly (`0.5` becomes `1/2`, never a float).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(pos) = s.find(['e', 'E']) {
        let mantissa = parse_rational(&s[..pos])?;
        let exp: i32 = s[pos + 1..].parse().ok()?;
        let ten = BigInt::from(10u32).pow(exp.unsigned_abs());
        let factor = if exp >= 0 {
            BigRational::from_integer(ten)
        } else {
            BigRational::new(BigInt::one(), ten)
        };
        return Some(mantissa * factor);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.is_empty() && !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().ok()?
        };
        let frac: BigInt = frac_part.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mut value = BigRational::from_integer(whole) + BigRational::new(frac, scale);
        if negative {
            value = -value;
        }
        return Some(value);
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Formats a rational the way the objective grammar accepts it back.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational to nearest f64 (used only at the tabular boundary).
pub fn to_f64(r: &Rational) -> f64 {
    // num's ToPrimitive on BigRational is lossy for huge terms; the
    // coefficients we convert stay small, so numer/denom via f64 is exact
    // enough for evaluation purposes.
    let n = bigint_to_f64(r.numer());
    let d = bigint_to_f64(r.denom());
    n / d
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    let s = b.to_string();
    s.parse::<f64>().expect("bigint decimal form parses as f64")
}

#[cfg(test)]
pub(crate) fn is_canonical(r: &Rational) -> bool {
    use num::{Integer, Signed};
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
        || (r.numer().is_zero() && r.denom().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_convert_exactly() {
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-2.25").unwrap(), rat(-9, 4));
        assert_eq!(parse_rational("3").unwrap(), rat_int(3));
        assert_eq!(parse_rational("2/6").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
        assert_eq!(parse_rational("1.2e3").unwrap(), rat_int(1200));
        assert_eq!(parse_rational("5e-4").unwrap(), rat(1, 2000));
    }

    #[test]
    fn arithmetic_stays_canonical() {
        let a = rat(3, 6) + rat(1, 6); // 2/3
        assert_eq!(a, rat(2, 3));
        assert!(is_canonical(&a));
        let b = rat(1, 2) - rat(1, 2);
        assert!(b.numer().is_zero());
        assert!(is_canonical(&b));
    }

    #[test]
    fn round_trip_format() {
        for text in ["0", "7", "-3", "1/2", "-22/7"] {
            let r = parse_rational(text).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
