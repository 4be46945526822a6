//! Hexadecimal binary64 literals (`0x1.8p+1`), used wherever a text format
//! must round-trip an `f64` bit for bit.

use crate::error::{Error, Result};

/// Formats `v` as a C99-style hexadecimal float literal.
pub fn format(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 {
        (0, -1022)
    } else {
        (1, exp_bits - 1023)
    };
    let mut digits = format!("{mantissa:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    let esign = if exp >= 0 { "+" } else { "-" };
    format!("{sign}0x{lead}{frac}p{esign}{}", exp.abs())
}

/// Parses a hexadecimal float literal produced by [`format`]. Plain decimal
/// literals are accepted as a convenience.
pub fn parse(text: &str) -> Result<f64> {
    let s = text.trim();
    let bad = || Error::invalid(format!("not a float literal: {s:?}"));
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (mant, exp) = hex.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i64 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() || frac_part.len() > 13 {
        return Err(bad());
    }
    let lead = u64::from_str_radix(int_part, 16).map_err(|_| bad())?;
    if lead > 1 {
        return Err(bad());
    }
    let mut frac = 0u64;
    for (i, c) in frac_part.chars().enumerate() {
        let d = c.to_digit(16).ok_or_else(bad)? as u64;
        frac |= d << (48 - 4 * i);
    }
    let value = if lead == 0 {
        if frac == 0 {
            0.0
        } else {
            if exp != -1022 {
                return Err(bad());
            }
            f64::from_bits(frac)
        }
    } else {
        let biased = exp + 1023;
        if !(1..=2046).contains(&biased) {
            return Err(bad());
        }
        f64::from_bits(((biased as u64) << 52) | frac)
    };
    Ok(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(-0.5), "-0x1p-1");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(parse("0x1.8p+1").unwrap(), 3.0);
        assert_eq!(parse("0.25").unwrap(), 0.25);
        assert!(parse("0x2p+0").is_err());
    }

    proptest! {
        #[test]
        fn round_trips_every_finite_double(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back = parse(&format(v)).unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
