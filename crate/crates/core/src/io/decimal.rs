use rust_decimal::{Decimal, RoundingStrategy};

use crate::error::{Error, Result};
use crate::geometry::check_coordinate;

/// Decimal digits preserved when scaling input coordinates to integers.
pub const DEFAULT_SCALE: u32 = 4;

/// Largest supported scale; `10^18` still fits an `i64`.
pub const MAX_SCALE: u32 = 18;

/// A decimal input token and its integer image `round_half_even(v * 10^scale)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledDecimal {
    pub scale: u32,
    pub text: String,
    pub scaled: i64,
}

impl ScaledDecimal {
    pub fn parse(text: &str, scale: u32) -> Result<Self> {
        Ok(Self {
            scale,
            text: text.to_string(),
            scaled: scale_decimal(text, scale)?,
        })
    }
}

fn parse_decimal(text: &str) -> Option<Decimal> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    Decimal::from_str_exact(t)
        .ok()
        .or_else(|| Decimal::from_scientific(t).ok())
}

/// Scales a decimal literal by `10^scale` and rounds half to even.
///
/// Fails with [`Error::Parse`] (line 0; callers fill in the real line) on
/// non-numeric text and [`Error::CoordinateOverflow`] when the result
/// exceeds the coordinate bound.
pub fn scale_decimal(text: &str, scale: u32) -> Result<i64> {
    if scale > MAX_SCALE {
        return Err(Error::InvalidParameter(format!(
            "scale {scale} exceeds the maximum of {MAX_SCALE}"
        )));
    }
    let value = parse_decimal(text)
        .ok_or_else(|| Error::parse(0, format!("not a decimal number: {text:?}")))?;
    let factor = Decimal::from(10i64.pow(scale));
    let overflow = || Error::CoordinateOverflow {
        value: if value.is_sign_negative() {
            i128::MIN
        } else {
            i128::MAX
        },
    };
    let scaled = value
        .checked_mul(factor)
        .ok_or_else(overflow)?
        .round_dp_with_strategy(0, RoundingStrategy::MidpointNearestEven);
    let as_int = i128::try_from(scaled).map_err(|_| overflow())?;
    check_coordinate(as_int)
}

/// Inverse of [`scale_decimal`] for values it produced: the shortest decimal
/// text of `value / 10^scale`.
pub fn format_scaled(value: i64, scale: u32) -> String {
    Decimal::new(value, scale).normalize().to_string()
}
