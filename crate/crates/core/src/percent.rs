//! Percentages as reported in tables: a raw share plus its two-decimal rendering.

use serde::{Deserialize, Serialize};

/// Rounds `x` to `decimals` places, ties away from zero.
pub fn round_half_away(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// `count` out of `denominator`, kept together so a percentage is never
/// reported without the number it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub count: u64,
    pub denominator: u64,
    /// Unrounded percentage, 0 when the denominator is 0.
    pub percent: f64,
    /// Percentage rendered with two decimals.
    pub display: String,
}

impl Share {
    pub fn new(count: u64, denominator: u64) -> Share {
        let percent = if denominator == 0 {
            0.0
        } else {
            count as f64 * 100.0 / denominator as f64
        };
        Share {
            count,
            denominator,
            percent,
            display: format_percent(count, denominator),
        }
    }
}

/// Renders `count / denominator` as a percentage with two decimals.
///
/// Integer arithmetic so that exact ties (e.g. 1/8 = 12.5%) never depend on
/// binary floating point.
pub fn format_percent(count: u64, denominator: u64) -> String {
    if denominator == 0 {
        return "0.00".to_string();
    }
    // hundredths of a percent, rounded half up (values are non-negative)
    let num = count as u128 * 10_000;
    let den = denominator as u128;
    let q = (2 * num + den) / (2 * den);
    format!("{}.{:02}", q / 100, q % 100)
}
