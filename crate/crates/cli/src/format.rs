//! CSV/JSON rendering.

use serde::Serialize;

/// Six significant digits, no exponent for ordinary magnitudes.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Rounds to four decimals through the printed representation, so that the
/// returned value reparses from its own output.
pub fn round4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float parses")
}

/// `100·|reference − approximate| / reference`.
pub fn percent_error(reference: f64, approximate: f64) -> f64 {
    100.0 * (reference - approximate).abs() / reference
}

/// Rows of string cells under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `key,value` table.
pub fn key_values(pairs: impl IntoIterator<Item = (String, String)>) -> Table {
    let mut t = Table::new(vec!["key", "value"]);
    for (k, v) in pairs {
        t.push(vec![k, v]);
    }
    t
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.111458333), "0.111458");
        assert_eq!(sig6(3.4844353317658565), "3.48444");
        assert_eq!(sig6(21.240402), "21.2404");
        assert_eq!(sig6(1234567.0), "1234567");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(-0.00012345678), "-0.000123457");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn round4_reparses() {
        assert_eq!(round4(0.109375), 0.1094);
        assert_eq!(format!("{:.4}", round4(0.18906)), "0.1891");
    }

    #[test]
    fn percent_error_convention() {
        assert!((percent_error(0.1691, 0.1890) - 11.7682).abs() < 1e-3);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }
}
