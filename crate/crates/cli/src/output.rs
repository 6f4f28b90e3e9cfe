use std::sync::LazyLock;

use randlab_core::rational::{fmt_decimal, parse_rational};
use regex::{Captures, Regex};

static RATIONAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-?\b\d+/\d+\b").expect("valid pattern"));

/// The line with every `p/q` literal shown to `digits` decimal places.
pub fn render(line: &str, digits: Option<usize>) -> String {
    let Some(k) = digits else {
        return line.to_string();
    };
    RATIONAL
        .replace_all(line, |c: &Captures| match parse_rational(&c[0]) {
            Ok(r) => fmt_decimal(&r, k),
            Err(_) => c[0].to_string(),
        })
        .into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_by_default() {
        assert_eq!(render("PASS x 1/3", None), "PASS x 1/3");
    }

    #[test]
    fn decimals() {
        assert_eq!(render("rtype { q0: 1/3, q1: 2/3 }", Some(3)), "rtype { q0: 0.333, q1: 0.667 }");
        assert_eq!(render("-1/2", Some(2)), "-0.50");
    }

    #[test]
    fn symbol_arities_untouched() {
        assert_eq!(render("relation R/2 = {(0,1)}; function f/1", Some(2)), "relation R/2 = {(0,1)}; function f/1");
    }
}
