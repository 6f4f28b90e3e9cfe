//! Small named structures used throughout the tests and the CLI.

use super::structure::FinStructure;

/// Pure equality on `n` elements.
pub fn pure_set(n: usize) -> FinStructure {
    FinStructure::builder(&format!("set{n}"), n).build().expect("valid pure set")
}

/// The two-element pure set.
pub fn m2() -> FinStructure {
    pure_set(2).renamed("M2")
}

/// Directed `n`-cycle with edge relation `E`: `i -> i+1 mod n`.
pub fn cycle(n: usize) -> FinStructure {
    let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    FinStructure::builder(&format!("C{n}"), n).relation("E", 2, edges).build().expect("valid cycle")
}

pub fn c3() -> FinStructure {
    cycle(3)
}

/// Strict linear order `0 < 1 < ... < n-1`, relation named `<`.
pub fn linear_order(n: usize) -> FinStructure {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(vec![i, j]);
        }
    }
    FinStructure::builder(&format!("L{n}"), n).relation("<", 2, pairs).build().expect("valid order")
}

pub fn l3() -> FinStructure {
    linear_order(3)
}

/// Looks up `m2`, `c3`, `l3`, `setN`, `cN`, `lN` (case-insensitive).
pub fn by_name(name: &str) -> Option<FinStructure> {
    let lower = name.to_ascii_lowercase();
    let sized = |prefix: &str| lower.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok()).filter(|n| (2..=8).contains(n));
    match lower.as_str() {
        "m2" => Some(m2()),
        _ => {
            if let Some(n) = sized("set") {
                Some(pure_set(n))
            } else if let Some(n) = sized("c") {
                Some(cycle(n))
            } else {
                sized("l").map(linear_order)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named() {
        assert_eq!(c3().relation_tuples(0), vec![vec![0, 1], vec![1, 2], vec![2, 0]]);
        assert_eq!(l3().relation_tuples(0).len(), 3);
        assert_eq!(by_name("L3"), Some(l3()));
        assert_eq!(by_name("c4").map(|m| m.size()), Some(4));
        assert!(by_name("c1").is_none());
    }
}
