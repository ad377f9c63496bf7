use super::{parse, Flip, TrickExpr};
use crate::error::{Error, Result};

const ENTRIES: [(&str, &str); 14] = [
    ("ollie", "O"),
    ("shoveit", "S"),
    ("fs-shoveit", "S^-1"),
    ("360-shoveit", "S^2"),
    ("fs-360-shoveit", "S^-2"),
    ("540-shoveit", "S^3"),
    ("fs-540-shoveit", "S^-3"),
    ("kickflip", "K"),
    ("double-kickflip", "K^2"),
    ("heelflip", "K^-1"),
    ("varial-kickflip", "S*K"),
    ("360-flip", "S^2*K"),
    ("varial-heelflip", "S^-1*K^-1"),
    ("hardflip", "U*(K@0.5)"),
];

/// The named tricks, in a fixed order.
pub fn catalog() -> Vec<(&'static str, TrickExpr)> {
    ENTRIES
        .iter()
        .map(|(name, src)| (*name, parse(src).expect("catalog entries parse")))
        .collect()
}

pub fn lookup(name: &str) -> Result<TrickExpr> {
    ENTRIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse(src).expect("catalog entries parse"))
        .ok_or_else(|| Error::UnknownTrick(name.to_string()))
}

/// Every catalog entry as a validated flip named after the trick.
pub fn catalog_flips() -> Vec<Flip> {
    catalog()
        .into_iter()
        .map(|(name, expr)| {
            Flip::from_expr(expr)
                .expect("catalog entries are flips")
                .with_name(name)
        })
        .collect()
}
