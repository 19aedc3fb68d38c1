//! Published listings of low-order `R_n`, used as golden references.

use crate::poly::Poly;

pub const R3: &str = "-2T_2^3";
pub const R4: &str = "-12T_2T_3^2 + 6T_2^4";
pub const R5: &str = "-20T_2T_4^2 - 30T_3^2T_4 + 120T_2^2T_3^2 - 24T_2^5";
pub const R6: &str = "120T_2^6 - 1200T_2^3T_3^2 + 210T_3^4 + 900T_2T_3^2T_4 + 300T_2^2T_4^2 \
                      - 30T_4^3 - 120T_3T_4T_5 - 30T_2T_5^2";
pub const R9: &str = include_str!("../data/r9.txt");

/// Orders that have a golden listing.
pub const ORDERS: [u32; 5] = [3, 4, 5, 6, 9];

pub fn listing(n: u32) -> Option<&'static str> {
    match n {
        3 => Some(R3),
        4 => Some(R4),
        5 => Some(R5),
        6 => Some(R6),
        9 => Some(R9),
        _ => None,
    }
}

pub fn golden(n: u32) -> Option<Poly> {
    listing(n).map(|s| s.trim().parse().expect("golden listing parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listings_parse_with_expected_sizes() {
        let sizes: Vec<usize> = ORDERS.iter().map(|&n| golden(n).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 2, 4, 8, 42]);
        assert!(golden(7).is_none());
    }
}
