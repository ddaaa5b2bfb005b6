//! The Boolean lattice of subsets of `[n] = {1, ..., n}`.
//!
//! Subsets are bitmasks with element `j` stored in bit `j - 1`.

use dashu_int::UBig;
use num_rational::Ratio;

use crate::domain::{Density, Element};
use crate::error::{Error, Result};

/// Largest `n` for which layers and decompositions are materialized.
pub const MAX_LATTICE_N: usize = 20;

pub fn binomial(n: u64, k: u64) -> Element {
    if k > n {
        return Element::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = UBig::ONE;
    for i in 0..k {
        acc = acc * UBig::from(n - i) / UBig::from(i + 1);
    }
    Element::from_ubig(acc)
}

/// Width of the subset lattice of `[z]`: `C(z, floor(z/2))`.
pub fn sperner_width(z: u64) -> Element {
    binomial(z, z / 2)
}

fn width_u64(z: u64) -> Result<u64> {
    sperner_width(z).as_u64().ok_or(Error::SizeLimit { n: z as usize, max: 66 })
}

/// Elements of the subset encoded by `mask`, in increasing order.
pub fn mask_elements(mask: u64) -> Vec<usize> {
    (0..64).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect()
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_LATTICE_N {
        return Err(Error::SizeLimit { n, max: MAX_LATTICE_N });
    }
    Ok(())
}

/// All subsets of `[n]` of size `floor(n/2)`, in increasing mask order.
pub fn middle_layer(n: usize) -> Result<Vec<u64>> {
    check_n(n)?;
    let half = (n / 2) as u32;
    Ok((0u64..1 << n).filter(|m| m.count_ones() == half).collect())
}

/// Whether no member of `family` contains another.
pub fn is_antichain(family: &[u64]) -> bool {
    family.iter().enumerate().all(|(i, &a)| family[i + 1..].iter().all(|&b| a & b != a && a & b != b))
}

/// Positions left unmatched by the bracketing rule: bit `0` opens, bit `1`
/// closes the nearest open position. Returns the unmatched closing and
/// opening positions.
fn unmatched(mask: u64, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut open = Vec::new();
    let mut closing = Vec::new();
    for j in 0..n {
        if mask >> j & 1 == 1 {
            if open.pop().is_none() {
                closing.push(j);
            }
        } else {
            open.push(j);
        }
    }
    (closing, open)
}

/// Symmetric chain decomposition of the subsets of `[n]`.
///
/// Each chain is listed bottom-up; chains are ordered by their bottom mask.
pub fn symmetric_chain_decomposition(n: usize) -> Result<Vec<Vec<u64>>> {
    check_n(n)?;
    let mut chains = Vec::new();
    for mask in 0u64..1 << n {
        let (closing, open) = unmatched(mask, n);
        if !closing.is_empty() {
            continue;
        }
        let mut chain = Vec::with_capacity(open.len() + 1);
        let mut cur = mask;
        chain.push(cur);
        for &j in &open {
            cur |= 1 << j;
            chain.push(cur);
        }
        chains.push(chain);
    }
    Ok(chains)
}

/// Best guaranteed upper density of a memoryless generator against every
/// collection of `k` languages: `1` for `k = 1`, else `1 / C(k-1, floor((k-1)/2))`.
pub fn minimax_memoryless(k: u64) -> Result<Density> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if k == 1 {
        return Ok(Ratio::from_integer(1));
    }
    Ok(Ratio::new(1, width_u64(k - 1)?))
}

/// Best guaranteed upper density with a buffer of `b` stored elements, and
/// its improvement over the memoryless value.
pub fn minimax_buffer(k: u64, b: u64) -> Result<(Density, Ratio<u64>)> {
    let base = minimax_memoryless(k)?;
    let value = if b + 2 >= k { Ratio::from_integer(1) } else { Ratio::new(1, width_u64(k - b - 1)?) };
    Ok((value, value / base))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        let w: Vec<u64> = (0..=10).map(|z| sperner_width(z).as_u64().unwrap()).collect();
        assert_eq!(w, [1, 1, 2, 3, 6, 10, 20, 35, 70, 126, 252]);
        assert_eq!(sperner_width(100).to_string(), "100891344545564193334812497256");
    }

    #[test]
    fn small_layers_and_chains() {
        assert_eq!(middle_layer(4).unwrap(), [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(symmetric_chain_decomposition(2).unwrap(), vec![vec![0b00, 0b01, 0b11], vec![0b10]]);
        let sizes: Vec<usize> = symmetric_chain_decomposition(3).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, [4, 2, 2]);
        assert!(matches!(middle_layer(21), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn minimax_values() {
        let vals: Vec<Density> = (1..=6).map(|k| minimax_memoryless(k).unwrap()).collect();
        let want = [(1, 1), (1, 1), (1, 2), (1, 3), (1, 6), (1, 10)].map(|(a, b)| Ratio::new(a, b));
        assert_eq!(vals, want);
        assert_eq!(minimax_buffer(5, 1).unwrap(), (Ratio::new(1, 3), Ratio::from_integer(2)));
        assert_eq!(minimax_buffer(5, 2).unwrap(), (Ratio::new(1, 2), Ratio::from_integer(3)));
        assert_eq!(minimax_buffer(5, 3).unwrap().0, Ratio::from_integer(1));
        assert_eq!(minimax_buffer(6, 4).unwrap(), (Ratio::from_integer(1), Ratio::from_integer(10)));
    }
}
