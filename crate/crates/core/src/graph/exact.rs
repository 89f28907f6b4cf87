//! Exhaustive search over vertex subsets, used as a test oracle.

use super::Graph;
use crate::error::{Error, Result};

pub const EXACT_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactNumbers {
    /// Independence number.
    pub alpha: usize,
    /// Clique cover number.
    pub chi_bar: usize,
    /// Domination number.
    pub psi: usize,
}

pub fn exact_small(g: &Graph) -> Result<ExactNumbers> {
    let n = g.n();
    if n > EXACT_LIMIT {
        return Err(Error::SizeLimit { n, limit: EXACT_LIMIT });
    }
    let full: u32 = (1u32 << n) - 1;
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let closed: Vec<u32> = (0..n).map(|v| nbr[v] | (1 << v)).collect();

    let is_clique = |s: u32| bits(s).all(|v| (nbr[v] | (1 << v)) & s == s);
    let is_independent = |s: u32| bits(s).all(|v| nbr[v] & s == 0);
    let dominates = |s: u32| bits(s).fold(0u32, |m, v| m | closed[v]) == full;

    let alpha = (0..=full).filter(|&s| is_independent(s)).map(u32::count_ones).max().unwrap_or(0);
    let psi = (0..=full).filter(|&s| dominates(s)).map(u32::count_ones).min().unwrap_or(0);

    // Minimum clique partition by DP over subsets; the lowest vertex of the
    // remaining set is always placed in the next clique.
    let clique: Vec<bool> = (0..=full).map(is_clique).collect();
    let mut best = vec![u8::MAX; full as usize + 1];
    best[0] = 0;
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut sub = rest;
        loop {
            let c = sub | low;
            if clique[c as usize] {
                let prev = best[(s ^ c) as usize];
                if prev != u8::MAX {
                    best[s as usize] = best[s as usize].min(prev + 1);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    Ok(ExactNumbers {
        alpha: alpha as usize,
        chi_bar: best[full as usize] as usize,
        psi: psi as usize,
    })
}

fn bits(s: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| s & (1 << i) != 0)
}
