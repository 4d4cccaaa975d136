//! Search for `(p+1)`-tuples of primes `l_i = 1 mod p` that are pairwise
//! `p`-th power residues of one another.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, pow_mod, primes_below};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuenstigeTuple {
    pub p: u64,
    pub primes: Vec<u64>,
    /// `evidence[i][j]`: `l_i` is a `p`-th power mod `l_j` (diagonal is `true`)
    pub evidence: Vec<Vec<bool>>,
}

fn check_p(p: u64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

#[inline]
fn is_residue(l: u64, q: u64, p: u64) -> bool {
    pow_mod(l, (q - 1) / p, q) == 1
}

pub fn verify_tuple(primes: &[u64], p: u64) -> Result<GuenstigeTuple> {
    check_p(p)?;
    let n = p as usize + 1;
    if primes.len() != n {
        return Err(Error::Arity { expected: n, got: primes.len() });
    }
    for (i, &l) in primes.iter().enumerate() {
        if primes[..i].contains(&l) {
            return Err(Error::Duplicate(l));
        }
    }
    for &l in primes {
        if !is_prime(l) {
            return Err(Error::NotPrime(l));
        }
        if l == p {
            return Err(Error::NotCoprime { value: l, modulus: p });
        }
        if l % p != 1 {
            return Err(Error::NotOneModP { q: l, p });
        }
    }
    let mut evidence = vec![vec![true; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if !is_residue(primes[i], primes[j], p) {
                return Err(Error::NotResidue { l: primes[i], q: primes[j], p });
            }
            evidence[i][j] = true;
        }
    }
    Ok(GuenstigeTuple { p, primes: primes.to_vec(), evidence })
}

/// Lexicographically smallest good tuples with all entries below `bound`.
pub fn prospect(p: u64, bound: u64, max_results: usize) -> Result<Vec<GuenstigeTuple>> {
    check_p(p)?;
    let size = p as usize + 1;
    let primes: Vec<u64> = primes_below(bound).into_iter().filter(|&q| q % p == 1).collect();
    if primes.len() < size || max_results == 0 {
        return Ok(Vec::new());
    }
    // symmetric adjacency, one row per prime
    let adj: Vec<Vec<bool>> = primes
        .par_iter()
        .map(|&a| {
            primes
                .iter()
                .map(|&b| a != b && is_residue(a, b, p) && is_residue(b, a, p))
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(size);
    let all: Vec<usize> = (0..primes.len()).collect();
    search(&adj, &all, size, &mut chosen, &mut |clique| {
        let tuple: Vec<u64> = clique.iter().map(|&i| primes[i]).collect();
        out.push(verify_tuple(&tuple, p).expect("clique entries are pairwise residues"));
        out.len() < max_results
    });
    Ok(out)
}

/// Ordered DFS over cliques; `emit` returns false to stop.
fn search(
    adj: &[Vec<bool>],
    candidates: &[usize],
    size: usize,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if chosen.len() == size {
        return emit(chosen);
    }
    let need = size - chosen.len();
    for (pos, &v) in candidates.iter().enumerate() {
        if candidates.len() - pos < need {
            break;
        }
        let next: Vec<usize> = candidates[pos + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
        if next.len() + 1 < need {
            continue;
        }
        chosen.push(v);
        let go_on = search(adj, &next, size, chosen, emit);
        chosen.pop();
        if !go_on {
            return false;
        }
    }
    true
}
