//! The biquadratic-type `(Z/p)^2` field attached to a good tuple of primes.

use serde::Serialize;

use super::{AbelianField, SubgroupLattice, UnitGroup};
use crate::error::{Error, Result};
use crate::prospector::verify_tuple;

/// Canonical representatives of the `p + 1` lines of `(Z/p)^2`:
/// `(1, b)` for `b < p`, then `(0, 1)`.
pub fn canonical_lines(p: u64) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = (0..p).map(|b| (1, b)).collect();
    out.push((0, 1));
    out
}

fn line_of(v: (u64, u64), p: u64) -> usize {
    let (a, b) = (v.0 % p, v.1 % p);
    if a == 0 {
        return p as usize;
    }
    let inv = crate::arith::inv_mod(a, p).expect("nonzero mod p");
    (b * inv % p) as usize
}

/// `K` with `Gal(K/Q) = (Z/p)^2`, together with its `p + 1` subfields of degree `p`.
///
/// `Gal(K/Q)` is identified with `(Z/p)^2` through `x -> sum_i chi_i(x) v_i`,
/// where `chi_i` is the discrete log mod `p` at `l_i` and `v_i` spans line `i`.
/// Line `i` is then the inertia group of `l_i`, and `subfields[i]` is its fixed field.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleField {
    pub p: u64,
    pub primes: Vec<u64>,
    pub vectors: Vec<(u64, u64)>,
    pub field: AbelianField,
    pub subfields: Vec<AbelianField>,
}

impl CounterexampleField {
    /// Coordinates in `(Z/p)^2` of the automorphism attached to the unit `x` mod `f`.
    pub fn galois_coordinates(&self, x: u64) -> (u64, u64) {
        let group = self.field.unit_group();
        let logs = group.log(x % group.modulus());
        let p = self.p;
        let (mut a, mut b) = (0u64, 0u64);
        for (l, v) in self.primes.iter().zip(&self.vectors) {
            let idx = group.factor_of_prime(*l).expect("l_i divides the modulus");
            let chi = logs[idx] % p;
            a = (a + chi * v.0) % p;
            b = (b + chi * v.1) % p;
        }
        (a, b)
    }

    /// Conditions 1 to 4 of the construction, checked from scratch.
    pub fn verify(&self) -> Result<()> {
        let p = self.p;
        let f: u64 = self.primes.iter().product();
        if self.field.degree() != p * p {
            return Err(Error::Construction(format!("degree {} instead of {}", self.field.degree(), p * p)));
        }
        if self.field.conductor() != f {
            return Err(Error::Construction(format!("conductor {} instead of {f}", self.field.conductor())));
        }
        for (j, sub) in self.subfields.iter().enumerate() {
            let expect = f / self.primes[j];
            if sub.degree() != p || sub.conductor() != expect {
                return Err(Error::Construction(format!(
                    "subfield {j}: degree {}, conductor {} (expected {p}, {expect})",
                    sub.degree(),
                    sub.conductor()
                )));
            }
            if !sub.is_subfield_of(&self.field) {
                return Err(Error::Construction(format!("subfield {j} is not contained in K")));
            }
            if !sub.frobenius_class(self.primes[j])?.is_trivial() {
                return Err(Error::Construction(format!("Frobenius of {} is not trivial in K^{j}", self.primes[j])));
            }
        }
        Ok(())
    }
}

pub fn build_counterexample_field(tuple: &[u64], p: u64) -> Result<CounterexampleField> {
    verify_tuple(tuple, p)?;
    let f: u64 = tuple.iter().product();
    let group = UnitGroup::new(f);
    let orders = group.orders();
    let lines = canonical_lines(p);
    // each line must contain exactly one v_i, so v_i is forced up to scaling
    let vectors: Vec<(u64, u64)> = lines.clone();
    let mut hit = vec![0usize; lines.len()];
    for v in &vectors {
        hit[line_of(*v, p)] += 1;
    }
    if hit.iter().any(|&c| c != 1) {
        return Err(Error::Construction("no admissible vector assignment".into()));
    }
    let idx: Vec<usize> = tuple
        .iter()
        .map(|&l| group.factor_of_prime(l).ok_or_else(|| Error::Construction(format!("{l} missing from the unit group"))))
        .collect::<Result<_>>()?;
    let functional = |lambda: (u64, u64)| -> Vec<i128> {
        let mut c = vec![0i128; orders.len()];
        for (v, &i) in vectors.iter().zip(&idx) {
            c[i] = ((lambda.0 * v.0 + lambda.1 * v.1) % p) as i128;
        }
        c
    };
    let whole = SubgroupLattice::whole(&orders);
    let h = whole
        .intersect_functional(&functional((1, 0)), p)
        .intersect_functional(&functional((0, 1)), p);
    let field = AbelianField::from_parts(group.clone(), h);
    let subfields = lines
        .iter()
        .map(|&(x, y)| {
            // lambda vanishes exactly on the line spanned by (x, y)
            let lambda = ((p - y) % p, x);
            AbelianField::from_parts(group.clone(), whole.intersect_functional(&functional(lambda), p))
        })
        .collect();
    let out = CounterexampleField { p, primes: tuple.to_vec(), vectors, field, subfields };
    out.verify()?;
    Ok(out)
}
