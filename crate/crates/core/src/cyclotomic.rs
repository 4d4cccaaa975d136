//! Exact arithmetic in `Z[zeta_m]`, Galois action, norms and circular numbers.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use rayon::prelude::*;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factorize, gcd, inv_mod, is_prime, mul_mod};
use crate::error::{Error, Result};
use crate::fields::AbelianField;

/// Largest ambient modulus accepted by default.
pub const DEFAULT_CONDUCTOR_CAP: u64 = 512;

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both monic, coefficients low to high
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![0i64; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Coefficients of the cyclotomic polynomial `Phi_m`, low degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in crate::arith::divisors(m) {
        if d < m {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

/// An element of `Z[zeta_m]` in the power basis `1, x, ..., x^(phi(m)-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycloElt {
    m: u64,
    coeffs: Vec<BigInt>,
}

impl CycloElt {
    /// Reduce a vector indexed by exponents mod `m` (length `m`) modulo `Phi_m`.
    fn from_cyclic(m: u64, mut full: Vec<BigInt>) -> Self {
        let phi_poly = cyclotomic_polynomial(m);
        let deg = phi_poly.len() - 1;
        for i in (deg..full.len()).rev() {
            if full[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut full[i]);
            for (j, &a) in phi_poly[..deg].iter().enumerate() {
                if a != 0 {
                    full[i - deg + j] -= &c * a;
                }
            }
        }
        full.truncate(deg);
        CycloElt { m, coeffs: full }
    }

    fn cyclic_from_terms(m: u64, terms: impl IntoIterator<Item = (u64, BigInt)>) -> Self {
        let mut full = vec![BigInt::zero(); m as usize];
        for (e, c) in terms {
            full[(e % m) as usize] += c;
        }
        Self::from_cyclic(m, full)
    }

    pub fn zero(m: u64) -> Self {
        assert!(m >= 1);
        CycloElt { m, coeffs: vec![BigInt::zero(); euler_phi(m) as usize] }
    }

    pub fn integer(m: u64, n: i64) -> Self {
        Self::cyclic_from_terms(m, [(0, BigInt::from(n))])
    }

    pub fn one(m: u64) -> Self {
        Self::integer(m, 1)
    }

    /// `zeta_m^a`.
    pub fn zeta_power(m: u64, a: i64) -> Self {
        Self::cyclic_from_terms(m, [(a.rem_euclid(m as i64) as u64, BigInt::one())])
    }

    /// `1 - zeta_m^a`.
    pub fn one_minus_zeta(m: u64, a: i64) -> Self {
        let e = a.rem_euclid(m as i64) as u64;
        Self::cyclic_from_terms(m, [(0, BigInt::one()), (e, -BigInt::one())])
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs.first().cloned().unwrap_or_default())
        } else {
            None
        }
    }

    fn same_ring(&self, other: &Self) {
        assert_eq!(self.m, other.m, "elements of different cyclotomic rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ring(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        CycloElt { m: self.m, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_ring(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        CycloElt { m: self.m, coeffs }
    }

    pub fn neg(&self) -> Self {
        CycloElt { m: self.m, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ring(other);
        let m = self.m as usize;
        let mut full = vec![BigInt::zero(); m];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % m] += a * b;
                }
            }
        }
        Self::from_cyclic(self.m, full)
    }

    /// Image under `Z[zeta_r] -> Z[zeta_s]`, `zeta_r -> zeta_s^(s/r)`.
    pub fn embed(&self, s: u64) -> Result<Self> {
        if !s.is_multiple_of(self.m) {
            return Err(Error::InvalidArgument(format!("{} does not divide {s}", self.m)));
        }
        let step = s / self.m;
        Ok(Self::cyclic_from_terms(
            s,
            self.coeffs.iter().enumerate().map(|(j, c)| (j as u64 * step, c.clone())),
        ))
    }

    /// Largest absolute coefficient, as a rough size measure.
    pub fn height(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

/// `sigma_a : zeta_m -> zeta_m^a`.
pub fn galois_apply(a: i64, x: &CycloElt) -> Result<CycloElt> {
    let m = x.m;
    let a = a.rem_euclid(m as i64) as u64;
    if gcd(a, m) != 1 && m > 1 {
        return Err(Error::NotCoprime { value: a, modulus: m });
    }
    Ok(CycloElt::cyclic_from_terms(
        m,
        x.coeffs.iter().enumerate().map(|(j, c)| (mul_mod(j as u64, a, m), c.clone())),
    ))
}

/// Closure of the given residues under multiplication mod `m`.
pub fn subgroup_closure(m: u64, generators: &[u64]) -> Result<Vec<u64>> {
    for &g in generators {
        if gcd(g % m, m) != 1 && m > 1 {
            return Err(Error::NotCoprime { value: g, modulus: m });
        }
    }
    let mut seen = BTreeSet::from([1 % m]);
    let mut frontier = vec![1 % m];
    while let Some(x) = frontier.pop() {
        for &g in generators {
            let y = mul_mod(x, g % m, m);
            if seen.insert(y) {
                frontier.push(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// `prod_{a in H} sigma_a(x)` for `H` generated by `generators` in `(Z/m)^x`.
pub fn relative_norm(x: &CycloElt, generators: &[u64]) -> Result<CycloElt> {
    let h = subgroup_closure(x.m, generators)?;
    norm_over(x, &h)
}

fn norm_over(x: &CycloElt, elements: &[u64]) -> Result<CycloElt> {
    let mut acc = CycloElt::one(x.m);
    for &a in elements {
        acc = acc.mul(&galois_apply(a as i64, x)?);
    }
    Ok(acc)
}

fn check_cap(m: u64, cap: u64) -> Result<()> {
    if m > cap {
        return Err(Error::ModulusTooLarge { m, cap });
    }
    Ok(())
}

/// `N_{Q(zeta_m) / K ∩ Q(zeta_m)}(1 - zeta_m^a)`.
pub fn epsilon_number(field: &AbelianField, m: u64, a: i64) -> Result<CycloElt> {
    epsilon_number_capped(field, m, a, DEFAULT_CONDUCTOR_CAP)
}

pub fn epsilon_number_capped(field: &AbelianField, m: u64, a: i64, cap: u64) -> Result<CycloElt> {
    if m <= 1 {
        return Err(Error::InvalidArgument("m must exceed 1".into()));
    }
    if a.rem_euclid(m as i64) == 0 {
        return Err(Error::InvalidArgument(format!("{m} divides {a}")));
    }
    check_cap(m, cap)?;
    let h = field.fixing_group_mod(m)?.fixing_elements();
    norm_over(&CycloElt::one_minus_zeta(m, a), &h)
}

/// The distribution relation between levels `r | s`:
/// `N_{Q(zeta_s)/Q(zeta_r)}(1 - zeta_s) = (1 - zeta_r)^{prod_l (1 - sigma_l^-1)}`,
/// `l` running over primes dividing `s` but not `r`. The right side is cleared
/// of denominators and both sides are compared in `Z[zeta_s]`.
pub fn verify_distribution(r: u64, s: u64) -> Result<bool> {
    verify_distribution_capped(r, s, DEFAULT_CONDUCTOR_CAP, false)
}

/// As [`verify_distribution`]; `corrupt` perturbs the left side as a negative control.
pub fn verify_distribution_capped(r: u64, s: u64, cap: u64, corrupt: bool) -> Result<bool> {
    if r <= 2 {
        return Err(Error::InvalidArgument(format!("r = {r} must exceed 2")));
    }
    if !s.is_multiple_of(r) || s <= r {
        return Err(Error::InvalidArgument(format!("s = {s} must be a proper multiple of r = {r}")));
    }
    check_cap(s, cap)?;
    let gal: Vec<u64> = (1..s).filter(|&a| gcd(a, s) == 1 && a % r == 1).collect();
    let mut lhs = norm_over(&CycloElt::one_minus_zeta(s, 1), &gal)?;
    if corrupt {
        lhs = lhs.add(&CycloElt::one(s));
    }
    let new_primes: Vec<u64> = factorize(s).into_iter().map(|(l, _)| l).filter(|l| !r.is_multiple_of(*l)).collect();
    let step = (s / r) as i64;
    let mut even = CycloElt::one(s);
    let mut odd = CycloElt::one(s);
    for mask in 0u32..(1 << new_primes.len()) {
        let mut prod = 1u64;
        for (i, &l) in new_primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod = mul_mod(prod, l, r);
            }
        }
        // sigma_prod^-1 (1 - zeta_r) = 1 - zeta_r^(prod^-1)
        let b = inv_mod(prod, r).expect("new primes are prime to r") as i64;
        let term = CycloElt::one_minus_zeta(s, step * b);
        if mask.count_ones() % 2 == 0 {
            even = even.mul(&term);
        } else {
            odd = odd.mul(&term);
        }
    }
    Ok(lhs.mul(&odd) == even)
}

/// The norm identity between the circular numbers of `F` and of the first
/// layer `F_1` of its cyclotomic `Z_p`-extension.
pub fn verify_norm_tower(field: &AbelianField, p: u64) -> Result<bool> {
    verify_norm_tower_capped(field, p, DEFAULT_CONDUCTOR_CAP)
}

pub fn verify_norm_tower_capped(field: &AbelianField, p: u64, cap: u64) -> Result<bool> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let base = field.at_conductor();
    let f = base.conductor();
    let layer = base.first_layer(p)?.at_conductor();
    let f1 = layer.conductor();
    check_cap(f1, cap)?;
    let eps1 = epsilon_number_capped(&layer, f1, 1, cap)?;
    // coset representatives of Gal(F_1/F) inside (Z/f1)^x
    let h_f = base.fixing_group_mod(f1)?.fixing_elements();
    let mut reps: Vec<u64> = Vec::new();
    for &a in &h_f {
        let fresh = reps.iter().all(|&b| {
            let ratio = mul_mod(a, inv_mod(b, f1).expect("unit"), f1);
            !layer.fixes(ratio)
        });
        if fresh {
            reps.push(a);
        }
    }
    if reps.len() as u64 != p {
        return Err(Error::Construction(format!("[F_1 : F] = {} instead of {p}", reps.len())));
    }
    let lhs = norm_over(&eps1, &reps)?;
    if f == 1 {
        return Ok(lhs == CycloElt::integer(f1, p as i64));
    }
    let eps = epsilon_number_capped(&base, f, 1, cap)?;
    if f.is_multiple_of(p) {
        return Ok(lhs == eps.embed(f1)?);
    }
    // lhs = eps^(1 - sigma_p^-1), cleared of the denominator
    let p_inv = inv_mod(p % f, f).expect("p is prime to f") as i64;
    let twisted = galois_apply(p_inv, &eps)?;
    Ok(lhs.mul(&twisted.embed(f1)?) == eps.embed(f1)?)
}

/// One pair of a distribution sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionCase {
    pub r: u64,
    pub s: u64,
    pub holds: bool,
}

/// [`verify_distribution_capped`] for every `r | s` with `2 < r < s <= max_s`,
/// in parallel, sorted by `(s, r)`.
pub fn distribution_sweep(max_s: u64, cap: u64, corrupt: bool) -> Result<Vec<DistributionCase>> {
    check_cap(max_s, cap)?;
    let pairs: Vec<(u64, u64)> =
        (4..=max_s).flat_map(|s| (3..s).filter(move |r| s % r == 0).map(move |r| (r, s))).collect();
    pairs
        .into_par_iter()
        .map(|(r, s)| Ok(DistributionCase { r, s, holds: verify_distribution_capped(r, s, cap, corrupt)? }))
        .collect()
}
