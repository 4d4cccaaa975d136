//! p-adic integers to fixed precision, power residues, Teichmüller lifts,
//! the p-adic logarithm and Frobenius exponents in the cyclotomic
//! Z_p-extension of Q (topological generator identified with `1 + p`).

use serde::{Deserialize, Serialize};

use crate::arith::{checked_prime_power, ilog, inv_mod, is_prime, mul_mod, pow_mod, valuation};
use crate::error::{Error, Result};

/// Default p-adic precision.
pub const DEFAULT_PRECISION: u32 = 8;

/// Decides whether `l` is a `p`-th power modulo the prime `q` by Euler's
/// criterion `l^((q-1)/p) = 1 (mod q)`.
pub fn pth_power_residue(l: i64, q: u64, p: u64) -> Result<bool> {
    if !is_prime(p) || p == 2 {
        return Err(Error::NotOddPrime(p));
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q % p != 1 {
        return Err(Error::NotOneModP { q, p });
    }
    let l = l.rem_euclid(q as i64) as u64;
    if l == 0 {
        return Err(Error::NotCoprime { value: l, modulus: q });
    }
    Ok(pow_mod(l, (q - 1) / p, q) == 1)
}

/// An element of `Z/p^k`, read as a p-adic integer known to precision `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicInt {
    p: u64,
    k: u32,
    value: u64,
}

impl PadicInt {
    pub fn new(p: u64, k: u32, value: i128) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        let q = checked_prime_power(p, k).ok_or(Error::PrecisionOverflow { p, k })?;
        Ok(PadicInt { p, k, value: value.rem_euclid(q as i128) as u64 })
    }

    fn raw(p: u64, k: u32, value: u64) -> Self {
        PadicInt { p, k, value }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Valuation, capped at the precision for zero.
    pub fn valuation(&self) -> u32 {
        if self.value == 0 {
            self.k
        } else {
            valuation(self.value, self.p)
        }
    }

    pub fn is_unit(&self) -> bool {
        !self.value.is_multiple_of(self.p)
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, k: u32) -> Self {
        let k = k.min(self.k);
        Self::raw(self.p, k, self.value % self.p.pow(k))
    }

    fn coerce(&self, other: &Self) -> (u64, u32) {
        assert_eq!(self.p, other.p, "p-adic integers over different primes");
        let k = self.k.min(other.k);
        (self.p.pow(k), k)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (q, k) = self.coerce(other);
        Self::raw(self.p, k, (self.value % q + other.value % q) % q)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (q, k) = self.coerce(other);
        Self::raw(self.p, k, (self.value % q + q - other.value % q) % q)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (q, k) = self.coerce(other);
        Self::raw(self.p, k, mul_mod(self.value, other.value, q))
    }

    pub fn neg(&self) -> Self {
        let q = self.modulus();
        Self::raw(self.p, self.k, (q - self.value) % q)
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::raw(self.p, self.k, pow_mod(self.value, e, self.modulus()))
    }

    pub fn inverse(&self) -> Result<Self> {
        let q = self.modulus();
        inv_mod(self.value, q)
            .map(|v| Self::raw(self.p, self.k, v))
            .ok_or(Error::NotCoprime { value: self.value, modulus: self.p })
    }

    /// `(1+p)^self`, well defined because `(1+p)^(p^k) = 1 mod p^(k+1)`.
    pub fn exp_one_plus_p(&self) -> Self {
        Self::raw(self.p, self.k, pow_mod(1 + self.p, self.value, self.modulus()))
    }
}

impl std::fmt::Display for PadicInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.p, self.k)
    }
}

/// Teichmüller representative of `a`: the unique `(p-1)`-th root of unity
/// congruent to `a` mod `p`, as the fixed point of `x -> x^p`.
pub fn teichmuller(a: i64, p: u64, k: u32) -> Result<PadicInt> {
    let start = PadicInt::new(p, k, a as i128)?;
    if !start.is_unit() {
        return Err(Error::NotCoprime { value: start.value(), modulus: p });
    }
    let mut x = start;
    loop {
        let next = x.pow(p);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
}

/// p-adic logarithm of a principal unit, by summing the series until the
/// terms vanish at the working precision.
pub fn padic_log(u: &PadicInt) -> Result<PadicInt> {
    let (p, k) = (u.p(), u.precision());
    if u.value() % p != 1 % p {
        return Err(Error::NotPrincipalUnit(u.value()));
    }
    let x = (u.value() + u.modulus() - 1) % u.modulus();
    if x == 0 {
        return PadicInt::new(p, k, 0);
    }
    let v = valuation(x, p) as u64;
    // Terms n with n*v >= k + log_p(n) + 1 vanish; all later ones as well.
    let mut last = 1u64;
    while last * v < k as u64 + ilog(last, p) as u64 + 1 {
        last += 1;
    }
    let extra = ilog(last, p);
    let work = checked_prime_power(p, k + extra).ok_or(Error::PrecisionOverflow { p, k: k + extra })?;
    let q = u.modulus();
    let mut acc = 0u64;
    let mut power = 1u64;
    for n in 1..=last {
        power = mul_mod(power, x, work);
        let vn = valuation(n, p);
        let term = (power / p.pow(vn)) % q;
        let unit = n / p.pow(vn);
        let term = mul_mod(term, inv_mod(unit % q, q).expect("unit part of n"), q);
        acc = if n % 2 == 1 { (acc + term) % q } else { (acc + q - term) % q };
    }
    Ok(PadicInt::raw(p, k, acc))
}

/// The exponent `c_l` with `Frob_l = gamma^(c_l)` in `Gal(Q_inf/Q)`, where
/// `gamma` acts as `1 + p`: `c_l = log(l / omega(l)) / log(1 + p)`.
pub fn frobenius_exponent(l: u64, p: u64, k: u32) -> Result<PadicInt> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if l == p || l.is_multiple_of(p) {
        return Err(Error::NotCoprime { value: l, modulus: p });
    }
    if !is_prime(l) {
        return Err(Error::NotPrime(l));
    }
    let wide = k + 1;
    let omega = teichmuller((l % p) as i64, p, wide)?;
    let principal = PadicInt::new(p, wide, l as i128)?.mul(&omega.inverse()?);
    let num = padic_log(&principal)?;
    let den = padic_log(&PadicInt::new(p, wide, (1 + p) as i128)?)?;
    // both logarithms are divisible by p; log(1+p)/p is a unit
    let num = PadicInt::new(p, k, (num.value() / p) as i128)?;
    let den = PadicInt::new(p, k, (den.value() / p) as i128)?;
    Ok(num.mul(&den.inverse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_examples() {
        assert!(pth_power_residue(1, 7, 3).unwrap());
        assert!(pth_power_residue(13, 7, 3).unwrap());
        assert!(!pth_power_residue(2, 7, 3).unwrap());
        assert_eq!(pth_power_residue(2, 11, 3), Err(Error::NotOneModP { q: 11, p: 3 }));
        assert!(matches!(pth_power_residue(14, 7, 3), Err(Error::NotCoprime { .. })));
        assert!(matches!(pth_power_residue(3, 7, 2), Err(Error::NotOddPrime(2))));
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(1, 3, 8).unwrap().value(), 1);
        assert_eq!(teichmuller(2, 3, 4).unwrap().value(), 80);
        assert!(teichmuller(9, 3, 4).is_err());
        for k in 1..=10 {
            for a in 1..5i64 {
                let w = teichmuller(a, 5, k).unwrap();
                assert_eq!(w.pow(4).value(), 1);
                assert_eq!(w.value() % 5, a as u64 % 5);
            }
        }
    }

    #[test]
    fn log_of_one_is_zero() {
        assert!(padic_log(&PadicInt::new(3, 6, 1).unwrap()).unwrap().is_zero());
        assert!(padic_log(&PadicInt::new(3, 6, 2).unwrap()).is_err());
    }

    #[test]
    fn log_of_four_mod_81_by_partial_sums() {
        // Independent oracle: exact rational partial sums of the series,
        // reduced mod 3^4 once the term valuations exceed 4.
        use num_bigint::BigInt;
        use num_traits::{One, Zero};
        let q = BigInt::from(81);
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        let x = BigInt::from(3);
        for n in 1..40u32 {
            let term_num = x.pow(n) * if n % 2 == 1 { 1 } else { -1 };
            let term_den = BigInt::from(n);
            num = num * &term_den + term_num * &den;
            den *= term_den;
        }
        // strip the 3-part shared by num and den
        while (&num % 3u32).is_zero() && (&den % 3u32).is_zero() {
            num /= 3;
            den /= 3;
        }
        let den_mod = ((&den % &q) + &q) % &q;
        let den_u: u64 = den_mod.try_into().unwrap();
        let inv = BigInt::from(inv_mod(den_u, 81).unwrap());
        let expected: u64 = (((num * inv) % &q + &q) % &q).try_into().unwrap();
        let got = padic_log(&PadicInt::new(3, 4, 4).unwrap()).unwrap();
        assert_eq!(got.value(), expected);
    }

    #[test]
    fn frobenius_exponent_19_mod_729() {
        let c = frobenius_exponent(19, 3, 6).unwrap();
        // brute force: the unique c in [0, 3^5) with 4^c = 19 mod 3^6
        let brute: Vec<u64> = (0..243).filter(|&c| pow_mod(4, c, 729) == 19).collect();
        assert_eq!(brute.len(), 1);
        assert_eq!(c.value() % 243, brute[0]);
        assert_eq!(c.exp_one_plus_p().value(), 19);
    }

    #[test]
    fn frobenius_exponent_rejects_p() {
        assert!(frobenius_exponent(3, 3, 4).is_err());
        assert!(frobenius_exponent(7, 2, 4).is_err());
    }

    #[test]
    fn valuation_of_c_tracks_second_congruence() {
        for l in [7u64, 13, 19, 31, 37, 43, 61, 67, 73, 79, 97, 103, 109] {
            let c = frobenius_exponent(l, 3, 6).unwrap();
            let omega = teichmuller((l % 3) as i64, 3, 6).unwrap();
            let congruent_mod_9 = (l + 9 - omega.value() % 9).is_multiple_of(9);
            assert_eq!(c.valuation() > 0, congruent_mod_9, "l = {l}");
        }
    }
}
