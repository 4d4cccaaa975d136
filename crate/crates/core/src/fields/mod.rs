//! Abelian number fields as fixing subgroups `H <= (Z/f)^x`.

mod counterexample;
mod lattice;
mod units;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, lcm, mul_mod, valuation};
use crate::error::{Error, Result};

pub use counterexample::{build_counterexample_field, canonical_lines, CounterexampleField};
pub use lattice::SubgroupLattice;
pub use units::{lift_unit, UnitGroup};

/// The field cut out by `H` inside `Q(zeta_f)`.
#[derive(Debug, Clone)]
pub struct AbelianField {
    group: UnitGroup,
    h: SubgroupLattice,
    conductor: u64,
}

/// A coset of `H` in `(Z/f)^x`, i.e. an element of `Gal(K/Q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisClass {
    modulus: u64,
    representative: u64,
    /// log vector reduced against the Hermite basis of `H`; canonical per coset
    residue: Vec<i128>,
}

impl GaloisClass {
    pub fn representative(&self) -> u64 {
        self.representative
    }

    pub fn is_trivial(&self) -> bool {
        self.residue.iter().all(|&a| a == 0)
    }

    pub fn residue(&self) -> &[i128] {
        &self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

fn reduce_against(h: &SubgroupLattice, v: &[i128]) -> Vec<i128> {
    let mut v = v.to_vec();
    for (j, row) in h.basis().iter().enumerate() {
        let f = v[j].div_euclid(row[j]);
        if f != 0 {
            for (a, b) in v.iter_mut().zip(row) {
                *a -= f * b;
            }
        }
    }
    v
}

impl AbelianField {
    /// The subfield of `Q(zeta_f)` fixed by the subgroup generated by `generators`.
    pub fn new(modulus: u64, generators: &[u64]) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let group = UnitGroup::new(modulus);
        let mut logs = Vec::with_capacity(generators.len());
        for &g in generators {
            if !group.is_unit(g) {
                return Err(Error::NotCoprime { value: g, modulus });
            }
            logs.push(group.log(g % modulus).into_iter().map(|a| a as i128).collect());
        }
        let h = SubgroupLattice::from_generators(&group.orders(), &logs);
        Ok(Self::from_parts(group, h))
    }

    /// `Q(zeta_f)` itself.
    pub fn cyclotomic(modulus: u64) -> Result<Self> {
        Self::new(modulus, &[])
    }

    pub fn rationals() -> Self {
        Self::new(1, &[]).expect("trivial modulus")
    }

    pub(crate) fn from_parts(group: UnitGroup, h: SubgroupLattice) -> Self {
        let mut field = AbelianField { group, h, conductor: 0 };
        field.conductor = field.compute_conductor();
        field
    }

    fn compute_conductor(&self) -> u64 {
        for d in divisors(self.modulus()) {
            if self.group.reduction_kernel(d).iter().all(|v| self.h.contains(v)) {
                return d;
            }
        }
        self.modulus()
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn unit_group(&self) -> &UnitGroup {
        &self.group
    }

    pub fn fixing_lattice(&self) -> &SubgroupLattice {
        &self.h
    }

    /// `[K : Q] = [(Z/f)^x : H]`.
    pub fn degree(&self) -> u64 {
        self.h.index() as u64
    }

    /// Generators of `H` as residues mod `f`, sorted, without the identity.
    pub fn generators(&self) -> Vec<u64> {
        let m = self.modulus();
        let mut out: Vec<u64> = self
            .h
            .basis()
            .iter()
            .map(|row| self.group.element(row))
            .filter(|&x| x != 1 % m)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn fixes(&self, x: u64) -> bool {
        let v: Vec<i128> = self.group.log(x % self.modulus()).into_iter().map(|a| a as i128).collect();
        self.h.contains(&v)
    }

    /// All elements of `H`; only sensible for small moduli.
    pub fn fixing_elements(&self) -> Vec<u64> {
        let m = self.modulus();
        let gens = self.generators();
        let mut seen = std::collections::BTreeSet::from([1 % m]);
        let mut frontier = vec![1 % m];
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = mul_mod(x, g, m);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// The class of `l` in `Gal(K/Q)`; `l` must be unramified in `K`.
    pub fn frobenius_class(&self, l: u64) -> Result<GaloisClass> {
        let cond = self.conductor;
        if gcd(l, cond) != 1 {
            return Err(Error::Ramified { l, conductor: cond });
        }
        let x = lift_unit(l, cond.max(1), self.modulus());
        let v: Vec<i128> = self.group.log(x).into_iter().map(|a| a as i128).collect();
        Ok(GaloisClass { modulus: cond, representative: l % cond.max(1), residue: reduce_against(&self.h, &v) })
    }

    /// The same field described at modulus `m`, where `f | m`.
    pub fn pullback(&self, m: u64) -> Result<Self> {
        let f = self.modulus();
        if !m.is_multiple_of(f) {
            return Err(Error::InvalidArgument(format!("{f} does not divide {m}")));
        }
        let big = UnitGroup::new(m);
        let mut gens: Vec<Vec<i128>> = big.reduction_kernel(f);
        for row in self.h.basis() {
            let x = lift_unit(self.group.element(row), f, m);
            gens.push(big.log(x).into_iter().map(|a| a as i128).collect());
        }
        let h = SubgroupLattice::from_generators(&big.orders(), &gens);
        Ok(Self::from_parts(big, h))
    }

    /// `K ∩ Q(zeta_m)` for `m | f`, described at modulus `m`.
    pub fn pushforward(&self, m: u64) -> Result<Self> {
        let f = self.modulus();
        if m == 0 || !f.is_multiple_of(m) {
            return Err(Error::InvalidArgument(format!("{m} does not divide {f}")));
        }
        let small = UnitGroup::new(m);
        let gens: Vec<Vec<i128>> = self
            .h
            .basis()
            .iter()
            .map(|row| small.log(self.group.element(row) % m).into_iter().map(|a| a as i128).collect())
            .collect();
        let h = SubgroupLattice::from_generators(&small.orders(), &gens);
        Ok(Self::from_parts(small, h))
    }

    /// The field described at its conductor.
    pub fn at_conductor(&self) -> Self {
        self.pushforward(self.conductor).expect("conductor divides the modulus")
    }

    /// `K ∩ Q(zeta_m)` described at modulus `m`, for any `m`.
    pub fn fixing_group_mod(&self, m: u64) -> Result<Self> {
        self.pullback(lcm(self.modulus(), m))?.pushforward(m)
    }

    /// Largest subfield unramified at `p`.
    pub fn inertia_field(&self, p: u64) -> Self {
        let f = self.modulus();
        let mut prime_to_p = f;
        while prime_to_p.is_multiple_of(p) {
            prime_to_p /= p;
        }
        let h = self.h.join(&self.group.reduction_kernel(prime_to_p));
        Self::from_parts(self.group.clone(), h)
    }

    /// `F_1`, the first layer of the cyclotomic `Z_p`-extension over `F`,
    /// at modulus `lcm(f, p^(e+1))` with `e = max(v_p(f), 1)`.
    pub fn first_layer(&self, p: u64) -> Result<Self> {
        let f = self.modulus();
        let e = if f.is_multiple_of(p) { valuation(f, p) } else { 0 }.max(1);
        let big = self.pullback(lcm(f, p.pow(e + 1)))?;
        let idx = big
            .group
            .factor_of_prime(p)
            .ok_or_else(|| Error::InvalidArgument(format!("{p} must be an odd prime")))?;
        // F ∩ Q_inf = Q_j, with j the largest exponent dividing every p-coordinate of H
        let mut j = 0u32;
        while big.h.basis().iter().all(|row| row[idx].rem_euclid(p.pow(j + 1) as i128) == 0) {
            j += 1;
            if j > 60 {
                break;
            }
        }
        let mut coeffs = vec![0i128; big.group.rank()];
        coeffs[idx] = 1;
        let h = big.h.intersect_functional(&coeffs, p.pow(j + 1));
        let layer = Self::from_parts(big.group.clone(), h);
        if layer.degree() != p * self.degree() {
            return Err(Error::Construction(format!(
                "first layer has degree {} over a field of degree {}",
                layer.degree(),
                self.degree()
            )));
        }
        Ok(layer)
    }

    pub fn is_subfield_of(&self, other: &Self) -> bool {
        let m = lcm(self.modulus(), other.modulus());
        match (self.pullback(m), other.pullback(m)) {
            (Ok(a), Ok(b)) => b.h.is_subgroup_of(&a.h),
            _ => false,
        }
    }
}

impl PartialEq for AbelianField {
    /// Equality as subfields of the algebraic closure.
    fn eq(&self, other: &Self) -> bool {
        self.is_subfield_of(other) && other.is_subfield_of(self)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    modulus: u64,
    generators: Vec<u64>,
}

impl Serialize for AbelianField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldJson { modulus: self.modulus(), generators: self.generators() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AbelianField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FieldJson::deserialize(d)?;
        AbelianField::new(raw.modulus, &raw.generators).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conductor_examples() {
        assert_eq!(AbelianField::cyclotomic(15).unwrap().conductor(), 15);
        assert_eq!(AbelianField::cyclotomic(12).unwrap().conductor(), 12);
        // Q(zeta_10) = Q(zeta_5)
        assert_eq!(AbelianField::cyclotomic(10).unwrap().conductor(), 5);
        assert_eq!(AbelianField::new(7, &[3]).unwrap().conductor(), 1);
        // cubes mod 7 are {1, 6}; the fixed field is the cubic subfield
        let cubic = AbelianField::new(7, &[6]).unwrap();
        assert_eq!(cubic.degree(), 3);
        assert_eq!(cubic.conductor(), 7);
        // Q(zeta_5) inside Q(zeta_15)
        let k = AbelianField::new(15, &[11]).unwrap();
        assert_eq!(k.conductor(), 5);
        assert_eq!(k.degree(), 4);
    }

    #[test]
    fn frobenius_basics() {
        let cubic = AbelianField::new(7, &[6]).unwrap();
        assert!(cubic.frobenius_class(13).unwrap().is_trivial());
        assert!(!cubic.frobenius_class(2).unwrap().is_trivial());
        assert!(cubic.frobenius_class(7).is_err());
        assert!(AbelianField::rationals().frobenius_class(5).unwrap().is_trivial());
    }

    #[test]
    fn inertia_strips_p_part() {
        let k = AbelianField::cyclotomic(21).unwrap();
        let i = k.inertia_field(3);
        assert_eq!(i.conductor(), 7);
        assert_eq!(i.degree(), 6);
        assert_eq!(AbelianField::cyclotomic(7).unwrap().inertia_field(3).conductor(), 7);
    }

    #[test]
    fn push_and_pull() {
        let cubic = AbelianField::new(7, &[6]).unwrap();
        let up = cubic.pullback(63).unwrap();
        assert_eq!(up.conductor(), 7);
        assert_eq!(up.degree(), 3);
        assert!(up == cubic);
        assert_eq!(up.at_conductor().modulus(), 7);
        let down = AbelianField::cyclotomic(63).unwrap().fixing_group_mod(9).unwrap();
        assert_eq!(down.degree(), 6);
        assert!(cubic.fixing_group_mod(9).unwrap().degree() == 1);
    }

    #[test]
    fn first_layers() {
        let q1 = AbelianField::rationals().first_layer(3).unwrap();
        assert_eq!((q1.degree(), q1.conductor()), (3, 9));
        let f = AbelianField::new(7, &[6]).unwrap().first_layer(3).unwrap();
        assert_eq!((f.degree(), f.conductor()), (9, 63));
        let g = AbelianField::cyclotomic(9).unwrap().first_layer(3).unwrap();
        assert_eq!((g.degree(), g.conductor()), (18, 27));
    }

    #[test]
    fn json_roundtrip() {
        let k = AbelianField::new(63, &[2]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        let back: AbelianField = serde_json::from_str(&s).unwrap();
        assert!(back == k);
        assert_eq!(s, serde_json::to_string(&back).unwrap());
    }
}
