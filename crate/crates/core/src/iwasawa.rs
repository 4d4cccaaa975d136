//! Truncated Iwasawa algebras `(Z/p^k)[T]/(f)` and their group rings over a
//! finite abelian `G`.
//!
//! `f` is either `T^d` (a power-series truncation, where division by `T` makes
//! sense and costs one degree) or `omega_n = (1+T)^(p^n) - 1`, which realizes
//! `(Z/p^k)[Gamma/Gamma^(p^n)]` with `gamma = 1 + T`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{checked_prime_power, ilog, is_prime, mul_mod};
use crate::error::{Error, Result};
use crate::padic::PadicInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModulusPoly {
    /// `T^d`
    Truncation(usize),
    /// `(1+T)^(p^n) - 1`
    FiniteLevel(u32),
}

/// `Z/n_1 x ... x Z/n_r`, elements indexed in mixed radix with the first
/// coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    invariants: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(invariants: Vec<u64>) -> Result<Self> {
        if invariants.contains(&0) {
            return Err(Error::InvalidArgument("invariant factors must be positive".into()));
        }
        let invariants = invariants.into_iter().filter(|&n| n > 1).collect();
        Ok(FiniteAbelianGroup { invariants })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariants: Vec::new() }
    }

    pub fn elementary_rank2(p: u64) -> Self {
        FiniteAbelianGroup { invariants: vec![p, p] }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(vec![n]).expect("positive order")
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn order(&self) -> usize {
        self.invariants.iter().product::<u64>() as usize
    }

    pub fn coords(&self, mut i: usize) -> Vec<u64> {
        self.invariants
            .iter()
            .map(|&n| {
                let c = (i as u64) % n;
                i /= n as usize;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[u64]) -> usize {
        let mut idx = 0usize;
        for (c, &n) in coords.iter().zip(&self.invariants).rev() {
            idx = idx * n as usize + (c % n) as usize;
        }
        idx
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.coords(a), self.coords(b));
        let sum: Vec<u64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        self.index(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let x: Vec<u64> = self.coords(a).iter().zip(&self.invariants).map(|(&u, &n)| (n - u) % n).collect();
        self.index(&x)
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    fn is_elementary_rank2(&self) -> Option<u64> {
        match self.invariants.as_slice() {
            [a, b] if a == b && is_prime(*a) => Some(*a),
            _ => None,
        }
    }

    /// Generators of the `p + 1` subgroups of order `p` of `(Z/p)^2`, as
    /// `(1, b)` for `b < p` and then `(0, 1)`.
    pub fn line_generators(&self) -> Result<Vec<usize>> {
        let p = self
            .is_elementary_rank2()
            .ok_or_else(|| Error::UnsupportedGroup(format!("{:?} is not (Z/p)^2", self.invariants)))?;
        let mut out: Vec<usize> = (0..p).map(|b| self.index(&[1, b])).collect();
        out.push(self.index(&[0, 1]));
        Ok(out)
    }

    /// The `p + 1` subgroups of order `p`, in the order of [`Self::line_generators`].
    pub fn lines(&self) -> Result<Vec<Vec<usize>>> {
        Ok(self.line_generators()?.into_iter().map(|g| self.generated(&[g])).collect())
    }

    fn label(&self, i: usize) -> String {
        let c: Vec<String> = self.coords(i).iter().map(|c| c.to_string()).collect();
        format!("({})", c.join(","))
    }
}

struct SpecData {
    p: u64,
    k: u32,
    q: u64,
    modulus: ModulusPoly,
    group: FiniteAbelianGroup,
    deg: usize,
    /// low coefficients of the monic modulus (finite level only)
    omega: Vec<u64>,
    add: Vec<usize>,
}

/// Coefficient ring `(Z/p^k)[T]/(f)[G]`.
#[derive(Clone)]
pub struct RingSpec(Arc<SpecData>);

impl PartialEq for RingSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.k == other.0.k
                && self.0.modulus == other.0.modulus
                && self.0.group == other.0.group)
    }
}

impl Eq for RingSpec {}

impl fmt::Debug for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingSpec(Z/{}^{}[T]/({}), G = {:?})", self.0.p, self.0.k, self.modulus_label(), self.0.group.invariants)
    }
}

fn poly_mul_full(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, q)) % q;
        }
    }
    out
}

/// Coefficients of `(1+T)^(p^n) - 1` mod `q`, low degree first, including the leading 1.
fn omega_coefficients(p: u64, n: u32, q: u64) -> Vec<u64> {
    let mut poly = vec![1u64, 1 % q];
    for _ in 0..n {
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = poly_mul_full(&acc, &poly, q);
        }
        poly = acc;
    }
    poly[0] = (poly[0] + q - 1) % q;
    poly
}

impl RingSpec {
    pub fn new(p: u64, k: u32, modulus: ModulusPoly, group: FiniteAbelianGroup) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("precision k must be at least 1".into()));
        }
        let q = checked_prime_power(p, k).ok_or(Error::PrecisionOverflow { p, k })?;
        let (deg, omega) = match modulus {
            ModulusPoly::Truncation(d) => {
                if d == 0 {
                    return Err(Error::InvalidArgument("truncation degree must be at least 1".into()));
                }
                (d, Vec::new())
            }
            ModulusPoly::FiniteLevel(n) => {
                let deg = checked_prime_power(p, n)
                    .filter(|&d| d <= 1 << 16)
                    .ok_or(Error::PrecisionOverflow { p, k: n })? as usize;
                let mut w = omega_coefficients(p, n, q);
                w.truncate(deg);
                (deg, w)
            }
        };
        let order = group.order();
        let mut add = vec![0usize; order * order];
        for a in 0..order {
            for b in 0..order {
                add[a * order + b] = group.add(a, b);
            }
        }
        Ok(RingSpec(Arc::new(SpecData { p, k, q, modulus, group, deg, omega, add })))
    }

    /// `(Z/p^k)[T]/(T^d)` with trivial group.
    pub fn truncated(p: u64, k: u32, d: usize) -> Result<Self> {
        Self::new(p, k, ModulusPoly::Truncation(d), FiniteAbelianGroup::trivial())
    }

    /// `(Z/p^k)[Gamma/Gamma^(p^n)]` with trivial group.
    pub fn level(p: u64, k: u32, n: u32) -> Result<Self> {
        Self::new(p, k, ModulusPoly::FiniteLevel(n), FiniteAbelianGroup::trivial())
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    /// `p^k`
    pub fn q(&self) -> u64 {
        self.0.q
    }

    pub fn modulus(&self) -> ModulusPoly {
        self.0.modulus
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.0.group
    }

    /// Degree of the modulus polynomial, i.e. the `Z/p^k`-rank of the `T`-part.
    pub fn degree(&self) -> usize {
        self.0.deg
    }

    pub fn group_order(&self) -> usize {
        self.0.group.order()
    }

    /// Number of `Z/p^k` coordinates of one ring element.
    pub fn rank(&self) -> usize {
        self.0.deg * self.group_order()
    }

    pub fn truncation(&self) -> Option<usize> {
        match self.0.modulus {
            ModulusPoly::Truncation(d) => Some(d),
            ModulusPoly::FiniteLevel(_) => None,
        }
    }

    pub fn level_index(&self) -> Option<u32> {
        match self.0.modulus {
            ModulusPoly::FiniteLevel(n) => Some(n),
            ModulusPoly::Truncation(_) => None,
        }
    }

    pub fn modulus_label(&self) -> String {
        match self.0.modulus {
            ModulusPoly::Truncation(d) => format!("T^{d}"),
            ModulusPoly::FiniteLevel(n) => format!("(1+T)^({}^{n})-1", self.0.p),
        }
    }

    pub fn with_modulus(&self, modulus: ModulusPoly) -> Result<Self> {
        Self::new(self.0.p, self.0.k, modulus, self.0.group.clone())
    }

    pub fn with_group(&self, group: FiniteAbelianGroup) -> Result<Self> {
        Self::new(self.0.p, self.0.k, self.0.modulus, group)
    }

    pub fn with_precision(&self, k: u32) -> Result<Self> {
        Self::new(self.0.p, k, self.0.modulus, self.0.group.clone())
    }

    fn add_group(&self, a: usize, b: usize) -> usize {
        self.0.add[a * self.group_order() + b]
    }

    /// The spec two operands are coerced to: minimum precision, minimum truncation.
    fn common(&self, other: &Self) -> Self {
        if self == other {
            return self.clone();
        }
        assert!(
            self.0.p == other.0.p && self.0.group == other.0.group,
            "incompatible ring specifications: {self:?} and {other:?}"
        );
        let modulus = match (self.0.modulus, other.0.modulus) {
            (ModulusPoly::Truncation(a), ModulusPoly::Truncation(b)) => ModulusPoly::Truncation(a.min(b)),
            (a, b) if a == b => a,
            _ => panic!("incompatible ring specifications: {self:?} and {other:?}"),
        };
        Self::new(self.0.p, self.0.k.min(other.0.k), modulus, self.0.group.clone()).expect("valid spec")
    }

    /// Reduce a polynomial of any length to `deg` coefficients mod `(p^k, f)`.
    fn reduce_poly(&self, mut poly: Vec<u64>) -> Vec<u64> {
        let q = self.q();
        let deg = self.degree();
        if let ModulusPoly::FiniteLevel(_) = self.0.modulus {
            for i in (deg..poly.len()).rev() {
                let c = poly[i] % q;
                if c == 0 {
                    continue;
                }
                poly[i] = 0;
                for (j, &w) in self.0.omega.iter().enumerate() {
                    if w != 0 {
                        poly[i - deg + j] = (poly[i - deg + j] + q - mul_mod(c, w, q)) % q;
                    }
                }
            }
        }
        poly.resize(deg, 0);
        poly.iter_mut().for_each(|c| *c %= q);
        poly
    }
}

/// An element of `(Z/p^k)[T]/(f)[G]`; coefficient of `g T^t` at `g * deg + t`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupRingElt {
    spec: RingSpec,
    coeffs: Vec<u64>,
}

impl fmt::Debug for GroupRingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl GroupRingElt {
    pub fn zero(spec: &RingSpec) -> Self {
        GroupRingElt { spec: spec.clone(), coeffs: vec![0; spec.rank()] }
    }

    pub fn scalar(spec: &RingSpec, c: i128) -> Self {
        let mut x = Self::zero(spec);
        x.coeffs[0] = c.rem_euclid(spec.q() as i128) as u64;
        x
    }

    pub fn one(spec: &RingSpec) -> Self {
        Self::scalar(spec, 1)
    }

    /// `c * g * T^t`.
    pub fn monomial(spec: &RingSpec, g: usize, t: usize, c: i128) -> Self {
        let mut x = Self::zero(spec);
        if t < spec.degree() {
            x.coeffs[g * spec.degree() + t] = c.rem_euclid(spec.q() as i128) as u64;
            x
        } else {
            // T^t with t beyond the degree: reduce through the modulus
            let mut poly = vec![0u64; t + 1];
            poly[t] = c.rem_euclid(spec.q() as i128) as u64;
            Self::from_poly(spec, g, &poly)
        }
    }

    pub fn group_element(spec: &RingSpec, g: usize) -> Self {
        Self::monomial(spec, g, 0, 1)
    }

    /// `T`, i.e. `gamma - 1`.
    pub fn t(spec: &RingSpec) -> Self {
        Self::monomial(spec, 0, 1, 1)
    }

    /// `g * poly(T)` for a coefficient list of any length.
    pub fn from_poly(spec: &RingSpec, g: usize, poly: &[u64]) -> Self {
        let mut x = Self::zero(spec);
        let reduced = spec.reduce_poly(poly.to_vec());
        let deg = spec.degree();
        x.coeffs[g * deg..(g + 1) * deg].copy_from_slice(&reduced);
        x
    }

    pub fn from_coeffs(spec: &RingSpec, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != spec.rank() {
            return Err(Error::SpecMismatch(format!("expected {} coefficients, got {}", spec.rank(), coeffs.len())));
        }
        let q = spec.q();
        Ok(GroupRingElt { spec: spec.clone(), coeffs: coeffs.into_iter().map(|c| c % q).collect() })
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// The `T`-polynomial attached to the group element `g`.
    pub fn component(&self, g: usize) -> &[u64] {
        let deg = self.spec.degree();
        &self.coeffs[g * deg..(g + 1) * deg]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Some coefficient is a unit mod `p`, i.e. the element is nonzero mod `p`.
    pub fn is_prime_to_p(&self) -> bool {
        let p = self.spec.p();
        self.coeffs.iter().any(|&c| c % p != 0)
    }

    fn coerced(&self, spec: &RingSpec) -> Self {
        if &self.spec == spec {
            return self.clone();
        }
        self.change_spec_lossy(spec)
    }

    /// Reinterpret in a spec with lower precision or lower truncation.
    fn change_spec_lossy(&self, spec: &RingSpec) -> Self {
        let q = spec.q();
        let (old, new) = (self.spec.degree(), spec.degree());
        let mut coeffs = vec![0u64; spec.rank()];
        for g in 0..spec.group_order() {
            for t in 0..old.min(new) {
                coeffs[g * new + t] = self.coeffs[g * old + t] % q;
            }
        }
        GroupRingElt { spec: spec.clone(), coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let spec = self.spec.common(&other.spec);
        let (a, b) = (self.coerced(&spec), other.coerced(&spec));
        let q = spec.q();
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % q).collect();
        GroupRingElt { spec, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let q = self.spec.q();
        GroupRingElt { spec: self.spec.clone(), coeffs: self.coeffs.iter().map(|&c| (q - c) % q).collect() }
    }

    pub fn scale(&self, c: i128) -> Self {
        let q = self.spec.q();
        let c = c.rem_euclid(q as i128) as u64;
        GroupRingElt { spec: self.spec.clone(), coeffs: self.coeffs.iter().map(|&x| mul_mod(x, c, q)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let spec = self.spec.common(&other.spec);
        let (a, b) = (self.coerced(&spec), other.coerced(&spec));
        let q = spec.q();
        let deg = spec.degree();
        let order = spec.group_order();
        let full_len = match spec.modulus() {
            ModulusPoly::Truncation(_) => deg,
            ModulusPoly::FiniteLevel(_) => 2 * deg - 1,
        };
        let small = q < 1 << 32;
        let mut acc: Vec<Vec<u128>> = vec![Vec::new(); order];
        for g in 0..order {
            let ag = a.component(g);
            if ag.iter().all(|&c| c == 0) {
                continue;
            }
            for h in 0..order {
                let bh = b.component(h);
                if bh.iter().all(|&c| c == 0) {
                    continue;
                }
                let target = &mut acc[spec.add_group(g, h)];
                if target.is_empty() {
                    target.resize(full_len, 0);
                }
                for (i, &x) in ag.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in bh.iter().enumerate().take(full_len - i) {
                        if small {
                            target[i + j] += (x * y) as u128;
                        } else {
                            target[i + j] = (target[i + j] + mul_mod(x, y, q) as u128) % q as u128;
                        }
                    }
                }
            }
        }
        let mut coeffs = vec![0u64; spec.rank()];
        for (g, poly) in acc.into_iter().enumerate() {
            if poly.is_empty() {
                continue;
            }
            let reduced = spec.reduce_poly(poly.into_iter().map(|c| (c % q as u128) as u64).collect());
            coeffs[g * deg..(g + 1) * deg].copy_from_slice(&reduced);
        }
        GroupRingElt { spec, coeffs }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.spec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiply by the group element `g`.
    pub fn translate(&self, g: usize) -> Self {
        let deg = self.spec.degree();
        let mut coeffs = vec![0u64; self.spec.rank()];
        for h in 0..self.spec.group_order() {
            let target = self.spec.add_group(g, h);
            coeffs[target * deg..(target + 1) * deg].copy_from_slice(self.component(h));
        }
        GroupRingElt { spec: self.spec.clone(), coeffs }
    }

    /// Multiply by `T^t`.
    pub fn shift(&self, t: usize) -> Self {
        match self.spec.modulus() {
            ModulusPoly::Truncation(d) => {
                let mut coeffs = vec![0u64; self.spec.rank()];
                for g in 0..self.spec.group_order() {
                    for s in 0..d.saturating_sub(t) {
                        coeffs[g * d + s + t] = self.coeffs[g * d + s];
                    }
                }
                GroupRingElt { spec: self.spec.clone(), coeffs }
            }
            ModulusPoly::FiniteLevel(_) => self.mul(&Self::monomial(&self.spec, 0, t, 1)),
        }
    }

    /// Multiply by `T`, reducing through the modulus in linear time.
    pub fn times_t(&self) -> Self {
        let deg = self.spec.degree();
        let mut coeffs = vec![0u64; self.spec.rank()];
        for g in 0..self.spec.group_order() {
            let mut poly = Vec::with_capacity(deg + 1);
            poly.push(0);
            poly.extend_from_slice(self.component(g));
            let reduced = self.spec.reduce_poly(poly);
            coeffs[g * deg..(g + 1) * deg].copy_from_slice(&reduced);
        }
        GroupRingElt { spec: self.spec.clone(), coeffs }
    }

    /// Divide by `T`; only meaningful for a truncation `T^d`, and the result
    /// lives at truncation `d - 1`.
    pub fn divide_by_t(&self) -> Result<Self> {
        let d = self
            .spec
            .truncation()
            .ok_or_else(|| Error::SpecMismatch("division by T needs a T-adic truncation".into()))?;
        if d < 2 {
            return Err(Error::PrecisionExhausted { required: 2, got: d });
        }
        if (0..self.spec.group_order()).any(|g| self.component(g)[0] != 0) {
            return Err(Error::NotDivisibleByT);
        }
        let spec = self.spec.with_modulus(ModulusPoly::Truncation(d - 1))?;
        let mut coeffs = vec![0u64; spec.rank()];
        for g in 0..spec.group_order() {
            coeffs[g * (d - 1)..(g + 1) * (d - 1)].copy_from_slice(&self.component(g)[1..]);
        }
        Ok(GroupRingElt { spec, coeffs })
    }

    /// Lower the precision or the truncation degree.
    pub fn truncate(&self, k: u32, modulus: ModulusPoly) -> Result<Self> {
        match (self.spec.modulus(), modulus) {
            (ModulusPoly::Truncation(a), ModulusPoly::Truncation(b)) if b <= a => {}
            (a, b) if a == b => {}
            _ => return Err(Error::SpecMismatch(format!("cannot truncate {} to {:?}", self.spec.modulus_label(), modulus))),
        }
        if k > self.spec.k() {
            return Err(Error::PrecisionMismatch { needed: k, got: self.spec.k() });
        }
        let spec = RingSpec::new(self.spec.p(), k, modulus, self.spec.group().clone())?;
        Ok(self.change_spec_lossy(&spec))
    }

    /// Send a series known mod `T^D` to level `n`, i.e. reduce mod `omega_n`.
    /// Needs `D >= k p^n`, since `T^(k p^n)` lies in `(p^k, omega_n)`.
    pub fn to_level(&self, n: u32) -> Result<Self> {
        let target = self.spec.with_modulus(ModulusPoly::FiniteLevel(n))?;
        match self.spec.modulus() {
            ModulusPoly::Truncation(d) => {
                let required = self.spec.k() as usize * target.degree();
                if d < required {
                    return Err(Error::PrecisionExhausted { required, got: d });
                }
            }
            ModulusPoly::FiniteLevel(m) if m >= n => {}
            ModulusPoly::FiniteLevel(m) => {
                return Err(Error::SpecMismatch(format!("level {m} does not surject onto level {n}")))
            }
        }
        let mut out = Self::zero(&target);
        let deg = target.degree();
        for g in 0..target.group_order() {
            let reduced = target.reduce_poly(self.component(g).to_vec());
            out.coeffs[g * deg..(g + 1) * deg].copy_from_slice(&reduced);
        }
        Ok(out)
    }

    /// Same coefficient polynomials, read at a higher level `m`.
    pub fn lift_to_level(&self, m: u32) -> Result<Self> {
        let n = self
            .spec
            .level_index()
            .ok_or_else(|| Error::SpecMismatch("lifting needs a finite-level ring".into()))?;
        if m < n {
            return Err(Error::SpecMismatch(format!("cannot lift level {n} to level {m}")));
        }
        let target = self.spec.with_modulus(ModulusPoly::FiniteLevel(m))?;
        let mut out = Self::zero(&target);
        let (old, new) = (self.spec.degree(), target.degree());
        for g in 0..target.group_order() {
            out.coeffs[g * new..g * new + old].copy_from_slice(self.component(g));
        }
        Ok(out)
    }

    /// Image in `(Z/p^k)[G]` under `T -> 0`.
    pub fn at_t_zero(&self) -> Self {
        let spec = self.spec.with_modulus(ModulusPoly::Truncation(1)).expect("valid spec");
        let coeffs = (0..spec.group_order()).map(|g| self.component(g)[0]).collect();
        GroupRingElt { spec, coeffs }
    }

    /// Augmentation `T -> 0, g -> 1`, as an integer mod `p^k`.
    pub fn augmentation(&self) -> u64 {
        let q = self.spec.q();
        (0..self.spec.group_order()).fold(0, |acc, g| (acc + self.component(g)[0]) % q)
    }

    /// Canonical JSON form: `{p, k, modulus, coefficients: {group element: [..]}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = BTreeMap::new();
        for g in 0..self.spec.group_order() {
            let poly = self.component(g);
            if poly.iter().any(|&c| c != 0) {
                let last = poly.iter().rposition(|&c| c != 0).unwrap();
                map.insert(self.spec.group().label(g), poly[..=last].to_vec());
            }
        }
        serde_json::json!({
            "p": self.spec.p(),
            "k": self.spec.k(),
            "modulus": self.spec.modulus_label(),
            "coefficients": map,
        })
    }
}

/// `1 - (1+T)^(-c)`, the factor `1 - Frob^-1` when `Frob` acts as `gamma^c`.
///
/// At truncation `T^d` the exponent only matters mod `p^K` with
/// `K = k + log_p(d - 1)`, so `c` must be known to that precision; at level `n`
/// it only matters mod `p^n`.
pub fn one_minus_frob_inv(c: &PadicInt, spec: &RingSpec) -> Result<GroupRingElt> {
    if c.p() != spec.p() {
        return Err(Error::SpecMismatch(format!("exponent over {} in a ring over {}", c.p(), spec.p())));
    }
    let needed = match spec.modulus() {
        ModulusPoly::Truncation(d) => spec.k() + ilog(d.saturating_sub(1) as u64, spec.p()),
        ModulusPoly::FiniteLevel(n) => n,
    };
    if c.precision() < needed {
        return Err(Error::PrecisionMismatch { needed, got: c.precision() });
    }
    let exponent = if needed == 0 { 0 } else { c.truncate(needed).neg().value() };
    let mut one_plus_t = GroupRingElt::one(spec);
    if spec.degree() > 1 {
        one_plus_t = one_plus_t.add(&GroupRingElt::t(spec));
    }
    Ok(GroupRingElt::one(spec).sub(&one_plus_t.pow(exponent)))
}

/// `sum_{h in H} h` for a subgroup given by its elements.
pub fn trace_element(subgroup: &[usize], spec: &RingSpec) -> GroupRingElt {
    let mut x = GroupRingElt::zero(spec);
    for &h in subgroup {
        x = x.add(&GroupRingElt::group_element(spec, h));
    }
    x
}

/// `sum_{s < p^(m-n)} (1+T)^(p^n s)` at level `m`: the algebraic trace from
/// level `m` down to level `n`.
pub fn layer_trace(spec: &RingSpec, n: u32) -> Result<GroupRingElt> {
    let m = spec
        .level_index()
        .ok_or_else(|| Error::SpecMismatch("layer traces live at finite levels".into()))?;
    if n > m {
        return Err(Error::InvalidArgument(format!("level {n} is above level {m}")));
    }
    let gamma_pn = GroupRingElt::one(spec).add(&GroupRingElt::t(spec)).pow(spec.p().pow(n));
    let mut acc = GroupRingElt::zero(spec);
    let mut power = GroupRingElt::one(spec);
    for _ in 0..spec.p().pow(m - n) {
        acc = acc.add(&power);
        power = power.mul(&gamma_pn);
    }
    Ok(acc)
}

/// `sum_i Tr_{H_i} - Tr_G = p` in the group ring of `(Z/p)^2`.
pub fn formal_identity_check(spec: &RingSpec) -> Result<bool> {
    let lines = spec.group().lines()?;
    let all: Vec<usize> = (0..spec.group_order()).collect();
    let mut lhs = trace_element(&all, spec).neg();
    for line in &lines {
        lhs = lhs.add(&trace_element(line, spec));
    }
    Ok(lhs == GroupRingElt::scalar(spec, spec.p() as i128))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u64, k: u32, d: usize) -> RingSpec {
        RingSpec::new(p, k, ModulusPoly::Truncation(d), FiniteAbelianGroup::elementary_rank2(p)).unwrap()
    }

    #[test]
    fn omega_is_binomial() {
        assert_eq!(omega_coefficients(3, 1, 81), vec![0, 3, 3, 1]);
        let w = omega_coefficients(3, 2, 3u64.pow(8));
        assert_eq!(w.len(), 10);
        assert_eq!(w[1], 9);
        assert_eq!(w[2], 36);
    }

    #[test]
    fn frob_factor_small_cases() {
        let s = RingSpec::truncated(3, 4, 6).unwrap();
        let c0 = PadicInt::new(3, 8, 0).unwrap();
        assert!(one_minus_frob_inv(&c0, &s).unwrap().is_zero());
        let c1 = PadicInt::new(3, 8, 1).unwrap();
        let u = one_minus_frob_inv(&c1, &s).unwrap();
        // T - T^2 + T^3 - ...
        assert_eq!(u.coeffs(), &[0, 1, 80, 1, 80, 1]);
        let low = PadicInt::new(3, 4, 1).unwrap();
        assert_eq!(one_minus_frob_inv(&low, &s), Err(Error::PrecisionMismatch { needed: 5, got: 4 }));
    }

    #[test]
    fn divide_by_t_examples() {
        let s = RingSpec::truncated(3, 8, 16).unwrap();
        let t = GroupRingElt::t(&s);
        assert_eq!(t.divide_by_t().unwrap(), GroupRingElt::one(&s.with_modulus(ModulusPoly::Truncation(15)).unwrap()));
        assert_eq!(GroupRingElt::one(&s).divide_by_t(), Err(Error::NotDivisibleByT));
        let c = PadicInt::new(3, 10, 19).unwrap();
        let v = one_minus_frob_inv(&c, &s).unwrap().divide_by_t().unwrap();
        assert_eq!(v.coeffs()[0], 19);
    }

    #[test]
    fn formal_identity() {
        assert!(formal_identity_check(&spec(3, 8, 4)).unwrap());
        assert!(formal_identity_check(&spec(5, 4, 2)).unwrap());
        let cyclic = RingSpec::new(3, 4, ModulusPoly::Truncation(2), FiniteAbelianGroup::cyclic(3)).unwrap();
        assert!(formal_identity_check(&cyclic).is_err());
        let all: Vec<usize> = (0..3).collect();
        // the analogous sum over the single subgroup vanishes instead of giving p
        assert!(trace_element(&all, &cyclic).sub(&trace_element(&all, &cyclic)).is_zero());
    }

    #[test]
    fn trace_absorbs() {
        let s = spec(3, 4, 3);
        let lines = s.group().lines().unwrap();
        let tr = trace_element(&lines[1], &s);
        for &h in &lines[1] {
            assert_eq!(tr.translate(h), tr);
        }
        assert_eq!(trace_element(&[0], &s), GroupRingElt::one(&s));
    }

    #[test]
    fn level_rings() {
        let s = RingSpec::level(3, 4, 1).unwrap();
        let gamma = GroupRingElt::one(&s).add(&GroupRingElt::t(&s));
        assert_eq!(gamma.pow(3), GroupRingElt::one(&s));
        let nu = layer_trace(&RingSpec::level(3, 4, 2).unwrap(), 1).unwrap();
        // nu at level 1 is p
        assert_eq!(nu.to_level(1).unwrap(), GroupRingElt::scalar(&s, 3));
    }

    #[test]
    fn series_reduce_to_levels() {
        // (1+T)^-c computed as a series, then reduced, agrees with the level computation
        let c = PadicInt::new(3, 12, 19).unwrap();
        for n in 0..3 {
            let lvl = RingSpec::level(3, 4, n).unwrap();
            let deg = 4 * 3usize.pow(n);
            let series = one_minus_frob_inv(&c, &RingSpec::truncated(3, 4, deg).unwrap()).unwrap();
            assert_eq!(series.to_level(n).unwrap(), one_minus_frob_inv(&c, &lvl).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn json_shape() {
        let s = spec(3, 2, 3);
        let x = GroupRingElt::monomial(&s, 4, 2, 5);
        let j = x.to_json();
        assert_eq!(j["modulus"], "T^3");
        assert_eq!(j["coefficients"]["(1,1)"], serde_json::json!([0, 0, 5]));
    }
}
