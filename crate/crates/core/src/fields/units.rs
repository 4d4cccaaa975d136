//! Structure of `(Z/m)^x` as a product of cyclic groups, with discrete logs.

use crate::arith::{discrete_log, factorize, gcd, inv_mod, mul_mod, pow_mod};

#[derive(Debug, Clone)]
struct CyclicFactor {
    /// generator modulo `part`
    generator: u64,
    order: u64,
    /// generator lifted to `(Z/m)^x`, trivial on every other prime-power part
    lifted: u64,
}

#[derive(Debug, Clone)]
struct PrimePart {
    prime: u64,
    exp: u32,
    modulus: u64,
    /// indices into `factors`
    factors: Vec<usize>,
}

/// `(Z/m)^x` with a fixed decomposition into cyclic factors.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    modulus: u64,
    parts: Vec<PrimePart>,
    factors: Vec<CyclicFactor>,
}

fn primitive_root_prime_power(q: u64, e: u32) -> u64 {
    let phi_q = q - 1;
    let prime_divisors: Vec<u64> = factorize(phi_q).into_iter().map(|(r, _)| r).collect();
    let g = (2..q)
        .find(|&g| prime_divisors.iter().all(|&r| pow_mod(g, phi_q / r, q) != 1))
        .unwrap_or(1);
    if e == 1 || q == 2 {
        return g;
    }
    let q2 = q * q;
    if pow_mod(g, q - 1, q2) != 1 {
        g
    } else {
        g + q
    }
}

impl UnitGroup {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        let factorization = factorize(modulus);
        let mut parts = Vec::new();
        let mut factors = Vec::new();
        for (q, e) in factorization {
            let part = q.pow(e);
            let mut idx = Vec::new();
            let mut push = |generator: u64, order: u64, factors: &mut Vec<CyclicFactor>| {
                let lifted = crt_lift(generator, part, modulus);
                idx.push(factors.len());
                factors.push(CyclicFactor { generator, order, lifted });
            };
            if q == 2 {
                if e >= 2 {
                    push(part - 1, 2, &mut factors);
                }
                if e >= 3 {
                    push(5, 1 << (e - 2), &mut factors);
                }
            } else {
                let g = primitive_root_prime_power(q, e);
                push(g, (q - 1) * q.pow(e - 1), &mut factors);
            }
            parts.push(PrimePart { prime: q, exp: e, modulus: part, factors: idx });
        }
        UnitGroup { modulus, parts, factors }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.order).collect()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|f| f.order).product()
    }

    pub fn is_unit(&self, x: u64) -> bool {
        gcd(x % self.modulus, self.modulus) == 1 || self.modulus == 1
    }

    /// Index of the cyclic factor attached to the odd prime `q`, if `q | m`.
    pub fn factor_of_prime(&self, q: u64) -> Option<usize> {
        self.parts
            .iter()
            .find(|part| part.prime == q && q != 2)
            .map(|part| part.factors[0])
    }

    /// Exponent vector of a unit with respect to the cyclic generators.
    pub fn log(&self, x: u64) -> Vec<u64> {
        debug_assert!(self.is_unit(x));
        let mut out = vec![0u64; self.factors.len()];
        for part in &self.parts {
            let y = x % part.modulus;
            if part.prime == 2 {
                if part.exp < 2 {
                    continue;
                }
                let minus = y % 4 == 3;
                out[part.factors[0]] = minus as u64;
                if part.exp >= 3 {
                    let y = if minus { part.modulus - y } else { y };
                    let f = &self.factors[part.factors[1]];
                    out[part.factors[1]] =
                        discrete_log(f.generator, y, f.order, part.modulus).expect("5 generates 1 mod 4");
                }
            } else {
                let f = &self.factors[part.factors[0]];
                out[part.factors[0]] = discrete_log(f.generator, y, f.order, part.modulus)
                    .expect("primitive root generates the unit group");
            }
        }
        out
    }

    /// The unit with the given exponent vector.
    pub fn element(&self, exps: &[i128]) -> u64 {
        let mut acc = 1 % self.modulus.max(1);
        for (f, &a) in self.factors.iter().zip(exps) {
            let a = a.rem_euclid(f.order as i128) as u64;
            acc = mul_mod(acc, pow_mod(f.lifted, a, self.modulus), self.modulus);
        }
        acc
    }

    /// Log vectors generating `ker((Z/m)^x -> (Z/d)^x)` for `d | m`.
    pub fn reduction_kernel(&self, d: u64) -> Vec<Vec<i128>> {
        assert!(self.modulus.is_multiple_of(d), "{d} does not divide {}", self.modulus);
        let mut gens = Vec::new();
        for part in &self.parts {
            let mut e_d = 0u32;
            let mut t = d;
            while t.is_multiple_of(part.prime) {
                t /= part.prime;
                e_d += 1;
            }
            let unit = |idx: usize, val: i128| {
                let mut v = vec![0i128; self.factors.len()];
                v[idx] = val;
                v
            };
            if part.prime == 2 {
                match (part.exp, e_d) {
                    (e, _) if e < 2 => {}
                    (_, 0 | 1) => {
                        for &idx in &part.factors {
                            gens.push(unit(idx, 1));
                        }
                    }
                    (e, 2) => {
                        if e >= 3 {
                            gens.push(unit(part.factors[1], 1));
                        }
                    }
                    (_, ed) => gens.push(unit(part.factors[1], 1i128 << (ed - 2))),
                }
            } else {
                let idx = part.factors[0];
                let step = if e_d == 0 { 1 } else { ((part.prime - 1) * part.prime.pow(e_d - 1)) as i128 };
                gens.push(unit(idx, step));
            }
        }
        gens
    }
}

/// The residue mod `m` congruent to `x` mod `part` and to 1 mod `m / part`,
/// where `part` and `m / part` are coprime.
fn crt_lift(x: u64, part: u64, m: u64) -> u64 {
    let rest = m / part;
    if rest == 1 {
        return x % m;
    }
    // y = x + part * t with y = 1 mod rest
    let inv = inv_mod(part % rest, rest).expect("coprime parts");
    let t = mul_mod((1 + rest - x % rest) % rest, inv, rest);
    (x + mul_mod(part, t, m)) % m
}

/// A unit mod `m` congruent to `x` mod `d` (`d | m`, `gcd(x, d) = 1`).
pub fn lift_unit(x: u64, d: u64, m: u64) -> u64 {
    debug_assert!(m.is_multiple_of(d));
    let x = x % d;
    let mut y = x;
    loop {
        if gcd(y, m) == 1 {
            return y % m;
        }
        y += d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_and_element_are_inverse() {
        for m in [1u64, 2, 4, 8, 9, 15, 16, 27, 45, 63, 96, 120, 139 * 199] {
            let g = UnitGroup::new(m);
            assert_eq!(g.order(), crate::arith::euler_phi(m).max(1));
            for x in (1..m.min(400)).filter(|&x| gcd(x, m) == 1) {
                let v: Vec<i128> = g.log(x).into_iter().map(|a| a as i128).collect();
                assert_eq!(g.element(&v), x % m, "m = {m}, x = {x}");
            }
        }
    }

    #[test]
    fn reduction_kernel_is_exact() {
        for (m, d) in [(45u64, 15u64), (45, 9), (45, 1), (32, 4), (32, 8), (32, 2), (63, 7), (27, 9)] {
            let g = UnitGroup::new(m);
            // close the kernel generators and compare with the direct definition
            let gens: Vec<u64> = g.reduction_kernel(d).iter().map(|v| g.element(v)).collect();
            let mut closure = std::collections::BTreeSet::from([1 % m]);
            loop {
                let before = closure.len();
                let snapshot: Vec<u64> = closure.iter().copied().collect();
                for a in snapshot {
                    for &h in &gens {
                        closure.insert(mul_mod(a, h, m));
                    }
                }
                if closure.len() == before {
                    break;
                }
            }
            let direct: std::collections::BTreeSet<u64> =
                (1..=m).map(|x| x % m).filter(|&x| gcd(x, m) == 1 && x % d == 1 % d).collect();
            assert_eq!(closure, direct, "m = {m}, d = {d}");
        }
    }
}
