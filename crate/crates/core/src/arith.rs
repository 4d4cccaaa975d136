//! Machine-word modular arithmetic, primality and factorization.

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p > 1);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `p^k`, or `None` when it does not fit below 2^63.
pub fn checked_prime_power(p: u64, k: u32) -> Option<u64> {
    let q = p.checked_pow(k)?;
    (q < 1 << 63).then_some(q)
}

/// Largest `e` with `p^e <= n` (0 for n < p).
pub fn ilog(n: u64, p: u64) -> u32 {
    if n < p {
        0
    } else {
        n.ilog(p)
    }
}

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; the witness set is exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &w in &MR_WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as sorted `(prime, exponent)` pairs.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut rest = n;
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while rest.is_multiple_of(q) {
            primes.push(q);
            rest /= q;
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (q, e) in factorize(n) {
        let current = divs.clone();
        let mut pw = 1;
        for _ in 0..e {
            pw *= q;
            divs.extend(current.iter().map(|d| d * pw));
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (q, _)| acc / q * (q - 1))
}

/// Primes strictly below `bound`, by a plain sieve.
pub fn primes_below(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n];
    let mut out = Vec::new();
    for i in 2..n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Discrete logarithm of `x` to base `g` in a cyclic group of order `order`
/// inside `(Z/m)^x`, by baby-step giant-step.
pub fn discrete_log(g: u64, x: u64, order: u64, m: u64) -> Option<u64> {
    let step = (order as f64).sqrt().ceil() as u64 + 1;
    let mut table = std::collections::HashMap::with_capacity(step as usize);
    let mut cur = 1u64;
    for j in 0..step {
        table.entry(cur).or_insert(j);
        cur = mul_mod(cur, g, m);
    }
    let giant = inv_mod(pow_mod(g, step, m), m)?;
    let mut y = x % m;
    for i in 0..=step {
        if let Some(&j) = table.get(&y) {
            return Some((i * step + j) % order);
        }
        y = mul_mod(y, giant, m);
    }
    None
}
