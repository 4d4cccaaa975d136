//! Subgroups of a finite abelian group `Z/n_1 x ... x Z/n_r`, stored as full-rank
//! lattices in `Z^r` containing `n_j e_j`, in Hermite normal form.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupLattice {
    orders: Vec<u64>,
    /// upper triangular, positive diagonal, entries above the diagonal reduced
    basis: Vec<Vec<i128>>,
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

impl SubgroupLattice {
    pub fn from_generators(orders: &[u64], generators: &[Vec<i128>]) -> Self {
        let r = orders.len();
        let mut rows: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| {
                assert_eq!(g.len(), r);
                g.iter().zip(orders).map(|(&a, &n)| a.rem_euclid(n as i128)).collect()
            })
            .collect();
        for (j, &n) in orders.iter().enumerate() {
            let mut v = vec![0i128; r];
            v[j] = n as i128;
            rows.push(v);
        }
        let mut basis: Vec<Vec<i128>> = Vec::with_capacity(r);
        for j in 0..r {
            // fold every remaining row into a single pivot for column j
            let mut pivot: Option<Vec<i128>> = None;
            let mut rest = Vec::with_capacity(rows.len());
            for row in rows.drain(..) {
                if row[j] == 0 {
                    rest.push(row);
                    continue;
                }
                match pivot.take() {
                    None => pivot = Some(row),
                    Some(pv) => {
                        let (g, x, y) = ext_gcd(pv[j], row[j]);
                        let (a, b) = (pv[j] / g, row[j] / g);
                        let new_pivot: Vec<i128> = pv.iter().zip(&row).map(|(&u, &v)| x * u + y * v).collect();
                        let killed: Vec<i128> = pv.iter().zip(&row).map(|(&u, &v)| b * u - a * v).collect();
                        pivot = Some(new_pivot);
                        rest.push(killed);
                    }
                }
            }
            let mut pv = pivot.expect("lattice contains n_j e_j");
            if pv[j] < 0 {
                pv.iter_mut().for_each(|a| *a = -*a);
            }
            // keep later coordinates small using the n_l e_l rows already folded in
            for l in j + 1..r {
                pv[l] = pv[l].rem_euclid(orders[l] as i128);
            }
            for row in rest.iter_mut() {
                for l in j + 1..r {
                    row[l] = row[l].rem_euclid(orders[l] as i128);
                }
            }
            // n_l e_l for l > j must stay available
            for l in j + 1..r {
                let mut v = vec![0i128; r];
                v[l] = orders[l] as i128;
                rest.push(v);
            }
            rows = rest.into_iter().filter(|row| row.iter().any(|&a| a != 0)).collect();
            basis.push(pv);
        }
        for j in 0..r {
            let d = basis[j][j];
            for i in 0..j {
                let f = basis[i][j].div_euclid(d);
                if f != 0 {
                    let (head, tail) = basis.split_at_mut(j);
                    for (a, b) in head[i].iter_mut().zip(&tail[0]) {
                        *a -= f * b;
                    }
                }
            }
        }
        SubgroupLattice { orders: orders.to_vec(), basis }
    }

    pub fn whole(orders: &[u64]) -> Self {
        let r = orders.len();
        let gens: Vec<Vec<i128>> = (0..r)
            .map(|j| {
                let mut v = vec![0i128; r];
                v[j] = 1;
                v
            })
            .collect();
        Self::from_generators(orders, &gens)
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn basis(&self) -> &[Vec<i128>] {
        &self.basis
    }

    pub fn contains(&self, v: &[i128]) -> bool {
        let mut v = v.to_vec();
        for (j, row) in self.basis.iter().enumerate() {
            let d = row[j];
            if v[j].rem_euclid(d) != 0 {
                return false;
            }
            let f = v[j].div_euclid(d);
            for (a, b) in v.iter_mut().zip(row) {
                *a -= f * b;
            }
        }
        v.iter().all(|&a| a == 0)
    }

    /// `[Z^r : L]`, the index of the subgroup in the ambient group.
    pub fn index(&self) -> u128 {
        self.basis.iter().enumerate().map(|(j, row)| row[j] as u128).product()
    }

    pub fn join(&self, gens: &[Vec<i128>]) -> Self {
        let mut all = self.basis.clone();
        all.extend_from_slice(gens);
        Self::from_generators(&self.orders, &all)
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.basis.iter().all(|row| other.contains(row))
    }

    /// `{v in L : sum_j c_j v_j = 0 mod modulus}`; the functional must vanish
    /// on every `n_j e_j`.
    pub fn intersect_functional(&self, coeffs: &[i128], modulus: u64) -> Self {
        let m = modulus as i128;
        for (j, &n) in self.orders.iter().enumerate() {
            assert!((coeffs[j] * n as i128).rem_euclid(m) == 0, "functional not defined on the group");
        }
        let values: Vec<i128> = self
            .basis
            .iter()
            .map(|row| row.iter().zip(coeffs).map(|(&a, &c)| a * c).sum::<i128>().rem_euclid(m))
            .collect();
        // integer combinations y of basis rows with sum y_i values_i = 0 mod m
        let r = self.basis.len();
        let mut rows: Vec<(i128, Vec<i128>)> = values
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut y = vec![0i128; r];
                y[i] = 1;
                (s, y)
            })
            .collect();
        rows.push((m, vec![0; r]));
        let mut kernel = Vec::new();
        let mut pivot: Option<(i128, Vec<i128>)> = None;
        for (s, y) in rows {
            if s == 0 {
                kernel.push(y);
                continue;
            }
            match pivot.take() {
                None => pivot = Some((s, y)),
                Some((ps, py)) => {
                    let (g, x, z) = ext_gcd(ps, s);
                    let (a, b) = (ps / g, s / g);
                    let new_y: Vec<i128> = py.iter().zip(&y).map(|(&u, &v)| x * u + z * v).collect();
                    let killed: Vec<i128> = py.iter().zip(&y).map(|(&u, &v)| b * u - a * v).collect();
                    kernel.push(killed);
                    pivot = Some((g, new_y));
                }
            }
        }
        let gens: Vec<Vec<i128>> = kernel
            .into_iter()
            .map(|y| {
                let mut v = vec![0i128; self.orders.len()];
                for (yi, row) in y.iter().zip(&self.basis) {
                    for (a, b) in v.iter_mut().zip(row) {
                        *a += yi * b;
                    }
                }
                v
            })
            .collect();
        Self::from_generators(&self.orders, &gens)
    }
}
