//! Howell normal form of row spans over `Z/p^k`.
//!
//! Rows are kept in echelon form with pivots `p^a` and the Howell property:
//! every vector of the span vanishing on the first `j` columns is a
//! combination of the rows whose pivot column is at least `j`. Reduction
//! against the form therefore decides membership and gives a canonical
//! residue per coset.

use serde::Serialize;

use crate::arith::{inv_mod, mul_mod};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Howell {
    p: u64,
    k: u32,
    q: u64,
    ncols: usize,
    /// sorted by pivot column
    rows: Vec<Vec<u64>>,
    /// `(column, a)` with pivot entry `p^a`
    pivots: Vec<(usize, u32)>,
}

fn val(x: u64, p: u64, k: u32) -> u32 {
    if x == 0 {
        return k;
    }
    let mut v = 0;
    let mut x = x;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `row -= f * pivot` on the columns from `start`.
#[inline]
fn axpy(row: &mut [u64], pivot: &[u64], f: u64, q: u64, start: usize) {
    if f == 0 {
        return;
    }
    let neg = q - f;
    if q < 1 << 32 {
        for (r, &v) in row[start..].iter_mut().zip(&pivot[start..]) {
            if v != 0 {
                *r = (*r + neg * v) % q;
            }
        }
    } else {
        for (r, &v) in row[start..].iter_mut().zip(&pivot[start..]) {
            if v != 0 {
                *r = ((*r as u128 + neg as u128 * v as u128) % q as u128) as u64;
            }
        }
    }
}

fn scale(row: &mut [u64], c: u64, q: u64) {
    for x in row.iter_mut() {
        *x = mul_mod(*x, c, q);
    }
}

impl Howell {
    /// Howell form of the span of `rows` inside `(Z/p^k)^ncols`.
    pub fn new(p: u64, k: u32, ncols: usize, rows: Vec<Vec<u64>>) -> Self {
        let q = p.pow(k);
        let mut pending: Vec<Vec<u64>> = rows
            .into_iter()
            .map(|mut r| {
                assert_eq!(r.len(), ncols, "row length");
                r.iter_mut().for_each(|x| *x %= q);
                r
            })
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut out = Howell { p, k, q, ncols, rows: Vec::new(), pivots: Vec::new() };
        for col in 0..ncols {
            if pending.is_empty() {
                break;
            }
            // minimal valuation in this column, first row on ties
            let mut best: Option<(usize, u32)> = None;
            for (i, r) in pending.iter().enumerate() {
                if r[col] != 0 {
                    let v = val(r[col], p, k);
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((i, v));
                        if v == 0 {
                            break;
                        }
                    }
                }
            }
            let Some((idx, a)) = best else { continue };
            let mut pivot = pending.swap_remove(idx);
            // normalize the pivot entry to p^a
            let pa = p.pow(a);
            let unit = pivot[col] / pa;
            let inv = inv_mod(unit % q, q).expect("unit part");
            scale(&mut pivot[col..], inv, q);
            debug_assert_eq!(pivot[col], pa);
            for r in pending.iter_mut() {
                if r[col] != 0 {
                    let f = r[col] / pa;
                    axpy(r, &pivot, f, q, col);
                    debug_assert_eq!(r[col], 0);
                }
            }
            pending.retain(|r| r.iter().any(|&x| x != 0));
            if a > 0 {
                let mut ann = pivot.clone();
                scale(&mut ann[col..], p.pow(k - a), q);
                if ann.iter().any(|&x| x != 0) {
                    pending.push(ann);
                }
            }
            out.rows.push(pivot);
            out.pivots.push((col, a));
        }
        out.back_reduce(0);
        out
    }

    /// Reduce the entries above every pivot from position `from` on.
    fn back_reduce(&mut self, from: usize) {
        let q = self.q;
        for i in from..self.rows.len() {
            let (col, a) = self.pivots[i];
            let pa = self.p.pow(a);
            let (head, tail) = self.rows.split_at_mut(i);
            let pivot = &tail[0];
            for r in head.iter_mut() {
                let f = r[col] / pa;
                axpy(r, pivot, f, q, col);
            }
        }
    }

    /// Howell form of this span enlarged by `more`.
    pub fn extend(&self, more: Vec<Vec<u64>>) -> Self {
        let mut rows = self.rows.clone();
        rows.extend(more);
        // the existing rows are already reduced; rebuilding keeps the code simple
        Self::new(self.p, self.k, self.ncols, rows)
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    /// Canonical representative of `x` modulo the span.
    pub fn reduce(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.ncols);
        let q = self.q;
        let mut x: Vec<u64> = x.iter().map(|&v| v % q).collect();
        for (row, &(col, a)) in self.rows.iter().zip(&self.pivots) {
            let f = x[col] / self.p.pow(a);
            axpy(&mut x, row, f, q, col);
        }
        x
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.reduce(x).iter().all(|&v| v == 0)
    }

    /// `log_p` of the number of elements of the span.
    pub fn log_card(&self) -> u64 {
        self.pivots.iter().map(|&(_, a)| (self.k - a) as u64).sum()
    }

    pub fn is_subspan_of(&self, other: &Howell) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }
}

/// Kernel of `x -> x A` on `(Z/p^k)^n`, modulo the row span `rel` in the
/// target: generators of `{x : x A in span(rel)}`.
pub fn kernel_mod(p: u64, k: u32, a: &[Vec<u64>], target_cols: usize, rel: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut rows = Vec::with_capacity(n + rel.len());
    for (i, r) in a.iter().enumerate() {
        let mut row = r.clone();
        row.resize(target_cols + n, 0);
        row[target_cols + i] = 1;
        rows.push(row);
    }
    for r in rel {
        let mut row = r.clone();
        row.resize(target_cols + n, 0);
        rows.push(row);
    }
    let h = Howell::new(p, k, target_cols + n, rows);
    h.rows
        .iter()
        .zip(&h.pivots)
        .filter(|(_, &(col, _))| col >= target_cols)
        .map(|(r, _)| r[target_cols..].to_vec())
        .collect()
}
