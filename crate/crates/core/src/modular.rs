//! Homology with `Z/n` coefficients computed directly from the reduced
//! chain complex, one prime power at a time.
//!
//! Over `Z/p^k` every matrix diagonalizes to powers of `p`, so kernels and
//! cokernels decompose into cyclic `p`-groups. Combining the prime powers of
//! `n` gives the module structure over `Z/n`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::matrix::IntMatrix;

/// Factorization of `n` into `(p, k)` with `p^k` exactly dividing `n`.
pub fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut k = 0;
        while n.is_multiple_of(p) {
            n /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Dense matrix over `Z/p^k`, entries in `0..q`.
#[derive(Clone, Debug)]
struct LocalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl LocalMatrix {
    fn reduce(m: &IntMatrix, q: u64) -> Self {
        let modulus = BigInt::from(q);
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for r in 0..m.rows() {
            for x in m.row(r) {
                data.push(x.mod_floor(&modulus).to_u64().expect("reduced below q"));
            }
        }
        Self { rows: m.rows(), cols: m.cols(), data }
    }

    fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { rows: n, cols: n, data }
    }

    fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x;
    }
}

/// Arithmetic modulo `q = p^k`.
#[derive(Clone, Copy, Debug)]
struct Ring {
    p: u64,
    k: u32,
    q: u64,
}

impl Ring {
    fn new(p: u64, k: u32) -> Self {
        Self { p, k, q: p.pow(k) }
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.q - b) % self.q
    }

    /// `p`-adic valuation, `k` for zero.
    fn valuation(self, mut a: u64) -> u32 {
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    fn inverse(self, unit: u64) -> u64 {
        let e = (unit as i128).extended_gcd(&(self.q as i128));
        debug_assert_eq!(e.gcd, 1);
        e.x.rem_euclid(self.q as i128) as u64
    }

    fn row_axpy(self, m: &mut LocalMatrix, target: usize, source: usize, factor: u64) {
        if factor == 0 {
            return;
        }
        for c in 0..m.cols {
            let x = self.sub(m.get(target, c), self.mul(factor, m.get(source, c)));
            m.set(target, c, x);
        }
    }

    fn col_axpy(self, m: &mut LocalMatrix, target: usize, source: usize, factor: u64) {
        if factor == 0 {
            return;
        }
        for r in 0..m.rows {
            let x = self.sub(m.get(r, target), self.mul(factor, m.get(r, source)));
            m.set(r, target, x);
        }
    }
}

/// Smith form over `Z/p^k`: returns valuations of the diagonal (each `< k`)
/// and, if requested, `Q`, `Q⁻¹` with `P · A · Q` diagonal.
fn local_smith(ring: Ring, mut a: LocalMatrix, track: bool) -> (Vec<u32>, Option<(LocalMatrix, LocalMatrix)>) {
    let mut qm = track.then(|| LocalMatrix::identity(a.cols));
    let mut qi = track.then(|| LocalMatrix::identity(a.cols));
    let mut vals = Vec::new();
    let mut t = 0;
    while t < a.rows.min(a.cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for r in t..a.rows {
            for c in t..a.cols {
                let v = ring.valuation(a.get(r, c));
                if v < ring.k && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                }
            }
        }
        let Some((v, pr, pc)) = best else { break };
        for c in 0..a.cols {
            a.data.swap(t * a.cols + c, pr * a.cols + c);
        }
        if pc != t {
            for r in 0..a.rows {
                a.data.swap(r * a.cols + t, r * a.cols + pc);
            }
            if let (Some(qm), Some(qi)) = (&mut qm, &mut qi) {
                for r in 0..qm.rows {
                    qm.data.swap(r * qm.cols + t, r * qm.cols + pc);
                }
                for c in 0..qi.cols {
                    qi.data.swap(t * qi.cols + c, pc * qi.cols + c);
                }
            }
        }
        // scale the pivot row so the pivot is exactly p^v
        let pv = ring.p.pow(v);
        let unit = ring.inverse(a.get(t, t) / pv);
        for c in 0..a.cols {
            let x = ring.mul(a.get(t, c), unit);
            a.set(t, c, x);
        }
        for r in t + 1..a.rows {
            let factor = a.get(r, t) / pv;
            ring.row_axpy(&mut a, r, t, factor);
        }
        for c in t + 1..a.cols {
            let factor = a.get(t, c) / pv;
            ring.col_axpy(&mut a, c, t, factor);
            if let (Some(qm), Some(qi)) = (&mut qm, &mut qi) {
                // Q ← Q·(I − f e_tc); Q⁻¹ ← (I + f e_tc)·Q⁻¹
                ring.col_axpy(qm, c, t, factor);
                let neg = ring.sub(0, factor);
                ring.row_axpy(qi, t, c, neg);
            }
        }
        vals.push(v);
        t += 1;
    }
    (vals, qm.zip(qi))
}

/// Cyclic orders `p^e` (`e ≥ 1`) of `H_a(C ⊗ Z/p^k)` where `C` is given by
/// `incoming = ∂_a` (out of degree `a`) and `outgoing = ∂_{a+1}` (into it).
fn local_homology(ring: Ring, incoming: &IntMatrix, outgoing: &IntMatrix) -> Vec<u64> {
    let n = incoming.cols();
    let (vals, transforms) = local_smith(ring, LocalMatrix::reduce(incoming, ring.q), true);
    let (_, qi) = transforms.expect("tracked");
    // kernel generators: column j of Q scaled by p^{k - v_j}; free columns unscaled
    let orders: Vec<u32> = (0..n).map(|j| vals.get(j).copied().unwrap_or(ring.k)).collect();
    let b = LocalMatrix::reduce(outgoing, ring.q);
    // kernel coordinates of every boundary
    let mut rel_rows = Vec::new();
    for (j, &order) in orders.iter().enumerate() {
        if order == 0 {
            continue;
        }
        let scale = ring.p.pow(ring.k - order);
        let mut row = Vec::with_capacity(b.cols);
        for l in 0..b.cols {
            let mut y = 0u64;
            for i in 0..n {
                y = (y + ring.mul(qi.get(j, i), b.get(i, l))) % ring.q;
            }
            assert!(y.is_multiple_of(scale), "boundary outside the kernel");
            row.push(y / scale);
        }
        rel_rows.push((order, row));
    }
    let gens = rel_rows.len();
    let mut rel = LocalMatrix { rows: gens, cols: b.cols + gens, data: vec![0; gens * (b.cols + gens)] };
    for (g, (order, row)) in rel_rows.iter().enumerate() {
        for (l, &x) in row.iter().enumerate() {
            rel.set(g, l, x % ring.p.pow(*order));
        }
        rel.set(g, b.cols + g, ring.p.pow(*order) % ring.q);
    }
    let (rel_vals, _) = local_smith(ring, rel, false);
    let mut out: Vec<u64> = (0..gens)
        .map(|i| rel_vals.get(i).copied().unwrap_or(ring.k))
        .filter(|&e| e > 0)
        .map(|e| ring.p.pow(e))
        .collect();
    out.sort_unstable();
    out
}

/// `H_a(C ⊗ Z/n)` for every degree, as lists of cyclic orders (each `> 1`,
/// dividing `n`). `boundaries[a]` is `∂_a`, with `∂_0` an empty-row matrix.
pub fn homology_mod(boundaries: &[IntMatrix], n: u64) -> Vec<Vec<u64>> {
    assert!(n >= 2, "modulus must be at least 2");
    let degrees = boundaries.len();
    let mut out = vec![Vec::new(); degrees];
    for (p, k) in prime_powers(n) {
        let ring = Ring::new(p, k);
        for a in 0..degrees {
            let incoming = &boundaries[a];
            let outgoing = boundaries.get(a + 1).cloned().unwrap_or_else(|| IntMatrix::zeros(incoming.cols(), 0));
            out[a].extend(local_homology(ring, incoming, &outgoing));
        }
    }
    out
}

/// Invariant factors `d_1 | d_2 | ...` (each `> 1`) of a direct sum of
/// cyclic groups of the given orders.
pub fn invariant_factors(orders: &[BigInt]) -> Vec<BigInt> {
    // split into prime powers, then combine the largest of each prime
    let mut by_prime: std::collections::BTreeMap<u64, Vec<u64>> = std::collections::BTreeMap::new();
    for o in orders {
        let o = o.to_u64().expect("cyclic orders fit in u64");
        for (p, k) in prime_powers(o) {
            by_prime.entry(p).or_default().push(p.pow(k));
        }
    }
    let longest = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![BigInt::from(1u32); longest];
    for powers in by_prime.values_mut() {
        powers.sort_unstable_by(|a, b| b.cmp(a));
        for (i, &pp) in powers.iter().enumerate() {
            // largest powers go to the last factor
            factors[longest - 1 - i] *= pp;
        }
    }
    factors.retain(|f| !f.is_zero() && f > &BigInt::from(1u32));
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(xs: &[u64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_powers(12), vec![(2, 2), (3, 1)]);
        assert_eq!(prime_powers(7), vec![(7, 1)]);
        assert_eq!(prime_powers(1), vec![]);
    }

    #[test]
    fn invariant_factor_examples() {
        assert_eq!(invariant_factors(&big(&[2, 3])), big(&[6]));
        assert_eq!(invariant_factors(&big(&[2, 2, 3])), big(&[2, 6]));
        assert_eq!(invariant_factors(&big(&[4, 2, 9])), big(&[2, 36]));
        assert_eq!(invariant_factors(&big(&[1, 1])), big(&[]));
    }

    fn two_triangle_rp2() -> Vec<IntMatrix> {
        // two vertices, edges v→w, v→w and a loop at v, two triangles
        let d0 = IntMatrix::zeros(0, 2);
        let d1 = IntMatrix::from_rows(&[vec![-1, -1, 0], vec![1, 1, 0]]);
        let d2 = IntMatrix::from_rows(&[vec![1, 1], vec![-1, -1], vec![1, -1]]);
        vec![d0, d1, d2]
    }

    #[test]
    fn projective_plane_mod_two_and_three() {
        let b = two_triangle_rp2();
        assert_eq!(&(&b[1] * &b[2]), &IntMatrix::zeros(2, 2));
        assert_eq!(homology_mod(&b, 2), vec![vec![2], vec![2], vec![2]]);
        assert_eq!(homology_mod(&b, 3), vec![vec![3], vec![], vec![]]);
        assert_eq!(homology_mod(&b, 4), vec![vec![4], vec![2], vec![2]]);
    }

    #[test]
    fn circle_mod_six() {
        let d1 = IntMatrix::from_rows(&[vec![-1, 0, 1], vec![1, -1, 0], vec![0, 1, -1]]);
        let h = homology_mod(&[IntMatrix::zeros(0, 3), d1], 6);
        let inv: Vec<Vec<BigInt>> = h.iter().map(|o| invariant_factors(&big(o))).collect();
        assert_eq!(inv, vec![big(&[6]), big(&[6])]);
    }
}
