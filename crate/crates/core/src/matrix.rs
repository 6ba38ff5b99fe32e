//! Dense integer matrices with arbitrary-precision entries, and their Smith
//! normal form.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Serializes integers as JSON numbers when they fit in `i64`, otherwise as
/// decimal strings.
pub fn serialize_bigints<S: serde::Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use num_traits::ToPrimitive;
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        match x.to_i64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

/// Row-wise form of [`serialize_bigints`].
pub fn serialize_bigint_rows<S: serde::Serializer>(rows: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Row<'a>(&'a [BigInt]);
    impl serde::Serialize for Row<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize_bigints(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in rows {
        seq.serialize_element(&Row(r))?;
    }
    seq.end()
}

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        f.write_str("]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.iter().flatten().map(|&x| x.into()).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Rows `start..` as a new matrix.
    pub fn rows_from(&self, start: usize) -> Self {
        let rows = self.rows - start;
        Self { rows, cols: self.cols, data: self.data[start * self.cols..].to_vec() }
    }

    /// Columns `start..` as a new matrix.
    pub fn cols_from(&self, start: usize) -> Self {
        let cols = self.cols - start;
        let mut m = Self::zeros(self.rows, cols);
        for r in 0..self.rows {
            for c in 0..cols {
                m[(r, c)] = self[(r, start + c)].clone();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| self.row(r).iter().zip(v).fold(BigInt::zero(), |acc, (a, b)| acc + a * b)).collect()
    }

    /// Entry values as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        (0..self.rows).map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[target] += factor * row[source]
    fn add_row(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let delta = &self.data[source * self.cols + c] * factor;
            self.data[target * self.cols + c] += delta;
        }
    }

    /// col[target] += factor * col[source]
    fn add_col(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let delta = &self.data[r * self.cols + source] * factor;
            self.data[r * self.cols + target] += delta;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let x = std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = -x;
        }
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let prod = a * &rhs[(k, c)];
                    out[(r, c)] += prod;
                }
            }
        }
        out
    }
}

/// Unimodular transforms with their inverses: `diag = P · A · Q`.
#[derive(Clone, Debug)]
pub struct SmithTransforms {
    pub p: IntMatrix,
    pub p_inv: IntMatrix,
    pub q: IntMatrix,
    pub q_inv: IntMatrix,
}

#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Nonzero diagonal entries, positive, each dividing the next.
    pub diagonal: Vec<BigInt>,
    pub transforms: Option<SmithTransforms>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Diagonal entries greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

struct Reducer {
    a: IntMatrix,
    t: Option<SmithTransforms>,
}

impl Reducer {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        if let Some(t) = &mut self.t {
            t.p.swap_rows(i, j);
            t.p_inv.swap_cols(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        if let Some(t) = &mut self.t {
            t.q.swap_cols(i, j);
            t.q_inv.swap_rows(i, j);
        }
    }

    fn add_row(&mut self, target: usize, source: usize, factor: &BigInt) {
        self.a.add_row(target, source, factor);
        if let Some(t) = &mut self.t {
            t.p.add_row(target, source, factor);
            // inverse of (I + f e_ts) is (I - f e_ts), applied on the right
            t.p_inv.add_col(source, target, &-factor);
        }
    }

    fn add_col(&mut self, target: usize, source: usize, factor: &BigInt) {
        self.a.add_col(target, source, factor);
        if let Some(t) = &mut self.t {
            t.q.add_col(target, source, factor);
            t.q_inv.add_row(source, target, &-factor);
        }
    }

    fn negate_row(&mut self, r: usize) {
        self.a.negate_row(r);
        if let Some(t) = &mut self.t {
            t.p.negate_row(r);
            for i in 0..t.p_inv.rows {
                let x = std::mem::take(&mut t.p_inv[(i, r)]);
                t.p_inv[(i, r)] = -x;
            }
        }
    }

    /// Position of the nonzero entry of least absolute value in the lower
    /// right block starting at `t`.
    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for r in t..self.a.rows {
            for c in t..self.a.cols {
                let x = &self.a[(r, c)];
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(br, bc)| x.abs() < self.a[(br, bc)].abs()) {
                    best = Some((r, c));
                }
            }
        }
        best
    }

    fn run(mut self) -> SmithForm {
        let (rows, cols) = (self.a.rows, self.a.cols);
        let mut t = 0;
        while t < rows.min(cols) {
            let Some((pr, pc)) = self.min_pivot(t) else { break };
            self.swap_rows(t, pr);
            self.swap_cols(t, pc);
            loop {
                let mut dirty = false;
                for r in t + 1..rows {
                    if self.a[(r, t)].is_zero() {
                        continue;
                    }
                    let q = self.a[(r, t)].div_floor(&self.a[(t, t)]);
                    self.add_row(r, t, &-q);
                    if !self.a[(r, t)].is_zero() {
                        dirty = true;
                    }
                }
                for c in t + 1..cols {
                    if self.a[(t, c)].is_zero() {
                        continue;
                    }
                    let q = self.a[(t, c)].div_floor(&self.a[(t, t)]);
                    self.add_col(c, t, &-q);
                    if !self.a[(t, c)].is_zero() {
                        dirty = true;
                    }
                }
                if dirty {
                    // a remainder smaller than the pivot appeared; re-pivot
                    let (pr, pc) = self.min_pivot_in_cross(t);
                    self.swap_rows(t, pr);
                    self.swap_cols(t, pc);
                    continue;
                }
                // row and column are clear; enforce divisibility of the rest
                let pivot = self.a[(t, t)].clone();
                let bad = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !self.a[(r, c)].is_multiple_of(&pivot)));
                match bad {
                    Some(r) => self.add_row(t, r, &BigInt::one()),
                    None => break,
                }
            }
            if self.a[(t, t)].is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
        let diagonal = (0..t).map(|i| self.a[(i, i)].clone()).collect();
        SmithForm { diagonal, transforms: self.t }
    }

    /// Least nonzero entry in row `t` or column `t`, from position `t` on.
    fn min_pivot_in_cross(&self, t: usize) -> (usize, usize) {
        let mut best = (t, t);
        let better = |x: &BigInt, cur: &BigInt| !x.is_zero() && (cur.is_zero() || x.abs() < cur.abs());
        for r in t + 1..self.a.rows {
            if better(&self.a[(r, t)], &self.a[best]) {
                best = (r, t);
            }
        }
        for c in t + 1..self.a.cols {
            if better(&self.a[(t, c)], &self.a[best]) {
                best = (t, c);
            }
        }
        best
    }
}

/// Smith normal form over the integers, pivoting on entries of least
/// absolute value. With `with_transforms`, also returns unimodular `P`, `Q`
/// (and inverses) with `P · m · Q` diagonal.
pub fn smith_normal_form(m: &IntMatrix, with_transforms: bool) -> SmithForm {
    let t = with_transforms.then(|| SmithTransforms {
        p: IntMatrix::identity(m.rows),
        p_inv: IntMatrix::identity(m.rows),
        q: IntMatrix::identity(m.cols),
        q_inv: IntMatrix::identity(m.cols),
    });
    Reducer { a: m.clone(), t }.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(m: &IntMatrix) -> Vec<i64> {
        smith_normal_form(m, false).diagonal.iter().map(|d| i64::try_from(d).unwrap()).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(diag(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), vec![1, 6]);
        assert_eq!(diag(&IntMatrix::zeros(3, 2)), Vec::<i64>::new());
        assert_eq!(diag(&IntMatrix::identity(3)), vec![1, 1, 1]);
        assert_eq!(diag(&IntMatrix::zeros(0, 4)), Vec::<i64>::new());
        // RP^2 boundary d_2 of the two-triangle complex
        assert_eq!(diag(&IntMatrix::from_rows(&[vec![1, 1], vec![-1, -1], vec![1, -1]])), vec![1, 2]);
    }

    #[test]
    fn large_entries_do_not_overflow() {
        let big = BigInt::from(1u64 << 62) * BigInt::from(1u64 << 62);
        let mut m = IntMatrix::zeros(2, 2);
        m[(0, 0)] = big.clone();
        m[(1, 1)] = big.clone() * 3;
        let d = smith_normal_form(&m, false).diagonal;
        assert_eq!(d, vec![big.clone(), big * 3]);
    }

    /// Determinantal-divisor oracle: the product of the first k invariant
    /// factors is the gcd of all k×k minors.
    fn minors_gcd(m: &[Vec<i64>], k: usize) -> i64 {
        let rows = m.len();
        let cols = m[0].len();
        let mut g = 0i64;
        let row_sets = subsets(rows, k);
        let col_sets = subsets(cols, k);
        for rs in &row_sets {
            for cs in &col_sets {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
                g = num_integer::gcd(g, det(&sub));
            }
        }
        g
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn matches_determinantal_divisors(rows in 1usize..4, cols in 1usize..4, seed in proptest::collection::vec(-6i64..7, 16)) {
            let m: Vec<Vec<i64>> = (0..rows).map(|r| (0..cols).map(|c| seed[r * 4 + c]).collect()).collect();
            let d = diag(&IntMatrix::from_rows(&m));
            let mut prod = 1i64;
            for k in 1..=rows.min(cols) {
                let g = minors_gcd(&m, k);
                if k <= d.len() {
                    prod *= d[k - 1];
                    prop_assert_eq!(prod, g);
                } else {
                    prop_assert_eq!(g, 0);
                }
            }
            for w in d.windows(2) {
                prop_assert!(w[1] % w[0] == 0);
            }
        }

        #[test]
        fn transforms_reproduce_diagonal(rows in 0usize..5, cols in 0usize..5, seed in proptest::collection::vec(-9i64..10, 25)) {
            let m: Vec<Vec<i64>> = (0..rows).map(|r| (0..cols).map(|c| seed[r * 5 + c]).collect()).collect();
            let a = if rows == 0 { IntMatrix::zeros(0, cols) } else { IntMatrix::from_rows(&m) };
            let snf = smith_normal_form(&a, true);
            let t = snf.transforms.as_ref().unwrap();
            let d = &(&t.p * &a) * &t.q;
            for r in 0..rows {
                for c in 0..cols {
                    let expected = if r == c && r < snf.rank() { snf.diagonal[r].clone() } else { BigInt::zero() };
                    prop_assert_eq!(&d[(r, c)], &expected);
                }
            }
            prop_assert_eq!(&t.p * &t.p_inv, IntMatrix::identity(rows));
            prop_assert_eq!(&t.q * &t.q_inv, IntMatrix::identity(cols));
        }
    }
}
