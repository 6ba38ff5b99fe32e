//! Chain complexes, their homology over the supported coefficient rings,
//! the orbit complex of a group action, and maps induced on homology.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::action::{orbits, relative_sign, transporter, ComplexAction, GroupAction};
use crate::complex::{DeltaComplex, SimplexImage, SimplicialMap};
use crate::error::{Error, Result};
use crate::incidence::IncidenceStructure;
use crate::matrix::{serialize_bigint_rows, serialize_bigints, smith_normal_form, IntMatrix};
use crate::modular::{homology_mod, invariant_factors};

/// Coefficient module for homology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficients {
    Integers,
    IntegersMod(u64),
    Rationals,
    /// `Q/Λ` with `Λ = Z[1/p]`; `p = 1` gives `Q/Z`.
    TorsionQuotient {
        p: u64,
    },
}

impl Coefficients {
    /// Parses `z`, `q`, `zN` or `tq`, checking `zN` against the exponential
    /// characteristic `p` (`1` for none).
    pub fn parse(token: &str, p: u64) -> Result<Self> {
        let t = token.trim().to_ascii_lowercase();
        let m = match t.as_str() {
            "z" => Self::Integers,
            "q" => Self::Rationals,
            "tq" => Self::TorsionQuotient { p },
            _ => {
                let n: u64 = t
                    .strip_prefix('z')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::InvalidCoefficients(format!("unknown coefficient token `{token}`")))?;
                Self::IntegersMod(n)
            }
        };
        m.check(p)?;
        Ok(m)
    }

    fn check(self, p: u64) -> Result<()> {
        match self {
            Self::IntegersMod(n) if n < 2 => Err(Error::InvalidCoefficients(format!("modulus {n} is below 2"))),
            Self::IntegersMod(n) if p > 1 && n.gcd(&p) != 1 => {
                Err(Error::InvalidCoefficients(format!("Z/{n} is not a module over Z[1/{p}]")))
            }
            _ => Ok(()),
        }
    }

    pub fn token(self) -> String {
        match self {
            Self::Integers => "z".into(),
            Self::IntegersMod(n) => format!("z{n}"),
            Self::Rationals => "q".into(),
            Self::TorsionQuotient { .. } => "tq".into(),
        }
    }
}

impl fmt::Display for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integers => f.write_str("Z"),
            Self::IntegersMod(n) => write!(f, "Z/{n}"),
            Self::Rationals => f.write_str("Q"),
            Self::TorsionQuotient { p: 1 } => f.write_str("Q/Z"),
            Self::TorsionQuotient { p } => write!(f, "Q/Z[1/{p}]"),
        }
    }
}

impl FromStr for Coefficients {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 1)
    }
}

impl Serialize for Coefficients {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Free chain groups with boundary matrices. `boundaries[a]` is `∂_a`, of
/// shape `ranks[a-1] × ranks[a]`; `∂_0` has no rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    ranks: Vec<usize>,
    boundaries: Vec<IntMatrix>,
    coefficients: Coefficients,
}

impl ChainComplex {
    pub fn new(ranks: Vec<usize>, mut higher: Vec<IntMatrix>) -> Result<Self> {
        if higher.len() + 1 != ranks.len() && !(ranks.is_empty() && higher.is_empty()) {
            return Err(Error::InvalidComplex("one boundary matrix per positive degree is required".into()));
        }
        for (i, m) in higher.iter().enumerate() {
            let a = i + 1;
            if m.rows() != ranks[a - 1] || m.cols() != ranks[a] {
                return Err(Error::InvalidComplex(format!("boundary in degree {a} has the wrong shape")));
            }
        }
        let mut boundaries = Vec::with_capacity(ranks.len());
        if let Some(&r0) = ranks.first() {
            boundaries.push(IntMatrix::zeros(0, r0));
        }
        boundaries.append(&mut higher);
        Ok(Self { ranks, boundaries, coefficients: Coefficients::Integers })
    }

    pub fn with_coefficients(mut self, m: Coefficients) -> Self {
        self.coefficients = m;
        self
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coefficients
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn degrees(&self) -> usize {
        self.ranks.len()
    }

    /// `∂_a`; zero with the right shape outside the stored range.
    pub fn boundary(&self, a: usize) -> IntMatrix {
        match self.boundaries.get(a) {
            Some(m) => m.clone(),
            None => IntMatrix::zeros(self.ranks.get(a - 1).copied().unwrap_or(0), 0),
        }
    }

    pub fn boundaries(&self) -> &[IntMatrix] {
        &self.boundaries
    }

    /// Checks `∂_{a} ∘ ∂_{a+1} = 0` in every degree.
    pub fn check(&self) -> Result<()> {
        for a in 1..self.boundaries.len().saturating_sub(1) {
            if !(&self.boundaries[a] * &self.boundaries[a + 1]).is_zero() {
                return Err(Error::NotAComplex { degree: a });
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks.iter().enumerate().map(|(a, &r)| if a % 2 == 0 { r as i64 } else { -(r as i64) }).sum()
    }

    /// Homology over the complex's own coefficients. `Z/n` is computed
    /// directly from the reduced complex; `Q/Λ` from the integral answer.
    pub fn homology(&self) -> Result<HomologyResult> {
        match self.coefficients {
            Coefficients::Integers => integral_homology(self),
            Coefficients::IntegersMod(n) => homology_mod_direct(self, n),
            m => Ok(homology_with_coefficients(&integral_homology(self)?, m)),
        }
    }
}

/// The simplicial chain complex: `∂ = Σ (−1)^i d_i` in canonical order.
pub fn chain_complex(c: &DeltaComplex) -> ChainComplex {
    let counts = c.counts();
    let mut higher = Vec::new();
    for a in 1..counts.len() {
        let mut m = IntMatrix::zeros(counts[a - 1], counts[a]);
        for (idx, cell) in c.cells(a).iter().enumerate() {
            for (i, &f) in cell.faces.iter().enumerate() {
                m[(f, idx)] += if i % 2 == 0 { 1 } else { -1 };
            }
        }
        higher.push(m);
    }
    ChainComplex::new(counts, higher).expect("shapes follow the complex")
}

/// One homology group: `betti` copies of the coefficient module plus cyclic
/// torsion summands with orders `d_1 | d_2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub betti: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn zero(degree: usize) -> Self {
        Self { degree, betti: 0, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    /// Same group, ignoring the degree label.
    pub fn same_group(&self, other: &Self) -> bool {
        self.betti == other.betti && self.torsion == other.torsion
    }

    /// Human-readable form such as `Z^2 + Z/2`.
    pub fn describe(&self, m: Coefficients) -> String {
        let mut parts = Vec::new();
        let free = m.to_string();
        match self.betti {
            0 => {}
            1 => parts.push(free),
            b if free.contains('/') => parts.push(format!("({free})^{b}")),
            b => parts.push(format!("{free}^{b}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyResult {
    pub coefficients: Coefficients,
    pub groups: Vec<HomologyGroup>,
}

impl HomologyResult {
    /// `H_a`, zero outside the computed range.
    pub fn group(&self, a: usize) -> HomologyGroup {
        self.groups.get(a).cloned().unwrap_or_else(|| HomologyGroup::zero(a))
    }

    pub fn bettis(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.betti).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.groups.iter().map(|g| if g.degree % 2 == 0 { g.betti as i64 } else { -(g.betti as i64) }).sum()
    }

    /// Degree-wise equality, treating missing degrees as zero.
    pub fn same_groups(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }

    /// Lowest degree where the two results differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let n = self.groups.len().max(other.groups.len());
        (0..n).find(|&a| !self.group(a).same_group(&other.group(a)))
    }

    /// True when the homology is that of a point: one copy of the
    /// coefficients in degree 0 and nothing else.
    pub fn is_acyclic(&self) -> bool {
        self.groups.iter().all(|g| if g.degree == 0 { g.betti == 1 && g.torsion.is_empty() } else { g.is_zero() })
            && !self.groups.is_empty()
    }

    pub fn describe(&self) -> Vec<String> {
        self.groups.iter().map(|g| format!("H_{} = {}", g.degree, g.describe(self.coefficients))).collect()
    }
}

/// `H_a = Z^{b_a} ⊕ ⊕ Z/d_i` from the Smith forms of `∂_a` and `∂_{a+1}`.
pub fn integral_homology(cc: &ChainComplex) -> Result<HomologyResult> {
    cc.check()?;
    let n = cc.degrees();
    let snfs: Vec<_> = (0..n).map(|a| smith_normal_form(&cc.boundaries[a], false)).collect();
    let groups = (0..n)
        .map(|a| {
            let incoming = snfs[a].rank();
            let (outgoing, torsion) = snfs.get(a + 1).map_or((0, Vec::new()), |s| (s.rank(), s.torsion()));
            HomologyGroup { degree: a, betti: cc.ranks[a] - incoming - outgoing, torsion }
        })
        .collect();
    Ok(HomologyResult { coefficients: Coefficients::Integers, groups })
}

/// Sorts cyclic orders dividing `n` into copies of `Z/n` and the remaining
/// invariant factors.
fn normalize_mod(orders: &[BigInt], n: u64) -> (usize, Vec<BigInt>) {
    let n = BigInt::from(n);
    let factors = invariant_factors(orders);
    let rank = factors.iter().filter(|f| **f == n).count();
    (rank, factors.into_iter().filter(|f| *f != n).collect())
}

/// Universal coefficients: `H_a(M) = H_a ⊗ M ⊕ Tor(H_{a−1}, M)`.
pub fn homology_with_coefficients(h: &HomologyResult, m: Coefficients) -> HomologyResult {
    assert_eq!(h.coefficients, Coefficients::Integers, "expects integral homology");
    let groups = h
        .groups
        .iter()
        .map(|g| {
            let below: &[BigInt] = if g.degree == 0 { &[] } else { &h.groups[g.degree - 1].torsion };
            match m {
                Coefficients::Integers => g.clone(),
                Coefficients::Rationals => HomologyGroup { degree: g.degree, betti: g.betti, torsion: Vec::new() },
                Coefficients::IntegersMod(n) => {
                    let nb = BigInt::from(n);
                    let mut orders = vec![nb.clone(); g.betti];
                    orders.extend(g.torsion.iter().chain(below).map(|d| d.gcd(&nb)));
                    let (betti, torsion) = normalize_mod(&orders, n);
                    HomologyGroup { degree: g.degree, betti, torsion }
                }
                Coefficients::TorsionQuotient { p } => {
                    // Z ⊗ Q/Λ = Q/Λ, torsion ⊗ divisible = 0, Tor(Z/d, Q/Λ) = Z/d'
                    let orders: Vec<BigInt> = below.iter().map(|d| prime_to(d, p)).collect();
                    HomologyGroup { degree: g.degree, betti: g.betti, torsion: invariant_factors(&orders) }
                }
            }
        })
        .collect();
    HomologyResult { coefficients: m, groups }
}

/// The largest divisor of `d` prime to `p`.
fn prime_to(d: &BigInt, p: u64) -> BigInt {
    let mut d = d.clone();
    if p > 1 {
        let p = BigInt::from(p);
        while d.is_multiple_of(&p) && !d.is_zero() {
            d /= &p;
        }
    }
    d
}

/// Homology of `C ⊗ Z/n`, computed without reference to the integral
/// answer.
pub fn homology_mod_direct(cc: &ChainComplex, n: u64) -> Result<HomologyResult> {
    cc.check()?;
    if n < 2 {
        return Err(Error::InvalidCoefficients(format!("modulus {n} is below 2")));
    }
    let orders = homology_mod(&cc.boundaries, n);
    let groups = orders
        .iter()
        .enumerate()
        .map(|(a, o)| {
            let big: Vec<BigInt> = o.iter().map(|&x| BigInt::from(x)).collect();
            let (betti, torsion) = normalize_mod(&big, n);
            HomologyGroup { degree: a, betti, torsion }
        })
        .collect();
    Ok(HomologyResult { coefficients: Coefficients::IntegersMod(n), groups })
}

/// The orbit complex: one basis element per orbit of simplices, with the
/// boundary of an orbit taken on its least representative and each face
/// identified with its orbit's representative, keeping track of the
/// orientation change.
pub fn weight_complex(s: &IncidenceStructure, g: &GroupAction, m: Coefficients) -> Result<ChainComplex> {
    weight_complex_of(&ComplexAction::new(s, g)?, m)
}

/// [`weight_complex`] for an already enumerated action.
pub fn weight_complex_of(action: &ComplexAction, m: Coefficients) -> Result<ChainComplex> {
    if let Some(v) = crate::action::check_admissible(action).first() {
        return Err(Error::NotAdmissible(v.to_string()));
    }
    let c = action.complex();
    let orb = orbits(action);
    let counts = orb.counts();
    let mut higher = Vec::new();
    for a in 1..counts.len() {
        let mut d = IntMatrix::zeros(counts[a - 1], counts[a]);
        for k in 0..counts[a] {
            let r = orb.representative(a, k);
            for j in 0..=a {
                let f = c.face(a, r, j);
                let fo = orb.orbit_of[a - 1][f];
                let fr = orb.representative(a - 1, fo);
                let h = transporter(action, a - 1, f, fr);
                let moved: Vec<usize> = c.vertices(a - 1, f).iter().map(|&v| h.simplices[0][v]).collect();
                let eps = relative_sign(&moved, c.vertices(a - 1, fr));
                let sign = if j % 2 == 0 { eps } else { -eps };
                d[(fo, k)] += i64::from(sign);
            }
        }
        higher.push(d);
    }
    Ok(ChainComplex::new(counts, higher)?.with_coefficients(m))
}

/// The chain map of a simplicial map: degenerate simplices go to zero,
/// others to their signed image. Fails if it does not commute with the
/// boundaries.
pub fn chain_map(f: &SimplicialMap, src: &DeltaComplex, dst: &DeltaComplex) -> Result<Vec<IntMatrix>> {
    f.check_vertices(src, dst)?;
    let src_cc = chain_complex(src);
    let dst_cc = chain_complex(dst);
    let mut maps = Vec::with_capacity(src.counts().len());
    for a in 0..src.counts().len() {
        let mut m = IntMatrix::zeros(dst.count(a), src.count(a));
        for (idx, image) in f.images(a).iter().enumerate() {
            if let SimplexImage::Simplex { index, sign } = *image {
                m[(index, idx)] += i64::from(sign);
            }
        }
        maps.push(m);
    }
    for a in 1..maps.len() {
        let lhs = &dst_cc.boundary(a) * &maps[a];
        let rhs = &maps[a - 1] * &src_cc.boundary(a);
        if lhs != rhs {
            return Err(Error::NotAChainMap { degree: a });
        }
    }
    Ok(maps)
}

/// Generators of `H_a` as cycles, with a way to read off coordinates.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    pub degree: usize,
    /// Cycles, free generators first, then torsion generators.
    pub generators: Vec<Vec<BigInt>>,
    /// `None` for free generators, `Some(d)` for generators of order `d`.
    pub orders: Vec<Option<BigInt>>,
    kernel_coords: IntMatrix,
    reduce: IntMatrix,
    positions: Vec<usize>,
}

impl HomologyBasis {
    pub fn group(&self) -> HomologyGroup {
        HomologyGroup {
            degree: self.degree,
            betti: self.orders.iter().filter(|o| o.is_none()).count(),
            torsion: self.orders.iter().flatten().cloned().collect(),
        }
    }

    /// Coordinates of a cycle; torsion coordinates are reduced.
    pub fn coordinates(&self, cycle: &[BigInt]) -> Vec<BigInt> {
        let w = self.kernel_coords.mul_vec(cycle);
        let u = self.reduce.mul_vec(&w);
        self.positions
            .iter()
            .zip(&self.orders)
            .map(|(&p, o)| match o {
                Some(d) => u[p].mod_floor(d),
                None => u[p].clone(),
            })
            .collect()
    }
}

/// Bases of all homology groups of an integral chain complex.
pub fn homology_bases(cc: &ChainComplex) -> Result<Vec<HomologyBasis>> {
    cc.check()?;
    let mut out = Vec::with_capacity(cc.degrees());
    for a in 0..cc.degrees() {
        let snf = smith_normal_form(&cc.boundaries[a], true);
        let r = snf.rank();
        let t = snf.transforms.expect("tracked");
        let kernel = t.q.cols_from(r);
        let kernel_coords = t.q_inv.rows_from(r);
        let outgoing = cc.boundary(a + 1);
        let z = &kernel_coords * &outgoing;
        let snf2 = smith_normal_form(&z, true);
        let t2 = snf2.transforms.as_ref().expect("tracked");
        let k = kernel.cols();
        let mut positions = Vec::new();
        let mut orders = Vec::new();
        for j in snf2.rank()..k {
            positions.push(j);
            orders.push(None);
        }
        for (j, d) in snf2.diagonal.iter().enumerate() {
            if !d.is_one() {
                positions.push(j);
                orders.push(Some(d.clone()));
            }
        }
        let generators = positions.iter().map(|&j| kernel.mul_vec(&t2.p_inv.column(j))).collect();
        out.push(HomologyBasis { degree: a, generators, orders, kernel_coords, reduce: t2.p.clone(), positions });
    }
    Ok(out)
}

/// Matrix of a map on `H_a` in the bases of [`homology_bases`]: column `j`
/// holds the coordinates of the image of the `j`-th source generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyMap {
    pub degree: usize,
    pub source: HomologyGroup,
    pub target: HomologyGroup,
    #[serde(serialize_with = "serialize_bigint_rows")]
    pub matrix: Vec<Vec<BigInt>>,
}

impl HomologyMap {
    /// True for the identity matrix on a group mapped to itself.
    pub fn is_identity(&self) -> bool {
        self.source.same_group(&self.target)
            && self
                .matrix
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
    }

    /// True when the map is invertible. A surjection between isomorphic
    /// finitely generated abelian groups is an isomorphism, so it suffices
    /// that the images together with the target relations span everything.
    pub fn is_isomorphism(&self) -> bool {
        if !self.source.same_group(&self.target) {
            return false;
        }
        let n = self.matrix.len();
        let cols = self.matrix.first().map_or(0, Vec::len);
        let b = self.target.betti;
        let mut m = IntMatrix::zeros(n, cols + n - b);
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        for (t, d) in self.target.torsion.iter().enumerate() {
            m[(b + t, cols + t)] = d.clone();
        }
        let snf = smith_normal_form(&m, false);
        snf.rank() == n && snf.diagonal.iter().all(One::is_one)
    }
}

/// Maps induced on homology by a simplicial map, via the chain map and the
/// Smith bases on both sides.
pub fn induced_homology_map(f: &SimplicialMap, src: &DeltaComplex, dst: &DeltaComplex) -> Result<Vec<HomologyMap>> {
    let maps = chain_map(f, src, dst)?;
    let src_bases = homology_bases(&chain_complex(src))?;
    let dst_bases = homology_bases(&chain_complex(dst))?;
    let mut out = Vec::with_capacity(src_bases.len());
    for (a, sb) in src_bases.iter().enumerate() {
        let target = dst_bases.get(a);
        let tgroup = target.map_or_else(|| HomologyGroup::zero(a), HomologyBasis::group);
        let rows = tgroup.betti + tgroup.torsion.len();
        let mut matrix = vec![vec![BigInt::zero(); sb.generators.len()]; rows];
        if let Some(tb) = target {
            for (j, gen) in sb.generators.iter().enumerate() {
                let image = maps[a].mul_vec(gen);
                for (i, x) in tb.coordinates(&image).into_iter().enumerate() {
                    matrix[i][j] = x;
                }
            }
        }
        out.push(HomologyMap { degree: a, source: sb.group(), target: tgroup, matrix });
    }
    Ok(out)
}
