//! Edge-path presentations of the fundamental group, Tietze simplification,
//! abelianization and a sound triviality test.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::complex::DeltaComplex;
use crate::error::{Error, Result};
use crate::homology::HomologyGroup;
use crate::matrix::{smith_normal_form, IntMatrix};

/// Default number of Tietze moves before giving up.
pub const DEFAULT_TIETZE_BUDGET: usize = 10_000;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Self { generator: self.generator, inverse: !self.inverse }
    }

    fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

pub type Word = Vec<Letter>;

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inv()).collect()
}

/// Cancels adjacent inverse pairs.
pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free reduction followed by cancellation between the two ends.
pub fn cyclic_reduce(w: &[Letter]) -> Word {
    let w = free_reduce(w);
    let mut start = 0;
    let mut end = w.len();
    while end - start >= 2 && w[start] == w[end - 1].inv() {
        start += 1;
        end -= 1;
    }
    w[start..end].to_vec()
}

/// Least rotation of `w` or of its inverse; relators with the same
/// canonical form define the same normal subgroup.
fn canonical_relator(w: &[Letter]) -> Word {
    let inv = inverse_word(w);
    let mut best = w.to_vec();
    for cand in [w, inv.as_slice()] {
        for i in 0..cand.len() {
            let rot: Word = cand[i..].iter().chain(&cand[..i]).copied().collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

/// Generators (by name) and relators. Inverse letters print in uppercase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Self {
        assert!(relators.iter().flatten().all(|l| l.generator < generators.len()), "relator uses an unknown generator");
        Self { generators, relators }
    }

    /// Parses relators written as generator names, uppercase for inverses.
    pub fn from_names(generators: &[&str], relators: &[&[&str]]) -> Result<Self> {
        let gens: Vec<String> = generators.iter().map(|g| g.to_string()).collect();
        let lookup = |name: &str| -> Result<Letter> {
            if let Some(i) = gens.iter().position(|g| g == name) {
                return Ok(Letter::new(i, false));
            }
            gens.iter()
                .position(|g| g.to_uppercase() == name && g != name)
                .map(|i| Letter::new(i, true))
                .ok_or_else(|| Error::Malformed(format!("unknown generator `{name}`")))
        };
        let relators = relators
            .iter()
            .map(|r| r.iter().map(|n| lookup(n)).collect::<Result<Word>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(gens, relators))
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let name = &self.generators[l.generator];
        if l.inverse {
            name.to_uppercase()
        } else {
            name.clone()
        }
    }

    pub fn word_names(&self, w: &[Letter]) -> Vec<String> {
        w.iter().map(|&l| self.letter_name(l)).collect()
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> =
            self.relators.iter().map(|r| if r.is_empty() { "1".into() } else { self.word_names(r).join("") }).collect();
        write!(f, "<{} | {}>", self.generators.join(", "), rels.join(", "))
    }
}

impl Serialize for GroupPresentation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rels: Vec<Vec<String>> = self.relators.iter().map(|r| self.word_names(r)).collect();
        let mut st = s.serialize_struct("GroupPresentation", 2)?;
        st.serialize_field("generators", &self.generators)?;
        st.serialize_field("relators", &rels)?;
        st.end()
    }
}

/// Breadth-first spanning tree of the 1-skeleton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub basepoint: usize,
    /// Edge joining each vertex to its parent; `None` at the basepoint.
    pub parent_edge: Vec<Option<usize>>,
    /// Flags for edges in the tree.
    pub tree_edges: Vec<bool>,
}

impl SpanningTree {
    /// The tree path from the basepoint to `v` as a word in edge letters.
    pub fn path_to(&self, c: &DeltaComplex, v: usize) -> Word {
        let mut rev = Vec::new();
        let mut cur = v;
        while let Some(e) = self.parent_edge[cur] {
            let vs = c.vertices(1, e);
            // the edge runs vs[0] → vs[1]
            if vs[1] == cur {
                rev.push(Letter::new(e, false));
                cur = vs[0];
            } else {
                rev.push(Letter::new(e, true));
                cur = vs[1];
            }
        }
        rev.reverse();
        rev
    }

    /// The loop at the basepoint running out along the tree, across edge
    /// `e`, and back.
    pub fn edge_loop(&self, c: &DeltaComplex, e: usize) -> Word {
        let vs = c.vertices(1, e);
        let mut w = self.path_to(c, vs[0]);
        w.push(Letter::new(e, false));
        w.extend(inverse_word(&self.path_to(c, vs[1])));
        free_reduce(&w)
    }
}

/// Spanning tree grown breadth-first from `basepoint`, visiting the edges at
/// each vertex in canonical order.
pub fn spanning_tree(c: &DeltaComplex, basepoint: usize) -> Result<SpanningTree> {
    let components = c.connected_components().len();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    if basepoint >= c.vertex_count() {
        return Err(Error::UnknownVertex(format!("#{basepoint}")));
    }
    let n = c.vertex_count();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in 0..c.count(1) {
        let vs = c.vertices(1, e);
        if vs[0] != vs[1] {
            incident[vs[0]].push(e);
            incident[vs[1]].push(e);
        }
    }
    let mut parent_edge = vec![None; n];
    let mut visited = vec![false; n];
    let mut tree_edges = vec![false; c.count(1)];
    visited[basepoint] = true;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(u) = queue.pop_front() {
        for &e in &incident[u] {
            let vs = c.vertices(1, e);
            let w = if vs[0] == u { vs[1] } else { vs[0] };
            if !visited[w] {
                visited[w] = true;
                parent_edge[w] = Some(e);
                tree_edges[e] = true;
                queue.push_back(w);
            }
        }
    }
    Ok(SpanningTree { basepoint, parent_edge, tree_edges })
}

/// Generator name of edge `e`.
pub fn edge_generator(e: usize) -> String {
    format!("e{e}")
}

/// One generator per edge; relators kill the spanning-tree edges and read
/// `d_2 · d_0 · d_1⁻¹` around every triangle.
pub fn edge_path_presentation(c: &DeltaComplex, basepoint: usize) -> Result<GroupPresentation> {
    let tree = spanning_tree(c, basepoint)?;
    let generators = (0..c.count(1)).map(edge_generator).collect();
    let mut relators: Vec<Word> =
        (0..c.count(1)).filter(|&e| tree.tree_edges[e]).map(|e| vec![Letter::new(e, false)]).collect();
    for t in 0..c.count(2) {
        let f = &c.cell(2, t).faces;
        relators.push(vec![Letter::new(f[2], false), Letter::new(f[0], false), Letter::new(f[1], true)]);
    }
    Ok(GroupPresentation::new(generators, relators))
}

/// Replaces generator `g` by `w` in every relator.
fn substitute(relators: &mut [Word], g: usize, w: &[Letter]) {
    let w_inv = inverse_word(w);
    for r in relators.iter_mut() {
        if !r.iter().any(|l| l.generator == g) {
            continue;
        }
        let mut out = Vec::with_capacity(r.len() + w.len());
        for &l in r.iter() {
            if l.generator == g {
                out.extend_from_slice(if l.inverse { &w_inv } else { w });
            } else {
                out.push(l);
            }
        }
        *r = out;
    }
}

/// Drops generator `g` (no longer used) and renumbers.
fn remove_generator(p: &mut GroupPresentation, g: usize) {
    p.generators.remove(g);
    for r in &mut p.relators {
        for l in r.iter_mut() {
            debug_assert_ne!(l.generator, g);
            if l.generator > g {
                l.generator -= 1;
            }
        }
    }
}

fn tidy(relators: &mut Vec<Word>) {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(relators.len());
    for r in relators.drain(..) {
        let r = cyclic_reduce(&r);
        if r.is_empty() {
            continue;
        }
        if seen.insert(canonical_relator(&r)) {
            out.push(r);
        }
    }
    *relators = out;
}

/// Applies Tietze moves until none applies or `budget` moves are spent:
/// cyclic reduction, deduplication, and elimination of a generator occurring
/// exactly once in some relator (shortest relator first). The result
/// presents an isomorphic group.
pub fn tietze_simplify(p: &GroupPresentation, budget: usize) -> GroupPresentation {
    let mut p = p.clone();
    tidy(&mut p.relators);
    for _ in 0..budget {
        let mut order: Vec<usize> = (0..p.relators.len()).collect();
        order.sort_by_key(|&i| (p.relators[i].len(), i));
        let mut pick = None;
        'find: for &i in &order {
            let r = &p.relators[i];
            let mut counts = vec![0usize; p.generators.len()];
            for l in r {
                counts[l.generator] += 1;
            }
            for (pos, l) in r.iter().enumerate() {
                if counts[l.generator] == 1 {
                    pick = Some((i, pos));
                    break 'find;
                }
            }
        }
        let Some((i, pos)) = pick else { break };
        let r = p.relators.remove(i);
        let l = r[pos];
        // u x^ε v = 1  ⇒  x^ε = u⁻¹ v⁻¹
        let mut value = inverse_word(&r[..pos]);
        value.extend(inverse_word(&r[pos + 1..]));
        let value = if l.inverse { inverse_word(&value) } else { value };
        substitute(&mut p.relators, l.generator, &value);
        remove_generator(&mut p, l.generator);
        tidy(&mut p.relators);
    }
    p
}

/// Invariants of the abelianized group, as a degree-one homology group.
pub fn abelianization(p: &GroupPresentation) -> HomologyGroup {
    let mut m = IntMatrix::zeros(p.relators.len(), p.generators.len());
    for (i, r) in p.relators.iter().enumerate() {
        for l in r {
            m[(i, l.generator)] += l.exponent();
        }
    }
    let snf = smith_normal_form(&m, false);
    HomologyGroup {
        degree: 1,
        betti: p.generators.len() - snf.rank(),
        torsion: snf.diagonal.into_iter().filter(|d| !d.is_one()).collect::<Vec<BigInt>>(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialityStatus {
    /// Simplification reached the trivial presentation.
    Trivial,
    /// The abelianization is nonzero, so the group is not trivial.
    NontrivialAbelianization,
    /// Neither certificate was found.
    Unknown,
}

impl fmt::Display for TrivialityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Trivial => "trivial",
            Self::NontrivialAbelianization => "nontrivial abelianization",
            Self::Unknown => "unknown",
        })
    }
}

pub fn triviality_status(p: &GroupPresentation) -> TrivialityStatus {
    triviality_status_with_budget(p, DEFAULT_TIETZE_BUDGET)
}

pub fn triviality_status_with_budget(p: &GroupPresentation, budget: usize) -> TrivialityStatus {
    if tietze_simplify(p, budget).is_trivial() {
        TrivialityStatus::Trivial
    } else if !abelianization(p).is_zero() {
        TrivialityStatus::NontrivialAbelianization
    } else {
        TrivialityStatus::Unknown
    }
}

/// Summary of the fundamental group of a connected complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalGroup {
    pub basepoint: String,
    pub presentation: GroupPresentation,
    pub simplified: GroupPresentation,
    pub abelianization: HomologyGroup,
    pub status: TrivialityStatus,
}

pub fn fundamental_group(c: &DeltaComplex, basepoint: usize) -> Result<FundamentalGroup> {
    let presentation = edge_path_presentation(c, basepoint)?;
    let simplified = tietze_simplify(&presentation, DEFAULT_TIETZE_BUDGET);
    Ok(FundamentalGroup {
        basepoint: c.vertex_labels()[basepoint].clone(),
        abelianization: abelianization(&presentation),
        status: triviality_status(&presentation),
        simplified,
        presentation,
    })
}
