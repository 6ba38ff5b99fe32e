//! Finite coverings of a Δ-complex given by fibers over vertices and
//! bijections along edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{CellSpec, DeltaComplex, SimplexId, SimplexImage, SimplicialMap};
use crate::error::{Error, Result};
use crate::incidence::drop_position;
use crate::pi1::{edge_generator, edge_path_presentation, spanning_tree, triviality_status, Letter, TrivialityStatus};
use crate::report::ValidationReport;

/// Fibers keyed by vertex label and transitions keyed by edge key
/// (`"E1,E2/p"`). The transition of an edge maps the fiber at its first
/// vertex to the fiber at its second.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringDatum {
    pub fibers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
}

impl CoveringDatum {
    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value.clone())?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A datum with fibers and transitions indexed like the base complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedDatum {
    /// Fiber elements over each vertex.
    pub fibers: Vec<Vec<String>>,
    /// `transitions[e][i]`: index in the head fiber of the `i`-th element of
    /// the tail fiber.
    pub transitions: Vec<Vec<usize>>,
}

impl ResolvedDatum {
    /// Matches the datum against the base. Every vertex needs a fiber and
    /// every edge a bijection; an edge between singleton fibers may omit it.
    pub fn new(c: &DeltaComplex, d: &CoveringDatum) -> Result<Self> {
        for label in d.fibers.keys() {
            if !c.vertex_labels().contains(label) {
                return Err(Error::UnknownVertex(label.clone()));
            }
        }
        let mut fibers = Vec::with_capacity(c.vertex_count());
        for label in c.vertex_labels() {
            let fiber = d.fibers.get(label).ok_or_else(|| Error::InvalidCovering(format!("no fiber over {label}")))?;
            let distinct: BTreeSet<&String> = fiber.iter().collect();
            if distinct.len() != fiber.len() {
                return Err(Error::InvalidCovering(format!("fiber over {label} repeats an element")));
            }
            if fiber.is_empty() {
                return Err(Error::InvalidCovering(format!("fiber over {label} is empty")));
            }
            fibers.push(fiber.clone());
        }
        let mut keyed = BTreeMap::new();
        for key in d.transitions.keys() {
            match c.find_key(key) {
                Some((1, e)) => {
                    keyed.insert(e, key);
                }
                _ => return Err(Error::InvalidCovering(format!("`{key}` is not an edge of the base"))),
            }
        }
        let mut transitions = Vec::with_capacity(c.count(1));
        for e in 0..c.count(1) {
            let vs = c.vertices(1, e);
            let (tail, head) = (&fibers[vs[0]], &fibers[vs[1]]);
            let key = c.key(1, e);
            if tail.len() != head.len() {
                return Err(Error::InvalidCovering(format!("fibers at the ends of {key} differ in size")));
            }
            let Some(&k) = keyed.get(&e) else {
                if tail.len() == 1 {
                    transitions.push(vec![0]);
                    continue;
                }
                return Err(Error::InvalidCovering(format!("no transition for {key}")));
            };
            let map = &d.transitions[k];
            let mut perm = Vec::with_capacity(tail.len());
            let mut hit = vec![false; head.len()];
            for w in tail {
                let image = map
                    .get(w)
                    .ok_or_else(|| Error::InvalidCovering(format!("transition for {key} does not map `{w}`")))?;
                let j = head
                    .iter()
                    .position(|x| x == image)
                    .ok_or_else(|| Error::InvalidCovering(format!("transition for {key} maps to unknown `{image}`")))?;
                if std::mem::replace(&mut hit[j], true) {
                    return Err(Error::InvalidCovering(format!("transition for {key} is not injective")));
                }
                perm.push(j);
            }
            if map.len() != tail.len() {
                return Err(Error::InvalidCovering(format!("transition for {key} maps unknown elements")));
            }
            transitions.push(perm);
        }
        Ok(Self { fibers, transitions })
    }

    /// Moves a fiber element along a word of edge letters.
    pub fn transport(&self, word: &[Letter], mut w: usize) -> usize {
        for l in word {
            let t = &self.transitions[l.generator];
            w = if l.inverse { t.iter().position(|&x| x == w).expect("bijection") } else { t[w] };
        }
        w
    }

    /// Transition along the edge from vertex `0` to vertex `i` of a simplex.
    fn along_front(&self, c: &DeltaComplex, dim: usize, idx: usize, i: usize, w: usize) -> usize {
        if i == 0 {
            return w;
        }
        let e = edge_between(c, dim, idx, 0, i);
        self.transitions[e][w]
    }
}

/// Index of the edge of a simplex spanned by its vertices `i < j`.
fn edge_between(c: &DeltaComplex, dim: usize, idx: usize, i: usize, j: usize) -> usize {
    let mut d = dim;
    let mut cur = idx;
    let mut positions: Vec<usize> = (0..=dim).collect();
    // drop all other positions, highest first, so earlier positions stay put
    while d > 1 {
        let drop = (0..=d).rev().find(|&p| positions[p] != i && positions[p] != j).expect("more than two vertices");
        cur = c.face(d, cur, drop);
        positions = drop_position(&positions, drop);
        d -= 1;
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CocycleViolation {
    pub simplex: String,
}

impl fmt::Display for CocycleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "transitions around {} do not compose", self.simplex)
    }
}

pub type CocycleReport = ValidationReport<CocycleViolation>;

/// For every triangle `t`: `transition(d_0 t) ∘ transition(d_2 t) =
/// transition(d_1 t)`.
pub fn validate_cocycle(c: &DeltaComplex, d: &CoveringDatum) -> Result<CocycleReport> {
    let r = ResolvedDatum::new(c, d)?;
    Ok(cocycle_report(c, &r))
}

fn cocycle_report(c: &DeltaComplex, r: &ResolvedDatum) -> CocycleReport {
    let mut report = CocycleReport::default();
    for t in 0..c.count(2) {
        let f = &c.cell(2, t).faces;
        let (t0, t1, t2) = (&r.transitions[f[0]], &r.transitions[f[1]], &r.transitions[f[2]]);
        if (0..t2.len()).any(|w| t0[t2[w]] != t1[w]) {
            report.push(CocycleViolation { simplex: c.key(2, t) });
        }
    }
    report
}

/// The total space with its projection onto the base.
#[derive(Clone, Debug)]
pub struct Cover {
    pub complex: DeltaComplex,
    pub projection: SimplicialMap,
    pub datum: ResolvedDatum,
}

/// Builds the covering complex: a simplex for each base simplex and element
/// of the fiber at its first vertex, with faces moved along the edges.
pub fn total_space(c: &DeltaComplex, d: &CoveringDatum) -> Result<Cover> {
    let r = ResolvedDatum::new(c, d)?;
    build_cover(c, r)
}

fn build_cover(c: &DeltaComplex, r: ResolvedDatum) -> Result<Cover> {
    let report = cocycle_report(c, &r);
    if let Some(v) = report.iter().next() {
        return Err(Error::CocycleViolation(v.simplex.clone()));
    }
    let mut offset = Vec::with_capacity(c.vertex_count());
    let mut vertex_labels = Vec::new();
    let mut vertex_assign = Vec::new();
    for (v, label) in c.vertex_labels().iter().enumerate() {
        offset.push(vertex_labels.len());
        for w in &r.fibers[v] {
            vertex_labels.push(format!("{label}@{w}"));
            vertex_assign.push(v);
        }
    }
    let lifted_id = |dim: usize, idx: usize, w: usize| -> SimplexId {
        let vs = c.vertices(dim, idx);
        let lifted = (0..=dim).map(|i| offset[vs[i]] + r.along_front(c, dim, idx, i, w)).collect();
        if dim == 0 {
            let v = offset[vs[0]] + w;
            return SimplexId::new(vec![v], vertex_labels[v].clone());
        }
        SimplexId::new(lifted, c.cell(dim, idx).id.piece.clone())
    };
    let mut higher = Vec::new();
    for dim in 1..c.counts().len() {
        let mut level = Vec::new();
        for idx in 0..c.count(dim) {
            let v0 = c.vertices(dim, idx)[0];
            for w in 0..r.fibers[v0].len() {
                let faces = (0..=dim)
                    .map(|j| {
                        let f = c.face(dim, idx, j);
                        let fw = if j == 0 { r.along_front(c, dim, idx, 1, w) } else { w };
                        lifted_id(dim - 1, f, fw)
                    })
                    .collect();
                level.push(CellSpec { id: lifted_id(dim, idx, w), faces });
            }
        }
        higher.push(level);
    }
    let complex = DeltaComplex::from_specs(vertex_labels.clone(), higher)?;
    let mut images = Vec::with_capacity(c.counts().len());
    for dim in 0..c.counts().len() {
        let mut level = vec![SimplexImage::Degenerate; complex.count(dim)];
        for idx in 0..c.count(dim) {
            let v0 = c.vertices(dim, idx)[0];
            for w in 0..r.fibers[v0].len() {
                let lifted = complex.index_of(&lifted_id(dim, idx, w)).expect("built above");
                level[lifted] = SimplexImage::Simplex { index: idx, sign: 1 };
            }
        }
        images.push(level);
    }
    let projection = SimplicialMap::new(vertex_assign, images);
    projection.check_vertices(&complex, c)?;
    Ok(Cover { complex, projection, datum: r })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringStats {
    /// Fiber size over the basepoint.
    pub sheets: usize,
    /// Whether every fiber has that size.
    pub constant_fiber: bool,
    pub components: usize,
    pub connected: bool,
    pub euler_base: i64,
    pub euler_cover: i64,
    pub basepoint: String,
    /// Permutation of the basepoint fiber along the loop of each edge not
    /// in the spanning tree; empty for a disconnected base.
    pub monodromy: BTreeMap<String, BTreeMap<String, String>>,
    /// Whether the monodromy group acts transitively on the fiber.
    pub transitive: bool,
}

/// Monodromy permutations of the basepoint fiber, indexed by edge.
pub fn monodromy(cover: &Cover, base: &DeltaComplex, basepoint: usize) -> Result<BTreeMap<usize, Vec<usize>>> {
    let tree = spanning_tree(base, basepoint)?;
    let n = cover.datum.fibers[basepoint].len();
    let mut out = BTreeMap::new();
    for e in 0..base.count(1) {
        if tree.tree_edges[e] {
            continue;
        }
        let word = tree.edge_loop(base, e);
        out.insert(e, (0..n).map(|w| cover.datum.transport(&word, w)).collect());
    }
    Ok(out)
}

pub fn covering_stats(cover: &Cover, base: &DeltaComplex) -> CoveringStats {
    let basepoint = 0;
    let sheets = cover.datum.fibers.first().map_or(0, Vec::len);
    let components = cover.complex.connected_components().len();
    let perms =
        if base.is_connected() { monodromy(cover, base, basepoint).unwrap_or_default() } else { BTreeMap::new() };
    let fiber = cover.datum.fibers.first().cloned().unwrap_or_default();
    let monodromy = perms
        .iter()
        .map(|(&e, p)| (edge_generator(e), fiber.iter().zip(p).map(|(w, &j)| (w.clone(), fiber[j].clone())).collect()))
        .collect();
    // orbit of the first fiber element under the monodromy permutations
    let mut reached = vec![false; sheets];
    if sheets > 0 && base.is_connected() {
        reached[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for p in perms.values() {
                for w in 0..sheets {
                    if reached[w] && !reached[p[w]] {
                        reached[p[w]] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    CoveringStats {
        sheets,
        constant_fiber: cover.datum.fibers.iter().all(|f| f.len() == sheets),
        components,
        connected: components == 1,
        euler_base: base.euler_characteristic(),
        euler_cover: cover.complex.euler_characteristic(),
        basepoint: base.vertex_labels().first().cloned().unwrap_or_default(),
        monodromy,
        transitive: reached.iter().all(|&x| x),
    }
}

/// Searches datums with `1..=max_sheets` sheets (identity on spanning-tree
/// edges, arbitrary permutations elsewhere) for a connected cover whose
/// fundamental group is certified trivial. Returns `None` when the search
/// is exhausted or too large.
pub fn universal_cover(base: &DeltaComplex, max_sheets: usize) -> Result<Option<(CoveringDatum, Cover)>> {
    const MAX_CANDIDATES: usize = 200_000;
    let tree = spanning_tree(base, 0)?;
    let free_edges: Vec<usize> = (0..base.count(1)).filter(|&e| !tree.tree_edges[e]).collect();
    for n in 1..=max_sheets {
        let perms = permutations(n);
        let total = (perms.len() as f64).powi(free_edges.len() as i32);
        if total > MAX_CANDIDATES as f64 {
            continue;
        }
        let fibers: Vec<Vec<String>> = vec![(0..n).map(|i| i.to_string()).collect(); base.vertex_count()];
        let mut choice = vec![0usize; free_edges.len()];
        loop {
            let mut transitions = vec![(0..n).collect::<Vec<_>>(); base.count(1)];
            for (k, &e) in free_edges.iter().enumerate() {
                transitions[e] = perms[choice[k]].clone();
            }
            let r = ResolvedDatum { fibers: fibers.clone(), transitions };
            if cocycle_report(base, &r).is_clean() {
                let cover = build_cover(base, r)?;
                if cover.complex.is_connected()
                    && triviality_status(&edge_path_presentation(&cover.complex, 0)?) == TrivialityStatus::Trivial
                {
                    let datum = to_datum(base, &cover.datum);
                    return Ok(Some((datum, cover)));
                }
            }
            // next assignment, odometer style
            let mut k = 0;
            loop {
                if k == choice.len() {
                    break;
                }
                choice[k] += 1;
                if choice[k] < perms.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    Ok(None)
}

fn to_datum(base: &DeltaComplex, r: &ResolvedDatum) -> CoveringDatum {
    let fibers = base.vertex_labels().iter().cloned().zip(r.fibers.iter().cloned()).collect();
    let transitions = (0..base.count(1))
        .map(|e| {
            let vs = base.vertices(1, e);
            let map = r.fibers[vs[0]]
                .iter()
                .zip(&r.transitions[e])
                .map(|(w, &j)| (w.clone(), r.fibers[vs[1]][j].clone()))
                .collect();
            (base.key(1, e), map)
        })
        .collect();
    CoveringDatum { fibers, transitions }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}
