//! Δ-complexes: simplices with ordered vertices glued along face maps.
//!
//! Simplices of each dimension are kept in canonical order, sorted by
//! [`SimplexId`] (vertex sequence, then piece label). Face `i` of a simplex
//! drops its `i`-th vertex.

mod collapse;
mod map;

use std::collections::BTreeMap;
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::{drop_position, IncidenceStructure};

pub use collapse::{collapse_attempt, CollapseReport};
pub(crate) use map::sort_sign;
pub use map::{induced_map, InducedMapSpec, SimplexImage, SimplicialMap};

/// Names a simplex by its vertex sequence and a label distinguishing
/// simplices spanned by the same vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SimplexId {
    pub vertices: Vec<usize>,
    pub piece: String,
}

impl SimplexId {
    pub fn new(vertices: Vec<usize>, piece: impl Into<String>) -> Self {
        Self { vertices, piece: piece.into() }
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: SimplexId,
    /// `faces[i]` indexes the face dropping vertex `i`, one dimension lower.
    pub faces: Vec<usize>,
}

/// A simplex together with the ids of its faces, as handed to
/// [`DeltaComplex::from_specs`].
#[derive(Clone, Debug)]
pub struct CellSpec {
    pub id: SimplexId,
    pub faces: Vec<SimplexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaComplex {
    vertex_labels: Vec<String>,
    cells: Vec<Vec<Cell>>,
}

/// A failed simplicial identity `d_i d_j = d_{j-1} d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityViolation {
    pub dimension: usize,
    pub simplex: usize,
    pub i: usize,
    pub j: usize,
}

impl fmt::Display for IdentityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "simplex {} of dimension {}: d_{} d_{} != d_{} d_{}",
            self.simplex,
            self.dimension,
            self.i,
            self.j,
            self.j - 1,
            self.i
        )
    }
}

impl DeltaComplex {
    pub fn empty() -> Self {
        Self { vertex_labels: Vec::new(), cells: Vec::new() }
    }

    /// Builds a complex from simplices named by id. Vertex `v` gets the id
    /// `([v], vertex_labels[v])`; higher simplices list their faces by id.
    /// Simplices are sorted into canonical order, faces are resolved, and
    /// vertex sequences and simplicial identities are checked.
    pub fn from_specs(vertex_labels: Vec<String>, higher: Vec<Vec<CellSpec>>) -> Result<Self> {
        let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(higher.len() + 1);
        if !vertex_labels.is_empty() {
            cells.push(
                vertex_labels
                    .iter()
                    .enumerate()
                    .map(|(v, label)| Cell { id: SimplexId::new(vec![v], label.clone()), faces: Vec::new() })
                    .collect(),
            );
        }
        let mut lookup: BTreeMap<SimplexId, usize> =
            cells.first().map(|c| c.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect()).unwrap_or_default();
        for (offset, mut specs) in higher.into_iter().enumerate() {
            let dim = offset + 1;
            if specs.is_empty() {
                // allow trailing empty dimensions only
                cells.push(Vec::new());
                lookup.clear();
                continue;
            }
            specs.sort_by(|a, b| a.id.cmp(&b.id));
            let mut next_lookup = BTreeMap::new();
            let mut level = Vec::with_capacity(specs.len());
            for (idx, spec) in specs.into_iter().enumerate() {
                if spec.id.vertices.len() != dim + 1 || spec.faces.len() != dim + 1 {
                    return Err(Error::InvalidComplex(format!(
                        "{:?} has the wrong number of vertices or faces",
                        spec.id
                    )));
                }
                if next_lookup.insert(spec.id.clone(), idx).is_some() {
                    return Err(Error::InvalidComplex(format!("duplicate simplex {:?}", spec.id)));
                }
                let mut faces = Vec::with_capacity(dim + 1);
                for (i, f) in spec.faces.iter().enumerate() {
                    let &fi = lookup
                        .get(f)
                        .ok_or_else(|| Error::InvalidComplex(format!("face {f:?} of {:?} does not exist", spec.id)))?;
                    if f.vertices != drop_position(&spec.id.vertices, i) {
                        return Err(Error::InvalidComplex(format!(
                            "face {i} of {:?} has vertices {:?}",
                            spec.id, f.vertices
                        )));
                    }
                    faces.push(fi);
                }
                level.push(Cell { id: spec.id, faces });
            }
            cells.push(level);
            lookup = next_lookup;
        }
        while cells.last().is_some_and(Vec::is_empty) {
            cells.pop();
        }
        if cells.iter().any(Vec::is_empty) {
            return Err(Error::InvalidComplex("a dimension is empty below a nonempty one".into()));
        }
        let complex = Self { vertex_labels, cells };
        let violations = complex.check_simplicial_identities();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidComplex(v.to_string()));
        }
        Ok(complex)
    }

    /// Top dimension, `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.cells.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    /// Simplex counts per dimension, from 0 to the top dimension.
    pub fn counts(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.count(0)
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.vertex_labels
    }

    pub fn cells(&self, dim: usize) -> &[Cell] {
        self.cells.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn cell(&self, dim: usize, idx: usize) -> &Cell {
        &self.cells[dim][idx]
    }

    pub fn face(&self, dim: usize, idx: usize, i: usize) -> usize {
        self.cells[dim][idx].faces[i]
    }

    pub fn vertices(&self, dim: usize, idx: usize) -> &[usize] {
        &self.cells[dim][idx].id.vertices
    }

    pub fn index_of(&self, id: &SimplexId) -> Option<usize> {
        let dim = id.dimension();
        self.cells.get(dim)?.binary_search_by(|c| c.id.cmp(id)).ok()
    }

    /// Human-readable key: vertex labels joined by commas, then `/piece`.
    /// Vertices are keyed by their label alone.
    pub fn key(&self, dim: usize, idx: usize) -> String {
        let id = &self.cells[dim][idx].id;
        if dim == 0 {
            return self.vertex_labels[id.vertices[0]].clone();
        }
        let vs: Vec<&str> = id.vertices.iter().map(|&v| self.vertex_labels[v].as_str()).collect();
        format!("{}/{}", vs.join(","), id.piece)
    }

    /// Looks up a simplex by [`DeltaComplex::key`].
    pub fn find_key(&self, key: &str) -> Option<(usize, usize)> {
        match key.split_once('/') {
            None => self.vertex_labels.iter().position(|l| l == key).map(|v| (0, v)),
            Some((vs, piece)) => {
                let vertices = vs
                    .split(',')
                    .map(|l| self.vertex_labels.iter().position(|x| x == l))
                    .collect::<Option<Vec<_>>>()?;
                if vertices.len() < 2 {
                    return None;
                }
                let id = SimplexId::new(vertices, piece);
                self.index_of(&id).map(|i| (id.dimension(), i))
            }
        }
    }

    /// Exhaustive check of `d_i d_j = d_{j-1} d_i` for `i < j`.
    pub fn check_simplicial_identities(&self) -> Vec<IdentityViolation> {
        let mut out = Vec::new();
        for dim in 2..self.cells.len() {
            for (idx, cell) in self.cells[dim].iter().enumerate() {
                for j in 1..=dim {
                    for i in 0..j {
                        let left = self.face(dim - 1, cell.faces[j], i);
                        let right = self.face(dim - 1, cell.faces[i], j - 1);
                        if left != right {
                            out.push(IdentityViolation { dimension: dim, simplex: idx, i, j });
                        }
                    }
                }
            }
        }
        out
    }

    /// `Σ_a (−1)^a · #(a-simplices)`.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells.iter().enumerate().map(|(a, c)| if a % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) }).sum()
    }

    /// Vertex classes under the edge relation, each sorted, ordered by their
    /// least vertex (which is the class representative).
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut uf = UnionFind::<usize>::new(n);
        for cell in self.cells(1) {
            uf.union(cell.id.vertices[0], cell.id.vertices[1]);
        }
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut rep_of: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..n {
            let root = uf.find(v);
            let rep = *rep_of.entry(root).or_insert(v);
            classes.entry(rep).or_default().push(v);
        }
        classes.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// The subcomplex keeping the simplices flagged in `keep`, which must be
    /// closed under faces.
    pub(crate) fn restrict(&self, keep: &[Vec<bool>]) -> Result<Self> {
        let mut new_index: Vec<Vec<Option<usize>>> = Vec::with_capacity(self.cells.len());
        let mut cells: Vec<Vec<Cell>> = Vec::new();
        for (dim, level) in self.cells.iter().enumerate() {
            let mut idx_map = vec![None; level.len()];
            let mut out = Vec::new();
            for (idx, cell) in level.iter().enumerate() {
                if !keep[dim][idx] {
                    continue;
                }
                let faces = cell
                    .faces
                    .iter()
                    .map(|&f| new_index[dim - 1][f])
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::InvalidComplex("restriction is not closed under faces".into()))?;
                idx_map[idx] = Some(out.len());
                out.push(Cell { id: cell.id.clone(), faces });
            }
            new_index.push(idx_map);
            cells.push(out);
        }
        // Vertex ids keep their original vertex numbers; renumber them.
        let vertex_renumber: Vec<Option<usize>> = new_index.first().cloned().unwrap_or_default();
        let vertex_labels: Vec<String> = self
            .vertex_labels
            .iter()
            .enumerate()
            .filter(|(v, _)| vertex_renumber[*v].is_some())
            .map(|(_, l)| l.clone())
            .collect();
        for level in &mut cells {
            for cell in level.iter_mut() {
                for v in &mut cell.id.vertices {
                    *v = vertex_renumber[*v].expect("faces of kept simplices are kept");
                }
            }
        }
        while cells.last().is_some_and(Vec::is_empty) {
            cells.pop();
        }
        Ok(Self { vertex_labels, cells })
    }
}

/// The dual complex: one `k`-simplex per piece of every `(k+1)`-fold stratum,
/// with faces given by the face assignment.
pub fn build_dual_complex(s: &IncidenceStructure) -> Result<DeltaComplex> {
    let report = s.validate();
    if !report.is_clean() {
        return Err(Error::InvalidStructure(report.to_string()));
    }
    let mut vertex_labels = Vec::with_capacity(s.component_count());
    for rank in 0..s.component_count() {
        let singleton = s.stratum(&[rank]).expect("validated");
        // the vertex id uses the singleton's piece label
        vertex_labels.push(singleton.pieces()[0].clone());
    }
    let top = s.max_stratum_size();
    let mut higher: Vec<Vec<CellSpec>> = vec![Vec::new(); top.saturating_sub(1)];
    for stratum in s.strata() {
        let size = stratum.size();
        if size < 2 {
            continue;
        }
        let sigma = stratum.components();
        for piece in stratum.pieces() {
            let faces = (0..size)
                .map(|i| {
                    let tau = drop_position(sigma, i);
                    let target = stratum.face(piece, i).expect("validated");
                    let label = if tau.len() == 1 { vertex_labels[tau[0]].clone() } else { target.to_string() };
                    SimplexId::new(tau, label)
                })
                .collect();
            higher[size - 2].push(CellSpec { id: SimplexId::new(sigma.to_vec(), piece.clone()), faces });
        }
    }
    let mut complex = DeltaComplex::from_specs(vertex_labels, higher)?;
    // Vertex ids carry the singleton piece label; users see component labels.
    complex.vertex_labels = s.component_labels().to_vec();
    Ok(complex)
}
