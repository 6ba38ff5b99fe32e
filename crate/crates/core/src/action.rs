//! Finite group actions on configurations and the induced action on the
//! dual complex: validation, strictness, orbits and quotients.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{build_dual_complex, CellSpec, DeltaComplex, SimplexId, SimplexImage, SimplicialMap};
use crate::error::{Error, Result};
use crate::incidence::{drop_position, IncidenceStructure};
use crate::report::ValidationReport;

/// Default bound on the number of enumerated group elements.
pub const DEFAULT_ELEMENT_LIMIT: usize = 10_000;

/// A generator: where each component goes, and explicit piece assignments
/// for strata whose pieces are not determined otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    /// Image rank of every component rank.
    pub components: Vec<usize>,
    /// Per source stratum, piece label to piece label of the image stratum.
    pub pieces: BTreeMap<Vec<usize>, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    generators: Vec<Generator>,
    limit: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    generators: Vec<RawGenerator>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    #[serde(default)]
    components: BTreeMap<String, String>,
    #[serde(default)]
    pieces: BTreeMap<String, BTreeMap<String, String>>,
}

impl GroupAction {
    pub fn trivial() -> Self {
        Self { generators: Vec::new(), limit: DEFAULT_ELEMENT_LIMIT }
    }

    pub fn new(generators: Vec<Generator>) -> Self {
        Self { generators, limit: DEFAULT_ELEMENT_LIMIT }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(|g| {
            g.components.iter().enumerate().all(|(v, &w)| v == w)
                && g.pieces.values().all(|m| m.iter().all(|(a, b)| a == b))
        })
    }

    /// Reads the `"group"` section of a document. `None` when absent.
    pub fn from_document(doc: &serde_json::Value, s: &IncidenceStructure) -> Result<Option<Self>> {
        match doc.get("group") {
            None => Ok(None),
            Some(v) => Self::from_value(v, s).map(Some),
        }
    }

    /// Reads `{"generators": [...]}`. Components missing from a generator's
    /// map are fixed.
    pub fn from_value(value: &serde_json::Value, s: &IncidenceStructure) -> Result<Self> {
        let raw: RawGroup = serde_json::from_value(value.clone())?;
        let mut names = std::collections::BTreeSet::new();
        let mut generators = Vec::with_capacity(raw.generators.len());
        for rg in raw.generators {
            if !names.insert(rg.name.clone()) {
                return Err(Error::DuplicateLabel { kind: "generator", label: rg.name });
            }
            let mut components: Vec<usize> = (0..s.component_count()).collect();
            for (from, to) in &rg.components {
                let f = s.rank_of(from).ok_or_else(|| Error::UnknownComponent(from.clone()))?;
                let t = s.rank_of(to).ok_or_else(|| Error::UnknownComponent(to.clone()))?;
                components[f] = t;
            }
            let mut pieces = BTreeMap::new();
            for (key, map) in rg.pieces {
                pieces.insert(s.parse_key(&key)?, map);
            }
            generators.push(Generator { name: rg.name, components, pieces });
        }
        Ok(Self::new(generators))
    }

    /// JSON in the input format.
    pub fn to_value(&self, s: &IncidenceStructure) -> serde_json::Value {
        let gens: Vec<serde_json::Value> = self
            .generators
            .iter()
            .map(|g| {
                let components: BTreeMap<&str, &str> = g
                    .components
                    .iter()
                    .enumerate()
                    .filter(|(v, w)| v != *w)
                    .map(|(v, &w)| (s.label(v), s.label(w)))
                    .collect();
                let pieces: BTreeMap<String, &BTreeMap<String, String>> =
                    g.pieces.iter().map(|(k, m)| (s.key(k), m)).collect();
                serde_json::json!({ "name": g.name, "components": components, "pieces": pieces })
            })
            .collect();
        serde_json::json!({ "generators": gens })
    }
}

impl Generator {
    fn image_of_stratum(&self, sigma: &[usize]) -> Vec<usize> {
        let mut image: Vec<usize> = sigma.iter().map(|&v| self.components[v]).collect();
        image.sort_unstable();
        image
    }

    /// Image piece of `piece` of `E_σ`: the explicit assignment, else the
    /// only piece of the image stratum, else the piece with the same label.
    fn image_of_piece(&self, s: &IncidenceStructure, sigma: &[usize], piece: &str) -> Option<String> {
        let target = s.stratum(&self.image_of_stratum(sigma))?;
        if let Some(p) = self.pieces.get(sigma).and_then(|m| m.get(piece)) {
            return Some(p.clone());
        }
        if target.pieces().len() == 1 {
            return Some(target.pieces()[0].clone());
        }
        target.has_piece(piece).then(|| piece.to_string())
    }
}

/// A reason a generator fails to be an automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionViolation {
    NotAPermutation { generator: String },
    StratumNotPreserved { generator: String, stratum: String },
    UnknownPiece { generator: String, stratum: String, piece: String },
    UnresolvedPiece { generator: String, stratum: String, piece: String },
    PiecesNotBijective { generator: String, stratum: String },
    FaceNotEquivariant { generator: String, stratum: String, piece: String, position: usize },
}

impl fmt::Display for ActionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotAPermutation { generator } => write!(f, "{generator}: component map is not a permutation"),
            Self::StratumNotPreserved { generator, stratum } => {
                write!(f, "{generator}: image of stratum [{stratum}] is not a stratum")
            }
            Self::UnknownPiece { generator, stratum, piece } => {
                write!(f, "{generator}: piece assignment for [{stratum}] names unknown piece `{piece}`")
            }
            Self::UnresolvedPiece { generator, stratum, piece } => {
                write!(f, "{generator}: image of piece `{piece}` of [{stratum}] is not determined")
            }
            Self::PiecesNotBijective { generator, stratum } => {
                write!(f, "{generator}: pieces of [{stratum}] are not mapped bijectively")
            }
            Self::FaceNotEquivariant { generator, stratum, piece, position } => write!(
                f,
                "{generator}: face {position} of piece `{piece}` of [{stratum}] is not carried to the matching face"
            ),
        }
    }
}

pub type ActionReport = ValidationReport<ActionViolation>;

/// Checks that every generator permutes components, carries strata and their
/// pieces bijectively onto strata, and commutes with the face assignment.
pub fn validate_action(s: &IncidenceStructure, g: &GroupAction) -> ActionReport {
    let mut report = ActionReport::default();
    let n = s.component_count();
    for gen in &g.generators {
        let name = || gen.name.clone();
        let mut seen = vec![false; n];
        if gen.components.len() != n || gen.components.iter().any(|&w| w >= n || std::mem::replace(&mut seen[w], true))
        {
            report.push(ActionViolation::NotAPermutation { generator: name() });
            continue;
        }
        for (sigma, map) in &gen.pieces {
            let key = s.key(sigma);
            let Some(src) = s.stratum(sigma) else {
                report.push(ActionViolation::StratumNotPreserved { generator: name(), stratum: key });
                continue;
            };
            let target = s.stratum(&gen.image_of_stratum(sigma));
            for (from, to) in map {
                if !src.has_piece(from) {
                    report.push(ActionViolation::UnknownPiece {
                        generator: name(),
                        stratum: key.clone(),
                        piece: from.clone(),
                    });
                }
                if target.is_some_and(|t| !t.has_piece(to)) {
                    report.push(ActionViolation::UnknownPiece {
                        generator: name(),
                        stratum: key.clone(),
                        piece: to.clone(),
                    });
                }
            }
        }
        for stratum in s.strata() {
            let sigma = stratum.components();
            let key = s.key(sigma);
            let image = gen.image_of_stratum(sigma);
            let Some(target) = s.stratum(&image) else {
                report.push(ActionViolation::StratumNotPreserved { generator: name(), stratum: key });
                continue;
            };
            let mut images = Vec::new();
            let mut resolved = true;
            for piece in stratum.pieces() {
                match gen.image_of_piece(s, sigma, piece) {
                    Some(p) if target.has_piece(&p) => images.push((piece, p)),
                    Some(_) => resolved = false, // reported above as unknown piece
                    None => {
                        resolved = false;
                        report.push(ActionViolation::UnresolvedPiece {
                            generator: name(),
                            stratum: key.clone(),
                            piece: piece.clone(),
                        });
                    }
                }
            }
            if !resolved {
                continue;
            }
            let mut targets: Vec<&String> = images.iter().map(|(_, p)| p).collect();
            targets.sort();
            targets.dedup();
            if targets.len() != images.len() || images.len() != target.pieces().len() {
                report.push(ActionViolation::PiecesNotBijective { generator: name(), stratum: key.clone() });
                continue;
            }
            if sigma.len() < 2 {
                continue;
            }
            for (piece, image_piece) in &images {
                for i in 0..sigma.len() {
                    let tau = drop_position(sigma, i);
                    let face = stratum.face(piece, i).expect("valid structure");
                    let face_image = gen.image_of_piece(s, &tau, face);
                    let moved = gen.components[sigma[i]];
                    let position = image.iter().position(|&w| w == moved).expect("image contains moved vertex");
                    let expected = s.face(&image, image_piece, position);
                    if face_image.as_deref() != expected {
                        report.push(ActionViolation::FaceNotEquivariant {
                            generator: name(),
                            stratum: key.clone(),
                            piece: (*piece).clone(),
                            position: i,
                        });
                    }
                }
            }
        }
    }
    report
}

/// A group element acting on the dual complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    /// Generator names, applied right to left; empty for the identity.
    pub word: Vec<String>,
    pub components: Vec<usize>,
    /// `simplices[a][i]`: image of the `i`-th `a`-simplex.
    pub simplices: Vec<Vec<usize>>,
}

impl GroupElement {
    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            "1".into()
        } else {
            self.word.join("*")
        }
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().enumerate().all(|(v, &w)| v == w)
            && self.simplices.iter().all(|l| l.iter().enumerate().all(|(i, &j)| i == j))
    }
}

/// The group materialized as permutations of the simplices of a dual
/// complex.
#[derive(Clone, Debug)]
pub struct ComplexAction {
    complex: DeltaComplex,
    elements: Vec<GroupElement>,
}

impl ComplexAction {
    /// Enumerates the group generated by `g` acting on `Γ(s)` by
    /// breadth-first closure. Fails if the action is invalid or the closure
    /// exceeds the element limit.
    pub fn new(s: &IncidenceStructure, g: &GroupAction) -> Result<Self> {
        let report = validate_action(s, g);
        if !report.is_clean() {
            return Err(Error::InvalidAction(report.to_string()));
        }
        let complex = build_dual_complex(s)?;
        let mut gens = Vec::with_capacity(g.generators.len());
        for gen in &g.generators {
            let mut simplices = Vec::new();
            for dim in 0..complex.counts().len() {
                let mut level = Vec::with_capacity(complex.count(dim));
                for cell in complex.cells(dim) {
                    let sigma = &cell.id.vertices;
                    let piece = gen.image_of_piece(s, sigma, &cell.id.piece).expect("validated");
                    let id = SimplexId::new(gen.image_of_stratum(sigma), piece);
                    level.push(complex.index_of(&id).expect("validated image exists"));
                }
                simplices.push(level);
            }
            gens.push(GroupElement { word: vec![gen.name.clone()], components: gen.components.clone(), simplices });
        }
        let identity = GroupElement {
            word: Vec::new(),
            components: (0..s.component_count()).collect(),
            simplices: complex.counts().iter().map(|&n| (0..n).collect()).collect(),
        };
        let mut seen: HashMap<Vec<Vec<usize>>, ()> = HashMap::new();
        seen.insert(identity.simplices.clone(), ());
        let mut elements = vec![identity];
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            for gen in &gens {
                let composed = compose(gen, &elements[e]);
                if seen.contains_key(&composed.simplices) {
                    continue;
                }
                if elements.len() >= g.limit {
                    return Err(Error::GroupTooLarge { limit: g.limit });
                }
                seen.insert(composed.simplices.clone(), ());
                queue.push_back(elements.len());
                elements.push(composed);
            }
        }
        Ok(Self { complex, elements })
    }

    pub fn complex(&self) -> &DeltaComplex {
        &self.complex
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// `outer ∘ inner`
fn compose(outer: &GroupElement, inner: &GroupElement) -> GroupElement {
    let mut word = outer.word.clone();
    word.extend(inner.word.iter().cloned());
    GroupElement {
        word,
        components: inner.components.iter().map(|&v| outer.components[v]).collect(),
        simplices: inner
            .simplices
            .iter()
            .zip(&outer.simplices)
            .map(|(i, o)| i.iter().map(|&x| o[x]).collect())
            .collect(),
    }
}

/// A group element moving a component onto a different component meeting it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrictnessViolation {
    pub element: String,
    pub component: String,
    pub image: String,
}

impl fmt::Display for StrictnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} moves {} to {}, which meets it", self.element, self.component, self.image)
    }
}

/// Violations of strictness: every element must fix each component or move
/// it to a component disjoint from it. One entry per unordered pair.
pub fn check_g_strict(s: &IncidenceStructure, action: &ComplexAction) -> Vec<StrictnessViolation> {
    let mut out = Vec::new();
    for e in action.elements() {
        for (v, &w) in e.components.iter().enumerate() {
            if v == w {
                continue;
            }
            let pair = [v.min(w), v.max(w)];
            if s.stratum(&pair).is_some() {
                out.push(StrictnessViolation {
                    element: e.word_string(),
                    component: s.label(v).to_string(),
                    image: s.label(w).to_string(),
                });
            }
        }
    }
    out
}

/// A simplex whose stabilizer moves one of its vertices; the quotient would
/// not be a Δ-complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibilityViolation {
    pub element: String,
    pub simplex: String,
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fixes {} but moves its vertices", self.element, self.simplex)
    }
}

/// Simplices fixed by an element that permutes their vertices. Strict
/// actions have none; this weaker condition is what quotients need.
pub fn check_admissible(action: &ComplexAction) -> Vec<AdmissibilityViolation> {
    let c = action.complex();
    let mut out = Vec::new();
    for e in action.elements() {
        for dim in 1..c.counts().len() {
            for idx in 0..c.count(dim) {
                if e.simplices[dim][idx] == idx && c.vertices(dim, idx).iter().any(|&v| e.simplices[0][v] != v) {
                    out.push(AdmissibilityViolation { element: e.word_string(), simplex: c.key(dim, idx) });
                }
            }
        }
    }
    out
}

/// Orbits of simplices, per dimension, in order of their least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbits {
    /// `members[a][k]`: sorted simplex indices of the `k`-th orbit.
    pub members: Vec<Vec<Vec<usize>>>,
    /// `orbit_of[a][i]`: orbit containing simplex `i`.
    pub orbit_of: Vec<Vec<usize>>,
}

impl Orbits {
    pub fn counts(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// The least member, which is also the lexicographically least id.
    pub fn representative(&self, dim: usize, orbit: usize) -> usize {
        self.members[dim][orbit][0]
    }
}

pub fn orbits(action: &ComplexAction) -> Orbits {
    let counts = action.complex().counts();
    let mut members = Vec::with_capacity(counts.len());
    let mut orbit_of = Vec::with_capacity(counts.len());
    for (dim, &n) in counts.iter().enumerate() {
        let mut of = vec![usize::MAX; n];
        let mut level = Vec::new();
        for i in 0..n {
            if of[i] != usize::MAX {
                continue;
            }
            let mut orbit: Vec<usize> = action.elements().iter().map(|e| e.simplices[dim][i]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &j in &orbit {
                of[j] = level.len();
            }
            level.push(orbit);
        }
        members.push(level);
        orbit_of.push(of);
    }
    Orbits { members, orbit_of }
}

/// Some element carrying simplex `from` to simplex `to` in dimension `dim`.
pub(crate) fn transporter(action: &ComplexAction, dim: usize, from: usize, to: usize) -> &GroupElement {
    action.elements().iter().find(|e| e.simplices[dim][from] == to).expect("members of one orbit")
}

/// The quotient `Γ/G` with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub complex: DeltaComplex,
    /// Sends every simplex to its orbit, with the orientation sign.
    pub projection: SimplicialMap,
    /// `cell_of_orbit[a][k]`: quotient cell of the `k`-th orbit.
    pub cell_of_orbit: Vec<Vec<usize>>,
    /// `orientation[a][k]`: sign of the `k`-th orbit's representative under
    /// the projection.
    pub orientation: Vec<Vec<i8>>,
}

/// Parity of the permutation taking `seq` to `order` (same elements).
pub(crate) fn relative_sign(seq: &[usize], order: &[usize]) -> i8 {
    let positions: Vec<usize> = seq.iter().map(|v| order.iter().position(|w| w == v).expect("same vertices")).collect();
    crate::complex::sort_sign(&positions)
}

/// Builds the orbit complex. Each quotient cell orders the vertices of its
/// representative by vertex orbit, then by original order; this order must
/// be respected by the elements identifying faces, which holds for strict
/// actions and is checked otherwise.
pub fn quotient_complex(action: &ComplexAction) -> Result<Quotient> {
    if let Some(v) = check_admissible(action).first() {
        return Err(Error::NotAdmissible(v.to_string()));
    }
    let c = action.complex();
    let orb = orbits(action);
    let vertex_orbit = &orb.orbit_of.first().cloned().unwrap_or_default();
    let local_order = |dim: usize, idx: usize| -> Vec<usize> {
        let mut vs = c.vertices(dim, idx).to_vec();
        vs.sort_by_key(|&v| (vertex_orbit[v], v));
        vs
    };
    let cell_id = |dim: usize, orbit: usize| -> SimplexId {
        let r = orb.representative(dim, orbit);
        if dim == 0 {
            return SimplexId::new(vec![orbit], c.vertex_labels()[r].clone());
        }
        let seq = local_order(dim, r).iter().map(|&v| vertex_orbit[v]).collect();
        SimplexId::new(seq, c.key(dim, r).replace('/', ":"))
    };

    let vertex_labels: Vec<String> = orb
        .members
        .first()
        .map_or_else(Vec::new, |level| level.iter().map(|m| c.vertex_labels()[m[0]].clone()).collect());
    let mut higher = Vec::new();
    for dim in 1..orb.members.len() {
        let mut level = Vec::new();
        for k in 0..orb.members[dim].len() {
            let r = orb.representative(dim, k);
            let natural = c.vertices(dim, r);
            let local = local_order(dim, r);
            let mut faces = Vec::with_capacity(dim + 1);
            for dropped in &local {
                let i = natural.iter().position(|v| v == dropped).expect("vertex of r");
                let f = c.face(dim, r, i);
                let fo = orb.orbit_of[dim - 1][f];
                let fr = orb.representative(dim - 1, fo);
                if dim >= 2 {
                    let h = transporter(action, dim - 1, f, fr);
                    let restricted: Vec<usize> =
                        local.iter().filter(|v| *v != dropped).map(|&v| h.simplices[0][v]).collect();
                    if restricted != local_order(dim - 1, fr) {
                        return Err(Error::NotAdmissible(format!(
                            "the faces of {} cannot be ordered compatibly with their orbits",
                            c.key(dim, r)
                        )));
                    }
                }
                faces.push(cell_id(dim - 1, fo));
            }
            level.push(CellSpec { id: cell_id(dim, k), faces });
        }
        higher.push(level);
    }
    let complex = DeltaComplex::from_specs(vertex_labels, higher)?;

    let mut cell_of_orbit = Vec::with_capacity(orb.members.len());
    for dim in 0..orb.members.len() {
        cell_of_orbit.push(
            (0..orb.members[dim].len())
                .map(|k| complex.index_of(&cell_id(dim, k)).expect("cell was built"))
                .collect::<Vec<_>>(),
        );
    }
    let mut images = Vec::with_capacity(orb.members.len());
    let mut orientation = Vec::with_capacity(orb.members.len());
    for dim in 0..orb.members.len() {
        let mut level = Vec::with_capacity(c.count(dim));
        for idx in 0..c.count(dim) {
            let k = orb.orbit_of[dim][idx];
            let r = orb.representative(dim, k);
            let h = transporter(action, dim, idx, r);
            let moved: Vec<usize> = c.vertices(dim, idx).iter().map(|&v| h.simplices[0][v]).collect();
            let sign = relative_sign(&moved, &local_order(dim, r));
            level.push(SimplexImage::Simplex { index: cell_of_orbit[dim][k], sign });
        }
        orientation.push(
            (0..orb.members[dim].len())
                .map(|k| match level[orb.representative(dim, k)] {
                    SimplexImage::Simplex { sign, .. } => sign,
                    SimplexImage::Degenerate => unreachable!(),
                })
                .collect(),
        );
        images.push(level);
    }
    let projection = SimplicialMap::new(orb.orbit_of.first().cloned().unwrap_or_default(), images);
    projection.check_vertices(c, &complex)?;
    Ok(Quotient { complex, projection, cell_of_orbit, orientation })
}

/// Convenience: dual complex of `s` modulo `g`.
pub fn quotient_of(s: &IncidenceStructure, g: &GroupAction) -> Result<Quotient> {
    quotient_complex(&ComplexAction::new(s, g)?)
}
