//! Combinatorial description of a normal-crossing configuration.
//!
//! A configuration lists its irreducible components in a fixed linear order
//! and, for every subset `σ` of components with nonempty intersection, the
//! connected pieces of that intersection together with the codimension-one
//! containments: for a piece of `E_σ` and a position `i`, the piece of the
//! intersection with the `i`-th component left out that contains it.
//!
//! Empty intersections are represented by absent strata. Deeper containments
//! are obtained by composing codimension-one faces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// One stratum `E_σ`: its components (ranks, strictly increasing), its
/// connected pieces, and the face assignment of every piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    components: Vec<usize>,
    pieces: Vec<String>,
    faces: BTreeMap<String, BTreeMap<usize, String>>,
}

impl Stratum {
    pub fn components(&self) -> &[usize] {
        &self.components
    }

    /// Number of components, `k + 1` for a `k`-dimensional stratum.
    pub fn size(&self) -> usize {
        self.components.len()
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn has_piece(&self, piece: &str) -> bool {
        self.pieces.iter().any(|p| p == piece)
    }

    /// The piece of `σ ∖ {σ_position}` containing `piece`, if assigned.
    pub fn face(&self, piece: &str, position: usize) -> Option<&str> {
        self.faces.get(piece)?.get(&position).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IncidenceStructure {
    components: Vec<String>,
    strata: BTreeMap<Vec<usize>, Stratum>,
}

/// An invariant violated by an incidence structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingSingleton { component: String },
    SingletonPieces { component: String, count: usize },
    DownwardClosure { stratum: String, missing: String },
    MissingFace { stratum: String, piece: String, position: usize },
    UnknownFacePiece { stratum: String, piece: String, position: usize, target: String },
    SimplicialIdentity { stratum: String, piece: String, i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingSingleton { component } => {
                write!(f, "component {component} has no singleton stratum")
            }
            Violation::SingletonPieces { component, count } => {
                write!(f, "component {component} has {count} pieces, expected 1")
            }
            Violation::DownwardClosure { stratum, missing } => {
                write!(f, "stratum [{stratum}] present but its face [{missing}] is missing")
            }
            Violation::MissingFace { stratum, piece, position } => {
                write!(f, "piece {piece} of [{stratum}] has no face at position {position}")
            }
            Violation::UnknownFacePiece { stratum, piece, position, target } => {
                write!(f, "piece {piece} of [{stratum}] names unknown face piece {target} at position {position}")
            }
            Violation::SimplicialIdentity { stratum, piece, i, j } => {
                write!(f, "piece {piece} of [{stratum}] violates d_{i} d_{j} = d_{} d_{i}", j - 1)
            }
        }
    }
}

pub type IncidenceReport = ValidationReport<Violation>;

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(char::is_whitespace) {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

/// `σ` with the entry at `position` removed.
pub fn drop_position(sigma: &[usize], position: usize) -> Vec<usize> {
    let mut out = sigma.to_vec();
    out.remove(position);
    out
}

impl IncidenceStructure {
    /// A structure with the given components and one piece per component,
    /// named after the component.
    pub fn new<I, S>(components: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let components: Vec<String> = components.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for c in &components {
            check_label(c)?;
            if !seen.insert(c.as_str()) {
                return Err(Error::DuplicateLabel { kind: "component", label: c.clone() });
            }
        }
        let strata = components
            .iter()
            .enumerate()
            .map(|(rank, label)| {
                (vec![rank], Stratum { components: vec![rank], pieces: vec![label.clone()], faces: BTreeMap::new() })
            })
            .collect();
        Ok(Self { components, strata })
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_labels(&self) -> &[String] {
        &self.components
    }

    pub fn label(&self, rank: usize) -> &str {
        &self.components[rank]
    }

    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.components.iter().position(|c| c == label)
    }

    /// Ranks for a list of labels, which must be in declaration order.
    pub fn ranks_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let ranks = labels
            .iter()
            .map(|l| self.rank_of(l.as_ref()).ok_or_else(|| Error::UnknownComponent(l.as_ref().to_string())))
            .collect::<Result<Vec<_>>>()?;
        if ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::RankOrder { stratum: labels.iter().map(|l| l.as_ref()).collect::<Vec<_>>().join(",") });
        }
        Ok(ranks)
    }

    /// Comma-joined component labels of `σ`.
    pub fn key(&self, sigma: &[usize]) -> String {
        sigma.iter().map(|&r| self.components[r].as_str()).collect::<Vec<_>>().join(",")
    }

    /// Parses a comma-joined stratum key.
    pub fn parse_key(&self, key: &str) -> Result<Vec<usize>> {
        let labels: Vec<&str> = key.split(',').collect();
        self.ranks_of(&labels)
    }

    pub fn stratum(&self, sigma: &[usize]) -> Option<&Stratum> {
        self.strata.get(sigma)
    }

    pub fn strata(&self) -> impl Iterator<Item = &Stratum> {
        self.strata.values()
    }

    /// Strata with exactly `size` components, in lexicographic order.
    pub fn strata_of_size(&self, size: usize) -> impl Iterator<Item = &Stratum> {
        self.strata.values().filter(move |s| s.size() == size)
    }

    pub fn max_stratum_size(&self) -> usize {
        self.strata.values().map(Stratum::size).max().unwrap_or(0)
    }

    /// Adds (or replaces) the stratum on `sigma` with the given pieces and no
    /// faces yet.
    pub fn add_stratum<S: AsRef<str>>(&mut self, sigma: &[usize], pieces: &[S]) -> Result<()> {
        if sigma.is_empty() {
            return Err(Error::Malformed("stratum with no components".into()));
        }
        if let Some(&r) = sigma.iter().find(|&&r| r >= self.components.len()) {
            return Err(Error::UnknownComponent(format!("#{r}")));
        }
        if sigma.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::RankOrder { stratum: self.key(sigma) });
        }
        let mut seen = BTreeSet::new();
        let mut owned = Vec::with_capacity(pieces.len());
        for p in pieces {
            let p = p.as_ref();
            check_label(p)?;
            if !seen.insert(p) {
                return Err(Error::DuplicateLabel { kind: "piece", label: p.to_string() });
            }
            owned.push(p.to_string());
        }
        self.strata
            .insert(sigma.to_vec(), Stratum { components: sigma.to_vec(), pieces: owned, faces: BTreeMap::new() });
        Ok(())
    }

    pub fn remove_stratum(&mut self, sigma: &[usize]) -> Option<Stratum> {
        self.strata.remove(sigma)
    }

    /// Records that `piece` of `E_σ` lies in `target` of `E_{σ ∖ σ_position}`.
    pub fn set_face(&mut self, sigma: &[usize], piece: &str, position: usize, target: &str) -> Result<()> {
        let key = self.key(sigma);
        let stratum = self.strata.get_mut(sigma).ok_or_else(|| Error::Malformed(format!("no stratum [{key}]")))?;
        if stratum.size() < 2 || position >= stratum.size() {
            return Err(Error::Malformed(format!("face position {position} out of range for [{key}]")));
        }
        if !stratum.has_piece(piece) {
            return Err(Error::Malformed(format!("stratum [{key}] has no piece {piece}")));
        }
        check_label(target)?;
        stratum.faces.entry(piece.to_string()).or_default().insert(position, target.to_string());
        Ok(())
    }

    pub fn face(&self, sigma: &[usize], piece: &str, position: usize) -> Option<&str> {
        self.strata.get(sigma)?.face(piece, position)
    }

    /// The piece of `E_τ` containing `piece` of `E_σ`, for `τ ⊆ σ`, obtained by
    /// dropping the extra components one at a time from the highest position.
    pub fn deep_face(&self, sigma: &[usize], piece: &str, tau: &[usize]) -> Option<String> {
        let mut current = sigma.to_vec();
        let mut p = piece.to_string();
        for pos in (0..sigma.len()).rev() {
            if tau.contains(&sigma[pos]) {
                continue;
            }
            p = self.face(&current, &p, pos)?.to_string();
            current.remove(pos);
        }
        (current == tau).then_some(p)
    }

    /// Fills every missing face whose target stratum has a single piece.
    pub fn fill_forced_faces(&mut self) {
        let mut fills = Vec::new();
        for (sigma, stratum) in &self.strata {
            if stratum.size() < 2 {
                continue;
            }
            for piece in &stratum.pieces {
                for pos in 0..stratum.size() {
                    if stratum.face(piece, pos).is_some() {
                        continue;
                    }
                    if let Some(face) = self.strata.get(&drop_position(sigma, pos)) {
                        if face.pieces.len() == 1 {
                            fills.push((sigma.clone(), piece.clone(), pos, face.pieces[0].clone()));
                        }
                    }
                }
            }
        }
        for (sigma, piece, pos, target) in fills {
            let stratum = self.strata.get_mut(&sigma).expect("stratum exists");
            stratum.faces.entry(piece).or_default().insert(pos, target);
        }
    }

    /// Checks every semantic invariant; the report is empty iff the structure
    /// is valid.
    pub fn validate(&self) -> IncidenceReport {
        let mut report = IncidenceReport::default();
        for (rank, label) in self.components.iter().enumerate() {
            match self.strata.get(&vec![rank]) {
                None => report.push(Violation::MissingSingleton { component: label.clone() }),
                Some(s) if s.pieces.len() != 1 => {
                    report.push(Violation::SingletonPieces { component: label.clone(), count: s.pieces.len() })
                }
                Some(_) => {}
            }
        }
        for (sigma, stratum) in &self.strata {
            if sigma.len() < 2 {
                continue;
            }
            let key = self.key(sigma);
            let mut closed = true;
            for pos in 0..sigma.len() {
                let tau = drop_position(sigma, pos);
                if !self.strata.contains_key(&tau) {
                    closed = false;
                    report.push(Violation::DownwardClosure { stratum: key.clone(), missing: self.key(&tau) });
                }
            }
            let mut faces_ok = closed;
            for piece in &stratum.pieces {
                for pos in 0..sigma.len() {
                    match stratum.face(piece, pos) {
                        None => {
                            faces_ok = false;
                            report.push(Violation::MissingFace {
                                stratum: key.clone(),
                                piece: piece.clone(),
                                position: pos,
                            });
                        }
                        Some(target) => {
                            let tau = drop_position(sigma, pos);
                            if let Some(face) = self.strata.get(&tau) {
                                if !face.has_piece(target) {
                                    faces_ok = false;
                                    report.push(Violation::UnknownFacePiece {
                                        stratum: key.clone(),
                                        piece: piece.clone(),
                                        position: pos,
                                        target: target.to_string(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
            if !faces_ok || sigma.len() < 3 {
                continue;
            }
            for piece in &stratum.pieces {
                for j in 1..sigma.len() {
                    for i in 0..j {
                        let after_j = self.face(sigma, piece, j).expect("checked");
                        let left = self.face(&drop_position(sigma, j), after_j, i);
                        let after_i = self.face(sigma, piece, i).expect("checked");
                        let right = self.face(&drop_position(sigma, i), after_i, j - 1);
                        // Missing deeper faces are reported on the face stratum itself.
                        if let (Some(l), Some(r)) = (left, right) {
                            if l != r {
                                report.push(Violation::SimplicialIdentity {
                                    stratum: key.clone(),
                                    piece: piece.clone(),
                                    i,
                                    j,
                                });
                            }
                        }
                    }
                }
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_clean()
    }

    fn to_raw(&self) -> RawStructure {
        let strata = self
            .strata
            .values()
            .filter(|s| !(s.size() == 1 && s.pieces.len() == 1 && s.pieces[0] == self.components[s.components[0]]))
            .map(|s| RawStratum {
                components: s.components.iter().map(|&r| self.components[r].clone()).collect(),
                pieces: s.pieces.clone(),
                faces: s
                    .faces
                    .iter()
                    .map(|(p, m)| (p.clone(), m.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()))
                    .collect(),
            })
            .collect();
        RawStructure { components: self.components.clone(), strata }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("plain data serializes")
    }

    /// Pretty JSON in the input file format. Singleton strata that match the
    /// default are omitted.
    pub fn serialize(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("plain data serializes")
    }

    /// Reads the `components`/`strata` part of a JSON document; other keys
    /// are ignored.
    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        let raw: RawStructure = serde_json::from_value(value.clone())?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawStructure) -> Result<Self> {
        let mut s = Self::new(raw.components)?;
        let mut explicit = BTreeSet::new();
        for rs in raw.strata {
            let sigma = s.ranks_of(&rs.components)?;
            if sigma.is_empty() {
                return Err(Error::Malformed("stratum with no components".into()));
            }
            if !explicit.insert(sigma.clone()) {
                return Err(Error::DuplicateLabel { kind: "stratum", label: rs.components.join(",") });
            }
            s.add_stratum(&sigma, &rs.pieces)?;
            for (piece, faces) in rs.faces {
                for (pos, target) in faces {
                    let position: usize = pos
                        .parse()
                        .map_err(|_| Error::Malformed(format!("face position `{pos}` is not a decimal index")))?;
                    s.set_face(&sigma, &piece, position, &target)?;
                }
            }
        }
        s.fill_forced_faces();
        Ok(s)
    }
}

/// Parses the JSON file format. Only structural well-formedness is checked;
/// use [`IncidenceStructure::validate`] for the semantic invariants.
pub fn parse_incidence(text: &str) -> Result<IncidenceStructure> {
    let raw: RawStructure = serde_json::from_str(text)?;
    IncidenceStructure::from_raw(raw)
}

#[derive(Debug, Serialize, Deserialize)]
struct RawStructure {
    components: Vec<String>,
    #[serde(default)]
    strata: Vec<RawStratum>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawStratum {
    components: Vec<String>,
    pieces: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    faces: BTreeMap<String, BTreeMap<String, String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const D_SHAPE: &str = r#"{
        "components": ["E1","E2","E3","E4","E5"],
        "strata": [
            {"components": ["E1","E2"], "pieces": ["p"]},
            {"components": ["E2","E3"], "pieces": ["p"]},
            {"components": ["E3","E4"], "pieces": ["p"]},
            {"components": ["E3","E5"], "pieces": ["p"]}
        ]
    }"#;

    #[test]
    fn minimal_single_component() {
        let s = parse_incidence(r#"{"components": ["E1"]}"#).unwrap();
        assert_eq!(s.component_count(), 1);
        assert_eq!(s.strata().count(), 1);
        assert_eq!(s.stratum(&[0]).unwrap().pieces(), ["E1"]);
        assert!(s.is_valid());
    }

    #[test]
    fn d_shape_parses_and_validates() {
        let s = parse_incidence(D_SHAPE).unwrap();
        assert_eq!(s.component_count(), 5);
        assert_eq!(s.strata_of_size(2).count(), 4);
        assert!(s.validate().is_clean());
        // forced faces were filled in
        assert_eq!(s.face(&[2, 4], "p", 0), Some("E5"));
        assert_eq!(s.face(&[2, 4], "p", 1), Some("E3"));
    }

    #[test]
    fn unknown_component_is_rejected() {
        let err =
            parse_incidence(r#"{"components": ["E1","E2"], "strata": [{"components": ["E1","E9"], "pieces": ["p"]}]}"#)
                .unwrap_err();
        assert!(matches!(err, Error::UnknownComponent(ref c) if c == "E9"), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_incidence("{\n  \"components\": [\"E1\",\n}").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_and_order_errors() {
        let dup = parse_incidence(r#"{"components": ["E1","E1"]}"#).unwrap_err();
        assert!(matches!(dup, Error::DuplicateLabel { kind: "component", .. }));
        let order =
            parse_incidence(r#"{"components": ["E1","E2"], "strata": [{"components": ["E2","E1"], "pieces": ["p"]}]}"#)
                .unwrap_err();
        assert!(matches!(order, Error::RankOrder { .. }));
        let dup_piece = parse_incidence(
            r#"{"components": ["E1","E2"], "strata": [{"components": ["E1","E2"], "pieces": ["p","p"]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(dup_piece, Error::DuplicateLabel { kind: "piece", .. }));
        let ws = parse_incidence(r#"{"components": ["E 1"]}"#).unwrap_err();
        assert!(matches!(ws, Error::InvalidLabel(_)));
    }

    #[test]
    fn downward_closure_violation() {
        let mut s = parse_incidence(D_SHAPE).unwrap();
        s.remove_stratum(&[1]);
        let report = s.validate();
        assert!(report.violations.contains(&Violation::MissingSingleton { component: "E2".into() }));
        assert!(report
            .violations
            .contains(&Violation::DownwardClosure { stratum: "E1,E2".into(), missing: "E2".into() }));
    }

    #[test]
    fn simplicial_identity_violation_is_located() {
        // Triples only have singleton vertex faces, so the first place drop
        // orders can disagree is a quadruple stratum: here two triangles
        // disagree on which edge piece of {E1,E2} they share.
        let mut s = IncidenceStructure::new(["E1", "E2", "E3", "E4"]).unwrap();
        for pair in [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]] {
            s.add_stratum(&pair, &["e"]).unwrap();
        }
        s.add_stratum(&[0, 1], &["e", "f"]).unwrap();
        for t in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            s.add_stratum(&t, &["t"]).unwrap();
        }
        s.add_stratum(&[0, 1, 2, 3], &["w"]).unwrap();
        s.fill_forced_faces();
        s.set_face(&[0, 1], "f", 0, "E2").unwrap();
        s.set_face(&[0, 1], "f", 1, "E1").unwrap();
        s.set_face(&[0, 1], "e", 0, "E2").unwrap();
        s.set_face(&[0, 1], "e", 1, "E1").unwrap();
        s.set_face(&[0, 1, 2], "t", 2, "e").unwrap();
        s.set_face(&[0, 1, 3], "t", 2, "f").unwrap();
        let report = s.validate();
        // w: drop 2 then 2 -> {E1,E2,E4}/t -> f; drop 3 then 2 -> {E1,E2,E3}/t -> e
        assert_eq!(
            report.violations,
            vec![Violation::SimplicialIdentity { stratum: "E1,E2,E3,E4".into(), piece: "w".into(), i: 2, j: 3 }]
        );
    }

    #[test]
    fn dangling_face_target() {
        let mut s = parse_incidence(D_SHAPE).unwrap();
        s.set_face(&[0, 1], "p", 0, "nope").unwrap();
        assert_eq!(
            s.validate().violations,
            vec![Violation::UnknownFacePiece {
                stratum: "E1,E2".into(),
                piece: "p".into(),
                position: 0,
                target: "nope".into()
            }]
        );
    }

    #[test]
    fn round_trip_examples() {
        let d = parse_incidence(D_SHAPE).unwrap();
        assert_eq!(parse_incidence(&d.serialize()).unwrap(), d);
        let min = IncidenceStructure::new(["A"]).unwrap();
        assert_eq!(parse_incidence(&min.serialize()).unwrap(), min);
        let empty = IncidenceStructure::new(Vec::<String>::new()).unwrap();
        assert_eq!(parse_incidence(&empty.serialize()).unwrap(), empty);
    }

    #[test]
    fn tetrahedron_boundary_round_trips() {
        // every proper nonempty face of the 3-simplex, each a single piece
        let mut s = IncidenceStructure::new(["E1", "E2", "E3", "E4"]).unwrap();
        for mask in 1u32..15 {
            let sigma: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            if sigma.len() >= 2 {
                s.add_stratum(&sigma, &["p"]).unwrap();
            }
        }
        s.fill_forced_faces();
        assert!(s.validate().is_clean());
        assert_eq!(s.strata_of_size(2).count(), 6);
        assert_eq!(s.strata_of_size(3).count(), 4);
        assert_eq!(parse_incidence(&s.serialize()).unwrap(), s);
    }

    #[test]
    fn deep_face_composes() {
        let mut s = IncidenceStructure::new(["A", "B", "C"]).unwrap();
        for sigma in [vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            s.add_stratum(&sigma, &["x"]).unwrap();
        }
        s.fill_forced_faces();
        assert_eq!(s.deep_face(&[0, 1, 2], "x", &[1]).as_deref(), Some("B"));
        assert_eq!(s.deep_face(&[0, 1, 2], "x", &[0, 2]).as_deref(), Some("x"));
        assert_eq!(s.deep_face(&[0, 1, 2], "x", &[0, 1, 2]).as_deref(), Some("x"));
    }
}
