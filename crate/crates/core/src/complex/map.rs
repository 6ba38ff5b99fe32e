use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{build_dual_complex, DeltaComplex, SimplexId};
use crate::error::{Error, Result};
use crate::incidence::IncidenceStructure;

/// Image of a simplex under a simplicial map. Nondegenerate images carry the
/// sign of the permutation taking the image vertex sequence to the target's
/// vertex order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplexImage {
    Simplex { index: usize, sign: i8 },
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    vertex_assign: Vec<usize>,
    images: Vec<Vec<SimplexImage>>,
}

/// Sign of the permutation that sorts `seq` (entries assumed distinct).
pub(crate) fn sort_sign(seq: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl SimplicialMap {
    pub fn new(vertex_assign: Vec<usize>, images: Vec<Vec<SimplexImage>>) -> Self {
        Self { vertex_assign, images }
    }

    pub fn identity(c: &DeltaComplex) -> Self {
        Self {
            vertex_assign: (0..c.vertex_count()).collect(),
            images: c
                .counts()
                .into_iter()
                .map(|n| (0..n).map(|index| SimplexImage::Simplex { index, sign: 1 }).collect())
                .collect(),
        }
    }

    pub fn vertex_assign(&self) -> &[usize] {
        &self.vertex_assign
    }

    pub fn image(&self, dim: usize, idx: usize) -> SimplexImage {
        self.images[dim][idx]
    }

    pub fn images(&self, dim: usize) -> &[SimplexImage] {
        self.images.get(dim).map_or(&[], Vec::as_slice)
    }

    /// Checks shape and that every nondegenerate image is spanned by the
    /// images of the source vertices.
    pub fn check_vertices(&self, src: &DeltaComplex, dst: &DeltaComplex) -> Result<()> {
        if self.vertex_assign.len() != src.vertex_count() || self.images.len() != src.counts().len() {
            return Err(Error::InconsistentMap("map does not match its source complex".into()));
        }
        for (dim, level) in self.images.iter().enumerate() {
            if level.len() != src.count(dim) {
                return Err(Error::InconsistentMap(format!("wrong number of images in dimension {dim}")));
            }
            for (idx, image) in level.iter().enumerate() {
                if let SimplexImage::Simplex { index, .. } = *image {
                    if index >= dst.count(dim) {
                        return Err(Error::InconsistentMap(format!("image of {} out of range", src.key(dim, idx))));
                    }
                    let mut mapped: Vec<usize> =
                        src.vertices(dim, idx).iter().map(|&v| self.vertex_assign[v]).collect();
                    let mut target = dst.vertices(dim, index).to_vec();
                    mapped.sort_unstable();
                    target.sort_unstable();
                    if mapped != target {
                        return Err(Error::InconsistentMap(format!(
                            "image of {} is not spanned by the images of its vertices",
                            src.key(dim, idx)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// User-supplied data for a map of configurations: where each component goes
/// and, where the target stratum has several pieces, which piece receives
/// each source piece. Keys and values are `"σ-key/piece"` strings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedMapSpec {
    pub vertex_map: BTreeMap<String, String>,
    #[serde(default)]
    pub piece_map: BTreeMap<String, String>,
}

impl InducedMapSpec {
    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value.clone())?)
    }
}

/// The map of dual complexes induced by a component assignment. Simplices on
/// which the assignment is not injective are degenerate.
pub fn induced_map(spec: &InducedMapSpec, src: &IncidenceStructure, dst: &IncidenceStructure) -> Result<SimplicialMap> {
    let src_complex = build_dual_complex(src)?;
    let dst_complex = build_dual_complex(dst)?;

    let phi = src
        .component_labels()
        .iter()
        .map(|label| {
            let image = spec
                .vertex_map
                .get(label)
                .ok_or_else(|| Error::InconsistentMap(format!("component {label} has no image")))?;
            dst.rank_of(image).ok_or_else(|| Error::UnknownComponent(image.clone()))
        })
        .collect::<Result<Vec<usize>>>()?;
    for key in spec.vertex_map.keys() {
        if src.rank_of(key).is_none() {
            return Err(Error::UnknownComponent(key.clone()));
        }
    }

    // (σ, α) -> (τ, β) with τ the sorted distinct image of σ
    let mut target: BTreeMap<(Vec<usize>, String), (Vec<usize>, String)> = BTreeMap::new();
    for stratum in src.strata() {
        let sigma = stratum.components();
        let mut tau: Vec<usize> = sigma.iter().map(|&v| phi[v]).collect();
        tau.sort_unstable();
        tau.dedup();
        let dst_stratum = dst.stratum(&tau).ok_or_else(|| {
            Error::InconsistentMap(format!("image [{}] of [{}] is empty", dst.key(&tau), src.key(sigma)))
        })?;
        for piece in stratum.pieces() {
            let key = format!("{}/{}", src.key(sigma), piece);
            let beta = match spec.piece_map.get(&key) {
                Some(value) => {
                    let (tau_key, beta) = value
                        .split_once('/')
                        .ok_or_else(|| Error::Malformed(format!("piece image `{value}` is not `σ-key/piece`")))?;
                    if dst.parse_key(tau_key)? != tau {
                        return Err(Error::InconsistentMap(format!(
                            "{key} is sent to stratum [{tau_key}], expected [{}]",
                            dst.key(&tau)
                        )));
                    }
                    if !dst_stratum.has_piece(beta) {
                        return Err(Error::InconsistentMap(format!("[{tau_key}] has no piece {beta}")));
                    }
                    beta.to_string()
                }
                None if dst_stratum.pieces().len() == 1 => dst_stratum.pieces()[0].clone(),
                None => {
                    return Err(Error::InconsistentMap(format!(
                        "image of {key} is ambiguous: [{}] has {} pieces",
                        dst.key(&tau),
                        dst_stratum.pieces().len()
                    )))
                }
            };
            target.insert((sigma.to_vec(), piece.clone()), (tau.clone(), beta));
        }
    }
    for key in spec.piece_map.keys() {
        let (sigma_key, piece) =
            key.split_once('/').ok_or_else(|| Error::Malformed(format!("piece key `{key}` is not `σ-key/piece`")))?;
        let sigma = src.parse_key(sigma_key)?;
        if !target.contains_key(&(sigma, piece.to_string())) {
            return Err(Error::Malformed(format!("piece key `{key}` names no source piece")));
        }
    }

    // Face compatibility: the image of each face must be the corresponding
    // (possibly deeper) face of the image.
    for ((sigma, piece), (tau, beta)) in &target {
        if sigma.len() < 2 {
            continue;
        }
        for i in 0..sigma.len() {
            let face_sigma = crate::incidence::drop_position(sigma, i);
            let face_piece = src.face(sigma, piece, i).expect("validated").to_string();
            let (face_tau, face_beta) = &target[&(face_sigma, face_piece)];
            let expected = dst.deep_face(tau, beta, face_tau);
            if expected.as_deref() != Some(face_beta.as_str()) {
                return Err(Error::InconsistentMap(format!(
                    "face {i} of {}/{piece} maps to {}/{face_beta}, but the face of its image is {}",
                    src.key(sigma),
                    dst.key(face_tau),
                    expected.unwrap_or_else(|| "missing".into())
                )));
            }
        }
    }

    let mut images = Vec::with_capacity(src_complex.counts().len());
    for dim in 0..src_complex.counts().len() {
        let mut level = Vec::with_capacity(src_complex.count(dim));
        for cell in src_complex.cells(dim) {
            let sigma = &cell.id.vertices;
            let (tau, beta) = &target[&(sigma.clone(), cell.id.piece.clone())];
            if tau.len() < sigma.len() {
                level.push(SimplexImage::Degenerate);
                continue;
            }
            let index = dst_complex
                .index_of(&SimplexId::new(tau.clone(), beta.clone()))
                .expect("target simplex exists in the built complex");
            let mapped: Vec<usize> = sigma.iter().map(|&v| phi[v]).collect();
            level.push(SimplexImage::Simplex { index, sign: sort_sign(&mapped) });
        }
        images.push(level);
    }
    let map = SimplicialMap::new(phi, images);
    map.check_vertices(&src_complex, &dst_complex)?;
    Ok(map)
}
