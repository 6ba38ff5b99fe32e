#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dualcx::action::GroupAction;
use dualcx::complex::DeltaComplex;
use dualcx::homology::ChainComplex;
use dualcx::incidence::IncidenceStructure;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Sorted JSON files of a corpus subdirectory.
pub fn corpus_files(sub: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn name(path: &Path) -> String {
    path.file_stem().unwrap().to_string_lossy().into_owned()
}

/// A structure with its optional action, loaded from `structures/`.
pub struct Sample {
    pub name: String,
    pub structure: IncidenceStructure,
    pub group: Option<GroupAction>,
}

pub fn structures() -> Vec<Sample> {
    corpus_files("structures")
        .into_iter()
        .map(|path| {
            let doc = read_json(&path);
            let structure = IncidenceStructure::from_value(&doc).unwrap();
            let group = GroupAction::from_document(&doc, &structure).unwrap();
            Sample { name: name(&path), structure, group }
        })
        .collect()
}

/// Base structures of the covering corpus and of both comparison sides,
/// together with the plain structures.
pub fn all_structures() -> Vec<(String, IncidenceStructure)> {
    let mut out: Vec<(String, IncidenceStructure)> = structures().into_iter().map(|s| (s.name, s.structure)).collect();
    for path in corpus_files("coverings") {
        let doc = read_json(&path);
        out.push((format!("{} base", name(&path)), IncidenceStructure::from_value(&doc["base"]).unwrap()));
    }
    for path in corpus_files("mckay") {
        let doc = read_json(&path);
        for side in ["equivariant", "quotient"] {
            out.push((format!("{} {side}", name(&path)), IncidenceStructure::from_value(&doc[side]).unwrap()));
        }
    }
    out
}

/// Every (structure, action) pair of the corpus whose quotient is a
/// Δ-complex, including comparison inputs.
pub fn action_pairs() -> Vec<(String, IncidenceStructure, GroupAction)> {
    let mut out = Vec::new();
    for s in structures() {
        if let Some(g) = s.group {
            if s.name != "edge_swap_nonstrict" {
                out.push((s.name, s.structure, g));
            }
        }
    }
    for path in corpus_files("mckay") {
        let doc = read_json(&path);
        let s = IncidenceStructure::from_value(&doc["equivariant"]).unwrap();
        let g = GroupAction::from_document(&doc["equivariant"], &s).unwrap().unwrap();
        out.push((format!("{} equivariant", name(&path)), s, g));
    }
    out
}

/// A random structure built orbit by orbit under a random permutation of
/// its components. No stratum meets an orbit twice, so the action is strict.
pub struct Equivariant {
    pub structure: IncidenceStructure,
    pub group: GroupAction,
    pub permutation: Vec<usize>,
}

fn image(perm: &[usize], sigma: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = sigma.iter().map(|&v| perm[v]).collect();
    out.sort_unstable();
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn piece_count(rng: &mut ChaCha8Rng, size: usize) -> usize {
    let roll: f64 = rng.gen();
    match (size, roll) {
        (2, r) if r < 0.6 => 1,
        (2, r) if r < 0.9 => 2,
        (2, _) => 3,
        (_, r) if r < 0.7 => 1,
        _ => 2,
    }
}

pub fn random_equivariant(rng: &mut ChaCha8Rng, max_components: usize) -> Equivariant {
    let n = rng.gen_range(1..=max_components);
    let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    if rng.gen_bool(0.75) {
        perm.shuffle(rng);
    }
    let mut orbit = vec![usize::MAX; n];
    for v in 0..n {
        let mut w = v;
        while orbit[w] == usize::MAX {
            orbit[w] = v;
            w = perm[w];
        }
    }
    let mut powers = vec![(0..n).collect::<Vec<usize>>()];
    loop {
        let next: Vec<usize> = powers.last().unwrap().iter().map(|&v| perm[v]).collect();
        if next.iter().enumerate().all(|(i, &v)| i == v) {
            break;
        }
        powers.push(next);
    }

    let mut s = IncidenceStructure::new(labels.clone()).unwrap();
    for (size, probability) in [(2, 0.6), (3, 0.6), (4, 0.7)] {
        for sigma in subsets(n, size) {
            if s.stratum(&sigma).is_some() {
                continue;
            }
            let mut orbits_hit: Vec<usize> = sigma.iter().map(|&v| orbit[v]).collect();
            orbits_hit.sort_unstable();
            orbits_hit.dedup();
            if orbits_hit.len() != size {
                continue;
            }
            let facets_present = (0..size).all(|i| {
                let mut tau = sigma.clone();
                tau.remove(i);
                s.stratum(&tau).is_some()
            });
            if !facets_present || !rng.gen_bool(probability) {
                continue;
            }
            let pieces: Vec<String> = (0..piece_count(rng, size)).map(|k| format!("p{k}")).collect();
            // face choices on the representative, by piece and position
            let faces: Vec<Vec<String>> = pieces
                .iter()
                .map(|_| {
                    (0..size)
                        .map(|i| {
                            let mut tau = sigma.clone();
                            tau.remove(i);
                            s.stratum(&tau).unwrap().pieces().choose(rng).unwrap().clone()
                        })
                        .collect()
                })
                .collect();
            let translates: Vec<Vec<usize>> = {
                let mut t: Vec<Vec<usize>> = powers.iter().map(|p| image(p, &sigma)).collect();
                t.sort();
                t.dedup();
                t
            };
            for p in &powers {
                let target = image(p, &sigma);
                if s.stratum(&target).is_some() {
                    continue;
                }
                s.add_stratum(&target, &pieces).unwrap();
                for (piece, by_position) in pieces.iter().zip(&faces) {
                    for (i, face) in by_position.iter().enumerate() {
                        let position = target.iter().position(|&w| w == p[sigma[i]]).unwrap();
                        if size > 2 {
                            s.set_face(&target, piece, position, face).unwrap();
                        }
                    }
                }
            }
            s.fill_forced_faces();
            if !s.validate().is_clean() {
                for t in &translates {
                    s.remove_stratum(t);
                }
            }
        }
    }
    assert!(s.validate().is_clean(), "generator produced an invalid structure");

    let moves: serde_json::Map<String, serde_json::Value> = (0..n)
        .filter(|&v| perm[v] != v)
        .map(|v| (labels[v].clone(), serde_json::Value::String(labels[perm[v]].clone())))
        .collect();
    let doc = serde_json::json!({"generators": [{"name": "g", "components": moves}]});
    let group = GroupAction::from_value(&doc, &s).unwrap();
    Equivariant { structure: s, group, permutation: perm }
}

/// Rank of an integer matrix over the prime field `F_p`, by Gaussian
/// elimination on reduced residues.
pub fn rank_mod_p(rows: &[Vec<i64>], p: i64) -> usize {
    let mut m: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, pivot);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                let pivot_row = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = (*x - f * y).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: i64, mut e: i64, p: i64) -> i64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Large prime standing in for characteristic zero: boundary matrices of
/// small complexes have no minors divisible by it.
pub const BIG_PRIME: i64 = 1_000_000_007;

/// Betti numbers over `F_p` from ranks of the boundary maps.
pub fn betti_mod_p(cc: &ChainComplex, p: i64) -> Vec<usize> {
    let ranks = cc.ranks().to_vec();
    let r: Vec<usize> = (0..=ranks.len())
        .map(|a| {
            let rows = cc.boundary(a).to_i64_rows().unwrap();
            rank_mod_p(&rows, p)
        })
        .collect();
    (0..ranks.len()).map(|a| ranks[a] - r[a] - r[a + 1]).collect()
}

/// Checks `∂_{a} ∂_{a+1} = 0` by multiplying the matrices.
pub fn boundaries_compose_to_zero(cc: &ChainComplex) -> bool {
    (1..cc.degrees()).all(|a| (&cc.boundary(a) * &cc.boundary(a + 1)).is_zero())
}

pub fn connected(c: &DeltaComplex) -> bool {
    c.connected_components().len() == 1
}

/// Integral homology of the weight complex against that of the quotient
/// complex, plus orbit counts and face equivariance.
pub fn quotient_oracle(s: &IncidenceStructure, g: &GroupAction) -> Result<(), String> {
    use dualcx::action::{orbits, quotient_complex, ComplexAction};
    use dualcx::homology::{chain_complex, integral_homology, weight_complex_of, Coefficients};

    let action = ComplexAction::new(s, g).map_err(|e| e.to_string())?;
    let c = action.complex();
    for e in action.elements() {
        for a in 1..c.counts().len() {
            for i in 0..c.count(a) {
                let j = e.simplices[a][i];
                for k in 0..=a {
                    let moved = e.components[c.vertices(a, i)[k]];
                    let position = c.vertices(a, j).iter().position(|&v| v == moved).ok_or("vertex not carried")?;
                    if e.simplices[a - 1][c.face(a, i, k)] != c.face(a, j, position) {
                        return Err(format!("element {} breaks face {k} of {}", e.word_string(), c.key(a, i)));
                    }
                }
            }
        }
    }
    let q = quotient_complex(&action).map_err(|e| e.to_string())?;
    if q.complex.counts() != orbits(&action).counts() {
        return Err(format!("quotient counts {:?} vs orbits {:?}", q.complex.counts(), orbits(&action).counts()));
    }
    let quotient = integral_homology(&chain_complex(&q.complex)).map_err(|e| e.to_string())?;
    let weight =
        weight_complex_of(&action, Coefficients::Integers).and_then(|cc| cc.homology()).map_err(|e| e.to_string())?;
    if !weight.same_groups(&quotient) {
        return Err(format!("weight {:?} vs quotient {:?}", weight.describe(), quotient.describe()));
    }
    Ok(())
}

/// A covering datum over `c` with `sheets` sheets: arbitrary permutations on
/// a graph, a coboundary once there are triangles.
pub fn random_datum(rng: &mut ChaCha8Rng, c: &DeltaComplex, sheets: usize) -> dualcx::covering::CoveringDatum {
    let names: Vec<String> = (0..sheets).map(|i| i.to_string()).collect();
    let perm = |rng: &mut ChaCha8Rng| {
        let mut p: Vec<usize> = (0..sheets).collect();
        p.shuffle(rng);
        p
    };
    let free = c.count(2) == 0;
    let gauge: Vec<Vec<usize>> = (0..c.vertex_count()).map(|_| perm(rng)).collect();
    let mut datum = dualcx::covering::CoveringDatum::default();
    for label in c.vertex_labels() {
        datum.fibers.insert(label.clone(), names.clone());
    }
    for e in 0..c.count(1) {
        let t: Vec<usize> = if free {
            perm(rng)
        } else {
            let (tail, head) = (c.vertices(1, e)[0], c.vertices(1, e)[1]);
            let mut inverse = vec![0; sheets];
            for (i, &x) in gauge[tail].iter().enumerate() {
                inverse[x] = i;
            }
            (0..sheets).map(|w| gauge[head][inverse[w]]).collect()
        };
        datum.transitions.insert(c.key(1, e), (0..sheets).map(|w| (names[w].clone(), names[t[w]].clone())).collect());
    }
    datum
}

/// Identities, Euler multiplicativity, connectivity against transitivity
/// and relators acting trivially.
pub fn cover_checks(base: &DeltaComplex, datum: &dualcx::covering::CoveringDatum) -> Result<(), String> {
    use dualcx::covering::{covering_stats, total_space};
    use dualcx::pi1::{edge_path_presentation, inverse_word, spanning_tree, Letter};

    let cover = total_space(base, datum).map_err(|e| e.to_string())?;
    if !cover.complex.check_simplicial_identities().is_empty() {
        return Err("total space breaks the simplicial identities".into());
    }
    let stats = covering_stats(&cover, base);
    if stats.constant_fiber && cover.complex.euler_characteristic() != stats.sheets as i64 * base.euler_characteristic()
    {
        return Err(format!(
            "χ(cover) = {} for {} sheets over χ = {}",
            stats.euler_cover, stats.sheets, stats.euler_base
        ));
    }
    if !connected(base) {
        return Ok(());
    }
    if stats.connected != stats.transitive {
        return Err("connectivity differs from transitivity".into());
    }
    let tree = spanning_tree(base, 0).map_err(|e| e.to_string())?;
    let p = edge_path_presentation(base, 0).map_err(|e| e.to_string())?;
    for r in p.relators() {
        let word: Vec<Letter> = r
            .iter()
            .flat_map(|l| {
                let w = tree.edge_loop(base, l.generator);
                if l.inverse {
                    inverse_word(&w)
                } else {
                    w
                }
            })
            .collect();
        if (0..stats.sheets).any(|w| cover.datum.transport(&word, w) != w) {
            return Err("a relator acts nontrivially on the fiber".into());
        }
    }
    Ok(())
}
