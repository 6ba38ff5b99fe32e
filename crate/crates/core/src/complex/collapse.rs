use serde::Serialize;

use super::{DeltaComplex, SimplexId};

/// Outcome of greedy elementary collapses.
#[derive(Clone, Debug)]
pub struct CollapseReport {
    /// Collapsed `(free face, coface)` pairs in the order performed.
    pub pairs: Vec<(SimplexId, SimplexId)>,
    /// What is left after no free face remains.
    pub remaining: DeltaComplex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseSummary {
    pub collapses: usize,
    pub remaining: Vec<usize>,
    pub collapsed_to_point: bool,
}

impl CollapseReport {
    pub fn remaining_counts(&self) -> Vec<usize> {
        self.remaining.counts()
    }

    /// True when the complex collapsed to a single vertex, a witness of
    /// contractibility.
    pub fn collapsed_to_point(&self) -> bool {
        self.remaining.counts() == vec![1]
    }

    pub fn summary(&self) -> CollapseSummary {
        CollapseSummary {
            collapses: self.pairs.len(),
            remaining: self.remaining_counts(),
            collapsed_to_point: self.collapsed_to_point(),
        }
    }
}

/// Greedily removes free pairs `(τ, σ)`: `σ` has no cofaces and `τ` occurs
/// exactly once among the faces of all remaining simplices, namely in `σ`.
/// Cofaces are scanned by dimension descending, then canonical order; the
/// first free face of the first eligible coface is used.
pub fn collapse_attempt(c: &DeltaComplex) -> CollapseReport {
    let counts = c.counts();
    let mut alive: Vec<Vec<bool>> = counts.iter().map(|&n| vec![true; n]).collect();
    // coface_uses[d][i] = number of (alive simplex, position) pairs whose face is (d, i)
    let mut uses: Vec<Vec<usize>> = counts.iter().map(|&n| vec![0; n]).collect();
    for dim in 1..counts.len() {
        for cell in c.cells(dim) {
            for &f in &cell.faces {
                uses[dim - 1][f] += 1;
            }
        }
    }
    let mut pairs = Vec::new();
    'search: loop {
        for dim in (1..counts.len()).rev() {
            for idx in 0..counts[dim] {
                if !alive[dim][idx] || uses[dim][idx] > 0 {
                    continue;
                }
                let faces = &c.cell(dim, idx).faces;
                let mut free: Vec<usize> = faces.iter().copied().filter(|&f| uses[dim - 1][f] == 1).collect();
                free.sort_unstable();
                if let Some(&tau) = free.first() {
                    alive[dim][idx] = false;
                    alive[dim - 1][tau] = false;
                    for &f in faces {
                        uses[dim - 1][f] -= 1;
                    }
                    for &f in &c.cell(dim - 1, tau).faces {
                        uses[dim - 2][f] -= 1;
                    }
                    pairs.push((c.cell(dim - 1, tau).id.clone(), c.cell(dim, idx).id.clone()));
                    continue 'search;
                }
            }
        }
        break;
    }
    let remaining = c.restrict(&alive).expect("collapses keep the complex closed under faces");
    CollapseReport { pairs, remaining }
}
