use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::ChannelGrid;
use crate::error::{arg, Error, Result};

/// Largest dense count table (contexts x symbols) before falling back to a hash map.
const DENSE_LIMIT: usize = 1 << 24;
/// Rows per parallel counting block.
const ROW_BLOCK: usize = 64;

/// Nested sequence of cell offsets `(d_row, d_col)` that precede the target in
/// raster order; the size-`M` context is the first `M` offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSequence {
    offsets: Vec<(isize, isize)>,
}

impl Default for TemplateSequence {
    /// Left, up, up-left, up-right, two left, two up.
    fn default() -> Self {
        Self { offsets: vec![(0, -1), (-1, 0), (-1, -1), (-1, 1), (0, -2), (-2, 0)] }
    }
}

impl TemplateSequence {
    pub fn new(offsets: Vec<(isize, isize)>) -> Result<Self> {
        for (i, &(dr, dc)) in offsets.iter().enumerate() {
            if !(dr < 0 || (dr == 0 && dc < 0)) {
                return arg(format!("offset ({dr}, {dc}) does not precede the target in raster order"));
            }
            if offsets[..i].contains(&(dr, dc)) {
                return arg(format!("offset ({dr}, {dc}) repeated"));
            }
        }
        Ok(Self { offsets })
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Rectangle of target positions whose whole template lies inside the grid.
struct ValidRegion {
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
}

impl ValidRegion {
    fn new(grid: &ChannelGrid, template: &TemplateSequence) -> Option<Self> {
        let up = template.offsets.iter().map(|o| -o.0).max().unwrap_or(0).max(0) as usize;
        let left = template.offsets.iter().map(|o| -o.1).max().unwrap_or(0).max(0) as usize;
        let right = template.offsets.iter().map(|o| o.1).max().unwrap_or(0).max(0) as usize;
        if up >= grid.height() || left + right >= grid.width() {
            return None;
        }
        Some(Self { rows: up..grid.height(), cols: left..grid.width() - right })
    }

    fn count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }
}

enum Counts {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

impl Counts {
    fn merge(self, other: Counts) -> Counts {
        match (self, other) {
            (Counts::Dense(mut a), Counts::Dense(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Counts::Dense(a)
            }
            (Counts::Sparse(mut a), Counts::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Counts::Sparse(a)
            }
            _ => unreachable!("count tables of one estimate share a representation"),
        }
    }

    /// `(context, symbol counts)` in ascending context order.
    fn per_context(self, n: usize) -> Vec<Vec<u64>> {
        match self {
            Counts::Dense(v) => v.chunks(n).filter(|c| c.iter().any(|&x| x > 0)).map(<[u64]>::to_vec).collect(),
            Counts::Sparse(map) => {
                let mut grouped: HashMap<u64, Vec<u64>> = HashMap::new();
                for (key, count) in map {
                    let slot = grouped.entry(key / n as u64).or_insert_with(|| vec![0; n]);
                    slot[(key % n as u64) as usize] = count;
                }
                let mut keys: Vec<u64> = grouped.keys().copied().collect();
                keys.sort_unstable();
                keys.into_iter().map(|k| grouped.remove(&k).unwrap()).collect()
            }
        }
    }
}

fn count_contexts(grid: &ChannelGrid, offsets: &[(isize, isize)], region: &ValidRegion) -> Counts {
    let n = grid.n_channels();
    let table_len = (n as u128).pow(offsets.len() as u32 + 1);
    let dense = table_len <= DENSE_LIMIT as u128;
    let w = grid.width() as isize;
    let cells = grid.cells();
    let rel: Vec<isize> = offsets.iter().map(|&(dr, dc)| dr * w + dc).collect();
    let blocks: Vec<std::ops::Range<usize>> = region
        .rows
        .clone()
        .step_by(ROW_BLOCK)
        .map(|start| start..(start + ROW_BLOCK).min(region.rows.end))
        .collect();
    blocks
        .into_par_iter()
        .map(|rows| {
            let mut counts = if dense { Counts::Dense(vec![0; table_len as usize]) } else { Counts::Sparse(HashMap::new()) };
            for r in rows {
                for c in region.cols.clone() {
                    let pos = (r as isize) * w + c as isize;
                    let mut code = 0u64;
                    for &d in rel.iter().rev() {
                        code = code * n as u64 + cells[(pos + d) as usize] as u64;
                    }
                    let key = code * n as u64 + cells[pos as usize] as u64;
                    match &mut counts {
                        Counts::Dense(v) => v[key as usize] += 1,
                        Counts::Sparse(m) => *m.entry(key).or_insert(0) += 1,
                    }
                }
            }
            counts
        })
        .reduce_with(Counts::merge)
        .expect("valid region has at least one row")
}

/// Plug-in conditional entropy `H(X | first m template cells)` in bits.
///
/// Sample positions are those where the *whole* template fits inside the
/// grid, so estimates for different `m` share one sample set. With
/// `bias_correction` each context adds the Miller–Madow term
/// `(K_c - 1) / (2 n_c ln 2)`, weighted by its frequency.
pub fn entropy_density(
    grid: &ChannelGrid,
    m: usize,
    template: &TemplateSequence,
    bias_correction: bool,
) -> Result<f64> {
    if m > template.len() {
        return arg(format!("M = {m} exceeds the template length {}", template.len()));
    }
    let region = ValidRegion::new(grid, template)
        .ok_or_else(|| Error::Degenerate("grid too small for the template".into()))?;
    let n_channels = grid.n_channels();
    let total = region.count() as f64;
    let contexts = count_contexts(grid, &template.offsets[..m], &region).per_context(n_channels);
    // summed in sorted order so that relabeling the channels is exact
    let mut terms = Vec::new();
    let mut correction = 0.0;
    for counts in &contexts {
        let n_c: u64 = counts.iter().sum();
        let mut k_c = 0u64;
        for &n_cx in counts.iter().filter(|&&x| x > 0) {
            k_c += 1;
            terms.push(n_cx as f64 * (n_c as f64 / n_cx as f64).log2());
        }
        correction += (k_c - 1) as f64;
    }
    terms.sort_by(f64::total_cmp);
    let mut h = terms.iter().sum::<f64>() / total;
    if bias_correction {
        h += correction / (2.0 * total * std::f64::consts::LN_2);
    }
    Ok(h)
}

/// `h(M)` for `M = 1..=M_max` and the derived excess entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `h_of_m[i]` is `h(i + 1)`.
    pub h_of_m: Vec<f64>,
    /// `h(M_max)`, the truncated entropy density.
    pub h_inf: f64,
    /// `sum_{M=1}^{M_max} (h(M) - h_inf)`.
    pub excess_entropy: f64,
    pub bias_corrected: bool,
    pub sample_count: usize,
}

pub fn excess_entropy(
    grid: &ChannelGrid,
    m_max: usize,
    template: &TemplateSequence,
    bias_correction: bool,
) -> Result<EntropyEstimate> {
    if m_max == 0 {
        return arg("M_max must be >= 1");
    }
    let h_of_m = (1..=m_max)
        .map(|m| entropy_density(grid, m, template, bias_correction))
        .collect::<Result<Vec<f64>>>()?;
    let h_inf = h_of_m[m_max - 1];
    let excess = h_of_m.iter().map(|h| h - h_inf).sum();
    let sample_count = ValidRegion::new(grid, template).map_or(0, |r| r.count());
    Ok(EntropyEstimate { h_of_m, h_inf, excess_entropy: excess, bias_corrected: bias_correction, sample_count })
}

#[cfg(test)]
mod tests {
    use super::super::grid::{generate_random, generate_regular};
    use super::*;

    #[test]
    fn checkerboard_left_neighbor_determines_cell() {
        let cells = (0..16 * 16).map(|i| ((i / 16 + i % 16) % 2) as u8).collect();
        let g = ChannelGrid::new(16, 16, 2, cells).unwrap();
        assert_eq!(entropy_density(&g, 1, &TemplateSequence::default(), false).unwrap(), 0.0);
        // with no context the two symbols are equally frequent
        let h0 = entropy_density(&g, 0, &TemplateSequence::default(), false).unwrap();
        assert!((h0 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn regular_grid_is_zero_for_all_m() {
        let g = generate_regular(6, 64, 64).unwrap();
        let est = excess_entropy(&g, 6, &TemplateSequence::default(), false).unwrap();
        assert!(est.h_of_m.iter().all(|&h| h == 0.0));
        assert_eq!(est.excess_entropy, 0.0);
        assert_eq!(est.h_inf, 0.0);
    }

    #[test]
    fn binary_marginal_entropy() {
        let g = generate_random(2, 256, 256, 3).unwrap();
        let h0 = entropy_density(&g, 0, &TemplateSequence::default(), false).unwrap();
        assert!((h0 - 1.0).abs() < 1e-3, "{h0}");
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let g = generate_random(6, 48, 48, 11).unwrap();
        let t = TemplateSequence::default();
        let region = ValidRegion::new(&g, &t).unwrap();
        let dense = count_contexts(&g, &t.offsets[..3], &region).per_context(6);
        // force the hash-map representation through a too-large alphabet
        let mut sparse = Counts::Sparse(HashMap::new());
        if let Counts::Dense(v) = count_contexts(&g, &t.offsets[..3], &region) {
            let mut m = HashMap::new();
            for (k, &c) in v.iter().enumerate().filter(|(_, &c)| c > 0) {
                m.insert(k as u64, c);
            }
            sparse = Counts::Sparse(m);
        }
        assert_eq!(dense, sparse.per_context(6));
    }

    #[test]
    fn template_validation() {
        assert!(TemplateSequence::new(vec![(0, 1)]).is_err());
        assert!(TemplateSequence::new(vec![(0, 0)]).is_err());
        assert!(TemplateSequence::new(vec![(0, -1), (0, -1)]).is_err());
        assert!(TemplateSequence::new(vec![(-1, 3), (0, -1)]).is_ok());
    }

    #[test]
    fn degenerate_grid_errors() {
        let g = generate_regular(6, 2, 2).unwrap();
        assert!(matches!(
            entropy_density(&g, 1, &TemplateSequence::default(), false),
            Err(Error::Degenerate(_))
        ));
        let g = generate_regular(6, 8, 8).unwrap();
        assert!(entropy_density(&g, 7, &TemplateSequence::default(), false).is_err());
    }
}
