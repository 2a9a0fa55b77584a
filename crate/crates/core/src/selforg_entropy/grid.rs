use rand::Rng;

use crate::error::{arg, Result};
use crate::rng::seeded_stream;

/// Row-major matrix of channel indices in `0..n_channels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelGrid {
    width: usize,
    height: usize,
    n_channels: usize,
    cells: Vec<u8>,
}

impl ChannelGrid {
    pub fn new(width: usize, height: usize, n_channels: usize, cells: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return arg("grid dimensions must be positive");
        }
        if n_channels == 0 || n_channels > 256 {
            return arg(format!("channel count must be in 1..=256, got {n_channels}"));
        }
        if cells.len() != width * height {
            return arg(format!("{} cells for a {width}x{height} grid", cells.len()));
        }
        if let Some(bad) = cells.iter().find(|&&c| c as usize >= n_channels) {
            return arg(format!("channel {bad} out of range for N = {n_channels}"));
        }
        Ok(Self { width, height, n_channels, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn n_channels(&self) -> usize {
        self.n_channels
    }
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, channel: u8) {
        self.cells[row * self.width + col] = channel;
    }

    /// Moore neighbors of `(row, col)` inside the grid (no wrap-around).
    pub fn neighbors(&self, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (h, w) = (self.height as isize, self.width as isize);
        (-1isize..=1).flat_map(move |dr| (-1isize..=1).map(move |dc| (dr, dc))).filter_map(move |(dr, dc)| {
            let (r, c) = (row as isize + dr, col as isize + dc);
            ((dr, dc) != (0, 0) && r >= 0 && r < h && c >= 0 && c < w).then_some((r as usize, c as usize))
        })
    }

    pub fn has_conflict(&self, row: usize, col: usize) -> bool {
        let ch = self.get(row, col);
        self.neighbors(row, col).any(|(r, c)| self.get(r, c) == ch)
    }

    /// Apply a channel permutation `new = perm[old]`.
    pub fn relabeled(&self, perm: &[u8]) -> Result<Self> {
        let mut seen = vec![false; self.n_channels];
        if perm.len() != self.n_channels || perm.iter().any(|&p| (p as usize) >= self.n_channels) {
            return arg("relabeling must be a permutation of the channel set");
        }
        for &p in perm {
            if std::mem::replace(&mut seen[p as usize], true) {
                return arg("relabeling must be a permutation of the channel set");
            }
        }
        let cells = self.cells.iter().map(|&c| perm[c as usize]).collect();
        Ok(Self { cells, ..self.clone() })
    }
}

/// Diagonal-stripe allocation `c(row, col) = (row + 2 col) mod N`.
///
/// Moore neighbors differ by one of `{1, 2, 3}` (mod N), so the pattern is
/// interference-free for every `N >= 5`.
pub fn generate_regular(n_channels: usize, width: usize, height: usize) -> Result<ChannelGrid> {
    if n_channels < 5 {
        return arg(format!("regular pattern needs N >= 5, got {n_channels}"));
    }
    if n_channels > 256 {
        return arg("at most 256 channels are supported");
    }
    let cells = (0..height)
        .flat_map(|r| (0..width).map(move |c| ((r + 2 * c) % n_channels) as u8))
        .collect();
    ChannelGrid::new(width, height, n_channels, cells)
}

/// i.i.d. uniform channels drawn from stream `(seed, "selforg_random_grid", 0)`.
pub fn generate_random(n_channels: usize, width: usize, height: usize, seed: u64) -> Result<ChannelGrid> {
    if n_channels < 2 {
        return arg(format!("random allocation needs N >= 2, got {n_channels}"));
    }
    if n_channels > 256 {
        return arg("at most 256 channels are supported");
    }
    let mut rng = seeded_stream(seed, "selforg_random_grid", 0);
    let cells = (0..width * height).map(|_| rng.random_range(0..n_channels) as u8).collect();
    ChannelGrid::new(width, height, n_channels, cells)
}

/// Unordered pairs of Moore-adjacent cells sharing a channel.
pub fn conflict_count(grid: &ChannelGrid) -> usize {
    let (h, w) = (grid.height, grid.width);
    let mut count = 0;
    for r in 0..h {
        for c in 0..w {
            let ch = grid.get(r, c);
            if c + 1 < w && grid.get(r, c + 1) == ch {
                count += 1;
            }
            if r + 1 < h {
                if grid.get(r + 1, c) == ch {
                    count += 1;
                }
                if c > 0 && grid.get(r + 1, c - 1) == ch {
                    count += 1;
                }
                if c + 1 < w && grid.get(r + 1, c + 1) == ch {
                    count += 1;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pair scan over every cell and every other cell within Chebyshev distance 1.
    fn brute_conflicts(g: &ChannelGrid) -> usize {
        let mut n = 0;
        for a in 0..g.width * g.height {
            for b in a + 1..g.width * g.height {
                let (ra, ca) = ((a / g.width) as isize, (a % g.width) as isize);
                let (rb, cb) = ((b / g.width) as isize, (b % g.width) as isize);
                if (ra - rb).abs() <= 1 && (ca - cb).abs() <= 1 && g.cells[a] == g.cells[b] {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn regular_formula() {
        let g = generate_regular(6, 12, 12).unwrap();
        assert_eq!(g.get(0, 0), 0);
        assert_eq!(g.get(0, 1), 2);
        assert_eq!(g.get(1, 0), 1);
        for r in 0..6 {
            for c in 0..9 {
                assert_eq!(g.get(r, c), g.get(r, c + 3));
                assert_eq!(g.get(r, c), g.get(r + 6, c));
            }
        }
        assert!(generate_regular(4, 8, 8).is_err());
    }

    #[test]
    fn regular_is_conflict_free() {
        for n in 5..=12 {
            let g = generate_regular(n, 32, 32).unwrap();
            assert_eq!(brute_conflicts(&g), 0, "N = {n}");
            assert_eq!(conflict_count(&g), 0);
        }
    }

    #[test]
    fn small_conflict_cases() {
        let same = ChannelGrid::new(2, 2, 2, vec![1; 4]).unwrap();
        assert_eq!(conflict_count(&same), 6);
        let checker = ChannelGrid::new(2, 2, 2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(conflict_count(&checker), 2);
    }

    #[test]
    fn conflict_count_matches_pair_scan() {
        for seed in 0..5 {
            let g = generate_random(3, 17, 11, seed).unwrap();
            assert_eq!(conflict_count(&g), brute_conflicts(&g));
        }
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(generate_random(6, 20, 20, 9).unwrap(), generate_random(6, 20, 20, 9).unwrap());
        assert_ne!(generate_random(6, 20, 20, 9).unwrap(), generate_random(6, 20, 20, 10).unwrap());
        assert!(generate_random(1, 4, 4, 0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(ChannelGrid::new(2, 2, 2, vec![0, 1, 2, 0]).is_err());
        assert!(ChannelGrid::new(2, 2, 2, vec![0, 1, 1]).is_err());
        let g = ChannelGrid::new(2, 1, 3, vec![0, 2]).unwrap();
        assert!(g.relabeled(&[0, 0, 1]).is_err());
        assert_eq!(g.relabeled(&[2, 0, 1]).unwrap().cells(), &[2, 1]);
    }
}
