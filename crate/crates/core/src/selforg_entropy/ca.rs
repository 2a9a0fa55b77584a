use rand::seq::SliceRandom;
use rand::Rng;

use super::grid::{conflict_count, generate_random, ChannelGrid};
use crate::error::{arg, Result};
use crate::rng::seeded_stream;

/// One asynchronous epoch of the channel-selection automaton.
///
/// Cells are visited in a fresh uniformly random order. A visited cell that
/// shares its channel with any Moore neighbor re-draws uniformly among the
/// channels none of its neighbors use, or among all channels when every one
/// is taken. Returns the number of conflicting pairs left.
pub fn ca_step<R: Rng + ?Sized>(grid: &mut ChannelGrid, rng: &mut R) -> usize {
    let (w, h, n) = (grid.width(), grid.height(), grid.n_channels());
    let mut order: Vec<usize> = (0..w * h).collect();
    order.shuffle(rng);
    let mut used = vec![false; n];
    let mut free = Vec::with_capacity(n);
    for idx in order {
        let (row, col) = (idx / w, idx % w);
        if !grid.has_conflict(row, col) {
            continue;
        }
        used.iter_mut().for_each(|u| *u = false);
        for (r, c) in grid.neighbors(row, col) {
            used[grid.get(r, c) as usize] = true;
        }
        free.clear();
        free.extend((0..n).filter(|&ch| !used[ch]));
        let pick = if free.is_empty() { rng.random_range(0..n) } else { free[rng.random_range(0..free.len())] };
        grid.set(row, col, pick as u8);
    }
    conflict_count(grid)
}

/// Result of running the automaton to a fixed point or the epoch limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfOrgOutcome {
    pub grid: ChannelGrid,
    pub converged: bool,
    pub epochs: usize,
}

/// Run [`ca_step`] from `grid` until no conflicts remain or `max_epochs`.
pub fn self_organize_from<R: Rng + ?Sized>(
    mut grid: ChannelGrid,
    max_epochs: usize,
    rng: &mut R,
) -> Result<SelfOrgOutcome> {
    if max_epochs == 0 {
        return arg("max_epochs must be >= 1");
    }
    let mut conflicts = conflict_count(&grid);
    let mut epochs = 0;
    while conflicts > 0 && epochs < max_epochs {
        conflicts = ca_step(&mut grid, rng);
        epochs += 1;
    }
    let converged = conflicts == 0;
    assert!(!converged || conflict_count(&grid) == 0);
    Ok(SelfOrgOutcome { grid, converged, epochs })
}

/// Self-organize a random `N`-channel grid. The initial grid is
/// `generate_random(.., seed)` and the automaton draws from stream
/// `(seed, "selforg_ca", 0)`.
pub fn self_organize(
    n_channels: usize,
    width: usize,
    height: usize,
    max_epochs: usize,
    seed: u64,
) -> Result<SelfOrgOutcome> {
    let grid = generate_random(n_channels, width, height, seed)?;
    self_organize_from(grid, max_epochs, &mut seeded_stream(seed, "selforg_ca", 0))
}
