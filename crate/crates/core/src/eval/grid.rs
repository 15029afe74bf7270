//! Candidate action sets for grid best responses.

use super::EvalConfig;
use crate::games::{ActionSpace, BudgetSource, Game};

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// All ordered ways to write `total` as a sum of `parts` nonnegative integers,
/// in lexicographic order. There are `C(total + parts - 1, parts - 1)`.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=left {
            prefix.push(first);
            rec(left - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Compositions of `resolution` into `parts`, scaled to sum to `budget`.
pub fn simplex_grid(parts: usize, resolution: usize, budget: f64) -> Vec<Vec<f64>> {
    let m = resolution.max(1) as f64;
    compositions(resolution.max(1), parts)
        .into_iter()
        .map(|c| c.into_iter().map(|k| budget * k as f64 / m).collect())
        .collect()
}

/// Cartesian product of `dims` copies of `axis`.
fn box_grid(axis: &[f64], dims: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(dims)];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Grid of candidate actions for `player` given their observation. One
/// dimensional boxes use `grid_resolution` points, larger boxes
/// `box_resolution` per dimension, simplices `simplex_resolution` parts.
pub fn action_grid(game: &dyn Game, player: usize, cfg: &EvalConfig, observation: &[f64]) -> Vec<Vec<f64>> {
    match game.action_space(player) {
        ActionSpace::Box { dims: 1, lo, hi } => linspace(lo, hi, cfg.grid_resolution)
            .into_iter()
            .map(|x| vec![x])
            .collect(),
        ActionSpace::Box { dims, lo, hi } => box_grid(&linspace(lo, hi, cfg.box_resolution), dims),
        ActionSpace::Simplex { parts, budget } => {
            let b = match budget {
                BudgetSource::Fixed(b) => b,
                BudgetSource::Observed(k) => observation[k],
            };
            simplex_grid(parts, cfg.simplex_resolution, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{Blotto, Chopstick, Visibility};

    #[test]
    fn blotto_grid_has_231_points_on_the_budget() {
        let g = Blotto::symmetric(2, 3);
        let grid = action_grid(&g, 0, &EvalConfig::default(), &[]);
        assert_eq!(grid.len(), 231);
        for p in &grid {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
        let mut dedup = grid.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 231);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(20, 3).len(), 231);
        assert_eq!(compositions(140, 3).len(), 10011);
        assert_eq!(compositions(4, 1), vec![vec![4]]);
        assert!(compositions(5, 2).iter().all(|c| c.iter().sum::<usize>() == 5));
    }

    #[test]
    fn visibility_grid_spans_unit_interval() {
        let grid = action_grid(&Visibility::default(), 1, &EvalConfig::default(), &[]);
        assert_eq!(grid.len(), 100);
        assert_eq!(grid[0], vec![0.0]);
        assert_eq!(grid[99], vec![1.0]);
    }

    #[test]
    fn chopstick_grid_is_a_cube() {
        let grid = action_grid(&Chopstick {}, 0, &EvalConfig::default(), &[]);
        assert_eq!(grid.len(), 8000);
        assert!(grid.iter().all(|p| p.len() == 3 && p.iter().all(|&x| (0.0..=1.0).contains(&x))));
    }

    #[test]
    fn random_budget_grid_uses_observed_budget() {
        let g = Blotto {
            budgets: crate::games::Budgets::Random,
            ..Blotto::symmetric(2, 3)
        };
        let grid = action_grid(&g, 1, &EvalConfig::default(), &[0.3, 0.7]);
        assert!(grid.iter().all(|p| (p.iter().sum::<f64>() - 0.7).abs() < 1e-12));
    }
}
