//! Minimum-cost bipartite assignment (Jonker-style O(n^3) potentials).

/// Cost marking a forbidden pairing; also the padding cost for rectangular
/// instances. Any total of real costs stays far below a single BIG.
pub const FORBIDDEN: f64 = 1e12;

/// Solves the square min-cost assignment. `cost[i][j]` is the cost of giving
/// row `i` column `j`; returns `row -> col`. Rows are processed in ascending
/// order and ties prefer lower column indices, so exactly tied instances
/// resolve lexicographically by (row, column).
pub fn solve_square(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|r| r.len() == n));
    let inf = f64::INFINITY;
    // 1-indexed potentials; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Rectangular instance with forbidden pairs: returns matched `(row, col)`
/// pairs, skipping any pairing whose cost reaches [`FORBIDDEN`]. Matches are
/// maximized first (every unmatched unit costs one BIG), then total cost.
pub fn assign(cost: &[Vec<f64>], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let padded: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < rows && j < cols {
                        cost[i][j].min(FORBIDDEN)
                    } else {
                        FORBIDDEN
                    }
                })
                .collect()
        })
        .collect();
    solve_square(&padded)
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < rows && j < cols && cost[i][j] < FORBIDDEN)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut cols, 0, cost, &mut best);
        best
    }

    fn permute(cols: &mut Vec<usize>, k: usize, cost: &[Vec<f64>], best: &mut f64) {
        let n = cols.len();
        if k == n {
            let total: f64 = (0..n).map(|i| cost[i][cols[i]]).sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for i in k..n {
            cols.swap(k, i);
            permute(cols, k + 1, cost, best);
            cols.swap(k, i);
        }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(99);
        for trial in 0..1000 {
            let n = rng.gen_range(1..=6);
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
            let assignment = solve_square(&cost);
            let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            let expected = brute_force_min(&cost);
            assert_eq!(total, expected, "trial {trial} n {n}");
        }
    }

    #[test]
    fn tied_costs_resolve_lexicographically() {
        let cost = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(solve_square(&cost), vec![0, 1]);
        let cost3 = vec![vec![2.0; 3]; 3];
        assert_eq!(solve_square(&cost3), vec![0, 1, 2]);
    }

    #[test]
    fn rectangular_with_forbidden() {
        // 2 rows, 3 cols; row 1 can only take col 2.
        let cost = vec![
            vec![5.0, 1.0, 3.0],
            vec![FORBIDDEN, FORBIDDEN, 2.0],
        ];
        let pairs = assign(&cost, 2, 3);
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn all_forbidden_yields_no_matches() {
        let cost = vec![vec![FORBIDDEN; 2]; 2];
        assert!(assign(&cost, 2, 2).is_empty());
    }
}
