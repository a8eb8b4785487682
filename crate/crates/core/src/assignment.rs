//! Exact dense linear assignment.
//!
//! Shortest-augmenting-path (Jonker–Volgenant style) solver over `f64`
//! costs, O(n^3). Exact for the matrix sizes this crate meets (a few
//! thousand rows at the extreme), which is why it is preferred over
//! approximate regularised solvers.

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns the column assigned to each row and the total cost, where the
/// total is re-summed from the chosen entries in row order so callers can
/// compare it against independently computed sums.
pub fn solve(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    // 1-based internal arrays; p[j] is the row matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];

        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
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
    let total = canonical_sum(assignment.iter().enumerate().map(|(i, &j)| cost[i][j]));
    (assignment, total)
}

/// Sum in ascending order, so assignments selecting the same multiset of
/// entries produce bit-identical totals regardless of row order.
pub(crate) fn canonical_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut entries: Vec<f64> = values.collect();
    entries.sort_by(f64::total_cmp);
    entries.iter().sum()
}

/// Brute-force minimum over all permutations; test oracle for small `n`.
pub fn brute_force(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let total = canonical_sum(p.iter().enumerate().map(|(i, &j)| cost[i][j]));
        if total < best {
            best = total;
        }
    });
    best
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn solves_small_known_instance() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let (assignment, total) = solve(&cost);
        assert_eq!(assignment.len(), 3);
        assert_eq!(total, 5.0);
    }

    #[test]
    fn empty_matrix() {
        let (assignment, total) = solve(&[]);
        assert!(assignment.is_empty());
        assert_eq!(total, 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut stream = RngStream::new(99, 0);
        for trial in 0..300 {
            let n = 1 + (stream.next_u64() % 7) as usize;
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| stream.uniform(0.0, 10.0)).collect())
                .collect();
            let (_, got) = solve(&cost);
            let want = brute_force(&cost);
            assert!(
                (got - want).abs() <= 1e-12,
                "trial {trial}: solver {got} vs brute force {want}"
            );
        }
    }

    #[test]
    fn assignment_is_a_permutation() {
        let mut stream = RngStream::new(7, 7);
        let n = 25;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| stream.uniform(0.0, 1.0)).collect())
            .collect();
        let (assignment, _) = solve(&cost);
        let mut seen = vec![false; n];
        for &j in &assignment {
            assert!(!seen[j]);
            seen[j] = true;
        }
    }
}
