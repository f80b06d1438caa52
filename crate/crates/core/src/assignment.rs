//! Maximum-weight one-to-one assignment over exact rational weights.
//!
//! Kuhn-Munkres with potentials and shortest augmenting paths, O(n^2 m).
//! Exact arithmetic keeps the matched total (and therefore every metric
//! built on it) independent of float rounding; optimality is pinned by a
//! brute-force equivalence test over small instances.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Returns the maximum total weight and, per row, the matched column.
/// Rectangular matrices leave the surplus side unmatched.
pub fn max_assignment(weights: &[Vec<BigRational>]) -> (BigRational, Vec<Option<usize>>) {
    let n = weights.len();
    let m = weights.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 {
        return (BigRational::zero(), vec![None; n]);
    }
    if n > m {
        // solve the transpose and invert the matching
        let t: Vec<Vec<BigRational>> = (0..m)
            .map(|j| (0..n).map(|i| weights[i][j].clone()).collect())
            .collect();
        let (total, cols) = max_assignment(&t);
        let mut rows = vec![None; n];
        for (j, r) in cols.into_iter().enumerate() {
            if let Some(i) = r {
                rows[i] = Some(j);
            }
        }
        return (total, rows);
    }

    // minimize negated weights; 1-based arrays, column 0 is the virtual root
    let inf: BigRational = weights
        .iter()
        .flatten()
        .map(|w| w.abs())
        .fold(BigRational::zero(), |a, b| a + b)
        + BigRational::from_integer(1.into());

    let cost = |i: usize, j: usize| -> BigRational { -weights[i - 1][j - 1].clone() };
    let mut u = vec![BigRational::zero(); n + 1];
    let mut v = vec![BigRational::zero(); m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf.clone(); m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf.clone();
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - &u[i0] - &v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j].clone();
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += &delta;
                    v[j] -= &delta;
                } else {
                    minv[j] -= &delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut rows = vec![None; n];
    let mut total = BigRational::zero();
    for j in 1..=m {
        let i = matched_row[j];
        if i != 0 {
            rows[i - 1] = Some(j - 1);
            total += &weights[i - 1][j - 1];
        }
    }
    (total, rows)
}

/// Exhaustive maximum over all injective row-to-column maps. Test oracle;
/// factorial time, callers keep dimensions tiny.
#[cfg(test)]
pub fn brute_force_max(weights: &[Vec<BigRational>]) -> BigRational {
    let n = weights.len();
    let m = weights.first().map_or(0, |r| r.len());
    let mut used = vec![false; m];
    fn go(
        weights: &[Vec<BigRational>],
        row: usize,
        used: &mut [bool],
        acc: BigRational,
        best: &mut BigRational,
    ) {
        if row == weights.len() {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        // leave this row unmatched
        go(weights, row + 1, used, acc.clone(), best);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(weights, row + 1, used, acc.clone() + &weights[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = BigRational::zero();
    if n > 0 && m > 0 {
        go(weights, 0, &mut used, BigRational::zero(), &mut best);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn known_square_instance() {
        let w = vec![
            vec![ratio(7, 1), ratio(4, 1), ratio(3, 1)],
            vec![ratio(6, 1), ratio(8, 1), ratio(5, 1)],
            vec![ratio(9, 1), ratio(4, 1), ratio(4, 1)],
        ];
        let (total, rows) = max_assignment(&w);
        assert_eq!(total, brute_force_max(&w));
        assert_eq!(total, ratio(20, 1)); // 3 + 8 + 9
        assert_eq!(rows, vec![Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn rectangular_both_orientations() {
        let wide = vec![vec![ratio(1, 2), ratio(2, 3), ratio(1, 6)]];
        let (total, rows) = max_assignment(&wide);
        assert_eq!(total, ratio(2, 3));
        assert_eq!(rows, vec![Some(1)]);

        let tall = vec![vec![ratio(1, 2)], vec![ratio(2, 3)], vec![ratio(1, 6)]];
        let (total, rows) = max_assignment(&tall);
        assert_eq!(total, ratio(2, 3));
        assert_eq!(rows, vec![None, Some(0), None]);
    }

    #[test]
    fn matches_brute_force_on_random_rational_matrices() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            let w: Vec<Vec<BigRational>> = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| ratio(rng.gen_range(0..20), rng.gen_range(1..9)))
                        .collect()
                })
                .collect();
            let (total, rows) = max_assignment(&w);
            assert_eq!(total, brute_force_max(&w));
            // matching is injective
            let mut seen = std::collections::BTreeSet::new();
            for c in rows.into_iter().flatten() {
                assert!(seen.insert(c));
            }
        }
    }
}
