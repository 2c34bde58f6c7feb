//! Brute-force ground truth and seeded random instances.
//!
//! Nothing here goes through the filtration or reduction code: complexes
//! are enumerated directly and ranks come from dense Gaussian elimination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::{DistanceMatrix, DistanceSpace, TimeLabels};

/// Parameters of a reproducible random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomInstanceSpec {
    pub seed: u64,
    pub n: usize,
    pub horizon: usize,
    pub d_max: u64,
}

/// Uniform off-diagonal distances in `1..=d_max` and uniform labels in `0..=horizon`.
///
/// Distances are not forced to satisfy the triangle inequality.
pub fn random_instance(spec: RandomInstanceSpec) -> (DistanceSpace, TimeLabels) {
    assert!(spec.n >= 1 && spec.d_max >= 1, "need n >= 1 and d_max >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    // upper triangle, row by row
    let upper: Vec<u64> = (0..n * n.saturating_sub(1) / 2).map(|_| rng.gen_range(1..=spec.d_max)).collect();
    let at = |i: usize, j: usize| upper[i * (2 * n - i - 1) / 2 + (j - i - 1)];
    let rows: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Less => at(i, j),
                    std::cmp::Ordering::Greater => at(j, i),
                    std::cmp::Ordering::Equal => 0,
                })
                .collect()
        })
        .collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=spec.horizon)).collect();
    let ids = (0..n).map(|i| format!("x{i}")).collect();
    let space = DistanceSpace::new(ids, rows).expect("generated matrix is valid");
    let labels = TimeLabels::new(&space, spec.horizon, labels).expect("generated labels are in range");
    (space, labels)
}

/// `dim H_1` of the Rips complex at scale `v`, as `(#edges - rank d1) - rank d2`.
pub fn betti1_bruteforce<D: DistanceMatrix + ?Sized>(dist: &D, v: u64, p: u32) -> usize {
    let n = dist.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if dist.distance(a, b) <= v {
                edges.push((a, b));
            }
        }
    }
    let edge_index = |a: usize, b: usize| edges.iter().position(|&e| e == (a, b));
    let mut triangles = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if dist.distance(a, b) <= v && dist.distance(a, c) <= v && dist.distance(b, c) <= v {
                    triangles.push((a, b, c));
                }
            }
        }
    }

    // d1: vertices x edges
    let mut d1 = vec![vec![0i64; edges.len()]; n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        d1[a][k] = -1;
        d1[b][k] = 1;
    }
    // d2: edges x triangles
    let mut d2 = vec![vec![0i64; triangles.len()]; edges.len()];
    for (k, &(a, b, c)) in triangles.iter().enumerate() {
        d2[edge_index(b, c).unwrap()][k] = 1;
        d2[edge_index(a, c).unwrap()][k] = -1;
        d2[edge_index(a, b).unwrap()][k] = 1;
    }
    let r1 = dense_rank(d1, p);
    let r2 = dense_rank(d2, p);
    edges.len() - r1 - r2
}

/// Rank over F_p by row reduction.
pub fn dense_rank(mut m: Vec<Vec<i64>>, p: u32) -> usize {
    let p = p as i64;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = x.rem_euclid(p);
        }
    }
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = mod_inverse(m[rank][col], p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x - factor * y).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    // extended Euclid
    let (mut old_r, mut r) = (a, p);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(p)
}

/// `dim H_1` of the scale-1 Rips complex of every time step.
pub fn snv_counts_oracle(space: &DistanceSpace, labels: &TimeLabels, p: u32) -> Vec<usize> {
    (0..=labels.horizon())
        .map(|step| {
            let members: Vec<usize> = (0..space.len()).filter(|&x| labels.label(x) <= step).collect();
            betti1_bruteforce(&Restricted { space, members: &members }, 1, p)
        })
        .collect()
}

struct Restricted<'a> {
    space: &'a DistanceSpace,
    members: &'a [usize],
}

impl DistanceMatrix for Restricted<'_> {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn distance(&self, i: usize, j: usize) -> u64 {
        self.space.distance(self.members[i], self.members[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: Vec<Vec<u64>>) -> DistanceSpace {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        DistanceSpace::new(ids, rows).unwrap()
    }

    fn square() -> DistanceSpace {
        space(vec![
            vec![0, 1, 2, 1],
            vec![1, 0, 1, 2],
            vec![2, 1, 0, 1],
            vec![1, 2, 1, 0],
        ])
    }

    #[test]
    fn square_betti() {
        assert_eq!(betti1_bruteforce(&square(), 1, 2), 1);
        assert_eq!(betti1_bruteforce(&square(), 2, 2), 0);
        assert_eq!(betti1_bruteforce(&square(), 0, 2), 0);
        assert_eq!(betti1_bruteforce(&space(vec![vec![0]]), 7, 3), 0);
    }

    #[test]
    fn rank_depends_on_field() {
        // [[2]] has rank 1 over F_3 and rank 0 over F_2.
        assert_eq!(dense_rank(vec![vec![2]], 2), 0);
        assert_eq!(dense_rank(vec![vec![2]], 3), 1);
        assert_eq!(dense_rank(vec![vec![1, 1], vec![1, 1]], 5), 1);
        assert_eq!(dense_rank(vec![], 5), 0);
    }

    #[test]
    fn counts_per_step() {
        let sq = square();
        assert_eq!(snv_counts_oracle(&sq, &TimeLabels::uniform(&sq), 2), [1]);
        let tri = space(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let tl = TimeLabels::new(&tri, 1, vec![0, 0, 0]).unwrap();
        assert_eq!(snv_counts_oracle(&tri, &tl, 2), [0, 0]);
        let late = TimeLabels::new(&sq, 1, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(snv_counts_oracle(&sq, &late, 2), [0, 1]);
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = RandomInstanceSpec {
            seed: 7,
            n: 5,
            horizon: 2,
            d_max: 3,
        };
        assert_eq!(random_instance(spec), random_instance(spec));
        let (single, labels) = random_instance(RandomInstanceSpec {
            seed: 1,
            n: 1,
            horizon: 3,
            d_max: 1,
        });
        assert_eq!(single.len(), 1);
        assert!(labels.label(0) <= 3);
        let (s, l) = random_instance(spec);
        for i in 0..5 {
            assert!(l.label(i) <= 2);
            for j in 0..5 {
                let d = s.distance(i, j);
                assert!(if i == j { d == 0 } else { (1..=3).contains(&d) });
            }
        }
    }
}
