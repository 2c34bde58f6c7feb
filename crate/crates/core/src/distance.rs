//! Distance spaces with integer semimetrics, time labels, and the time
//! deformation of distances.
//!
//! Deformed distances are kept as exact integers in units of `1/N`, where
//! `N` is the smallest power of ten exceeding the horizon. A deformed
//! value `1.264` with `N = 1000` is stored as `1264`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};

/// Read access to a symmetric integer distance matrix.
pub trait DistanceMatrix {
    fn len(&self) -> usize;
    fn distance(&self, i: usize, j: usize) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest entry, or 0 for fewer than two points.
    fn diameter(&self) -> u64 {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.distance(i, j))
            .max()
            .unwrap_or(0)
    }
}

/// Finite set of named points with a natural-valued semimetric.
///
/// Distinct points are always at distance at least 1; use
/// [`DistanceSpace::deduplicated`] to collapse zero-distance inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceSpace {
    ids: Vec<String>,
    dist: Vec<u64>,
}

/// A group of input points collapsed into one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Merge {
    pub kept: String,
    pub absorbed: Vec<String>,
    /// Set when the absorbed points did not share the kept point's distances.
    pub inconsistent_rows: bool,
}

impl DistanceSpace {
    /// Validates and builds a space from full rows.
    pub fn new(ids: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        let dist = flatten(&ids, rows)?;
        let space = Self { ids, dist };
        space.validate(false)?;
        Ok(space)
    }

    /// Like [`DistanceSpace::new`] but merges points at distance 0.
    ///
    /// Zero-distance pairs are closed transitively. Each group keeps the
    /// lexicographically least id, and that point's row of distances.
    pub fn deduplicated(ids: Vec<String>, rows: Vec<Vec<u64>>) -> Result<(Self, Vec<Merge>)> {
        let dist = flatten(&ids, rows)?;
        let raw = Self { ids, dist };
        raw.validate(true)?;

        let n = raw.len();
        let mut groups = DisjointSets::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if raw.distance(i, j) == 0 {
                    groups.union(i, j);
                }
            }
        }
        let root: Vec<usize> = (0..n).map(|i| groups.find(i)).collect();
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &r) in root.iter().enumerate() {
            members.entry(r).or_default().push(i);
        }

        let mut kept = Vec::new();
        let mut merges = Vec::new();
        for group in members.values() {
            let rep = *group
                .iter()
                .min_by(|&&a, &&b| raw.ids[a].cmp(&raw.ids[b]))
                .expect("nonempty group");
            kept.push(rep);
            if group.len() > 1 {
                let mut absorbed: Vec<String> = group
                    .iter()
                    .filter(|&&i| i != rep)
                    .map(|&i| raw.ids[i].clone())
                    .collect();
                absorbed.sort();
                let inconsistent_rows = group.iter().any(|&i| {
                    (0..n).any(|k| root[k] != root[rep] && raw.distance(i, k) != raw.distance(rep, k))
                });
                merges.push(Merge {
                    kept: raw.ids[rep].clone(),
                    absorbed,
                    inconsistent_rows,
                });
            }
        }
        kept.sort_unstable();
        merges.sort_by(|a, b| a.kept.cmp(&b.kept));
        Ok((raw.induced(&kept), merges))
    }

    fn validate(&self, allow_zero: bool) -> Result<()> {
        let n = self.len();
        let mut seen = HashSet::with_capacity(n);
        for id in &self.ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for i in 0..n {
            if self.distance(i, i) != 0 {
                return Err(Error::NonzeroDiagonal(self.ids[i].clone()));
            }
            for j in i + 1..n {
                let d = self.distance(i, j);
                if d != self.distance(j, i) {
                    return Err(Error::Asymmetric(self.ids[i].clone(), self.ids[j].clone()));
                }
                if d == 0 && !allow_zero {
                    return Err(Error::ZeroDistance(self.ids[i].clone(), self.ids[j].clone()));
                }
            }
        }
        Ok(())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Sub-space on the given point indices, in the given order.
    pub fn induced(&self, indices: &[usize]) -> Self {
        let n = self.len();
        let k = indices.len();
        let mut dist = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                dist.push(self.dist[i * n + j]);
            }
        }
        Self {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            dist,
        }
    }
}

impl DistanceMatrix for DistanceSpace {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn distance(&self, i: usize, j: usize) -> u64 {
        self.dist[i * self.ids.len() + j]
    }
}

fn flatten(ids: &[String], rows: Vec<Vec<u64>>) -> Result<Vec<u64>> {
    let n = ids.len();
    if rows.len() != n {
        return Err(Error::NotSquare {
            rows: rows.len(),
            row: 0,
            len: n,
        });
    }
    let mut dist = Vec::with_capacity(n * n);
    for (row, r) in rows.into_iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { rows: n, row, len: r.len() });
        }
        dist.extend(r);
    }
    Ok(dist)
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Number of positions at which two equal-length sequences differ.
pub fn hamming(a: &[u8], b: &[u8]) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
}

/// Pairwise Hamming space over aligned sequences, identical sequences merged.
pub fn build_space_from_sequences(records: &[(String, Vec<u8>)]) -> Result<(DistanceSpace, Vec<Merge>)> {
    let Some((_, first)) = records.first() else {
        return Err(Error::Empty("no sequences"));
    };
    let expected = first.len();
    for (id, seq) in records {
        if seq.len() != expected {
            return Err(Error::RaggedSequence {
                id: id.clone(),
                len: seq.len(),
                expected,
            });
        }
    }
    let n = records.len();
    let mut rows = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = hamming(&records[i].1, &records[j].1)?;
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    let ids = records.iter().map(|(id, _)| id.clone()).collect();
    DistanceSpace::deduplicated(ids, rows)
}

/// First-appearance time step `D(x)` of every point, plus the horizon `m`.
///
/// Step `i` of the time filtration is `{x : D(x) <= i}`; steps may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeLabels {
    horizon: usize,
    labels: Vec<usize>,
}

impl TimeLabels {
    /// Labels indexed like the points of `space`.
    pub fn new(space: &DistanceSpace, horizon: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != space.len() {
            return Err(Error::TimeCountMismatch {
                times: labels.len(),
                points: space.len(),
            });
        }
        for (id, &label) in space.ids().iter().zip(&labels) {
            if label > horizon {
                return Err(Error::LabelOutOfRange {
                    id: id.clone(),
                    label,
                    horizon,
                });
            }
        }
        Ok(Self { horizon, labels })
    }

    /// Every point at step 0.
    pub fn uniform(space: &DistanceSpace) -> Self {
        Self {
            horizon: 0,
            labels: vec![0; space.len()],
        }
    }

    /// Resolves labels by id. A kept point takes the smallest label among
    /// itself and everything merged into it.
    pub fn from_ids(
        space: &DistanceSpace,
        by_id: &HashMap<String, usize>,
        merges: &[Merge],
        horizon: Option<usize>,
    ) -> Result<Self> {
        let absorbed: HashMap<&str, Vec<&str>> = merges
            .iter()
            .map(|m| (m.kept.as_str(), m.absorbed.iter().map(String::as_str).collect()))
            .collect();
        let mut labels = Vec::with_capacity(space.len());
        for id in space.ids() {
            let mut label = *by_id.get(id).ok_or_else(|| Error::MissingLabel(id.clone()))?;
            for other in absorbed.get(id.as_str()).into_iter().flatten() {
                let l = *by_id.get(*other).ok_or_else(|| Error::MissingLabel(other.to_string()))?;
                label = label.min(l);
            }
            labels.push(label);
        }
        let largest = labels.iter().copied().max().unwrap_or(0);
        let horizon = match horizon {
            Some(h) if h < largest => {
                return Err(Error::HorizonTooSmall { requested: h, largest })
            }
            Some(h) => h,
            None => largest,
        };
        Self::new(space, horizon, labels)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn label(&self, point: usize) -> usize {
        self.labels[point]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    /// Indices of the points present at `step`, ascending.
    pub fn members(&self, step: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&x| self.labels[x] <= step).collect()
    }
}

/// Points of the time filtration at step `step`, keeping their ids.
pub fn restrict_to_step(space: &DistanceSpace, labels: &TimeLabels, step: usize) -> Result<DistanceSpace> {
    if step > labels.horizon() {
        return Err(Error::StepOutOfRange {
            step,
            horizon: labels.horizon(),
        });
    }
    Ok(space.induced(&labels.members(step)))
}

/// Smallest power of ten strictly greater than `horizon`.
pub fn time_offset_base(horizon: u64) -> u64 {
    let mut base = 1u64;
    while base <= horizon {
        base = base.checked_mul(10).expect("horizon too large for a u64 offset base");
    }
    base
}

/// Deformed distances `N*h(x,y) + max(D(x), D(y))` for `x != y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledDistanceMatrix {
    base: u64,
    n: usize,
    scaled: Vec<u64>,
}

impl ScaledDistanceMatrix {
    pub fn base(&self) -> u64 {
        self.base
    }

    /// Integer part `h(x,y)` and offset `max(D(x), D(y))` of an entry.
    pub fn split(&self, i: usize, j: usize) -> (u64, u64) {
        let v = self.distance(i, j);
        (v / self.base, v % self.base)
    }
}

impl DistanceMatrix for ScaledDistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn distance(&self, i: usize, j: usize) -> u64 {
        self.scaled[i * self.n + j]
    }
}

pub fn deform(space: &DistanceSpace, labels: &TimeLabels) -> Result<ScaledDistanceMatrix> {
    let n = space.len();
    if labels.as_slice().len() != n {
        let missing = space
            .ids()
            .get(labels.as_slice().len())
            .cloned()
            .unwrap_or_default();
        return Err(Error::MissingLabel(missing));
    }
    let base = time_offset_base(labels.horizon() as u64);
    let mut scaled = vec![0u64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let offset = labels.label(i).max(labels.label(j)) as u64;
            let v = space
                .distance(i, j)
                .checked_mul(base)
                .and_then(|v| v.checked_add(offset))
                .ok_or(Error::Overflow("deformed distance"))?;
            scaled[i * n + j] = v;
            scaled[j * n + i] = v;
        }
    }
    Ok(ScaledDistanceMatrix { base, n, scaled })
}

/// The scale thresholds `kappa(i)` of the deformed filtration, in units of `1/N`.
///
/// Steps run in blocks of `m + 1`: block `q` covers the scaled values
/// `(q+1)*N ..= (q+1)*N + m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleSchedule {
    horizon: u64,
    base: u64,
}

impl ScaleSchedule {
    pub fn new(horizon: u64) -> Self {
        Self {
            horizon,
            base: time_offset_base(horizon),
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// # Panics
    /// If `i < -1`.
    pub fn kappa(&self, i: i64) -> u64 {
        assert!(i >= -1, "schedule index {i} below -1");
        if i == -1 {
            return 0;
        }
        let i = i as u64;
        let block = self.horizon + 1;
        (i / block + 1) * self.base + i % block
    }

    /// Time step whose threshold equals `scaled_birth`, if it lies in the first block.
    pub fn step_of_birth(&self, scaled_birth: u64) -> Option<usize> {
        (self.base..=self.base + self.horizon)
            .contains(&scaled_birth)
            .then(|| (scaled_birth - self.base) as usize)
    }

    /// Largest scaled value below the second block.
    pub fn first_block_cap(&self) -> u64 {
        2 * self.base - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    pub(crate) fn uniform_space(n: usize, d: u64) -> DistanceSpace {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { d }).collect())
            .collect();
        DistanceSpace::new(ids(n), rows).unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(b"ACGT", b"ACGT").unwrap(), 0);
        assert_eq!(hamming(b"ACGT", b"ACGA").unwrap(), 1);
        assert_eq!(hamming(b"AAAA", b"TTTT").unwrap(), 4);
        let err = hamming(b"AC", b"ACG").unwrap_err();
        assert!(err.to_string().contains('2') && err.to_string().contains('3'));
    }

    #[test]
    fn sequences_merge_duplicates() {
        let recs = vec![
            ("a".to_string(), b"AC".to_vec()),
            ("b".to_string(), b"AG".to_vec()),
            ("c".to_string(), b"AC".to_vec()),
        ];
        let (space, merges) = build_space_from_sequences(&recs).unwrap();
        assert_eq!(space.ids(), ["a", "b"]);
        assert_eq!(space.distance(0, 1), 1);
        assert_eq!(merges.len(), 1);
        assert_eq!(merges[0].kept, "a");
        assert_eq!(merges[0].absorbed, ["c"]);
        assert!(!merges[0].inconsistent_rows);

        let (single, _) = build_space_from_sequences(&[("a".into(), b"A".to_vec())]).unwrap();
        assert_eq!(single.len(), 1);

        let (two, _) =
            build_space_from_sequences(&[("a".into(), b"AC".to_vec()), ("b".into(), b"GT".to_vec())]).unwrap();
        assert_eq!(two.distance(0, 1), 2);

        assert!(matches!(build_space_from_sequences(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            build_space_from_sequences(&[("a".into(), b"AC".to_vec()), ("b".into(), b"G".to_vec())]),
            Err(Error::RaggedSequence { .. })
        ));
    }

    #[test]
    fn dedup_is_transitive_and_keeps_least_id() {
        // z-y at 0, y-x at 0 in a semimetric; x-z at 0 as well so the rows agree.
        let rows = vec![
            vec![0, 0, 0, 3],
            vec![0, 0, 0, 3],
            vec![0, 0, 0, 3],
            vec![3, 3, 3, 0],
        ];
        let ids = vec!["z".into(), "y".into(), "x".into(), "w".into()];
        let (space, merges) = DistanceSpace::deduplicated(ids, rows).unwrap();
        assert_eq!(space.ids(), ["x", "w"]);
        assert_eq!(merges[0].kept, "x");
        assert_eq!(merges[0].absorbed, ["y", "z"]);
    }

    #[test]
    fn dedup_flags_inconsistent_rows() {
        let rows = vec![vec![0, 0, 1], vec![0, 0, 2], vec![1, 2, 0]];
        let (space, merges) = DistanceSpace::deduplicated(ids(3), rows).unwrap();
        assert_eq!(space.len(), 2);
        assert_eq!(space.distance(0, 1), 1);
        assert!(merges[0].inconsistent_rows);
    }

    #[test]
    fn strict_constructor_rejects_bad_matrices() {
        assert!(matches!(
            DistanceSpace::new(ids(2), vec![vec![0, 0], vec![0, 0]]),
            Err(Error::ZeroDistance(..))
        ));
        assert!(matches!(
            DistanceSpace::new(ids(2), vec![vec![0, 1], vec![2, 0]]),
            Err(Error::Asymmetric(..))
        ));
        assert!(matches!(
            DistanceSpace::new(ids(2), vec![vec![1, 1], vec![1, 0]]),
            Err(Error::NonzeroDiagonal(..))
        ));
        assert!(matches!(
            DistanceSpace::new(vec!["a".into(), "a".into()], vec![vec![0, 1], vec![1, 0]]),
            Err(Error::DuplicateId(..))
        ));
    }

    #[test]
    fn offset_base() {
        assert_eq!(time_offset_base(34), 100);
        assert_eq!(time_offset_base(364), 1000);
        assert_eq!(time_offset_base(0), 1);
        assert_eq!(time_offset_base(9), 10);
        assert_eq!(time_offset_base(10), 100);
        assert_eq!(time_offset_base(99), 100);
    }

    #[test]
    fn deformation_worked_example() {
        // x, y, z pairwise at distance 1 with D = 264, 132, 132 and m = 364.
        let space = uniform_space(3, 1);
        let labels = TimeLabels::new(&space, 364, vec![264, 132, 132]).unwrap();
        let scaled = deform(&space, &labels).unwrap();
        assert_eq!(scaled.base(), 1000);
        assert_eq!(scaled.distance(0, 1), 1264);
        assert_eq!(scaled.distance(0, 2), 1264);
        assert_eq!(scaled.distance(1, 2), 1132);
        assert_eq!(scaled.split(1, 2), (1, 132));
        assert_eq!(scaled.distance(1, 1), 0);
    }

    #[test]
    fn deformation_vanishes_at_zero_labels() {
        let space = uniform_space(4, 3);
        let labels = TimeLabels::new(&space, 7, vec![0; 4]).unwrap();
        let scaled = deform(&space, &labels).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(scaled.distance(i, j), 10 * space.distance(i, j));
            }
        }
    }

    #[test]
    fn kappa_examples() {
        let s = ScaleSchedule::new(364);
        assert_eq!(s.kappa(-1), 0);
        assert_eq!(s.kappa(0), 1000);
        assert_eq!(s.kappa(364), 1364);
        assert_eq!(s.kappa(365), 2000);
        let small = ScaleSchedule::new(4);
        assert_eq!(small.base(), 10);
        assert_eq!(small.kappa(10), 30);
        assert_eq!(small.kappa(11), 31);
    }

    #[test]
    fn birth_steps() {
        let s = ScaleSchedule::new(364);
        assert_eq!(s.step_of_birth(1264), Some(264));
        assert_eq!(s.step_of_birth(1000), Some(0));
        assert_eq!(s.step_of_birth(1364), Some(364));
        assert_eq!(s.step_of_birth(1365), None);
        assert_eq!(s.step_of_birth(2000), None);
        assert_eq!(s.step_of_birth(999), None);
    }

    #[test]
    fn restriction() {
        let space = uniform_space(3, 1);
        let all_zero = TimeLabels::new(&space, 2, vec![0, 0, 0]).unwrap();
        assert_eq!(restrict_to_step(&space, &all_zero, 1).unwrap(), space);
        let staged = TimeLabels::new(&space, 2, vec![0, 1, 2]).unwrap();
        assert_eq!(restrict_to_step(&space, &staged, 1).unwrap().ids(), ["p0", "p1"]);
        let late = TimeLabels::new(&uniform_space(2, 1), 2, vec![2, 2]).unwrap();
        assert!(restrict_to_step(&uniform_space(2, 1), &late, 1).unwrap().is_empty());
        assert!(matches!(
            restrict_to_step(&space, &staged, 3),
            Err(Error::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn labels_from_ids_take_minimum_over_merges() {
        let space = uniform_space(2, 1);
        let merges = vec![Merge {
            kept: "p0".into(),
            absorbed: vec!["q".into()],
            inconsistent_rows: false,
        }];
        let by_id: HashMap<String, usize> =
            [("p0".to_string(), 2), ("q".to_string(), 0), ("p1".to_string(), 1)].into();
        let labels = TimeLabels::from_ids(&space, &by_id, &merges, None).unwrap();
        assert_eq!(labels.as_slice(), [0, 1]);
        assert_eq!(labels.horizon(), 1);
        let wider = TimeLabels::from_ids(&space, &by_id, &merges, Some(5)).unwrap();
        assert_eq!(wider.horizon(), 5);
        assert!(TimeLabels::from_ids(&space, &by_id, &merges, Some(0)).is_err());
        let mut missing = by_id.clone();
        missing.remove("p1");
        assert!(matches!(
            TimeLabels::from_ids(&space, &missing, &merges, None),
            Err(Error::MissingLabel(id)) if id == "p1"
        ));
    }
}
