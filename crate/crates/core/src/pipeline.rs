//! SNV cycle extraction over a time filtration, two ways.
//!
//! The classical route computes one barcode per time step and keeps the
//! bars born at scale 1. The deformed route computes a single barcode of
//! the Rips filtration on the deformed distances; a bar born at scaled
//! value `N + i` is a cycle first appearing at time step `i`, and a death at
//! `N + j` means it becomes a boundary at step `j`.
//!
//! To compare the two on death steps, the classical route also derives the
//! step intervals from per-step data alone: it pushes each step's
//! representatives forward into every later step and reads the intervals off
//! the resulting rank function.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::distance::{deform, DistanceMatrix, DistanceSpace, ScaleSchedule, TimeLabels};
use crate::error::{Error, Result};
use crate::field::{Column, PrimeField};
use crate::persistence::{barcode_h1, chain_edges, BoundarySpan, Death};
use crate::rips::{build_rips, FilteredComplex};

/// `(u, v, coefficient)` with `u < v` point indices of the full space.
pub type EdgeTerm = (usize, usize, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classical,
    Deformed,
}

/// Membership in steps `birth_step..death_step`, or through the horizon when
/// `death_step` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StepInterval {
    pub birth_step: usize,
    pub death_step: Option<usize>,
}

impl StepInterval {
    pub fn contains(&self, step: usize) -> bool {
        self.birth_step <= step && self.death_step.is_none_or(|d| step < d)
    }

    pub fn last_alive(&self, horizon: usize) -> usize {
        self.death_step.map_or(horizon, |d| d - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnvBar {
    pub interval: StepInterval,
    pub birth_value: u64,
    pub death_value: Death,
    pub representative: Vec<EdgeTerm>,
}

/// A scale-1 bar from one classical time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleBar {
    pub birth_value: u64,
    pub death_value: Death,
    pub representative: Vec<EdgeTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepBarcode {
    pub step: usize,
    pub points: usize,
    pub cap: u64,
    pub bars: Vec<ScaleBar>,
}

#[derive(Debug, Clone)]
pub struct SnvReport {
    pub mode: Mode,
    pub horizon: usize,
    pub prime: u32,
    /// `N`; deformed mode only.
    pub offset_base: Option<u64>,
    /// Scaled cap of the single deformed filtration.
    pub cap: Option<u64>,
    pub point_ids: Vec<String>,
    pub per_step_counts: Vec<usize>,
    pub intervals: Vec<StepInterval>,
    /// Deformed mode: one entry per deformed SNV cycle.
    pub bars: Vec<SnvBar>,
    /// Classical mode: the SNV bars of each step, computed independently.
    pub steps: Vec<StepBarcode>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalCap {
    /// Diameter of each step's point set.
    Full,
    Value(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalOptions {
    pub cap: ClassicalCap,
    /// Derive step intervals from the per-step representatives.
    pub track_transitions: bool,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self {
            cap: ClassicalCap::Full,
            track_transitions: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeformedCap {
    /// `2N - 1`: resolves everything in the first block.
    #[default]
    FirstBlock,
    /// Largest deformed distance.
    Full,
    /// Explicit scaled cap, at least `N + m`.
    Value(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeformedOptions {
    pub cap: DeformedCap,
}

struct StepRun {
    members: Vec<usize>,
    complex: FilteredComplex,
    bars: StepBarcode,
}

const CLASSICAL_NOTE: &str =
    "classical representatives are computed per step and carry no identity across steps";

pub fn classical_snv(
    space: &DistanceSpace,
    labels: &TimeLabels,
    field: PrimeField,
    options: ClassicalOptions,
) -> Result<SnvReport> {
    if options.cap == ClassicalCap::Value(0) {
        return Err(Error::InvalidCap("classical cap must be at least 1".into()));
    }
    let start = Instant::now();
    let horizon = labels.horizon();
    let runs: Vec<StepRun> = (0..=horizon)
        .into_par_iter()
        .map(|step| classical_step(space, labels, field, options.cap, step))
        .collect();
    let per_step_counts: Vec<usize> = runs.iter().map(|r| r.bars.bars.len()).collect();

    let mut notes = vec![CLASSICAL_NOTE.to_string()];
    let intervals = if options.track_transitions {
        intervals_from_ranks(&transition_ranks(space.len(), &runs, field), horizon)?
    } else {
        notes.push("step intervals not tracked".to_string());
        Vec::new()
    };

    Ok(SnvReport {
        mode: Mode::Classical,
        horizon,
        prime: field.characteristic(),
        offset_base: None,
        cap: None,
        point_ids: space.ids().to_vec(),
        per_step_counts,
        intervals,
        bars: Vec::new(),
        steps: runs.into_iter().map(|r| r.bars).collect(),
        notes,
        elapsed: start.elapsed(),
    })
}

fn classical_step(
    space: &DistanceSpace,
    labels: &TimeLabels,
    field: PrimeField,
    cap: ClassicalCap,
    step: usize,
) -> StepRun {
    let members = labels.members(step);
    let sub = space.induced(&members);
    let cap = match cap {
        ClassicalCap::Full => sub.diameter().max(1),
        ClassicalCap::Value(c) => c,
    };
    let complex = build_rips(&sub, cap);
    let barcode = barcode_h1(&complex, field);
    let bars = barcode
        .bars
        .iter()
        .filter(|b| b.birth == 1)
        .map(|b| ScaleBar {
            birth_value: b.birth,
            death_value: b.death,
            representative: chain_edges(&b.representative, &complex)
                .into_iter()
                .map(|(u, v, c)| (members[u], members[v], c))
                .collect(),
        })
        .collect();
    StepRun {
        bars: StepBarcode {
            step,
            points: members.len(),
            cap,
            bars,
        },
        members,
        complex,
    }
}

/// `ranks[i][j]` for `i <= j`: rank of the map from step `i` to step `j` on
/// scale-1 homology.
fn transition_ranks(n_points: usize, runs: &[StepRun], field: PrimeField) -> Vec<Vec<usize>> {
    let horizon = runs.len() - 1;
    (0..=horizon)
        .into_par_iter()
        .map(|j| {
            let target = &runs[j];
            let span = BoundarySpan::at(&target.complex, 1, field);
            let mut local = vec![usize::MAX; n_points];
            for (k, &g) in target.members.iter().enumerate() {
                local[g] = k;
            }
            (0..=horizon)
                .map(|i| {
                    if i > j {
                        return 0;
                    }
                    if i == j {
                        return runs[i].bars.bars.len();
                    }
                    let chains: Vec<Column> = runs[i]
                        .bars
                        .bars
                        .iter()
                        .map(|bar| {
                            let mut col: Column = bar
                                .representative
                                .iter()
                                .map(|&(u, v, c)| {
                                    let pos = target
                                        .complex
                                        .edge_position(local[u], local[v])
                                        .expect("earlier step edges persist");
                                    (pos, c)
                                })
                                .collect();
                            col.sort_unstable_by_key(|e| e.0);
                            col
                        })
                        .collect();
                    span.rank_modulo(&chains)
                })
                .collect::<Vec<usize>>()
        })
        .collect::<Vec<Vec<usize>>>()
        // collected by target step; transpose to [source][target]
        .into_iter()
        .enumerate()
        .fold(vec![vec![0; horizon + 1]; horizon + 1], |mut acc, (j, col)| {
            for (i, r) in col.into_iter().enumerate() {
                acc[i][j] = r;
            }
            acc
        })
}

/// Intervals of a persistence module over `0..=horizon` from its rank function.
fn intervals_from_ranks(ranks: &[Vec<usize>], horizon: usize) -> Result<Vec<StepInterval>> {
    let rk = |i: isize, j: usize| -> i64 {
        if i < 0 {
            0
        } else {
            ranks[i as usize][j] as i64
        }
    };
    let mut out = Vec::new();
    let mut push = |birth: usize, death: Option<usize>, count: i64| -> Result<()> {
        if count < 0 {
            return Err(Error::Invariant(format!(
                "negative interval multiplicity at birth {birth}, death {death:?}"
            )));
        }
        out.extend(std::iter::repeat_n(StepInterval { birth_step: birth, death_step: death }, count as usize));
        Ok(())
    };
    for b in 0..=horizon {
        let bi = b as isize;
        for d in b + 1..=horizon {
            let count = (rk(bi, d - 1) - rk(bi - 1, d - 1)) - (rk(bi, d) - rk(bi - 1, d));
            push(b, Some(d), count)?;
        }
        push(b, None, rk(bi, horizon) - rk(bi - 1, horizon))?;
    }
    Ok(out)
}

fn counts_from_intervals(intervals: &[StepInterval], horizon: usize) -> Vec<usize> {
    (0..=horizon)
        .map(|i| intervals.iter().filter(|iv| iv.contains(i)).count())
        .collect()
}

pub fn deformed_snv(
    space: &DistanceSpace,
    labels: &TimeLabels,
    field: PrimeField,
    options: DeformedOptions,
) -> Result<SnvReport> {
    let start = Instant::now();
    let horizon = labels.horizon();
    let schedule = ScaleSchedule::new(horizon as u64);
    let base = schedule.base();
    let block_end = base + horizon as u64;
    let scaled = deform(space, labels)?;
    let cap = match options.cap {
        DeformedCap::FirstBlock => schedule.first_block_cap(),
        DeformedCap::Full => scaled.diameter().max(schedule.first_block_cap()),
        DeformedCap::Value(c) if c < block_end => {
            return Err(Error::InvalidCap(format!(
                "deformed cap {c} is below the end of the first block {block_end}"
            )))
        }
        DeformedCap::Value(c) => c,
    };
    let complex = build_rips(&scaled, cap);
    let barcode = barcode_h1(&complex, field);

    let mut bars = Vec::new();
    for bar in &barcode.bars {
        if bar.birth < base {
            return Err(Error::Invariant(format!(
                "class born at scaled value {} below the first block",
                bar.birth
            )));
        }
        let Some(birth_step) = schedule.step_of_birth(bar.birth) else {
            continue;
        };
        let death_step = match bar.death {
            Death::Finite(d) if d <= block_end => Some((d - base) as usize),
            _ => None,
        };
        bars.push(SnvBar {
            interval: StepInterval { birth_step, death_step },
            birth_value: bar.birth,
            death_value: bar.death,
            representative: chain_edges(&bar.representative, &complex),
        });
    }
    let intervals: Vec<StepInterval> = bars.iter().map(|b| b.interval).collect();
    Ok(SnvReport {
        mode: Mode::Deformed,
        horizon,
        prime: field.characteristic(),
        offset_base: Some(base),
        cap: Some(cap),
        point_ids: space.ids().to_vec(),
        per_step_counts: counts_from_intervals(&intervals, horizon),
        intervals,
        bars,
        steps: Vec::new(),
        notes: Vec::new(),
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepCheck {
    pub step: usize,
    pub classical: usize,
    pub deformed: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedDeath {
    pub birth_step: usize,
    pub death_step: usize,
    pub classical: usize,
    pub deformed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub steps: Vec<StepCheck>,
    pub deaths: Vec<MatchedDeath>,
    pub discrepancies: Vec<String>,
}

impl CorrespondenceReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Checks per-step SNV counts and the multiset of finite `(birth, death)`
/// step pairs between a classical and a deformed report.
pub fn verify_correspondence(classical: &SnvReport, deformed: &SnvReport) -> Result<CorrespondenceReport> {
    if classical.mode != Mode::Classical || deformed.mode != Mode::Deformed {
        return Err(Error::Mismatch("expected a classical and a deformed report".into()));
    }
    if classical.horizon != deformed.horizon {
        return Err(Error::Mismatch(format!(
            "horizons differ: {} vs {}",
            classical.horizon, deformed.horizon
        )));
    }
    if classical.prime != deformed.prime {
        return Err(Error::Mismatch(format!(
            "primes differ: {} vs {}",
            classical.prime, deformed.prime
        )));
    }
    if classical.point_ids != deformed.point_ids {
        return Err(Error::Mismatch("reports cover different point sets".into()));
    }
    if classical.per_step_counts.iter().any(|&c| c > 0) && classical.intervals.is_empty() {
        return Err(Error::Mismatch("classical report was computed without step intervals".into()));
    }

    let mut discrepancies = Vec::new();
    let steps: Vec<StepCheck> = classical
        .per_step_counts
        .iter()
        .zip(&deformed.per_step_counts)
        .enumerate()
        .map(|(step, (&c, &d))| {
            if c != d {
                discrepancies.push(format!("step {step}: {c} classical SNV cycles vs {d} deformed"));
            }
            StepCheck {
                step,
                classical: c,
                deformed: d,
                equal: c == d,
            }
        })
        .collect();

    let mut pairs: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for iv in &classical.intervals {
        if let Some(d) = iv.death_step {
            pairs.entry((iv.birth_step, d)).or_default().0 += 1;
        }
    }
    for iv in &deformed.intervals {
        if let Some(d) = iv.death_step {
            pairs.entry((iv.birth_step, d)).or_default().1 += 1;
        }
    }
    let deaths = pairs
        .into_iter()
        .map(|((birth_step, death_step), (c, d))| {
            if c != d {
                discrepancies.push(format!(
                    "born at step {birth_step}, dying at step {death_step}: {c} classical vs {d} deformed"
                ));
            }
            MatchedDeath {
                birth_step,
                death_step,
                classical: c,
                deformed: d,
            }
        })
        .collect();
    Ok(CorrespondenceReport {
        steps,
        deaths,
        discrepancies,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityRow {
    pub bar: usize,
    pub birth_step: usize,
    pub last_alive_step: usize,
    /// Whether the representative's class is nonzero at each step from
    /// `birth_step` through the horizon.
    pub nonzero: Vec<bool>,
    /// `nonzero` coincides with interval membership at every step.
    pub agrees_with_membership: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepTransition {
    pub step: usize,
    pub alive: usize,
    /// Alive at `step` with nonzero image at `step + 1`.
    pub persisting: usize,
    pub dying: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub transitions: Vec<StepTransition>,
    pub violations: Vec<String>,
}

/// Lifespans of deformed SNV cycles, with each class tested for being
/// nonzero at every later step of the deformed filtration.
pub fn stability_report(
    report: &SnvReport,
    space: &DistanceSpace,
    labels: &TimeLabels,
    field: PrimeField,
) -> Result<StabilityReport> {
    if report.mode != Mode::Deformed {
        return Err(Error::Mismatch("stability needs a deformed report".into()));
    }
    if report.point_ids != space.ids() || report.horizon != labels.horizon() {
        return Err(Error::Mismatch("report does not belong to this space".into()));
    }
    let horizon = labels.horizon();
    let schedule = ScaleSchedule::new(horizon as u64);
    let scaled = deform(space, labels)?;
    let complex = build_rips(&scaled, schedule.first_block_cap());
    let spans: Vec<BoundarySpan> = if report.bars.is_empty() {
        Vec::new()
    } else {
        (0..=horizon)
            .into_par_iter()
            .map(|i| BoundarySpan::at(&complex, schedule.kappa(i as i64), field))
            .collect()
    };

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (index, bar) in report.bars.iter().enumerate() {
        let mut chain: Column = Vec::with_capacity(bar.representative.len());
        for &(u, v, c) in &bar.representative {
            let pos = complex.edge_position(u, v).ok_or(Error::EdgeMissing(u, v))?;
            chain.push((pos, c));
        }
        chain.sort_unstable_by_key(|e| e.0);
        let birth = bar.interval.birth_step;
        crate::persistence::check_chain_present(&chain, &complex, schedule.kappa(birth as i64))?;

        let nonzero: Vec<bool> = (birth..=horizon).map(|i| !spans[i].contains(&chain)).collect();
        for i in birth..horizon {
            let member_now = bar.interval.contains(i);
            let image_nonzero = nonzero[i + 1 - birth];
            if member_now && image_nonzero && !bar.interval.contains(i + 1) {
                violations.push(format!(
                    "bar {index}: class survives into step {} but its interval ends at {}",
                    i + 1,
                    i
                ));
            }
        }
        let agrees = (birth..=horizon).all(|i| nonzero[i - birth] == bar.interval.contains(i));
        rows.push(StabilityRow {
            bar: index,
            birth_step: birth,
            last_alive_step: bar.interval.last_alive(horizon),
            nonzero,
            agrees_with_membership: agrees,
        });
    }

    let transitions = (0..horizon)
        .map(|step| {
            let alive: Vec<&StabilityRow> = rows
                .iter()
                .filter(|r| report.bars[r.bar].interval.contains(step))
                .collect();
            let persisting = alive.iter().filter(|r| r.nonzero[step + 1 - r.birth_step]).count();
            StepTransition {
                step,
                alive: alive.len(),
                persisting,
                dying: alive.len() - persisting,
            }
        })
        .collect();
    Ok(StabilityReport {
        rows,
        transitions,
        violations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub points: usize,
    pub horizon: usize,
    pub repetitions: usize,
    pub classical_median_ms: f64,
    pub deformed_median_ms: f64,
    /// Classical over deformed.
    pub ratio: f64,
    pub correspondence_clean: bool,
    pub discrepancies: Vec<String>,
}

/// Median wall-clock time of the `m + 1` classical barcodes against the
/// single deformed barcode, plus one correspondence check.
pub fn benchmark(
    space: &DistanceSpace,
    labels: &TimeLabels,
    field: PrimeField,
    repetitions: usize,
    classical_cap: ClassicalCap,
) -> Result<BenchmarkReport> {
    let repetitions = repetitions.max(1);
    let timed_classical = ClassicalOptions {
        cap: classical_cap,
        track_transitions: false,
    };
    let mut classical_times = Vec::with_capacity(repetitions);
    let mut deformed_times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t = Instant::now();
        classical_snv(space, labels, field, timed_classical)?;
        classical_times.push(t.elapsed());
        let t = Instant::now();
        deformed_snv(space, labels, field, DeformedOptions::default())?;
        deformed_times.push(t.elapsed());
    }

    let classical = classical_snv(
        space,
        labels,
        field,
        ClassicalOptions {
            cap: classical_cap,
            track_transitions: true,
        },
    )?;
    let deformed = deformed_snv(space, labels, field, DeformedOptions::default())?;
    let check = verify_correspondence(&classical, &deformed)?;

    let classical_ms = median_ms(&mut classical_times);
    let deformed_ms = median_ms(&mut deformed_times);
    Ok(BenchmarkReport {
        points: space.len(),
        horizon: labels.horizon(),
        repetitions,
        classical_median_ms: classical_ms,
        deformed_median_ms: deformed_ms,
        ratio: classical_ms / deformed_ms.max(1e-6),
        correspondence_clean: check.is_clean(),
        discrepancies: check.discrepancies,
    })
}

fn median_ms(times: &mut [Duration]) -> f64 {
    times.sort_unstable();
    let mid = times.len() / 2;
    let median = if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2
    };
    median.as_secs_f64() * 1e3
}
