//! Input parsing and report serialization.
//!
//! Inputs come in two shapes:
//!
//! * aligned sequences in a FASTA-like file (`>id` headers, sequence lines)
//!   together with a delimited metadata table with `id` and `time` columns;
//! * a strict lower-triangular distance matrix (line `k` holds the `k`
//!   distances from point `k` to points `0..k`) and a time vector with one
//!   integer per point.
//!
//! Reports serialize to compact JSON with a fixed key order, or to a
//! tab-separated per-step summary.

use std::collections::HashMap;

use serde::Serialize;

use crate::distance::{build_space_from_sequences, DistanceSpace, Merge, TimeLabels};
use crate::error::{Error, Result};
use crate::persistence::Death;
use crate::pipeline::{
    BenchmarkReport, CorrespondenceReport, EdgeTerm, Mode, SnvReport, StabilityReport, StepInterval,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Sequences,
    Matrix,
    Generated,
}

/// A resolved distance space with its time labels.
#[derive(Debug, Clone)]
pub struct InputBundle {
    pub source: SourceKind,
    pub space: DistanceSpace,
    pub labels: TimeLabels,
    pub merges: Vec<Merge>,
    pub notes: Vec<String>,
}

pub fn parse_fasta(text: &str) -> Result<Vec<(String, Vec<u8>)>> {
    let mut records: Vec<(String, Vec<u8>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().ok_or_else(|| {
                Error::Parse(format!("line {}: header without an id", lineno + 1))
            })?;
            records.push((id.to_string(), Vec::new()));
        } else {
            let Some((_, seq)) = records.last_mut() else {
                return Err(Error::Parse(format!("line {}: sequence before any header", lineno + 1)));
            };
            seq.extend(line.bytes().map(|b| b.to_ascii_uppercase()));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for (id, _) in &records {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(records)
}

/// `id -> time` from a table with a header row; tab- or comma-delimited.
pub fn parse_metadata(text: &str) -> Result<HashMap<String, usize>> {
    let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("metadata has no `{name}` column")))
    };
    let (id_col, time_col) = (column("id")?, column("time")?);

    let mut out = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let raw = record.get(time_col).unwrap_or("");
        let time = raw.parse::<usize>().map_err(|_| Error::InvalidTime {
            id: id.clone(),
            value: raw.to_string(),
        })?;
        if out.insert(id.clone(), time).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(out)
}

pub fn parse_sequences(fasta: &str, metadata: &str, horizon: Option<usize>) -> Result<InputBundle> {
    let records = parse_fasta(fasta)?;
    let times = parse_metadata(metadata)?;
    for (id, _) in &records {
        if !times.contains_key(id) {
            return Err(Error::MissingMetadata(id.clone()));
        }
    }
    let (space, merges) = build_space_from_sequences(&records)?;
    let labels = TimeLabels::from_ids(&space, &times, &merges, horizon)?;
    let mut notes = merge_notes(&merges, &space, &labels);
    let unused = times.len() - records.len().min(times.len());
    if unused > 0 {
        notes.push(format!("{unused} metadata rows have no sequence and were ignored"));
    }
    Ok(InputBundle {
        source: SourceKind::Sequences,
        space,
        labels,
        merges,
        notes,
    })
}

pub fn parse_matrix(matrix: &str, times: &str, horizon: Option<usize>) -> Result<InputBundle> {
    let time_tokens: Vec<&str> = times.split_whitespace().collect();
    let n = time_tokens.len();
    if n == 0 {
        return Err(Error::Empty("time vector"));
    }
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();

    let rows: Vec<(usize, &str)> = matrix
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if rows.len() + 1 != n {
        return Err(Error::TimeCountMismatch {
            times: n,
            points: rows.len() + 1,
        });
    }
    let mut full = vec![vec![0u64; n]; n];
    for (k, (lineno, line)) in rows.into_iter().enumerate() {
        let row = k + 1;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != row {
            return Err(Error::RaggedRow {
                line: lineno + 1,
                expected: row,
                found: entries.len(),
            });
        }
        for (col, token) in entries.into_iter().enumerate() {
            let d = token.parse::<u64>().map_err(|_| Error::InvalidEntry {
                line: lineno + 1,
                value: token.to_string(),
            })?;
            full[row][col] = d;
            full[col][row] = d;
        }
    }

    let mut by_id = HashMap::with_capacity(n);
    for (id, token) in ids.iter().zip(&time_tokens) {
        let t = token.parse::<usize>().map_err(|_| Error::InvalidTime {
            id: id.clone(),
            value: token.to_string(),
        })?;
        by_id.insert(id.clone(), t);
    }
    let (space, merges) = DistanceSpace::deduplicated(ids, full)?;
    let labels = TimeLabels::from_ids(&space, &by_id, &merges, horizon)?;
    let notes = merge_notes(&merges, &space, &labels);
    Ok(InputBundle {
        source: SourceKind::Matrix,
        space,
        labels,
        merges,
        notes,
    })
}

fn merge_notes(merges: &[Merge], space: &DistanceSpace, labels: &TimeLabels) -> Vec<String> {
    merges
        .iter()
        .map(|m| {
            let label = space.index_of(&m.kept).map(|i| labels.label(i)).unwrap_or_default();
            let mut note = format!(
                "merged {} into `{}` at distance 0 (time {label})",
                m.absorbed.iter().map(|a| format!("`{a}`")).collect::<Vec<_>>().join(", "),
                m.kept
            );
            if m.inconsistent_rows {
                note.push_str("; merged points disagree on other distances, kept the rows of the kept point");
            }
            note
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

/// A report that can be written as JSON or as a per-step TSV summary.
pub trait Emit {
    fn json(&self) -> String;
    fn tsv(&self) -> String;
}

pub fn emit_report<R: Emit + ?Sized>(report: &R, format: Format) -> String {
    match format {
        Format::Json => report.json(),
        Format::Tsv => report.tsv(),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct DeathJson {
    death_value: Option<u64>,
    death_kind: &'static str,
}

fn death_json(death: Death) -> DeathJson {
    match death {
        Death::Finite(v) => DeathJson {
            death_value: Some(v),
            death_kind: "finite",
        },
        Death::OpenAtCap => DeathJson {
            death_value: None,
            death_kind: "open_at_cap",
        },
        Death::Infinite => DeathJson {
            death_value: None,
            death_kind: "infinite",
        },
    }
}

fn representative_json<'a>(ids: &'a [String], terms: &[EdgeTerm]) -> Vec<(&'a str, &'a str, u32)> {
    terms
        .iter()
        .map(|&(u, v, c)| (ids[u].as_str(), ids[v].as_str(), c))
        .collect()
}

#[derive(Serialize)]
struct BarJson<'a> {
    birth_step: usize,
    death_step: Option<usize>,
    birth_value: u64,
    #[serde(flatten)]
    death: DeathJson,
    representative: Vec<(&'a str, &'a str, u32)>,
}

#[derive(Serialize)]
struct ScaleBarJson<'a> {
    birth_value: u64,
    #[serde(flatten)]
    death: DeathJson,
    representative: Vec<(&'a str, &'a str, u32)>,
}

#[derive(Serialize)]
struct StepJson<'a> {
    step: usize,
    points: usize,
    cap: u64,
    bars: Vec<ScaleBarJson<'a>>,
}

#[derive(Serialize)]
struct SnvReportJson<'a> {
    mode: Mode,
    per_step_counts: &'a [usize],
    horizon: usize,
    prime: u32,
    offset_base: Option<u64>,
    cap: Option<u64>,
    intervals: &'a [StepInterval],
    bars: Vec<BarJson<'a>>,
    steps: Vec<StepJson<'a>>,
    points: &'a [String],
    notes: &'a [String],
}

impl Emit for SnvReport {
    fn json(&self) -> String {
        let ids = &self.point_ids;
        let view = SnvReportJson {
            mode: self.mode,
            per_step_counts: &self.per_step_counts,
            horizon: self.horizon,
            prime: self.prime,
            offset_base: self.offset_base,
            cap: self.cap,
            intervals: &self.intervals,
            bars: self
                .bars
                .iter()
                .map(|b| BarJson {
                    birth_step: b.interval.birth_step,
                    death_step: b.interval.death_step,
                    birth_value: b.birth_value,
                    death: death_json(b.death_value),
                    representative: representative_json(ids, &b.representative),
                })
                .collect(),
            steps: self
                .steps
                .iter()
                .map(|s| StepJson {
                    step: s.step,
                    points: s.points,
                    cap: s.cap,
                    bars: s
                        .bars
                        .iter()
                        .map(|b| ScaleBarJson {
                            birth_value: b.birth_value,
                            death: death_json(b.death_value),
                            representative: representative_json(ids, &b.representative),
                        })
                        .collect(),
                })
                .collect(),
            points: ids,
            notes: &self.notes,
        };
        to_json(&view)
    }

    fn tsv(&self) -> String {
        self.per_step_counts
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i}\t{c}\n"))
            .collect()
    }
}

impl Emit for CorrespondenceReport {
    fn json(&self) -> String {
        to_json(self)
    }

    fn tsv(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}\t{}\t{}\n", s.step, s.classical, s.deformed))
            .collect()
    }
}

impl Emit for StabilityReport {
    fn json(&self) -> String {
        to_json(self)
    }

    fn tsv(&self) -> String {
        self.rows
            .iter()
            .map(|r| format!("{}\t{}\t{}\n", r.bar, r.birth_step, r.last_alive_step))
            .collect()
    }
}

impl Emit for BenchmarkReport {
    fn json(&self) -> String {
        to_json(self)
    }

    fn tsv(&self) -> String {
        format!(
            "classical_median_ms\t{:.3}\ndeformed_median_ms\t{:.3}\nratio\t{:.3}\ncorrespondence_clean\t{}\n",
            self.classical_median_ms, self.deformed_median_ms, self.ratio, self.correspondence_clean
        )
    }
}

/// Brute-force per-step SNV counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub prime: u32,
    pub per_step_counts: Vec<usize>,
}

impl Emit for OracleReport {
    fn json(&self) -> String {
        to_json(self)
    }

    fn tsv(&self) -> String {
        self.per_step_counts
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i}\t{c}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceMatrix;
    use crate::field::PrimeField;
    use crate::pipeline::{classical_snv, deformed_snv, verify_correspondence, ClassicalOptions, DeformedOptions};

    #[test]
    fn sequences_with_times() {
        let fasta = ">a\nACGT\n>b\nACGA\n>c desc\nAC\nTT\n";
        let meta = "id,time\na,0\nb,0\nc,1\n";
        let b = parse_sequences(fasta, meta, None).unwrap();
        assert_eq!(b.labels.horizon(), 1);
        assert_eq!(b.space.len(), 3);
        assert_eq!(b.space.distance(0, 2), 1);
        assert_eq!(b.space.distance(1, 2), 2);
    }

    #[test]
    fn tab_metadata_and_horizon_override() {
        let b = parse_sequences(">a\nA\n>b\nC\n", "time\tid\n3\ta\n5\tb\n", Some(9)).unwrap();
        assert_eq!(b.labels.as_slice(), [3, 5]);
        assert_eq!(b.labels.horizon(), 9);
    }

    #[test]
    fn missing_metadata_names_id() {
        let err = parse_sequences(">a\nA\n>b\nC\n", "id,time\na,0\n", None).unwrap_err();
        assert!(matches!(&err, Error::MissingMetadata(id) if id == "b"));
        assert!(err.to_string().contains('b'));
    }

    #[test]
    fn sequence_errors() {
        assert!(matches!(
            parse_sequences(">a\nA\n>a\nC\n", "id,time\na,0\n", None),
            Err(Error::DuplicateId(_))
        ));
        assert!(matches!(
            parse_sequences(">a\nAC\n>b\nC\n", "id,time\na,0\nb,0\n", None),
            Err(Error::RaggedSequence { .. })
        ));
        assert!(matches!(
            parse_sequences(">a\nA\n", "id,time\na,x\n", None),
            Err(Error::InvalidTime { .. })
        ));
        assert!(matches!(
            parse_sequences(">a\nA\n", "id,time\na,-1\n", None),
            Err(Error::InvalidTime { .. })
        ));
        assert!(matches!(parse_sequences(">a\nA\n", "name,time\na,1\n", None), Err(Error::Parse(_))));
        assert!(matches!(parse_sequences("ACGT\n", "id,time\n", None), Err(Error::Parse(_))));
    }

    #[test]
    fn identical_sequences_merge_to_earliest_time() {
        let b = parse_sequences(">x\nACGT\n>y\nACGT\n>z\nTTTT\n", "id,time\nx,2\ny,0\nz,1\n", None).unwrap();
        assert_eq!(b.space.ids(), ["x", "z"]);
        assert_eq!(b.labels.as_slice(), [0, 1]);
        assert_eq!(b.merges.len(), 1);
        assert!(b.notes[0].contains("`y`"));
    }

    #[test]
    fn lower_triangular_matrix() {
        let b = parse_matrix("1\n1 1\n", "0\n0\n0\n", None).unwrap();
        assert_eq!(b.space.len(), 3);
        assert!((0..3).all(|i| (0..3).all(|j| b.space.distance(i, j) == u64::from(i != j))));
        assert_eq!(b.labels.horizon(), 0);
    }

    #[test]
    fn matrix_zero_entry_merges() {
        let b = parse_matrix("0\n2 2\n", "1 0 0", None).unwrap();
        assert_eq!(b.space.ids(), ["0", "2"]);
        assert_eq!(b.labels.as_slice(), [0, 0]);
        assert_eq!(b.notes.len(), 1);
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(
            parse_matrix("1\n1 1\n", "0\n0\n0\n0\n", None),
            Err(Error::TimeCountMismatch { .. })
        ));
        assert!(matches!(
            parse_matrix("1\n1\n", "0 0 0", None),
            Err(Error::RaggedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_matrix("1\n-1 1\n", "0 0 0", None),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(parse_matrix("", "", None), Err(Error::Empty(_))));
    }

    #[test]
    fn json_shape() {
        let b = parse_matrix("1\n2 1\n1 2 1\n", "0 0 0 0", None).unwrap();
        let f = PrimeField::default();
        let c = classical_snv(&b.space, &b.labels, f, ClassicalOptions::default()).unwrap();
        let json = emit_report(&c, Format::Json);
        assert!(json.starts_with(r#"{"mode":"classical","per_step_counts":[1],"#));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["steps"][0]["bars"][0]["representative"].as_array().unwrap().len(), 4);
        assert_eq!(v["steps"][0]["bars"][0]["death_value"], 2);
        assert_eq!(emit_report(&c, Format::Tsv), "0\t1\n");

        let d = deformed_snv(&b.space, &b.labels, f, DeformedOptions::default()).unwrap();
        let check = verify_correspondence(&c, &d).unwrap();
        assert!(emit_report(&check, Format::Json).contains(r#""discrepancies":[]"#));
        let dv: serde_json::Value = serde_json::from_str(&emit_report(&d, Format::Json)).unwrap();
        assert_eq!(dv["bars"][0]["birth_step"], 0);
        assert_eq!(dv["bars"][0]["birth_value"], 1);
        assert_eq!(dv["bars"][0]["death_kind"], "open_at_cap");
        assert!(dv["bars"][0]["death_step"].is_null());
    }

    #[test]
    fn emission_is_deterministic() {
        let run = || {
            let b = parse_matrix("1\n2 1\n1 2 1\n1 1 1 1\n", "0 1 1 2 2", None).unwrap();
            let f = PrimeField::new(3).unwrap();
            emit_report(
                &deformed_snv(&b.space, &b.labels, f, DeformedOptions::default()).unwrap(),
                Format::Json,
            )
        };
        assert_eq!(run(), run());
    }
}
