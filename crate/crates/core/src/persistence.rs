//! Degree-1 persistent homology over F_p by column reduction `R = D V`.
//!
//! Representatives come straight out of the reduction. A bar killed by
//! triangle `t` is represented by the reduced column `R_t`; an essential
//! bar created by edge `e` is represented by `V_e`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Column, PrimeField};
use crate::rips::{boundary_matrix, boundary_of, BoundaryMatrix, FilteredComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Skip reducing edge columns already known to be paired with a triangle.
    pub clearing: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { clearing: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Reduced to zero; creates a class, possibly killed later.
    Positive { killed_by: Option<usize> },
    /// Nonzero after reduction; its pivot row is the class it kills.
    Negative { kills: usize },
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub reduced: Vec<Column>,
    pub pairing: Vec<Pairing>,
    /// `V` columns of the degree-1 columns that reduced to zero.
    pub cycle_basis: BTreeMap<usize, Column>,
}

pub fn reduce_with_basis(boundary: &BoundaryMatrix, field: PrimeField, options: ReductionOptions) -> Reduction {
    let n = boundary.len();
    let mut reduced = boundary.columns.clone();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut basis: Vec<Column> = vec![Vec::new(); n];
    let mut cycle_basis = BTreeMap::new();

    let order: Vec<usize> = if options.clearing {
        // Higher dimensions first so their pivots can clear lower columns.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&j| std::cmp::Reverse(boundary.dims[j]));
        order
    } else {
        (0..n).collect()
    };

    for j in order {
        let track = boundary.dims[j] == 1;
        if options.clearing && track {
            if let Some(t) = owner[j] {
                // Already known positive; R_t is a cycle whose newest edge is j.
                reduced[j].clear();
                cycle_basis.insert(j, reduced[t].clone());
                continue;
            }
        }
        let mut column = std::mem::take(&mut reduced[j]);
        let mut v: Column = if track { vec![(j, 1)] } else { Vec::new() };
        while let Some(&(low, coeff)) = column.last() {
            match owner[low] {
                Some(k) => {
                    let pivot = reduced[k].last().expect("owner column is nonzero").1;
                    let factor = field.elimination_factor(coeff, pivot);
                    field.axpy(&mut column, factor, &reduced[k]);
                    if track {
                        field.axpy(&mut v, factor, &basis[k]);
                    }
                }
                None => {
                    owner[low] = Some(j);
                    break;
                }
            }
        }
        if track && column.is_empty() {
            cycle_basis.insert(j, v.clone());
        }
        if track {
            basis[j] = v;
        }
        reduced[j] = column;
    }

    let pairing = (0..n)
        .map(|j| match reduced[j].last() {
            Some(&(low, _)) => Pairing::Negative { kills: low },
            None => Pairing::Positive { killed_by: owner[j] },
        })
        .collect();
    Reduction {
        reduced,
        pairing,
        cycle_basis,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Death {
    Finite(u64),
    /// Still alive at the filtration cap, which is below the diameter.
    OpenAtCap,
    Infinite,
}

impl Death {
    pub fn finite(self) -> Option<u64> {
        match self {
            Death::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_after(self, v: u64) -> bool {
        match self {
            Death::Finite(d) => d > v,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bar {
    pub birth: u64,
    pub death: Death,
    /// Position of the edge creating the class.
    pub creator: usize,
    /// Position of the triangle killing it.
    pub destroyer: Option<usize>,
    /// 1-cycle over edge positions.
    pub representative: Column,
}

#[derive(Debug, Clone)]
pub struct Barcode {
    pub bars: Vec<Bar>,
    pub cap: u64,
    pub prime: u32,
}

impl Barcode {
    /// Bars with `birth <= v < death`.
    pub fn alive_at(&self, v: u64) -> usize {
        self.bars.iter().filter(|b| b.birth <= v && b.death.is_after(v)).count()
    }
}

pub fn barcode_h1(complex: &FilteredComplex, field: PrimeField) -> Barcode {
    barcode_h1_with(complex, field, ReductionOptions::default())
}

pub fn barcode_h1_with(complex: &FilteredComplex, field: PrimeField, options: ReductionOptions) -> Barcode {
    let boundary = boundary_matrix(complex, field);
    let reduction = reduce_with_basis(&boundary, field, options);
    let simplices = complex.simplices();
    let open = if complex.is_complete() {
        Death::Infinite
    } else {
        Death::OpenAtCap
    };

    let mut bars = Vec::new();
    for (j, pairing) in reduction.pairing.iter().enumerate() {
        match *pairing {
            Pairing::Negative { kills } if boundary.dims[j] == 2 => {
                let (birth, death) = (simplices[kills].value(), simplices[j].value());
                if birth < death {
                    bars.push(Bar {
                        birth,
                        death: Death::Finite(death),
                        creator: kills,
                        destroyer: Some(j),
                        representative: reduction.reduced[j].clone(),
                    });
                }
            }
            Pairing::Positive { killed_by: None } if boundary.dims[j] == 1 => {
                bars.push(Bar {
                    birth: simplices[j].value(),
                    death: open,
                    creator: j,
                    destroyer: None,
                    representative: reduction.cycle_basis[&j].clone(),
                });
            }
            _ => {}
        }
    }
    bars.sort_by_key(|b| (b.birth, b.death, b.creator));
    Barcode {
        bars,
        cap: complex.cap(),
        prime: field.characteristic(),
    }
}

/// The span of triangle boundaries with value at most some `v`, kept in
/// echelon form keyed by pivot row.
#[derive(Debug, Clone)]
pub struct BoundarySpan {
    field: PrimeField,
    pivots: HashMap<usize, Column>,
}

impl BoundarySpan {
    pub fn at(complex: &FilteredComplex, v: u64, field: PrimeField) -> Self {
        let mut span = Self {
            field,
            pivots: HashMap::new(),
        };
        for pos in 0..complex.prefix_len(v) {
            if complex.simplices()[pos].dim() == 2 {
                span.insert(boundary_of(complex, pos, field));
            }
        }
        span
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, mut chain: Column) -> Column {
        while let Some(&(low, coeff)) = chain.last() {
            let Some(pivot) = self.pivots.get(&low) else { break };
            self.field.axpy(&mut chain, self.field.neg(coeff), pivot);
        }
        chain
    }

    /// Adds a chain; returns whether it was independent of the span.
    pub fn insert(&mut self, chain: Column) -> bool {
        let mut chain = self.reduce(chain);
        match chain.last() {
            Some(&(low, coeff)) => {
                let inv = self.field.inv(coeff);
                self.field.scale(&mut chain, inv);
                self.pivots.insert(low, chain);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, chain: &[(usize, u32)]) -> bool {
        self.reduce(chain.to_vec()).is_empty()
    }

    /// Dimension of the span of `chains` modulo this span.
    pub fn rank_modulo<'a, I>(&self, chains: I) -> usize
    where
        I: IntoIterator<Item = &'a Column>,
    {
        let mut extended = self.clone();
        chains.into_iter().filter(|c| extended.insert((*c).clone())).count()
    }
}

/// Whether a 1-chain is not a boundary in the complex at value `v`.
pub fn class_is_nonzero_at(
    representative: &[(usize, u32)],
    complex: &FilteredComplex,
    v: u64,
    field: PrimeField,
) -> Result<bool> {
    check_chain_present(representative, complex, v)?;
    if representative.is_empty() {
        return Ok(false);
    }
    Ok(!BoundarySpan::at(complex, v, field).contains(representative))
}

pub(crate) fn check_chain_present(chain: &[(usize, u32)], complex: &FilteredComplex, v: u64) -> Result<()> {
    for &(pos, _) in chain {
        let simplex = complex
            .simplices()
            .get(pos)
            .filter(|s| s.dim() == 1)
            .ok_or_else(|| Error::Invariant(format!("chain entry {pos} is not an edge")))?;
        if simplex.value() > v {
            let vs = simplex.vertices();
            return Err(Error::EdgeMissing(vs[0], vs[1]));
        }
    }
    Ok(())
}

/// Boundary of a 1-chain, as a 0-chain over vertex positions.
pub fn chain_boundary(chain: &[(usize, u32)], complex: &FilteredComplex, field: PrimeField) -> Column {
    let mut out = Vec::new();
    for &(pos, coeff) in chain {
        field.axpy(&mut out, coeff, &boundary_of(complex, pos, field));
    }
    out
}

/// A chain over edge positions rewritten as `(u, v, coefficient)` point triples, `u < v`.
pub fn chain_edges(chain: &[(usize, u32)], complex: &FilteredComplex) -> Vec<(usize, usize, u32)> {
    chain
        .iter()
        .map(|&(pos, c)| {
            let vs = complex.simplices()[pos].vertices();
            (vs[0], vs[1], c)
        })
        .collect()
}
