//! Vietoris-Rips filtrations up to dimension 2 over integer distances.

use std::collections::HashMap;

use crate::distance::DistanceMatrix;
use crate::field::{Column, PrimeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simplex {
    vertices: [usize; 3],
    dim: u8,
    value: u64,
}

impl Simplex {
    fn vertex(v: usize) -> Self {
        Self { vertices: [v, 0, 0], dim: 0, value: 0 }
    }

    fn edge(a: usize, b: usize, value: u64) -> Self {
        Self { vertices: [a, b, 0], dim: 1, value }
    }

    fn triangle(a: usize, b: usize, c: usize, value: u64) -> Self {
        Self { vertices: [a, b, c], dim: 2, value }
    }

    /// Sorted point indices.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices[..self.dim as usize + 1]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    fn sort_key(&self) -> (u64, u8, &[usize]) {
        (self.value, self.dim, self.vertices())
    }
}

/// Simplices of a Rips complex in filtration order: by value, then
/// dimension, then vertex tuple.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    cap: u64,
    points: usize,
    max_value: u64,
    vertex_pos: Vec<usize>,
    edge_pos: HashMap<(usize, usize), usize>,
}

impl FilteredComplex {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Number of points of the underlying space.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Whether the cap reaches the largest distance, so nothing was cut off.
    pub fn is_complete(&self) -> bool {
        self.cap >= self.max_value
    }

    pub fn edge_position(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_pos.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn vertex_position(&self, v: usize) -> usize {
        self.vertex_pos[v]
    }

    /// Number of leading simplices with value at most `v`.
    pub fn prefix_len(&self, v: u64) -> usize {
        self.simplices.partition_point(|s| s.value <= v)
    }
}

/// All simplices of dimension at most 2 with diameter at most `cap`.
pub fn build_rips<D: DistanceMatrix + ?Sized>(dist: &D, cap: u64) -> FilteredComplex {
    let n = dist.len();
    let mut simplices: Vec<Simplex> = (0..n).map(Simplex::vertex).collect();
    for a in 0..n {
        for b in a + 1..n {
            let ab = dist.distance(a, b);
            if ab > cap {
                continue;
            }
            simplices.push(Simplex::edge(a, b, ab));
            for c in b + 1..n {
                let value = ab.max(dist.distance(a, c)).max(dist.distance(b, c));
                if value <= cap {
                    simplices.push(Simplex::triangle(a, b, c, value));
                }
            }
        }
    }
    simplices.sort_unstable_by(|x, y| x.sort_key().cmp(&y.sort_key()));

    let mut vertex_pos = vec![0; n];
    let mut edge_pos = HashMap::new();
    for (pos, s) in simplices.iter().enumerate() {
        match s.dim {
            0 => vertex_pos[s.vertices[0]] = pos,
            1 => {
                edge_pos.insert((s.vertices[0], s.vertices[1]), pos);
            }
            _ => {}
        }
    }
    FilteredComplex {
        simplices,
        cap,
        points: n,
        max_value: dist.diameter(),
        vertex_pos,
        edge_pos,
    }
}

/// Boundary columns over F_p, one per simplex in filtration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub dims: Vec<usize>,
    pub columns: Vec<Column>,
}

impl BoundaryMatrix {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

pub fn boundary_matrix(complex: &FilteredComplex, field: PrimeField) -> BoundaryMatrix {
    BoundaryMatrix {
        dims: complex.simplices.iter().map(Simplex::dim).collect(),
        columns: (0..complex.len()).map(|pos| boundary_of(complex, pos, field)).collect(),
    }
}

/// Boundary column of the simplex at `pos`, rows sorted.
pub fn boundary_of(complex: &FilteredComplex, pos: usize, field: PrimeField) -> Column {
    let minus_one = field.neg(1);
    let mut col: Column = match complex.simplices[pos].vertices() {
        [_] => Vec::new(),
        &[a, b] => vec![(complex.vertex_pos[a], minus_one), (complex.vertex_pos[b], 1)],
        &[a, b, c] => vec![
            (complex.edge_pos[&(b, c)], 1),
            (complex.edge_pos[&(a, c)], minus_one),
            (complex.edge_pos[&(a, b)], 1),
        ],
        _ => unreachable!("dimension above 2"),
    };
    col.sort_unstable_by_key(|e| e.0);
    col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceSpace;

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

    fn count_dims(c: &FilteredComplex) -> [usize; 3] {
        let mut out = [0; 3];
        for s in c.simplices() {
            out[s.dim()] += 1;
        }
        out
    }

    #[test]
    fn unit_triangle() {
        let c = build_rips(&space(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]), 1);
        assert_eq!(count_dims(&c), [3, 3, 1]);
        assert_eq!(c.simplices().last().unwrap().value(), 1);
    }

    #[test]
    fn cap_excludes_long_edge() {
        let c = build_rips(&space(vec![vec![0, 3], vec![3, 0]]), 2);
        assert_eq!(count_dims(&c), [2, 0, 0]);
        assert!(!c.is_complete());
    }

    #[test]
    fn square_complex() {
        let c = build_rips(&square(), 2);
        assert_eq!(count_dims(&c), [4, 6, 4]);
        let edge_values: Vec<u64> = c.simplices().iter().filter(|s| s.dim() == 1).map(|s| s.value()).collect();
        assert_eq!(edge_values, [1, 1, 1, 1, 2, 2]);
        assert!(c.simplices().iter().filter(|s| s.dim() == 2).all(|s| s.value() == 2));
    }

    #[test]
    fn order_is_value_dim_lex() {
        let c = build_rips(&square(), 2);
        let verts: Vec<&[usize]> = c.simplices().iter().map(Simplex::vertices).collect();
        assert_eq!(
            verts,
            vec![
                &[0][..], &[1], &[2], &[3],
                &[0, 1], &[0, 3], &[1, 2], &[2, 3],
                &[0, 2], &[1, 3],
                &[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3],
            ]
        );
    }

    #[test]
    fn edge_column_signs() {
        let f = PrimeField::new(5).unwrap();
        let c = build_rips(&space(vec![vec![0, 1], vec![1, 0]]), 1);
        let b = boundary_matrix(&c, f);
        assert_eq!(b.columns[2], vec![(0, 4), (1, 1)]);
        assert!(b.columns[0].is_empty());
    }

    #[test]
    fn triangle_boundary_is_cycle() {
        let f = PrimeField::new(3).unwrap();
        let c = build_rips(&space(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]), 1);
        let b = boundary_matrix(&c, f);
        let tri = &b.columns[6];
        assert_eq!(tri.len(), 3);
        let mut acc = Vec::new();
        for &(row, coeff) in tri {
            f.axpy(&mut acc, coeff, &b.columns[row]);
        }
        assert!(acc.is_empty());
    }

    #[test]
    fn empty_complex() {
        let c = build_rips(&space(vec![]), 5);
        assert!(c.is_empty());
        assert!(boundary_matrix(&c, PrimeField::default()).is_empty());
    }
}
