//! Regular lattices on the unit cube and subsets of their points.

use crate::error::{Error, Result};

/// The lattice `{0, h, 2h, ..., 1}^dim` with `points_per_axis` points per
/// axis and spacing `h = 1/(points_per_axis - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridDomain {
    dim: usize,
    points_per_axis: usize,
}

impl GridDomain {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("grid dimension must be >= 1".into()));
        }
        if points_per_axis < 3 {
            return Err(Error::InvalidInput(
                "grid needs at least 3 points per axis".into(),
            ));
        }
        let mut total: usize = 1;
        for _ in 0..dim {
            total = total
                .checked_mul(points_per_axis)
                .ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
        }
        Ok(Self {
            dim,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.points_per_axis - 1) as f64
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Row-major linear index of a multi-index (first axis slowest).
    pub fn linear_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        multi
            .iter()
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            multi[a] = linear % self.points_per_axis;
            linear /= self.points_per_axis;
        }
        multi
    }

    pub fn point(&self, linear: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(linear)
            .iter()
            .map(|&i| i as f64 * h)
            .collect()
    }

    /// True when every coordinate is strictly between the first and last
    /// lattice layers.
    pub fn is_interior(&self, linear: usize) -> bool {
        self.multi_index(linear)
            .iter()
            .all(|&i| i > 0 && i + 1 < self.points_per_axis)
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.num_points())
            .filter(|&i| self.is_interior(i))
            .collect()
    }

    /// Linear-index stride of a unit step along `axis`.
    pub fn axis_stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    /// Axis-adjacent neighbor pairs `(u, v)` with `v = u + e_axis`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for u in 0..self.num_points() {
            let multi = self.multi_index(u);
            for (a, &coord) in multi.iter().enumerate() {
                if coord + 1 < self.points_per_axis {
                    pairs.push((u, u + self.axis_stride(a)));
                }
            }
        }
        pairs
    }

    /// Euclidean distance from the lattice point to the cube boundary.
    pub fn boundary_distance(&self, linear: usize) -> f64 {
        self.point(linear)
            .iter()
            .map(|x| x.min(1.0 - x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A subset of the lattice points, stored as a mask.
#[derive(Debug, Clone)]
pub struct GridSubset {
    mask: Vec<bool>,
    count: usize,
}

impl GridSubset {
    pub fn full(domain: &GridDomain) -> Self {
        let n = domain.num_points();
        Self {
            mask: vec![true; n],
            count: n,
        }
    }

    pub fn empty(domain: &GridDomain) -> Self {
        Self {
            mask: vec![false; domain.num_points()],
            count: 0,
        }
    }

    pub fn from_indices(domain: &GridDomain, indices: &[usize]) -> Self {
        let mut s = Self::empty(domain);
        for &i in indices {
            if !s.mask[i] {
                s.mask[i] = true;
                s.count += 1;
            }
        }
        s
    }

    pub fn contains(&self, linear: usize) -> bool {
        self.mask[linear]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    /// Removes the grid slab `multi[axis] == layer`.
    pub fn minus_slab(&self, domain: &GridDomain, axis: usize, layer: usize) -> Self {
        let mut out = self.clone();
        for i in 0..out.mask.len() {
            if out.mask[i] && domain.multi_index(i)[axis] == layer {
                out.mask[i] = false;
                out.count -= 1;
            }
        }
        out
    }

    /// True when `self` is a subset of `other`.
    pub fn subset_of(&self, other: &GridSubset) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = GridDomain::new(3, 4).unwrap();
        for i in 0..g.num_points() {
            assert_eq!(g.linear_index(&g.multi_index(i)), i);
        }
    }

    #[test]
    fn spacing_and_points() {
        let g = GridDomain::new(2, 5).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.num_points(), 25);
        let p = g.point(g.linear_index(&[2, 3]));
        assert_eq!(p, vec![0.5, 0.75]);
    }

    #[test]
    fn interior_detection() {
        let g = GridDomain::new(2, 3).unwrap();
        let interior = g.interior_indices();
        assert_eq!(interior, vec![g.linear_index(&[1, 1])]);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(GridDomain::new(2, 2).is_err());
    }

    #[test]
    fn slab_removal_counts() {
        let g = GridDomain::new(2, 4).unwrap();
        let full = GridSubset::full(&g);
        let cut = full.minus_slab(&g, 0, 1);
        assert_eq!(cut.count(), 16 - 4);
        assert!(cut.subset_of(&full));
    }
}
