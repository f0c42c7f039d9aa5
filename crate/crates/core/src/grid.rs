//! Uniform-grid discretization of a tower's Dirichlet Laplacian.
//!
//! Interior nodes are the lattice points `(i h, j h)` strictly inside the
//! open set; the operator is the 5-point stencil with `2d/h^2` on the
//! diagonal and `-1/h^2` per neighboring node. Dirichlet conditions are
//! realized by node exclusion, which is exactly consistent here because
//! every boundary segment lies on a grid line.

use crate::dyadic::Dyadic;
use crate::error::TowerError;
use crate::geometry::{Region, TowerSpec};
use crate::sparse::SparseSymmetricOperator;
use alloc::vec;
use alloc::vec::Vec;

/// Discretized domain: the truncated spec, how many windows are open, the
/// spacing, and the sorted interior node list.
#[derive(Clone, Debug)]
pub struct GridDomain {
    spec: TowerSpec,
    open_windows: usize,
    h: Dyadic,
    /// Interior lattice nodes (ix, iy), sorted lexicographically.
    nodes: Vec<(i32, i32)>,
    /// Lattice bounding box: 0..=bbox.0 by -bbox.1..=bbox.1.
    bbox: (i32, i32),
}

impl GridDomain {
    /// Discretize the first `n_cubes` squares of `spec` with the first
    /// `open_windows` windows open, at spacing `h`, and assemble the
    /// Dirichlet Laplacian.
    pub fn assemble(
        spec: &TowerSpec,
        n_cubes: usize,
        open_windows: usize,
        h: Dyadic,
    ) -> Result<(GridDomain, SparseSymmetricOperator), TowerError> {
        if spec.dim() != 2 {
            return Err(TowerError::InvalidParameter("only d = 2 is supported"));
        }
        if !h.is_positive() {
            return Err(TowerError::InvalidParameter("spacing must be positive"));
        }
        let spec = spec.truncate(n_cubes)?;
        if open_windows > spec.count() - 1 {
            return Err(TowerError::InvalidParameter("more open windows than faces"));
        }
        for w in 0..open_windows {
            if spec.window(w) < h {
                return Err(TowerError::WindowUnresolved { index: w, required_h: spec.window(w) });
            }
        }
        for bp in spec.breakpoints() {
            if !bp.is_multiple_of(&h) {
                return Err(TowerError::Alignment { breakpoint: bp, h });
            }
        }

        let ix_max = (spec.center(spec.count() - 1) + spec.halfwidth(spec.count() - 1))
            .div_exact(&h)
            .expect("aligned extent");
        let iy_max = spec
            .halfwidths()
            .iter()
            .map(|a| a.div_exact(&h).expect("aligned half-width"))
            .max()
            .unwrap();
        let mut nodes = Vec::new();
        for ix in 1..ix_max {
            for iy in -(iy_max - 1)..=(iy_max - 1) {
                let p = (h * Dyadic::from_int(ix), h * Dyadic::from_int(iy));
                if spec.contains(open_windows, p) {
                    nodes.push((ix as i32, iy as i32));
                }
            }
        }
        debug_assert!(!nodes.is_empty());

        let domain = GridDomain {
            spec,
            open_windows,
            h,
            nodes,
            bbox: (ix_max as i32, iy_max as i32),
        };
        let op = domain.build_operator();
        Ok((domain, op))
    }

    fn build_operator(&self) -> SparseSymmetricOperator {
        let n = self.nodes.len();
        let inv_h2 = {
            let hf = self.h.to_f64();
            1.0 / (hf * hf)
        };
        let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
        for (i, &(ix, iy)) in self.nodes.iter().enumerate() {
            let mut row = Vec::with_capacity(5);
            // lexicographic neighbor order keeps columns sorted
            for (jx, jy) in [(ix - 1, iy), (ix, iy - 1), (ix, iy), (ix, iy + 1), (ix + 1, iy)] {
                if (jx, jy) == (ix, iy) {
                    row.push((i as u32, 4.0 * inv_h2));
                } else if let Some(j) = self.index_of(jx, jy) {
                    row.push((j as u32, -inv_h2));
                }
            }
            rows.push(row);
        }
        SparseSymmetricOperator::from_rows(n, rows)
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }

    pub fn open_windows(&self) -> usize {
        self.open_windows
    }

    pub fn spacing(&self) -> Dyadic {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[(i32, i32)] {
        &self.nodes
    }

    pub fn bbox(&self) -> (i32, i32) {
        self.bbox
    }

    /// Physical coordinates of node `i`.
    pub fn coords(&self, i: usize) -> (f64, f64) {
        let (ix, iy) = self.nodes[i];
        let hf = self.h.to_f64();
        (ix as f64 * hf, iy as f64 * hf)
    }

    pub fn index_of(&self, ix: i32, iy: i32) -> Option<usize> {
        self.nodes.binary_search(&(ix, iy)).ok()
    }

    /// Grid-weighted L2 norm (weight h^d per node).
    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.h.to_f64() * libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
    }

    /// Grid-weighted L2 inner product.
    pub fn l2_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let h = self.h.to_f64();
        h * h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Mapping from `small` node indices to `large` node indices; errors
    /// unless every node of `small` is a node of `large` at the same
    /// spacing.
    pub fn embed_map(small: &GridDomain, large: &GridDomain) -> Result<Vec<usize>, TowerError> {
        if small.h != large.h {
            return Err(TowerError::NotNested);
        }
        let mut map = Vec::with_capacity(small.len());
        for &(ix, iy) in &small.nodes {
            match large.index_of(ix, iy) {
                Some(j) => map.push(j),
                None => return Err(TowerError::NotNested),
            }
        }
        Ok(map)
    }

    /// Zero-extension of a vector on `small` to `large`; exact L2 isometry.
    pub fn embed(small: &GridDomain, large: &GridDomain, v: &[f64]) -> Result<Vec<f64>, TowerError> {
        debug_assert_eq!(v.len(), small.len());
        let map = Self::embed_map(small, large)?;
        let mut out = vec![0.0; large.len()];
        for (i, &j) in map.iter().enumerate() {
            out[j] = v[i];
        }
        Ok(out)
    }

    /// Restriction of a vector on `large` to the nodes of `small`; the
    /// adjoint of `embed`.
    pub fn restrict(large: &GridDomain, small: &GridDomain, v: &[f64]) -> Result<Vec<f64>, TowerError> {
        debug_assert_eq!(v.len(), large.len());
        let map = Self::embed_map(small, large)?;
        Ok(map.iter().map(|&j| v[j]).collect())
    }

    /// Grid-weighted L2 norm of `v` over the nodes inside `r`.
    pub fn region_mass(&self, v: &[f64], r: Region) -> f64 {
        debug_assert_eq!(v.len(), self.len());
        let mut sum = 0.0;
        for (i, &(ix, iy)) in self.nodes.iter().enumerate() {
            let p = (self.h * Dyadic::from_int(ix as i64), self.h * Dyadic::from_int(iy as i64));
            if r.contains(&self.spec, p) {
                sum += v[i] * v[i];
            }
        }
        self.h.to_f64() * libm::sqrt(sum)
    }

    /// Connected components of the node adjacency graph.
    pub fn components(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(i) = stack.pop() {
                let (ix, iy) = self.nodes[i];
                for (jx, jy) in [(ix - 1, iy), (ix + 1, iy), (ix, iy - 1), (ix, iy + 1)] {
                    if let Some(j) = self.index_of(jx, jy) {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count
    }

    /// Bilinear prolongation of a vector on `coarse` (spacing 2h) to this
    /// grid (spacing h). Lattice points that are not nodes count as zero,
    /// which is the Dirichlet extension.
    pub fn prolong(&self, coarse: &GridDomain, v: &[f64]) -> Result<Vec<f64>, TowerError> {
        if coarse.h != self.h.double() {
            return Err(TowerError::NotNested);
        }
        debug_assert_eq!(v.len(), coarse.len());
        let at = |cx: i32, cy: i32| -> f64 {
            coarse.index_of(cx, cy).map_or(0.0, |i| v[i])
        };
        let mut out = vec![0.0; self.len()];
        for (i, &(ix, iy)) in self.nodes.iter().enumerate() {
            let (cx, rx) = (ix.div_euclid(2), ix.rem_euclid(2));
            let (cy, ry) = (iy.div_euclid(2), iy.rem_euclid(2));
            out[i] = match (rx, ry) {
                (0, 0) => at(cx, cy),
                (1, 0) => 0.5 * (at(cx, cy) + at(cx + 1, cy)),
                (0, 1) => 0.5 * (at(cx, cy) + at(cx, cy + 1)),
                _ => 0.25 * (at(cx, cy) + at(cx + 1, cy) + at(cx, cy + 1) + at(cx + 1, cy + 1)),
            };
        }
        Ok(out)
    }
}
