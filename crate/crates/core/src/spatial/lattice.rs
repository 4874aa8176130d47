use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::invalid;
use crate::Result;

/// Ridge put on zero diagonal entries of the region-level precision.
pub const REGION_RIDGE: f64 = 1e-6;

/// Intrinsic CAR structure of an undirected graph: W_ii = m_i, W_ij = −1 for
/// neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct CarGraph {
    pub neighbors: Vec<Vec<usize>>,
    pub w: DMatrix<f64>,
    pub components: usize,
    /// Rank of W, I − components.
    pub rank: usize,
}

impl CarGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn mean_neighbors(&self) -> f64 {
        let total: usize = self.neighbors.iter().map(Vec::len).sum();
        total as f64 / self.len() as f64
    }

    /// φᵀWφ = Σ_{i~j} (φ_i − φ_j)², each edge once.
    pub fn quad_form(&self, phi: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb.iter().filter(|&&j| j > i) {
                let d = phi[i] - phi[j];
                s += d * d;
            }
        }
        s
    }
}

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<CarGraph> {
    let mut neighbors = alloc::vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(invalid!("edge ({a}, {b}) refers to a unit outside 0..{n}"));
        }
        if a == b {
            return Err(invalid!("self-loop at unit {a}"));
        }
        // Edge lists often carry both directions; keep one.
        if !neighbors[a].contains(&b) {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    let mut w = DMatrix::zeros(n, n);
    for (i, nb) in neighbors.iter().enumerate() {
        w[(i, i)] = nb.len() as f64;
        for &j in nb {
            w[(i, j)] = -1.0;
        }
    }
    let components = count_components(&neighbors);
    Ok(CarGraph {
        neighbors,
        w,
        components,
        rank: n - components,
    })
}

fn count_components(neighbors: &[Vec<usize>]) -> usize {
    let mut seen = alloc::vec![false; neighbors.len()];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..neighbors.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for &j in &neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

/// CAR precision of the unit graph. An empty edge set is rejected because
/// the CAR prior would then carry no information at all.
pub fn build_car_precision(n: usize, edges: &[(usize, usize)]) -> Result<CarGraph> {
    if n == 0 {
        return Err(invalid!("graph has no units"));
    }
    if edges.is_empty() {
        return Err(invalid!("adjacency has no edges"));
    }
    graph_from_edges(n, edges)
}

/// Units, their CAR graph and their grouping into regions with a
/// region-level precision W*.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub units: CarGraph,
    /// Region index of each unit; empty when there are no regions.
    pub region: Vec<usize>,
    pub n_regions: usize,
    pub regions: CarGraph,
    /// W* with zero diagonal entries replaced by `REGION_RIDGE`.
    pub w_star: DMatrix<f64>,
}

impl Lattice {
    pub fn new(
        n_units: usize,
        edges: &[(usize, usize)],
        region: Vec<usize>,
        n_regions: usize,
        region_edges: &[(usize, usize)],
    ) -> Result<Self> {
        let units = build_car_precision(n_units, edges)?;
        if n_regions == 0 {
            if !region.is_empty() || !region_edges.is_empty() {
                return Err(invalid!("region data given with zero regions"));
            }
        } else if region.len() != n_units {
            return Err(invalid!(
                "{} region labels for {n_units} units",
                region.len()
            ));
        }
        if let Some(&r) = region.iter().find(|&&r| r >= n_regions) {
            return Err(invalid!("region label {r} outside 0..{n_regions}"));
        }
        let regions = graph_from_edges(n_regions, region_edges)?;
        let mut w_star = regions.w.clone();
        for l in 0..n_regions {
            if w_star[(l, l)] == 0.0 {
                w_star[(l, l)] = REGION_RIDGE;
            }
        }
        Ok(Self {
            units,
            region,
            n_regions,
            regions,
            w_star,
        })
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.n_regions];
        for &r in &self.region {
            sizes[r] += 1;
        }
        sizes
    }
}

/// Rook adjacency on a rows × cols grid, units numbered row-major.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }
    edges
}
