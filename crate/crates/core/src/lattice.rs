//! Ising models on chains and square grids.
//!
//! Sites hold binary values in {0, 1}. The energy of a configuration x is
//!
//! ```text
//! E(x) = -Σ_e J_e ([x_a = x_b] - [x_a ≠ x_b])
//! ```
//!
//! summed over nearest-neighbor edges e = (a, b), with the inverse
//! temperature folded into the dimensionless couplings J_e. Weights are
//! handled in the log domain throughout: `log_weight` is a sum of ±J_e and
//! never exponentiates.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Chain boundary handling. Grids are always free-boundary; `Periodic` is
/// rejected by the grid constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// A line of `n` sites.
    Chain { n: usize },
    /// An `m` × `m` square lattice, free boundary.
    Grid { m: usize },
}

/// One binary state per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    bits: Vec<u8>,
}

impl Configuration {
    pub fn zeros(n: usize) -> Self {
        Configuration { bits: vec![0; n] }
    }

    /// Low-order `n` bits of `word`, site i at bit i.
    pub fn from_word(word: u64, n: usize) -> Self {
        assert!(n <= 64);
        Configuration {
            bits: (0..n).map(|i| ((word >> i) & 1) as u8).collect(),
        }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidChainSpec(
                "configuration bits must be 0 or 1".into(),
            ));
        }
        Ok(Configuration { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, b: u8) {
        debug_assert!(b <= 1);
        self.bits[i] = b;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Exchange the roles of 0 and 1 at every site.
    pub fn flipped(&self) -> Self {
        Configuration {
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }
}

/// Pairwise kernel e^{J([a=b]-[a≠b])}: e^J on agreement, e^{-J} otherwise.
pub fn kernel_value(j: f64, a: u8, b: u8) -> f64 {
    if a == b {
        j.exp()
    } else {
        (-j).exp()
    }
}

/// An immutable Ising model: topology, boundary, and one coupling per edge.
///
/// Edge ordering is canonical and every factor in the crate is keyed by it:
/// chains list edges (0,1), (1,2), …, with the wrap edge (n-1, 0) last when
/// periodic; grids list all horizontal edges row-major — row r contributes
/// (r,c)-(r,c+1) for c = 0..m-1 — followed by all vertical edges row-major
/// — (r,c)-(r+1,c). Site (r, c) has index r·m + c.
#[derive(Debug, Clone)]
pub struct IsingModel {
    topology: Topology,
    boundary: Boundary,
    edges: Vec<(usize, usize)>,
    couplings: Vec<f64>,
    /// Per site: (edge id, neighbor site) for each incident edge.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl IsingModel {
    /// Chain of `n` sites with edges (i, i+1) and (n-1, 0) when periodic.
    pub fn chain(n: usize, boundary: Boundary, couplings: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::ChainTooSmall(n));
        }
        let expected = match boundary {
            Boundary::Periodic => n,
            Boundary::Free => n - 1,
        };
        if couplings.len() != expected {
            return Err(Error::CouplingCount {
                expected,
                got: couplings.len(),
            });
        }
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if boundary == Boundary::Periodic {
            edges.push((n - 1, 0));
        }
        Ok(Self::assemble(Topology::Chain { n }, boundary, edges, couplings, n))
    }

    /// Free-boundary m×m grid with 2m(m-1) couplings in canonical edge order.
    pub fn grid(m: usize, couplings: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::GridTooSmall(m));
        }
        let expected = 2 * m * (m - 1);
        if couplings.len() != expected {
            return Err(Error::CouplingCount {
                expected,
                got: couplings.len(),
            });
        }
        let mut edges = Vec::with_capacity(expected);
        for r in 0..m {
            for c in 0..m - 1 {
                edges.push((r * m + c, r * m + c + 1));
            }
        }
        for r in 0..m - 1 {
            for c in 0..m {
                edges.push((r * m + c, (r + 1) * m + c));
            }
        }
        Ok(Self::assemble(
            Topology::Grid { m },
            Boundary::Free,
            edges,
            couplings,
            m * m,
        ))
    }

    fn assemble(
        topology: Topology,
        boundary: Boundary,
        edges: Vec<(usize, usize)>,
        couplings: Vec<f64>,
        n_sites: usize,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); n_sites];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push((e, b));
            adjacency[b].push((e, a));
        }
        IsingModel {
            topology,
            boundary,
            edges,
            couplings,
            adjacency,
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn site_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Side length when this is a grid model.
    pub fn grid_size(&self) -> Option<usize> {
        match self.topology {
            Topology::Grid { m } => Some(m),
            Topology::Chain { .. } => None,
        }
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.couplings.iter().all(|&j| j > 0.0)
    }

    /// Incident (edge id, neighbor) pairs of a site.
    pub fn incident(&self, site: usize) -> &[(usize, usize)] {
        &self.adjacency[site]
    }

    /// Same model with every coupling negated.
    pub fn with_negated_couplings(&self) -> Self {
        let mut model = self.clone();
        for j in &mut model.couplings {
            *j = -*j;
        }
        model
    }

    fn check_len(&self, x: &Configuration) -> Result<()> {
        if x.len() != self.site_count() {
            return Err(Error::ConfigurationLength {
                expected: self.site_count(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// E(x) = -Σ_e J_e ([x_a = x_b] - [x_a ≠ x_b]).
    pub fn energy(&self, x: &Configuration) -> Result<f64> {
        self.check_len(x)?;
        Ok(-self.log_weight_unchecked(x.bits()))
    }

    /// ln f(x) = -E(x), accumulated as a sum of ±J_e.
    pub fn log_weight(&self, x: &Configuration) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.log_weight_unchecked(x.bits()))
    }

    pub(crate) fn log_weight_unchecked(&self, bits: &[u8]) -> f64 {
        let mut lw = 0.0;
        for (&(a, b), &j) in self.edges.iter().zip(&self.couplings) {
            if bits[a] == bits[b] {
                lw += j;
            } else {
                lw -= j;
            }
        }
        lw
    }

    /// ln f for a configuration packed into the low `site_count()` bits.
    pub(crate) fn log_weight_of_word(&self, word: u64) -> f64 {
        let mut lw = 0.0;
        for (&(a, b), &j) in self.edges.iter().zip(&self.couplings) {
            if (word >> a ^ word >> b) & 1 == 0 {
                lw += j;
            } else {
                lw -= j;
            }
        }
        lw
    }
}

/// Builds the chain model of `build_chain_model`: `n` sites, edge (i, i+1),
/// plus the wrap edge under periodic boundaries.
pub fn build_chain_model(n: usize, boundary: Boundary, couplings: Vec<f64>) -> Result<IsingModel> {
    IsingModel::chain(n, boundary, couplings)
}

/// Builds a free-boundary m×m grid model.
pub fn build_grid_model(m: usize, couplings: Vec<f64>) -> Result<IsingModel> {
    IsingModel::grid(m, couplings)
}

/// 2m(m-1) i.i.d. draws from U[lo, hi), deterministic in `seed`.
pub fn sample_couplings_uniform(m: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    if m < 2 {
        return Err(Error::GridTooSmall(m));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = Uniform::new(lo, hi);
    Ok((0..2 * m * (m - 1)).map(|_| dist.sample(&mut rng)).collect())
}
