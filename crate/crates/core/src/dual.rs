//! The modified dual factor graph of a free-boundary grid model.
//!
//! The 2-point DFT of the pairwise kernel is diagonal, with entries
//! 4 cosh J and 4 sinh J. Collapsing those diagonals leaves one binary
//! variable per lattice edge carrying a unary factor, plus a parity (XOR)
//! constraint at every site over its incident edges. Assignments satisfying
//! all parity constraints are exactly the cycle space of the grid, which the
//! unit plaquettes span: fixing the (m-1)² face bits determines every edge
//! bit, so samplers and exhaustive sums run over face words only.
//!
//! The constrained dual sum Z_mod relates to the primal partition function
//! by `ln Z = ln Z_mod + N ln 2 - |E| ln 4`, validated against brute-force
//! enumeration in the test suite before anything downstream trusts it.

use crate::error::{Error, Result};
use crate::lattice::{Boundary, IsingModel};
use crate::numeric::log_sum_exp;

/// Diagonal of the 2×2 DFT of a pairwise kernel with coupling J.
///
/// The even entry 4 cosh J is always positive; the odd entry 4 sinh J is
/// kept as (ln |4 sinh J|, sign) so antiferromagnetic couplings stay
/// representable. J = 0 gives a -inf odd entry (exact zero).
#[derive(Debug, Clone, Copy)]
pub struct DualFactor {
    log_even: f64,
    log_odd_abs: f64,
    odd_negative: bool,
}

impl DualFactor {
    const DIAGONALITY_TOL: f64 = 1e-12;

    /// Transform a coupling. Asserts that the off-diagonal DFT entries
    /// vanish to machine precision before discarding them.
    pub fn from_coupling(j: f64) -> Self {
        // full 2×2 transform ν(ã,b̃) = Σ_{a,b} κ(a,b) (-1)^{a·ã + b·b̃},
        // evaluated in the linear domain while e^{|J|} is representable
        if j.abs() < 700.0 {
            let scale = Self::DIAGONALITY_TOL * j.abs().exp();
            assert!(
                dft_entry(j, 0, 1).abs() <= scale && dft_entry(j, 1, 0).abs() <= scale,
                "dual kernel transform is not diagonal"
            );
        }

        // ln(4 cosh j) = ln 2 + |j| + ln(1 + e^{-2|j|}), stable for large |j|
        let a = j.abs();
        let log_even = std::f64::consts::LN_2 + a + (-2.0 * a).exp().ln_1p();
        let log_odd_abs = if j == 0.0 {
            f64::NEG_INFINITY
        } else {
            std::f64::consts::LN_2 + a + (-(-2.0 * a).exp()).ln_1p()
        };
        DualFactor {
            log_even,
            log_odd_abs,
            odd_negative: j < 0.0,
        }
    }

    /// ln(4 cosh J).
    pub fn log_even(&self) -> f64 {
        self.log_even
    }

    /// ln(4 sinh J) for J > 0; -inf at J = 0. Must not be read for J < 0.
    pub fn log_odd(&self) -> f64 {
        debug_assert!(!self.odd_negative);
        self.log_odd_abs
    }

    /// (ln |4 sinh J|, 4 sinh J < 0).
    pub fn log_odd_signed(&self) -> (f64, bool) {
        (self.log_odd_abs, self.odd_negative)
    }

    pub fn is_signed(&self) -> bool {
        self.odd_negative
    }
}

/// One entry of the 2-point DFT of the pairwise kernel.
fn dft_entry(j: f64, fa: u8, fb: u8) -> f64 {
    let mut sum = 0.0;
    for a in 0..2u8 {
        for b in 0..2u8 {
            let parity = (a & fa) ^ (b & fb);
            let term = crate::lattice::kernel_value(j, a, b);
            sum += if parity == 1 { -term } else { term };
        }
    }
    sum
}

/// The 2-point DFT of `kernel_value(J, ·, ·)`, reduced to its diagonal.
pub fn dft_pair_kernel(j: f64) -> DualFactor {
    DualFactor::from_coupling(j)
}

/// Free bits on the (m-1)² plaquettes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceAssignment {
    bits: Vec<u8>,
}

impl FaceAssignment {
    pub fn zeros(d: usize) -> Self {
        FaceAssignment { bits: vec![0; d] }
    }

    /// Low-order `d` bits of `word`, face i at bit i.
    pub fn from_word(word: u64, d: usize) -> Self {
        assert!(d <= 64);
        FaceAssignment {
            bits: (0..d).map(|i| ((word >> i) & 1) as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, f: usize) -> u8 {
        self.bits[f]
    }

    pub fn set(&mut self, f: usize, b: u8) {
        debug_assert!(b <= 1);
        self.bits[f] = b;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// One bit per lattice edge; valid instances lie in the cycle space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualConfiguration {
    bits: Vec<u8>,
}

impl DualConfiguration {
    pub fn zeros(n_edges: usize) -> Self {
        DualConfiguration {
            bits: vec![0; n_edges],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, e: usize) -> u8 {
        self.bits[e]
    }

    pub fn toggle(&mut self, e: usize) {
        self.bits[e] ^= 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// Modified dual of a free-boundary grid: unary edge factors, per-site
/// parity constraints, and the plaquette cycle basis.
#[derive(Debug, Clone)]
pub struct ModifiedDualModel {
    m: usize,
    edge_factors: Vec<DualFactor>,
    faces: Vec<[usize; 4]>,
    /// Incident edge ids per site (the scope of each XOR constraint).
    site_constraints: Vec<Vec<usize>>,
    /// Faces containing each edge: boundary edges have one, interior two.
    edge_faces: Vec<(u32, Option<u32>)>,
    ferromagnetic: bool,
}

impl ModifiedDualModel {
    /// Builds the modified dual of a free-boundary grid model.
    pub fn from_model(model: &IsingModel) -> Result<Self> {
        let m = model.grid_size().ok_or(Error::NotAGrid)?;
        if model.boundary() != Boundary::Free {
            return Err(Error::NotAGrid);
        }
        let edge_factors: Vec<DualFactor> = model
            .couplings()
            .iter()
            .map(|&j| DualFactor::from_coupling(j))
            .collect();

        let faces = face_cycle_basis(m)?;

        let mut site_constraints = vec![Vec::new(); model.site_count()];
        for (e, &(a, b)) in model.edges().iter().enumerate() {
            site_constraints[a].push(e);
            site_constraints[b].push(e);
        }

        let mut edge_faces: Vec<(Option<u32>, Option<u32>)> =
            vec![(None, None); model.edge_count()];
        for (f, face) in faces.iter().enumerate() {
            for &e in face {
                match &mut edge_faces[e] {
                    (slot @ None, _) => *slot = Some(f as u32),
                    (_, slot @ None) => *slot = Some(f as u32),
                    _ => unreachable!("edge {e} is claimed by more than two faces"),
                }
            }
        }
        let edge_faces = edge_faces
            .into_iter()
            .map(|(first, second)| (first.expect("every grid edge lies on a face"), second))
            .collect();

        Ok(ModifiedDualModel {
            m,
            edge_factors,
            faces,
            site_constraints,
            edge_faces,
            ferromagnetic: model.is_ferromagnetic(),
        })
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_factors.len()
    }

    pub fn site_count(&self) -> usize {
        self.site_constraints.len()
    }

    /// Dimension of the cycle space, (m-1)² = |E| - N + 1.
    pub fn free_dimension(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[usize; 4]] {
        &self.faces
    }

    pub fn edge_factor(&self, e: usize) -> &DualFactor {
        &self.edge_factors[e]
    }

    pub fn edge_factors(&self) -> &[DualFactor] {
        &self.edge_factors
    }

    pub fn site_constraints(&self) -> &[Vec<usize>] {
        &self.site_constraints
    }

    /// True when every underlying coupling is strictly positive, i.e. all
    /// dual factors are nonnegative and samplers may run on this model.
    pub fn is_ferromagnetic(&self) -> bool {
        self.ferromagnetic
    }

    fn check_face_len(&self, a: &FaceAssignment) -> Result<()> {
        if a.len() != self.faces.len() {
            return Err(Error::FaceCount {
                expected: self.faces.len(),
                got: a.len(),
            });
        }
        Ok(())
    }

    fn check_edge_len(&self, w: &DualConfiguration) -> Result<()> {
        if w.len() != self.edge_count() {
            return Err(Error::EdgeCount {
                expected: self.edge_count(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Edge bits induced by a face assignment: each edge is the XOR of the
    /// bits of the one or two faces containing it.
    pub fn expand_faces(&self, a: &FaceAssignment) -> Result<DualConfiguration> {
        self.check_face_len(a)?;
        let bits = self
            .edge_faces
            .iter()
            .map(|&(f0, f1)| {
                let mut b = a.get(f0 as usize);
                if let Some(f1) = f1 {
                    b ^= a.get(f1 as usize);
                }
                b
            })
            .collect();
        Ok(DualConfiguration { bits })
    }

    /// Verifies every site parity constraint.
    pub fn check_constraints(&self, w: &DualConfiguration) -> Result<()> {
        self.check_edge_len(w)?;
        for (site, incident) in self.site_constraints.iter().enumerate() {
            let parity = incident.iter().fold(0u8, |p, &e| p ^ w.get(e));
            if parity != 0 {
                return Err(Error::ParityViolation { site });
            }
        }
        Ok(())
    }

    /// Σ_e [ω_e = 0]·ln(4 cosh J_e) + [ω_e = 1]·ln(4 sinh J_e).
    ///
    /// Requires a ferromagnetic model (use [`signed_log_weight`] otherwise);
    /// -inf is possible only through a J = 0 edge. Constraint membership is
    /// asserted in debug builds and assumed in release hot loops.
    ///
    /// [`signed_log_weight`]: Self::signed_log_weight
    pub fn log_weight(&self, w: &DualConfiguration) -> Result<f64> {
        self.check_edge_len(w)?;
        debug_assert!(self.check_constraints(w).is_ok());
        let mut lw = 0.0;
        for (factor, &bit) in self.edge_factors.iter().zip(w.bits()) {
            if bit == 0 {
                lw += factor.log_even();
            } else {
                debug_assert!(!factor.is_signed());
                lw += factor.log_odd_abs;
            }
        }
        Ok(lw)
    }

    /// (ln |w|, w < 0) of the dual weight; supports signed factors.
    pub fn signed_log_weight(&self, w: &DualConfiguration) -> Result<(f64, bool)> {
        self.check_edge_len(w)?;
        debug_assert!(self.check_constraints(w).is_ok());
        let mut lw = 0.0;
        let mut negative = false;
        for (factor, &bit) in self.edge_factors.iter().zip(w.bits()) {
            if bit == 0 {
                lw += factor.log_even();
            } else {
                let (l, n) = factor.log_odd_signed();
                lw += l;
                negative ^= n;
            }
        }
        Ok((lw, negative))
    }

    /// Maps the log of the constrained dual sum back to the primal:
    /// ln Z = ln Z_mod + N ln 2 - |E| ln 4.
    pub fn recover_log_z(&self, log_z_mod: f64) -> f64 {
        recover_log_z_for_grid(log_z_mod, self.m)
    }
}

/// Duality normalization for the m×m free grid, as a standalone map:
/// ln Z = ln Z_mod + m² ln 2 - 2m(m-1) ln 4 = ln Z_mod - (3m² - 4m) ln 2.
pub fn recover_log_z_for_grid(log_z_mod: f64, m: usize) -> f64 {
    let shift = (3 * m * m) as f64 - (4 * m) as f64;
    log_z_mod - shift * std::f64::consts::LN_2
}

/// The (m-1)² unit plaquettes in row-major order; face (r, c) holds its
/// top, bottom, left, and right edge ids in the canonical edge numbering.
pub fn face_cycle_basis(m: usize) -> Result<Vec<[usize; 4]>> {
    if m < 2 {
        return Err(Error::GridTooSmall(m));
    }
    let horizontal = |r: usize, c: usize| r * (m - 1) + c;
    let vertical = |r: usize, c: usize| m * (m - 1) + r * m + c;
    let mut faces = Vec::with_capacity((m - 1) * (m - 1));
    for r in 0..m - 1 {
        for c in 0..m - 1 {
            faces.push([
                horizontal(r, c),
                horizontal(r + 1, c),
                vertical(r, c),
                vertical(r, c + 1),
            ]);
        }
    }
    Ok(faces)
}

/// Convenience wrapper matching the construction order used throughout:
/// build the modified dual directly from a grid model.
pub fn build_modified_dual(model: &IsingModel) -> Result<ModifiedDualModel> {
    ModifiedDualModel::from_model(model)
}

/// Exact ln Z of a chain from the closed forms obtained by dualizing the
/// 1D factor graph: periodic chains give
/// Z = 2^N (Π cosh J_ℓ + Π sinh J_ℓ), free chains Z = 2 Π (2 cosh J_ℓ).
/// Both are evaluated in the log domain; the periodic product over sinh is
/// accumulated with its sign so mixed-sign couplings stay exact.
pub fn closed_form_chain_ln_z(couplings: &[f64], boundary: Boundary) -> f64 {
    // ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2, and similarly for |sinh|
    let ln_cosh = |x: f64| x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    let ln_abs_sinh = |x: f64| x.abs() + (-(-2.0 * x.abs()).exp()).ln_1p() - std::f64::consts::LN_2;

    match boundary {
        Boundary::Free => {
            // couplings are the n-1 bond strengths of an n-site chain
            let sum: f64 = couplings
                .iter()
                .map(|&j| std::f64::consts::LN_2 + ln_cosh(j))
                .sum();
            std::f64::consts::LN_2 + sum
        }
        Boundary::Periodic => {
            let n = couplings.len();
            let lc: f64 = couplings.iter().map(|&j| ln_cosh(j)).sum();
            let (ls, negative) = if couplings.contains(&0.0) {
                (f64::NEG_INFINITY, false)
            } else {
                let ls: f64 = couplings.iter().map(|&j| ln_abs_sinh(j)).sum();
                let neg = couplings.iter().filter(|&&j| j < 0.0).count() % 2 == 1;
                (ls, neg)
            };
            // |Π sinh| < Π cosh strictly, so the sum stays positive
            let ln_bracket = if negative {
                crate::numeric::log_diff_exp(lc, ls)
            } else {
                log_sum_exp(lc, ls)
            };
            n as f64 * std::f64::consts::LN_2 + ln_bracket
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_grid_model;
    use approx::assert_relative_eq;

    #[test]
    fn dft_of_flat_kernel() {
        let f = dft_pair_kernel(0.0);
        assert_relative_eq!(f.log_even().exp(), 4.0, epsilon = 1e-14);
        assert_eq!(f.log_odd(), f64::NEG_INFINITY);
        assert!(!f.is_signed());
    }

    #[test]
    fn dft_values_match_high_precision_reference() {
        // frozen: 4 cosh(0.75), 4 sinh(0.75) at 40-digit precision
        let f = dft_pair_kernel(0.75);
        assert_relative_eq!(f.log_even(), 5.178733138707379f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(f.log_odd(), 3.28926692774332f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn dft_diagonality_sweep() {
        // the explicit 2×2 transform is diagonal and its diagonal matches
        // the stored factor, across a coupling sweep including negatives
        for k in -40..=40 {
            let j = k as f64 * 0.1;
            assert!(dft_entry(j, 0, 1).abs() <= 1e-12 * j.abs().exp());
            assert!(dft_entry(j, 1, 0).abs() <= 1e-12 * j.abs().exp());
            let f = dft_pair_kernel(j);
            assert_relative_eq!(dft_entry(j, 0, 0), f.log_even().exp(), epsilon = 1e-12);
            let (l, neg) = f.log_odd_signed();
            let odd = if neg { -l.exp() } else { l.exp() };
            assert_relative_eq!(dft_entry(j, 1, 1), odd, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn signed_factor_for_negative_coupling() {
        let f = dft_pair_kernel(-0.5);
        let (l, neg) = f.log_odd_signed();
        assert!(neg);
        assert_relative_eq!(l.exp(), 4.0 * 0.5f64.sinh(), epsilon = 1e-14);
        assert!(f.log_even() > l);
    }

    #[test]
    fn even_dominates_odd_for_positive_coupling() {
        for k in 1..=30 {
            let f = dft_pair_kernel(k as f64 * 0.1);
            assert!(f.log_even() > f.log_odd());
        }
    }

    #[test]
    fn dual_shape_counts() {
        for (m, n_edges, n_faces) in [(2usize, 4usize, 1usize), (3, 12, 4), (5, 40, 16)] {
            let model = build_grid_model(m, vec![1.0; n_edges]).unwrap();
            let dual = build_modified_dual(&model).unwrap();
            assert_eq!(dual.edge_count(), n_edges);
            assert_eq!(dual.site_count(), m * m);
            assert_eq!(dual.free_dimension(), n_faces);
            assert_eq!(dual.free_dimension(), n_edges - m * m + 1);

            // each edge has two endpoints, so the symmetric difference of
            // all per-site constraint scopes is empty
            let mut parity = vec![0u8; n_edges];
            for scope in dual.site_constraints() {
                for &e in scope {
                    parity[e] ^= 1;
                }
            }
            assert!(parity.iter().all(|&p| p == 0));
        }
    }

    #[test]
    fn dual_requires_grid() {
        let chain =
            crate::lattice::build_chain_model(4, Boundary::Free, vec![1.0; 3]).unwrap();
        assert!(matches!(build_modified_dual(&chain), Err(Error::NotAGrid)));
    }

    #[test]
    fn faces_are_unit_squares_with_correct_multiplicity() {
        for m in 2..=6 {
            let model = build_grid_model(m, vec![1.0; 2 * m * (m - 1)]).unwrap();
            let faces = face_cycle_basis(m).unwrap();
            assert_eq!(faces.len(), (m - 1) * (m - 1));

            // every face's edges bound a closed unit square: each of its 4
            // corner sites touches exactly 2 of the face's edges
            for face in &faces {
                let mut site_degree = std::collections::HashMap::new();
                for &e in face {
                    let (a, b) = model.edges()[e];
                    *site_degree.entry(a).or_insert(0) += 1;
                    *site_degree.entry(b).or_insert(0) += 1;
                }
                assert_eq!(site_degree.len(), 4);
                assert!(site_degree.values().all(|&d| d == 2));
            }

            // interior edges belong to exactly 2 faces, boundary edges to 1
            let mut edge_mult = vec![0usize; 2 * m * (m - 1)];
            for face in &faces {
                for &e in face {
                    edge_mult[e] += 1;
                }
            }
            assert!(edge_mult.iter().all(|&c| c == 1 || c == 2));
            let boundary_edges = edge_mult.iter().filter(|&&c| c == 1).count();
            assert_eq!(boundary_edges, 4 * (m - 1));
        }
        assert!(face_cycle_basis(1).is_err());
    }

    #[test]
    fn xor_of_all_faces_is_the_perimeter() {
        // frozen: symmetric difference of the 4 plaquettes of the 3×3 grid
        let faces = face_cycle_basis(3).unwrap();
        let mut acc = [0u8; 12];
        for face in &faces {
            for &e in face {
                acc[e] ^= 1;
            }
        }
        let set: Vec<usize> = (0..12).filter(|&e| acc[e] == 1).collect();
        assert_eq!(set, vec![0, 1, 4, 5, 6, 8, 9, 11]);
        assert_eq!(set.len(), 8);
    }

    #[test]
    fn face_incidence_matrix_has_full_rank_over_gf2() {
        // Gaussian elimination on face rows as edge bitmasks
        for m in 2..=5 {
            let faces = face_cycle_basis(m).unwrap();
            let mut rows: Vec<u64> = faces
                .iter()
                .map(|face| face.iter().fold(0u64, |acc, &e| acc | 1 << e))
                .collect();
            let mut rank = 0;
            for bit in 0..(2 * m * (m - 1)) {
                if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
                    rows.swap(rank, pivot);
                    for r in 0..rows.len() {
                        if r != rank && rows[r] >> bit & 1 == 1 {
                            rows[r] ^= rows[rank];
                        }
                    }
                    rank += 1;
                }
            }
            assert_eq!(rank, (m - 1) * (m - 1));
        }
    }

    #[test]
    fn expand_faces_small_cases() {
        let model = build_grid_model(3, vec![1.0; 12]).unwrap();
        let dual = build_modified_dual(&model).unwrap();

        let all_zero = dual.expand_faces(&FaceAssignment::zeros(4)).unwrap();
        assert!(all_zero.bits().iter().all(|&b| b == 0));

        // a single face sets exactly its own 4 edges
        let single = dual.expand_faces(&FaceAssignment::from_word(1, 4)).unwrap();
        let set: Vec<usize> = (0..12).filter(|&e| single.get(e) == 1).collect();
        let mut expected = dual.faces()[0].to_vec();
        expected.sort_unstable();
        assert_eq!(set, expected);

        // two horizontally adjacent faces: shared edge cancels, 6 remain
        let pair = dual.expand_faces(&FaceAssignment::from_word(0b11, 4)).unwrap();
        let count = pair.bits().iter().filter(|&&b| b == 1).count();
        assert_eq!(count, 6);

        dual.check_constraints(&pair).unwrap();

        let wrong_len = FaceAssignment::zeros(3);
        assert!(matches!(
            dual.expand_faces(&wrong_len),
            Err(Error::FaceCount { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn dual_log_weight_reference_values() {
        // frozen: 4·ln(4 cosh 1) and 4·ln(4 sinh 1) at 40-digit precision
        let model = build_grid_model(2, vec![1.0; 4]).unwrap();
        let dual = build_modified_dual(&model).unwrap();

        let empty = dual.expand_faces(&FaceAssignment::zeros(1)).unwrap();
        assert_relative_eq!(
            dual.log_weight(&empty).unwrap(),
            7.2803007664116715,
            epsilon = 1e-12
        );

        let face = dual.expand_faces(&FaceAssignment::from_word(1, 1)).unwrap();
        assert_relative_eq!(
            dual.log_weight(&face).unwrap(),
            6.190934890764345,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_coupling_edge_kills_odd_assignments() {
        let mut js = vec![1.0; 4];
        js[2] = 0.0;
        let model = build_grid_model(2, js).unwrap();
        let dual = build_modified_dual(&model).unwrap();
        let face = dual.expand_faces(&FaceAssignment::from_word(1, 1)).unwrap();
        assert_eq!(dual.log_weight(&face).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn constraint_checker_rejects_non_cycles() {
        let model = build_grid_model(2, vec![1.0; 4]).unwrap();
        let dual = build_modified_dual(&model).unwrap();
        let mut w = DualConfiguration::zeros(4);
        w.toggle(0);
        assert!(matches!(
            dual.check_constraints(&w),
            Err(Error::ParityViolation { .. })
        ));
    }

    #[test]
    fn recover_log_z_on_known_duals() {
        // m=2, J=1: Z_mod = (4 cosh 1)^4 + (4 sinh 1)^4, Z = Z_mod / 2^4
        let z_mod = 1939.7269015050551f64;
        let model = build_grid_model(2, vec![1.0; 4]).unwrap();
        let dual = build_modified_dual(&model).unwrap();
        let ln_z = dual.recover_log_z(z_mod.ln());
        assert_relative_eq!(ln_z, (z_mod / 16.0).ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_z, 4.79771374748815, epsilon = 1e-12);
    }

    #[test]
    fn duality_identity_m3_unit_coupling() {
        // both routes enumerated: 2^9 primal configurations vs 2^4 face
        // words; frozen 40-digit primal reference ln Z = 12.8094202451311
        let model = build_grid_model(3, vec![1.0; 12]).unwrap();
        let dual = build_modified_dual(&model).unwrap();
        let primal = crate::exact::brute_force_ln_z(&model).unwrap().ln_z;
        let z_mod = crate::exact::brute_force_dual_ln_zmod(&dual).unwrap().ln_z;
        let recovered = dual.recover_log_z(z_mod);
        assert_relative_eq!(primal, 12.809420245131097, epsilon = 1e-13);
        assert_relative_eq!(z_mod, 23.206627953530276, epsilon = 1e-13);
        assert!((primal - recovered).abs() / primal.abs() < 1e-12);
    }

    #[test]
    fn recover_log_z_at_zero_coupling() {
        // only ω = 0 survives: Z_mod = 4^{2m(m-1)}, Z = 2^{m²}
        for m in 2..=5 {
            let n_edges = 2 * m * (m - 1);
            let ln_z_mod = n_edges as f64 * 4.0f64.ln();
            let ln_z = recover_log_z_for_grid(ln_z_mod, m);
            assert_relative_eq!(
                ln_z,
                (m * m) as f64 * std::f64::consts::LN_2,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn closed_forms_match_frozen_brute_force() {
        // frozen: exhaustive sums over 8 states at 40-digit precision
        let periodic = closed_form_chain_ln_z(&[1.0; 3], Boundary::Periodic);
        assert_relative_eq!(periodic, 3.746637630265879, epsilon = 1e-12);

        let free = closed_form_chain_ln_z(&[1.0; 2], Boundary::Free);
        assert_relative_eq!(free, 2.9470032026458903, epsilon = 1e-12);

        // J = 0 free chain: ln 2^n
        for n in 2..=8 {
            let lnz = closed_form_chain_ln_z(&vec![0.0; n - 1], Boundary::Free);
            assert_relative_eq!(lnz, n as f64 * std::f64::consts::LN_2, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_periodic_handles_mixed_signs() {
        // sign of Π sinh flips with the number of negative couplings; the
        // bracket stays positive because |sinh| < cosh edgewise
        let lnz = closed_form_chain_ln_z(&[0.8, -1.1, 0.3, -0.4], Boundary::Periodic);
        let direct: f64 = {
            let c: f64 = [0.8f64, -1.1, 0.3, -0.4].iter().map(|j| j.cosh()).product();
            let s: f64 = [0.8f64, -1.1, 0.3, -0.4].iter().map(|j| j.sinh()).product();
            (16.0 * (c + s)).ln()
        };
        assert_relative_eq!(lnz, direct, epsilon = 1e-12);
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // cycle-space soundness: expanded words satisfy every parity
            // constraint, for m = 2..5 and arbitrary face words
            #[test]
            fn expansion_lands_in_cycle_space(m in 2usize..=5, word in any::<u64>()) {
                let model = build_grid_model(m, vec![1.0; 2 * m * (m - 1)]).unwrap();
                let dual = build_modified_dual(&model).unwrap();
                let d = dual.free_dimension();
                let a = FaceAssignment::from_word(word & ((1 << d) - 1), d);
                let w = dual.expand_faces(&a).unwrap();
                prop_assert!(dual.check_constraints(&w).is_ok());
            }
        }
    }

    #[test]
    fn expansion_is_injective_and_spans_the_cycle_space() {
        // all 2^{(m-1)²} face words produce distinct cycles, matching the
        // cycle-space size 2^{|E| - N + 1}
        for m in 2..=4 {
            let model = build_grid_model(m, vec![1.0; 2 * m * (m - 1)]).unwrap();
            let dual = build_modified_dual(&model).unwrap();
            let d = dual.free_dimension();
            let mut seen = std::collections::HashSet::new();
            for word in 0u64..(1 << d) {
                let w = dual.expand_faces(&FaceAssignment::from_word(word, d)).unwrap();
                dual.check_constraints(&w).unwrap();
                seen.insert(w);
            }
            assert_eq!(seen.len(), 1 << (dual.edge_count() - m * m + 1));
        }
    }
}
