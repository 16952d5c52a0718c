//! Cross-oracle verification harness: runs every exact route on random
//! models and reports the worst pairwise discrepancy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use ising_duality::{
    brute_force_dual_ln_zmod, brute_force_ln_z, build_chain_model, build_grid_model,
    build_modified_dual, closed_form_chain_ln_z, transfer_matrix_1d_ln_z,
    transfer_matrix_2d_ln_z, Boundary,
};

pub const REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Mismatch {
    pub description: String,
    pub rel_err: f64,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checks: usize,
    pub worst_rel_err: f64,
    pub worst_case: String,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    fn record(&mut self, description: &str, values: &[(&str, f64)]) {
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let (na, a) = values[i];
                let (nb, b) = values[j];
                let rel = relative_error(a, b);
                self.checks += 1;
                if rel > self.worst_rel_err {
                    self.worst_rel_err = rel;
                    self.worst_case = format!("{description}: {na} vs {nb}");
                }
                if rel > REL_TOLERANCE {
                    self.mismatches.push(Mismatch {
                        description: format!(
                            "{description}: {na} = {a:.15e} vs {nb} = {b:.15e}"
                        ),
                        rel_err: rel,
                    });
                }
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Runs the full cross-oracle matrix on random models: grids compare
/// brute-primal, recovered brute-dual, and the 2D transfer; chains compare
/// brute force, the 1D transfer, and the closed forms. The J = 0 corner is
/// always included.
pub fn run_verify(max_m: usize, max_n: usize, trials: usize, seed: u64) -> VerifyReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut report = VerifyReport::default();

    for m in 2..=max_m.min(4) {
        for t in 0..trials {
            let js: Vec<f64> = (0..2 * m * (m - 1)).map(|_| rng.gen_range(0.1..1.5)).collect();
            let model = build_grid_model(m, js).unwrap();
            let dual = build_modified_dual(&model).unwrap();
            let brute = brute_force_ln_z(&model).unwrap().ln_z;
            let recovered =
                dual.recover_log_z(brute_force_dual_ln_zmod(&dual).unwrap().ln_z);
            let transfer = transfer_matrix_2d_ln_z(&model).unwrap().ln_z;
            report.record(
                &format!("grid m={m} trial {t}"),
                &[
                    ("brute-primal", brute),
                    ("brute-dual", recovered),
                    ("transfer-2d", transfer),
                ],
            );
        }
    }

    for n in 2..=max_n.min(16) {
        for boundary in [Boundary::Free, Boundary::Periodic] {
            let n_edges = if boundary == Boundary::Periodic { n } else { n - 1 };
            for t in 0..trials.min(5) {
                let js: Vec<f64> = (0..n_edges).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let model = build_chain_model(n, boundary, js.clone()).unwrap();
                let brute = brute_force_ln_z(&model).unwrap().ln_z;
                let transfer = transfer_matrix_1d_ln_z(&model).unwrap().ln_z;
                let closed = closed_form_chain_ln_z(&js, boundary);
                report.record(
                    &format!("chain n={n} {boundary:?} trial {t}"),
                    &[
                        ("brute", brute),
                        ("transfer-1d", transfer),
                        ("closed-form", closed),
                    ],
                );
            }
        }
    }

    // J = 0 corner: every method must give exactly N ln 2
    let grid = build_grid_model(3, vec![0.0; 12]).unwrap();
    let dual = build_modified_dual(&grid).unwrap();
    let expected = 9.0 * std::f64::consts::LN_2;
    report.record(
        "grid m=3 J=0 corner",
        &[
            ("expected", expected),
            ("brute-primal", brute_force_ln_z(&grid).unwrap().ln_z),
            (
                "brute-dual",
                dual.recover_log_z(brute_force_dual_ln_zmod(&dual).unwrap().ln_z),
            ),
            ("transfer-2d", transfer_matrix_2d_ln_z(&grid).unwrap().ln_z),
        ],
    );
    let chain = build_chain_model(6, Boundary::Periodic, vec![0.0; 6]).unwrap();
    report.record(
        "chain n=6 J=0 corner",
        &[
            ("expected", 6.0 * std::f64::consts::LN_2),
            ("brute", brute_force_ln_z(&chain).unwrap().ln_z),
            ("transfer-1d", transfer_matrix_1d_ln_z(&chain).unwrap().ln_z),
            ("closed-form", closed_form_chain_ln_z(&[0.0; 6], Boundary::Periodic)),
        ],
    );

    report
}
