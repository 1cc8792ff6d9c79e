//! Independent numerical routes used to cross-check the main code paths.

use std::f64::consts::LN_2;

use crate::scheme::{CMatrix, EquivalentChannel};

/// `log2 |P_N + P H_T H_T^H| - log2 |P_N|` from full Hermitian eigenvalue
/// decompositions; mathematically equal to
/// [`general_mutual_information`](crate::outage::general_mutual_information).
pub fn mutual_information_eigen(ec: &EquivalentChannel, power: f64) -> f64 {
    let signal = &ec.p_n + (&ec.h_t * ec.h_t.adjoint()).scale(power);
    (log_det_hermitian(&signal) - log_det_hermitian(&ec.p_n)) / LN_2
}

fn log_det_hermitian(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigenvalues().iter().map(|v| v.ln()).sum()
}
