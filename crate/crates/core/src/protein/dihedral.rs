use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{wrap_degrees, DihedralTriple};
use crate::tables::{DihedralDistribution, BINS, BIN_DEGREES};

fn in_bin(bin: usize, u: f64) -> f64 {
    let lo = -180.0 + BIN_DEGREES * bin as f64;
    // Keeps rounding from landing on the next bin edge.
    (lo + BIN_DEGREES * u).min(lo + BIN_DEGREES - 1e-9)
}

/// Draws `(φ, ψ)` uniformly inside a bin picked from the table and `ω` from
/// the wrapped normal.
pub fn sample_dihedral<R: Rng + ?Sized>(dist: &DihedralDistribution, rng: &mut R) -> DihedralTriple {
    let bin = dist.bin_for_uniform(rng.random());
    let phi = in_bin(bin / BINS, rng.random());
    let psi = in_bin(bin % BINS, rng.random());
    let omega = Normal::new(dist.omega_mean, dist.omega_sd).expect("validated sd").sample(rng);
    DihedralTriple::new(phi, psi, omega)
}

/// `-ln p̃(φ, ψ) - ln p̃(ω)`, with the (φ, ψ) density taken as bin mass over
/// bin area in square degrees and ω as a normal density in degrees. Empty
/// bins give `+inf`.
pub fn eval_h_theta(triple: &DihedralTriple, dist: &DihedralDistribution) -> f64 {
    let mass = dist.mass(crate::tables::angle_bin(triple.phi), crate::tables::angle_bin(triple.psi));
    if mass == 0.0 {
        return f64::INFINITY;
    }
    let z = wrap_degrees(triple.omega - dist.omega_mean) / dist.omega_sd;
    let log_omega = -0.5 * z * z - (dist.omega_sd * (2.0 * std::f64::consts::PI).sqrt()).ln();
    -(mass / (BIN_DEGREES * BIN_DEGREES)).ln() - log_omega
}
