//! Free-fermion solver for the transverse-field Ising ring.
//!
//! The chain maps to free fermions with antiperiodic momenta in the
//! even-parity ground-state sector. The two-point kernel g(r) fixes the
//! Majorana covariance matrix; subsystem entropies follow from the
//! restricted covariance spectrum, which scales to chains far beyond exact
//! diagonalization (N up to a few thousand).

use crate::entanglement::{binary_entropy_bits, EntropyValue};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Ground-state data of the Ising ring at transverse field `lambda`:
/// antiperiodic momenta and the real correlation kernel g(r).
#[derive(Debug, Clone)]
pub struct IsingGaussianState {
    pub n: usize,
    pub lambda: f64,
    /// The N antiperiodic momenta +-(2m-1) pi / N, m = 1..N/2.
    pub momenta: Vec<f64>,
    /// g(r) for r = 0..N-1, periodic.
    pub g_values: Vec<f64>,
}

/// Quasiparticle energy epsilon_k = 2 sqrt(1 + lambda^2 - 2 lambda cos k).
fn dispersion(lambda: f64, k: f64) -> f64 {
    2.0 * (1.0 + lambda * lambda - 2.0 * lambda * k.cos()).sqrt()
}

/// Build the even-parity ground-state kernel.
pub fn build_kernel(n: usize, lambda: f64) -> Result<IsingGaussianState> {
    if !(4..=4096).contains(&n) || !n.is_multiple_of(2) {
        return Err(Error::Hamiltonian(format!(
            "Gaussian Ising solver supports even 4 <= N <= 4096, got {n}"
        )));
    }
    if lambda < 0.0 || lambda.is_nan() {
        return Err(Error::Hamiltonian(format!(
            "transverse field must be >= 0, got {lambda}"
        )));
    }
    let half = n / 2;
    let positive: Vec<f64> = (1..=half)
        .map(|m| (2 * m - 1) as f64 * std::f64::consts::PI / n as f64)
        .collect();
    let mut momenta = Vec::with_capacity(n);
    for &k in &positive {
        momenta.push(k);
        momenta.push(-k);
    }
    // g(r) = (2/N) sum_{k>0} [cos(k(r+1)) - lambda cos(kr)] / (eps_k / 2);
    // odd-in-k parts cancel over the +-k pairs, so the kernel is real.
    let mut g_values = Vec::with_capacity(n);
    for r in 0..n {
        let rf = r as f64;
        let mut acc = 0.0;
        for &k in &positive {
            let eps_half = 0.5 * dispersion(lambda, k);
            acc += ((k * (rf + 1.0)).cos() - lambda * (k * rf).cos()) / eps_half;
        }
        g_values.push(2.0 * acc / n as f64);
    }
    let state = IsingGaussianState {
        n,
        lambda,
        momenta,
        g_values,
    };
    for &g in &state.g_values {
        if g.abs() > 1.0 + 1e-10 {
            return Err(Error::Hamiltonian(format!("kernel value {g} outside [-1, 1]")));
        }
    }
    Ok(state)
}

impl IsingGaussianState {
    /// Quasiparticle energies over the positive antiperiodic momenta.
    pub fn single_particle_energies(&self) -> Vec<f64> {
        self.momenta
            .iter()
            .filter(|k| **k > 0.0)
            .map(|&k| dispersion(self.lambda, k))
            .collect()
    }

    /// Even-sector ground energy: E0 = -sum_{k>0} eps_k.
    pub fn ground_energy(&self) -> f64 {
        -self.single_particle_energies().iter().sum::<f64>()
    }

    /// Two-quasiparticle excitation gap within the even-parity sector.
    pub fn even_sector_gap(&self) -> f64 {
        let mut eps = self.single_particle_energies();
        eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eps[0] + eps[1]
    }

    /// The kernel extended to any integer separation. Antiperiodic
    /// momenta make g antiperiodic: g(r + N) = -g(r), so wrapped
    /// separations flip sign.
    pub fn kernel(&self, r: i64) -> f64 {
        let n = self.n as i64;
        let value = self.g_values[r.rem_euclid(n) as usize];
        if r.div_euclid(n) % 2 == 0 {
            value
        } else {
            -value
        }
    }
}

/// Majorana covariance restricted to the sublattice sites: antisymmetric
/// 2|R| x 2|R| with blocks [[0, g(i-j)], [-g(j-i), 0]].
#[derive(Debug, Clone)]
pub struct RestrictedCovariance {
    pub sites: Vec<usize>,
    pub mat: Mat,
}

pub fn restricted_covariance(state: &IsingGaussianState, sites: &[usize]) -> Result<RestrictedCovariance> {
    if sites.is_empty() || sites.len() >= state.n {
        return Err(Error::Entanglement(
            "subsystem must be a nonempty proper subset".into(),
        ));
    }
    let s = sites.len();
    // Block (a, b) is [[0, g(j-i)], [-g(i-j), 0]]; the slot assignment was
    // fixed by measuring <b_i a_j> on exact ground states.
    let mut mat = Mat::zeros(2 * s, 2 * s);
    for (a, &i) in sites.iter().enumerate() {
        for (b, &j) in sites.iter().enumerate() {
            let d = i as i64 - j as i64;
            mat.set(2 * a, 2 * b + 1, state.kernel(-d));
            mat.set(2 * a + 1, 2 * b, -state.kernel(d));
        }
    }
    Ok(RestrictedCovariance {
        sites: sites.to_vec(),
        mat,
    })
}

impl RestrictedCovariance {
    /// Majorana pair correlations nu_j >= 0 (each H2((1+nu)/2) is one
    /// fermionic mode's entropy). Computed from the spectrum of
    /// Gamma^T Gamma = -Gamma^2, whose eigenvalues are the nu^2, doubled.
    pub fn mode_correlations(&self) -> Result<Vec<f64>> {
        let k = linalg::at_a(&self.mat);
        let w = linalg::eigvalsh(&k)?;
        let s = self.sites.len();
        let mut nu: Vec<f64> = w
            .iter()
            .map(|&x| {
                if !(-1e-9..=1.0 + 1e-9).contains(&x) {
                    Err(Error::Entanglement(format!(
                        "covariance eigenvalue {x} outside [0, 1]"
                    )))
                } else {
                    Ok(x.clamp(0.0, 1.0).sqrt())
                }
            })
            .collect::<Result<_>>()?;
        nu.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // Each nu appears twice in the spectrum of -Gamma^2.
        Ok(nu.into_iter().step_by(2).take(s).collect())
    }
}

/// Entropy of the fermionic modes on the sublattice, in bits:
/// S = sum_j H2((1 + nu_j)/2).
pub fn subsystem_entropy(state: &IsingGaussianState, sites: &[usize]) -> Result<EntropyValue> {
    let cov = restricted_covariance(state, sites)?;
    let nu = cov.mode_correlations()?;
    let bits = nu.iter().map(|&v| binary_entropy_bits((1.0 + v) / 2.0)).sum();
    // Expand the product spectrum only when it stays small.
    let spectrum = if nu.len() <= 12 {
        let mut probs = vec![1.0f64];
        for &v in &nu {
            let p = (1.0 + v) / 2.0;
            let mut next = Vec::with_capacity(probs.len() * 2);
            for &q in &probs {
                next.push(q * p);
                next.push(q * (1.0 - p));
            }
            probs = next;
        }
        probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        probs
    } else {
        Vec::new()
    };
    Ok(EntropyValue { bits, spectrum })
}
