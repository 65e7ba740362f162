//! Reduced density matrices of a sublattice and their von Neumann entropy
//! in bits.
//!
//! The reduced matrix is assembled as rho = M M^T where M regroups the
//! state amplitudes with the sublattice sites first; the full outer
//! product |psi><psi| is never materialized. Fermionic kinds multiply each
//! amplitude by the mode-reordering sign before regrouping.

use crate::error::{Error, Result};
use crate::hilbert::{fermion_reorder_sign, BasisKind, FullStateVector, SectorBasis};
use crate::lattice::SublatticePartition;
use crate::linalg::{self, Mat};

/// Hermitian, positive semidefinite, unit-trace matrix over the sublattice.
#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    pub mat: Mat,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat.get(i, i)).sum()
    }
}

/// Entropy in bits together with the probability spectrum it came from,
/// sorted descending. Gaussian-state paths may omit the spectrum when the
/// subsystem is too large to expand the product distribution.
#[derive(Debug, Clone)]
pub struct EntropyValue {
    pub bits: f64,
    pub spectrum: Vec<f64>,
}

/// -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.
pub fn binary_entropy_bits(p: f64) -> f64 {
    let mut s = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            s -= q * q.log2();
        }
    }
    s
}

/// Site permutation moving `r_sites` to the front, as new positions
/// indexed by old site.
fn front_permutation(partition: &SublatticePartition, num_sites: usize) -> Vec<usize> {
    let mut perm = vec![usize::MAX; num_sites];
    for (new, &site) in partition
        .r_sites
        .iter()
        .chain(partition.b_sites.iter())
        .enumerate()
    {
        perm[site] = new;
    }
    perm
}

/// Gather the bits of `mask` at `sites` into a packed index.
#[inline]
fn gather_bits(mask: u64, sites: &[usize]) -> usize {
    let mut out = 0usize;
    for (k, &site) in sites.iter().enumerate() {
        out |= ((mask >> site & 1) as usize) << k;
    }
    out
}

fn check_partition(partition: &SublatticePartition, num_sites: usize) -> Result<()> {
    if partition.r_sites.len() + partition.b_sites.len() != num_sites {
        return Err(Error::Entanglement(format!(
            "partition covers {} sites but the state has {num_sites}",
            partition.r_sites.len() + partition.b_sites.len()
        )));
    }
    Ok(())
}

/// Partial trace over the complement sublattice B.
pub fn partial_trace(
    state: &FullStateVector,
    partition: &SublatticePartition,
    kind: BasisKind,
) -> Result<ReducedDensityMatrix> {
    check_partition(partition, state.num_sites)?;
    let n = state.num_sites;
    let r_len = partition.r_sites.len();
    let b_len = partition.b_sites.len();

    let m = match kind {
        BasisKind::SpinHalf => {
            if state.amplitudes.len() != 1 << n {
                return Err(Error::Entanglement(format!(
                    "state dimension {} is not 2^{n}",
                    state.amplitudes.len()
                )));
            }
            let mut m = Mat::zeros(1 << r_len, 1 << b_len);
            for (code, &amp) in state.amplitudes.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let r_idx = gather_bits(code as u64, &partition.r_sites);
                let b_idx = gather_bits(code as u64, &partition.b_sites);
                m.set(r_idx, b_idx, amp);
            }
            m
        }
        BasisKind::FermionSite4 => {
            if state.amplitudes.len() != 1 << (2 * n) {
                return Err(Error::Entanglement(format!(
                    "state dimension {} is not 4^{n}",
                    state.amplitudes.len()
                )));
            }
            let perm = front_permutation(partition, n);
            // Per-mask tables: the up and dn blocks permute identically, so
            // reordering signs and packed halves factorize.
            let table: Vec<(f64, usize, usize)> = (0..1u64 << n)
                .map(|mask| {
                    (
                        fermion_reorder_sign(mask, &perm),
                        gather_bits(mask, &partition.r_sites),
                        gather_bits(mask, &partition.b_sites),
                    )
                })
                .collect();
            let site_mask = (1u64 << n) - 1;
            let mut m = Mat::zeros(1 << (2 * r_len), 1 << (2 * b_len));
            for (code, &amp) in state.amplitudes.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let up = code as u64 & site_mask;
                let dn = code as u64 >> n;
                let (s_up, r_up, b_up) = table[up as usize];
                let (s_dn, r_dn, b_dn) = table[dn as usize];
                let r_idx = r_up | r_dn << r_len;
                let b_idx = b_up | b_dn << b_len;
                m.set(r_idx, b_idx, s_up * s_dn * amp);
            }
            m
        }
    };

    let rho = ReducedDensityMatrix { mat: linalg::a_at(&m) };
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::Entanglement(format!(
            "reduced density matrix trace {trace} deviates from 1"
        )));
    }
    Ok(rho)
}

/// Entropy of the spinless Jordan-Wigner fermion modes of sublattice R,
/// computed from a spin state over 2^N codes. Bit i encodes sigma^z = +1,
/// so mode i is occupied when bit i is clear.
pub fn jw_mode_entropy(
    state: &FullStateVector,
    partition: &SublatticePartition,
) -> Result<EntropyValue> {
    check_partition(partition, state.num_sites)?;
    let n = state.num_sites;
    if state.amplitudes.len() != 1 << n {
        return Err(Error::Entanglement(format!(
            "state dimension {} is not 2^{n}",
            state.amplitudes.len()
        )));
    }
    let r_len = partition.r_sites.len();
    let b_len = partition.b_sites.len();
    let perm = front_permutation(partition, n);
    let site_mask = (1u64 << n) - 1;
    let mut m = Mat::zeros(1 << r_len, 1 << b_len);
    for (code, &amp) in state.amplitudes.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let occupied = !(code as u64) & site_mask;
        let sign = fermion_reorder_sign(occupied, &perm);
        let r_idx = gather_bits(occupied, &partition.r_sites);
        let b_idx = gather_bits(occupied, &partition.b_sites);
        m.set(r_idx, b_idx, sign * amp);
    }
    let rho = ReducedDensityMatrix { mat: linalg::a_at(&m) };
    von_neumann_entropy(&rho)
}

/// S = -sum p log2 p over the eigenvalues of rho, clamped to [0, 1].
pub fn von_neumann_entropy(rho: &ReducedDensityMatrix) -> Result<EntropyValue> {
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::Entanglement(format!(
            "density matrix trace {trace} deviates from 1"
        )));
    }
    let eigenvalues = linalg::eigvalsh(&rho.mat)?;
    let mut spectrum = Vec::with_capacity(eigenvalues.len());
    for &p in &eigenvalues {
        if p < -1e-12 {
            return Err(Error::Entanglement(format!(
                "density matrix eigenvalue {p} below -1e-12"
            )));
        }
        spectrum.push(p.clamp(0.0, 1.0));
    }
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let bits = spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(EntropyValue { bits, spectrum })
}

/// Ground-state sublattice entropy: embed into the full product basis,
/// trace out B, diagonalize.
pub fn sublattice_entropy(
    ground: &crate::eigensolver::GroundState,
    basis: &SectorBasis,
    partition: &SublatticePartition,
) -> Result<EntropyValue> {
    let full = crate::hilbert::embed_full(&ground.vector, basis)?;
    let rho = partial_trace(&full, partition, basis.kind)?;
    von_neumann_entropy(&rho)
}
