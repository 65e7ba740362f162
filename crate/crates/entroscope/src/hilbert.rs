//! Symmetry-sector bases with bit-coded states, full-space embedding, and
//! fermionic mode-reordering signs.
//!
//! Spin states are coded with bit `i` set when site `i` is up. Fermion
//! states are coded as `up_mask | dn_mask << N`; the amplitude of a code is
//! the coefficient of the creation-operator string applied in ascending
//! mode order, all up modes (site 0..N-1) before all dn modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BasisKind {
    SpinHalf,
    FermionSite4,
}

/// Symmetry sector selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// Fixed total Sz, stored as 2*Sz so it stays integral.
    SzTwice(i64),
    /// Fixed (N_up, N_dn) particle numbers.
    UpDn(usize, usize),
    /// No symmetry reduction (the full 2^N spin space).
    Full,
}

/// An enumerated, sorted sector basis.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub kind: BasisKind,
    pub num_sites: usize,
    pub sector: Sector,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, ordinal: usize) -> u64 {
        self.states[ordinal]
    }

    /// Ordinal of a bit code within the sector, if present.
    pub fn index(&self, code: u64) -> Option<usize> {
        self.states.binary_search(&code).ok()
    }

    /// Dimension of the full product space (2^N or 4^N).
    pub fn full_dim(&self) -> usize {
        match self.kind {
            BasisKind::SpinHalf => 1usize << self.num_sites,
            BasisKind::FermionSite4 => 1usize << (2 * self.num_sites),
        }
    }

    /// Split a fermion code into (up_mask, dn_mask).
    pub fn split_fermion_code(&self, code: u64) -> (u64, u64) {
        let mask = (1u64 << self.num_sites) - 1;
        (code & mask, code >> self.num_sites)
    }
}

/// Enumerate all bit masks over `n` bits with the given popcount, ascending.
fn masks_with_popcount(n: usize, k: usize) -> Vec<u64> {
    assert!(n < 64);
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let limit = 1u64 << n;
    let mut mask = (1u64 << k) - 1;
    while mask < limit {
        out.push(mask);
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

/// Enumerate a symmetry sector.
pub fn enumerate_sector(kind: BasisKind, num_sites: usize, sector: Sector) -> Result<SectorBasis> {
    let states = match (kind, sector) {
        (BasisKind::SpinHalf, Sector::SzTwice(sz2)) => {
            let n = num_sites as i64;
            let n_up2 = n + sz2;
            if n_up2 < 0 || n_up2 > 2 * n || n_up2 % 2 != 0 {
                return Err(Error::Basis(format!(
                    "Sz sector {sz2}/2 unreachable for {num_sites} sites"
                )));
            }
            masks_with_popcount(num_sites, (n_up2 / 2) as usize)
        }
        (BasisKind::SpinHalf, Sector::Full) => (0..1u64 << num_sites).collect(),
        (BasisKind::FermionSite4, Sector::UpDn(n_up, n_dn)) => {
            if n_up > num_sites || n_dn > num_sites {
                return Err(Error::Basis(format!(
                    "({n_up}, {n_dn}) electrons do not fit on {num_sites} sites"
                )));
            }
            let ups = masks_with_popcount(num_sites, n_up);
            let dns = masks_with_popcount(num_sites, n_dn);
            let mut states = Vec::with_capacity(ups.len() * dns.len());
            for &dn in &dns {
                for &up in &ups {
                    states.push(up | dn << num_sites);
                }
            }
            states
        }
        (kind, sector) => {
            return Err(Error::Basis(format!(
                "sector {sector:?} not valid for basis kind {kind:?}"
            )))
        }
    };
    if states.is_empty() {
        return Err(Error::Basis("empty sector".into()));
    }
    debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
    Ok(SectorBasis {
        kind,
        num_sites,
        sector,
        states,
    })
}

/// A normalized state vector over the full product basis.
#[derive(Debug, Clone)]
pub struct FullStateVector {
    pub kind: BasisKind,
    pub num_sites: usize,
    pub amplitudes: Vec<f64>,
}

/// Place sector amplitudes at their product-basis positions.
pub fn embed_full(amplitudes: &[f64], basis: &SectorBasis) -> Result<FullStateVector> {
    if amplitudes.len() != basis.dim() {
        return Err(Error::Basis(format!(
            "vector length {} does not match sector dimension {}",
            amplitudes.len(),
            basis.dim()
        )));
    }
    let norm: f64 = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Basis(format!(
            "input vector norm {norm} deviates from 1"
        )));
    }
    let mut full = vec![0.0f64; basis.full_dim()];
    for (ordinal, &code) in basis.states().iter().enumerate() {
        full[code as usize] = amplitudes[ordinal];
    }
    Ok(FullStateVector {
        kind: basis.kind,
        num_sites: basis.num_sites,
        amplitudes: full,
    })
}

/// Sign picked up by reordering a creation-operator string under a mode
/// permutation: (-1)^(inversions of the permutation restricted to occupied
/// modes). `perm[m]` is the new position of mode `m`.
pub fn fermion_reorder_sign(occupied: u64, perm: &[usize]) -> f64 {
    let mut new_positions: Vec<usize> = Vec::new();
    for (mode, &target) in perm.iter().enumerate() {
        if occupied >> mode & 1 == 1 {
            new_positions.push(target);
        }
    }
    let mut inversions = 0usize;
    for a in 0..new_positions.len() {
        for b in a + 1..new_positions.len() {
            if new_positions[a] > new_positions[b] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Project a spin state onto the even global spin-flip-parity sector
/// (even number of down spins) and renormalize. Returns the weight of the
/// projected component. Used by the Ising path, where the exact ground
/// state has even parity but the Lanczos vector may mix the two parity
/// sectors when their splitting falls below the solver resolution.
pub fn project_even_parity(amplitudes: &mut [f64], num_sites: usize) -> f64 {
    for (code, amp) in amplitudes.iter_mut().enumerate() {
        let downs = num_sites as u32 - (code as u64).count_ones();
        if downs % 2 == 1 {
            *amp = 0.0;
        }
    }
    let weight: f64 = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    if weight > 1e-12 {
        amplitudes.iter_mut().for_each(|a| *a /= weight);
    }
    weight
}

/// Move `occupied` bits through the permutation: bit `m` lands at `perm[m]`.
pub fn permute_mask(occupied: u64, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    for (mode, &target) in perm.iter().enumerate() {
        if occupied >> mode & 1 == 1 {
            out |= 1 << target;
        }
    }
    out
}
