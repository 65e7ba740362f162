//! Sparse symmetric Hamiltonians for the five model families, assembled in
//! a sector basis.
//!
//! All matrices here are real symmetric. Builders return a compressed
//! sparse row form; an `apply` contract lets the eigensolver run
//! matrix-free where materializing is wasteful (large Ising chains).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BasisKind, SectorBasis};
use crate::lattice::{Bond, BondLabel, Lattice, ModelFamily};
use crate::linalg::Mat;

/// Coupling constants for one model family. The conventions follow the
/// model definitions: exchange couplings multiply S_i . S_j bond terms,
/// the Ising chain uses Pauli operators, and the Hubbard chain uses
/// t = hopping, U = on-site, V = nearest-neighbor density-density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Couplings {
    IsingChain { lambda: f64 },
    Dimer2d { j_dimer: f64, lambda: f64 },
    J1j2_2d { j1: f64, j2: f64 },
    Checkerboard2d { j: f64, j_cross: f64 },
    HubbardChain { t: f64, u: f64, v: f64 },
}

impl Couplings {
    pub fn family(&self) -> ModelFamily {
        match self {
            Couplings::IsingChain { .. } => ModelFamily::IsingChain,
            Couplings::Dimer2d { .. } => ModelFamily::Dimer2d,
            Couplings::J1j2_2d { .. } => ModelFamily::J1j2_2d,
            Couplings::Checkerboard2d { .. } => ModelFamily::Checkerboard2d,
            Couplings::HubbardChain { .. } => ModelFamily::HubbardChain,
        }
    }

    /// Exchange/hopping value bound to a bond label.
    pub fn bond_value(&self, label: BondLabel) -> Result<f64> {
        let value = match (self, label) {
            (Couplings::IsingChain { .. }, BondLabel::Nn) => 1.0,
            (Couplings::Dimer2d { j_dimer, .. }, BondLabel::Dimer) => *j_dimer,
            (Couplings::Dimer2d { lambda, .. }, BondLabel::Interdimer) => *lambda,
            (Couplings::J1j2_2d { j1, .. }, BondLabel::J1) => *j1,
            (Couplings::J1j2_2d { j2, .. }, BondLabel::J2) => *j2,
            (Couplings::Checkerboard2d { j, .. }, BondLabel::J) => *j,
            (Couplings::Checkerboard2d { j_cross, .. }, BondLabel::Jcross) => *j_cross,
            (Couplings::HubbardChain { t, .. }, BondLabel::Hop) => *t,
            _ => {
                return Err(Error::Hamiltonian(format!(
                    "bond label {label:?} has no bound coupling in {:?}",
                    self.family()
                )))
            }
        };
        Ok(value)
    }

    fn values(&self) -> Vec<f64> {
        match *self {
            Couplings::IsingChain { lambda } => vec![lambda],
            Couplings::Dimer2d { j_dimer, lambda } => vec![j_dimer, lambda],
            Couplings::J1j2_2d { j1, j2 } => vec![j1, j2],
            Couplings::Checkerboard2d { j, j_cross } => vec![j, j_cross],
            Couplings::HubbardChain { t, u, v } => vec![t, u, v],
        }
    }
}

/// A model family bound to a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub couplings: Couplings,
    pub lattice: Lattice,
}

impl ModelSpec {
    pub fn new(couplings: Couplings, lattice: Lattice) -> Result<Self> {
        let spec = ModelSpec { couplings, lattice };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.couplings.family() != self.lattice.family {
            return Err(Error::Hamiltonian(format!(
                "couplings are for {:?} but lattice is {:?}",
                self.couplings.family(),
                self.lattice.family
            )));
        }
        if self.couplings.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Hamiltonian("non-finite coupling value".into()));
        }
        self.lattice.validate()
    }
}

/// Operators the eigensolver can consume: symmetric, fixed dimension,
/// reentrant `apply`.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;
    /// y = H x
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Real symmetric matrix in compressed sparse row storage.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Assemble from a per-row entry generator. Entries with the same
    /// column are merged; merged values below 1e-15 are dropped.
    fn from_rows(dim: usize, mut row_entries: impl FnMut(usize, &mut Vec<(usize, f64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        row_ptr.push(0);
        for row in 0..dim {
            scratch.clear();
            row_entries(row, &mut scratch);
            scratch.sort_unstable_by_key(|&(col, _)| col);
            let mut k = 0;
            while k < scratch.len() {
                let col = scratch[k].0;
                let mut acc = 0.0;
                while k < scratch.len() && scratch[k].0 == col {
                    acc += scratch[k].1;
                    k += 1;
                }
                if acc.abs() >= 1e-15 {
                    col_idx.push(col as u32);
                    values.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry A[i][j] (zero when not stored).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&(j as u32)) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Max |A[i][j] - A[j][i]| over `probes` random index pairs.
    pub fn probe_asymmetry(&self, probes: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let i = rng.gen_range(0..self.dim);
            let j = rng.gen_range(0..self.dim);
            worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
        }
        worst
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m.set(row, self.col_idx[k] as usize, self.values[k]);
            }
        }
        m
    }
}

impl SymOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (row, slot) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *slot = acc;
        }
    }
}

/// Heisenberg-type Hamiltonian: H = sum_bonds J_label (Sz Sz + (S+S- + S-S+)/2)
/// with spin-1/2 operators.
pub fn build_spin_hamiltonian(spec: &ModelSpec, basis: &SectorBasis) -> Result<SparseSymMatrix> {
    if basis.kind != BasisKind::SpinHalf {
        return Err(Error::Hamiltonian(
            "spin Hamiltonian requires a SPIN_HALF basis".into(),
        ));
    }
    if basis.num_sites != spec.lattice.num_sites {
        return Err(Error::Hamiltonian(format!(
            "basis covers {} sites but lattice has {}",
            basis.num_sites, spec.lattice.num_sites
        )));
    }
    spec.validate()?;
    let bonds: Vec<(usize, usize, f64)> = spec
        .lattice
        .bonds
        .iter()
        .map(|b| Ok((b.i, b.j, spec.couplings.bond_value(b.label)?)))
        .collect::<Result<_>>()?;

    Ok(SparseSymMatrix::from_rows(basis.dim(), |row, out| {
        let code = basis.state(row);
        let mut diag = 0.0;
        for &(i, j, coupling) in &bonds {
            let bi = code >> i & 1;
            let bj = code >> j & 1;
            if bi == bj {
                diag += coupling * 0.25;
            } else {
                diag -= coupling * 0.25;
                let flipped = code ^ (1 << i) ^ (1 << j);
                if let Some(col) = basis.index(flipped) {
                    out.push((col, coupling * 0.5));
                }
            }
        }
        out.push((row, diag));
    }))
}

/// Transverse-field Ising ring on Pauli operators:
/// H = -sum_i (sigma^x_i sigma^x_{i+1} + lambda sigma^z_i), periodic.
///
/// `n = 2` produces a doubled bond, -2 sigma^x_0 sigma^x_1, because the
/// ring bonds (0,1) and (1,0) coincide; presets therefore start at n = 4.
pub fn ising_ring_matrix(lambda: f64, n: usize) -> Result<SparseSymMatrix> {
    if !(2..=20).contains(&n) {
        return Err(Error::Hamiltonian(format!(
            "Ising ED path supports 2 <= N <= 20, got {n}"
        )));
    }
    let dim = 1usize << n;
    Ok(SparseSymMatrix::from_rows(dim, |row, out| {
        let code = row as u64;
        let up = code.count_ones() as i64;
        let diag = -lambda * (2 * up - n as i64) as f64;
        out.push((row, diag));
        for i in 0..n {
            let j = (i + 1) % n;
            let flipped = code ^ (1 << i) ^ (1 << j);
            out.push((flipped as usize, -1.0));
        }
    }))
}

/// Materialized Ising Hamiltonian for a preset chain spec.
pub fn build_ising_hamiltonian(spec: &ModelSpec) -> Result<SparseSymMatrix> {
    let lambda = match spec.couplings {
        Couplings::IsingChain { lambda } => lambda,
        _ => {
            return Err(Error::Hamiltonian(
                "build_ising_hamiltonian requires ISING_CHAIN couplings".into(),
            ))
        }
    };
    spec.validate()?;
    ising_ring_matrix(lambda, spec.lattice.num_sites)
}

/// Matrix-free Ising ring, for chain lengths where materializing the
/// 2^N matrix is wasteful.
pub struct IsingApply {
    n: usize,
    lambda: f64,
}

impl IsingApply {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if !(2..=26).contains(&n) {
            return Err(Error::Hamiltonian(format!(
                "matrix-free Ising ring supports 2 <= N <= 26, got {n}"
            )));
        }
        Ok(IsingApply { n, lambda })
    }
}

impl SymOperator for IsingApply {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for (row, slot) in y.iter_mut().enumerate() {
            let code = row as u64;
            let up = code.count_ones() as i64;
            let mut acc = -self.lambda * (2 * up - n as i64) as f64 * x[row];
            for i in 0..n {
                let j = (i + 1) % n;
                let flipped = code ^ (1 << i) ^ (1 << j);
                acc -= x[flipped as usize];
            }
            *slot = acc;
        }
    }
}

/// Occupied modes strictly between `i` and `j` set the hopping sign.
#[inline]
fn jw_sign(block_occupation: u64, i: usize, j: usize) -> f64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let between = if hi - lo <= 1 {
        0u64
    } else {
        ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1)
    };
    if (block_occupation & between).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Extended Hubbard chain at half filling:
/// H = -t sum_<ij>s (c+_is c_js + h.c.) + U sum_i n_iu n_id + V sum_<ij> n_i n_j.
pub fn build_hubbard_hamiltonian(spec: &ModelSpec, basis: &SectorBasis) -> Result<SparseSymMatrix> {
    let (t, u, v) = match spec.couplings {
        Couplings::HubbardChain { t, u, v } => (t, u, v),
        _ => {
            return Err(Error::Hamiltonian(
                "build_hubbard_hamiltonian requires HUBBARD_CHAIN couplings".into(),
            ))
        }
    };
    if basis.kind != BasisKind::FermionSite4 {
        return Err(Error::Hamiltonian(
            "Hubbard Hamiltonian requires a FERMION_SITE4 basis".into(),
        ));
    }
    let n = spec.lattice.num_sites;
    if basis.num_sites != n {
        return Err(Error::Hamiltonian(format!(
            "basis covers {} sites but lattice has {n}",
            basis.num_sites
        )));
    }
    match basis.sector {
        crate::hilbert::Sector::UpDn(n_up, n_dn) if n_up + n_dn == n => {}
        other => {
            return Err(Error::Hamiltonian(format!(
                "Hubbard builder is scoped to half filling; sector {other:?} has the wrong electron count"
            )))
        }
    }
    spec.validate()?;
    let bonds: Vec<&Bond> = spec.lattice.bonds.iter().collect();
    for bond in &bonds {
        spec.couplings.bond_value(bond.label)?;
    }

    Ok(SparseSymMatrix::from_rows(basis.dim(), |row, out| {
        let code = basis.state(row);
        let (up, dn) = basis.split_fermion_code(code);

        let mut diag = u * (up & dn).count_ones() as f64;
        for bond in &bonds {
            let n_i = (up >> bond.i & 1) + (dn >> bond.i & 1);
            let n_j = (up >> bond.j & 1) + (dn >> bond.j & 1);
            diag += v * (n_i * n_j) as f64;
        }
        out.push((row, diag));

        for bond in &bonds {
            for (from, to) in [(bond.i, bond.j), (bond.j, bond.i)] {
                // Up-spin hop: modes 0..N-1.
                if up >> from & 1 == 1 && up >> to & 1 == 0 {
                    let new_up = up ^ (1 << from) ^ (1 << to);
                    let sign = jw_sign(up, from, to);
                    let target = new_up | dn << n;
                    if let Some(col) = basis.index(target) {
                        out.push((col, -t * sign));
                    }
                }
                // Down-spin hop: modes N..2N-1; only dn-block modes lie
                // between, so the string uses the dn mask alone.
                if dn >> from & 1 == 1 && dn >> to & 1 == 0 {
                    let new_dn = dn ^ (1 << from) ^ (1 << to);
                    let sign = jw_sign(dn, from, to);
                    let target = up | new_dn << n;
                    if let Some(col) = basis.index(target) {
                        out.push((col, -t * sign));
                    }
                }
            }
        }
    }))
}

/// Expectation of the total double occupancy sum_i n_iu n_id in a sector
/// vector.
pub fn double_occupancy(basis: &SectorBasis, vector: &[f64]) -> f64 {
    basis
        .states()
        .iter()
        .zip(vector)
        .map(|(&code, amp)| {
            let (up, dn) = basis.split_fermion_code(code);
            (up & dn).count_ones() as f64 * amp * amp
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_sector, Sector};
    use crate::lattice::{make_preset_lattice, Shape};

    fn single_bond_lattice(label: BondLabel, family: ModelFamily) -> Lattice {
        Lattice {
            name: "bond".into(),
            family,
            shape: Shape::Chain(2),
            num_sites: 2,
            bonds: vec![Bond { i: 0, j: 1, label }],
        }
    }

    fn heisenberg_ring(n: usize) -> ModelSpec {
        let lattice = Lattice {
            name: format!("ring_{n}"),
            family: ModelFamily::J1j2_2d,
            shape: Shape::Chain(n),
            num_sites: n,
            bonds: (0..n)
                .map(|i| Bond {
                    i,
                    j: (i + 1) % n,
                    label: BondLabel::J1,
                })
                .collect(),
        };
        ModelSpec::new(Couplings::J1j2_2d { j1: 1.0, j2: 0.0 }, lattice).unwrap()
    }

    #[test]
    fn two_site_heisenberg_spectrum() {
        let spec = ModelSpec::new(
            Couplings::J1j2_2d { j1: 1.0, j2: 0.0 },
            single_bond_lattice(BondLabel::J1, ModelFamily::J1j2_2d),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::SpinHalf, 2, Sector::SzTwice(0)).unwrap();
        let h = build_spin_hamiltonian(&spec, &basis).unwrap();
        let dense = h.to_dense();
        let (w, _) = crate::linalg::eigh(&dense).unwrap();
        assert!((w[0] + 0.75).abs() < 1e-14);
        assert!((w[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bond_action_on_up_down() {
        let spec = ModelSpec::new(
            Couplings::J1j2_2d { j1: 1.0, j2: 0.0 },
            single_bond_lattice(BondLabel::J1, ModelFamily::J1j2_2d),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::SpinHalf, 2, Sector::SzTwice(0)).unwrap();
        let h = build_spin_hamiltonian(&spec, &basis).unwrap();
        // |up,down> = code 0b01 = sector ordinal 0.
        let x = [1.0, 0.0];
        let mut y = [0.0, 0.0];
        h.apply(&x, &mut y);
        assert!((y[0] + 0.25).abs() < 1e-15);
        assert!((y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_site_ring_ground_energy() {
        let spec = heisenberg_ring(4);
        let basis = enumerate_sector(BasisKind::SpinHalf, 4, Sector::SzTwice(0)).unwrap();
        let h = build_spin_hamiltonian(&spec, &basis).unwrap();
        let (w, _) = crate::linalg::eigh(&h.to_dense()).unwrap();
        assert!((w[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_coupling_label_errors() {
        let spec = ModelSpec::new(
            Couplings::J1j2_2d { j1: 1.0, j2: 0.0 },
            single_bond_lattice(BondLabel::J1, ModelFamily::J1j2_2d),
        )
        .unwrap();
        assert!(spec.couplings.bond_value(BondLabel::Jcross).is_err());
    }

    #[test]
    fn ising_two_site_double_bond() {
        let h = ising_ring_matrix(0.0, 2).unwrap();
        let (w, _) = crate::linalg::eigh(&h.to_dense()).unwrap();
        assert!((w[0] + 2.0).abs() < 1e-13);
        // The doubled ring bond gives off-diagonal -2 between 00 and 11.
        assert!((h.get(0, 3) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn ising_polarized_limit() {
        let n = 8;
        let lambda = 50.0;
        let h = ising_ring_matrix(lambda, n).unwrap();
        let (w, vecs) = crate::linalg::eigh(&h.to_dense()).unwrap();
        assert!((w[0] + lambda * n as f64).abs() < 0.1);
        // Ground state is essentially all-up (code with every bit set).
        let idx = (1usize << n) - 1;
        assert!(vecs.get(idx, 0).abs() > 0.99);
    }

    #[test]
    fn ising_matrix_free_matches_materialized() {
        let n = 8;
        let lambda = 0.73;
        let h = ising_ring_matrix(lambda, n).unwrap();
        let free = IsingApply::new(lambda, n).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y1 = vec![0.0; h.dim()];
        let mut y2 = vec![0.0; h.dim()];
        h.apply(&x, &mut y1);
        free.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hubbard_two_site_bonding_orbital() {
        let spec = ModelSpec::new(
            Couplings::HubbardChain {
                t: 1.0,
                u: 0.0,
                v: 0.0,
            },
            single_bond_lattice(BondLabel::Hop, ModelFamily::HubbardChain),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 2, Sector::UpDn(1, 1)).unwrap();
        let h = build_hubbard_hamiltonian(&spec, &basis).unwrap();
        let (w, _) = crate::linalg::eigh(&h.to_dense()).unwrap();
        assert!((w[0] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn hubbard_rejects_non_half_filling() {
        let spec = ModelSpec::new(
            Couplings::HubbardChain {
                t: 1.0,
                u: 0.0,
                v: 0.0,
            },
            make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(4)).unwrap(),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 4, Sector::UpDn(1, 1)).unwrap();
        assert!(build_hubbard_hamiltonian(&spec, &basis).is_err());
    }

    #[test]
    fn hamiltonians_are_symmetric_under_probes() {
        let spec = heisenberg_ring(8);
        let basis = enumerate_sector(BasisKind::SpinHalf, 8, Sector::SzTwice(0)).unwrap();
        let h = build_spin_hamiltonian(&spec, &basis).unwrap();
        assert_eq!(h.probe_asymmetry(100, 3), 0.0);

        let h = ising_ring_matrix(0.9, 10).unwrap();
        assert_eq!(h.probe_asymmetry(100, 4), 0.0);

        let spec = ModelSpec::new(
            Couplings::HubbardChain {
                t: 1.0,
                u: 4.0,
                v: 1.0,
            },
            make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(6)).unwrap(),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 6, Sector::UpDn(3, 3)).unwrap();
        let h = build_hubbard_hamiltonian(&spec, &basis).unwrap();
        assert_eq!(h.probe_asymmetry(100, 5), 0.0);
    }

    #[test]
    fn spin_sector_conservation() {
        // Applying the full-space Hamiltonian to an embedded sector vector
        // must not leak out of the sector.
        let spec = heisenberg_ring(6);
        let full_basis = enumerate_sector(BasisKind::SpinHalf, 6, Sector::Full).unwrap();
        let h_full = build_spin_hamiltonian(&spec, &full_basis).unwrap();
        let sector = enumerate_sector(BasisKind::SpinHalf, 6, Sector::SzTwice(2)).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut v: Vec<f64> = (0..sector.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        let full = crate::hilbert::embed_full(&v, &sector).unwrap();
        let mut out = vec![0.0; full.amplitudes.len()];
        h_full.apply(&full.amplitudes, &mut out);
        for (code, amp) in out.iter().enumerate() {
            if sector.index(code as u64).is_none() {
                assert_eq!(*amp, 0.0, "leak at code {code}");
            }
        }
    }

    #[test]
    fn heisenberg_commutes_with_total_spin() {
        // S^2 = 3N/4 + 2 sum_{i<j} S_i . S_j acting in the full space.
        let n = 6;
        let spec = heisenberg_ring(n);
        let full_basis = enumerate_sector(BasisKind::SpinHalf, n, Sector::Full).unwrap();
        let h = build_spin_hamiltonian(&spec, &full_basis).unwrap();

        // Build S^2 as an all-pairs Heisenberg matrix plus the constant.
        let all_pairs = Lattice {
            name: "all_pairs".into(),
            family: ModelFamily::J1j2_2d,
            shape: Shape::Chain(n),
            num_sites: n,
            bonds: (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| Bond {
                    i,
                    j,
                    label: BondLabel::J1,
                }))
                .collect(),
        };
        // The 3N/4 constant commutes trivially, so compare exchange parts.
        let pair_spec = ModelSpec::new(Couplings::J1j2_2d { j1: 2.0, j2: 0.0 }, all_pairs).unwrap();
        let s2 = build_spin_hamiltonian(&pair_spec, &full_basis).unwrap();

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let dim = full_basis.dim();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut hx = vec![0.0; dim];
        let mut s2hx = vec![0.0; dim];
        let mut s2x = vec![0.0; dim];
        let mut hs2x = vec![0.0; dim];
        h.apply(&x, &mut hx);
        s2.apply(&hx, &mut s2hx);
        s2.apply(&x, &mut s2x);
        h.apply(&s2x, &mut hs2x);
        let worst = s2hx
            .iter()
            .zip(&hs2x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "commutator norm {worst}");
    }

    #[test]
    fn hubbard_atomic_limit_suppresses_double_occupancy() {
        let spec = ModelSpec::new(
            Couplings::HubbardChain {
                t: 1.0,
                u: 8.0,
                v: 0.0,
            },
            make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(6)).unwrap(),
        )
        .unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 6, Sector::UpDn(3, 3)).unwrap();
        let h = build_hubbard_hamiltonian(&spec, &basis).unwrap();
        let (w, vecs) = crate::linalg::eigh(&h.to_dense()).unwrap();
        let ground: Vec<f64> = vecs.col(0).to_vec();
        let docc = double_occupancy(&basis, &ground) / 6.0;
        assert!(w[0] < 0.0);
        assert!(docc < 0.05, "per-site double occupancy {docc}");
    }

    #[test]
    fn hubbard_particle_hole_energy_relation() {
        // At half filling with V = 0, mapping d_i = (-1)^i c+_i(dn) sends
        // U -> -U and shifts the spectrum by U * N_up, so
        // E0(U) = E0(-U) + U * N/2.
        let n = 6;
        let lattice = make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(n)).unwrap();
        let basis =
            enumerate_sector(BasisKind::FermionSite4, n, Sector::UpDn(n / 2, n / 2)).unwrap();
        let e0 = |u: f64| {
            let spec = ModelSpec::new(
                Couplings::HubbardChain { t: 1.0, u, v: 0.0 },
                lattice.clone(),
            )
            .unwrap();
            let h = build_hubbard_hamiltonian(&spec, &basis).unwrap();
            let (w, _) = crate::linalg::eigh(&h.to_dense()).unwrap();
            w[0]
        };
        let u = 4.0;
        let lhs = e0(u);
        let rhs = e0(-u) + u * n as f64 / 2.0;
        assert!((lhs - rhs).abs() < 1e-9, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn hubbard_level_collision_at_classical_boundary() {
        // At N = 6, U = 4 the hopping rounds the classical U = 2V
        // degeneracy: the two lowest levels stay separated, while the next
        // pair collides near V = 2. Assert the measured structure.
        let lattice = make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(6)).unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 6, Sector::UpDn(3, 3)).unwrap();
        let mut min_upper_gap = f64::MAX;
        for v in [1.9, 1.95, 2.0, 2.05, 2.1] {
            let spec = ModelSpec::new(
                Couplings::HubbardChain { t: 1.0, u: 4.0, v },
                lattice.clone(),
            )
            .unwrap();
            let h = build_hubbard_hamiltonian(&spec, &basis).unwrap();
            let (w, _) = crate::linalg::eigh(&h.to_dense()).unwrap();
            assert!(w[1] - w[0] > 1.0, "ground state smooth at V={v}");
            min_upper_gap = min_upper_gap.min(w[2] - w[1]);
        }
        assert!(
            min_upper_gap < 0.1,
            "no excited-level collision near V=2 (min gap {min_upper_gap})"
        );
    }
}
