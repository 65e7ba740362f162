//! The validation oracle suite: independent cross-checks of the solver
//! and entanglement machinery, runnable from the CLI.
//!
//! Every check here pits a production code path against an independently
//! coded oracle: dense diagonalization against Lanczos, explicit
//! bra-contraction against the regrouped partial trace, string-sorting
//! signs against permutation-inversion signs, and the Gaussian solver
//! against exact spin-block entropies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigensolver::{dense_lowest, lanczos_lowest, SolverOptions};
use crate::entanglement::{partial_trace, von_neumann_entropy, ReducedDensityMatrix};
use crate::error::Result;
use crate::gaussian_ising;
use crate::hamiltonian::{
    build_hubbard_hamiltonian, build_spin_hamiltonian, ising_ring_matrix, Couplings, ModelSpec,
};
use crate::hilbert::{embed_full, enumerate_sector, BasisKind, FullStateVector, Sector};
use crate::lattice::{
    make_preset_lattice, Bond, BondLabel, Lattice, ModelFamily, Shape, SublatticePartition,
};
use crate::linalg::Mat;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_worst(name: &'static str, worst: f64, tolerance: f64) -> CheckResult {
        CheckResult {
            name,
            passed: worst <= tolerance,
            detail: format!("worst deviation {worst:.3e} (tolerance {tolerance:.0e})"),
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Run the full suite.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        dense_vs_lanczos_check(),
        brute_force_partial_trace_check(),
        complement_symmetry_check(),
        relabel_invariance_check(),
        gaussian_vs_ed_blocks_check(),
    ]
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
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
    ModelSpec::new(Couplings::J1j2_2d { j1: 1.0, j2: 0.0 }, lattice).expect("valid ring")
}

/// Ground energies from the Lanczos solver against full dense spectra,
/// on sector dimensions up to 2000.
pub fn dense_vs_lanczos_check() -> CheckResult {
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let mut run = |h: &crate::hamiltonian::SparseSymMatrix| match (
        lanczos_lowest(h, &opts),
        dense_lowest(h, 1),
    ) {
        (Ok(gs), Ok(spectrum)) => {
            worst = worst.max((gs.energy - spectrum.eigenvalues[0]).abs());
        }
        _ => worst = f64::INFINITY,
    };

    for n in [8usize, 10, 12] {
        let spec = heisenberg_ring(n);
        let basis = enumerate_sector(BasisKind::SpinHalf, n, Sector::SzTwice(0)).unwrap();
        run(&build_spin_hamiltonian(&spec, &basis).unwrap());
    }
    for lambda in [0.4, 1.0, 1.6] {
        run(&ising_ring_matrix(lambda, 10).unwrap());
    }
    {
        let lattice = make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(6)).unwrap();
        let basis = enumerate_sector(BasisKind::FermionSite4, 6, Sector::UpDn(3, 3)).unwrap();
        for (u, v) in [(4.0, 0.0), (4.0, 2.0), (-4.0, 1.0)] {
            let spec =
                ModelSpec::new(Couplings::HubbardChain { t: 1.0, u, v }, lattice.clone()).unwrap();
            run(&build_hubbard_hamiltonian(&spec, &basis).unwrap());
        }
    }
    CheckResult::from_worst("dense_vs_lanczos", worst, 1e-10)
}

/// Scatter packed sublattice bits back into a full-lattice mask.
fn scatter_bits(packed: usize, sites: &[usize]) -> u64 {
    let mut mask = 0u64;
    for (k, &site) in sites.iter().enumerate() {
        if packed >> k & 1 == 1 {
            mask |= 1 << site;
        }
    }
    mask
}

/// Independent reordering sign: bubble-sort the occupied-site list mapped
/// to its target position and count the swaps.
fn string_sort_sign(occupied: u64, target_position: &[usize]) -> f64 {
    let mut labels: Vec<usize> = (0..target_position.len())
        .filter(|&site| occupied >> site & 1 == 1)
        .map(|site| target_position[site])
        .collect();
    let mut swaps = 0usize;
    let len = labels.len();
    for i in 0..len {
        for j in 0..len.saturating_sub(1 + i) {
            if labels[j] > labels[j + 1] {
                labels.swap(j, j + 1);
                swaps += 1;
            }
        }
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Brute-force reduced density matrix by explicit bra contraction over
/// the complement, with string-sorted signs for fermions.
fn brute_force_rho(
    state: &FullStateVector,
    part: &SublatticePartition,
    kind: BasisKind,
) -> Mat {
    let r_sites = &part.r_sites;
    let b_sites = &part.b_sites;
    let n = state.num_sites;
    let mut target = vec![0usize; n];
    for (pos, &site) in r_sites.iter().chain(b_sites.iter()).enumerate() {
        target[site] = pos;
    }
    match kind {
        BasisKind::SpinHalf => {
            let (dr, db) = (1usize << r_sites.len(), 1usize << b_sites.len());
            let mut rho = Mat::zeros(dr, dr);
            for r in 0..dr {
                for rp in 0..dr {
                    let mut acc = 0.0;
                    for b in 0..db {
                        let code = scatter_bits(r, r_sites) | scatter_bits(b, b_sites);
                        let code_p = scatter_bits(rp, r_sites) | scatter_bits(b, b_sites);
                        acc += state.amplitudes[code as usize] * state.amplitudes[code_p as usize];
                    }
                    rho.set(r, rp, acc);
                }
            }
            rho
        }
        BasisKind::FermionSite4 => {
            let (rl, bl) = (r_sites.len(), b_sites.len());
            let (dr, db) = (1usize << (2 * rl), 1usize << (2 * bl));
            let mut table = Mat::zeros(dr, db);
            for r in 0..dr {
                for b in 0..db {
                    let up = scatter_bits(r & ((1 << rl) - 1), r_sites)
                        | scatter_bits(b & ((1 << bl) - 1), b_sites);
                    let dn = scatter_bits(r >> rl, r_sites) | scatter_bits(b >> bl, b_sites);
                    let code = up | dn << n;
                    let sign = string_sort_sign(up, &target) * string_sort_sign(dn, &target);
                    table.set(r, b, sign * state.amplitudes[code as usize]);
                }
            }
            crate::linalg::a_at(&table)
        }
    }
}

fn random_partition(n: usize, max_r: usize, rng: &mut ChaCha8Rng) -> SublatticePartition {
    use rand::seq::SliceRandom;
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(rng);
    let r_len = rng.gen_range(1..=max_r.min(n - 1));
    let mut r_sites = sites[..r_len].to_vec();
    let mut b_sites = sites[r_len..].to_vec();
    r_sites.sort_unstable();
    b_sites.sort_unstable();
    SublatticePartition {
        r_sites,
        b_sites,
        cut_bonds: 0,
    }
}

/// Production partial trace against the bra-contraction oracle on 100
/// random states, spin and fermion kinds.
pub fn brute_force_partial_trace_check() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac75);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 4 + trial % 3; // 4..6 sites
        let kind = if trial % 2 == 0 {
            BasisKind::SpinHalf
        } else {
            BasisKind::FermionSite4
        };
        let max_r = if kind == BasisKind::SpinHalf { n - 1 } else { 3 };
        let part = random_partition(n, max_r, &mut rng);
        let state = match kind {
            BasisKind::SpinHalf => FullStateVector {
                kind,
                num_sites: n,
                amplitudes: random_unit(1 << n, &mut rng),
            },
            BasisKind::FermionSite4 => {
                let n_up = rng.gen_range(1..n);
                let n_dn = rng.gen_range(1..n);
                let basis =
                    enumerate_sector(BasisKind::FermionSite4, n, Sector::UpDn(n_up, n_dn)).unwrap();
                embed_full(&random_unit(basis.dim(), &mut rng), &basis).unwrap()
            }
        };
        let rho = match partial_trace(&state, &part, kind) {
            Ok(rho) => rho,
            Err(_) => return CheckResult::from_worst("brute_force_partial_trace", f64::INFINITY, 1e-12),
        };
        let oracle = brute_force_rho(&state, &part, kind);
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                worst = worst.max((rho.mat.get(i, j) - oracle.get(i, j)).abs());
            }
        }
    }
    CheckResult::from_worst("brute_force_partial_trace", worst, 1e-12)
}

/// Schmidt duality: S(R) = S(B) for every pure state.
pub fn complement_symmetry_check() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0fe);
    let mut worst = 0.0f64;
    for trial in 0..30 {
        // Spin states take generic sizes; fermion complements stay small
        // enough that both reduced matrices diagonalize quickly.
        let n_spin = 5 + trial % 3;
        let spin_part = random_partition(n_spin, n_spin - 1, &mut rng);
        let spin = FullStateVector {
            kind: BasisKind::SpinHalf,
            num_sites: n_spin,
            amplitudes: random_unit(1 << n_spin, &mut rng),
        };
        let n_f = 5;
        let fermion_part = random_partition(n_f, 3, &mut rng);
        let basis =
            enumerate_sector(BasisKind::FermionSite4, n_f, Sector::UpDn(2, 3)).unwrap();
        let fermion = embed_full(&random_unit(basis.dim(), &mut rng), &basis).unwrap();
        for (state, part, kind) in [
            (&spin, &spin_part, BasisKind::SpinHalf),
            (&fermion, &fermion_part, BasisKind::FermionSite4),
        ] {
            let swapped = SublatticePartition {
                r_sites: part.b_sites.clone(),
                b_sites: part.r_sites.clone(),
                cut_bonds: 0,
            };
            let s_r = entropy_of(state, part, kind);
            let s_b = entropy_of(state, &swapped, kind);
            match (s_r, s_b) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                _ => worst = f64::INFINITY,
            }
        }
    }
    CheckResult::from_worst("complement_symmetry", worst, 1e-10)
}

fn entropy_of(
    state: &FullStateVector,
    part: &SublatticePartition,
    kind: BasisKind,
) -> Result<f64> {
    Ok(von_neumann_entropy(&partial_trace(state, part, kind)?)?.bits)
}

/// Relabeling the internal order of R-sites must leave the entropy
/// unchanged; this is the regression test for fermionic sign bookkeeping.
pub fn relabel_invariance_check() -> CheckResult {
    relabel_invariance_check_with(|state, part| partial_trace(state, part, BasisKind::FermionSite4))
}

/// Same check with an injectable partial-trace implementation, so tests
/// can demonstrate that a sign bug is caught.
pub fn relabel_invariance_check_with(
    trace: impl Fn(&FullStateVector, &SublatticePartition) -> Result<ReducedDensityMatrix>,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51c4);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n = 5 + trial % 2;
        let basis =
            enumerate_sector(BasisKind::FermionSite4, n, Sector::UpDn(n / 2, n / 2)).unwrap();
        let state = embed_full(&random_unit(basis.dim(), &mut rng), &basis).unwrap();
        let base = random_partition(n, 3, &mut rng);
        let mut rotated = base.r_sites.clone();
        let shift = 1.min(rotated.len() - 1);
        rotated.rotate_left(shift);
        let reversed: Vec<usize> = base.r_sites.iter().rev().copied().collect();
        let mut values = Vec::new();
        for r_sites in [base.r_sites.clone(), rotated, reversed] {
            let part = SublatticePartition {
                r_sites,
                b_sites: base.b_sites.clone(),
                cut_bonds: 0,
            };
            match trace(&state, &part).and_then(|rho| von_neumann_entropy(&rho)) {
                Ok(s) => values.push(s.bits),
                Err(_) => return CheckResult::from_worst("fermion_relabel_invariance", f64::INFINITY, 1e-12),
            }
        }
        for pair in values.windows(2) {
            worst = worst.max((pair[0] - pair[1]).abs());
        }
    }
    CheckResult::from_worst("fermion_relabel_invariance", worst, 1e-12)
}

/// Gaussian covariance entropies against exact spin-block entropies for
/// contiguous blocks, up to N = 14.
pub fn gaussian_vs_ed_blocks_check() -> CheckResult {
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let cases: [(usize, f64, usize); 5] = [
        (12, 0.7, 4),
        (12, 1.0, 5),
        (12, 1.3, 3),
        (14, 1.0, 7),
        (14, 0.8, 5),
    ];
    for (n, lambda, block_len) in cases {
        let state = match gaussian_ising::build_kernel(n, lambda) {
            Ok(s) => s,
            Err(_) => return CheckResult::from_worst("gaussian_vs_ed_blocks", f64::INFINITY, 1e-8),
        };
        let block: Vec<usize> = (0..block_len).collect();
        let s_gauss = gaussian_ising::subsystem_entropy(&state, &block)
            .map(|s| s.bits)
            .unwrap_or(f64::INFINITY);

        let outcome = ising_ring_matrix(lambda, n)
            .and_then(|h| lanczos_lowest(&h, &opts))
            .and_then(|gs| {
                let full = FullStateVector {
                    kind: BasisKind::SpinHalf,
                    num_sites: n,
                    amplitudes: gs.vector,
                };
                let part = SublatticePartition {
                    r_sites: block.clone(),
                    b_sites: (block_len..n).collect(),
                    cut_bonds: 2,
                };
                entropy_of(&full, &part, BasisKind::SpinHalf)
            });
        match outcome {
            Ok(s_spin) => worst = worst.max((s_gauss - s_spin).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckResult::from_worst("gaussian_vs_ed_blocks", worst, 1e-8)
}
