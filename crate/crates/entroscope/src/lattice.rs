//! Lattice geometries, coupling-labeled bonds with periodic boundary
//! conditions, and sublattice bipartitions.
//!
//! Presets cover the five model families; [`auto_partition`] implements the
//! cut-maximizing sublattice selection rule with a structure-preservation
//! tie-break.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five supported model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelFamily {
    IsingChain,
    Dimer2d,
    J1j2_2d,
    Checkerboard2d,
    HubbardChain,
}

impl ModelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::IsingChain => "ISING_CHAIN",
            ModelFamily::Dimer2d => "DIMER_2D",
            ModelFamily::J1j2_2d => "J1J2_2D",
            ModelFamily::Checkerboard2d => "CHECKERBOARD_2D",
            ModelFamily::HubbardChain => "HUBBARD_CHAIN",
        }
    }
}

/// Coupling tag on a bond. The model family binds each label to a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BondLabel {
    /// Nearest-neighbor bond of the Ising chain.
    Nn,
    /// Strong intra-dimer bond.
    Dimer,
    /// Weak inter-dimer bond.
    Interdimer,
    /// Nearest-neighbor exchange of the frustrated square lattice.
    J1,
    /// Next-nearest-neighbor (diagonal) exchange.
    J2,
    /// Nearest-neighbor exchange of the checkerboard lattice.
    J,
    /// Crossed-plaquette diagonal exchange.
    Jcross,
    /// Hubbard hopping bond.
    Hop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub label: BondLabel,
}

impl Bond {
    fn canonical(&self) -> (usize, usize, BondLabel) {
        let (a, b) = if self.i <= self.j {
            (self.i, self.j)
        } else {
            (self.j, self.i)
        };
        (a, b, self.label)
    }
}

/// Lattice shape: a ring of `n` sites or an `Lx x Ly` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Chain(usize),
    Square(usize, usize),
}

impl Shape {
    pub fn num_sites(&self) -> usize {
        match *self {
            Shape::Chain(n) => n,
            Shape::Square(lx, ly) => lx * ly,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Shape::Chain(_) => 1,
            Shape::Square(_, _) => 2,
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Shape::Chain(n) => write!(f, "{n}"),
            Shape::Square(lx, ly) => write!(f, "{lx}x{ly}"),
        }
    }
}

/// Sites and labeled bonds of a periodic cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub name: String,
    pub family: ModelFamily,
    pub shape: Shape,
    pub num_sites: usize,
    pub bonds: Vec<Bond>,
}

impl Lattice {
    /// Check the structural invariants: bond endpoints in range, no
    /// self-bonds, no duplicate (i, j, label) triples.
    pub fn validate(&self) -> Result<()> {
        if self.num_sites != self.shape.num_sites() {
            return Err(Error::Lattice(format!(
                "num_sites {} does not match shape {}",
                self.num_sites, self.shape
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for bond in &self.bonds {
            if bond.i >= self.num_sites || bond.j >= self.num_sites {
                return Err(Error::Lattice(format!(
                    "bond ({}, {}) references a site outside 0..{}",
                    bond.i, bond.j, self.num_sites
                )));
            }
            if bond.i == bond.j {
                return Err(Error::Lattice(format!("self-bond at site {}", bond.i)));
            }
            if !seen.insert(bond.canonical()) {
                return Err(Error::Lattice(format!(
                    "duplicate bond ({}, {}, {:?})",
                    bond.i, bond.j, bond.label
                )));
            }
        }
        Ok(())
    }

    /// Number of bonds carrying `label`.
    pub fn count_label(&self, label: BondLabel) -> usize {
        self.bonds.iter().filter(|b| b.label == label).count()
    }

    /// Coordination number of `site`.
    pub fn degree(&self, site: usize) -> usize {
        self.bonds
            .iter()
            .filter(|b| b.i == site || b.j == site)
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Lattice> {
        let lattice: Lattice = serde_json::from_str(text)?;
        lattice.validate()?;
        Ok(lattice)
    }

    /// Site permutations for translations by two lattice units
    /// (one generator per lattice direction).
    fn translations_by_two(&self) -> Vec<Vec<usize>> {
        match self.shape {
            Shape::Chain(n) => {
                vec![(0..n).map(|i| (i + 2) % n).collect()]
            }
            Shape::Square(lx, ly) => {
                let site = |x: usize, y: usize| (x % lx) + lx * (y % ly);
                let tx: Vec<usize> = (0..lx * ly).map(|s| site(s % lx + 2, s / lx)).collect();
                let ty: Vec<usize> = (0..lx * ly).map(|s| site(s % lx, s / lx + 2)).collect();
                vec![tx, ty]
            }
        }
    }
}

/// A balanced bipartition of the lattice sites into sublattice R and its
/// complement B, with the number of bonds crossing the cut.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublatticePartition {
    pub r_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
    pub cut_bonds: usize,
}

impl SublatticePartition {
    /// Build a partition from the R-site list, deriving the complement and
    /// the cut count from the lattice bonds.
    pub fn new(lattice: &Lattice, r_sites: Vec<usize>) -> Result<Self> {
        let n = lattice.num_sites;
        let mut in_r = vec![false; n];
        for &site in &r_sites {
            if site >= n {
                return Err(Error::Lattice(format!(
                    "partition site {site} outside 0..{n}"
                )));
            }
            if in_r[site] {
                return Err(Error::Lattice(format!("partition repeats site {site}")));
            }
            in_r[site] = true;
        }
        if r_sites.is_empty() || r_sites.len() == n {
            return Err(Error::Lattice(
                "partition must be a proper nonempty subset".into(),
            ));
        }
        let b_sites: Vec<usize> = (0..n).filter(|&s| !in_r[s]).collect();
        let cut_bonds = count_cut(lattice, &in_r);
        Ok(SublatticePartition {
            r_sites,
            b_sites,
            cut_bonds,
        })
    }

    /// Recount the cut from the bond list (used by invariant checks).
    pub fn recount_cut(&self, lattice: &Lattice) -> usize {
        let mut in_r = vec![false; lattice.num_sites];
        for &site in &self.r_sites {
            in_r[site] = true;
        }
        count_cut(lattice, &in_r)
    }
}

fn count_cut(lattice: &Lattice, in_r: &[bool]) -> usize {
    lattice
        .bonds
        .iter()
        .filter(|b| in_r[b.i] != in_r[b.j])
        .count()
}

/// Build one of the preset periodic lattices.
///
/// Chains take any even length >= 4; the 2D families are fixed to 4x4.
pub fn make_preset_lattice(family: ModelFamily, shape: Shape) -> Result<Lattice> {
    match family {
        ModelFamily::IsingChain | ModelFamily::HubbardChain => {
            let n = match shape {
                Shape::Chain(n) => n,
                _ => {
                    return Err(Error::Lattice(format!(
                        "{} requires a chain shape; allowed sizes are even N >= 4",
                        family.as_str()
                    )))
                }
            };
            if n < 4 || n % 2 != 0 {
                return Err(Error::Lattice(format!(
                    "{} supports even chain lengths N >= 4, got N = {n}",
                    family.as_str()
                )));
            }
            let label = if family == ModelFamily::IsingChain {
                BondLabel::Nn
            } else {
                BondLabel::Hop
            };
            let bonds = (0..n)
                .map(|i| Bond {
                    i,
                    j: (i + 1) % n,
                    label,
                })
                .collect();
            let lattice = Lattice {
                name: format!("{}_{n}", family.as_str().to_lowercase()),
                family,
                shape,
                num_sites: n,
                bonds,
            };
            lattice.validate()?;
            Ok(lattice)
        }
        ModelFamily::Dimer2d | ModelFamily::J1j2_2d | ModelFamily::Checkerboard2d => {
            let (lx, ly) = match shape {
                Shape::Square(4, 4) => (4usize, 4usize),
                _ => {
                    return Err(Error::Lattice(format!(
                        "{} supports only the 4x4 torus",
                        family.as_str()
                    )))
                }
            };
            let site = |x: usize, y: usize| (x % lx) + lx * (y % ly);
            let mut bonds = Vec::new();
            for y in 0..ly {
                for x in 0..lx {
                    // Horizontal and vertical nearest-neighbor bonds.
                    let nn_label = match family {
                        ModelFamily::Dimer2d => {
                            if x % 2 == 0 {
                                BondLabel::Dimer
                            } else {
                                BondLabel::Interdimer
                            }
                        }
                        ModelFamily::J1j2_2d => BondLabel::J1,
                        _ => BondLabel::J,
                    };
                    bonds.push(Bond {
                        i: site(x, y),
                        j: site(x + 1, y),
                        label: nn_label,
                    });
                    let v_label = match family {
                        ModelFamily::Dimer2d => BondLabel::Interdimer,
                        ModelFamily::J1j2_2d => BondLabel::J1,
                        _ => BondLabel::J,
                    };
                    bonds.push(Bond {
                        i: site(x, y),
                        j: site(x, y + 1),
                        label: v_label,
                    });
                    // Diagonals.
                    match family {
                        ModelFamily::J1j2_2d => {
                            bonds.push(Bond {
                                i: site(x, y),
                                j: site(x + 1, y + 1),
                                label: BondLabel::J2,
                            });
                            bonds.push(Bond {
                                i: site(x + 1, y),
                                j: site(x, y + 1),
                                label: BondLabel::J2,
                            });
                        }
                        ModelFamily::Checkerboard2d if (x + y) % 2 == 0 => {
                            bonds.push(Bond {
                                i: site(x, y),
                                j: site(x + 1, y + 1),
                                label: BondLabel::Jcross,
                            });
                            bonds.push(Bond {
                                i: site(x + 1, y),
                                j: site(x, y + 1),
                                label: BondLabel::Jcross,
                            });
                        }
                        _ => {}
                    }
                }
            }
            let lattice = Lattice {
                name: format!("{}_4x4", family.as_str().to_lowercase()),
                family,
                shape,
                num_sites: lx * ly,
                bonds,
            };
            lattice.validate()?;
            Ok(lattice)
        }
    }
}

/// The preset sublattice: even sites for chains, the Neel sublattice for
/// the 4x4 models.
pub fn preset_partition(lattice: &Lattice) -> Result<SublatticePartition> {
    let r_sites: Vec<usize> = match lattice.shape {
        Shape::Chain(n) => (0..n).step_by(2).collect(),
        Shape::Square(lx, ly) => (0..lx * ly)
            .filter(|s| (s % lx + s / lx) % 2 == 0)
            .collect(),
        #[allow(unreachable_patterns)]
        _ => return Err(Error::Lattice("unsupported preset shape".into())),
    };
    SublatticePartition::new(lattice, r_sites)
}

/// Find a balanced bipartition maximizing the number of cut bonds.
///
/// Exhaustive over all C(N, N/2) bipartitions when that count fits in
/// `budget` (and N <= 20); otherwise greedy swap improvement from the
/// preset. Ties prefer partitions invariant under translations by two
/// sites, then the lexicographically smallest R-site list. The result is
/// deterministic for a fixed input.
pub fn auto_partition(lattice: &Lattice, budget: usize) -> Result<SublatticePartition> {
    let n = lattice.num_sites;
    if !n.is_multiple_of(2) {
        return Err(Error::Lattice(
            "balanced bipartition undefined for odd site count".into(),
        ));
    }
    let half = n / 2;
    let translations = lattice.translations_by_two();
    let total = binomial(n, half);
    if n <= 20 && total / 2 <= budget as u128 {
        exhaustive_partition(lattice, &translations)
    } else {
        greedy_partition(lattice, &translations)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn subset_sites(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&s| mask >> s & 1 == 1).collect()
}

fn is_translation_invariant(mask: u32, translations: &[Vec<usize>]) -> bool {
    translations.iter().all(|perm| {
        let mut moved: u32 = 0;
        for (old, &new) in perm.iter().enumerate() {
            if mask >> old & 1 == 1 {
                moved |= 1 << new;
            }
        }
        moved == mask
    })
}

fn exhaustive_partition(lattice: &Lattice, translations: &[Vec<usize>]) -> Result<SublatticePartition> {
    let n = lattice.num_sites;
    let half = n / 2;
    // Canonicalize over the R <-> B swap by fixing site 0 in R.
    let mut best: Option<(usize, bool, Vec<usize>)> = None;
    let mut mask: u32 = (1 << (half - 1)) - 1; // subsets of sites 1..n of size half-1
    let limit: u32 = 1 << (n - 1);
    let mut in_r = vec![false; n];
    while mask < limit {
        let full_mask = (mask << 1) | 1; // site 0 always in R
        in_r.iter_mut().for_each(|b| *b = false);
        for (site, flag) in in_r.iter_mut().enumerate() {
            *flag = full_mask >> site & 1 == 1;
        }
        let cut = count_cut(lattice, &in_r);
        let better = match &best {
            None => true,
            Some((best_cut, best_ti, best_sites)) => {
                if cut != *best_cut {
                    cut > *best_cut
                } else {
                    let ti = is_translation_invariant(full_mask, translations);
                    if ti != *best_ti {
                        ti
                    } else {
                        subset_sites(full_mask, n) < *best_sites
                    }
                }
            }
        };
        if better {
            let ti = is_translation_invariant(full_mask, translations);
            best = Some((cut, ti, subset_sites(full_mask, n)));
        }
        // Next subset with the same popcount (Gosper's hack).
        if mask == 0 {
            break;
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    let (_, _, r_sites) = best.ok_or_else(|| Error::Lattice("no bipartition found".into()))?;
    SublatticePartition::new(lattice, r_sites)
}

fn greedy_partition(lattice: &Lattice, translations: &[Vec<usize>]) -> Result<SublatticePartition> {
    let preset = preset_partition(lattice)?;
    let n = lattice.num_sites;
    let mut in_r = vec![false; n];
    for &s in &preset.r_sites {
        in_r[s] = true;
    }
    let mut cut = count_cut(lattice, &in_r);
    loop {
        let mut best_swap: Option<(usize, usize, usize)> = None;
        for r in 0..n {
            if !in_r[r] {
                continue;
            }
            for b in 0..n {
                if in_r[b] {
                    continue;
                }
                in_r[r] = false;
                in_r[b] = true;
                let new_cut = count_cut(lattice, &in_r);
                in_r[r] = true;
                in_r[b] = false;
                if new_cut > cut && best_swap.is_none_or(|(c, _, _)| new_cut > c) {
                    best_swap = Some((new_cut, r, b));
                }
            }
        }
        match best_swap {
            Some((new_cut, r, b)) => {
                in_r[r] = false;
                in_r[b] = true;
                cut = new_cut;
            }
            None => break,
        }
    }
    let _ = translations; // tie-breaks do not apply to the greedy path
    let r_sites: Vec<usize> = (0..n).filter(|&s| in_r[s]).collect();
    SublatticePartition::new(lattice, r_sites)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Lattice {
        make_preset_lattice(ModelFamily::IsingChain, Shape::Chain(n)).unwrap()
    }

    #[test]
    fn ising_chain_ring() {
        let lat = chain(10);
        assert_eq!(lat.num_sites, 10);
        assert_eq!(lat.bonds.len(), 10);
        for site in 0..10 {
            assert_eq!(lat.degree(site), 2);
        }
    }

    #[test]
    fn rejects_odd_or_tiny_chains() {
        assert!(make_preset_lattice(ModelFamily::IsingChain, Shape::Chain(5)).is_err());
        assert!(make_preset_lattice(ModelFamily::IsingChain, Shape::Chain(2)).is_err());
        assert!(make_preset_lattice(ModelFamily::Dimer2d, Shape::Square(3, 3)).is_err());
    }

    #[test]
    fn j1j2_bond_counts() {
        let lat = make_preset_lattice(ModelFamily::J1j2_2d, Shape::Square(4, 4)).unwrap();
        assert_eq!(lat.num_sites, 16);
        assert_eq!(lat.count_label(BondLabel::J1), 32);
        assert_eq!(lat.count_label(BondLabel::J2), 32);
        // Each site touches 4 nearest and 4 next-nearest neighbors.
        for site in 0..16 {
            let nn = lat
                .bonds
                .iter()
                .filter(|b| b.label == BondLabel::J1 && (b.i == site || b.j == site))
                .count();
            let nnn = lat
                .bonds
                .iter()
                .filter(|b| b.label == BondLabel::J2 && (b.i == site || b.j == site))
                .count();
            assert_eq!((nn, nnn), (4, 4), "site {site}");
        }
    }

    #[test]
    fn checkerboard_bond_counts() {
        let lat = make_preset_lattice(ModelFamily::Checkerboard2d, Shape::Square(4, 4)).unwrap();
        assert_eq!(lat.count_label(BondLabel::J), 32);
        assert_eq!(lat.count_label(BondLabel::Jcross), 16);
        // Crossed plaquettes form a checkerboard: 8 plaquettes, 2 diagonals each.
        let crossed: Vec<&Bond> = lat
            .bonds
            .iter()
            .filter(|b| b.label == BondLabel::Jcross)
            .collect();
        assert_eq!(crossed.len(), 16);
    }

    #[test]
    fn dimer_bond_counts() {
        let lat = make_preset_lattice(ModelFamily::Dimer2d, Shape::Square(4, 4)).unwrap();
        assert_eq!(lat.count_label(BondLabel::Dimer), 8);
        assert_eq!(lat.count_label(BondLabel::Interdimer), 24);
        // Dimer bonds tile the lattice: every site belongs to exactly one.
        for site in 0..16 {
            let dimers = lat
                .bonds
                .iter()
                .filter(|b| b.label == BondLabel::Dimer && (b.i == site || b.j == site))
                .count();
            assert_eq!(dimers, 1, "site {site}");
        }
    }

    #[test]
    fn preset_partition_chain() {
        let lat = chain(10);
        let part = preset_partition(&lat).unwrap();
        assert_eq!(part.r_sites, vec![0, 2, 4, 6, 8]);
        assert_eq!(part.cut_bonds, 10);
        assert_eq!(part.recount_cut(&lat), 10);
    }

    #[test]
    fn preset_partition_hubbard_six() {
        let lat = make_preset_lattice(ModelFamily::HubbardChain, Shape::Chain(6)).unwrap();
        let part = preset_partition(&lat).unwrap();
        assert_eq!(part.r_sites, vec![0, 2, 4]);
        assert_eq!(part.cut_bonds, 6);
    }

    #[test]
    fn preset_partition_j1j2_cuts_only_j1() {
        let lat = make_preset_lattice(ModelFamily::J1j2_2d, Shape::Square(4, 4)).unwrap();
        let part = preset_partition(&lat).unwrap();
        assert_eq!(part.r_sites.len(), 8);
        assert_eq!(part.cut_bonds, 32);
        let mut in_r = [false; 16];
        for &s in &part.r_sites {
            in_r[s] = true;
        }
        for bond in &lat.bonds {
            let cut = in_r[bond.i] != in_r[bond.j];
            match bond.label {
                BondLabel::J1 => assert!(cut),
                BondLabel::J2 => assert!(!cut),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn auto_partition_small_chains() {
        let lat = chain(4);
        let part = auto_partition(&lat, 1_000_000).unwrap();
        assert_eq!(part.r_sites, vec![0, 2]);
        assert_eq!(part.cut_bonds, 4);

        let lat = chain(6);
        let part = auto_partition(&lat, 1_000_000).unwrap();
        assert_eq!(part.r_sites, vec![0, 2, 4]);
        assert_eq!(part.cut_bonds, 6);
    }

    #[test]
    fn auto_partition_ring_cut_equals_n() {
        for n in [4usize, 6, 8, 10] {
            let lat = chain(n);
            let part = auto_partition(&lat, 1_000_000).unwrap();
            assert_eq!(part.cut_bonds, n, "ring N={n}");
        }
    }

    #[test]
    fn auto_partition_nn_square_is_neel() {
        // Nearest-neighbor-only square: the dimer lattice carries exactly
        // the NN bonds (with two labels).
        let lat = make_preset_lattice(ModelFamily::Dimer2d, Shape::Square(4, 4)).unwrap();
        let part = auto_partition(&lat, 13_000).unwrap();
        assert_eq!(part.cut_bonds, 32);
        let neel = preset_partition(&lat).unwrap();
        assert_eq!(part.r_sites, neel.r_sites);
    }

    #[test]
    fn auto_partition_is_stable() {
        let lat = make_preset_lattice(ModelFamily::Checkerboard2d, Shape::Square(4, 4)).unwrap();
        let a = auto_partition(&lat, 13_000).unwrap();
        let b = auto_partition(&lat, 13_000).unwrap();
        assert_eq!(a.r_sites, b.r_sites);
        assert_eq!(a.cut_bonds, b.cut_bonds);
    }

    #[test]
    fn auto_partition_rejects_odd() {
        let mut lat = chain(6);
        lat.num_sites = 5;
        lat.shape = Shape::Chain(5);
        lat.bonds = (0..5)
            .map(|i| Bond {
                i,
                j: (i + 1) % 5,
                label: BondLabel::Nn,
            })
            .collect();
        assert!(auto_partition(&lat, 1_000).is_err());
    }

    #[test]
    fn greedy_path_improves_on_big_chain() {
        // N = 24 exceeds the exhaustive budget; greedy must still return a
        // valid balanced partition.
        let lat = chain(24);
        let part = auto_partition(&lat, 1_000).unwrap();
        assert_eq!(part.r_sites.len(), 12);
        assert_eq!(part.recount_cut(&lat), part.cut_bonds);
        assert_eq!(part.cut_bonds, 24);
    }

    #[test]
    fn json_round_trip() {
        let lat = make_preset_lattice(ModelFamily::J1j2_2d, Shape::Square(4, 4)).unwrap();
        let text = lat.to_json().unwrap();
        let back = Lattice::from_json(&text).unwrap();
        assert_eq!(lat, back);
    }

    #[test]
    fn json_import_rejects_bad_bonds() {
        let lat = chain(4);
        let mut broken = lat.clone();
        broken.bonds.push(Bond {
            i: 0,
            j: 9,
            label: BondLabel::Nn,
        });
        let text = serde_json::to_string(&broken).unwrap();
        assert!(Lattice::from_json(&text).is_err());
    }

    #[test]
    fn partition_override_validates() {
        let lat = chain(6);
        assert!(SublatticePartition::new(&lat, vec![0, 1, 1]).is_err());
        assert!(SublatticePartition::new(&lat, vec![0, 1, 9]).is_err());
        assert!(SublatticePartition::new(&lat, vec![]).is_err());
        let part = SublatticePartition::new(&lat, vec![0, 1, 2]).unwrap();
        assert_eq!(part.cut_bonds, 2);
        assert_eq!(part.b_sites, vec![3, 4, 5]);
    }
}
