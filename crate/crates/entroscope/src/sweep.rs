//! Parameter sweeps, finite-difference derivatives, extremum detection,
//! and transition-candidate classification.
//!
//! Each model family sweeps one canonical coupling: the transverse field
//! (Ising), the inter-dimer ratio (dimer), J2/J1, Jx/J, or V at fixed U
//! (Hubbard). Grid points are independent work items evaluated in grid
//! order (or concurrently under a rayon pool) and cached one file per
//! (model fingerprint, parameter value).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigensolver::{lanczos_lowest, SolverOptions};
use crate::entanglement::{jw_mode_entropy, sublattice_entropy};
use crate::error::{Error, Result};
use crate::gaussian_ising;
use crate::hamiltonian::{
    build_hubbard_hamiltonian, build_spin_hamiltonian, Couplings, IsingApply, ModelSpec,
};
use crate::hilbert::{
    enumerate_sector, project_even_parity, BasisKind, FullStateVector, Sector, SectorBasis,
};
use crate::lattice::{
    make_preset_lattice, preset_partition, Lattice, ModelFamily, Shape, SublatticePartition,
};

/// Largest chain the Ising exact-diagonalization path handles; longer
/// chains go through the Gaussian solver.
pub const ISING_ED_LIMIT: usize = 20;

/// Sweep definition: a preset model, the fixed couplings, the grid for the
/// family's sweep parameter, and an optional partition override.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub family: ModelFamily,
    pub shape: Shape,
    /// On-site U for the Hubbard chain; ignored elsewhere.
    pub hubbard_u: Option<f64>,
    pub grid: Vec<f64>,
    pub partition_override: Option<Vec<usize>>,
    pub solver: SolverOptions,
    pub cache_dir: Option<PathBuf>,
}

impl SweepSettings {
    pub fn new(family: ModelFamily, shape: Shape, grid: Vec<f64>) -> Self {
        SweepSettings {
            family,
            shape,
            hubbard_u: None,
            grid,
            partition_override: None,
            solver: SolverOptions::default(),
            cache_dir: None,
        }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.hubbard_u = Some(u);
        self
    }
}

/// Name of the swept coupling for a family.
pub fn sweep_parameter_name(family: ModelFamily) -> &'static str {
    match family {
        ModelFamily::IsingChain | ModelFamily::Dimer2d => "lambda",
        ModelFamily::J1j2_2d => "j2_over_j1",
        ModelFamily::Checkerboard2d => "jcross_over_j",
        ModelFamily::HubbardChain => "v",
    }
}

/// Couplings at one sweep point.
pub fn couplings_at(family: ModelFamily, hubbard_u: Option<f64>, param: f64) -> Result<Couplings> {
    Ok(match family {
        ModelFamily::IsingChain => Couplings::IsingChain { lambda: param },
        ModelFamily::Dimer2d => Couplings::Dimer2d {
            j_dimer: 1.0,
            lambda: param,
        },
        ModelFamily::J1j2_2d => Couplings::J1j2_2d {
            j1: 1.0,
            j2: param,
        },
        ModelFamily::Checkerboard2d => Couplings::Checkerboard2d {
            j: 1.0,
            j_cross: param,
        },
        ModelFamily::HubbardChain => Couplings::HubbardChain {
            t: 1.0,
            u: hubbard_u
                .ok_or_else(|| Error::Sweep("HUBBARD_CHAIN sweeps require a fixed U".into()))?,
            v: param,
        },
    })
}

/// One evaluated sweep point; also the cache payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub param: f64,
    pub energy: f64,
    pub gap: f64,
    pub entropy_bits: f64,
}

/// Sampled entropy curve with per-point diagnostics.
#[derive(Debug, Clone)]
pub struct EntropyCurve {
    pub param_name: String,
    /// Hash of the model + partition; keys the point cache.
    pub fingerprint: String,
    pub num_sites: usize,
    pub grid: Vec<f64>,
    pub entropy_bits: Vec<f64>,
    pub s_over_n: Vec<f64>,
    pub energy: Vec<f64>,
    pub gap: Vec<f64>,
    pub degenerate: Vec<bool>,
}

/// File-per-point cache under `root/<fingerprint>/`.
#[derive(Debug, Clone)]
pub struct PointCache {
    root: PathBuf,
}

impl PointCache {
    pub fn new(root: PathBuf) -> Self {
        PointCache { root }
    }

    /// Resolve the cache directory: the ENTROSCOPE_CACHE environment
    /// variable wins over the configured directory.
    pub fn resolve(configured: Option<&Path>) -> Option<PointCache> {
        if let Ok(dir) = std::env::var("ENTROSCOPE_CACHE") {
            if !dir.is_empty() {
                return Some(PointCache::new(PathBuf::from(dir)));
            }
        }
        configured.map(|p| PointCache::new(p.to_path_buf()))
    }

    fn path(&self, fingerprint: &str, param: f64) -> PathBuf {
        self.root
            .join(fingerprint)
            .join(format!("p{:016x}.json", param.to_bits()))
    }

    pub fn load(&self, fingerprint: &str, param: f64) -> Option<PointRecord> {
        let text = std::fs::read_to_string(self.path(fingerprint, param)).ok()?;
        let record: PointRecord = serde_json::from_str(&text).ok()?;
        (record.param.to_bits() == param.to_bits()).then_some(record)
    }

    /// Write-temp-then-rename so concurrent writers never expose a
    /// partial file.
    pub fn store(&self, fingerprint: &str, record: &PointRecord) -> Result<()> {
        let path = self.path(fingerprint, record.param);
        let dir = path.parent().expect("cache path has a parent");
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".tmp-p{:016x}", record.param.to_bits()));
        std::fs::write(&tmp, serde_json::to_string(record)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

/// Stable hash of the model family, lattice, fixed couplings, and
/// partition. The swept parameter is excluded, so every point of a sweep
/// shares the fingerprint.
pub fn model_fingerprint(
    family: ModelFamily,
    shape: Shape,
    hubbard_u: Option<f64>,
    partition: &SublatticePartition,
) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        family: &'static str,
        shape: String,
        hubbard_u: Option<f64>,
        r_sites: &'a [usize],
    }
    let key = Key {
        family: family.as_str(),
        shape: shape.to_string(),
        hubbard_u,
        r_sites: &partition.r_sites,
    };
    let canonical = serde_json::to_string(&key).expect("fingerprint key serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Everything fixed across the points of one sweep.
struct SweepContext {
    family: ModelFamily,
    lattice: Lattice,
    partition: SublatticePartition,
    basis: Option<SectorBasis>,
    hubbard_u: Option<f64>,
    solver: SolverOptions,
}

impl SweepContext {
    fn build(settings: &SweepSettings) -> Result<Self> {
        let lattice = make_preset_lattice(settings.family, settings.shape)?;
        let partition = match &settings.partition_override {
            Some(sites) => SublatticePartition::new(&lattice, sites.clone())?,
            None => preset_partition(&lattice)?,
        };
        let n = lattice.num_sites;
        let basis = match settings.family {
            ModelFamily::IsingChain => {
                if n <= ISING_ED_LIMIT {
                    Some(enumerate_sector(BasisKind::SpinHalf, n, Sector::Full)?)
                } else {
                    None
                }
            }
            ModelFamily::HubbardChain => Some(enumerate_sector(
                BasisKind::FermionSite4,
                n,
                Sector::UpDn(n / 2, n / 2),
            )?),
            _ => Some(enumerate_sector(BasisKind::SpinHalf, n, Sector::SzTwice(0))?),
        };
        Ok(SweepContext {
            family: settings.family,
            lattice,
            partition,
            basis,
            hubbard_u: settings.hubbard_u,
            solver: settings.solver,
        })
    }

    fn eval(&self, param: f64) -> Result<PointRecord> {
        let couplings = couplings_at(self.family, self.hubbard_u, param)?;
        let n = self.lattice.num_sites;
        match self.family {
            ModelFamily::IsingChain if n > ISING_ED_LIMIT => {
                let lambda = param;
                let state = gaussian_ising::build_kernel(n, lambda)?;
                let entropy = gaussian_ising::subsystem_entropy(&state, &self.partition.r_sites)?;
                Ok(PointRecord {
                    param,
                    energy: state.ground_energy(),
                    gap: state.even_sector_gap(),
                    entropy_bits: entropy.bits,
                })
            }
            ModelFamily::IsingChain => {
                // Exact diagonalization; the reported entropy is the
                // fermionic mode entropy of the even-parity ground state,
                // the quantity the Gaussian path extends to large N.
                let spec = ModelSpec::new(couplings, self.lattice.clone())?;
                let ground = if n <= 16 {
                    let h = build_ising(&spec)?;
                    lanczos_lowest(&h, &self.solver)?
                } else {
                    let lambda = match spec.couplings {
                        Couplings::IsingChain { lambda } => lambda,
                        _ => unreachable!(),
                    };
                    let op = IsingApply::new(lambda, n)?;
                    lanczos_lowest(&op, &self.solver)?
                };
                let mut amplitudes = ground.vector.clone();
                project_even_parity(&mut amplitudes, n);
                let full = FullStateVector {
                    kind: BasisKind::SpinHalf,
                    num_sites: n,
                    amplitudes,
                };
                let entropy = jw_mode_entropy(&full, &self.partition)?;
                Ok(PointRecord {
                    param,
                    energy: ground.energy,
                    gap: ground.gap,
                    entropy_bits: entropy.bits,
                })
            }
            ModelFamily::HubbardChain => {
                let spec = ModelSpec::new(couplings, self.lattice.clone())?;
                let basis = self.basis.as_ref().expect("hubbard basis built");
                let h = build_hubbard_hamiltonian(&spec, basis)?;
                let ground = lanczos_lowest(&h, &self.solver)?;
                let entropy = sublattice_entropy(&ground, basis, &self.partition)?;
                Ok(PointRecord {
                    param,
                    energy: ground.energy,
                    gap: ground.gap,
                    entropy_bits: entropy.bits,
                })
            }
            _ => {
                let spec = ModelSpec::new(couplings, self.lattice.clone())?;
                let basis = self.basis.as_ref().expect("spin basis built");
                let h = build_spin_hamiltonian(&spec, basis)?;
                let ground = lanczos_lowest(&h, &self.solver)?;
                let entropy = sublattice_entropy(&ground, basis, &self.partition)?;
                Ok(PointRecord {
                    param,
                    energy: ground.energy,
                    gap: ground.gap,
                    entropy_bits: entropy.bits,
                })
            }
        }
    }
}

fn build_ising(spec: &ModelSpec) -> Result<crate::hamiltonian::SparseSymMatrix> {
    crate::hamiltonian::build_ising_hamiltonian(spec)
}

/// Evaluate one parameter point outside a sweep (the CLI `point` command).
/// Shares the sweep cache.
pub fn eval_single_point(settings: &SweepSettings, param: f64) -> Result<PointRecord> {
    let ctx = SweepContext::build(settings)?;
    let fingerprint =
        model_fingerprint(ctx.family, settings.shape, ctx.hubbard_u, &ctx.partition);
    let cache = PointCache::resolve(settings.cache_dir.as_deref());
    if let Some(cache) = &cache {
        if let Some(hit) = cache.load(&fingerprint, param) {
            return Ok(hit);
        }
    }
    let record = ctx.eval(param).map_err(|e| Error::SweepPoint {
        param: sweep_parameter_name(ctx.family).into(),
        value: param,
        message: e.to_string(),
    })?;
    if let Some(cache) = &cache {
        cache.store(&fingerprint, &record)?;
    }
    Ok(record)
}

/// Run a full sweep over the grid, consulting and filling the point cache.
pub fn run_sweep(settings: &SweepSettings) -> Result<EntropyCurve> {
    if settings.grid.len() < 5 {
        return Err(Error::Sweep(format!(
            "grid needs at least 5 points, got {}",
            settings.grid.len()
        )));
    }
    if !settings.grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Sweep("grid must be strictly increasing".into()));
    }
    let ctx = SweepContext::build(settings)?;
    let fingerprint =
        model_fingerprint(ctx.family, settings.shape, ctx.hubbard_u, &ctx.partition);
    let cache = PointCache::resolve(settings.cache_dir.as_deref());

    let records: Vec<PointRecord> = settings
        .grid
        .par_iter()
        .map(|&param| {
            if let Some(cache) = &cache {
                if let Some(hit) = cache.load(&fingerprint, param) {
                    return Ok(hit);
                }
            }
            let record = ctx.eval(param).map_err(|e| Error::SweepPoint {
                param: sweep_parameter_name(ctx.family).into(),
                value: param,
                message: e.to_string(),
            })?;
            if let Some(cache) = &cache {
                cache.store(&fingerprint, &record)?;
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;

    let n = ctx.lattice.num_sites as f64;
    let curve = EntropyCurve {
        param_name: sweep_parameter_name(ctx.family).into(),
        fingerprint,
        num_sites: ctx.lattice.num_sites,
        grid: settings.grid.clone(),
        entropy_bits: records.iter().map(|r| r.entropy_bits).collect(),
        s_over_n: records.iter().map(|r| r.entropy_bits / n).collect(),
        energy: records.iter().map(|r| r.energy).collect(),
        gap: records.iter().map(|r| r.gap).collect(),
        degenerate: records
            .iter()
            .map(|r| r.gap < ctx.solver.degeneracy_tol)
            .collect(),
    };
    debug_assert!(curve.s_over_n.iter().all(|&s| s >= -1e-12));
    Ok(curve)
}

/// d(S_N/N)/dparam on the same grid: central differences inside,
/// second-order one-sided stencils at the ends.
#[derive(Debug, Clone)]
pub struct DerivativeCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn derivative(curve: &EntropyCurve) -> Result<DerivativeCurve> {
    let m = curve.grid.len();
    if m < 5 {
        return Err(Error::Sweep("derivative needs at least 5 grid points".into()));
    }
    let h = curve.grid[1] - curve.grid[0];
    for w in curve.grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-6 * h.abs() {
            return Err(Error::Sweep("derivative requires a uniform grid".into()));
        }
    }
    let f = &curve.s_over_n;
    let mut values = Vec::with_capacity(m);
    values.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h));
    for i in 1..m - 1 {
        values.push((f[i + 1] - f[i - 1]) / (2.0 * h));
    }
    values.push((3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h));
    Ok(DerivativeCurve {
        grid: curve.grid.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Curve,
    Derivative,
}

/// A transition candidate: an extremum of the curve (order 1) or of its
/// first derivative (order 2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub location: f64,
    pub order: u8,
    pub kind: ExtremumKind,
    pub prominence: f64,
    pub source: CandidateSource,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TransitionReport {
    pub candidates: Vec<Candidate>,
}

impl TransitionReport {
    pub fn order1(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.order == 1)
    }

    pub fn order2(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.order == 2)
    }
}

/// Prominence thresholds, in the units of the series they filter
/// (bits/site for the curve, bits/site per unit coupling for the
/// derivative).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionThresholds {
    pub curve_prominence: f64,
    pub derivative_prominence: f64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        DetectionThresholds {
            curve_prominence: 1e-4,
            derivative_prominence: 1e-3,
        }
    }
}

/// Topographic prominence of an interior extremum at `i`: scan outward on
/// each side until a strictly higher value (for a max) or the boundary,
/// tracking the lowest saddle passed; the prominence is the drop to the
/// higher of the two saddles.
fn prominence_at(values: &[f64], i: usize, maximum: bool) -> f64 {
    let sign = if maximum { 1.0 } else { -1.0 };
    let peak = sign * values[i];
    let mut saddles = [f64::NEG_INFINITY; 2];
    for (slot, range) in [
        (0, (0..i).rev().collect::<Vec<_>>()),
        (1, (i + 1..values.len()).collect::<Vec<_>>()),
    ] {
        let mut lowest = peak;
        for k in range {
            let v = sign * values[k];
            if v > peak {
                break;
            }
            lowest = lowest.min(v);
        }
        saddles[slot] = lowest;
    }
    peak - saddles[0].max(saddles[1])
}

fn interior_extrema(grid: &[f64], values: &[f64], threshold: f64) -> Vec<(f64, ExtremumKind, f64)> {
    let mut out = Vec::new();
    for i in 1..values.len() - 1 {
        let (is_max, is_min) = (
            values[i] > values[i - 1] && values[i] > values[i + 1],
            values[i] < values[i - 1] && values[i] < values[i + 1],
        );
        if !is_max && !is_min {
            continue;
        }
        let prom = prominence_at(values, i, is_max);
        if prom >= threshold {
            let kind = if is_max {
                ExtremumKind::Max
            } else {
                ExtremumKind::Min
            };
            out.push((grid[i], kind, prom));
        }
    }
    out
}

/// Classify extrema of the curve (order 1) and of its derivative
/// (order 2). A derivative extremum within one grid step of a curve
/// extremum is suppressed in favor of the order-1 candidate.
pub fn detect_transitions(
    curve: &EntropyCurve,
    deriv: &DerivativeCurve,
    thresholds: &DetectionThresholds,
) -> TransitionReport {
    let step = if curve.grid.len() > 1 {
        curve.grid[1] - curve.grid[0]
    } else {
        0.0
    };
    let curve_hits = interior_extrema(&curve.grid, &curve.s_over_n, thresholds.curve_prominence);
    // Endpoint stencil values are excluded from detection: scan the
    // interior of the derivative series.
    let deriv_hits = interior_extrema(&deriv.grid, &deriv.values, thresholds.derivative_prominence);

    let mut candidates: Vec<Candidate> = curve_hits
        .iter()
        .map(|&(location, kind, prominence)| Candidate {
            location,
            order: 1,
            kind,
            prominence,
            source: CandidateSource::Curve,
        })
        .collect();
    for (location, kind, prominence) in deriv_hits {
        let near_order1 = curve_hits
            .iter()
            .any(|&(loc1, _, _)| (location - loc1).abs() <= step * (1.0 + 1e-9));
        if near_order1 {
            continue;
        }
        candidates.push(Candidate {
            location,
            order: 2,
            kind,
            prominence,
            source: CandidateSource::Derivative,
        });
    }
    candidates.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
    TransitionReport { candidates }
}

/// One row of the Hubbard phase-boundary table: the order-1 candidate and
/// the order-2 candidates flanking it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseBoundaryRow {
    pub u: f64,
    pub order1_v: Option<f64>,
    pub order2_below: Option<f64>,
    pub order2_above: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseBoundaryTable {
    pub num_sites: usize,
    pub rows: Vec<PhaseBoundaryRow>,
}

/// Fixed-U scans over V for each U in the list.
pub fn hubbard_phase_scan(
    u_values: &[f64],
    v_grid: &[f64],
    num_sites: usize,
    solver: SolverOptions,
    cache_dir: Option<PathBuf>,
    thresholds: &DetectionThresholds,
) -> Result<PhaseBoundaryTable> {
    let mut rows = Vec::with_capacity(u_values.len());
    for &u in u_values {
        let mut settings = SweepSettings::new(
            ModelFamily::HubbardChain,
            Shape::Chain(num_sites),
            v_grid.to_vec(),
        )
        .with_u(u);
        settings.solver = solver;
        settings.cache_dir = cache_dir.clone();
        let curve = run_sweep(&settings)?;
        let deriv = derivative(&curve)?;
        let report = detect_transitions(&curve, &deriv, thresholds);
        let order1 = report
            .order1()
            .filter(|c| c.kind == ExtremumKind::Max)
            .max_by(|a, b| a.prominence.partial_cmp(&b.prominence).unwrap())
            .map(|c| c.location);
        let (mut below, mut above) = (None::<f64>, None::<f64>);
        if let Some(v1) = order1 {
            for c in report.order2() {
                if c.location < v1 && below.is_none_or(|b: f64| c.location > b) {
                    below = Some(c.location);
                }
                if c.location > v1 && above.is_none_or(|a: f64| c.location < a) {
                    above = Some(c.location);
                }
            }
        }
        rows.push(PhaseBoundaryRow {
            u,
            order1_v: order1,
            order2_below: below,
            order2_above: above,
        });
    }
    Ok(PhaseBoundaryTable { num_sites, rows })
}

/// Uniform inclusive grid `start, start + step, ..` up to `stop`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || step.is_nan() || !start.is_finite() || !stop.is_finite() || stop <= start {
        return Err(Error::Sweep(format!(
            "invalid grid {start}:{stop}:{step}"
        )));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_curve(grid: Vec<f64>, s_over_n: Vec<f64>) -> EntropyCurve {
        let n = 10usize;
        let m = grid.len();
        EntropyCurve {
            param_name: "x".into(),
            fingerprint: "test".into(),
            num_sites: n,
            entropy_bits: s_over_n.iter().map(|s| s * n as f64).collect(),
            s_over_n,
            energy: vec![0.0; m],
            gap: vec![1.0; m],
            degenerate: vec![false; m],
            grid,
        }
    }

    #[test]
    fn central_difference_exact_for_quadratics() {
        let grid = uniform_grid(0.0, 2.0, 0.1).unwrap();
        let curve = synthetic_curve(grid.clone(), grid.iter().map(|x| x * x).collect());
        let d = derivative(&curve).unwrap();
        let at_one = d
            .grid
            .iter()
            .position(|&x| (x - 1.0).abs() < 1e-12)
            .unwrap();
        assert!((d.values[at_one] - 2.0).abs() < 1e-12);
        // One-sided endpoint stencils are also exact on quadratics.
        assert!(d.values[0].abs() < 1e-12);
        assert!((d.values.last().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_curve_has_zero_derivative() {
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let curve = synthetic_curve(grid, vec![0.7; 11]);
        let d = derivative(&curve).unwrap();
        assert!(d.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn derivative_rejects_bad_grids() {
        let curve = synthetic_curve(vec![0.0, 0.1, 0.2], vec![0.0; 3]);
        assert!(derivative(&curve).is_err());
        let curve = synthetic_curve(vec![0.0, 0.1, 0.3, 0.4, 0.5], vec![0.0; 5]);
        assert!(derivative(&curve).is_err());
    }

    #[test]
    fn detects_single_peak() {
        let grid = uniform_grid(0.0, 0.4, 0.1).unwrap();
        let curve = synthetic_curve(grid, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let d = derivative(&curve).unwrap();
        let report = detect_transitions(&curve, &d, &DetectionThresholds::default());
        let order1: Vec<_> = report.order1().collect();
        assert_eq!(order1.len(), 1);
        assert!((order1[0].location - 0.2).abs() < 1e-12);
        assert_eq!(order1[0].kind, ExtremumKind::Max);
    }

    #[test]
    fn suppresses_derivative_candidates_near_curve_extrema() {
        // A sharp peak makes the derivative swing max->min right around
        // it; those must be suppressed in favor of the order-1 candidate.
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let s: Vec<f64> = grid
            .iter()
            .map(|&x| (-((x - 0.5) * (x - 0.5)) / 0.002).exp())
            .collect();
        let curve = synthetic_curve(grid, s);
        let d = derivative(&curve).unwrap();
        let report = detect_transitions(&curve, &d, &DetectionThresholds::default());
        assert_eq!(report.order1().count(), 1);
        for c in report.order2() {
            assert!((c.location - 0.5).abs() > 0.1 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn scale_invariance_of_detection() {
        let grid = uniform_grid(0.0, 1.0, 0.05).unwrap();
        let s: Vec<f64> = grid
            .iter()
            .map(|&x| 0.3 * (6.0 * x).sin() + x * x)
            .collect();
        let base = synthetic_curve(grid.clone(), s.clone());
        let d_base = derivative(&base).unwrap();
        let thresholds = DetectionThresholds::default();
        let report_base = detect_transitions(&base, &d_base, &thresholds);

        let c = 37.5;
        let scaled = synthetic_curve(grid, s.iter().map(|v| v * c).collect());
        let d_scaled = derivative(&scaled).unwrap();
        let scaled_thresholds = DetectionThresholds {
            curve_prominence: thresholds.curve_prominence * c,
            derivative_prominence: thresholds.derivative_prominence * c,
        };
        let report_scaled = detect_transitions(&scaled, &d_scaled, &scaled_thresholds);

        assert_eq!(report_base.candidates.len(), report_scaled.candidates.len());
        for (a, b) in report_base
            .candidates
            .iter()
            .zip(&report_scaled.candidates)
        {
            assert_eq!(a.location.to_bits(), b.location.to_bits());
            assert_eq!(a.order, b.order);
            assert_eq!(a.kind, b.kind);
        }
    }

    #[test]
    fn trapezoid_integral_reconstructs_curve() {
        let grid = uniform_grid(0.0, 1.0, 0.02).unwrap();
        let s: Vec<f64> = grid.iter().map(|&x| (3.0 * x).cos() * 0.2 + 0.5).collect();
        let curve = synthetic_curve(grid.clone(), s.clone());
        let d = derivative(&curve).unwrap();
        let h = 0.02;
        let mut integral = s[0];
        let mut worst = 0.0f64;
        for (i, target) in s.iter().enumerate().skip(1) {
            integral += 0.5 * h * (d.values[i - 1] + d.values[i]);
            worst = worst.max((integral - target).abs());
        }
        // Second-order bound: 2h * max |f''| with f'' ~ 0.2 * 9.
        assert!(worst <= 2.0 * h * 1.8, "reconstruction error {worst}");
    }

    #[test]
    fn prominence_filters_ripple() {
        let grid = uniform_grid(0.0, 0.8, 0.1).unwrap();
        let mut s = vec![0.5; 9];
        s[4] += 1e-6; // below the 1e-4 curve threshold
        let curve = synthetic_curve(grid, s);
        let d = derivative(&curve).unwrap();
        let report = detect_transitions(&curve, &d, &DetectionThresholds::default());
        assert!(report.order1().next().is_none());
    }

    #[test]
    fn uniform_grid_counts() {
        let g = uniform_grid(0.0, 2.0, 0.02).unwrap();
        assert_eq!(g.len(), 101);
        assert!((g[100] - 2.0).abs() < 1e-12);
        assert!(uniform_grid(1.0, 0.0, 0.1).is_err());
        assert!(uniform_grid(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn ising_sweep_small_grid_runs_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let grid = uniform_grid(0.8, 1.2, 0.1).unwrap();
        let mut settings =
            SweepSettings::new(ModelFamily::IsingChain, Shape::Chain(8), grid.clone());
        settings.cache_dir = Some(dir.path().to_path_buf());
        let first = run_sweep(&settings).unwrap();
        assert_eq!(first.grid.len(), 5);
        assert!(first.s_over_n.iter().all(|&s| s > 0.0));
        // Cached rerun is byte-identical.
        let second = run_sweep(&settings).unwrap();
        for (a, b) in first.entropy_bits.iter().zip(&second.entropy_bits) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // The cache directory holds one file per point.
        let fp_dir = dir.path().join(&first.fingerprint);
        assert_eq!(std::fs::read_dir(fp_dir).unwrap().count(), 5);
    }

    #[test]
    fn single_point_agrees_with_sweep_cache() {
        let dir = tempfile::tempdir().unwrap();
        let grid = uniform_grid(0.5, 0.9, 0.1).unwrap();
        let mut settings =
            SweepSettings::new(ModelFamily::IsingChain, Shape::Chain(8), grid.clone());
        settings.cache_dir = Some(dir.path().to_path_buf());
        let curve = run_sweep(&settings).unwrap();
        let point = eval_single_point(&settings, 0.7).unwrap();
        let idx = grid.iter().position(|&x| (x - 0.7).abs() < 1e-12).unwrap();
        assert_eq!(point.entropy_bits.to_bits(), curve.entropy_bits[idx].to_bits());
    }

    #[test]
    fn parity_doublet_flags_degenerate_points() {
        // Below lambda ~ 0.25 the Ising ring's parity splitting drops
        // under the default degeneracy tolerance.
        let grid = uniform_grid(0.05, 0.45, 0.1).unwrap();
        let settings = SweepSettings::new(ModelFamily::IsingChain, Shape::Chain(10), grid);
        let curve = run_sweep(&settings).unwrap();
        assert!(curve.degenerate[0], "gap {} not flagged", curve.gap[0]);
        assert!(!curve.degenerate[4], "gap {} wrongly flagged", curve.gap[4]);
    }

    #[test]
    fn gaussian_path_engages_beyond_ed_limit() {
        let grid = uniform_grid(0.9, 1.1, 0.05).unwrap();
        let settings = SweepSettings::new(ModelFamily::IsingChain, Shape::Chain(40), grid);
        let curve = run_sweep(&settings).unwrap();
        assert_eq!(curve.num_sites, 40);
        assert!(curve.s_over_n.iter().all(|&s| s > 0.0 && s < 0.6));
    }

    #[test]
    fn sweep_error_names_parameter_value() {
        // An unreachable Hubbard U triggers a per-point error.
        let grid = uniform_grid(0.0, 0.4, 0.1).unwrap();
        let settings =
            SweepSettings::new(ModelFamily::HubbardChain, Shape::Chain(6), grid);
        let err = run_sweep(&settings).unwrap_err();
        assert!(err.to_string().contains('v') || err.to_string().contains("U"));
    }
}
