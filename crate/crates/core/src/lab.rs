//! Gap-stability experiments: sweeps of the many-body gap over perturbation
//! strength, an empirical linear envelope `gap ≥ Δ - c₁ J`, the two-copy
//! sumset check, and decay-versus-gap studies.
//!
//! The harness is double precision only.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doubling;
use crate::error::{Error, Result};
use crate::filter::{ground_data, rewrite_decomposition, FilterReport, RewriteOptions};
use crate::fock::{FockOperator, FockSpace};
use crate::lattice::{Boundary, Lattice};
use crate::locality::{
    decompose_polynomial, generate_perturbation, per_site_split, PerturbationKind, PerturbationSpec,
};
use crate::models::{self, ModelSpec};
use crate::quadratic::{self, block_diag, MajoranaQuadratic};
use crate::scalar::CMatrix;

type Quadratic = MajoranaQuadratic<f64>;

/// Which Hamiltonian the perturbation is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `H_FF + V`.
    Single,
    /// `H_doub + V`, with `V` acting on both copies.
    Doubled,
    /// `H^empty + V` on the doubled modes.
    Empty,
    /// `H_doub + V` with `V` generated on the single system and acting on
    /// copy 1 only.
    DoubledCopyOne,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Single => "single",
            Self::Doubled => "doubled",
            Self::Empty => "empty",
            Self::DoubledCopyOne => "doubled_copy_one",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowFlag {
    Ok,
    /// Ground state degenerate within the degeneracy tolerance.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub seed: u64,
    #[serde(rename = "J")]
    pub j: f64,
    pub kind: PerturbationKind,
    pub gap: f64,
    pub delta: f64,
    pub flag: RowFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub target: Target,
    pub kind: PerturbationKind,
    /// Decay rate `μ` of the generated perturbations.
    pub mu: f64,
    #[serde(rename = "J_grid")]
    pub j_grid: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// A sweep together with the model it runs on; the JSON config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: ModelSpec,
    #[serde(flatten)]
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn run(&self, jobs: usize) -> Result<SweepResult> {
        gap_sweep(self.system.name(), &self.system.build()?, &self.sweep, jobs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: String,
    pub lattice: Lattice,
    pub config: SweepConfig,
    pub delta: f64,
    pub rows: Vec<SweepRow>,
}

fn degenerate(gap: f64) -> bool {
    gap < crate::filter::DEGENERACY_TOL
}

struct Setup {
    space: FockSpace,
    hamiltonian: CMatrix<f64>,
    perturbation_lattice: Lattice,
}

fn setup(h: &Quadratic, target: Target) -> Result<Setup> {
    match target {
        Target::Single => {
            let space = FockSpace::new(h.lattice())?;
            let hamiltonian = space.quadratic(h)?.into_matrix();
            Ok(Setup { space, hamiltonian, perturbation_lattice: h.lattice().clone() })
        }
        Target::Doubled | Target::DoubledCopyOne | Target::Empty => {
            let d = doubling::double(h);
            let space = FockSpace::new(d.lattice())?;
            let hamiltonian = if target == Target::Empty {
                space.empty_band(&doubling::empty_band(h)?.t)?.into_matrix()
            } else {
                space.quadratic(&d)?.into_matrix()
            };
            let perturbation_lattice =
                if target == Target::DoubledCopyOne { h.lattice().clone() } else { d.lattice().clone() };
            Ok(Setup { space, hamiltonian, perturbation_lattice })
        }
    }
}

/// Unit-strength perturbation (`J = 1`) for one seed, as a dense matrix.
fn unit_perturbation(setup: &Setup, cfg: &SweepConfig, seed: u64) -> Result<CMatrix<f64>> {
    let spec = PerturbationSpec { strength: 1.0, rate: cfg.mu, kind: cfg.kind, seed };
    let sym = generate_perturbation::<f64>(&spec, &setup.perturbation_lattice)?;
    Ok(sym.to_decomposition(&setup.space)?.total().into_matrix())
}

fn many_body_gap(m: &CMatrix<f64>) -> Result<f64> {
    FockOperator::from_matrix(m.clone())?.gap()
}

/// Diagonalizes `target + J V_seed` for every `(J, seed)` on a pool of `jobs`
/// threads. Rows come back sorted by `(J, seed)` whatever the completion order.
pub fn gap_sweep(model: &str, h: &Quadratic, cfg: &SweepConfig, jobs: usize) -> Result<SweepResult> {
    let delta = h.single_particle_gap()?;
    let setup = setup(h, cfg.target)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let rows = pool.install(|| -> Result<Vec<SweepRow>> {
        let perturbations: Vec<(u64, CMatrix<f64>)> = cfg
            .seeds
            .par_iter()
            .map(|&seed| Ok((seed, unit_perturbation(&setup, cfg, seed)?)))
            .collect::<Result<_>>()?;
        let points: Vec<(f64, usize)> =
            cfg.j_grid.iter().flat_map(|&j| (0..perturbations.len()).map(move |s| (j, s))).collect();
        points
            .par_iter()
            .map(|&(j, s)| {
                let (seed, v) = &perturbations[s];
                let total = &setup.hamiltonian + &v.mapv(|z| z * j);
                let gap = many_body_gap(&total)?;
                Ok(SweepRow {
                    model: model.to_string(),
                    seed: *seed,
                    j,
                    kind: cfg.kind,
                    gap,
                    delta,
                    flag: if degenerate(gap) { RowFlag::Degenerate } else { RowFlag::Ok },
                })
            })
            .collect()
    })?;
    let mut rows = rows;
    rows.sort_by(|a, b| a.j.total_cmp(&b.j).then(a.seed.cmp(&b.seed)));
    Ok(SweepResult { model: model.to_string(), lattice: h.lattice().clone(), config: cfg.clone(), delta, rows })
}

/// Empirical linear envelope of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Fit {
    /// `max_{J>0} (Δ - gap)/J`: the tightest line through `(0, Δ)` below
    /// every row. An empirical envelope, not a proven constant.
    pub c1: f64,
    /// Largest `J` whose smallest gap over seeds exceeds `Δ/2`.
    #[serde(rename = "J0_observed")]
    pub j0_observed: f64,
    /// Indices of rows on the envelope line.
    pub envelope_rows: Vec<usize>,
}

pub fn fit_c1(res: &SweepResult) -> Result<C1Fit> {
    let mut js: Vec<f64> = res.rows.iter().map(|r| r.j).collect();
    js.sort_by(f64::total_cmp);
    js.dedup();
    if js.len() < 3 {
        return Err(Error::Fit { usable: js.len() });
    }
    let slope = |r: &SweepRow| (res.delta - r.gap) / r.j;
    let c1 = res.rows.iter().filter(|r| r.j > 0.0).map(slope).fold(f64::NEG_INFINITY, f64::max);
    let envelope_rows =
        res.rows.iter().enumerate().filter(|(_, r)| r.j > 0.0 && slope(r) == c1).map(|(i, _)| i).collect();
    let j0_observed = js
        .iter()
        .copied()
        .filter(|&j| {
            res.rows.iter().filter(|r| r.j == j).map(|r| r.gap).fold(f64::INFINITY, f64::min) > res.delta / 2.0
        })
        .fold(0.0, f64::max);
    Ok(C1Fit { c1, j0_observed, envelope_rows })
}

/// JSON summary written next to the sweep CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub model: String,
    pub lattice: Lattice,
    pub config: SweepConfig,
    pub delta: f64,
    pub rows: usize,
    pub c1: Option<f64>,
    #[serde(rename = "J0_observed")]
    pub j0_observed: Option<f64>,
    pub envelope_rows: Vec<usize>,
    pub c1_method: String,
    pub generated_unix: u64,
}

pub fn summarize(res: &SweepResult) -> SweepSummary {
    let fit = fit_c1(res).ok();
    SweepSummary {
        model: res.model.clone(),
        lattice: res.lattice.clone(),
        config: res.config.clone(),
        delta: res.delta,
        rows: res.rows.len(),
        c1: fit.as_ref().map(|f| f.c1),
        j0_observed: fit.as_ref().map(|f| f.j0_observed),
        envelope_rows: fit.map(|f| f.envelope_rows).unwrap_or_default(),
        c1_method: "empirical envelope: max over J > 0 of (delta - gap) / J".into(),
        generated_unix: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    }
}

/// CSV with header `model,seed,J,kind,gap,delta,flag`.
pub fn write_rows_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Scatter of gap against `J` with the line `Δ - c₁ J`.
pub fn render_svg(res: &SweepResult, fit: Option<&C1Fit>) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let jmax = res.rows.iter().map(|r| r.j).fold(0.0, f64::max).max(1e-12);
    let gmax = res.rows.iter().map(|r| r.gap).fold(res.delta, f64::max) * 1.05;
    let gmin = res.rows.iter().map(|r| r.gap).fold(0.0, f64::min);
    let x = |j: f64| pad + (w - 2.0 * pad) * j / jmax;
    let y = |g: f64| h - pad - (h - 2.0 * pad) * (g - gmin) / (gmax - gmin).max(1e-12);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{ty}\" text-anchor=\"middle\" font-size=\"14\">J (max {jmax})</text>\n\
         <text x=\"14\" y=\"{cy}\" font-size=\"14\" transform=\"rotate(-90 14 {cy})\">gap</text>\n",
        b = h - pad,
        r = w - pad,
        cx = w / 2.0,
        ty = h - 12.0,
        cy = h / 2.0,
    );
    for row in &res.rows {
        let color = if row.flag == RowFlag::Ok { "steelblue" } else { "crimson" };
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.6\"/>\n",
            x(row.j),
            y(row.gap)
        ));
    }
    if let Some(fit) = fit {
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"darkorange\" stroke-width=\"2\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"darkorange\">delta - {:.4} J</text>\n",
            x(0.0),
            y(res.delta),
            x(jmax),
            y(res.delta - fit.c1 * jmax),
            x(jmax * 0.6),
            y(res.delta) - 8.0,
            fit.c1
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Largest deviation between the sorted many-body spectrum of the
/// non-interacting join of `h1` and `h2` and the sorted sumset of their
/// individual spectra. Both must live on the same lattice geometry.
pub fn sumset_check(h1: &Quadratic, h2: &Quadratic) -> Result<f64> {
    let (l1, l2) = (h1.lattice(), h2.lattice());
    if l1.dims() != l2.dims() || l1.size() != l2.size() || l1.boundary() != l2.boundary() {
        return Err(Error::InvalidArgument("sumset check needs the same lattice geometry".into()));
    }
    let joined_lat = Lattice::new(l1.dims(), l1.size(), l1.boundary(), l1.modes_per_site() + l2.modes_per_site())?;
    let joined_space = FockSpace::new(&joined_lat)?;
    let joined = MajoranaQuadratic::new(joined_lat, block_diag(&[h1.matrix(), h2.matrix()]))?;
    let s1 = FockSpace::new(l1)?.quadratic(h1)?.spectrum()?;
    let s2 = FockSpace::new(l2)?.quadratic(h2)?.spectrum()?;
    let mut sumset: Vec<f64> = s1.iter().flat_map(|a| s2.iter().map(move |b| a + b)).collect();
    sumset.sort_by(f64::total_cmp);
    let direct = joined_space.quadratic(&joined)?.spectrum()?;
    Ok(direct.iter().zip(&sumset).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    /// Requested gap.
    pub target: f64,
    /// Measured single-particle gap.
    pub delta: f64,
    pub nu_sigma: f64,
    #[serde(rename = "nu_T")]
    pub nu_t: f64,
}

/// Fitted decay rates of `σ(A)` and `T = 4|A|` for each member of a family
/// indexed by its intended gap.
pub fn decay_vs_gap_study<F>(family: F, gaps: &[f64]) -> Result<Vec<DecayRow>>
where
    F: Fn(f64) -> Result<Quadratic>,
{
    gaps.iter()
        .map(|&g| {
            let h = family(g)?;
            let flat = h.flatten()?;
            let t: Array2<_> = flat.abs.mapv(|z| z * 4.0);
            Ok(DecayRow {
                target: g,
                delta: flat.gap(),
                nu_sigma: quadratic::fit_decay(&flat.sign, h.lattice())?.rate,
                nu_t: quadratic::fit_decay(&t, h.lattice())?.rate,
            })
        })
        .collect()
}

/// Trivial-phase Kitaev chains `t = Δp = 1`, `μ = 2 + Δ`, whose gap is `Δ`.
pub fn kitaev_family(size: usize, boundary: Boundary) -> impl Fn(f64) -> Result<Quadratic> {
    move |gap| models::kitaev_chain(size, 1.0, 1.0, 2.0 + gap, boundary)
}

/// Inputs of [`filter_demo`] on the doubled system.
#[derive(Debug, Clone)]
pub struct FilterSetup {
    pub space: FockSpace,
    /// Site pieces of `H^empty = Σ ψ† T ψ`.
    pub h0: BTreeMap<usize, FockOperator<f64>>,
    /// Site pieces of the unit-strength perturbation.
    pub v: BTreeMap<usize, FockOperator<f64>>,
}

/// Splits the empty-band Hamiltonian of `h` and a unit-strength perturbation
/// with the given seed into per-site pieces on the doubled lattice.
pub fn filter_setup(h: &Quadratic, kind: PerturbationKind, rate: f64, seed: u64) -> Result<FilterSetup> {
    let d = doubling::double(h);
    let lat = d.lattice().clone();
    let space = FockSpace::new(&lat)?;
    let t = doubling::empty_band(h)?.t;
    let h0_dec = decompose_polynomial(&space, &space.empty_band_polynomial(&t)?)?;
    let spec = PerturbationSpec { strength: 1.0, rate, kind, seed };
    let v_dec = generate_perturbation::<f64>(&spec, &lat)?.to_decomposition(&space)?;
    Ok(FilterSetup { h0: per_site_split(&lat, &h0_dec), v: per_site_split(&lat, &v_dec), space })
}

/// Rewrites `H^empty + J V` site by site. Both `H^empty` and the perturbed
/// Hamiltonian must have gap at least twice the filter half width.
pub fn filter_demo(setup: &FilterSetup, j: f64, opts: &RewriteOptions) -> Result<FilterReport> {
    let dim = setup.space.dim();
    let mut h0 = FockOperator::zero(dim);
    let mut v = FockOperator::zero(dim);
    setup.h0.values().for_each(|op| h0.add_assign(op));
    setup.v.values().for_each(|op| v.add_assign(op));
    let hs = h0.plus(&v.scaled(num_complex::Complex::new(j, 0.0)));
    let required = 2.0 * opts.filter.half_width;
    for op in [&h0, &hs] {
        let gap = ground_data(op, opts.degeneracy)?.gap;
        if gap < required {
            return Err(Error::GapTooSmall { gap, required });
        }
    }
    Ok(rewrite_decomposition(&setup.h0, &setup.v, j, opts)?.report)
}
