use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fermistab::filter::{BumpFilter, RewriteOptions};
use fermistab::{doubling, io, lab, quadratic, Boundary, Error, ModelSpec, PerturbationKind, Quadratic64};

#[derive(Parser)]
#[command(name = "fermistab", version, about = "Free-fermion gap stability laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model construction.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Write σ(A) and |A| next to OUT and print the flattening summary.
    Flatten {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write diag(A, -A) (and optionally the orthogonal map O).
    Double {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        orthogonal: Option<PathBuf>,
    },
    /// Print the single-particle gap 4·min|eig A|.
    Gap { input: PathBuf },
    /// Write the sorted many-body spectrum as CSV.
    FockSpectrum {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an exponential envelope to A, σ(A) or |A| and print it as JSON.
    DecayFit {
        input: PathBuf,
        #[arg(long = "of", value_enum)]
        of: Target,
        /// Certify at this rate instead of fitting one.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Run a gap sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        plot: bool,
    },
    /// Site-by-site filter rewrite of H^empty + J V on the doubled model.
    FilterDemo {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "J")]
        j: f64,
        #[arg(long, value_enum, default_value_t = KindArg::Quartic)]
        kind: KindArg,
        /// Decay rate of the perturbation.
        #[arg(long = "rate", default_value_t = 1.0)]
        rate: f64,
        #[arg(long, default_value_t = 0.5)]
        halfwidth: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Kitaev,
    Pip2d,
    Atomic,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Open,
    Periodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    #[value(name = "A")]
    A,
    Sigma,
    #[value(name = "absA")]
    AbsA,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Quadratic,
    Quartic,
    Mixed,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long = "L")]
    size: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Pairing amplitude.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = Bc::Open)]
    bc: Bc,
    #[arg(long, default_value_t = 1)]
    dims: usize,
    /// Majorana modes per site for random models.
    #[arg(long, default_value_t = 2)]
    modes: usize,
    #[arg(long = "K", default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

impl ModelArgs {
    fn spec(&self) -> std::result::Result<ModelSpec, Failure> {
        let bc = match self.bc {
            Bc::Open => Boundary::Open,
            Bc::Periodic => Boundary::Periodic,
        };
        Ok(match self.model {
            ModelKind::Kitaev => ModelSpec::Kitaev { size: self.size, t: self.t, delta: self.delta, mu: self.mu, bc },
            ModelKind::Pip2d => ModelSpec::Pip2d { size: self.size, t: self.t, delta: self.delta, mu: self.mu, bc },
            ModelKind::Atomic => ModelSpec::Atomic { dims: self.dims, size: self.size, mu: self.mu, bc },
            ModelKind::Random => ModelSpec::Random {
                dims: self.dims,
                size: self.size,
                modes: self.modes,
                amplitude: self.amplitude,
                rate: self.nu,
                seed: self.seed.ok_or_else(|| Failure::Usage("--seed is required for random models".into()))?,
                bc,
            },
        })
    }

    /// Invalid parameters are usage errors here, not library failures.
    fn build(&self) -> std::result::Result<Quadratic64, Failure> {
        self.spec()?.build().map_err(|e| match e {
            Error::InvalidArgument(_) | Error::Lattice(_) => Failure::Usage(e.to_string()),
            other => Failure::Lib(other),
        })
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}_{suffix}{ext}"))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Model(ModelCommand::Build { model, out }) => {
            let h = model.build()?;
            io::write_quadratic(&out, &h)?;
            let gap = match h.single_particle_gap() {
                Ok(g) => Some(g),
                Err(Error::Gapless { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            print_json(&json!({
                "out": out,
                "lattice": h.lattice(),
                "modes": h.num_modes(),
                "gap": gap,
            }));
        }
        Command::Flatten { input, out } => {
            let h = io::read_quadratic(&input)?;
            let flat = h.flatten()?;
            let (sign_path, abs_path) = (with_suffix(&out, "sigma"), with_suffix(&out, "abs"));
            io::write_matrix(&sign_path, &flat.sign, h.lattice())?;
            io::write_matrix(&abs_path, &flat.abs, h.lattice())?;
            let sq = flat.sign.dot(&flat.sign);
            let residual =
                (&sq - &fermistab::linalg::identity::<f64>(h.num_modes())).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            print_json(&json!({
                "gap": flat.gap(),
                "sigma": sign_path,
                "abs": abs_path,
                "sign_squared_residual": residual,
            }));
        }
        Command::Double { input, out, orthogonal } => {
            let h = io::read_quadratic(&input)?;
            let d = doubling::double(&h);
            io::write_quadratic(&out, &d)?;
            let (lhs, rhs) = doubling::flatten_conjugate(&h)?;
            let residual = (&lhs - &rhs).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if let Some(path) = &orthogonal {
                let o = doubling::build_o_ff(&h)?;
                io::write_matrix(path, &fermistab::linalg::to_complex(&o), d.lattice())?;
            }
            print_json(&json!({
                "out": out,
                "modes": d.num_modes(),
                "flatten_residual": residual,
                "orthogonal": orthogonal,
            }));
        }
        Command::Gap { input } => {
            let h = io::read_quadratic(&input)?;
            println!("{}", h.single_particle_gap()?);
        }
        Command::FockSpectrum { input, out } => {
            let h = io::read_quadratic(&input)?;
            let spec = fermistab::fock::quadratic_to_fock(&h)?.spectrum()?;
            io::write_spectrum_csv(&out, spec.as_slice().expect("contiguous spectrum"))?;
            print_json(&json!({ "out": out, "dim": spec.len(), "ground": spec[0] }));
        }
        Command::DecayFit { input, of, rate } => {
            let h = io::read_quadratic(&input)?;
            let lat = h.lattice();
            let m = match of {
                Target::A => h.matrix().clone(),
                Target::Sigma => h.sign_matrix()?,
                Target::AbsA => h.abs_matrix()?,
            };
            let profile = match rate {
                Some(r) => quadratic::envelope_at_rate(&m, lat, r)?,
                None => quadratic::fit_decay(&m, lat)?,
            };
            println!("{}", serde_json::to_string(&profile).map_err(Error::from)?);
        }
        Command::Sweep { config, out, jobs, plot } => {
            let cfg: lab::ExperimentConfig = io::read_json(&config)?;
            let res = cfg.run(jobs)?;
            fs::create_dir_all(&out).map_err(Error::from)?;
            lab::write_rows_csv(&out.join("sweep.csv"), &res.rows)?;
            let summary = lab::summarize(&res);
            io::write_json(&out.join("summary.json"), &summary)?;
            if plot {
                let fit = lab::fit_c1(&res).ok();
                fs::write(out.join("sweep.svg"), lab::render_svg(&res, fit.as_ref())).map_err(Error::from)?;
            }
            print_json(&json!({
                "rows": res.rows.len(),
                "delta": res.delta,
                "c1": summary.c1,
                "J0_observed": summary.j0_observed,
                "out": out,
            }));
        }
        Command::FilterDemo { model, j, kind, rate, halfwidth, json: json_out } => {
            let h = model.build()?;
            let kind = match kind {
                KindArg::Quadratic => PerturbationKind::Quadratic,
                KindArg::Quartic => PerturbationKind::Quartic,
                KindArg::Mixed => PerturbationKind::Mixed,
            };
            let seed = model.seed.ok_or_else(|| Failure::Usage("--seed is required".into()))?;
            let filter = BumpFilter::new(halfwidth).map_err(|e| Failure::Usage(e.to_string()))?;
            let setup = lab::filter_setup(&h, kind, rate, seed)?;
            let opts = RewriteOptions { filter, ..Default::default() };
            let report = lab::filter_demo(&setup, j, &opts)?;
            println!("site  |X_u|  |[X_u,P]|  |[M_u,P0]|");
            for s in &report.sites {
                println!("{:4}  {:.3e}  {:.3e}  {:.3e}", s.site, s.x_norm, s.x_commutator, s.m_commutator);
            }
            println!("gap H0 {:.6}  gap Hs {:.6}  rotation {:.3e}", report.gap_h0, report.gap_hs, report.rotation);
            println!("resummation H0 {:.3e}  Hs {:.3e}", report.resummation_h0, report.resummation_hs);
            println!("max |X_u| {:.6e}", report.max_x_norm());
            if let Some(path) = json_out {
                io::write_json(&path, &report)?;
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Gapless { .. } => 3,
        Error::DimensionOverflow { .. } => 4,
        Error::GapTooSmall { .. } => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
