use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spherical_radon::geometry::weak_stability_audit;
use spherical_radon::harmonic::InversionOptions;
use spherical_radon::harness::{
    add_noise, compare_streaks, execute, invert_prepared, make_phantom, palamodov_check, prepare, run_experiment, write_report,
    ExperimentConfig, PhantomSpec, Preset, RADIAL_INVERSION,
};
use spherical_radon::io::{export_png, export_sinogram_png, read_raster, write_raster, Raster};
use spherical_radon::projector::assemble_forward;
use spherical_radon::recon::{reconstruct, Method};
use spherical_radon::{Error, ImageSpec, Result};

/// Spherical Radon transforms with center-dependent radius.
#[derive(Parser)]
#[command(name = "srt", version)]
struct Cli {
    /// Noise seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config's `out_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in experiment: linear-cst, rotational-cst, constant-r, constant-r-radial.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path),
            (None, Some(name)) => Ok(Preset::parse(name)?.config()),
            (None, None) => Err(Error::Config("pass --config or --preset".into())),
        }
    }

    fn preset(&self) -> Option<Preset> {
        self.preset.as_deref().and_then(|n| Preset::parse(n).ok())
    }
}

/// Reconstruction keys that can be overridden from the command line.
#[derive(Args, Clone, Default)]
struct ReconOverrides {
    /// recon.method
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// recon.iterations
    #[arg(long)]
    iterations: Option<usize>,
    /// recon.lambda_tv
    #[arg(long)]
    lambda_tv: Option<f64>,
    /// gamma
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Landweber,
    Tv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Data,
    Recon,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize the phantom.
    Phantom {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "recon")]
        grid: GridArg,
    },
    /// Project the phantom from the fine data grid (noiseless sinogram).
    Project {
        #[command(flatten)]
        source: Source,
    },
    /// Add Gaussian noise to a sinogram file.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
    /// Iterative reconstruction, from a sinogram file or the config's own data.
    Recon {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        sinogram: Option<PathBuf>,
        #[command(flatten)]
        overrides: ReconOverrides,
        /// Apply the preset's smooth cutoff to data and operator.
        #[arg(long)]
        smooth_cutoff: bool,
    },
    /// Filtered backprojection of noiseless data, sharp or smoothly cut.
    Fbp {
        #[command(flatten)]
        source: Source,
        /// Skip the smooth cutoff.
        #[arg(long)]
        sharp: bool,
    },
    /// Harmonic inversion of constant-radius data.
    InvertConstantR {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        supersample: Option<usize>,
    },
    /// Compare rotational data with equidistant-circle integrals.
    PalamodovCheck {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 105)]
        grid: usize,
        #[arg(long, default_value_t = 1024)]
        quad: usize,
    },
    /// Stability audit of a geometry on its target and center sets.
    AuditGeometry {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n_x: Option<usize>,
        #[arg(long)]
        n_omega: Option<usize>,
    },
    /// Full experiment from a config.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: ReconOverrides,
    },
    /// Render an image or sinogram raster as grayscale PNG.
    ExportPng {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Gray window as `lo,hi`; data range when absent.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

fn out_dir(cli_dir: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = cli_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn apply(cfg: &mut ExperimentConfig, o: &ReconOverrides, seed: Option<u64>) -> Result<()> {
    if let Some(m) = o.method {
        cfg.recon.method = match m {
            MethodArg::Landweber => Method::Landweber,
            MethodArg::Tv => Method::Tv,
        };
        if cfg.recon.method == Method::Tv && o.lambda_tv.is_none() && cfg.recon.lambda_tv == 0.0 {
            let preset = Preset::parse(&cfg.name).ok();
            cfg.recon = preset.map(Preset::tv).unwrap_or(cfg.recon.clone());
        }
    }
    if let Some(n) = o.iterations {
        cfg.recon.iterations = n;
    }
    if let Some(l) = o.lambda_tv {
        cfg.recon.lambda_tv = l;
    }
    if let Some(g) = o.gamma {
        cfg.gamma = g;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()
}

fn save(raster: Raster, dir: &Path, stem: &str) -> Result<()> {
    write_raster(&raster, dir.join(format!("{stem}.srk")))?;
    match &raster {
        Raster::Image(img) => export_png(img, dir.join(format!("{stem}.png")), None),
        Raster::Sinogram(s) => export_sinogram_png(s, dir.join(format!("{stem}.png")), None),
        Raster::Operator(_) => Ok(()),
    }
}

fn print(value: serde_json::Value) {
    emit(&serde_json::to_string_pretty(&value).expect("json value"));
}

// A closed pipe (e.g. `srt ... | head`) is not an error of the run.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom { source, grid } => {
            let cfg = source.load()?;
            let spec = match grid {
                GridArg::Data => cfg.data_grid.spec()?,
                GridArg::Recon => cfg.recon_grid.spec()?,
            };
            let img = make_phantom(&cfg.phantom, spec)?;
            let dir = out_dir(&cli.out_dir)?;
            save(Raster::Image(img.clone()), &dir, "phantom")?;
            print(json!({ "file": dir.join("phantom.srk"), "mass": img.integral() }));
        }
        Command::Project { source } => {
            let cfg = source.load()?;
            let prep = prepare(&cfg)?;
            let dir = out_dir(&cli.out_dir)?;
            save(Raster::Sinogram(prep.clean.clone()), &dir, "sinogram")?;
            print(json!({ "file": dir.join("sinogram.srk"), "norm": prep.clean.norm(), "advisories": prep.advisories }));
        }
        Command::Noise { input, gamma } => {
            let sino = read_raster(&input)?.into_sinogram()?;
            let noisy = add_noise(&sino, gamma, cli.seed.unwrap_or(0))?;
            let dir = out_dir(&cli.out_dir)?;
            save(Raster::Sinogram(noisy), &dir, "noisy")?;
            print(json!({ "file": dir.join("noisy.srk") }));
        }
        Command::Recon {
            source,
            sinogram,
            overrides,
            smooth_cutoff,
        } => {
            let mut cfg = source.load()?;
            apply(&mut cfg, &overrides, cli.seed)?;
            let dir = out_dir(&cli.out_dir)?;
            match sinogram {
                Some(path) => {
                    let data = read_raster(&path)?.into_sinogram()?;
                    let layout = spherical_radon::projector::SinogramLayout::of(&data);
                    let proj = assemble_forward(&cfg.geometry.model(), cfg.recon_grid.spec()?, &layout, cfg.quad_recon)?;
                    let (img, out) = reconstruct(&proj, &data, &cfg.recon)?;
                    save(Raster::Image(img), &dir, "reconstruction")?;
                    print(
                        json!({ "file": dir.join("reconstruction.srk"), "iterations": out.log.len(), "step": out.step, "warnings": out.warnings }),
                    );
                }
                None => {
                    let prep = prepare(&cfg)?;
                    let cutoff = if smooth_cutoff { cutoff_for(&source, &cfg)? } else { cfg.cutoff };
                    let out = execute(&prep, cfg.seed, &cfg.recon, cutoff.as_ref())?;
                    save(Raster::Image(out.reconstruction.clone()), &dir, "reconstruction")?;
                    write_report(&dir, &out.report)?;
                    print(json!({ "delta": out.report.delta, "report": dir.join("report.json") }));
                }
            }
        }
        Command::Fbp { source, sharp } => {
            let mut cfg = source.load()?;
            cfg.gamma = 0.0;
            cfg.recon.method = Method::Fbp;
            cfg.validate()?;
            let prep = prepare(&cfg)?;
            let cutoff = cutoff_for(&source, &cfg)?;
            let used = if sharp { None } else { cutoff };
            let out = execute(&prep, 0, &cfg.recon, used.as_ref())?;
            let dir = out_dir(&cli.out_dir)?;
            let stem = if sharp { "fbp_sharp" } else { "fbp_smooth" };
            save(Raster::Image(out.reconstruction.clone()), &dir, stem)?;
            let streaks = match (cutoff, source.preset().and_then(Preset::edge)) {
                (Some(c), Some(edge)) => {
                    let cmp = compare_streaks(&prep, &c, &edge)?;
                    Some(json!({ "sharp": cmp.sharp, "smooth": cmp.smooth, "ratio": cmp.ratio() }))
                }
                _ => None,
            };
            print(json!({
                "file": dir.join(format!("{stem}.srk")),
                "delta_scaled": out.report.delta_scaled,
                "edge_band_fraction": streaks,
            }));
        }
        Command::InvertConstantR {
            source,
            l_max,
            ridge,
            m,
            supersample,
        } => {
            let cfg = source.load()?;
            let base = if source.preset() == Some(Preset::ConstantRRadial) {
                RADIAL_INVERSION
            } else {
                InversionOptions::default()
            };
            let opts = InversionOptions {
                l_max: l_max.unwrap_or(base.l_max),
                ridge: ridge.unwrap_or(base.ridge),
                m: m.unwrap_or(base.m),
                supersample: supersample.unwrap_or(base.supersample),
            };
            let prep = prepare(&cfg)?;
            let run = invert_prepared(&prep, opts)?;
            let dir = out_dir(&cli.out_dir)?;
            save(Raster::Image(run.image.clone()), &dir, "inversion")?;
            print(json!({
                "file": dir.join("inversion.srk"),
                "error_on_annulus": run.error,
                "angular_tail_fraction": run.solution.tail_fraction,
                "options": opts,
            }));
        }
        Command::PalamodovCheck {
            alpha,
            samples,
            grid,
            quad,
        } => {
            let disk = PhantomSpec::disk([0.1, -0.15], 0.4);
            let spec = ImageSpec::square(grid, -1.0, 1.0)?;
            let check = palamodov_check(alpha, &disk, spec, samples, quad, cli.seed.unwrap_or(0))?;
            print(serde_json::to_value(&check)?);
        }
        Command::AuditGeometry { source, n_x, n_omega } => {
            let cfg = source.load()?;
            let mut audit = match (&cfg.audit, source.preset()) {
                (Some(a), _) => a.clone(),
                (None, Some(p)) => p.audit(),
                (None, None) => return Err(Error::Config("config has no [audit] section".into())),
            };
            audit.n_x = n_x.unwrap_or(audit.n_x);
            audit.n_omega = n_omega.unwrap_or(audit.n_omega);
            let report = weak_stability_audit(&cfg.geometry.model(), &audit.omega, &audit.centers, audit.n_x, audit.n_omega)?;
            if let Some(dir) = &cli.out_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join("geometry_report.json");
                std::fs::write(&path, report.to_json()?).map_err(|e| Error::io(path, e))?;
            }
            emit(&report.to_json()?);
        }
        Command::Run { source, overrides } => {
            let mut cfg = source.load()?;
            apply(&mut cfg, &overrides, cli.seed)?;
            if cli.out_dir.is_some() {
                cfg.out_dir = cli.out_dir.clone();
            }
            let out = run_experiment(&cfg)?;
            emit(&out.report.to_json()?);
        }
        Command::ExportPng { input, output, window } => {
            let window = window.map(|w| (w[0], w[1]));
            match read_raster(&input)? {
                Raster::Image(img) => export_png(&img, &output, window)?,
                Raster::Sinogram(s) => export_sinogram_png(&s, &output, window)?,
                Raster::Operator(_) => return Err(Error::InvalidInput("operators have no image form".into())),
            }
            print(json!({ "file": output }));
        }
    }
    Ok(())
}

fn cutoff_for(source: &Source, cfg: &ExperimentConfig) -> Result<Option<spherical_radon::harness::CutoffConfig>> {
    Ok(cfg.cutoff.or_else(|| source.preset().and_then(Preset::cutoff)))
}
