use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use frontlab::behavior::{self, Quantity, SmoothVerdict, Verdict};
use frontlab::exprlang::Params;
use frontlab::gallery;
use frontlab::parallel;
use frontlab::report::{self, Artifact};
use frontlab::scene::{Job, Scene};
use frontlab::{singular, Error};

/// Relative curvatures, singularities and parallel surfaces of frontals.
#[derive(Parser)]
#[command(name = "frontlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame dump and classification at a point.
    Analyze(PointArgs),
    /// CSV table of the frame fields on the scene grid.
    Scan {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Locate the singular set and classify it.
    Singular(OutArgs),
    /// Boundedness, extendibility and divergence of a curvature.
    Behavior {
        #[command(flatten)]
        at: PointArgs,
        #[arg(long, default_value = "K")]
        quantity: String,
        #[arg(long, value_enum, default_value_t = Which::All)]
        protocol: Which,
    },
    /// Parallel smoothability at a point.
    Smoothable(PointArgs),
    /// Offset surface `x + t n`: mesh and offset quantities at the point.
    Parallel {
        #[command(flatten)]
        at: PointArgs,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// Mesh of the surface itself.
    Mesh {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// Built-in surfaces.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Everything the scene asks for, as one JSON.
    Report {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    List,
    /// Print a scene for an entry, e.g. `gallery scene rank0_family --param k=2`.
    Scene {
        name: String,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    All,
    Boundedness,
    Extendibility,
    Divergence,
}

#[derive(Args)]
struct SceneArgs {
    /// Scene JSON.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct OutArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    out: OutArgs,
    /// `u,v`; defaults to the scene's point.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
}

enum Status {
    Ok,
    Inconclusive,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &SceneArgs) -> Result<Job, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    Scene::from_json(&text)?.prepare()
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn point(arg: &Option<String>, job: &Job) -> Result<(f64, f64), Error> {
    let Some(s) = arg else { return Ok(job.point) };
    let bad = || Error::BadParameter(format!("--point expects `u,v`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let u: f64 = a.trim().parse().map_err(|_| bad())?;
    let v: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(u.is_finite() && v.is_finite()) {
        return Err(bad());
    }
    Ok((u, v))
}

fn status(inconclusive: bool) -> Status {
    if inconclusive {
        Status::Inconclusive
    } else {
        Status::Ok
    }
}

fn run(command: Command) -> Result<Status, Error> {
    match command {
        Command::Analyze(a) => {
            let job = load(&a.out.scene)?;
            let p = point(&a.point, &job)?;
            let r = report::analyze(&job, p)?;
            emit(a.out.out.as_deref(), &Artifact::new(&job, "analyze", r).to_json())?;
            Ok(Status::Ok)
        }
        Command::Scan { scene, csv } => {
            let job = load(&scene)?;
            let s = singular::scan(&job.frontal, &job.grid, &job.scene.tolerances)?;
            emit(csv.as_deref(), &report::csv_table(&s, &job.hash))?;
            Ok(Status::Ok)
        }
        Command::Singular(o) => {
            let job = load(&o.scene)?;
            let r = report::singular_report(&job)?;
            emit(o.out.as_deref(), &Artifact::new(&job, "singular", r).to_json())?;
            Ok(Status::Ok)
        }
        Command::Behavior { at, quantity, protocol } => {
            let job = load(&at.out.scene)?;
            let p = point(&at.point, &job)?;
            let q = Quantity::parse(&quantity)?;
            let (f, tol) = (&job.frontal, &job.scene.tolerances);
            let out = at.out.out.as_deref();
            let single = match protocol {
                Which::All => {
                    let r = report::quantity_report(&job, q, p)?;
                    let inconclusive = r.verdicts().any(|v| v == Verdict::Inconclusive);
                    emit(out, &Artifact::new(&job, "behavior", r).to_json())?;
                    return Ok(status(inconclusive));
                }
                Which::Boundedness => behavior::boundedness(f, q, &job.grid, tol)?,
                Which::Extendibility => behavior::extendibility(f, q, p, &job.grid, tol)?,
                Which::Divergence => behavior::divergence(f, q, p, tol)?,
            };
            let inconclusive = single.verdict == Verdict::Inconclusive;
            emit(out, &Artifact::new(&job, "behavior", single).to_json())?;
            Ok(status(inconclusive))
        }
        Command::Smoothable(a) => {
            let job = load(&a.out.scene)?;
            let p = point(&a.point, &job)?;
            let r = behavior::smoothability(&job.frontal, p, job.scene.tolerances.radius, &job.scene.tolerances)?;
            let inconclusive = r.verdict == SmoothVerdict::Inconclusive;
            emit(a.out.out.as_deref(), &Artifact::new(&job, "smoothable", r).to_json())?;
            Ok(status(inconclusive))
        }
        Command::Parallel { at, t, obj } => {
            let job = load(&at.out.scene)?;
            let p = point(&at.point, &job)?;
            let t = t.or(job.scene.t).ok_or_else(|| Error::BadParameter("parallel needs --t or a scene `t`".into()))?;
            let (r, mesh) = report::offset_report(&job, p, t)?;
            if let Some(path) = obj {
                emit(Some(&path), &parallel::write_obj(&mesh, &report::obj_header(&job, &mesh)))?;
            }
            emit(at.out.out.as_deref(), &Artifact::new(&job, "parallel", r).to_json())?;
            Ok(Status::Ok)
        }
        Command::Mesh { out, obj } => {
            let job = load(&out.scene)?;
            let mesh = parallel::mesh(&job.frontal, &job.grid, 0.0, &job.scene.tolerances)?;
            let text = parallel::write_obj(&mesh, &report::obj_header(&job, &mesh));
            match obj {
                Some(path) => {
                    emit(Some(&path), &text)?;
                    emit(out.out.as_deref(), &Artifact::new(&job, "mesh", &mesh.report).to_json())?;
                }
                None => emit(out.out.as_deref(), &text)?,
            }
            Ok(Status::Ok)
        }
        Command::Gallery { command: GalleryCommand::List } => {
            for e in gallery::defaults() {
                let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<16} {:<10} {}", e.name, params.join(","), e.summary);
            }
            Ok(Status::Ok)
        }
        Command::Gallery { command: GalleryCommand::Scene { name, params, out } } => {
            let mut map = Params::new();
            for p in &params {
                let bad = || Error::BadParameter(format!("--param expects `name=value`, got `{p}`"));
                let (k, v) = p.split_once('=').ok_or_else(bad)?;
                map.insert(k.trim().to_string(), v.trim().parse().map_err(|_| bad())?);
            }
            let scene = Scene::gallery(&name, map);
            scene.prepare()?;
            emit(out.as_deref(), &scene.to_json())?;
            Ok(Status::Ok)
        }
        Command::Report { out, csv, obj } => {
            let job = load(&out.scene)?;
            let (r, s, mesh) = report::full_report(&job)?;
            if let Some(path) = csv {
                emit(Some(&path), &report::csv_table(&s, &job.hash))?;
            }
            if let Some(path) = obj {
                emit(Some(&path), &parallel::write_obj(&mesh, &report::obj_header(&job, &mesh)))?;
            }
            let inconclusive = r.inconclusive();
            emit(out.out.as_deref(), &Artifact::new(&job, "report", r).to_json())?;
            Ok(status(inconclusive))
        }
    }
}
