use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drumshape_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "drumshape", version, about = "Convex minimizers of the Dirichlet eigenvalue plus an anisotropic perimeter")]
struct Cli {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Norm expression, e.g. `p:2`, `wl1:1/3,3`, `sum:1*(p:1)+1*(rot:pi/4:(p:1))`.
    #[arg(long, global = true)]
    norm: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = "DRUMSHAPE_OUT")]
    out: Option<PathBuf>,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long, global = true)]
    formats: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall-clock timings in the manifest (breaks bitwise reproducibility).
    #[arg(long, global = true)]
    timings: bool,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Default)]
struct ShapeArgs {
    /// Polygon CSV, one `x,y` vertex per line, counterclockwise.
    #[arg(long)]
    shape: Option<String>,
    /// Extrapolation levels for the eigenvalue.
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print ρ on the unit circle, degenerate directions and additivity cones.
    EvalNorm {
        #[arg(long)]
        directions: Option<usize>,
    },
    /// Emit the Wulff shape of the norm.
    Wulff {
        #[arg(long)]
        directions: Option<usize>,
    },
    /// Extrapolated principal eigenvalue of a polygon.
    Eigen {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Also write the eigenfunction on the finest grid.
        #[arg(long)]
        dump_eigenfunction: bool,
    },
    /// λ, perimeter, F and the scale-optimal f* of a polygon.
    Functional {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Minimize f* over convex shapes from several starts.
    Minimize {
        /// Support angles.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        grid_levels: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol_f: Option<f64>,
    },
    /// Facets and corners of a shape against the norm's predictions.
    Analyze {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Property battery; exits with status 1 on any violation.
    Verify {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Random Minkowski pairs.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Rectangle family under the asymmetric ℓ¹ norm.
    Reproduce {
        #[arg(long)]
        n: Option<f64>,
        /// `lo:step:hi`.
        #[arg(long)]
        a_grid: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
}

fn overrides(cli: &Cli) -> (Command, Vec<(&'static str, String)>) {
    let mut kv: Vec<(&'static str, String)> = Vec::new();
    let mut put = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            kv.push((k, v));
        }
    };
    let s = |x: &Option<String>| x.clone();
    let n = |x: Option<usize>| x.map(|v| v.to_string());
    put("norm", s(&cli.norm));
    put("out", cli.out.as_ref().map(|p| p.display().to_string()));
    put("formats", s(&cli.formats));
    put("seed", cli.seed.map(|v| v.to_string()));
    if cli.timings {
        put("timings", Some("true".into()));
    }
    let shape = |a: &ShapeArgs, put: &mut dyn FnMut(&'static str, Option<String>)| {
        put("shape", a.shape.clone());
        put("levels", n(a.levels));
    };
    let command = match &cli.command {
        Cmd::EvalNorm { directions } => {
            put("directions", n(*directions));
            Command::EvalNorm
        }
        Cmd::Wulff { directions } => {
            put("directions", n(*directions));
            Command::Wulff
        }
        Cmd::Eigen { shape: a, dump_eigenfunction } => {
            shape(a, &mut put);
            if *dump_eigenfunction {
                put("dump_eigenfunction", Some("true".into()));
            }
            Command::Eigen
        }
        Cmd::Functional { shape: a } => {
            shape(a, &mut put);
            Command::Functional
        }
        Cmd::Minimize { k, starts, grid_levels, max_iters, tol_f } => {
            put("k", n(*k));
            put("starts", n(*starts));
            put("grid_levels", n(*grid_levels));
            put("max_iters", n(*max_iters));
            put("tol_f", tol_f.map(|v| v.to_string()));
            Command::Minimize
        }
        Cmd::Analyze { shape: a } => {
            shape(a, &mut put);
            Command::Analyze
        }
        Cmd::Verify { shape: a, pairs, k } => {
            shape(a, &mut put);
            put("pairs", n(*pairs));
            put("k", n(*k));
            Command::Verify
        }
        Cmd::Reproduce { n: rect_n, a_grid, levels } => {
            put("n", rect_n.map(|v| v.to_string()));
            put("a_grid", s(a_grid));
            put("levels", n(*levels));
            Command::Reproduce
        }
    };
    (command, kv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let mut cfg = RunConfig::load(cli.config.as_deref())?;
        for pair in &cli.sets {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| drumshape_cli::CliError::Config(format!("--set expects key=value, got `{pair}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        let (command, kv) = overrides(&cli);
        for (k, v) in kv {
            cfg.set(k, &v)?;
        }
        run(command, &cfg)
    })();
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("drumshape: {e}");
            ExitCode::from(2)
        }
    }
}
