use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use weyl_walk::io::{
    kernel_table_csv, kernel_table_json, probability_pgm, write_atomic, KernelCache, StateFile,
};
use weyl_walk::simulator::{dispersion, evolve_direct, evolve_fourier, evolve_with_table, k_grid};
use weyl_walk::validate::{run_all, ValidationConfig};
use weyl_walk::{kernel_table, Boundary, EnumerationCap, Error, FieldState, KernelTable, Nu};

#[derive(Parser, Debug)]
#[command(
    name = "weylwalk",
    version,
    about = "Exact propagator and simulator for the 2D Weyl quantum walk"
)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for cached kernel tables; overrides $WEYLWALK_CACHE_DIR.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the exact kernel table at time t.
    Propagate(PropagateArgs),
    /// Evolve a lattice state.
    Evolve(EvolveArgs),
    /// Cross-check every closed form against its independent route.
    Validate(ValidateArgs),
    /// Dump the dispersion relation on a Brillouin-zone grid.
    Dispersion(DispersionArgs),
    /// Time the three evolution methods on a random periodic state.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Kernel,
    /// Always treats the window as a torus.
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Padded,
    Periodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Padded => Boundary::Padded,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Delta,
}

#[derive(Args, Debug)]
struct PropagateArgs {
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// ν = exp(i θ); only used for the numeric columns.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    nu_angle: f64,
    /// Append the numeric kernel matrix entries.
    #[arg(long)]
    numeric: bool,
    /// Output path (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long, value_enum, conflicts_with = "input")]
    init: Option<InitArg>,
    /// State file to start from.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    steps: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Padded)]
    boundary: BoundaryArg,
    /// Window width for `--init delta` (default 2 steps + 3).
    #[arg(long)]
    width: Option<usize>,
    /// Window height for `--init delta` (default 2 steps + 3).
    #[arg(long)]
    height: Option<usize>,
    /// ν = exp(i θ); defaults to the input file's angle, else 0.
    #[arg(long, allow_negative_numbers = true)]
    nu_angle: Option<f64>,
    /// State file to write (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Probability heatmap (binary PGM).
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 8)]
    t_max: u32,
    /// Largest path class the oracle may enumerate.
    #[arg(long, default_value_t = EnumerationCap::default().0)]
    cap: u128,
    /// Seed of the random state in the method triangle.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DispersionArgs {
    /// Points per axis over [-π, π].
    #[arg(long, default_value_t = 65)]
    grid: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Side of the square periodic window.
    #[arg(long, default_value_t = 64)]
    window: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 2, 4, 8, 16, 32, 64])]
    t: Vec<u32>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    nu_angle: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .context("cannot write to stdout"),
    }
}

fn nu_from(theta: f64) -> anyhow::Result<Nu> {
    if !theta.is_finite() {
        bail!("nu angle must be finite, got {theta}");
    }
    Ok(Nu::from_angle(theta))
}

struct Engine {
    cache: Option<KernelCache>,
}

impl Engine {
    fn table(&self, t: u32) -> anyhow::Result<KernelTable> {
        Ok(match &self.cache {
            Some(c) => c.get_or_build(t)?,
            None => kernel_table(t)?,
        })
    }
}

fn propagate(ctx: &Engine, args: &PropagateArgs) -> anyhow::Result<ExitCode> {
    let nu = nu_from(args.nu_angle)?;
    let table = ctx.table(args.t)?;
    let text = match args.format {
        TableFormat::Csv => kernel_table_csv(&table, args.numeric.then_some(nu)),
        TableFormat::Json => kernel_table_json(&table, args.numeric.then_some(args.nu_angle))?,
    };
    emit(args.output.as_deref(), text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

/// Kernel evolution restricted to the input window: wrapped onto the torus
/// for periodic boundaries, refused if amplitude leaves a padded window.
fn evolve_by_kernel(
    ctx: &Engine,
    state: &FieldState,
    t: u32,
    nu: Nu,
    boundary: Boundary,
) -> anyhow::Result<FieldState> {
    let grown = evolve_with_table(state, &ctx.table(t)?, nu);
    let (w, h, offset) = (state.width(), state.height(), state.offset());
    if boundary == Boundary::Periodic {
        return Ok(grown.folded_periodic(w, h, offset));
    }
    let zero = Complex64::new(0.0, 0.0);
    if let Some((x, y, _)) = grown
        .sites()
        .find(|(x, y, v)| !state.contains(*x, *y) && (v[0] != zero || v[1] != zero))
    {
        return Err(Error::WindowTooSmall { x, y }.into());
    }
    Ok(grown.resampled(w, h, offset))
}

fn evolve(ctx: &Engine, args: &EvolveArgs) -> anyhow::Result<ExitCode> {
    let (state, file_angle) = match (&args.input, args.init) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let file = StateFile::from_json(&text)?;
            (file.to_state()?, Some(file.nu_angle))
        }
        (None, Some(InitArg::Delta)) => {
            let side = 2 * args.steps as usize + 3;
            let (w, h) = (args.width.unwrap_or(side), args.height.unwrap_or(side));
            if w == 0 || h == 0 {
                bail!("window must be nonempty");
            }
            let offset = (-((w / 2) as i64), -((h / 2) as i64));
            let mut s = FieldState::zeros(w, h, offset);
            s.set(0, 0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
            (s, None)
        }
        (None, None) => bail!("one of --init or --input is required"),
    };
    let theta = args.nu_angle.or(file_angle).unwrap_or(0.0);
    let nu = nu_from(theta)?;
    let boundary = Boundary::from(args.boundary);
    let out = match args.method {
        MethodArg::Direct => evolve_direct(&state, args.steps, nu, boundary)?,
        MethodArg::Kernel => evolve_by_kernel(ctx, &state, args.steps, nu, boundary)?,
        MethodArg::Fft => evolve_fourier(&state, args.steps, nu)?,
    };
    let json = StateFile::from_state(&out, theta).to_json()?;
    emit(args.output.as_deref(), json.as_bytes())?;
    if let Some(path) = &args.heatmap {
        emit(Some(path), &probability_pgm(&out))?;
    }
    let line = format!("norm {:.9}", out.norm_sqr().sqrt());
    if args.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: &ValidateArgs) -> anyhow::Result<ExitCode> {
    let cfg = ValidationConfig {
        cap: EnumerationCap(args.cap),
        seed: args.seed,
        ..ValidationConfig::new(args.t_max)
    };
    let mut ok = true;
    for r in run_all(&cfg) {
        match &r.failure {
            None => println!("PASS {} ({} checks)", r.name, r.checked),
            Some(msg) => {
                println!("FAIL {}: {msg}", r.name);
                ok = false;
            }
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn dispersion_csv(grid: usize) -> String {
    let mut s = String::from("kx,ky,omega\n");
    for d in dispersion(&k_grid(grid)) {
        let _ = writeln!(s, "{},{},{}", d.k.0 + 0.0, d.k.1 + 0.0, d.omega + 0.0);
    }
    s
}

/// Fixed linear functional of the amplitudes; equal outputs give equal sums.
fn checksum(state: &FieldState) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let weight = (i % 7 + 1) as f64;
            weight * (v[0].re + 2.0 * v[0].im + 3.0 * v[1].re + 5.0 * v[1].im)
        })
        .sum()
}

fn bench(ctx: &Engine, args: &BenchArgs) -> anyhow::Result<ExitCode> {
    if args.window == 0 {
        bail!("window must be nonempty");
    }
    let nu = nu_from(args.nu_angle)?;
    let n = args.window;
    let offset = (-((n / 2) as i64), -((n / 2) as i64));
    let start = FieldState::random(n, n, offset, args.seed);
    let mut s = String::from("method,t,window,seconds,checksum\n");
    for &t in &args.t {
        let clock = Instant::now();
        let direct = evolve_direct(&start, t, nu, Boundary::Periodic)?;
        let direct_secs = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let kernel = evolve_by_kernel(ctx, &start, t, nu, Boundary::Periodic)?;
        let kernel_secs = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let fourier = evolve_fourier(&start, t, nu)?;
        let fft_secs = clock.elapsed().as_secs_f64();

        for (name, secs, out) in [
            ("direct", direct_secs, &direct),
            ("kernel", kernel_secs, &kernel),
            ("fft", fft_secs, &fourier),
        ] {
            let _ = writeln!(s, "{name},{t},{n},{secs:.6},{:.9e}", checksum(out));
        }
    }
    emit(args.output.as_deref(), s.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("cannot configure {n} threads: {e}"))?;
    }
    let ctx = Engine {
        cache: cli
            .cache_dir
            .map(KernelCache::new)
            .or_else(KernelCache::from_env),
    };
    match &cli.command {
        Command::Propagate(a) => propagate(&ctx, a),
        Command::Evolve(a) => evolve(&ctx, a),
        Command::Validate(a) => validate(a),
        Command::Dispersion(a) => {
            emit(a.output.as_deref(), dispersion_csv(a.grid).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(a) => bench(&ctx, a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if matches!(
        err.downcast_ref::<Error>(),
        Some(Error::WindowTooSmall { .. })
    ) {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("weylwalk: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
