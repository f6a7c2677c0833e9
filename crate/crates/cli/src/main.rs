use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use mixvol::classification::{Mode, NoStore, TripleEnumerator};
use mixvol::equivalence::{affine_key, affine_normal_position, gl_normal_form, tuple_normal_form};
use mixvol::io::{
    load_factory_state, manifest_json, pairs_manifest, polytope_to_json, read_json, save_factory_state, shape_from_json,
    to_json_string, triples_manifest, tuple_from_json, tuple_to_json, typing_json, verify_manifest, volume_manifest,
    write_atomic, DirStore, Manifest, Reference, Shape,
};
use mixvol::maximality::enumerate_max_pairs_2d;
use mixvol::mixed::mixed_volume;
use mixvol::sandwich::enumerate_by_volume_resumable;
use mixvol::{Error, Result};
use serde_json::json;

const EXIT_MISMATCH: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

const CHECKPOINT_INTERVAL: Duration = Duration::from_secs(10);

#[derive(Parser)]
#[command(name = "mixvol", version, about = "Classify tuples of lattice polytopes by normalized mixed volume")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "MIXEDVOL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice polytopes of volume at most M up to affine unimodular maps.
    EnumVolume {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_volume: i64,
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint file for the pending search state.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
    },
    /// Maximal pairs of lattice polygons with mixed volume 1..=M.
    EnumPairs2d {
        #[arg(long)]
        max_mv: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximal irreducible triples in R^3 with mixed volume M.
    EnumTriples {
        #[arg(long)]
        mv: i64,
        /// Only triples of three-dimensional polytopes.
        #[arg(long)]
        full_dim_only: bool,
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-level results and progress.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Stop after this many progress saves.
        #[arg(long, hide = true, requires = "checkpoint")]
        interrupt_after: Option<usize>,
    },
    /// Normalized mixed volume of a tuple.
    MixedVolume {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Normal form of a polytope (linear, or affine with --affine) or of a tuple.
    NormalForm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        affine: bool,
    },
    /// Structural type of a triple of three-dimensional polytopes.
    ClassifyType {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Compare a manifest with the built-in reference tables.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        reference: Reference,
    },
}

fn elapsed(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1000.0).round() / 1000.0
}

fn write_manifest(out: &Path, man: &Manifest) -> Result<()> {
    write_atomic(out, to_json_string(&manifest_json(man)?)?.as_bytes())?;
    println!("{} classes written to {}", man.class_count, out.display());
    Ok(())
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    print!("{}", to_json_string(v)?);
    Ok(())
}

fn enum_volume(d: usize, max_volume: i64, out: &Path, checkpoint: Option<&Path>, resume: bool) -> Result<u8> {
    if !(2..=3).contains(&d) {
        return Err(Error::Input(format!("--dim must be 2 or 3, got {d}")));
    }
    let start = Instant::now();
    let state = match (checkpoint, resume) {
        (Some(p), true) if p.exists() => Some(load_factory_state(p)?),
        (Some(p), true) => return Err(Error::Input(format!("no checkpoint at {}", p.display()))),
        _ => None,
    };
    let mut last = Instant::now();
    let mut save = |s: &mixvol::sandwich::FactoryState| -> Result<()> {
        if let Some(p) = checkpoint {
            if last.elapsed() >= CHECKPOINT_INTERVAL {
                save_factory_state(p, s)?;
                last = Instant::now();
            }
        }
        Ok(())
    };
    let polys = enumerate_by_volume_resumable(d, max_volume, state, &mut save)?;
    write_manifest(out, &volume_manifest(d, max_volume, &polys, elapsed(start))?)?;
    Ok(0)
}

fn enum_pairs(max_mv: i64, out: &Path) -> Result<u8> {
    if max_mv < 1 {
        return Err(Error::Input("--max-mv must be positive".into()));
    }
    let start = Instant::now();
    let mut levels = Vec::new();
    for m in 1..=max_mv {
        let pairs = enumerate_max_pairs_2d(m)?;
        log::info!("mixed volume {m}: {} classes", pairs.len());
        levels.push((m, pairs));
    }
    write_manifest(out, &pairs_manifest(max_mv, &levels, elapsed(start))?)?;
    Ok(0)
}

fn enum_triples(
    mv: i64,
    full_dim_only: bool,
    out: &Path,
    checkpoint: Option<&Path>,
    resume: bool,
    interrupt_after: Option<usize>,
) -> Result<u8> {
    if mv < 1 {
        return Err(Error::Input("--mv must be positive".into()));
    }
    let mode = if full_dim_only { Mode::FullDim } else { Mode::Irreducible };
    let start = Instant::now();
    let records = match checkpoint {
        Some(dir) => {
            let mut store = DirStore::new(dir)?;
            if !resume {
                store.clear(mode)?;
            }
            if let Some(n) = interrupt_after {
                store = store.stop_after(n);
            }
            TripleEnumerator::new(mode, &store).records(mv)?
        }
        None => TripleEnumerator::new(mode, &NoStore).records(mv)?,
    };
    write_manifest(out, &triples_manifest(mv, mode, &records, elapsed(start)))?;
    Ok(0)
}

fn normal_form(input: &Path, affine: bool) -> Result<u8> {
    match shape_from_json(&read_json(input)?)? {
        Shape::Polytope(p) => {
            if !p.is_full_dim() {
                return Err(Error::Input("normal forms need a full-dimensional polytope".into()));
            }
            let (rep, key) = if affine {
                (affine_normal_position(&p)?, affine_key(&p)?)
            } else {
                gl_normal_form(&p)?
            };
            print_json(&json!({"normal_form": polytope_to_json(&rep), "key": key.to_hex()}))?;
        }
        Shape::Tuple(t) => {
            let (rep, key) = tuple_normal_form(&t)?;
            print_json(&json!({"normal_form": tuple_to_json(&rep), "key": key.to_hex()}))?;
        }
    }
    Ok(0)
}

fn classify_type(input: &Path) -> Result<u8> {
    let t = tuple_from_json(&read_json(input)?)?;
    if t.len() != 3 || t.ambient_dim() != 3 || !t.members().iter().all(|p| p.is_full_dim()) {
        return Err(Error::Input("classify-type needs a triple of three-dimensional polytopes in R^3".into()));
    }
    print_json(&typing_json(&t)?)?;
    Ok(0)
}

fn verify(input: &Path, reference: Reference) -> Result<u8> {
    let man = Manifest::from_json(&read_json(input)?)?;
    let rep = verify_manifest(&man, reference)?;
    for l in &rep.lines {
        println!("{l}");
    }
    if rep.ok() {
        println!("ok");
        Ok(0)
    } else {
        println!("{} mismatch(es)", rep.mismatches);
        Ok(EXIT_MISMATCH)
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Input("--threads must be positive".into()));
        }
        mixvol::exec::init_threads(n);
    }
    match cli.command {
        Command::EnumVolume { dim, max_volume, out, checkpoint, resume } => {
            enum_volume(dim, max_volume, &out, checkpoint.as_deref(), resume)
        }
        Command::EnumPairs2d { max_mv, out } => enum_pairs(max_mv, &out),
        Command::EnumTriples { mv, full_dim_only, out, checkpoint, resume, interrupt_after } => {
            enum_triples(mv, full_dim_only, &out, checkpoint.as_deref(), resume, interrupt_after)
        }
        Command::MixedVolume { input } => {
            let t = tuple_from_json(&read_json(&input)?)?;
            if t.len() != t.ambient_dim() {
                return Err(Error::Input(format!(
                    "mixed volume in R^{} needs {} polytopes, got {}",
                    t.ambient_dim(),
                    t.ambient_dim(),
                    t.len()
                )));
            }
            println!("{}", mixed_volume(&t)?);
            Ok(0)
        }
        Command::NormalForm { input, affine } => normal_form(&input, affine),
        Command::ClassifyType { input } => classify_type(&input),
        Command::Verify { input, reference } => verify(&input, reference),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    // Overflow checks panic; report them as internal errors.
    let outcome = match std::panic::catch_unwind(|| run(cli)) {
        Ok(r) => r,
        Err(_) => return ExitCode::from(EXIT_INTERNAL),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Input(_) => EXIT_INPUT,
                Error::Internal(_) | Error::Interrupted | Error::Io(_) => EXIT_INTERNAL,
            })
        }
    }
}
