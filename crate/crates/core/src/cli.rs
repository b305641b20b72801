//! The `odc` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error. Every JSON
//! report embeds a [`Manifest`]; CSV, Newick and trace outputs written to a
//! file get the manifest as a `<out>.manifest.json` sidecar instead.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::codec::{self, CodecId, Container, StepCount, FORMAT_VERSION};
use crate::corpus::{self, ByteObject, CaInit};
use crate::depth::{self, DepthEstimate, SlowGrowthReport, TimingProtocol};
use crate::entropy::{shannon_entropy, EntropyReport};
use crate::evosim::{self, Calibration, ComplexityTrajectory, EvoConfig, EvolutionTrace, Mode, TargetSpec};
use crate::kestimate::{k_estimate, k_estimate_with_container, ComplexityEstimate};
use crate::ncd::{self, DistanceMatrix, Merge, NcdCompressor, NcdDetail};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "odc",
    version,
    about = "Compression-based complexity, depth and similarity measurements",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reference object (raw bytes plus a .json provenance sidecar)
    Gen(GenArgs),
    /// Shannon entropy under the empirical symbol model
    Entropy(FileArgs),
    /// Complexity proxy: container size per codec and the best one
    Kc(FileArgs),
    /// Decompression step count of the best container
    Depth(DepthArgs),
    /// Write a container
    Pack(PackArgs),
    /// Decode a container
    Unpack(UnpackArgs),
    /// Normalized compression distance of two files
    Ncd(NcdArgs),
    /// Pairwise distance matrix
    Matrix(MatrixArgs),
    /// Average-linkage clustering of a matrix CSV
    Cluster(ClusterArgs),
    /// Check a JSON array of step counts against a growth bound
    Slowgrowth(SlowGrowthArgs),
    /// Run the evolutionary simulator and write a JSON-lines trace
    Evolve(EvolveArgs),
    /// Complexity trajectory of a trace
    Analyze(AnalyzeArgs),
    /// Entropy, complexity and depth for a set of files
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Cumulative,
    Memoryless,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    Alpha,
    Beta,
    Gamma,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// SplitMix64 bytes
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One repeated byte
    Constant {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        byte: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// A repeated pattern truncated to n bytes
    Periodic {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "pattern_hex", required_unless_present = "pattern_hex")]
        pattern: Option<String>,
        #[arg(long)]
        pattern_hex: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binary digits of pi
    Pi {
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Elementary cellular automaton rows
    Ca {
        #[arg(long, default_value_t = 30)]
        rule: u8,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long)]
        steps: usize,
        /// Random initial row from this seed (default: single live cell)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// A document from one of the standard Markov text families
    Family {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One object per fixture class, written into a directory
    Fixtures {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Serialize)]
struct FileArgs {
    file: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DepthArgs {
    file: PathBuf,
    /// Timed repetitions; enables the wall-clock measurement
    #[arg(long)]
    reps: Option<u32>,
    /// Untimed warm-up runs; enables the wall-clock measurement
    #[arg(long)]
    warmups: Option<u32>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PackArgs {
    file: PathBuf,
    /// Codec name (default: smallest container)
    #[arg(long)]
    codec: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct UnpackArgs {
    file: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct NcdArgs {
    x: PathBuf,
    y: PathBuf,
    /// Codec name or "best"
    #[arg(long, default_value = "LZ")]
    codec: String,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MatrixArgs {
    #[arg(required = true, num_args = 2..)]
    files: Vec<PathBuf>,
    #[arg(long, default_value = "LZ")]
    codec: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ClusterArgs {
    /// Matrix CSV as written by `matrix`
    matrix: PathBuf,
    /// Cut the tree into this many clusters
    #[arg(long)]
    k: Option<usize>,
    /// Also write the tree as a Newick file
    #[arg(long)]
    #[serde(skip)]
    newick: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SlowGrowthArgs {
    /// JSON array of step counts
    file: PathBuf,
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EvolveArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    genome_len: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Expected mutated bytes per offspring
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Seed of the target document
    #[arg(long)]
    target_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    trace: PathBuf,
    /// Slow-growth bound in steps (default: calibrated on the trace)
    #[arg(long)]
    bound: Option<u64>,
    /// Seed for the calibration draws
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub length: usize,
    pub sha256: String,
}

/// Provenance of a report: what ran, with which parameters, on which bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub params: Value,
    pub tool_version: String,
    pub format_version: u8,
    pub inputs: Vec<InputDigest>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    manifest: Manifest,
    #[serde(flatten)]
    body: T,
}

struct Input {
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Input {
    fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Input { path: path.to_path_buf(), bytes })
    }

    fn digest(&self) -> InputDigest {
        InputDigest {
            path: self.path.clone(),
            length: self.bytes.len(),
            sha256: hex::encode(Sha256::digest(&self.bytes)),
        }
    }

    fn label(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.display().to_string())
    }

    fn object(&self) -> ByteObject {
        ByteObject::new(
            self.label(),
            self.bytes.clone(),
            corpus::Provenance::File { path: self.path.clone() },
        )
    }
}

fn manifest<A: Serialize>(subcommand: &str, args: &A, inputs: &[&Input]) -> Result<Manifest> {
    Ok(Manifest {
        subcommand: subcommand.to_owned(),
        params: serde_json::to_value(args)?,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        format_version: FORMAT_VERSION,
        inputs: inputs.iter().map(|i| i.digest()).collect(),
    })
}

struct Output<'a> {
    stdout: &'a mut dyn Write,
}

impl Output<'_> {
    fn text(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => write_file(p, text.as_bytes()),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }

    fn json<T: Serialize>(&mut self, out: Option<&Path>, manifest: Manifest, body: T) -> Result<()> {
        let text = serde_json::to_string_pretty(&Report { manifest, body })? + "\n";
        self.text(out, &text)
    }

    /// Non-JSON output; a file destination also gets a manifest sidecar.
    fn data(&mut self, out: Option<&Path>, text: &str, manifest: &Manifest) -> Result<()> {
        self.text(out, text)?;
        if let Some(p) = out {
            write_manifest_sidecar(p, manifest)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest_sidecar(path: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    write_file(&sidecar_path(path), text.as_bytes())
}

fn parse_codec(name: &str) -> Result<CodecId> {
    name.parse()
}

fn parse_compressor(name: &str) -> Result<NcdCompressor> {
    name.parse()
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let mut out = Output { stdout };
    match dispatch(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut Output<'_>) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a.kind, out),
        Command::Entropy(a) => {
            let input = Input::read(&a.file)?;
            let report: EntropyReport = shannon_entropy(&input.object(), None)?;
            out.json(a.out.as_deref(), manifest("entropy", &a, &[&input])?, report)
        }
        Command::Kc(a) => {
            let input = Input::read(&a.file)?;
            let estimate: ComplexityEstimate = k_estimate(&input.object());
            out.json(a.out.as_deref(), manifest("kc", &a, &[&input])?, estimate)
        }
        Command::Depth(a) => {
            let input = Input::read(&a.file)?;
            let timing = (a.reps.is_some() || a.warmups.is_some()).then(|| {
                let d = TimingProtocol::default();
                TimingProtocol {
                    warmups: a.warmups.unwrap_or(d.warmups),
                    repetitions: a.reps.unwrap_or(d.repetitions),
                }
            });
            let estimate: DepthEstimate = depth::depth_estimate(&input.object(), timing.as_ref())?;
            out.json(a.out.as_deref(), manifest("depth", &a, &[&input])?, estimate)
        }
        Command::Pack(a) => {
            let input = Input::read(&a.file)?;
            let container = match &a.codec {
                Some(name) => codec::compress_bytes(&input.bytes, parse_codec(name)?),
                None => k_estimate_with_container(&input.bytes).1,
            };
            write_file(&a.out, &container.to_bytes())?;
            #[derive(Serialize)]
            struct Body {
                codec: CodecId,
                original_len: u64,
                container_bytes: usize,
            }
            let body = Body {
                codec: container.codec(),
                original_len: container.original_len(),
                container_bytes: container.size_bytes(),
            };
            out.json(None, manifest("pack", &a, &[&input])?, body)
        }
        Command::Unpack(a) => {
            let input = Input::read(&a.file)?;
            let container = Container::from_bytes(&input.bytes)?;
            let (bytes, steps) = codec::decode(&container)?;
            write_file(&a.out, &bytes)?;
            #[derive(Serialize)]
            struct Body {
                codec: CodecId,
                original_len: u64,
                steps: StepCount,
            }
            let body = Body {
                codec: container.codec(),
                original_len: container.original_len(),
                steps,
            };
            out.json(None, manifest("unpack", &a, &[&input])?, body)
        }
        Command::Ncd(a) => {
            let comp = parse_compressor(&a.codec)?;
            let (x, y) = (Input::read(&a.x)?, Input::read(&a.y)?);
            let detail: NcdDetail = ncd::ncd_detail(&x.object(), &y.object(), comp)?;
            #[derive(Serialize)]
            struct Body {
                compressor: &'static str,
                #[serde(flatten)]
                detail: NcdDetail,
                one_order_distance: f64,
            }
            let body = Body {
                compressor: comp.name(),
                one_order_distance: detail.one_order_distance(),
                detail,
            };
            out.json(a.out.as_deref(), manifest("ncd", &a, &[&x, &y])?, body)
        }
        Command::Matrix(a) => {
            let comp = parse_compressor(&a.codec)?;
            let inputs = a.files.iter().map(|p| Input::read(p)).collect::<Result<Vec<_>>>()?;
            let objects: Vec<ByteObject> = inputs.iter().map(Input::object).collect();
            let m = ncd::distance_matrix(&objects, comp)?;
            let refs: Vec<&Input> = inputs.iter().collect();
            let man = manifest("matrix", &a, &refs)?;
            match a.format {
                Format::Csv => out.data(a.out.as_deref(), &m.to_csv(), &man),
                Format::Json => out.json(a.out.as_deref(), man, matrix_body(&m, comp)),
            }
        }
        Command::Cluster(a) => {
            let input = Input::read(&a.matrix)?;
            let text = String::from_utf8(input.bytes.clone())
                .map_err(|_| Error::invalid("matrix CSV is not UTF-8"))?;
            let m = DistanceMatrix::from_csv(&text)?;
            let d = ncd::cluster(&m);
            let newick = d.to_newick();
            let man = manifest("cluster", &a, &[&input])?;
            if let Some(p) = &a.newick {
                write_file(p, format!("{newick}\n").as_bytes())?;
                write_manifest_sidecar(p, &man)?;
            }
            let assignments = a.k.map(|k| d.cut(k)).transpose()?;
            #[derive(Serialize)]
            struct Body {
                labels: Vec<String>,
                merges: Vec<Merge>,
                newick: String,
                k: Option<usize>,
                assignments: Option<std::collections::BTreeMap<String, usize>>,
            }
            let body = Body {
                labels: d.labels.clone(),
                merges: d.merges.clone(),
                newick,
                k: a.k,
                assignments,
            };
            out.json(a.out.as_deref(), man, body)
        }
        Command::Slowgrowth(a) => {
            let input = Input::read(&a.file)?;
            let steps: Vec<u64> = serde_json::from_slice(&input.bytes)?;
            let steps: Vec<StepCount> = steps.into_iter().map(StepCount::new).collect();
            let report: SlowGrowthReport = depth::slow_growth_check(&steps, a.bound)?;
            out.json(a.out.as_deref(), manifest("slowgrowth", &a, &[&input])?, report)
        }
        Command::Evolve(a) => {
            let mode = match a.mode {
                ModeArg::Cumulative => Mode::Cumulative,
                ModeArg::Memoryless => Mode::Memoryless,
            };
            let d = EvoConfig::standard(mode, a.seed);
            let cfg = EvoConfig {
                genome_len: a.genome_len.unwrap_or(d.genome_len),
                population: a.population.unwrap_or(d.population),
                mutation_rate: a.rate.unwrap_or(d.mutation_rate),
                generations: a.generations.unwrap_or(d.generations),
                sample_every: a.sample_every.unwrap_or(d.sample_every),
                target: TargetSpec {
                    seed: a.target_seed.unwrap_or(d.target.seed),
                    ..d.target.clone()
                },
                ..d
            };
            let trace = evosim::run_evolution(&cfg)?;
            let mut buf = Vec::new();
            trace.write_jsonl(&mut buf)?;
            write_file(&a.out, &buf)?;
            write_manifest_sidecar(&a.out, &manifest("evolve", &a, &[])?)?;
            #[derive(Serialize)]
            struct Body {
                samples: usize,
                final_generation: usize,
                final_best_fitness: f64,
            }
            let last = trace.final_sample().expect("at least one generation");
            let body = Body {
                samples: trace.samples.len(),
                final_generation: last.generation,
                final_best_fitness: last.best_fitness,
            };
            out.json(None, manifest("evolve", &a, &[])?, body)
        }
        Command::Analyze(a) => {
            let input = Input::read(&a.trace)?;
            let trace = EvolutionTrace::read_jsonl(input.bytes.as_slice())?;
            let calibration: Option<Calibration> = match a.bound {
                Some(_) => None,
                None => Some(evosim::calibrate_bound(&trace, 1000, a.seed)?),
            };
            let bound = a.bound.unwrap_or_else(|| calibration.as_ref().expect("calibrated").bound);
            let trajectory: ComplexityTrajectory = evosim::analyze_trace(&trace, bound)?;
            let man = manifest("analyze", &a, &[&input])?;
            #[derive(Serialize)]
            struct Body {
                bound: u64,
                calibration: Option<Calibration>,
                trajectory: ComplexityTrajectory,
            }
            match a.format {
                Format::Csv => {
                    out.data(a.out.as_deref(), &trajectory.to_csv(), &man)?;
                    if let (Some(p), Some(c)) = (&a.out, &calibration) {
                        let mut s = p.as_os_str().to_owned();
                        s.push(".calibration.json");
                        write_file(Path::new(&s), (serde_json::to_string_pretty(c)? + "\n").as_bytes())?;
                    }
                    Ok(())
                }
                Format::Json => out.json(a.out.as_deref(), man, Body { bound, calibration, trajectory }),
            }
        }
        Command::Report(a) => {
            let inputs = a.files.iter().map(|p| Input::read(p)).collect::<Result<Vec<_>>>()?;
            #[derive(Serialize)]
            struct Entry {
                label: String,
                path: PathBuf,
                length: usize,
                sha256: String,
                /// `None` for an empty file.
                entropy: Option<EntropyReport>,
                kc: ComplexityEstimate,
                depth: DepthEstimate,
            }
            let mut objects = Vec::with_capacity(inputs.len());
            for input in &inputs {
                let obj = input.object();
                objects.push(Entry {
                    label: input.label(),
                    path: input.path.clone(),
                    length: obj.len(),
                    sha256: obj.sha256_hex(),
                    entropy: if obj.is_empty() { None } else { Some(shannon_entropy(&obj, None)?) },
                    kc: k_estimate(&obj),
                    depth: depth::depth_estimate(&obj, None)?,
                });
            }
            #[derive(Serialize)]
            struct Body<E: Serialize> {
                objects: Vec<E>,
            }
            let refs: Vec<&Input> = inputs.iter().collect();
            out.json(a.out.as_deref(), manifest("report", &a, &refs)?, Body { objects })
        }
    }
}

fn matrix_body(m: &DistanceMatrix, comp: NcdCompressor) -> Value {
    let values: Vec<Vec<f64>> = (0..m.len()).map(|i| (0..m.len()).map(|j| m.get(i, j)).collect()).collect();
    serde_json::json!({
        "compressor": comp.name(),
        "labels": m.labels(),
        "values": values,
    })
}

fn gen(kind: GenKind, out: &mut Output<'_>) -> Result<()> {
    let (object, path) = match kind {
        GenKind::Random { n, seed, out } => (corpus::gen_random(n, seed), out),
        GenKind::Constant { n, byte, out } => (corpus::gen_constant(n, byte), out),
        GenKind::Periodic { n, pattern, pattern_hex, out } => {
            let pattern = match (pattern, pattern_hex) {
                (Some(p), _) => p.into_bytes(),
                (None, Some(h)) => hex::decode(h.trim()).map_err(|e| Error::invalid(format!("pattern hex: {e}")))?,
                (None, None) => return Err(Error::invalid("a pattern is required")),
            };
            (corpus::gen_periodic(&pattern, n)?, out)
        }
        GenKind::Pi { bits, out } => (corpus::gen_pi_bits(bits)?, out),
        GenKind::Ca { rule, width, steps, seed, out } => {
            let init = seed.map_or(CaInit::SingleCenter, CaInit::SeededRandom);
            (corpus::gen_ca(rule, width, steps, init)?, out)
        }
        GenKind::Family { family, n, seed, out } => {
            let name = match family {
                FamilyArg::Alpha => "alpha",
                FamilyArg::Beta => "beta",
                FamilyArg::Gamma => "gamma",
            };
            let spec = corpus::standard_families()
                .into_iter()
                .find(|f| f.family_id == name)
                .expect("standard family");
            (corpus::gen_family(&spec, n, seed)?, out)
        }
        GenKind::Fixtures { n, seed, out: dir } => {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let mut sidecars = Vec::new();
            for obj in corpus::fixture_classes(n, seed) {
                let path = dir.join(format!("{}.bin", obj.label()));
                obj.write_with_sidecar(&path)?;
                sidecars.push(obj.sidecar());
            }
            let text = serde_json::to_string_pretty(&sidecars)? + "\n";
            return out.text(None, &text);
        }
    };
    object.write_with_sidecar(&path)?;
    let text = serde_json::to_string_pretty(&object.sidecar())? + "\n";
    out.text(None, &text)
}
