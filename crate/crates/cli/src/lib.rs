//! `knitc`: compile garment skeletons and pattern programs to machine code.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use knitskel::constants::MachineConstants;
use knitskel::diag::{self, Diagnostic};
use knitskel::pipeline::{check, compile, CompileInput, Compiled, PatternSource, Stats};
use knitskel::viz::{force_layout, render_svg, Face, RenderOptions, View, Zoom};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "knitc",
    version,
    about = "Compile knitting skeletons to machine instructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, validate and gauge-check; print diagnostics.
    Check(Common),
    /// Run the full pipeline; write instructions and diagnostics.
    Compile(Common),
    /// Write SVG pictures of the time-needle bed.
    Render(Common),
    /// Print diagnostics and write the force-layout preview as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Relaxation iterations.
        #[arg(long, default_value_t = 300)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print node, pattern and stitch counts with per-stage timings.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaceArg {
    Front,
    Back,
    Both,
}

#[derive(Debug, Args)]
struct Common {
    /// Skeleton document.
    skeleton: PathBuf,
    /// Pattern program or drawing; repeatable, applied in order.
    #[arg(short = 'p', long = "pattern")]
    patterns: Vec<PathBuf>,
    /// Parameter override, `name=value`.
    #[arg(short = 'D', value_name = "NAME=VALUE")]
    defines: Vec<String>,
    /// Machine constants file (JSON).
    #[arg(short = 'm', long = "machine")]
    machine: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
    /// Render the compacted bed.
    #[arg(long)]
    compact: bool,
    /// Bed side to render.
    #[arg(long, value_enum)]
    face: Option<FaceArg>,
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = ".")]
    out: PathBuf,
}

/// A failure with its exit code.
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn failed(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_ERROR, e.to_string())
}

fn parse_define(s: &str) -> Result<(String, f64), Failure> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("-D {s}: expected NAME=VALUE")))?;
    let name = name.trim().trim_start_matches('#');
    if name.is_empty() {
        return Err(usage(format!("-D {s}: empty name")));
    }
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("-D {s}: {value:?} is not a number")))?;
    Ok((name.to_string(), value))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl Common {
    fn input(&self) -> Result<CompileInput, Failure> {
        let mut input = CompileInput::new(read(&self.skeleton)?);
        let dir = |p: &Path| p.parent().map(Path::to_path_buf).unwrap_or_default();
        input.base_dir = self
            .patterns
            .first()
            .map_or_else(|| dir(&self.skeleton), |p| dir(p));
        for p in &self.patterns {
            if !p.exists() {
                return Err(usage(format!("{}: no such file", p.display())));
            }
            input.patterns.push(PatternSource::load(p).map_err(failed)?);
        }
        let mut overrides = BTreeMap::new();
        for d in &self.defines {
            let (k, v) = parse_define(d)?;
            overrides.insert(k, v);
        }
        input.overrides = overrides;
        if let Some(m) = &self.machine {
            input.constants = MachineConstants::from_json(&read(m)?).map_err(failed)?;
        }
        Ok(input)
    }

    fn stem(&self) -> String {
        self.skeleton
            .file_stem()
            .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.out)
            .map_err(|e| failed(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| failed(format!("{}: {e}", path.display())))
    }

    fn build(&self) -> Result<Compiled, Failure> {
        let input = self.input()?;
        compile(&input).map_err(|e| compile_failure(&e))
    }
}

fn compile_failure(e: &knitskel::Error) -> Failure {
    if let knitskel::Error::Invalid(diags) = e {
        let mut err = std::io::stderr().lock();
        for d in diags {
            report(&mut err, d);
        }
    }
    failed(e)
}

fn report(out: &mut impl Write, d: &Diagnostic) {
    let sev = if d.is_error() { "error" } else { "warning" };
    let _ = writeln!(out, "{sev}[{:?}]: {}", d.class, d.message);
}

/// Prints diagnostics and picks the exit code.
fn conclude(diags: &[Diagnostic], strict: bool) -> i32 {
    let mut err = std::io::stderr().lock();
    for d in diags {
        report(&mut err, d);
    }
    if diags.iter().any(Diagnostic::is_error) {
        EXIT_ERROR
    } else if strict && !diags.is_empty() {
        EXIT_WARNINGS
    } else {
        EXIT_OK
    }
}

fn stats_text(s: &Stats) -> String {
    let mut t = format!(
        "nodes     {}\npatterns  {}\nstitches  {}\n",
        s.nodes, s.patterns, s.stitches
    );
    for (stage, secs) in &s.timings {
        t.push_str(&format!(
            "{:<9} {:.3} ms\n",
            format!("{stage:?}").to_lowercase(),
            secs * 1e3
        ));
    }
    t.push_str(&format!("total     {:.3} ms\n", s.total() * 1e3));
    t
}

fn stats_json(s: &Stats) -> String {
    let timings: serde_json::Map<String, serde_json::Value> = s
        .timings
        .iter()
        .map(|(stage, secs)| (format!("{stage:?}"), serde_json::json!(secs * 1e3)))
        .collect();
    let v = serde_json::json!({
        "nodes": s.nodes,
        "patterns": s.patterns,
        "stitches": s.stitches,
        "timings_ms": timings,
        "total_ms": s.total() * 1e3,
    });
    serde_json::to_string_pretty(&v).expect("stats serialize") + "\n"
}

fn face_of(f: FaceArg) -> Face {
    match f {
        FaceArg::Front => Face::Front,
        FaceArg::Back => Face::Back,
        FaceArg::Both => Face::Both,
    }
}

fn render(common: &Common, c: &Compiled) -> Result<(), Failure> {
    let stem = common.stem();
    let picture = |view: View, face: Face| {
        let bed = if view == View::Compact {
            &c.compact
        } else {
            &c.bed
        };
        render_svg(
            bed,
            &c.graph,
            &RenderOptions {
                view,
                face,
                zoom: Zoom::Glyph,
                highlight: None,
            },
        )
    };
    if common.compact || common.face.is_some() {
        let view = if common.compact {
            View::Compact
        } else {
            View::Full
        };
        let face = common.face.map_or(Face::Both, face_of);
        return common.write(&format!("{stem}.svg"), &picture(view, face));
    }
    common.write(
        &format!("{stem}.full.svg"),
        &picture(View::Full, Face::Both),
    )?;
    common.write(
        &format!("{stem}.compact.svg"),
        &picture(View::Compact, Face::Both),
    )?;
    common.write(
        &format!("{stem}.front.svg"),
        &picture(View::Full, Face::Front),
    )?;
    common.write(
        &format!("{stem}.back.svg"),
        &picture(View::Full, Face::Back),
    )
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Check(common) => {
            let input = common.input()?;
            let diags = check(&input).map_err(|e| compile_failure(&e))?;
            Ok(conclude(&diags, common.strict))
        }
        Command::Compile(common) => {
            let c = common.build()?;
            common.write(&format!("{}.k", common.stem()), &c.code)?;
            common.write("diagnostics.json", &diag::to_json(&c.diagnostics))?;
            Ok(conclude(&c.diagnostics, common.strict))
        }
        Command::Render(common) => {
            let c = common.build()?;
            render(&common, &c)?;
            Ok(conclude(&c.diagnostics, common.strict))
        }
        Command::Simulate {
            common,
            iterations,
            seed,
        } => {
            let c = common.build()?;
            let preview = force_layout(&c.graph, iterations, seed);
            common.write("diagnostics.json", &diag::to_json(&c.diagnostics))?;
            common.write(&format!("{}.csv", common.stem()), &preview.to_csv())?;
            Ok(conclude(&c.diagnostics, common.strict))
        }
        Command::Stats { common, json } => {
            let c = common.build()?;
            let text = if json {
                stats_json(&c.stats)
            } else {
                stats_text(&c.stats)
            };
            print!("{text}");
            Ok(conclude(&c.diagnostics, common.strict))
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("knitc: {msg}");
            code
        }
    }
}
