// SPDX-License-Identifier: Apache-2.0

//! `smc` command line driver.
//!
//! Results go to stdout, diagnostics to stderr, and the exit status says which
//! stage failed (see [`ExitStatus`]).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::codegen::{self, check_interfaces, check_references, InterfaceManifest, OutputFiles};
use crate::executor::{self, ExecConfig, Mode, Outcome, SchedulerKind, Trace, DEFAULT_MAX_STEPS};
use crate::frontend::{self, MarksError};
use crate::ir::Model;
use crate::partition::{self, derive_partition, equivalence_check, Partition, DEFAULT_LATENCY};
use crate::scenario::Scenario;
use crate::validate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    /// Parse, validation or mark error.
    Invalid = 1,
    /// Runtime error, unresolved scenario reference or failed expectation.
    Runtime = 2,
    /// Equivalence or interface check failed.
    Mismatch = 3,
    /// Bad arguments or unreadable/unwritable files.
    Usage = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "smc", version, about = "Validate, run, partition and compile state-machine models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Fifo,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Lenient,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model and print its diagnostics.
    Validate { model: PathBuf },
    /// Execute a scenario under the reference semantics.
    Run {
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "fifo")]
        scheduler: SchedulerArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "strict")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
        /// Write the JSON Lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the hardware/software split and the boundary signals.
    Partition {
        model: PathBuf,
        #[arg(long)]
        marks: PathBuf,
    },
    /// Co-simulate the partitioned model against the reference.
    Cosim {
        model: PathBuf,
        #[arg(long)]
        marks: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Bus latency in rounds.
        #[arg(long, default_value_t = DEFAULT_LATENCY)]
        latency: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Emit C, VHDL and the interface manifest.
    Gen {
        model: PathBuf,
        #[arg(long)]
        marks: PathBuf,
        #[arg(short = 'o', long = "out")]
        out_dir: PathBuf,
    },
    /// Re-check generated files against their manifest.
    Checkgen { out_dir: PathBuf },
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock()).code()
}

/// Runs one invocation, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { ExitStatus::Usage } else { ExitStatus::Ok };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return status;
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Validate { model } => io.validate(&model),
        Command::Run {
            model,
            scenario,
            scheduler,
            seed,
            mode,
            max_steps,
            trace,
        } => {
            let config = ExecConfig {
                scheduler: match scheduler {
                    SchedulerArg::Fifo => SchedulerKind::GlobalFifo,
                    SchedulerArg::Random => SchedulerKind::Random { seed },
                },
                mode: match mode {
                    ModeArg::Strict => Mode::Strict,
                    ModeArg::Lenient => Mode::Lenient,
                },
                max_steps,
            };
            io.run(&model, &scenario, &config, trace.as_deref())
        }
        Command::Partition { model, marks } => io.partition(&model, &marks),
        Command::Cosim {
            model,
            marks,
            scenario,
            latency,
            trace,
        } => io.cosim(&model, &marks, &scenario, latency, trace.as_deref()),
        Command::Gen { model, marks, out_dir } => io.gen(&model, &marks, &out_dir),
        Command::Checkgen { out_dir } => io.checkgen(&out_dir),
    };
    match result {
        Ok(()) => ExitStatus::Ok,
        Err(status) => status,
    }
}

type Step<T> = Result<T, ExitStatus>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

impl Io<'_> {
    fn say(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{line}");
    }

    fn complain(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{line}");
    }

    fn read(&mut self, path: &Path) -> Step<String> {
        fs::read_to_string(path).map_err(|e| {
            self.complain(format_args!("error: cannot read {}: {e}", label(path)));
            ExitStatus::Usage
        })
    }

    fn write(&mut self, path: &Path, text: &str) -> Step<()> {
        fs::write(path, text).map_err(|e| {
            self.complain(format_args!("error: cannot write {}: {e}", label(path)));
            ExitStatus::Usage
        })
    }

    /// Parses and validates; every diagnostic goes to stderr.
    fn load_model(&mut self, path: &Path) -> Step<Model> {
        let text = self.read(path)?;
        let model = frontend::parse_model(&label(path), &text).map_err(|e| {
            self.complain(format_args!("error E_PARSE {e}"));
            ExitStatus::Invalid
        })?;
        let report = validate(&model);
        for d in &report.diagnostics {
            self.complain(d);
        }
        if report.is_valid() {
            Ok(model)
        } else {
            Err(ExitStatus::Invalid)
        }
    }

    fn load_scenario(&mut self, path: &Path) -> Step<Scenario> {
        let text = self.read(path)?;
        frontend::parse_scenario(&label(path), &text).map_err(|e| {
            self.complain(format_args!("error E_PARSE {e}"));
            ExitStatus::Invalid
        })
    }

    fn load_partition(&mut self, model: &Model, path: &Path) -> Step<Partition> {
        let text = self.read(path)?;
        let marks = frontend::parse_marks(&label(path), &text).map_err(|e| {
            match &e {
                MarksError::Syntax(p) => self.complain(format_args!("error E_PARSE {p}")),
                MarksError::DuplicateMark { loc, key, path } => self.complain(format_args!(
                    "error E_DUP_MARK {loc}: mark `{key}` is already placed on `{path}`"
                )),
            }
            ExitStatus::Invalid
        })?;
        match derive_partition(model, &marks) {
            Ok(derivation) => {
                for w in &derivation.warnings {
                    self.complain(w);
                }
                Ok(derivation.partition)
            }
            Err(errors) => {
                for d in &errors.0 {
                    self.complain(d);
                }
                Err(ExitStatus::Invalid)
            }
        }
    }

    fn validate(&mut self, model: &Path) -> Step<()> {
        self.load_model(model).map(drop)
    }

    fn run(&mut self, model: &Path, scenario: &Path, config: &ExecConfig, trace_out: Option<&Path>) -> Step<()> {
        let model = self.load_model(model)?;
        let scenario = self.load_scenario(scenario)?;
        let trace = executor::run(&model, &scenario, config).map_err(|e| {
            self.complain(format_args!("error {e}"));
            ExitStatus::Runtime
        })?;
        if let Some(path) = trace_out {
            self.write(path, &trace.to_jsonl())?;
        }
        self.say(summary(&trace));
        self.finish(&trace)
    }

    /// Exit status of a finished run: success needs quiescence and every
    /// expectation met.
    fn finish(&mut self, trace: &Trace) -> Step<()> {
        match &trace.outcome {
            Outcome::Quiescent => {}
            Outcome::StepLimit => {
                self.complain("error E_STEP_LIMIT: step limit reached before quiescence");
                return Err(ExitStatus::Runtime);
            }
            Outcome::RuntimeError(e) => {
                self.complain(format_args!("error {e}"));
                return Err(ExitStatus::Runtime);
            }
        }
        let mut ok = true;
        for e in trace.expectations.iter().filter(|e| !e.pass) {
            self.complain(format_args!(
                "error E_EXPECTATION {}: expected {}, got {}",
                e.path,
                literal_text(&e.expected),
                e.actual
            ));
            ok = false;
        }
        if ok {
            Ok(())
        } else {
            Err(ExitStatus::Runtime)
        }
    }

    fn partition(&mut self, model: &Path, marks: &Path) -> Step<()> {
        let model = self.load_model(model)?;
        let partition = self.load_partition(&model, marks)?;
        for (class, domain) in partition.iter() {
            self.say(format_args!("{class} {domain}"));
        }
        for b in partition::boundary(&model, &partition) {
            self.say(format_args!("{}.{} {}", b.receiver_class, b.signal, b.direction));
        }
        Ok(())
    }

    fn cosim(&mut self, model: &Path, marks: &Path, scenario: &Path, latency: u64, trace_out: Option<&Path>) -> Step<()> {
        let model = self.load_model(model)?;
        let partition = self.load_partition(&model, marks)?;
        let scenario = self.load_scenario(scenario)?;
        let config = ExecConfig::default();
        let reference = executor::run(&model, &scenario, &config).map_err(|e| {
            self.complain(format_args!("error {e}"));
            ExitStatus::Runtime
        })?;
        let partitioned = partition::cosim(&model, &partition, &scenario, &config, latency).map_err(|e| {
            self.complain(format_args!("error {e}"));
            match e {
                partition::CosimError::ZeroLatency => ExitStatus::Usage,
                partition::CosimError::Exec(_) => ExitStatus::Runtime,
            }
        })?;
        if let Some(path) = trace_out {
            self.write(path, &partitioned.to_jsonl())?;
        }
        for (which, trace) in [("reference", &reference), ("partitioned", &partitioned.trace)] {
            if let Outcome::RuntimeError(e) = &trace.outcome {
                self.complain(format_args!("error {which} run: {e}"));
                return Err(ExitStatus::Runtime);
            }
        }
        let report = equivalence_check(&reference, &partitioned, scenario.confluent);
        self.say(report.summary());
        self.say(format_args!("crossings={}", partitioned.crossings));
        for level in &report.levels {
            if let Some(d) = &level.divergence {
                self.say(format_args!("{}: {d}", level.level));
            }
        }
        if report.passed() {
            Ok(())
        } else {
            Err(ExitStatus::Mismatch)
        }
    }

    fn gen(&mut self, model_path: &Path, marks: &Path, out_dir: &Path) -> Step<()> {
        let model = self.load_model(model_path)?;
        let partition = self.load_partition(&model, marks)?;
        let name = model_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string());
        let emitted = codegen::generate(&name, &model, &partition).map_err(|e| {
            self.complain(format_args!("error {e}"));
            ExitStatus::Invalid
        })?;
        fs::create_dir_all(out_dir).map_err(|e| {
            self.complain(format_args!("error: cannot create {}: {e}", label(out_dir)));
            ExitStatus::Usage
        })?;
        let files = OutputFiles::for_model(&name);
        let manifest_json = emitted.manifest.to_json();
        for (file, text) in [
            (&files.c_source, &emitted.c_source),
            (&files.c_header, &emitted.c_header),
            (&files.vhdl_source, &emitted.vhdl_source),
            (&files.manifest, &manifest_json),
        ] {
            let path = out_dir.join(file);
            self.write(&path, text)?;
            self.say(format_args!("wrote {}", label(&path)));
        }
        let mut report = check_interfaces(&emitted.c_header, &emitted.vhdl_source, &emitted.manifest);
        report
            .divergences
            .extend(check_references("c_source", &emitted.c_source, &emitted.manifest).divergences);
        if report.passed() {
            Ok(())
        } else {
            for d in &report.divergences {
                self.complain(format_args!("error E_INTERFACE {d}"));
            }
            Err(ExitStatus::Mismatch)
        }
    }

    fn checkgen(&mut self, dir: &Path) -> Step<()> {
        let entries = fs::read_dir(dir).map_err(|e| {
            self.complain(format_args!("error: cannot read {}: {e}", label(dir)));
            ExitStatus::Usage
        })?;
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter_map(|n| n.strip_suffix("_interface.json").map(str::to_string))
            .collect();
        names.sort();
        let name = match names.as_slice() {
            [one] => one.clone(),
            [] => {
                self.complain(format_args!("error: no *_interface.json in {}", label(dir)));
                return Err(ExitStatus::Usage);
            }
            _ => {
                self.complain(format_args!(
                    "error: several manifests in {}: {}",
                    label(dir),
                    names.join(", ")
                ));
                return Err(ExitStatus::Usage);
            }
        };
        let files = OutputFiles::for_model(&name);
        let manifest_text = self.read(&dir.join(&files.manifest))?;
        let c_header = self.read(&dir.join(&files.c_header))?;
        let c_source = self.read(&dir.join(&files.c_source))?;
        let vhdl = self.read(&dir.join(&files.vhdl_source))?;
        let manifest = InterfaceManifest::from_json(&manifest_text).map_err(|e| {
            self.complain(format_args!("error E_INTERFACE {}: malformed manifest: {e}", files.manifest));
            ExitStatus::Mismatch
        })?;
        let mut report = check_interfaces(&c_header, &vhdl, &manifest);
        report
            .divergences
            .extend(check_references("c_source", &c_source, &manifest).divergences);
        if report.passed() {
            self.say(format_args!("ok {} boundary signal(s)", manifest.signals.len()));
            Ok(())
        } else {
            for d in &report.divergences {
                self.say(format_args!("divergence {d}"));
            }
            Err(ExitStatus::Mismatch)
        }
    }
}

fn literal_text(l: &crate::scalar::Literal) -> String {
    match l {
        crate::scalar::Literal::Bool(b) => b.to_string(),
        crate::scalar::Literal::Int(n) => n.to_string(),
    }
}

/// `outcome=<o> steps=<n> expectations=<p>/<q>`
pub fn summary(trace: &Trace) -> String {
    format!(
        "outcome={} steps={} expectations={}/{}",
        trace.outcome,
        trace.events.len(),
        trace.expectations_passed(),
        trace.expectations.len()
    )
}
