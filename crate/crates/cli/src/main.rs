use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zxbqc_core::audit::{self, AuditReport};
use zxbqc_core::flow::{find_flow, verify_pauli_flow, OpenGraph};
use zxbqc_core::graphlike::{is_graph_like, to_graph_like};
use zxbqc_core::io::{self, ProgramFile, SecretsFile};
use zxbqc_core::obfuscate::{bind_secrets, live_width, prepare, DummyPolicy, ObfuscatedProgram};
use zxbqc_core::resources::{comparison, render_csv, render_table};
use zxbqc_core::runtime::{run_distribution, run_exact, run_recorded, AgentTranscript};
use zxbqc_core::{from_circuit, Circuit, ZXDiagram};

#[derive(Parser)]
#[command(name = "zxbqc", version, about = "Multi-agent blind MBQC compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a circuit file into a graph-like diagram file.
    Convert {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Obfuscate a diagram into a public program and a client secrets file.
    Prepare {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, value_parser = parse_agents)]
        agents: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
        #[arg(long, default_value = "max")]
        pad: DummyPolicy,
    },
    /// Find a Pauli flow of a graph-like diagram, or verify a given one.
    Flow {
        #[arg(long)]
        diagram: PathBuf,
        /// Flow file to check instead of searching.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a prepared program.
    Run {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
        #[arg(long, value_parser = parse_agents)]
        agents: usize,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Enumerate output branches for exact probabilities.
        #[arg(long)]
        exact: bool,
        /// Directory for per-agent, per-sample transcripts.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Blindness audits.
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Print the resource comparison table.
    Resources {
        #[arg(long)]
        depth: u64,
        #[arg(long)]
        width: u64,
        #[arg(long)]
        twoqubit: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Per-slot outcome frequencies of a transcript directory.
    Uniformity {
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transcript distance between two programs with equal leakage profiles.
    Distinguish {
        #[arg(long)]
        program_a: PathBuf,
        #[arg(long)]
        secrets_a: PathBuf,
        #[arg(long)]
        program_b: PathBuf,
        #[arg(long)]
        secrets_b: PathBuf,
        #[arg(long, value_parser = parse_agents, default_value = "2")]
        agents: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Slot distributions of a circuit's program with masks off and on.
    LeakageDemo {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_parser = parse_agents, default_value = "2")]
        agents: usize,
        #[arg(long, default_value = "10000")]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        jobs: Jobs,
    },
    /// Parent phases recoverable by merging two blocks.
    Collude {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        secrets: PathBuf,
        #[arg(long, num_args = 2, value_names = ["J", "K"])]
        blocks: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Jobs {
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

fn parse_agents(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(m) if m >= 2 => Ok(m),
        _ => Err(format!("`{s}` is not an agent count of at least 2")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn set_jobs(jobs: &Jobs) -> Result<()> {
    if let Some(n) = jobs.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_diagram(path: &Path) -> Result<ZXDiagram> {
    io::diagram_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_program(program: &Path, secrets: &Path) -> Result<ObfuscatedProgram> {
    let public = io::program_from_json(&read(program)?)?;
    Ok(io::secrets_from_json(&read(secrets)?)?.program(&public)?)
}

fn circuit_program(path: &Path, seed: u64) -> Result<ObfuscatedProgram> {
    let circuit = Circuit::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(prepare(&from_circuit(&circuit)?, DummyPolicy::Max, &mut rng)?)
}

fn transcript_name(sample: u64, agent: usize) -> String {
    format!("sample-{sample:06}-agent-{agent}.json")
}

fn read_transcripts(dir: &Path) -> Result<Vec<Vec<AgentTranscript>>> {
    let mut samples: BTreeMap<String, Vec<AgentTranscript>> = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let Some(sample) = name.strip_prefix("sample-").and_then(|r| r.split_once("-agent-")).map(|(s, _)| s.to_string())
        else {
            continue;
        };
        let t: AgentTranscript =
            serde_json::from_str(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
        samples.entry(sample).or_default().push(t);
    }
    Ok(samples
        .into_values()
        .map(|mut v| {
            v.sort_by_key(|t| t.agent);
            v
        })
        .collect())
}

/// Exit status of a command that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn report_text(reports: &[AuditReport]) -> String {
    reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n")
}

fn execute(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Convert { circuit, out } => {
            let c = Circuit::parse(&read(&circuit)?).with_context(|| format!("parsing {}", circuit.display()))?;
            let d = to_graph_like(&from_circuit(&c)?);
            write(&out, &io::diagram_to_json(&d))?;
            let violations = is_graph_like(&d);
            if violations.is_empty() {
                println!("graph-like: yes");
            } else {
                println!("graph-like: no");
                for v in &violations {
                    println!("  {v}");
                }
            }
            Ok(verdict(violations.is_empty()))
        }
        Command::Prepare { diagram, agents, seed, out, secrets, pad } => {
            let d = read_diagram(&diagram)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let program = prepare(&d, pad, &mut rng)?;
            let bound = bind_secrets(&program, &mut rng, true);
            write(&out, &io::program_to_json(&ProgramFile::new(&program)))?;
            write(&secrets, &io::secrets_to_json(&SecretsFile::new(&program, bound)))?;
            println!("blocks: {}", program.block_count());
            println!("agents: {agents}");
            println!("measured spiders: {}", program.order.len());
            println!("simulator width: {}", live_width(&program.diagram, &program.order));
            Ok(Verdict::Pass)
        }
        Command::Flow { diagram, verify, out } => {
            let d = read_diagram(&diagram)?;
            let mut g = OpenGraph::from_diagram(&d)?;
            match verify {
                Some(path) => {
                    let (flow, planes) = io::flow_from_json(&read(&path)?)?;
                    g.planes.extend(planes);
                    let violations = verify_pauli_flow(&g, &flow);
                    let mut text = String::new();
                    if violations.is_empty() {
                        text.push_str("verdict: pass\n");
                    } else {
                        text.push_str(&format!("verdict: fail ({} violations)\n", violations.len()));
                        for v in &violations {
                            text.push_str(&format!("{v}\n"));
                        }
                    }
                    emit(out.as_deref(), &text)?;
                    Ok(verdict(violations.is_empty()))
                }
                None => match find_flow(&g)? {
                    Some(flow) => {
                        emit(out.as_deref(), &io::flow_to_json(&flow, &g.planes))?;
                        Ok(Verdict::Pass)
                    }
                    None => {
                        eprintln!("no Pauli flow exists for this diagram");
                        Ok(Verdict::Fail)
                    }
                },
            }
        }
        Command::Run { program, secrets, agents, samples, seed, out, exact, transcripts, jobs } => {
            set_jobs(&jobs)?;
            let p = read_program(&program, &secrets)?;
            if exact {
                let dist = run_exact(&p, agents, 1, seed)?.remove(0);
                write(&out, &io::histogram_to_json(&dist))?;
            } else if let Some(dir) = transcripts {
                let (h, ts) = run_recorded(&p, agents, samples, seed)?;
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for (i, sample) in ts.iter().enumerate() {
                    for t in sample {
                        write(&dir.join(transcript_name(i as u64, t.agent)), &io::to_json(t))?;
                    }
                }
                write(&out, &io::histogram_to_json(&h.counts))?;
            } else {
                let h = run_distribution(&p, agents, samples, seed)?;
                write(&out, &io::histogram_to_json(&h.counts))?;
            }
            Ok(Verdict::Pass)
        }
        Command::Audit(cmd) => audit_command(cmd),
        Command::Resources { depth, width, twoqubit, format } => {
            let rows = comparison(depth, width, twoqubit)?;
            print!("{}", match format {
                Format::Table => render_table(&rows),
                Format::Csv => render_csv(&rows),
            });
            Ok(Verdict::Pass)
        }
    }
}

fn audit_command(cmd: AuditCommand) -> Result<Verdict> {
    match cmd {
        AuditCommand::Uniformity { transcripts, out } => {
            let samples = read_transcripts(&transcripts)?;
            let report = audit::outcome_uniformity(&samples)?;
            emit(out.as_deref(), &report.to_string())?;
            Ok(verdict(report.pass))
        }
        AuditCommand::Distinguish { program_a, secrets_a, program_b, secrets_b, agents, trials, seed, out, jobs } => {
            set_jobs(&jobs)?;
            let a = read_program(&program_a, &secrets_a)?;
            let b = read_program(&program_b, &secrets_b)?;
            let report = audit::indistinguishability(&a, &b, agents, trials, seed)?;
            emit(out.as_deref(), &report.to_string())?;
            Ok(verdict(report.pass))
        }
        AuditCommand::LeakageDemo { circuit, agents, samples, seed, out, jobs } => {
            set_jobs(&jobs)?;
            let p = circuit_program(&circuit, seed)?;
            let (masked, unmasked) = audit::correction_leakage_demo(&p, agents, samples, seed)?;
            emit(out.as_deref(), &report_text(&[unmasked.clone(), masked.clone()]))?;
            Ok(verdict(masked.pass && unmasked.pass))
        }
        AuditCommand::Collude { program, secrets, blocks, out } => {
            let public = io::program_from_json(&read(&program)?)?;
            let record = io::secrets_from_json(&read(&secrets)?)?;
            let p = record.program(&public)?;
            let (j, k) = (blocks[0], blocks[1]);
            if j >= p.block_count() || k >= p.block_count() {
                bail!("blocks must be below {}", p.block_count());
            }
            let recovered = audit::collusion_recover(&p, &record.secrets, (j, k));
            let spanning: Vec<_> = p
                .split
                .children
                .iter()
                .filter(|(_, &(e, o))| {
                    let held = [p.partition.block(e), p.partition.block(o)];
                    held.iter().all(|b| *b == Some(j) || *b == Some(k))
                })
                .map(|(&parent, _)| parent)
                .collect();
            let correct = recovered.iter().filter(|(v, a)| p.alpha[v] == **a).count();
            let mut text = format!("blocks: {j} {k}\nrecovered: {}\ncorrect: {correct}\n", recovered.len());
            for (v, a) in &recovered {
                text.push_str(&format!("parent {v}: {a}\n"));
            }
            emit(out.as_deref(), &text)?;
            Ok(verdict(correct == recovered.len() && (recovered.is_empty() || recovered.len() == spanning.len())))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
