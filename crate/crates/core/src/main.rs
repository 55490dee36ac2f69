use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torusconj::fibercorrect::{solve, DiophantineSystem};
use torusconj::freegroup::FreeGroup;
use torusconj::minkowski::{certify, Budgets};
use torusconj::pipeline::{conj_ung, decide, verify_witness, Answer, JsjInput, Status, TorusInput, WhiteList, WitnessFile, DEFAULT_MAX_EDGES};
use torusconj::whitehead::{same_orbit, Marking};
use torusconj::Error;

#[derive(Parser)]
#[command(name = "torusconj", version, about = "Fiber-and-orientation preserving isomorphy of free-by-cyclic groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide isomorphy of two JSJ descriptions given white vertex candidates.
    Decide {
        #[arg(long)]
        jsj_a: PathBuf,
        #[arg(long)]
        jsj_b: PathBuf,
        #[arg(long)]
        whitelists: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
        max_edges: usize,
        /// Write the witness of a positive verdict here instead of stdout.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Decide conjugacy in Out(F) of two monodromies.
    ConjUng {
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        jsj_a: PathBuf,
        #[arg(long)]
        jsj_b: PathBuf,
        #[arg(long)]
        whitelists: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
        max_edges: usize,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    Whitehead {
        #[command(subcommand)]
        cmd: WhiteheadCmd,
    },
    Minkowski {
        #[command(subcommand)]
        cmd: MinkowskiCmd,
    },
    /// Solve A x = b over the integers.
    SolveDiophantine { file: PathBuf },
    /// Recheck a witness file produced by `decide` or `conj-ung`.
    VerifyWitness { file: PathBuf },
}

#[derive(Subcommand)]
enum WhiteheadCmd {
    /// Whether two markings lie in one Aut(F_n) orbit; each argument is a
    /// marking or a file holding one.
    Orbit {
        m1: String,
        m2: String,
        #[arg(long)]
        rank: Option<usize>,
    },
}

#[derive(Subcommand)]
enum MinkowskiCmd {
    Certify {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        #[arg(long, default_value_t = 6)]
        max_witness_len: usize,
    },
}

enum Outcome {
    Decided,
    Undecided,
}

fn read(p: &Path) -> Result<String, Error> {
    std::fs::read_to_string(p).map_err(|e| Error::Format(format!("{}: {e}", p.display())))
}

fn emit_witness(json: String, to: &Option<PathBuf>) -> Result<(), Error> {
    match to {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| Error::Format(format!("{}: {e}", p.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn marking_arg(s: &str) -> Result<String, Error> {
    let p = Path::new(s);
    if p.is_file() {
        read(p)
    } else {
        Ok(s.to_string())
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.cmd {
        Cmd::Decide { jsj_a, jsj_b, whitelists, max_edges, witness } => {
            let a = JsjInput::parse(&read(&jsj_a)?)?;
            let b = JsjInput::parse(&read(&jsj_b)?)?;
            let wl = WhiteList::parse(&read(&whitelists)?, &a, &b)?;
            let v = decide(&a, &b, &wl, max_edges)?;
            println!("verdict: {}", v.status);
            println!("candidates: {}", v.candidates);
            if let Some(r) = &v.reason {
                println!("reason: {r}");
            }
            if let Some(w) = &v.witness {
                emit_witness(WitnessFile::new(w, &a, &b).to_json(), &witness)?;
            }
            Ok(if v.status == Status::Undecided { Outcome::Undecided } else { Outcome::Decided })
        }
        Cmd::ConjUng { alpha, beta, jsj_a, jsj_b, whitelists, max_edges, witness } => {
            let (al, be) = (TorusInput::parse(&read(&alpha)?)?, TorusInput::parse(&read(&beta)?)?);
            let a = JsjInput::parse(&read(&jsj_a)?)?;
            let b = JsjInput::parse(&read(&jsj_b)?)?;
            let wl = whitelists.map(|p| read(&p).and_then(|t| WhiteList::parse(&t, &a, &b))).transpose()?;
            let v = conj_ung(&al, &be, &a, &b, wl.as_ref(), max_edges)?;
            println!("answer: {}", v.answer);
            println!("verdict: {}", v.verdict.status);
            if let Some(r) = &v.verdict.reason {
                println!("reason: {r}");
            }
            if let Some(t) = &v.theta {
                println!("theta: {}", t.format(al.torus.fiber()));
            }
            if let Some(f) = WitnessFile::for_conjugacy(&v, &al, &be, &a, &b) {
                emit_witness(f.to_json(), &witness)?;
            }
            Ok(if v.answer == Answer::Undecided { Outcome::Undecided } else { Outcome::Decided })
        }
        Cmd::Whitehead { cmd: WhiteheadCmd::Orbit { m1, m2, rank } } => {
            let (s1, s2) = (marking_arg(&m1)?, marking_arg(&m2)?);
            let parse = |n: usize| -> Result<(FreeGroup, Marking, Marking), Error> {
                let g = FreeGroup::new(n);
                let (x, y) = (Marking::parse(&g, &s1)?, Marking::parse(&g, &s2)?);
                Ok((g, x, y))
            };
            let (g, x, y) = match rank {
                Some(n) => parse(n)?,
                None => (1..=26).find_map(|n| parse(n).ok()).ok_or_else(|| Error::Format("markings do not parse over the default generators".into()))?,
            };
            match same_orbit(&x, &y) {
                Some(phi) => {
                    println!("same orbit: yes");
                    println!("witness: {}", phi.format(&g));
                }
                None => println!("same orbit: no"),
            }
            Ok(Outcome::Decided)
        }
        Cmd::Minkowski { cmd: MinkowskiCmd::Certify { rank, max_degree, max_witness_len } } => {
            let b = Budgets { max_degree, max_witness_len, ..Budgets::default() };
            let c = certify(rank, &b)?;
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&c.to_json()).expect("serializable"));
            Ok(Outcome::Decided)
        }
        Cmd::SolveDiophantine { file } => {
            let sys = DiophantineSystem::parse(&read(&file)?)?;
            match solve(&sys) {
                Some(x) => println!("solution: {}", x.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")),
                None => println!("no solution"),
            }
            Ok(Outcome::Decided)
        }
        Cmd::VerifyWitness { file } => {
            let f = WitnessFile::from_json(&read(&file)?)?;
            let r = verify_witness(&f)?;
            println!("witness: valid");
            println!("fiber loops checked: {}", r.fiber_loops);
            println!("stable loop checked: {}", r.stable_checked);
            println!("conjugacy checked: {}", r.conjugacy_checked);
            Ok(Outcome::Decided)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Decided) => ExitCode::SUCCESS,
        Ok(Outcome::Undecided) => ExitCode::from(2),
        Err(Error::Resource(m)) => {
            eprintln!("undecided: {m}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
