use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hrs_sdp::certificate::{emit_graph, ProofCertificate, Verdict};
use hrs_sdp::parse::parse_problem;
use hrs_sdp::prover::{prove, ProveOptions, Technique};

#[derive(Parser)]
#[command(version, about = "Termination prover for higher-order rewrite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Try to prove termination of the system in FILE.
    Prove {
        file: PathBuf,
        /// Write the certificate as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Write the dependency graph in DOT format to this file.
        #[arg(long, value_name = "FILE")]
        emit_graph: Option<PathBuf>,
        /// Only use accessibility cases 0 and 1.
        #[arg(long)]
        legacy_safe: bool,
        /// Orient all rules instead of the usable ones.
        #[arg(long)]
        no_usable: bool,
        #[arg(long, value_enum, default_value = "all")]
        technique: Technique,
        #[arg(long, value_name = "SECS", default_value_t = 60)]
        timeout: u64,
        #[arg(long, value_name = "N", default_value_t = 3)]
        max_proj_len: usize,
        #[arg(long, value_name = "N", default_value_t = 10_000)]
        filter_budget: usize,
        /// Drop graph arcs whose endpoints clash on constructors.
        #[arg(long)]
        refine_graph: bool,
        /// Run the search on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn emit(c: &ProofCertificate, json: bool) {
    if json {
        println!("{}", c.to_json());
    } else {
        print!("{}", c.to_text());
    }
}

fn main() -> ExitCode {
    let Command::Prove {
        file,
        json,
        emit_graph: graph_file,
        legacy_safe,
        no_usable,
        technique,
        timeout,
        max_proj_len,
        filter_budget,
        refine_graph,
        sequential,
    } = Cli::parse().command;
    let opts = ProveOptions {
        legacy_safe,
        use_usable: !no_usable,
        technique,
        timeout_secs: timeout,
        max_proj_len,
        filter_budget,
        refine_graph,
        parallel: !sequential && hrs_sdp::par::parallel_available(),
    };
    let src = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            emit(&ProofCertificate::input_error(format!("{}: {e}", file.display())), json);
            return ExitCode::from(2);
        }
    };
    let r = match parse_problem(&src) {
        Ok(r) => r,
        Err(e) => {
            emit(&ProofCertificate::input_error(format!("{}: {e}", file.display())), json);
            return ExitCode::from(2);
        }
    };
    if let Some(path) = graph_file {
        if let Err(e) = std::fs::write(&path, emit_graph(&r, &opts)) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let c = prove(&r, &opts);
    emit(&c, json);
    match c.verdict {
        Verdict::Terminating => ExitCode::SUCCESS,
        Verdict::Unknown => ExitCode::from(1),
        Verdict::InputError => ExitCode::from(2),
    }
}
