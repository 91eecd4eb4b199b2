use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rbsa_cli::commands::{self, Format, Method, Outcome, EXIT_BAD_INPUT, EXIT_ENVIRONMENT};

#[derive(Parser)]
#[command(
    name = "rbsa",
    version,
    about = "Red-black trees with symbolic double-black removal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Insert keys into an empty tree and print it.
    Build {
        keys: Vec<i64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Delete a key from a tree document and print the trace.
    Delete {
        /// Tree document path, `-` for stdin.
        #[arg(long, default_value = "-")]
        tree: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        key: i64,
        #[arg(long, value_enum, default_value_t)]
        method: Method,
        /// Embed a rendered tree after every event.
        #[arg(long)]
        snapshots: bool,
    },
    /// Check a tree document for red-black violations.
    Validate {
        #[arg(long, default_value = "-")]
        tree: PathBuf,
    },
    /// Step counts of a named comparison instance.
    Compare { case: String },
    /// Differential fuzzing of both engines.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        ops: usize,
        /// Keys are drawn from 0..KEYS.
        #[arg(long, default_value_t = 256)]
        keys: i64,
        #[arg(long)]
        json: bool,
        /// Disable `∂″` in the symbolic engine (negative control).
        #[arg(long, hide = true)]
        skip_psar2: bool,
    },
    /// Run the golden catalog.
    Golden {
        #[arg(long)]
        json: bool,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, env = "RBSA_PORT", default_value_t = 7423)]
        port: u16,
    },
}

fn read_input(path: &PathBuf) -> Result<String, Outcome> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map(|_| text).map_err(|e| Outcome {
        stderr: format!("error: cannot read {}: {e}\n", path.display()),
        code: EXIT_BAD_INPUT,
        ..Default::default()
    })
}

fn serve(port: u16) -> Outcome {
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return env_error(format!("cannot start runtime: {e}")),
    };
    rt.block_on(async {
        let listener = match rbsa_cli::server::bind(port).await {
            Ok(l) => l,
            Err(e) => return env_error(format!("cannot bind 127.0.0.1:{port}: {e}")),
        };
        eprintln!("listening on http://127.0.0.1:{port}");
        match rbsa_cli::server::serve(listener).await {
            Ok(()) => Outcome::default(),
            Err(e) => env_error(format!("server stopped: {e}")),
        }
    })
}

fn env_error(msg: String) -> Outcome {
    Outcome {
        stderr: format!("error: {msg}\n"),
        code: EXIT_ENVIRONMENT,
        ..Default::default()
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build { keys, format } => commands::build(&keys, format),
        Command::Delete {
            tree,
            key,
            method,
            snapshots,
        } => match read_input(&tree) {
            Ok(doc) => commands::delete(&doc, key, method, snapshots),
            Err(o) => o,
        },
        Command::Validate { tree } => match read_input(&tree) {
            Ok(doc) => commands::validate(&doc),
            Err(o) => o,
        },
        Command::Compare { case } => commands::compare(&case),
        Command::Fuzz {
            seed,
            ops,
            keys,
            json,
            skip_psar2,
        } => commands::fuzz(commands::fuzz_config(seed, ops, keys, skip_psar2), json),
        Command::Golden { json } => commands::golden(json),
        Command::Serve { port } => serve(port),
    }
}

fn main() -> ExitCode {
    let out = run(Cli::parse());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
