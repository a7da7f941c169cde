//! Command-line front end: key lifecycle, file encryption/decryption,
//! expression evaluation over stored ciphertexts, parameter selection and
//! benchmarks, all over the bit-exact `hefv::wire` file format.

pub mod commands;
pub mod expr;

use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};

use commands::{
    cmd_bench, cmd_decrypt, cmd_encrypt, cmd_eval, cmd_keygen, cmd_params, BenchArgs, CliError,
    DecryptArgs, EncryptArgs, EvalArgs, KeygenArgs, ParamsArgs,
};

#[derive(Parser)]
#[command(
    name = "hefv",
    about = "Somewhat-homomorphic encryption over cyclotomic rings",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a parameter-set file (defaults, overrides, or a security/depth request).
    Params {
        /// Minimum security level in bits (with --depth).
        #[arg(long)]
        security: Option<u32>,
        /// Required multiplicative depth (with --security).
        #[arg(long)]
        depth: Option<u32>,
        /// Ring degree parameter d (n = 2^(d-1)).
        #[arg(long)]
        d: Option<u32>,
        /// Ciphertext modulus, decimal or 2^k.
        #[arg(long)]
        q: Option<String>,
        /// Plaintext modulus, decimal or 2^k.
        #[arg(long)]
        t: Option<String>,
        /// Noise standard deviation.
        #[arg(long)]
        sigma: Option<f64>,
        /// Gaussian tail bound B (default ceil(10*sigma)).
        #[arg(long)]
        tail_bound: Option<u64>,
        /// Relinearisation decomposition base exponent w.
        #[arg(long)]
        relin_base_log2: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate secret/public/relinearisation keys.
    #[command(group(
        ArgGroup::new("source").required(true).args(["params", "security"])
    ))]
    Keygen {
        /// Parameter-set file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Minimum security level in bits (requires --depth).
        #[arg(long, requires = "depth")]
        security: Option<u32>,
        /// Required multiplicative depth (requires --security).
        #[arg(long, requires = "security")]
        depth: Option<u32>,
        /// Keys are written to <prefix>.sk, <prefix>.pk, <prefix>.rlk.
        #[arg(long)]
        out_prefix: PathBuf,
        /// Hex seed for bit-reproducible key generation.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Encrypt whitespace-separated integers from a text file.
    Encrypt {
        /// Public-key file.
        #[arg(long)]
        pk: PathBuf,
        /// Text file of integers ('-' for stdin).
        #[arg(long = "in")]
        input: PathBuf,
        /// Output ciphertext-vector file.
        #[arg(long)]
        out: PathBuf,
        /// Hex seed for reproducible encryption.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Decrypt a ciphertext-vector file and print one integer per line.
    Decrypt {
        /// Secret-key file.
        #[arg(long)]
        sk: PathBuf,
        /// Ciphertext-vector file.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Evaluate an arithmetic expression over stored ciphertexts.
    Eval {
        /// Relinearisation-key file.
        #[arg(long)]
        rlk: PathBuf,
        /// Expression over bound names, e.g. "a*b + c".
        #[arg(long)]
        expr: String,
        /// NAME=FILE ciphertext bindings (repeatable).
        #[arg(long)]
        bind: Vec<String>,
        /// Public key, needed when the expression has integer literals.
        #[arg(long)]
        pk: Option<PathBuf>,
        /// Output ciphertext-vector file.
        #[arg(long)]
        out: PathBuf,
        /// Hex seed for reproducible literal encryption.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Time the standard scalar/vector/matrix operations.
    Bench {
        /// Parameter-set file.
        #[arg(long)]
        params: PathBuf,
        /// Repetitions per cell.
        #[arg(long)]
        reps: u32,
    },
}

/// Configures the worker pool from HEFV_THREADS (0 or unset = all cores)
/// and runs one command; returns the process exit code.
pub fn run() -> i32 {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Params {
            security,
            depth,
            d,
            q,
            t,
            sigma,
            tail_bound,
            relin_base_log2,
            out,
        } => cmd_params(ParamsArgs {
            security,
            depth,
            d,
            q,
            t,
            sigma,
            tail_bound,
            relin_base_log2,
            out,
        }),
        Command::Keygen {
            params,
            security,
            depth,
            out_prefix,
            seed,
        } => cmd_keygen(KeygenArgs {
            params,
            security,
            depth,
            out_prefix,
            seed,
        }),
        Command::Encrypt {
            pk,
            input,
            out,
            seed,
        } => cmd_encrypt(EncryptArgs {
            pk,
            input,
            out,
            seed,
        }),
        Command::Decrypt { sk, input } => cmd_decrypt(DecryptArgs { sk, input }),
        Command::Eval {
            rlk,
            expr,
            bind,
            pk,
            out,
            seed,
        } => cmd_eval(EvalArgs {
            rlk,
            expr,
            bind,
            pk,
            out,
            seed,
        }),
        Command::Bench { params, reps } => cmd_bench(BenchArgs { params, reps }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HEFV_THREADS") else {
        return Ok(());
    };
    let count: usize = raw
        .parse()
        .map_err(|_| CliError::User(format!("HEFV_THREADS=`{raw}` is not a number")))?;
    if count == 0 {
        return Ok(()); // 0 = all cores, rayon's default
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|e| CliError::User(format!("thread pool: {e}")))
}
