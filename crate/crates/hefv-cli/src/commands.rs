//! Implementation of the CLI subcommands and the exit-code taxonomy:
//! 0 ok, 2 user error, 3 I/O error, 4 corrupt data, 5 expression parse
//! error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hefv::collections::{CipherMatrix, CipherVector};
use hefv::encoding::{decode_int, encode_int};
use hefv::params::{estimate_depth, params_help, ParamSet, SecurityRequest};
use hefv::sampling::RandomSource;
use hefv::scheme::{decrypt, encrypt, keygen, RelinKey};
use hefv::{wire, BigInt};

use crate::expr::{self, Expr, Sign};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, out-of-range values, infeasible requests: exit 2.
    User(String),
    /// Filesystem failures: exit 3.
    Io(String),
    /// Unreadable or tampered files: exit 4.
    Corrupt(String),
    /// Expression syntax errors, with position: exit 5.
    Parse(expr::ParseError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Io(_) => 3,
            CliError::Corrupt(_) => 4,
            CliError::Parse(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Io(m) | CliError::Corrupt(m) => f.write_str(m),
            CliError::Parse(e) => write!(f, "{e}"),
        }
    }
}

impl From<hefv::Error> for CliError {
    fn from(e: hefv::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<wire::WireError> for CliError {
    fn from(e: wire::WireError) -> Self {
        CliError::Corrupt(e.to_string())
    }
}

impl From<expr::ParseError> for CliError {
    fn from(e: expr::ParseError) -> Self {
        CliError::Parse(e)
    }
}

pub type CmdResult = Result<(), CliError>;

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn rng_from_seed(seed: &Option<String>) -> Result<RandomSource, CliError> {
    match seed {
        Some(hex_str) => {
            let bytes = hex::decode(hex_str)
                .map_err(|e| CliError::User(format!("--seed is not valid hex: {e}")))?;
            Ok(RandomSource::seeded(&bytes))
        }
        None => RandomSource::crypto().map_err(|e| CliError::User(e.to_string())),
    }
}

/// Accepts a decimal integer or the power form `2^k`.
pub fn parse_big(text: &str) -> Result<BigInt, CliError> {
    if let Some(exp) = text.strip_prefix("2^") {
        let k: u32 = exp
            .parse()
            .map_err(|_| CliError::User(format!("bad exponent in `{text}`")))?;
        return Ok(BigInt::from(1) << k);
    }
    text.parse()
        .map_err(|_| CliError::User(format!("`{text}` is not an integer (or 2^k)")))
}

pub struct ParamsArgs {
    pub security: Option<u32>,
    pub depth: Option<u32>,
    pub d: Option<u32>,
    pub q: Option<String>,
    pub t: Option<String>,
    pub sigma: Option<f64>,
    pub tail_bound: Option<u64>,
    pub relin_base_log2: Option<u32>,
    pub out: PathBuf,
}

/// `params`: writes a parameter-set file, either from a security/depth
/// request or from explicit overrides of the defaults.
pub fn cmd_params(args: ParamsArgs) -> CmdResult {
    let params = build_params(&args)?;
    write_file(&args.out, &wire::encode_params(&params))
}

fn build_params(args: &ParamsArgs) -> Result<ParamSet, CliError> {
    match (args.security, args.depth) {
        (Some(lambda), Some(depth)) => {
            if args.d.is_some() || args.q.is_some() || args.t.is_some() {
                return Err(CliError::User(
                    "--security/--depth cannot be combined with explicit overrides".into(),
                ));
            }
            Ok(params_help(&SecurityRequest { lambda, depth })?)
        }
        (None, None) => {
            let mut b = ParamSet::builder();
            if let Some(d) = args.d {
                b = b.d(d);
            }
            if let Some(q) = &args.q {
                b = b.q(parse_big(q)?);
            }
            if let Some(t) = &args.t {
                b = b.t(parse_big(t)?);
            }
            if let Some(s) = args.sigma {
                b = b.sigma(s);
            }
            if let Some(tb) = args.tail_bound {
                b = b.tail_bound(tb);
            }
            if let Some(w) = args.relin_base_log2 {
                b = b.relin_base_log2(w);
            }
            Ok(b.build()?)
        }
        _ => Err(CliError::User(
            "--security and --depth must be given together".into(),
        )),
    }
}

pub struct KeygenArgs {
    pub params: Option<PathBuf>,
    pub security: Option<u32>,
    pub depth: Option<u32>,
    pub out_prefix: PathBuf,
    pub seed: Option<String>,
}

/// `keygen`: derives the parameter set (from a file or a security/depth
/// request), generates keys, and writes `<prefix>.sk/.pk/.rlk`.
pub fn cmd_keygen(args: KeygenArgs) -> CmdResult {
    let params = match (&args.params, args.security, args.depth) {
        (Some(path), None, None) => wire::decode_params(&read_file(path)?)?,
        (None, Some(lambda), Some(depth)) => params_help(&SecurityRequest { lambda, depth })?,
        _ => {
            return Err(CliError::User(
                "give exactly one of --params or --security with --depth".into(),
            ))
        }
    };
    let params = std::sync::Arc::new(params);
    let mut rng = rng_from_seed(&args.seed)?;
    let (sk, pk, rk) = keygen(&params, &mut rng)?;

    let prefix = args.out_prefix.as_os_str().to_string_lossy();
    write_file(
        Path::new(&format!("{prefix}.sk")),
        &wire::encode_secret_key(&sk),
    )?;
    write_file(
        Path::new(&format!("{prefix}.pk")),
        &wire::encode_public_key(&pk),
    )?;
    write_file(
        Path::new(&format!("{prefix}.rlk")),
        &wire::encode_relin_key(&rk),
    )
}

pub struct EncryptArgs {
    pub pk: PathBuf,
    pub input: PathBuf,
    pub out: PathBuf,
    pub seed: Option<String>,
}

/// `encrypt`: reads whitespace-separated integers from a text file
/// (`-` for stdin) and writes a ciphertext-vector file.
pub fn cmd_encrypt(args: EncryptArgs) -> CmdResult {
    let pk = wire::decode_public_key(&read_file(&args.pk)?)?;
    let text = read_text(&args.input)?;
    let values = parse_integers(&text)?;
    let mut rng = rng_from_seed(&args.seed)?;
    let vec = CipherVector::encrypt_ints(&pk, &values, &mut rng)?;
    write_file(&args.out, &wire::encode_cipher_vec(&vec))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        use std::io::Read;
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn parse_integers(text: &str) -> Result<Vec<BigInt>, CliError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| CliError::User(format!("`{tok}` is not an integer")))
        })
        .collect()
}

pub struct DecryptArgs {
    pub sk: PathBuf,
    pub input: PathBuf,
}

/// `decrypt`: prints one decoded integer per line.
pub fn cmd_decrypt(args: DecryptArgs) -> CmdResult {
    let sk = wire::decode_secret_key(&read_file(&args.sk)?)?;
    let vec = wire::decode_cipher_vec(&read_file(&args.input)?)?;
    for value in vec.decrypt_ints(&sk)? {
        println!("{value}");
    }
    Ok(())
}

pub struct EvalArgs {
    pub rlk: PathBuf,
    pub expr: String,
    pub bind: Vec<String>,
    pub pk: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<String>,
}

/// `eval`: parses the expression, binds named ciphertext-vector files,
/// evaluates elementwise with balanced-tree lowering, and writes the
/// result vector. Integer literals are encrypted under `--pk` and
/// broadcast across lanes.
pub fn cmd_eval(args: EvalArgs) -> CmdResult {
    let ast = expr::parse(&args.expr)?;
    let rk = wire::decode_relin_key(&read_file(&args.rlk)?)?;
    let params = rk.params().clone();

    let mut bindings: Vec<(String, CipherVector)> = Vec::new();
    for spec in &args.bind {
        let (name, path) = spec.split_once('=').ok_or_else(|| {
            CliError::User(format!("--bind `{spec}` is not of the form NAME=FILE"))
        })?;
        let v = wire::decode_cipher_vec(&read_file(Path::new(path))?)?;
        if !params_eq(v.params(), &params) {
            return Err(CliError::User(format!(
                "binding `{name}` was produced under different parameters than the relin key"
            )));
        }
        bindings.push((name.to_string(), v));
    }
    for name in ast.idents() {
        if !bindings.iter().any(|(n, _)| n == name) {
            return Err(CliError::User(format!("unbound identifier `{name}`")));
        }
    }
    let lanes = match bindings.first() {
        Some((_, v)) => v.len(),
        None => 1,
    };
    for (name, v) in &bindings {
        if v.len() != lanes {
            return Err(CliError::User(format!(
                "binding `{name}` has {} elements, expected {lanes}",
                v.len()
            )));
        }
    }

    let pk = match &args.pk {
        Some(path) => Some(wire::decode_public_key(&read_file(path)?)?),
        None => None,
    };
    if ast.has_literal() && pk.is_none() {
        return Err(CliError::User(
            "expression contains integer literals; supply --pk to encrypt them".into(),
        ));
    }
    if let Some(pk) = &pk {
        if !params_eq(pk.params(), &params) {
            return Err(CliError::User(
                "--pk was produced under different parameters than the relin key".into(),
            ));
        }
    }

    let budget = estimate_depth(&params);
    let need = ast.mult_depth();
    if need > budget {
        eprintln!(
            "warning: expression has multiplicative depth {need}, above the estimated budget {budget}; the result may not decrypt correctly"
        );
    }

    let mut rng = rng_from_seed(&args.seed)?;
    let result = eval_vector(&ast, &bindings, pk.as_ref(), &rk, lanes, &mut rng)?;
    write_file(&args.out, &wire::encode_cipher_vec(&result))
}

fn params_eq(a: &std::sync::Arc<ParamSet>, b: &std::sync::Arc<ParamSet>) -> bool {
    **a == **b
}

fn eval_vector(
    e: &Expr,
    bindings: &[(String, CipherVector)],
    pk: Option<&hefv::scheme::PublicKey>,
    rk: &RelinKey,
    lanes: usize,
    rng: &mut RandomSource,
) -> Result<CipherVector, CliError> {
    match e {
        Expr::Ident(name) => Ok(bindings
            .iter()
            .find(|(n, _)| n == name)
            .expect("identifiers checked before evaluation")
            .1
            .clone()),
        Expr::Literal(v) => {
            let pk = pk.expect("literals checked before evaluation");
            let pt = encode_int(v, pk.params())?;
            let ct = encrypt(pk, &pt, rng)?;
            Ok(CipherVector::new(
                pk.params().clone(),
                vec![ct; lanes],
            )?)
        }
        Expr::Sum(terms) => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (sign, t) in terms {
                let v = eval_vector(t, bindings, pk, rk, lanes, rng)?;
                match sign {
                    Sign::Plus => pos.push(v),
                    Sign::Minus => neg.push(v),
                }
            }
            // the grammar guarantees the leading term is positive
            let pos_sum = tree_combine(pos, |a, b| Ok(a.add(b)?))?;
            match neg.is_empty() {
                true => Ok(pos_sum),
                false => {
                    let neg_sum = tree_combine(neg, |a, b| Ok(a.add(b)?))?;
                    Ok(pos_sum.sub(&neg_sum)?)
                }
            }
        }
        Expr::Prod(factors) => {
            let vs = factors
                .iter()
                .map(|f| eval_vector(f, bindings, pk, rk, lanes, rng))
                .collect::<Result<Vec<_>, _>>()?;
            tree_combine(vs, |a, b| Ok(a.mul(b, rk)?))
        }
    }
}

/// Balanced pairwise reduction of a non-empty list.
fn tree_combine<F>(mut level: Vec<CipherVector>, combine: F) -> Result<CipherVector, CliError>
where
    F: Fn(&CipherVector, &CipherVector) -> Result<CipherVector, CliError>,
{
    debug_assert!(!level.is_empty());
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut iter = level.chunks(2);
        for pair in &mut iter {
            if pair.len() == 2 {
                next.push(combine(&pair[0], &pair[1])?);
            } else {
                next.push(pair[0].clone());
            }
        }
        level = next;
    }
    Ok(level.pop().unwrap())
}

pub struct BenchArgs {
    pub params: PathBuf,
    pub reps: u32,
}

/// `bench`: times the eight standard cells — scalar, length-100 vector
/// and 10×10 matrix operations — and prints the mean seconds per
/// operation over `--reps` repetitions.
pub fn cmd_bench(args: BenchArgs) -> CmdResult {
    if args.reps < 1 {
        return Err(CliError::User("--reps must be at least 1".into()));
    }
    let params = std::sync::Arc::new(wire::decode_params(&read_file(&args.params)?)?);
    let mut rng = RandomSource::crypto().map_err(|e| CliError::User(e.to_string()))?;
    let (sk, pk, rk) = keygen(&params, &mut rng)?;

    let ints = |k: usize, lo: i64| -> Vec<BigInt> {
        (0..k).map(|i| BigInt::from(lo + (i as i64 % 9))).collect()
    };
    let s1 = CipherVector::encrypt_ints(&pk, &ints(1, 42), &mut rng)?;
    let s2 = CipherVector::encrypt_ints(&pk, &ints(1, 7), &mut rng)?;
    let v1 = CipherVector::encrypt_ints(&pk, &ints(100, 1), &mut rng)?;
    let v2 = CipherVector::encrypt_ints(&pk, &ints(100, 2), &mut rng)?;
    let m1 = CipherMatrix::encrypt_ints(&pk, 10, 10, &ints(100, 1), &mut rng)?;
    let m2 = CipherMatrix::encrypt_ints(&pk, 10, 10, &ints(100, 2), &mut rng)?;

    // keep the decryption path honest without timing it
    let _ = decode_int(&decrypt(&sk, s1.elems().first().unwrap())?);

    let reps = args.reps;
    let time = |op: &dyn Fn() -> Result<(), CliError>| -> Result<f64, CliError> {
        let start = Instant::now();
        for _ in 0..reps {
            op()?;
        }
        Ok(start.elapsed().as_secs_f64() / reps as f64)
    };

    let cells: Vec<(&str, f64)> = vec![
        ("S+S", time(&|| s1.add(&s2).map(drop).map_err(Into::into))?),
        ("S*S", time(&|| s1.mul(&s2, &rk).map(drop).map_err(Into::into))?),
        ("V+V", time(&|| v1.add(&v2).map(drop).map_err(Into::into))?),
        ("V*V", time(&|| v1.mul(&v2, &rk).map(drop).map_err(Into::into))?),
        (
            "V%*%V",
            time(&|| v1.inner_product(&v2, &rk).map(drop).map_err(Into::into))?,
        ),
        ("M+M", time(&|| m1.add(&m2).map(drop).map_err(Into::into))?),
        ("M*M", time(&|| m1.mul(&m2, &rk).map(drop).map_err(Into::into))?),
        (
            "M%*%M",
            time(&|| m1.mat_mul(&m2, &rk).map(drop).map_err(Into::into))?,
        ),
    ];
    for (label, mean) in cells {
        println!("{label:<8} {mean:.6}");
    }
    Ok(())
}
