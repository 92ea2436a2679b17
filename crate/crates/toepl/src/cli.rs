//! Command line front end.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::closed_forms::{
    boshernitzan_verdict, complexity_formula, palindrome_formula, repetitivity_class,
    repetitivity_formula, Verdict,
};
use crate::debruijn::build_graph;
use crate::error::{Error, Result};
use crate::oracle::{collect_language, repetitivity_oracle, PatternKind};
use crate::spec_io::{parse_spec_file, AnySpec};
use crate::spectral::{
    gordon_patterns, gordon_verify, leading_source, lyapunov_sequence, measure, pq_diagnostic,
    spectrum_approx, spectrum_of_period, trace_map_residual, trace_sequence, Direction, PotFn,
    PotentialSpec, TransferContext,
};
use crate::verify::{verify_coding, verify_sturmian};
use crate::words::{
    default_budget, is_aperiodic, is_palindrome, rotation_word, set_letters, sturmian_blocks,
    Alphabet, CodingSpec, Letter, SturmianSpec,
};

#[derive(Debug, Parser)]
#[command(name = "toepl", version, about = "Simple Toeplitz and Sturmian subshifts: invariants, graphs and spectral scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Palindromic blocks p^k with their lengths
    Blocks(BlocksArgs),
    /// Factor complexity p(L)
    Complexity(TableArgs),
    /// Palindrome complexity P(L)
    Palindromes(TableArgs),
    /// Repetitivity function R(L)
    Repetitivity(TableArgs),
    /// de Bruijn graph of length-L words
    Debruijn(DebruijnArgs),
    /// Boshernitzan and alpha-repetitivity verdicts
    Verdicts(VerdictArgs),
    /// Spectrum of a periodic approximant
    Spectrum(SpectrumArgs),
    /// Traces over periodic approximants and the trace map residual
    Tracemap(TracemapArgs),
    /// Lyapunov averages (1/j) ln ||A(+-j)|| on a leading word
    Lyapunov(LyapunovArgs),
    /// Three-block lower bounds on a leading word
    Gordon(GordonArgs),
    /// Quasiweight positivity diagnostic
    Pq(PqArgs),
    /// Sturmian blocks and rotation coding
    Sturmian(SturmianArgs),
    /// Formula-versus-oracle and spectral identity checks
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Spec file, or bundled:<name> (pd, grigorchuk, gen_grigorchuk, nonb, fibonacci)
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct BlocksArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 5)]
    pub k_max: i64,
    /// Blocks longer than this are shown truncated
    #[arg(long, default_value_t = 200)]
    pub max_print: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Formula,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long = "max-L", default_value_t = 32)]
    pub max_l: u64,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    /// Output format
    #[arg(long = "out", value_enum, default_value_t = TableFormat::Csv)]
    pub out: TableFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Args)]
pub struct DebruijnArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
    pub format: GraphFormat,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerdictArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Exponents alpha >= 1, as integers or fractions p/q
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub alpha: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// g(x) = lambda * (letter index of x), with f = 1
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Letter table for g, e.g. a=0,b=1
    #[arg(long)]
    pub g: Option<String>,
    /// Letter table for f, e.g. a=1,b=1.5
    #[arg(long)]
    pub f: Option<String>,
    /// JSON potential file with window tables
    #[arg(long)]
    pub potential: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 6)]
    pub k: i64,
    /// Explicit period word instead of the level-k approximant
    #[arg(long)]
    pub period: Option<String>,
    /// Energy range lo,hi; derived from the potential when absent
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_001)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    pub format: TableFormat,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Debug, Args)]
pub struct TracemapArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 12)]
    pub k_max: i64,
    /// Comma separated energies
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Option<Vec<f64>>,
    /// Number of equally spaced energies in --range when --energies is absent
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Centre letter of the leading word; first eventual letter when absent
    #[arg(long)]
    pub letter: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 10_000)]
    pub j_max: u64,
    #[arg(long, default_value_t = 1000)]
    pub stride: u64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub direction: DirectionArg,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Left3,
    Right3,
}

#[derive(Debug, Args)]
pub struct GordonArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub letter: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    /// Block length; all lengths |p^(k-1)|+1 with k <= --k-max are scanned when absent
    #[arg(long = "l")]
    pub l: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, default_value_t = 8)]
    pub k_max: i64,
    /// Initial vector x,y
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi0: Option<Vec<f64>>,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Debug, Args)]
pub struct PqArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Prefix length L; |p^6| or |s_9| when absent
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Largest j; |p^3| or |s_4| when absent
    #[arg(long)]
    pub j_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SturmianArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 200)]
    pub max_print: usize,
    /// Also print this many letters of the rotation coding from x0 = 0
    #[arg(long)]
    pub rotation: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Arg(e.to_string()))?;
    run(cli.command, out)
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Blocks(a) => blocks(a, out),
        Command::Complexity(a) => table(a, Table::Complexity, out),
        Command::Palindromes(a) => table(a, Table::Palindromes, out),
        Command::Repetitivity(a) => table(a, Table::Repetitivity, out),
        Command::Debruijn(a) => debruijn(a, out),
        Command::Verdicts(a) => verdicts(a, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Tracemap(a) => tracemap(a, out),
        Command::Lyapunov(a) => lyapunov(a, out),
        Command::Gordon(a) => gordon(a, out),
        Command::Pq(a) => pq(a, out),
        Command::Sturmian(a) => sturmian(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

fn load(spec: &SpecArg) -> Result<AnySpec> {
    parse_spec_file(&spec.spec)
}

fn load_coding(spec: &SpecArg) -> Result<CodingSpec> {
    load(spec)?.coding()
}

fn truncated(al: &Alphabet, w: &[Letter], max: usize) -> String {
    if w.len() <= max {
        al.render(w)
    } else {
        format!("{}...", al.render(&w[..max]))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn blocks(a: BlocksArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load_coding(&a.spec)?;
    writeln!(out, "k,length,a_k,n_k,block")?;
    for k in -1..=a.k_max {
        let len = spec.block_len(k)?;
        let word = if a.max_print == 0 {
            String::new()
        } else {
            let shown = spec.block_len_u64(k)?.is_some_and(|l| l <= default_budget());
            if shown {
                truncated(&spec.alphabet, &spec.block(k, default_budget())?, a.max_print)
            } else {
                "...".into()
            }
        };
        let (ak, nk) = if k >= 0 {
            (
                spec.alphabet.name(spec.a_at(k as usize)?).to_string(),
                spec.n_at(k as usize)?.to_string(),
            )
        } else {
            (String::new(), String::new())
        };
        writeln!(out, "{k},{len},{ak},{nk},{word}")?;
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Table {
    Complexity,
    Palindromes,
    Repetitivity,
}

#[derive(Serialize)]
struct Row {
    #[serde(rename = "L")]
    l: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<String>,
}

fn table(a: TableArgs, which: Table, out: &mut dyn Write) -> Result<()> {
    let spec = load_coding(&a.spec)?;
    let want_formula = a.mode != Mode::Oracle;
    let want_oracle = a.mode != Mode::Formula;
    let idx = if want_oracle && which != Table::Repetitivity {
        Some(collect_language(&spec, a.max_l as usize)?)
    } else {
        None
    };
    let start = if which == Table::Repetitivity { 1 } else { 0 };
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for l in start..=a.max_l {
        let lb = BigInt::from(l);
        let formula = if want_formula {
            let v = match which {
                Table::Complexity => complexity_formula(&spec, &lb).map(Some),
                Table::Palindromes => palindrome_formula(&spec, &lb).map(Some),
                Table::Repetitivity => match repetitivity_formula(&spec, &lb) {
                    Ok(v) => Ok(Some(v)),
                    // below the covered range
                    Err(Error::Range(_)) => Ok(None),
                    Err(e) => Err(e),
                },
            }?;
            Some(v)
        } else {
            None
        };
        let oracle = if want_oracle {
            Some(match which {
                Table::Complexity => idx.as_ref().unwrap().complexity(l as usize)?.to_string(),
                Table::Palindromes => idx.as_ref().unwrap().palindromes(l as usize)?.to_string(),
                Table::Repetitivity => match repetitivity_oracle(&spec, l as usize) {
                    Ok(r) => r.to_string(),
                    Err(Error::BoundExceeded { lower_bound }) => format!(">{lower_bound}"),
                    Err(e) => return Err(e),
                },
            })
        } else {
            None
        };
        let fval = formula.as_ref().map(|f| f.as_ref().map(|v| v.value.to_string()));
        if let (Some(Some(f)), Some(o)) = (&fval, &oracle) {
            if !o.starts_with('>') && f != o {
                mismatches.push(l);
            }
        }
        rows.push(Row {
            l,
            branch: formula.as_ref().and_then(|f| f.as_ref().map(|v| format!("k={} {}", v.k, v.branch))),
            formula: fval.map(|f| f.unwrap_or_default()),
            oracle,
        });
    }
    match a.out {
        TableFormat::Json => writeln!(out, "{}", to_json(&rows))?,
        TableFormat::Csv => {
            let mut header = vec!["L"];
            if want_formula {
                header.extend(["formula", "branch"]);
            }
            if want_oracle {
                header.push("oracle");
            }
            writeln!(out, "{}", header.join(","))?;
            for r in &rows {
                let mut cols = vec![r.l.to_string()];
                if want_formula {
                    cols.push(r.formula.clone().unwrap_or_default());
                    cols.push(r.branch.clone().unwrap_or_default());
                }
                if want_oracle {
                    cols.push(r.oracle.clone().unwrap_or_default());
                }
                writeln!(out, "{}", cols.join(","))?;
            }
        }
    }
    if !mismatches.is_empty() {
        return Err(Error::Verification(format!(
            "formula and oracle differ at L = {mismatches:?}"
        )));
    }
    Ok(())
}

fn debruijn(a: DebruijnArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load(&a.spec)?;
    let (idx, alphabet) = match &spec {
        AnySpec::Coding(c) => (collect_language(c, a.l + 1)?, c.alphabet.clone()),
        AnySpec::Sturmian(s) => (
            crate::oracle::collect_sturmian_language(s, a.l + 1)?,
            SturmianSpec::alphabet(),
        ),
    };
    let g = build_graph(&idx, a.l)?;
    let text = match a.format {
        GraphFormat::Dot => g.to_dot(&alphabet),
        GraphFormat::Json => g.to_json(&alphabet),
    };
    match &a.out {
        Some(path) => write_file(path, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn parse_alpha(s: &str) -> Result<BigRational> {
    let bad = || Error::Arg(format!("cannot parse alpha {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

#[derive(Serialize)]
#[serde(untagged)]
enum Outcome<T> {
    Decided(T),
    Undecidable { undecidable: String },
}

fn outcome<T>(r: Result<T>) -> Result<Outcome<T>> {
    match r {
        Ok(v) => Ok(Outcome::Decided(v)),
        Err(Error::Undecidable(m)) => Ok(Outcome::Undecidable { undecidable: m }),
        Err(e) => Err(e),
    }
}

fn verdicts(a: VerdictArgs, out: &mut dyn Write) -> Result<()> {
    #[derive(Serialize)]
    struct Aperiodic {
        aperiodic: bool,
        recurrent_letters: Vec<String>,
    }
    #[derive(Serialize)]
    struct All {
        aperiodicity: Outcome<Aperiodic>,
        boshernitzan: Outcome<Verdict>,
        repetitivity: Vec<Outcome<crate::closed_forms::RepetitivityClass>>,
    }
    let spec = load_coding(&a.spec)?;
    let alphas = a.alpha.iter().map(|s| parse_alpha(s)).collect::<Result<Vec<_>>>()?;
    let ap = is_aperiodic(&spec).map(|v| Aperiodic {
        aperiodic: v.aperiodic,
        recurrent_letters: v.recurrent.iter().map(|&l| spec.alphabet.name(l).to_string()).collect(),
    });
    let all = All {
        aperiodicity: outcome(ap)?,
        boshernitzan: outcome(boshernitzan_verdict(&spec))?,
        repetitivity: alphas
            .iter()
            .map(|al| outcome(repetitivity_class(&spec, al)))
            .collect::<Result<_>>()?,
    };
    writeln!(out, "{}", to_json(&all))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// potentials

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum RawPotFn {
    Const(f64),
    Letters(HashMap<String, f64>),
    Windows(HashMap<String, f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    #[serde(default)]
    radius: usize,
    f: RawPotFn,
    g: RawPotFn,
}

fn letter_table(al: &Alphabet, map: &HashMap<String, f64>, what: &str) -> Result<Vec<f64>> {
    let mut t = vec![f64::NAN; al.len()];
    for (name, &v) in map {
        let id = al
            .id(name)
            .ok_or_else(|| Error::Potential(format!("{what}: unknown letter {name:?}")))?;
        t[id as usize] = v;
    }
    if let Some(i) = t.iter().position(|v| v.is_nan()) {
        return Err(Error::Potential(format!(
            "{what}: no value for letter {}",
            al.name(i as Letter)
        )));
    }
    Ok(t)
}

fn parse_table_arg(al: &Alphabet, s: &str, what: &str) -> Result<Vec<f64>> {
    let mut map = HashMap::new();
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Arg(format!("--{what}: expected letter=value, got {part:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Arg(format!("--{what}: bad number {v:?}")))?;
        map.insert(k.trim().to_string(), v);
    }
    letter_table(al, &map, what)
}

fn raw_fn(al: &Alphabet, raw: &RawPotFn, what: &str) -> Result<PotFn> {
    Ok(match raw {
        RawPotFn::Const(c) => PotFn::Const(*c),
        RawPotFn::Letters(m) => PotFn::Letter(letter_table(al, m, what)?),
        RawPotFn::Windows(m) => PotFn::Window(
            m.iter()
                .map(|(k, &v)| Ok((al.parse_word(k)?, v)))
                .collect::<Result<_>>()?,
        ),
    })
}

pub fn parse_potential_file(al: &Alphabet, path: &Path) -> Result<PotentialSpec> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawPotential = serde_json::from_str(&text)
        .map_err(|e| Error::Potential(format!("{}: {e}", path.display())))?;
    PotentialSpec::new(raw.radius, raw_fn(al, &raw.f, "f")?, raw_fn(al, &raw.g, "g")?)
}

fn build_potential(al: &Alphabet, p: &PotentialArgs) -> Result<PotentialSpec> {
    if let Some(path) = &p.potential {
        return parse_potential_file(al, path);
    }
    let g = match &p.g {
        Some(s) => parse_table_arg(al, s, "g")?,
        None => (0..al.len()).map(|i| p.lambda * i as f64).collect(),
    };
    let f = match &p.f {
        Some(s) => PotFn::Letter(parse_table_arg(al, s, "f")?),
        None => PotFn::Const(1.0),
    };
    PotentialSpec::new(0, f, PotFn::Letter(g))
}

/// `[-(2 max|f| + max|g|), +...]` with a small margin: contains every approximant spectrum.
fn default_range(pot: &PotentialSpec) -> (f64, f64) {
    let mx = |p: &PotFn| match p {
        PotFn::Const(c) => c.abs(),
        PotFn::Letter(t) => t.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        PotFn::Window(m) => m.values().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let r = 2.0 * mx(&pot.f) + mx(&pot.g) + 0.25;
    (-r, r)
}

fn range_arg(r: &Option<Vec<f64>>, pot: &PotentialSpec) -> Result<(f64, f64)> {
    match r {
        Some(v) if v.len() == 2 => Ok((v[0], v[1])),
        Some(_) => Err(Error::Arg("--range needs lo,hi".into())),
        None => Ok(default_range(pot)),
    }
}

fn spectrum(a: SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    #[derive(Serialize)]
    struct Out {
        k: Option<i64>,
        period: Option<String>,
        grid: usize,
        tol: f64,
        measure: f64,
        intervals: Vec<crate::spectral::Interval>,
    }
    let spec = load_coding(&a.spec)?;
    let pot = build_potential(&spec.alphabet, &a.potential)?;
    let range = range_arg(&a.range, &pot)?;
    let (iv, k, period) = match &a.period {
        Some(p) => {
            let w = spec.alphabet.parse_word(p)?;
            (spectrum_of_period(&w, &pot, range, a.grid, a.tol)?, None, Some(p.clone()))
        }
        None => (spectrum_approx(&spec, &pot, a.k, range, a.grid, a.tol)?, Some(a.k), None),
    };
    match a.format {
        TableFormat::Json => writeln!(
            out,
            "{}",
            to_json(&Out {
                k,
                period,
                grid: a.grid,
                tol: a.tol,
                measure: measure(&iv),
                intervals: iv,
            })
        )?,
        TableFormat::Csv => {
            writeln!(out, "lo,hi")?;
            for i in &iv {
                writeln!(out, "{},{}", i.lo, i.hi)?;
            }
        }
    }
    Ok(())
}

fn tracemap(a: TracemapArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load_coding(&a.spec)?;
    let pot = build_potential(&spec.alphabet, &a.potential)?;
    let energies = match &a.energies {
        Some(e) => e.clone(),
        None => {
            let (lo, hi) = range_arg(&a.range, &pot)?;
            if a.grid < 2 {
                return Err(Error::Arg("--grid must be at least 2".into()));
            }
            (0..a.grid)
                .map(|i| lo + (hi - lo) * i as f64 / (a.grid - 1) as f64)
                .collect()
        }
    };
    let doubling = spec.alphabet.len() == 2
        && (0..=a.k_max + 1).all(|k| spec.n_at(k as usize).map(|n| n == 2).unwrap_or(false));
    writeln!(out, "E,k,tau,log10_abs_tau,residual")?;
    for e in energies {
        let taus = trace_sequence(&spec, &pot, e, a.k_max)?;
        for k in -1..=a.k_max {
            let t = taus[(k + 1) as usize];
            let resid = if doubling && k >= 1 && k < a.k_max {
                // residual of tau_{k+1} from tau_k and tau_{k-1}
                trace_map_residual(&taus, k as usize).to_string()
            } else {
                String::new()
            };
            let log10 = if t.mant == 0.0 {
                f64::NEG_INFINITY
            } else {
                t.ln() / std::f64::consts::LN_10
            };
            writeln!(out, "{e},{k},{},{log10},{resid}", t.to_f64())?;
        }
    }
    Ok(())
}

fn centre_letter(spec: &CodingSpec, letter: &Option<String>) -> Result<Letter> {
    match letter {
        Some(name) => spec
            .alphabet
            .id(name)
            .ok_or_else(|| Error::Arg(format!("unknown letter {name:?}"))),
        None => Ok(set_letters(spec.eventual_alphabet()?)[0]),
    }
}

fn lyapunov(a: LyapunovArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load_coding(&a.spec)?;
    let pot = build_potential(&spec.alphabet, &a.potential)?;
    let e = centre_letter(&spec, &a.letter)?;
    let src = leading_source(&spec, e, a.j_max + 2 * pot.radius as u64 + 4)?;
    let ctx = TransferContext::new(src, pot, a.energy);
    let fwd = if a.direction != DirectionArg::Backward {
        Some(lyapunov_sequence(&ctx, a.j_max, Direction::Forward, a.stride)?)
    } else {
        None
    };
    let bwd = if a.direction != DirectionArg::Forward {
        Some(lyapunov_sequence(&ctx, a.j_max, Direction::Backward, a.stride)?)
    } else {
        None
    };
    let js: Vec<u64> = fwd.as_ref().or(bwd.as_ref()).unwrap().iter().map(|p| p.0).collect();
    writeln!(out, "j,forward,backward")?;
    for (i, j) in js.iter().enumerate() {
        let f = fwd.as_ref().map(|v| v[i].1.to_string()).unwrap_or_default();
        let b = bwd.as_ref().map(|v| v[i].1.to_string()).unwrap_or_default();
        writeln!(out, "{j},{f},{b}")?;
    }
    Ok(())
}

fn gordon(a: GordonArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load_coding(&a.spec)?;
    let pot = build_potential(&spec.alphabet, &a.potential)?;
    let e = centre_letter(&spec, &a.letter)?;
    let phi0 = match &a.phi0 {
        Some(v) if v.len() == 2 => Some([v[0], v[1]]),
        Some(_) => return Err(Error::Arg("--phi0 needs x,y".into())),
        None => None,
    };
    let lengths: Vec<usize> = match a.l {
        Some(l) => vec![l],
        None => (0..=a.k_max)
            .map(|k| {
                spec.block_len_u64(k - 1)?
                    .map(|v| v as usize + 1)
                    .ok_or_else(|| Error::Range("block length exceeds 64 bits".into()))
            })
            .collect::<Result<_>>()?,
    };
    let radius = 2 * *lengths.iter().max().unwrap() as u64 + 2 * pot.radius as u64 + 8;
    let src = leading_source(&spec, e, radius)?;
    let ctx = TransferContext::new(src.clone(), pot, a.energy);
    let pairs: Vec<(usize, PatternKind)> = match (a.l, a.kind) {
        (Some(l), Some(k)) => vec![(
            l,
            match k {
                KindArg::Left3 => PatternKind::Left3,
                KindArg::Right3 => PatternKind::Right3,
            },
        )],
        _ => {
            let found = gordon_patterns(&src, &lengths)?;
            let found: Vec<_> = found
                .into_iter()
                .filter(|(_, k)| match a.kind {
                    Some(KindArg::Left3) => *k == PatternKind::Left3,
                    Some(KindArg::Right3) => *k == PatternKind::Right3,
                    None => true,
                })
                .collect();
            if found.is_empty() {
                return Err(Error::Pattern(format!(
                    "no three-block pattern at the lengths {lengths:?}"
                )));
            }
            found
        }
    };
    let reports = pairs
        .into_iter()
        .map(|(l, k)| gordon_verify(&ctx, l, k, phi0))
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "{}", to_json(&reports))?;
    if reports.iter().any(|r| !r.bound_ok) {
        return Err(Error::Verification("a lower bound failed".into()));
    }
    Ok(())
}

fn pq(a: PqArgs, out: &mut dyn Write) -> Result<()> {
    let (word, l_default, j_default, bound) = match load(&a.spec)? {
        AnySpec::Coding(c) => {
            let len = |k| {
                c.block_len_u64(k)?
                    .ok_or_else(|| Error::Range("block length exceeds 64 bits".into()))
            };
            let l = a.l.map_or(len(6)?, |v| v as u64);
            (c.p_inf_prefix(l, default_budget())?, l as usize, len(3)? as usize, (1, 8))
        }
        AnySpec::Sturmian(s) => {
            let mut k = 9;
            let mut b = sturmian_blocks(&s, k, default_budget())?;
            if let Some(l) = a.l {
                while b.s[k].len() < l {
                    k += 1;
                    b = sturmian_blocks(&s, k, default_budget())?;
                }
            }
            let l = a.l.unwrap_or(b.s[9].len());
            let j = b.s[4].len();
            (b.s[k].clone(), l, j, (1, 12))
        }
    };
    let l = a.l.unwrap_or(l_default);
    let j_max = a.j_max.unwrap_or(j_default).min(l);
    let js: Vec<usize> = (1..=j_max).collect();
    let vals = pq_diagnostic(&word, &js, l)?;
    let bound = BigRational::new(BigInt::from(bound.0), BigInt::from(bound.1));
    writeln!(out, "j,value,decimal,at_least_bound")?;
    for (j, v) in &vals {
        let dec = v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN);
        writeln!(out, "{j},{v},{dec},{}", *v >= bound)?;
    }
    Ok(())
}

fn sturmian(a: SturmianArgs, out: &mut dyn Write) -> Result<()> {
    let s = load(&a.spec)?.sturmian()?;
    let b = sturmian_blocks(&s, a.k_max.max(1), default_budget())?;
    let al = SturmianSpec::alphabet();
    writeln!(out, "k,length,s_k,p_k_palindrome")?;
    for (k, w) in b.s.iter().enumerate() {
        let pal = b.p[k].as_ref().map(|p| is_palindrome(p).to_string()).unwrap_or_default();
        writeln!(out, "{k},{},{},{pal}", w.len(), truncated(&al, w, a.max_print))?;
    }
    if let Some(n) = a.rotation {
        let w = rotation_word(&s, &BigRational::zero(), n)?;
        writeln!(out, "rotation,{n},{},", truncated(&al, &w, a.max_print))?;
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let rep = match load(&a.spec)? {
        AnySpec::Coding(c) => verify_coding(&c, a.depth)?,
        AnySpec::Sturmian(s) => verify_sturmian(&s, a.depth)?,
    };
    match a.format {
        ReportFormat::Text => write!(out, "{}", rep.render_text())?,
        ReportFormat::Json => writeln!(out, "{}", to_json(&rep))?,
    }
    if !rep.passed() {
        return Err(Error::Verification("some checks failed".into()));
    }
    Ok(())
}
