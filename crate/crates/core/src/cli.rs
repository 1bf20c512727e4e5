//! Command-line front end: document parsing, subcommands, and report rendering.
//!
//! Matrix documents are line oriented:
//!
//! ```text
//! # comment
//! 3 2
//! +: -1 -2
//! +: 1 -1
//! +: 2 1
//! ```
//!
//! A document may instead hold a single `quasilinear: a1 a2 ...` line. With `--json`
//! the same content is read as `{"matrix": [{"weights": [...], "sign": "+"}, ...]}` or
//! `{"quasilinear": [...]}`.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bott::{
    chern_number, classify_two_fixed_points, is_boundary_candidate, kosniowski_bound,
    realizability_screen, ChernPartition,
};
use crate::rigidity::{
    candidate_constant, check, l_candidate_constant, quasilinear, Mode, RigidityVerdict, Row, Sign,
    WeightMatrix,
};
use crate::search::{
    problem_2_4_search, sweep, Budget, Find, SearchError, SearchReport, SearchSpec, SignPolicy, Tag,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_RIGID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("empty document")]
    Empty,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// What an input document declares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputDocument {
    Matrix(WeightMatrix),
    Quasilinear(Vec<i64>),
}

impl InputDocument {
    pub fn into_matrix(self) -> Result<WeightMatrix, CliError> {
        match self {
            InputDocument::Matrix(w) => Ok(w),
            InputDocument::Quasilinear(a) => {
                quasilinear(&a).map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }
}

fn line_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        message: message.into(),
    }
}

fn parse_ints(line: usize, text: &str) -> Result<Vec<i64>, ParseError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| line_err(line, format!("not an integer: {t:?}")))
        })
        .collect()
}

pub fn parse_document(text: &str) -> Result<InputDocument, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(ParseError::Empty)?;
    if let Some(rest) = header.strip_prefix("quasilinear:") {
        let seed = parse_ints(hline, rest)?;
        if let Some((l, _)) = lines.next() {
            return Err(line_err(l, "unexpected content after quasilinear seed"));
        }
        quasilinear(&seed).map_err(|e| line_err(hline, e.to_string()))?;
        return Ok(InputDocument::Quasilinear(seed));
    }

    let dims = parse_ints(hline, header)?;
    let [m, n] = dims[..] else {
        return Err(line_err(hline, "header must be `m n`"));
    };
    if m < 1 || n < 1 {
        return Err(line_err(hline, "m and n must be positive"));
    }
    let (m, n) = (m as usize, n as usize);

    let mut rows = Vec::with_capacity(m);
    let mut last = hline;
    for (lno, text) in lines {
        last = lno;
        if rows.len() == m {
            return Err(line_err(lno, format!("more than {m} rows")));
        }
        let (sign, weights) = text
            .split_once(':')
            .ok_or_else(|| line_err(lno, "row must look like `sign: w1 ... wn`"))?;
        let sign = match sign.trim() {
            "+" | "+1" | "1" => Sign::Plus,
            "-" | "-1" => Sign::Minus,
            other => return Err(line_err(lno, format!("bad sign {other:?}"))),
        };
        let weights = parse_ints(lno, weights)?;
        if weights.len() != n {
            return Err(line_err(
                lno,
                format!("expected {n} weights, got {}", weights.len()),
            ));
        }
        if weights.contains(&0) {
            return Err(line_err(lno, "weights must be nonzero"));
        }
        rows.push(Row::new(weights, sign));
    }
    if rows.len() != m {
        return Err(line_err(
            last,
            format!("expected {m} rows, got {}", rows.len()),
        ));
    }
    let w = WeightMatrix::new(rows).map_err(|e| line_err(hline, e.to_string()))?;
    Ok(InputDocument::Matrix(w))
}

pub fn parse_json_document(text: &str) -> Result<InputDocument, ParseError> {
    Ok(serde_json::from_str(text)?)
}

/// Renders a matrix in the line-oriented document format.
pub fn render_document(w: &WeightMatrix) -> String {
    let mut out = format!("{} {}\n", w.m(), w.n());
    for r in w.rows() {
        let ws: Vec<String> = r.weights.iter().map(i64::to_string).collect();
        let _ = writeln!(out, "{}: {}", r.sign, ws.join(" "));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    T,
    L,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::T => Mode::T,
            ModeArg::L => Mode::L,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rigid-genera",
    version,
    about = "Exact rigidity and Chern-number checks for circle-action weight data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// Document path, or `-` for stdin.
    input: PathBuf,
    /// Read the document as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide rigidity of a weight matrix.
    Check {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "t", ignore_case = true)]
        mode: ModeArg,
    },
    /// Label a two-fixed-point matrix as Z, L1 or S3.
    Classify {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Chern numbers from the Bott residue sum.
    Chern {
        #[command(flatten)]
        input: InputArgs,
        /// Exponents `r1,...,rn`; all top-degree numbers when omitted.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Realizability and boundary screens.
    Screen {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Exhaustive bounded sweep.
    Search {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: i64,
        #[arg(long, value_enum, default_value = "t", ignore_case = true)]
        mode: ModeArg,
        /// Cap on exact symbolic checks.
        #[arg(long, default_value_t = crate::search::DEFAULT_MAX_EXACT_CHECKS)]
        budget: u64,
        /// Cap on enumerated candidates.
        #[arg(long, default_value_t = crate::search::DEFAULT_MAX_ENUMERATIONS)]
        max_enumerations: u64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        shards: usize,
        /// Only sign patterns with this many `+` rows.
        #[arg(long)]
        plus_rows: Option<usize>,
        /// Newline-delimited JSON report, one record per find.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Search the three-row identity `L(a) + L(b) - L(c) = 1` instead.
        #[arg(long)]
        problem24: bool,
    },
    /// Print the quasilinear matrix of a seed and its rigidity.
    Quasilinear {
        #[arg(allow_negative_numbers = true, required = true, num_args = 2..)]
        seed: Vec<i64>,
        #[arg(long, value_enum, default_value = "t", ignore_case = true)]
        mode: ModeArg,
    },
}

fn read_input(args: &InputArgs) -> Result<WeightMatrix, CliError> {
    let mut text = String::new();
    if args.input.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(&args.input)?;
    }
    let doc = if args.json {
        parse_json_document(&text)?
    } else {
        parse_document(&text)?
    };
    doc.into_matrix()
}

/// Runs the CLI with `args` (including the program name), writing to `out` and `err`.
/// Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Check { input, mode } => {
            let w = read_input(&input)?;
            cmd_check(&w, mode.into(), out)
        }
        Command::Classify { input } => {
            let w = read_input(&input)?;
            let label =
                classify_two_fixed_points(&w).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(out, "{label}")?;
            Ok(EXIT_OK)
        }
        Command::Chern { input, partition } => {
            let w = read_input(&input)?;
            cmd_chern(&w, partition.as_deref(), out)
        }
        Command::Screen { input } => {
            let w = read_input(&input)?;
            cmd_screen(&w, out)
        }
        Command::Search {
            m,
            n,
            bound,
            mode,
            budget,
            max_enumerations,
            shards,
            plus_rows,
            out: path,
            problem24,
        } => {
            if problem24 {
                return cmd_problem24(n, bound, path, out);
            }
            let m = m.ok_or_else(|| {
                CliError::Usage("--m is required unless --problem24 is given".into())
            })?;
            let mut spec = SearchSpec::new(m, n, bound, mode.into());
            spec.budget = Budget {
                max_enumerations,
                max_exact_checks: budget,
            };
            if let Some(plus) = plus_rows {
                spec.sign_policy = SignPolicy::Fixed { plus };
            }
            cmd_search(&spec, shards, path, out)
        }
        Command::Quasilinear { seed, mode } => {
            let w = quasilinear(&seed).map_err(|e| CliError::Usage(e.to_string()))?;
            write!(out, "{}", render_document(&w))?;
            cmd_check(&w, mode.into(), out)
        }
    }
}

fn cmd_check(w: &WeightMatrix, mode: Mode, out: &mut dyn Write) -> Result<i32, CliError> {
    let verdict = check(w, mode);
    match (&verdict, mode) {
        (RigidityVerdict::Rigid(c), Mode::T) => {
            writeln!(out, "Rigid, constant = {c}")?;
            let cand = candidate_constant(w);
            writeln!(
                out,
                "candidate constant: {cand} ({})",
                if &cand == c { "agrees" } else { "DISAGREES" }
            )?;
        }
        (RigidityVerdict::Rigid(c), Mode::L) => {
            let value = c.as_constant().expect("L constant is an integer");
            writeln!(out, "Rigid, constant = {value}")?;
            let cand = l_candidate_constant(w);
            writeln!(
                out,
                "candidate constant: {cand} ({})",
                if cand == value { "agrees" } else { "DISAGREES" }
            )?;
        }
        (RigidityVerdict::NotRigid(wit), _) => {
            writeln!(out, "NotRigid")?;
            let (deg, coeff) = &wit.residual_low;
            writeln!(out, "residual lowest term: ({coeff})*z^{deg}")?;
            match &wit.point {
                Some(p) => writeln!(
                    out,
                    "witness: z = {}, x = {}, y = {}: value {} != expected {}",
                    p.z, p.x, p.y, p.value, p.expected
                )?,
                None => writeln!(
                    out,
                    "witness: no grid point separates; residual is the certificate"
                )?,
            }
        }
    }
    Ok(if verdict.is_rigid() {
        EXIT_OK
    } else {
        EXIT_NOT_RIGID
    })
}

fn parse_partition(text: &str, n: usize) -> Result<ChernPartition, CliError> {
    let r = text
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("bad partition {text:?}")))?;
    if r.len() != n {
        return Err(CliError::Usage(format!(
            "partition has {} entries, matrix has n = {n}",
            r.len()
        )));
    }
    Ok(ChernPartition(r))
}

fn cmd_chern(
    w: &WeightMatrix,
    partition: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let parts = match partition {
        Some(p) => vec![parse_partition(p, w.n())?],
        None => ChernPartition::top_degree(w.n()),
    };
    for r in parts {
        let v = chern_number(w, &r).map_err(|e| CliError::Usage(e.to_string()))?;
        let note = if v.is_integer() {
            "integer"
        } else {
            "NOT an integer"
        };
        if partition.is_some() {
            writeln!(out, "{v} ({note})")?;
        } else {
            writeln!(out, "{r} = {v} ({note})")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_screen(w: &WeightMatrix, out: &mut dyn Write) -> Result<i32, CliError> {
    let violations = realizability_screen(w);
    if violations.is_empty() {
        writeln!(out, "realizability: no violations")?;
    } else {
        writeln!(
            out,
            "realizability: {} violation(s), not the data of a unitary S^1-manifold",
            violations.len()
        )?;
        for v in &violations {
            writeln!(
                out,
                "  <{}, [M]> = {} (must vanish below top degree)",
                v.partition, v.value
            )?;
        }
    }
    if is_boundary_candidate(w) {
        writeln!(out, "boundary candidate: all Chern numbers vanish")?;
    } else {
        writeln!(
            out,
            "boundary candidate: no (some top Chern number is nonzero)"
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FindRecord<'a> {
    matrix: &'a WeightMatrix,
    constant: String,
    tag: &'a Tag,
    kosniowski_ok: bool,
    pairable: bool,
}

pub fn find_record(f: &Find) -> String {
    serde_json::to_string(&FindRecord {
        matrix: &f.matrix,
        constant: f.constant.to_string(),
        tag: &f.tag,
        kosniowski_ok: f.kosniowski_ok,
        pairable: f.pairable,
    })
    .expect("records serialize")
}

/// The machine-readable report: one JSON record per find, newline-terminated.
pub fn render_report_file(report: &SearchReport) -> String {
    report.found.iter().map(|f| find_record(f) + "\n").collect()
}

fn tag_text(t: &Tag) -> String {
    match t {
        Tag::Class(c) => c.to_string(),
        Tag::Quasilinear(a) => format!("quasilinear {a:?}"),
        Tag::CancellingPairs => "cancelling pairs".into(),
        Tag::Other => "other".into(),
    }
}

fn print_report(report: &SearchReport, out: &mut dyn Write) -> io::Result<()> {
    let s = &report.spec;
    writeln!(
        out,
        "search m={} n={} bound={} mode={}: {} candidates, {} rejected by pre-filter, {} exact checks, {:.3}s",
        s.m,
        s.n,
        s.bound,
        s.mode,
        report.stats.enumerated,
        report.stats.prefilter_rejected,
        report.stats.exact_checks,
        report.stats.wall_time.as_secs_f64()
    )?;
    writeln!(out, "{} rigid configuration(s)", report.found.len())?;
    for f in &report.found {
        writeln!(
            out,
            "  {}  constant = {}  [{}]",
            f.matrix,
            f.constant,
            tag_text(&f.tag)
        )?;
    }
    let kos: Vec<&Find> = report.kosniowski_violations().collect();
    if !kos.is_empty() {
        writeln!(
            out,
            "!!! {} find(s) with nonzero constant and fewer than {} fixed points (Kosniowski bound VIOLATED):",
            kos.len(),
            kosniowski_bound(s.n)
        )?;
        for f in kos {
            writeln!(out, "!!!   {}", f.matrix)?;
        }
    }
    let unpaired: Vec<&Find> = report.unpairable().collect();
    if !unpaired.is_empty() {
        writeln!(
            out,
            "!!! {} find(s) whose weights cannot be split into cross-row pairs:",
            unpaired.len()
        )?;
        for f in unpaired {
            writeln!(out, "!!!   {}", f.matrix)?;
        }
    }
    let anomalies: Vec<&Find> = report.l_nonzero_anomalies().collect();
    if !anomalies.is_empty() {
        writeln!(
            out,
            "!!! {} L-rigid find(s) with L != 0, m <= n+1 but not (m = n+1, |L| = 1):",
            anomalies.len()
        )?;
        for f in anomalies {
            writeln!(out, "!!!   {}  L = {}", f.matrix, f.constant)?;
        }
    }
    if s.mode == Mode::L && s.m == s.n + 1 {
        let non_ql = report
            .found
            .iter()
            .filter(|f| !matches!(f.tag, Tag::Quasilinear(_)) && !f.constant.is_zero())
            .count();
        if non_ql > 0 {
            writeln!(
                out,
                "!!! {non_ql} nonzero L-rigid find(s) with m = n+1 that are not quasilinear"
            )?;
        }
    }
    Ok(())
}

fn cmd_search(
    spec: &SearchSpec,
    shards: usize,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (report, code) = match sweep(spec, shards) {
        Ok(r) => (r, EXIT_OK),
        Err(SearchError::BudgetExceeded { partial }) => {
            writeln!(out, "budget exceeded: results below are partial")?;
            (*partial, EXIT_BUDGET)
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    print_report(&report, out)?;
    if let Some(p) = path {
        std::fs::write(&p, render_report_file(&report))?;
        writeln!(out, "report written to {}", p.display())?;
    }
    Ok(code)
}

fn cmd_problem24(
    n: usize,
    bound: i64,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let sols = problem_2_4_search(n, bound).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(
        out,
        "{} solutions (n = {n}, entries in 1..={bound})",
        sols.len()
    )?;
    let mut file = String::new();
    for s in &sols {
        writeln!(out, "  a = {:?}, b = {:?}, c = {:?}", s.a, s.b, s.c)?;
        file.push_str(&serde_json::to_string(s).expect("records serialize"));
        file.push('\n');
    }
    if let Some(p) = path {
        std::fs::write(&p, file)?;
        writeln!(out, "report written to {}", p.display())?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix_document() {
        let doc = "# quasilinear(0,1,2)\n3 2\n+: -1 -2\n+1: 1 -1   # middle\n\n+: 2 1\n";
        let InputDocument::Matrix(w) = parse_document(doc).unwrap() else {
            panic!()
        };
        assert_eq!(w, quasilinear(&[0, 1, 2]).unwrap());
    }

    #[test]
    fn parses_quasilinear_document() {
        assert_eq!(
            parse_document("quasilinear: 0 2 5").unwrap(),
            InputDocument::Quasilinear(vec![0, 2, 5])
        );
        assert!(matches!(
            parse_document("quasilinear: 1 1"),
            Err(ParseError::Line { line: 1, .. })
        ));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("2 1\n+: 1\n", 2),
            ("2 1\n+: 1\n*: 2\n", 3),
            ("1 2\n+: 1 x\n", 2),
            ("1 2\n+: 1 0\n", 2),
            ("1 2\n+: 1\n", 2),
            ("2\n", 1),
            ("1 1\n+: 1\n-: 2\n", 3),
            ("1 1\n+ 1\n", 2),
        ];
        for (doc, line) in cases {
            match parse_document(doc) {
                Err(ParseError::Line { line: l, .. }) => assert_eq!(l, line, "{doc:?}"),
                other => panic!("{doc:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_document("  # nothing\n"),
            Err(ParseError::Empty)
        ));
    }

    #[test]
    fn json_documents() {
        let doc = r#"{"matrix": [{"weights": [5], "sign": "+"}, {"weights": [-5], "sign": "+"}]}"#;
        let w = parse_json_document(doc).unwrap().into_matrix().unwrap();
        assert_eq!(w.m(), 2);
        let doc = r#"{"quasilinear": [0, 1, 2]}"#;
        assert_eq!(
            parse_json_document(doc).unwrap(),
            InputDocument::Quasilinear(vec![0, 1, 2])
        );
        let bad = r#"{"matrix": [{"weights": [0], "sign": "+"}]}"#;
        assert!(parse_json_document(bad).is_err());
    }

    #[test]
    fn render_round_trip() {
        let w = quasilinear(&[3, -1, 4, 0]).unwrap();
        let InputDocument::Matrix(back) = parse_document(&render_document(&w)).unwrap() else {
            panic!()
        };
        assert_eq!(back, w);
    }
}
