//! Command-line front end.
//!
//! Every subcommand renders a list of flat records as JSON lines, CSV or an
//! aligned table. Exit codes: 0 success, 1 invalid input, 2 an incomplete
//! result under `--strict`.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::contact::{
    chern_residue, classify_structure, enumerate_structures, RotationVector, DEFAULT_STRUCTURE_CAP,
};
use crate::contfrac::{CFExpansion, LensSpace};
use crate::lattice::{gram, orthogonal_group, Isometry};
use crate::obstruct::{
    decide_full, decide_theorem_with, resolve, scan, DecideOptions, Record, ScanOptions,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "lens-milnor",
    version,
    about = "Decide whether a contact lens space can bound a Milnor fiber"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Maximum number of isometries examined, and of structures enumerated.
    #[arg(long, default_value_t = DEFAULT_STRUCTURE_CAP, global = true)]
    cap: u64,

    /// Omit table headers and notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Exit with status 2 when any result is incomplete.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct Target {
    /// Lens space as P/Q.
    lens: Option<String>,

    /// Continued fraction coefficients; all-negative input is accepted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    coeffs: Option<Vec<i64>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Negative continued fraction of p/q.
    Expand {
        #[command(flatten)]
        target: Target,
        /// Print the all-negative form.
        #[arg(long)]
        negative: bool,
    },
    /// Every tight structure, with class, c_1 and the theorem-layer verdict.
    Structures {
        #[command(flatten)]
        target: Target,
    },
    /// c_1 of one structure.
    Chern {
        #[command(flatten)]
        target: Target,
        /// Rotation numbers r_1,...,r_n.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            num_args = 1,
            required = true
        )]
        rot: Vec<i64>,
    },
    /// The integral isometry group of the plumbing lattice.
    Autgroup {
        #[command(flatten)]
        target: Target,
    },
    /// Decide one structure (r = 0 by default).
    Obstruct {
        #[command(flatten)]
        target: Target,
        /// Rotation numbers r_1,...,r_n.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        rot: Option<Vec<i64>>,
        /// Skip the isometry search.
        #[arg(long)]
        theorem_only: bool,
    },
    /// Every structure on every lens space up to a bound.
    Scan {
        #[arg(long)]
        pmax: i64,
        #[arg(long)]
        rot_zero_only: bool,
        #[arg(long)]
        all_even_only: bool,
        #[arg(long)]
        theorem_only: bool,
        /// Worker threads; the output does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// One output line for a structure. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub p: i64,
    pub q: i64,
    pub coeffs: Vec<i64>,
    pub rotation: Option<Vec<i64>>,
    pub tight_class: Option<String>,
    pub chern: Option<i64>,
    /// Outcome name, or `Error`.
    pub verdict: String,
    /// Reason name, or the error code.
    pub reason: String,
    /// Row-major.
    pub witness: Option<Vec<i64>>,
    pub group_order: Option<u64>,
    pub complete: bool,
}

impl From<&Record> for OutputRecord {
    fn from(r: &Record) -> Self {
        let (verdict, reason, witness, group_order, complete) = match &r.verdict {
            Ok(v) => (
                v.outcome.name().to_string(),
                v.reason.name().to_string(),
                v.witness().map(|a| a.entries().to_vec()),
                v.group_order,
                v.complete,
            ),
            Err(e) => ("Error".to_string(), e.code().to_string(), None, None, false),
        };
        OutputRecord {
            p: r.lens.p(),
            q: r.lens.q(),
            coeffs: r.coeffs.coeffs().to_vec(),
            rotation: r.rotation.as_ref().map(|x| x.values().to_vec()),
            tight_class: r.class.map(|c| c.short_name().to_string()),
            chern: r.chern.map(|c| c.value),
            verdict,
            reason,
            witness,
            group_order,
            complete,
        }
    }
}

const RECORD_HEADER: [&str; 11] = [
    "p",
    "q",
    "coeffs",
    "rotation",
    "tight_class",
    "chern",
    "verdict",
    "reason",
    "witness",
    "group_order",
    "complete",
];

/// A rendered row: machine cells for csv, display cells for the table.
struct Row {
    csv: Vec<String>,
    table: Vec<String>,
}

fn seq(xs: &[i64], sep: char) -> String {
    let inner: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", inner.join(&sep.to_string()))
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

fn square(flat: &[i64]) -> String {
    let n = flat.len().sqrt();
    if n == 0 || n * n != flat.len() {
        return seq(flat, ',');
    }
    let rows: Vec<String> = flat.chunks(n).map(|r| seq(r, ',')).collect();
    format!("[{}]", rows.join(","))
}

impl OutputRecord {
    fn row(&self) -> Row {
        let cells = |sep: char, matrix: &dyn Fn(&[i64]) -> String| {
            vec![
                self.p.to_string(),
                self.q.to_string(),
                seq(&self.coeffs, sep),
                self.rotation
                    .as_ref()
                    .map(|r| seq(r, sep))
                    .unwrap_or_default(),
                opt(&self.tight_class),
                opt(&self.chern),
                self.verdict.clone(),
                self.reason.clone(),
                self.witness.as_ref().map(|w| matrix(w)).unwrap_or_default(),
                opt(&self.group_order),
                self.complete.to_string(),
            ]
        };
        Row {
            csv: cells(';', &|w| seq(w, ';')),
            table: cells(',', &square),
        }
    }
}

/// Serializes one record without header.
pub fn emit_record(record: &OutputRecord, format: Format) -> String {
    match format {
        Format::Json => json_line(record),
        Format::Csv => format!("{}\n", record.row().csv.join(",")),
        Format::Table => format!("{}\n", record.row().table.join("  ")),
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records serialize");
    s.push('\n');
    s
}

fn render(header: &[&str], rows: &[Row], format: Format, quiet: bool) -> String {
    let mut out = String::new();
    match format {
        Format::Json => unreachable!("json is rendered from the typed records"),
        Format::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.csv.join(","));
                out.push('\n');
            }
        }
        Format::Table => {
            let mut lines: Vec<Vec<String>> = Vec::new();
            if !quiet {
                lines.push(header.iter().map(|h| h.to_string()).collect());
            }
            lines.extend(rows.iter().map(|r| r.table.clone()));
            let widths: Vec<usize> = (0..header.len())
                .map(|c| {
                    lines
                        .iter()
                        .map(|l| l[c].chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for l in &lines {
                let mut line = String::new();
                for (c, cell) in l.iter().enumerate() {
                    if c > 0 {
                        line.push_str("  ");
                    }
                    line.push_str(cell);
                    line.extend(std::iter::repeat_n(' ', widths[c] - cell.chars().count()));
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
        }
    }
    out
}

/// Serializes records with the header (csv, table) the format calls for.
pub fn emit_records(records: &[OutputRecord], format: Format, quiet: bool) -> String {
    if format == Format::Json {
        return records.iter().map(json_line).collect();
    }
    let rows: Vec<Row> = records.iter().map(OutputRecord::row).collect();
    render(&RECORD_HEADER, &rows, format, quiet)
}

#[derive(Serialize)]
struct ExpandLine {
    p: i64,
    q: i64,
    coeffs: Vec<i64>,
}

#[derive(Serialize)]
struct ElementLine {
    p: i64,
    q: i64,
    coeffs: Vec<i64>,
    index: usize,
    trace: i64,
    matrix: Vec<i64>,
    complete: bool,
}

/// Parses `P/Q`.
pub fn parse_lens(s: &str) -> Result<LensSpace> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::InvalidInput(format!("expected P/Q, got {s:?}")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::InvalidInput(format!("{t:?} is not an integer")))
    };
    LensSpace::new(num(p)?, num(q)?)
}

fn resolve_target(t: &Target) -> Result<(LensSpace, CFExpansion)> {
    let lens = t.lens.as_deref().map(parse_lens).transpose()?;
    let coeffs = t
        .coeffs
        .as_deref()
        .map(CFExpansion::from_signed)
        .transpose()?;
    resolve(lens, coeffs)
}

struct Output {
    text: String,
    complete: bool,
    notes: Vec<String>,
}

fn records_output(records: &[Record], format: Format, quiet: bool) -> Output {
    let out: Vec<OutputRecord> = records.iter().map(OutputRecord::from).collect();
    let notes = records
        .iter()
        .filter_map(|r| match &r.verdict {
            Err(e) => Some(format!("{}: {e}", r.lens)),
            Ok(v) if !v.complete => Some(format!("{}: {}", r.lens, v.explanation())),
            Ok(_) => None,
        })
        .collect();
    Output {
        text: emit_records(&out, format, quiet),
        complete: out.iter().all(|r| r.complete),
        notes,
    }
}

fn theorem_record(lens: LensSpace, r: RotationVector, opts: &DecideOptions) -> Record {
    let verdict = decide_theorem_with(&lens, &r, &opts.registry);
    full_record(lens, r, verdict)
}

fn full_record(
    lens: LensSpace,
    r: RotationVector,
    verdict: Result<crate::obstruct::Verdict>,
) -> Record {
    let chern = chern_residue(&r);
    Record {
        lens,
        coeffs: r.coeffs().clone(),
        class: Some(classify_structure(&r)),
        chern: chern.as_ref().ok().copied(),
        verdict: chern.and(verdict),
        rotation: Some(r),
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let opts = DecideOptions {
        cap: cli.cap,
        ..DecideOptions::default()
    };
    let (format, quiet) = (cli.format, cli.quiet);
    match &cli.command {
        Command::Expand { target, negative } => {
            let (lens, coeffs) = resolve_target(target)?;
            let shown = if *negative {
                coeffs.negated()
            } else {
                coeffs.coeffs().to_vec()
            };
            let text = match format {
                Format::Json => json_line(&ExpandLine {
                    p: lens.p(),
                    q: lens.q(),
                    coeffs: shown,
                }),
                Format::Csv => format!(
                    "p,q,coeffs\n{},{},{}\n",
                    lens.p(),
                    lens.q(),
                    seq(&shown, ';')
                ),
                Format::Table => format!("{}\n", seq(&shown, ',')),
            };
            Ok(Output {
                text,
                complete: true,
                notes: vec![],
            })
        }
        Command::Structures { target } => {
            let (lens, coeffs) = resolve_target(target)?;
            let records: Vec<Record> = enumerate_structures(&coeffs, cli.cap)?
                .into_iter()
                .map(|r| theorem_record(lens, r, &opts))
                .collect();
            Ok(records_output(&records, format, quiet))
        }
        Command::Chern { target, rot } => {
            let (lens, coeffs) = resolve_target(target)?;
            let r = RotationVector::new(coeffs, rot.clone())?;
            let record = theorem_record(lens, r, &opts);
            Ok(records_output(&[record], format, quiet))
        }
        Command::Autgroup { target } => {
            let (lens, coeffs) = resolve_target(target)?;
            let group = orthogonal_group(&gram(&coeffs)?, cli.cap);
            let mut notes = Vec::new();
            if !group.complete {
                notes.push(format!(
                    "{lens}: isometry search stopped at the cap of {}; the list is partial",
                    cli.cap
                ));
            }
            Ok(Output {
                text: group_text(
                    lens,
                    &coeffs,
                    &group.elements,
                    group.complete,
                    format,
                    quiet,
                ),
                complete: group.complete,
                notes,
            })
        }
        Command::Obstruct {
            target,
            rot,
            theorem_only,
        } => {
            let (lens, coeffs) = resolve_target(target)?;
            let structures = match rot {
                Some(r) => vec![RotationVector::new(coeffs, r.clone())?],
                // r = 0 exists only when every a_i is even
                None => match RotationVector::zero(coeffs.clone()) {
                    Ok(r) => vec![r],
                    Err(_) => enumerate_structures(&coeffs, cli.cap)?,
                },
            };
            let records: Vec<Record> = structures
                .into_iter()
                .map(|r| {
                    if *theorem_only {
                        theorem_record(lens, r, &opts)
                    } else {
                        let v = decide_full(&lens, &r, &opts);
                        full_record(lens, r, v)
                    }
                })
                .collect();
            Ok(records_output(&records, format, quiet))
        }
        Command::Scan {
            pmax,
            rot_zero_only,
            all_even_only,
            theorem_only,
            jobs,
        } => {
            let so = ScanOptions {
                p_max: *pmax,
                rot_zero_only: *rot_zero_only,
                all_even_only: *all_even_only,
                theorem_only: *theorem_only,
                decide: opts,
                threads: Some(*jobs),
            };
            Ok(records_output(&scan(&so)?, format, quiet))
        }
    }
}

fn group_text(
    lens: LensSpace,
    coeffs: &CFExpansion,
    elements: &[Isometry],
    complete: bool,
    format: Format,
    quiet: bool,
) -> String {
    match format {
        Format::Json => elements
            .iter()
            .enumerate()
            .map(|(index, a)| {
                json_line(&ElementLine {
                    p: lens.p(),
                    q: lens.q(),
                    coeffs: coeffs.coeffs().to_vec(),
                    index,
                    trace: a.trace(),
                    matrix: a.entries().to_vec(),
                    complete,
                })
            })
            .collect(),
        Format::Csv | Format::Table => {
            let rows: Vec<Row> = elements
                .iter()
                .enumerate()
                .map(|(i, a)| Row {
                    csv: vec![
                        lens.p().to_string(),
                        lens.q().to_string(),
                        seq(coeffs.coeffs(), ';'),
                        i.to_string(),
                        a.trace().to_string(),
                        seq(a.entries(), ';'),
                        complete.to_string(),
                    ],
                    table: vec![
                        lens.p().to_string(),
                        lens.q().to_string(),
                        seq(coeffs.coeffs(), ','),
                        i.to_string(),
                        a.trace().to_string(),
                        a.to_string(),
                        complete.to_string(),
                    ],
                })
                .collect();
            let header = ["p", "q", "coeffs", "index", "trace", "matrix", "complete"];
            render(&header, &rows, format, quiet)
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(output) => {
            if out.write_all(output.text.as_bytes()).is_err() {
                return 1;
            }
            if !cli.quiet {
                for n in &output.notes {
                    let _ = writeln!(err, "note: {n}");
                }
            }
            if cli.strict && !output.complete {
                2
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
