//! Command-line surface. Subcommands: `bounds`, `census`, `certify`,
//! `count`, `zeta`, `equiv`.
//!
//! Exit codes are a stable contract: 0 success, 1 assertion or certificate
//! failure, 2 usage or parse error. Reports go to stdout (or `-o FILE`);
//! progress goes to stderr, so report output stays machine-parseable.
//! Every long flag can also be set through an environment variable with the
//! `CLASSNUM_` prefix; explicit flags win.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{self, BoundsReport, Verdict};
use crate::census::{self, CensusMode, ReportFormat};
use crate::forms::{parse_form, parse_form_infer, Form};
use crate::points;
use crate::quadforms;
use crate::zeta;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "classnum",
    version,
    about = "Class numbers of curves over small binary fields: feasibility bounds, \
             candidate census, and the class-number-one certificate"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Deepest constant-field extension used by `certify` (counts run over
    /// GF(2^1)..GF(2^k)).
    #[arg(
        long,
        global = true,
        default_value_t = 8,
        env = "CLASSNUM_MAX_FIELD_DEGREE",
        value_parser = clap::value_parser!(u8).range(1..=12)
    )]
    max_field_degree: u8,

    /// Worker threads for the counting sweeps (default: all cores).
    #[arg(long, short = 'j', global = true, env = "CLASSNUM_THREADS")]
    threads: Option<usize>,

    /// Report format.
    #[arg(
        long,
        global = true,
        value_enum,
        default_value_t = FormatArg::Json,
        env = "CLASSNUM_FORMAT"
    )]
    format: FormatArg,

    /// Write the report to a file instead of stdout.
    #[arg(long, short = 'o', global = true, env = "CLASSNUM_OUTPUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Table,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> ReportFormat {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Table => ReportFormat::Table,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Reduced,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Feasible (q, g) pairs for a target class number.
    Bounds {
        /// Target class number h.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        class_number: u64,
        /// Largest field size scanned (prime powers only).
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
        q_cap: u64,
        /// Largest genus scanned.
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        g_cap: u32,
        /// Add a comparison section computed with the dimension exponent
        /// read literally as q (comparison output only).
        #[arg(long)]
        literal_exponent: bool,
    },
    /// Small-degree point census of the candidate cases.
    Census {
        /// reduced: the 24 cases in the elliptic class; full: all 64 pairs.
        #[arg(long, value_enum, default_value_t = ModeArg::Reduced)]
        mode: ModeArg,
    },
    /// Certify the exceptional curve: counts, zeta numerator, h = 1.
    Certify,
    /// Count projective zeros of a form system over GF(2^k).
    Count {
        /// A form (repeatable; the system is their common zero set).
        #[arg(long = "form", required = true)]
        forms: Vec<String>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
        field_degree: u8,
    },
    /// Zeta numerator and class number of a quadric-cubic intersection.
    Zeta {
        #[arg(long)]
        quadric: String,
        #[arg(long)]
        cubic: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(0..=6))]
        genus: u32,
        /// Counting depth: N_1..N_depth by enumeration.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
        depth: u8,
    },
    /// Decide GL_4(F_2)-equivalence of two quadrics.
    Equiv {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        // ignore the error if a pool already exists (e.g. under tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Bounds { class_number, q_cap, g_cap, literal_exponent } => {
            let report =
                match bounds::genus_bounds_for_h(class_number, q_cap, g_cap, literal_exponent) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return Ok(ExitCode::from(EXIT_USAGE));
                    }
                };
            let text = render_bounds(&report, cli.format)?;
            write_output(&cli.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Census { mode } => {
            let mode = match mode {
                ModeArg::Reduced => CensusMode::Reduced,
                ModeArg::Full => CensusMode::Full,
            };
            let rows = census::run_census(mode)?;
            let text = census::render_report(&rows, cli.format.into())?;
            write_output(&cli.out, &text)?;
            match census::verify_uniqueness(&rows) {
                Ok(exception) => {
                    eprintln!("census: unique exception {exception}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(EXIT_FAILURE))
                }
            }
        }
        Command::Certify => {
            let report = match certify_with_hook(cli.max_field_degree) {
                Ok(r) => r,
                Err(census::CensusError::InvalidDepth(d)) => {
                    eprintln!("error: certification needs --max-field-degree 4..=12, got {d}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(EXIT_FAILURE));
                }
            };
            let cert = report.exception.as_ref().expect("certificate present");
            let text = render_certificate(&report, cli.format)?;
            write_output(&cli.out, &text)?;
            eprintln!(
                "certify: h = {}, zeta coefficients ({}), counts N_1..N_{} = {:?}{}",
                cert.class_number,
                cert.zeta_coefficients.join(", "),
                cert.max_degree,
                cert.counts,
                if cert.partial { " [partial certificate]" } else { "" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Count { forms, field_degree } => {
            let parsed = match parse_forms(&forms) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            eprintln!(
                "count: sweeping {} points of P^3(GF(2^{field_degree}))",
                points::proj_space_size(field_degree)
            );
            let n = points::count_points(&parsed, field_degree)?;
            write_output(&cli.out, &format!("{n}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Zeta { quadric, cubic, genus, depth } => {
            let (q_form, c_form) = match (parse_form(&quadric, 2), parse_form(&cubic, 3)) {
                (Ok(q), Ok(c)) => (q, c),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            if u32::from(depth) < genus {
                eprintln!("error: --depth must be at least the genus ({genus})");
                return Ok(ExitCode::from(EXIT_USAGE));
            }
            match zeta_pipeline(q_form, c_form, genus, depth) {
                Ok(out) => {
                    let mut text = serde_json::to_string_pretty(&out)?;
                    text.push('\n');
                    write_output(&cli.out, &text)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(EXIT_FAILURE))
                }
            }
        }
        Command::Equiv { lhs, rhs } => {
            let (l, r) = match (parse_form(&lhs, 2), parse_form(&rhs, 2)) {
                (Ok(l), Ok(r)) => (l, r),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let witness = quadforms::are_equivalent(&l, &r)?;
            let text = match (cli.format, &witness.matrix) {
                (FormatArg::Json, _) => {
                    let mut t = serde_json::to_string_pretty(&witness)?;
                    t.push('\n');
                    t
                }
                (_, Some(m)) => {
                    format!(
                        "equivalent: witness {m} (rows {:04b} {:04b} {:04b} {:04b})\n",
                        m.encoded() >> 12,
                        m.encoded() >> 8 & 0xf,
                        m.encoded() >> 4 & 0xf,
                        m.encoded() & 0xf
                    )
                }
                (_, None) => "not equivalent\n".to_string(),
            };
            write_output(&cli.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Test hook: `CLASSNUM_TEST_CORRUPT_BUILTIN=1` flips one coefficient of the
/// builtin cubic before certification, which must make the certificate fail.
fn certify_with_hook(max_degree: u8) -> Result<census::CaseReport, census::CensusError> {
    if std::env::var("CLASSNUM_TEST_CORRUPT_BUILTIN").as_deref() == Ok("1") {
        let id = census::CaseId::exception();
        let [quadric, cubic] = id.system()?;
        let corrupted = cubic.add(&parse_form("x1^3", 3)?)?;
        return census::certify_curve(id, &quadric, &corrupted, max_degree);
    }
    census::certify_exception(max_degree)
}

fn parse_forms(texts: &[String]) -> Result<Vec<Form>, crate::forms::FormError> {
    texts.iter().map(|t| parse_form_infer(t)).collect()
}

#[derive(Serialize)]
struct ZetaOutput {
    q: u64,
    genus: u32,
    depth: u8,
    counts: Vec<u64>,
    zeta_coefficients: Vec<String>,
    class_number: String,
    /// Present only when depth >= 2 * genus: counts were deep enough to
    /// reconstruct the numerator by Newton alone and check the functional
    /// equation.
    functional_equation_checked: bool,
    weil_check: bool,
}

fn zeta_pipeline(
    quadric: Form,
    cubic: Form,
    genus: u32,
    depth: u8,
) -> Result<ZetaOutput, Box<dyn std::error::Error>> {
    let system = [quadric, cubic];
    eprintln!("zeta: counting N_1..N_{depth} by enumeration");
    let pc = points::count_sequence(&system, depth)?;
    let z = zeta::numerator_from_counts(&pc, genus)?;
    let h = z.class_number()?;
    let mut fe_checked = false;
    if u32::from(depth) >= 2 * genus {
        let z_full = zeta::numerator_full(&pc, genus)?;
        if z_full != z {
            return Err(Box::new(zeta::ZetaError::FunctionalEquationViolated {
                n: 2 * genus as usize,
            }));
        }
        fe_checked = true;
    }
    Ok(ZetaOutput {
        q: 2,
        genus,
        depth,
        counts: pc.counts.clone(),
        zeta_coefficients: z.coefficients().iter().map(|a| a.to_string()).collect(),
        class_number: h.to_string(),
        functional_equation_checked: fe_checked,
        weil_check: z.weil_check(),
    })
}

fn render_bounds(
    report: &BoundsReport,
    format: FormatArg,
) -> Result<String, Box<dyn std::error::Error>> {
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        FormatArg::Csv => {
            let mut s = String::from("q,g,verdict\n");
            let feasible: std::collections::BTreeSet<(u64, u32)> =
                report.feasible.iter().copied().collect();
            for q in (2..=report.q_cap).filter(|&q| bounds::is_prime_power(q)) {
                for g in 1..=report.g_cap {
                    let verdict = if feasible.contains(&(q, g)) {
                        "feasible"
                    } else {
                        match report.ruled_out_reasons.get(&format!("{q},{g}")) {
                            Some(Verdict::RuledOutWeil) => "ruled_out_weil",
                            Some(Verdict::RuledOutRr) => "ruled_out_rr",
                            _ => "unknown",
                        }
                    };
                    s.push_str(&format!("{q},{g},{verdict}\n"));
                }
            }
            Ok(s)
        }
        FormatArg::Table => {
            let mut s = format!(
                "class number h = {} (q <= {}, g <= {})\n",
                report.h, report.q_cap, report.g_cap
            );
            s.push_str(&format!(
                "genus 0: {}\n",
                if report.genus_zero_feasible {
                    "feasible (rational function fields have h = 1)"
                } else {
                    "infeasible (rational function fields have h = 1)"
                }
            ));
            if report.feasible.is_empty() {
                s.push_str("no feasible (q, g) with g >= 1 inside the caps\n");
            } else {
                s.push_str("feasible pairs (q, g):\n");
                for (q, g) in &report.feasible {
                    s.push_str(&format!("  q = {q:>2}  g = {g}\n"));
                }
                s.push_str("largest feasible genus per q:\n");
                for (q, g) in &report.g_max {
                    s.push_str(&format!("  q = {q:>2}  g_max = {g}\n"));
                }
            }
            s.push_str(&format!("{}\n", report.scope_note));
            if let Some(lit) = &report.literal_exponent_comparison {
                s.push_str(&format!(
                    "literal-exponent comparison: {} pairs feasible, {} the adopted reading\n",
                    lit.feasible.len(),
                    if lit.matches_adopted_reading { "matches" } else { "does NOT match" }
                ));
            }
            Ok(s)
        }
    }
}

fn render_certificate(
    report: &census::CaseReport,
    format: FormatArg,
) -> Result<String, Box<dyn std::error::Error>> {
    let cert = report.exception.as_ref().expect("certificate present");
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        FormatArg::Csv => {
            let mut s = String::from("k,N_k,B_k,predicted_N_k,points_checked,all_rank2\n");
            for (i, j) in cert.jacobian.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    i + 1,
                    cert.counts[i],
                    cert.places[i],
                    cert.predicted_counts[i],
                    j.points_checked,
                    j.all_rank2
                ));
            }
            Ok(s)
        }
        FormatArg::Table => {
            let mut s = format!("certificate for {}\n", report.id);
            s.push_str(&format!(
                "genus {} over F_{}, class number h = {}{}\n",
                cert.genus,
                cert.q,
                cert.class_number,
                if cert.partial { "  [partial: depth < 8]" } else { "" }
            ));
            s.push_str(&format!(
                "zeta numerator a_0..a_8: {}\n",
                cert.zeta_coefficients.join(", ")
            ));
            s.push_str("  k    N_k    B_k predicted\n");
            for i in 0..cert.counts.len() {
                s.push_str(&format!(
                    "{:>3} {:>6} {:>6} {:>9}\n",
                    i + 1,
                    cert.counts[i],
                    cert.places[i],
                    cert.predicted_counts[i]
                ));
            }
            s.push_str(&format!(
                "functional equation checked: {}; Weil bound: {}; all points rank-2: {}\n",
                cert.functional_equation_checked,
                cert.weil_check,
                cert.jacobian.iter().all(|j| j.all_rank2)
            ));
            Ok(s)
        }
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())
        }
    }
}
