//! Batch front door: one analysis per invocation, reading a JSON instance
//! and emitting a report as JSON, text, or DOT. All computation is
//! deterministic; identical inputs give byte-identical outputs.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use galoisforge::correspondence::{
    full_correspondence, galois_connection, CorrespondenceResult, GaloisConnection,
};
use galoisforge::covers::{
    cover_galois_verdict, intermediate_covers, CoverInput, CoverInstance, CoverVerdict,
};
use galoisforge::dot;
use galoisforge::fieldext::{
    aut_group, field_correspondence, phi_basis_rank, tensor_trivialize, FieldCorrespondence,
    FieldExtension, FiniteField,
};
use galoisforge::galois::{
    enumerate_splittings_absolute, enumerate_splittings_relative, galois_verdict,
    is_galois_structure, GaloisGroup, GaloisReport, SplittingData, SplittingStructure, Verdict,
};
use galoisforge::groupoid::congruence_as_groupoid;
use galoisforge::kernel::{epi_classification, kernel_pair, FinMap};
use galoisforge::{Caps, Error};

#[derive(Parser)]
#[command(name = "galoisforge", version, about = "Splitting structures, verdicts, and lattices for finite instances")]
struct Cli {
    /// Analysis to run on the input instance.
    #[arg(long, value_enum)]
    command: Command,
    /// Path to the JSON instance file.
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override for the largest carrier set swept.
    #[arg(long)]
    cap_set_size: Option<usize>,
    /// Override for the largest group order materialized.
    #[arg(long)]
    cap_group_order: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Classify,
    Splittings,
    Verdict,
    Correspondence,
    Cover,
    Field,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

enum CliError {
    Core(Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::CapExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn resolve_caps(cli: &Cli) -> Result<Caps, CliError> {
    let mut caps = match std::env::var("GALOISFORGE_CAPS") {
        Ok(s) => Caps::from_env_str(&s)?,
        Err(_) => Caps::default(),
    };
    if let Some(v) = cli.cap_set_size {
        caps.max_set_size = v;
    }
    if let Some(v) = cli.cap_group_order {
        caps.max_group_order = v;
    }
    let all = [
        caps.max_set_size,
        caps.max_group_order,
        caps.max_closure_order,
        caps.max_fiber_size,
        caps.max_arrows,
        caps.max_lattice_nodes,
    ];
    if all.contains(&0) {
        return Err(CliError::Usage("caps must be positive".into()));
    }
    Ok(caps)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let caps = resolve_caps(cli)?;
    let raw = fs::read_to_string(&cli.input)?;
    let report = match cli.command {
        Command::Classify => classify(&raw, cli.format)?,
        Command::Splittings => splittings(&raw, cli.format, &caps)?,
        Command::Verdict => verdict(&raw, cli.format, &caps)?,
        Command::Correspondence => correspondence(&raw, cli.format, &caps)?,
        Command::Cover => cover(&raw, cli.format, &caps)?,
        Command::Field => field(&raw, cli.format)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn classify(raw: &str, format: Format) -> Result<String, CliError> {
    let pi: FinMap = serde_json::from_str(raw)?;
    let flags = epi_classification(&pi);
    Ok(match format {
        Format::Json => to_json(&flags)?,
        Format::Text => format!(
            "epi: {}\nregular: {}\neffective: {}\nstrict: {}\nnormal: {}\n",
            flags.epi, flags.regular, flags.effective, flags.strict, flags.normal
        ),
        Format::Dot => dot::groupoid_dot(&congruence_as_groupoid(&kernel_pair(&pi))),
    })
}

fn splitting_line(s: &SplittingStructure) -> String {
    match &s.data {
        SplittingData::Absolute { group, .. } => format!("group of order {}", group.order),
        SplittingData::Relative { bundle, .. } => {
            let orders: Vec<usize> = bundle.fibers.iter().map(|g| g.order).collect();
            format!("bundle of orders {orders:?}")
        }
    }
}

#[derive(Serialize)]
struct SplittingsReport {
    absolute: Vec<SplittingStructure>,
    relative: Vec<SplittingStructure>,
}

fn splittings(raw: &str, format: Format, caps: &Caps) -> Result<String, CliError> {
    let pi: FinMap = serde_json::from_str(raw)?;
    let absolute = enumerate_splittings_absolute(&pi, caps)?;
    let relative = enumerate_splittings_relative(&pi, caps)?;
    Ok(match format {
        Format::Json => to_json(&SplittingsReport { absolute, relative })?,
        Format::Text => {
            let mut out = format!(
                "absolute classes: {}\nrelative classes: {}\n",
                absolute.len(),
                relative.len()
            );
            for (i, s) in absolute.iter().enumerate() {
                out += &format!("absolute {i}: {}\n", splitting_line(s));
            }
            for (i, s) in relative.iter().enumerate() {
                out += &format!("relative {i}: {}\n", splitting_line(s));
            }
            out
        }
        Format::Dot => {
            let first = absolute.first().or_else(|| relative.first()).ok_or_else(|| {
                CliError::Usage("no splitting exists, nothing to draw".into())
            })?;
            dot::groupoid_dot(&first.arrow_groupoid())
        }
    })
}

fn verdict_line(v: &Verdict) -> String {
    match v {
        Verdict::NotEpi => "NotEpi".into(),
        Verdict::NoSplitting => "NoSplitting".into(),
        Verdict::NotNormal => "NotNormal".into(),
        Verdict::NoGaloisStructure => "NoGaloisStructure".into(),
        Verdict::MultipleStructures => "MultipleStructures".into(),
        Verdict::Galois(GaloisGroup::Group(g)) => format!("Galois (group of order {})", g.order),
        Verdict::Galois(GaloisGroup::Bundle(b)) => {
            let orders: Vec<usize> = b.fibers.iter().map(|g| g.order).collect();
            format!("Galois (bundle of orders {orders:?})")
        }
    }
}

fn verdict_text(report: &GaloisReport) -> String {
    let c = &report.classification;
    format!(
        "epi: {}\nregular: {}\neffective: {}\nstrict: {}\nnormal: {}\n\
         absolute splitting classes: {}\nrelative splitting classes: {}\n\
         galois structures: {}\nverdict (absolute): {}\nverdict (relative): {}\n",
        c.epi,
        c.regular,
        c.effective,
        c.strict,
        c.normal,
        report.splittings_absolute.len(),
        report.splittings_relative.len(),
        report.galois_structures.len(),
        verdict_line(&report.verdict_absolute),
        verdict_line(&report.verdict_relative),
    )
}

fn verdict(raw: &str, format: Format, caps: &Caps) -> Result<String, CliError> {
    let pi: FinMap = serde_json::from_str(raw)?;
    let report = galois_verdict(&pi, caps)?;
    Ok(match format {
        Format::Json => to_json(&report)?,
        Format::Text => verdict_text(&report),
        Format::Dot => dot::groupoid_dot(&congruence_as_groupoid(&kernel_pair(&pi))),
    })
}

#[derive(Serialize)]
struct CorrespondenceReport {
    connection: GaloisConnection,
    /// Present when the arrow splits; computed on the first Galois
    /// structure in canonical order, else the first splitting class.
    result: Option<CorrespondenceResult>,
}

fn correspondence(raw: &str, format: Format, caps: &Caps) -> Result<String, CliError> {
    let pi: FinMap = serde_json::from_str(raw)?;
    let connection = galois_connection(&pi, caps)?;
    let mut structures = enumerate_splittings_absolute(&pi, caps)?;
    structures.extend(enumerate_splittings_relative(&pi, caps)?);
    let chosen = structures
        .iter()
        .find(|s| is_galois_structure(s))
        .or_else(|| structures.first());
    let result = match chosen {
        Some(s) => Some(full_correspondence(s, caps)?),
        None => None,
    };
    Ok(match format {
        Format::Json => to_json(&CorrespondenceReport { connection, result })?,
        Format::Text => {
            let mut out = format!("interval nodes: {}\n", connection.relations.nodes.len());
            match &result {
                Some(r) => {
                    out += &format!(
                        "subgroup nodes: {}\nhypothesis (a): {}\nhypothesis (b): {}\n\
                         order reversal verified: {}\ncovers all intermediate quotients: {}\n",
                        r.subgroup_lattice.nodes.len(),
                        r.hypothesis_a,
                        r.hypothesis_b,
                        r.order_reversal_verified,
                        r.covers_all_intermediate_quotients,
                    );
                }
                None => out += "no splitting exists\n",
            }
            out
        }
        Format::Dot => match &result {
            Some(r) => dot::correspondence_dot(r),
            None => dot::connection_dot(&connection),
        },
    })
}

#[derive(Serialize)]
struct CoverReport {
    sheets: usize,
    verdict: CoverVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    correspondence: Option<CorrespondenceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intermediate_covers: Option<Vec<CoverInstance>>,
}

fn cover(raw: &str, format: Format, caps: &Caps) -> Result<String, CliError> {
    let input: CoverInput = serde_json::from_str(raw)?;
    let instance = input.build()?;
    let verdict = cover_galois_verdict(&instance, caps)?;
    let (correspondence, covers) = if verdict.galois_cover {
        let (corr, covers) = intermediate_covers(&instance, caps)?;
        (Some(corr), Some(covers))
    } else {
        (None, None)
    };
    Ok(match format {
        Format::Json => to_json(&CoverReport {
            sheets: instance.sheets(),
            verdict,
            correspondence,
            intermediate_covers: covers,
        })?,
        Format::Text => {
            let mut out = format!(
                "sheets: {}\ngalois cover: {}\nkernel pair splits: {}\ndeck transitive: {}\n\
                 deck group order: {}\n",
                instance.sheets(),
                verdict.galois_cover,
                verdict.kp_splits,
                verdict.deck_transitive,
                verdict.group.order,
            );
            if let Some(covers) = &covers {
                out += &format!("intermediate covers: {}\n", covers.len());
            }
            out
        }
        Format::Dot => dot::cover_dot(&instance),
    })
}

/// Raw field input; constructing through the library keeps cap failures
/// distinguishable from parse failures.
#[derive(Deserialize)]
struct FieldInput {
    p: usize,
    n: usize,
    modulus: Vec<usize>,
}

#[derive(Serialize)]
struct FieldReport {
    p: usize,
    n: usize,
    modulus: Vec<usize>,
    aut_order: usize,
    roots: Vec<usize>,
    phi_rank: usize,
    correspondence: FieldCorrespondence,
}

fn field(raw: &str, format: Format) -> Result<String, CliError> {
    let input: FieldInput = serde_json::from_str(raw)?;
    let ext = FieldExtension::new(FiniteField::new(input.p, input.n, input.modulus)?)?;
    let (aut, _) = aut_group(&ext);
    let roots = tensor_trivialize(&ext)?;
    let phi_rank = phi_basis_rank(&ext);
    let correspondence = field_correspondence(&ext)?;
    Ok(match format {
        Format::Json => to_json(&FieldReport {
            p: ext.field.p,
            n: ext.field.n,
            modulus: ext.field.modulus.clone(),
            aut_order: aut.order,
            roots,
            phi_rank,
            correspondence,
        })?,
        Format::Text => format!(
            "field: GF({})\naut order: {}\nroots: {:?}\nphi rank: {}\nintermediate fields: {}\n\
             order reversal verified: {}\ninvariants split: {}\n",
            ext.field.order(),
            aut.order,
            roots,
            phi_rank,
            correspondence.field_lattice.nodes.len(),
            correspondence.order_reversal_verified,
            correspondence.invariants_form_split_algebra,
        ),
        Format::Dot => dot::field_dot(&correspondence),
    })
}
