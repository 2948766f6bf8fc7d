//! Command definitions and their execution. Commands read a model document, run one
//! operation and write the merged document to `--out` or stdout.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faircurve_core::analytic::{AnalyticCurveSpec, LacParams, SampleSchedule, SuperspiralParams};
use faircurve_core::api::{self, ApiResponse};
use faircurve_core::fairing::{FairingConfig, Functional};
use faircurve_core::io::{
    decode_model, encode_model, export_dxf, import_dxf, write_atomic, EntityValue, ModelDocument, Units,
};
use faircurve_core::{Error, ErrorClass, Result};

#[derive(Debug, Parser)]
#[command(name = "faircurve", version, about = "Fair curves, aesthetic spirals and NURBS templates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fair a polyline into a degree-6 v-curve.
    Vcurve(VcurveArgs),
    /// Sample an analytic curve into Hermite data.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Convert a Hermite table to a NURBzS (degree 3) or B-spline (6, 8, 10).
    Approx(ApproxArgs),
    /// Extract a run of segments from a curve.
    Extract(ExtractArgs),
    /// Quality report of a curve.
    Metrics(MetricsArgs),
    /// DXF interchange.
    #[command(subcommand)]
    Dxf(DxfCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the resulting document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionalArg {
    Variation,
    Energy,
}

#[derive(Debug, Args)]
pub struct VcurveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Polyline entity id.
    #[arg(long)]
    pub id: String,
    #[arg(long, value_enum, default_value = "variation")]
    pub functional: FunctionalArg,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    /// Hermite stations uniform in arc length instead of the polyline nodes.
    #[arg(long)]
    pub hermite_points: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Parameter range: tangent angle for superspirals, arc length for LACs.
    #[arg(long, num_args = 2, required = true, value_names = ["T0", "T1"], allow_negative_numbers = true)]
    pub range: Vec<f64>,
    /// Number of Hermite stations.
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    /// First increment of a geometric schedule starting at T0; needs --h-last.
    #[arg(long, requires = "h_last")]
    pub h_first: Option<f64>,
    #[arg(long, requires = "h_first")]
    pub h_last: Option<f64>,
    /// Entity id of the spec; the table and samples get `.hermite` and `.samples`.
    #[arg(long, default_value = "analytic")]
    pub id: String,
    /// Merge into this document instead of starting an empty one.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unitless")]
    pub units: UnitsArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    Superspiral {
        #[arg(short, allow_negative_numbers = true)]
        a: f64,
        #[arg(short, allow_negative_numbers = true)]
        b: f64,
        #[arg(short, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        sample: SampleArgs,
    },
    Lac {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        c0: f64,
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta0: f64,
        #[command(flatten)]
        sample: SampleArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitsArg {
    Mm,
    Cm,
    Unitless,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Mm => Units::Mm,
            UnitsArg::Cm => Units::Cm,
            UnitsArg::Unitless => Units::Unitless,
        }
    }
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Hermite table entity id.
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub degree: usize,
    /// Segments removed at the start.
    #[arg(long, default_value_t = 0)]
    pub clip_start: usize,
    /// Segments removed at the end.
    #[arg(long, default_value_t = 0)]
    pub clip_end: usize,
    /// Analytic or NURBS entity to measure deviation against.
    #[arg(long)]
    pub reference: Option<String>,
    /// Prefix of the result ids (default: the table id).
    #[arg(long)]
    pub name: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub start: usize,
    #[arg(long)]
    pub count: usize,
    /// Id of the extracted curve (default: `<id>.extract`).
    #[arg(long)]
    pub name: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub reference: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum DxfCommand {
    /// Write NURBS entities of a document as DXF SPLINEs.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        /// Curve ids to export (default: all).
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<String>>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Output file (default: r_out_dxf.dxf in the scratch directory).
        #[arg(long)]
        dxf: Option<PathBuf>,
    },
    /// Read DXF SPLINEs into a document.
    Import {
        #[arg(long)]
        dxf: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Curves are named `<prefix><index>`.
        #[arg(long, default_value = "dxf")]
        prefix: String,
        /// Merge into this document instead of starting an empty one.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

/// Process exit code for an error: 2 validation, 3 numeric non-convergence, 4 I/O.
pub fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Validation => 2,
        ErrorClass::NonConvergence => 3,
        ErrorClass::Io => 4,
    }
}

fn read_model(path: &Path) -> Result<ModelDocument> {
    decode_model(&fs::read_to_string(path)?)
}

fn emit(doc: &ModelDocument, out: &Output) -> Result<()> {
    let text = encode_model(doc)?;
    match &out.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn merge(mut doc: ModelDocument, resp: ApiResponse) -> ModelDocument {
    for e in resp.model.entities {
        doc.upsert(e.id, e.value);
    }
    for (stage, ms) in &resp.diagnostics.timings_ms {
        eprintln!("{stage}: {ms:.1} ms");
    }
    if let Some(n) = resp.diagnostics.iterations {
        eprintln!("iterations: {n}");
    }
    doc
}

fn analytic(spec: AnalyticCurveSpec, s: &SampleArgs) -> Result<()> {
    let schedule = match (s.h_first, s.h_last) {
        (Some(h_first), Some(h_last)) => Some(SampleSchedule { n_points: s.points, t0: s.range[0], h_first, h_last }),
        _ => None,
    };
    let doc = match &s.input {
        Some(p) => read_model(p)?,
        None => ModelDocument::new(s.units.into()),
    };
    let req =
        api::AnalyticRequest { spec, schedule, points: s.points, id: s.id.clone(), samples: 100, units: doc.units };
    let resp = api::analytic(&req)?;
    emit(&merge(doc, resp), &s.output)
}

fn range(s: &SampleArgs) -> [f64; 2] {
    [s.range[0], s.range[1]]
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Vcurve(a) => {
            let doc = read_model(&a.input)?;
            let functional = match a.functional {
                FunctionalArg::Variation => Functional::Variation,
                FunctionalArg::Energy => Functional::Energy,
            };
            let config = FairingConfig { functional, max_iterations: a.max_iterations, ..FairingConfig::default() };
            let req = api::VcurveRequest {
                model: doc,
                id: a.id,
                out: None,
                config,
                hermite_points: a.hermite_points,
                profile_samples: 2,
            };
            let resp = api::vcurve(&req)?;
            emit(&merge(req.model, resp), &a.output)
        }
        Command::Analytic(AnalyticCommand::Superspiral { a, b, c, scale, sample }) => {
            let params = SuperspiralParams::new(a, b, c).with_scale(scale);
            analytic(AnalyticCurveSpec::Superspiral { params, range: range(&sample) }, &sample)
        }
        Command::Analytic(AnalyticCommand::Lac { alpha, c0, c1, theta0, sample }) => {
            let spec = AnalyticCurveSpec::Lac {
                params: LacParams::new(alpha, c0, c1),
                range: range(&sample),
                theta0,
                origin: Default::default(),
            };
            analytic(spec, &sample)
        }
        Command::Approx(a) => {
            let req = api::ApproxRequest {
                model: read_model(&a.input)?,
                id: a.id,
                degree: a.degree,
                clip_start: a.clip_start,
                clip_end: a.clip_end,
                reference: a.reference,
                out: a.name,
                profile_samples: 2,
            };
            let resp = api::approx(&req)?;
            emit(&merge(req.model, resp), &a.output)
        }
        Command::Extract(a) => {
            let req = api::ExtractRequest {
                model: read_model(&a.input)?,
                id: a.id,
                start: a.start,
                count: a.count,
                out: a.name,
            };
            let resp = api::extract(&req)?;
            emit(&merge(req.model, resp), &a.output)
        }
        Command::Metrics(a) => {
            let req = api::MetricsRequest {
                model: read_model(&a.input)?,
                id: a.id,
                reference: a.reference,
                out: None,
                profile_samples: 2,
            };
            let resp = api::metrics(&req)?;
            emit(&merge(req.model, resp), &a.output)
        }
        Command::Dxf(DxfCommand::Export { input, ids, scale, dxf }) => {
            let doc = read_model(&input)?;
            let curves = match ids {
                Some(ids) => ids.iter().map(|id| doc.nurbs_curve(id).cloned()).collect::<Result<Vec<_>>>()?,
                None => doc.curves().map(|(_, c)| c.clone()).collect(),
            };
            let path = export_dxf(&curves, dxf.as_deref(), doc.units, scale)?;
            eprintln!("wrote {} curve(s) to {}", curves.len(), path.display());
            Ok(())
        }
        Command::Dxf(DxfCommand::Import { dxf, scale, prefix, input, output }) => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InvalidInput(format!("scale must be positive and finite, got {scale}")));
            }
            let imported = import_dxf(&dxf)?;
            for w in &imported.warnings {
                eprintln!("warning: {w}");
            }
            let mut doc = match input {
                Some(p) => read_model(&p)?,
                None => ModelDocument::new(imported.units.unwrap_or_default()),
            };
            for (i, c) in imported.curves.iter().enumerate() {
                doc.upsert(format!("{prefix}{i}"), EntityValue::NurbsCurve(c.scaled(scale)));
            }
            emit(&doc, &output)
        }
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(SocketAddr::new(a.host, a.port)))?;
            Ok(())
        }
    }
}

/// Runs the command and reports errors on stderr as `error[CODE]: message`.
pub fn main_with(cli: Cli) -> ExitCode {
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}
