//! Command line front end for the quwit library: witness reports, optimal
//! configurations, interferometer compilation, shot-noise studies, and
//! quartz dephasing thicknesses.

mod matfile;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use quwit::layout::{emit_layout, CoherenceSpec, LayoutElement, OpticalLayout, Slot};
use quwit::noise::{noise_sweep, DetectorProfile, NoiseStudyResult};
use quwit::qudit::{OrthonormalBasis, Projector, UnitaryChannel};
use quwit::reck::{decompose, DecompositionPlan};
use quwit::witness::{
    builtin, full_report, optimal_config, Intervention, WitnessConfig, WitnessReport,
    BUILTIN_NAMES,
};
use serde_json::{json, Value};

use output::{cmatrix, cnum, csv_row, deliver, fmt4, fmt_c4, render_json, OutputFormat};

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<quwit::Error> for CliError {
    fn from(e: quwit::Error) -> Self {
        CliError::numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "quwit",
    version,
    about = "Qudit coherence witnesses: reports, interferometer layouts, noise studies",
    after_help = "Exit codes: 0 success, 2 configuration or parse error, 3 numerical \
                  validation failure.\nQUWIT_SEED overrides the default seed of `noise`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a witness report for a built-in or custom configuration
    Witness(WitnessArgs),
    /// Predict and verify the extremal configuration for a dimension
    Optimal(OptimalArgs),
    /// Factor a unitary into a two-polarization interferometer layout
    Compile(CompileArgs),
    /// Monte Carlo shot-noise study of a witness configuration
    Noise(NoiseArgs),
    /// Quartz thickness needed to dephase at a given coherence length
    Quartz(QuartzArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Family {
    /// Blind-measurement witness
    W,
    /// Channel witness
    V,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::W => "w",
            Family::V => "v",
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// Built-in configuration name (paper-qubit, paper-qutrit)
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Witness family: w (blind measurement, default) or v (channel)
    #[arg(long, value_enum)]
    which: Option<Family>,
    /// Dimension of a custom configuration
    #[arg(long, conflicts_with = "builtin")]
    dim: Option<usize>,
    /// Channel intervention unitary file; implies the v family
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    u0: Option<PathBuf>,
    /// Evolution unitary file applied before readout (default: extremal mixer)
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    u1: Option<PathBuf>,
    /// Outcome projector: basis-state index or matrix file (default: last basis state)
    #[arg(long, value_name = "INDEX|FILE", conflicts_with = "builtin")]
    projector: Option<String>,
    /// Preparation coefficients, comma-separated complex tokens (default: uniform)
    #[arg(long, value_name = "TOKENS", value_delimiter = ',', conflicts_with = "builtin")]
    coeffs: Option<Vec<String>>,
}

#[derive(Args)]
struct OutArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "table")]
    output: OutputFormat,
    /// Write the result here instead of stdout
    #[arg(long, value_name = "FILE")]
    output_path: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Print the resolved configuration instead of evaluating it
    #[arg(long)]
    show_config: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OptimalArgs {
    /// Dimension to optimize
    #[arg(long)]
    dim: usize,
    /// Also write the evolution unitary as a matrix file for `compile`
    #[arg(long, value_name = "FILE")]
    emit_u1: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CompileArgs {
    /// Unitary matrix file to factor
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Expected total photon counts per run, comma separated
    #[arg(long, value_delimiter = ',', default_value = "13000", value_name = "N,...")]
    totals: Vec<f64>,
    /// Monte Carlo trials per total
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Master seed (default: QUWIT_SEED if set, else 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Detector efficiencies, comma separated (default: ideal)
    #[arg(long, value_delimiter = ',', value_name = "E,...")]
    profile: Option<Vec<f64>>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct QuartzArgs {
    /// Center wavelength in nm
    #[arg(long, default_value_t = 801.6)]
    wavelength: f64,
    /// Spectral bandwidth in nm
    #[arg(long, default_value_t = 3.0)]
    bandwidth: f64,
    /// Index contrast of the quartz axes
    #[arg(long, default_value_t = 0.00894)]
    birefringence: f64,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Witness(args) => cmd_witness(args),
        Command::Optimal(args) => cmd_optimal(args),
        Command::Compile(args) => cmd_compile(args),
        Command::Noise(args) => cmd_noise(args),
        Command::Quartz(args) => cmd_quartz(args),
    }
}

struct ResolvedConfig {
    name: String,
    family: Family,
    config: WitnessConfig,
    predicted: Option<(f64, f64)>,
}

fn load_matrix(path: &Path) -> Result<quwit::linalg::ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    matfile::parse_matrix(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn load_unitary(path: &Path) -> Result<UnitaryChannel, CliError> {
    Ok(UnitaryChannel::new(load_matrix(path)?)?)
}

fn resolve_config(args: &ConfigArgs) -> Result<ResolvedConfig, CliError> {
    if let Some(name) = &args.builtin {
        let spec = builtin(name).ok_or_else(|| {
            CliError::config(format!(
                "unknown built-in `{name}`; available: {}",
                BUILTIN_NAMES.join(", ")
            ))
        })?;
        let family = args.which.unwrap_or(Family::W);
        let config = match family {
            Family::W => spec.blind_config(),
            Family::V => spec.channel_config(),
        };
        return Ok(ResolvedConfig {
            name: name.clone(),
            family,
            config,
            predicted: Some((spec.predicted_w, spec.predicted_v)),
        });
    }

    let dim = args
        .dim
        .ok_or_else(|| CliError::config("either --builtin or --dim is required"))?;
    if dim < 2 {
        return Err(CliError::config("--dim must be at least 2"));
    }

    let coefficients = match &args.coeffs {
        Some(tokens) => {
            if tokens.len() != dim {
                return Err(CliError::config(format!(
                    "--coeffs holds {} entries, --dim is {dim}",
                    tokens.len()
                )));
            }
            let mut amps = Vec::with_capacity(dim);
            for t in tokens {
                amps.push(matfile::parse_complex(t).map_err(CliError::config)?);
            }
            let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if n2 < 1e-30 {
                return Err(CliError::config("--coeffs must not all vanish"));
            }
            let s = 1.0 / n2.sqrt();
            amps.iter().map(|a| a * s).collect()
        }
        None => {
            let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
            vec![a; dim]
        }
    };

    let evolution = match &args.u1 {
        Some(path) => {
            let u = load_unitary(path)?;
            if u.dim() != dim {
                return Err(CliError::config(format!(
                    "--u1 is {}x{} but --dim is {dim}",
                    u.dim(),
                    u.dim()
                )));
            }
            u
        }
        None => optimal_config(dim)?.evolution,
    };

    let outcome = match &args.projector {
        None => Projector::onto_basis_state(dim, dim - 1),
        Some(text) => match text.parse::<usize>() {
            Ok(index) => {
                if index >= dim {
                    return Err(CliError::config(format!(
                        "--projector index {index} is out of range for --dim {dim}"
                    )));
                }
                Projector::onto_basis_state(dim, index)
            }
            Err(_) => {
                let proj = Projector::new(load_matrix(Path::new(text))?)?;
                if proj.dim() != dim {
                    return Err(CliError::config(format!(
                        "--projector is {}x{} but --dim is {dim}",
                        proj.dim(),
                        proj.dim()
                    )));
                }
                proj
            }
        },
    };

    let family = if args.u0.is_some() {
        Family::V
    } else {
        Family::W
    };
    if let Some(which) = args.which {
        if which != family {
            return Err(match which {
                Family::V => CliError::config("--which v needs --u0 FILE"),
                Family::W => CliError::config("--u0 selects the v family; drop --which w"),
            });
        }
    }

    let basis = OrthonormalBasis::computational(dim);
    let config = match &args.u0 {
        Some(path) => {
            let u0 = load_unitary(path)?;
            if u0.dim() != dim {
                return Err(CliError::config(format!(
                    "--u0 is {}x{} but --dim is {dim}",
                    u0.dim(),
                    u0.dim()
                )));
            }
            WitnessConfig::channel(basis, coefficients, u0, evolution, outcome)?
        }
        None => WitnessConfig::blind(basis, coefficients, evolution, outcome)?,
    };

    Ok(ResolvedConfig {
        name: "custom".into(),
        family,
        config,
        predicted: None,
    })
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("QUWIT_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| CliError::config(format!("QUWIT_SEED is set to `{text}`, not a u64"))),
        Err(_) => Ok(0),
    }
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn config_doc(r: &ResolvedConfig) -> Value {
    let c = &r.config;
    let intervention = match c.intervention() {
        Intervention::BlindMeasurement { groups } => json!({
            "kind": "blind-measurement",
            "groups": groups,
        }),
        Intervention::Channel(u0) => json!({
            "kind": "channel",
            "u0": cmatrix(u0.matrix()),
        }),
    };
    let mut doc = json!({
        "name": r.name,
        "family": r.family.label(),
        "dim": c.dim(),
        "coefficients": c.coefficients().iter().map(|&z| cnum(z)).collect::<Vec<_>>(),
        "intervention": intervention,
        "evolution": cmatrix(c.evolution().matrix()),
        "projector": cmatrix(c.outcome().matrix()),
    });
    if let Some((w, v)) = r.predicted {
        doc["predicted_w"] = json!(w);
        doc["predicted_v"] = json!(v);
    }
    doc
}

fn config_table(r: &ResolvedConfig) -> String {
    let c = &r.config;
    let mut text = format!("configuration {} (family {})\n", r.name, r.family.label());
    text.push_str(&format!("dimension      {}\n", c.dim()));
    let coeffs: Vec<String> = c.coefficients().iter().map(|&z| fmt_c4(z)).collect();
    text.push_str(&format!("coefficients   {}\n", coeffs.join(" ")));
    match c.intervention() {
        Intervention::BlindMeasurement { groups } => {
            let parts: Vec<String> = groups.iter().map(|g| format!("{g:?}")).collect();
            text.push_str(&format!("intervention   dephasing, groups {}\n", parts.join(" ")));
        }
        Intervention::Channel(u0) => {
            text.push_str("intervention   channel u0\n");
            text.push_str(&matrix_table(u0.matrix()));
        }
    }
    text.push_str("evolution u1\n");
    text.push_str(&matrix_table(c.evolution().matrix()));
    text.push_str("projector\n");
    text.push_str(&matrix_table(c.outcome().matrix()));
    if let Some((w, v)) = r.predicted {
        text.push_str(&format!("predicted w    {}\n", fmt4(w)));
        text.push_str(&format!("predicted v    {}\n", fmt4(v)));
    }
    text
}

fn matrix_table(m: &quwit::linalg::ComplexMatrix) -> String {
    let mut text = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| fmt_c4(m.get(r, c))).collect();
        text.push_str(&format!("  [{}]\n", row.join(" ")));
    }
    text
}

fn witness_table(r: &ResolvedConfig, report: &WitnessReport) -> String {
    let mut text = format!("witness report: {} (family {})\n", r.name, r.family.label());
    text.push_str(&format!("p(b) direct        {}\n", fmt4(report.p_b)));
    text.push_str(&format!("p(b) intervened    {}\n", fmt4(report.p_after)));
    text.push_str(&format!(
        "superposition      {}\n",
        fmt4(report.superposition_value)
    ));
    for (i, c) in report.control_values.iter().enumerate() {
        text.push_str(&format!("control {i}          {}\n", fmt4(*c)));
    }
    text.push_str(&format!(
        "violation margin   {}\n",
        fmt4(report.violation_margin)
    ));
    text.push_str(&format!("lower margin       {}\n", fmt4(report.lower_margin)));
    text.push_str(&format!("violated           {}\n", yesno(report.violated)));
    text
}

fn witness_csv(report: &WitnessReport) -> String {
    let mut header = Vec::new();
    for i in 0..report.control_values.len() {
        header.push(format!("control_{i}"));
    }
    for name in [
        "superposition_value",
        "p_b",
        "p_after",
        "violation_margin",
        "lower_margin",
        "violated",
    ] {
        header.push(name.into());
    }
    let mut row = Vec::new();
    for c in &report.control_values {
        row.push(format!("{c}"));
    }
    row.push(format!("{}", report.superposition_value));
    row.push(format!("{}", report.p_b));
    row.push(format!("{}", report.p_after));
    row.push(format!("{}", report.violation_margin));
    row.push(format!("{}", report.lower_margin));
    row.push(format!("{}", report.violated));
    let mut text = csv_row(&header);
    text.push_str(&csv_row(&row));
    text
}

fn cmd_witness(args: WitnessArgs) -> Result<(), CliError> {
    let resolved = resolve_config(&args.config)?;
    if args.show_config {
        let text = match args.out.output {
            OutputFormat::Table => config_table(&resolved),
            OutputFormat::Json => render_json(&config_doc(&resolved)),
            OutputFormat::Csv => {
                return Err(CliError::config(
                    "--show-config renders as table or json, not csv",
                ))
            }
        };
        return Ok(deliver(&text, args.out.output_path.as_deref())?);
    }
    let report = full_report(&resolved.config)?;
    let text = match args.out.output {
        OutputFormat::Table => witness_table(&resolved, &report),
        OutputFormat::Json => render_json(&serde_json::to_value(&report).expect("report")),
        OutputFormat::Csv => witness_csv(&report),
    };
    Ok(deliver(&text, args.out.output_path.as_deref())?)
}

fn cmd_optimal(args: OptimalArgs) -> Result<(), CliError> {
    if args.dim < 2 {
        return Err(CliError::config("--dim must be at least 2"));
    }
    let spec = optimal_config(args.dim)?;
    if let Some(path) = &args.emit_u1 {
        std::fs::write(path, matfile::format_matrix(spec.evolution.matrix()))?;
    }
    let w_report = full_report(&spec.blind_config())?;
    let v_report = full_report(&spec.channel_config())?;
    let text = match args.out.output {
        OutputFormat::Table => {
            let mut t = format!("extremal configuration, dimension {}\n", args.dim);
            t.push_str(&format!(
                "predicted w   {}   simulated w   {}\n",
                fmt4(spec.predicted_w),
                fmt4(w_report.superposition_value)
            ));
            t.push_str(&format!(
                "predicted v   {}   simulated v   {}\n",
                fmt4(spec.predicted_v),
                fmt4(v_report.superposition_value)
            ));
            let wc: Vec<String> = w_report.control_values.iter().map(|&c| fmt4(c)).collect();
            let vc: Vec<String> = v_report.control_values.iter().map(|&c| fmt4(c)).collect();
            t.push_str(&format!("w controls    {}\n", wc.join(" ")));
            t.push_str(&format!("v controls    {}\n", vc.join(" ")));
            t
        }
        OutputFormat::Json => render_json(&json!({
            "dim": args.dim,
            "predicted_w": spec.predicted_w,
            "predicted_v": spec.predicted_v,
            "simulated_w": w_report.superposition_value,
            "simulated_v": v_report.superposition_value,
            "w_report": serde_json::to_value(&w_report).expect("report"),
            "v_report": serde_json::to_value(&v_report).expect("report"),
        })),
        OutputFormat::Csv => {
            let header = [
                "dim",
                "predicted_w",
                "predicted_v",
                "simulated_w",
                "simulated_v",
            ];
            let row = [
                format!("{}", args.dim),
                format!("{}", spec.predicted_w),
                format!("{}", spec.predicted_v),
                format!("{}", w_report.superposition_value),
                format!("{}", v_report.superposition_value),
            ];
            let mut t = csv_row(&header.map(String::from));
            t.push_str(&csv_row(&row));
            t
        }
    };
    Ok(deliver(&text, args.out.output_path.as_deref())?)
}

fn slot_name(s: &Slot) -> String {
    format!("{}{}", s.pol, s.mode)
}

fn layout_doc(layout: &OpticalLayout) -> Value {
    let elements: Vec<Value> = layout
        .elements
        .iter()
        .map(|e| match e {
            LayoutElement::WavePlateSet { mode, block } => json!({
                "kind": "wave-plate-set",
                "mode": mode,
                "block": [
                    [cnum(block[0][0]), cnum(block[0][1])],
                    [cnum(block[1][0]), cnum(block[1][1])],
                ],
            }),
            LayoutElement::HalfWavePlate45 { mode } => json!({
                "kind": "half-wave-plate-45",
                "mode": mode,
            }),
            LayoutElement::BeamDisplacer => json!({ "kind": "beam-displacer" }),
            LayoutElement::QuartzCrystal { mode, thickness_mm } => json!({
                "kind": "quartz-crystal",
                "mode": mode,
                "thickness_mm": thickness_mm,
            }),
        })
        .collect();
    json!({
        "rails": layout.rails,
        "labels_reversed": layout.labels_reversed,
        "encoding": layout.encoding.iter().map(slot_name).collect::<Vec<_>>(),
        "output": layout.output.iter().map(slot_name).collect::<Vec<_>>(),
        "elements": elements,
    })
}

fn compile_doc(plan: &DecompositionPlan, layout: &OpticalLayout, err: f64) -> Value {
    let rotations: Vec<Value> = plan
        .rotations()
        .iter()
        .map(|rot| {
            json!({
                "i": rot.i,
                "j": rot.j,
                "layer": plan.layer_of(rot),
                "identity": rot.is_identity(1e-14),
                "block": [
                    [cnum(rot.block[0][0]), cnum(rot.block[0][1])],
                    [cnum(rot.block[1][0]), cnum(rot.block[1][1])],
                ],
            })
        })
        .collect();
    json!({
        "dim": plan.dim(),
        "rotation_count": plan.rotations().len(),
        "layer_count": plan.layer_count(),
        "bd_count": layout.bd_count,
        "reconstruction_error": err,
        "rotations": rotations,
        "phases": plan.phases().iter().map(|&p| cnum(p)).collect::<Vec<_>>(),
        "layout": layout_doc(layout),
    })
}

fn compile_table(plan: &DecompositionPlan, layout: &OpticalLayout, err: f64) -> String {
    let mut text = format!(
        "compiled {}-mode unitary: {} rotations in {} layers, {} beam displacers\n",
        plan.dim(),
        plan.rotations().len(),
        plan.layer_count(),
        layout.bd_count
    );
    text.push_str(&format!("reconstruction error {err:.3e}\n"));
    for (k, rot) in plan.rotations().iter().enumerate() {
        let b = rot.block;
        text.push_str(&format!(
            "rotation {:>2}: modes ({},{}), layer {}, [{} {}; {} {}]{}\n",
            k + 1,
            rot.i,
            rot.j,
            plan.layer_of(rot),
            fmt_c4(b[0][0]),
            fmt_c4(b[0][1]),
            fmt_c4(b[1][0]),
            fmt_c4(b[1][1]),
            if rot.is_identity(1e-14) {
                " (identity)"
            } else {
                ""
            },
        ));
    }
    let phases: Vec<String> = plan.phases().iter().map(|&p| fmt_c4(p)).collect();
    text.push_str(&format!("phases: {}\n", phases.join(" ")));
    text.push_str(&layout.to_text());
    text
}

fn compile_csv(plan: &DecompositionPlan) -> String {
    let header = [
        "index", "i", "j", "layer", "b00_re", "b00_im", "b01_re", "b01_im", "b10_re", "b10_im",
        "b11_re", "b11_im",
    ];
    let mut text = csv_row(&header.map(String::from));
    for (k, rot) in plan.rotations().iter().enumerate() {
        let b = rot.block;
        let row = [
            format!("{}", k + 1),
            format!("{}", rot.i),
            format!("{}", rot.j),
            format!("{}", plan.layer_of(rot)),
            format!("{}", b[0][0].re),
            format!("{}", b[0][0].im),
            format!("{}", b[0][1].re),
            format!("{}", b[0][1].im),
            format!("{}", b[1][0].re),
            format!("{}", b[1][0].im),
            format!("{}", b[1][1].re),
            format!("{}", b[1][1].im),
        ];
        text.push_str(&csv_row(&row));
    }
    text
}

fn cmd_compile(args: CompileArgs) -> Result<(), CliError> {
    let u = load_unitary(&args.input)?;
    let plan = decompose(&u)?;
    let layout = emit_layout(&plan)?;
    let err = plan.reconstruction_error(&u)?;
    if err > 1e-8 {
        return Err(CliError::numeric(format!(
            "reconstruction error {err:.3e} exceeds 1e-8"
        )));
    }
    let text = match args.out.output {
        OutputFormat::Table => compile_table(&plan, &layout, err),
        OutputFormat::Json => render_json(&compile_doc(&plan, &layout, err)),
        OutputFormat::Csv => compile_csv(&plan),
    };
    Ok(deliver(&text, args.out.output_path.as_deref())?)
}

fn noise_table(r: &ResolvedConfig, totals: &[f64], results: &[NoiseStudyResult]) -> String {
    let mut text = format!(
        "noise study: {} (family {}), trials {}, seed {}\n",
        r.name,
        r.family.label(),
        results[0].trials,
        results[0].seed
    );
    for (total, res) in totals.iter().zip(results) {
        text.push_str(&format!(
            "total {:>10}: witness {} \u{00b1} {}, sd of violation {}\n",
            total,
            fmt4(res.witness_mean),
            fmt4(res.witness_std),
            fmt4(res.sd_of_violation),
        ));
        let controls: Vec<String> = res
            .control_means
            .iter()
            .zip(&res.control_stds)
            .map(|(m, s)| format!("{} \u{00b1} {}", fmt4(*m), fmt4(*s)))
            .collect();
        text.push_str(&format!("  controls: {}\n", controls.join(", ")));
    }
    text
}

fn noise_csv(totals: &[f64], results: &[NoiseStudyResult]) -> String {
    let n_controls = results[0].control_means.len();
    let mut header = vec!["total".to_string(), "witness_mean".into(), "witness_std".into()];
    for i in 0..n_controls {
        header.push(format!("control_mean_{i}"));
    }
    for i in 0..n_controls {
        header.push(format!("control_std_{i}"));
    }
    header.push("sd_of_violation".into());
    header.push("trials".into());
    header.push("seed".into());
    let mut text = csv_row(&header);
    for (total, res) in totals.iter().zip(results) {
        let mut row = vec![
            format!("{total}"),
            format!("{}", res.witness_mean),
            format!("{}", res.witness_std),
        ];
        for m in &res.control_means {
            row.push(format!("{m}"));
        }
        for s in &res.control_stds {
            row.push(format!("{s}"));
        }
        row.push(format!("{}", res.sd_of_violation));
        row.push(format!("{}", res.trials));
        row.push(format!("{}", res.seed));
        text.push_str(&csv_row(&row));
    }
    text
}

fn cmd_noise(args: NoiseArgs) -> Result<(), CliError> {
    let resolved = resolve_config(&args.config)?;
    let seed = resolve_seed(args.seed)?;
    let profile = match args.profile {
        Some(effs) => DetectorProfile::new(effs)?,
        None => DetectorProfile::ideal(resolved.config.dim()),
    };
    let results = noise_sweep(&resolved.config, &args.totals, &profile, args.trials, seed)?;
    let text = match args.out.output {
        OutputFormat::Table => noise_table(&resolved, &args.totals, &results),
        OutputFormat::Json => render_json(&json!({
            "name": resolved.name,
            "family": resolved.family.label(),
            "trials": args.trials,
            "seed": seed,
            "totals": args.totals,
            "results": results
                .iter()
                .map(|r| serde_json::to_value(r).expect("result"))
                .collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => noise_csv(&args.totals, &results),
    };
    Ok(deliver(&text, args.out.output_path.as_deref())?)
}

fn cmd_quartz(args: QuartzArgs) -> Result<(), CliError> {
    let spec = CoherenceSpec::new(args.wavelength, args.bandwidth, args.birefringence)?;
    let coherence_mm = spec.wavelength_nm * spec.wavelength_nm / spec.bandwidth_nm * 1e-6;
    let min_mm = spec.min_quartz_thickness();
    let text = match args.out.output {
        OutputFormat::Table => format!(
            "wavelength        {} nm\nbandwidth         {} nm\nbirefringence     {}\n\
             coherence length  {} mm\nmin quartz        {} mm\n",
            spec.wavelength_nm,
            spec.bandwidth_nm,
            spec.birefringence,
            fmt4(coherence_mm),
            fmt4(min_mm),
        ),
        OutputFormat::Json => render_json(&json!({
            "wavelength_nm": spec.wavelength_nm,
            "bandwidth_nm": spec.bandwidth_nm,
            "birefringence": spec.birefringence,
            "coherence_length_mm": coherence_mm,
            "min_thickness_mm": min_mm,
        })),
        OutputFormat::Csv => {
            let header = [
                "wavelength_nm",
                "bandwidth_nm",
                "birefringence",
                "coherence_length_mm",
                "min_thickness_mm",
            ];
            let row = [
                format!("{}", spec.wavelength_nm),
                format!("{}", spec.bandwidth_nm),
                format!("{}", spec.birefringence),
                format!("{coherence_mm}"),
                format!("{min_mm}"),
            ];
            let mut t = csv_row(&header.map(String::from));
            t.push_str(&csv_row(&row));
            t
        }
    };
    Ok(deliver(&text, args.out.output_path.as_deref())?)
}
