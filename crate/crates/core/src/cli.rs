//! Command line front end: single runs, sweeps and security audits.
//!
//! Bits are written client 1 first: `--inputs 1101` means `x_1 = 1, x_2 = 1,
//! x_3 = 0, x_4 = 1`. Exit codes: 0 success, 1 internal error, 2 usage or
//! validation error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::oracle::{pairwise_and, BitVector};
use crate::photonic::{run_noisy_experiment, NoiseModel, Tally};
use crate::protocol::{run_protocol, PartyId, ProtocolConfig};
use crate::qubit::{trace_distance, DensityMatrix, ALGEBRA_TOL};
use crate::security::{
    binomial_stderr, blinding_check, server_marginal_analytic, server_marginal_sampled, share_privacy_check,
    transcript_leakage, xz_grid, MAX_LEAKAGE_N,
};

/// Largest client count accepted by `sweep`.
pub const MAX_SWEEP_N: usize = 8;
/// Up to this many clients a sweep enumerates every padding vector.
pub const EXHAUSTIVE_PADDING_N: usize = 5;
/// Random padding vectors per input above [`EXHAUSTIVE_PADDING_N`].
pub const RANDOM_PADDINGS: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "qmpc", version, about = "Single-qubit delegated multiparty pairwise AND")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one protocol run.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Input bits, client 1 first.
        #[arg(long)]
        inputs: String,
        /// Padding bits; drawn from the seed when omitted.
        #[arg(long)]
        paddings: Option<String>,
    },
    /// Run every (inputs, paddings) configuration for `n` clients.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the blinding, flatness, share-privacy and leakage checks.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Ideal,
    Photonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Number of clients.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "ideal")]
    pub mode: Mode,
    #[arg(long, env = "QMPC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Shots per configuration (photonic mode and sampled marginals).
    #[arg(long, default_value_t = 3000)]
    pub shots: u64,
    /// JSON file holding a noise model.
    #[arg(long)]
    pub noise_file: Option<PathBuf>,
    /// Client applying the final rotation (default: the last client).
    #[arg(long)]
    pub final_rotator: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub shots: u64,
    pub noise: NoiseModel,
    pub final_rotator: usize,
    pub output_format: OutputFormat,
}

impl RunConfig {
    fn from_args(args: &CommonArgs, n: usize) -> Result<Self, CliError> {
        if n < 2 {
            return Err(CliError::usage(format!("--n: need at least 2 clients, got {n}")));
        }
        if args.shots == 0 {
            return Err(CliError::usage("--shots: must be at least 1"));
        }
        let final_rotator = args.final_rotator.unwrap_or(n);
        if !(1..=n).contains(&final_rotator) {
            return Err(CliError::usage(format!("--final-rotator: {final_rotator} outside 1..={n}")));
        }
        let noise = match &args.noise_file {
            None => NoiseModel::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("--noise-file: {}: {e}", path.display())))?;
                let noise: NoiseModel = serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("--noise-file: {}: {e}", path.display())))?;
                noise.validate().map_err(|e| CliError::usage(format!("--noise-file: {e}")))?;
                noise
            }
        };
        Ok(RunConfig {
            n,
            mode: args.mode,
            seed: args.seed,
            shots: args.shots,
            noise,
            final_rotator,
            output_format: args.format,
        })
    }

    fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig { final_rotator: Some(self.final_rotator) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::UnsupportedSize(_) => CliError::Usage(e.to_string()),
        }
    }
}

/// Rounds to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float")
}

/// A cell shared by the JSON and CSV renderings.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Bits(BitVector),
    Bit(bool),
    Int(u64),
    Prob(f64),
    Text(String),
    /// JSON `null`, an empty CSV field.
    Null,
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Bits(b) => serde_json::to_value(b).expect("bit vector"),
            Cell::Bit(b) => json!(*b as u8),
            Cell::Int(i) => json!(i),
            Cell::Prob(p) => json!(round_sig6(*p)),
            Cell::Text(t) => json!(t),
            Cell::Null => Value::Null,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Bits(b) => b.to_string(),
            Cell::Bit(b) => (*b as u8).to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Prob(p) => json!(round_sig6(*p)).to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
            Cell::Null => String::new(),
        }
    }
}

/// Named columns with rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    fn write_csv(&self, out: &mut String) {
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
}

/// A command's result: header fields followed by one or more tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<(&'static str, Cell)>,
    pub sections: Vec<(&'static str, Table)>,
    /// Whether the command's checks all passed.
    pub ok: bool,
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut obj = Map::new();
                for (k, v) in &self.header {
                    obj.insert(k.to_string(), v.json());
                }
                for (name, table) in &self.sections {
                    // Single-row sections are objects, the rest arrays.
                    let rows = table.json_rows();
                    let value = match (name.ends_with('s'), rows) {
                        (false, Value::Array(mut a)) if a.len() == 1 => a.remove(0),
                        (_, rows) => rows,
                    };
                    obj.insert(name.to_string(), value);
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut out = String::new();
                if !self.header.is_empty() {
                    let mut head = Table::new(&self.header.iter().map(|(k, _)| *k).collect::<Vec<_>>());
                    head.push(self.header.iter().map(|(_, v)| v.clone()).collect());
                    head.write_csv(&mut out);
                }
                for (name, table) in &self.sections {
                    let _ = writeln!(out, "# {name}");
                    table.write_csv(&mut out);
                }
                out
            }
        }
    }
}

fn parse_bits(flag: &str, s: &str) -> Result<BitVector, CliError> {
    s.parse().map_err(|e: Error| CliError::usage(format!("{flag}: {e}")))
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Ideal => "ideal",
        Mode::Photonic => "photonic",
    }
}

/// Runs a parsed command, returning the rendered output.
pub fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    let (report, format) = match &cli.command {
        Command::Run { common, inputs, paddings } => {
            let inputs = parse_bits("--inputs", inputs)?;
            let n = common.n.unwrap_or(inputs.len());
            let config = RunConfig::from_args(common, n)?;
            let paddings = match paddings {
                Some(p) => parse_bits("--paddings", p)?,
                None => {
                    let mut rng = stream_rng(config.seed, u64::MAX);
                    BitVector::new((0..n).map(|_| rng.random()).collect())
                }
            };
            if inputs.len() != n {
                return Err(CliError::usage(format!("--inputs: expected {n} bits, got {}", inputs.len())));
            }
            if paddings.len() != n {
                return Err(CliError::usage(format!("--paddings: expected {n} bits, got {}", paddings.len())));
            }
            (cmd_run(&config, &inputs, &paddings)?, config.output_format)
        }
        Command::Sweep { common } => {
            let config = RunConfig::from_args(common, common.n.unwrap_or(4))?;
            (cmd_sweep(&config)?, config.output_format)
        }
        Command::Audit { common } => {
            let config = RunConfig::from_args(common, common.n.unwrap_or(4))?;
            (cmd_security_audit(&config)?, config.output_format)
        }
    };
    Ok((report.render(format), report.ok))
}

/// One run: an ideal protocol execution or a noisy photonic experiment.
pub fn cmd_run(config: &RunConfig, inputs: &BitVector, paddings: &BitVector) -> Result<Report, CliError> {
    let header = vec![("command", Cell::Text("run".into())), ("mode", Cell::Text(mode_name(config.mode).into()))];
    match config.mode {
        Mode::Ideal => {
            let mut rng = stream_rng(config.seed, 0);
            let res = run_protocol(inputs, paddings, &mut rng, &config.protocol())?;
            let mut t = Table::new(&[
                "n",
                "inputs",
                "paddings",
                "server_outcome",
                "decoded",
                "expected",
                "transcript_len",
                "seed",
            ]);
            t.push(vec![
                Cell::Int(config.n as u64),
                Cell::Bits(inputs.clone()),
                Cell::Bits(paddings.clone()),
                Cell::Bit(res.server_outcome),
                Cell::Bit(res.decoded),
                Cell::Bit(res.expected),
                Cell::Int(res.transcript.len() as u64),
                Cell::Int(config.seed),
            ]);
            let ok = res.decoded == res.expected;
            Ok(Report { header, sections: vec![("result", t)], ok })
        }
        Mode::Photonic => {
            let stats = run_noisy_experiment(
                inputs,
                paddings,
                &config.noise,
                config.shots,
                config.seed,
                Execution::default(),
            )?;
            let mut t = Table::new(&[
                "inputs",
                "paddings",
                "shots",
                "detected",
                "count_0",
                "count_1",
                "correctness",
                "stderr",
            ]);
            t.push(vec![
                Cell::Bits(inputs.clone()),
                Cell::Bits(paddings.clone()),
                Cell::Int(stats.shots()),
                Cell::Int(stats.detected()),
                Cell::Int(stats.tally.counts[0]),
                Cell::Int(stats.tally.counts[1]),
                Cell::Prob(stats.correctness()),
                Cell::Prob(stats.stderr()),
            ]);
            let mut noise = Table::new(&[
                "angle_jitter_sigma",
                "dark_count_prob",
                "crosstalk_prob",
                "extinction_ratio_db",
                "coupling_efficiency",
            ]);
            let n = &config.noise;
            noise.push(vec![
                Cell::Prob(n.angle_jitter_sigma),
                Cell::Prob(n.dark_count_prob),
                Cell::Prob(n.crosstalk_prob),
                if n.extinction_ratio_db.is_finite() {
                    Cell::Prob(n.extinction_ratio_db)
                } else {
                    Cell::Null
                },
                Cell::Prob(n.coupling_efficiency),
            ]);
            Ok(Report { header, sections: vec![("result", t), ("noise", noise)], ok: true })
        }
    }
}

/// The padding vectors a sweep visits for `inputs`.
pub fn sweep_paddings(inputs: &BitVector, seed: u64) -> Vec<BitVector> {
    let n = inputs.len();
    if n <= EXHAUSTIVE_PADDING_N {
        BitVector::all(n).collect()
    } else {
        let mut rng = stream_rng(seed ^ 0x5eed_0000_0000_0000, inputs.index());
        (0..RANDOM_PADDINGS).map(|_| BitVector::new((0..n).map(|_| rng.random()).collect())).collect()
    }
}

/// Every input vector against its sweep paddings.
pub fn cmd_sweep(config: &RunConfig) -> Result<Report, CliError> {
    let n = config.n;
    if n > MAX_SWEEP_N {
        return Err(CliError::usage(format!("--n: sweeps support at most {MAX_SWEEP_N} clients, got {n}")));
    }
    let configs: Vec<(BitVector, BitVector)> = BitVector::all(n)
        .flat_map(|x| sweep_paddings(&x, config.seed).into_iter().map(move |p| (x.clone(), p)))
        .collect();
    let header = vec![
        ("command", Cell::Text("sweep".into())),
        ("n", Cell::Int(n as u64)),
        ("mode", Cell::Text(mode_name(config.mode).into())),
        ("seed", Cell::Int(config.seed)),
    ];
    match config.mode {
        Mode::Ideal => {
            let protocol = config.protocol();
            let results = map_indexed(Execution::default(), configs.len(), |k| {
                let (x, p) = &configs[k];
                let mut rng = stream_rng(config.seed, k as u64);
                run_protocol(x, p, &mut rng, &protocol).map(|r| (r.expected, r.decoded))
            });
            let mut rows = Table::new(&["inputs", "paddings", "expected", "decoded", "match"]);
            let mut matches = 0u64;
            for ((x, p), res) in configs.iter().zip(results) {
                let (expected, decoded) = res?;
                matches += (expected == decoded) as u64;
                rows.push(vec![
                    Cell::Bits(x.clone()),
                    Cell::Bits(p.clone()),
                    Cell::Bit(expected),
                    Cell::Bit(decoded),
                    Cell::Bit(expected == decoded),
                ]);
            }
            let total = configs.len() as u64;
            let mut summary = Table::new(&["rows", "matches", "correctness"]);
            summary.push(vec![Cell::Int(total), Cell::Int(matches), Cell::Prob(matches as f64 / total as f64)]);
            Ok(Report { header, sections: vec![("rows", rows), ("summary", summary)], ok: matches == total })
        }
        Mode::Photonic => {
            let mut rows = Table::new(&["inputs", "paddings", "expected", "detected", "correct", "correctness"]);
            let mut overall = Tally::default();
            for (k, (x, p)) in configs.iter().enumerate() {
                let sub_seed = stream_rng(config.seed, k as u64).random::<u64>();
                let stats = run_noisy_experiment(x, p, &config.noise, config.shots, sub_seed, Execution::default())?;
                overall = overall.merge(stats.tally);
                rows.push(vec![
                    Cell::Bits(x.clone()),
                    Cell::Bits(p.clone()),
                    Cell::Bit(pairwise_and(x)?),
                    Cell::Int(stats.detected()),
                    Cell::Int(stats.tally.correct),
                    Cell::Prob(stats.correctness()),
                ]);
            }
            let mut summary = Table::new(&["rows", "shots", "detected", "correct", "correctness", "stderr"]);
            summary.push(vec![
                Cell::Int(configs.len() as u64),
                Cell::Int(overall.shots),
                Cell::Int(overall.detected),
                Cell::Int(overall.correct),
                Cell::Prob(overall.correctness()),
                Cell::Prob(overall.stderr()),
            ]);
            Ok(Report { header, sections: vec![("rows", rows), ("summary", summary)], ok: true })
        }
    }
}

const FLATNESS_MAX_N: usize = 8;
const SAMPLED_INPUT_VECTORS: u64 = 20;

/// Runs each security check and reports pass, fail or skipped.
pub fn cmd_security_audit(config: &RunConfig) -> Result<Report, CliError> {
    let n = config.n;
    let mut checks = Table::new(&["name", "status", "value", "detail"]);
    let mut all_ok = true;
    let mut record = |name: &str, passed: bool, value: f64, detail: String| {
        all_ok &= passed;
        checks.push(vec![
            Cell::Text(name.into()),
            Cell::Text(if passed { "pass" } else { "fail" }.into()),
            Cell::Prob(value),
            Cell::Text(detail),
        ]);
    };

    let mixed = DensityMatrix::maximally_mixed();
    let worst = [false, true]
        .iter()
        .flat_map(|&x| xz_grid(100).map(move |psi| trace_distance(&blinding_check(x, &psi), &mixed)))
        .fold(0.0, f64::max);
    record("blinding", worst <= ALGEBRA_TOL, worst, "max trace distance to I/2 over 2 x 100 XZ states".into());

    let mut skipped: Vec<(&str, String)> = Vec::new();
    if n <= FLATNESS_MAX_N {
        let mut worst = 0.0f64;
        for x in BitVector::all(n) {
            worst = worst.max((server_marginal_analytic(&x)? - 0.5).abs());
        }
        record("flatness_analytic", worst <= 1e-15, worst, format!("max |P(1) - 0.5| over {} inputs", 1u64 << n));

        let band = 3.0 * binomial_stderr(0.5, config.shots);
        let mut worst = 0.0f64;
        for k in 0..SAMPLED_INPUT_VECTORS {
            let mut rng = stream_rng(config.seed, k);
            let x = BitVector::new((0..n).map(|_| rng.random()).collect());
            let est = server_marginal_sampled(&x, config.shots, rng.random(), Execution::default())?;
            worst = worst.max((est - 0.5).abs());
        }
        record(
            "flatness_sampled",
            worst <= band,
            worst,
            format!("max |estimate - 0.5| over {SAMPLED_INPUT_VECTORS} inputs x {} shots; 3 sigma = {}", config.shots, round_sig6(band)),
        );
    } else {
        skipped.push(("flatness_analytic", format!("skipped: n > {FLATNESS_MAX_N}")));
        skipped.push(("flatness_sampled", format!("skipped: n > {FLATNESS_MAX_N}")));
    }

    if n <= 5 {
        let mut ok = true;
        for k in 1..n {
            ok &= share_privacy_check(n, k)?;
        }
        record("share_privacy", ok, if ok { 1.0 } else { 0.0 }, format!("all subsets of size 1..{n}"));
    } else {
        skipped.push(("share_privacy", "skipped: n > 5".into()));
    }

    if n <= MAX_LEAKAGE_N {
        let server = transcript_leakage(n, PartyId::Server)?.mutual_information_bits;
        record("leakage_server", server.abs() <= 1e-9, server, "bits about all inputs".into());
        let rotator = transcript_leakage(n, PartyId::Client(n))?.mutual_information_bits;
        record(
            "leakage_final_rotator",
            (rotator - 1.0).abs() <= 1e-9,
            rotator,
            format!("bits about other inputs held by C{n}; expected exactly the parity"),
        );
        let mut worst = 0.0f64;
        for i in 1..n {
            worst = worst.max(transcript_leakage(n, PartyId::Client(i))?.mutual_information_bits);
        }
        record("leakage_other_clients", worst.abs() <= 1e-9, worst, "max bits over C1..C(n-1)".into());
    } else {
        skipped.push(("leakage", format!("skipped: n > {MAX_LEAKAGE_N}")));
    }

    for (name, detail) in skipped {
        checks.push(vec![Cell::Text(name.into()), Cell::Text("skipped".into()), Cell::Prob(0.0), Cell::Text(detail)]);
    }

    let header = vec![
        ("command", Cell::Text("audit".into())),
        ("n", Cell::Int(n as u64)),
        ("seed", Cell::Int(config.seed)),
        ("shots", Cell::Int(config.shots)),
        ("all_passed", Cell::Bit(all_ok)),
    ];
    Ok(Report { header, sections: vec![("checks", checks)], ok: all_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("qmpc").chain(args.iter().copied())).unwrap()
    }

    fn run_json(args: &[&str]) -> Value {
        let (out, _) = execute(&parse(args)).unwrap();
        serde_json::from_str(&out).unwrap()
    }

    #[test]
    fn run_examples() {
        let v = run_json(&["run", "--n", "2", "--inputs", "11", "--paddings", "00"]);
        assert_eq!(v["result"]["decoded"], 1);
        assert_eq!(v["result"]["server_outcome"], 1);
        let v = run_json(&["run", "--n", "4", "--inputs", "0000", "--paddings", "1010"]);
        assert_eq!(v["result"]["decoded"], 0);
        let err = execute(&parse(&["run", "--inputs", "111", "--paddings", "11"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--paddings"));
    }

    #[test]
    fn malformed_bits_name_the_flag() {
        let err = execute(&parse(&["run", "--inputs", "1a1"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--inputs"), "{err}");
        let err = execute(&parse(&["run", "--inputs", "11", "--paddings", "2"])).unwrap_err();
        assert!(err.to_string().contains("--paddings"), "{err}");
        let err = execute(&parse(&["run", "--inputs", "11", "--final-rotator", "3"])).unwrap_err();
        assert!(err.to_string().contains("--final-rotator"), "{err}");
    }

    #[test]
    fn sweep_small_cases() {
        for (n, rows) in [(2, 16), (4, 256)] {
            let v = run_json(&["sweep", "--n", &n.to_string()]);
            assert_eq!(v["rows"].as_array().unwrap().len(), rows);
            assert_eq!(v["summary"]["correctness"], 1.0);
        }
        let v = run_json(&["sweep", "--n", "6"]);
        assert_eq!(v["rows"].as_array().unwrap().len(), 64 * 64);
        assert!(execute(&parse(&["sweep", "--n", "9"])).is_err());
    }

    #[test]
    fn csv_and_json_carry_the_same_values() {
        let (json, _) = execute(&parse(&["sweep", "--n", "3", "--seed", "5"])).unwrap();
        let (csv, _) = execute(&parse(&["sweep", "--n", "3", "--seed", "5", "--format", "csv"])).unwrap();
        let v: Value = serde_json::from_str(&json).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        let start = lines.iter().position(|l| *l == "# rows").unwrap() + 2;
        for (k, row) in v["rows"].as_array().unwrap().iter().enumerate() {
            let bits = |key: &str| {
                row[key].as_array().unwrap().iter().map(|b| b.to_string()).collect::<String>()
            };
            let expected =
                format!("{},{},{},{},{}", bits("inputs"), bits("paddings"), row["expected"], row["decoded"], row["match"]);
            assert_eq!(lines[start + k], expected);
        }
        assert!(csv.contains("# summary\nrows,matches,correctness\n64,64,1.0\n"));
    }

    #[test]
    fn photonic_run_reports_stats() {
        let v = run_json(&["run", "--inputs", "1111", "--paddings", "0101", "--mode", "photonic", "--shots", "500"]);
        assert_eq!(v["result"]["shots"], 500);
        assert!(v["result"]["correctness"].as_f64().unwrap() > 0.9);
        assert_eq!(v["noise"]["extinction_ratio_db"], 60.0);
    }

    #[test]
    fn noise_file_is_loaded_and_validated() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("ideal.json");
        std::fs::write(&good, serde_json::to_string(&NoiseModel::ideal()).unwrap()).unwrap();
        let v = run_json(&[
            "run", "--inputs", "1101", "--paddings", "0011", "--mode", "photonic", "--shots", "300",
            "--noise-file", good.to_str().unwrap(),
        ]);
        assert_eq!(v["result"]["correctness"], 1.0);
        assert!(v["noise"]["extinction_ratio_db"].is_null());
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"angle_jitter_sigma":0,"dark_count_prob":2,"crosstalk_prob":0,"extinction_ratio_db":60,"coupling_efficiency":1}"#).unwrap();
        let err = execute(&parse(&["run", "--inputs", "11", "--mode", "photonic", "--noise-file", bad.to_str().unwrap()]))
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let missing = dir.path().join("missing.json");
        let err = execute(&parse(&["run", "--inputs", "11", "--noise-file", missing.to_str().unwrap()])).unwrap_err();
        assert!(err.to_string().contains("--noise-file"));
    }

    #[test]
    fn audit_n2_passes() {
        let v = run_json(&["audit", "--n", "2", "--shots", "1000"]);
        assert_eq!(v["all_passed"], 1);
        let checks = v["checks"].as_array().unwrap();
        let server = checks.iter().find(|c| c["name"] == "leakage_server").unwrap();
        assert_eq!(server["value"], 0.0);
        assert!(checks.iter().all(|c| c["status"] == "pass"));
    }

    #[test]
    fn audit_n5_skips_leakage() {
        let v = run_json(&["audit", "--n", "5", "--shots", "500"]);
        let checks = v["checks"].as_array().unwrap();
        let leak = checks.iter().find(|c| c["name"] == "leakage").unwrap();
        assert_eq!(leak["status"], "skipped");
        assert_eq!(leak["detail"], "skipped: n > 4");
        assert!(checks.iter().filter(|c| c["name"] != "leakage").all(|c| c["status"] == "pass"));
        assert_eq!(v["all_passed"], 1);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig6(0.99726612), 0.997266);
        assert_eq!(round_sig6(1.0), 1.0);
        assert_eq!(round_sig6(0.0273861278), 0.0273861);
        assert_eq!(round_sig6(123456789.0), 123457000.0);
        assert_eq!(round_sig6(0.0), 0.0);
    }
}
