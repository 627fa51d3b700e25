use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gametree::analytics::tail::DEFAULT_K_MAX;
use gametree::analytics::{
    mean_matrix, mean_vector, mgf_constant, spectral, table1, tail_bound, toll_sups,
    variance_constant, Provenance, TABLE1_ARITIES,
};
use gametree::branching::{monte_carlo, simulate, MonteCarloConfig};
use gametree::exact_dist::{
    convergence_diagnostics, exact_cost_pmf_with_caps, verify_worst_case, worst_marginals,
};
use gametree::rng::run_rng;
use gametree::tree::snir_eval_with;
use gametree::worst_case::worst_input_with_caps;
use gametree::{Caps, CostPmf, Error, LeafVector, RootBit};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "gametree",
    version,
    about = "Randomized AND/OR tree evaluation: exact laws, worst cases, simulation and limit constants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args)]
struct CapArgs {
    /// Largest number of leaves of a tree or input.
    #[arg(long, env = "GAMETREE_MAX_LEAVES", default_value_t = Caps::DEFAULT_MAX_LEAVES,
          value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_leaves: u64,
    /// Largest leaf count for exhaustive input scans.
    #[arg(long, env = "GAMETREE_MAX_EXHAUSTIVE_N", default_value_t = Caps::DEFAULT_MAX_EXHAUSTIVE_N,
          value_parser = clap::value_parser!(u32).range(1..), global = true)]
    max_exhaustive_n: u32,
    /// Largest support of an exact cost law.
    #[arg(long, env = "GAMETREE_MAX_PMF_SUPPORT", default_value_t = Caps::DEFAULT_MAX_PMF_SUPPORT,
          value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_pmf_support: u64,
    /// Largest population of a simulated generation.
    #[arg(long, env = "GAMETREE_MAX_POPULATION", default_value_t = Caps::DEFAULT_MAX_POPULATION,
          value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_population: u64,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps {
            max_leaves: self.max_leaves,
            max_exhaustive_n: self.max_exhaustive_n,
            max_pmf_support: self.max_pmf_support,
            max_population: self.max_population,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized evaluator on an input.
    Evaluate {
        #[arg(long)]
        m: usize,
        /// Leaf values as a 0/1 string, left to right.
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Also list the leaves read.
        #[arg(long)]
        record: bool,
    },
    /// Print the worst-case input.
    WorstInput {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_root)]
        root: RootBit,
    },
    /// Exact law of the number of leaves read.
    ExactPmf {
        #[arg(long)]
        m: usize,
        /// Half-height; required without --input, checked against it otherwise.
        #[arg(long)]
        k: Option<u32>,
        /// Leaf values; defaults to the worst input with the given root.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, value_parser = parse_root, default_value = "1")]
        root: RootBit,
    },
    /// Check exhaustively that the worst inputs dominate every input.
    Dominance {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
    },
    /// One run of the branching process.
    Simulate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_root, default_value = "1")]
        root: RootBit,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Many seeded runs of the branching process.
    MonteCarlo {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_root, default_value = "1")]
        root: RootBit,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Thresholds for the normalized exceedance frequencies.
        #[arg(long, value_delimiter = ',')]
        tail: Option<Vec<f64>>,
    },
    /// Growth, variance and tail constants for one arity.
    Constants {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Also report the moment-generating-function constants at this q.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Growth exponent, variance constant and critical tail exponent per arity.
    Table1 {
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
    },
    /// Evaluate the tail bound exp(-L t^kappa).
    TailBound {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Distances between successive normalized worst-case laws.
    Converge {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
    },
}

fn parse_root(s: &str) -> Result<RootBit, String> {
    let b: u8 = s
        .parse()
        .map_err(|_| format!("expected 0 or 1, got `{s}`"))?;
    RootBit::try_from(b).map_err(|e| e.to_string())
}

/// Round to 12 significant digits.
fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fmt_f64(x: f64) -> String {
    let r = sig12(x);
    if r == 0.0 || (1e-6..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

/// Recursively round every non-integer number in a JSON tree.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_f64(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(" "),
        Value::Object(_) => v.to_string(),
    }
}

/// Tabular view of a result, used by the text and CSV renderers.
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// One row per object, columns in the order of the first object.
    fn from_objects(items: &[Value]) -> Self {
        let headers: Vec<String> = items
            .first()
            .and_then(Value::as_object)
            .map(|o| o.keys().cloned().collect())
            .unwrap_or_default();
        let rows = items
            .iter()
            .map(|it| headers.iter().map(|h| cell(&it[h.as_str()])).collect())
            .collect();
        Table { headers, rows }
    }

    /// Two columns, one row per scalar leaf of a nested object.
    fn key_values(v: &Value) -> Self {
        fn walk(prefix: &str, v: &Value, out: &mut Table) {
            match v {
                Value::Object(o) => {
                    for (k, x) in o {
                        let key = if prefix.is_empty() {
                            k.clone()
                        } else {
                            format!("{prefix}.{k}")
                        };
                        walk(&key, x, out);
                    }
                }
                _ => out.push(vec![prefix.to_string(), cell(v)]),
            }
        }
        let mut t = Table::new(&["field", "value"]);
        walk("", v, &mut t);
        t
    }

    fn write_text(&self, out: &mut impl Write, header: bool) -> io::Result<()> {
        let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        if header {
            writeln!(out, "{}", line(&self.headers))?;
        }
        for r in &self.rows {
            writeln!(out, "{}", line(r))?;
        }
        Ok(())
    }

    fn write_csv(&self, out: impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// A command's result in every output format.
struct Report {
    json: Value,
    /// Key/value summary printed above the table in text mode.
    summary: Option<Value>,
    table: Table,
    /// Exit status on success.
    status: u8,
}

impl Report {
    fn new(json: Value, table: Table) -> Self {
        Report {
            json,
            summary: None,
            table,
            status: 0,
        }
    }

    fn with_summary(mut self, summary: Value) -> Self {
        self.summary = Some(summary);
        self
    }

    fn render(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Json => {
                let s = serde_json::to_string_pretty(&round_floats(self.json.clone()))?;
                writeln!(out, "{s}")
            }
            Format::Csv => self.table.write_csv(out),
            Format::Text => {
                if let Some(Value::String(s)) = &self.summary {
                    writeln!(out, "{s}")?;
                } else if let Some(s) = &self.summary {
                    Table::key_values(s).write_text(out, false)?;
                    if !self.table.rows.is_empty() {
                        writeln!(out)?;
                    }
                }
                if !self.table.rows.is_empty() || self.summary.is_none() {
                    self.table.write_text(out, true)?;
                }
                Ok(())
            }
        }
    }
}

fn rational(x: &BigRational) -> String {
    x.to_string()
}

fn pmf_table(law: &CostPmf) -> Table {
    let mut t = Table::new(&["cost", "probability"]);
    for (c, p) in law.entries() {
        t.push(vec![c.to_string(), rational(p)]);
    }
    t
}

fn provenance(p: Provenance) -> Value {
    to_value(&p)
}

fn run(cli: &Cli) -> gametree::Result<Report> {
    let caps = cli.caps.caps();
    match &cli.command {
        Command::Evaluate {
            m,
            input,
            seed,
            runs,
            record,
        } => {
            let v = LeafVector::parse(*m, input, &caps)?;
            let mut table = Table::new(&["run", "root_bit", "leaves_read", "read_set"]);
            let mut items = Vec::new();
            let mut total = 0u64;
            let mut root_bit = false;
            for r in 0..*runs {
                let out = snir_eval_with(&v, &mut run_rng(*seed, r), *record);
                total += out.leaves_read as u64;
                root_bit = out.root_bit;
                let read = out.read_set.clone().unwrap_or_default();
                table.push(vec![
                    r.to_string(),
                    u8::from(out.root_bit).to_string(),
                    out.leaves_read.to_string(),
                    read.iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                ]);
                let mut item = json!({"run": r, "leaves_read": out.leaves_read});
                if let Some(set) = out.read_set {
                    item["read_set"] = to_value(&set);
                }
                items.push(item);
            }
            let summary = json!({
                "seed": seed,
                "m": m,
                "input": v.to_bit_string(),
                "root_bit": u8::from(root_bit),
                "runs": runs,
                "mean_cost": total as f64 / *runs as f64,
            });
            let mut json = summary.clone();
            json["results"] = Value::Array(items);
            Ok(Report::new(json, table).with_summary(summary))
        }
        Command::WorstInput { m, k, root } => {
            let v = worst_input_with_caps(*m, *k, *root, &caps)?;
            let bits = v.to_bit_string();
            let mut table = Table::new(&["m", "k", "root", "input"]);
            table.push(vec![
                m.to_string(),
                k.to_string(),
                root.index().to_string(),
                bits.clone(),
            ]);
            let json = json!({"m": m, "k": k, "root": root.index(), "input": bits});
            let mut report = Report::new(json, table);
            // Text mode prints the bare vector.
            report.summary = Some(Value::String(bits));
            report.table.rows.clear();
            Ok(report)
        }
        Command::ExactPmf { m, k, input, root } => {
            let law = match input {
                Some(s) => {
                    let v = LeafVector::parse(*m, s, &caps)?;
                    if let Some(k) = k {
                        if v.shape().half_height() != *k {
                            return Err(Error::InvalidArgument(format!(
                                "input has half-height {}, not {k}",
                                v.shape().half_height()
                            )));
                        }
                    }
                    exact_cost_pmf_with_caps(&v, &caps)?
                }
                None => {
                    let k = k.ok_or_else(|| {
                        Error::InvalidArgument("either --input or --k is required".into())
                    })?;
                    let [zero, one] = worst_marginals::<BigRational>(*m, k, &caps)?;
                    match root {
                        RootBit::Zero => zero,
                        RootBit::One => one,
                    }
                }
            };
            let summary =
                json!({"mean": rational(&law.mean()), "variance": rational(&law.variance())});
            Ok(Report::new(to_value(&law), pmf_table(&law)).with_summary(summary))
        }
        Command::Dominance { m, k } => {
            let r = verify_worst_case(*m, *k, &caps)?;
            let summary = json!({
                "m": r.m,
                "k": r.k,
                "inputs_scanned": r.inputs_scanned,
                "zero_root_inputs": r.zero_root_inputs,
                "worst_one": r.worst_one,
                "worst_zero": r.worst_zero,
                "violations": r.violations.len(),
                "maximal_inputs": r.maximal_inputs.len(),
                "maximal_zero_inputs": r.maximal_zero_inputs.len(),
                "passed": r.passed(),
            });
            let mut table = Table::new(&["input", "against"]);
            for v in &r.violations {
                table.push(vec![v.input.clone(), v.against.index().to_string()]);
            }
            let mut report = Report::new(to_value(&r), table).with_summary(summary.clone());
            if cli.format == Format::Csv {
                report.table = Table::from_objects(&[summary]);
            }
            report.status = if r.passed() { 0 } else { 1 };
            Ok(report)
        }
        Command::Simulate { m, k, root, seed } => {
            let pop = simulate(*m, *k, *root, &mut run_rng(*seed, 0), &caps)?;
            let json = json!({
                "seed": seed, "m": m, "k": k, "root": root.index(),
                "type0": pop.type0, "type1": pop.type1, "total": pop.total(),
            });
            Ok(Report::new(
                json.clone(),
                Table::from_objects(std::slice::from_ref(&json)),
            )
            .with_summary(json))
        }
        Command::MonteCarlo {
            m,
            k,
            root,
            runs,
            seed,
            tail,
        } => {
            let mut cfg = MonteCarloConfig::new(*m, *k, *root, *runs, *seed);
            if let Some(t) = tail {
                cfg.tail_grid = t.clone();
            }
            let stats = monte_carlo(&cfg, &caps)?;
            let mut table = Table::new(&["seed", "m", "k", "runs", "t", "frequency"]);
            for p in &stats.empirical_tail {
                table.push(vec![
                    seed.to_string(),
                    m.to_string(),
                    k.to_string(),
                    runs.to_string(),
                    fmt_f64(p.t),
                    fmt_f64(p.frequency),
                ]);
            }
            let summary = json!({
                "seed": stats.seed,
                "m": stats.m,
                "k": stats.k,
                "root": stats.start.index(),
                "runs": stats.runs,
                "mean": stats.mean,
                "variance": stats.variance,
                "standard_error": stats.standard_error(),
                "expected_mean": stats.expected_mean,
                "normalizer": stats.normalizer,
            });
            Ok(Report::new(to_value(&stats), table).with_summary(summary))
        }
        Command::Constants { m, q } => constants(*m, *q),
        Command::Table1 { m } => {
            let arities = m.clone().unwrap_or_else(|| TABLE1_ARITIES.to_vec());
            let rows = table1(&arities)?;
            let mut table = Table::new(&["m", "alpha", "d", "kappa"]);
            let mut items = Vec::new();
            for row in &rows {
                let (a, d, k) = row.rounded();
                table.push(vec![
                    row.m.to_string(),
                    format!("{a:.3}"),
                    format!("{d:.4}"),
                    format!("{k:.3}"),
                ]);
                items.push(json!({
                    "m": row.m,
                    "alpha": a,
                    "d": d,
                    "kappa": k,
                    "unrounded": to_value(row),
                    "provenance": {
                        "alpha": provenance(Provenance::ClosedForm),
                        "d": provenance(Provenance::FixedPoint),
                        "kappa": provenance(Provenance::ClosedForm),
                    },
                }));
            }
            Ok(Report::new(Value::Array(items), table))
        }
        Command::TailBound { m, kappa, t } => {
            let mut table = Table::new(&["t", "bound"]);
            let mut points = Vec::new();
            let mut constants = Value::Null;
            for &ti in t {
                let b = tail_bound(*m, *kappa, ti)?;
                table.push(vec![fmt_f64(b.t), fmt_f64(b.bound)]);
                points.push(json!({"t": b.t, "bound": b.bound}));
                constants = to_value(&b.constants);
            }
            let json = json!({"m": m, "kappa": kappa, "constants": constants, "points": points});
            Ok(Report::new(json, table).with_summary(constants))
        }
        Command::Converge { m, k_max } => {
            let steps = convergence_diagnostics(*m, *k_max, &caps)?;
            let items: Vec<Value> = steps.iter().map(to_value).collect();
            let table = Table::from_objects(&items);
            Ok(Report::new(Value::Array(items), table))
        }
    }
}

fn constants(m: usize, q: Option<f64>) -> gametree::Result<Report> {
    let spec = spectral(m)?;
    let var = variance_constant(m)?;
    let tolls = toll_sups(m, DEFAULT_K_MAX)?;
    let matrix = mean_matrix(m)?;
    let [mu0, mu1] = mean_vector(m, 1)?;

    let mut table = Table::new(&["quantity", "value", "provenance"]);
    let mut obj = Map::new();
    let mut add = |name: &str, value: Value, p: Provenance| {
        table.push(vec![
            name.to_string(),
            cell(&round_floats(value.clone())),
            cell(&provenance(p)),
        ]);
        obj.insert(
            name.to_string(),
            json!({"value": value, "provenance": provenance(p)}),
        );
    };
    let cf = Provenance::ClosedForm;
    add(
        "mean_matrix",
        json!(matrix
            .0
            .iter()
            .map(|r| r.iter().map(rational).collect::<Vec<_>>())
            .collect::<Vec<_>>()),
        cf,
    );
    add("determinant", json!(rational(&matrix.determinant())), cf);
    add(
        "mean_level1",
        json!([rational(&mu0), rational(&mu1)]),
        Provenance::ExactRecursion,
    );
    add("lambda1", json!(spec.lambda1), cf);
    add("lambda2", json!(spec.lambda2), cf);
    add("alpha", json!(spec.alpha), cf);
    add("beta", json!(spec.beta), cf);
    add("c0", json!(spec.c0), cf);
    add("c1", json!(spec.c1), cf);
    add("c2", json!(spec.c2), cf);
    add("kappa_max", json!(spec.kappa_max()), cf);
    add("d", json!(var.d), var.provenance);
    add("covariance", json!(var.covariance), var.provenance);
    add(
        "toll_sup_mean_sq",
        json!(tolls.sup_mean_sq),
        tolls.provenance,
    );
    add("toll_sup_ess", json!(tolls.sup_ess), tolls.provenance);
    add("toll_sup_ratio", json!(tolls.sup_ratio), tolls.provenance);
    add(
        "toll_limit_ratio",
        json!(tolls.limit_ratio),
        tolls.provenance,
    );
    if let Some(q) = q {
        let c = mgf_constant(m, q)?;
        add("q", json!(c.q), c.provenance);
        add("overlap_c", json!(c.c), c.provenance);
        add("xi", json!(c.xi), c.provenance);
        add("psi_q", json!(c.psi_q), c.provenance);
        add("k_q", json!(c.k), c.provenance);
        add("kappa", json!(c.kappa), c.provenance);
        add("l_kappa", json!(c.l), c.provenance);
    }
    let mut json = Value::Object(obj);
    json["m"] = json!(m);
    Ok(Report::new(json, table))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Numeric(_) => 4,
        Error::InvalidArgument(_) | Error::Parse(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = report.render(cli.format, &mut out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(report.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
