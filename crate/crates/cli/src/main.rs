use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use densym::algebra::span_algebra;
use densym::classifier::dimension_table;
use densym::loci::loci_for_order;
use densym::rational::parse_rat;
use densym::verify::{
    verify, verify_op, CheckResult, VerifyOptions, IDENTITY_NAMES, OPERATOR_NAMES,
};
use densym::{classify, Error, Rat, Space};

const OUT_DIR_VAR: &str = "DENSYM_OUT_DIR";
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(
    name = "densym",
    version,
    about = "Symmetries of modules of differential operators on densities"
)]
struct Cli {
    /// File of key=value lines giving defaults for the flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct Flags {
    /// Order k of the operators
    #[arg(short = 'k', long = "order")]
    order: Option<usize>,
    /// Source weight, as p/q or an integer
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Target weight, as p/q or an integer
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// line or circle
    #[arg(long)]
    space: Option<String>,
    /// Truncation degree of the coefficient basis (default k+6)
    #[arg(short = 'M', long)]
    truncation: Option<usize>,
    #[arg(long)]
    format: Option<String>,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry dimension, generators and algebra type of one module
    Classify(Flags),
    /// Dimension grid over the exceptional weight families
    Table {
        #[command(flatten)]
        flags: Flags,
        /// Random points per row condition
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the algebra identification in each cell
        #[arg(long)]
        no_kinds: bool,
    },
    /// Check a named identity, or the equivariance of a cataloged operator
    Verify {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        op: Option<String>,
        /// Print the accepted names
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        flags: Flags,
    },
    /// Exceptional loci in the weight plane as SVG and CSV
    Figures(Flags),
}

/// Flags merged with the config file.
struct RunConfig {
    order: Option<usize>,
    lambda: Option<Rat>,
    mu: Option<Rat>,
    space: Space,
    truncation: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    extra: BTreeMap<String, String>,
}

const CONFIG_KEYS: [&str; 10] = [
    "order",
    "lambda",
    "mu",
    "space",
    "truncation",
    "format",
    "out",
    "samples",
    "seed",
    "kinds",
];

fn read_config(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), n + 1))?;
        let key = key.trim().replace('-', "_");
        let key = if key == "k" { "order".to_string() } else { key };
        if !CONFIG_KEYS.contains(&key.as_str()) {
            bail!("{}:{}: unknown key {key:?}", path.display(), n + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> anyhow::Result<T> {
    v.parse()
        .map_err(|_| anyhow!("invalid value for {key}: {v:?}"))
}

impl RunConfig {
    fn new(flags: Flags, config: &Option<PathBuf>) -> anyhow::Result<Self> {
        let mut file = match config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        let mut take = |key: &str, flag: Option<String>| flag.or_else(|| file.remove(key));
        let order = take("order", flags.order.map(|k| k.to_string()));
        let lambda = take("lambda", flags.lambda);
        let mu = take("mu", flags.mu);
        let space = take("space", flags.space);
        let truncation = take("truncation", flags.truncation.map(|m| m.to_string()));
        let format = take("format", flags.format);
        let out = take("out", flags.out.map(|p| p.display().to_string()));
        Ok(RunConfig {
            order: order.map(|v| parse_value("order", &v)).transpose()?,
            lambda: lambda.map(|v| parse_rat(&v)).transpose()?,
            mu: mu.map(|v| parse_rat(&v)).transpose()?,
            space: space
                .map(|v| v.parse::<Space>())
                .transpose()?
                .unwrap_or(Space::Circle),
            truncation: truncation
                .map(|v| parse_value("truncation", &v))
                .transpose()?,
            format: format.map(|f| f.to_ascii_lowercase()),
            out: out.map(PathBuf::from),
            extra: file,
        })
    }

    fn order(&self) -> anyhow::Result<usize> {
        self.order.ok_or_else(|| anyhow!("missing -k/--order"))
    }

    fn weights(&self) -> anyhow::Result<(Rat, Rat)> {
        match (&self.lambda, &self.mu) {
            (Some(l), Some(m)) => Ok((l.clone(), m.clone())),
            _ => bail!("missing --lambda or --mu"),
        }
    }

    fn format<'a>(&self, allowed: &[&'a str]) -> anyhow::Result<&'a str> {
        let f = self.format.as_deref().unwrap_or(allowed[0]);
        match allowed.iter().find(|a| **a == f) {
            Some(a) => Ok(a),
            None => bail!(
                "unsupported format {f:?}; expected one of {}",
                allowed.join(", ")
            ),
        }
    }

    fn extra<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.extra.get(key).map(|v| parse_value(key, v)).transpose(),
        }
    }

    /// Explicit `--out`, else `$DENSYM_OUT_DIR/<name>`, else stdout.
    fn emit(&self, default_name: &str, content: &str) -> anyhow::Result<()> {
        let path = match (&self.out, std::env::var_os(OUT_DIR_VAR)) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(PathBuf::from(dir).join(default_name)),
            (None, None) => None,
        };
        match path {
            Some(p) => write_file(&p, content),
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn file_tag(r: &Rat) -> String {
    densym::rational::fmt_rat(r).replace('/', "_")
}

fn cmd_classify(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let k = cfg.order()?;
    let (l, m) = cfg.weights()?;
    let format = cfg.format(&["json", "csv"])?;
    let c = classify(k, &l, &m, cfg.space, cfg.truncation)?;
    let stem = format!(
        "classify_k{k}_{}_{}_{}",
        file_tag(&l),
        file_tag(&m),
        cfg.space
    );
    if format == "csv" {
        let alg = span_algebra(&c.maps)?;
        cfg.emit(&format!("{stem}.csv"), &alg.to_csv())?;
    } else {
        let json = serde_json::to_string_pretty(&c.report)? + "\n";
        cfg.emit(&format!("{stem}.json"), &json)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(
    cfg: &RunConfig,
    samples: Option<usize>,
    seed: Option<u64>,
    no_kinds: bool,
) -> anyhow::Result<ExitCode> {
    let max_k = cfg.order.unwrap_or(6);
    let samples = cfg.extra("samples", samples)?.unwrap_or(3);
    let seed = cfg.extra("seed", seed)?.unwrap_or(DEFAULT_SEED);
    let kinds = !no_kinds && cfg.extra::<bool>("kinds", None)?.unwrap_or(true);
    if samples == 0 {
        bail!("--samples must be positive");
    }
    let format = cfg.format(&["csv", "json"])?;
    let table = dimension_table(max_k, cfg.space, samples, seed, kinds)?;
    let text = match format {
        "json" => serde_json::to_string_pretty(&table)? + "\n",
        _ => table.to_csv(),
    };
    cfg.emit(&format!("table_{}.{format}", cfg.space), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn render_check(r: &CheckResult) -> String {
    let mut s = format!(
        "{}: {}\nchecks: {}\ndefect: {}\nbasis size: {}\n",
        r.name,
        if r.passed { "PASS" } else { "FAIL" },
        r.checks,
        r.defect,
        r.basis_size
    );
    for f in &r.failures {
        s.push_str(&format!("  {f}\n"));
    }
    s
}

fn cmd_verify(
    cfg: &RunConfig,
    name: Option<String>,
    op: Option<String>,
    list: bool,
) -> anyhow::Result<ExitCode> {
    if list {
        let mut s = String::from("identities:\n");
        for n in IDENTITY_NAMES {
            s.push_str(&format!("  {n}\n"));
        }
        s.push_str("operators (--op):\n");
        for n in OPERATOR_NAMES {
            s.push_str(&format!("  {n}\n"));
        }
        print!("{s}");
        return Ok(ExitCode::SUCCESS);
    }
    let format = cfg.format(&["text", "json"])?;
    let opts = VerifyOptions {
        k: cfg.order,
        m: cfg.truncation,
        space: cfg.space,
        ..Default::default()
    };
    let (result, stem) = match (name, op) {
        (Some(name), None) => (verify(&name, &opts)?, format!("verify_{name}")),
        (None, Some(op)) => {
            let k = cfg.order()?;
            let (l, m) = cfg.weights()?;
            (
                verify_op(&op, k, &l, &m, &opts)?,
                format!("verify_op_{op}_k{k}"),
            )
        }
        _ => bail!("give an identity name or --op <operator>"),
    };
    let text = match format {
        "json" => serde_json::to_string_pretty(&result)? + "\n",
        _ => render_check(&result),
    };
    let ext = if format == "json" { "json" } else { "txt" };
    cfg.emit(&format!("{stem}.{ext}"), &text)?;
    Ok(if result.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_figures(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let k = cfg.order()?;
    let format = cfg.format(&["all", "svg", "csv"])?;
    let fig = loci_for_order(k)?;
    let dir = cfg.out_dir();
    if format != "csv" {
        write_file(&dir.join(format!("loci_k{k}.svg")), &fig.to_svg())?;
    }
    if format != "svg" {
        write_file(&dir.join(format!("loci_k{k}.csv")), &fig.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Classify(flags) => cmd_classify(&RunConfig::new(flags, &cli.config)?),
        Command::Table {
            flags,
            samples,
            seed,
            no_kinds,
        } => cmd_table(
            &RunConfig::new(flags, &cli.config)?,
            samples,
            seed,
            no_kinds,
        ),
        Command::Verify {
            name,
            op,
            list,
            flags,
        } => cmd_verify(&RunConfig::new(flags, &cli.config)?, name, op, list),
        Command::Figures(flags) => cmd_figures(&RunConfig::new(flags, &cli.config)?),
    }
}

/// 3 for internal inconsistencies, 2 for everything the caller can fix.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::OracleDisagreement(_) | Error::SpanMismatch(_) | Error::SpanNotClosed(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_errors_map_to_three() {
        let e = anyhow::Error::from(Error::OracleDisagreement("x".into()));
        assert_eq!(exit_code(&e), 3);
        let e = anyhow::Error::from(Error::SpanMismatch("x".into()));
        assert_eq!(exit_code(&e), 3);
        let e = anyhow::Error::from(Error::Parse("x".into()));
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&anyhow!("missing --mu")), 2);
    }

    #[test]
    fn failures_are_listed() {
        let r = CheckResult {
            name: "w_squared".into(),
            passed: false,
            defect: "3/2".into(),
            basis_size: 40,
            checks: 2,
            failures: vec!["W² at (0, 1): residual 3/2".into()],
        };
        assert_eq!(
            render_check(&r),
            "w_squared: FAIL\nchecks: 2\ndefect: 3/2\nbasis size: 40\n  W² at (0, 1): residual 3/2\n"
        );
    }
}
