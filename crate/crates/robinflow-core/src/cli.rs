//! Command-line front end. Every subcommand builds a [`Table`] and an
//! equivalent JSON value; `--format` picks which one is written.

use crate::acceptance;
use crate::boundary::{self, BoundaryMethod};
use crate::disc::{self, ModeProblem, SpectrumWindow};
use crate::error::{Error, Result};
use crate::kernel::{self, KernelParams};
use crate::robinflow::{self as rf, FlowQuery, RobinPath};
use crate::symbol::RobinSymbol;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "robinflow", version, about = "Spectra and spectral flow of exterior Landau-Robin hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Omit the timestamp line so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of each angular mode inside a window.
    Spectrum {
        #[arg(long)]
        b: f64,
        /// Robin symbol as inline JSON or a path to a JSON file.
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        nmin: i64,
        #[arg(long, allow_hyphen_values = true)]
        nmax: i64,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// Spectral flow through mu along a Robin path.
    Flow {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t_start: f64,
        /// Path as inline JSON, e.g. `{"kind":"scaled","speed":{"kind":"constant","c":2}}`.
        #[arg(long, default_value = r#"{"kind":"shift"}"#)]
        path: String,
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Flow counts for several path lengths and their linear fit.
    Weyl {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Comma-separated path lengths.
        #[arg(long)]
        gammas: String,
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
    },
    /// Which modes have the Landau level Lambda_q as an eigenvalue.
    Mult {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        tau: String,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, allow_hyphen_values = true)]
        nmin: i64,
        #[arg(long, allow_hyphen_values = true)]
        nmax: i64,
    },
    /// Fundamental solution E(x, y; mu) of the magnetic operator.
    Kernel {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu_im: f64,
        /// Comma-separated coordinates of x.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Fourier modes of the boundary layer operators and Gamma_n.
    Boundary {
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        nmin: i64,
        #[arg(long, allow_hyphen_values = true)]
        nmax: i64,
        #[arg(long, value_enum, default_value_t = Route::Kernel)]
        route: Route,
    },
    /// Run the acceptance checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Kernel,
    Pv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self, stamp: Option<&str>) -> String {
        let mut s = String::new();
        if let Some(stamp) = stamp {
            s.push_str(&format!("# robinflow {} {stamp}\n", env!("CARGO_PKG_VERSION")));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| Value::Object(self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect()))
                .collect(),
        )
    }
}

/// What a subcommand produced.
pub struct Output {
    pub table: Table,
    /// Written next to the main file (or to stderr) in csv mode.
    pub sidecar: Option<Value>,
    /// Overrides the row-wise JSON in json mode.
    pub json: Option<Value>,
    pub status: i32,
}

impl Output {
    fn table(table: Table) -> Self {
        Output { table, sidecar: None, json: None, status: 0 }
    }
}

fn parse_symbol(arg: &str) -> Result<RobinSymbol> {
    if arg.trim_start().starts_with('{') {
        return RobinSymbol::from_json(arg);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Validation(format!("cannot read Robin symbol file {arg}: {e}")))?;
    RobinSymbol::from_json(&text)
}

fn parse_list(arg: &str, what: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Validation(format!("{what}: cannot parse {s:?} as a number"))))
        .collect()
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() { Ok(()) } else { Err(Error::Validation(format!("{name} must be positive, got {x}"))) }
}

fn mode_range(nmin: i64, nmax: i64) -> Result<()> {
    if nmin <= nmax { Ok(()) } else { Err(Error::Validation(format!("empty mode range {nmin}..{nmax}"))) }
}

/// Runs one parsed command and returns its output without writing anything.
pub fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Spectrum { b, tau, nmin, nmax, window } => {
            positive("b", *b)?;
            mode_range(*nmin, *nmax)?;
            let tau = parse_symbol(tau)?;
            let w = parse_list(window, "window")?;
            let [lo, hi] = w[..] else {
                return Err(Error::Validation("window must be lo,hi".into()));
            };
            let window = SpectrumWindow::new(lo, hi)?;
            let per_mode: Vec<Vec<f64>> = (*nmin..=*nmax)
                .into_par_iter()
                .map(|n| disc::mode_eigenvalues(&ModeProblem::new(n, *b, tau.value(n))?, &window))
                .collect::<Result<_>>()?;
            let rows = (*nmin..=*nmax)
                .zip(per_mode)
                .flat_map(|(n, ev)| ev.into_iter().enumerate().map(move |(k, l)| vec![Cell::Int(n), Cell::Int(k as i64), Cell::Real(l)]))
                .collect();
            Ok(Output::table(Table { columns: vec!["n", "index", "lambda"], rows }))
        }
        Command::Flow { b, tau, mu, gamma, t_start, path, n_max } => {
            let path: RobinPath = serde_json::from_str(path).map_err(|e| Error::Validation(format!("bad path: {e}")))?;
            let linear = !matches!(path, RobinPath::Sampled { .. });
            let q = FlowQuery { b: *b, tau: parse_symbol(tau)?, mu: *mu, path, t_start: *t_start, gamma: *gamma, n_max: *n_max };
            let flow = if linear { rf::flow_shift(&q)? } else { rf::flow_general(&q)? };
            let rows = flow.crossings.iter().map(|c| vec![Cell::Int(c.n), Cell::Real(c.t_star), Cell::Int(c.sign.into())]).collect();
            Ok(Output {
                table: Table { columns: vec!["n", "t_star", "sign"], rows },
                sidecar: Some(json!({ "sf": flow.sf })),
                json: Some(serde_json::to_value(&flow).expect("flow results serialize")),
                status: 0,
            })
        }
        Command::Weyl { b, tau, mu, gammas, speed } => {
            let gammas = parse_list(gammas, "gammas")?;
            let fit = rf::weyl_fit(*b, &parse_symbol(tau)?, *mu, *speed, &gammas)?;
            let rows = fit
                .gammas
                .iter()
                .zip(&fit.flows)
                .map(|(&g, &sf)| vec![Cell::Real(g), Cell::Int(sf), Cell::Real(fit.slope * g + fit.intercept)])
                .collect();
            Ok(Output {
                table: Table { columns: vec!["gamma", "sf", "fitted"], rows },
                sidecar: Some(json!({ "slope": fit.slope, "intercept": fit.intercept, "predicted_slope": fit.predicted_slope })),
                json: Some(serde_json::to_value(&fit).expect("fits serialize")),
                status: 0,
            })
        }
        Command::Mult { b, tau, q, nmin, nmax } => {
            positive("b", *b)?;
            mode_range(*nmin, *nmax)?;
            let m = disc::landau_multiplicity(*q, *b, &parse_symbol(tau)?, *nmin, *nmax)?;
            let rows = m
                .robin_values
                .iter()
                .map(|&(n, t)| vec![Cell::Int(n), Cell::Real(t.unwrap_or(f64::NAN)), Cell::Int(m.modes.contains(&n).into())])
                .collect();
            Ok(Output {
                table: Table { columns: vec!["n", "robin_value", "eigen"], rows },
                sidecar: Some(json!({ "multiplicity": m.modes.len() })),
                json: None,
                status: 0,
            })
        }
        Command::Kernel { b, d, mu, mu_im, x, y } => {
            let p = KernelParams::new(*b, *d, Complex64::new(*mu, *mu_im))?;
            let (x, y) = (parse_list(x, "x")?, parse_list(y, "y")?);
            if x.len() != 2 * d || y.len() != 2 * d {
                return Err(Error::Validation(format!("points need {} coordinates", 2 * d)));
            }
            let e = kernel::eval_e(&p, &x, &y)?;
            Ok(Output::table(Table { columns: vec!["re", "im"], rows: vec![vec![Cell::Real(e.re), Cell::Real(e.im)]] }))
        }
        Command::Boundary { b, mu, tau, nmin, nmax, route } => {
            positive("b", *b)?;
            mode_range(*nmin, *nmax)?;
            let tau = parse_symbol(tau)?;
            let modes: Vec<(i64, Complex64, Complex64)> = match route {
                Route::Kernel => {
                    let m = boundary::boundary_modes_kernel(*mu, *b, *nmin, *nmax)?;
                    debug_assert_eq!(m.method, BoundaryMethod::KernelRestriction);
                    (*nmin..=*nmax).map(|n| (n, m.a_n[&n], m.b_n[&n])).collect()
                }
                Route::Pv => (*nmin..=*nmax)
                    .into_par_iter()
                    .map(|n| boundary::boundary_modes_pv(*mu, *b, n).map(|p| (n, p.a_n, p.b_n)))
                    .collect::<Result<_>>()?,
            };
            let rows = modes
                .into_iter()
                .map(|(n, a, bn)| {
                    let g = 2.0 * (bn - 0.5 + a * tau.value(n));
                    vec![Cell::Int(n), Cell::Real(a.re), Cell::Real(a.im), Cell::Real(bn.re), Cell::Real(bn.im), Cell::Real(g.re), Cell::Real(g.im)]
                })
                .collect();
            Ok(Output::table(Table { columns: vec!["n", "a_re", "a_im", "b_re", "b_im", "gamma_re", "gamma_im"], rows }))
        }
        Command::Selftest => {
            let results = acceptance::run_all();
            let rows = results.iter().map(|r| vec![Cell::Int(r.id.into()), Cell::Int(r.passed.into())]).collect();
            for r in &results {
                eprintln!("{r}");
            }
            let status = if results.iter().all(|r| r.passed) { 0 } else { 1 };
            Ok(Output {
                table: Table { columns: vec!["criterion", "passed"], rows },
                sidecar: None,
                json: Some(serde_json::to_value(&results).expect("results serialize")),
                status,
            })
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn emit(cli: &Cli, output: &Output) -> std::io::Result<()> {
    let body = match cli.format {
        Format::Csv => {
            let stamp = (!cli.no_header).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
            output.table.to_csv(stamp.as_deref())
        }
        Format::Json => {
            let mut v = output.json.clone().unwrap_or_else(|| output.table.to_json());
            if let (Some(Value::Object(side)), Value::Array(_)) = (&output.sidecar, &v) {
                let mut obj = side.clone();
                obj.insert("rows".into(), v);
                v = Value::Object(obj);
            }
            serde_json::to_string_pretty(&v).expect("values serialize") + "\n"
        }
    };
    let sidecar = output.sidecar.as_ref().filter(|_| cli.format == Format::Csv).map(|v| v.to_string() + "\n");
    match &cli.out {
        Some(path) => {
            std::fs::write(path, body)?;
            if let Some(s) = sidecar {
                std::fs::write(sidecar_path(path), s)?;
            }
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            if let Some(s) = sidecar {
                std::io::stderr().write_all(s.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("ROBINFLOW_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    match execute(&cli.command) {
        Ok(output) => match emit(&cli, &output) {
            Ok(()) => output.status,
            Err(e) => {
                eprintln!("robinflow: cannot write output: {e}");
                3
            }
        },
        Err(e) => {
            eprintln!("robinflow: {e}");
            e.exit_code()
        }
    }
}
