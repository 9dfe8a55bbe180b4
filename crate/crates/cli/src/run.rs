use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hpbp::bp::{bp_apply_block, subordinated_apply, SubordinationRoute};
use hpbp::hp::{hp_apply_block, ApplyOptions};
use hpbp::linalg::io::{format_scalar, parse_matrix, parse_vector};
use hpbp::linalg::Generator;
use hpbp::symbols::{catalog_build, exp_tpsi, identity, neg_frac_power_bernstein, parse_symbol};
use hpbp::verify::{all_passed, report_csv, report_md, run_suites, Case, Status as CheckStatus, VerifyConfig};
use hpbp::{ApplyResult, CMat, CVec, Error, QuadratureSpec, Result, Symbol};

use crate::config::ConfigFile;
use crate::CommonArgs;

pub enum Status {
    Ok,
    VerificationFailed,
}

impl Status {
    pub fn code(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailed => 4,
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_non_convergent() => 2,
        Error::NonInjective | Error::Singular { .. } | Error::NotBoundedGenerator { .. } => 2,
        Error::OracleUnavailable(_) => 3,
        _ => 1,
    }
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub operator: Option<PathBuf>,
    pub vector: Option<PathBuf>,
    pub symbol: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub t: Option<f64>,
    pub suites: Vec<String>,
    pub seed: u64,
    pub trials: usize,
    pub dim: Option<usize>,
    pub spec: QuadratureSpec,
    pub out: PathBuf,
    pub require_oracle: bool,
    pub route: String,
}

pub fn resolve(a: CommonArgs) -> Result<RunConfig> {
    let file = match &a.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let path = |flag: Option<PathBuf>, key: &str| flag.or_else(|| file.get(key).map(PathBuf::from));
    let mut spec = QuadratureSpec::default();
    if let Some(v) = a.rel_tol.or(file.parsed("rel_tol")?) {
        spec.rel_tol = v;
    }
    if let Some(v) = a.abs_tol.or(file.parsed("abs_tol")?) {
        spec.abs_tol = v;
    }
    if let Some(v) = a.max_panels.or(file.parsed("max_panels")?) {
        spec.max_panels = v;
    }
    spec.validate()?;
    let suites = a
        .suites
        .or_else(|| file.get("suites").map(String::from))
        .map(|s| s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())
        .unwrap_or_default();
    let cfg = RunConfig {
        operator: path(a.operator, "operator"),
        vector: path(a.vector, "vector"),
        symbol: a.symbol.or_else(|| file.get("symbol").map(String::from)),
        alpha: a.alpha.or(file.parsed("alpha")?),
        beta: a.beta.or(file.parsed("beta")?),
        t: a.t.or(file.parsed("t")?),
        suites,
        seed: a.seed.or(file.parsed("seed")?).unwrap_or(0),
        trials: a.trials.or(file.parsed("trials")?).unwrap_or(3),
        dim: a.dim.or(file.parsed("dim")?),
        spec,
        out: path(a.out, "out").unwrap_or_else(|| PathBuf::from(".")),
        require_oracle: a.require_oracle || file.flag("require_oracle")?,
        route: a.route.or_else(|| file.get("route").map(String::from)).unwrap_or_else(|| "both".into()),
    };
    for p in [&cfg.operator, &cfg.vector].into_iter().flatten() {
        if !p.is_file() {
            return Err(Error::Io(format!("{}: no such file", p.display())));
        }
    }
    Ok(cfg)
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    fs::write(&p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn load_operator(cfg: &RunConfig) -> Result<Generator> {
    let p = cfg
        .operator
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--operator is required".into()))?;
    Generator::new(parse_matrix(&read(p)?)?)
}

/// The vector file as one column, or the identity.
fn load_block(cfg: &RunConfig, n: usize) -> Result<CMat> {
    match &cfg.vector {
        Some(p) => {
            let x = parse_vector(&read(p)?)?;
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() });
            }
            Ok(CMat::from_column_slice(n, 1, x.as_slice()))
        }
        None => Ok(CMat::identity(n, n)),
    }
}

/// Fills missing parameters of a bare symbol name from `--alpha/--beta/--t`.
fn build_symbol(cfg: &RunConfig) -> Result<Symbol> {
    let s = cfg
        .symbol
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--symbol is required".into()))?;
    if s.contains(':') {
        return parse_symbol(s);
    }
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Error::InvalidArgument(format!("'{s}' needs --{flag}")));
    match s {
        "frac_power" => catalog_build(s, &[need(cfg.alpha, "alpha")?]),
        "neg_frac_power_bernstein" => catalog_build(s, &[need(cfg.beta, "beta")?]),
        "exp_tpsi" => {
            let t = need(cfg.t, "t")?;
            let psi = match cfg.beta {
                Some(b) => neg_frac_power_bernstein(b)?,
                None => identity(),
            };
            exp_tpsi(t, &psi).map(Symbol::Laplace)
        }
        _ => catalog_build(s, &[]),
    }
}

fn result_csv(res: &ApplyResult) -> String {
    let mut s = String::from("column,row,value,error_estimate,t_star,panels,domain_verdict\n");
    for j in 0..res.value.ncols() {
        for i in 0..res.value.nrows() {
            let _ = writeln!(
                s,
                "{j},{i},{},{:.17e},{:.17e},{},{}",
                format_scalar(res.value[(i, j)]),
                res.error_estimate,
                res.t_star,
                res.panels_used,
                res.domain_verdict.as_str()
            );
        }
    }
    s
}

fn delta_csv(got: &CMat, want: &CMat) -> String {
    let mut s = String::from("column,oracle_delta,relative\n");
    for j in 0..got.ncols() {
        let d = (got.column(j) - want.column(j)).norm();
        let w = want.column(j).norm();
        let _ = writeln!(s, "{j},{d:.17e},{:.17e}", if w > 0.0 { d / w } else { d });
    }
    s
}

fn oracle_block<F: Fn(hpbp::C64) -> Option<hpbp::C64>>(gen: &Generator, f: F, x: &CMat) -> Result<CMat> {
    gen.spectral()
        .and_then(|sd| sd.apply_block(f, x))
        .map_err(|e| match e {
            Error::OracleUnavailable(_) => e,
            other => Error::OracleUnavailable(other.to_string()),
        })
}

fn emit_oracle(cfg: &RunConfig, got: &CMat, oracle: Result<CMat>) -> Result<()> {
    match oracle {
        Ok(w) => write(&cfg.out, "oracle_delta.csv", &delta_csv(got, &w)),
        Err(e) if cfg.require_oracle => Err(e),
        Err(e) => {
            eprintln!("note: {e}");
            Ok(())
        }
    }
}

pub fn cmd_apply(cfg: &RunConfig) -> Result<Status> {
    let gen = load_operator(cfg)?;
    let x = load_block(cfg, gen.dim())?;
    let sym = build_symbol(cfg)?;
    let res = match &sym {
        Symbol::Laplace(g) => hp_apply_block(g, &gen, &x, &cfg.spec, ApplyOptions::default())?,
        Symbol::Bernstein(p) => bp_apply_block(p, &gen, &x, &cfg.spec, ApplyOptions::default())?,
    };
    write(&cfg.out, "result.csv", &result_csv(&res))?;
    emit_oracle(cfg, &res.value, oracle_block(&gen, |s| sym.eval(s), &x))?;
    println!(
        "{}: error estimate {:.3e}, T* {:.3e}, {} panels, {}",
        sym.name(),
        res.error_estimate,
        res.t_star,
        res.panels_used,
        res.domain_verdict.as_str()
    );
    Ok(Status::Ok)
}

pub fn cmd_subordinate(cfg: &RunConfig) -> Result<Status> {
    let gen = load_operator(cfg)?;
    let x = load_block(cfg, gen.dim())?;
    let t = cfg.t.ok_or_else(|| Error::InvalidArgument("subordinate needs --t".into()))?;
    let psi = match (&cfg.symbol, cfg.beta) {
        (Some(s), _) => match if s.contains(':') { parse_symbol(s)? } else { build_symbol(cfg)? } {
            Symbol::Bernstein(p) => p,
            Symbol::Laplace(l) => {
                return Err(Error::InvalidArgument(format!("'{}' is not a Bernstein function", l.name)))
            }
        },
        (None, Some(b)) => neg_frac_power_bernstein(b)?,
        (None, None) => return Err(Error::InvalidArgument("subordinate needs --symbol or --beta".into())),
    };
    let routes: &[SubordinationRoute] = match cfg.route.as_str() {
        "direct" => &[SubordinationRoute::Direct],
        "subordination" => &[SubordinationRoute::Subordination],
        "both" => &[SubordinationRoute::Direct, SubordinationRoute::Subordination],
        r => return Err(Error::InvalidArgument(format!("unknown route '{r}'"))),
    };
    let mut cols: Vec<Vec<ApplyResult>> = vec![Vec::new(); routes.len()];
    for j in 0..x.ncols() {
        let xj: CVec = x.column(j).into_owned();
        for (k, &r) in routes.iter().enumerate() {
            cols[k].push(subordinated_apply(&psi, t, &gen, &xj, &cfg.spec, r)?);
        }
    }
    let join = |rs: &[ApplyResult]| -> ApplyResult {
        let mut value = CMat::zeros(x.nrows(), x.ncols());
        for (j, r) in rs.iter().enumerate() {
            value.set_column(j, &r.vector());
        }
        let refs: Vec<&ApplyResult> = rs.iter().collect();
        ApplyResult::merged(value, &refs)
    };
    let first = join(&cols[0]);
    write(&cfg.out, "result.csv", &result_csv(&first))?;
    if routes.len() == 2 {
        let second = join(&cols[1]);
        write(&cfg.out, "route_delta.csv", &delta_csv(&second.value, &first.value))?;
    }
    emit_oracle(cfg, &first.value, oracle_block(&gen, |s| psi.eval(s).map(|p| (p * t).exp()), &x))?;
    println!("e^(t {}) at t = {t}: error estimate {:.3e}", psi.name, first.error_estimate);
    Ok(Status::Ok)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Status> {
    if cfg.suites.is_empty() {
        return Err(Error::InvalidArgument("--suites is required".into()));
    }
    let mut vc = VerifyConfig {
        spec: cfg.spec.clone(),
        seed: cfg.seed,
        trials: cfg.trials,
        dim: cfg.dim,
        cases: Vec::new(),
    };
    if cfg.operator.is_some() {
        let gen = load_operator(cfg)?;
        let x = load_block(cfg, gen.dim())?;
        let name = cfg.operator.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        vc.cases = (0..x.ncols())
            .map(|j| Case {
                label: format!("{name} x{j}"),
                gen: gen.clone(),
                x: x.column(j).into_owned(),
            })
            .collect();
    }
    let rows = run_suites(&cfg.suites, &vc)?;
    write(&cfg.out, "report.csv", &report_csv(&rows))?;
    write(&cfg.out, "report.md", &report_md(&rows))?;
    let fails = rows.iter().filter(|a| a.status == CheckStatus::Fail).count();
    let skips = rows.iter().filter(|a| a.status == CheckStatus::Skip).count();
    println!("{} assertions, {fails} failed, {skips} skipped", rows.len());
    Ok(if all_passed(&rows) { Status::Ok } else { Status::VerificationFailed })
}
