//! Named verification suites producing per-assertion records.

use std::fmt::Write as _;

use crate::bp::{bp_apply, psi_tilde_apply};
use crate::ensemble::{contraction_member, dim_for_seed, stable_member};
use crate::error::{Error, Result};
use crate::hp::{
    alpha_limit_check, hp_apply, hp_apply_by_parts, inverse_via_integral, neg_frac_power_route, ApplyResult,
    NegPowerRoute,
};
use crate::linalg::Generator;
use crate::quadrature::QuadratureSpec;
use crate::rules::{
    compose_apply, log_inverse, multiply_apply, product_by_parts, product_distribution_closed,
    reciprocal_bernstein_inverse, LogRoute, ProductSymbol,
};
use crate::symbols::{
    exp_tpsi, frac_power, identity, inverse, log_shift, neg_frac_power_bernstein, recip_log, BernsteinSymbol,
    LaplaceSymbol,
};
use crate::{CVec, C64};

pub const SUITES: &[&str] = &[
    "eq1",
    "eq5",
    "eq7",
    "eq8",
    "thm3",
    "thm4",
    "cor9",
    "ex1",
    "ex2",
    "ex3",
    "ex4",
    "ex5",
    "remark1",
    "alpha-limit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the identity do not hold for this case.
    Skip,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Assertion {
    pub suite: String,
    pub case: String,
    pub check: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub status: Status,
    pub error_estimate: f64,
    pub t_star: f64,
    pub panels: usize,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub gen: Generator,
    pub x: CVec,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub spec: QuadratureSpec,
    pub seed: u64,
    pub trials: usize,
    pub dim: Option<usize>,
    /// Fixed cases replacing the random ensemble.
    pub cases: Vec<Case>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            spec: QuadratureSpec::default(),
            seed: 0,
            trials: 3,
            dim: None,
            cases: Vec::new(),
        }
    }
}

impl VerifyConfig {
    fn stable_cases(&self) -> Result<Vec<Case>> {
        if !self.cases.is_empty() {
            return Ok(self.cases.clone());
        }
        (0..self.trials as u64)
            .map(|k| {
                let s = self.seed.wrapping_add(k);
                let m = stable_member(s, self.dim.unwrap_or_else(|| dim_for_seed(s)))?;
                Ok(Case {
                    label: format!("stable seed {s} dim {}", m.gen.dim()),
                    gen: m.gen,
                    x: m.x,
                })
            })
            .collect()
    }

    fn contraction_cases(&self) -> Result<Vec<Case>> {
        if !self.cases.is_empty() {
            return Ok(self
                .cases
                .iter()
                .map(|c| {
                    let gen = if c.gen.is_contraction() && c.gen.decay().is_none() {
                        c.gen.clone().with_derived_decay(ALPHA_LIMIT_DELTA).unwrap_or_else(|_| c.gen.clone())
                    } else {
                        c.gen.clone()
                    };
                    Case {
                        label: c.label.clone(),
                        gen,
                        x: c.x.clone(),
                    }
                })
                .collect());
        }
        (0..self.trials as u64)
            .map(|k| {
                let s = self.seed.wrapping_add(k);
                let m = contraction_member(s, self.dim.unwrap_or_else(|| dim_for_seed(s)), ALPHA_LIMIT_DELTA)?;
                Ok(Case {
                    label: format!("contraction seed {s} dim {}", m.gen.dim()),
                    gen: m.gen,
                    x: m.x,
                })
            })
            .collect()
    }
}

/// Decay exponent given to contraction cases.
pub const ALPHA_LIMIT_DELTA: f64 = 0.9;
pub const ALPHA_SEQUENCE: [f64; 4] = [0.5, 0.25, 0.1, 0.05];

struct Recorder<'a> {
    suite: &'a str,
    out: Vec<Assertion>,
}

impl Recorder<'_> {
    fn push(&mut self, case: &str, check: &str, deviation: f64, tolerance: f64, diag: Option<&ApplyResult>) {
        let status = if deviation <= tolerance { Status::Pass } else { Status::Fail };
        self.out.push(Assertion {
            suite: self.suite.to_string(),
            case: case.to_string(),
            check: check.to_string(),
            deviation,
            tolerance,
            status,
            error_estimate: diag.map_or(0.0, |d| d.error_estimate),
            t_star: diag.map_or(0.0, |d| d.t_star),
            panels: diag.map_or(0, |d| d.panels_used),
            note: String::new(),
        });
    }

    /// Hypothesis failures become skips; anything else fails the check.
    fn error(&mut self, case: &str, check: &str, e: &Error) {
        let status = match e {
            Error::NonInjective | Error::ParameterRange(_) => Status::Skip,
            e if e.is_non_convergent() => Status::Skip,
            _ => Status::Fail,
        };
        self.out.push(Assertion {
            suite: self.suite.to_string(),
            case: case.to_string(),
            check: check.to_string(),
            deviation: f64::NAN,
            tolerance: f64::NAN,
            status,
            error_estimate: f64::NAN,
            t_star: f64::NAN,
            panels: 0,
            note: e.to_string(),
        });
    }

    fn oracle<F: Fn(C64) -> Option<C64>>(&mut self, c: &Case, check: &str, got: &ApplyResult, f: F, tol: f64) {
        let want = c.gen.spectral().and_then(|sd| sd.apply(f, &c.x));
        match want {
            Ok(w) => self.push(&c.label, check, (got.vector() - w).norm(), tol, Some(got)),
            Err(e) => {
                let mut rec = Assertion {
                    suite: self.suite.to_string(),
                    case: c.label.clone(),
                    check: check.to_string(),
                    deviation: f64::NAN,
                    tolerance: tol,
                    status: Status::Skip,
                    error_estimate: got.error_estimate,
                    t_star: got.t_star,
                    panels: got.panels_used,
                    note: String::new(),
                };
                rec.note = format!("oracle unavailable: {e}");
                self.out.push(rec);
            }
        }
    }
}

fn ln1m(l: C64) -> C64 {
    (C64::new(1.0, 0.0) - l).ln()
}

fn xnorm(x: &CVec) -> f64 {
    x.norm().max(f64::MIN_POSITIVE)
}

fn hp_symbols() -> Vec<LaplaceSymbol> {
    let half = neg_frac_power_bernstein(0.5).expect("catalog");
    vec![
        inverse(),
        frac_power(0.5).expect("catalog"),
        frac_power(1.5).expect("catalog"),
        recip_log(),
        exp_tpsi(1.0, &half).expect("catalog"),
        exp_tpsi(1.0, &identity()).expect("catalog"),
        exp_tpsi(0.7, &log_shift()).expect("catalog"),
    ]
}

fn bp_symbols() -> Vec<BernsteinSymbol> {
    let mut v: Vec<BernsteinSymbol> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&b| neg_frac_power_bernstein(b).expect("catalog"))
        .collect();
    v.push(log_shift());
    v
}

/// Runs one suite.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<Assertion>> {
    if !SUITES.contains(&name) {
        return Err(Error::InvalidArgument(format!(
            "unknown suite '{name}'; known: {}",
            SUITES.join(", ")
        )));
    }
    let spec = &cfg.spec;
    let mut r = Recorder {
        suite: name,
        out: Vec::new(),
    };
    let cases = if name == "alpha-limit" {
        cfg.contraction_cases()?
    } else if name == "eq7" {
        Vec::new()
    } else {
        cfg.stable_cases()?
    };
    match name {
        "eq1" => {
            for c in &cases {
                let ax = c.gen.apply(&c.x)?;
                for g in hp_symbols() {
                    let check = format!("A g(A)x = g(A)Ax [{}]", g.name);
                    let res = hp_apply(&g, &c.gen, &c.x, spec)
                        .and_then(|gx| Ok((hp_apply(&g, &c.gen, &ax, spec)?, gx)));
                    match res {
                        Ok((gax, gx)) => {
                            let d = (c.gen.matrix() * gx.vector() - gax.vector()).norm();
                            r.push(&c.label, &check, d, 1e-8 * xnorm(&c.x), Some(&gx));
                        }
                        Err(e) => r.error(&c.label, &check, &e),
                    }
                }
            }
        }
        "eq5" => {
            for c in &cases {
                for psi in bp_symbols() {
                    let check = format!("A psi~(A)x = psi(A)x [{}]", psi.name);
                    let res = psi_tilde_apply(&psi, &c.gen, &c.x, spec)
                        .and_then(|t| Ok((t, bp_apply(&psi, &c.gen, &c.x, spec)?)));
                    match res {
                        Ok((t, d)) => {
                            let dev = (c.gen.matrix() * t.vector() - d.vector()).norm();
                            r.push(&c.label, &check, dev, 1e-7 * (1.0 + c.x.norm()), Some(&t));
                        }
                        Err(e) => r.error(&c.label, &check, &e),
                    }
                }
            }
        }
        "eq7" => {
            for (alpha, beta) in [(0.7, 0.3), (0.9, 0.5)] {
                let label = format!("alpha {alpha} beta {beta}");
                let p = ProductSymbol::new(&frac_power(alpha)?, &neg_frac_power_bernstein(beta)?)?;
                for k in 0..10 {
                    let t = 10f64.powf(-3.0 + 4.5 * k as f64 / 9.0);
                    let want = product_distribution_closed(alpha, beta, t);
                    let check = format!("b({t:.4e})");
                    match p.b(t) {
                        Ok(b) => r.push(&label, &check, (b - want).abs() / want.abs(), 1e-7, None),
                        Err(e) => r.error(&label, &check, &e),
                    }
                }
                let b0 = p.b(1e-14)?;
                r.push(&label, "b(+0) = 0", b0.abs(), 1e-4, None);
            }
        }
        "eq8" => {
            for c in &cases {
                let mut gs = vec![frac_power(0.5)?, frac_power(1.5)?];
                gs.push(exp_tpsi(1.0, &neg_frac_power_bernstein(0.5)?)?);
                for g in gs {
                    let check = format!("by-parts route [{}]", g.name);
                    let res = hp_apply_by_parts(&g, &c.gen, &c.x, spec)
                        .and_then(|b| Ok((b, hp_apply(&g, &c.gen, &c.x, spec)?)));
                    match res {
                        Ok((b, d)) => r.push(&c.label, &check, (b.vector() - d.vector()).norm(), 1e-8 * xnorm(&c.x), Some(&b)),
                        Err(e) => r.error(&c.label, &check, &e),
                    }
                }
                let check = "product by-parts vs closed form [0.7, 0.3]";
                let p = ProductSymbol::new(&frac_power(0.7)?, &neg_frac_power_bernstein(0.3)?)?;
                let res = product_by_parts(&p, &c.gen, &c.x, spec).and_then(|b| Ok((b, p.apply(&c.gen, &c.x, spec)?)));
                match res {
                    Ok((b, d)) => r.push(&c.label, check, (b.vector() - d.vector()).norm(), 1e-6 * (1.0 + c.x.norm()), Some(&b)),
                    Err(e) => r.error(&c.label, check, &e),
                }
            }
        }
        "thm3" | "ex3" => {
            let pairs: &[(f64, f64)] = if name == "thm3" { &[(0.7, 0.3), (0.9, 0.5)] } else { &[(0.7, 0.3)] };
            for c in &cases {
                let tol = 1e-6 * (1.0 + c.x.norm());
                for &(alpha, beta) in pairs {
                    let tag = format!("[{alpha}, {beta}]");
                    match multiply_apply(&frac_power(alpha)?, &neg_frac_power_bernstein(beta)?, &c.gen, &c.x, spec) {
                        Ok(m) => {
                            if name == "thm3" {
                                let (a, b, d) = (m.h_direct.vector(), m.psi_after_g.vector(), m.g_after_psi.vector());
                                r.push(&c.label, &format!("h_direct vs psi(g) {tag}"), (&a - &b).norm(), tol, Some(&m.h_direct));
                                r.push(&c.label, &format!("psi(g) vs g(psi) {tag}"), (&b - &d).norm(), tol, Some(&m.psi_after_g));
                                r.push(&c.label, &format!("h_direct vs g(psi) {tag}"), (&a - &d).norm(), tol, Some(&m.g_after_psi));
                            }
                            r.oracle(c, &format!("h_direct vs oracle {tag}"), &m.h_direct, |l| Some(-(-l).powf(beta - alpha)), tol);
                        }
                        Err(e) => r.error(&c.label, &format!("product routes {tag}"), &e),
                    }
                }
                if name == "thm3" {
                    let check = "A g(A)x = h(A)x, psi = identity [frac_power 1.5]";
                    let g = frac_power(1.5)?;
                    match multiply_apply(&g, &identity(), &c.gen, &c.x, spec) {
                        Ok(m) => r.push(&c.label, check, m.spread(), tol, Some(&m.h_direct)),
                        Err(e) => r.error(&c.label, check, &e),
                    }
                }
            }
        }
        "thm4" | "ex5" => {
            let pairs: &[(f64, f64)] = if name == "thm4" { &[(0.5, 0.5), (0.8, 0.5)] } else { &[(0.5, 0.5)] };
            for c in &cases {
                let tol = 1e-6 * (1.0 + c.x.norm());
                for &(alpha, beta) in pairs {
                    let tag = format!("[{alpha}, {beta}]");
                    match compose_apply(&frac_power(alpha)?, &neg_frac_power_bernstein(beta)?, &c.gen, &c.x, spec) {
                        Ok(m) => {
                            if name == "thm4" {
                                let d = (m.outer_direct.vector() - m.nested.vector()).norm();
                                r.push(&c.label, &format!("outer_direct vs nested {tag}"), d, tol, Some(&m.nested));
                            }
                            r.oracle(c, &format!("outer_direct vs oracle {tag}"), &m.outer_direct, |l| Some((-l).powf(-alpha * beta)), tol);
                            r.oracle(c, &format!("nested vs oracle {tag}"), &m.nested, |l| Some((-l).powf(-alpha * beta)), tol);
                        }
                        Err(e) => r.error(&c.label, &format!("composition {tag}"), &e),
                    }
                }
            }
        }
        "cor9" => {
            for c in &cases {
                match reciprocal_bernstein_inverse(&log_shift(), &c.gen, &c.x, spec) {
                    Ok(m) => {
                        r.push(&c.label, "psi(A)(1/psi)(A)x = x [log_shift]", m.round_trip, 1e-6 * xnorm(&c.x), Some(&m.value));
                        r.oracle(c, "(1/psi)(A)x vs oracle", &m.value, |l| Some(-1.0 / ln1m(l)), 1e-6 * (1.0 + c.x.norm()));
                    }
                    Err(e) => r.error(&c.label, "reciprocal", &e),
                }
            }
        }
        "ex1" => {
            for c in &cases {
                match inverse_via_integral(&c.gen, &c.x, spec) {
                    Ok(m) => {
                        let d = (c.gen.matrix() * m.vector() - &c.x).norm();
                        r.push(&c.label, "A inverse(A)x = x", d, 1e-8 * xnorm(&c.x), Some(&m));
                    }
                    Err(e) => r.error(&c.label, "A inverse(A)x = x", &e),
                }
            }
        }
        "ex2" => {
            for c in &cases {
                for alpha in [0.3, 0.5, 0.8] {
                    let check = format!("gamma vs by-parts [alpha {alpha}]");
                    let res = neg_frac_power_route(&c.gen, alpha, &c.x, spec, NegPowerRoute::Gamma).and_then(|a| {
                        Ok((a, neg_frac_power_route(&c.gen, alpha, &c.x, spec, NegPowerRoute::ByParts)?))
                    });
                    match res {
                        Ok((a, b)) => {
                            r.push(&c.label, &check, (a.vector() - b.vector()).norm(), 1e-8 * xnorm(&c.x), Some(&a));
                            r.oracle(c, &format!("oracle [alpha {alpha}]"), &a, |l| Some((-l).powf(-alpha)), 1e-7 * xnorm(&c.x));
                        }
                        Err(e) => r.error(&c.label, &check, &e),
                    }
                }
            }
        }
        "ex4" | "remark1" => {
            for c in &cases {
                let tol = 1e-5 * (1.0 + c.x.norm());
                let route = if name == "ex4" { LogRoute::Volterra } else { LogRoute::Resolvent };
                match log_inverse(&c.gen, &c.x, spec, route) {
                    Ok(m) => {
                        r.oracle(c, "vs oracle 1/log(1-l)", &m, |l| Some(1.0 / ln1m(l)), tol);
                        if name == "ex4" {
                            let bound = c.gen.growth_m() * c.x.norm() / (1.0 - c.gen.growth_omega()).ln() + 1e-6;
                            r.push(&c.label, "norm bound M|x|/log(1-w)", m.vector().norm(), bound, Some(&m));
                        } else {
                            match log_inverse(&c.gen, &c.x, spec, LogRoute::Volterra) {
                                Ok(v) => r.push(&c.label, "resolvent vs volterra", (m.vector() - v.vector()).norm(), tol, Some(&m)),
                                Err(e) => r.error(&c.label, "resolvent vs volterra", &e),
                            }
                        }
                    }
                    Err(e) => r.error(&c.label, "log inverse", &e),
                }
            }
        }
        "alpha-limit" => {
            for c in &cases {
                match alpha_limit_check(&c.gen, &c.x, &ALPHA_SEQUENCE, spec) {
                    Ok(rows) => {
                        for w in rows.windows(2) {
                            let check = format!("deviation decreases {} -> {}", w[0].alpha, w[1].alpha);
                            r.push(&c.label, &check, w[1].deviation - w[0].deviation, 0.0, None);
                        }
                        for row in rows {
                            r.push(&c.label, &format!("explicit bound [alpha {}]", row.alpha), row.deviation, row.bound, None);
                        }
                    }
                    Err(e) => r.error(&c.label, "alpha limit", &e),
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(r.out)
}

pub fn run_suites(names: &[String], cfg: &VerifyConfig) -> Result<Vec<Assertion>> {
    for n in names {
        if !SUITES.contains(&n.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "unknown suite '{n}'; known: {}",
                SUITES.join(", ")
            )));
        }
    }
    let mut out = Vec::new();
    for n in names {
        out.extend(run_suite(n, cfg)?);
    }
    Ok(out)
}

pub fn all_passed(rows: &[Assertion]) -> bool {
    rows.iter().all(|a| a.status != Status::Fail)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn report_csv(rows: &[Assertion]) -> String {
    let mut s = String::from("suite,case,check,status,deviation,tolerance,error_estimate,t_star,panels,note\n");
    for a in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            csv_field(&a.suite),
            csv_field(&a.case),
            csv_field(&a.check),
            a.status.as_str(),
            a.deviation,
            a.tolerance,
            a.error_estimate,
            a.t_star,
            a.panels,
            csv_field(&a.note)
        );
    }
    s
}

pub fn report_md(rows: &[Assertion]) -> String {
    let count = |st: Status| rows.iter().filter(|a| a.status == st).count();
    let mut s = String::from("# Verification report\n\n");
    let _ = writeln!(
        s,
        "{} assertions: {} pass, {} fail, {} skip\n",
        rows.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skip)
    );
    s.push_str("| suite | case | check | status | deviation | tolerance | error est. | T* | panels | note |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for a in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.3e} | {:.3e} | {:.3e} | {:.3e} | {} | {} |",
            a.suite,
            a.case,
            a.check.replace('|', "/"),
            a.status.as_str(),
            a.deviation,
            a.tolerance,
            a.error_estimate,
            a.t_star,
            a.panels,
            a.note.replace('|', "/")
        );
    }
    s
}
