//! Command-line driver. Every subcommand builds a [`Report`]; the exit code is 0 on
//! success or pass, 2 for usage and input errors, 3 for a failed verification and
//! 4 for a solver failure.

use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::jetalg::{rat, ri, DiffPoly, EpsSeries};
use crate::p1sector::{self, Insertions, Series};
use crate::quasitriv::{self, QuasiMap};
use crate::report::Report;
use crate::{gwzero, kdvloop, psdo, wktau};

#[derive(Parser, Debug)]
#[command(name = "tophier", version, about = "Exact computations for hierarchies of topological type")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Add the elapsed time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// KdV: Lax flows, loop equation, quasitriviality.
    #[command(subcommand)]
    Kdv(Kdv),
    /// Witten-Kontsevich potentials and intersection numbers.
    #[command(subcommand)]
    Wk(Wk),
    /// Degree-zero Gromov-Witten theory of a variety.
    #[command(subcommand)]
    Gw0(Gw0),
    /// The P^1 example.
    #[command(subcommand)]
    P1(P1),
}

#[derive(Subcommand, Debug)]
enum Kdv {
    /// The t_i flow from the Lax representation.
    Lax {
        #[arg(long)]
        flow: u32,
        #[arg(long, default_value_t = 4)]
        eps: u32,
    },
    /// Genus corrections from the loop equation.
    Loop {
        #[arg(long)]
        genus: u32,
    },
    /// Transformed dispersionless flow against the Lax flow.
    Quasitriv {
        #[arg(long)]
        flow: u32,
        #[arg(long, default_value_t = 4)]
        eps: u32,
    },
    /// Transformed Poisson pencil.
    Bracket {
        #[arg(long, default_value_t = 4)]
        eps: u32,
    },
    /// Tau-structure density h_i.
    Densities {
        #[arg(long)]
        index: i32,
        #[arg(long, default_value_t = 2)]
        eps: u32,
    },
}

#[derive(Subcommand, Debug)]
enum Wk {
    /// Topological solution v(t).
    Vtop {
        #[arg(long)]
        deg: u32,
    },
    /// Genus-zero potential.
    F0 {
        #[arg(long)]
        deg: u32,
    },
    /// Genus-one potential.
    F1 {
        #[arg(long)]
        deg: u32,
    },
    /// One intersection number.
    Intersect {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        spec: Vec<u32>,
        /// Insert lambda_1 or lambda_2 (genus 2 only).
        #[arg(long)]
        lambda: Option<u8>,
    },
    /// Virasoro residuals of the genus expansion.
    Virasoro {
        #[arg(long)]
        m_max: i32,
        #[arg(long)]
        deg: u32,
        #[arg(long, default_value_t = 2)]
        eps: u32,
    },
}

#[derive(Subcommand, Debug)]
enum Gw0 {
    /// Certificate for one transformed flow.
    Flow {
        #[arg(long)]
        variety: String,
        /// 1-based basis index.
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        allow_low_dim: bool,
    },
    /// Transformed bihamiltonian structure.
    Brackets {
        #[arg(long)]
        variety: String,
        #[arg(long)]
        allow_low_dim: bool,
    },
    /// Chern number constraint.
    Chern {
        #[arg(long)]
        variety: String,
    },
    /// Genus-one potential and its corrections.
    Genus1 {
        #[arg(long)]
        variety: String,
        /// Degree of the expansion along the topological solution.
        #[arg(long, default_value_t = 3)]
        deg: u32,
    },
}

#[derive(Subcommand, Debug)]
enum P1 {
    /// Horizontal sections theta_{alpha,p}.
    Theta {
        #[arg(long)]
        p_max: u32,
    },
    /// Genus-one potential from the loop equation.
    Genus1,
    /// Genus-two degree-zero numbers against the lambda classes.
    Lambda {
        #[arg(long)]
        deg: u32,
    },
    /// Polynomiality of an eps^2 flow, e.g. `s0` or `t1`.
    PolyProbe {
        #[arg(long)]
        flow: String,
    },
}

/// Exit code with the text to print on stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `argv` (without the program name) and run one command.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("tophier".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let report = report_for(&cli, &args);
    let stdout = if cli.json { report.to_json() } else { report.to_text() };
    Outcome { code: report.exit_code(), stdout, stderr: String::new() }
}

/// Parse and execute, returning the report for programmatic use.
pub fn report(argv: &[&str]) -> std::result::Result<Report, String> {
    let args: Vec<String> = argv.iter().map(|s| s.to_string()).collect();
    let cli = Cli::try_parse_from(std::iter::once("tophier").chain(argv.iter().copied())).map_err(|e| e.to_string())?;
    Ok(report_for(&cli, &args))
}

fn report_for(cli: &Cli, args: &[String]) -> Report {
    let echo: Vec<&str> = args.iter().map(String::as_str).filter(|a| *a != "--json" && *a != "--timing").collect();
    let mut r = Report::new(&format!("tophier {}", echo.join(" ")));
    let start = Instant::now();
    if let Err(e) = dispatch(&cli.cmd, &mut r) {
        r.fail_with(&e);
    }
    if cli.timing {
        r.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    r
}

fn dispatch(cmd: &Cmd, r: &mut Report) -> Result<()> {
    match cmd {
        Cmd::Kdv(k) => kdv(k, r),
        Cmd::Wk(w) => wk(w, r),
        Cmd::Gw0(g) => gw0(g, r),
        Cmd::P1(p) => p1(p, r),
    }
}

fn even_eps(e: u32) -> Result<()> {
    if e % 2 != 0 || e == 0 {
        return Err(Error::Precondition(format!("--eps {e} must be a positive even order")));
    }
    Ok(())
}

fn kdv_map(e: u32) -> Result<(EpsSeries, QuasiMap)> {
    even_eps(e)?;
    let df = EpsSeries::from_coeffs(kdvloop::solve_through(e / 2)?, e);
    let map = QuasiMap::kdv(&df, e)?;
    Ok((df, map))
}

fn kdv(cmd: &Kdv, r: &mut Report) -> Result<()> {
    match *cmd {
        Kdv::Lax { flow, eps } => {
            r.input("flow", flow).input("eps", eps);
            r.expr("rhs", &psdo::kdv_rhs(flow, eps)?);
        }
        Kdv::Loop { genus } => {
            r.input("genus", genus);
            if genus == 0 {
                return Err(Error::Precondition("--genus must be at least 1".into()));
            }
            let fs = kdvloop::solve_through(genus)?;
            for (g, f) in (1..).zip(&fs) {
                r.expr(&format!("F_{g}"), f);
            }
            for (g, f) in (1..).zip(&fs) {
                if let Some(want) = kdvloop::genus_display(g) {
                    r.check(&format!("F_{g} closed form"), f == &want, None);
                }
            }
        }
        Kdv::Quasitriv { flow, eps } => {
            r.input("flow", flow).input("eps", eps);
            let (_, map) = kdv_map(eps)?;
            let t = quasitriv::transform_flow(&[quasitriv::kdv_dispersionless(flow)], &map)?;
            let lax = psdo::kdv_rhs(flow, eps)?;
            r.expr("transformed", &t[0]).expr("lax", &lax);
            r.check("transformed = lax", t[0].equiv(&lax), None);
        }
        Kdv::Bracket { eps } => {
            r.input("eps", eps);
            let (_, map) = kdv_map(eps)?;
            let (p1, p2) = quasitriv::kdv_brackets(eps);
            let q1 = quasitriv::transform_bracket(&p1, &map)?;
            let q2 = quasitriv::transform_bracket(&p2, &map)?;
            let want = quasitriv::DiffOperator::from_polys(&[(1, DiffPoly::jet(0, 0)), (0, DiffPoly::jet(0, 1).scale(&rat(1, 2)))], eps)
                .plus(&quasitriv::DiffOperator::term(
                    3,
                    EpsSeries::from_coeffs(vec![DiffPoly::zero(), DiffPoly::constant(rat(1, 8))], eps),
                ));
            r.expr("P1", &q1.entry(0, 0)).expr("P2", &q2.entry(0, 0));
            r.check("P1 unchanged", q1.equiv(&p1), None);
            r.check(
                "P2 = u delta' + u_x/2 delta + eps^2/8 delta'''",
                q2.entry(0, 0).equiv(&want),
                None,
            );
            r.check("skew", q1.is_skew() && q2.is_skew(), None);
        }
        Kdv::Densities { index, eps } => {
            r.input("index", index).input("eps", eps);
            let (df, map) = kdv_map(eps)?;
            let h = quasitriv::tau_density(index, &df, &map)?;
            r.expr("h", &h);
            if index >= 0 {
                r.check("eps^2 closed form", h.coeff(1) == &quasitriv::density_eps2_display(index), None);
            }
        }
    }
    Ok(())
}

fn wk(cmd: &Wk, r: &mut Report) -> Result<()> {
    match cmd {
        Wk::Vtop { deg } => {
            r.input("deg", *deg);
            let v = wktau::vtop(*deg);
            r.expr("vtop", &v);
            r.check("fixed point = closed form", v == wktau::vtop_closed_form(*deg), None);
        }
        Wk::F0 { deg } => {
            r.input("deg", *deg);
            r.expr("F_0", &wktau::f0(*deg));
        }
        Wk::F1 { deg } => {
            r.input("deg", *deg);
            r.expr("F_1", &wktau::f1(*deg));
        }
        Wk::Intersect { genus, spec, lambda } => {
            r.input("genus", *genus).input("spec", spec.clone());
            let value = match lambda {
                None => wktau::intersect(*genus, spec)?,
                Some(l) => {
                    r.input("lambda", *l);
                    if *genus != 2 {
                        return Err(Error::Precondition("--lambda needs --genus 2".into()));
                    }
                    let which = match l {
                        1 => wktau::Lambda::One,
                        2 => wktau::Lambda::Two,
                        _ => return Err(Error::Precondition(format!("--lambda {l} is not 1 or 2"))),
                    };
                    wktau::genus2_lambda(spec, which)?
                }
            };
            r.expr("value", &value);
        }
        Wk::Virasoro { m_max, deg, eps } => {
            r.input("m_max", *m_max).input("deg", *deg).input("eps", *eps);
            let rep = wktau::virasoro_check(*m_max, *deg, *eps)?;
            let mut bad = Vec::new();
            for row in &rep.rows {
                for (mono, c) in &row.nonzero {
                    bad.push(format!("m = {}, eps^{}: {c} {mono}", row.m, row.eps));
                }
            }
            r.result("rows", rep.rows.len());
            r.result("nonzero", bad.clone());
            r.check("residuals vanish", rep.passed(), bad.first().cloned());
        }
    }
    Ok(())
}

fn gw0(cmd: &Gw0, r: &mut Report) -> Result<()> {
    match cmd {
        Gw0::Flow { variety, alpha, p, allow_low_dim } => {
            r.input("variety", variety.as_str()).input("alpha", *alpha).input("p", *p);
            let ring = gwzero::load_variety(variety)?;
            let cert = gwzero::htt0_flow(&ring, *alpha, *p, *allow_low_dim)?;
            let text = |s: &[EpsSeries]| s.iter().map(ToString::to_string).collect::<Vec<_>>();
            r.result("computed", text(&cert.computed)).result("expected", text(&cert.expected));
            r.check("eps^0 and eps^2 match", cert.matches, None);
            r.check("higher orders vanish", cert.higher_vanish, None);
        }
        Gw0::Brackets { variety, allow_low_dim } => {
            r.input("variety", variety.as_str());
            let ring = gwzero::load_variety(variety)?;
            let rep = gwzero::deg0_brackets(&ring, *allow_low_dim)?;
            r.expr("P1", &rep.after.0).expr("P2", &rep.after.1);
            r.expr("{u_1, u_1}_2", &rep.scalar.computed);
            r.expr("eps^2 coefficient", &rep.scalar.eps2_coeff);
            r.check("P1 closed form", rep.first_mismatch.is_none(), rep.first_mismatch.clone());
            r.check("P2 closed form", rep.second_mismatch.is_none(), rep.second_mismatch.clone());
            r.check("skew", rep.skew, None);
            r.check("{u_1, u_1}_2 closed form", rep.scalar.pass, None);
        }
        Gw0::Chern { variety } => {
            r.input("variety", variety.as_str());
            let ring = gwzero::load_variety(variety)?;
            let c = gwzero::chern_check(&ring);
            r.expr("lhs", &c.lhs).expr("rhs", &c.rhs).expr("rhs - lhs", &(&c.rhs - &c.lhs));
            r.check("chern constraint", c.pass, None);
        }
        Gw0::Genus1 { variety, deg } => {
            r.input("variety", variety.as_str()).input("deg", *deg);
            let ring = gwzero::load_variety(variety)?;
            let f1 = gwzero::deg0_genus1(&ring)?;
            let corr = gwzero::corrections(&ring, &f1)?;
            r.expr("F_1", &f1);
            r.result("corrections", corr.iter().map(ToString::to_string).collect::<Vec<_>>());
            r.expr("F_1 at the topological solution", &gwzero::f1_series(&ring, *deg)?);
            let vector = gwzero::vector_corrections(&ring)?;
            r.check("scalar and vector forms agree", corr == vector, None);
        }
    }
    Ok(())
}

fn p1(cmd: &P1, r: &mut Report) -> Result<()> {
    match cmd {
        P1::Theta { p_max } => {
            r.input("p_max", *p_max);
            for alpha in 1..=2 {
                let th = p1sector::theta_series(alpha, *p_max)?;
                let lines: Vec<String> = th.iter().enumerate().map(|(p, t)| format!("p = {p}: {t}")).collect();
                r.result(&format!("theta_{alpha}"), lines);
            }
            let defects = p1sector::horizontality_defects(*p_max);
            r.check("horizontal", defects.is_empty(), defects.first().cloned());
        }
        P1::Genus1 => {
            let s = p1sector::genus1_solve()?;
            r.expr("F_1", &s.f1).expr("denominator", &s.denominator);
            r.check("gradient closed", s.closed, None);
            r.check("F_1 closed form", s.f1 == p1sector::f1_display(), None);
        }
        P1::Lambda { deg } => {
            r.input("deg", *deg);
            let rep = p1sector::lambda_consistency(*deg)?;
            let count = |k| rep.rows.iter().filter(|x| x.kind == k).count();
            r.result("rows", rep.rows.len())
                .result("all-one rows", count(Insertions::AllOne))
                .result("one-omega rows", count(Insertions::OneOmega))
                .result("vanishing rows", count(Insertions::Many));
            let find = |kind, spec: &[u32]| rep.rows.iter().find(|x| x.kind == kind && x.spec == spec).map(|x| x.computed.clone());
            let psi3 = find(Insertions::AllOne, &[3]).map(|c| c / ri(-2));
            let psi2 = find(Insertions::OneOmega, &[2]);
            if let Some(v) = &psi3 {
                r.expr("int psi^3 lambda_1", v);
            }
            if let Some(v) = &psi2 {
                r.expr("int psi^2 lambda_2", v);
            }
            let failed = rep.rows.iter().find(|x| !x.pass).map(|x| format!("{:?} {:?}: {} vs {}", x.kind, x.spec, x.computed, x.expected));
            r.check("u vanishes at s = 0", rep.u_vanishes_at_s0, None);
            r.check("every row matches", failed.is_none(), failed);
            if *deg >= 3 {
                r.check("int psi^3 lambda_1 = 1/480", psi3 == Some(rat(1, 480)), None);
                r.check("int psi^2 lambda_2 = 7/5760", psi2 == Some(rat(7, 5760)), None);
            }
            let fx = p1sector::f2_fixture()?;
            if !fx.agrees {
                r.finding(format!(
                    "the q -> 0 limit of the full genus-two potential differs from its degree-zero part by {}",
                    fx.difference
                ));
            }
        }
        P1::PolyProbe { flow } => {
            r.input("flow", flow.as_str());
            let (series, k) = parse_flow(flow)?;
            let rep = p1sector::poly_probe(series, k)?;
            r.result("raw", rep.raw.iter().map(ToString::to_string).collect::<Vec<_>>());
            let reduced: Vec<String> =
                rep.reduced.iter().map(|x| x.as_ref().map_or("(denominator left)".to_string(), ToString::to_string)).collect();
            r.result("reduced", reduced);
            r.result("raw has denominator", rep.raw_has_denominator);
            r.check("polynomial", rep.pass(), rep.check().err().map(|e| e.to_string()));
        }
    }
    Ok(())
}

fn parse_flow(s: &str) -> Result<(Series, u32)> {
    let bad = || Error::Precondition(format!("flow {s:?} is not t<k> or s<k>"));
    let (head, tail) = s.split_at_checked(1).ok_or_else(bad)?;
    let series: Series = head.parse().map_err(|_| bad())?;
    let k = tail.parse().map_err(|_| bad())?;
    Ok((series, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chern_codes() {
        let o = run(["gw0", "chern", "--variety", "pn:4"]);
        assert_eq!(o.code, 0, "{}", o.stdout);
        assert!(o.stdout.contains("lhs: 50\nrhs: 50\n"));
        let o = run(["gw0", "chern", "--variety", "k3"]);
        assert_eq!(o.code, 3);
        assert!(o.stdout.contains("lhs: 0\nrhs: -12\n"));
    }

    #[test]
    fn intersect_with_lambda() {
        let o = run(["wk", "intersect", "--genus", "2", "--spec", "3", "--lambda", "1"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("value: 1/480\n"));
        let o = run(["wk", "intersect", "--genus", "1", "--spec", "1", "--lambda", "1"]);
        assert_eq!(o.code, 2);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["kdv", "lax"]).code, 2);
        assert_eq!(run(["nope"]).code, 2);
        assert_eq!(run(["gw0", "chern", "--variety", "pn:x"]).code, 2);
        assert_eq!(run(["p1", "poly-probe", "--flow", "x1"]).code, 2);
        assert_eq!(run(["gw0", "flow", "--variety", "pn:2", "--alpha", "1", "--p", "1"]).code, 2);
        assert_eq!(run(["--help"]).code, 0);
    }

    #[test]
    fn json_is_deterministic() {
        let a = run(["--json", "kdv", "lax", "--flow", "1", "--eps", "2"]);
        let b = run(["kdv", "lax", "--flow", "1", "--eps", "2", "--json"]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        let v: serde_json::Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["command"], "tophier kdv lax --flow 1 --eps 2");
    }

    #[test]
    fn verdicts_follow_certificates() {
        let o = run(["gw0", "flow", "--variety", "pn:4", "--alpha", "2", "--p", "2"]);
        assert_eq!(o.code, 0, "{}", o.stdout);
        assert!(o.stdout.ends_with("verdict: pass\n"));
        let o = run(["p1", "poly-probe", "--flow", "s0"]);
        assert_eq!(o.code, 0, "{}", o.stdout);
        let o = run(["kdv", "quasitriv", "--flow", "1", "--eps", "2"]);
        assert_eq!(o.code, 0, "{}", o.stdout);
    }
}
