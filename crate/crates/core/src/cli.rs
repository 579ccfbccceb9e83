//! The `wracah` command line.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure,
//! 2 on a usage error (bad flag, unparsable half-integer, `j = 0`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{build_quon_reps, verify_quon_relations};
use crate::polar::{
    build_j, default_s_samples, ur_eigenbasis, verify_su2, verify_ur_basis, verify_w_infinity, UrParams,
};
use crate::qarith::{Amplitude, HalfInt, ToleranceRule};
use crate::report::{format_complex, format_real, serialize_real, JsonComplex, VerificationReport};
use crate::sphere::{y_r_eigenfunction, SphericalPoint};
use crate::sweep::{run_sweep, SweepTolerances};
use crate::wigner::triangle;
use crate::wra::{cg_ur, fbar_symbol, verify_fbar_orthogonality, wigner_eckart_check, TensorComponents};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "wracah", version, about = "su(2) from quon pairs, the {J², U_r} basis and its coupling symbols")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Uniform tolerance overriding every default.
    #[arg(long, global = true, env = "WRACAH_TOL")]
    pub tol: Option<f64>,
    /// Perturbs one quon operator before `report` runs; exercises the failure path.
    #[arg(long, global = true, hide = true)]
    pub inject_fault: Option<u64>,
}

fn half(s: &str) -> std::result::Result<HalfInt, String> {
    let h: HalfInt = s.parse().map_err(|e: Error| e.to_string())?;
    if h.is_negative() {
        return Err(format!("{s} is negative"));
    }
    Ok(h)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quon relations on the k²-dimensional Fock space.
    QuonCheck {
        #[arg(long)]
        k: u32,
    },
    /// Polar decomposition, su(2) relations and cyclicity of U_r.
    Su2Check {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// The U_r eigenbasis for one j.
    Basis {
        #[arg(long, value_parser = half)]
        j: HalfInt,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Coupling coefficients (j1 j2 α1 α2 | j α; r).
    CgUr {
        #[arg(long, value_parser = half)]
        j1: HalfInt,
        #[arg(long, value_parser = half)]
        j2: HalfInt,
        #[arg(long, value_parser = half)]
        j: HalfInt,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        s1: Option<i64>,
        #[arg(long)]
        s2: Option<i64>,
        #[arg(long)]
        s: Option<i64>,
    },
    /// The symmetric f̄_r symbols of one triad.
    Fbar {
        #[arg(long, value_parser = half)]
        j1: HalfInt,
        #[arg(long, value_parser = half)]
        j2: HalfInt,
        #[arg(long, value_parser = half)]
        j3: HalfInt,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        s1: Option<i64>,
        #[arg(long)]
        s2: Option<i64>,
        #[arg(long)]
        s3: Option<i64>,
    },
    /// Both orthogonality relations of f̄_r.
    Ortho {
        #[arg(long, value_parser = half)]
        j1: HalfInt,
        #[arg(long, value_parser = half)]
        j2: HalfInt,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Wigner–Eckart factorization for a tensor of rank 0, 1 or 2 built from J.
    WeCheck {
        #[arg(long, value_parser = half)]
        j: HalfInt,
        #[arg(long)]
        rank: u32,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// W∞ commutators of the clock–shift products.
    Winf {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        max_index: i32,
    },
    /// One U_r eigenfunction on the sphere.
    Yr {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        s: i64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        phi: f64,
    },
    /// Every verification suite.
    Report {
        #[arg(long, value_parser = half, default_value = "2")]
        max_j: HalfInt,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

/// Result of one command: rendered text and whether every check passed.
struct Outcome {
    body: String,
    pass: bool,
}

#[derive(Serialize)]
struct SymbolRecord {
    j1: String,
    j2: String,
    j3: String,
    #[serde(serialize_with = "serialize_real")]
    alpha1: f64,
    #[serde(serialize_with = "serialize_real")]
    alpha2: f64,
    #[serde(serialize_with = "serialize_real")]
    alpha3: f64,
    #[serde(serialize_with = "serialize_real")]
    r: f64,
    #[serde(serialize_with = "serialize_real")]
    re: f64,
    #[serde(serialize_with = "serialize_real")]
    im: f64,
}

fn alpha(j: HalfInt, s: i64, r: f64) -> f64 {
    -j.value() * r + s as f64
}

fn record(j: [HalfInt; 3], s: [i64; 3], r: f64, v: Amplitude) -> SymbolRecord {
    SymbolRecord {
        j1: j[0].to_string(),
        j2: j[1].to_string(),
        j3: j[2].to_string(),
        alpha1: alpha(j[0], s[0], r),
        alpha2: alpha(j[1], s[1], r),
        alpha3: alpha(j[2], s[2], r),
        r,
        re: v.re,
        im: v.im,
    }
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("serializable output")
}

fn render_records(records: &[SymbolRecord], format: Format) -> String {
    match format {
        Format::Json => to_json(&records),
        Format::Csv | Format::Text => {
            let sep = if format == Format::Csv { "," } else { " " };
            let mut out = ["j1", "j2", "j3", "alpha1", "alpha2", "alpha3", "r", "value"].join(sep);
            out.push('\n');
            for x in records {
                let row = [
                    x.j1.clone(),
                    x.j2.clone(),
                    x.j3.clone(),
                    format_real(x.alpha1),
                    format_real(x.alpha2),
                    format_real(x.alpha3),
                    format_real(x.r),
                    format_complex(Amplitude::new(x.re, x.im)),
                ];
                out.push_str(&row.join(sep));
                out.push('\n');
            }
            out
        }
    }
}

fn render_reports(reports: &[VerificationReport], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => reports[0].to_json(),
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut out = String::from("suite,k,r,name,residual,tol,pass\n");
            for rep in reports {
                for c in &rep.checks {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        rep.suite,
                        rep.k.map(|k| k.to_string()).unwrap_or_default(),
                        rep.r.map(format_real).unwrap_or_default(),
                        c.name,
                        format_real(c.residual),
                        format_real(c.tol),
                        c.pass
                    );
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for rep in reports {
                let _ = write!(out, "{}", rep.suite);
                if let Some(k) = rep.k {
                    let _ = write!(out, " k={k}");
                }
                if let Some(r) = rep.r {
                    let _ = write!(out, " r={r}");
                }
                out.push('\n');
                for c in &rep.checks {
                    let verdict = if c.pass { "PASS" } else { "FAIL" };
                    let _ = writeln!(out, "  {verdict} {} residual={:e} tol={:e}", c.name, c.residual, c.tol);
                }
            }
            out
        }
    }
}

fn reports_outcome(reports: Vec<VerificationReport>, format: Format) -> Outcome {
    Outcome { pass: reports.iter().all(VerificationReport::passed), body: render_reports(&reports, format) }
}

fn tolerance(cfg_tol: Option<f64>, fallback: ToleranceRule) -> Result<ToleranceRule> {
    cfg_tol.map_or(Ok(fallback), ToleranceRule::uniform)
}

fn nonzero_j(j: HalfInt) -> Result<HalfInt> {
    if j.twice() == 0 {
        Err(Error::UnsupportedLimit)
    } else {
        Ok(j)
    }
}

fn s_range(j: HalfInt, fixed: Option<i64>) -> Vec<i64> {
    fixed.map_or_else(|| (0..=i64::from(j.twice())).collect(), |s| vec![s])
}

fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let fmt = cfg.format;
    match cfg.command {
        Command::QuonCheck { k } => {
            let ops = build_quon_reps(k)?;
            let tol = tolerance(cfg.tol, ToleranceRule::for_order(k))?;
            Ok(reports_outcome(vec![verify_quon_relations(&ops, tol)], fmt))
        }
        Command::Su2Check { k, r } => {
            let p = UrParams::new(k, r)?;
            let tol = tolerance(cfg.tol, ToleranceRule::for_order(k))?;
            let mut samples = default_s_samples(&p);
            samples.push(StdRng::seed_from_u64(cfg.seed).gen_range(0.0..4.0));
            Ok(reports_outcome(vec![verify_su2(&p, tol, &samples)?], fmt))
        }
        Command::Basis { j, r } => {
            let j = nonzero_j(j)?;
            let basis = ur_eigenbasis(j, r)?;
            let k = j.twice() as u32 + 1;
            let tol = tolerance(cfg.tol, ToleranceRule::for_order(k))?;
            let rep = verify_ur_basis(&UrParams::new(k, r)?, tol)?;
            let body = match fmt {
                Format::Json => format!("{{\"basis\":{},\"report\":{}}}", basis.to_json(), rep.to_json()),
                Format::Csv | Format::Text => {
                    let sep = if fmt == Format::Csv { "," } else { " " };
                    let mut out = ["m", "s", "alpha", "amplitude"].join(sep);
                    out.push('\n');
                    for (row, m) in j.projections().enumerate() {
                        for s in 0..basis.dim() {
                            let _ = writeln!(
                                out,
                                "{m}{sep}{s}{sep}{}{sep}{}",
                                format_real(basis.alphas[s]),
                                format_complex(basis.transform[(row, s)])
                            );
                        }
                    }
                    out
                }
            };
            Ok(Outcome { body, pass: rep.passed() })
        }
        Command::CgUr { j1, j2, j, r, s1, s2, s } => {
            let mut records = Vec::new();
            if triangle(j1, j2, j) {
                for a in s_range(j1, s1) {
                    for b in s_range(j2, s2) {
                        for c in s_range(j, s) {
                            records.push(record([j1, j2, j], [a, b, c], r, cg_ur(j1, j2, a, b, j, c, r)?));
                        }
                    }
                }
            }
            Ok(Outcome { body: render_records(&records, fmt), pass: true })
        }
        Command::Fbar { j1, j2, j3, r, s1, s2, s3 } => {
            let mut records = Vec::new();
            for a in s_range(j1, s1) {
                for b in s_range(j2, s2) {
                    for c in s_range(j3, s3) {
                        records.push(record([j1, j2, j3], [a, b, c], r, fbar_symbol(j1, j2, j3, a, b, c, r)?));
                    }
                }
            }
            Ok(Outcome { body: render_records(&records, fmt), pass: true })
        }
        Command::Ortho { j1, j2, r } => {
            let tol = cfg.tol.unwrap_or(1e-10);
            Ok(reports_outcome(vec![verify_fbar_orthogonality(j1, j2, r, tol)?], fmt))
        }
        Command::WeCheck { j, rank, r } => {
            let j = nonzero_j(j)?;
            let tol = cfg.tol.unwrap_or(1e-10);
            let t = match rank {
                0 => TensorComponents::scalar_identity(j)?,
                1 | 2 => {
                    let ops = build_j(&UrParams::new(j.twice() as u32 + 1, r)?)?;
                    if rank == 1 {
                        TensorComponents::vector_from_polar(&ops)?
                    } else {
                        TensorComponents::quadrupole_from_polar(&ops)?
                    }
                }
                _ => return Err(Error::InvalidArgument(format!("rank {rank}: only 0, 1 and 2 are built from J"))),
            };
            let we = wigner_eckart_check(&t, j, j, r, tol)?;
            let mut rep = VerificationReport::new("wigner_eckart", Some(j.twice() as u32 + 1), Some(r));
            rep.check("relative_spread", we.relative_spread, tol);
            rep.check("max_residual", we.max_residual, tol * we.reduced.re.hypot(we.reduced.im).max(1.0));
            let body = match fmt {
                Format::Json => {
                    format!(
                        "{{\"reduced\":{},\"admissible\":{},\"report\":{}}}",
                        to_json(&we.reduced),
                        we.admissible,
                        rep.to_json()
                    )
                }
                _ => {
                    let reduced = Amplitude::new(we.reduced.re, we.reduced.im);
                    format!("reduced {}\n{}", format_complex(reduced), render_reports(std::slice::from_ref(&rep), fmt))
                }
            };
            Ok(Outcome { body, pass: rep.passed() })
        }
        Command::Winf { k, r, max_index } => {
            let p = UrParams::new(k, r)?;
            let tol = tolerance(cfg.tol, ToleranceRule::for_order(k))?;
            let range = -max_index.abs()..=max_index.abs();
            Ok(reports_outcome(vec![verify_w_infinity(&p, range, tol)?], fmt))
        }
        Command::Yr { l, s, r, theta, phi } => {
            let v = y_r_eigenfunction(l, s, r, SphericalPoint::new(theta, phi)?)?;
            #[derive(Serialize)]
            struct YrRecord {
                l: u32,
                s: i64,
                #[serde(serialize_with = "serialize_real")]
                alpha: f64,
                #[serde(serialize_with = "serialize_real")]
                r: f64,
                #[serde(serialize_with = "serialize_real")]
                theta: f64,
                #[serde(serialize_with = "serialize_real")]
                phi: f64,
                value: JsonComplex,
            }
            let rec = YrRecord { l, s, alpha: -f64::from(l) * r + s as f64, r, theta, phi, value: v.into() };
            let body = match fmt {
                Format::Json => to_json(&rec),
                Format::Csv => format!(
                    "theta,phi,re,im\n{},{},{},{}\n",
                    format_real(theta),
                    format_real(phi),
                    format_real(v.re),
                    format_real(v.im)
                ),
                Format::Text => format!("y_r[l={l}, s={s}](θ={theta}, φ={phi}) = {}\n", format_complex(v)),
            };
            Ok(Outcome { body, pass: true })
        }
        Command::Report { max_j, r } => {
            let max_j = nonzero_j(max_j)?;
            let tol = cfg.tol.map_or_else(SweepTolerances::default, SweepTolerances::uniform);
            let sweep = run_sweep(max_j, r, tol, cfg.inject_fault)?;
            let body = match fmt {
                Format::Json => sweep.to_json(),
                _ => render_reports(&sweep.suites, fmt),
            };
            Ok(Outcome { body, pass: sweep.pass })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut body = outcome.body;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, body.as_bytes()),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
