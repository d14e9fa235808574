//! The `picard` command line.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 violated precondition,
//! 4 `verify` found a disagreement that is not on the allowlist.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::albert::{CharContext, SplitPolicy};
use crate::asymptotics;
use crate::catalog::{Catalog, CatalogMode};
use crate::decomp::Decomposition;
use crate::range::{self, rho_max};
use crate::verify::{self, DiffKind};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_DISCREPANCY: i32 = 4;

/// Largest dimension accepted by the enumerating subcommands.
pub const MAX_G: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "picard", version, about = "Attainable Picard numbers of abelian varieties")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Characteristic: `p` (generic positive), `0`, or a specific prime.
    #[arg(long = "char", global = true, default_value = "p")]
    characteristic: String,
    /// Whether p splits in the CM field of Type IV(1,n) algebras.
    #[arg(long, global = true, default_value_t = SplitPolicy::Unknown)]
    p_split: SplitPolicy,
    #[command(subcommand)]
    command: Command,
}

fn genus(s: &str) -> Result<u32, String> {
    let g: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=MAX_G).contains(&g) {
        Ok(g)
    } else {
        Err(format!("g must lie in 1..={MAX_G}"))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Picard number and invariants of a decomposition such as "ss^3 * cm^2 * ord".
    Rho { decomposition: String },
    /// Attainable Picard numbers in dimension g.
    Range {
        #[arg(value_parser = genus)]
        g: u32,
        #[arg(long, default_value = "paper")]
        mode: CatalogMode,
        /// JSON catalog file; overrides --mode.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Only decompositions without a supersingular factor.
        #[arg(long)]
        star: bool,
    },
    /// Certified, refuted or undetermined status of one value.
    Membership {
        rho: u64,
        #[arg(value_parser = genus)]
        g: u32,
    },
    /// Maximal runs of values excluded by the divisibility restrictions.
    Gaps {
        #[arg(value_parser = genus)]
        g: u32,
    },
    /// Largest Picard number for each length, with the closed form.
    MaxByLength {
        #[arg(value_parser = genus)]
        g: u32,
    },
    /// Explicit decomposition of dimension g with Picard number n.
    Witness {
        n: u64,
        #[arg(value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
        g: u32,
    },
    /// Every restriction-compatible decomposition with the given value.
    Structure {
        #[arg(value_parser = genus)]
        g: u32,
        rho: u64,
    },
    /// #R_g / (2g² − g) for g = 1..=g_max.
    Density {
        #[arg(value_parser = genus)]
        g_max: u32,
    },
    /// Distribution of large Picard numbers and the supersingularity index.
    Distribution {
        #[arg(value_parser = genus)]
        g: u32,
        ell: u32,
    },
    /// Recursive description of R_g compared with the enumeration.
    Conjecture {
        #[arg(value_parser = genus)]
        g: u32,
    },
    /// Pairs from R_a and R_b whose sum is not in R_{a+b}.
    Nonadditivity {
        #[arg(value_parser = genus)]
        g: u32,
    },
    /// Dimensions of moduli loci.
    Moduli {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=1_000_000))]
        g: u32,
        #[arg(long, default_value_t = 0)]
        f: u32,
        #[arg(long, default_value_t = 0)]
        r: u32,
    },
    /// Compare computed ranges with the bundled printed tables.
    Verify {
        /// Fixture file (default: $PICARD_FIXTURES, then the bundled data).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        allowlist: Option<PathBuf>,
        /// Count allowlisted disagreements as failures too.
        #[arg(long)]
        strict: bool,
    },
}

enum Failure {
    Usage(String),
    Precondition(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn precondition(e: impl std::fmt::Display) -> Failure {
    Failure::Precondition(e.to_string())
}

/// Tabular output shared by the three formats.
struct Output {
    summary: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: Value,
}

impl Output {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
            }
            Format::Md => {
                let mut s = String::new();
                for line in &self.summary {
                    s.push_str(line);
                    s.push('\n');
                }
                if !self.rows.is_empty() {
                    if !self.summary.is_empty() {
                        s.push('\n');
                    }
                    s.push_str(&md_row(self.columns.iter().map(|c| c.to_string())));
                    s.push_str(&md_row(self.columns.iter().map(|_| "---".to_string())));
                    for r in &self.rows {
                        s.push_str(&md_row(r.iter().cloned()));
                    }
                }
                s
            }
        }
    }
}

fn md_row(cells: impl Iterator<Item = String>) -> String {
    let cells: Vec<String> = cells.map(|c| c.replace('|', "\\|")).collect();
    format!("| {} |\n", cells.join(" | "))
}

fn joined(values: impl IntoIterator<Item = u64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn opt(w: Option<&Decomposition>) -> String {
    w.map(|d| d.to_string()).unwrap_or_default()
}

fn parse_char(s: &str, split: SplitPolicy) -> Result<CharContext, Failure> {
    match s {
        "p" => Ok(CharContext::positive(split)),
        "0" => Ok(CharContext::Zero),
        other => {
            let p: u64 = other
                .parse()
                .map_err(|_| usage(format!("--char expects p, 0 or a prime, got `{other}`")))?;
            CharContext::with_prime(p, split).map_err(usage)
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok((output, code)) => {
            let _ = out.write_all(output.render(cli.format).as_bytes());
            code
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Precondition(m)) => {
            let _ = writeln!(err, "precondition violated: {m}");
            EXIT_PRECONDITION
        }
    }
}

fn execute(cli: &Cli) -> Result<(Output, i32), Failure> {
    let ctx = parse_char(&cli.characteristic, cli.p_split)?;
    let out = match &cli.command {
        Command::Rho { decomposition } => rho_cmd(decomposition)?,
        Command::Range { g, mode, catalog, star } => {
            let cat = match catalog {
                Some(path) => Catalog::load(path, &ctx).map_err(usage)?,
                None => Catalog::builtin(*mode, *g, &ctx).map_err(usage)?,
            };
            range_cmd(*g, &cat, &ctx, *star)
        }
        Command::Membership { rho, g } => {
            let m = range::membership(*rho, *g, &ctx).map_err(precondition)?;
            Output {
                summary: vec![format!("{rho} in R_{g}: {}", m.label())],
                columns: vec!["rho", "g", "status", "witness"],
                rows: vec![vec![rho.to_string(), g.to_string(), m.label().into(), opt(m.witness())]],
                json: json!({
                    "rho": rho, "g": g, "char": ctx.label(),
                    "status": m.label(), "witness": m.witness().map(|w| w.to_string()),
                }),
            }
        }
        Command::Gaps { g } => {
            let gaps = range::gaps(*g, &ctx);
            Output {
                summary: vec![format!("gaps in [1, {}] for g = {g}", rho_max(*g))],
                columns: vec!["from", "to", "length"],
                rows: gaps
                    .iter()
                    .map(|(a, b)| vec![a.to_string(), b.to_string(), (b - a + 1).to_string()])
                    .collect(),
                json: json!({
                    "g": g, "char": ctx.label(),
                    "gaps": gaps.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                }),
            }
        }
        Command::MaxByLength { g } => {
            let all = range::max_by_length_all(*g, &ctx);
            let mismatches = all.iter().filter(|m| !m.matches()).count();
            Output {
                summary: vec![format!(
                    "maximum Picard number by length, g = {g}: {mismatches} mismatches"
                )],
                columns: vec!["r", "enumerated", "closed_form", "match"],
                rows: all
                    .iter()
                    .map(|m| {
                        vec![
                            m.r.to_string(),
                            m.enumerated.to_string(),
                            m.closed_form.to_string(),
                            m.matches().to_string(),
                        ]
                    })
                    .collect(),
                json: json!({ "g": g, "char": ctx.label(), "lengths": all }),
            }
        }
        Command::Witness { n, g } => {
            let w = asymptotics::completeness_witness(*n, *g).map_err(precondition)?;
            let bound = asymptotics::completeness_bound_holds(*n, *g);
            Output {
                summary: vec![w.to_string()],
                columns: vec!["n", "g", "witness", "rho", "dim", "bound_holds"],
                rows: vec![vec![
                    n.to_string(),
                    g.to_string(),
                    w.to_string(),
                    w.rho().to_string(),
                    w.dim().to_string(),
                    bound.to_string(),
                ]],
                json: json!({
                    "n": n, "g": g, "witness": w.to_string(),
                    "rho": w.rho(), "dim": w.dim(), "bound_holds": bound,
                }),
            }
        }
        Command::Structure { g, rho } => {
            let ws = range::structure_witnesses(*g, *rho, &ctx);
            Output {
                summary: vec![format!("{} decompositions of dimension {g} with rho = {rho}", ws.len())],
                columns: vec!["witness", "ss_index", "length"],
                rows: ws
                    .iter()
                    .map(|w| vec![w.to_string(), w.ss_index().to_string(), w.length().to_string()])
                    .collect(),
                json: json!({
                    "g": g, "rho": rho, "char": ctx.label(),
                    "witnesses": ws.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                }),
            }
        }
        Command::Density { g_max } => {
            let table = asymptotics::density_table(*g_max, &ctx);
            Output {
                summary: vec![],
                columns: vec!["g", "count", "bound", "delta"],
                rows: table
                    .iter()
                    .map(|d| {
                        vec![
                            d.g.to_string(),
                            d.count.to_string(),
                            d.bound.to_string(),
                            d.delta.to_string(),
                        ]
                    })
                    .collect(),
                json: json!({ "char": ctx.label(), "densities": table }),
            }
        }
        Command::Distribution { g, ell } => distribution_cmd(*g, *ell, &ctx)?,
        Command::Conjecture { g } => {
            let r = asymptotics::conjecture_check(*g, &ctx).map_err(precondition)?;
            Output {
                summary: vec![
                    format!("g = {g}: {}", if r.matches() { "match" } else { "differs" }),
                    format!("rhs: {}", joined(r.rhs.iter().copied())),
                ],
                columns: vec!["rho", "side"],
                rows: r
                    .lower_only
                    .iter()
                    .map(|v| vec![v.to_string(), "lower-only".into()])
                    .chain(r.rhs_only.iter().map(|v| vec![v.to_string(), "rhs-only".into()]))
                    .collect(),
                json: json!({ "char": ctx.label(), "matches": r.matches(), "report": r }),
            }
        }
        Command::Nonadditivity { g } => {
            let xs = asymptotics::nonadditivity_counterexamples(*g, &ctx).map_err(precondition)?;
            Output {
                summary: vec![format!("{} non-additive pairs for g = {g}", xs.len())],
                columns: vec!["a", "ra", "b", "rb", "sum"],
                rows: xs
                    .iter()
                    .map(|x| {
                        vec![
                            x.a.to_string(),
                            x.ra.to_string(),
                            x.b.to_string(),
                            x.rb.to_string(),
                            (x.ra + x.rb).to_string(),
                        ]
                    })
                    .collect(),
                json: json!({ "g": g, "char": ctx.label(), "pairs": xs }),
            }
        }
        Command::Moduli { g, f, r } => {
            let m = asymptotics::moduli_dims(*g, *f, *r).map_err(precondition)?;
            Output {
                summary: vec![],
                columns: vec!["g", "f", "r", "dim_ag", "dim_ss", "dim_vf", "dim_l"],
                rows: vec![vec![
                    g.to_string(),
                    f.to_string(),
                    r.to_string(),
                    m.dim_ag.to_string(),
                    m.dim_ss.to_string(),
                    m.dim_vf.to_string(),
                    m.dim_l.to_string(),
                ]],
                json: json!({ "g": g, "f": f, "r": r, "dims": m }),
            }
        }
        Command::Verify {
            fixtures,
            allowlist,
            strict,
        } => return verify_cmd(fixtures.as_deref(), allowlist.as_deref(), *strict, &ctx),
    };
    Ok((out, 0))
}

fn rho_cmd(text: &str) -> Result<Output, Failure> {
    let d = Decomposition::parse(text).map_err(usage)?;
    let (lo, hi) = d.p_rank_interval();
    let fields: Vec<(&'static str, String)> = vec![
        ("decomposition", d.to_string()),
        ("rho", d.rho().to_string()),
        ("dim", d.dim().to_string()),
        ("length", d.length().to_string()),
        ("ss_index", d.ss_index().to_string()),
        ("p_rank_min", lo.to_string()),
        ("p_rank_max", hi.to_string()),
        ("slope_half", d.slope_half_multiplicity().to_string()),
        ("endo_dim", d.endo_dim().to_string()),
        ("tate_obstruction", d.tate_obstruction().to_string()),
    ];
    Ok(Output {
        summary: vec![d.rho().to_string()],
        columns: fields.iter().map(|f| f.0).collect(),
        rows: vec![fields.iter().map(|f| f.1.clone()).collect()],
        json: json!({
            "decomposition": d.to_string(),
            "rho": d.rho(),
            "dim": d.dim(),
            "length": d.length(),
            "ss_index": d.ss_index(),
            "p_rank": [lo, hi],
            "slope_half": d.slope_half_multiplicity(),
            "endo_dim": d.endo_dim(),
            "tate_obstruction": d.tate_obstruction(),
        }),
    })
}

fn range_cmd(g: u32, cat: &Catalog, ctx: &CharContext, star: bool) -> Output {
    let r = range::attainable(g, cat, ctx, !star);
    let name = if star { format!("R_{g}^*") } else { format!("R_{g}") };
    Output {
        summary: vec![
            format!("{name} [{}, char {}]", r.mode, ctx.label()),
            joined(r.values.iter().map(|v| v.rho)),
        ],
        columns: vec!["rho", "status", "star", "witness"],
        rows: r
            .values
            .iter()
            .map(|v| {
                vec![
                    v.rho.to_string(),
                    v.status.to_string(),
                    v.star.to_string(),
                    opt(v.witness.as_ref()),
                ]
            })
            .collect(),
        json: json!({
            "g": g,
            "char": ctx.label(),
            "mode": r.mode.to_string(),
            "values": r.values.iter().map(|v| json!({
                "rho": v.rho,
                "status": v.status.to_string(),
                "star": v.star,
                "witness": v.witness.as_ref().map(|w| w.to_string()),
            })).collect::<Vec<_>>(),
        }),
    }
}

fn distribution_cmd(g: u32, ell: u32, ctx: &CharContext) -> Result<Output, Failure> {
    let dist = asymptotics::check_distribution(g, ell, ctx).map_err(precondition)?;
    let corr = asymptotics::check_ss_correspondence(g, ell, ctx).map_err(precondition)?;
    let mut rows = Vec::new();
    for v in &dist.unexplained {
        rows.push(vec![
            "distribution".into(),
            v.to_string(),
            "in R_g, outside every translate".into(),
            String::new(),
        ]);
    }
    for v in &dist.unattained {
        rows.push(vec![
            "distribution".into(),
            v.to_string(),
            "translate value not in R_g".into(),
            String::new(),
        ]);
    }
    for (a, b, common) in &dist.overlaps {
        for v in common {
            rows.push(vec![
                "distribution".into(),
                v.to_string(),
                format!("pieces {a} and {b} overlap"),
                String::new(),
            ]);
        }
    }
    for v in &corr.violations {
        rows.push(vec![
            "correspondence".into(),
            v.rho.to_string(),
            format!("n = {}, ss index {}", v.n, v.ss_index),
            v.witness.to_string(),
        ]);
    }
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    Ok(Output {
        summary: vec![
            format!("distribution g = {g}, ell = {ell}: {}", verdict(dist.passed())),
            format!("supersingularity index correspondence: {}", verdict(corr.passed())),
        ],
        columns: vec!["check", "rho", "issue", "witness"],
        rows,
        json: json!({
            "char": ctx.label(),
            "distribution": dist,
            "distribution_pass": dist.passed(),
            "correspondence": corr,
            "correspondence_pass": corr.passed(),
        }),
    })
}

fn verify_cmd(
    fixtures: Option<&std::path::Path>,
    allowlist: Option<&std::path::Path>,
    strict: bool,
    ctx: &CharContext,
) -> Result<(Output, i32), Failure> {
    let fixtures = verify::load_fixtures(fixtures).map_err(usage)?;
    let allow = verify::load_allowlist(allowlist).map_err(usage)?;
    let report = verify::verify(&fixtures, &allow, ctx);

    let mut rows = Vec::new();
    for f in &report.fixtures {
        let checks = [
            (DiffKind::Value, "values", Some(f.values_pass)),
            (DiffKind::Star, "star", f.star_pass),
        ];
        for (kind, name, pass) in checks {
            match pass {
                None => {}
                Some(true) => rows.push(vec![
                    f.label.clone(),
                    f.g.to_string(),
                    name.into(),
                    "PASS".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]),
                Some(false) => {
                    for d in f.diffs.iter().filter(|d| d.kind == kind) {
                        rows.push(vec![
                            f.label.clone(),
                            f.g.to_string(),
                            name.into(),
                            "DIFF".into(),
                            d.rho.to_string(),
                            d.computed.into(),
                            d.printed.into(),
                            opt(d.witness.as_ref()),
                            d.witness_checked.to_string(),
                            if d.allowlisted {
                                "erratum".into()
                            } else {
                                "unexpected".into()
                            },
                        ]);
                    }
                }
            }
        }
    }
    let failing = if strict { report.total() } else { report.unexpected() };
    let code = if failing > 0 { EXIT_DISCREPANCY } else { 0 };
    Ok((
        Output {
            summary: vec![format!(
                "{} fixtures, {} differences, {} not allowlisted",
                report.fixtures.len(),
                report.total(),
                report.unexpected()
            )],
            columns: vec![
                "fixture",
                "g",
                "check",
                "result",
                "rho",
                "computed",
                "printed",
                "witness",
                "witness_checked",
                "allowlist",
            ],
            rows,
            json: json!({
                "char": ctx.label(),
                "strict": strict,
                "differences": report.total(),
                "unexpected": report.unexpected(),
                "fixtures": report.fixtures,
            }),
        },
        code,
    ))
}
