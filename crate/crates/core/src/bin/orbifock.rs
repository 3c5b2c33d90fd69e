//! Command-line front end: exact tables, identity suites, and coinvariant
//! dimension computations, with machine-readable output.
//!
//! Exit status: 0 when every requested check passes, 1 when a verification
//! check fails or tables mismatch, 2 on usage or configuration errors.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orbifock::blocks;
use orbifock::cover::{self, ModuleSpec};
use orbifock::fock;
use orbifock::rat::Rat;
use orbifock::series;
use orbifock::verify::{self, SuiteOptions};
use orbifock::Error;

#[derive(Parser)]
#[command(name = "orbifock", version, about = "exact twisted-module workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct CommonOpts {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Upper bound on worker threads during assembly. The engines run on a
    /// single thread; values above 1 are accepted and capped.
    #[arg(long, default_value = "1")]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion coefficients of the quadratic correction operator.
    Delta {
        /// Total-degree bound of the table.
        #[arg(long)]
        order: u32,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a named identity suite and report per-check witnesses.
    Verify {
        /// One of: commutator, ta-lemma, transform, primary, orbit, parity.
        suite: String,
        /// Degree bound for states (true units).
        #[arg(long, default_value = "4")]
        deg: i64,
        /// Bound on twisted mode indices, an exact rational like `7/2`.
        #[arg(long, default_value = "7/2", allow_hyphen_values = true)]
        modes: String,
        /// Truncation order of coordinate changes (top `z`-exponent).
        #[arg(long, default_value = "6")]
        order: i64,
        /// Degree bound of the evaluation slice (true units).
        #[arg(long, default_value = "4")]
        slice: i64,
        /// Pole bound for function bases.
        #[arg(long, default_value = "7")]
        pole_bound: u32,
        /// Coordinate-change coefficients on exponents 1/2, 3/2, ... as a
        /// comma-separated list of exact rationals, e.g. `1,0,1`.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Coinvariant dimension tables for a cover configuration.
    Blocks {
        /// Path to a JSON configuration, or `-` for stdin.
        #[arg(long, conflicts_with = "inline")]
        config: Option<String>,
        /// Inline JSON configuration.
        #[arg(long)]
        inline: Option<String>,
        /// Also insert a vacuum module at this unramified point and require
        /// the table to be unchanged.
        #[arg(long, allow_hyphen_values = true)]
        vacuum_point: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Arithmetic on the textual series format.
    Series {
        /// One of: add, mul, derivative, residue, compose.
        op: String,
        a: String,
        b: Option<String>,
    },
    /// Mode matrices of a field on a basis slice, as exact rationals.
    Field {
        /// State of the vertex algebra, e.g. `b(-1)|0>`.
        #[arg(long)]
        state: String,
        /// Module sector: `tw` or a rational weight for the untwisted module.
        #[arg(long, default_value = "tw", allow_hyphen_values = true)]
        sector: String,
        /// Exponent window `lo,hi` in exact rationals.
        #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
        window: String,
        /// Degree bound of the basis slice (true units).
        #[arg(long, default_value = "2")]
        deg: i64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

fn manifest(command: &str, params: serde_json::Value, fmt: Format) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "params": params,
        "format": match fmt { Format::Json => "json", Format::Tsv => "tsv" },
        "deterministic": true,
    })
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Delta { order, common } => {
            let table = series::delta_coefficients(order);
            match common.format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = table
                        .iter()
                        .map(|(m, n, c)| {
                            serde_json::json!({"m": m, "n": n, "value": c.to_string()})
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::json!({
                            "manifest": manifest(
                                "delta",
                                serde_json::json!({"order": order}),
                                common.format
                            ),
                            "order": order,
                            "coefficients": rows,
                        })
                    );
                }
                Format::Tsv => {
                    println!("m\tn\tvalue");
                    for (m, n, c) in table.iter() {
                        println!("{}\t{}\t{}", m, n, c);
                    }
                }
            }
            Ok(true)
        }
        Command::Verify {
            suite,
            deg,
            modes,
            order,
            slice,
            pole_bound,
            rho,
            common,
        } => {
            let mut opts = SuiteOptions {
                deg,
                modes: modes.parse()?,
                order,
                slice,
                pole_bound,
                ..SuiteOptions::default()
            };
            if let Some(rho) = rho {
                opts.rho = rho
                    .split(',')
                    .map(|c| c.trim().parse())
                    .collect::<Result<Vec<Rat>, _>>()?;
            }
            let report = verify::run_suite(&suite, &opts)?;
            match common.format {
                Format::Json => {
                    let mut doc =
                        serde_json::to_value(&report).expect("report serializes");
                    doc["manifest"] =
                        manifest("verify", report_params(&report), common.format);
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("doc serializes")
                    );
                }
                Format::Tsv => {
                    println!("check\tok\twitness");
                    for c in &report.checks {
                        println!(
                            "{}\t{}\t{}",
                            c.name,
                            c.ok,
                            c.witness.as_deref().unwrap_or("")
                        );
                    }
                }
            }
            Ok(report.ok)
        }
        Command::Blocks {
            config,
            inline,
            vacuum_point,
            common,
        } => {
            let text = match (config, inline) {
                (Some(path), None) if path == "-" => {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    buf
                }
                (Some(path), None) => std::fs::read_to_string(&path)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {}", path, e)))?,
                (None, Some(text)) => text,
                _ => {
                    return Err(Error::InvalidConfig(
                        "pass exactly one of --config or --inline".into(),
                    ))
                }
            };
            let cfg = cover::parse_config(&text)?;
            let affine = cfg.insertions.iter().any(|i| {
                matches!(
                    i.module,
                    ModuleSpec::AffineVacuum { .. } | ModuleSpec::AffineTwisted { .. }
                )
            });
            let table = if affine {
                orbifock::affine::affine_coinvariant_dims(&cfg)?
            } else {
                blocks::coinvariant_dims(&cfg)?
            };
            let mut ok = true;
            let vacuum = match vacuum_point {
                None => None,
                Some(sv) => {
                    let s: Rat = sv.parse()?;
                    let (base, ext) = if affine {
                        orbifock::affine::affine_vacuum_propagation(&cfg, &s)?
                    } else {
                        blocks::vacuum_propagation_check(&cfg, &s)?
                    };
                    ok = base.dims == ext.dims;
                    Some((s, ext))
                }
            };
            match common.format {
                Format::Json => {
                    let cfg_echo: serde_json::Value =
                        serde_json::from_str(&text).unwrap_or(serde_json::Value::Null);
                    let mut doc = serde_json::json!({
                        "manifest": manifest("blocks", cfg_echo, common.format),
                        "dims": table.dims.iter().map(|(d, n)| {
                            serde_json::json!({"degree": d, "dim": n})
                        }).collect::<Vec<_>>(),
                        "pole_bound": table.pole_bound,
                        "stabilized": table.stabilized,
                    });
                    if let Some((s, ext)) = &vacuum {
                        doc["vacuum_point"] = serde_json::json!(s.to_string());
                        doc["vacuum_invariant"] = serde_json::json!(ok);
                        doc["extended_dims"] = serde_json::json!(ext
                            .dims
                            .iter()
                            .map(|(d, n)| serde_json::json!({"degree": d, "dim": n}))
                            .collect::<Vec<_>>());
                    }
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("table serializes")
                    );
                }
                Format::Tsv => {
                    println!("degree\tdim");
                    for (d, n) in &table.dims {
                        println!("{}\t{}", d, n);
                    }
                    println!(
                        "# pole_bound={} stabilized={}",
                        table.pole_bound, table.stabilized
                    );
                    if let Some((s, _)) = &vacuum {
                        println!("# vacuum_point={} invariant={}", s, ok);
                    }
                }
            }
            Ok(ok)
        }
        Command::Series { op, a, b } => {
            let x = series::parse_series(&a)?;
            let need_b = |b: &Option<String>| -> Result<series::ScalarSeries, Error> {
                series::parse_series(
                    b.as_deref()
                        .ok_or_else(|| Error::Parse(format!("`{}` needs two operands", op)))?,
                )
            };
            match op.as_str() {
                "add" => {
                    let y = need_b(&b)?;
                    let (x, y) = common_ram(x, y)?;
                    println!("{}", x.add(&y)?);
                }
                "mul" => {
                    let y = need_b(&b)?;
                    let (x, y) = common_ram(x, y)?;
                    println!("{}", x.mul(&y)?);
                }
                "derivative" => println!("{}", x.derivative()),
                "residue" => println!("{}", x.residue()?),
                "compose" => {
                    let y = need_b(&b)?;
                    println!("{}", series::compose(&x, &y)?);
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unknown series op `{}`; expected add, mul, derivative, residue, compose",
                        other
                    )))
                }
            }
            Ok(true)
        }
        Command::Field {
            state,
            sector,
            window,
            deg,
            common,
        } => {
            let st = fock::parse_fock(&state)?;
            let sec = match sector.as_str() {
                "tw" | "twisted" => fock::Sector::Twisted,
                s => fock::Sector::Untwisted { lambda: s.parse()? },
            };
            let (lo_s, hi_s) = window
                .split_once(',')
                .ok_or_else(|| Error::Parse("window must be `lo,hi`".into()))?;
            let lo: Rat = lo_s.parse()?;
            let hi: Rat = hi_s.parse()?;
            let to_half = |r: &Rat| {
                (r * &Rat::from(2))
                    .to_i64()
                    .ok_or_else(|| Error::Parse(format!("exponent {} is not half-integral", r)))
            };
            let engine = orbifock::field::FieldEngine::new();
            let basis = fock::basis_up_to(&sec, 2 * deg);
            let mut per_exp = Vec::new();
            let (lo, hi) = (to_half(&lo)?, to_half(&hi)?);
            for e in lo..=hi {
                let mut matrix = Vec::new();
                for mono in &basis {
                    let v = fock::FockVector::from_monomial(sec.clone(), mono.clone(), Rat::one());
                    let img = engine.field_coeff(&st, &sec, e, &v)?;
                    let row: Vec<serde_json::Value> = basis
                        .iter()
                        .map(|m2| {
                            let c = img.coeff(m2);
                            let big = c.to_big();
                            serde_json::json!([big.numer().to_string(), big.denom().to_string()])
                        })
                        .collect();
                    matrix.push(row);
                }
                per_exp.push(serde_json::json!({
                    "exponent": Rat::new(e, 2).to_string(),
                    "matrix": matrix,
                }));
            }
            match common.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "state": st.to_string(),
                        "basis": basis
                            .iter()
                            .map(|m| fock::format_monomial(&sec, m))
                            .collect::<Vec<_>>(),
                        "coefficients": per_exp,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("doc serializes")
                    );
                }
                Format::Tsv => {
                    return Err(Error::Parse(
                        "field matrices are only emitted as JSON".into(),
                    ))
                }
            }
            Ok(true)
        }
    }
}

fn report_params(report: &orbifock::verify::SuiteReport) -> serde_json::Value {
    serde_json::json!({"suite": report.suite, "options": report.params})
}

fn common_ram(
    a: series::ScalarSeries,
    b: series::ScalarSeries,
) -> Result<(series::ScalarSeries, series::ScalarSeries), Error> {
    let l = num_integer::lcm(a.ram() as i64, b.ram() as i64) as u32;
    Ok((a.convert_ram(l)?, b.convert_ram(l)?))
}
