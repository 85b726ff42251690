//! `unfriendly`: exact laws, simulations, spectral data, constants and
//! verification suites for the unfriendly seating process.

mod verify;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use unfriendly_core::asymptotics::{factorial_error_csv, factorial_error_profile};
use unfriendly_core::series::{series_ga, series_gb, series_gx, series_gy, ZSeries};
use unfriendly_core::spectral::{self, branches, branches_csv, xn_at_minus_one, CutPolicy};
use unfriendly_core::{
    build_config, constants, counterexample_report, dominance, exact_distribution, fmt_rational, hardcore,
    simulate, verify_ladder, Error, ExactDistribution, Family, FamilyTag, MomentReport, PgfEngine, SeatGrid,
    SelectionMode,
};

#[derive(Parser, Debug)]
#[command(name = "unfriendly", version, about = "Exact and asymptotic analysis of unfriendly seating")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Oracle,
    Recurrence,
    Series,
    Spectral,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Mode {
    #[default]
    Uniform,
    Retry,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Cut {
    #[default]
    Upper,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Engines,
    Dominance,
    Hardcore,
    Constants,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact law of the number of seated diners.
    Dist {
        #[arg(long, value_parser = parse_family)]
        family: Option<FamilyTag>,
        #[arg(long)]
        n: Option<usize>,
        /// Two-line grid file over {'.', 'O'}; implies the oracle engine.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "recurrence")]
        engine: Engine,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exact moments, or the factorial-error profile with --nmax.
    Moments {
        #[arg(long, value_parser = parse_family, default_value = "X")]
        family: FamilyTag,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Monte Carlo runs of the seating process.
    Simulate {
        #[arg(long, value_parser = parse_family)]
        family: Option<FamilyTag>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Power-series coefficients (in z) of a family's generating function.
    Series {
        #[arg(long, value_parser = parse_family, default_value = "Y")]
        family: FamilyTag,
        /// Truncation order.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Poles and residues of G_Y, and the branch sum for X_n(t).
    Spectral {
        /// Complex t as "re,im".
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: Complex64,
        /// Branch range as "lo,hi" or "lo..hi".
        #[arg(long, value_parser = parse_range, default_value = "-10,10", allow_hyphen_values = true)]
        k_range: (i64, i64),
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "upper")]
        cut: Cut,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Closed-form constants to a certified number of digits.
    Constants {
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Runs an invariant suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Stochastic-dominance ladder and the small-grid counterexamples.
    Dominance {
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// The uniform (hard-core) model.
    Hardcore {
        #[arg(long, value_parser = parse_family, default_value = "Y")]
        family: FamilyTag,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        digits: u32,
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_family(s: &str) -> Result<FamilyTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| format!("expected lo,hi or lo..hi, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
    let (a, b) = (p(a)?, p(b)?);
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// Failures after argument parsing.
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Run = Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
    /// Output followed by a failing exit status.
    Failed(Value),
}

fn json_of<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
}

fn read_grid(path: &PathBuf) -> Result<SeatGrid, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(SeatGrid::parse(&text)?)
}

fn grid_or_family(grid: &Option<PathBuf>, family: Option<FamilyTag>, n: Option<usize>) -> Result<SeatGrid, Failure> {
    match grid {
        Some(p) => read_grid(p),
        None => Ok(build_config(Family::new(need(family, "family")?, need(n, "n")?))),
    }
}

fn law_csv(law: &ExactDistribution) -> String {
    let mut s = String::from("k,p\n");
    for (k, p) in law.pmf() {
        s.push_str(&format!("{k},{}\n", fmt_rational(p)));
    }
    s
}

fn series_for(tag: FamilyTag, order: usize) -> Result<ZSeries, Failure> {
    Ok(match tag {
        FamilyTag::A => series_ga(order),
        FamilyTag::B => series_gb(order),
        FamilyTag::Y => series_gy(order),
        FamilyTag::X => series_gx(order),
        FamilyTag::Z => return Err(Failure::Usage("no series route for the one-row family".into())),
    })
}

fn dist(
    family: Option<FamilyTag>,
    n: Option<usize>,
    grid: Option<PathBuf>,
    engine: Engine,
    format: Format,
) -> Run {
    let law = if let Some(p) = &grid {
        exact_distribution(&read_grid(p)?)?
    } else {
        let (tag, n) = (need(family, "family")?, need(n, "n")?);
        match engine {
            Engine::Oracle => exact_distribution(&build_config(Family::new(tag, n)))?,
            Engine::Recurrence => PgfEngine::new().distribution(tag, n),
            Engine::Series => ExactDistribution::from_pgf(series_for(tag, n)?.term(n)),
            Engine::Spectral => {
                return Err(Failure::Usage(
                    "the spectral engine gives values, not laws; use the spectral subcommand".into(),
                ))
            }
        }
    };
    Ok(match format {
        Format::Json => Output::Json(json_of(&law)),
        Format::Csv => Output::Text(law_csv(&law)),
    })
}

fn moments(family: FamilyTag, n: Option<usize>, nmax: Option<usize>, digits: u32, format: Format) -> Run {
    if let Some(nmax) = nmax {
        if family != FamilyTag::X {
            return Err(Failure::Usage("the factorial-error profile is for family X".into()));
        }
        let rows = factorial_error_profile(nmax, digits)?;
        return Ok(match format {
            Format::Json => Output::Json(json_of(&rows)),
            Format::Csv => Output::Text(factorial_error_csv(&rows)),
        });
    }
    let n = need(n, "n")?;
    let m: MomentReport = PgfEngine::new().moments(family, n);
    Ok(match format {
        Format::Json => Output::Json(json_of(&m)),
        Format::Csv => {
            let v = json_of(&m);
            let mut s = String::from("field,value\n");
            for key in ["n", "mean", "variance", "m3", "m4", "kappa3", "kappa4"] {
                let field = &v[key];
                s.push_str(&format!("{key},{}\n", field.as_str().map_or(field.to_string(), str::to_string)));
            }
            Output::Text(s)
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    family: Option<FamilyTag>,
    n: Option<usize>,
    grid: Option<PathBuf>,
    trials: usize,
    seed: u64,
    mode: Mode,
    format: Format,
) -> Run {
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let g = grid_or_family(&grid, family, n)?;
    let mode = match mode {
        Mode::Uniform => SelectionMode::UniformFree,
        Mode::Retry => SelectionMode::Retry,
    };
    let sim = simulate(&g, trials, seed, mode)?;
    Ok(match format {
        Format::Json => Output::Json(json!({
            "trials": trials,
            "seed": seed,
            "mean": sim.mean(),
            "histogram": sim.histogram.iter().map(|(k, c)| (k.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
        })),
        Format::Csv => {
            let mut s = String::from("k,count\n");
            for (k, c) in &sim.histogram {
                s.push_str(&format!("{k},{c}\n"));
            }
            Output::Text(s)
        }
    })
}

fn series_cmd(family: FamilyTag, order: usize, format: Format) -> Run {
    let s = series_for(family, order)?;
    Ok(match format {
        Format::Json => Output::Json(json!({ "family": family.to_string(), "order": order, "terms": json_of(&s.terms()) })),
        Format::Csv => Output::Text(s.to_csv()),
    })
}

fn spectral_cmd(t: Complex64, k_range: (i64, i64), n: Option<usize>, cut: Cut, format: Format) -> Run {
    if (t + 1.0).norm() == 0.0 {
        let n = need(n, "n")?;
        let v = xn_at_minus_one(n)?;
        return Ok(Output::Json(json!({
            "n": n,
            "t": [-1.0, 0.0],
            "exact": fmt_rational(&v),
            "asymptotic": spectral::xn_minus_one_asymptotic(n),
            "saddle_point": spectral::xn_minus_one_saddle_point(n),
        })));
    }
    let policy = match cut {
        Cut::Upper => CutPolicy::UpperSide,
        Cut::Reject => CutPolicy::Reject,
    };
    let bs = branches(t, k_range.0..=k_range.1, policy)?;
    if format == Format::Csv {
        return Ok(Output::Text(branches_csv(&bs)));
    }
    let mut out = json!({ "t": [t.re, t.im], "branches": json_of(&bs) });
    if let Some(n) = n {
        let k_max = k_range.0.abs().max(k_range.1.abs());
        let x = spectral::xnt_spectral(n, t, k_max)?;
        let y = spectral::ynt_spectral(n, t, k_max)?;
        let exact = PgfEngine::new().x(n).eval_complex(t);
        out["n"] = json!(n);
        out["xnt"] = json_of(&x);
        out["ynt"] = json_of(&y);
        out["xnt_exact"] = json!([exact.re, exact.im]);
    }
    Ok(Output::Json(out))
}

fn constants_cmd(digits: u32, format: Format) -> Run {
    let c = constants(digits)?;
    Ok(match format {
        Format::Json => Output::Json(json_of(&c)),
        Format::Csv => {
            let v = json_of(&c);
            let mut s = String::from("name,value\n");
            for (k, x) in v.as_object().expect("struct") {
                s.push_str(&format!("{k},{}\n", x.as_str().map_or(x.to_string(), str::to_string)));
            }
            Output::Text(s)
        }
    })
}

fn dominance_cmd(nmax: usize, format: Format) -> Run {
    if nmax == 0 {
        return Err(Failure::Usage("--nmax must be at least 1".into()));
    }
    let verdicts = verify_ladder(nmax);
    Ok(match format {
        Format::Json => Output::Json(json!({
            "nmax": nmax,
            "all_hold": dominance::all_hold(&verdicts),
            "verdicts": json_of(&verdicts),
            "counterexamples": json_of(&counterexample_report()),
        })),
        Format::Csv => {
            let mut s = String::from("relation,n,holds,witness,slack,asserted\n");
            for v in &verdicts {
                s.push_str(&format!(
                    "\"{}\",{},{},{},{},{}\n",
                    v.relation,
                    v.n,
                    v.holds,
                    v.witness,
                    fmt_rational(&v.slack),
                    v.asserted
                ));
            }
            Output::Text(s)
        }
    })
}

fn hardcore_cmd(family: FamilyTag, n: usize, digits: u32, trials: usize, seed: u64) -> Run {
    let grid = match family {
        FamilyTag::Z => hardcore::one_row_grid(n),
        FamilyTag::X | FamilyTag::Y => build_config(Family::new(family, n)),
        _ => return Err(Failure::Usage("the hard-core model covers families X, Y and Z".into())),
    };
    let law = match family {
        FamilyTag::Z => hardcore::TransferMatrix::new(&grid).pgf(),
        _ => hardcore::pgf_hardcore(family, n)?,
    };
    let tm = hardcore::TransferMatrix::new(&grid);
    let dist = ExactDistribution::from_pgf(&law);
    let mut out = json!({
        "family": family.to_string(),
        "n": n,
        "seats": grid.len(),
        "count": tm.count().to_string(),
        "law": json_of(&dist),
        "mean": fmt_rational(&dist.mean()),
        "constants": json_of(&hardcore::hardcore_constants(digits)?),
    });
    if trials > 0 {
        let occ = hardcore::sample_occupancy(&grid, trials, seed);
        let mean = occ.iter().sum::<usize>() as f64 / trials as f64;
        out["samples"] = json!({
            "trials": trials,
            "seed": seed,
            "mean": mean,
            "density": mean / grid.len().max(1) as f64,
        });
    }
    Ok(Output::Json(out))
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Dist {
            family,
            n,
            grid,
            engine,
            format,
        } => dist(family, n, grid, engine, format),
        Command::Moments {
            family,
            n,
            nmax,
            digits,
            format,
        } => moments(family, n, nmax, digits, format),
        Command::Simulate {
            family,
            n,
            grid,
            trials,
            seed,
            mode,
            format,
        } => simulate_cmd(family, n, grid, trials, seed, mode, format),
        Command::Series { family, n, format } => series_cmd(family, n, format),
        Command::Spectral {
            t,
            k_range,
            n,
            cut,
            format,
        } => spectral_cmd(t, k_range, n, cut, format),
        Command::Constants { digits, format } => constants_cmd(digits, format),
        Command::Verify { suite, nmax } => {
            let report = verify::run(suite, nmax)?;
            let v = json_of(&report);
            Ok(if report.passed { Output::Json(v) } else { Output::Failed(v) })
        }
        Command::Dominance { nmax, format } => dominance_cmd(nmax, format),
        Command::Hardcore {
            family,
            n,
            digits,
            trials,
            seed,
        } => hardcore_cmd(family, n, digits, trials, seed),
    }
}

fn emit(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Output::Json(v)) => emit(&format!("{v}\n")),
        Ok(Output::Text(s)) => emit(&s),
        Ok(Output::Failed(v)) => {
            emit(&format!("{v}\n"));
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
