//! Invariant suites behind `unfriendly verify`.

use serde::Serialize;

use unfriendly_core::series::{series_ga, series_gb, series_gx, series_gy};
use unfriendly_core::{
    constants, counterexample_report, dominance, exact_distribution, hardcore, verify_ladder, build_config,
    ExactDistribution, Family, FamilyTag, PgfEngine, Rational,
};

use crate::{Failure, Suite};

/// Largest `n` for which the oracle is run on every family.
const ORACLE_N: usize = 10;
const ENUMERATION_N: usize = 16;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub nmax: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn engines(nmax: usize) -> Result<Vec<Check>, Failure> {
    let n_top = nmax.min(ORACLE_N);
    let mut engine = PgfEngine::new();
    let mut out = Vec::new();
    for tag in FamilyTag::ALL {
        let series = match tag {
            FamilyTag::A => Some(series_ga(n_top)),
            FamilyTag::B => Some(series_gb(n_top)),
            FamilyTag::X => Some(series_gx(n_top)),
            FamilyTag::Y => Some(series_gy(n_top)),
            FamilyTag::Z => None,
        };
        let mut bad = Vec::new();
        for n in 0..=n_top {
            let oracle = exact_distribution(&build_config(Family::new(tag, n)))?;
            let rec = engine.distribution(tag, n);
            let ser_ok = series
                .as_ref()
                .is_none_or(|s| ExactDistribution::from_pgf(s.term(n)) == oracle);
            if oracle != rec || !ser_ok {
                bad.push(n);
            }
        }
        let detail = if bad.is_empty() {
            format!("n = 0..={n_top}")
        } else {
            format!("mismatch at n = {bad:?}")
        };
        out.push(check(format!("engines agree on {tag}"), bad.is_empty(), detail));
    }
    Ok(out)
}

fn dominance_checks(nmax: usize) -> Vec<Check> {
    let verdicts = verify_ladder(nmax.max(1));
    let failed: Vec<String> = verdicts
        .iter()
        .filter(|v| v.asserted && !v.holds)
        .map(|v| format!("{} at n={}", v.relation, v.n))
        .collect();
    let probes = verdicts.iter().filter(|v| !v.asserted).count();
    let probes_hold = verdicts.iter().filter(|v| !v.asserted && v.holds).count();
    let r = counterexample_report();
    let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
    let laws_ok = r.laws[0].law.pmf() == &[(1, q(1, 4)), (3, q(3, 4))].into_iter().collect()
        && r.laws[1].law.pmf() == &[(2, q(7, 15)), (3, q(8, 15))].into_iter().collect()
        && r.laws[2].mean == q(2, 1)
        && r.laws[3].mean == q(5, 3);
    vec![
        check(
            "ladder, sandwich and composed relations",
            failed.is_empty(),
            if failed.is_empty() {
                format!("{} verdicts for n = 1..={nmax}", verdicts.len())
            } else {
                failed.join("; ")
            },
        ),
        check("-1 probes (reported only)", true, format!("{probes_hold}/{probes} hold")),
        check("small-grid counterexamples", laws_ok && r.h1_tail > r.g1_tail, "H1, G1, H2, G2 laws and means"),
        check(
            "G1 >= H1 fails at x = 2",
            !r.verdicts[0].holds && r.verdicts[0].witness == 2,
            format!("witness {}", r.verdicts[0].witness),
        ),
        check("all_hold", dominance::all_hold(&verdicts), ""),
    ]
}

fn hardcore_checks(nmax: usize) -> Result<Vec<Check>, Failure> {
    let mut counts_ok = true;
    for n in 1..=nmax.min(ENUMERATION_N) {
        counts_ok &= hardcore::enumerate_arrangements(n, None)?.count == hardcore::fib(n).value;
    }
    let mut forms_ok = true;
    for n in 0..=nmax {
        for tag in [FamilyTag::X, FamilyTag::Y] {
            forms_ok &= hardcore::pgf_hardcore(tag, n)? == hardcore::pgf_hardcore_closed(tag, n)?;
        }
    }
    let c = hardcore::hardcore_constants(20)?;
    let seq = constants(20)?;
    Ok(vec![
        check("enumeration count = Fibonacci", counts_ok, format!("n = 1..={}", nmax.min(ENUMERATION_N))),
        check("closed form = recurrence", forms_ok, format!("n = 0..={nmax}")),
        check(
            "hard-core density below sequential density",
            c.density_2row < seq.jamming_2row,
            format!("{} < {}", &c.density_2row[..8], &seq.jamming_2row[..8]),
        ),
    ])
}

fn constant_checks() -> Result<Vec<Check>, Failure> {
    let c = constants(30)?;
    let h = hardcore::hardcore_constants(20)?;
    let printed = [
        ("c1", &c.c1, "0.335022706294844"),
        ("c2", &c.c2, "-0.156407503800915"),
        ("c3", &c.c3, "-0.016469973369929"),
        ("c4", &c.c4, "0.091221676624710"),
        ("jamming_2row", &c.jamming_2row, "0.408030"),
        ("jamming_1row", &c.jamming_1row, "0.432332"),
        ("hardcore density_2row", &h.density_2row, "0.36180"),
        ("hardcore variance_2row", &h.variance_2row, "0.08944"),
        ("hardcore density_1row", &h.density_1row, "0.41149"),
    ];
    Ok(printed
        .into_iter()
        .map(|(name, got, want)| check(name, got.starts_with(want), got.to_string()))
        .collect())
}

pub fn run(suite: Suite, nmax: usize) -> Result<VerifyReport, Failure> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Engines {
        checks.extend(engines(nmax)?);
    }
    if all || suite == Suite::Dominance {
        checks.extend(dominance_checks(nmax));
    }
    if all || suite == Suite::Hardcore {
        checks.extend(hardcore_checks(nmax)?);
    }
    if all || suite == Suite::Constants {
        checks.extend(constant_checks()?);
    }
    Ok(VerifyReport {
        suite: format!("{suite:?}").to_lowercase(),
        nmax,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
