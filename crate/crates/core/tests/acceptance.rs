//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//!
//! Runs with the default seed unless `QIGEOM_SEED` is set. Runtime budgets
//! are per case; a case over budget fails its criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qigeom::maps::{make_twist_disk_map, AngleProfile};
use qigeom::verify::{run_scenario, PlotData, Report, Scenario, ScenarioConfig, DEFAULT_SUITE};

type Outcome = Result<String, String>;

struct Case {
    label: String,
    budget: Duration,
    elapsed: Duration,
    outcome: Outcome,
}

fn config(scenario: Scenario, kv: &[(&str, &str)]) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(scenario);
    for (k, v) in kv {
        cfg.set(k, v).unwrap_or_else(|e| panic!("{k}={v}: {e}"));
    }
    cfg
}

fn run(cfg: &ScenarioConfig) -> Result<Vec<Report>, String> {
    run_scenario(cfg).map_err(|e| e.to_string())
}

fn failed_checks(r: &Report) -> String {
    r.checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| {
            format!(
                "{} (claimed {:?}, observed {:?})",
                c.name, c.claimed, c.observed
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn require_pass(reports: &[Report]) -> Result<(), String> {
    match reports.iter().find(|r| !r.pass) {
        Some(r) => Err(format!("{}: {}", r.case, failed_checks(r))),
        None => Ok(()),
    }
}

fn observed(r: &Report, check: &str) -> Result<f64, String> {
    r.check(check)
        .and_then(|c| c.observed)
        .ok_or_else(|| format!("{}: missing check '{check}'", r.case))
}

fn drift_plot(r: &Report) -> Result<&[f64], String> {
    match &r.plot {
        Some(PlotData::Drift { drift, .. }) => Ok(drift),
        _ => Err(format!("{}: no drift plot", r.case)),
    }
}

fn timed(label: String, budget_s: f64, f: impl FnOnce() -> Outcome) -> Case {
    let start = Instant::now();
    let outcome = f();
    Case {
        label,
        budget: Duration::from_secs_f64(budget_s),
        elapsed: start.elapsed(),
        outcome,
    }
}

/// Criterion 1: latitude maps on S¹ and S², plus orthogonal isometries.
fn radial() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in ["2", "3"] {
        for beta in ["0.25", "0.5", "0.75"] {
            cases.push(timed(format!("latitude beta={beta} n={n}"), 10.0, || {
                let r = run(&config(
                    Scenario::Radial,
                    &[("n", n), ("beta", beta), ("pairs", "1000000")],
                ))?;
                require_pass(&r)?;
                Ok(format!(
                    "{:.6} <= {:.6}",
                    r[0].observed.unwrap_or(f64::NAN),
                    r[0].claimed.unwrap_or(f64::NAN)
                ))
            }));
        }
        cases.push(timed(format!("orthogonal n={n}"), 10.0, || {
            let r = run(&config(
                Scenario::Radial,
                &[("n", n), ("sphere", "orthogonal"), ("pairs", "1000000")],
            ))?;
            require_pass(&r)?;
            let dev = (r[0].observed.ok_or("no observation")? - 1.0).abs();
            if dev > 1e-9 {
                return Err(format!("|observed - 1| = {dev:e} > 1e-9"));
            }
            Ok(format!("|observed - 1| = {dev:.1e}"))
        }));
    }
    cases
}

/// Criterion 2: Ψ keeps the disk map's constant, cross-disk pairs included.
fn psi() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in ["2", "3"] {
        for disk in ["twist", "pl-twist"] {
            cases.push(timed(format!("{disk} n={n}"), 15.0, || {
                let r = run(&config(
                    Scenario::Psi,
                    &[("n", n), ("disk", disk), ("pairs", "1000000")],
                ))?;
                require_pass(&r)?;
                let (claimed, obs) = (
                    r[0].claimed.ok_or("no claim")?,
                    r[0].observed.ok_or("no observation")?,
                );
                if obs > claimed * (1.0 + 1e-6) {
                    return Err(format!("{obs} > {claimed}·(1+1e-6)"));
                }
                observed(&r[0], "cross-disk")?;
                Ok(format!("{obs:.6} <= {claimed:.6}"))
            }));
        }
    }
    cases
}

/// Criterion 3: drift of Ψ(g) along 4ᵏe₁ + 2ᵏx₀ against 2ᵏ·|g(x₀) − x₀|,
/// recomputed here from g itself.
fn psi_drift() -> Vec<Case> {
    vec![timed("twist k=1..40".into(), 1.0, || {
        let r = run(&config(
            Scenario::PsiDrift,
            &[("k", "40"), ("threshold", "1e6"), ("x0", "0.3,-0.4")],
        ))?;
        require_pass(&r)?;
        let g = make_twist_disk_map(AngleProfile::bump(1.0), 0, 1, 2).map_err(|e| e.to_string())?;
        // the witnesses snap x₀[0] to a multiple of 2^(40-52)
        let base = [(0.3f64 * 4096.0).round() / 4096.0, -0.4];
        let gb = g.apply(&base);
        let d0 = ((gb[0] - base[0]).powi(2) + (gb[1] - base[1]).powi(2)).sqrt();
        let drift = drift_plot(&r[0])?;
        if drift.len() != 40 {
            return Err(format!("{} drift samples", drift.len()));
        }
        let err = drift
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let p = 2f64.powi(i as i32 + 1) * d0;
                (d - p).abs() / p
            })
            .fold(0.0, f64::max);
        if err > 1e-12 {
            return Err(format!("relative error {err:e} > 1e-12"));
        }
        let last = drift[39];
        if last <= 1e6 {
            return Err(format!("drift {last:e} does not exceed 1e6"));
        }
        Ok(format!(
            "max relative error {err:.1e}, drift(40) = {last:.3e}"
        ))
    })]
}

/// Criterion 4: Ψ(g∘h) = Ψ(g)∘Ψ(h), restriction, disjoint supports commute.
fn homomorphism() -> Vec<Case> {
    ["psi", "translated", "radial"]
        .into_iter()
        .map(|kind| {
            timed(format!("{kind}"), 5.0, move || {
                let r = run(&config(
                    Scenario::Homomorphism,
                    &[
                        ("kind", kind),
                        ("points", "10000"),
                        ("restriction_points", "1000"),
                    ],
                ))?;
                require_pass(&r)?;
                let comp = observed(&r[0], "composition")?;
                if comp > 1e-9 {
                    return Err(format!("composition residual {comp:e} > 1e-9"));
                }
                if kind == "psi" {
                    let res = observed(&r[0], "restriction")?;
                    if res > 1e-9 {
                        return Err(format!("restriction residual {res:e}"));
                    }
                    if !r[0].check("disjoint-commute").is_some_and(|c| c.pass) {
                        return Err("disjoint supports do not commute exactly".into());
                    }
                }
                Ok(format!("composition residual {comp:.1e}"))
            })
        })
        .collect()
}

/// Criterion 5: product QI constants in L¹, the drift identity, density.
fn product() -> Vec<Case> {
    vec![
        timed("product L1 pairs=1e5".into(), 10.0, || {
            let r = run(&config(Scenario::Product, &[("pairs", "100000")]))?;
            require_pass(&r)?;
            let mut worst = 0.0f64;
            for rep in &r {
                worst = worst.max(observed(rep, "drift-identity")?);
            }
            if worst > 1e-12 {
                return Err(format!("drift identity residual {worst:e} > 1e-12"));
            }
            Ok(format!(
                "{} reports, drift identity residual {worst:.1e}",
                r.len()
            ))
        }),
        timed("density grid".into(), 10.0, || {
            let r = run(&config(Scenario::Density, &[]))?;
            require_pass(&r)?;
            let c = r[0]
                .check("product-density")
                .ok_or("missing product-density")?;
            Ok(format!(
                "C_h = {:.4e} <= {:.4e}",
                c.observed.unwrap_or(f64::NAN),
                c.claimed.unwrap_or(f64::NAN)
            ))
        }),
    ]
}

/// Criterion 6: log spirals against nC + 1, equal radii exactly isometric.
fn spiral() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in ["2", "3"] {
        for c in ["0.5", "1", "2"] {
            cases.push(timed(format!("log-spiral c={c} n={n}"), 15.0, || {
                let r = run(&config(
                    Scenario::Spiral,
                    &[("n", n), ("c", c), ("pairs", "1000000")],
                ))?;
                require_pass(&r)?;
                let cv: f64 = c.parse().unwrap();
                let nv: f64 = n.parse().unwrap();
                let claimed = r[0].claimed.ok_or("no claim")?;
                if (claimed - (nv * cv + 1.0)).abs() > 1e-12 {
                    return Err(format!("claimed {claimed} != nC + 1"));
                }
                let eq = observed(&r[0], "equal-radius")?;
                if eq > 1e-9 {
                    return Err(format!("equal-radius |ratio - 1| = {eq:e}"));
                }
                Ok(format!(
                    "{:.6} <= {claimed}, equal-radius {eq:.1e}",
                    r[0].observed.unwrap_or(f64::NAN)
                ))
            }));
        }
    }
    cases
}

/// Criterion 7: cutoff profiles stay bounded; a constant rotation by θ
/// drifts by 2·sin(θ/2)·2ᵏ at the witnesses.
fn spiral_kernel() -> Vec<Case> {
    let theta = 2.0f64;
    vec![timed(
        format!("cutoff and constant theta={theta}"),
        2.0,
        move || {
            let r = run(&config(
                Scenario::SpiralKernel,
                &[("angle", &theta.to_string()), ("k", "40")],
            ))?;
            require_pass(&r)?;
            let cutoff = r
                .iter()
                .find(|r| r.case.contains("cutoff"))
                .ok_or("no cutoff report")?;
            let verdict = cutoff
                .check("verdict")
                .and_then(|c| c.detail.clone())
                .unwrap_or_default();
            if !verdict.contains("Bounded") {
                return Err(format!("cutoff verdict {verdict}"));
            }
            let constant = r
                .iter()
                .find(|r| r.case.contains("constant"))
                .ok_or("no constant report")?;
            let drift = drift_plot(constant)?;
            let err = drift
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let p = 2.0 * (theta / 2.0).sin() * 2f64.powi(i as i32 + 1);
                    (d - p).abs() / p
                })
                .fold(0.0, f64::max);
            if err > 1e-9 {
                return Err(format!(
                    "constant rotation drift relative error {err:e} > 1e-9"
                ));
            }
            Ok(format!(
                "cutoff sup drift {:.3}, constant rotation error {err:.1e}",
                cutoff.observed.unwrap_or(f64::NAN)
            ))
        },
    )]
}

/// Criterion 8: exact PL norm against dense sampling, identity and affine exact.
fn pl_norm() -> Vec<Case> {
    [("2", "16"), ("3", "8")]
        .into_iter()
        .map(|(n, res)| {
            timed(
                format!("random displacement n={n} resolution={res}"),
                20.0,
                move || {
                    let r = run(&config(
                        Scenario::PlNorm,
                        &[("n", n), ("resolution", res), ("pairs", "1000000")],
                    ))?;
                    require_pass(&r)?;
                    let (exact, sampled) = (
                        r[0].claimed.ok_or("no exact norm")?,
                        r[0].observed.ok_or("no sample")?,
                    );
                    if (sampled / exact - 1.0).abs() > 0.01 {
                        return Err(format!("sampled {sampled} vs exact {exact}"));
                    }
                    let id = observed(&r[0], "identity-exact")?;
                    let aff = observed(&r[0], "affine-exact")?;
                    if id > 1e-10 {
                        return Err(format!("identity norm error {id:e}"));
                    }
                    Ok(format!(
                        "sampled/exact = {:.5}, identity {id:.0e}, affine {aff:.0e}",
                        sampled / exact
                    ))
                },
            )
        })
        .collect()
}

/// Criterion 9: graph length metric on circle and sphere clouds.
fn metric() -> Vec<Case> {
    [("circle", 0.02), ("sphere", 0.08)]
        .into_iter()
        .map(|(cloud, tol)| {
            timed(format!("{cloud} 1e4 points"), 30.0, move || {
                let r = run(&config(
                    Scenario::Metric,
                    &[("cloud", cloud), ("points", "10000")],
                ))?;
                require_pass(&r)?;
                let ratio = r[0].observed.ok_or("no ratio")?;
                let rel = (ratio / (PI / 2.0) - 1.0).abs();
                if rel > tol {
                    return Err(format!("ratio {ratio} off pi/2 by {rel:.4}"));
                }
                if !r[0].check("length-above-chord").is_some_and(|c| c.pass) {
                    return Err("a queried pair has length below chord".into());
                }
                Ok(format!("ratio {ratio:.5} ({:.2}% from pi/2)", 100.0 * rel))
            })
        })
        .collect()
}

/// Criterion 10: operator vs Frobenius norm inequalities.
fn matrix_norms() -> Vec<Case> {
    vec![timed("1e3 matrices n<=8".into(), 1.0, || {
        let r = run(&config(
            Scenario::MatrixNorms,
            &[("count", "1000"), ("n_max", "8")],
        ))?;
        require_pass(&r)?;
        Ok(r[0]
            .check("norm-inequalities")
            .and_then(|c| c.detail.clone())
            .unwrap_or_default())
    })]
}

/// Criterion 11: every scenario reruns to identical canonical JSON, also
/// on a single-threaded pool.
fn determinism() -> Vec<Case> {
    // fewer pairs keep the double runs short; point counts stay at their defaults
    let reduced: &[(&str, &str)] = &[("pairs", "20000")];
    DEFAULT_SUITE
        .iter()
        .map(|&s| {
            timed(format!("{s}"), 60.0, move || {
                let mut cfg = ScenarioConfig::new(s);
                for (k, v) in reduced {
                    if s.defaults().iter().any(|(d, _)| d == k) {
                        cfg.set(k, v).map_err(|e| e.to_string())?;
                    }
                }
                let canon = |r: Vec<Report>| {
                    r.iter()
                        .map(Report::canonical_json)
                        .collect::<Vec<_>>()
                        .join("\n")
                };
                let a = canon(run(&cfg)?);
                let b = canon(run(&cfg)?);
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(1)
                    .build()
                    .map_err(|e| e.to_string())?;
                let c = canon(pool.install(|| run(&cfg))?);
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(3)
                    .build()
                    .map_err(|e| e.to_string())?;
                let d = canon(pool.install(|| run(&cfg))?);
                if a != b {
                    return Err("rerun differs".into());
                }
                if a != c || a != d {
                    return Err("output depends on the thread count".into());
                }
                Ok(format!("{} bytes identical", a.len()))
            })
        })
        .collect()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Vec<Case>); 11] = [
        ("radial-extension bound", radial),
        ("psi preserves the constant", psi),
        ("psi drift law", psi_drift),
        ("homomorphism and restriction", homomorphism),
        ("product QI constants", product),
        ("spiral bound", spiral),
        ("spiral kernel trichotomy", spiral_kernel),
        ("PL norms", pl_norm),
        ("metric equivalence", metric),
        ("matrix-norm inequalities", matrix_norms),
        ("determinism", determinism),
    ];
    let mut all_pass = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let cases = f();
        let pass = cases
            .iter()
            .all(|c| c.outcome.is_ok() && c.elapsed <= c.budget);
        all_pass &= pass;
        let total: Duration = cases.iter().map(|c| c.elapsed).sum();
        println!(
            "criterion {:>2} {:<30} {} ({} cases, {:.2}s)",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            cases.len(),
            total.as_secs_f64()
        );
        for c in &cases {
            let over = c.elapsed > c.budget;
            let (mark, msg) = match &c.outcome {
                Ok(m) if !over => ("ok  ", m.clone()),
                Ok(m) => (
                    "SLOW",
                    format!("{m}; over budget {:.0}s", c.budget.as_secs_f64()),
                ),
                Err(e) => ("FAIL", e.clone()),
            };
            println!(
                "    {mark} {:<40} {:>7.2}s  {msg}",
                c.label,
                c.elapsed.as_secs_f64()
            );
        }
    }
    println!("acceptance: {}", if all_pass { "PASS" } else { "FAIL" });
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
