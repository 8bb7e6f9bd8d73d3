//! `qigeom`: run verification scenarios and estimators from the shell.
//!
//! Exit status: 0 when every report passes, 1 when one fails, 2 on usage
//! or input errors.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qigeom::estimators::{
    bilip_lower_bound, connecting_eps, drift_profile, falsify_bilip_bound, psi_drift_witnesses,
    ratio_histogram, ray_witnesses, sampled_geodesic_ratios, spiral_drift_witnesses, DriftVerdict,
    EstimateRecord, PointCloud, Region, SamplerConfig,
};
use qigeom::maps::{from_text, MapNode};
use qigeom::verify::{
    run_scenario, verify_pl_norm, write_outputs, Check, PlotData, Report, Scenario, ScenarioConfig,
    Witness, DEFAULT_SEED, PSI_DRIFT_TOLERANCE, SEED_ENV, SPIRAL_DRIFT_TOLERANCE,
};
use qigeom::{GeomError, MapExpr, PLMap, VectorN};

const SCENARIO_HELP: &str =
    "Scenarios: radial, psi, psi-drift, homomorphism, product, density, spiral, \
spiral-kernel, pl-norm, metric, matrix-norms, all.\n\nScenario keys are given as `--key value` \
(or `--key=value`) after the scenario name, or in a flat `key = value` file via --config.";

#[derive(Parser)]
#[command(
    name = "qigeom",
    version,
    about = "Bi-Lipschitz and quasi-isometry verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification scenario (or `all`) and emit JSON reports.
    #[command(after_help = SCENARIO_HELP)]
    Verify {
        scenario: String,
        /// Scenario keys as `--key value` pairs, plus --config, --seed,
        /// --out and --svg.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Sampled bi-Lipschitz lower bound of a map in canonical text form.
    Estimate {
        #[arg(long)]
        map: PathBuf,
        /// `ball:R`, `cube:H` or `shell:RMIN:RMAX`, centred at the origin.
        #[arg(long, default_value = "ball:10")]
        region: String,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Claimed constant; the run fails if a sampled pair refutes it.
        #[arg(long)]
        claim: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drift |f(x) − x| along a witness sequence.
    Drift {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum)]
        witnesses: WitnessKind,
        #[arg(short = 'K', long = "k", default_value_t = 40)]
        k: u32,
        /// Base point (psi) or direction (ray), comma-separated.
        #[arg(long)]
        x0: Option<String>,
        #[arg(long, default_value_t = 1e6)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exact PL differential norm of a CSV PL map against sampling.
    PlNorm {
        #[arg(long)]
        plmap: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        pairs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graph length metric over chord on a CSV point cloud.
    Geodesic {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Graph radius; defaults to 1.5 times the smallest connecting radius.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Psi,
    Spiral,
    Ray,
}

enum Failure {
    Usage(String),
    Input(GeomError),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Config(m) => Failure::Usage(m),
            other => Failure::Input(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(reports) => {
            for r in &reports {
                println!("{}", r.to_json());
            }
            ExitCode::from(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nusage: qigeom verify <scenario> [--config FILE] [--KEY VALUE]...\n{SCENARIO_HELP}");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn seed_or_default(seed: Option<u64>) -> Result<u64, Failure> {
    match seed {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_ENV) {
            Ok(s) if !s.trim().is_empty() => s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid {SEED_ENV} '{s}'"))),
            _ => Ok(DEFAULT_SEED),
        },
    }
}

fn read_map(path: &Path) -> Result<MapExpr, Failure> {
    let text = std::fs::read_to_string(path).map_err(GeomError::from)?;
    Ok(from_text(&text)?)
}

fn parse_region(text: &str, n: usize) -> Result<Region, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Failure::Usage(format!("invalid number '{s}' in region")))
    };
    let region = match parts.as_slice() {
        ["ball", r] => Region::ball(n, num(r)?),
        ["cube", h] => Region::cube(n, num(h)?),
        ["shell", a, b] => Region::shell(n, num(a)?, num(b)?),
        _ => {
            return Err(Failure::Usage(format!(
                "invalid region '{text}' (ball:R, cube:H or shell:RMIN:RMAX)"
            )))
        }
    };
    region.validate()?;
    Ok(region)
}

fn parse_point(s: &str) -> Result<VectorN, Failure> {
    let coords = s
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("invalid coordinate '{c}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorN::new(coords)?)
}

fn run(cmd: Command) -> Result<Vec<Report>, Failure> {
    match cmd {
        Command::Verify { scenario, args } => verify(&scenario, &args),
        Command::Estimate {
            map,
            region,
            pairs,
            seed,
            claim,
            out,
        } => {
            let m = read_map(&map)?;
            let cfg = SamplerConfig::new(
                seed_or_default(seed)?,
                parse_region(&region, m.dim())?,
                pairs,
            )?;
            let start = Instant::now();
            let est = bilip_lower_bound(&m, &cfg)?;
            let record =
                EstimateRecord::from_estimate(&m, &est, pairs, start.elapsed().as_millis() as u64);
            let mut report = Report::new("estimate", map.display().to_string(), cfg.seed);
            report.observed = Some(est.lambda_lower);
            report.n_samples = pairs;
            report.worst_witness = est.worst_pair.as_ref().map(|w| Witness {
                x: w.x.clone(),
                y: Some(w.y.clone()),
                ratio: Some(w.ratio),
            });
            report.params.insert("region".into(), region);
            report.params.insert("map".into(), record.map.clone());
            if let Some(c) = claim {
                report.claimed = Some(c);
                let refuted = falsify_bilip_bound(&m, c, &cfg)?;
                report.push(
                    Check::new("claim", refuted.is_none()).with_detail(match &refuted {
                        Some(w) => format!("refuted at ratio {:.12}", w.ratio),
                        None => "no sampled pair refutes the claim".into(),
                    }),
                );
            }
            report.wall_time_ms = record.elapsed_ms;
            write_outputs(std::slice::from_ref(&report), out.as_deref(), None)?;
            Ok(vec![report])
        }
        Command::Drift {
            map,
            witnesses,
            k,
            x0,
            threshold,
            out,
            svg,
        } => {
            let m = read_map(&map)?;
            let report = drift(&m, witnesses, k, x0.as_deref(), threshold, &map)?;
            write_outputs(
                std::slice::from_ref(&report),
                out.as_deref(),
                svg.as_deref(),
            )?;
            Ok(vec![report])
        }
        Command::PlNorm {
            plmap,
            pairs,
            seed,
            out,
        } => {
            let f = PLMap::read_csv(File::open(&plmap).map_err(GeomError::from)?)?;
            let start = Instant::now();
            let mut report = verify_pl_norm(&f, pairs, seed_or_default(seed)?)?;
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            report
                .params
                .insert("plmap".into(), plmap.display().to_string());
            write_outputs(std::slice::from_ref(&report), out.as_deref(), None)?;
            Ok(vec![report])
        }
        Command::Geodesic {
            cloud,
            pairs,
            eps,
            seed,
            out,
            svg,
        } => {
            let pc = PointCloud::read_csv(File::open(&cloud).map_err(GeomError::from)?)?;
            let seed = seed_or_default(seed)?;
            let start = Instant::now();
            let eps = match eps {
                Some(e) => e,
                None => 1.5 * connecting_eps(&pc),
            };
            let r = sampled_geodesic_ratios(&pc, eps, pairs, seed)?;
            let mut report = Report::new("geodesic", cloud.display().to_string(), seed);
            report.observed = Some(r.ratio);
            report.n_samples = r.n_queries;
            report.worst_witness = Some(Witness {
                x: pc.point(r.worst.0).to_vec(),
                y: Some(pc.point(r.worst.1).to_vec()),
                ratio: Some(r.ratio),
            });
            report.params.insert("eps".into(), format!("{eps}"));
            report.push(
                Check::new("length-above-chord", r.min_ratio >= 1.0 - 1e-12)
                    .with_detail(format!("min ratio {:.12}", r.min_ratio)),
            );
            report.plot = Some(PlotData::Histogram {
                bins: ratio_histogram(&r.ratios, 40),
            });
            report.wall_time_ms = start.elapsed().as_millis() as u64;
            write_outputs(
                std::slice::from_ref(&report),
                out.as_deref(),
                svg.as_deref(),
            )?;
            Ok(vec![report])
        }
    }
}

/// `--key value`, `--key=value`, plus --config FILE.
fn verify(name: &str, args: &[String]) -> Result<Vec<Report>, Failure> {
    let scenario: Scenario = name.parse()?;
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let key = a
            .strip_prefix("--")
            .ok_or_else(|| Failure::Usage(format!("unexpected argument '{a}'")))?;
        let (k, v) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Failure::Usage(format!("missing value for --{key}")))?;
                (key.to_string(), v.clone())
            }
        };
        pairs.push((k, v));
    }
    let mut cfg = match pairs.iter().position(|(k, _)| k == "config") {
        Some(i) => {
            let (_, path) = pairs.remove(i);
            let text = std::fs::read_to_string(&path).map_err(GeomError::from)?;
            ScenarioConfig::from_text(&text, Some(scenario))?
        }
        None => ScenarioConfig::new(scenario),
    };
    for (k, v) in &pairs {
        cfg.set(k, v)?;
    }
    let reports = run_scenario(&cfg)?;
    let out = cfg.get_opt("out").map(PathBuf::from);
    let svg = cfg.get_opt("svg").map(PathBuf::from);
    write_outputs(&reports, out.as_deref(), svg.as_deref())?;
    Ok(reports)
}

fn drift(
    m: &MapExpr,
    kind: WitnessKind,
    k: u32,
    x0: Option<&str>,
    threshold: f64,
    path: &Path,
) -> Result<Report, Failure> {
    let start = Instant::now();
    let mut report = Report::new("drift", path.display().to_string(), 0);
    let (points, predicted, tolerance) = match kind {
        WitnessKind::Psi => {
            let MapNode::Psi(g) = m.node() else {
                return Err(Failure::Usage("psi witnesses need a `psi` map".into()));
            };
            let base = parse_point(x0.unwrap_or("0.3,-0.4"))?;
            let w = psi_drift_witnesses(g, &base, k)?;
            let predicted = (1..=k)
                .map(|j| 2f64.powi(j as i32) * w.base_drift)
                .collect();
            (w.points, Some(predicted), PSI_DRIFT_TOLERANCE)
        }
        WitnessKind::Spiral => {
            let MapNode::Spiral(p) = m.node() else {
                return Err(Failure::Usage(
                    "spiral witnesses need a `spiral` map".into(),
                ));
            };
            let w = spiral_drift_witnesses(p, k)?;
            (w.points, Some(w.predicted), SPIRAL_DRIFT_TOLERANCE)
        }
        WitnessKind::Ray => {
            let dir = match x0 {
                Some(s) => parse_point(s)?,
                None => VectorN::basis(m.dim(), 0),
            };
            (ray_witnesses(&dir, k), None, 0.0)
        }
    };
    let profile = drift_profile(m, &points, threshold)?;
    if let Some(pred) = &predicted {
        let err = profile
            .drifts
            .iter()
            .zip(pred)
            .map(|(d, p)| (d - p).abs() / p)
            .fold(0.0, f64::max);
        report.claimed = pred.last().copied();
        report.push(Check::at_most("drift-law", tolerance, err));
    }
    report.observed = profile.drifts.last().copied();
    report.n_samples = points.len();
    report.push(
        Check::new("verdict", true).with_detail(match profile.verdict {
            DriftVerdict::BoundedBelowThreshold => "bounded-below-threshold",
            DriftVerdict::ExceedsThresholdWithGrowth => "exceeds-threshold-with-growth",
        }),
    );
    report.params.insert(
        "witnesses".into(),
        format!(
            "{}",
            kind.to_possible_value()
                .expect("no skipped variants")
                .get_name()
        ),
    );
    report
        .params
        .insert("threshold".into(), format!("{threshold:e}"));
    report.plot = Some(PlotData::Drift {
        k: (1..=profile.drifts.len() as u32).collect(),
        predicted: predicted.unwrap_or_default(),
        drift: profile.drifts,
    });
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
