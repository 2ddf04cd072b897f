use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use pseudomode::born::{born_rates, evolve_born};
use pseudomode::classify::{self, ClosenessPair, DiscrepancyReport, Grid, Label, RegionCell, TriplePoint};
use pseudomode::exact::{evolve_exact, exact_rates};
use pseudomode::oracle::{self, DiscretizedReservoir, OracleReport};
use pseudomode::redfield::{evolve_redfield, gksl_rates, redfield_rates};
use pseudomode::{diagonalize, RateTable, Trajectory};
use serde::Serialize;

use crate::config::{reference_model, Model, ModelConfig};
use crate::error::CliError;
use crate::output::{self, sibling, to_json, write_atomic};
use crate::svg;
use crate::{Cli, Command, Format, GridArgs, MethodName, PairName};

const MAX_AXIS: usize = 2000;
const MAX_SAMPLES: usize = 10_000_000;
const VOLTERRA_TOL: f64 = 1e-6;
const TRIPLE_POINT: (f64, f64) = (0.55, 3.55);
const TRIPLE_POINT_WINDOW: f64 = 0.02;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))?;
    }
    let format = cli.format;
    match cli.command {
        Command::Rates { config, at, out } => {
            require_format(format, &[Format::Json], "rates")?;
            let model = ModelConfig::load(&config)?.build()?;
            emit(out.as_deref(), &to_json(&rates_report(&model, &at)?)?)
        }
        Command::Evolve { config, method, t_max, dt, out } => {
            require_format(format, &[Format::Csv, Format::Json], "evolve")?;
            let model = ModelConfig::load(&config)?.build()?;
            let tr = evolve(&model, method, &time_grid(t_max, dt)?)?;
            let meta = metadata(&model, &tr);
            let bytes = match format {
                Some(Format::Json) => output::trajectory_json(&tr, &meta)?,
                _ => output::trajectory_csv(&tr, &meta)?,
            };
            emit(out.as_deref(), &bytes)
        }
        Command::Classify { grid, out } => classify_command(&build_grid(&grid)?, &out, format),
        Command::Closeness { grid, tolerance, pair, out } => {
            closeness_command(&build_grid(&grid)?, tolerance, pair, &out, format)
        }
        Command::Verify { config, modes, half_width, t_max, dt, out } => {
            require_format(format, &[Format::Json], "verify")?;
            let cfg = match config {
                Some(path) => ModelConfig::load(&path)?,
                None => reference_model(),
            };
            let report = verify(&cfg.build()?, modes, half_width, t_max, dt)?;
            emit(out.as_deref(), &to_json(&report)?)?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Numerical("verification failed; see report".into()))
            }
        }
        Command::TriplePoint { out } => {
            require_format(format, &[Format::Json], "triple-point")?;
            let report = triple_point_report()?;
            emit(out.as_deref(), &to_json(&report)?)?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Numerical("triple point outside the expected window".into()))
            }
        }
    }
}

fn require_format(format: Option<Format>, allowed: &[Format], command: &str) -> Result<(), CliError> {
    match format {
        Some(f) if !allowed.contains(&f) => Err(CliError::Usage(format!("{command} does not support --format {f:?}"))),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// `0, dt, 2 dt, ...` up to the first point reaching `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>, CliError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Validation(format!("--dt must be positive, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CliError::Validation(format!("--t-max must be non-negative, got {t_max}")));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0);
    if steps > MAX_SAMPLES as f64 {
        return Err(CliError::Validation(format!("{steps} time samples exceed the limit {MAX_SAMPLES}")));
    }
    Ok((0..=steps as usize).map(|i| i as f64 * dt).collect())
}

fn build_grid(args: &GridArgs) -> Result<Grid, CliError> {
    let (n, m) = args.grid;
    if !(2..=MAX_AXIS).contains(&n) || !(2..=MAX_AXIS).contains(&m) {
        return Err(CliError::Validation(format!("grid resolution {n}x{m} outside 2..={MAX_AXIS} per axis")));
    }
    Ok(Grid::new(args.de_range, n, args.gamma_range, m)?)
}

#[derive(Debug, Serialize)]
struct LevelRates {
    alpha: usize,
    energy: f64,
    detuning: f64,
    eta_exact: f64,
    eta_born: f64,
    eta_gksl: f64,
    eta_redfield_at: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct RateBlock<T> {
    exact: T,
    born: T,
    gksl: T,
    redfield_at: BTreeMap<String, T>,
}

#[derive(Debug, Serialize)]
struct RatesReport {
    levels: Vec<LevelRates>,
    eta_alpha0: RateBlock<Vec<f64>>,
    eta_alphabeta: RateBlock<Vec<Vec<f64>>>,
}

fn rows(t: &RateTable) -> Vec<Vec<f64>> {
    let n = t.n();
    (0..n).map(|a| (0..n).map(|b| t.eta_alphabeta[(a, b)]).collect()).collect()
}

fn rates_report(model: &Model, at: &[f64]) -> Result<RatesReport, CliError> {
    let basis = diagonalize(&model.system, &model.reservoir);
    let r = &model.reservoir;
    let exact = exact_rates(&basis, r);
    let born = born_rates(&basis, r);
    let gksl = gksl_rates(&basis, r);
    let redfield = at
        .iter()
        .map(|&t| Ok((t.to_string(), redfield_rates(&basis, r, t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let levels = (0..basis.n())
        .map(|a| LevelRates {
            alpha: a,
            energy: basis.energies[a],
            detuning: basis.detunings[a],
            eta_exact: exact.eta_alpha[a],
            eta_born: born.eta_alpha[a],
            eta_gksl: gksl.eta_alpha[a],
            eta_redfield_at: redfield.iter().map(|(t, tab)| (t.clone(), tab.eta_alpha[a])).collect(),
        })
        .collect();
    Ok(RatesReport {
        levels,
        eta_alpha0: RateBlock {
            exact: exact.eta_alpha0.clone(),
            born: born.eta_alpha0.clone(),
            gksl: gksl.eta_alpha0.clone(),
            redfield_at: redfield.iter().map(|(t, tab)| (t.clone(), tab.eta_alpha0.clone())).collect(),
        },
        eta_alphabeta: RateBlock {
            exact: rows(&exact),
            born: rows(&born),
            gksl: rows(&gksl),
            redfield_at: redfield.iter().map(|(t, tab)| (t.clone(), rows(tab))).collect(),
        },
    })
}

fn evolve(model: &Model, method: MethodName, times: &[f64]) -> Result<Trajectory, CliError> {
    let basis = diagonalize(&model.system, &model.reservoir);
    let (s, r) = (&model.initial, &model.reservoir);
    Ok(match method {
        MethodName::Exact => evolve_exact(s, &basis, r, times)?,
        MethodName::Born => evolve_born(s, &basis, r, times)?,
        MethodName::Redfield => evolve_redfield(s, &basis, r, times, false)?,
        MethodName::Gksl => evolve_redfield(s, &basis, r, times, true)?,
    })
}

fn metadata(model: &Model, tr: &Trajectory) -> Vec<(String, String)> {
    let r = &model.reservoir;
    [
        ("method", tr.method.name().to_string()),
        ("n", model.system.n().to_string()),
        ("g", r.g.to_string()),
        ("gamma", r.gamma.to_string()),
        ("eps", r.eps.to_string()),
        ("basis", "global".to_string()),
        ("picture", "interaction".to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn region_rows(cells: &[RegionCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                c.de_over_g.to_string(),
                c.gamma_over_g.to_string(),
                c.eta_exact.to_string(),
                c.eta_born.to_string(),
                c.eta_gksl.to_string(),
                c.direct.to_string(),
                c.predicate.to_string(),
                c.agree.to_string(),
            ]
        })
        .collect()
}

pub const REGION_HEADER: [&str; 8] =
    ["dE_over_g", "gamma_over_g", "eta_exact", "eta_born", "eta_gksl", "region_direct", "region_predicate", "agree"];

#[derive(Debug, Serialize)]
struct ClassifySummary {
    region_counts: BTreeMap<Label, usize>,
    discrepancy: DiscrepancyReport,
}

fn classify_command(grid: &Grid, out: &Path, format: Option<Format>) -> Result<(), CliError> {
    let cells = classify::region_map(grid);
    let mut region_counts = BTreeMap::new();
    for c in &cells {
        *region_counts.entry(c.direct).or_insert(0) += 1;
    }
    let summary = ClassifySummary { region_counts, discrepancy: DiscrepancyReport::from_cells(&cells) };

    let csv = output::table_csv(&REGION_HEADER, region_rows(&cells))?;
    let labels: Vec<Label> = cells.iter().map(|c| c.direct).collect();
    let image = svg::region_map(grid, &labels, "population-rate ordering");
    let json = to_json(&summary)?;
    match format {
        Some(Format::Csv) => write_atomic(out, &csv)?,
        Some(Format::Svg) => write_atomic(out, image.as_bytes())?,
        Some(Format::Json) => write_atomic(out, &json)?,
        None => {
            write_atomic(out, &csv)?;
            write_atomic(&sibling(out, "", "svg"), image.as_bytes())?;
            write_atomic(&sibling(out, "discrepancy", "json"), &json)?;
        }
    }
    let d = &summary.discrepancy;
    println!(
        "cells={} classified={} predicate_agree={} predicate_disagree={} predicate_inconsistent={} swapped_agree={}",
        d.cells, d.classified, d.agree, d.disagree, d.predicate_inconsistent, d.swapped_agree
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClosenessSummary {
    tolerance: f64,
    cells: usize,
    filled: BTreeMap<&'static str, usize>,
}

fn closeness_command(grid: &Grid, tolerance: f64, pair: PairName, out: &Path, format: Option<Format>) -> Result<(), CliError> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(CliError::Validation(format!("--tolerance must be non-negative, got {tolerance}")));
    }
    let pairs: Vec<ClosenessPair> = match pair {
        PairName::ExactBorn => vec![ClosenessPair::ExactBorn],
        PairName::ExactGksl => vec![ClosenessPair::ExactGksl],
        PairName::Both => vec![ClosenessPair::ExactBorn, ClosenessPair::ExactGksl],
    };
    let maps = pairs
        .iter()
        .map(|&p| Ok((p, classify::closeness_map(grid, tolerance, p)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let cells = classify::region_map(grid);

    let mut header = vec!["dE_over_g", "gamma_over_g", "eta_exact", "eta_born", "eta_gksl"];
    header.extend(pairs.iter().map(|p| match p {
        ClosenessPair::ExactBorn => "close_born",
        ClosenessPair::ExactGksl => "close_gksl",
    }));
    let rows = cells.iter().enumerate().map(|(i, c)| {
        let mut row = vec![
            c.de_over_g.to_string(),
            c.gamma_over_g.to_string(),
            c.eta_exact.to_string(),
            c.eta_born.to_string(),
            c.eta_gksl.to_string(),
        ];
        row.extend(maps.iter().map(|(_, m)| m[i].to_string()));
        row
    });
    let csv = output::table_csv(&header, rows)?;
    let panels: Vec<(&str, &[bool])> = maps.iter().map(|(p, m)| (p.as_str(), m.as_slice())).collect();
    let image = svg::boolean_panels(grid, &panels);
    let summary = ClosenessSummary {
        tolerance,
        cells: grid.len(),
        filled: maps.iter().map(|(p, m)| (p.as_str(), m.iter().filter(|&&b| b).count())).collect(),
    };
    let json = to_json(&summary)?;
    match format {
        Some(Format::Csv) => write_atomic(out, &csv)?,
        Some(Format::Svg) => write_atomic(out, image.as_bytes())?,
        Some(Format::Json) => write_atomic(out, &json)?,
        None => {
            write_atomic(out, &csv)?;
            write_atomic(&sibling(out, "", "svg"), image.as_bytes())?;
        }
    }
    let counts: Vec<String> = summary.filled.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("cells={} tolerance={} {}", summary.cells, tolerance, counts.join(" "));
    Ok(())
}

#[derive(Debug, Serialize)]
struct VolterraReport {
    t_max: f64,
    dt: f64,
    sup_error: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct TriplePointReport {
    points: Vec<TriplePoint>,
    expected: (f64, f64),
    window: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    friedrichs: OracleReport,
    volterra_psi: VolterraReport,
    volterra_sigma: VolterraReport,
    triple_point: TriplePointReport,
    pass: bool,
}

fn verify(model: &Model, modes: usize, half_width: f64, t_max: Option<f64>, dt: Option<f64>) -> Result<VerifyReport, CliError> {
    let r = &model.reservoir;
    let t_max = t_max.unwrap_or(5.0 / r.gamma);
    let dt = dt.unwrap_or(1e-3 / r.gamma);
    let disc = DiscretizedReservoir::new(r, modes, half_width * r.gamma)?;
    let friedrichs = oracle::run_friedrichs_oracle(&model.initial, &model.system, &disc, t_max, 200)?;

    let basis = diagonalize(&model.system, r);
    let psi = oracle::volterra_psi(&model.initial, &basis, r, t_max, dt)?;
    let exact = evolve_exact(&model.initial, &basis, r, &psi.times)?;
    let psi_err = psi.psi.iter().zip(&exact.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let sigma = oracle::volterra_sigma(&model.initial, &basis, r, t_max, dt)?;
    let born = evolve_born(&model.initial, &basis, r, &sigma.times)?;
    let sigma_err = sigma.sigma.iter().zip(&born.states).map(|(a, b)| (a - b.sigma()).norm()).fold(0.0, f64::max);

    let triple_point = triple_point_report()?;
    let volterra_psi = VolterraReport { t_max, dt, sup_error: psi_err, pass: psi_err <= VOLTERRA_TOL };
    let volterra_sigma = VolterraReport { t_max, dt, sup_error: sigma_err, pass: sigma_err <= VOLTERRA_TOL };
    let pass = friedrichs.pass && volterra_psi.pass && volterra_sigma.pass && triple_point.pass;
    Ok(VerifyReport { friedrichs, volterra_psi, volterra_sigma, triple_point, pass })
}

fn triple_point_report() -> Result<TriplePointReport, CliError> {
    let points = classify::triple_point(1.0)?;
    let pass = points.iter().all(|p| {
        let agree = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs());
        (p.de_over_g.abs() - TRIPLE_POINT.0).abs() <= TRIPLE_POINT_WINDOW
            && (p.gamma_over_g - TRIPLE_POINT.1).abs() <= TRIPLE_POINT_WINDOW
            && agree(p.eta_exact, p.eta_born)
            && agree(p.eta_exact, p.eta_gksl)
            && agree(p.eta_born, p.eta_gksl)
    });
    Ok(TriplePointReport { points: points.to_vec(), expected: TRIPLE_POINT, window: TRIPLE_POINT_WINDOW, pass })
}
