use std::fmt;
use std::fs;
use std::io::{self, Write};

use serde_json::{json, Value};
use thermal_pulses::correlations::{
    correlation_curve, g1_flat, g1_weak, g2_flat, g2_weak, CorrelationModel,
};
use thermal_pulses::fidelity_robustness::{sweep_gaussian_with, sweep_linear, FidelityConvention};
use thermal_pulses::input::{parse_grid, parse_spectrum_source, SpectrumSource};
use thermal_pulses::mode_basis::{independence_measure, lambda_matrix, localized_covariance};
use thermal_pulses::nalgebra::DMatrix;
use thermal_pulses::num_complex::Complex64;
use thermal_pulses::spectra::Spectrum;
use thermal_pulses::verification::{run_all, SuiteOptions};
use thermal_pulses::weak_limit::{expand, truncated_trace, weak_correlations};
use thermal_pulses::Error;

use crate::output::{num, Csv, OutputDir};
use crate::{Cli, Command, Common, Model, Unit, EXIT_CONFIG, EXIT_GUARDRAIL, EXIT_ORACLE};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guardrail(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Guardrail(_) => EXIT_GUARDRAIL,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Guardrail(msg) => f.write_str(msg),
            CliError::Io(err) => write!(f, "i/o failure: {err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::GuardrailExceeded { .. } => CliError::Guardrail(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Io(err)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<u8> {
    let common = &cli.common;
    match &cli.command {
        Command::Lambda => cmd_lambda(common),
        Command::Corr {
            z_grid,
            z_unit,
            model,
        } => cmd_correlations(common, z_grid, *z_unit, *model),
        Command::Weak {
            n,
            order,
            z_grid,
            z_unit,
        } => cmd_weak(common, *n, *order, z_grid, *z_unit),
        Command::SweepLinear {
            n_min,
            delta_grid,
            relative_grid,
        } => cmd_sweep_linear(common, n_min, delta_grid.as_deref(), relative_grid),
        Command::SweepGaussian {
            r_grid,
            omega0,
            half_range,
        } => cmd_sweep_gaussian(common, r_grid, *omega0, *half_range),
        Command::OracleCheck { seed, cutoff } => cmd_oracle_check(common, *seed, *cutoff),
    }
}

fn load_spectrum(common: &Common) -> CliResult<Spectrum> {
    match parse_spectrum_source(&common.spectrum)? {
        SpectrumSource::Builtin(b) => Ok(b.build(common.modes, common.length)?),
        SpectrumSource::File(path) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Config(format!("cannot read spectrum file {}: {e}", path.display()))
            })?;
            Ok(Spectrum::from_json(&text)?)
        }
    }
}

fn spectrum_record(common: &Common, spectrum: &Spectrum) -> Value {
    json!({
        "n_modes": spectrum.n_modes(),
        "length": spectrum.length(),
        "spectrum": common.spectrum,
        "convention": FidelityConvention::Squared.as_str(),
    })
}

fn positions(grid: &str, unit: Unit, n_modes: usize, length: f64) -> CliResult<(Vec<f64>, f64)> {
    let spacing = length / n_modes as f64;
    let raw = parse_grid(grid)?;
    let zs = match unit {
        Unit::Pulse => raw.iter().map(|k| k * spacing).collect(),
        Unit::Length => raw,
    };
    Ok((zs, spacing))
}

fn matrix_csv(q: i64, matrix: &DMatrix<Complex64>) -> Csv {
    let mut csv = Csv::new(&["s", "s_prime", "re", "im"]);
    for (i, s) in (-q..=q).enumerate() {
        for (j, t) in (-q..=q).enumerate() {
            let v = matrix[(i, j)];
            csv.row(&[s.to_string(), t.to_string(), num(v.re), num(v.im)]);
        }
    }
    csv
}

fn cmd_lambda(common: &Common) -> CliResult<u8> {
    let spectrum = load_spectrum(common)?;
    let q = spectrum.q() as i64;
    let mut out = OutputDir::create(&common.out)?;
    out.write("spectrum.json", &(spectrum.to_json() + "\n"))?;

    let covariance = localized_covariance(&spectrum)?;
    out.write_csv("covariance.csv", matrix_csv(q, covariance.matrix()))?;

    let lambda = match lambda_matrix(&spectrum) {
        Ok(lambda) => {
            out.write_csv("lambda.csv", matrix_csv(q, lambda.matrix()))?;
            Some(lambda)
        }
        Err(err @ Error::ZeroOccupation(_)) => {
            eprintln!("warning: {err}; lambda.csv not written");
            None
        }
        Err(err) => return Err(err.into()),
    };

    let measure = match independence_measure(&covariance) {
        Ok(x) => Some(x),
        Err(Error::ZeroMatrix) => None,
        Err(err) => return Err(err.into()),
    };
    out.write_json(
        "independence.json",
        &json!({
            "independence_measure": measure,
            "covariance_trace": covariance.trace(),
            "lambda_max_off_diagonal": lambda.as_ref().map(|l| l.max_off_diagonal()),
            "lambda_geometric_mean": lambda.as_ref().map(|l| l.geometric_mean()),
        }),
    )?;
    out.finish("lambda", spectrum_record(common, &spectrum))?;
    Ok(0)
}

fn cmd_correlations(common: &Common, grid: &str, unit: Unit, model: Model) -> CliResult<u8> {
    let spectrum = load_spectrum(common)?;
    let n_modes = spectrum.n_modes();
    let length = spectrum.length();
    let (zs, spacing) = positions(grid, unit, n_modes, length)?;

    let flat_value = || {
        spectrum.flat_value().ok_or_else(|| {
            CliError::Config("the flat and weak models need a flat spectrum".into())
        })
    };
    let correlation_model = match model {
        Model::General => CorrelationModel::General(spectrum.clone()),
        Model::Flat => CorrelationModel::Flat {
            n: flat_value()?,
            n_modes,
            length,
        },
        Model::Weak => CorrelationModel::Weak {
            n: flat_value()?,
            n_modes,
            length,
        },
    };
    let curve = correlation_curve(&correlation_model, &zs)?;

    let mut csv = Csv::new(&["z", "z_over_l", "g1", "g2", "g2_norm"]);
    for k in 0..curve.len() {
        csv.row(&[
            num(curve.zs[k]),
            num(curve.zs[k] / spacing),
            num(curve.g1[k]),
            num(curve.g2[k]),
            num(curve.g2_normalized[k]),
        ]);
    }
    let mut out = OutputDir::create(&common.out)?;
    out.write_csv("correlations.csv", csv)?;
    let mut record = spectrum_record(common, &spectrum);
    record["z_grid"] = json!(grid);
    record["z_unit"] = json!(format!("{unit:?}").to_lowercase());
    record["model"] = json!(format!("{model:?}").to_lowercase());
    out.finish("corr", record)?;
    Ok(0)
}

fn cmd_weak(common: &Common, n: f64, order: usize, grid: &str, unit: Unit) -> CliResult<u8> {
    let n_modes = common.modes;
    let length = common.length;
    let expansion = expand(n, n_modes, order)?;

    let mut terms = Csv::new(&["occupation", "photons", "weight", "probability"]);
    for t in expansion.terms() {
        let occupation: Vec<String> = t.occupation.iter().map(|p| p.to_string()).collect();
        terms.row(&[
            occupation.join(";"),
            t.photons().to_string(),
            num(t.weight),
            num(expansion.prefactor() * t.weight),
        ]);
    }
    let mut out = OutputDir::create(&common.out)?;
    out.write_csv("weak_terms.csv", terms)?;

    if order >= 1 {
        let (zs, spacing) = positions(grid, unit, n_modes, length)?;
        let mut csv = Csv::new(&[
            "z",
            "z_over_l",
            "g1_expansion",
            "g2_expansion",
            "g1_closed",
            "g2_closed",
            "g1_flat",
            "g2_flat",
        ]);
        for &z in &zs {
            let (g1, g2) = weak_correlations(&expansion, length, z)?;
            csv.row(&[
                num(z),
                num(z / spacing),
                num(g1),
                num(g2),
                num(g1_weak(n, n_modes, length)),
                num(g2_weak(n, n_modes, length, z)),
                num(g1_flat(n, n_modes, length)),
                num(g2_flat(n, n_modes, length, z)),
            ]);
        }
        out.write_csv("weak_correlations.csv", csv)?;
    }

    out.write_json(
        "weak_summary.json",
        &json!({
            "n": n,
            "n_modes": n_modes,
            "max_order": order,
            "epsilon": expansion.epsilon(),
            "epsilon_times_modes": expansion.epsilon_times_modes(),
            "prefactor": expansion.prefactor(),
            "term_count": expansion.terms().len(),
            "truncated_trace": truncated_trace(&expansion),
        }),
    )?;
    out.finish(
        "weak",
        json!({
            "n_modes": n_modes,
            "length": length,
            "n": n,
            "max_order": order,
            "z_grid": grid,
        }),
    )?;
    Ok(0)
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn cmd_sweep_linear(
    common: &Common,
    n_min_list: &str,
    delta_grid: Option<&str>,
    relative_grid: &str,
) -> CliResult<u8> {
    let n_modes = common.modes;
    let n_mins = parse_grid(n_min_list)?;
    let absolute = delta_grid.map(parse_grid).transpose()?;
    let relative = parse_grid(relative_grid)?;

    let mut out = OutputDir::create(&common.out)?;
    let mut curves = Vec::new();
    for &n_min in &n_mins {
        let grid: Vec<f64> = match &absolute {
            Some(g) => g.clone(),
            None => relative.iter().map(|x| x * n_min).collect(),
        };
        let sweep = sweep_linear(n_min, &grid, n_modes)?;
        let amplitude = sweep.amplitude();
        let mut csv = Csv::new(&[
            "coord",
            "fidelity_squared",
            "fidelity_amplitude",
            "delta_over_n_min",
            "n_max",
        ]);
        for ((&dn, &fidelity), &amp) in sweep.coords.iter().zip(&sweep.fidelity).zip(&amplitude) {
            let ratio = if n_min > 0.0 { dn / n_min } else { f64::NAN };
            csv.row(&[
                num(dn),
                num(fidelity),
                num(amp),
                num(ratio),
                num(n_min + dn),
            ]);
        }
        let name = format!("sweep_linear_n_min_{}.csv", label(n_min));
        out.write_csv(&name, csv)?;
        curves.push(json!({
            "file": name,
            "n_min": n_min,
            "strictly_decreasing": sweep.is_strictly_decreasing(),
        }));
    }

    out.finish(
        "sweep-linear",
        json!({
            "n_modes": n_modes,
            "length": common.length,
            "convention": FidelityConvention::Squared.as_str(),
            "coord": "delta_n",
            "delta_grid": delta_grid,
            "relative_grid": if delta_grid.is_none() { Some(relative_grid) } else { None },
            "curves": curves,
        }),
    )?;
    Ok(0)
}

fn cmd_sweep_gaussian(common: &Common, grid: &str, omega0: f64, half_range: f64) -> CliResult<u8> {
    let n_modes = common.modes;
    let rs = parse_grid(grid)?;
    let sweep = sweep_gaussian_with(&rs, n_modes, omega0, half_range)?;
    let amplitude = sweep.amplitude();
    let n_star = sweep.n_star.clone().unwrap_or_default();

    let mut csv = Csv::new(&[
        "coord",
        "fidelity_squared",
        "fidelity_amplitude",
        "n_star",
        "log10_r",
    ]);
    for k in 0..sweep.len() {
        csv.row(&[
            num(sweep.coords[k]),
            num(sweep.fidelity[k]),
            num(amplitude[k]),
            num(n_star[k]),
            num(sweep.coords[k].log10()),
        ]);
    }
    let mut out = OutputDir::create(&common.out)?;
    out.write_csv("sweep_gaussian.csv", csv)?;
    out.finish(
        "sweep-gaussian",
        json!({
            "n_modes": n_modes,
            "length": common.length,
            "convention": FidelityConvention::Squared.as_str(),
            "coord": "r",
            "r_grid": grid,
            "parameters": sweep.parameters,
            "non_increasing": sweep.is_non_increasing(),
        }),
    )?;
    Ok(0)
}

fn cmd_oracle_check(common: &Common, seed: u64, cutoff: Option<usize>) -> CliResult<u8> {
    let options = SuiteOptions {
        seed,
        guardrail: common.guardrail,
        cutoff,
    };
    let reports = run_all(&options)?;
    let passed = reports.iter().all(|r| r.passed);
    let report = json!({
        "passed": passed,
        "options": options,
        "suites": reports,
    });
    let mut out = OutputDir::create(&common.out)?;
    out.write_json("oracle_check.json", &report)?;
    out.finish(
        "oracle-check",
        json!({
            "seed": seed,
            "guardrail": common.guardrail,
            "cutoff": cutoff,
        }),
    )?;
    let text = serde_json::to_string_pretty(&report).map_err(io::Error::other)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(err) if err.kind() != io::ErrorKind::BrokenPipe => return Err(err.into()),
        _ => {}
    }
    Ok(if passed { 0 } else { EXIT_ORACLE })
}
