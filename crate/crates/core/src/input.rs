//! Text formats accepted on the command line: spectrum sources and grids.
//!
//! A spectrum source is either a path to a JSON spectrum file or a builtin
//! constructor such as `builtin:linear:n_min=0.1,n_max=0.3`. Grids are
//! comma-separated lists, `linspace:start:stop:count` or
//! `geomspace:start:stop:count`.

use std::path::PathBuf;

use crate::spectra::{
    make_blackbody, make_flat, make_gaussian, make_linear, Spectrum, GAUSSIAN_HALF_RANGE,
};
use crate::{Error, Result};

pub const BUILTIN_PREFIX: &str = "builtin:";

/// Upper bound on the number of points a grid spec may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSpectrum {
    Flat { n: f64 },
    Linear { n_min: f64, n_max: f64 },
    Gaussian { r: f64, omega0: f64, half_range: f64 },
    Blackbody { theta_min: f64, theta_max: f64 },
}

impl BuiltinSpectrum {
    pub fn build(&self, n_modes: usize, length: f64) -> Result<Spectrum> {
        match *self {
            BuiltinSpectrum::Flat { n } => make_flat(n_modes, n, length),
            BuiltinSpectrum::Linear { n_min, n_max } => make_linear(n_modes, n_min, n_max, length),
            BuiltinSpectrum::Gaussian { r, omega0, half_range } => {
                make_gaussian(n_modes, r, omega0, half_range, length)
            }
            BuiltinSpectrum::Blackbody { theta_min, theta_max } => {
                make_blackbody(n_modes, theta_min, theta_max, length)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinSpectrum::Flat { .. } => "flat",
            BuiltinSpectrum::Linear { .. } => "linear",
            BuiltinSpectrum::Gaussian { .. } => "gaussian",
            BuiltinSpectrum::Blackbody { .. } => "blackbody",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Builtin(BuiltinSpectrum),
    File(PathBuf),
}

fn parse_number(key: &str, text: &str) -> Result<f64> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{text}' as a number")))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Parse(format!("{key}: value must be finite")))
    }
}

struct Params<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(text: &'a str, allowed: &[&str]) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, found '{item}'")))?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(Error::Parse(format!("unknown parameter '{key}'")));
            }
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(Error::Parse(format!("parameter '{key}' given twice")));
            }
            pairs.push((key, value));
        }
        Ok(Params { pairs })
    }

    fn optional(&self, key: &str) -> Result<Option<f64>> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(k, v)| parse_number(k, v))
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.optional(key)?
            .ok_or_else(|| Error::Parse(format!("missing parameter '{key}'")))
    }
}

/// Parses the part after `builtin:`, e.g. `gaussian:r=0.1,half_range=4`.
pub fn parse_builtin(text: &str) -> Result<BuiltinSpectrum> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind.trim() {
        "flat" => {
            let p = Params::parse(rest, &["n"])?;
            Ok(BuiltinSpectrum::Flat { n: p.required("n")? })
        }
        "linear" => {
            let p = Params::parse(rest, &["n_min", "n_max"])?;
            Ok(BuiltinSpectrum::Linear {
                n_min: p.required("n_min")?,
                n_max: p.required("n_max")?,
            })
        }
        "gaussian" => {
            let p = Params::parse(rest, &["r", "omega0", "half_range"])?;
            Ok(BuiltinSpectrum::Gaussian {
                r: p.required("r")?,
                omega0: p.optional("omega0")?.unwrap_or(0.0),
                half_range: p.optional("half_range")?.unwrap_or(GAUSSIAN_HALF_RANGE),
            })
        }
        "blackbody" => {
            let p = Params::parse(rest, &["theta_min", "theta_max"])?;
            Ok(BuiltinSpectrum::Blackbody {
                theta_min: p.required("theta_min")?,
                theta_max: p.required("theta_max")?,
            })
        }
        other => Err(Error::Parse(format!("unknown builtin spectrum '{other}'"))),
    }
}

/// Anything that does not start with `builtin:` is taken as a file path.
pub fn parse_spectrum_source(text: &str) -> Result<SpectrumSource> {
    match text.strip_prefix(BUILTIN_PREFIX) {
        Some(rest) => parse_builtin(rest).map(SpectrumSource::Builtin),
        None if text.trim().is_empty() => Err(Error::Parse("empty spectrum source".into())),
        None => Ok(SpectrumSource::File(PathBuf::from(text))),
    }
}

fn parse_count(text: &str) -> Result<usize> {
    let count: usize = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{text}' as a point count")))?;
    if count == 0 || count > MAX_GRID_POINTS {
        return Err(Error::Parse(format!(
            "point count must be between 1 and {MAX_GRID_POINTS}, got {count}"
        )));
    }
    Ok(count)
}

fn spaced(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut points: Vec<f64> = (0..count).map(|k| start + k as f64 * step).collect();
    points[count - 1] = stop;
    points
}

/// Expands a grid spec into its points. No ordering is imposed here; the
/// consumer validates the grid against its own requirements.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("linspace:") {
        let (start, stop, count) = range_parts(rest)?;
        return Ok(spaced(start, stop, count));
    }
    if let Some(rest) = text.strip_prefix("geomspace:") {
        let (start, stop, count) = range_parts(rest)?;
        if start <= 0.0 || stop <= 0.0 {
            return Err(Error::Parse("geomspace endpoints must be positive".into()));
        }
        let logs = spaced(start.ln(), stop.ln(), count);
        let mut points: Vec<f64> = logs.into_iter().map(f64::exp).collect();
        points[0] = start;
        if count > 1 {
            points[count - 1] = stop;
        }
        return Ok(points);
    }
    if text.is_empty() {
        return Err(Error::Parse("empty grid".into()));
    }
    let points = text
        .split(',')
        .map(|item| parse_number("grid", item))
        .collect::<Result<Vec<f64>>>()?;
    if points.len() > MAX_GRID_POINTS {
        return Err(Error::Parse(format!("more than {MAX_GRID_POINTS} grid points")));
    }
    Ok(points)
}

fn range_parts(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => Ok((
            parse_number("start", start)?,
            parse_number("stop", stop)?,
            parse_count(count)?,
        )),
        _ => Err(Error::Parse(format!("expected start:stop:count, found '{text}'"))),
    }
}
