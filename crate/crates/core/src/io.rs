//! Text formats: posterior draws (`nu,tau`), datasets (`group,value`) and
//! flat `key=value` interval reports. Numbers are written with 17
//! significant digits so every `f64` survives a round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::samplers::oneway::OneWayGroup;
use crate::samplers::OneWayDataset;
use crate::solver::{Limits, PosteriorDraws, ToleranceInterval};

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    path: &str,
    header: &str,
) -> Result<()> {
    match lines.next() {
        Some((_, l)) if l.replace(' ', "") == header => Ok(()),
        Some((n, l)) => Err(parse_err(path, n, format!("expected header `{header}`, found `{l}`"))),
        None => Err(parse_err(path, 0, format!("empty file; expected header `{header}`"))),
    }
}

fn parse_number(path: &str, line: usize, field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("{field}: `{}` is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{field}: {v} is not finite")));
    }
    Ok(v)
}

fn split_pair<'a>(path: &str, line: usize, l: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = l.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(parse_err(path, line, format!("expected two comma-separated fields, found `{l}`"))),
    }
}

pub fn parse_draws(text: &str, path: &str) -> Result<PosteriorDraws> {
    let mut lines = data_lines(text);
    expect_header(&mut lines, path, "nu,tau")?;
    let mut pairs = Vec::new();
    for (n, l) in lines {
        let (a, b) = split_pair(path, n, l)?;
        let nu = parse_number(path, n, "nu", a)?;
        let tau = parse_number(path, n, "tau", b)?;
        if tau <= 0.0 {
            return Err(parse_err(path, n, format!("tau must be > 0, got {tau}")));
        }
        pairs.push((nu, tau));
    }
    if pairs.is_empty() {
        return Err(parse_err(path, 0, "no draws"));
    }
    PosteriorDraws::from_pairs(pairs)
}

pub fn read_draws(path: &Path) -> Result<PosteriorDraws> {
    parse_draws(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn format_draws(draws: &PosteriorDraws) -> String {
    let mut out = String::with_capacity(48 * draws.len() + 8);
    out.push_str("nu,tau\n");
    for d in draws.iter() {
        let _ = writeln!(out, "{},{}", fmt_f64(d.nu()), fmt_f64(d.tau()));
    }
    out
}

pub fn write_draws(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    fs::write(path, format_draws(draws))?;
    Ok(())
}

/// Grouped observations in file order of first appearance of each label.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub groups: Vec<OneWayGroup>,
}

impl DatasetFile {
    pub fn values(&self) -> Vec<f64> {
        self.groups.iter().flat_map(|g| g.values.iter().copied()).collect()
    }

    pub fn into_oneway(self) -> Result<OneWayDataset> {
        OneWayDataset::new(self.groups)
    }
}

pub fn parse_dataset(text: &str, path: &str) -> Result<DatasetFile> {
    let mut lines = data_lines(text);
    expect_header(&mut lines, path, "group,value")?;
    let mut groups: Vec<OneWayGroup> = Vec::new();
    for (n, l) in lines {
        let (label, v) = split_pair(path, n, l)?;
        let label = label.trim();
        if label.is_empty() {
            return Err(parse_err(path, n, "empty group label"));
        }
        let value = parse_number(path, n, "value", v)?;
        match groups.iter_mut().find(|g| g.label == label) {
            Some(g) => g.values.push(value),
            None => groups.push(OneWayGroup {
                label: label.to_string(),
                values: vec![value],
            }),
        }
    }
    if groups.is_empty() {
        return Err(parse_err(path, 0, "no observations"));
    }
    Ok(DatasetFile { groups })
}

pub fn read_dataset(path: &Path) -> Result<DatasetFile> {
    parse_dataset(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn format_dataset(dataset: &OneWayDataset) -> String {
    let mut out = String::from("group,value\n");
    for g in dataset.groups() {
        for &v in &g.values {
            let _ = writeln!(out, "{},{}", g.label, fmt_f64(v));
        }
    }
    out
}

/// A solved interval plus run provenance, written as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub interval: ToleranceInterval,
    pub posterior_mean_nu: f64,
    /// Echo of the inputs that determine the result, in output order.
    pub config: Vec<(String, String)>,
}

impl IntervalReport {
    pub fn new(interval: ToleranceInterval, draws: &PosteriorDraws) -> Self {
        Self {
            interval,
            posterior_mean_nu: draws.mean_nu(),
            config: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    /// `L` and `U`; unbounded ends are `-inf` / `inf`.
    pub fn limits(&self) -> (f64, f64) {
        (self.interval.lower(), self.interval.upper())
    }

    /// The stable one-line summary `method delta alpha L U`.
    pub fn summary_line(&self) -> String {
        let (l, u) = self.limits();
        format!(
            "{} {} {} {} {}",
            self.interval.method,
            self.interval.spec.delta,
            self.interval.spec.alpha,
            fmt_f64(l),
            fmt_f64(u)
        )
    }

    pub fn to_text(&self) -> String {
        let i = &self.interval;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("method", i.method.to_string());
        kv("delta", fmt_f64(i.spec.delta));
        kv("alpha", fmt_f64(i.spec.alpha));
        if let Limits::TwoSided(g) = i.limits {
            kv("A", fmt_f64(g.center()));
            kv("B", fmt_f64(g.half_length()));
        }
        let (l, u) = self.limits();
        kv("L", fmt_f64(l));
        kv("U", fmt_f64(u));
        kv("J", i.draws.to_string());
        kv("empirical_content", fmt_f64(i.empirical_content));
        if let Some(f) = i.achieved_fraction {
            kv("achieved_fraction", fmt_f64(f));
        }
        kv("posterior_mean_nu", fmt_f64(self.posterior_mean_nu));
        kv("root_tol", fmt_f64(i.spec.root_tol));
        for (k, v) in &self.config {
            kv(k, v.clone());
        }
        out
    }
}

/// Parses a `key=value` document into ordered pairs.
pub fn parse_key_values(text: &str, path: &str) -> Result<Vec<(String, String)>> {
    data_lines(text)
        .map(|(n, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| parse_err(path, n, format!("expected key=value, found `{l}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_one_sided, solve_proposed, CenterMode, CenterSearchConfig, Side, ToleranceSpec};

    #[test]
    fn draws_parse_with_comments_and_line_numbers() {
        let d = parse_draws("# header comment\nnu,tau\n0.5,1\n\n# mid\n-1e-3, 2.5\n", "d.csv").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.as_slice()[1].tau(), 2.5);

        let e = parse_draws("nu,tau\n0,1\n0,-1\n", "d.csv").unwrap_err();
        assert_eq!(e.to_string(), "d.csv:3: tau must be > 0, got -1");
        let e = parse_draws("nu,tau\n0,1\nNaN,1\n", "d.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_draws("nu,tau\n0,1\n0,inf\n", "d.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_draws("tau,nu\n0,1\n", "d.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(parse_draws("nu,tau\n1,2,3\n", "d.csv").is_err());
        assert!(parse_draws("nu,tau\n", "d.csv").is_err());
    }

    #[test]
    fn dataset_groups_keep_first_appearance_order() {
        let d = parse_dataset("group,value\nb,1\na,2\nb,3\n", "x.csv").unwrap();
        assert_eq!(d.groups[0].label, "b");
        assert_eq!(d.groups[0].values, vec![1.0, 3.0]);
        assert_eq!(d.values(), vec![1.0, 3.0, 2.0]);
        let e = parse_dataset("group,value\na,x\n", "x.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn report_limits_reconstruct_from_center_and_half_length() {
        let draws = PosteriorDraws::from_pairs((0..40).map(|i| (0.1 * i as f64, 1.0 + 0.01 * i as f64))).unwrap();
        let spec = ToleranceSpec::new(0.1, 0.05).unwrap();
        let iv = solve_proposed(&draws, &spec, CenterMode::Optimal, &CenterSearchConfig::default()).unwrap();
        let text = IntervalReport::new(iv, &draws).with("seed", 3).to_text();
        let kv = parse_key_values(&text, "r").unwrap();
        let get = |k: &str| kv.iter().find(|(a, _)| a == k).unwrap().1.parse::<f64>().unwrap();
        assert_eq!(get("L"), get("A") - get("B"));
        assert_eq!(get("U"), get("A") + get("B"));
        assert_eq!(kv.last().unwrap(), &("seed".to_string(), "3".to_string()));

        let up = solve_one_sided(&draws, &spec, Side::Upper).unwrap();
        let text = IntervalReport::new(up, &draws).to_text();
        assert!(!text.contains("\nA="));
        assert!(text.contains("L=-inf"));
    }
}
