use std::path::{Path, PathBuf};

use boolflow::{FlowKind, IntegrationOptions, Scheme};
use serde::Serialize;

use crate::CliError;

/// Everything needed to rerun a command; embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub version: &'static str,
    pub network: Option<PathBuf>,
    pub scheme: Option<Scheme>,
    pub kind: Option<FlowKind>,
    pub gamma: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub sample_us: Option<String>,
    pub t_end: Option<f64>,
    pub mu_grid: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub require: Option<String>,
    pub renorm: Option<f64>,
    pub integration: Option<IntegrationOptions>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &'static str, seed: u64, out: Option<PathBuf>) -> Self {
        RunConfig {
            command,
            version: env!("CARGO_PKG_VERSION"),
            network: None,
            scheme: None,
            kind: None,
            gamma: None,
            x0: None,
            sample_us: None,
            t_end: None,
            mu_grid: None,
            samples: None,
            require: None,
            renorm: None,
            integration: None,
            seed,
            out,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    /// First line of every CSV artifact, without the leading `# `.
    pub fn csv_preamble(&self) -> String {
        format!("run_config={}", serde_json::to_string(self).expect("plain data"))
    }
}

/// Parses `1, 2.5 3` style lists.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::BadList(text.trim().to_string())))
        .collect()
}

/// `--gamma` takes either an inline list or a path to a file holding one.
pub fn parse_gamma(arg: &str) -> Result<Vec<f64>, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let body: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join(" ");
        let body = body.trim().strip_prefix("gamma").map(|b| b.trim_start().trim_start_matches('=')).unwrap_or(body.trim());
        parse_list(body)
    } else {
        parse_list(arg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_accept_commas_and_spaces() {
        assert_eq!(parse_list("1, 2.5 3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_list("1,x").is_err());
    }

    #[test]
    fn gamma_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.txt");
        std::fs::write(&path, "# rates\ngamma = 1, 1.414\n").unwrap();
        assert_eq!(parse_gamma(path.to_str().unwrap()).unwrap(), vec![1.0, 1.414]);
    }
}
