//! Plain-text formats shared by the library and the CLI.
//!
//! * Matrix: a line holding `d`, then `d` lines of `d` whitespace-separated
//!   decimals.
//! * Distribution: a line holding `d`, then one line of `d` decimals.
//! * Trajectory: one 1-based state label per line.
//! * Key/value blocks: `key=value` lines.
//!
//! Blank lines and lines starting with `#` are ignored by every parser.
//! Annotation lines of the form `# key=value` can be recovered with
//! [`parse_annotations`]. Reals are written with 17 significant digits so
//! that every value survives a round trip bit-for-bit.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::chain::{validate_stochastic, ProbDist, StochasticMatrix, Trajectory, ROW_SUM_TOLERANCE};
use crate::error::{Error, Result};

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&exponent) {
        let decimals = (16 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: '{token}' is not a number")))
}

fn parse_dim(line: Option<(usize, &str)>) -> Result<usize> {
    let (n, l) = line.ok_or_else(|| Error::Parse("missing dimension line".into()))?;
    l.parse::<usize>()
        .map_err(|_| Error::Parse(format!("line {n}: '{l}' is not a dimension")))
}

/// Parses the raw square matrix without validating stochasticity.
pub fn parse_raw_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = content_lines(text);
    let d = parse_dim(lines.next())?;
    let mut values = Vec::with_capacity(d * d);
    for _ in 0..d {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {d} matrix rows")))?;
        let row: Vec<f64> = l
            .split_whitespace()
            .map(|t| parse_real(t, n))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::NotSquare);
        }
        values.extend(row);
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::Parse(format!("line {n}: unexpected content after matrix")));
    }
    Ok(DMatrix::from_row_slice(d, d, &values))
}

pub fn parse_matrix(text: &str) -> Result<StochasticMatrix> {
    validate_stochastic(&parse_raw_matrix(text)?, ROW_SUM_TOLERANCE)
}

pub fn write_matrix(m: &StochasticMatrix) -> String {
    let mut out = format!("{}\n", m.dim());
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&x| format_real(x)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_distribution(text: &str) -> Result<ProbDist> {
    let mut lines = content_lines(text);
    let d = parse_dim(lines.next())?;
    let (n, l) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing distribution line".into()))?;
    let weights: Vec<f64> = l
        .split_whitespace()
        .map(|t| parse_real(t, n))
        .collect::<Result<_>>()?;
    if weights.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: weights.len(),
        });
    }
    ProbDist::new(weights)
}

pub fn write_distribution(p: &ProbDist) -> String {
    let cells: Vec<String> = p.as_slice().iter().map(|&x| format_real(x)).collect();
    format!("{}\n{}\n", p.dim(), cells.join(" "))
}

/// Parses a trajectory of 1-based labels over `[d]`.
pub fn parse_trajectory(text: &str, d: usize) -> Result<Trajectory> {
    let mut states = Vec::new();
    for (n, l) in content_lines(text) {
        let label: i64 = l
            .parse()
            .map_err(|_| Error::Parse(format!("line {n}: '{l}' is not a state label")))?;
        if label < 1 || label > d as i64 {
            return Err(Error::StateOutOfRange { index: label, dim: d });
        }
        states.push((label - 1) as usize);
    }
    Trajectory::new(d, states)
}

pub fn write_trajectory(x: &Trajectory) -> String {
    let mut out = String::with_capacity(x.len() * 3);
    for &s in x.states() {
        let _ = writeln!(out, "{}", s + 1);
    }
    out
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvBlock {
    entries: Vec<(String, String)>,
}

impl KvBlock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_real(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, format_real(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Renders every line with `prefix` prepended (use `"# "` for
    /// annotations that matrix parsers skip).
    pub fn render(&self, prefix: &str) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{prefix}{k}={v}\n"))
            .collect()
    }

    /// Parses `key=value` lines, skipping blanks and `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut block = KvBlock::new();
        for (n, l) in content_lines(text) {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {n}: expected key=value")))?;
            block.push(k.trim(), v.trim());
        }
        Ok(block)
    }
}

impl std::fmt::Display for KvBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render(""))
    }
}

/// Collects `# key=value` annotation lines.
pub fn parse_annotations(text: &str) -> KvBlock {
    let mut block = KvBlock::new();
    for l in text.lines() {
        if let Some(rest) = l.trim().strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                block.push(k.trim(), v.trim());
            }
        }
    }
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::test_support::random_stochastic;
    use proptest::prelude::*;

    #[test]
    fn format_real_has_17_significant_digits() {
        assert_eq!(format_real(0.5), "0.50000000000000000");
        assert_eq!(format_real(1.0), "1.0000000000000000");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1e-9), "1.0000000000000001e-9");
    }

    #[test]
    fn matrix_text_layout() {
        let m = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let text = write_matrix(&m);
        assert!(text.starts_with("2\n"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }

    #[test]
    fn matrix_parser_skips_annotations() {
        let text = "# a comment\n2\n0.5 0.5\n\n0.1 0.9\n# closed.pi_min=0.2\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.get(1, 1), 0.9);
        assert_eq!(parse_annotations(text).get("closed.pi_min"), Some("0.2"));
    }

    #[test]
    fn matrix_parser_errors() {
        assert!(matches!(parse_matrix("2\n0.5 0.5\n"), Err(Error::Parse(_))));
        assert_eq!(parse_matrix("2\n0.5 0.5 0\n0.5 0.5\n"), Err(Error::NotSquare));
        assert!(matches!(
            parse_matrix("2\n0.5 0.5\n0.3 0.6\n"),
            Err(Error::RowSumOutOfTolerance(2, _))
        ));
        assert!(matches!(parse_matrix("x\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn trajectory_parsing() {
        let x = parse_trajectory("1\n2\n\n3\n", 3).unwrap();
        assert_eq!(x.states(), &[0, 1, 2]);
        assert_eq!(write_trajectory(&x), "1\n2\n3\n");
        assert_eq!(
            parse_trajectory("1\n4\n", 3),
            Err(Error::StateOutOfRange { index: 4, dim: 3 })
        );
        assert_eq!(
            parse_trajectory("0\n", 3),
            Err(Error::StateOutOfRange { index: 0, dim: 3 })
        );
        assert_eq!(parse_trajectory("", 3), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn distribution_parsing() {
        let p = parse_distribution("3\n0.2 0.3 0.5\n").unwrap();
        assert_eq!(p.as_slice(), &[0.2, 0.3, 0.5]);
        assert!(parse_distribution("3\n0.2 0.3\n").is_err());
    }

    #[test]
    fn kv_block_round_trip() {
        let mut b = KvBlock::new();
        b.push("a", 1).push_real("b", 0.25);
        let parsed = KvBlock::parse(&b.to_string()).unwrap();
        assert_eq!(parsed, b);
        assert_eq!(parsed.get("b"), Some("0.25000000000000000"));
    }

    proptest! {
        #[test]
        fn formats_reparse_exactly(d in 2usize..=7, seed in any::<u64>(), x in -1e30f64..1e30) {
            let m = random_stochastic(d, 0.2, seed);
            prop_assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m.clone());
            let p = ProbDist::new(m.row(0).to_vec()).unwrap();
            prop_assert_eq!(parse_distribution(&write_distribution(&p)).unwrap(), p);
            prop_assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }
}
