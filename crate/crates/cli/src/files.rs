//! JSON input formats and pole literals.

use std::fs;
use std::io::Read;
use std::path::Path;

use polplace::Complex64;
use polplace::{AssignmentPlan, Matrix, Spectrum, StateSpace, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Reads a file, or standard input for `-`.
pub fn read_source(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?;
        return Ok(s);
    }
    fs::read_to_string(Path::new(path)).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

/// Parses `"a"`, `"a+bi"` or `"a-bi"`. Whitespace is ignored; only `i` marks
/// the imaginary unit.
pub fn parse_pole(text: &str) -> CliResult<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |why: &str| CliError::Input(format!("bad pole literal {text:?}: {why}"));
    let number = |part: &str| -> CliResult<f64> {
        let v: f64 = part.parse().map_err(|_| bad(&format!("{part:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("value is not finite"))
        }
    };
    if s.is_empty() {
        return Err(bad("empty"));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(number(&s)?, 0.0));
    };
    // the sign that starts the imaginary part: not leading, not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'))
        .ok_or_else(|| bad("expected the form a+bi or a-bi"))?;
    let (re, im) = body.split_at(split);
    if im.len() == 1 {
        return Err(bad("missing imaginary magnitude (write 1i, not i)"));
    }
    Ok(Complex64::new(number(re)?, number(im)?))
}

/// Comma-separated pole literals.
pub fn parse_pole_list(text: &str) -> CliResult<Spectrum> {
    let values = text
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_pole)
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Spectrum::new(values)?)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Pole {
    Number(f64),
    Text(String),
}

fn spectrum_of(poles: &[Pole]) -> CliResult<Spectrum> {
    let values = poles
        .iter()
        .map(|p| match p {
            Pole::Number(v) => Ok(Complex64::new(*v, 0.0)),
            Pole::Text(s) => parse_pole(s),
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Spectrum::new(values)?)
}

/// `{"n": 2, "A": [[0, 1], [0, 0]], "b": [0, 1]}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl SystemFile {
    pub fn parse(text: &str, what: &str) -> CliResult<SystemFile> {
        serde_json::from_str(text).map_err(|source| CliError::Json {
            what: what.into(),
            source,
        })
    }

    pub fn from_system(sys: &StateSpace, provenance: Option<String>) -> SystemFile {
        let n = sys.n();
        SystemFile {
            n,
            a: (0..n).map(|i| sys.a().row(i).iter().copied().collect()).collect(),
            b: sys.b().iter().copied().collect(),
            provenance,
        }
    }

    pub fn to_system(&self) -> CliResult<StateSpace> {
        let n = self.n;
        if self.a.len() != n || self.a.iter().any(|row| row.len() != n) {
            return Err(CliError::Input(format!("A must be {n}x{n} to match n = {n}")));
        }
        if self.b.len() != n {
            return Err(CliError::Input(format!(
                "b has {} entries, expected n = {n}",
                self.b.len()
            )));
        }
        let a = Matrix::from_fn(n, n, |i, j| self.a[i][j]);
        Ok(StateSpace::new(a, Vector::from_column_slice(&self.b))?)
    }
}

pub fn load_system(path: &str) -> CliResult<StateSpace> {
    SystemFile::parse(&read_source(path)?, path)?.to_system()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupEntry {
    #[serde(rename = "move")]
    mv: Vec<Pole>,
    to: Vec<Pole>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    poles: Option<Vec<Pole>>,
    groups: Option<Vec<GroupEntry>>,
}

/// Either a full target spectrum or ordered `(move, to)` groups.
#[derive(Clone, Debug, PartialEq)]
pub enum PlanFile {
    Poles(Spectrum),
    Groups(Vec<(Spectrum, Spectrum)>),
}

impl PlanFile {
    pub fn parse(text: &str, what: &str) -> CliResult<PlanFile> {
        let raw: RawPlan = serde_json::from_str(text).map_err(|source| CliError::Json {
            what: what.into(),
            source,
        })?;
        match (raw.poles, raw.groups) {
            (Some(p), None) => Ok(PlanFile::Poles(spectrum_of(&p)?)),
            (None, Some(g)) => {
                let groups = g
                    .iter()
                    .map(|e| Ok((spectrum_of(&e.mv)?, spectrum_of(&e.to)?)))
                    .collect::<CliResult<Vec<_>>>()?;
                // shape checks only; the partition is checked against the system later
                AssignmentPlan::new(groups.clone())?;
                Ok(PlanFile::Groups(groups))
            }
            _ => Err(CliError::Input(format!(
                "{what}: plan needs exactly one of \"poles\" or \"groups\""
            ))),
        }
    }

    pub fn load(path: &str) -> CliResult<PlanFile> {
        PlanFile::parse(&read_source(path)?, path)
    }
}
