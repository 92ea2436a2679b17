//! JSON spec files.
//!
//! Coding spec:
//! ```json
//! { "alphabet": ["a","b"], "a": ["a","b"], "n": [2,2], "r": [0],
//!   "tail": { "preperiod": 0, "period_a": ["a","b"], "period_n": [2], "period_r": [0] } }
//! ```
//! `tail.period_a` may be replaced by `"growing": {"base": [..], "seps": [..]}`.
//! Sturmian spec: `{ "cf": [1, 2], "tail": { "preperiod": 0, "period": [1] } }`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Alphabet, CodingSpec, Letter, SturmianSpec, SturmianTail, Tail, TailLetters};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrowing {
    base: Vec<String>,
    seps: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    preperiod: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period_a: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growing: Option<RawGrowing>,
    period_n: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period_r: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawCoding {
    alphabet: Vec<String>,
    a: Vec<String>,
    n: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<RawTail>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSturmTail {
    preperiod: usize,
    period: Vec<u64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSturm {
    cf: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<RawSturmTail>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnySpec {
    Coding(CodingSpec),
    Sturmian(SturmianSpec),
}

impl AnySpec {
    pub fn coding(self) -> Result<CodingSpec> {
        match self {
            AnySpec::Coding(c) => Ok(c),
            AnySpec::Sturmian(_) => Err(Error::Spec(
                "a simple Toeplitz spec is required, got a Sturmian spec".into(),
            )),
        }
    }

    pub fn sturmian(self) -> Result<SturmianSpec> {
        match self {
            AnySpec::Sturmian(s) => Ok(s),
            AnySpec::Coding(_) => Err(Error::Spec(
                "a Sturmian spec is required, got a simple Toeplitz spec".into(),
            )),
        }
    }
}

fn json_err(origin: &str, e: serde_json::Error) -> Error {
    Error::Spec(format!(
        "{origin}: line {}, column {}: {e}",
        e.line(),
        e.column()
    ))
}

fn letters(al: &Alphabet, field: &str, names: &[String]) -> Result<Vec<Letter>> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            al.id(n)
                .ok_or_else(|| Error::Spec(format!("{field}[{i}]: unknown letter {n:?}")))
        })
        .collect()
}

fn coding_from_raw(raw: RawCoding) -> Result<CodingSpec> {
    let al = Alphabet::new(raw.alphabet)?;
    let a = letters(&al, "a", &raw.a)?;
    let tail = match raw.tail {
        None => None,
        Some(t) => {
            let tl = match (t.period_a, t.growing) {
                (Some(p), None) => TailLetters::Periodic(letters(&al, "tail.period_a", &p)?),
                (None, Some(g)) => TailLetters::Growing {
                    base: letters(&al, "tail.growing.base", &g.base)?,
                    seps: letters(&al, "tail.growing.seps", &g.seps)?,
                },
                _ => {
                    return Err(Error::Spec(
                        "tail: exactly one of period_a and growing is required".into(),
                    ))
                }
            };
            Some(Tail {
                preperiod: t.preperiod,
                letters: tl,
                period_n: t.period_n,
                period_r: t.period_r,
            })
        }
    };
    CodingSpec::new(al, a, raw.n, raw.r, tail)
}

/// Parses either kind of spec; a top-level `cf` field selects the Sturmian kind.
pub fn parse_spec_str(text: &str, origin: &str) -> Result<AnySpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| json_err(origin, e))?;
    if value.get("cf").is_some() {
        let raw: RawSturm = serde_json::from_str(text).map_err(|e| json_err(origin, e))?;
        let tail = raw.tail.map(|t| SturmianTail {
            preperiod: t.preperiod,
            period: t.period,
        });
        Ok(AnySpec::Sturmian(SturmianSpec::new(raw.cf, tail)?))
    } else {
        let raw: RawCoding = serde_json::from_str(text).map_err(|e| json_err(origin, e))?;
        coding_from_raw(raw)
            .map(AnySpec::Coding)
            .map_err(|e| match e {
                Error::Spec(m) => Error::Spec(format!("{origin}: {m}")),
                e => e,
            })
    }
}

/// Reads a spec file; `bundled:<name>` selects one of the built-in specs.
pub fn parse_spec_file(path: &Path) -> Result<AnySpec> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("bundled:")) {
        return bundled(name);
    }
    let text = std::fs::read_to_string(path)?;
    parse_spec_str(&text, &path.display().to_string())
}

pub const BUNDLED: &[(&str, &str)] = &[
    ("pd", include_str!("../specs/pd.json")),
    ("grigorchuk", include_str!("../specs/grigorchuk.json")),
    ("gen_grigorchuk", include_str!("../specs/gen_grigorchuk.json")),
    ("nonb", include_str!("../specs/nonb.json")),
    ("fibonacci", include_str!("../specs/fibonacci.json")),
];

pub fn bundled(name: &str) -> Result<AnySpec> {
    let name = name.trim_end_matches(".json");
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Spec(format!("no bundled spec named {name:?}")))
        .and_then(|(n, text)| parse_spec_str(text, &format!("bundled:{n}")))
}

pub fn coding_to_json(spec: &CodingSpec) -> String {
    let names = |w: &[Letter]| -> Vec<String> {
        w.iter().map(|&l| spec.alphabet.name(l).to_string()).collect()
    };
    let raw = RawCoding {
        alphabet: spec.alphabet.names().to_vec(),
        a: names(&spec.a),
        n: spec.n.clone(),
        r: spec.r.clone(),
        tail: spec.tail.as_ref().map(|t| {
            let (period_a, growing) = match &t.letters {
                TailLetters::Periodic(p) => (Some(names(p)), None),
                TailLetters::Growing { base, seps } => (
                    None,
                    Some(RawGrowing {
                        base: names(base),
                        seps: names(seps),
                    }),
                ),
            };
            RawTail {
                preperiod: t.preperiod,
                period_a,
                growing,
                period_n: t.period_n.clone(),
                period_r: t.period_r.clone(),
            }
        }),
    };
    serde_json::to_string_pretty(&raw).expect("spec serializes")
}
