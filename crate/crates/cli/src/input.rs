//! Input decoding: friendly JSON shapes for rings, scalars and series, with
//! JSON-pointer diagnostics on schema violations.

use iwalg::padic::{PadicScalar, Prime};
use iwalg::series::{IwasawaSeries, SeriesRing};
use num_bigint::{BigInt, BigUint, Sign};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

/// Failure classes, mapped to exit codes by main.
#[derive(Debug)]
pub enum Failure {
    /// JSON-pointer plus message
    Schema(String, String),
    Domain(iwalg::Error),
}

impl From<iwalg::Error> for Failure {
    fn from(e: iwalg::Error) -> Self {
        Failure::Domain(e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Numeric defaults taken from the command line.
#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub precision: u32,
    pub degree: u32,
    pub seed: u64,
}

pub fn schema_err(pointer: &str, msg: impl Into<String>) -> Failure {
    Failure::Schema(pointer.to_string(), msg.into())
}

/// Deserialize with a JSON-pointer path on failure.
pub fn decode<T: DeserializeOwned>(v: Value, base: &str) -> CliResult<T> {
    match serde_path_to_error::deserialize(v) {
        Ok(t) => Ok(t),
        Err(e) => {
            let mut ptr = String::from(base);
            for seg in e.path().iter() {
                use serde_path_to_error::Segment;
                match seg {
                    Segment::Map { key } => {
                        ptr.push('/');
                        ptr.push_str(key);
                    }
                    Segment::Seq { index } => {
                        ptr.push('/');
                        ptr.push_str(&index.to_string());
                    }
                    Segment::Enum { variant } => {
                        ptr.push('/');
                        ptr.push_str(variant);
                    }
                    Segment::Unknown => ptr.push_str("/?"),
                }
            }
            if ptr.is_empty() {
                ptr.push('/');
            }
            Err(schema_err(&ptr, e.inner().to_string()))
        }
    }
}

/// Ring header; N and D fall back to the command-line defaults.
#[derive(Debug, Clone, Deserialize)]
pub struct RingInput {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub d: usize,
    #[serde(rename = "D")]
    pub degree: Option<u32>,
    #[serde(default)]
    pub level: u32,
}

impl RingInput {
    pub fn build(&self, cfg: &Config) -> CliResult<SeriesRing> {
        if self.p < 2 {
            return Err(schema_err("/ring/p", "p must be at least 2"));
        }
        Ok(SeriesRing::new(
            Prime {
                p: self.p,
                precision: self.n.unwrap_or(cfg.precision),
            },
            self.d,
            self.degree.unwrap_or(cfg.degree),
            self.level,
        ))
    }
}

/// A coefficient: a small integer, a decimal string (arbitrary size, sign
/// allowed), or a fully specified scalar object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoeffInput {
    Num(i64),
    Str(String),
    Full(PadicScalar),
}

impl CoeffInput {
    pub fn build(&self, p: u64, prec: u32, pointer: &str) -> CliResult<PadicScalar> {
        match self {
            CoeffInput::Num(v) => Ok(PadicScalar::from_i64(p, prec, *v)),
            CoeffInput::Str(s) => {
                let v = parse_decimal(s)
                    .ok_or_else(|| schema_err(pointer, format!("bad decimal string {s:?}")))?;
                let modulus = BigInt::from(p).pow(prec);
                let red = ((v % &modulus) + &modulus) % &modulus;
                let (_, mag) = red.into_parts();
                Ok(PadicScalar::from_biguint(p, prec, mag))
            }
            CoeffInput::Full(s) => {
                if s.p != p {
                    return Err(schema_err(pointer, "scalar prime differs from the ring"));
                }
                Ok(s.clone())
            }
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigInt> {
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, s),
    };
    if digits.is_empty() {
        return None;
    }
    let mag = BigUint::parse_bytes(digits.as_bytes(), 10)?;
    Some(BigInt::from_biguint(sign, mag))
}

#[derive(Debug, Clone, Deserialize)]
pub struct TermInput {
    pub exp: Vec<u32>,
    pub coeff: CoeffInput,
}

/// A series: ring header plus sparse terms.
#[derive(Debug, Clone, Deserialize)]
pub struct SeriesInput {
    pub ring: RingInput,
    #[serde(default)]
    pub denom_exp: u32,
    pub terms: Vec<TermInput>,
}

impl SeriesInput {
    pub fn build(&self, cfg: &Config, base: &str) -> CliResult<IwasawaSeries> {
        let ring = self.ring.build(cfg)?;
        let mut acc = IwasawaSeries::zero(ring);
        for (i, term) in self.terms.iter().enumerate() {
            let ptr = format!("{base}/terms/{i}");
            if term.exp.len() != ring.vars {
                return Err(schema_err(
                    &format!("{ptr}/exp"),
                    format!("expected {} exponents", ring.vars),
                ));
            }
            if term.exp.iter().sum::<u32>() > ring.degree {
                return Err(schema_err(
                    &format!("{ptr}/exp"),
                    "term beyond the truncation degree",
                ));
            }
            let c = term.coeff.build(
                ring.prime.p,
                ring.prime.precision,
                &format!("{ptr}/coeff"),
            )?;
            if c.level > ring.level {
                return Err(schema_err(
                    &format!("{ptr}/coeff"),
                    "coefficient level exceeds the ring level",
                ));
            }
            acc = acc
                .add(&IwasawaSeries::monomial(ring, term.exp.clone(), c))
                .map_err(Failure::Domain)?;
        }
        let mut out = acc;
        out.denom_exp = self.denom_exp;
        Ok(out)
    }
}

/// Render a valuation as a decimal (or fractional) string.
pub fn render_valuation(v: iwalg::padic::Valuation) -> String {
    use iwalg::padic::Valuation::*;
    match v {
        Finite(r) => {
            if *r.denom() == 1 {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        }
        Infinite => "infinite".into(),
        Exhausted => "exhausted".into(),
    }
}
