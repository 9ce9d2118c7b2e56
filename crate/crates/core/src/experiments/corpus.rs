//! Built-in test functions, addressed by `name[:key=value[,key=value]]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::airy::airy_ai;
use crate::approximant::FunctionSource;
use crate::error::{Error, Result};
use crate::geometry::Interval;

/// Identifiers accepted by [`CorpusFunction::parse`].
pub const IDS: [&str; 13] =
    ["const1", "expiw", "runge", "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8lit", "f8fix", "kink"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Const,
    ExpIw { omega: f64 },
    Runge,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8 { corrected: bool },
    Kink { at: f64 },
}

/// A named test function together with its natural domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFunction {
    id: String,
    kind: Kind,
    domain: Interval,
}

impl CorpusFunction {
    /// Parses `name[:key=value,...]`, e.g. `expiw:omega=20` or `kink:x0=0.13`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), parse_args(a)?),
            None => (spec, BTreeMap::new()),
        };
        let mut args = Args { name, map: args };
        let kind = match name {
            "const1" => Kind::Const,
            "expiw" => Kind::ExpIw { omega: args.take("omega")?.unwrap_or(1.0) },
            "runge" | "f1" => Kind::Runge,
            "f2" => Kind::F2,
            "f3" => Kind::F3,
            "f4" => Kind::F4,
            "f5" => Kind::F5,
            "f6" => Kind::F6,
            "f7" => Kind::F7,
            "f8lit" => Kind::F8 { corrected: false },
            "f8fix" => Kind::F8 { corrected: true },
            "kink" => Kind::Kink { at: args.take("x0")?.unwrap_or(0.0) },
            _ => return Err(Error::UnknownFunction(name.to_string())),
        };
        args.finish()?;
        let domain = Interval::new(-1.0, 1.0)?;
        if let Kind::Kink { at } = kind {
            if !domain.contains(at) {
                return Err(Error::invalid(format!("kink location {at} outside [-1, 1]")));
            }
        }
        Ok(CorpusFunction { id: spec.to_string(), kind, domain })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// One-line description of the function's frequency character.
    pub fn notes(&self) -> String {
        match self.kind {
            Kind::Const => "constant 1".into(),
            Kind::ExpIw { omega } => format!("e^(i pi {omega} x), single frequency"),
            Kind::Runge => "1/(1+25x^2), analytic with poles near the real axis".into(),
            Kind::F2 => "cos(200x^2), chirp, frequency grows toward the ends".into(),
            Kind::F3 => "Ai(-66-70x), oscillatory for x > -66/70".into(),
            Kind::F4 => "exp(sin(65.5 pi x - 27 pi) - cos(20.6 pi x)), high frequency".into(),
            Kind::F5 => "exp(sin(2.7 pi x) + cos(pi x)), smooth, low frequency".into(),
            Kind::F6 => "x^2 sin(10x)".into(),
            Kind::F7 => "1/(8-7x), pole just right of the domain".into(),
            Kind::F8 { corrected: false } => "piecewise 1 | sin(pi x) | x^2, jump at -1/2, kink at 0".into(),
            Kind::F8 { corrected: true } => "piecewise 1 | -sin(pi x) | x^2, C1 break at -1/2, kink at 0".into(),
            Kind::Kink { at } => format!("|x - {at}|"),
        }
    }

    /// Value at `x`, which must lie in the domain.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.domain.a(), b: self.domain.b() });
        }
        Ok(self.kind.value(x))
    }

    pub fn source(&self) -> FunctionSource {
        let kind = self.kind;
        FunctionSource::complex(move |x| kind.value(x))
    }
}

impl Kind {
    fn value(self, x: f64) -> Complex64 {
        let re = match self {
            Kind::Const => 1.0,
            Kind::ExpIw { omega } => return Complex64::from_polar(1.0, PI * omega * x),
            Kind::Runge => 1.0 / (1.0 + 25.0 * x * x),
            Kind::F2 => (200.0 * x * x).cos(),
            Kind::F3 => airy_ai(-66.0 - 70.0 * x),
            Kind::F4 => ((65.5 * PI * x - 27.0 * PI).sin() - (20.6 * PI * x).cos()).exp(),
            Kind::F5 => ((2.7 * PI * x).sin() + (PI * x).cos()).exp(),
            Kind::F6 => x * x * (10.0 * x).sin(),
            Kind::F7 => 1.0 / (8.0 - 7.0 * x),
            Kind::F8 { corrected } => {
                if x <= -0.5 {
                    1.0
                } else if x <= 0.0 {
                    let s = (PI * x).sin();
                    if corrected {
                        -s
                    } else {
                        s
                    }
                } else {
                    x * x
                }
            }
            Kind::Kink { at } => (x - at).abs(),
        };
        Complex64::new(re, 0.0)
    }
}

/// Value of corpus function `spec` at `x`.
pub fn corpus_eval(spec: &str, x: f64) -> Result<Complex64> {
    CorpusFunction::parse(spec)?.eval(x)
}

fn parse_args(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value in function spec, got `{part}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("`{}` is not a number in function spec", v.trim())))?;
        if !v.is_finite() {
            return Err(Error::invalid(format!("non-finite value for `{}`", k.trim())));
        }
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(Error::invalid(format!("duplicate key `{}` in function spec", k.trim())));
        }
    }
    Ok(out)
}

struct Args<'a> {
    name: &'a str,
    map: BTreeMap<String, f64>,
}

impl Args<'_> {
    fn take(&mut self, key: &str) -> Result<Option<f64>> {
        Ok(self.map.remove(key))
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::invalid(format!("`{}` takes no parameter `{k}`", self.name))),
            None => Ok(()),
        }
    }
}
