//! Line-oriented `key = value` config files with `[section]` headers and `#`
//! comments. Sections used by the experiment drivers: `[problem]`, `[method]`,
//! `[mesh]`, `[adapt]`, `[output]`.

use crate::expr::parse_expr;
use crate::mesh::{make_lshape, make_structured_square, Side, Triangulation};
use crate::problem::{builtin_problem, ProblemSpec, Regime};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::str::FromStr;

/// Parsed config: section -> key -> value.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut section = String::from("");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Parse {
                        offset: lineno + 1,
                        msg: format!("malformed section header '{line}'"),
                    });
                }
                section = line[1..line.len() - 1].trim().to_string();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    offset: lineno + 1,
                    msg: format!("expected 'key = value', got '{line}'"),
                });
            };
            cfg.sections
                .entry(section.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("[{section}] {key} = '{v}' is not a number"))
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("[{section}] {key} = '{v}' is not an integer"))
            }),
        }
    }

    /// Build the problem described by `[problem]`: either a named builtin
    /// with numeric parameters, or custom coefficient expressions
    /// (`a`, `b1`, `b2`, `c`, `f`).
    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let sec = "problem";
        if let Some(name) = self.get(sec, "name") {
            let mut params = BTreeMap::new();
            for key in ["beta1", "beta2", "kappa2", "r", "s", "t"] {
                if let Some(v) = self.get_f64(sec, key)? {
                    params.insert(key.to_string(), v);
                }
            }
            let mut p = builtin_problem(name, &params)?;
            if let Some(r) = self.get(sec, "regime") {
                p.regime_hint = match r {
                    "coercive" => Regime::Coercive,
                    "general" => Regime::General,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "regime '{other}' (expected coercive|general)"
                        )))
                    }
                };
            }
            return Ok(p);
        }
        let need = |key: &str| -> Result<&str> {
            self.get(sec, key).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "[problem] needs either 'name' or coefficient expressions; '{key}' missing"
                ))
            })
        };
        let a = parse_expr(self.get(sec, "a").unwrap_or("1"))?;
        let b1 = parse_expr(self.get(sec, "b1").unwrap_or("0"))?;
        let b2 = parse_expr(self.get(sec, "b2").unwrap_or("0"))?;
        let c = parse_expr(self.get(sec, "c").unwrap_or("0"))?;
        let f = parse_expr(need("f")?)?;
        let regime = match self.get(sec, "regime").unwrap_or("general") {
            "coercive" => Regime::Coercive,
            _ => Regime::General,
        };
        Ok(ProblemSpec::from_exprs("custom", a, b1, b2, c, f, regime))
    }

    /// Build the initial mesh described by `[mesh]` (`kind = square|lshape`,
    /// `n`, and for the square a comma-separated `dirichlet` side list).
    pub fn build_mesh(&self) -> Result<Triangulation> {
        let kind = self.get("mesh", "kind").unwrap_or("square");
        let n = self.get_usize("mesh", "n")?.unwrap_or(4);
        match kind {
            "square" => {
                let sides: Vec<Side> = match self.get("mesh", "dirichlet") {
                    None | Some("all") => Side::ALL.to_vec(),
                    Some(list) => list
                        .split(',')
                        .map(|s| Side::from_str(s.trim()))
                        .collect::<Result<_>>()?,
                };
                make_structured_square(n, &sides)
            }
            "lshape" => make_lshape(n),
            other => Err(Error::UnknownName(format!("mesh kind '{other}'"))),
        }
    }
}
