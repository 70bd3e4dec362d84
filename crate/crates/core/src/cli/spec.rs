//! Channel spec files and small command-line value parsers.
//!
//! A spec file is a JSON object:
//!
//! ```json
//! {
//!   "k": 2,
//!   "in_sizes": [2, 2],
//!   "out_size": 2,
//!   "tensor": [[[0.95, 0.05], [0.95, 0.05]], [[0.95, 0.05], [0.05, 0.95]]],
//!   "costs": [{"phi": [0, 1]}, {"phi": [0, 1], "cap": 0.3}]
//! }
//! ```
//!
//! `tensor` nests one array level per sender, innermost the output row.
//! Instead of a tensor, `"builtin": "mod3_adder" | "mod2_adder" |
//! "multiplier"` with noise `"q"` names an example channel.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{tuples, CostSpec, KMac, SenderCost};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::types::TypeVector;

const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    k: Option<usize>,
    in_sizes: Option<Vec<usize>>,
    out_size: Option<usize>,
    tensor: Option<Value>,
    costs: Option<Vec<RawCost>>,
    builtin: Option<String>,
    q: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OutSpec<'a> {
    k: usize,
    in_sizes: &'a [usize],
    out_size: usize,
    tensor: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    costs: Vec<RawCost>,
}

/// Builtin example channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Mod3Adder,
    Mod2Adder,
    Multiplier,
}

impl Builtin {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mod3_adder" => Ok(Builtin::Mod3Adder),
            "mod2_adder" => Ok(Builtin::Mod2Adder),
            "multiplier" => Ok(Builtin::Multiplier),
            other => Err(Error::Spec(format!(
                "field `builtin`: unknown channel `{other}` (expected mod3_adder, mod2_adder or multiplier)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Mod3Adder => "mod3_adder",
            Builtin::Mod2Adder => "mod2_adder",
            Builtin::Multiplier => "multiplier",
        }
    }

    pub fn build(self, q: Option<f64>) -> Result<KMac> {
        match (self, q) {
            (Builtin::Mod3Adder, None) => Ok(KMac::mod3_adder()),
            (Builtin::Mod3Adder, Some(_)) => Err(Error::Spec("field `q`: mod3_adder is noiseless".into())),
            (b, q) => {
                let q = q.unwrap_or(0.0);
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Spec(format!("field `q`: {q} is not in [0, 1]")));
                }
                if b == Builtin::Mod2Adder {
                    KMac::mod2_adder(q)
                } else {
                    KMac::multiplier(q)
                }
            }
        }
    }
}

/// A parsed spec: the channel and per-sender costs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub mac: KMac,
    pub costs: CostSpec,
    pub name: String,
}

impl ChannelSpec {
    pub fn from_builtin(b: Builtin, q: Option<f64>) -> Result<Self> {
        let mac = b.build(q)?;
        let costs = CostSpec::unconstrained(&mac);
        let name = match q {
            Some(q) => format!("{}(q={q})", b.name()),
            None => b.name().to_string(),
        };
        Ok(Self { mac, costs, name })
    }

    /// Serializes with an explicit tensor, so builtins round-trip exactly.
    pub fn to_json(&self) -> String {
        let costs = if self.costs == CostSpec::unconstrained(&self.mac) {
            Vec::new()
        } else {
            self.costs
                .senders
                .iter()
                .map(|c| RawCost {
                    phi: Some(c.phi.clone()),
                    cap: c.cap,
                })
                .collect()
        };
        let out = OutSpec {
            k: self.mac.k(),
            in_sizes: self.mac.in_sizes(),
            out_size: self.mac.out_size(),
            tensor: nest(&self.mac, 0, &mut Vec::new()),
            costs,
        };
        serde_json::to_string_pretty(&out).expect("spec serializes")
    }
}

fn nest(mac: &KMac, depth: usize, prefix: &mut Vec<usize>) -> Value {
    if depth == mac.k() {
        let row = mac.row(prefix).expect("valid tuple");
        return Value::Array(row.probs().iter().map(|&p| Value::from(p)).collect());
    }
    let mut out = Vec::with_capacity(mac.in_sizes()[depth]);
    for x in 0..mac.in_sizes()[depth] {
        prefix.push(x);
        out.push(nest(mac, depth + 1, prefix));
        prefix.pop();
    }
    Value::Array(out)
}

fn path(prefix: &[usize]) -> String {
    let mut s = String::from("tensor");
    for i in prefix {
        s.push_str(&format!("[{i}]"));
    }
    s
}

/// Parses a spec document. Errors name the line and column of JSON syntax
/// problems, or the offending field.
pub fn parse_spec(text: &str) -> Result<ChannelSpec> {
    let raw: RawSpec = serde_json::from_str(text)
        .map_err(|e| Error::Spec(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let (mac, name) = match (&raw.builtin, &raw.tensor) {
        (Some(_), Some(_)) => {
            return Err(Error::Spec("fields `builtin` and `tensor` are mutually exclusive".into()));
        }
        (None, None) => return Err(Error::Spec("one of the fields `builtin` or `tensor` is required".into())),
        (Some(b), None) => {
            if raw.in_sizes.is_some() || raw.out_size.is_some() {
                return Err(Error::Spec(
                    "fields `in_sizes` and `out_size` are implied by `builtin`".into(),
                ));
            }
            let b = Builtin::parse(b)?;
            let mac = b.build(raw.q)?;
            if let Some(k) = raw.k {
                if k != mac.k() {
                    return Err(Error::Spec(format!("field `k`: {k} does not match the builtin")));
                }
            }
            (mac, b.name().to_string())
        }
        (None, Some(tensor)) => {
            if raw.q.is_some() {
                return Err(Error::Spec("field `q` is only valid with `builtin`".into()));
            }
            let in_sizes = raw.in_sizes.clone().ok_or_else(|| Error::Spec("missing field `in_sizes`".into()))?;
            let out_size = raw.out_size.ok_or_else(|| Error::Spec("missing field `out_size`".into()))?;
            let k = raw.k.unwrap_or(in_sizes.len());
            if k != in_sizes.len() || k == 0 {
                return Err(Error::Spec(format!(
                    "field `k`: {k} senders but `in_sizes` has {} entries",
                    in_sizes.len()
                )));
            }
            if in_sizes.contains(&0) || out_size == 0 {
                return Err(Error::Spec("alphabet sizes must be at least 1".into()));
            }
            let total = in_sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
            if total.is_none_or(|t| t.saturating_mul(out_size) > 1 << 24) {
                return Err(Error::Spec("field `in_sizes`: channel tensor too large".into()));
            }
            let mut rows = Vec::new();
            for t in tuples(&in_sizes) {
                let mut node = tensor;
                for (depth, &x) in t.iter().enumerate() {
                    let arr = node.as_array().ok_or_else(|| {
                        Error::Spec(format!("field `{}`: expected an array", path(&t[..depth])))
                    })?;
                    if arr.len() != in_sizes[depth] {
                        return Err(Error::Spec(format!(
                            "field `{}`: expected {} entries, found {}",
                            path(&t[..depth]),
                            in_sizes[depth],
                            arr.len()
                        )));
                    }
                    node = &arr[x];
                }
                let arr = node
                    .as_array()
                    .ok_or_else(|| Error::Spec(format!("field `{}`: expected a row array", path(&t))))?;
                if arr.len() != out_size {
                    return Err(Error::Spec(format!(
                        "field `{}`: row has {} entries, expected {out_size}",
                        path(&t),
                        arr.len()
                    )));
                }
                let mut probs = Vec::with_capacity(out_size);
                for (j, v) in arr.iter().enumerate() {
                    let p = v.as_f64().ok_or_else(|| {
                        Error::Spec(format!("field `{}[{j}]`: expected a number", path(&t)))
                    })?;
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(Error::Spec(format!("field `{}[{j}]`: {p} is not a probability", path(&t))));
                    }
                    probs.push(p);
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > ROW_TOL {
                    return Err(Error::Spec(format!("field `{}`: row sums to {sum}", path(&t))));
                }
                rows.push(Pmf::new(probs).map_err(|e| Error::Spec(format!("field `{}`: {e}", path(&t))))?);
            }
            (KMac::new(in_sizes, out_size, rows)?, "spec".to_string())
        }
    };
    let costs = match raw.costs {
        None => CostSpec::unconstrained(&mac),
        Some(list) => {
            if list.len() != mac.k() {
                return Err(Error::Spec(format!(
                    "field `costs`: {} entries for {} senders",
                    list.len(),
                    mac.k()
                )));
            }
            let senders = list
                .into_iter()
                .enumerate()
                .map(|(i, c)| {
                    let size = mac.in_sizes()[i];
                    let phi = c.phi.unwrap_or_else(|| (0..size).map(|x| x as f64).collect());
                    if phi.len() != size {
                        return Err(Error::Spec(format!(
                            "field `costs[{i}].phi`: {} entries for alphabet size {size}",
                            phi.len()
                        )));
                    }
                    SenderCost::new(phi, c.cap).map_err(|e| Error::Spec(format!("field `costs[{i}]`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            CostSpec::new(&mac, senders)?
        }
    };
    Ok(ChannelSpec { mac, costs, name })
}

/// Comma-separated probabilities, e.g. `0.5,0.5`.
pub fn parse_pmf(s: &str) -> Result<Pmf> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Spec(format!("`{}` is not a number", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    Pmf::new(values)
}

/// Comma-separated non-negative integers, e.g. `3,3`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Spec(format!("`{}` is not a count", v.trim())))
        })
        .collect()
}

/// A type given by its letter counts.
pub fn parse_type(s: &str) -> Result<TypeVector> {
    TypeVector::new(parse_counts(s)?)
}

/// A word over `{0, .., alphabet-1}` given as digits, with optional commas.
pub fn parse_word(s: &str, alphabet: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = if s.contains(',') { s.split(',').collect() } else { s.trim().split("").filter(|p| !p.is_empty()).collect() };
    parts
        .into_iter()
        .map(|p| {
            let v: usize = p.trim().parse().map_err(|_| Error::Spec(format!("`{p}` is not a letter")))?;
            if v >= alphabet {
                return Err(Error::Spec(format!("letter {v} outside alphabet of size {alphabet}")));
            }
            Ok(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_round_trip_is_exact() {
        for (b, q) in [
            (Builtin::Mod3Adder, None),
            (Builtin::Mod2Adder, Some(0.05)),
            (Builtin::Multiplier, Some(0.1)),
            (Builtin::Multiplier, Some(1.0 / 3.0)),
        ] {
            let spec = ChannelSpec::from_builtin(b, q).unwrap();
            let again = parse_spec(&spec.to_json()).unwrap();
            assert_eq!(again.mac, spec.mac);
            for (r, s) in again.mac.rows().iter().zip(spec.mac.rows()) {
                for (a, c) in r.probs().iter().zip(s.probs()) {
                    assert_eq!(a.to_bits(), c.to_bits());
                }
            }
        }
    }

    #[test]
    fn explicit_tensor_with_costs() {
        let text = r#"{
            "k": 2, "in_sizes": [2, 2], "out_size": 2,
            "tensor": [[[0.95, 0.05], [0.95, 0.05]], [[0.95, 0.05], [0.05, 0.95]]],
            "costs": [{}, {"phi": [0, 1], "cap": 0.3}]
        }"#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.mac, KMac::multiplier(0.05).unwrap());
        assert_eq!(spec.costs.sender(0).cap, None);
        assert_eq!(spec.costs.sender(1).cap, Some(0.3));
        assert_eq!(spec.costs.sender(0).phi, vec![0.0, 1.0]);
        let again = parse_spec(&spec.to_json()).unwrap();
        assert_eq!(again, ChannelSpec { name: "spec".into(), ..spec });
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = parse_spec("{\n  \"k\": 2,\n  \"in_sizes\": [2, 2\n}").unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        let err = parse_spec(r#"{"builtin": "mod3_adder", "tensor": []}"#).unwrap_err().to_string();
        assert!(err.contains("mutually exclusive"));
        let err = parse_spec(r#"{"in_sizes": [2], "out_size": 2, "tensor": [[0.5, 0.4], [1, 0]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("tensor[0]") && err.contains("sums to"), "{err}");
        let err = parse_spec(r#"{"in_sizes": [2], "out_size": 2, "tensor": [[0.5, 0.5]]}"#).unwrap_err().to_string();
        assert!(err.contains("expected 2 entries"), "{err}");
        assert!(parse_spec(r#"{"builtin": "mod2_adder", "q": 0.1, "extra": 1}"#).is_err());
        assert!(parse_spec(r#"{"builtin": "mod2_adder", "q": 1.5}"#).is_err());
        assert!(parse_spec(r#"{"builtin": "mod3_adder", "q": 0.1}"#).is_err());
        assert!(parse_spec(r#"{"builtin": "xor"}"#).is_err());
        let err = parse_spec(r#"{"builtin": "multiplier", "costs": [{"phi": [0, 1, 2]}, {}]}"#).unwrap_err().to_string();
        assert!(err.contains("costs[0].phi"), "{err}");
    }

    #[test]
    fn value_parsers() {
        assert_eq!(parse_pmf("0.5, 0.5").unwrap().probs(), &[0.5, 0.5]);
        assert!(parse_pmf("0.5,0.4").is_err());
        assert!(parse_pmf("a").is_err());
        assert_eq!(parse_counts("3,3").unwrap(), vec![3, 3]);
        assert!(parse_type("0,0").is_err());
        assert_eq!(parse_word("0110", 2).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(parse_word("0,2,1", 3).unwrap(), vec![0, 2, 1]);
        assert!(parse_word("012", 2).is_err());
    }
}
