//! Plain-text `key = value` configuration and platform profile files.
//!
//! Blank lines and `#` comments are ignored. Durations accept `ns`, `us`,
//! `µs`, `ms` and `s` suffixes; a bare number is seconds.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::noise::PlatformProfile;

/// Parsed key/value pairs remembering the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    pub origin: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, origin: impl Into<PathBuf>) -> Result<Self> {
        let origin = origin.into();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin,
                    line: i + 1,
                    message: format!("expected key = value, got '{line}'"),
                });
            };
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            if key.is_empty() {
                return Err(Error::Parse {
                    path: origin,
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    path: origin,
                    line: i + 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(KeyValues { origin, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Applies `parse` to the value of `key`, attributing failures to its line.
    pub fn get<T>(&self, key: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => parse(v).map(Some).map_err(|e| Error::Parse {
                path: self.origin.clone(),
                line: *line,
                message: format!("{key}: {}", strip_prefix(&e)),
            }),
        }
    }

    /// Errors on the first key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::Parse {
                path: self.origin.clone(),
                line: *line,
                message: format!("unknown key '{k}'"),
            }),
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidArgument(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("'{s}' is not a number")))?;
    if v.is_nan() {
        return Err(Error::invalid("NaN is not allowed"));
    }
    Ok(v)
}

pub fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("'{s}' is not a non-negative integer")))
}

/// Seconds from a number with an optional time-unit suffix.
pub fn parse_duration(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = [("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("ms", 1e-3), ("s", 1.0)]
        .iter()
        .find_map(|(suffix, scale)| t.strip_suffix(suffix).map(|n| (n.trim(), *scale)))
        .unwrap_or((t, 1.0));
    let v = if num.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        parse_f64(num)?
    };
    if v < 0.0 {
        return Err(Error::invalid(format!("duration '{s}' is negative")));
    }
    Ok(v * scale)
}

/// `a..b` or `a-b` (inclusive), or a single seed.
pub fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>> {
    let t = s.trim();
    let bad = || Error::invalid(format!("'{s}' is not a seed range like 42..91"));
    let (a, b) = match t.split_once("..").or_else(|| t.split_once('-')) {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (t, t),
    };
    let a: u64 = a.parse().map_err(|_| bad())?;
    let b: u64 = b.parse().map_err(|_| bad())?;
    if a > b {
        return Err(Error::invalid(format!("seed range {a}..{b} is empty")));
    }
    Ok(a..=b)
}

/// Comma list (`4,6,8`) or stepped inclusive range (`4..20:2`).
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let t = s.trim();
    let out = if let Some((range, step)) = t.split_once(':') {
        let r = parse_seed_range(range)?;
        let step = parse_usize(step)?;
        if step == 0 {
            return Err(Error::invalid("step must be >= 1"));
        }
        (*r.start()..=*r.end()).step_by(step).map(|x| x as usize).collect()
    } else if t.contains("..") {
        let r = parse_seed_range(t)?;
        (*r.start()..=*r.end()).map(|x| x as usize).collect()
    } else {
        t.split(',').map(parse_usize).collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() {
        return Err(Error::invalid("list is empty"));
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_names(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

const PROFILE_KEYS: [&str; 8] = ["name", "t1", "t2", "gate_error_p", "t_gate", "t_meas_total", "readout_error", "t_ext"];

/// Profile from `key = value` text; keys absent from the file fall back to
/// the built-in profile named by `base` (or by `name`), when there is one.
pub fn profile_from_kv(kv: &KeyValues) -> Result<PlatformProfile> {
    kv.reject_unknown(&[&PROFILE_KEYS[..], &["base"]].concat())?;
    let name = kv.raw("name").map(str::to_string);
    let base_name = kv.raw("base").map(str::to_string).or_else(|| name.clone());
    let base = base_name.as_deref().and_then(PlatformProfile::builtin);
    let need = |key: &str, fallback: Option<f64>, parse: fn(&str) -> Result<f64>| -> Result<f64> {
        kv.get(key, parse)?
            .or(fallback)
            .ok_or_else(|| Error::invalid(format!("{}: missing key '{key}'", kv.origin.display())))
    };
    let b = base.as_ref();
    let profile = PlatformProfile {
        name: name.or_else(|| b.map(|p| p.name.clone())).unwrap_or_else(|| "custom".into()),
        t1: need("t1", b.map(|p| p.t1), parse_duration)?,
        t2: need("t2", b.map(|p| p.t2), parse_duration)?,
        gate_error_p: need("gate_error_p", b.map(|p| p.gate_error_p), parse_f64)?,
        t_gate: need("t_gate", b.map(|p| p.t_gate), parse_duration)?,
        t_meas_total: need("t_meas_total", b.map(|p| p.t_meas_total), parse_duration)?,
        readout_error: need("readout_error", b.map(|p| p.readout_error), parse_f64)?,
        t_ext: need("t_ext", Some(b.map_or(0.0, |p| p.t_ext)), parse_duration)?,
    };
    profile.validate()?;
    Ok(profile)
}

pub fn load_profile(path: &Path) -> Result<PlatformProfile> {
    profile_from_kv(&KeyValues::load(path)?)
}

/// A built-in name or a path to a profile file.
pub fn resolve_profile(spec: &str) -> Result<PlatformProfile> {
    match PlatformProfile::builtin(spec) {
        Some(p) => Ok(p),
        None if Path::new(spec).exists() => load_profile(Path::new(spec)),
        None => Err(Error::invalid(format!(
            "unknown backend '{spec}' (built-ins: iqm, rigetti, ionq, nvqlink; or a profile file path)"
        ))),
    }
}

/// Canonical text of a profile; reparses to an identical profile.
pub fn profile_to_text(p: &PlatformProfile) -> String {
    format!(
        "name = {}\nt1 = {:e}\nt2 = {:e}\ngate_error_p = {:e}\nt_gate = {:e}\nt_meas_total = {:e}\nreadout_error = {:e}\nt_ext = {:e}\n",
        p.name, p.t1, p.t2, p.gate_error_p, p.t_gate, p.t_meas_total, p.readout_error, p.t_ext
    )
}
