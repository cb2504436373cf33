//! Batch runs: configuration parsing, check execution and report emission.
//!
//! # Config format
//!
//! Line-oriented `key = value` pairs. `[section]` headers prefix the keys that
//! follow (`[space]` then `kind = finite` is `space.kind = finite`) and `[]`
//! returns to the top level. Several pairs may share a line separated by
//! commas, lists use brackets and `#` starts a comment.
//!
//! ```text
//! space.kind = finite          # finite | infinite
//! space.alpha = linear:1       # linear:c | power:c:gamma | log
//! theta = reciprocal
//! checks = [continuity, compactness, power_bound]
//! N = 200
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criteria::{
    compactness_witness, continuity_witness, domination_check, dual_compactness_test,
    shift_bound_search, QuantifierOrder,
};
use crate::dynamics::{
    cesaro_bounded_check, default_schedule, ergodic_projection_estimate,
    m_topologizability_witness, orbit_bound_check, orbit_decay_check, power_bound_witness,
    sup_grade_seminorm, PowerBox,
};
use crate::error::{Error, Result};
use crate::holomorphic::{
    cross_validate, extract_theta, parse_coefficients, AnalyticFunction, Domain, QuadratureSpec,
};
use crate::koethe::{
    gp_nuclearity, membership, weak_stability, CoefficientSequence, ExponentSequence,
    PowerSeriesType, TruncationPolicy, Verdict, WeightGrid,
};

pub const TOOL_NAME: &str = "rhaly";

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| config_err(format!("malformed value for {key}: {v:?}")))
}

/// `linear:c`, `power:c:gamma` or `log`.
pub fn parse_exponent(desc: &str) -> Result<ExponentSequence> {
    let parts: Vec<&str> = desc.trim().split(':').collect();
    match parts.as_slice() {
        ["linear", c] => Ok(ExponentSequence::linear(num(desc, c)?)),
        ["power", c, g] => Ok(ExponentSequence::power(num(desc, c)?, num(desc, g)?)),
        ["log"] => Ok(ExponentSequence::log()),
        _ => Err(config_err(format!("unknown exponent family {desc:?}"))),
    }
}

/// `reciprocal`, `zero`, `unit:n`, `geometric:c:r`, `finite:a;b;…` or
/// `expexp:c:s:<exponent>` (`c e^{-s α_n}`).
pub fn parse_sequence(desc: &str) -> Result<CoefficientSequence> {
    let desc = desc.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    match head {
        "reciprocal" if rest.is_empty() => Ok(CoefficientSequence::reciprocal()),
        "zero" if rest.is_empty() => Ok(CoefficientSequence::zero()),
        "unit" => {
            let n: usize = num(desc, rest)?;
            if n == 0 {
                return Err(config_err("unit index is 1-based"));
            }
            Ok(CoefficientSequence::unit(n))
        }
        "geometric" => match rest.split(':').collect::<Vec<_>>().as_slice() {
            [c, r] => Ok(CoefficientSequence::geometric(num(desc, c)?, num(desc, r)?)),
            _ => Err(config_err(format!("geometric takes c:r, got {desc:?}"))),
        },
        "finite" => Ok(CoefficientSequence::finitely_supported(
            rest.split(';')
                .map(|v| num(desc, v))
                .collect::<Result<_>>()?,
        )),
        "expexp" => {
            let mut it = rest.splitn(3, ':');
            let (Some(c), Some(s), Some(a)) = (it.next(), it.next(), it.next()) else {
                return Err(config_err(format!(
                    "expexp takes c:s:<exponent>, got {desc:?}"
                )));
            };
            let s: f64 = num(desc, s)?;
            if s.is_nan() || s <= 0.0 {
                return Err(config_err("expexp needs s > 0"));
            }
            Ok(CoefficientSequence::exp_of_exponent(
                num(desc, c)?,
                s,
                parse_exponent(a)?,
            ))
        }
        _ => Err(config_err(format!("unknown sequence family {desc:?}"))),
    }
}

/// `exp`, `geometric:c`, `poly:a;b;…` or `file:PATH` (coefficient list,
/// declared on the disc).
pub fn parse_function(desc: &str) -> Result<AnalyticFunction> {
    let desc = desc.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    match head {
        "exp" if rest.is_empty() => Ok(AnalyticFunction::exp()),
        "geometric" => Ok(AnalyticFunction::geometric_kernel(num(desc, rest)?)),
        "poly" => Ok(AnalyticFunction::polynomial(
            &rest
                .split(';')
                .map(|v| num(desc, v))
                .collect::<Result<Vec<f64>>>()?,
        )),
        "file" => {
            let text =
                std::fs::read_to_string(rest).map_err(|e| config_err(format!("{rest}: {e}")))?;
            Ok(AnalyticFunction::taylor(
                parse_coefficients(&text)?,
                Domain::Disc,
            ))
        }
        _ => Err(config_err(format!("unknown function family {desc:?}"))),
    }
}

/// `0.3`, `-2i`, `1+0.5i`, `1e-3-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || config_err(format!("malformed complex number {s:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(Complex64::new(
        re.parse().map_err(|_| bad())?,
        im.parse().map_err(|_| bad())?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub alpha: String,
}

impl SpaceSpec {
    pub fn grid(&self) -> Result<WeightGrid> {
        let a = parse_exponent(&self.alpha)?;
        Ok(match self.kind {
            SpaceKind::Finite => WeightGrid::finite_type(a),
            SpaceKind::Infinite => WeightGrid::infinite_type(a),
        })
    }

    fn power_series_type(&self) -> PowerSeriesType {
        match self.kind {
            SpaceKind::Finite => PowerSeriesType::Finite,
            SpaceKind::Infinite => PowerSeriesType::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Membership,
    Nuclearity,
    Continuity,
    Compactness,
    DualCompactness,
    PowerBound,
    OrbitBound,
    MTopologizable,
    CesaroBounded,
    OrbitDecay,
    Ergodic,
    SupGrade,
    WeakStability,
    Domination,
    ShiftBound,
    Extract,
    Validate,
}

impl CheckKind {
    pub const ALL: [CheckKind; 17] = [
        CheckKind::Membership,
        CheckKind::Nuclearity,
        CheckKind::Continuity,
        CheckKind::Compactness,
        CheckKind::DualCompactness,
        CheckKind::PowerBound,
        CheckKind::OrbitBound,
        CheckKind::MTopologizable,
        CheckKind::CesaroBounded,
        CheckKind::OrbitDecay,
        CheckKind::Ergodic,
        CheckKind::SupGrade,
        CheckKind::WeakStability,
        CheckKind::Domination,
        CheckKind::ShiftBound,
        CheckKind::Extract,
        CheckKind::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Membership => "membership",
            CheckKind::Nuclearity => "nuclearity",
            CheckKind::Continuity => "continuity",
            CheckKind::Compactness => "compactness",
            CheckKind::DualCompactness => "dual_compactness",
            CheckKind::PowerBound => "power_bound",
            CheckKind::OrbitBound => "orbit_bound",
            CheckKind::MTopologizable => "m_topologizable",
            CheckKind::CesaroBounded => "cesaro_bounded",
            CheckKind::OrbitDecay => "orbit_decay",
            CheckKind::Ergodic => "ergodic",
            CheckKind::SupGrade => "sup_grade",
            CheckKind::WeakStability => "weak_stability",
            CheckKind::Domination => "domination",
            CheckKind::ShiftBound => "shift_bound",
            CheckKind::Extract => "extract",
            CheckKind::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| config_err(format!("unknown check {s:?}")))
    }

    fn needs_theta(self) -> bool {
        !matches!(
            self,
            CheckKind::Nuclearity
                | CheckKind::WeakStability
                | CheckKind::Domination
                | CheckKind::ShiftBound
                | CheckKind::Extract
                | CheckKind::Validate
        )
    }

    fn needs_beta(self) -> bool {
        matches!(
            self,
            CheckKind::WeakStability | CheckKind::Domination | CheckKind::ShiftBound
        )
    }
}

/// One check with its resolved truncation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub policy: TruncationPolicy,
    pub powerbox: PowerBox,
    pub k_test: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(config_err(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Extraction radius.
    pub r: f64,
    pub r0: f64,
    pub r1: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub target: SpaceSpec,
    pub theta: Option<String>,
    pub x: String,
    pub beta: Option<String>,
    pub domination_mode: QuantifierOrder,
    pub checks: Vec<CheckSpec>,
    pub schedule: Vec<usize>,
    pub g: Option<String>,
    pub f: Option<String>,
    pub points: Vec<Complex64>,
    pub quad: QuadConfig,
    /// Highest Taylor index for `extract` and `validate`.
    pub n_coeffs: usize,
    pub sweep_values: Vec<String>,
    pub sweep_sample: Option<usize>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<String>,
    pub workers: usize,
}

const POLICY_KEYS: [&str; 6] = ["N", "k_max", "m_max", "tol", "K_test", "growth_window"];
const BOX_KEYS: [&str; 3] = ["box.powers", "box.indices", "box.grades"];
const PLAIN_KEYS: [&str; 24] = [
    "space.kind",
    "space.alpha",
    "target.kind",
    "target.alpha",
    "theta",
    "x",
    "beta",
    "domination.mode",
    "checks",
    "schedule",
    "g",
    "f",
    "points",
    "quad.r",
    "quad.r0",
    "quad.r1",
    "quad.M",
    "n_coeffs",
    "sweep.values",
    "sweep.sample",
    "seed",
    "output.format",
    "output.path",
    "workers",
];

/// Splits on commas outside brackets.
fn split_top_level(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in line.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&line[start..]);
    out
}

fn parse_list(key: &str, v: &str) -> Result<Vec<String>> {
    let v = v.trim();
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| config_err(format!("{key} expects a [list], got {v:?}")))?;
    Ok(inner
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect())
}

/// Raw `key → value` pairs; duplicates are an error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if !name.contains(',') {
                section = name.trim().to_string();
                continue;
            }
        }
        for entry in split_top_level(line) {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (k, v) = entry.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "line {}: expected key = value, got {entry:?}",
                    ln + 1
                ))
            })?;
            let k = k.trim();
            let key = if section.is_empty() || section == "policy" {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            let key = key
                .strip_prefix("policy.")
                .map(str::to_string)
                .unwrap_or(key);
            if out.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(config_err(format!("duplicate key {key}")));
            }
        }
    }
    Ok(out)
}

fn is_known(key: &str) -> bool {
    if PLAIN_KEYS.contains(&key) || POLICY_KEYS.contains(&key) || BOX_KEYS.contains(&key) {
        return true;
    }
    match key.strip_prefix("check.").and_then(|r| r.split_once('.')) {
        Some((name, rest)) => {
            CheckKind::parse(name).is_ok()
                && (POLICY_KEYS.contains(&rest) || BOX_KEYS.contains(&rest))
        }
        None => false,
    }
}

struct Grading {
    policy: TruncationPolicy,
    powerbox: PowerBox,
    k_test: usize,
    box_set: [bool; 3],
}

impl Grading {
    fn apply(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "N" => self.policy.n_max = num(key, v)?,
            "k_max" => self.policy.k_max = num(key, v)?,
            "m_max" => self.policy.m_max = num(key, v)?,
            "tol" => self.policy.tol = num(key, v)?,
            "growth_window" => self.policy.growth_window = num(key, v)?,
            "K_test" => self.k_test = num(key, v)?,
            "box.powers" => {
                self.powerbox.powers = num(key, v)?;
                self.box_set[0] = true;
            }
            "box.indices" => {
                self.powerbox.indices = num(key, v)?;
                self.box_set[1] = true;
            }
            "box.grades" => {
                self.powerbox.grades = num(key, v)?;
                self.box_set[2] = true;
            }
            _ => unreachable!("unchecked grading key {key}"),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Self> {
        self.policy
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        if !self.box_set[0] {
            self.powerbox.powers = self.k_test;
        }
        if !self.box_set[1] {
            self.powerbox.indices = self.powerbox.indices.min(self.policy.n_max);
        }
        if self.k_test == 0 {
            return Err(config_err("K_test must be positive"));
        }
        Ok(self)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Overrides replace keys from the text (command-line flags).
    pub fn parse_with_overrides(text: &str, overrides: &[(&str, String)]) -> Result<Self> {
        let mut pairs = parse_pairs(text)?;
        for (k, v) in overrides {
            pairs.insert((*k).to_string(), v.clone());
        }
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = pairs.keys().find(|k| !is_known(k)) {
            return Err(config_err(format!("unknown key {k}")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);

        let kind = |k: &str, v: &str| match v {
            "finite" => Ok(SpaceKind::Finite),
            "infinite" => Ok(SpaceKind::Infinite),
            other => Err(config_err(format!("{k}: unknown space kind {other:?}"))),
        };
        let space = SpaceSpec {
            kind: kind("space.kind", get("space.kind").unwrap_or("finite"))?,
            alpha: get("space.alpha").unwrap_or("linear:1").to_string(),
        };
        parse_exponent(&space.alpha)?;
        let target = SpaceSpec {
            kind: match get("target.kind") {
                Some(v) => kind("target.kind", v)?,
                None => space.kind,
            },
            alpha: get("target.alpha").unwrap_or(&space.alpha).to_string(),
        };
        parse_exponent(&target.alpha)?;

        let mut global = Grading {
            policy: TruncationPolicy::default(),
            powerbox: PowerBox::default(),
            k_test: 32,
            box_set: [false; 3],
        };
        for key in POLICY_KEYS.iter().chain(BOX_KEYS.iter()) {
            if let Some(v) = get(key) {
                global.apply(key, v)?;
            }
        }
        let names = match get("checks") {
            Some(v) => parse_list("checks", v)?,
            None => Vec::new(),
        };
        let mut checks = Vec::with_capacity(names.len());
        for name in &names {
            let kind = CheckKind::parse(name)?;
            let mut g = Grading {
                box_set: global.box_set,
                ..global
            };
            let prefix = format!("check.{name}.");
            for (k, v) in pairs.range(prefix.clone()..) {
                let Some(rest) = k.strip_prefix(&prefix) else {
                    break;
                };
                g.apply(rest, v)?;
            }
            let g = g.finish()?;
            checks.push(CheckSpec {
                kind,
                policy: g.policy,
                powerbox: g.powerbox,
                k_test: g.k_test,
            });
        }
        // per-check sections for checks not listed are rejected as unknown
        for k in pairs.keys().filter_map(|k| k.strip_prefix("check.")) {
            let name = k.split('.').next().unwrap_or("");
            if !names.iter().any(|n| n == name) {
                return Err(config_err(format!(
                    "options given for unlisted check {name}"
                )));
            }
        }
        global.finish()?;

        let theta = get("theta").map(str::to_string);
        match &theta {
            Some(t) if !t.contains("{}") => {
                parse_sequence(t)?;
            }
            Some(_) => {}
            None => {
                if checks.iter().any(|c| c.kind.needs_theta()) {
                    return Err(config_err("missing key theta"));
                }
            }
        }
        let x = get("x").unwrap_or("unit:1").to_string();
        parse_sequence(&x)?;
        let beta = get("beta").map(str::to_string);
        if let Some(b) = &beta {
            parse_exponent(b)?;
        } else if checks.iter().any(|c| c.kind.needs_beta()) {
            return Err(config_err("missing key beta"));
        }
        let domination_mode = match get("domination.mode").unwrap_or("forall_exists") {
            "forall_exists" => QuantifierOrder::ForAllKExistsM,
            "exists_forall" => QuantifierOrder::ExistsMForAllK,
            other => return Err(config_err(format!("unknown domination.mode {other:?}"))),
        };
        let schedule = match get("schedule") {
            Some(v) => parse_list("schedule", v)?
                .iter()
                .map(|s| num("schedule", s))
                .collect::<Result<Vec<usize>>>()?,
            None => default_schedule(),
        };
        if schedule.contains(&0) {
            return Err(config_err("schedule points must be ≥ 1"));
        }

        let g = get("g").map(str::to_string);
        let f = get("f").map(str::to_string);
        for d in [&g, &f].into_iter().flatten() {
            parse_function(d)?;
        }
        for c in &checks {
            if c.kind == CheckKind::Extract && g.is_none() {
                return Err(config_err("missing key g"));
            }
            if c.kind == CheckKind::Validate && (g.is_none() || f.is_none()) {
                return Err(config_err(format!(
                    "missing key {}",
                    if g.is_none() { "g" } else { "f" }
                )));
            }
        }
        let points = match get("points") {
            Some(v) => parse_list("points", v)?
                .iter()
                .map(|s| parse_complex(s))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let quad = QuadConfig {
            r: get("quad.r")
                .map(|v| num("quad.r", v))
                .transpose()?
                .unwrap_or(1.0),
            r0: get("quad.r0")
                .map(|v| num("quad.r0", v))
                .transpose()?
                .unwrap_or(0.5),
            r1: get("quad.r1").map(|v| num("quad.r1", v)).transpose()?,
            nodes: get("quad.M")
                .map(|v| num("quad.M", v))
                .transpose()?
                .unwrap_or(64),
        };
        if let Some(r1) = quad.r1 {
            if quad.r0 >= r1 {
                return Err(config_err(format!(
                    "contradictory radii: quad.r0 = {} must be below quad.r1 = {r1}",
                    quad.r0
                )));
            }
        }
        let n_coeffs = get("n_coeffs")
            .map(|v| num("n_coeffs", v))
            .transpose()?
            .unwrap_or(20);

        let sweep_values = match get("sweep.values") {
            Some(v) => parse_list("sweep.values", v)?,
            None => Vec::new(),
        };
        if !sweep_values.is_empty() {
            let t = theta.as_deref().unwrap_or("");
            if !t.contains("{}") {
                return Err(config_err("sweep needs a theta template containing {}"));
            }
            for v in &sweep_values {
                parse_sequence(&t.replace("{}", v))?;
            }
        } else if theta.as_deref().is_some_and(|t| t.contains("{}")) {
            return Err(config_err("theta template {} given without sweep.values"));
        }
        let sweep_sample = get("sweep.sample")
            .map(|v| num("sweep.sample", v))
            .transpose()?;
        let seed = get("seed")
            .map(|v| num("seed", v))
            .transpose()?
            .unwrap_or(0);
        let format = Format::parse(get("output.format").unwrap_or("json"))?;
        let out = get("output.path").map(str::to_string);
        let workers = get("workers")
            .map(|v| num("workers", v))
            .transpose()?
            .unwrap_or(1);
        if workers == 0 {
            return Err(config_err("workers must be ≥ 1"));
        }
        Ok(RunConfig {
            space,
            target,
            theta,
            x,
            beta,
            domination_mode,
            checks,
            schedule,
            g,
            f,
            points,
            quad,
            n_coeffs,
            sweep_values,
            sweep_sample,
            seed,
            format,
            out,
            workers,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
    Values,
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Certified => "Certified",
            Status::Refuted => "Refuted",
            Status::Inconclusive => "Inconclusive",
            Status::Values => "Values",
            Status::Pass => "Pass",
            Status::Fail => "Fail",
            Status::Error => "Error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// Verdict (with witness or counterexample), computed values, or `{"error": …}`.
    pub payload: Value,
    pub policy: TruncationPolicy,
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn without_timing(mut self) -> Self {
        for r in &mut self.records {
            r.elapsed_ms = None;
        }
        self
    }
}

fn verdict_record<W: Serialize>(v: Verdict<W>) -> Result<(Status, Value)> {
    let status = match &v {
        Verdict::Certified(_) => Status::Certified,
        Verdict::Refuted(_) => Status::Refuted,
        Verdict::Inconclusive(_) => Status::Inconclusive,
    };
    Ok((status, to_value(&v)?))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn exponent_of(space: &SpaceSpec) -> Result<ExponentSequence> {
    parse_exponent(&space.alpha)
}

fn finite_only(space: &SpaceSpec, what: &str) -> Result<()> {
    match space.kind {
        SpaceKind::Finite => Ok(()),
        SpaceKind::Infinite => Err(Error::Unsupported(format!(
            "{what} is defined on finite-type spaces only"
        ))),
    }
}

fn execute(cfg: &RunConfig, theta_desc: Option<&str>, spec: &CheckSpec) -> Result<(Status, Value)> {
    let policy = &spec.policy;
    let source = cfg.space.grid()?;
    let target = cfg.target.grid()?;
    let theta = || -> Result<CoefficientSequence> {
        parse_sequence(theta_desc.ok_or_else(|| config_err("missing key theta"))?)
    };
    let beta = || -> Result<ExponentSequence> {
        parse_exponent(
            cfg.beta
                .as_deref()
                .ok_or_else(|| config_err("missing key beta"))?,
        )
    };
    match spec.kind {
        CheckKind::Membership => verdict_record(membership(&theta()?, &target, policy)?),
        CheckKind::Nuclearity => verdict_record(gp_nuclearity(&source, policy)?),
        CheckKind::Continuity => {
            verdict_record(continuity_witness(&theta()?, &source, &target, policy)?)
        }
        CheckKind::Compactness => {
            verdict_record(compactness_witness(&theta()?, &source, &target, policy)?)
        }
        CheckKind::DualCompactness => {
            finite_only(&cfg.space, "dual compactness")?;
            verdict_record(dual_compactness_test(
                &theta()?,
                &exponent_of(&cfg.space)?,
                policy,
            )?)
        }
        CheckKind::PowerBound => verdict_record(power_bound_witness(
            &theta()?,
            &source,
            policy,
            spec.powerbox,
        )?),
        CheckKind::OrbitBound => {
            finite_only(&cfg.space, "the orbit bound")?;
            verdict_record(orbit_bound_check(
                &theta()?,
                &exponent_of(&cfg.space)?,
                policy,
                spec.powerbox,
            )?)
        }
        CheckKind::MTopologizable => verdict_record(m_topologizability_witness(
            &theta()?,
            &source,
            policy,
            spec.powerbox,
        )?),
        CheckKind::CesaroBounded => verdict_record(cesaro_bounded_check(
            &theta()?,
            &source,
            policy,
            spec.powerbox,
        )?),
        CheckKind::OrbitDecay => {
            let r = orbit_decay_check(
                &theta()?,
                &parse_sequence(&cfg.x)?,
                &source,
                policy,
                spec.k_test,
            )?;
            Ok((Status::Values, to_value(&r)?))
        }
        CheckKind::Ergodic => {
            let r = ergodic_projection_estimate(
                &theta()?,
                &parse_sequence(&cfg.x)?,
                &source,
                policy,
                &cfg.schedule,
            )?;
            Ok((Status::Values, to_value(&r)?))
        }
        CheckKind::SupGrade => {
            finite_only(&cfg.space, "sup over grades")?;
            let r = sup_grade_seminorm(&theta()?, &exponent_of(&cfg.space)?, policy)?;
            Ok((Status::Values, to_value(&r)?))
        }
        CheckKind::WeakStability => verdict_record(weak_stability(&beta()?, policy)?),
        CheckKind::Domination => verdict_record(domination_check(
            &beta()?,
            &source,
            cfg.domination_mode,
            cfg.space.power_series_type(),
            policy,
        )?),
        CheckKind::ShiftBound => verdict_record(shift_bound_search(
            &exponent_of(&cfg.space)?,
            &beta()?,
            policy,
        )?),
        CheckKind::Extract => {
            let g = parse_function(cfg.g.as_deref().unwrap_or_default())?;
            let b = extract_theta(
                &g,
                cfg.n_coeffs,
                &QuadratureSpec::circle(cfg.quad.r, cfg.quad.nodes),
            )?;
            let rows: Vec<Value> = b
                .iter()
                .enumerate()
                .map(|(n, c)| json!({ "n": n, "value": c.re, "im": c.im }))
                .collect();
            Ok((
                Status::Values,
                json!({ "function": g.describe(), "coefficients": rows }),
            ))
        }
        CheckKind::Validate => {
            let g = parse_function(cfg.g.as_deref().unwrap_or_default())?;
            let f = parse_function(cfg.f.as_deref().unwrap_or_default())?;
            let q = match cfg.quad.r1 {
                Some(r1) => QuadratureSpec::disc(cfg.quad.r0, r1, cfg.quad.nodes),
                None => QuadratureSpec::circle(cfg.quad.r0, cfg.quad.nodes),
            }
            .with_tol(policy.tol.min(1e-12));
            let cv = cross_validate(&g, &f, &cfg.points, &q, cfg.n_coeffs, policy.tol)?;
            Ok((
                if cv.all_pass {
                    Status::Pass
                } else {
                    Status::Fail
                },
                to_value(&cv)?,
            ))
        }
    }
}

fn run_one(cfg: &RunConfig, theta: Option<&str>, spec: &CheckSpec, name: String) -> CheckRecord {
    let start = Instant::now();
    let (status, payload) = match execute(cfg, theta, spec) {
        Ok(v) => v,
        Err(e) => (Status::Error, json!({ "error": e.to_string() })),
    };
    CheckRecord {
        name,
        status,
        payload,
        policy: spec.policy,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(format!("worker pool: {e}")))
}

fn report(cfg: &RunConfig, records: Vec<CheckRecord>) -> Report {
    Report {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        records,
    }
}

/// Executes the checks on `cfg.workers` threads; rows keep declaration order.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let records = pool(cfg.workers)?.install(|| {
        cfg.checks
            .par_iter()
            .map(|c| run_one(cfg, cfg.theta.as_deref(), c, c.kind.name().to_string()))
            .collect()
    });
    Ok(report(cfg, records))
}

/// Sweep values to run, after optional seeded sampling.
pub fn sweep_values(cfg: &RunConfig) -> Vec<String> {
    let mut values = cfg.sweep_values.clone();
    if let Some(k) = cfg.sweep_sample {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut picked: Vec<usize> = (0..values.len()).collect::<Vec<_>>();
        picked.shuffle(&mut rng);
        picked.truncate(k);
        picked.sort_unstable();
        values = picked
            .into_iter()
            .map(|i| cfg.sweep_values[i].clone())
            .collect();
    }
    values
}

/// Runs every check for each substituted `θ` template value.
pub fn run_sweep(cfg: &RunConfig) -> Result<Report> {
    if cfg.sweep_values.is_empty() {
        return Err(config_err("sweep needs sweep.values"));
    }
    let template = cfg.theta.clone().unwrap_or_default();
    let jobs: Vec<(String, &CheckSpec)> = sweep_values(cfg)
        .into_iter()
        .flat_map(|v| cfg.checks.iter().map(move |c| (v.clone(), c)))
        .collect();
    let records = pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|(v, c)| {
                let theta = template.replace("{}", v);
                run_one(cfg, Some(&theta), c, format!("{}[{v}]", c.kind.name()))
            })
            .collect()
    });
    Ok(report(cfg, records))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
struct CsvRow {
    check: String,
    status: String,
    grade: Option<u64>,
    n: Option<u64>,
    k: Option<u64>,
    p: Option<u64>,
    q: Option<u64>,
    m: Option<u64>,
    value: Option<f64>,
    label: String,
}

const VALUE_KEYS: [&str; 9] = [
    "constant",
    "c_p",
    "m_kp",
    "log_max_ratio",
    "log_margin",
    "log_norm",
    "value",
    "bound",
    "diff",
];

fn field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<u64> {
    obj.get(key).and_then(Value::as_u64)
}

/// Rows for every object carrying a grade-like index.
fn collect_rows(rec: &CheckRecord, v: &Value, path: &str, out: &mut Vec<CsvRow>) {
    match v {
        Value::Object(obj) => {
            if let Some(idx) = obj.get("indices").and_then(Value::as_object) {
                // counterexample: indices plus offending values
                let vals = obj.get("values").and_then(Value::as_object);
                let label = vals
                    .map(|m| {
                        m.iter()
                            .map(|(k, v)| format!("{k}={v}"))
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default();
                out.push(CsvRow {
                    check: rec.name.clone(),
                    status: rec.status.to_string(),
                    grade: field(idx, "p").or(field(idx, "k")),
                    n: field(idx, "n"),
                    k: field(idx, "k"),
                    p: field(idx, "p"),
                    q: field(idx, "q").or(field(idx, "q_from")),
                    m: field(idx, "m"),
                    value: vals.and_then(|m| m.values().next()).and_then(Value::as_f64),
                    label: if label.is_empty() {
                        path.to_string()
                    } else {
                        label
                    },
                });
                return;
            }
            let graded = ["k", "p", "grade"]
                .iter()
                .any(|k| obj.get(*k).is_some_and(Value::is_u64));
            let indexed = obj.get("n").is_some_and(Value::is_u64) && obj.contains_key("value");
            if graded || indexed {
                out.push(CsvRow {
                    check: rec.name.clone(),
                    status: rec.status.to_string(),
                    grade: field(obj, "grade").or(field(obj, "k")).or(field(obj, "p")),
                    n: field(obj, "n"),
                    k: field(obj, "k"),
                    p: field(obj, "p"),
                    q: field(obj, "q"),
                    m: field(obj, "m"),
                    value: VALUE_KEYS
                        .iter()
                        .find_map(|k| obj.get(*k).and_then(Value::as_f64)),
                    label: path.to_string(),
                });
                return;
            }
            for (k, child) in obj {
                collect_rows(rec, child, &format!("{path}.{k}"), out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                collect_rows(rec, child, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

fn summary(rec: &CheckRecord) -> String {
    let p = &rec.payload;
    let text = p
        .pointer("/payload/reason")
        .or_else(|| p.get("error"))
        .and_then(Value::as_str)
        .map(str::to_string)
        .unwrap_or_else(|| {
            let body = p.get("payload").unwrap_or(p);
            body.to_string()
        });
    let mut s: String = text.chars().take(96).collect();
    if text.chars().count() > 96 {
        s.push('…');
    }
    s
}

/// Serializes a report. JSON keys come out sorted, so equal reports give equal bytes.
pub fn emit(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| Error::Io(e.to_string())),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for rec in &report.records {
                let mut rows = Vec::new();
                collect_rows(rec, &rec.payload, "$", &mut rows);
                if rows.is_empty() {
                    rows.push(CsvRow {
                        check: rec.name.clone(),
                        status: rec.status.to_string(),
                        label: summary(rec),
                        ..CsvRow::default()
                    });
                }
                for r in rows {
                    w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
        Format::Text => {
            let rows: Vec<[String; 3]> = report
                .records
                .iter()
                .map(|r| [r.name.clone(), r.status.to_string(), summary(r)])
                .collect();
            let w0 = rows
                .iter()
                .map(|r| r[0].chars().count())
                .max()
                .unwrap_or(0)
                .max(5);
            let w1 = rows
                .iter()
                .map(|r| r[1].chars().count())
                .max()
                .unwrap_or(0)
                .max(6);
            let mut s = format!("{} {}\n", report.tool, report.version);
            s += &format!("{:<w0$}  {:<w1$}  detail\n", "check", "status");
            for r in rows {
                s += &format!("{:<w0$}  {:<w1$}  {}\n", r[0], r[1], r[2]);
            }
            Ok(s)
        }
    }
}

/// Parses a JSON report back.
pub fn parse_report(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))
}

/// Writes the serialized report to `path`.
pub fn emit_to(report: &Report, format: Format, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, emit(report, format)?)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_config_round_trip() {
        let c = RunConfig::parse(
            "space.kind=finite, space.alpha=linear:1, theta=reciprocal, checks=[compactness]",
        )
        .unwrap();
        assert_eq!(c.space.kind, SpaceKind::Finite);
        assert_eq!(c.theta.as_deref(), Some("reciprocal"));
        assert_eq!(c.checks.len(), 1);
        assert_eq!(c.checks[0].kind, CheckKind::Compactness);
        assert_eq!(c.checks[0].policy, TruncationPolicy::default());
        assert_eq!(c.checks[0].k_test, 32);
    }

    #[test]
    fn sectioned_config_with_overrides() {
        let text = "[space]\nkind = infinite\nalpha = power:1:2\n\n[policy]\nN = 80\n\ntheta = zero\nchecks = [power_bound, ergodic]\n[check.power_bound]\nK_test = 20\nbox.indices = 30\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.space.kind, SpaceKind::Infinite);
        assert_eq!(c.checks[0].policy.n_max, 80);
        assert_eq!(c.checks[0].powerbox.powers, 20);
        assert_eq!(c.checks[0].powerbox.indices, 30);
        assert_eq!(c.checks[1].powerbox.powers, 32);
    }

    #[test]
    fn config_errors() {
        let e = RunConfig::parse("checks = [continuity]").unwrap_err();
        assert!(e.to_string().contains("theta"), "{e}");
        let e = RunConfig::parse("theta = zero, quad.r0 = 0.8, quad.r1 = 0.5").unwrap_err();
        assert!(e.to_string().contains("radii"), "{e}");
        assert!(RunConfig::parse("theta = wobbly").is_err());
        assert!(RunConfig::parse("theta = zero, colour = red").is_err());
        assert!(RunConfig::parse("theta = zero, N = many").is_err());
        assert!(RunConfig::parse("theta = zero\ntheta = zero").is_err());
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.3").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_complex("1+0.5i").unwrap(), Complex64::new(1.0, 0.5));
        assert_eq!(parse_complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(parse_complex("1e-3-i").unwrap(), Complex64::new(1e-3, -1.0));
        assert!(parse_complex("1+xi").is_err());
    }

    #[test]
    fn empty_checks_give_empty_body() {
        let c = RunConfig::parse("theta = reciprocal").unwrap();
        assert!(run(&c).unwrap().records.is_empty());
    }

    #[test]
    fn error_rows_do_not_stop_the_run() {
        let c = RunConfig::parse(
            "space.kind = infinite, theta = unit:1, checks = [orbit_bound, membership]",
        )
        .unwrap();
        let r = run(&c).unwrap();
        assert_eq!(r.records[0].status, Status::Error);
        assert_eq!(r.records[1].status, Status::Certified);
    }

    #[test]
    fn sweep_sampling_is_seeded() {
        let c = RunConfig::parse("theta = geometric:{}:0.5, sweep.values = [0.1, 0.2, 0.3, 0.4], sweep.sample = 2, seed = 7, checks = [membership]").unwrap();
        assert_eq!(sweep_values(&c), sweep_values(&c));
        assert_eq!(sweep_values(&c).len(), 2);
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.records.len(), 2);
        assert!(r.records[0].name.starts_with("membership["));
    }
}
