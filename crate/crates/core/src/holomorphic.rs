//! Rhaly operators on analytic functions.
//!
//! `(R_g f)(z) = Σ_n (Σ_{k≤n} a_k) b_n z^n` where `a`, `b` are the Taylor
//! coefficients of `f`, `g`. Indices in this module are 0-based; the adapter
//! functions [`theta_from_taylor`] and [`taylor_from_theta`] cross to the
//! 1-based sequence-space convention (`θ_{n+1} = b_n`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::koethe::{CoefficientSequence, TruncationPolicy};
use crate::rhaly::apply_values;

/// Largest node count the doubling loop will try.
pub const MAX_NODES: usize = 1 << 20;

pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum Representation {
    /// Finite list `b_0..b_M`, treated as the whole function.
    Taylor(Vec<Complex64>),
    Callable(ComplexFn),
    Exp,
    /// `1 / (1 - c z)`
    GeometricKernel(Complex64),
    Polynomial(Vec<Complex64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Entire,
    /// Unit disc.
    Disc,
}

#[derive(Clone)]
pub struct AnalyticFunction {
    repr: Representation,
    domain: Domain,
    label: String,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticFunction({}, {:?})", self.label, self.domain)
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

impl AnalyticFunction {
    pub fn exp() -> Self {
        AnalyticFunction {
            repr: Representation::Exp,
            domain: Domain::Entire,
            label: "exp".into(),
        }
    }

    /// `1/(1 - c z)`, declared on the disc.
    pub fn geometric_kernel(c: f64) -> Self {
        AnalyticFunction {
            repr: Representation::GeometricKernel(Complex64::new(c, 0.0)),
            domain: Domain::Disc,
            label: format!("geometric:{c}"),
        }
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::polynomial_complex(real(coeffs))
    }

    pub fn polynomial_complex(coeffs: Vec<Complex64>) -> Self {
        let label = format!(
            "poly:{}",
            coeffs
                .iter()
                .map(|c| format!("{}", c.re))
                .collect::<Vec<_>>()
                .join(";")
        );
        AnalyticFunction {
            repr: Representation::Polynomial(coeffs),
            domain: Domain::Entire,
            label,
        }
    }

    pub fn taylor(coeffs: Vec<Complex64>, domain: Domain) -> Self {
        AnalyticFunction {
            label: format!("taylor[{}]", coeffs.len()),
            repr: Representation::Taylor(coeffs),
            domain,
        }
    }

    pub fn callable(
        label: impl Into<String>,
        domain: Domain,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        AnalyticFunction {
            repr: Representation::Callable(Arc::new(f)),
            domain,
            label: label.into(),
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn describe(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.repr {
            Representation::Exp => z.exp(),
            Representation::GeometricKernel(c) => 1.0 / (1.0 - c * z),
            Representation::Polynomial(p) | Representation::Taylor(p) => horner(p, z),
            Representation::Callable(f) => f(z),
        }
    }

    /// Radius of the largest open disc the evaluator is valid on.
    pub fn radius_of_convergence(&self) -> f64 {
        match &self.repr {
            Representation::Exp | Representation::Polynomial(_) | Representation::Taylor(_) => {
                f64::INFINITY
            }
            Representation::GeometricKernel(c) if c.norm() == 0.0 => f64::INFINITY,
            Representation::GeometricKernel(c) => 1.0 / c.norm(),
            Representation::Callable(_) => match self.domain {
                Domain::Entire => f64::INFINITY,
                Domain::Disc => 1.0,
            },
        }
    }

    /// Taylor coefficients known in closed form (`None` for callables).
    pub fn known_coefficients(&self, n_max: usize) -> Option<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
        match &self.repr {
            Representation::Exp => {
                let mut t = 1.0;
                for (n, o) in out.iter_mut().enumerate() {
                    if n > 0 {
                        t /= n as f64;
                    }
                    *o = Complex64::new(t, 0.0);
                }
            }
            Representation::GeometricKernel(c) => {
                let mut t = Complex64::new(1.0, 0.0);
                for o in out.iter_mut() {
                    *o = t;
                    t *= c;
                }
            }
            Representation::Polynomial(p) | Representation::Taylor(p) => {
                for (o, c) in out.iter_mut().zip(p) {
                    *o = *c;
                }
            }
            Representation::Callable(_) => return None,
        }
        Some(out)
    }

    /// Upper bound for `Σ_n |b_n|`.
    pub fn coefficient_l1_bound(&self) -> Option<f64> {
        match &self.repr {
            Representation::Exp => Some(std::f64::consts::E),
            Representation::GeometricKernel(c) if c.norm() < 1.0 => Some(1.0 / (1.0 - c.norm())),
            Representation::Polynomial(p) | Representation::Taylor(p) => {
                Some(p.iter().map(|c| c.norm()).sum())
            }
            _ => None,
        }
    }

    /// Upper bound for `Σ_{n>n_max} |b_n| r^n`.
    pub fn weighted_tail(&self, n_max: usize, r: f64) -> Option<f64> {
        match &self.repr {
            Representation::Exp => {
                // first omitted term times e^r bounds the remainder
                let mut t = 1.0;
                for n in 1..=n_max + 1 {
                    t *= r / n as f64;
                }
                Some(t * r.exp())
            }
            Representation::GeometricKernel(c) => {
                let q = c.norm() * r;
                (q < 1.0).then(|| q.powi(n_max as i32 + 1) / (1.0 - q))
            }
            Representation::Polynomial(p) | Representation::Taylor(p) => Some(
                p.iter()
                    .enumerate()
                    .skip(n_max + 1)
                    .map(|(n, c)| c.norm() * r.powi(n as i32))
                    .sum(),
            ),
            Representation::Callable(_) => None,
        }
    }
}

/// Equispaced circle of radius `r` with `M` nodes; `outer` carries `r_1` for
/// disc-case contour evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radius: f64,
    pub nodes: usize,
    pub outer: Option<f64>,
    /// Agreement required between `M` and `2M` node values.
    pub tol: f64,
}

impl QuadratureSpec {
    pub fn circle(radius: f64, nodes: usize) -> Self {
        QuadratureSpec {
            radius,
            nodes,
            outer: None,
            tol: 1e-12,
        }
    }

    /// `0 < r_0 < r_1 < 1`, evaluation on `|z| = r_1`.
    pub fn disc(r0: f64, r1: f64, nodes: usize) -> Self {
        QuadratureSpec {
            radius: r0,
            nodes,
            outer: Some(r1),
            tol: 1e-12,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::RadiusConstraint(format!(
                "radius {} must be positive",
                self.radius
            )));
        }
        if self.nodes < 16 || !self.nodes.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "node count {} must be a power of two ≥ 16",
                self.nodes
            )));
        }
        if let Some(r1) = self.outer {
            if !(self.radius < r1 && r1 < 1.0) {
                return Err(Error::RadiusConstraint(format!(
                    "disc contour needs 0 < r0 < r1 < 1, got r0 = {}, r1 = {r1}",
                    self.radius
                )));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(
                "quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn node(r: f64, j: usize, m: usize) -> Complex64 {
    Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64)
}

/// `(1/M) Σ_j h(w_j) w_j ≈ (1/2πi) ∮_{|w|=r} h(w) dw`, summed in node order.
pub fn circle_quadrature(
    h: impl Fn(Complex64) -> Complex64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    let m = spec.nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let w = node(spec.radius, j, m);
        let v = h(w) * w;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteSample { node: j });
        }
        acc += v;
    }
    Ok(acc / m as f64)
}

/// Taylor coefficients `b_0..=b_{n_max}` of `g` by circle quadrature.
pub fn extract_theta(
    g: &AnalyticFunction,
    n_max: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let m = spec.nodes;
    if n_max >= m / 2 {
        return Err(Error::TooFewNodes { n_max, nodes: m });
    }
    if spec.radius >= g.radius_of_convergence() || (g.domain == Domain::Disc && spec.radius >= 1.0)
    {
        return Err(Error::RadiusConstraint(format!(
            "extraction radius {} outside the domain of {}",
            spec.radius,
            g.describe()
        )));
    }
    let samples: Vec<Complex64> = (0..m)
        .map(|j| {
            let v = g.eval(node(spec.radius, j, m));
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample { node: j })
            }
        })
        .collect::<Result<_>>()?;
    Ok((0..=n_max)
        .into_par_iter()
        .map(|n| {
            // reduce j·n mod M so the angle stays exact
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                acc += s * node(1.0, (m - (j * n) % m) % m, m);
            }
            acc / (m as f64 * spec.radius.powi(n as i32))
        })
        .collect())
}

fn coefficients(h: &AnalyticFunction, n_max: usize) -> Result<Vec<Complex64>> {
    if let Some(c) = h.known_coefficients(n_max) {
        return Ok(c);
    }
    let radius = if h.domain == Domain::Disc { 0.5 } else { 1.0 };
    let nodes = (4 * (n_max + 1)).max(16).next_power_of_two();
    extract_theta(h, n_max, &QuadratureSpec::circle(radius, nodes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: Complex64,
    pub nodes_used: usize,
    /// `|value_M - value_{2M}|` at acceptance.
    pub agreement: f64,
    pub converged: bool,
}

/// `(R_g f)(z) = (1/2πi) ∮_{|w|=r_0} f(w) g(z/w) / (w(1-w)) dw` with node doubling.
///
/// The Laurent argument behind the formula needs `|z| < r_0 ρ(g)` where `ρ(g)`
/// is the radius of convergence of `g`; other points are rejected as
/// series-path only.
pub fn apply_rg_integral(
    g: &AnalyticFunction,
    f: &AnalyticFunction,
    z: Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadratureValue> {
    spec.validate()?;
    let r0 = spec.radius;
    if r0 >= 1.0 {
        return Err(Error::RadiusConstraint(format!("r0 = {r0} must be < 1")));
    }
    if let Some(r1) = spec.outer {
        if (z.norm() - r1).abs() > 1e-12 * r1.max(1.0) {
            return Err(Error::RadiusConstraint(format!(
                "disc contour evaluates on |z| = {r1}, got {}",
                z.norm()
            )));
        }
    }
    if r0 >= f.radius_of_convergence() {
        return Err(Error::RadiusConstraint(format!(
            "f is not analytic on |w| = {r0}"
        )));
    }
    if z.norm() >= r0 * g.radius_of_convergence() {
        return Err(Error::RadiusConstraint(format!(
            "|z/w| = {} reaches the singularity of g at radius {}: series path only",
            z.norm() / r0,
            g.radius_of_convergence()
        )));
    }
    let integrand = |w: Complex64| f.eval(w) * g.eval(z / w) / (w * (1.0 - w));
    let mut m = spec.nodes;
    let mut prev = circle_quadrature(integrand, &QuadratureSpec { nodes: m, ..*spec })?;
    while m < MAX_NODES {
        m *= 2;
        let next = circle_quadrature(integrand, &QuadratureSpec { nodes: m, ..*spec })?;
        let agreement = (next - prev).norm();
        if agreement <= spec.tol * next.norm().max(1.0) {
            return Ok(QuadratureValue {
                value: next,
                nodes_used: m,
                agreement,
                converged: true,
            });
        }
        prev = next;
    }
    Ok(QuadratureValue {
        value: prev,
        nodes_used: m,
        agreement: f64::NAN,
        converged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on the omitted terms; `None` flags an uncertain truncation.
    pub tail: Option<f64>,
}

/// Prefix sums of `a`: `c_n = Σ_{k≤n} a_k`.
fn prefix(a: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .scan(Complex64::new(0.0, 0.0), |s, x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// `Σ_{n≤n_max} (Σ_{k≤n} a_k) b_n z^n`.
pub fn apply_rg_series(
    g: &AnalyticFunction,
    f: &AnalyticFunction,
    z: Complex64,
    n_max: usize,
) -> Result<SeriesValue> {
    let a = coefficients(f, n_max)?;
    let b = coefficients(g, n_max)?;
    let c = prefix(&a);
    let terms: Vec<Complex64> = c.iter().zip(&b).map(|(c, b)| c * b).collect();
    let value = horner(&terms, z);
    // |c_n| ≤ Σ |a_k|
    let tail = match (f.coefficient_l1_bound(), g.weighted_tail(n_max, z.norm())) {
        (Some(l1), Some(t)) => Some(l1 * t),
        _ => None,
    };
    Ok(SeriesValue { value, tail })
}

/// 0-based Taylor coefficients to a 1-based real `θ` (`θ_{n+1} = b_n`).
pub fn theta_from_taylor(b: &[Complex64]) -> Result<CoefficientSequence> {
    if let Some((n, c)) = b
        .iter()
        .enumerate()
        .find(|(_, c)| c.im.abs() > 1e-12 * c.re.abs().max(1.0))
    {
        return Err(Error::InvalidSequence(format!(
            "coefficient b_{n} = {c} is not real; sequence-space θ is real"
        )));
    }
    Ok(CoefficientSequence::sampled(
        b.iter().map(|c| c.re).collect(),
    ))
}

/// 1-based `θ_1..θ_{n_max+1}` to 0-based Taylor coefficients.
pub fn taylor_from_theta(theta: &CoefficientSequence, n_max: usize) -> Vec<Complex64> {
    real(&theta.truncate(n_max + 1))
}

/// Sequence route: `R_θ` with `θ` from `g`, applied to the coefficients of
/// `f`, then summed as a power series at `z`.
pub fn apply_rg_sequence(
    g: &AnalyticFunction,
    f: &AnalyticFunction,
    z: Complex64,
    n_max: usize,
) -> Result<Complex64> {
    let theta = theta_from_taylor(&coefficients(g, n_max)?)?.truncate(n_max + 1);
    let x = coefficients(f, n_max)?;
    Ok(horner(&apply_values(&theta, &x), z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationPath {
    /// Contour integral against series.
    Integral,
    /// Contour not applicable: series against the sequence route.
    SeriesOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRow {
    pub z: Complex64,
    pub path: ValidationPath,
    pub integral: Option<Complex64>,
    pub series: Complex64,
    pub sequence: Option<Complex64>,
    pub series_tail: Option<f64>,
    pub diff: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub rows: Vec<CrossRow>,
    /// `max_n |extract_theta(g)_n - (R_θ e_1)_{n+1}|` with `θ` from closed-form coefficients.
    pub theta_diff: Option<f64>,
    pub theta_pass: bool,
    pub all_pass: bool,
}

/// Compares the contour, series and sequence routes at each point.
pub fn cross_validate(
    g: &AnalyticFunction,
    f: &AnalyticFunction,
    points: &[Complex64],
    spec: &QuadratureSpec,
    n_max: usize,
    tol: f64,
) -> Result<CrossValidation> {
    spec.validate()?;
    let rows: Vec<CrossRow> = points
        .par_iter()
        .map(|&z| cross_row(g, f, z, spec, n_max, tol))
        .collect::<Result<_>>()?;
    let theta_diff = theta_column_diff(g, spec, n_max)?;
    let theta_pass = theta_diff.is_none_or(|d| d <= tol);
    let all_pass = theta_pass && rows.iter().all(|r| r.pass);
    Ok(CrossValidation {
        rows,
        theta_diff,
        theta_pass,
        all_pass,
    })
}

fn cross_row(
    g: &AnalyticFunction,
    f: &AnalyticFunction,
    z: Complex64,
    spec: &QuadratureSpec,
    n_max: usize,
    tol: f64,
) -> Result<CrossRow> {
    let series = apply_rg_series(g, f, z, n_max)?;
    let sequence = apply_rg_sequence(g, f, z, n_max).ok();
    let slack = tol + series.tail.unwrap_or(0.0);
    let mut row = CrossRow {
        z,
        path: ValidationPath::Integral,
        integral: None,
        series: series.value,
        sequence,
        series_tail: series.tail,
        diff: f64::NAN,
        pass: false,
        note: None,
    };
    match apply_rg_integral(g, f, z, spec) {
        Ok(q) => {
            row.integral = Some(q.value);
            row.diff = (q.value - series.value).norm();
            row.pass = q.converged && row.diff <= slack;
            if !q.converged {
                row.note = Some(format!("quadrature did not settle by M = {}", q.nodes_used));
            }
        }
        Err(Error::RadiusConstraint(msg)) => {
            row.path = ValidationPath::SeriesOnly;
            row.note = Some(msg);
            match sequence {
                Some(s) => {
                    row.diff = (s - series.value).norm();
                    row.pass = row.diff <= tol && series.tail.is_some_and(|t| t <= tol);
                }
                None => row.note = Some("no independent route for a complex θ".into()),
            }
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

fn theta_column_diff(
    g: &AnalyticFunction,
    spec: &QuadratureSpec,
    n_max: usize,
) -> Result<Option<f64>> {
    let Some(known) = g.known_coefficients(n_max) else {
        return Ok(None);
    };
    let radius = match g.domain {
        Domain::Entire => 1.0,
        // large radius keeps r^{-n} roundoff amplification small
        Domain::Disc => 0.9 * g.radius_of_convergence().min(1.0),
    };
    let nodes = spec.nodes.max((4 * (n_max + 1)).next_power_of_two());
    let extracted = extract_theta(g, n_max, &QuadratureSpec::circle(radius, nodes))?;
    let Ok(theta) = theta_from_taylor(&known) else {
        return Ok(None);
    };
    let op = crate::rhaly::RhalyOperator::new(theta);
    let policy = TruncationPolicy::default().with_n_max(n_max + 1);
    let column = op.column(1, &policy)?;
    Ok(Some(
        extracted
            .iter()
            .enumerate()
            .map(|(n, b)| (b - column.value(n + 1)).norm())
            .fold(0.0, f64::max),
    ))
}

/// Coefficient list, one complex `re im` per line (`im` optional, `#` comments).
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("line {}: cannot parse {s:?}", i + 1))
                })
            };
            match parts.as_slice() {
                [re] => Ok(Complex64::new(num(re)?, 0.0)),
                [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
                _ => Err(Error::InvalidArgument(format!(
                    "line {}: expected `re im`",
                    i + 1
                ))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadrature_residues() {
        let s = QuadratureSpec::circle(1.0, 32);
        assert!((circle_quadrature(|w| 1.0 / w, &s).unwrap() - 1.0).norm() < 1e-15);
        assert!(
            circle_quadrature(|_| c(1.0, 0.0), &QuadratureSpec::circle(0.7, 16))
                .unwrap()
                .norm()
                < 1e-15
        );
        let v =
            circle_quadrature(|w| w.exp() / w.powi(4), &QuadratureSpec::circle(1.0, 64)).unwrap();
        assert!((v - 1.0 / 6.0).norm() < 1e-13);
        assert!(matches!(
            circle_quadrature(|w| 1.0 / (w - 1.0), &s),
            Err(Error::NonFiniteSample { node: 0 })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::circle(1.0, 24).validate().is_err());
        assert!(QuadratureSpec::circle(1.0, 8).validate().is_err());
        assert!(QuadratureSpec::disc(0.6, 0.3, 64).validate().is_err());
        assert!(QuadratureSpec::disc(0.3, 0.6, 64).validate().is_ok());
    }

    #[test]
    fn extraction_examples() {
        let b = extract_theta(
            &AnalyticFunction::exp(),
            10,
            &QuadratureSpec::circle(1.0, 64),
        )
        .unwrap();
        assert!((b[3].re - 1.0 / 6.0).abs() < 1e-14);
        let p = extract_theta(
            &AnalyticFunction::polynomial(&[1.0, 0.0, 2.0]),
            5,
            &QuadratureSpec::circle(1.0, 16),
        )
        .unwrap();
        for (n, want) in [1.0, 0.0, 2.0, 0.0, 0.0, 0.0].iter().enumerate() {
            assert!((p[n] - want).norm() < 1e-14);
        }
        let g = AnalyticFunction::geometric_kernel(0.5);
        let b = extract_theta(&g, 20, &QuadratureSpec::circle(0.9, 256)).unwrap();
        for (n, v) in b.iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32)).norm() < 1e-10);
        }
        assert!(matches!(
            extract_theta(
                &AnalyticFunction::exp(),
                8,
                &QuadratureSpec::circle(1.0, 16)
            ),
            Err(Error::TooFewNodes {
                n_max: 8,
                nodes: 16
            })
        ));
    }

    #[test]
    fn integral_examples() {
        let s = QuadratureSpec::circle(0.5, 32);
        let one = AnalyticFunction::polynomial(&[1.0]);
        let e = apply_rg_integral(&AnalyticFunction::exp(), &one, c(1.0, 0.0), &s).unwrap();
        assert!((e.value.re - std::f64::consts::E).abs() < 1e-12);
        let z0 = apply_rg_integral(&AnalyticFunction::exp(), &one, c(0.0, 0.0), &s).unwrap();
        assert!((z0.value - 1.0).norm() < 1e-13);
        let id = AnalyticFunction::polynomial(&[0.0, 1.0]);
        let v = apply_rg_integral(&AnalyticFunction::exp(), &id, c(1.0, 0.0), &s).unwrap();
        assert!((v.value.re - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert!(apply_rg_integral(
            &AnalyticFunction::exp(),
            &one,
            c(1.0, 0.0),
            &QuadratureSpec::circle(1.0, 32)
        )
        .is_err());
    }

    #[test]
    fn series_examples() {
        let g = AnalyticFunction::exp();
        let z = c(0.4, -0.3);
        let one = apply_rg_series(&g, &AnalyticFunction::polynomial(&[1.0]), z, 30).unwrap();
        assert!((one.value - z.exp()).norm() < 1e-14);
        let cancel = apply_rg_series(
            &g,
            &AnalyticFunction::polynomial(&[1.0, -1.0]),
            c(3.0, 1.0),
            30,
        )
        .unwrap();
        assert_eq!(cancel.value, c(1.0, 0.0));
        let at0 = apply_rg_series(
            &g,
            &AnalyticFunction::polynomial(&[2.0, 5.0]),
            c(0.0, 0.0),
            10,
        )
        .unwrap();
        assert_eq!(at0.value, c(2.0, 0.0));
    }

    #[test]
    fn adapter_shifts_by_one() {
        let b = vec![c(1.0, 0.0), c(0.5, 0.0), c(0.25, 0.0)];
        let theta = theta_from_taylor(&b).unwrap();
        assert_eq!(theta.value(1), 1.0);
        assert_eq!(theta.value(3), 0.25);
        assert_eq!(taylor_from_theta(&theta, 2), b);
        assert!(theta_from_taylor(&[c(0.0, 1.0)]).is_err());
    }

    #[test]
    fn cross_validation_examples() {
        let g = AnalyticFunction::exp();
        let f = AnalyticFunction::polynomial(&[1.0, 1.0]);
        let cv = cross_validate(
            &g,
            &f,
            &[c(0.3, 0.0), c(1.0, 0.5)],
            &QuadratureSpec::circle(0.5, 32),
            40,
            1e-10,
        )
        .unwrap();
        assert!(cv.all_pass, "{cv:?}");
        let k = AnalyticFunction::geometric_kernel(0.5);
        let z = c(0.6, 0.0);
        let cv =
            cross_validate(&k, &k, &[z], &QuadratureSpec::disc(0.3, 0.6, 64), 80, 1e-8).unwrap();
        assert_eq!(cv.rows[0].path, ValidationPath::SeriesOnly);
        assert!(cv.all_pass, "{cv:?}");
        let closed = 2.0 / (1.0 - z / 2.0) - 1.0 / (1.0 - z / 4.0);
        assert!((cv.rows[0].series - closed).norm() < 1e-8);
    }

    #[test]
    fn coefficient_file_format() {
        let v = parse_coefficients("1 0\n# comment\n0.5 -2\n3\n").unwrap();
        assert_eq!(v, vec![c(1.0, 0.0), c(0.5, -2.0), c(3.0, 0.0)]);
        assert!(parse_coefficients("1 2 3").is_err());
    }
}
