//! Monotonicity cones: the fundamental family M(γ, D, R), the enlarged
//! cones, directional cones, duals, polars, the fundamental embedding and
//! strict approximators.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, SymMatrix, Vector};
use crate::report::{PointRecord, VerificationReport};
use crate::sample::{self, JetRng};
use crate::verify::GridDomain;

/// Membership tolerance, scaled by 1 + ‖J‖.
pub const CONE_TOL: f64 = 1e-9;

pub fn tol(j: &Jet) -> f64 {
    CONE_TOL * (1.0 + j.norm())
}

fn unit(v: &[f64]) -> Result<Vector> {
    let v = Vector::from_column_slice(v);
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Precondition("cone axis must be a nonzero finite vector".into()));
    }
    Ok(v / n)
}

/// Directional cone D ⊂ ℝⁿ. For the parabolic cone the last coordinate is
/// the time slot σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionalCone {
    #[default]
    Full,
    HalfSpace { b: Vec<f64> },
    Orthant { k: usize },
    Circular { b: Vec<f64>, theta: f64 },
    Parabolic { gamma: f64 },
}

impl DirectionalCone {
    pub fn is_full(&self) -> bool {
        matches!(self, DirectionalCone::Full)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |s: String| Err(Error::Precondition(s));
        match self {
            DirectionalCone::Full => Ok(()),
            DirectionalCone::HalfSpace { b } | DirectionalCone::Circular { b, .. } if b.len() != n => {
                bad(format!("cone axis has length {} in dimension {n}", b.len()))
            }
            DirectionalCone::HalfSpace { b } => unit(b).map(|_| ()),
            DirectionalCone::Circular { b, theta } => {
                unit(b)?;
                if !(*theta > 0.0 && *theta <= FRAC_PI_2) {
                    return bad(format!("circular cone needs 0 < θ ≤ π/2, got {theta}"));
                }
                Ok(())
            }
            DirectionalCone::Orthant { k } if *k == 0 || *k > n => bad(format!("orthant needs 1 ≤ k ≤ {n}, got {k}")),
            DirectionalCone::Orthant { .. } => Ok(()),
            DirectionalCone::Parabolic { gamma } if !(*gamma >= 0.0) || n < 1 => {
                bad(format!("parabolic cone needs γ ≥ 0, got {gamma}"))
            }
            DirectionalCone::Parabolic { .. } => Ok(()),
        }
    }

    /// Signed margin, ≥ 0 on D. +∞ for the full space.
    pub fn margin(&self, p: &Vector) -> f64 {
        match self {
            DirectionalCone::Full => f64::INFINITY,
            DirectionalCone::HalfSpace { b } => unit(b).map_or(f64::NAN, |b| b.dot(p)),
            DirectionalCone::Orthant { k } => p.iter().take(*k).copied().fold(f64::INFINITY, f64::min),
            DirectionalCone::Circular { b, theta } => {
                unit(b).map_or(f64::NAN, |b| b.dot(p) - theta.cos() * p.norm())
            }
            DirectionalCone::Parabolic { gamma } => {
                let n = p.len();
                let sigma = p[n - 1];
                let q = p.rows(0, n - 1).norm();
                -sigma - gamma * q
            }
        }
    }

    /// Margin of the dual D̃ = ∼(−Int D).
    pub fn dual_margin(&self, p: &Vector) -> f64 {
        -self.margin(&-p)
    }

    /// Margin of the polar D° = {q : ⟨q, d⟩ ≥ 0 for all d ∈ D}.
    pub fn polar_margin(&self, q: &Vector) -> f64 {
        match self {
            DirectionalCone::Full => -q.norm(),
            DirectionalCone::HalfSpace { b } => match unit(b) {
                Ok(b) => {
                    let t = b.dot(q);
                    t.min(-(q - &b * t).norm())
                }
                Err(_) => f64::NAN,
            },
            DirectionalCone::Orthant { k } => {
                let head = q.iter().take(*k).copied().fold(f64::INFINITY, f64::min);
                let tail = q.iter().skip(*k).fold(0.0f64, |m, v| m.max(v.abs()));
                head.min(-tail)
            }
            DirectionalCone::Circular { b, theta } => {
                unit(b).map_or(f64::NAN, |b| b.dot(q) - theta.sin() * q.norm())
            }
            DirectionalCone::Parabolic { gamma } => {
                // circular about −e_σ with cos θ = γ/√(1+γ²)
                let sigma = q[q.len() - 1];
                -sigma - q.norm() / (1.0 + gamma * gamma).sqrt()
            }
        }
    }

    /// A point c and radius ρ with B_ρ(c) ⊂ D. None for the full space.
    pub fn inner_ball(&self, n: usize) -> Option<(Vector, f64)> {
        match self {
            DirectionalCone::Full => None,
            DirectionalCone::HalfSpace { b } => Some((unit(b).ok()?, 1.0)),
            DirectionalCone::Orthant { k } => Some((Vector::from_fn(n, |i, _| if i < *k { 1.0 } else { 0.0 }), 1.0)),
            DirectionalCone::Circular { b, theta } => Some((unit(b).ok()?, theta.sin())),
            DirectionalCone::Parabolic { gamma } => {
                let mut c = Vector::zeros(n);
                c[n - 1] = -1.0;
                Some((c, 1.0 / (1.0 + gamma * gamma).sqrt()))
            }
        }
    }

    /// Random point of D (occasionally on ∂D or at the vertex).
    pub fn sample(&self, rng: &mut JetRng, n: usize, scale: f64) -> Vector {
        let u = sample::uniform(rng, 0.0, 1.0);
        if u < 0.05 {
            return Vector::zeros(n);
        }
        let on_boundary = u < 0.15;
        match self.inner_ball(n) {
            None => sample::gaussian_vector(rng, n) * scale,
            Some((c, rho)) => {
                // a point of the inner ball pushed radially out to ∂D when asked
                loop {
                    let w = sample::unit_vector(rng, n) * (rho * sample::uniform(rng, 0.0, 1.0));
                    let mut v = &c + w;
                    if on_boundary {
                        v = self.push_to_boundary(&v);
                    }
                    if self.margin(&v) >= -1e-12 * (1.0 + v.norm()) {
                        let s = scale * sample::magnitude(rng);
                        return v * s;
                    }
                }
            }
        }
    }

    /// Moves an interior point of D away from the inner-ball center until
    /// it hits ∂D.
    fn push_to_boundary(&self, v: &Vector) -> Vector {
        let (c, _) = match self.inner_ball(v.len()) {
            Some(b) => b,
            None => return v.clone(),
        };
        let dir = v - &c;
        if dir.norm() < 1e-12 {
            return v.clone();
        }
        let mut hi = 1.0;
        while self.margin(&(&c + &dir * hi)) >= 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.margin(&(&c + &dir * mid)) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        &c + &dir * lo
    }

    /// Random point of the polar D°.
    pub fn sample_polar(&self, rng: &mut JetRng, n: usize, scale: f64) -> Vector {
        let s = scale * sample::magnitude(rng);
        match self {
            DirectionalCone::Full => Vector::zeros(n),
            DirectionalCone::HalfSpace { b } => unit(b).map(|b| b * s * sample::uniform(rng, 0.0, 1.0)).unwrap_or(Vector::zeros(n)),
            DirectionalCone::Orthant { k } => Vector::from_fn(n, |i, _| if i < *k { s * sample::uniform(rng, 0.0, 1.0) } else { 0.0 }),
            DirectionalCone::Circular { b, theta } => {
                DirectionalCone::Circular { b: b.clone(), theta: FRAC_PI_2 - theta }.sample_circular_closed(rng, n, s)
            }
            DirectionalCone::Parabolic { gamma } => {
                let mut axis = vec![0.0; n];
                axis[n - 1] = -1.0;
                let half = (1.0 / (1.0 + gamma * gamma).sqrt()).acos();
                DirectionalCone::Circular { b: axis, theta: FRAC_PI_2 - half }.sample_circular_closed(rng, n, s)
            }
        }
    }

    // Circular cones with θ = 0 are rays; handle them without the inner ball.
    fn sample_circular_closed(&self, rng: &mut JetRng, n: usize, s: f64) -> Vector {
        if let DirectionalCone::Circular { b, theta } = self {
            let b = match unit(b) {
                Ok(b) => b,
                Err(_) => return Vector::zeros(n),
            };
            let mut w = sample::gaussian_vector(rng, n);
            w -= &b * b.dot(&w);
            let wn = w.norm();
            let lateral = if wn > 1e-12 { w / wn } else { Vector::zeros(n) };
            let t = theta.max(0.0).tan() * sample::uniform(rng, 0.0, 1.0);
            return (b + lateral * t) * s;
        }
        Vector::zeros(n)
    }
}

/// The R slot of the fundamental family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(r) => s.serialize_f64(*r),
            Radius::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) if r > 0.0 && r.is_finite() => Ok(Radius::Finite(r)),
            Raw::Num(r) => Err(serde::de::Error::custom(format!("R must be positive, got {r}"))),
            Raw::Str(s) if s == "inf" => Ok(Radius::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("R must be a number or \"inf\", got {s}"))),
        }
    }
}

/// A monotonicity cone. `gamma: None` leaves r free, `gamma: Some(0)` is
/// M(N); `R: None` leaves A free, `R: "inf"` is M(P).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotonicityCone {
    Fundamental {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(rename = "D", default)]
        d: DirectionalCone,
        #[serde(rename = "R", default)]
        r: Option<Radius>,
    },
    /// M_R: A ≥ 0 and (λ₁⋯λₙ)^{1/n} ≥ |p|/R
    SubR {
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// M^R: ⟨Ae, e⟩ ≥ |⟨p, e⟩|/R for all unit e
    SuperR {
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// M⁻_{λ,Λ,R}: λ tr A⁺ + Λ tr A⁻ ≥ λn|p|/R
    Pucci {
        lambda: f64,
        #[serde(rename = "Lambda")]
        cap_lambda: f64,
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// M(R)_δ: λ_min(A) + δ tr A ≥ |p|/R
    Delta {
        delta: f64,
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// M_{λ,β}(N, D, P): s ≤ 0, q ∈ D, P ≥ 0, λ tr P ≥ β|q|
    StrictElliptic {
        lambda: f64,
        beta: f64,
        #[serde(rename = "D", default)]
        d: DirectionalCone,
    },
    /// M* = N × D × P* with the parabolic D and P* = {A : A′ ≥ 0}; the
    /// last coordinate is time.
    Parabolic { gamma: f64 },
    /// C_{J₀,θ} = {J : ⟨J, J₀⟩ ≥ cos θ ‖J‖‖J₀‖}
    JetCircular { axis: Jet, theta: f64 },
}

impl MonotonicityCone {
    pub fn fundamental(gamma: Option<f64>, d: DirectionalCone, r: Option<Radius>) -> Self {
        MonotonicityCone::Fundamental { gamma, d, r }
    }

    /// M(P) = ℝ × ℝⁿ × P
    pub fn m_p() -> Self {
        Self::fundamental(None, DirectionalCone::Full, Some(Radius::Infinite))
    }

    /// M(R)
    pub fn m_r(r: f64) -> Self {
        Self::fundamental(None, DirectionalCone::Full, Some(Radius::Finite(r)))
    }

    /// M(γ)
    pub fn m_gamma(gamma: f64) -> Self {
        Self::fundamental(Some(gamma), DirectionalCone::Full, None)
    }

    /// N × ℝⁿ × P
    pub fn m_np() -> Self {
        Self::fundamental(Some(0.0), DirectionalCone::Full, Some(Radius::Infinite))
    }

    /// N × D × P
    pub fn product(d: DirectionalCone) -> Self {
        Self::fundamental(Some(0.0), d, Some(Radius::Infinite))
    }

    /// The minimal cone M₀ = N × {0} × P is not itself in the family (no
    /// interior); this predicate is used by the sampled checks.
    pub fn in_minimal(j: &Jet) -> bool {
        let t = tol(j);
        j.r <= t && j.p.norm() <= t && j.a.lambda_min() >= -t
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Precondition(format!("{what} must be positive and finite, got {v}")))
            }
        };
        let gam = |g: &Option<f64>| match g {
            Some(g) if !(*g >= 0.0 && g.is_finite()) => Err(Error::Precondition(format!("γ must be in [0, ∞), got {g}"))),
            _ => Ok(()),
        };
        match self {
            MonotonicityCone::Fundamental { gamma, d, r } => {
                gam(gamma)?;
                d.validate(n)?;
                if let Some(Radius::Finite(r)) = r {
                    pos(*r, "R")?;
                }
                Ok(())
            }
            MonotonicityCone::SubR { r, gamma } | MonotonicityCone::SuperR { r, gamma } => {
                gam(gamma)?;
                pos(*r, "R")
            }
            MonotonicityCone::Pucci { lambda, cap_lambda, r, gamma } => {
                gam(gamma)?;
                pos(*r, "R")?;
                if !(*lambda >= 0.0 && lambda <= cap_lambda && cap_lambda.is_finite()) {
                    return Err(Error::Precondition("Pucci cone needs 0 ≤ λ ≤ Λ < ∞".into()));
                }
                Ok(())
            }
            MonotonicityCone::Delta { delta, r, gamma } => {
                gam(gamma)?;
                pos(*r, "R")?;
                pos(*delta, "δ")
            }
            MonotonicityCone::StrictElliptic { lambda, beta, d } => {
                pos(*lambda, "λ")?;
                pos(*beta, "β")?;
                d.validate(n)
            }
            MonotonicityCone::Parabolic { gamma } => {
                if n < 2 {
                    return Err(Error::Precondition("parabolic cone needs n ≥ 2 (space and time)".into()));
                }
                DirectionalCone::Parabolic { gamma: *gamma }.validate(n)
            }
            MonotonicityCone::JetCircular { axis, theta } => {
                if axis.dim() != n || !(axis.norm() > 0.0) {
                    return Err(Error::Precondition("circular cone axis must be a nonzero jet of matching dimension".into()));
                }
                if !(*theta >= 0.0 && *theta <= FRAC_PI_2) {
                    return Err(Error::Precondition("circular cone needs 0 ≤ θ ≤ π/2".into()));
                }
                Ok(())
            }
        }
    }

    /// All defining margins; J ∈ M iff every entry is ≥ 0.
    pub fn margins(&self, j: &Jet) -> Vec<f64> {
        let np = j.p.norm();
        let mut out = Vec::with_capacity(4);
        let push_gamma = |out: &mut Vec<f64>, g: &Option<f64>| {
            if let Some(g) = g {
                out.push(-j.r - g * np);
            }
        };
        match self {
            MonotonicityCone::Fundamental { gamma, d, r } => {
                push_gamma(&mut out, gamma);
                if !d.is_full() {
                    out.push(d.margin(&j.p));
                }
                match r {
                    None => {}
                    Some(Radius::Infinite) => out.push(j.a.lambda_min()),
                    Some(Radius::Finite(r)) => out.push(j.a.lambda_min() - np / r),
                }
            }
            MonotonicityCone::SubR { r, gamma } => {
                push_gamma(&mut out, gamma);
                let lam = j.a.eigs();
                out.push(lam[0]);
                out.push(geometric_mean(&lam) - np / r);
            }
            MonotonicityCone::SuperR { r, gamma } => {
                push_gamma(&mut out, gamma);
                out.push(j.a.lambda_min());
                out.push(min_on_sphere(&j.a, &(&j.p / *r)));
            }
            MonotonicityCone::Pucci { lambda, cap_lambda, r, gamma } => {
                push_gamma(&mut out, gamma);
                let lam = j.a.eigs();
                let pos: f64 = lam.iter().filter(|v| **v > 0.0).sum();
                let neg: f64 = lam.iter().filter(|v| **v < 0.0).sum();
                let n = lam.len() as f64;
                out.push(lambda * pos + cap_lambda * neg - lambda * n * np / r);
            }
            MonotonicityCone::Delta { delta, r, gamma } => {
                push_gamma(&mut out, gamma);
                out.push(j.a.lambda_min() + delta * j.a.trace() - np / r);
            }
            MonotonicityCone::StrictElliptic { lambda, beta, d } => {
                out.push(-j.r);
                if !d.is_full() {
                    out.push(d.margin(&j.p));
                }
                out.push(j.a.lambda_min());
                out.push(lambda * j.a.trace() - beta * np);
            }
            MonotonicityCone::Parabolic { gamma } => {
                let n = j.dim();
                out.push(-j.r);
                out.push(DirectionalCone::Parabolic { gamma: *gamma }.margin(&j.p));
                if n > 1 {
                    out.push(j.a.leading_block(n - 1).lambda_min());
                }
            }
            MonotonicityCone::JetCircular { axis, theta } => {
                let an = axis.norm();
                out.push(axis.dot(j) / an - theta.cos() * j.norm());
            }
        }
        out
    }

    /// min of `margins`; +∞ when the cone is all of J².
    pub fn margin(&self, j: &Jet) -> f64 {
        self.margins(j).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Margin of the dual cone M̃ = ∼(−Int M).
    pub fn dual_margin(&self, j: &Jet) -> f64 {
        -self.margin(&-j)
    }

    /// Closed-form polar margins where one is known.
    pub fn polar_margins(&self, j: &Jet) -> Result<Vec<f64>> {
        let s = j.r;
        let nq = j.p.norm();
        let bmin = || j.a.lambda_min();
        let tr = j.a.trace();
        match self {
            MonotonicityCone::Fundamental { gamma, d, r } => match (gamma, d.is_full(), r) {
                (None, true, Some(Radius::Infinite)) => Ok(vec![-s.abs(), -nq, bmin()]),
                (None, true, Some(Radius::Finite(rr))) => Ok(vec![-s.abs(), bmin(), tr - rr * nq]),
                (Some(g), true, None) => Ok(vec![-j.a.norm(), -s, -g * s - nq]),
                // the printed formula omits s ≤ 0, which the polar needs
                (Some(g), true, Some(Radius::Finite(rr))) => Ok(vec![bmin(), -s, tr - rr * (nq + g * s)]),
                (Some(g), true, Some(Radius::Infinite)) => Ok(vec![bmin(), -s, -g * s - nq]),
                (Some(g), false, Some(Radius::Infinite)) if *g == 0.0 => Ok(vec![-s, d.polar_margin(&j.p), bmin()]),
                _ => Err(Error::Capability(
                    "no closed-form polar for this member of the fundamental family".into(),
                )),
            },
            MonotonicityCone::JetCircular { axis, theta } => {
                Ok(vec![axis.dot(j) / axis.norm() - theta.sin() * j.norm()])
            }
            _ => Err(Error::Capability("no closed-form polar for this cone".into())),
        }
    }

    pub fn polar_margin(&self, j: &Jet) -> Result<f64> {
        Ok(self.polar_margins(j)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Random member. A fraction of draws sit on the boundary.
    pub fn sample_member(&self, rng: &mut JetRng, n: usize) -> Jet {
        let boundary = sample::uniform(rng, 0.0, 1.0) < 0.1;
        let slack = |rng: &mut JetRng| if boundary { 0.0 } else { sample::magnitude(rng) * sample::uniform(rng, 0.0, 1.0) };
        let r_for = |rng: &mut JetRng, g: &Option<f64>, np: f64| match g {
            None => sample::magnitude(rng) * sample::uniform(rng, -1.0, 1.0),
            Some(g) => -g * np - slack(rng),
        };
        match self {
            MonotonicityCone::Fundamental { gamma, d, r } => {
                let p = if d.is_full() {
                    if sample::uniform(rng, 0.0, 1.0) < 0.05 {
                        Vector::zeros(n)
                    } else {
                        sample::gaussian_vector(rng, n) * sample::magnitude(rng)
                    }
                } else {
                    d.sample(rng, n, 1.0)
                };
                let np = p.norm();
                let a = match r {
                    None => { let s = sample::magnitude(rng); sample::symmetric(rng, n, s) },
                    Some(rad) => {
                        let floor = match rad {
                            Radius::Infinite => 0.0,
                            Radius::Finite(rr) => np / rr,
                        };
                        let q = sample::orthogonal(rng, n);
                        let sc = sample::magnitude(rng);
                        let mut lam: Vec<f64> = (0..n).map(|_| floor + sc * sample::uniform(rng, 0.0, 1.0)).collect();
                        if boundary {
                            lam[0] = floor;
                        }
                        SymMatrix::from_spectrum(&q, &lam)
                    }
                };
                let rv = r_for(rng, gamma, np);
                Jet::from_parts(rv, p, a)
            }
            MonotonicityCone::SubR { gamma, .. }
            | MonotonicityCone::SuperR { gamma, .. }
            | MonotonicityCone::Pucci { gamma, .. }
            | MonotonicityCone::Delta { gamma, .. } => {
                let gamma = *gamma;
                // r is handled separately; search |p| along a random ray
                let reduced = self.without_gamma();
                loop {
                    let a = match self {
                        MonotonicityCone::SubR { .. } | MonotonicityCone::SuperR { .. } => { let s = sample::magnitude(rng); sample::psd(rng, n, s) },
                        _ => {
                            let sc = sample::magnitude(rng);
                            &sample::symmetric(rng, n, sc) + &SymMatrix::scalar(n, sc)
                        }
                    };
                    let dir = sample::unit_vector(rng, n);
                    let at = |t: f64| Jet::from_parts(0.0, &dir * t, a.clone());
                    if reduced.margin(&at(0.0)) < 0.0 {
                        continue;
                    }
                    let tmax = bisect_max(|t| reduced.margin(&at(t)) >= 0.0, 1.0);
                    let t = if boundary { tmax } else { tmax * sample::uniform(rng, 0.0, 1.0) };
                    let np = t;
                    let rv = r_for(rng, &gamma, np);
                    return Jet::from_parts(rv, &dir * t, a);
                }
            }
            MonotonicityCone::StrictElliptic { lambda, beta, d } => {
                let a = { let s = sample::magnitude(rng); sample::psd(rng, n, s) };
                let cap = lambda * a.trace() / beta;
                let mut p = d.sample(rng, n, 1.0);
                let np = p.norm();
                if np > 0.0 {
                    let t = if boundary { cap } else { cap * sample::uniform(rng, 0.0, 1.0) };
                    p *= t / np;
                }
                Jet::from_parts(-slack(rng), p, a)
            }
            MonotonicityCone::Parabolic { gamma } => {
                let d = DirectionalCone::Parabolic { gamma: *gamma };
                let p = d.sample(rng, n, 1.0);
                let mut a = { let s = sample::magnitude(rng); sample::psd(rng, n, s) }.into_matrix();
                let e = sample::magnitude(rng);
                for i in 0..n {
                    let v = e * sample::uniform(rng, -1.0, 1.0);
                    a[(i, n - 1)] += v;
                    a[(n - 1, i)] += v;
                }
                Jet::from_parts(-slack(rng), p, SymMatrix::symmetrized(a))
            }
            MonotonicityCone::JetCircular { axis, theta } => sample_jet_circular(rng, axis, *theta, boundary),
        }
    }

    /// Random member of the polar, for the variants with a closed form.
    pub fn sample_polar(&self, rng: &mut JetRng, n: usize) -> Result<Jet> {
        self.polar_margins(&Jet::zero(n))?;
        let b = { let s = sample::magnitude(rng); sample::psd(rng, n, s) };
        let mag = sample::magnitude(rng);
        let dir = sample::unit_vector(rng, n);
        let u = sample::uniform(rng, 0.0, 1.0);
        Ok(match self {
            MonotonicityCone::Fundamental { gamma, d, r } => match (gamma, d.is_full(), r) {
                (None, true, Some(Radius::Infinite)) => Jet::from_parts(0.0, Vector::zeros(n), b),
                (None, true, Some(Radius::Finite(rr))) => {
                    let q = &dir * (b.trace() / rr * u);
                    Jet::from_parts(0.0, q, b)
                }
                (Some(g), true, None) => {
                    let s = -mag;
                    let q = if *g > 0.0 { &dir * (-g * s * u) } else { Vector::zeros(n) };
                    Jet::from_parts(s, q, SymMatrix::zeros(n))
                }
                (Some(g), true, Some(Radius::Finite(rr))) => {
                    let s = -mag * sample::uniform(rng, 0.0, 1.0);
                    let cap = (b.trace() / rr - g * s).max(0.0);
                    Jet::from_parts(s, &dir * (cap * u), b)
                }
                (Some(g), true, Some(Radius::Infinite)) => {
                    let s = -mag;
                    let q = if *g > 0.0 { &dir * (-g * s * u) } else { Vector::zeros(n) };
                    Jet::from_parts(s, q, b)
                }
                (_, false, _) => Jet::from_parts(-mag * u, d.sample_polar(rng, n, 1.0), b),
                _ => unreachable!("checked by polar_margins"),
            },
            MonotonicityCone::JetCircular { axis, theta } => {
                let boundary = u < 0.1;
                sample_jet_circular(rng, axis, FRAC_PI_2 - theta, boundary)
            }
            _ => unreachable!("checked by polar_margins"),
        })
    }

    fn without_gamma(&self) -> MonotonicityCone {
        let mut c = self.clone();
        match &mut c {
            MonotonicityCone::SubR { gamma, .. }
            | MonotonicityCone::SuperR { gamma, .. }
            | MonotonicityCone::Pucci { gamma, .. }
            | MonotonicityCone::Delta { gamma, .. }
            | MonotonicityCone::Fundamental { gamma, .. } => *gamma = None,
            _ => {}
        }
        c
    }

    /// A jet in the interior of this cone, used as the default axis J₀.
    pub fn interior_axis(&self, n: usize) -> Jet {
        match self {
            MonotonicityCone::Fundamental { d, .. } | MonotonicityCone::StrictElliptic { d, .. } if !d.is_full() => {
                let (c, _) = d.inner_ball(n).unwrap_or((Vector::zeros(n), 1.0));
                // scale p small enough that the A and r constraints stay strict
                let p = c * 1e-3;
                Jet::from_parts(-1.0, p, SymMatrix::identity(n))
            }
            MonotonicityCone::Parabolic { .. } => {
                let mut p = Vector::zeros(n);
                p[n - 1] = -1e-3;
                Jet::from_parts(-1.0, p, SymMatrix::identity(n))
            }
            MonotonicityCone::JetCircular { axis, .. } => axis.clone(),
            _ => Jet::from_parts(-1.0, Vector::zeros(n), SymMatrix::identity(n)),
        }
    }
}

fn sample_jet_circular(rng: &mut JetRng, axis: &Jet, theta: f64, boundary: bool) -> Jet {
    let n = axis.dim();
    let a = axis.scale(1.0 / axis.norm());
    let w = sample::jet(rng, n);
    let w = w.axpy(-w.dot(&a), &a);
    let wn = w.norm();
    let lateral = if wn > 1e-12 { w.scale(1.0 / wn) } else { Jet::zero(n) };
    let t = theta.tan() * if boundary { 1.0 } else { sample::uniform(rng, 0.0, 1.0) };
    let t = if t.is_finite() { t } else { 0.0 };
    a.axpy(t, &lateral).scale(sample::magnitude(rng))
}

/// Largest t ≥ 0 with ok(t), assuming {t : ok(t)} is an interval [0, t*].
fn bisect_max(ok: impl Fn(f64) -> bool, start: f64) -> f64 {
    let mut hi = start;
    while ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// (Π max(λ, 0))^{1/n}
fn geometric_mean(lam: &[f64]) -> f64 {
    let n = lam.len() as f64;
    if lam.iter().any(|v| *v <= 0.0) {
        return 0.0;
    }
    (lam.iter().map(|v| v.ln()).sum::<f64>() / n).exp()
}

/// min over unit e of ⟨Ae, e⟩ − ⟨g, e⟩, via the secular equation of the
/// trust-region subproblem (hard case included).
pub fn min_on_sphere(a: &SymMatrix, g: &Vector) -> f64 {
    let (lam, q) = a.eigen();
    let n = lam.len();
    // xᵀΛx − 2bᵀx with b = Qᵀg/2
    let b: Vec<f64> = (0..n).map(|i| q.column(i).dot(g) * 0.5).collect();
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let l1 = lam[0];
    if bn == 0.0 {
        return l1;
    }
    let scale = 1.0 + lam.iter().fold(0.0f64, |m, v| m.max(v.abs())) + bn;
    let tie = 1e-12 * scale;
    let degenerate = (0..n).filter(|&i| lam[i] - l1 <= tie).map(|i| b[i] * b[i]).sum::<f64>();
    let value = |mu: f64, skip_tied: bool| {
        mu - (0..n)
            .filter(|&i| !(skip_tied && lam[i] - l1 <= tie))
            .map(|i| b[i] * b[i] / (lam[i] - mu))
            .sum::<f64>()
    };
    if degenerate <= (1e-14 * scale).powi(2) {
        let phi: f64 = (0..n).filter(|&i| lam[i] - l1 > tie).map(|i| (b[i] / (lam[i] - l1)).powi(2)).sum();
        if phi <= 1.0 {
            return value(l1, true);
        }
    }
    let phi = |mu: f64| (0..n).map(|i| (b[i] / (lam[i] - mu)).powi(2)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (l1 - bn, l1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    value(lo, false)
}

pub fn cone_member(m: &MonotonicityCone, j: &Jet) -> bool {
    let t = tol(j);
    m.margins(j).iter().all(|v| *v >= -t)
}

pub fn cone_interior(m: &MonotonicityCone, j: &Jet) -> bool {
    let t = tol(j);
    m.margins(j).iter().all(|v| *v > t)
}

pub fn cone_dual_member(m: &MonotonicityCone, j: &Jet) -> bool {
    m.dual_margin(j) >= -tol(j)
}

pub fn polar_member(m: &MonotonicityCone, j: &Jet) -> Result<bool> {
    let t = tol(j);
    Ok(m.polar_margins(j)?.iter().all(|v| *v >= -t))
}

/// Output of `fundamental_embed`: M(γ, D, R) ⊂ M with D a circular cone.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub gamma: f64,
    pub d: DirectionalCone,
    pub r: f64,
    /// The interior jet the construction started from.
    pub base: Jet,
    pub delta: f64,
}

impl Embedding {
    pub fn cone(&self) -> MonotonicityCone {
        MonotonicityCone::fundamental(Some(self.gamma), self.d.clone(), Some(Radius::Finite(self.r)))
    }
}

/// Finds (γ, D, R) with M(γ, D, R) ⊂ M from an interior point of M.
///
/// Perturb to p ≠ 0, find a ball {r} × B_δ(p) × {A} inside Int M, then
/// t₀ = 1.1·max(−r, λ_max(A)), ε = δ/t₀, D = cone over B_δ(p), R < ε,
/// γ = 1/R. δ is kept below |p|/2 so that every ray of D meets the ball at
/// distance ≥ |p| − δ ≥ δ from the origin.
pub fn fundamental_embed(
    interior: impl Fn(&Jet) -> bool,
    n: usize,
    probe: Option<&Jet>,
    seed: u64,
) -> Result<Embedding> {
    let mut rng = sample::rng(seed);
    let mut base = None;
    if let Some(p) = probe {
        if p.dim() == n && interior(p) {
            base = Some(p.clone());
        }
    }
    if base.is_none() {
        let stock = Jet::from_parts(-1.0, Vector::zeros(n), SymMatrix::identity(n));
        if interior(&stock) {
            base = Some(stock);
        }
    }
    if base.is_none() {
        base = (0..10_000).map(|_| sample::jet(&mut rng, n)).find(|j| interior(j));
    }
    let mut j = base.ok_or_else(|| Error::SearchFailure("no interior point found after 10^4 draws".into()))?;

    let small = 1e-8 * (1.0 + j.norm());
    if j.p.norm() < small {
        let dir = sample::unit_vector(&mut rng, n);
        let mut eta = 1.0;
        let mut found = None;
        for _ in 0..60 {
            let cand = Jet::from_parts(j.r, &j.p + &dir * eta, j.a.clone());
            if interior(&cand) {
                found = Some(cand);
                break;
            }
            eta *= 0.5;
        }
        j = found.ok_or_else(|| Error::SearchFailure("could not perturb the gradient slot away from 0".into()))?;
    }

    let np = j.p.norm();
    let probes: Vec<Vector> = {
        let mut v: Vec<Vector> = (0..n)
            .flat_map(|i| {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                [e.clone(), -e]
            })
            .collect();
        v.extend((0..64).map(|_| sample::unit_vector(&mut rng, n)));
        v
    };
    let mut delta = 0.5 * np;
    let mut ok = false;
    for _ in 0..60 {
        if probes
            .iter()
            .all(|u| interior(&Jet::from_parts(j.r, &j.p + u * delta, j.a.clone())))
        {
            ok = true;
            break;
        }
        delta *= 0.5;
    }
    if !ok {
        return Err(Error::SearchFailure("no ball around the gradient slot fits inside Int M".into()));
    }
    delta *= 0.5;

    let raw = (-j.r).max(j.a.lambda_max());
    let t0 = 1.1 * if raw > 0.0 { raw } else { 1.0 };
    let eps = delta / t0;
    let r = 0.9 * eps;
    let theta = (delta / np).asin();
    Ok(Embedding {
        gamma: 1.0 / r,
        d: DirectionalCone::Circular { b: j.p.iter().copied().collect(), theta },
        r,
        base: j,
        delta,
    })
}

/// Closed-form strict approximators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Approximator {
    /// −c + ½|x − y|²
    Quadratic { center: Vec<f64>, c: f64 },
    /// |x − y|^{m+1}/(m+1) − shift
    Monomial { center: Vec<f64>, m: u32, shift: f64 },
    /// e^{μ|x − y|}/μ − m
    Exponential { center: Vec<f64>, mu: f64, m: f64 },
    /// −c + ½|x′ − y′|² − k·t, for the parabolic cone (t is the last coordinate)
    Parabolic { center: Vec<f64>, k: f64, c: f64 },
}

impl Approximator {
    pub fn value(&self, x: &Vector) -> f64 {
        self.jet(x).map(|j| j.r).unwrap_or(f64::NAN)
    }

    pub fn jet(&self, x: &Vector) -> Result<Jet> {
        let n = x.len();
        let center = |c: &Vec<f64>| Vector::from_column_slice(c);
        match self {
            Approximator::Quadratic { center: y, c } => {
                let d = x - center(y);
                Ok(Jet::from_parts(-c + 0.5 * d.norm_squared(), d, SymMatrix::identity(n)))
            }
            Approximator::Monomial { center: y, m, shift } => {
                let d = x - center(y);
                let t = d.norm();
                if !(t > 0.0) {
                    return Err(Error::Domain("monomial approximator is singular at its center".into()));
                }
                let mf = *m as f64;
                let (px, perp) = crate::jets::projections(&d)?;
                let tm1 = t.powf(mf - 1.0);
                let a = &(&perp + &(&px * mf)) * tm1;
                Ok(Jet::from_parts(t.powf(mf + 1.0) / (mf + 1.0) - shift, d * tm1, a))
            }
            Approximator::Exponential { center: y, mu, m } => {
                let d = x - center(y);
                let t = d.norm();
                if !(t > 0.0) {
                    return Err(Error::Domain("exponential approximator is singular at its center".into()));
                }
                let e = (mu * t).exp();
                let (px, perp) = crate::jets::projections(&d)?;
                let a = &(&perp * (e / t)) + &(&px * (mu * e));
                Ok(Jet::from_parts(e / mu - m, d * (e / t), a))
            }
            Approximator::Parabolic { center: y, k, c } => {
                let mut d = x - center(y);
                let t = d[n - 1];
                d[n - 1] = 0.0;
                let v = -c + 0.5 * d.norm_squared() - k * t;
                let mut p = d;
                p[n - 1] = -k;
                let mut lam = vec![1.0; n];
                lam[n - 1] = 0.0;
                Ok(Jet::from_parts(v, p, SymMatrix::diag(&lam)))
            }
        }
    }
}

/// Where the approximator must work: a ball (boxes are replaced by their
/// circumscribed ball).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn ball(&self) -> (Vector, f64) {
        match self {
            Domain::Ball { center, radius } => (Vector::from_column_slice(center), *radius),
            Domain::Box { lo, hi } => {
                let lo = Vector::from_column_slice(lo);
                let hi = Vector::from_column_slice(hi);
                ((&lo + &hi) * 0.5, (hi - lo).norm() * 0.5)
            }
        }
    }
}

/// Smallest integer exceeding x, at least `floor`.
fn smallest_above(x: f64, floor: u32) -> u32 {
    let m = x.floor() + 1.0;
    (m.max(floor as f64)) as u32
}

/// The smallest admissible monomial degree for the enlarged cones on a ball
/// of radius ρ (strict inequalities).
pub fn monomial_degree(m: &MonotonicityCone, rho: f64, n: usize) -> Result<u32> {
    let nf = n as f64;
    match m {
        MonotonicityCone::SubR { r, .. } => Ok(smallest_above((rho / r).powf(nf), 1)),
        MonotonicityCone::SuperR { r, .. } => Ok(smallest_above(1.0 + rho * rho / (4.0 * r * r), 2)),
        MonotonicityCone::Pucci { lambda, r, .. } => {
            if !(*lambda > 0.0) {
                return Err(Error::Infeasible("the Pucci cone with λ = 0 has no strict radial approximator".into()));
            }
            Ok(smallest_above(1.0 + nf * (rho / r - 1.0), 1))
        }
        MonotonicityCone::Delta { delta, r, .. } => Ok(smallest_above(1.0 - nf + (rho - r) / (delta * r), 1)),
        _ => Err(Error::Capability("monomial approximators are for the enlarged cones".into())),
    }
}

/// Builds a strict approximator for M on `domain` and checks it on every
/// non-excluded grid point.
///
/// `degree` overrides the monomial degree for the enlarged cones.
pub fn strict_approximator(
    m: &MonotonicityCone,
    domain: &Domain,
    grid: &GridDomain,
    degree: Option<u32>,
) -> Result<(Approximator, VerificationReport)> {
    let (c0, rho) = domain.ball();
    let n = c0.len();
    m.validate(n)?;
    const ETA: f64 = 0.1;
    // translate so that the ball sits strictly inside D
    let offset = |d: &DirectionalCone| match d.inner_ball(n) {
        None => Vector::zeros(n),
        Some((c, rad)) => &c * (rho * (1.0 + ETA) / rad),
    };
    let approx = match m {
        MonotonicityCone::Fundamental { gamma, d, r } => {
            let v = offset(d);
            let y = &c0 - &v;
            let reach = v.norm() + rho;
            if let Some(Radius::Finite(rr)) = r {
                if reach >= *rr {
                    return Err(Error::Infeasible(format!(
                        "domain reaches {reach:.6} from the approximator center but R = {rr}: with finite R \
                         comparison is only available on translates of D ∩ B_R(0)"
                    )));
                }
            }
            let g = gamma.unwrap_or(0.0);
            Approximator::Quadratic { center: y.iter().copied().collect(), c: reach * reach / 2.0 + g * reach + 1.0 }
        }
        MonotonicityCone::SubR { gamma, .. }
        | MonotonicityCone::SuperR { gamma, .. }
        | MonotonicityCone::Pucci { gamma, .. }
        | MonotonicityCone::Delta { gamma, .. } => {
            let deg = match degree {
                Some(d) => d,
                None => monomial_degree(m, rho, n)?,
            };
            let mf = deg as f64;
            let shift = match gamma {
                None => 0.0,
                Some(g) => rho.powf(mf + 1.0) / (mf + 1.0) + g * rho.powf(mf) + 1.0,
            };
            Approximator::Monomial { center: c0.iter().copied().collect(), m: deg, shift }
        }
        MonotonicityCone::StrictElliptic { lambda, beta, d } => {
            let v = if d.is_full() {
                let mut e = Vector::zeros(n);
                e[0] = rho * (1.0 + ETA);
                e
            } else {
                offset(d)
            };
            let y = &c0 - &v;
            let reach = v.norm() + rho;
            let mu = beta / lambda + 1.0;
            Approximator::Exponential { center: y.iter().copied().collect(), mu, m: (mu * reach).exp() / mu + 1.0 }
        }
        MonotonicityCone::Parabolic { gamma } => {
            let k = gamma * rho + 1.0;
            let c = rho * rho / 2.0 + k * rho + 1.0;
            Approximator::Parabolic { center: c0.iter().copied().collect(), k, c }
        }
        MonotonicityCone::JetCircular { .. } => {
            return Err(Error::Capability("no strict approximator construction for circular jet cones".into()))
        }
    };

    let mut report = VerificationReport::new(0);
    for x in grid.all_points() {
        let j = approx.jet(x)?;
        let margin = m.margin(&j);
        let ok = margin > tol(&j);
        report.observe(margin, Some(&j), Some(x.as_slice()));
        report.points.push(PointRecord { x: x.iter().copied().collect(), margin, ok });
        if !ok {
            report.fail();
        }
    }
    if report.n_samples == 0 {
        return Err(Error::Resolution("grid has no points".into()));
    }
    Ok((approx, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(r: f64, p: &[f64], a: SymMatrix) -> Jet {
        Jet::from_slices(r, p, a).unwrap()
    }

    #[test]
    fn membership_examples() {
        let n = 2;
        let all = [
            MonotonicityCone::m_p(),
            MonotonicityCone::m_r(1.0),
            MonotonicityCone::m_gamma(3.0),
            MonotonicityCone::fundamental(Some(1.0), DirectionalCone::HalfSpace { b: vec![1.0, 0.0] }, Some(Radius::Finite(2.0))),
        ];
        for m in &all {
            assert!(cone_member(m, &j(-1.0, &[0.0, 0.0], SymMatrix::identity(n))));
        }
        let m = MonotonicityCone::fundamental(Some(1.0), DirectionalCone::Full, Some(Radius::Finite(1.0)));
        assert!(cone_member(&m, &j(-2.0, &[1.0, 0.0], SymMatrix::scalar(2, 2.0))));
        assert!(!cone_member(&MonotonicityCone::m_gamma(1.0), &j(-0.5, &[1.0, 0.0], SymMatrix::identity(2))));
    }

    #[test]
    fn interior_examples() {
        let full = MonotonicityCone::fundamental(Some(1.0), DirectionalCone::Full, Some(Radius::Finite(1.0)));
        let half = MonotonicityCone::fundamental(Some(1.0), DirectionalCone::HalfSpace { b: vec![0.0, 1.0] }, Some(Radius::Finite(1.0)));
        let vertex = j(-1.0, &[0.0, 0.0], SymMatrix::identity(2));
        assert!(cone_interior(&full, &vertex));
        assert!(!cone_interior(&half, &vertex));
        assert!(!cone_interior(&full, &j(0.0, &[0.0, 0.0], SymMatrix::identity(2))));
    }

    #[test]
    fn dual_of_m_r() {
        let m = MonotonicityCone::m_r(1.0);
        assert!(cone_dual_member(&m, &j(0.0, &[0.5, 0.0], SymMatrix::diag(&[-0.5, -1.0]))));
        assert!(!cone_dual_member(&m, &j(0.0, &[0.0, 0.0], SymMatrix::scalar(2, -1.0))));
    }

    #[test]
    fn polar_examples() {
        let mp = MonotonicityCone::m_p();
        assert!(polar_member(&mp, &j(0.0, &[0.0, 0.0], SymMatrix::identity(2))).unwrap());
        assert!(!polar_member(&mp, &j(1.0, &[0.0, 0.0], SymMatrix::identity(2))).unwrap());
        let mg = MonotonicityCone::m_gamma(2.0);
        assert!(polar_member(&mg, &j(-1.0, &[1.2, -1.0], SymMatrix::zeros(2))).unwrap());
        assert!(!polar_member(&mg, &j(-1.0, &[2.5, 0.0], SymMatrix::zeros(2))).unwrap());
        assert!(matches!(
            polar_member(&MonotonicityCone::SubR { r: 1.0, gamma: None }, &Jet::zero(2)),
            Err(Error::Capability(_))
        ));
    }

    /// Brute-force angular minimum as an oracle for the secular solver.
    #[test]
    fn sphere_minimum_matches_angular_grid() {
        let mut rng = sample::rng(5);
        for case in 0..40 {
            let a = if case % 5 == 0 { SymMatrix::scalar(2, 0.7) } else { sample::symmetric(&mut rng, 2, 2.0) };
            let g = if case % 7 == 0 { Vector::zeros(2) } else { sample::gaussian_vector(&mut rng, 2) };
            let got = min_on_sphere(&a, &g);
            let k = 200_000;
            let brute = (0..k)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    let e = Vector::from_vec(vec![th.cos(), th.sin()]);
                    e.dot(&(a.matrix() * &e)) - g.dot(&e)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(got <= brute + 1e-9, "case {case}: {got} > {brute}");
            assert!(brute - got < 1e-6, "case {case}: {got} vs {brute}");
        }
    }

    #[test]
    fn hard_case_on_sphere() {
        // g orthogonal to the bottom eigenvector and small
        let a = SymMatrix::diag(&[0.0, 2.0, 2.0]);
        let g = Vector::from_vec(vec![0.0, 0.1, 0.0]);
        let got = min_on_sphere(&a, &g);
        // x = (√(1−c²), c, 0) with c = 0.1/4 gives −0.1²/8
        assert!((got + 0.01 / 8.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn json_schema() {
        let m = MonotonicityCone::fundamental(Some(1.0), DirectionalCone::Orthant { k: 1 }, Some(Radius::Infinite));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"variant":"fundamental","gamma":1.0,"D":{"kind":"orthant","k":1},"R":"inf"}"#);
        let back: MonotonicityCone = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let m: MonotonicityCone = serde_json::from_str(r#"{"variant":"fundamental","R":2}"#).unwrap();
        assert_eq!(m, MonotonicityCone::m_r(2.0));
        assert!(serde_json::from_str::<MonotonicityCone>(r#"{"variant":"fundamental","R":-1}"#).is_err());
    }

    #[test]
    fn monomial_degrees() {
        assert_eq!(monomial_degree(&MonotonicityCone::SubR { r: 1.0, gamma: None }, 2.0, 2).unwrap(), 5);
        assert_eq!(monomial_degree(&MonotonicityCone::SuperR { r: 1.0, gamma: None }, 2.0, 2).unwrap(), 3);
    }

    fn embedded_samples_stay_inside(target: &MonotonicityCone, probe: Option<&Jet>) {
        let n = 2;
        let t = target.clone();
        let e = fundamental_embed(move |j| cone_interior(&t, j), n, probe, 3).unwrap();
        assert!(e.gamma.is_finite() && e.r.is_finite() && e.r > 0.0);
        let inner = e.cone();
        let mut rng = sample::rng(4);
        for _ in 0..10_000 {
            let j = inner.sample_member(&mut rng, n);
            assert!(cone_member(target, &j), "{e:?}: {j:?}");
        }
    }

    #[test]
    fn embed_n_times_p() {
        embedded_samples_stay_inside(&MonotonicityCone::m_np(), None);
    }

    #[test]
    fn embed_fundamental_half_space() {
        let m = MonotonicityCone::fundamental(Some(0.5), DirectionalCone::HalfSpace { b: vec![0.0, 1.0] }, Some(Radius::Finite(2.0)));
        embedded_samples_stay_inside(&m, None);
    }

    #[test]
    fn embed_from_a_probe_at_p_zero() {
        // the probe has p = 0 and must be perturbed before a ball fits
        let probe = j(-1.0, &[0.0, 0.0], SymMatrix::identity(2));
        embedded_samples_stay_inside(&MonotonicityCone::m_np(), Some(&probe));
    }
}
