//! The operator catalog: named operators wired to their constraint sets,
//! claimed monotonicity cones and admissible levels.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::cones::{DirectionalCone, MonotonicityCone, Radius};
use crate::error::{Error, Result};
use crate::garding::{self, GArg, GardingPolynomial};
use crate::jets::{projections, Jet, SymMatrix, Vector};
use crate::report::VerificationReport;
use crate::sample;
use crate::subeq::{dual_margin, CompatiblePair, ConstraintSet, Interval, ReducedAxes};

/// Catalog parameters. Only the ones an entry reads are used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Gårding polynomial name, see `garding::by_name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    /// r-profile: one, neg_r, affine_power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Gradient factor: half_space, orthant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    /// Spatial part of a parabolic operator: trace, lambda_min, det.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Coefficient jet of the linear operator.
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub jet: Option<Jet>,
}

impl Params {
    pub fn n(n: usize) -> Self {
        Params { n: Some(n), ..Default::default() }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn with_alpha(mut self, a: f64) -> Self {
        self.alpha = Some(a);
        self
    }
}

/// A fully wired catalog entry.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub name: String,
    pub params: Params,
    pub pair: CompatiblePair,
    pub claimed_cone: Option<MonotonicityCone>,
    /// J₀ with F(J + tJ₀) = F(J) + t, for the entries that are canonical.
    pub axis: Option<Jet>,
    pub gradient_free: bool,
    pub parabolic: bool,
    pub description: String,
}

/// JSON-facing summary for `ops show`.
#[derive(Clone, Debug, Serialize)]
pub struct SpecInfo {
    pub name: String,
    pub params: Params,
    pub description: String,
    pub constrained: bool,
    pub c0: f64,
    pub levels: Interval,
    pub claimed_cone: Option<MonotonicityCone>,
    pub canonical_axis: Option<Jet>,
    pub gradient_free: bool,
}

impl OperatorSpec {
    pub fn info(&self) -> SpecInfo {
        SpecInfo {
            name: self.name.clone(),
            params: self.params.clone(),
            description: self.description.clone(),
            constrained: self.pair.constraint.is_some(),
            c0: self.pair.c0,
            levels: self.pair.levels,
            claimed_cone: self.claimed_cone.clone(),
            canonical_axis: self.axis.clone(),
            gradient_free: self.gradient_free,
        }
    }

    pub fn n(&self) -> usize {
        self.pair.n
    }

    /// The subequation {F ≥ 0} (with the constraint), when 0 is admissible.
    pub fn zero_set(&self) -> Result<ConstraintSet> {
        let mut s = crate::subeq::level_set(&self.pair, 0.0)?;
        s.monotone_cone = self.claimed_cone.clone();
        Ok(s)
    }
}

/// Names accepted by `catalog`.
pub const NAMES: &[&str] = &[
    "lambda_min",
    "lambda_max",
    "truncated_laplacian",
    "tau_k",
    "special_lagrangian",
    "det_MA",
    "sigma_k",
    "garding_branch",
    "gradient_free_garding",
    "affine_sphere",
    "det_minus_r",
    "directional",
    "optimal_transport",
    "F_plus_kR",
    "F_minus_kR",
    "alpha_F",
    "alpha_G",
    "linear",
    "parabolic_P1",
    "parabolic_FP1",
];

fn need<T: Copy>(v: Option<T>, what: &str, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Precondition(format!("{name} needs parameter {what}")))
}

fn axis_a(n: usize, s: f64) -> Jet {
    Jet::from_parts(0.0, Vector::zeros(n), SymMatrix::scalar(n, s))
}

/// h(r) profiles.
fn h_profile(name: &str, n: usize) -> Result<fn(f64, usize) -> f64> {
    Ok(match name {
        "one" => |_, _| 1.0,
        "neg_r" => |r, _| -r,
        "affine_power" => |r, n| (-r).powi(n as i32 + 2),
        _ => return Err(Error::UnknownName(format!("unknown h profile '{name}' (one|neg_r|affine_power) for n = {n}"))),
    })
}

/// Gradient factor d and its directional cone.
fn gradient_factor(name: &str, n: usize, k: Option<usize>) -> Result<(Box<dyn Fn(&Vector) -> f64 + Send + Sync>, DirectionalCone)> {
    match name {
        "half_space" => {
            let mut b = vec![0.0; n];
            b[n - 1] = 1.0;
            Ok((Box::new(move |p: &Vector| p[n - 1]), DirectionalCone::HalfSpace { b }))
        }
        "orthant" => {
            let k = k.unwrap_or(n);
            if k == 0 || k > n {
                return Err(Error::Precondition(format!("orthant factor needs 1 ≤ k ≤ {n}")));
            }
            Ok((Box::new(move |p: &Vector| p.iter().take(k).product()), DirectionalCone::Orthant { k }))
        }
        _ => Err(Error::UnknownName(format!("unknown gradient factor '{name}' (half_space|orthant)"))),
    }
}

/// B(p, A) = A + |p|^{(α−1)/α}(P_{p⊥} + αP_p), B(0, A) = A.
pub fn alpha_b(alpha: f64, p: &Vector, a: &SymMatrix) -> SymMatrix {
    let np = p.norm();
    if np == 0.0 {
        return a.clone();
    }
    let (px, perp) = projections(p).expect("p ≠ 0");
    let w = np.powf((alpha - 1.0) / alpha);
    a + &(&(&perp + &(&px * alpha)) * w)
}

/// Builds a catalog entry.
pub fn catalog(name: &str, params: &Params) -> Result<OperatorSpec> {
    let n = params.n.unwrap_or(2);
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let k_or = |d: usize| params.k.unwrap_or(d);
    let mk = |pair: CompatiblePair, cone: Option<MonotonicityCone>, axis: Option<Jet>, gf: bool, desc: &str| OperatorSpec {
        name: name.to_string(),
        params: Params { n: Some(n), ..params.clone() },
        pair,
        claimed_cone: cone,
        axis,
        gradient_free: gf,
        parabolic: false,
        description: desc.to_string(),
    };
    let rk = |k: usize| -> Result<()> {
        if k == 0 || k > n {
            Err(Error::Precondition(format!("{name} needs 1 ≤ k ≤ n = {n}, got {k}")))
        } else {
            Ok(())
        }
    };
    let mp = MonotonicityCone::m_p();
    let pure = ReducedAxes { r: true, p: true, a: false };
    let spec = match name {
        "lambda_min" | "lambda_max" => {
            let min = name == "lambda_min";
            let op = move |j: &Jet| if min { j.a.lambda_min() } else { j.a.lambda_max() };
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(mp.clone()));
            mk(pair, Some(mp), Some(axis_a(n, 1.0)), true, "extreme eigenvalue of A")
        }
        "truncated_laplacian" => {
            let k = k_or(1);
            rk(k)?;
            let op = move |j: &Jet| j.a.eigs().iter().take(k).sum::<f64>();
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(mp.clone()));
            mk(pair, Some(mp), Some(axis_a(n, 1.0 / k as f64)), true, "λ₁(A) + ⋯ + λ_k(A)")
        }
        "tau_k" => {
            let k = k_or(1);
            rk(k)?;
            let cons = ConstraintSet::new(n, "Γ(τ_k)", move |j: &Jet| j.a.eigs().iter().take(k).sum::<f64>())
                .with_cone(mp.clone())
                .with_reduced(pure)
                .with_tame(true);
            let op = move |j: &Jet| garding::subset_sum_product(&j.a.eigs(), k);
            let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
            mk(pair, Some(mp), None, true, "T_k(A): product of all k-fold eigenvalue sums, on its Gårding cone")
        }
        "special_lagrangian" => {
            let op = |j: &Jet| j.a.eigs().iter().map(|l| l.atan()).sum::<f64>();
            let half = n as f64 * FRAC_PI_2;
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::open(-half, half), Some(mp.clone()));
            mk(pair, Some(mp), None, true, "Σ arctan λ_k(A)")
        }
        "det_MA" => {
            let op = |j: &Jet| j.a.matrix().determinant();
            let pair = CompatiblePair::constrained(name, op, ConstraintSet::psd(n), 0.0, Interval::closed_ray(0.0));
            mk(pair, Some(mp), None, true, "det A on P (real Monge–Ampère)")
        }
        "sigma_k" | "garding_branch" => {
            let g = if name == "garding_branch" {
                garding::by_name(params.poly.as_deref().unwrap_or("det"), n)?
            } else {
                GardingPolynomial::sigma(n, k_or(1))?
            };
            if g.is_lifted() {
                return Err(Error::Precondition("garding_branch needs a pure second order polynomial".into()));
            }
            let g1 = g.clone();
            let cons = ConstraintSet::new(n, format!("Γ̄({})", g.name()), move |j: &Jet| {
                garding::garding_eigs(&g1, &GArg::pure(j.a.clone())).map_or(f64::NAN, |l| l[0])
            })
            .with_cone(mp.clone())
            .with_reduced(pure)
            .with_tame(true);
            if name == "sigma_k" {
                let k = k_or(1);
                let op = move |j: &Jet| garding::elementary(&j.a.eigs(), k);
                let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
                mk(pair, Some(mp), None, true, "σ_k(λ(A)) on the closed Gårding cone (k-Hessian)")
            } else {
                let branch = params.k.unwrap_or(1);
                if branch == 0 || branch > g.degree() {
                    return Err(Error::Precondition(format!("branch index must be in 1..={}", g.degree())));
                }
                let op = move |j: &Jet| garding::branch_margin(&g, branch, &GArg::pure(j.a.clone())).unwrap_or(f64::NAN);
                let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(mp.clone()));
                mk(pair, Some(mp), Some(axis_a(n, 1.0)), true, "Gårding eigenvalue λ_k^g(A); canonical for the branch Λ_k")
            }
        }
        "gradient_free_garding" | "affine_sphere" => {
            let (g, hname) = if name == "affine_sphere" {
                (GardingPolynomial::det(n), "affine_power".to_string())
            } else {
                (
                    garding::by_name(params.poly.as_deref().unwrap_or("det"), n)?,
                    params.h.clone().unwrap_or_else(|| "neg_r".into()),
                )
            };
            if g.is_lifted() {
                return Err(Error::Precondition("the A-factor must be a pure second order polynomial".into()));
            }
            let h = h_profile(&hname, n)?;
            let g1 = g.clone();
            let gamma = ConstraintSet::new(n, "Γ̄", move |j: &Jet| {
                garding::garding_eigs(&g1, &GArg::pure(j.a.clone())).map_or(f64::NAN, |l| l[0])
            });
            // h ≡ 1 does not vanish at r = 0, so the r-constraint is dropped
            let with_n = hname != "one";
            let cone = if with_n { MonotonicityCone::m_np() } else { mp.clone() };
            let gm = gamma.margin_fn();
            let cons = ConstraintSet::new(n, format!("N x R^n x Γ̄({})", g.name()), move |j: &Jet| {
                let m = gm(j);
                if with_n {
                    m.min(-j.r)
                } else {
                    m
                }
            })
            .with_cone(cone.clone())
            .with_tame(true);
            let op = move |j: &Jet| h(j.r, n) * g.eval(&GArg::pure(j.a.clone())).unwrap_or(f64::NAN);
            let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
            let desc = if name == "affine_sphere" {
                "(−r)^{n+2} det A on N × ℝⁿ × P (hyperbolic affine spheres)"
            } else {
                "h(r) g(A) on N × ℝⁿ × Γ̄"
            };
            mk(pair, Some(cone), None, true, desc)
        }
        "det_minus_r" => {
            let op = |j: &Jet| j.a.matrix().determinant() - j.r;
            let cone = MonotonicityCone::m_np();
            let cons = ConstraintSet::psd(n).with_cone(cone.clone());
            let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
            mk(pair, Some(cone), None, true, "det A − r on ℝ × ℝⁿ × P; not a compatible pair")
        }
        "directional" | "optimal_transport" => {
            let (hname, g) = if name == "optimal_transport" {
                ("one".to_string(), GardingPolynomial::det(n))
            } else {
                (
                    params.h.clone().unwrap_or_else(|| "neg_r".into()),
                    garding::by_name(params.poly.as_deref().unwrap_or("det"), n)?,
                )
            };
            let h = h_profile(&hname, n)?;
            let (d, dcone) = gradient_factor(params.d.as_deref().unwrap_or("half_space"), n, params.k)?;
            let with_n = hname != "one";
            let gamma_slot = if with_n { Some(0.0) } else { None };
            let cone = MonotonicityCone::fundamental(gamma_slot, dcone.clone(), Some(Radius::Infinite));
            let g1 = g.clone();
            let dc = dcone.clone();
            let cons = ConstraintSet::new(n, "N x D x Γ̄", move |j: &Jet| {
                let m = garding::garding_eigs(&g1, &GArg::pure(j.a.clone())).map_or(f64::NAN, |l| l[0]).min(dc.margin(&j.p));
                if with_n {
                    m.min(-j.r)
                } else {
                    m
                }
            })
            .with_cone(cone.clone())
            .with_tame(true);
            let op = move |j: &Jet| h(j.r, n) * d(&j.p) * g.eval(&GArg::pure(j.a.clone())).unwrap_or(f64::NAN);
            let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
            let desc = if name == "optimal_transport" {
                "d(p) det A on ℝ × D × P"
            } else {
                "h(r) d(p) g(A) on N × D × Γ̄"
            };
            mk(pair, Some(cone), None, false, desc)
        }
        "F_plus_kR" | "F_minus_kR" => {
            let k = k_or(1);
            rk(k)?;
            let r = need(params.radius, "R", name)?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Precondition("R must be positive and finite".into()));
            }
            let sign = if name == "F_plus_kR" { 1.0 } else { -1.0 };
            let op = move |j: &Jet| j.a.eigs()[k - 1] + sign * j.p.norm() / r;
            let cone = MonotonicityCone::m_r(r);
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(cone.clone()));
            mk(pair, Some(cone), Some(axis_a(n, 1.0)), false, "λ_k(A) ± |p|/R")
        }
        "alpha_F" | "alpha_G" => {
            let alpha = need(params.alpha, "alpha", name)?;
            if alpha == 1.0 {
                return Err(Error::Precondition(
                    "α = 1 gives pure second order operators and is treated separately; use α > 1".into(),
                ));
            }
            if !(alpha > 1.0 && alpha.is_finite()) {
                return Err(Error::Precondition(format!("the α-family needs α > 1, got {alpha}")));
            }
            let min = name == "alpha_F";
            let op = move |j: &Jet| {
                let b = alpha_b(alpha, &j.p, &j.a);
                if min {
                    b.lambda_min()
                } else {
                    b.lambda_max()
                }
            };
            // the maximal cone {0} × P has empty interior: nothing to claim
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), None);
            let mut s = mk(pair, None, Some(axis_a(n, 1.0)), false, "λ_min / λ_max of B(p, A)");
            s.description = if min { "λ_min(B(p, A))" } else { "λ_max(B(p, A))" }.into();
            s
        }
        "linear" => {
            let jp = match &params.jet {
                Some(j) => j.clone(),
                None => {
                    let mut p = Vector::zeros(n);
                    p[n - 1] = 1.0;
                    Jet::from_parts(-1.0, p, SymMatrix::identity(n))
                }
            };
            if jp.dim() != n {
                return Err(Error::Precondition("coefficient jet dimension differs from n".into()));
            }
            if jp.r > 0.0 || jp.a.lambda_min() < -1e-12 {
                return Err(Error::Precondition("linear operator needs a ≤ 0 and E ⪰ 0 (proper ellipticity)".into()));
            }
            let np = jp.p.norm();
            let d = if np > 0.0 {
                DirectionalCone::HalfSpace { b: jp.p.iter().copied().collect() }
            } else {
                DirectionalCone::Full
            };
            let gamma = if jp.r < 0.0 { Some(0.0) } else { None };
            let cone = MonotonicityCone::fundamental(gamma, d, Some(Radius::Infinite));
            let j0 = cone.interior_axis(n);
            let c = jp.clone();
            let op = move |j: &Jet| c.dot(j);
            let axis = j0.scale(1.0 / jp.dot(&j0));
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(cone.clone()));
            let ok_axis = jp.dot(&j0) > 0.0;
            mk(pair, Some(cone), ok_axis.then_some(axis), jp.p.norm() == 0.0, "⟨J′, J⟩")
        }
        "parabolic_P1" => {
            if n < 2 {
                return Err(Error::Precondition("parabolic operators need n ≥ 2 (space and time)".into()));
            }
            let gamma = params.gamma.unwrap_or(1.0);
            if !(gamma > 0.0) {
                return Err(Error::Precondition("parabolic_P1 needs γ > 0".into()));
            }
            let which = params.g.clone().unwrap_or_else(|| "trace".into());
            let trace = match which.as_str() {
                "trace" => true,
                "lambda_min" => false,
                _ => return Err(Error::UnknownName(format!("unknown spatial operator '{which}' (trace|lambda_min)"))),
            };
            let op = move |j: &Jet| {
                let ap = j.a.leading_block(n - 1);
                let g = if trace { ap.trace() } else { ap.lambda_min() };
                g - gamma * j.p.rows(0, n - 1).norm() - j.p[n - 1]
            };
            let cone = MonotonicityCone::Parabolic { gamma };
            let base = {
                let mut p = Vector::zeros(n);
                p[n - 1] = -1.0;
                let mut lam = vec![1.0; n];
                lam[n - 1] = 0.0;
                Jet::from_parts(-1.0, p, SymMatrix::diag(&lam))
            };
            let inc = op(&base) - op(&Jet::zero(n));
            let pair = CompatiblePair::unconstrained(n, name, op, Interval::real_line(), Some(cone.clone()));
            let mut s = mk(pair, Some(cone), Some(base.scale(1.0 / inc)), false, "G(r, p′, A′) − τ, τ the time derivative");
            s.parabolic = true;
            s
        }
        "parabolic_FP1" => {
            if n < 2 {
                return Err(Error::Precondition("parabolic operators need n ≥ 2 (space and time)".into()));
            }
            // τ·det(A′) on {τ ≥ 0, A′ ≥ 0}
            let mut b = vec![0.0; n];
            b[n - 1] = 1.0;
            let cone = MonotonicityCone::fundamental(Some(0.0), DirectionalCone::HalfSpace { b }, Some(Radius::Infinite));
            let cons = ConstraintSet::new(n, "D x G", move |j: &Jet| j.p[n - 1].min(j.a.leading_block(n - 1).lambda_min()))
                .with_cone(cone.clone())
                .with_tame(true);
            let op = move |j: &Jet| j.p[n - 1] * j.a.leading_block(n - 1).matrix().determinant();
            let pair = CompatiblePair::constrained(name, op, cons, 0.0, Interval::closed_ray(0.0));
            let mut s = mk(pair, Some(cone), None, false, "τ·G(r, A′) with G = det A′ on P′");
            s.parabolic = true;
            s
        }
        _ => return Err(Error::UnknownName(format!("unknown operator '{name}'; known: {}", NAMES.join(", ")))),
    };
    if let Some(c) = &spec.claimed_cone {
        c.validate(n)?;
    }
    Ok(spec)
}

/// Operator value; constrained entries refuse jets outside F.
pub fn eval(spec: &OperatorSpec, j: &Jet) -> Result<f64> {
    if j.dim() != spec.n() {
        return Err(Error::Precondition(format!("jet has dimension {} but {} has {}", j.dim(), spec.name, spec.n())));
    }
    if let Some(c) = &spec.pair.constraint {
        let m = c.margin(j);
        if !(m >= -crate::cones::tol(j)) {
            return Err(Error::ConstraintViolation(format!("jet is outside the constraint of {} (margin {m})", spec.name)));
        }
    }
    let v = spec.pair.operator(j);
    if v.is_nan() {
        return Err(Error::Evaluation(format!("{} evaluated to NaN", spec.name)));
    }
    Ok(v)
}

/// Admissible levels: catalog metadata when known, else a sampled range
/// flagged approximate.
pub fn admissible_levels(spec: &OperatorSpec) -> Interval {
    let lv = spec.pair.levels;
    if lv.lo.is_finite() || lv.hi.is_finite() || spec.pair.constraint.is_none() {
        return lv;
    }
    let mut rng = sample::rng(0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let j = sample::jet(&mut rng, spec.n());
        if let Ok(v) = eval(spec, &j) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Interval { lo, hi, lo_closed: true, hi_closed: true, approximate: true }
}

/// Tests the duality of the F±_{k,R} family against both candidate index
/// formulas and reports which one holds on the samples.
pub fn duality_relation_check(n: usize, k: usize, r: f64, plus: bool, samples: usize, seed: u64) -> Result<VerificationReport> {
    let (this, other) = if plus { ("F_plus_kR", "F_minus_kR") } else { ("F_minus_kR", "F_plus_kR") };
    let spec = catalog(this, &Params::n(n).with_k(k).with_r(r))?;
    let dual = dual_margin(&spec.zero_set()?);
    let reflected = n + 1 - k;
    let printed = n + k - 1;
    let candidate = |idx: usize| -> Result<Option<ConstraintSet>> {
        if idx == 0 || idx > n {
            return Ok(None);
        }
        Ok(Some(catalog(other, &Params::n(n).with_k(idx).with_r(r))?.zero_set()?))
    };
    let c_ref = candidate(reflected)?;
    let c_pr = candidate(printed)?;
    let mut rng = sample::rng(seed);
    let mut report = VerificationReport::new(seed);
    let (mut bad_ref, mut bad_pr) = (0usize, 0usize);
    for _ in 0..samples {
        let j = sample::jet(&mut rng, n);
        let d = dual.margin(&j);
        let t = 1e-9 * (1.0 + j.norm());
        let diff = |c: &Option<ConstraintSet>| c.as_ref().map(|c| (c.margin(&j) - d).abs());
        let dr = diff(&c_ref).unwrap_or(f64::INFINITY);
        report.observe(t - dr, Some(&j), None);
        if dr > t {
            bad_ref += 1;
        }
        if diff(&c_pr).is_none_or(|v| v > t) {
            bad_pr += 1;
        }
    }
    report.detail("mismatches_reflected_index", bad_ref as f64);
    report.detail("mismatches_printed_index", bad_pr as f64);
    report.detail("reflected_index", reflected as f64);
    report.detail("printed_index", printed as f64);
    let verdict = match (bad_ref == 0, bad_pr == 0) {
        (true, true) => "both indices agree",
        (true, false) => "n-k+1 holds; n+k-1 does not",
        (false, true) => "n+k-1 holds; n-k+1 does not",
        (false, false) => "neither index holds",
    };
    report.verdict = Some(verdict.into());
    report.pass = bad_ref == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subeq;

    fn jet(r: f64, p: &[f64], a: SymMatrix) -> Jet {
        Jet::from_slices(r, p, a).unwrap()
    }

    #[test]
    fn examples() {
        let s = catalog("truncated_laplacian", &Params::n(3).with_k(2)).unwrap();
        assert_eq!(eval(&s, &jet(0.0, &[0.0; 3], SymMatrix::diag(&[-3.0, 1.0, 5.0]))).unwrap(), -2.0);
        let s = catalog("special_lagrangian", &Params::n(2)).unwrap();
        let v = eval(&s, &jet(0.0, &[0.0; 2], SymMatrix::identity(2))).unwrap();
        assert!((v - FRAC_PI_2).abs() < 1e-15);
        let s = catalog("det_MA", &Params::n(2)).unwrap();
        assert!((eval(&s, &jet(0.0, &[0.0; 2], SymMatrix::diag(&[2.0, 3.0]))).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(
            eval(&s, &jet(0.0, &[0.0; 2], SymMatrix::diag(&[-2.0, 3.0]))),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn eval_examples() {
        let s = catalog("F_minus_kR", &Params::n(2).with_k(1).with_r(1.0)).unwrap();
        assert!(eval(&s, &jet(0.0, &[1.0, 0.0], SymMatrix::identity(2))).unwrap().abs() < 1e-15);
        let s = catalog("alpha_F", &Params::n(2).with_alpha(2.0)).unwrap();
        let a = SymMatrix::diag(&[-1.0, 4.0]);
        assert_eq!(eval(&s, &jet(0.0, &[0.0, 0.0], a)).unwrap(), -1.0);
        let s = catalog("affine_sphere", &Params::n(2)).unwrap();
        assert!((eval(&s, &jet(-1.0, &[0.0, 0.0], SymMatrix::identity(2))).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_is_rejected() {
        assert!(matches!(catalog("alpha_F", &Params::n(2).with_alpha(1.0)), Err(Error::Precondition(_))));
        assert!(matches!(catalog("nope", &Params::n(2)), Err(Error::UnknownName(_))));
    }

    #[test]
    fn levels() {
        let s = catalog("special_lagrangian", &Params::n(2)).unwrap();
        let l = admissible_levels(&s);
        assert_eq!((l.lo, l.hi), (-std::f64::consts::PI, std::f64::consts::PI));
        assert!(!l.contains(std::f64::consts::PI));
        let s = catalog("det_MA", &Params::n(2)).unwrap();
        assert!(admissible_levels(&s).contains(0.0));
        let s = catalog("lambda_min", &Params::n(2)).unwrap();
        assert!(admissible_levels(&s).contains(-1e300));
    }

    #[test]
    fn special_lagrangian_boundary_level() {
        let s = catalog("special_lagrangian", &Params::n(2)).unwrap();
        let f0 = subeq::level_set(&s.pair, 0.0).unwrap();
        assert_eq!(f0.margin(&Jet::zero(2)), 0.0);
    }

    #[test]
    fn tau_k_matches_derived_det() {
        let n = 3;
        let k = 2;
        let s = catalog("tau_k", &Params::n(n).with_k(k)).unwrap();
        let d = garding::derive(&GardingPolynomial::det(n), garding::Construction::II(k)).unwrap();
        let scale = (k as f64).powi(3); // k^{C(3,2)}
        let mut rng = sample::rng(4);
        for _ in 0..50 {
            let a = sample::psd(&mut rng, n, 2.0);
            let j = Jet::from_parts(0.0, Vector::zeros(n), a.clone());
            let v = eval(&s, &j).unwrap();
            let w = scale * d.eval(&GArg::pure(a)).unwrap();
            assert!((v - w).abs() <= 1e-7 * (1.0 + v.abs()), "{v} vs {w}");
        }
    }

    #[test]
    fn gradient_free_entries_ignore_p() {
        let mut rng = sample::rng(8);
        for name in ["lambda_min", "special_lagrangian", "truncated_laplacian", "gradient_free_garding", "affine_sphere"] {
            let s = catalog(name, &Params::n(2)).unwrap();
            assert!(s.gradient_free);
            for _ in 0..50 {
                let j = s.claimed_cone.as_ref().unwrap().sample_member(&mut rng, 2);
                let q = sample::gaussian_vector(&mut rng, 2);
                let jq = Jet::from_parts(j.r, &j.p + &q, j.a.clone());
                if let (Ok(a), Ok(b)) = (eval(&s, &j), eval(&s, &jq)) {
                    assert_eq!(a, b, "{name}");
                }
            }
        }
    }

    #[test]
    fn parabolic_unit_slope_in_tau() {
        let s = catalog("parabolic_P1", &Params { n: Some(3), ..Default::default() }).unwrap();
        let mut rng = sample::rng(2);
        for _ in 0..50 {
            let j = sample::jet(&mut rng, 3);
            let mut jt = j.clone();
            jt.p[2] += 0.75;
            let (a, b) = (eval(&s, &j).unwrap(), eval(&s, &jt).unwrap());
            // unit slope up to the rounding of one subtraction
            assert!((a - b - 0.75).abs() <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())));
        }
    }

    #[test]
    fn alpha_family_is_linear_along_i() {
        for name in ["alpha_F", "alpha_G"] {
            let s = catalog(name, &Params::n(3).with_alpha(2.5)).unwrap();
            let mut rng = sample::rng(6);
            for _ in 0..50 {
                let j = sample::jet(&mut rng, 3);
                let t = sample::uniform(&mut rng, -5.0, 5.0);
                let d = eval(&s, &j.axpy(t, &axis_a(3, 1.0))).unwrap() - eval(&s, &j).unwrap();
                assert!((d - t).abs() < 1e-12 * (1.0 + j.norm()));
            }
        }
    }

    #[test]
    fn fkr_duality_index() {
        let r = duality_relation_check(2, 1, 1.0, true, 1000, 3).unwrap();
        assert!(r.pass);
        assert_eq!(r.details["mismatches_reflected_index"], 0.0);
        // n = 3, k = 2: reflected index 2, printed index 4 is out of range
        let r = duality_relation_check(3, 2, 0.5, true, 500, 3).unwrap();
        assert!(r.pass);
        assert!(r.details["mismatches_printed_index"] > 0.0);
        // p = 0 reduces to branch duality
        let s = catalog("F_plus_kR", &Params::n(3).with_k(1).with_r(1.0)).unwrap();
        let d = dual_margin(&s.zero_set().unwrap());
        let j = jet(0.0, &[0.0; 3], SymMatrix::diag(&[-1.0, 2.0, 7.0]));
        assert_eq!(d.margin(&j), 7.0);
    }

    #[test]
    fn self_duality_fails_off_the_middle() {
        // k = 1, n = 3: dual of λ₁ + |p|/R is λ₃ − |p|/R, not λ₁ − |p|/R
        let s = catalog("F_plus_kR", &Params::n(3).with_k(1).with_r(1.0)).unwrap();
        let m = catalog("F_minus_kR", &Params::n(3).with_k(1).with_r(1.0)).unwrap();
        let d = dual_margin(&s.zero_set().unwrap());
        let mut rng = sample::rng(1);
        let found = (0..1000).any(|_| {
            let j = sample::jet(&mut rng, 3);
            (d.margin(&j) - m.pair.operator(&j)).abs() > 1e-6
        });
        assert!(found);
    }
}
