//! Desk-scale viscosity checks on grids: coherence of C² data with a
//! subequation, radial reductions, test-jet searches and the worked
//! scenarios (maximum principle and comparison failures, subaffine-plus).

use std::sync::Arc;

use serde::Serialize;

use crate::cones::MonotonicityCone;
use crate::error::{Error, Result};
use crate::jets::{fd_jet, quadratic, radial_jet, Jet, RadialProfile, SymMatrix, Vector};
use crate::operators::{catalog, Params};
use crate::report::{PointRecord, VerificationReport};
use crate::sample;
use crate::subeq::{dual_margin, level_set, ConstraintSet};

/// Lattice points allowed in one grid.
pub const MAX_GRID_POINTS: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// A lattice discretization of a ball or box.
///
/// Interior points keep distance ≥ h from the boundary. Points within the
/// exclusion radius of the center are kept apart in `excluded`: their
/// values are used, their jets are not.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub shape: Shape,
    pub h: f64,
    pub points: Vec<Vector>,
    pub boundary: Vec<Vector>,
    /// Parallel to `boundary`: the point lies on the terminal face t = T.
    pub on_top: Vec<bool>,
    pub excluded: Vec<Vector>,
    /// The last coordinate is time.
    pub parabolic: bool,
}

fn lattice(counts: &[usize], mut f: impl FnMut(&[usize])) {
    let n = counts.len();
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] <= counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn check_size(counts: &[usize]) -> Result<()> {
    let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c + 1));
    match total {
        Some(t) if t <= MAX_GRID_POINTS => Ok(()),
        _ => Err(Error::Resolution(format!("grid would exceed {MAX_GRID_POINTS} lattice points; increase h"))),
    }
}

impl GridDomain {
    /// Lattice of spacing h on the ball, centered on `center`. Boundary points
    /// are shell lattice points projected onto the sphere.
    pub fn ball(center: &[f64], radius: f64, h: f64, exclude_radius: Option<f64>) -> Result<Self> {
        let n = center.len();
        if n == 0 || !(radius > 0.0) || !(h > 0.0) || !radius.is_finite() {
            return Err(Error::Precondition("ball grid needs n ≥ 1, radius > 0 and h > 0".into()));
        }
        if 2.0 * h >= radius {
            return Err(Error::Resolution(format!("h = {h} leaves no interior in a ball of radius {radius}")));
        }
        let c = Vector::from_column_slice(center);
        let m = (radius / h).ceil() as usize + 1;
        let counts = vec![2 * m; n];
        check_size(&counts)?;
        let ex = exclude_radius.unwrap_or(0.0);
        let mut g = GridDomain {
            shape: Shape::Ball { center: center.to_vec(), radius },
            h,
            points: Vec::new(),
            boundary: Vec::new(),
            on_top: Vec::new(),
            excluded: Vec::new(),
            parabolic: false,
        };
        lattice(&counts, |idx| {
            let d = Vector::from_fn(n, |i, _| (idx[i] as f64 - m as f64) * h);
            let t = d.norm();
            if t <= radius - h {
                if t < ex {
                    g.excluded.push(&c + &d);
                } else {
                    g.points.push(&c + &d);
                }
            } else if t < radius + h && t > 0.0 && (n == 1 || t > radius - h) {
                g.boundary.push(&c + &(&d * (radius / t)));
            }
        });
        if n == 1 {
            g.boundary = vec![&c - &Vector::from_element(1, radius), &c + &Vector::from_element(1, radius)];
        }
        g.on_top = vec![false; g.boundary.len()];
        Ok(g)
    }

    /// Lattice on the box [lo, hi]. The spacing is adjusted per axis so the
    /// faces are hit exactly. With `parabolic` the last axis is time and the
    /// face t = hi is flagged as terminal.
    pub fn cube(lo: &[f64], hi: &[f64], h: f64, parabolic: bool) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n || !(h > 0.0) || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(Error::Precondition("box grid needs lo < hi componentwise and h > 0".into()));
        }
        if parabolic && n < 2 {
            return Err(Error::Precondition("a parabolic box needs space and time axes".into()));
        }
        let counts: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / h).round().max(1.0) as usize).collect();
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::Resolution(format!("h = {h} leaves no interior in the box")));
        }
        check_size(&counts)?;
        let steps: Vec<f64> = (0..n).map(|i| (hi[i] - lo[i]) / counts[i] as f64).collect();
        let mut g = GridDomain {
            shape: Shape::Box { lo: lo.to_vec(), hi: hi.to_vec() },
            h: steps.iter().copied().fold(0.0, f64::max),
            points: Vec::new(),
            boundary: Vec::new(),
            on_top: Vec::new(),
            excluded: Vec::new(),
            parabolic,
        };
        lattice(&counts, |idx| {
            let x = Vector::from_fn(n, |i, _| if idx[i] == counts[i] { hi[i] } else { lo[i] + idx[i] as f64 * steps[i] });
            let face = (0..n).any(|i| idx[i] == 0 || idx[i] == counts[i]);
            if face {
                // the terminal face is t = T away from the spatial sides
                let top = parabolic && idx[n - 1] == counts[n - 1] && (0..n - 1).all(|i| idx[i] != 0 && idx[i] != counts[i]);
                g.boundary.push(x);
                g.on_top.push(top);
            } else {
                g.points.push(x);
            }
        });
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.len(),
            Shape::Box { lo, .. } => lo.len(),
        }
    }

    /// Interior and boundary points, excluded ones left out.
    pub fn all_points(&self) -> impl Iterator<Item = &Vector> {
        self.points.iter().chain(self.boundary.iter())
    }

    /// Boundary points on which data is prescribed: all of ∂Ω, or only
    /// {t < T} for parabolic grids.
    pub fn data_boundary(&self) -> impl Iterator<Item = &Vector> {
        let parabolic = self.parabolic;
        self.boundary.iter().zip(&self.on_top).filter(move |(_, top)| !(parabolic && **top)).map(|(x, _)| x)
    }
}

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type JetFn = Arc<dyn Fn(&Vector) -> Result<Jet> + Send + Sync>;

/// A function on the grid with a jet oracle.
#[derive(Clone)]
pub struct TestFunction {
    value: ValueFn,
    jet: JetFn,
    /// Default grid tolerance for checks on this function.
    pub tol: f64,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction {{ tol: {} }}", self.tol)
    }
}

impl TestFunction {
    /// Closed-form value and jet.
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        jet: impl Fn(&Vector) -> Result<Jet> + Send + Sync + 'static,
    ) -> Self {
        TestFunction { value: Arc::new(value), jet: Arc::new(jet), tol: 1e-9 }
    }

    /// x ↦ ψ(|x − center|) with its analytic jet.
    pub fn from_radial(profile: RadialProfile, center: Vector) -> Self {
        let p = Arc::new(profile);
        let q = p.clone();
        let c = center.clone();
        TestFunction::new(move |x| p.eval((x - &center).norm()).0, move |x| radial_jet(&q, &(x - &c)))
    }

    /// Jets by central differences. The tolerance covers truncation and
    /// cancellation error of the default step.
    pub fn fd(value: impl Fn(&Vector) -> f64 + Send + Sync + 'static, scale: f64) -> Self {
        let v: ValueFn = Arc::new(value);
        let w = v.clone();
        TestFunction { value: v, jet: Arc::new(move |x| fd_jet(|y| w(y), x, None)), tol: 1e-5 * (1.0 + scale.abs()) }
    }

    pub fn constant(c: f64, n: usize) -> Self {
        TestFunction::new(move |_| c, move |_| Ok(Jet::from_parts(c, Vector::zeros(n), SymMatrix::zeros(n))))
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn jet(&self, x: &Vector) -> Result<Jet> {
        (self.jet)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    Sub,
    Harmonic,
    Super,
}

impl std::str::FromStr for CheckMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub" => Ok(CheckMode::Sub),
            "harmonic" => Ok(CheckMode::Harmonic),
            "super" => Ok(CheckMode::Super),
            _ => Err(Error::UnknownName(format!("mode '{s}' (sub|harmonic|super)"))),
        }
    }
}

/// Checks J²u(x) against S at every interior grid point.
///
/// Sub: margin ≥ −tol. Harmonic: |margin| ≤ tol. Super: the dual margin at
/// −J²u is ≥ −tol. The observed quantity is the margin, −|margin| or the
/// dual margin respectively, so `worst_margin ≥ −tol` iff the check passes.
pub fn jet_inclusion_check(
    s: &ConstraintSet,
    u: &TestFunction,
    grid: &GridDomain,
    mode: CheckMode,
    gridtol: Option<f64>,
) -> Result<VerificationReport> {
    if s.n != grid.dim() {
        return Err(Error::Precondition(format!("set lives in dimension {} but the grid in {}", s.n, grid.dim())));
    }
    let tol = gridtol.unwrap_or(u.tol).max(1e-9);
    let dual = (mode == CheckMode::Super).then(|| dual_margin(s));
    let mut report = VerificationReport::new(0);
    let mut max_residual: f64 = 0.0;
    for x in &grid.points {
        let j = u.jet(x).map_err(|e| Error::Evaluation(format!("jet at {:?}: {e}", x.as_slice())))?;
        let m = s.margin(&j);
        let q = match mode {
            CheckMode::Sub => m,
            CheckMode::Harmonic => {
                max_residual = max_residual.max(m.abs());
                -m.abs()
            }
            CheckMode::Super => dual.as_ref().expect("dual set").margin(&-&j),
        };
        let ok = q >= -tol;
        report.observe(q, Some(&j), Some(x.as_slice()));
        report.points.push(PointRecord { x: x.iter().copied().collect(), margin: q, ok });
        if !ok {
            report.fail();
        }
    }
    if report.n_samples == 0 {
        return Err(Error::Resolution("grid has no interior points".into()));
    }
    report.detail("gridtol", tol);
    report.detail("excluded_points", grid.excluded.len() as f64);
    if mode == CheckMode::Harmonic {
        report.detail("max_residual", max_residual);
    }
    Ok(report)
}

/// Radial descriptors: inequalities in ψ′, ψ″ and t equivalent to the
/// subequation for x ↦ ψ(|x|) in dimension n ≥ 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RadialConditions {
    /// λ_min(B) ≥ 0: both of ψ′/t + |ψ′|^β, ψ″ + α|ψ′|^β.
    AlphaF { alpha: f64 },
    /// dual of AlphaF: one of ψ′/t − |ψ′|^β, ψ″ − α|ψ′|^β.
    AlphaFDual { alpha: f64 },
    /// λ_max(B) ≥ 0: one of the AlphaF expressions.
    AlphaG { alpha: f64 },
    /// dual of AlphaG: both of the AlphaFDual expressions.
    AlphaGDual { alpha: f64 },
    /// dual of M(R): max(ψ′/t, ψ″) + |ψ′|/R ≥ 0.
    DualMR { r: f64 },
}

impl RadialConditions {
    /// (expressions, conjunction?) at t.
    pub fn expressions(&self, d1: f64, d2: f64, t: f64) -> (Vec<f64>, bool) {
        let pw = |alpha: f64| d1.abs().powf((alpha - 1.0) / alpha);
        match *self {
            RadialConditions::AlphaF { alpha } => (vec![d1 / t + pw(alpha), d2 + alpha * pw(alpha)], true),
            RadialConditions::AlphaG { alpha } => (vec![d1 / t + pw(alpha), d2 + alpha * pw(alpha)], false),
            RadialConditions::AlphaFDual { alpha } => (vec![d1 / t - pw(alpha), d2 - alpha * pw(alpha)], false),
            RadialConditions::AlphaGDual { alpha } => (vec![d1 / t - pw(alpha), d2 - alpha * pw(alpha)], true),
            RadialConditions::DualMR { r } => (vec![(d1 / t).max(d2) + d1.abs() / r], true),
        }
    }

    pub fn margin(&self, d1: f64, d2: f64, t: f64) -> f64 {
        let (e, all) = self.expressions(d1, d2, t);
        if all {
            e.into_iter().fold(f64::INFINITY, f64::min)
        } else {
            e.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Evaluates a radial descriptor on t_grid ⊂ (0, ∞). Harmonic mode demands
/// every expression vanish for conjunctions, and the combined margin vanish
/// otherwise.
pub fn radial_check(cond: RadialConditions, profile: &RadialProfile, t_grid: &[f64], mode: CheckMode, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::new(0);
    let mut max_residual: f64 = 0.0;
    for &t in t_grid {
        let (_, d1, d2) = profile.eval(t);
        let (e, all) = cond.expressions(d1, d2, t);
        let m = cond.margin(d1, d2, t);
        let q = match mode {
            CheckMode::Sub => m,
            CheckMode::Harmonic => {
                let r = if all { e.iter().fold(0.0f64, |a, v| a.max(v.abs())) } else { m.abs() };
                max_residual = max_residual.max(r);
                -r
            }
            CheckMode::Super => -m,
        };
        let ok = t > 0.0 && q >= -tol;
        report.observe(q, None, Some(&[t]));
        report.points.push(PointRecord { x: vec![t], margin: q, ok });
        if !ok {
            report.fail();
        }
    }
    if mode == CheckMode::Harmonic {
        report.detail("max_residual", max_residual);
    }
    report
}

/// Empirical search for strict upper test jets at x0: J with r = u(x0) and
/// u(y) − Q_J(y) ≤ −ε|y − x0|² at every sample y ∈ B_radius(x0).
///
/// Absence of results is evidence, not proof.
pub fn bad_test_jet_search(
    u: &dyn Fn(&Vector) -> f64,
    x0: &Vector,
    radius: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<Jet>> {
    let n = x0.len();
    if !(radius > 0.0) {
        return Err(Error::Precondition("search radius must be positive".into()));
    }
    let eps = 1e-3 / radius.max(1.0);
    let u0 = u(x0);
    if !u0.is_finite() {
        return Err(Error::Evaluation("u(x0) is not finite".into()));
    }
    let mut rng = sample::rng(seed);
    let mut dirs: Vec<Vector> = Vec::new();
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let mut e = Vector::zeros(n);
            e[i] = s;
            dirs.push(e);
        }
    }
    for _ in 0..64 {
        dirs.push(sample::unit_vector(&mut rng, n));
    }
    let mut ys = Vec::new();
    for k in 0..12 {
        let rho = radius * 10f64.powf(-3.0 * k as f64 / 11.0);
        for d in &dirs {
            let y = x0 + d * rho;
            ys.push((u(&y), y));
        }
    }
    let ok_at = |j: &Jet, uy: f64, y: &Vector| {
        let q = quadratic(j, x0, y);
        let slack = 8.0 * f64::EPSILON * (1.0 + uy.abs() + q.abs());
        uy - q <= -eps * (y - x0).norm_squared() + slack
    };
    // a fixed sample set lets a large A hide a first order defect, so each
    // candidate is also probed where its quadratic term is negligible
    let passes = |j: &Jet| {
        if !ys.iter().all(|(uy, y)| ok_at(j, *uy, y)) {
            return false;
        }
        let rho = 1e-2 * radius.min(1.0 / (1.0 + j.a.norm() + j.p.norm()));
        [rho, 1e-2 * rho].iter().all(|&t| {
            dirs.iter().all(|d| {
                let y = x0 + d * t;
                ok_at(j, u(&y), &y)
            })
        })
    };
    let mut seeds = vec![Jet::from_parts(u0, Vector::zeros(n), SymMatrix::zeros(n))];
    let fd = fd_jet(u, x0, Some(1e-4 * radius)).ok().filter(|j| j.is_finite());
    if let Some(j) = &fd {
        seeds.push(Jet::from_parts(u0, j.p.clone(), &j.a + &SymMatrix::scalar(n, 4.0 * eps)));
    }
    let mut found = Vec::new();
    for i in 0..budget {
        let cand = if i < seeds.len() {
            seeds[i].clone()
        } else {
            match (&fd, i % 2) {
                (Some(j), 0) => {
                    let bump = { let s = sample::magnitude(&mut rng); sample::psd(&mut rng, n, s) };
                    Jet::from_parts(u0, j.p.clone(), &(&j.a + &bump) + &SymMatrix::scalar(n, 4.0 * eps))
                }
                _ => {
                    let r = sample::jet(&mut rng, n);
                    Jet::from_parts(u0, r.p, r.a)
                }
            }
        };
        if passes(&cand) {
            found.push(cand);
        }
    }
    Ok(found)
}

/// Registry entry for a worked scenario.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub anchor: &'static str,
    pub params: &'static [&'static str],
    pub expected_verdict: &'static str,
}

pub const ZMP_ANCHOR: &str =
    "maximum principle failure for the dual of M(R): u = |x| - |x|^2/(2R) is subharmonic with interior maximum R/2 at |x| = R";
pub const SMALL_BALL_ANCHOR: &str =
    "comparison failure for the alpha-family on small balls: z = 0 and h = (R^(1+a) - |x|^(1+a))/(1+a) are both harmonic with zero boundary data";
pub const SUBAFFINE_ANCHOR: &str =
    "subaffine-plus: u is Q~-subharmonic iff u+ is subaffine; u(x) = x, a(x) = 2(x-1) on (0,2) gives u(1) = 1 > a+(1) = 0";

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo { name: "zmp-failure", anchor: ZMP_ANCHOR, params: &["R", "Rprime", "n", "h"], expected_verdict: "zmp_failure_exhibited" },
    ScenarioInfo { name: "small-ball-failure", anchor: SMALL_BALL_ANCHOR, params: &["alpha", "R", "n", "h"], expected_verdict: "comparison_fails" },
    ScenarioInfo { name: "subaffine-plus", anchor: SUBAFFINE_ANCHOR, params: &["samples"], expected_verdict: "counterexample_reproduced" },
];

/// u = |x| − |x|²/(2R) against the dual of M(R) on B_{R′}.
pub fn zmp_profile(r: f64) -> RadialProfile {
    RadialProfile::new(move |t| t - t * t / (2.0 * r), move |t| 1.0 - t / r, move |_| -1.0 / r)
}

/// The maximum principle fails for M̃(R) on balls larger than B_R: u is
/// subharmonic but peaks at |x| = R with value R/2.
pub fn scenario_zmp_failure(r: f64, r_prime: f64, n: usize, h: f64) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::Precondition("the scenario needs n ≥ 2".into()));
    }
    if !(r > 0.0 && r_prime > 0.0) {
        return Err(Error::Precondition("R and R′ must be positive".into()));
    }
    if r_prime > r && 4.0 * h > (r_prime - r).min(r) {
        return Err(Error::Resolution(format!("h = {h} cannot localize a maximum at |x| = {r} within 2h inside B_{r_prime}")));
    }
    let grid = GridDomain::ball(&vec![0.0; n], r_prime, h, Some(2.0 * h))?;
    let s = dual_margin(&ConstraintSet::from_cone(MonotonicityCone::m_r(r), n)?);
    let u = TestFunction::from_radial(zmp_profile(r), Vector::zeros(n));
    let mut report = jet_inclusion_check(&s, &u, &grid, CheckMode::Sub, None)?;
    let sub_ok = report.pass;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for x in grid.points.iter().chain(&grid.excluded) {
        let v = u.value(x);
        if v > best {
            best = v;
            arg = x.norm();
        }
    }
    let bmax = grid.boundary.iter().map(|x| u.value(x)).fold(f64::NEG_INFINITY, f64::max);
    let tol = report.details["gridtol"];
    let exhibited = best > bmax + 10.0 * tol;
    report.anchor = Some(ZMP_ANCHOR.into());
    report.detail("max_value", best);
    report.detail("argmax_radius", arg);
    report.detail("boundary_max", bmax);
    report.detail("expected_max", if r_prime > r { r / 2.0 } else { r_prime - r_prime * r_prime / (2.0 * r) });
    report.detail("R", r).detail("Rprime", r_prime).detail("h", h);
    report.verdict = Some(if exhibited { "zmp_failure_exhibited" } else { "no_violation" }.into());
    report.pass = sub_ok && (exhibited == (r_prime > r));
    if !sub_ok {
        report.note("u failed the subharmonic check");
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    Full,
    Parabolic,
}

/// Compares u ≤ w on the data boundary with u ≤ w inside.
///
/// u must pass the sub check and w the super check first; otherwise the
/// report carries verdict "precondition_failed". A comparison failure needs
/// a gap above 10 × gridtol.
pub fn comparison_check(
    s: &ConstraintSet,
    u: &TestFunction,
    w: &TestFunction,
    grid: &GridDomain,
    boundary: BoundaryKind,
    gridtol: Option<f64>,
) -> Result<VerificationReport> {
    let tol = gridtol.unwrap_or(u.tol.max(w.tol)).max(1e-9);
    let sub = jet_inclusion_check(s, u, grid, CheckMode::Sub, Some(tol))?;
    let sup = jet_inclusion_check(s, w, grid, CheckMode::Super, Some(tol))?;
    let mut report = VerificationReport::new(0);
    report.detail("gridtol", tol);
    report.detail("sub_worst_margin", sub.worst_margin);
    report.detail("super_worst_margin", sup.worst_margin);
    let bpts: Vec<&Vector> = match boundary {
        BoundaryKind::Full => grid.boundary.iter().collect(),
        BoundaryKind::Parabolic => grid.data_boundary().collect(),
    };
    report.detail("boundary_points_checked", bpts.len() as f64);
    let bgap = bpts.iter().map(|x| u.value(x) - w.value(x)).fold(f64::NEG_INFINITY, f64::max);
    report.detail("boundary_max_gap", bgap);
    if !sub.pass || !sup.pass || bgap > tol {
        report.pass = false;
        report.verdict = Some("precondition_failed".into());
        if !sub.pass {
            report.note("u is not subharmonic on the grid");
        }
        if !sup.pass {
            report.note("w is not superharmonic on the grid");
        }
        if bgap > tol {
            report.note("u > w somewhere on the boundary");
        }
        return Ok(report);
    }
    for x in grid.points.iter().chain(&grid.excluded) {
        let gap = u.value(x) - w.value(x);
        // observe −gap so the witness is the largest excess of u over w
        report.observe(-gap, None, Some(x.as_slice()));
        report.points.push(PointRecord { x: x.iter().copied().collect(), margin: -gap, ok: gap <= 10.0 * tol });
    }
    let max_gap = -report.worst_margin;
    report.detail("max_interior_gap", max_gap);
    let fails = max_gap > 10.0 * tol;
    report.verdict = Some(if fails { "comparison_fails" } else { "comparison_holds" }.into());
    report.pass = !fails;
    Ok(report)
}

/// h(x) = (R^{1+α} − |x|^{1+α})/(1+α).
pub fn small_ball_profile(alpha: f64, r: f64) -> RadialProfile {
    let a1 = 1.0 + alpha;
    RadialProfile::new(move |t| (r.powf(a1) - t.powf(a1)) / a1, move |t| -t.powf(alpha), move |t| -alpha * t.powf(alpha - 1.0))
}

/// Two distinct solutions with identical boundary data on B_R, for both
/// α-family operators F = λ_min(B) and G = λ_max(B).
pub fn scenario_small_ball_failure(alpha: f64, r: f64, n: usize, h: f64) -> Result<VerificationReport> {
    let f = catalog("alpha_F", &Params::n(n).with_alpha(alpha))?;
    let g = catalog("alpha_G", &Params::n(n).with_alpha(alpha))?;
    if n < 2 {
        return Err(Error::Precondition("the scenario needs n ≥ 2".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition("R must be positive".into()));
    }
    let grid = GridDomain::ball(&vec![0.0; n], r, h, Some(2.0 * h))?;
    let z = TestFunction::constant(0.0, n);
    let hf = TestFunction::from_radial(small_ball_profile(alpha, r), Vector::zeros(n));
    let mut report = VerificationReport::new(0);
    report.anchor = Some(SMALL_BALL_ANCHOR.into());
    let sf = level_set(&f.pair, 0.0)?;
    let sg = level_set(&g.pair, 0.0)?;
    let mut all_harmonic = true;
    for (sname, s) in [("F", &sf), ("G", &sg)] {
        for (uname, u) in [("z", &z), ("h", &hf)] {
            let c = jet_inclusion_check(s, u, &grid, CheckMode::Harmonic, Some(1e-8))?;
            report.detail(&format!("residual_{uname}_{sname}"), c.details["max_residual"]);
            all_harmonic &= c.pass;
        }
    }
    let bmax = grid.boundary.iter().map(|x| hf.value(x).abs()).fold(0.0, f64::max);
    report.detail("boundary_max_abs_h", bmax);
    let cmp = comparison_check(&sf, &hf, &z, &grid, BoundaryKind::Full, Some(1e-8))?;
    report.detail("max_interior_gap", cmp.details.get("max_interior_gap").copied().unwrap_or(f64::NAN));
    report.detail("expected_center_gap", r.powf(1.0 + alpha) / (1.0 + alpha));
    report.detail("alpha", alpha).detail("R", r).detail("h", h);
    report.witness_point = cmp.witness_point.clone();
    report.worst_margin = cmp.worst_margin;
    report.n_samples = cmp.n_samples;
    report.points = cmp.points;
    let verdict = cmp.verdict.unwrap_or_default();
    report.pass = all_harmonic && bmax <= 1e-3 && verdict == "comparison_fails";
    report.verdict = Some(verdict);
    Ok(report)
}

/// u = x, a = 2(x − 1) on (0, 2), and the sampled equivalence between the
/// Q̃ jet condition and subaffinity of u⁺ at contact points.
pub fn scenario_subaffine_plus(samples: usize, seed: u64) -> VerificationReport {
    let mut report = VerificationReport::new(seed);
    report.anchor = Some(SUBAFFINE_ANCHOR.into());
    let u = |x: f64| x;
    let a_plus = |x: f64| (2.0 * (x - 1.0)).max(0.0);
    let boundary_ok = u(0.0) == a_plus(0.0) && u(2.0) == a_plus(2.0);
    report.detail("u_at_1", u(1.0));
    report.detail("a_plus_at_1", a_plus(1.0));
    let reproduced = boundary_ok && u(1.0) > a_plus(1.0);

    let mut rng = sample::rng(seed);
    let mut disagreements = 0usize;
    let mut tested = 0usize;
    while tested < samples {
        let n = 1 + (tested % 3);
        let j = sample::jet(&mut rng, n);
        if j.r.abs() < 1e-9 {
            continue;
        }
        tested += 1;
        let q_tilde = j.r <= 0.0 || j.a.lambda_max() >= 0.0;
        let subaffine = positive_part_subaffine(&j);
        let agree = q_tilde == subaffine;
        report.observe(if agree { 0.0 } else { -1.0 }, Some(&j), None);
        if !agree {
            disagreements += 1;
        }
    }
    report.detail("contact_points_tested", tested as f64);
    report.detail("disagreements", disagreements as f64);
    report.pass = reproduced && disagreements == 0;
    report.verdict = Some(if reproduced { "counterexample_reproduced" } else { "not_reproduced" }.into());
    report
}

/// Local subaffinity of (Q_J)⁺ at the center, tested with the tightest
/// affine majorant over a small sphere where Q_J keeps its sign.
fn positive_part_subaffine(j: &Jet) -> bool {
    let n = j.dim();
    let x0 = Vector::zeros(n);
    let rho = (j.r.abs() / (2.0 * (j.p.norm() + j.a.norm() + 1.0))).min(0.1);
    let (lam, vecs) = j.a.eigen();
    let mut dirs = Vec::new();
    for k in 0..n {
        let v: Vector = vecs.column(k).into_owned();
        dirs.push(v.clone());
        dirs.push(-v);
    }
    let _ = lam;
    let up = |y: &Vector| quadratic(j, &x0, y).max(0.0);
    let slope = if j.r > 0.0 { j.p.clone() } else { Vector::zeros(n) };
    // the affine a(y) = c + ⟨slope, y⟩ is ≥ u⁺ on the sphere iff c ≥ max
    let c = dirs
        .iter()
        .map(|d| {
            let y = d * rho;
            up(&y) - slope.dot(&y)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    c >= up(&x0) - 1e-14 * (1.0 + j.r.abs())
}

/// An ε-indexed closed-form family converging to a limit as ε → 0.
pub struct StrictFamily {
    pub name: String,
    pub member: Box<dyn Fn(f64) -> TestFunction + Send + Sync>,
    pub limit: Box<dyn Fn(&Vector) -> f64 + Send + Sync>,
}

/// z_ε = ε|x|²/2 → 0, strictly subharmonic for the α-family F.
pub fn alpha_z_family(n: usize) -> StrictFamily {
    StrictFamily {
        name: "z_eps = eps|x|^2/2".into(),
        member: Box::new(move |e| {
            TestFunction::new(move |x| e * x.norm_squared() / 2.0, move |x| Ok(Jet::from_parts(e * x.norm_squared() / 2.0, x * e, SymMatrix::scalar(n, e))))
        }),
        limit: Box::new(|_| 0.0),
    }
}

/// ψ_ε(|x|) with ψ_ε(t) = (1+ε)(t+ε)^{1+α}/(1+α) → t^{1+α}/(1+α), strictly
/// subharmonic for the dual of G.
pub fn alpha_psi_family(alpha: f64, n: usize) -> StrictFamily {
    let a1 = 1.0 + alpha;
    StrictFamily {
        name: "psi_eps = (1+eps)(t+eps)^(1+a)/(1+a)".into(),
        member: Box::new(move |e| {
            let prof = RadialProfile::new(
                move |t| (1.0 + e) * (t + e).powf(a1) / a1,
                move |t| (1.0 + e) * (t + e).powf(alpha),
                move |t| alpha * (1.0 + e) * (t + e).powf(alpha - 1.0),
            );
            TestFunction::from_radial(prof, Vector::zeros(n))
        }),
        limit: Box::new(move |x| x.norm().powf(a1) / a1),
    }
}

/// Each member must be strictly subharmonic (min margin > 0) and the sup
/// gap to the limit must shrink like O(ε).
pub fn strict_sequence_check(s: &ConstraintSet, family: &StrictFamily, eps: &[f64], grid: &GridDomain) -> Result<VerificationReport> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("ε values must be positive".into()));
    }
    let mut report = VerificationReport::new(0);
    report.note(format!("family: {}", family.name));
    let mut ratios = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let u = (family.member)(e);
        let c = jet_inclusion_check(s, &u, grid, CheckMode::Sub, None)?;
        let delta = c.worst_margin;
        report.observe(delta, c.witness.as_ref(), c.witness_point.as_deref());
        if !(delta > 0.0) {
            report.fail();
            report.note(format!("member ε = {e} is not strict: margin {delta}"));
        }
        let gap = grid.points.iter().chain(&grid.excluded).map(|x| (u.value(x) - (family.limit)(x)).abs()).fold(0.0, f64::max);
        report.detail(&format!("delta_{i}"), delta);
        report.detail(&format!("gap_{i}"), gap);
        ratios.push(gap / e);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    report.detail("gap_over_eps_min", lo);
    report.detail("gap_over_eps_max", hi);
    if !(hi <= 10.0 * lo.max(1e-300)) {
        report.fail();
        report.note("gap/ε is not bounded across the family");
    }
    report.verdict = Some(if report.pass { "strict_sequence" } else { "not_strict" }.into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(r: f64, h: f64) -> GridDomain {
        GridDomain::ball(&[0.0, 0.0], r, h, Some(2.0 * h)).unwrap()
    }

    #[test]
    fn ball_grid_layout() {
        let g = GridDomain::ball(&[0.0, 0.0], 1.0, 0.1, Some(0.2)).unwrap();
        assert!(g.points.iter().all(|x| x.norm() <= 0.9 + 1e-12 && x.norm() >= 0.2));
        assert!(g.excluded.iter().all(|x| x.norm() < 0.2));
        assert!(g.boundary.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
        assert!(g.excluded.iter().any(|x| x.norm() == 0.0));
        assert!(GridDomain::ball(&[0.0], 1.0, 0.6, None).is_err());
    }

    #[test]
    fn box_grid_parabolic_top() {
        let g = GridDomain::cube(&[0.0, 0.0], &[1.0, 1.0], 0.25, true).unwrap();
        assert_eq!(g.points.len(), 9);
        assert_eq!(g.boundary.len(), 16);
        assert_eq!(g.on_top.iter().filter(|t| **t).count(), 3);
        assert_eq!(g.data_boundary().count(), 13);
        assert!(g.data_boundary().all(|x| x[1] < 1.0 || x[0] == 0.0 || x[0] == 1.0));
    }

    #[test]
    fn paraboloid_is_convex() {
        let g = grid2(1.0, 0.05);
        let u = TestFunction::new(|x| x.norm_squared() / 2.0, |x| Ok(Jet::from_parts(x.norm_squared() / 2.0, x.clone(), SymMatrix::identity(2))));
        let r = jet_inclusion_check(&ConstraintSet::psd(2), &u, &g, CheckMode::Sub, None).unwrap();
        assert!(r.pass);
        assert!((r.worst_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_is_subaffine_harmonic() {
        let g = grid2(1.0, 0.05);
        let p_tilde = dual_margin(&ConstraintSet::psd(2));
        let u = TestFunction::new(|x| 1.0 + 2.0 * x[0] - x[1], |_| Ok(Jet::from_slices(0.0, &[2.0, -1.0], SymMatrix::zeros(2)).unwrap()));
        let r = jet_inclusion_check(&p_tilde, &u, &g, CheckMode::Harmonic, None).unwrap();
        assert!(r.pass);
        assert_eq!(r.details["max_residual"], 0.0);
    }

    #[test]
    fn fd_and_analytic_agree() {
        let g = grid2(1.0, 0.1);
        let an = TestFunction::from_radial(zmp_profile(1.0), Vector::zeros(2));
        let fd = TestFunction::fd(|x| x.norm() - x.norm_squared() / 2.0, 1.0);
        let s = dual_margin(&ConstraintSet::from_cone(MonotonicityCone::m_r(1.0), 2).unwrap());
        let a = jet_inclusion_check(&s, &an, &g, CheckMode::Sub, None).unwrap();
        let b = jet_inclusion_check(&s, &fd, &g, CheckMode::Sub, None).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            if pa.margin.abs() > 10.0 * fd.tol {
                assert_eq!(pa.ok, pb.ok);
            }
            assert!((pa.margin - pb.margin).abs() < 1e-4 * (1.0 + pa.margin.abs()));
        }
    }

    #[test]
    fn harmonic_iff_sub_and_dual_sub() {
        let g = grid2(0.1, 0.002);
        let f = catalog("alpha_F", &Params::n(2).with_alpha(2.0)).unwrap();
        let s = level_set(&f.pair, 0.0).unwrap();
        let h = TestFunction::from_radial(small_ball_profile(2.0, 0.1), Vector::zeros(2));
        let harm = jet_inclusion_check(&s, &h, &g, CheckMode::Harmonic, Some(1e-8)).unwrap();
        let sub = jet_inclusion_check(&s, &h, &g, CheckMode::Sub, Some(1e-8)).unwrap();
        let sup = jet_inclusion_check(&s, &h, &g, CheckMode::Super, Some(1e-8)).unwrap();
        assert!(harm.pass && sub.pass && sup.pass);
        let z = TestFunction::new(|x| x.norm_squared(), |x| Ok(Jet::from_parts(x.norm_squared(), x * 2.0, SymMatrix::scalar(2, 2.0))));
        let harm = jet_inclusion_check(&s, &z, &g, CheckMode::Harmonic, None).unwrap();
        let sup = jet_inclusion_check(&s, &z, &g, CheckMode::Super, None).unwrap();
        assert!(!harm.pass && !sup.pass);
    }

    #[test]
    fn radial_harmonicity_identities() {
        let ts: Vec<f64> = (1..200).map(|i| i as f64 * 0.01).collect();
        for alpha in [1.5, 2.0, 3.0] {
            let p = small_ball_profile(alpha, 1.0);
            for c in [RadialConditions::AlphaF { alpha }, RadialConditions::AlphaG { alpha }] {
                let r = radial_check(c, &p, &ts, CheckMode::Harmonic, 1e-9);
                assert!(r.pass, "{alpha} {c:?} {}", r.details["max_residual"]);
            }
        }
    }

    #[test]
    fn radial_strict_z() {
        let ts: Vec<f64> = (1..100).map(|i| i as f64 * 0.05).collect();
        let alpha = 2.0;
        let e = 0.01;
        let p = RadialProfile::new(move |t| e * t * t / 2.0, move |t| e * t, move |_| e);
        let r = radial_check(RadialConditions::AlphaF { alpha }, &p, &ts, CheckMode::Sub, 0.0);
        assert!(r.pass && r.worst_margin > 0.0);
        for &t in &ts {
            let m = RadialConditions::AlphaF { alpha }.margin(e * t, e, t);
            assert!((m - (e + (e * t).powf(0.5))).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_matches_full_dimension() {
        let alpha = 2.5;
        let prof = small_ball_profile(alpha, 1.0);
        let f = catalog("alpha_G", &Params::n(3).with_alpha(alpha)).unwrap();
        let zmp = zmp_profile(0.7);
        let dmr = dual_margin(&ConstraintSet::from_cone(MonotonicityCone::m_r(0.7), 3).unwrap());
        let bump = RadialProfile::new(|t| t.powi(3), |t| 3.0 * t * t, |t| 6.0 * t);
        for t in [0.1, 0.3, 0.55, 0.9] {
            let x = Vector::from_column_slice(&[t * 0.6, -t * 0.8, 0.0]);
            for (p, c) in [(&prof, RadialConditions::AlphaG { alpha }), (&bump, RadialConditions::AlphaG { alpha })] {
                let (_, d1, d2) = p.eval(t);
                let j = radial_jet(p, &x).unwrap();
                assert!((c.margin(d1, d2, t) - f.pair.operator(&j)).abs() < 1e-8);
            }
            let (_, d1, d2) = zmp.eval(t);
            let j = radial_jet(&zmp, &x).unwrap();
            assert!((RadialConditions::DualMR { r: 0.7 }.margin(d1, d2, t) - dmr.margin(&j)).abs() < 1e-8);
        }
    }

    #[test]
    fn zmp_radial_margin_nonnegative() {
        let ts: Vec<f64> = (1..300).map(|i| i as f64 * 0.01).collect();
        let r = radial_check(RadialConditions::DualMR { r: 1.0 }, &zmp_profile(1.0), &ts, CheckMode::Sub, 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn no_upper_test_jets_for_cone() {
        let found = bad_test_jet_search(&|x: &Vector| x.norm(), &Vector::zeros(2), 0.5, 400, 1).unwrap();
        assert!(found.is_empty());
        let found = bad_test_jet_search(&|x: &Vector| -x.norm(), &Vector::zeros(2), 0.5, 50, 1).unwrap();
        assert!(found.iter().any(|j| j.norm() == 0.0));
    }

    #[test]
    fn quadratic_test_jets_cluster() {
        let x0 = Vector::from_column_slice(&[0.3, -0.2]);
        let found = bad_test_jet_search(&|x: &Vector| x.norm_squared() / 2.0, &x0, 0.5, 200, 3).unwrap();
        assert!(!found.is_empty());
        for j in &found {
            assert!((&j.p - &x0).norm() < 1e-6);
            assert!((&j.a - &SymMatrix::identity(2)).lambda_min() > 0.0);
        }
    }

    #[test]
    fn zmp_scenario_small() {
        let r = scenario_zmp_failure(1.0, 1.5, 2, 0.02).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        assert_eq!(r.verdict.as_deref(), Some("zmp_failure_exhibited"));
        let r = scenario_zmp_failure(1.0, 0.8, 2, 0.02).unwrap();
        assert!(r.pass);
        assert_eq!(r.verdict.as_deref(), Some("no_violation"));
        assert!(matches!(scenario_zmp_failure(1.0, 1.5, 1, 0.02), Err(Error::Precondition(_))));
        assert!(matches!(scenario_zmp_failure(1.0, 1.5, 2, 0.3), Err(Error::Resolution(_))));
    }

    #[test]
    fn comparison_for_paraboloid() {
        let g = grid2(1.0, 0.05);
        let u = TestFunction::new(
            |x| (x.norm_squared() - 1.0) / 2.0,
            |x| Ok(Jet::from_parts((x.norm_squared() - 1.0) / 2.0, x.clone(), SymMatrix::identity(2))),
        );
        let w = TestFunction::constant(0.0, 2);
        let r = comparison_check(&ConstraintSet::psd(2), &u, &w, &g, BoundaryKind::Full, None).unwrap();
        assert_eq!(r.verdict.as_deref(), Some("comparison_holds"));
        // swapped roles: 0 is not below the paraboloid on the boundary... it is
        // equal, but the paraboloid is not superharmonic
        let r = comparison_check(&ConstraintSet::psd(2), &w, &u, &g, BoundaryKind::Full, None).unwrap();
        assert_eq!(r.verdict.as_deref(), Some("precondition_failed"));
    }

    #[test]
    fn comparison_fails_for_fkr() {
        // the sup of u is a constant superharmonic for F⁺_{k,R}, k = n
        let (r, rp) = (1.0, 1.5);
        let f = catalog("F_plus_kR", &Params::n(2).with_k(2).with_r(r)).unwrap();
        let s = level_set(&f.pair, 0.0).unwrap();
        let g = grid2(rp, 0.02);
        let u = TestFunction::from_radial(zmp_profile(r), Vector::zeros(2));
        let bmax = g.boundary.iter().map(|x| u.value(x)).fold(f64::NEG_INFINITY, f64::max);
        let w = TestFunction::constant(bmax, 2);
        let c = comparison_check(&s, &u, &w, &g, BoundaryKind::Full, None).unwrap();
        assert_eq!(c.verdict.as_deref(), Some("comparison_fails"), "{:?}", c.notes);
    }

    #[test]
    fn parabolic_boundary_skips_top() {
        let g = GridDomain::cube(&[-1.0, 0.0], &[1.0, 1.0], 0.1, true).unwrap();
        let f = catalog("parabolic_P1", &Params { n: Some(2), ..Default::default() }).unwrap();
        let s = level_set(&f.pair, 0.0).unwrap();
        // the heat-type subsolution u = −t against w = 0
        let u = TestFunction::new(|x| -x[1], |x| Ok(Jet::from_slices(-x[1], &[0.0, -1.0], SymMatrix::zeros(2)).unwrap()));
        let w = TestFunction::constant(0.0, 2);
        let full = comparison_check(&s, &u, &w, &g, BoundaryKind::Full, None).unwrap();
        let para = comparison_check(&s, &u, &w, &g, BoundaryKind::Parabolic, None).unwrap();
        assert_eq!(para.verdict.as_deref(), Some("comparison_holds"));
        let top = g.on_top.iter().filter(|t| **t).count() as f64;
        assert_eq!(full.details["boundary_points_checked"] - para.details["boundary_points_checked"], top);
    }

    #[test]
    fn subaffine_plus() {
        let r = scenario_subaffine_plus(2000, 5);
        assert!(r.pass, "{:?}", r.details);
        assert_eq!(r.details["u_at_1"], 1.0);
        assert_eq!(r.details["a_plus_at_1"], 0.0);
    }

    #[test]
    fn constant_negative_is_q_tilde_sub() {
        let g = GridDomain::cube(&[-1.0], &[1.0], 0.1, false).unwrap();
        let q_tilde = ConstraintSet::new(1, "Q~", |j: &Jet| (-j.r).max(j.a.lambda_max()));
        let r = jet_inclusion_check(&q_tilde, &TestFunction::constant(-1.0, 1), &g, CheckMode::Sub, None).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn strict_sequences() {
        let g = grid2(1.0, 0.05);
        let alpha = 2.0;
        let f = catalog("alpha_F", &Params::n(2).with_alpha(alpha)).unwrap();
        let sf = level_set(&f.pair, 0.0).unwrap();
        let eps = [0.1, 0.03, 0.01, 0.003];
        let r = strict_sequence_check(&sf, &alpha_z_family(2), &eps, &g).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        let gg = catalog("alpha_G", &Params::n(2).with_alpha(alpha)).unwrap();
        let gt = dual_margin(&level_set(&gg.pair, 0.0).unwrap());
        let r = strict_sequence_check(&gt, &alpha_psi_family(alpha, 2), &eps, &g).unwrap();
        assert!(r.pass, "{:?} {:?}", r.notes, r.details);
        assert!(r.details["gap_3"] < r.details["gap_0"]);
    }
}
