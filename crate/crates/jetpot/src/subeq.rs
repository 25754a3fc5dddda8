//! Constraint sets as signed margins, Dirichlet duality, level sets of
//! operators, and the sampled structural checks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cones::{self, MonotonicityCone, Radius};
use crate::error::{Error, Result};
use crate::jets::{Jet, SymMatrix, Vector};
use crate::report::VerificationReport;
use crate::sample::{self, JetRng};

pub type MarginFn = Arc<dyn Fn(&Jet) -> f64 + Send + Sync>;
pub type OperatorFn = Arc<dyn Fn(&Jet) -> f64 + Send + Sync>;

/// Draw budget for rejection sampling before a check gives up.
pub const MEMBER_BUDGET: usize = 100_000;

/// Which jet slots a reduced subequation ignores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedAxes {
    pub r: bool,
    pub p: bool,
    pub a: bool,
}

/// F = {margin ≥ 0}.
#[derive(Clone)]
pub struct ConstraintSet {
    pub n: usize,
    pub name: String,
    margin: MarginFn,
    pub monotone_cone: Option<MonotonicityCone>,
    pub reduced_axes: ReducedAxes,
    pub tame: Option<bool>,
    /// Wraps a yes/no predicate; the margin carries no distance information.
    pub boolean: bool,
    pub warning: Option<String>,
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("monotone_cone", &self.monotone_cone)
            .field("tame", &self.tame)
            .field("boolean", &self.boolean)
            .finish()
    }
}

impl ConstraintSet {
    pub fn new(n: usize, name: impl Into<String>, margin: impl Fn(&Jet) -> f64 + Send + Sync + 'static) -> Self {
        ConstraintSet {
            n,
            name: name.into(),
            margin: Arc::new(margin),
            monotone_cone: None,
            reduced_axes: ReducedAxes::default(),
            tame: None,
            boolean: false,
            warning: None,
        }
    }

    /// A cone as a constraint set; it is monotone for itself.
    pub fn from_cone(m: MonotonicityCone, n: usize) -> Result<Self> {
        m.validate(n)?;
        let mm = m.clone();
        let mut s = ConstraintSet::new(n, format!("{m:?}"), move |j| mm.margin(j));
        s.monotone_cone = Some(m);
        s.tame = Some(true);
        Ok(s)
    }

    /// A yes/no set, margin ±1. Duality of such sets is only approximate.
    pub fn from_predicate(n: usize, name: impl Into<String>, pred: impl Fn(&Jet) -> bool + Send + Sync + 'static) -> Self {
        let mut s = ConstraintSet::new(n, name, move |j| if pred(j) { 1.0 } else { -1.0 });
        s.boolean = true;
        s.tame = Some(false);
        s
    }

    /// ℝ × ℝⁿ × P
    pub fn psd(n: usize) -> Self {
        let mut s = ConstraintSet::new(n, "P", |j| j.a.lambda_min());
        s.monotone_cone = Some(MonotonicityCone::m_p());
        s.reduced_axes = ReducedAxes { r: true, p: true, a: false };
        s.tame = Some(true);
        s
    }

    pub fn with_cone(mut self, m: MonotonicityCone) -> Self {
        self.monotone_cone = Some(m);
        self
    }

    pub fn with_reduced(mut self, axes: ReducedAxes) -> Self {
        self.reduced_axes = axes;
        self
    }

    pub fn with_tame(mut self, tame: bool) -> Self {
        self.tame = Some(tame);
        self
    }

    pub fn margin(&self, j: &Jet) -> f64 {
        (self.margin)(j)
    }

    pub fn margin_fn(&self) -> MarginFn {
        self.margin.clone()
    }

    pub fn contains(&self, j: &Jet) -> bool {
        self.margin(j) >= -cones::tol(j)
    }

    pub fn interior(&self, j: &Jet) -> bool {
        self.margin(j) > cones::tol(j)
    }

    /// F + J
    pub fn shifted(&self, by: &Jet) -> ConstraintSet {
        let m = self.margin.clone();
        let by = by.clone();
        let mut s = self.clone();
        s.name = format!("{} + J", self.name);
        s.margin = Arc::new(move |j| m(&(j - &by)));
        s
    }

    /// The axis used to push jets into or along the set.
    pub fn push_axis(&self) -> Jet {
        match &self.monotone_cone {
            Some(m) => m.interior_axis(self.n),
            None => Jet::from_parts(-1.0, Vector::zeros(self.n), SymMatrix::identity(self.n)),
        }
    }
}

/// m̃(J) = −m(−J).
pub fn dual_margin(s: &ConstraintSet) -> ConstraintSet {
    let m = s.margin.clone();
    let mut d = s.clone();
    d.name = format!("dual({})", s.name);
    d.margin = Arc::new(move |j| -m(&-j));
    if s.boolean || s.tame == Some(false) {
        d.warning = Some("margin is not tame; the dual is only correct off the boundary".into());
    } else if s.tame.is_none() && zero_set_looks_fat(s) {
        d.warning = Some("margin vanishes on a sampled open set; the dual may be wrong there".into());
    }
    d
}

// Random jets hit the zero set of a tame margin with probability 0.
fn zero_set_looks_fat(s: &ConstraintSet) -> bool {
    let mut rng = sample::rng(0);
    let hits = (0..64)
        .filter(|_| {
            let j = sample::jet(&mut rng, s.n);
            s.margin(&j) == 0.0
        })
        .count();
    hits >= 4
}

/// An interval of levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    /// Sampled, not analytic.
    #[serde(default)]
    pub approximate: bool,
}

impl Interval {
    pub fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false, approximate: false }
    }

    pub fn closed_ray(lo: f64) -> Self {
        Interval { lo, hi: f64::INFINITY, lo_closed: true, hi_closed: false, approximate: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false, approximate: false }
    }

    pub fn contains(&self, c: f64) -> bool {
        let above = if self.lo_closed { c >= self.lo } else { c > self.lo };
        let below = if self.hi_closed { c <= self.hi } else { c < self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// An operator with its constraint set. `constraint: None` is the
/// unconstrained case, where the operator is total on J².
#[derive(Clone)]
pub struct CompatiblePair {
    pub n: usize,
    pub name: String,
    operator: OperatorFn,
    pub constraint: Option<ConstraintSet>,
    /// inf of the operator over the constraint; −∞ when unconstrained.
    pub c0: f64,
    pub levels: Interval,
    pub cone: Option<MonotonicityCone>,
}

impl fmt::Debug for CompatiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompatiblePair")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("constraint", &self.constraint)
            .field("c0", &self.c0)
            .field("levels", &self.levels)
            .finish()
    }
}

impl CompatiblePair {
    pub fn constrained(
        name: impl Into<String>,
        operator: impl Fn(&Jet) -> f64 + Send + Sync + 'static,
        constraint: ConstraintSet,
        c0: f64,
        levels: Interval,
    ) -> Self {
        CompatiblePair {
            n: constraint.n,
            name: name.into(),
            operator: Arc::new(operator),
            cone: constraint.monotone_cone.clone(),
            constraint: Some(constraint),
            c0,
            levels,
        }
    }

    pub fn unconstrained(
        n: usize,
        name: impl Into<String>,
        operator: impl Fn(&Jet) -> f64 + Send + Sync + 'static,
        levels: Interval,
        cone: Option<MonotonicityCone>,
    ) -> Self {
        CompatiblePair {
            n,
            name: name.into(),
            operator: Arc::new(operator),
            constraint: None,
            c0: f64::NEG_INFINITY,
            levels,
            cone,
        }
    }

    pub fn operator(&self, j: &Jet) -> f64 {
        (self.operator)(j)
    }

    pub fn operator_fn(&self) -> OperatorFn {
        self.operator.clone()
    }

    pub fn constraint_margin(&self, j: &Jet) -> f64 {
        self.constraint.as_ref().map_or(f64::INFINITY, |c| c.margin(j))
    }

    pub fn in_constraint(&self, j: &Jet) -> bool {
        self.constraint.as_ref().is_none_or(|c| c.contains(j))
    }

    /// The set the pair lives on: its constraint, or all of J².
    fn domain(&self) -> ConstraintSet {
        match &self.constraint {
            Some(c) => c.clone(),
            None => {
                let mut s = ConstraintSet::new(self.n, "J2", |_| f64::INFINITY);
                s.monotone_cone = self.cone.clone();
                s
            }
        }
    }
}

/// F_c = {J ∈ F : F(J) ≥ c}.
pub fn level_set(p: &CompatiblePair, c: f64) -> Result<ConstraintSet> {
    if !p.levels.contains(c) {
        return Err(Error::Level(format!("level {c} is outside the admissible levels {} of {}", p.levels, p.name)));
    }
    let op = p.operator.clone();
    let cons = p.constraint.as_ref().map(|s| s.margin_fn());
    let mut s = ConstraintSet::new(p.n, format!("{} >= {c}", p.name), move |j| {
        let v = op(j) - c;
        match &cons {
            Some(m) => m(j).min(v),
            None => v,
        }
    });
    s.monotone_cone = p.cone.clone();
    Ok(s)
}

/// Largest t with margin(J + t·axis) < 0 < margin(J + t'·axis) for t' > t,
/// or None when no crossing is found.
fn boundary_param(s: &ConstraintSet, j: &Jet, axis: &Jet) -> Option<f64> {
    let f = |t: f64| s.margin(&j.axpy(t, axis));
    let f0 = f(0.0);
    if f0.is_nan() {
        return None;
    }
    let (mut lo, mut hi);
    if f0 >= 0.0 {
        hi = 0.0;
        lo = -1.0;
        while f(lo) >= 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < -1e12 {
                return None;
            }
        }
    } else {
        lo = 0.0;
        hi = 1.0;
        while !(f(hi) >= 0.0) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return None;
            }
        }
    }
    let eps = 1e-13 * (1.0 + j.norm());
    for _ in 0..200 {
        if hi - lo <= eps {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Moves J along ±axis onto ∂F (closed side).
pub fn project_to_boundary(s: &ConstraintSet, j: &Jet, axis: &Jet) -> Option<Jet> {
    boundary_param(s, j, axis).map(|t| j.axpy(t, axis))
}

/// A member of `s`: rejection sampling (misses are pushed in along the
/// interior axis when the set carries its cone), then with probability ½ a slide
/// onto the boundary along the set's push axis.
pub fn sample_member(s: &ConstraintSet, rng: &mut JetRng, draws: &mut usize) -> Option<Jet> {
    let axis = s.push_axis();
    let start = *draws;
    while *draws - start < MEMBER_BUDGET {
        *draws += 1;
        let mut j = sample::jet(rng, s.n);
        if !s.contains(&j) {
            // thin sets: an M-monotone set absorbs any jet pushed far
            // enough along an interior ray of M
            match s.monotone_cone.as_ref().and_then(|_| push_inside(s, &j, &axis)) {
                Some(k) => j = k,
                None => continue,
            }
        }
        if sample::uniform(rng, 0.0, 1.0) < 0.5 {
            if let Some(b) = project_to_boundary(s, &j, &axis) {
                return Some(b);
            }
        }
        return Some(j);
    }
    None
}

fn push_inside(s: &ConstraintSet, j: &Jet, axis: &Jet) -> Option<Jet> {
    let mut t = 1.0 + j.norm();
    for _ in 0..40 {
        let k = j.axpy(t, axis);
        if s.contains(&k) {
            return Some(k);
        }
        t *= 2.0;
    }
    None
}

/// The extreme ray of a fundamental cone over q: (−γ|q|, q, (|q|/R)I).
fn extreme_member(m: &MonotonicityCone, q: &Vector) -> Option<Jet> {
    let n = q.len();
    match m {
        MonotonicityCone::Fundamental { gamma, d, r } if d.is_full() || d.margin(q) >= 0.0 => {
            let nq = q.norm();
            let rv = gamma.map_or(0.0, |g| -g * nq);
            let a = match r {
                None => return None,
                Some(Radius::Infinite) => SymMatrix::zeros(n),
                Some(Radius::Finite(rr)) => SymMatrix::scalar(n, nq / rr),
            };
            Some(Jet::from_parts(rv, q.clone(), a))
        }
        _ => None,
    }
}

/// F + M ⊂ F, sampled. With `operator`, also F(J + J′) ≥ F(J).
///
/// Half of the pairs are adversarial: J′ on an extreme ray of M, and J on
/// ∂F with gradient antiparallel to that of J′.
pub fn monotonicity_check(
    s: &ConstraintSet,
    m: &MonotonicityCone,
    n_samples: usize,
    seed: u64,
    operator: Option<&OperatorFn>,
) -> VerificationReport {
    let n = s.n;
    let mut rng = sample::rng(seed);
    let mut report = VerificationReport::new(seed);
    let mut draws = 0usize;
    let a_axis = Jet::from_parts(0.0, Vector::zeros(n), SymMatrix::identity(n));
    while report.n_samples < n_samples {
        let guided = report.n_samples % 2 == 1;
        let pair = if guided {
            let q = sample::unit_vector(&mut rng, n) * sample::magnitude(&mut rng);
            let jp = extreme_member(m, &q).unwrap_or_else(|| m.sample_member(&mut rng, n));
            let c = sample::uniform(&mut rng, 1.0, 3.0);
            let base = sample::jet(&mut rng, n);
            let start = Jet::from_parts(base.r, &jp.p * -c, base.a);
            draws += 1;
            project_to_boundary(s, &start, &a_axis).map(|j| (j, jp))
        } else {
            None
        };
        let (j, jp) = match pair {
            Some(p) => p,
            None => match sample_member(s, &mut rng, &mut draws) {
                Some(j) => (j, m.sample_member(&mut rng, n)),
                None if !report.pass => break,
                None => {
                    return VerificationReport::inconclusive(
                        seed,
                        report.n_samples,
                        &format!("no members of {} found in {MEMBER_BUDGET} draws", s.name),
                    )
                }
            },
        };
        if draws > (MEMBER_BUDGET * 4).max(20 * n_samples) {
            // a violation already found is decisive
            if !report.pass {
                report.note("draw budget exhausted after a violation");
                break;
            }
            return VerificationReport::inconclusive(seed, report.n_samples, "draw budget exhausted");
        }
        let sum = &j + &jp;
        let tol = 1e-8 * (1.0 + j.norm() + jp.norm());
        let mut margin = s.margin(&sum) + tol;
        if let Some(op) = operator {
            let f0 = op(&j);
            let f1 = op(&sum);
            margin = margin.min(f1 - f0 + tol * (1.0 + f0.abs()));
        }
        report.observe(margin, Some(&sum), None);
        if !(margin >= 0.0) {
            if report.pass {
                report.note(format!("J = {}", crate::report::to_json_string(&j).trim_end()));
                report.note(format!("J' = {}", crate::report::to_json_string(&jp).trim_end()));
            }
            report.fail();
        }
    }
    report.detail("draws", draws as f64);
    report
}

/// F(J + tJ₀) > F(J) for sampled J in the constraint and t ∈ (0, 10].
pub fn tameness_check(p: &CompatiblePair, j0: &Jet, samples: usize, seed: u64) -> VerificationReport {
    let mut rng = sample::rng(seed);
    let mut report = VerificationReport::new(seed);
    let dom = p.domain();
    let mut draws = 0;
    while report.n_samples < samples {
        let j = match sample_member(&dom, &mut rng, &mut draws) {
            Some(j) => j,
            None => return VerificationReport::inconclusive(seed, report.n_samples, "no constraint members found"),
        };
        let t = 10.0 * (1.0 - sample::uniform(&mut rng, 0.0, 1.0));
        let inc = p.operator(&j.axpy(t, j0)) - p.operator(&j);
        report.observe(inc, Some(&j), None);
        if !(inc > 0.0) {
            report.fail();
        }
    }
    report
}

/// Checks c₀ = inf_F F and ∂F = {F = c₀} by sampling.
pub fn compatibility_check(p: &CompatiblePair, samples: usize, seed: u64) -> Result<VerificationReport> {
    let cons = p
        .constraint
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("{} is unconstrained; compatibility is for constrained pairs", p.name)))?;
    const FLOOR: f64 = -1e8;
    let n = p.n;
    let mut rng = sample::rng(seed);
    let mut report = VerificationReport::new(seed);
    let axis = cons.push_axis();
    let mut draws = 0;
    let mut inf = f64::INFINITY;
    let mut members = Vec::new();
    while members.len() < samples {
        match sample_member(cons, &mut rng, &mut draws) {
            Some(j) => members.push(j),
            None => return Ok(VerificationReport::inconclusive(seed, members.len(), "no constraint members found")),
        }
    }

    // infimum, with a march toward −∞ along a few directions
    let mut divergent: Option<Jet> = None;
    for (i, j) in members.iter().enumerate() {
        let v = p.operator(j);
        inf = inf.min(v);
        let slack = 1e-6 * (1.0 + p.c0.abs() + v.abs().min(1e6));
        if v < p.c0 - slack {
            report.observe(v - p.c0, Some(j), None);
            report.fail();
        }
        if i < 32 && divergent.is_none() {
            let mut dirs = vec![
                Jet::from_parts(1.0, Vector::zeros(n), SymMatrix::zeros(n)),
                Jet::from_parts(-1.0, Vector::zeros(n), SymMatrix::zeros(n)),
            ];
            dirs.push(sample::jet(&mut rng, n));
            for d in &dirs {
                for k in 0..60 {
                    let cand = j.axpy(2f64.powi(k), d);
                    if !cons.contains(&cand) {
                        break;
                    }
                    let v = p.operator(&cand);
                    inf = inf.min(v);
                    if v < FLOOR {
                        divergent = Some(cand);
                        break;
                    }
                }
                if divergent.is_some() {
                    break;
                }
            }
        }
    }
    if let Some(w) = divergent {
        report.observe(f64::NEG_INFINITY, Some(&w), None);
        report.fail();
        report.verdict = Some("divergent_infimum".into());
        report.detail("inf_estimate", f64::NEG_INFINITY);
        report.note("the operator is unbounded below on the constraint");
        return Ok(report);
    }
    report.detail("inf_estimate", inf);

    // boundary jets sit at level c₀
    let mut worst_boundary = 0.0f64;
    for j in &members {
        let Some(b) = project_to_boundary(cons, j, &axis) else { continue };
        let v = p.operator(&b);
        let scale = 1.0 + (p.operator(&(&b + &axis)) - p.c0).abs();
        let gap = (v - p.c0).abs() / scale;
        worst_boundary = worst_boundary.max(gap);
        report.observe(1e-6 - gap, Some(&b), None);
        if gap > 1e-6 {
            report.fail();
        }
    }
    report.detail("boundary_level_gap", worst_boundary);

    // jets at level c₀ sit on the boundary
    let mut worst_level = 0.0f64;
    for j in members.iter().take(samples.min(256)) {
        let f = |t: f64| p.operator(&j.axpy(-t, &axis)) - p.c0;
        if !(f(0.0) > 0.0) {
            continue;
        }
        let mut hi = 1.0;
        while f(hi) > 0.0 && cons.contains(&j.axpy(-hi, &axis)) && hi < 1e12 {
            hi *= 2.0;
        }
        if !cons.contains(&j.axpy(-hi, &axis)) {
            // membership ran out first; the boundary check covers this ray
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lvl = j.axpy(-hi, &axis);
        let m = cons.margin(&lvl);
        let gap = m.abs() / (1.0 + lvl.norm());
        worst_level = worst_level.max(gap);
        report.observe(1e-6 - gap, Some(&lvl), None);
        if gap > 1e-6 {
            report.fail();
        }
    }
    report.detail("level_margin_gap", worst_level);
    report.n_samples = members.len();
    report.verdict = Some(if report.pass { "compatible" } else { "incompatible" }.into());
    Ok(report)
}

/// Lemma-level jet addition: F + F̃ ⊂ H and F + H̃ ⊂ F are sampled
/// separately; the check passes when the two verdicts agree.
pub fn jet_addition_check(f: &ConstraintSet, h: &ConstraintSet, samples: usize, seed: u64) -> VerificationReport {
    let mut rng = sample::rng(seed);
    let mut report = VerificationReport::new(seed);
    let fd = dual_margin(f);
    let hd = dual_margin(h);
    let inclusion = |a: &ConstraintSet, b: &ConstraintSet, target: &ConstraintSet, rng: &mut JetRng| -> Option<(bool, f64, Jet)> {
        let mut draws = 0;
        let mut worst = f64::INFINITY;
        let mut wit = None;
        for _ in 0..samples {
            let x = sample_member(a, rng, &mut draws)?;
            let y = sample_member(b, rng, &mut draws)?;
            let s = &x + &y;
            let m = target.margin(&s) + 1e-8 * (1.0 + x.norm() + y.norm());
            if m < worst {
                worst = m;
                wit = Some(s);
            }
        }
        Some((worst >= 0.0, worst, wit.unwrap_or_else(|| Jet::zero(a.n))))
    };
    let lhs = inclusion(f, &fd, h, &mut rng);
    let rhs = inclusion(f, &hd, f, &mut rng);
    let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
        return VerificationReport::inconclusive(seed, 0, "member sampling starved");
    };
    report.n_samples = 2 * samples;
    report.detail("lhs_holds", if lhs.0 { 1.0 } else { 0.0 });
    report.detail("rhs_holds", if rhs.0 { 1.0 } else { 0.0 });
    report.detail("lhs_worst", lhs.1);
    report.detail("rhs_worst", rhs.1);
    let (w, wj) = if lhs.1 < rhs.1 { (lhs.1, lhs.2) } else { (rhs.1, rhs.2) };
    report.worst_margin = w;
    report.witness = Some(wj);
    report.pass = lhs.0 == rhs.0;
    report.verdict = Some(match (lhs.0, rhs.0) {
        (true, true) => "both_hold",
        (false, false) => "both_fail",
        _ => "disagree",
    }
    .into());
    report
}
