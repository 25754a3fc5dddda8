//! Canonical operators by ray bisection, their duals, graphing functions,
//! Lipschitz seminorms, and pointed linear families (HJB infima/suprema).

use serde::{Deserialize, Serialize};

use crate::cones::{self, MonotonicityCone};
use crate::error::{Error, Result};
use crate::jets::{Jet, SymMatrix, Vector};
use crate::sample;
use crate::subeq::{dual_margin, ConstraintSet};

/// Default bisection width, relative to 1 + ‖J‖.
pub const RAY_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: i32 = 60;

/// The crossing t_J of margin(J + tJ₀) = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySolution {
    pub t_j: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub residual: f64,
}

/// Bisection for t_J. The bracket starts at ±1 and doubles.
pub fn canonical_solve(margin: impl Fn(&Jet) -> f64, j0: &Jet, j: &Jet, tol: Option<f64>) -> Result<RaySolution> {
    let tol = tol.unwrap_or(RAY_TOL * (1.0 + j.norm()));
    let f = |t: f64| {
        let v = margin(&j.axpy(t, j0));
        if v.is_nan() {
            Err(Error::Evaluation(format!("margin is NaN at t = {t}")))
        } else {
            Ok(v)
        }
    };
    let (mut lo, mut hi);
    if f(0.0)? >= 0.0 {
        hi = 0.0;
        lo = -1.0;
        let mut k = 0;
        while f(lo)? >= 0.0 {
            k += 1;
            if k > MAX_DOUBLINGS {
                return Err(structure());
            }
            hi = lo;
            lo *= 2.0;
        }
    } else {
        lo = 0.0;
        hi = 1.0;
        let mut k = 0;
        while f(hi)? < 0.0 {
            k += 1;
            if k > MAX_DOUBLINGS {
                return Err(structure());
            }
            lo = hi;
            hi *= 2.0;
        }
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let t_j = 0.5 * (lo + hi);
    Ok(RaySolution { t_j, bracket, iterations, residual: f(t_j)? })
}

fn structure() -> Error {
    Error::Structure(format!(
        "no sign change of the margin along J + tJ0 for |t| ≤ 2^{MAX_DOUBLINGS}: the set is not monotone for a cone containing J0 in its interior"
    ))
}

fn check_axis(s: &ConstraintSet, j0: &Jet) -> Result<()> {
    if j0.dim() != s.n {
        return Err(Error::Precondition(format!("J0 has dimension {} but the set has {}", j0.dim(), s.n)));
    }
    if let Some(m) = &s.monotone_cone {
        if !cones::cone_interior(m, j0) {
            return Err(Error::Precondition("J0 is not in the interior of the monotonicity cone".into()));
        }
    }
    Ok(())
}

/// Full solution for the canonical operator of `s` along `j0`.
pub fn canonical_ray(s: &ConstraintSet, j0: &Jet, j: &Jet, tol: Option<f64>) -> Result<RaySolution> {
    check_axis(s, j0)?;
    canonical_solve(|x| s.margin(x), j0, j, tol)
}

/// F(J) = −t_J.
pub fn canonical_eval(s: &ConstraintSet, j0: &Jet, j: &Jet, tol: Option<f64>) -> Result<f64> {
    Ok(-canonical_ray(s, j0, j, tol)?.t_j)
}

/// F̃(J) = −F(−J).
pub fn dual_canonical_eval(s: &ConstraintSet, j0: &Jet, j: &Jet, tol: Option<f64>) -> Result<f64> {
    Ok(-canonical_eval(s, j0, &-j, tol)?)
}

/// A hyperplane W₀ = {J : ⟨ν, J⟩ = 0}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Jet,
}

impl Hyperplane {
    /// Orthogonal projection onto W₀.
    pub fn project(&self, j: &Jet) -> Jet {
        let nn = self.normal.dot(&self.normal);
        j.axpy(-self.normal.dot(j) / nn, &self.normal)
    }

    fn transversal(&self, j0: &Jet) -> Result<()> {
        if !(self.normal.dot(j0) > 0.0) {
            return Err(Error::Geometry("W0 is not transversal to J0: ⟨ν, J0⟩ ≤ 0".into()));
        }
        Ok(())
    }

    fn on_plane(&self, j: &Jet) -> Result<()> {
        let v = self.normal.dot(j);
        if v.abs() > 1e-9 * self.normal.norm() * (1.0 + j.norm()) {
            return Err(Error::Precondition(format!("J' is not in W0 (⟨ν, J'⟩ = {v})")));
        }
        Ok(())
    }
}

/// g(J′) = −F(J′); ∂F is the graph {J′ + g(J′)J₀ : J′ ∈ W₀}.
pub fn graphing(s: &ConstraintSet, j0: &Jet, w0: &Hyperplane, jp: &Jet) -> Result<f64> {
    w0.transversal(j0)?;
    w0.on_plane(jp)?;
    Ok(-canonical_eval(s, j0, jp, None)?)
}

/// (‖J′‖⁺, ‖J′‖⁻) for the cone M with the graphing hyperplane W₀.
///
/// The normal of W₀ must lie in the relative interior of the polar M°;
/// this is probed with 10³ polar samples.
pub fn lipschitz_seminorm(m: &MonotonicityCone, j0: &Jet, w0: &Hyperplane, jp: &Jet) -> Result<(f64, f64)> {
    let n = j0.dim();
    w0.transversal(j0)?;
    w0.on_plane(jp)?;
    let nu = &w0.normal;
    if !cones::polar_member(m, nu)? {
        return Err(Error::Geometry("the normal of W0 is not in the polar cone".into()));
    }
    let mut rng = sample::rng(0);
    let eps = 1e-2 * nu.norm();
    for _ in 0..1000 {
        let pj = m.sample_polar(&mut rng, n)?;
        let pn = pj.norm();
        if pn == 0.0 {
            continue;
        }
        let probe = nu.axpy(-eps / pn, &pj);
        if !cones::polar_member(m, &probe)? {
            return Err(Error::Geometry("the normal of W0 is on the relative boundary of the polar cone".into()));
        }
    }
    let s = ConstraintSet::from_cone(m.clone(), n)?;
    let plus = -canonical_eval(&s, j0, jp, None)?;
    let minus = -canonical_eval(&s, j0, &-jp, None)?;
    Ok((plus, minus))
}

/// Coefficient jets J_σ. A member is the sum of one jet from each part, so
/// a single part is an explicit list and several parts form a product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFamily {
    pub parts: Vec<Vec<Jet>>,
    #[serde(default)]
    pub axis: Option<Jet>,
}

/// Combinations beyond this are not enumerated.
const ENUM_LIMIT: usize = 20_000_000;

impl LinearFamily {
    pub fn explicit(members: Vec<Jet>) -> Self {
        LinearFamily { parts: vec![members], axis: None }
    }

    pub fn product(parts: Vec<Vec<Jet>>) -> Self {
        LinearFamily { parts, axis: None }
    }

    pub fn dim(&self) -> usize {
        self.parts.first().and_then(|p| p.first()).map_or(0, |j| j.dim())
    }

    pub fn len(&self) -> usize {
        self.parts.iter().map(|p| p.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty() || self.parts.iter().any(|p| p.is_empty())
    }

    pub fn member(&self, idx: &[usize]) -> Jet {
        let mut j = Jet::zero(self.dim());
        for (part, &i) in self.parts.iter().zip(idx) {
            j = &j + &part[i];
        }
        j
    }

    /// Proper ellipticity of every part sum: r-coefficient ≤ 0 and E ⪰ 0.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Precondition("empty linear family".into()));
        }
        let n = self.dim();
        for part in &self.parts {
            for j in part {
                if j.dim() != n {
                    return Err(Error::Precondition("family members differ in dimension".into()));
                }
            }
        }
        // extremes of each slot are attained part by part
        let rmax: f64 = self.parts.iter().map(|p| p.iter().map(|j| j.r).fold(f64::NEG_INFINITY, f64::max)).sum();
        if rmax > 1e-12 {
            return Err(Error::Precondition("a member has positive r-coefficient (not proper elliptic)".into()));
        }
        for part in &self.parts {
            for j in part {
                if j.a.lambda_min() < -1e-9 * (1.0 + j.a.norm()) && self.parts.len() == 1 {
                    return Err(Error::Precondition("a member has an indefinite second-order coefficient".into()));
                }
            }
        }
        Ok(())
    }

    /// Mean of the normalized members, summed over parts.
    pub fn default_axis(&self) -> Jet {
        let mut axis = Jet::zero(self.dim());
        for part in &self.parts {
            let mut m = Jet::zero(self.dim());
            for j in part {
                let nj = j.norm();
                if nj > 0.0 {
                    m = m.axpy(1.0 / nj, j);
                }
            }
            axis = axis.axpy(1.0 / part.len() as f64, &m);
        }
        axis
    }
}

/// Per-part scalar summaries for the fast paths.
struct PartStats {
    den: Vec<f64>,
    nsq: Vec<f64>,
}

fn part_stats(f: &LinearFamily, j0: &Jet) -> Vec<PartStats> {
    f.parts
        .iter()
        .map(|p| PartStats { den: p.iter().map(|j| j.dot(j0)).collect(), nsq: p.iter().map(|j| j.dot(j)).collect() })
        .collect()
}

fn parts_orthogonal(f: &LinearFamily) -> bool {
    for a in 0..f.parts.len() {
        for b in a + 1..f.parts.len() {
            for x in &f.parts[a] {
                for y in &f.parts[b] {
                    if x.dot(y).abs() > 1e-14 * (1.0 + x.norm() * y.norm()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn constant(v: &[f64]) -> Option<f64> {
    let first = *v.first()?;
    v.iter().all(|x| (x - first).abs() <= 1e-12 * (1.0 + first.abs())).then_some(first)
}

/// Outcome of `pointedness_check`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pointedness {
    pub pointed: bool,
    pub axis: Jet,
    /// min over σ of ⟨J_σ, J₀⟩/‖J_σ‖
    pub epsilon: f64,
    /// Per-part indices of the worst member.
    pub worst: Vec<usize>,
}

/// ⟨J_σ, J₀⟩ ≥ ε‖J_σ‖ with ε > 0, using the supplied axis or the mean of
/// the normalized members.
pub fn pointedness_check(f: &LinearFamily, axis: Option<&Jet>) -> Result<Pointedness> {
    f.validate()?;
    let j0 = axis.cloned().or_else(|| f.axis.clone()).unwrap_or_else(|| f.default_axis());
    let stats = part_stats(f, &j0);
    let ratio = |idx: &[usize]| -> f64 {
        let m = f.member(idx);
        m.dot(&j0) / m.norm()
    };
    let (epsilon, worst) = if parts_orthogonal(f) {
        // with orthogonal parts the ratio depends on (den, nsq) per part only
        let mut uniq: Vec<Vec<(f64, f64, usize)>> = Vec::new();
        for s in &stats {
            let mut u: Vec<(f64, f64, usize)> = Vec::new();
            for i in 0..s.den.len() {
                if !u.iter().any(|(d, q, _)| *d == s.den[i] && *q == s.nsq[i]) {
                    u.push((s.den[i], s.nsq[i], i));
                }
            }
            uniq.push(u);
        }
        let total: usize = uniq.iter().map(|u| u.len()).product();
        if total > ENUM_LIMIT {
            return Err(Error::Capability(format!("{total} distinct combinations exceed the enumeration limit")));
        }
        let mut best = (f64::INFINITY, vec![0; f.parts.len()]);
        for_each_index(&uniq.iter().map(|u| u.len()).collect::<Vec<_>>(), |ix| {
            let (mut d, mut q) = (0.0, 0.0);
            for (p, &i) in ix.iter().enumerate() {
                d += uniq[p][i].0;
                q += uniq[p][i].1;
            }
            let r = if q > 0.0 { d / q.sqrt() } else { f64::INFINITY };
            if r < best.0 {
                best = (r, ix.iter().enumerate().map(|(p, &i)| uniq[p][i].2).collect());
            }
        });
        best
    } else {
        if f.len() > ENUM_LIMIT {
            return Err(Error::Capability(format!("{} members exceed the enumeration limit", f.len())));
        }
        let mut best = (f64::INFINITY, vec![0; f.parts.len()]);
        for_each_index(&f.parts.iter().map(|p| p.len()).collect::<Vec<_>>(), |ix| {
            let r = ratio(ix);
            if r < best.0 {
                best = (r, ix.to_vec());
            }
        });
        best
    };
    Ok(Pointedness { pointed: epsilon > 0.0, axis: j0, epsilon, worst })
}

fn for_each_index(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.iter().any(|s| *s == 0) {
        return;
    }
    let mut ix = vec![0usize; sizes.len()];
    loop {
        f(&ix);
        let mut k = 0;
        loop {
            if k == sizes.len() {
                return;
            }
            ix[k] += 1;
            if ix[k] < sizes[k] {
                break;
            }
            ix[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Inf,
    Sup,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" => Ok(Mode::Inf),
            "sup" => Ok(Mode::Sup),
            _ => Err(Error::Precondition(format!("mode must be inf or sup, got '{s}'"))),
        }
    }
}

/// inf (or sup) over σ of ⟨J_σ, J⟩/⟨J_σ, J₀⟩.
pub fn family_op(f: &LinearFamily, mode: Mode, j0: &Jet, j: &Jet) -> Result<f64> {
    f.validate()?;
    let stats = part_stats(f, j0);
    let pick = |a: f64, b: f64| match mode {
        Mode::Inf => a.min(b),
        Mode::Sup => a.max(b),
    };
    let start = match mode {
        Mode::Inf => f64::INFINITY,
        Mode::Sup => f64::NEG_INFINITY,
    };
    let consts: Option<Vec<f64>> = stats.iter().map(|s| constant(&s.den)).collect();
    if let Some(dens) = consts {
        // separable: the denominator does not depend on the choice
        let den: f64 = dens.iter().sum();
        if !(den > 0.0) {
            return Err(Error::Precondition("⟨J_σ, J0⟩ ≤ 0: the family is not pointed along J0".into()));
        }
        let num: f64 = f.parts.iter().map(|p| p.iter().map(|m| m.dot(j)).fold(start, pick)).sum();
        return Ok(num / den);
    }
    if f.len() > ENUM_LIMIT {
        return Err(Error::Capability(format!("{} members exceed the enumeration limit", f.len())));
    }
    let nums: Vec<Vec<f64>> = f.parts.iter().map(|p| p.iter().map(|m| m.dot(j)).collect()).collect();
    let mut acc = start;
    let mut bad = false;
    for_each_index(&f.parts.iter().map(|p| p.len()).collect::<Vec<_>>(), |ix| {
        let (mut num, mut den) = (0.0, 0.0);
        for (p, &i) in ix.iter().enumerate() {
            num += nums[p][i];
            den += stats[p].den[i];
        }
        if !(den > 0.0) {
            bad = true;
        }
        acc = pick(acc, num / den);
    });
    if bad {
        return Err(Error::Precondition("⟨J_σ, J0⟩ ≤ 0: the family is not pointed along J0".into()));
    }
    Ok(acc)
}

/// Unit directions: an exact angular grid for n = 2, a Fibonacci sphere for
/// n = 3.
pub fn sphere_grid(n: usize, count: usize) -> Result<Vec<Vector>> {
    match n {
        2 => Ok((0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let y = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rad = (1.0 - y * y).sqrt();
                    let th = golden * k as f64;
                    Vector::from_vec(vec![rad * th.cos(), y, rad * th.sin()])
                })
                .collect())
        }
        _ => Err(Error::Capability(format!("sphere grids are available for n = 2, 3, not {n}"))),
    }
}

/// The drift/volatility family {(0, η/R, ξ⊗ξ)} over unit η, ξ, whose
/// infimum along (0, 0, I) is λ₁(A) − |p|/R.
pub fn eigen_gradient_family(n: usize, r: f64, count: usize) -> Result<LinearFamily> {
    if !(r > 0.0) {
        return Err(Error::Precondition("R must be positive".into()));
    }
    let dirs = sphere_grid(n, count)?;
    let drift = dirs.iter().map(|e| Jet::from_parts(0.0, e / r, SymMatrix::zeros(n))).collect();
    let vol = dirs.iter().map(|e| Jet::from_parts(0.0, Vector::zeros(n), SymMatrix::outer(e))).collect();
    Ok(LinearFamily::product(vec![drift, vol]))
}

/// Canonical operator of the intersection of the renormalized half-spaces
/// {⟨J_σ, J⟩ ≥ 0}, for comparison with `family_op(.., Inf, ..)`.
pub fn intersection_set(f: &LinearFamily, j0: &Jet) -> ConstraintSet {
    let members: Vec<(Jet, f64)> = {
        let mut v = Vec::new();
        for_each_index(&f.parts.iter().map(|p| p.len()).collect::<Vec<_>>(), |ix| {
            let m = f.member(ix);
            let d = m.dot(j0);
            v.push((m, d));
        });
        v
    };
    ConstraintSet::new(f.dim(), "family intersection", move |j| {
        members.iter().map(|(m, d)| m.dot(j) / d).fold(f64::INFINITY, f64::min)
    })
}

/// `dual_margin` re-exported for symmetry with `dual_canonical_eval`.
pub fn dual_set(s: &ConstraintSet) -> ConstraintSet {
    dual_margin(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::DirectionalCone;

    fn jet(r: f64, p: &[f64], a: SymMatrix) -> Jet {
        Jet::from_slices(r, p, a).unwrap()
    }

    fn axis_i(n: usize) -> Jet {
        jet(0.0, &vec![0.0; n], SymMatrix::identity(n))
    }

    #[test]
    fn lambda_min_example() {
        let s = ConstraintSet::psd(2);
        let v = canonical_eval(&s, &axis_i(2), &jet(0.0, &[0.0, 0.0], SymMatrix::diag(&[2.0, 5.0])), None).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_convex_example() {
        let s = ConstraintSet::from_cone(MonotonicityCone::m_np(), 2).unwrap();
        let j0 = jet(-1.0, &[0.0, 0.0], SymMatrix::identity(2));
        let v = canonical_eval(&s, &j0, &jet(-3.0, &[0.0, 0.0], SymMatrix::diag(&[2.0, 5.0])), None).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let d = dual_canonical_eval(&s, &j0, &jet(-3.0, &[0.0, 0.0], SymMatrix::diag(&[2.0, 5.0])), None).unwrap();
        assert!((d - 5.0).abs() < 1e-9);
    }

    #[test]
    fn dual_of_psd_is_lambda_max() {
        let s = ConstraintSet::psd(3);
        let j = jet(0.3, &[1.0, 0.0, 0.0], SymMatrix::diag(&[-4.0, 0.5, 2.0]));
        let v = dual_canonical_eval(&s, &axis_i(3), &j, None).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_monotone_axis_is_a_structure_error() {
        // the margin r ≥ 0 never changes along (0, 0, I)
        let s = ConstraintSet::new(2, "r", |j: &Jet| j.r - 1.0);
        let e = canonical_eval(&s, &axis_i(2), &Jet::zero(2), None);
        assert!(matches!(e, Err(Error::Structure(_))));
    }

    #[test]
    fn axis_outside_cone_is_rejected() {
        let s = ConstraintSet::psd(2);
        let e = canonical_eval(&s, &Jet::zero(2), &Jet::zero(2), None);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn graphing_traceless() {
        let s = ConstraintSet::psd(2);
        let w0 = Hyperplane { normal: axis_i(2) };
        let a = jet(0.0, &[0.0, 0.0], SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]).unwrap());
        let g = graphing(&s, &axis_i(2), &w0, &a).unwrap();
        assert!((g + a.a.lambda_min()).abs() < 1e-9);
        assert!(g >= 0.0);
        let bdy = a.axpy(g, &axis_i(2));
        assert!(s.margin(&bdy).abs() <= 10.0 * RAY_TOL * (1.0 + a.norm()));
        assert!(graphing(&s, &axis_i(2), &w0, &Jet::zero(2)).unwrap().abs() <= RAY_TOL);
    }

    #[test]
    fn graphing_rejects_parallel_plane() {
        let s = ConstraintSet::psd(2);
        let w0 = Hyperplane { normal: jet(1.0, &[0.0, 0.0], SymMatrix::zeros(2)) };
        assert!(matches!(graphing(&s, &axis_i(2), &w0, &Jet::zero(2)), Err(Error::Geometry(_))));
    }

    #[test]
    fn seminorm_for_psd_cone() {
        let w0 = Hyperplane { normal: axis_i(2) };
        let a = jet(0.0, &[0.0, 0.0], SymMatrix::diag(&[3.0, -3.0]));
        let (plus, minus) = lipschitz_seminorm(&MonotonicityCone::m_p(), &axis_i(2), &w0, &a).unwrap();
        assert!((plus - 3.0).abs() < 1e-9 && (minus - 3.0).abs() < 1e-9);
        let (z, _) = lipschitz_seminorm(&MonotonicityCone::m_p(), &axis_i(2), &w0, &Jet::zero(2)).unwrap();
        assert!(z.abs() < 1e-9);
    }

    #[test]
    fn seminorm_rejects_boundary_normal() {
        // diag(1, 0) is on the relative boundary of P
        let w0 = Hyperplane { normal: jet(0.0, &[0.0, 0.0], SymMatrix::diag(&[1.0, 0.0])) };
        let a = jet(0.0, &[0.0, 0.0], SymMatrix::diag(&[0.0, 1.0]));
        let e = lipschitz_seminorm(&MonotonicityCone::m_p(), &axis_i(2), &w0, &a);
        assert!(matches!(e, Err(Error::Geometry(_))));
    }

    #[test]
    fn antipodal_family_is_not_pointed() {
        let v = jet(-1.0, &[1.0, 0.0], SymMatrix::identity(2));
        let w = jet(-1.0, &[-1.0, 0.0], SymMatrix::identity(2));
        // use an explicit axis that fails one member
        let p = pointedness_check(&LinearFamily::explicit(vec![v.clone(), w]), Some(&jet(0.0, &[1.0, 0.0], SymMatrix::zeros(2))))
            .unwrap();
        assert!(!p.pointed);
        assert_eq!(p.worst, vec![1]);
        let q = jet(0.0, &[1.0, 0.0], SymMatrix::zeros(2));
        let p = pointedness_check(&LinearFamily::explicit(vec![q.clone(), -&q]), None).unwrap();
        assert!(!p.pointed);
    }

    #[test]
    fn eigen_gradient_family_pointedness() {
        let r = 0.5;
        let f = eigen_gradient_family(2, r, 64).unwrap();
        let p = pointedness_check(&f, Some(&axis_i(2))).unwrap();
        let expect = 1.0 / (1.0 + 1.0 / (r * r)).sqrt();
        assert!((p.epsilon - expect).abs() < 1e-12);
    }

    #[test]
    fn drift_family_is_pointed() {
        // drifts in a cone around b0 = e1, volatilities in [0, I], discount c < 0
        let b0 = [1.0, 0.0];
        let mut members = Vec::new();
        let mut rng = sample::rng(3);
        let d = DirectionalCone::Circular { b: b0.to_vec(), theta: 0.6 };
        let eps_drift = (0.6f64).cos();
        for _ in 0..200 {
            let b = d.sample(&mut rng, 2, 1.0);
            let e = sample::psd(&mut rng, 2, 1.0);
            let c = -sample::uniform(&mut rng, 0.1, 2.0);
            members.push(Jet::from_parts(c, b, e));
        }
        let j0 = jet(-1.0, &b0, SymMatrix::identity(2));
        let p = pointedness_check(&LinearFamily::explicit(members.clone()), Some(&j0)).unwrap();
        assert!(p.pointed);
        for m in &members {
            assert!(m.dot(&j0) >= eps_drift * m.p.norm() - 1e-12);
        }
    }

    #[test]
    fn family_inf_sup_duality() {
        let f = eigen_gradient_family(2, 1.0, 256).unwrap();
        let j0 = axis_i(2);
        let mut rng = sample::rng(9);
        for _ in 0..20 {
            let j = sample::jet(&mut rng, 2);
            let s = family_op(&f, Mode::Sup, &j0, &j).unwrap();
            let i = family_op(&f, Mode::Inf, &j0, &-&j).unwrap();
            assert!((s + i).abs() < 1e-12);
        }
    }

    #[test]
    fn single_member_is_normalized_linear() {
        let m = jet(-2.0, &[1.0, 0.0], SymMatrix::identity(2));
        let j0 = jet(-1.0, &[0.0, 0.0], SymMatrix::identity(2));
        let f = LinearFamily::explicit(vec![m.clone()]);
        let j = jet(0.5, &[2.0, 1.0], SymMatrix::diag(&[1.0, 3.0]));
        let v = family_op(&f, Mode::Inf, &j0, &j).unwrap();
        assert!((v - m.dot(&j) / m.dot(&j0)).abs() < 1e-14);
    }

    #[test]
    fn sphere_grids_are_unit() {
        for n in [2, 3] {
            for v in sphere_grid(n, 100).unwrap() {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(sphere_grid(4, 10).is_err());
    }
}
