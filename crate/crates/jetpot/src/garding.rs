//! Gårding–Dirichlet polynomials and their eigenvalues.
//!
//! Eigenvalues are extracted from the evaluation oracle alone: t ↦ g(X + tE)
//! is sampled at Chebyshev nodes, fitted as a monic polynomial and solved
//! with a companion matrix. Closed forms are never consulted, so the same
//! path serves det, σ_k, τ_k, lifts, derived polynomials and user oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::jets::{Jet, SymMatrix};
use crate::report::VerificationReport;
use crate::sample;

/// Imaginary parts above this multiple of the sampling scale s mean the
/// polynomial is not hyperbolic at the input.
pub const IMAG_TOL: f64 = 1e-6;

/// Largest imaginary part (relative to s) tolerated inside a group of k
/// roots that came from one real k-fold root. A k-fold root moves by about
/// ε^{1/k} under an ε perturbation of the coefficients, so multiplicity
/// three and up genuinely needs more room than `IMAG_TOL`. The group
/// centroid stays accurate regardless.
pub fn split_allowance(k: usize) -> f64 {
    if k <= 1 {
        IMAG_TOL
    } else {
        IMAG_TOL.max(10.0 * 1e-14f64.powf(1.0 / k as f64))
    }
}

/// Gap (in the rescaled root variable) below which adjacent real roots are
/// one multiple root.
const REAL_MERGE: f64 = 1e-7;

/// Perturbation of the constant coefficient used when the unperturbed
/// companion matrix is exactly nilpotent-like and QR makes no progress.
const NUDGE: f64 = 1e-14;

/// Argument of a polynomial: (r, A). Pure second order polynomials ignore r.
#[derive(Clone, Debug, PartialEq)]
pub struct GArg {
    pub r: f64,
    pub a: SymMatrix,
}

impl GArg {
    pub fn pure(a: SymMatrix) -> Self {
        GArg { r: 0.0, a }
    }

    pub fn lifted(r: f64, a: SymMatrix) -> Self {
        GArg { r, a }
    }

    pub fn from_jet(j: &Jet) -> Self {
        GArg { r: j.r, a: j.a.clone() }
    }

    pub fn norm(&self) -> f64 {
        (self.r * self.r + self.a.norm().powi(2)).sqrt()
    }

    /// self + t·e
    pub fn axpy(&self, t: f64, e: &GArg) -> GArg {
        GArg { r: self.r + t * e.r, a: &self.a + &(&e.a * t) }
    }
}

type Oracle = Arc<dyn Fn(&SymMatrix) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Det,
    Sigma(usize),
    Tau(usize),
    Oracle(Oracle),
    /// Catalogued by name only.
    LagrangianMA,
    Lifted(Box<GardingPolynomial>),
    /// σ_{m−k}(λ^g): the k-th derivative in the direction I.
    DerivedI(Box<GardingPolynomial>, usize),
    /// Π over k-subsets of sums of λ^g.
    DerivedII(Box<GardingPolynomial>, usize),
    /// Π (λ_j^g + ε Σ λ^g)
    DerivedIII(Box<GardingPolynomial>, f64),
}

/// Which derived construction to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Construction {
    I(usize),
    II(usize),
    III(f64),
}

/// A hyperbolic polynomial normalized so that g(E) = 1 for its direction E.
#[derive(Clone)]
pub struct GardingPolynomial {
    kind: Kind,
    name: String,
    n: usize,
    m: usize,
    scale: f64,
}

impl fmt::Debug for GardingPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GardingPolynomial({}, n={}, m={})", self.name, self.n, self.m)
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Elementary symmetric polynomial σ_k of `x`.
pub fn elementary(x: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in x {
        for j in (1..=k.min(x.len())).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

/// Π over k-subsets S of Σ_{i∈S} x_i.
pub fn subset_sum_product(x: &[f64], k: usize) -> f64 {
    fn rec(x: &[f64], k: usize, start: usize, acc: f64, out: &mut f64) {
        if k == 0 {
            *out *= acc;
            return;
        }
        for i in start..=x.len() - k {
            rec(x, k - 1, i + 1, acc + x[i], out);
        }
    }
    let mut out = 1.0;
    rec(x, k, 0, 0.0, &mut out);
    out
}

impl GardingPolynomial {
    fn build(kind: Kind, name: String, n: usize, m: usize) -> Result<Self> {
        let mut g = GardingPolynomial { kind, name, n, m, scale: 1.0 };
        if matches!(g.kind, Kind::LagrangianMA) {
            return Ok(g);
        }
        let raw = g.eval_raw(&g.direction())?;
        if !(raw.is_finite() && raw != 0.0) {
            return Err(Error::Precondition(format!("{} vanishes in its hyperbolicity direction", g.name)));
        }
        g.scale = 1.0 / raw;
        Ok(g)
    }

    pub fn det(n: usize) -> Self {
        Self::build(Kind::Det, "det".into(), n, n).expect("det(I) = 1")
    }

    /// σ_k(λ(A)) / C(n, k): the k-Hessian.
    pub fn sigma(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Precondition(format!("sigma_k needs 1 ≤ k ≤ n = {n}, got {k}")));
        }
        Self::build(Kind::Sigma(k), format!("sigma_{k}"), n, k)
    }

    /// T_k(A) = Π (λ_{i1} + ⋯ + λ_{ik}), normalized.
    pub fn tau(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Precondition(format!("tau_k needs 1 ≤ k ≤ n = {n}, got {k}")));
        }
        Self::build(Kind::Tau(k), format!("tau_{k}"), n, binom(n, k))
    }

    /// A user polynomial of degree m on S(n), assumed I-hyperbolic. Every
    /// eigenvalue extraction checks that assumption at its input.
    pub fn oracle(
        name: &str,
        n: usize,
        m: usize,
        f: impl Fn(&SymMatrix) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("degree must be positive".into()));
        }
        Self::build(Kind::Oracle(Arc::new(f)), name.into(), n, m)
    }

    /// The Lagrangian Monge–Ampère polynomial is listed by name only.
    pub fn lagrangian_monge_ampere(n: usize) -> Self {
        GardingPolynomial { kind: Kind::LagrangianMA, name: "lagrangian_ma".into(), n, m: 1 << n, scale: 1.0 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn is_lifted(&self) -> bool {
        match &self.kind {
            Kind::Lifted(_) => true,
            Kind::DerivedI(b, _) | Kind::DerivedII(b, _) => b.is_lifted(),
            Kind::DerivedIII(b, _) => b.is_lifted(),
            _ => false,
        }
    }

    /// I for pure second order polynomials, (−½, ½I) after a lift.
    pub fn direction(&self) -> GArg {
        if self.is_lifted() {
            GArg::lifted(-0.5, SymMatrix::scalar(self.n, 0.5))
        } else {
            GArg::pure(SymMatrix::identity(self.n))
        }
    }

    fn eval_raw(&self, x: &GArg) -> Result<f64> {
        if x.a.dim() != self.n {
            return Err(Error::Precondition(format!("{} is defined on S({}), got S({})", self.name, self.n, x.a.dim())));
        }
        Ok(match &self.kind {
            Kind::Det => x.a.matrix().clone().determinant(),
            Kind::Sigma(k) => elementary(&x.a.eigs(), *k),
            Kind::Tau(k) => subset_sum_product(&x.a.eigs(), *k),
            Kind::Oracle(f) => f(&x.a),
            Kind::LagrangianMA => {
                return Err(Error::Capability("the Lagrangian Monge–Ampère operator is catalogued by name only".into()))
            }
            Kind::Lifted(g) => g.eval(&GArg::pure(&x.a - &SymMatrix::scalar(self.n, x.r)))?,
            Kind::DerivedI(g, k) => elementary(&garding_eigs(g, x)?, g.m - k),
            Kind::DerivedII(g, k) => subset_sum_product(&garding_eigs(g, x)?, *k),
            Kind::DerivedIII(g, eps) => {
                let lam = garding_eigs(g, x)?;
                let s: f64 = lam.iter().sum();
                lam.iter().map(|l| l + eps * s).product()
            }
        })
    }

    /// Normalized value.
    pub fn eval(&self, x: &GArg) -> Result<f64> {
        Ok(self.scale * self.eval_raw(x)?)
    }
}

/// Gårding eigenvalues λ₁ ≤ … ≤ λ_m: the negatives of the roots of
/// t ↦ g(X + tE).
pub fn garding_eigs(g: &GardingPolynomial, x: &GArg) -> Result<Vec<f64>> {
    let m = g.m;
    let e = g.direction();
    let s = 2.0 * (1.0 + x.norm());
    let nodes: Vec<f64> = (0..=m)
        .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * (m + 1)) as f64).cos())
        .collect();
    // q(u) = g(X + s·u·E)/s^m is monic in u
    let sm = s.powi(m as i32);
    let mut vals = Vec::with_capacity(m + 1);
    for &u in &nodes {
        vals.push(g.eval(&x.axpy(s * u, &e))? / sm);
    }
    let vand = DMatrix::from_fn(m + 1, m, |i, j| nodes[i].powi(j as i32));
    let rhs = DVector::from_fn(m + 1, |i, _| vals[i] - nodes[i].powi(m as i32));
    let coef = vand
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Evaluation(format!("coefficient fit failed: {e}")))?;
    let mut comp = DMatrix::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        comp[(i, m - 1)] = -coef[i];
    }
    let z = match Schur::try_new(comp.clone(), f64::EPSILON, 10_000) {
        Some(sch) => sch.complex_eigenvalues(),
        None => {
            // e.g. q(u) = u^m at X = 0, where every shift is already exact
            comp[(0, m - 1)] -= NUDGE;
            Schur::try_new(comp, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::Evaluation(format!("{}: companion eigenvalues did not converge", g.name)))?
                .complex_eigenvalues()
        }
    };
    let mut roots: Vec<(f64, f64)> = z.iter().map(|c| (c.re, c.im)).collect();
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Perturbed k-fold roots split into a small circle of complex roots.
    // Each complex root pulls in everything within 3|Im| of it; groups are
    // replaced by their centroid.
    let k = roots.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..k {
        if roots[i].1.abs() > IMAG_TOL {
            for j in 0..k {
                if j != i && dist(roots[i], roots[j]) <= 3.0 * roots[i].1.abs() {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
    }
    // a double root can also split along the real axis, by O(√ε) ≈ 1.5e-8
    for i in 1..k {
        if roots[i].1.abs() <= IMAG_TOL && roots[i - 1].1.abs() <= IMAG_TOL && roots[i].0 - roots[i - 1].0 <= REAL_MERGE {
            let (a, b) = (find(&mut parent, i), find(&mut parent, i - 1));
            parent[a] = b;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for i in 0..k {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(m);
    for grp in &groups {
        let size = grp.len();
        let re = grp.iter().map(|&i| roots[i].0).sum::<f64>() / size as f64;
        let im = grp.iter().map(|&i| roots[i].1).sum::<f64>() / size as f64;
        let spread = grp.iter().map(|&i| roots[i].1.abs()).fold(0.0f64, f64::max);
        if im.abs() > IMAG_TOL || spread > split_allowance(size) {
            return Err(Error::Hyperbolicity(format!(
                "{}: t ↦ g(X + tE) has a complex root {:.6e} {:+.6e}i",
                g.name,
                s * re,
                s * spread
            )));
        }
        out.push((re, size));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let h = |t: f64| g.eval(&x.axpy(t, &e)).unwrap_or(f64::NAN);
    let mut lam: Vec<f64> = Vec::with_capacity(m);
    for (re, size) in out {
        let mut t = s * re;
        if size == 1 {
            t = polish(&h, t, s);
        }
        lam.extend(std::iter::repeat_n(-t, size));
    }
    lam.sort_by(f64::total_cmp);
    Ok(lam)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// A few guarded Newton steps on the oracle itself for a simple root.
fn polish(h: &impl Fn(f64) -> f64, t0: f64, s: f64) -> f64 {
    let mut t = t0;
    let mut ht = h(t);
    let d = 1e-6 * s;
    for _ in 0..3 {
        if ht == 0.0 || !ht.is_finite() {
            break;
        }
        let dh = (h(t + d) - h(t - d)) / (2.0 * d);
        if dh == 0.0 || !dh.is_finite() {
            break;
        }
        let cand = t - ht / dh;
        if (cand - t0).abs() > 1e-3 * s {
            break;
        }
        let hc = h(cand);
        if hc.abs() < ht.abs() {
            t = cand;
            ht = hc;
        } else {
            break;
        }
    }
    t
}

/// λ_k^g(X), k = 1..m. Branch Λ_k = {λ_k^g ≥ 0}.
pub fn branch_margin(g: &GardingPolynomial, k: usize, x: &GArg) -> Result<f64> {
    if k == 0 || k > g.m {
        return Err(Error::Precondition(format!("branch index must be in 1..={}, got {k}", g.m)));
    }
    Ok(garding_eigs(g, x)?[k - 1])
}

/// g̃(r, A) = g(A − rI) on ℝ × S(n), with eigenvalues λ_k^g(A) − r.
pub fn lift_gradient_free(g: &GardingPolynomial) -> Result<GardingPolynomial> {
    if g.is_lifted() {
        return Err(Error::Precondition("polynomial is already defined on ℝ × S(n)".into()));
    }
    GardingPolynomial::build(Kind::Lifted(Box::new(g.clone())), format!("lifted:{}", g.name), g.n, g.m)
}

pub fn derive(g: &GardingPolynomial, c: Construction) -> Result<GardingPolynomial> {
    let base = Box::new(g.clone());
    match c {
        Construction::I(k) => {
            if k >= g.m {
                return Err(Error::Precondition(format!("construction I needs k < m = {}, got {k}", g.m)));
            }
            GardingPolynomial::build(Kind::DerivedI(base, k), format!("derived:I:{k}:{}", g.name), g.n, g.m - k)
        }
        Construction::II(k) => {
            if k == 0 || k > g.m {
                return Err(Error::Precondition(format!("construction II needs 1 ≤ k ≤ m = {}, got {k}", g.m)));
            }
            GardingPolynomial::build(Kind::DerivedII(base, k), format!("derived:II:{k}:{}", g.name), g.n, binom(g.m, k))
        }
        Construction::III(eps) => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Precondition(format!("construction III needs ε > 0, got {eps}")));
            }
            GardingPolynomial::build(Kind::DerivedIII(base, eps), format!("derived:III:{eps}:{}", g.name), g.n, g.m)
        }
    }
}

/// Parses det, sigma_k, tau_k, lifted:<name>, derived:<I|II|III>:<param>[:<base>],
/// lagrangian_ma.
pub fn by_name(name: &str, n: usize) -> Result<GardingPolynomial> {
    let idx = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::UnknownName(format!("bad index in '{name}'")))
    };
    if name == "det" {
        return Ok(GardingPolynomial::det(n));
    }
    if name == "lagrangian_ma" {
        return Ok(GardingPolynomial::lagrangian_monge_ampere(n));
    }
    if let Some(k) = name.strip_prefix("sigma_") {
        return GardingPolynomial::sigma(n, idx(k)?);
    }
    if let Some(k) = name.strip_prefix("tau_") {
        return GardingPolynomial::tau(n, idx(k)?);
    }
    if let Some(rest) = name.strip_prefix("lifted:") {
        return lift_gradient_free(&by_name(rest, n)?);
    }
    if let Some(rest) = name.strip_prefix("derived:") {
        let mut parts = rest.splitn(3, ':');
        let which = parts.next().unwrap_or("");
        let param = parts.next().ok_or_else(|| Error::UnknownName(format!("'{name}' needs a parameter")))?;
        let base = by_name(parts.next().unwrap_or("det"), n)?;
        let c = match which {
            "I" => Construction::I(idx(param)?),
            "II" => Construction::II(idx(param)?),
            "III" => Construction::III(
                param.parse().map_err(|_| Error::UnknownName(format!("bad ε in '{name}'")))?,
            ),
            _ => return Err(Error::UnknownName(format!("unknown construction in '{name}'"))),
        };
        return derive(&base, c);
    }
    Err(Error::UnknownName(format!("unknown polynomial '{name}'")))
}

/// Random argument in the polynomial's domain.
pub fn sample_arg(g: &GardingPolynomial, rng: &mut sample::JetRng) -> GArg {
    let a = { let s = sample::magnitude(rng); sample::symmetric(rng, g.n, s) };
    let r = if g.is_lifted() { sample::magnitude(rng) * sample::uniform(rng, -1.0, 1.0) } else { 0.0 };
    GArg { r, a }
}

/// Random element of the open Gårding cone Γ: C shifted so λ₁^g = 0, plus εE.
pub fn sample_gamma(g: &GardingPolynomial, rng: &mut sample::JetRng) -> Result<GArg> {
    let c = sample_arg(g, rng);
    let l1 = garding_eigs(g, &c)?[0];
    let eps = sample::magnitude(rng) * sample::uniform(rng, 0.05, 1.0);
    Ok(c.axpy(eps - l1, &g.direction()))
}

/// Sampled check that λ_k^g(A + B) > λ_k^g(A) for B ∈ Γ and every k.
pub fn strict_monotone_check(g: &GardingPolynomial, samples: usize, seed: u64) -> VerificationReport {
    let mut rng = sample::rng(seed);
    let mut rep = VerificationReport::new(seed);
    for _ in 0..samples {
        let a = sample_arg(g, &mut rng);
        let b = match sample_gamma(g, &mut rng) {
            Ok(b) => b,
            Err(e) => {
                rep.fail();
                rep.note(e.to_string());
                continue;
            }
        };
        let ab = GArg { r: a.r + b.r, a: &a.a + &b.a };
        match (garding_eigs(g, &a), garding_eigs(g, &ab)) {
            (Ok(la), Ok(lab)) => {
                let margin = la.iter().zip(&lab).map(|(x, y)| y - x).fold(f64::INFINITY, f64::min);
                let jet = Jet::from_parts(ab.r, crate::jets::Vector::zeros(g.n), ab.a.clone());
                rep.observe(margin, Some(&jet), None);
                if !(margin > 0.0) {
                    rep.fail();
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                rep.fail();
                rep.note(e.to_string());
            }
        }
    }
    rep
}
