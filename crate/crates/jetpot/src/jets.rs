//! Jet arithmetic, symmetric eigenvalues, projections, radial and
//! finite-difference jets.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Relative symmetry tolerance, scaled by 1 + ‖A‖.
pub const SYM_TOL: f64 = 1e-9;

/// A real symmetric matrix. Construction symmetrizes (A + Aᵀ)/2.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Checks squareness and symmetry within `SYM_TOL·(1+‖A‖)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Precondition(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("matrix has non-finite entries".into()));
        }
        let tol = SYM_TOL * (1.0 + m.norm());
        let asym = (&m - m.transpose()).amax();
        if asym > tol {
            return Err(Error::Precondition(format!(
                "matrix is not symmetric (max |A_ij - A_ji| = {asym:.3e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking. Internal constructions that are
    /// symmetric up to roundoff go through here.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("ragged or non-square matrix".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        SymMatrix(DMatrix::identity(n, n) * s)
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// v ⊗ v
    pub fn outer(v: &Vector) -> Self {
        SymMatrix(v * v.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// tr(AB)
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    /// Ascending eigenvalues.
    pub fn eigs(&self) -> Vec<f64> {
        self.eigen().0
    }

    /// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.dim();
        if n == 0 {
            return (Vec::new(), DMatrix::zeros(0, 0));
        }
        let se = SymmetricEigen::new(self.0.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigs().first().copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigs().last().copied().unwrap_or(0.0)
    }

    /// Q diag(λ) Qᵀ
    pub fn from_spectrum(q: &DMatrix<f64>, lambda: &[f64]) -> Self {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(lambda));
        Self::symmetrized(q * d * q.transpose())
    }

    /// Upper-left k×k block.
    pub fn leading_block(&self, k: usize) -> SymMatrix {
        SymMatrix(self.0.view((0, 0), (k, k)).into_owned())
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, o: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &o.0)
    }
}
impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, o: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &o.0)
    }
}
impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-&self.0)
    }
}
impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }
}

/// Ascending eigenvalues of a dense matrix that must be symmetric within
/// tolerance.
pub fn sym_eigs(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(SymMatrix::new(a.clone())?.eigs())
}

/// A 2-jet (r, p, A).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetRepr", into = "JetRepr")]
pub struct Jet {
    pub r: f64,
    pub p: Vector,
    pub a: SymMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetRepr {
    r: f64,
    p: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

impl TryFrom<JetRepr> for Jet {
    type Error = Error;
    fn try_from(j: JetRepr) -> Result<Jet> {
        Jet::new(j.r, Vector::from_vec(j.p), SymMatrix::from_rows(&j.a)?)
    }
}

impl From<Jet> for JetRepr {
    fn from(j: Jet) -> JetRepr {
        JetRepr {
            r: j.r,
            p: j.p.iter().copied().collect(),
            a: j.a.rows(),
        }
    }
}

impl Jet {
    pub fn new(r: f64, p: Vector, a: SymMatrix) -> Result<Self> {
        if p.len() != a.dim() {
            return Err(Error::Precondition(format!(
                "gradient has length {} but Hessian is {}x{}",
                p.len(),
                a.dim(),
                a.dim()
            )));
        }
        Ok(Jet { r, p, a })
    }

    /// Unchecked constructor for internal use where dimensions agree by
    /// construction.
    pub fn from_parts(r: f64, p: Vector, a: SymMatrix) -> Self {
        debug_assert_eq!(p.len(), a.dim());
        Jet { r, p, a }
    }

    pub fn from_slices(r: f64, p: &[f64], a: SymMatrix) -> Result<Self> {
        Self::new(r, Vector::from_column_slice(p), a)
    }

    pub fn zero(n: usize) -> Self {
        Jet::from_parts(0.0, Vector::zeros(n), SymMatrix::zeros(n))
    }

    /// (0, 0, I), the default axis for pure second order sets.
    pub fn identity_axis(n: usize) -> Self {
        Jet::from_parts(0.0, Vector::zeros(n), SymMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// ⟨J, K⟩ = rs + ⟨p, q⟩ + tr(AB)
    pub fn dot(&self, o: &Jet) -> f64 {
        self.r * o.r + self.p.dot(&o.p) + self.a.inner(&o.a)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Jet {
        self * s
    }

    /// self + t·other
    pub fn axpy(&self, t: f64, other: &Jet) -> Jet {
        Jet::from_parts(
            self.r + t * other.r,
            &self.p + &other.p * t,
            SymMatrix(&self.a.0 + &other.a.0 * t),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.p.iter().all(|v| v.is_finite()) && self.a.0.iter().all(|v| v.is_finite())
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet::from_parts(self.r + o.r, &self.p + &o.p, &self.a + &o.a)
    }
}
impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet::from_parts(self.r - o.r, &self.p - &o.p, &self.a - &o.a)
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::from_parts(-self.r, -&self.p, -&self.a)
    }
}
impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet::from_parts(self.r * s, &self.p * s, &self.a * s)
    }
}

/// (P_x, P_x⊥): projections onto the line through x and its complement.
pub fn projections(x: &Vector) -> Result<(SymMatrix, SymMatrix)> {
    let nx2 = x.norm_squared();
    if !(nx2 > 0.0) || !nx2.is_finite() {
        return Err(Error::Domain("projection onto the line through x needs x != 0".into()));
    }
    let px = SymMatrix::symmetrized(x * x.transpose() / nx2);
    let perp = &SymMatrix::identity(x.len()) - &px;
    Ok((px, perp))
}

type Profile = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// ψ together with ψ′ and ψ″, for radial functions u(x) = ψ(|x|).
pub struct RadialProfile {
    psi: Profile,
    d1: Profile,
    d2: Profile,
}

impl RadialProfile {
    pub fn new(
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialProfile {
            psi: Box::new(psi),
            d1: Box::new(d1),
            d2: Box::new(d2),
        }
    }

    /// (ψ(t), ψ′(t), ψ″(t))
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        ((self.psi)(t), (self.d1)(t), (self.d2)(t))
    }
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RadialProfile")
    }
}

/// Jet of x ↦ ψ(|x|): (ψ, ψ′ x/|x|, (ψ′/|x|) P_x⊥ + ψ″ P_x).
pub fn radial_jet(profile: &RadialProfile, x: &Vector) -> Result<Jet> {
    let t = x.norm();
    if !(t > 0.0) {
        return Err(Error::Domain("radial jet is singular at the origin".into()));
    }
    let (v, d1, d2) = profile.eval(t);
    if !(v.is_finite() && d1.is_finite() && d2.is_finite()) {
        return Err(Error::Evaluation(format!("profile not finite at t = {t}")));
    }
    let (px, perp) = projections(x)?;
    let a = &(&perp * (d1 / t)) + &(&px * d2);
    Ok(Jet::from_parts(v, x * (d1 / t), a))
}

/// Default central-difference step h = 1e-4·(1+|x|).
pub fn default_fd_step(x: &Vector) -> f64 {
    1e-4 * (1.0 + x.norm())
}

/// Central-difference jet of f at x. The Hessian is symmetrized.
pub fn fd_jet(f: impl Fn(&Vector) -> f64, x: &Vector, h: Option<f64>) -> Result<Jet> {
    let h = h.unwrap_or_else(|| default_fd_step(x));
    if !(h > 0.0) {
        return Err(Error::Precondition("finite-difference step must be positive".into()));
    }
    let n = x.len();
    let eval = |y: &Vector| -> Result<f64> {
        let v = f(y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("non-finite sample at {:?}", y.as_slice())))
        }
    };
    let shifted = |d: &[(usize, f64)]| {
        let mut y = x.clone();
        for &(i, s) in d {
            y[i] += s;
        }
        y
    };
    let f0 = eval(x)?;
    let mut p = Vector::zeros(n);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = eval(&shifted(&[(i, h)]))?;
        let fm = eval(&shifted(&[(i, -h)]))?;
        p[i] = (fp - fm) / (2.0 * h);
        a[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let fpp = eval(&shifted(&[(i, h), (j, h)]))?;
            let fpm = eval(&shifted(&[(i, h), (j, -h)]))?;
            let fmp = eval(&shifted(&[(i, -h), (j, h)]))?;
            let fmm = eval(&shifted(&[(i, -h), (j, -h)]))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(Jet::from_parts(f0, p, SymMatrix::symmetrized(a)))
}

/// The quadratic Q_J(y) = r + ⟨p, y−x⟩ + ½⟨A(y−x), y−x⟩ with jet J at x.
pub fn quadratic(j: &Jet, x: &Vector, y: &Vector) -> f64 {
    let d = y - x;
    j.r + j.p.dot(&d) + 0.5 * d.dot(&(j.a.matrix() * &d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_and_diagonal_eigs() {
        assert!(close(&SymMatrix::identity(3).eigs(), &[1.0, 1.0, 1.0], 1e-14));
        assert!(close(&SymMatrix::diag(&[3.0, -1.0, 2.0]).eigs(), &[-1.0, 2.0, 3.0], 1e-14));
    }

    #[test]
    fn rejects_non_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eigs(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn projections_of_e1_and_diagonal() {
        let (px, perp) = projections(&Vector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(px, SymMatrix::diag(&[1.0, 0.0]));
        assert_eq!(perp, SymMatrix::diag(&[0.0, 1.0]));
        let (px, _) = projections(&Vector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!(px.matrix().iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!(projections(&Vector::zeros(2)).is_err());
    }

    #[test]
    fn radial_quadratic_and_cone() {
        let x = Vector::from_vec(vec![0.3, -1.2, 0.5]);
        let quad = RadialProfile::new(|t| t * t / 2.0, |t| t, |_| 1.0);
        let j = radial_jet(&quad, &x).unwrap();
        assert!((j.r - x.norm_squared() / 2.0).abs() < 1e-14);
        assert!((&j.p - &x).amax() < 1e-14);
        assert!((j.a.matrix() - DMatrix::identity(3, 3)).amax() < 1e-14);

        let cone = RadialProfile::new(|t| t, |_| 1.0, |_| 0.0);
        let e = Vector::from_vec(vec![0.0, 1.0, 0.0]);
        let j = radial_jet(&cone, &e).unwrap();
        let (_, perp) = projections(&e).unwrap();
        assert!((j.a.matrix() - perp.matrix()).amax() < 1e-14);
        assert!(radial_jet(&cone, &Vector::zeros(3)).is_err());
    }

    #[test]
    fn fd_exact_on_quadratics() {
        let a = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, -1.0]]).unwrap();
        let j = Jet::from_slices(0.7, &[1.0, -2.0], a).unwrap();
        let x = Vector::from_vec(vec![0.4, 0.1]);
        let got = fd_jet(|y| quadratic(&j, &x, y), &x, Some(1e-2)).unwrap();
        assert!((got.r - j.r).abs() < 1e-12);
        assert!((&got.p - &j.p).amax() < 1e-10);
        assert!((got.a.matrix() - j.a.matrix()).amax() < 1e-8);
    }

    #[test]
    fn fd_sine() {
        let got = fd_jet(|y| y[0].sin(), &Vector::zeros(2), Some(1e-3)).unwrap();
        assert!(got.r.abs() < 1e-12);
        assert!((got.p[0] - 1.0).abs() < 1e-6 && got.p[1].abs() < 1e-12);
        assert!(got.a.matrix().amax() < 1e-6);
    }

    #[test]
    fn fd_reports_non_finite() {
        let r = fd_jet(|y| 1.0 / y[0], &Vector::from_vec(vec![0.0]), Some(1e-3));
        assert!(matches!(r, Err(Error::Evaluation(_))));
    }

    #[test]
    fn jet_json_round_trip() {
        let j = Jet::from_slices(1.5, &[0.0, 2.0], SymMatrix::diag(&[1.0, -3.0])).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(s, r#"{"r":1.5,"p":[0.0,2.0],"A":[[1.0,0.0],[0.0,-3.0]]}"#);
        let back: Jet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
        assert!(serde_json::from_str::<Jet>(r#"{"r":0,"p":[1],"A":[[1,2],[3,4]]}"#).is_err());
    }
}
