//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Everything is Hermitian here, so kernels, supports and intersections all go
//! through a Hermitian eigendecomposition. Subspaces are compared through
//! their orthogonal projectors, never through their bases.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Numerical thresholds. Every report echoes the values it was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `max |M - M^dagger|`.
    pub herm: f64,
    /// Most negative eigenvalue still accepted as PSD.
    pub psd: f64,
    /// `|tr(rho) - 1|`.
    pub trace: f64,
    /// Orthonormality of subspace bases.
    pub orth: f64,
    /// `max |sum A_i - I|`.
    pub povm: f64,
    /// Absolute threshold for "tr(rho A) = 0".
    pub zero: f64,
    /// Projector distance for subspace equality and containment; also the
    /// eigenvalue threshold in [`intersect`].
    pub subspace: f64,
    /// Relative eigenvalue threshold (`lambda <= kernel * lambda_max`) for
    /// kernels and supports.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(1e-9)
    }
}

impl Tolerances {
    pub fn uniform(eps: f64) -> Self {
        Self {
            herm: eps,
            psd: eps,
            trace: eps,
            orth: eps,
            povm: eps,
            zero: eps,
            subspace: eps,
            kernel: eps,
        }
    }
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Eigenpairs of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    if d == 0 {
        return (vec![], CMatrix::zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn columns(vectors: &CMatrix, keep: impl Fn(usize) -> bool) -> CMatrix {
    let idx: Vec<usize> = (0..vectors.ncols()).filter(|&c| keep(c)).collect();
    CMatrix::from_fn(vectors.nrows(), idx.len(), |r, c| vectors[(r, idx[c])])
}

/// Span of eigenvectors of a PSD operator with eigenvalue `<= rel * lambda_max`.
pub fn psd_kernel(m: &CMatrix, rel: f64) -> Subspace {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    Subspace::from_orthonormal(columns(&vecs, |c| vals[c] <= rel * top))
}

/// Orthogonal complement of [`psd_kernel`].
pub fn psd_support(m: &CMatrix, rel: f64) -> Subspace {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    Subspace::from_orthonormal(columns(&vecs, |c| vals[c] > rel * top))
}

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::domain(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("density matrix has non-finite entries"));
        }
        let herm = hermitian_deviation(&m);
        if herm > tol.herm {
            return Err(Error::domain(format!("not Hermitian: deviation {herm:e}")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::domain(format!("trace {tr} is not 1")));
        }
        let (vals, _) = hermitian_eigen(&m);
        if vals[0] < -tol.psd {
            return Err(Error::domain(format!("not PSD: min eigenvalue {:e}", vals[0])));
        }
        Ok(Self(m))
    }

    pub fn pure(v: &CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("state vector has norm {n}")));
        }
        Ok(Self(outer(v)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d).unscale(d as f64))
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.0).0
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(kron(&self.0, &other.0))
    }
}

/// `rho^perp = ker(rho)`: eigenvectors with eigenvalue `<= tol.kernel * lambda_max`.
pub fn kernel(rho: &DensityMatrix, tol: &Tolerances) -> Subspace {
    psd_kernel(rho.matrix(), tol.kernel)
}

pub fn support(rho: &DensityMatrix, tol: &Tolerances) -> Subspace {
    psd_support(rho.matrix(), tol.kernel)
}

/// A linear subspace given by a `d x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn zero(d: usize) -> Self {
        Self {
            basis: CMatrix::zeros(d, 0),
        }
    }

    pub fn full(d: usize) -> Self {
        Self { basis: identity(d) }
    }

    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Self { basis }
    }

    /// Checked constructor for a basis claimed to be orthonormal.
    pub fn from_basis(basis: CMatrix, tol: &Tolerances) -> Result<Self> {
        let r = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let dev = max_abs(&(gram - identity(r)));
        if dev > tol.orth {
            return Err(Error::domain(format!("basis columns not orthonormal: deviation {dev:e}")));
        }
        Ok(Self { basis })
    }

    /// Span of arbitrary vectors of ambient dimension `d`.
    pub fn span(d: usize, vectors: &[CVector], tol: &Tolerances) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::domain(format!("vector of length {} in ambient dimension {d}", v.len())));
        }
        let mut gram = CMatrix::zeros(d, d);
        for v in vectors {
            gram += outer(v);
        }
        Ok(psd_support(&gram, tol.kernel))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// `max |P_a - P_b|`; infinite for mismatched ambient dimensions.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim() != other.ambient_dim() {
            return f64::INFINITY;
        }
        max_abs(&(self.projector() - other.projector()))
    }

    pub fn approx_eq(&self, other: &Subspace, tol: &Tolerances) -> bool {
        self.rank() == other.rank() && self.distance(other) <= tol.subspace
    }

    /// `other <= self`, tested as `P_self P_other = P_other`.
    pub fn contains(&self, other: &Subspace, tol: &Tolerances) -> bool {
        if self.ambient_dim() != other.ambient_dim() {
            return false;
        }
        if other.is_zero() {
            return true;
        }
        let po = other.projector();
        max_abs(&(self.projector() * &po - &po)) <= tol.subspace
    }

    pub fn complement(&self, tol: &Tolerances) -> Subspace {
        let d = self.ambient_dim();
        psd_support(&(identity(d) - self.projector()), tol.kernel)
    }

    /// `self + other`.
    pub fn sum(&self, other: &Subspace, tol: &Tolerances) -> Result<Subspace> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::domain("subspace sum across different ambient dimensions"));
        }
        Ok(psd_support(&(self.projector() + other.projector()), tol.kernel))
    }
}

/// `a ∩ b` as the kernel of `(I - P_a) + (I - P_b)`: a vector lies in both
/// subspaces iff both complement projections annihilate it.
pub fn intersect(a: &Subspace, b: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let d = a.ambient_dim();
    if d != b.ambient_dim() {
        return Err(Error::domain(format!(
            "intersection of subspaces in dimensions {d} and {}",
            b.ambient_dim()
        )));
    }
    if a.is_zero() {
        return Ok(a.clone());
    }
    if b.is_zero() {
        return Ok(b.clone());
    }
    let m = identity(d).scale(2.0) - a.projector() - b.projector();
    let (vals, vecs) = hermitian_eigen(&m);
    Ok(Subspace::from_orthonormal(columns(&vecs, |c| vals[c] <= tol.subspace)))
}

/// A finite list of positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcomes: Vec<CMatrix>,
}

impl Povm {
    /// Only shapes are checked here; see [`validate_povm`] for the rest.
    pub fn new(outcomes: Vec<CMatrix>) -> Result<Self> {
        let d = outcomes
            .first()
            .ok_or_else(|| Error::domain("a POVM needs at least one outcome"))?
            .nrows();
        if outcomes.iter().any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(Error::domain("POVM outcomes must all be square of the same dimension"));
        }
        Ok(Self { outcomes })
    }

    pub fn from_subspaces(subspaces: &[Subspace]) -> Result<Self> {
        Self::new(subspaces.iter().map(Subspace::projector).collect())
    }

    pub fn trivial(d: usize) -> Self {
        Self {
            outcomes: vec![identity(d)],
        }
    }

    pub fn outcomes(&self) -> &[CMatrix] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].nrows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmValidation {
    pub outcomes: usize,
    pub dim: usize,
    pub max_hermitian_deviation: f64,
    pub min_eigenvalues: Vec<f64>,
    pub completeness_deviation: f64,
    pub hermitian: bool,
    pub positive: bool,
    pub complete: bool,
    pub passed: bool,
    pub tolerances: Tolerances,
}

pub fn validate_povm(p: &Povm, tol: &Tolerances) -> PovmValidation {
    let d = p.dim();
    let max_herm = p
        .outcomes
        .iter()
        .map(hermitian_deviation)
        .fold(0.0, f64::max);
    let min_eigs: Vec<f64> = p
        .outcomes
        .iter()
        .map(|a| hermitian_eigen(a).0.first().copied().unwrap_or(0.0))
        .collect();
    let total = p.outcomes.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a);
    let completeness = max_abs(&(total - identity(d)));
    let hermitian = max_herm <= tol.herm;
    let positive = min_eigs.iter().all(|&e| e >= -tol.psd);
    let complete = completeness <= tol.povm;
    PovmValidation {
        outcomes: p.len(),
        dim: d,
        max_hermitian_deviation: max_herm,
        min_eigenvalues: min_eigs,
        completeness_deviation: completeness,
        hermitian,
        positive,
        complete,
        passed: hermitian && positive && complete,
        tolerances: *tol,
    }
}

/// `Re tr(rho a)`; the imaginary part must vanish to within `tol.herm`.
pub fn outcome_probability(rho: &DensityMatrix, a: &CMatrix, tol: &Tolerances) -> Result<f64> {
    let r = rho.matrix();
    if a.nrows() != r.nrows() || a.ncols() != r.ncols() {
        return Err(Error::domain(format!(
            "state of dimension {} measured with a {}x{} operator",
            r.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    // tr(rho a) = sum_ij rho_ij a_ji
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            acc += r[(i, j)] * a[(j, i)];
        }
    }
    if acc.im.abs() > tol.herm {
        return Err(Error::domain(format!("tr(rho A) has imaginary part {:e}", acc.im)));
    }
    Ok(acc.re)
}

/// Nested `[re, im]` pairs, row-major.
pub fn matrix_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [clean(m[(r, c)].re), clean(m[(r, c)].im)])
                .collect()
        })
        .collect()
}

fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceJson {
    pub rank: usize,
    pub basis: Vec<Vec<[f64; 2]>>,
}

impl From<&Subspace> for SubspaceJson {
    fn from(s: &Subspace) -> Self {
        Self {
            rank: s.rank(),
            basis: matrix_json(s.basis()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket(vals: &[f64]) -> CVector {
        CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(x)))
    }

    fn plus() -> CVector {
        ket(&[1.0, 1.0]).unscale(2f64.sqrt())
    }

    fn minus() -> CVector {
        ket(&[1.0, -1.0]).unscale(2f64.sqrt())
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity(2).unscale(2.0), &tol()).is_ok());
        assert!(DensityMatrix::new(identity(2), &tol()).is_err());
        let mut bad = identity(2).unscale(2.0);
        bad[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(bad, &tol()).is_err());
        let neg = CMatrix::from_diagonal(&ket(&[1.5, -0.5]));
        assert!(DensityMatrix::new(neg, &tol()).is_err());
        assert!(DensityMatrix::new(CMatrix::zeros(2, 3), &tol()).is_err());
    }

    #[test]
    fn kernel_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(kernel(&mixed, &tol()).is_zero());
        let p = DensityMatrix::pure(&plus()).unwrap();
        let k = kernel(&p, &tol());
        assert_eq!(k.rank(), 1);
        let expect = Subspace::span(2, &[minus()], &tol()).unwrap();
        assert!(k.approx_eq(&expect, &tol()));
        assert!(support(&p, &tol()).approx_eq(&Subspace::span(2, &[plus()], &tol()).unwrap(), &tol()));
    }

    #[test]
    fn intersect_examples() {
        let e1 = Subspace::span(3, &[ket(&[1.0, 0.0, 0.0])], &tol()).unwrap();
        let e2 = Subspace::span(3, &[ket(&[0.0, 1.0, 0.0])], &tol()).unwrap();
        let e12 = Subspace::span(3, &[ket(&[1.0, 0.0, 0.0]), ket(&[0.0, 1.0, 0.0])], &tol()).unwrap();
        assert!(intersect(&e1, &e2, &tol()).unwrap().is_zero());
        assert!(intersect(&e12, &e12, &tol()).unwrap().approx_eq(&e12, &tol()));
        assert!(intersect(&e12, &e2, &tol()).unwrap().approx_eq(&e2, &tol()));
        let z = Subspace::zero(3);
        assert!(intersect(&z, &e12, &tol()).unwrap().is_zero());
        assert!(intersect(&e12, &Subspace::zero(2), &tol()).is_err());
        // two planes in C^3 meet in a line
        let p2 = Subspace::span(3, &[ket(&[0.0, 1.0, 1.0]), ket(&[1.0, 0.0, 0.0])], &tol()).unwrap();
        let line = intersect(&e12, &p2, &tol()).unwrap();
        assert!(line.approx_eq(&e1, &tol()));
    }

    #[test]
    fn povm_validation_examples() {
        assert!(validate_povm(&Povm::trivial(2), &tol()).passed);
        let e0 = outer(&ket(&[1.0, 0.0]));
        let e1 = outer(&ket(&[0.0, 1.0]));
        assert!(validate_povm(&Povm::new(vec![e0.clone(), e1]).unwrap(), &tol()).passed);
        let lone = validate_povm(&Povm::new(vec![e0]).unwrap(), &tol());
        assert!(!lone.passed && !lone.complete && lone.positive && lone.hermitian);
        let neg = validate_povm(
            &Povm::new(vec![identity(2).scale(2.0), identity(2).scale(-1.0)]).unwrap(),
            &tol(),
        );
        assert!(!neg.positive && neg.complete);
        assert!(Povm::new(vec![]).is_err());
        assert!(Povm::new(vec![identity(2), identity(3)]).is_err());
    }

    #[test]
    fn probability_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let pm = outer(&minus());
        assert!((outcome_probability(&mixed, &pm, &tol()).unwrap() - 0.5).abs() < 1e-15);
        let p = DensityMatrix::pure(&plus()).unwrap();
        assert!(outcome_probability(&p, &pm, &tol()).unwrap().abs() < 1e-15);
        assert!(outcome_probability(&p, &identity(3), &tol()).is_err());
    }

    #[test]
    fn matrix_json_layout() {
        let m = CMatrix::from_row_slice(1, 2, &[c(0.5), Complex64::new(-0.0, 1.0)]);
        assert_eq!(serde_json::to_string(&matrix_json(&m)).unwrap(), "[[[0.5,0.0],[0.0,1.0]]]");
    }

    fn arb_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
            .prop_map(move |v| CMatrix::from_iterator(d, d, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
    }

    /// Random PSD matrix of dimension d and rank <= r: B B^dagger with B d x r.
    fn arb_psd() -> impl Strategy<Value = CMatrix> {
        (2usize..7, 1usize..7).prop_flat_map(|(d, r)| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * r.min(d)).prop_map(move |v| {
                let b = CMatrix::from_iterator(d, r.min(d), v.into_iter().map(|(a, b)| Complex64::new(a, b)));
                &b * b.adjoint()
            })
        })
    }

    fn random_subspace() -> impl Strategy<Value = Subspace> {
        (1usize..5).prop_flat_map(|r| {
            arb_matrix(5).prop_map(move |m| {
                let cols: Vec<CVector> = (0..r).map(|i| m.column(i).into_owned()).collect();
                Subspace::span(5, &cols, &Tolerances::default()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn kernel_and_support_split_the_space(m in arb_psd()) {
            let t = tol();
            let k = psd_kernel(&m, t.kernel);
            let s = psd_support(&m, t.kernel);
            prop_assert_eq!(k.rank() + s.rank(), m.nrows());
            prop_assert!(max_abs(&(k.projector() + s.projector() - identity(m.nrows()))) < 1e-9);
        }

        #[test]
        fn intersect_symmetric_and_monotone(a in random_subspace(), b in random_subspace()) {
            let t = tol();
            let ab = intersect(&a, &b, &t).unwrap();
            let ba = intersect(&b, &a, &t).unwrap();
            prop_assert!(ab.distance(&ba) <= 1e-9);
            prop_assert!(a.contains(&ab, &t));
            prop_assert!(b.contains(&ab, &t));
            // generic subspaces of C^5 meet in dimension max(0, ra + rb - 5)
            prop_assert_eq!(ab.rank(), (a.rank() + b.rank()).saturating_sub(5));
        }

        #[test]
        fn povm_probabilities_sum_to_one(m in arb_psd(), k in 1usize..4) {
            let d = m.nrows();
            let rho = DensityMatrix::new(m.unscale(m.trace().re), &tol()).unwrap();
            // split the computational basis into k groups of projectors
            let povm = Povm::new((0..k).map(|g| {
                CMatrix::from_fn(d, d, |r, c| if r == c && r % k == g { c_one() } else { Complex64::new(0.0, 0.0) })
            }).collect()).unwrap();
            prop_assert!(validate_povm(&povm, &tol()).passed);
            let total: f64 = povm.outcomes().iter().map(|a| outcome_probability(&rho, a, &tol()).unwrap()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
        }
    }

    fn c_one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}
