//! Hidden-subgroup states: coset states, multicoset mixtures `rho_H`, the
//! labelled candidate set `S_G`, and the Fourier observable.

use num_complex::Complex64;
use serde::Serialize;

use crate::abelian::{self, Character, GroupElement, GroupSpec, Subgroup};
use crate::dihedral::{self, DihedralSpec, HiddenReflection};
use crate::exec::Exec;
use crate::linalg::{self, CMatrix, CVector, DensityMatrix, Povm, Subspace};
use crate::{Error, Result};

/// `|cH> = |H|^{-1/2} sum_{h in H} |c + h>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetState {
    pub representative: GroupElement,
    pub subgroup: Subgroup,
    pub vector: CVector,
}

pub fn coset_state(g: &GroupSpec, h: &Subgroup, c: &GroupElement) -> Result<CosetState> {
    if h.group() != g {
        return Err(Error::domain(format!("subgroup {} is not a subgroup of {g}", h.label())));
    }
    let ci = g.index_of(c)?;
    Ok(CosetState {
        representative: c.clone(),
        subgroup: h.clone(),
        vector: coset_vector(g, h, ci),
    })
}

fn coset_vector(g: &GroupSpec, h: &Subgroup, c: usize) -> CVector {
    let amp = Complex64::new(1.0 / (h.order() as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(g.order());
    for &x in h.members() {
        v[g.add(c, x)] = amp;
    }
    v
}

/// Which hidden subgroup a state encodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateLabel {
    Subgroup(Subgroup),
    Reflection { n: usize, k: usize },
}

impl StateLabel {
    pub fn name(&self) -> String {
        match self {
            StateLabel::Subgroup(h) => h.label(),
            StateLabel::Reflection { k, .. } => HiddenReflection { k: *k }.label(),
        }
    }

    pub fn subgroup_order(&self) -> usize {
        match self {
            StateLabel::Subgroup(h) => h.order(),
            StateLabel::Reflection { .. } => 2,
        }
    }
}

/// `rho_H` on `C[G]^{⊗m}` together with the subgroup it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSubgroupState {
    pub label: StateLabel,
    pub m: usize,
    pub density: DensityMatrix,
}

impl HiddenSubgroupState {
    pub fn name(&self) -> String {
        self.label.name()
    }
}

fn check_order(g: &GroupSpec, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::domain("multicoset order m must be >= 1"));
    }
    let mut dim: usize = 1;
    for _ in 0..m {
        dim = dim
            .checked_mul(g.order())
            .filter(|&d| d <= g.cap())
            .ok_or_else(|| Error::size(format!("|{g}|^{m}"), g.order().saturating_pow(m as u32), g.cap()))?;
    }
    Ok(dim)
}

/// `rho_H = (|H|/|G|)^m sum_{c in K^m} |psi(H,c)><psi(H,c)|` with `K` the
/// canonical transversal.
pub fn rho(g: &GroupSpec, h: &Subgroup, m: usize) -> Result<HiddenSubgroupState> {
    let reps = abelian::transversal_indices(g, h)?;
    rho_from_reps(g, h, m, &reps)
}

/// Same as [`rho`] with a caller-chosen transversal.
pub fn rho_with_transversal(
    g: &GroupSpec,
    h: &Subgroup,
    m: usize,
    transversal: &[GroupElement],
) -> Result<HiddenSubgroupState> {
    if h.group() != g {
        return Err(Error::domain(format!("subgroup {} is not a subgroup of {g}", h.label())));
    }
    let reps = transversal.iter().map(|c| g.index_of(c)).collect::<Result<Vec<_>>>()?;
    let mut hit = vec![false; g.order()];
    for &c in &reps {
        for &x in h.members() {
            let y = g.add(c, x);
            if hit[y] {
                return Err(Error::domain("transversal has two representatives of one coset"));
            }
            hit[y] = true;
        }
    }
    if hit.iter().any(|&b| !b) {
        return Err(Error::domain("transversal misses a coset"));
    }
    rho_from_reps(g, h, m, &reps)
}

fn rho_from_reps(g: &GroupSpec, h: &Subgroup, m: usize, reps: &[usize]) -> Result<HiddenSubgroupState> {
    let dim = check_order(g, m)?;
    let cosets: Vec<CVector> = reps.iter().map(|&c| coset_vector(g, h, c)).collect();
    let weight = (h.order() as f64 / g.order() as f64).powi(m as i32);
    let mut acc = CMatrix::zeros(dim, dim);
    // odometer over C = K^m
    let mut tuple = vec![0usize; m];
    loop {
        let psi = tuple[1..]
            .iter()
            .fold(cosets[tuple[0]].clone(), |v, &t| linalg::kron_vec(&v, &cosets[t]));
        acc += linalg::outer(&psi).scale(weight);
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(HiddenSubgroupState {
                    label: StateLabel::Subgroup(h.clone()),
                    m,
                    density: DensityMatrix::from_trusted(acc),
                });
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < cosets.len() {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// `S_G = {rho_H : H <= G}` in canonical subgroup order.
pub fn candidate_set(g: &GroupSpec, m: usize) -> Result<Vec<HiddenSubgroupState>> {
    candidate_set_with(g, m, Exec::default())
}

pub fn candidate_set_with(g: &GroupSpec, m: usize, exec: Exec) -> Result<Vec<HiddenSubgroupState>> {
    check_order(g, m)?;
    let subs = abelian::enumerate_subgroups(g)?;
    exec.map_slice(&subs, |h| rho(g, h, m)).into_iter().collect()
}

/// `|chi_a> = |G|^{-1/2} sum_g chi_a(g) |g>`, phases from exact exponents.
pub fn character_vector(g: &GroupSpec, a: usize) -> CVector {
    let n = g.order();
    let l = g.exponent();
    let norm = 1.0 / (n as f64).sqrt();
    CVector::from_iterator(
        n,
        (0..n).map(|x| abelian::root_of_unity(g.pairing(a, x), l) * norm),
    )
}

/// Span of `{|chi_a> : a in chars}`; the character vectors are orthonormal so
/// they are used directly as the basis.
pub fn character_subspace(g: &GroupSpec, chars: &[usize]) -> Subspace {
    let n = g.order();
    let mut basis = CMatrix::zeros(n, chars.len());
    for (col, &a) in chars.iter().enumerate() {
        basis.set_column(col, &character_vector(g, a));
    }
    Subspace::from_orthonormal(basis)
}

/// The rank-one POVM `{|chi><chi|}` indexed by characters in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierObservable {
    pub characters: Vec<Character>,
    pub vectors: Vec<CVector>,
    pub povm: Povm,
}

pub fn fourier_observable(g: &GroupSpec) -> FourierObservable {
    let vectors: Vec<CVector> = (0..g.order()).map(|a| character_vector(g, a)).collect();
    let povm = Povm::new(vectors.iter().map(linalg::outer).collect()).expect("non-empty, square");
    FourierObservable {
        characters: g.characters(),
        vectors,
        povm,
    }
}

/// Normalized `(|(a,0)> + |(a+k,1)>)/sqrt 2`.
pub fn dihedral_coset_vector(d: &DihedralSpec, h: &HiddenReflection, a: usize) -> Result<CVector> {
    let cosets = dihedral::reflection_cosets(d, h)?;
    let pair = cosets
        .get(a)
        .ok_or_else(|| Error::domain(format!("coset index {a} out of range for {d}")))?;
    let mut v = CVector::zeros(d.order());
    for &x in pair {
        v[d.index_of(x)] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    }
    Ok(v)
}

/// Uniform mixture of the `N` reflection-coset states.
pub fn dihedral_rho(d: &DihedralSpec, h: &HiddenReflection) -> Result<HiddenSubgroupState> {
    let n = d.n();
    let mut acc = CMatrix::zeros(d.order(), d.order());
    for a in 0..n {
        acc += linalg::outer(&dihedral_coset_vector(d, h, a)?);
    }
    Ok(HiddenSubgroupState {
        label: StateLabel::Reflection { n, k: h.k },
        m: 1,
        density: DensityMatrix::from_trusted(acc.unscale(n as f64)),
    })
}

/// One state per hidden reflection, `k = 0..N`.
pub fn dihedral_candidate_set(d: &DihedralSpec) -> Result<Vec<HiddenSubgroupState>> {
    d.reflections().iter().map(|h| dihedral_rho(d, h)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StateJson {
    pub group: String,
    pub subgroup: String,
    pub m: usize,
    pub dim: usize,
    pub trace: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateJson {
    pub fn new(group: impl ToString, state: &HiddenSubgroupState) -> Self {
        Self {
            group: group.to_string(),
            subgroup: state.name(),
            m: state.m,
            dim: state.density.dim(),
            trace: state.density.matrix().trace().re,
            matrix: linalg::matrix_json(state.density.matrix()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{annihilator, enumerate_subgroups};
    use crate::linalg::{kernel, max_abs, Tolerances};

    fn z(f: &[usize]) -> GroupSpec {
        GroupSpec::new(f.to_vec()).unwrap()
    }

    fn el(c: &[usize]) -> GroupElement {
        GroupElement::new(c.to_vec())
    }

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn coset_state_examples() {
        let z2 = z(&[2]);
        let s = coset_state(&z2, &Subgroup::whole(&z2), &el(&[0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&s.vector - CVector::from_vec(vec![r(h), r(h)])).norm() < 1e-15);

        let z4 = z(&[4]);
        let h2 = Subgroup::from_elements(&z4, &[el(&[0]), el(&[2])]).unwrap();
        let s1 = coset_state(&z4, &h2, &el(&[1])).unwrap();
        assert!((&s1.vector - CVector::from_vec(vec![r(0.0), r(h), r(0.0), r(h)])).norm() < 1e-15);
        let s3 = coset_state(&z4, &h2, &el(&[3])).unwrap();
        assert_eq!(s1.vector, s3.vector);
        assert!(coset_state(&z2, &h2, &el(&[0])).is_err());
    }

    #[test]
    fn rho_examples() {
        let z2 = z(&[2]);
        let t = rho(&z2, &Subgroup::trivial(&z2), 1).unwrap();
        assert!(max_abs(&(t.density.matrix() - linalg::identity(2).unscale(2.0))) < 1e-15);
        let f = rho(&z2, &Subgroup::whole(&z2), 1).unwrap();
        assert!(max_abs(&(f.density.matrix() - CMatrix::from_element(2, 2, r(0.5)))) < 1e-15);
    }

    #[test]
    fn rho_m2_equals_tensor_square() {
        let z4 = z(&[4]);
        let h = &enumerate_subgroups(&z4).unwrap()[1];
        let direct = rho(&z4, h, 2).unwrap();
        let one = rho(&z4, h, 1).unwrap();
        let power = one.density.tensor(&one.density);
        assert_eq!(direct.density.dim(), 16);
        assert!(max_abs(&(direct.density.matrix() - power.matrix())) < 1e-12);
        let eig = direct.density.eigenvalues();
        assert_eq!(eig.iter().filter(|&&e| e > 1e-9).count(), 4);
        assert!((direct.density.matrix().trace().re - 1.0).abs() < 1e-12);
        // validates as a density matrix
        assert!(DensityMatrix::new(direct.density.matrix().clone(), &tol()).is_ok());
    }

    #[test]
    fn rho_m3_equals_tensor_cube() {
        let g = z(&[2, 2]);
        for h in enumerate_subgroups(&g).unwrap() {
            let direct = rho(&g, &h, 3).unwrap();
            let one = rho(&g, &h, 1).unwrap().density;
            let cube = one.tensor(&one).tensor(&one);
            assert!(max_abs(&(direct.density.matrix() - cube.matrix())) < 1e-12);
        }
    }

    #[test]
    fn order_cap_and_m_zero() {
        let g = GroupSpec::with_cap(vec![8], 64).unwrap();
        let h = Subgroup::trivial(&g);
        assert!(rho(&g, &h, 2).is_ok());
        assert!(matches!(rho(&g, &h, 3), Err(Error::Size { .. })));
        assert!(matches!(rho(&g, &h, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_set(&z(&[2]), 1).unwrap().len(), 2);
        assert_eq!(candidate_set(&z(&[4]), 1).unwrap().len(), 3);
        assert_eq!(candidate_set(&z(&[2, 2]), 1).unwrap().len(), 5);
        let seq = candidate_set_with(&z(&[4, 2]), 1, Exec::Sequential).unwrap();
        let par = candidate_set_with(&z(&[4, 2]), 1, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn transversal_independence() {
        for f in [vec![4], vec![6], vec![4, 2], vec![3, 3], vec![2, 2, 2]] {
            let g = z(&f);
            for h in enumerate_subgroups(&g).unwrap() {
                let canonical = rho(&g, &h, 1).unwrap();
                // largest element of each coset instead of smallest
                let alt: Vec<GroupElement> = abelian::coset_transversal(&g, &h)
                    .unwrap()
                    .iter()
                    .map(|c| {
                        let ci = g.index_of(c).unwrap();
                        g.element(h.members().iter().map(|&x| g.add(ci, x)).max().unwrap())
                    })
                    .collect();
                let other = rho_with_transversal(&g, &h, 1, &alt).unwrap();
                assert!(max_abs(&(canonical.density.matrix() - other.density.matrix())) <= 1e-9);
            }
        }
        let z4 = z(&[4]);
        let h = &enumerate_subgroups(&z4).unwrap()[1];
        assert!(rho_with_transversal(&z4, h, 1, &[el(&[0]), el(&[2])]).is_err());
        assert!(rho_with_transversal(&z4, h, 1, &[el(&[0])]).is_err());
    }

    #[test]
    fn fourier_examples() {
        let z2 = z(&[2]);
        let f = fourier_observable(&z2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&f.vectors[0] - CVector::from_vec(vec![r(h), r(h)])).norm() < 1e-15);
        assert!((&f.vectors[1] - CVector::from_vec(vec![r(h), r(-h)])).norm() < 1e-15);

        let z3 = z(&[3]);
        let f3 = fourier_observable(&z3);
        assert_eq!(f3.povm.len(), 3);
        for a in 0..3 {
            let w = Complex64::from_polar(1.0, std::f64::consts::TAU * a as f64 / 3.0);
            let col = CVector::from_vec(vec![r(1.0), w, w * w]).unscale(3f64.sqrt());
            assert!((&f3.vectors[a] - col).norm() < 1e-12);
        }
        for spec in [vec![1], vec![5], vec![4, 2], vec![3, 2, 2]] {
            let g = z(&spec);
            let f = fourier_observable(&g);
            assert_eq!(f.povm.len(), g.order());
            assert!(linalg::validate_povm(&f.povm, &tol()).passed);
            for (i, u) in f.vectors.iter().enumerate() {
                for (j, v) in f.vectors.iter().enumerate() {
                    let ip = u.dotc(v);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - r(want)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coset_states_expand_over_annihilator() {
        // |cH> = sqrt(|H|/|G|) sum_{chi in H^perp} conj(chi(c)) |chi>
        for f in [vec![4], vec![6], vec![4, 2], vec![2, 2, 2], vec![3, 3]] {
            let g = z(&f);
            let l = g.exponent();
            for h in enumerate_subgroups(&g).unwrap() {
                let perp = annihilator(&g, &h).unwrap();
                let scale = (h.order() as f64 / g.order() as f64).sqrt();
                for c in 0..g.order() {
                    let lhs = coset_vector(&g, &h, c);
                    let mut rhs = CVector::zeros(g.order());
                    for &a in perp.members() {
                        rhs += character_vector(&g, a) * (abelian::root_of_unity(g.pairing(a, c), l).conj() * scale);
                    }
                    assert!(lhs.iter().zip(rhs.iter()).all(|(x, y)| (x - y).norm() <= 1e-9));
                }
            }
        }
    }

    #[test]
    fn distinct_cosets_are_orthogonal() {
        let g = z(&[6, 2]);
        for h in enumerate_subgroups(&g).unwrap() {
            for c in 0..g.order() {
                for d in 0..g.order() {
                    let same = h.contains_index(g.add(c, g.neg(d)));
                    let ip = coset_vector(&g, &h, c).dotc(&coset_vector(&g, &h, d)).norm();
                    if same {
                        assert!((ip - 1.0).abs() < 1e-12);
                    } else {
                        assert!(ip < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn nonzero_spectrum_is_flat() {
        for f in [vec![8], vec![4, 2], vec![3, 3]] {
            let g = z(&f);
            for h in enumerate_subgroups(&g).unwrap() {
                let state = rho(&g, &h, 1).unwrap();
                let expect = h.order() as f64 / g.order() as f64;
                let nz: Vec<f64> = state.density.eigenvalues().into_iter().filter(|&e| e > 1e-9).collect();
                assert_eq!(nz.len(), h.index());
                assert!(nz.iter().all(|e| (e - expect).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn kernel_of_z4_half_subgroup() {
        let z4 = z(&[4]);
        let h = &enumerate_subgroups(&z4).unwrap()[1];
        let k = kernel(&rho(&z4, h, 1).unwrap().density, &tol());
        assert_eq!(k.rank(), 2);
        let expect = Subspace::span(4, &[character_vector(&z4, 1), character_vector(&z4, 3)], &tol()).unwrap();
        assert!(k.approx_eq(&expect, &tol()));
    }

    #[test]
    fn dihedral_states() {
        let d3 = DihedralSpec::new(3).unwrap();
        let s0 = dihedral_rho(&d3, &HiddenReflection { k: 0 }).unwrap();
        assert_eq!(s0.density.dim(), 6);
        assert_eq!(s0.density.eigenvalues().iter().filter(|&&e| e > 1e-9).count(), 3);
        for n in 2..8 {
            let d = DihedralSpec::new(n).unwrap();
            for s in dihedral_candidate_set(&d).unwrap() {
                assert!((s.density.matrix().trace().re - 1.0).abs() < 1e-12);
                assert!(DensityMatrix::new(s.density.matrix().clone(), &tol()).is_ok());
            }
        }
        // kernel for k = 1 is the (1,1)-antiperiodic vectors
        let s1 = dihedral_rho(&d3, &HiddenReflection { k: 1 }).unwrap();
        let k = kernel(&s1.density, &tol());
        assert_eq!(k.rank(), 3);
        let anti: Vec<CVector> = (0..3)
            .map(|i| {
                let mut v = CVector::zeros(6);
                v[i] = r(1.0);
                v[(i + 1) % 3 + 3] = r(-1.0);
                v
            })
            .collect();
        assert!(k.approx_eq(&Subspace::span(6, &anti, &tol()).unwrap(), &tol()));
    }

    #[test]
    fn state_json_has_metadata() {
        let z2 = z(&[2]);
        let s = rho(&z2, &Subgroup::whole(&z2), 1).unwrap();
        let j = serde_json::to_value(StateJson::new(&z2, &s)).unwrap();
        assert_eq!(j["group"], "Z2");
        assert_eq!(j["subgroup"], "full");
        assert_eq!(j["m"], 1);
        assert!((j["matrix"][0][1][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
}
