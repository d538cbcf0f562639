//! Elimination sets and operators, efficiency and optimality of elimination
//! POVMs, the class observable `A(G)`, the generic kernel-intersection
//! construction and its failure on dihedral hidden reflections.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abelian::{self, Character, GroupSpec};
use crate::dihedral::{self, DihedralSpec};
use crate::exec::Exec;
use crate::linalg::{
    self, intersect, kernel, max_abs, outcome_probability, psd_support, validate_povm, CMatrix, CVector,
    DensityMatrix, Povm, Subspace, Tolerances,
};
use crate::states;
use crate::{Error, Result};

/// Default efficiency constant: the bound achieved by `A(G)` on Abelian `S_G`.
pub const DEFAULT_C_MIN: f64 = 0.5;

/// Upper bound on kernel intersections explored by [`generic_construction`].
pub const SUBSET_LIMIT: usize = 1 << 20;

fn check_inputs(candidates: &[DensityMatrix], a: &Povm, tol: &Tolerances) -> Result<()> {
    let v = validate_povm(a, tol);
    if !v.passed {
        return Err(Error::domain(format!(
            "invalid POVM: hermitian {} positive {} complete {} (deviation {:e})",
            v.hermitian, v.positive, v.complete, v.completeness_deviation
        )));
    }
    if let Some(rho) = candidates.iter().find(|r| r.dim() != a.dim()) {
        return Err(Error::domain(format!(
            "candidate of dimension {} against POVM of dimension {}",
            rho.dim(),
            a.dim()
        )));
    }
    Ok(())
}

/// Per-candidate `E_A(rho)` and `A^perp_rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationStructure {
    /// `probabilities[r][i] = tr(rho_r A_i)`.
    pub probabilities: Vec<Vec<f64>>,
    /// Outcomes `i` with `tr(rho_r A_i) <= tol.zero`.
    pub elimination_sets: Vec<Vec<usize>>,
    /// `sum_{i in E(rho_r)} A_i`.
    pub operators: Vec<CMatrix>,
}

pub fn elimination_structure(
    candidates: &[DensityMatrix],
    a: &Povm,
    tol: &Tolerances,
) -> Result<EliminationStructure> {
    check_inputs(candidates, a, tol)?;
    let probabilities = candidates
        .iter()
        .map(|rho| {
            a.outcomes()
                .iter()
                .map(|op| outcome_probability(rho, op, tol))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let elimination_sets: Vec<Vec<usize>> = probabilities
        .iter()
        .map(|row| (0..row.len()).filter(|&i| row[i] <= tol.zero).collect())
        .collect();
    let d = a.dim();
    let operators = elimination_sets
        .iter()
        .map(|set| {
            set.iter()
                .fold(CMatrix::zeros(d, d), |acc, &i| acc + &a.outcomes()[i])
        })
        .collect();
    Ok(EliminationStructure {
        probabilities,
        elimination_sets,
        operators,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmMetadata {
    pub outcomes: usize,
    pub dim: usize,
    pub ranks: Vec<usize>,
    pub completeness_deviation: f64,
}

impl PovmMetadata {
    pub fn new(a: &Povm, tol: &Tolerances) -> Self {
        Self {
            outcomes: a.len(),
            dim: a.dim(),
            ranks: a.outcomes().iter().map(|op| psd_support(op, tol.kernel).rank()).collect(),
            completeness_deviation: validate_povm(a, tol).completeness_deviation,
        }
    }
}

/// Pairwise elimination probabilities and the achieved efficiency constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationReport {
    pub candidates: Vec<String>,
    pub povm_metadata: PovmMetadata,
    pub elimination_sets: Vec<Vec<usize>>,
    /// `pairwise_matrix[r][s] = tr(rho_r A^perp_{rho_s})`.
    pub pairwise_matrix: Vec<Vec<f64>>,
    /// `min` over unordered pairs of `max(M[r][s], M[s][r])`; 1 when there
    /// are fewer than two candidates.
    pub c_star: f64,
    pub c_min: f64,
    pub efficient: bool,
    pub tolerances: Tolerances,
}

pub fn efficiency_report(
    candidates: &[DensityMatrix],
    labels: &[String],
    a: &Povm,
    c_min: f64,
    tol: &Tolerances,
) -> Result<EliminationReport> {
    efficiency_report_with(candidates, labels, a, c_min, tol, Exec::default())
}

pub fn efficiency_report_with(
    candidates: &[DensityMatrix],
    labels: &[String],
    a: &Povm,
    c_min: f64,
    tol: &Tolerances,
    exec: Exec,
) -> Result<EliminationReport> {
    if labels.len() != candidates.len() {
        return Err(Error::domain("one label per candidate required"));
    }
    let es = elimination_structure(candidates, a, tol)?;
    let n = candidates.len();
    let rows: Vec<Result<Vec<f64>>> = exec.map_range(n, |r| {
        es.operators
            .iter()
            .map(|op| outcome_probability(&candidates[r], op, tol))
            .collect()
    });
    let pairwise_matrix = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut c_star: f64 = 1.0;
    for (r, row) in pairwise_matrix.iter().enumerate() {
        for (s, other) in pairwise_matrix.iter().enumerate().skip(r + 1) {
            c_star = c_star.min(row[s].max(other[r]));
        }
    }
    Ok(EliminationReport {
        candidates: labels.to_vec(),
        povm_metadata: PovmMetadata::new(a, tol),
        elimination_sets: es.elimination_sets,
        pairwise_matrix,
        c_star,
        c_min,
        efficient: c_star >= c_min - tol.zero,
        tolerances: *tol,
    })
}

/// `A(G)`: one projector per character class, onto the span of the class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassObservable {
    pub classes: Vec<Vec<Character>>,
    pub subspaces: Vec<Subspace>,
    pub povm: Povm,
}

pub fn class_observable(g: &GroupSpec) -> ClassObservable {
    let idx = abelian::character_class_indices(g);
    let subspaces: Vec<Subspace> = idx.iter().map(|c| states::character_subspace(g, c)).collect();
    let povm = Povm::from_subspaces(&subspaces).expect("at least one class");
    ClassObservable {
        classes: idx
            .iter()
            .map(|c| c.iter().map(|&a| g.character(a)).collect())
            .collect(),
        subspaces,
        povm,
    }
}

/// For each fine outcome, the coarse outcomes whose support contains its
/// support. Zero fine outcomes map to an empty list.
pub fn refinement_map(fine: &Povm, coarse: &Povm, tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    if fine.dim() != coarse.dim() {
        return Err(Error::domain("refinement between POVMs of different dimension"));
    }
    let coarse_supports: Vec<Subspace> = coarse
        .outcomes()
        .iter()
        .map(|op| psd_support(op, tol.kernel))
        .collect();
    Ok(fine
        .outcomes()
        .iter()
        .map(|op| {
            let s = psd_support(op, tol.kernel);
            if s.is_zero() {
                return vec![];
            }
            (0..coarse_supports.len())
                .filter(|&j| coarse_supports[j].contains(&s, tol))
                .collect()
        })
        .collect())
}

/// Every nonzero fine outcome is supported inside exactly one coarse outcome.
pub fn refines(fine: &Povm, coarse: &Povm, tol: &Tolerances) -> Result<bool> {
    let zero_outcome = |op: &CMatrix| max_abs(op) <= tol.zero;
    Ok(refinement_map(fine, coarse, tol)?
        .iter()
        .zip(fine.outcomes())
        .all(|(hits, op)| hits.len() == 1 || (hits.is_empty() && zero_outcome(op))))
}

/// An outcome `A_i` and candidate `rho` with `tr(rho A_i) > 0` although part
/// of `support(A_i)` lies in `ker(rho)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub outcome: usize,
    pub candidate: usize,
    pub outcome_probability: f64,
    /// `dim(support(A_i) ∩ ker(rho))`.
    pub overlap_dim: usize,
    /// `tr(rho B)` for random positive `B` supported in the overlap; all
    /// should be zero while `tr(rho A_i)` is not.
    pub witness_traces: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub candidates: Vec<String>,
    pub povm_metadata: PovmMetadata,
    pub violations: Vec<Violation>,
    pub optimal: bool,
    pub c_star: f64,
    pub efficient: bool,
    pub tolerances: Tolerances,
}

/// Decides optimality through the subspace dichotomy: for every outcome and
/// candidate, `support(A_i)` is either inside `ker(rho)` or meets it only in
/// zero. `samples` random witnesses are drawn for each violation.
pub fn optimality_check(
    candidates: &[DensityMatrix],
    labels: &[String],
    a: &Povm,
    samples: usize,
    tol: &Tolerances,
) -> Result<OptimalityReport> {
    let eff = efficiency_report(candidates, labels, a, DEFAULT_C_MIN, tol)?;
    let supports: Vec<Subspace> = a.outcomes().iter().map(|op| psd_support(op, tol.kernel)).collect();
    let per_candidate: Vec<Result<Vec<Violation>>> = Exec::default().map_range(candidates.len(), |r| {
        let rho = &candidates[r];
        let ker = kernel(rho, tol);
        let mut out = Vec::new();
        for (i, sup) in supports.iter().enumerate() {
            let p = outcome_probability(rho, &a.outcomes()[i], tol)?;
            if p <= tol.zero {
                continue;
            }
            let overlap = intersect(sup, &ker, tol)?;
            if overlap.is_zero() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(((r as u64) << 32) | i as u64);
            let witness_traces = (0..samples)
                .map(|_| outcome_probability(rho, &random_positive(&overlap, &mut rng), tol))
                .collect::<Result<Vec<f64>>>()?;
            out.push(Violation {
                outcome: i,
                candidate: r,
                outcome_probability: p,
                overlap_dim: overlap.rank(),
                witness_traces,
            });
        }
        Ok(out)
    });
    let mut violations = Vec::new();
    for v in per_candidate {
        violations.extend(v?);
    }
    violations.sort_by_key(|v| (v.outcome, v.candidate));
    Ok(OptimalityReport {
        candidates: labels.to_vec(),
        povm_metadata: eff.povm_metadata,
        optimal: violations.is_empty(),
        violations,
        c_star: eff.c_star,
        efficient: eff.efficient,
        tolerances: *tol,
    })
}

/// `sum_j w_j |x_j><x_j|` with random positive weights over a basis of `s`.
fn random_positive(s: &Subspace, rng: &mut impl Rng) -> CMatrix {
    let d = s.ambient_dim();
    let mut b = CMatrix::zeros(d, d);
    for col in s.basis().column_iter() {
        let w: f64 = rng.random_range(0.1..1.0);
        let v: CVector = col.into_owned();
        b += linalg::outer(&v).scale(w);
    }
    b
}

/// Outcomes grouped by the set of candidates they eliminate, with operators
/// summed inside each group. Sorted by eliminated set.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedOutcome {
    pub eliminates: Vec<usize>,
    pub operator: CMatrix,
}

pub fn merge_by_elimination(
    candidates: &[DensityMatrix],
    a: &Povm,
    tol: &Tolerances,
) -> Result<Vec<MergedOutcome>> {
    let es = elimination_structure(candidates, a, tol)?;
    let d = a.dim();
    let mut groups: BTreeMap<Vec<usize>, CMatrix> = BTreeMap::new();
    for (i, op) in a.outcomes().iter().enumerate() {
        let eliminates: Vec<usize> = (0..candidates.len())
            .filter(|&r| es.probabilities[r][i] <= tol.zero)
            .collect();
        *groups.entry(eliminates).or_insert_with(|| CMatrix::zeros(d, d)) += op;
    }
    Ok(groups
        .into_iter()
        .map(|(eliminates, operator)| MergedOutcome { eliminates, operator })
        .collect())
}

/// Same eliminated sets with the same merged operators.
pub fn same_elimination_behavior(a: &[MergedOutcome], b: &[MergedOutcome], tol: &Tolerances) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.eliminates == y.eliminates && max_abs(&(&x.operator - &y.operator)) <= tol.subspace
        })
}

/// A kernel intersection and every candidate whose kernel contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationSubspace {
    pub subspace: Subspace,
    pub eliminates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericConstruction {
    pub dim: usize,
    pub subspaces: Vec<EliminationSubspace>,
    /// Subsets whose kernel intersection was `{0}` (not extended further).
    pub zero_intersections: usize,
    pub span_rank: usize,
    pub spans_full: bool,
    /// `dim - span_rank`: the part no elimination subspace reaches.
    pub complement_rank: usize,
    /// Span of the subspaces that eliminate at least two candidates.
    pub multi_span_rank: usize,
    pub multi_spans_full: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericConstructionJson {
    pub dim: usize,
    pub subspace_dims: Vec<usize>,
    pub eliminates: Vec<Vec<usize>>,
    pub zero_intersections: usize,
    pub span_rank: usize,
    pub spans_full: bool,
    pub complement_rank: usize,
    pub multi_span_rank: usize,
    pub multi_spans_full: bool,
}

impl From<&GenericConstruction> for GenericConstructionJson {
    fn from(g: &GenericConstruction) -> Self {
        Self {
            dim: g.dim,
            subspace_dims: g.subspaces.iter().map(|s| s.subspace.rank()).collect(),
            eliminates: g.subspaces.iter().map(|s| s.eliminates.clone()).collect(),
            zero_intersections: g.zero_intersections,
            span_rank: g.span_rank,
            spans_full: g.spans_full,
            complement_rank: g.complement_rank,
            multi_span_rank: g.multi_span_rank,
            multi_spans_full: g.multi_spans_full,
        }
    }
}

fn subset_count(n: usize, max_subset: usize) -> usize {
    let mut total: usize = 0;
    let mut binom: usize = 1;
    for k in 1..=max_subset.min(n) {
        binom = binom.saturating_mul(n - k + 1) / k;
        total = total.saturating_add(binom);
    }
    total
}

/// Intersections of candidate kernels over all subsets of size up to
/// `max_subset`, deduplicated by projector distance. A subset whose
/// intersection is `{0}` is not extended.
pub fn generic_construction(
    candidates: &[DensityMatrix],
    max_subset: usize,
    tol: &Tolerances,
) -> Result<GenericConstruction> {
    let n = candidates.len();
    let dim = candidates.first().map_or(0, DensityMatrix::dim);
    if candidates.iter().any(|r| r.dim() != dim) {
        return Err(Error::domain("candidates of different dimensions"));
    }
    let count = subset_count(n, max_subset);
    if count > SUBSET_LIMIT {
        return Err(Error::size(
            format!("kernel intersections for {n} candidates up to size {max_subset} (lower max_subset)"),
            count,
            SUBSET_LIMIT,
        ));
    }
    let kernels: Vec<Subspace> = candidates.iter().map(|r| kernel(r, tol)).collect();
    let mut found: Vec<Subspace> = Vec::new();
    let mut zero_intersections = 0;
    let record = |s: Subspace, found: &mut Vec<Subspace>| {
        if !found.iter().any(|f| f.approx_eq(&s, tol)) {
            found.push(s);
        }
    };
    // level k: (last index used, intersection)
    let mut level: Vec<(usize, Subspace)> = Vec::new();
    for (i, k) in kernels.iter().enumerate() {
        if k.is_zero() {
            zero_intersections += 1;
        } else {
            record(k.clone(), &mut found);
            level.push((i, k.clone()));
        }
    }
    for _ in 2..=max_subset.min(n) {
        let mut next = Vec::new();
        for (last, s) in &level {
            for (j, kj) in kernels.iter().enumerate().skip(last + 1) {
                let x = intersect(s, kj, tol)?;
                if x.is_zero() {
                    zero_intersections += 1;
                } else {
                    record(x.clone(), &mut found);
                    next.push((j, x));
                }
            }
        }
        level = next;
    }
    let subspaces: Vec<EliminationSubspace> = found
        .into_iter()
        .map(|s| EliminationSubspace {
            eliminates: (0..n).filter(|&r| kernels[r].contains(&s, tol)).collect(),
            subspace: s,
        })
        .collect();
    let span_of = |filter: &dyn Fn(&EliminationSubspace) -> bool| -> Result<usize> {
        let mut acc = Subspace::zero(dim);
        for s in subspaces.iter().filter(|s| filter(s)) {
            acc = acc.sum(&s.subspace, tol)?;
        }
        Ok(acc.rank())
    };
    let span_rank = span_of(&|_| true)?;
    let multi_span_rank = span_of(&|s| s.eliminates.len() >= 2)?;
    Ok(GenericConstruction {
        dim,
        subspaces,
        zero_intersections,
        span_rank,
        spans_full: dim > 0 && span_rank == dim,
        complement_rank: dim - span_rank,
        multi_span_rank,
        multi_spans_full: dim > 0 && multi_span_rank == dim,
    })
}

/// `v = sum_i |(i,0)> - sum_i |(i,1)>`, normalized.
pub fn dihedral_v(d: &DihedralSpec) -> CVector {
    let n = d.n();
    let amp = 1.0 / ((2 * n) as f64).sqrt();
    DVector::from_fn(2 * n, |i, _| Complex64::new(if i < n { amp } else { -amp }, 0.0))
}

/// Span of the `(k,1)`-antiperiodic vectors
/// `sum_i l_i |(i,0)> - sum_i l_i |((i+k) mod N, 1)>`.
pub fn antiperiodic_subspace(d: &DihedralSpec, k: usize, tol: &Tolerances) -> Result<Subspace> {
    let n = d.n();
    let vectors: Vec<CVector> = (0..n)
        .map(|i| {
            let mut v = CVector::zeros(2 * n);
            v[i] = Complex64::new(1.0, 0.0);
            v[(i + k) % n + n] = Complex64::new(-1.0, 0.0);
            v
        })
        .collect();
    Subspace::span(2 * n, &vectors, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairIntersection {
    pub k1: usize,
    pub k2: usize,
    pub dim: usize,
    /// Projector distance to `span{v}`.
    pub distance_to_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DihedralChecks {
    pub elimination_dims_equal_n: bool,
    pub antiperiodic: bool,
    pub pairwise_equal_v: bool,
    pub multi_span_is_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DihedralReport {
    pub group: DihedralSpec,
    pub n: usize,
    pub prime: bool,
    pub dim: usize,
    pub elimination_dims: Vec<usize>,
    /// Projector distance between each kernel and its antiperiodic subspace.
    pub antiperiodic_distances: Vec<f64>,
    pub pairwise: Vec<PairIntersection>,
    /// Span of all intersections of two or more elimination subspaces.
    pub multi_span_rank: usize,
    /// `None` when `n` is composite: dimensions are reported, not asserted.
    pub checks: Option<DihedralChecks>,
    pub passed: Option<bool>,
    pub tolerances: Tolerances,
}

/// Builds every hidden-reflection elimination subspace of `D_N` and their
/// pairwise intersections. For prime `N` all pairwise intersections collapse
/// to `span{v}`, so no family of subspaces eliminating two or more
/// candidates each can span `C[D_N]`.
pub fn dihedral_impossibility(d: &DihedralSpec, tol: &Tolerances) -> Result<DihedralReport> {
    let n = d.n();
    let prime = dihedral::is_prime(n);
    let cands = states::dihedral_candidate_set(d)?;
    let kernels: Vec<Subspace> = cands.iter().map(|s| kernel(&s.density, tol)).collect();
    let antiperiodic_distances = (0..n)
        .map(|k| Ok(antiperiodic_subspace(d, k, tol)?.distance(&kernels[k])))
        .collect::<Result<Vec<f64>>>()?;
    let v = Subspace::span(2 * n, &[dihedral_v(d)], tol)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let pairwise = Exec::default()
        .map_slice(&pairs, |&(k1, k2)| {
            let x = intersect(&kernels[k1], &kernels[k2], tol)?;
            Ok(PairIntersection {
                k1,
                k2,
                dim: x.rank(),
                distance_to_v: x.distance(&v),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    // every intersection of >= 2 kernels lies inside some pairwise one
    let mut multi = Subspace::zero(2 * n);
    for &(k1, k2) in &pairs {
        multi = multi.sum(&intersect(&kernels[k1], &kernels[k2], tol)?, tol)?;
    }
    let elimination_dims: Vec<usize> = kernels.iter().map(Subspace::rank).collect();
    let checks = prime.then(|| DihedralChecks {
        elimination_dims_equal_n: elimination_dims.iter().all(|&r| r == n),
        antiperiodic: antiperiodic_distances.iter().all(|&x| x <= tol.subspace),
        pairwise_equal_v: pairwise.iter().all(|p| p.dim == 1 && p.distance_to_v <= tol.subspace),
        multi_span_is_one: multi.rank() == 1,
    });
    let passed = checks.as_ref().map(|c| {
        c.elimination_dims_equal_n && c.antiperiodic && c.pairwise_equal_v && c.multi_span_is_one
    });
    Ok(DihedralReport {
        group: *d,
        n,
        prime,
        dim: 2 * n,
        elimination_dims,
        antiperiodic_distances,
        pairwise,
        multi_span_rank: multi.rank(),
        checks,
        passed,
        tolerances: *tol,
    })
}
