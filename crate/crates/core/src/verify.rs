//! The per-group verification suite behind `verify`: kernel characterization,
//! the pairwise elimination bounds of `A(G)`, exact index identities in the
//! character lattice, refinement of `A(G)` by `F(G)`, optimality, and POVM
//! validity.

use serde::Serialize;

use crate::abelian::{self, GroupSpec, Subgroup};
use crate::elimination::{
    class_observable, efficiency_report, optimality_check, refines, EliminationReport, DEFAULT_C_MIN,
};
use crate::linalg::{kernel, kron_vec, max_abs, validate_povm, CMatrix, CVector, Povm, Subspace, Tolerances};
use crate::states::{self, character_vector, fourier_observable};
use crate::{Error, Result};

/// Random witnesses drawn per optimality violation.
pub const WITNESS_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub subgroup: String,
    pub order: usize,
    pub kernel_rank: usize,
    pub expected_rank: usize,
    /// Max-entry distance between the two projectors.
    pub distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub m: usize,
    pub rows: Vec<KernelRow>,
    pub max_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRelation {
    /// `J < H`; the bound is on `tr(rho_J A^perp_{rho_H})`.
    StrictSubgroup,
    /// `J` not contained in `H`; the bound is on `tr(rho_H A^perp_{rho_J})`.
    NotContained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub h: String,
    pub j: String,
    pub relation: PairRelation,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub rows: Vec<BoundRow>,
    pub min_value: Option<f64>,
    pub c_star: f64,
    pub c_min: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRow {
    pub h: String,
    pub j: String,
    pub relation: PairRelation,
    pub h_perp_order: usize,
    pub j_perp_order: usize,
    pub meet_perp_order: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexCheck {
    /// `|H^perp| |H| = |G|` for every subgroup.
    pub duality: bool,
    /// `J <= H` iff `H^perp <= J^perp` for every pair.
    pub order_reversing: bool,
    /// Membership in every `H^perp` is constant on character classes.
    pub class_constant: bool,
    /// `J < H => 2|H^perp| <= |J^perp|`; `J` not in `H => 2|H^perp ∩ J^perp| <= |H^perp|`.
    pub rows: Vec<IndexRow>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub fourier_refines_class: bool,
    pub class_outcomes: usize,
    pub fourier_outcomes: usize,
    pub identical_up_to_relabeling: bool,
    /// `G = Z_2^k`, where the two observables must coincide.
    pub elementary_2_group: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityCheck {
    pub class_violations: usize,
    pub fourier_violations: usize,
    pub trivial_povm_violations: usize,
    pub subgroups: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmRow {
    pub name: String,
    pub outcomes: usize,
    pub completeness_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupVerification {
    pub group: GroupSpec,
    pub order: usize,
    pub subgroups: usize,
    pub kernels: KernelCheck,
    pub indices: IndexCheck,
    pub povms: Vec<PovmRow>,
    /// The remaining checks need valid observables; `None` (and a failed
    /// verdict) when any POVM fails validation.
    pub bounds: Option<BoundCheck>,
    pub refinement: Option<RefinementCheck>,
    pub optimality: Option<OptimalityCheck>,
    pub efficiency: Option<EliminationReport>,
    pub passed: bool,
}

/// `ker(rho_H^{(m)})` should be the span of the product characters with at
/// least one factor outside `H^perp`.
fn expected_kernel(g: &GroupSpec, perp: &Subgroup, m: usize) -> Subspace {
    let n = g.order();
    let dim = n.pow(m as u32);
    let chars: Vec<CVector> = (0..n).map(|a| character_vector(g, a)).collect();
    let mut cols = Vec::new();
    for t in 0..dim {
        let mut digits = Vec::with_capacity(m);
        let mut rest = t;
        for _ in 0..m {
            digits.push(rest % n);
            rest /= n;
        }
        digits.reverse();
        if digits.iter().all(|&a| perp.contains_index(a)) {
            continue;
        }
        let v = digits[1..]
            .iter()
            .fold(chars[digits[0]].clone(), |acc, &a| kron_vec(&acc, &chars[a]));
        cols.push(v);
    }
    let mut basis = CMatrix::zeros(dim, cols.len());
    for (c, v) in cols.iter().enumerate() {
        basis.set_column(c, v);
    }
    Subspace::from_orthonormal(basis)
}

pub fn kernel_check(g: &GroupSpec, subgroups: &[Subgroup], m: usize, tol: &Tolerances) -> Result<KernelCheck> {
    let mut rows = Vec::with_capacity(subgroups.len());
    for h in subgroups {
        let state = states::rho(g, h, m)?;
        let ker = kernel(&state.density, tol);
        let want = expected_kernel(g, &abelian::annihilator(g, h)?, m);
        let distance = ker.distance(&want);
        rows.push(KernelRow {
            subgroup: h.label(),
            order: h.order(),
            kernel_rank: ker.rank(),
            expected_rank: want.rank(),
            distance,
            passed: distance <= tol.subspace,
        });
    }
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(KernelCheck {
        m,
        passed: rows.iter().all(|r| r.passed),
        rows,
        max_distance,
    })
}

fn relation(h: &Subgroup, j: &Subgroup) -> PairRelation {
    if j.is_strictly_contained_in(h) {
        PairRelation::StrictSubgroup
    } else {
        PairRelation::NotContained
    }
}

/// Pairwise elimination bounds read off the matrix of `A(G)` on `S_G`.
pub fn bound_check(subgroups: &[Subgroup], report: &EliminationReport, tol: &Tolerances) -> BoundCheck {
    let m = &report.pairwise_matrix;
    let mut rows = Vec::new();
    for (hi, h) in subgroups.iter().enumerate() {
        for (ji, j) in subgroups.iter().enumerate() {
            if hi == ji {
                continue;
            }
            let rel = relation(h, j);
            let value = match rel {
                PairRelation::StrictSubgroup => m[ji][hi],
                PairRelation::NotContained => m[hi][ji],
            };
            rows.push(BoundRow {
                h: h.label(),
                j: j.label(),
                relation: rel,
                value,
                passed: value >= 0.5 - tol.zero,
            });
        }
    }
    let min_value = rows.iter().map(|r| r.value).reduce(f64::min);
    BoundCheck {
        passed: rows.iter().all(|r| r.passed) && report.c_star >= 0.5 - tol.zero,
        rows,
        min_value,
        c_star: report.c_star,
        c_min: report.c_min,
    }
}

pub fn index_check(g: &GroupSpec, subgroups: &[Subgroup]) -> Result<IndexCheck> {
    let perps = subgroups
        .iter()
        .map(|h| abelian::annihilator(g, h))
        .collect::<Result<Vec<_>>>()?;
    let duality = subgroups
        .iter()
        .zip(&perps)
        .all(|(h, p)| h.order() * p.order() == g.order());
    let mut order_reversing = true;
    let mut rows = Vec::new();
    for (hi, h) in subgroups.iter().enumerate() {
        for (ji, j) in subgroups.iter().enumerate() {
            if hi == ji {
                continue;
            }
            let (hp, jp) = (&perps[hi], &perps[ji]);
            order_reversing &= j.is_contained_in(h) == hp.is_contained_in(jp);
            let meet = hp.intersection(jp).order();
            let rel = relation(h, j);
            let holds = match rel {
                PairRelation::StrictSubgroup => 2 * hp.order() <= jp.order(),
                PairRelation::NotContained => 2 * meet <= hp.order(),
            };
            rows.push(IndexRow {
                h: h.label(),
                j: j.label(),
                relation: rel,
                h_perp_order: hp.order(),
                j_perp_order: jp.order(),
                meet_perp_order: meet,
                holds,
            });
        }
    }
    let classes = abelian::character_class_indices(g);
    let class_constant = perps.iter().all(|p| {
        classes
            .iter()
            .all(|c| c.iter().all(|&a| p.contains_index(a) == p.contains_index(c[0])))
    });
    Ok(IndexCheck {
        passed: duality && order_reversing && class_constant && rows.iter().all(|r| r.holds),
        duality,
        order_reversing,
        class_constant,
        rows,
    })
}

/// Whether two POVMs have the same outcome multiset, entrywise within
/// `tol.subspace`.
pub fn same_outcomes_up_to_relabeling(a: &Povm, b: &Povm, tol: &Tolerances) -> bool {
    if a.len() != b.len() || a.dim() != b.dim() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.outcomes().iter().all(|x| {
        let hit = (0..b.len()).find(|&k| !used[k] && max_abs(&(x - &b.outcomes()[k])) <= tol.subspace);
        hit.map(|k| used[k] = true).is_some()
    })
}

pub fn is_elementary_2_group(g: &GroupSpec) -> bool {
    g.factors().iter().all(|&f| f == 2)
}

pub fn refinement_check(g: &GroupSpec, class: &Povm, fourier: &Povm, tol: &Tolerances) -> Result<RefinementCheck> {
    let fourier_refines_class = refines(fourier, class, tol)?;
    let identical = same_outcomes_up_to_relabeling(class, fourier, tol);
    let elementary = is_elementary_2_group(g);
    Ok(RefinementCheck {
        fourier_refines_class,
        class_outcomes: class.len(),
        fourier_outcomes: fourier.len(),
        identical_up_to_relabeling: identical,
        elementary_2_group: elementary,
        passed: fourier_refines_class && (!elementary || identical),
    })
}

pub fn povm_row(name: &str, p: &Povm, tol: &Tolerances) -> PovmRow {
    let v = validate_povm(p, tol);
    PovmRow {
        name: name.to_string(),
        outcomes: p.len(),
        completeness_deviation: v.completeness_deviation,
        passed: v.passed && v.completeness_deviation <= tol.povm,
    }
}

/// Runs every check for one Abelian group; kernels are checked at `m`
/// copies, the observables act on a single copy.
pub fn verify_group(g: &GroupSpec, m: usize, tol: &Tolerances) -> Result<GroupVerification> {
    if m == 0 {
        return Err(Error::domain("m must be >= 1"));
    }
    let subgroups = abelian::enumerate_subgroups(g)?;
    let cands = states::candidate_set(g, 1)?;
    let dens: Vec<_> = cands.iter().map(|s| s.density.clone()).collect();
    let labels: Vec<String> = cands.iter().map(|s| s.name()).collect();
    let class = class_observable(g).povm;
    let fourier = fourier_observable(g).povm;
    let trivial = Povm::trivial(g.order());

    let kernels = kernel_check(g, &subgroups, m, tol)?;
    let indices = index_check(g, &subgroups)?;
    let povms = vec![
        povm_row("class", &class, tol),
        povm_row("fourier", &fourier, tol),
        povm_row("trivial", &trivial, tol),
    ];
    let mut out = GroupVerification {
        group: g.clone(),
        order: g.order(),
        subgroups: subgroups.len(),
        passed: false,
        kernels,
        indices,
        povms,
        bounds: None,
        refinement: None,
        optimality: None,
        efficiency: None,
    };
    if !out.povms.iter().all(|p| p.passed) {
        return Ok(out);
    }
    let efficiency = efficiency_report(&dens, &labels, &class, DEFAULT_C_MIN, tol)?;
    let bounds = bound_check(&subgroups, &efficiency, tol);
    let refinement = refinement_check(g, &class, &fourier, tol)?;
    let count = |p: &Povm| optimality_check(&dens, &labels, p, WITNESS_SAMPLES, tol).map(|r| r.violations.len());
    let (cv, fv, tv) = (count(&class)?, count(&fourier)?, count(&trivial)?);
    let optimality = OptimalityCheck {
        class_violations: cv,
        fourier_violations: fv,
        trivial_povm_violations: tv,
        subgroups: subgroups.len(),
        passed: cv == 0 && fv == 0 && (subgroups.len() < 2 || tv >= 1),
    };
    out.passed = out.kernels.passed && out.indices.passed && bounds.passed && refinement.passed && optimality.passed;
    out.bounds = Some(bounds);
    out.refinement = Some(refinement);
    out.optimality = Some(optimality);
    out.efficiency = Some(efficiency);
    Ok(out)
}
