//! Finite Abelian groups `Z_{n1} x ... x Z_{nk}`, their subgroup lattices and
//! character groups.
//!
//! Elements are residue tuples. Every element also has a *basis index*: its
//! rank in lexicographic order of coordinate tuples (first coordinate most
//! significant). The same index labels the computational basis vector
//! `|g>` in `C[G]` and, through the identification `chi_a <-> a`, the
//! character `chi_a`. Lexicographic order on tuples coincides with numeric
//! order on indices, so sorting indices is the canonical ordering.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::{Error, Result, DEFAULT_DIMENSION_CAP};

/// A finite Abelian group given as a product of cyclic factors.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    factors: Vec<usize>,
    order: usize,
    cap: usize,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for GroupSpec {}

impl GroupSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(factors: Vec<usize>, cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parse("a group needs at least one cyclic factor".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&n| n == 0) {
            return Err(Error::Parse(format!("cyclic factor order must be >= 1, got {bad}")));
        }
        let mut order: usize = 1;
        for &n in &factors {
            order = order
                .checked_mul(n)
                .ok_or_else(|| Error::size("group order", usize::MAX, cap))?;
        }
        if order > cap {
            return Err(Error::size("group order", order, cap));
        }
        Ok(Self { factors, order, cap })
    }

    /// Parses `Z<n>` terms joined by `x`, e.g. `Z4xZ2xZ2`. Case-insensitive,
    /// no whitespace allowed.
    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with_cap(s, DEFAULT_DIMENSION_CAP)
    }

    pub fn parse_with_cap(s: &str, cap: usize) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower.is_empty() {
            return Err(Error::Parse("empty group string".into()));
        }
        let mut factors = Vec::new();
        for term in lower.split('x') {
            let digits = term
                .strip_prefix('z')
                .ok_or_else(|| Error::Parse(format!("bad factor {term:?} in {s:?}: expected Z<n>")))?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("bad factor {term:?} in {s:?}: expected Z<n>")));
            }
            let n: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("factor order out of range in {s:?}")))?;
            factors.push(n);
        }
        Self::with_cap(factors, cap)
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Least common multiple of the factor orders; every character value is
    /// a power of `exp(2 pi i / exponent)`.
    pub fn exponent(&self) -> usize {
        self.factors.iter().fold(1, |acc, &n| lcm(acc, n))
    }

    pub fn element(&self, index: usize) -> GroupElement {
        assert!(index < self.order, "element index {index} out of range");
        let mut coords = vec![0; self.factors.len()];
        let mut rest = index;
        for (c, &n) in coords.iter_mut().zip(&self.factors).rev() {
            *c = rest % n;
            rest /= n;
        }
        GroupElement { coords }
    }

    pub fn index_of(&self, x: &GroupElement) -> Result<usize> {
        if x.coords.len() != self.factors.len() {
            return Err(Error::domain(format!(
                "element {x} has {} coordinates, group {self} has {}",
                x.coords.len(),
                self.factors.len()
            )));
        }
        let mut idx = 0;
        for (&c, &n) in x.coords.iter().zip(&self.factors) {
            if c >= n {
                return Err(Error::domain(format!("element {x} not reduced modulo {self}")));
            }
            idx = idx * n + c;
        }
        Ok(idx)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order).map(|i| self.element(i)).collect()
    }

    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        let (mut idx, mut ra, mut rb, mut stride) = (0, a, b, 1);
        for &n in self.factors.iter().rev() {
            idx += ((ra % n + rb % n) % n) * stride;
            ra /= n;
            rb /= n;
            stride *= n;
        }
        idx
    }

    #[cfg(test)]
    pub(crate) fn neg(&self, a: usize) -> usize {
        let (mut idx, mut ra, mut stride) = (0, a, 1);
        for &n in self.factors.iter().rev() {
            idx += ((n - ra % n) % n) * stride;
            ra /= n;
            stride *= n;
        }
        idx
    }

    /// Multiples `0, a, 2a, ...` of an element until the cycle closes.
    pub(crate) fn cyclic_members(&self, a: usize) -> Vec<usize> {
        let mut out = vec![0];
        let mut x = a;
        while x != 0 {
            out.push(x);
            x = self.add(x, a);
        }
        out.sort_unstable();
        out
    }

    /// Exact pairing `sum_j a_j b_j (L / n_j) mod L` with `L` the exponent, so
    /// that `chi_a(b) = exp(2 pi i pairing / L)`.
    pub(crate) fn pairing(&self, a: usize, b: usize) -> usize {
        let l = self.exponent();
        let (ea, eb) = (self.element(a), self.element(b));
        let mut acc = 0usize;
        for ((&x, &y), &n) in ea.coords.iter().zip(&eb.coords).zip(&self.factors) {
            acc = (acc + (x * y % n) * (l / n)) % l;
        }
        acc
    }

    pub fn character(&self, index: usize) -> Character {
        Character {
            exponents: self.element(index).coords,
        }
    }

    pub fn characters(&self) -> Vec<Character> {
        (0..self.order).map(|i| self.character(i)).collect()
    }

    /// Every presentation `Z_{n1} x ... x Z_{nk}` with `n1 >= n2 >= ... >= 2`
    /// and product at most `max_order`, plus the trivial group `Z1`. Distinct
    /// presentations of isomorphic groups (`Z6` and `Z3xZ2`) are all listed.
    pub fn all_presentations(max_order: usize) -> Vec<GroupSpec> {
        fn extend(prefix: &mut Vec<usize>, max_factor: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
            for n in (2..=max_factor.min(budget)).rev() {
                prefix.push(n);
                out.push(prefix.clone());
                extend(prefix, n, budget / n, out);
                prefix.pop();
            }
        }
        let mut raw = vec![vec![1]];
        extend(&mut Vec::new(), max_order, max_order, &mut raw);
        let mut specs: Vec<GroupSpec> = raw
            .into_iter()
            .map(|f| GroupSpec::with_cap(f, max_order.max(DEFAULT_DIMENSION_CAP)).expect("valid by construction"))
            .collect();
        specs.sort_by(|a, b| (a.order, &a.factors).cmp(&(b.order, &b.factors)));
        specs
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A residue tuple `(a_1, ..., a_k)` with `0 <= a_i < n_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct GroupElement {
    pub coords: Vec<usize>,
}

impl GroupElement {
    pub fn new(coords: Vec<usize>) -> Self {
        Self { coords }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The character `chi_a(b) = exp(2 pi i sum_j a_j b_j / n_j)`, indexed by its
/// exponent tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Character {
    pub exponents: Vec<usize>,
}

impl Character {
    /// Numerator `p` of the phase `chi(b) = exp(2 pi i p / L)`, `L` the group
    /// exponent. Exact.
    pub fn phase(&self, g: &GroupSpec, b: &GroupElement) -> Result<usize> {
        let a = g.index_of(&GroupElement::new(self.exponents.clone()))?;
        Ok(g.pairing(a, g.index_of(b)?))
    }

    pub fn eval(&self, g: &GroupSpec, b: &GroupElement) -> Result<Complex64> {
        Ok(root_of_unity(self.phase(g, b)?, g.exponent()))
    }
}

/// `exp(2 pi i num / den)`, converted to floating point once.
pub(crate) fn root_of_unity(num: usize, den: usize) -> Complex64 {
    let num = num % den;
    match (4 * num).is_multiple_of(den) {
        // quarter turns come out exact
        true => [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][4 * num / den],
        false => Complex64::from_polar(1.0, std::f64::consts::TAU * num as f64 / den as f64),
    }
}

/// A subgroup stored as the sorted list of basis indices of its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    group: GroupSpec,
    members: Vec<usize>,
    generators: Vec<usize>,
}

impl Subgroup {
    pub fn trivial(g: &GroupSpec) -> Self {
        Self {
            group: g.clone(),
            members: vec![0],
            generators: vec![],
        }
    }

    pub fn whole(g: &GroupSpec) -> Self {
        Self::generated_by_indices(g, &(0..g.order()).collect::<Vec<_>>())
    }

    /// Subgroup generated by the given elements. The stored generator list is
    /// the greedy subsequence of inputs that each enlarge the span.
    pub fn generated_by(g: &GroupSpec, gens: &[GroupElement]) -> Result<Self> {
        let idx = gens.iter().map(|x| g.index_of(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self::generated_by_indices(g, &idx))
    }

    pub(crate) fn generated_by_indices(g: &GroupSpec, gens: &[usize]) -> Self {
        let mut sub = Self::trivial(g);
        for &x in gens {
            if !sub.contains_index(x) {
                sub = sub.adjoin(x);
            }
        }
        sub
    }

    /// Validates an explicit element set: must contain the identity and be
    /// closed under addition (closure under inverses follows for finite sets).
    pub fn from_elements(g: &GroupSpec, elems: &[GroupElement]) -> Result<Self> {
        let mut members = elems.iter().map(|x| g.index_of(x)).collect::<Result<Vec<_>>>()?;
        members.sort_unstable();
        members.dedup();
        Self::from_members(g, members)
    }

    pub(crate) fn from_members(g: &GroupSpec, members: Vec<usize>) -> Result<Self> {
        let mut present = vec![false; g.order()];
        for &m in &members {
            present[m] = true;
        }
        if !present[0] {
            return Err(Error::domain("element set does not contain the identity"));
        }
        for &a in &members {
            for &b in &members {
                if !present[g.add(a, b)] {
                    return Err(Error::domain("element set is not closed under the group operation"));
                }
            }
        }
        let sub = Self::generated_by_indices(g, &members);
        debug_assert_eq!(sub.members, members);
        Ok(sub)
    }

    /// `self + <x>`; Abelian, so the span is `{h + k x}`.
    fn adjoin(&self, x: usize) -> Self {
        let g = &self.group;
        let mut present = vec![false; g.order()];
        let mut members = Vec::new();
        for m in g.cyclic_members(x) {
            for &h in &self.members {
                let s = g.add(h, m);
                if !present[s] {
                    present[s] = true;
                    members.push(s);
                }
            }
        }
        members.sort_unstable();
        let mut generators = self.generators.clone();
        generators.push(x);
        Self {
            group: g.clone(),
            members,
            generators,
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// `[G : H]`.
    pub fn index(&self) -> usize {
        self.group.order() / self.order()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.members.iter().map(|&i| self.group.element(i)).collect()
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        self.generators.iter().map(|&i| self.group.element(i)).collect()
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.group
            .index_of(x)
            .map(|i| self.contains_index(i))
            .unwrap_or(false)
    }

    /// `self <= other` as element sets.
    pub fn is_contained_in(&self, other: &Subgroup) -> bool {
        self.group == other.group && self.members.iter().all(|&m| other.contains_index(m))
    }

    /// `self < other`.
    pub fn is_strictly_contained_in(&self, other: &Subgroup) -> bool {
        self.order() < other.order() && self.is_contained_in(other)
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        let members: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|&m| other.contains_index(m))
            .collect();
        Self::from_members(&self.group, members).expect("intersection of subgroups is a subgroup")
    }

    /// Short human label: `trivial`, `full`, or the generators, e.g. `<2>` or
    /// `<1,0;0,1>`. Labels are unique within one subgroup lattice.
    pub fn label(&self) -> String {
        if self.order() == 1 {
            "trivial".into()
        } else if self.order() == self.group.order() {
            "full".into()
        } else {
            let gens: Vec<String> = self
                .generators()
                .iter()
                .map(|e| {
                    e.coords
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            format!("<{}>", gens.join(";"))
        }
    }

    fn belongs_to(&self, g: &GroupSpec) -> Result<()> {
        if &self.group != g {
            return Err(Error::domain(format!(
                "subgroup of {} used with group {g}",
                self.group
            )));
        }
        Ok(())
    }
}

impl Serialize for Subgroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Subgroup", 4)?;
        st.serialize_field("label", &self.label())?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("generators", &self.generators())?;
        st.serialize_field("elements", &self.elements())?;
        st.end()
    }
}

/// All subgroups of `g`, each exactly once, sorted by `(order, members)`.
///
/// Breadth-first closure from the trivial subgroup: each level adjoins one new
/// element to every subgroup found on the previous level. A subgroup is first
/// reached at depth equal to its minimal generator count, so the recorded
/// generators are a minimum-size generating set.
pub fn enumerate_subgroups(g: &GroupSpec) -> Result<Vec<Subgroup>> {
    if g.order() > g.cap() {
        return Err(Error::size("group order", g.order(), g.cap()));
    }
    let mut found: BTreeMap<Vec<usize>, Subgroup> = BTreeMap::new();
    let trivial = Subgroup::trivial(g);
    found.insert(trivial.members.clone(), trivial.clone());
    let mut frontier = vec![trivial];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for sub in &frontier {
            for x in 0..g.order() {
                if sub.contains_index(x) {
                    continue;
                }
                let bigger = sub.adjoin(x);
                if !found.contains_key(&bigger.members) {
                    found.insert(bigger.members.clone(), bigger.clone());
                    next.push(bigger);
                }
            }
        }
        frontier = next;
    }
    let mut subs: Vec<Subgroup> = found.into_values().collect();
    subs.sort_by(|a, b| (a.order(), &a.members).cmp(&(b.order(), &b.members)));
    Ok(subs)
}

/// The smallest element of each coset `c + H`, in ascending order.
pub fn coset_transversal(g: &GroupSpec, h: &Subgroup) -> Result<Vec<GroupElement>> {
    Ok(transversal_indices(g, h)?
        .into_iter()
        .map(|i| g.element(i))
        .collect())
}

pub(crate) fn transversal_indices(g: &GroupSpec, h: &Subgroup) -> Result<Vec<usize>> {
    h.belongs_to(g)?;
    let mut covered = vec![false; g.order()];
    let mut reps = Vec::with_capacity(h.index());
    for x in 0..g.order() {
        if covered[x] {
            continue;
        }
        reps.push(x);
        for &m in h.members() {
            covered[g.add(x, m)] = true;
        }
    }
    Ok(reps)
}

/// `H^perp = {chi : chi(h) = 1 for all h in H}`, decided by exact modular
/// arithmetic on the generators of `H`.
pub fn orthogonal_group(g: &GroupSpec, h: &Subgroup) -> Result<Vec<Character>> {
    Ok(annihilator(g, h)?
        .members()
        .iter()
        .map(|&a| g.character(a))
        .collect())
}

/// `H^perp` as a subgroup of `G` under the identification `chi_a <-> a`.
pub fn annihilator(g: &GroupSpec, h: &Subgroup) -> Result<Subgroup> {
    h.belongs_to(g)?;
    let members: Vec<usize> = (0..g.order())
        .filter(|&a| h.generator_indices().iter().all(|&x| g.pairing(a, x) == 0))
        .collect();
    assert_eq!(
        members.len() * h.order(),
        g.order(),
        "|H^perp| |H| != |G| for H = {} in {g}",
        h.label()
    );
    Subgroup::from_members(g, members)
}

/// Classes of `chi ~ chi'` iff `<chi> = <chi'>`, each sorted, classes ordered
/// by their smallest member.
pub fn character_classes(g: &GroupSpec) -> Vec<Vec<Character>> {
    character_class_indices(g)
        .into_iter()
        .map(|class| class.into_iter().map(|a| g.character(a)).collect())
        .collect()
}

pub(crate) fn character_class_indices(g: &GroupSpec) -> Vec<Vec<usize>> {
    let mut by_span: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for a in 0..g.order() {
        by_span.entry(g.cyclic_members(a)).or_default().push(a);
    }
    let mut classes: Vec<Vec<usize>> = by_span.into_values().collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
