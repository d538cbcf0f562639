//! The dihedral group `D_N = Z_N ⋊ Z_2` and its hidden reflections.
//!
//! `(a, b)` is rotation `a` followed by flip bit `b`, with product
//! `(a,b)(c,d) = (a + (-1)^b c, b + d)`. In `C[D_N]` the basis index of
//! `(a, b)` is `a + b N`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_DIMENSION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DihedralSpec {
    n: usize,
}

impl DihedralSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parse(format!("dihedral D_N needs N >= 2, got {n}")));
        }
        if n.checked_mul(2).is_none_or(|o| o > cap) {
            return Err(Error::size("dihedral group order", n.saturating_mul(2), cap));
        }
        Ok(Self { n })
    }

    /// Parses `D<n>`, case-insensitive.
    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with_cap(s, DEFAULT_DIMENSION_CAP)
    }

    pub fn parse_with_cap(s: &str, cap: usize) -> Result<Self> {
        let digits = s
            .strip_prefix('D')
            .or_else(|| s.strip_prefix('d'))
            .ok_or_else(|| Error::Parse(format!("expected D<n>, got {s:?}")))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("expected D<n>, got {s:?}")));
        }
        let n = digits
            .parse()
            .map_err(|_| Error::Parse(format!("order out of range in {s:?}")))?;
        Self::with_cap(n, cap)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }

    pub fn element(&self, rotation: usize, flip: usize) -> Result<DihedralElement> {
        if rotation >= self.n || flip > 1 {
            return Err(Error::domain(format!("({rotation},{flip}) is not an element of {self}")));
        }
        Ok(DihedralElement { rotation, flip })
    }

    pub fn identity(&self) -> DihedralElement {
        DihedralElement { rotation: 0, flip: 0 }
    }

    pub fn elements(&self) -> Vec<DihedralElement> {
        (0..self.order()).map(|i| self.element_at(i)).collect()
    }

    /// Basis index `a + b N`.
    pub fn index_of(&self, x: DihedralElement) -> usize {
        x.rotation + x.flip * self.n
    }

    pub fn element_at(&self, index: usize) -> DihedralElement {
        DihedralElement {
            rotation: index % self.n,
            flip: index / self.n,
        }
    }

    pub fn multiply(&self, x: DihedralElement, y: DihedralElement) -> DihedralElement {
        let n = self.n;
        let c = if x.flip == 0 { y.rotation } else { (n - y.rotation) % n };
        DihedralElement {
            rotation: (x.rotation + c) % n,
            flip: (x.flip + y.flip) % 2,
        }
    }

    /// All hidden reflections `{(0,0), (k,1)}`, `k = 0..N`.
    pub fn reflections(&self) -> Vec<HiddenReflection> {
        (0..self.n).map(|k| HiddenReflection { k }).collect()
    }

    pub fn reflection(&self, k: usize) -> Result<HiddenReflection> {
        if k >= self.n {
            return Err(Error::domain(format!("reflection k = {k} out of range for {self}")));
        }
        Ok(HiddenReflection { k })
    }
}

impl fmt::Display for DihedralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.n)
    }
}

impl Serialize for DihedralSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `(rotation, flip)`, serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct DihedralElement {
    pub rotation: usize,
    pub flip: usize,
}

impl From<[usize; 2]> for DihedralElement {
    fn from([rotation, flip]: [usize; 2]) -> Self {
        Self { rotation, flip }
    }
}

impl From<DihedralElement> for [usize; 2] {
    fn from(x: DihedralElement) -> Self {
        [x.rotation, x.flip]
    }
}

/// The order-2 subgroup `{(0,0), (k,1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HiddenReflection {
    pub k: usize,
}

impl HiddenReflection {
    pub fn elements(&self) -> [DihedralElement; 2] {
        [
            DihedralElement { rotation: 0, flip: 0 },
            DihedralElement { rotation: self.k, flip: 1 },
        ]
    }

    pub fn label(&self) -> String {
        format!("({},1)", self.k)
    }

    /// Closure under the group law (inverses follow in a finite set).
    pub fn is_subgroup_of(&self, d: &DihedralSpec) -> bool {
        if self.k >= d.n() {
            return false;
        }
        let els = self.elements();
        els.iter()
            .all(|&x| els.iter().all(|&y| els.contains(&d.multiply(x, y))))
    }
}

/// The left cosets `(a,0) H = {(a,0), (a+k,1)}`, `a = 0..N`.
pub fn reflection_cosets(d: &DihedralSpec, h: &HiddenReflection) -> Result<Vec<[DihedralElement; 2]>> {
    if !h.is_subgroup_of(d) {
        return Err(Error::domain(format!("{} is not a subgroup of {d}", h.label())));
    }
    Ok((0..d.n())
        .map(|a| {
            let c = DihedralElement { rotation: a, flip: 0 };
            let [e, r] = h.elements();
            [d.multiply(c, e), d.multiply(c, r)]
        })
        .collect())
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}
