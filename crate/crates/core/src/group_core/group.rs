use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite group given by its multiplication table.
///
/// Elements are the indices `0..order`. Conjugacy classes are listed in order
/// of their least element, and each class is sorted. Equality compares the
/// multiplication tables and ignores names.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    name: Option<String>,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.mult == other.mult
    }
}

impl Eq for FiniteGroup {}

/// Raw JSON group description: `{ "order": n, "mult": [[...]], "name": ... }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpec {
    pub order: usize,
    pub mult: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        if self.mult.len() != self.order {
            return Err(Error::InvalidGroup(format!(
                "declared order {} but table has {} rows",
                self.order,
                self.mult.len()
            )));
        }
        let mut g = validate_group(self.mult.clone())?;
        g.name = self.name.clone();
        Ok(g)
    }
}

/// Checks a raw table and computes identity, inverses and conjugacy classes.
pub fn validate_group(mult: Vec<Vec<usize>>) -> Result<FiniteGroup> {
    let n = mult.len();
    if n == 0 {
        return Err(Error::InvalidGroup("empty table".into()));
    }
    for (a, row) in mult.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidGroup(format!(
                "row {a} has length {} in a table with {n} rows",
                row.len()
            )));
        }
        if let Some(&bad) = row.iter().find(|&&x| x >= n) {
            return Err(Error::InvalidGroup(format!(
                "row {a} contains out-of-range entry {bad}"
            )));
        }
    }

    let identity = (0..n)
        .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
        .ok_or_else(|| Error::InvalidGroup("no two-sided identity element".into()))?;

    for a in 0..n {
        for b in 0..n {
            let ab = mult[a][b];
            for c in 0..n {
                if mult[ab][c] != mult[a][mult[b][c]] {
                    return Err(Error::InvalidGroup(format!(
                        "not associative on triple ({a}, {b}, {c})"
                    )));
                }
            }
        }
    }

    let mut inv = Vec::with_capacity(n);
    for (g, row) in mult.iter().enumerate() {
        let h = (0..n)
            .find(|&h| mult[h][g] == identity && row[h] == identity)
            .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
        inv.push(h);
    }

    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for g in 0..n {
        if class_of[g] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members: Vec<usize> = (0..n).map(|h| mult[mult[h][g]][inv[h]]).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class_of[m] = id;
        }
        classes.push(members);
    }

    Ok(FiniteGroup {
        name: None,
        mult,
        inv,
        identity,
        classes,
        class_of,
    })
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn to_spec(&self) -> GroupSpec {
        GroupSpec {
            order: self.order(),
            mult: self.mult.clone(),
            name: self.name.clone(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.classes.len() == self.order()
    }

    pub fn trivial() -> Self {
        validate_group(vec![vec![0]])
            .expect("trivial table")
            .with_name("trivial")
    }

    /// Cyclic group of order `n`, element `k` standing for the generator to the `k`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let mult = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        Ok(validate_group(mult)?.with_name(format!("Z{n}")))
    }

    /// Symmetric group on `n` points; elements are permutations in
    /// lexicographic order, so the identity is element 0.
    pub fn symmetric(n: usize) -> Result<Self> {
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            perms.push(current.clone());
            if !next_permutation(&mut current) {
                break;
            }
        }
        Ok(from_permutations(&perms)?.with_name(format!("S{n}")))
    }

    /// Alternating group on `n` points, even permutations in lexicographic order.
    pub fn alternating(n: usize) -> Result<Self> {
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            if permutation_is_even(&current) {
                perms.push(current.clone());
            }
            if !next_permutation(&mut current) {
                break;
            }
        }
        Ok(from_permutations(&perms)?.with_name(format!("A{n}")))
    }

    /// Dihedral group of order `2n`: rotations `0..n`, then reflections.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!(
                "dihedral group needs n >= 2, got {n}"
            )));
        }
        let mut perms: Vec<Vec<usize>> = (0..n)
            .map(|k| (0..n).map(|i| (i + k) % n).collect())
            .collect();
        perms.extend((0..n).map(|k| (0..n).map(|i| (k + n - i) % n).collect::<Vec<_>>()));
        Ok(from_permutations(&perms)?.with_name(format!("D{n}")))
    }

    /// Klein four-group `Z2 x Z2`.
    pub fn klein_four() -> Self {
        let mult = (0..4)
            .map(|a: usize| (0..4).map(|b: usize| a ^ b).collect())
            .collect();
        validate_group(mult).expect("klein table").with_name("V4")
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`.
    pub fn quaternion() -> Self {
        // (sign, unit) with unit 0=1, 1=i, 2=j, 3=k; index = 4*sign + unit
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let mult = (0..8)
            .map(|a: usize| {
                (0..8)
                    .map(|b: usize| {
                        let (s, u) = UNIT[a % 4][b % 4];
                        4 * ((s + a / 4 + b / 4) % 2) + u
                    })
                    .collect()
            })
            .collect();
        validate_group(mult)
            .expect("quaternion table")
            .with_name("Q8")
    }

    /// Named presets: `trivial`, `Z<n>`, `S<n>`, `A<n>`, `D<n>`, `V4`, `Q8`.
    pub fn preset(name: &str) -> Result<Self> {
        let numeric = |prefix: &str| {
            name.strip_prefix(prefix)
                .and_then(|s| s.parse::<usize>().ok())
        };
        match name {
            "trivial" | "1" | "Z1" => return Ok(FiniteGroup::trivial()),
            "V4" | "Z2xZ2" => return Ok(FiniteGroup::klein_four()),
            "Q8" => return Ok(FiniteGroup::quaternion()),
            _ => {}
        }
        if let Some(n) = numeric("Z") {
            return FiniteGroup::cyclic(n);
        }
        if let Some(n) = numeric("S").filter(|&n| (1..=5).contains(&n)) {
            return FiniteGroup::symmetric(n);
        }
        if let Some(n) = numeric("A").filter(|&n| (1..=5).contains(&n)) {
            return FiniteGroup::alternating(n);
        }
        if let Some(n) = numeric("D") {
            return FiniteGroup::dihedral(n);
        }
        Err(Error::Config(format!("unknown group preset '{name}'")))
    }

    /// Product of a word of element indices, left to right.
    pub fn element_of_word(&self, word: &[usize]) -> usize {
        word.iter().fold(self.identity, |acc, &g| self.mul(acc, g))
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn permutation_is_even(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Builds the table of a permutation group listed element by element, with
/// `(a*b)(x) = a(b(x))`.
pub fn from_permutations(perms: &[Vec<usize>]) -> Result<FiniteGroup> {
    let index: HashMap<&[usize], usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let mut mult = Vec::with_capacity(perms.len());
    for a in perms {
        let mut row = Vec::with_capacity(perms.len());
        for b in perms {
            let ab: Vec<usize> = b.iter().map(|&x| a[x]).collect();
            let k = index
                .get(ab.as_slice())
                .ok_or_else(|| Error::InvalidGroup("permutation list is not closed".into()))?;
            row.push(*k);
        }
        mult.push(row);
    }
    validate_group(mult)
}

/// Homomorphism between finite groups given as an element map.
#[derive(Debug, Clone)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    map: Vec<usize>,
    injective: bool,
}

impl GroupHom {
    pub fn new(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        map: Vec<usize>,
    ) -> Result<Self> {
        if map.len() != source.order() {
            return Err(Error::InvalidHom(format!(
                "map has {} entries for a source of order {}",
                map.len(),
                source.order()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&x| x >= target.order()) {
            return Err(Error::InvalidHom(format!(
                "image {bad} outside target of order {}",
                target.order()
            )));
        }
        for g in source.elements() {
            for h in source.elements() {
                if map[source.mul(g, h)] != target.mul(map[g], map[h]) {
                    return Err(Error::InvalidHom(format!(
                        "map(g*h) != map(g)*map(h) for g = {g}, h = {h}"
                    )));
                }
            }
        }
        let mut seen = vec![false; target.order()];
        let injective = map.iter().all(|&x| !std::mem::replace(&mut seen[x], true));
        Ok(GroupHom {
            source,
            target,
            map,
            injective,
        })
    }

    /// Same as [`GroupHom::new`] but rejects non-injective maps.
    pub fn injection(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        map: Vec<usize>,
    ) -> Result<Self> {
        let hom = GroupHom::new(source, target, map)?;
        if !hom.injective {
            return Err(Error::InvalidHom(format!(
                "map {:?} is not injective",
                hom.map
            )));
        }
        Ok(hom)
    }

    pub fn identity(group: Arc<FiniteGroup>) -> Self {
        let map = group.elements().collect();
        GroupHom {
            source: group.clone(),
            target: group,
            map,
            injective: true,
        }
    }

    /// Inclusion of the one-element group.
    pub fn from_trivial(target: Arc<FiniteGroup>) -> Self {
        GroupHom {
            source: Arc::new(FiniteGroup::trivial()),
            map: vec![target.identity()],
            target,
            injective: true,
        }
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn apply(&self, g: usize) -> usize {
        self.map[g]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupHom) -> Result<GroupHom> {
        if **other.source() != *self.target {
            return Err(Error::InvalidHom(
                "composition of non-matching homomorphisms".into(),
            ));
        }
        let map = self.map.iter().map(|&x| other.apply(x)).collect();
        GroupHom::new(self.source.clone(), other.target.clone(), map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_class_sizes(g: &FiniteGroup) -> Vec<usize> {
        let n = g.order();
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let mut size = 0;
            for (y, mark) in seen.iter_mut().enumerate() {
                let conj = (0..n).any(|h| g.mul(g.mul(h, x), g.inv(h)) == y);
                if conj {
                    *mark = true;
                    size += 1;
                }
            }
            sizes.push(size);
        }
        sizes
    }

    #[test]
    fn trivial_group() {
        let g = validate_group(vec![vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.classes().len(), 1);
    }

    #[test]
    fn z2_has_singleton_classes() {
        let g = validate_group(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.classes(), &[vec![0], vec![1]]);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn s3_classes() {
        let g = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(g.order(), 6);
        let sizes: Vec<usize> = g.classes().iter().map(|c| c.len()).collect();
        assert_eq!(sizes, vec![1, 3, 2]);
        assert_eq!(sizes, brute_force_class_sizes(&g));
        for class in g.classes() {
            for &a in class {
                for &b in class {
                    assert!((0..6).any(|h| g.mul(g.mul(h, a), g.inv(h)) == b));
                }
            }
        }
    }

    #[test]
    fn presets_validate() {
        for (name, order, classes) in [
            ("Z4", 4, 4),
            ("S4", 24, 5),
            ("A4", 12, 4),
            ("D4", 8, 5),
            ("V4", 4, 4),
            ("Q8", 8, 5),
            ("D3", 6, 3),
        ] {
            let g = FiniteGroup::preset(name).unwrap();
            assert_eq!(g.order(), order, "{name}");
            assert_eq!(g.classes().len(), classes, "{name}");
        }
        assert!(FiniteGroup::preset("nope").is_err());
    }

    #[test]
    fn rejects_non_associative() {
        // a Latin square with identity 0 that is not a group table
        let table = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = validate_group(table).unwrap_err();
        assert!(err.to_string().contains("associative"), "{err}");
    }

    #[test]
    fn rejects_missing_identity_and_bad_shape() {
        assert!(validate_group(vec![vec![1, 1], vec![1, 1]]).is_err());
        assert!(validate_group(vec![vec![0, 1], vec![1]]).is_err());
        assert!(validate_group(vec![vec![0, 2], vec![1, 0]]).is_err());
    }

    #[test]
    fn rejects_missing_inverse() {
        // monoid {0,1} with 1*1 = 1 is associative with identity 0 but 1 has no inverse
        let err = validate_group(vec![vec![0, 1], vec![1, 1]]).unwrap_err();
        assert!(err.to_string().contains("inverse"), "{err}");
    }

    #[test]
    fn homomorphism_checks() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let hom = GroupHom::injection(z2.clone(), z4.clone(), vec![0, 2]).unwrap();
        assert!(hom.is_injective());
        assert!(GroupHom::new(z2.clone(), z4.clone(), vec![0, 1]).is_err());
        let quotient = GroupHom::new(z4.clone(), z2.clone(), vec![0, 1, 0, 1]).unwrap();
        assert!(!quotient.is_injective());
        assert!(GroupHom::injection(z4, z2, vec![0, 1, 0, 1]).is_err());
    }

    #[test]
    fn group_spec_round_trip() {
        let spec: GroupSpec =
            serde_json::from_str(r#"{"order": 2, "mult": [[0,1],[1,0]], "name": "Z2"}"#).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.name(), Some("Z2"));
        let bad: GroupSpec =
            serde_json::from_str(r#"{"order": 3, "mult": [[0,1],[1,0]]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
