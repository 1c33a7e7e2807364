//! Finite quotients `G_k = G / St_G(k)` realized by truncated generators,
//! with exhaustive (capped) enumeration and subgroup machinery.

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggs::DefiningVector;
use crate::tree::TruncatedAutomorphism;

pub const DEFAULT_ENUM_CAP: usize = 10_000_000;
pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;

/// FNV-1a over the label array; stable across runs and platforms.
pub fn stable_hash(f: &TruncatedAutomorphism) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let shape = f.shape();
    for x in [shape.d(), shape.depth()]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .chain(f.labels().iter().copied())
    {
        h ^= x as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Image in `G_k / Phi(G_k) = C_p x C_p`: exponent sums of `a` and `b` mod `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FrattiniCoords {
    pub alpha: u32,
    pub beta: u32,
}

impl FrattiniCoords {
    pub fn new(alpha: i64, beta: i64, p: u32) -> Self {
        FrattiniCoords {
            alpha: alpha.rem_euclid(p as i64) as u32,
            beta: beta.rem_euclid(p as i64) as u32,
        }
    }

    pub fn add(self, other: Self, p: u32) -> Self {
        FrattiniCoords {
            alpha: (self.alpha + other.alpha) % p,
            beta: (self.beta + other.beta) % p,
        }
    }

    pub fn scale(self, k: i64, p: u32) -> Self {
        FrattiniCoords::new(self.alpha as i64 * k, self.beta as i64 * k, p)
    }

    pub fn is_zero(self) -> bool {
        self.alpha == 0 && self.beta == 0
    }

    /// Both coordinates nonzero.
    pub fn is_mixed(self) -> bool {
        self.alpha != 0 && self.beta != 0
    }

    pub fn independent(self, other: Self, p: u32) -> bool {
        let det = self.alpha as i64 * other.beta as i64 - self.beta as i64 * other.alpha as i64;
        det.rem_euclid(p as i64) != 0
    }
}

/// A group element tracked together with the Frattini image of the word that built it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub aut: TruncatedAutomorphism,
    pub coords: FrattiniCoords,
}

impl Element {
    pub fn new(aut: TruncatedAutomorphism, coords: FrattiniCoords) -> Self {
        Element { aut, coords }
    }

    fn p(&self) -> u32 {
        self.aut.shape().p()
    }

    pub fn mul(&self, other: &Element) -> Element {
        Element {
            aut: self.aut.mul(&other.aut),
            coords: self.coords.add(other.coords, self.p()),
        }
    }

    pub fn inv(&self) -> Element {
        Element {
            aut: self.aut.invert(),
            coords: self.coords.scale(-1, self.p()),
        }
    }

    pub fn pow(&self, k: i64) -> Element {
        Element {
            aut: self.aut.pow(k),
            coords: self.coords.scale(k, self.p()),
        }
    }

    /// `g^{-1} self g`.
    pub fn conj(&self, g: &Element) -> Element {
        Element {
            aut: self.aut.conjugate_by(&g.aut),
            coords: self.coords,
        }
    }

    pub fn comm(&self, other: &Element) -> Element {
        Element {
            aut: self.aut.commutator(&other.aut),
            coords: FrattiniCoords::default(),
        }
    }

    pub fn order(&self) -> u64 {
        self.aut.order()
    }

    pub fn truncate(&self, depth: u32) -> Element {
        Element {
            aut: self.aut.truncate(depth),
            coords: self.coords,
        }
    }
}

/// An enumerated subgroup; the sorted element set is the canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupHandle {
    pub generators: Vec<TruncatedAutomorphism>,
    pub elements: BTreeSet<TruncatedAutomorphism>,
}

impl SubgroupHandle {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &TruncatedAutomorphism) -> bool {
        self.elements.contains(g)
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Sorted stable hashes of the elements; independent of generator order.
    pub fn canonical_key(&self) -> Vec<u64> {
        let mut key: Vec<u64> = self.elements.iter().map(stable_hash).collect();
        key.sort_unstable();
        key
    }

    pub fn is_subset(&self, other: &SubgroupHandle) -> bool {
        self.elements.is_subset(&other.elements)
    }

    /// Serialized elements in key order, one per line.
    pub fn dump(&self) -> String {
        self.elements
            .iter()
            .map(|g| g.to_text())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Closure of `gens` under multiplication, as a finite subgroup.
pub fn subgroup_closure(
    identity: &TruncatedAutomorphism,
    gens: &[TruncatedAutomorphism],
    cap: usize,
) -> Result<SubgroupHandle> {
    let gens: Vec<TruncatedAutomorphism> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
    let mut seen: HashSet<TruncatedAutomorphism> = HashSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                let y = x.mul(g);
                if !seen.contains(&y) {
                    if seen.len() >= cap {
                        return Err(Error::CapExceeded {
                            what: "subgroup closure",
                            cap,
                            partial: seen.len(),
                        });
                    }
                    seen.insert(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(SubgroupHandle {
        generators: gens,
        elements: seen.into_iter().collect(),
    })
}

/// Smallest subgroup containing `gens` and normalized by every element of `by`.
pub fn normal_closure_under(
    identity: &TruncatedAutomorphism,
    gens: &[TruncatedAutomorphism],
    by: &[TruncatedAutomorphism],
    cap: usize,
) -> Result<SubgroupHandle> {
    let mut current: Vec<TruncatedAutomorphism> = Vec::new();
    let mut h = subgroup_closure(identity, &current, cap)?;
    let mut pending: Vec<TruncatedAutomorphism> = gens.to_vec();
    while let Some(g) = pending.pop() {
        if h.contains(&g) {
            continue;
        }
        current.push(g);
        h = subgroup_closure(identity, &current, cap)?;
        // new conjugates of every generator must be rechecked
        for x in &current {
            for c in by {
                let y = x.conjugate_by(c);
                if !h.contains(&y) {
                    pending.push(y);
                }
            }
        }
    }
    h.generators = current;
    Ok(h)
}

/// `G_k` for a defining vector.
#[derive(Debug, Clone)]
pub struct FiniteQuotient {
    /// `None` for groups given only by two generators.
    pub vector: Option<DefiningVector>,
    pub depth: u32,
    pub a: Element,
    pub b: Element,
    elements: Option<IndexMap<TruncatedAutomorphism, FrattiniCoords>>,
    frattini_consistent: bool,
}

impl FiniteQuotient {
    pub fn new(vector: &DefiningVector, depth: u32) -> Result<Self> {
        let mut q = Self::from_generators(vector.generator_a(depth)?, vector.generator_b(depth)?)?;
        q.vector = Some(vector.clone());
        Ok(q)
    }

    /// The group generated by two automorphisms of equal shape.
    pub fn from_generators(a: TruncatedAutomorphism, b: TruncatedAutomorphism) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::ShapeMismatch(a.shape().to_string(), b.shape().to_string()));
        }
        let p = a.shape().p();
        Ok(FiniteQuotient {
            vector: None,
            depth: a.depth(),
            a: Element::new(a, FrattiniCoords::new(1, 0, p)),
            b: Element::new(b, FrattiniCoords::new(0, 1, p)),
            elements: None,
            frattini_consistent: true,
        })
    }

    pub fn p(&self) -> u32 {
        self.a.aut.shape().p()
    }

    pub fn shape(&self) -> crate::tree::TreeShape {
        self.a.aut.shape()
    }

    pub fn identity(&self) -> Element {
        Element::new(
            TruncatedAutomorphism::identity(self.a.aut.shape()),
            FrattiniCoords::default(),
        )
    }

    pub fn generators(&self) -> [TruncatedAutomorphism; 2] {
        [self.a.aut.clone(), self.b.aut.clone()]
    }

    pub fn is_enumerated(&self) -> bool {
        self.elements.is_some()
    }

    /// BFS closure of `{a, b, a^-1, b^-1}` from the identity. Frontiers are
    /// expanded in parallel and merged in order, so the result is deterministic.
    pub fn enumerate(&mut self, cap: usize) -> Result<usize> {
        if let Some(e) = &self.elements {
            return Ok(e.len());
        }
        let steps = [self.a.clone(), self.b.clone(), self.a.inv(), self.b.inv()];
        let id = self.identity();
        let mut map: IndexMap<TruncatedAutomorphism, FrattiniCoords> = IndexMap::new();
        map.insert(id.aut.clone(), id.coords);
        let mut frontier = vec![id];
        let mut consistent = true;
        while !frontier.is_empty() {
            let products: Vec<Element> = frontier
                .par_iter()
                .flat_map_iter(|x| steps.iter().map(move |s| x.mul(s)))
                .collect();
            let mut next = Vec::new();
            for y in products {
                match map.get(&y.aut) {
                    Some(c) => {
                        if *c != y.coords {
                            consistent = false;
                        }
                    }
                    None => {
                        if map.len() >= cap {
                            return Err(Error::CapExceeded {
                                what: "enumeration",
                                cap,
                                partial: map.len(),
                            });
                        }
                        map.insert(y.aut.clone(), y.coords);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        self.frattini_consistent = consistent;
        let n = map.len();
        self.elements = Some(map);
        Ok(n)
    }

    fn enumerated(&self) -> Result<&IndexMap<TruncatedAutomorphism, FrattiniCoords>> {
        self.elements
            .as_ref()
            .ok_or_else(|| Error::Precondition("quotient is not enumerated".into()))
    }

    pub fn order(&self) -> Option<usize> {
        self.elements.as_ref().map(|e| e.len())
    }

    /// Elements in BFS order.
    pub fn elements(&self) -> Result<impl Iterator<Item = Element> + '_> {
        Ok(self
            .enumerated()?
            .iter()
            .map(|(g, c)| Element::new(g.clone(), *c)))
    }

    pub fn contains(&self, g: &TruncatedAutomorphism) -> Result<bool> {
        Ok(self.enumerated()?.contains_key(g))
    }

    /// Whether every word reaching an element gave the same Frattini image.
    pub fn frattini_consistent(&self) -> bool {
        self.frattini_consistent
    }

    pub fn coords_of(&self, g: &TruncatedAutomorphism) -> Result<FrattiniCoords> {
        self.enumerated()?
            .get(g)
            .copied()
            .ok_or_else(|| Error::Precondition("element not in quotient".into()))
    }

    pub fn element_order(&self, g: &Element) -> u64 {
        g.order()
    }

    pub fn whole(&self) -> Result<SubgroupHandle> {
        Ok(SubgroupHandle {
            generators: self.generators().to_vec(),
            elements: self.enumerated()?.keys().cloned().collect(),
        })
    }

    pub fn subgroup(&self, gens: &[TruncatedAutomorphism], cap: usize) -> Result<SubgroupHandle> {
        subgroup_closure(&self.identity().aut, gens, cap)
    }

    /// Frattini strategy needs depth >= 2; BFS strategy needs a known order.
    pub fn generates(&self, x: &Element, y: &Element, strategy: GenStrategy, cap: usize) -> Result<bool> {
        match strategy {
            GenStrategy::Frattini => {
                if self.depth < 2 {
                    return Err(Error::Precondition(
                        "Frattini coordinates need depth >= 2".into(),
                    ));
                }
                Ok(x.coords.independent(y.coords, self.p()))
            }
            GenStrategy::Bfs => {
                let total = self
                    .order()
                    .ok_or_else(|| Error::Precondition("quotient is not enumerated".into()))?;
                let h = self.subgroup(&[x.aut.clone(), y.aut.clone()], cap)?;
                Ok(h.order() == total)
            }
        }
    }

    pub fn normal_closure(&self, gens: &[TruncatedAutomorphism], cap: usize) -> Result<SubgroupHandle> {
        normal_closure_under(&self.identity().aut, gens, &self.generators(), cap)
    }

    pub fn derived_subgroup(&self, cap: usize) -> Result<SubgroupHandle> {
        self.gamma(2, cap)
    }

    /// Lower central series term `gamma_i` (`gamma_1 = G_k`).
    pub fn gamma(&self, i: u32, cap: usize) -> Result<SubgroupHandle> {
        let gens = self.generators();
        let mut term = self.subgroup(&gens, cap)?;
        for _ in 1..i {
            let new_gens: Vec<TruncatedAutomorphism> = term
                .generators
                .iter()
                .flat_map(|g| gens.iter().map(move |x| g.commutator(x)))
                .collect();
            term = self.normal_closure(&new_gens, cap)?;
        }
        Ok(term)
    }

    /// The whole lower central series down to the trivial group.
    pub fn lower_central_series(&self, cap: usize) -> Result<Vec<SubgroupHandle>> {
        let gens = self.generators();
        let mut series = vec![self.subgroup(&gens, cap)?];
        loop {
            let last = series.last().expect("nonempty");
            if last.is_trivial() {
                break;
            }
            let new_gens: Vec<TruncatedAutomorphism> = last
                .generators
                .iter()
                .flat_map(|g| gens.iter().map(move |x| g.commutator(x)))
                .collect();
            let next = self.normal_closure(&new_gens, cap)?;
            if next.order() == last.order() {
                break;
            }
            series.push(next);
        }
        Ok(series)
    }

    pub fn level_stabilizer(&self, m: u32) -> Result<SubgroupHandle> {
        if m > self.depth {
            return Err(Error::Precondition(format!(
                "level {m} exceeds depth {}",
                self.depth
            )));
        }
        let elements: BTreeSet<_> = self
            .enumerated()?
            .keys()
            .filter(|g| g.in_level_stabilizer(m))
            .cloned()
            .collect();
        Ok(SubgroupHandle {
            generators: elements.iter().cloned().collect(),
            elements,
        })
    }

    /// The order-`p` subgroup of `<x>`.
    pub fn socle(&self, x: &TruncatedAutomorphism) -> Result<SubgroupHandle> {
        socle(x)
    }

    /// Orbit of `h` under conjugation by `a` and `b`, as sorted canonical keys.
    pub fn subgroup_conjugacy_orbit(&self, h: &SubgroupHandle, cap: usize) -> Result<BTreeSet<Vec<u64>>> {
        Ok(conjugacy_orbit(h, &self.generators(), cap)?
            .into_iter()
            .map(|s| s.canonical_key())
            .collect())
    }

    /// `d(H) = log_p |H : H^p [H, H]|`.
    pub fn frattini_rank(&self, h: &SubgroupHandle, cap: usize) -> Result<u32> {
        frattini_rank(&self.identity().aut, h, self.p(), cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenStrategy {
    Frattini,
    Bfs,
}

pub fn socle(x: &TruncatedAutomorphism) -> Result<SubgroupHandle> {
    if x.is_identity() {
        return Err(Error::Precondition("the identity has no socle".into()));
    }
    let p = x.shape().p() as u64;
    let z = x.pow((x.order() / p) as i64);
    let id = TruncatedAutomorphism::identity(x.shape());
    subgroup_closure(&id, &[z], p as usize + 1)
}

/// Subgroups conjugate to `h` under the group generated by `by`.
pub fn conjugacy_orbit(
    h: &SubgroupHandle,
    by: &[TruncatedAutomorphism],
    cap: usize,
) -> Result<Vec<SubgroupHandle>> {
    let mut seen: HashSet<BTreeSet<TruncatedAutomorphism>> = HashSet::new();
    seen.insert(h.elements.clone());
    let mut orbit = vec![h.clone()];
    let mut i = 0;
    while i < orbit.len() {
        let cur = orbit[i].clone();
        for c in by {
            let elements: BTreeSet<_> = cur.elements.iter().map(|g| g.conjugate_by(c)).collect();
            if seen.contains(&elements) {
                continue;
            }
            if orbit.len() >= cap {
                return Err(Error::CapExceeded {
                    what: "conjugacy orbit",
                    cap,
                    partial: orbit.len(),
                });
            }
            seen.insert(elements.clone());
            orbit.push(SubgroupHandle {
                generators: cur.generators.iter().map(|g| g.conjugate_by(c)).collect(),
                elements,
            });
        }
        i += 1;
    }
    orbit.sort_by(|x, y| x.elements.cmp(&y.elements));
    Ok(orbit)
}

pub fn frattini_rank(
    identity: &TruncatedAutomorphism,
    h: &SubgroupHandle,
    p: u32,
    cap: usize,
) -> Result<u32> {
    let gens = &h.generators;
    let mut phi_gens: Vec<TruncatedAutomorphism> = gens.iter().map(|g| g.pow(p as i64)).collect();
    for (i, x) in gens.iter().enumerate() {
        for y in &gens[i + 1..] {
            phi_gens.push(x.commutator(y));
        }
    }
    let phi = normal_closure_under(identity, &phi_gens, gens, cap)?;
    let index = h.order() / phi.order();
    let mut rank = 0;
    let mut k = 1usize;
    while k < index {
        k *= p as usize;
        rank += 1;
    }
    if k != index {
        return Err(Error::Precondition(format!("index {index} is not a power of {p}")));
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str, depth: u32) -> FiniteQuotient {
        let v: DefiningVector = s.parse().unwrap();
        let mut q = FiniteQuotient::new(&v, depth).unwrap();
        q.enumerate(DEFAULT_ENUM_CAP).unwrap();
        q
    }

    #[test]
    fn depth_one_is_cyclic() {
        let g = q("p=2 n=2 e=1,0,1", 1);
        assert_eq!(g.order(), Some(4));
        assert!(g.gamma(2, 100).unwrap().is_trivial());
    }

    #[test]
    fn quotient_tower_divides() {
        for s in ["p=2 n=2 e=1,0,1", "p=2 n=2 e=2,0,2", "p=2 n=2 e=2,0,0"] {
            let orders: Vec<usize> = (1..=3).map(|k| q(s, k).order().unwrap()).collect();
            assert_eq!(orders[1] % orders[0], 0);
            assert_eq!(orders[2] % orders[1], 0);
        }
    }

    #[test]
    fn frattini_coordinates_well_defined_from_depth_two() {
        assert!(q("p=2 n=2 e=1,0,1", 3).frattini_consistent());
        assert!(!q("p=2 n=2 e=1,0,1", 1).frattini_consistent());
    }

    #[test]
    fn generation_strategies() {
        let g = q("p=2 n=2 e=1,0,1", 3);
        let ab = g.a.mul(&g.b);
        assert!(g.generates(&g.a, &ab, GenStrategy::Frattini, 1000).unwrap());
        assert!(g.generates(&g.a, &ab, GenStrategy::Bfs, 1_000_000).unwrap());
        let a3 = g.a.pow(3);
        assert!(!g.generates(&g.a, &a3, GenStrategy::Frattini, 1000).unwrap());
        assert!(!g.generates(&g.a, &a3, GenStrategy::Bfs, 1_000_000).unwrap());
        let g1 = q("p=2 n=2 e=1,0,1", 1);
        assert!(g1.generates(&g1.a, &g1.b, GenStrategy::Frattini, 10).is_err());
    }

    #[test]
    fn socles() {
        let g = q("p=2 n=2 e=1,0,1", 3);
        let s = g.socle(&g.a.aut).unwrap();
        assert_eq!(s.order(), 2);
        assert!(s.contains(&g.a.aut.pow(2)));
        let ab = g.a.mul(&g.b).aut;
        assert_eq!(g.socle(&ab).unwrap(), g.socle(&ab.pow(3)).unwrap());
        assert!(g.socle(&g.identity().aut).is_err());
    }

    #[test]
    fn level_stabilizers() {
        let g = q("p=2 n=2 e=1,0,1", 3);
        assert_eq!(g.level_stabilizer(0).unwrap().order(), g.order().unwrap());
        for m in 1..=3 {
            let st = g.level_stabilizer(m).unwrap();
            assert_eq!(g.order().unwrap() / st.order(), q("p=2 n=2 e=1,0,1", m).order().unwrap());
        }
        assert!(g.level_stabilizer(3).unwrap().is_trivial());
    }

    #[test]
    fn orbits_and_ranks() {
        let g = q("p=2 n=2 e=1,0,1", 3);
        let whole = g.whole().unwrap();
        assert_eq!(g.frattini_rank(&whole, DEFAULT_ORBIT_CAP).unwrap(), 2);
        let cyc = g.subgroup(std::slice::from_ref(&g.a.aut), 100).unwrap();
        assert_eq!(g.frattini_rank(&cyc, 100).unwrap(), 1);
        let st = g.level_stabilizer(2).unwrap();
        let central = g
            .whole()
            .unwrap()
            .elements
            .into_iter()
            .find(|z| !z.is_identity() && g.generators().iter().all(|x| z.conjugate_by(x) == *z));
        if let Some(z) = central {
            let h = g.subgroup(&[z], 100).unwrap();
            assert_eq!(g.subgroup_conjugacy_orbit(&h, 100).unwrap().len(), 1);
        }
        let h = g.subgroup(&[st.elements.iter().nth(1).unwrap().clone()], 100).unwrap();
        let fwd = conjugacy_orbit(&h, &[g.a.aut.clone(), g.b.aut.clone()], 1000).unwrap();
        let rev = conjugacy_orbit(&h, &[g.b.aut.clone(), g.a.aut.clone()], 1000).unwrap();
        assert_eq!(fwd, rev);
    }
}
