//! Polycyclic generating sequences adapted to the level filtration.
//!
//! Every subgroup `H` of a depth-`k` quotient has the series
//! `H >= H ∩ St(1) >= ... >= H ∩ St(k) = 1` whose factors embed, via the
//! labels of one level, into `(Z/p^n)^{d^j}`. Each layer keeps an echelon
//! basis of that image; sifting an element through the layers decides
//! membership without enumerating `H`.

use std::collections::BTreeMap;

use crate::ggs::valuation;
use crate::tree::{TreeShape, TruncatedAutomorphism};

#[derive(Debug, Clone)]
struct Pivot {
    /// Pivot label is exactly `p^val`.
    val: u32,
    elem: TruncatedAutomorphism,
}

/// Outcome of sifting an element through the layers.
#[derive(Debug, Clone)]
pub enum Sift {
    Member,
    /// Residue stuck at `level`, first nonzero label at `index`.
    Residue {
        level: u32,
        index: usize,
        residue: TruncatedAutomorphism,
    },
}

#[derive(Debug, Clone)]
pub struct LevelPcgs {
    shape: TreeShape,
    layers: Vec<BTreeMap<usize, Pivot>>,
    /// Extra elements the subgroup must be normalized by.
    normalizers: Vec<TruncatedAutomorphism>,
}

fn inverse_mod(u: u64, m: u64) -> u64 {
    // m is a prime power and gcd(u, m) = 1
    (1..m).find(|x| (u * x) % m == 1).unwrap_or(1)
}

impl LevelPcgs {
    pub fn trivial(shape: TreeShape) -> Self {
        LevelPcgs {
            shape,
            layers: vec![BTreeMap::new(); shape.depth() as usize],
            normalizers: Vec::new(),
        }
    }

    /// The subgroup generated by `gens`.
    pub fn subgroup(shape: TreeShape, gens: &[TruncatedAutomorphism]) -> Self {
        let mut s = Self::trivial(shape);
        s.extend(gens);
        s
    }

    /// The smallest subgroup containing `gens` and normalized by `by`.
    pub fn normal_closure(
        shape: TreeShape,
        gens: &[TruncatedAutomorphism],
        by: &[TruncatedAutomorphism],
    ) -> Self {
        let mut s = Self::trivial(shape);
        s.normalizers = by.to_vec();
        s.extend(gens);
        s
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    /// Basis elements, shallow layers first.
    pub fn generators(&self) -> Vec<TruncatedAutomorphism> {
        self.layers
            .iter()
            .flat_map(|l| l.values().map(|pv| pv.elem.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `log_p` of the subgroup order.
    pub fn log_order(&self) -> u64 {
        let n = self.shape.n();
        self.layers
            .iter()
            .flat_map(|l| l.values())
            .map(|pv| (n - pv.val) as u64)
            .sum()
    }

    /// Order when it fits in 128 bits.
    pub fn order(&self) -> Option<u128> {
        (self.shape.p() as u128).checked_pow(self.log_order().try_into().ok()?)
    }

    /// `log_p |St_H(j) : St_H(j+1)|` for every level `j`.
    pub fn layer_log_orders(&self) -> Vec<u64> {
        let n = self.shape.n();
        self.layers
            .iter()
            .map(|l| l.values().map(|pv| (n - pv.val) as u64).sum())
            .collect()
    }

    pub fn contains(&self, g: &TruncatedAutomorphism) -> bool {
        matches!(self.sift(g.clone()), Sift::Member)
    }

    pub fn contains_all(&self, gens: &[TruncatedAutomorphism]) -> bool {
        gens.iter().all(|g| self.contains(g))
    }

    pub fn is_subgroup_of(&self, other: &LevelPcgs) -> bool {
        other.contains_all(&self.generators())
    }

    pub fn same_as(&self, other: &LevelPcgs) -> bool {
        self.log_order() == other.log_order() && self.is_subgroup_of(other)
    }

    fn first_nonzero(&self, g: &TruncatedAutomorphism, level: u32) -> Option<usize> {
        let off = self.shape.level_offset(level);
        let w = self.shape.level_size(level);
        g.labels()[off..off + w].iter().position(|&x| x != 0)
    }

    pub fn sift(&self, mut g: TruncatedAutomorphism) -> Sift {
        let d = self.shape.d() as u64;
        let p = self.shape.p() as u64;
        let n = self.shape.n();
        let off = |lvl: u32| self.shape.level_offset(lvl);
        for level in 0..self.shape.depth() {
            while let Some(i) = self.first_nonzero(&g, level) {
                let x = g.labels()[off(level) + i] as u64;
                match self.layers[level as usize].get(&i) {
                    Some(pv) if valuation(p, x, n) >= pv.val => {
                        let k = x / p.pow(pv.val);
                        g = g.mul(&pv.elem.pow(-(k as i64) % d as i64));
                    }
                    _ => {
                        return Sift::Residue {
                            level,
                            index: i,
                            residue: g,
                        }
                    }
                }
            }
        }
        Sift::Member
    }

    /// Add elements and close under products, powers, commutators and
    /// conjugation by the normalizers.
    pub fn extend(&mut self, gens: &[TruncatedAutomorphism]) {
        let mut queue: Vec<TruncatedAutomorphism> = gens.to_vec();
        loop {
            self.drain(&mut queue);
            // recheck every relation against the final basis
            let basis = self.generators();
            for (i, x) in basis.iter().enumerate() {
                queue.push(self.overflow_power(x));
                for y in &basis[i + 1..] {
                    queue.push(x.commutator(y));
                }
                for c in &self.normalizers {
                    queue.push(x.commutator(c));
                }
            }
            queue.retain(|g| !self.contains(g));
            if queue.is_empty() {
                return;
            }
        }
    }

    /// `x^{p^{n-v}}` where `p^v` is the pivot of `x`; it lies one step deeper.
    fn overflow_power(&self, x: &TruncatedAutomorphism) -> TruncatedAutomorphism {
        let p = self.shape.p() as u64;
        let n = self.shape.n();
        match x.first_moved_level() {
            None => x.clone(),
            Some(m) => {
                let level = m - 1;
                let i = self.first_nonzero(x, level).expect("moved level");
                let lab = x.labels()[self.shape.level_offset(level) + i] as u64;
                let v = valuation(p, lab, n);
                x.pow(p.pow(n - v) as i64)
            }
        }
    }

    fn drain(&mut self, queue: &mut Vec<TruncatedAutomorphism>) {
        let p = self.shape.p() as u64;
        let n = self.shape.n();
        let d = self.shape.d() as u64;
        while let Some(g) = queue.pop() {
            let Sift::Residue {
                level,
                index,
                residue,
            } = self.sift(g)
            else {
                continue;
            };
            let x = residue.labels()[self.shape.level_offset(level) + index] as u64;
            let v = valuation(p, x, n);
            let unit = x / p.pow(v);
            let h = residue.pow(inverse_mod(unit, d) as i64);
            let layer = &mut self.layers[level as usize];
            if let Some(old) = layer.remove(&index) {
                queue.push(old.elem);
            }
            let others = self.generators();
            queue.push(self.overflow_power(&h));
            for y in others.iter().chain(self.normalizers.iter()) {
                queue.push(h.commutator(y));
            }
            self.layers[level as usize].insert(index, Pivot { val: v, elem: h });
        }
    }
}

/// `d(H) = log_p |H : H^p [H, H]|` for `H = <gens>`, without enumeration.
pub fn frattini_rank(shape: TreeShape, gens: &[TruncatedAutomorphism]) -> u64 {
    let p = shape.p() as i64;
    let h = LevelPcgs::subgroup(shape, gens);
    let mut phi_gens: Vec<TruncatedAutomorphism> = gens.iter().map(|g| g.pow(p)).collect();
    for (i, x) in gens.iter().enumerate() {
        for y in &gens[i + 1..] {
            phi_gens.push(x.commutator(y));
        }
    }
    let phi = LevelPcgs::normal_closure(shape, &phi_gens, gens);
    h.log_order() - phi.log_order()
}
