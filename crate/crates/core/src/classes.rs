//! Conjugacy invariants for elements of the depth-`k` quotients.
//!
//! An automorphism with root rotation `r` splits the first level into
//! `gcd(r, d)` cycles; the product of the sections along a cycle is defined
//! up to conjugacy one level down, and conjugating by a rooted rotation
//! shifts the cycles cyclically. Recursing gives a key that is equal for
//! conjugate elements of the full label group. Optional flags (membership of
//! each cycle product in normal subgroups of `G`) refine it to an invariant
//! of conjugacy inside `G`, since sections of elements of `G` lie in `G`.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::ggs::DefiningVector;
use crate::pcgs::LevelPcgs;
use crate::tree::{gcd, TruncatedAutomorphism};

/// Membership of an element in `gamma_2(G_t)` and `gamma_3(G_t)`, for section
/// depths `t` up to a limit.
#[derive(Debug, Clone, Default)]
pub struct NormalFlags {
    series: BTreeMap<u32, (LevelPcgs, LevelPcgs)>,
}

impl NormalFlags {
    pub fn none() -> Self {
        NormalFlags::default()
    }

    pub fn new(v: &DefiningVector, max_depth: u32) -> Result<Self> {
        let mut series = BTreeMap::new();
        for t in 1..=max_depth {
            let shape = v.shape(t)?;
            let a = v.generator_a(t)?;
            let b = v.generator_b(t)?;
            let gens = [a.clone(), b.clone()];
            let ab = a.commutator(&b);
            let g2 = LevelPcgs::normal_closure(shape, std::slice::from_ref(&ab), &gens);
            let g3 = LevelPcgs::normal_closure(shape, &[ab.commutator(&a), ab.commutator(&b)], &gens);
            series.insert(t, (g2, g3));
        }
        Ok(NormalFlags { series })
    }

    pub fn max_depth(&self) -> u32 {
        self.series.keys().next_back().copied().unwrap_or(0)
    }

    pub fn flag(&self, g: &TruncatedAutomorphism) -> u8 {
        match self.series.get(&g.depth()) {
            None => 0,
            Some((g2, g3)) => {
                let mut f = 1;
                if g2.contains(g) {
                    f |= 2;
                    if g3.contains(g) {
                        f |= 4;
                    }
                }
                f
            }
        }
    }
}

/// Canonical conjugacy key.
pub fn class_key(f: &TruncatedAutomorphism, flags: &NormalFlags) -> Vec<u8> {
    let mut out = Vec::new();
    encode(f, flags, &mut out);
    out
}

fn encode(f: &TruncatedAutomorphism, flags: &NormalFlags, out: &mut Vec<u8>) {
    if f.depth() == 0 {
        return;
    }
    let d = f.shape().d() as usize;
    let r = f.root_label() as usize;
    let g = gcd(r as u64, d as u64) as usize;
    let len = d / g;
    let children: Vec<Vec<u8>> = (0..g)
        .map(|c| {
            let mut prod = f.section_at(1, c);
            for step in 1..len {
                prod = prod.mul(&f.section_at(1, (c + step * r) % d));
            }
            let mut key = vec![flags.flag(&prod)];
            encode(&prod, flags, &mut key);
            key
        })
        .collect();
    let best = (0..g)
        .map(|s| children[s..].iter().chain(children[..s].iter()).collect::<Vec<_>>())
        .min()
        .expect("at least one cycle");
    out.push(r as u8);
    for child in best {
        out.extend_from_slice(&(child.len() as u32).to_le_bytes());
        out.extend_from_slice(child);
    }
}
