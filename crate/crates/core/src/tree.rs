//! Depth-truncated automorphisms of the `d`-adic rooted tree whose vertex
//! labels are all powers of the rotation `x -> x + 1 (mod d)`.
//!
//! The action is on the right: `(wx)^f = w^f (x + f(w))`, and a product `fg`
//! means "first `f`, then `g`". Labels are stored breadth first with children
//! in lexicographic order, so two automorphisms are equal exactly when their
//! label arrays are equal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported branching degree. Labels are stored as `u8`.
pub const MAX_DEGREE: u32 = 128;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeShape {
    p: u32,
    n: u32,
    d: u32,
    depth: u32,
}

impl TreeShape {
    pub fn new(p: u32, n: u32, depth: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidShape(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidShape("n must be at least 1".into()));
        }
        let d = p
            .checked_pow(n)
            .filter(|&d| d <= MAX_DEGREE)
            .ok_or_else(|| Error::InvalidShape(format!("degree {p}^{n} exceeds {MAX_DEGREE}")))?;
        let shape = TreeShape { p, n, d, depth };
        shape
            .leaf_count_checked()
            .filter(|&l| l <= 1 << 26)
            .ok_or_else(|| Error::InvalidShape(format!("depth {depth} too large for degree {d}")))?;
        Ok(shape)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Same degree, different depth.
    pub fn with_depth(&self, depth: u32) -> TreeShape {
        TreeShape { depth, ..*self }
    }

    fn leaf_count_checked(&self) -> Option<usize> {
        (self.d as usize).checked_pow(self.depth)
    }

    pub fn leaf_count(&self) -> usize {
        (self.d as usize).pow(self.depth)
    }

    /// Number of vertices on `level`.
    pub fn level_size(&self, level: u32) -> usize {
        (self.d as usize).pow(level)
    }

    /// Offset of the first vertex of `level` in breadth-first order.
    pub fn level_offset(&self, level: u32) -> usize {
        (self.level_size(level) - 1) / (self.d as usize - 1)
    }

    /// `(d^depth - 1) / (d - 1)`.
    pub fn internal_count(&self) -> usize {
        self.level_offset(self.depth)
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({}^{}, depth {})", self.p, self.n, self.depth)
    }
}

/// A vertex given by its path of letters in `1..=d`; the empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex(pub Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Vertex at `level` with the given lexicographic index.
    pub fn from_index(d: u32, level: u32, mut index: usize) -> Self {
        let mut letters = vec![0; level as usize];
        for slot in letters.iter_mut().rev() {
            *slot = (index % d as usize) as u32 + 1;
            index /= d as usize;
        }
        Vertex(letters)
    }

    /// Lexicographic index within its level.
    pub fn index(&self, d: u32) -> Result<usize> {
        let mut idx = 0usize;
        for &x in &self.0 {
            if x == 0 || x > d {
                return Err(Error::VertexOutOfRange {
                    vertex: self.to_string(),
                    depth: 0,
                });
            }
            idx = idx * d as usize + (x - 1) as usize;
        }
        Ok(idx)
    }

    /// The path made of `len` copies of the last letter `d`.
    pub fn rightmost(d: u32, len: usize) -> Self {
        Vertex(vec![d; len])
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Dense action on the leaves (level `depth`), 1-based images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafPermutation {
    pub shape: TreeShape,
    pub images: Vec<u32>,
}

impl LeafPermutation {
    pub fn identity(shape: TreeShape) -> Self {
        LeafPermutation {
            shape,
            images: (1..=shape.leaf_count() as u32).collect(),
        }
    }

    /// `self` then `other`.
    pub fn then(&self, other: &LeafPermutation) -> LeafPermutation {
        let images = self
            .images
            .iter()
            .map(|&x| other.images[x as usize - 1])
            .collect();
        LeafPermutation {
            shape: self.shape,
            images,
        }
    }

    pub fn cycle_lengths(&self) -> Vec<u64> {
        let mut seen = vec![false; self.images.len()];
        let mut lengths = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize - 1;
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    pub fn order(&self) -> u64 {
        self.cycle_lengths().into_iter().fold(1, lcm)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.images.len()];
        for &x in &self.images {
            let i = x as usize;
            if i == 0 || i > seen.len() || seen[i - 1] {
                return false;
            }
            seen[i - 1] = true;
        }
        true
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruncatedAutomorphism {
    shape: TreeShape,
    labels: Vec<u8>,
}

impl fmt::Debug for TruncatedAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Aut[d={}]({})", self.shape.d, self)
    }
}

impl TruncatedAutomorphism {
    pub fn identity(shape: TreeShape) -> Self {
        TruncatedAutomorphism {
            shape,
            labels: vec![0; shape.internal_count()],
        }
    }

    /// Root label `exponent`, every other label zero.
    pub fn rooted(shape: TreeShape, exponent: i64) -> Self {
        let mut f = Self::identity(shape);
        if shape.depth > 0 {
            f.labels[0] = exponent.rem_euclid(shape.d as i64) as u8;
        }
        f
    }

    pub fn from_labels(shape: TreeShape, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != shape.internal_count() {
            return Err(Error::InvalidShape(format!(
                "expected {} labels, got {}",
                shape.internal_count(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l as u32 >= shape.d) {
            return Err(Error::InvalidShape("label out of range".into()));
        }
        Ok(TruncatedAutomorphism { shape, labels })
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn depth(&self) -> u32 {
        self.shape.depth
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, v: &Vertex) -> Result<u32> {
        if v.len() >= self.shape.depth as usize {
            return Err(self.out_of_range(v));
        }
        let idx = v.index(self.shape.d).map_err(|_| self.out_of_range(v))?;
        Ok(self.labels[self.shape.level_offset(v.len() as u32) + idx] as u32)
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&l| l == 0)
    }

    /// Label exponent at the root (0 at depth 0).
    pub fn root_label(&self) -> u32 {
        self.labels.first().copied().unwrap_or(0) as u32
    }

    fn out_of_range(&self, v: &Vertex) -> Error {
        Error::VertexOutOfRange {
            vertex: v.to_string(),
            depth: self.shape.depth,
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(
                self.shape.to_string(),
                other.shape.to_string(),
            ));
        }
        Ok(())
    }

    /// `f` then `g`: `(fg)(w) = f(w) + g(w^f)`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_same(g)?;
        Ok(self.mul(g))
    }

    /// Unchecked composition; shapes must agree.
    pub(crate) fn mul(&self, g: &Self) -> Self {
        debug_assert_eq!(self.shape, g.shape);
        let d = self.shape.d as usize;
        let depth = self.shape.depth;
        let mut out = vec![0u8; self.labels.len()];
        let mut img: Vec<usize> = vec![0];
        let mut next: Vec<usize> = Vec::new();
        for level in 0..depth {
            let off = self.shape.level_offset(level);
            let last = level + 1 == depth;
            if !last {
                next.clear();
                next.resize(img.len() * d, 0);
            }
            for (i, &im) in img.iter().enumerate() {
                let fl = self.labels[off + i] as usize;
                out[off + i] = ((fl + g.labels[off + im] as usize) % d) as u8;
                if !last {
                    for x in 0..d {
                        next[d * i + x] = d * im + (x + fl) % d;
                    }
                }
            }
            if !last {
                std::mem::swap(&mut img, &mut next);
            }
        }
        TruncatedAutomorphism {
            shape: self.shape,
            labels: out,
        }
    }

    pub fn invert(&self) -> Self {
        let d = self.shape.d as usize;
        let depth = self.shape.depth;
        let mut out = vec![0u8; self.labels.len()];
        let mut img: Vec<usize> = vec![0];
        let mut next: Vec<usize> = Vec::new();
        for level in 0..depth {
            let off = self.shape.level_offset(level);
            let last = level + 1 == depth;
            if !last {
                next.clear();
                next.resize(img.len() * d, 0);
            }
            for (i, &im) in img.iter().enumerate() {
                let fl = self.labels[off + i] as usize;
                out[off + im] = ((d - fl) % d) as u8;
                if !last {
                    for x in 0..d {
                        next[d * i + x] = d * im + (x + fl) % d;
                    }
                }
            }
            if !last {
                std::mem::swap(&mut img, &mut next);
            }
        }
        TruncatedAutomorphism {
            shape: self.shape,
            labels: out,
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.invert() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.shape);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// `g^{-1} f g`.
    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.invert().mul(self).mul(g)
    }

    /// `[f, g] = f^{-1} g^{-1} f g`.
    pub fn commutator(&self, g: &Self) -> Self {
        self.invert().mul(&g.invert()).mul(self).mul(g)
    }

    /// Image of a vertex (path of letters in `1..=d`) under the right action.
    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        if v.len() > self.shape.depth as usize {
            return Err(self.out_of_range(v));
        }
        let d = self.shape.d;
        let mut out = Vec::with_capacity(v.len());
        let mut idx = 0usize;
        for (level, &x) in v.0.iter().enumerate() {
            if x == 0 || x > d {
                return Err(self.out_of_range(v));
            }
            let off = self.shape.level_offset(level as u32);
            let label = self.labels[off + idx] as u32;
            let y = (x - 1 + label) % d;
            out.push(y + 1);
            idx = idx * d as usize + (x - 1) as usize;
        }
        Ok(Vertex(out))
    }

    /// Images of every vertex on `level`, as lexicographic indices.
    pub fn level_images(&self, level: u32) -> Vec<usize> {
        let d = self.shape.d as usize;
        let mut img: Vec<usize> = vec![0];
        for l in 0..level.min(self.shape.depth) {
            let off = self.shape.level_offset(l);
            let mut next = vec![0usize; img.len() * d];
            for (i, &im) in img.iter().enumerate() {
                let fl = self.labels[off + i] as usize;
                for x in 0..d {
                    next[d * i + x] = d * im + (x + fl) % d;
                }
            }
            img = next;
        }
        img
    }

    pub fn leaf_permutation(&self) -> LeafPermutation {
        let images = self
            .level_images(self.shape.depth)
            .into_iter()
            .map(|i| i as u32 + 1)
            .collect();
        LeafPermutation {
            shape: self.shape,
            images,
        }
    }

    /// Least `m >= 1` with `f^m = 1`, as the lcm of the leaf cycle lengths.
    pub fn order(&self) -> u64 {
        if self.shape.depth == 0 {
            return 1;
        }
        self.leaf_permutation().order()
    }

    /// Section at `u`, an automorphism of depth `depth - |u|`.
    pub fn section(&self, u: &Vertex) -> Result<Self> {
        if u.len() > self.shape.depth as usize {
            return Err(self.out_of_range(u));
        }
        let idx = u.index(self.shape.d).map_err(|_| self.out_of_range(u))?;
        Ok(self.section_at(u.len() as u32, idx))
    }

    /// Section at the vertex with lexicographic `index` on `level`.
    pub(crate) fn section_at(&self, level: u32, index: usize) -> Self {
        let shape = self.shape.with_depth(self.shape.depth - level);
        let mut labels = Vec::with_capacity(shape.internal_count());
        for l in 0..shape.depth {
            let width = shape.level_size(l);
            let start = self.shape.level_offset(level + l) + index * width;
            labels.extend_from_slice(&self.labels[start..start + width]);
        }
        TruncatedAutomorphism { shape, labels }
    }

    /// Least level containing a moved vertex, `None` for the identity.
    pub fn first_moved_level(&self) -> Option<u32> {
        (0..self.shape.depth).find_map(|l| {
            let off = self.shape.level_offset(l);
            let w = self.shape.level_size(l);
            self.labels[off..off + w]
                .iter()
                .any(|&x| x != 0)
                .then_some(l + 1)
        })
    }

    /// Whether every vertex of `level` is fixed.
    pub fn in_level_stabilizer(&self, level: u32) -> bool {
        match self.first_moved_level() {
            None => true,
            Some(m) => m > level,
        }
    }

    /// First-level sections; requires the root label to vanish.
    pub fn psi(&self) -> Result<Vec<Self>> {
        self.psi_level(1)
    }

    /// Sections at all level-`m` vertices in lexicographic order.
    pub fn psi_level(&self, m: u32) -> Result<Vec<Self>> {
        if m > self.shape.depth {
            return Err(Error::VertexOutOfRange {
                vertex: format!("level {m}"),
                depth: self.shape.depth,
            });
        }
        if !self.in_level_stabilizer(m) {
            return Err(Error::NotInStabilizer { level: m });
        }
        Ok((0..self.shape.level_size(m))
            .map(|i| self.section_at(m, i))
            .collect())
    }

    /// Reassemble an element of the first level stabilizer from its `d` sections.
    pub fn psi_inverse(shape_above: TreeShape, parts: &[Self]) -> Result<Self> {
        let d = shape_above.d as usize;
        if parts.len() != d {
            return Err(Error::InvalidShape(format!(
                "expected {d} sections, got {}",
                parts.len()
            )));
        }
        let below = parts[0].shape;
        if below.d != shape_above.d || parts.iter().any(|g| g.shape != below) {
            return Err(Error::ShapeMismatch(
                below.to_string(),
                shape_above.to_string(),
            ));
        }
        let shape = below.with_depth(below.depth + 1);
        let mut labels = Vec::with_capacity(shape.internal_count());
        labels.push(0);
        for l in 0..below.depth {
            let off = below.level_offset(l);
            let w = below.level_size(l);
            for part in parts {
                labels.extend_from_slice(&part.labels[off..off + w]);
            }
        }
        Ok(TruncatedAutomorphism { shape, labels })
    }

    /// Reassemble from the `d^m` sections at level `m`.
    pub fn psi_level_inverse(shape_above: TreeShape, m: u32, parts: &[Self]) -> Result<Self> {
        if m == 0 {
            return parts
                .first()
                .cloned()
                .filter(|_| parts.len() == 1)
                .ok_or_else(|| Error::InvalidShape("level 0 takes one part".into()));
        }
        let d = shape_above.d as usize;
        if parts.len() != d.pow(m) {
            return Err(Error::InvalidShape(format!(
                "expected {} sections, got {}",
                d.pow(m),
                parts.len()
            )));
        }
        let mut layer: Vec<Self> = parts.to_vec();
        for _ in 0..m {
            layer = layer
                .chunks(d)
                .map(|chunk| Self::psi_inverse(shape_above, chunk))
                .collect::<Result<_>>()?;
        }
        Ok(layer.pop().expect("one root"))
    }

    /// Image in the depth-`depth` quotient (labels below that level dropped).
    pub fn truncate(&self, depth: u32) -> Self {
        let depth = depth.min(self.shape.depth);
        let shape = self.shape.with_depth(depth);
        TruncatedAutomorphism {
            shape,
            labels: self.labels[..shape.internal_count()].to_vec(),
        }
    }

    /// Canonical text form: levels separated by `;`, entries by `,`.
    pub fn to_text(&self) -> String {
        (0..self.shape.depth)
            .map(|l| {
                let off = self.shape.level_offset(l);
                let w = self.shape.level_size(l);
                self.labels[off..off + w]
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_text(p: u32, n: u32, text: &str) -> Result<Self> {
        let text = text.trim();
        let levels: Vec<&str> = if text.is_empty() {
            Vec::new()
        } else {
            text.split(';').collect()
        };
        let shape = TreeShape::new(p, n, levels.len() as u32)?;
        let mut labels = Vec::with_capacity(shape.internal_count());
        for (l, level) in levels.iter().enumerate() {
            let entries: Vec<&str> = level.split(',').collect();
            if entries.len() != shape.level_size(l as u32) {
                return Err(Error::Parse(format!(
                    "level {l} has {} entries, expected {}",
                    entries.len(),
                    shape.level_size(l as u32)
                )));
            }
            for e in entries {
                let v: u32 = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad label {e:?}")))?;
                if v >= shape.d {
                    return Err(Error::Parse(format!("label {v} not below {}", shape.d)));
                }
                labels.push(v as u8);
            }
        }
        Ok(TruncatedAutomorphism { shape, labels })
    }
}

impl fmt::Display for TruncatedAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for TreeShape {
    type Err = Error;

    /// `"p,n,depth"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad shape {s:?}")))?;
        match parts.as_slice() {
            [p, n, depth] => TreeShape::new(*p, *n, *depth),
            _ => Err(Error::Parse(format!("bad shape {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(p: u32, n: u32, depth: u32) -> TreeShape {
        TreeShape::new(p, n, depth).unwrap()
    }

    #[test]
    fn counts() {
        let s = shape(2, 2, 3);
        assert_eq!(s.leaf_count(), 64);
        assert_eq!(s.internal_count(), 21);
        assert_eq!(TruncatedAutomorphism::identity(shape(2, 2, 2)).labels(), &[0; 5]);
        assert!(TreeShape::new(4, 1, 1).is_err());
        assert!(TreeShape::new(2, 0, 1).is_err());
    }

    #[test]
    fn rooted_cycle() {
        let s = shape(2, 2, 1);
        let a = TruncatedAutomorphism::rooted(s, 1);
        assert_eq!(a.leaf_permutation().images, vec![2, 3, 4, 1]);
        assert!(a.pow(4).is_identity());
        assert_eq!(a.order(), 4);
        assert!(TruncatedAutomorphism::rooted(s, 0).is_identity());
        assert_eq!(a.invert(), TruncatedAutomorphism::rooted(s, 3));
        assert_eq!(a.first_moved_level(), Some(1));
    }

    #[test]
    fn identity_facts() {
        let s = shape(2, 2, 3);
        let id = TruncatedAutomorphism::identity(s);
        assert_eq!(id.leaf_permutation(), LeafPermutation::identity(s));
        assert_eq!(id.invert(), id);
        assert_eq!(id.order(), 1);
        assert_eq!(id.first_moved_level(), None);
        assert!(id.psi().unwrap().iter().all(|g| g.is_identity()));
        assert!(id.psi_level(2).unwrap().iter().all(|g| g.is_identity()));
    }

    #[test]
    fn rooted_sections_trivial() {
        let s = shape(3, 1, 3);
        let a = TruncatedAutomorphism::rooted(s, 1);
        for x in 1..=3 {
            assert!(a.section(&Vertex(vec![x])).unwrap().is_identity());
        }
        assert!(a.psi().is_err());
    }

    #[test]
    fn apply_matches_leaf_permutation() {
        let s = shape(2, 2, 2);
        let f = TruncatedAutomorphism::from_labels(s, vec![1, 0, 2, 3, 1]).unwrap();
        let perm = f.leaf_permutation();
        for i in 0..16 {
            let v = Vertex::from_index(4, 2, i);
            let w = f.apply(&v).unwrap();
            assert_eq!(w.index(4).unwrap() as u32 + 1, perm.images[i]);
        }
    }

    #[test]
    fn text_round_trip() {
        let f = TruncatedAutomorphism::parse_text(2, 2, "1;0,0,0,0").unwrap();
        assert_eq!(f.to_text(), "1;0,0,0,0");
        assert_eq!(f, TruncatedAutomorphism::rooted(shape(2, 2, 2), 1));
        assert!(TruncatedAutomorphism::parse_text(2, 2, "1;0,0,0").is_err());
        assert!(TruncatedAutomorphism::parse_text(2, 2, "4").is_err());
        assert_eq!(TruncatedAutomorphism::parse_text(2, 2, "").unwrap().depth(), 0);
    }

    #[test]
    fn psi_round_trip_and_errors() {
        let s = shape(2, 2, 3);
        let f = TruncatedAutomorphism::from_labels(
            s,
            (0..21).map(|i| if i == 0 { 0 } else { (i * 7 % 4) as u8 }).collect(),
        )
        .unwrap();
        let parts = f.psi().unwrap();
        assert_eq!(parts.len(), 4);
        assert_eq!(TruncatedAutomorphism::psi_inverse(s, &parts).unwrap(), f);
        let a = TruncatedAutomorphism::rooted(s, 1);
        assert_eq!(a.psi(), Err(Error::NotInStabilizer { level: 1 }));
        assert!(f.section(&Vertex(vec![5])).is_err());
        assert!(f.section(&Vertex(vec![1, 1, 1, 1])).is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let f = TruncatedAutomorphism::identity(shape(2, 2, 2));
        let g = TruncatedAutomorphism::identity(shape(2, 2, 3));
        assert!(matches!(f.compose(&g), Err(Error::ShapeMismatch(..))));
    }
}
