//! Group words over `a` and `b`, and the search for words with a
//! prescribed single nontrivial first-level section.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggs::DefiningVector;
use crate::group::FrattiniCoords;
use crate::tree::TruncatedAutomorphism;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Word {
    A(i64),
    B(i64),
    Product(Vec<Word>),
    /// `x^y = y^{-1} x y`.
    Conj(Box<Word>, Box<Word>),
    /// Left-normed commutator `[x1, x2, ..., xm]`.
    Comm(Vec<Word>),
}

impl Word {
    pub fn a() -> Word {
        Word::A(1)
    }

    pub fn b() -> Word {
        Word::B(1)
    }

    pub fn conj(x: Word, y: Word) -> Word {
        Word::Conj(Box::new(x), Box::new(y))
    }

    pub fn comm(parts: Vec<Word>) -> Word {
        Word::Comm(parts)
    }

    /// `(b^j)^{a^l}`.
    pub fn b_conjugate(j: i64, l: i64) -> Word {
        if l == 0 {
            Word::B(j)
        } else {
            Word::conj(Word::B(j), Word::A(l))
        }
    }

    /// Evaluate with the given generator images.
    pub fn eval(&self, a: &TruncatedAutomorphism, b: &TruncatedAutomorphism) -> TruncatedAutomorphism {
        match self {
            Word::A(k) => a.pow(*k),
            Word::B(k) => b.pow(*k),
            Word::Product(xs) => xs.iter().fold(TruncatedAutomorphism::identity(a.shape()), |acc, x| {
                acc.mul(&x.eval(a, b))
            }),
            Word::Conj(x, y) => x.eval(a, b).conjugate_by(&y.eval(a, b)),
            Word::Comm(xs) => {
                let mut it = xs.iter().map(|x| x.eval(a, b));
                let first = it.next().unwrap_or_else(|| TruncatedAutomorphism::identity(a.shape()));
                it.fold(first, |acc, x| acc.commutator(&x))
            }
        }
    }

    pub fn eval_in(&self, v: &DefiningVector, depth: u32) -> Result<TruncatedAutomorphism> {
        Ok(self.eval(&v.generator_a(depth)?, &v.generator_b(depth)?))
    }

    /// Image in `G / Phi(G)`.
    pub fn coords(&self, p: u32) -> FrattiniCoords {
        match self {
            Word::A(k) => FrattiniCoords::new(*k, 0, p),
            Word::B(k) => FrattiniCoords::new(0, *k, p),
            Word::Product(xs) => xs
                .iter()
                .fold(FrattiniCoords::default(), |acc, x| acc.add(x.coords(p), p)),
            Word::Conj(x, _) => x.coords(p),
            Word::Comm(xs) if xs.len() >= 2 => FrattiniCoords::default(),
            Word::Comm(xs) => xs.first().map(|x| x.coords(p)).unwrap_or_default(),
        }
    }

    /// Number of generator letters, counted with multiplicity of evaluation.
    pub fn size(&self) -> usize {
        match self {
            Word::A(_) | Word::B(_) => 1,
            Word::Product(xs) => xs.iter().map(Word::size).sum(),
            Word::Conj(x, y) => x.size() + 2 * y.size(),
            Word::Comm(xs) => {
                let mut s = xs.first().map(Word::size).unwrap_or(0);
                for x in &xs[1.min(xs.len())..] {
                    s = 2 * (s + x.size());
                }
                s
            }
        }
    }
}

fn power(f: &mut fmt::Formatter<'_>, g: &str, k: i64) -> fmt::Result {
    if k == 1 {
        write!(f, "{g}")
    } else {
        write!(f, "{g}^{k}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::A(k) => power(f, "a", *k),
            Word::B(k) => power(f, "b", *k),
            Word::Product(xs) => {
                if xs.is_empty() {
                    return write!(f, "1");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Word::Conj(x, y) => write!(f, "({x})^({y})"),
            Word::Comm(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Builds elements of `st(1)` whose section at one first-level vertex is a
/// given word, using conjugates `(b^j)^{a^l}` with `l` a multiple of `step`.
#[derive(Debug, Clone)]
pub struct Lifter<'a> {
    v: &'a DefiningVector,
    /// Target first-level vertex, `1..=d`.
    position: u32,
    step: u32,
    /// Candidates kept per subword.
    pub width: usize,
    /// Combinations tried per commutator.
    pub budget: usize,
}

impl<'a> Lifter<'a> {
    pub fn new(v: &'a DefiningVector, position: u32, step: u32) -> Self {
        Lifter {
            v,
            position,
            step: step.max(1),
            width: 8,
            budget: 20_000,
        }
    }

    fn d(&self) -> i64 {
        self.v.d() as i64
    }

    /// Offsets `l` (multiples of `step`) other than the target vertex, nearest first.
    fn offsets(&self) -> Vec<i64> {
        let d = self.d();
        let x0 = self.position as i64 % d;
        (0..d)
            .filter(|l| l % self.step as i64 == 0 && *l != x0)
            .collect()
    }

    /// Section of `(b^j)^{a^l}` at the target vertex, as an exponent of `a`
    /// (`None` when that section is a power of `b`).
    fn a_part(&self, j: i64, l: i64) -> Option<i64> {
        let d = self.d();
        let x0 = self.position as i64 % d;
        if (x0 - l).rem_euclid(d) == 0 {
            None
        } else {
            Some((j * self.v.e(x0 - l) as i64).rem_euclid(d))
        }
    }

    fn kernel(&self) -> Vec<Word> {
        let d = self.d();
        let mut out = Vec::new();
        for l in self.offsets() {
            for j in 1..d {
                if self.a_part(j, l) == Some(0) {
                    out.push(Word::b_conjugate(j, l));
                }
            }
        }
        out
    }

    fn lifts_of_a(&self, k: i64) -> Vec<Word> {
        let d = self.d();
        let k = k.rem_euclid(d);
        let offs = self.offsets();
        let mut singles = Vec::new();
        for &l in &offs {
            for j in 1..d {
                if self.a_part(j, l) == Some(k) {
                    singles.push(Word::b_conjugate(j, l));
                    break;
                }
            }
        }
        let mut out = singles.clone();
        if k == 0 {
            out.insert(0, Word::Product(vec![]));
        }
        // two-factor products when no single conjugate suffices
        if out.len() < self.width {
            'outer: for (i, &l1) in offs.iter().enumerate() {
                for &l2 in &offs[i + 1..] {
                    for j1 in 1..d {
                        let Some(x1) = self.a_part(j1, l1) else { continue };
                        if x1 == 0 {
                            continue;
                        }
                        for j2 in 1..d {
                            if self.a_part(j2, l2).map(|x2| (x1 + x2) % d) == Some(k) {
                                out.push(Word::Product(vec![
                                    Word::b_conjugate(j1, l1),
                                    Word::b_conjugate(j2, l2),
                                ]));
                                if out.len() >= 2 * self.width {
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
        }
        let kernel = self.kernel();
        for s in singles.iter().take(2) {
            for kf in &kernel {
                out.push(Word::Product(vec![s.clone(), kf.clone()]));
            }
        }
        out
    }

    fn lifts_of_b(&self, k: i64) -> Vec<Word> {
        let base = Word::b_conjugate(k, self.position as i64 % self.d());
        let mut out = vec![base.clone()];
        for kf in self.kernel() {
            out.push(Word::Product(vec![base.clone(), kf.clone()]));
            out.push(Word::Product(vec![kf, base.clone()]));
        }
        out
    }

    fn product<I: IntoIterator<Item = Vec<Word>>>(&self, lists: I, build: impl Fn(Vec<Word>) -> Word) -> Vec<Word> {
        let mut acc: Vec<Vec<Word>> = vec![vec![]];
        for list in lists {
            let mut next = Vec::new();
            'fill: for prefix in &acc {
                for x in &list {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    next.push(v);
                    if next.len() >= self.width * self.width {
                        break 'fill;
                    }
                }
            }
            acc = next;
        }
        acc.into_iter().map(build).take(self.width).collect()
    }

    /// Words in `st(1)` whose section at the target vertex equals `w`;
    /// other sections unconstrained.
    pub fn lifts(&self, w: &Word) -> Vec<Word> {
        let mut out = match w {
            Word::A(k) => self.lifts_of_a(*k),
            Word::B(k) => self.lifts_of_b(*k),
            Word::Product(xs) => self.product(xs.iter().map(|x| self.lifts(x)), Word::Product),
            Word::Conj(x, y) => {
                let xs = self.lifts(x);
                let ys = self.lifts(y);
                let mut out = Vec::new();
                for y in &ys {
                    for x in &xs {
                        out.push(Word::conj(x.clone(), y.clone()));
                    }
                }
                out
            }
            Word::Comm(xs) => self.product(xs.iter().map(|x| self.lifts(x)), Word::Comm),
        };
        out.truncate(self.width.max(1));
        out
    }

    /// A commutator word `W` with `psi(W)` trivial except for `w` at the
    /// target vertex, verified at `depth`.
    pub fn lift_single(&self, w: &Word, depth: u32) -> Result<Word> {
        let Word::Comm(parts) = w else {
            return Err(Error::Construction(format!("{w} is not a commutator")));
        };
        if depth < 2 {
            return Err(Error::Precondition("lifting needs depth >= 2".into()));
        }
        let a = self.v.generator_a(depth)?;
        let b = self.v.generator_b(depth)?;
        let target = w.eval(&self.v.generator_a(depth - 1)?, &self.v.generator_b(depth - 1)?);
        let cands: Vec<Vec<(Word, TruncatedAutomorphism)>> = parts
            .iter()
            .map(|x| {
                self.lifts(x)
                    .into_iter()
                    .map(|l| {
                        let e = l.eval(&a, &b);
                        (l, e)
                    })
                    .collect()
            })
            .collect();
        if cands.iter().any(|c| c.is_empty()) {
            return Err(Error::Construction(format!("no lifts for the entries of {w}")));
        }
        let slot = self.position as usize - 1;
        let total: usize = cands.iter().map(Vec::len).product();
        let mut idx = vec![0usize; cands.len()];
        for _ in 0..total.min(self.budget) {
            let mut it = idx.iter().enumerate().map(|(i, &k)| &cands[i][k].1);
            let first = it.next().expect("nonempty").clone();
            let value = it.fold(first, |acc, x| acc.commutator(x));
            if value.root_label() == 0 {
                let sections = value.psi()?;
                let clean = sections
                    .iter()
                    .enumerate()
                    .all(|(i, s)| if i == slot { *s == target } else { s.is_identity() });
                if clean {
                    return Ok(Word::Comm(
                        idx.iter().enumerate().map(|(i, &k)| cands[i][k].0.clone()).collect(),
                    ));
                }
            }
            // odometer, last slot fastest
            for i in (0..idx.len()).rev() {
                idx[i] += 1;
                if idx[i] < cands[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        Err(Error::Construction(format!(
            "no error-free lift of {w} at vertex {} within {} combinations",
            self.position,
            total.min(self.budget)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grig() -> DefiningVector {
        "p=2 n=2 e=1,0,1".parse().unwrap()
    }

    #[test]
    fn evaluation_matches_direct_products() {
        let v = grig();
        let a = v.generator_a(4).unwrap();
        let b = v.generator_b(4).unwrap();
        let w = Word::comm(vec![Word::b_conjugate(1, 3), Word::b(), Word::b_conjugate(2, 1)]);
        let direct = b
            .conjugate_by(&a.pow(3))
            .commutator(&b)
            .commutator(&b.pow(2).conjugate_by(&a));
        assert_eq!(w.eval(&a, &b), direct);
        assert_eq!(w.to_string(), "[(b)^(a^3), b, (b^2)^(a)]");
        assert!(w.coords(2).is_zero());
        assert_eq!(Word::Product(vec![Word::a(), Word::B(3)]).coords(2), FrattiniCoords::new(1, 1, 2));
    }

    #[test]
    fn letter_lifts_have_the_right_section() {
        let v = grig();
        for pos in 1..=4 {
            let lifter = Lifter::new(&v, pos, 1);
            for w in [Word::a(), Word::A(2), Word::b(), Word::B(3)] {
                let want = w.eval_in(&v, 3).unwrap();
                for l in lifter.lifts(&w) {
                    let x = l.eval_in(&v, 4).unwrap();
                    assert_eq!(x.root_label(), 0, "{l}");
                    assert_eq!(x.psi().unwrap()[pos as usize - 1], want, "{l} at {pos}");
                }
            }
        }
    }

    #[test]
    fn single_section_lift() {
        let v = grig();
        let t = Word::comm(vec![Word::a(), Word::b(), Word::A(2)]);
        let lifter = Lifter::new(&v, 4, 1);
        let h = lifter.lift_single(&t, 5).unwrap();
        let x = h.eval_in(&v, 5).unwrap();
        let parts = x.psi().unwrap();
        assert!(parts[..3].iter().all(|s| s.is_identity()));
        assert_eq!(parts[3], t.eval_in(&v, 4).unwrap());
        // and once more, one level up
        let c = lifter.lift_single(&h, 6).unwrap();
        let y = c.eval_in(&v, 6).unwrap().psi_level(2).unwrap();
        assert!(y[..15].iter().all(|s| s.is_identity()));
        assert_eq!(y[15], t.eval_in(&v, 4).unwrap());
    }
}
