//! Beauville structures on level quotients: the element `c`, the two
//! standard triples, socle-orbit checks and coset-socle certificates.
//!
//! In a finite `p`-group a cyclic subgroup has a unique subgroup of order
//! `p`, so `<x> ∩ <y>^g ≠ 1` for some `g` exactly when the socles of `<x>`
//! and `<y>` are conjugate. Every check below works with socles.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{class_key, NormalFlags};
use crate::error::{Error, Result};
use crate::ggs::{DefiningVector, ScanConfig};
use crate::group::{conjugacy_orbit, socle, Element, FiniteQuotient, FrattiniCoords, GenStrategy, SubgroupHandle};
use crate::pcgs::LevelPcgs;
use crate::tree::TruncatedAutomorphism;
use crate::words::{Lifter, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Beauville,
    NotBeauvilleCertified,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Beauville => "beauville",
            Verdict::NotBeauvilleCertified => "not-beauville-certified",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStatus {
    /// No conjugate of one socle equals the other.
    Disjoint,
    /// Conjugate socles; a witness is recorded.
    Meets,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMethod {
    /// Separated by a conjugacy invariant.
    Invariant,
    /// Decided by a complete conjugation orbit.
    Orbit,
}

#[derive(Debug, Clone)]
pub struct BeauvilleTriple {
    pub names: [String; 3],
    pub elems: [Element; 3],
}

impl BeauvilleTriple {
    pub fn new(x1: Element, x2: Element, n1: &str, n2: &str) -> Self {
        let x3 = x1.mul(&x2);
        BeauvilleTriple {
            names: [n1.to_string(), n2.to_string(), format!("{n1}·{n2}")],
            elems: [x1, x2, x3],
        }
    }

    pub fn from_words(v: &DefiningVector, depth: u32, w1: &Word, w2: &Word) -> Result<Self> {
        let p = v.p();
        let x1 = Element::new(w1.eval_in(v, depth)?, w1.coords(p));
        let x2 = Element::new(w2.eval_in(v, depth)?, w2.coords(p));
        Ok(Self::new(x1, x2, &w1.to_string(), &w2.to_string()))
    }

    pub fn orders(&self) -> [u64; 3] {
        [self.elems[0].order(), self.elems[1].order(), self.elems[2].order()]
    }

    fn report(&self) -> TripleReport {
        TripleReport {
            names: self.names.clone(),
            elements: self.elems.iter().map(|e| e.aut.to_text()).collect(),
            orders: self.orders().to_vec(),
            coords: self.elems.iter().map(|e| (e.coords.alpha, e.coords.beta)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleReport {
    pub names: [String; 3],
    pub elements: Vec<String>,
    pub orders: Vec<u64>,
    pub coords: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub x: usize,
    pub y: usize,
    pub status: PairStatus,
    pub method: Option<PairMethod>,
    /// Size of the conjugation orbit explored, when one was.
    pub orbit_size: Option<usize>,
    /// Generator letters `g` with a unit power of `z_x` equal to `z_y^g`.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// The quotient is cyclic, hence not Beauville.
    Cyclic,
    /// Every generating triple meets `classes`, and all socles of elements
    /// in those classes form the single conjugation orbit `orbit`.
    CosetSocle {
        classes: Vec<(u32, u32)>,
        elements_in_classes: usize,
        /// Each order-`p` subgroup of the orbit, as its sorted element texts.
        orbit: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeauvilleReport {
    pub vector: Option<String>,
    pub depth: u32,
    pub group_log_order: Option<u64>,
    pub triples: Vec<TripleReport>,
    pub generates: Vec<bool>,
    pub pairs: Vec<PairReport>,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub orbit_cap: usize,
    pub enum_cap: usize,
    /// Largest section depth at which `gamma_2`/`gamma_3` membership refines
    /// the conjugacy invariant.
    pub flag_depth: u32,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            orbit_cap: crate::group::DEFAULT_ORBIT_CAP,
            enum_cap: crate::group::DEFAULT_ENUM_CAP,
            flag_depth: 3,
        }
    }
}

/// Generator of the order-`p` subgroup of `<x>`.
pub fn socle_generator(x: &TruncatedAutomorphism) -> TruncatedAutomorphism {
    let p = x.shape().p() as u64;
    x.pow((x.order() / p) as i64)
}

/// Conjugation orbit of an element under `gens`, with parent links.
fn element_orbit(
    z: &TruncatedAutomorphism,
    gens: &[TruncatedAutomorphism],
    targets: &[TruncatedAutomorphism],
    cap: usize,
) -> std::result::Result<(usize, Option<String>), usize> {
    let mut parent: HashMap<TruncatedAutomorphism, Option<(TruncatedAutomorphism, usize)>> = HashMap::new();
    parent.insert(z.clone(), None);
    let mut queue = VecDeque::from([z.clone()]);
    let spell = |parent: &HashMap<_, Option<(TruncatedAutomorphism, usize)>>, mut x: TruncatedAutomorphism| {
        let mut letters = Vec::new();
        while let Some(Some((prev, g))) = parent.get(&x) {
            letters.push(g);
            x = prev.clone();
        }
        letters.reverse();
        letters
            .iter()
            .map(|g| ["a", "b"].get(**g).copied().unwrap_or("g").to_string())
            .collect::<Vec<_>>()
            .join("")
    };
    if targets.contains(z) {
        return Ok((1, Some(String::new())));
    }
    while let Some(x) = queue.pop_front() {
        for (gi, g) in gens.iter().enumerate() {
            let y = x.conjugate_by(g);
            if parent.contains_key(&y) {
                continue;
            }
            if parent.len() >= cap {
                return Err(parent.len());
            }
            parent.insert(y.clone(), Some((x.clone(), gi)));
            if targets.contains(&y) {
                let w = spell(&parent, y);
                return Ok((parent.len(), Some(w)));
            }
            queue.push_back(y);
        }
    }
    Ok((parent.len(), None))
}

/// Decide whether the socles of `<x>` and `<y>` are conjugate in `<gens>`.
pub fn socle_pair(
    x: &TruncatedAutomorphism,
    y: &TruncatedAutomorphism,
    gens: &[TruncatedAutomorphism],
    flags: &NormalFlags,
    orbit_cap: usize,
) -> (PairStatus, Option<PairMethod>, Option<usize>, Option<String>) {
    let p = x.shape().p() as i64;
    let zx = socle_generator(x);
    let zy = socle_generator(y);
    let powers: Vec<TruncatedAutomorphism> = (1..p).map(|j| zx.pow(j)).collect();
    let ky = class_key(&zy, flags);
    if powers.iter().all(|z| class_key(z, flags) != ky) {
        return (PairStatus::Disjoint, Some(PairMethod::Invariant), None, None);
    }
    match element_orbit(&zy, gens, &powers, orbit_cap) {
        Ok((size, Some(w))) => (PairStatus::Meets, Some(PairMethod::Orbit), Some(size), Some(w)),
        Ok((size, None)) => (PairStatus::Disjoint, Some(PairMethod::Orbit), Some(size), None),
        Err(size) => (PairStatus::Unknown, None, Some(size), None),
    }
}

fn triple_generates(q: &FiniteQuotient, t: &BeauvilleTriple, opts: &CheckOptions) -> Result<bool> {
    if q.depth >= 2 && (q.vector.is_some() || (q.is_enumerated() && q.frattini_consistent())) {
        q.generates(&t.elems[0], &t.elems[1], GenStrategy::Frattini, opts.enum_cap)
    } else {
        let total = match q.order() {
            Some(o) => o,
            None => {
                let mut g = q.clone();
                g.enumerate(opts.enum_cap)?
            }
        };
        let h = q.subgroup(&[t.elems[0].aut.clone(), t.elems[1].aut.clone()], opts.enum_cap)?;
        Ok(h.order() == total)
    }
}

/// Check the socle condition for all nine pairs of `X × Y`.
pub fn beauville_condition(
    q: &FiniteQuotient,
    x: &BeauvilleTriple,
    y: &BeauvilleTriple,
    opts: &CheckOptions,
) -> Result<BeauvilleReport> {
    let flags = match &q.vector {
        Some(v) if opts.flag_depth > 0 => NormalFlags::new(v, opts.flag_depth.min(q.depth.saturating_sub(1)))?,
        _ => NormalFlags::none(),
    };
    let generates = vec![triple_generates(q, x, opts)?, triple_generates(q, y, opts)?];
    let gens = q.generators();
    let pairs: Vec<PairReport> = (0..9)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / 3, k % 3);
            let (status, method, orbit_size, witness) =
                socle_pair(&x.elems[i].aut, &y.elems[j].aut, &gens, &flags, opts.orbit_cap);
            PairReport {
                x: i,
                y: j,
                status,
                method,
                orbit_size,
                witness,
            }
        })
        .collect();
    let all_disjoint = pairs.iter().all(|p| p.status == PairStatus::Disjoint);
    let mut notes = Vec::new();
    if !generates.iter().all(|&g| g) {
        notes.push("a triple does not generate the quotient".into());
    }
    if let Some(p) = pairs.iter().find(|p| p.status == PairStatus::Meets) {
        notes.push(format!("socles of x{} and y{} are conjugate", p.x + 1, p.y + 1));
    }
    let verdict = if all_disjoint && generates.iter().all(|&g| g) {
        Verdict::Beauville
    } else {
        Verdict::Inconclusive
    };
    Ok(BeauvilleReport {
        vector: q.vector.as_ref().map(|v| v.to_string()),
        depth: q.depth,
        group_log_order: q.order().map(|o| (o as f64).log(q.p() as f64).round() as u64),
        triples: vec![x.report(), y.report()],
        generates,
        pairs,
        verdict,
        certificate: None,
        notes,
    })
}

/// How `c` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CStrategy {
    /// Iterated single-section lifts of commutator words.
    Words,
    /// Pattern element certified by sifting through `gamma_3(G_k)`.
    Sift,
}

/// The prescribed shape of `c`: trivial at every level-`level` vertex
/// except the last one, which carries `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionPattern {
    pub level: u32,
    /// 1-based index among the `d^level` vertices.
    pub position: usize,
    pub target: Word,
}

impl SectionPattern {
    pub fn check(&self, v: &DefiningVector, c: &TruncatedAutomorphism) -> Result<bool> {
        let depth = c.depth();
        if depth <= self.level {
            return Err(Error::Precondition("pattern level reaches the leaves".into()));
        }
        let Ok(parts) = c.psi_level(self.level) else {
            return Ok(false);
        };
        let target = self.target.eval_in(v, depth - self.level)?;
        Ok(parts.iter().enumerate().all(|(i, s)| {
            if i + 1 == self.position {
                *s == target
            } else {
                s.is_identity()
            }
        }))
    }

    pub fn realize(&self, v: &DefiningVector, depth: u32) -> Result<TruncatedAutomorphism> {
        let below = depth
            .checked_sub(self.level)
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::Precondition("pattern level reaches the leaves".into()))?;
        let shape = v.shape(depth)?;
        let count = (v.d() as usize).pow(self.level);
        let mut parts = vec![TruncatedAutomorphism::identity(v.shape(below)?); count];
        parts[self.position - 1] = self.target.eval_in(v, below)?;
        TruncatedAutomorphism::psi_level_inverse(shape, self.level, &parts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructedC {
    pub depth: u32,
    pub case: u8,
    pub pattern: SectionPattern,
    pub strategy: CStrategy,
    /// Present for the word strategy.
    pub word: Option<Word>,
    #[serde(skip)]
    pub element: Option<TruncatedAutomorphism>,
}

impl ConstructedC {
    pub fn element(&self) -> &TruncatedAutomorphism {
        self.element.as_ref().expect("constructed")
    }
}

fn a_pow(k: u64) -> Word {
    Word::A(k as i64)
}

/// Whether some `e_{k p^{n-1}}`, `1 <= k < p`, is nonzero.
pub fn top_layer_nonzero(v: &DefiningVector) -> bool {
    let step = (v.d() / v.p()) as i64;
    (1..v.p() as i64).any(|k| v.e(k * step) != 0)
}

/// Target commutator and level for `c` in the infinite periodic case.
pub fn c_pattern(v: &DefiningVector) -> Result<(u8, SectionPattern)> {
    if v.n() < 2 {
        return Err(Error::Precondition("needs n >= 2".into()));
    }
    if !v.is_infinite() || !v.is_periodic() {
        return Err(Error::Precondition(
            "c is built for infinite periodic groups".into(),
        ));
    }
    let q = v.q_index().expect("infinite");
    let r = v.compute_r()[q as usize];
    let mu = v.t_sequence(0, 0)?.m_rs;
    let case = if top_layer_nonzero(v) { 1 } else { 2 };
    let p = v.p() as u64;
    let pr = p.pow(r);
    let last = if case == 2 && p == 2 { 2 * pr } else { pr };
    let level = mu + 1;
    Ok((
        case,
        SectionPattern {
            level,
            position: (v.d() as usize).pow(level),
            target: Word::comm(vec![a_pow(pr), Word::b(), a_pow(last)]),
        },
    ))
}

/// The finite-group variant: `mu + 1` with `R_mu` in place of `R_q`.
pub fn c_pattern_finite(v: &DefiningVector) -> Result<(u8, SectionPattern)> {
    if v.n() < 2 || v.is_infinite() {
        return Err(Error::Precondition("finite mode needs a finite group and n >= 2".into()));
    }
    let r = v.compute_r();
    let f = r.iter().position(|&x| x == v.n()).expect("finite") as u32 - 1;
    let mu = v.t_sequence(0, 0)?.m_rs;
    let p = v.p() as u64;
    let rmu = *r
        .get(mu as usize)
        .ok_or_else(|| Error::Precondition("R_mu undefined".into()))?;
    let pr = p.pow(rmu);
    let last = if f > mu || (f == mu && p != 2) {
        pr
    } else if f == mu && rmu + 1 < v.n() {
        2 * pr
    } else {
        return Err(Error::Precondition(format!(
            "finite-mode hypotheses fail (d = {f}, mu = {mu}, R_mu = {rmu})"
        )));
    };
    let level = mu + 1;
    Ok((
        if f > mu { 1 } else { 2 },
        SectionPattern {
            level,
            position: (v.d() as usize).pow(level),
            target: Word::comm(vec![a_pow(pr), Word::b(), a_pow(last)]),
        },
    ))
}

fn build_c(v: &DefiningVector, depth: u32, case: u8, pattern: SectionPattern) -> Result<ConstructedC> {
    if depth < pattern.level + 1 {
        return Err(Error::Precondition(format!(
            "depth {depth} must exceed the pattern level {}",
            pattern.level
        )));
    }
    let lifter = Lifter::new(v, v.d(), 1);
    let mut word = pattern.target.clone();
    let mut failure = None;
    for _ in 0..pattern.level {
        match lifter.lift_single(&word, depth) {
            Ok(w) => word = w,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if failure.is_none() {
        let c = word.eval_in(v, depth)?;
        if pattern.check(v, &c)? {
            return Ok(ConstructedC {
                depth,
                case,
                pattern,
                strategy: CStrategy::Words,
                word: Some(word),
                element: Some(c),
            });
        }
        failure = Some(Error::Construction("lifted word misses the pattern".into()));
    }
    // fallback: the pattern element itself, certified inside gamma_3(G_k)
    let c = pattern.realize(v, depth)?;
    if depth <= 5 {
        let a = v.generator_a(depth)?;
        let b = v.generator_b(depth)?;
        let ab = a.commutator(&b);
        let g3 = LevelPcgs::normal_closure(v.shape(depth)?, &[ab.commutator(&a), ab.commutator(&b)], &[a, b]);
        if g3.contains(&c) {
            return Ok(ConstructedC {
                depth,
                case,
                pattern,
                strategy: CStrategy::Sift,
                word: None,
                element: Some(c),
            });
        }
    }
    Err(Error::Construction(format!(
        "no construction of c at depth {depth}: {}",
        failure.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// `c` for an infinite periodic group, verified against its section pattern.
pub fn construct_c(v: &DefiningVector, depth: u32) -> Result<ConstructedC> {
    let (case, pattern) = c_pattern(v)?;
    build_c(v, depth, case, pattern)
}

/// `c` for the finite-group extension.
pub fn construct_c_finite(v: &DefiningVector, depth: u32) -> Result<ConstructedC> {
    let (case, pattern) = c_pattern_finite(v)?;
    build_c(v, depth, case, pattern)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingElement {
    pub alpha: u32,
    pub k: u32,
    pub r: u32,
    pub case: u8,
    /// First-level vertex `k p^alpha` carrying the commutator.
    pub position: u32,
    pub target: Word,
    pub word: Word,
}

/// Hypotheses of the branching lemma for `N_alpha = <a^{p^alpha}, b>`;
/// returns `R`.
pub fn branching_hypotheses(v: &DefiningVector, alpha: u32) -> Result<u32> {
    let (p, n) = (v.p() as u64, v.n());
    if alpha >= n {
        return Err(Error::Precondition("alpha must be below n".into()));
    }
    let step = p.pow(alpha) as i64;
    let val = |x: u32| crate::ggs::valuation(p, x as u64, n);
    let count = (p.pow(n - alpha) - 1) as i64;
    let r = (1..=count).map(|i| val(v.e(i * step))).min().unwrap_or(n);
    if r >= n {
        return Err(Error::Precondition("all e_{i p^alpha} vanish".into()));
    }
    if alpha + 1 < n {
        let inner = (1..(p.pow(n - alpha - 1)) as i64)
            .map(|j| val(v.e(j * step * p as i64)))
            .min()
            .unwrap_or(n);
        if inner <= r {
            return Err(Error::Precondition(
                "e_{j p^(alpha+1)} are not more divisible than R".into(),
            ));
        }
    }
    if !(1..=count).any(|l| val(v.e(l * step)) > r) {
        return Err(Error::Precondition("no e_{l p^alpha} divisible by p^(R+1)".into()));
    }
    Ok(r)
}

/// An element of `gamma_3(st_{N_alpha}(1))` whose first-level sections are
/// trivial except `[a^{p^R}, b, a^{p^R}]` at vertex `k p^alpha`.
pub fn branching_element(v: &DefiningVector, alpha: u32, k: Option<u32>, depth: u32) -> Result<BranchingElement> {
    let r = branching_hypotheses(v, alpha)?;
    let p = v.p() as u64;
    let n = v.n();
    let step = p.pow(alpha) as i64;
    let val = |x: u32| crate::ggs::valuation(p, x as u64, n);
    let valid = |k: u32| !(k as u64).is_multiple_of(p) && val(v.e(k as i64 * step)) == r;
    let k = match k {
        Some(k) if valid(k) => k,
        Some(k) => return Err(Error::Precondition(format!("k = {k} is not admissible"))),
        None => (1..p.pow(n - alpha) as u32)
            .find(|&k| valid(k))
            .ok_or_else(|| Error::Precondition("no admissible k".into()))?,
    };
    let position = (k as i64 * step) as u32;
    let case = if v.e(v.d() as i64 - position as i64) == 0 { 1 } else { 2 };
    let pr = p.pow(r);
    let target = Word::comm(vec![a_pow(pr), Word::b(), a_pow(pr)]);
    // the plain proof word first
    if case == 1 && v.e(position as i64) as u64 == pr {
        let w = Word::comm(vec![Word::b(), Word::b_conjugate(1, position as i64), Word::b()]);
        if check_single(v, &w, position, &target, depth)? {
            return Ok(BranchingElement { alpha, k, r, case, position, target, word: w });
        }
    }
    let lifter = Lifter::new(v, position, step as u32);
    let word = lifter.lift_single(&target, depth)?;
    Ok(BranchingElement { alpha, k, r, case, position, target, word })
}

fn check_single(v: &DefiningVector, w: &Word, position: u32, target: &Word, depth: u32) -> Result<bool> {
    let x = w.eval_in(v, depth)?;
    let Ok(parts) = x.psi() else { return Ok(false) };
    let t = target.eval_in(v, depth - 1)?;
    Ok(parts
        .iter()
        .enumerate()
        .all(|(i, s)| if i + 1 == position as usize { *s == t } else { s.is_identity() }))
}

/// `X = {a^{p-1}, ab, a^p b}` and `Y = {ac, b, acb}`.
pub fn standard_triples(v: &DefiningVector, depth: u32, c: &ConstructedC) -> Result<(BeauvilleTriple, BeauvilleTriple)> {
    let p = v.p() as i64;
    let x = BeauvilleTriple::from_words(
        v,
        depth,
        &Word::A(p - 1),
        &Word::Product(vec![Word::a(), Word::b()]),
    )?;
    let a = Element::new(v.generator_a(depth)?, FrattiniCoords::new(1, 0, v.p()));
    let c_el = Element::new(c.element().clone(), FrattiniCoords::default());
    let b = Element::new(v.generator_b(depth)?, FrattiniCoords::new(0, 1, v.p()));
    let y = BeauvilleTriple::new(a.mul(&c_el), b, "a c", "b");
    Ok((x, y))
}

/// Resolve `m_G`, build `c`, and check the standard triples at `level`.
pub fn verify_standard_structure(
    v: &DefiningVector,
    level: Option<u32>,
    opts: &CheckOptions,
    finite_mode: bool,
) -> Result<(BeauvilleReport, ConstructedC)> {
    let mut notes = Vec::new();
    let depth = match level {
        Some(k) => k,
        None if finite_mode => {
            return Err(Error::Precondition("finite mode needs an explicit level".into()))
        }
        None => {
            let t = v.lambda_prime(ScanConfig::default())?;
            notes.push(format!("level auto resolved to m_G = {}", t.m_g));
            t.m_g
        }
    };
    if depth < 2 {
        return Err(Error::Precondition("quotient is cyclic at level 1".into()));
    }
    let c = if finite_mode {
        construct_c_finite(v, depth)?
    } else {
        construct_c(v, depth)?
    };
    notes.push(format!(
        "c: case {}, {} strategy{}",
        c.case,
        match c.strategy {
            CStrategy::Words => "word",
            CStrategy::Sift => "sift",
        },
        c.word.as_ref().map(|w| format!(", c = {w}")).unwrap_or_default()
    ));
    let q = FiniteQuotient::new(v, depth)?;
    let (x, y) = standard_triples(v, depth, &c)?;
    let mut report = beauville_condition(&q, &x, &y, opts)?;
    notes.append(&mut report.notes);
    report.notes = notes;
    Ok((report, c))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persistence {
    pub k0: u32,
    /// Orders of `x1, x2, x3, y1, y2, y3`.
    pub orders_k0: Vec<u64>,
    pub orders_k1: Vec<u64>,
    /// Lifting a structure needs the orders in `X` to stay put.
    pub x_orders_stable: bool,
    /// Stronger: all six orders unchanged.
    pub all_orders_stable: bool,
    pub report_k1: BeauvilleReport,
    pub holds: bool,
}

/// Re-verify one level deeper, comparing triple orders.
pub fn level_persistence(v: &DefiningVector, k0: u32, opts: &CheckOptions) -> Result<Persistence> {
    let (r0, _) = verify_standard_structure(v, Some(k0), opts, false)?;
    if r0.verdict != Verdict::Beauville {
        return Err(Error::Precondition(format!("no Beauville verdict at level {k0}")));
    }
    let (r1, _) = verify_standard_structure(v, Some(k0 + 1), opts, false)?;
    let orders = |r: &BeauvilleReport| r.triples.iter().flat_map(|t| t.orders.clone()).collect::<Vec<_>>();
    let orders_k0 = orders(&r0);
    let orders_k1 = orders(&r1);
    let x_orders_stable = orders_k0[..3] == orders_k1[..3];
    let all_orders_stable = orders_k0 == orders_k1;
    let holds = x_orders_stable && r1.verdict == Verdict::Beauville;
    Ok(Persistence {
        k0,
        orders_k0,
        orders_k1,
        x_orders_stable,
        all_orders_stable,
        report_k1: r1,
        holds,
    })
}

/// All `(v1, v2)` independent in `F_p^2` meet `set` in `{v1, v2, v1 + v2}`.
pub fn covers_every_triple(p: u32, set: &BTreeSet<(u32, u32)>) -> bool {
    let vecs: Vec<FrattiniCoords> = (0..p)
        .flat_map(|x| (0..p).map(move |y| FrattiniCoords { alpha: x, beta: y }))
        .collect();
    vecs.iter().all(|&v1| {
        vecs.iter().all(|&v2| {
            !v1.independent(v2, p)
                || [v1, v2, v1.add(v2, p)]
                    .iter()
                    .any(|w| set.contains(&(w.alpha, w.beta)))
        })
    })
}

/// Frattini classes that every generating triple must meet: the mixed
/// classes, and for `p = 2` also each single nonzero class.
pub fn unavoidable_class_sets(p: u32) -> Vec<BTreeSet<(u32, u32)>> {
    let mixed: BTreeSet<(u32, u32)> = (1..p).flat_map(|x| (1..p).map(move |y| (x, y))).collect();
    let mut out = vec![mixed];
    for single in [(1, 0), (0, 1), (1, 1)] {
        let s = BTreeSet::from([single]);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out.into_iter().filter(|s| covers_every_triple(p, s)).collect()
}

fn subgroup_texts(h: &SubgroupHandle) -> Vec<String> {
    h.elements.iter().map(|g| g.to_text()).collect()
}

fn is_cyclic(q: &FiniteQuotient) -> Result<bool> {
    if q.depth <= 1 {
        return Ok(true);
    }
    let n = q.order().ok_or_else(|| Error::Precondition("quotient is not enumerated".into()))? as u64;
    Ok(q.elements()?.any(|e| e.order() == n))
}

/// Certificate that no Beauville structure exists, via socles of an
/// unavoidable coset.
pub fn certify_not_beauville(q: &mut FiniteQuotient, opts: &CheckOptions) -> Result<BeauvilleReport> {
    q.enumerate(opts.enum_cap)?;
    let mut report = BeauvilleReport {
        vector: q.vector.as_ref().map(|v| v.to_string()),
        depth: q.depth,
        group_log_order: q.order().map(|o| (o as f64).log(q.p() as f64).round() as u64),
        triples: vec![],
        generates: vec![],
        pairs: vec![],
        verdict: Verdict::Inconclusive,
        certificate: None,
        notes: vec![],
    };
    if is_cyclic(q)? {
        report.verdict = Verdict::NotBeauvilleCertified;
        report.certificate = Some(Certificate::Cyclic);
        report.notes.push("quotient is cyclic".into());
        return Ok(report);
    }
    if !q.frattini_consistent() {
        report.notes.push("Frattini coordinates are not well defined".into());
        return Ok(report);
    }
    let p = q.p();
    let gens = q.generators();
    for classes in unavoidable_class_sets(p) {
        let members: Vec<Element> = q
            .elements()?
            .filter(|e| classes.contains(&(e.coords.alpha, e.coords.beta)))
            .collect();
        let socles: BTreeSet<BTreeSet<TruncatedAutomorphism>> = members
            .par_iter()
            .map(|e| socle(&e.aut).map(|h| h.elements))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        let Some(first) = socles.iter().next() else { continue };
        let first = SubgroupHandle {
            generators: first.iter().filter(|g| !g.is_identity()).take(1).cloned().collect(),
            elements: first.clone(),
        };
        let orbit = conjugacy_orbit(&first, &gens, opts.orbit_cap)?;
        let orbit_sets: BTreeSet<&BTreeSet<TruncatedAutomorphism>> = orbit.iter().map(|h| &h.elements).collect();
        if socles.iter().all(|s| orbit_sets.contains(s)) {
            report.verdict = Verdict::NotBeauvilleCertified;
            report.certificate = Some(Certificate::CosetSocle {
                classes: classes.iter().copied().collect(),
                elements_in_classes: members.len(),
                orbit: orbit.iter().map(subgroup_texts).collect(),
            });
            return Ok(report);
        }
        report.notes.push(format!(
            "classes {:?}: socles fall into more than one orbit",
            classes
        ));
    }
    Ok(report)
}

/// Re-check a certificate using only the report and the vector.
pub fn recheck_certificate(report: &BeauvilleReport, opts: &CheckOptions) -> Result<bool> {
    let v: DefiningVector = report
        .vector
        .as_deref()
        .ok_or_else(|| Error::Precondition("report has no vector".into()))?
        .parse()?;
    let mut q = FiniteQuotient::new(&v, report.depth)?;
    match &report.certificate {
        None => Ok(false),
        Some(Certificate::Cyclic) => {
            q.enumerate(opts.enum_cap)?;
            is_cyclic(&q)
        }
        Some(Certificate::CosetSocle { classes, orbit, .. }) => {
            let set: BTreeSet<(u32, u32)> = classes.iter().copied().collect();
            if !covers_every_triple(v.p(), &set) {
                return Ok(false);
            }
            q.enumerate(opts.enum_cap)?;
            let (p, n) = (v.p(), v.n());
            let parse = |texts: &Vec<String>| -> Result<BTreeSet<TruncatedAutomorphism>> {
                texts.iter().map(|t| TruncatedAutomorphism::parse_text(p, n, t)).collect()
            };
            let orbit: BTreeSet<BTreeSet<TruncatedAutomorphism>> =
                orbit.iter().map(parse).collect::<Result<_>>()?;
            // closed under conjugation by the generators
            for h in &orbit {
                for g in q.generators() {
                    let hg: BTreeSet<_> = h.iter().map(|x| x.conjugate_by(&g)).collect();
                    if !orbit.contains(&hg) {
                        return Ok(false);
                    }
                }
            }
            for e in q.elements()? {
                if set.contains(&(e.coords.alpha, e.coords.beta))
                    && !orbit.contains(&socle(&e.aut)?.elements)
                {
                    return Ok(false);
                }
            }
            Ok(q.frattini_consistent())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Structure {
        x: [String; 2],
        y: [String; 2],
    },
    Exhausted {
        pairs: usize,
        signatures: usize,
    },
}

/// Exhaustive search over generating pairs, comparing the sets of socle
/// orbits their triples occupy.
pub fn search_beauville_structure(q: &mut FiniteQuotient, cap: usize) -> Result<SearchOutcome> {
    let order = q.enumerate(cap)?;
    if order > cap {
        return Err(Error::CapExceeded {
            what: "structure search",
            cap,
            partial: order,
        });
    }
    if is_cyclic(q)? {
        return Ok(SearchOutcome::Exhausted { pairs: 0, signatures: 0 });
    }
    let elems: Vec<Element> = q.elements()?.collect();
    let gens = q.generators();
    // orbit id of the socle of every nontrivial element
    let socle_of: Vec<Option<BTreeSet<TruncatedAutomorphism>>> = elems
        .par_iter()
        .map(|e| (!e.aut.is_identity()).then(|| socle(&e.aut).map(|h| h.elements)).transpose())
        .collect::<Result<_>>()?;
    let mut orbit_id: BTreeMap<BTreeSet<TruncatedAutomorphism>, usize> = BTreeMap::new();
    let mut n_orbits = 0;
    for s in socle_of.iter().flatten() {
        if orbit_id.contains_key(s) {
            continue;
        }
        let h = SubgroupHandle {
            generators: vec![],
            elements: s.clone(),
        };
        for o in conjugacy_orbit(&h, &gens, cap)? {
            orbit_id.insert(o.elements, n_orbits);
        }
        n_orbits += 1;
    }
    let oid: Vec<Option<usize>> = socle_of.iter().map(|s| s.as_ref().map(|s| orbit_id[s])).collect();
    let index: HashMap<&TruncatedAutomorphism, usize> = elems.iter().enumerate().map(|(i, e)| (&e.aut, i)).collect();
    let p = q.p();
    let consistent = q.depth >= 2 && q.frattini_consistent();
    let total = order;
    let signatures: BTreeMap<BTreeSet<usize>, (usize, usize)> = (0..elems.len())
        .into_par_iter()
        .map(|i| {
            let mut local: BTreeMap<BTreeSet<usize>, (usize, usize)> = BTreeMap::new();
            for j in i + 1..elems.len() {
                let (x1, x2) = (&elems[i], &elems[j]);
                let gen = if consistent {
                    x1.coords.independent(x2.coords, p)
                } else {
                    q.subgroup(&[x1.aut.clone(), x2.aut.clone()], cap)
                        .map(|h| h.order() == total)
                        .unwrap_or(false)
                };
                if !gen {
                    continue;
                }
                let x3 = x1.aut.mul(&x2.aut);
                let k3 = index[&x3];
                let sig: Option<BTreeSet<usize>> = [oid[i], oid[j], oid[k3]].into_iter().collect();
                if let Some(sig) = sig {
                    local.entry(sig).or_insert((i, j));
                }
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                let e = a.entry(k).or_insert(v);
                if v < *e {
                    *e = v;
                }
            }
            a
        });
    let pairs = signatures.len();
    let sigs: Vec<(&BTreeSet<usize>, &(usize, usize))> = signatures.iter().collect();
    for (i, (s1, w1)) in sigs.iter().enumerate() {
        for (s2, w2) in &sigs[i..] {
            if s1.is_disjoint(s2) {
                let t = |k: usize| elems[k].aut.to_text();
                return Ok(SearchOutcome::Structure {
                    x: [t(w1.0), t(w1.1)],
                    y: [t(w2.0), t(w2.1)],
                });
            }
        }
    }
    Ok(SearchOutcome::Exhausted {
        pairs: elems.len() * (elems.len() - 1) / 2,
        signatures: pairs,
    })
}

/// `C_5 × C_5` realized on the 5-adic tree of depth 2: the rooted cycle and
/// the element with the rooted cycle in every first-level section.
pub fn abelian_surrogate() -> Result<FiniteQuotient> {
    let shape = crate::tree::TreeShape::new(5, 1, 2)?;
    let x = TruncatedAutomorphism::rooted(shape, 1);
    let below = shape.with_depth(1);
    let y = TruncatedAutomorphism::psi_inverse(shape, &vec![TruncatedAutomorphism::rooted(below, 1); 5])?;
    FiniteQuotient::from_generators(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> DefiningVector {
        s.parse().unwrap()
    }

    fn surrogate_triple(q: &FiniteQuotient, u: (i64, i64), w: (i64, i64)) -> BeauvilleTriple {
        let el = |(i, j): (i64, i64)| q.a.pow(i).mul(&q.b.pow(j));
        BeauvilleTriple::new(el(u), el(w), &format!("{u:?}"), &format!("{w:?}"))
    }

    #[test]
    fn abelian_surrogate_triples() {
        let mut q = abelian_surrogate().unwrap();
        assert_eq!(q.enumerate(1000).unwrap(), 25);
        let opts = CheckOptions::default();
        let x = surrogate_triple(&q, (1, 0), (0, 1));
        // these two triples share the line through (1,1)
        let y_shared = surrogate_triple(&q, (1, 1), (1, 2));
        let r = beauville_condition(&q, &x, &y_shared, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.pairs.iter().filter(|p| p.status == PairStatus::Meets).count(), 1);
        let y = surrogate_triple(&q, (1, 2), (1, 4));
        let r = beauville_condition(&q, &x, &y, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Beauville);
        assert!(matches!(
            search_beauville_structure(&mut q, 10_000).unwrap(),
            SearchOutcome::Structure { .. }
        ));
    }

    #[test]
    fn identical_triples_fail() {
        let vv = v("p=2 n=2 e=1,0,1");
        let q = FiniteQuotient::new(&vv, 3).unwrap();
        let x = BeauvilleTriple::from_words(&vv, 3, &Word::a(), &Word::Product(vec![Word::a(), Word::b()])).unwrap();
        let r = beauville_condition(&q, &x, &x, &CheckOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        for p in r.pairs.iter().filter(|p| p.x == p.y) {
            assert_eq!(p.status, PairStatus::Meets);
            assert_eq!(p.witness.as_deref(), Some(""));
        }
    }

    #[test]
    fn coverage_lemma() {
        for p in [2, 3, 5] {
            let sets = unavoidable_class_sets(p);
            let mixed: BTreeSet<_> = (1..p).flat_map(|x| (1..p).map(move |y| (x, y))).collect();
            assert!(sets.contains(&mixed));
            assert_eq!(sets.len(), if p == 2 { 3 } else { 1 });
        }
    }

    #[test]
    fn c_for_the_second_grigorchuk_vector() {
        let vv = v("p=2 n=2 e=1,0,1");
        let c = construct_c(&vv, 5).unwrap();
        assert_eq!(c.case, 2);
        assert_eq!(c.pattern.level, 2);
        assert_eq!(c.pattern.target.to_string(), "[a, b, a^2]");
        assert_eq!(c.strategy, CStrategy::Words);
        assert!(c.pattern.check(&vv, c.element()).unwrap());
        assert_eq!(c.pattern.realize(&vv, 5).unwrap(), *c.element());
        // a word of weight three, so it lies in gamma_3
        assert!(c.word.as_ref().unwrap().coords(2).is_zero());
    }

    #[test]
    fn c_preconditions() {
        assert!(construct_c(&v("p=2 n=2 e=2,0,2"), 4).is_err());
        assert!(construct_c(&v("p=2 n=2 e=1,0,0"), 4).is_err());
    }

    #[test]
    fn branching_cases() {
        let b = branching_element(&v("p=2 n=2 e=1,0,0"), 0, Some(1), 4).unwrap();
        assert_eq!(b.case, 1);
        assert_eq!(b.word.to_string(), "[b, (b)^(a), b]");
        let b = branching_element(&v("p=2 n=2 e=1,0,1"), 0, Some(1), 5).unwrap();
        assert_eq!(b.case, 2);
        assert!(check_single(&v("p=2 n=2 e=1,0,1"), &b.word, 1, &b.target, 6).unwrap());
    }

    #[test]
    fn certificates_for_small_class_e_quotients() {
        let opts = CheckOptions::default();
        for (s, k) in [("p=2 n=2 e=2,0,2", 1), ("p=2 n=2 e=2,0,2", 2), ("p=2 n=2 e=2,0,0", 3)] {
            let mut q = FiniteQuotient::new(&v(s), k).unwrap();
            let r = certify_not_beauville(&mut q, &opts).unwrap();
            assert_eq!(r.verdict, Verdict::NotBeauvilleCertified, "{s} k={k}");
            assert!(recheck_certificate(&r, &opts).unwrap());
        }
    }

    #[test]
    fn c_lies_in_gamma_3() {
        let vv = v("p=2 n=2 e=1,0,1");
        let c = construct_c(&vv, 5).unwrap();
        let a = vv.generator_a(5).unwrap();
        let b = vv.generator_b(5).unwrap();
        let ab = a.commutator(&b);
        let g3 = LevelPcgs::normal_closure(vv.shape(5).unwrap(), &[ab.commutator(&a), ab.commutator(&b)], &[a, b]);
        assert!(g3.contains(c.element()));
        assert!(!c.element().is_identity());
    }

    #[test]
    fn branching_position_shifts_under_conjugation() {
        let vv = v("p=2 n=2 e=1,0,0");
        let el = branching_element(&vv, 0, Some(1), 4).unwrap();
        let x = el.word.eval_in(&vv, 4).unwrap();
        let shifted = x.conjugate_by(&vv.generator_a(4).unwrap());
        let target = el.target.eval_in(&vv, 3).unwrap();
        let parts = shifted.psi().unwrap();
        for (i, s) in parts.iter().enumerate() {
            if i + 1 == el.position as usize + 1 {
                assert_eq!(*s, target);
            } else {
                assert!(s.is_identity());
            }
        }
    }

    #[test]
    fn condition_is_symmetric_and_conjugation_invariant() {
        let vv = v("p=2 n=2 e=1,0,1");
        let k = 4;
        let q = FiniteQuotient::new(&vv, k).unwrap();
        let c = construct_c(&vv, k).unwrap();
        let (x, y) = standard_triples(&vv, k, &c).unwrap();
        let opts = CheckOptions::default();
        let xy = beauville_condition(&q, &x, &y, &opts).unwrap();
        let yx = beauville_condition(&q, &y, &x, &opts).unwrap();
        assert_eq!(xy.verdict, yx.verdict);
        for p in &xy.pairs {
            let t = yx.pairs.iter().find(|t| t.x == p.y && t.y == p.x).unwrap();
            assert_eq!(p.status, t.status);
        }
        let g = q.a.mul(&q.b).mul(&q.a);
        let yg = BeauvilleTriple::new(y.elems[0].conj(&g), y.elems[1].conj(&g), "u", "w");
        let conj = beauville_condition(&q, &x, &yg, &opts).unwrap();
        assert_eq!(conj.verdict, xy.verdict);
    }

    #[test]
    fn finite_mode() {
        let vv = v("p=2 n=3 e=0,0,0,0,2,0,6");
        assert!(verify_standard_structure(&vv, None, &CheckOptions::default(), true).is_err());
        let (r, c) = verify_standard_structure(&vv, Some(4), &CheckOptions::default(), true).unwrap();
        assert_eq!(c.pattern.target.to_string(), "[a^2, b, a^4]");
        assert_eq!(r.verdict, Verdict::Beauville);
        // class E vectors are refused
        assert!(c_pattern_finite(&v("p=2 n=2 e=2,0,2")).is_err());
    }

    #[test]
    fn report_json_is_stable() {
        let vv = v("p=2 n=2 e=2,0,2");
        let mut q = FiniteQuotient::new(&vv, 3).unwrap();
        let r = certify_not_beauville(&mut q, &CheckOptions::default()).unwrap();
        let a = serde_json::to_string(&serde_json::to_value(&r).unwrap()).unwrap();
        let back: BeauvilleReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
    }
}
