//! Invariant suites over the structure lemmas: fractality, branching,
//! stabilizer collapse, lower central series facts, and the order formula.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beauville::{branching_element, branching_hypotheses};
use crate::error::{Error, Result};
use crate::ggs::{valuation, DefiningVector, OrderMode};
use crate::group::{normal_closure_under, FiniteQuotient, SubgroupHandle};
use crate::pcgs::LevelPcgs;
use crate::tree::{TruncatedAutomorphism, Vertex};
use crate::words::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fractal,
    Branching,
    Stab,
    Nilpotent,
    Series,
    Allconj,
    Orders,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Fractal,
        Suite::Branching,
        Suite::Stab,
        Suite::Nilpotent,
        Suite::Series,
        Suite::Allconj,
        Suite::Orders,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fractal => "fractal",
            Suite::Branching => "branching",
            Suite::Stab => "stab",
            Suite::Nilpotent => "nilpotent",
            Suite::Series => "series",
            Suite::Allconj => "allconj",
            Suite::Orders => "orders",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub vector: String,
    pub depth: u32,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

/// Default depth for each suite.
pub fn default_depth(suite: Suite) -> u32 {
    match suite {
        Suite::Fractal | Suite::Branching | Suite::Nilpotent | Suite::Series | Suite::Allconj => 4,
        Suite::Stab => 6,
        Suite::Orders => 0,
    }
}

pub fn run_suite(suite: Suite, v: &DefiningVector, depth: Option<u32>, cap: usize) -> Result<SuiteReport> {
    let depth = depth.unwrap_or_else(|| default_depth(suite));
    let checks = match suite {
        Suite::Fractal => fractal_suite(v, depth)?,
        Suite::Branching => branching_suite(v, depth)?,
        Suite::Stab => stab_suite(v, depth)?,
        Suite::Nilpotent => nilpotent_suite(v, depth, cap)?,
        Suite::Series => series_suite(v, depth, cap)?,
        Suite::Allconj => allconj_suite(v, depth, cap)?,
        Suite::Orders => orders_suite(v, depth)?,
    };
    Ok(SuiteReport {
        suite,
        vector: v.to_string(),
        depth,
        checks,
    })
}

fn pow_p(v: &DefiningVector, k: u32) -> u64 {
    (v.p() as u64).pow(k)
}

/// `R_j` with `R_{-1} = 0` and the sequence held at its final value.
fn r_at(r: &[u32], j: i64) -> u32 {
    if j < 0 {
        0
    } else {
        r[(j as usize).min(r.len() - 1)]
    }
}

fn inverse_unit(u: u64, m: u64) -> u64 {
    (1..m).find(|x| (u * x) % m == 1).unwrap_or(1)
}

/// Words in `st_G(v)` whose sections at `v` are `a^{p^{R_{|v|-1}}}` and `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractalPreimage {
    pub vertex: Vertex,
    pub a_exponent: u64,
    pub a_word: Word,
    pub b_word: Word,
}

/// Preimages for every admissible vertex of length `< min(n, depth)`,
/// built letter by letter from conjugates of the previous `b`-preimage.
pub fn fractal_preimages(v: &DefiningVector, depth: u32) -> Vec<FractalPreimage> {
    let r = v.compute_r();
    let (p, n, d) = (v.p() as u64, v.n(), v.d() as u64);
    let mut level = vec![FractalPreimage {
        vertex: Vertex::root(),
        a_exponent: 1,
        a_word: Word::a(),
        b_word: Word::b(),
    }];
    let mut out = level.clone();
    // vertices have length at most n - 1 and must leave a nontrivial section
    let max_len = n.min(depth);
    for j in 0..max_len.saturating_sub(1) as i64 {
        let step = pow_p(v, r_at(&r, j - 1));
        let next_r = r_at(&r, j);
        let span = d / step;
        let mut next = Vec::new();
        for pre in &level {
            let conj = |m: u64| Word::conj(pre.b_word.clone(), Word::Product(vec![pre.a_word.clone(); m as usize]));
            for u in (step..=d).step_by(step as usize) {
                let m0 = (u / step) % span;
                let b_word = if m0 == 0 { pre.b_word.clone() } else { conj(m0) };
                // the conjugate whose section at u has least valuation
                let best = (0..span)
                    .filter(|&m| m != m0)
                    .map(|m| {
                        let idx = (u as i64 - (m * step) as i64).rem_euclid(d as i64);
                        (valuation(p, v.e(idx) as u64, n), m, v.e(idx) as u64)
                    })
                    .min();
                let a_word = match best {
                    Some((val, m, e)) if val < n => {
                        let unit = e / p.pow(val);
                        let c = inverse_unit(unit % d, d);
                        let base = if m == 0 { pre.b_word.clone() } else { conj(m) };
                        Word::Product(vec![base; c as usize])
                    }
                    _ => Word::Product(vec![]),
                };
                let mut vertex = pre.vertex.clone();
                vertex.0.push(u as u32);
                next.push(FractalPreimage {
                    vertex,
                    a_exponent: pow_p(v, next_r) % d,
                    a_word,
                    b_word,
                });
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Whether `w` fixes `vertex` and has section `target` there.
fn has_section(w: &TruncatedAutomorphism, vertex: &Vertex, target: &TruncatedAutomorphism) -> Result<bool> {
    Ok(w.apply(vertex)? == *vertex && w.section(vertex)? == *target)
}

fn fractal_suite(v: &DefiningVector, depth: u32) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for pre in fractal_preimages(v, depth) {
        let below = depth - pre.vertex.len() as u32;
        let a = v.generator_a(below)?.pow(pre.a_exponent as i64);
        let b = v.generator_b(below)?;
        let ga = pre.a_word.eval_in(v, depth)?;
        let gb = pre.b_word.eval_in(v, depth)?;
        let ok = has_section(&ga, &pre.vertex, &a)? && has_section(&gb, &pre.vertex, &b)?;
        checks.push(Check::new(
            format!("preimages at {}", pre.vertex),
            ok,
            format!("a^{} and b", pre.a_exponent),
        ));
    }
    Ok(checks)
}

fn left_comm3(gens: &[TruncatedAutomorphism]) -> Vec<TruncatedAutomorphism> {
    let mut out = Vec::new();
    for x in gens {
        for y in gens {
            let xy = x.commutator(y);
            if xy.is_identity() {
                continue;
            }
            for z in gens {
                out.push(xy.commutator(z));
            }
        }
    }
    out
}

/// `gamma_3` of the subgroup generated by `gens`.
fn gamma3(shape: crate::tree::TreeShape, gens: &[TruncatedAutomorphism]) -> LevelPcgs {
    LevelPcgs::normal_closure(shape, &left_comm3(gens), gens)
}

/// Compares `psi(gamma_3(st_N(1)))` for `N = <a^{p^alpha}, b>` with the
/// product of copies of `gamma_3(<a^{p^r}, b>)` at the positions divisible
/// by `p^alpha`.
pub fn branching_equality(v: &DefiningVector, alpha: u32, r: u32, depth: u32) -> Result<(bool, u64, u64)> {
    if depth < 2 {
        return Err(Error::Precondition("branching needs depth >= 2".into()));
    }
    let d = v.d() as u64;
    let step = pow_p(v, alpha);
    let shape = v.shape(depth)?;
    let b = v.generator_b(depth)?;
    let a = v.generator_a(depth)?;
    let stab_gens: Vec<TruncatedAutomorphism> =
        (0..d / step).map(|m| b.conjugate_by(&a.pow((m * step) as i64))).collect();
    let lhs = gamma3(shape, &stab_gens);
    let below = v.shape(depth - 1)?;
    let n_gens = [
        v.generator_a(depth - 1)?.pow(pow_p(v, r) as i64),
        v.generator_b(depth - 1)?,
    ];
    let factor = gamma3(below, &n_gens);
    let id = TruncatedAutomorphism::identity(below);
    let mut rhs_gens = Vec::new();
    for pos in (step..=d).step_by(step as usize) {
        for g in factor.generators() {
            let mut parts = vec![id.clone(); d as usize];
            parts[pos as usize - 1] = g;
            rhs_gens.push(TruncatedAutomorphism::psi_inverse(shape, &parts)?);
        }
    }
    let rhs = LevelPcgs::subgroup(shape, &rhs_gens);
    Ok((lhs.same_as(&rhs), lhs.log_order(), rhs.log_order()))
}

/// `R` for the odd-prime branching hypotheses at `r`, when they hold.
pub fn odd_branching_hypotheses(v: &DefiningVector, r: u32) -> bool {
    let (p, n) = (v.p() as u64, v.n());
    if p == 2 || r >= n {
        return false;
    }
    let step = p.pow(r) as i64;
    let count = p.pow(n - r) as i64;
    (1..count).all(|k| valuation(p, v.e(k * step) as u64, n) == r)
        && v.s_sum(r).is_multiple_of(p.pow(r + 1))
}

fn branching_suite(v: &DefiningVector, depth: u32) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in 0..v.n() {
        let Ok(r) = branching_hypotheses(v, alpha) else { continue };
        let (eq, lhs, rhs) = branching_equality(v, alpha, r, depth)?;
        checks.push(Check::new(
            format!("branching alpha={alpha} R={r}"),
            eq,
            format!("log orders {lhs} and {rhs}"),
        ));
        match branching_element(v, alpha, None, depth) {
            Ok(el) => {
                let x = el.word.eval_in(v, depth)?;
                let target = el.target.eval_in(v, depth - 1)?;
                let ok = x.psi().map(|parts| {
                    parts.iter().enumerate().all(|(i, s)| {
                        if i + 1 == el.position as usize {
                            *s == target
                        } else {
                            s.is_identity()
                        }
                    })
                });
                checks.push(Check::new(
                    format!("branching element alpha={alpha} k={}", el.k),
                    ok.unwrap_or(false),
                    format!("case {}, {}", el.case, el.word),
                ));
            }
            Err(e) => checks.push(Check::new(format!("branching element alpha={alpha}"), false, e.to_string())),
        }
    }
    for r in 0..v.n() {
        if odd_branching_hypotheses(v, r) {
            let (eq, lhs, rhs) = branching_equality(v, r, r, depth)?;
            checks.push(Check::new(
                format!("odd branching R={r}"),
                eq,
                format!("log orders {lhs} and {rhs}"),
            ));
        }
    }
    if checks.is_empty() {
        return Err(Error::Precondition("no branching hypotheses hold".into()));
    }
    Ok(checks)
}

/// Vectors of the finite `2^n` family: periodic with `R_0 = n - 1`.
fn require_finite_family(v: &DefiningVector, need_s0: bool) -> Result<()> {
    let ok = v.p() == 2
        && v.n() >= 2
        && v.is_periodic()
        && v.r0() == v.n() - 1
        && (!need_s0 || v.s_mod(0) == 0);
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(
            "needs p = 2, n >= 2, a periodic vector with R_0 = n - 1".into(),
        ))
    }
}

fn stab_suite(v: &DefiningVector, depth: u32) -> Result<Vec<Check>> {
    require_finite_family(v, false)?;
    let depth = depth.max(5);
    let logs: Vec<u64> = (1..=depth)
        .map(|k| {
            let shape = v.shape(k)?;
            Ok(LevelPcgs::subgroup(shape, &[v.generator_a(k)?, v.generator_b(k)?]).log_order())
        })
        .collect::<Result<_>>()?;
    let stable = logs[3..].iter().all(|&x| x == logs[3]);
    let half = (v.d() / 2) as i64;
    let predicted = (1..half).all(|i| v.e(i) == v.e(half + i));
    let st3 = logs[3] > logs[2];
    Ok(vec![
        Check::new(
            "St(4) trivial",
            stable,
            format!("log_2 |G_k| for k = 1..={depth}: {logs:?}"),
        ),
        Check::new(
            "St(3) nontrivial iff e_i = e_(d/2+i)",
            st3 == predicted,
            format!("St(3) nontrivial: {st3}, predicate: {predicted}"),
        ),
    ])
}

fn full_group(v: &DefiningVector, depth: u32, cap: usize) -> Result<FiniteQuotient> {
    let mut q = FiniteQuotient::new(v, depth)?;
    q.enumerate(cap)?;
    Ok(q)
}

/// `[b, a, ..., a]` with `m` copies of `a`.
fn b_a_commutator(m: usize) -> Word {
    let mut parts = vec![Word::b()];
    parts.extend(std::iter::repeat_n(Word::a(), m));
    Word::comm(parts)
}

fn first_level_derived(q: &FiniteQuotient, cap: usize) -> Result<SubgroupHandle> {
    let [a, b] = q.generators();
    let d = q.shape().d() as i64;
    let gens: Vec<TruncatedAutomorphism> = (0..d).map(|m| b.conjugate_by(&a.pow(m))).collect();
    let mut comms = Vec::new();
    for (i, x) in gens.iter().enumerate() {
        for y in &gens[i + 1..] {
            comms.push(x.commutator(y));
        }
    }
    normal_closure_under(&q.identity().aut, &comms, &gens, cap)
}

fn nilpotent_suite(v: &DefiningVector, depth: u32, cap: usize) -> Result<Vec<Check>> {
    require_finite_family(v, true)?;
    let q = full_group(v, depth, cap)?;
    let d = v.d() as usize;
    let series = q.lower_central_series(cap)?;
    let gamma = |i: usize| -> SubgroupHandle {
        series
            .get(i - 1)
            .cloned()
            .unwrap_or_else(|| SubgroupHandle {
                generators: vec![],
                elements: BTreeSet::from([q.identity().aut]),
            })
    };
    let derived = first_level_derived(&q, cap)?;
    let mut checks = vec![Check::new(
        format!("gamma_{} in St(1)'", d + 1),
        gamma(d + 1).is_subset(&derived),
        format!("|gamma_{}| = {}, |St(1)'| = {}", d + 1, gamma(d + 1).order(), derived.order()),
    )];
    let half = d / 2;
    let sq = |m: usize| -> Result<TruncatedAutomorphism> { Ok(b_a_commutator(m).eval_in(v, depth)?.pow(2)) };
    checks.push(Check::new(
        format!("[b, a x{half}]^2 = 1"),
        sq(half)?.is_identity(),
        String::new(),
    ));
    for i in 1..=3 {
        let x = sq(half + i)?;
        checks.push(Check::new(
            format!("[b, a x{}]^2 in gamma_{}", half + i, d + i + 2),
            gamma(d + i + 2).contains(&x),
            String::new(),
        ));
    }
    Ok(checks)
}

fn series_suite(v: &DefiningVector, depth: u32, cap: usize) -> Result<Vec<Check>> {
    require_finite_family(v, true)?;
    let q = full_group(v, depth, cap)?;
    let d = v.d() as usize;
    let series = q.lower_central_series(cap)?;
    let mut checks = Vec::new();
    for i in 2..=series.len() {
        let gi = &series[i - 1];
        let next_order = series.get(i).map(|s| s.order()).unwrap_or(1);
        let index = gi.order() / next_order;
        let squares_in_next = gi.generators.iter().all(|x| {
            let sq = x.pow(2);
            series.get(i).map(|s| s.contains(&sq)).unwrap_or(sq.is_identity())
        });
        let bound = if i > d { 2 } else { 4 };
        checks.push(Check::new(
            format!("gamma_{i}/gamma_{}", i + 1),
            [1, 2, 4].contains(&index) && index <= bound && squares_in_next,
            format!("index {index}, bound {bound}, exponent 2: {squares_in_next}"),
        ));
    }
    Ok(checks)
}

fn allconj_suite(v: &DefiningVector, depth: u32, cap: usize) -> Result<Vec<Check>> {
    require_finite_family(v, true)?;
    let q = full_group(v, depth, cap)?;
    let d = v.d() as i64;
    let ab = q.a.mul(&q.b).aut.pow(d);
    let set: BTreeSet<TruncatedAutomorphism> = q.elements()?.map(|g| ab.commutator(&g.aut)).collect();
    let mut parts = vec![Word::b()];
    parts.extend(std::iter::repeat_n(Word::a(), d as usize - 1));
    parts.push(Word::b());
    let w = Word::comm(parts).eval_in(v, depth)?;
    let closure = q.normal_closure(&[w], cap)?;
    Ok(vec![Check::new(
        "commutators of (ab)^d form a normal closure",
        set == closure.elements,
        format!("{} commutators, closure of order {}", set.len(), closure.order()),
    )])
}

/// Every admissible `(r, s, i, j)`: `r < n`, `s < n - R_0`, and units `i`,
/// `j` below the orders of `a^{p^r}` and `b^{p^s}`.
pub fn admissible_quadruples(v: &DefiningVector) -> Vec<(u32, u32, i64, i64)> {
    let (p, n, r0) = (v.p() as i64, v.n(), v.r0());
    let mut out = Vec::new();
    for r in 0..n {
        for s in 0..n.saturating_sub(r0) {
            let imax = p.pow(n - r);
            let jmax = p.pow(n - r0 - s);
            for i in (1..imax).filter(|i| i % p != 0) {
                for j in (1..jmax).filter(|j| j % p != 0) {
                    out.push((r, s, i, j));
                }
            }
        }
    }
    out
}

/// Formula against the leaf-permutation oracle at `m_rs + 3 + extra`
/// for `extra` in `0..=1` (or from `depth` when it is larger).
pub fn order_checks(v: &DefiningVector, depth: u32) -> Result<Vec<Check>> {
    use rayon::prelude::*;
    if !v.is_periodic() {
        return Err(Error::Precondition("orders need a periodic vector".into()));
    }
    admissible_quadruples(v)
        .into_par_iter()
        .map(|(r, s, i, j)| {
            let m = v.t_sequence(r, s)?.m_rs;
            let depths: Vec<u32> = if depth > m + 3 { vec![depth] } else { vec![m + 3, m + 4] };
            let mut ok = true;
            let mut detail = Vec::new();
            for k in depths {
                let c = v.order_of(r, s, i, j, k, OrderMode::Both)?;
                ok &= c.agree();
                detail.push(format!("k={k}: {}/{}", c.formula.unwrap_or(0), c.oracle.unwrap_or(0)));
            }
            Ok(Check::new(format!("order r={r} s={s} i={i} j={j}"), ok, detail.join(", ")))
        })
        .collect()
}

fn orders_suite(v: &DefiningVector, depth: u32) -> Result<Vec<Check>> {
    order_checks(v, depth)
}
