//! Defining-vector arithmetic for GGS-groups on the `p^n`-adic tree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{is_prime, TreeShape, TruncatedAutomorphism};

/// `v_p(x)`, capped at `cap` (so `v_p(0) = cap`).
pub fn valuation(p: u64, mut x: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    while x.is_multiple_of(p) && v < cap {
        x /= p;
        v += 1;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefiningVector {
    p: u32,
    n: u32,
    e: Vec<u32>,
}

impl DefiningVector {
    /// Entries are reduced mod `p^n`; the zero vector is rejected.
    pub fn new(p: u32, n: u32, e: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidVector(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidVector("n must be at least 1".into()));
        }
        let shape = TreeShape::new(p, n, 1).map_err(|e| Error::InvalidVector(e.to_string()))?;
        let d = shape.d();
        if e.len() != d as usize - 1 {
            return Err(Error::InvalidVector(format!(
                "expected {} entries, got {}",
                d - 1,
                e.len()
            )));
        }
        let e: Vec<u32> = e.into_iter().map(|x| x % d).collect();
        if e.iter().all(|&x| x == 0) {
            return Err(Error::InvalidVector("zero vector".into()));
        }
        Ok(DefiningVector { p, n, e })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.p.pow(self.n)
    }

    pub fn entries(&self) -> &[u32] {
        &self.e
    }

    /// `e_i` for `1 <= i <= d - 1`, indices taken mod `d` with `e_0 = 0`.
    pub fn e(&self, i: i64) -> u32 {
        let i = i.rem_euclid(self.d() as i64) as usize;
        if i == 0 {
            0
        } else {
            self.e[i - 1]
        }
    }

    pub fn shape(&self, depth: u32) -> Result<TreeShape> {
        TreeShape::new(self.p, self.n, depth)
    }

    fn pu(&self) -> u64 {
        self.p as u64
    }

    fn pow_p(&self, k: u32) -> u64 {
        self.pu().pow(k)
    }

    /// Rooted `a = (1 2 ... d)`.
    pub fn generator_a(&self, depth: u32) -> Result<TruncatedAutomorphism> {
        Ok(TruncatedAutomorphism::rooted(self.shape(depth)?, 1))
    }

    /// Directed `b` with `psi(b) = (a^{e_1}, ..., a^{e_{d-1}}, b)`.
    pub fn generator_b(&self, depth: u32) -> Result<TruncatedAutomorphism> {
        let shape = self.shape(depth)?;
        let d = shape.d() as usize;
        let mut labels = vec![0u8; shape.internal_count()];
        for level in 1..depth {
            let spine = shape.level_size(level - 1) - 1;
            let base = shape.level_offset(level) + spine * d;
            for (i, &ei) in self.e.iter().enumerate() {
                labels[base + i] = ei as u8;
            }
        }
        TruncatedAutomorphism::from_labels(shape, labels)
    }

    /// The `R_j` sequence, ending at the first repeat or at `n`.
    pub fn compute_r(&self) -> Vec<u32> {
        let n = self.n;
        let d = self.d() as usize;
        let min_val = |step: usize| -> u32 {
            (1..d)
                .filter(|l| l % step == 0)
                .map(|l| valuation(self.pu(), self.e[l - 1] as u64, n))
                .min()
                .unwrap_or(n)
        };
        let mut r = vec![min_val(1)];
        loop {
            let last = *r.last().expect("nonempty");
            if last >= n {
                break;
            }
            let next = min_val(self.pow_p(last) as usize);
            r.push(next);
            if next == last {
                break;
            }
        }
        r
    }

    pub fn r0(&self) -> u32 {
        self.compute_r()[0]
    }

    /// `S[k] = e_{p^k} + e_{2p^k} + ... + e_{p^n - p^k}` as an exact integer.
    pub fn s_sum(&self, k: u32) -> u64 {
        let step = self.pow_p(k) as usize;
        (1..self.d() as usize)
            .filter(|l| l % step == 0)
            .map(|l| self.e[l - 1] as u64)
            .sum()
    }

    pub fn s_mod(&self, k: u32) -> u64 {
        self.s_sum(k) % self.d() as u64
    }

    pub fn is_infinite(&self) -> bool {
        let r = self.compute_r();
        *r.last().expect("nonempty") < self.n
    }

    pub fn is_periodic(&self) -> bool {
        (0..self.n).all(|k| self.s_sum(k).is_multiple_of(self.pow_p(k + 1)))
    }

    /// Least `q` with `R_q = R_{q+1} < n`.
    pub fn q_index(&self) -> Option<u32> {
        let r = self.compute_r();
        r.windows(2)
            .position(|w| w[0] == w[1] && w[0] < self.n)
            .map(|q| q as u32)
    }

    /// The exponent tower attached to `a^{ip^r} b^{jp^s}`.
    pub fn t_sequence(&self, r: u32, s: u32) -> Result<OrderProfile> {
        let n = self.n;
        let r0 = self.r0();
        if r >= n {
            return Err(Error::Precondition(format!("r = {r} must be below n = {n}")));
        }
        if s >= n - r0 {
            return Err(Error::Precondition(format!(
                "s = {s} must be below n - R_0 = {}",
                n - r0
            )));
        }
        if !self.is_periodic() {
            return Err(Error::Precondition("defining vector is not periodic".into()));
        }
        let p = self.pu();
        let bound = n - s;
        let val = |k: u32| valuation(p, self.s_mod(k), n);
        let mut t_seq = Vec::new();
        let first = val(r);
        if first >= bound {
            t_seq.push(bound);
        } else {
            t_seq.push(first);
            loop {
                let prev = *t_seq.last().expect("nonempty");
                let t = val(prev + s);
                t_seq.push(t);
                if t >= bound {
                    break;
                }
                if t_seq.len() > n as usize + 1 {
                    return Err(Error::Precondition("t-sequence did not terminate".into()));
                }
            }
        }
        let m = t_seq.len() as u32 - 1;
        let head: u32 = t_seq[..m as usize].iter().sum();
        let t_rs = ((m + 2) * n) as i64 - (head + s * (m + 1) + r + r0) as i64;
        Ok(OrderProfile {
            r,
            s,
            m_rs: m,
            t_seq,
            t_rs: t_rs as u32,
        })
    }

    /// `a^{i p^r} b^{j p^s}` at the given depth.
    pub fn power_product(&self, r: u32, s: u32, i: i64, j: i64, depth: u32) -> Result<TruncatedAutomorphism> {
        let a = self.generator_a(depth)?;
        let b = self.generator_b(depth)?;
        Ok(a.pow(i * self.pow_p(r) as i64)
            .mul(&b.pow(j * self.pow_p(s) as i64)))
    }

    pub fn order_of(
        &self,
        r: u32,
        s: u32,
        i: i64,
        j: i64,
        depth: u32,
        mode: OrderMode,
    ) -> Result<OrderComparison> {
        let p = self.pu() as i64;
        if i.rem_euclid(p) == 0 || j.rem_euclid(p) == 0 {
            return Err(Error::Precondition(format!(
                "i = {i} and j = {j} must be units mod {p}"
            )));
        }
        let needs_formula = mode != OrderMode::Oracle;
        let profile = if needs_formula || mode == OrderMode::Oracle {
            match self.t_sequence(r, s) {
                Ok(pr) => Some(pr),
                Err(e) if needs_formula => return Err(e),
                Err(_) => None,
            }
        } else {
            None
        };
        let formula = if needs_formula {
            let pr = profile.as_ref().expect("profile computed");
            Some(self.pu().pow(pr.t_rs))
        } else {
            None
        };
        let oracle = if mode != OrderMode::Formula {
            if let Some(pr) = &profile {
                if depth < pr.m_rs + 3 {
                    return Err(Error::Precondition(format!(
                        "depth {depth} is below m_rs + 3 = {}",
                        pr.m_rs + 3
                    )));
                }
            }
            Some(self.power_product(r, s, i, j, depth)?.order())
        } else {
            None
        };
        Ok(OrderComparison {
            r,
            s,
            i,
            j,
            depth,
            formula,
            oracle,
        })
    }

    /// Variant of the class of finite groups without Beauville quotients.
    pub fn class_e(&self) -> ClassE {
        if self.n < 2 {
            return ClassE::None;
        }
        let r = self.compute_r();
        let n = self.n;
        if !self.is_infinite() {
            if let Ok(pr) = self.t_sequence(0, 0) {
                let mu = pr.m_rs as usize;
                if mu >= 1
                    && mu < r.len()
                    && (0..mu).all(|k| pr.t_seq[k] == r[k])
                    && r[mu] == n
                {
                    return ClassE::I;
                }
            }
        }
        if self.p == 2
            && r[0] == n - 1
            && self.s_sum(0).is_multiple_of(self.d() as u64)
            && self.e(self.d() as i64 / 2) == 0
            && self.is_periodic()
        {
            return ClassE::II;
        }
        ClassE::None
    }

    pub fn invariants(&self) -> GgsInvariants {
        let r = self.compute_r();
        let s = (0..self.n).map(|k| self.s_sum(k)).collect::<Vec<_>>();
        let s_mod = s.iter().map(|x| x % self.d() as u64).collect();
        GgsInvariants {
            p: self.p,
            n: self.n,
            e: self.e.clone(),
            infinite: self.is_infinite(),
            periodic: self.is_periodic(),
            class_e: self.class_e(),
            q: self.q_index(),
            abelianization: (self.d() as u64, self.pow_p(self.n - r[0])),
            r,
            s,
            s_mod,
        }
    }

    /// Every nonzero vector for `(p, n)` in lexicographic order.
    pub fn all(p: u32, n: u32) -> Result<Vec<DefiningVector>> {
        let shape = TreeShape::new(p, n, 1)?;
        let d = shape.d() as u64;
        let len = d as u32 - 1;
        let total = d
            .checked_pow(len)
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| Error::Precondition(format!("too many vectors for {p}^{n}")))?;
        (1..total)
            .map(|mut code| {
                let mut e = vec![0u32; len as usize];
                for slot in e.iter_mut().rev() {
                    *slot = (code % d) as u32;
                    code /= d;
                }
                DefiningVector::new(p, n, e)
            })
            .collect()
    }
}

impl fmt::Display for DefiningVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.e.iter().map(|x| x.to_string()).collect();
        write!(f, "p={} n={} e={}", self.p, self.n, e.join(","))
    }
}

impl FromStr for DefiningVector {
    type Err = Error;

    /// `"p=2 n=2 e=1,0,1"`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = None;
        let mut n = None;
        let mut e = None;
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (key, tail) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in {s:?}")))?;
            let end = tail
                .find(|c: char| c.is_ascii_alphabetic())
                .unwrap_or(tail.len());
            let value = &tail[..end];
            rest = &tail[end..];
            let bad = || Error::Parse(format!("bad value for {key}: {value:?}"));
            match key {
                "p" => p = Some(value.parse::<u32>().map_err(|_| bad())?),
                "n" => n = Some(value.parse::<u32>().map_err(|_| bad())?),
                "e" => {
                    e = Some(
                        value
                            .split(',')
                            .map(|x| x.parse::<u32>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad())?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        match (p, n, e) {
            (Some(p), Some(n), Some(e)) => DefiningVector::new(p, n, e),
            _ => Err(Error::Parse(format!("need p, n and e in {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassE {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
}

impl fmt::Display for ClassE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassE::None => "none",
            ClassE::I => "(i)",
            ClassE::II => "(ii)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GgsInvariants {
    pub p: u32,
    pub n: u32,
    pub e: Vec<u32>,
    pub r: Vec<u32>,
    pub s: Vec<u64>,
    pub s_mod: Vec<u64>,
    pub infinite: bool,
    pub periodic: bool,
    pub class_e: ClassE,
    pub q: Option<u32>,
    /// Orders of the two cyclic factors of the abelianization.
    pub abelianization: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderProfile {
    pub r: u32,
    pub s: u32,
    pub m_rs: u32,
    pub t_seq: Vec<u32>,
    pub t_rs: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderMode {
    Formula,
    Oracle,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderComparison {
    pub r: u32,
    pub s: u32,
    pub i: i64,
    pub j: i64,
    pub depth: u32,
    pub formula: Option<u64>,
    pub oracle: Option<u64>,
}

impl OrderComparison {
    pub fn agree(&self) -> bool {
        match (self.formula, self.oracle) {
            (Some(f), Some(o)) => f == o,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdData {
    pub q: u32,
    pub r_q: u32,
    /// `m_{0,0}`.
    pub mu: u32,
    /// `m_{1,0}`.
    pub m10: u32,
    pub lambda_prime: u32,
    /// `log_p` of the order of `[a^{p^R}, b, a^{p^R}] b`.
    pub d_exp: u32,
    pub m: u32,
    pub m_g: u32,
    /// Working depth at which the scan stabilized.
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub start_depth: u32,
    pub max_depth: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            start_depth: 3,
            max_depth: 8,
        }
    }
}

/// Rooted power of `a` at its own depth.
pub fn is_rooted(f: &TruncatedAutomorphism) -> bool {
    f.labels().iter().skip(1).all(|&x| x == 0)
}

impl DefiningVector {
    /// `[a^{p^R}, b, a^{p^R}] b` with `R = R_q`.
    pub fn threshold_word(&self, depth: u32) -> Result<TruncatedAutomorphism> {
        let q = self
            .q_index()
            .ok_or_else(|| Error::Precondition("group is finite".into()))?;
        let rq = self.compute_r()[q as usize];
        let a = self.generator_a(depth)?.pow(self.pow_p(rq) as i64);
        let b = self.generator_b(depth)?;
        Ok(a.commutator(&b).commutator(&a).mul(&b))
    }

    /// `(lambda, d_exp)` at one working depth.
    pub fn lambda_scan_at(&self, depth: u32) -> Result<(u32, u32)> {
        let w = self.threshold_word(depth)?;
        let ord = w.order();
        let d_exp = valuation(self.pu(), ord, 64);
        let z = w.pow((ord / self.pu()) as i64);
        let b = self.generator_b(depth)?;
        let b_order = self.pow_p(self.n - self.r0()) as i64;
        for level in 0..=depth {
            let sub_depth = depth - level;
            // conjugates of powers of b by powers of a, at the section depth
            let bs = b.truncate(sub_depth);
            let a_sub = TruncatedAutomorphism::rooted(bs.shape(), 1);
            let mut allowed = std::collections::HashSet::new();
            for jb in 0..b_order {
                let bj = bs.pow(jb);
                for ia in 0..self.d() as i64 {
                    allowed.insert(bj.conjugate_by(&a_sub.pow(ia)));
                }
            }
            let ok = (0..z.shape().level_size(level)).all(|idx| {
                let sec = z.section_at(level, idx);
                is_rooted(&sec) || allowed.contains(&sec)
            });
            if ok {
                return Ok((level, d_exp));
            }
        }
        unreachable!("depth-0 sections are always rooted")
    }

    /// Threshold data with adaptive deepening until `(lambda', d_exp)` repeat.
    pub fn lambda_prime(&self, cfg: ScanConfig) -> Result<ThresholdData> {
        if self.n < 2 {
            return Err(Error::Precondition("threshold needs n >= 2".into()));
        }
        if !self.is_infinite() || !self.is_periodic() {
            return Err(Error::Precondition(
                "threshold is defined for infinite periodic groups".into(),
            ));
        }
        let q = self.q_index().expect("infinite");
        let r_q = self.compute_r()[q as usize];
        let mu = self.t_sequence(0, 0)?.m_rs;
        let m10 = self.t_sequence(1, 0)?.m_rs;
        let mut prev = self.lambda_scan_at(cfg.start_depth)?;
        for depth in cfg.start_depth + 1..=cfg.max_depth {
            let cur = self.lambda_scan_at(depth)?;
            if cur == prev && depth >= cur.0 + 2 {
                let (lambda_prime, d_exp) = cur;
                let m = (mu + lambda_prime).max(m10);
                return Ok(ThresholdData {
                    q,
                    r_q,
                    mu,
                    m10,
                    lambda_prime,
                    d_exp,
                    m,
                    m_g: m + 3,
                    depth,
                });
            }
            prev = cur;
        }
        Err(Error::Unstable {
            what: "lambda' scan",
            max_depth: cfg.max_depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> DefiningVector {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        let x = v("p=2 n=2 e=1,0,1");
        assert_eq!(x.to_string(), "p=2 n=2 e=1,0,1");
        assert_eq!(v(" p = 2  n=2 e = 1, 0 ,1 "), x);
        assert_eq!(v("p=2 n=2 e=5,4,1").entries(), &[1, 0, 1]);
        assert_eq!(
            "p=2 n=2 e=0,0,0".parse::<DefiningVector>(),
            Err(Error::InvalidVector("zero vector".into()))
        );
        assert!("p=4 n=1 e=1,1,1".parse::<DefiningVector>().is_err());
        assert!("p=2 n=2 e=1,0".parse::<DefiningVector>().is_err());
        assert!("p=2 e=1".parse::<DefiningVector>().is_err());
    }

    #[test]
    fn r_sequences() {
        assert_eq!(v("p=2 n=2 e=1,0,1").compute_r(), vec![0, 0]);
        assert_eq!(v("p=2 n=2 e=2,0,2").compute_r(), vec![1, 2]);
        assert_eq!(v("p=2 n=2 e=2,0,0").compute_r(), vec![1, 2]);
        assert_eq!(v("p=2 n=2 e=0,2,0").compute_r(), vec![1, 1]);
    }

    #[test]
    fn s_sums_and_flags() {
        let g = v("p=2 n=2 e=1,0,1");
        assert_eq!((g.s_sum(0), g.s_sum(1)), (2, 0));
        assert!(g.is_periodic() && g.is_infinite());
        let f = v("p=2 n=2 e=2,0,2");
        assert_eq!((f.s_sum(0), f.s_sum(1)), (4, 0));
        assert!(f.is_periodic() && !f.is_infinite());
        assert!(!v("p=2 n=2 e=1,0,0").is_periodic());
    }

    #[test]
    fn t_sequences() {
        let g = v("p=2 n=2 e=1,0,1");
        let p00 = g.t_sequence(0, 0).unwrap();
        assert_eq!((p00.m_rs, p00.t_seq[0], p00.t_rs), (1, 1, 5));
        let p10 = g.t_sequence(1, 0).unwrap();
        assert_eq!((p10.m_rs, p10.t_seq.clone(), p10.t_rs), (0, vec![2], 3));
        let f = v("p=2 n=2 e=2,0,2").t_sequence(0, 0).unwrap();
        assert_eq!((f.m_rs, f.t_rs), (0, 3));
        assert!(g.t_sequence(2, 0).is_err());
        assert!(v("p=2 n=2 e=1,0,0").t_sequence(0, 0).is_err());
    }

    #[test]
    fn class_e_variants() {
        assert_eq!(v("p=2 n=2 e=2,0,0").class_e(), ClassE::I);
        assert_eq!(v("p=2 n=2 e=2,0,2").class_e(), ClassE::II);
        assert_eq!(v("p=2 n=2 e=1,0,1").class_e(), ClassE::None);
    }

    #[test]
    fn generators() {
        let g = v("p=2 n=2 e=1,0,1");
        let b = g.generator_b(3).unwrap();
        let parts = b.psi().unwrap();
        let a2 = g.generator_a(2).unwrap();
        assert_eq!(parts[0], a2);
        assert!(parts[1].is_identity());
        assert_eq!(parts[2], a2);
        assert_eq!(parts[3], g.generator_b(2).unwrap());
        assert!(g.generator_b(1).unwrap().is_identity());
        assert_eq!(g.generator_b(2).unwrap().order(), 4);
        assert_eq!(b.first_moved_level(), Some(2));
    }

    #[test]
    fn order_of_rejects_non_units() {
        let g = v("p=2 n=2 e=1,0,1");
        assert!(g.order_of(0, 0, 2, 1, 4, OrderMode::Both).is_err());
        assert!(g.order_of(0, 0, 1, 1, 3, OrderMode::Oracle).is_err());
        let c = g.order_of(0, 0, 1, 1, 4, OrderMode::Both).unwrap();
        assert_eq!(c.formula, Some(32));
        assert_eq!(c.oracle, Some(32));
    }
}

