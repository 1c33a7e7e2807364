use std::collections::BTreeMap;

use ggs_core::ggs::DefiningVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::Opts;
use crate::Failure;

pub enum Level {
    Auto,
    List(Vec<u32>),
}

impl Level {
    pub fn parse(s: Option<&str>) -> Result<Level, Failure> {
        match s {
            None | Some("auto") => Ok(Level::Auto),
            Some(s) => s
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| Failure::usage(format!("bad level {x:?}"))))
                .collect::<Result<_, _>>()
                .map(Level::List),
        }
    }
}

/// Strip `#` comments and blank lines.
pub fn parse_vector_file(text: &str) -> Result<Vec<DefiningVector>, Failure> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().map_err(Failure::from))
        .collect()
}

fn need(x: Option<u32>, flag: &str) -> Result<u32, Failure> {
    x.ok_or_else(|| Failure::usage(format!("--{flag} is required")))
}

/// `count` distinct random vectors (periodic ones if requested), sorted.
fn sample_vectors(p: u32, n: u32, count: usize, o: &Opts) -> Result<Vec<DefiningVector>, Failure> {
    let d = p.pow(n);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut found = BTreeMap::new();
    for _ in 0..count.saturating_mul(10_000) {
        if found.len() == count {
            break;
        }
        let e: Vec<u32> = (1..d).map(|_| rng.gen_range(0..d)).collect();
        if let Ok(v) = DefiningVector::new(p, n, e.clone()) {
            if !o.all_periodic || v.is_periodic() {
                found.insert(e, v);
            }
        }
    }
    if found.len() < count {
        return Err(Failure::usage(format!("found only {} of {count} vectors", found.len())));
    }
    Ok(found.into_values().collect())
}

/// Vectors from, in order of precedence: a vector file, positional spec,
/// `--p/--n/--e`, or every (periodic) vector for `--p/--n`.
pub fn resolve_vectors(spec: &[String], o: &Opts, sweep: bool) -> Result<Vec<DefiningVector>, Failure> {
    let mut vectors = if let Some(path) = &o.file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        parse_vector_file(&text)?
    } else if !spec.is_empty() {
        vec![spec.join(" ").parse()?]
    } else if let Some(e) = &o.e {
        let e = e
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Failure::usage(format!("bad entry {x:?}"))))
            .collect::<Result<_, _>>()?;
        vec![DefiningVector::new(need(o.p, "p")?, need(o.n, "n")?, e)?]
    } else if sweep || o.all_periodic {
        let (p, n) = (need(o.p, "p")?, need(o.n, "n")?);
        if sweep && !o.large && p.checked_pow(n).is_none_or(|d| d > 9) {
            return Err(Failure::usage("sweeps are limited to p^n <= 9; pass --large to override"));
        }
        if let (Some(k), false) = (o.sample, sweep) {
            return sample_vectors(p, n, k, o);
        }
        let all = DefiningVector::all(p, n)?;
        if o.all_periodic {
            all.into_iter().filter(|v| v.is_periodic()).collect()
        } else {
            all
        }
    } else {
        return Err(Failure::usage("no vector given"));
    };
    if let Some(k) = o.sample.filter(|_| o.file.is_some() || sweep) {
        let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
        vectors.shuffle(&mut rng);
        vectors.truncate(k);
        vectors.sort_by_key(|v| (v.p(), v.n(), v.entries().to_vec()));
    }
    if vectors.is_empty() {
        return Err(Failure::usage("no vectors selected"));
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_file_comments() {
        let text = "# header\np=2 n=2 e=1,0,1  # the second group\n\n  p=2 n=2 e=2,0,2\n";
        let v = parse_vector_file(text).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].to_string(), "p=2 n=2 e=2,0,2");
        assert!(parse_vector_file("p=2 n=2 e=0,0,0").is_err());
    }

    #[test]
    fn levels() {
        assert!(matches!(Level::parse(None).unwrap(), Level::Auto));
        assert!(matches!(Level::parse(Some("1,2, 3")).unwrap(), Level::List(l) if l == vec![1, 2, 3]));
        assert!(Level::parse(Some("x")).is_err());
    }
}
