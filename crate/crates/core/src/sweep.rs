//! Classification table over every defining vector for a given `(p, n)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beauville::{certify_not_beauville, verify_standard_structure, CheckOptions};
use crate::error::Result;
use crate::ggs::{ClassE, DefiningVector, ScanConfig};
use crate::group::FiniteQuotient;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub vector: String,
    pub r: Vec<u32>,
    pub infinite: bool,
    pub periodic: bool,
    pub class_e: ClassE,
    /// Threshold level for infinite periodic groups, when the scan settles.
    pub m_g: Option<u32>,
    /// Verdict (or error text) at each requested level.
    pub verdicts: BTreeMap<u32, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepOptions {
    pub levels: Vec<u32>,
    pub check: CheckOptions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagCounts {
    pub rows: usize,
    pub infinite: usize,
    pub periodic: usize,
    pub infinite_periodic: usize,
    pub class_e_i: usize,
    pub class_e_ii: usize,
}

pub fn flag_counts(rows: &[SweepRow]) -> FlagCounts {
    let mut c = FlagCounts {
        rows: rows.len(),
        ..FlagCounts::default()
    };
    for r in rows {
        c.infinite += r.infinite as usize;
        c.periodic += r.periodic as usize;
        c.infinite_periodic += (r.infinite && r.periodic) as usize;
        c.class_e_i += (r.class_e == ClassE::I) as usize;
        c.class_e_ii += (r.class_e == ClassE::II) as usize;
    }
    c
}

fn verdict_at(v: &DefiningVector, k: u32, check: &CheckOptions) -> String {
    let result = if v.is_infinite() && v.is_periodic() && v.n() >= 2 && k >= 2 {
        verify_standard_structure(v, Some(k), check, false).map(|(r, _)| r.verdict)
    } else {
        FiniteQuotient::new(v, k).and_then(|mut q| certify_not_beauville(&mut q, check).map(|r| r.verdict))
    };
    match result {
        Ok(verdict) => verdict.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

pub fn sweep_row(v: &DefiningVector, opts: &SweepOptions) -> SweepRow {
    let inv = v.invariants();
    let m_g = if inv.infinite && inv.periodic && v.n() >= 2 {
        v.lambda_prime(ScanConfig::default()).ok().map(|t| t.m_g)
    } else {
        None
    };
    SweepRow {
        vector: v.to_string(),
        r: inv.r,
        infinite: inv.infinite,
        periodic: inv.periodic,
        class_e: inv.class_e,
        m_g,
        verdicts: opts.levels.iter().map(|&k| (k, verdict_at(v, k, &opts.check))).collect(),
    }
}

/// Rows in the order of `vectors`, computed in parallel.
pub fn sweep_vectors(vectors: &[DefiningVector], opts: &SweepOptions) -> Vec<SweepRow> {
    vectors.par_iter().map(|v| sweep_row(v, opts)).collect()
}

/// All nonzero vectors for `(p, n)`, lexicographically.
pub fn sweep(p: u32, n: u32, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    Ok(sweep_vectors(&DefiningVector::all(p, n)?, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_quaternary_sweep() {
        let rows = sweep(2, 2, &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 63);
        assert_eq!(rows[0].vector, "p=2 n=2 e=0,0,1");
        for row in &rows {
            let v: DefiningVector = row.vector.parse().unwrap();
            assert_eq!(v.invariants().class_e, row.class_e);
            if row.class_e == ClassE::II {
                // R_0 = 1 forces even entries, and the middle one vanishes
                assert!(v.entries().iter().all(|x| x % 2 == 0));
                assert_eq!(v.e(2), 0);
            }
        }
    }
}
