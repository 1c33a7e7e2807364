use ggs_core::beauville::{abelian_surrogate, beauville_condition, BeauvilleTriple, CheckOptions};
use ggs_core::classes::{class_key, NormalFlags};
use ggs_core::ggs::DefiningVector;
use ggs_core::tree::{TruncatedAutomorphism, Vertex};
use proptest::prelude::*;

const VECTORS: [&str; 4] = [
    "p=2 n=2 e=1,0,1",
    "p=2 n=2 e=2,0,2",
    "p=3 n=1 e=1,2",
    "p=3 n=2 e=1,0,0,2,0,0,0,0",
];
const DEPTH: u32 = 3;

/// A word in `a, b` as (letter is b, exponent) pairs.
fn word() -> impl Strategy<Value = Vec<(bool, i64)>> {
    prop::collection::vec((any::<bool>(), -4i64..5), 0..12)
}

fn eval(v: &DefiningVector, w: &[(bool, i64)]) -> TruncatedAutomorphism {
    let a = v.generator_a(DEPTH).unwrap();
    let b = v.generator_b(DEPTH).unwrap();
    w.iter().fold(TruncatedAutomorphism::identity(a.shape()), |acc, &(is_b, k)| {
        acc.compose(&if is_b { b.pow(k) } else { a.pow(k) }).unwrap()
    })
}

fn vector() -> impl Strategy<Value = DefiningVector> {
    (0..VECTORS.len()).prop_map(|i| VECTORS[i].parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws((v, x, y, z) in vector().prop_flat_map(|v| (Just(v), word(), word(), word()))) {
        let (x, y, z) = (eval(&v, &x), eval(&v, &y), eval(&v, &z));
        let id = TruncatedAutomorphism::identity(x.shape());
        prop_assert_eq!(
            x.compose(&y).unwrap().compose(&z).unwrap(),
            x.compose(&y.compose(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(x.compose(&x.invert()).unwrap(), id.clone());
        prop_assert_eq!(x.pow(x.order() as i64), id);
        prop_assert_eq!(x.order(), x.leaf_permutation().order());
    }

    #[test]
    fn sections_reassemble((v, w) in vector().prop_flat_map(|v| (Just(v), word()))) {
        let g = eval(&v, &w);
        let shape = g.shape();
        let h = if g.in_level_stabilizer(1) { g } else { g.pow(v.d() as i64) };
        let parts = h.psi().unwrap();
        prop_assert_eq!(TruncatedAutomorphism::psi_inverse(shape, &parts).unwrap(), h);
    }

    #[test]
    fn conjugating_by_a_shifts_sections((v, w, k) in vector().prop_flat_map(|v| (Just(v), word(), 0i64..9))) {
        let g = eval(&v, &w);
        let h = if g.in_level_stabilizer(1) { g } else { g.pow(v.d() as i64) };
        let a = v.generator_a(DEPTH).unwrap();
        let mut expected = h.psi().unwrap();
        // the section of h^(a^k) at x is the section of h at x - k
        expected.rotate_right(k.rem_euclid(v.d() as i64) as usize);
        let conj = h.conjugate_by(&a.pow(k));
        prop_assert_eq!(conj.psi().unwrap(), expected.clone());
        for (x, part) in expected.iter().enumerate() {
            prop_assert_eq!(&conj.section(&Vertex(vec![x as u32 + 1])).unwrap(), part);
        }
    }

    #[test]
    fn class_key_is_a_conjugacy_invariant((v, x, g) in vector().prop_flat_map(|v| (Just(v), word(), word()))) {
        let flags = NormalFlags::new(&v, DEPTH - 1).unwrap();
        let (x, g) = (eval(&v, &x), eval(&v, &g));
        prop_assert_eq!(class_key(&x, &flags), class_key(&x.conjugate_by(&g), &flags));
    }

    #[test]
    fn condition_is_symmetric(u in (0i64..5, 0i64..5), w in (0i64..5, 0i64..5), s in (0i64..5, 0i64..5), t in (0i64..5, 0i64..5)) {
        let q = abelian_surrogate().unwrap();
        let el = |(i, j): (i64, i64)| q.a.pow(i).mul(&q.b.pow(j));
        let x = BeauvilleTriple::new(el(u), el(w), "x1", "x2");
        let y = BeauvilleTriple::new(el(s), el(t), "y1", "y2");
        let opts = CheckOptions::default();
        let xy = beauville_condition(&q, &x, &y, &opts).unwrap();
        let yx = beauville_condition(&q, &y, &x, &opts).unwrap();
        prop_assert_eq!(xy.verdict, yx.verdict);
        for p in &xy.pairs {
            let mirror = yx.pairs.iter().find(|m| m.x == p.y && m.y == p.x).unwrap();
            prop_assert_eq!(p.status, mirror.status);
        }
    }
}
