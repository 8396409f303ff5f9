use std::sync::Arc;

use proptest::prelude::*;

use typeforge::normalizer::{cost, normal};
use typeforge::packer::{compile, Engine, Packer};
use typeforge::typecore::{commit, commit_arc, equivalent, flatten, BaseKind, Datatype, Member};

fn base() -> impl Strategy<Value = Datatype> {
    prop_oneof![
        Just(BaseKind::Byte),
        Just(BaseKind::Short),
        Just(BaseKind::Int),
        Just(BaseKind::Double),
    ]
    .prop_map(Datatype::base)
}

/// Small random trees with non-negative displacements.
fn datatype() -> impl Strategy<Value = Datatype> {
    base().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (1i64..5, inner.clone()).prop_map(|(c, t)| Datatype::contiguous(c, t)),
            (1i64..5, 1i64..4, 0i64..4, inner.clone()).prop_map(|(c, b, gap, t)| Datatype::vector(
                c,
                b,
                b + gap,
                t
            )),
            (
                prop::collection::vec((1i64..4, 0i64..3), 1..5),
                inner.clone()
            )
                .prop_map(|(bs, t)| {
                    let mut at = 0;
                    let blocks = bs
                        .into_iter()
                        .map(|(len, gap)| {
                            let d = at + gap;
                            at = d + len;
                            (len, d)
                        })
                        .collect();
                    Datatype::indexed(blocks, t)
                }),
            (prop::collection::vec(0i64..3, 1..5), 1i64..3, inner.clone()).prop_map(
                |(gaps, b, t)| {
                    let mut at = 0;
                    let displs = gaps
                        .into_iter()
                        .map(|g| {
                            let d = at + g;
                            at = d + b;
                            d
                        })
                        .collect();
                    Datatype::indexed_block(b, displs, t)
                }
            ),
            (inner.clone(), inner.clone(), 0i64..16).prop_map(|(a, b, pad)| {
                let ext = commit(&a).map(|c| c.ub()).unwrap_or(0).max(0);
                Datatype::composite(vec![Member::new(1, 0, a), Member::new(1, ext + pad, b)])
            }),
            (inner, 0i64..12).prop_map(|(t, pad)| {
                let ub = commit(&t).map(|c| c.ub()).unwrap_or(0);
                Datatype::resized(0, ub.max(0) + pad, t)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn normalization_preserves_layout(t in datatype(), count in 1u64..4) {
        let Ok(c) = commit(&t) else { return Ok(()) };
        prop_assume!(c.lb() >= 0);
        let n = normal(&t).unwrap();
        prop_assert!(equivalent(&t, count, &n, count).unwrap(), "{} -> {}", t, n);
        prop_assert_eq!(normal(&n).unwrap(), n.clone());
        prop_assert!(cost(&n).unwrap() <= cost(&t).unwrap());
    }

    #[test]
    fn engines_agree_and_round_trip(t in datatype(), count in 1u64..4, seed in any::<u64>()) {
        let Ok(c) = commit_arc(Arc::new(t.clone())) else { return Ok(()) };
        prop_assume!(c.lb() >= 0 && !c.layout().overlapping);
        let c = Arc::new(c);
        let i = Packer::new(c.clone(), count, Engine::Interpreted).unwrap();
        let p = Packer::new(c.clone(), count, Engine::Compiled).unwrap();
        let src: Vec<u8> = (0..i.region_len()).map(|k| (k as u64 ^ seed).wrapping_mul(31) as u8).collect();
        let packed = i.pack(&src).unwrap();
        prop_assert_eq!(&packed, &p.pack(&src).unwrap());
        prop_assert_eq!(packed.len() as u64, c.size() * count);
        let mut back = vec![0u8; src.len()];
        p.unpack(&packed, &mut back).unwrap();
        prop_assert_eq!(p.pack(&back).unwrap(), packed);
    }

    #[test]
    fn program_covers_flattened_bytes(t in datatype(), count in 1u64..4) {
        let Ok(c) = commit(&t) else { return Ok(()) };
        prop_assume!(c.lb() >= 0);
        let prog = compile(&c, count).unwrap();
        let flat = flatten(&t, count).unwrap();
        prop_assert_eq!(prog.total_bytes as u64, flat.total_size);
        prop_assert_eq!(prog.ops.len(), flat.segments.len());
    }
}
