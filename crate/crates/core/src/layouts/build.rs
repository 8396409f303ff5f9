use std::sync::Arc;

use serde::Serialize;

use super::spec::{LayoutId, LayoutSpec, Params};
use crate::error::{Error, Result};
use crate::typecore::{attributes, BaseKind, Datatype, Member};

/// A catalog datatype together with the repetition count that covers `n` elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuiltLayout {
    pub id: LayoutId,
    pub datatype: Arc<Datatype>,
    pub count: u64,
    pub elem_size: u64,
    /// Span of all `count` instances, in elements.
    pub total_extent_elems: i64,
    /// Parameters this layout was built from.
    pub spec: LayoutSpec,
}

impl BuiltLayout {
    fn new(id: LayoutId, datatype: Datatype, count: u64, elem_size: u64) -> Result<Self> {
        let attrs = attributes(&datatype)?;
        let total = attrs.extent() * count as i64;
        Ok(BuiltLayout {
            id,
            datatype: Arc::new(datatype),
            count,
            elem_size,
            total_extent_elems: total / elem_size as i64,
            spec: LayoutSpec::new(id, 0),
        })
    }

    /// Payload of all instances in bytes.
    pub fn payload_bytes(&self) -> Result<u64> {
        Ok(attributes(&self.datatype)?.size * self.count)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::BadParams(msg()))
    }
}

fn blocks_of(n: u64, k: u64, what: &str) -> Result<u64> {
    require(k > 0, || format!("{what}: block of zero elements"))?;
    require(n > 0 && n.is_multiple_of(k), || {
        format!("{what}: n={n} is not a positive multiple of the block element count k={k}")
    })?;
    Ok(n / k)
}

fn i(v: u64) -> i64 {
    v as i64
}

fn tile(p: &Params, base: &Datatype, e: i64, allow_dense: bool) -> Result<Datatype> {
    require(p.a >= 1, || "tiled: A must be at least 1".into())?;
    if allow_dense {
        require(p.b >= p.a, || {
            format!("tiled: requires B >= A, got A={} B={}", p.a, p.b)
        })?;
    } else {
        require(p.b > p.a, || {
            format!("tiled: requires B > A, got A={} B={}", p.a, p.b)
        })?;
    }
    Ok(Datatype::resized(
        0,
        i(p.b) * e,
        Datatype::contiguous(i(p.a), base.clone()),
    ))
}

fn block(p: &Params, base: &Datatype, e: i64) -> Result<Datatype> {
    require(p.a >= 1, || "block: A must be at least 1".into())?;
    require(p.b1 != p.b2, || {
        format!("block: requires B1 != B2, got {}", p.b1)
    })?;
    require(p.b1 > p.a && p.b2 > p.a, || {
        format!(
            "block: requires B1, B2 > A, got A={} B1={} B2={}",
            p.a, p.b1, p.b2
        )
    })?;
    Ok(Datatype::resized(
        0,
        i(p.b1 + p.b2) * e,
        Datatype::indexed_block(i(p.a), vec![0, i(p.b1)], base.clone()),
    ))
}

fn check_units(p: &Params, what: &str) -> Result<()> {
    require(p.a1 >= 1 && p.a2 >= 1, || {
        format!(
            "{what}: unit sizes must be positive, got A1={} A2={}",
            p.a1, p.a2
        )
    })
}

fn bucket(p: &Params, base: &Datatype, e: i64) -> Result<Datatype> {
    check_units(p, "bucket")?;
    require(p.b > p.a1 && p.b > p.a2, || {
        format!(
            "bucket: requires B > A1, A2, got A1={} A2={} B={}",
            p.a1, p.a2, p.b
        )
    })?;
    Ok(Datatype::resized(
        0,
        2 * i(p.b) * e,
        Datatype::indexed(vec![(i(p.a1), 0), (i(p.a2), i(p.b))], base.clone()),
    ))
}

fn alternating(p: &Params, base: &Datatype, e: i64) -> Result<Datatype> {
    check_units(p, "alternating")?;
    require(p.b1 >= p.a1 && p.b2 >= p.a2, || {
        format!(
            "alternating: units overlap, got A1={} B1={} A2={} B2={}",
            p.a1, p.b1, p.a2, p.b2
        )
    })?;
    Ok(Datatype::resized(
        0,
        i(p.b1 + p.b2) * e,
        Datatype::indexed(vec![(i(p.a1), 0), (i(p.a2), i(p.b1))], base.clone()),
    ))
}

/// Alternating units with the second stride equal to the second unit size.
fn repeated_params(spec: &LayoutSpec) -> Result<Params> {
    let mut p = spec.params()?;
    p.b2 = p.a2;
    check_units(&p, "alternating_repeated")?;
    require(p.b1 > p.a1, || {
        format!(
            "alternating_repeated: requires B > A1, got A1={} B={}",
            p.a1, p.b1
        )
    })?;
    Ok(p)
}

/// Natural-alignment struct of `a` elements of each kind, every member spanning `b`
/// elements of its own kind, trailing extent rounded to the largest alignment.
pub fn make_tiled_heterogeneous_strided(a: u64, b: u64, kinds: &[BaseKind]) -> Result<Datatype> {
    require(a >= 1, || "tiled_het: A must be at least 1".into())?;
    require(b >= a, || {
        format!("tiled_het: requires B >= A, got A={a} B={b}")
    })?;
    require(!kinds.is_empty(), || "tiled_het: no member kinds".into())?;
    let align_up = |x: u64, to: u64| x.div_ceil(to) * to;
    let mut cursor = 0;
    let mut max_align = 1;
    let mut members = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let at = align_up(cursor, kind.alignment());
        members.push(Member::new(i(a), i(at), Datatype::base(kind)));
        cursor = at + b * kind.size();
        max_align = max_align.max(kind.alignment());
    }
    let extent = align_up(cursor, max_align);
    let composite = Datatype::composite(members);
    if attributes(&composite)?.ub == i(extent) {
        Ok(composite)
    } else {
        Ok(Datatype::resized(0, i(extent), composite))
    }
}

/// Dense (`B = A`) heterogeneous unit.
pub fn make_tiled_heterogeneous(a: u64, kinds: &[BaseKind]) -> Result<Datatype> {
    make_tiled_heterogeneous_strided(a, a, kinds)
}

pub const DEFAULT_HET_KINDS: [BaseKind; 4] = [
    BaseKind::Char,
    BaseKind::Int,
    BaseKind::Double,
    BaseKind::Short,
];

/// Default `S` for the nested vector: 4 if it divides the unit count, otherwise the
/// smallest divisor above one.
pub fn default_vector_repeat(units: u64) -> u64 {
    if units.is_multiple_of(4) {
        return 4;
    }
    (2..=units).find(|d| units.is_multiple_of(*d)).unwrap_or(1)
}

fn rowcol_check(spec: &LayoutSpec) -> Result<(u64, u64)> {
    let a = spec.a.ok_or_else(|| bad("rowcol: requires A"))?;
    let n = spec.n;
    require(a >= 1, || "rowcol: A must be at least 1".into())?;
    require(n >= a, || {
        format!("rowcol: requires n >= A, got n={n} A={a}")
    })?;
    Ok((a, n))
}

/// Element displacements of the row-then-column pattern.
fn rowcol_displs(a: u64, n: u64) -> Vec<i64> {
    (0..a).chain((1..=n - a).map(|r| r * a)).map(i).collect()
}

/// Construct the datatype the experiments prescribe for `spec.id`.
pub fn build(spec: &LayoutSpec) -> Result<BuiltLayout> {
    let mut built = build_unlabelled(spec)?;
    built.spec = spec.clone();
    Ok(built)
}

fn build_unlabelled(spec: &LayoutSpec) -> Result<BuiltLayout> {
    let base = Datatype::base(spec.basetype);
    let e = spec.basetype.size() as i64;
    let es = spec.basetype.size();
    let n = spec.n;
    let id = spec.id;
    match id {
        LayoutId::Contiguous => {
            require(n > 0, || "contiguous: n must be positive".into())?;
            BuiltLayout::new(id, base, n, es)
        }
        LayoutId::Tiled => {
            let p = spec.params()?;
            let t = tile(&p, &base, e, false)?;
            BuiltLayout::new(id, t, blocks_of(n, p.a, "tiled")?, es)
        }
        LayoutId::Block => {
            let p = spec.params()?;
            let t = block(&p, &base, e)?;
            BuiltLayout::new(id, t, blocks_of(n, 2 * p.a, "block")?, es)
        }
        LayoutId::Bucket => {
            let p = spec.params()?;
            let t = bucket(&p, &base, e)?;
            BuiltLayout::new(id, t, blocks_of(n, p.a1 + p.a2, "bucket")?, es)
        }
        LayoutId::Alternating => {
            let p = spec.params()?;
            let t = alternating(&p, &base, e)?;
            BuiltLayout::new(id, t, blocks_of(n, p.a1 + p.a2, "alternating")?, es)
        }
        LayoutId::TiledHet => {
            let a = spec.a.ok_or_else(|| bad("tiled_het: requires A"))?;
            let b = spec.b.unwrap_or(a);
            let kinds = spec
                .kinds
                .clone()
                .unwrap_or_else(|| DEFAULT_HET_KINDS.to_vec());
            let t = make_tiled_heterogeneous_strided(a, b, &kinds)?;
            let unit = attributes(&t)?.size;
            BuiltLayout::new(id, t, blocks_of(n, unit, "tiled_het")?, 1)
        }
        LayoutId::ContigSubtype => {
            let sub_id = spec.subtype.unwrap_or(LayoutId::Tiled);
            require(LayoutId::BASIC.contains(&sub_id), || {
                format!("contig_subtype: subtype must be a basic layout, got {sub_id}")
            })?;
            let sub = build(&spec.retarget(sub_id))?;
            let t = Datatype::contiguous(i(sub.count), sub.datatype);
            BuiltLayout::new(id, t, 1, es)
        }
        LayoutId::TiledStruct => {
            let p = spec.params()?;
            let (s1, s2) = (spec.s1.unwrap_or(1), spec.s2.unwrap_or(1));
            require(s1 >= 1 && s2 >= 1, || {
                "tiled_struct: S1, S2 must be positive".into()
            })?;
            let t = tile(&p, &base, e, true)?;
            let count = blocks_of(n, (s1 + s2) * p.a, "tiled_struct")?;
            let s = Datatype::composite(vec![
                Member::new(i(s1), 0, t.clone()),
                Member::new(i(s2), i(s1 * p.b) * e, t),
            ]);
            BuiltLayout::new(id, s, count, es)
        }
        LayoutId::TiledVector => {
            let p = spec.params()?;
            tile(&p, &base, e, false)?;
            let units = blocks_of(n, p.a, "tiled_vector")?;
            let v = Datatype::vector(i(units), i(p.a), i(p.b), base);
            BuiltLayout::new(id, Datatype::resized(0, i(units * p.b) * e, v), 1, es)
        }
        LayoutId::VectorTiled => {
            let p = spec.params()?;
            tile(&p, &base, e, false)?;
            let units = blocks_of(n, p.a, "vector_tiled")?;
            let s = spec.s1.unwrap_or_else(|| default_vector_repeat(units));
            let outer = blocks_of(units, s, "vector_tiled (units per S)")?;
            let inner = Datatype::vector(i(s), i(p.a), i(p.b), base);
            let t = Datatype::hvector(i(outer), 1, i(s * p.b) * e, inner);
            BuiltLayout::new(id, t, 1, es)
        }
        LayoutId::BlockIndexed => {
            let p = spec.params()?;
            block(&p, &base, e)?;
            let pairs = blocks_of(n, 2 * p.a, "block_indexed")?;
            let period = i(p.b1 + p.b2);
            let displs = (0..i(pairs))
                .flat_map(|j| [j * period, j * period + i(p.b1)])
                .collect();
            BuiltLayout::new(id, Datatype::indexed_block(i(p.a), displs, base), 1, es)
        }
        LayoutId::AlternatingIndexed => {
            let p = spec.params()?;
            alternating(&p, &base, e)?;
            let pairs = blocks_of(n, p.a1 + p.a2, "alternating_indexed")?;
            let period = i(p.b1 + p.b2);
            let blocks = (0..i(pairs))
                .flat_map(|j| [(i(p.a1), j * period), (i(p.a2), j * period + i(p.b1))])
                .collect();
            BuiltLayout::new(id, Datatype::indexed(blocks, base), 1, es)
        }
        LayoutId::AlternatingRepeated => {
            let p = repeated_params(spec)?;
            let t = alternating(&p, &base, e)?;
            BuiltLayout::new(
                id,
                t,
                blocks_of(n, p.a1 + p.a2, "alternating_repeated")?,
                es,
            )
        }
        LayoutId::AlternatingStruct => {
            let p = repeated_params(spec)?;
            let pairs = blocks_of(n, p.a1 + p.a2, "alternating_struct")?;
            let period = i(p.b1 + p.a2);
            let mut members = vec![Member::new(
                1,
                0,
                Datatype::contiguous(i(p.a1), base.clone()),
            )];
            if pairs > 1 {
                let middle = Datatype::vector(i(pairs - 1), i(p.a1 + p.a2), period, base.clone());
                members.push(Member::new(1, i(p.b1) * e, middle));
            }
            let last = (i(pairs) - 1) * period + i(p.b1);
            members.push(Member::new(
                1,
                last * e,
                Datatype::contiguous(i(p.a2), base),
            ));
            BuiltLayout::new(id, Datatype::composite(members), 1, es)
        }
        LayoutId::RowcolFullyIndexed => {
            let (a, n) = rowcol_check(spec)?;
            let t = Datatype::indexed_block(1, rowcol_displs(a, n), base);
            BuiltLayout::new(id, t, 1, es)
        }
        LayoutId::RowcolContigIndexed => {
            let (a, n) = rowcol_check(spec)?;
            let blocks = std::iter::once((i(a), 0))
                .chain((1..=n - a).map(|r| (1, i(r * a))))
                .collect();
            BuiltLayout::new(id, Datatype::indexed(blocks, base), 1, es)
        }
        LayoutId::RowcolStruct => {
            let (a, n) = rowcol_check(spec)?;
            let mut members = vec![Member::new(1, 0, Datatype::contiguous(i(a), base.clone()))];
            if n > a {
                members.push(Member::new(
                    1,
                    i(a) * e,
                    Datatype::vector(i(n - a), 1, i(a), base),
                ));
            }
            BuiltLayout::new(id, Datatype::composite(members), 1, es)
        }
    }
}

/// Elements (bytes for `tiled_het`) that `n` must be a multiple of for `spec.id`.
pub fn block_elems(spec: &LayoutSpec) -> Result<u64> {
    use LayoutId::*;
    Ok(match spec.id {
        Contiguous | RowcolFullyIndexed | RowcolContigIndexed | RowcolStruct => 1,
        TiledHet => {
            let a = spec.a.ok_or_else(|| bad("tiled_het: requires A"))?;
            let kinds = spec
                .kinds
                .clone()
                .unwrap_or_else(|| DEFAULT_HET_KINDS.to_vec());
            a * kinds.iter().map(|k| k.size()).sum::<u64>()
        }
        ContigSubtype => block_elems(&spec.retarget(spec.subtype.unwrap_or(Tiled)))?,
        TiledStruct => (spec.s1.unwrap_or(1) + spec.s2.unwrap_or(1)) * spec.params()?.a,
        Tiled | TiledVector => spec.params()?.a,
        VectorTiled => spec.params()?.a * spec.s1.unwrap_or(1),
        Block | BlockIndexed => 2 * spec.params()?.a,
        Bucket | Alternating | AlternatingIndexed => {
            let p = spec.params()?;
            p.a1 + p.a2
        }
        AlternatingRepeated | AlternatingStruct => {
            let p = repeated_params(spec)?;
            p.a1 + p.a2
        }
    })
}

/// The reference description and every compared description of one experiment family.
pub fn build_alternatives(spec: &LayoutSpec) -> Result<Vec<BuiltLayout>> {
    let family = spec
        .id
        .family()
        .ok_or_else(|| bad(format!("{} has no alternative descriptions", spec.id)))?;
    if spec.id == LayoutId::ContigSubtype {
        let sub_id = spec.subtype.unwrap_or(LayoutId::Tiled);
        return Ok(vec![build(&spec.retarget(sub_id))?, build(spec)?]);
    }
    family
        .into_iter()
        .map(|id| build(&spec.retarget(id)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecore::{commit, equivalent, flatten};

    fn spec(id: LayoutId, a: u64, n: u64) -> LayoutSpec {
        LayoutSpec::new(id, n).with_a(a)
    }

    #[test]
    fn tiled_variant_one() {
        let b = build(&spec(LayoutId::Tiled, 3, 12)).unwrap();
        assert_eq!(
            *b.datatype,
            Datatype::resized(
                0,
                20,
                Datatype::contiguous(3, Datatype::base(BaseKind::Int))
            )
        );
        assert_eq!(b.count, 4);
        // n + 2n/A = 12 + 8
        assert_eq!(b.total_extent_elems, 20);
    }

    #[test]
    fn block_variant_one() {
        let b = build(&spec(LayoutId::Block, 3, 12)).unwrap();
        let c = commit(&b.datatype).unwrap();
        assert_eq!(c.size() / 4, 6);
        assert_eq!(c.extent() / 4, 10);
        assert_eq!(b.count, 2);
    }

    #[test]
    fn tiled_variant_two() {
        let b =
            build(&spec(LayoutId::Tiled, 4, 12).with_variant(super::super::Variant::Two)).unwrap();
        assert_eq!(commit(&b.datatype).unwrap().extent() / 4, 12);
        assert_eq!(b.total_extent_elems, 36);
    }

    #[test]
    fn tiled_struct_matches_tiled() {
        let s = spec(LayoutId::TiledStruct, 3, 30).with_repeats(2, 3);
        let alts = build_alternatives(&s).unwrap();
        assert_eq!(alts[0].count, 10);
        assert_eq!(alts[1].count, 2);
        let tile = Datatype::resized(
            0,
            20,
            Datatype::contiguous(3, Datatype::base(BaseKind::Int)),
        );
        assert_eq!(
            *alts[1].datatype,
            Datatype::composite(vec![
                Member::new(2, 0, tile.clone()),
                Member::new(3, 40, tile)
            ])
        );
        assert!(equivalent(&alts[0].datatype, 10, &alts[1].datatype, 2).unwrap());
    }

    #[test]
    fn vector_tiled_shape() {
        let mut s = LayoutSpec::new(LayoutId::VectorTiled, 40)
            .with_variant(super::super::Variant::Explicit);
        s.a = Some(2);
        s.b = Some(4);
        s.s1 = Some(5);
        let b = build(&s).unwrap();
        let inner = Datatype::vector(5, 2, 4, Datatype::base(BaseKind::Int));
        assert_eq!(*b.datatype, Datatype::hvector(4, 1, 5 * 4 * 4, inner));
        let tiled = build(&s.retarget(LayoutId::Tiled)).unwrap();
        assert_eq!(tiled.count, 20);
        assert!(equivalent(&tiled.datatype, 20, &b.datatype, 1).unwrap());
    }

    #[test]
    fn rowcol_offsets() {
        // Row offsets 0..2, then column offsets 3r for r = 1..4; element 3 joins the row.
        let oracle: Vec<(i64, u64)> = vec![(0, 16), (24, 4), (36, 4), (48, 4)];
        for b in build_alternatives(&spec(LayoutId::RowcolStruct, 3, 7)).unwrap() {
            assert_eq!(
                flatten(&b.datatype, b.count).unwrap().pairs(),
                oracle,
                "{:?}",
                b.id
            );
        }
    }

    #[test]
    fn heterogeneous_alignment() {
        use BaseKind::*;
        let t = make_tiled_heterogeneous(1, &[Char, Int, Double, Short]).unwrap();
        let c = commit(&t).unwrap();
        assert_eq!((c.size(), c.extent()), (15, 24));
        assert_eq!(c.layout().pairs(), vec![(0, 1), (4, 14)]);
        let t = make_tiled_heterogeneous(2, &[Char, Int]).unwrap();
        let c = commit(&t).unwrap();
        assert_eq!((c.size(), c.extent()), (10, 12));
        let single = make_tiled_heterogeneous(1, &[Int]).unwrap();
        assert_eq!(commit(&single).unwrap().extent(), 4);
        assert!(equivalent(&single, 3, &Datatype::base(Int), 3).unwrap());
    }

    #[test]
    fn block_elems_match_counts() {
        for id in [
            LayoutId::Tiled,
            LayoutId::Block,
            LayoutId::Bucket,
            LayoutId::TiledStruct,
        ] {
            let s = spec(id, 4, 0).with_repeats(2, 3);
            let k = block_elems(&s).unwrap();
            let b = build(&LayoutSpec { n: 10 * k, ..s }).unwrap();
            assert_eq!(
                b.count * commit(&b.datatype).unwrap().size(),
                10 * k * 4,
                "{id:?}"
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let cases = [
            spec(LayoutId::Tiled, 3, 13),
            spec(LayoutId::Block, 3, 9),
            spec(LayoutId::RowcolStruct, 10, 5),
            spec(LayoutId::Bucket, 1, 10),
        ];
        for s in cases {
            assert!(matches!(build(&s), Err(Error::BadParams(_))), "{s:?}");
        }
        let mut s = spec(LayoutId::Tiled, 3, 12).with_variant(super::super::Variant::Explicit);
        s.b = Some(3);
        assert!(matches!(build(&s), Err(Error::BadParams(_))));
        assert!(build(&s.retarget(LayoutId::TiledStruct)).is_ok());
        assert!(build_alternatives(&spec(LayoutId::Tiled, 3, 12)).is_err());
    }
}
