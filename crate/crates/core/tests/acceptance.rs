//! Acceptance gate: every criterion prints one PASS/FAIL line, then the test
//! fails if any criterion failed.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use typeforge::bench::{median, nrep_schedule, run_interleaved, BenchCase, RunStats};
use typeforge::cli::{run_plan, ExperimentId, ExperimentPlan};
use typeforge::clock::ClockSource;
use typeforge::guidelines::{g1_case, g4_case, judge, CheckOptions, GuidelineVerdict, Relation};
use typeforge::layouts::{
    block_elems, build, build_alternatives, BuiltLayout, LayoutId, LayoutSpec, Variant,
};
use typeforge::normalizer::{cost, normal, normalize};
use typeforge::packer::{Engine, Packer};
use typeforge::transport::Method;
use typeforge::typecore::{commit, commit_arc, equivalent, flatten, BaseKind, Datatype};

// Tolerances.
const EXTENT_A: [u64; 4] = [2, 10, 100, 1000];
const FAMILY_A: [u64; 3] = [2, 10, 100];
const ROUND_TRIPS: usize = 1000;
const STATS_SETS: usize = 10_000;
const INJECTIONS: usize = 100;
const INJECTION_THRESHOLD: f64 = 1.10;
const MIN_INJECTED_SEVERITY: f64 = 1.8;
const MIN_INTERP_PENALTY: f64 = 1.5;
const MAX_CONTIG_OVER_RAW: f64 = 1.3;
const PERF_M_BYTES: u64 = 2_560_000;
const PERF_RUNS: usize = 5;
const SUITE_THRESHOLD: f64 = 1.10;
const SENTINEL: u8 = 0xA5;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

/// A buildable spec of `id` with `blocks` repetitions of its block.
fn spec_for(id: LayoutId, a: u64, variant: Variant, blocks: u64) -> Option<LayoutSpec> {
    let mut s = LayoutSpec::new(id, 1).with_a(a).with_variant(variant);
    s.n = if is_rowcol(id) {
        a * (blocks + 1) + 1
    } else {
        block_elems(&s).ok()? * blocks
    };
    Some(s)
}

/// Every catalog layout at blocksize `a`, both variants, every contig subtype.
fn catalog(a: u64, blocks: u64) -> Vec<BuiltLayout> {
    let mut out = Vec::new();
    for id in LayoutId::ALL {
        for variant in [Variant::One, Variant::Two] {
            let subtypes: Vec<Option<LayoutId>> = if id == LayoutId::ContigSubtype {
                LayoutId::BASIC.into_iter().map(Some).collect()
            } else {
                vec![None]
            };
            for sub in subtypes {
                let Some(mut s) = spec_for(id, a, variant, blocks) else {
                    continue;
                };
                s.subtype = sub;
                if let Some(sub) = sub {
                    let Some(fitted) = spec_for(sub, a, variant, blocks) else {
                        continue;
                    };
                    s.n = fitted.n;
                }
                if let Ok(b) = build(&s) {
                    out.push(b);
                }
            }
        }
    }
    out
}

fn c1_extents() -> Outcome {
    let mut checked = 0;
    for a in EXTENT_A {
        let n = 12 * a;
        for id in LayoutId::BASIC {
            for (variant, want) in [(Variant::One, n + 2 * n / a), (Variant::Two, 3 * n)] {
                let s = LayoutSpec::new(id, n).with_a(a).with_variant(variant);
                let b = ok(build(&s), &format!("{id} A={a} {variant}"))?;
                ensure(b.total_extent_elems == want as i64, || {
                    format!(
                        "{id} A={a} {variant}: extent {} != {want}",
                        b.total_extent_elems
                    )
                })?;
                let span = ok(commit(&b.datatype), "commit")?.extent() * b.count as i64 / 4;
                ensure(span == want as i64, || {
                    format!("{id} A={a} {variant}: committed span {span}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} layouts exact"))
}

fn c2_blocks() -> Outcome {
    let mut checked = 0;
    for a in [2u64, 4, 10, 100] {
        for variant in [Variant::One, Variant::Two] {
            for id in LayoutId::BASIC {
                let s = LayoutSpec::new(id, 12 * a).with_a(a).with_variant(variant);
                let p = ok(s.params(), "params")?;
                let want = match id {
                    LayoutId::Tiled => (p.a, p.b),
                    LayoutId::Block => (2 * p.a, p.b1 + p.b2),
                    LayoutId::Bucket => (p.a1 + p.a2, 2 * p.b),
                    _ => (p.a1 + p.a2, p.b1 + p.b2),
                };
                let b = ok(build(&s), "build")?;
                let c = ok(commit(&b.datatype), "commit")?;
                let got = (c.size() / 4, c.extent() as u64 / 4);
                ensure(got == want, || {
                    format!("{id} A={a} {variant}: {got:?} != {want:?}")
                })?;
                let k = ok(block_elems(&s), "block_elems")?;
                ensure(k == want.0, || {
                    format!("{id}: block_elems {k} != {}", want.0)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (k, extent) pairs exact"))
}

fn c3_families() -> Outcome {
    let mut pairs = 0;
    for id in LayoutId::ALL {
        if id.family().is_none() {
            continue;
        }
        for a in FAMILY_A {
            for variant in [Variant::One, Variant::Two] {
                let Some(mut s) = spec_for(id, a, variant, 6) else {
                    continue;
                };
                if !is_rowcol(id) {
                    // Every member must accept n.
                    let k = id
                        .family()
                        .unwrap()
                        .into_iter()
                        .filter_map(|m| block_elems(&s.retarget(m)).ok())
                        .fold(1, lcm);
                    s.n = 6 * k;
                }
                let Ok(alts) = build_alternatives(&s) else {
                    continue;
                };
                for (i, x) in alts.iter().enumerate() {
                    let fx = ok(flatten(&x.datatype, x.count), "flatten")?;
                    for y in &alts[i + 1..] {
                        let fy = ok(flatten(&y.datatype, y.count), "flatten")?;
                        let eq = ok(
                            equivalent(&x.datatype, x.count, &y.datatype, y.count),
                            "equivalent",
                        )?;
                        ensure(eq && fx.segments == fy.segments, || {
                            format!("{id} A={a} {variant}: {} vs {}", x.id, y.id)
                        })?;
                        pairs += 1;
                    }
                }
            }
        }
    }
    ensure(pairs > 0, || "no family pairs checked".into())?;
    Ok(format!("{pairs}/{pairs} pairs equivalent"))
}

fn is_rowcol(id: LayoutId) -> bool {
    matches!(
        id,
        LayoutId::RowcolFullyIndexed | LayoutId::RowcolContigIndexed | LayoutId::RowcolStruct
    )
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Region byte mask of the typed bytes of `count` instances.
fn typed_mask(t: &Datatype, count: u64, region_len: usize) -> Result<Vec<bool>, String> {
    let c = ok(commit(t), "commit")?;
    let mut mask = vec![false; region_len];
    for seg in ok(flatten(t, count), "flatten")?.segments {
        let start = (seg.offset - c.lb()) as usize;
        mask[start..start + seg.len as usize]
            .iter_mut()
            .for_each(|m| *m = true);
    }
    Ok(mask)
}

fn c4_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut done, mut attempts) = (0, 0);
    while done < ROUND_TRIPS {
        attempts += 1;
        ensure(attempts < 20 * ROUND_TRIPS, || {
            "too few buildable random specs".into()
        })?;
        let id = LayoutId::ALL[rng.random_range(0..LayoutId::ALL.len())];
        let a = [2u64, 3, 4, 6, 8, 10, 16][rng.random_range(0..7)];
        let variant = if rng.random_bool(0.5) {
            Variant::One
        } else {
            Variant::Two
        };
        let Some(mut s) = spec_for(id, a, variant, rng.random_range(1..=8)) else {
            continue;
        };
        s.basetype = [
            BaseKind::Byte,
            BaseKind::Short,
            BaseKind::Int,
            BaseKind::Double,
        ][rng.random_range(0..4)];
        if id == LayoutId::ContigSubtype {
            let sub = LayoutId::BASIC[rng.random_range(0..4)];
            s.subtype = Some(sub);
            let Some(f) = spec_for(sub, a, variant, rng.random_range(1..=8)) else {
                continue;
            };
            s.n = f.n;
        }
        let Ok(b) = build(&s) else { continue };
        let engine = Engine::ALL[done % 2];
        let committed = Arc::new(ok(commit_arc(b.datatype.clone()), "commit")?);
        let packer = ok(Packer::new(committed, b.count, engine), "packer")?;
        let len = packer.region_len();
        let mut src = vec![0u8; len];
        rng.fill(&mut src[..]);
        let packed = ok(packer.pack(&src), "pack")?;
        let mut dst = vec![SENTINEL; len];
        ok(packer.unpack(&packed, &mut dst), "unpack")?;
        let mask = typed_mask(&b.datatype, b.count, len)?;
        for (i, typed) in mask.iter().enumerate() {
            let want = if *typed { src[i] } else { SENTINEL };
            ensure(dst[i] == want, || {
                format!("{} ({engine}): byte {i} differs", s.to_json())
            })?;
        }
        done += 1;
    }
    Ok(format!("{done}/{ROUND_TRIPS} round trips clean"))
}

fn c5_engines() -> Outcome {
    let mut checked = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for a in [2u64, 4, 10] {
        for b in catalog(a, 6) {
            let committed = Arc::new(ok(commit_arc(b.datatype.clone()), "commit")?);
            for count in [1, 7, b.count] {
                let i = ok(
                    Packer::new(committed.clone(), count, Engine::Interpreted),
                    "packer",
                )?;
                let c = ok(
                    Packer::new(committed.clone(), count, Engine::Compiled),
                    "packer",
                )?;
                let mut src = vec![0u8; i.region_len()];
                rng.fill(&mut src[..]);
                let (pi, pc) = (
                    ok(i.pack(&src), "interpreted")?,
                    ok(c.pack(&src), "compiled")?,
                );
                ensure(pi == pc, || {
                    format!("{} x{count}: engines differ", b.spec.to_json())
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} layout x count cases byte-identical"))
}

fn is_flat_vector(t: &Datatype) -> bool {
    matches!(t, Datatype::Vector { inner, .. } if matches!(**inner, Datatype::Base { .. }))
}

fn c6_normalizer() -> Outcome {
    let mut checked = 0;
    for a in [2u64, 4, 10] {
        for b in catalog(a, 6) {
            let t = &b.datatype;
            let (n, report) = ok(normalize(t), "normalize")?;
            let what = b.spec.to_json();
            ensure(
                ok(equivalent(t, b.count, &n, b.count), "equivalent")?,
                || format!("{what}: layout changed"),
            )?;
            ensure(ok(normal(&n), "normal")? == n, || {
                format!("{what}: not idempotent")
            })?;
            let (ci, co) = (ok(cost(t), "cost")?, ok(cost(&n), "cost")?);
            ensure(co <= ci && report.output_cost <= report.input_cost, || {
                format!("{what}: cost {ci} -> {co}")
            })?;
            checked += 1;
        }
    }
    let int = || Datatype::base(BaseKind::Int);

    let mut s = LayoutSpec::new(LayoutId::VectorTiled, 40).with_variant(Variant::Explicit);
    (s.a, s.b, s.s1) = (Some(2), Some(4), Some(5));
    let vt = ok(build(&s), "vector_tiled")?;
    let n = ok(normal(&vt.datatype), "normal")?;
    ensure(is_flat_vector(&n), || {
        format!("vector_tiled normal form is nested: {n}")
    })?;

    let mut s = LayoutSpec::new(LayoutId::TiledStruct, 60)
        .with_variant(Variant::Explicit)
        .with_repeats(2, 3);
    (s.a, s.b) = (Some(4), Some(4));
    let ts = ok(build(&s), "tiled_struct")?;
    let n = ok(normal(&ts.datatype), "normal")?;
    ensure(
        matches!(&n, Datatype::Contiguous { inner, .. } if matches!(**inner, Datatype::Base { .. })),
        || format!("tiled_struct with A=B normal form is not contiguous: {n}"),
    )?;

    let ix = Datatype::indexed(vec![(3, 0), (3, 7), (3, 20), (3, 31)], int());
    let n = ok(normal(&ix), "normal")?;
    ensure(
        matches!(n, Datatype::IndexedBlock { blocklen: 3, .. }),
        || format!("equal blocklens normal form: {n}"),
    )?;
    Ok(format!(
        "{checked} catalog layouts preserved, idempotent, monotone; 3 named rewrites"
    ))
}

fn oracle_median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    let n = s.len();
    let hi = *s
        .select_nth_unstable_by(n / 2, |a, b| a.partial_cmp(b).unwrap())
        .1;
    if n % 2 == 1 {
        hi
    } else {
        let lo = s[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

fn c7_methodology() -> Outcome {
    let schedule = [(3200, 100), (100_000, 50), (2_560_000, 20)];
    for (m, want) in schedule {
        let got = nrep_schedule(m);
        ensure(got == want, || {
            format!("nrep_schedule({m}) = {got}, want {want}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for set in 0..STATS_SETS {
        let r = rng.random_range(1..=7);
        let nrep = rng.random_range(1..=41);
        let runs: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..nrep).map(|_| rng.random_range(1e-7..1e-2)).collect())
            .collect();
        let stats = RunStats::from_runs("set", runs.clone(), false);
        let meds: Vec<f64> = runs.iter().map(|x| oracle_median(x)).collect();
        let mean = meds.iter().sum::<f64>() / r as f64;
        let min = meds.iter().copied().fold(f64::INFINITY, f64::min);
        let max = meds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ensure(stats.per_run_medians == meds, || {
            format!("set {set}: medians differ")
        })?;
        ensure(runs.iter().zip(&meds).all(|(x, m)| median(x) == *m), || {
            format!("set {set}: median")
        })?;
        ensure((stats.mean_of_medians - mean).abs() <= 1e-12 * mean, || {
            format!("set {set}: mean {} vs {mean}", stats.mean_of_medians)
        })?;
        ensure(
            stats.min_of_medians == min && stats.max_of_medians == max,
            || format!("set {set}: extremes"),
        )?;
        ensure((stats.r, stats.nrep) == (r, nrep), || {
            format!("set {set}: shape")
        })?;
    }
    Ok(format!(
        "schedule 100/50/20 exact; {STATS_SETS} sample sets match the oracle"
    ))
}

fn noisy_runs(
    rng: &mut ChaCha8Rng,
    base: f64,
    r: usize,
    nrep: usize,
    factor: f64,
) -> Vec<Vec<f64>> {
    (0..r)
        .map(|_| {
            (0..nrep)
                .map(|_| {
                    let jitter = 1.0 + rng.random_range(0.0..0.05);
                    let spike = if rng.random_bool(0.1) {
                        rng.random_range(2.0..6.0)
                    } else {
                        1.0
                    };
                    base * jitter * spike * factor
                })
                .collect()
        })
        .collect()
}

fn c8_verdicts() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        ..Config::default()
    });
    let strategy = (1e-9f64..1.0, 1e-9f64..1.0, 1.0f64..3.0);
    runner
        .run(&strategy, |(l, r, t)| {
            let s = judge(l, r, Relation::Similar, t);
            let s2 = judge(r, l, Relation::Similar, t);
            prop_assert!((s.severity - s2.severity).abs() <= 1e-12 * s.severity);
            prop_assert!(s.severity >= 1.0);
            prop_assert_eq!(s.violated, s.severity > t);
            let w = judge(l, r, Relation::NoSlower, t);
            prop_assert!((w.ratio - l / r).abs() <= 1e-12 * w.ratio);
            prop_assert_eq!(w.violated, w.ratio > t);
            let e = judge(l, l, Relation::Similar, t);
            prop_assert!(e.ratio == 1.0 && !e.violated);
            Ok(())
        })
        .map_err(|e| format!("judge property: {e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = CheckOptions {
        threshold: INJECTION_THRESHOLD,
        ..CheckOptions::default()
    };
    let tiled = ok(
        build(&LayoutSpec::new(LayoutId::Tiled, 800).with_a(4)),
        "build",
    )?;
    let mut detected = 0;
    let mut weakest = f64::INFINITY;
    for k in 0..INJECTIONS {
        let case = if k % 2 == 0 {
            g1_case("inject", tiled.datatype.clone(), tiled.count, None, &opts)
        } else {
            ok(
                g4_case("inject", tiled.datatype.clone(), tiled.count, None, &opts),
                "g4",
            )?
        };
        let m = [3200u64, 100_000, 2_560_000][k % 3];
        let nrep = nrep_schedule(m);
        let base = rng.random_range(1e-6..1e-2);
        let clean = RunStats::from_runs("clean", noisy_runs(&mut rng, base, 5, nrep, 1.0), false);
        let slowed = RunStats::from_runs("slowed", noisy_runs(&mut rng, base, 5, nrep, 2.0), false);
        // For the symmetric relation alternate which side is slowed.
        let v = if case.relation == Relation::Similar && k % 4 == 0 {
            GuidelineVerdict::from_stats(case, clean, slowed)
        } else {
            GuidelineVerdict::from_stats(case, slowed, clean)
        };
        weakest = weakest.min(v.severity);
        if v.violated && v.severity >= MIN_INJECTED_SEVERITY {
            detected += 1;
        }
    }
    ensure(detected == INJECTIONS, || {
        format!("{detected}/{INJECTIONS} injections detected, weakest severity {weakest:.3}")
    })?;
    Ok(format!(
        "2000 judge properties hold; {detected}/{INJECTIONS} injections, min severity {weakest:.3}"
    ))
}

fn perf_case(id: &str, t: Arc<Datatype>, count: u64, engine: Engine, method: Method) -> BenchCase {
    BenchCase::new(id, t, count)
        .with_engine(engine)
        .with_method(method)
        .with_runs(PERF_RUNS)
}

fn means(cases: &[BenchCase]) -> Result<Vec<f64>, String> {
    let stats = ok(
        run_interleaved(cases, &ClockSource::Monotonic, 9, false),
        "measure",
    )?;
    Ok(stats.iter().map(|s| s.mean_of_medians).collect())
}

fn c9_performance() -> Outcome {
    let n = PERF_M_BYTES / 4;
    let tiled = ok(
        build(&LayoutSpec::new(LayoutId::Tiled, n).with_a(2)),
        "build",
    )?;
    let m = means(&[
        perf_case(
            "interp",
            tiled.datatype.clone(),
            tiled.count,
            Engine::Interpreted,
            Method::Typed,
        ),
        perf_case(
            "compiled",
            tiled.datatype.clone(),
            tiled.count,
            Engine::Compiled,
            Method::Typed,
        ),
    ])?;
    let penalty = m[0] / m[1];
    ensure(penalty >= MIN_INTERP_PENALTY, || {
        format!("interpreted/compiled = {penalty:.2} < {MIN_INTERP_PENALTY}")
    })?;

    let int = || Datatype::base(BaseKind::Int);
    let dense = Arc::new(Datatype::contiguous(n as i64, int()));
    let descriptions: Vec<(&str, Arc<Datatype>, u64)> = vec![
        ("contiguous", dense.clone(), 1),
        ("int_count", Arc::new(int()), n),
        (
            "nested",
            Arc::new(Datatype::contiguous(
                10,
                Datatype::contiguous((n / 10) as i64, int()),
            )),
            1,
        ),
        (
            "dense_vector",
            Arc::new(Datatype::vector((n / 4) as i64, 4, 4, int())),
            1,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (name, t, count) in descriptions {
        let m = means(&[
            perf_case(name, t, count, Engine::Compiled, Method::Typed),
            perf_case("raw", dense.clone(), 1, Engine::Compiled, Method::Raw),
        ])?;
        let ratio = m[0] / m[1];
        worst = worst.max(ratio);
        ensure(ratio <= MAX_CONTIG_OVER_RAW, || {
            format!("{name}: typed/raw = {ratio:.3} > {MAX_CONTIG_OVER_RAW}")
        })?;
    }
    Ok(format!(
        "interpreted penalty {penalty:.2}x >= {MIN_INTERP_PENALTY}; contiguous/raw worst {worst:.3} <= {MAX_CONTIG_OVER_RAW}"
    ))
}

fn c10_self_consistency() -> Outcome {
    let opts = CheckOptions {
        engine: Engine::Compiled,
        threshold: SUITE_THRESHOLD,
        ..CheckOptions::default()
    };
    let (mut verdicts, mut g4, mut violations) = (0, 0, Vec::new());
    for id in ExperimentId::ALL {
        let out = ok(run_plan(&ExperimentPlan::default_for(id), &opts), id.name())?;
        verdicts += out.verdicts.len();
        for v in &out.verdicts {
            if v.case.guideline.is_g4() {
                g4 += 1;
                if v.violated {
                    violations.push(format!("{} ({:.3})", v.case.case_id, v.severity));
                }
            }
        }
    }
    ensure(violations.is_empty(), || {
        format!(
            "{} of {g4} G4 verdicts violated: {}",
            violations.len(),
            violations.join(", ")
        )
    })?;
    Ok(format!(
        "{verdicts} verdicts, 0 of {g4} G4 verdicts violated"
    ))
}

/// Written straight to stdout so the lines survive the harness's output capture.
fn report(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (1, "extent formulas", c1_extents, Duration::from_secs(1)),
        (2, "block arithmetic", c2_blocks, Duration::from_secs(1)),
        (
            3,
            "equivalence families",
            c3_families,
            Duration::from_secs(5),
        ),
        (
            4,
            "pack/unpack round trip",
            c4_round_trip,
            Duration::from_secs(30),
        ),
        (5, "engine equality", c5_engines, Duration::from_secs(30)),
        (6, "normalizer", c6_normalizer, Duration::from_secs(5)),
        (7, "methodology", c7_methodology, Duration::from_secs(30)),
        (
            8,
            "guideline verdicts",
            c8_verdicts,
            Duration::from_secs(30),
        ),
        (
            9,
            "relative performance",
            c9_performance,
            Duration::from_secs(120),
        ),
        (
            10,
            "self-consistency",
            c10_self_consistency,
            Duration::from_secs(300),
        ),
    ];
    let mut failed = Vec::new();
    for (n, name, f, limit) in criteria {
        let start = Instant::now();
        let mut outcome = f();
        let took = start.elapsed();
        if outcome.is_ok() && took > limit {
            outcome = Err(format!("took {took:.2?}, limit {limit:?}"));
        }
        match outcome {
            Ok(detail) => report(format!(
                "criterion {n:>2} PASS {name}: {detail} [{took:.2?}]"
            )),
            Err(why) => {
                report(format!("criterion {n:>2} FAIL {name}: {why} [{took:.2?}]"));
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
