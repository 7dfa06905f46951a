use std::sync::Arc;

use num_complex::Complex64;
use persson::driver::{compression_ladder, AuditMode, LadderOptions, Problem, Schedule};
use persson::eigen::{extreme_eigs, EigenOptions, Mode};
use persson::kernel::{BandKernel, FiniteVector, SiteSet};
use persson::space::{graph_kernel, GraphKernelKind, GraphModel, SiteSpace};
use persson::subshift::{
    main_orbit_operator, subshift_operator, trace_set, validate_symbol, Alphabet, HoppingSymbol,
    ModelCheck, SeqPoint, Shell, SubshiftModel, SymbolRow,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(n: i64) -> Arc<SiteSpace> {
    Arc::new(SiteSpace::integer_window(-n, n).unwrap())
}

fn int_kernel(space: &Arc<SiteSpace>, band: i64, rng: &mut ChaCha8Rng) -> BandKernel<i64> {
    let mut entries = Vec::new();
    for x in space.sites().iter() {
        for y in space.sites().iter().filter(|y| (x - y).abs() <= band) {
            if rng.random_bool(0.6) {
                entries.push((x, y, rng.random_range(-4..=4)));
            }
        }
    }
    BandKernel::from_entries(space.clone(), entries, band as f64).unwrap()
}

fn hermitian_kernel(
    space: &Arc<SiteSpace>,
    band: i64,
    rng: &mut ChaCha8Rng,
) -> BandKernel<Complex64> {
    let mut entries = Vec::new();
    for x in space.sites().iter() {
        for y in space.sites().iter().filter(|&y| y >= x && y - x <= band) {
            if x == y {
                entries.push((x, x, Complex64::new(rng.random_range(-3.0..3.0), 0.0)));
            } else if rng.random_bool(0.7) {
                let v = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                entries.push((x, y, v));
                entries.push((y, x, v.conj()));
            }
        }
    }
    BandKernel::from_entries(space.clone(), entries, band as f64).unwrap()
}

fn random_subset(all: &SiteSet, keep: f64, rng: &mut ChaCha8Rng) -> SiteSet {
    let ids: Vec<_> = all.iter().filter(|_| rng.random_bool(keep)).collect();
    if ids.is_empty() {
        SiteSet::new([all.ids()[0]])
    } else {
        SiteSet::new(ids)
    }
}

fn dense() -> EigenOptions {
    EigenOptions::with_mode(Mode::Dense)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn defect_identity_is_exact(n in 2i64..15, b1 in 0i64..4, b2 in 0i64..4, removed in 0usize..10, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = line(n);
        let k1 = int_kernel(&space, b1, &mut rng);
        let k2 = int_kernel(&space, b2, &mut rng);
        let ids: Vec<_> = space.sites().iter().collect();
        let gone: Vec<_> = ids.choose_multiple(&mut rng, removed).copied().collect();
        let m = SiteSet::cofinite(space.sites(), gone);
        let a = k1.defect(&k2, &m).unwrap();
        let b = k1.defect_direct(&k2, &m).unwrap();
        prop_assert!(a.same_entries(&b));
    }

    #[test]
    fn adjoint_is_an_involution(n in 1i64..12, band in 0i64..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = int_kernel(&line(n), band, &mut rng);
        prop_assert!(k.adjoint().adjoint().same_entries(&k));
        let h = hermitian_kernel(&line(n), band, &mut rng);
        prop_assert!(h.adjoint().same_entries(&h));
    }

    #[test]
    fn composition_is_associative(n in 1i64..10, b in (0i64..3, 0i64..3, 0i64..3), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = line(n);
        let (a, bb, c) = (
            int_kernel(&space, b.0, &mut rng),
            int_kernel(&space, b.1, &mut rng),
            int_kernel(&space, b.2, &mut rng),
        );
        let left = a.compose(&bb).unwrap().compose(&c).unwrap();
        let right = a.compose(&bb.compose(&c).unwrap()).unwrap();
        prop_assert!(left.same_entries(&right));
        let adj = a.compose(&bb).unwrap().adjoint();
        prop_assert!(adj.same_entries(&bb.adjoint().compose(&a.adjoint()).unwrap()));
    }

    #[test]
    fn text_round_trip(n in 1i64..10, band in 0i64..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = line(n);
        let k = hermitian_kernel(&space, band, &mut rng);
        let back = BandKernel::<Complex64>::from_text(space.clone(), &k.to_text()).unwrap();
        prop_assert!(back.same_entries(&k));
        prop_assert_eq!(back.bandwidth(), k.bandwidth());
        let i = int_kernel(&space, band, &mut rng);
        prop_assert!(BandKernel::<i64>::from_text(space, &i.to_text()).unwrap().same_entries(&i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_chain(n in 1i64..25, band in 0i64..5, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = hermitian_kernel(&line(n), band, &mut rng);
        let all = k.space().sites().clone();
        let e = extreme_eigs(&k, &all, &dense()).unwrap();
        let top = e.min.lo.abs().max(e.max.hi.abs());
        let schur = k.schur_bound(&all);
        let hahn = k.hahn_norm(&all);
        prop_assert!(top <= schur * (1.0 + 1e-12) + 1e-12, "{} > {}", top, schur);
        prop_assert!(schur <= hahn * (1.0 + 1e-15));
        prop_assert!(e.min.hi >= -schur * (1.0 + 1e-12) - 1e-12);
    }

    #[test]
    fn compressions_interlace(n in 2i64..25, band in 0i64..5, keep in 0.2f64..0.9, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = hermitian_kernel(&line(n), band, &mut rng);
        let big = random_subset(k.space().sites(), 0.8, &mut rng);
        let small = random_subset(&big, keep, &mut rng);
        prop_assert!(small.is_subset(&big));
        let eb = extreme_eigs(&k, &big, &dense()).unwrap();
        let es = extreme_eigs(&k, &small, &dense()).unwrap();
        prop_assert!(es.min.hi >= eb.min.lo - 1e-12);
        prop_assert!(es.max.lo <= eb.max.hi + 1e-12);
        let top = |e: &persson::eigen::ExtremeEigs| e.min.lo.abs().max(e.max.hi.abs());
        prop_assert!(top(&es) <= top(&eb) + 1e-12);
    }

    #[test]
    fn certified_intervals_contain_the_dense_answer(
        n in 5i64..60, band in 1i64..4, seed: u64, mode in prop_oneof![Just(Mode::Iterative), Just(Mode::Bisection)]
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = hermitian_kernel(&line(n), band, &mut rng);
        let all = k.space().sites().clone();
        let d = extreme_eigs(&k, &all, &dense()).unwrap();
        let e = extreme_eigs(&k, &all, &EigenOptions::with_mode(mode)).unwrap();
        let slack = 1e-12 * (1.0 + d.min.lo.abs().max(d.max.hi.abs()));
        for (got, want) in [(e.min, d.min.mid()), (e.max, d.max.mid())] {
            if got.certified {
                prop_assert!(got.lo - slack <= want && want <= got.hi + slack, "{:?} vs {}", got, want);
            }
        }
    }
}

fn step_model() -> SubshiftModel {
    SubshiftModel::new(
        Alphabet::new(['a', 'b']).unwrap(),
        SeqPoint::step('a', 'b'),
        vec![SeqPoint::constant('a'), SeqPoint::constant('b')],
        &ModelCheck::default(),
    )
    .unwrap()
}

fn powers_model(m_from_zero: bool) -> SubshiftModel {
    SubshiftModel::new(
        Alphabet::new(['a', 'b']).unwrap(),
        SeqPoint::powers_of_two('a', 'b', m_from_zero),
        vec![SeqPoint::constant('a'), SeqPoint::single('a', 'b', 0)],
        &ModelCheck::default(),
    )
    .unwrap()
}

/// Arbitrary radius-1 table over `{a, b, *}`; not self-adjoint in general.
fn random_symbol(rng: &mut ChaCha8Rng) -> HoppingSymbol<i64> {
    let letters = ['a', 'b', '*'];
    let rows = (0..rng.random_range(1..8))
        .map(|_| SymbolRow {
            pattern: (0..3).map(|_| *letters.choose(rng).unwrap()).collect(),
            hop: rng.random_range(-2..=2),
            value: rng.random_range(-3..=3),
        })
        .collect();
    HoppingSymbol::new(1, rows).unwrap()
}

/// Letter potential plus Hermitian Toeplitz hopping: self-adjoint.
fn random_hermitian_symbol(rng: &mut ChaCha8Rng) -> HoppingSymbol<Complex64> {
    let mut rows = vec![];
    for c in ['a', 'b'] {
        rows.push(SymbolRow {
            pattern: c.to_string(),
            hop: 0,
            value: Complex64::new(rng.random_range(-3.0..3.0), 0.0),
        });
    }
    for k in 1..=rng.random_range(1..3) {
        let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        rows.push(SymbolRow {
            pattern: "*".into(),
            hop: k,
            value: v,
        });
        rows.push(SymbolRow {
            pattern: "*".into(),
            hop: -k,
            value: v.conj(),
        });
    }
    HoppingSymbol::new(0, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn orbit_and_shift_routes_agree(seed: u64, which in 0usize..3, shell in 0usize..4, w in 10i64..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = [step_model(), powers_model(true), powers_model(false)][which].clone();
        let h = random_symbol(&mut rng);
        let shell = if shell == 0 { Shell::Full } else { model.fell_shell(shell).unwrap() };
        let a = subshift_operator(&h, model.generator(), &shell, w).unwrap();
        let b = main_orbit_operator(&h, &model, &shell, w).unwrap();
        prop_assert!(a.same_entries(&b));
    }

    #[test]
    fn shipped_style_symbols_validate(seed: u64, which in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = [step_model(), powers_model(true)][which].clone();
        let h = random_hermitian_symbol(&mut rng);
        let r = validate_symbol(&h, &model, 32).unwrap();
        prop_assert!(r.passes(), "{:?}", r);
        let k = subshift_operator(&h, model.generator(), &Shell::Full, 32).unwrap();
        prop_assert!(k.validate_self_adjoint(0.0));
    }

    #[test]
    fn arbitrary_symbols_are_covariant(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symbol(&mut rng);
        let r = validate_symbol(&h, &step_model(), 24).unwrap();
        prop_assert!(r.covariance.is_empty());
    }

    #[test]
    fn shells_nest(which in 0usize..3, i in 1usize..20, w in 30i64..80) {
        let model = [step_model(), powers_model(true), powers_model(false)][which].clone();
        let outer = trace_set(model.generator(), &model.fell_shell(i).unwrap(), w).unwrap();
        let inner = trace_set(model.generator(), &model.fell_shell(i + 1).unwrap(), w).unwrap();
        prop_assert!(inner.is_subset(&outer));
    }
}

fn random_graph(n: i64, rng: &mut ChaCha8Rng) -> GraphModel {
    let mut weights = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.random_bool(0.3) {
                let w = rng.random_range(1..=3) as f64;
                weights.extend([(x, y, w), (y, x, w)]);
            }
        }
    }
    GraphModel::new(0..n, weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn laplacian_kills_constants(n in 1i64..20, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(n, &mut rng);
        let lap = graph_kernel(&g, GraphKernelKind::Laplacian).unwrap();
        let all = g.vertices().clone();
        let ones = FiniteVector::new(all.clone(), vec![1.0; all.len()]).unwrap();
        prop_assert!(lap.apply(&ones, &all).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn restricted_adjacency_is_the_induced_subgraph(n in 1i64..20, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(n, &mut rng);
        let keep = random_subset(g.vertices(), 0.6, &mut rng);
        let restricted = graph_kernel(&g, GraphKernelKind::Adjacency).unwrap().restrict(&keep);
        let induced = graph_kernel(&g.induced(&keep).unwrap(), GraphKernelKind::Adjacency).unwrap();
        prop_assert_eq!(restricted.entries(), induced.entries());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn shell_compression_is_a_restriction(seed: u64, which in 0usize..3, i in 1usize..6, w in 10i64..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = [step_model(), powers_model(true), powers_model(false)][which].clone();
        let h = random_symbol(&mut rng);
        let shell = model.fell_shell(i).unwrap();
        let full = main_orbit_operator(&h, &model, &Shell::Full, w).unwrap();
        let m = trace_set(model.generator(), &shell, w).unwrap();
        let compressed = main_orbit_operator(&h, &model, &shell, w).unwrap();
        prop_assert!(compressed.same_entries(&full.restrict(&m)));
    }

    #[test]
    fn shifting_the_point_shifts_the_kernel(seed: u64, which in 0usize..3, m in -6i64..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = [step_model(), powers_model(true), powers_model(false)][which].clone();
        let h = random_symbol(&mut rng);
        let w = 30;
        let z = model.generator();
        let kz = subshift_operator(&h, z, &Shell::Full, w).unwrap();
        let kshift = subshift_operator(&h, &z.shifted(m), &Shell::Full, w).unwrap();
        let inner = w - m.abs() - 2;
        for k in -inner..=inner {
            for l in -inner..=inner {
                prop_assert_eq!(kshift.get(k, l), kz.get(k + m, l + m));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn negation_swaps_the_edges(seed: u64, band in 1i64..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..=band).map(|_| rng.random_range(-1.0..1.0)).collect();
        let well = rng.random_range(-5.0..5.0);
        let kernel = BandKernel::from_fn(line(140), band as f64, |x, y| {
            coeffs[(x - y).unsigned_abs() as usize] + if x == 0 && y == 0 { well } else { 0.0 }
        })
        .unwrap();
        let problem = Problem::Metric { kernel, center: 0, oracle: None };
        let opts = LadderOptions {
            eigen: EigenOptions::with_mode(Mode::Bisection),
            audit: AuditMode::Warn,
            oracle: false,
            ..LadderOptions::default()
        };
        let schedule = Schedule::new(vec![0, 3, 6], vec![100, 120, 130]);
        let up = compression_ladder(&problem, &schedule, &opts).unwrap();
        let down = compression_ladder(&problem.neg(), &schedule, &opts).unwrap();
        prop_assert_eq!(down.persson_lower.lo, -up.persson_upper.hi);
        prop_assert_eq!(down.persson_lower.hi, -up.persson_upper.lo);
        prop_assert_eq!(down.persson_upper.lo, -up.persson_lower.hi);
        prop_assert_eq!(down.persson_upper.hi, -up.persson_lower.lo);
    }
}
