//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the lines always show in
//! `cargo test` output. Criteria whose stated expectation disagrees with the exact
//! computation print FAIL, and the test then pins the computed value instead.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner, RngAlgorithm};

use spherecheck::areafeas::{area_of, feasible, reduced_basis_system, Row, Var};
use spherecheck::config_search::{
    verify_config_n10, verify_config_n11, verify_config_n12, verify_disjoint_minus2, verify_minus2_octuples, FamilyLabel,
};
use spherecheck::cyclotomic::{cos, cot, csc, p5_identities, sin};
use spherecheck::gindex::{
    hj_resolution, integral_angles_of_order, profile_search, signature_defect, torus_model_unchecked, FixedComponent,
    IsolatedPoint, Scenario, SearchReport,
};
use spherecheck::lattice::{adjunction_genus, dot, reflect_cremona, reflect_exceptional};
use spherecheck::sphere_enum::{verify_support_size, verify_zero_square};
use spherecheck::HClass;

struct Line {
    id: usize,
    title: &'static str,
    ok: bool,
    detail: String,
    secs: f64,
}

fn run(id: usize, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Line {
    let t = Instant::now();
    let (ok, detail) = f();
    Line { id, title, ok, detail, secs: t.elapsed().as_secs_f64() }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------

fn eight_spheres() -> (bool, String) {
    let r = verify_minus2_octuples().unwrap();
    let labels: BTreeSet<FamilyLabel> = r.families.iter().filter_map(|f| f.label).collect();
    let ok = r.passed
        && r.families.len() == 3
        && labels == [FamilyLabel::A, FamilyLabel::B, FamilyLabel::C].into_iter().collect()
        && r.families.iter().all(|f| f.witness.is_some());
    (ok, format!("pool {}, {} disjoint orbits, {} area-feasible families {:?}", r.pool_size, r.disjoint_orbits, r.families.len(), labels))
}

fn disjoint_n9() -> (bool, String) {
    let r = verify_disjoint_minus2(9).unwrap();
    let size8 = r.exhibits.iter().any(|e| e.classes.len() == 8 && e.pairwise_disjoint && e.classes.iter().all(|c| c.square() == -2));
    let ok = r.passed && r.representatives == Some(240) && r.max_orthogonal == Some(8) && size8;
    (ok, format!("representatives {:?}, max orthogonal {:?}, size-8 exhibit {}", r.representatives, r.max_orthogonal, size8))
}

fn disjoint_n7_n8() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [8, 7] {
        let r = verify_disjoint_minus2(n).unwrap();
        let exhibit = r.exhibits.iter().any(|e| e.classes.len() == n && e.pairwise_disjoint);
        let all_fano = r.survivors_fano.iter().all(|&f| f);
        ok &= r.passed && all_fano && exhibit;
        parts.push(format!("N={n}: {} survivors, all Fano {all_fano}, exhibit {exhibit}", r.survivors.len()));
    }
    (ok, parts.join("; "))
}

fn decompositions() -> (bool, String) {
    let r10 = verify_config_n10().unwrap();
    let r12 = verify_config_n12().unwrap();
    let r11 = verify_config_n11().unwrap();
    let single_torus = !r10.solutions.is_empty()
        && r10.solutions.iter().all(|s| {
            let b: Vec<_> = s.elements.iter().filter(|e| e.kind.starts_with('B')).flat_map(|e| e.classes.iter().map(move |c| (&e.kind, c))).collect();
            b.len() == 1 && b[0].0 == "B torus" && adjunction_genus(b[0].1) == Ratio::from_integer(1) && s.realization.is_some()
        });
    let mut ok = r10.passed && single_torus && r12.passed && r12.solutions.is_empty() && r11.passed && r11.solutions.is_empty();
    let mut cases = Vec::new();
    for r in [&r10, &r12, &r11] {
        ok &= !r.cases.is_empty() && r.cases.iter().all(|c| c.eliminated);
        for c in &r.cases {
            cases.push(format!("{}:{}={}", r.n, c.name, if c.eliminated { "eliminated" } else { "OPEN" }));
        }
    }
    (
        ok,
        format!(
            "N=10 {} single-torus solutions, N=12 {} solutions, N=11 {} solutions; {}",
            r10.solutions.len(),
            r12.solutions.len(),
            r11.solutions.len(),
            cases.join(", ")
        ),
    )
}

fn scenario(name: &str) -> SearchReport {
    let path = format!("{}/../../fixtures/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    profile_search(&Scenario::from_json(&text).unwrap()).unwrap()
}

fn fixed_point_tables() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: &str, cond: bool| {
        ok &= cond;
        notes.push(format!("{label} {}", if cond { "ok" } else { "MISMATCH" }));
    };

    // order 2: eight points, ΣY² = 2(1 − b₂⁻(M/G)); b₂⁻(M/G) is 1 when H^{2,-} is fixed
    let z2 = scenario("z2-b1-2");
    let s = z2.survivors();
    check(
        "order 2",
        s.len() == 2
            && s.iter().all(|r| r.count(2, 1) == 8)
            && s.iter().all(|r| r.sum_y2 == if r.branch == "h2minus fixed" { 0 } else { 2 }),
    );

    let z3 = scenario("z3-b1-2");
    let s = z3.survivors();
    let killed = z3.rows.iter().find(|r| r.count(3, 1) == 8 && r.count(3, 2) == 0);
    check(
        "order 3",
        s.len() == 1
            && s[0].count(3, 1) == 3
            && s[0].count(3, 2) == 3
            && killed.is_some_and(|r| {
                r.eliminated_at == Some(spherecheck::gindex::Stage::Spin) && r.spin_coefficients.as_ref().is_some_and(|d| d[0] == -2)
            }),
    );

    let z3t = scenario("z3-b1-4");
    let s = z3t.survivors();
    check(
        "order 3 torus",
        s.len() == 1 && s[0].count(3, 1) == 9 && s[0].count(3, 2) == 0 && s[0].witness.surfaces.iter().all(|y| y.genus == 1),
    );

    let z5 = scenario("z5-rational-b1-4");
    let s = z5.survivors();
    check("order 5", z5.rows.len() == 6 && s.len() == 1 && s[0].count(5, 2) == 5 && s[0].types.len() == 1);

    // order 4: x = y = 2 survives with H^{2,-} fixed; the b₂⁻(M/G) = 0 branch dies
    let z4 = scenario("z4-b1-2");
    let s = z4.survivors();
    check(
        "order 4",
        s.len() == 1 && s[0].branch == "h2minus fixed" && s[0].count(4, 1) == 2 && s[0].count(4, 3) == 2,
    );

    let z8 = scenario("z8-b1-4");
    let mut got: Vec<(String, i64, i64)> = z8
        .survivors()
        .iter()
        .map(|r| {
            let b8 = r.types.iter().find(|t| t.order == 8).unwrap();
            let b4 = r.types.iter().find(|t| t.order == 4).unwrap();
            assert_eq!((b8.points, b4.points, r.count(2, 1)), (2, 2, 12));
            (r.branch.clone(), b8.type_b, b4.type_b)
        })
        .collect();
    got.sort();
    check("order 8", got == vec![("1/8,3/8".to_string(), 3, 3), ("1/8,5/8".to_string(), 5, 1)]);

    (ok, notes.join(", "))
}

fn exact_trig() -> (bool, String) {
    let d = |b| signature_defect(&FixedComponent::Point(IsolatedPoint::new(5, 1, b).unwrap()), 5).unwrap();
    let defects = [d(1), d(2), d(4)];
    let shown: Vec<String> = defects.iter().map(|x| x.to_string()).collect();
    let defects_ok = defects == [q(-4), q(0), q(4)];
    let ids = p5_identities();
    let ids_ok = ids.len() == 4 && ids.iter().all(|(_, v)| v.windows(2).all(|w| w[0] == w[1]));
    let mut worst = 0f64;
    let mut count = 0;
    for m in 1..=24u32 {
        for k in 0..2 * m as i64 {
            let t = std::f64::consts::PI * k as f64 / m as f64;
            worst = worst.max((cos(k, m).to_f64() - t.cos()).abs()).max((sin(k, m).to_f64() - t.sin()).abs());
            if k % m as i64 != 0 {
                worst = worst.max((cot(k, m).to_f64() - 1.0 / t.tan()).abs()).max((csc(k, m).to_f64() - 1.0 / t.sin()).abs());
            }
            count += 1;
        }
    }
    let ok = defects_ok && ids_ok && worst < 1e-9;
    (ok, format!("defects {shown:?}, {} identities hold, {count} angles, max float error {worst:.2e}", ids.len()))
}

fn torus_model() -> (bool, String) {
    let mut pairs = 0;
    for n in 1..=12i64 {
        for j1 in 0..n {
            for j2 in 0..n {
                torus_model_unchecked(Ratio::new(j1, n), Ratio::new(j2, n)).unwrap();
                pairs += 1;
            }
        }
    }
    let stated: BTreeSet<i64> = [9, 12, 16].into();
    let failing: BTreeSet<i64> = stated.iter().copied().filter(|&n| integral_angles_of_order(n).is_none()).collect();
    // order 12 admits (1/12, 5/12): 2(cos + cos) = 0 and 4 cos cos = −3
    assert_eq!(failing, [9, 16].into());
    assert!(integral_angles_of_order(12).is_some());
    let ok = failing == stated;
    let w12 = integral_angles_of_order(12).map(|p| format!("{}, {}", p.0, p.1)).unwrap_or_default();
    (
        ok,
        format!("closed forms match the matrix model on {pairs} angle pairs; orders failing integrality {failing:?}, expected {stated:?}; order 12 integral at ({w12})"),
    )
}

fn resolutions() -> (bool, String) {
    let r21 = hj_resolution(2, 1).unwrap();
    let r41 = hj_resolution(4, 1).unwrap();
    let r83 = hj_resolution(8, 3).unwrap();
    let r87 = hj_resolution(8, 7).unwrap();
    let mut du_val_ok = true;
    for m in 2..=12i64 {
        for b in 1..m {
            if num_integer::gcd(m, b) == 1 {
                du_val_ok &= hj_resolution(m, b).unwrap().is_du_val() == (b == m - 1);
            }
        }
    }
    // 1/2(1,1) is a single (−2)-curve, Du Val, so its ΔK² is 0 rather than −1
    assert_eq!((r21.chain.clone(), r21.delta_k2.clone()), (vec![2], q(0)));
    let ok41 = r41.delta_k2 == q(-1);
    let ok83 = r83.chain == vec![3, 3] && r83.delta_k2 == q(-1);
    let ok87 = r87.chain == vec![2; 7] && r87.delta_k2 == q(0);
    let ok21 = r21.delta_k2 == q(-1);
    assert!(ok41 && ok83 && ok87 && du_val_ok);
    (
        ok21 && ok41 && ok83 && ok87 && du_val_ok,
        format!(
            "(2,1) dK2={} expected -1; (4,1) dK2={}; (8,3) {:?} dK2={}; (8,7) {:?} dK2={}; Du Val iff b=m-1 for m<=12: {du_val_ok}",
            r21.delta_k2, r41.delta_k2, r83.chain, r83.delta_k2, r87.chain, r87.delta_k2
        ),
    )
}

fn random_classes(runner: &mut TestRunner, count: usize) -> Vec<HClass> {
    let strat = (1usize..=13).prop_flat_map(|n| ((-12i64..=12), proptest::collection::vec(-8i64..=8, n)));
    (0..count)
        .map(|_| {
            let (a, b) = strat.new_tree(runner).unwrap().current();
            HClass::new(a, b)
        })
        .collect()
}

fn property_suites() -> (bool, String) {
    let support = verify_support_size();
    let zero = verify_zero_square();

    let seed = [7u8; 32];
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &seed));
    let classes = random_classes(&mut runner, 1000);
    let mut reflections_ok = true;
    let mut adjunction_ok = true;
    for (t, x) in classes.iter().enumerate() {
        let n = x.n();
        let k = t % n + 1;
        let y = reflect_exceptional(x, k).unwrap();
        reflections_ok &= reflect_exceptional(&y, k).unwrap() == *x && y.square() == x.square();
        // K·A changes by 2b_k under E_k ↦ −E_k
        adjunction_ok &= y.k_dot() - x.k_dot() == 2 * y.b[k - 1];
        if n >= 3 {
            let (i, j, l) = (t % n + 1, (t + 1) % n + 1, (t + 2) % n + 1);
            let z = reflect_cremona(x, i, j, l).unwrap();
            let other = &classes[(t + 1) % classes.len()];
            let pair_ok = other.n() != n || dot(&reflect_cremona(other, i, j, l).unwrap(), &z) == dot(other, x);
            reflections_ok &= reflect_cremona(&z, i, j, l).unwrap() == *x && z.square() == x.square() && pair_ok;
            adjunction_ok &= z.k_dot() == x.k_dot() && adjunction_genus(&z) == adjunction_genus(x);
        }
    }

    let mut witnesses = 0;
    let mut areas_ok = true;
    for chunk in classes.chunks(4).take(60) {
        let n = chunk[0].n();
        let same: Vec<&HClass> = chunk.iter().filter(|c| c.n() == n).collect();
        let extra: Vec<Row> = same.iter().map(|c| Row::gt(area_of(c), "w(A) > 0")).collect();
        let sys = reduced_basis_system(n).with(&extra);
        if let Some(w) = feasible(&sys).witness() {
            witnesses += 1;
            areas_ok &= sys.satisfied_by(w);
            for s in [BigRational::new(1.into(), 3.into()), q(5)] {
                let scaled = w.iter().map(|(v, x)| (*v, x * &s)).collect();
                areas_ok &= sys.satisfied_by(&scaled);
            }
        }
        // A and −A cannot both have positive area
        let c = same[0];
        let both = reduced_basis_system(n).with(&[Row::gt(area_of(c), "A"), Row::gt(area_of(&c.scale(-1)), "-A")]);
        areas_ok &= !feasible(&both).is_feasible();
    }
    areas_ok &= feasible(&reduced_basis_system(9)).witness().is_some_and(|w| w.contains_key(&Var::WH));

    let ok = support.passed && zero.passed && reflections_ok && adjunction_ok && areas_ok && witnesses > 0;
    (
        ok,
        format!(
            "support rows {} ok {}, zero-square window {} solutions ok {}, {} negative pairs; 1000 classes: reflections {}, adjunction {}; {} area witnesses sound and scale-invariant {}",
            support.rows.len(),
            support.passed,
            zero.solutions,
            zero.passed,
            zero.negative_pairs_checked,
            reflections_ok,
            adjunction_ok,
            witnesses,
            areas_ok
        ),
    )
}

fn main() {
    let lines = vec![
        run(1, "eight disjoint (-2)-classes in N=9 form three families", eight_spheres),
        run(2, "N=9 root representatives and maximal orthogonal set", disjoint_n9),
        run(3, "N=7, N=8 disjoint tuples reduce to Fano incidence", disjoint_n7_n8),
        run(4, "canonical-class decompositions for N=10, 12, 11", decompositions),
        run(5, "fixed-point tables from scenario fixtures", fixed_point_tables),
        run(6, "exact trig values and order-5 defects", exact_trig),
        run(7, "T^4 rotation model and integrality", torus_model),
        run(8, "cyclic quotient resolutions", resolutions),
        run(9, "property suites", property_suites),
    ];
    for l in &lines {
        println!("criterion {}: {} [{:.1}s] {} :: {}", l.id, if l.ok { "PASS" } else { "FAIL" }, l.secs, l.title, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    println!("acceptance: {} of {} criteria pass; failing {:?}", lines.len() - failed.len(), lines.len(), failed);
    // 7 and 8 state values the exact computation contradicts; their computed
    // values are asserted inside the criterion functions
    if !failed.iter().all(|id| [7, 8].contains(id)) {
        eprintln!("unexpected failures: {failed:?}");
        std::process::exit(1);
    }
}
