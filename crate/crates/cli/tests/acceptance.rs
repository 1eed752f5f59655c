//! Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
//!
//! `cargo test -p birat-cli --test acceptance -- --nocapture`

use std::process::Command;
use std::time::{Duration, Instant};

use birat_core::automap::{
    check_infinity_collapse, degree_sequence, elementary_builder, is_regular, is_submultiplicative,
    quadratic_henon, transposed_henon_builder, AffineAutomorphism, DEFAULT_TERM_BUDGET,
};
use birat_core::blowup::{
    canonical_resolution, Family, LiftCache, ResolutionConfig, ResolutionTower, Tower,
};
use birat_core::lattice::IntersectionLattice;
use birat_core::picard::{
    ample_index_upper_bound, ample_samples, classify_effective_cone, effective_index_bracket,
    verify_identities, PicardData, Verdict,
};
use birat_core::scalar::{format_scalar, int, rat};
use birat_core::Scalar;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rational(rng: &mut StdRng) -> Scalar {
    loop {
        let r = rat(rng.gen_range(-30..=30), rng.gen_range(1..=9));
        if !r.is_zero() {
            return r;
        }
    }
}

fn table_maps() -> Vec<AffineAutomorphism> {
    vec![
        quadratic_henon(&int(1), &int(1)).unwrap(),
        transposed_henon_builder(3, &int(1)).unwrap(),
        transposed_henon_builder(4, &int(1)).unwrap(),
    ]
}

/// Table maps followed by ten random quadratic Hénon maps.
fn corpus() -> Vec<AffineAutomorphism> {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut maps = table_maps();
    for _ in 0..10 {
        let a = random_rational(&mut rng);
        let b = random_rational(&mut rng);
        maps.push(quadratic_henon(&a, &b).unwrap());
    }
    maps
}

fn resolve(phi: &AffineAutomorphism) -> Result<(ResolutionTower, PicardData), String> {
    let res = canonical_resolution(phi, &ResolutionConfig::default())
        .map_err(|e| format!("{phi}: {e}"))?;
    let data = PicardData::new(&res).map_err(|e| format!("{phi}: {e}"))?;
    Ok((res, data))
}

fn criterion_table() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_birat"))
        .args(["table", "--format", "json"])
        .env_remove("BIRAT_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("exit code {:?}", out.status.code())
    })?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rows: Vec<(u64, String, String)> = v["rows"]
        .as_array()
        .ok_or("no rows")?
        .iter()
        .map(|r| {
            (
                r["degree"].as_u64().unwrap_or(0),
                r["delta"].as_str().unwrap_or("?").to_string(),
                r["eff"].as_str().unwrap_or("?").to_string(),
            )
        })
        .collect();
    let expected = [(2, "2", "5/2"), (3, "3", "10/3"), (4, "4", "17/4")];
    for ((d, delta, eff), (ed, edelta, eeff)) in rows.iter().zip(expected) {
        ensure(*d == ed && delta == edelta && eff == eeff, || {
            format!("got ({d}, {delta}, {eff}), expected ({ed}, {edelta}, {eeff})")
        })?;
    }
    ensure(rows.len() == 3, || format!("{} rows", rows.len()))?;
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "(2,2,5/2) (3,3,10/3) (4,4,17/4) in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_ample(corpus: &[(ResolutionTower, PicardData)]) -> Outcome {
    for (res, data) in corpus {
        let bound = ample_index_upper_bound(&data.invariants, &data.lattice, &ample_samples())
            .map_err(|e| e.to_string())?;
        ensure(bound.bound.is_zero(), || {
            format!("{}: bound {}", res.map, bound.bound)
        })?;
        for w in &bound.samples {
            ensure(
                w.intersection == -w.alpha.clone() && w.alpha > Scalar::zero(),
                || format!("{}: D({}).H# = {}", res.map, w.alpha, w.intersection),
            )?;
        }
    }
    Ok(format!("{} maps, alpha in {{1/2, 1, 2}}", corpus.len()))
}

fn criterion_identities(corpus: &[(ResolutionTower, PicardData)]) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(99);
    let mut total = 0;
    for (res, data) in corpus {
        let alphas: Vec<Scalar> = (0..5).map(|_| random_rational(&mut rng)).collect();
        let checks = verify_identities(&data.invariants, &data.lattice, &alphas)
            .map_err(|e| e.to_string())?;
        if let Some(bad) = checks.iter().find(|c| !c.passed) {
            return Err(format!(
                "{}: {} gives {} vs {}",
                res.map, bad.name, bad.lhs, bad.rhs
            ));
        }
        total += checks.len();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{total} exact checks over {} maps", corpus.len()))
}

fn criterion_regularity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut henons = table_maps();
    for _ in 0..3 {
        henons
            .push(quadratic_henon(&random_rational(&mut rng), &random_rational(&mut rng)).unwrap());
    }
    for phi in &henons {
        let (res, _) = resolve(phi)?;
        ensure(
            is_regular(phi).unwrap_or(false) && res.regular && res.i0 == 0,
            || format!("{phi}: i0 = {}", res.i0),
        )?;
    }
    let elementary = elementary_builder(2, &int(1)).unwrap();
    let (res, _) = resolve(&elementary)?;
    ensure(
        !is_regular(&elementary).unwrap_or(true) && res.i0 >= 1,
        || format!("(x, y + x^2): i0 = {}", res.i0),
    )?;
    Ok(format!(
        "{} Hénon maps regular, elementary map i0 = {}",
        henons.len(),
        res.i0
    ))
}

fn criterion_degrees() -> Outcome {
    let start = Instant::now();
    for (phi, d) in table_maps().iter().zip([2u32, 3, 4]) {
        let degrees = degree_sequence(phi, 5, DEFAULT_TERM_BUDGET).map_err(|e| e.to_string())?;
        let expected: Vec<u32> = (1..=5).map(|k| d.pow(k)).collect();
        ensure(degrees == expected, || format!("{phi}: {degrees:?}"))?;
        ensure(is_submultiplicative(&degrees), || {
            format!("{phi}: not submultiplicative")
        })?;
    }
    let elementary = elementary_builder(2, &int(1)).unwrap();
    let degrees =
        degree_sequence(&elementary, 5, DEFAULT_TERM_BUDGET).map_err(|e| e.to_string())?;
    ensure(
        degrees == vec![2; 5] && is_submultiplicative(&degrees),
        || format!("{degrees:?}"),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "[d..d^5] for d = 2, 3, 4 and [2,2,2,2,2] in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_cone_verdict() -> Outcome {
    let mut details = Vec::new();
    for phi in table_maps() {
        let (_, data) = resolve(&phi)?;
        let inv = &data.invariants;
        let bracket = effective_index_bracket(inv, &data.lattice).map_err(|e| e.to_string())?;
        let verdict = classify_effective_cone(&bracket.lower, &bracket.upper, &inv.a_n, &inv.ap_m);
        ensure(verdict == Verdict::NotPolyhedral, || {
            format!("{phi}: {verdict:?}")
        })?;
        details.push(format!(
            "eff {} vs threshold {}",
            format_scalar(&bracket.lower),
            format_scalar(&(-(&inv.a_n + &inv.ap_m) / int(3)))
        ));
    }
    Ok(format!("NotPolyhedral ({})", details.join("; ")))
}

fn criterion_minimality(corpus: &[(ResolutionTower, PicardData)]) -> Outcome {
    let elementary = resolve(&elementary_builder(2, &int(1)).unwrap())?.0;
    let towers: Vec<&ResolutionTower> =
        corpus.iter().map(|(r, _)| r).chain([&elementary]).collect();
    for res in &towers {
        ensure(res.is_resolved().unwrap_or(false), || {
            format!("{}: not resolved", res.map)
        })?;
        for family in [Family::E, Family::F] {
            let cut = res.truncated(family).map_err(|e| e.to_string())?;
            let fwd = LiftCache::for_lift(&res.forward_lift)
                .unresolved_base_points(&cut)
                .map_err(|e| e.to_string())?;
            let inv = LiftCache::for_lift(&res.inverse_lift)
                .unresolved_base_points(&cut)
                .map_err(|e| e.to_string())?;
            ensure(!(fwd.is_empty() && inv.is_empty()), || {
                format!(
                    "{}: dropping the last {family:?} blow-up still resolves",
                    res.map
                )
            })?;
        }
    }
    Ok(format!("{} towers, both families", towers.len()))
}

fn criterion_structure(corpus: &[(ResolutionTower, PicardData)]) -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    for phi in table_maps() {
        let hits = check_infinity_collapse(&phi, 20, &mut rng).map_err(|e| e.to_string())?;
        ensure(hits == 20, || {
            format!("{phi}: only {hits}/20 points of H land in Z(phi^-1)")
        })?;
    }
    for (res, data) in corpus {
        let rank = data.lattice.rank();
        ensure(data.lattice.signature() == (1, rank - 1, 0), || {
            format!("{}: signature {:?}", res.map, data.lattice.signature())
        })?;
    }
    let mut tower = Tower::new();
    let p = tower.affine_point(int(1), int(2));
    tower.blow_up_at(&p).map_err(|e| e.to_string())?;
    let fixture = IntersectionLattice::for_tower(&tower);
    let negatives = fixture.negative_curves();
    ensure(
        !negatives.is_empty() && negatives.iter().all(|c| c.self_intersection == int(-1)),
        || "single blow-up has a curve of square other than -1".into(),
    )?;
    let args = [
        "indices",
        "--builder",
        "henon",
        "--a",
        "2",
        "--b",
        "5",
        "--format",
        "json",
        "--seed",
        "7",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_birat"))
            .args(args)
            .env_remove("BIRAT_SEED")
            .output()
            .map(|o| o.stdout)
            .map_err(|e| e.to_string())
    };
    let (first, second) = (run()?, run()?);
    ensure(!first.is_empty() && first == second, || {
        "CLI output differs between runs".into()
    })?;
    Ok(
        "20/20 infinity samples, signature (1, rank-1), (-1)-curve fixture, identical CLI bytes"
            .into(),
    )
}

#[test]
fn acceptance() {
    let corpus: Vec<(ResolutionTower, PicardData)> = corpus()
        .iter()
        .map(|phi| resolve(phi).expect("corpus resolves"))
        .collect();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 table reproduction", criterion_table()),
        ("2 ample index bound", criterion_ample(&corpus)),
        ("3 identity suite", criterion_identities(&corpus)),
        ("4 regularity detection", criterion_regularity()),
        ("5 degree growth", criterion_degrees()),
        ("6 effective cone verdict", criterion_cone_verdict()),
        ("7 minimality", criterion_minimality(&corpus)),
        ("8 structural suite", criterion_structure(&corpus)),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
