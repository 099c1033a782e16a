//! The ten acceptance checks, one PASS/FAIL line each. Runs without the test
//! harness so the lines always reach the terminal.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_traits::{Signed, Zero};

use pairvol::classify0::{
    enumerate_234_weights, enumerate_star3_types, halfweight_lc_determinants, star3_census, star3_family,
    verify_fixture_vol_half, CensusBounds, FixtureKind, VOL_HALF_FIXTURES,
};
use pairvol::extremal::{
    elliptic_base_volume, family_8_8, min_positive_deficiency, rdp_star_search, RdpStarParams, SearchBounds,
};
use pairvol::pairs::{lct, pcp, volume};
use pairvol::par::Mode;
use pairvol::star::{detect_star, star_pcp, Detection};
use pairvol::{int, rat, DecoratedGraph, Rat};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn graph(text: &str) -> DecoratedGraph {
    let g = DecoratedGraph::parse(text).expect("shipped graph parses");
    g.validate().expect("shipped graph is valid");
    g
}

const V237: &str = include_str!("../../../data/graphs/v237.graph");
const EX82_X: &str = include_str!("../../../data/graphs/ex82_X.graph");
const EX82_Y: &str = include_str!("../../../data/graphs/ex82_Y.graph");
const CUSP: &str = include_str!("../../../data/graphs/cusp.graph");

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn brieskorn() -> Outcome {
    let v = volume(&graph(V237)).map_err(|e| e.to_string())?;
    ensure(v == rat(1, 42), format!("got {v}"))?;
    Ok(format!("Vol = {v}"))
}

fn example_pairs() -> Outcome {
    let x = volume(&graph(EX82_X)).map_err(|e| e.to_string())?;
    let y = volume(&graph(EX82_Y)).map_err(|e| e.to_string())?;
    let v = volume(&graph(V237)).map_err(|e| e.to_string())?;
    ensure(x == rat(1, 1764), format!("X: {x}"))?;
    ensure(y == rat(1, 3528), format!("Y: {y}"))?;
    ensure(int(42) * &x == v, format!("42·X = {} vs {v}", int(42) * &x))?;
    Ok(format!("X = {x}, Y = {y}, 42·X = {v}"))
}

fn cusp() -> Outcome {
    let g = graph(CUSP);
    let Detection::Star(s) = detect_star(&g) else {
        return Err("cusp graph is not a star".into());
    };
    ensure(s.chi == rat(-5, 6), format!("χ = {}", s.chi))?;
    let t = lct(&g).map_err(|e| e.to_string())?;
    ensure(t == rat(5, 6), format!("lct = {t}"))?;
    let closed = star_pcp(&s).map_err(|e| e.to_string())?.pcp;
    let direct = pcp(&g).map_err(|e| e.to_string())?;
    ensure(closed == direct, format!("closed form {closed} vs Zariski {direct}"))?;
    ensure(closed == &s.chi_c * &s.chi_c / &s.epsilon && closed == rat(1, 6), format!("pcp = {closed}"))?;
    Ok(format!("χ = {}, lct = {t}, pcp(c=1) = {closed} by both routes", s.chi))
}

fn elliptic_family() -> Outcome {
    let (mut last_vol, mut last_base): (Option<Rat>, Option<Rat>) = (None, None);
    for m in 7..=60i64 {
        let (_, v) = family_8_8(m).map_err(|e| e.to_string())?;
        let closed = rat(8, 3) + rat(2 * (4 * m + 3), m * (m - 6));
        ensure(v == closed, format!("m = {m}: {v} vs {closed}"))?;
        let base = elliptic_base_volume(m).map_err(|e| e.to_string())?;
        ensure(base == rat(1, 6) - rat(1, m), format!("m = {m}: base {base}"))?;
        ensure(last_vol.as_ref().is_none_or(|l| v < *l), format!("m = {m}: volume does not decrease"))?;
        ensure(last_base.as_ref().is_none_or(|l| base > *l), format!("m = {m}: base does not increase"))?;
        (last_vol, last_base) = (Some(v), Some(base));
    }
    Ok("m = 7..60 closed form, volumes decrease, base volumes increase".into())
}

fn deficiency() -> Outcome {
    let expect = [(3, rat(1, 42), Some(vec![2, 3, 7])), (4, rat(1, 6), Some(vec![2, 2, 2, 3])), (5, rat(1, 2), None)];
    let mut parts = Vec::new();
    for (u, value, at) in expect {
        let (v, k) = min_positive_deficiency(u).ok_or(format!("u = {u}: none"))?;
        ensure(v == value, format!("u = {u}: {v}"))?;
        if let Some(at) = at {
            ensure(k == at, format!("u = {u}: at {k:?}"))?;
        }
        parts.push(format!("u={u}: {v}"));
    }
    Ok(parts.join(", "))
}

fn search() -> Outcome {
    let t = Instant::now();
    let s = rdp_star_search(SearchBounds::default(), Mode::Parallel).map_err(|e| e.to_string())?;
    let min = s.min.clone().ok_or("no positive volume")?;
    ensure(min == rat(1, 3528), format!("min {min}"))?;
    let y = RdpStarParams { chains: vec![], n: vec![], nprime: vec![2, 3, 7], d: 5 };
    ensure(s.argmin == [y.clone()], format!("minimizers {:?}", s.argmin))?;
    let shipped = volume(&graph(EX82_Y)).map_err(|e| e.to_string())?;
    ensure(volume(&y.graph()).map_err(|e| e.to_string())? == shipped, "shipped Y differs")?;
    Ok(format!("{} configurations, min {min} at Y, {:.1?}", s.configurations, t.elapsed()))
}

fn enumerations() -> Outcome {
    let types = enumerate_star3_types(30);
    let mut families: Vec<usize> = types.iter().map(|&k| star3_family(k).unwrap_or(0)).collect();
    families.sort();
    families.dedup();
    ensure(families == [1, 2, 3, 4], format!("families {families:?}"))?;
    for a in 2..=30u64 {
        for b in a..=30 {
            for c in b..=30 {
                let listed = b * c + a * c + a * b >= a * b * c;
                ensure(listed == types.contains(&[a, b, c]), format!("({a},{b},{c})"))?;
            }
        }
    }
    let w = enumerate_234_weights();
    #[rustfmt::skip]
    let frozen: Vec<[u64; 3]> = vec![
        [1, 1, 2], [1, 1, 4], [1, 3, 1], [1, 3, 2], [1, 3, 4], [2, 1, 1],
        [2, 1, 2], [2, 1, 4], [2, 3, 1], [2, 3, 2], [2, 3, 4],
    ];
    ensure(w == frozen, format!("weights {w:?}"))?;
    let det: Vec<String> = halfweight_lc_determinants().iter().map(ToString::to_string).collect();
    let frozen = ["{1,1,1}", "{1,1,m} m>=2", "{1,2,m} m>=2", "{1,3,m} 3<=m<=6", "{1,4,4}", "{2,2,m} m>=2", "{2,3,3}"];
    ensure(det == frozen, format!("determinant families {det:?}"))?;
    Ok("4 families, 11 weight tuples, 7 determinant families".into())
}

fn census() -> Outcome {
    let t = Instant::now();
    let s = star3_census(CensusBounds::default(), Mode::Parallel, |_, _| false).map_err(|e| e.to_string())?;
    ensure(s.total > 0 && s.volume_zero > 0, "empty census")?;
    Ok(format!("{} stars, {} of volume 0, all matched, {:.1?}", s.total, s.volume_zero, t.elapsed()))
}

fn properties() -> Outcome {
    let mut cases = 0;
    for suite in support::SUITES {
        ensure(suite.cases >= 200, format!("{}: only {} cases", suite.name, suite.cases))?;
        support::run_deterministic(suite).map_err(|e| format!("{}: {e}", suite.name))?;
        cases += suite.cases;
    }
    Ok(format!("{} suites, {cases} cases", support::SUITES.len()))
}

fn fixtures() -> Outcome {
    let (mut members, mut counter) = (0, 0);
    for (name, kind, _) in VOL_HALF_FIXTURES {
        let v = verify_fixture_vol_half(name).map_err(|e| format!("{name}: {e}"))?;
        match kind {
            FixtureKind::Member => {
                ensure(v.is_zero(), format!("{name}: {v}"))?;
                members += 1;
            }
            FixtureKind::Counterexample => {
                ensure(v.is_positive(), format!("{name}: {v}"))?;
                counter += 1;
            }
        }
    }
    Ok(format!("{members} members of volume 0, {counter} counterexamples positive"))
}

fn main() -> ExitCode {
    let checks: [Check; 10] = [
        ("V(2,3,7) volume is 1/42", brieskorn),
        ("pairs X and Y, 42·X = V(2,3,7)", example_pairs),
        ("cusp: χ, lct, closed form vs Zariski", cusp),
        ("elliptic family m = 7..60", elliptic_family),
        ("minimal positive deficiencies", deficiency),
        ("default star search minimum", search),
        ("enumerated lists", enumerations),
        ("t = 3 census: volume 0 iff matched", census),
        ("property suites", properties),
        ("fixture corpus", fixtures),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
