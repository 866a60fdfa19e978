//! Acceptance criteria, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line with its runtime.

use std::time::{Duration, Instant};

use nodal_stability::engine::proper_rank_vectors;
use nodal_stability::io::{parse_document, parse_query, run_query};
use nodal_stability::polarization::{build_system, Side};
use nodal_stability::rational::{frac, Q};
use nodal_stability::{
    chi_bracket, compose_blocks, component_twist, decide_ell, decide_w, exists_polarization, oracle_max_chi,
    semistable_extension, verify_destabilizer, Achievability, BlockStatus, BundleData, Check, Evidence,
    ExtensionStatus, FamilyModel, Gluing, LineBundleData, NodalCurve, Notion, OracleConfig, Polarization,
    PolarizationResult, Status, SubsheafType,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, title: &str, start: Instant, limit: Option<Duration>, outcome: Result<(), String>) {
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|()| match limit {
        Some(l) if elapsed > l => Err(format!("took {elapsed:?}, limit {l:?}")),
        _ => Ok(()),
    });
    match &outcome {
        Ok(()) => println!("PASS criterion {n}: {title} ({elapsed:.2?})"),
        Err(e) => println!("FAIL criterion {n}: {title} ({elapsed:.2?}): {e}"),
    }
    if let Err(e) = outcome {
        panic!("criterion {n} failed: {e}");
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Riemann–Roch on each component, minus `r` per node.
fn chi_oracle(b: &BundleData) -> i64 {
    let c = b.curve();
    let local: i64 = (0..c.component_count())
        .map(|i| b.degree(i) + i64::from(b.rank()) * (1 - i64::from(c.genus(i))))
        .sum();
    local - i64::from(b.rank()) * c.node_count() as i64
}

fn sorted_desc(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn chain_bundle(splits: &[Vec<i64>], gluing: Gluing) -> BundleData {
    let refs: Vec<&[i64]> = splits.iter().map(Vec::as_slice).collect();
    BundleData::from_splittings(NodalCurve::chain(&vec![0; splits.len()]).unwrap(), &refs, gluing).unwrap()
}

/// Every chain of 1–3 rational components with rank-2 splittings in `[−3, 3]`.
fn grid() -> Vec<Vec<Vec<i64>>> {
    let pairs: Vec<Vec<i64>> = (-3..=3i64)
        .flat_map(|a| (-3..=a).map(move |b| vec![a, b]))
        .collect();
    let mut out: Vec<Vec<Vec<i64>>> = Vec::new();
    for n in 1..=3 {
        let mut idx = vec![0usize; n];
        loop {
            out.push(idx.iter().map(|&i| pairs[i].clone()).collect());
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                idx[k] += 1;
                if idx[k] < pairs.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    out
}

/// Runs `f` over `items` on all cores, returning the first error.
fn par_check<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<(), String> + Sync) -> Result<(), String> {
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                s.spawn(move || part.iter().try_for_each(f))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<()>, String>>()
            .map(|_| ())
    })
}

const THREE_CHAIN: &str = "\
curve {
  component Y1 genus 0
  component Y2 genus 0
  component Y3 genus 0
  node Y1 Y2
  node Y2 Y3
}
bundle E {
  rank 2
  gluing generic
  splitting Y1 0,0
  splitting Y2 -1,-1
  splitting Y3 0,0
}
polarization a { Y1 1/3; Y2 1/3; Y3 1/3 }
polarization b { Y1 1/2; Y2 1/4; Y3 1/4 }
polarization c { Y1 1/10; Y2 1/10; Y3 8/10 }
";

#[test]
fn criterion_1_three_chain_reproduction() {
    let start = Instant::now();
    let run = || -> Result<(), String> {
        let doc = parse_document(THREE_CHAIN).map_err(|d| d.to_string())?;
        let ask = |q: &str| {
            let tokens: Vec<&str> = q.split_whitespace().collect();
            run_query(&doc, &parse_query(&tokens).unwrap()).map_err(|e| e.to_string())
        };
        let r = ask("chi")?;
        ensure!(r.get("result") == Some("0"), "chi = {:?}", r.get("result"));
        let e = &doc.bundles[0].bundle;
        ensure!(chi_oracle(e) == 0, "Riemann–Roch gives {}", chi_oracle(e));

        let r = ask("check-ell --strict")?;
        ensure!(r.get("result") == Some("CertifiedYes (ℓ-stable)"), "check-ell: {:?}", r.get("result"));
        ensure!(r.exit_code() == 0, "check-ell exit {}", r.exit_code());

        for pol in ["a", "b", "c"] {
            let r = ask(&format!("check-w --pol {pol} --strict"))?;
            ensure!(r.exit_code() == 1, "check-w {pol}: exit {}", r.exit_code());
            ensure!(r.get("witness.ranks") == Some("(2,0,0)"), "check-w {pol}: {:?}", r.get("witness.ranks"));
            ensure!(r.get("witness.chi") == Some("0"), "check-w {pol}: χ {:?}", r.get("witness.chi"));
            let w = doc.polarization(pol).unwrap();
            let v = decide_w(e, w, true).map_err(|e| e.to_string())?;
            let wit = v.witness.ok_or("no witness")?;
            let again = verify_destabilizer(e, &wit.subsheaf, &Notion::WStable(w.clone()), 0).map_err(|e| e.to_string())?;
            ensure!(again.is_certified(), "witness does not re-verify");
        }

        let r = ask("find-polarization --strict")?;
        ensure!(r.get("result") == Some("Infeasible"), "find-polarization: {:?}", r.get("result"));
        ensure!(r.exit_code() == 1, "find-polarization exit {}", r.exit_code());
        let row = r.get("certificate.row.1").unwrap_or_default();
        ensure!(row.starts_with("(2,0,0)"), "certificate names {row:?}");
        match exists_polarization(e, true).map_err(|e| e.to_string())? {
            PolarizationResult::Infeasible { certificate, system } => {
                ensure!(certificate.verify(&system), "certificate does not verify");
            }
            other => return Err(format!("expected Infeasible, got {other:?}")),
        }
        Ok(())
    };
    report(1, "three-chain reproduction", start, Some(Duration::from_secs(1)), run());
}

#[test]
fn criterion_2_three_chain_branch_formulas() {
    let start = Instant::now();
    let run = || -> Result<(), String> {
        let mut checked = 0;
        for g1 in 0u32..=3 {
            for n in 2usize..=4 {
                for d1 in (-4i64..=6).filter(|d| d % 2 == 0) {
                    // total degree 2g − 2 with g = g1; the rest sits on Y2
                    let rest = 2 * i64::from(g1) - 2 - d1;
                    let mut genera = vec![0u32; n];
                    genera[0] = g1;
                    let curve = NodalCurve::chain(&genera).unwrap();
                    let mut degrees = vec![0i64; n];
                    degrees[0] = d1;
                    degrees[1] = rest;
                    let mut e = BundleData::new(curve, 2, degrees).unwrap().with_gluing(Gluing::Generic);
                    if g1 == 0 {
                        e = e.with_splitting(0, vec![d1 / 2, d1 / 2]).unwrap();
                    } else {
                        // strictly semistable: a line subbundle of degree d1/2
                        e = e.with_declared_max(0, 1, d1 / 2 + 1 - i64::from(g1)).unwrap();
                    }
                    e = e.with_splitting(1, vec![rest / 2, rest / 2]).unwrap();
                    for i in 2..n {
                        e = e.with_splitting(i, vec![0, 0]).unwrap();
                    }
                    ensure!(chi_oracle(&e) == 0 && e.euler_characteristic() == 0, "χ ≠ 0 for g1={g1} n={n} d1={d1}");

                    let mut head = vec![0u32; n];
                    head[0] = 2;
                    let mut tail = vec![2u32; n];
                    tail[0] = 0;
                    let bh = chi_bracket(&e, &head).map_err(|x| x.to_string())?;
                    let bt = chi_bracket(&e, &tail).map_err(|x| x.to_string())?;
                    let want_h = d1 - 2 * i64::from(g1);
                    let want_t = 2 * i64::from(g1) - 2 - d1;
                    ensure!(
                        (bh.lower, bh.upper) == (want_h, want_h),
                        "g1={g1} n={n} d1={d1}: (2,0,…) bracket {bh}, want {want_h}"
                    );
                    ensure!(
                        (bt.lower, bt.upper) == (want_t, want_t),
                        "g1={g1} n={n} d1={d1}: (0,2,…) bracket {bt}, want {want_t}"
                    );
                    // whichever branch applies destabilizes for every polarization
                    let w = Polarization::uniform(n).unwrap();
                    let (ranks, chi) = if d1 >= 2 * i64::from(g1) { (head, want_h) } else { (tail, want_t) };
                    let ty = SubsheafType::extremal(&e, ranks, Achievability::Generic).map_err(|x| x.to_string())?;
                    let check = verify_destabilizer(&e, &ty, &Notion::WStable(w.clone()), chi).map_err(|x| x.to_string())?;
                    ensure!(matches!(check, Check::Certified(_)), "g1={g1} n={n} d1={d1}: branch does not destabilize");
                    let v = decide_w(&e, &w, true).map_err(|x| x.to_string())?;
                    ensure!(v.status == Status::CertifiedNo, "g1={g1} n={n} d1={d1}: decide_w {}", v.status);
                    checked += 1;
                }
            }
        }
        ensure!(checked == 4 * 3 * 6, "checked {checked} instances");
        Ok(())
    };
    report(2, "branch bracket formulas", start, None, run());
}

fn random_curve(rng: &mut ChaCha8Rng, max_components: usize) -> NodalCurve {
    let n = rng.gen_range(1..=max_components);
    let labels: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
    let mut edges: Vec<(String, String)> = (1..n)
        .map(|i| (labels[rng.gen_range(0..i)].clone(), labels[i].clone()))
        .collect();
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=2) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            edges.push((labels[a].clone(), labels[b].clone()));
        }
    }
    NodalCurve::new(labels.iter().map(|l| (l.clone(), 0u32)), edges).unwrap()
}

fn random_bundle(rng: &mut ChaCha8Rng, curve: NodalCurve, max_rank: u32, bound: i64) -> BundleData {
    let r = rng.gen_range(1..=max_rank);
    let splits: Vec<Vec<i64>> = (0..curve.component_count())
        .map(|_| sorted_desc((0..r).map(|_| rng.gen_range(-bound..=bound)).collect()))
        .collect();
    let refs: Vec<&[i64]> = splits.iter().map(Vec::as_slice).collect();
    let gluing = *[Gluing::Generic, Gluing::Aligned, Gluing::Unspecified].choose(rng).unwrap();
    BundleData::from_splittings(curve, &refs, gluing).unwrap()
}

#[test]
fn criterion_3_twist_invariance() {
    let start = Instant::now();
    let run = || -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7157);
        for case in 0..1000 {
            let curve = random_curve(&mut rng, 4);
            let e = random_bundle(&mut rng, curve.clone(), 3, 4);
            let ell: Vec<i64> = (0..curve.component_count()).map(|_| rng.gen_range(-4..=4)).collect();
            let line = LineBundleData::new(curve, ell.clone()).unwrap();
            let t = e.twist(&line).map_err(|x| x.to_string())?;
            let expected = chi_oracle(&e) + i64::from(e.rank()) * ell.iter().sum::<i64>();
            ensure!(t.euler_characteristic() == expected, "case {case}: χ identity fails");
            ensure!(chi_oracle(&t) == expected, "case {case}: Riemann–Roch disagrees");
            for strict in [false, true] {
                let a = decide_ell(&e, strict).map_err(|x| x.to_string())?;
                let b = decide_ell(&t, strict).map_err(|x| x.to_string())?;
                ensure!(
                    a.status == b.status && a.witness_ranks() == b.witness_ranks(),
                    "case {case} strict={strict}: {} {:?} vs {} {:?}",
                    a.status,
                    a.witness_ranks(),
                    b.status,
                    b.witness_ranks()
                );
            }
        }
        Ok(())
    };
    report(3, "twist invariance", start, Some(Duration::from_secs(30)), run());
}

/// Whether the oracle maximum for `ranks` violates `notion`.
fn oracle_violates(e: &BundleData, ranks: &[u32], notion: &Notion, model: Achievability) -> Result<bool, String> {
    let out = oracle_max_chi(e, ranks, &OracleConfig::new(model)).map_err(|x| x.to_string())?;
    Ok(notion.compare(e, ranks, out.max_chi).map_err(|x| x.to_string())?.violated())
}

fn model_of(g: Gluing) -> Achievability {
    match g {
        Gluing::Aligned => Achievability::Aligned,
        _ => Achievability::Generic,
    }
}

#[test]
fn criterion_4_oracle_bracket_containment() {
    let start = Instant::now();
    let instances = grid();
    let pols: Vec<Vec<Q>> = vec![vec![frac(1, 2), frac(1, 2)], vec![frac(1, 3), frac(1, 3), frac(1, 3)], vec![frac(1, 2), frac(1, 4), frac(1, 4)]];
    let run = par_check(&instances, |splits| {
        let n = splits.len();
        let base = chain_bundle(splits, Gluing::Generic);
        let candidates = proper_rank_vectors(n, 2);
        let mut maxima = Vec::with_capacity(candidates.len());
        for ranks in &candidates {
            let b = chi_bracket(&base, ranks).map_err(|x| x.to_string())?;
            let mut pair = [0i64; 2];
            for (k, model) in [Achievability::Generic, Achievability::Aligned].into_iter().enumerate() {
                let m = oracle_max_chi(&base, ranks, &OracleConfig::new(model)).map_err(|x| x.to_string())?.max_chi;
                ensure!(b.lower <= m && m <= b.upper, "{splits:?} {ranks:?}: oracle {m} outside {b}");
                pair[k] = m;
            }
            maxima.push(pair);
        }
        let w = pols.iter().find(|w| w.len() == n).map(|w| Polarization::new(w.clone()).unwrap());
        for gluing in [Gluing::Generic, Gluing::Aligned] {
            let e = base.clone().with_gluing(gluing);
            let k = usize::from(gluing == Gluing::Aligned);
            let mut notions = vec![Notion::EllSemistable, Notion::EllStable];
            if let Some(w) = &w {
                notions.push(Notion::WSemistable(w.clone()));
                notions.push(Notion::WStable(w.clone()));
            }
            for notion in notions {
                let v = match &notion {
                    Notion::EllSemistable | Notion::EllStable => decide_ell(&e, notion.is_strict()),
                    Notion::WSemistable(w) | Notion::WStable(w) => decide_w(&e, w, notion.is_strict()),
                }
                .map_err(|x| x.to_string())?;
                let relevant = candidates
                    .iter()
                    .zip(&maxima)
                    .filter(|(r, _)| notion.polarization().is_some() || r.iter().all(|&x| x == r[0]));
                let mut violated = false;
                for (ranks, m) in relevant {
                    if notion.compare(&e, ranks, m[k]).map_err(|x| x.to_string())?.violated() {
                        violated = true;
                    }
                }
                match v.status {
                    Status::CertifiedYes => ensure!(!violated, "{splits:?} {gluing:?} {}: oracle finds a violation", notion.name()),
                    Status::CertifiedNo => {
                        ensure!(violated, "{splits:?} {gluing:?} {}: oracle finds none", notion.name());
                        let ranks = v.witness_ranks().unwrap();
                        ensure!(
                            oracle_violates(&e, ranks, &notion, model_of(gluing))?,
                            "{splits:?} {gluing:?}: witness {ranks:?} not confirmed"
                        );
                    }
                    Status::Indeterminate => return Err(format!("{splits:?} {gluing:?}: Indeterminate")),
                }
            }
        }
        Ok(())
    });
    report(4, "oracle bracket containment", start, Some(Duration::from_secs(120)), run);
}

#[test]
fn criterion_5_composition_consistency() {
    let start = Instant::now();
    let instances: Vec<Vec<Vec<i64>>> = grid().into_iter().filter(|s| s.len() >= 2).collect();
    let run = par_check(&instances, |splits| {
        for gluing in [Gluing::Generic, Gluing::Aligned] {
            let e = chain_bundle(splits, gluing);
            let curve = e.curve().clone();
            for node in 0..curve.node_count() {
                let (l, r) = curve.split_at_node(node).map_err(|x| x.to_string())?;
                let lb = BlockStatus::of_subcurve(&e, &l).map_err(|x| x.to_string())?;
                let rb = BlockStatus::of_subcurve(&e, &r).map_err(|x| x.to_string())?;
                if lb.semistable != Evidence::Verified || rb.semistable != Evidence::Verified {
                    continue;
                }
                for strict in [false, true] {
                    let c = compose_blocks(&e, &lb, &rb, node, strict).map_err(|x| x.to_string())?;
                    let d = decide_ell(&e, strict).map_err(|x| x.to_string())?;
                    if c.verdict.status.is_certified() && d.status.is_certified() {
                        ensure!(
                            c.verdict.status == d.status,
                            "{splits:?} {gluing:?} node {node} strict={strict}: compose {} vs decide {}",
                            c.verdict.status,
                            d.status
                        );
                    }
                    let matching = lb.weak.intersection(&rb.weak).next().is_some();
                    if strict && gluing == Gluing::Aligned && matching {
                        ensure!(
                            c.verdict.status == Status::CertifiedNo && d.status == Status::CertifiedNo,
                            "{splits:?} node {node}: matching aligned pair gives {} / {}",
                            c.verdict.status,
                            d.status
                        );
                    }
                }
            }
        }
        Ok(())
    });
    report(5, "composition consistency", start, None, run);
}

#[test]
fn criterion_6_polarized_implies_ell() {
    let start = Instant::now();
    let instances = grid();
    let run = par_check(&instances, |splits| {
        let seed = splits.iter().flatten().fold(17u64, |h, &x| h.wrapping_mul(31).wrapping_add(x as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for gluing in [Gluing::Generic, Gluing::Aligned] {
            let e = chain_bundle(splits, gluing);
            let ell: Vec<i64> = (0..splits.len()).map(|_| rng.gen_range(-3..=3)).collect();
            let t = e.twist(&LineBundleData::new(e.curve().clone(), ell).unwrap()).map_err(|x| x.to_string())?;
            for b in [&e, &t] {
                let feasible = matches!(
                    exists_polarization(b, false).map_err(|x| x.to_string())?,
                    PolarizationResult::Feasible { .. }
                );
                let ell_no = decide_ell(b, false).map_err(|x| x.to_string())?.status == Status::CertifiedNo;
                ensure!(!(feasible && ell_no), "{:?} {gluing:?}: Feasible yet not ℓ-semistable", b.degrees());
            }
        }
        Ok(())
    });
    report(6, "w-semistable for some w implies ℓ-semistable", start, None, run);
}

/// All `w` with positive coordinates of denominator at most `den` summing to one.
fn polarization_grid(n: usize, den: i64) -> Vec<Polarization> {
    let mut farey: Vec<Q> = (1..=den).flat_map(|q| (1..q).map(move |p| frac(p, q))).collect();
    farey.sort();
    farey.dedup();
    let mut out = Vec::new();
    let mut prefix: Vec<Vec<Q>> = vec![vec![]];
    for _ in 0..n - 1 {
        prefix = prefix
            .into_iter()
            .flat_map(|p| {
                let used: Q = p.iter().sum();
                farey
                    .iter()
                    .filter(move |x| used + **x < Q::from_integer(1))
                    .map(move |x| {
                        let mut v = p.clone();
                        v.push(*x);
                        v
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    for mut p in prefix {
        let last = Q::from_integer(1) - p.iter().sum::<Q>();
        if *last.denom() <= i128::from(den) {
            p.push(last);
            out.push(Polarization::new(p).unwrap());
        }
    }
    out
}

#[test]
fn criterion_7_solver_matches_grid_search() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5017);
    let mut instances = Vec::new();
    for _ in 0..200 {
        let n = rng.gen_range(2..=3);
        let r = rng.gen_range(1..=3u32);
        let splits: Vec<Vec<i64>> = (0..n)
            .map(|_| sorted_desc((0..r).map(|_| rng.gen_range(-3..=3)).collect()))
            .collect();
        let gluing = if rng.gen_bool(0.5) { Gluing::Generic } else { Gluing::Aligned };
        instances.push((chain_bundle(&splits, gluing), rng.gen_bool(0.5)));
    }
    let grids = [polarization_grid(2, 12), polarization_grid(3, 12)];
    let run = par_check(&instances, |(e, strict)| {
        let n = e.curve().component_count();
        let found = grids[n - 2]
            .iter()
            .find(|w| decide_w(e, w, *strict).map(|v| v.status == Status::CertifiedYes).unwrap_or(false));
        match exists_polarization(e, *strict).map_err(|x| x.to_string())? {
            PolarizationResult::Feasible { witness, .. } => {
                let v = decide_w(e, &witness, *strict).map_err(|x| x.to_string())?;
                ensure!(v.status == Status::CertifiedYes, "{:?}: witness {witness} fails decide_w", e.degrees());
                ensure!(found.is_some(), "{:?} strict={strict}: solver feasible at {witness}, grid empty", e.degrees());
            }
            PolarizationResult::Infeasible { certificate, system } => {
                ensure!(certificate.verify(&system), "{:?}: certificate fails", e.degrees());
                ensure!(found.is_none(), "{:?} strict={strict}: grid finds {}", e.degrees(), found.unwrap());
                let side = if e.gluing() == Gluing::Aligned { Side::Potential } else { Side::Guaranteed };
                ensure!(build_system(e, *strict, side).is_ok(), "system rebuild failed");
            }
            PolarizationResult::Indeterminate { reason } => return Err(format!("Indeterminate: {reason}")),
        }
        Ok(())
    });
    report(7, "polarization solver vs grid search", start, None, run);
}

#[test]
fn criterion_8_langton_simulator() {
    let start = Instant::now();
    let run = || -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a76);
        let (mut done, mut longest) = (0, 0);
        while done < 100 {
            let r = rng.gen_range(1..=3u32);
            // the generic fiber has genus 0, so a semistable one needs r | d
            let ri = i64::from(r);
            let total = ri * rng.gen_range(-2..=2i64);
            // splitting entries stay in [−3, 3], as on the grid
            let d1 = rng.gen_range((total - 3 * ri).max(-3 * ri)..=(total + 3 * ri).min(3 * ri));
            let d2 = total - d1;
            let balanced = |d: i64| -> Vec<i64> {
                sorted_desc((0..ri).map(|j| d.div_euclid(ri) + i64::from(j < d.rem_euclid(ri))).collect())
            };
            let e = chain_bundle(&[balanced(d1), balanced(d2)], Gluing::Generic);
            let p = rng.gen_range(1..=5i64);
            let w = Polarization::new(vec![frac(p, 6), frac(6 - p, 6)]).unwrap();
            if decide_w(&e, &w, false).map_err(|x| x.to_string())?.status != Status::CertifiedNo {
                continue;
            }
            done += 1;
            let family = FamilyModel::new(e.clone());
            let ext = semistable_extension(&family, &w, 8).map_err(|x| x.to_string())?;
            ensure!(
                ext.status == ExtensionStatus::Success,
                "d=({d1},{d2}) r={r} w={w}: {:?} after {} steps ({:?})",
                ext.status,
                ext.trace.len(),
                ext.reason
            );
            longest = longest.max(ext.trace.len());
            for step in &ext.trace {
                ensure!(chi_oracle(&step.before) == chi_oracle(&step.after), "χ changed");
                ensure!(step.before.total_degree() == step.after.total_degree(), "Σd changed");
                ensure!(step.after.total_degree() == family.generic_degree(), "generic degree drifted");
                ensure!(step.report.margin_after < step.report.margin_before, "margin did not decrease");
            }
            let fin = ext.family.special_fiber();
            ensure!(decide_w(fin, &w, false).map_err(|x| x.to_string())?.status == Status::CertifiedYes, "final state not w-semistable");
            let mut g = family.clone();
            for i in 0..2 {
                g = component_twist(&g, i).map_err(|x| x.to_string())?.0;
            }
            ensure!(g.special_fiber().degrees() == e.degrees(), "twist round trip moved degrees");
        }
        println!("longest extension: {longest} steps");
        Ok(())
    };
    report(8, "Langton simulator", start, None, run());
}
