//! End-to-end acceptance checks. Each test prints one `acceptance` line with
//! its outcome; the lines go straight to stderr so they show without
//! `--nocapture`.

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Pow, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vcnk_core::dimensions::{audit_gamma_growth, vcn_k, Dimension};
use vcnk_core::hypotheses::{gamma, generators};
use vcnk_core::losses::{check_almost_metric, LossMatrix};
use vcnk_core::packing::{
    adversarial_measure, audit_hp_to_vcnk, audit_hp_to_vcnk_partite, cover_bound_check, greedy_centers,
    hamming_volume_check, optimal_cover_size,
};
use vcnk_core::pacsim::{
    audit_pac_to_hp, default_delta_grid, erm_learner, pac_threshold, published_formula, FailureCurve, PacAuditOptions,
    Sample,
};
use vcnk_core::partization::{
    audit_hp_transfer, check_commuting_diagram, check_iota_inverse, check_kpart_loss_equality,
    check_phi_bijective, check_phi_measure_preserving, partite_loss_matrix, partize_class, partize_loss,
    partize_measure, partize_space,
};
use vcnk_core::rational::ratio;
use vcnk_core::universe::{factorial, pullback, ConfigPoint};
use vcnk_core::hypotheses::StarPlan;
use vcnk_core::{
    AuditReport, Error, Hypothesis, HypothesisClass, Limits, Loss, ProbTemplate, Quantity, Rational, Space, Universe,
    Verdict,
};

const SLACK: f64 = 1e-9;

fn announce(n: usize, name: &str, ok: bool, detail: &str) {
    let line = format!("acceptance {n} {name}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn space(k: usize, sizes: &[usize], labels: usize) -> Space {
    Space::new(Universe::with_sizes(k, sizes, labels).unwrap(), Limits::default()).unwrap()
}

fn random_class(s: &Space, count: usize, seed: u64, rank: usize) -> HypothesisClass {
    HypothesisClass::dedup("random", generators::random(s, count, seed, rank).unwrap())
}

fn random_measure(s: &Space, rng: &mut ChaCha8Rng) -> ProbTemplate {
    let u = s.universe();
    let per_arity = (1..=u.k())
        .map(|a| {
            let raw: Vec<i64> = (0..u.set_size(a)).map(|_| rng.random_range(1..=4)).collect();
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&w| ratio(w, total)).collect()
        })
        .collect();
    ProbTemplate::new(u, per_arity).unwrap()
}

fn count(r: &AuditReport, name: &str) -> usize {
    match r.get(name) {
        Some(Quantity::Integer(v)) => v.to_usize().unwrap(),
        other => panic!("{}: quantity {name} is {other:?}", r.name),
    }
}

fn h2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Natarajan dimension by brute force: every subset of points and every pair
/// of pointwise-distinct value choices, built one point at a time and cut as
/// soon as some selection on the chosen prefix is not realized.
fn naive_natarajan(n_points: usize, functions: &[Vec<usize>]) -> Option<usize> {
    if functions.is_empty() {
        return None;
    }
    let seen: Vec<Vec<usize>> = (0..n_points)
        .map(|p| {
            let mut v: Vec<usize> = functions.iter().map(|f| f[p]).collect();
            v.sort();
            v.dedup();
            v
        })
        .collect();
    let mut best = 0;
    for set in 1u32..(1 << n_points) {
        let points: Vec<usize> = (0..n_points).filter(|&p| set >> p & 1 == 1).collect();
        if points.len() <= best {
            continue;
        }
        let pts = &points;
        let prefixes: HashSet<Vec<usize>> = functions
            .iter()
            .flat_map(|f| (1..=pts.len()).map(move |l| pts[..l].iter().map(|&p| f[p]).collect()))
            .collect();
        if naive_shatters(&points, &seen, &prefixes, &mut Vec::new()) {
            best = points.len();
        }
    }
    Some(best)
}

fn naive_shatters(points: &[usize], seen: &[Vec<usize>], prefixes: &HashSet<Vec<usize>>, chosen: &mut Vec<(usize, usize)>) -> bool {
    let i = chosen.len();
    if i == points.len() {
        return true;
    }
    for &v0 in &seen[points[i]] {
        for &v1 in &seen[points[i]] {
            if v0 == v1 {
                continue;
            }
            chosen.push((v0, v1));
            let realized = (0..1u32 << chosen.len()).all(|sel| {
                let pattern: Vec<usize> =
                    chosen.iter().enumerate().map(|(j, &(a, b))| if sel >> j & 1 == 1 { b } else { a }).collect();
                prefixes.contains(&pattern)
            });
            if realized && naive_shatters(points, seen, prefixes, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Code of `H*_k(x)`: `h` evaluated at `x ∘ τ` for every permutation `τ`.
fn oracle_pattern(s: &Space, h: &Hypothesis, x: &ConfigPoint) -> usize {
    let index = s.ek().index();
    let tuple: Vec<usize> = s
        .perms()
        .iter()
        .map(|tau| h.evaluate(s, &pullback(tau, index, x, index).unwrap()).unwrap())
        .collect();
    s.tuples().encode(&tuple)
}

/// The oracle for `VCN_k` on rank-at-most-1 classes: the supremum over
/// anchors `a` of the Natarajan dimension of `(y, z) ↦ H*_k(a, y, z)`.
fn naive_vcn(s: &Space, class: &HypothesisClass) -> Option<usize> {
    let u = s.universe();
    match s.k() {
        1 => {
            let tables: Vec<Vec<usize>> = class.members().iter().map(|h| h.table().to_vec()).collect();
            naive_natarajan(u.set_size(1), &tables)
        }
        2 => {
            let (n1, n2) = (u.set_size(1), u.set_size(2));
            (0..n1)
                .filter_map(|a| {
                    let fs: Vec<Vec<usize>> = class
                        .members()
                        .iter()
                        .map(|h| {
                            (0..n1 * n2)
                                .map(|p| oracle_pattern(s, h, &ConfigPoint::new(vec![a, p / n2, p % n2])))
                                .collect()
                        })
                        .collect();
                    naive_natarajan(n1 * n2, &fs)
                })
                .max()
        }
        _ => unreachable!("only k <= 2 is generated"),
    }
}

/// Instances of the dimension suite: k in {1, 2}, |X_1| <= 4, |X_2| <= 2,
/// |Λ| <= 3, |H| <= 16, rank <= 1.
fn dimension_instances() -> Vec<(Space, HypothesisClass)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..220)
        .map(|_| {
            let k = rng.random_range(1..=2);
            let x1 = rng.random_range(1..=4);
            let labels = rng.random_range(2..=3);
            let sizes = if k == 1 { vec![x1] } else { vec![x1, rng.random_range(1..=2)] };
            let s = space(k, &sizes, labels);
            let class = random_class(&s, rng.random_range(1..=16), rng.random(), 1);
            (s, class)
        })
        .collect()
}

#[test]
fn dimension_oracle_equivalence() {
    let start = Instant::now();
    let instances = dimension_instances();
    let mut mismatches = Vec::new();
    for (i, (s, class)) in instances.iter().enumerate() {
        let got = vcn_k(s, class).unwrap().dimension;
        let want = match naive_vcn(s, class) {
            Some(d) => Dimension::Finite(d),
            None => Dimension::NegInfinity,
        };
        if got != want {
            mismatches.push((i, got, want));
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed < Duration::from_secs(60);
    announce(
        1,
        "dimension oracle",
        ok,
        &format!("{} instances, {} mismatches, {:.1}s", instances.len(), mismatches.len(), elapsed.as_secs_f64()),
    );
    assert!(mismatches.is_empty(), "mismatches (instance, library, oracle): {mismatches:?}");
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
}

fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

#[test]
fn cover_bound_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cs = [ratio(1, 8), ratio(1, 4), ratio(3, 8)];
    let (mut trials, mut covers, mut violations, mut disagreements) = (0, 0, 0, 0);
    for n in 1..=10usize {
        for _ in 0..60 {
            trials += 1;
            let c = &cs[rng.random_range(0..3)];
            let radius = (to_f64(c) * n as f64).floor() as u32;
            let full = 1u64 << n;
            let density = [1.0, 0.5, 0.25, 0.125, 1.0 / 16.0][rng.random_range(0..5)];
            let mut collection: Vec<u64> = (0..full).filter(|_| rng.random_bool(density)).collect();
            if collection.is_empty() {
                collection.push(rng.random_range(0..full));
            }
            let is_cover = (0..full).all(|p| collection.iter().any(|&q| hamming(p, q) <= radius));
            let library = cover_bound_check(n, &collection, c, &Limits::default());
            match (is_cover, &library) {
                (true, Ok(r)) => {
                    covers += 1;
                    let rhs = (collection.len() as f64).log2() / (1.0 - h2(to_f64(c)));
                    if n as f64 > rhs + SLACK || r.verdict != Verdict::Verified {
                        violations += 1;
                    }
                }
                (false, Err(Error::NotACover { .. })) => {}
                _ => disagreements += 1,
            }
        }
    }
    let ok = violations == 0 && disagreements == 0 && trials >= 500;
    announce(
        2,
        "cover bound",
        ok,
        &format!("{trials} pairs, {covers} covers, {violations} violations, {disagreements} cover-check disagreements"),
    );
    assert_eq!(violations, 0);
    assert_eq!(disagreements, 0);
}

fn binomial_u128(n: u64, r: u64) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

#[test]
fn hamming_volume_step() {
    let (mut checks, mut violations, mut disagreements) = (0, 0, 0);
    for n in 1..=24u64 {
        for j in 1..32 {
            checks += 1;
            let c = ratio(j, 64);
            let r = (j as u64 * n) / 64;
            let volume: u128 = (0..=r).map(|i| binomial_u128(n, i)).sum();
            let holds = (volume as f64).log2() <= h2(j as f64 / 64.0) * n as f64 + SLACK;
            if !holds {
                violations += 1;
            }
            let lib = hamming_volume_check(n as usize, &c).unwrap();
            if lib.holds != holds || lib.volume != volume.into() {
                disagreements += 1;
            }
        }
    }
    let ok = violations == 0 && disagreements == 0;
    announce(3, "hamming volume", ok, &format!("{checks} (n, c) pairs, {violations} violations, {disagreements} disagreements"));
    assert_eq!(violations, 0);
    assert_eq!(disagreements, 0);
}

/// `L_{μ,F,ℓ}(H)` and `M(F, H)` by summing over every point of `E_k` with
/// patterns built from pullbacks along the permutations.
fn oracle_losses(s: &Space, mu: &ProbTemplate, loss: &Loss, f: &Hypothesis, h: &Hypothesis) -> (Rational, Rational) {
    let grid = s.ek();
    let index = grid.index();
    let (mut l, mut m) = (Rational::zero(), Rational::zero());
    for x in grid.points() {
        let w: Rational = (0..index.len()).map(|j| mu.weight(index.arity(j), x.values[j]).clone()).product();
        let (fy, hy) = (oracle_pattern(s, f, &x), oracle_pattern(s, h, &x));
        l += &w * loss.value(grid.encode(&x), hy, fy);
        if fy != hy {
            m += &w;
        }
    }
    (l, m)
}

fn random_separated_loss(s: &Space, rng: &mut ChaCha8Rng) -> Loss {
    let n = s.tuples().size();
    let matrix = (0..n)
        .map(|y| (0..n).map(|z| if y == z { Rational::zero() } else { ratio(rng.random_range(1..=4), 4) }).collect())
        .collect();
    Loss::constant(n, matrix, s.limits()).unwrap()
}

#[test]
fn almost_metric_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut instances, mut pairs, mut triples, mut violations, mut library_red) = (0, 0, 0, 0, 0);
    let mut oracle_mismatch = 0;
    while instances < 110 {
        let k = rng.random_range(1..=2);
        let sizes = if k == 1 { vec![rng.random_range(2..=4)] } else { vec![2, rng.random_range(1..=2)] };
        let s = space(k, &sizes, 2);
        let class = random_class(&s, rng.random_range(2..=5), rng.random(), rng.random_range(0..=k));
        let loss = random_separated_loss(&s, &mut rng);
        let mu = random_measure(&s, &mut rng);
        instances += 1;
        let (sl, norm) = (loss.s_ell().unwrap().clone(), loss.sup_norm().clone());
        let members = class.members();
        let lm = LossMatrix::for_class(&s, &mu, &loss, &class).unwrap();
        let mut l = vec![vec![Rational::zero(); members.len()]; members.len()];
        let mut m = l.clone();
        for (i, f) in members.iter().enumerate() {
            for (j, h) in members.iter().enumerate() {
                (l[i][j], m[i][j]) = oracle_losses(&s, &mu, &loss, f, h);
                if l[i][j] != lm.losses[i][j] || m[i][j] != lm.disagreement[i][j] {
                    oracle_mismatch += 1;
                }
                pairs += 1;
                if &sl * &m[i][j] > l[i][j] || l[i][j] > &norm * &m[i][j] {
                    violations += 1;
                }
            }
        }
        let factor = &norm / &sl;
        for i in 0..members.len() {
            for j in 0..members.len() {
                for h in 0..members.len() {
                    triples += 1;
                    if l[i][j] > &factor * (&l[i][h] + &l[j][h]) {
                        violations += 1;
                    }
                }
            }
        }
        if check_almost_metric(&s, &mu, &loss, &class).unwrap().is_violated() {
            library_red += 1;
        }
    }
    let ok = violations == 0 && library_red == 0 && oracle_mismatch == 0;
    announce(
        4,
        "almost metric",
        ok,
        &format!(
            "{instances} instances, {pairs} pairs, {triples} triples, {violations} violations, {library_red} library violations, {oracle_mismatch} loss mismatches"
        ),
    );
    assert_eq!(oracle_mismatch, 0);
    assert_eq!(violations, 0);
    assert_eq!(library_red, 0);
}

fn k_epsilons(k: usize) -> Vec<Rational> {
    let base = ratio(factorial(k) as i64, (k as i64).pow(k as u32));
    vec![&base / Rational::from_integer(4.into()), &base / Rational::from_integer(8.into())]
}

#[test]
fn hp_to_vcnk_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut instances, mut library_red, mut partite_red, mut oracle_violations, mut shattered) = (0, 0, 0, 0, 0);
    let mut slowest = Duration::ZERO;
    while instances < 100 {
        let k = rng.random_range(1..=2);
        let sizes = if k == 1 { vec![rng.random_range(1..=4)] } else { vec![rng.random_range(1..=3), rng.random_range(1..=2)] };
        let labels = rng.random_range(2..=3);
        let s = space(k, &sizes, labels);
        let class = random_class(&s, rng.random_range(1..=8), rng.random(), 1);
        let loss = Loss::zero_one(s.tuples().size());
        instances += 1;
        let start = Instant::now();
        let eps = k_epsilons(k);
        if audit_hp_to_vcnk(&s, &loss, &class, &eps).unwrap().is_violated() {
            library_red += 1;
        }
        let ps = partize_space(&s).unwrap();
        let pclass = partize_class(&s, &ps, &class).unwrap();
        let ploss = partize_loss(&s, &ps, &loss).unwrap();
        let peps = [ratio(1, 4), ratio(1, 8)];
        if audit_hp_to_vcnk_partite(&ps, &ploss, &pclass, &peps).unwrap().is_violated() {
            partite_red += 1;
        }
        // recheck the largest shattered set directly
        let vcn = vcn_k(&s, &class).unwrap();
        if let (Some(slice), Some(w)) = (&vcn.slice, &vcn.witness) {
            if !w.points.is_empty() {
                shattered += 1;
                let v: Vec<usize> = w.points.iter().map(|&p| slice.residual_points[p].values[0]).collect();
                let mu = adversarial_measure(s.universe(), &slice.anchor.values, &v).unwrap();
                let scale = to_f64(&ratio((k as i64).pow(k as u32), factorial(k) as i64));
                for e in &eps {
                    let n = optimal_cover_size(&s, &mu, &loss, &class, e).unwrap();
                    let rhs = (n as f64).log2() / (1.0 - h2(to_f64(e) * scale));
                    if v.len() as f64 > rhs + SLACK {
                        oracle_violations += 1;
                    }
                }
            }
        }
        slowest = slowest.max(start.elapsed());
    }
    let ok = library_red == 0 && partite_red == 0 && oracle_violations == 0 && slowest < Duration::from_secs(5);
    announce(
        5,
        "hp to vcn_k",
        ok,
        &format!(
            "{instances} instances, {shattered} rechecked, {library_red} violated, {partite_red} partite violated, {oracle_violations} recheck violations, slowest {:.2}s",
            slowest.as_secs_f64()
        ),
    );
    assert_eq!(library_red, 0);
    assert_eq!(partite_red, 0);
    assert_eq!(oracle_violations, 0);
    assert!(slowest < Duration::from_secs(5), "slowest instance took {slowest:?}");
}

/// Tiny learning problems: realizable by construction since targets are
/// class members.
fn pac_instances() -> Vec<(Space, HypothesisClass, Vec<ProbTemplate>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut out = Vec::new();
    let s = space(1, &[2], 2);
    let consts = HypothesisClass::dedup("constants", generators::constants(&s).unwrap());
    out.push((s.clone(), consts, vec![ProbTemplate::uniform(s.universe())]));
    while out.len() < 34 {
        let k = if out.len() % 4 == 3 { 2 } else { 1 };
        let sizes = if k == 1 { vec![rng.random_range(2..=3)] } else { vec![2, 1] };
        let s = space(k, &sizes, 2);
        let class = random_class(&s, rng.random_range(2..=4), rng.random(), 1);
        if class.len() < 2 {
            continue;
        }
        let measures = vec![ProbTemplate::uniform(s.universe()), random_measure(&s, &mut rng)];
        out.push((s, class, measures));
    }
    out
}

const PAC_M_CAP: usize = 6;

fn pac_options() -> PacAuditOptions {
    PacAuditOptions {
        delta_grid: default_delta_grid(),
        m_cap: PAC_M_CAP,
        replay: true,
    }
}

/// `P_{x∼μ^m}[L(ERM(x), F) > θ]` summed over every point of the full grid.
fn brute_failure(s: &Space, class: &HypothesisClass, loss: &Loss, mu: &ProbTemplate, f: &Hypothesis, theta: &Rational, m: usize) -> Rational {
    let plan = StarPlan::new(s, m).unwrap();
    let index = plan.index();
    let mut fail = Rational::zero();
    for x in plan.grid().points() {
        let w: Rational = (0..index.len()).map(|j| mu.weight(index.arity(j), x.values[j]).clone()).product();
        if w.is_zero() {
            continue;
        }
        let sample = Sample::new(s, &plan, f, x);
        let h = erm_learner(s, &sample, class, loss).unwrap();
        if &oracle_losses(s, mu, loss, f, h).0 > theta {
            fail += w;
        }
    }
    fail
}

#[test]
fn pac_to_hp_audit() {
    let eps = ratio(1, 4);
    let (mut checked, mut library_red, mut oracle_red, mut replays, mut replay_red, mut curve_mismatch) = (0, 0, 0, 0, 0, 0);
    for (idx, (s, class, measures)) in pac_instances().iter().enumerate() {
        let loss = Loss::zero_one(s.tuples().size());
        let r = audit_pac_to_hp(s, &loss, class, &eps, measures, &pac_options()).unwrap();
        if r.is_violated() {
            library_red += 1;
        }
        checked += usize::from(count(&r, "bound_checks") > 0);
        replays += count(&r, "replays");
        replay_red += count(&r, "at_most_one_violations") + count(&r, "integral_violations") + count(&r, "c_mass_violations");
        // independent recomputation of the bound for every measure
        let theta = pac_threshold(&loss, &eps).unwrap();
        for mu in measures {
            let single = std::slice::from_ref(mu);
            let mut curve = FailureCurve::new(s, class, &loss, &theta, single, class.members()).unwrap();
            let mut best: Option<BigInt> = None;
            for delta in default_delta_grid() {
                let Some(m) = curve.m_pac(&delta, PAC_M_CAP).unwrap() else { continue };
                let g = BigInt::from(gamma(s, class, m).unwrap().value);
                let b = (Rational::from_integer(g) / (Rational::from_integer(1.into()) - &delta)).floor().to_integer();
                best = Some(best.map_or(b.clone(), |x: BigInt| x.min(b)));
            }
            let n = greedy_centers(s, mu, &loss, class, &eps).unwrap().len();
            if best.is_some_and(|b| BigInt::from(n) > b) {
                oracle_red += 1;
            }
            // the failure curve against a full-grid sum, on the smaller instances
            if idx % 3 == 0 {
                for m in 0..=2 {
                    let lib = curve.at(m).unwrap()[0].clone();
                    for (i, f) in class.members().iter().enumerate() {
                        if brute_failure(s, class, &loss, mu, f, &theta, m) != lib[i] {
                            curve_mismatch += 1;
                        }
                    }
                }
            }
        }
    }
    let ok = checked >= 30 && library_red == 0 && oracle_red == 0 && replays >= 10 && replay_red == 0 && curve_mismatch == 0;
    announce(
        6,
        "pac to hp",
        ok,
        &format!(
            "{checked} instances with a bound, {library_red} violated, {oracle_red} recheck violations, {replays} replays, {replay_red} replay violations, {curve_mismatch} failure mismatches"
        ),
    );
    assert!(checked >= 30, "only {checked} instances had an m_PAC within the cap");
    assert!(replays >= 10, "only {replays} replays");
    assert_eq!(curve_mismatch, 0);
    assert_eq!(library_red, 0);
    assert_eq!(oracle_red, 0);
    assert_eq!(replay_red, 0);
}

/// The bound with `⌈γ/(1-δ)⌉ - 2` in place of `⌊γ/(1-δ)⌋`. Expected to fail:
/// the two constants at `m_PAC = 1`, `γ = 2` need two centers.
#[test]
fn pac_to_hp_published_formula() {
    let eps = ratio(1, 4);
    let (mut checked, mut violated) = (0, 0);
    for (s, class, measures) in pac_instances() {
        let loss = Loss::zero_one(s.tuples().size());
        let theta = pac_threshold(&loss, &eps).unwrap();
        for mu in &measures {
            let single = std::slice::from_ref(mu);
            let mut curve = FailureCurve::new(&s, &class, &loss, &theta, single, class.members()).unwrap();
            let mut best: Option<BigInt> = None;
            for delta in default_delta_grid() {
                let Some(m) = curve.m_pac(&delta, PAC_M_CAP).unwrap() else { continue };
                let b = published_formula(&BigInt::from(gamma(&s, &class, m).unwrap().value), &delta);
                best = Some(best.map_or(b.clone(), |x: BigInt| x.min(b)));
            }
            let Some(b) = best else { continue };
            checked += 1;
            if BigInt::from(greedy_centers(&s, mu, &loss, &class, &eps).unwrap().len()) > b {
                violated += 1;
            }
        }
    }
    announce(6, "pac to hp, published formula", violated == 0, &format!("{checked} bounds, {violated} exceeded"));
    assert_eq!(violated, 0, "greedy covers exceed ceil(gamma/(1-delta)) - 2");
}

#[test]
fn partization_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures: Vec<String> = Vec::new();
    for (k, sizes) in [(1, vec![2]), (1, vec![3]), (2, vec![2, 1]), (2, vec![2, 2])] {
        let s = space(k, &sizes, 2);
        let ps = partize_space(&s).unwrap();
        if !check_iota_inverse(&s, &ps).unwrap() {
            failures.push(format!("iota inverse k={k} {sizes:?}"));
        }
    }
    let s = space(2, &[2, 2], 2);
    let ps = partize_space(&s).unwrap();
    for m in [2, 4] {
        let mu = random_measure(&s, &mut rng);
        let check = check_phi_measure_preserving(&s, &ps, &mu, m).unwrap();
        if check.mismatches != 0 {
            failures.push(format!("phi_{m} pushforward: {} atom mismatches", check.mismatches));
        }
    }
    let mut diagrams = 0;
    for (k, sizes, ms) in [(1, vec![3], vec![1, 2]), (2, vec![2, 2], vec![2, 4])] {
        let s = space(k, &sizes, 2);
        let ps = partize_space(&s).unwrap();
        for f in generators::random(&s, 12, rng.random(), k).unwrap() {
            for &m in &ms {
                diagrams += 1;
                let bad = check_commuting_diagram(&s, &ps, &f, m).unwrap();
                if bad != 0 {
                    failures.push(format!("commuting diagram k={k} m={m}: {bad} points"));
                }
            }
        }
    }
    let mut classes = 0;
    for _ in 0..24 {
        let k = rng.random_range(1..=2);
        let sizes = if k == 1 { vec![rng.random_range(2..=3)] } else { vec![2, rng.random_range(1..=2)] };
        let s = space(k, &sizes, 2);
        let class = random_class(&s, rng.random_range(2..=6), rng.random(), rng.random_range(0..=k));
        let loss = if rng.random_bool(0.5) { Loss::zero_one(s.tuples().size()) } else { random_separated_loss(&s, &mut rng) };
        let mu = random_measure(&s, &mut rng);
        classes += 1;
        if check_kpart_loss_equality(&s, &mu, &loss, &class).unwrap().verdict != Verdict::Verified {
            failures.push(format!("kpart loss, class {classes}"));
        }
        // partite side against the full-grid oracle on the original side
        let ps = partize_space(&s).unwrap();
        let pclass = partize_class(&s, &ps, &class).unwrap();
        let pmu = partize_measure(&ps, &mu).unwrap();
        let ploss = partize_loss(&s, &ps, &loss).unwrap();
        let partite = partite_loss_matrix(&ps, &pmu, &ploss, pclass.members(), pclass.members());
        for (i, f) in class.members().iter().enumerate() {
            for (j, h) in class.members().iter().enumerate() {
                if oracle_losses(&s, &mu, &loss, f, h).0 != partite[i][j] {
                    failures.push(format!("kpart loss oracle, class {classes}, pair ({i}, {j})"));
                }
            }
        }
        let transfer = audit_hp_transfer(&s, &mu, &loss, &class, &[ratio(1, 2), ratio(1, 4), ratio(1, 8)]).unwrap();
        if transfer.verdict != Verdict::Verified || count(&transfer, "failures") != 0 {
            failures.push(format!("center transfer, class {classes}"));
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(120);
    announce(
        7,
        "partization",
        ok,
        &format!("{diagrams} diagrams, {classes} classes, {} failures, {:.1}s", failures.len(), elapsed.as_secs_f64()),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
}

/// `φ_4` for k = 2 and |X_1| = |X_2| = 2. Expected to fail: `E_4` has 1024
/// points and the partite target only 256, since `φ_m` drops the
/// within-block coordinates.
#[test]
fn partization_phi_bijective() {
    let s = space(2, &[2, 2], 2);
    let ps = partize_space(&s).unwrap();
    let check = check_phi_bijective(&s, &ps, 4).unwrap();
    announce(
        7,
        "partization, phi_4 bijective",
        check.bijective(),
        &format!(
            "{} source points, {} target points, injective {}, surjective {}",
            check.source_points, check.target_points, check.injective, check.surjective
        ),
    );
    assert!(check.bijective(), "{check:?}");
}

#[test]
fn gamma_growth_bound() {
    let (mut checks, mut violations, mut library_red) = (0, 0, 0);
    for (s, class) in dimension_instances() {
        let Some(d) = vcn_k(&s, &class).unwrap().dimension.finite().filter(|&d| d >= 1) else { continue };
        let k = s.k();
        let ms = [k, k + 1, k + 2];
        let labels = BigInt::from(s.n_labels());
        for &m in &ms {
            checks += 1;
            let g = BigInt::from(gamma(&s, &class, m).unwrap().value);
            let e = (d * m.pow(k as u32 - 1)) as u32;
            // γ ≤ (|Λ|²(m+1)/2)^e, cleared of the denominator
            let lhs = g * BigInt::from(2).pow(e);
            let rhs = (&labels * &labels * BigInt::from(m + 1)).pow(e);
            if lhs > rhs {
                violations += 1;
            }
        }
        if audit_gamma_growth(&s, &class, &ms).unwrap().is_violated() {
            library_red += 1;
        }
    }
    let ok = violations == 0 && library_red == 0;
    announce(8, "gamma growth", ok, &format!("{checks} (instance, m) pairs, {violations} violations, {library_red} library violations"));
    assert_eq!(violations, 0);
    assert_eq!(library_red, 0);
}

fn fixtures() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn cli_round_trip() {
    let bin = env!("CARGO_BIN_EXE_vcnk-lab");
    let runs: [&[&str]; 6] = [
        &["dim"],
        &["pack"],
        &["pac-estimate"],
        &["pac-estimate", "--mode", "monte-carlo", "--trials", "64", "--seed", "11"],
        &["audit", "--seed", "11"],
        &["partize"],
    ];
    let files = fixtures();
    let mut failures = Vec::new();
    for file in &files {
        for args in runs {
            let run = || Command::new(bin).args(args).arg(file).output().unwrap();
            let (a, b) = (run(), run());
            let what = format!("{} {}", args.join(" "), file.file_name().unwrap().to_string_lossy());
            if a.status.code() != Some(0) {
                failures.push(format!("{what}: exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr)));
            }
            if a.stdout != b.stdout || a.stdout.is_empty() {
                failures.push(format!("{what}: output differs between runs"));
            }
        }
    }
    let ok = failures.is_empty() && !files.is_empty();
    announce(9, "cli round trip", ok, &format!("{} fixtures, {} runs, {} failures", files.len(), files.len() * runs.len() * 2, failures.len()));
    assert!(!files.is_empty());
    assert!(failures.is_empty(), "{failures:#?}");
}
