//! Haussler centers (greedy and exact), packings, the binary-entropy bound
//! on covers of `2^{[n]}`, and the audit that shattered sets force large
//! covers under an adversarial measure.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::audit::{AuditReport, Quantity, Verdict};
use crate::dimensions::{shattered_sets, slices, Slice};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisClass, Space};
use crate::losses::{Loss, LossMatrix};
use crate::partization::{partite_loss_matrix, PartiteClass, PartiteSpace};
use crate::rational::{floor_to_int, format_rational, ratio, to_f64, Rational};
use crate::universe::{factorial, Limits, PartiteProbTemplate, ProbTemplate, Universe};

/// Slack granted to floating-point right-hand sides.
pub const FLOAT_SLACK: f64 = 1e-9;

/// `h_2(t) = t log2(1/t) + (1-t) log2(1/(1-t))`, with `h_2(0) = h_2(1) = 0`.
pub fn binary_entropy(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::DomainError(format!("binary entropy needs 0 <= t <= 1, got {t}")));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * libm::log2(p) };
    Ok(term(t) + term(1.0 - t))
}

pub fn binary_entropy_rational(t: &Rational) -> Result<f64> {
    if t < &Rational::zero() || t > &Rational::one() {
        return Err(Error::DomainError(format!("binary entropy needs 0 <= t <= 1, got {t}")));
    }
    binary_entropy(to_f64(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMethod {
    Greedy,
    Optimal,
    /// Departized from centers of the partite class.
    Transferred,
}

/// Member indices that cover the class at precision `epsilon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterSet {
    pub centers: Vec<usize>,
    pub epsilon: Rational,
    pub method: CoverMethod,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Every target `i` has a center `c` with `losses[i][c] <= eps`.
pub fn verify_cover(losses: &[Vec<Rational>], centers: &[usize], eps: &Rational) -> bool {
    losses.iter().all(|row| centers.iter().any(|&c| &row[c] <= eps))
}

/// Adds the first uncovered member until every member is covered.
pub fn greedy_from_matrix(losses: &[Vec<Rational>], eps: &Rational) -> Result<Vec<usize>> {
    let mut centers: Vec<usize> = Vec::new();
    for (i, row) in losses.iter().enumerate() {
        if !centers.iter().any(|&c| &row[c] <= eps) {
            centers.push(i);
        }
    }
    if !verify_cover(losses, &centers, eps) {
        return Err(Error::Precondition(format!(
            "some member is not within {} of itself, so no cover by members exists",
            format_rational(eps)
        )));
    }
    Ok(centers)
}

fn coverage_masks(losses: &[Vec<Rational>], eps: &Rational) -> Vec<u64> {
    let n = losses.len();
    (0..n)
        .map(|c| (0..n).filter(|&i| &losses[i][c] <= eps).fold(0u64, |m, i| m | 1 << i))
        .collect()
}

fn search_cover(masks: &[u64], full: u64, covered: u64, budget: usize, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if budget == 0 {
        return false;
    }
    let first = (!covered & full).trailing_zeros() as u64;
    // a cheap bound: each further center adds at most the largest mask
    let remaining = (!covered & full).count_ones();
    let best_gain = masks.iter().map(|m| (m & !covered).count_ones()).max().unwrap_or(0);
    if best_gain as usize * budget < remaining as usize {
        return false;
    }
    for (c, &m) in masks.iter().enumerate() {
        if m >> first & 1 == 1 {
            chosen.push(c);
            if search_cover(masks, full, covered | m, budget - 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// A minimum cover: sizes are tried in increasing order and each search
/// branches on the centers covering the first uncovered member.
pub fn optimal_from_matrix(losses: &[Vec<Rational>], eps: &Rational, limits: &Limits) -> Result<Vec<usize>> {
    let n = losses.len();
    if n > limits.cover_cap || n > 63 {
        return Err(Error::ExplosionGuard {
            what: "exact cover".into(),
            size: n as u128,
            cap: limits.cover_cap as u128,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let masks = coverage_masks(losses, eps);
    let full = (1u64 << n) - 1;
    if masks.iter().fold(0, |a, m| a | m) != full {
        return Err(Error::Precondition("some member cannot be covered by any member".into()));
    }
    for size in 1..=n {
        let mut chosen = Vec::new();
        if search_cover(&masks, full, 0, size, &mut chosen) {
            return Ok(chosen);
        }
    }
    unreachable!("the whole class is a cover")
}

/// A maximal set whose members are pairwise more than `eps` apart in both
/// directions, built greedily in member order.
pub fn packing_from_matrix(losses: &[Vec<Rational>], eps: &Rational) -> Vec<usize> {
    let mut packing: Vec<usize> = Vec::new();
    for (i, row) in losses.iter().enumerate() {
        if packing.iter().all(|&j| &row[j] > eps && &losses[j][i] > eps) {
            packing.push(i);
        }
    }
    packing
}

pub fn greedy_centers(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass, eps: &Rational) -> Result<CenterSet> {
    let lm = LossMatrix::for_class(space, mu, loss, class)?;
    Ok(CenterSet {
        centers: greedy_from_matrix(&lm.losses, eps)?,
        epsilon: eps.clone(),
        method: CoverMethod::Greedy,
    })
}

pub fn optimal_centers(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass, eps: &Rational) -> Result<CenterSet> {
    let lm = LossMatrix::for_class(space, mu, loss, class)?;
    Ok(CenterSet {
        centers: optimal_from_matrix(&lm.losses, eps, space.limits())?,
        epsilon: eps.clone(),
        method: CoverMethod::Optimal,
    })
}

pub fn optimal_cover_size(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass, eps: &Rational) -> Result<usize> {
    Ok(optimal_centers(space, mu, loss, class, eps)?.len())
}

pub fn packing_lower_bound(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass, eps: &Rational) -> Result<usize> {
    let lm = LossMatrix::for_class(space, mu, loss, class)?;
    Ok(packing_from_matrix(&lm.losses, eps).len())
}

/// `Σ_{i ≤ r} C(n, i)`.
pub fn hamming_volume(n: usize, r: usize) -> BigUint {
    let mut total = BigUint::zero();
    let mut binom = BigUint::one();
    for i in 0..=r.min(n) {
        total += &binom;
        binom = binom * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    total
}

fn radius(c: &Rational, n: usize) -> usize {
    floor_to_int(&(c * Rational::from_integer(BigInt::from(n))))
        .to_usize()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HammingCheck {
    pub volume: BigUint,
    pub log2_volume: f64,
    pub entropy_exponent: f64,
    pub holds: bool,
}

/// `Σ_{i ≤ ⌊cn⌋} C(n, i) ≤ 2^{h_2(c) n}`, compared in log scale.
pub fn hamming_volume_check(n: usize, c: &Rational) -> Result<HammingCheck> {
    let h = binary_entropy_rational(c)?;
    let volume = hamming_volume(n, radius(c, n));
    let log2_volume = libm::log2(volume.to_f64().unwrap_or(f64::INFINITY));
    let entropy_exponent = h * n as f64;
    Ok(HammingCheck {
        holds: log2_volume <= entropy_exponent + FLOAT_SLACK,
        volume,
        log2_volume,
        entropy_exponent,
    })
}

/// Checks that `collection` covers `2^{[n]}` within radius `cn` and then
/// `n ≤ log2|C| / (1 - h_2(c))`, plus the Hamming volume step.
pub fn cover_bound_check(n: usize, collection: &[u64], c: &Rational, limits: &Limits) -> Result<AuditReport> {
    if c <= &Rational::zero() || c >= &ratio(1, 2) {
        return Err(Error::DomainError(format!("c must lie in (0, 1/2), got {}", format_rational(c))));
    }
    if n > 20 {
        return Err(Error::ExplosionGuard {
            what: "cover radius check".into(),
            size: n as u128,
            cap: 20,
        });
    }
    limits.guard("cover radius check", (1u128 << n).saturating_mul(collection.len() as u128))?;
    let r = radius(c, n) as u32;
    for s in 0u64..1 << n {
        if !collection.iter().any(|&u| (s ^ u).count_ones() <= r) {
            return Err(Error::NotACover { witness: s });
        }
    }
    let mut report = AuditReport::new("coverbound", "n <= log2|C| / (1 - h2(c))");
    let h = binary_entropy_rational(c)?;
    let rhs = libm::log2(collection.len() as f64) / (1.0 - h);
    let holds = (n as f64) <= rhs + FLOAT_SLACK;
    let ham = hamming_volume_check(n, c)?;
    report
        .quantity("n", Quantity::Integer(n.into()))
        .quantity("collection_size", Quantity::Integer(collection.len().into()))
        .quantity("c", Quantity::Exact(c.clone()))
        .quantity("rhs", Quantity::Float { value: rhs, tolerance: FLOAT_SLACK })
        .quantity("hamming_volume", Quantity::Integer(ham.volume.clone().into()))
        .quantity(
            "hamming_exponent",
            Quantity::Float {
                value: ham.entropy_exponent,
                tolerance: FLOAT_SLACK,
            },
        );
    if !holds {
        report.witness(format!("n={n} exceeds {rhs}"));
    }
    if !ham.holds {
        report.witness(format!("Hamming ball of radius {r} has {} points", ham.volume));
    }
    report.verdict = if holds && ham.holds { Verdict::Verified } else { Verdict::Violated };
    Ok(report)
}

/// `μ_1 = (1/k)(ν_V + Σ_j δ_{x_j})` with `ν_V` uniform on `v`; higher
/// arities are uniform.
pub fn adversarial_measure(universe: &Universe, anchor: &[usize], v: &[usize]) -> Result<ProbTemplate> {
    let k = universe.k();
    if v.is_empty() {
        return Err(Error::Precondition("the shattered set must be non-empty".into()));
    }
    if anchor.len() + 1 != k {
        return Err(Error::Precondition(format!("expected {} anchor points, got {}", k - 1, anchor.len())));
    }
    let n1 = universe.set_size(1);
    let mut w1 = vec![Rational::zero(); n1];
    let share = ratio(1, (k * v.len()) as i64);
    for &e in v {
        w1[e] += &share;
    }
    for &x in anchor {
        w1[x] += ratio(1, k as i64);
    }
    let mut per = vec![w1];
    for a in 2..=k {
        let s = universe.set_size(a);
        per.push(vec![ratio(1, s as i64); s]);
    }
    ProbTemplate::new(universe, per)
}

/// One shattered set inside one slice, located by grid coordinates.
struct ShatteredCase<'a> {
    slice: &'a Slice,
    points: Vec<usize>,
    f1: Vec<usize>,
    selectors: Vec<usize>,
}

/// Checks done for one shattered set at one precision.
struct CaseOutcome {
    bound_holds: bool,
    lff_violations: u64,
    lff_pairs: u64,
    cover_size: usize,
    rhs: f64,
    u_h_cover: bool,
}

/// Shared tail of both audits: `losses` is the class loss matrix under the
/// adversarial measure, `t` the rescaled precision, `slope` the constant in
/// `L(F_U, F_U') ≥ slope·|U Δ U'|` and `values[h][p]` the value of member
/// `h` at shattered point `p`.
fn check_case(
    case: &ShatteredCase<'_>,
    losses: &[Vec<Rational>],
    eps: &Rational,
    t: &Rational,
    slope: &Rational,
    values: &[Vec<usize>],
    limits: &Limits,
) -> Result<CaseOutcome> {
    let n = case.points.len();
    let mut lff_violations = 0;
    let mut lff_pairs = 0;
    for u in 0..case.selectors.len() {
        for up in 0..case.selectors.len() {
            lff_pairs += 1;
            let d = ((u ^ up) as u64).count_ones() as i64;
            if losses[case.selectors[u]][case.selectors[up]] < slope * Rational::from_integer(d.into()) {
                lff_violations += 1;
            }
        }
    }
    let centers = optimal_from_matrix(losses, eps, limits)?;
    let h = binary_entropy_rational(t)?;
    let rhs = libm::log2(centers.len() as f64) / (1.0 - h);
    // U_H = {v ∈ V | H_x(v) = f_1(v)} must cover 2^V within radius t·n
    let collection: Vec<u64> = centers
        .iter()
        .map(|&c| {
            (0..n)
                .filter(|&i| values[c][i] == case.f1[i])
                .fold(0u64, |m, i| m | 1 << i)
        })
        .collect();
    let r = radius(t, n) as u32;
    let u_h_cover = n <= 20 && (0u64..1 << n).all(|s| collection.iter().any(|&u| (s ^ u).count_ones() <= r));
    Ok(CaseOutcome {
        bound_holds: (n as f64) <= rhs + FLOAT_SLACK,
        lff_violations,
        lff_pairs,
        cover_size: centers.len(),
        rhs,
        u_h_cover,
    })
}

#[derive(Default)]
struct Tally {
    cases: u64,
    violations: u64,
    lff_pairs: u64,
    lff_violations: u64,
    u_h_failures: u64,
    max_n: usize,
    witnesses: Vec<String>,
    skipped_eps: Vec<String>,
}

impl Tally {
    fn absorb(&mut self, out: &CaseOutcome, n: usize, describe: impl FnOnce() -> String) {
        self.cases += 1;
        self.max_n = self.max_n.max(n);
        self.lff_pairs += out.lff_pairs;
        self.lff_violations += out.lff_violations;
        if !out.u_h_cover {
            self.u_h_failures += 1;
        }
        if !out.bound_holds || out.lff_violations > 0 {
            self.violations += 1;
            if self.witnesses.len() < 8 {
                self.witnesses.push(format!(
                    "{}: n={n}, N={}, rhs={}, lower-bound violations={}",
                    describe(),
                    out.cover_size,
                    out.rhs,
                    out.lff_violations
                ));
            }
        }
    }

    fn finish(self, report: &mut AuditReport) {
        report
            .quantity("cases_checked", Quantity::Integer(self.cases.into()))
            .quantity("max_shattered_size", Quantity::Integer(self.max_n.into()))
            .quantity("violations", Quantity::Integer(self.violations.into()))
            .quantity("loss_lower_bound_pairs", Quantity::Integer(self.lff_pairs.into()))
            .quantity("loss_lower_bound_violations", Quantity::Integer(self.lff_violations.into()))
            .quantity("u_h_cover_failures", Quantity::Integer(self.u_h_failures.into()));
        for w in self.witnesses {
            report.witness(w);
        }
        for e in self.skipped_eps {
            report.note(format!("epsilon {e} skipped: outside the admissible range"));
        }
        if self.u_h_failures > 0 {
            report.note("some collections {U_H} fail to cover 2^V within the rescaled radius");
        }
        report.verdict = if self.violations > 0 || self.u_h_failures > 0 {
            Verdict::Violated
        } else if self.cases == 0 {
            Verdict::Vacuous
        } else {
            Verdict::Verified
        };
    }
}

/// Loss matrices under the adversarial measure, keyed by (anchor, shattered set).
type MatrixCache = BTreeMap<(Vec<usize>, Vec<usize>), Vec<Vec<Rational>>>;

fn position_in(positions: &[usize], target: usize) -> Option<usize> {
    positions.iter().position(|&p| p == target)
}

/// For every anchor `x` and every set `V` shattered by `H(x)`, builds the
/// adversarial measure, computes the exact minimum cover size `N` at each
/// precision and checks `|V| ≤ log2 N / (1 - h_2(ε k^k / (s(ℓ) k!)))`, along
/// with `L(F_U, F_U') ≥ s(ℓ) k! / (k^k n) · |U Δ U'|` for the selectors.
pub fn audit_hp_to_vcnk(space: &Space, loss: &Loss, class: &HypothesisClass, epsilons: &[Rational]) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "hp-to-vcnk",
        "|V| <= log2 N / (1 - h2(eps*k^k/(s(l)*k!))) for every V shattered by H(x), N = min cover under (1/k)(nu_V + sum_j delta_{x_j})",
    );
    let k = space.k();
    let Some(s) = loss.s_ell().cloned().filter(|_| loss.separated()) else {
        report.note("the loss is not separated (or has a single value), so the statement does not apply");
        return Ok(report);
    };
    if class.rank() > 1 {
        report.note("the class has rank above 1, so the statement does not apply");
        return Ok(report);
    }
    let kk = Rational::from_integer(BigInt::from(k).pow(k as u32));
    let kf = Rational::from_integer(BigInt::from(factorial(k)));
    let eps_cap = (&s * &kf / (Rational::from_integer(2.into()) * &kk)).min(Rational::one());
    let mut tally = Tally::default();
    let admissible: Vec<&Rational> = epsilons
        .iter()
        .filter(|e| {
            let ok = e > &&Rational::zero() && *e < &eps_cap;
            if !ok {
                tally.skipped_eps.push(format_rational(e));
            }
            ok
        })
        .collect();
    let ek = space.ek().index();
    let anchor_pos: Vec<usize> = (0..k - 1).map(|j| ek.position(1 << j).unwrap()).collect();
    let v_pos = ek.position(1 << (k - 1)).unwrap();
    let mut cache: MatrixCache = BTreeMap::new();
    for sl in slices(space, class)? {
        let anchor: Vec<usize> = anchor_pos
            .iter()
            .map(|&p| sl.anchor.values[position_in(&sl.anchor_positions, p).unwrap()])
            .collect();
        let vi = position_in(&sl.residual_positions, v_pos).unwrap();
        for w in shattered_sets(&sl.family, space.limits())? {
            let v: Vec<usize> = w.points.iter().map(|&p| sl.residual_points[p].values[vi]).collect();
            let n = v.len();
            let losses = match cache.get(&(anchor.clone(), v.clone())) {
                Some(l) => l.clone(),
                None => {
                    let mu = adversarial_measure(space.universe(), &anchor, &v)?;
                    let l = LossMatrix::for_class(space, &mu, loss, class)?.losses;
                    cache.insert((anchor.clone(), v.clone()), l.clone());
                    l
                }
            };
            let values: Vec<Vec<usize>> = class
                .members()
                .iter()
                .map(|h| w.points.iter().map(|&p| space.k_pattern(h, sl.codes[p])).collect())
                .collect();
            let case = ShatteredCase {
                slice: &sl,
                points: w.points.clone(),
                f1: w.f1.clone(),
                selectors: w.selectors.clone(),
            };
            let slope = &s * &kf / (&kk * Rational::from_integer(BigInt::from(n)));
            for eps in &admissible {
                let t = *eps * &kk / (&s * &kf);
                let out = check_case(&case, &losses, eps, &t, &slope, &values, space.limits())?;
                tally.absorb(&out, n, || {
                    format!("anchor {:?}, V {:?}, eps {}", case.slice.anchor.values, v, format_rational(eps))
                });
            }
        }
    }
    tally.finish(&mut report);
    Ok(report)
}

/// Partite variant: for every `A = [k] \ {a}`, anchor `x` and `V` shattered
/// by `H(x)`, the measure is a point mass at `x` on the anchor coordinates,
/// at element 0 on the remaining non-singleton coordinates and uniform on
/// the projection `V'` at `{a}`; the rescaled precision is `ε / s(ℓ)`.
pub fn audit_hp_to_vcnk_partite(
    pspace: &PartiteSpace,
    loss: &Loss,
    class: &PartiteClass,
    epsilons: &[Rational],
) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "hp-to-vcnk-partite",
        "|V| <= log2 N / (1 - h2(eps/s(l))) for every V shattered by H(x), N = min cover under the point-mass measure uniform on V'",
    );
    let Some(s) = loss.s_ell().cloned().filter(|_| loss.separated()) else {
        report.note("the loss is not separated (or has a single value), so the statement does not apply");
        return Ok(report);
    };
    let k = pspace.k();
    let e1 = pspace.e1();
    let grid = e1.grid();
    let coords = e1.index().coords();
    // rank ≤ 1: no member may read a coordinate with |dom f| ≥ 2
    let reads_high = coords.iter().enumerate().any(|(j, c)| {
        c.values.len() > 1
            && (0..grid.len()).any(|z| {
                let base = z - (z / grid.strides()[j] % grid.radices()[j]) * grid.strides()[j];
                class.members().iter().any(|h| h.table()[z] != h.table()[base])
            })
    });
    if reads_high {
        report.note("the class has rank above 1, so the statement does not apply");
        return Ok(report);
    }
    let eps_cap = (&s / Rational::from_integer(2.into())).min(Rational::one());
    let mut tally = Tally::default();
    let admissible: Vec<&Rational> = epsilons
        .iter()
        .filter(|e| {
            let ok = e > &&Rational::zero() && *e < &eps_cap;
            if !ok {
                tally.skipped_eps.push(format_rational(e));
            }
            ok
        })
        .collect();
    for a in (0..k).rev() {
        let subsets: Vec<u64> = coords.iter().map(|c| c.domain).collect();
        for sl in crate::dimensions::partite_slices(pspace, class, a)? {
            let singleton = position_in(&sl.residual_positions, subsets.iter().position(|&d| d == 1 << a).unwrap()).unwrap();
            for w in shattered_sets(&sl.family, pspace.limits())? {
                let v: Vec<usize> = w.points.iter().map(|&p| sl.residual_points[p].values[singleton]).collect();
                let n = v.len();
                let mut per: Vec<Vec<Rational>> = pspace
                    .universe()
                    .coordinate_sets()
                    .iter()
                    .map(|set| {
                        let mut w0 = vec![Rational::zero(); set.len()];
                        w0[0] = Rational::one();
                        w0
                    })
                    .collect();
                for (idx, &j) in sl.anchor_positions.iter().enumerate() {
                    let dp = coords[j].domain_pos;
                    per[dp] = vec![Rational::zero(); per[dp].len()];
                    per[dp][sl.anchor.values[idx]] = Rational::one();
                }
                let dp = coords[sl.residual_positions[singleton]].domain_pos;
                per[dp] = vec![Rational::zero(); per[dp].len()];
                for &e in &v {
                    per[dp][e] = ratio(1, n as i64);
                }
                let mu = PartiteProbTemplate::new(pspace.universe(), per)?;
                let losses = partite_loss_matrix(pspace, &mu, loss, class.members(), class.members());
                let values: Vec<Vec<usize>> = class
                    .members()
                    .iter()
                    .map(|h| w.points.iter().map(|&p| h.table()[sl.codes[p]]).collect())
                    .collect();
                let case = ShatteredCase {
                    slice: &sl,
                    points: w.points.clone(),
                    f1: w.f1.clone(),
                    selectors: w.selectors.clone(),
                };
                let slope = &s / Rational::from_integer(BigInt::from(n));
                for eps in &admissible {
                    let t = *eps / &s;
                    let out = check_case(&case, &losses, eps, &t, &slope, &values, pspace.limits())?;
                    tally.absorb(&out, n, || {
                        format!(
                            "excluded {a}, anchor {:?}, V' {:?}, eps {}",
                            case.slice.anchor.values,
                            v,
                            format_rational(eps)
                        )
                    });
                }
            }
        }
    }
    tally.finish(&mut report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::generators;
    use crate::rational::integer;

    fn space(k: usize, sizes: &[usize], labels: usize) -> Space {
        Space::new(Universe::with_sizes(k, sizes, labels).unwrap(), Limits::default()).unwrap()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.8112781244591328).abs() < 1e-12);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn covers_of_constants() {
        let s = space(1, &[3], 2);
        let class = HypothesisClass::new("c", generators::constants(&s).unwrap()).unwrap();
        let mu = ProbTemplate::uniform(s.universe());
        let l = Loss::zero_one(2);
        let half = ratio(1, 2);
        assert_eq!(greedy_centers(&s, &mu, &l, &class, &half).unwrap().len(), 2);
        assert_eq!(optimal_cover_size(&s, &mu, &l, &class, &half).unwrap(), 2);
        assert_eq!(packing_lower_bound(&s, &mu, &l, &class, &half).unwrap(), 2);
        assert_eq!(greedy_centers(&s, &mu, &l, &class, &integer(1)).unwrap().len(), 1);
        let empty = HypothesisClass::new("e", vec![]).unwrap();
        assert_eq!(greedy_centers(&s, &mu, &l, &empty, &half).unwrap().len(), 0);
    }

    #[test]
    fn cover_bound_examples() {
        let limits = Limits::default();
        let r = cover_bound_check(3, &[0, 0b111], &ratio(1, 3), &limits).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        assert!(matches!(
            cover_bound_check(4, &[0], &ratio(1, 4), &limits),
            Err(Error::NotACover { .. })
        ));
        let all: Vec<u64> = (0..16).collect();
        assert_eq!(cover_bound_check(4, &all, &ratio(1, 64), &limits).unwrap().verdict, Verdict::Verified);
    }

    #[test]
    fn adversarial_weights() {
        let u = Universe::with_sizes(2, &[3, 2], 2).unwrap();
        let mu = adversarial_measure(&u, &[2], &[0, 1]).unwrap();
        assert_eq!(mu.per_arity()[0], vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]);
        let u1 = Universe::with_sizes(1, &[3], 2).unwrap();
        let mu1 = adversarial_measure(&u1, &[], &[0, 2]).unwrap();
        assert_eq!(mu1.per_arity()[0], vec![ratio(1, 2), integer(0), ratio(1, 2)]);
    }

    #[test]
    fn hp_audit_all_functions() {
        let s = space(1, &[3], 2);
        let class = HypothesisClass::new("all", generators::all_functions(&s, 1).unwrap()).unwrap();
        let r = audit_hp_to_vcnk(&s, &Loss::zero_one(2), &class, &[ratio(1, 4)]).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        let empty = HypothesisClass::new("e", vec![]).unwrap();
        let r = audit_hp_to_vcnk(&s, &Loss::zero_one(2), &empty, &[ratio(1, 4)]).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
    }
}
