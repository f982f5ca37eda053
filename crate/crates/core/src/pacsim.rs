//! The ERM learner, exact and Monte Carlo k-PAC sample complexity, the
//! packing bound it implies, and an exact replay of the counting argument
//! behind that bound.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{AuditReport, Quantity, Verdict};
use crate::error::{Error, Result};
use crate::hypotheses::{gamma, pattern_set, Hypothesis, HypothesisClass, Space, StarPlan};
use crate::losses::{Loss, LossMatrix};
use crate::packing::greedy_centers;
use crate::rational::{ceil_to_int, floor_to_int, format_rational, ratio, to_f64, Rational};
use crate::universe::{falling_factorial, sample_config, sample_config_seeded, support_atoms, ConfigPoint, Limits, ProbTemplate};

/// Width of the one-sided margin, in standard errors, that a Monte Carlo
/// failure rate must clear.
pub const MONTE_CARLO_Z: f64 = 2.0;

pub const DEFAULT_M_CAP: usize = 64;

/// `{1/8, 2/8, ..., 7/8}`.
pub fn default_delta_grid() -> Vec<Rational> {
    (1..8).map(|i| ratio(i, 8)).collect()
}

/// A learner input: a point of `E_m` and the pattern `F*_m(x)` it reveals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub m: usize,
    pub x: ConfigPoint,
    /// Labels indexed like the injections of `StarPlan::new(space, m)`.
    pub labels: Vec<usize>,
}

impl Sample {
    pub fn new(space: &Space, plan: &StarPlan, f: &Hypothesis, x: ConfigPoint) -> Self {
        let labels = plan.star(space, f, &x);
        Sample { m: plan.m(), x, labels }
    }
}

/// Empirical risk minimization over a class at a fixed sample size. Ties go
/// to the first member.
#[derive(Debug, Clone)]
pub struct Erm<'a> {
    space: &'a Space,
    plan: &'a StarPlan,
    class: &'a HypothesisClass,
    loss: &'a Loss,
    patterns: Vec<Vec<usize>>,
    /// `compose[a][t]` is the injection index of `α_a ∘ τ_t`.
    compose: Vec<Vec<usize>>,
}

impl<'a> Erm<'a> {
    pub fn new(space: &'a Space, plan: &'a StarPlan, class: &'a HypothesisClass, loss: &'a Loss) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let patterns = class.members().iter().map(|h| space.pattern_table(h)).collect();
        let compose = plan
            .injections()
            .iter()
            .map(|alpha| {
                space
                    .perms()
                    .iter()
                    .map(|tau| {
                        let composed: Vec<usize> = tau.iter().map(|&t| alpha[t]).collect();
                        plan.injection_index(&composed).expect("injections are closed under composition")
                    })
                    .collect()
            })
            .collect();
        Ok(Erm {
            space,
            plan,
            class,
            loss,
            patterns,
            compose,
        })
    }

    pub fn class(&self) -> &'a HypothesisClass {
        self.class
    }

    /// Codes in `E_k` of `α*(x)` for every injection `α`.
    pub fn pullbacks(&self, x: &ConfigPoint) -> Vec<usize> {
        (0..self.plan.injections().len())
            .map(|a| self.plan.pullback_code(self.space, a, x))
            .collect()
    }

    /// Code in `Λ^{S_k}` of `(y_{α∘τ})_τ` for every injection `α`.
    pub fn label_patterns(&self, labels: &[usize]) -> Vec<usize> {
        let strides = self.space.tuples().strides();
        self.compose
            .iter()
            .map(|row| row.iter().zip(strides).map(|(&b, s)| labels[b] * s).sum())
            .collect()
    }

    /// `Σ_α ℓ(α*(x), H*_k(α*(x)), (y_{α∘τ})_τ)` for member `j`.
    pub fn empirical_loss(&self, j: usize, pullbacks: &[usize], label_patterns: &[usize]) -> Rational {
        let table = &self.patterns[j];
        if self.loss.is_zero_one() {
            let misses = pullbacks.iter().zip(label_patterns).filter(|(&x, &y)| table[x] != y).count();
            return Rational::from_integer(BigInt::from(misses));
        }
        let mut total = Rational::zero();
        for (&x, &y) in pullbacks.iter().zip(label_patterns) {
            let v = self.loss.value(x, table[x], y);
            if !v.is_zero() {
                total += v;
            }
        }
        total
    }

    /// Index of the first member of least empirical loss.
    pub fn learn_at(&self, pullbacks: &[usize], labels: &[usize]) -> usize {
        let lp = self.label_patterns(labels);
        let mut best: Option<(usize, Rational)> = None;
        for j in 0..self.patterns.len() {
            let l = self.empirical_loss(j, pullbacks, &lp);
            let zero = l.is_zero();
            if best.as_ref().is_none_or(|(_, b)| &l < b) {
                best = Some((j, l));
            }
            if zero {
                break;
            }
        }
        best.map(|(j, _)| j).unwrap_or(0)
    }

    pub fn learn(&self, sample: &Sample) -> usize {
        self.learn_at(&self.pullbacks(&sample.x), &sample.labels)
    }
}

/// The member ERM returns on `sample`.
pub fn erm_learner<'c>(space: &Space, sample: &Sample, class: &'c HypothesisClass, loss: &Loss) -> Result<&'c Hypothesis> {
    let plan = StarPlan::new(space, sample.m)?;
    let erm = Erm::new(space, &plan, class, loss)?;
    Ok(&class.members()[erm.learn(sample)])
}

fn realizability_matrix(
    space: &Space,
    mu: &ProbTemplate,
    loss: &Loss,
    targets: &[Hypothesis],
    class: &HypothesisClass,
) -> Result<LossMatrix> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let lm = LossMatrix::new(space, mu, loss, targets, class.members())?;
    if let Some(target) = lm.losses.iter().position(|row| !row.iter().any(Zero::is_zero)) {
        return Err(Error::NotRealizable { target });
    }
    Ok(lm)
}

/// Draws `x ~ μ^m`, runs ERM on `(x, F*_m(x))` and returns the exact total
/// loss of its output.
pub fn pac_trial(
    space: &Space,
    mu: &ProbTemplate,
    f: &Hypothesis,
    class: &HypothesisClass,
    loss: &Loss,
    m: usize,
    seed: u64,
) -> Result<Rational> {
    let lm = realizability_matrix(space, mu, loss, core::slice::from_ref(f), class)?;
    let plan = StarPlan::new(space, m)?;
    let erm = Erm::new(space, &plan, class, loss)?;
    let x = sample_config_seeded(plan.grid(), mu, seed);
    let sample = Sample::new(space, &plan, f, x);
    Ok(lm.losses[0][erm.learn(&sample)].clone())
}

fn max_rank<'a>(hs: impl IntoIterator<Item = &'a Hypothesis>) -> usize {
    hs.into_iter().map(Hypothesis::rank).max().unwrap_or(0)
}

/// `P_{x∼μ^m}[L_{μ,F,ℓ}(ERM(x, F*_m(x))) > eps]` for every target, by
/// enumerating the support atoms of `μ^m`.
pub fn exact_failure(
    space: &Space,
    class: &HypothesisClass,
    loss: &Loss,
    mu: &ProbTemplate,
    targets: &[Hypothesis],
    eps: &Rational,
    m: usize,
) -> Result<Vec<Rational>> {
    let lm = realizability_matrix(space, mu, loss, targets, class)?;
    failure_with_matrix(space, class, loss, mu, targets, &lm.losses, eps, m)
}

#[allow(clippy::too_many_arguments)]
fn failure_with_matrix(
    space: &Space,
    class: &HypothesisClass,
    loss: &Loss,
    mu: &ProbTemplate,
    targets: &[Hypothesis],
    losses: &[Vec<Rational>],
    eps: &Rational,
    m: usize,
) -> Result<Vec<Rational>> {
    let plan = StarPlan::new(space, m)?;
    let erm = Erm::new(space, &plan, class, loss)?;
    let arity = loss.relevant_arity(space.k(), max_rank(class.members().iter().chain(targets)));
    let atoms = support_atoms(plan.grid(), mu, arity, space.limits())?;
    let work = (atoms.len() as u128)
        .saturating_mul(targets.len() as u128)
        .saturating_mul(class.len() as u128)
        .saturating_mul(plan.injections().len().max(1) as u128);
    space.limits().guard("exact failure enumeration", work)?;
    let mut fail = vec![Rational::zero(); targets.len()];
    for (x, w) in &atoms {
        let pb = erm.pullbacks(x);
        for (i, f) in targets.iter().enumerate() {
            let labels: Vec<usize> = pb.iter().map(|&c| f.table()[c]).collect();
            if &losses[i][erm.learn_at(&pb, &labels)] > eps {
                fail[i] += w;
            }
        }
    }
    Ok(fail)
}

/// Worst-case exact failure probabilities over measures and targets, as a
/// function of the sample size, evaluated lazily.
#[derive(Debug, Clone)]
pub struct FailureCurve<'a> {
    space: &'a Space,
    class: &'a HypothesisClass,
    loss: &'a Loss,
    eps: Rational,
    measures: &'a [ProbTemplate],
    targets: &'a [Hypothesis],
    matrices: Vec<Vec<Vec<Rational>>>,
    values: BTreeMap<usize, Vec<Vec<Rational>>>,
}

impl<'a> FailureCurve<'a> {
    /// Fails with `NotRealizable` unless every target is realizable under
    /// every measure.
    pub fn new(
        space: &'a Space,
        class: &'a HypothesisClass,
        loss: &'a Loss,
        eps: &Rational,
        measures: &'a [ProbTemplate],
        targets: &'a [Hypothesis],
    ) -> Result<Self> {
        let matrices = measures
            .iter()
            .map(|mu| Ok(realizability_matrix(space, mu, loss, targets, class)?.losses))
            .collect::<Result<Vec<_>>>()?;
        Ok(FailureCurve {
            space,
            class,
            loss,
            eps: eps.clone(),
            measures,
            targets,
            matrices,
            values: BTreeMap::new(),
        })
    }

    /// `at(m)[p][i]`: failure probability for measure `p` and target `i`.
    pub fn at(&mut self, m: usize) -> Result<&[Vec<Rational>]> {
        if !self.values.contains_key(&m) {
            let rows = self
                .measures
                .iter()
                .zip(&self.matrices)
                .map(|(mu, lm)| failure_with_matrix(self.space, self.class, self.loss, mu, self.targets, lm, &self.eps, m))
                .collect::<Result<Vec<_>>>()?;
            self.values.insert(m, rows);
        }
        Ok(&self.values[&m])
    }

    pub fn worst(&mut self, m: usize) -> Result<Rational> {
        Ok(self
            .at(m)?
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero))
    }

    /// Least `m <= cap` with worst failure at most `delta` at both `m` and
    /// `m + 1`, scanning upward from 0.
    pub fn m_pac(&mut self, delta: &Rational, cap: usize) -> Result<Option<usize>> {
        let mut previous_ok = None;
        for m in 0..=cap + 1 {
            let ok = &self.worst(m)? <= delta;
            if ok && previous_ok == Some(true) {
                return Ok(Some(m - 1));
            }
            previous_ok = Some(ok);
        }
        Ok(None)
    }

    /// Every evaluated point as `(m, worst failure)`.
    pub fn evaluated(&self) -> Vec<(usize, Rational)> {
        self.values
            .iter()
            .map(|(&m, rows)| (m, rows.iter().flatten().max().cloned().unwrap_or_else(Rational::zero)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PacMode {
    /// Failure probabilities by enumeration of all atoms of `μ^m`.
    Exact,
    /// Failure rates over seeded runs per (measure, target) pair.
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacEstimate {
    pub epsilon: Rational,
    pub delta: Rational,
    pub m_hat: usize,
    /// Runs per (measure, target) pair; 0 in exact mode.
    pub trials: u64,
    /// Worst failure rate at `m_hat`; an exact probability in exact mode.
    pub observed_failure_rate: Rational,
    pub confidence_note: String,
    pub exact: bool,
    /// Every evaluated `(m, worst failure rate)`, ascending in `m`.
    pub curve: Vec<(usize, Rational)>,
}

/// `z · sqrt(δ(1-δ)/trials)`.
pub fn monte_carlo_margin(delta: &Rational, trials: u64) -> f64 {
    let d = to_f64(delta);
    MONTE_CARLO_Z * libm::sqrt(d * (1.0 - d) / trials.max(1) as f64)
}

struct MonteCarlo<'a> {
    space: &'a Space,
    class: &'a HypothesisClass,
    loss: &'a Loss,
    eps: &'a Rational,
    measures: &'a [ProbTemplate],
    targets: &'a [Hypothesis],
    matrices: Vec<Vec<Vec<Rational>>>,
    trials: u64,
    seed: u64,
    values: BTreeMap<usize, Rational>,
}

impl MonteCarlo<'_> {
    fn worst(&mut self, m: usize) -> Result<Rational> {
        if let Some(v) = self.values.get(&m) {
            return Ok(v.clone());
        }
        let plan = StarPlan::new(self.space, m)?;
        let erm = Erm::new(self.space, &plan, self.class, self.loss)?;
        let mut worst = 0u64;
        for (p, (mu, lm)) in self.measures.iter().zip(&self.matrices).enumerate() {
            for (i, f) in self.targets.iter().enumerate() {
                let case = (p * self.targets.len() + i) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream((m as u64) << 32 | case);
                let mut failures = 0u64;
                for _ in 0..self.trials {
                    let x = sample_config(plan.grid(), mu, &mut rng);
                    let pb = erm.pullbacks(&x);
                    let labels: Vec<usize> = pb.iter().map(|&c| f.table()[c]).collect();
                    if &lm[i][erm.learn_at(&pb, &labels)] > self.eps {
                        failures += 1;
                    }
                }
                worst = worst.max(failures);
            }
        }
        let rate = Rational::new(BigInt::from(worst), BigInt::from(self.trials.max(1)));
        self.values.insert(m, rate.clone());
        Ok(rate)
    }
}

/// Smallest sample size at which ERM is `(eps, delta)`-accurate for every
/// given measure and target, at that size and the next.
///
/// Exact mode scans upward from 0. Monte Carlo mode doubles then bisects and
/// accepts a size when the worst observed rate is at most `delta` minus the
/// margin of [`monte_carlo_margin`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_m_pac(
    space: &Space,
    class: &HypothesisClass,
    loss: &Loss,
    eps: &Rational,
    delta: &Rational,
    measures: &[ProbTemplate],
    targets: &[Hypothesis],
    mode: &PacMode,
    m_cap: usize,
) -> Result<PacEstimate> {
    match mode {
        PacMode::Exact => {
            let mut curve = FailureCurve::new(space, class, loss, eps, measures, targets)?;
            let m_hat = curve.m_pac(delta, m_cap)?.ok_or(Error::BudgetExhausted { cap: m_cap })?;
            Ok(PacEstimate {
                epsilon: eps.clone(),
                delta: delta.clone(),
                m_hat,
                trials: 0,
                observed_failure_rate: curve.worst(m_hat)?,
                confidence_note: "exact failure probabilities over all support atoms of mu^m; criterion holds at m and m+1"
                    .into(),
                exact: true,
                curve: curve.evaluated(),
            })
        }
        PacMode::MonteCarlo { trials, seed } => {
            let matrices = measures
                .iter()
                .map(|mu| Ok(realizability_matrix(space, mu, loss, targets, class)?.losses))
                .collect::<Result<Vec<_>>>()?;
            let mut mc = MonteCarlo {
                space,
                class,
                loss,
                eps,
                measures,
                targets,
                matrices,
                trials: *trials,
                seed: *seed,
                values: BTreeMap::new(),
            };
            let margin = monte_carlo_margin(delta, *trials);
            let threshold = to_f64(delta) - margin;
            let ok = |mc: &mut MonteCarlo, m: usize| -> Result<bool> {
                Ok(to_f64(&mc.worst(m)?) <= threshold && to_f64(&mc.worst(m + 1)?) <= threshold)
            };
            let mut lo: Option<usize> = None;
            let mut hi = 0usize;
            loop {
                if ok(&mut mc, hi)? {
                    break;
                }
                if hi >= m_cap {
                    return Err(Error::BudgetExhausted { cap: m_cap });
                }
                lo = Some(hi);
                hi = if hi == 0 { 1 } else { (hi * 2).min(m_cap) };
            }
            if let Some(mut lo) = lo {
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if ok(&mut mc, mid)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            let rate = mc.worst(hi)?;
            Ok(PacEstimate {
                epsilon: eps.clone(),
                delta: delta.clone(),
                m_hat: hi,
                trials: *trials,
                observed_failure_rate: rate,
                confidence_note: format!(
                    "statistical evidence: {trials} seeded runs per (measure, target); accepted when the worst rate is at most delta - {margin:.6} at m and m+1"
                ),
                exact: false,
                curve: mc.values.into_iter().collect(),
            })
        }
    }
}

/// How many label positions a pattern at sample size `m` has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternShape {
    /// `(m)_k` injections.
    Injective,
    /// `m^k` partite tuples.
    Partite,
}

/// `⌈γ/(1-δ)⌉ - 2`.
pub fn published_formula(gamma: &BigInt, delta: &Rational) -> BigInt {
    ceil_to_int(&(Rational::from_integer(gamma.clone()) / (Rational::one() - delta))) - 2
}

/// `⌊γ/(1-δ)⌋`, what the counting argument yields.
pub fn corrected_formula(gamma: &BigInt, delta: &Rational) -> BigInt {
    floor_to_int(&(Rational::from_integer(gamma.clone()) / (Rational::one() - delta)))
}

/// `|Λ|^{(m)_k}` or `|Λ|^{m^k}`.
pub fn trivial_gamma(n_labels: usize, k: usize, m: usize, shape: PatternShape, limits: &Limits) -> Result<BigInt> {
    let exponent = match shape {
        PatternShape::Injective => falling_factorial(m, k),
        PatternShape::Partite => (m as u128).saturating_pow(k as u32),
    };
    limits.guard("trivial pattern bound exponent", exponent)?;
    Ok(Pow::pow(BigInt::from(n_labels), exponent as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhpRow {
    pub delta: Rational,
    pub m_tilde: Option<usize>,
    pub gamma: Option<usize>,
    pub published: Option<BigInt>,
    pub corrected: Option<BigInt>,
    pub trivial: Option<BigInt>,
}

/// The packing bound minimized over a grid of `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MhpBound {
    pub rows: Vec<MhpRow>,
    /// `min_δ ⌈γ(m̃)/(1-δ)⌉ - 2`.
    pub published: Option<BigInt>,
    pub published_delta: Option<Rational>,
    /// The published value raised to at least 1, usable as a cover budget.
    pub published_floored: Option<BigInt>,
    /// Set when the published value was below 1.
    pub floored: bool,
    /// `min_δ ⌊γ(m̃)/(1-δ)⌋`.
    pub corrected: Option<BigInt>,
    pub corrected_delta: Option<Rational>,
    /// `min_δ ⌈|Λ|^{(m̃)_k}/(1-δ)⌉ - 2` (or `m̃^k` for partite patterns).
    pub trivial: Option<BigInt>,
}

fn arg_min(rows: &[MhpRow], pick: impl Fn(&MhpRow) -> Option<&BigInt>) -> Option<(&BigInt, &Rational)> {
    let mut best: Option<(&BigInt, &Rational)> = None;
    for row in rows {
        if let Some(v) = pick(row) {
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, &row.delta));
            }
        }
    }
    best
}

/// Evaluates the bound at every `(δ, m̃(δ))`; `None` marks a `δ` without a
/// known sample size and is skipped in the minima.
pub fn compute_mhp_bound(
    m_pac: &[(Rational, Option<usize>)],
    mut gamma_at: impl FnMut(usize) -> Result<usize>,
    n_labels: usize,
    k: usize,
    shape: PatternShape,
    limits: &Limits,
) -> Result<MhpBound> {
    let mut rows = Vec::with_capacity(m_pac.len());
    for (delta, m_tilde) in m_pac {
        if delta <= &Rational::zero() || delta >= &Rational::one() {
            return Err(Error::DomainError(format!("delta = {}", format_rational(delta))));
        }
        let mut row = MhpRow {
            delta: delta.clone(),
            m_tilde: *m_tilde,
            gamma: None,
            published: None,
            corrected: None,
            trivial: None,
        };
        if let Some(m) = *m_tilde {
            let g = gamma_at(m)?;
            let gb = BigInt::from(g);
            row.gamma = Some(g);
            row.published = Some(published_formula(&gb, delta));
            row.corrected = Some(corrected_formula(&gb, delta));
            row.trivial = Some(published_formula(&trivial_gamma(n_labels, k, m, shape, limits)?, delta));
        }
        rows.push(row);
    }
    let published = arg_min(&rows, |r| r.published.as_ref()).map(|(v, d)| (v.clone(), d.clone()));
    let corrected = arg_min(&rows, |r| r.corrected.as_ref()).map(|(v, d)| (v.clone(), d.clone()));
    let trivial = arg_min(&rows, |r| r.trivial.as_ref()).map(|(v, _)| v.clone());
    let floored = published.as_ref().is_some_and(|(v, _)| v < &BigInt::one());
    Ok(MhpBound {
        published_floored: published.as_ref().map(|(v, _)| v.clone().max(BigInt::one())),
        published_delta: published.as_ref().map(|(_, d)| d.clone()),
        published: published.map(|(v, _)| v),
        floored,
        corrected_delta: corrected.as_ref().map(|(_, d)| d.clone()),
        corrected: corrected.map(|(v, _)| v),
        trivial,
        rows,
    })
}

/// [`compute_mhp_bound`] with the exact `γ_H` of a class.
pub fn mhp_bound_for_class(space: &Space, class: &HypothesisClass, m_pac: &[(Rational, Option<usize>)]) -> Result<MhpBound> {
    let mut cache: BTreeMap<usize, usize> = BTreeMap::new();
    compute_mhp_bound(
        m_pac,
        |m| {
            if let Some(&g) = cache.get(&m) {
                return Ok(g);
            }
            let g = gamma(space, class, m)?.value;
            cache.insert(m, g);
            Ok(g)
        },
        space.n_labels(),
        space.k(),
        PatternShape::Injective,
        space.limits(),
    )
}

/// Exact tallies of the counting argument for one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingReplay {
    pub m_tilde: usize,
    pub delta: Rational,
    pub threshold: Rational,
    /// Size of the separated family `F_1, ..., F_{m+1}`.
    pub family_size: usize,
    pub atoms: usize,
    pub max_patterns: usize,
    /// `(x, y)` pairs where more than one `F_i` is within the threshold of `A(x, y)`.
    pub at_most_one_violations: usize,
    /// Atoms with `G(x) < m + 1 - |Y(x)|`.
    pub g_lower_bound_violations: usize,
    /// `μ(C_i)` for each member of the family.
    pub c_masses: Vec<Rational>,
    pub integral: Rational,
    /// `(m+1)δ`.
    pub integral_bound: Rational,
}

impl CountingReplay {
    pub fn c_mass_violations(&self) -> usize {
        self.c_masses.iter().filter(|c| *c > &self.delta).count()
    }

    pub fn integral_holds(&self) -> bool {
        self.integral <= self.integral_bound
    }

    pub fn holds(&self) -> bool {
        self.at_most_one_violations == 0
            && self.g_lower_bound_violations == 0
            && self.c_mass_violations() == 0
            && self.integral_holds()
    }
}

/// Enumerates `Y(x)`, the sets `C_i` and `G(x)` over all atoms of `μ^{m̃}`
/// for the family given by `family` (member indices).
#[allow(clippy::too_many_arguments)]
pub fn replay_counting(
    space: &Space,
    class: &HypothesisClass,
    loss: &Loss,
    mu: &ProbTemplate,
    family: &[usize],
    threshold: &Rational,
    m_tilde: usize,
    delta: &Rational,
) -> Result<CountingReplay> {
    let fs: Vec<Hypothesis> = family.iter().map(|&i| class.members()[i].clone()).collect();
    let lm = LossMatrix::new(space, mu, loss, &fs, class.members())?;
    let plan = StarPlan::new(space, m_tilde)?;
    let erm = Erm::new(space, &plan, class, loss)?;
    let arity = loss.relevant_arity(space.k(), class.rank());
    let atoms = support_atoms(plan.grid(), mu, arity, space.limits())?;
    let work = (atoms.len() as u128)
        .saturating_mul(class.len() as u128)
        .saturating_mul(class.len() as u128)
        .saturating_mul(plan.injections().len().max(1) as u128);
    space.limits().guard("counting replay", work)?;
    let n = fs.len();
    let mut replay = CountingReplay {
        m_tilde,
        delta: delta.clone(),
        threshold: threshold.clone(),
        family_size: n,
        atoms: atoms.len(),
        max_patterns: 0,
        at_most_one_violations: 0,
        g_lower_bound_violations: 0,
        c_masses: vec![Rational::zero(); n],
        integral: Rational::zero(),
        integral_bound: Rational::from_integer(BigInt::from(n)) * delta,
    };
    for (x, w) in &atoms {
        let pb = erm.pullbacks(x);
        let ys: BTreeSet<Vec<usize>> = pattern_set(space, &plan, class, x);
        replay.max_patterns = replay.max_patterns.max(ys.len());
        let mut in_c = vec![true; n];
        for y in &ys {
            let out = erm.learn_at(&pb, y);
            let mut close = 0;
            for (i, row) in lm.losses.iter().enumerate() {
                if &row[out] <= threshold {
                    close += 1;
                    in_c[i] = false;
                }
            }
            if close > 1 {
                replay.at_most_one_violations += 1;
            }
        }
        let g = in_c.iter().filter(|&&b| b).count();
        if g + ys.len() < n {
            replay.g_lower_bound_violations += 1;
        }
        for (i, &b) in in_c.iter().enumerate() {
            if b {
                replay.c_masses[i] += w;
            }
        }
        replay.integral += w * Rational::from_integer(BigInt::from(g));
    }
    Ok(replay)
}

/// The threshold the learner must meet: `ε/2` for metric losses and
/// `s(ℓ)ε/(2‖ℓ‖∞)` for separated ones; `None` when neither applies.
pub fn pac_threshold(loss: &Loss, eps: &Rational) -> Option<Rational> {
    if loss.metric() {
        Some(eps / Rational::from_integer(BigInt::from(2)))
    } else if loss.separated() {
        let s = loss.s_ell()?;
        Some(s * eps / (Rational::from_integer(BigInt::from(2)) * loss.sup_norm()))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacAuditOptions {
    pub delta_grid: Vec<Rational>,
    pub m_cap: usize,
    pub replay: bool,
}

impl Default for PacAuditOptions {
    fn default() -> Self {
        PacAuditOptions {
            delta_grid: default_delta_grid(),
            m_cap: DEFAULT_M_CAP,
            replay: true,
        }
    }
}

fn is_guard(e: &Error) -> bool {
    matches!(e, Error::ExplosionGuard { .. })
}

/// For each measure: the greedy cover at `eps` against the packing bound
/// computed from exact `m^PAC` of ERM, plus the exact counting replay at the
/// minimizing `δ`.
///
/// The verdict uses `⌊γ/(1-δ)⌋`. Comparisons against `⌈γ/(1-δ)⌉ - 2` are
/// reported as `published_bound_violations` without entering the verdict.
pub fn audit_pac_to_hp(
    space: &Space,
    loss: &Loss,
    class: &HypothesisClass,
    eps: &Rational,
    measures: &[ProbTemplate],
    options: &PacAuditOptions,
) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "pac-to-hp",
        "greedy cover at eps <= min_delta floor(gamma(m~)/(1-delta)), m~ = exact m_PAC(theta, delta) of ERM; \
         replay: at most one i per (x, y), G(x) >= N - |Y(x)|, mu(C_i) <= delta, E[G] <= N delta",
    );
    report.quantity("epsilon", Quantity::Exact(eps.clone()));
    let Some(theta) = pac_threshold(loss, eps) else {
        report.note("loss is neither metric nor separated with two or more values; nothing to check");
        return Ok(report);
    };
    report.quantity("threshold", Quantity::Exact(theta.clone()));
    if class.is_empty() {
        report.note("empty class");
        return Ok(report);
    }
    let mut tally = [0usize; 9];
    let [measures_checked, bound_checks, violations, published_violations, floored, replays, at_most_one, g_lower, integral] =
        &mut tally;
    let mut c_mass = 0usize;
    let mut max_cover = 0usize;
    for (p, mu) in measures.iter().enumerate() {
        *measures_checked += 1;
        let single = core::slice::from_ref(mu);
        let mut curve = FailureCurve::new(space, class, loss, &theta, single, class.members())?;
        let mut rows = Vec::with_capacity(options.delta_grid.len());
        for delta in &options.delta_grid {
            let m = match curve.m_pac(delta, options.m_cap) {
                Ok(m) => m,
                Err(e) if is_guard(&e) => {
                    report.note(format!("measure {p}, delta {}: {e}", format_rational(delta)));
                    None
                }
                Err(e) => return Err(e),
            };
            rows.push((delta.clone(), m));
        }
        let bound = mhp_bound_for_class(space, class, &rows)?;
        let cover = greedy_centers(space, mu, loss, class, eps)?;
        max_cover = max_cover.max(cover.len());
        let Some(corrected) = &bound.corrected else {
            report.note(format!("measure {p}: no delta in the grid has a sample size within the cap"));
            continue;
        };
        *bound_checks += 1;
        let n = BigInt::from(cover.len());
        let delta_star = bound.corrected_delta.clone().expect("set with the corrected value");
        let m_star = bound
            .rows
            .iter()
            .find(|r| r.delta == delta_star)
            .and_then(|r| r.m_tilde)
            .expect("the minimizing row has a sample size");
        let summary = format!(
            "measure {p}: cover {} at eps {}, corrected bound {corrected} at delta {} (m~ = {m_star}), published {}",
            cover.len(),
            format_rational(eps),
            format_rational(&delta_star),
            bound.published.as_ref().map(ToString::to_string).unwrap_or_default(),
        );
        if &n > corrected {
            *violations += 1;
            report.record(Verdict::Violated);
            report.witness(format!("{summary}; centers {:?}", cover.centers));
        } else {
            report.record(Verdict::Verified);
            report.witness(summary);
        }
        if bound.floored {
            *floored += 1;
        }
        if bound.published.as_ref().is_some_and(|b| &n > b) {
            *published_violations += 1;
        }
        if options.replay {
            match replay_counting(space, class, loss, mu, &cover.centers, &theta, m_star, &delta_star) {
                Ok(r) => {
                    *replays += 1;
                    *at_most_one += r.at_most_one_violations;
                    *g_lower += r.g_lower_bound_violations;
                    c_mass += r.c_mass_violations();
                    if !r.integral_holds() {
                        *integral += 1;
                    }
                    if !r.holds() {
                        report.record(Verdict::Violated);
                        report.witness(format!(
                            "measure {p}: replay at m~ = {m_star}, delta {} fails (E[G] = {}, bound {})",
                            format_rational(&delta_star),
                            format_rational(&r.integral),
                            format_rational(&r.integral_bound)
                        ));
                    }
                }
                Err(e) if is_guard(&e) => {
                    report.note(format!("measure {p}: replay skipped, {e}"));
                }
                Err(e) => return Err(e),
            }
        }
    }
    let int = |v: usize| Quantity::Integer(BigInt::from(v));
    report
        .quantity("measures_checked", int(*measures_checked))
        .quantity("bound_checks", int(*bound_checks))
        .quantity("violations", int(*violations))
        .quantity("max_cover_size", int(max_cover))
        .quantity("published_bound_violations", int(*published_violations))
        .quantity("floored_cases", int(*floored))
        .quantity("replays", int(*replays))
        .quantity("at_most_one_violations", int(*at_most_one))
        .quantity("g_lower_bound_violations", int(*g_lower))
        .quantity("c_mass_violations", int(c_mass))
        .quantity("integral_violations", int(*integral));
    if *published_violations > 0 {
        report.note(format!(
            "{published_violations} measure(s) need more centers than ceil(gamma/(1-delta)) - 2; the counting argument only gives floor(gamma/(1-delta))"
        ));
    }
    if *floored > 0 {
        report.note("the published value was below 1 for some measure and is floored at 1 as a budget");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::generators;
    use crate::losses::total_loss;
    use crate::rational::integer;
    use crate::universe::Universe;

    fn space(k: usize, sizes: &[usize], labels: usize) -> Space {
        Space::new(Universe::with_sizes(k, sizes, labels).unwrap(), Limits::default()).unwrap()
    }

    fn constants(s: &Space) -> HypothesisClass {
        HypothesisClass::new("constants", generators::constants(s).unwrap()).unwrap()
    }

    #[test]
    fn erm_picks_the_agreeing_constant() {
        let s = space(1, &[3], 2);
        let class = constants(&s);
        let plan = StarPlan::new(&s, 4).unwrap();
        let x = ConfigPoint::new(vec![0, 1, 2, 1]);
        let sample = Sample::new(&s, &plan, &class.members()[1], x);
        assert_eq!(sample.labels, vec![1; 4]);
        let h = erm_learner(&s, &sample, &class, &Loss::zero_one(2)).unwrap();
        assert_eq!(h, &class.members()[1]);
    }

    #[test]
    fn erm_without_injections_returns_first_member() {
        let s = space(2, &[2, 2], 2);
        let class = constants(&s);
        let sample = Sample {
            m: 1,
            x: ConfigPoint::new(vec![1]),
            labels: vec![],
        };
        let h = erm_learner(&s, &sample, &class, &Loss::zero_one(2)).unwrap();
        assert_eq!(h, &class.members()[0]);
    }

    #[test]
    fn erm_rejects_empty_class() {
        let s = space(1, &[2], 2);
        let class = HypothesisClass::new("empty", vec![]).unwrap();
        let sample = Sample {
            m: 0,
            x: ConfigPoint::new(vec![]),
            labels: vec![],
        };
        assert_eq!(erm_learner(&s, &sample, &class, &Loss::zero_one(2)), Err(Error::EmptyClass));
    }

    #[test]
    fn label_patterns_match_k_patterns() {
        let s = space(2, &[2, 3], 2);
        let hs = generators::random(&s, 5, 7, 2).unwrap();
        let class = HypothesisClass::dedup("random", hs);
        let plan = StarPlan::new(&s, 3).unwrap();
        let loss = Loss::zero_one(2);
        let erm = Erm::new(&s, &plan, &class, &loss).unwrap();
        for x in plan.grid().points().step_by(37) {
            for f in class.members() {
                let pb = erm.pullbacks(&x);
                let labels = plan.star(&s, f, &x);
                let lp = erm.label_patterns(&labels);
                let direct: Vec<usize> = pb.iter().map(|&c| s.k_pattern(f, c)).collect();
                assert_eq!(lp, direct);
            }
        }
    }

    #[test]
    fn singleton_trial_loss_is_the_fixed_total_loss() {
        let s = space(1, &[3], 2);
        let f = Hypothesis::constant(&s, 0).unwrap();
        let class = HypothesisClass::new("one", vec![f.clone()]).unwrap();
        let mu = ProbTemplate::uniform(s.universe());
        let loss = Loss::zero_one(2);
        for seed in 0..5 {
            let l = pac_trial(&s, &mu, &f, &class, &loss, 3, seed).unwrap();
            assert_eq!(l, total_loss(&s, &mu, &f, &loss, &class.members()[0]).unwrap());
        }
    }

    #[test]
    fn trial_requires_realizability() {
        let s = space(1, &[2], 2);
        let class = HypothesisClass::new("zero", vec![Hypothesis::constant(&s, 0).unwrap()]).unwrap();
        let f = Hypothesis::constant(&s, 1).unwrap();
        let mu = ProbTemplate::uniform(s.universe());
        let err = pac_trial(&s, &mu, &f, &class, &Loss::zero_one(2), 2, 0);
        assert_eq!(err, Err(Error::NotRealizable { target: 0 }));
    }

    #[test]
    fn trials_are_deterministic() {
        let s = space(1, &[4], 3);
        let class = HypothesisClass::new("ind", generators::indicators(&s).unwrap()).unwrap();
        let mu = ProbTemplate::uniform(s.universe());
        let loss = Loss::zero_one(3);
        let f = &class.members()[2];
        let a = pac_trial(&s, &mu, f, &class, &loss, 2, 99).unwrap();
        let b = pac_trial(&s, &mu, f, &class, &loss, 2, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_class_needs_no_sample() {
        let s = space(1, &[3], 2);
        let class = HypothesisClass::new("one", vec![Hypothesis::constant(&s, 1).unwrap()]).unwrap();
        let mu = [ProbTemplate::uniform(s.universe())];
        let loss = Loss::zero_one(2);
        for mode in [PacMode::Exact, PacMode::MonteCarlo { trials: 200, seed: 1 }] {
            let est = estimate_m_pac(&s, &class, &loss, &ratio(1, 4), &ratio(1, 4), &mu, class.members(), &mode, 8).unwrap();
            assert_eq!(est.m_hat, 0);
        }
    }

    #[test]
    fn constants_exact_failure_curve() {
        // ERM on {0,1} constants only fails when no label is revealed.
        let s = space(1, &[3], 2);
        let class = constants(&s);
        let mu = [ProbTemplate::uniform(s.universe())];
        let loss = Loss::zero_one(2);
        let mut curve = FailureCurve::new(&s, &class, &loss, &ratio(1, 4), &mu, class.members()).unwrap();
        assert_eq!(curve.worst(0).unwrap(), integer(1));
        assert_eq!(curve.worst(1).unwrap(), integer(0));
        assert_eq!(curve.m_pac(&ratio(1, 4), 8).unwrap(), Some(1));
    }

    #[test]
    fn published_formula_arithmetic() {
        assert_eq!(published_formula(&BigInt::from(4), &ratio(1, 2)), BigInt::from(6));
        assert_eq!(corrected_formula(&BigInt::from(4), &ratio(1, 2)), BigInt::from(8));
        // with one pattern the value is <= 0 exactly when delta <= 1/2
        for i in 1..8 {
            let v = published_formula(&BigInt::one(), &ratio(i, 8));
            assert_eq!(v <= BigInt::zero(), i <= 4, "delta = {i}/8");
        }
    }

    #[test]
    fn trivial_bound_uses_falling_factorial() {
        let g = trivial_gamma(3, 2, 3, PatternShape::Injective, &Limits::default()).unwrap();
        assert_eq!(g, BigInt::from(3i64.pow(6)));
        let g = trivial_gamma(3, 2, 3, PatternShape::Partite, &Limits::default()).unwrap();
        assert_eq!(g, BigInt::from(3i64.pow(9)));
    }

    #[test]
    fn singleton_bound_is_floored() {
        let s = space(1, &[3], 2);
        let class = HypothesisClass::new("one", vec![Hypothesis::constant(&s, 1).unwrap()]).unwrap();
        let rows: Vec<_> = default_delta_grid().into_iter().map(|d| (d, Some(0))).collect();
        let b = mhp_bound_for_class(&s, &class, &rows).unwrap();
        assert!(b.floored);
        assert_eq!(b.published_floored, Some(BigInt::one()));
        assert_eq!(b.corrected, Some(BigInt::one()));
    }

    #[test]
    fn constants_audit_replays_cleanly() {
        let s = space(1, &[3], 2);
        let class = constants(&s);
        let mu = [ProbTemplate::uniform(s.universe())];
        let report =
            audit_pac_to_hp(&s, &Loss::zero_one(2), &class, &ratio(1, 2), &mu, &PacAuditOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Verified);
        assert_eq!(report.get("max_cover_size"), Some(&Quantity::Integer(BigInt::from(2))));
        assert_eq!(report.get("replays"), Some(&Quantity::Integer(BigInt::one())));
        assert_eq!(report.get("at_most_one_violations"), Some(&Quantity::Integer(BigInt::zero())));
    }
}
