//! Finite index combinatorics: the subsets `r(V)`, configuration spaces
//! `E_V`, injections, pullbacks along injections and product measures.
//!
//! Configuration spaces only carry coordinates indexed by subsets of size at
//! most the arity `k`; a k-ary hypothesis never reads anything else.
//! Ground-set elements, labels and elements of `[m]` are all 0-based
//! internally. A [`Subset`] is a bitmask where bit `i` stands for element
//! `i` (so `{1, 2}` in one-based notation is `0b11`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{is_non_negative, to_f64, Rational};

pub type Subset = u64;

/// Caps on every exhaustive search in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of enumerated points in any grid or atom list.
    pub explosion_cap: u128,
    /// Maximum size of a set tested for Natarajan shattering.
    pub shatter_cap: usize,
    /// Maximum class size for exact (optimal) covers.
    pub cover_cap: usize,
    /// Maximum sample size scanned when estimating sample complexity.
    pub m_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            explosion_cap: 10_000_000,
            shatter_cap: 20,
            cover_cap: 24,
            m_cap: 64,
        }
    }
}

impl Limits {
    pub fn guard(&self, what: &str, size: u128) -> Result<()> {
        if size > self.explosion_cap {
            Err(Error::ExplosionGuard {
                what: what.to_string(),
                size,
                cap: self.explosion_cap,
            })
        } else {
            Ok(())
        }
    }
}

pub fn subset_len(s: Subset) -> usize {
    s.count_ones() as usize
}

/// Elements of `s` in increasing order.
pub fn subset_elements(s: Subset) -> Vec<usize> {
    (0..64).filter(|i| s >> i & 1 == 1).collect()
}

pub fn subset_from(elements: &[usize]) -> Subset {
    elements.iter().fold(0, |acc, &e| acc | 1 << e)
}

/// All `r`-element combinations of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still move
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - r + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..r {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// Non-empty subsets of `[n]` of size at most `cap`, ordered by size and then
/// lexicographically by their sorted elements.
pub fn enumerate_subsets(n: usize, cap: usize) -> Vec<Subset> {
    (1..=cap.min(n))
        .flat_map(|size| combinations(n, size))
        .map(|c| subset_from(&c))
        .collect()
}

/// Injections `[k] -> [m]` as image tuples, lexicographically ordered.
/// There are exactly `m (m-1) ... (m-k+1)` of them.
pub fn enumerate_injections(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(m: usize, k: usize, prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..m {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                extend(m, k, prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    extend(m, k, &mut Vec::with_capacity(k), &mut vec![false; m], &mut out);
    out
}

/// Falling factorial `(m)_k`.
pub fn falling_factorial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    (0..k).map(|i| (m - i) as u128).product()
}

pub fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// The canonical ordering of `r(V)` for `V = [base]`, restricted to subsets
/// of size at most `arity_cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    base: usize,
    arity_cap: usize,
    subsets: Vec<Subset>,
    lookup: BTreeMap<Subset, usize>,
}

impl IndexSet {
    pub fn new(base: usize, arity_cap: usize) -> Self {
        assert!(base <= 64, "index sets are limited to 64 base elements");
        let subsets = enumerate_subsets(base, arity_cap);
        let lookup = subsets.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        IndexSet {
            base,
            arity_cap,
            subsets,
            lookup,
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    pub fn subset(&self, position: usize) -> Subset {
        self.subsets[position]
    }

    pub fn arity(&self, position: usize) -> usize {
        subset_len(self.subsets[position])
    }

    pub fn position(&self, subset: Subset) -> Option<usize> {
        self.lookup.get(&subset).copied()
    }
}

/// A point of a configuration space: one element index per coordinate of the
/// owning index set, in canonical coordinate order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigPoint {
    pub values: Vec<usize>,
}

impl ConfigPoint {
    pub fn new(values: Vec<usize>) -> Self {
        ConfigPoint { values }
    }
}

fn check_injective(alpha: &[usize], codomain: usize) -> Result<()> {
    let mut seen = vec![false; codomain];
    for &a in alpha {
        if a >= codomain || seen[a] {
            return Err(Error::NonInjective);
        }
        seen[a] = true;
    }
    Ok(())
}

/// Precomputed coordinate map of `α*` for an injection `α: [u] -> [v]`:
/// coordinate `A` of the result reads coordinate `α(A)` of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackPlan {
    positions: Vec<usize>,
}

impl PullbackPlan {
    pub fn new(alpha: &[usize], source: &IndexSet, target: &IndexSet) -> Result<Self> {
        check_injective(alpha, source.base())?;
        if target.base() != alpha.len() {
            return Err(Error::Precondition(format!(
                "injection has domain size {} but target index set has base {}",
                alpha.len(),
                target.base()
            )));
        }
        let positions = target
            .subsets()
            .iter()
            .map(|&a| {
                let image = subset_elements(a).iter().fold(0u64, |acc, &i| acc | 1 << alpha[i]);
                source.position(image).ok_or_else(|| {
                    Error::Precondition(format!("image subset {image:#b} exceeds the source arity cap"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PullbackPlan { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn apply(&self, x: &ConfigPoint) -> ConfigPoint {
        ConfigPoint::new(self.positions.iter().map(|&p| x.values[p]).collect())
    }

    /// Code of `α*(x)` in a grid with the given strides, without building the point.
    pub fn apply_code(&self, x: &[usize], strides: &[usize]) -> usize {
        self.positions
            .iter()
            .zip(strides)
            .map(|(&p, &s)| x[p] * s)
            .sum()
    }
}

/// `α*(x)_A = x_{α(A)}` for an injection `α: [target.base()] -> [source.base()]`.
pub fn pullback(alpha: &[usize], source: &IndexSet, x: &ConfigPoint, target: &IndexSet) -> Result<ConfigPoint> {
    Ok(PullbackPlan::new(alpha, source, target)?.apply(x))
}

/// Ground sets `X_1..X_k` and the label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    k: usize,
    ground_sets: Vec<Vec<String>>,
    labels: Vec<String>,
}

fn check_distinct(names: &[String], what: &str) -> Result<()> {
    if names.is_empty() {
        return Err(Error::InvalidUniverse(format!("{what} is empty")));
    }
    let mut sorted: Vec<&String> = names.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidUniverse(format!("{what} repeats element {:?}", w[0])));
    }
    Ok(())
}

impl Universe {
    pub fn new(k: usize, ground_sets: Vec<Vec<String>>, labels: Vec<String>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidUniverse("arity k must be at least 1".into()));
        }
        if ground_sets.len() != k {
            return Err(Error::InvalidUniverse(format!(
                "expected {k} ground sets, got {}",
                ground_sets.len()
            )));
        }
        for (i, set) in ground_sets.iter().enumerate() {
            check_distinct(set, &format!("ground set X_{}", i + 1))?;
        }
        check_distinct(&labels, "label set")?;
        Ok(Universe { k, ground_sets, labels })
    }

    /// Universe with elements and labels named by their indices.
    pub fn with_sizes(k: usize, set_sizes: &[usize], n_labels: usize) -> Result<Self> {
        let names = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Universe::new(k, set_sizes.iter().map(|&n| names(n)).collect(), names(n_labels))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ground_sets(&self) -> &[Vec<String>] {
        &self.ground_sets
    }

    /// `|X_arity|`, `1 <= arity <= k`.
    pub fn set_size(&self, arity: usize) -> usize {
        self.ground_sets[arity - 1].len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn element_index(&self, arity: usize, name: &str) -> Option<usize> {
        self.ground_sets[arity - 1].iter().position(|e| e == name)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Mixed-radix numbering of a product of finite coordinate sets. The first
/// coordinate is the most significant, so codes follow lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    radices: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(radices: Vec<usize>, what: &str, limits: &Limits) -> Result<Self> {
        let mut size: u128 = 1;
        for &r in &radices {
            size = size.saturating_mul(r as u128);
        }
        limits.guard(what, size)?;
        let mut strides = vec![1usize; radices.len()];
        for j in (0..radices.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * radices[j + 1];
        }
        Ok(Grid {
            radices,
            strides,
            len: size as usize,
        })
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    pub fn decode(&self, mut code: usize) -> ConfigPoint {
        let mut values = vec![0; self.radices.len()];
        for j in (0..self.radices.len()).rev() {
            values[j] = code % self.radices[j];
            code /= self.radices[j];
        }
        ConfigPoint::new(values)
    }

    pub fn contains(&self, x: &ConfigPoint) -> bool {
        x.values.len() == self.radices.len() && x.values.iter().zip(&self.radices).all(|(v, r)| v < r)
    }

    pub fn points(&self) -> impl Iterator<Item = ConfigPoint> + '_ {
        (0..self.len).map(move |c| self.decode(c))
    }
}

/// `E_m` restricted to coordinates of arity at most `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigGrid {
    index: IndexSet,
    grid: Grid,
}

impl ConfigGrid {
    pub fn new(universe: &Universe, m: usize, limits: &Limits) -> Result<Self> {
        if m > 64 {
            return Err(Error::ExplosionGuard {
                what: "index set base".into(),
                size: m as u128,
                cap: 64,
            });
        }
        let index = IndexSet::new(m, universe.k());
        let radices = (0..index.len()).map(|j| universe.set_size(index.arity(j))).collect();
        let grid = Grid::new(radices, &format!("configuration space E_{m}"), limits)?;
        Ok(ConfigGrid { index, grid })
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn encode(&self, x: &ConfigPoint) -> usize {
        self.grid.encode(&x.values)
    }

    pub fn decode(&self, code: usize) -> ConfigPoint {
        self.grid.decode(code)
    }

    pub fn points(&self) -> impl Iterator<Item = ConfigPoint> + '_ {
        self.grid.points()
    }
}

fn check_distribution(weights: &[Rational], expected_len: usize, coordinate: usize) -> Result<()> {
    if weights.len() != expected_len {
        return Err(Error::InvalidMeasure(format!(
            "coordinate {coordinate} has {} weights for {expected_len} elements",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !is_non_negative(w)) {
        return Err(Error::InvalidMeasure(format!("negative weight {w} at coordinate {coordinate}")));
    }
    let sum: Rational = weights.iter().sum();
    if !sum.is_one() {
        return Err(Error::NotNormalized {
            coordinate,
            sum: crate::rational::format_rational(&sum),
        });
    }
    Ok(())
}

fn uniform_weights(n: usize) -> Vec<Rational> {
    vec![Rational::new(BigInt::one(), BigInt::from(n)); n]
}

fn point_mass_weights(n: usize, atom: usize) -> Vec<Rational> {
    (0..n)
        .map(|i| if i == atom { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Exact distributions `μ_1..μ_k`, one over each ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbTemplate {
    per_arity: Vec<Vec<Rational>>,
}

impl ProbTemplate {
    pub fn new(universe: &Universe, per_arity: Vec<Vec<Rational>>) -> Result<Self> {
        if per_arity.len() != universe.k() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} distributions, got {}",
                universe.k(),
                per_arity.len()
            )));
        }
        for (i, w) in per_arity.iter().enumerate() {
            check_distribution(w, universe.set_size(i + 1), i + 1)?;
        }
        Ok(ProbTemplate { per_arity })
    }

    pub fn uniform(universe: &Universe) -> Self {
        ProbTemplate {
            per_arity: (1..=universe.k()).map(|a| uniform_weights(universe.set_size(a))).collect(),
        }
    }

    /// Point mass at `atoms[i]` for arity `i + 1`.
    pub fn point_mass(universe: &Universe, atoms: &[usize]) -> Result<Self> {
        let per_arity = (1..=universe.k())
            .map(|a| point_mass_weights(universe.set_size(a), atoms.get(a - 1).copied().unwrap_or(0)))
            .collect();
        ProbTemplate::new(universe, per_arity)
    }

    pub fn per_arity(&self) -> &[Vec<Rational>] {
        &self.per_arity
    }

    pub fn weight(&self, arity: usize, element: usize) -> &Rational {
        &self.per_arity[arity - 1][element]
    }

    pub fn support(&self, arity: usize) -> Vec<usize> {
        self.per_arity[arity - 1]
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// `μ^V(x)`: the product of the per-coordinate weights of `x`.
pub fn product_weight(mu: &ProbTemplate, index: &IndexSet, x: &ConfigPoint) -> Rational {
    x.values
        .iter()
        .enumerate()
        .map(|(j, &v)| mu.weight(index.arity(j), v))
        .product()
}

/// All points of `grid` in canonical order, paired with their weights.
pub fn enumerate_configs<'a>(
    grid: &'a ConfigGrid,
    mu: &'a ProbTemplate,
) -> impl Iterator<Item = (ConfigPoint, Rational)> + 'a {
    grid.points().map(move |x| {
        let w = product_weight(mu, grid.index(), &x);
        (x, w)
    })
}

/// Cartesian product of weighted per-coordinate choices; each combination's
/// weight is the product of its choices' weights.
pub fn weighted_product(
    choices: &[Vec<(usize, Rational)>],
    what: &str,
    limits: &Limits,
) -> Result<Vec<(Vec<usize>, Rational)>> {
    let size = choices
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    limits.guard(what, size)?;
    let mut out: Vec<(Vec<usize>, Rational)> = vec![(Vec::with_capacity(choices.len()), Rational::one())];
    for coord in choices {
        let mut next = Vec::with_capacity(out.len() * coord.len());
        for (prefix, w) in &out {
            for (v, cw) in coord {
                let mut p = prefix.clone();
                p.push(*v);
                next.push((p, w * cw));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Atoms of `μ^m` restricted to the support of `μ`. Coordinates of arity
/// above `arity_limit` are pinned to their first support element and
/// contribute no factor, which is exact for any quantity that does not read
/// them.
pub fn support_atoms(
    grid: &ConfigGrid,
    mu: &ProbTemplate,
    arity_limit: usize,
    limits: &Limits,
) -> Result<Vec<(ConfigPoint, Rational)>> {
    let index = grid.index();
    let choices: Vec<Vec<(usize, Rational)>> = (0..index.len())
        .map(|j| {
            let arity = index.arity(j);
            let support = mu.support(arity);
            if arity > arity_limit {
                vec![(support[0], Rational::one())]
            } else {
                support.into_iter().map(|v| (v, mu.weight(arity, v).clone())).collect()
            }
        })
        .collect();
    Ok(weighted_product(&choices, "support atoms", limits)?
        .into_iter()
        .map(|(v, w)| (ConfigPoint::new(v), w))
        .collect())
}

/// Draws from an exact rational distribution. Uses exact integer arithmetic
/// when the common denominator fits in 64 bits.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    exact: Option<(Vec<u64>, u64)>,
    approx: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(weights: &[Rational]) -> Self {
        let lcm = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let exact = lcm.to_u64().and_then(|total| {
            let mut cum = Vec::with_capacity(weights.len());
            let mut running: u64 = 0;
            for w in weights {
                let scaled = (w * Rational::from_integer(lcm.clone())).to_integer();
                let (sign, _) = scaled.to_u64_digits();
                let scaled = if sign == Sign::Minus { return None } else { scaled.to_u64()? };
                running = running.checked_add(scaled)?;
                cum.push(running);
            }
            Some((cum, total))
        });
        let mut acc = 0.0;
        let approx = weights
            .iter()
            .map(|w| {
                acc += to_f64(w);
                acc
            })
            .collect();
        CategoricalSampler { exact, approx }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.exact {
            Some((cum, total)) => {
                let r = rng.random_range(0..*total);
                cum.iter().position(|&c| c > r).unwrap_or(cum.len() - 1)
            }
            None => {
                let r: f64 = rng.random::<f64>() * self.approx.last().copied().unwrap_or(1.0);
                self.approx.iter().position(|&c| c > r).unwrap_or(self.approx.len() - 1)
            }
        }
    }
}

/// Draws `x ~ μ^m` over the grid's coordinates, each independently from
/// `μ_{|A|}`.
pub fn sample_config<R: Rng + ?Sized>(grid: &ConfigGrid, mu: &ProbTemplate, rng: &mut R) -> ConfigPoint {
    let samplers: Vec<CategoricalSampler> = mu.per_arity().iter().map(|w| CategoricalSampler::new(w)).collect();
    let index = grid.index();
    ConfigPoint::new(
        (0..index.len())
            .map(|j| samplers[index.arity(j) - 1].sample(rng))
            .collect(),
    )
}

pub fn sample_config_seeded(grid: &ConfigGrid, mu: &ProbTemplate, seed: u64) -> ConfigPoint {
    sample_config(grid, mu, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A coordinate `f: A -> [m]` of a partite configuration space, with
/// `A ⊆ [k]` non-empty. `values[i]` is `f` at the `i`-th smallest element of `A`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartiteCoord {
    /// Position of `A` in the canonical order of `r(k)`; the derived ordering
    /// is therefore (domain size, domain lex, values lex).
    pub domain_pos: usize,
    pub domain: Subset,
    pub values: Vec<usize>,
}

/// Canonical ordering of `r_k(m) = { f: A -> [m] | A ∈ r(k) }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteIndexSet {
    k: usize,
    m: usize,
    domains: IndexSet,
    coords: Vec<PartiteCoord>,
    lookup: BTreeMap<PartiteCoord, usize>,
}

impl PartiteIndexSet {
    pub fn new(k: usize, m: usize) -> Self {
        let domains = IndexSet::new(k, k);
        let mut coords = Vec::new();
        for (domain_pos, &domain) in domains.subsets().iter().enumerate() {
            let size = subset_len(domain);
            let total = m.pow(size as u32);
            for code in 0..total {
                let mut values = vec![0; size];
                let mut c = code;
                for i in (0..size).rev() {
                    values[i] = c % m;
                    c /= m;
                }
                coords.push(PartiteCoord {
                    domain_pos,
                    domain,
                    values,
                });
            }
        }
        let lookup = coords.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        PartiteIndexSet {
            k,
            m,
            domains,
            coords,
            lookup,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domains(&self) -> &IndexSet {
        &self.domains
    }

    pub fn coords(&self) -> &[PartiteCoord] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, coord: &PartiteCoord) -> Option<usize> {
        self.lookup.get(coord).copied()
    }

    /// Coordinate map of `α*: E_m -> E_1` for `α ∈ [m]^k`: coordinate `1^A`
    /// of the result reads coordinate `α|_A` of the source.
    pub fn alpha_plan(&self, alpha: &[usize], e1: &PartiteIndexSet) -> Vec<usize> {
        e1.coords
            .iter()
            .map(|c| {
                let values = subset_elements(c.domain).iter().map(|&i| alpha[i]).collect();
                self.lookup[&PartiteCoord {
                    domain_pos: c.domain_pos,
                    domain: c.domain,
                    values,
                }]
            })
            .collect()
    }
}

/// A Borel k-partite template made finite: one set `X_A` per `A ∈ r(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteUniverse {
    k: usize,
    coordinate_sets: Vec<Vec<String>>,
    labels: Vec<String>,
}

impl PartiteUniverse {
    pub fn new(k: usize, coordinate_sets: Vec<Vec<String>>, labels: Vec<String>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidUniverse("arity k must be at least 1".into()));
        }
        let expected = (1usize << k) - 1;
        if coordinate_sets.len() != expected {
            return Err(Error::InvalidUniverse(format!(
                "expected {expected} coordinate sets, got {}",
                coordinate_sets.len()
            )));
        }
        for (i, set) in coordinate_sets.iter().enumerate() {
            check_distinct(set, &format!("coordinate set {i}"))?;
        }
        check_distinct(&labels, "label set")?;
        Ok(PartiteUniverse {
            k,
            coordinate_sets,
            labels,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sets `X_A` in the canonical order of `r(k)`.
    pub fn coordinate_sets(&self) -> &[Vec<String>] {
        &self.coordinate_sets
    }

    pub fn set_size(&self, domain_pos: usize) -> usize {
        self.coordinate_sets[domain_pos].len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }
}

/// Partite configuration space `E_m = ∏_{f ∈ r_k(m)} X_{dom(f)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteGrid {
    index: PartiteIndexSet,
    grid: Grid,
}

impl PartiteGrid {
    pub fn new(universe: &PartiteUniverse, m: usize, limits: &Limits) -> Result<Self> {
        let coords = ((m as u128) + 1).saturating_pow(universe.k() as u32);
        limits.guard("partite index set", coords)?;
        let index = PartiteIndexSet::new(universe.k(), m);
        let radices = index.coords().iter().map(|c| universe.set_size(c.domain_pos)).collect();
        let grid = Grid::new(radices, &format!("partite configuration space E_{m}"), limits)?;
        Ok(PartiteGrid { index, grid })
    }

    pub fn index(&self) -> &PartiteIndexSet {
        &self.index
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// One distribution `μ_A` per coordinate set of a partite universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteProbTemplate {
    per_coordinate: Vec<Vec<Rational>>,
}

impl PartiteProbTemplate {
    pub fn new(universe: &PartiteUniverse, per_coordinate: Vec<Vec<Rational>>) -> Result<Self> {
        if per_coordinate.len() != universe.coordinate_sets().len() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} distributions, got {}",
                universe.coordinate_sets().len(),
                per_coordinate.len()
            )));
        }
        for (i, w) in per_coordinate.iter().enumerate() {
            check_distribution(w, universe.set_size(i), i)?;
        }
        Ok(PartiteProbTemplate { per_coordinate })
    }

    pub fn uniform(universe: &PartiteUniverse) -> Self {
        PartiteProbTemplate {
            per_coordinate: (0..universe.coordinate_sets().len())
                .map(|i| uniform_weights(universe.set_size(i)))
                .collect(),
        }
    }

    pub fn per_coordinate(&self) -> &[Vec<Rational>] {
        &self.per_coordinate
    }

    pub fn weight(&self, domain_pos: usize, element: usize) -> &Rational {
        &self.per_coordinate[domain_pos][element]
    }
}

/// `(μ)^m(x)` for a partite point.
pub fn partite_product_weight(mu: &PartiteProbTemplate, index: &PartiteIndexSet, x: &ConfigPoint) -> Rational {
    x.values
        .iter()
        .zip(index.coords())
        .map(|(&v, c)| mu.weight(c.domain_pos, v))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn subsets_in_canonical_order() {
        assert_eq!(enumerate_subsets(2, 2), vec![0b01, 0b10, 0b11]);
        assert_eq!(enumerate_subsets(3, 1), vec![0b001, 0b010, 0b100]);
        assert_eq!(enumerate_subsets(3, 2).len(), 6);
        assert_eq!(enumerate_subsets(3, 3), vec![1, 2, 4, 3, 5, 6, 7]);
    }

    #[test]
    fn injections() {
        assert_eq!(enumerate_injections(4, 2).len(), 12);
        assert_eq!(enumerate_injections(2, 2), vec![vec![0, 1], vec![1, 0]]);
        assert!(enumerate_injections(1, 2).is_empty());
        assert_eq!(enumerate_injections(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn combinations_lex() {
        assert_eq!(
            combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn pullback_examples() {
        let v2 = IndexSet::new(2, 2);
        let x = ConfigPoint::new(vec![10, 20, 30]);
        assert_eq!(pullback(&[0, 1], &v2, &x, &v2).unwrap(), x);
        // swapping the two vertices swaps singletons and keeps the pair
        assert_eq!(pullback(&[1, 0], &v2, &x, &v2).unwrap().values, vec![20, 10, 30]);
        let v1 = IndexSet::new(1, 1);
        let two = IndexSet::new(2, 1);
        let y = ConfigPoint::new(vec![5, 7]);
        assert_eq!(pullback(&[1], &two, &y, &v1).unwrap().values, vec![7]);
        assert_eq!(pullback(&[1, 1], &v2, &x, &v2), Err(Error::NonInjective));
    }

    #[test]
    fn product_weight_normalizes() {
        let u = Universe::with_sizes(2, &[2, 2], 2).unwrap();
        let mu = ProbTemplate::uniform(&u);
        let grid = ConfigGrid::new(&u, 2, &Limits::default()).unwrap();
        let x = grid.decode(5);
        assert_eq!(product_weight(&mu, grid.index(), &x), ratio(1, 8));
        let total: Rational = enumerate_configs(&grid, &mu).map(|(_, w)| w).sum();
        assert!(total.is_one());
    }

    #[test]
    fn grid_sizes() {
        let limits = Limits::default();
        let u1 = Universe::with_sizes(1, &[3], 2).unwrap();
        assert_eq!(ConfigGrid::new(&u1, 2, &limits).unwrap().len(), 9);
        let u2 = Universe::with_sizes(2, &[2, 1], 2).unwrap();
        assert_eq!(ConfigGrid::new(&u2, 2, &limits).unwrap().len(), 4);
        assert_eq!(ConfigGrid::new(&u2, 1, &limits).unwrap().len(), 2);
        let tight = Limits {
            explosion_cap: 8,
            ..limits
        };
        assert!(matches!(
            ConfigGrid::new(&u1, 2, &tight),
            Err(Error::ExplosionGuard { size: 9, .. })
        ));
    }

    #[test]
    fn measure_validation() {
        let u = Universe::with_sizes(1, &[2], 2).unwrap();
        let bad = ProbTemplate::new(&u, vec![vec![ratio(1, 2), ratio(1, 3)]]);
        assert!(matches!(bad, Err(Error::NotNormalized { .. })));
        let neg = ProbTemplate::new(&u, vec![vec![ratio(3, 2), ratio(-1, 2)]]);
        assert!(matches!(neg, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn point_mass_sampling() {
        let u = Universe::with_sizes(2, &[3, 2], 2).unwrap();
        let mu = ProbTemplate::point_mass(&u, &[2, 1]).unwrap();
        let grid = ConfigGrid::new(&u, 3, &Limits::default()).unwrap();
        for seed in 0..5 {
            let x = sample_config_seeded(&grid, &mu, seed);
            for (j, &v) in x.values.iter().enumerate() {
                assert_eq!(v, if grid.index().arity(j) == 1 { 2 } else { 1 });
            }
        }
        assert_eq!(sample_config_seeded(&grid, &ProbTemplate::uniform(&u), 9), sample_config_seeded(&grid, &ProbTemplate::uniform(&u), 9));
    }

    #[test]
    fn partite_index_order() {
        let idx = PartiteIndexSet::new(2, 2);
        // {1}: 2 maps, {2}: 2 maps, {1,2}: 4 maps
        assert_eq!(idx.len(), 8);
        assert_eq!(idx.coords()[0].domain, 0b01);
        assert_eq!(idx.coords()[4].values, vec![0, 0]);
        assert_eq!(idx.coords()[5].values, vec![0, 1]);
        let e1 = PartiteIndexSet::new(2, 1);
        assert_eq!(e1.len(), 3);
        assert_eq!(idx.alpha_plan(&[1, 0], &e1), vec![1, 2, 6]);
    }
}
