//! k-ary hypotheses as total lookup tables over `E_k`, their pattern maps
//! `F*_m`, the pattern count `γ_H(m)` and rank.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::universe::{
    enumerate_injections, factorial, ConfigGrid, ConfigPoint, Grid, IndexSet, Limits, PullbackPlan, Universe,
};

/// Mixed-radix codes for tuples in `Λ^n`; entry 0 is the most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    n_labels: usize,
    strides: Vec<usize>,
    size: usize,
}

impl TupleSpace {
    pub fn new(n_labels: usize, arity: usize, limits: &Limits) -> Result<Self> {
        let size = (n_labels as u128).saturating_pow(arity as u32);
        limits.guard("label tuple space", size)?;
        let mut strides = vec![1usize; arity];
        for j in (0..arity.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * n_labels;
        }
        Ok(TupleSpace {
            n_labels,
            strides,
            size: size as usize,
        })
    }

    pub fn arity(&self) -> usize {
        self.strides.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    pub fn decode(&self, code: usize) -> Vec<usize> {
        self.strides.iter().map(|s| code / s % self.n_labels).collect()
    }
}

/// Everything derived from a universe that hypotheses, losses and audits
/// share: the grid of `E_k`, the permutations `S_k` with their pullbacks,
/// and the codes of `Λ^{S_k}`.
#[derive(Debug, Clone)]
pub struct Space {
    universe: Universe,
    limits: Limits,
    ek: ConfigGrid,
    perms: Vec<Vec<usize>>,
    perm_maps: Vec<Vec<usize>>,
    tuples: TupleSpace,
    projections: Vec<Vec<usize>>,
}

impl Space {
    pub fn new(universe: Universe, limits: Limits) -> Result<Self> {
        let k = universe.k();
        let ek = ConfigGrid::new(&universe, k, &limits)?;
        limits.guard("permutation pullback table", factorial(k).saturating_mul(ek.len() as u128))?;
        let perms = enumerate_injections(k, k);
        let perm_maps = perms
            .iter()
            .map(|tau| {
                let plan = PullbackPlan::new(tau, ek.index(), ek.index())?;
                Ok(ek
                    .points()
                    .map(|x| plan.apply_code(&x.values, ek.grid().strides()))
                    .collect())
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        let tuples = TupleSpace::new(universe.n_labels(), perms.len(), &limits)?;
        let projections = (0..=k)
            .map(|r| {
                ek.points()
                    .map(|x| {
                        let values: Vec<usize> = x
                            .values
                            .iter()
                            .enumerate()
                            .map(|(j, &v)| if ek.index().arity(j) > r { 0 } else { v })
                            .collect();
                        ek.grid().encode(&values)
                    })
                    .collect()
            })
            .collect();
        Ok(Space {
            universe,
            limits,
            ek,
            perms,
            perm_maps,
            tuples,
            projections,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn k(&self) -> usize {
        self.universe.k()
    }

    pub fn n_labels(&self) -> usize {
        self.universe.n_labels()
    }

    /// The grid of `E_k`.
    pub fn ek(&self) -> &ConfigGrid {
        &self.ek
    }

    pub fn n_points(&self) -> usize {
        self.ek.len()
    }

    /// `S_k` in lexicographic order; index 0 is the identity.
    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// `perm_maps()[t][c]` is the code of `τ_t*(x)` where `c` codes `x`.
    pub fn perm_maps(&self) -> &[Vec<usize>] {
        &self.perm_maps
    }

    /// Codes of `Λ^{S_k}`, indexed by `perms()`.
    pub fn tuples(&self) -> &TupleSpace {
        &self.tuples
    }

    /// Code of `x` with every coordinate of arity above `r` set to element 0.
    pub fn project(&self, r: usize, code: usize) -> usize {
        self.projections[r.min(self.k())][code]
    }

    pub fn grid(&self, m: usize) -> Result<ConfigGrid> {
        ConfigGrid::new(&self.universe, m, &self.limits)
    }

    /// Code of `H*_k(x) ∈ Λ^{S_k}` for the point with code `x`.
    pub fn k_pattern(&self, h: &Hypothesis, x: usize) -> usize {
        self.perm_maps
            .iter()
            .zip(self.tuples.strides())
            .map(|(map, s)| h.table[map[x]] * s)
            .sum()
    }

    /// `H*_k` tabulated over all of `E_k`.
    pub fn pattern_table(&self, h: &Hypothesis) -> Vec<usize> {
        (0..self.n_points()).map(|x| self.k_pattern(h, x)).collect()
    }
}

fn rank_of_table(space: &Space, table: &[usize]) -> usize {
    (0..=space.k())
        .find(|&r| (0..table.len()).all(|x| table[x] == table[space.project(r, x)]))
        .unwrap_or(space.k())
}

/// A k-ary hypothesis: a label for every point of `E_k`, indexed by grid code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    table: Vec<usize>,
    rank: usize,
}

impl Hypothesis {
    /// Validates the table and, when given, that the hypothesis reads no
    /// coordinate of arity above `declared_rank`.
    pub fn new(space: &Space, table: Vec<usize>, declared_rank: Option<usize>) -> Result<Self> {
        if table.len() != space.n_points() {
            return Err(Error::InvalidHypothesis(format!(
                "table has {} entries but E_k has {} points",
                table.len(),
                space.n_points()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v >= space.n_labels()) {
            return Err(Error::InvalidHypothesis(format!("label index {v} out of range")));
        }
        let rank = rank_of_table(space, &table);
        if let Some(declared) = declared_rank {
            if rank > declared {
                return Err(Error::InvalidHypothesis(format!(
                    "declared rank {declared} but the table reads arity-{rank} coordinates"
                )));
            }
        }
        Ok(Hypothesis { table, rank })
    }

    pub fn constant(space: &Space, label: usize) -> Result<Self> {
        Hypothesis::new(space, vec![label; space.n_points()], Some(0))
    }

    pub fn from_fn(space: &Space, f: impl Fn(&ConfigPoint) -> usize) -> Result<Self> {
        Hypothesis::new(space, space.ek().points().map(|x| f(&x)).collect(), None)
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn evaluate_code(&self, code: usize) -> Result<usize> {
        self.table.get(code).copied().ok_or(Error::MissingPoint(code))
    }

    pub fn evaluate(&self, space: &Space, x: &ConfigPoint) -> Result<usize> {
        if !space.ek().grid().contains(x) {
            return Err(Error::MissingPoint(x.values.len()));
        }
        self.evaluate_code(space.ek().encode(x))
    }
}

/// An ordered finite class of pairwise distinct hypotheses. Member order is
/// the tie-break key everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisClass {
    name: String,
    members: Vec<Hypothesis>,
}

impl HypothesisClass {
    pub fn new(name: impl Into<String>, members: Vec<Hypothesis>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, h) in members.iter().enumerate() {
            if let Some(j) = seen.insert(&h.table, i) {
                return Err(Error::InvalidHypothesis(format!("members {j} and {i} have identical tables")));
            }
        }
        Ok(HypothesisClass {
            name: name.into(),
            members,
        })
    }

    /// Keeps the first occurrence of every table.
    pub fn dedup(name: impl Into<String>, members: Vec<Hypothesis>) -> Self {
        let mut seen = BTreeSet::new();
        let members = members.into_iter().filter(|h| seen.insert(h.table.clone())).collect();
        HypothesisClass {
            name: name.into(),
            members,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Maximum member rank; 0 for the empty class.
    pub fn rank(&self) -> usize {
        self.members.iter().map(|h| h.rank).max().unwrap_or(0)
    }

    pub fn position(&self, h: &Hypothesis) -> Option<usize> {
        self.members.iter().position(|g| g.table == h.table)
    }
}

/// Pullbacks from `E_m` to `E_k` along every injection in `([m])_k`.
#[derive(Debug, Clone)]
pub struct StarPlan {
    grid: ConfigGrid,
    injections: Vec<Vec<usize>>,
    plans: Vec<PullbackPlan>,
    lookup: BTreeMap<Vec<usize>, usize>,
}

impl StarPlan {
    pub fn new(space: &Space, m: usize) -> Result<Self> {
        let grid = space.grid(m)?;
        space
            .limits()
            .guard("injection set", crate::universe::falling_factorial(m, space.k()))?;
        let injections = enumerate_injections(m, space.k());
        let plans = injections
            .iter()
            .map(|a| PullbackPlan::new(a, grid.index(), space.ek().index()))
            .collect::<Result<Vec<_>>>()?;
        let lookup = injections.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(StarPlan {
            grid,
            injections,
            plans,
            lookup,
        })
    }

    pub fn m(&self) -> usize {
        self.grid.index().base()
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn index(&self) -> &IndexSet {
        self.grid.index()
    }

    pub fn injections(&self) -> &[Vec<usize>] {
        &self.injections
    }

    pub fn injection_index(&self, alpha: &[usize]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Code in `E_k` of `α*(x)` for the `a`-th injection.
    pub fn pullback_code(&self, space: &Space, a: usize, x: &ConfigPoint) -> usize {
        self.plans[a].apply_code(&x.values, space.ek().grid().strides())
    }

    /// `F*_m(x)`, indexed like `injections()`.
    pub fn star(&self, space: &Space, h: &Hypothesis, x: &ConfigPoint) -> Vec<usize> {
        (0..self.plans.len())
            .map(|a| h.table[self.pullback_code(space, a, x)])
            .collect()
    }
}

pub fn star(space: &Space, h: &Hypothesis, m: usize, x: &ConfigPoint) -> Result<Vec<usize>> {
    Ok(StarPlan::new(space, m)?.star(space, h, x))
}

/// Distinct patterns `{H*_m(x) | H ∈ class}`.
pub fn pattern_set(space: &Space, plan: &StarPlan, class: &HypothesisClass, x: &ConfigPoint) -> BTreeSet<Vec<usize>> {
    class.members().iter().map(|h| plan.star(space, h, x)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamma {
    pub value: usize,
    /// First point of `E_m` (canonical order) attaining the maximum.
    pub witness: Option<ConfigPoint>,
}

/// `γ_H(m)`, the largest number of distinct patterns at one point of `E_m`.
/// Only coordinates of arity at most the class rank are varied; patterns
/// cannot depend on the others.
pub fn gamma(space: &Space, class: &HypothesisClass, m: usize) -> Result<Gamma> {
    let plan = StarPlan::new(space, m)?;
    let r = class.rank();
    let index = plan.index();
    let radices = (0..index.len())
        .map(|j| if index.arity(j) > r { 1 } else { space.universe().set_size(index.arity(j)) })
        .collect();
    let reduced = Grid::new(radices, &format!("pattern search over E_{m}"), space.limits())?;
    let mut best = Gamma {
        value: 0,
        witness: None,
    };
    for x in reduced.points() {
        let count = pattern_set(space, &plan, class, &x).len();
        if best.witness.is_none() || count > best.value {
            best = Gamma {
                value: count,
                witness: Some(x),
            };
        }
    }
    Ok(best)
}

/// Rank of a single hypothesis.
pub fn rank(h: &Hypothesis) -> usize {
    h.rank()
}

/// Distinct codes of `E_k` after zeroing coordinates of arity above `r`, in
/// increasing order. A rank-`r` hypothesis is a function of these.
fn reduced_points(space: &Space, r: usize) -> Vec<usize> {
    let set: BTreeSet<usize> = (0..space.n_points()).map(|x| space.project(r, x)).collect();
    set.into_iter().collect()
}

fn table_from_reduced(space: &Space, r: usize, reduced: &[usize], values: &[usize]) -> Vec<usize> {
    let pos: BTreeMap<usize, usize> = reduced.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    (0..space.n_points()).map(|x| values[pos[&space.project(r, x)]]).collect()
}

/// Hypothesis generators. Each returns members in a fixed order and may
/// contain duplicate tables; wrap with [`HypothesisClass::dedup`].
pub mod generators {
    use super::*;

    pub fn constants(space: &Space) -> Result<Vec<Hypothesis>> {
        (0..space.n_labels()).map(|l| Hypothesis::constant(space, l)).collect()
    }

    /// Every hypothesis of rank at most `rank_cap`.
    pub fn all_functions(space: &Space, rank_cap: usize) -> Result<Vec<Hypothesis>> {
        let r = rank_cap.min(space.k());
        let reduced = reduced_points(space, r);
        let count = (space.n_labels() as u128).saturating_pow(reduced.len() as u32);
        space.limits().guard("all-functions generator", count)?;
        let digits = Grid::new(vec![space.n_labels(); reduced.len()], "all-functions generator", space.limits())?;
        digits
            .points()
            .map(|f| Hypothesis::new(space, table_from_reduced(space, r, &reduced, &f.values), Some(r)))
            .collect()
    }

    /// For each element `e` of `X_1`, label 1 where the coordinate `{1}`
    /// equals `e` and label 0 elsewhere.
    pub fn indicators(space: &Space) -> Result<Vec<Hypothesis>> {
        if space.n_labels() < 2 {
            return Err(Error::InvalidHypothesis("indicators need at least two labels".into()));
        }
        (0..space.universe().set_size(1))
            .map(|e| Hypothesis::from_fn(space, |x| usize::from(x.values[0] == e)))
            .collect()
    }

    /// `count` uniformly random hypotheses of rank at most `rank_cap`.
    pub fn random(space: &Space, count: usize, seed: u64, rank_cap: usize) -> Result<Vec<Hypothesis>> {
        let r = rank_cap.min(space.k());
        let reduced = reduced_points(space, r);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let values: Vec<usize> = reduced.iter().map(|_| rng.random_range(0..space.n_labels())).collect();
                Hypothesis::new(space, table_from_reduced(space, r, &reduced, &values), Some(r))
            })
            .collect()
    }
}
