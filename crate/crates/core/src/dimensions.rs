//! Natarajan shattering and dimension, slices `H(x)` and the `VCN_k`
//! dimension in the non-partite and partite settings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::Pow;

use crate::audit::{AuditReport, Quantity, Verdict};
use crate::error::{Error, Result};
use crate::hypotheses::{gamma, HypothesisClass, Space};
use crate::rational::{ratio, Rational};
use crate::partization::{PartiteClass, PartiteSpace};
use crate::universe::{combinations, ConfigPoint, Grid, Limits, Subset};

/// A dimension value; `NegInfinity` is the supremum over an empty family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    NegInfinity,
    Finite(usize),
}

impl Dimension {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dimension::NegInfinity => None,
            Dimension::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::NegInfinity => f.write_str("-inf"),
            Dimension::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Finitely many functions on the domain `0..n_points`, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionFamily {
    n_points: usize,
    functions: Vec<Vec<usize>>,
    origins: Vec<usize>,
}

impl FunctionFamily {
    /// Keeps the first copy of each function; `origins()` maps the kept
    /// functions back to their positions in `functions`.
    pub fn new(n_points: usize, functions: Vec<Vec<usize>>) -> Self {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        let mut origins = Vec::new();
        for (i, f) in functions.into_iter().enumerate() {
            debug_assert_eq!(f.len(), n_points);
            if seen.insert(f.clone()) {
                kept.push(f);
                origins.push(i);
            }
        }
        FunctionFamily {
            n_points,
            functions: kept,
            origins,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn functions(&self) -> &[Vec<usize>] {
        &self.functions
    }

    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Points where at least two values are realized.
    pub fn active_points(&self) -> Vec<usize> {
        (0..self.n_points)
            .filter(|&p| self.functions.iter().any(|f| f[p] != self.functions[0][p]))
            .collect()
    }
}

/// `points` is Natarajan-shattered: `f0` and `f1` differ everywhere and for
/// each `U ⊆ points` (bitmask over positions in `points`), the function
/// `selectors[U]` agrees with `f1` on `U` and with `f0` off `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatteringWitness {
    pub points: Vec<usize>,
    pub f0: Vec<usize>,
    pub f1: Vec<usize>,
    /// Indices into the original function list (see [`FunctionFamily::origins`]).
    pub selectors: Vec<usize>,
}

/// Searches for `f0, f1` among the restrictions realized by the family.
/// Both must themselves be realized (they are the patterns for `U = ∅` and
/// `U = points`), so this search is complete.
pub fn natarajan_shatters(family: &FunctionFamily, points: &[usize], limits: &Limits) -> Result<Option<ShatteringWitness>> {
    let n = points.len();
    if n > limits.shatter_cap || n >= 64 {
        return Err(Error::ExplosionGuard {
            what: "shattering test".into(),
            size: n as u128,
            cap: limits.shatter_cap as u128,
        });
    }
    if family.is_empty() {
        return Ok(None);
    }
    let mut restricted: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (i, f) in family.functions().iter().enumerate() {
        restricted.entry(points.iter().map(|&p| f[p]).collect()).or_insert(i);
    }
    if (restricted.len() as u128) < 1u128 << n {
        return Ok(None);
    }
    let patterns: Vec<&Vec<usize>> = restricted.keys().collect();
    let mut mix = vec![0usize; n];
    for f0 in &patterns {
        'f1: for f1 in &patterns {
            if f0.iter().zip(f1.iter()).any(|(a, b)| a == b) {
                continue;
            }
            let mut selectors = Vec::with_capacity(1 << n);
            for u in 0u64..1 << n {
                for i in 0..n {
                    mix[i] = if u >> i & 1 == 1 { f1[i] } else { f0[i] };
                }
                match restricted.get(&mix) {
                    Some(&j) => selectors.push(family.origins()[j]),
                    None => continue 'f1,
                }
            }
            return Ok(Some(ShatteringWitness {
                points: points.to_vec(),
                f0: (*f0).clone(),
                f1: (*f1).clone(),
                selectors,
            }));
        }
    }
    Ok(None)
}

/// Every non-empty shattered set, by size and then lexicographically, each
/// with its first witness. Shattering is hereditary, so a set of size
/// `d + 1` is only tested when its first `d` points are shattered.
pub fn shattered_sets(family: &FunctionFamily, limits: &Limits) -> Result<Vec<ShatteringWitness>> {
    let active = family.active_points();
    let mut all = Vec::new();
    let mut level: Vec<ShatteringWitness> = Vec::new();
    for &p in &active {
        if let Some(w) = natarajan_shatters(family, &[p], limits)? {
            level.push(w);
        }
    }
    while !level.is_empty() {
        let mut next = Vec::new();
        limits.guard(
            "shattered set search",
            (level.len() as u128).saturating_mul(active.len() as u128),
        )?;
        for w in &level {
            let last = *w.points.last().unwrap();
            for &p in active.iter().filter(|&&p| p > last) {
                let mut points = w.points.clone();
                points.push(p);
                if let Some(found) = natarajan_shatters(family, &points, limits)? {
                    next.push(found);
                }
            }
        }
        all.append(&mut level);
        level = next;
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatarajanResult {
    pub dimension: Dimension,
    /// First largest shattered set; `None` when the largest is empty.
    pub witness: Option<ShatteringWitness>,
}

/// `Nat(family)`: the largest size of a shattered set; `-∞` for the empty family.
pub fn natarajan_dimension(family: &FunctionFamily, limits: &Limits) -> Result<NatarajanResult> {
    if family.is_empty() {
        return Ok(NatarajanResult {
            dimension: Dimension::NegInfinity,
            witness: None,
        });
    }
    let active = family.active_points();
    let mut best = NatarajanResult {
        dimension: Dimension::Finite(0),
        witness: None,
    };
    let mut level: Vec<Vec<usize>> = active.iter().map(|&p| vec![p]).collect();
    let mut size = 1;
    // a shattered set of size d needs 2^d distinct restrictions
    while !level.is_empty() && (1u128 << size.min(127)) <= family.len() as u128 {
        let mut shattered = Vec::new();
        for points in &level {
            if let Some(w) = natarajan_shatters(family, points, limits)? {
                if best.witness.as_ref().is_none_or(|b| b.points.len() < size) {
                    best = NatarajanResult {
                        dimension: Dimension::Finite(size),
                        witness: Some(w),
                    };
                }
                shattered.push(points.clone());
            }
        }
        limits.guard(
            "shattered set search",
            (shattered.len() as u128).saturating_mul(active.len() as u128),
        )?;
        level = shattered
            .iter()
            .flat_map(|s| {
                let last = *s.last().unwrap();
                active.iter().filter(move |&&p| p > last).map(move |&p| {
                    let mut t = s.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
        size += 1;
    }
    Ok(best)
}

/// The family `H(x)` induced by fixing the anchor coordinates to `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    /// Grid positions of the anchor coordinates.
    pub anchor_positions: Vec<usize>,
    /// Anchor values, one per anchor position.
    pub anchor: ConfigPoint,
    /// Grid positions of the residual coordinates.
    pub residual_positions: Vec<usize>,
    /// Residual values, one point per domain element of the family.
    pub residual_points: Vec<ConfigPoint>,
    /// Full grid code of anchor and residual point together.
    pub codes: Vec<usize>,
    pub family: FunctionFamily,
}

impl Slice {
    /// Member index behind family function `i`.
    pub fn member(&self, i: usize) -> usize {
        self.family.origins()[i]
    }
}

/// Positions whose value changes some table entry.
fn relevant_positions(grid: &Grid, tables: &[&[usize]]) -> Vec<bool> {
    let strides = grid.strides();
    (0..grid.radices().len())
        .map(|j| {
            (0..grid.len()).any(|c| {
                let base = c - (c / strides[j] % grid.radices()[j]) * strides[j];
                tables.iter().any(|t| t[c] != t[base])
            })
        })
        .collect()
}

/// Anchor and residual layout for slicing along the coordinates whose
/// index set contains `excluded`.
struct SliceLayout<'a> {
    grid: &'a Grid,
    anchor_positions: Vec<usize>,
    residual_positions: Vec<usize>,
    anchor_grid: Grid,
    residual_grid: Grid,
}

impl<'a> SliceLayout<'a> {
    fn new(grid: &'a Grid, subsets: &[Subset], excluded: usize, relevant: &[bool], limits: &Limits) -> Result<Self> {
        let (residual_positions, anchor_positions): (Vec<usize>, Vec<usize>) =
            (0..subsets.len()).partition(|&j| subsets[j] >> excluded & 1 == 1);
        let radix = |j: &usize| if relevant[*j] { grid.radices()[*j] } else { 1 };
        let anchor_grid = Grid::new(anchor_positions.iter().map(radix).collect(), "slice anchors", limits)?;
        let residual_grid = Grid::new(residual_positions.iter().map(radix).collect(), "slice domain", limits)?;
        Ok(SliceLayout {
            grid,
            anchor_positions,
            residual_positions,
            anchor_grid,
            residual_grid,
        })
    }

    fn partial_code(&self, positions: &[usize], values: &[usize]) -> usize {
        positions.iter().zip(values).map(|(&j, v)| v * self.grid.strides()[j]).sum()
    }

    fn slice(&self, anchor: ConfigPoint, tables: &[&[usize]]) -> Slice {
        let base = self.partial_code(&self.anchor_positions, &anchor.values);
        let residual_points: Vec<ConfigPoint> = self.residual_grid.points().collect();
        let codes: Vec<usize> = residual_points
            .iter()
            .map(|r| base + self.partial_code(&self.residual_positions, &r.values))
            .collect();
        let functions = tables.iter().map(|t| codes.iter().map(|&c| t[c]).collect()).collect();
        Slice {
            anchor_positions: self.anchor_positions.clone(),
            anchor,
            residual_positions: self.residual_positions.clone(),
            family: FunctionFamily::new(codes.len(), functions),
            residual_points,
            codes,
        }
    }

    fn slices<'b>(&'b self, tables: &'b [&'b [usize]]) -> impl Iterator<Item = Slice> + 'b {
        self.anchor_grid.points().map(move |a| self.slice(a, tables))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcnResult {
    pub dimension: Dimension,
    /// Element of `[k]` left out of the anchor (always `k - 1` in the
    /// non-partite setting, 0-based).
    pub excluded: Option<usize>,
    /// First slice attaining the maximum.
    pub slice: Option<Slice>,
    pub witness: Option<ShatteringWitness>,
}

fn max_over_slices(
    grid: &Grid,
    subsets: &[Subset],
    excluded: &[usize],
    tables: &[&[usize]],
    pin_irrelevant: bool,
    limits: &Limits,
) -> Result<VcnResult> {
    let mut best = VcnResult {
        dimension: Dimension::NegInfinity,
        excluded: None,
        slice: None,
        witness: None,
    };
    if tables.is_empty() {
        return Ok(best);
    }
    let relevant = if pin_irrelevant {
        relevant_positions(grid, tables)
    } else {
        vec![true; subsets.len()]
    };
    for &e in excluded {
        let layout = SliceLayout::new(grid, subsets, e, &relevant, limits)?;
        for s in layout.slices(tables) {
            let nat = natarajan_dimension(&s.family, limits)?;
            if best.slice.is_none() || nat.dimension > best.dimension {
                best = VcnResult {
                    dimension: nat.dimension,
                    excluded: Some(e),
                    slice: Some(s),
                    witness: nat.witness,
                };
            }
        }
    }
    Ok(best)
}

/// `H(x) = {H*_k(x, ·) | H ∈ H}` for an anchor `x` over the coordinates
/// `r(k-1)` (values in the canonical order of those coordinates).
pub fn slice(space: &Space, class: &HypothesisClass, anchor: &ConfigPoint) -> Result<Slice> {
    let k = space.k();
    let ek = space.ek();
    let tables: Vec<Vec<usize>> = class.members().iter().map(|h| space.pattern_table(h)).collect();
    let refs: Vec<&[usize]> = tables.iter().map(Vec::as_slice).collect();
    let relevant = vec![true; ek.index().len()];
    let layout = SliceLayout::new(ek.grid(), ek.index().subsets(), k - 1, &relevant, space.limits())?;
    if anchor.values.len() != layout.anchor_positions.len() || !layout.anchor_grid.contains(anchor) {
        return Err(Error::Precondition(format!(
            "anchor must assign {} coordinates within their ground sets",
            layout.anchor_positions.len()
        )));
    }
    Ok(layout.slice(anchor.clone(), &refs))
}

/// All slices of the class, one per anchor in canonical order. Coordinates
/// no member reads are pinned to element 0.
pub fn slices(space: &Space, class: &HypothesisClass) -> Result<Vec<Slice>> {
    let ek = space.ek();
    let tables: Vec<Vec<usize>> = class.members().iter().map(|h| space.pattern_table(h)).collect();
    let refs: Vec<&[usize]> = tables.iter().map(Vec::as_slice).collect();
    let relevant = relevant_positions(ek.grid(), &refs);
    let layout = SliceLayout::new(ek.grid(), ek.index().subsets(), space.k() - 1, &relevant, space.limits())?;
    Ok(layout.slices(&refs).collect())
}

fn vcn_k_with(space: &Space, class: &HypothesisClass, pin_irrelevant: bool) -> Result<VcnResult> {
    let ek = space.ek();
    let tables: Vec<Vec<usize>> = class.members().iter().map(|h| space.pattern_table(h)).collect();
    let refs: Vec<&[usize]> = tables.iter().map(Vec::as_slice).collect();
    max_over_slices(ek.grid(), ek.index().subsets(), &[space.k() - 1], &refs, pin_irrelevant, space.limits())
}

/// `VCN_k(H) = sup_x Nat(H(x))` over anchors `x ∈ E_{k-1}`.
pub fn vcn_k(space: &Space, class: &HypothesisClass) -> Result<VcnResult> {
    vcn_k_with(space, class, true)
}

/// [`vcn_k`] enumerating every anchor coordinate, including those no member reads.
pub fn vcn_k_full_grid(space: &Space, class: &HypothesisClass) -> Result<VcnResult> {
    vcn_k_with(space, class, false)
}

/// Partite `VCN_k`: the supremum over `A = [k] \ {a}` and anchors over the
/// coordinates `f` with `dom(f) ⊆ A`.
pub fn vcn_k_partite(space: &PartiteSpace, class: &PartiteClass) -> Result<VcnResult> {
    let grid = space.e1().grid();
    let subsets: Vec<Subset> = space.e1().index().coords().iter().map(|c| c.domain).collect();
    let refs: Vec<&[usize]> = class.members().iter().map(|h| h.table()).collect();
    // A = [k] \ {a} in lexicographic order of A
    let excluded: Vec<usize> = combinations(space.k(), space.k() - 1)
        .iter()
        .map(|a| (0..space.k()).find(|e| !a.contains(e)).unwrap())
        .collect();
    max_over_slices(grid, &subsets, &excluded, &refs, true, space.limits())
}

/// Slices of a partite class along `A = [k] \\ {excluded}`, one per anchor.
pub fn partite_slices(space: &PartiteSpace, class: &PartiteClass, excluded: usize) -> Result<Vec<Slice>> {
    let grid = space.e1().grid();
    let subsets: Vec<Subset> = space.e1().index().coords().iter().map(|c| c.domain).collect();
    let refs: Vec<&[usize]> = class.members().iter().map(|h| h.table()).collect();
    let relevant = relevant_positions(grid, &refs);
    let layout = SliceLayout::new(grid, &subsets, excluded, &relevant, space.limits())?;
    Ok(layout.slices(&refs).collect())
}

fn binomial(n: usize, r: usize) -> BigInt {
    if r > n {
        return BigInt::from(0);
    }
    (0..r).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Checks `γ_H(m) <= (m+1)^{d·C(m,k-1)} · C(|Λ|,2)^{d·C(m,k-1)} <= (|Λ|²(m+1)/2)^{d·m^{k-1}}`
/// with `d = VCN_k(H)`, for classes of rank at most 1 with `d >= 1`.
pub fn audit_gamma_growth(space: &Space, class: &HypothesisClass, ms: &[usize]) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "gamma-growth",
        "gamma(m) <= (m+1)^{d C(m,k-1)} C(|L|,2)^{d C(m,k-1)} <= (|L|^2 (m+1)/2)^{d m^{k-1}}, d = VCN_k",
    );
    if class.rank() > 1 {
        report.note("class rank exceeds 1; the growth bound is only claimed for rank <= 1");
        return Ok(report);
    }
    let d = match vcn_k(space, class)?.dimension {
        Dimension::Finite(d) if d >= 1 => d,
        other => {
            report.note(format!("VCN_k = {other}; the bound is only checked for VCN_k >= 1"));
            return Ok(report);
        }
    };
    report.quantity("vcn_k", Quantity::Integer(BigInt::from(d)));
    let k = space.k();
    let labels = space.n_labels();
    let mut violations = 0usize;
    for &m in ms {
        let g = BigInt::from(gamma(space, class, m)?.value);
        let e_binom = binomial(m, k - 1) * BigInt::from(d);
        let e_binom = usize::try_from(e_binom).map_err(|_| Error::ExplosionGuard {
            what: "growth bound exponent".into(),
            size: u128::MAX,
            cap: space.limits().explosion_cap,
        })?;
        let e_pow = d * m.pow(k as u32 - 1);
        space.limits().guard("growth bound exponent", e_pow as u128)?;
        let binom_form: BigInt =
            Pow::pow(BigInt::from(m + 1), e_binom) * Pow::pow(binomial(labels, 2), e_binom);
        let base: Rational = ratio((labels * labels * (m + 1)) as i64, 2);
        let closed: Rational = Pow::pow(base, e_pow);
        let g_rat = Rational::from_integer(g.clone());
        let first = g <= binom_form;
        let second = Rational::from_integer(binom_form.clone()) <= closed;
        let third = g_rat <= closed;
        report.quantity(format!("m={m}: gamma"), Quantity::Integer(g.clone()));
        report.quantity(format!("m={m}: binomial_bound"), Quantity::Integer(binom_form));
        report.quantity(format!("m={m}: closed_bound"), Quantity::Exact(closed));
        if first && second && third {
            report.record(Verdict::Verified);
        } else {
            violations += 1;
            report.record(Verdict::Violated);
            report.witness(format!(
                "m={m}: gamma = {g}, binomial form holds: {first}, binomial <= closed: {second}, closed form holds: {third}"
            ));
        }
    }
    report.quantity("violations", Quantity::Integer(BigInt::from(violations)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::{generators, Hypothesis};
    use crate::universe::Universe;

    fn space(k: usize, sizes: &[usize], labels: usize) -> Space {
        Space::new(Universe::with_sizes(k, sizes, labels).unwrap(), Limits::default()).unwrap()
    }

    #[test]
    fn shattering_examples() {
        let limits = Limits::default();
        let all = FunctionFamily::new(3, (0..8).map(|c| (0..3).map(|i| c >> (2 - i) & 1).collect()).collect());
        let w = natarajan_shatters(&all, &[0, 1, 2], &limits).unwrap().unwrap();
        assert_eq!((w.f0.clone(), w.f1.clone()), (vec![0, 0, 0], vec![1, 1, 1]));
        let single = FunctionFamily::new(3, vec![vec![0; 3]]);
        assert!(natarajan_shatters(&single, &[0], &limits).unwrap().is_none());
        let consts = FunctionFamily::new(3, vec![vec![0; 3], vec![1; 3]]);
        assert!(natarajan_shatters(&consts, &[0], &limits).unwrap().is_some());
        assert!(natarajan_shatters(&consts, &[0, 1], &limits).unwrap().is_none());
    }

    #[test]
    fn dimension_examples() {
        let limits = Limits::default();
        let all = FunctionFamily::new(3, (0..27).map(|c: usize| vec![c / 9, c / 3 % 3, c % 3]).collect());
        assert_eq!(natarajan_dimension(&all, &limits).unwrap().dimension, Dimension::Finite(3));
        assert_eq!(
            natarajan_dimension(&FunctionFamily::new(2, vec![]), &limits).unwrap().dimension,
            Dimension::NegInfinity
        );
        let consts = FunctionFamily::new(4, vec![vec![0; 4], vec![1; 4]]);
        assert_eq!(natarajan_dimension(&consts, &limits).unwrap().dimension, Dimension::Finite(1));
        assert_eq!(shattered_sets(&all, &limits).unwrap().len(), 7);
    }

    #[test]
    fn vcn_examples() {
        let s1 = space(1, &[3], 2);
        let all = HypothesisClass::new("all", generators::all_functions(&s1, 1).unwrap()).unwrap();
        assert_eq!(vcn_k(&s1, &all).unwrap().dimension, Dimension::Finite(3));
        let s2 = space(2, &[3, 2], 2);
        let consts = HypothesisClass::new("c", generators::constants(&s2).unwrap()).unwrap();
        assert_eq!(vcn_k(&s2, &consts).unwrap().dimension, Dimension::Finite(1));
        let empty = HypothesisClass::new("e", vec![]).unwrap();
        assert_eq!(vcn_k(&s2, &empty).unwrap().dimension, Dimension::NegInfinity);
        let slice = slice(&s2, &consts, &ConfigPoint::new(vec![0])).unwrap();
        assert!(slice.family.len() <= 2);
        let inds = HypothesisClass::new("i", generators::indicators(&s2).unwrap()).unwrap();
        assert_eq!(vcn_k(&s2, &inds).unwrap(), vcn_k(&s2, &inds).unwrap());
        assert_eq!(
            vcn_k(&s2, &inds).unwrap().dimension,
            vcn_k_full_grid(&s2, &inds).unwrap().dimension
        );
        let reads_pair = HypothesisClass::new(
            "p",
            vec![Hypothesis::from_fn(&s2, |x| x.values[2]).unwrap(), Hypothesis::constant(&s2, 0).unwrap()],
        )
        .unwrap();
        assert_eq!(vcn_k(&s2, &reads_pair).unwrap().dimension, Dimension::Finite(1));
    }
}
