//! Partization: re-encoding a k-ary universe, measure, hypothesis, class and
//! loss over the k-partite template with one coordinate set per `A ∈ r(k)`,
//! together with the index maps `ι_kpart`, `φ_m`, `β_α` and `Φ_m`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::audit::{AuditReport, Quantity, Verdict};
use crate::error::{Error, Result};
use crate::hypotheses::{Hypothesis, HypothesisClass, Space, StarPlan};
use crate::losses::{Loss, LossValues};
use crate::packing::{greedy_from_matrix, verify_cover, CenterSet, CoverMethod};
use crate::rational::{format_rational, Rational};
use crate::universe::{
    partite_product_weight, subset_elements, support_atoms, weighted_product, ConfigGrid, ConfigPoint, Limits,
    PartiteCoord, PartiteGrid, PartiteIndexSet, PartiteProbTemplate, PartiteUniverse, ProbTemplate,
};

/// A k-partite universe with the grid of its `E_1`.
#[derive(Debug, Clone)]
pub struct PartiteSpace {
    universe: PartiteUniverse,
    limits: Limits,
    e1: PartiteGrid,
}

impl PartiteSpace {
    pub fn new(universe: PartiteUniverse, limits: Limits) -> Result<Self> {
        let e1 = PartiteGrid::new(&universe, 1, &limits)?;
        Ok(PartiteSpace { universe, limits, e1 })
    }

    pub fn universe(&self) -> &PartiteUniverse {
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

    pub fn e1(&self) -> &PartiteGrid {
        &self.e1
    }

    pub fn grid(&self, m: usize) -> Result<PartiteGrid> {
        PartiteGrid::new(&self.universe, m, &self.limits)
    }
}

/// A k-partite hypothesis: a label for every point of the partite `E_1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartiteHypothesis {
    table: Vec<usize>,
}

impl PartiteHypothesis {
    pub fn new(space: &PartiteSpace, table: Vec<usize>) -> Result<Self> {
        if table.len() != space.e1().len() {
            return Err(Error::InvalidHypothesis(format!(
                "partite table has {} entries but E_1 has {} points",
                table.len(),
                space.e1().len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v >= space.n_labels()) {
            return Err(Error::InvalidHypothesis(format!("label index {v} out of range")));
        }
        Ok(PartiteHypothesis { table })
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartiteClass {
    name: String,
    members: Vec<PartiteHypothesis>,
}

impl PartiteClass {
    pub fn new(name: impl Into<String>, members: Vec<PartiteHypothesis>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, h) in members.iter().enumerate() {
            if let Some(j) = seen.insert(&h.table, i) {
                return Err(Error::InvalidHypothesis(format!("members {j} and {i} have identical tables")));
            }
        }
        Ok(PartiteClass {
            name: name.into(),
            members,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[PartiteHypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `Ω^kpart_A = Ω_{|A|}`; the labels become the tuples `Λ^{S_k}`, named
/// like `(a,b)`.
pub fn partize_universe(space: &Space) -> Result<PartiteUniverse> {
    let u = space.universe();
    let domains = crate::universe::IndexSet::new(u.k(), u.k());
    let sets = domains
        .subsets()
        .iter()
        .map(|&a| u.ground_sets()[subset_elements(a).len() - 1].clone())
        .collect();
    let tuples = space.tuples();
    let labels = (0..tuples.size())
        .map(|c| {
            let names: Vec<&str> = tuples.decode(c).iter().map(|&l| u.labels()[l].as_str()).collect();
            format!("({})", names.join(","))
        })
        .collect();
    PartiteUniverse::new(u.k(), sets, labels)
}

pub fn partize_space(space: &Space) -> Result<PartiteSpace> {
    PartiteSpace::new(partize_universe(space)?, *space.limits())
}

/// `μ^kpart_A = μ_{|A|}`.
pub fn partize_measure(pspace: &PartiteSpace, mu: &ProbTemplate) -> Result<PartiteProbTemplate> {
    let domains = pspace.e1().index().domains();
    let per = domains
        .subsets()
        .iter()
        .map(|&a| mu.per_arity()[subset_elements(a).len() - 1].clone())
        .collect();
    PartiteProbTemplate::new(pspace.universe(), per)
}

fn one_coord(index: &PartiteIndexSet, domain_pos: usize) -> PartiteCoord {
    let domain = index.domains().subset(domain_pos);
    PartiteCoord {
        domain_pos,
        domain,
        values: vec![0; subset_elements(domain).len()],
    }
}

/// `ι_kpart(z)_A = z_{1^A}`.
pub fn iota_kpart(space: &Space, pspace: &PartiteSpace, z: &ConfigPoint) -> ConfigPoint {
    let e1 = pspace.e1().index();
    ConfigPoint::new(
        space
            .ek()
            .index()
            .subsets()
            .iter()
            .map(|&a| {
                let pos = e1.domains().position(a).expect("E_k and partite E_1 share r(k)");
                z.values[e1.position(&one_coord(e1, pos)).expect("1^A is a coordinate of E_1")]
            })
            .collect(),
    )
}

/// `ι_kpart` tabulated on codes: entry `z` is the `E_k` code of `ι_kpart(z)`.
pub fn iota_table(space: &Space, pspace: &PartiteSpace) -> Vec<usize> {
    pspace
        .e1()
        .grid()
        .points()
        .map(|z| space.ek().encode(&iota_kpart(space, pspace, &z)))
        .collect()
}

/// `β_α(i) = (i-1)⌊m/k⌋ + α(i)`, 0-based: `i·q + α(i)`.
pub fn beta_alpha(alpha: &[usize], m: usize, k: usize) -> Vec<usize> {
    let q = m / k;
    alpha.iter().enumerate().map(|(i, &a)| i * q + a).collect()
}

/// Coordinate map of `φ_m: E_m -> E_{⌊m/k⌋}` (partite side): entry `f`
/// is the position in `E_m` of the subset `{(i-1)⌊m/k⌋ + f(i) | i ∈ dom f}`.
#[derive(Debug, Clone)]
pub struct PhiPlan {
    m: usize,
    source: ConfigGrid,
    target: PartiteGrid,
    positions: Vec<usize>,
}

impl PhiPlan {
    pub fn new(space: &Space, pspace: &PartiteSpace, m: usize) -> Result<Self> {
        let k = space.k();
        if m < k {
            return Err(Error::Precondition(format!("phi_m needs m >= k, got m={m}, k={k}")));
        }
        let q = m / k;
        let source = space.grid(m)?;
        let target = pspace.grid(q)?;
        let positions = target
            .index()
            .coords()
            .iter()
            .map(|f| {
                let dom = subset_elements(f.domain);
                let image: u64 = dom.iter().zip(&f.values).fold(0, |acc, (&i, &v)| acc | 1 << (i * q + v));
                if image.count_ones() as usize != dom.len() {
                    return Err(Error::IndexCollision);
                }
                source.index().position(image).ok_or(Error::IndexCollision)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhiPlan {
            m,
            source,
            target,
            positions,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn source(&self) -> &ConfigGrid {
        &self.source
    }

    pub fn target(&self) -> &PartiteGrid {
        &self.target
    }

    pub fn apply(&self, x: &ConfigPoint) -> ConfigPoint {
        ConfigPoint::new(self.positions.iter().map(|&p| x.values[p]).collect())
    }

    pub fn apply_code(&self, x: &ConfigPoint) -> usize {
        self.positions
            .iter()
            .zip(self.target.grid().strides())
            .map(|(&p, s)| x.values[p] * s)
            .sum()
    }
}

pub fn phi_m(space: &Space, pspace: &PartiteSpace, m: usize, x: &ConfigPoint) -> Result<ConfigPoint> {
    Ok(PhiPlan::new(space, pspace, m)?.apply(x))
}

/// All `α ∈ [q]^k` in lexicographic order.
pub fn all_tuples(q: usize, k: usize) -> Vec<Vec<usize>> {
    let total = q.pow(k as u32);
    (0..total)
        .map(|mut c| {
            let mut t = vec![0; k];
            for i in (0..k).rev() {
                t[i] = c % q;
                c /= q;
            }
            t
        })
        .collect()
}

/// `(Φ_m(y)_α)_τ = y_{β_α ∘ τ}`: a pattern indexed like `plan.injections()`
/// becomes one tuple code per `α ∈ [⌊m/k⌋]^k` (lexicographic).
pub fn big_phi_m(space: &Space, plan: &StarPlan, y: &[usize]) -> Vec<usize> {
    let k = space.k();
    let m = plan.m();
    all_tuples(m / k, k)
        .iter()
        .map(|alpha| {
            let beta = beta_alpha(alpha, m, k);
            let tuple: Vec<usize> = space
                .perms()
                .iter()
                .map(|tau| {
                    let composed: Vec<usize> = tau.iter().map(|&t| beta[t]).collect();
                    y[plan.injection_index(&composed).expect("β_α∘τ is an injection")]
                })
                .collect();
            space.tuples().encode(&tuple)
        })
        .collect()
}

/// `F^kpart(z) = F*_k(ι_kpart(z))`.
pub fn partize_hypothesis(space: &Space, pspace: &PartiteSpace, f: &Hypothesis) -> Result<PartiteHypothesis> {
    let iota = iota_table(space, pspace);
    PartiteHypothesis::new(pspace, iota.iter().map(|&x| space.k_pattern(f, x)).collect())
}

pub fn partize_class(space: &Space, pspace: &PartiteSpace, class: &HypothesisClass) -> Result<PartiteClass> {
    let members = class
        .members()
        .iter()
        .map(|f| partize_hypothesis(space, pspace, f))
        .collect::<Result<Vec<_>>>()?;
    PartiteClass::new(class.name(), members)
}

/// Inverse of [`partize_hypothesis`]; `NotInImage` when `g` is not the
/// partization of any hypothesis.
pub fn departize(space: &Space, pspace: &PartiteSpace, g: &PartiteHypothesis) -> Result<Hypothesis> {
    let iota = iota_table(space, pspace);
    let mut table = vec![usize::MAX; space.n_points()];
    for (z, &x) in iota.iter().enumerate() {
        // identity permutation is the first entry of the tuple
        table[x] = space.tuples().decode(g.table[z])[0];
    }
    if table.contains(&usize::MAX) {
        return Err(Error::NotInImage);
    }
    let f = Hypothesis::new(space, table, None)?;
    if partize_hypothesis(space, pspace, &f)? != *g {
        return Err(Error::NotInImage);
    }
    Ok(f)
}

/// `ℓ^kpart(z, y, y') = ℓ(ι_kpart(z), y, y')`.
pub fn partize_loss(space: &Space, pspace: &PartiteSpace, loss: &Loss) -> Result<Loss> {
    match loss.values() {
        LossValues::ZeroOne => Ok(Loss::zero_one(loss.n_values())),
        LossValues::Constant(m) => Loss::constant(loss.n_values(), m.clone(), pspace.limits()),
        LossValues::PerPoint(t) => {
            let iota = iota_table(space, pspace);
            Loss::per_point(
                iota.len(),
                loss.n_values(),
                iota.iter().map(|&x| t[x].clone()).collect(),
                pspace.limits(),
            )
        }
    }
}

/// Partite total losses `L_{μ,G_i,ℓ}(G_j)` by enumeration of the partite
/// `E_1`, indexed `[target][candidate]`.
pub fn partite_loss_matrix(
    pspace: &PartiteSpace,
    mu: &PartiteProbTemplate,
    loss: &Loss,
    targets: &[PartiteHypothesis],
    candidates: &[PartiteHypothesis],
) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); candidates.len()]; targets.len()];
    let index = pspace.e1().index();
    for (z, point) in pspace.e1().grid().points().enumerate() {
        let w = partite_product_weight(mu, index, &point);
        if w.is_zero() {
            continue;
        }
        for (i, f) in targets.iter().enumerate() {
            for (j, h) in candidates.iter().enumerate() {
                let v = loss.value(z, h.table[z], f.table[z]);
                if !v.is_zero() {
                    out[i][j] += &w * v;
                }
            }
        }
    }
    out
}

/// Partite disagreement masses `μ^1{z | G_i(z) ≠ G_j(z)}`.
pub fn partite_disagreement_matrix(
    pspace: &PartiteSpace,
    mu: &PartiteProbTemplate,
    members: &[PartiteHypothesis],
) -> Vec<Vec<Rational>> {
    partite_loss_matrix(pspace, mu, &Loss::zero_one(pspace.n_labels()), members, members)
}

/// Compares `φ_k ∘ ι_kpart` and `ι_kpart ∘ φ_k` with the identities.
pub fn check_iota_inverse(space: &Space, pspace: &PartiteSpace) -> Result<bool> {
    let plan = PhiPlan::new(space, pspace, space.k())?;
    let forward = pspace
        .e1()
        .grid()
        .points()
        .all(|z| plan.apply(&iota_kpart(space, pspace, &z)) == z);
    let backward = space
        .ek()
        .points()
        .all(|x| iota_kpart(space, pspace, &plan.apply(&x)) == x);
    Ok(forward && backward)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardCheck {
    pub partite_atoms: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<ConfigPoint>,
}

/// Compares the pushforward of `μ^m` along `φ_m` with `(μ^kpart)^{⌊m/k⌋}`
/// atom by atom.
pub fn check_phi_measure_preserving(
    space: &Space,
    pspace: &PartiteSpace,
    mu: &ProbTemplate,
    m: usize,
) -> Result<PushforwardCheck> {
    let plan = PhiPlan::new(space, pspace, m)?;
    let pmu = partize_measure(pspace, mu)?;
    let mut pushed: BTreeMap<usize, Rational> = BTreeMap::new();
    for (x, w) in support_atoms(plan.source(), mu, space.k(), space.limits())? {
        *pushed.entry(plan.apply_code(&x)).or_insert_with(Rational::zero) += w;
    }
    let index = plan.target().index();
    let choices: Vec<Vec<(usize, Rational)>> = index
        .coords()
        .iter()
        .map(|c| {
            pmu.per_coordinate()[c.domain_pos]
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(v, w)| (v, w.clone()))
                .collect()
        })
        .collect();
    let atoms = weighted_product(&choices, "partite atoms", space.limits())?;
    let mut check = PushforwardCheck {
        partite_atoms: atoms.len(),
        mismatches: 0,
        first_mismatch: None,
    };
    let mut matched = 0usize;
    for (values, w) in atoms {
        let z = ConfigPoint::new(values);
        let code = plan.target().grid().encode(&z.values);
        let got = pushed.get(&code).cloned().unwrap_or_else(Rational::zero);
        if got != w {
            check.mismatches += 1;
            check.first_mismatch.get_or_insert(z);
        }
        if pushed.contains_key(&code) {
            matched += 1;
        }
    }
    // mass pushed outside the partite support
    check.mismatches += pushed.len() - matched;
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectivityCheck {
    pub source_points: usize,
    pub target_points: usize,
    pub injective: bool,
    pub surjective: bool,
}

impl BijectivityCheck {
    pub fn bijective(&self) -> bool {
        self.injective && self.surjective
    }
}

/// Counts images of `φ_m` over the whole grid of `E_m`.
pub fn check_phi_bijective(space: &Space, pspace: &PartiteSpace, m: usize) -> Result<BijectivityCheck> {
    let plan = PhiPlan::new(space, pspace, m)?;
    let mut hits = vec![0u32; plan.target().len()];
    for x in plan.source().points() {
        hits[plan.apply_code(&x)] += 1;
    }
    Ok(BijectivityCheck {
        source_points: plan.source().len(),
        target_points: plan.target().len(),
        injective: hits.iter().all(|&h| h <= 1),
        surjective: hits.iter().all(|&h| h >= 1),
    })
}

/// Number of points `x ∈ E_m` where `Φ_m(F*_m(x)) ≠ (F^kpart)*_{⌊m/k⌋}(φ_m(x))`.
pub fn check_commuting_diagram(space: &Space, pspace: &PartiteSpace, f: &Hypothesis, m: usize) -> Result<usize> {
    let k = space.k();
    let star = StarPlan::new(space, m)?;
    let phi = PhiPlan::new(space, pspace, m)?;
    let g = partize_hypothesis(space, pspace, f)?;
    let q = m / k;
    let target_index = phi.target().index();
    let e1 = pspace.e1();
    let alpha_plans: Vec<Vec<usize>> = all_tuples(q, k)
        .iter()
        .map(|a| target_index.alpha_plan(a, e1.index()))
        .collect();
    let mut mismatches = 0;
    for x in star.grid().points() {
        let left = big_phi_m(space, &star, &star.star(space, f, &x));
        let z = phi.apply(&x);
        let right: Vec<usize> = alpha_plans
            .iter()
            .map(|p| {
                let code: usize = p.iter().zip(e1.grid().strides()).map(|(&pos, s)| z.values[pos] * s).sum();
                g.table[code]
            })
            .collect();
        if left != right {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// `L_{μ,F,ℓ}(H) = L_{μ^kpart,F^kpart,ℓ^kpart}(H^kpart)` for every pair of members.
pub fn check_kpart_loss_equality(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "kpart-loss",
        "L_{mu,F,l}(H) = L_{mu^kpart,F^kpart,l^kpart}(H^kpart)",
    );
    let pspace = partize_space(space)?;
    let pmu = partize_measure(&pspace, mu)?;
    let pclass = partize_class(space, &pspace, class)?;
    let ploss = partize_loss(space, &pspace, loss)?;
    let left = crate::losses::LossMatrix::for_class(space, mu, loss, class)?.losses;
    let right = partite_loss_matrix(&pspace, &pmu, &ploss, pclass.members(), pclass.members());
    let mut mismatches = 0u64;
    for i in 0..class.len() {
        for j in 0..class.len() {
            if left[i][j] != right[i][j] {
                mismatches += 1;
                report.witness(format!(
                    "(F,H)=({i},{j}): {} != {}",
                    format_rational(&left[i][j]),
                    format_rational(&right[i][j])
                ));
            }
        }
    }
    report
        .quantity("pairs_checked", Quantity::Integer((class.len() * class.len()).into()))
        .quantity("mismatches", Quantity::Integer(mismatches.into()));
    report.verdict = if class.is_empty() {
        Verdict::Vacuous
    } else if mismatches > 0 {
        Verdict::Violated
    } else {
        Verdict::Verified
    };
    Ok(report)
}

/// Checks the basic partization identities on the class: `φ_k^{-1} = ι_kpart`, measure
/// preservation of `φ_m` and the commuting diagram for each `m`, plus
/// whether `φ_m` is a bijection when `k | m`.
///
/// Bijectivity is reported but does not enter the verdict: `E_m` carries
/// the coordinates of subsets inside one block of `[m]`, which `φ_m` never
/// reads, so for `m > k` the map is many-to-one.
pub fn audit_kpart_basics(space: &Space, mu: &ProbTemplate, class: &HypothesisClass, ms: &[usize]) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "kpart-basics",
        "phi_k^{-1} = iota_kpart; phi_m pushes mu^m to (mu^kpart)^{m/k}; Phi_m o F*_m = (F^kpart)*_{m/k} o phi_m",
    );
    let pspace = partize_space(space)?;
    let iota_ok = check_iota_inverse(space, &pspace)?;
    report.quantity("iota_inverse", Quantity::Bool(iota_ok));
    report.record(if iota_ok { Verdict::Verified } else { Verdict::Violated });
    if !iota_ok {
        report.witness("phi_k and iota_kpart are not mutually inverse");
    }
    for &m in ms {
        if m < space.k() {
            continue;
        }
        let push = check_phi_measure_preserving(space, &pspace, mu, m)?;
        report.quantity(format!("m={m}: pushforward_mismatches"), Quantity::Integer(push.mismatches.into()));
        if push.mismatches > 0 {
            report.record(Verdict::Violated);
            report.witness(format!("m={m}: pushforward differs at partite atom {:?}", push.first_mismatch));
        } else {
            report.record(Verdict::Verified);
        }
        let bij = check_phi_bijective(space, &pspace, m)?;
        report.quantity(format!("m={m}: phi_bijective"), Quantity::Bool(bij.bijective()));
        if m % space.k() == 0 && !bij.bijective() {
            report.note(format!(
                "m={m}: phi_m maps {} points onto {} and is not injective; the within-block coordinates of E_m are dropped",
                bij.source_points, bij.target_points
            ));
        }
        let mut diagram = 0usize;
        for f in class.members() {
            diagram += check_commuting_diagram(space, &pspace, f, m)?;
        }
        report.quantity(format!("m={m}: diagram_mismatches"), Quantity::Integer(diagram.into()));
        if diagram > 0 {
            report.record(Verdict::Violated);
            report.witness(format!("m={m}: commuting diagram fails at {diagram} points"));
        } else if !class.is_empty() {
            report.record(Verdict::Verified);
        }
    }
    Ok(report)
}

/// Departizes Haussler centers of `H^kpart` and re-verifies them as centers
/// of `H` at the same precision.
pub fn transfer_centers(
    space: &Space,
    mu: &ProbTemplate,
    loss: &Loss,
    class: &HypothesisClass,
    partite_centers: &CenterSet,
) -> Result<CenterSet> {
    let pspace = partize_space(space)?;
    let pmu = partize_measure(&pspace, mu)?;
    let pclass = partize_class(space, &pspace, class)?;
    let ploss = partize_loss(space, &pspace, loss)?;
    let eps = &partite_centers.epsilon;
    let partite = partite_loss_matrix(&pspace, &pmu, &ploss, pclass.members(), pclass.members());
    if partite_centers.centers.iter().any(|&c| c >= pclass.len()) || !verify_cover(&partite, &partite_centers.centers, eps) {
        return Err(Error::InvalidCenters(format!(
            "the given centers do not cover the partite class at precision {}",
            format_rational(eps)
        )));
    }
    let mut centers = Vec::with_capacity(partite_centers.centers.len());
    for &c in &partite_centers.centers {
        let h = departize(space, &pspace, &pclass.members()[c])?;
        centers.push(class.position(&h).ok_or(Error::NotInImage)?);
    }
    let losses = crate::losses::LossMatrix::for_class(space, mu, loss, class)?.losses;
    if !verify_cover(&losses, &centers, eps) {
        return Err(Error::InvalidCenters("departized centers fail to cover the class".into()));
    }
    Ok(CenterSet {
        centers,
        epsilon: eps.clone(),
        method: CoverMethod::Transferred,
    })
}

/// Greedy centers of `H^kpart` at each precision, departized with
/// [`transfer_centers`] and checked to cover `H` with the same precision and
/// cardinality.
pub fn audit_hp_transfer(
    space: &Space,
    mu: &ProbTemplate,
    loss: &Loss,
    class: &HypothesisClass,
    epsilons: &[Rational],
) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "hp-transfer",
        "centers of H^kpart at eps departize to centers of H at eps with the same cardinality",
    );
    if class.is_empty() {
        report.note("empty class");
        return Ok(report);
    }
    let pspace = partize_space(space)?;
    let pmu = partize_measure(&pspace, mu)?;
    let pclass = partize_class(space, &pspace, class)?;
    let ploss = partize_loss(space, &pspace, loss)?;
    let partite = partite_loss_matrix(&pspace, &pmu, &ploss, pclass.members(), pclass.members());
    let mut failures = 0usize;
    for eps in epsilons {
        let tag = format_rational(eps);
        let centers = match greedy_from_matrix(&partite, eps) {
            Ok(c) => c,
            Err(Error::Precondition(msg)) => {
                report.note(format!("eps={tag}: {msg}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let given = CenterSet {
            centers,
            epsilon: eps.clone(),
            method: CoverMethod::Greedy,
        };
        report.quantity(format!("eps={tag}: partite_centers"), Quantity::Integer(given.len().into()));
        match transfer_centers(space, mu, loss, class, &given) {
            Ok(t) if t.len() == given.len() && t.epsilon == given.epsilon => {
                report.record(Verdict::Verified);
            }
            Ok(t) => {
                failures += 1;
                report.record(Verdict::Violated);
                report.witness(format!("eps={tag}: {} partite centers became {}", given.len(), t.len()));
            }
            Err(e @ (Error::InvalidCenters(_) | Error::NotInImage)) => {
                failures += 1;
                report.record(Verdict::Violated);
                report.witness(format!("eps={tag}: partite centers {:?}: {e}", given.centers));
            }
            Err(e) => return Err(e),
        }
    }
    report.quantity("failures", Quantity::Integer(failures.into()));
    Ok(report)
}
