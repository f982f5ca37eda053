//! Loss functions on label tuples, their constants `s(ℓ)` and `‖ℓ‖∞`, exact
//! total loss and disagreement mass, and the almost-metric inequalities.
//!
//! A [`Loss`] is stored over abstract point and value codes: for a k-ary
//! loss the points are the codes of `E_k` and the values are codes of
//! `Λ^{S_k}`; for a k-partite loss the points are the codes of the partite
//! `E_1` and the values are the partite labels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::audit::{AuditReport, Quantity, Verdict};
use crate::error::{Error, Result};
use crate::hypotheses::{Hypothesis, HypothesisClass, Space};
use crate::rational::{format_rational, is_non_negative, Rational};
use crate::universe::{support_atoms, Limits, ProbTemplate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LossValues {
    /// `ℓ(x, y, y') = 1[y ≠ y']`.
    ZeroOne,
    /// `matrix[y][y']`, the same at every point.
    Constant(Vec<Vec<Rational>>),
    /// `tables[x][y][y']`.
    PerPoint(Vec<Vec<Vec<Rational>>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loss {
    values: LossValues,
    n_values: usize,
    s_ell: Option<Rational>,
    sup_norm: Rational,
    zero_diagonal: bool,
    separated: bool,
    metric: bool,
    zero: Rational,
    one: Rational,
}

fn check_matrix(m: &[Vec<Rational>], n: usize, at: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidLoss(format!("{at}: expected a {n}x{n} table")));
    }
    if let Some(v) = m.iter().flatten().find(|v| !is_non_negative(v)) {
        return Err(Error::InvalidLoss(format!("{at}: negative value {v}")));
    }
    Ok(())
}

struct Flags {
    s_ell: Option<Rational>,
    sup_norm: Rational,
    zero_diagonal: bool,
    metric: bool,
}

fn matrix_flags(matrices: &[&Vec<Vec<Rational>>], n: usize) -> Flags {
    let mut s_ell: Option<Rational> = None;
    let mut sup_norm = Rational::zero();
    let mut zero_diagonal = true;
    let mut metric = true;
    for m in matrices {
        for y in 0..n {
            for yp in 0..n {
                let v = &m[y][yp];
                if *v > sup_norm {
                    sup_norm = v.clone();
                }
                if y == yp {
                    zero_diagonal &= v.is_zero();
                } else {
                    if s_ell.as_ref().is_none_or(|s| v < s) {
                        s_ell = Some(v.clone());
                    }
                    metric &= !v.is_zero() && *v == m[yp][y];
                }
            }
        }
        if metric {
            'tri: for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if m[a][c] > &m[a][b] + &m[b][c] {
                            metric = false;
                            break 'tri;
                        }
                    }
                }
            }
        }
    }
    Flags {
        s_ell,
        sup_norm,
        zero_diagonal,
        metric: metric && zero_diagonal,
    }
}

impl Loss {
    fn from_flags(values: LossValues, n_values: usize, flags: Flags) -> Self {
        let separated = flags.zero_diagonal && flags.s_ell.as_ref().is_none_or(|s| s > &Rational::zero());
        Loss {
            values,
            n_values,
            s_ell: flags.s_ell,
            sup_norm: flags.sup_norm,
            zero_diagonal: flags.zero_diagonal,
            separated,
            metric: flags.metric,
            zero: Rational::zero(),
            one: Rational::one(),
        }
    }

    pub fn zero_one(n_values: usize) -> Self {
        let distinct = n_values > 1;
        Loss::from_flags(
            LossValues::ZeroOne,
            n_values,
            Flags {
                s_ell: distinct.then(Rational::one),
                sup_norm: if distinct { Rational::one() } else { Rational::zero() },
                zero_diagonal: true,
                metric: true,
            },
        )
    }

    pub fn constant(n_values: usize, matrix: Vec<Vec<Rational>>, limits: &Limits) -> Result<Self> {
        check_matrix(&matrix, n_values, "loss table")?;
        limits.guard("metric check", (n_values as u128).pow(3))?;
        let flags = matrix_flags(&[&matrix], n_values);
        Ok(Loss::from_flags(LossValues::Constant(matrix), n_values, flags))
    }

    pub fn per_point(n_points: usize, n_values: usize, tables: Vec<Vec<Vec<Rational>>>, limits: &Limits) -> Result<Self> {
        if tables.len() != n_points {
            return Err(Error::InvalidLoss(format!(
                "expected {n_points} per-point tables, got {}",
                tables.len()
            )));
        }
        for (x, m) in tables.iter().enumerate() {
            check_matrix(m, n_values, &format!("point {x}"))?;
        }
        limits.guard("metric check", (n_values as u128).pow(3).saturating_mul(n_points as u128))?;
        let refs: Vec<&Vec<Vec<Rational>>> = tables.iter().collect();
        let flags = matrix_flags(&refs, n_values);
        Ok(Loss::from_flags(LossValues::PerPoint(tables), n_values, flags))
    }

    pub fn values(&self) -> &LossValues {
        &self.values
    }

    pub fn n_values(&self) -> usize {
        self.n_values
    }

    pub fn is_zero_one(&self) -> bool {
        matches!(self.values, LossValues::ZeroOne)
    }

    pub fn depends_on_point(&self) -> bool {
        matches!(self.values, LossValues::PerPoint(_))
    }

    /// `ℓ(x, y, y')` for point code `x` and value codes `y`, `y'`.
    pub fn value(&self, x: usize, y: usize, yp: usize) -> &Rational {
        match &self.values {
            LossValues::ZeroOne => {
                if y == yp {
                    &self.zero
                } else {
                    &self.one
                }
            }
            LossValues::Constant(m) => &m[y][yp],
            LossValues::PerPoint(t) => &t[x][y][yp],
        }
    }

    /// `s(ℓ)`, the least loss between distinct values; `None` stands for
    /// `+∞` when there is only one value.
    pub fn s_ell(&self) -> Option<&Rational> {
        self.s_ell.as_ref()
    }

    pub fn sup_norm(&self) -> &Rational {
        &self.sup_norm
    }

    pub fn bounded(&self) -> bool {
        true
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    pub fn separated(&self) -> bool {
        self.separated
    }

    pub fn metric(&self) -> bool {
        self.metric
    }

    /// The coordinate arity an exact expectation must enumerate, given the
    /// largest rank of the hypotheses involved.
    pub fn relevant_arity(&self, k: usize, rank: usize) -> usize {
        if self.depends_on_point() {
            k
        } else {
            rank
        }
    }
}

/// Support atoms of `μ^k` with their codes in `E_k`.
#[derive(Debug, Clone)]
pub struct Atoms {
    pub codes: Vec<usize>,
    pub weights: Vec<Rational>,
}

impl Atoms {
    pub fn new(space: &Space, mu: &ProbTemplate, arity: usize) -> Result<Self> {
        let atoms = support_atoms(space.ek(), mu, arity, space.limits())?;
        let mut codes = Vec::with_capacity(atoms.len());
        let mut weights = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            codes.push(space.ek().encode(&x));
            weights.push(w);
        }
        Ok(Atoms { codes, weights })
    }

    /// Atoms sufficient for every expectation involving `hypotheses` under `loss`.
    pub fn for_hypotheses<'a>(
        space: &Space,
        mu: &ProbTemplate,
        loss: &Loss,
        hypotheses: impl IntoIterator<Item = &'a Hypothesis>,
    ) -> Result<Self> {
        let rank = hypotheses.into_iter().map(Hypothesis::rank).max().unwrap_or(0);
        Atoms::new(space, mu, loss.relevant_arity(space.k(), rank))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// `L_{μ,F,ℓ}(H) = E_{x∼μ^k}[ℓ(x, H*_k(x), F*_k(x))]`, exactly.
pub fn total_loss(space: &Space, mu: &ProbTemplate, f: &Hypothesis, loss: &Loss, h: &Hypothesis) -> Result<Rational> {
    let atoms = Atoms::for_hypotheses(space, mu, loss, [f, h])?;
    Ok(atoms
        .codes
        .iter()
        .zip(&atoms.weights)
        .map(|(&x, w)| w * loss.value(x, space.k_pattern(h, x), space.k_pattern(f, x)))
        .sum())
}

/// `M(F, H) = μ^k{x | F*_k(x) ≠ H*_k(x)}`.
pub fn disagreement(space: &Space, mu: &ProbTemplate, f: &Hypothesis, h: &Hypothesis) -> Result<Rational> {
    let rank = f.rank().max(h.rank());
    let atoms = Atoms::new(space, mu, rank)?;
    Ok(atoms
        .codes
        .iter()
        .zip(&atoms.weights)
        .filter(|(&x, _)| space.k_pattern(f, x) != space.k_pattern(h, x))
        .map(|(_, w)| w.clone())
        .sum())
}

/// Pairwise total losses and disagreement masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossMatrix {
    /// `losses[i][j] = L_{μ,F_i,ℓ}(H_j)` for target `F_i` and candidate `H_j`.
    pub losses: Vec<Vec<Rational>>,
    /// `disagreement[i][j] = M(F_i, H_j)`.
    pub disagreement: Vec<Vec<Rational>>,
}

impl LossMatrix {
    pub fn new(space: &Space, mu: &ProbTemplate, loss: &Loss, targets: &[Hypothesis], candidates: &[Hypothesis]) -> Result<Self> {
        let atoms = Atoms::for_hypotheses(space, mu, loss, targets.iter().chain(candidates))?;
        Ok(LossMatrix::from_atoms(space, &atoms, loss, targets, candidates))
    }

    pub fn from_atoms(space: &Space, atoms: &Atoms, loss: &Loss, targets: &[Hypothesis], candidates: &[Hypothesis]) -> Self {
        let mut losses = vec![vec![Rational::zero(); candidates.len()]; targets.len()];
        let mut disagreement = losses.clone();
        for (&x, w) in atoms.codes.iter().zip(&atoms.weights) {
            let tp: Vec<usize> = targets.iter().map(|f| space.k_pattern(f, x)).collect();
            let cp: Vec<usize> = candidates.iter().map(|h| space.k_pattern(h, x)).collect();
            for (i, &fy) in tp.iter().enumerate() {
                for (j, &hy) in cp.iter().enumerate() {
                    if fy != hy {
                        disagreement[i][j] += w;
                    }
                    if !loss.is_zero_one() {
                        let v = loss.value(x, hy, fy);
                        if !v.is_zero() {
                            losses[i][j] += w * v;
                        }
                    }
                }
            }
        }
        if loss.is_zero_one() {
            losses = disagreement.clone();
        }
        LossMatrix { losses, disagreement }
    }

    /// Losses within one class, targets and candidates both the members.
    pub fn for_class(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass) -> Result<Self> {
        LossMatrix::new(space, mu, loss, class.members(), class.members())
    }
}

/// Checks `s(ℓ)·M ≤ L ≤ ‖ℓ‖∞·M` for every pair and, for separated `ℓ`,
/// `L_F(F') ≤ (‖ℓ‖∞/s(ℓ))(L_F(H) + L_{F'}(H))` for every triple.
pub fn check_almost_metric(space: &Space, mu: &ProbTemplate, loss: &Loss, class: &HypothesisClass) -> Result<AuditReport> {
    let mut report = AuditReport::new(
        "almostmetric",
        "s(l)*M(F,H) <= L_{mu,F,l}(H) <= |l|_inf*M(F,H); if l separated: L_{mu,F,l}(F') <= (|l|_inf/s(l))*(L_{mu,F,l}(H) + L_{mu,F',l}(H))",
    );
    let lm = LossMatrix::for_class(space, mu, loss, class)?;
    let n = class.len();
    let mut pairs = 0u64;
    let mut triples = 0u64;
    let mut violations = 0u64;
    let sup = loss.sup_norm().clone();
    for i in 0..n {
        for j in 0..n {
            let l = &lm.losses[i][j];
            let m = &lm.disagreement[i][j];
            pairs += 1;
            if let Some(s) = loss.s_ell() {
                if &(s * m) > l {
                    violations += 1;
                    report.witness(format!("lower sandwich fails for (F,H)=({i},{j}): L={}, M={}", format_rational(l), format_rational(m)));
                }
            }
            if loss.zero_diagonal() && l > &(&sup * m) {
                violations += 1;
                report.witness(format!("upper sandwich fails for (F,H)=({i},{j}): L={}, M={}", format_rational(l), format_rational(m)));
            }
        }
    }
    if !loss.zero_diagonal() {
        report.note("upper sandwich skipped: the loss is positive on some diagonal entry, where it cannot hold");
    }
    match (loss.separated(), loss.s_ell()) {
        (true, Some(s)) => {
            let factor = &sup / s;
            for f in 0..n {
                for fp in 0..n {
                    for h in 0..n {
                        triples += 1;
                        let rhs = &factor * (&lm.losses[f][h] + &lm.losses[fp][h]);
                        if lm.losses[f][fp] > rhs {
                            violations += 1;
                            report.witness(format!(
                                "quasi-triangle fails for (F,F',H)=({f},{fp},{h}): {} > {}",
                                format_rational(&lm.losses[f][fp]),
                                format_rational(&rhs)
                            ));
                        }
                    }
                }
            }
        }
        (true, None) => {
            report.note("quasi-triangle skipped: a single label tuple makes every total loss zero");
        }
        _ => {
            report.note("quasi-triangle skipped: the loss is not separated");
        }
    }
    report
        .quantity("pairs_checked", Quantity::Integer(pairs.into()))
        .quantity("triples_checked", Quantity::Integer(triples.into()))
        .quantity("violations", Quantity::Integer(violations.into()))
        .quantity("sup_norm", Quantity::Exact(sup));
    if let Some(s) = loss.s_ell() {
        report.quantity("s_ell", Quantity::Exact(s.clone()));
    }
    report.verdict = if n == 0 {
        Verdict::Vacuous
    } else if violations > 0 {
        Verdict::Violated
    } else {
        Verdict::Verified
    };
    Ok(report)
}

/// `min_{H ∈ class} L_{μ,F,ℓ}(H) = 0`; false for the empty class.
pub fn is_realizable(space: &Space, f: &Hypothesis, class: &HypothesisClass, loss: &Loss, mu: &ProbTemplate) -> Result<bool> {
    let lm = LossMatrix::new(space, mu, loss, core::slice::from_ref(f), class.members())?;
    Ok(lm.losses[0].iter().any(Zero::is_zero))
}
