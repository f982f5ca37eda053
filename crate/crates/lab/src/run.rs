//! The commands behind the `vcnk-lab` binary.

use std::fmt;

use clap::ValueEnum;
use num_bigint::BigInt;
use serde_json::{json, Value};

use vcnk_core::dimensions::{audit_gamma_growth, natarajan_dimension, vcn_k, vcn_k_partite, FunctionFamily};
use vcnk_core::losses::{check_almost_metric, LossMatrix, LossValues};
use vcnk_core::packing::{
    audit_hp_to_vcnk, audit_hp_to_vcnk_partite, cover_bound_check, greedy_from_matrix, hamming_volume_check,
    optimal_from_matrix, packing_from_matrix, verify_cover,
};
use vcnk_core::pacsim::{audit_pac_to_hp, default_delta_grid, estimate_m_pac, PacAuditOptions, PacMode};
use vcnk_core::partization::{
    audit_hp_transfer, audit_kpart_basics, check_kpart_loss_equality, partize_class, partize_loss, partize_measure,
    partize_space,
};
use vcnk_core::rational::{format_rational, parse_rational, ratio};
use vcnk_core::universe::{factorial, subset_elements};
use vcnk_core::{AuditReport, Dimension, Error, Limits, Quantity, Rational, Verdict};

use crate::report::{digest, document};
use crate::spec::{parse_text, Instance, SpecError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum AuditName {
    Almostmetric,
    Coverbound,
    PacToHp,
    HpToVcnk,
    KpartBasics,
    KpartLoss,
    HpTransfer,
    GammaGrowth,
}

impl AuditName {
    pub const ALL: [AuditName; 8] = [
        AuditName::Almostmetric,
        AuditName::Coverbound,
        AuditName::PacToHp,
        AuditName::HpToVcnk,
        AuditName::KpartBasics,
        AuditName::KpartLoss,
        AuditName::HpTransfer,
        AuditName::GammaGrowth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditName::Almostmetric => "almostmetric",
            AuditName::Coverbound => "coverbound",
            AuditName::PacToHp => "pac-to-hp",
            AuditName::HpToVcnk => "hp-to-vcnk",
            AuditName::KpartBasics => "kpart-basics",
            AuditName::KpartLoss => "kpart-loss",
            AuditName::HpTransfer => "hp-transfer",
            AuditName::GammaGrowth => "gamma-growth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub seed: u64,
    pub trials: u64,
    pub explosion_cap: u128,
    pub delta_grid: Vec<Rational>,
    /// Overrides the instance's precisions when non-empty.
    pub epsilons: Vec<Rational>,
    pub mode: ModeName,
    pub m_cap: usize,
    pub only: Option<AuditName>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            trials: 200,
            explosion_cap: Limits::default().explosion_cap,
            delta_grid: default_delta_grid(),
            epsilons: Vec::new(),
            mode: ModeName::Exact,
            m_cap: vcnk_core::pacsim::DEFAULT_M_CAP,
            only: None,
        }
    }
}

impl Options {
    pub fn limits(&self) -> Limits {
        Limits {
            explosion_cap: self.explosion_cap,
            ..Limits::default()
        }
    }

    fn flags_value(&self) -> Value {
        json!({
            "seed": self.seed,
            "trials": self.trials,
            "explosion_cap": self.explosion_cap.to_string(),
            "delta_grid": self.delta_grid.iter().map(format_rational).collect::<Vec<_>>(),
            "epsilons": self.epsilons.iter().map(format_rational).collect::<Vec<_>>(),
            "mode": match self.mode { ModeName::Exact => "exact", ModeName::MonteCarlo => "monte-carlo" },
            "m_cap": self.m_cap,
            "only": self.only.map(AuditName::as_str),
        })
    }
}

/// Parses a comma-separated list of rationals.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .map(|t| parse_rational(t).map_err(|_| format!("not a rational: {:?}", t.trim())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dim,
    Pack,
    PacEstimate,
    Audit,
    Partize,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Dim => "dim",
            Command::Pack => "pack",
            Command::PacEstimate => "pac-estimate",
            Command::Audit => "audit",
            Command::Partize => "partize",
        }
    }
}

#[derive(Debug)]
pub enum LabError {
    Io(String),
    Spec(SpecError),
    Core(Error),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            LabError::Io(m) => f.write_str(m),
            LabError::Spec(e) => write!(f, "invalid instance: {e}"),
            LabError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for LabError {}

impl From<Error> for LabError {
    fn from(e: Error) -> Self {
        LabError::Core(e)
    }
}

impl From<SpecError> for LabError {
    fn from(e: SpecError) -> Self {
        LabError::Spec(e)
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EXPLOSION: i32 = 3;
pub const EXIT_VIOLATED: i32 = 4;

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Spec(SpecError::Parse(_)) => EXIT_PARSE,
            LabError::Spec(SpecError::Core { error: Error::ExplosionGuard { .. }, .. })
            | LabError::Core(Error::ExplosionGuard { .. }) => EXIT_EXPLOSION,
            _ => EXIT_OTHER,
        }
    }
}

/// The printed document and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: Value,
    pub exit_code: i32,
}

/// Runs a command on the text of an instance file.
pub fn run_text(command: Command, text: &str, options: &Options) -> Result<Outcome, LabError> {
    let file = parse_text(text)?;
    let instance = Instance::build(&file, options.limits())?;
    let flags = options.flags_value();
    let inputs = digest(&[
        command.as_str().as_bytes(),
        text.as_bytes(),
        serde_json::to_string(&flags).expect("flags serialize").as_bytes(),
    ]);
    if command == Command::Partize {
        let mut doc = partize_document(&instance)?;
        doc["inputs_digest"] = Value::String(inputs);
        return Ok(Outcome {
            document: doc,
            exit_code: EXIT_OK,
        });
    }
    let reports = match command {
        Command::Dim => vec![dim(&instance)?],
        Command::Pack => pack(&instance, options)?,
        Command::PacEstimate => vec![pac_estimate(&instance, options)?],
        Command::Audit => audit(&instance, options)?,
        Command::Partize => unreachable!("handled above"),
    };
    let violated = reports.iter().any(AuditReport::is_violated);
    Ok(Outcome {
        document: document(command.as_str(), &instance.name, &inputs, flags, &reports),
        exit_code: if violated { EXIT_VIOLATED } else { EXIT_OK },
    })
}

fn int(v: usize) -> Quantity {
    Quantity::Integer(BigInt::from(v))
}

fn dimension(d: Dimension) -> Quantity {
    match d {
        Dimension::Finite(v) => int(v),
        Dimension::NegInfinity => Quantity::Text("-inf".into()),
    }
}

fn epsilons<'a>(instance: &'a Instance, options: &'a Options) -> &'a [Rational] {
    if options.epsilons.is_empty() {
        &instance.epsilons
    } else {
        &options.epsilons
    }
}

/// Natarajan dimension over `E_k`, `VCN_k` and partite `VCN_k`, with the
/// identities that hold between them checked.
pub fn dim(instance: &Instance) -> Result<AuditReport, LabError> {
    let (space, class) = (&instance.space, &instance.class);
    let mut report = AuditReport::new(
        "dimensions",
        "VCN_1 = Nat when k = 1; VCN_k(H) = VCN_k(H^kpart) when rank <= 1",
    );
    let tables: Vec<Vec<usize>> = class.members().iter().map(|h| h.table().to_vec()).collect();
    let nat = natarajan_dimension(&FunctionFamily::new(space.n_points(), tables), space.limits())?;
    let vcn = vcn_k(space, class)?;
    let pspace = partize_space(space)?;
    let pclass = partize_class(space, &pspace, class)?;
    let pvcn = vcn_k_partite(&pspace, &pclass)?;
    report
        .quantity("k", int(space.k()))
        .quantity("class_size", int(class.len()))
        .quantity("rank", int(class.rank()))
        .quantity("natarajan_on_e_k", dimension(nat.dimension))
        .quantity("vcn_k", dimension(vcn.dimension))
        .quantity("vcn_k_partite", dimension(pvcn.dimension));
    if let (Some(slice), Some(w)) = (&vcn.slice, &vcn.witness) {
        report.witness(format!(
            "anchor {:?} at positions {:?}; shattered residual points {:?}",
            slice.anchor.values,
            slice.anchor_positions,
            w.points.iter().map(|&p| slice.residual_points[p].values.clone()).collect::<Vec<_>>()
        ));
    }
    if space.k() == 1 {
        let ok = vcn.dimension == nat.dimension;
        report.record(if ok { Verdict::Verified } else { Verdict::Violated });
        if !ok {
            report.witness(format!("VCN_1 = {} but Nat = {}", vcn.dimension, nat.dimension));
        }
    }
    if class.rank() <= 1 {
        let ok = vcn.dimension == pvcn.dimension;
        report.record(if ok { Verdict::Verified } else { Verdict::Violated });
        if !ok {
            report.witness(format!("VCN_k = {} but partite VCN_k = {}", vcn.dimension, pvcn.dimension));
        }
    }
    Ok(report)
}

/// Greedy and exact covers and greedy packings for every measure and precision.
pub fn pack(instance: &Instance, options: &Options) -> Result<Vec<AuditReport>, LabError> {
    let (space, class, loss) = (&instance.space, &instance.class, &instance.loss);
    let mut out = Vec::new();
    for (name, mu) in &instance.measures {
        let mut report = AuditReport::new(
            format!("packing:{name}"),
            "greedy and exact centers cover at eps; exact <= greedy; an eps-packing needs as many centers at eps/2 (metric losses)",
        );
        report.note("covers are computed for this measure only, so sizes are lower-bound evidence for m^HP");
        let lm = LossMatrix::for_class(space, mu, loss, class)?;
        for eps in epsilons(instance, options) {
            let tag = format!("eps={}", format_rational(eps));
            let greedy = match greedy_from_matrix(&lm.losses, eps) {
                Ok(g) => g,
                Err(Error::Precondition(m)) => {
                    report.note(format!("{tag}: {m}"));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let packing = packing_from_matrix(&lm.losses, eps);
            report
                .quantity(format!("{tag}: greedy_centers"), int(greedy.len()))
                .quantity(format!("{tag}: packing"), int(packing.len()));
            let mut ok = verify_cover(&lm.losses, &greedy, eps);
            match optimal_from_matrix(&lm.losses, eps, space.limits()) {
                Ok(opt) => {
                    report.quantity(format!("{tag}: optimal_centers"), int(opt.len()));
                    ok &= verify_cover(&lm.losses, &opt, eps) && opt.len() <= greedy.len();
                    if loss.metric() {
                        let half = eps / Rational::from_integer(2.into());
                        let opt_half = optimal_from_matrix(&lm.losses, &half, space.limits())?;
                        report.quantity(format!("{tag}: optimal_centers_at_half"), int(opt_half.len()));
                        ok &= opt_half.len() >= packing.len();
                    }
                }
                Err(Error::ExplosionGuard { .. }) => {
                    report.note(format!("{tag}: class too large for an exact cover"));
                }
                Err(e) => return Err(e.into()),
            }
            report.witness(format!("{tag}: greedy centers {greedy:?}"));
            report.record(if ok { Verdict::Verified } else { Verdict::Violated });
        }
        out.push(report);
    }
    Ok(out)
}

/// `m^PAC` of ERM over the grid of precisions and confidences, with
/// monotonicity in both checked.
pub fn pac_estimate(instance: &Instance, options: &Options) -> Result<AuditReport, LabError> {
    let (space, class, loss) = (&instance.space, &instance.class, &instance.loss);
    let mode = match options.mode {
        ModeName::Exact => PacMode::Exact,
        ModeName::MonteCarlo => PacMode::MonteCarlo {
            trials: options.trials,
            seed: options.seed,
        },
    };
    let mut report = AuditReport::new(
        "pac-estimate",
        "m_PAC(eps, delta) of ERM over the given measures and class members as targets; non-increasing in eps and delta",
    );
    let measures: Vec<_> = instance.measures.iter().map(|(_, m)| m.clone()).collect();
    let mut eps_sorted = epsilons(instance, options).to_vec();
    eps_sorted.sort();
    eps_sorted.dedup();
    let mut deltas = options.delta_grid.clone();
    deltas.sort();
    deltas.dedup();
    let mut table: Vec<Vec<Option<usize>>> = Vec::new();
    for eps in &eps_sorted {
        let mut row = Vec::new();
        for delta in &deltas {
            let tag = format!("eps={} delta={}", format_rational(eps), format_rational(delta));
            match estimate_m_pac(space, class, loss, eps, delta, &measures, class.members(), &mode, options.m_cap) {
                Ok(est) => {
                    report
                        .quantity(format!("{tag}: m_hat"), int(est.m_hat))
                        .quantity(format!("{tag}: failure_rate"), Quantity::Exact(est.observed_failure_rate.clone()));
                    if report.notes.last() != Some(&est.confidence_note) {
                        report.note(est.confidence_note.clone());
                    }
                    row.push(Some(est.m_hat));
                }
                Err(Error::BudgetExhausted { cap }) => {
                    report.quantity(format!("{tag}: m_hat"), Quantity::Text(format!("above {cap}")));
                    row.push(None);
                }
                Err(e) => return Err(e.into()),
            }
        }
        table.push(row);
    }
    let good = match options.mode {
        ModeName::Exact => Verdict::Verified,
        ModeName::MonteCarlo => Verdict::Consistent,
    };
    // None stands for "above the cap", which is larger than every value
    let key = |v: Option<usize>| v.map_or(usize::MAX, |m| m);
    let mut checked = 0usize;
    for i in 0..table.len() {
        for j in 0..deltas.len() {
            let here = key(table[i][j]);
            let mut check = |there: usize, what: &str| {
                checked += 1;
                if there > here {
                    report.record(Verdict::Violated);
                    report.witness(format!(
                        "m_hat grows with {what} at eps={} delta={}",
                        format_rational(&eps_sorted[i]),
                        format_rational(&deltas[j])
                    ));
                } else {
                    report.record(good);
                }
            };
            if i + 1 < table.len() {
                check(key(table[i + 1][j]), "eps");
            }
            if j + 1 < deltas.len() {
                check(key(table[i][j + 1]), "delta");
            }
        }
    }
    report.quantity("monotonicity_checks", int(checked));
    Ok(report)
}

fn renamed(mut r: AuditReport, suffix: &str) -> AuditReport {
    r.name = format!("{}:{suffix}", r.name);
    r
}

fn u_h_collection(instance: &Instance) -> Result<Option<(usize, Vec<u64>)>, LabError> {
    let vcn = vcn_k(&instance.space, &instance.class)?;
    let (Some(slice), Some(w)) = (vcn.slice, vcn.witness) else {
        return Ok(None);
    };
    let mut sets: Vec<u64> = slice
        .family
        .functions()
        .iter()
        .map(|f| {
            w.points
                .iter()
                .enumerate()
                .filter(|(i, &p)| f[p] == w.f1[*i])
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    sets.sort();
    sets.dedup();
    Ok(Some((w.points.len(), sets)))
}

fn coverbound(instance: &Instance) -> Result<Vec<AuditReport>, LabError> {
    let limits = instance.space.limits();
    let mut out = Vec::new();
    let mut cases: Vec<(String, usize, Rational, Vec<u64>)> = instance
        .collections
        .iter()
        .enumerate()
        .map(|(i, (n, c, sets))| (format!("collection {i}"), *n, c.clone(), sets.clone()))
        .collect();
    if let Some((n, sets)) = u_h_collection(instance)? {
        if n > 0 {
            for c in [ratio(1, 8), ratio(1, 4), ratio(3, 8)] {
                cases.push(("U_H of the VCN_k witness".into(), n, c, sets.clone()));
            }
        }
    }
    for (label, n, c, sets) in cases {
        let suffix = format!("{label}, c={}", format_rational(&c));
        match cover_bound_check(n, &sets, &c, limits) {
            Ok(r) => out.push(renamed(r, &suffix)),
            Err(Error::NotACover { witness }) => {
                let mut r = AuditReport::new(format!("coverbound:{suffix}"), "n <= log2|C| / (1 - h2(c))");
                let elems = subset_elements(witness);
                r.note(format!("not a cover at radius cn: {elems:?} is farther from every member, nothing to check"));
                out.push(r);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut ham = AuditReport::new("hamming-volume", "sum_{i <= floor(cn)} C(n,i) <= 2^{h2(c) n} for n <= 24, c in (0,1/2) step 1/64");
    let mut checks = 0usize;
    for n in 1..=24 {
        for j in 1..32 {
            let c = ratio(j, 64);
            let h = hamming_volume_check(n, &c)?;
            checks += 1;
            if h.holds {
                ham.record(Verdict::Verified);
            } else {
                ham.record(Verdict::Violated);
                ham.witness(format!("n={n}, c={}: volume {}", format_rational(&c), h.volume));
            }
        }
    }
    ham.quantity("checks", int(checks));
    out.push(ham);
    Ok(out)
}

/// `{s·k!/(4k^k), s·k!/(8k^k)}`, the precisions the HP to VCN_k audit uses.
pub fn hp_epsilons(k: usize, s: &Rational) -> Vec<Rational> {
    let kf = Rational::from_integer(BigInt::from(factorial(k)));
    let kk = Rational::from_integer(BigInt::from(k).pow(k as u32));
    [4, 8]
        .iter()
        .map(|d| s * &kf / (&kk * Rational::from_integer(BigInt::from(*d))))
        .collect()
}

fn hp_to_vcnk(instance: &Instance) -> Result<Vec<AuditReport>, LabError> {
    let (space, class, loss) = (&instance.space, &instance.class, &instance.loss);
    let s = loss.s_ell().cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
    let mut out = vec![audit_hp_to_vcnk(space, loss, class, &hp_epsilons(space.k(), &s))?];
    let pspace = partize_space(space)?;
    let pclass = partize_class(space, &pspace, class)?;
    let ploss = partize_loss(space, &pspace, loss)?;
    let ps = ploss.s_ell().cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
    let peps = [&ps / Rational::from_integer(4.into()), &ps / Rational::from_integer(8.into())];
    out.push(audit_hp_to_vcnk_partite(&pspace, &ploss, &pclass, &peps)?);
    Ok(out)
}

/// Runs every audit, or the one named by `options.only`.
pub fn audit(instance: &Instance, options: &Options) -> Result<Vec<AuditReport>, LabError> {
    let (space, class, loss) = (&instance.space, &instance.class, &instance.loss);
    let names: Vec<AuditName> = match options.only {
        Some(n) => vec![n],
        None => AuditName::ALL.to_vec(),
    };
    let measures: Vec<_> = instance.measures.iter().map(|(_, m)| m.clone()).collect();
    let mut out = Vec::new();
    for name in names {
        match name {
            AuditName::Almostmetric => {
                for (mname, mu) in &instance.measures {
                    out.push(renamed(check_almost_metric(space, mu, loss, class)?, mname));
                }
            }
            AuditName::Coverbound => out.extend(coverbound(instance)?),
            AuditName::PacToHp => {
                let opts = PacAuditOptions {
                    delta_grid: options.delta_grid.clone(),
                    m_cap: options.m_cap,
                    replay: true,
                };
                for eps in epsilons(instance, options) {
                    let r = audit_pac_to_hp(space, loss, class, eps, &measures, &opts)?;
                    out.push(renamed(r, &format!("eps={}", format_rational(eps))));
                }
            }
            AuditName::HpToVcnk => out.extend(hp_to_vcnk(instance)?),
            AuditName::KpartBasics => {
                let k = space.k();
                for (mname, mu) in &instance.measures {
                    out.push(renamed(audit_kpart_basics(space, mu, class, &[k, 2 * k])?, mname));
                }
            }
            AuditName::KpartLoss => {
                for (mname, mu) in &instance.measures {
                    out.push(renamed(check_kpart_loss_equality(space, mu, loss, class)?, mname));
                }
            }
            AuditName::HpTransfer => {
                for (mname, mu) in &instance.measures {
                    out.push(renamed(audit_hp_transfer(space, mu, loss, class, epsilons(instance, options))?, mname));
                }
            }
            AuditName::GammaGrowth => {
                let k = space.k();
                out.push(audit_gamma_growth(space, class, &[k, k + 1, k + 2])?);
            }
        }
    }
    Ok(out)
}

fn exact_rows(rows: &[Vec<Rational>]) -> Value {
    rows.iter()
        .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into()
}

/// The partized universe, class, loss and measures.
pub fn partize_document(instance: &Instance) -> Result<Value, LabError> {
    let space = &instance.space;
    let pspace = partize_space(space)?;
    let pclass = partize_class(space, &pspace, &instance.class)?;
    let ploss = partize_loss(space, &pspace, &instance.loss)?;
    let pu = pspace.universe();
    let coords: Vec<Value> = pspace
        .e1()
        .index()
        .coords()
        .iter()
        .map(|c| json!({ "domain": subset_elements(c.domain), "values": c.values }))
        .collect();
    let labels = pu.labels();
    let members: Vec<Value> = pclass
        .members()
        .iter()
        .map(|h| json!({ "table": h.table().iter().map(|&l| labels[l].clone()).collect::<Vec<_>>() }))
        .collect();
    let loss = match ploss.values() {
        LossValues::ZeroOne => json!({ "kind": "zero-one" }),
        LossValues::Constant(m) => json!({ "kind": "matrix", "values": exact_rows(m) }),
        LossValues::PerPoint(t) => json!({ "kind": "per-point", "tables": t.iter().map(|m| exact_rows(m)).collect::<Vec<_>>() }),
    };
    let mut measures = Vec::new();
    for (name, mu) in &instance.measures {
        let pmu = partize_measure(&pspace, mu)?;
        measures.push(json!({ "name": name, "weights": exact_rows(pmu.per_coordinate()) }));
    }
    Ok(json!({
        "command": "partize",
        "instance": instance.name,
        "partite_universe": {
            "k": pu.k(),
            "coordinate_sets": pu.coordinate_sets(),
            "labels": labels,
            "e1_coordinates": coords,
        },
        "class": { "name": pclass.name(), "members": members },
        "loss": loss,
        "measures": measures,
    }))
}
