//! JSON instance files.
//!
//! Rationals are written as strings `"p/q"` (or `"p"`, or a JSON integer);
//! JSON floats are rejected. Hypothesis tables list one label per point of
//! `E_k` in grid order: coordinates follow `r([k])` ordered by size then
//! lexicographically, and the first coordinate varies slowest.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use vcnk_core::hypotheses::generators;
use vcnk_core::rational::{format_rational, parse_rational};
use vcnk_core::universe::subset_from;
use vcnk_core::{Error, Hypothesis, HypothesisClass, Limits, Loss, ProbTemplate, Rational, Space, Universe};

/// An exact rational as it appears in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExactVisitor;
        impl Visitor<'_> for ExactVisitor {
            type Value = Exact;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an exact rational such as \"1/3\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
                parse_rational(v)
                    .map(Exact)
                    .map_err(|_| E::custom(format!("not a rational: {v:?}")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
                Err(E::custom(format!("float {v} is not exact; write it as a string like \"1/3\"")))
            }
        }
        d.deserialize_any(ExactVisitor)
    }
}

/// A label given by name or by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseSpec {
    pub k: usize,
    pub ground_sets: Vec<Vec<String>>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub table: Vec<LabelRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Constants,
    AllFunctions {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_cap: Option<usize>,
    },
    Indicators,
    Random {
        count: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_cap: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<MemberSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<GeneratorSpec>,
}

/// Loss values are indexed by codes of `Λ^{S_k}`: a tuple over the
/// permutations of `[k]` in lexicographic order, first entry most significant.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossSpec {
    #[default]
    ZeroOne,
    Matrix {
        values: Vec<Vec<Exact>>,
    },
    PerPoint {
        tables: Vec<Vec<Vec<Exact>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Uniform { name: String },
    PointMass { name: String, atoms: Vec<usize> },
    Weights { name: String, weights: Vec<Vec<Exact>> },
}

impl MeasureSpec {
    pub fn name(&self) -> &str {
        match self {
            MeasureSpec::Uniform { name } | MeasureSpec::PointMass { name, .. } | MeasureSpec::Weights { name, .. } => name,
        }
    }
}

/// A collection of subsets of `[n]` for the cover bound, each subset a list
/// of elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSpec {
    pub n: usize,
    pub c: Exact,
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub universe: UniverseSpec,
    pub class: ClassSpec,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<Exact>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cover_collections: Vec<CollectionSpec>,
}

/// A parse or validation error with its location in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// JSON path such as `measures[1].weights[0]`; empty for syntax errors.
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match (self.path.is_empty(), self.line) {
            (false, Some(l)) => write!(f, "at {} (line {l}, column {}): {}", self.path, self.column.unwrap_or(0), self.message),
            (false, None) => write!(f, "at {}: {}", self.path, self.message),
            (true, Some(l)) => write!(f, "line {l}, column {}: {}", self.column.unwrap_or(0), self.message),
            (true, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug)]
pub enum SpecError {
    Parse(ParseError),
    /// A library error while expanding the instance, such as an explosion guard.
    Core { path: String, error: Error },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            SpecError::Parse(e) => e.fmt(f),
            SpecError::Core { path, error } => write!(f, "at {path}: {error}"),
        }
    }
}

impl std::error::Error for SpecError {}

fn at(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Parse(ParseError {
        path: path.into(),
        line: None,
        column: None,
        message: message.into(),
    })
}

/// Validation failures become parse errors; guards and other library
/// failures keep their kind.
fn core_at(path: impl Into<String>, error: Error) -> SpecError {
    match error {
        Error::ExplosionGuard { .. } => SpecError::Core { path: path.into(), error },
        e => at(path, e.to_string()),
    }
}

/// Reads the file structure; semantic checks happen in [`Instance::build`].
pub fn parse_text(text: &str) -> Result<InstanceFile, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SpecError::Parse(ParseError {
            path: if path == "." { String::new() } else { path },
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: strip_position(&inner.to_string()),
        })
    })?;
    Ok(file)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// A validated instance ready for the library.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub space: Space,
    pub class: HypothesisClass,
    pub loss: Loss,
    pub measures: Vec<(String, ProbTemplate)>,
    pub epsilons: Vec<Rational>,
    pub collections: Vec<(usize, Rational, Vec<u64>)>,
}

impl Instance {
    pub fn build(file: &InstanceFile, limits: Limits) -> Result<Instance, SpecError> {
        let u = &file.universe;
        let universe = Universe::new(u.k, u.ground_sets.clone(), u.labels.clone()).map_err(|e| core_at("universe", e))?;
        let space = Space::new(universe, limits).map_err(|e| core_at("universe", e))?;
        let class = build_class(&space, &file.class)?;
        let loss = build_loss(&space, &file.loss)?;
        let mut measures = Vec::new();
        for (i, m) in file.measures.iter().enumerate() {
            if measures.iter().any(|(n, _)| n == m.name()) {
                return Err(at(format!("measures[{i}].name"), format!("duplicate measure name {:?}", m.name())));
            }
            measures.push((m.name().to_string(), build_measure(&space, m, i)?));
        }
        if measures.is_empty() {
            measures.push(("uniform".to_string(), ProbTemplate::uniform(space.universe())));
        }
        let epsilons = if file.epsilons.is_empty() {
            vec![Rational::new(1.into(), 2.into()), Rational::new(1.into(), 4.into())]
        } else {
            file.epsilons.iter().map(|e| e.0.clone()).collect()
        };
        for (i, e) in epsilons.iter().enumerate() {
            if e <= &Rational::from_integer(0.into()) {
                return Err(at(format!("epsilons[{i}]"), "precision must be positive"));
            }
        }
        let mut collections = Vec::new();
        for (i, c) in file.cover_collections.iter().enumerate() {
            if c.n > 63 {
                return Err(at(format!("cover_collections[{i}].n"), "at most 63 elements"));
            }
            let mut sets = Vec::with_capacity(c.sets.len());
            for (j, s) in c.sets.iter().enumerate() {
                if let Some(&bad) = s.iter().find(|&&e| e >= c.n) {
                    return Err(at(format!("cover_collections[{i}].sets[{j}]"), format!("element {bad} outside [0, {})", c.n)));
                }
                sets.push(subset_from(s));
            }
            collections.push((c.n, c.c.0.clone(), sets));
        }
        Ok(Instance {
            name: file.name.clone().unwrap_or_else(|| "instance".to_string()),
            space,
            class,
            loss,
            measures,
            epsilons,
            collections,
        })
    }
}

fn build_class(space: &Space, spec: &ClassSpec) -> Result<HypothesisClass, SpecError> {
    let mut members = Vec::new();
    for (i, m) in spec.members.iter().enumerate() {
        let path = format!("class.members[{i}]");
        if m.table.len() != space.n_points() {
            return Err(at(
                format!("{path}.table"),
                format!("expected {} entries (one per point of E_k), got {}", space.n_points(), m.table.len()),
            ));
        }
        let mut table = Vec::with_capacity(m.table.len());
        for (j, l) in m.table.iter().enumerate() {
            let label = match l {
                LabelRef::Index(ix) if *ix < space.n_labels() => *ix,
                LabelRef::Index(ix) => return Err(at(format!("{path}.table[{j}]"), format!("label index {ix} out of range"))),
                LabelRef::Name(n) => space
                    .universe()
                    .label_index(n)
                    .ok_or_else(|| at(format!("{path}.table[{j}]"), format!("unknown label {n:?}")))?,
            };
            table.push(label);
        }
        members.push(Hypothesis::new(space, table, m.rank).map_err(|e| core_at(path, e))?);
    }
    for (i, g) in spec.generators.iter().enumerate() {
        let path = format!("class.generators[{i}]");
        let k = space.k();
        let made = match g {
            GeneratorSpec::Constants => generators::constants(space),
            GeneratorSpec::AllFunctions { rank_cap } => generators::all_functions(space, rank_cap.unwrap_or(k)),
            GeneratorSpec::Indicators => generators::indicators(space),
            GeneratorSpec::Random { count, seed, rank_cap } => generators::random(space, *count, *seed, rank_cap.unwrap_or(k)),
        };
        members.extend(made.map_err(|e| core_at(path, e))?);
    }
    Ok(HypothesisClass::dedup(spec.name.clone().unwrap_or_else(|| "class".to_string()), members))
}

fn exact_matrix(rows: &[Vec<Exact>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|e| e.0.clone()).collect()).collect()
}

fn build_loss(space: &Space, spec: &LossSpec) -> Result<Loss, SpecError> {
    let n_values = space.tuples().size();
    match spec {
        LossSpec::ZeroOne => Ok(Loss::zero_one(n_values)),
        LossSpec::Matrix { values } => {
            Loss::constant(n_values, exact_matrix(values), space.limits()).map_err(|e| core_at("loss.values", e))
        }
        LossSpec::PerPoint { tables } => Loss::per_point(
            space.n_points(),
            n_values,
            tables.iter().map(|t| exact_matrix(t)).collect(),
            space.limits(),
        )
        .map_err(|e| core_at("loss.tables", e)),
    }
}

fn build_measure(space: &Space, spec: &MeasureSpec, i: usize) -> Result<ProbTemplate, SpecError> {
    let u = space.universe();
    match spec {
        MeasureSpec::Uniform { .. } => Ok(ProbTemplate::uniform(u)),
        MeasureSpec::PointMass { atoms, .. } => {
            if atoms.len() != u.k() {
                return Err(at(format!("measures[{i}].atoms"), format!("expected {} atoms, got {}", u.k(), atoms.len())));
            }
            for (a, &e) in atoms.iter().enumerate() {
                if e >= u.set_size(a + 1) {
                    return Err(at(format!("measures[{i}].atoms[{a}]"), format!("element {e} out of range")));
                }
            }
            ProbTemplate::point_mass(u, atoms).map_err(|e| core_at(format!("measures[{i}]"), e))
        }
        MeasureSpec::Weights { weights, .. } => {
            let per_arity = exact_matrix(weights);
            ProbTemplate::new(u, per_arity).map_err(|e| match e {
                Error::NotNormalized { coordinate, sum } => at(
                    format!("measures[{i}].weights[{}]", coordinate - 1),
                    format!("normalization error: weights sum to {sum}, not 1"),
                ),
                e => core_at(format!("measures[{i}].weights"), e),
            })
        }
    }
}
