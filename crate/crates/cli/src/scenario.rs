//! Scenario files: TOML with a schema tag, resolved into core objects.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use valring::ci::Tower;
use valring::pseudo::{artin_schreier, geometric, ladder, planted_tower, PlantedParams, PseudoSequence};
use valring::{FieldConfig, GroupElement, MultiPoly, Series};

pub const SCENARIO_SCHEMA: &str = "valring-scenario/1";

/// Input problem; exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn bad(field: &str, msg: impl std::fmt::Display) -> InputError {
    InputError(format!("field `{field}`: {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Absolute precision cap, an exponent vector like `"8"` or `"8,0"`.
    pub precision: String,
    #[serde(default)]
    pub horizon: Option<usize>,
    pub field: FieldSpec,
    #[serde(default)]
    pub sequences: Vec<SequenceSpec>,
    #[serde(default)]
    pub towers: Vec<TowerDef>,
    #[serde(default)]
    pub tasks: Vec<TaskEntry>,
}

/// A task plus an optional expected error kind (e.g. `"HorizonExhausted"`);
/// a task that fails with that kind counts as a success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    #[serde(flatten)]
    pub spec: TaskSpec,
    #[serde(default)]
    pub expect_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u32,
    pub q: Option<u32>,
    #[serde(default = "one")]
    pub rank: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub base: u32,
    #[serde(default)]
    pub mu: Option<String>,
    #[serde(default)]
    pub sigma: Option<String>,
    #[serde(default)]
    pub offset: Option<String>,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceKind {
    Geometric { window: usize },
    Ladder(LadderSpec),
    ArtinSchreier(LadderSpec),
    Explicit {
        terms: Vec<String>,
        #[serde(default)]
        limit: Option<String>,
        #[serde(default)]
        witness: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: SequenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TowerKind {
    Planted { levels: Vec<LadderSpec> },
    Images { sequence: String, hs: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: TowerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Affine { start: String, step: String },
    Table { table: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskSpec {
    CheckConvergence {
        sequence: String,
    },
    Classify {
        sequence: String,
        max_degree: u32,
        max_support: usize,
        #[serde(default)]
        palette: Option<Vec<String>>,
        #[serde(default)]
        fundamental_bound: Option<String>,
        #[serde(default)]
        budget: Option<u64>,
    },
    Image {
        sequence: String,
        poly: String,
    },
    Factor {
        sequence: String,
        poly: String,
        #[serde(default)]
        s_min: Option<u32>,
    },
    FactorBatch {
        sequence: String,
        count: usize,
        #[serde(default)]
        s_min: Option<u32>,
    },
    Localize {
        sequence: String,
        poly: String,
        t: String,
        #[serde(default)]
        s_min: Option<u32>,
    },
    Threshold {
        mode: String,
        shape: Vec<usize>,
        betas: Vec<String>,
        multipliers: Vec<Vec<i64>>,
        sequences: Vec<AxisSpec>,
        #[serde(default)]
        bounds: Vec<String>,
        #[serde(default)]
        horizons: Option<Vec<usize>>,
    },
    Hasse {
        poly: String,
        order: u32,
    },
    Taylor {
        poly: String,
        center: String,
    },
    PseudoDivide {
        f: String,
        h: String,
    },
    ReduceTower {
        f: String,
        levels: Vec<String>,
        #[serde(default)]
        strict: bool,
    },
    Presentation {
        tower: String,
        indices: Vec<usize>,
    },
    Morphism {
        tower: String,
        from: Vec<usize>,
        to: Vec<usize>,
    },
    ElementReduction {
        tower: String,
        poly: String,
        #[serde(default)]
        indices: Option<Vec<usize>>,
    },
}

impl TaskSpec {
    pub fn op(&self) -> &'static str {
        match self {
            TaskSpec::CheckConvergence { .. } => "check_convergence",
            TaskSpec::Classify { .. } => "classify",
            TaskSpec::Image { .. } => "image",
            TaskSpec::Factor { .. } => "factor",
            TaskSpec::FactorBatch { .. } => "factor_batch",
            TaskSpec::Localize { .. } => "localize",
            TaskSpec::Threshold { .. } => "threshold",
            TaskSpec::Hasse { .. } => "hasse",
            TaskSpec::Taylor { .. } => "taylor",
            TaskSpec::PseudoDivide { .. } => "pseudo_divide",
            TaskSpec::ReduceTower { .. } => "reduce_tower",
            TaskSpec::Presentation { .. } => "presentation",
            TaskSpec::Morphism { .. } => "morphism",
            TaskSpec::ElementReduction { .. } => "element_reduction",
        }
    }
}

/// Parses and checks the schema tag; TOML errors keep their line/column.
pub fn parse_scenario(text: &str) -> Result<Scenario, InputError> {
    let sc: Scenario = toml::from_str(text).map_err(|e| InputError(format!("scenario parse error: {e}")))?;
    if sc.schema != SCENARIO_SCHEMA {
        return Err(bad("schema", format!("expected {SCENARIO_SCHEMA:?}, got {:?}", sc.schema)));
    }
    Ok(sc)
}

/// A sequence with whatever ground truth its generator knows.
#[derive(Clone, Debug)]
pub struct ResolvedSeq {
    pub seq: PseudoSequence,
    pub limit: Option<Series>,
    pub witness: Option<MultiPoly>,
    pub palette: Vec<GroupElement>,
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub field: FieldConfig,
    pub precision: GroupElement,
    pub horizon: usize,
    pub seed: u64,
    pub sequences: BTreeMap<String, ResolvedSeq>,
    pub towers: BTreeMap<String, Tower>,
}

pub const DEFAULT_HORIZON: usize = 16;

pub fn group(field: &str, text: &str, rank: usize) -> Result<GroupElement, InputError> {
    let g = GroupElement::parse(text).map_err(|e| bad(field, e))?;
    if g.rank() != rank {
        return Err(bad(field, format!("{text:?} has rank {}, expected {rank}", g.rank())));
    }
    Ok(g)
}

pub fn series(field: &str, text: &str, f: &FieldConfig) -> Result<Series, InputError> {
    Series::parse(text, f).map_err(|e| bad(field, e))
}

pub fn poly(field: &str, text: &str, f: &FieldConfig, vars: &[&str]) -> Result<MultiPoly, InputError> {
    MultiPoly::parse(text, f, vars).map_err(|e| bad(field, e))
}

fn ladder_params(path: &str, l: &LadderSpec, f: &FieldConfig) -> Result<PlantedParams, InputError> {
    let rank = f.rank();
    let mut unit = vec![0i64; rank];
    unit[0] = 1;
    Ok(PlantedParams {
        field: f.clone(),
        base: l.base,
        mu: match &l.mu {
            Some(m) => group(&format!("{path}.mu"), m, rank)?,
            None => GroupElement::zero(rank),
        },
        sigma: match &l.sigma {
            Some(s) => group(&format!("{path}.sigma"), s, rank)?,
            None => GroupElement::from_ints(&unit),
        },
        offset: match &l.offset {
            Some(o) => series(&format!("{path}.offset"), o, f)?,
            None => Series::zero(f),
        },
        window: l.window,
    })
}

/// Builds the field, sequences and towers; flag overrides win over the file.
pub fn resolve(
    sc: &Scenario,
    seed: Option<u64>,
    precision: Option<&str>,
    horizon: Option<usize>,
) -> Result<Resolved, InputError> {
    let fs = &sc.field;
    let field = FieldConfig::new(fs.p, fs.q.unwrap_or(fs.p), fs.rank).map_err(|e| bad("field.p", e))?;
    let precision = group("precision", precision.unwrap_or(&sc.precision), fs.rank)?;
    let mut sequences = BTreeMap::new();
    for (i, s) in sc.sequences.iter().enumerate() {
        let path = format!("sequences[{i}]");
        let r = match &s.kind {
            SequenceKind::Geometric { window } => {
                let g = geometric(&field, *window).map_err(|e| bad(&format!("{path}.window"), e))?;
                ResolvedSeq { seq: g.seq, limit: Some(g.limit), witness: g.witness, palette: g.palette }
            }
            SequenceKind::Ladder(l) | SequenceKind::ArtinSchreier(l) => {
                let p = ladder_params(&path, l, &field)?;
                let inst = if matches!(s.kind, SequenceKind::Ladder(_)) { ladder(&p) } else { artin_schreier(&p) }
                    .map_err(|e| bad(&path, e))?;
                ResolvedSeq { seq: inst.seq, limit: Some(inst.limit), witness: inst.witness, palette: inst.palette }
            }
            SequenceKind::Explicit { terms, limit, witness } => {
                let window = terms
                    .iter()
                    .enumerate()
                    .map(|(k, t)| series(&format!("{path}.terms[{k}]"), t, &field))
                    .collect::<Result<Vec<_>, _>>()?;
                let seq = PseudoSequence::new(window, None).map_err(|e| bad(&format!("{path}.terms"), e))?;
                let limit = limit.as_ref().map(|l| series(&format!("{path}.limit"), l, &field)).transpose()?;
                let witness = witness.as_ref().map(|w| poly(&format!("{path}.witness"), w, &field, &["X"])).transpose()?;
                let mut palette = vec![GroupElement::zero(fs.rank)];
                if let Some(w) = &witness {
                    for c in w.terms().values() {
                        palette.extend(c.terms().iter().map(|(e, _)| e.clone()));
                    }
                }
                palette.sort();
                palette.dedup();
                ResolvedSeq { seq, limit, witness, palette }
            }
        };
        if sequences.insert(s.name.clone(), r).is_some() {
            return Err(bad(&format!("{path}.name"), format!("duplicate sequence {:?}", s.name)));
        }
    }
    let mut towers = BTreeMap::new();
    for (i, t) in sc.towers.iter().enumerate() {
        let path = format!("towers[{i}]");
        let tower = match &t.kind {
            TowerKind::Planted { levels } => {
                let params = levels
                    .iter()
                    .enumerate()
                    .map(|(k, l)| ladder_params(&format!("{path}.levels[{k}]"), l, &field))
                    .collect::<Result<Vec<_>, _>>()?;
                let planted = planted_tower(&params).map_err(|e| bad(&path, e))?;
                Tower::from_planted(&planted).map_err(|e| bad(&path, e))?
            }
            TowerKind::Images { sequence, hs } => {
                let s = sequences
                    .get(sequence)
                    .ok_or_else(|| bad(&format!("{path}.sequence"), format!("unknown sequence {sequence:?}")))?;
                let x = s.limit.clone().ok_or_else(|| bad(&format!("{path}.sequence"), "sequence has no limit"))?;
                let hs = hs
                    .iter()
                    .enumerate()
                    .map(|(k, h)| poly(&format!("{path}.hs[{k}]"), h, &field, &["X"]))
                    .collect::<Result<Vec<_>, _>>()?;
                Tower::from_images(x, s.seq.clone(), hs).map_err(|e| bad(&path, e))?
            }
        };
        if towers.insert(t.name.clone(), tower).is_some() {
            return Err(bad(&format!("{path}.name"), format!("duplicate tower {:?}", t.name)));
        }
    }
    for (i, task) in sc.tasks.iter().enumerate() {
        let (seq, tower) = match &task.spec {
            TaskSpec::CheckConvergence { sequence }
            | TaskSpec::Classify { sequence, .. }
            | TaskSpec::Image { sequence, .. }
            | TaskSpec::Factor { sequence, .. }
            | TaskSpec::FactorBatch { sequence, .. }
            | TaskSpec::Localize { sequence, .. } => (Some(sequence), None),
            TaskSpec::Presentation { tower, .. }
            | TaskSpec::Morphism { tower, .. }
            | TaskSpec::ElementReduction { tower, .. } => (None, Some(tower)),
            _ => (None, None),
        };
        if let Some(s) = seq {
            if !sequences.contains_key(s) {
                return Err(bad(&format!("tasks[{i}].sequence"), format!("unknown sequence {s:?}")));
            }
        }
        if let Some(t) = tower {
            if !towers.contains_key(t) {
                return Err(bad(&format!("tasks[{i}].tower"), format!("unknown tower {t:?}")));
            }
        }
    }
    Ok(Resolved {
        field,
        precision,
        horizon: horizon.or(sc.horizon).unwrap_or(DEFAULT_HORIZON),
        seed: seed.unwrap_or(sc.seed),
        sequences,
        towers,
    })
}
