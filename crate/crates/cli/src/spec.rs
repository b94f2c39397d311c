//! Run specifications: parsing, validation and serialization.

use serde_json::{Map, Value};

use fockline::experiments::{ChshSettings, SteeringConfig, TagMode};
use fockline::fock::Pol;
use fockline::optics::BsConvention;

use crate::error::{CliError, SpecError};

/// Upper bound on the number of sweep grid points.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// The three-photon steering protocol (wire value `"ryff"`).
    Steering,
    Chsh,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Steering => "ryff",
            Experiment::Chsh => "chsh",
            Experiment::Custom => "custom",
        }
    }

    fn tasks(self) -> &'static [Task] {
        match self {
            Experiment::Steering => &[Task::Exact, Task::Sample, Task::Sweep, Task::AllCoincidences],
            Experiment::Chsh | Experiment::Custom => &[Task::Exact, Task::Sample],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Exact,
    Sample,
    Sweep,
    AllCoincidences,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Exact => "exact",
            Task::Sample => "sample",
            Task::Sweep => "sweep",
            Task::AllCoincidences => "all-coincidences",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Polarizer and preparation angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Angles {
    fn default() -> Self {
        Angles { a: 0.0, b: 0.0, c: 45.0 }
    }
}

/// Inclusive grid over `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Sweep {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.from + k as f64 * self.step).collect()
    }

    fn points(&self) -> f64 {
        ((self.to - self.from) / self.step + 1e-9).floor() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSource {
    pub path: String,
    pub angle: f64,
    pub tag: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSource {
    pub paths: (String, String),
    pub angle: f64,
}

/// One optical element; angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementSpec {
    BeamSplitter {
        inputs: (String, String),
        outputs: (String, String),
        transmissivity: f64,
        convention: Option<BsConvention>,
    },
    Pbs {
        input: String,
        axis: f64,
        transmit: String,
        reflect: String,
    },
    Rotator {
        path: String,
        angle: f64,
    },
    PhaseShifter {
        path: String,
        pol: Pol,
        phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectSpec {
    pub path: String,
    pub count: u32,
    pub filter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CustomSpec {
    pub photons: Vec<PhotonSource>,
    pub pairs: Vec<PairSource>,
    pub elements: Vec<ElementSpec>,
    pub detect: Vec<DetectSpec>,
    pub undetected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub angles: Angles,
    pub pol3_axis: Option<f64>,
    pub analyze_nu1: bool,
    pub chsh: ChshSettings,
    pub bs_convention: BsConvention,
    pub tags: TagMode,
    pub task: Task,
    pub sweep: Option<Sweep>,
    pub samples: Option<u64>,
    pub seed: u64,
    pub format: Format,
    pub output: Option<String>,
    pub custom: Option<CustomSpec>,
}

impl RunSpec {
    pub fn new(experiment: Experiment) -> Self {
        RunSpec {
            experiment,
            angles: Angles::default(),
            pol3_axis: None,
            analyze_nu1: false,
            chsh: ChshSettings::TSIRELSON,
            bs_convention: BsConvention::Symmetric,
            tags: TagMode::Identical,
            task: Task::Exact,
            sweep: None,
            samples: None,
            seed: 0,
            format: Format::Json,
            output: None,
            custom: None,
        }
    }

    pub fn steering_config(&self) -> SteeringConfig {
        SteeringConfig {
            a_deg: self.angles.a,
            b_deg: self.angles.b,
            c_deg: self.angles.c,
            convention: self.bs_convention,
            tags: self.tags,
            pol3_axis_deg: self.pol3_axis,
            analyze_nu1: self.analyze_nu1,
        }
    }

    /// Cross-field rules. Run again after command-line overrides.
    pub fn validate(&self) -> Result<(), SpecError> {
        if !self.experiment.tasks().contains(&self.task) {
            return Err(SpecError::new(
                "task",
                format!("'{}' is not available for experiment '{}'", self.task.name(), self.experiment.name()),
            ));
        }
        match (self.task, &self.sweep) {
            (Task::Sweep, None) => return Err(SpecError::new("sweep", "required when task is sweep")),
            (Task::Sweep, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(SpecError::new("sweep", "only used by task sweep")),
        }
        match (self.task, self.samples) {
            (Task::Sample, None) => return Err(SpecError::new("samples", "required when task is sample")),
            (Task::Sample, Some(0)) => return Err(SpecError::new("samples", "must be at least 1")),
            (Task::Sample, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(SpecError::new("samples", "only used by task sample")),
        }
        if self.format == Format::Csv && self.task != Task::Sweep {
            return Err(SpecError::new("format", "csv output requires task sweep"));
        }
        if let Some(s) = &self.sweep {
            if !(s.from.is_finite() && s.to.is_finite() && s.step.is_finite()) {
                return Err(SpecError::new("sweep", "bounds must be finite"));
            }
            if s.from > s.to {
                return Err(SpecError::new("sweep.to", "must not be below sweep.from"));
            }
            if s.step <= 0.0 {
                return Err(SpecError::new("sweep.step", "must be positive"));
            }
            if s.points() > MAX_SWEEP_POINTS as f64 {
                return Err(SpecError::new(
                    "sweep.step",
                    format!("grid exceeds {MAX_SWEEP_POINTS} points"),
                ));
            }
        }
        if self.experiment == Experiment::Custom && self.custom.is_none() {
            return Err(SpecError::new("custom", "required when experiment is custom"));
        }
        Ok(())
    }

    /// Canonical JSON form; `parse_value` of it reproduces `self`.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("experiment".into(), self.experiment.name().into());
        match self.experiment {
            Experiment::Steering => {
                let mut angles = Map::new();
                angles.insert("a".into(), self.angles.a.into());
                angles.insert("b".into(), self.angles.b.into());
                angles.insert("c".into(), self.angles.c.into());
                m.insert("angles".into(), angles.into());
                if let Some(axis) = self.pol3_axis {
                    m.insert("pol3_axis".into(), axis.into());
                }
                m.insert("analyze_nu1".into(), self.analyze_nu1.into());
                m.insert("tags".into(), self.tags.name().into());
            }
            Experiment::Chsh => {
                let c = &self.chsh;
                let mut chsh = Map::new();
                for (k, v) in [("a1", c.a1), ("a2", c.a2), ("b1", c.b1), ("b2", c.b2)] {
                    chsh.insert(k.into(), v.into());
                }
                m.insert("chsh".into(), chsh.into());
            }
            Experiment::Custom => {}
        }
        m.insert("bs_convention".into(), self.bs_convention.name().into());
        m.insert("task".into(), self.task.name().into());
        if let Some(s) = &self.sweep {
            let mut sweep = Map::new();
            sweep.insert("param".into(), "c".into());
            sweep.insert("from".into(), s.from.into());
            sweep.insert("to".into(), s.to.into());
            sweep.insert("step".into(), s.step.into());
            m.insert("sweep".into(), sweep.into());
        }
        if let Some(n) = self.samples {
            m.insert("samples".into(), n.into());
        }
        m.insert("seed".into(), self.seed.into());
        m.insert("format".into(), self.format.name().into());
        if let Some(out) = &self.output {
            m.insert("output".into(), out.clone().into());
        }
        if let Some(c) = &self.custom {
            m.insert("custom".into(), custom_to_json(c));
        }
        Value::Object(m)
    }
}

fn custom_to_json(c: &CustomSpec) -> Value {
    let photons: Vec<Value> = c
        .photons
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("path".into(), p.path.clone().into());
            m.insert("angle".into(), p.angle.into());
            m.insert("tag".into(), p.tag.into());
            m.into()
        })
        .collect();
    let pairs: Vec<Value> = c
        .pairs
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("paths".into(), vec![p.paths.0.clone(), p.paths.1.clone()].into());
            m.insert("angle".into(), p.angle.into());
            m.into()
        })
        .collect();
    let elements: Vec<Value> = c.elements.iter().map(element_to_json).collect();
    let detect: Vec<Value> = c
        .detect
        .iter()
        .map(|d| {
            let mut m = Map::new();
            m.insert("path".into(), d.path.clone().into());
            m.insert("count".into(), d.count.into());
            if let Some(f) = d.filter {
                m.insert("filter".into(), f.into());
            }
            m.into()
        })
        .collect();
    let mut m = Map::new();
    m.insert("photons".into(), photons.into());
    m.insert("pairs".into(), pairs.into());
    m.insert("elements".into(), elements.into());
    m.insert("detect".into(), detect.into());
    m.insert("undetected".into(), c.undetected.clone().into());
    m.into()
}

fn element_to_json(e: &ElementSpec) -> Value {
    let mut m = Map::new();
    match e {
        ElementSpec::BeamSplitter {
            inputs,
            outputs,
            transmissivity,
            convention,
        } => {
            m.insert("type".into(), "beam_splitter".into());
            m.insert("inputs".into(), vec![inputs.0.clone(), inputs.1.clone()].into());
            m.insert("outputs".into(), vec![outputs.0.clone(), outputs.1.clone()].into());
            m.insert("transmissivity".into(), (*transmissivity).into());
            if let Some(c) = convention {
                m.insert("convention".into(), c.name().into());
            }
        }
        ElementSpec::Pbs {
            input,
            axis,
            transmit,
            reflect,
        } => {
            m.insert("type".into(), "pbs".into());
            m.insert("input".into(), input.clone().into());
            m.insert("axis".into(), (*axis).into());
            m.insert("transmit".into(), transmit.clone().into());
            m.insert("reflect".into(), reflect.clone().into());
        }
        ElementSpec::Rotator { path, angle } => {
            m.insert("type".into(), "rotator".into());
            m.insert("path".into(), path.clone().into());
            m.insert("angle".into(), (*angle).into());
        }
        ElementSpec::PhaseShifter { path, pol, phase } => {
            m.insert("type".into(), "phase_shifter".into());
            m.insert("path".into(), path.clone().into());
            m.insert("pol".into(), pol.to_string().into());
            m.insert("phase".into(), (*phase).into());
        }
    }
    m.into()
}

/// Parses and validates a spec from JSON text.
pub fn parse_spec(text: &str) -> Result<RunSpec, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(parse_value(&value)?)
}

/// Validates an already-parsed JSON value.
pub fn parse_value(value: &Value) -> Result<RunSpec, SpecError> {
    let mut top = Fields::new(String::new(), value)?;
    let experiment = match top.string("experiment")? {
        None => return Err(SpecError::new("experiment", "required")),
        Some((s, p)) => match s {
            "ryff" => Experiment::Steering,
            "chsh" => Experiment::Chsh,
            "custom" => Experiment::Custom,
            other => return Err(SpecError::new(p, format!("expected one of ryff, chsh, custom, got '{other}'"))),
        },
    };
    let mut spec = RunSpec::new(experiment);
    let only_for = |key: &str, exp: Experiment, field: &Fields| -> Result<(), SpecError> {
        if field.has(key) && experiment != exp {
            Err(SpecError::new(
                field.child(key),
                format!("only used by experiment {}", exp.name()),
            ))
        } else {
            Ok(())
        }
    };
    for key in ["angles", "pol3_axis", "analyze_nu1", "tags"] {
        only_for(key, Experiment::Steering, &top)?;
    }
    only_for("chsh", Experiment::Chsh, &top)?;
    only_for("custom", Experiment::Custom, &top)?;

    if let Some(mut angles) = top.object("angles")? {
        if let Some(a) = angles.number("a")? {
            spec.angles.a = a;
        }
        if let Some(b) = angles.number("b")? {
            spec.angles.b = b;
        }
        if let Some(c) = angles.number("c")? {
            spec.angles.c = c;
        }
        angles.finish()?;
    }
    spec.pol3_axis = top.number("pol3_axis")?;
    if let Some(b) = top.boolean("analyze_nu1")? {
        spec.analyze_nu1 = b;
    }
    if let Some(mut chsh) = top.object("chsh")? {
        let c = &mut spec.chsh;
        for (key, slot) in [("a1", &mut c.a1), ("a2", &mut c.a2), ("b1", &mut c.b1), ("b2", &mut c.b2)] {
            if let Some(v) = chsh.number(key)? {
                *slot = v;
            }
        }
        chsh.finish()?;
    }
    if let Some((s, p)) = top.string("bs_convention")? {
        spec.bs_convention = convention(s, p)?;
    }
    if let Some((s, p)) = top.string("tags")? {
        spec.tags = match s {
            "identical" => TagMode::Identical,
            "distinct" => TagMode::Distinct,
            other => return Err(SpecError::new(p, format!("expected identical or distinct, got '{other}'"))),
        };
    }
    if let Some((s, p)) = top.string("task")? {
        spec.task = match s {
            "exact" => Task::Exact,
            "sample" => Task::Sample,
            "sweep" => Task::Sweep,
            "all-coincidences" => Task::AllCoincidences,
            other => {
                return Err(SpecError::new(
                    p,
                    format!("expected one of exact, sample, sweep, all-coincidences, got '{other}'"),
                ))
            }
        };
    }
    if let Some(mut sweep) = top.object("sweep")? {
        match sweep.string("param")? {
            None => return Err(SpecError::new(sweep.child("param"), "required")),
            Some(("c", _)) => {}
            Some((other, p)) => return Err(SpecError::new(p, format!("only \"c\" can be swept, got '{other}'"))),
        }
        let from = sweep.required_number("from")?;
        let to = sweep.required_number("to")?;
        let step = sweep.required_number("step")?;
        sweep.finish()?;
        spec.sweep = Some(Sweep { from, to, step });
    }
    spec.samples = top.u64("samples")?;
    if let Some(seed) = top.u64("seed")? {
        spec.seed = seed;
    }
    if let Some((s, p)) = top.string("format")? {
        spec.format = match s {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => return Err(SpecError::new(p, format!("expected json or csv, got '{other}'"))),
        };
    }
    spec.output = top.string("output")?.map(|(s, _)| s.to_string());
    if let Some(custom) = top.object("custom")? {
        spec.custom = Some(parse_custom(custom)?);
    }
    top.finish()?;
    spec.validate()?;
    Ok(spec)
}

fn convention(s: &str, path: String) -> Result<BsConvention, SpecError> {
    match s {
        "symmetric" => Ok(BsConvention::Symmetric),
        "real" => Ok(BsConvention::Real),
        other => Err(SpecError::new(path, format!("expected symmetric or real, got '{other}'"))),
    }
}

fn parse_custom(mut f: Fields) -> Result<CustomSpec, SpecError> {
    let mut c = CustomSpec::default();
    for mut p in f.objects("photons")? {
        let path = p.required_string("path")?;
        let angle = p.number("angle")?.unwrap_or(0.0);
        let tag = match p.u64("tag")? {
            None => 0,
            Some(t) => u32::try_from(t).map_err(|_| SpecError::new(p.child("tag"), "out of range"))?,
        };
        p.finish()?;
        c.photons.push(PhotonSource { path, angle, tag });
    }
    for mut p in f.objects("pairs")? {
        let paths = p.string_pair("paths")?;
        let angle = p.number("angle")?.unwrap_or(0.0);
        p.finish()?;
        c.pairs.push(PairSource { paths, angle });
    }
    for e in f.objects("elements")? {
        c.elements.push(parse_element(e)?);
    }
    for mut d in f.objects("detect")? {
        let path = d.required_string("path")?;
        let count = match d.u64("count")? {
            None => 1,
            Some(n) => u32::try_from(n).map_err(|_| SpecError::new(d.child("count"), "out of range"))?,
        };
        let filter = d.number("filter")?;
        d.finish()?;
        c.detect.push(DetectSpec { path, count, filter });
    }
    if let Some((v, path)) = f.take("undetected") {
        let items = v
            .as_array()
            .ok_or_else(|| SpecError::new(path.clone(), "expected array of strings"))?;
        for (i, item) in items.iter().enumerate() {
            let s = item
                .as_str()
                .ok_or_else(|| SpecError::new(format!("{path}[{i}]"), "expected string"))?;
            c.undetected.push(s.to_string());
        }
    }
    f.finish()?;
    if c.photons.is_empty() && c.pairs.is_empty() {
        return Err(SpecError::new(f.path, "needs at least one photon or pair"));
    }
    Ok(c)
}

fn parse_element(mut e: Fields) -> Result<ElementSpec, SpecError> {
    let Some((kind, kind_path)) = e.string("type")? else {
        return Err(SpecError::new(e.child("type"), "required"));
    };
    let spec = match kind {
        "beam_splitter" => ElementSpec::BeamSplitter {
            inputs: e.string_pair("inputs")?,
            outputs: e.string_pair("outputs")?,
            transmissivity: e.number("transmissivity")?.unwrap_or(0.5),
            convention: match e.string("convention")? {
                None => None,
                Some((s, p)) => Some(convention(s, p)?),
            },
        },
        "pbs" => ElementSpec::Pbs {
            input: e.required_string("input")?,
            axis: e.required_number("axis")?,
            transmit: e.required_string("transmit")?,
            reflect: e.required_string("reflect")?,
        },
        "rotator" => ElementSpec::Rotator {
            path: e.required_string("path")?,
            angle: e.required_number("angle")?,
        },
        "phase_shifter" => ElementSpec::PhaseShifter {
            path: e.required_string("path")?,
            pol: match e.string("pol")? {
                None => return Err(SpecError::new(e.child("pol"), "required")),
                Some(("H", _)) => Pol::H,
                Some(("V", _)) => Pol::V,
                Some((other, p)) => return Err(SpecError::new(p, format!("expected H or V, got '{other}'"))),
            },
            phase: e.required_number("phase")?,
        },
        other => {
            return Err(SpecError::new(
                kind_path,
                format!("expected one of beam_splitter, pbs, rotator, phase_shifter, got '{other}'"),
            ))
        }
    };
    e.finish()?;
    Ok(spec)
}

/// Walks one JSON object, tracking which keys were consumed so that unknown
/// keys can be reported with their full path.
struct Fields<'a> {
    path: String,
    map: &'a Map<String, Value>,
    used: Vec<String>,
}

impl<'a> Fields<'a> {
    fn new(path: String, value: &'a Value) -> Result<Self, SpecError> {
        match value {
            Value::Object(map) => Ok(Fields {
                path,
                map,
                used: Vec::new(),
            }),
            _ => Err(SpecError::new(
                if path.is_empty() { "<root>".to_string() } else { path },
                "expected object",
            )),
        }
    }

    fn child(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<(&'a Value, String)> {
        let v = self.map.get(key)?;
        self.used.push(key.to_string());
        Some((v, self.child(key)))
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, SpecError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, p)) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(SpecError::new(p, "expected number")),
            },
        }
    }

    fn required_number(&mut self, key: &str) -> Result<f64, SpecError> {
        self.number(key)?
            .ok_or_else(|| SpecError::new(self.child(key), "required"))
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, SpecError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, p)) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| SpecError::new(p, "expected non-negative integer")),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>, SpecError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, p)) => v
                .as_bool()
                .map(Some)
                .ok_or_else(|| SpecError::new(p, "expected boolean")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<(&'a str, String)>, SpecError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, p)) => match v.as_str() {
                Some(s) => Ok(Some((s, p))),
                None => Err(SpecError::new(p, "expected string")),
            },
        }
    }

    fn required_string(&mut self, key: &str) -> Result<String, SpecError> {
        match self.string(key)? {
            Some((s, _)) => Ok(s.to_string()),
            None => Err(SpecError::new(self.child(key), "required")),
        }
    }

    fn string_pair(&mut self, key: &str) -> Result<(String, String), SpecError> {
        let Some((v, p)) = self.take(key) else {
            return Err(SpecError::new(self.child(key), "required"));
        };
        match v.as_array().map(Vec::as_slice) {
            Some([Value::String(x), Value::String(y)]) => Ok((x.clone(), y.clone())),
            _ => Err(SpecError::new(p, "expected array of two strings")),
        }
    }

    fn object(&mut self, key: &str) -> Result<Option<Fields<'a>>, SpecError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, p)) => Fields::new(p, v).map(Some),
        }
    }

    fn objects(&mut self, key: &str) -> Result<Vec<Fields<'a>>, SpecError> {
        let Some((v, p)) = self.take(key) else {
            return Ok(Vec::new());
        };
        let items = v
            .as_array()
            .ok_or_else(|| SpecError::new(p.clone(), "expected array"))?;
        items
            .iter()
            .enumerate()
            .map(|(i, item)| Fields::new(format!("{p}[{i}]"), item))
            .collect()
    }

    fn finish(&self) -> Result<(), SpecError> {
        match self.map.keys().find(|k| !self.used.contains(k)) {
            Some(k) => Err(SpecError::new(self.child(k), "unknown key")),
            None => Ok(()),
        }
    }
}
