//! Dispatches a validated spec to the simulator and renders the result.

use std::sync::Arc;

use serde_json::{Map, Value};

use fockline::evolution::apply;
use fockline::experiments::{
    all_coincidences, build_steering, chsh, chsh_sampled, predicted_nu1, run_steering, sweep_c,
    ChshResult, SampledChsh, SteeringReport, SweepRow, CROSS_PATTERNS,
};
use fockline::fock::{DensityMatrix, ModeRegistry, PureState};
use fockline::measurement::{
    conditional_state, detection_distribution, fidelity, pattern_probability, polarization_angle,
    sample_events, DetectionPattern, SampleCounts, PURE_TOLERANCE,
};
use fockline::optics::{BsConvention, Circuit, Element};
use fockline::{HERMITICITY_TOLERANCE, NORM_TOLERANCE, PRUNE_THRESHOLD, UNITARITY_TOLERANCE};

use crate::error::CliError;
use crate::format;
use crate::spec::{CustomSpec, ElementSpec, Experiment, Format, RunSpec, Task};

/// Report key for the fidelity against the closed-form steered state.
pub const FIDELITY_KEY: &str = "fidelity_eq7";

/// Header row of the sweep table.
pub const CSV_HEADER: [&str; 5] = ["c_deg", "p_coinc", FIDELITY_KEY, "purity", "nu1_angle_deg"];

/// Slack allowed when checking that reported probabilities lie in [0, 1].
const PROBABILITY_SLACK: f64 = 1e-9;

/// Runs `spec` and returns the serialized output.
pub fn execute(spec: &RunSpec) -> Result<String, CliError> {
    spec.validate()?;
    if spec.format == Format::Csv {
        return sweep_csv(&run_sweep(spec)?);
    }
    let result = match (spec.experiment, spec.task) {
        (Experiment::Steering, Task::Exact) => steering_exact(&run_steering(&spec.steering_config())?)?,
        (Experiment::Steering, Task::Sample) => steering_sample(spec)?,
        (Experiment::Steering, Task::Sweep) => {
            let rows: Vec<Value> = run_sweep(spec)?.iter().map(sweep_row_json).collect();
            obj([("rows", rows.into())])
        }
        (Experiment::Steering, Task::AllCoincidences) => steering_all(spec)?,
        (Experiment::Chsh, Task::Exact) => chsh_exact(&chsh(&spec.chsh)?)?,
        (Experiment::Chsh, Task::Sample) => chsh_sample(&chsh_sampled(
            &spec.chsh,
            spec.samples.unwrap_or(1),
            spec.seed,
            fockline::Exec::default(),
        )?)?,
        (Experiment::Custom, task) => custom(spec, task)?,
        _ => unreachable!("validate() rejects unsupported tasks"),
    };
    let mut out = header(spec);
    if let Value::Object(m) = result {
        out.extend(m);
    }
    Ok(format::to_json(&Value::Object(out)))
}

fn header(spec: &RunSpec) -> Map<String, Value> {
    let tolerances = obj([
        ("prune", PRUNE_THRESHOLD.into()),
        ("norm", NORM_TOLERANCE.into()),
        ("unitarity", UNITARITY_TOLERANCE.into()),
        ("hermiticity", HERMITICITY_TOLERANCE.into()),
        ("pure", PURE_TOLERANCE.into()),
    ]);
    let convention = obj([
        ("bs_convention", spec.bs_convention.name().into()),
        ("beam_splitter", convention_matrix(spec.bs_convention).into()),
        ("angles", "degrees".into()),
        ("gamma", "signed c - a".into()),
    ]);
    let tool = obj([
        ("name", "fockline".into()),
        ("version", env!("CARGO_PKG_VERSION").into()),
    ]);
    let mut m = Map::new();
    m.insert("tool".into(), tool);
    m.insert("experiment".into(), spec.experiment.name().into());
    m.insert("task".into(), spec.task.name().into());
    m.insert("convention".into(), convention);
    m.insert("tolerances".into(), tolerances);
    m.insert("spec".into(), spec.to_json());
    m
}

fn convention_matrix(c: BsConvention) -> &'static str {
    match c {
        BsConvention::Symmetric => "[[sqrt(T), i sqrt(R)], [i sqrt(R), sqrt(T)]]",
        BsConvention::Real => "[[sqrt(T), sqrt(R)], [sqrt(R), -sqrt(T)]]",
    }
}

fn obj<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn check_probability(name: &str, p: f64) -> Result<f64, CliError> {
    if p.is_finite() && (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        Ok(p)
    } else {
        Err(CliError::Invariant(format!("{name} = {p} is not a probability")))
    }
}

fn density_json(rho: &DensityMatrix) -> Value {
    let basis: Vec<Value> = rho.basis().iter().map(|b| b.to_string().into()).collect();
    let m = rho.matrix();
    let part = |f: fn(&fockline::Complex64) -> f64| -> Value {
        (0..m.nrows())
            .map(|i| Value::from((0..m.ncols()).map(|j| f(&m[(i, j)])).collect::<Vec<f64>>()))
            .collect::<Vec<Value>>()
            .into()
    };
    obj([("basis", basis.into()), ("real", part(|z| z.re)), ("imag", part(|z| z.im))])
}

fn steering_exact(r: &SteeringReport) -> Result<Value, CliError> {
    let mut patterns = Map::new();
    for (name, p) in &r.pattern_probabilities {
        patterns.insert(name.clone(), check_probability(name, *p)?.into());
    }
    let [h, v] = r.predicted.components();
    let mut m = Map::new();
    m.insert("gamma_deg".into(), r.gamma_deg.into());
    m.insert("p_coinc".into(), check_probability("p_coinc", r.p_coinc)?.into());
    m.insert("pattern_probabilities".into(), patterns.into());
    m.insert(FIDELITY_KEY.into(), check_probability(FIDELITY_KEY, r.fidelity_predicted)?.into());
    m.insert("purity".into(), r.purity.into());
    match &r.nu1_angle_deg {
        Ok(a) => {
            m.insert("nu1_angle_deg".into(), (*a).into());
        }
        Err(reason) => {
            m.insert("nu1_angle_deg".into(), Value::Null);
            m.insert("nu1_angle_unavailable".into(), reason.clone().into());
        }
    }
    m.insert("relative_phase_deg".into(), opt(r.relative_phase_deg));
    m.insert(
        "predicted_nu1".into(),
        obj([
            ("h", obj([("re", h.re.into()), ("im", h.im.into())])),
            ("v", obj([("re", v.re.into()), ("im", v.im.into())])),
        ]),
    );
    if r.config.analyze_nu1 {
        m.insert("nu1_transmission".into(), opt(r.nu1_transmission));
        m.insert("nu1_transmission_predicted".into(), opt(r.nu1_transmission_predicted));
    }
    m.insert("conditional".into(), density_json(&r.conditional));
    m.insert("note".into(), r.note.into());
    Ok(m.into())
}

fn counts_json(counts: &SampleCounts) -> Value {
    let events: Vec<Value> = counts
        .counts
        .iter()
        .map(|(k, n)| obj([("event", k.to_string().into()), ("count", (*n).into())]))
        .collect();
    obj([
        ("samples", counts.n_shots.into()),
        ("seed", counts.seed.into()),
        ("events", events.into()),
    ])
}

fn steering_sample(spec: &RunSpec) -> Result<Value, CliError> {
    let setup = build_steering(&spec.steering_config())?;
    let state = setup.evolve()?;
    let shots = spec.samples.unwrap_or(1);
    let counts = sample_events(&state, shots, spec.seed);
    let mut coincidences = Vec::new();
    for (x, y) in CROSS_PATTERNS {
        let hits = counts.count_where(|o| o.path_count(x) == 1 && o.path_count(y) == 1);
        let exact = pattern_probability(&state, &DetectionPattern::coincidence(&[x, y], &[]))?;
        let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
        coincidences.push(obj([
            ("pattern", format!("{x},{y}").into()),
            ("count", hits.into()),
            ("frequency", (hits as f64 / shots as f64).into()),
            ("exact", check_probability("exact", exact)?.into()),
            ("sigma", sigma.into()),
        ]));
    }
    let mut m = match counts_json(&counts) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    m.insert("coincidences".into(), coincidences.into());
    Ok(m.into())
}

fn run_sweep(spec: &RunSpec) -> Result<Vec<SweepRow>, CliError> {
    let grid = spec.sweep.as_ref().map(|s| s.grid()).unwrap_or_default();
    let rows = sweep_c(&spec.steering_config(), &grid)?;
    for r in &rows {
        check_probability("p_coinc", r.p_coinc)?;
        check_probability(FIDELITY_KEY, r.fidelity_predicted)?;
    }
    Ok(rows)
}

fn sweep_row_json(r: &SweepRow) -> Value {
    obj([
        ("c_deg", r.c_deg.into()),
        ("p_coinc", r.p_coinc.into()),
        (FIDELITY_KEY, r.fidelity_predicted.into()),
        ("purity", r.purity.into()),
        ("nu1_angle_deg", opt(r.nu1_angle_deg)),
    ])
}

fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format::number(r.c_deg),
            format::number(r.p_coinc),
            format::number(r.fidelity_predicted),
            format::number(r.purity),
            r.nu1_angle_deg.map(format::number).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn steering_all(spec: &RunSpec) -> Result<Value, CliError> {
    let cfg = spec.steering_config();
    let predicted = predicted_nu1(cfg.a_deg, cfg.c_deg);
    let mut results = Vec::new();
    for r in all_coincidences(&cfg)? {
        let angle = polarization_angle(&r.conditional).map(f64::to_degrees);
        let mut m = Map::new();
        m.insert("pattern".into(), r.pattern.to_string().into());
        m.insert("probability".into(), check_probability("probability", r.probability)?.into());
        m.insert(FIDELITY_KEY.into(), fidelity(&r.conditional, &predicted)?.into());
        m.insert("purity".into(), r.conditional.purity().into());
        m.insert("nu1_angle_deg".into(), opt(angle.as_ref().ok().copied()));
        if let Err(e) = angle {
            m.insert("nu1_angle_unavailable".into(), e.to_string().into());
        }
        m.insert("conditional".into(), density_json(&r.conditional));
        results.push(Value::Object(m));
    }
    Ok(obj([("gamma_deg", cfg.gamma_deg().into()), ("coincidences", results.into())]))
}

fn chsh_exact(r: &ChshResult) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for c in &r.correlations {
        rows.push(obj([
            ("alpha_deg", c.alpha_deg.into()),
            ("beta_deg", c.beta_deg.into()),
            ("p_tt", check_probability("p_tt", c.p_tt)?.into()),
            ("p_tr", check_probability("p_tr", c.p_tr)?.into()),
            ("p_rt", check_probability("p_rt", c.p_rt)?.into()),
            ("p_rr", check_probability("p_rr", c.p_rr)?.into()),
            ("E", c.e.into()),
        ]));
    }
    Ok(obj([
        ("S", r.s.into()),
        ("tsirelson_bound", (2.0 * std::f64::consts::SQRT_2).into()),
        ("correlations", rows.into()),
    ]))
}

fn chsh_sample(r: &SampledChsh) -> Result<Value, CliError> {
    let rows: Vec<Value> = r
        .correlations
        .iter()
        .map(|c| {
            obj([
                ("alpha_deg", c.alpha_deg.into()),
                ("beta_deg", c.beta_deg.into()),
                ("seed", c.seed.into()),
                ("n_tt", c.n_tt.into()),
                ("n_tr", c.n_tr.into()),
                ("n_rt", c.n_rt.into()),
                ("n_rr", c.n_rr.into()),
                ("E_estimate", c.e_estimate.into()),
                ("E_exact", c.e_exact.into()),
                ("sigma", c.sigma.into()),
                ("deviation_sigmas", c.deviation_sigmas().into()),
            ])
        })
        .collect();
    Ok(obj([
        ("samples", r.correlations[0].shots.into()),
        ("S_estimate", r.s_estimate.into()),
        ("S", r.s_exact.into()),
        ("correlations", rows.into()),
    ]))
}

/// The pieces of a custom experiment, ready to evolve.
pub struct CustomSetup {
    pub state: PureState,
    pub circuit: Circuit,
    pub pattern: Option<DetectionPattern>,
}

/// Builds the registry, input state, circuit and optional pattern.
pub fn build_custom(c: &CustomSpec, default_convention: BsConvention) -> Result<CustomSetup, CliError> {
    let mut sources: Vec<&str> = Vec::new();
    for p in &c.photons {
        sources.push(&p.path);
    }
    for p in &c.pairs {
        sources.extend([p.paths.0.as_str(), p.paths.1.as_str()]);
    }
    let elements: Vec<Element> = c.elements.iter().map(|e| element(e, default_convention)).collect();
    let mut paths: Vec<&str> = Vec::new();
    let produced = elements.iter().flat_map(|e| e.output_paths());
    for p in sources.iter().copied().chain(produced) {
        if !paths.contains(&p) {
            paths.push(p);
        }
    }
    let mut tags: Vec<u32> = c.photons.iter().map(|p| p.tag).collect();
    if !c.pairs.is_empty() {
        tags.push(fockline::fock::DEFAULT_TAG);
    }
    tags.sort_unstable();
    tags.dedup();
    let registry = Arc::new(ModeRegistry::new(paths.iter().copied(), &tags)?);

    let mut parts = Vec::new();
    for p in &c.photons {
        parts.push(PureState::single_photon(registry.clone(), &p.path, p.angle.to_radians(), p.tag)?);
    }
    for p in &c.pairs {
        parts.push(PureState::epr_pair(registry.clone(), &p.paths.0, &p.paths.1, p.angle.to_radians())?);
    }
    let mut state = parts.remove(0);
    for p in &parts {
        state = state.tensor(p)?;
    }

    let mut circuit = Circuit::new(registry.clone(), sources.iter().copied())?;
    for e in elements {
        circuit.push(e);
    }
    circuit.validate()?;

    let pattern = (!c.detect.is_empty() || !c.undetected.is_empty()).then(|| {
        let mut pat = DetectionPattern::new();
        for d in &c.detect {
            pat = match d.filter {
                Some(axis) => pat.detect_filtered(&d.path, d.count, axis.to_radians()),
                None => pat.detect(&d.path, d.count),
            };
        }
        for u in &c.undetected {
            pat = pat.undetected(u);
        }
        pat
    });
    if let Some(p) = &pattern {
        p.validate(&registry)?;
    }
    Ok(CustomSetup {
        state,
        circuit,
        pattern,
    })
}

fn element(e: &ElementSpec, default_convention: BsConvention) -> Element {
    match e {
        ElementSpec::BeamSplitter {
            inputs,
            outputs,
            transmissivity,
            convention,
        } => Element::beam_splitter(
            (&inputs.0, &inputs.1),
            (&outputs.0, &outputs.1),
            *transmissivity,
            convention.unwrap_or(default_convention),
        ),
        ElementSpec::Pbs {
            input,
            axis,
            transmit,
            reflect,
        } => Element::pbs(input, axis.to_radians(), transmit, reflect),
        ElementSpec::Rotator { path, angle } => Element::rotator(path, angle.to_radians()),
        ElementSpec::PhaseShifter { path, pol, phase } => Element::phase_shifter(path, *pol, phase.to_radians()),
    }
}

fn custom(spec: &RunSpec, task: Task) -> Result<Value, CliError> {
    let c = spec.custom.as_ref().expect("validated custom spec");
    let setup = build_custom(c, spec.bs_convention)?;
    let out = apply(&setup.state, &setup.circuit.compile()?)?;
    let mut m = Map::new();
    m.insert("n_photons".into(), out.n_photons().into());
    m.insert("paths".into(), out.registry().paths().to_vec().into());
    if task == Task::Sample {
        if let Value::Object(counts) = counts_json(&sample_events(&out, spec.samples.unwrap_or(1), spec.seed)) {
            m.extend(counts);
        }
        return Ok(m.into());
    }
    let mut dist = Vec::new();
    for (k, p) in detection_distribution(&out) {
        dist.push(obj([
            ("event", k.to_string().into()),
            ("probability", check_probability("probability", p)?.into()),
        ]));
    }
    m.insert("distribution".into(), dist.into());
    if let Some(pattern) = &setup.pattern {
        m.insert("pattern".into(), pattern.to_string().into());
        if pattern.undetected_paths().is_empty() {
            let p = pattern_probability(&out, pattern)?;
            m.insert("probability".into(), check_probability("probability", p)?.into());
        } else {
            let r = conditional_state(&out, pattern)?;
            m.insert("probability".into(), check_probability("probability", r.probability)?.into());
            m.insert("purity".into(), r.conditional.purity().into());
            if r.conditional.single_qubit().is_ok() {
                match polarization_angle(&r.conditional) {
                    Ok(a) => m.insert("polarization_angle_deg".into(), a.to_degrees().into()),
                    Err(e) => m.insert("polarization_angle_unavailable".into(), e.to_string().into()),
                };
            }
            m.insert("conditional".into(), density_json(&r.conditional));
        }
    }
    Ok(m.into())
}
