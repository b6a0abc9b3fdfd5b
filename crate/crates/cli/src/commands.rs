use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use maglap::distance::{graph_distance, infer_parameter, InferenceConfig};
use maglap::exact::{
    eig_hermitian_limited, entropic_dissimilarity, heat_grid_with, spectral_entropy, HeatGridOptions,
};
use maglap::format::fmt17;
use maglap::generators::GeneratorSpec;
use maglap::graph::load_edge_list;
use maglap::kpm::{estimate_density, kpm_heat_grid, SpectralDensity};
use maglap::som::{
    graph_fingerprint, label_contiguity, label_neurons, normalize_dataset, purity, som_train, u_matrix,
    u_matrix_csv, SomConfig,
};
use maglap::{DirectedGraph, Error, Execution, MagneticOperator};
use serde::Serialize;

use crate::args::*;
use crate::error::{io_error, CliError};
use crate::manifest::{emit, Artifact, Outcome, RunManifest};
use crate::svg::polar_heatmap;

pub fn run(cmd: &Command, argv: &[String]) -> Result<(), CliError> {
    if let Command::Replay(a) = cmd {
        return replay(a);
    }
    let outcome = execute(cmd)?;
    emit(cmd, argv, outcome)?;
    Ok(())
}

fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Heat(a) => heat(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Dos(a) => dos(a),
        Command::Entropy(a) => entropy(a),
        Command::Dissimilarity(a) => dissimilarity(a),
        Command::Distance(a) => distance(a),
        Command::Infer(a) => infer(a, cmd),
        Command::Som(a) => som(a),
        Command::Replay(_) => unreachable!("replay is dispatched in run"),
    }
}

fn outcome(artifacts: Vec<Artifact>, summary: String, inputs: &[&PathBuf]) -> Outcome {
    Outcome {
        artifacts,
        summary,
        seeds: BTreeMap::new(),
        inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
    }
}

fn json(value: &impl Serialize) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

fn read_graph(path: &Path) -> Result<DirectedGraph, CliError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    load_edge_list(&text).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

fn read_analysis_graph(path: &Path, lwcc: bool) -> Result<DirectedGraph, CliError> {
    let g = read_graph(path)?;
    Ok(if lwcc { g.largest_weakly_connected_component()?.graph } else { g })
}

/// Unweighted graphs have integer flows, so their operators are 1-periodic in
/// the charge; only for them is `q` reduced to `[0, 1)`.
fn reduce_charge(q: f64, graphs: &[&DirectedGraph]) -> f64 {
    if graphs.iter().all(|g| g.is_unweighted()) {
        q.rem_euclid(1.0)
    } else {
        q
    }
}

fn check_dense(g: &DirectedGraph, limit: usize) -> Result<(), CliError> {
    if g.node_count() > limit {
        return Err(Error::DimensionTooLarge { dim: g.node_count(), limit }.into());
    }
    Ok(())
}

fn graph_id(path: &Path) -> Option<String> {
    path.file_stem().map(|s| s.to_string_lossy().into_owned())
}

fn generate(a: &GenerateArgs) -> Result<Outcome, CliError> {
    let spec = GeneratorSpec { model: a.model()?, seed: a.seed };
    let g = spec.generate()?;
    let mut out = outcome(
        vec![Artifact::new("", g.to_edge_list()), Artifact::new(".json", json(&spec)?)],
        String::new(),
        &[],
    );
    out.seeds.insert("seed".into(), a.seed);
    Ok(out)
}

fn heat(a: &HeatArgs) -> Result<Outcome, CliError> {
    if a.svg && a.output.is_none() {
        return Err(CliError::Usage("--svg needs --output".into()));
    }
    let g = read_analysis_graph(&a.input, a.lwcc)?;
    let (qs, ts) = (a.grid.charges()?, a.grid.temperatures()?);
    let mut seeds = BTreeMap::new();
    let mut grid = if a.kpm {
        seeds.insert("kpm_seed".to_string(), a.kpm_args.kpm_seed);
        kpm_heat_grid(&g, &qs, &ts, &a.kpm_args.config(40, 25))?
    } else {
        let opts = HeatGridOptions { dense_limit: a.dense_limit, ..HeatGridOptions::default() };
        heat_grid_with(&g, &qs, &ts, &opts)?
    };
    grid.graph_id = graph_id(&a.input);
    let mut artifacts = vec![Artifact::new("heat.csv", grid.to_csv()), Artifact::new("heat.json", json(&grid)?)];
    if a.svg {
        artifacts.push(Artifact::new("heat.svg", polar_heatmap(&grid)));
    }
    let mut out = outcome(artifacts, String::new(), &[&a.input]);
    out.seeds = seeds;
    Ok(out)
}

fn operator(g: &DirectedGraph, q: f64, kind: Kind) -> Result<MagneticOperator, CliError> {
    Ok(MagneticOperator::from_graph(g, reduce_charge(q, &[g]), kind.into())?)
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let g = read_analysis_graph(&a.input, a.lwcc)?;
    let spec = eig_hermitian_limited(&operator(&g, a.q, a.kind)?, false, a.dense_limit)?;
    Ok(outcome(vec![Artifact::new("spectrum.csv", spec.to_csv())], String::new(), &[&a.input]))
}

fn dos(a: &DosArgs) -> Result<Outcome, CliError> {
    let g = read_analysis_graph(&a.input, a.lwcc)?;
    let op = operator(&g, a.q, a.kind)?;
    if !a.kpm {
        let spec = eig_hermitian_limited(&op, false, a.dense_limit)?;
        let d = SpectralDensity::from_levels(&spec.eigenvalues);
        return Ok(outcome(vec![Artifact::new("dos.csv", d.to_csv())], String::new(), &[&a.input]));
    }
    let est = estimate_density(&op, &a.kpm_args.config(100, 20))?;
    let mut out = outcome(
        vec![Artifact::new("dos.csv", est.density.to_csv()), Artifact::new("dos.json", est.to_json()? + "\n")],
        String::new(),
        &[&a.input],
    );
    out.seeds.insert("kpm_seed".into(), a.kpm_args.kpm_seed);
    Ok(out)
}

#[derive(Serialize)]
struct ScalarReport {
    quantity: &'static str,
    value: f64,
    unit: &'static str,
    charge: f64,
    temperature: f64,
    nodes: usize,
}

fn in_units(nats: f64, bits: bool) -> (f64, &'static str) {
    if bits {
        (nats / std::f64::consts::LN_2, "bits")
    } else {
        (nats, "nats")
    }
}

fn scalar_outcome(report: ScalarReport, file: &str, inputs: &[&PathBuf]) -> Result<Outcome, CliError> {
    let summary = format!("{} {} {}\n", report.quantity, fmt17(report.value), report.unit);
    Ok(outcome(vec![Artifact::new(file, json(&report)?)], summary, inputs))
}

fn entropy(a: &EntropyArgs) -> Result<Outcome, CliError> {
    let g = read_analysis_graph(&a.input, a.lwcc)?;
    let q = reduce_charge(a.q, &[&g]);
    let spec = eig_hermitian_limited(&operator(&g, q, Kind::Normalized)?, false, a.dense_limit)?;
    let (value, unit) = in_units(spectral_entropy(&spec, a.temperature)?, a.bits);
    let report =
        ScalarReport { quantity: "entropy", value, unit, charge: q, temperature: a.temperature, nodes: g.node_count() };
    scalar_outcome(report, "entropy.json", &[&a.input])
}

fn dissimilarity(a: &DissimilarityArgs) -> Result<Outcome, CliError> {
    let tilde = read_graph(&a.tilde)?;
    let base = read_graph(&a.base)?;
    check_dense(&tilde, a.dense_limit)?;
    check_dense(&base, a.dense_limit)?;
    let q = reduce_charge(a.q, &[&tilde, &base]);
    let (value, unit) = in_units(entropic_dissimilarity(&tilde, &base, q, a.temperature)?, a.bits);
    let report = ScalarReport {
        quantity: "dissimilarity",
        value,
        unit,
        charge: q,
        temperature: a.temperature,
        nodes: base.node_count(),
    };
    scalar_outcome(report, "dissimilarity.json", &[&a.tilde, &a.base])
}

fn distance(a: &DistanceArgs) -> Result<Outcome, CliError> {
    let first = read_graph(&a.first)?;
    let second = read_graph(&a.second)?;
    let report = graph_distance(&first, &second, &a.charges, a.order, &a.kpm_args.config(100, 20))?;
    let mut summary = format!("distance {}\n", fmt17(report.mean));
    for (q, w) in report.charges.iter().zip(&report.per_charge) {
        let _ = writeln!(summary, "q={} {}", fmt17(*q), fmt17(*w));
    }
    let mut out = outcome(vec![Artifact::new("distance.json", json(&report)?)], summary, &[&a.first, &a.second]);
    out.seeds.insert("kpm_seed".into(), a.kpm_args.kpm_seed);
    Ok(out)
}

fn infer(a: &InferArgs, cmd: &Command) -> Result<Outcome, CliError> {
    let target = read_graph(&a.target)?;
    let model = a.sweep(target.node_count())?;
    let grid = a.parameter_grid()?;
    let mut cfg = InferenceConfig::new(a.charges.clone(), a.n_exp, a.kpm_args.config(100, 20), a.seed);
    cfg.order = a.order;
    let mut report = infer_parameter(&target, &model, &grid, &cfg)?;
    report.config_hash = Some(crate::manifest::config_hash(cmd));
    let summary = format!("best {} {}\n", report.parameter, fmt17(report.best_param));
    let mut out = outcome(
        vec![Artifact::new("inference.json", report.to_json()? + "\n"), Artifact::new("curve.csv", report.curve_csv())],
        summary,
        &[&a.target],
    );
    out.seeds.insert("seed".into(), a.seed);
    out.seeds.insert("kpm_seed".into(), a.kpm_args.kpm_seed);
    Ok(out)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut entries = fs::read_dir(dir)
        .map_err(io_error(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_error(dir))?;
    entries.sort();
    Ok(entries)
}

fn is_edge_list(p: &Path) -> bool {
    p.is_file() && p.extension().is_none_or(|e| e != "json")
}

/// `(path, label)` for every edge list: files in a subdirectory take its name
/// as their label, files at the top level are unlabeled.
fn dataset_files(root: &Path) -> Result<Vec<(PathBuf, Option<String>)>, CliError> {
    let mut files = Vec::new();
    for entry in sorted_entries(root)? {
        if entry.is_dir() {
            let label = entry.file_name().map(|s| s.to_string_lossy().into_owned());
            for f in sorted_entries(&entry)?.into_iter().filter(|p| is_edge_list(p)) {
                files.push((f, label.clone()));
            }
        } else if is_edge_list(&entry) {
            files.push((entry, None));
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no edge lists found", root.display())));
    }
    Ok(files)
}

#[derive(Serialize)]
struct SomReport {
    samples: usize,
    classes: Vec<String>,
    purity: Option<f64>,
    label_contiguity: Option<f64>,
    final_quantization_error: f64,
}

fn som(a: &SomArgs) -> Result<Outcome, CliError> {
    let files = dataset_files(&a.dataset)?;
    let (qs, ts) = (a.grid.charges()?, a.grid.temperatures()?);
    let fingerprints = Execution::default().try_map(files.len(), |i| {
        let (path, label) = &files[i];
        let g = read_graph(path)?;
        graph_fingerprint(&g, label.as_deref(), &qs, &ts)
            .map_err(|source| CliError::Input { path: path.clone(), source })
    })?;
    let (data, _) = normalize_dataset(&fingerprints, a.normalize.into())?;
    let cfg = SomConfig {
        width: a.width,
        height: a.height,
        epochs: a.epochs,
        seed: a.seed,
        mode: a.mode.into(),
        ..SomConfig::default()
    };
    let mut grid = som_train(&data, &cfg)?;
    let labeled = data.iter().any(|f| f.label.is_some());
    if labeled {
        label_neurons(&mut grid, &data)?;
    }
    let classes: Vec<String> = {
        let mut c: Vec<String> = data.iter().filter_map(|f| f.label.clone()).collect();
        c.sort();
        c.dedup();
        c
    };
    let report = SomReport {
        samples: data.len(),
        classes,
        purity: if labeled { Some(purity(&grid, &data)?) } else { None },
        label_contiguity: if labeled { Some(label_contiguity(&grid)?) } else { None },
        final_quantization_error: grid.quantization_errors.last().copied().unwrap_or(f64::NAN),
    };

    let mut assignments = String::from("file,label,x,y\n");
    for ((path, label), f) in files.iter().zip(&data) {
        let (x, y) = grid.coords(grid.bmu(&f.values));
        let name = path.strip_prefix(&a.dataset).unwrap_or(path).display();
        let _ = writeln!(assignments, "{name},{},{x},{y}", label.as_deref().unwrap_or(""));
    }
    let mut summary = format!("samples {}\n", report.samples);
    if let (Some(p), Some(c)) = (report.purity, report.label_contiguity) {
        let _ = write!(summary, "purity {}\nlabel_contiguity {}\n", fmt17(p), fmt17(c));
    }
    let artifacts = vec![
        Artifact::new("som.json", grid.to_json()? + "\n"),
        Artifact::new("u_matrix.csv", u_matrix_csv(&u_matrix(&grid))),
        Artifact::new("labels.csv", grid.labels_csv()),
        Artifact::new("assignments.csv", assignments),
        Artifact::new("report.json", json(&report)?),
    ];
    let inputs: Vec<&PathBuf> = files.iter().map(|(p, _)| p).collect();
    let mut out = outcome(artifacts, summary, &inputs);
    out.seeds.insert("seed".into(), a.seed);
    Ok(out)
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let recorded = RunManifest::load(&a.manifest)?;
    for input in &recorded.inputs {
        let path = Path::new(&input.path);
        let bytes = fs::read(path).map_err(io_error(path))?;
        if crate::manifest::sha256_hex(&bytes) != input.sha256 {
            return Err(CliError::Usage(format!("{}: input changed since the run was recorded", input.path)));
        }
    }
    let mut cmd = recorded.command.clone();
    if let Some(out) = &a.output {
        cmd.set_output(std::path::absolute(out).map_err(io_error(out))?);
    }
    if cmd.output().is_none() {
        return Err(CliError::Usage("manifest records no output location".into()));
    }
    let outcome = execute(&cmd)?;
    let fresh = emit(&cmd, &recorded.argv, outcome)?.expect("output location is set");
    if fresh.outputs != recorded.outputs {
        let differing: Vec<&str> = recorded
            .outputs
            .iter()
            .filter(|r| !fresh.outputs.contains(r))
            .map(|r| r.path.as_str())
            .collect();
        return Err(CliError::Replay(format!("outputs differ: {}", differing.join(", "))));
    }
    println!("replay: {} outputs identical", fresh.outputs.len());
    Ok(())
}

/// Turns relative paths into absolute ones so manifests replay from any
/// working directory.
pub fn absolutize(cmd: &mut Command) -> Result<(), CliError> {
    for p in cmd.inputs_mut() {
        *p = std::path::absolute(&*p).map_err(io_error(p))?;
    }
    if let Some(out) = cmd.output().cloned() {
        cmd.set_output(std::path::absolute(&out).map_err(io_error(&out))?);
    }
    Ok(())
}
