use std::path::{Path, PathBuf};

use serde_json::json;

use sensorgraph_core::graph::{optimize as solve_graph, spanning_tree_init, total_cost};
use sensorgraph_core::handeye::{self, MotionPair};
use sensorgraph_core::resample::{information_from_variance, jackknife as resample, HandEye, MeanPose};
use sensorgraph_core::synth::summarize;
use sensorgraph_core::validate::{
    global_error, normal_alignment, point_residual, residuals_by_kind, PointCorrespondences,
};
use sensorgraph_core::{CalibEdge, CalibGraph, EdgeKind, Pose, Rotation};

use super::{
    new_report, CliError, EdgeTarget, HandeyeArgs, JackknifeArgs, MotionSource, OptimizeArgs,
    ReportArgs, SynthArgs, ValidateArgs,
};
use crate::batch::{run_batch, write_csv};
use crate::config::{
    parse_topology, InitMode, JackknifeConfig, RunConfig, SynthConfig, TopologyConfig,
};
use crate::formats::graph::{edge_record, read_graph, save_graph};
use crate::formats::poses::{read_motion_pairs, read_pose_list, write_pose_list, PoseList};
use crate::formats::vectors::read_vectors;
use crate::report::{
    HandEyeMetrics, JackknifeMetrics, KindRms, RunReport, SynthMetrics,
};

fn check_input(path: &Path) -> Result<(), CliError> {
    match std::fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::io(path.display(), "not a regular file")),
        Err(e) => Err(CliError::io(path.display(), e)),
    }
}

fn check_output(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::io(
            path.display(),
            format!("directory {} does not exist", parent.display()),
        ));
    }
    if path.is_dir() {
        return Err(CliError::io(path.display(), "is a directory"));
    }
    Ok(())
}

fn check_outputs<'a>(paths: impl IntoIterator<Item = &'a Option<PathBuf>>) -> Result<(), CliError> {
    paths.into_iter().flatten().try_for_each(|p| check_output(p))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

fn load_pairs(source: &MotionSource, report: &mut RunReport) -> Result<Vec<MotionPair>, CliError> {
    match (&source.motions, &source.eye, &source.hand) {
        (Some(m), None, None) => {
            check_input(m)?;
            report.input("motions", m);
            Ok(read_motion_pairs(m)?)
        }
        (None, Some(eye), Some(hand)) => {
            check_input(eye)?;
            check_input(hand)?;
            report.input("eye", eye);
            report.input("hand", hand);
            let eye = read_pose_list(eye)?;
            let hand = read_pose_list(hand)?;
            Ok(handeye::motion_pairs(&eye.poses, &hand.poses)?)
        }
        _ => Err(CliError::Invalid(
            "give either --motions or both --eye and --hand".into(),
        )),
    }
}

fn edge_config(edge: &EdgeTarget, config: &RunConfig) -> Result<f64, CliError> {
    let floor = JackknifeConfig {
        variance_floor: edge.variance_floor.or(config.jackknife.variance_floor),
    }
    .floor()?;
    if edge.from == edge.to {
        return Err(CliError::Invalid("--from and --to must differ".into()));
    }
    Ok(floor)
}

/// Runs the Jackknife, records it in the report and returns the edge.
fn variance_edge<E: sensorgraph_core::resample::PairwiseEstimator>(
    estimator: &E,
    samples: &[E::Sample],
    edge: &EdgeTarget,
    default_kind: Option<EdgeKind>,
    floor: f64,
    report: &mut RunReport,
) -> Result<CalibEdge, CliError> {
    let v = resample(estimator, samples)?;
    let info = information_from_variance(&v.variance, floor)?;
    let diagonal: [f64; 6] = info.diagonal().into();
    report.metrics.jackknife = Some(JackknifeMetrics::new(&v, diagonal));
    let mut e = CalibEdge::new(edge.from, edge.to, v.reference, info);
    e.kind = edge.kind.or(default_kind);
    Ok(e)
}

pub(super) fn handeye(a: &HandeyeArgs, config: &RunConfig) -> Result<RunReport, CliError> {
    let floor = edge_config(&a.edge, config)?;
    check_outputs([&a.out, &a.report])?;
    let mut report = new_report(
        "handeye",
        json!({
            "jackknife": a.jackknife,
            "from": a.edge.from,
            "to": a.edge.to,
            "kind": a.edge.kind.map(|k| k.to_string()),
            "variance_floor": floor,
        }),
    );
    let pairs = load_pairs(&a.source, &mut report)?;
    let solution = handeye::solve(&pairs)?;
    report.metrics.handeye = Some(HandEyeMetrics::new(pairs.len(), &solution));

    let text = if a.jackknife {
        let edge = variance_edge(&HandEye, &pairs, &a.edge, Some(EdgeKind::HandEye), floor, &mut report)?;
        edge_record(&edge) + "\n"
    } else {
        write_pose_list(&PoseList {
            frame: "eye".into(),
            poses: vec![solution.x],
        })
    };
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    Ok(report)
}

pub(super) fn jackknife(a: &JackknifeArgs, config: &RunConfig) -> Result<RunReport, CliError> {
    let floor = edge_config(&a.edge, config)?;
    check_outputs([&a.out, &a.report])?;
    let mut report = new_report(
        "jackknife",
        json!({
            "from": a.edge.from,
            "to": a.edge.to,
            "kind": a.edge.kind.map(|k| k.to_string()),
            "variance_floor": floor,
        }),
    );
    let edge = match &a.poses {
        Some(path) => {
            check_input(path)?;
            report.input("poses", path);
            let list = read_pose_list(path)?;
            variance_edge(&MeanPose, &list.poses, &a.edge, None, floor, &mut report)?
        }
        None => {
            let pairs = load_pairs(&a.source, &mut report)?;
            variance_edge(&HandEye, &pairs, &a.edge, Some(EdgeKind::HandEye), floor, &mut report)?
        }
    };
    let record = edge_record(&edge);
    match &a.out {
        Some(out) => write_text(out, &(record + "\n"))?,
        None => log::info!("{record}"),
    }
    Ok(report)
}

pub(super) fn optimize(a: &OptimizeArgs, config: &RunConfig) -> Result<RunReport, CliError> {
    let solver = config.solver.overridden_by(&a.solver);
    let opts = solver.options()?;
    let mut init = a.init.or(config.optimize.init).unwrap_or(InitMode::File);
    check_input(&a.graph)?;
    check_outputs([&a.out, &a.report])?;

    let file = read_graph(&a.graph)?;
    let mut graph = file.graph;
    if graph.edges().is_empty() {
        return Err(CliError::Invalid(format!("{}: graph has no edges", a.graph.display())));
    }
    graph.check_connected()?;
    if !file.has_fix {
        let root = graph.ids().min().expect("graph has edges, so nodes");
        log::warn!("no FIX record; fixing node {root}");
        graph.set_fixed(root, true)?;
    }
    if !file.missing_vertices.is_empty() && init == InitMode::File {
        log::warn!(
            "nodes {:?} have no vertex record; initializing from the spanning tree",
            file.missing_vertices
        );
        init = InitMode::Tree;
    }
    if init == InitMode::Tree {
        graph = tree_init(&graph, &file.missing_vertices)?;
    }

    let initial_error = global_error(&graph)?;
    let (optimized, solve) = solve_graph(&graph, &opts)?;
    if !solve.converged {
        log::warn!("solver stopped after {} iterations without converging", solve.iterations);
    }

    let mut report = new_report(
        "optimize",
        json!({
            "init": init,
            "solver": {
                "max_iterations": opts.max_iterations,
                "lambda0": opts.lambda0,
                "relative_cost_tolerance": opts.relative_cost_tolerance,
                "step_tolerance": opts.step_tolerance,
                "jacobian": solver.jacobian.unwrap_or(crate::config::JacobianChoice::Analytic),
            },
        }),
    );
    report.input("graph", &a.graph);
    let m = &mut report.metrics;
    m.initial_cost = Some(solve.initial_cost);
    m.final_cost = Some(solve.final_cost);
    m.global_error_before = Some(initial_error);
    m.global_error_after = Some(global_error(&optimized)?);
    m.iterations = Some(solve.iterations);
    m.converged = Some(solve.converged);
    m.residual_rms_by_kind = Some(residuals_by_kind(&optimized)?.iter().map(KindRms::from).collect());

    if let Some(out) = &a.out {
        save_graph(out, &optimized)?;
    }
    Ok(report)
}

/// Spanning-tree initialization anchored at the lowest fixed node. The result
/// is moved so that the root keeps its pose from the file, and other fixed
/// nodes with a vertex record keep theirs.
fn tree_init(graph: &CalibGraph, missing: &[u32]) -> Result<CalibGraph, CliError> {
    let fixed = graph.fixed_ids();
    let root = *fixed.iter().min().expect("a node is fixed");
    let mut out = spanning_tree_init(graph, root)?;
    let anchor = if missing.contains(&root) {
        Pose::identity()
    } else {
        graph.pose(root)?
    };
    let ids: Vec<_> = out.ids().collect();
    for id in ids {
        let pose = if fixed.contains(&id) && !missing.contains(&id) {
            graph.pose(id)?
        } else {
            anchor * out.pose(id)?
        };
        out.set_pose(id, pose)?;
    }
    log::debug!("tree initialization cost {}", total_cost(&out)?);
    Ok(out)
}

fn transform(a: &ValidateArgs, report: &mut RunReport) -> Result<Pose, CliError> {
    if let Some(v) = &a.transform {
        let r = Rotation::from_quaternion(v[3], v[4], v[5], v[6])
            .map_err(|e| CliError::Invalid(format!("--transform: {e}")))?;
        return Ok(Pose::new(r, sensorgraph_core::nalgebra::Vector3::new(v[0], v[1], v[2])));
    }
    if let Some(path) = &a.transform_file {
        check_input(path)?;
        report.input("transform", path);
        let list = read_pose_list(path)?;
        return list
            .poses
            .first()
            .copied()
            .ok_or_else(|| CliError::Invalid(format!("{}: no pose", path.display())));
    }
    Ok(Pose::identity())
}

pub(super) fn validate(a: &ValidateArgs) -> Result<RunReport, CliError> {
    if a.graph.is_none() && a.normals1.is_none() && a.source.is_none() {
        return Err(CliError::Invalid(
            "nothing to validate: give --graph, --normals1/--normals2 or --source/--target".into(),
        ));
    }
    for p in [&a.graph, &a.normals1, &a.normals2, &a.source, &a.target, &a.transform_file]
        .into_iter()
        .flatten()
    {
        check_input(p)?;
    }
    check_outputs([&a.report])?;
    let mut report = new_report("validate", json!({ "transform": a.transform }));
    let t = transform(a, &mut report)?;

    if let (Some(p1), Some(p2)) = (&a.normals1, &a.normals2) {
        report.input("normals1", p1);
        report.input("normals2", p2);
        let (n1, n2) = (read_vectors(p1)?, read_vectors(p2)?);
        if n1.len() != n2.len() || n1.is_empty() {
            return Err(CliError::Invalid(format!(
                "normal files must hold the same nonzero number of normals ({} vs {})",
                n1.len(),
                n2.len()
            )));
        }
        let d = n1
            .iter()
            .zip(&n2)
            .map(|(a, b)| normal_alignment(a, b, &t))
            .collect::<Result<Vec<_>, _>>()?;
        report.metrics.normal_alignment = Some(d);
    }
    if let (Some(s), Some(tg)) = (&a.source, &a.target) {
        report.input("source", s);
        report.input("target", tg);
        let corr = PointCorrespondences::new(read_vectors(s)?, read_vectors(tg)?)?;
        report.metrics.point_residual = Some(point_residual(&corr, &t));
    }
    if let Some(g) = &a.graph {
        report.input("graph", g);
        let file = read_graph(g)?;
        report.metrics.global_error = Some(global_error(&file.graph)?);
        report.metrics.residual_rms_by_kind = Some(
            residuals_by_kind(&file.graph)?
                .iter()
                .map(KindRms::from)
                .collect(),
        );
    }
    Ok(report)
}

pub(super) fn synth(a: &SynthArgs, config: &RunConfig, seed: Option<u64>) -> Result<RunReport, CliError> {
    let flags = SynthConfig {
        nodes: a.nodes,
        topology: match &a.topology {
            Some(t) => {
                parse_topology(t)?;
                Some(TopologyConfig::Named(t.clone()))
            }
            None => None,
        },
        sigma_trans: a.sigma_trans,
        sigma_rot: a.sigma_rot,
        trials: a.trials,
        threads: a.threads,
    };
    let merged = config.synth.overridden_by(&flags);
    let spec = merged.spec(seed)?;
    let opts = config.solver.overridden_by(&a.solver).options()?;
    check_outputs([&a.out, &a.report])?;
    if let Some(dir) = &a.graphs_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }

    let results = run_batch(&spec, &opts, merged.threads, a.graphs_dir.as_deref())
        .map_err(|e| match e {
            crate::batch::BatchError::File(f) => CliError::from(f),
            other => CliError::Invalid(other.to_string()),
        })?;
    if let Some(out) = &a.out {
        let file = std::fs::File::create(out).map_err(|e| CliError::io(out.display(), e))?;
        write_csv(std::io::BufWriter::new(file), &results)
            .map_err(|e| CliError::io(out.display(), e))?;
    }

    let ok: Vec<_> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failed = results.len() - ok.len();
    for (i, r) in results.iter().enumerate() {
        if let Err(e) = r {
            log::warn!("trial {i}: {e}");
        }
    }
    if ok.is_empty() {
        return Err(CliError::Solver("every trial failed".into()));
    }
    let summary = summarize(&ok)?;

    let mut report = new_report(
        "synth",
        json!({
            "nodes": spec.node_count,
            "topology": merged.topology.unwrap_or(TopologyConfig::Named("complete".into())),
            "edges": spec.topology.pairs(spec.node_count).len(),
            "sigma_trans": spec.noise_sigma[0],
            "sigma_rot": spec.noise_sigma[3],
            "trials": spec.trials,
            "seed": spec.seed,
        }),
    );
    report.metrics.synth = Some(SynthMetrics::new(&summary, failed));
    Ok(report)
}

pub(super) fn report(a: &ReportArgs) -> Result<RunReport, CliError> {
    let path = a.file.as_ref().expect("clap requires a file without --schema");
    check_input(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    RunReport::from_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Human-readable rendering of a report, one fact per line.
pub(super) fn summary_lines(r: &RunReport) -> Vec<String> {
    let m = &r.metrics;
    let mut out = vec![format!("command: {}", r.command)];
    let mut num = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            out.push(format!("{name}: {v:.6e}"));
        }
    };
    num("initial_cost", m.initial_cost);
    num("final_cost", m.final_cost);
    num("global_error_before", m.global_error_before);
    num("global_error_after", m.global_error_after);
    num("point_residual", m.point_residual);
    num("global_error", m.global_error);
    if let Some(i) = m.iterations {
        out.push(format!("iterations: {i}"));
    }
    if let Some(c) = m.converged {
        out.push(format!("converged: {c}"));
    }
    for k in m.residual_rms_by_kind.iter().flatten() {
        out.push(format!("residual_rms[{}]: {:.6e} over {} edges", k.kind, k.rms, k.edges));
    }
    if let Some(d) = &m.normal_alignment {
        for (i, v) in d.iter().enumerate() {
            out.push(format!("normal_alignment[{i}]: {v:.12}"));
        }
    }
    if let Some(h) = &m.handeye {
        let [tx, ty, tz] = h.x.translation;
        let [qx, qy, qz, qw] = h.x.quaternion;
        out.push(format!("pairs: {}", h.pairs));
        out.push(format!("x: {tx:.9} {ty:.9} {tz:.9} {qx:.9} {qy:.9} {qz:.9} {qw:.9}"));
        out.push(format!("rotation_residual_rms: {:.6e}", h.rotation_residual_rms));
        out.push(format!("translation_residual_rms: {:.6e}", h.translation_residual_rms));
        out.push(format!("condition_indicator: {:.6e}", h.condition_indicator));
    }
    if let Some(j) = &m.jackknife {
        out.push(format!("samples: {}", j.m));
        out.push(format!("variance: {}", fmt_list(&j.variance)));
        out.push(format!("information_diagonal: {}", fmt_list(&j.information_diagonal)));
    }
    if let Some(s) = &m.synth {
        out.push(format!("trials: {} ({} failed)", s.trials, s.failed));
        for (name, st) in [
            ("injected_translation_sq_error", &s.injected_translation_sq_error),
            ("optimized_translation_sq_error", &s.optimized_translation_sq_error),
            ("injected_rotation_sq_error", &s.injected_rotation_sq_error),
            ("optimized_rotation_sq_error", &s.optimized_rotation_sq_error),
        ] {
            out.push(format!(
                "{name}: mean {:.6e} variance {:.6e} min {:.6e} max {:.6e}",
                st.mean, st.variance, st.min, st.max
            ));
        }
        out.push(format!("translation_improved: {:.3}", s.translation_improved_fraction));
        out.push(format!("rotation_improved: {:.3}", s.rotation_improved_fraction));
    }
    out
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
}
