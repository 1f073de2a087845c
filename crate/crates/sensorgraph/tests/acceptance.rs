//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensorgraph::batch::run_batch;
use sensorgraph::formats::graph::{parse_graph, read_graph, write_graph};
use sensorgraph::formats::poses::parse_motion_pairs;
use sensorgraph_core::graph::{edge_error, edge_jacobians, gauge_align, optimize, JacobianMode};
use sensorgraph_core::handeye::{self, MotionPair};
use sensorgraph_core::lie::sample_perturbation;
use sensorgraph_core::nalgebra::{Matrix6, Vector3, Vector6};
use sensorgraph_core::resample::{jackknife, tangent_mean, MeanPose};
use sensorgraph_core::synth::{generate_motion_pairs, generate_rig, random_pose, summarize, RigSpec, Topology};
use sensorgraph_core::validate::{global_error, normal_alignment, point_residual, PointCorrespondences};
use sensorgraph_core::{CalibEdge, CalibGraph, EdgeKind, NodeId, Pose, SensorNode, SolverOptions, Twist};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Right perturbation with `‖ξ‖ ≤ bound`.
fn nudge(p: &Pose, bound: f64, rng: &mut ChaCha8Rng) -> Pose {
    let mut xi = Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    xi *= rng.random_range(0.0..bound) / xi.norm();
    p.retract(&Twist(xi)).unwrap()
}

/// Random spanning tree over `n` nodes plus up to `extra` chords.
fn random_topology(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut pairs: Vec<(NodeId, NodeId)> = (1..n)
        .map(|j| (rng.random_range(0..j) as NodeId, j as NodeId))
        .collect();
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n) as NodeId, rng.random_range(0..n) as NodeId);
        if a != b {
            pairs.push((a, b));
        }
    }
    pairs
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn noise_reduction_study() -> Outcome {
    let spec = RigSpec::default();
    assert_eq!(spec.topology.pairs(spec.node_count).len(), 6);
    let start = Instant::now();
    let results = run_batch(&spec, &SolverOptions::default(), None, None).unwrap();
    let elapsed = start.elapsed();
    let ok: Vec<_> = results.into_iter().collect::<Result<_, _>>().unwrap();
    let s = summarize(&ok).unwrap();
    let detail = format!(
        "translation {:.3e} -> {:.3e} ({:.1}% improved), rotation {:.3e} -> {:.3e} ({:.1}% improved), {:.2} s",
        s.injected_translation.mean,
        s.optimized_translation.mean,
        100.0 * s.translation_improved,
        s.injected_rotation.mean,
        s.optimized_rotation.mean,
        100.0 * s.rotation_improved,
        elapsed.as_secs_f64()
    );
    check(
        ok.len() == 300
            && s.optimized_translation.mean < s.injected_translation.mean
            && s.optimized_rotation.mean < s.injected_rotation.mean
            && s.translation_improved > 0.9
            && s.rotation_improved > 0.9
            && elapsed < Duration::from_secs(10),
        detail,
    )
}

/// Rebuilds `graph` with the information of edge `k` replaced by `info(k)`
/// and free node poses nudged away from their values.
fn reweighted(graph: &CalibGraph, info: impl Fn(usize) -> Matrix6<f64>, rng: &mut ChaCha8Rng) -> CalibGraph {
    let mut g = CalibGraph::new();
    for n in graph.nodes() {
        let mut node = n.clone();
        if !node.fixed {
            node.pose = nudge(&node.pose, 0.1, rng);
        }
        g.add_node(node).unwrap();
    }
    for (k, e) in graph.edges().iter().enumerate() {
        let mut e = e.clone();
        e.information = info(k);
        g.add_edge(e).unwrap();
    }
    g
}

fn random_information(rng: &mut ChaCha8Rng) -> Matrix6<f64> {
    let l = Matrix6::from_fn(|r, c| if c <= r { rng.random_range(-1.0..1.0) } else { 0.0 });
    l * l.transpose() + Matrix6::identity() * 0.5
}

fn optimization_decreases_error() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = SolverOptions::default();
    let mut graphs = vec![read_graph(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/rig4.graph"))
        .unwrap()
        .graph];
    for k in 0..40 {
        let n = rng.random_range(3..10);
        let spec = RigSpec {
            node_count: n,
            topology: if k % 2 == 0 { Topology::Complete } else { Topology::Edges(random_topology(n, n, &mut rng)) },
            noise_sigma: Vector6::repeat(rng.random_range(0.005..0.1)),
            trials: 1,
            seed: k,
        };
        let rig = generate_rig(&spec, &mut rng).unwrap();
        let scale = rng.random_range(0.1..1000.0);
        graphs.push(reweighted(&rig.graph, |_| Matrix6::identity() * scale, &mut rng));
    }
    let scalar_graphs = graphs.len();
    for k in 0..20 {
        let n = rng.random_range(3..8);
        let spec = RigSpec {
            node_count: n,
            topology: Topology::Edges(random_topology(n, 2 * n, &mut rng)),
            trials: 1,
            seed: 100 + k,
            ..RigSpec::default()
        };
        let rig = generate_rig(&spec, &mut rng).unwrap();
        let infos: Vec<_> = (0..rig.graph.edges().len()).map(|_| random_information(&mut rng)).collect();
        graphs.push(reweighted(&rig.graph, |i| infos[i], &mut rng));
    }

    let mut failures = vec![];
    let mut worst_ratio: f64 = 0.0;
    for (k, g) in graphs.iter().enumerate() {
        let before = global_error(g).unwrap();
        let (out, report) = optimize(g, &opts).unwrap();
        let after = global_error(&out).unwrap();
        if !report.converged || report.final_cost > report.initial_cost {
            failures.push(format!("graph {k}: cost {} -> {}", report.initial_cost, report.final_cost));
        }
        if k < scalar_graphs {
            worst_ratio = worst_ratio.max(after / before);
            if after > before {
                failures.push(format!("graph {k}: E_global {before} -> {after}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} graphs ({scalar_graphs} with scalar information), worst E_global after/before {worst_ratio:.3}{}",
            graphs.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn spans_two_axes(pairs: &[MotionPair]) -> bool {
    let axes: Vec<Vector3<f64>> = pairs.iter().map(|p| p.b.rotation.log().normalize()).collect();
    axes.iter().any(|a| axes.iter().any(|b| a.cross(b).norm() > 1e-3))
}

fn hand_eye_exact() -> Outcome {
    let mut worst: (f64, f64) = (0.0, 0.0);
    let mut slowest = Duration::ZERO;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let x = random_pose(&mut rng);
        let pairs = generate_motion_pairs(&x, 10, &Vector6::zeros(), &mut rng).unwrap();
        assert!(spans_two_axes(&pairs));
        let start = Instant::now();
        let solved = handeye::solve(&pairs).unwrap();
        slowest = slowest.max(start.elapsed());
        let (angle, dist) = solved.x.distance(&x);
        worst = (worst.0.max(angle), worst.1.max(dist));
    }
    check(
        worst.0 < 1e-9 && worst.1 < 1e-9 && slowest < Duration::from_millis(100),
        format!(
            "20 problems, worst error {:.2e} rad / {:.2e} m, slowest {:.3} ms",
            worst.0,
            worst.1,
            slowest.as_secs_f64() * 1e3
        ),
    )
}

fn hand_eye_noise() -> Outcome {
    let (mut rot, mut trans) = (vec![], vec![]);
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let x = random_pose(&mut rng);
        let pairs = generate_motion_pairs(&x, 20, &Vector6::repeat(0.005), &mut rng).unwrap();
        let (angle, dist) = handeye::solve(&pairs).unwrap().x.distance(&x);
        rot.push(angle);
        trans.push(dist);
    }
    let (r, t) = (median(rot), median(trans));
    check(r < 0.01 && t < 0.02, format!("median error {r:.2e} rad / {t:.2e} m over 50 runs"))
}

fn zero_noise_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolverOptions::default();
    let mut cases: Vec<(usize, Vec<(NodeId, NodeId)>)> = vec![];
    for n in 2..=20usize {
        let m = n as NodeId;
        cases.push((n, (1..m).map(|j| (j - 1, j)).collect()));
        cases.push((n, (1..m).map(|j| (0, j)).collect()));
        cases.push((n, Topology::Complete.pairs(n)));
        cases.push((n, random_topology(n, n, &mut rng)));
        if n > 2 {
            cases.push((n, (0..m).map(|j| (j, (j + 1) % m)).collect()));
        }
    }
    let (mut worst_cost, mut worst_pose, mut most_iterations) = (0.0f64, 0.0f64, 0usize);
    let mut failures = vec![];
    for (k, (n, pairs)) in cases.iter().enumerate() {
        let truth: Vec<Pose> = (0..*n).map(|_| random_pose(&mut rng)).collect();
        let mut g = CalibGraph::new();
        for (i, p) in truth.iter().enumerate() {
            let start = if i == 0 { *p } else { nudge(p, 0.1, &mut rng) };
            g.add_node(SensorNode::new(i as NodeId, start)).unwrap();
        }
        for &(a, b) in pairs {
            let z = truth[a as usize].inverse() * truth[b as usize];
            g.add_edge(CalibEdge::new(a, b, z, Matrix6::identity())).unwrap();
        }
        g.set_fixed(0, true).unwrap();
        let (out, report) = optimize(&g, &opts).unwrap();
        let est: Vec<Pose> = out.nodes().iter().map(|n| n.pose).collect();
        let pose_err = gauge_align(&est, &truth, 0)
            .iter()
            .zip(&truth)
            .map(|(e, t)| {
                let (a, d) = e.distance(t);
                a.max(d)
            })
            .fold(0.0, f64::max);
        worst_cost = worst_cost.max(report.final_cost);
        worst_pose = worst_pose.max(pose_err);
        most_iterations = most_iterations.max(report.iterations);
        if !(report.final_cost < 1e-18 && pose_err < 1e-8 && report.iterations <= 15) {
            failures.push(format!(
                "case {k} (n={n}): cost {:.2e}, pose {pose_err:.2e}, {} iterations",
                report.final_cost, report.iterations
            ));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} graphs of 2..20 nodes, worst cost {worst_cost:.2e}, worst pose error {worst_pose:.2e}, at most {most_iterations} iterations{}",
            cases.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn jacobians() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ti = random_pose(&mut rng);
        let tj = random_pose(&mut rng);
        let z = nudge(&(ti.inverse() * tj), 0.5, &mut rng);
        let mut g = CalibGraph::new();
        g.add_node(SensorNode::new(0, ti)).unwrap();
        g.add_node(SensorNode::new(1, tj)).unwrap();
        g.add_edge(CalibEdge::new(0, 1, z, Matrix6::identity())).unwrap();
        let edge = g.edges()[0].clone();
        let analytic = edge_jacobians(&g, &edge, JacobianMode::Analytic).unwrap();

        for (node, a) in [(0, analytic.d_from), (1, analytic.d_to)] {
            let base = g.pose(node).unwrap();
            let mut numeric = Matrix6::zeros();
            for k in 0..6 {
                let mut d = Vector6::zeros();
                d[k] = h;
                let mut moved = g.clone();
                moved.set_pose(node, base.retract(&Twist(d)).unwrap()).unwrap();
                let plus = edge_error(&moved, &edge).unwrap().0;
                moved.set_pose(node, base.retract(&Twist(-d)).unwrap()).unwrap();
                let minus = edge_error(&moved, &edge).unwrap().0;
                numeric.set_column(k, &((plus - minus) / (2.0 * h)));
            }
            worst = worst.max((a - numeric).norm() / numeric.norm());
        }
    }
    check(worst < 1e-6, format!("100 edges, max relative error {worst:.2e}"))
}

/// Leave-one-out loop written directly from the definition. The `ρ_i` are
/// reduced in lexicographic order, the canonical summation order.
fn naive_jackknife(samples: &[Pose]) -> (Vector6<f64>, Vector6<f64>) {
    let m = samples.len();
    let full = tangent_mean(samples).unwrap();
    let mut rhos: Vec<Vector6<f64>> = (0..m)
        .map(|i| {
            let mut rest = samples.to_vec();
            rest.remove(i);
            (full.inverse() * tangent_mean(&rest).unwrap()).log().unwrap().0
        })
        .collect();
    rhos.sort_by(|a, b| {
        let (a, b): (Vec<f64>, Vec<f64>) = (a.iter().copied().collect(), b.iter().copied().collect());
        a.iter().zip(&b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut mean = Vector6::zeros();
    for r in &rhos {
        mean += r;
    }
    mean /= m as f64;
    let mut var = Vector6::zeros();
    for r in &rhos {
        var += (r - mean).component_mul(&(r - mean));
    }
    (mean, var * ((m - 1) as f64 / m as f64))
}

fn jackknife_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = vec![];
    for m in 5..=20 {
        let center = random_pose(&mut rng);
        let samples: Vec<Pose> = (0..m)
            .map(|_| center.retract(&sample_perturbation(&Vector6::repeat(0.02), &mut rng).unwrap()).unwrap())
            .collect();
        let v = jackknife(&MeanPose, &samples).unwrap();
        let (mean, var) = naive_jackknife(&samples);
        if v.variance != var || v.rho_hat.0 != mean {
            mismatches.push(m);
        }
    }
    let p = random_pose(&mut rng);
    let zero = (3..=20).all(|m| jackknife(&MeanPose, &vec![p; m]).unwrap().variance == Vector6::zeros());
    check(
        mismatches.is_empty() && zero,
        format!(
            "bitwise match for m = 5..20{}, zero variance on identical samples: {zero}",
            if mismatches.is_empty() { String::new() } else { format!(" except m = {mismatches:?}") }
        ),
    )
}

fn lie_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let axis = unit_vector(&mut rng);
        let angle = rng.random_range(0.0..=std::f64::consts::PI - 1e-3);
        let r = sensorgraph_core::Rotation::from_axis_angle(&axis, angle).unwrap();
        let t = Vector3::from_fn(|_, _| rng.random_range(-10.0..10.0));
        let p = Pose::new(r, t);
        let back = Pose::exp(&p.log().unwrap()).unwrap();
        let (a, d) = back.distance(&p);
        worst = worst.max(a).max(d);
    }
    check(worst < 1e-9, format!("10^4 poses, max exp(log(T)) error {worst:.2e}"))
}

fn metric_fixtures() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_d: f64 = 0.0;
    let mut worst_l: f64 = 0.0;
    for _ in 0..1000 {
        // rotating n about an axis perpendicular to it by θ gives cos θ
        let n = unit_vector(&mut rng);
        let axis = n.cross(&unit_vector(&mut rng)).normalize();
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let t = Pose::new(
            sensorgraph_core::Rotation::from_axis_angle(&axis, theta).unwrap(),
            Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)),
        );
        let scale = rng.random_range(0.1..10.0);
        let d = normal_alignment(&n, &(n * scale), &t).unwrap();
        worst_d = worst_d.max((d - theta.cos()).abs());

        let x = random_pose(&mut rng);
        let offset = unit_vector(&mut rng) * rng.random_range(0.0..0.2);
        let source: Vec<_> = (0..rng.random_range(1..50))
            .map(|_| Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0)))
            .collect();
        let target = source.iter().map(|p| x.act(p) + offset).collect();
        let corr = PointCorrespondences::new(source, target).unwrap();
        worst_l = worst_l.max((point_residual(&corr, &x) - offset.norm()).abs());
    }
    check(
        worst_d < 1e-9 && worst_l < 1e-12,
        format!("1000 cases, max |D - cos θ| {worst_d:.2e}, max |E_l - offset| {worst_l:.2e}"),
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> CalibGraph {
    let n = rng.random_range(2..12);
    let mut g = CalibGraph::new();
    for i in 0..n {
        let mut node = SensorNode::new(i as NodeId, random_pose(rng));
        if rng.random_bool(0.5) {
            node.label = format!("sensor {i}");
        }
        g.add_node(node).unwrap();
    }
    let kinds = [
        None,
        Some(EdgeKind::Stereo),
        Some(EdgeKind::HandEye),
        Some(EdgeKind::LidarCamera),
        Some(EdgeKind::LidarLidar),
        Some(EdgeKind::Tracking),
    ];
    for (a, b) in random_topology(n, n, rng) {
        let mut e = CalibEdge::new(a, b, random_pose(rng), random_information(rng) * rng.random_range(1e-3..1e6));
        e.kind = kinds[rng.random_range(0..kinds.len())];
        g.add_edge(e).unwrap();
    }
    g.set_fixed(0, true).unwrap();
    g
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn graph_gap(a: &CalibGraph, b: &CalibGraph) -> Option<f64> {
    if a.nodes().len() != b.nodes().len() || a.edges().len() != b.edges().len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    let mut pose = |p: &Pose, q: &Pose| {
        for (x, y) in p.translation.iter().zip(q.translation.iter()) {
            worst = worst.max(relative_gap(*x, *y));
        }
        for (x, y) in p.rotation.xyzw().iter().zip(q.rotation.xyzw().iter()) {
            worst = worst.max(relative_gap(*x, *y));
        }
    };
    for (n, m) in a.nodes().iter().zip(b.nodes()) {
        if (n.id, n.fixed, &n.label) != (m.id, m.fixed, &m.label) {
            return None;
        }
        pose(&n.pose, &m.pose);
    }
    for (e, f) in a.edges().iter().zip(b.edges()) {
        if (e.from, e.to, e.kind) != (f.from, f.to, f.kind) {
            return None;
        }
        pose(&e.measurement, &f.measurement);
    }
    for (e, f) in a.edges().iter().zip(b.edges()) {
        for (x, y) in e.information.iter().zip(f.information.iter()) {
            worst = worst.max(relative_gap(*x, *y));
        }
    }
    Some(worst)
}

fn format_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    let fixture = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/rig4.graph")).unwrap();
    let mut texts = vec![fixture];
    texts.extend((0..200).map(|_| write_graph(&random_graph(&mut rng))));
    for (k, text) in texts.iter().enumerate() {
        let first = parse_graph(text).unwrap().graph;
        let second = parse_graph(&write_graph(&first)).unwrap().graph;
        match graph_gap(&first, &second) {
            Some(gap) => worst = worst.max(gap),
            None => failures.push(format!("graph {k}: structure changed")),
        }
    }

    let edge = "EDGE_SE3:QUAT 0 1 0 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1";
    let malformed: [(String, usize); 6] = [
        (format!("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nVERTEX_SE3:QUAT 1 0 0 x 0 0 0 1\n{edge}\n"), 2),
        (format!("# header\n\n{edge}\nEDGE_SE3:QUAT 0 1 0 0 0 0 0 0 1 1\n"), 4),
        (format!("{edge}\nFIX 9\n"), 2),
        (format!("{edge}\nVERTEX_SE3:QUAT 3 0 0 0 0 0 0 0\n"), 2),
        (format!("{edge}\n{}\n", edge.replacen(" 1 0 0 0 0 0 1", " -1 0 0 0 0 0 1", 1)), 2),
        ("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nPOINT 1 2 3\n".into(), 2),
    ];
    for (text, line) in &malformed {
        match parse_graph(text) {
            Ok(_) => failures.push(format!("accepted {text:?}")),
            Err(e) if e.line != *line => failures.push(format!("{text:?}: reported line {} not {line}", e.line)),
            Err(_) => {}
        }
    }
    // other line-based formats share the diagnostics
    match parse_motion_pairs("A: 0 0 0 0 0 0 1  B: 0 0 0 0 0 0 1\nA: 0 0 0\n") {
        Err(e) if e.line == 2 => {}
        other => failures.push(format!("motion pairs: {other:?}")),
    }
    check(
        failures.is_empty() && worst <= 1e-15,
        format!(
            "{} graphs, max relative change {worst:.2e}, {} malformed files rejected at the right line{}",
            texts.len(),
            malformed.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("synthetic noise reduction", noise_reduction_study),
        ("optimization lowers global error", optimization_decreases_error),
        ("hand-eye exact recovery", hand_eye_exact),
        ("hand-eye noise robustness", hand_eye_noise),
        ("zero-noise graph recovery", zero_noise_recovery),
        ("edge Jacobians", jacobians),
        ("jackknife oracle", jackknife_oracle),
        ("Lie round trip", lie_round_trip),
        ("metric fixtures", metric_fixtures),
        ("graph format round trip", format_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
