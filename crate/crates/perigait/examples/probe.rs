use std::time::Instant;

use perigait::gait::GaitParams;
use perigait::harness::{
    run_amp_sweep_flat, run_climb_prob, run_phase_sweep, run_rugose_traverse, ExperimentPlan,
};
use perigait::metrics::rising_nose_drift;
use perigait::robot::{JointKind, RobotSpec};
use perigait::sim::{run_gait, SimConfig};
use perigait::terrain::Terrain;

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn main() {
    let t0 = Instant::now();

    // C3/C4: phase sweep.
    let plan = ExperimentPlan::phase_sweep(0);
    let out = run_phase_sweep(&plan, 0).unwrap();
    let curve = &out.results[0];
    println!("phase sweep ({:?}):", t0.elapsed());
    for p in &curve.points {
        println!("  phi {:5.3}: {:+.4} +- {:.4}", p.sweep_value, p.mean, p.stddev);
    }
    let v_pi = curve.points[4].mean;
    let v_3pi2 = curve.points[6].mean;
    println!(
        "C3 ratio {:.3} (need >= 1.25) {}",
        v_3pi2 / v_pi,
        if v_3pi2 > v_pi * 1.25 { "PASS" } else { "FAIL" }
    );
    println!(
        "C4 v(3pi/2) {:.4} in [0.125, 0.375] {}",
        v_3pi2,
        if (0.125..=0.375).contains(&v_3pi2) { "PASS" } else { "FAIL" }
    );
    println!("endpoints: {:+.4} vs {:+.4}", curve.points[0].mean, curve.points[8].mean);

    // C5: flat amplitude sweep at the default grid.
    let t1 = Instant::now();
    let plan = ExperimentPlan::amp_sweep_flat(0);
    let out = run_amp_sweep_flat(&plan, 0).unwrap();
    println!("amp sweep flat ({:?}):", t1.elapsed());
    let amps: Vec<f64> = plan.sweep.iter().map(|a| a.to_degrees()).collect();
    let two: Vec<f64> = out.results[0].points.iter().map(|p| p.mean).collect();
    let pitch: Vec<f64> = out.results[1].points.iter().map(|p| p.mean).collect();
    for i in 0..amps.len() {
        println!(
            "  A {:4.0}: two {:+.4} pitch {:+.4} ratio {:+.3}",
            amps[i], two[i], pitch[i], out.ratios[i].ratio.ratio
        );
    }
    let rho = spearman(&amps, &two);
    println!("C5 spearman {:.3} (need > 0.8)", rho);
    println!(
        "C5 two>=pitch everywhere: {}",
        two.iter().zip(&pitch).all(|(a, b)| a >= b)
    );
    println!(
        "C5 ratio>1 everywhere: {}",
        out.ratios.iter().all(|r| r.ratio.ratio > 1.0)
    );

    // C6: climb probabilities.
    let t2 = Instant::now();
    let plan = ExperimentPlan::climb_prob(0);
    let out = run_climb_prob(&plan, 0).unwrap();
    println!("climb prob ({:?}):", t2.elapsed());
    let amps: Vec<f64> = plan.sweep.iter().map(|a| a.to_degrees()).collect();
    let two: Vec<f64> = out.results[0].points.iter().map(|p| p.mean).collect();
    let pitch: Vec<f64> = out.results[1].points.iter().map(|p| p.mean).collect();
    for i in 0..amps.len() {
        println!("  A {:4.0}: two {:.1} pitch {:.1}", amps[i], two[i], pitch[i]);
    }
    let dominance = two.iter().zip(&pitch).all(|(a, b)| a >= b);
    let strict = two.iter().zip(&pitch).filter(|(a, b)| a > b).count();
    let p35 = pitch[1];
    println!(
        "C6 dominance {} strict_count {} pitch@35 {} -> {}",
        dominance,
        strict,
        p35,
        if dominance && strict >= 2 && p35 == 0.0 { "PASS" } else { "FAIL" }
    );

    // C7: rugose traverse + flat ratios at matched amplitudes.
    let t3 = Instant::now();
    let plan = ExperimentPlan::rugose_traverse(0);
    let out = run_rugose_traverse(&plan, 0).unwrap();
    println!("rugose traverse ({:?}):", t3.elapsed());
    let mut flat_plan = ExperimentPlan::amp_sweep_flat(0);
    flat_plan.sweep = plan.sweep.clone();
    let flat = run_amp_sweep_flat(&flat_plan, 0).unwrap();
    let amps: Vec<f64> = plan.sweep.iter().map(|a| a.to_degrees()).collect();
    let two: Vec<f64> = out.results[0].points.iter().map(|p| p.mean).collect();
    let pitch: Vec<f64> = out.results[1].points.iter().map(|p| p.mean).collect();
    for i in 0..amps.len() {
        println!(
            "  A {:4.0}: two {:+.4} pitch {:+.4} rug_ratio {:+.2} flat_ratio {:+.2} x{:.1}",
            amps[i],
            two[i],
            pitch[i],
            out.ratios[i].ratio.ratio,
            flat.ratios[i].ratio.ratio,
            out.ratios[i].ratio.ratio / flat.ratios[i].ratio.ratio
        );
    }
    println!(
        "C7 two>pitch everywhere: {}",
        two.iter().zip(&pitch).all(|(a, b)| a > b)
    );
    println!(
        "C7 rug>=5x flat everywhere: {}",
        out.ratios
            .iter()
            .zip(&flat.ratios)
            .all(|(r, f)| r.ratio.ratio >= 5.0 * f.ratio.ratio)
    );

    // C8: rising-nose drift on the step approach at A=50.
    let t4 = Instant::now();
    let sim = SimConfig::default();
    let step = Terrain::step(0.125);
    let mut drift = [0.0f64; 2];
    for (i, kind) in [JointKind::TwoDof, JointKind::PitchOnly].into_iter().enumerate() {
        let spec = RobotSpec {
            joint_kind: kind,
            ..RobotSpec::default()
        };
        let gait = GaitParams {
            a_vert: 50f64.to_radians(),
            delta_l: if kind == JointKind::TwoDof { 0.01 } else { 0.0 },
            ..GaitParams::default()
        };
        let nose_x = -3.75 * spec.module_length;
        let traj = run_gait(&spec, &gait, &sim, &step, nose_x, 6).unwrap();
        drift[i] = rising_nose_drift(&traj, -0.02).unwrap();
    }
    println!(
        "C8 two {:+.4} pitch {:+.4} ({:?}) -> {}",
        drift[0],
        drift[1],
        t4.elapsed(),
        if drift[0] < drift[1] { "PASS" } else { "FAIL" }
    );

    println!("total {:?}", t0.elapsed());
}
