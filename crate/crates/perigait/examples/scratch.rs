use perigait::gait::{gait_frame, GaitParams};
use perigait::robot::{JointKind, RobotSpec};
use perigait::sim::{SimConfig, Trajectory, World};
use perigait::terrain::{generate_rugose, RugoseParams, Terrain};

fn drive(
    spec: &RobotSpec,
    gait: &GaitParams,
    sim: &SimConfig,
    terrain: &Terrain,
    nose_x: f64,
    cycles: u32,
) -> Result<Trajectory, perigait::Error> {
    let state = spec.assemble(nose_x, gait.l_ext, terrain)?;
    let mut world = World::new(spec, sim, terrain, state)?;
    let period = gait.cycle_period();
    let ticks = sim.control_ticks_per_cycle;
    let tick_dur = period / ticks as f64;
    let steps_per_tick = (tick_dur / sim.dt).round().max(1.0) as usize;
    let dt = tick_dur / steps_per_tick as f64;

    let hold = gait_frame(&gait.scaled(0.0), 0.0);
    let settle_ticks = (sim.settle_time / tick_dur).ceil() as usize;
    for _ in 0..settle_ticks * steps_per_tick {
        world.step(&hold, dt)?;
    }
    let total = cycles as usize * ticks as usize;
    let ramp = sim.ramp_cycles * period;
    let mut samples = Vec::new();
    for tick in 0..total {
        let t = tick as f64 * tick_dur;
        samples.push(world.sample(t)?);
        let scale = if ramp > 0.0 { (t / ramp).min(1.0) } else { 1.0 };
        let mut cmds = gait_frame(&gait.scaled(scale), t);
        let n = cmds.len();
        let vals: Vec<(f64, f64)> = cmds.iter().map(|c| (c.alpha, c.l)).collect();
        for j in 0..n {
            cmds[j].alpha = vals[n - 1 - j].0.clamp(-spec.pitch_limit, spec.pitch_limit);
            cmds[j].l = vals[n - 1 - j].1;
        }
        for _ in 0..steps_per_tick {
            world.step(&cmds, dt)?;
        }
    }
    samples.push(world.sample(total as f64 * tick_dur)?);
    Ok(Trajectory {
        samples,
        tick_duration: tick_dur,
        dt,
        cycles,
        ticks_per_cycle: ticks,
    })
}

// Sustained top-face contact: some leg tip in contact, standing on a cell at
// edge height or above, for >= 0.1 cycle of consecutive samples.
fn climbed(traj: &Trajectory, terrain: &Terrain) -> Option<f64> {
    let top = terrain.edge_height().unwrap();
    let need = (0.1 * traj.ticks_per_cycle as f64).ceil() as usize;
    let mut run = 0usize;
    for s in &traj.samples {
        let mut on_top = false;
        for (tip, touch) in s.tips.iter().zip(&s.tip_contact) {
            if !*touch {
                continue;
            }
            if let Ok(i) = terrain.cell_at(tip.x) {
                let sink = top - tip.z;
                if terrain.cell_height(i) >= top - 1e-9 && sink <= 0.002 && tip.x > sink {
                    on_top = true;
                }
            }
        }
        if on_top {
            run += 1;
            if run >= need {
                return Some(s.t / (traj.tick_duration * traj.ticks_per_cycle as f64));
            }
        } else {
            run = 0;
        }
    }
    None
}

// Net forward drift of the nose while the head tip is airborne, per cycle.
fn lifted_drift(traj: &Trajectory) -> f64 {
    let mut drift = 0.0;
    for pair in traj.samples.windows(2) {
        if !pair[0].tip_contact[0] {
            drift += pair[1].nose.x - pair[0].nose.x;
        }
    }
    drift / traj.cycles as f64
}

// Net forward drift of the nose while it rides above its standing height.
fn arc_drift(traj: &Trajectory, z_thresh: f64) -> f64 {
    let mut drift = 0.0;
    for pair in traj.samples.windows(2) {
        if pair[0].nose.z > z_thresh {
            drift += pair[1].nose.x - pair[0].nose.x;
        }
    }
    drift / traj.cycles as f64
}

// One line per cycle tick: head airborne (A/.) and gap-0 extension (E/c).
fn alignment(traj: &Trajectory, gait: &GaitParams) {
    let ticks = traj.ticks_per_cycle as usize;
    let last = traj.samples.len() - 1 - ticks..traj.samples.len() - 1;
    let mut air = String::new();
    let mut ext = String::new();
    for idx in last {
        let s = &traj.samples[idx];
        air.push(if s.tip_contact[0] { '.' } else { 'A' });
        // commanded gap-0 rate at this instant, wave index n-1 under reversal
        let n = gait.n as f64;
        let psi = 2.0 * std::f64::consts::PI * gait.k * (n - 1.0) / n
            - gait.omega * s.t
            - gait.phi;
        // l = l_ext - dl sin(psi), dpsi/dt = -omega, so ldot = dl*omega*cos(psi)
        ext.push(if psi.cos() >= 0.0 { 'E' } else { 'c' });
    }
    println!("  air: {air}");
    println!("  ext: {ext}");
}

// Circular mean of airborne tick positions over the last cycle, in ticks.
fn airborne_center(traj: &Trajectory) -> f64 {
    let ticks = traj.ticks_per_cycle as usize;
    let last = traj.samples.len() - 1 - ticks..traj.samples.len() - 1;
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    for (pos, idx) in last.enumerate() {
        if !traj.samples[idx].tip_contact[0] {
            let ang = 2.0 * std::f64::consts::PI * pos as f64 / ticks as f64;
            sx += ang.cos();
            sy += ang.sin();
        }
    }
    let c = sy.atan2(sx).rem_euclid(2.0 * std::f64::consts::PI);
    c * ticks as f64 / (2.0 * std::f64::consts::PI)
}

fn speed(traj: &Trajectory, spec: &RobotSpec) -> f64 {
    traj.displacement_x() / (spec.total_length * traj.cycles as f64)
}

fn apex_reach(traj: &Trajectory) -> (f64, f64) {
    let ticks = traj.ticks_per_cycle as usize;
    let last = &traj.samples[traj.samples.len() - 1 - ticks..traj.samples.len() - 1];
    let mut apex = f64::MIN;
    let mut reach = f64::MIN;
    for s in last {
        let tip = s.tips[0];
        apex = apex.max(tip.z);
        if tip.z > 0.125 {
            reach = reach.max(tip.x - s.nose.x.min(0.0));
        }
    }
    (apex, reach)
}

fn probe(upper: f64, lower: f64) {
    let sim = SimConfig::default();
    let flat = Terrain::flat();
    let step = Terrain::step(0.125);
    let pi = std::f64::consts::PI;
    let base = RobotSpec {
        leg_upper_length: upper,
        leg_lower_length: lower,
        ..RobotSpec::default()
    };
    println!("== legs {upper:.3}+{lower:.3} standing {:.4}", base.standing_height());

    let mut sp = [0.0f64; 2];
    for (i, phi) in [pi, 1.5 * pi].into_iter().enumerate() {
        let gait = GaitParams { phi, ..GaitParams::default() };
        sp[i] = drive(&base, &gait, &sim, &flat, 0.0, 3)
            .map(|t| speed(&t, &base))
            .unwrap_or(f64::NAN);
    }
    println!("  flat: v(pi) {:+.4} v(3pi/2) {:+.4} ratio {:.3}", sp[0], sp[1], sp[1] / sp[0]);

    let mut d = [0.0f64; 2];
    for (i, kind) in [JointKind::TwoDof, JointKind::PitchOnly].into_iter().enumerate() {
        let spec = RobotSpec { joint_kind: kind, ..base };
        let gait = GaitParams {
            a_vert: 50f64.to_radians(),
            delta_l: if kind == JointKind::TwoDof { 0.01 } else { 0.0 },
            ..GaitParams::default()
        };
        d[i] = drive(&spec, &gait, &sim, &step, -spec.module_length, 5)
            .map(|t| lifted_drift(&t))
            .unwrap_or(f64::NAN);
    }
    println!("  drift A=50: two-dof {:+.4} pitch-only {:+.4} {}", d[0], d[1],
        if d[0] < d[1] { "OK" } else { "x" });

    for kind in [JointKind::TwoDof, JointKind::PitchOnly] {
        let spec = RobotSpec { joint_kind: kind, ..base };
        print!("  {kind:?}\n");
        for a in [20.0f64, 35.0, 50.0, 65.0, 80.0] {
            print!("    A={a:2.0}: ");
            for tenths in 5..=15 {
                let nose_x = -(tenths as f64) * 0.1 * spec.module_length;
                let gait = GaitParams {
                    a_vert: a.to_radians(),
                    delta_l: if kind == JointKind::TwoDof { 0.01 } else { 0.0 },
                    ..GaitParams::default()
                };
                match drive(&spec, &gait, &sim, &step, nose_x, 5) {
                    Ok(traj) => print!("{}", if climbed(&traj, &step).is_some() { 'Y' } else { '.' }),
                    Err(_) => print!("E"),
                }
            }
            println!();
        }
    }
}


fn steady_speed(traj: &Trajectory, spec: &RobotSpec) -> f64 {
    let ticks = traj.ticks_per_cycle as usize;
    let first = &traj.samples[ticks];
    let last = traj.samples.last().unwrap();
    let cycles = traj.cycles as f64 - 1.0;
    let dx: f64 = last.poses.iter().map(|p| p.com.x).sum::<f64>()
        - first.poses.iter().map(|p| p.com.x).sum::<f64>();
    dx / spec.n_modules as f64 / (spec.total_length * cycles)
}

fn approach_rel_drift(traj: &Trajectory, wall_x: f64) -> f64 {
    let tpc = traj.ticks_per_cycle as usize;
    let hit = traj
        .samples
        .iter()
        .position(|s| s.nose.x >= wall_x - 0.02)
        .unwrap_or(traj.samples.len());
    let whole = hit / tpc;
    if whole < 2 {
        return f64::NAN;
    }
    let mut dx_sum = 0.0;
    for w in traj.samples[tpc..whole * tpc].windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.nose.z <= a.nose.z {
            continue;
        }
        dx_sum += b.nose.x - a.nose.x;
    }
    dx_sum / (whole - 1) as f64
}

fn main() {
    let flat = Terrain::flat();
    let mk = || RobotSpec {
        leg_mount_x: 0.05,
        leg_upper_length: 0.029,
        leg_lower_length: 0.015,
        leaf_spring_stiffness: 1500.0,
        ..RobotSpec::default()
    };
    for dt in [1e-4f64, 5e-5] {
        let sim = SimConfig {
            friction_regularization_velocity: 1e-5,
            dt,
            ..SimConfig::default()
        };
        let gait = GaitParams::default();
        let spec = mk();
        let v = drive(&spec, &gait, &sim, &flat, 0.0, 4)
            .map(|t| steady_speed(&t, &spec))
            .unwrap_or(f64::NAN);
        println!("dt {dt:.0e}: v {v:+.5} BL/cyc");
    }
}
