//! Acceptance suite: every release criterion as one test, each printing a
//! pass line with the measured figure (run with `--nocapture` to see them).

use kickdyn::mat::{self, C64};
use kickdyn::sim::{self, KickSchedule, KickedModel};
use kickdyn::squarewave;
use kickdyn::threelevel::{
    sweep_period, KickImpulse3, Regime, SpecialImpulse3, SpecialKicked, SweepOptions,
    ThreeLevelParams, ThreeLevelSpecialParams,
};
use kickdyn::twolevel::{
    self, effective_hamiltonian, f_functions, Impulse2, KickParams2, TwoLevelParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn pass(criterion: &str, detail: String) {
    println!("PASS {criterion}: {detail}");
}

#[test]
fn criterion_01_stroboscopic_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_811);
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < 200 {
        let sys = TwoLevelParams::new(
            rng.gen_range(-200.0..200.0),
            rng.gen_range(0.1..10.0),
            rng.gen_range(-3.1..3.1),
        )
        .unwrap();
        let imp = Impulse2::new(
            rng.gen_range(-200.0..200.0),
            rng.gen_range(0.0..10.0),
            rng.gen_range(-3.1..3.1),
        )
        .unwrap();
        let kick = KickParams2::new(rng.gen_range(0.001..2.0), imp).unwrap();
        let f = f_functions(&sys, &kick);
        if f.f1.abs() >= 1.0 - 1e-9 {
            continue;
        }
        done += 1;
        let eff = effective_hamiltonian(&sys, &kick);
        let u = f.matrix();
        let eff_spec = mat::Spectral2::new(&eff.hamiltonian()).unwrap();
        let step = eff_spec.expm(kick.period);
        let mut s = [C64::ONE, C64::ZERO];
        let mut e = [C64::ONE, C64::ZERO];
        for n in 1..=1000usize {
            s = u.apply(&s);
            e = step.apply(&e);
            let d = (s[0].norm_sqr() - e[0].norm_sqr())
                .abs()
                .max((s[1].norm_sqr() - e[1].norm_sqr()).abs());
            worst = worst.max(d);
            assert!(d < 1e-9, "draw {done}, n = {n}: population deviation {d}");
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "runtime {dt:?}");
    pass(
        "criterion 1 (stroboscopic exactness)",
        format!("200 draws x 1000 periods, worst population deviation {worst:.2e}, {dt:?}"),
    );
}

#[test]
fn criterion_02_cdc_reproduction() {
    let start = Instant::now();
    let sys = TwoLevelParams::new(100.0, 1.0, 0.0).unwrap();
    let kick = KickParams2::new(0.0628, Impulse2::new(56.5133, 1.0, 0.0).unwrap()).unwrap();
    let model = KickedModel::two_level(&sys, &kick).unwrap();
    let traj = sim::evolve(&model, &KickSchedule::kicked(500), 20);
    let p2max = traj.max_population(1);
    assert!(p2max < 0.01, "max P2 = {p2max}");
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?}");
    pass(
        "criterion 2 (coherent destruction of coupling)",
        format!("max P2 over 500 periods = {p2max:.2e}, {dt:?}"),
    );
}

#[test]
fn criterion_03_near_destruction_limits() {
    let start = Instant::now();
    let sys = TwoLevelParams::new(100.0, 1.0, 0.0).unwrap();
    let mut worst = 0.0f64;
    // frequency kick: E' = m pi - 1e-4 via the detuning
    for m in 5..=12u32 {
        let e1p = m as f64 * std::f64::consts::PI - 1e-4;
        let d1p = 2.0 * (e1p * e1p - sys.omega1 * sys.omega1).sqrt();
        let imp = Impulse2::new(d1p, sys.omega1, sys.theta1).unwrap();
        let numeric = twolevel::omega_eff_at_best_resonance(&sys, &imp);
        let limit = sys.omega1 * (1.0 - sys.delta1 / d1p).abs();
        let rel = (numeric - limit).abs() / limit;
        worst = worst.max(rel);
        assert!(rel < 0.01, "frequency kick m = {m}: relative error {rel}");
    }
    // amplitude kick: E' = m pi - 1e-4 via the coupling; needs
    // m pi > Delta/2, so the first eight admissible m start at 16
    for m in 16..=23u32 {
        let e1p = m as f64 * std::f64::consts::PI - 1e-4;
        let o1p = (e1p * e1p - sys.delta1 * sys.delta1 / 4.0).sqrt();
        let imp = Impulse2::new(sys.delta1, o1p, sys.theta1).unwrap();
        let numeric = twolevel::omega_eff_at_best_resonance(&sys, &imp);
        let limit = (sys.omega1 - o1p).abs();
        let rel = (numeric - limit).abs() / limit;
        worst = worst.max(rel);
        assert!(rel < 0.01, "amplitude kick m = {m}: relative error {rel}");
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?}");
    pass(
        "criterion 3 (near-destruction coupling limits)",
        format!("worst relative error {worst:.2e} over 16 offsets, {dt:?}"),
    );
}

#[test]
fn criterion_04_su2_and_unitarity_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_norm = 0.0f64;
    let mut worst_unit = 0.0f64;
    for _ in 0..10_000 {
        let sys = TwoLevelParams::new(
            rng.gen_range(-1000.0..1000.0),
            rng.gen_range(0.01..100.0),
            rng.gen_range(-3.1..3.1),
        )
        .unwrap();
        let imp = Impulse2::new(
            rng.gen_range(-500.0..500.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(-3.1..3.1),
        )
        .unwrap();
        let kick = KickParams2::new(rng.gen_range(1e-4..10.0), imp).unwrap();
        let f = f_functions(&sys, &kick);
        worst_norm = worst_norm.max(f.su2_norm_error());
        worst_unit = worst_unit.max(f.matrix().unitarity_error());
        assert!(f.su2_norm_error() < 1e-10);
        assert!(f.matrix().unitarity_error() < 1e-12);
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "runtime {dt:?}");
    pass(
        "criterion 4 (SU(2) norm and unitarity)",
        format!("1e4 draws, worst norm error {worst_norm:.2e}, worst unitarity {worst_unit:.2e}, {dt:?}"),
    );
}

#[test]
fn criterion_05_three_level_regime_switching() {
    let start = Instant::now();
    let sys = ThreeLevelParams::new([60.0, 40.0], [1.0, 2.0], [0.0, 0.0]).unwrap();
    let amp = KickImpulse3 {
        deltap: [60.0, 40.0],
        omegap: [1.5, 2.0],
        thetap: [0.0, 0.0],
    };
    let phase = KickImpulse3 {
        deltap: [60.0, 40.0],
        omegap: [1.0, 2.0],
        thetap: [std::f64::consts::PI, 0.0],
    };
    let opts = SweepOptions::default();
    let cases = [
        (&amp, 0.0424, Regime::OnePhoton, "amplitude one-photon"),
        (&amp, 0.104, Regime::TwoPhoton, "amplitude two-photon"),
        (&phase, 0.04318, Regime::OnePhoton, "phase one-photon"),
        (&phase, 0.1046, Regime::TwoPhoton, "phase two-photon"),
    ];
    let mut detail = String::new();
    for (imp, t, want, label) in cases {
        let p = &sweep_period(&sys, imp, &[t], &opts).unwrap()[0];
        assert_eq!(p.regime, want, "{label} at T = {t}: {p:?}");
        match want {
            Regime::OnePhoton => {
                assert!(p.p2_max > 0.9 && p.p3_max < 0.1, "{label}: {p:?}")
            }
            Regime::TwoPhoton => {
                assert!(p.p3_max > 0.9 && p.p2_max < 0.1, "{label}: {p:?}")
            }
            _ => unreachable!(),
        }
        detail.push_str(&format!(
            "{label} T={t}: P2max={:.3} P3max={:.3}; ",
            p.p2_max, p.p3_max
        ));
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "runtime {dt:?}");
    pass(
        "criterion 5 (three-level regime switching)",
        format!("{detail}{dt:?}"),
    );
}

#[test]
fn criterion_06_special_three_level_extraction() {
    let start = Instant::now();
    let sys = ThreeLevelSpecialParams::new(100.0, 1.0, 0.0).unwrap();
    let imp = SpecialImpulse3::new(18.0, 1.0, 0.0).unwrap();
    let kicked = SpecialKicked::new(sys, imp).unwrap();
    let periods = kicked.resonance_periods(3);
    assert!(periods.len() >= 2, "periods {periods:?}");
    let t = periods[1];
    let check = kicked.consistency_check(t);
    let worst_res = check.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(
        check.pass && worst_res < 1e-8,
        "residuals {:?}",
        check.residuals
    );
    let eff = kicked.effective_hamiltonian(t).unwrap();
    let u = kicked.one_period(t);
    let eff_spec = mat::Spectral3::new(&eff.hamiltonian()).unwrap();
    let step = eff_spec.expm(t);
    let n_max = (10.0 * std::f64::consts::PI / (eff.omega_eff * t)).ceil() as usize;
    let mut s = [C64::ONE, C64::ZERO, C64::ZERO];
    let mut e = s;
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        s = u.apply(&s);
        e = step.apply(&e);
        for j in 0..3 {
            let d = (s[j].norm_sqr() - e[j].norm_sqr()).abs();
            worst = worst.max(d);
            assert!(d < 0.05, "population deviation {d} at period {n}");
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "runtime {dt:?}");
    pass(
        "criterion 6 (special three-level extraction)",
        format!(
            "T = {t:.6}, omega_eff = {:.6}, worst residual {worst_res:.2e}, stroboscopic deviation {worst:.2e} over {n_max} periods, {dt:?}",
            eff.omega_eff
        ),
    );
}

#[test]
fn criterion_07_population_inversion() {
    let start = Instant::now();
    let sys = TwoLevelParams::new(35.0, 1.0, 0.0).unwrap();
    let kick = KickParams2::new(0.0506, Impulse2::new(35.0, 4.0, 0.0).unwrap()).unwrap();
    let eff = effective_hamiltonian(&sys, &kick);
    let n_eff = sim::n_eff(eff.omega_eff, kick.period).unwrap();
    assert!((n_eff - 12.0).abs() < 0.5, "N_eff = {n_eff}");
    let model = KickedModel::two_level(&sys, &kick).unwrap();
    let traj = sim::evolve(&model, &KickSchedule::inversion(2.0, 12, 4.0), 20);
    let final_p2 = traj.final_population(1);
    assert!(final_p2 > 0.95, "final P2 = {final_p2}");
    let t_end = *traj.times.last().unwrap();
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for i in 0..traj.len() {
        if traj.times[i] > t_end - 4.0 + 1e-9 {
            let p = traj.population(i, 1);
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    assert!(hi - lo < 0.05, "post-removal oscillation {}", hi - lo);
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?}");
    pass(
        "criterion 7 (population inversion)",
        format!(
            "N_eff = {n_eff:.3}, final P2 = {final_p2:.4}, post-removal oscillation {:.4}, {dt:?}",
            hi - lo
        ),
    );
}

#[test]
fn criterion_08_square_wave_realization() {
    let start = Instant::now();
    let sys = TwoLevelParams::new(1000.0, 1.0, 0.0).unwrap();
    let pt = squarewave::frequency_kick_point(&sys, 12.3).unwrap();
    let rel = (pt.omega_eff_prime - 0.9753).abs() / 0.9753;
    assert!(
        rel < 1e-3,
        "omega_eff_prime = {} ({rel:.2e} off)",
        pt.omega_eff_prime
    );
    // every emitted branch reproduces the impulse propagator
    let imp = Impulse2::new(12.3, 1.0, 0.0).unwrap();
    let target = mat::expm_hermitian2(&imp.matrix(), 1.0).unwrap();
    let branches = squarewave::square_branches(&imp, 0..=4).unwrap();
    assert!(!branches.is_empty());
    let mut worst_eq = 0.0f64;
    for b in &branches {
        let u = mat::expm_hermitian2(&b.pulse.matrix(), b.duration).unwrap();
        let d = u.phase_dist(&target);
        worst_eq = worst_eq.max(d);
        assert!(d < 1e-10, "branch k = {}: equivalence residual {d}", b.k);
    }
    // coupling never exceeds the bare coupling over the map grid
    let mut max_prime = 0.0f64;
    for i in 0..46 {
        let d1 = 100.0 + 900.0 * i as f64 / 45.0;
        for j in 0..93 {
            let d1p = 4.0 + 46.0 * j as f64 / 92.0;
            let s = TwoLevelParams::new(d1, 1.0, 0.0).unwrap();
            let p = squarewave::frequency_kick_point(&s, d1p).unwrap();
            max_prime = max_prime.max(p.omega_eff_prime);
        }
    }
    assert!(
        max_prime < sys.omega1,
        "max omega_eff_prime on grid = {max_prime}"
    );
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "runtime {dt:?}");
    pass(
        "criterion 8 (square-wave realization)",
        format!(
            "omega_eff_prime = {:.6} (rel {rel:.1e}), worst equivalence {worst_eq:.1e}, grid max {max_prime:.4} < 1, {dt:?}",
            pt.omega_eff_prime
        ),
    );
}

#[test]
fn criterion_09_validity_metric_trends() {
    let start = Instant::now();
    let sys = TwoLevelParams::new(40.0, 1.0, 0.0).unwrap();
    // monotone decreasing deviation along an increasing-detuning slice
    let slice = [20.0, 40.0, 60.0, 70.0, 100.0];
    let devs: Vec<f64> = slice
        .iter()
        .map(|&d1p| {
            let kick = KickParams2::new(0.05, Impulse2::new(d1p, 1.0, 0.0).unwrap()).unwrap();
            let horizon = sim::validity_horizon(&sys, &kick);
            sim::validity_deviation(&sys, &kick, horizon, kick.period / 20.0).unwrap()
        })
        .collect();
    for w in devs.windows(2) {
        assert!(w[0] > w[1], "slice not monotone: {devs:?}");
    }
    // exact at stroboscopic-only sampling
    let kick = KickParams2::new(0.05, Impulse2::new(40.0, 1.0, 0.0).unwrap()).unwrap();
    let strobe = sim::validity_deviation(&sys, &kick, 200.0 * kick.period, kick.period).unwrap();
    assert!(strobe < 1e-8, "stroboscopic deviation {strobe}");
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 20.0, "runtime {dt:?}");
    pass(
        "criterion 9 (validity-metric trends)",
        format!("slice deviations {devs:?}, stroboscopic {strobe:.1e}, {dt:?}"),
    );
}

#[test]
fn criterion_10_preset_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_kickdyn");
    let tmp = tempfile::tempdir().unwrap();
    let run = |threads: &str, tag: &str| -> std::collections::BTreeMap<String, Vec<u8>> {
        let mut all = std::collections::BTreeMap::new();
        for id in kickdyn_cli::presets::FIGURE_IDS {
            let dir = tmp.path().join(format!("{tag}_{id}"));
            let status = std::process::Command::new(bin)
                .args(["--threads", threads, "figure", id, "--out-dir"])
                .arg(&dir)
                .stdout(std::process::Stdio::null())
                .status()
                .expect("run binary");
            assert!(status.success(), "figure {id} failed");
            for entry in std::fs::read_dir(&dir).unwrap() {
                let p = entry.unwrap().path();
                let name = p.file_name().unwrap().to_string_lossy().to_string();
                all.insert(name, std::fs::read(&p).unwrap());
            }
        }
        all
    };
    let a = run("8", "a");
    let b = run("8", "b");
    let c = run("1", "c");
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), c.len());
    for (name, bytes) in &a {
        assert_eq!(bytes, &b[name], "{name} differs between identical runs");
        assert_eq!(bytes, &c[name], "{name} differs between 8 and 1 threads");
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "runtime {dt:?}");
    pass(
        "criterion 10 (preset determinism)",
        format!(
            "{} output files byte-identical across 2 runs and thread counts 8/1, {dt:?}",
            a.len()
        ),
    );
}
