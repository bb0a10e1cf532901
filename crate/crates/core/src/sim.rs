//! Generic kicked-evolution engine for dimension-2/3 systems: schedules with
//! kicked and free segments, sampled trajectories, the effective-Hamiltonian
//! validity metric, and the add/remove-kick application scenarios
//! (population inversion, selective transitions).

use crate::error::{Error, Result};
use crate::mat::{self, norm_sq, Mat3, SmallMat, Spectral2, Spectral3, C64};
use crate::threelevel::{KickParams3, ThreeLevelParams};
use crate::twolevel::{effective_hamiltonian, EffectiveHamiltonian2, KickParams2, TwoLevelParams};

/// A time-independent free generator that can produce its propagator at any
/// offset; implemented by the spectral caches of both dimensions.
pub trait FreeGenerator: Copy {
    type Mat: SmallMat;
    fn propagator(&self, t: f64) -> Self::Mat;
}

impl FreeGenerator for Spectral2 {
    type Mat = mat::Mat2;
    fn propagator(&self, t: f64) -> mat::Mat2 {
        self.expm(t)
    }
}

impl FreeGenerator for Spectral3 {
    type Mat = Mat3;
    fn propagator(&self, t: f64) -> Mat3 {
        self.expm(t)
    }
}

/// Free evolution plus the impulse map, with the kick period.
#[derive(Clone, Copy, Debug)]
pub struct KickedModel<G: FreeGenerator> {
    pub free: G,
    pub impulse_prop: G::Mat,
    pub period: f64,
}

impl KickedModel<Spectral2> {
    pub fn two_level(sys: &TwoLevelParams, kick: &KickParams2) -> Result<Self> {
        Ok(KickedModel {
            free: Spectral2::new(&sys.hamiltonian())?,
            impulse_prop: mat::expm_hermitian2(&kick.impulse.matrix(), 1.0)?,
            period: kick.period,
        })
    }
}

impl KickedModel<Spectral3> {
    pub fn three_level(sys: &ThreeLevelParams, kick: &KickParams3) -> Result<Self> {
        Ok(KickedModel {
            free: Spectral3::new(&sys.hamiltonian())?,
            impulse_prop: mat::expm_hermitian3(&kick.impulse.matrix(), 1.0)?,
            period: kick.period,
        })
    }
}

/// One schedule segment: an integer number of kicked periods (free evolution
/// for T, then the impulse, repeated) or a plain free stretch of arbitrary
/// duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    Kicked { periods: usize },
    Free { time: f64 },
}

/// Ordered segments; kicks exist only inside `Kicked` segments, and the
/// kick at the very start of a kicked segment is not applied (the impulse
/// closes each period).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KickSchedule {
    pub segments: Vec<Segment>,
}

impl KickSchedule {
    /// All-kicked schedule of `periods` periods.
    pub fn kicked(periods: usize) -> Self {
        KickSchedule {
            segments: vec![Segment::Kicked { periods }],
        }
    }

    /// free -> kicked(n) -> free, the add/remove-kicks scenario.
    pub fn inversion(pre_time: f64, kicks: usize, post_time: f64) -> Self {
        let mut segments = Vec::new();
        if pre_time > 0.0 {
            segments.push(Segment::Free { time: pre_time });
        }
        segments.push(Segment::Kicked { periods: kicks });
        if post_time > 0.0 {
            segments.push(Segment::Free { time: post_time });
        }
        KickSchedule { segments }
    }
}

/// Time-sampled states with their populations.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    amps: Vec<C64>,
}

impl Trajectory {
    fn new(dim: usize) -> Self {
        Trajectory {
            dim,
            times: Vec::new(),
            amps: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, state: &[C64]) {
        debug_assert_eq!(state.len(), self.dim);
        self.times.push(t);
        self.amps.extend_from_slice(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[C64] {
        &self.amps[i * self.dim..(i + 1) * self.dim]
    }

    pub fn population(&self, i: usize, level: usize) -> f64 {
        self.state(i)[level].norm_sqr()
    }

    pub fn final_population(&self, level: usize) -> f64 {
        self.population(self.len() - 1, level)
    }

    pub fn max_population(&self, level: usize) -> f64 {
        (0..self.len()).fold(0.0, |m, i| m.max(self.population(i, level)))
    }

    pub fn min_population(&self, level: usize) -> f64 {
        (0..self.len()).fold(1.0, |m, i| m.min(self.population(i, level)))
    }

    /// CSV rows `t, P1..Pdim, re(amp_1), im(amp_1), ...` with a header;
    /// floats in shortest round-trip decimal form.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "t")?;
        for j in 1..=self.dim {
            write!(w, ",P{j}")?;
        }
        for j in 1..=self.dim {
            write!(w, ",re_amp{j},im_amp{j}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{}", self.times[i])?;
            let s = self.state(i);
            for a in s {
                write!(w, ",{}", a.norm_sqr())?;
            }
            for a in s {
                write!(w, ",{},{}", a.re, a.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Propagate a schedule, sampling `samples_per_period` points per kicked
/// period (and the same sample density inside free segments). The state at
/// t = 0 is the ground state; norm is conserved to rounding because every
/// step is a unitary from a spectral decomposition.
pub fn evolve<G: FreeGenerator>(
    model: &KickedModel<G>,
    schedule: &KickSchedule,
    samples_per_period: usize,
) -> Trajectory {
    let spp = samples_per_period.max(1);
    let dim = G::Mat::DIM;
    let mut traj = Trajectory::new(dim);
    let mut psi = G::Mat::ground();
    let mut t = 0.0;
    traj.push(t, psi.as_ref());
    for seg in &schedule.segments {
        match *seg {
            Segment::Kicked { periods } => {
                let frees: Vec<G::Mat> = (1..=spp)
                    .map(|j| model.free.propagator(model.period * j as f64 / spp as f64))
                    .collect();
                for _ in 0..periods {
                    let mut last = psi;
                    for (j, f) in frees.iter().enumerate() {
                        let s = f.apply(&psi);
                        traj.push(t + model.period * (j + 1) as f64 / spp as f64, s.as_ref());
                        if j == spp - 1 {
                            last = s;
                        }
                    }
                    psi = model.impulse_prop.apply(&last);
                    t += model.period;
                    // overwrite the pre-kick sample with the post-kick state
                    let n = traj.len() - 1;
                    traj.times[n] = t;
                    let start = n * dim;
                    traj.amps[start..start + dim].copy_from_slice(psi.as_ref());
                }
            }
            Segment::Free { time } => {
                if time <= 0.0 {
                    continue;
                }
                let steps = ((time / model.period * spp as f64).ceil() as usize).max(1);
                let dt = time / steps as f64;
                let step = model.free.propagator(dt);
                for k in 1..=steps {
                    psi = step.apply(&psi);
                    traj.push(t + dt * k as f64, psi.as_ref());
                }
                t += time;
            }
        }
    }
    traj
}

/// Maximum deviation of the excited-state population between the kicked
/// dynamics and the effective-Hamiltonian dynamics, sampled on a common
/// grid. The step is shrunk to the nearest divisor of the period at or
/// below `dt` so both trajectories share stroboscopic instants exactly.
pub fn validity_deviation(
    sys: &TwoLevelParams,
    kick: &KickParams2,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    let eff = effective_hamiltonian(sys, kick);
    validity_deviation_against(sys, kick, &eff, horizon, dt)
}

/// Same metric against a caller-supplied effective Hamiltonian.
pub fn validity_deviation_against(
    sys: &TwoLevelParams,
    kick: &KickParams2,
    eff: &EffectiveHamiltonian2,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidDuration("validity horizon/step"));
    }
    let spp = ((kick.period / dt).ceil() as usize).max(1);
    let step = kick.period / spp as f64;
    let periods = ((horizon / kick.period).ceil() as usize).max(1);
    let free = Spectral2::new(&sys.hamiltonian())?;
    let kick_prop = mat::expm_hermitian2(&kick.impulse.matrix(), 1.0)?;
    let eff_spec = Spectral2::new(&eff.hamiltonian())?;
    let eff_step = eff_spec.expm(step);
    let frees: Vec<mat::Mat2> = (1..=spp).map(|j| free.expm(step * j as f64)).collect();
    let mut psi = [C64::ONE, C64::ZERO];
    let mut phi = [C64::ONE, C64::ZERO];
    let mut dev: f64 = 0.0;
    for _ in 0..periods {
        // interior samples, then the post-kick state at the boundary (the
        // impulse closes the period, so t = nT carries the kicked state)
        for f in frees.iter().take(spp - 1) {
            let s = f.apply(&psi);
            phi = eff_step.apply(&phi);
            dev = dev.max((s[1].norm_sqr() - phi[1].norm_sqr()).abs());
        }
        psi = kick_prop.apply(&frees[spp - 1].apply(&psi));
        phi = eff_step.apply(&phi);
        dev = dev.max((psi[1].norm_sqr() - phi[1].norm_sqr()).abs());
    }
    Ok(dev)
}

/// Default deviation horizon: ten effective Rabi cycles when the effective
/// coupling resolves them within 1000 kick periods, else 1000 periods (the
/// deviation envelope saturates within a cycle, so the cap keeps degenerate
/// corners bounded).
pub fn validity_horizon(sys: &TwoLevelParams, kick: &KickParams2) -> f64 {
    let eff = effective_hamiltonian(sys, kick);
    let cap = 1000.0 * kick.period;
    if eff.omega_eff * kick.period > 1e-9 {
        (10.0 * std::f64::consts::PI / eff.omega_eff)
            .min(cap)
            .max(10.0 * kick.period)
    } else {
        cap
    }
}

/// Effective pulse number `pi / (2 Omega_eff T)`: the kick count whose
/// accumulated effective rotation is a population inversion.
pub fn n_eff(omega_eff: f64, period: f64) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidDuration("period"));
    }
    if omega_eff <= 0.0 {
        return Err(Error::FrozenDynamics);
    }
    Ok(std::f64::consts::PI / (2.0 * omega_eff * period))
}

/// Which excited state a selective transition targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetState {
    State2,
    State3,
}

/// Outcome of a selective-transition synthesis.
#[derive(Clone, Debug)]
pub struct SelectiveRun {
    pub schedule: KickSchedule,
    pub trajectory: Trajectory,
    pub kicks: usize,
    pub period: f64,
}

/// Build and run a free -> kicked(N) -> free schedule that steers the
/// ground-state population into the target state: N is the first kick count
/// whose stroboscopic target population reaches `amplitude_goal`. The
/// one-photon period drives |1> <-> |2>, the two-photon period |1> <-> |3>.
pub fn selective_transition(
    sys: &ThreeLevelParams,
    imp: &crate::threelevel::KickImpulse3,
    t_one_photon: f64,
    t_two_photon: f64,
    target: TargetState,
    amplitude_goal: f64,
    max_kicks: usize,
) -> Result<SelectiveRun> {
    let (period, level) = match target {
        TargetState::State2 => (t_one_photon, 1usize),
        TargetState::State3 => (t_two_photon, 2usize),
    };
    let kick = KickParams3 {
        period,
        impulse: *imp,
    };
    let model = KickedModel::three_level(sys, &kick)?;
    let pad = 20.0 * period;
    let kicks = if amplitude_goal <= 0.0 {
        0
    } else {
        let u = model.impulse_prop.matmul(&model.free.propagator(period));
        let mut psi = [C64::ONE, C64::ZERO, C64::ZERO];
        let mut best = 0.0f64;
        let mut found = None;
        for n in 1..=max_kicks {
            psi = u.apply(&psi);
            let p = psi[level].norm_sqr();
            best = best.max(p);
            if p >= amplitude_goal {
                found = Some(n);
                break;
            }
        }
        found.ok_or(Error::BudgetExceeded {
            budget: max_kicks,
            best,
        })?
    };
    let schedule = KickSchedule::inversion(pad, kicks, pad);
    let trajectory = evolve(&model, &schedule, 20);
    Ok(SelectiveRun {
        schedule,
        trajectory,
        kicks,
        period,
    })
}

/// Max total-probability drift across a trajectory (norm-conservation
/// diagnostic).
pub fn norm_drift(traj: &Trajectory) -> f64 {
    (0..traj.len()).fold(0.0f64, |m, i| m.max((norm_sq(&traj.state(i)) - 1.0).abs()))
}
