//! Square-wave realization of periodic kicks: replace each instantaneous
//! impulse by a finite segment of duration T' with the same propagator
//! (modulo a global phase), and compare the resulting dynamics against the
//! ideal resonance pulse.

use crate::error::{Error, Result};
use crate::mat::{self, Mat2, Mat3, Spectral2, C64};
use crate::twolevel::{self, Impulse2, KickParams2, TwoLevelParams};

/// A square-wave drive: free evolution for `free_time`, the impulse
/// Hamiltonian for `pulse_time`, repeating with total period `free_time +
/// pulse_time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareWaveSpec {
    pub free_time: f64,
    pub pulse_time: f64,
    pub branch_k: i64,
}

impl SquareWaveSpec {
    pub fn total_period(&self) -> f64 {
        self.free_time + self.pulse_time
    }
}

/// Replacement durations for a two-level impulse with eigenvalue scale E':
/// `T' = |1 - 2 k pi / E'|` for k in the given range, filtered to T' > 0 and
/// sorted ascending.
pub fn square_duration(
    e1prime: f64,
    k_range: std::ops::RangeInclusive<i64>,
) -> Result<Vec<(i64, f64)>> {
    if !(e1prime > 0.0) {
        return Err(Error::DegenerateImpulse);
    }
    let mut out: Vec<(i64, f64)> = k_range
        .map(|k| {
            (
                k,
                (1.0 - 2.0 * k as f64 * std::f64::consts::PI / e1prime).abs(),
            )
        })
        .filter(|&(_, t)| t > 0.0)
        .collect();
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok(out)
}

/// A realized replacement branch: pulse duration plus the pulse Hamiltonian
/// parameters that reproduce the kick. When `1 - 2 k pi / E'` is negative
/// the duration comes from its absolute value and the matching pulse is the
/// sign-flipped impulse (detuning negated, phase shifted by pi): the
/// per-eigenvalue branch integers then carry opposite signs, which negates
/// the traceless generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareBranch {
    pub k: i64,
    pub duration: f64,
    pub pulse: Impulse2,
}

/// All realizable branches in the k range, each verified to reproduce the
/// impulse propagator modulo a global phase within 1e-10, sorted by
/// duration.
pub fn square_branches(
    imp: &Impulse2,
    k_range: std::ops::RangeInclusive<i64>,
) -> Result<Vec<SquareBranch>> {
    let e1p = imp.e1prime();
    if !(e1p > 0.0) {
        return Err(Error::DegenerateImpulse);
    }
    let target = mat::expm_hermitian2(&imp.matrix(), 1.0)?;
    let mut out = Vec::new();
    for k in k_range {
        let raw = 1.0 - 2.0 * k as f64 * std::f64::consts::PI / e1p;
        let duration = raw.abs();
        if duration <= 0.0 {
            continue;
        }
        let pulse = if raw >= 0.0 {
            *imp
        } else {
            Impulse2 {
                delta1p: -imp.delta1p,
                omega1p: imp.omega1p,
                theta1p: imp.theta1p + std::f64::consts::PI,
            }
        };
        let u = mat::expm_hermitian2(&pulse.matrix(), duration)?;
        if u.phase_dist(&target) < 1e-10 {
            out.push(SquareBranch { k, duration, pulse });
        }
    }
    out.sort_by(|a, b| a.duration.partial_cmp(&b.duration).unwrap());
    Ok(out)
}

/// Preferred replacement branch: the smallest k whose T' does not exceed the
/// free duration (keeps the duty cycle high), falling back to the smallest
/// positive T' when no branch fits.
pub fn preferred_branch(imp: &Impulse2, free_time: f64) -> Result<SquareBranch> {
    let e1p = imp.e1prime();
    let k_hi = (e1p * (1.0 + free_time) / (2.0 * std::f64::consts::PI)).ceil() as i64 + 2;
    let cands = square_branches(imp, 0..=k_hi.max(2))?;
    let mut fitting: Vec<SquareBranch> = cands
        .iter()
        .copied()
        .filter(|b| b.duration <= free_time)
        .collect();
    if !fitting.is_empty() {
        fitting.sort_by_key(|b| b.k);
        return Ok(fitting[0]);
    }
    cands.first().copied().ok_or(Error::DegenerateImpulse)
}

/// Replacement Hamiltonian for an arbitrary Hermitian 2x2 impulse matrix M:
/// given T' > 0 and per-eigenvalue integers k_n, the generator with
/// eigenvalues `(E_n - 2 k_n pi)/T'` on M's eigenvectors, so that
/// `exp(-i H' T') = exp(-i M)` exactly (modulo nothing: the phases match).
pub fn general_durations2(m: &Mat2, t_prime: f64, k: [i64; 2]) -> Result<Mat2> {
    if !(t_prime > 0.0) {
        return Err(Error::InvalidDuration("t_prime"));
    }
    let spec = Spectral2::new(m)?;
    let mut h = Mat2::zeros();
    for n in 0..2 {
        let scaled = (spec.vals[n] - 2.0 * k[n] as f64 * std::f64::consts::PI) / t_prime;
        let v = spec.vecs.col(n);
        for i in 0..2 {
            for j in 0..2 {
                h.0[i][j] += C64::new(scaled, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    Ok(h)
}

/// Three-level analogue of [`general_durations2`].
pub fn general_durations3(m: &Mat3, t_prime: f64, k: [i64; 3]) -> Result<Mat3> {
    if !(t_prime > 0.0) {
        return Err(Error::InvalidDuration("t_prime"));
    }
    let spec = mat::Spectral3::new(m)?;
    let mut h = Mat3::zeros();
    for n in 0..3 {
        let scaled = (spec.vals[n] - 2.0 * k[n] as f64 * std::f64::consts::PI) / t_prime;
        let v = spec.vecs.col(n);
        for i in 0..3 {
            for j in 0..3 {
                h.0[i][j] += C64::new(scaled, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    Ok(h)
}

/// Effective coupling under the square wave: the kick-train value diluted by
/// the duty cycle, `(T / (T + T')) Omega_eff`. Always below `Omega_eff`.
pub fn square_effective_coupling(free_time: f64, pulse_time: f64, omega_eff: f64) -> f64 {
    free_time / (free_time + pulse_time) * omega_eff
}

/// One point of the frequency-kick square-wave map: resonance period at the
/// maximum-coupling branch, the preferred replacement branch, and the two
/// coupling strengths.
#[derive(Clone, Copy, Debug)]
pub struct SquareWavePoint {
    pub free_time: f64,
    pub branch: SquareBranch,
    pub omega_eff: f64,
    pub omega_eff_prime: f64,
}

impl SquareWavePoint {
    pub fn spec(&self) -> SquareWaveSpec {
        SquareWaveSpec {
            free_time: self.free_time,
            pulse_time: self.branch.duration,
            branch_k: self.branch.k,
        }
    }
}

/// Evaluate the square-wave realization of the frequency kick at one
/// (system, impulse-detuning) pair.
pub fn frequency_kick_point(sys: &TwoLevelParams, delta1p: f64) -> Result<SquareWavePoint> {
    let imp = Impulse2 {
        delta1p,
        omega1p: sys.omega1,
        theta1p: sys.theta1,
    };
    let free_time = twolevel::max_omega_eff_period(sys, &imp);
    let kick = KickParams2::new(free_time, imp)?;
    let omega_eff = twolevel::effective_hamiltonian(sys, &kick).omega_eff;
    let branch = preferred_branch(&imp, free_time)?;
    Ok(SquareWavePoint {
        free_time,
        branch,
        omega_eff,
        omega_eff_prime: square_effective_coupling(free_time, branch.duration, omega_eff),
    })
}

/// Sampled populations of the square-wave drive compared against the
/// resonance pulse `H_r = O (|1><2| + |2><1|)`, after rescaling time by
/// `Omega_eff' / O`. Returns the maximum pointwise population deviation over
/// `horizon` units of resonance-pulse time (which must cover at least one
/// pi-pulse, `pi / (2 O)`).
pub fn compare_to_resonance_pulse(
    sys: &TwoLevelParams,
    branch: &SquareBranch,
    free_time: f64,
    omega_eff_prime: f64,
    horizon: f64,
    samples_per_segment: usize,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidDuration("horizon"));
    }
    if !(omega_eff_prime > 0.0) {
        return Err(Error::FrozenDynamics);
    }
    let spec = SquareWaveSpec {
        free_time,
        pulse_time: branch.duration,
        branch_k: branch.k,
    };
    let spp = samples_per_segment.max(1);
    let free = Spectral2::new(&sys.hamiltonian())?;
    let pulse = Spectral2::new(&branch.pulse.matrix())?;
    let free_step = free.expm(spec.free_time / spp as f64);
    let pulse_step = pulse.expm(spec.pulse_time / spp as f64);
    // square-wave timeline long enough that rescaled time covers `horizon`
    let scale = omega_eff_prime / sys.omega1;
    let total = horizon / scale;
    let periods = (total / spec.total_period()).ceil() as usize;
    let mut psi = [C64::ONE, C64::ZERO];
    let mut t = 0.0f64;
    let mut dev: f64 = 0.0;
    let check = |t: f64, psi: &[C64; 2], dev: &mut f64| {
        // resonance pulse from |1>: P2 = sin^2(O t_res)
        let tr = t * scale;
        let s = (sys.omega1 * tr).sin();
        let p2r = s * s;
        *dev = dev.max((psi[1].norm_sqr() - p2r).abs());
        *dev = dev.max((psi[0].norm_sqr() - (1.0 - p2r)).abs());
    };
    for _ in 0..periods {
        for _ in 0..spp {
            psi = free_step.apply(&psi);
            t += spec.free_time / spp as f64;
            check(t, &psi, &mut dev);
        }
        for _ in 0..spp {
            psi = pulse_step.apply(&psi);
            t += spec.pulse_time / spp as f64;
            check(t, &psi, &mut dev);
        }
    }
    Ok(dev)
}
