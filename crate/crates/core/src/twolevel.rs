//! Kicked two-level systems: one-period propagator in its SU(2)
//! parametrization, effective-Hamiltonian extraction, resonance-parameter
//! root finding for every kick style, coherent destruction of coupling, and
//! the near-destruction coupling limits.

use crate::error::{Error, Result};
use crate::mat::{self, sinc, Mat2, C64};

/// Static system: detuning, coupling (the reference unit, > 0), phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    pub delta1: f64,
    pub omega1: f64,
    pub theta1: f64,
}

impl TwoLevelParams {
    pub fn new(delta1: f64, omega1: f64, theta1: f64) -> Result<Self> {
        if !(omega1 > 0.0) || !delta1.is_finite() || !theta1.is_finite() || !omega1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "two-level params (delta1={delta1}, omega1={omega1}, theta1={theta1})"
            )));
        }
        Ok(TwoLevelParams {
            delta1,
            omega1,
            theta1,
        })
    }

    /// E = sqrt(Omega^2 + Delta^2/4).
    pub fn e1(&self) -> f64 {
        (self.omega1 * self.omega1 + self.delta1 * self.delta1 / 4.0).sqrt()
    }

    pub fn hamiltonian(&self) -> Mat2 {
        mat::two_level_hamiltonian(self.delta1, self.omega1, self.theta1)
    }

    /// SU(2) propagator (global phase factored out).
    pub fn propagator(&self, t: f64) -> Mat2 {
        mat::propagator_two_level(self.delta1, self.omega1, self.theta1, t)
    }
}

/// Per-kick impulse-matrix parameters (the time-integrated kick Hamiltonian).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Impulse2 {
    pub delta1p: f64,
    pub omega1p: f64,
    pub theta1p: f64,
}

impl Impulse2 {
    pub fn new(delta1p: f64, omega1p: f64, theta1p: f64) -> Result<Self> {
        if !(omega1p >= 0.0) || !delta1p.is_finite() || !theta1p.is_finite() || !omega1p.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "impulse params (delta1p={delta1p}, omega1p={omega1p}, theta1p={theta1p})"
            )));
        }
        Ok(Impulse2 {
            delta1p,
            omega1p,
            theta1p,
        })
    }

    pub fn zero() -> Self {
        Impulse2 {
            delta1p: 0.0,
            omega1p: 0.0,
            theta1p: 0.0,
        }
    }

    /// E' = sqrt(Omega'^2 + Delta'^2/4).
    pub fn e1prime(&self) -> f64 {
        (self.omega1p * self.omega1p + self.delta1p * self.delta1p / 4.0).sqrt()
    }

    /// The impulse matrix itself (Hermitian).
    pub fn matrix(&self) -> Mat2 {
        mat::two_level_hamiltonian(self.delta1p, self.omega1p, self.theta1p)
    }

    /// SU(2) form of exp(-i M); the full map carries an extra
    /// `e^{-i Delta'/2}` global phase.
    pub fn propagator(&self) -> Mat2 {
        mat::propagator_two_level(self.delta1p, self.omega1p, self.theta1p, 1.0)
    }
}

/// Impulse plus the kick period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickParams2 {
    pub period: f64,
    pub impulse: Impulse2,
}

impl KickParams2 {
    pub fn new(period: f64, impulse: Impulse2) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!("kick period {period}")));
        }
        Ok(KickParams2 { period, impulse })
    }
}

/// The three single-parameter kick styles: vary only the detuning, only the
/// coupling, or only the phase of the impulse, holding the rest equal to the
/// static system's values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KickStyle {
    Frequency,
    Amplitude,
    Phase,
}

impl KickStyle {
    pub fn impulse(&self, sys: &TwoLevelParams, varied: f64) -> Impulse2 {
        match self {
            KickStyle::Frequency => Impulse2 {
                delta1p: varied,
                omega1p: sys.omega1,
                theta1p: sys.theta1,
            },
            KickStyle::Amplitude => Impulse2 {
                delta1p: sys.delta1,
                omega1p: varied,
                theta1p: sys.theta1,
            },
            KickStyle::Phase => Impulse2 {
                delta1p: sys.delta1,
                omega1p: sys.omega1,
                theta1p: varied,
            },
        }
    }
}

/// Real SU(2) coordinates of the one-period propagator:
///
/// ```text
/// U(T) = [  f1 + i f2    f4 - i f3 ]
///        [ -f4 - i f3    f1 - i f2 ]
/// ```
///
/// with f1^2 + f2^2 + f3^2 + f4^2 = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FFunctions {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl FFunctions {
    /// |f1^2 + f2^2 + f3^2 + f4^2 - 1|
    pub fn su2_norm_error(&self) -> f64 {
        (self.f1 * self.f1 + self.f2 * self.f2 + self.f3 * self.f3 + self.f4 * self.f4 - 1.0).abs()
    }

    /// Assemble the one-period SU(2) matrix from the coordinates.
    pub fn matrix(&self) -> Mat2 {
        let a = C64::new(self.f1, self.f2);
        let b = C64::new(self.f4, -self.f3);
        Mat2([[a, b], [-b.conj(), a.conj()]])
    }
}

/// Extracted time-independent effective Hamiltonian parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveHamiltonian2 {
    pub delta_eff: f64,
    pub omega_eff: f64,
    pub theta_eff: f64,
}

impl EffectiveHamiltonian2 {
    pub fn hamiltonian(&self) -> Mat2 {
        mat::two_level_hamiltonian(self.delta_eff, self.omega_eff, self.theta_eff)
    }

    /// SU(2) propagator of the effective Hamiltonian.
    pub fn propagator(&self, t: f64) -> Mat2 {
        mat::propagator_two_level(self.delta_eff, self.omega_eff, self.theta_eff, t)
    }
}

/// The four real coordinates of `U(T) = exp(-i M) exp(-i H T)` evaluated in
/// closed form. The zero-impulse case (E' = 0) is handled through the
/// sin(E')/E' limit in the two terms that divide by E'.
pub fn f_functions(sys: &TwoLevelParams, kick: &KickParams2) -> FFunctions {
    let imp = &kick.impulse;
    let e1 = sys.e1();
    let e1p = imp.e1prime();
    let (d1, o1, th1) = (sys.delta1, sys.omega1, sys.theta1);
    let (d1p, o1p, th1p) = (imp.delta1p, imp.omega1p, imp.theta1p);
    let dth = th1 - th1p;
    let x = e1 * kick.period;
    let (st, ct) = x.sin_cos();
    let cp = e1p.cos();
    let scp = sinc(e1p); // sin(E')/E'
    let f1 = cp * ct - (d1 * d1p + 4.0 * o1 * o1p * dth.cos()) / (4.0 * e1) * scp * st;
    let f2 =
        d1 / (2.0 * e1) * cp * st + 0.5 * d1p * scp * ct + o1 * o1p * dth.sin() / e1 * scp * st;
    let f3 = o1 * th1.cos() / e1 * cp * st
        + o1p * th1p.cos() * scp * ct
        + (d1 * o1p * th1p.sin() - d1p * o1 * th1.sin()) / (2.0 * e1) * scp * st;
    let f4 = o1 * th1.sin() / e1 * cp * st
        + o1p * th1p.sin() * scp * ct
        + (d1p * o1 * th1.cos() - d1 * o1p * th1p.cos()) / (2.0 * e1) * scp * st;
    FFunctions { f1, f2, f3, f4 }
}

/// One-period propagator in the SU(2) convention (global phase
/// `e^{-i (Delta' + Delta T)/2}` factored out).
pub fn one_period_propagator(sys: &TwoLevelParams, kick: &KickParams2) -> Mat2 {
    f_functions(sys, kick).matrix()
}

/// Threshold below which `1 - |f1|` is treated as the frozen (identity)
/// degenerate case.
pub const DEGENERATE_F1: f64 = 1e-12;

/// Invert `U(T) = exp(-i H_eff T)` for the effective parameters:
///
/// ```text
/// Delta_eff = 2 f2 arccos|f1| / (T sqrt(1 - f1^2))
/// Omega_eff = sqrt(f3^2 + f4^2) arccos|f1| / (T sqrt(1 - f1^2))
/// theta_eff = atan2(f4, f3)
/// ```
///
/// The recovered eigenphase is the principal value in [0, pi/2]; the
/// guaranteed contract is stroboscopic-population equivalence, not generator
/// equality. When `1 - |f1| < 1e-12` the propagator is proportional to the
/// identity and the frozen triple (0, 0, 0) is returned.
pub fn effective_hamiltonian(sys: &TwoLevelParams, kick: &KickParams2) -> EffectiveHamiltonian2 {
    extract_effective(&f_functions(sys, kick), kick.period)
}

/// Extraction step shared with callers that already have the coordinates.
pub fn extract_effective(f: &FFunctions, period: f64) -> EffectiveHamiltonian2 {
    if 1.0 - f.f1.abs() < DEGENERATE_F1 {
        return EffectiveHamiltonian2 {
            delta_eff: 0.0,
            omega_eff: 0.0,
            theta_eff: 0.0,
        };
    }
    let ac = f.f1.abs().acos();
    let s = ((1.0 - f.f1) * (1.0 + f.f1)).sqrt();
    EffectiveHamiltonian2 {
        delta_eff: 2.0 * f.f2 * ac / (period * s),
        omega_eff: f.f3.hypot(f.f4) * ac / (period * s),
        theta_eff: f.f4.atan2(f.f3),
    }
}

/// Phase of the resonance condition `f2(T) = A1 sin(E1 T + phi1)`:
/// `phi1 = atan2(D' E sin E', D E' cos E' + 2 O O' sin(th - th') sin E')`,
/// quadrant fixed by the two-argument arctangent.
pub fn phi1(sys: &TwoLevelParams, imp: &Impulse2) -> f64 {
    let e1 = sys.e1();
    let e1p = imp.e1prime();
    let num = imp.delta1p * e1 * e1p.sin();
    let den = sys.delta1 * e1p * e1p.cos()
        + 2.0 * sys.omega1 * imp.omega1p * (sys.theta1 - imp.theta1p).sin() * e1p.sin();
    num.atan2(den)
}

/// Periods driving the kicked system into resonance (`Delta_eff = 0`): the
/// first `n_max` positive values of `T_n = (-phi1 + n pi)/E1`. With the
/// quadrant-fixed phi1 the branch index starts at n = 0 (the principal
/// arctangent absorbs one half-turn of phi1 into n).
pub fn resonance_periods(sys: &TwoLevelParams, imp: &Impulse2, n_max: usize) -> Vec<f64> {
    let e1 = sys.e1();
    let p1 = phi1(sys, imp);
    // phi1 in (-pi, pi] makes at most the first two candidates nonpositive
    (0..=n_max + 1)
        .map(|n| (-p1 + n as f64 * std::f64::consts::PI) / e1)
        .filter(|&t| t > 1e-12)
        .take(n_max)
        .collect()
}

/// The resonance period that maximizes the extracted coupling: `-phi1/E1`
/// when `phi1 < 0`, `(pi - phi1)/E1` otherwise.
pub fn max_omega_eff_period(sys: &TwoLevelParams, imp: &Impulse2) -> f64 {
    let e1 = sys.e1();
    let p1 = phi1(sys, imp);
    if p1 < 0.0 {
        -p1 / e1
    } else {
        (std::f64::consts::PI - p1) / e1
    }
}

/// Phases `theta1'` solving `f2 = 0` at fixed (T, Delta', Omega'), on the
/// branch representatives in (-pi, pi]. Returns an empty list when the
/// existence ratio exceeds 1 in magnitude; errors when the condition
/// degenerates (exact zero division with nonzero numerator).
pub fn resonance_phase(
    sys: &TwoLevelParams,
    period: f64,
    delta1p: f64,
    omega1p: f64,
) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    let e1 = sys.e1();
    let e1p = (omega1p * omega1p + delta1p * delta1p / 4.0).sqrt();
    let x = e1 * period;
    // f2(theta') = C + D sin(theta - theta') with
    //   C = A2 sin(E1 T + phi2),  D = O O' sin E' sin E1T / (E E')
    let p = sys.delta1 / (2.0 * e1) * e1p.cos();
    let q = 0.5 * delta1p * sinc(e1p);
    let a2 = p.hypot(q);
    let phi2 = q.atan2(p);
    let c = a2 * (x + phi2).sin();
    let d = sys.omega1 * omega1p * sinc(e1p) * x.sin() / e1;
    if d == 0.0 {
        if c != 0.0 {
            return Err(Error::NoSolution);
        }
        // f2 vanishes identically in theta'; every phase is a root
        return Ok(vec![sys.theta1]);
    }
    let r = c / d;
    if r.abs() > 1.0 {
        return Ok(vec![]);
    }
    // sin(theta - theta') = -r
    let base = r.asin();
    let mut out: Vec<f64> = Vec::new();
    for cand in [sys.theta1 + base, sys.theta1 - PI - base] {
        let mut th = wrap_angle(cand);
        // polish against rounding near |r| = 1
        for _ in 0..3 {
            let s = (sys.theta1 - th).sin();
            let dc = (sys.theta1 - th).cos();
            let val = c + d * s;
            let der = -d * dc;
            if der.abs() > 1e-300 {
                th = wrap_angle(th - val / der);
            }
        }
        let kick = KickParams2 {
            period,
            impulse: Impulse2 {
                delta1p,
                omega1p,
                theta1p: th,
            },
        };
        if f_functions(sys, &kick).f2.abs() < 1e-10 && !out.iter().any(|&o| (o - th).abs() < 1e-9) {
            out.push(th);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Detunings `Delta1'` solving `f2 = 0` at fixed (T, Omega', theta'), found
/// by sign-change bracketing on a dense grid followed by bisection. No sign
/// change in range yields an empty list.
pub fn resonance_detuning(
    sys: &TwoLevelParams,
    period: f64,
    omega1p: f64,
    theta1p: f64,
    range: (f64, f64),
) -> Vec<f64> {
    let f = |d1p: f64| {
        let kick = KickParams2 {
            period,
            impulse: Impulse2 {
                delta1p: d1p,
                omega1p,
                theta1p,
            },
        };
        f_functions(sys, &kick).f2
    };
    // E' sweeps |hi - lo|/2 radians at most; keep >= 1000 grid points per
    // pi-interval of E'
    let span = (range.1 - range.0).abs() / 2.0;
    let points = 1000usize.max(((span / std::f64::consts::PI).ceil() as usize + 1) * 1000);
    bracket_roots(f, range, points)
}

/// Couplings `Omega1'` solving `f2 = 0` at fixed (T, Delta', theta'); the
/// detuning case with the two impulse roles swapped.
pub fn resonance_amplitude(
    sys: &TwoLevelParams,
    period: f64,
    delta1p: f64,
    theta1p: f64,
    range: (f64, f64),
) -> Vec<f64> {
    let f = |o1p: f64| {
        let kick = KickParams2 {
            period,
            impulse: Impulse2 {
                delta1p,
                omega1p: o1p,
                theta1p,
            },
        };
        f_functions(sys, &kick).f2
    };
    let span = (range.1 - range.0).abs();
    let points = 1000usize.max(((span / std::f64::consts::PI).ceil() as usize + 1) * 1000);
    bracket_roots(f, range, points)
}

fn bracket_roots<F: Fn(f64) -> f64>(f: F, range: (f64, f64), points: usize) -> Vec<f64> {
    let (lo, hi) = if range.0 <= range.1 {
        range
    } else {
        (range.1, range.0)
    };
    if !(hi > lo) || points < 2 {
        return vec![];
    }
    let h = (hi - lo) / points as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut xa = lo;
    let mut fa = f(xa);
    for k in 1..=points {
        let xb = lo + k as f64 * h;
        let fb = f(xb);
        if fa == 0.0 {
            push_root(&mut roots, xa, h);
        } else if fa * fb < 0.0 {
            let (mut a, mut b, mut va) = (xa, xb, fa);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let vm = f(m);
                if vm.abs() < 1e-10 || (b - a) < 1e-15 * (1.0 + m.abs()) {
                    break;
                }
                if va * vm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    va = vm;
                }
            }
            let root = 0.5 * (a + b);
            if f(root).abs() < 1e-10 {
                push_root(&mut roots, root, h);
            }
        }
        xa = xb;
        fa = fb;
    }
    if fa == 0.0 {
        push_root(&mut roots, xa, h);
    }
    roots
}

fn push_root(roots: &mut Vec<f64>, x: f64, spacing: f64) {
    if !roots.iter().any(|&r| (r - x).abs() < 0.5 * spacing) {
        roots.push(x);
    }
}

/// Coherent-destruction points of a given kick coupling: the detunings with
/// `E' = m pi`, i.e. `Delta1' = 2 sqrt((m pi)^2 - Omega1'^2)` for every
/// m <= m_max with m pi > Omega1'.
pub fn cdc_points(omega1p: f64, m_max: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (1..=m_max)
        .filter_map(|m| {
            let mp = m as f64 * PI;
            (mp >= omega1p).then(|| 2.0 * (mp * mp - omega1p * omega1p).sqrt())
        })
        .collect()
}

/// Effective coupling in the limit `E' -> (m pi)^-`:
///
/// ```text
/// sqrt(|O - (D/D') O' e^{i(th - th')}|^2 + f5 sin(th - th'))
/// f5 = 4 O O'^2 [O E' sin(th-th') - O D' cos(th-th') + D O'] / (E' D'^2)
/// ```
///
/// Specializes to `O |1 - D/D'|` for the frequency kick, `|O - O'|` for the
/// amplitude kick, and approximately `O |1 - e^{i(th-th')}|` for the phase
/// kick in the large-detuning regime.
pub fn omega_eff_limit(sys: &TwoLevelParams, imp: &Impulse2) -> Result<f64> {
    if imp.delta1p == 0.0 {
        return Err(Error::DivisionDegenerate("delta1p"));
    }
    let (o1, d1) = (sys.omega1, sys.delta1);
    let (o1p, d1p) = (imp.omega1p, imp.delta1p);
    let dth = sys.theta1 - imp.theta1p;
    let e1p = imp.e1prime();
    let z = C64::new(o1, 0.0) - C64::from_polar(d1 / d1p * o1p, dth);
    let f5 = 4.0 * o1 * o1p * o1p * (o1 * e1p * dth.sin() - o1 * d1p * dth.cos() + d1 * o1p)
        / (e1p * d1p * d1p);
    let val = z.norm_sqr() + f5 * dth.sin();
    if val < 0.0 {
        if val > -1e-9 {
            return Ok(0.0);
        }
        return Err(Error::NumericalDomain(val));
    }
    Ok(val.sqrt())
}

/// Numerically extracted coupling at the maximum-coupling resonance period,
/// used to probe the destruction limit at finite offsets from `E' = m pi`.
pub fn omega_eff_at_best_resonance(sys: &TwoLevelParams, imp: &Impulse2) -> f64 {
    omega_eff_at_resonance(sys, imp, max_omega_eff_period(sys, imp))
}

/// Stroboscopic population check: |<2| U(T)^n |1>|^2 for n = 0..n_max from
/// the SU(2) coordinates, compared entry by entry against the effective
/// propagator is done by callers; this helper just iterates the map.
pub fn stroboscopic_populations(u: &Mat2, n_max: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut s = [C64::ONE, C64::ZERO];
    out.push([1.0, 0.0]);
    for _ in 0..n_max {
        s = u.apply(&s);
        out.push([s[0].norm_sqr(), s[1].norm_sqr()]);
    }
    out
}

/// arccos|f1|/T at a resonance period, where f2 = 0 and the SU(2) norm
/// collapses the general coupling formula to this division-free one; unlike
/// the general extraction it stays continuous through the destruction
/// points (f1 -> +-1 gives 0 without a degenerate branch).
pub fn omega_eff_at_resonance(sys: &TwoLevelParams, imp: &Impulse2, period: f64) -> f64 {
    let kick = KickParams2 {
        period,
        impulse: *imp,
    };
    let f = f_functions(sys, &kick);
    f.f1.abs().min(1.0).acos() / period
}
