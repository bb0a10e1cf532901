//! Dense complex vector/matrix algebra for dimensions 2 and 3.
//!
//! Everything the rest of the crate needs is closed-form: spectral
//! decompositions of Hermitian matrices, exact propagators for the two- and
//! three-level Hamiltonians, and a principal-branch unitary logarithm used as
//! a cross-check oracle. No general-purpose eigensolver is involved; the
//! dimension never exceeds 3.

use crate::error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Tolerance for the `hermitian` flag: `max |M - M^dag| < HERM_TOL`.
pub const HERM_TOL: f64 = 1e-12;
/// Tolerance for the `unitary` flag on inputs to the unitary log.
pub const UNITARY_TOL: f64 = 1e-10;

/// Two-component complex state vector.
pub type State2 = [C64; 2];
/// Three-component complex state vector.
pub type State3 = [C64; 3];

/// sin(x)/x with the x -> 0 limit.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Clamp `x` into [-1, 1] when it spilled over by at most `tol`; error beyond.
pub fn clamp_unit(x: f64, tol: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + tol {
        Ok(x.signum())
    } else {
        Err(Error::NumericalDomain(x))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Minimal matrix interface shared by [`Mat2`] and [`Mat3`] so the kicked
/// evolution engine can be written once for both dimensions.
pub trait SmallMat: Copy {
    const DIM: usize;
    type State: Copy + AsRef<[C64]> + AsMut<[C64]>;

    fn identity() -> Self;
    fn matmul(&self, rhs: &Self) -> Self;
    fn apply(&self, s: &Self::State) -> Self::State;
    fn adjoint(&self) -> Self;
    fn max_abs_diff(&self, rhs: &Self) -> f64;
    /// Basis state |1> (index 0).
    fn ground() -> Self::State;
    fn entry(&self, i: usize, j: usize) -> C64;
}

/// |<j|s>|^2.
pub fn population<S: AsRef<[C64]>>(s: &S, j: usize) -> f64 {
    s.as_ref()[j].norm_sqr()
}

/// Sum of |amplitudes|^2.
pub fn norm_sq<S: AsRef<[C64]>>(s: &S) -> f64 {
    s.as_ref().iter().map(|a| a.norm_sqr()).sum()
}

macro_rules! small_mat {
    ($name:ident, $n:literal, $state:ty) => {
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name(pub [[C64; $n]; $n]);

        impl $name {
            pub fn zeros() -> Self {
                $name([[C64::ZERO; $n]; $n])
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.0[i][i] = C64::ONE;
                }
                m
            }

            pub fn scale(&self, z: C64) -> Self {
                let mut m = *self;
                for row in m.0.iter_mut() {
                    for e in row.iter_mut() {
                        *e *= z;
                    }
                }
                m
            }

            pub fn add(&self, rhs: &Self) -> Self {
                let mut m = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] += rhs.0[i][j];
                    }
                }
                m
            }

            pub fn sub(&self, rhs: &Self) -> Self {
                let mut m = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] -= rhs.0[i][j];
                    }
                }
                m
            }

            pub fn matmul(&self, rhs: &Self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self.0[i][k];
                        if a == C64::ZERO {
                            continue;
                        }
                        for j in 0..$n {
                            m.0[i][j] += a * rhs.0[k][j];
                        }
                    }
                }
                m
            }

            pub fn adjoint(&self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = self.0[j][i].conj();
                    }
                }
                m
            }

            pub fn trace(&self) -> C64 {
                (0..$n).map(|i| self.0[i][i]).sum()
            }

            pub fn apply(&self, s: &$state) -> $state {
                let mut out = [C64::ZERO; $n];
                for i in 0..$n {
                    for j in 0..$n {
                        out[i] += self.0[i][j] * s[j];
                    }
                }
                out
            }

            /// max_ij |A_ij - B_ij|
            pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
                let mut d: f64 = 0.0;
                for i in 0..$n {
                    for j in 0..$n {
                        d = d.max((self.0[i][j] - rhs.0[i][j]).norm());
                    }
                }
                d
            }

            /// max |M - M^dag|
            pub fn hermiticity_error(&self) -> f64 {
                self.max_abs_diff(&self.adjoint())
            }

            /// max |U^dag U - I|
            pub fn unitarity_error(&self) -> f64 {
                self.adjoint().matmul(self).max_abs_diff(&Self::identity())
            }

            /// Distance to `rhs` modulo a global phase: the phase is fixed on
            /// the largest entry of `rhs`, then max |A - e^{i phi} B|.
            pub fn phase_dist(&self, rhs: &Self) -> f64 {
                let mut best = (0.0, (0usize, 0usize));
                for i in 0..$n {
                    for j in 0..$n {
                        let m = rhs.0[i][j].norm();
                        if m > best.0 {
                            best = (m, (i, j));
                        }
                    }
                }
                if best.0 == 0.0 {
                    return self.max_abs_diff(rhs);
                }
                let (i, j) = best.1;
                let mut phi = self.0[i][j] / rhs.0[i][j];
                let n = phi.norm();
                if n == 0.0 {
                    return self.max_abs_diff(rhs);
                }
                phi /= n;
                self.max_abs_diff(&rhs.scale(phi))
            }

            pub fn col(&self, j: usize) -> $state {
                let mut v = [C64::ZERO; $n];
                for i in 0..$n {
                    v[i] = self.0[i][j];
                }
                v
            }

            pub fn from_cols(cols: &[$state; $n]) -> Self {
                let mut m = Self::zeros();
                for j in 0..$n {
                    for i in 0..$n {
                        m.0[i][j] = cols[j][i];
                    }
                }
                m
            }
        }

        impl SmallMat for $name {
            const DIM: usize = $n;
            type State = $state;

            fn identity() -> Self {
                $name::identity()
            }
            fn matmul(&self, rhs: &Self) -> Self {
                $name::matmul(self, rhs)
            }
            fn apply(&self, s: &Self::State) -> Self::State {
                $name::apply(self, s)
            }
            fn adjoint(&self) -> Self {
                $name::adjoint(self)
            }
            fn max_abs_diff(&self, rhs: &Self) -> f64 {
                $name::max_abs_diff(self, rhs)
            }
            fn ground() -> Self::State {
                let mut s = [C64::ZERO; $n];
                s[0] = C64::ONE;
                s
            }
            fn entry(&self, i: usize, j: usize) -> C64 {
                self.0[i][j]
            }
        }
    };
}

small_mat!(Mat2, 2, State2);
small_mat!(Mat3, 3, State3);

// ---------------------------------------------------------------------------
// Hamiltonian builders and closed-form propagators
// ---------------------------------------------------------------------------

/// H = Delta |2><2| + Omega e^{i theta} |1><2| + h.c.
pub fn two_level_hamiltonian(delta: f64, omega: f64, theta: f64) -> Mat2 {
    let g = C64::from_polar(omega, theta);
    Mat2([[C64::ZERO, g], [g.conj(), c(delta, 0.0)]])
}

/// General ladder Hamiltonian
/// H = sum_l Delta_l |l+1><l+1| + Omega_l e^{i theta_l} |l><l+1| + h.c.
pub fn three_level_hamiltonian(delta: [f64; 2], omega: [f64; 2], theta: [f64; 2]) -> Mat3 {
    let g1 = C64::from_polar(omega[0], theta[0]);
    let g2 = C64::from_polar(omega[1], theta[1]);
    Mat3([
        [C64::ZERO, g1, C64::ZERO],
        [g1.conj(), c(delta[0], 0.0), g2],
        [C64::ZERO, g2.conj(), c(delta[1], 0.0)],
    ])
}

/// Ladder Hamiltonian of the special pattern: detunings (Delta, 2 Delta),
/// equal couplings and phases.
pub fn three_level_special_hamiltonian(delta: f64, omega: f64, theta: f64) -> Mat3 {
    three_level_hamiltonian([delta, 2.0 * delta], [omega, omega], [theta, theta])
}

/// Exact two-level propagator with the trace part factored out (an SU(2)
/// matrix, det = 1):
///
/// ```text
/// [ cos(Et) + i (D/2E) sin(Et)    -i (O e^{i th}/E) sin(Et) ]
/// [ -i (O e^{-i th}/E) sin(Et)    cos(Et) - i (D/2E) sin(Et) ]
/// ```
///
/// with E = sqrt(O^2 + D^2/4). The full propagator of the Hamiltonian is
/// `e^{-i D t / 2}` times this matrix.
pub fn propagator_two_level(delta: f64, omega: f64, theta: f64, t: f64) -> Mat2 {
    let e = (omega * omega + delta * delta / 4.0).sqrt();
    let x = e * t;
    let (cx, sc) = (x.cos(), t * sinc(x)); // sc = sin(Et)/E, exact at E = 0
    let diag = c(cx, 0.5 * delta * sc);
    let off = C64::from_polar(omega * sc, theta) * c(0.0, -1.0);
    Mat2([[diag, off], [-off.conj(), diag.conj()]])
}

/// Exact propagator of the special three-level ladder in closed form: the
/// returned matrix includes the prefactor `e^{-i Delta t} / E^2` with
/// E = sqrt(Delta^2 + 2 Omega^2). Equal to `exp(-i H t)` of
/// [`three_level_special_hamiltonian`] exactly.
pub fn propagator_three_level_special(delta: f64, omega: f64, theta: f64, t: f64) -> Mat3 {
    let e2 = delta * delta + 2.0 * omega * omega;
    if e2 == 0.0 {
        return Mat3::identity();
    }
    let e = e2.sqrt();
    let (ct, st) = ((e * t).cos(), (e * t).sin());
    let g = C64::from_polar(omega, theta);
    let g2 = C64::from_polar(omega * omega, 2.0 * theta);
    let u11 = c(
        omega * omega + (delta * delta + omega * omega) * ct,
        delta * e * st,
    );
    let u22 = c(delta * delta + 2.0 * omega * omega * ct, 0.0);
    let u12 = g * c(delta * (1.0 - ct), -e * st);
    let u21 = g.conj() * c(delta * (1.0 - ct), -e * st);
    let u13 = g2 * c(ct - 1.0, 0.0);
    // (2,3) and (3,2) share the -i E sin term; they are not conjugates
    let u23 = g * c(delta * (ct - 1.0), -e * st);
    let u32 = g.conj() * c(delta * (ct - 1.0), -e * st);
    let pref = C64::from_polar(1.0 / e2, -delta * t);
    Mat3([
        [u11, u12, u13],
        [u21, u22, u23],
        [u13.conj(), u32, u11.conj()],
    ])
    .scale(pref)
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (closed form)
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a 2x2
/// Hermitian matrix. The input is hermitized first; callers gate tolerance.
pub fn eigh2(h: &Mat2) -> ([f64; 2], Mat2) {
    let a = h.0[0][0].re;
    let d = h.0[1][1].re;
    let b = (h.0[0][1] + h.0[1][0].conj()) * c(0.5, 0.0);
    let mid = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let vals = [mid - r, mid + r];
    if r < 1e-300 || b.norm() + half.abs() < 1e-15 * (1.0 + mid.abs()) {
        return (vals, Mat2::identity());
    }
    // eigenvector for `mid - r`: (b, (mid - r) - a) or ((mid - r) - d, b*)
    let v0a = [b, c(vals[0] - a, 0.0)];
    let v0b = [c(vals[0] - d, 0.0), b.conj()];
    let na = norm_sq(&v0a);
    let nb = norm_sq(&v0b);
    let v0 = if na >= nb { v0a } else { v0b };
    let n = norm_sq(&v0).sqrt();
    let v0 = [v0[0] / n, v0[1] / n];
    // orthogonal complement in 2D
    let v1 = [-v0[1].conj(), v0[0].conj()];
    (vals, Mat2::from_cols(&[v0, v1]))
}

fn cross3(a: &State3, b: &State3) -> State3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize3(v: &mut State3) -> f64 {
    let n = norm_sq(v).sqrt();
    if n > 0.0 {
        for e in v.iter_mut() {
            *e /= n;
        }
    }
    n
}

fn hdot3(a: &State3, b: &State3) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Best null-vector of (H - lambda I) from row cross products.
fn null_vector3(h: &Mat3, lambda: f64) -> (State3, f64) {
    let mut a = *h;
    for i in 0..3 {
        a.0[i][i] -= c(lambda, 0.0);
    }
    let r0 = [a.0[0][0], a.0[0][1], a.0[0][2]];
    let r1 = [a.0[1][0], a.0[1][1], a.0[1][2]];
    let r2 = [a.0[2][0], a.0[2][1], a.0[2][2]];
    let mut best = cross3(&r0, &r1);
    let mut bn = norm_sq(&best);
    for cand in [cross3(&r0, &r2), cross3(&r1, &r2)] {
        let n = norm_sq(&cand);
        if n > bn {
            best = cand;
            bn = n;
        }
    }
    let n = normalize3(&mut best);
    (best, n)
}

/// Two orthonormal vectors spanning the Hermitian-orthogonal complement of
/// the unit vector `w`.
fn complement_basis3(w: &State3) -> (State3, State3) {
    // Gram-Schmidt two standard basis vectors against w, picking the two
    // with the smallest overlap first.
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| w[i].norm().partial_cmp(&w[j].norm()).unwrap());
    let mut u1 = [C64::ZERO; 3];
    u1[idx[0]] = C64::ONE;
    let o = hdot3(w, &u1);
    for i in 0..3 {
        u1[i] -= o * w[i];
    }
    normalize3(&mut u1);
    let mut u2 = [C64::ZERO; 3];
    u2[idx[1]] = C64::ONE;
    let ow = hdot3(w, &u2);
    let o1 = hdot3(&u1, &u2);
    for i in 0..3 {
        u2[i] -= ow * w[i] + o1 * u1[i];
    }
    normalize3(&mut u2);
    (u1, u2)
}

fn det3(m: &Mat3) -> C64 {
    let a = &m.0;
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a 3x3
/// Hermitian matrix, via the trigonometric solution of the characteristic
/// cubic. Near-degenerate pairs are resolved in the orthogonal complement of
/// the isolated eigenvector so residuals stay at rounding level.
pub fn eigh3(h: &Mat3) -> ([f64; 3], Mat3) {
    // hermitize
    let mut a = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            a.0[i][j] = (h.0[i][j] + h.0[j][i].conj()) * c(0.5, 0.0);
        }
    }
    let q = a.trace().re / 3.0;
    let mut b = a;
    for i in 0..3 {
        b.0[i][i] -= c(q, 0.0);
    }
    let p2: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| b.0[i][j].norm_sqr())
        .sum();
    let scale = 1.0 + q.abs() + p2.sqrt();
    if p2 <= 1e-30 * scale * scale {
        return ([q, q, q], Mat3::identity());
    }
    let p = (p2 / 6.0).sqrt();
    let bn = b.scale(c(1.0 / p, 0.0));
    let r = (det3(&bn).re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut vals = [e1, e2, e3];
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // eigenvector work happens on the normalized deviator bn: its spectrum
    // has unit scale (sum of squares 6), so gaps are judged against a fixed
    // tolerance and at most one pair can be close at a time
    let bvals = vals.map(|v| (v - q) / p);
    let gap_tol = 1e-4;
    let g01 = bvals[1] - bvals[0];
    let g12 = bvals[2] - bvals[1];
    if g01 > gap_tol && g12 > gap_tol {
        let (v0, n0) = null_vector3(&bn, bvals[0]);
        let (mut v1, _) = null_vector3(&bn, bvals[1]);
        let (mut v2, n2) = null_vector3(&bn, bvals[2]);
        if n0 > 0.0 && n2 > 0.0 {
            // modified Gram-Schmidt for orthogonality at rounding level
            let o = hdot3(&v0, &v1);
            for i in 0..3 {
                v1[i] -= o * v0[i];
            }
            normalize3(&mut v1);
            let (o0, o1) = (hdot3(&v0, &v2), hdot3(&v1, &v2));
            for i in 0..3 {
                v2[i] -= o0 * v0[i] + o1 * v1[i];
            }
            normalize3(&mut v2);
            return (vals, Mat3::from_cols(&[v0, v1, v2]));
        }
    }
    // one isolated eigenvalue across the larger gap; the close pair is
    // resolved exactly in the complement
    let (iso, pair) = if g01 > g12 {
        (0usize, [1usize, 2])
    } else {
        (2usize, [0usize, 1])
    };
    let (w, _) = null_vector3(&bn, bvals[iso]);
    let (u1, u2) = complement_basis3(&w);
    let hu1 = a.apply(&u1);
    let hu2 = a.apply(&u2);
    let bb = Mat2([
        [hdot3(&u1, &hu1), hdot3(&u1, &hu2)],
        [hdot3(&u2, &hu1), hdot3(&u2, &hu2)],
    ]);
    let (mu, cv) = eigh2(&bb);
    let mut cols = [[C64::ZERO; 3]; 3];
    cols[iso] = w;
    // mu is ascending and stays within the close pair's bracket, so slot
    // order (and the global ascending order) is preserved
    for (slot, k) in pair.iter().zip(0..2) {
        let mut v = [C64::ZERO; 3];
        for i in 0..3 {
            v[i] = cv.0[0][k] * u1[i] + cv.0[1][k] * u2[i];
        }
        cols[*slot] = v;
        vals[*slot] = mu[k];
    }
    (vals, Mat3::from_cols(&cols))
}

// ---------------------------------------------------------------------------
// Spectral propagator caches
// ---------------------------------------------------------------------------

/// Spectral decomposition of a 2x2 Hermitian generator; `expm(t)` returns
/// `exp(-i H t)` exactly from the eigenbasis.
#[derive(Clone, Copy, Debug)]
pub struct Spectral2 {
    pub vals: [f64; 2],
    pub vecs: Mat2,
}

impl Spectral2 {
    pub fn new(h: &Mat2) -> Result<Self> {
        let e = h.hermiticity_error();
        if e >= HERM_TOL {
            return Err(Error::InvalidMatrix(e));
        }
        let (vals, vecs) = eigh2(h);
        Ok(Spectral2 { vals, vecs })
    }

    pub fn expm(&self, t: f64) -> Mat2 {
        let mut m = Mat2::zeros();
        for k in 0..2 {
            let ph = C64::from_polar(1.0, -self.vals[k] * t);
            let v = self.vecs.col(k);
            for i in 0..2 {
                for j in 0..2 {
                    m.0[i][j] += ph * v[i] * v[j].conj();
                }
            }
        }
        m
    }
}

/// Spectral decomposition of a 3x3 Hermitian generator.
#[derive(Clone, Copy, Debug)]
pub struct Spectral3 {
    pub vals: [f64; 3],
    pub vecs: Mat3,
}

impl Spectral3 {
    pub fn new(h: &Mat3) -> Result<Self> {
        let e = h.hermiticity_error();
        if e >= HERM_TOL {
            return Err(Error::InvalidMatrix(e));
        }
        let (vals, vecs) = eigh3(h);
        Ok(Spectral3 { vals, vecs })
    }

    pub fn expm(&self, t: f64) -> Mat3 {
        let mut m = Mat3::zeros();
        for k in 0..3 {
            let ph = C64::from_polar(1.0, -self.vals[k] * t);
            let v = self.vecs.col(k);
            for i in 0..3 {
                for j in 0..3 {
                    m.0[i][j] += ph * v[i] * v[j].conj();
                }
            }
        }
        m
    }
}

/// exp(-i H t) for Hermitian H (2x2), via real-eigenvalue spectral
/// decomposition. Errors on non-Hermitian input.
pub fn expm_hermitian2(h: &Mat2, t: f64) -> Result<Mat2> {
    Ok(Spectral2::new(h)?.expm(t))
}

/// exp(-i H t) for Hermitian H (3x3).
pub fn expm_hermitian3(h: &Mat3, t: f64) -> Result<Mat3> {
    Ok(Spectral3::new(h)?.expm(t))
}

// ---------------------------------------------------------------------------
// Unitary eigendecomposition and principal-branch logarithm
// ---------------------------------------------------------------------------

/// Eigenvalues (on the unit circle) and orthonormal eigenvectors of a 2x2
/// unitary, by simultaneous diagonalization of its Hermitian and
/// anti-Hermitian parts.
pub fn eig_unitary2(u: &Mat2) -> Result<([C64; 2], Mat2)> {
    let err = u.unitarity_error();
    if err >= UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let ud = u.adjoint();
    let a = u.add(&ud).scale(c(0.5, 0.0));
    let b = u.sub(&ud).scale(c(0.0, -0.5));
    let (va, vecs_a) = eigh2(&a);
    let scale = 1.0 + va[0].abs().max(va[1].abs());
    // conjugate eigenphase pairs share the cos part; the sin part splits them
    let vecs = if (va[1] - va[0]).abs() > 1e-4 * scale {
        vecs_a
    } else {
        eigh2(&b).1
    };
    let mut lam = [C64::ZERO; 2];
    for k in 0..2 {
        let v = vecs.col(k);
        let uv = u.apply(&v);
        let mut z: C64 = v.iter().zip(uv.iter()).map(|(x, y)| x.conj() * y).sum();
        let n = z.norm();
        if n > 0.0 {
            z /= n;
        }
        lam[k] = z;
    }
    Ok((lam, vecs))
}

/// Eigenvalues and orthonormal eigenvectors of a 3x3 unitary.
pub fn eig_unitary3(u: &Mat3) -> Result<([C64; 3], Mat3)> {
    let err = u.unitarity_error();
    if err >= UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let ud = u.adjoint();
    let a = u.add(&ud).scale(c(0.5, 0.0));
    let b = u.sub(&ud).scale(c(0.0, -0.5));
    let (va, vecs_a) = eigh3(&a);
    let scale = 1.0 + va.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // generous grouping: near-equal cos parts hand resolution to the sin
    // part, which separates conjugate eigenphase pairs cleanly
    let tol = 1e-4 * scale;
    // group indices with (numerically) equal cos-parts; resolve each group in
    // the sin-part, which distinguishes conjugate eigenphase pairs
    let mut cols = [vecs_a.col(0), vecs_a.col(1), vecs_a.col(2)];
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (va[j] - va[j - 1]).abs() <= tol {
            j += 1;
        }
        let size = j - i;
        if size == 2 {
            let (u1, u2) = (cols[i], cols[i + 1]);
            let bu1 = b.apply(&u1);
            let bu2 = b.apply(&u2);
            let bb = Mat2([
                [hdot3(&u1, &bu1), hdot3(&u1, &bu2)],
                [hdot3(&u2, &bu1), hdot3(&u2, &bu2)],
            ]);
            let (_, cv) = eigh2(&bb);
            for k in 0..2 {
                let mut v = [C64::ZERO; 3];
                for t in 0..3 {
                    v[t] = cv.0[0][k] * u1[t] + cv.0[1][k] * u2[t];
                }
                cols[i + k] = v;
            }
        } else if size == 3 {
            let (_, vb) = eigh3(&b);
            cols = [vb.col(0), vb.col(1), vb.col(2)];
        }
        i = j;
    }
    let mut lam = [C64::ZERO; 3];
    for k in 0..3 {
        let uv = u.apply(&cols[k]);
        let mut z = hdot3(&cols[k], &uv);
        let n = z.norm();
        if n > 0.0 {
            z /= n;
        }
        lam[k] = z;
    }
    Ok((lam, Mat3::from_cols(&cols)))
}

fn traceless_phases<const N: usize>(lam: &[C64; N]) -> Result<[f64; N]> {
    use std::f64::consts::PI;
    // an eigenphase at the cut has no principal branch
    let cut = PI - 1e-9;
    let mut out = [0.0; N];
    for (o, z) in out.iter_mut().zip(lam.iter()) {
        let mu = z.arg();
        if mu.abs() > cut {
            return Err(Error::BranchAmbiguity);
        }
        *o = mu;
    }
    let mean = out.iter().sum::<f64>() / N as f64;
    for o in out.iter_mut() {
        *o -= mean;
    }
    Ok(out)
}

/// Traceless Hermitian H with `exp(-i H T) = U e^{i phi}` for the global
/// phase that makes H traceless; eigenphases on the principal branch.
pub fn unitary_log_traceless2(u: &Mat2, period: f64) -> Result<Mat2> {
    if period <= 0.0 {
        return Err(Error::InvalidDuration("period"));
    }
    let (lam, vecs) = eig_unitary2(u)?;
    let centered = traceless_phases(&lam)?;
    let mut h = Mat2::zeros();
    for k in 0..2 {
        let hk = -centered[k] / period;
        let v = vecs.col(k);
        for i in 0..2 {
            for j in 0..2 {
                h.0[i][j] += c(hk, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    Ok(h)
}

/// Three-dimensional analogue of [`unitary_log_traceless2`].
pub fn unitary_log_traceless3(u: &Mat3, period: f64) -> Result<Mat3> {
    if period <= 0.0 {
        return Err(Error::InvalidDuration("period"));
    }
    let (lam, vecs) = eig_unitary3(u)?;
    let centered = traceless_phases(&lam)?;
    let mut h = Mat3::zeros();
    for k in 0..3 {
        let hk = -centered[k] / period;
        let v = vecs.col(k);
        for i in 0..3 {
            for j in 0..3 {
                h.0[i][j] += c(hk, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn taylor_expm2(h: &Mat2, t: f64, terms: usize) -> Mat2 {
        let a = h.scale(c(0.0, -t));
        let mut sum = Mat2::identity();
        let mut term = Mat2::identity();
        for k in 1..=terms {
            term = term.matmul(&a).scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        sum
    }

    fn taylor_expm3(h: &Mat3, t: f64, terms: usize) -> Mat3 {
        let a = h.scale(c(0.0, -t));
        let mut sum = Mat3::identity();
        let mut term = Mat3::identity();
        for k in 1..=terms {
            term = term.matmul(&a).scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        sum
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        let u = expm_hermitian2(&Mat2::zeros(), 3.7).unwrap();
        assert!(u.max_abs_diff(&Mat2::identity()) < 1e-15);
    }

    #[test]
    fn expm_diagonal_case() {
        let h = Mat2([[C64::ZERO, C64::ZERO], [C64::ZERO, c(40.0, 0.0)]]);
        let t = 0.13;
        let u = expm_hermitian2(&h, t).unwrap();
        let want = Mat2([
            [C64::ONE, C64::ZERO],
            [C64::ZERO, C64::from_polar(1.0, -40.0 * t)],
        ]);
        assert!(u.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn expm_matches_closed_two_level_form_up_to_global_phase() {
        // Omega=1, Delta=40, theta=0, t=0.05: exp(-iHt) must equal
        // e^{-i Delta t/2} times the closed-form SU(2) matrix, entrywise.
        let (d, o, th, t) = (40.0, 1.0, 0.0, 0.05);
        let h = two_level_hamiltonian(d, o, th);
        let u = expm_hermitian2(&h, t).unwrap();
        let closed = propagator_two_level(d, o, th, t).scale(C64::from_polar(1.0, -d * t / 2.0));
        assert!(u.max_abs_diff(&closed) < 1e-12);
        // independent oracle: 40-term Taylor series
        let oracle = taylor_expm2(&h, t, 40);
        assert!(u.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = two_level_hamiltonian(1.0, 1.0, 0.0);
        h.0[0][1] += c(1e-6, 0.0);
        assert!(matches!(
            expm_hermitian2(&h, 1.0),
            Err(Error::InvalidMatrix(_))
        ));
    }

    #[test]
    fn su2_propagator_at_zero_is_identity_and_unit_det() {
        let u = propagator_two_level(40.0, 1.0, 0.3, 0.0);
        assert!(u.max_abs_diff(&Mat2::identity()) < 1e-15);
        let u = propagator_two_level(-17.0, 2.5, 1.1, 0.7);
        let det = u.0[0][0] * u.0[1][1] - u.0[0][1] * u.0[1][0];
        assert!((det - C64::ONE).norm() < 1e-12);
        assert!(u.unitarity_error() < 1e-12);
    }

    #[test]
    fn su2_propagator_resonant_pi_pulse() {
        // Delta=0, theta=0, E t = pi/2: full flip
        let o = 1.0;
        let t = PI / 2.0;
        let u = propagator_two_level(0.0, o, 0.0, t);
        assert!(u.0[0][0].norm() < 1e-12 && u.0[1][1].norm() < 1e-12);
        assert!((u.0[0][1].norm() - 1.0).abs() < 1e-12);
        assert!((u.0[1][0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn su2_propagator_entry_value() {
        // entry (1,1) = cos(E t) + i (D/2E) sin(E t) at D=40, O=1, t=0.08
        let (d, o, t) = (40.0, 1.0, 0.08);
        let e = (o * o + d * d / 4.0f64).sqrt();
        let u = propagator_two_level(d, o, 0.0, t);
        let want = c((e * t).cos(), d / (2.0 * e) * (e * t).sin());
        assert!((u.0[0][0] - want).norm() < 1e-13);
        // cross-check against the spectral exponential of the traceless part
        let mut htl = two_level_hamiltonian(d, o, 0.0);
        htl.0[0][0] -= c(d / 2.0, 0.0);
        htl.0[1][1] -= c(d / 2.0, 0.0);
        let u2 = expm_hermitian2(&htl, t).unwrap();
        assert!(u.max_abs_diff(&u2) < 1e-12);
    }

    #[test]
    fn special_three_level_propagator_at_zero_and_decoupled() {
        let u = propagator_three_level_special(100.0, 1.0, 0.0, 0.0);
        assert!(u.max_abs_diff(&Mat3::identity()) < 1e-13);
        // Omega = 0: diag(1, e^{-i D t}, e^{-2 i D t}), off-diagonals zero
        let (d, t) = (7.0, 0.31);
        let u = propagator_three_level_special(d, 0.0, 0.0, t);
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)] {
            assert!(u.0[i][j].norm() < 1e-13);
        }
        assert!((u.0[0][0] - C64::ONE).norm() < 1e-13);
        assert!((u.0[1][1] - C64::from_polar(1.0, -d * t)).norm() < 1e-13);
        assert!((u.0[2][2] - C64::from_polar(1.0, -2.0 * d * t)).norm() < 1e-13);
    }

    #[test]
    fn special_three_level_propagator_matches_spectral() {
        let (d, o, th, t) = (100.0, 1.0, 0.0, 0.02);
        let h = three_level_special_hamiltonian(d, o, th);
        let u_spec = expm_hermitian3(&h, t).unwrap();
        let u_closed = propagator_three_level_special(d, o, th, t);
        assert!(u_spec.max_abs_diff(&u_closed) < 1e-11);
        assert!(u_closed.unitarity_error() < 1e-12);
        // and against the Taylor oracle
        let oracle = taylor_expm3(&h, t, 60);
        assert!(u_closed.max_abs_diff(&oracle) < 1e-10);
    }

    #[test]
    fn eigh3_diagonal_and_degenerate() {
        let h = three_level_hamiltonian([1.0, 2.0], [0.0, 0.0], [0.0, 0.0]);
        let (vals, vecs) = eigh3(&h);
        assert!((vals[0] - 0.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vals[2] - 2.0).abs() < 1e-14);
        assert!(vecs.unitarity_error() < 1e-12);
        // double eigenvalue
        let h = Mat3([
            [c(2.0, 0.0), C64::ZERO, C64::ZERO],
            [C64::ZERO, c(2.0, 0.0), c(0.1, 0.0)],
            [C64::ZERO, c(0.1, 0.0), c(2.0, 0.0)],
        ]);
        let (vals, vecs) = eigh3(&h);
        for k in 0..3 {
            let v = vecs.col(k);
            let hv = h.apply(&v);
            let mut r: f64 = 0.0;
            for i in 0..3 {
                r = r.max((hv[i] - c(vals[k], 0.0) * v[i]).norm());
            }
            assert!(r < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn unitary_log_identity_is_zero() {
        let h = unitary_log_traceless2(&Mat2::identity(), 2.0).unwrap();
        assert!(h.max_abs_diff(&Mat2::zeros()) < 1e-12);
        let h = unitary_log_traceless3(&Mat3::identity(), 2.0).unwrap();
        assert!(h.max_abs_diff(&Mat3::zeros()) < 1e-12);
    }

    #[test]
    fn unitary_log_round_trip_two_level() {
        // traceless Hermitian H0 with |H0| T < pi/2 round-trips
        let t = 0.4;
        let h0 = Mat2([[c(0.7, 0.0), c(0.4, -0.9)], [c(0.4, 0.9), c(-0.7, 0.0)]]);
        let u = expm_hermitian2(&h0, t).unwrap();
        let h = unitary_log_traceless2(&u, t).unwrap();
        assert!(h.max_abs_diff(&h0) < 1e-10);
    }

    #[test]
    fn unitary_log_round_trip_three_level() {
        let t = 0.2;
        let h0 = Mat3([
            [c(1.0, 0.0), c(0.3, 0.2), c(0.0, -0.5)],
            [c(0.3, -0.2), c(-0.4, 0.0), c(0.8, 0.1)],
            [c(0.0, 0.5), c(0.8, -0.1), c(-0.6, 0.0)],
        ]);
        let u = expm_hermitian3(&h0, t).unwrap();
        let h = unitary_log_traceless3(&u, t).unwrap();
        assert!(h.max_abs_diff(&h0) < 1e-10, "{}", h.max_abs_diff(&h0));
    }

    #[test]
    fn unitary_log_branch_cut_detected() {
        // an eigenphase at (or numerically on) the cut has no principal
        // branch; the log refuses rather than guessing
        let eps = 1e-12;
        let u = Mat2([
            [C64::from_polar(1.0, PI - eps), C64::ZERO],
            [C64::ZERO, C64::from_polar(1.0, -PI + eps)],
        ]);
        assert!(matches!(
            unitary_log_traceless2(&u, 1.0),
            Err(Error::BranchAmbiguity)
        ));
        let u = Mat2::identity().scale(c(-1.0, 0.0));
        assert!(matches!(
            unitary_log_traceless2(&u, 1.0),
            Err(Error::BranchAmbiguity)
        ));
        // phases strictly inside the branch are fine even when they differ
        // by nearly 2 pi after centering
        let u = Mat2([
            [C64::from_polar(1.0, 0.9 * PI), C64::ZERO],
            [C64::ZERO, C64::from_polar(1.0, -0.9 * PI)],
        ]);
        let h = unitary_log_traceless2(&u, 1.0).unwrap();
        assert!((h.0[0][0].re + 0.9 * PI).abs() < 1e-10);
    }

    #[test]
    fn phase_dist_detects_global_phase_equality() {
        let u = propagator_two_level(3.0, 1.0, 0.2, 0.7);
        let v = u.scale(C64::from_polar(1.0, 1.234));
        assert!(v.phase_dist(&u) < 1e-14);
        assert!(v.max_abs_diff(&u) > 0.1);
    }
}
