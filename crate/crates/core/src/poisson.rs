//! Lie-Poisson brackets on so(3)* and se(3)*, the canonical rotor bracket,
//! product brackets, Hamiltonian vector fields, the orbit two-form, and
//! Casimir functions.

use std::sync::Arc;

use crate::algebra::Vec3;
use crate::error::{Error, Result};

/// Flat coordinate access for the phase-space point types. Gradients share
/// the shape of the point they are taken at, so one type serves both roles.
pub trait Coords: Clone + Send + Sync {
    fn dim(&self) -> usize;
    fn coord(&self, i: usize) -> f64;
    fn set_coord(&mut self, i: usize, value: f64);

    fn dot(&self, other: &Self) -> f64 {
        (0..self.dim()).map(|i| self.coord(i) * other.coord(i)).sum()
    }

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for i in 0..z.dim() {
            z.set_coord(i, 0.0);
        }
        z
    }

    /// `self + c * other`, componentwise.
    fn scaled_add(&self, c: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.set_coord(i, self.coord(i) + c * other.coord(i));
        }
        out
    }

    fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.set_coord(i, c * self.coord(i));
        }
        out
    }

    fn max_abs(&self) -> f64 {
        (0..self.dim()).fold(0.0, |m, i| m.max(self.coord(i).abs()))
    }
}

impl Coords for Vec3 {
    fn dim(&self) -> usize {
        3
    }
    fn coord(&self, i: usize) -> f64 {
        self[i]
    }
    fn set_coord(&mut self, i: usize, value: f64) {
        self[i] = value;
    }
}

/// Point of se(3)* split into the angular momentum and advected factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Dual {
    pub pi: Vec3,
    pub gamma: Vec3,
}

impl Se3Dual {
    pub fn new(pi: Vec3, gamma: Vec3) -> Self {
        Se3Dual { pi, gamma }
    }
}

impl Coords for Se3Dual {
    fn dim(&self) -> usize {
        6
    }
    fn coord(&self, i: usize) -> f64 {
        if i < 3 {
            self.pi[i]
        } else {
            self.gamma[i - 3]
        }
    }
    fn set_coord(&mut self, i: usize, value: f64) {
        if i < 3 {
            self.pi[i] = value;
        } else {
            self.gamma[i - 3] = value;
        }
    }
}

/// Point of a canonical rotor factor: angles paired with conjugate momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorPoint {
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
}

impl RotorPoint {
    pub fn new(theta: Vec<f64>, ell: Vec<f64>) -> Result<Self> {
        if theta.len() != ell.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                got: ell.len(),
            });
        }
        Ok(RotorPoint { theta, ell })
    }

    pub fn rotor_count(&self) -> usize {
        self.theta.len()
    }
}

impl Coords for RotorPoint {
    fn dim(&self) -> usize {
        2 * self.theta.len()
    }
    fn coord(&self, i: usize) -> f64 {
        let k = self.theta.len();
        if i < k {
            self.theta[i]
        } else {
            self.ell[i - k]
        }
    }
    fn set_coord(&mut self, i: usize, value: f64) {
        let k = self.theta.len();
        if i < k {
            self.theta[i] = value;
        } else {
            self.ell[i - k] = value;
        }
    }
}

/// Lie-Poisson factor of a product phase space.
#[derive(Debug, Clone, PartialEq)]
pub enum LpFactor {
    So3(Vec3),
    Se3(Se3Dual),
}

impl LpFactor {
    pub fn variant(&self) -> &'static str {
        match self {
            LpFactor::So3(_) => "so3",
            LpFactor::Se3(_) => "se3",
        }
    }

    fn dim(&self) -> usize {
        match self {
            LpFactor::So3(_) => 3,
            LpFactor::Se3(_) => 6,
        }
    }
}

/// Point of a product space: a Lie-Poisson factor times a canonical rotor
/// factor. Flat coordinate order is (mu, theta, ell).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    pub mu: LpFactor,
    pub theta: Vec<f64>,
    pub ell: Vec<f64>,
}

impl ProductPoint {
    pub fn new(mu: LpFactor, theta: Vec<f64>, ell: Vec<f64>) -> Result<Self> {
        if theta.len() != ell.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                got: ell.len(),
            });
        }
        Ok(ProductPoint { mu, theta, ell })
    }
}

impl Coords for ProductPoint {
    fn dim(&self) -> usize {
        self.mu.dim() + 2 * self.theta.len()
    }
    fn coord(&self, i: usize) -> f64 {
        let d = self.mu.dim();
        let k = self.theta.len();
        if i < d {
            match &self.mu {
                LpFactor::So3(v) => v.coord(i),
                LpFactor::Se3(p) => p.coord(i),
            }
        } else if i < d + k {
            self.theta[i - d]
        } else {
            self.ell[i - d - k]
        }
    }
    fn set_coord(&mut self, i: usize, value: f64) {
        let d = self.mu.dim();
        let k = self.theta.len();
        if i < d {
            match &mut self.mu {
                LpFactor::So3(v) => v.set_coord(i, value),
                LpFactor::Se3(p) => p.set_coord(i, value),
            }
        } else if i < d + k {
            self.theta[i - d] = value;
        } else {
            self.ell[i - d - k] = value;
        }
    }
}

/// Smooth function with a user-supplied analytic gradient. The gradient has
/// the same shape as the evaluation point (one slot per factor).
#[derive(Clone)]
pub struct SmoothFn<P> {
    eval: Arc<dyn Fn(&P) -> f64 + Send + Sync>,
    grad: Arc<dyn Fn(&P) -> P + Send + Sync>,
}

impl<P: Coords + 'static> SmoothFn<P> {
    pub fn new(
        eval: impl Fn(&P) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&P) -> P + Send + Sync + 'static,
    ) -> Self {
        SmoothFn {
            eval: Arc::new(eval),
            grad: Arc::new(grad),
        }
    }

    pub fn eval(&self, p: &P) -> f64 {
        (self.eval)(p)
    }

    pub fn grad(&self, p: &P) -> P {
        (self.grad)(p)
    }

    /// Linear functional `p -> <coeffs, p>` plus a constant offset.
    pub fn affine(coeffs: P, offset: f64) -> Self {
        let c = coeffs.clone();
        SmoothFn {
            eval: Arc::new(move |p: &P| coeffs.dot(p) + offset),
            grad: Arc::new(move |_: &P| c.clone()),
        }
    }

    pub fn linear(coeffs: P) -> Self {
        Self::affine(coeffs, 0.0)
    }

    /// The i-th flat coordinate function. `template` fixes the shape.
    pub fn coordinate(template: &P, i: usize) -> Self {
        let mut coeffs = template.zeros_like();
        coeffs.set_coord(i, 1.0);
        Self::linear(coeffs)
    }

    /// Pointwise product with the product-rule gradient.
    pub fn product(f: &Self, g: &Self) -> Self {
        let (fe, fg) = (f.clone(), g.clone());
        let (ge, gg) = (f.clone(), g.clone());
        SmoothFn {
            eval: Arc::new(move |p: &P| fe.eval(p) * fg.eval(p)),
            grad: Arc::new(move |p: &P| {
                let gf = ge.grad(p).scaled(gg.eval(p));
                gf.scaled_add(ge.eval(p), &gg.grad(p))
            }),
        }
    }
}

/// Central finite-difference gradient of `f`, used as the independent
/// reference when validating analytic gradients.
pub fn fd_gradient<P: Coords>(f: &dyn Fn(&P) -> f64, p: &P, step: f64) -> P {
    let mut g = p.zeros_like();
    for i in 0..p.dim() {
        let mut hi = p.clone();
        hi.set_coord(i, p.coord(i) + step);
        let mut lo = p.clone();
        lo.set_coord(i, p.coord(i) - step);
        g.set_coord(i, (f(&hi) - f(&lo)) / (2.0 * step));
    }
    g
}

/// Orientation of a Lie-Poisson structure. `Minus` matches body-frame
/// mechanics (pi_dot = pi x omega) and is the convention every system in
/// this crate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSign {
    Plus,
    Minus,
}

impl BracketSign {
    pub fn factor(self) -> f64 {
        match self {
            BracketSign::Plus => 1.0,
            BracketSign::Minus => -1.0,
        }
    }
}

fn so3_pairing(pi: &Vec3, gf: &Vec3, gk: &Vec3) -> f64 {
    pi.dot(&gf.cross(gk))
}

fn se3_pairing(p: &Se3Dual, gf: &Se3Dual, gk: &Se3Dual) -> f64 {
    p.pi.dot(&gf.pi.cross(&gk.pi))
        + p.gamma.dot(&(gf.pi.cross(&gk.gamma) - gk.pi.cross(&gf.gamma)))
}

fn rotor_pairing(gf_th: &[f64], gf_el: &[f64], gk_th: &[f64], gk_el: &[f64]) -> f64 {
    gf_th
        .iter()
        .zip(gf_el)
        .zip(gk_th.iter().zip(gk_el))
        .map(|((fth, fel), (kth, kel))| fth * kel - kth * fel)
        .sum()
}

/// Lie-Poisson bracket on so(3)*:
/// `{f, k}(pi) = sign * pi . (grad f x grad k)`.
pub fn lp_bracket_so3(
    f: &SmoothFn<Vec3>,
    k: &SmoothFn<Vec3>,
    pi: &Vec3,
    sign: BracketSign,
) -> f64 {
    sign.factor() * so3_pairing(pi, &f.grad(pi), &k.grad(pi))
}

/// Lie-Poisson bracket on se(3)* in (pi, gamma) coordinates:
/// `{f, k} = sign * [pi . (df_pi x dk_pi) + gamma . (df_pi x dk_gamma - dk_pi x df_gamma)]`.
pub fn lp_bracket_se3(
    f: &SmoothFn<Se3Dual>,
    k: &SmoothFn<Se3Dual>,
    p: &Se3Dual,
    sign: BracketSign,
) -> f64 {
    sign.factor() * se3_pairing(p, &f.grad(p), &k.grad(p))
}

/// Canonical bracket of a rotor factor:
/// `{f, k} = sum_i (df/dtheta_i dk/dell_i - dk/dtheta_i df/dell_i)`.
pub fn bracket_rotor(f: &SmoothFn<RotorPoint>, k: &SmoothFn<RotorPoint>, p: &RotorPoint) -> Result<f64> {
    if p.theta.len() != p.ell.len() {
        return Err(Error::DimensionMismatch {
            expected: p.theta.len(),
            got: p.ell.len(),
        });
    }
    let gf = f.grad(p);
    let gk = k.grad(p);
    for g in [&gf, &gk] {
        if g.theta.len() != p.theta.len() || g.ell.len() != p.ell.len() {
            return Err(Error::DimensionMismatch {
                expected: p.theta.len(),
                got: g.theta.len().min(g.ell.len()),
            });
        }
    }
    Ok(rotor_pairing(&gf.theta, &gf.ell, &gk.theta, &gk.ell))
}

/// Product bracket: the signed Lie-Poisson factor bracket plus the canonical
/// rotor bracket. The sign applies to the Lie-Poisson factor only.
pub fn bracket_product(
    f: &SmoothFn<ProductPoint>,
    k: &SmoothFn<ProductPoint>,
    p: &ProductPoint,
    sign: BracketSign,
) -> Result<f64> {
    let gf = f.grad(p);
    let gk = k.grad(p);
    let lp = match (&p.mu, &gf.mu, &gk.mu) {
        (LpFactor::So3(pi), LpFactor::So3(a), LpFactor::So3(b)) => so3_pairing(pi, a, b),
        (LpFactor::Se3(q), LpFactor::Se3(a), LpFactor::Se3(b)) => se3_pairing(q, a, b),
        (point, a, _) => {
            let got = if a.variant() != point.variant() {
                a.variant()
            } else {
                gk.mu.variant()
            };
            return Err(Error::VariantMismatch {
                expected: point.variant(),
                got,
            });
        }
    };
    if gf.theta.len() != p.theta.len() || gk.theta.len() != p.theta.len() {
        return Err(Error::DimensionMismatch {
            expected: p.theta.len(),
            got: gf.theta.len().min(gk.theta.len()),
        });
    }
    let rotor = rotor_pairing(&gf.theta, &gf.ell, &gk.theta, &gk.ell);
    Ok(sign.factor() * lp + rotor)
}

/// Minus Hamiltonian vector field on so(3)*: `pi_dot = pi x grad_h`.
pub fn ham_vf_so3(grad_h: &Vec3, pi: &Vec3) -> Vec3 {
    pi.cross(grad_h)
}

/// Minus Hamiltonian vector field on se(3)*:
/// `pi_dot = pi x dh_pi + gamma x dh_gamma`, `gamma_dot = gamma x dh_pi`.
pub fn ham_vf_se3(grad_pi: &Vec3, grad_gamma: &Vec3, p: &Se3Dual) -> Se3Dual {
    Se3Dual {
        pi: p.pi.cross(grad_pi) + p.gamma.cross(grad_gamma),
        gamma: p.gamma.cross(grad_pi),
    }
}

/// Orbit two-form on a coadjoint orbit of so(3)* evaluated on the generators
/// `ad*_xi nu` and `ad*_eta nu`. The minus orientation is used, matching the
/// minus Lie-Poisson bracket: the value is `-nu . (xi x eta)`.
pub fn kks_form(nu: &Vec3, xi: &Vec3, eta: &Vec3) -> f64 {
    -nu.dot(&xi.cross(eta))
}

/// Casimirs of the so(3)* bracket: the squared momentum norm.
pub fn casimirs_so3() -> Vec<SmoothFn<Vec3>> {
    vec![SmoothFn::new(
        |pi: &Vec3| pi.norm_squared(),
        |pi: &Vec3| 2.0 * pi,
    )]
}

/// Casimirs of the se(3)* bracket: `|gamma|^2` and `pi . gamma`.
pub fn casimirs_se3() -> Vec<SmoothFn<Se3Dual>> {
    vec![
        SmoothFn::new(
            |p: &Se3Dual| p.gamma.norm_squared(),
            |p: &Se3Dual| Se3Dual::new(Vec3::zeros(), 2.0 * p.gamma),
        ),
        SmoothFn::new(
            |p: &Se3Dual| p.pi.dot(&p.gamma),
            |p: &Se3Dual| Se3Dual::new(p.gamma, p.pi),
        ),
    ]
}
