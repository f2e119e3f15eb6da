//! so(3)/se(3) kernel: hat/vee isomorphisms, the rotation exponential,
//! Lie brackets, the coadjoint action, and rotation-matrix hygiene.

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Max allowed entry of `m + m^T` for a matrix accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-12;
/// Max allowed orthogonality/determinant defect for a checked [`Rotation3`].
pub const ROTATION_TOL: f64 = 1e-10;
/// Max distance from the rotation group that [`reorthonormalize`] will repair.
pub const REORTH_MAX_DIST: f64 = 1e-3;
/// Below this rotation angle [`exp_so3`] switches to Taylor coefficients.
pub const EXP_TAYLOR_THRESHOLD: f64 = 1e-6;

/// Skew-symmetric matrix of `v`, satisfying `hat(v) * w == v x w`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Extraction uses no arithmetic, so `vee(hat(v)) == v`
/// bit-exactly.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let sym = m + m.transpose();
    let max_abs = sym.amax();
    if max_abs > SKEW_TOL {
        return Err(Error::NotSkew { max_abs });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Lie bracket on so(3) in vector coordinates: `[a, b] = a x b`.
pub fn bracket_so3(a: &Vec3, b: &Vec3) -> Vec3 {
    a.cross(b)
}

/// Coadjoint action ad*_xi nu on so(3)*, fixed so that
/// `<coad_so3(xi, nu), eta> == <nu, [xi, eta]>` for all `eta`.
pub fn coad_so3(xi: &Vec3, nu: &Vec3) -> Vec3 {
    nu.cross(xi)
}

/// Proper rotation matrix. Checked constructors enforce orthogonality and
/// det = +1 within [`ROTATION_TOL`]; the unchecked constructor exists for
/// integrators that let the matrix drift slightly between repair steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Mat3);

impl Rotation3 {
    pub fn identity() -> Self {
        Rotation3(Mat3::identity())
    }

    /// Validates `m` against [`ROTATION_TOL`].
    pub fn try_new(m: Mat3) -> Result<Self> {
        let defect = rotation_defect(&m);
        if defect > ROTATION_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        Ok(Rotation3(m))
    }

    /// Wraps `m` without validation. Intended for freshly composed rotations
    /// and for integrator states between reorthonormalization points.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation3(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, other: &Rotation3) -> Rotation3 {
        Rotation3(self.0 * other.0)
    }

    pub fn transpose(&self) -> Rotation3 {
        Rotation3(self.0.transpose())
    }

    /// Max combined entry defect of `R^T R - I` and `det R - 1`.
    pub fn defect(&self) -> f64 {
        rotation_defect(&self.0)
    }
}

fn rotation_defect(m: &Mat3) -> f64 {
    let orth = (m.transpose() * m - Mat3::identity()).amax();
    let det = (m.determinant() - 1.0).abs();
    orth.max(det)
}

/// Exponential map so(3) -> SO(3) via the Rodrigues formula. Below
/// [`EXP_TAYLOR_THRESHOLD`] the coefficients sin(t)/t and (1 - cos t)/t^2
/// switch to fourth-order Taylor expansions.
pub fn exp_so3(v: &Vec3) -> Rotation3 {
    let theta2 = v.norm_squared();
    let (a, b) = if theta2 < EXP_TAYLOR_THRESHOLD * EXP_TAYLOR_THRESHOLD {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(v);
    Rotation3(Mat3::identity() + k * a + k * k * b)
}

/// Projects `m` onto the nearest rotation (polar factor via SVD).
/// Fails with `Degenerate` when `m` is farther than [`REORTH_MAX_DIST`]
/// from the rotation group.
pub fn reorthonormalize(m: &Mat3) -> Result<Rotation3> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Degenerate { defect: f64::INFINITY }),
    };
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        // Flip the column of U paired with the smallest singular value.
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    let dist = (m - r).amax();
    if !dist.is_finite() || dist > REORTH_MAX_DIST {
        return Err(Error::Degenerate { defect: dist });
    }
    Ok(Rotation3(r))
}

/// Element of se(3) as a body angular velocity plus a translational part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Algebra {
    pub omega: Vec3,
    pub vel: Vec3,
}

impl Se3Algebra {
    pub fn new(omega: Vec3, vel: Vec3) -> Self {
        Se3Algebra { omega, vel }
    }
}

/// Lie bracket on se(3):
/// `[(w1, v1), (w2, v2)] = (w1 x w2, w1 x v2 - w2 x v1)`.
pub fn bracket_se3(a: &Se3Algebra, b: &Se3Algebra) -> Se3Algebra {
    Se3Algebra {
        omega: a.omega.cross(&b.omega),
        vel: a.omega.cross(&b.vel) - b.omega.cross(&a.vel),
    }
}

/// Element of SE(3) as a rotation plus a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Element {
    pub rot: Rotation3,
    pub trans: Vec3,
}

impl Se3Element {
    pub fn identity() -> Self {
        Se3Element {
            rot: Rotation3::identity(),
            trans: Vec3::zeros(),
        }
    }
}

/// Group law of SE(3): `(A1, v1)(A2, v2) = (A1 A2, v1 + A1 v2)`.
pub fn compose_se3(a: &Se3Element, b: &Se3Element) -> Se3Element {
    Se3Element {
        rot: a.rot.compose(&b.rot),
        trans: a.trans + a.rot.apply(&b.trans),
    }
}
