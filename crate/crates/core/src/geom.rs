//! Coordinate transforms and analytic Jacobians between the local
//! observables of a link (delay, DoA, Doppler) and the global target state.
//!
//! Conventions: global positions in metres; a node's local frame is centred
//! on the node with its x-axis along the array boresight, rotated by the
//! node orientation `ϑ` from the global x-axis. A monostatic link measures
//! the two-way delay `2r/c`; a bistatic link measures `(r_T + r_n)/c`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix3x4, Vector2};

use crate::error::{Error, Result};
use crate::model::{Node, TargetState, SPEED_OF_LIGHT};

/// Relative tolerance under which the bistatic denominator `r̄ − l·cosθ_L`
/// is treated as zero.
pub const BASELINE_RTOL: f64 = 1e-9;

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Target position in the node's local frame.
pub fn global_to_local(p: &Vector2<f64>, node: &Node) -> Vector2<f64> {
    jac_rotation(node.orientation) * (p - node.position)
}

pub fn local_to_global(p_local: &Vector2<f64>, node: &Node) -> Vector2<f64> {
    jac_rotation(node.orientation).transpose() * p_local + node.position
}

/// Observables of one link, plus the bistatic triangle when the link is
/// bistatic. For a monostatic link the baseline is zero and `bistatic_range`
/// is `2r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObservables {
    /// s
    pub delay: f64,
    /// rad, in the receiver's local frame
    pub doa: f64,
    /// Hz
    pub doppler: f64,
    /// Tx–target distance r_T (m)
    pub range_tx: f64,
    /// Target–Rx distance r_n (m)
    pub range_rx: f64,
    /// Tx–Rx distance l (m)
    pub baseline: f64,
    /// r̄ = r_T + r_n (m)
    pub bistatic_range: f64,
    /// θ_shift = ϑ_n − β_n
    pub angle_shift: f64,
    /// θ_L = θ_R + θ_shift
    pub look_angle: f64,
    /// Target on (or numerically at) the Tx–Rx segment.
    pub on_baseline: bool,
}

fn check_field_of_view(doa: f64) -> Result<()> {
    if doa.abs() >= FRAC_PI_2 {
        Err(Error::OutOfField { angle_rad: doa })
    } else {
        Ok(())
    }
}

fn local_doa(p: &Vector2<f64>, rx: &Node) -> f64 {
    let d = p - rx.position;
    wrap_angle(d.y.atan2(d.x) - rx.orientation)
}

/// Monostatic delay, DoA and Doppler of `t` seen from `node`.
pub fn mono_observables(node: &Node, t: &TargetState, wavelength: f64) -> Result<LocalObservables> {
    let d = t.position - node.position;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "target coincides with node `{}`",
            node.id
        )));
    }
    let doa = local_doa(&t.position, node);
    check_field_of_view(doa)?;
    let radial = d.dot(&t.velocity) / r;
    Ok(LocalObservables {
        delay: 2.0 * r / SPEED_OF_LIGHT,
        doa,
        doppler: 2.0 * radial / wavelength,
        range_tx: r,
        range_rx: r,
        baseline: 0.0,
        bistatic_range: 2.0 * r,
        angle_shift: 0.0,
        look_angle: doa,
        on_baseline: false,
    })
}

/// Bistatic observables of `t` for the pair `tx → rx`. The DoA is measured
/// in the receiver frame.
pub fn bis_observables(
    tx: &Node,
    rx: &Node,
    t: &TargetState,
    wavelength: f64,
) -> Result<LocalObservables> {
    let dt = t.position - tx.position;
    let dn = t.position - rx.position;
    let (range_tx, range_rx) = (dt.norm(), dn.norm());
    if range_tx == 0.0 || range_rx == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "target coincides with node `{}`",
            if range_tx == 0.0 { &tx.id } else { &rx.id }
        )));
    }
    let doa = local_doa(&t.position, rx);
    check_field_of_view(doa)?;
    let base = tx.position - rx.position;
    let baseline = base.norm();
    let beta = base.y.atan2(base.x);
    let angle_shift = wrap_angle(rx.orientation - beta);
    let bistatic_range = range_tx + range_rx;
    let look_angle = wrap_angle(doa + angle_shift);
    let doppler = (t.velocity.dot(&dt) / range_tx + t.velocity.dot(&dn) / range_rx) / wavelength;
    let on_baseline =
        baseline > 0.0 && bistatic_range - baseline * look_angle.cos() <= BASELINE_RTOL * bistatic_range;
    Ok(LocalObservables {
        delay: bistatic_range / SPEED_OF_LIGHT,
        doa,
        doppler,
        range_tx,
        range_rx,
        baseline,
        bistatic_range,
        angle_shift,
        look_angle,
        on_baseline,
    })
}

/// Receiver–target distance from the bistatic range, baseline and look
/// angle (the ellipse relation).
pub fn bistatic_range_to_distance(bistatic_range: f64, baseline: f64, look_angle: f64) -> Result<f64> {
    if !(bistatic_range > baseline && baseline >= 0.0) {
        return Err(Error::InvalidBistaticRange {
            bistatic_range,
            baseline,
        });
    }
    let den = 2.0 * (bistatic_range - baseline * look_angle.cos());
    Ok((bistatic_range * bistatic_range - baseline * baseline) / den)
}

/// ∂(τ, θ_R)/∂(x_n, y_n) for a monostatic link, at a local position.
pub fn jac_mono_position(p_local: &Vector2<f64>) -> Result<Matrix2<f64>> {
    let (x, y) = (p_local.x, p_local.y);
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::SingularGeometry("target at node position".into()));
    }
    let r = r2.sqrt();
    let k = 2.0 / SPEED_OF_LIGHT;
    Ok(Matrix2::new(k * x / r, k * y / r, -y / r2, x / r2))
}

/// ∂(x_n, y_n)/∂(τ, θ_R) of the bistatic inverse map
/// `(τ, θ_R) ↦ r_n·(cosθ_R, sinθ_R)` with `r_n` from the ellipse relation.
pub fn jac_bis_position(obs: &LocalObservables) -> Result<Matrix2<f64>> {
    let (rb, l) = (obs.bistatic_range, obs.baseline);
    let th = obs.doa;
    let sh = obs.angle_shift;
    let cl = (th + sh).cos();
    let den = rb - l * cl;
    if den <= BASELINE_RTOL * rb {
        return Err(Error::SingularGeometry(
            "target on the bistatic baseline".into(),
        ));
    }
    let den2 = 2.0 * den * den;
    let q = l * l + rb * rb - 2.0 * l * rb * cl;
    let c = SPEED_OF_LIGHT;
    let dl = l * l - rb * rb;
    Ok(Matrix2::new(
        c * th.cos() * q / den2,
        dl * (rb * th.sin() + l * sh.sin()) / den2,
        c * th.sin() * q / den2,
        dl * (l * sh.cos() - rb * th.cos()) / den2,
    ))
}

/// ∂p_n/∂p for the global→local rotation; orthonormal.
pub fn jac_rotation(orientation: f64) -> Matrix2<f64> {
    let (s, c) = orientation.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// ∂(f_D, τ, θ_R)/∂(x, y, v_x, v_y) for a monostatic node.
pub fn jac_mono_state(node: &Node, t: &TargetState, wavelength: f64) -> Result<Matrix3x4<f64>> {
    let d = t.position - node.position;
    let (x, y) = (d.x, d.y);
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "target coincides with node `{}`",
            node.id
        )));
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let (vx, vy) = (t.velocity.x, t.velocity.y);
    let kf = 2.0 / wavelength;
    let kt = 2.0 / SPEED_OF_LIGHT;
    Ok(Matrix3x4::new(
        kf * y * (y * vx - x * vy) / r3,
        kf * x * (x * vy - y * vx) / r3,
        kf * x / r,
        kf * y / r,
        kt * x / r,
        kt * y / r,
        0.0,
        0.0,
        -y / r2,
        x / r2,
        0.0,
        0.0,
    ))
}

/// ∂(f_D, τ, θ_R)/∂(x, y, v_x, v_y) for the bistatic pair `tx → rx`.
pub fn jac_bis_state(tx: &Node, rx: &Node, t: &TargetState, wavelength: f64) -> Result<Matrix3x4<f64>> {
    let dt = t.position - tx.position;
    let dn = t.position - rx.position;
    let (rt, rn) = (dt.norm(), dn.norm());
    if rt == 0.0 || rn == 0.0 {
        return Err(Error::SingularGeometry("target coincides with a node".into()));
    }
    let (xt, yt, xn, yn) = (dt.x, dt.y, dn.x, dn.y);
    let (rt3, rn3) = (rt * rt * rt, rn * rn * rn);
    let (vx, vy) = (t.velocity.x, t.velocity.y);
    let lam = wavelength;
    let c = SPEED_OF_LIGHT;
    let sxx = xt * xt / rt3 + xn * xn / rn3;
    let syy = yt * yt / rt3 + yn * yn / rn3;
    let sxy = xt * yt / rt3 + xn * yn / rn3;
    Ok(Matrix3x4::new(
        (vx * syy - vy * sxy) / lam,
        (-vx * sxy + vy * sxx) / lam,
        (xt / rt + xn / rn) / lam,
        (yt / rt + yn / rn) / lam,
        (xt / rt + xn / rn) / c,
        (yt / rt + yn / rn) / c,
        0.0,
        0.0,
        -yn / (rn * rn),
        xn / (rn * rn),
        0.0,
        0.0,
    ))
}

/// ∂(v_x, v_y)/∂(|v|, ∠v).
pub fn jac_polar_velocity(v: &Vector2<f64>) -> Result<Matrix2<f64>> {
    let speed = v.norm();
    if speed == 0.0 {
        return Err(Error::UndefinedHeading);
    }
    let (s, c) = (v.y / speed, v.x / speed);
    Ok(Matrix2::new(c, -speed * s, s, speed * c))
}
