//! Position and velocity error bounds for single links and heterogeneous
//! networks.
//!
//! Per-link information is fused in the global frame. Links that cannot see
//! the target (outside the array field of view, target on a node, target on
//! a bistatic baseline) contribute nothing and leave a [`Flag`]; a singular
//! network matrix yields an infinite bound plus a flag instead of an error.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2};

use crate::error::{Error, Result};
use crate::fisher::{FisherMatrix, Param, ILL_CONDITIONED};
use crate::geom::{
    jac_bis_position, jac_bis_state, jac_mono_position, jac_mono_state, jac_rotation,
    LocalObservables,
};
use crate::link::{efim_diagonal, link_snr, LinkBudget, LinkGeometry, LinkKind, LinkSnr};
use crate::model::{
    derive_frame, Node, Scenario, SensingLink, SystemParams, TargetState, SPEED_OF_LIGHT,
};

/// Degeneracy encountered while evaluating a bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Flag {
    /// Target outside the receiver's field of view; link dropped.
    OutOfField { link: String },
    /// Target on a node position; link dropped.
    Coincident { link: String },
    /// Target on the Tx–Rx segment; the link's position EFIM is dropped.
    OnBaseline { link: String },
    SingularPosition,
    SingularVelocity,
    /// Velocity bounds need a moving target for the heading CRLB.
    UndefinedHeading,
    IllConditioned { what: &'static str, condition: f64 },
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::OutOfField { link } => write!(f, "out_of_field:{link}"),
            Flag::Coincident { link } => write!(f, "coincident:{link}"),
            Flag::OnBaseline { link } => write!(f, "on_baseline:{link}"),
            Flag::SingularPosition => f.write_str("singular_position"),
            Flag::SingularVelocity => f.write_str("singular_velocity"),
            Flag::UndefinedHeading => f.write_str("undefined_heading"),
            Flag::IllConditioned { what, .. } => write!(f, "ill_conditioned:{what}"),
        }
    }
}

/// A bound value with the degeneracies met on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBounds {
    /// m/s
    pub veb: f64,
    /// CRLB(|v|), (m/s)²
    pub crlb_speed: f64,
    /// CRLB(∠v), rad²
    pub crlb_heading: f64,
    pub efim: Matrix2<f64>,
    pub flags: Vec<Flag>,
}

/// Contribution of one sensing link.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeContribution {
    /// Receiver id for monostatic nodes, `tx->rx` for bistatic pairs.
    pub link: String,
    pub kind: LinkKind,
    pub snr_db: f64,
    /// Global-frame position EFIM; zero when dropped.
    pub position_efim: Matrix2<f64>,
    /// Global-frame velocity EFIM (rank one).
    pub velocity_efim: Matrix2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// m
    pub peb: f64,
    /// m/s
    pub veb: f64,
    /// rad²
    pub crlb_heading: f64,
    pub position_efim: Matrix2<f64>,
    pub velocity_efim: Matrix2<f64>,
    pub per_node: Vec<NodeContribution>,
    pub flags: Vec<Flag>,
}

pub fn link_label(link: &SensingLink<'_>) -> String {
    if link.is_monostatic() {
        link.rx.id.clone()
    } else {
        format!("{}->{}", link.tx.id, link.rx.id)
    }
}

fn budget(s: &Scenario, tx: &Node, t: &TargetState) -> LinkBudget {
    LinkBudget::with_power(t.rcs, s.sensing_power(tx))
}

/// Constants of one link at a fixed target position.
#[derive(Debug, Clone)]
struct LinkTerm {
    label: String,
    kind: LinkKind,
    tx: Node,
    rx: Node,
    obs: LocalObservables,
    snr: LinkSnr,
    /// EFIM diagonal over (f_D, τ, θ_R).
    diag: [f64; 3],
    position_efim: Option<Matrix2<f64>>,
}

/// Per-link terms of a network for one target position. Velocity-dependent
/// quantities are evaluated on demand so that Monte-Carlo headings reuse the
/// geometry.
#[derive(Debug, Clone)]
pub struct Network {
    params: SystemParams,
    position: Vector2<f64>,
    terms: Vec<LinkTerm>,
    flags: Vec<Flag>,
}

impl Network {
    pub fn build(s: &Scenario, t: &TargetState) -> Result<Self> {
        s.validate()?;
        t.validate()?;
        let lambda = s.params.wavelength();
        let mut terms = Vec::new();
        let mut flags = Vec::new();
        for link in s.links() {
            let label = link_label(&link);
            let (geo, obs) = match LinkGeometry::observe(&link, t, lambda) {
                Ok(v) => v,
                Err(Error::OutOfField { .. }) => {
                    flags.push(Flag::OutOfField { link: label });
                    continue;
                }
                Err(Error::SingularGeometry(_)) => {
                    flags.push(Flag::Coincident { link: label });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let b = budget(s, link.tx, t);
            let snr = link_snr(&s.params, &geo, &b)?;
            let diag = efim_diagonal(&s.params, &geo, &b)?;
            let position_efim = match local_position_efim(&obs, geo.kind, &diag, &t.position, link.rx) {
                Ok(m) => Some(m),
                Err(Error::SingularGeometry(_)) => {
                    flags.push(Flag::OnBaseline { link: label.clone() });
                    None
                }
                Err(e) => return Err(e),
            };
            terms.push(LinkTerm {
                label,
                kind: geo.kind,
                tx: link.tx.clone(),
                rx: link.rx.clone(),
                obs,
                snr,
                diag,
                position_efim,
            });
        }
        if terms.is_empty() {
            return Err(Error::NoInformation);
        }
        Ok(Self {
            params: s.params.clone(),
            position: t.position,
            terms,
            flags,
        })
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn link_count(&self) -> usize {
        self.terms.len()
    }

    pub fn position_efim(&self) -> Matrix2<f64> {
        self.terms
            .iter()
            .filter_map(|t| t.position_efim)
            .fold(Matrix2::zeros(), |a, m| a + m)
    }

    pub fn peb(&self) -> Bound {
        let mut flags = self.flags.clone();
        let value = trace_bound(&self.position_efim(), [Param::X, Param::Y], "position", &mut flags)
            .unwrap_or_else(|| {
                flags.push(Flag::SingularPosition);
                f64::INFINITY
            });
        Bound { value, flags }
    }

    fn target(&self, v: &Vector2<f64>) -> TargetState {
        TargetState::new([self.position.x, self.position.y], [v.x, v.y])
    }

    /// Closed-form velocity EFIM of every link, in link order.
    pub fn velocity_efims(&self, v: &Vector2<f64>) -> Result<Vec<Matrix2<f64>>> {
        let f = derive_frame(&self.params)?;
        let ctx = KnContext::new(&self.params, f.k, f.m, f.eta);
        Ok(self
            .terms
            .iter()
            .map(|term| term_velocity_efim(&ctx, term, &self.position, v))
            .collect())
    }

    /// Velocity bounds from the summed per-link velocity EFIMs.
    pub fn velocity_bounds(&self, v: &Vector2<f64>) -> Result<VelocityBounds> {
        let efim = self
            .velocity_efims(v)?
            .into_iter()
            .fold(Matrix2::zeros(), |a, m| a + m);
        polar_bounds(efim, v, self.flags.clone())
    }

    /// Velocity bounds from the summed 4×4 state EFIM with position treated
    /// as a nuisance at network level.
    pub fn velocity_bounds_exact(&self, v: &Vector2<f64>) -> Result<VelocityBounds> {
        let t = self.target(v);
        let mut sum = Matrix4::zeros();
        for term in &self.terms {
            sum += term_state_efim(&self.params, term, &t)?;
        }
        let mut flags = self.flags.clone();
        let efim = match velocity_schur(&sum) {
            Some(e) => e,
            None => {
                flags.push(Flag::SingularVelocity);
                return Ok(infinite_velocity(Matrix2::zeros(), flags));
            }
        };
        polar_bounds(efim, v, flags)
    }

    pub fn report(&self, v: &Vector2<f64>) -> Result<BoundReport> {
        let peb = self.peb();
        let vel = self.velocity_efims(v)?;
        let mut flags = peb.flags;
        let velocity_efim = vel.iter().fold(Matrix2::zeros(), |a, m| a + m);
        let (veb, crlb_heading) = match polar_bounds(velocity_efim, v, Vec::new()) {
            Ok(b) => {
                flags.extend(b.flags);
                (b.veb, b.crlb_heading)
            }
            Err(Error::UndefinedHeading) => {
                flags.push(Flag::UndefinedHeading);
                (f64::NAN, f64::NAN)
            }
            Err(e) => return Err(e),
        };
        let per_node = self
            .terms
            .iter()
            .zip(vel)
            .map(|(t, v)| NodeContribution {
                link: t.label.clone(),
                kind: t.kind,
                snr_db: 10.0 * t.snr.snr.log10(),
                position_efim: t.position_efim.unwrap_or_else(Matrix2::zeros),
                velocity_efim: v,
            })
            .collect();
        Ok(BoundReport {
            peb: peb.value,
            veb,
            crlb_heading,
            position_efim: self.position_efim(),
            velocity_efim,
            per_node,
            flags,
        })
    }
}

/// sqrt(trace(I⁻¹)), or `None` when singular.
fn trace_bound(m: &Matrix2<f64>, labels: [Param; 2], what: &'static str, flags: &mut Vec<Flag>) -> Option<f64> {
    let f = FisherMatrix::from_parts(labels.to_vec(), DMatrix::from_column_slice(2, 2, m.as_slice()));
    let inv = f.inverse().ok()?;
    let cond = f.condition_number();
    if cond > ILL_CONDITIONED {
        flags.push(Flag::IllConditioned { what, condition: cond });
    }
    Some((inv[(0, 0)] + inv[(1, 1)]).sqrt())
}

fn local_position_efim(
    obs: &LocalObservables,
    kind: LinkKind,
    diag: &[f64; 3],
    p: &Vector2<f64>,
    rx: &Node,
) -> Result<Matrix2<f64>> {
    let d = Matrix2::new(diag[1], 0.0, 0.0, diag[2]);
    let rot = jac_rotation(rx.orientation);
    let local = match kind {
        LinkKind::Monostatic => {
            let j = jac_mono_position(&(rot * (p - rx.position)))?;
            j.transpose() * d * j
        }
        LinkKind::Bistatic => {
            let jinv = jac_bis_position(obs)?;
            let j = jinv
                .try_inverse()
                .ok_or_else(|| Error::SingularGeometry("bistatic Jacobian not invertible".into()))?;
            j.transpose() * d * j
        }
    };
    let g = rot.transpose() * local * rot;
    Ok((g + g.transpose()) * 0.5)
}

struct KnContext {
    k: f64,
    m: f64,
    nr: f64,
    ts: f64,
    df: f64,
    eta: f64,
    lambda: f64,
}

impl KnContext {
    fn new(p: &SystemParams, k: usize, m: usize, eta: f64) -> Self {
        Self {
            k: k as f64,
            m: m as f64,
            nr: p.n_rx_ant as f64,
            ts: p.symbol_duration,
            df: p.subcarrier_spacing,
            eta,
            lambda: p.wavelength(),
        }
    }
}

/// Monostatic `k_n` with `x′ = x − x_n`, `y′ = y − y_n` in the global frame.
fn kn_mono(c: &KnContext, snr: f64, cos2: f64, d: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    let (m2, nr2) = (c.m * c.m - 1.0, c.nr * c.nr - 1.0);
    let w = d.x * v.y - d.y * v.x;
    let r2 = d.norm_squared();
    let num = 8.0 * snr * c.nr * c.k * c.m * PI * PI * c.ts * c.ts * m2 * nr2 * cos2;
    let den = c.eta * (48.0 * m2 * c.ts * c.ts * w * w + 3.0 * nr2 * r2 * c.lambda * c.lambda * cos2);
    num / den
}

/// Bistatic `k_n` with `(x′_T, y′_T) = p − s_T` and `(x′_n, y′_n) = p − s_n`.
fn kn_bis(c: &KnContext, snr: f64, cos2: f64, dt: &Vector2<f64>, dn: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    let (k2, m2, nr2) = (c.k * c.k - 1.0, c.m * c.m - 1.0, c.nr * c.nr - 1.0);
    let (xt, yt, xn, yn) = (dt.x, dt.y, dn.x, dn.y);
    let (rt, rn) = (dt.norm(), dn.norm());
    let (vx, vy) = (v.x, v.y);
    let a = 2.0 * PI * PI * c.df * c.df * c.ts * c.ts * snr * c.k * k2 * c.m * m2 * c.nr * nr2 / c.eta;
    let nn = xn * xn + yn * yn;
    let tt = xt * xt + yt * yt;
    let nt = xn * xt + yn * yt;
    let wn = vy * xn - vx * yn;
    let wt = vy * xt - vx * yt;
    let u1 = rt.powi(4) * wn * nn + rn * rt.powi(3) * wn * nt + rn.powi(3) * rt * wt * nt + rn.powi(4) * wt * tt;
    let cross = xt * yn - xn * yt;
    let u2 = SPEED_OF_LIGHT.powi(2) * c.ts * c.ts * m2 * rn * rn * wt * wt * cross * cross
        + c.lambda * c.lambda * c.df * c.df * k2 * rt.powi(4) * (rt * nn + rn * nt).powi(2);
    let num = a * rt.powi(4) * cos2 * (rt * nn + rn * nt).powi(2);
    let den = 12.0 * c.df * c.df * c.ts * c.ts * k2 * m2 * u1 * u1 + 3.0 * nr2 * rn * rn * rt * rt * cos2 * u2;
    num / den
}

fn term_velocity_efim(c: &KnContext, term: &LinkTerm, p: &Vector2<f64>, v: &Vector2<f64>) -> Matrix2<f64> {
    let cos2 = term.obs.doa.cos().powi(2);
    let snr = term.snr.snr;
    let dn = p - term.rx.position;
    match term.kind {
        LinkKind::Monostatic => kn_mono(c, snr, cos2, &dn, v) * dn * dn.transpose(),
        // On the baseline the Doppler is blind to velocity and k_n is 0/0.
        LinkKind::Bistatic if term.obs.on_baseline => Matrix2::zeros(),
        LinkKind::Bistatic => {
            let dt = p - term.tx.position;
            let u = dn * dt.norm() + dt * dn.norm();
            kn_bis(c, snr, cos2, &dt, &dn, v) * u * u.transpose()
        }
    }
}

fn term_state_efim(p: &SystemParams, term: &LinkTerm, t: &TargetState) -> Result<Matrix4<f64>> {
    let lambda = p.wavelength();
    let j = match term.kind {
        LinkKind::Monostatic => jac_mono_state(&term.rx, t, lambda)?,
        LinkKind::Bistatic => jac_bis_state(&term.tx, &term.rx, t, lambda)?,
    };
    let d = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::from(term.diag));
    Ok(j.transpose() * d * j)
}

/// Velocity block of the inverse 4×4 state EFIM, as a Schur complement.
fn velocity_schur(m: &Matrix4<f64>) -> Option<Matrix2<f64>> {
    let f = FisherMatrix::from_parts(
        vec![Param::X, Param::Y, Param::Vx, Param::Vy],
        DMatrix::from_column_slice(4, 4, m.as_slice()),
    );
    let s = f.schur_complement(&[2, 3]).ok()?;
    let v = s.values();
    Some(Matrix2::new(v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]))
}

fn infinite_velocity(efim: Matrix2<f64>, flags: Vec<Flag>) -> VelocityBounds {
    VelocityBounds {
        veb: f64::INFINITY,
        crlb_speed: f64::INFINITY,
        crlb_heading: f64::INFINITY,
        efim,
        flags,
    }
}

/// CRLB(|v|) and CRLB(∠v) from a velocity EFIM `[[V_xx, V_xy], [V_xy, V_yy]]`.
pub fn polar_bounds(efim: Matrix2<f64>, v: &Vector2<f64>, mut flags: Vec<Flag>) -> Result<VelocityBounds> {
    let speed = v.norm();
    if speed == 0.0 {
        return Err(Error::UndefinedHeading);
    }
    let (vxx, vxy, vyy) = (efim[(0, 0)], efim[(0, 1)], efim[(1, 1)]);
    let det = vxx * vyy - vxy * vxy;
    if !(vxx > 0.0 && vyy > 0.0) || !(det > vxx * vyy / ILL_CONDITIONED) {
        flags.push(Flag::SingularVelocity);
        return Ok(infinite_velocity(efim, flags));
    }
    let h = v.y.atan2(v.x);
    let (s, c) = h.sin_cos();
    let s2 = (2.0 * h).sin();
    let crlb_speed = (vyy * c * c + vxx * s * s - vxy * s2) / det;
    let crlb_heading = (vxx * c * c + vyy * s * s + vxy * s2) / (det * speed * speed);
    Ok(VelocityBounds {
        veb: crlb_speed.sqrt(),
        crlb_speed,
        crlb_heading,
        efim,
        flags,
    })
}

fn node_budget_for(p: &SystemParams, tx: &Node, t: &TargetState) -> LinkBudget {
    LinkBudget::with_power(t.rcs, tx.sensing_power.unwrap_or_else(|| p.sensing_power()))
}

/// PEB of a lone monostatic node from the closed form
/// `CRLB = (c²/4)·CRLB(τ) + r²·CRLB(θ_R)`.
pub fn peb_mono_closed(p: &SystemParams, node: &Node, t: &TargetState) -> Result<f64> {
    let link = SensingLink { tx: node, rx: node };
    let (g, _) = LinkGeometry::observe(&link, t, p.wavelength())?;
    let b = node_budget_for(p, node, t);
    let snr = link_snr(p, &g, &b)?;
    let f = derive_frame(p)?;
    if p.n_rx_ant < 2 {
        return Err(Error::InsufficientResources {
            what: "receive antennas N_R",
            value: p.n_rx_ant,
        });
    }
    let (k, m, nr) = (f.k as f64, f.m as f64, p.n_rx_ant as f64);
    let c = SPEED_OF_LIGHT;
    let r = g.range_rx;
    let cos2 = g.doa_local.cos().powi(2);
    let df = p.subcarrier_spacing;
    let crlb = f.eta / (PI * PI * k * m * nr * snr.snr)
        * (3.0 * c * c / (8.0 * df * df * (k * k - 1.0)) + 6.0 * r * r / ((nr * nr - 1.0) * cos2));
    Ok(crlb.sqrt())
}

/// PEB of a lone bistatic pair from `a₁₁·CRLB(τ) + a₂₂·CRLB(θ_R)`. Infinite
/// when the target sits on the baseline.
pub fn peb_bis_closed(p: &SystemParams, tx: &Node, rx: &Node, t: &TargetState) -> Result<f64> {
    let link = SensingLink { tx, rx };
    let (mut g, obs) = if std::ptr::eq(tx, rx) {
        let (g, _) = LinkGeometry::observe(&link, t, p.wavelength())?;
        let obs = crate::geom::bis_observables(tx, rx, t, p.wavelength())?;
        (g, obs)
    } else {
        LinkGeometry::observe(&link, t, p.wavelength())?
    };
    g.kind = LinkKind::Bistatic;
    let b = node_budget_for(p, tx, t);
    let s = crate::link::scalar_crlbs(p, &g, &b)?;
    let (rb, l, cl) = (obs.bistatic_range, obs.baseline, obs.look_angle.cos());
    let den = rb - l * cl;
    if den <= crate::geom::BASELINE_RTOL * rb {
        return Ok(f64::INFINITY);
    }
    let q = l * l + rb * rb - 2.0 * l * rb * cl;
    let d4 = 4.0 * den.powi(4);
    let a11 = SPEED_OF_LIGHT.powi(2) * q * q / d4;
    let a22 = (l * l - rb * rb).powi(2) * q / d4;
    Ok((a11 * s.tau + a22 * s.theta).sqrt())
}

pub fn network_position_efim(s: &Scenario, t: &TargetState) -> Result<FisherMatrix> {
    let n = Network::build(s, t)?;
    let m = n.position_efim();
    Ok(FisherMatrix::from_parts(
        vec![Param::X, Param::Y],
        DMatrix::from_column_slice(2, 2, m.as_slice()),
    ))
}

pub fn network_peb(s: &Scenario, t: &TargetState) -> Result<Bound> {
    Ok(Network::build(s, t)?.peb())
}

/// Closed-form velocity EFIM of one scenario link.
pub fn node_velocity_efim(s: &Scenario, link: &SensingLink<'_>, t: &TargetState) -> Result<Matrix2<f64>> {
    let term = single_term(s, link, t)?;
    let f = derive_frame(&s.params)?;
    let c = KnContext::new(&s.params, f.k, f.m, f.eta);
    Ok(term_velocity_efim(&c, &term, &t.position, &t.velocity))
}

/// 4×4 EFIM over `(x, y, v_x, v_y)` of one scenario link.
pub fn node_state_efim(s: &Scenario, link: &SensingLink<'_>, t: &TargetState) -> Result<Matrix4<f64>> {
    let term = single_term(s, link, t)?;
    term_state_efim(&s.params, &term, t)
}

/// Velocity EFIM of one link through the generic route: Schur complement of
/// the position block of [`node_state_efim`].
pub fn node_velocity_efim_exact(s: &Scenario, link: &SensingLink<'_>, t: &TargetState) -> Result<Matrix2<f64>> {
    velocity_schur(&node_state_efim(s, link, t)?).ok_or(Error::NuisanceBlockSingular)
}

fn single_term(s: &Scenario, link: &SensingLink<'_>, t: &TargetState) -> Result<LinkTerm> {
    let lambda = s.params.wavelength();
    let (geo, obs) = LinkGeometry::observe(link, t, lambda)?;
    let b = budget(s, link.tx, t);
    Ok(LinkTerm {
        label: link_label(link),
        kind: geo.kind,
        tx: link.tx.clone(),
        rx: link.rx.clone(),
        obs,
        snr: link_snr(&s.params, &geo, &b)?,
        diag: efim_diagonal(&s.params, &geo, &b)?,
        position_efim: None,
    })
}

pub fn network_velocity_bounds(s: &Scenario, t: &TargetState) -> Result<VelocityBounds> {
    Network::build(s, t)?.velocity_bounds(&t.velocity)
}

pub fn network_velocity_bounds_exact(s: &Scenario, t: &TargetState) -> Result<VelocityBounds> {
    Network::build(s, t)?.velocity_bounds_exact(&t.velocity)
}

/// Every bound for one target.
pub fn evaluate(s: &Scenario, t: &TargetState) -> Result<BoundReport> {
    Network::build(s, t)?.report(&t.velocity)
}
