//! Single-link Fisher analysis: radar-equation SNR, the 5×5 channel FIM,
//! scalar CRLBs and the effective FIMs used by the position and velocity
//! pipelines.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fisher::{FisherMatrix, LINK_PARAMS};
use crate::geom::{bis_observables, mono_observables, wrap_angle, LocalObservables};
use crate::model::{derive_frame, SensingLink, SystemParams, TargetState, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Monostatic,
    Bistatic,
}

/// Ranges and angles that fix the echo strength and the angular information
/// of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub kind: LinkKind,
    /// r_T (m); equals `range_rx` for a monostatic link.
    pub range_tx: f64,
    /// r_n (m)
    pub range_rx: f64,
    /// θ_R in the receiver frame, inside (−π/2, π/2).
    pub doa_local: f64,
    /// θ_T in the transmitter frame.
    pub dod_local: f64,
    /// θ_T,s − θ_T: beam pointing error at the transmitter.
    pub pointing_offset: f64,
}

impl LinkGeometry {
    pub fn monostatic(range: f64, doa: f64) -> Self {
        Self {
            kind: LinkKind::Monostatic,
            range_tx: range,
            range_rx: range,
            doa_local: doa,
            dod_local: doa,
            pointing_offset: 0.0,
        }
    }

    pub fn bistatic(range_tx: f64, range_rx: f64, doa: f64, dod: f64) -> Self {
        Self {
            kind: LinkKind::Bistatic,
            range_tx,
            range_rx,
            doa_local: doa,
            dod_local: dod,
            pointing_offset: 0.0,
        }
    }

    pub fn with_pointing_offset(mut self, offset: f64) -> Self {
        self.pointing_offset = offset;
        self
    }

    /// Geometry and observables of a scenario link for the given target.
    pub fn observe(link: &SensingLink<'_>, t: &TargetState, wavelength: f64) -> Result<(Self, LocalObservables)> {
        if link.is_monostatic() {
            let obs = mono_observables(link.rx, t, wavelength)?;
            Ok((Self::monostatic(obs.range_rx, obs.doa), obs))
        } else {
            let obs = bis_observables(link.tx, link.rx, t, wavelength)?;
            let d = t.position - link.tx.position;
            let dod = wrap_angle(d.y.atan2(d.x) - link.tx.orientation);
            Ok((
                Self::bistatic(obs.range_tx, obs.range_rx, obs.doa, dod),
                obs,
            ))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range_tx > 0.0 && self.range_rx > 0.0)
            || !(self.range_tx.is_finite() && self.range_rx.is_finite())
        {
            return Err(Error::SingularGeometry(format!(
                "ranges must be positive (r_T = {}, r_n = {})",
                self.range_tx, self.range_rx
            )));
        }
        if !(self.doa_local.abs() < PI / 2.0) {
            return Err(Error::OutOfField {
                angle_rad: self.doa_local,
            });
        }
        Ok(())
    }
}

/// Target reflectivity and the sensing power radiated by the link's
/// transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// m²
    pub rcs: f64,
    /// W, spread evenly over the K sensing subcarriers.
    pub sensing_power: f64,
}

impl LinkBudget {
    /// Full `ρ_f·P_T` budget.
    pub fn new(p: &SystemParams, rcs: f64) -> Self {
        Self {
            rcs,
            sensing_power: p.sensing_power(),
        }
    }

    pub fn with_power(rcs: f64, sensing_power: f64) -> Self {
        Self { rcs, sensing_power }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rcs.is_finite() && self.rcs > 0.0) {
            return Err(Error::invalid("rcs", format!("{} is not positive", self.rcs)));
        }
        if !(self.sensing_power.is_finite() && self.sensing_power > 0.0) {
            return Err(Error::invalid(
                "sensing_power",
                format!("{} is not positive", self.sensing_power),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnr {
    /// Per receive antenna, before symbol division.
    pub snr: f64,
    /// `snr / η`
    pub snr_postdiv: f64,
    /// Path amplitude from the radar equation.
    pub alpha: f64,
}

/// Half-wavelength ULA response with the phase reference at the array
/// centre, so that `bᴴ·∂b/∂θ = 0`.
pub fn steering_vector(n: usize, theta: f64) -> DVector<Complex64> {
    let centre = (n as f64 - 1.0) / 2.0;
    DVector::from_fn(n, |i, _| {
        Complex64::from_polar(1.0, -PI * (i as f64 - centre) * theta.sin())
    })
}

/// Beamforming gain `|aᴴ(θ_T)·a(θ_T + offset)|²`; `N_T²` on boresight.
pub fn beam_gain(n_tx: usize, dod: f64, pointing_offset: f64) -> f64 {
    if pointing_offset == 0.0 {
        return (n_tx * n_tx) as f64;
    }
    let a = steering_vector(n_tx, dod);
    let s = steering_vector(n_tx, dod + pointing_offset);
    a.dotc(&s).norm_sqr()
}

pub fn link_snr(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<LinkSnr> {
    g.validate()?;
    b.validate()?;
    let f = derive_frame(p)?;
    let c = SPEED_OF_LIGHT;
    let alpha2 = p.tx_gain * p.rx_gain * c * c * b.rcs
        / ((4.0 * PI).powi(3) * p.carrier_freq.powi(2) * g.range_tx.powi(2) * g.range_rx.powi(2));
    let p_avg = b.sensing_power / f.k as f64;
    let gamma2 = p_avg * beam_gain(p.n_tx_ant, g.dod_local, g.pointing_offset) / p.n_tx_ant as f64;
    let snr = alpha2 * gamma2 / f.noise_var;
    Ok(LinkSnr {
        snr,
        snr_postdiv: snr / f.eta,
        alpha: alpha2.sqrt(),
    })
}

struct Common {
    k: f64,
    m: f64,
    nr: f64,
    ts: f64,
    df: f64,
    cos2: f64,
    alpha: f64,
    /// K·M·N_R·SNR/η
    pref: f64,
}

fn common(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<Common> {
    if p.n_rx_ant < 2 {
        return Err(Error::InsufficientResources {
            what: "receive antennas N_R",
            value: p.n_rx_ant,
        });
    }
    let f = derive_frame(p)?;
    let s = link_snr(p, g, b)?;
    let (k, m, nr) = (f.k as f64, f.m as f64, p.n_rx_ant as f64);
    Ok(Common {
        k,
        m,
        nr,
        ts: p.symbol_duration,
        df: p.subcarrier_spacing,
        cos2: g.doa_local.cos().powi(2),
        alpha: s.alpha,
        pref: k * m * nr * s.snr_postdiv,
    })
}

/// FIM over `[α, φ, f_D, τ, θ_R]` for time index `m = 0..M−1` and subcarrier
/// index `k = 0..K−1`.
pub fn fim_single_link(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<FisherMatrix> {
    let c = common(p, g, b)?;
    let (k, m, nr, ts, df) = (c.k, c.m, c.nr, c.ts, c.df);
    let mut v = DMatrix::zeros(5, 5);
    v[(0, 0)] = 2.0 / (c.alpha * c.alpha);
    v[(1, 1)] = 2.0;
    v[(1, 2)] = 2.0 * PI * ts * (m - 1.0);
    v[(1, 3)] = -2.0 * PI * df * (k - 1.0);
    v[(2, 2)] = 4.0 * PI * PI * ts * ts * (2.0 * m - 1.0) * (m - 1.0) / 3.0;
    v[(2, 3)] = -2.0 * PI * PI * ts * df * (m - 1.0) * (k - 1.0);
    v[(3, 3)] = 4.0 * PI * PI * df * df * (2.0 * k - 1.0) * (k - 1.0) / 3.0;
    v[(4, 4)] = PI * PI * (nr * nr - 1.0) * c.cos2 / 6.0;
    for i in 0..5 {
        for j in 0..i {
            v[(i, j)] = v[(j, i)];
        }
    }
    Ok(FisherMatrix::from_parts(LINK_PARAMS.to_vec(), v * c.pref))
}

/// Closed-form diagonal of the inverse link FIM, plus the range forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCrlbs {
    pub alpha: f64,
    pub phi: f64,
    /// Hz²
    pub fd: f64,
    /// s²
    pub tau: f64,
    /// rad²
    pub theta: f64,
    /// Monostatic range `r = cτ/2` (m²).
    pub range: f64,
    /// Bistatic range `r̄ = cτ` (m²).
    pub bistatic_range: f64,
}

pub fn scalar_crlbs(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<ScalarCrlbs> {
    let c = common(p, g, b)?;
    let (k, m, nr, ts, df) = (c.k, c.m, c.nr, c.ts, c.df);
    // pref already carries K·M·N_R·SNR/η
    let pi2 = PI * PI;
    let tau = 3.0 / (2.0 * pi2 * df * df * (k * k - 1.0) * c.pref);
    let range = (SPEED_OF_LIGHT / 2.0).powi(2) * tau;
    Ok(ScalarCrlbs {
        alpha: c.alpha * c.alpha / (2.0 * c.pref),
        phi: (7.0 * k * m + k + m - 5.0) / (2.0 * (k + 1.0) * (m + 1.0) * c.pref),
        fd: 3.0 / (2.0 * pi2 * ts * ts * (m * m - 1.0) * c.pref),
        tau,
        theta: 6.0 / (pi2 * (nr * nr - 1.0) * c.cos2 * c.pref),
        range,
        bistatic_range: 4.0 * range,
    })
}

/// EFIM over `[τ, θ_R]`; diagonal.
pub fn efim_delay_angle(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<FisherMatrix> {
    fim_single_link(p, g, b)?.schur_complement(&[3, 4])
}

/// EFIM over `[f_D, τ, θ_R]`; diagonal.
pub fn efim_doppler_delay_angle(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<FisherMatrix> {
    fim_single_link(p, g, b)?.schur_complement(&[2, 3, 4])
}

/// Closed-form diagonal of [`efim_doppler_delay_angle`]: `(d_f, d_τ, d_θ)`.
pub fn efim_diagonal(p: &SystemParams, g: &LinkGeometry, b: &LinkBudget) -> Result<[f64; 3]> {
    let c = common(p, g, b)?;
    let pi2 = PI * PI;
    Ok([
        c.pref * 2.0 * pi2 * c.ts * c.ts * (c.m * c.m - 1.0) / 3.0,
        c.pref * 2.0 * pi2 * c.df * c.df * (c.k * c.k - 1.0) / 3.0,
        c.pref * pi2 * (c.nr * c.nr - 1.0) * c.cos2 / 6.0,
    ])
}
