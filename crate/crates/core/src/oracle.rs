//! Numerical ground truth for the closed forms: the Gaussian FIM of the
//! noiseless processed samples by central differences, and a generic
//! central-difference Jacobian.
//!
//! Nothing here reuses the analytic code paths of `link` or `geom`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fisher::{FisherMatrix, LINK_PARAMS};
use crate::link::{LinkBudget, LinkGeometry};
use crate::model::{derive_frame, SystemParams, SPEED_OF_LIGHT};

/// Noiseless received samples after symbol division, for one link.
#[derive(Debug, Clone)]
pub struct MeanSignalModel {
    pub params: SystemParams,
    pub link: LinkGeometry,
    /// `[α, φ, f_D, τ, θ_R]`
    pub theta: [f64; 5],
    /// W radiated by the transmitter over the K sensing subcarriers.
    pub sensing_power: f64,
    k: usize,
    m: usize,
    gamma: Complex64,
    noise_var_postdiv: f64,
}

/// ULA response, element phases centred on the array midpoint.
pub fn ula(n: usize, theta: f64) -> DVector<Complex64> {
    let mid = 0.5 * (n as f64 - 1.0);
    DVector::from_iterator(
        n,
        (0..n).map(|i| Complex64::cis(-PI * (i as f64 - mid) * theta.sin())),
    )
}

/// Element-wise derivative of [`ula`] with respect to `theta`.
pub fn ula_derivative(n: usize, theta: f64) -> DVector<Complex64> {
    let mid = 0.5 * (n as f64 - 1.0);
    let a = ula(n, theta);
    DVector::from_iterator(
        n,
        a.iter().enumerate().map(|(i, x)| {
            *x * Complex64::new(0.0, -PI * (i as f64 - mid) * theta.cos())
        }),
    )
}

impl MeanSignalModel {
    /// Builds the model with α from the radar equation and the given
    /// Doppler, delay and nuisance phase.
    pub fn new(
        params: SystemParams,
        link: LinkGeometry,
        rcs: f64,
        sensing_power: f64,
        phase: f64,
        doppler: f64,
        delay: f64,
    ) -> Result<Self> {
        let f = derive_frame(&params)?;
        if !(link.range_tx > 0.0 && link.range_rx > 0.0) {
            return Err(Error::OracleDomain("non-positive range".into()));
        }
        let c = SPEED_OF_LIGHT;
        let num = params.tx_gain * params.rx_gain * rcs * c * c;
        let den = 64.0 * PI.powi(3)
            * (params.carrier_freq * link.range_tx * link.range_rx).powi(2);
        let alpha = (num / den).sqrt();
        let nt = params.n_tx_ant;
        let p_avg = sensing_power / f.k as f64;
        let w = ula(nt, link.dod_local + link.pointing_offset) * Complex64::from((p_avg / nt as f64).sqrt());
        let gamma = ula(nt, link.dod_local).dotc(&w);
        Ok(Self {
            theta: [alpha, phase, doppler, delay, link.doa_local],
            params,
            link,
            sensing_power,
            k: f.k,
            m: f.m,
            gamma,
            noise_var_postdiv: f.noise_var_postdiv,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn symbols(&self) -> usize {
        self.m
    }

    /// γ = aᴴ(θ_T)·w_T
    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn noise_var_postdiv(&self) -> f64 {
        self.noise_var_postdiv
    }

    fn sample(&self, th: &[f64; 5], k: usize, m: usize) -> DVector<Complex64> {
        let [alpha, phi, fd, tau, doa] = *th;
        let ph = phi + 2.0 * PI * m as f64 * self.params.symbol_duration * fd
            - 2.0 * PI * k as f64 * self.params.subcarrier_spacing * tau;
        ula(self.params.n_rx_ant, doa) * (Complex64::from_polar(alpha, ph) * self.gamma)
    }

    /// Samples on subcarrier `k` of symbol `m_idx` across the receive array.
    pub fn mean_signal(&self, k: usize, m_idx: usize) -> DVector<Complex64> {
        self.sample(&self.theta, k, m_idx)
    }

    fn steps(&self) -> [f64; 5] {
        let floors = [f64::MIN_POSITIVE, 1e-8, 1e-3, 1e-12, 1e-8];
        let mut h = [0.0; 5];
        for i in 0..5 {
            h[i] = (1e-6 * self.theta[i].abs()).max(floors[i]);
        }
        h
    }
}

/// `(2/σ̃²)·Σ_{k,m} Re{∂μᴴ/∂θ_i · ∂μ/∂θ_j}` with central differences.
pub fn fim_numeric(model: &MeanSignalModel) -> Result<FisherMatrix> {
    let h = model.steps();
    for (i, &hi) in h.iter().enumerate() {
        if model.theta[i] + hi == model.theta[i] {
            return Err(Error::OracleDomain(format!(
                "step {hi} underflows parameter {}",
                LINK_PARAMS[i]
            )));
        }
    }
    let mut acc = DMatrix::<f64>::zeros(5, 5);
    let mut d: Vec<DVector<Complex64>> = Vec::with_capacity(5);
    for k in 0..model.k {
        for m in 0..model.m {
            d.clear();
            for i in 0..5 {
                let mut up = model.theta;
                let mut dn = model.theta;
                up[i] += h[i];
                dn[i] -= h[i];
                let diff = model.sample(&up, k, m) - model.sample(&dn, k, m);
                d.push(diff / Complex64::from(up[i] - dn[i]));
            }
            for i in 0..5 {
                for j in i..5 {
                    acc[(i, j)] += d[i].dotc(&d[j]).re;
                }
            }
        }
    }
    for i in 0..5 {
        for j in 0..i {
            acc[(i, j)] = acc[(j, i)];
        }
    }
    for v in acc.iter() {
        if !v.is_finite() {
            return Err(Error::OracleDomain("non-finite information".into()));
        }
    }
    FisherMatrix::new(LINK_PARAMS.to_vec(), acc * (2.0 / model.noise_var_postdiv))
}

/// Central-difference Jacobian of `f` at `x`, one row per output. The step
/// for coordinate `i` is `max(1e−6, 1e−6·|x_i|)`, rounded up to a power of
/// two so that `x_i ± h` is exact for short-mantissa inputs.
pub fn jacobian_numeric<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let f0 = f(x);
    if f0.iter().any(|v| !v.is_finite()) {
        return Err(Error::OracleDomain("non-finite value at base point".into()));
    }
    let mut j = DMatrix::zeros(f0.len(), x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = (1e-6 * x[i].abs()).max(1e-6).log2().ceil().exp2();
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let dn = f(&xp);
        xp[i] = x[i];
        if up.len() != f0.len() || dn.len() != f0.len() {
            return Err(Error::OracleDomain("output dimension changed".into()));
        }
        let span = (x[i] + h) - (x[i] - h);
        for r in 0..f0.len() {
            let v = (up[r] - dn[r]) / span;
            if !v.is_finite() {
                return Err(Error::OracleDomain(format!(
                    "non-finite derivative of output {r} along input {i}"
                )));
            }
            j[(r, i)] = v;
        }
    }
    Ok(j)
}

/// One randomized link for oracle comparisons.
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub params: SystemParams,
    pub link: LinkGeometry,
    pub budget: LinkBudget,
    pub model: MeanSignalModel,
}

/// Draws small frames (so the oracle stays cheap), monostatic or bistatic
/// geometry with DoA/DoD inside ±1.4 rad, and occasional pointing offsets.
pub fn random_case<R: Rng>(rng: &mut R) -> Result<OracleCase> {
    let params = SystemParams {
        n_tx_ant: rng.random_range(2..10),
        n_rx_ant: rng.random_range(2..10),
        active_subcarriers: rng.random_range(8..40),
        symbols_per_frame: rng.random_range(8..30),
        frac_subcarriers: rng.random_range(0.3..1.0),
        frac_symbols: rng.random_range(0.3..1.0),
        subcarrier_spacing: rng.random_range(30e3..240e3),
        symbol_duration: rng.random_range(4e-6..40e-6),
        carrier_freq: rng.random_range(3e9..60e9),
        ..SystemParams::table_one()
    };
    let link = if rng.random_bool(0.5) {
        LinkGeometry::monostatic(rng.random_range(5.0..150.0), rng.random_range(-1.4..1.4))
    } else {
        LinkGeometry::bistatic(
            rng.random_range(5.0..150.0),
            rng.random_range(5.0..150.0),
            rng.random_range(-1.4..1.4),
            rng.random_range(-1.4..1.4),
        )
    };
    let offset = if rng.random_bool(0.3) {
        rng.random_range(-0.1..0.1)
    } else {
        0.0
    };
    let link = link.with_pointing_offset(offset);
    let budget = LinkBudget::with_power(rng.random_range(0.1..10.0), rng.random_range(1e-3..1.0));
    let model = MeanSignalModel::new(
        params.clone(),
        link,
        budget.rcs,
        budget.sensing_power,
        rng.random_range(-3.0..3.0),
        rng.random_range(-5e3..5e3),
        rng.random_range(1e-8..1e-6),
    )?;
    Ok(OracleCase {
        params,
        link,
        budget,
        model,
    })
}
