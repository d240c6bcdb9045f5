//! Oracle suite behind `isac-bounds validate`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fisher::FisherMatrix;
use crate::geom::{
    bis_observables, bistatic_range_to_distance, jac_bis_position, jac_bis_state, jac_mono_position,
    jac_mono_state, jac_polar_velocity, jac_rotation, mono_observables, LocalObservables,
};
use crate::link::{fim_single_link, scalar_crlbs};
use crate::model::{Node, Role, TargetState, SPEED_OF_LIGHT};
use crate::oracle::{fim_numeric, jacobian_numeric, random_case};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    /// Largest error seen, in the check's own relative measure.
    pub worst: f64,
    pub tolerance: f64,
    /// Cases the check could not evaluate.
    pub failures: usize,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            worst: 0.0,
            tolerance,
            failures: 0,
        }
    }

    fn record(&mut self, r: Result<f64>) {
        self.cases += 1;
        match r {
            Ok(e) if e.is_finite() => self.worst = self.worst.max(e),
            _ => self.failures += 1,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.worst <= self.tolerance
    }
}

/// Entrywise relative error; entries that vanish analytically are measured
/// against the matrix norm.
pub fn fim_error(analytic: &FisherMatrix, numeric: &FisherMatrix) -> f64 {
    let norm = analytic.values().norm();
    let mut worst = 0.0f64;
    for i in 0..analytic.dim() {
        for j in 0..analytic.dim() {
            let (a, n) = (analytic.get(i, j), numeric.get(i, j));
            let e = if a == 0.0 {
                n.abs() / norm
            } else {
                (a - n).abs() / a.abs()
            };
            worst = worst.max(e);
        }
    }
    worst
}

/// Entrywise relative error with a floor of 1e-3 of the row's largest
/// entry, so that rows of very different units are each judged on their
/// own scale.
pub fn jacobian_error(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..analytic.nrows() {
        let row_max = analytic.row(i).amax();
        for j in 0..analytic.ncols() {
            let a = analytic[(i, j)];
            let scale = a.abs().max(1e-3 * row_max);
            let d = (a - numeric[(i, j)]).abs();
            worst = worst.max(if scale == 0.0 { d } else { d / scale });
        }
    }
    worst
}

/// `|A⁻¹_ij − B_ij| / √(A⁻¹_ii A⁻¹_jj)`
fn covariance_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let s = (a[(i, i)] * a[(j, j)]).sqrt();
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / s);
        }
    }
    worst
}

struct Geometry {
    rx: Node,
    tx: Node,
    target: TargetState,
}

/// Receiver with the target inside ±1.3 rad of boresight, a separate
/// transmitter, and a target off the bistatic baseline.
fn random_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    loop {
        let orient = rng.random_range(-PI..PI);
        let rx = Node::new(
            "rx",
            [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)],
            orient,
            Role::Monostatic,
        );
        let r = rng.random_range(5.0..80.0);
        let a = orient + rng.random_range(-1.3..1.3);
        let p = rx.position + r * Vector2::new(a.cos(), a.sin());
        let tx = Node::new(
            "tx",
            [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)],
            0.0,
            Role::Tx,
        );
        let target = TargetState::moving([p.x, p.y], rng.random_range(1.0..40.0), rng.random_range(-PI..PI));
        let rt = (p - tx.position).norm();
        let l = (tx.position - rx.position).norm();
        if rt < 5.0 || l < 1.0 || rt + r - l < 0.05 * (rt + r) {
            continue;
        }
        return Geometry { rx, tx, target };
    }
}

fn state_vec(t: &TargetState) -> [f64; 4] {
    [t.position.x, t.position.y, t.velocity.x, t.velocity.y]
}

fn observables_vec(o: Result<LocalObservables>) -> Vec<f64> {
    match o {
        Ok(o) => vec![o.doppler, o.delay, o.doa],
        Err(_) => vec![f64::NAN; 3],
    }
}

fn jacobian_checks(rng: &mut ChaCha8Rng, draws: usize) -> Vec<Check> {
    const LAM: f64 = SPEED_OF_LIGHT / 28e9;
    let c = SPEED_OF_LIGHT;
    let mut mono_pos = Check::new("jacobian mono position", 1e-6);
    let mut bis_pos = Check::new("jacobian bis position", 1e-6);
    let mut inverse = Check::new("bis inverse product = I", 1e-6);
    let mut rot = Check::new("jacobian rotation", 1e-6);
    let mut mono_state = Check::new("jacobian mono state", 1e-6);
    let mut bis_state = Check::new("jacobian bis state", 1e-6);
    let mut polar = Check::new("jacobian polar velocity", 1e-6);
    for _ in 0..draws {
        let g = random_geometry(rng);
        let rx = &g.rx;
        let tx = &g.tx;
        let t = g.target;

        let pl = jac_rotation(rx.orientation) * (t.position - rx.position);
        mono_pos.record((|| {
            let a = jac_mono_position(&pl)?;
            let n = jacobian_numeric(|x| vec![2.0 * x[0].hypot(x[1]) / c, x[1].atan2(x[0])], &[pl.x, pl.y])?;
            Ok(jacobian_error(&DMatrix::from_iterator(2, 2, a.iter().copied()), &n))
        })());

        let tx_local = jac_rotation(rx.orientation) * (tx.position - rx.position);
        let (mut tx_r, mut rx_r) = (tx.clone(), rx.clone());
        tx_r.role = Role::Tx;
        rx_r.role = Role::Rx { tx: "tx".into() };
        let obs = bis_observables(&tx_r, &rx_r, &t, LAM);
        if let Ok(obs) = obs {
            bis_pos.record((|| {
                let a = jac_bis_position(&obs)?;
                let (l, sh) = (obs.baseline, obs.angle_shift);
                let inv = |x: &[f64]| {
                    let rn = bistatic_range_to_distance(x[0], l, x[1] + sh).unwrap_or(f64::NAN);
                    vec![rn * x[1].cos(), rn * x[1].sin()]
                };
                let n = jacobian_numeric(inv, &[obs.bistatic_range, obs.doa])?;
                // numeric column 0 is per metre of bistatic range
                let a = DMatrix::from_row_slice(2, 2, &[a[(0, 0)] / c, a[(0, 1)], a[(1, 0)] / c, a[(1, 1)]]);
                Ok(jacobian_error(&a, &n))
            })());
            inverse.record((|| {
                let a = jac_bis_position(&obs)?;
                let fwd = |x: &[f64]| {
                    let p = Vector2::new(x[0], x[1]);
                    vec![(p.norm() + (p - tx_local).norm()) / c, x[1].atan2(x[0])]
                };
                let n = jacobian_numeric(fwd, &[pl.x, pl.y])?;
                let a = DMatrix::from_iterator(2, 2, a.iter().copied());
                Ok((a * n - DMatrix::identity(2, 2)).amax())
            })());
            bis_state.record((|| {
                let a = jac_bis_state(&tx_r, &rx_r, &t, LAM)?;
                let f = |x: &[f64]| {
                    observables_vec(bis_observables(&tx_r, &rx_r, &TargetState::new([x[0], x[1]], [x[2], x[3]]), LAM))
                };
                let n = jacobian_numeric(f, &state_vec(&t))?;
                Ok(jacobian_error(&DMatrix::from_iterator(3, 4, a.iter().copied()), &n))
            })());
        } else {
            bis_pos.record(Err(obs.unwrap_err()));
        }

        rot.record((|| {
            let a = jac_rotation(rx.orientation);
            let f = |x: &[f64]| {
                let q = jac_rotation(rx.orientation) * (Vector2::new(x[0], x[1]) - rx.position);
                vec![q.x, q.y]
            };
            let n = jacobian_numeric(f, &[t.position.x, t.position.y])?;
            Ok(jacobian_error(&DMatrix::from_iterator(2, 2, a.iter().copied()), &n))
        })());

        mono_state.record((|| {
            let a = jac_mono_state(rx, &t, LAM)?;
            let f = |x: &[f64]| observables_vec(mono_observables(rx, &TargetState::new([x[0], x[1]], [x[2], x[3]]), LAM));
            let n = jacobian_numeric(f, &state_vec(&t))?;
            Ok(jacobian_error(&DMatrix::from_iterator(3, 4, a.iter().copied()), &n))
        })());

        polar.record((|| {
            let a = jac_polar_velocity(&t.velocity)?;
            let f = |x: &[f64]| vec![x[0] * x[1].cos(), x[0] * x[1].sin()];
            let n = jacobian_numeric(f, &[t.speed(), t.heading()])?;
            Ok(jacobian_error(&DMatrix::from_iterator(2, 2, a.iter().copied()), &n))
        })());
    }
    vec![mono_pos, bis_pos, inverse, rot, mono_state, bis_state, polar]
}

/// Runs every oracle comparison with `draws` random cases per FIM check and
/// `draws / 2` per Jacobian.
pub fn run_suite(seed: u64, draws: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fim = Check::new("fim vs numeric oracle", 1e-5);
    let mut crlb = Check::new("scalar crlbs vs fim inverse", 1e-9);
    let mut efim2 = Check::new("efim [tau,theta] vs inverse block", 1e-9);
    let mut efim3 = Check::new("efim [f_d,tau,theta] vs inverse block", 1e-9);
    for _ in 0..draws {
        let case = match random_case(&mut rng) {
            Ok(c) => c,
            Err(e) => {
                fim.record(Err(e));
                continue;
            }
        };
        let (p, g, b) = (&case.params, &case.link, &case.budget);
        let a = fim_single_link(p, g, b);
        fim.record(a.clone().and_then(|a| Ok(fim_error(&a, &fim_numeric(&case.model)?))));
        let Ok(a) = a else { continue };
        crlb.record((|| {
            let s = scalar_crlbs(p, g, b)?;
            let d = a.crlb()?;
            let closed = [s.alpha, s.phi, s.fd, s.tau, s.theta];
            Ok(closed
                .iter()
                .zip(&d)
                .map(|(x, y)| (x - y).abs() / y.abs())
                .fold(0.0, f64::max))
        })());
        let full = a.inverse();
        for (check, keep) in [(&mut efim2, &[3usize, 4][..]), (&mut efim3, &[2, 3, 4][..])] {
            check.record((|| {
                let inv = full.clone()?;
                let block = DMatrix::from_fn(keep.len(), keep.len(), |i, j| inv[(keep[i], keep[j])]);
                let e = a.schur_complement(keep)?.inverse()?;
                Ok(covariance_error(&block, &e))
            })());
        }
    }
    let mut out = vec![fim, crlb, efim2, efim3];
    out.extend(jacobian_checks(&mut rng, draws.div_ceil(2).max(1)));
    out
}
