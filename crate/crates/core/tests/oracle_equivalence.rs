use isac_bounds::link::{efim_delay_angle, efim_doppler_delay_angle, fim_single_link, scalar_crlbs, LinkBudget, LinkGeometry};
use isac_bounds::oracle::{fim_numeric, MeanSignalModel};
use isac_bounds::SystemParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (SystemParams, LinkGeometry, LinkBudget, MeanSignalModel) {
    let p = SystemParams {
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
    let g = if rng.random_bool(0.5) {
        LinkGeometry::monostatic(rng.random_range(5.0..150.0), rng.random_range(-1.4..1.4))
    } else {
        LinkGeometry::bistatic(
            rng.random_range(5.0..150.0),
            rng.random_range(5.0..150.0),
            rng.random_range(-1.4..1.4),
            rng.random_range(-1.4..1.4),
        )
    }
    .with_pointing_offset(if rng.random_bool(0.3) { rng.random_range(-0.1..0.1) } else { 0.0 });
    let b = LinkBudget::with_power(rng.random_range(0.1..10.0), rng.random_range(1e-3..1.0));
    let m = MeanSignalModel::new(
        p.clone(),
        g,
        b.rcs,
        b.sensing_power,
        rng.random_range(-3.0..3.0),
        rng.random_range(-5e3..5e3),
        rng.random_range(1e-8..1e-6),
    )
    .unwrap();
    (p, g, b, m)
}

#[test]
fn analytic_fim_matches_numeric_fim() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let (p, g, b, m) = random_case(&mut rng);
        let a = fim_single_link(&p, &g, &b).unwrap();
        let n = fim_numeric(&m).unwrap();
        let norm = a.values().norm();
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = (a.get(i, j), n.get(i, j));
                if x == 0.0 {
                    assert!(y.abs() <= 1e-5 * norm, "case {case} ({i},{j}) zero entry {y}");
                } else {
                    assert!((x - y).abs() <= 1e-5 * x.abs(), "case {case} ({i},{j}): {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn efims_match_oracle_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let (p, g, b, m) = random_case(&mut rng);
        let n = fim_numeric(&m).unwrap();
        for (keep, e) in [
            (vec![3, 4], efim_delay_angle(&p, &g, &b).unwrap()),
            (vec![2, 3, 4], efim_doppler_delay_angle(&p, &g, &b).unwrap()),
        ] {
            let o = n.schur_complement(&keep).unwrap();
            for i in 0..keep.len() {
                let x = e.get(i, i);
                assert!((x - o.get(i, i)).abs() <= 1e-6 * x, "{x} vs {}", o.get(i, i));
            }
        }
    }
}

#[test]
fn crlbs_match_numeric_inverse_of_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let (p, g, b, m) = random_case(&mut rng);
        let d = fim_numeric(&m).unwrap().crlb().unwrap();
        let s = scalar_crlbs(&p, &g, &b).unwrap();
        for (x, y) in [s.alpha, s.phi, s.fd, s.tau, s.theta].iter().zip(&d) {
            assert!((x - y).abs() <= 1e-5 * x, "{x} vs {y}");
        }
    }
}
