//! Library results against values frozen from tests/oracle/derive.py.

use spincat::angular::clebsch_gordan;
use spincat::dynamics::{bare_coupling, hamiltonian, kitten_state, oat_closed_form, CouplingConfig, Propagator};
use spincat::measurement::{magnetization, projection_probs, variance};
use spincat::{basis_state, Direction, SpinOperatorSet, SpinQuantumNumber};
use std::f64::consts::PI;

fn j8() -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(16).unwrap()
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() < tol, "index {k}: {g} vs {w}");
    }
}

#[rustfmt::skip]
const TWIST_0P7: [f64; 17] = [
    0.204765649678088, 0.0, 0.10328359356842018, 0.0, 0.03809840991646771, 0.0, 0.08772186243210839, 0.0, 0.11430548703827924,
    0.0, 0.11777885874251207, 0.0, 0.1107604730814041, 0.0, 0.01132994838412491, 0.0, 0.21195571715859518,
];

#[test]
fn twisted_populations() {
    let j = j8();
    let ops = SpinOperatorSet::new(j);
    let down = basis_state(j, -8.0, Direction::z()).unwrap();
    let numeric = Propagator::new(j, &hamiltonian(&CouplingConfig::twisting(1.0), &ops)).evolve(&down, 0.7);
    for state in [numeric, oat_closed_form(j, 0.7)] {
        let d = projection_probs(&state, Direction::z());
        assert_close(&d.probabilities, &TWIST_0P7, 1e-12);
        assert!((magnetization(&d) - -0.14343908598116117).abs() < 1e-11);
        assert!((variance(&d) - 33.979425229116664).abs() < 1e-10);
    }
}

#[test]
fn tilted_readout_of_twisted_state() {
    #[rustfmt::skip]
    let want = [
        0.0055774662031964, 0.01884035683873329, 0.00680631590623448, 0.01186090039752122, 0.1512152771210492, 0.22654701115691814,
        0.01950181563038958, 0.04922719556727827, 0.09549173225397234, 0.00919090466303693, 0.11305031800077646, 0.0440479916892141,
        0.06716882805848341, 0.09408265427965738, 0.06976941537273741, 0.01673754210625933, 0.00088427475454369,
    ];
    let j = j8();
    let axis = Direction::new(1.1, 0.4).unwrap();
    assert_close(&projection_probs(&oat_closed_form(j, 1.3), axis).probabilities, &want, 1e-12);
}

#[test]
fn kitten_equatorial_distribution() {
    #[rustfmt::skip]
    let want = [
        6.5063012465644424e-09, 4.8817714918005341e-04, 7.8075614958771378e-07, 1.7086200221301896e-02, 1.1841468268747084e-05,
        1.3327236172615550e-01, 5.2102460382486904e-05, 3.4904666166373943e-01, 8.3736097043283009e-05, 3.4904666166373916e-01,
        5.2102460382486952e-05, 1.3327236172615506e-01, 1.1841468268747012e-05, 1.7086200221301907e-02, 7.8075614958772606e-07,
        4.8817714918005558e-04, 6.5063012465642108e-09,
    ];
    assert_close(&projection_probs(&kitten_state(j8()), Direction::equatorial(0.1)).probabilities, &want, 1e-12);
}

#[test]
fn renormalized_coupling_restores_the_kitten_time() {
    let j = j8();
    let detuning = -2.0 * PI * 1.5e9;
    let omega_eff = 2.0 * PI * 1.98e3;
    let wb = bare_coupling(omega_eff, detuning, j).unwrap();
    assert!((wb - 12443.220448756318).abs() < 1e-8 * wb);

    let cfg = CouplingConfig { omega: wb, detuning, include_jx4: true, ..CouplingConfig::twisting(wb) };
    let ops = SpinOperatorSet::new(j);
    let down = basis_state(j, -8.0, Direction::z()).unwrap();
    let psi = Propagator::new(j, &hamiltonian(&cfg, &ops)).evolve(&down, PI / (2.0 * omega_eff));
    let p = projection_probs(&psi, Direction::z()).probabilities;
    assert!((p[0] - 4.9999995995287783e-01).abs() < 1e-9);
    assert!((p[16] - 4.9999995995287688e-01).abs() < 1e-9);
    assert!((p[2] - 3.1237391121695565e-08).abs() < 1e-11);
}

#[test]
fn clebsch_gordan_values() {
    let cases: [((i64, i64, i64, i64, i64, i64), f64); 4] = [
        ((16, 6, 32, -10, 16, -4), -0.37371005158643532),
        ((16, 16, 16, -16, 0, 0), 0.24253562503633297),
        ((17, -1, 2, 2, 15, 1), 0.48507125007266595),
        ((16, -16, 32, 32, 32, 16), 0.011605875734542439),
    ];
    for ((a, b, c, d, e, f), want) in cases {
        let got = clebsch_gordan(a, b, c, d, e, f);
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}
