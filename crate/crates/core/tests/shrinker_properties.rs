//! Randomized properties of the spectral maps and optimal shrinkers.

use eigenshrink::shrinker::{
    asymptotic_loss, block_loss, hard_threshold, ppi, shrink, HardThreshold, Optimal, ShrinkerMethod, SpikedModel,
};
use eigenshrink::spectral::{bulk_edge_upper, ell_of_lambda, lambda_of_ell, phase_transition};
use eigenshrink::{AspectRatio, LossId, SpikeGeometry};
use proptest::prelude::*;

fn aspect() -> impl Strategy<Value = AspectRatio> {
    (0.01f64..=1.0).prop_map(|g| AspectRatio::new(g).unwrap())
}

/// A supercritical spike and its aspect ratio.
fn spike() -> impl Strategy<Value = (f64, AspectRatio)> {
    (aspect(), 1e-3f64..1.0, 0.0f64..3.0).prop_map(|(g, a, b)| (phase_transition(g) + a * 10f64.powf(b), g))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn spike_maps_are_inverse((ell, g) in spike()) {
        let lambda = lambda_of_ell(ell, g).unwrap();
        prop_assert!(lambda > bulk_edge_upper(g));
        prop_assert!(close(ell_of_lambda(lambda, g).unwrap(), ell, 1e-9));
        let geo = SpikeGeometry::from_ell(ell, g).unwrap();
        prop_assert!((geo.c2 + geo.s2 - 1.0).abs() < 1e-12);
        prop_assert!(geo.c2 > 0.0 && geo.c2 < 1.0);
    }

    #[test]
    fn bulk_collapse_is_exact(g in aspect(), t in 0.0f64..=1.0) {
        let lambda = t * bulk_edge_upper(g);
        for loss in LossId::all() {
            let r = shrink(lambda, g, loss, ShrinkerMethod::Auto).unwrap();
            prop_assert!(r.in_bulk);
            prop_assert_eq!(r.eta, 1.0);
        }
        prop_assert_eq!(hard_threshold(lambda, g), 1.0);
    }

    /// Frobenius, Stein and operator optima written out independently.
    #[test]
    fn textbook_shrinkers((ell, g) in spike()) {
        let lambda = lambda_of_ell(ell, g).unwrap();
        let geo = SpikeGeometry::from_ell(ell, g).unwrap();
        let eta = |s: &str| shrink(lambda, g, s.parse().unwrap(), ShrinkerMethod::Auto).unwrap().eta;
        prop_assert!(close(eta("F,1"), ell * geo.c2 + geo.s2, 1e-9));
        prop_assert!(close(eta("st"), ell / (geo.c2 + ell * geo.s2), 1e-9));
        prop_assert!(close(eta("O,1"), ell, 1e-9));
    }

    #[test]
    fn optimum_beats_alternatives((ell, g) in spike()) {
        let geo = SpikeGeometry::from_ell(ell, g).unwrap();
        for loss in LossId::all() {
            let eta = shrink(geo.lambda, g, loss, ShrinkerMethod::Auto).unwrap().eta;
            prop_assert!(eta >= 1.0);
            let best = block_loss(loss, &geo, eta).unwrap();
            let slack = 1e-9 * best.abs().max(1e-3);
            for other in [1.0, geo.lambda, ell, eta * 1.001, (eta * 0.999).max(1.0)] {
                let v = block_loss(loss, &geo, other).unwrap();
                prop_assert!(best <= v + slack, "{}: L({}) = {} > L({}) = {}", loss, eta, best, other, v);
            }
        }
    }

    #[test]
    fn optimal_asymptotic_loss_is_below_hard_thresholding((ell, g) in spike(), frac in 0.1f64..0.9) {
        let second = 1.0 + frac * (ell - 1.0);
        let spikes = if second > phase_transition(g) * 1.001 { vec![ell, second] } else { vec![ell] };
        let model = SpikedModel::new(g, spikes).unwrap();
        for loss in LossId::all() {
            let opt = asymptotic_loss(&model, loss, &Optimal::new(g, loss)).unwrap();
            let hard = asymptotic_loss(&model, loss, &HardThreshold { gamma: g }).unwrap();
            prop_assert!(opt >= 0.0 && opt <= hard * (1.0 + 1e-9) + 1e-12, "{}: {} vs {}", loss, opt, hard);
        }
    }

    #[test]
    fn ppi_is_a_percentage((ell, g) in spike()) {
        for loss in LossId::all() {
            let v = ppi(loss, ell, g).unwrap();
            prop_assert!((0.0..=100.0).contains(&v), "{}: {}", loss, v);
        }
    }
}

#[test]
fn frobenius_limit_loss_matches_the_geometry() {
    let g = AspectRatio::new(0.5).unwrap();
    let f1: LossId = "F,1".parse().unwrap();
    for ell in [2.0, 5.0, 30.0] {
        let c2 = SpikeGeometry::from_ell(ell, g).unwrap().c2;
        let model = SpikedModel::new(g, vec![ell]).unwrap();
        let got = asymptotic_loss(&model, f1, &Optimal::new(g, f1)).unwrap();
        let want = (ell - 1.0).powi(2) * (1.0 - c2 * c2);
        assert!(close(got, want, 1e-12), "{ell}: {got} vs {want}");
    }
}
