use imcf_core::chart::{inverse_map, jet, map_point, slice_sphere};
use imcf_core::flow::{step, FlowState};
use imcf_core::geometry::{geometry_field, sample};
use imcf_core::initial_data::{perturbed_cap, validate};
use imcf_core::{ChartPoint, Mode, TimeStepPolicy};
use proptest::prelude::*;

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn disk_point() -> impl Strategy<Value = [f64; 2]> {
    (0.0..0.999f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| [r * th.cos(), r * th.sin()])
}

proptest! {
    #[test]
    fn chart_is_conformal(x in disk_point(), lambda in 1.0..8.0f64) {
        let j = jet(&ChartPoint::new(x, lambda).unwrap(), 1);
        let cols = [j.d_lambda, j.d_x[0], j.d_x[1]];
        let scale = dot(&cols[1], &cols[1]).max(1.0);
        for a in 0..3 {
            for b in a + 1..3 {
                prop_assert!(dot(&cols[a], &cols[b]).abs() <= 1e-10 * scale);
            }
        }
        prop_assert!((dot(&cols[1], &cols[1]) - dot(&cols[2], &cols[2])).abs() <= 1e-10 * scale);
    }

    #[test]
    fn slices_lie_on_their_spheres(x in disk_point(), lambda in 1.01..8.0f64) {
        let p = map_point(&ChartPoint::new(x, lambda).unwrap());
        let s = slice_sphere(lambda).unwrap();
        let d = [p[0] - s.center_height, p[1], p[2]];
        prop_assert!((dot(&d, &d).sqrt() - s.radius).abs() <= 1e-12 * s.radius.max(1.0));
        prop_assert!(dot(&p, &p) <= 1.0 + 1e-12);
    }

    #[test]
    fn inverse_recovers_the_chart_point(x in disk_point(), lambda in 1.0..6.0f64) {
        prop_assume!(x[0].hypot(x[1]) > 1e-3 || lambda > 1.001);
        let p = ChartPoint::new(x, lambda).unwrap();
        let q = inverse_map(&map_point(&p)).unwrap();
        prop_assert!((q.lambda - lambda).abs() <= 1e-8 * lambda);
        prop_assert!((q.x[0] - x[0]).abs() <= 1e-8 && (q.x[1] - x[1]).abs() <= 1e-8);
    }

    #[test]
    fn kernel_trace_is_mean_curvature(
        x in disk_point(),
        lambda in 1.2..4.0f64,
        du in prop::array::uniform2(-0.3..0.3f64),
        d in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let d2u = [[d[0], d[1]], [d[1], d[2]]];
        let s = sample(2, x, lambda, du, d2u).unwrap();
        prop_assert!((s.kappa[0] + s.kappa[1] - s.mean_curvature).abs() <= 1e-9 * (1.0 + s.mean_curvature.abs()));
        prop_assert!(s.kappa[0] <= s.kappa[1]);
        prop_assert!(s.graph_condition < 0.0);
        prop_assert!((dot(&s.normal, &s.normal) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn admissible_perturbed_caps_decrease(lambda0 in 1.6..4.0f64, amp in -0.15..0.15f64) {
        let u = perturbed_cap(lambda0, amp, Mode::Axisymmetric, 101);
        prop_assume!(u.is_ok());
        let u = u.unwrap();
        prop_assert!(validate(&u).pass);
        let field = geometry_field(&u).unwrap();
        prop_assert!(field.iter().all(|s| s.mean_curvature > 0.0));
        let next = step(&FlowState::new(u.clone()), &TimeStepPolicy::default()).unwrap();
        for (a, b) in u.values().iter().zip(next.u.values()) {
            prop_assert!(b < a && *b >= 1.0);
        }
    }
}
