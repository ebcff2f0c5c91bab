//! Faà di Bruno sampling of superpositions and the operator experiments.

use zygmund::corpus::AnalyticFn;
use zygmund::faa_di_bruno::compose_all;
use zygmund::superposition::{
    classify_superposition, lipschitz_ratio_test, superpose, translation_curve_norm, SuperpositionExperiment,
};

fn f(text: &str) -> AnalyticFn {
    text.parse().unwrap()
}

#[test]
fn identity_outer_function_returns_the_inner_samples() {
    let id = f("poly:0,1");
    let g = f("sin");
    let s = superpose(&id, &g, (-1.0, 1.0), 101, 3).unwrap();
    for i in 0..101 {
        let x = -1.0 + i as f64 * 0.02;
        assert!((s.values[i] - x.sin()).abs() < 1e-15);
        assert!((s.derivatives[0][i] - x.cos()).abs() < 1e-15);
        assert!((s.derivatives[2][i] + x.cos()).abs() < 1e-15);
    }
}

#[test]
fn square_of_sine_has_the_closed_form_second_derivative() {
    let s = superpose(&f("poly:0,0,1"), &f("sin"), (-1.0, 1.0), 201, 2).unwrap();
    for i in 0..201 {
        let x = s.x(i);
        assert!((s.derivatives[1][i] - 2.0 * (2.0 * x).cos()).abs() < 1e-13, "at {x}");
    }
}

#[test]
fn expansion_matches_centered_differences_up_to_order_four() {
    // Each derivative order is compared with the centered difference of the
    // order below it, h = 1e-4, on a three-point grid around x.
    let h = 1e-4;
    for (outer, inner) in [("exp", "poly:0.1,-0.5,0.3,0.2"), ("sin", "exp"), ("cos", "poly:0,1,1")] {
        for x in [-0.6, 0.0, 0.35] {
            let s = superpose(&f(outer), &f(inner), (x - h, x + h), 3, 4).unwrap();
            for j in 1..=4 {
                let lower = if j == 1 { &s.values } else { &s.derivatives[j - 2] };
                let fd = (lower[2] - lower[0]) / (2.0 * h);
                let exact = s.derivatives[j - 1][1];
                assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "{outer}∘{inner} order {j} at {x}: {exact} vs {fd}");
            }
        }
    }
}

#[test]
fn compose_all_matches_hand_expansion() {
    // (f∘g)''' = f'''g'^3 + 3f''g'g'' + f'g'''
    let outer = [0.0, 2.0, -1.0, 0.5];
    let inner = [0.0, 1.5, 0.25, -2.0];
    let d = compose_all(&outer, &inner, 3);
    let want = 0.5 * 1.5f64.powi(3) - 3.0 * 1.5 * 0.25 - 2.0 * 2.0;
    assert!((d[3] - want).abs() < 1e-14);
}

#[test]
fn translation_norm_of_sine_is_stable_under_refinement() {
    let (outer, inner) = (f("sin"), f("cutoff:r=1"));
    let coarse = translation_curve_norm(&outer, &inner, 1, 0.0, (-2.5, 2.5), 4097).unwrap();
    let fine = translation_curve_norm(&outer, &inner, 1, 0.0, (-2.5, 2.5), 8193).unwrap();
    assert!((coarse - fine).abs() / fine < 0.02, "{coarse} vs {fine}");
    let shifted = translation_curve_norm(&f("power_abs:alpha=0.5,p=2"), &inner, 1, 0.125, (-2.5, 2.5), 4097).unwrap();
    assert!(shifted.is_finite());
}

#[test]
fn low_degree_polynomials_have_vanishing_mixed_statistic() {
    let r = lipschitz_ratio_test(&SuperpositionExperiment::new("poly:1,2,-1", 1, 1)).unwrap();
    assert!(r.mixed.rows.iter().all(|row| row.statistic.abs() < 1e-9));
    assert!(r.lipschitz_compatible);
}

#[test]
fn cusp_outer_function_breaks_the_lipschitz_property() {
    let exp = SuperpositionExperiment::new("power_abs:alpha=0.5,p=2", 1, 1);
    let r = lipschitz_ratio_test(&exp).unwrap();
    let g = r.mixed.growth.unwrap();
    assert!((g - 0.5).abs() <= 0.1, "{g}");
    assert!(!r.lipschitz_compatible);
}

#[test]
fn predicted_and_measured_verdicts_agree() {
    let v = classify_superposition(&SuperpositionExperiment::new("exp", 1, 1)).unwrap();
    assert!(v.predicted && v.measured && v.agreement);
}

#[test]
fn experiments_validate_their_parameters() {
    let mut exp = SuperpositionExperiment::new("sin", 0, 1);
    assert!(exp.validate().is_err());
    exp.m = 1;
    exp.scales = vec![0.25, 0.125];
    assert!(exp.validate().is_err());
    exp.scales = vec![0.3, 0.125, 0.0625];
    assert!(exp.validate().is_err());
}
