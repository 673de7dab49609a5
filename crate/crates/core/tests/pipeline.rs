use kinkprobe::{
    build_theta_grid, charfunc_samples, enumerate_oracle, invert_dft, validate_distribution, ModelParams, ObservableSpec,
};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = ModelParams> {
    (2usize..=10, -2.0f64..2.0, -2.0f64..2.0, 0.05f64..2.0, any::<bool>()).prop_map(|(n, j, h, beta, ring)| {
        if ring {
            ModelParams::ring(n, j, h, beta)
        } else {
            ModelParams::long_range(n, j, h, beta)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_matches_enumeration(model in model_strategy(), kinks in any::<bool>()) {
        let n = model.n;
        let obs = if kinks { ObservableSpec::kink_number(n) } else { ObservableSpec::magnetization(n) };
        let grid = build_theta_grid(&obs, n).unwrap();
        let p = invert_dft(&charfunc_samples(&model, &obs, &grid.thetas).unwrap(), &obs, n).unwrap();
        let exact = enumerate_oracle(&model, &obs).unwrap().distribution;
        prop_assert!(p.total_variation(&exact) < 1e-9);
        prop_assert!(validate_distribution(&p).within(1e-9));
    }
}

#[test]
fn oversampled_grid_gives_the_same_distribution() {
    let model = ModelParams::ring(12, 0.8, 0.3, 1.0);
    let obs = ObservableSpec::kink_number(12);
    let base = build_theta_grid(&obs, 12).unwrap();
    let dense = kinkprobe::reconstruct::build_theta_grid_with(&obs, 12, 4 * base.len() + 1).unwrap();
    let a = invert_dft(&charfunc_samples(&model, &obs, &base.thetas).unwrap(), &obs, 12).unwrap();
    let b = invert_dft(&charfunc_samples(&model, &obs, &dense.thetas).unwrap(), &obs, 12).unwrap();
    assert!(a.total_variation(&b) < 1e-12);
}
