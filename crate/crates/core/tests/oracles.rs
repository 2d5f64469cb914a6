mod common;

macro_rules! oracle_tests {
    ($($name:ident => $check:expr,)*) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = $check {
                    panic!("{e}");
                }
            }
        )*
    };
}

oracle_tests! {
    exp_map_hand_example => common::exp_map_hand_example(),
    slerp_extrapolation_example => common::slerp_extrapolation_example(),
    rank_weight_example => common::rank_weight_example(),
    tangent_project_example => common::tangent_project_example(),
    decay_at_tau => common::decay_at_tau(),
    sphere_initial_angles => common::sphere_initial_angles(),
    sphere_constant_scores_trace => common::sphere_constant_scores_trace(),
    cholesky_rank_one_oracle => common::cholesky_rank_one_oracle(),
    diagonal_inverse_curvature => common::diagonal_inverse_curvature_check(),
    ga_infinite_temperature_uniform => common::ga_infinite_temperature_uniform(),
    random_search_norm => common::random_search_norm(),
    noise_hand_examples => common::noise_hand_examples(),
    clipped_noise_mean => common::clipped_noise_mean(),
    quadric_hand_example => common::quadric_hand_example(),
    noise_only_moments => common::noise_only_moments(),
    loopback_budget => common::loopback_budget(),
    expvar_values => common::expvar_values(),
    cov_metrics_hand_example => common::cov_metrics_hand_example(),
    random_walk_slope => common::random_walk_slope(),
    high_dimensional_angles => common::high_dimensional_angles(),
    isotropic_alignment_null => common::isotropic_alignment_null(),
    lissajous_open_arc => common::lissajous_open_arc(),
    welch_textbook => common::welch_textbook(),
    exp_map_norm_property => common::exp_map_norm_property(common::PROPERTY_CASES),
    slerp_properties => common::slerp_properties(common::PROPERTY_CASES),
    tangent_project_property => common::tangent_project_property(common::PROPERTY_CASES),
}
