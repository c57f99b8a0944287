use sobolev_lab::cutoff::{global_perturbation, random_sphere_direction, slice_cutoff, BumpProfile};
use sobolev_lab::harness::{run_suite, ExperimentConfig, Suite};
use sobolev_lab::sphere::{
    constant_section, equivariant_extension, sample_near_identity, slice_projection, standard_center, SliceSpec,
    DEFAULT_CHART_N,
};
use sobolev_lab::SobolevIndex;

#[test]
fn projection_recovers_the_reparametrization_and_is_idempotent() {
    let f = standard_center(DEFAULT_CHART_N).unwrap();
    let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
    for seed in 0..3 {
        let g = sample_near_identity(seed, 0.05);
        let k = f.compose_mobius(&g).unwrap();
        let proj = slice_projection(&k, &spec).unwrap();
        assert!(proj.gamma_inv.distance(&g.inverse()) <= 1e-8);
        assert!(spec.slice_residual(&proj.projected) <= 1e-9);
        let again = slice_projection(&proj.projected, &spec).unwrap();
        assert!(again.gamma_inv.distance_to_identity() <= 1e-10);
        assert!(again.projected.max_abs_diff(&proj.projected).unwrap() <= 1e-10);
    }
}

#[test]
fn identity_round_trip_has_zero_residual_rows() {
    let cfg = ExperimentConfig { mobius_scale: 0.0, samples: 2, ..ExperimentConfig::for_suite(Suite::SliceRoundtrip) };
    let out = run_suite(&cfg).unwrap();
    assert_eq!(out.rows.len(), 10);
    for row in &out.rows {
        assert!(row.pass);
        if row.metric != "newton-iterations" {
            assert_eq!(row.value, 0.0, "{}", row.metric);
        }
    }
}

#[test]
fn extension_and_cutoff_are_orbit_compatible() {
    let n = DEFAULT_CHART_N;
    let f = standard_center(n).unwrap();
    let spec = SliceSpec::transverse_normal(f.clone()).unwrap();
    let idx = SobolevIndex::new(2, 4.0).unwrap();
    let section = constant_section(random_sphere_direction(n, 4, 17).unwrap(), 1, &idx).unwrap();
    let k = f.axpy(0.01, &random_sphere_direction(n, 4, 3).unwrap()).unwrap();
    let g = sample_near_identity(8, 0.05);
    let kg = k.compose_mobius(&g).unwrap();
    let lhs = equivariant_extension(&section, &spec, &kg).unwrap();
    let rhs = equivariant_extension(&section, &spec, &k).unwrap().compose_mobius(&g).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-6);
    let chi = BumpProfile::new(1e-6, 1.0).unwrap();
    let (b0, b1) = (slice_cutoff(&k, &spec, &chi, &idx).unwrap(), slice_cutoff(&kg, &spec, &chi, &idx).unwrap());
    assert!((b0 - b1).abs() <= 1e-8);
    let p0 = global_perturbation(&k, &spec, &section, &chi, &idx).unwrap();
    let p1 = global_perturbation(&kg, &spec, &section, &chi, &idx).unwrap();
    assert!(p1.max_abs_diff(&p0.compose_mobius(&g).unwrap()).unwrap() <= 1e-6);
}
