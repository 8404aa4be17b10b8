use chromashape::catalog::{derive_representatives, load_default_pools, GridSpec, DEFAULT_MARK_PX, DEFAULT_POOL_SIZE};
use chromashape::colorlab::{jnd_discriminable, JndParams};
use itertools::Itertools;

#[test]
fn seed_2025_keeps_about_37_colors() {
    let params = JndParams::default();
    let d = derive_representatives(&GridSpec::default(), 200, 2025, DEFAULT_MARK_PX, &params).unwrap();
    assert_eq!(d.grid_samples, 38_283);
    assert_eq!(d.centroids.len(), 200);
    let n = d.representatives.len();
    assert!((34..=40).contains(&n), "{n} representatives");
    for (a, b) in d.representatives.iter().tuple_combinations() {
        assert!(jnd_discriminable(*a, *b, DEFAULT_MARK_PX, &params).unwrap());
    }
}

#[test]
fn bundled_pool_validates() {
    let (pool, catalog) = load_default_pools().unwrap();
    pool.validate(DEFAULT_POOL_SIZE, DEFAULT_MARK_PX, &JndParams::default()).unwrap();
    catalog.validate(DEFAULT_POOL_SIZE).unwrap();
    assert_eq!(pool.entries().iter().filter(|e| e.manual).count(), 2);
}
