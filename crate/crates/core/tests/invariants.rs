//! Cross-cutting geometric and analytic invariants, checked at random
//! sample points across every built-in family.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlayers_core::forms::{
    eval_forms, GeodesicCutoff, QuadratureGrid, SurfaceFactor, TransverseProfile,
};
use qlayers_core::layer::layer_metric_at;
use qlayers_core::surface::Surface;
use qlayers_core::{LayerConfig, LayerField};

fn families() -> Vec<Surface<f64>> {
    vec![
        Surface::plane(),
        Surface::hyperboloid(1.0, 1.0),
        Surface::hyperboloid(2.0, 1.0),
        Surface::gaussian_bump(0.8, 1.2),
        Surface::flattened_paraboloid(1.0, 1.0),
    ]
}

fn random_point(rng: &mut impl Rng) -> (f64, f64) {
    // log-uniform radius so both the curved core and the flat end get hit
    let r = 10f64.powf(rng.gen_range(-1.0..1.5));
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    (r * th.cos(), r * th.sin())
}

/// dN(X) = -S X with S = g^-1 b (the shape operator), checked against a
/// finite difference of the unit normal at 100 random points per family.
#[test]
fn weingarten_map_matches_normal_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in families() {
        for _ in 0..100 {
            let (u, v) = random_point(&mut rng);
            let smp = s.sample(u, v).unwrap();
            let h = 1e-5 * (1.0 + u.abs().max(v.abs()));
            let np = s.sample(u + h, v).unwrap().normal;
            let nm = s.sample(u - h, v).unwrap().normal;
            let n_u = [
                (np[0] - nm[0]) / (2.0 * h),
                (np[1] - nm[1]) / (2.0 * h),
                (np[2] - nm[2]) / (2.0 * h),
            ];
            // S columns in the coordinate basis: S = g^-1 b
            let det = smp.g.xx * smp.g.yy - smp.g.xy * smp.g.xy;
            let s11 = (smp.g.yy * smp.b.xx - smp.g.xy * smp.b.xy) / det;
            let s21 = (smp.g.xx * smp.b.xy - smp.g.xy * smp.b.xx) / det;
            let jet = s.parametrization().jet(u, v);
            let scale = smp.norm_b.max(1e-3);
            for k in 0..3 {
                let expect = -(s11 * jet.p_u[k] + s21 * jet.p_v[k]);
                assert!(
                    (n_u[k] - expect).abs() < 1e-6_f64.max(1e-4 * scale),
                    "dN/du component {k} at ({u},{v}): {} vs {expect}",
                    n_u[k]
                );
            }
        }
    }
}

/// K = det b / det g and H = tr(g^-1 b), both to near machine precision.
#[test]
fn gauss_and_mean_from_fundamental_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for s in families() {
        for _ in 0..100 {
            let (u, v) = random_point(&mut rng);
            let smp = s.sample(u, v).unwrap();
            let det_b = smp.b.xx * smp.b.yy - smp.b.xy * smp.b.xy;
            let det_g = smp.g.xx * smp.g.yy - smp.g.xy * smp.g.xy;
            let k = det_b / det_g;
            let h = (smp.g.yy * smp.b.xx - 2.0 * smp.g.xy * smp.b.xy + smp.g.xx * smp.b.yy)
                / det_g;
            let scale = 1.0 + smp.norm_b * smp.norm_b;
            assert!((k - smp.gauss).abs() <= 1e-10 * scale, "K: {k} vs {}", smp.gauss);
            assert!((h - smp.mean).abs() <= 1e-10 * scale, "H: {h} vs {}", smp.mean);
        }
    }
}

/// Laplace-Beltrami of the height function equals H n_z (finite-difference
/// check of the identity behind the curve construction).
#[test]
fn height_laplacian_is_mean_curvature_times_nz() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for s in families() {
        for _ in 0..40 {
            let (u, v) = random_point(&mut rng);
            let smp = s.sample(u, v).unwrap();
            let h = 1e-3;
            // Delta z = (1/sqrt g) d_i (sqrt g g^{ij} d_j z), centered stencils
            let flux = |u0: f64, v0: f64, du: f64, dv: f64| -> f64 {
                let m = s.sample(u0, v0).unwrap();
                let det = (m.g.xx * m.g.yy - m.g.xy * m.g.xy).sqrt();
                let gixx = m.g.yy / (det * det);
                let gixy = -m.g.xy / (det * det);
                let giyy = m.g.xx / (det * det);
                let zp = s.sample(u0 + h * 0.5, v0).unwrap().point[2];
                let zm = s.sample(u0 - h * 0.5, v0).unwrap().point[2];
                let z_u = (zp - zm) / h;
                let zp = s.sample(u0, v0 + h * 0.5).unwrap().point[2];
                let zm = s.sample(u0, v0 - h * 0.5).unwrap().point[2];
                let z_v = (zp - zm) / h;
                det * (du * (gixx * z_u + gixy * z_v) + dv * (gixy * z_u + giyy * z_v))
            };
            let div = (flux(u + h * 0.5, v, 1.0, 0.0) - flux(u - h * 0.5, v, 1.0, 0.0)
                + flux(u, v + h * 0.5, 0.0, 1.0)
                - flux(u, v - h * 0.5, 0.0, 1.0))
                / h;
            let det = (smp.g.xx * smp.g.yy - smp.g.xy * smp.g.xy).sqrt();
            let lap = div / det;
            let expect = smp.mean * smp.n_z;
            assert!(
                (lap - expect).abs() < 1e-4 * (1.0 + expect.abs()),
                "Delta z {lap} vs H n_z {expect} at ({u},{v})"
            );
        }
    }
}

/// det G = J^2 det g for 1000 random (point, offset) draws per family.
#[test]
fn layer_volume_factor_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for s in families() {
        let cfg = LayerConfig::new(0.2).unwrap();
        let mut checked = 0usize;
        while checked < 1000 {
            let (u, v) = random_point(&mut rng);
            let t = rng.gen_range(-cfg.a..cfg.a);
            let smp = s.sample(u, v).unwrap();
            let lm = match layer_metric_at(&smp, t, &cfg) {
                Ok(lm) => lm,
                Err(_) => continue, // folded draw; not part of this identity
            };
            let det_gh = lm.g_horiz.xx * lm.g_horiz.yy - lm.g_horiz.xy * lm.g_horiz.xy;
            let expect = lm.j * lm.j * smp.det_g;
            assert!(
                (det_gh - expect).abs() <= 1e-10 * (1.0 + expect.abs()),
                "det G {det_gh} vs J^2 det g {expect}"
            );
            checked += 1;
        }
    }
}

/// The spectral floor of the transverse comparison (Lemma-style bound):
/// Q(f, f) + kappa^2 ||f||^2 >= ((1 - eps)/(1 + eps))^2 kappa^2 ||f||^2
/// whenever the metric comparison constant eps < 1.
#[test]
fn comparison_floor_holds_for_sampled_fields() {
    let s = Surface::<f64>::hyperboloid(1.0, 1.0);
    let cfg = LayerConfig::new(0.2).unwrap();
    // eps = 2 a sup||B|| + (a sup||B||)^2 with sup||B|| = sqrt(2)
    let ca = 0.2 * 2.0_f64.sqrt();
    let eps = 2.0 * ca + ca * ca;
    assert!(eps < 1.0);
    let floor = ((1.0 - eps) / (1.0 + eps)).powi(2) * cfg.kappa_sq;
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..25 {
        let radii = {
            let r0 = 10f64.powf(rng.gen_range(-0.5..0.5));
            [r0, r0 * 2.0, r0 * 4.0, r0 * 8.0]
        };
        let profile = if rng.gen_bool(0.5) {
            TransverseProfile::GroundMode
        } else {
            TransverseProfile::SecondMode
        };
        let cut = GeodesicCutoff::new(radii[0], radii[1], radii[2], radii[3]).unwrap();
        let breaks: Vec<f64> = radii.iter().map(|&rho| s.r_of_rho(rho).unwrap()).collect();
        let field = LayerField::new(
            vec![(Arc::new(cut) as Arc<dyn SurfaceFactor<f64>>, profile)],
            (breaks[0], breaks[3]),
            &cfg,
        )
        .unwrap();
        let grid = QuadratureGrid::radial(&breaks, 8, 4, 16).unwrap();
        let v = eval_forms(&field, &s, &cfg, &grid).unwrap();
        let lhs = v.q + cfg.kappa_sq * v.l2_norm_sq;
        assert!(
            lhs >= floor * v.l2_norm_sq * (1.0 - 1e-10),
            "floor violated: {lhs} < {}",
            floor * v.l2_norm_sq
        );
    }
}

/// Bit-identical form values regardless of the rayon thread count.
#[test]
fn forms_are_thread_count_deterministic() {
    let s = Surface::<f64>::hyperboloid(1.0, 1.0);
    let cfg = LayerConfig::new(0.5).unwrap();
    let cut = GeodesicCutoff::new(2.0, 4.0, 8.0, 16.0).unwrap();
    let breaks: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&rho| s.r_of_rho(rho).unwrap())
        .collect();
    let field = LayerField::new(
        vec![(
            Arc::new(cut) as Arc<dyn SurfaceFactor<f64>>,
            TransverseProfile::GroundMode,
        )],
        (breaks[0], breaks[3]),
        &cfg,
    )
    .unwrap();
    let grid = QuadratureGrid::radial(&breaks, 10, 8, 16).unwrap();
    let run = |threads: usize| -> f64 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| eval_forms(&field, &s, &cfg, &grid).unwrap().q)
    };
    let q1 = run(1);
    let q4 = run(4);
    assert!(
        (q1 - q4).abs() <= 1e-13 * q1.abs(),
        "thread sensitivity: {q1} vs {q4}"
    );
}
