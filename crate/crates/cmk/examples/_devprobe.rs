use cmk::problem::*;
use cmk::spheregrid::*;
use std::sync::Arc;

fn main() {
    // prop53 residual sup, full grid vs smooth region, J = 128, 256
    for j in [128usize, 256, 512] {
        let g = SphereGrid::build(3, GridKind::Axisym, &[j]).unwrap();
        let full = prop53_residual_sup(&g, 2, 0.2, 0.0).unwrap();
        let smooth = prop53_residual_sup(&g, 2, 0.2, 0.2).unwrap();
        println!("J={j}: full-sup {full:.6e}  smooth-sup {smooth:.6e}");
    }
    // weighted asymmetry of the exact Jacobian, absolute and relative
    for j in [128usize, 256] {
        let g = SphereGrid::build(3, GridKind::Axisym, &[j]).unwrap();
        let spec = ProblemSpec::new(2, 0.5, 0.0, ScalarField::constant(&g, 3.0), 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |t, _| 1.0 + 0.08 * t.cos() * t.cos());
        let op = linearize(&u, &spec).unwrap();
        let v = ScalarField::from_fn(&g, |t, _| 0.3 + 0.5 * t.cos() + 0.2 * (2.0 * t).cos());
        let w = ScalarField::from_fn(&g, |t, _| -0.1 + 0.4 * (3.0 * t).cos());
        let lv = op.apply(&v);
        let lw = op.apply(&w);
        let ip = |x: &ScalarField, y: &ScalarField| integrate(&x.zip(y, |a, b| a * b));
        let asym = (ip(&lv, &w) - ip(&v, &lw)).abs();
        let scale = ip(&lv, &lv).sqrt() * ip(&w, &w).sqrt() + ip(&lw, &lw).sqrt() * ip(&v, &v).sqrt();
        println!("J={j}: asym {asym:.3e}  rel {:.3e}", asym / scale);
    }
    // same for noise fields
    {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = SphereGrid::build(3, GridKind::Axisym, &[256]).unwrap();
        let spec = ProblemSpec::new(2, 0.5, 0.0, ScalarField::constant(&g, 3.0), 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |t, _| 1.0 + 0.08 * t.cos() * t.cos());
        let op = linearize(&u, &spec).unwrap();
        let mk = |rng: &mut ChaCha8Rng| ScalarField {
            grid: g.clone(),
            values: (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let v = mk(&mut rng);
        let w = mk(&mut rng);
        let lv = op.apply(&v);
        let lw = op.apply(&w);
        let ip = |x: &ScalarField, y: &ScalarField| integrate(&x.zip(y, |a, b| a * b));
        let asym = (ip(&lv, &w) - ip(&v, &lw)).abs();
        let scale = ip(&lv, &lv).sqrt() * ip(&w, &w).sqrt() + ip(&lw, &lw).sqrt() * ip(&v, &v).sqrt();
        println!("noise J=256: asym {asym:.3e}  rel {:.3e}", asym / scale);
    }
    // full-2d banded solve timing at 64x128
    {
        let g = SphereGrid::build(2, GridKind::Full2d, &[64, 128]).unwrap();
        let spec = ProblemSpec::new(1, 0.5, 0.0, ScalarField::constant(&g, 2.0), 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |t, _| 1.0 + 0.08 * t.cos() * t.cos());
        let t0 = std::time::Instant::now();
        let op = linearize(&u, &spec).unwrap();
        let t1 = std::time::Instant::now();
        let rhs = vec![1.0; g.node_count()];
        let x = op.solve(&rhs).unwrap();
        let t2 = std::time::Instant::now();
        println!(
            "full2d 64x128: assemble {:.3}s  factor+solve {:.3}s  x[0]={:.6}",
            (t1 - t0).as_secs_f64(),
            (t2 - t1).as_secs_f64(),
            x[0]
        );
    }
}
