use bmt_core::mle::{
    brownian_params, newton_fit, newton_fit_with_init, rloglik_and_grad, sigma_of, stationarity_residual,
    NewtonOptions, SampleCovariance,
};
use bmt_core::tree::{enumerate_topologies, parse_newick, RootedTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 = (0..n).map(|k| g[i][k] * g[j][k]).sum();
                    dot / n as f64 + if i == j { 0.5 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn random_params(t: &RootedTree, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len: Vec<f64> = (0..t.num_vertices() - 1).map(|_| rng.gen_range(0.2..1.5)).collect();
    brownian_params(t, &len)
}

fn sample_trees() -> Vec<RootedTree> {
    let mut out: Vec<RootedTree> =
        ["(1,2);", "(1,2,3);", "((1,2),3,4);", "(1,2,(3,4,5));", "((1,2),(3,4),(5,6));", "(((1,2),3),(4,5,6));"]
            .iter()
            .map(|s| parse_newick(s).unwrap())
            .collect();
    out.extend(enumerate_topologies(4).into_iter().step_by(5));
    out
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-6;
    for t in sample_trees() {
        for _ in 0..50 {
            let s = SampleCovariance::new(random_pd(t.n(), &mut rng)).unwrap();
            let p = random_params(&t, &mut rng);
            let (_, g) = rloglik_and_grad(&t, &p, &s).unwrap();
            let gnorm = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for v in 0..p.len() {
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[v] += h;
                lo[v] -= h;
                let fd =
                    (rloglik_and_grad(&t, &hi, &s).unwrap().0 - rloglik_and_grad(&t, &lo, &s).unwrap().0) / (2.0 * h);
                assert!((fd - g[v]).abs() / gnorm <= 1e-5, "{} v={} fd={fd} g={}", t.to_newick(), v + 1, g[v]);
            }
        }
    }
}

#[test]
fn objective_is_midpoint_concave() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in sample_trees() {
        for _ in 0..20 {
            let s = SampleCovariance::new(random_pd(t.n(), &mut rng)).unwrap();
            let a = random_params(&t, &mut rng);
            let b = random_params(&t, &mut rng);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let f = |p: &[f64]| rloglik_and_grad(&t, p, &s).unwrap().0;
            assert!(f(&mid) >= 0.5 * (f(&a) + f(&b)) - 1e-10);
        }
    }
}

#[test]
fn fit_recovers_s_in_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for t in sample_trees() {
        let p = random_params(&t, &mut rng);
        let sigma = sigma_of(&t, &p);
        let s = SampleCovariance::new(sigma.clone()).unwrap();
        let fit = newton_fit(&t, &s, &NewtonOptions::default()).unwrap();
        for i in 0..t.n() {
            for j in 0..t.n() {
                assert!((fit.sigma[i][j] - sigma[i][j]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn random_fits_converge_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in sample_trees() {
        for _ in 0..50 {
            let s = SampleCovariance::new(random_pd(t.n(), &mut rng)).unwrap();
            let fit = newton_fit(&t, &s, &NewtonOptions::default()).unwrap();
            assert!(fit.converged, "{} residual {}", t.to_newick(), fit.residual);
            assert!(fit.trace.windows(2).all(|w| w[1] >= w[0] - 1e-14 * w[0].abs().max(1.0)));
            let r = stationarity_residual(&t, &fit, &s).unwrap();
            assert!(r.max_abs <= 1e-8);
        }
    }
}

#[test]
fn binary_tree_restarts_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let binary = ["((1,2),3);", "(((1,2),3),(4,5));", "((1,(2,3)),((4,5),6));"];
    for nw in binary {
        let t = parse_newick(nw).unwrap();
        let s = SampleCovariance::new(random_pd(t.n(), &mut rng)).unwrap();
        let a = newton_fit_with_init(&t, &s, &random_params(&t, &mut rng), &NewtonOptions::default()).unwrap();
        let b = newton_fit_with_init(&t, &s, &random_params(&t, &mut rng), &NewtonOptions::default()).unwrap();
        for (x, y) in a.t.iter().zip(&b.t) {
            assert!((x - y).abs() <= 1e-8, "{nw}: {x} vs {y}");
        }
    }
}
