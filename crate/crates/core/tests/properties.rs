use hormander::grid::{hormander_norm, quotient_norm, DomainMask, GridDistribution, GridShape};
use hormander::param::{
    concave_majorant, matuszewska_indices, peetre_log_constant, phi_from_psi, psi_from_phi, ro_log_constant,
    ro_membership, IndexConfig, RoConfig,
};
use hormander::spectral::{interp_norm, rank_one_witness, DiagonalCouple};
use hormander::ParamExpr;
use num_complex::Complex64;
use proptest::prelude::*;

/// `t^a (1 + log t)^b`
fn power_log(a: f64, b: f64) -> ParamExpr {
    ParamExpr::power(a).times(ParamExpr::log_shift().pow(b))
}

fn pair() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.1..4.0f64).prop_map(|(s0, d)| (s0, s0 + d))
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transforms_invert_each_other(a in -2.0..3.0f64, b in -2.0..2.0f64, (s0, s1) in pair(), x in 0.0..1e3f64) {
        let phi = power_log(a, b);
        let back = phi_from_psi(&psi_from_phi(&phi, s0, s1).unwrap(), s0, s1).unwrap();
        let (want, got) = (phi.log_eval(x).unwrap(), back.log_eval(x).unwrap());
        prop_assert!((want - got).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn peetre_and_power_constants_coincide(a in -2.0..3.0f64, b in -2.0..2.0f64, (s0, s1) in pair(), x_max in 2.0..60.0f64) {
        let phi = power_log(a, b);
        let xs: Vec<f64> = (1..=300).map(|i| x_max * i as f64 / 300.0).collect();
        let taus: Vec<f64> = xs.iter().map(|x| (s1 - s0) * x).collect();
        let psi = psi_from_phi(&phi, s0, s1).unwrap();
        let c_phi = ro_log_constant(&phi, &xs, s0, s1).unwrap();
        let (c_psi, _) = peetre_log_constant(&psi, &taus).unwrap();
        prop_assert!((c_phi - c_psi).abs() <= 1e-9 * c_phi.abs().max(1.0), "{} vs {}", c_phi, c_psi);
    }

    #[test]
    fn certificate_brackets_the_indices(a in -2.0..3.0f64, b in -1.5..1.5f64) {
        let phi = power_log(a, b);
        let rep = ro_membership(&phi, 60.0, 1024, &RoConfig::default()).unwrap();
        prop_assert!(rep.is_member);
        prop_assert!(rep.s0 <= rep.indices.sigma0 && rep.indices.sigma1 <= rep.s1);
        prop_assert!(rep.holds_on_grid(&phi, 1e-9).unwrap());
        prop_assert!((rep.indices.sigma0 - a).abs() < 0.2 && (rep.indices.sigma1 - a).abs() < 0.2);
    }

    #[test]
    fn pure_powers_have_exact_indices(a in -5.0..5.0f64) {
        let est = matuszewska_indices(&ParamExpr::power(a), 50.0, &IndexConfig::default()).unwrap();
        prop_assert!((est.sigma0 - a).abs() < 1e-9 && (est.sigma1 - a).abs() < 1e-9);
    }

    #[test]
    fn majorant_lies_above_and_touches_the_hull(raw in prop::collection::vec((0.01..3.0f64, 0.01..10.0f64), 2..40)) {
        let mut t = 0.0;
        let samples: Vec<[f64; 2]> = raw.iter().map(|&(dt, y)| { t += dt; [t, y] }).collect();
        let cm = concave_majorant(&samples).unwrap();
        for p in &samples {
            prop_assert!(cm.majorant.eval(p[0]).unwrap() >= p[1] * (1.0 - 1e-12));
        }
        for v in &cm.hull {
            prop_assert!((cm.majorant.eval(v[0]).unwrap() - v[1]).abs() <= 1e-12 * v[1].max(1.0));
        }
    }

    #[test]
    fn envelope_of_increasing_samples_is_pseudoconcave(
        y0 in 0.01..5.0f64,
        raw in prop::collection::vec((0.01..3.0f64, 0.0..5.0f64), 1..40),
    ) {
        let (mut t, mut y) = (0.5, y0);
        let mut samples = vec![[t, y]];
        for &(dt, dy) in &raw {
            t += dt;
            y += dy;
            samples.push([t, y]);
        }
        let cm = concave_majorant(&samples).unwrap();
        // positive, concave and nondecreasing on (0, t_last]: Peetre with c = 1
        let xs: Vec<f64> = (0..200).map(|i| (t * (i as f64 + 0.5) / 200.0).ln()).collect();
        let (log_c, _) = peetre_log_constant(&cm.envelope, &xs).unwrap();
        prop_assert!(log_c <= 1e-9, "log c = {}", log_c);
    }

    #[test]
    fn power_witnesses_stay_below_one(theta in 0.0..1.0f64, a in -50.0..50.0f64, b in -50.0..50.0f64) {
        let w = rank_one_witness(&ParamExpr::power(theta), a, b).unwrap();
        prop_assert!(w <= 1e-12);
    }

    #[test]
    fn interpolation_norm_matches_direct_sum(
        u in complex_vec(16),
        w in prop::collection::vec(0.1..10.0f64, 16),
        l in prop::collection::vec(1.0..1e4f64, 16),
        theta in 0.0..1.0f64,
    ) {
        let couple = DiagonalCouple::new(w.clone(), l.clone(), 1.0).unwrap();
        let got = interp_norm(&u, &couple, &ParamExpr::power(theta)).unwrap();
        let want: f64 = (0..16).map(|j| (w[j] * l[j].powf(theta)).powi(2) * u[j].norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn norms_scale_and_obey_the_triangle_inequality(seed in 0..1000u64, re in -3.0..3.0f64, im in -3.0..3.0f64, s in 0.0..2.0f64) {
        let g = GridShape::new(vec![16, 8], vec![2.0, 5.0]).unwrap();
        let u = GridDistribution::random(g.clone(), seed).unwrap();
        let v = GridDistribution::random(g.clone(), seed + 7919).unwrap();
        let phi = ParamExpr::power(s);
        let alpha = Complex64::new(re, im);
        let nu = hormander_norm(&u, &phi).unwrap();
        prop_assert!((hormander_norm(&u.scaled(alpha), &phi).unwrap() - alpha.norm() * nu).abs() <= 1e-12 * nu.max(1.0) * alpha.norm().max(1.0));
        let sum: Vec<Complex64> = u.samples().iter().zip(v.samples()).map(|(a, b)| a + b).collect();
        let w = GridDistribution::new(g, sum).unwrap();
        prop_assert!(hormander_norm(&w, &phi).unwrap() <= nu + hormander_norm(&v, &phi).unwrap() + 1e-12);
    }

    #[test]
    fn quotient_norm_grows_with_the_mask(seed in 0..1000u64, bits in prop::collection::vec(any::<bool>(), 32), s in 0.0..1.5f64) {
        let g = GridShape::new(vec![32], vec![std::f64::consts::TAU]).unwrap();
        let u = GridDistribution::random(g.clone(), seed).unwrap();
        let phi = ParamExpr::power(s).times(ParamExpr::log_shift());
        let mut small = bits.clone();
        small[0] = true;
        let mut large = small.clone();
        for (i, b) in large.iter_mut().enumerate() {
            if i % 3 == 0 {
                *b = true;
            }
        }
        let ms = DomainMask::new(g.clone(), small).unwrap();
        let ml = DomainMask::new(g.clone(), large).unwrap();
        let qs = quotient_norm(&ms.restrict(&u).unwrap(), &ms, &phi).unwrap();
        let ql = quotient_norm(&ml.restrict(&u).unwrap(), &ml, &phi).unwrap();
        let full = hormander_norm(&u, &phi).unwrap();
        prop_assert!(qs <= ql * (1.0 + 1e-10), "{} > {}", qs, ql);
        prop_assert!(ql <= full * (1.0 + 1e-10), "{} > {}", ql, full);
    }

    #[test]
    fn json_round_trip_is_exact(a in -3.0..3.0f64, b in -2.0..2.0f64, c in 0.1..10.0f64) {
        let phi = ParamExpr::sum(vec![power_log(a, b), ParamExpr::constant(c)]);
        let back = ParamExpr::from_json(&phi.to_json()).unwrap();
        prop_assert_eq!(&back, &phi);
    }
}
