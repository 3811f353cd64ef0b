use lemniscate::curves::{halfplane_segment_hypothesis, hausdorff_distance, orient, HalfplaneVerdict, PolylineCurve};
use lemniscate::koch;
use lemniscate::potential::{check_prop27, green_disk, harmonic_measure_mc, BoundaryPartition, LabeledArc, Region};
use lemniscate::ratfun::{Multiset, Poly, SpherePoint};
use lemniscate::Complex64;
use proptest::prelude::*;

fn disk_point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn plane_point() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

fn polyline() -> impl Strategy<Value = PolylineCurve> {
    prop::collection::vec(plane_point(), 2..12).prop_map(|pts| PolylineCurve::new_dedup(pts, false).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_re_expand_to_the_polynomial(roots in prop::collection::vec(plane_point(), 1..7)) {
        let p = Poly::from_roots(&roots);
        let found = p.roots(1e-12).unwrap();
        prop_assert_eq!(found.total(), roots.len());
        let mut expanded = Vec::new();
        for &(z, m) in found.iter() {
            let z = z.as_finite().unwrap();
            expanded.extend(std::iter::repeat_n(z, m));
        }
        let q = Poly::from_roots(&expanded);
        let scale = p.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-6 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn blaschke_identity_holds(zeros in prop::collection::vec(disk_point(0.95), 1..=6), z in disk_point(0.95)) {
        prop_assume!(zeros.iter().all(|w| (w - z).norm() > 1e-6));
        prop_assert!(check_prop27(&zeros, z).unwrap() <= 1e-12);
    }

    #[test]
    fn disk_green_function_is_symmetric(z in disk_point(0.99), w in disk_point(0.99)) {
        prop_assume!((z - w).norm() > 1e-6);
        let (a, b) = (green_disk(z, w).unwrap(), green_disk(w, z).unwrap());
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn hausdorff_is_a_metric(a in polyline(), b in polyline(), c in polyline()) {
        let ab = hausdorff_distance(&a, &b);
        prop_assert!(hausdorff_distance(&a, &a) <= 1e-12);
        prop_assert!((ab - hausdorff_distance(&b, &a)).abs() <= 1e-12);
        prop_assert!(ab <= hausdorff_distance(&a, &c) + hausdorff_distance(&c, &b) + 1e-12);
    }

    #[test]
    fn subdivided_convex_polygons_satisfy_the_halfplane_hypothesis(mut angles in prop::collection::vec(0.0..std::f64::consts::TAU, 3..20)) {
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        prop_assume!(angles.len() >= 3);
        let corners: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let pts: Vec<Complex64> = (0..corners.len())
            .flat_map(|k| [corners[k], 0.5 * (corners[k] + corners[(k + 1) % corners.len()])])
            .collect();
        let c = PolylineCurve::new(pts, true).unwrap();
        prop_assume!(c.signed_area() > 1e-3);
        match halfplane_segment_hypothesis(&c).unwrap() {
            HalfplaneVerdict::Holds(w) => {
                prop_assert!(w.run_length > 0.0);
                for &z in c.points() {
                    prop_assert!(orient(w.origin, w.origin + w.direction, z) >= -1e-9);
                }
            }
            HalfplaneVerdict::Fails => prop_assert!(false, "convex polygon rejected"),
        }
    }

    #[test]
    fn koch_dimension_round_trips(l in 0.2501..0.4999f64) {
        let s = koch::dimension(l).unwrap();
        prop_assert!(s > 1.0 && s < 2.0);
        prop_assert!((koch::l_for_dimension(s).unwrap() - l).abs() <= 1e-14);
    }

    #[test]
    fn multisets_round_trip_through_json(entries in prop::collection::vec((plane_point(), 1..4usize), 0..6), inf in 0..3usize) {
        let mut m = Multiset::new();
        for (z, k) in entries {
            m.push(SpherePoint::Finite(z), k);
        }
        if inf > 0 {
            m.push(SpherePoint::Infinity, inf);
        }
        let back: Multiset = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn refined_partitions_add_up_exactly(cuts in prop::collection::vec(0.01..0.99f64, 1..6), seed in 0..1000u64) {
        let circle = PolylineCurve::circle(Complex64::new(0.0, 0.0), 1.0, 128);
        let region = Region::bounded(vec![vec![circle.clone()]], Complex64::new(0.2, 0.1)).unwrap();
        let len = circle.length();
        let mut bounds: Vec<f64> = cuts.iter().map(|t| t * len).collect();
        bounds.sort_by(f64::total_cmp);
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut edges = vec![0.0];
        edges.extend(bounds);
        edges.push(len);
        let fine = BoundaryPartition::new(
            edges
                .windows(2)
                .enumerate()
                .map(|(k, w)| LabeledArc { label: format!("f{k}"), curve: 0, s0: w[0], s1: w[1] })
                .collect(),
        );
        let coarse = BoundaryPartition::new(
            fine.arcs.iter().map(|a| LabeledArc { label: "all".into(), ..a.clone() }).collect(),
        );
        let base = SpherePoint::finite(0.2, 0.1);
        let hf = harmonic_measure_mc(&region, base, &fine, 4000, seed).unwrap();
        let hc = harmonic_measure_mc(&region, base, &coarse, 4000, seed).unwrap();
        let total: u64 = hf.estimates.iter().filter(|(l, _)| l != "rest").map(|(_, e)| (e.value * 4000.0).round() as u64).sum();
        prop_assert_eq!(total, (hc.get("all").unwrap().value * 4000.0).round() as u64);
        prop_assert_eq!(total, 4000);
    }
}
