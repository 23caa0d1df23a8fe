use frame_erasure::channel::{random_signal, transmit_batch};
use frame_erasure::linalg::max_column_rel_diff;
use frame_erasure::nalgebra::{DMatrix, DVector};
use frame_erasure::{
    canonical_dual, duality_error, pinv_dual, random_dual, random_erasure, reconstruct,
    reduced_dual, transmit, Complex64, ErasureSet, Error, Frame, Frame64, FrameC64, Method,
    Tolerances, TransmissionStatus,
};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..12, 0usize..12, any::<u64>()).prop_map(|(r, extra, seed)| (r, r + extra, seed))
}

/// Random frame whose bounds stay within a factor 1e6, so residual checks at
/// 1e-9 measure the algorithms rather than the conditioning of the draw.
fn conditioned(r: usize, n: usize, seed: u64) -> Option<Frame64> {
    let frame = Frame64::random(r, n, seed, 1e-10).ok()?;
    let bounds = frame.bounds();
    (bounds.upper <= 1e6 * bounds.lower).then_some(frame)
}

/// An erasure whose surviving frame is still conditioned in the same sense.
fn mrc_erasure(frame: &Frame64, k: usize, seed: u64) -> Option<ErasureSet> {
    (0..20)
        .map(|t| random_erasure(frame.count(), k, seed.wrapping_add(t)).unwrap())
        .find(|e| {
            let survivors = Frame64::new(frame.select(e.complement()), 1e-10);
            survivors.is_ok_and(|f| f.bounds().upper <= 1e6 * f.bounds().lower)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_pairs_reconstruct_every_signal((r, n, seed) in shape(), spread in 0.0f64..2.0) {
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let pair = random_dual(&canonical_dual(&frame, &tol).unwrap(), seed ^ 1, spread, &tol).unwrap();
        for t in 0..100 {
            let h = random_signal::<f64>(r, seed.wrapping_add(t));
            let back = pair.dual() * frame.analysis(&h).unwrap();
            prop_assert!((back - &h).norm() <= 1e-9 * h.norm());
        }
    }

    #[test]
    fn frame_bounds_bracket_the_energy((r, n, seed) in shape()) {
        let frame = Frame64::random(r, n, seed, 1e-10).unwrap();
        let bounds = frame.bounds();
        prop_assert!(bounds.lower > 0.0);
        let h = random_signal::<f64>(r, seed ^ 7);
        let energy = frame.analysis(&h).unwrap().norm_squared();
        let norm2 = h.norm_squared();
        prop_assert!(bounds.lower * norm2 <= energy * (1.0 + 1e-10));
        prop_assert!(energy <= bounds.upper * norm2 * (1.0 + 1e-10));
    }

    #[test]
    fn analysis_is_adjoint_of_synthesis((r, n, seed) in shape()) {
        let frame = FrameC64::random(r, n, seed, 1e-10).unwrap();
        let h = random_signal::<Complex64>(r, seed ^ 3);
        let c = random_signal::<Complex64>(n, seed ^ 5);
        let lhs = c.dotc(&frame.analysis(&h).unwrap());
        let rhs = frame.synthesis(&c).unwrap().dotc(&h);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn canonical_dual_matches_pseudo_inverse((r, n, seed) in shape()) {
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let canonical = canonical_dual(&frame, &tol).unwrap();
        let pinv = pinv_dual(&frame, &tol);
        prop_assert!(max_column_rel_diff(canonical.dual(), pinv.dual()) <= 1e-8);
        let s_inv = frame.frame_operator().try_inverse().unwrap();
        prop_assert!(max_column_rel_diff(canonical.dual(), &(s_inv * frame.elements())) <= 1e-8);
    }

    #[test]
    fn reduced_duals_recover_the_signal((r, n, seed) in shape(), k in 1usize..4) {
        prop_assume!(n - r >= k);
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let e = mrc_erasure(&frame, k, seed);
        prop_assume!(e.is_some());
        let e = e.unwrap();
        let h = random_signal::<f64>(r, seed ^ 11);
        let coeffs = frame.analysis(&h).unwrap();
        for m in Method::ALL {
            let reduced = reduced_dual(&pair, &e, m, &tol).unwrap();
            prop_assert!(duality_error(&frame, reduced.vectors(), e.complement()).unwrap() <= 1e-9);
            let back = reconstruct(&reduced, &frame, &coeffs).unwrap();
            prop_assert!((back - &h).norm() <= 1e-9 * h.norm());
        }
    }

    #[test]
    fn final_output_ignores_erasure_order((r, n, seed) in shape(), k in 2usize..5) {
        prop_assume!(n - r >= k);
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let pair = random_dual(&canonical_dual(&frame, &tol).unwrap(), seed, 0.3, &tol).unwrap();
        let e = mrc_erasure(&frame, k, seed);
        prop_assume!(e.is_some());
        let e = e.unwrap();
        let mut reversed: Vec<usize> = e.erased().to_vec();
        reversed.reverse();
        let e_rev = ErasureSet::new(n, reversed).unwrap();
        for m in Method::ALL {
            let (Ok(a), Ok(b)) = (reduced_dual(&pair, &e, m, &tol), reduced_dual(&pair, &e_rev, m, &tol)) else {
                continue;
            };
            prop_assert_eq!(a.indices(), b.indices());
            prop_assert!(max_column_rel_diff(a.vectors(), b.vectors()) <= 1e-8);
        }
    }

    #[test]
    fn canonical_duals_never_hit_a_singular_gram((r, n, seed) in shape(), k in 1usize..4) {
        prop_assume!(n - r >= k);
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let pair = canonical_dual(&frame, &tol).unwrap();
        let e = mrc_erasure(&frame, k, seed);
        prop_assume!(e.is_some());
        let e = e.unwrap();
        prop_assert!(reduced_dual(&pair, &e, Method::GramSolve, &tol).is_ok());
    }

    #[test]
    fn methods_agree_on_noncanonical_duals((r, n, seed) in shape(), k in 1usize..4) {
        prop_assume!(n - r >= k);
        let tol = Tolerances::default();
        let frame = conditioned(r, n, seed);
        prop_assume!(frame.is_some());
        let frame = frame.unwrap();
        let pair = random_dual(&canonical_dual(&frame, &tol).unwrap(), seed, 0.5, &tol).unwrap();
        let e = mrc_erasure(&frame, k, seed);
        prop_assume!(e.is_some());
        let e = e.unwrap();
        let iterative = reduced_dual(&pair, &e, Method::Iterative, &tol);
        prop_assume!(iterative.is_ok());
        let iterative = iterative.unwrap();
        for m in [Method::GramSolve, Method::OperatorInverse] {
            let other = reduced_dual(&pair, &e, m, &tol).unwrap();
            prop_assert!(max_column_rel_diff(other.vectors(), iterative.vectors()) <= 1e-8);
        }
    }
}

#[test]
fn channel_recovers_fifty_random_transmissions() {
    let tol = Tolerances::default();
    let frame = Frame64::random(12, 20, 31, tol.rank).unwrap();
    let pair = canonical_dual(&frame, &tol).unwrap();
    for m in Method::ALL {
        let reports = transmit_batch(&pair, 3, 50, 99, m, &tol).unwrap();
        assert_eq!(reports.len(), 50);
        for report in reports {
            if report.mrc_ok {
                assert!(report.recovered(), "{report:?}");
                assert!(report.recon_error_rel.unwrap() <= 1e-9);
            } else {
                assert_eq!(report.status, TransmissionStatus::MrcViolated);
            }
        }
    }
}

#[test]
fn mrc_violation_is_never_reported_as_recovered() {
    let tol = Tolerances::default();
    // a basis: any erasure breaks spanning
    let frame = Frame64::new(DMatrix::identity(4, 4), tol.rank).unwrap();
    let pair = canonical_dual(&frame, &tol).unwrap();
    let e = ErasureSet::new(4, vec![2]).unwrap();
    let h = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    for m in Method::ALL {
        let report = transmit(&pair, &e, &h, m, &tol).unwrap();
        assert!(!report.mrc_ok);
        assert!(!report.recovered());
        assert_eq!(report.recon_error_rel, None);
        assert_eq!(report.status, TransmissionStatus::MrcViolated);
        assert!(matches!(
            reduced_dual(&pair, &e, m, &tol),
            Err(Error::MrcViolated)
        ));
    }
}

#[test]
fn random_duals_are_reproducible_and_spread_zero_is_canonical() {
    let tol = Tolerances::default();
    let frame = Frame::<f64>::random(5, 9, 4, tol.rank).unwrap();
    let canonical = canonical_dual(&frame, &tol).unwrap();
    let a = random_dual(&canonical, 8, 1.0, &tol).unwrap();
    let b = random_dual(&canonical, 8, 1.0, &tol).unwrap();
    assert_eq!(a.dual(), b.dual());
    assert!(!a.is_canonical());
    assert!(a.duality_residual() <= 1e-12);
    assert_eq!(
        random_dual(&canonical, 8, 0.0, &tol).unwrap().dual(),
        canonical.dual()
    );
}
