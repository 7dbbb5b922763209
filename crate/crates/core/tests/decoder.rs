use di_forge::channels::{ChannelModel, Noiseless};
use di_forge::codebook::{expurgate_best, CodebookParams, CodewordId, InputBox, PrimitiveCodebook};
use di_forge::decoder::{identify, layer_distance_full, layer_test, DecodePath, DecoderParams};
use di_forge::experiments::{estimate_missed_id, Regime};
use di_forge::geometry::haar_rotation;
use di_forge::Error;
use proptest::prelude::*;

fn separated(n: usize, branching: Vec<usize>, seed: u64) -> PrimitiveCodebook {
    let t = (n as f64).ln();
    PrimitiveCodebook::build(CodebookParams::separated(n, t, branching, seed)).unwrap()
}

#[test]
fn layer_test_boundary_is_closed() {
    let parent = [1.0, 2.0, 3.0];
    let dir = [0.0, 3.0, 4.0];
    let center = [1.0, 5.0, 7.0];
    let out = layer_test(&center, &parent, &dir, 0.5).unwrap();
    assert!(out.pass);
    assert_eq!(out.distance, 0.0);

    // center + t·e with e = (0, 0.6, 0.8), t = 0.5
    let edge = [1.0, 5.3, 7.4];
    let out = layer_test(&edge, &parent, &dir, 0.5).unwrap();
    assert!((out.distance - 0.5).abs() < 1e-12);
    let t = out.distance;
    assert!(layer_test(&edge, &parent, &dir, t).unwrap().pass);
    assert!(
        !layer_test(&edge, &parent, &dir, t * (1.0 - 1e-12))
            .unwrap()
            .pass
    );

    assert!(matches!(
        layer_test(&edge, &parent, &[0.0; 3], 1.0),
        Err(Error::ZeroDirection)
    ));
}

#[test]
fn noiseless_self_and_sibling() {
    let n = 64;
    let cb = separated(n, vec![5, 5], 3);
    let params = DecoderParams::capacity(n);
    for id in cb.leaf_ids() {
        let w = cb.codeword_vector(&id).unwrap();
        let d = identify(&w, &cb, &id, &params).unwrap();
        assert!(d.accepted);
        assert!(d.per_layer_distance.iter().all(|&x| x < 1e-9));
    }
    // ids differing at layer 1 are rejected there
    let a = CodewordId::new(vec![1, 2]);
    let b = CodewordId::new(vec![4, 2]);
    let d = identify(&cb.codeword_vector(&b).unwrap(), &cb, &a, &params).unwrap();
    assert!(!d.accepted);
    assert_eq!(d.failed_layer, Some(1));
    assert_eq!(d.per_layer_distance.len(), 1);

    // siblings at the last layer fail there
    let c = CodewordId::new(vec![1, 5]);
    let d = identify(&cb.codeword_vector(&c).unwrap(), &cb, &a, &params).unwrap();
    assert_eq!(d.failed_layer, Some(2));
}

#[test]
fn decision_invariant() {
    let n = 32;
    let cb = separated(n, vec![3, 3], 1);
    let params = DecoderParams::capacity(n);
    let ch = ChannelModel::bernoulli(n);
    let x = vec![0.4; n];
    for seed in 0..50 {
        let y = ch.transmit(&x, seed).unwrap();
        for id in cb.leaf_ids() {
            let d = identify(&y, &cb, &id, &params).unwrap();
            assert_eq!(d.accepted, d.failed_layer.is_none());
            assert_eq!(
                d.accepted,
                d.per_layer_distance.iter().all(|&x| x <= params.t)
            );
            assert_eq!(
                d.accepted,
                DecodePath::new(&cb, &id).unwrap().accepts(&y, params.t)
            );
        }
    }
}

/// A codebook that fits the unit cube at n = 100: small radii with `d = r₂`,
/// rotated by the best of a few Haar draws.
fn boxed(n: usize) -> (PrimitiveCodebook, Vec<CodewordId>) {
    let params = CodebookParams::explicit(n, vec![1.34, 0.67], 0.67, vec![4, 4], 17);
    let cb = PrimitiveCodebook::build(params).unwrap();
    let e = expurgate_best(&cb, &InputBox::unit(n), &(0..8).collect::<Vec<_>>()).unwrap();
    assert!(!e.retained.is_empty());
    (e.codebook, e.retained)
}

#[test]
fn bernoulli_noise_never_misses_at_capacity_radius() {
    let n = 100;
    let (cb, ids) = boxed(n);
    let params = DecoderParams::capacity(n);
    let est =
        estimate_missed_id(&cb, &ChannelModel::bernoulli(n), &params, &ids, 100_000, 3).unwrap();
    assert_eq!(est.failures, 0);
    // 2·2·exp(−2 ln² 100)
    assert!(est.bound < 1e-17);
    assert_eq!(est.regime, Regime::ZeroFailuresExpected);
}

#[test]
fn noiseless_stub_never_misses() {
    let n = 100;
    let (cb, ids) = boxed(n);
    let stub = Noiseless {
        input_box: InputBox::unit(n),
    };
    let est = estimate_missed_id(&cb, &stub, &DecoderParams::capacity(n), &ids, 1_000, 0).unwrap();
    assert_eq!(est.p_hat, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_and_full_distances_agree(
        y in prop::collection::vec(-3.0..3.0f64, 6),
        p in prop::collection::vec(-3.0..3.0f64, 6),
        v in prop::collection::vec(-3.0..3.0f64, 6),
    ) {
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let scalar = layer_test(&y, &p, &v, 1.0).unwrap().distance;
        let full = layer_distance_full(&y, &p, &v).unwrap();
        prop_assert!((scalar - full).abs() < 1e-10);
    }

    #[test]
    fn acceptance_is_monotone_in_t(seed in any::<u64>(), t in 0.1..6.0f64, extra in 0.0..3.0f64) {
        let n = 24;
        let cb = separated(n, vec![3, 2], 5);
        let y = ChannelModel::bernoulli(n).transmit(&vec![0.5; n], seed).unwrap();
        let wider = DecoderParams::custom(t + extra).unwrap();
        for id in cb.leaf_ids() {
            if identify(&y, &cb, &id, &DecoderParams::custom(t).unwrap()).unwrap().accepted {
                prop_assert!(identify(&y, &cb, &id, &wider).unwrap().accepted);
            }
        }
    }

    #[test]
    fn decisions_survive_rotation(seed in any::<u64>(), rot in any::<u64>()) {
        let n = 20;
        let cb = separated(n, vec![3, 3], 2);
        let q = haar_rotation(n, rot);
        let turned = cb.rotate(&q).unwrap();
        let y = ChannelModel::bernoulli(n).transmit(&vec![0.5; n], seed).unwrap();
        let y_turned = q.apply_about(cb.center(), &y);
        let params = DecoderParams::custom(2.0).unwrap();
        for id in cb.leaf_ids() {
            let a = identify(&y, &cb, &id, &params).unwrap();
            let b = identify(&y_turned, &turned, &id, &params).unwrap();
            // ties within rounding of t could flip; none are expected at random y
            prop_assert_eq!(a.accepted, b.accepted);
            for (x, z) in a.per_layer_distance.iter().zip(&b.per_layer_distance) {
                prop_assert!((x - z).abs() < 1e-9);
            }
        }
    }
}
