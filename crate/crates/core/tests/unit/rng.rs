use super::*;

// Known-answer vectors published with the Random123 library.
#[test]
fn philox_known_answers() {
    assert_eq!(
        philox4x32([0, 0, 0, 0], [0, 0]),
        [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
    );
    assert_eq!(
        philox4x32([u32::MAX; 4], [u32::MAX; 2]),
        [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
    );
    assert_eq!(
        philox4x32(
            [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
            [0xa409_3822, 0x299f_31d0]
        ),
        [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
    );
}

#[test]
fn addresses_are_distinct_streams() {
    let key = NoiseKey::new(7);
    let a = StreamAddress {
        domain: Domain::Noise,
        particle: 3,
        slot: 0,
        step: 5,
    };
    let b = StreamAddress { step: 6, ..a };
    let c = StreamAddress {
        domain: Domain::Init,
        ..a
    };
    assert_eq!(key.normal(a), key.normal(a));
    assert_ne!(key.normal(a), key.normal(b));
    assert_ne!(key.normal(a), key.normal(c));
    assert_ne!(NoiseKey::new(8).normal(a), key.normal(a));
}

#[test]
fn normal_moments() {
    let key = NoiseKey::new(11);
    let n = 200_000u64;
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let z = key.normal(StreamAddress {
            domain: Domain::Noise,
            particle: k,
            slot: 1,
            step: 0,
        });
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    let nf = n as f64;
    assert!((s1 / nf).abs() < 4.0 / nf.sqrt());
    assert!((s2 / nf - 1.0).abs() < 0.02);
    assert!((s4 / nf - 3.0).abs() < 0.1);
}

#[test]
fn sequential_lane_is_reproducible() {
    let mut a = CounterRng::new(1, Domain::Auxiliary, 0, 0);
    let mut b = CounterRng::new(1, Domain::Auxiliary, 0, 0);
    for _ in 0..100 {
        assert_eq!(a.next_u32(), b.next_u32());
    }
    let mut c = CounterRng::new(1, Domain::Auxiliary, 1, 0);
    assert_ne!(a.next_u64(), c.next_u64());
    for _ in 0..1000 {
        assert!(a.below(7) < 7);
        let u = a.uniform();
        assert!(u > 0.0 && u < 1.0);
    }
}
