use super::*;
use crate::math::fabs;

#[test]
fn names_round_trip() {
    for p in Preset::ALL {
        assert_eq!(p.as_str().parse::<Preset>().unwrap(), p);
    }
    assert!(matches!(
        "mlfe".parse::<Preset>(),
        Err(Error::UnknownPreset(_))
    ));
}

#[test]
fn saturation_must_be_positive() {
    assert!(preset_with("abf", &PresetOptions { saturation: 0.0 }).is_err());
    assert!(preset_with(
        "abf",
        &PresetOptions {
            saturation: f64::INFINITY
        }
    )
    .is_err());
}

#[test]
fn clamp_is_near_identity_for_small_arguments() {
    let c = PresetCoefficients {
        kind: Preset::EotFlow,
        sat: 10.0,
    };
    assert!(fabs(c.clamp(0.1) - 0.1) < 1e-4);
    assert!(c.clamp(1e6) <= 10.0);
}
