//! Frozen outputs of the seeding scheme and generators. A change here means
//! previously published simulation runs can no longer be reproduced.

use dpcost::simulation::cell_seed;
use dpcost::synthetic::{apache_profiles, synthesize};
use dpcost::*;

fn falcon() -> Project {
    let profile = apache_profiles().into_iter().find(|p| p.name == "falcon").unwrap();
    synthesize(&profile, 1).unwrap()
}

#[test]
fn cell_seeds() {
    assert_eq!(cell_seed(0, 0, 0), 0x238275bc38fcbe91);
    assert_eq!(cell_seed(42, 3, 17), 0x9e5fc771d786b599);
    assert_eq!(cell_seed(u64::MAX, 18, 99), 0x3fbae9192aef8765);
}

#[test]
fn simulated_labels() {
    let p = falcon();
    let h = simulate_prediction(&p, 0.5, cell_seed(42, 9, 0));
    let bits: String = h.labels()[..32].iter().map(|&b| if b { '1' } else { '0' }).collect();
    assert_eq!(bits, "01111101110000011011010101011000");
    assert_eq!(h.labels().iter().filter(|&&b| b).count(), 286);
}

#[test]
fn grid_record() {
    let p = falcon();
    assert_eq!(summarize(&p).mean_size, 121.81975736568458);
    let config = GridConfig {
        repetitions: 2,
        ..GridConfig::default()
    }
    .with_seed(7);
    let records = run_grid(&p, &config).unwrap();
    let r = &records[records.len() / 2];
    assert_eq!((r.accuracy, r.repetition, r.p_qf), (0.5, 1, 0.0));
    assert_eq!(r.kind, ModelKind::new(QaMode::Constant, Relationship::NtoM));
    assert_eq!(r.cm, ConfusionMatrix::new(19, 278, 261, 19));
    assert_eq!(r.lower, ExtendedBound::Finite(59.4));
    assert_eq!(r.upper, ExtendedBound::Finite(10.0));
    assert!(!r.cost_saving);
}
