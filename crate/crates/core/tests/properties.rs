use dpcost::report::{emit_records, parse_records, trend, BoundSide, Format, Metric};
use dpcost::*;
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn bounds_close(a: ExtendedBound, b: ExtendedBound) -> bool {
    match (a, b) {
        (ExtendedBound::Finite(x), ExtendedBound::Finite(y)) => close(x, y),
        (ExtendedBound::Unbounded, ExtendedBound::Unbounded) => true,
        _ => false,
    }
}

fn build(sizes: &[u64], incidence: &[Vec<usize>]) -> Project {
    let artifacts = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| Artifact::new(format!("f{i}"), s))
        .collect();
    let defects = incidence
        .iter()
        .enumerate()
        .map(|(j, m)| Defect::new(format!("D{j}"), m.clone()))
        .collect();
    Project::from_defects(artifacts, defects, Relationship::NtoM).unwrap()
}

/// A project with 1..25 artifacts and 0..12 defects, plus a labeling.
fn instance() -> impl Strategy<Value = (Project, Prediction)> {
    (1usize..25)
        .prop_flat_map(|n| {
            let sizes = prop::collection::vec(1u64..400, n);
            let defects = prop::collection::vec(
                prop::collection::btree_set(0..n, 1..=n.min(5)).prop_map(|s| s.into_iter().collect()),
                0..12,
            );
            let labels = prop::collection::vec(any::<bool>(), n);
            (sizes, defects, labels)
        })
        .prop_map(|(sizes, defects, labels)| (build(&sizes, &defects), Prediction::from_vec(labels)))
}

/// Projects in which every defect affects a single artifact.
fn single_member_instance(distinct: bool) -> impl Strategy<Value = (Project, Prediction)> {
    (1usize..25)
        .prop_flat_map(move |n| {
            let sizes = prop::collection::vec(1u64..400, n);
            let members: BoxedStrategy<Vec<usize>> = if distinct {
                prop::collection::btree_set(0..n, 0..=n)
                    .prop_map(|s| s.into_iter().collect())
                    .boxed()
            } else {
                prop::collection::vec(0..n, 0..15).boxed()
            };
            let labels = prop::collection::vec(any::<bool>(), n);
            (sizes, members, labels)
        })
        .prop_map(|(sizes, members, labels)| {
            let inc: Vec<Vec<usize>> = members.into_iter().map(|m| vec![m]).collect();
            (build(&sizes, &inc), Prediction::from_vec(labels))
        })
}

fn params() -> impl Strategy<Value = CostParams> {
    (0.01f64..500.0, 0.0f64..0.95, prop::bool::ANY, 0.0f64..5.0, 0.0f64..5.0).prop_map(
        |(c, p, fixed, ci, ce)| {
            let p = CostParams::new(c, p, QaMode::Constant);
            if fixed {
                p.with_fixed_costs(ci, ce)
            } else {
                p
            }
        },
    )
}

proptest! {
    #[test]
    fn partition_is_exact((p, _) in instance()) {
        let part = partition_artifacts(&p);
        prop_assert_eq!(part.defective.len() + part.clean.len(), p.len());
        prop_assert!(part.defective.iter().all(|i| !part.clean.contains(i)));
        for d in p.defects() {
            prop_assert!(d.members().iter().all(|m| part.defective.contains(m)));
        }
    }

    #[test]
    fn outcome_is_total((p, h) in instance()) {
        for rel in Relationship::ALL {
            let v = project_view(&p, rel).unwrap();
            let out = classify(&v, &h).unwrap();
            prop_assert_eq!(out.cm.total() as usize, p.len());
            prop_assert_eq!(out.predicted.len() + out.missed.len(), v.defects().len());
            for &d in &out.predicted {
                prop_assert!(v.defects()[d].members().iter().all(|&m| h.get(m)));
            }
            for &d in &out.missed {
                prop_assert!(v.defects()[d].members().iter().any(|&m| !h.get(m)));
            }
        }
    }

    #[test]
    fn view_defect_counts((p, _) in instance()) {
        let pairs: usize = p.defects().iter().map(|d| d.cardinality()).sum();
        prop_assert_eq!(project_view(&p, Relationship::OneToM).unwrap().defects().len(), pairs);
        prop_assert_eq!(project_view(&p, Relationship::OneToOne).unwrap().defects().len(), p.n_defective());
        prop_assert_eq!(summarize(&project_view(&p, Relationship::OneToM).unwrap()).n_defects, pairs);
    }

    #[test]
    fn perfect_predictor_misses_nothing((p, _) in instance()) {
        let h = Prediction::truth(&p);
        for rel in Relationship::ALL {
            let out = classify(&project_view(&p, rel).unwrap(), &h).unwrap();
            prop_assert!(out.missed.is_empty());
            prop_assert_eq!((out.cm.fp, out.cm.fn_), (0, 0));
        }
    }

    #[test]
    fn single_member_views_agree((p, h) in single_member_instance(false)) {
        let nm = classify(&p, &h).unwrap();
        let om = classify(&project_view(&p, Relationship::OneToM).unwrap(), &h).unwrap();
        prop_assert_eq!((nm.predicted.len(), nm.missed.len()), (om.predicted.len(), om.missed.len()));
    }

    #[test]
    fn initializations_match_general_model((p, h) in instance(), prm in params()) {
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let direct = cost_init(&v, &out, &prm, kind).unwrap();
            let inputs = GeneralCostInputs::induced(&v, &prm, kind.qa_mode);
            let general = cost_general(&v, &out, &inputs).unwrap();
            prop_assert!(close(direct, general), "{}: {} vs {}", kind, direct, general);
        }
    }

    #[test]
    fn cost_is_affine_in_ratio((p, h) in instance(), prm in params(), c2 in 0.01f64..500.0) {
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let at = |c: f64| cost_init(&v, &out, &CostParams { c_ratio: c, ..prm }, kind).unwrap();
            let slope: f64 = out.missed.len() as f64
                + out.predicted.iter().map(|&d| qa_failure(prm.p_qf, v.defects()[d].cardinality()).unwrap()).sum::<f64>();
            let predicted = at(prm.c_ratio) + (c2 - prm.c_ratio) * slope;
            prop_assert!((at(c2) - predicted).abs() <= 1e-9 * at(c2).max(1.0));
            prop_assert!(slope >= 0.0);
        }
    }

    #[test]
    fn perfect_qa_costs_nothing_for_predicted_defects((p, h) in instance(), c in 0.01f64..100.0) {
        let prm = CostParams::new(c, 0.0, QaMode::Constant);
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let qa = match kind.qa_mode {
                QaMode::Constant => (out.cm.tp + out.cm.fp) as f64,
                QaMode::SizeAware => out.flagged_size as f64,
            };
            let missed = match kind.relationship {
                Relationship::OneToOne => out.cm.fn_ as f64,
                _ => out.missed.len() as f64,
            };
            prop_assert!(close(cost_init(&v, &out, &prm, kind).unwrap(), qa + missed * c));
        }
    }

    #[test]
    fn random_cost_endpoints((p, _) in instance(), prm in params()) {
        for qa_mode in QaMode::ALL {
            let prm = CostParams { qa_mode, ..prm };
            let none = cost_random(&p, 0.0, &prm).unwrap();
            prop_assert!(close(none, p.defects().len() as f64 * prm.c_ratio));
            let all = cost_random(&p, 1.0, &prm).unwrap();
            let qa: f64 = p.artifacts().iter().map(|a| qa_mode.qa_cost(a.size)).sum();
            let qf: f64 = p.defects().iter().map(|d| qa_failure(prm.p_qf, d.cardinality()).unwrap()).sum();
            prop_assert!(close(all, qa + qf * prm.c_ratio));
        }
    }

    #[test]
    fn qa_failure_is_monotone(p in 0.0f64..0.98, dp in 0.001f64..0.01, k in 1usize..40) {
        // Beyond this the probability rounds to 1.
        prop_assume!((1.0 - p - dp).powi(k as i32 + 1) > 1e-12);
        let f = qa_failure(p, k).unwrap();
        prop_assert!(qa_failure(p + dp, k).unwrap() > f);
        if p > 0.0 {
            prop_assert!(qa_failure(p, k + 1).unwrap() > f);
        }
    }

    #[test]
    fn random_qa_endpoints_match_boundaries((p, h) in instance(), prm in params()) {
        for qa_mode in QaMode::ALL {
            let prm = CostParams { qa_mode, ..prm };
            let out = classify(&p, &h).unwrap();
            let at0 = theorem_boundary(&p, &out, 0.0, &prm).unwrap();
            let lower = lower_boundary(&p, &out, &prm).unwrap();
            if !out.predicted.is_empty() {
                prop_assert!(at0.x < 0.0);
                prop_assert_eq!(at0.kind, ConditionKind::LowerBound);
            }
            prop_assert!(bounds_close(at0.threshold, lower) || out.predicted.is_empty());
            let at1 = theorem_boundary(&p, &out, 1.0, &prm).unwrap();
            let upper = upper_boundary(&p, &out, &prm).unwrap();
            if !out.missed.is_empty() {
                prop_assert!(at1.x > 0.0);
                prop_assert_eq!(at1.kind, ConditionKind::UpperBound);
                let clamped = at1.threshold.value().map(|t| ExtendedBound::Finite(t.max(0.0))).unwrap();
                prop_assert!(bounds_close(clamped, upper));
            } else {
                prop_assert_eq!(upper, ExtendedBound::Unbounded);
                prop_assert_eq!(at1.threshold, ExtendedBound::Unbounded);
            }
        }
    }

    #[test]
    fn closed_forms_match_general_boundaries((p, h) in instance(), prm in params()) {
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let induced = CostParams { qa_mode: kind.qa_mode, ..prm };
            let iv = boundary_interval(&v, &out, &prm, kind).unwrap();
            prop_assert!(bounds_close(iv.lower, lower_boundary(&v, &out, &induced).unwrap()));
            prop_assert!(bounds_close(iv.upper, upper_boundary(&v, &out, &induced).unwrap()));
        }
    }

    #[test]
    fn boundaries_grow_with_qa_failure((p, h) in instance(), lo in 0.0f64..0.9, hi in 0.0f64..0.9) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let a = boundary_interval(&v, &out, &CostParams::new(1.0, lo, kind.qa_mode), kind).unwrap();
            let b = boundary_interval(&v, &out, &CostParams::new(1.0, hi, kind.qa_mode), kind).unwrap();
            for (x, y) in [(a.lower, b.lower), (a.upper, b.upper)] {
                if let (Some(x), Some(y)) = (x.value(), y.value()) {
                    prop_assert!(y >= x * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn profit_inside_interval((p, h) in instance(), prm in params(), t in 0.05f64..0.95) {
        for kind in ModelKind::ALL {
            let v = project_view(&p, kind.relationship).unwrap();
            let out = classify(&v, &h).unwrap();
            let iv = boundary_interval(&v, &out, &prm, kind).unwrap();
            let (Some(l), Some(u)) = (iv.lower.value(), iv.upper.value()) else { continue };
            // Equal boundaries can come out one ulp apart; such an interval is empty.
            if u - l <= 1e-9 * u.max(1.0) {
                continue;
            }
            let c = l + t * (u - l);
            let at = CostParams { c_ratio: c, qa_mode: kind.qa_mode, ..prm };
            let cost = cost_init(&v, &out, &at, kind).unwrap();
            let baseline = cost_random(&v, 0.0, &at).unwrap().min(cost_random(&v, 1.0, &at).unwrap());
            prop_assert!(cost < baseline, "{}: {} vs {}", kind, cost, baseline);
        }
    }

    #[test]
    fn matrix_round_trip((p, _) in instance()) {
        prop_assert_eq!(parse_matrix(&write_matrix(&p)).unwrap(), p);
    }

    #[test]
    fn records_round_trip_and_trend_ignores_order((p, _) in instance(), seed in any::<u64>(), shift in 0usize..100) {
        let cfg = GridConfig {
            accuracies: vec![0.2, 0.6, 0.9],
            repetitions: 2,
            seed,
            ..GridConfig::default()
        };
        let records = run_grid(&p, &cfg).unwrap();
        let csv = emit_records(&records, Format::Csv);
        prop_assert_eq!(&parse_records(&csv, Format::Csv).unwrap(), &records);
        let json = emit_records(&records, Format::Json);
        prop_assert_eq!(&parse_records(&json, Format::Json).unwrap(), &records);

        let mut rotated = records.clone();
        let k = shift % rotated.len();
        rotated.rotate_left(k);
        rotated.reverse();
        for kind in ModelKind::ALL {
            for side in [BoundSide::Lower, BoundSide::Upper] {
                prop_assert_eq!(
                    trend(&records, Metric::Precision, kind, side, 20).unwrap(),
                    trend(&rotated, Metric::Precision, kind, side, 20).unwrap()
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degenerate_projects_agree_across_views((p, h) in single_member_instance(true), prm in params()) {
        for qa_mode in QaMode::ALL {
            let mut results = Vec::new();
            for rel in Relationship::ALL {
                let kind = ModelKind::new(qa_mode, rel);
                let v = project_view(&p, rel).unwrap();
                let out = classify(&v, &h).unwrap();
                results.push((cost_init(&v, &out, &prm, kind).unwrap(), boundary_interval(&v, &out, &prm, kind).unwrap()));
            }
            for w in results.windows(2) {
                prop_assert!(close(w[0].0, w[1].0));
                prop_assert!(bounds_close(w[0].1.lower, w[1].1.lower));
                prop_assert!(bounds_close(w[0].1.upper, w[1].1.upper));
            }
        }
    }
}
