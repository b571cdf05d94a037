use alloc::vec::Vec;

use super::*;

fn run(history: &[(f64, u8)], gap: f64) -> (ComponentState, SessionClock) {
    let mut clock = SessionClock::new(gap);
    let mut st = ComponentState::default();
    for &(t, y) in history {
        st.update(clock.tick(t, None), y).unwrap();
    }
    (st, clock)
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn every_history_kind_is_zero_without_practice() {
    let st = ComponentState::default();
    let now = Moment {
        time: 100.0,
        session: 0,
    };
    for kind in FeatureKind::ALL {
        if !kind.is_history()
            || matches!(
                kind,
                FeatureKind::Prop | FeatureKind::Propdec | FeatureKind::Logitdec
            )
        {
            continue;
        }
        let params: Vec<f64> = kind.params().iter().map(|p| p.midpoint()).collect();
        assert_eq!(evaluate(kind, &st, &params, now), 0.0, "{kind}");
    }
}

#[test]
fn count_features() {
    let hist: Vec<(f64, u8)> = (0..9).map(|i| (i as f64, 1)).collect();
    let (st, _) = run(&hist, 1800.0);
    let now = Moment {
        time: 10.0,
        session: 0,
    };
    close(
        evaluate(FeatureKind::Logafm, &st, &[], now),
        libm::log(10.0),
        1e-12,
    );
    close(evaluate(FeatureKind::Lineafm, &st, &[], now), 9.0, 0.0);

    let (st, _) = run(&[(0.0, 1), (1.0, 0), (2.0, 1)], 1800.0);
    close(
        evaluate(FeatureKind::Expdecafm, &st, &[0.5], now),
        1.75,
        1e-15,
    );
}

#[test]
fn powafm_tracks_log_count_early_on() {
    let hist: Vec<(f64, u8)> = (0..10).map(|i| (i as f64, 1)).collect();
    let (st, _) = run(&hist, 1800.0);
    let now = Moment {
        time: 20.0,
        session: 0,
    };
    let pow = evaluate(FeatureKind::Powafm, &st, &[0.45], now);
    let log = evaluate(FeatureKind::Logafm, &st, &[], now);
    close(pow, 2.8183829312644537, 1e-12);
    close(log, 2.3978952727983707, 1e-12);
    assert!(pow / log < 1.5 && pow / log > 1.0);
}

#[test]
fn recency_values() {
    let (st, _) = run(&[(0.0, 1)], 1800.0);
    close(
        evaluate(
            FeatureKind::Recency,
            &st,
            &[0.7],
            Moment {
                time: 1.0,
                session: 0,
            },
        ),
        1.0,
        0.0,
    );
    close(
        evaluate(
            FeatureKind::Recency,
            &st,
            &[0.5],
            Moment {
                time: 100.0,
                session: 0,
            },
        ),
        0.1,
        1e-15,
    );
    // sub-second gaps are clamped to one second
    close(
        evaluate(
            FeatureKind::Recency,
            &st,
            &[0.5],
            Moment {
                time: 0.25,
                session: 0,
            },
        ),
        1.0,
        0.0,
    );
}

#[test]
fn base_value() {
    let (st, _) = run(&[(0.0, 1), (1.0, 1), (2.0, 0), (3.0, 1)], 1e9);
    let v = evaluate(
        FeatureKind::Base,
        &st,
        &[0.2],
        Moment {
            time: 10_000.0,
            session: 0,
        },
    );
    close(v, 5f64.ln() * 10_000f64.powf(-0.2), 1e-12);
    close(v, 0.25508, 1e-5);
}

#[test]
fn ppe_single_trial() {
    let (st, _) = run(&[(0.0, 1)], 1800.0);
    let v = evaluate(
        FeatureKind::Ppe,
        &st,
        &[0.3, 0.9, 0.1, 2.0],
        Moment {
            time: 100.0,
            session: 0,
        },
    );
    close(v, 100f64.powf(-0.1), 1e-12);
    close(v, 0.63096, 1e-5);
}

#[test]
fn performance_features() {
    let (st, _) = run(&[(0.0, 1), (1.0, 0), (2.0, 1), (3.0, 1)], 1800.0);
    let now = Moment {
        time: 4.0,
        session: 0,
    };
    close(evaluate(FeatureKind::Linecomp, &st, &[], now), 2.0, 0.0);

    let (st, _) = run(&[(0.0, 1), (1.0, 0), (2.0, 1)], 1800.0);
    close(
        evaluate(FeatureKind::Expdecsuc, &st, &[0.5], now),
        1.25,
        1e-15,
    );
    close(
        evaluate(FeatureKind::Expdecfail, &st, &[0.5], now),
        0.5,
        1e-15,
    );

    let (st, _) = run(&[(0.0, 0), (1.0, 0)], 1800.0);
    assert_eq!(evaluate(FeatureKind::Logsuc, &st, &[], now), 0.0);
}

#[test]
fn proportion_features() {
    let now = Moment {
        time: 50.0,
        session: 0,
    };
    let empty = ComponentState::new(0.8);
    assert_eq!(evaluate(FeatureKind::Propdec, &empty, &[0.8], now), 0.5);
    assert_eq!(evaluate(FeatureKind::Propdec2, &empty, &[0.8], now), 0.0);
    assert_eq!(evaluate(FeatureKind::Prop, &empty, &[], now), 0.5);
    assert_eq!(evaluate(FeatureKind::Logitdec, &empty, &[0.8], now), 0.0);

    let mut st = ComponentState::new(0.8);
    st.update(
        Moment {
            time: 0.0,
            session: 0,
        },
        1,
    )
    .unwrap();
    close(
        evaluate(FeatureKind::Propdec, &st, &[0.8], now),
        1.8 / 2.6,
        1e-15,
    );

    let (st, _) = run(&[(0.0, 1), (1.0, 1), (2.0, 0), (3.0, 1)], 1800.0);
    close(
        evaluate(FeatureKind::Logit, &st, &[1.0], now),
        2f64.ln(),
        1e-15,
    );
    for c in [0.1, 1.0, 3.5] {
        assert_eq!(
            evaluate(FeatureKind::Logit, &ComponentState::default(), &[c], now),
            0.0
        );
    }
}

#[test]
fn propdec2_never_goes_negative() {
    let outcomes = [0u8, 0, 1, 0, 1, 1, 0, 0, 0, 1];
    let mut st = ComponentState::new(0.7);
    let mut prev = 0.0;
    for (i, &y) in outcomes.iter().enumerate() {
        let v = evaluate(
            FeatureKind::Propdec2,
            &st,
            &[0.7],
            Moment {
                time: i as f64,
                session: 0,
            },
        );
        assert!(v >= 0.0);
        if i > 0 && outcomes[..i].iter().all(|&o| o == 0) {
            assert_eq!(v, prev);
        }
        prev = v;
        st.update(
            Moment {
                time: i as f64,
                session: 0,
            },
            y,
        )
        .unwrap();
    }
}

#[test]
fn mismatched_state_rate_replays_history() {
    let (st, _) = run(&[(0.0, 1), (1.0, 0), (2.0, 1)], 1800.0);
    // state streams at d=1; asking for d=0.5 recomputes
    close(
        evaluate(
            FeatureKind::Expdecsuc,
            &st,
            &[0.5],
            Moment {
                time: 3.0,
                session: 0,
            },
        ),
        1.25,
        1e-15,
    );
}

#[test]
fn neutral_limits() {
    let hist = [(0.0, 1), (40.0, 0), (100.0, 1), (5000.0, 1), (5010.0, 0)];
    let (st, mut clock) = run(&hist, 1800.0);
    let now = clock.tick(9000.0, None);
    let e = |k, p: &[f64]| evaluate(k, &st, p, now);
    close(e(FeatureKind::Expdecsuc, &[1.0]), 3.0, 1e-12);
    close(e(FeatureKind::Expdecfail, &[1.0]), 2.0, 1e-12);
    close(e(FeatureKind::Expdecafm, &[1.0]), 5.0, 1e-12);
    close(
        e(FeatureKind::Base, &[0.0]),
        e(FeatureKind::Logafm, &[]),
        1e-12,
    );
    close(
        e(FeatureKind::Base4, &[0.4, 1.0, 0.0, 1.0]),
        e(FeatureKind::Base, &[0.4]),
        1e-12,
    );
}

#[test]
fn base2_shrinks_between_session_time() {
    // two sessions: [0, 60] then [100000, 100030], evaluated at 100100
    let (st, mut clock) = run(
        &[(0.0, 1), (60.0, 1), (100_000.0, 1), (100_030.0, 0)],
        1800.0,
    );
    let now = clock.tick(100_100.0, None);
    let within: f64 = 60.0 + 30.0 + 70.0;
    let age: f64 = 100_100.0;
    let scaled: f64 = within + 0.5 * (age - within);
    let v = evaluate(FeatureKind::Base2, &st, &[0.3, 0.5], now);
    close(v, 5f64.ln() * scaled.powf(-0.3), 1e-12);
    // b = 1 recovers base
    close(
        evaluate(FeatureKind::Base2, &st, &[0.3, 1.0], now),
        evaluate(FeatureKind::Base, &st, &[0.3], now),
        1e-12,
    );
}

#[test]
fn catalog_names_round_trip() {
    for k in FeatureKind::ALL {
        assert_eq!(FeatureKind::from_name(k.name()), Some(k));
    }
    assert_eq!(
        FeatureKind::from_name("expdecfm"),
        Some(FeatureKind::Expdecafm)
    );
    assert_eq!(FeatureKind::from_name("nope"), None);
}
