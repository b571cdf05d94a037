use lkt_core::cv::{evaluate_run, pairwise_compare, split_for_run, CvConfig};
use lkt_core::simulate::{generate, SynthConfig};
use lkt_core::{parse_model, split_half_cv};

fn data() -> lkt_core::Dataset {
    generate(&SynthConfig {
        students: 30,
        kcs: 4,
        trials: 40,
        seed: 3,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn specs() -> Vec<lkt_core::ModelSpec> {
    [
        "intercept(KC) + logafm(KC)",
        "intercept(KC)",
        "intercept(KC) + logafm(KC)",
    ]
    .iter()
    .map(|s| parse_model(s).unwrap())
    .collect()
}

#[test]
fn same_seed_same_report() {
    let cfg = CvConfig {
        runs: 4,
        seed: 5,
        ..CvConfig::default()
    };
    let a = split_half_cv(&data(), &specs(), &cfg).unwrap();
    let b = split_half_cv(&data(), &specs(), &cfg).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn every_student_lands_in_one_fold_and_models_share_it() {
    let ds = data();
    let cfg = CvConfig {
        runs: 3,
        seed: 1,
        ..CvConfig::default()
    };
    let rep = split_half_cv(&ds, &specs(), &cfg).unwrap();
    for r in &rep.records {
        let mut all: Vec<&String> = r.train.iter().chain(&r.test).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 30);
        assert_eq!(r.train.len(), 15);
        for m in &r.models {
            assert_eq!(m.subject_rmse.len(), r.test.len());
        }
    }
    assert_ne!(rep.records[0].test, rep.records[1].test);
}

#[test]
fn more_runs_keep_the_earlier_records() {
    let ds = data();
    let short = CvConfig {
        runs: 2,
        seed: 8,
        ..CvConfig::default()
    };
    let long = CvConfig {
        runs: 4,
        ..short.clone()
    };
    let a = split_half_cv(&ds, &specs()[..2], &short).unwrap();
    let b = split_half_cv(&ds, &specs()[..2], &long).unwrap();
    assert_eq!(a.records[..], b.records[..2]);
}

#[test]
fn identical_models_tie_and_t_is_antisymmetric() {
    let rep = split_half_cv(
        &data(),
        &specs(),
        &CvConfig {
            runs: 3,
            seed: 2,
            ..CvConfig::default()
        },
    )
    .unwrap();
    let pw = rep.pairwise.as_ref().unwrap();
    assert_eq!(pw.t[0][2], 0.0);
    assert_eq!(pw.p[0][2], 1.0);
    assert_eq!(pw.zero_variance_runs[0][2], 3);
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(pw.t[i][j], -pw.t[j][i]);
            assert_eq!(pw.p[i][j], pw.p[j][i]);
            assert!(pw.p_adj[i][j] >= pw.p[i][j] && pw.p_adj[i][j] <= 1.0);
        }
    }
    assert_eq!(pw.df, 14.0);
}

#[test]
fn runs_are_order_independent() {
    let ds = data();
    let cfg = CvConfig {
        runs: 3,
        seed: 4,
        ..CvConfig::default()
    };
    let forward: Vec<_> = (0..3)
        .map(|r| evaluate_run(&ds, &specs(), r, &cfg).unwrap())
        .collect();
    let backward: Vec<_> = (0..3)
        .rev()
        .map(|r| evaluate_run(&ds, &specs(), r, &cfg).unwrap())
        .collect();
    let a = lkt_core::cv::assemble(forward, &specs(), None, &cfg);
    let b = lkt_core::cv::assemble(backward, &specs(), None, &cfg);
    assert_eq!(a, b);
    assert_eq!(pairwise_compare(&a.records, 3), a.pairwise);
}

#[test]
fn failing_model_is_flagged_not_fatal() {
    let ds = data();
    let bad = parse_model("intercept(KC) + numeric(Missing)").unwrap();
    let specs = vec![parse_model("intercept(KC)").unwrap(), bad];
    let rep = split_half_cv(
        &ds,
        &specs,
        &CvConfig {
            runs: 2,
            seed: 1,
            ..CvConfig::default()
        },
    )
    .unwrap();
    assert_eq!(rep.summary[1].failed_runs, 2);
    assert!(rep.records[0].models[1]
        .error
        .as_deref()
        .unwrap()
        .contains("Missing"));
    assert_eq!(rep.pairwise.unwrap().runs_used[0][1], 0);
}

#[test]
fn split_sizes_follow_student_count() {
    let cfg = CvConfig::default();
    for n in 2..12 {
        let s = split_for_run(n, 0, &cfg);
        assert_eq!(s.train.len(), n.div_ceil(2));
        assert_eq!(s.train.len() + s.test.len(), n);
    }
}
