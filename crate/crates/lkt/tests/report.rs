use lkt::report::{markdown, stars, tsv};
use lkt_core::cv::{CvReport, ModelSummary, Pairwise};

fn summary(label: &str, r2: f64) -> ModelSummary {
    ModelSummary {
        label: label.into(),
        spec: format!("spec of {label}"),
        mean_mcfadden: Some(r2),
        mean_rmse: Some(0.4),
        mean_auc: Some(0.7),
        failed_runs: 0,
    }
}

fn report() -> CvReport {
    let t = vec![
        vec![0.0, -3.0, 1.0],
        vec![3.0, 0.0, 2.5],
        vec![-1.0, -2.5, 0.0],
    ];
    let p = vec![
        vec![1.0, 0.001, 0.3],
        vec![0.001, 1.0, 0.03],
        vec![0.3, 0.03, 1.0],
    ];
    let p_adj = vec![
        vec![1.0, 0.01, 0.5],
        vec![0.01, 1.0, 0.08],
        vec![0.5, 0.08, 1.0],
    ];
    CvReport {
        seed: 7,
        runs: 0,
        subsample: None,
        summary: vec![
            summary("first", 0.2),
            summary("second", 0.1),
            summary("third", 0.15),
        ],
        pairwise: Some(Pairwise {
            t,
            p,
            p_adj,
            df: 9.0,
            runs_used: vec![vec![0; 3]; 3],
            zero_variance_runs: vec![vec![0; 3]; 3],
        }),
        records: Vec::new(),
    }
}

#[test]
fn star_convention() {
    assert_eq!(stars(0.001, 0.01), "**");
    assert_eq!(stars(0.03, 0.08), "*");
    assert_eq!(stars(0.3, 0.5), "");
}

#[test]
fn markdown_keeps_model_order_and_marks_the_grid() {
    let md = markdown(&report(), "lkt 0.1.0 fingerprint=abc");
    assert!(md.starts_with("<!-- lkt 0.1.0 fingerprint=abc -->"));
    let rows: Vec<&str> = md
        .lines()
        .filter(|l| l.starts_with("| ") && l.contains("spec of"))
        .collect();
    assert_eq!(rows.len(), 3);
    for (row, label) in rows.iter().zip(["first", "second", "third"]) {
        assert!(row.contains(label));
    }
    let grid: Vec<&str> = md
        .lines()
        .filter(|l| {
            (l.starts_with("| 1 |") || l.starts_with("| 2 |") || l.starts_with("| 3 |"))
                && !l.contains("spec of")
        })
        .collect();
    assert_eq!(grid[0], "| 1 | . | -3.00** | 1.00 |");
    assert_eq!(grid[1], "| 2 | 3.00** | . | 2.50* |");
    assert_eq!(grid[2], "| 3 | -1.00 | -2.50* | . |");
}

#[test]
fn tsv_has_one_row_per_model() {
    let text = tsv(&report(), "h");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[2],
        "1\tfirst\tspec of first\t0.2000\t0.4000\t0.7000\t0"
    );
}
