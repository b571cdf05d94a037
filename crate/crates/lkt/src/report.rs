//! Text renderings of a cross-validation report.

use std::fmt::Write;

use lkt_core::cv::CvReport;

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
}

/// Significance marker: `**` when the adjusted p is below .05, `*` when only
/// the raw p is.
pub fn stars(p: f64, p_adj: f64) -> &'static str {
    if p_adj < 0.05 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Markdown report: metric table in model order, then the pairwise grid.
pub fn markdown(report: &CvReport, header_line: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "<!-- {header_line} -->");
    let _ = writeln!(s, "# Model comparison\n");
    let students = report
        .records
        .first()
        .map_or(0, |r| r.train.len() + r.test.len());
    let _ = writeln!(
        s,
        "Split-half student-stratified cross-validation: {} runs, seed {}, {} students per run.\n",
        report.runs, report.seed, students
    );
    let _ = writeln!(
        s,
        "| # | Model | R²_test | RMSE_test | AUC_test | Failed runs |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for (i, m) in report.summary.iter().enumerate() {
        let name = if m.label == m.spec {
            format!("`{}`", m.spec)
        } else {
            format!("{} `{}`", m.label, m.spec)
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            i + 1,
            name,
            num(m.mean_mcfadden),
            num(m.mean_rmse),
            num(m.mean_auc),
            m.failed_runs
        );
    }
    if let Some(pw) = &report.pairwise {
        let n = report.summary.len();
        let _ = writeln!(s, "\n## Pairwise comparisons\n");
        let _ = writeln!(
            s,
            "Cell (row, column): mean over runs of the paired t of per-subject test RMSE, row minus column \
             (negative favours the row), df = {}. `*` raw p < .05, `**` Benjamini-Yekutieli adjusted p < .05.\n",
            pw.df
        );
        let _ = write!(s, "|   |");
        for j in 0..n {
            let _ = write!(s, " {} |", j + 1);
        }
        let _ = write!(s, "\n|---|");
        for _ in 0..n {
            let _ = write!(s, "---|");
        }
        s.push('\n');
        for i in 0..n {
            let _ = write!(s, "| {} |", i + 1);
            for j in 0..n {
                if i == j {
                    let _ = write!(s, " . |");
                } else {
                    let _ = write!(
                        s,
                        " {:.2}{} |",
                        pw.t[i][j],
                        stars(pw.p[i][j], pw.p_adj[i][j])
                    );
                }
            }
            s.push('\n');
        }
        let _ = writeln!(s, "\n### p-values (raw / adjusted)\n");
        let _ = writeln!(s, "| Pair | t | p | p_adj |");
        let _ = writeln!(s, "|---|---|---|---|");
        for i in 0..n {
            for j in i + 1..n {
                let _ = writeln!(
                    s,
                    "| {} vs {} | {:.3} | {:.4} | {:.4} |",
                    i + 1,
                    j + 1,
                    pw.t[i][j],
                    pw.p[i][j],
                    pw.p_adj[i][j]
                );
            }
        }
    }
    s
}

/// Tab-separated metric table, one row per model.
pub fn tsv(report: &CvReport, header_line: &str) -> String {
    let mut s =
        format!("# {header_line}\nmodel\tlabel\tspec\tr2_test\trmse_test\tauc_test\tfailed_runs\n");
    for (i, m) in report.summary.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            m.label,
            m.spec,
            num(m.mean_mcfadden),
            num(m.mean_rmse),
            num(m.mean_auc),
            m.failed_runs
        );
    }
    s
}
