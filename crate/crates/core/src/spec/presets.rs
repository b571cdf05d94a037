//! Named comparison models: `table2:1`..`table2:12` (student-adaptive main
//! comparison models) and `table3:1`..`table3:6` (student-variance models).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{parse_model, ModelSpec, SpecError};

const STUDENT: &str = "propdec(Student, d=?) + intercept(KC)";

pub const TABLE2: [(&str, &str); 12] = [
    ("AFM", "lineafm$(KC)"),
    ("AFM", "logafm$(KC)"),
    ("PFA", "linesuc$(KC) + linefail$(KC)"),
    ("PFA", "logsuc$(KC) + logfail$(KC)"),
    ("PFA", "logsuc$(KC) + logfail$(KC) + recency$(KC, d=?)"),
    ("PFA-Decay", "expdecsuc$(KC, d=?) + expdecfail$(KC, d=?)"),
    ("R-PFA", "propdec$(KC, d=?)"),
    ("R-PFA", "propdec$(KC, d=?) + logfail$(KC)"),
    ("new", "propdec$(KC, d=?) + expdecfail$(KC, d=?)"),
    ("PPE", "propdec$(KC, d=?) + ppe$(KC, c=?, x=?, b=?, m=?)"),
    ("new", "propdec$(KC, d=?) + base2$(KC, d=?, b=?)"),
    (
        "new",
        "propdec$(KC, d=?) + base4$(KC, d=?, b=?, xi=?, gamma=?)",
    ),
];

pub const TABLE3: [&str; 6] = [
    "intercept@(Student)",
    "intercept(Student)",
    "propdec(Student, d=?)",
    "propdec2(Student, d=?)",
    "logitdec(Student, d=?)",
    "intercept(Student) + propdec(Student, d=?)",
];

/// Spec text of a preset such as `table2:4`.
pub fn preset_text(name: &str) -> Result<String, SpecError> {
    let unknown = || SpecError::UnknownPreset(name.into());
    let (table, row) = name.split_once(':').ok_or_else(unknown)?;
    let row: usize = row.parse().map_err(|_| unknown())?;
    match table {
        "table2" if (1..=12).contains(&row) => Ok(format!("{STUDENT} + {}", TABLE2[row - 1].1)),
        "table3" if (1..=6).contains(&row) => Ok(TABLE3[row - 1].into()),
        _ => Err(unknown()),
    }
}

pub fn preset(name: &str) -> Result<ModelSpec, SpecError> {
    parse_model(&preset_text(name)?)
}

/// Expands `table2:*` / `table3:*` in table order; other names pass through.
pub fn expand(name: &str) -> Result<Vec<String>, SpecError> {
    let rows = match name {
        "table2:*" => 12,
        "table3:*" => 6,
        _ => {
            preset_text(name)?;
            return Ok(alloc::vec![name.into()]);
        }
    };
    let table = &name[..6];
    Ok((1..=rows).map(|r| format!("{table}:{r}")).collect())
}
