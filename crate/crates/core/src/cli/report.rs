//! CSV and text output.

use std::io::{self, Write};

use crate::verify::{DiagnosticsRow, Verdict};

pub const CSV_HEADER: &str =
    "t,unitarity_defect,norm_phys,res_naive,res_corrected,res_metric,res_qh";

/// 17 significant digits, enough to round-trip any f64.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[DiagnosticsRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let fields = [
            r.t,
            r.unitarity_defect,
            r.norm_phys,
            r.res_naive,
            r.res_corrected,
            r.res_metric,
            r.res_qh,
        ];
        let line: Vec<String> = fields.iter().map(|&x| format_number(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn csv_string(rows: &[DiagnosticsRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn write_verdicts<W: Write>(verdicts: &[Verdict], mut w: W) -> io::Result<()> {
    for v in verdicts {
        writeln!(w, "{v}")?;
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    if failed == 0 {
        writeln!(w, "all {} checks passed", verdicts.len())
    } else {
        writeln!(w, "{failed} of {} checks failed", verdicts.len())
    }
}
