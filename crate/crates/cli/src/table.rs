//! CSV rendering of sweep and verification tables.

use ridgepca::SweepRow;

pub const SWEEP_HEADER: [&str; 10] = [
    "lambda",
    "ridge_variance",
    "ridge_bias",
    "ridge_risk",
    "pca_variance",
    "pca_bias",
    "pca_risk",
    "ratio",
    "max_term_ratio",
    "bound_holds",
];

pub const VERIFY_HEADER: [&str; 5] = [
    "empirical_ridge",
    "empirical_ridge_se",
    "empirical_pca",
    "empirical_pca_se",
    "agrees",
];

/// Monte Carlo columns appended to a sweep row by `verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalColumns {
    pub ridge: f64,
    pub ridge_se: f64,
    pub pca: f64,
    pub pca_se: f64,
    pub agrees: bool,
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn sweep_fields(row: &SweepRow) -> Vec<String> {
    let mut fields: Vec<String> = [
        row.lambda,
        row.ridge_variance,
        row.ridge_bias,
        row.ridge_risk,
        row.pca_variance,
        row.pca_bias,
        row.pca_risk,
        row.ratio,
        row.max_term_ratio,
    ]
    .iter()
    .map(|&v| format_number(v))
    .collect();
    fields.push(row.bound_holds.to_string());
    fields
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory csv writer cannot fail");
    String::from_utf8(bytes).expect("csv output is ascii")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = writer();
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(sweep_fields(row)).expect("in-memory write");
    }
    finish(w)
}

pub fn verify_csv(rows: &[(SweepRow, EmpiricalColumns)]) -> String {
    let mut w = writer();
    w.write_record(SWEEP_HEADER.iter().chain(VERIFY_HEADER.iter()))
        .expect("in-memory write");
    for (row, emp) in rows {
        let mut fields = sweep_fields(row);
        fields.extend(
            [emp.ridge, emp.ridge_se, emp.pca, emp.pca_se]
                .iter()
                .map(|&v| format_number(v)),
        );
        fields.push(emp.agrees.to_string());
        w.write_record(fields).expect("in-memory write");
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [7.0 / 12.0, 0.1, 1e-300, 4.0, 0.0, 123456.789e10] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(0.75), "7.5000000000000000e-1");
    }

    #[test]
    fn header_is_exact() {
        let csv = sweep_csv(&[]);
        assert_eq!(
            csv,
            "lambda,ridge_variance,ridge_bias,ridge_risk,pca_variance,pca_bias,pca_risk,ratio,max_term_ratio,bound_holds\n"
        );
    }
}
