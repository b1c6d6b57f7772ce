use crate::metrics::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// One line of the aggregate table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub method: String,
    pub scheme: String,
    pub summary: Summary,
}

const CSV_HEADER: [&str; 9] = [
    "method",
    "scheme",
    "n_splits",
    "accuracy_mean",
    "accuracy_std",
    "macro_f1_mean",
    "macro_f1_std",
    "error_rate_mean",
    "error_rate_std",
];

fn md_cell(s: &str) -> String {
    s.replace('\\', "\\\\").replace('|', "\\|").replace('\n', " ")
}

/// Aggregate metrics, one row per (method, scheme) in input order.
///
/// CSV carries mean and standard deviation in separate columns with six
/// decimals; markdown shows `mean ± std` with four.
pub fn emit_metric_table(rows: &[MetricRow], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for r in rows {
                let s = &r.summary;
                w.write_record([
                    r.method.clone(),
                    r.scheme.clone(),
                    s.n_records.to_string(),
                    format!("{:.6}", s.accuracy.mean),
                    format!("{:.6}", s.accuracy.std),
                    format!("{:.6}", s.macro_f1.mean),
                    format!("{:.6}", s.macro_f1.std),
                    format!("{:.6}", s.error_rate.mean),
                    format!("{:.6}", s.error_rate.std),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
        }
        TableFormat::Markdown => {
            let mut out = String::from("| method | scheme | splits | accuracy | macro-F1 |\n|---|---|---:|---:|---:|\n");
            for r in rows {
                let s = &r.summary;
                out.push_str(&format!(
                    "| {} | {} | {} | {:.4} ± {:.4} | {:.4} ± {:.4} |\n",
                    md_cell(&r.method),
                    md_cell(&r.scheme),
                    s.n_records,
                    s.accuracy.mean,
                    s.accuracy.std,
                    s.macro_f1.mean,
                    s.macro_f1.std
                ));
            }
            out
        }
    }
}
