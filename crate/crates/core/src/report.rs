//! CSV and Markdown renderings of [`MetricReport`]s on the 0–100 scale.
//!
//! CSV is canonical: one row per cell followed by one row per aggregate.
//! The Markdown output carries the same rows, with a summary table in
//! front.

use std::io::Write;

use crate::error::Result;
use crate::evaluate::{Metric, MetricFamily, MetricReport};

/// Scene label used for a report pooled over every input scene.
pub const ALL_SCENES: &str = "all";

const CSV_HEADER: &str = "scene,kind,metric,class,threshold,value,n_gt,n_det,n_tp,flag";

fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.4}", v * 100.0),
        None => String::new(),
    }
}

fn fmt_threshold(t: f64) -> String {
    // shortest representation that round-trips
    format!("{t}")
}

/// One scored row of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scene: String,
    pub aggregate: bool,
    pub metric: String,
    pub class_label: String,
    pub threshold: String,
    pub value: String,
    pub n_gt: String,
    pub n_det: String,
    pub n_tp: String,
    pub flag: String,
}

/// Flattens labelled reports into rows in canonical order.
pub fn rows(reports: &[(&str, &MetricReport)]) -> Vec<Row> {
    let mut out = Vec::new();
    for (scene, report) in reports {
        for c in &report.cells {
            let flag = if c.no_ground_truth {
                "no_ground_truth"
            } else if c.ap.is_none() {
                "excluded"
            } else {
                ""
            };
            out.push(Row {
                scene: scene.to_string(),
                aggregate: false,
                metric: c.metric.cell_name().into(),
                class_label: c.class_label.clone(),
                threshold: fmt_threshold(c.threshold),
                value: fmt_value(c.ap),
                n_gt: c.n_gt.to_string(),
                n_det: c.n_det.to_string(),
                n_tp: c.n_tp.to_string(),
                flag: flag.into(),
            });
        }
        for a in &report.aggregates {
            out.push(Row {
                scene: scene.to_string(),
                aggregate: true,
                metric: a.metric.aggregate_name().into(),
                class_label: String::new(),
                threshold: String::new(),
                value: fmt_value(a.value),
                n_gt: String::new(),
                n_det: String::new(),
                n_tp: String::new(),
                flag: if a.value.is_none() { "excluded".into() } else { String::new() },
            });
        }
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(reports: &[(&str, &MetricReport)], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows(reports) {
        let fields = [
            r.scene.as_str(),
            if r.aggregate { "aggregate" } else { "cell" },
            &r.metric,
            &r.class_label,
            &r.threshold,
            &r.value,
            &r.n_gt,
            &r.n_det,
            &r.n_tp,
            &r.flag,
        ];
        let line: Vec<String> = fields.iter().map(|f| csv_escape(f)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Summary columns in display order; metrics absent from every report are
/// skipped.
fn summary_columns(reports: &[(&str, &MetricReport)]) -> Vec<Metric> {
    let order = [
        Metric::MAP,
        Metric::L_MAP,
        Metric::P_MAP,
        Metric::LP_MAP,
        Metric::MAHS,
        Metric::new(MetricFamily::Heading, true),
        Metric::MAP_IOU,
        Metric::new(MetricFamily::Iou, true),
        Metric::MAP_CORNER,
        Metric::new(MetricFamily::Corner, true),
    ];
    order
        .into_iter()
        .filter(|m| reports.iter().any(|(_, r)| r.metrics().contains(m)))
        .collect()
}

pub fn write_markdown<W: Write>(reports: &[(&str, &MetricReport)], mut w: W) -> Result<()> {
    let columns = summary_columns(reports);
    write!(w, "| scene |")?;
    for m in &columns {
        write!(w, " {m} |")?;
    }
    writeln!(w)?;
    write!(w, "|---|")?;
    for _ in &columns {
        write!(w, "---:|")?;
    }
    writeln!(w)?;
    for (scene, report) in reports {
        write!(w, "| {scene} |")?;
        for m in &columns {
            let v = report.aggregates.iter().find(|a| a.metric == *m).and_then(|a| a.value);
            match v {
                Some(v) => write!(w, " {:.1} |", v * 100.0)?,
                None => write!(w, " – |")?,
            }
        }
        writeln!(w)?;
    }

    writeln!(w)?;
    writeln!(w, "| scene | metric | class | threshold | value | n_gt | n_det | n_tp | flag |")?;
    writeln!(w, "|---|---|---|---:|---:|---:|---:|---:|---|")?;
    for r in rows(reports) {
        writeln!(
            w,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            r.scene, r.metric, r.class_label, r.threshold, r.value, r.n_gt, r.n_det, r.n_tp, r.flag
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{Aggregate, Cell};

    fn report() -> MetricReport {
        MetricReport {
            cells: vec![
                Cell {
                    metric: Metric::MAP,
                    class_label: "car".into(),
                    threshold: 0.5,
                    ap: Some(0.75),
                    n_gt: 4,
                    n_det: 3,
                    n_tp: 3,
                    no_ground_truth: false,
                },
                Cell {
                    metric: Metric::MAP,
                    class_label: "bus".into(),
                    threshold: 0.5,
                    ap: None,
                    n_gt: 0,
                    n_det: 0,
                    n_tp: 0,
                    no_ground_truth: false,
                },
            ],
            aggregates: vec![Aggregate {
                metric: Metric::MAP,
                value: Some(0.75),
            }],
            ignored_detections: 0,
        }
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        write_csv(&[(ALL_SCENES, &report())], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "all,cell,AP@Center,car,0.5,75.0000,4,3,3,");
        assert_eq!(lines[2], "all,cell,AP@Center,bus,0.5,,0,0,0,excluded");
        assert_eq!(lines[3], "all,aggregate,mAP,,,75.0000,,,,");
    }

    #[test]
    fn markdown_summary() {
        let mut buf = Vec::new();
        write_markdown(&[("s1", &report())], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("| scene | mAP |\n|---|---:|\n| s1 | 75.0 |\n"));
        assert!(text.contains("| s1 | AP@Center | bus | 0.5 |  | 0 | 0 | 0 | excluded |"));
    }

    #[test]
    fn escaping() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("plain"), "plain");
    }
}
