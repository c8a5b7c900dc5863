//! Report rendering (machine JSON and aligned text tables) and
//! cross-run comparison.

use serde::{Deserialize, Serialize};

use crate::typology::ErrorType;

use super::{BenchError, Cell, Report};

/// Table layout of a rendered report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Total / Pos. / one column per error type.
    Table2,
    /// Total / one column per source model.
    Table3,
    /// Overall / -Positive / -Negative rows.
    Ablation,
}

impl std::str::FromStr for Layout {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "table2" | "per-type" => Ok(Layout::Table2),
            "table3" | "per-source" => Ok(Layout::Table3),
            "ablation" => Ok(Layout::Ablation),
            other => Err(BenchError::UnknownVariant(format!("layout {other}"))),
        }
    }
}

/// Output format of a rendered report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// JSON that parses back into [`Report`] losslessly.
    Machine,
    /// Aligned text table; percentages with two decimals.
    Table,
}

impl std::str::FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "machine" | "json" => Ok(Format::Machine),
            "table" | "text" => Ok(Format::Table),
            other => Err(BenchError::UnknownVariant(format!("format {other}"))),
        }
    }
}

fn pct(value: f64) -> String {
    format!("{:.2}", value * 100.0)
}

fn cell_pct(cell: Option<&Cell>) -> String {
    cell.map(|c| pct(c.accuracy))
        .unwrap_or_else(|| "-".to_string())
}

/// Render one report under a layout.
pub fn render_report(
    report: &Report,
    layout: Layout,
    format: Format,
) -> Result<String, BenchError> {
    validate_layout(report, layout)?;
    match format {
        Format::Machine => Ok(machine_json(report)),
        Format::Table => Ok(match layout {
            Layout::Table2 => per_type_table(report),
            Layout::Table3 => per_source_table(report),
            Layout::Ablation => render_ablation_table(std::slice::from_ref(report))?,
        }),
    }
}

fn validate_layout(report: &Report, layout: Layout) -> Result<(), BenchError> {
    match layout {
        Layout::Table2 if report.per_error_type.is_empty() => Err(BenchError::LayoutMismatch {
            layout,
            missing: "per-error-type cells".to_string(),
        }),
        Layout::Table3 if report.per_source.is_empty() => Err(BenchError::LayoutMismatch {
            layout,
            missing: "per-source cells".to_string(),
        }),
        _ => Ok(()),
    }
}

/// Machine form: pretty JSON with stable key order.
pub fn machine_json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

fn header_block(report: &Report) -> String {
    format!(
        "variant: {}  judge: {}  completed: {}/{}\ndataset: {}  config: {}\n",
        report.variant,
        report.judge_model,
        report.completed,
        report.total,
        &report.dataset_digest[..12.min(report.dataset_digest.len())],
        &report.config_digest[..12.min(report.config_digest.len())],
    )
}

fn per_type_table(report: &Report) -> String {
    let mut columns: Vec<(String, String)> = vec![
        ("Total".to_string(), pct(report.overall.accuracy)),
        ("Pos.".to_string(), cell_pct(report.positive.as_ref())),
    ];
    for error_type in ErrorType::ALL {
        if let Some(cell) = report.per_error_type.get(&error_type) {
            columns.push((format!("{error_type}."), pct(cell.accuracy)));
        }
    }
    render_columns(report, &columns)
}

fn per_source_table(report: &Report) -> String {
    let mut columns: Vec<(String, String)> =
        vec![("Total".to_string(), pct(report.overall.accuracy))];
    for (source, cell) in &report.per_source {
        columns.push((source.clone(), pct(cell.accuracy)));
    }
    render_columns(report, &columns)
}

fn render_columns(report: &Report, columns: &[(String, String)]) -> String {
    let widths: Vec<usize> = columns
        .iter()
        .map(|(h, v)| h.chars().count().max(v.chars().count()).max(6))
        .collect();
    let mut out = header_block(report);
    for ((header, _), width) in columns.iter().zip(&widths) {
        out.push_str(&format!("{header:>width$}  "));
    }
    out.push('\n');
    for ((_, value), width) in columns.iter().zip(&widths) {
        out.push_str(&format!("{value:>width$}  "));
    }
    out.push('\n');
    out
}

/// Ablation table: Overall / -Positive / -Negative rows, one column per
/// report (columns keep each report's variant name).
pub fn render_ablation_table(reports: &[Report]) -> Result<String, BenchError> {
    if reports.is_empty() {
        return Err(BenchError::NeedTwoReports);
    }
    let mut out = String::new();
    out.push_str(&format!("{:<12}", ""));
    for report in reports {
        out.push_str(&format!("{:>10}  ", report.variant));
    }
    out.push('\n');
    type RowGetter = fn(&Report) -> String;
    let rows: [(&str, RowGetter); 3] = [
        ("Overall", |r| pct(r.overall.accuracy)),
        ("-Positive", |r| cell_pct(r.positive.as_ref())),
        ("-Negative", |r| cell_pct(r.negative.as_ref())),
    ];
    for (label, get) in rows {
        out.push_str(&format!("{label:<12}"));
        for report in reports {
            out.push_str(&format!("{:>10}  ", get(report)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// One compared cell: the baseline value and per-report deltas, in
/// percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub cell: String,
    pub baseline: f64,
    /// Delta against the baseline per non-baseline report; `None` where a
    /// report lacks the cell.
    pub deltas: Vec<Option<f64>>,
}

/// Cross-run comparison over a shared dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    pub dataset_digest: String,
    /// Variant names, baseline first.
    pub variants: Vec<String>,
    pub rows: Vec<DeltaRow>,
}

impl DeltaTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<12}{:>10}  ", "", self.variants[0]));
        for variant in &self.variants[1..] {
            out.push_str(&format!("{:>10}  ", format!("Δ{variant}")));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<12}{:>10}  ", row.cell, pct(row.baseline)));
            for delta in &row.deltas {
                match delta {
                    Some(d) => out.push_str(&format!("{:>+10.2}  ", d)),
                    None => out.push_str(&format!("{:>10}  ", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Compare reports cell by cell against the first one. All reports must
/// cover the same dataset digest.
pub fn compare_runs(reports: &[Report]) -> Result<DeltaTable, BenchError> {
    if reports.len() < 2 {
        return Err(BenchError::NeedTwoReports);
    }
    let baseline = &reports[0];
    for report in &reports[1..] {
        if report.dataset_digest != baseline.dataset_digest {
            return Err(BenchError::DatasetMismatch(
                baseline.dataset_digest.clone(),
                report.dataset_digest.clone(),
            ));
        }
    }

    let points = |base: f64, other: f64| (other - base) * 100.0;
    let mut rows = Vec::new();

    let mut push_row = |cell: String, base: Option<Cell>, get: &dyn Fn(&Report) -> Option<Cell>| {
        let Some(base) = base else { return };
        let deltas = reports[1..]
            .iter()
            .map(|r| get(r).map(|c| points(base.accuracy, c.accuracy)))
            .collect();
        rows.push(DeltaRow {
            cell,
            baseline: base.accuracy,
            deltas,
        });
    };

    push_row("Overall".into(), Some(baseline.overall), &|r| {
        Some(r.overall)
    });
    push_row("-Positive".into(), baseline.positive, &|r| r.positive);
    push_row("-Negative".into(), baseline.negative, &|r| r.negative);
    for error_type in ErrorType::ALL {
        push_row(
            format!("{error_type}."),
            baseline.per_error_type.get(&error_type).copied(),
            &move |r| r.per_error_type.get(&error_type).copied(),
        );
    }
    let sources: Vec<String> = baseline.per_source.keys().cloned().collect();
    for source in sources {
        let key = source.clone();
        push_row(source, baseline.per_source.get(&key).copied(), &move |r| {
            r.per_source.get(&key).copied()
        });
    }

    Ok(DeltaTable {
        dataset_digest: baseline.dataset_digest.clone(),
        variants: reports.iter().map(|r| r.variant.clone()).collect(),
        rows,
    })
}
