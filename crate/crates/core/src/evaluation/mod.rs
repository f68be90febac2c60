//! Evaluation protocols: naming a Munsell chart against a reference naming, and
//! per-image true-positive ratios on mask-labelled datasets.

mod chart;
mod dataset;

pub use chart::{
    bundled_chart, evaluate_chart, load_chart, load_reference, parse_chart, parse_reference,
    render_chart_segmentation, ChartEvaluation, ChartNamingReference, ChartRendering, Chip,
    ChipOutcome, MunsellChart, ACHROMATIC_CHIPS, CHART_ROWS, CHIP_COUNT, HUE_COLUMNS,
    RENDER_BACKGROUND,
};
pub use dataset::{
    evaluate_dataset, evaluate_dataset_dir, true_positive_ratio, DatasetEvaluation, ItemFailure,
    ItemOutcome, LabelledImage, TermSummary,
};

/// Square count matrix with rows = expected term, columns = predicted term, as CSV.
pub(crate) fn confusion_csv(names: &[&str], counts: &[Vec<usize>]) -> String {
    let mut out = String::from("expected");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (name, row) in names.iter().zip(counts) {
        out.push_str(name);
        for c in row {
            out.push(',');
            out.push_str(&c.to_string());
        }
        out.push('\n');
    }
    out
}
