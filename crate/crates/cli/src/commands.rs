use std::fmt;
use std::path::Path;

use chromaterm_core::adaptation::{adapt_model, AdaptationConfig};
use chromaterm_core::dataset::{scan_dataset, scan_term_dir, DatasetEntry};
use chromaterm_core::evaluation::{
    bundled_chart, evaluate_chart, evaluate_dataset_dir, load_chart, load_reference,
    render_chart_segmentation,
};
use chromaterm_core::fitting::{
    build_ground_truth, extend_model, fit_model, FitConfig, FitReport, TrainingExample,
};
use chromaterm_core::image_io::load_lab_image;
use chromaterm_core::model_file::{model_to_json, read_model};
use chromaterm_core::{name_image, ColourModel, Error};

use crate::output::write_atomic;
use crate::{EvalArgs, ExtendArgs, FitArgs, FitOptions, NameArgs};

/// `--munsell` value selecting the built-in chip table.
pub const BUNDLED_CHART: &str = "bundled";
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Fit { .. } | Error::NoSupport { .. } => EXIT_NUMERICAL,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

impl FitOptions {
    fn config(&self) -> FitConfig {
        FitConfig {
            max_iterations: self.iterations as usize,
            tolerance: self.tolerance,
            bin_size: self.bin_size,
            seed: self.seed,
            restarts: self.restarts,
        }
    }
}

fn print_report(r: &FitReport) {
    println!(
        "term={} objective={:.6e} initial={:.6e} bins={} iterations={} converged={}",
        r.term, r.final_objective, r.initial_objective, r.bins, r.iterations, r.converged
    );
    if !r.improved {
        log::warn!(
            "term '{}': no step improved on the initial ellipsoid",
            r.term
        );
    }
}

pub fn fit(a: &FitArgs) -> CliResult {
    let config = a.options.config();
    let entries = scan_dataset(&a.gt_dir)?;
    let examples = entries
        .iter()
        .map(TrainingExample::<f64>::from_entry)
        .collect::<Result<Vec<_>, _>>()?;
    let gt = build_ground_truth(&examples, config.bin_size)?;
    log::info!(
        "fitting {} terms on {} bins",
        gt.term_names().len(),
        gt.len()
    );
    let (model, reports) = fit_model(gt.term_names(), &gt, &config)?;
    write_atomic(&a.out, model_to_json(&model).as_bytes())?;
    for r in &reports {
        print_report(r);
    }
    Ok(())
}

fn check_file_names(model: &ColourModel<f64>) -> CliResult {
    for n in model.names() {
        if n.contains(['/', '\\']) || n == "." || n == ".." {
            return Err(CliError::data(format!(
                "term name '{n}' cannot be used as a file name"
            )));
        }
    }
    Ok(())
}

pub fn name(a: &NameArgs) -> CliResult {
    let mut model = read_model::<f64>(&a.model)?;
    if model.len() > 256 {
        return Err(CliError::data("label PNGs hold at most 256 terms"));
    }
    let image = load_lab_image::<f64>(&a.input)?;
    if let Some(gain) = a.adapt {
        model = adapt_model(&model, &image, &AdaptationConfig::with_gain(gain))?;
    }
    let naming = name_image(&model, &image, a.maps.is_some());
    let labels = naming.label_png(&model);
    let maps = naming.map_pngs();
    if let Some(dir) = &a.maps {
        check_file_names(&model)?;
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
        for (term, png) in model.names().iter().zip(&maps) {
            write_atomic(&dir.join(format!("{term}.png")), png)?;
        }
    }
    write_atomic(&a.out, &labels)?;
    println!("pixels={}", naming.labels.len());
    for (term, n) in model.names().iter().zip(naming.histogram(model.len())) {
        println!("term.{term}={n}");
    }
    Ok(())
}

fn example_entries(
    name: &str,
    paths: &[std::path::PathBuf],
) -> Result<Vec<DatasetEntry>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            out.extend(scan_term_dir(name, p)?);
        } else if p.is_file() {
            let mask = match (p.parent(), p.file_name()) {
                (Some(dir), Some(file)) => {
                    Some(dir.join("masks").join(file)).filter(|m| m.is_file())
                }
                _ => None,
            };
            out.push(DatasetEntry {
                term: name.to_string(),
                image: p.clone(),
                mask,
            });
        } else {
            return Err(CliError::data(format!(
                "{}: no such file or directory",
                p.display()
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::data(format!("no example images for '{name}'")));
    }
    Ok(out)
}

pub fn extend(a: &ExtendArgs) -> CliResult {
    let model = read_model::<f64>(&a.model)?;
    if model.index_of(&a.name).is_some() {
        return Err(Error::DuplicateTerm(a.name.clone()).into());
    }
    let entries = example_entries(&a.name, &a.examples)?;
    let examples = entries
        .iter()
        .map(TrainingExample::<f64>::from_entry)
        .collect::<Result<Vec<_>, _>>()?;
    let (extended, report) = extend_model(&model, &a.name, &examples, &a.options.config())?;
    write_atomic(&a.out, model_to_json(&extended).as_bytes())?;
    print_report(&report);
    Ok(())
}

pub fn eval(a: &EvalArgs) -> CliResult {
    let model = read_model::<f64>(&a.model)?;
    if let Some(chart_path) = &a.munsell {
        let chart = if chart_path.as_os_str() == BUNDLED_CHART {
            bundled_chart()
        } else {
            load_chart(chart_path)?
        };
        let reference_path = a.reference.as_deref().expect("clap enforces --reference");
        let reference = load_reference(reference_path)?;
        let ev = evaluate_chart(&model, &chart, &reference)?;
        if let Some(out) = &a.render {
            write_atomic(
                out,
                &render_chart_segmentation(&model, &chart, a.cell).to_png(),
            )?;
        }
        if let Some(out) = &a.confusion {
            write_atomic(out, ev.confusion_csv().as_bytes())?;
        }
        print!("{}", ev.report());
        return Ok(());
    }
    let root: &Path = a.dataset.as_deref().expect("clap enforces a target");
    let ev = evaluate_dataset_dir(&model, root)?;
    print!("{}", ev.report());
    if !ev.failures.is_empty() && !a.allow_errors {
        return Err(CliError::data(format!(
            "{} dataset item(s) failed; pass --allow-errors to accept",
            ev.failures.len()
        )));
    }
    if let Some(out) = &a.confusion {
        write_atomic(out, ev.confusion_csv().as_bytes())?;
    }
    Ok(())
}
