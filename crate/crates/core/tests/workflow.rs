use std::path::Path;

use chromaterm_core::dataset::{scan_dataset, scan_term_dir};
use chromaterm_core::evaluation::{
    bundled_chart, evaluate_dataset, true_positive_ratio, LabelledImage,
};
use chromaterm_core::fitting::{
    build_ground_truth, extend_model, fit_model, FitConfig, ParameterBounds, TrainingExample,
};
use chromaterm_core::{ColourModel, ColourModel64, Lab, LabConverter, LabImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn three_term_model() -> ColourModel64 {
    let entries = scan_dataset(&fixtures().join("three_terms")).unwrap();
    let examples: Vec<TrainingExample<f64>> = entries
        .iter()
        .map(|e| TrainingExample::from_entry(e).unwrap())
        .collect();
    let gt = build_ground_truth(&examples, 1.0).unwrap();
    let (model, reports) = fit_model(gt.term_names(), &gt, &FitConfig::default()).unwrap();
    for r in &reports {
        assert!(r.final_objective / r.bins as f64 <= 1e-2, "{r:?}");
    }
    assert!(model
        .terms()
        .iter()
        .all(|t| ParameterBounds::default().contains(t)));
    model
}

/// Nearest-neighbour rescale of an image and its mask by `num/den`.
fn rescale(item: &LabelledImage<f64>, num: u32, den: u32) -> LabelledImage<f64> {
    let (w, h) = (item.image.width * num / den, item.image.height * num / den);
    let mut px = Vec::new();
    let mut mask = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = (x * den / num, y * den / num);
            let j = (sy * item.image.width + sx) as usize;
            px.push(item.image.pixels[j]);
            mask.push(item.mask[j]);
        }
    }
    LabelledImage::new(
        item.id.clone(),
        item.term.clone(),
        LabImage::new(w, h, px).unwrap(),
        mask,
    )
    .unwrap()
}

#[test]
fn three_term_fit_names_its_training_images() {
    let model = three_term_model();
    assert_eq!(model.names(), ["blue", "green", "red"]);
    let entries = scan_dataset(&fixtures().join("three_terms")).unwrap();
    let items: Vec<_> = entries
        .iter()
        .map(|e| LabelledImage::load(e).unwrap())
        .collect();
    let ev = evaluate_dataset(&model, &items).unwrap();
    assert!(ev.mean_ratio().unwrap() > 0.99);
}

#[test]
fn dataset_score_ignores_order_and_resolution() {
    let model = three_term_model();
    let conv = LabConverter::<f64>::d65();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // mixed images: a red object on a random background, masked to the object
    let items: Vec<LabelledImage<f64>> = (0..6)
        .map(|i| {
            let (w, h) = (12 + i, 9 + 2 * i);
            let mut px = Vec::new();
            let mut mask = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    let m = x >= w / 4 && y >= h / 3;
                    let rgb = if m && rng.random_bool(0.8) {
                        [
                            200 + rng.random_range(0..40),
                            rng.random_range(0..40),
                            rng.random_range(0..40),
                        ]
                    } else {
                        [rng.random(), rng.random(), rng.random()]
                    };
                    px.push(conv.srgb8_to_lab(rgb));
                    mask.push(m);
                }
            }
            LabelledImage::new(
                format!("img{i}"),
                "red",
                LabImage::new(w, h, px).unwrap(),
                mask,
            )
            .unwrap()
        })
        .collect();
    let base = evaluate_dataset(&model, &items).unwrap();
    let mut shuffled = items.clone();
    shuffled.rotate_left(2);
    shuffled.swap(0, 3);
    assert_eq!(
        evaluate_dataset(&model, &shuffled).unwrap().report(),
        base.report()
    );
    for k in 0..items.len() {
        let mut scaled = items.clone();
        scaled[k] = rescale(&items[k], 3, 1);
        let r0 = true_positive_ratio(&model, &items[k]).unwrap();
        let r1 = true_positive_ratio(&model, &scaled[k]).unwrap();
        assert!((r0 - r1).abs() <= 0.01, "{r0} vs {r1}");
        let m = evaluate_dataset(&model, &scaled)
            .unwrap()
            .mean_ratio()
            .unwrap();
        assert!((m - base.mean_ratio().unwrap()).abs() <= 0.01);
    }
}

#[test]
fn extension_leaves_existing_terms_alone() {
    let model = three_term_model();
    let entries = scan_term_dir("cream", &fixtures().join("cream_examples/cream")).unwrap();
    assert_eq!(entries.len(), 2);
    let examples: Vec<TrainingExample<f64>> = entries
        .iter()
        .map(|e| TrainingExample::from_entry(e).unwrap())
        .collect();
    let (extended, report) =
        extend_model(&model, "cream", &examples, &FitConfig::default()).unwrap();
    assert!(report.final_objective <= report.initial_objective);
    assert_eq!(extended.names().last(), Some(&"cream"));
    let mut terms = extended.clone().into_terms();
    let cream = terms.pop().unwrap();
    assert!(ParameterBounds::default().contains(&cream));
    let removed = ColourModel::new(terms).unwrap();
    assert_eq!(removed, model);
    let chart = bundled_chart::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probes = chart
        .chips()
        .iter()
        .map(|c| c.lab)
        .chain((0..5000).map(|_| {
            Lab::from_f64(
                rng.random_range(0.0..100.0),
                rng.random_range(-90.0..90.0),
                rng.random_range(-90.0..90.0),
            )
        }));
    for p in probes {
        assert_eq!(removed.name_pixel(p), model.name_pixel(p));
    }
    // the background pixels of the examples are not part of the new term's ground truth
    assert!(examples.iter().all(|e| e.pixels.len() == 12 * 14));
    assert!(matches!(
        extend_model(&model, "red", &examples, &FitConfig::default()),
        Err(chromaterm_core::Error::DuplicateTerm(_))
    ));
}
