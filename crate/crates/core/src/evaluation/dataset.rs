use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{scan_dataset, DatasetEntry};
use crate::ellipsoid::ColourModel;
use crate::error::{Error, Result};
use crate::image_io::LabImage;
use crate::scalar::Real;

use super::chart::fmt_ratio;

/// An image whose masked pixels all carry one ground-truth term.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledImage<T> {
    pub id: String,
    pub term: String,
    pub image: LabImage<T>,
    pub mask: Vec<bool>,
}

impl<T: Real> LabelledImage<T> {
    pub fn new(
        id: impl Into<String>,
        term: impl Into<String>,
        image: LabImage<T>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let id = id.into();
        if mask.len() != image.len() {
            return Err(Error::InvalidParameter(format!(
                "{id}: mask has {} entries but image has {} pixels",
                mask.len(),
                image.len()
            )));
        }
        Ok(LabelledImage {
            id,
            term: term.into(),
            image,
            mask,
        })
    }

    /// Whole image labelled with `term`.
    pub fn unmasked(id: impl Into<String>, term: impl Into<String>, image: LabImage<T>) -> Self {
        let mask = vec![true; image.len()];
        LabelledImage {
            id: id.into(),
            term: term.into(),
            image,
            mask,
        }
    }

    pub fn load(entry: &DatasetEntry) -> Result<Self> {
        let (image, mask) = entry.load()?;
        Self::new(entry.id(), entry.term.clone(), image, mask)
    }
}

/// `(correct, masked)` pixel counts plus per-predicted-term counts.
fn count_item<T: Real>(
    model: &ColourModel<T>,
    item: &LabelledImage<T>,
) -> Result<(usize, usize, Vec<usize>)> {
    let truth = model
        .index_of(&item.term)
        .ok_or_else(|| Error::UnknownTerm(item.term.clone()))?;
    if item.mask.len() != item.image.len() {
        return Err(Error::InvalidParameter(format!(
            "{}: mask does not match image size",
            item.id
        )));
    }
    let prepared = model.prepared();
    let mut predicted = vec![0; model.len()];
    let mut masked = 0;
    for (p, _) in item
        .image
        .pixels
        .iter()
        .zip(&item.mask)
        .filter(|(_, m)| **m)
    {
        predicted[prepared.name_index(&p.to_array())] += 1;
        masked += 1;
    }
    if masked == 0 {
        return Err(Error::EmptyMask(item.id.clone()));
    }
    Ok((predicted[truth], masked, predicted))
}

/// TP / (TP + FN) over the masked pixels of one image.
pub fn true_positive_ratio<T: Real>(
    model: &ColourModel<T>,
    item: &LabelledImage<T>,
) -> Result<f64> {
    let (correct, masked, _) = count_item(model, item)?;
    Ok(correct as f64 / masked as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemOutcome {
    pub id: String,
    pub term: String,
    pub pixels: usize,
    pub correct: usize,
    pub ratio: f64,
    /// Masked pixel counts per predicted term, in model order.
    pub predicted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemFailure {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermSummary {
    pub term: String,
    pub images: usize,
    pub mean_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEvaluation {
    pub terms: Vec<String>,
    /// Sorted by id.
    pub items: Vec<ItemOutcome>,
    /// Sorted by id.
    pub failures: Vec<ItemFailure>,
}

/// Mean of ratios in a fixed (id) order so repeated runs agree bit for bit.
fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl DatasetEvaluation {
    /// Unweighted mean of per-image ratios, so small images count as much as large ones.
    pub fn mean_ratio(&self) -> Option<f64> {
        mean(self.items.iter().map(|i| i.ratio))
    }

    pub fn per_term(&self) -> Vec<TermSummary> {
        self.terms
            .iter()
            .map(|t| {
                let sel: Vec<f64> = self
                    .items
                    .iter()
                    .filter(|i| i.term == *t)
                    .map(|i| i.ratio)
                    .collect();
                TermSummary {
                    term: t.clone(),
                    images: sel.len(),
                    mean_ratio: mean(sel.into_iter()),
                }
            })
            .collect()
    }

    /// Pixel counts, rows = ground-truth term, columns = predicted term.
    pub fn confusion(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0; self.terms.len()]; self.terms.len()];
        for item in &self.items {
            let row = self
                .terms
                .iter()
                .position(|t| *t == item.term)
                .expect("validated term");
            for (c, n) in item.predicted.iter().enumerate() {
                m[row][c] += n;
            }
        }
        m
    }

    pub fn confusion_csv(&self) -> String {
        let names: Vec<&str> = self.terms.iter().map(String::as_str).collect();
        super::confusion_csv(&names, &self.confusion())
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str("protocol=dataset\n");
        out.push_str(&format!("images={}\n", self.items.len()));
        out.push_str(&format!("failures={}\n", self.failures.len()));
        out.push_str(&format!("mean_tpr={}\n", fmt_ratio(self.mean_ratio())));
        for s in self.per_term().iter().filter(|s| s.images > 0) {
            out.push_str(&format!("term.{}.images={}\n", s.term, s.images));
            out.push_str(&format!(
                "term.{}.mean_tpr={}\n",
                s.term,
                fmt_ratio(s.mean_ratio)
            ));
        }
        for i in &self.items {
            out.push_str(&format!(
                "image={},{},{},{},{:.6}\n",
                i.id, i.term, i.correct, i.pixels, i.ratio
            ));
        }
        for f in &self.failures {
            out.push_str(&format!("failure={}: {}\n", f.id, f.reason));
        }
        out
    }
}

/// `(id, term, counts)` for one item.
type ItemResult = (String, String, Result<(usize, usize, Vec<usize>)>);

fn assemble<T: Real>(model: &ColourModel<T>, results: Vec<ItemResult>) -> DatasetEvaluation {
    let mut items = Vec::new();
    let mut failures = Vec::new();
    for (id, term, r) in results {
        match r {
            Ok((correct, pixels, predicted)) => items.push(ItemOutcome {
                id,
                term,
                pixels,
                correct,
                ratio: correct as f64 / pixels as f64,
                predicted,
            }),
            Err(e) => failures.push(ItemFailure {
                id,
                reason: e.to_string(),
            }),
        }
    }
    items.sort_by(|a, b| a.id.cmp(&b.id));
    failures.sort_by(|a, b| a.id.cmp(&b.id));
    DatasetEvaluation {
        terms: model.names().into_iter().map(String::from).collect(),
        items,
        failures,
    }
}

/// Scores every item; items that fail are recorded, not fatal.
pub fn evaluate_dataset<T: Real>(
    model: &ColourModel<T>,
    items: &[LabelledImage<T>],
) -> Result<DatasetEvaluation> {
    if items.is_empty() {
        return Err(Error::InvalidParameter("dataset has no items".into()));
    }
    let results = items
        .par_iter()
        .map(|it| (it.id.clone(), it.term.clone(), count_item(model, it)))
        .collect();
    Ok(assemble(model, results))
}

/// Loads and scores `root/<term>/<image>` (masks in `root/<term>/masks/`); decode
/// failures are recorded alongside scoring failures.
pub fn evaluate_dataset_dir<T: Real>(
    model: &ColourModel<T>,
    root: &Path,
) -> Result<DatasetEvaluation> {
    let entries = scan_dataset(root)?;
    let results = entries
        .par_iter()
        .map(|e| {
            let r = LabelledImage::<T>::load(e).and_then(|it| count_item(model, &it));
            (e.id(), e.term.clone(), r)
        })
        .collect();
    Ok(assemble(model, results))
}
