use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::colourspace::Lab;
use crate::ellipsoid::ColourModel;
use crate::error::{Error, Result};
use crate::image_io::encode_rgb_png;
use crate::palette::model_palette;
use crate::scalar::{to_f64, Real};

pub const CHIP_COUNT: usize = 330;
pub const ACHROMATIC_CHIPS: usize = 10;
/// Rows 0..=9; chromatic chips occupy rows 1..=8.
pub const CHART_ROWS: u32 = 10;
/// Hue columns 1..=40; column 0 holds the achromatic chips.
pub const HUE_COLUMNS: u32 = 40;
/// Fill for grid cells without a chip.
pub const RENDER_BACKGROUND: [u8; 3] = [60, 60, 60];

const ACHROMATIC_CHROMA_WARNING: f64 = 2.0;
const BUNDLED_CHART: &str = include_str!("../../data/munsell_chart.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct Chip<T> {
    pub notation: String,
    pub lab: Lab<T>,
    pub row: u32,
    pub column: u32,
}

impl<T> Chip<T> {
    pub fn is_achromatic(&self) -> bool {
        self.column == 0
    }

    pub fn position(&self) -> (u32, u32) {
        (self.row, self.column)
    }
}

/// The 330-chip chart, kept in (row, column) order.
#[derive(Debug, Clone, PartialEq)]
pub struct MunsellChart<T> {
    chips: Vec<Chip<T>>,
}

impl<T: Real> MunsellChart<T> {
    pub fn new(mut chips: Vec<Chip<T>>) -> Result<Self> {
        if chips.len() != CHIP_COUNT {
            return Err(Error::InvalidParameter(format!(
                "chart must have {CHIP_COUNT} chips, got {}",
                chips.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &chips {
            let valid = if c.is_achromatic() {
                c.row < CHART_ROWS
            } else {
                (1..CHART_ROWS - 1).contains(&c.row) && c.column <= HUE_COLUMNS
            };
            if !valid {
                return Err(Error::InvalidParameter(format!(
                    "chip {} at row {}, column {} is outside the chart grid",
                    c.notation, c.row, c.column
                )));
            }
            if !seen.insert(c.position()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate chip position row {}, column {}",
                    c.row, c.column
                )));
            }
            if !c.lab.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "chip {} has non-finite Lab",
                    c.notation
                )));
            }
        }
        // with 330 distinct in-grid positions the achromatic column is necessarily full
        for c in chips.iter().filter(|c| c.is_achromatic()) {
            let (a, b) = (to_f64(c.lab.a).abs(), to_f64(c.lab.b).abs());
            if a >= ACHROMATIC_CHROMA_WARNING || b >= ACHROMATIC_CHROMA_WARNING {
                log::warn!(
                    "achromatic chip {} has noticeable chroma (a={a:.2}, b={b:.2})",
                    c.notation
                );
            }
        }
        chips.sort_by_key(|c| c.position());
        Ok(MunsellChart { chips })
    }

    pub fn chips(&self) -> &[Chip<T>] {
        &self.chips
    }

    pub fn chip_at(&self, row: u32, column: u32) -> Option<&Chip<T>> {
        self.chips
            .binary_search_by_key(&(row, column), |c| c.position())
            .ok()
            .map(|i| &self.chips[i])
    }
}

#[derive(Debug, Deserialize)]
struct ChipRecord {
    notation: String,
    #[serde(rename = "L")]
    l: f64,
    a: f64,
    b: f64,
    row: u32,
    column: u32,
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// Parses chart CSV text (`notation,L,a,b,row,column`; `#` lines are comments).
pub fn parse_chart<T: Real>(text: &str, source: &Path) -> Result<MunsellChart<T>> {
    let mut chips = Vec::new();
    for (i, rec) in csv_reader(text).deserialize::<ChipRecord>().enumerate() {
        let r = rec.map_err(|e| Error::format(source, format!("record {}: {e}", i + 1)))?;
        chips.push(Chip {
            notation: r.notation,
            lab: Lab::from_f64(r.l, r.a, r.b),
            row: r.row,
            column: r.column,
        });
    }
    MunsellChart::new(chips).map_err(|e| Error::format(source, e.to_string()))
}

pub fn load_chart<T: Real>(path: &Path) -> Result<MunsellChart<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_chart(&text, path)
}

/// The chip table shipped with the library.
pub fn bundled_chart<T: Real>() -> MunsellChart<T> {
    parse_chart(BUNDLED_CHART, Path::new("munsell_chart.csv")).expect("bundled chart is valid")
}

/// Term labels for a subset of chart positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChartNamingReference {
    pub labels: BTreeMap<(u32, u32), String>,
}

impl ChartNamingReference {
    /// The model's own naming of every chip.
    pub fn from_model<T: Real>(model: &ColourModel<T>, chart: &MunsellChart<T>) -> Self {
        let labels = chart
            .chips()
            .iter()
            .map(|c| (c.position(), model.name_pixel(c.lab).to_string()))
            .collect();
        ChartNamingReference { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Writes `row,column,term` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,column,term\n");
        for ((r, c), t) in &self.labels {
            out.push_str(&format!("{r},{c},{t}\n"));
        }
        out
    }
}

#[derive(Debug, Deserialize)]
struct ReferenceRecord {
    row: u32,
    column: u32,
    term: String,
}

/// Parses `row,column,term` CSV; `#` lines are comments.
pub fn parse_reference(text: &str, source: &Path) -> Result<ChartNamingReference> {
    let mut labels = BTreeMap::new();
    for (i, rec) in csv_reader(text)
        .deserialize::<ReferenceRecord>()
        .enumerate()
    {
        let r = rec.map_err(|e| Error::format(source, format!("record {}: {e}", i + 1)))?;
        if r.term.is_empty() {
            return Err(Error::format(
                source,
                format!("record {}: empty term", i + 1),
            ));
        }
        if labels.insert((r.row, r.column), r.term).is_some() {
            return Err(Error::format(
                source,
                format!("duplicate label for row {}, column {}", r.row, r.column),
            ));
        }
    }
    Ok(ChartNamingReference { labels })
}

pub fn load_reference(path: &Path) -> Result<ChartNamingReference> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_reference(&text, path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipOutcome {
    pub row: u32,
    pub column: u32,
    pub notation: String,
    pub predicted: String,
    /// Reference label, if the chip is labelled.
    pub expected: Option<String>,
}

impl ChipOutcome {
    pub fn is_match(&self) -> Option<bool> {
        self.expected.as_ref().map(|e| *e == self.predicted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartEvaluation {
    pub terms: Vec<String>,
    pub chips: Vec<ChipOutcome>,
}

impl ChartEvaluation {
    pub fn labelled(&self) -> usize {
        self.chips.iter().filter(|c| c.expected.is_some()).count()
    }

    pub fn matched(&self) -> usize {
        self.chips
            .iter()
            .filter(|c| c.is_match() == Some(true))
            .count()
    }

    /// Fraction of labelled chips named as the reference names them; `None` without labels.
    pub fn accuracy(&self) -> Option<f64> {
        let n = self.labelled();
        (n > 0).then(|| self.matched() as f64 / n as f64)
    }

    /// Accuracy restricted to chips selected by `filter`.
    pub fn accuracy_where(&self, filter: impl Fn(&ChipOutcome) -> bool) -> Option<f64> {
        let sel: Vec<_> = self
            .chips
            .iter()
            .filter(|c| c.expected.is_some() && filter(c))
            .collect();
        let hit = sel.iter().filter(|c| c.is_match() == Some(true)).count();
        (!sel.is_empty()).then(|| hit as f64 / sel.len() as f64)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &ChipOutcome> {
        self.chips.iter().filter(|c| c.is_match() == Some(false))
    }

    /// Counts over labelled chips, rows = reference term, columns = predicted term, in model order.
    pub fn confusion(&self) -> Vec<Vec<usize>> {
        let idx = |name: &str| {
            self.terms
                .iter()
                .position(|t| t == name)
                .expect("validated term")
        };
        let mut m = vec![vec![0; self.terms.len()]; self.terms.len()];
        for c in &self.chips {
            if let Some(e) = &c.expected {
                m[idx(e)][idx(&c.predicted)] += 1;
            }
        }
        m
    }

    pub fn confusion_csv(&self) -> String {
        let names: Vec<&str> = self.terms.iter().map(String::as_str).collect();
        super::confusion_csv(&names, &self.confusion())
    }

    /// `key=value` lines followed by one `mismatch=` line per wrongly named chip.
    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str("protocol=munsell\n");
        out.push_str(&format!("chips={}\n", self.chips.len()));
        out.push_str(&format!("labelled={}\n", self.labelled()));
        out.push_str(&format!("matched={}\n", self.matched()));
        out.push_str(&format!("accuracy={}\n", fmt_ratio(self.accuracy())));
        out.push_str(&format!(
            "accuracy_chromatic={}\n",
            fmt_ratio(self.accuracy_where(|c| c.column != 0))
        ));
        out.push_str(&format!(
            "accuracy_achromatic={}\n",
            fmt_ratio(self.accuracy_where(|c| c.column == 0))
        ));
        for t in &self.terms {
            let n = self.chips.iter().filter(|c| c.predicted == *t).count();
            out.push_str(&format!("chips_named.{t}={n}\n"));
        }
        for c in self.mismatches() {
            out.push_str(&format!(
                "mismatch={},{},{},expected={},predicted={}\n",
                c.row,
                c.column,
                c.notation,
                c.expected.as_deref().unwrap_or(""),
                c.predicted
            ));
        }
        out
    }
}

pub(crate) fn fmt_ratio(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.6}")).unwrap_or_else(|| "nan".into())
}

/// Names every chip and scores it against the reference labels.
pub fn evaluate_chart<T: Real>(
    model: &ColourModel<T>,
    chart: &MunsellChart<T>,
    reference: &ChartNamingReference,
) -> Result<ChartEvaluation> {
    for ((r, c), term) in &reference.labels {
        if model.index_of(term).is_none() {
            return Err(Error::UnknownTerm(term.clone()));
        }
        if chart.chip_at(*r, *c).is_none() {
            return Err(Error::InvalidParameter(format!(
                "reference labels row {r}, column {c}, which holds no chip"
            )));
        }
    }
    let chips = chart
        .chips()
        .iter()
        .map(|c| ChipOutcome {
            row: c.row,
            column: c.column,
            notation: c.notation.clone(),
            predicted: model.name_pixel(c.lab).to_string(),
            expected: reference.labels.get(&c.position()).cloned(),
        })
        .collect();
    Ok(ChartEvaluation {
        terms: model.names().into_iter().map(String::from).collect(),
        chips,
    })
}

/// RGB raster of a chart naming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartRendering {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[u8; 3]>,
}

impl ChartRendering {
    pub fn to_png(&self) -> Vec<u8> {
        encode_rgb_png(self.width, self.height, &self.rgb)
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.rgb[(y * self.width + x) as usize]
    }
}

/// Grid of `cell`-pixel squares, chip (row, column) at cell (column, row), filled
/// with the palette colour of its name. Size is `(40+1)·cell × 10·cell`.
pub fn render_chart_segmentation<T: Real>(
    model: &ColourModel<T>,
    chart: &MunsellChart<T>,
    cell: u32,
) -> ChartRendering {
    let cell = cell.max(1);
    let width = (HUE_COLUMNS + 1) * cell;
    let height = CHART_ROWS * cell;
    let palette = model_palette(model);
    let mut rgb = vec![RENDER_BACKGROUND; (width * height) as usize];
    for chip in chart.chips() {
        let colour = palette[model.name_index(chip.lab)];
        for y in chip.row * cell..(chip.row + 1) * cell {
            let start = (y * width + chip.column * cell) as usize;
            rgb[start..start + cell as usize].fill(colour);
        }
    }
    ChartRendering { width, height, rgb }
}
