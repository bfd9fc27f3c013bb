//! Instance files, orienteering benchmark conversion and random generation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::model::{diameter, Instance, Point, PRIOR_SUM_TOL};
use crate::rng::{stream, StreamRng};

pub const SCHEMA_VERSION: &str = "1";

/// Priors off by at most this much are silently renormalized on load.
pub const PRIOR_RENORMALIZE_TOL: f64 = 1e-6;

/// Stream index reserved for point subsampling during conversion.
const SUBSAMPLE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
    pub prior: f64,
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Generator settings, e.g. the cost range and beta transform.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub settings: BTreeMap<String, String>,
}

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub schema_version: String,
    pub name: String,
    pub points: Vec<PointRecord>,
    pub budget: f64,
    pub provenance: Provenance,
}

impl InstanceDocument {
    pub fn from_instance(instance: &Instance, name: &str, provenance: Provenance) -> Self {
        let points = (0..instance.len())
            .map(|i| PointRecord {
                x: instance.points[i].x,
                y: instance.points[i].y,
                prior: instance.priors[i],
                beta: instance.false_negative[i],
                alpha: instance.false_positive[i],
                cost: i64::from(instance.search_costs[i]),
            })
            .collect();
        InstanceDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            name: name.to_string(),
            points,
            budget: instance.budget,
            provenance,
        }
    }

    /// Validates the document. Priors summing to within
    /// [`PRIOR_RENORMALIZE_TOL`] of one are rescaled; closer than the
    /// instance tolerance they are kept as written.
    pub fn to_instance(&self) -> Result<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("expected \"{SCHEMA_VERSION}\", found \"{}\"", self.schema_version),
            ));
        }
        let mut costs = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            match u32::try_from(p.cost) {
                Ok(c) if c > 0 => costs.push(c),
                _ => {
                    return Err(Error::invalid(
                        format!("points[{i}].cost"),
                        format!("{} is not a positive integer", p.cost),
                    ))
                }
            }
        }
        let mut priors: Vec<f64> = self.points.iter().map(|p| p.prior).collect();
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL && (total - 1.0).abs() <= PRIOR_RENORMALIZE_TOL {
            priors.iter_mut().for_each(|p| *p /= total);
        }
        Instance::with_false_positives(
            self.points.iter().map(|p| Point::new(p.x, p.y)).collect(),
            priors,
            self.points.iter().map(|p| p.beta).collect(),
            self.points.iter().map(|p| p.alpha).collect(),
            costs,
            self.budget,
        )
    }

    /// Canonical text: sorted keys, two-space indentation, every real
    /// written with 17 significant digits.
    pub fn to_canonical_string(&self) -> Result<String> {
        // going through Value sorts the keys
        let value = serde_json::to_value(self)?;
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter::default());
        value.serialize(&mut ser)?;
        out.push(b'\n');
        Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Formats a finite real with 17 significant digits, fixed notation for
/// moderate exponents, trailing zeros trimmed but one decimal kept.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

#[derive(Default)]
struct CanonicalFormatter {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

pub fn load_document(path: impl AsRef<Path>) -> Result<InstanceDocument> {
    InstanceDocument::from_json_str(&fs::read_to_string(path)?)
}

pub fn load_json(path: impl AsRef<Path>) -> Result<Instance> {
    load_document(path)?.to_instance()
}

pub fn save_document(document: &InstanceDocument, path: impl AsRef<Path>) -> Result<()> {
    let text = document.to_canonical_string()?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Saves under the file stem as name, with an empty provenance.
pub fn save_json(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    let provenance = Provenance {
        source: "manual".into(),
        ..Provenance::default()
    };
    save_document(&InstanceDocument::from_instance(instance, name, provenance), path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrienteeringRecord {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrienteeringData {
    pub budget: f64,
    /// Number of paths from the header, unused by the conversion.
    pub path_count: Option<f64>,
    pub records: Vec<OrienteeringRecord>,
}

pub fn load_orienteering(path: impl AsRef<Path>) -> Result<OrienteeringData> {
    parse_orienteering(&fs::read_to_string(path)?)
}

/// Parses an orienteering benchmark file.
///
/// Accepted headers: `budget`, `budget paths`, `n paths budget`, or keyword
/// lines such as `n 32`, `m 2`, `tmax 20`. Every other line is `x y score`.
/// The start and end depots listed first in these files are kept as
/// ordinary points.
pub fn parse_orienteering(text: &str) -> Result<OrienteeringData> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut budget = None;
    let mut path_count = None;
    let mut declared_n = None;
    let mut first_data = None;
    for (line_no, line) in lines.by_ref() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if let Some(key) = fields.first().filter(|f| f.parse::<f64>().is_err()) {
            let value = fields
                .get(1)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| parse_error(line_no, format!("expected a number after \"{key}\"")))?;
            match key.to_ascii_lowercase().as_str() {
                "n" => declared_n = Some(value),
                "m" => path_count = Some(value),
                "tmax" => budget = Some(value),
                other => return Err(parse_error(line_no, format!("unknown header key \"{other}\""))),
            }
            continue;
        }
        let nums = numbers(line_no, &fields)?;
        if budget.is_some() {
            first_data = Some((line_no, nums));
            break;
        }
        match nums.as_slice() {
            [t] => budget = Some(*t),
            [t, p] => {
                budget = Some(*t);
                path_count = Some(*p);
            }
            [n, p, t] => {
                declared_n = Some(*n);
                path_count = Some(*p);
                budget = Some(*t);
            }
            _ => return Err(parse_error(line_no, format!("header has {} fields", nums.len()))),
        }
    }
    let Some(budget) = budget else {
        return Err(parse_error(1, "missing budget header".to_string()));
    };

    let mut records = Vec::new();
    for (line_no, nums) in first_data.into_iter().chain(lines.map(|(line_no, line)| {
        let fields: Vec<&str> = line.split_whitespace().collect();
        (line_no, numbers(line_no, &fields).unwrap_or_default())
    })) {
        match nums.as_slice() {
            [x, y, score] => records.push(OrienteeringRecord {
                x: *x,
                y: *y,
                score: *score,
            }),
            _ => return Err(parse_error(line_no, "expected three numbers: x y score".to_string())),
        }
    }
    if records.is_empty() {
        return Err(parse_error(1, "no point records".to_string()));
    }
    if let Some(n) = declared_n {
        if n != records.len() as f64 {
            return Err(parse_error(1, format!("header declares {n} points, found {}", records.len())));
        }
    }
    Ok(OrienteeringData {
        budget,
        path_count,
        records,
    })
}

fn numbers(line_no: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| match f.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(parse_error(line_no, format!("\"{f}\" is not a number"))),
        })
        .collect()
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BetaTransform {
    /// The Dirichlet sample as drawn; entries sum to one.
    #[default]
    Raw,
    /// Min-max rescaled onto `[lo, hi]`.
    Rescale { lo: f64, hi: f64 },
}

impl BetaTransform {
    pub fn rescale_default() -> Self {
        BetaTransform::Rescale { lo: 0.1, hi: 0.6 }
    }

    fn describe(&self) -> String {
        match self {
            BetaTransform::Raw => "raw".into(),
            BetaTransform::Rescale { lo, hi } => format!("rescale[{lo},{hi}]"),
        }
    }
}

/// Settings for turning benchmark records, or nothing at all, into instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionConfig {
    pub seed: u64,
    pub instances_per_base: usize,
    /// Inclusive range of search costs.
    pub cost_range: (u32, u32),
    pub dirichlet_concentration: f64,
    pub beta_transform: BetaTransform,
    /// If set, keep this many records, drawn once per base file.
    pub max_points: Option<usize>,
    /// Random instances get `budget_factor * diameter` as budget.
    pub budget_factor: f64,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig {
            seed: 0,
            instances_per_base: 10,
            cost_range: (1, 3),
            dirichlet_concentration: 1.0,
            beta_transform: BetaTransform::Raw,
            max_points: None,
            budget_factor: 3.0,
        }
    }
}

impl ConversionConfig {
    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.cost_range;
        if lo < 1 || hi < lo {
            return Err(Error::InvalidArgument(format!("cost range [{lo}, {hi}] is invalid")));
        }
        if !(self.dirichlet_concentration > 0.0 && self.dirichlet_concentration.is_finite()) {
            return Err(Error::InvalidArgument("Dirichlet concentration must be positive".into()));
        }
        if let BetaTransform::Rescale { lo, hi } = self.beta_transform {
            if !(0.0 <= lo && lo <= hi && hi < 1.0) {
                return Err(Error::InvalidArgument(format!("beta range [{lo}, {hi}] is invalid")));
            }
        }
        if self.max_points == Some(0) {
            return Err(Error::InvalidArgument("max_points must be positive".into()));
        }
        if !(self.budget_factor >= 0.0 && self.budget_factor.is_finite()) {
            return Err(Error::InvalidArgument("budget factor must be nonnegative".into()));
        }
        Ok(())
    }

    /// Provenance block recording these settings.
    pub fn provenance(&self, source: &str) -> Provenance {
        let mut settings = BTreeMap::new();
        settings.insert("beta_transform".into(), self.beta_transform.describe());
        settings.insert("cost_range".into(), format!("{}-{}", self.cost_range.0, self.cost_range.1));
        settings.insert("dirichlet_concentration".into(), self.dirichlet_concentration.to_string());
        if let Some(m) = self.max_points {
            settings.insert("max_points".into(), m.to_string());
        }
        Provenance {
            source: source.to_string(),
            seed: Some(self.seed),
            settings,
        }
    }

    fn sample_betas(&self, n: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
        let raw = dirichlet(n, self.dirichlet_concentration, rng)?;
        match self.beta_transform {
            BetaTransform::Raw => {
                if n == 1 {
                    return Err(Error::InvalidArgument(
                        "a raw Dirichlet draw over one point gives beta = 1; use a rescaled beta".into(),
                    ));
                }
                Ok(raw)
            }
            BetaTransform::Rescale { lo, hi } => {
                let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
                let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(raw
                    .iter()
                    .map(|&b| {
                        if max > min {
                            lo + (b - min) / (max - min) * (hi - lo)
                        } else {
                            0.5 * (lo + hi)
                        }
                    })
                    .collect())
            }
        }
    }

    fn sample_costs(&self, n: usize, rng: &mut StreamRng) -> Vec<u32> {
        (0..n).map(|_| rng.random_range(self.cost_range.0..=self.cost_range.1)).collect()
    }
}

/// Normalized independent Gamma draws.
fn dirichlet(n: usize, concentration: f64, rng: &mut StreamRng) -> Result<Vec<f64>> {
    let gamma = Gamma::new(concentration, 1.0)
        .map_err(|e| Error::InvalidArgument(format!("Dirichlet concentration: {e}")))?;
    for _ in 0..100 {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return Ok(draws.iter().map(|d| d / total).collect());
        }
    }
    Err(Error::InvalidArgument(format!(
        "Dirichlet concentration {concentration} keeps producing degenerate draws"
    )))
}

/// Builds `instances_per_base` instances from one benchmark file. Priors are
/// the normalized scores; each instance draws its own false-negative rates
/// and costs from stream `index` of the seed. All instances share the same
/// points, subsampled once if `max_points` is set.
pub fn convert_orienteering(
    records: &[OrienteeringRecord],
    budget: f64,
    config: &ConversionConfig,
) -> Result<Vec<Instance>> {
    config.check()?;
    if records.iter().any(|r| !(r.score >= 0.0)) {
        return Err(Error::InvalidArgument("scores must be nonnegative".into()));
    }
    let kept: Vec<OrienteeringRecord> = match config.max_points {
        Some(m) if m < records.len() => {
            let mut rng = stream(config.seed, SUBSAMPLE_STREAM);
            let mut idx = sample(&mut rng, records.len(), m).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| records[i]).collect()
        }
        _ => records.to_vec(),
    };
    let total: f64 = kept.iter().map(|r| r.score).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("scores sum to zero".into()));
    }
    let n = kept.len();
    let points: Vec<Point> = kept.iter().map(|r| Point::new(r.x, r.y)).collect();
    let priors: Vec<f64> = kept.iter().map(|r| r.score / total).collect();
    (0..config.instances_per_base)
        .map(|i| {
            let mut rng = stream(config.seed, i as u64);
            let beta = config.sample_betas(n, &mut rng)?;
            let costs = config.sample_costs(n, &mut rng);
            Instance::new(points.clone(), priors.clone(), beta, costs, budget)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        if !(min_x <= max_x && min_y <= max_y) || ![min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("bounding box is empty or not finite".into()));
        }
        Ok(BoundingBox {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    /// `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Result<Self> {
        BoundingBox::new(0.0, 0.0, side, side)
    }
}

/// Random instance number 0 of the configured seed.
pub fn generate_random(n: usize, bbox: BoundingBox, config: &ConversionConfig) -> Result<Instance> {
    generate_random_at(n, bbox, config, 0)
}

/// Random instance on its own stream: uniform points in the box, Dirichlet
/// priors, false-negative rates and costs as configured, budget a multiple
/// of the diameter.
pub fn generate_random_at(n: usize, bbox: BoundingBox, config: &ConversionConfig, index: u64) -> Result<Instance> {
    config.check()?;
    if n == 0 {
        return Err(Error::InvalidArgument("at least one point is required".into()));
    }
    let mut rng = stream(config.seed, index);
    let uniform = |rng: &mut StreamRng, lo: f64, hi: f64| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let points: Vec<Point> = (0..n)
        .map(|_| {
            let x = uniform(&mut rng, bbox.min_x, bbox.max_x);
            let y = uniform(&mut rng, bbox.min_y, bbox.max_y);
            Point::new(x, y)
        })
        .collect();
    let priors = dirichlet(n, config.dirichlet_concentration, &mut rng)?;
    let beta = config.sample_betas(n, &mut rng)?;
    let costs = config.sample_costs(n, &mut rng);
    let budget = config.budget_factor * diameter(&points);
    Instance::new(points, priors, beta, costs, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rescaled(seed: u64) -> ConversionConfig {
        ConversionConfig {
            seed,
            beta_transform: BetaTransform::rescale_default(),
            ..ConversionConfig::default()
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = rescaled(11);
        let inst = generate_random(64, BoundingBox::square(10.0).unwrap(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        save_json(&inst, &path).unwrap();
        let back = load_json(&path).unwrap();
        assert_eq!(inst, back);
        for (a, b) in inst.priors.iter().zip(&back.priors) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // saving again yields identical bytes
        let sub = dir.path().join("again");
        fs::create_dir(&sub).unwrap();
        let path2 = sub.join("a.json");
        save_json(&back, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn canonical_text_shape() {
        let inst = Instance::new(vec![Point::new(0.0, 1.5)], vec![1.0], vec![0.6], vec![2], 3.0).unwrap();
        let doc = InstanceDocument::from_instance(&inst, "one", Provenance::default());
        let text = doc.to_canonical_string().unwrap();
        let keys: Vec<usize> = ["\"budget\"", "\"name\"", "\"points\"", "\"provenance\"", "\"schema_version\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"beta\": 0.59999999999999998"));
        assert!(text.contains("\"budget\": 3.0"));
        assert!(text.contains("\"cost\": 2"));
        assert_eq!(InstanceDocument::from_json_str(&text).unwrap().to_instance().unwrap(), inst);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0.0");
        assert_eq!(format_real(1.0), "1.0");
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_real(1e20), "1.0e20");
        assert_eq!(format_real(-2.25), "-2.25");
        for x in [0.1, 1.0 / 3.0, 123456.789, 5e-324, f64::MAX, 1e16, 1e17] {
            assert_eq!(format_real(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
    }

    fn doc_with(priors: &[f64], cost: i64) -> InstanceDocument {
        InstanceDocument {
            schema_version: "1".into(),
            name: "t".into(),
            points: priors
                .iter()
                .enumerate()
                .map(|(i, &p)| PointRecord {
                    x: i as f64,
                    y: 0.0,
                    prior: p,
                    beta: 0.5,
                    alpha: 0.0,
                    cost,
                })
                .collect(),
            budget: 4.0,
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn loader_rejections_and_renormalization() {
        assert!(matches!(
            doc_with(&[0.45, 0.45], 1).to_instance(),
            Err(Error::InvalidInstance { ref field, .. }) if field == "priors"
        ));
        assert!(matches!(
            doc_with(&[0.5, 0.5], -1).to_instance(),
            Err(Error::InvalidInstance { ref field, .. }) if field == "points[0].cost"
        ));
        let inst = doc_with(&[0.5 + 2e-7, 0.5], 1).to_instance().unwrap();
        assert!((inst.priors.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let mut bad = doc_with(&[1.0], 1);
        bad.schema_version = "2".into();
        assert!(bad.to_instance().is_err());
    }

    #[test]
    fn orienteering_formats() {
        let d = parse_orienteering("10\n0 0 5\n1 1 5").unwrap();
        assert_eq!(d.budget, 10.0);
        assert_eq!(d.records.len(), 2);
        let d = parse_orienteering("15 2\n0 0 0\n1 1 0\n2 2 7\n").unwrap();
        assert_eq!((d.budget, d.path_count, d.records.len()), (15.0, Some(2.0), 3));
        let d = parse_orienteering("3 1 20\n0 0 0\n1 1 1\n2 2 0\n").unwrap();
        assert_eq!((d.budget, d.records.len()), (20.0, 3));
        let d = parse_orienteering("n 2\nm 1\ntmax 7.5\n0 0 0\n3 4 10\n").unwrap();
        assert_eq!((d.budget, d.path_count, d.records.len()), (7.5, Some(1.0), 2));
    }

    #[test]
    fn orienteering_errors_carry_line_numbers() {
        assert!(parse_orienteering("").is_err());
        assert!(parse_orienteering("10\n").is_err());
        match parse_orienteering("10\n0 0 5\n\n1 x 5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_orienteering("10\n0 0 5\n1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_orienteering("4 1 10\n0 0 1\n").is_err());
    }

    #[test]
    fn conversion_raw_mode() {
        let records = parse_orienteering("10\n0 0 5\n1 1 5").unwrap().records;
        let cfg = ConversionConfig {
            seed: 5,
            ..ConversionConfig::default()
        };
        let out = convert_orienteering(&records, 10.0, &cfg).unwrap();
        assert_eq!(out.len(), 10);
        for inst in &out {
            assert_eq!(inst.priors, vec![0.5, 0.5]);
            assert!(inst.false_negative.iter().all(|&b| b > 0.0 && b < 1.0));
            assert!((inst.false_negative.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(inst.search_costs.iter().all(|&c| (1..=3).contains(&c)));
            assert_eq!(inst.points, out[0].points);
            assert_eq!(inst.budget, 10.0);
        }
        assert_ne!(out[0].false_negative, out[1].false_negative);
        assert_eq!(out, convert_orienteering(&records, 10.0, &cfg).unwrap());
    }

    #[test]
    fn conversion_rejections() {
        let zero = vec![OrienteeringRecord { x: 0.0, y: 0.0, score: 0.0 }; 3];
        assert!(convert_orienteering(&zero, 5.0, &ConversionConfig::default()).is_err());
        let one = vec![OrienteeringRecord { x: 0.0, y: 0.0, score: 1.0 }];
        assert!(convert_orienteering(&one, 5.0, &ConversionConfig::default()).is_err());
        assert!(convert_orienteering(&one, 5.0, &rescaled(1)).is_ok());
    }

    #[test]
    fn subsampling_is_shared_across_the_base() {
        let records: Vec<OrienteeringRecord> = (0..30)
            .map(|i| OrienteeringRecord {
                x: i as f64,
                y: (i * i % 7) as f64,
                score: (i % 4 + 1) as f64,
            })
            .collect();
        let cfg = ConversionConfig {
            max_points: Some(6),
            ..rescaled(9)
        };
        let out = convert_orienteering(&records, 20.0, &cfg).unwrap();
        assert!(out.iter().all(|i| i.len() == 6 && i.points == out[0].points));
        for b in &out[0].false_negative {
            assert!((0.1 - 1e-12..=0.6 + 1e-12).contains(b));
        }
    }

    #[test]
    fn random_generation() {
        let cfg = rescaled(7);
        let one = generate_random(1, BoundingBox::square(10.0).unwrap(), &cfg).unwrap();
        assert_eq!(one.priors, vec![1.0]);
        let bbox = BoundingBox::square(10.0).unwrap();
        let a = generate_random(20, bbox, &cfg).unwrap();
        assert_eq!(a, generate_random(20, bbox, &cfg).unwrap());
        let d = diameter(&a.points);
        assert!(d <= 10.0 * 2f64.sqrt());
        assert!(a.budget <= 30.0 * 2f64.sqrt() + 1e-12);
        assert_eq!(a.budget, 3.0 * d);
        assert!(a.points.iter().all(|p| (0.0..=10.0).contains(&p.x) && (0.0..=10.0).contains(&p.y)));
        assert_ne!(a, generate_random_at(20, bbox, &cfg, 1).unwrap());
    }
}
