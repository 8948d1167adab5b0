//! Run configuration: flat `key = value` lines grouped under `[section]`
//! headers; `#` starts a comment. See the repository README for the full
//! key reference.

use std::path::{Path, PathBuf};

use crate::dg::{ModelParameters, Preset, TraceMass, DEFAULT_PENALTY};
use crate::geometry::{BoundaryKind, BoundaryLayout, CircleInclusion, DomainSpec, Rect, Side};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mesh,
    Fine,
    Ms,
    Sweep,
    Compare,
}

impl Mode {
    pub fn from_name(s: &str) -> Option<Mode> {
        Some(match s {
            "mesh" => Mode::Mesh,
            "fine" => Mode::Fine,
            "ms" => Mode::Ms,
            "sweep" => Mode::Sweep,
            "compare" => Mode::Compare,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Mesh => "mesh",
            Mode::Fine => "fine",
            Mode::Ms => "ms",
            Mode::Sweep => "sweep",
            Mode::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Structured triangulation with `refinement x refinement` squares per
    /// coarse cell.
    Generate { coarse: (usize, usize), refinement: usize },
    File(PathBuf),
}

/// How the inclusion layout is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum InclusionSource {
    Literal(Vec<CircleInclusion>),
    Random { count: usize, r_min: f64, r_max: f64, margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: Mode,
    pub bbox: Rect,
    pub porosity: f64,
    pub inclusions: InclusionSource,
    pub seed: u64,
    pub mesh: MeshSource,
    /// Parameters with `darcy` set to the first entry of `darcy_values`.
    pub params: ModelParameters,
    pub darcy_values: Vec<f64>,
    /// Velocity per side, indexed by [`Side::index`].
    pub boundary_values: [[f64; 2]; 4],
    pub layout: BoundaryLayout,
    pub basis_counts: Vec<usize>,
    pub oversampling: Vec<bool>,
    pub trace_mass: TraceMass,
    pub output: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub candidate: Option<PathBuf>,
}

impl RunSpec {
    /// Domain description; random layouts are drawn with `self.seed`.
    pub fn domain(&self) -> Result<DomainSpec> {
        match &self.inclusions {
            InclusionSource::Literal(list) => DomainSpec::new(self.bbox, list.clone(), self.porosity),
            InclusionSource::Random { count, r_min, r_max, margin } => {
                DomainSpec::random(self.bbox, *count, *r_min, *r_max, *margin, self.porosity, self.seed)
            }
        }
    }

    pub fn params_for(&self, darcy: f64) -> Result<ModelParameters> {
        self.params.with_darcy(darcy)
    }
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

struct Entries(Vec<Entry>);

fn err(e: &Entry, msg: impl Into<String>) -> Error {
    Error::Config { line: e.line, key: format!("{}.{}", e.section, e.key), msg: msg.into() }
}

impl Entries {
    fn all(&self, section: &str, key: &str) -> Vec<&Entry> {
        self.0.iter().filter(|e| e.section == section && e.key == key).collect()
    }

    fn get(&self, section: &str, key: &str) -> Result<Option<&Entry>> {
        let all = self.all(section, key);
        let mut it = all.into_iter();
        let first = it.next();
        if let Some(dup) = it.next() {
            return Err(err(dup, "duplicate key"));
        }
        Ok(first)
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key)? {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| err(e, format!("invalid value `{}`", e.value))),
        }
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<(Vec<T>, &Entry)>> {
        match self.get(section, key)? {
            None => Ok(None),
            Some(e) => Ok(Some((numbers(e)?, e))),
        }
    }

    fn string(&self, section: &str, key: &str) -> Result<Option<&Entry>> {
        self.get(section, key)
    }
}

fn numbers<T: std::str::FromStr>(e: &Entry) -> Result<Vec<T>> {
    e.value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| err(e, format!("invalid number `{s}`"))))
        .collect()
}

fn fixed<const N: usize>(e: &Entry) -> Result<[f64; N]> {
    let v: Vec<f64> = numbers(e)?;
    v.try_into().map_err(|v: Vec<f64>| err(e, format!("expected {N} numbers, found {}", v.len())))
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["mode", "output", "seed"]),
    ("domain", &["bbox", "porosity", "inclusion", "random_inclusions", "radius_range", "margin"]),
    ("mesh", &["coarse", "refinement", "file"]),
    ("model", &["preset", "reynolds", "darcy", "forchheimer", "t_max", "n_steps", "penalty"]),
    ("boundary", &["left", "right", "bottom", "top", "outflow"]),
    ("multiscale", &["basis", "oversampling", "trace_mass", "cache"]),
    ("compare", &["reference", "candidate"]),
];

fn tokenize(text: &str) -> Result<Entries> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config { line, key: s.into(), msg: "unterminated section header".into() })?
                .trim();
            if !KEYS.iter().any(|(sec, _)| *sec == name) {
                return Err(Error::Config { line, key: name.into(), msg: "unknown section".into() });
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config { line, key: s.into(), msg: "expected `key = value`".into() })?;
        let (k, v) = (k.trim(), v.trim());
        if section.is_empty() {
            return Err(Error::Config { line, key: k.into(), msg: "key outside any section".into() });
        }
        let known = KEYS.iter().find(|(sec, _)| *sec == section).map(|(_, keys)| keys.contains(&k)).unwrap_or(false);
        if !known {
            return Err(Error::Config { line, key: format!("{section}.{k}"), msg: "unknown key".into() });
        }
        out.push(Entry { section: section.clone(), key: k.into(), value: v.into(), line });
    }
    Ok(Entries(out))
}

fn missing(key: &str, msg: &str) -> Error {
    Error::Config { line: 0, key: key.into(), msg: msg.into() }
}

/// Parses a configuration file. Relative paths inside it are resolved
/// against the file's directory.
pub fn parse_config(path: &Path) -> Result<RunSpec> {
    parse_config_as(path, None)
}

/// Like [`parse_config`]; `mode` replaces `run.mode`, which may then be
/// omitted from the file.
pub fn parse_config_as(path: &Path, mode: Option<Mode>) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_text(&text, &base, mode)
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunSpec> {
    parse_config_text(text, base, None)
}

fn parse_config_text(text: &str, base: &Path, mode_override: Option<Mode>) -> Result<RunSpec> {
    let en = tokenize(text)?;
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };

    let mode = match (en.string("run", "mode")?, mode_override) {
        (_, Some(m)) => m,
        (Some(e), None) => {
            Mode::from_name(&e.value).ok_or_else(|| err(e, "expected one of mesh, fine, ms, sweep, compare"))?
        }
        (None, None) => return Err(missing("run.mode", "required")),
    };
    let output = en.string("run", "output")?.map(|e| resolve(&e.value)).unwrap_or_else(|| base.join("out"));
    let seed = en.parse::<u64>("run", "seed")?.unwrap_or(0);

    let bbox = match en.string("domain", "bbox")? {
        Some(e) => {
            let [x0, x1, y0, y1] = fixed::<4>(e)?;
            if !(x1 > x0 && y1 > y0) {
                return Err(err(e, "expected xmin xmax ymin ymax with xmin < xmax, ymin < ymax"));
            }
            Rect::new(x0, x1, y0, y1)
        }
        None => Rect::symmetric_unit(),
    };

    let preset = match en.string("model", "preset")? {
        Some(e) => Some(Preset::from_name(&e.value).ok_or_else(|| err(e, "expected test1, test2 or test3"))?),
        None => None,
    };
    let porosity = en.parse::<f64>("domain", "porosity")?.unwrap_or(ModelParameters::PRESET_POROSITY);

    let literal: Vec<CircleInclusion> = en
        .all("domain", "inclusion")
        .into_iter()
        .map(|e| {
            let [x, y, r] = fixed::<3>(e)?;
            CircleInclusion::new([x, y], r).map_err(|x| err(e, x.to_string()))
        })
        .collect::<Result<_>>()?;
    let inclusions = match en.parse::<usize>("domain", "random_inclusions")? {
        Some(count) => {
            if !literal.is_empty() {
                let e = en.get("domain", "random_inclusions")?.expect("present");
                return Err(err(e, "cannot combine with literal `inclusion` entries"));
            }
            let (r_min, r_max) = match en.string("domain", "radius_range")? {
                Some(e) => {
                    let [a, b] = fixed::<2>(e)?;
                    (a, b)
                }
                None => (0.1, 0.25),
            };
            let margin = en.parse::<f64>("domain", "margin")?.unwrap_or(0.02);
            InclusionSource::Random { count, r_min, r_max, margin }
        }
        None => InclusionSource::Literal(literal),
    };

    let mesh = match en.string("mesh", "file")? {
        Some(e) => {
            let p = resolve(&e.value);
            if !p.exists() {
                return Err(err(e, format!("mesh file {} does not exist", p.display())));
            }
            MeshSource::File(p)
        }
        None => {
            let coarse = match en.list::<usize>("mesh", "coarse")? {
                Some((v, e)) => match v[..] {
                    [nx, ny] if nx > 0 && ny > 0 => (nx, ny),
                    _ => return Err(err(e, "expected two positive integers")),
                },
                None => (4, 4),
            };
            let refinement = en.parse::<usize>("mesh", "refinement")?.unwrap_or(6);
            if refinement == 0 {
                return Err(err(en.get("mesh", "refinement")?.expect("present"), "must be positive"));
            }
            MeshSource::Generate { coarse, refinement }
        }
    };

    let (mut re, mut c, mut t_max) = preset.map(Preset::values).unwrap_or((1.0, 1.0, 0.01));
    let mut n_steps = ModelParameters::PRESET_STEPS;
    if let Some(v) = en.parse("model", "reynolds")? {
        re = v;
    }
    if let Some(v) = en.parse("model", "forchheimer")? {
        c = v;
    }
    if let Some(v) = en.parse("model", "t_max")? {
        t_max = v;
    }
    if let Some(v) = en.parse("model", "n_steps")? {
        n_steps = v;
    }
    let penalty = en.parse::<f64>("model", "penalty")?.unwrap_or(DEFAULT_PENALTY);
    let darcy_values: Vec<f64> = match en.list::<f64>("model", "darcy")? {
        Some((v, e)) if v.is_empty() => return Err(err(e, "expected at least one value")),
        Some((v, _)) => v,
        None => vec![1e-3],
    };
    let model_line = |key: &str| en.0.iter().find(|e| e.section == "model" && e.key == key).map(|e| e.line).unwrap_or(0);
    let params = ModelParameters::new(re, darcy_values[0], c, porosity, t_max, n_steps)
        .and_then(|p| p.with_penalty(penalty))
        .map_err(|e| {
            let key = match &e {
                Error::InvalidParameter { name, .. } => name.to_string(),
                _ => "model".into(),
            };
            Error::Config { line: model_line(&key), key: format!("model.{key}"), msg: e.to_string() }
        })?;
    for (&da, e) in darcy_values.iter().zip(std::iter::repeat(en.get("model", "darcy")?)) {
        if !(da > 0.0 && da.is_finite()) {
            return Err(match e {
                Some(e) => err(e, "Darcy numbers must be positive"),
                None => missing("model.darcy", "must be positive"),
            });
        }
    }
    if darcy_values.len() > 1 && !matches!(mode, Mode::Sweep) {
        let e = en.get("model", "darcy")?.expect("present");
        return Err(err(e, "a list of Darcy numbers is only accepted in sweep mode"));
    }

    let mut boundary_values = [[1.0, 0.0], [0.0; 2], [0.0; 2], [0.0; 2]];
    for side in Side::ALL {
        if let Some(e) = en.string("boundary", side.label())? {
            boundary_values[side.index()] = fixed::<2>(e)?;
        }
    }
    let mut layout = BoundaryLayout([BoundaryKind::Velocity; 4]);
    match en.string("boundary", "outflow")? {
        Some(e) => {
            for s in e.value.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
                if s == "none" {
                    continue;
                }
                let side = Side::from_label(s).ok_or_else(|| err(e, format!("unknown side `{s}`")))?;
                layout.0[side.index()] = BoundaryKind::Outflow;
            }
        }
        None => layout = BoundaryLayout::default(),
    }

    let basis_counts = match en.list::<usize>("multiscale", "basis")? {
        Some((v, e)) => {
            if v.is_empty() || v.contains(&0) {
                return Err(err(e, "expected positive basis counts"));
            }
            v
        }
        None if matches!(mode, Mode::Ms | Mode::Sweep) => {
            return Err(missing("multiscale.basis", "required in ms and sweep modes"))
        }
        None => Vec::new(),
    };
    let oversampling = match en.string("multiscale", "oversampling")? {
        Some(e) => match e.value.as_str() {
            "on" | "true" | "yes" => vec![true],
            "off" | "false" | "no" => vec![false],
            "both" => vec![false, true],
            _ => return Err(err(e, "expected on, off or both")),
        },
        None if matches!(mode, Mode::Sweep) => vec![false, true],
        None => vec![false],
    };
    let trace_mass = match en.string("multiscale", "trace_mass")? {
        Some(e) => match e.value.as_str() {
            "boundary" => TraceMass::Boundary,
            "interior" => TraceMass::Interior,
            _ => return Err(err(e, "expected boundary or interior")),
        },
        None => TraceMass::Boundary,
    };
    let cache_dir = en.string("multiscale", "cache")?.map(|e| resolve(&e.value));

    let path_entry = |key: &str| -> Result<Option<PathBuf>> {
        match en.string("compare", key)? {
            None => Ok(None),
            Some(e) => {
                let p = resolve(&e.value);
                if !p.exists() {
                    return Err(err(e, format!("{} does not exist", p.display())));
                }
                Ok(Some(p))
            }
        }
    };
    let reference = path_entry("reference")?;
    let candidate = path_entry("candidate")?;
    if mode == Mode::Compare && (reference.is_none() || candidate.is_none()) {
        return Err(missing("compare.reference/candidate", "both required in compare mode"));
    }

    Ok(RunSpec {
        mode,
        bbox,
        porosity,
        inclusions,
        seed,
        mesh,
        params,
        darcy_values,
        boundary_values,
        layout,
        basis_counts,
        oversampling,
        trace_mass,
        output,
        cache_dir,
        reference,
        candidate,
    })
}
