//! Experiment configuration: TOML schema, validation and resolved defaults.
//!
//! Sections are deserialized one at a time so that a problem in one section
//! does not hide problems in another; range and consistency checks run on
//! every section that parsed.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use specdecomp_core::bloch::DEFAULT_GRID;
use specdecomp_core::continuum::{self, BoundMethod, FactorData, KernelFamily, NormData};
use specdecomp_core::essential::{CertificateOptions, CrossOptions, DislocationModel, EssentialError};
use specdecomp_core::lattice_ops::{HopJson, LatticeError, LatticeOperator, OperatorJson, SpecJson};
use specdecomp_core::weyl::{DEFAULT_C, DEFAULT_LEVEL};

use crate::source::{Diagnostic, SourceMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PeriodicSpectrum,
    Dislocation,
    Cross,
    Weyl,
    Bounds,
    HyperbolicCheck,
    PseudoresDemo,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::PeriodicSpectrum,
        Command::Dislocation,
        Command::Cross,
        Command::Weyl,
        Command::Bounds,
        Command::HyperbolicCheck,
        Command::PseudoresDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::PeriodicSpectrum => "periodic-spectrum",
            Command::Dislocation => "dislocation",
            Command::Cross => "cross",
            Command::Weyl => "weyl",
            Command::Bounds => "bounds",
            Command::HyperbolicCheck => "hyperbolic-check",
            Command::PseudoresDemo => "pseudores-demo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == name)
    }

    /// Sections the command reads; required ones are marked `true`.
    fn sections(self) -> &'static [(&'static str, bool)] {
        match self {
            Command::PeriodicSpectrum => &[("model", true), ("spectrum", false)],
            Command::Dislocation => &[("model", true), ("spectrum", false), ("certificate", false)],
            Command::Cross => &[("model", true), ("cross", false), ("certificate", false)],
            Command::Weyl => &[("model", true), ("weyl", true)],
            Command::Bounds => &[("bounds", true)],
            Command::HyperbolicCheck => &[],
            Command::PseudoresDemo => &[("pseudores", false)],
        }
    }

    fn uses(self, section: &str) -> bool {
        self.sections().iter().any(|(s, _)| *s == section)
    }
}

const SECTIONS: [&str; 8] = ["model", "spectrum", "cross", "certificate", "weyl", "bounds", "pseudores", "output"];

/// An operator: optional nearest-neighbour Laplacian plus schema terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default)]
    pub laplacian: bool,
    #[serde(default)]
    pub terms: Vec<HopJson>,
}

impl OperatorConfig {
    pub fn build(&self, dim: usize) -> Result<LatticeOperator, LatticeError> {
        let terms: LatticeOperator = OperatorJson {
            dimension: dim,
            terms: self.terms.clone(),
        }
        .try_into()?;
        if self.laplacian {
            LatticeOperator::laplacian(dim).add(&terms)
        } else {
            Ok(terms)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub reference: SpecJson,
    #[serde(default)]
    pub terms: Vec<HopJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub background: OperatorConfig,
    #[serde(default)]
    pub perturbations: Vec<PerturbationConfig>,
}

impl ModelConfig {
    pub fn background(&self) -> Result<LatticeOperator, LatticeError> {
        self.background.build(self.dimension)
    }

    pub fn build(&self) -> Result<DislocationModel, EssentialError> {
        let mut parts = Vec::with_capacity(self.perturbations.len());
        for p in &self.perturbations {
            let op = OperatorConfig {
                laplacian: false,
                terms: p.terms.clone(),
            }
            .build(self.dimension)?;
            parts.push((op, p.reference.to_spec(self.dimension)?));
        }
        DislocationModel::new(self.background()?, parts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub grid: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID }
    }
}

fn default_boxes() -> Vec<usize> {
    vec![100, 200]
}

fn default_c() -> f64 {
    DEFAULT_C
}

fn default_level() -> u64 {
    DEFAULT_LEVEL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylSection {
    /// `[re, im]`.
    pub lambda: [f64; 2],
    #[serde(default = "default_boxes")]
    pub boxes: Vec<usize>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_level")]
    pub level: u64,
    /// Defaults to the first perturbation's reference set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<SpecJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub dimension: usize,
    pub kernel: KernelFamily,
    pub method: BoundMethod,
    #[serde(default)]
    pub norms: Vec<NormData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorData>,
    /// Also report the tail radius at this mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PseudoresSection {
    pub seed: u64,
    pub size: usize,
    /// Base point `[re, im]` of the family.
    pub alpha: [f64; 2],
    /// Point pairs for the resolvent identity.
    pub pairs: usize,
    /// Block sizes for the quotient demo; must sum to `size`.
    pub partition: Vec<usize>,
}

impl Default for PseudoresSection {
    fn default() -> Self {
        Self {
            seed: 7,
            size: 8,
            alpha: [5.0, 0.0],
            pairs: 100,
            partition: vec![3, 3, 2],
        }
    }
}

/// `out/<command>`.
pub fn default_output(command: Command) -> String {
    format!("out/{}", command.as_str())
}

/// Fully resolved configuration; every default is explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross: Option<CrossOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weyl: Option<WeylSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudores: Option<PseudoresSection>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// The subcommand; fills a missing `command` key and must match it.
    pub command: Option<Command>,
    pub output: Option<String>,
    pub grid: Option<usize>,
    /// Replaces the largest box size.
    pub box_size: Option<usize>,
}

macro_rules! section_reader {
    ($name:ident, $field:ident, $ty:ty) => {
        #[derive(Deserialize)]
        struct $name {
            $field: Option<$ty>,
        }
    };
}

section_reader!(ModelOnly, model, ModelConfig);
section_reader!(SpectrumOnly, spectrum, SpectrumSection);
section_reader!(CrossOnly, cross, CrossOptions);
section_reader!(CertificateOnly, certificate, CertificateOptions);
section_reader!(WeylOnly, weyl, WeylSection);
section_reader!(BoundsOnly, bounds, BoundsSection);
section_reader!(PseudoresOnly, pseudores, PseudoresSection);
section_reader!(OutputOnly, output, String);
section_reader!(CommandOnly, command, String);

/// Cap on diagnostics collected from one section.
const MAX_SECTION_ERRORS: usize = 32;

/// Entry of `section` named by a diagnostic key such as `weyl.boxes[0]`.
fn entry_of<'k>(key: &'k str, section: &str) -> Option<&'k str> {
    let rest = key.strip_prefix(section)?.strip_prefix('.')?;
    let end = rest.find(['.', '[']).unwrap_or(rest.len());
    Some(&rest[..end]).filter(|e| !e.is_empty())
}

/// Deserializes one section. serde stops at the first error, so after each
/// failure the offending entry is blanked (line breaks kept) and the section
/// is read again, until it parses or the error cannot be isolated.
fn read<W: DeserializeOwned, T>(
    text: &str,
    section: &str,
    diags: &mut Vec<Diagnostic>,
    pick: impl FnOnce(W) -> Option<T>,
) -> Option<T> {
    let mut current = text.to_string();
    let mut removed: Vec<String> = Vec::new();
    for _ in 0..MAX_SECTION_ERRORS {
        let (map, syntax) = SourceMap::parse(&current);
        if !syntax.is_empty() {
            return None;
        }
        let err = match toml::from_str::<W>(&current) {
            Ok(w) => return if removed.is_empty() { pick(w) } else { None },
            Err(e) => e,
        };
        if removed.iter().any(|r| err.message().contains(&format!("missing field `{r}`"))) {
            return None;
        }
        let d = map.diagnostic(&err, section);
        let entry = entry_of(&d.key, section).map(str::to_string);
        diags.push(d);
        let span = entry.as_deref().and_then(|e| map.entry_span(section, e))?;
        let blank: String = current[span.clone()]
            .chars()
            .map(|ch| if ch == '\n' { '\n' } else { ' ' })
            .collect();
        current.replace_range(span, &blank);
        removed.extend(entry);
    }
    None
}

/// Parses and checks `text`, applies `over`, and returns either the
/// resolved configuration or every diagnostic found.
pub fn load(text: &str, over: &Overrides) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let (map, syntax) = SourceMap::parse(text);
    if !syntax.is_empty() {
        return Err(syntax);
    }
    let mut diags = Vec::new();

    for (key, line) in map.top_keys() {
        if key != "command" && !SECTIONS.contains(&key.as_str()) {
            diags.push(Diagnostic {
                line: Some(line),
                key,
                message: format!("unknown key; expected one of: command, {}", SECTIONS.join(", ")),
            });
        }
    }

    let names: Vec<&str> = Command::ALL.iter().map(|c| c.as_str()).collect();
    let written = read(text, "command", &mut diags, |w: CommandOnly| w.command);
    let command = match (written.as_deref(), over.command) {
        (None, None) => {
            diags.push(Diagnostic {
                line: None,
                key: "command".into(),
                message: format!("missing required key (one of: {})", names.join(", ")),
            });
            None
        }
        (None, Some(c)) => Some(c),
        (Some(name), sub) => match Command::from_name(name) {
            None => {
                diags.push(map.at("command", format!("unknown command `{name}`; expected one of: {}", names.join(", "))));
                None
            }
            Some(c) if sub.is_some_and(|s| s != c) => {
                diags.push(map.at(
                    "command",
                    format!("config is for `{}` but the `{}` subcommand was run", c.as_str(), sub.unwrap().as_str()),
                ));
                None
            }
            Some(c) => Some(c),
        },
    };

    let output = read(text, "output", &mut diags, |w: OutputOnly| w.output);
    let model = read(text, "model", &mut diags, |w: ModelOnly| w.model);
    let spectrum = read(text, "spectrum", &mut diags, |w: SpectrumOnly| w.spectrum);
    let cross = read(text, "cross", &mut diags, |w: CrossOnly| w.cross);
    let certificate = read(text, "certificate", &mut diags, |w: CertificateOnly| w.certificate);
    let weyl = read(text, "weyl", &mut diags, |w: WeylOnly| w.weyl);
    let bounds = read(text, "bounds", &mut diags, |w: BoundsOnly| w.bounds);
    let pseudores = read(text, "pseudores", &mut diags, |w: PseudoresOnly| w.pseudores);

    let Some(command) = command else {
        return Err(sorted(diags));
    };

    let present = map.top_keys();
    for (key, _) in &present {
        if SECTIONS.contains(&key.as_str()) && key != "output" && !command.uses(key) {
            diags.push(map.at(key, format!("section is not used by `{}`", command.as_str())));
        }
    }
    for (section, required) in command.sections() {
        if *required && !present.iter().any(|(k, _)| k == section) {
            diags.push(Diagnostic {
                line: None,
                key: section.to_string(),
                message: format!("missing required section for `{}`", command.as_str()),
            });
        }
    }

    let uses = |s: &str| command.uses(s);
    let dim = model.as_ref().map(|m| m.dimension).unwrap_or(1);
    let mut cfg = ExperimentConfig {
        command,
        output: over.output.clone().or(output).unwrap_or_else(|| default_output(command)),
        model: model.filter(|_| uses("model")),
        spectrum: uses("spectrum").then(|| spectrum.unwrap_or_default()),
        cross: uses("cross").then(|| cross.unwrap_or_default()),
        certificate: uses("certificate").then(|| certificate.unwrap_or_else(|| CertificateOptions::for_dim(dim))),
        weyl: weyl.filter(|_| uses("weyl")),
        bounds: bounds.filter(|_| uses("bounds")),
        pseudores: uses("pseudores").then(|| pseudores.unwrap_or_default()),
    };

    apply_overrides(&mut cfg, over, &mut diags);
    check(&cfg, &map, &mut diags);
    if diags.is_empty() {
        Ok(cfg)
    } else {
        Err(sorted(diags))
    }
}

/// Document order; diagnostics without a line go last.
fn sorted(mut diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    diags.sort_by_key(|d| d.line.unwrap_or(usize::MAX));
    diags
}

fn apply_overrides(cfg: &mut ExperimentConfig, over: &Overrides, diags: &mut Vec<Diagnostic>) {
    if let Some(grid) = over.grid {
        if let Some(s) = cfg.spectrum.as_mut() {
            s.grid = grid;
        } else if let Some(c) = cfg.cross.as_mut() {
            c.grid = grid;
        } else {
            diags.push(Diagnostic {
                line: None,
                key: "--grid".into(),
                message: format!("`{}` has no grid to override", cfg.command.as_str()),
            });
        }
    }
    if let Some(b) = over.box_size {
        let boxes = if let Some(c) = cfg.certificate.as_mut() {
            Some(&mut c.boxes)
        } else {
            cfg.weyl.as_mut().map(|w| &mut w.boxes)
        };
        match boxes.and_then(|v| v.last_mut()) {
            Some(last) => *last = b,
            None => diags.push(Diagnostic {
                line: None,
                key: "--box".into(),
                message: format!("`{}` has no box sizes to override", cfg.command.as_str()),
            }),
        }
    }
}

fn check_boxes(key: &str, boxes: &[usize], min_len: usize, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    if boxes.len() < min_len {
        diags.push(map.at(key, format!("needs at least {min_len} box sizes, got {}", boxes.len())));
    }
    for (i, &b) in boxes.iter().enumerate() {
        if b == 0 {
            diags.push(map.at(&format!("{key}[{i}]"), "box sizes must be positive"));
        }
    }
    if boxes.windows(2).any(|w| w[1] <= w[0]) {
        diags.push(map.at(key, format!("box sizes must increase strictly, got {boxes:?}")));
    }
}

fn positive(key: &str, v: f64, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    if !(v > 0.0 && v.is_finite()) {
        diags.push(map.at(key, format!("must be positive, got {v}")));
    }
}

fn nonzero(key: &str, v: usize, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    if v == 0 {
        diags.push(map.at(key, "must be at least 1"));
    }
}

fn check(cfg: &ExperimentConfig, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    if cfg.output.is_empty() {
        diags.push(map.at("output", "must not be empty"));
    }
    if let Some(m) = &cfg.model {
        check_model(cfg.command, m, map, diags);
    }
    if let Some(s) = &cfg.spectrum {
        nonzero("spectrum.grid", s.grid, map, diags);
    }
    if let Some(c) = &cfg.cross {
        nonzero("cross.grid", c.grid, map, diags);
        nonzero("cross.fiber_box", c.fiber_box, map, diags);
        nonzero("cross.fiber.grid", c.fiber.grid, map, diags);
        positive("cross.fiber.boundary", c.fiber.boundary, map, diags);
        positive("cross.fiber.gap", c.fiber.gap, map, diags);
        positive("cross.fiber.stability", c.fiber.stability, map, diags);
    }
    if let Some(c) = &cfg.certificate {
        check_boxes("certificate.boxes", &c.boxes, 1, map, diags);
        nonzero("certificate.samples", c.samples, map, diags);
        nonzero("certificate.max_iterations", c.max_iterations, map, diags);
        positive("certificate.threshold", c.threshold, map, diags);
    }
    if let Some(w) = &cfg.weyl {
        check_boxes("weyl.boxes", &w.boxes, 2, map, diags);
        if !(w.c > 0.0 && w.c <= 1.0) {
            diags.push(map.at("weyl.c", format!("must lie in (0, 1], got {}", w.c)));
        }
        if !w.lambda.iter().all(|x| x.is_finite()) {
            diags.push(map.at("weyl.lambda", "must be finite"));
        }
        if let (Some(spec), Some(m)) = (&w.reference, &cfg.model) {
            if let Err(e) = spec.to_spec(m.dimension) {
                diags.push(map.at("weyl.reference", e.to_string()));
            }
        }
        if w.reference.is_none() && cfg.model.as_ref().is_some_and(|m| m.perturbations.is_empty()) {
            diags.push(map.at("weyl.reference", "required when the model has no perturbations"));
        }
    }
    if let Some(b) = &cfg.bounds {
        check_bounds(b, map, diags);
    }
    if let Some(p) = &cfg.pseudores {
        nonzero("pseudores.size", p.size, map, diags);
        nonzero("pseudores.pairs", p.pairs, map, diags);
        if p.size > 256 {
            diags.push(map.at("pseudores.size", format!("at most 256, got {}", p.size)));
        }
        let sum: usize = p.partition.iter().sum();
        if sum != p.size || p.partition.contains(&0) {
            diags.push(map.at(
                "pseudores.partition",
                format!("positive block sizes summing to size = {} expected, got {:?}", p.size, p.partition),
            ));
        }
        if !p.alpha.iter().all(|x| x.is_finite()) {
            diags.push(map.at("pseudores.alpha", "must be finite"));
        }
    }
}

fn check_model(command: Command, m: &ModelConfig, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    if m.dimension != 1 && m.dimension != 2 {
        diags.push(map.at("model.dimension", format!("must be 1 or 2, got {}", m.dimension)));
        return;
    }
    let mut ok = true;
    if let Err(e) = m.background() {
        diags.push(map.at("model.background", e.to_string()));
        ok = false;
    }
    for (i, p) in m.perturbations.iter().enumerate() {
        let op = OperatorConfig {
            laplacian: false,
            terms: p.terms.clone(),
        };
        if let Err(e) = op.build(m.dimension) {
            diags.push(map.at(&format!("model.perturbations[{i}].terms"), e.to_string()));
            ok = false;
        }
        if let Err(e) = p.reference.to_spec(m.dimension) {
            diags.push(map.at(&format!("model.perturbations[{i}].reference"), e.to_string()));
            ok = false;
        }
    }
    if command == Command::PeriodicSpectrum && !m.perturbations.is_empty() {
        diags.push(map.at("model.perturbations", "periodic-spectrum takes the background only"));
    }
    if command == Command::Cross && m.dimension != 2 {
        diags.push(map.at("model.dimension", "cross needs a two-dimensional model"));
    }
    if command == Command::Dislocation {
        let half_space = |p: &PerturbationConfig| matches!(p.reference, SpecJson::HalfSpace { .. });
        if m.perturbations.len() != 1 || !half_space(&m.perturbations[0]) {
            diags.push(map.at("model.perturbations", "dislocation needs exactly one perturbation with a half-space reference"));
        }
    }
    if command == Command::Cross {
        let mut seen = [false; 2];
        for (i, p) in m.perturbations.iter().enumerate() {
            let axis = match &p.reference {
                SpecJson::Strip { axis, .. } => Some(*axis),
                SpecJson::CoordinateLine { axes } if axes.len() == 1 => Some(axes[0]),
                _ => None,
            };
            match axis {
                Some(a) if a < 2 && !seen[a] => seen[a] = true,
                Some(a) if a < 2 => diags.push(map.at(
                    &format!("model.perturbations[{i}].reference"),
                    format!("a second perturbation confined along axis {a}"),
                )),
                _ => diags.push(map.at(
                    &format!("model.perturbations[{i}].reference"),
                    "cross needs a strip or single-axis coordinate-line reference",
                )),
            }
        }
    }
    if ok {
        if let Err(e) = m.build() {
            let key = match &e {
                EssentialError::SupportViolation { index, .. } => format!("model.perturbations[{index}]"),
                EssentialError::BackgroundNotPeriodic { .. } => "model.background".to_string(),
                _ => "model".to_string(),
            };
            diags.push(map.at(&key, e.to_string()));
        }
    }
}

fn check_norms(key: &str, norms: &[NormData], map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    for (i, n) in norms.iter().enumerate() {
        if !(n.p >= 1.0) {
            diags.push(map.at(&format!("{key}[{i}].p"), format!("must be at least 1, got {}", n.p)));
        }
        if !(n.value >= 0.0 && n.value.is_finite()) {
            diags.push(map.at(&format!("{key}[{i}].value"), format!("must be a nonnegative number, got {}", n.value)));
        }
    }
}

fn check_bounds(b: &BoundsSection, map: &SourceMap<'_>, diags: &mut Vec<Diagnostic>) {
    let kernel = match continuum::kernel_make(b.dimension, b.kernel) {
        Ok(k) => Some(k),
        Err(e) => {
            let key = if b.dimension != 1 && b.dimension != 3 { "bounds.dimension" } else { "bounds.kernel" };
            diags.push(map.at(key, e.to_string()));
            None
        }
    };
    check_norms("bounds.norms", &b.norms, map, diags);
    if let Some(f) = &b.factor {
        check_norms("bounds.factor.w_norms", &f.w_norms, map, diags);
    }
    match b.method {
        BoundMethod::Holder | BoundMethod::Fourier if b.norms.is_empty() => {
            diags.push(map.at("bounds.norms", "the method needs at least one potential norm"));
        }
        BoundMethod::Multibody if b.factor.as_ref().is_none_or(|f| f.w_norms.is_empty()) => {
            diags.push(map.at("bounds.factor", "multibody needs factor.w_norms"));
        }
        _ => {}
    }
    if let (Some(eps), Some(k)) = (b.tail_epsilon, kernel) {
        if !(eps > 0.0 && eps < k.mass()) {
            diags.push(map.at("bounds.tail_epsilon", format!("must lie in (0, {}), got {eps}", k.mass())));
        }
    }
}
