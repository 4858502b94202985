//! Executes a resolved configuration and writes its artifacts.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use specdecomp_core::continuum::{self, PotentialSpec};
use specdecomp_core::essential::{self, DecompositionResult};
use specdecomp_core::linalg::{self, c, CMatrix, C64};
use specdecomp_core::pseudores::{self, ResolventFamily};
use specdecomp_core::spectrum::{hausdorff, SpectrumSet, Tag};
use specdecomp_core::{bloch, hyperbolic, svg, weyl};
use thiserror::Error;

use crate::config::{Command, ExperimentConfig, PseudoresSection};
use crate::source::Diagnostic;

pub const TOOL: &str = "specdecomp";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration ({} problem{})", .0.len(), if .0.len() == 1 { "" } else { "s" })]
    Invalid(Vec<Diagnostic>),
    #[error("{module}: {message}")]
    Numeric {
        module: &'static str,
        message: String,
        detail: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numeric { .. } | CliError::Io { .. } => 2,
        }
    }
}

fn numeric<E: std::error::Error + Debug>(module: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Numeric {
        module,
        message: e.to_string(),
        detail: format!("{e:?}"),
    }
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub output: PathBuf,
    pub artifacts: Vec<String>,
    /// One-line result for the terminal.
    pub headline: String,
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value).expect("JSON values serialize");
        body.push('\n');
        self.text(name, &body)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Puts `meta` in a `<metadata>` element right after the opening tag.
fn with_metadata(svg: &str, meta: &str) -> String {
    let open = svg.find("<svg").and_then(|i| svg[i..].find('>').map(|j| i + j + 1));
    match open {
        Some(at) => format!("{}\n<metadata>{}</metadata>{}", &svg[..at], xml_escape(meta), &svg[at..]),
        None => svg.to_string(),
    }
}

fn spectrum_artifacts(w: &mut Writer, config: &Value, spectrum: &SpectrumSet, title: &str) -> Result<(), CliError> {
    let compact = config.to_string();
    w.json("spectrum.json", &json!({ "config": config, "spectrum": spectrum.to_json() }))?;
    w.text("spectrum.csv", &format!("# config: {compact}\n{}", spectrum.to_csv()))?;
    w.text("spectrum.svg", &with_metadata(&spectrum.to_svg(title), &compact))
}

fn decomposition(w: &mut Writer, config: &Value, out: &DecompositionResult, title: &str) -> Result<String, CliError> {
    spectrum_artifacts(w, config, &out.spectrum, title)?;
    let cert = &out.certificate;
    w.json("certificate.json", &json!({ "config": config, "certificate": cert }))?;
    Ok(format!(
        "{} spectral points; certificate: {} samples, {} warnings",
        out.spectrum.len(),
        cert.points.len(),
        cert.warnings.len()
    ))
}

/// Runs `cfg` and writes its artifacts under `cfg.output`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let dir = PathBuf::from(&cfg.output);
    let mut w = Writer::new(&dir)?;
    let config = serde_json::to_value(cfg).expect("config serializes");
    let result = execute(cfg, &config, &mut w);
    let headline = match result {
        Ok(h) => h,
        Err(e) => {
            if let CliError::Numeric { module, message, detail } = &e {
                w.json("error.json", &json!({ "module": module, "message": message, "detail": detail }))?;
            }
            return Err(e);
        }
    };
    let mut artifacts = w.written.clone();
    artifacts.push("run-metadata.json".into());
    w.json(
        "run-metadata.json",
        &json!({
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": cfg.command.as_str(),
            "config": config,
            "artifacts": artifacts,
        }),
    )?;
    Ok(RunSummary {
        output: dir,
        artifacts,
        headline,
    })
}

fn execute(cfg: &ExperimentConfig, config: &Value, w: &mut Writer) -> Result<String, CliError> {
    let model = || cfg.model.as_ref().expect("validated: model present");
    match cfg.command {
        Command::PeriodicSpectrum => {
            let bg = model().background().map_err(numeric("lattice_ops"))?;
            let grid = cfg.spectrum.as_ref().expect("validated").grid;
            let s = bloch::periodic_spectrum(&bg, grid).map_err(numeric("bloch"))?;
            spectrum_artifacts(w, config, &s, "periodic spectrum")?;
            Ok(format!("{} spectral points", s.len()))
        }
        Command::Dislocation => {
            let m = model().build().map_err(numeric("essential"))?;
            let grid = cfg.spectrum.as_ref().expect("validated").grid;
            let cert = cfg.certificate.as_ref().expect("validated");
            let out = essential::dislocation_spectrum(&m, grid, cert).map_err(numeric("essential"))?;
            decomposition(w, config, &out, "dislocation: essential spectrum")
        }
        Command::Cross => {
            let m = model().build().map_err(numeric("essential"))?;
            let opts = cfg.cross.as_ref().expect("validated");
            let cert = cfg.certificate.as_ref().expect("validated");
            let out = essential::cross_spectrum(&m, opts, cert).map_err(numeric("essential"))?;
            decomposition(w, config, &out, "cross: essential spectrum")
        }
        Command::Weyl => run_weyl(cfg, config, w),
        Command::Bounds => run_bounds(cfg, config, w),
        Command::HyperbolicCheck => {
            let rows = hyperbolic::identity_table().map_err(numeric("hyperbolic"))?;
            let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            w.json(
                "identities.json",
                &json!({ "config": config, "all_pass": failed.is_empty(), "rows": rows }),
            )?;
            if failed.is_empty() {
                Ok(format!("{} identities pass", rows.len()))
            } else {
                Err(CliError::Numeric {
                    module: "hyperbolic",
                    message: format!("{} of {} identities failed", failed.len(), rows.len()),
                    detail: failed.join(", "),
                })
            }
        }
        Command::PseudoresDemo => {
            let p = cfg.pseudores.as_ref().expect("validated");
            let report = pseudores_demo(p)?;
            let headline = format!(
                "extension error {:.1e}, identity residual {:.1e}",
                report["extension"]["max_relative_error"].as_f64().unwrap_or(f64::NAN),
                report["resolvent_identity"]["max_residual"].as_f64().unwrap_or(f64::NAN),
            );
            w.json("pseudores.json", &json!({ "config": config, "report": report }))?;
            Ok(headline)
        }
    }
}

fn run_weyl(cfg: &ExperimentConfig, config: &Value, w: &mut Writer) -> Result<String, CliError> {
    let m = cfg.model.as_ref().expect("validated");
    let ws = cfg.weyl.as_ref().expect("validated");
    let model = m.build().map_err(numeric("essential"))?;
    let reference = ws
        .reference
        .as_ref()
        .map(|s| s.to_spec(m.dimension))
        .transpose()
        .map_err(numeric("lattice_ops"))?;
    let lambda = c(ws.lambda[0], ws.lambda[1]);
    let report = weyl::surface_verdict(&model, lambda, &ws.boxes, ws.c, ws.level, reference.as_ref())
        .map_err(numeric("weyl"))?;
    w.json("weyl-report.json", &json!({ "config": config, "report": report }))?;
    let lines: Vec<(String, Vec<f64>)> = report
        .reports
        .iter()
        .map(|r| (format!("L = {}", r.box_half_width), r.profile.clone()))
        .collect();
    let title = format!("localization at lambda = {}{:+}i", ws.lambda[0], ws.lambda[1]);
    let plot = svg::profile(&title, "n", "||p_n phi||", &lines);
    w.text("profile.svg", &with_metadata(&plot, &config.to_string()))?;
    let verdict = serde_json::to_value(report.verdict).expect("verdict serializes");
    Ok(format!("verdict: {}", verdict.as_str().unwrap_or("?")))
}

fn run_bounds(cfg: &ExperimentConfig, config: &Value, w: &mut Writer) -> Result<String, CliError> {
    let b = cfg.bounds.as_ref().expect("validated");
    let kernel = continuum::kernel_make(b.dimension, b.kernel).map_err(numeric("continuum"))?;
    let potential = PotentialSpec {
        norms: b.norms.clone(),
        factor: b.factor.clone(),
    };
    let cert = continuum::relative_bound(&potential, &kernel, b.method).map_err(numeric("continuum"))?;
    let tail = b
        .tail_epsilon
        .map(|eps| continuum::tail_radius(&kernel, eps))
        .transpose()
        .map_err(numeric("continuum"))?;
    let mut out = json!({ "config": config, "certificate": cert, "kernel_mass": kernel.mass() });
    if let (Some(eps), Some(r)) = (b.tail_epsilon, tail) {
        out["tail"] = json!({ "epsilon": eps, "radius": r });
    }
    w.json("bounds.json", &out)?;
    Ok(format!("relative bound {:.6e} (< 1: {})", cert.bound, cert.relative_bound_lt_1))
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn off_spectrum(r: &mut ChaCha8Rng, eig: &[C64], gap: f64) -> C64 {
    loop {
        let z = c(r.random_range(-4.0..4.0), r.random_range(-4.0..4.0));
        if eig.iter().all(|e| (e - z).norm() > gap) {
            return z;
        }
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Seeded checks of the pseudo-resolvent machinery on a random generator.
fn pseudores_demo(p: &PseudoresSection) -> Result<Value, CliError> {
    let err = numeric("pseudores");
    let lin = numeric("linalg");
    let mut r = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.size;
    let a = random_matrix(&mut r, n);
    let eig = linalg::eigenvalues(&a).map_err(&lin)?;
    let alpha = c(p.alpha[0], p.alpha[1]);
    let fam = ResolventFamily::from_generator(&a, alpha).map_err(&err)?;
    let id = CMatrix::identity(n, n);

    let mut ext_err: f64 = 0.0;
    let mut worst_cond: f64 = 1.0;
    let mut ident: f64 = 0.0;
    let mut commute: f64 = 0.0;
    for _ in 0..p.pairs {
        let (za, zb) = (off_spectrum(&mut r, &eig, 0.3), off_spectrum(&mut r, &eig, 0.3));
        let ea = pseudores::extend(&fam, za).map_err(&err)?;
        let eb = pseudores::extend(&fam, zb).map_err(&err)?;
        let direct = linalg::inverse(&(&id * za - &a), 1e-14).map_err(&lin)?;
        ext_err = ext_err.max(linalg::norm2(&(&ea.matrix - &direct)) / linalg::norm2(&direct).max(1.0));
        worst_cond = worst_cond.max(ea.cond).max(eb.cond);
        let (ra, rb) = (&ea.matrix, &eb.matrix);
        let scale = linalg::norm2(ra).max(1.0) * linalg::norm2(rb).max(1.0);
        ident = ident.max(linalg::norm2(&(ra - rb - ra * rb * (zb - za))) / scale);
        commute = commute.max(linalg::norm2(&(ra * rb - rb * ra)) / scale);
    }

    let ps = pseudores::pseudo_spectrum(&fam).map_err(&err)?;
    let recovery = hausdorff(&ps.values(), &eig);

    let z = off_spectrum(&mut r, &eig, 0.3);
    let base = SpectrumSet::from_values(eig.iter().copied(), Tag::Discrete);
    let mapped = pseudores::spectrum_map(z, &base, false).map_err(&err)?;
    let back = pseudores::spectrum_unmap(z, &mapped);
    let round_trip = hausdorff(&back.values(), &eig);

    let mut block = Vec::with_capacity(n);
    for (b, &k) in p.partition.iter().enumerate() {
        block.extend(std::iter::repeat_n(b, k));
    }
    let mut m = random_matrix(&mut r, n);
    for i in 0..n {
        for j in 0..n {
            if block[i] > block[j] {
                m[(i, j)] = c(0.0, 0.0);
            }
        }
    }
    let blocks = pseudores::quotient_block_spectrum(&m, &p.partition).map_err(&err)?;

    Ok(json!({
        "generator_residual": fam.generator_residual(),
        "extension": { "pairs": p.pairs, "max_relative_error": ext_err, "max_condition": worst_cond },
        "resolvent_identity": { "max_residual": ident, "max_commutator": commute },
        "pseudo_spectrum": {
            "eigenvalues": eig.iter().map(|&e| cjson(e)).collect::<Vec<_>>(),
            "recovered": ps.to_json(),
            "hausdorff": recovery,
        },
        "spectrum_map": { "z": cjson(z), "mapped": mapped.to_json(), "round_trip_hausdorff": round_trip },
        "block_quotient": {
            "partition": p.partition,
            "full": blocks.full.to_json(),
            "quotient": blocks.quotient.to_json(),
            "inclusion": blocks.inclusion,
            "hausdorff": hausdorff(&blocks.full.values(), &blocks.quotient.values()),
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_goes_inside_the_root_element() {
        let svg = "<?xml version=\"1.0\"?>\n<svg width=\"10\"><g/></svg>";
        let out = with_metadata(svg, "{\"a\":\"<b>&\"}");
        assert!(out.contains("<svg width=\"10\">\n<metadata>{\"a\":\"&lt;b&gt;&amp;\"}</metadata><g/>"));
    }

    #[test]
    fn pseudores_demo_is_reproducible() {
        let p = PseudoresSection::default();
        let a = pseudores_demo(&p).unwrap();
        assert_eq!(a, pseudores_demo(&p).unwrap());
        assert!(a["extension"]["max_relative_error"].as_f64().unwrap() <= 1e-10);
        assert!(a["resolvent_identity"]["max_residual"].as_f64().unwrap() <= 1e-9);
        assert!(a["block_quotient"]["inclusion"]["holds"].as_bool().unwrap());
    }
}
