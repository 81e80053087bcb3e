//! Command execution: load documents, dispatch into the library, shape the
//! result objects.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use cbnorm::closedform::{smallest_enclosing_disc, unitary_pair_norm};
use cbnorm::minimizer::{bounds_report, cb_norm, diamond_norm, NormEstimate, SearchConfig};
use cbnorm::numerics::eigenvalues;
use cbnorm::reduction::tensor_rank;
use cbnorm::superop::CP_TOL;

use crate::document::MapDocument;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Options shared by every subcommand; mirrors the command-line flags.
#[derive(Debug, Clone)]
pub struct CommonOpts {
    pub iterations: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub refine: bool,
    pub eigen_floor: f64,
    pub trace: Option<PathBuf>,
    pub format: Format,
}

impl CommonOpts {
    fn search_config(&self) -> SearchConfig {
        SearchConfig {
            iterations: self.iterations,
            seed: self.seed,
            eigen_floor: self.eigen_floor,
            refine: self.refine,
            tol: self.tol.unwrap_or(1e-8),
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NormOutput {
    pub value: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    pub p: usize,
    pub seed: u64,
    pub elapsed_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct IsCpOutput {
    pub cp: bool,
    pub min_choi_eigenvalue: f64,
    pub n: usize,
    pub k: usize,
    pub elapsed_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct ClosedFormOutput {
    pub value: f64,
    pub exact: bool,
    pub disc_center: [f64; 2],
    pub disc_radius: f64,
    pub elapsed_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct BoundsOutput {
    pub cb_upper: f64,
    pub exact: bool,
    pub cb_lower: f64,
    pub phi_norm_lower: f64,
    pub cap_factor: f64,
    pub iterations: usize,
    pub seed: u64,
    pub elapsed_ms: u128,
}

/// Rendered result: the JSON object and a plain-text form of the same data.
#[derive(Debug)]
pub struct Rendered {
    pub json: String,
    pub text: String,
}

impl Rendered {
    pub fn for_format(&self, format: Format) -> &str {
        match format {
            Format::Json => &self.json,
            Format::Text => &self.text,
        }
    }
}

fn render<T: Serialize>(value: &T, text: String) -> Result<Rendered, CliError> {
    let json = serde_json::to_string(value)
        .map_err(|err| CliError::Internal(format!("serialization failed: {err}")))?;
    Ok(Rendered { json, text })
}

fn write_trace(path: &Path, trace: &[(usize, f64)]) -> Result<(), CliError> {
    let rows: Vec<(usize, f64)> = trace.to_vec();
    let body = serde_json::to_string(&rows)
        .map_err(|err| CliError::Internal(format!("trace serialization failed: {err}")))?;
    std::fs::write(path, body).map_err(|err| CliError::Validation {
        code: "invalid_parameter",
        message: format!("cannot write trace file {}: {err}", path.display()),
    })
}

fn norm_output(
    estimate: NormEstimate,
    p: usize,
    opts: &CommonOpts,
    started: Instant,
) -> Result<Rendered, CliError> {
    let trace_path = match (&opts.trace, estimate.trace.is_empty()) {
        (Some(path), _) => {
            write_trace(path, &estimate.trace)?;
            Some(path.display().to_string())
        }
        (None, _) => None,
    };
    let out = NormOutput {
        value: estimate.value,
        exact: estimate.exact,
        lower_bound: estimate.lower_bound,
        iterations: opts.iterations,
        p,
        seed: opts.seed,
        elapsed_ms: started.elapsed().as_millis(),
        trace: trace_path,
        warning: estimate.warning,
    };
    let mut text = format!(
        "value: {:.12}\nexact: {}\niterations: {}\np: {}\nseed: {}\nelapsed_ms: {}",
        out.value, out.exact, out.iterations, out.p, out.seed, out.elapsed_ms
    );
    if let Some(lb) = out.lower_bound {
        text.push_str(&format!("\nlower_bound: {lb:.12}"));
    }
    if let Some(w) = &out.warning {
        text.push_str(&format!("\nwarning: {w}"));
    }
    render(&out, text)
}

pub fn cmd_cb(map: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let rep = MapDocument::load(map)?.to_rep()?;
    let estimate = cb_norm(&rep, &opts.search_config())?;
    let p = tensor_rank(&rep)?;
    norm_output(estimate, p, opts, started)
}

pub fn cmd_diamond(map: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let rep = MapDocument::load(map)?.to_rep()?;
    let estimate = diamond_norm(&rep, &opts.search_config())?;
    let p = tensor_rank(&rep)?;
    norm_output(estimate, p, opts, started)
}

pub fn cmd_is_cp(map: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let doc = MapDocument::load(map)?;
    let rep = doc.to_rep()?;
    let tol = opts.tol.unwrap_or(CP_TOL);
    let choi = rep.choi();
    let cp = rep.is_cp(tol)?;
    let min_eig = choi.min_eigenvalue()?;
    let out = IsCpOutput {
        cp,
        min_choi_eigenvalue: min_eig,
        n: doc.n,
        k: doc.k,
        elapsed_ms: started.elapsed().as_millis(),
    };
    let text = format!(
        "cp: {}\nmin_choi_eigenvalue: {:.6e}\nelapsed_ms: {}",
        out.cp, out.min_choi_eigenvalue, out.elapsed_ms
    );
    render(&out, text)
}

pub fn cmd_closed_form(map: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let doc = MapDocument::load(map)?;
    let (u, v) = doc.unitary_pair()?;
    let value = unitary_pair_norm(&u, &v)?;
    let w = v.adjoint() * &u;
    let eigs: Vec<_> = eigenvalues(&w)?.into_iter().map(|z| z / z.norm()).collect();
    let disc = smallest_enclosing_disc(&eigs);
    let out = ClosedFormOutput {
        value,
        exact: true,
        disc_center: [disc.center.re, disc.center.im],
        disc_radius: disc.radius,
        elapsed_ms: started.elapsed().as_millis(),
    };
    let text = format!(
        "value: {:.12}\nexact: true\ndisc_center: {:.12} {:+.12}i\ndisc_radius: {:.12}\nelapsed_ms: {}",
        out.value, out.disc_center[0], out.disc_center[1], out.disc_radius, out.elapsed_ms
    );
    let _ = opts;
    render(&out, text)
}

pub fn cmd_bounds(map: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let rep = MapDocument::load(map)?.to_rep()?;
    let report = bounds_report(&rep, &opts.search_config())?;
    let out = BoundsOutput {
        cb_upper: report.cb_upper,
        exact: report.exact,
        cb_lower: report.cb_lower,
        phi_norm_lower: report.phi_norm_lower,
        cap_factor: report.cap_factor,
        iterations: opts.iterations,
        seed: opts.seed,
        elapsed_ms: started.elapsed().as_millis(),
    };
    let text = format!(
        "cb_upper: {:.12}\ncb_lower: {:.12}\nexact: {}\nphi_norm_lower: {:.12}\ncap_factor: {:.6}\nelapsed_ms: {}",
        out.cb_upper, out.cb_lower, out.exact, out.phi_norm_lower, out.cap_factor, out.elapsed_ms
    );
    render(&out, text)
}

pub fn cmd_distance(map_a: &Path, map_b: &Path, opts: &CommonOpts) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let rep_a = MapDocument::load(map_a)?.to_rep()?;
    let rep_b = MapDocument::load(map_b)?.to_rep()?;
    if rep_a.n() != rep_b.n() || rep_a.k() != rep_b.k() {
        return Err(CliError::dimension_mismatch(format!(
            "maps have different dimensions: M_{} -> M_{} vs M_{} -> M_{}",
            rep_a.n(),
            rep_a.k(),
            rep_b.n(),
            rep_b.k()
        )));
    }
    let difference = rep_a.subtract(&rep_b)?;
    let estimate = diamond_norm(&difference, &opts.search_config())?;
    let p = tensor_rank(&difference)?;
    norm_output(estimate, p, opts, started)
}
